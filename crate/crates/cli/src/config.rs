//! Experiment configuration: a flat, typed key-value text format with
//! sections. Parsing reports line and key context; `parse(print(c)) == c`.

use std::fmt;

use fockmf::C64;

/// A config problem, with enough context to locate it in the file.
#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let Some(line) = self.line {
            write!(f, " at line {line}")?;
        }
        if let Some(key) = &self.key {
            write!(f, " (key `{key}`)")?;
        }
        write!(f, ": {}", self.msg)
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, key: Option<&str>, msg: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        key: key.map(str::to_owned),
        msg: msg.into(),
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

/// Which concrete model supplies the Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// Seeded random one-particle operator plus a normalized two-body kernel.
    TwoBody { d: usize, seed: u64 },
    /// Lowest-Landau-level interactions `sum_p alpha_p Q_p` on `modes` modes.
    Lll {
        h: f64,
        modes: usize,
        interactions: Vec<(usize, f64)>,
    },
    /// Bosonized Hartree-von Neumann system on an `m`-point grid.
    Hvn { m: usize, seed: u64 },
}

impl ModelSpec {
    /// Phase-space dimension the state vectors must match.
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::TwoBody { d, .. } => *d,
            ModelSpec::Lll { modes, .. } => *modes,
            ModelSpec::Hvn { m, .. } => m * m,
        }
    }
}

/// State family; `vector` entries feed coherent and Hermite states,
/// `weights` feed tensor mixtures and Gibbs states.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Coherent(Vec<C64>),
    Hermite(Vec<C64>),
    Tensor(Vec<f64>),
    Gibbs(Vec<f64>),
}

impl StateSpec {
    pub fn dim(&self) -> usize {
        match self {
            StateSpec::Coherent(v) | StateSpec::Hermite(v) => v.len(),
            StateSpec::Tensor(w) | StateSpec::Gibbs(w) => w.len(),
        }
    }
}

/// An observable symbol the study evaluates on both sides.
#[derive(Debug, Clone, PartialEq)]
pub enum ObsSpec {
    /// `(|z|^2)^k`.
    NormPower(usize),
    /// The single-mode number symbol `|z_j|^2`.
    ModeNumber(usize),
}

/// How the truncation level is chosen per `eps`.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    Fixed(usize),
    Adaptive { budget: f64, cap: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub state: StateSpec,
    pub tail_budget: f64,
    pub eps_schedule: Vec<f64>,
    pub times: Vec<f64>,
    pub observables: Vec<ObsSpec>,
    pub policy: PolicySpec,
    pub output: String,
    pub seed: u64,
    pub bbgky_orders: Vec<usize>,
}

impl ExperimentConfig {
    /// Structural invariants shared by every subcommand.
    pub fn validate(&self) -> Result<()> {
        if self.eps_schedule.is_empty() {
            return Err(err(None, Some("grid.eps"), "eps schedule must be non-empty"));
        }
        for w in self.eps_schedule.windows(2) {
            if w[1] >= w[0] {
                return Err(err(
                    None,
                    Some("grid.eps"),
                    "eps schedule must be strictly decreasing",
                ));
            }
        }
        if self.eps_schedule.iter().any(|&e| e <= 0.0) {
            return Err(err(None, Some("grid.eps"), "eps values must be positive"));
        }
        if !(self.tail_budget > 0.0) {
            return Err(err(None, Some("state.tail_budget"), "tail budget must be > 0"));
        }
        if self.state.dim() != self.model.dim() {
            return Err(err(
                None,
                Some("state"),
                format!(
                    "state dimension {} does not match the model phase space {}",
                    self.state.dim(),
                    self.model.dim()
                ),
            ));
        }
        Ok(())
    }
}

fn fmt_c64(z: C64) -> String {
    if z.im >= 0.0 {
        format!("{}+{}i", z.re, z.im)
    } else {
        format!("{}{}i", z.re, z.im)
    }
}

fn fmt_floats(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[model]")?;
        match &self.model {
            ModelSpec::TwoBody { d, seed } => {
                writeln!(f, "kind = twobody")?;
                writeln!(f, "d = {d}")?;
                writeln!(f, "model_seed = {seed}")?;
            }
            ModelSpec::Lll {
                h,
                modes,
                interactions,
            } => {
                writeln!(f, "kind = lll")?;
                writeln!(f, "h = {h}")?;
                writeln!(f, "modes = {modes}")?;
                let terms: Vec<String> = interactions
                    .iter()
                    .map(|(p, a)| format!("{p}:{a}"))
                    .collect();
                writeln!(f, "interactions = {}", terms.join(", "))?;
            }
            ModelSpec::Hvn { m, seed } => {
                writeln!(f, "kind = hvn")?;
                writeln!(f, "m = {m}")?;
                writeln!(f, "model_seed = {seed}")?;
            }
        }
        writeln!(f, "\n[state]")?;
        match &self.state {
            StateSpec::Coherent(v) => {
                writeln!(f, "family = coherent")?;
                let parts: Vec<String> = v.iter().map(|&z| fmt_c64(z)).collect();
                writeln!(f, "vector = {}", parts.join(", "))?;
            }
            StateSpec::Hermite(v) => {
                writeln!(f, "family = hermite")?;
                let parts: Vec<String> = v.iter().map(|&z| fmt_c64(z)).collect();
                writeln!(f, "vector = {}", parts.join(", "))?;
            }
            StateSpec::Tensor(w) => {
                writeln!(f, "family = tensor")?;
                writeln!(f, "weights = {}", fmt_floats(w))?;
            }
            StateSpec::Gibbs(w) => {
                writeln!(f, "family = gibbs")?;
                writeln!(f, "weights = {}", fmt_floats(w))?;
            }
        }
        writeln!(f, "tail_budget = {}", self.tail_budget)?;
        writeln!(f, "\n[grid]")?;
        writeln!(f, "eps = {}", fmt_floats(&self.eps_schedule))?;
        writeln!(f, "times = {}", fmt_floats(&self.times))?;
        writeln!(f, "\n[observables]")?;
        let obs: Vec<String> = self
            .observables
            .iter()
            .map(|o| match o {
                ObsSpec::NormPower(k) => format!("norm_power:{k}"),
                ObsSpec::ModeNumber(j) => format!("mode_number:{j}"),
            })
            .collect();
        writeln!(f, "list = {}", obs.join(", "))?;
        writeln!(f, "\n[truncation]")?;
        match &self.policy {
            PolicySpec::Fixed(n) => {
                writeln!(f, "policy = fixed")?;
                writeln!(f, "n_max = {n}")?;
            }
            PolicySpec::Adaptive { budget, cap } => {
                writeln!(f, "policy = adaptive")?;
                writeln!(f, "budget = {budget}")?;
                writeln!(f, "cap = {cap}")?;
            }
        }
        writeln!(f, "\n[output]")?;
        writeln!(f, "path = {}", self.output)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "\n[bbgky]")?;
        let orders: Vec<String> = self.bbgky_orders.iter().map(|p| p.to_string()).collect();
        writeln!(f, "orders = {}", orders.join(", "))
    }
}

/// Raw `(section, key) -> (line, value)` table.
struct RawConfig {
    entries: Vec<(String, String, usize, String)>,
}

impl RawConfig {
    fn get(&self, section: &str, key: &str) -> Option<(usize, &str)> {
        self.entries
            .iter()
            .find(|(s, k, _, _)| s == section && k == key)
            .map(|(_, _, line, v)| (*line, v.as_str()))
    }

    fn require(&self, section: &str, key: &str) -> Result<(usize, &str)> {
        self.get(section, key).ok_or_else(|| {
            err(
                None,
                Some(&format!("{section}.{key}")),
                "missing required key",
            )
        })
    }
}

fn lex(text: &str) -> Result<RawConfig> {
    let mut section = String::new();
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(err(Some(line_no), None, "unterminated section header"));
            }
            section = line[1..line.len() - 1].trim().to_owned();
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(err(Some(line_no), None, "expected `key = value`"));
        };
        let key = line[..eq].trim();
        if key.is_empty() {
            return Err(err(Some(line_no), None, "empty key"));
        }
        if section.is_empty() {
            return Err(err(Some(line_no), Some(key), "key outside any section"));
        }
        entries.push((
            section.clone(),
            key.to_owned(),
            line_no,
            line[eq + 1..].trim().to_owned(),
        ));
    }
    Ok(RawConfig { entries })
}

fn parse_f64(line: usize, key: &str, s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| err(Some(line), Some(key), format!("`{s}` is not a real number")))
}

fn parse_usize(line: usize, key: &str, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| err(Some(line), Some(key), format!("`{s}` is not a non-negative integer")))
}

fn parse_u64(line: usize, key: &str, s: &str) -> Result<u64> {
    s.parse()
        .map_err(|_| err(Some(line), Some(key), format!("`{s}` is not a seed value")))
}

fn split_list(s: &str) -> Vec<&str> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .collect()
}

fn parse_float_list(line: usize, key: &str, s: &str) -> Result<Vec<f64>> {
    split_list(s)
        .into_iter()
        .map(|p| parse_f64(line, key, p))
        .collect()
}

/// Parse one complex entry `a+bi`, `a-bi`, `a` or `bi`.
fn parse_c64(line: usize, key: &str, s: &str) -> Result<C64> {
    let bad = || err(Some(line), Some(key), format!("`{s}` is not a complex number (use a+bi)"));
    let s = s.trim();
    if let Some(body) = s.strip_suffix('i') {
        // Find the sign separating the real and imaginary parts, skipping a
        // leading sign and any exponent signs (preceded by e or E).
        let bytes = body.as_bytes();
        let mut split = None;
        for pos in (1..body.len()).rev() {
            let c = bytes[pos];
            if (c == b'+' || c == b'-') && !matches!(bytes[pos - 1], b'e' | b'E') {
                split = Some(pos);
                break;
            }
        }
        match split {
            Some(pos) => {
                let re: f64 = body[..pos].parse().map_err(|_| bad())?;
                let im_str = &body[pos..];
                let im: f64 = if im_str == "+" || im_str == "-" {
                    if im_str == "+" { 1.0 } else { -1.0 }
                } else {
                    im_str.parse().map_err(|_| bad())?
                };
                Ok(C64::new(re, im))
            }
            None => {
                let im: f64 = body.parse().map_err(|_| bad())?;
                Ok(C64::new(0.0, im))
            }
        }
    } else {
        let re: f64 = s.parse().map_err(|_| bad())?;
        Ok(C64::new(re, 0.0))
    }
}

pub fn parse(text: &str) -> Result<ExperimentConfig> {
    let raw = lex(text)?;

    let (kline, kind) = raw.require("model", "kind")?;
    let model = match kind {
        "twobody" => {
            let (l, d) = raw.require("model", "d")?;
            let (ls, seed) = raw.require("model", "model_seed")?;
            ModelSpec::TwoBody {
                d: parse_usize(l, "model.d", d)?,
                seed: parse_u64(ls, "model.model_seed", seed)?,
            }
        }
        "lll" => {
            let (lh, h) = raw.require("model", "h")?;
            let (lm, modes) = raw.require("model", "modes")?;
            let (li, terms) = raw.require("model", "interactions")?;
            let mut interactions = Vec::new();
            for part in split_list(terms) {
                let Some((p, a)) = part.split_once(':') else {
                    return Err(err(
                        Some(li),
                        Some("model.interactions"),
                        format!("`{part}` is not of the form p:alpha"),
                    ));
                };
                interactions.push((
                    parse_usize(li, "model.interactions", p.trim())?,
                    parse_f64(li, "model.interactions", a.trim())?,
                ));
            }
            ModelSpec::Lll {
                h: parse_f64(lh, "model.h", h)?,
                modes: parse_usize(lm, "model.modes", modes)?,
                interactions,
            }
        }
        "hvn" => {
            let (l, m) = raw.require("model", "m")?;
            let (ls, seed) = raw.require("model", "model_seed")?;
            ModelSpec::Hvn {
                m: parse_usize(l, "model.m", m)?,
                seed: parse_u64(ls, "model.model_seed", seed)?,
            }
        }
        other => {
            return Err(err(
                Some(kline),
                Some("model.kind"),
                format!("unknown model kind `{other}` (expected twobody, lll or hvn)"),
            ))
        }
    };

    let (fline, family) = raw.require("state", "family")?;
    let state = match family {
        "coherent" | "hermite" => {
            let (l, v) = raw.require("state", "vector")?;
            let entries: Vec<C64> = split_list(v)
                .into_iter()
                .map(|p| parse_c64(l, "state.vector", p))
                .collect::<Result<_>>()?;
            if family == "coherent" {
                StateSpec::Coherent(entries)
            } else {
                StateSpec::Hermite(entries)
            }
        }
        "tensor" | "gibbs" => {
            let (l, w) = raw.require("state", "weights")?;
            let weights = parse_float_list(l, "state.weights", w)?;
            if family == "tensor" {
                StateSpec::Tensor(weights)
            } else {
                StateSpec::Gibbs(weights)
            }
        }
        other => {
            return Err(err(
                Some(fline),
                Some("state.family"),
                format!("unknown state family `{other}`"),
            ))
        }
    };
    let tail_budget = match raw.get("state", "tail_budget") {
        Some((l, v)) => parse_f64(l, "state.tail_budget", v)?,
        None => 1e-10,
    };

    let (le, eps) = raw.require("grid", "eps")?;
    let eps_schedule = parse_float_list(le, "grid.eps", eps)?;
    let times = match raw.get("grid", "times") {
        Some((l, v)) => parse_float_list(l, "grid.times", v)?,
        None => Vec::new(),
    };

    let mut observables = Vec::new();
    if let Some((l, list)) = raw.get("observables", "list") {
        for part in split_list(list) {
            let (name, arg) = part.split_once(':').unwrap_or((part, ""));
            let obs = match name.trim() {
                "norm_power" => ObsSpec::NormPower(parse_usize(l, "observables.list", arg.trim())?),
                "mode_number" => ObsSpec::ModeNumber(parse_usize(l, "observables.list", arg.trim())?),
                other => {
                    return Err(err(
                        Some(l),
                        Some("observables.list"),
                        format!("unknown observable `{other}`"),
                    ))
                }
            };
            observables.push(obs);
        }
    }

    let (pl, policy_kind) = raw.require("truncation", "policy")?;
    let policy = match policy_kind {
        "fixed" => {
            let (l, n) = raw.require("truncation", "n_max")?;
            PolicySpec::Fixed(parse_usize(l, "truncation.n_max", n)?)
        }
        "adaptive" => {
            let budget = match raw.get("truncation", "budget") {
                Some((l, v)) => parse_f64(l, "truncation.budget", v)?,
                None => 1e-10,
            };
            let (l, cap) = raw.require("truncation", "cap")?;
            PolicySpec::Adaptive {
                budget,
                cap: parse_usize(l, "truncation.cap", cap)?,
            }
        }
        other => {
            return Err(err(
                Some(pl),
                Some("truncation.policy"),
                format!("unknown policy `{other}` (expected fixed or adaptive)"),
            ))
        }
    };

    let output = match raw.get("output", "path") {
        Some((_, v)) => v.to_owned(),
        None => "out.csv".to_owned(),
    };
    let seed = match raw.get("output", "seed") {
        Some((l, v)) => parse_u64(l, "output.seed", v)?,
        None => 0,
    };
    let bbgky_orders = match raw.get("bbgky", "orders") {
        Some((l, v)) => split_list(v)
            .into_iter()
            .map(|p| parse_usize(l, "bbgky.orders", p))
            .collect::<Result<_>>()?,
        None => vec![1],
    };

    let config = ExperimentConfig {
        model,
        state,
        tail_budget,
        eps_schedule,
        times,
        observables,
        policy,
        output,
        seed,
        bbgky_orders,
    };
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentConfig {
        ExperimentConfig {
            model: ModelSpec::TwoBody { d: 2, seed: 7 },
            state: StateSpec::Coherent(vec![C64::new(0.3, 0.1), C64::new(-0.2, -0.4)]),
            tail_budget: 1e-10,
            eps_schedule: vec![0.25, 0.125, 0.0625],
            times: vec![0.0, 0.5],
            observables: vec![ObsSpec::NormPower(1), ObsSpec::ModeNumber(0)],
            policy: PolicySpec::Adaptive {
                budget: 1e-10,
                cap: 60,
            },
            output: "out.csv".to_owned(),
            seed: 42,
            bbgky_orders: vec![0, 1],
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let c = sample();
        let text = c.to_string();
        let back = parse(&text).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn round_trip_other_variants() {
        for (model, state) in [
            (
                ModelSpec::Lll {
                    h: 0.5,
                    modes: 2,
                    interactions: vec![(2, 1.0)],
                },
                StateSpec::Tensor(vec![0.75, 0.25]),
            ),
            (
                ModelSpec::TwoBody { d: 2, seed: 1 },
                StateSpec::Gibbs(vec![0.5, 0.25]),
            ),
            (
                ModelSpec::TwoBody { d: 1, seed: 3 },
                StateSpec::Hermite(vec![C64::new(0.0, -1.0)]),
            ),
        ] {
            let mut c = sample();
            c.model = model;
            c.state = state;
            c.policy = PolicySpec::Fixed(12);
            let back = parse(&c.to_string()).unwrap();
            assert_eq!(c, back);
        }
    }

    #[test]
    fn errors_carry_line_and_key() {
        let text = "[model]\nkind = twobody\nd = two\nmodel_seed = 1\n";
        let e = parse(text).unwrap_err();
        assert_eq!(e.line, Some(3));
        assert_eq!(e.key.as_deref(), Some("model.d"));
    }

    #[test]
    fn increasing_eps_is_rejected() {
        let mut c = sample();
        c.eps_schedule = vec![0.1, 0.2];
        let e = parse(&c.to_string()).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("grid.eps"));
    }

    #[test]
    fn complex_forms_parse() {
        assert_eq!(parse_c64(1, "k", "1.5").unwrap(), C64::new(1.5, 0.0));
        assert_eq!(parse_c64(1, "k", "-2i").unwrap(), C64::new(0.0, -2.0));
        assert_eq!(parse_c64(1, "k", "1e-2-3e-1i").unwrap(), C64::new(0.01, -0.3));
        assert!(parse_c64(1, "k", "oops").is_err());
    }
}
