//! Sweep configuration: JSON parsing, defaults and validation.
//!
//! Validation walks the whole document and reports every violation with its
//! field path instead of stopping at the first one.

use std::fmt;

use epsense_core::active::{lasing_threshold, ActiveSystem, GainModel, GainParams};
use epsense_core::model::{EpsilonConvention, PassiveParams};
use epsense_core::numerics::QuadratureSpec;
use epsense_core::scattering::InputField;
use epsense_core::sensing::{DEFAULT_MAX_DEPTH, DEFAULT_REL_TOL};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

/// Every problem found in a configuration document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub violations: Vec<Violation>,
}

impl ConfigError {
    pub fn single(path: &str, message: impl Into<String>) -> Self {
        Self { violations: vec![Violation { path: path.into(), message: message.into() }] }
    }

    pub fn mentions(&self, path: &str) -> bool {
        self.violations.iter().any(|v| v.path == path)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration ({} problem", self.violations.len())?;
        if self.violations.len() != 1 {
            write!(f, "s")?;
        }
        write!(f, ")")?;
        for v in &self.violations {
            write!(f, "\n  {}: {}", v.path, v.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Passive,
    Active,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    G,
    SZ,
    Epsilon,
    Nu,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            Self::G => "g",
            Self::SZ => "s_z",
            Self::Epsilon => "epsilon",
            Self::Nu => "nu",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "g" => Self::G,
            "s_z" => Self::SZ,
            "epsilon" => Self::Epsilon,
            "nu" => Self::Nu,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    FEps,
    FDelta,
    ChiSq,
    Overlap,
    Eigenvalues,
    SNu,
    Eta,
}

impl Output {
    pub const ALL: [Output; 7] =
        [Self::FEps, Self::FDelta, Self::ChiSq, Self::Overlap, Self::Eigenvalues, Self::SNu, Self::Eta];

    pub fn name(self) -> &'static str {
        match self {
            Self::FEps => "f_eps",
            Self::FDelta => "f_delta",
            Self::ChiSq => "chi_sq",
            Self::Overlap => "overlap",
            Self::Eigenvalues => "eigenvalues",
            Self::SNu => "s_nu",
            Self::Eta => "eta",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == s)
    }
}

/// Quadrature settings; `None` fields take per-point defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub half_width: Option<f64>,
    pub max_depth: u32,
}

impl QuadratureConfig {
    /// Window centered on `ν_b` with the configured or default half-width.
    pub fn spec(&self, p: &PassiveParams, input: &InputField) -> epsense_core::Result<QuadratureSpec> {
        let hw = self.half_width.unwrap_or_else(|| (10.0 * input.bandwidth).max(50.0 * p.gamma_b));
        QuadratureSpec::new(p.nu_b, hw, self.rel_tol, self.max_depth)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub var: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub n_points: usize,
    /// For `s_z`: sweep values are fractions of the lasing threshold.
    pub relative_to_threshold: bool,
}

impl SweepSpec {
    /// Evenly spaced sweep values, hitting both endpoints exactly.
    pub fn values(&self) -> Vec<f64> {
        let n = self.n_points;
        (0..n)
            .map(
                |i| {
                    if i + 1 == n {
                        self.stop
                    } else {
                        self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64
                    }
                },
            )
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub system: SystemKind,
    pub passive: PassiveParams,
    pub gain: Option<GainParams>,
    pub gain_model: GainModel,
    pub input: InputField,
    pub sweep: Option<SweepSpec>,
    pub outputs: Vec<Output>,
    pub quadrature: QuadratureConfig,
    pub eps_convention: EpsilonConvention,
    /// Frequency at which `s_nu` is reported when `nu` is not swept.
    pub nu: f64,
    /// Measurement repetitions per unit time for `eta`.
    pub reps_per_time: f64,
    pub jobs: Option<usize>,
}

impl SweepConfig {
    pub fn active_system(&self) -> Option<ActiveSystem> {
        self.gain.map(|gain| ActiveSystem { passive: self.passive, gain })
    }
}

struct Reader<'a> {
    errors: &'a mut Vec<Violation>,
}

impl Reader<'_> {
    fn push(&mut self, path: &str, message: impl Into<String>) {
        self.errors.push(Violation { path: path.into(), message: message.into() });
    }

    fn object<'v>(&mut self, root: &'v Map<String, Value>, key: &str) -> Option<&'v Map<String, Value>> {
        match root.get(key) {
            None | Some(Value::Null) => None,
            Some(Value::Object(m)) => Some(m),
            Some(_) => {
                self.push(key, "expected an object");
                None
            }
        }
    }

    fn unknown_keys(&mut self, prefix: &str, m: &Map<String, Value>, known: &[&str]) {
        for k in m.keys() {
            if !known.contains(&k.as_str()) {
                self.push(&join(prefix, k), "unknown field");
            }
        }
    }

    fn number(&mut self, prefix: &str, m: Option<&Map<String, Value>>, key: &str) -> Option<f64> {
        let path = join(prefix, key);
        match m.and_then(|m| m.get(key)) {
            None | Some(Value::Null) => None,
            Some(Value::Number(n)) => n.as_f64(),
            Some(Value::String(s)) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => Some(f64::INFINITY),
            Some(_) => {
                self.push(&path, "expected a number");
                None
            }
        }
    }

    fn required(&mut self, prefix: &str, m: Option<&Map<String, Value>>, key: &str) -> f64 {
        match self.number(prefix, m, key) {
            Some(v) => v,
            None => {
                if m.and_then(|m| m.get(key)).is_none_or(Value::is_null) {
                    self.push(&join(prefix, key), "missing required field");
                }
                f64::NAN
            }
        }
    }

    fn string<'v>(&mut self, prefix: &str, m: Option<&'v Map<String, Value>>, key: &str) -> Option<&'v str> {
        match m.and_then(|m| m.get(key)) {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s),
            Some(_) => {
                self.push(&join(prefix, key), "expected a string");
                None
            }
        }
    }

    fn boolean(&mut self, prefix: &str, m: Option<&Map<String, Value>>, key: &str) -> Option<bool> {
        match m.and_then(|m| m.get(key)) {
            None | Some(Value::Null) => None,
            Some(Value::Bool(b)) => Some(*b),
            Some(_) => {
                self.push(&join(prefix, key), "expected true or false");
                None
            }
        }
    }

    fn count(&mut self, prefix: &str, m: Option<&Map<String, Value>>, key: &str) -> Option<u64> {
        match m.and_then(|m| m.get(key)) {
            None | Some(Value::Null) => None,
            Some(Value::Number(n)) if n.as_u64().is_some() => n.as_u64(),
            Some(_) => {
                self.push(&join(prefix, key), "expected a non-negative integer");
                None
            }
        }
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

const TOP_KEYS: [&str; 9] = ["system", "passive", "gain", "input", "sweep", "quadrature", "outputs", "jobs", "nu"];

/// Parse and validate a JSON configuration, applying defaults.
pub fn validate_config(raw: &str) -> Result<SweepConfig, ConfigError> {
    let doc: Value = serde_json::from_str(raw).map_err(|e| ConfigError::single("", format!("malformed JSON: {e}")))?;
    let Value::Object(root) = doc else {
        return Err(ConfigError::single("", "top level must be a JSON object"));
    };
    let mut errors = Vec::new();
    let mut r = Reader { errors: &mut errors };
    r.unknown_keys("", &root, &TOP_KEYS);

    let system = match root.get("system") {
        None | Some(Value::Null) => SystemKind::Passive,
        Some(Value::String(s)) if s == "passive" => SystemKind::Passive,
        Some(Value::String(s)) if s == "active" => SystemKind::Active,
        Some(_) => {
            r.push("system", "expected \"passive\" or \"active\"");
            SystemKind::Passive
        }
    };

    // passive.*
    let pm = r.object(&root, "passive");
    if pm.is_none() {
        r.push("passive", "missing required section");
    }
    if let Some(m) = pm {
        r.unknown_keys("passive", m, &["nu_a", "nu_b", "gamma_a", "gamma_b", "gamma_ex", "g"]);
    }
    let passive = PassiveParams {
        nu_a: r.number("passive", pm, "nu_a").unwrap_or(0.0),
        nu_b: r.number("passive", pm, "nu_b").unwrap_or(0.0),
        gamma_a: r.required("passive", pm, "gamma_a"),
        gamma_b: r.required("passive", pm, "gamma_b"),
        gamma_ex: r.required("passive", pm, "gamma_ex"),
        g: r.required("passive", pm, "g"),
    };
    check_passive(&mut r, &passive);

    // gain.*
    let gm = r.object(&root, "gain");
    let mut gain_model = GainModel::Full3;
    let gain = match (system, gm) {
        (SystemKind::Passive, Some(_)) => {
            r.push("gain", "only allowed when system is \"active\"");
            None
        }
        (SystemKind::Passive, None) => None,
        (SystemKind::Active, m) => {
            if m.is_none() {
                r.push("gain", "missing required section for an active system");
            }
            if let Some(m) = m {
                r.unknown_keys("gain", m, &["n_total", "gamma_1", "g_gain", "kappa", "s_z", "model"]);
            }
            match r.string("gain", m, "model") {
                None | Some("full3") => {}
                Some("adiabatic") => gain_model = GainModel::Adiabatic,
                Some(_) => r.push("gain.model", "expected \"full3\" or \"adiabatic\""),
            }
            let g = GainParams {
                n_total: r.required("gain", m, "n_total"),
                gamma_1: r.number("gain", m, "gamma_1").unwrap_or(0.0),
                g_gain: r.required("gain", m, "g_gain"),
                kappa: r.required("gain", m, "kappa"),
                s_z: r.number("gain", m, "s_z").unwrap_or(0.0),
            };
            check_gain(&mut r, &g);
            Some(g)
        }
    };

    // input.*
    let im = r.object(&root, "input");
    if im.is_none() {
        r.push("input", "missing required section");
    }
    if let Some(m) = im {
        r.unknown_keys("input", m, &["alpha", "bandwidth", "center", "inv_temperature"]);
    }
    let input = InputField {
        alpha: r.required("input", im, "alpha"),
        bandwidth: r.required("input", im, "bandwidth"),
        center: r.number("input", im, "center").unwrap_or(passive.nu_b),
        inv_temperature: r.number("input", im, "inv_temperature").unwrap_or(f64::INFINITY),
    };
    if !(input.bandwidth > 0.0 && input.bandwidth.is_finite()) && !input.bandwidth.is_nan() {
        r.push("input.bandwidth", "must be positive and finite");
    }
    if !input.alpha.is_finite() && !input.alpha.is_nan() {
        r.push("input.alpha", "must be finite");
    }
    if !input.center.is_finite() {
        r.push("input.center", "must be finite");
    }
    if !(input.inv_temperature > 0.0) {
        r.push("input.inv_temperature", "must lie in (0, inf]");
    }

    // quadrature.*
    let qm = r.object(&root, "quadrature");
    if let Some(m) = qm {
        r.unknown_keys("quadrature", m, &["rel_tol", "half_width", "max_depth"]);
    }
    let quadrature = QuadratureConfig {
        rel_tol: r.number("quadrature", qm, "rel_tol").unwrap_or(DEFAULT_REL_TOL),
        half_width: r.number("quadrature", qm, "half_width"),
        max_depth: r
            .count("quadrature", qm, "max_depth")
            .map(|d| d.min(u32::MAX as u64) as u32)
            .unwrap_or(DEFAULT_MAX_DEPTH),
    };
    if !(quadrature.rel_tol > 0.0 && quadrature.rel_tol < 1.0) {
        r.push("quadrature.rel_tol", "must lie in (0, 1)");
    }
    if let Some(hw) = quadrature.half_width {
        if !(hw > 0.0 && hw.is_finite()) {
            r.push("quadrature.half_width", "must be positive and finite");
        }
    }
    if quadrature.max_depth < 4 {
        r.push("quadrature.max_depth", "must be at least 4");
    }

    // sweep.*
    let sm = r.object(&root, "sweep");
    let mut eps_convention = EpsilonConvention::Symmetric;
    let mut reps_per_time = 1.0;
    let sweep = sm.map(|m| {
        r.unknown_keys(
            "sweep",
            m,
            &["var", "start", "stop", "n_points", "relative_to_threshold", "eps_convention", "reps_per_time"],
        );
        let var = match r.string("sweep", Some(m), "var") {
            Some(s) => SweepVar::parse(s).unwrap_or_else(|| {
                r.push("sweep.var", "expected one of g, s_z, epsilon, nu");
                SweepVar::G
            }),
            None => {
                r.push("sweep.var", "missing required field");
                SweepVar::G
            }
        };
        match r.string("sweep", Some(m), "eps_convention") {
            None | Some("symmetric") => {}
            Some("cavity_a_only") => eps_convention = EpsilonConvention::CavityAOnly,
            Some(_) => r.push("sweep.eps_convention", "expected \"symmetric\" or \"cavity_a_only\""),
        }
        if let Some(rate) = r.number("sweep", Some(m), "reps_per_time") {
            if !(rate > 0.0 && rate.is_finite()) {
                r.push("sweep.reps_per_time", "must be positive and finite");
            }
            reps_per_time = rate;
        }
        let start = r.required("sweep", Some(m), "start");
        let stop = r.required("sweep", Some(m), "stop");
        let n_points = match r.count("sweep", Some(m), "n_points") {
            Some(n) if n >= 2 => n as usize,
            Some(_) => {
                r.push("sweep.n_points", "must be at least 2");
                2
            }
            None => {
                r.push("sweep.n_points", "missing required field");
                2
            }
        };
        if start.is_finite() && stop.is_finite() && start == stop {
            r.push("sweep.stop", "zero-width range (start == stop)");
        }
        for (key, v) in [("start", start), ("stop", stop)] {
            if v.is_infinite() {
                r.push(&join("sweep", key), "must be finite");
            }
        }
        let relative_to_threshold = r.boolean("sweep", Some(m), "relative_to_threshold").unwrap_or(false);
        if relative_to_threshold && var != SweepVar::SZ {
            r.push("sweep.relative_to_threshold", "only meaningful when sweeping s_z");
        }
        if var == SweepVar::SZ && system != SystemKind::Active {
            r.push("sweep.var", "s_z can only be swept for an active system");
        }
        if var == SweepVar::G {
            for (key, v) in [("start", start), ("stop", stop)] {
                if v < 0.0 {
                    r.push(&join("sweep", key), "coupling g must be >= 0");
                }
            }
        }
        if var == SweepVar::SZ {
            let scale = if relative_to_threshold { 1.0 } else { gain.map_or(f64::NAN, |g| g.n_total) };
            for (key, v) in [("start", start), ("stop", stop)] {
                if v < 0.0 || (!relative_to_threshold && v > scale) {
                    r.push(&join("sweep", key), "inversion must lie in [0, gain.n_total]");
                }
            }
        }
        SweepSpec { var, start, stop, n_points, relative_to_threshold }
    });

    // outputs
    let outputs = match root.get("outputs") {
        None | Some(Value::Null) => {
            r.push("outputs", "missing required list of outputs");
            Vec::new()
        }
        Some(Value::Array(items)) => {
            let mut out = Vec::new();
            for (i, item) in items.iter().enumerate() {
                match item.as_str().and_then(Output::parse) {
                    Some(o) if out.contains(&o) => r.push(&format!("outputs[{i}]"), "duplicate output"),
                    Some(o) => out.push(o),
                    None => r.push(
                        &format!("outputs[{i}]"),
                        "expected one of f_eps, f_delta, chi_sq, overlap, eigenvalues, s_nu, eta",
                    ),
                }
            }
            if items.is_empty() {
                r.push("outputs", "must not be empty");
            }
            out
        }
        Some(_) => {
            r.push("outputs", "expected a list of output names");
            Vec::new()
        }
    };
    if system == SystemKind::Active && outputs.contains(&Output::FDelta) {
        r.push("outputs", "f_delta is only defined for the passive system");
    }

    let nu = r.number("", Some(&root), "nu").unwrap_or(passive.nu_b);
    if !nu.is_finite() {
        r.push("nu", "must be finite");
    }
    let jobs = match r.count("", Some(&root), "jobs") {
        Some(0) => {
            r.push("jobs", "must be at least 1");
            None
        }
        other => other.map(|j| j as usize),
    };

    if errors.is_empty() {
        if let (Some(g), Some(s)) = (gain, &sweep) {
            if s.relative_to_threshold {
                let sc = lasing_threshold(&ActiveSystem { passive, gain: g });
                let top = s.start.max(s.stop) * sc;
                if top > g.n_total {
                    errors.push(Violation {
                        path: "sweep.stop".into(),
                        message: format!("{top:e} exceeds gain.n_total at the threshold S_c = {sc:e}"),
                    });
                }
            }
        }
    }
    if !errors.is_empty() {
        return Err(ConfigError { violations: errors });
    }
    Ok(SweepConfig {
        system,
        passive,
        gain,
        gain_model,
        input,
        sweep,
        outputs,
        quadrature,
        eps_convention,
        nu,
        reps_per_time,
        jobs,
    })
}

fn check_passive(r: &mut Reader<'_>, p: &PassiveParams) {
    let checks: [(&str, f64, bool, &str); 6] = [
        ("passive.nu_a", p.nu_a, p.nu_a.is_finite(), "must be finite"),
        ("passive.nu_b", p.nu_b, p.nu_b.is_finite(), "must be finite"),
        ("passive.gamma_a", p.gamma_a, p.gamma_a > 0.0 && p.gamma_a.is_finite(), "must be positive"),
        ("passive.gamma_b", p.gamma_b, p.gamma_b > 0.0 && p.gamma_b.is_finite(), "must be positive"),
        ("passive.gamma_ex", p.gamma_ex, p.gamma_ex >= 0.0 && p.gamma_ex.is_finite(), "must be >= 0"),
        ("passive.g", p.g, p.g >= 0.0 && p.g.is_finite(), "must be >= 0"),
    ];
    for (path, v, ok, msg) in checks {
        // NaN marks a field already reported as missing or mistyped.
        if !ok && !v.is_nan() {
            r.push(path, format!("{msg}, got {v}"));
        }
    }
}

fn check_gain(r: &mut Reader<'_>, g: &GainParams) {
    let checks: [(&str, f64, bool, &str); 5] = [
        ("gain.n_total", g.n_total, g.n_total > 0.0 && g.n_total.is_finite(), "must be positive"),
        ("gain.gamma_1", g.gamma_1, g.gamma_1 >= 0.0 && g.gamma_1.is_finite(), "must be >= 0"),
        ("gain.g_gain", g.g_gain, g.g_gain > 0.0 && g.g_gain.is_finite(), "must be positive"),
        ("gain.kappa", g.kappa, g.kappa > 0.0 && g.kappa.is_finite(), "must be positive"),
        ("gain.s_z", g.s_z, g.s_z >= 0.0 && g.s_z.is_finite(), "must be >= 0"),
    ];
    for (path, v, ok, msg) in checks {
        if !ok && !v.is_nan() {
            r.push(path, format!("{msg}, got {v}"));
        }
    }
    if g.s_z > g.n_total && !g.n_total.is_nan() {
        r.push("gain.s_z", format!("must not exceed gain.n_total = {}", g.n_total));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "passive": {"gamma_a": 5, "gamma_b": 1, "gamma_ex": 0.1, "g": 2.4},
        "input": {"alpha": 1000, "bandwidth": 200},
        "outputs": ["f_eps"]
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = validate_config(MINIMAL).unwrap();
        assert_eq!(c.system, SystemKind::Passive);
        assert_eq!(c.input.inv_temperature, f64::INFINITY);
        assert_eq!(c.input.center, 0.0);
        assert_eq!(c.eps_convention, EpsilonConvention::Symmetric);
        assert_eq!(c.quadrature.rel_tol, 1e-8);
        let spec = c.quadrature.spec(&c.passive, &c.input).unwrap();
        assert_eq!(spec.half_width, 2000.0);
        assert!(c.sweep.is_none());
    }

    #[test]
    fn negative_decay_rejected() {
        let raw = MINIMAL.replace("\"gamma_b\": 1", "\"gamma_b\": -1");
        let err = validate_config(&raw).unwrap_err();
        assert!(err.mentions("passive.gamma_b"), "{err}");
    }

    #[test]
    fn missing_kappa_named() {
        let raw = r#"{
            "system": "active",
            "passive": {"gamma_a": 5, "gamma_b": 1, "gamma_ex": 0.1, "g": 2.4},
            "gain": {"n_total": 2e12, "g_gain": 1e-5},
            "input": {"alpha": 1000, "bandwidth": 200},
            "outputs": ["f_eps"]
        }"#;
        let err = validate_config(raw).unwrap_err();
        assert!(err.mentions("gain.kappa"), "{err}");
        assert!(err.to_string().contains("gain.kappa"));
    }

    #[test]
    fn all_violations_reported() {
        let raw = r#"{
            "passive": {"gamma_a": -5, "gamma_b": 0, "gamma_ex": 0.1},
            "input": {"alpha": 1000, "bandwidth": -1},
            "sweep": {"var": "g", "start": 1, "stop": 1, "n_points": 1},
            "outputs": ["f_eps", "bogus"],
            "typo": 3
        }"#;
        let err = validate_config(raw).unwrap_err();
        for path in [
            "passive.gamma_a",
            "passive.gamma_b",
            "passive.g",
            "input.bandwidth",
            "sweep.stop",
            "sweep.n_points",
            "outputs[1]",
            "typo",
        ] {
            assert!(err.mentions(path), "missing {path} in {err}");
        }
    }

    #[test]
    fn empty_outputs_rejected() {
        let raw = MINIMAL.replace("[\"f_eps\"]", "[]");
        assert!(validate_config(&raw).unwrap_err().mentions("outputs"));
    }

    #[test]
    fn sweep_values_hit_endpoints() {
        let s = SweepSpec { var: SweepVar::G, start: 0.5, stop: 2.5, n_points: 201, relative_to_threshold: false };
        let v = s.values();
        assert_eq!(v.len(), 201);
        assert_eq!(v[0], 0.5);
        assert_eq!(v[200], 2.5);
        assert!((v[100] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn inverse_temperature_accepts_inf_string() {
        let raw = MINIMAL.replace("\"bandwidth\": 200", "\"bandwidth\": 200, \"inv_temperature\": \"inf\"");
        assert_eq!(validate_config(&raw).unwrap().input.inv_temperature, f64::INFINITY);
    }
}
