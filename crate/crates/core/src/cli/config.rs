//! Run configuration: JSON in, fully validated [`RunConfig`] out.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::critical::default_sobolev_grid;
use crate::error::{Error, Result};
use crate::problem::{Family, Potential, ProblemSpec};
use crate::radial::{RadialField, RadialGrid, MIN_INTERVALS};
use crate::solver::SolveOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Solve,
    CertifyCritical,
    Nonexistence,
    Bubbles,
    Continuation,
    Check,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Solve => "solve",
            Experiment::CertifyCritical => "certify-critical",
            Experiment::Nonexistence => "nonexistence",
            Experiment::Bubbles => "bubbles",
            Experiment::Continuation => "continuation",
            Experiment::Check => "check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "N")]
    pub intervals: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.radius, self.intervals)
    }
}

/// Potential description, sampled on whatever grid an experiment needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialConfig {
    Constant { value: f64 },
    /// `v_infinity - depth * exp(-(r/width)^2)`
    GaussianWell { v_infinity: f64, depth: f64, width: f64 },
    /// Node values on the problem grid.
    Table { values: Vec<f64>, v_infinity: f64 },
}

impl PotentialConfig {
    pub fn sample(&self, grid: RadialGrid) -> Result<Potential> {
        Ok(match self {
            PotentialConfig::Constant { value } => Potential::Constant(*value),
            PotentialConfig::GaussianWell { v_infinity, depth, width } => {
                Potential::gaussian_well(grid, *v_infinity, *depth, *width)
            }
            PotentialConfig::Table { values, v_infinity } => {
                if values.len() != grid.len() {
                    return Err(Error::Config(format!(
                        "potential table has {} values, grid has {} nodes",
                        values.len(),
                        grid.len()
                    )));
                }
                Potential::Radial { values: RadialField::new(grid, values.clone())?, v_infinity: *v_infinity }
            }
        })
    }

    /// Only analytic potentials can be evaluated on grids other than the
    /// problem grid.
    pub fn is_analytic(&self) -> bool {
        !matches!(self, PotentialConfig::Table { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProblemConfig {
    Subcritical { p: f64, potential: PotentialConfig },
    CriticalPerturbed { q: f64, potential: PotentialConfig },
    CriticalPure { potential: PotentialConfig },
}

impl ProblemConfig {
    pub fn family(&self) -> Family {
        match self {
            ProblemConfig::Subcritical { p, .. } => Family::Subcritical { p: *p },
            ProblemConfig::CriticalPerturbed { q, .. } => Family::CriticalPerturbed { q: *q },
            ProblemConfig::CriticalPure { .. } => Family::CriticalPure,
        }
    }

    pub fn potential(&self) -> &PotentialConfig {
        match self {
            ProblemConfig::Subcritical { potential, .. }
            | ProblemConfig::CriticalPerturbed { potential, .. }
            | ProblemConfig::CriticalPure { potential } => potential,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeConfig {
    pub count: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { count: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContinuationConfig {
    pub deltas: Vec<f64>,
    /// Also solve with the constant potential `v_infinity` and report the gap.
    pub compare_infinity: bool,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self { deltas: vec![0.1, 0.01], compare_infinity: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BubbleConfig {
    /// Concentration scales for the `L^s` laws.
    pub epsilons: Vec<f64>,
    /// Concentration scales for the gradient law.
    pub gradient_epsilons: Vec<f64>,
    pub s: Vec<f64>,
    pub r_cut: f64,
    /// Points per `sqrt(eps)` at the smallest `eps`.
    pub resolution: f64,
}

impl Default for BubbleConfig {
    fn default() -> Self {
        Self {
            epsilons: log_range(1e-6, 1e-4, 9),
            gradient_epsilons: log_range(1e-3, 1e-1, 9),
            s: vec![2.0, 3.0, 4.0],
            r_cut: 1.0,
            resolution: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertificateConfig {
    pub epsilons: Vec<f64>,
    pub r_cut: f64,
    pub resolution: f64,
    pub margin: f64,
    pub sobolev_grid: GridConfig,
    /// Also solve the perturbed critical problem on the main grid.
    pub solve: bool,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        let g = default_sobolev_grid();
        Self {
            epsilons: log_range(1e-6, 1e-2, 13),
            r_cut: 1.0,
            resolution: 10.0,
            margin: 1e-3,
            sobolev_grid: GridConfig { radius: g.radius(), intervals: g.intervals() },
            solve: true,
        }
    }
}

/// `n` log-spaced values from `lo` to `hi`.
pub fn log_range(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

/// Grid on `[0, 2 r_cut]` resolving `sqrt(min eps)` with `resolution` nodes.
pub fn bubble_grid(eps: &[f64], r_cut: f64, resolution: f64) -> Result<RadialGrid> {
    let lo = eps.iter().copied().fold(f64::INFINITY, f64::min);
    let h = (lo.sqrt() / resolution).min(r_cut / 100.0);
    let radius = 2.0 * r_cut;
    RadialGrid::new(radius, ((radius / h).ceil() as usize).max(MIN_INTERVALS))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub grid: GridConfig,
    pub problem: ProblemConfig,
    pub solver: SolveOptions,
    pub seed: u64,
    pub probes: ProbeConfig,
    pub continuation: ContinuationConfig,
    pub bubbles: BubbleConfig,
    pub certificate: CertificateConfig,
}

impl RunConfig {
    pub fn spec(&self) -> Result<ProblemSpec> {
        let grid = self.grid.build()?;
        ProblemSpec::new(self.problem.family(), self.problem.potential().sample(grid)?, grid)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("serializable")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Every violated invariant, phrased with the field and hypothesis.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let grid = match self.grid.build() {
            Ok(g) => Some(g),
            Err(e) => {
                out.push(format!("grid: {e} (need R > 0 and N >= {MIN_INTERVALS})"));
                None
            }
        };
        if let Err(e) = self.problem.family().validate() {
            out.push(format!("problem: {e}"));
        }
        if let Some(grid) = grid {
            match self.problem.potential().sample(grid) {
                Ok(pot) => out.extend(pot.violations(&grid).into_iter().map(|m| format!("problem.potential: {m}"))),
                Err(e) => out.push(format!("problem.potential: {e}")),
            }
        }
        out.extend(self.solver.violations());
        let family = self.problem.family();
        match self.experiment {
            Experiment::Continuation => {
                let base = self.problem.potential();
                if self.continuation.deltas.is_empty() {
                    out.push("continuation.deltas must not be empty".into());
                }
                if let Some(grid) = grid {
                    for d in &self.continuation.deltas {
                        if let Ok(pot) = base.sample(grid) {
                            for m in pot.shifted(*d).violations(&grid) {
                                out.push(format!("continuation.deltas: delta = {d} breaks {m}"));
                            }
                        }
                    }
                }
                if family == Family::CriticalPure {
                    out.push("continuation needs a family with ground states".into());
                }
            }
            Experiment::CertifyCritical => {
                if !matches!(family, Family::CriticalPerturbed { .. }) {
                    out.push("certify-critical needs problem.family = critical_perturbed".into());
                }
                if !self.problem.potential().is_analytic() {
                    out.push("certify-critical needs an analytic potential (constant or gaussian_well)".into());
                }
                let c = &self.certificate;
                if c.epsilons.is_empty() || c.epsilons.iter().any(|e| !(*e > 0.0)) {
                    out.push("certificate.epsilons must be nonempty and positive".into());
                }
                if !(c.r_cut > 0.0) || !(c.resolution >= 1.0) {
                    out.push("certificate.r_cut must be positive and certificate.resolution >= 1".into());
                }
                if let Err(e) = c.sobolev_grid.build() {
                    out.push(format!("certificate.sobolev_grid: {e}"));
                }
            }
            Experiment::Nonexistence => {
                if family != Family::CriticalPure {
                    out.push("nonexistence needs problem.family = critical_pure".into());
                }
            }
            Experiment::Bubbles => {
                let b = &self.bubbles;
                if let Some(s) = b.s.iter().find(|s| !(**s >= 2.0 && **s < 6.0)) {
                    out.push(format!("bubbles.s: exponent {s} outside [2, 6)"));
                }
                for (name, list) in [("epsilons", &b.epsilons), ("gradient_epsilons", &b.gradient_epsilons)] {
                    let lo = list.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = list.iter().copied().fold(0.0, f64::max);
                    if list.len() < 3 || !(lo > 0.0) || hi / lo < 100.0 - 1e-9 {
                        out.push(format!("bubbles.{name}: need at least 3 positive values spanning two decades"));
                    }
                }
                if !(b.r_cut > 0.0) || !(b.resolution >= 1.0) {
                    out.push("bubbles.r_cut must be positive and bubbles.resolution >= 1".into());
                }
            }
            Experiment::Solve | Experiment::Check => {}
        }
        out
    }
}

/// Allowed keys per object path; `None` marks a free-form value.
fn allowed_keys(path: &str, obj: &Map<String, Value>) -> Option<&'static [&'static str]> {
    match path {
        "" => Some(&[
            "experiment", "grid", "problem", "solver", "seed", "probes", "continuation", "bubbles", "certificate",
        ]),
        "grid" | "certificate.sobolev_grid" => Some(&["R", "N"]),
        "problem" => match obj.get("family").and_then(Value::as_str) {
            Some("subcritical") => Some(&["family", "p", "potential"]),
            Some("critical_perturbed") => Some(&["family", "q", "potential"]),
            _ => Some(&["family", "potential"]),
        },
        "problem.potential" => match obj.get("kind").and_then(Value::as_str) {
            Some("constant") => Some(&["kind", "value"]),
            Some("gaussian_well") => Some(&["kind", "v_infinity", "depth", "width"]),
            Some("table") => Some(&["kind", "values", "v_infinity"]),
            _ => Some(&["kind"]),
        },
        "solver" => Some(&[
            "max_iterations", "tol_gradient", "tol_manifold", "initial_step", "max_step", "backtrack_factor",
            "armijo", "seed", "manifold", "allow_critical_pure",
        ]),
        "probes" => Some(&["count"]),
        "continuation" => Some(&["deltas", "compare_infinity"]),
        "bubbles" => Some(&["epsilons", "gradient_epsilons", "s", "r_cut", "resolution"]),
        "certificate" => Some(&["epsilons", "r_cut", "resolution", "margin", "sobolev_grid", "solve"]),
        _ => None,
    }
}

fn unknown_keys(path: &str, value: &Value, out: &mut Vec<String>) {
    let Value::Object(obj) = value else { return };
    let Some(allowed) = allowed_keys(path, obj) else { return };
    for (k, v) in obj {
        let child = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
        if allowed.contains(&k.as_str()) {
            unknown_keys(&child, v, out);
        } else {
            out.push(format!("unknown key \"{child}\""));
        }
    }
}

/// Parses and validates a JSON configuration. `experiment` overrides the
/// document's selector.
pub fn parse_config_for(text: &str, experiment: Option<Experiment>) -> Result<RunConfig> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut violations = Vec::new();
    if !value.is_object() {
        return Err(Error::Validation(vec!["configuration must be a JSON object".into()]));
    }
    unknown_keys("", &value, &mut violations);
    let obj = value.as_object_mut().expect("object");
    if let Some(e) = experiment {
        obj.insert("experiment".into(), Value::String(e.name().into()));
    }
    for key in ["experiment", "grid", "problem"] {
        if !obj.contains_key(key) {
            violations.push(format!("missing key \"{key}\""));
        }
    }
    // Sections with defaults.
    let solver = if obj.get("experiment").and_then(Value::as_str) == Some("nonexistence") {
        SolveOptions::critical_pure_diagnostic()
    } else {
        SolveOptions::default()
    };
    let defaults = [
        ("solver", serde_json::to_value(solver)?),
        ("seed", Value::from(0u64)),
        ("probes", serde_json::to_value(ProbeConfig::default())?),
        ("continuation", serde_json::to_value(ContinuationConfig::default())?),
        ("bubbles", serde_json::to_value(BubbleConfig::default())?),
        ("certificate", serde_json::to_value(CertificateConfig::default())?),
    ];
    for (key, default) in defaults {
        obj.entry(key).or_insert(default);
    }
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    let config: RunConfig = match serde_json::from_value(value) {
        Ok(c) => c,
        Err(e) => return Err(Error::Validation(vec![format!("type error: {e}")])),
    };
    let v = config.violations();
    if v.is_empty() {
        Ok(config)
    } else {
        Err(Error::Validation(v))
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_for(text, None)
}
