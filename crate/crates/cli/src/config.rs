//! TOML run configuration and its validation.
//!
//! All physical quantities are in units of the qubit splitting `ω0`.

use std::path::Path;

use num_complex::Complex64;
use qthermo::control::{AlphaSchedule, Algorithm, Bounds, FitnessSpec, PsoParams};
use qthermo::heom::{build_single_qubit, build_two_qubit, SteadyStateOptions};
use qthermo::HeomParams;
use qthermo::linalg::{identity, kron, projector, validate_density};
use qthermo::metrology::{DerivativeOptions, DerivativeScheme};
use qthermo::ode::Integrator;
use qthermo::redfield::RedfieldOptions;
use qthermo::scenario::InitialPreset;
use qthermo::{Op, Scenario, SpectralDensity, SystemModel};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

/// One value, an explicit list, or `count` evenly spaced values.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Value(f64),
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::Value(v) => vec![*v],
            Axis::List(v) => v.clone(),
            Axis::Range { start, stop, count } => match count {
                0 => vec![],
                1 => vec![*start],
                n => (0..*n)
                    .map(|i| start + (stop - start) * i as f64 / (*n - 1) as f64)
                    .collect(),
            },
        }
    }

    fn check(&self, path: &str, ok: impl Fn(f64) -> bool, requirement: &str) -> Result<Vec<f64>> {
        let v = self.values();
        if v.is_empty() {
            return Err(ConfigError::new(path, "axis is empty"));
        }
        for (i, x) in v.iter().enumerate() {
            if !x.is_finite() || !ok(*x) {
                return Err(ConfigError::new(format!("{path}[{i}]"), format!("{requirement}, got {x}")));
            }
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    SingleQubit {
        #[serde(default = "one")]
        omega0: f64,
    },
    TwoQubit {
        #[serde(default = "one")]
        omega0: f64,
        g: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixConfig {
    pub re: Vec<Vec<f64>>,
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum InitialConfig {
    Preset(String),
    Matrix(MatrixConfig),
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig::Preset("plus".into())
    }
}

pub const PRESETS: [&str; 8] = ["plus", "minus", "plus_y", "minus_y", "excited", "ground", "mixed", "gibbs"];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    pub lambda: Axis,
    pub omega_c: Axis,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolverConfig {
    Heom {
        #[serde(default = "default_depth")]
        depth: usize,
        n_matsubara: Option<usize>,
        #[serde(default = "yes")]
        terminator: bool,
        #[serde(default = "yes")]
        scaling: bool,
        #[serde(default)]
        integrator: Integrator<f64>,
    },
    Brme {
        #[serde(default)]
        lamb_shift: bool,
        #[serde(default)]
        integrator: Integrator<f64>,
    },
}

fn default_depth() -> usize {
    HeomParams::default().depth
}

fn yes() -> bool {
    true
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::Heom {
            depth: default_depth(),
            n_matsubara: None,
            terminator: true,
            scaling: true,
            integrator: Integrator::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_max: f64,
    pub n_samples: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            t_max: 100.0,
            n_samples: 201,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DerivativeConfig {
    pub relative_step: f64,
    pub scheme: DerivativeScheme,
}

impl Default for DerivativeConfig {
    fn default() -> Self {
        let d = DerivativeOptions::default();
        Self {
            relative_step: d.relative_step,
            scheme: d.scheme,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SteadyConfig {
    pub probe_window: f64,
    pub tolerance: f64,
    pub t_max: f64,
}

impl Default for SteadyConfig {
    fn default() -> Self {
        let d = SteadyStateOptions::<f64>::default();
        Self {
            probe_window: d.probe_window,
            tolerance: d.tolerance,
            t_max: d.t_max,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlpConfig {
    /// 1-based indices into the built-in pair library; all pairs when absent.
    pub pairs: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmName {
    Qpso,
    Pso,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    pub algorithm: AlgorithmName,
    pub n_particles: usize,
    pub iterations: usize,
    pub n_segments: usize,
    pub t_max: f64,
    pub bound: f64,
    pub n_time_samples: usize,
    pub alpha_start: f64,
    pub alpha_end: f64,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        let (a, p) = (AlphaSchedule::default(), PsoParams::default());
        Self {
            algorithm: AlgorithmName::Qpso,
            n_particles: 10,
            iterations: 30,
            n_segments: 4,
            t_max: 80.0,
            bound: 1.0,
            n_time_samples: qthermo::control::DEFAULT_TIME_SAMPLES,
            alpha_start: a.start,
            alpha_end: a.end,
            inertia: p.inertia,
            cognitive: p.cognitive,
            social: p.social,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Also evaluate the library-maximum BLP measure for every row.
    pub blp: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub lamb_shift: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub system: SystemConfig,
    #[serde(default)]
    pub initial_state: InitialConfig,
    pub bath: BathConfig,
    pub temperature: Axis,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub derivative: DerivativeConfig,
    #[serde(default)]
    pub steady: SteadyConfig,
    #[serde(default)]
    pub blp: BlpConfig,
    #[serde(default)]
    pub optimize: OptimizeConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub compare: CompareConfig,
}

/// A parsed config together with the document it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub snapshot: serde_json::Value,
}

pub fn load(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(path.display().to_string(), format!("cannot read config: {e}")))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<LoadedConfig> {
    let value: toml::Value = toml::from_str(text).map_err(|e| ConfigError::new("<document>", e.message()))?;
    let config: RunConfig = serde_path_to_error::deserialize(value.clone()).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::new(if path == "." { "<root>".into() } else { path }, e.into_inner().to_string())
    })?;
    config.validate()?;
    let snapshot = serde_json::to_value(&value).map_err(|e| ConfigError::new("<document>", e.to_string()))?;
    Ok(LoadedConfig { config, snapshot })
}

fn positive(path: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("must be > 0, got {x}")))
    }
}

fn at_least_one(path: &str, n: usize) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(ConfigError::new(path, "must be ≥ 1"))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        match self.system {
            SystemConfig::SingleQubit { omega0 } => positive("system.omega0", omega0)?,
            SystemConfig::TwoQubit { omega0, g } => {
                positive("system.omega0", omega0)?;
                if !g.is_finite() {
                    return Err(ConfigError::new("system.g", "must be finite"));
                }
            }
        }
        self.lambdas()?;
        self.cutoffs()?;
        self.temperatures()?;
        self.initial_state()?;
        match &self.solver {
            SolverConfig::Heom { depth, integrator, .. } => {
                check_integrator("solver.integrator", integrator)?;
                if *depth == 0 {
                    return Err(ConfigError::new("solver.depth", "must be ≥ 1"));
                }
            }
            SolverConfig::Brme { integrator, .. } => check_integrator("solver.integrator", integrator)?,
        }
        positive("grid.t_max", self.grid.t_max)?;
        if self.grid.n_samples < 2 {
            return Err(ConfigError::new("grid.n_samples", "must be ≥ 2"));
        }
        let rs = self.derivative.relative_step;
        if !(rs > 0.0 && rs < 0.5) {
            return Err(ConfigError::new("derivative.relative_step", format!("must lie in (0, 0.5), got {rs}")));
        }
        positive("steady.probe_window", self.steady.probe_window)?;
        positive("steady.tolerance", self.steady.tolerance)?;
        positive("steady.t_max", self.steady.t_max)?;
        if let Some(pairs) = &self.blp.pairs {
            if pairs.is_empty() {
                return Err(ConfigError::new("blp.pairs", "list is empty"));
            }
            let n = qthermo::nonmarkov::builtin_pairs::<f64>().len();
            for (i, &p) in pairs.iter().enumerate() {
                if p == 0 || p > n {
                    return Err(ConfigError::new(format!("blp.pairs[{i}]"), format!("must lie in 1..={n}, got {p}")));
                }
            }
        }
        let o = &self.optimize;
        at_least_one("optimize.n_particles", o.n_particles)?;
        at_least_one("optimize.iterations", o.iterations)?;
        at_least_one("optimize.n_segments", o.n_segments)?;
        positive("optimize.t_max", o.t_max)?;
        positive("optimize.bound", o.bound)?;
        if o.n_time_samples < 2 {
            return Err(ConfigError::new("optimize.n_time_samples", "must be ≥ 2"));
        }
        Ok(())
    }

    pub fn lambdas(&self) -> Result<Vec<f64>> {
        self.bath.lambda.check("bath.lambda", |x| x >= 0.0, "must be ≥ 0")
    }

    pub fn cutoffs(&self) -> Result<Vec<f64>> {
        self.bath.omega_c.check("bath.omega_c", |x| x > 0.0, "must be > 0")
    }

    pub fn temperatures(&self) -> Result<Vec<f64>> {
        self.temperature.check("temperature", |x| x > 0.0, "must be > 0")
    }

    pub fn omega0(&self) -> f64 {
        match self.system {
            SystemConfig::SingleQubit { omega0 } | SystemConfig::TwoQubit { omega0, .. } => omega0,
        }
    }

    pub fn is_single_qubit(&self) -> bool {
        matches!(self.system, SystemConfig::SingleQubit { .. })
    }

    pub fn dim(&self) -> usize {
        if self.is_single_qubit() {
            2
        } else {
            4
        }
    }

    /// Initial density matrix (ignored when the preset is `gibbs`).
    fn initial_state(&self) -> Result<(Op, InitialPreset)> {
        let dim = self.dim();
        match &self.initial_state {
            InitialConfig::Preset(name) => {
                let c = |re: f64, im: f64| Complex64::new(re, im);
                let r = std::f64::consts::FRAC_1_SQRT_2;
                let qubit = match name.as_str() {
                    "plus" => projector(&[c(r, 0.0), c(r, 0.0)]),
                    "minus" => projector(&[c(r, 0.0), c(-r, 0.0)]),
                    "plus_y" => projector(&[c(r, 0.0), c(0.0, r)]),
                    "minus_y" => projector(&[c(r, 0.0), c(0.0, -r)]),
                    "excited" => projector(&[c(1.0, 0.0), c(0.0, 0.0)]),
                    "ground" => projector(&[c(0.0, 0.0), c(1.0, 0.0)]),
                    "mixed" | "gibbs" => identity(2) * c(0.5, 0.0),
                    other => {
                        return Err(ConfigError::new(
                            "initial_state",
                            format!("unknown preset `{other}` (expected one of {})", PRESETS.join(", ")),
                        ))
                    }
                };
                let rho = if dim == 2 { qubit.clone() } else { kron(&qubit, &qubit) };
                let preset = if name == "gibbs" { InitialPreset::Gibbs } else { InitialPreset::Model };
                Ok((rho, preset))
            }
            InitialConfig::Matrix(m) => {
                let rows = m.re.len();
                let bad_shape = |part: &str| {
                    ConfigError::new(format!("initial_state.{part}"), format!("must be a {dim}x{dim} matrix"))
                };
                if rows != dim || m.re.iter().any(|r| r.len() != dim) {
                    return Err(bad_shape("re"));
                }
                if let Some(im) = &m.im {
                    if im.len() != dim || im.iter().any(|r| r.len() != dim) {
                        return Err(bad_shape("im"));
                    }
                }
                let rho = Op::from_fn(dim, dim, |i, j| {
                    Complex64::new(m.re[i][j], m.im.as_ref().map_or(0.0, |im| im[i][j]))
                });
                validate_density(&rho, 1e-8).map_err(|e| ConfigError::new("initial_state", e.to_string()))?;
                Ok((rho, InitialPreset::Model))
            }
        }
    }

    pub fn model(&self) -> Result<(SystemModel, InitialPreset)> {
        let (rho, preset) = self.initial_state()?;
        let model = match self.system {
            SystemConfig::SingleQubit { omega0 } => build_single_qubit(omega0, rho),
            SystemConfig::TwoQubit { omega0, g } => build_two_qubit(omega0, g, rho),
        }
        .map_err(|e| ConfigError::new("system", e.to_string()))?;
        Ok((model, preset))
    }

    pub fn heom_params(&self) -> Option<(HeomParams, Option<usize>)> {
        match &self.solver {
            SolverConfig::Heom {
                depth,
                n_matsubara,
                terminator,
                scaling,
                integrator,
            } => {
                let mut p = HeomParams::default().with_depth(*depth).with_integrator(*integrator);
                p.use_terminator = *terminator;
                p.scaling = *scaling;
                Some((p, *n_matsubara))
            }
            SolverConfig::Brme { .. } => None,
        }
    }

    pub fn solver_name(&self) -> &'static str {
        match self.solver {
            SolverConfig::Heom { .. } => "heom",
            SolverConfig::Brme { .. } => "brme",
        }
    }

    /// Scenario for one `(λ, ω_c)` point using the configured solver.
    pub fn scenario(&self, lambda: f64, omega_c: f64) -> Result<Scenario> {
        let (model, preset) = self.model()?;
        let sd = SpectralDensity::new(lambda, omega_c).map_err(|e| ConfigError::new("bath", e.to_string()))?;
        let sc = match &self.solver {
            SolverConfig::Heom { .. } => {
                let (params, nk) = self.heom_params().expect("heom solver");
                let sc = Scenario::heom(model, sd, params);
                match nk {
                    Some(n) => sc.with_n_matsubara(n),
                    None => sc,
                }
            }
            SolverConfig::Brme { lamb_shift, integrator } => Scenario::brme(
                model,
                sd,
                RedfieldOptions {
                    include_lamb_shift: *lamb_shift,
                    integrator: *integrator,
                },
            ),
        };
        Ok(sc.with_initial(preset))
    }

    pub fn derivative_options(&self) -> DerivativeOptions {
        DerivativeOptions {
            relative_step: self.derivative.relative_step,
            scheme: self.derivative.scheme,
        }
    }

    pub fn steady_options(&self) -> SteadyStateOptions<f64> {
        SteadyStateOptions {
            probe_window: self.steady.probe_window,
            tolerance: self.steady.tolerance,
            t_max: self.steady.t_max,
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        let o = &self.optimize;
        match o.algorithm {
            AlgorithmName::Qpso => Algorithm::Qpso(AlphaSchedule {
                start: o.alpha_start,
                end: o.alpha_end,
            }),
            AlgorithmName::Pso => Algorithm::Pso(PsoParams {
                inertia: o.inertia,
                cognitive: o.cognitive,
                social: o.social,
            }),
        }
    }

    pub fn bounds(&self) -> Bounds {
        Bounds(self.optimize.bound)
    }

    pub fn fitness_spec(&self) -> Result<FitnessSpec> {
        FitnessSpec::new(self.optimize.n_time_samples)
            .map_err(|e| ConfigError::new("optimize.n_time_samples", e.to_string()))
    }

    /// The single value of an axis, for commands that do not sweep.
    pub fn scalar(&self, path: &str) -> Result<f64> {
        let v = match path {
            "bath.lambda" => self.lambdas()?,
            "bath.omega_c" => self.cutoffs()?,
            "temperature" => self.temperatures()?,
            _ => unreachable!("unknown axis {path}"),
        };
        if v.len() != 1 {
            return Err(ConfigError::new(path, format!("this command takes a single value, got {}", v.len())));
        }
        Ok(v[0])
    }
}

fn check_integrator(path: &str, integrator: &Integrator<f64>) -> Result<()> {
    integrator.validate().map_err(|e| ConfigError::new(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        system = { kind = "single_qubit" }
        bath = { lambda = [0.01, 0.1], omega_c = 0.05 }
        temperature = 0.2
    "#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse(MINIMAL).unwrap().config;
        assert_eq!(cfg.lambdas().unwrap(), vec![0.01, 0.1]);
        assert_eq!(cfg.grid.n_samples, 201);
        assert!(matches!(cfg.solver, SolverConfig::Heom { depth: 6, .. }));
        assert_eq!(cfg.optimize.n_particles, 10);
    }

    #[test]
    fn ranges_expand() {
        let a = Axis::Range {
            start: 0.1,
            stop: 0.5,
            count: 5,
        };
        let v = a.values();
        assert_eq!(v.len(), 5);
        assert!((v[4] - 0.5).abs() < 1e-15 && (v[1] - 0.2).abs() < 1e-15);
    }

    fn err(text: &str) -> ConfigError {
        parse(text).unwrap_err()
    }

    #[test]
    fn errors_carry_field_paths() {
        let e = err(&MINIMAL.replace("temperature = 0.2", "temperature = 0.0"));
        assert_eq!(e.path, "temperature[0]");
        let e = err(&MINIMAL.replace("[0.01, 0.1]", "[]"));
        assert_eq!(e.path, "bath.lambda");
        let e = err(&MINIMAL.replace("[0.01, 0.1]", "[0.01, -0.1]"));
        assert_eq!(e.path, "bath.lambda[1]");
        let e = err(&format!("{MINIMAL}\n[grid]\nt_max = 10.0\nn_samples = 1\n"));
        assert_eq!(e.path, "grid.n_samples");
        let e = err(&format!("{MINIMAL}\n[solver]\nkind = \"heom\"\ndepht = 3\n"));
        assert!(e.path.starts_with("solver"), "{e}");
        let e = err(&format!("{MINIMAL}\ninitial_state = \"sideways\"\n"));
        assert_eq!(e.path, "initial_state");
    }

    #[test]
    fn explicit_initial_matrix() {
        let text = format!("{MINIMAL}\ninitial_state = {{ re = [[0.5, 0.5], [0.5, 0.5]] }}\n");
        let cfg = parse(&text).unwrap().config;
        let (model, preset) = cfg.model().unwrap();
        assert_eq!(preset, InitialPreset::Model);
        assert!((model.initial_state[(0, 1)].re - 0.5).abs() < 1e-15);
        let bad = format!("{MINIMAL}\ninitial_state = {{ re = [[1.0, 0.0], [0.0, 1.0]] }}\n");
        assert_eq!(err(&bad).path, "initial_state");
    }

    #[test]
    fn two_qubit_product_preset() {
        let text = MINIMAL.replace("kind = \"single_qubit\"", "kind = \"two_qubit\", g = 0.01");
        let cfg = parse(&text).unwrap().config;
        let (model, _) = cfg.model().unwrap();
        assert_eq!(model.dim, 4);
        assert!((model.initial_state[(0, 3)].re - 0.25).abs() < 1e-15);
    }
}
