//! Scenario files.
//!
//! A scenario is a TOML table whose `kind` key selects the runner. Unknown
//! keys are rejected and every numeric constraint of the target solver is
//! checked here, before any output directory exists.

use std::path::Path;

use kreinwave_core::driftwave::{DriftConfig, FourierLattice};
use kreinwave_core::halfline::decay_check;
use kreinwave_core::linalg::CMatrix;
use kreinwave_core::stargraph::StarGraphConfig;
use num_complex::Complex64;
use serde::Deserialize;

use crate::ConfigError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    VerifyMatrix(VerifyMatrix),
    StargraphRun(StargraphRun),
    PointwaveRun(PointwaveRun),
    DriftGamma(DriftGamma),
    DriftSmoke(DriftSmoke),
}

fn default_lambdas() -> Vec<f64> {
    vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

/// Identity suite on seeded random matrix models. Without `n` and `m` the
/// sizes follow the seed: `n = 1 + seed mod 8`, `m = min(1 + seed mod 3, n)`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyMatrix {
    #[serde(default)]
    pub seed: u64,
    pub output: Option<String>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    #[serde(default = "one")]
    pub count: usize,
    #[serde(default = "yes")]
    pub drift: bool,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "VerifyMatrix::default_tolerance")]
    pub tolerance: f64,
}

impl VerifyMatrix {
    fn default_tolerance() -> f64 {
        1e-10
    }

    pub fn from_seed(seed: u64, count: usize) -> Self {
        VerifyMatrix {
            seed,
            output: None,
            n: None,
            m: None,
            count,
            drift: true,
            lambdas: default_lambdas(),
            tolerance: Self::default_tolerance(),
        }
    }

    /// `(n, m, drift)` for one model of the batch.
    pub fn sizes(&self, seed: u64) -> (usize, usize, bool) {
        let n = self.n.unwrap_or(1 + (seed % 8) as usize);
        let m = self.m.unwrap_or((1 + (seed % 3) as usize).min(n));
        // a quarter of the seeded models are drift free
        let drift = self.drift && (self.n.is_some() || seed % 4 != 3);
        (n, m, drift)
    }
}

/// Wave evolution on a star graph from a Gaussian pulse on every edge.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StargraphRun {
    #[serde(default)]
    pub seed: u64,
    pub output: Option<String>,
    /// Real part of Θ, one row per edge.
    pub theta: Vec<Vec<f64>>,
    pub theta_im: Option<Vec<Vec<f64>>>,
    pub h: f64,
    pub length: f64,
    pub dt: f64,
    pub steps: usize,
    pub pulse_center: f64,
    #[serde(default = "StargraphRun::default_width")]
    pub pulse_width: f64,
    #[serde(default = "StargraphRun::default_kernel_lambda")]
    pub kernel_lambda: f64,
    #[serde(default = "StargraphRun::default_energy_tolerance")]
    pub energy_tolerance: f64,
    #[serde(default = "StargraphRun::default_kernel_tolerance")]
    pub kernel_tolerance: f64,
    #[serde(default = "StargraphRun::default_vertex_tolerance")]
    pub vertex_tolerance: f64,
}

impl StargraphRun {
    fn default_width() -> f64 {
        1.0
    }
    fn default_kernel_lambda() -> f64 {
        1.3
    }
    fn default_energy_tolerance() -> f64 {
        1e-6
    }
    fn default_kernel_tolerance() -> f64 {
        1e-12
    }
    /// The one-sided vertex stencil sees the O(h²) error of the scheme.
    fn default_vertex_tolerance() -> f64 {
        1e-3
    }

    pub fn theta_matrix(&self) -> Result<CMatrix, ConfigError> {
        let n = self.theta.len();
        if n == 0 || self.theta.iter().any(|r| r.len() != n) {
            return Err(ConfigError::new("theta must be a square, nonempty table"));
        }
        let im = match &self.theta_im {
            Some(rows) if rows.len() != n || rows.iter().any(|r| r.len() != n) => {
                return Err(ConfigError::new("theta_im must have the shape of theta"));
            }
            Some(rows) => rows.clone(),
            None => vec![vec![0.0; n]; n],
        };
        Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new(self.theta[i][j], im[i][j])))
    }

    pub fn graph(&self) -> Result<StarGraphConfig, ConfigError> {
        StarGraphConfig::new(self.theta_matrix()?, self.h, self.length).map_err(ConfigError::from)
    }
}

/// Radial evolution for one point interaction at the origin.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointwaveRun {
    #[serde(default)]
    pub seed: u64,
    pub output: Option<String>,
    pub theta: f64,
    pub h: f64,
    pub r_max: f64,
    pub dt: f64,
    pub steps: usize,
    /// Initial charge; the regular part at the origin is set to `θζ`.
    #[serde(default)]
    pub zeta: f64,
    pub pulse_center: f64,
    #[serde(default = "PointwaveRun::default_width")]
    pub pulse_width: f64,
    #[serde(default = "PointwaveRun::default_record")]
    pub record_every: usize,
    /// Side of the cubic grid the final field is resampled on (0 for none).
    /// Must be even.
    #[serde(default)]
    pub grid_n: usize,
    #[serde(default = "PointwaveRun::default_grid_h")]
    pub grid_h: f64,
    #[serde(default = "PointwaveRun::default_energy_tolerance")]
    pub energy_tolerance: f64,
    #[serde(default = "PointwaveRun::default_domain_tolerance")]
    pub domain_tolerance: f64,
}

impl PointwaveRun {
    fn default_width() -> f64 {
        0.5
    }
    fn default_record() -> usize {
        50
    }
    fn default_grid_h() -> f64 {
        0.5
    }
    fn default_energy_tolerance() -> f64 {
        1e-5
    }
    fn default_domain_tolerance() -> f64 {
        1e-3
    }
}

/// Closed form against quadrature for the drift Γ over a product grid.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftGamma {
    #[serde(default)]
    pub seed: u64,
    pub output: Option<String>,
    #[serde(default = "DriftGamma::default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "DriftGamma::default_speeds")]
    pub speeds: Vec<f64>,
    #[serde(default = "DriftGamma::default_thetas")]
    pub thetas: Vec<f64>,
    #[serde(default = "DriftGamma::default_tolerance")]
    pub tolerance: f64,
    /// Quadrature against exact integration in `r` of the same integrand.
    #[serde(default = "DriftGamma::default_quadrature_tolerance")]
    pub quadrature_tolerance: f64,
    #[serde(default = "DriftGamma::default_limit_speeds")]
    pub limit_speeds: Vec<f64>,
    /// Allowed relative deviation from the `v = 0` value, per `|v|²`.
    #[serde(default = "DriftGamma::default_limit_factor")]
    pub limit_factor: f64,
}

impl DriftGamma {
    fn default_lambdas() -> Vec<f64> {
        vec![0.5, 1.0, 2.0]
    }
    fn default_speeds() -> Vec<f64> {
        vec![0.1, 0.3, 0.5, 0.7, 0.9]
    }
    fn default_thetas() -> Vec<f64> {
        vec![0.0, 1.0]
    }
    fn default_tolerance() -> f64 {
        1e-6
    }
    fn default_quadrature_tolerance() -> f64 {
        1e-8
    }
    fn default_limit_speeds() -> Vec<f64> {
        vec![0.01, 0.02, 0.05, 0.1]
    }
    fn default_limit_factor() -> f64 {
        0.6
    }
}

/// Fourier lattice truncation of the drifted point source.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSmoke {
    #[serde(default)]
    pub seed: u64,
    pub output: Option<String>,
    pub v: [f64; 3],
    pub theta: f64,
    pub box_len: f64,
    pub cutoff: f64,
    #[serde(default = "DriftSmoke::default_lambdas")]
    pub lambdas: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
    /// Large lattice compared against the operator value of Γ.
    #[serde(default = "DriftSmoke::default_large_box")]
    pub large_box: f64,
    #[serde(default = "DriftSmoke::default_large_cutoff")]
    pub large_cutoff: f64,
    #[serde(default = "DriftSmoke::default_green_n")]
    pub green_n: usize,
    #[serde(default = "DriftSmoke::default_green_h")]
    pub green_h: f64,
    #[serde(default = "DriftSmoke::default_identity_tolerance")]
    pub identity_tolerance: f64,
    #[serde(default = "DriftSmoke::default_energy_tolerance")]
    pub energy_tolerance: f64,
    #[serde(default = "DriftSmoke::default_convergence_tolerance")]
    pub convergence_tolerance: f64,
}

impl DriftSmoke {
    fn default_lambdas() -> Vec<f64> {
        vec![0.5, 1.0, 2.0]
    }
    fn default_large_box() -> f64 {
        40.0
    }
    fn default_large_cutoff() -> f64 {
        12.0
    }
    fn default_green_n() -> usize {
        16
    }
    fn default_green_h() -> f64 {
        0.25
    }
    fn default_identity_tolerance() -> f64 {
        1e-10
    }
    fn default_energy_tolerance() -> f64 {
        1e-10
    }
    fn default_convergence_tolerance() -> f64 {
        0.02
    }

    pub fn drift(&self) -> Result<DriftConfig, ConfigError> {
        DriftConfig::new(self.v, self.theta).map_err(ConfigError::from)
    }
}

fn positive(name: &str, x: f64) -> Result<(), ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(format!("{name} must be positive and finite, got {x}")))
    }
}

fn tolerance(name: &str, x: f64) -> Result<(), ConfigError> {
    positive(name, x)
}

fn nonempty(name: &str, xs: &[f64]) -> Result<(), ConfigError> {
    if xs.is_empty() {
        return Err(ConfigError::new(format!("{name} must not be empty")));
    }
    Ok(())
}

fn at_least(name: &str, x: usize, min: usize) -> Result<(), ConfigError> {
    if x < min {
        return Err(ConfigError::new(format!("{name} must be at least {min}, got {x}")));
    }
    Ok(())
}

/// Even sizes keep the origin, where the fields are singular, off the grid.
fn even(name: &str, x: usize) -> Result<(), ConfigError> {
    if x < 2 || x % 2 == 1 {
        return Err(ConfigError::new(format!("{name} must be even and at least 2, got {x}")));
    }
    Ok(())
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let s: Scenario = toml::from_str(text).map_err(|e| ConfigError::new(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError::new(format!("{}: {}", path.display(), e.0)))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::VerifyMatrix(_) => "verify-matrix",
            Scenario::StargraphRun(_) => "stargraph-run",
            Scenario::PointwaveRun(_) => "pointwave-run",
            Scenario::DriftGamma(_) => "drift-gamma",
            Scenario::DriftSmoke(_) => "drift-smoke",
        }
    }

    pub fn output(&self) -> Option<&str> {
        match self {
            Scenario::VerifyMatrix(s) => s.output.as_deref(),
            Scenario::StargraphRun(s) => s.output.as_deref(),
            Scenario::PointwaveRun(s) => s.output.as_deref(),
            Scenario::DriftGamma(s) => s.output.as_deref(),
            Scenario::DriftSmoke(s) => s.output.as_deref(),
        }
    }

    /// Every constraint the solvers would otherwise report mid-run.
    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            Scenario::VerifyMatrix(s) => {
                at_least("count", s.count, 1)?;
                if let Some(n) = s.n {
                    at_least("n", n, 1)?;
                }
                if let Some(m) = s.m {
                    at_least("m", m, 1)?;
                }
                for i in 0..s.count as u64 {
                    let (n, m, _) = s.sizes(s.seed.wrapping_add(i));
                    if m > n || n > 64 {
                        return Err(ConfigError::new(format!("need 1 <= m <= n <= 64, got n = {n}, m = {m}")));
                    }
                }
                nonempty("lambdas", &s.lambdas)?;
                if s.lambdas.iter().any(|l| *l == 0.0 || !l.is_finite()) {
                    return Err(ConfigError::new("lambdas must be real, finite and nonzero"));
                }
                tolerance("tolerance", s.tolerance)
            }
            Scenario::StargraphRun(s) => {
                let graph = s.graph()?;
                positive("dt", s.dt)?;
                decay_check(graph.grid(), s.kernel_lambda, &[])?;
                positive("pulse_width", s.pulse_width)?;
                positive("kernel_lambda", s.kernel_lambda)?;
                if !(s.pulse_center > 0.0 && s.pulse_center < s.length) {
                    return Err(ConfigError::new("pulse_center must lie inside (0, length)"));
                }
                tolerance("energy_tolerance", s.energy_tolerance)?;
                tolerance("kernel_tolerance", s.kernel_tolerance)?;
                tolerance("vertex_tolerance", s.vertex_tolerance)
            }
            Scenario::PointwaveRun(s) => {
                positive("theta", s.theta)?;
                positive("h", s.h)?;
                positive("r_max", s.r_max)?;
                if s.r_max / s.h < 20.0 {
                    return Err(ConfigError::new("r_max must span at least 20 grid steps"));
                }
                positive("dt", s.dt)?;
                positive("pulse_width", s.pulse_width)?;
                if !s.zeta.is_finite() {
                    return Err(ConfigError::new("zeta must be finite"));
                }
                if !(s.pulse_center - s.pulse_width > 0.0 && s.pulse_center + s.pulse_width < s.r_max) {
                    return Err(ConfigError::new("the pulse must lie inside (0, r_max)"));
                }
                at_least("record_every", s.record_every, 1)?;
                if s.grid_n > 0 {
                    even("grid_n", s.grid_n)?;
                    positive("grid_h", s.grid_h)?;
                }
                tolerance("energy_tolerance", s.energy_tolerance)?;
                tolerance("domain_tolerance", s.domain_tolerance)
            }
            Scenario::DriftGamma(s) => {
                for (name, xs) in [("lambdas", &s.lambdas), ("speeds", &s.speeds), ("thetas", &s.thetas)] {
                    nonempty(name, xs)?;
                }
                for &l in &s.lambdas {
                    positive("lambda", l)?;
                }
                for &v in s.speeds.iter().chain(&s.limit_speeds) {
                    if !(v > 0.0 && v < 1.0) {
                        return Err(ConfigError::new(format!("speeds must lie in (0, 1), got {v}")));
                    }
                }
                for &t in &s.thetas {
                    DriftConfig::new([0.0; 3], t)?;
                }
                tolerance("tolerance", s.tolerance)?;
                tolerance("quadrature_tolerance", s.quadrature_tolerance)?;
                tolerance("limit_factor", s.limit_factor)
            }
            Scenario::DriftSmoke(s) => {
                s.drift()?;
                positive("theta", s.theta)?;
                FourierLattice::new(s.box_len, s.cutoff)?;
                FourierLattice::new(s.large_box, s.large_cutoff)?;
                nonempty("lambdas", &s.lambdas)?;
                for &l in &s.lambdas {
                    positive("lambda", l)?;
                }
                positive("dt", s.dt)?;
                if s.green_n > 0 {
                    even("green_n", s.green_n)?;
                    positive("green_h", s.green_h)?;
                }
                tolerance("identity_tolerance", s.identity_tolerance)?;
                tolerance("energy_tolerance", s.energy_tolerance)?;
                tolerance("convergence_tolerance", s.convergence_tolerance)
            }
        }
    }
}
