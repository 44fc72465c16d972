//! Run configuration: a TOML file with every default embedded.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thinfilm::branching::BranchKind;
use thinfilm::profiles::ProfileConfig;
use thinfilm::QuadConfig;

/// A configuration value outside its admissible range.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Node spacing; the dimension default applies when absent.
    pub h: Option<f64>,
    /// Half-width of the box; the dimension default applies when absent.
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BranchConfig {
    pub k: usize,
    pub kind: String,
    /// η_{k,1} of the global expansion.
    pub eta: f64,
}

impl Default for BranchConfig {
    fn default() -> Self {
        BranchConfig {
            k: 1,
            kind: "blowup".into(),
            eta: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    /// Order of the cancelled moments of the initial datum.
    pub k: usize,
    /// Width of the Hermite-function datum.
    pub eps: f64,
    /// Times τ at which both routes are compared.
    pub taus: Vec<f64>,
    /// Times τ used by the decay-rate fit.
    pub fit_taus: Vec<f64>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            k: 1,
            eps: 0.5,
            taus: (0..=12).map(|i| 0.5 * i as f64).collect(),
            fit_taus: thinfilm::semigroup::default_fit_taus(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinueConfig {
    pub k: usize,
    pub kind: String,
    /// Compact |y| ≤ radius of the homotopy distance.
    pub compare_radius: f64,
}

impl Default for ContinueConfig {
    fn default() -> Self {
        ContinueConfig {
            k: 0,
            kind: "global".into(),
            compare_radius: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnoseConfig {
    /// The diagnostic uses F on |y| ≤ window.
    pub window: f64,
    /// Multiplicity k of the zeros in the bound (1/n)e^{−1/(nk)}.
    pub multiplicity: u32,
    /// Spacing of the F samples.
    pub h: f64,
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        DiagnoseConfig {
            window: 4.0,
            multiplicity: 1,
            h: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub dimension: usize,
    pub grid: GridConfig,
    pub quad: QuadConfig,
    /// Residual tolerance of the eigen-residual and profile checks.
    pub resid_tol: f64,
    pub kmax: usize,
    pub n_list: Vec<f64>,
    pub out_dir: PathBuf,
    /// Sort all parallel results before writing them.
    pub deterministic: bool,
    pub branch: BranchConfig,
    pub evolve: EvolveConfig,
    #[serde(rename = "continue")]
    pub continuation: ContinueConfig,
    pub diagnose: DiagnoseConfig,
    pub profiles: ProfileConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dimension: 1,
            grid: GridConfig::default(),
            quad: QuadConfig::default(),
            resid_tol: 1e-4,
            kmax: 5,
            n_list: vec![0.2, 0.1, 0.05],
            out_dir: PathBuf::from("out"),
            deterministic: true,
            branch: BranchConfig::default(),
            evolve: EvolveConfig::default(),
            continuation: ContinueConfig::default(),
            diagnose: DiagnoseConfig::default(),
            profiles: ProfileConfig::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError(format!(
            "{name} must be positive and finite (got {v})"
        )))
    }
}

pub fn parse_kind(name: &str, s: &str) -> Result<BranchKind, ConfigError> {
    s.parse()
        .map_err(|_| ConfigError(format!("{name} must be 'global' or 'blowup' (got '{s}')")))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("the configuration is representable in TOML")
    }

    /// Grid spacing and radius with the dimension defaults filled in.
    pub fn grid_params(&self) -> (f64, f64) {
        let (h, r) = if self.dimension == 2 {
            (0.25, 32.0)
        } else {
            (0.05, 48.0)
        };
        (self.grid.h.unwrap_or(h), self.grid.radius.unwrap_or(r))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dimension != 1 && self.dimension != 2 {
            return Err(ConfigError(format!(
                "dimension must be 1 or 2 (got {})",
                self.dimension
            )));
        }
        let (h, r) = self.grid_params();
        positive("grid.h", h)?;
        positive("grid.radius", r)?;
        if r <= h {
            return Err(ConfigError(format!(
                "grid.radius = {r} must exceed grid.h = {h}"
            )));
        }
        positive("quad.xi_max", self.quad.xi_max)?;
        positive("quad.quad_tol", self.quad.quad_tol)?;
        positive("quad.tail_tol", self.quad.tail_tol)?;
        if self.quad.panels == 0 || self.quad.points == 0 {
            return Err(ConfigError(
                "quad.panels and quad.points must be at least 1".into(),
            ));
        }
        positive("resid_tol", self.resid_tol)?;
        if self.kmax > thinfilm::kernel::MAX_TABLE_ORDER {
            return Err(ConfigError(format!(
                "kmax must be at most {} (got {})",
                thinfilm::kernel::MAX_TABLE_ORDER,
                self.kmax
            )));
        }
        if self.n_list.is_empty() {
            return Err(ConfigError("n_list must not be empty".into()));
        }
        for &n in &self.n_list {
            if !(n > 0.0 && n <= 1.0) {
                return Err(ConfigError(format!(
                    "n_list entries must lie in (0, 1] (got {n})"
                )));
            }
        }
        parse_kind("branch.kind", &self.branch.kind)?;
        if !self.branch.eta.is_finite() {
            return Err(ConfigError("branch.eta must be finite".into()));
        }
        positive("evolve.eps", self.evolve.eps)?;
        if self
            .evolve
            .taus
            .iter()
            .chain(&self.evolve.fit_taus)
            .any(|t| !(*t >= 0.0 && t.is_finite()))
        {
            return Err(ConfigError(
                "evolve times must be finite and non-negative".into(),
            ));
        }
        if self.evolve.fit_taus.len() < 3 {
            return Err(ConfigError("evolve.fit_taus needs at least 3 times".into()));
        }
        parse_kind("continue.kind", &self.continuation.kind)?;
        positive("continue.compare_radius", self.continuation.compare_radius)?;
        positive("diagnose.window", self.diagnose.window)?;
        positive("diagnose.h", self.diagnose.h)?;
        if self.diagnose.multiplicity == 0 {
            return Err(ConfigError(
                "diagnose.multiplicity must be at least 1".into(),
            ));
        }
        let p = &self.profiles;
        for (name, v) in [
            ("profiles.h", p.h),
            ("profiles.tail_tol", p.tail_tol),
            ("profiles.global_range", p.global_range),
            ("profiles.blowup_range", p.blowup_range),
            ("profiles.alpha_tol", p.alpha_tol),
            ("profiles.bundle_margin", p.bundle_margin),
        ] {
            positive(name, v)?;
        }
        for (name, o) in [
            ("profiles.ode", &p.ode),
            ("profiles.blowup_ode", &p.blowup_ode),
        ] {
            for (field, v) in [
                ("rtol", o.rtol),
                ("atol", o.atol),
                ("h_init", o.h_init),
                ("h_min", o.h_min),
                ("h_max", o.h_max),
            ] {
                positive(&format!("{name}.{field}"), v)?;
            }
        }
        Ok(())
    }
}
