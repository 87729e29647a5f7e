use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::lagrangian::{
    linear_elliptic, polynomial_lagrangian, LagrangianSpec, MatrixField, Monomial, ScalarField, ValueBox,
};
use crate::network::Activation;
use crate::oracle::golden;
use crate::solver::BandlimitPolicy;
use crate::spectral::{FrequencyIndex, SineFunction};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Invalid(String),
}

/// Built-in problem by name, or a family with explicit parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemRef {
    Golden(String),
    Family(Family),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Family {
    /// `L = ½ a‖z‖² + ½ c y²`.
    LinearElliptic { dim: usize, a: f64, c: f64 },
    Polynomial {
        dim: usize,
        terms: Vec<Monomial<f64>>,
        #[serde(rename = "box")]
        value_box: ValueBox<f64>,
        w_ref: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub omega: Vec<u32>,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceStop {
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub approx: ProblemRef,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub nodes: usize,
    #[serde(default = "default_oracle_tol")]
    pub tol: f64,
    #[serde(default = "default_oracle_agreement")]
    pub agreement: f64,
}

fn default_oracle_tol() -> f64 {
    1e-8
}

fn default_oracle_agreement() -> f64 {
    1e-2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum NetworkTarget {
    /// The final solver iterate.
    Solution,
    /// Random zero-mean polynomial with lattice radius `w`.
    Random { dim: usize, w: usize, terms: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub target: NetworkTarget,
    pub widths: Vec<usize>,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    #[serde(default = "default_quadrature")]
    pub quadrature: usize,
    /// Accepted log-log slope window around −1.
    #[serde(default = "default_slope_tol")]
    pub slope_tol: f64,
}

fn default_activation() -> Activation {
    Activation::CosineFeature
}

fn default_quadrature() -> usize {
    32
}

fn default_slope_tol() -> f64 {
    0.3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Artifact prefix; defaults to the config file stem.
    #[serde(default)]
    pub name: Option<String>,
    pub problem: ProblemRef,
    /// Source modes; golden problems supply their own when omitted.
    #[serde(default)]
    pub source: Option<Vec<Mode>>,
    #[serde(rename = "W")]
    pub w: usize,
    /// Quadrature nodes per axis, a multiple of `W`; defaults to `4W`.
    #[serde(rename = "M", default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub eta: Option<f64>,
    pub eps: f64,
    /// Fixed step count in place of the iteration formula.
    #[serde(rename = "T", default)]
    pub iterations: Option<usize>,
    /// Switches from the scheduled run to increment-based stopping.
    #[serde(default)]
    pub tolerance: Option<ToleranceStop>,
    #[serde(default = "default_policy")]
    pub policy: BandlimitPolicy,
    #[serde(default)]
    pub reference_energy: Option<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub pair: Option<PairConfig>,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub network: Option<NetworkConfig>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_policy() -> BandlimitPolicy {
    BandlimitPolicy::Grow
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

/// A resolved problem: spec, source and whatever closed form is known.
pub struct Resolved {
    pub spec: LagrangianSpec<f64>,
    pub f: SineFunction<f64>,
    pub u_star: Option<SineFunction<f64>>,
    pub energy: Option<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        if cfg.name.is_none() {
            cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("experiment")
    }

    pub fn grid_points(&self) -> usize {
        self.m.unwrap_or(4 * self.w)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if self.w == 0 {
            return bad("W must be at least 1".into());
        }
        let m = self.grid_points();
        if m < self.w || !m.is_multiple_of(self.w) {
            return bad(format!("M = {m} must be a multiple of W = {} and at least W", self.w));
        }
        if let Some(eta) = self.eta {
            if !(eta >= 0.0 && eta.is_finite()) {
                return bad(format!("eta must be nonnegative, got {eta}"));
            }
        }
        if let Some(t) = &self.tolerance {
            if !(t.tol > 0.0) || t.max_iter == 0 {
                return bad("tolerance needs tol > 0 and max_iter >= 1".into());
            }
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if let Some(n) = &self.network {
            if n.widths.is_empty() || n.widths.contains(&0) {
                return bad("network widths must be nonempty and positive".into());
            }
            if n.quadrature == 0 {
                return bad("network quadrature must be positive".into());
            }
        }
        if let Some(o) = &self.oracle {
            if !(o.tol > 0.0 && o.agreement > 0.0) {
                return bad("oracle tolerances must be positive".into());
            }
        }
        self.resolve().map(|_| ())
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let mut r = resolve_problem(&self.problem)?;
        if let Some(modes) = &self.source {
            r.f = source(r.spec.dim(), modes)?;
            r.u_star = None;
            r.energy = None;
        }
        if self.reference_energy.is_some() {
            r.energy = self.reference_energy;
        }
        if r.f.is_zero() && self.source.is_none() {
            return Err(ConfigError::Invalid("family problems need a nonempty source".into()));
        }
        if r.f.bandlimit() > self.w {
            return Err(ConfigError::Invalid(format!(
                "source bandlimit {} exceeds W = {}",
                r.f.bandlimit(),
                self.w
            )));
        }
        Ok(r)
    }

    pub fn resolve_approx(&self) -> Result<Option<LagrangianSpec<f64>>, ConfigError> {
        match &self.pair {
            None => Ok(None),
            Some(p) => Ok(Some(resolve_problem(&p.approx)?.spec)),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid(e.to_string())
}

fn resolve_problem(p: &ProblemRef) -> Result<Resolved, ConfigError> {
    match p {
        ProblemRef::Golden(name) => {
            let g = golden::<f64>(name).map_err(invalid)?;
            Ok(Resolved {
                spec: g.spec,
                f: g.f,
                u_star: Some(g.u_star),
                energy: Some(g.energy),
            })
        }
        ProblemRef::Family(Family::LinearElliptic { dim, a, c }) => {
            let spec = linear_elliptic(*dim, MatrixField::scaled_identity(*dim, *a), ScalarField::Constant(*c))
                .map_err(invalid)?
                .with_name("linear-elliptic");
            Ok(Resolved {
                f: SineFunction::zero(*dim, 1),
                spec,
                u_star: None,
                energy: None,
            })
        }
        ProblemRef::Family(Family::Polynomial {
            dim,
            terms,
            value_box,
            w_ref,
        }) => {
            let bx = ValueBox::new(value_box.y_max, value_box.z_max).map_err(invalid)?;
            let spec = polynomial_lagrangian(*dim, terms.clone(), bx, *w_ref)
                .map_err(invalid)?
                .with_name("polynomial");
            Ok(Resolved {
                f: SineFunction::zero(*dim, 1),
                spec,
                u_star: None,
                energy: None,
            })
        }
    }
}

fn source(dim: usize, modes: &[Mode]) -> Result<SineFunction<f64>, ConfigError> {
    if modes.is_empty() {
        return Err(ConfigError::Invalid("source must list at least one mode".into()));
    }
    let w = modes
        .iter()
        .flat_map(|m| m.omega.iter().copied())
        .max()
        .unwrap_or(1)
        .max(1) as usize;
    let coeffs = modes
        .iter()
        .map(|m| FrequencyIndex::new(m.omega.clone()).map(|i| (i, m.c)))
        .collect::<crate::Result<Vec<_>>>()
        .map_err(invalid)?;
    SineFunction::from_coefficients(dim, w, coeffs).map_err(invalid)
}
