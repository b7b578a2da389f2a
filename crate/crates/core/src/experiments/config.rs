use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BoxGrid, GridSpec, RadialGrid};
use crate::inequalities::FuzzOp;
use crate::params::HlsParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Constants,
    VerifyBubble,
    InteractionSweep,
    Stability,
    IneqFuzz,
    BumpCheck,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Constants,
        Scenario::VerifyBubble,
        Scenario::InteractionSweep,
        Scenario::Stability,
        Scenario::IneqFuzz,
        Scenario::BumpCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Constants => "constants",
            Scenario::VerifyBubble => "verify-bubble",
            Scenario::InteractionSweep => "interaction-sweep",
            Scenario::Stability => "stability",
            Scenario::IneqFuzz => "ineq-fuzz",
            Scenario::BumpCheck => "bump-check",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::ConfigParse(format!("unknown scenario '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyMode {
    /// Equal scales, centres spaced along the first axis.
    Translation,
    /// Common centre, geometric ladder of scales.
    Dilation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub nu: usize,
    pub mode: FamilyMode,
    /// Target values of the largest pairwise Q.
    pub q: Vec<f64>,
    /// Common scale in translation mode, geometric mean scale in dilation mode.
    #[serde(default = "one")]
    pub lambda: f64,
    /// α_i − 1; empty means all weights are 1.
    #[serde(default)]
    pub alpha_offsets: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationMode {
    RandomSmooth,
    TangentOrthogonalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub mode: PerturbationMode,
    /// Values of t = ‖∇ρ‖.
    pub amplitudes: Vec<f64>,
    /// Length scale of the Gaussian low-pass filter.
    #[serde(default = "one")]
    pub correlation: f64,
    /// Envelope width around each bubble, in units of 1/λ_i.
    #[serde(default = "three")]
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GridConfig {
    Box {
        half_width: f64,
        n: usize,
    },
    Radial {
        #[serde(default = "r_min")]
        r_min: f64,
        #[serde(default = "r_max")]
        r_max: f64,
        #[serde(default = "nodes")]
        nodes: usize,
    },
}

impl GridConfig {
    pub fn build(&self, n_dim: usize) -> Result<GridSpec> {
        let bad = |e: Error| Error::InfeasibleConfig(e.to_string());
        match *self {
            GridConfig::Box { half_width, n } => {
                if n_dim != 3 {
                    return Err(Error::InfeasibleConfig("box grids are three-dimensional".into()));
                }
                Ok(GridSpec::Box(BoxGrid::new(half_width, n).map_err(bad)?))
            }
            GridConfig::Radial { r_min, r_max, nodes } => {
                Ok(GridSpec::Radial(RadialGrid::new(n_dim, r_min, r_max, nodes).map_err(bad)?))
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            GridConfig::Box { half_width, n } => format!("box{n}@{half_width}"),
            GridConfig::Radial { nodes, .. } => format!("radial{nodes}"),
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig::Radial { r_min: r_min(), r_max: r_max(), nodes: nodes() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzSpec {
    pub ops: Vec<FuzzOp>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpConfig {
    pub epsilon: f64,
    #[serde(default = "sixteen")]
    pub eta: f64,
    #[serde(default = "samples")]
    pub samples: usize,
    /// Member around which the family is normalized.
    #[serde(default)]
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: HlsParams,
    /// May be left out when the CLI supplies it.
    #[serde(default)]
    pub scenario: Option<Scenario>,
    #[serde(default)]
    pub family: Option<FamilySpec>,
    #[serde(default)]
    pub perturbation: Option<PerturbationSpec>,
    #[serde(default)]
    pub grids: Vec<GridConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "multistart")]
    pub multistart: usize,
    /// δ for the regime label; by default the smallest δ the point satisfies.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub fuzz: Option<FuzzSpec>,
    #[serde(default)]
    pub bump: Option<BumpConfig>,
}

fn one() -> f64 {
    1.0
}
fn three() -> f64 {
    3.0
}
fn sixteen() -> f64 {
    16.0
}
fn r_min() -> f64 {
    1e-4
}
fn r_max() -> f64 {
    1e4
}
fn nodes() -> usize {
    4096
}
fn samples() -> usize {
    10_000
}
fn multistart() -> usize {
    5
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::ConfigParse(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| parse_err(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn scenario(&self) -> Result<Scenario> {
        self.scenario.ok_or_else(|| parse_err("no scenario given"))
    }

    /// Grids to run on; a single default radial grid when none are listed.
    pub fn grid_list(&self) -> Vec<GridConfig> {
        if self.grids.is_empty() {
            vec![GridConfig::default()]
        } else {
            self.grids.clone()
        }
    }

    /// Check that the fields the scenario needs are present and sane.
    pub fn validate(&self) -> Result<()> {
        let sc = self.scenario()?;
        if self.multistart == 0 {
            return Err(parse_err("multistart must be at least 1"));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(parse_err(format!("delta = {d} must be positive")));
            }
        }
        let family = || self.family.as_ref().ok_or_else(|| parse_err(format!("scenario {} needs a family", sc.name())));
        match sc {
            Scenario::Constants | Scenario::VerifyBubble => {}
            Scenario::InteractionSweep => check_family(family()?)?,
            Scenario::Stability => {
                check_family(family()?)?;
                let p = self
                    .perturbation
                    .as_ref()
                    .ok_or_else(|| parse_err("scenario stability needs a perturbation"))?;
                if p.amplitudes.is_empty() || p.amplitudes.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                    return Err(parse_err("perturbation amplitudes must be positive and non-empty"));
                }
                if !(p.correlation > 0.0 && p.envelope > 0.0) {
                    return Err(parse_err("correlation and envelope must be positive"));
                }
            }
            Scenario::IneqFuzz => {
                let f = self.fuzz.as_ref().ok_or_else(|| parse_err("scenario ineq-fuzz needs a fuzz section"))?;
                if f.ops.is_empty() || f.samples == 0 {
                    return Err(parse_err("fuzz needs at least one op and one sample"));
                }
            }
            Scenario::BumpCheck => {
                check_family(family()?)?;
                let b = self.bump.as_ref().ok_or_else(|| parse_err("scenario bump-check needs a bump section"))?;
                if b.target >= self.family.as_ref().map_or(0, |f| f.nu) {
                    return Err(parse_err("bump target must index a family member"));
                }
            }
        }
        Ok(())
    }
}

fn check_family(f: &FamilySpec) -> Result<()> {
    if f.nu == 0 {
        return Err(parse_err("family needs nu >= 1"));
    }
    if f.q.is_empty() {
        return Err(parse_err("family needs at least one Q target"));
    }
    if !f.alpha_offsets.is_empty() && f.alpha_offsets.len() != f.nu {
        return Err(parse_err(format!("alpha_offsets has {} entries, expected {}", f.alpha_offsets.len(), f.nu)));
    }
    if !(f.lambda > 0.0 && f.lambda.is_finite()) {
        return Err(parse_err("family lambda must be positive"));
    }
    Ok(())
}
