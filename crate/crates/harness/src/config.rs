//! The TOML run configuration.
//!
//! Every table is optional; an empty file runs the defaults.
//!
//! ```toml
//! seed = 7
//! out = "reports"
//! format = "both"            # csv | svg | both
//!
//! [toy]
//! drift = "tanh"             # constant | tanh | cosine
//! scale = 1.0
//! # indicator = [[-1.0, 1.0]]
//!
//! [chain]
//! family = "herding"         # herding | voter | constant
//! q = [0.6, 0.4]
//! base = 0.1
//! gain = 0.5
//! horizon = 2
//! # matrix = [[0.7, 0.3], [0.2, 0.8]]   (constant family)
//!
//! [ito]
//! drift = "mean-reverting"   # mean-reverting | tanh
//! kappa = 1.0
//! gain = 0.5
//! sigma = 1.0
//! depth = 0.0
//! x0 = 1.0
//! dim = 1
//! horizon = 1.0
//! steps = 16
//!
//! [simulate]
//! model = "toy"              # toy | chain | ito
//! particles = 1000
//!
//! [rate]
//! model = "toy"
//! mean = [1.0, 1.0]          # toy: Gaussian θ
//! cov = [1.0, 1.0, 1.0, 2.0]
//! paths = [[0, 0, 0]]        # chain: path measure θ
//! weights = [1.0]
//! shift = 0.5                # ito: mean shift c·t of the limit law
//!
//! [sanov]
//! mu = [0.5, 0.5]
//! n = [4, 8, 12]
//!
//! [decay]
//! n = [20, 40, 60]
//!
//! [lln]
//! systems = ["toy", "ito"]   # toy | ito | iid
//! n = [100, 1000, 10000]
//! replications = 20
//! quantiles = 20000
//!
//! [identities]
//! mutation = 0.0
//! ```

use std::path::{Path, PathBuf};

use mfrate_core::ito_euler::{Dispersion, Drift, EulerGrid, ItoSpec};
use mfrate_core::meanfield_chain::{MeanFieldChainSpec, TransitionFamily};
use mfrate_core::toy_model::{DriftFunction, IntervalUnion, ToyModelSpec};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{HarnessError, Result};
use crate::report::Format;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub toy: ToyConfig,
    pub chain: ChainConfig,
    pub ito: ItoConfig,
    pub simulate: SimulateConfig,
    pub rate: RateConfig,
    pub sanov: SanovConfig,
    pub decay: DecayConfig,
    pub lln: LlnConfig,
    pub identities: IdentityConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToyConfig {
    pub drift: String,
    pub scale: f64,
    pub indicator: Option<Vec<[f64; 2]>>,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            drift: "tanh".into(),
            scale: 1.0,
            indicator: None,
        }
    }
}

impl ToyConfig {
    pub fn build(&self) -> Result<ToyModelSpec> {
        let b = DriftFunction::from_name(&self.drift, self.scale)?;
        Ok(match &self.indicator {
            None => ToyModelSpec::standard(b),
            Some(set) => ToyModelSpec::indicator(b, IntervalUnion::new(set.iter().map(|[a, b]| (*a, *b)).collect())?),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainConfig {
    pub family: String,
    pub q: Vec<f64>,
    pub base: f64,
    pub gain: f64,
    pub horizon: usize,
    pub matrix: Option<Vec<Vec<f64>>>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            family: "herding".into(),
            q: vec![0.6, 0.4],
            base: 0.1,
            gain: 0.5,
            horizon: 2,
            matrix: None,
        }
    }
}

impl ChainConfig {
    pub fn build(&self) -> Result<MeanFieldChainSpec> {
        let family = match self.family.as_str() {
            "herding" => TransitionFamily::herding(self.base, self.gain)?,
            "voter" => TransitionFamily::voter(self.base, self.gain)?,
            "constant" => {
                let rows = self
                    .matrix
                    .as_ref()
                    .ok_or_else(|| HarnessError::Config("the constant chain needs [chain].matrix".into()))?;
                let m = rows.len();
                if rows.iter().any(|r| r.len() != m) {
                    return Err(HarnessError::Config("[chain].matrix must be square".into()));
                }
                TransitionFamily::Constant(vec![DMatrix::from_fn(m, m, |i, j| rows[i][j])])
            }
            other => return Err(HarnessError::Config(format!("unknown chain family `{other}`"))),
        };
        Ok(MeanFieldChainSpec::new(self.q.clone(), family, self.horizon)?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ItoConfig {
    pub drift: String,
    pub kappa: f64,
    pub gain: f64,
    pub sigma: f64,
    pub depth: f64,
    pub x0: f64,
    pub dim: usize,
    pub horizon: f64,
    pub steps: usize,
}

impl Default for ItoConfig {
    fn default() -> Self {
        ItoConfig {
            drift: "mean-reverting".into(),
            kappa: 1.0,
            gain: 0.5,
            sigma: 1.0,
            depth: 0.0,
            x0: 1.0,
            dim: 1,
            horizon: 1.0,
            steps: 16,
        }
    }
}

impl ItoConfig {
    pub fn build(&self) -> Result<(ItoSpec, EulerGrid)> {
        let d = self.dim;
        if d == 0 {
            return Err(HarnessError::Config("[ito].dim must be at least 1".into()));
        }
        let drift = match self.drift.as_str() {
            "mean-reverting" => Drift::Linear {
                a: DMatrix::identity(d, d) * -self.kappa,
                b: DMatrix::identity(d, d) * self.kappa,
                c: DVector::zeros(d),
            },
            "tanh" => Drift::TanhAttraction {
                kappa: self.kappa,
                gain: self.gain,
            },
            other => return Err(HarnessError::Config(format!("unknown Itô drift `{other}`"))),
        };
        let dispersion = if self.depth == 0.0 {
            Dispersion::Constant(DMatrix::identity(d, d) * self.sigma)
        } else {
            Dispersion::Modulated {
                scale: self.sigma,
                depth: self.depth,
            }
        };
        let spec = ItoSpec::new(drift, dispersion, DVector::from_element(d, self.x0), self.horizon)?;
        let grid = EulerGrid::for_spec(&spec, self.steps)?;
        Ok((spec, grid))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Toy,
    Chain,
    Ito,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub model: Model,
    pub particles: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            model: Model::Toy,
            particles: 1000,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateConfig {
    pub model: Model,
    pub mean: Vec<f64>,
    pub cov: Vec<f64>,
    pub paths: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
    pub shift: f64,
}

impl Default for RateConfig {
    fn default() -> Self {
        RateConfig {
            model: Model::Toy,
            mean: vec![1.0, 1.0],
            cov: vec![1.0, 1.0, 1.0, 2.0],
            paths: Vec::new(),
            weights: Vec::new(),
            shift: 0.5,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SanovConfig {
    pub mu: Vec<f64>,
    pub n: Vec<u64>,
}

impl Default for SanovConfig {
    fn default() -> Self {
        SanovConfig {
            mu: vec![0.5, 0.5],
            n: (1..=50).map(|k| 4 * k).collect(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayConfig {
    pub n: Vec<u64>,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig { n: vec![20, 40, 60] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LlnSystem {
    Toy,
    Ito,
    Iid,
}

impl LlnSystem {
    pub fn name(self) -> &'static str {
        match self {
            LlnSystem::Toy => "toy",
            LlnSystem::Ito => "ito",
            LlnSystem::Iid => "iid",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LlnConfig {
    pub systems: Vec<LlnSystem>,
    pub n: Vec<u64>,
    pub replications: usize,
    pub quantiles: usize,
}

impl Default for LlnConfig {
    fn default() -> Self {
        LlnConfig {
            systems: vec![LlnSystem::Toy, LlnSystem::Ito],
            n: vec![100, 1000, 10_000],
            replications: 20,
            quantiles: 20_000,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentityConfig {
    /// Perturbs the pushforward in the contraction check by this much.
    pub mutation: f64,
}

fn check_schedule(name: &str, n: &[u64]) -> Result<()> {
    if n.is_empty() || n[0] == 0 || n.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::Config(format!(
            "[{name}].n must be a non-empty strictly increasing list of positive integers"
        )));
    }
    Ok(())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Builds every referenced builtin and checks every schedule.
    pub fn validate(&self) -> Result<()> {
        self.toy.build()?;
        self.chain.build()?;
        self.ito.build()?;
        check_schedule("sanov", &self.sanov.n)?;
        check_schedule("decay", &self.decay.n)?;
        check_schedule("lln", &self.lln.n)?;
        if self.lln.replications == 0 || self.lln.quantiles == 0 || self.lln.systems.is_empty() {
            return Err(HarnessError::Config("[lln] needs systems, replications and quantiles".into()));
        }
        if self.simulate.particles == 0 {
            return Err(HarnessError::Config("[simulate].particles must be positive".into()));
        }
        if !self.identities.mutation.is_finite() || !(0.0..1.0).contains(&self.identities.mutation) {
            return Err(HarnessError::Config("[identities].mutation must lie in [0, 1)".into()));
        }
        Ok(())
    }
}
