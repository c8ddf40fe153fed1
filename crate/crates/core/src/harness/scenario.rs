//! Scenario configuration, presets and resolution into a runnable environment.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::data::{bundled, DEMOGRAPHIC_COLUMNS, ECONOMIC_COLUMNS};
use crate::demand::{allocate_arrivals, DriftExponent, DriftSpec, DriftTarget, EnvironmentSpec, ParameterBounds};
use crate::error::{Error, Result};
use crate::network::{
    build_rbf_network, read_network_csv, validate_sar, NetworkStructure, NodeFeatures, DEFAULT_EPSILON,
};
use crate::numerics::NoiseFamily;
use crate::policies::{OracleMode, PolicyConfig, PolicyContext, PolicyKind, StepScaling};
use crate::pricing::price_cap;

/// Where the segment network comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkSource {
    /// RBF network on `segments` i.i.d. standard normal feature vectors.
    GaussianFeatures {
        dim: usize,
        seed: u64,
    },
    /// RBF network on the columns of a feature CSV (`bundled:<name>` for shipped data).
    FeatureCsv {
        path: String,
        #[serde(default)]
        columns: Option<Vec<String>>,
        #[serde(default = "yes")]
        standardize: bool,
    },
    /// Dense matrix file as written by `network build`.
    MatrixCsv {
        path: String,
    },
    Explicit {
        weights: Vec<Vec<f64>>,
    },
}

fn yes() -> bool {
    true
}

/// Either a fixed `rho` or a fraction of the largest admissible value `(1 - epsilon) / omega_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhoSetting {
    Value(f64),
    Fraction { fraction_of_bound: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSetting {
    pub exponent: DriftExponent,
    #[serde(default = "default_magnitude")]
    pub magnitude: f64,
}

fn default_magnitude() -> f64 {
    0.1
}

impl Default for DriftSetting {
    fn default() -> Self {
        DriftSetting {
            exponent: DriftExponent::Infinite,
            magnitude: 0.1,
        }
    }
}

impl DriftSetting {
    pub fn finite(b: f64) -> Self {
        DriftSetting {
            exponent: DriftExponent::Finite(b),
            magnitude: 0.1,
        }
    }

    fn spec(&self, target: DriftTarget) -> DriftSpec {
        DriftSpec::new(self.exponent, self.magnitude, target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    Least,
    Most,
}

/// Per-segment weights read from a CSV: the product of the named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSource {
    pub path: String,
    pub columns: Vec<String>,
}

/// How many customers each segment sees per round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "plan", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArrivalPlan {
    Uniform {
        count: u64,
    },
    PerSegment {
        counts: Vec<u64>,
    },
    /// `total` split in proportion to the weights.
    Weighted {
        total: u64,
        weights: WeightSource,
    },
    /// `low_segments` segments chosen by connectivity get `low_count` each;
    /// the rest share the remainder by weight (equally without weights).
    Sparse {
        total: u64,
        low_segments: usize,
        low_count: u64,
        selection: Connectivity,
        #[serde(default)]
        weights: Option<WeightSource>,
    },
}

/// Segments whose regret is counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegretScope {
    #[default]
    All,
    /// Only the segments picked by a sparse arrival plan.
    LowLead,
}

/// A complete experiment description. JSON config files use these field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// Number of segments `L`.
    pub segments: usize,
    pub horizon: usize,
    pub network: NetworkSource,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default)]
    pub threshold: f64,
    pub rho: RhoSetting,
    #[serde(default)]
    pub rho_drift: DriftSetting,
    #[serde(default = "one")]
    pub tau: f64,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub noise: NoiseFamily,
    #[serde(default)]
    pub beta_drift: DriftSetting,
    #[serde(default)]
    pub mu_drift: DriftSetting,
    pub beta_init: f64,
    pub mu_init: Vec<f64>,
    #[serde(default)]
    pub bounds: ParameterBounds,
    pub arrivals: ArrivalPlan,
    /// Share of arrivals sent to the first of two alternating segment groups.
    #[serde(default)]
    pub imbalance: Option<f64>,
    #[serde(default = "all_policies")]
    pub policies: Vec<PolicyKind>,
    pub seeds: usize,
    #[serde(default)]
    pub eta0: Option<f64>,
    /// Multiplies the default `eta_0 = 1 / (mean arrivals * phi(0))`; ignored when `eta0` is set.
    #[serde(default = "one")]
    pub eta_scale: f64,
    #[serde(default)]
    pub step_scaling: StepScaling,
    #[serde(default = "one")]
    pub init_price: f64,
    #[serde(default)]
    pub oracle: OracleMode,
    #[serde(default)]
    pub matched_noise: bool,
    #[serde(default)]
    pub alpha_box: Option<f64>,
    #[serde(default)]
    pub freeze_covariates: bool,
    #[serde(default)]
    pub regret_scope: RegretScope,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: Vec<usize>,
    #[serde(default = "default_window")]
    pub slope_window: f64,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_width() -> f64 {
    1.0
}
fn one() -> f64 {
    1.0
}
fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn all_policies() -> Vec<PolicyKind> {
    PolicyKind::ALL.to_vec()
}
fn default_window() -> f64 {
    0.5
}

pub const TABLE_CHECKPOINTS: [usize; 4] = [100, 500, 1000, 5000];
pub const CURVE_CHECKPOINTS: [usize; 6] = [100, 500, 1000, 5000, 10000, 20000];
pub const TABLE_SEEDS: usize = 32;
pub const CURVE_SEEDS: usize = 8;

fn default_checkpoints() -> Vec<usize> {
    TABLE_CHECKPOINTS.to_vec()
}

/// A validated scenario ready for the runner.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub env: Arc<EnvironmentSpec>,
    pub policy_config: PolicyConfig,
    pub policy_context: PolicyContext,
    /// Segments counted in the regret, in index order.
    pub regret_segments: Vec<usize>,
    /// Checkpoints not exceeding the horizon.
    pub checkpoints: Vec<usize>,
}

impl Scenario {
    pub fn name(&self) -> &str {
        &self.config.name
    }

    pub fn network(&self) -> &Arc<NetworkStructure> {
        &self.env.network
    }
}

fn read_text(path: &str, base: Option<&Path>) -> Result<(String, String)> {
    if path.starts_with(super::data::BUNDLED_PREFIX) {
        return bundled(path)
            .map(|text| (text.to_owned(), path.to_owned()))
            .ok_or_else(|| Error::Config(format!("no bundled file {path:?}")));
    }
    let p = match base {
        Some(dir) if Path::new(path).is_relative() => dir.join(path),
        _ => PathBuf::from(path),
    };
    let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
    Ok((text, p.display().to_string()))
}

fn gaussian_features(segments: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..segments)
        .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect()
}

fn segment_names(segments: usize) -> Vec<String> {
    (1..=segments).map(|i| format!("seg{i:02}")).collect()
}

fn load_weights(src: &WeightSource, ids: &[String], base: Option<&Path>) -> Result<Vec<f64>> {
    let (text, ctx) = read_text(&src.path, base)?;
    let table = NodeFeatures::from_reader(text.as_bytes(), Some(&src.columns), &ctx)?;
    ids.iter()
        .map(|id| {
            let row = table
                .ids
                .iter()
                .position(|r| r == id)
                .ok_or_else(|| Error::Config(format!("{ctx}: no weights for segment {id:?}")))?;
            let w: f64 = table.rows[row].iter().product();
            if w > 0.0 && w.is_finite() {
                Ok(w)
            } else {
                Err(Error::Config(format!(
                    "{ctx}: weight for {id:?} must be positive, got {w}"
                )))
            }
        })
        .collect()
}

/// Applies an imbalance share `share` to alternating groups (even and odd
/// segment indices), keeping within-group proportions.
pub fn imbalance_weights(base: &[f64], share: f64) -> Result<Vec<f64>> {
    if !(share > 0.0 && share < 1.0) {
        return Err(Error::Config(format!("imbalance must lie in (0, 1), got {share}")));
    }
    if base.len() < 2 {
        return Err(Error::Config("imbalance needs at least two segments".into()));
    }
    let group_sum = |parity: usize| -> f64 { base.iter().skip(parity).step_by(2).sum() };
    let (g1, g2) = (group_sum(0), group_sum(1));
    Ok(base
        .iter()
        .enumerate()
        .map(|(i, w)| {
            if i % 2 == 0 {
                share * w / g1
            } else {
                (1.0 - share) * w / g2
            }
        })
        .collect())
}

/// Indices of the `k` segments with the smallest (or largest) row sums; ties go to the lower index.
pub fn select_by_connectivity(network: &NetworkStructure, k: usize, which: Connectivity) -> Vec<usize> {
    let sums = network.row_sums();
    let mut order: Vec<usize> = (0..sums.len()).collect();
    order.sort_by(|&a, &b| {
        let c = sums[a].total_cmp(&sums[b]);
        let c = if which == Connectivity::Most { c.reverse() } else { c };
        c.then(a.cmp(&b))
    });
    let mut picked: Vec<usize> = order.into_iter().take(k).collect();
    picked.sort_unstable();
    picked
}

impl ScenarioConfig {
    fn base(&self) -> Option<&Path> {
        self.base_dir.as_deref()
    }

    pub fn build_network(&self) -> Result<NetworkStructure> {
        let net = match &self.network {
            NetworkSource::GaussianFeatures { dim, seed } => {
                let f = gaussian_features(self.segments, *dim, *seed);
                let net = build_rbf_network(&f, self.width, self.threshold)?;
                NetworkStructure::with_ids(net.weights().clone(), segment_names(self.segments))?
            }
            NetworkSource::FeatureCsv {
                path,
                columns,
                standardize,
            } => {
                let (text, ctx) = read_text(path, self.base())?;
                let mut f = NodeFeatures::from_reader(text.as_bytes(), columns.as_deref(), &ctx)?;
                if *standardize {
                    f = f.standardized();
                }
                f.into_network(self.width, self.threshold)?
            }
            NetworkSource::MatrixCsv { path } => {
                let (text, ctx) = read_text(path, self.base())?;
                let net = read_network_csv(text.as_bytes(), &ctx)?;
                NetworkStructure::with_ids(net.weights().clone(), segment_names(net.len()))?
            }
            NetworkSource::Explicit { weights } => {
                let l = weights.len();
                if weights.iter().any(|r| r.len() != l) {
                    return Err(Error::Config("explicit weights must form a square matrix".into()));
                }
                let flat: Vec<f64> = weights.iter().flatten().copied().collect();
                let w = nalgebra::DMatrix::from_row_slice(l, l, &flat);
                NetworkStructure::with_ids(w, segment_names(l))?
            }
        };
        if net.len() != self.segments {
            return Err(Error::Config(format!(
                "scenario {} declares {} segments but its network has {}",
                self.name,
                self.segments,
                net.len()
            )));
        }
        Ok(net)
    }

    pub fn resolve_rho(&self, network: &NetworkStructure) -> Result<f64> {
        match self.rho {
            RhoSetting::Value(r) => Ok(r),
            RhoSetting::Fraction { fraction_of_bound } => {
                if !(0.0..=1.0).contains(&fraction_of_bound) {
                    return Err(Error::Config(format!(
                        "fraction_of_bound must lie in [0, 1], got {fraction_of_bound}"
                    )));
                }
                Ok(fraction_of_bound * network.rho_upper_bound(self.epsilon))
            }
        }
    }

    fn arrivals(&self, network: &NetworkStructure) -> Result<(Vec<u64>, Vec<usize>)> {
        let l = network.len();
        let ids = network.ids();
        let base = self.base();
        let mut low = Vec::new();
        let counts = match &self.arrivals {
            ArrivalPlan::Uniform { count } => match self.imbalance {
                None => vec![*count; l],
                Some(share) => allocate_arrivals(count * l as u64, &imbalance_weights(&vec![1.0; l], share)?)?,
            },
            ArrivalPlan::PerSegment { counts } => {
                if self.imbalance.is_some() {
                    return Err(Error::Config(
                        "imbalance cannot be combined with per-segment counts".into(),
                    ));
                }
                if counts.len() != l {
                    return Err(Error::Config(format!(
                        "{} arrival counts for {l} segments",
                        counts.len()
                    )));
                }
                counts.clone()
            }
            ArrivalPlan::Weighted { total, weights } => {
                let mut w = load_weights(weights, ids, base)?;
                if let Some(share) = self.imbalance {
                    w = imbalance_weights(&w, share)?;
                }
                allocate_arrivals(*total, &w)?
            }
            ArrivalPlan::Sparse {
                total,
                low_segments,
                low_count,
                selection,
                weights,
            } => {
                if self.imbalance.is_some() {
                    return Err(Error::Config("imbalance cannot be combined with a sparse plan".into()));
                }
                let reserved = *low_segments as u64 * low_count;
                if *low_segments >= l || reserved > *total {
                    return Err(Error::Config(format!(
                        "sparse plan reserves {low_segments} x {low_count} of {total} arrivals over {l} segments"
                    )));
                }
                low = select_by_connectivity(network, *low_segments, *selection);
                let all_w = match weights {
                    Some(src) => load_weights(src, ids, base)?,
                    None => vec![1.0; l],
                };
                let rest: Vec<usize> = (0..l).filter(|i| !low.contains(i)).collect();
                let rest_w: Vec<f64> = rest.iter().map(|&i| all_w[i]).collect();
                let rest_n = allocate_arrivals(total - reserved, &rest_w)?;
                let mut counts = vec![*low_count; l];
                for (i, n) in rest.iter().zip(rest_n) {
                    counts[*i] = n;
                }
                counts
            }
        };
        Ok((counts, low))
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("scenario {}: {m}", self.name)));
        if self.name.trim().is_empty() {
            return bad("name must not be empty".into());
        }
        if self.horizon == 0 {
            return bad("horizon must be positive".into());
        }
        if self.seeds == 0 {
            return bad("at least one seed is required".into());
        }
        if self.policies.is_empty() {
            return bad("no policies selected".into());
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be nonnegative, got {}", self.tau));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if !(self.eta_scale > 0.0 && self.eta_scale.is_finite()) {
            return bad(format!("eta_scale must be positive, got {}", self.eta_scale));
        }
        if !(self.init_price > 0.0 && self.init_price.is_finite()) {
            return bad(format!("init_price must be positive, got {}", self.init_price));
        }
        if !(self.slope_window > 0.0 && self.slope_window <= 1.0) {
            return bad(format!("slope_window must lie in (0, 1], got {}", self.slope_window));
        }
        for d in [&self.beta_drift, &self.mu_drift, &self.rho_drift] {
            if !(d.magnitude >= 0.0 && d.magnitude.is_finite()) {
                return bad(format!("drift magnitude must be nonnegative, got {}", d.magnitude));
            }
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) || self.checkpoints.first() == Some(&0) {
            return bad("checkpoints must be positive and strictly increasing".into());
        }
        Ok(())
    }

    /// Builds the network, validates every setting and prepares the runner inputs.
    pub fn resolve(&self) -> Result<Scenario> {
        self.check()?;
        let network = Arc::new(self.build_network()?);
        let rho = self.resolve_rho(&network)?;
        validate_sar(network.clone(), rho, self.tau, self.epsilon)?;
        let (arrivals, low) = self.arrivals(&network)?;
        let env = EnvironmentSpec {
            network: network.clone(),
            epsilon: self.epsilon,
            tau: self.tau,
            sigma: self.sigma,
            noise: self.noise,
            bounds: self.bounds,
            beta_init: self.beta_init,
            mu_init: self.mu_init.clone(),
            rho_init: rho,
            beta_drift: self.beta_drift.spec(DriftTarget::Beta),
            mu_drift: self.mu_drift.spec(DriftTarget::Mu),
            rho_drift: self.rho_drift.spec(DriftTarget::Rho),
            arrivals,
            freeze_covariates: self.freeze_covariates,
        };
        env.validate()?;
        let l = network.len();
        let mean_arrivals = env.arrivals.iter().sum::<u64>() as f64 / l as f64;
        let policy_context = PolicyContext {
            ids: network.ids().to_vec(),
            covariate_dim: env.covariate_dim(),
            mean_arrivals,
            bounds: price_cap(&self.bounds, self.tau, self.sigma, self.epsilon)?,
            noise: self.noise,
            sigma: self.sigma,
            tau: self.tau,
            epsilon: self.epsilon,
        };
        let default_eta0 = self.eta_scale / (mean_arrivals.max(1.0) * crate::numerics::FRAC_1_SQRT_2PI);
        let policy_config = PolicyConfig {
            eta0: Some(self.eta0.unwrap_or(default_eta0)),
            step_scaling: self.step_scaling,
            init_price: self.init_price,
            matched_noise: self.matched_noise,
            alpha_box: self.alpha_box,
            oracle: self.oracle,
            ..PolicyConfig::default()
        };
        let regret_segments = match self.regret_scope {
            RegretScope::All => (0..l).collect(),
            RegretScope::LowLead if low.is_empty() => {
                return Err(Error::Config(
                    "regret_scope low_lead needs a sparse arrival plan".into(),
                ));
            }
            RegretScope::LowLead => low,
        };
        let checkpoints = self
            .checkpoints
            .iter()
            .copied()
            .filter(|&c| c <= self.horizon)
            .collect();
        Ok(Scenario {
            config: self.clone(),
            env: Arc::new(env),
            policy_config,
            policy_context,
            regret_segments,
            checkpoints,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(context, e))
    }
}

/// Resolves a preset name or a JSON config file path.
pub fn load_scenario(source: &str) -> Result<Scenario> {
    load_scenario_config(source)?.resolve()
}

pub fn load_scenario_config(source: &str) -> Result<ScenarioConfig> {
    if let Some(cfg) = preset(source) {
        return Ok(cfg);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(Error::Config(format!(
            "{source:?} is neither a preset nor an existing file (presets: setup1-b1, setup2-rho0.3, ...; run `simulate --list` for all)"
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = ScenarioConfig::from_json(&text, source)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf);
    Ok(cfg)
}

/// Expands a comma-separated list of presets, preset families (`setup4`) and config files.
pub fn expand_sources(list: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let family: Vec<String> = preset_names()
            .into_iter()
            .filter(|n| n.strip_prefix(item).is_some_and(|rest| rest.starts_with('-')))
            .collect();
        if preset(item).is_none() && !family.is_empty() {
            out.extend(family);
        } else {
            out.push(item.to_owned());
        }
    }
    if out.is_empty() {
        return Err(Error::Config("no scenario given".into()));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Presets

const SETUP1_BETA: f64 = -0.4;
const SETUP1_MU: [f64; 2] = [0.1, 0.15];
const SETUP3_TOTALS: [u64; 5] = [1000, 2500, 5000, 10000, 20000];
const IMBALANCES: [f64; 3] = [0.7, 0.8, 0.9];
const NETWORK_SEED: u64 = 2024;
/// `rho` on the census networks as a fraction of `(1 - epsilon) / omega_max`.
const CENSUS_RHO_FRACTION: f64 = 0.9;
/// The unscaled default step overshoots once drift is slow; a quarter of it tracks well.
const PRESET_ETA_SCALE: f64 = 0.25;

fn drift_setting(b: Option<f64>) -> DriftSetting {
    b.map_or_else(DriftSetting::default, DriftSetting::finite)
}

fn base_config(name: String, segments: usize, network: NetworkSource, arrivals: ArrivalPlan) -> ScenarioConfig {
    ScenarioConfig {
        name,
        segments,
        horizon: 5000,
        network,
        width: 1.0,
        threshold: 0.0,
        rho: RhoSetting::Value(0.5),
        rho_drift: DriftSetting::default(),
        tau: 1.0,
        sigma: 1.0,
        epsilon: DEFAULT_EPSILON,
        noise: NoiseFamily::Gaussian,
        beta_drift: DriftSetting::default(),
        mu_drift: DriftSetting::default(),
        beta_init: SETUP1_BETA,
        mu_init: SETUP1_MU.to_vec(),
        bounds: ParameterBounds::default(),
        arrivals,
        imbalance: None,
        policies: all_policies(),
        seeds: TABLE_SEEDS,
        eta0: None,
        eta_scale: PRESET_ETA_SCALE,
        step_scaling: StepScaling::Segment,
        init_price: 1.0,
        oracle: OracleMode::Bayes,
        matched_noise: false,
        alpha_box: None,
        freeze_covariates: false,
        regret_scope: RegretScope::All,
        checkpoints: TABLE_CHECKPOINTS.to_vec(),
        slope_window: 0.5,
        base_dir: None,
    }
}

fn with_drift(mut cfg: ScenarioConfig, b: Option<f64>) -> ScenarioConfig {
    cfg.beta_drift = drift_setting(b);
    cfg.mu_drift = drift_setting(b);
    cfg
}

fn curve(mut cfg: ScenarioConfig, horizon: usize) -> ScenarioConfig {
    cfg.horizon = horizon;
    cfg.seeds = CURVE_SEEDS;
    cfg.checkpoints = CURVE_CHECKPOINTS.iter().copied().filter(|&c| c <= horizon).collect();
    cfg
}

fn setup1(name: String, b: Option<f64>, noise: NoiseFamily) -> ScenarioConfig {
    let mut counts = vec![50; 5];
    counts.extend([200; 5]);
    let mut cfg = base_config(
        name,
        10,
        NetworkSource::GaussianFeatures {
            dim: 10,
            seed: NETWORK_SEED,
        },
        ArrivalPlan::PerSegment { counts },
    );
    cfg.noise = noise;
    curve(with_drift(cfg, b), 20000)
}

fn setup2(rho: f64) -> ScenarioConfig {
    let mut cfg = base_config(
        format!("setup2-rho{rho}"),
        4,
        NetworkSource::Explicit {
            weights: SETUP2_WEIGHTS.iter().map(|r| r.to_vec()).collect(),
        },
        ArrivalPlan::Uniform { count: 50 },
    );
    cfg.rho = RhoSetting::Value(rho);
    let mut cfg = curve(with_drift(cfg, Some(1.0)), 20000);
    cfg.seeds = SETUP2_SEEDS;
    cfg
}

/// Network of the `setup2` presets: a path of four segments.
const SETUP2_WEIGHTS: [[f64; 4]; 4] = [
    [0.0, 1.0, 0.0, 0.0],
    [1.0, 0.0, 1.0, 0.0],
    [0.0, 1.0, 0.0, 1.0],
    [0.0, 0.0, 1.0, 0.0],
];
const SETUP2_SEEDS: usize = 24;

fn census_network(columns: Option<Vec<String>>) -> NetworkSource {
    NetworkSource::FeatureCsv {
        path: "bundled:census_features.csv".into(),
        columns,
        standardize: true,
    }
}

fn leads() -> WeightSource {
    WeightSource {
        path: "bundled:census_leads.csv".into(),
        columns: vec!["population".into(), "median_income".into()],
    }
}

fn census(name: String, columns: Option<Vec<String>>, total: u64) -> ScenarioConfig {
    let mut cfg = base_config(
        name,
        super::data::CENSUS_SEGMENTS,
        census_network(columns),
        ArrivalPlan::Weighted {
            total,
            weights: leads(),
        },
    );
    cfg.width = 2.0;
    cfg.threshold = 0.05;
    cfg.rho = RhoSetting::Fraction {
        fraction_of_bound: CENSUS_RHO_FRACTION,
    };
    with_drift(cfg, Some(1.0))
}

fn owned(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| (*c).to_owned()).collect()
}

/// Table scenarios over imbalance levels and arrival totals for one feature set.
fn imbalance_family(out: &mut Vec<ScenarioConfig>, prefix: &str, columns: Option<Vec<String>>) {
    for total in SETUP3_TOTALS {
        for share in IMBALANCES.iter().map(|s| Some(*s)).chain([Some(0.5)]) {
            let label = match share {
                Some(s) if s != 0.5 => format!("imb{s}"),
                _ => "bal".to_owned(),
            };
            let mut cfg = census(format!("{prefix}-{label}-n{total}"), columns.clone(), total);
            cfg.imbalance = share;
            out.push(cfg);
        }
    }
}

fn all_presets() -> Vec<ScenarioConfig> {
    let drifts = [(Some(0.5), "b0.5"), (Some(1.0), "b1"), (None, "binf")];
    let mut out = Vec::new();
    for (b, label) in drifts {
        out.push(setup1(format!("setup1-{label}"), b, NoiseFamily::Gaussian));
    }
    for rho in [0.1, 0.3, 0.5] {
        out.push(setup2(rho));
    }
    for (b, label) in drifts {
        for total in SETUP3_TOTALS {
            let cfg = census(format!("setup3-{label}-n{total}"), None, total);
            out.push(curve(with_drift(cfg, b), 5000));
        }
    }
    imbalance_family(&mut out, "setup4", None);
    imbalance_family(&mut out, "setup5", Some(owned(&DEMOGRAPHIC_COLUMNS)));
    imbalance_family(&mut out, "setup6", Some(owned(&ECONOMIC_COLUMNS)));
    for (which, label) in [(Connectivity::Least, "least"), (Connectivity::Most, "most")] {
        let mut cfg = census(format!("setup7-{label}"), None, 1000);
        cfg.arrivals = ArrivalPlan::Sparse {
            total: 1000,
            low_segments: 10,
            low_count: 5,
            selection: which,
            weights: Some(leads()),
        };
        cfg.regret_scope = RegretScope::LowLead;
        out.push(curve(cfg, 5000));
    }
    for (b, label) in drifts {
        out.push(setup1(format!("setup8-{label}"), b, NoiseFamily::Laplace));
        out.push(setup1(format!("setup9-{label}"), b, NoiseFamily::student_t(4.0)));
    }
    out
}

pub fn preset_names() -> Vec<String> {
    all_presets().into_iter().map(|c| c.name).collect()
}

pub fn preset(name: &str) -> Option<ScenarioConfig> {
    all_presets().into_iter().find(|c| c.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn setup1_golden_config() {
        let c = preset("setup1-b1").unwrap();
        assert_eq!(c.segments, 10);
        assert_eq!(c.horizon, 20000);
        assert_eq!(
            c.arrivals,
            ArrivalPlan::PerSegment {
                counts: vec![50, 50, 50, 50, 50, 200, 200, 200, 200, 200]
            }
        );
        assert_eq!(c.rho, RhoSetting::Value(0.5));
        assert_eq!((c.tau, c.sigma), (1.0, 1.0));
        assert_eq!(c.beta_init, -0.4);
        assert_eq!(c.mu_init, vec![0.1, 0.15]);
        assert_eq!(c.beta_drift, DriftSetting::finite(1.0));
        assert_eq!(c.mu_drift, DriftSetting::finite(1.0));
        assert_eq!(c.beta_drift.magnitude, 0.1);
        assert_eq!(c.rho_drift.exponent, DriftExponent::Infinite);
        assert_eq!(c.width, 1.0);
        assert_eq!(
            c.network,
            NetworkSource::GaussianFeatures {
                dim: 10,
                seed: NETWORK_SEED
            }
        );
        assert_eq!(c.noise, NoiseFamily::Gaussian);
        assert_eq!(preset("setup1-b0.5").unwrap().beta_drift, DriftSetting::finite(0.5));
        assert_eq!(
            preset("setup1-binf").unwrap().mu_drift.exponent,
            DriftExponent::Infinite
        );
        assert_eq!(c.checkpoints, CURVE_CHECKPOINTS.to_vec());
        assert_eq!((c.eta_scale, c.step_scaling), (0.25, StepScaling::Segment));
        let s = c.resolve().unwrap();
        assert_eq!(s.env.arrivals, vec![50, 50, 50, 50, 50, 200, 200, 200, 200, 200]);
        let eta0 = s.policy_config.eta0.unwrap();
        assert!((eta0 - 0.25 / (125.0 * crate::numerics::FRAC_1_SQRT_2PI)).abs() < 1e-12);
        assert_eq!(s.env.rho_init, 0.5);
    }

    #[test]
    fn setup2_golden_config() {
        for rho in [0.1, 0.3, 0.5] {
            let c = preset(&format!("setup2-rho{rho}")).unwrap();
            assert_eq!(c.segments, 4);
            assert_eq!(c.arrivals, ArrivalPlan::Uniform { count: 50 });
            assert_eq!(c.beta_drift, DriftSetting::finite(1.0));
            assert_eq!(c.rho, RhoSetting::Value(rho));
            assert!(c.seeds >= 20);
            let s = c.resolve().unwrap();
            assert_eq!(s.env.arrivals, vec![50; 4]);
        }
    }

    #[test]
    fn census_presets_follow_recipe() {
        let c = preset("setup3-b1-n2500").unwrap();
        assert_eq!((c.segments, c.width, c.threshold), (48, 2.0, 0.05));
        let s = c.resolve().unwrap();
        assert_eq!(s.env.arrivals.iter().sum::<u64>(), 2500);
        let dem = preset("setup5-imb0.8-n1000").unwrap();
        assert!(matches!(&dem.network, NetworkSource::FeatureCsv { columns: Some(c), .. } if c.len() == 8));
        let econ = preset("setup6-imb0.8-n1000").unwrap();
        assert!(matches!(&econ.network, NetworkSource::FeatureCsv { columns: Some(c), .. } if c.len() == 7));
        assert_eq!(econ.checkpoints, TABLE_CHECKPOINTS.to_vec());
        assert_eq!(econ.seeds, TABLE_SEEDS);
    }

    #[test]
    fn imbalance_splits_totals() {
        for share in IMBALANCES {
            let s = preset(&format!("setup4-imb{share}-n1000")).unwrap().resolve().unwrap();
            let a = &s.env.arrivals;
            let g1: u64 = a.iter().step_by(2).sum();
            assert_eq!(a.iter().sum::<u64>(), 1000);
            assert!((g1 as f64 - share * 1000.0).abs() <= 24.0, "{g1} vs {share}");
        }
    }

    #[test]
    fn sparse_plan_reserves_low_segments() {
        for name in ["setup7-least", "setup7-most"] {
            let s = preset(name).unwrap().resolve().unwrap();
            assert_eq!(s.regret_segments.len(), 10);
            assert!(s.regret_segments.iter().all(|&l| s.env.arrivals[l] == 5));
            assert_eq!(s.env.arrivals.iter().sum::<u64>(), 1000);
        }
        let least = preset("setup7-least").unwrap().resolve().unwrap();
        let most = preset("setup7-most").unwrap().resolve().unwrap();
        let sums = least.network().row_sums();
        let max_least = least.regret_segments.iter().map(|&l| sums[l]).fold(f64::MIN, f64::max);
        let min_most = most.regret_segments.iter().map(|&l| sums[l]).fold(f64::MAX, f64::min);
        assert!(max_least <= min_most);
    }

    #[test]
    fn every_preset_resolves() {
        for name in preset_names() {
            preset(&name)
                .unwrap()
                .resolve()
                .unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn preset_names_are_unique() {
        let mut names = preset_names();
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), n);
    }

    #[test]
    fn infeasible_rho_is_rejected() {
        let mut c = preset("setup2-rho0.1").unwrap();
        c.network = NetworkSource::Explicit {
            weights: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        };
        c.segments = 2;
        c.rho = RhoSetting::Value(2.0);
        assert!(matches!(c.resolve(), Err(Error::Validation(_))));
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let c = preset("setup4-imb0.8-n1000").unwrap();
        let back = ScenarioConfig::from_json(&c.to_json(), "test").unwrap();
        assert_eq!(back, c);

        let minimal = r#"{
            "name": "tiny", "segments": 2, "horizon": 10, "seeds": 1,
            "network": {"kind": "explicit", "weights": [[0, 0.5], [0.5, 0]]},
            "rho": {"fraction_of_bound": 0.5},
            "beta_init": -0.5, "mu_init": [0.1],
            "arrivals": {"plan": "uniform", "count": 5},
            "beta_drift": {"exponent": "inf"}
        }"#;
        let c = ScenarioConfig::from_json(minimal, "minimal").unwrap();
        assert_eq!(c.policies, PolicyKind::ALL.to_vec());
        assert_eq!(c.epsilon, DEFAULT_EPSILON);
        let s = c.resolve().unwrap();
        assert!((s.env.rho_init - 0.5 * 0.95 / 0.5).abs() < 1e-12);

        let typo = minimal.replace("\"horizon\"", "\"horizn\"");
        assert!(ScenarioConfig::from_json(&typo, "typo").is_err());
    }

    #[test]
    fn unknown_source_is_config_error() {
        let e = load_scenario("setup42-nothing").unwrap_err();
        assert_eq!(e.kind(), crate::error::ErrorKind::Config);
    }

    #[test]
    fn families_expand() {
        let v = expand_sources("setup2, setup1-b1").unwrap();
        assert_eq!(v, vec!["setup2-rho0.1", "setup2-rho0.3", "setup2-rho0.5", "setup1-b1"]);
    }

    #[test]
    fn imbalance_weights_keep_within_group_ratios() {
        let w = imbalance_weights(&[1.0, 2.0, 3.0, 4.0], 0.8).unwrap();
        assert!((w[0] + w[2] - 0.8).abs() < 1e-12);
        assert!((w[2] / w[0] - 3.0).abs() < 1e-12);
        assert!((w[3] / w[1] - 2.0).abs() < 1e-12);
        assert!(imbalance_weights(&[1.0, 1.0], 1.0).is_err());
    }
}
