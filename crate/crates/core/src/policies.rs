//! Pricing policies: projected SGD on the marginal probit likelihood, an
//! unshrunken per-segment baseline, and the oracle.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::demand::{dot, project_ball, RoundEnvironment, TrueParameters};
use crate::error::{Error, Result};
use crate::numerics::{NoiseFamily, FRAC_1_SQRT_2PI, MILLS_SWITCH};
use crate::pricing::{
    marginal_price_for_index, maximize_revenue, oracle_price_conditional, oracle_price_integrated, ConditionalCurve,
    PriceBounds,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Psgd,
    Unshrunken,
    Oracle,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::Psgd, PolicyKind::Unshrunken, PolicyKind::Oracle];

    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Psgd => "psgd",
            PolicyKind::Unshrunken => "unshrunken",
            PolicyKind::Oracle => "oracle",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "psgd" => Ok(PolicyKind::Psgd),
            "unshrunken" => Ok(PolicyKind::Unshrunken),
            "oracle" => Ok(PolicyKind::Oracle),
            other => Err(Error::Config(format!(
                "unknown policy {other:?} (expected psgd, unshrunken or oracle)"
            ))),
        }
    }
}

/// Benchmark the regret is measured against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    /// Knows `beta`, `mu`, `rho` but not the round's preference draw; maximizes
    /// revenue averaged over the prior.
    #[default]
    Bayes,
    /// Also sees the round's preference draw.
    Clairvoyant,
}

/// Oracle price for segment `l`.
pub fn oracle_policy_price(round: &RoundEnvironment, l: usize, mode: OracleMode) -> Result<f64> {
    let params = &round.params;
    match mode {
        OracleMode::Clairvoyant => oracle_price_conditional(round.alpha[l], params, &round.covariates[l]),
        OracleMode::Bayes => oracle_price_integrated(
            &round.curves[l],
            params.beta,
            round.xmu(l),
            params.noise.is_log_concave(),
        ),
    }
}

/// Purchase probability of segment `l` at price `p` as seen by the given benchmark.
pub fn benchmark_probability(round: &RoundEnvironment, l: usize, p: f64, mode: OracleMode) -> f64 {
    let params = &round.params;
    match mode {
        OracleMode::Clairvoyant => {
            crate::demand::purchase_prob_conditional(round.alpha[l], params, &round.covariates[l], p)
        }
        OracleMode::Bayes => round.curves[l].prob(params.beta * p + round.xmu(l)),
    }
}

/// One segment's outcome in a round.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub y: u64,
    pub n: u64,
    pub x: Vec<f64>,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolicyDecision {
    pub prices: Vec<f64>,
    /// Prices raised to zero.
    pub floored: usize,
    /// Prices lowered to the cap.
    pub capped: usize,
}

/// Settings shared by the learning policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    /// Base step size; `1 / (mean arrivals * phi(0))` when absent.
    pub eta0: Option<f64>,
    /// Price posted in the first round.
    pub init_price: f64,
    pub init_b: Option<f64>,
    pub init_m: Option<Vec<f64>>,
    /// Use the environment's noise family instead of the probit working model.
    pub matched_noise: bool,
    /// Half-width of the box for the baseline's per-segment intercepts; `6 tau / epsilon` when absent.
    pub alpha_box: Option<f64>,
    pub oracle: OracleMode,
    pub step_scaling: StepScaling,
}

/// How per-segment steps account for arrival counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepScaling {
    /// Every segment uses `eta_t`.
    #[default]
    Mean,
    /// Segment `l` uses `eta_t * mean_arrivals / n_lt`, so the step is
    /// `eta_0 / (n_lt phi(0) sqrt t)` under the default `eta_0`.
    Segment,
}

impl StepScaling {
    fn factor(self, mean_arrivals: f64, n: u64) -> f64 {
        match self {
            StepScaling::Mean => 1.0,
            StepScaling::Segment => mean_arrivals.max(1.0) / (n.max(1) as f64),
        }
    }
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            eta0: None,
            init_price: 1.0,
            init_b: None,
            init_m: None,
            matched_noise: false,
            alpha_box: None,
            oracle: OracleMode::Bayes,
            step_scaling: StepScaling::Mean,
        }
    }
}

/// Scenario facts a policy may rely on.
#[derive(Debug, Clone)]
pub struct PolicyContext {
    pub ids: Vec<String>,
    pub covariate_dim: usize,
    pub mean_arrivals: f64,
    pub bounds: PriceBounds,
    pub noise: NoiseFamily,
    pub sigma: f64,
    pub tau: f64,
    pub epsilon: f64,
}

impl PolicyContext {
    fn eta0(&self, cfg: &PolicyConfig) -> Result<f64> {
        let eta0 = cfg
            .eta0
            .unwrap_or_else(|| 1.0 / (self.mean_arrivals.max(1.0) * FRAC_1_SQRT_2PI));
        if eta0 > 0.0 && eta0.is_finite() {
            Ok(eta0)
        } else {
            Err(Error::Config(format!("eta0 must be positive, got {eta0}")))
        }
    }
}

fn working_noise(cfg: &PolicyConfig, ctx: &PolicyContext) -> NoiseFamily {
    if cfg.matched_noise {
        ctx.noise
    } else {
        NoiseFamily::Gaussian
    }
}

/// `d/du` of `-y log F(u) - (n - y) log F(-u)`, plus whether a tail expansion was used.
fn loss_slope(noise: NoiseFamily, y: u64, n: u64, u: f64) -> (f64, bool) {
    let d = -(y as f64) * noise.pdf_over_cdf(u) + (n - y) as f64 * noise.pdf_over_cdf(-u);
    (d, u.abs() > MILLS_SWITCH)
}

fn clamp_price(raw: f64, cap: f64, decision: &mut PolicyDecision) -> f64 {
    if raw < 0.0 {
        decision.floored += 1;
        0.0
    } else if raw > cap {
        decision.capped += 1;
        cap
    } else {
        raw
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PolicyDiagnostics {
    pub floored: usize,
    pub capped: usize,
    pub tail_evaluations: usize,
    pub projections: usize,
}

/// Per-segment state of the PSGD policy.
#[derive(Debug, Clone)]
pub struct PsgdState {
    pub ids: Vec<String>,
    pub b: Vec<f64>,
    pub m: Vec<Vec<f64>>,
    /// Completed updates.
    pub t: usize,
    pub b_interval: (f64, f64),
    pub m_radius: f64,
    pub eta0: f64,
    pub step_scaling: StepScaling,
    pub mean_arrivals: f64,
    pub init_price: f64,
    pub cap: f64,
    pub noise: NoiseFamily,
    pub diagnostics: PolicyDiagnostics,
}

pub fn psgd_init(cfg: &PolicyConfig, ctx: &PolicyContext) -> Result<PsgdState> {
    let (lo, hi) = ctx.bounds.b_interval();
    if !(lo <= hi && hi < 0.0) {
        return Err(Error::Config(format!("empty feasible interval [{lo}, {hi}] for b")));
    }
    let radius = ctx.bounds.m_radius();
    let b0 = match cfg.init_b {
        Some(b) if b >= lo && b <= hi => b,
        Some(b) => return Err(Error::Config(format!("initial b = {b} outside [{lo}, {hi}]"))),
        None => 0.5 * (lo + hi),
    };
    let m0 = match &cfg.init_m {
        Some(m) if m.len() != ctx.covariate_dim => {
            return Err(Error::Config(format!(
                "initial m has {} entries, expected {}",
                m.len(),
                ctx.covariate_dim
            )))
        }
        Some(m) if dot(m, m).sqrt() > radius => {
            return Err(Error::Config(format!(
                "initial m lies outside the ball of radius {radius}"
            )))
        }
        Some(m) => m.clone(),
        None => vec![0.0; ctx.covariate_dim],
    };
    if !(cfg.init_price >= 0.0) || !cfg.init_price.is_finite() {
        return Err(Error::Config(format!(
            "initial price must be nonnegative, got {}",
            cfg.init_price
        )));
    }
    let l = ctx.ids.len();
    Ok(PsgdState {
        ids: ctx.ids.clone(),
        b: vec![b0; l],
        m: vec![m0; l],
        t: 0,
        b_interval: (lo, hi),
        m_radius: radius,
        eta0: ctx.eta0(cfg)?,
        step_scaling: cfg.step_scaling,
        mean_arrivals: ctx.mean_arrivals,
        init_price: cfg.init_price,
        cap: ctx.bounds.cap,
        noise: working_noise(cfg, ctx),
        diagnostics: PolicyDiagnostics::default(),
    })
}

/// Loss `-y log q - (n - y) log(1 - q)` with `q = F(b p + x'm)`.
pub fn psgd_loss(noise: NoiseFamily, b: f64, m: &[f64], obs: &Observation) -> f64 {
    let u = b * obs.p + dot(&obs.x, m);
    -(obs.y as f64) * noise.log_cdf(u) - (obs.n - obs.y) as f64 * noise.log_cdf(-u)
}

impl PsgdState {
    pub fn segments(&self) -> usize {
        self.b.len()
    }

    /// Step size for the next update.
    pub fn step_size(&self) -> f64 {
        self.eta0 / ((self.t + 1) as f64).sqrt()
    }

    pub fn gradient(&mut self, l: usize, obs: &Observation) -> (f64, Vec<f64>) {
        let (g, tail) = self.gradient_pure(l, obs);
        if tail {
            self.diagnostics.tail_evaluations += 1;
        }
        g
    }

    fn gradient_pure(&self, l: usize, obs: &Observation) -> ((f64, Vec<f64>), bool) {
        let u = self.b[l] * obs.p + dot(&obs.x, &self.m[l]);
        let (d, tail) = loss_slope(self.noise, obs.y, obs.n, u);
        ((d * obs.p, obs.x.iter().map(|xi| d * xi).collect()), tail)
    }

    /// One projected step per segment with the given step size.
    pub fn update_with(&mut self, observations: &[Observation], eta: f64) -> Result<()> {
        if observations.len() != self.segments() {
            return Err(Error::Shape(format!(
                "{} observations for {} segments",
                observations.len(),
                self.segments()
            )));
        }
        let (lo, hi) = self.b_interval;
        for (l, obs) in observations.iter().enumerate() {
            let (g_b, g_m) = self.gradient(l, obs);
            let eta = eta * self.step_scaling.factor(self.mean_arrivals, obs.n);
            let b = self.b[l] - eta * g_b;
            self.b[l] = b.clamp(lo, hi);
            let mut m: Vec<f64> = self.m[l].iter().zip(&g_m).map(|(mi, gi)| mi - eta * gi).collect();
            let projected = project_ball(&mut m, self.m_radius);
            if projected || self.b[l] != b {
                self.diagnostics.projections += 1;
            }
            self.m[l] = m;
        }
        self.t += 1;
        Ok(())
    }

    pub fn update(&mut self, observations: &[Observation]) -> Result<()> {
        let eta = self.step_size();
        self.update_with(observations, eta)
    }

    /// Price for segment `l` from the current estimates.
    pub fn price(&self, l: usize, x: &[f64]) -> Result<f64> {
        if self.t == 0 {
            return Ok(self.init_price);
        }
        let c = dot(x, &self.m[l]);
        if self.noise.is_gaussian() {
            return Ok(marginal_price_for_index(self.b[l], c)?.price);
        }
        let params = TrueParameters {
            beta: self.b[l],
            mu: Vec::new(),
            rho: 0.0,
            tau: 0.0,
            sigma: 1.0,
            noise: self.noise,
            bounds: Default::default(),
        };
        maximize_revenue(&ConditionalCurve {
            alpha: 0.0,
            index: c,
            params: &params,
        })
    }

    pub fn decide(&mut self, covariates: &[Vec<f64>]) -> Result<PolicyDecision> {
        let mut decision = PolicyDecision::default();
        for (l, x) in covariates.iter().enumerate() {
            let raw = self.price(l, x)?;
            let p = clamp_price(raw, self.cap, &mut decision);
            decision.prices.push(p);
        }
        self.diagnostics.floored += decision.floored;
        self.diagnostics.capped += decision.capped;
        Ok(decision)
    }

    pub fn snapshot(&self) -> PolicySnapshot {
        PolicySnapshot(
            self.ids
                .iter()
                .enumerate()
                .map(|(l, id)| {
                    (
                        id.clone(),
                        SegmentEstimate {
                            b: self.b[l],
                            m: self.m[l].clone(),
                            alpha: None,
                        },
                    )
                })
                .collect(),
        )
    }

    /// Loads estimates from a snapshot; every segment must be present and feasible.
    pub fn restore(&mut self, snapshot: &PolicySnapshot) -> Result<()> {
        let (lo, hi) = self.b_interval;
        for (l, id) in self.ids.iter().enumerate() {
            let est = snapshot
                .0
                .get(id)
                .ok_or_else(|| Error::Config(format!("snapshot has no segment {id:?}")))?;
            if !(est.b >= lo && est.b <= hi) {
                return Err(Error::Config(format!(
                    "segment {id}: b = {} outside [{lo}, {hi}]",
                    est.b
                )));
            }
            if est.m.len() != self.m[l].len() || dot(&est.m, &est.m).sqrt() > self.m_radius * (1.0 + 1e-12) {
                return Err(Error::Config(format!("segment {id}: m infeasible")));
            }
            self.b[l] = est.b;
            self.m[l] = est.m.clone();
        }
        Ok(())
    }
}

pub fn psgd_gradient(state: &PsgdState, l: usize, obs: &Observation) -> (f64, Vec<f64>) {
    state.gradient_pure(l, obs).0
}

pub fn psgd_update(state: &mut PsgdState, observations: &[Observation], eta: f64) -> Result<()> {
    if !(eta > 0.0) {
        return Err(Error::Argument(format!("step size must be positive, got {eta}")));
    }
    state.update_with(observations, eta)
}

pub fn psgd_price(state: &PsgdState, l: usize, x: &[f64]) -> Result<f64> {
    state.price(l, x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentEstimate {
    pub b: f64,
    pub m: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

/// Segment id to estimates, serialized as a JSON object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolicySnapshot(pub BTreeMap<String, SegmentEstimate>);

impl PolicySnapshot {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("policy snapshot", e))
    }
}

/// Baseline that fits a free intercept per segment and shared slopes on the
/// conditional likelihood, ignoring the network.
#[derive(Debug, Clone)]
pub struct UnshrunkenState {
    pub ids: Vec<String>,
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub mu: Vec<f64>,
    pub t: usize,
    pub alpha_box: f64,
    pub beta_range: (f64, f64),
    pub mu_radius: f64,
    pub sigma: f64,
    pub eta0: f64,
    pub step_scaling: StepScaling,
    pub mean_arrivals: f64,
    pub init_price: f64,
    pub cap: f64,
    pub noise: NoiseFamily,
    pub diagnostics: PolicyDiagnostics,
}

pub fn unshrunken_init(cfg: &PolicyConfig, ctx: &PolicyContext) -> Result<UnshrunkenState> {
    let b = &ctx.bounds;
    let alpha_box = cfg.alpha_box.unwrap_or(6.0 * ctx.tau / ctx.epsilon);
    if !(alpha_box >= 0.0) || !alpha_box.is_finite() {
        return Err(Error::Config(format!("alpha box must be nonnegative, got {alpha_box}")));
    }
    Ok(UnshrunkenState {
        ids: ctx.ids.clone(),
        alpha: vec![0.0; ctx.ids.len()],
        beta: -0.5 * (b.beta_min_abs + b.beta_max_abs),
        mu: vec![0.0; ctx.covariate_dim],
        t: 0,
        alpha_box,
        beta_range: (-b.beta_max_abs, -b.beta_min_abs),
        mu_radius: b.mu_radius,
        sigma: ctx.sigma,
        eta0: ctx.eta0(cfg)?,
        step_scaling: cfg.step_scaling,
        mean_arrivals: ctx.mean_arrivals,
        init_price: cfg.init_price,
        cap: b.cap,
        noise: working_noise(cfg, ctx),
        diagnostics: PolicyDiagnostics::default(),
    })
}

impl UnshrunkenState {
    pub fn segments(&self) -> usize {
        self.alpha.len()
    }

    pub fn step_size(&self) -> f64 {
        self.eta0 / ((self.t + 1) as f64).sqrt()
    }

    fn params(&self) -> TrueParameters {
        TrueParameters {
            beta: self.beta,
            mu: self.mu.clone(),
            rho: 0.0,
            tau: 0.0,
            sigma: self.sigma,
            noise: self.noise,
            bounds: Default::default(),
        }
    }

    /// Gradient `(g_alpha per segment, g_beta, g_mu)`; the shared parts are averaged over segments.
    pub fn gradient(&self, observations: &[Observation]) -> (Vec<f64>, f64, Vec<f64>) {
        let l_count = observations.len().max(1) as f64;
        let mut g_alpha = Vec::with_capacity(observations.len());
        let mut g_beta = 0.0;
        let mut g_mu = vec![0.0; self.mu.len()];
        for (l, obs) in observations.iter().enumerate() {
            let u = (self.alpha[l] + self.beta * obs.p + dot(&obs.x, &self.mu)) / self.sigma;
            let (d, _) = loss_slope(self.noise, obs.y, obs.n, u);
            let d = d / self.sigma;
            g_alpha.push(d);
            g_beta += d * obs.p / l_count;
            for (g, xi) in g_mu.iter_mut().zip(&obs.x) {
                *g += d * xi / l_count;
            }
        }
        (g_alpha, g_beta, g_mu)
    }

    pub fn update_with(&mut self, observations: &[Observation], eta: f64) -> Result<()> {
        if observations.len() != self.segments() {
            return Err(Error::Shape(format!(
                "{} observations for {} segments",
                observations.len(),
                self.segments()
            )));
        }
        let (g_alpha, g_beta, g_mu) = self.gradient(observations);
        for ((a, g), obs) in self.alpha.iter_mut().zip(&g_alpha).zip(observations) {
            let eta = eta * self.step_scaling.factor(self.mean_arrivals, obs.n);
            *a = (*a - eta * g).clamp(-self.alpha_box, self.alpha_box);
        }
        self.beta = (self.beta - eta * g_beta).clamp(self.beta_range.0, self.beta_range.1);
        for (m, g) in self.mu.iter_mut().zip(&g_mu) {
            *m -= eta * g;
        }
        if project_ball(&mut self.mu, self.mu_radius) {
            self.diagnostics.projections += 1;
        }
        self.t += 1;
        Ok(())
    }

    pub fn update(&mut self, observations: &[Observation]) -> Result<()> {
        let eta = self.step_size();
        self.update_with(observations, eta)
    }

    pub fn price(&self, l: usize, x: &[f64]) -> Result<f64> {
        if self.t == 0 {
            return Ok(self.init_price);
        }
        oracle_price_conditional(self.alpha[l], &self.params(), x)
    }

    pub fn decide(&mut self, covariates: &[Vec<f64>]) -> Result<PolicyDecision> {
        let mut decision = PolicyDecision::default();
        for (l, x) in covariates.iter().enumerate() {
            let raw = self.price(l, x)?;
            let p = clamp_price(raw, self.cap, &mut decision);
            decision.prices.push(p);
        }
        self.diagnostics.floored += decision.floored;
        self.diagnostics.capped += decision.capped;
        Ok(decision)
    }

    pub fn snapshot(&self) -> PolicySnapshot {
        PolicySnapshot(
            self.ids
                .iter()
                .enumerate()
                .map(|(l, id)| {
                    (
                        id.clone(),
                        SegmentEstimate {
                            b: self.beta,
                            m: self.mu.clone(),
                            alpha: Some(self.alpha[l]),
                        },
                    )
                })
                .collect(),
        )
    }
}

pub fn unshrunken_update(state: &mut UnshrunkenState, observations: &[Observation], eta: f64) -> Result<()> {
    if !(eta > 0.0) {
        return Err(Error::Argument(format!("step size must be positive, got {eta}")));
    }
    state.update_with(observations, eta)
}

pub fn unshrunken_price(state: &UnshrunkenState, l: usize, x: &[f64]) -> Result<f64> {
    state.price(l, x)
}

/// A policy instance owned by one replication.
#[derive(Debug, Clone)]
pub enum Policy {
    Psgd(PsgdState),
    Unshrunken(UnshrunkenState),
    Oracle(OracleMode),
}

impl Policy {
    pub fn new(kind: PolicyKind, cfg: &PolicyConfig, ctx: &PolicyContext) -> Result<Self> {
        Ok(match kind {
            PolicyKind::Psgd => Policy::Psgd(psgd_init(cfg, ctx)?),
            PolicyKind::Unshrunken => Policy::Unshrunken(unshrunken_init(cfg, ctx)?),
            PolicyKind::Oracle => Policy::Oracle(cfg.oracle),
        })
    }

    pub fn kind(&self) -> PolicyKind {
        match self {
            Policy::Psgd(_) => PolicyKind::Psgd,
            Policy::Unshrunken(_) => PolicyKind::Unshrunken,
            Policy::Oracle(_) => PolicyKind::Oracle,
        }
    }

    /// Prices for the round. Learning policies look only at covariates.
    pub fn decide(&mut self, round: &RoundEnvironment) -> Result<PolicyDecision> {
        match self {
            Policy::Psgd(s) => s.decide(&round.covariates),
            Policy::Unshrunken(s) => s.decide(&round.covariates),
            Policy::Oracle(mode) => Ok(PolicyDecision {
                prices: (0..round.segments())
                    .map(|l| oracle_policy_price(round, l, *mode))
                    .collect::<Result<_>>()?,
                ..Default::default()
            }),
        }
    }

    pub fn update(&mut self, observations: &[Observation]) -> Result<()> {
        match self {
            Policy::Psgd(s) => s.update(observations),
            Policy::Unshrunken(s) => s.update(observations),
            Policy::Oracle(_) => Ok(()),
        }
    }

    pub fn snapshot(&self) -> Option<PolicySnapshot> {
        match self {
            Policy::Psgd(s) => Some(s.snapshot()),
            Policy::Unshrunken(s) => Some(s.snapshot()),
            Policy::Oracle(_) => None,
        }
    }

    pub fn diagnostics(&self) -> PolicyDiagnostics {
        match self {
            Policy::Psgd(s) => s.diagnostics.clone(),
            Policy::Unshrunken(s) => s.diagnostics.clone(),
            Policy::Oracle(_) => PolicyDiagnostics::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::{sample_demand, ParameterBounds};
    use crate::numerics::{std_normal_cdf, std_normal_pdf};
    use crate::pricing::price_cap;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn context(l: usize, d: usize) -> PolicyContext {
        PolicyContext {
            ids: (1..=l).map(|i| format!("seg{i}")).collect(),
            covariate_dim: d,
            mean_arrivals: 50.0,
            bounds: price_cap(&ParameterBounds::default(), 1.0, 1.0, 0.05).unwrap(),
            noise: NoiseFamily::Gaussian,
            sigma: 1.0,
            tau: 1.0,
            epsilon: 0.05,
        }
    }

    /// Context whose `b` interval is `[-2, -0.1]`.
    fn unit_context(l: usize, d: usize) -> PolicyContext {
        let mut ctx = context(l, d);
        ctx.bounds.c_v = 1.0;
        ctx.bounds.cap_v = 1.0;
        ctx
    }

    #[test]
    fn init_examples() {
        let ctx = unit_context(3, 2);
        let s = psgd_init(&PolicyConfig::default(), &ctx).unwrap();
        assert_eq!(s.b, vec![-1.05; 3]);
        assert_eq!(s.m, vec![vec![0.0, 0.0]; 3]);

        let cfg = PolicyConfig {
            init_b: Some(-0.5),
            init_m: Some(vec![0.1, 0.2]),
            ..Default::default()
        };
        let s = psgd_init(&cfg, &ctx).unwrap();
        assert_eq!(s.b, vec![-0.5; 3]);
        assert_eq!(s.m[2], vec![0.1, 0.2]);

        let cfg = PolicyConfig {
            init_b: Some(-3.0),
            ..Default::default()
        };
        assert!(matches!(psgd_init(&cfg, &ctx), Err(Error::Config(_))));
        let cfg = PolicyConfig {
            init_m: Some(vec![2.0, 0.0]),
            ..Default::default()
        };
        assert!(psgd_init(&cfg, &ctx).is_err());
    }

    #[test]
    fn gradient_examples() {
        let ctx = unit_context(1, 1);
        let mut s = psgd_init(&PolicyConfig::default(), &ctx).unwrap();
        s.b[0] = -1.0;
        s.m[0] = vec![0.5];
        // u = -0.8 + 0.5 * 0.4 = -0.6; y = n Phi(u) makes both terms cancel
        let n = 1_000_000u64;
        let q = std_normal_cdf(-0.6);
        let obs = Observation {
            y: (n as f64 * q).round() as u64,
            n,
            x: vec![0.4],
            p: 0.8,
        };
        let exact_bracket =
            -(obs.y as f64) * std_normal_pdf(-0.6) / q + (n - obs.y) as f64 * std_normal_pdf(-0.6) / (1.0 - q);
        let (gb, gm) = psgd_gradient(&s, 0, &obs);
        assert_abs_diff_eq!(gb, exact_bracket * 0.8, epsilon = 1e-9);
        assert!(gb.abs() < 1.0 && gm[0].abs() < 1.0);

        // all buy at u = 0: bracket = -n phi(0) / 0.5
        s.m[0] = vec![0.0];
        let obs = Observation {
            y: 10,
            n: 10,
            x: vec![0.3],
            p: 0.0,
        };
        let d = -10.0 * std_normal_pdf(0.0) / 0.5;
        let (gb, gm) = psgd_gradient(&s, 0, &obs);
        assert_abs_diff_eq!(d / 10.0, -0.79788, epsilon = 1e-4);
        assert_eq!(gb, 0.0);
        assert_abs_diff_eq!(gm[0], d * 0.3, epsilon = 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let ctx = unit_context(1, 3);
        let mut s = psgd_init(&PolicyConfig::default(), &ctx).unwrap();
        for _ in 0..1000 {
            s.b[0] = -rng.random_range(0.1..2.0);
            s.m[0] = (0..3).map(|_| rng.random_range(-0.5..0.5)).collect();
            let n = rng.random_range(1..200u64);
            let obs = Observation {
                y: rng.random_range(0..=n),
                n,
                x: (0..3).map(|_| rng.random_range(0.0..0.57)).collect(),
                p: rng.random_range(0.0..4.0),
            };
            let (gb, gm) = psgd_gradient(&s, 0, &obs);
            let h = 1e-5;
            let loss = |b: f64, m: &[f64]| psgd_loss(NoiseFamily::Gaussian, b, m, &obs);
            let fd_b = (loss(s.b[0] + h, &s.m[0]) - loss(s.b[0] - h, &s.m[0])) / (2.0 * h);
            let scale = gb.abs().max(1.0);
            assert!((fd_b - gb).abs() / scale < 1e-6, "{fd_b} {gb}");
            for k in 0..3 {
                let mut up = s.m[0].clone();
                let mut dn = s.m[0].clone();
                up[k] += h;
                dn[k] -= h;
                let fd = (loss(s.b[0], &up) - loss(s.b[0], &dn)) / (2.0 * h);
                assert!((fd - gm[k]).abs() / gm[k].abs().max(1.0) < 1e-6);
            }
        }
    }

    #[test]
    fn gradient_is_unbiased_at_truth() {
        let ctx = unit_context(1, 2);
        let mut s = psgd_init(&PolicyConfig::default(), &ctx).unwrap();
        s.b[0] = -0.7;
        s.m[0] = vec![0.3, -0.2];
        let x = vec![0.5, 0.6];
        let p = 0.9;
        let q = std_normal_cdf(-0.7 * p + dot(&x, &s.m[0]));
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let reps = 100_000;
        let mut sums = [0.0; 3];
        let mut squares = [0.0; 3];
        for _ in 0..reps {
            let y = sample_demand(20, q, &mut rng);
            let (gb, gm) = psgd_gradient(
                &s,
                0,
                &Observation {
                    y,
                    n: 20,
                    x: x.clone(),
                    p,
                },
            );
            for (k, g) in [gb, gm[0], gm[1]].into_iter().enumerate() {
                sums[k] += g;
                squares[k] += g * g;
            }
        }
        for k in 0..3 {
            let mean = sums[k] / reps as f64;
            let var = squares[k] / reps as f64 - mean * mean;
            assert!(mean.abs() < 3.0 * (var / reps as f64).sqrt(), "coordinate {k}");
        }
    }

    #[test]
    fn update_examples() {
        let ctx = unit_context(2, 2);
        let mut s = psgd_init(&PolicyConfig::default(), &ctx).unwrap();
        s.b = vec![-1.0, -1.0];
        s.m = vec![vec![0.1, 0.1], vec![0.1, 0.1]];
        // observations at expected demand for huge n give essentially zero gradient
        let before = s.clone();
        let x = vec![0.0, 0.0];
        let half = Observation {
            y: 5,
            n: 10,
            x: x.clone(),
            p: 0.0,
        };
        psgd_update(&mut s, &[half.clone(), half], 0.1).unwrap();
        assert_eq!(s.b, before.b);
        assert_eq!(s.m, before.m);
        assert_eq!(s.t, 1);

        // big step out of the interval lands on the nearer end
        let all = Observation {
            y: 10,
            n: 10,
            x: vec![0.0, 0.0],
            p: 3.0,
        };
        let none = Observation {
            y: 0,
            n: 10,
            x: vec![0.0, 0.0],
            p: 3.0,
        };
        psgd_update(&mut s, &[all, none], 100.0).unwrap();
        assert_eq!(s.b, vec![-0.1, -2.0]);

        // m pushed to twice the radius keeps its direction
        let r = s.m_radius;
        s.m[0] = vec![0.0, 0.0];
        let obs = Observation {
            y: 0,
            n: 1,
            x: vec![0.6, 0.8],
            p: 0.0,
        };
        let (_, g) = psgd_gradient(&s, 0, &obs);
        let eta = 2.0 * r / (g[0] * g[0] + g[1] * g[1]).sqrt();
        let zero = Observation {
            y: 5,
            n: 10,
            x: vec![0.0, 0.0],
            p: 0.0,
        };
        s.b[1] = -1.0;
        psgd_update(&mut s, &[obs, zero], eta).unwrap();
        assert_abs_diff_eq!(dot(&s.m[0], &s.m[0]).sqrt(), r, epsilon = 1e-12);
        assert_abs_diff_eq!(s.m[0][1] / s.m[0][0], 0.8 / 0.6, epsilon = 1e-12);
        assert!(psgd_update(&mut s, &[], 0.1).is_err());
    }

    #[test]
    fn price_examples() {
        let ctx = unit_context(2, 1);
        let mut s = psgd_init(&PolicyConfig::default(), &ctx).unwrap();
        assert_eq!(psgd_price(&s, 0, &[0.5]).unwrap(), 1.0);
        s.t = 1;
        s.b[0] = -1.0;
        s.m[0] = vec![0.0];
        assert_abs_diff_eq!(psgd_price(&s, 0, &[0.5]).unwrap(), 0.7518, epsilon = 1e-3);
        s.b[1] = -1.0;
        s.m[1] = vec![0.0];
        assert_eq!(psgd_price(&s, 0, &[0.2]).unwrap(), psgd_price(&s, 1, &[0.2]).unwrap());
    }

    #[test]
    fn prices_stay_below_cap() {
        let ctx = context(4, 2);
        let mut s = psgd_init(&PolicyConfig::default(), &ctx).unwrap();
        s.t = 1;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let (lo, hi) = s.b_interval;
        for _ in 0..500 {
            for l in 0..4 {
                s.b[l] = rng.random_range(lo..=hi);
                let mut m = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                project_ball(&mut m, s.m_radius);
                s.m[l] = m;
            }
            let xs: Vec<Vec<f64>> = (0..4)
                .map(|_| vec![rng.random_range(0.0..0.7), rng.random_range(0.0..0.7)])
                .collect();
            let d = s.decide(&xs).unwrap();
            assert_eq!(d.capped, 0);
            assert_eq!(d.floored, 0);
            assert!(d.prices.iter().all(|p| *p >= 0.0 && *p <= ctx.bounds.cap));
        }
    }

    #[test]
    fn unshrunken_projection_and_zero_gradient() {
        let ctx = context(3, 2);
        let mut s = unshrunken_init(&PolicyConfig::default(), &ctx).unwrap();
        assert_abs_diff_eq!(s.alpha_box, 120.0, epsilon = 1e-12);
        let before = s.clone();
        let x = vec![0.0, 0.0];
        let half = Observation {
            y: 5,
            n: 10,
            x: x.clone(),
            p: 0.0,
        };
        unshrunken_update(&mut s, &[half.clone(), half.clone(), half], 0.5).unwrap();
        assert_eq!(s.alpha, before.alpha);
        assert_eq!(s.beta, before.beta);

        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..300 {
            let obs: Vec<Observation> = (0..3)
                .map(|_| {
                    let n = rng.random_range(1..100);
                    Observation {
                        y: rng.random_range(0..=n),
                        n,
                        x: vec![rng.random_range(0.0..0.7), rng.random_range(0.0..0.7)],
                        p: rng.random_range(0.0..5.0),
                    }
                })
                .collect();
            unshrunken_update(&mut s, &obs, 5.0).unwrap();
            assert!(dot(&s.mu, &s.mu).sqrt() <= ctx.bounds.mu_radius + 1e-12);
            assert!(s.beta >= -2.0 && s.beta <= -0.1);
            assert!(s.alpha.iter().all(|a| a.abs() <= s.alpha_box));
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let ctx = context(2, 2);
        let mut s = psgd_init(&PolicyConfig::default(), &ctx).unwrap();
        s.b = vec![-0.5, -0.3];
        s.m = vec![vec![0.1, 0.0], vec![0.0, -0.2]];
        let json = s.snapshot().to_json();
        let parsed = PolicySnapshot::from_json(&json).unwrap();
        assert_eq!(parsed.0["seg2"].m, vec![0.0, -0.2]);
        let mut fresh = psgd_init(&PolicyConfig::default(), &ctx).unwrap();
        fresh.restore(&parsed).unwrap();
        assert_eq!(fresh.b, s.b);
        assert_eq!(fresh.m, s.m);
        let mut bad = parsed.clone();
        bad.0.get_mut("seg1").unwrap().b = 3.0;
        assert!(fresh.restore(&bad).is_err());
        assert!(PolicySnapshot::from_json("[1,2]").is_err());
    }

    #[test]
    fn policy_kind_parsing() {
        assert_eq!("PSGD".parse::<PolicyKind>().unwrap(), PolicyKind::Psgd);
        assert_eq!(" oracle".parse::<PolicyKind>().unwrap(), PolicyKind::Oracle);
        assert!("greedy".parse::<PolicyKind>().is_err());
        for k in PolicyKind::ALL {
            assert_eq!(k.as_str().parse::<PolicyKind>().unwrap(), k);
        }
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(b in -1.4f64..-0.08, m0 in -0.7f64..0.7, m1 in -0.7f64..0.7) {
            let ctx = context(1, 2);
            let mut s = psgd_init(&PolicyConfig::default(), &ctx).unwrap();
            let (lo, hi) = s.b_interval;
            let mut m = vec![m0, m1];
            project_ball(&mut m, s.m_radius);
            s.b[0] = b.clamp(lo, hi);
            s.m[0] = m.clone();
            let snapshot = s.clone();
            // zero-gradient observation leaves a feasible state untouched
            psgd_update(&mut s, &[Observation { y: 0, n: 0, x: vec![0.3, 0.3], p: 1.0 }], 1.0).unwrap();
            prop_assert_eq!(&s.b, &snapshot.b);
            prop_assert_eq!(&s.m, &snapshot.m);
            let mut again = m.clone();
            prop_assert!(!project_ball(&mut again, s.m_radius) || again == m);
        }
    }
}
