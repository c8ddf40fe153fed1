//! Ground-truth demand environment.
//!
//! Utility of a customer in segment `l` at round `t` is
//! `alpha_lt + beta_t p + x' mu_t + sigma Z`; a sale happens when it is
//! positive. `alpha_t` is redrawn every round from the SAR prior, and
//! `beta`, `mu`, `rho` drift with step sizes `magnitude * t^-b`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp1, StandardNormal};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::network::{validate_sar, NetworkStructure, SarPrior};
use crate::numerics::{hermite_rule, log_std_normal_cdf, std_normal_cdf, std_normal_pdf, NoiseFamily};

/// Declared ranges of the drifting parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterBounds {
    /// Lower bound `c_beta` on `|beta|`.
    pub beta_min_abs: f64,
    /// Upper bound `C_beta` on `|beta|`.
    pub beta_max_abs: f64,
    /// Radius `C_mu` of the ball containing `mu`.
    pub mu_radius: f64,
}

impl Default for ParameterBounds {
    fn default() -> Self {
        ParameterBounds {
            beta_min_abs: 0.1,
            beta_max_abs: 2.0,
            mu_radius: 1.0,
        }
    }
}

impl ParameterBounds {
    pub fn validate(&self) -> Result<()> {
        let ok = self.beta_min_abs > 0.0
            && self.beta_max_abs >= self.beta_min_abs
            && self.beta_max_abs.is_finite()
            && self.mu_radius > 0.0
            && self.mu_radius.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("inconsistent parameter bounds {self:?}")))
        }
    }

    pub fn clamp_beta(&self, beta: f64) -> f64 {
        beta.clamp(-self.beta_max_abs, -self.beta_min_abs)
    }
}

/// Radial projection onto the Euclidean ball of the given radius.
///
/// Points within a few ulps of the sphere count as inside, so projecting twice
/// changes nothing.
pub fn project_ball(v: &mut [f64], radius: f64) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > radius * (1.0 + 4.0 * f64::EPSILON) {
        let s = radius / norm;
        v.iter_mut().for_each(|x| *x *= s);
        true
    } else {
        false
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrueParameters {
    pub beta: f64,
    pub mu: Vec<f64>,
    pub rho: f64,
    pub tau: f64,
    pub sigma: f64,
    pub noise: NoiseFamily,
    pub bounds: ParameterBounds,
}

impl TrueParameters {
    pub fn gaussian(beta: f64, mu: Vec<f64>, sigma: f64) -> Self {
        TrueParameters {
            beta,
            mu,
            rho: 0.0,
            tau: 1.0,
            sigma,
            noise: NoiseFamily::Gaussian,
            bounds: ParameterBounds::default(),
        }
    }
}

/// Drift exponent `b`; `Infinite` means the parameter never moves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftExponent {
    Finite(f64),
    Infinite,
}

impl fmt::Display for DriftExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriftExponent::Finite(b) => write!(f, "{b}"),
            DriftExponent::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for DriftExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DriftExponent::Finite(b) => s.serialize_f64(*b),
            DriftExponent::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for DriftExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ExpVisitor;
        impl Visitor<'_> for ExpVisitor {
            type Value = DriftExponent;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                if v > 0.0 {
                    Ok(if v.is_infinite() {
                        DriftExponent::Infinite
                    } else {
                        DriftExponent::Finite(v)
                    })
                } else {
                    Err(E::custom(format!("drift exponent must be positive, got {v}")))
                }
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                self.visit_f64(v as f64)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                self.visit_f64(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                match v.trim().to_ascii_lowercase().as_str() {
                    "inf" | "infinity" => Ok(DriftExponent::Infinite),
                    other => other
                        .parse::<f64>()
                        .map_err(|_| E::custom(format!("bad drift exponent {v:?}")))
                        .and_then(|b| self.visit_f64(b)),
                }
            }
        }
        d.deserialize_any(ExpVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftTarget {
    Beta,
    Mu,
    Rho,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec {
    pub exponent: DriftExponent,
    #[serde(default = "default_magnitude")]
    pub magnitude: f64,
    pub applies_to: DriftTarget,
}

fn default_magnitude() -> f64 {
    0.1
}

impl DriftSpec {
    pub fn new(exponent: DriftExponent, magnitude: f64, applies_to: DriftTarget) -> Self {
        DriftSpec {
            exponent,
            magnitude,
            applies_to,
        }
    }

    pub fn fixed(applies_to: DriftTarget) -> Self {
        Self::new(DriftExponent::Infinite, 0.1, applies_to)
    }

    /// Norm of the step applied after round `t`.
    pub fn step_size(&self, t: usize) -> f64 {
        match self.exponent {
            DriftExponent::Infinite => 0.0,
            DriftExponent::Finite(b) => self.magnitude * (t as f64).powf(-b),
        }
    }
}

/// `current + magnitude * t^-b * Z / |Z|`, `Z` standard normal.
///
/// Draws nothing from `rng` when the exponent is infinite.
pub fn drift_step<R: Rng + ?Sized>(current: &[f64], t: usize, spec: &DriftSpec, rng: &mut R) -> Vec<f64> {
    assert!(t >= 1, "drift rounds are 1-based");
    if matches!(spec.exponent, DriftExponent::Infinite) {
        return current.to_vec();
    }
    let size = spec.step_size(t);
    let z: Vec<f64> = (0..current.len()).map(|_| rng.sample(StandardNormal)).collect();
    let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return current.to_vec();
    }
    current.iter().zip(&z).map(|(c, zi)| c + size * zi / norm).collect()
}

/// Purchase probability given the segment's realized preference.
pub fn purchase_prob_conditional(alpha: f64, params: &TrueParameters, x: &[f64], p: f64) -> f64 {
    let u = (alpha + params.beta * p + dot(x, &params.mu)) / params.sigma;
    params.noise.cdf(u)
}

/// Working-model probability `Phi(b p + x'm)` of the reparameterized model.
pub fn purchase_prob_marginal(b: f64, m: &[f64], x: &[f64], p: f64) -> f64 {
    std_normal_cdf(b * p + dot(x, m))
}

pub fn sample_demand<R: Rng + ?Sized>(n: u64, q: f64, rng: &mut R) -> u64 {
    let q = q.clamp(0.0, 1.0);
    if n == 0 || q == 0.0 {
        return 0;
    }
    if q == 1.0 {
        return n;
    }
    Binomial::new(n, q).expect("probability in [0, 1]").sample(rng)
}

#[inline]
pub fn expected_revenue(n: u64, p: f64, q: f64) -> f64 {
    n as f64 * p * q
}

/// Splits `total` across segments proportionally to `weights`, largest remainder first.
pub fn allocate_arrivals(total: u64, weights: &[f64]) -> Result<Vec<u64>> {
    if weights.is_empty() {
        return Ok(Vec::new());
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::Config("arrival weights must be finite and nonnegative".into()));
    }
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return Err(Error::Config("arrival weights sum to zero".into()));
    }
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<u64> = exact.iter().map(|e| e.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take((total - assigned) as usize) {
        counts[i] += 1;
    }
    Ok(counts)
}

const TABLE_HALF_WIDTH: f64 = 40.0;
const TABLE_STEP: f64 = 0.02;

/// Purchase probability with the preference integrated out, as a function of
/// `z = beta p + x' mu`: `G(z) = P(alpha + z + sigma Z > 0)` with
/// `alpha ~ N(0, s^2)`, `s^2 = V^2 - sigma^2`.
#[derive(Debug, Clone)]
pub enum MarginalCurve {
    /// Gaussian noise: `G(z) = Phi(z / V)`.
    Gaussian { total_sd: f64 },
    /// Laplace noise: closed-form Gaussian-Laplace convolution.
    Laplace { prior_sd: f64, sigma: f64 },
    /// Any family by 64-point Gauss-Hermite quadrature over `alpha`.
    Quadrature {
        prior_sd: f64,
        sigma: f64,
        noise: NoiseFamily,
    },
    /// Quadrature values on a grid with cubic Hermite interpolation.
    Tabulated(Arc<CurveTable>),
}

impl MarginalCurve {
    pub fn new(noise: NoiseFamily, sigma: f64, total_sd: f64) -> Self {
        let prior_sd = (total_sd * total_sd - sigma * sigma).max(0.0).sqrt();
        match noise {
            NoiseFamily::Gaussian => MarginalCurve::Gaussian { total_sd },
            NoiseFamily::Laplace => MarginalCurve::Laplace { prior_sd, sigma },
            NoiseFamily::StudentT { .. } => MarginalCurve::Quadrature { prior_sd, sigma, noise },
        }
    }

    /// Like [`MarginalCurve::new`] but tabulates quadrature families once per
    /// `(noise, sigma, V)` for the whole process.
    pub fn cached(noise: NoiseFamily, sigma: f64, total_sd: f64) -> Self {
        match Self::new(noise, sigma, total_sd) {
            MarginalCurve::Quadrature { prior_sd, sigma, noise } => {
                MarginalCurve::Tabulated(CurveTable::shared(noise, sigma, prior_sd))
            }
            other => other,
        }
    }

    /// `(G(z), G'(z))`.
    pub fn eval(&self, z: f64) -> (f64, f64) {
        match self {
            MarginalCurve::Gaussian { total_sd } => {
                let u = z / total_sd;
                (std_normal_cdf(u), std_normal_pdf(u) / total_sd)
            }
            MarginalCurve::Laplace { prior_sd, sigma } => laplace_convolution(z, *prior_sd, *sigma),
            MarginalCurve::Quadrature { prior_sd, sigma, noise } => quadrature_curve(z, *prior_sd, *sigma, *noise),
            MarginalCurve::Tabulated(t) => t.eval(z),
        }
    }

    pub fn prob(&self, z: f64) -> f64 {
        self.eval(z).0
    }
}

fn laplace_convolution(z: f64, s: f64, sigma: f64) -> (f64, f64) {
    if s == 0.0 {
        let fam = NoiseFamily::Laplace;
        return (fam.cdf(z / sigma), fam.pdf(z / sigma) / sigma);
    }
    let k = s * s / (2.0 * sigma * sigma);
    let r = s / sigma;
    let lower = 0.5 * (k - z / sigma + log_std_normal_cdf(z / s - r)).exp();
    let upper = 0.5 * (k + z / sigma + log_std_normal_cdf(-z / s - r)).exp();
    let g = (std_normal_cdf(z / s) - lower + upper).clamp(0.0, 1.0);
    (g, (lower + upper) / sigma)
}

fn quadrature_curve(z: f64, s: f64, sigma: f64, noise: NoiseFamily) -> (f64, f64) {
    let (nodes, weights) = hermite_rule();
    let mut g = 0.0;
    let mut dg = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        let u = (z + s * x) / sigma;
        g += w * noise.cdf(u);
        dg += w * noise.pdf(u);
    }
    (g, dg / sigma)
}

#[derive(Debug)]
pub struct CurveTable {
    prior_sd: f64,
    sigma: f64,
    noise: NoiseFamily,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

type TableKey = (u64, u64, u64);

impl CurveTable {
    pub fn build(noise: NoiseFamily, sigma: f64, prior_sd: f64) -> Self {
        let n = (2.0 * TABLE_HALF_WIDTH / TABLE_STEP).round() as usize + 1;
        let (values, slopes) = (0..n)
            .map(|i| quadrature_curve(-TABLE_HALF_WIDTH + i as f64 * TABLE_STEP, prior_sd, sigma, noise))
            .unzip();
        CurveTable {
            prior_sd,
            sigma,
            noise,
            values,
            slopes,
        }
    }

    fn shared(noise: NoiseFamily, sigma: f64, prior_sd: f64) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<CurveTable>>>> = OnceLock::new();
        let dof = match noise {
            NoiseFamily::StudentT { dof } => dof,
            _ => 0.0,
        };
        let key = (dof.to_bits(), sigma.to_bits(), prior_sd.to_bits());
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().expect("curve cache poisoned").get(&key) {
            return t.clone();
        }
        let table = Arc::new(CurveTable::build(noise, sigma, prior_sd));
        cache
            .lock()
            .expect("curve cache poisoned")
            .entry(key)
            .or_insert(table)
            .clone()
    }

    pub fn eval(&self, z: f64) -> (f64, f64) {
        let pos = (z + TABLE_HALF_WIDTH) / TABLE_STEP;
        let last = self.values.len() - 1;
        if !(pos >= 0.0) || pos >= last as f64 {
            return quadrature_curve(z, self.prior_sd, self.sigma, self.noise);
        }
        let i = pos.floor() as usize;
        let t = pos - i as f64;
        let h = TABLE_STEP;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let g =
            (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
        let dg = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        (g, dg)
    }
}

/// Immutable description of a ground-truth environment.
#[derive(Debug, Clone)]
pub struct EnvironmentSpec {
    pub network: Arc<NetworkStructure>,
    pub epsilon: f64,
    pub tau: f64,
    pub sigma: f64,
    pub noise: NoiseFamily,
    pub bounds: ParameterBounds,
    pub beta_init: f64,
    pub mu_init: Vec<f64>,
    pub rho_init: f64,
    pub beta_drift: DriftSpec,
    pub mu_drift: DriftSpec,
    pub rho_drift: DriftSpec,
    pub arrivals: Vec<u64>,
    pub freeze_covariates: bool,
}

impl EnvironmentSpec {
    pub fn covariate_dim(&self) -> usize {
        self.mu_init.len()
    }

    pub fn segments(&self) -> usize {
        self.network.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        self.noise.validate()?;
        if !(self.sigma > 0.0) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.arrivals.len() != self.network.len() {
            return Err(Error::Config(format!(
                "{} arrival counts for {} segments",
                self.arrivals.len(),
                self.network.len()
            )));
        }
        let abs_beta = -self.beta_init;
        if !(abs_beta >= self.bounds.beta_min_abs && abs_beta <= self.bounds.beta_max_abs) {
            return Err(Error::Config(format!(
                "initial beta {} outside [-{}, -{}]",
                self.beta_init, self.bounds.beta_max_abs, self.bounds.beta_min_abs
            )));
        }
        let mu_norm = dot(&self.mu_init, &self.mu_init).sqrt();
        if mu_norm > self.bounds.mu_radius {
            return Err(Error::Config(format!(
                "initial |mu| = {mu_norm} exceeds C_mu = {}",
                self.bounds.mu_radius
            )));
        }
        validate_sar(self.network.clone(), self.rho_init, self.tau, self.epsilon)?;
        Ok(())
    }
}

/// Running parameter-variation totals.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DriftTotals {
    pub beta: f64,
    pub mu: f64,
    pub rho: f64,
    /// `sum_t sqrt(t) (|d beta_t| + |d mu_t|)`, the drift term of the √T regret bound.
    pub sqrt_weighted: f64,
    pub rho_clamps: usize,
}

/// Everything a round exposes: the truth for the oracle and regret ledger,
/// covariates and arrival counts for the policies.
#[derive(Debug, Clone)]
pub struct RoundEnvironment {
    pub t: usize,
    pub alpha: Vec<f64>,
    pub covariates: Vec<Vec<f64>>,
    pub arrivals: Arc<Vec<u64>>,
    pub params: TrueParameters,
    /// `V_l` at this round's `rho`.
    pub marginal_sd: Arc<Vec<f64>>,
    pub curves: Arc<Vec<MarginalCurve>>,
}

impl RoundEnvironment {
    pub fn segments(&self) -> usize {
        self.alpha.len()
    }

    pub fn xmu(&self, l: usize) -> f64 {
        dot(&self.covariates[l], &self.params.mu)
    }
}

pub struct EnvironmentState {
    spec: Arc<EnvironmentSpec>,
    t: usize,
    beta: f64,
    mu: Vec<f64>,
    rho: f64,
    prior: SarPrior,
    marginal_sd: Arc<Vec<f64>>,
    curves: Arc<Vec<MarginalCurve>>,
    arrivals: Arc<Vec<u64>>,
    frozen: Option<Vec<Vec<f64>>>,
    totals: DriftTotals,
}

fn curves_for(spec: &EnvironmentSpec, sd: &[f64], cached: bool) -> Vec<MarginalCurve> {
    sd.iter()
        .map(|&v| {
            if cached {
                MarginalCurve::cached(spec.noise, spec.sigma, v)
            } else {
                MarginalCurve::new(spec.noise, spec.sigma, v)
            }
        })
        .collect()
}

impl EnvironmentState {
    pub fn new(spec: Arc<EnvironmentSpec>) -> Result<Self> {
        spec.validate()?;
        let prior = validate_sar(spec.network.clone(), spec.rho_init, spec.tau, spec.epsilon)?;
        let sd = prior.marginal_variances(spec.sigma)?;
        let curves = curves_for(&spec, &sd, true);
        Ok(EnvironmentState {
            t: 0,
            beta: spec.beta_init,
            mu: spec.mu_init.clone(),
            rho: spec.rho_init,
            prior,
            marginal_sd: Arc::new(sd),
            curves: Arc::new(curves),
            arrivals: Arc::new(spec.arrivals.clone()),
            frozen: None,
            totals: DriftTotals::default(),
            spec,
        })
    }

    pub fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    pub fn round(&self) -> usize {
        self.t
    }

    pub fn drift_totals(&self) -> &DriftTotals {
        &self.totals
    }

    pub fn prior(&self) -> &SarPrior {
        &self.prior
    }

    fn params(&self) -> TrueParameters {
        TrueParameters {
            beta: self.beta,
            mu: self.mu.clone(),
            rho: self.rho,
            tau: self.spec.tau,
            sigma: self.spec.sigma,
            noise: self.spec.noise,
            bounds: self.spec.bounds,
        }
    }

    fn apply_drift<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let step = self.t - 1;
        let spec = self.spec.clone();
        let bounds = spec.bounds;

        let beta = bounds.clamp_beta(drift_step(&[self.beta], step, &spec.beta_drift, rng)[0]);
        let mut mu = drift_step(&self.mu, step, &spec.mu_drift, rng);
        project_ball(&mut mu, bounds.mu_radius);
        let raw_rho = drift_step(&[self.rho], step, &spec.rho_drift, rng)[0];
        let rho_hi = spec.network.rho_upper_bound(spec.epsilon);
        let rho = raw_rho.clamp(0.0, rho_hi);
        if rho != raw_rho {
            self.totals.rho_clamps += 1;
        }

        let d_beta = (beta - self.beta).abs();
        let d_mu = mu
            .iter()
            .zip(&self.mu)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        self.totals.beta += d_beta;
        self.totals.mu += d_mu;
        self.totals.sqrt_weighted += (step as f64).sqrt() * (d_beta + d_mu);
        self.beta = beta;
        self.mu = mu;

        if rho != self.rho {
            match validate_sar(spec.network.clone(), rho, spec.tau, spec.epsilon) {
                Ok(prior) => {
                    self.totals.rho += (rho - self.rho).abs();
                    self.rho = rho;
                    let sd = prior.marginal_variances(spec.sigma)?;
                    self.curves = Arc::new(curves_for(&spec, &sd, false));
                    self.marginal_sd = Arc::new(sd);
                    self.prior = prior;
                }
                Err(why) => {
                    log::warn!(
                        "round {}: rho step to {rho} rejected ({why}); holding {}",
                        self.t,
                        self.rho
                    );
                }
            }
        }
        Ok(())
    }

    fn draw_covariates<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<f64>> {
        let d = self.spec.covariate_dim();
        (0..self.spec.segments())
            .map(|_| {
                let mut x: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(Exp1)).collect();
                let norm = dot(&x, &x).sqrt();
                let scale = norm.max(1.0);
                x.iter_mut().for_each(|v| *v /= scale);
                x
            })
            .collect()
    }

    /// Moves to the next round: drift (from round 2 on), a fresh SAR draw of
    /// `alpha`, and covariates.
    pub fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<RoundEnvironment> {
        self.t += 1;
        if self.t > 1 {
            self.apply_drift(rng)?;
        }
        let alpha = self.prior.sample_alpha(rng);
        let covariates = if self.spec.freeze_covariates {
            if self.frozen.is_none() {
                self.frozen = Some(self.draw_covariates(rng));
            }
            self.frozen.clone().expect("frozen covariates")
        } else {
            self.draw_covariates(rng)
        };
        Ok(RoundEnvironment {
            t: self.t,
            alpha,
            covariates,
            arrivals: self.arrivals.clone(),
            params: self.params(),
            marginal_sd: self.marginal_sd.clone(),
            curves: self.curves.clone(),
        })
    }
}

pub fn advance_environment<R: Rng + ?Sized>(state: &mut EnvironmentState, rng: &mut R) -> Result<RoundEnvironment> {
    state.advance(rng)
}
