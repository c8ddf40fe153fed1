//! Revenue-maximizing prices.
//!
//! Under the probit working model `q = Phi(b p + c)` with `c = x'm`, the
//! first-order condition `p = -Phi(bp + c) / (b phi(bp + c))` has the explicit
//! solution `p = (v + c) / |b|` with `v` the root of `v - R(v) = -c`, where
//! `R` is the Mills ratio. General noise families fall back to a bracketed
//! solve of the same condition.

use serde::Serialize;

use crate::demand::{dot, MarginalCurve, ParameterBounds, TrueParameters};
use crate::error::{Error, Result};
use crate::numerics::{find_root_monotone, find_root_monotone_newton, mills_ratio, FRAC_1_SQRT_2PI};

/// Residual allowed in the pricing first-order condition.
pub const FIXED_POINT_TOL: f64 = 1e-8;
/// Tolerance used when inverting the virtual valuation.
pub const INVERSE_TOL: f64 = 1e-10;

const MAX_DOUBLINGS: usize = 100;
const REVENUE_GRID: usize = 256;

/// `v - Phi(-v) / phi(v)`.
pub fn virtual_valuation(v: f64) -> f64 {
    v - mills_ratio(v)
}

/// Derivative `2 - v R(v)` of the virtual valuation; always at least 1.
pub fn virtual_valuation_derivative(v: f64) -> f64 {
    2.0 - v * mills_ratio(v)
}

pub fn virtual_valuation_inverse(y: f64, tol: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::Domain(format!(
            "virtual valuation target must be finite, got {y}"
        )));
    }
    // phi(v) < v, and phi falls off like -exp(v^2 / 2) below zero
    let mut lo = (y - 1.0).max(-1.0);
    while virtual_valuation(lo) >= y {
        lo *= 2.0;
    }
    // R(v) <= R(0) < 2 above zero
    let mut hi = y.max(0.0) + 2.0;
    let mut tries = 0;
    while virtual_valuation(hi) < y {
        tries += 1;
        if tries > MAX_DOUBLINGS {
            return Err(Error::Numeric(format!(
                "could not bracket inverse virtual valuation of {y}"
            )));
        }
        hi = y.max(0.0) + 2f64.powi(tries as i32 + 1);
    }
    find_root_monotone_newton(
        |v| (virtual_valuation(v) - y, virtual_valuation_derivative(v)),
        lo,
        hi,
        tol,
    )
}

/// A price together with whether it had to be raised to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceQuote {
    pub price: f64,
    pub floored: bool,
}

/// Optimal price for `Phi(b p + c)` given the index `c = x'm`.
pub fn marginal_price_for_index(b: f64, c: f64) -> Result<PriceQuote> {
    if !(b < 0.0) || !b.is_finite() {
        return Err(Error::Domain(format!("price sensitivity must be negative, got {b}")));
    }
    if !c.is_finite() {
        return Err(Error::Domain(format!("utility index must be finite, got {c}")));
    }
    let v = virtual_valuation_inverse(-c, INVERSE_TOL * b.abs().min(1.0))?;
    let raw = -(v + c) / b;
    Ok(if raw < 0.0 {
        PriceQuote {
            price: 0.0,
            floored: true,
        }
    } else {
        PriceQuote {
            price: raw,
            floored: false,
        }
    })
}

pub fn optimal_price_marginal(b: f64, m: &[f64], x: &[f64]) -> Result<f64> {
    if m.len() != x.len() {
        return Err(Error::Shape(format!(
            "coefficient length {} vs covariate length {}",
            m.len(),
            x.len()
        )));
    }
    Ok(marginal_price_for_index(b, dot(x, m))?.price)
}

/// `p + Phi(bp + c) / (b phi(bp + c))`; zero at the optimum.
pub fn marginal_fixed_point_residual(b: f64, c: f64, p: f64) -> f64 {
    p - mills_ratio(-(b * p + c)) / b.abs()
}

/// A purchase-probability curve in price, for revenue maximization.
pub trait DemandCurve {
    fn prob(&self, p: f64) -> f64;
    /// `q(p) / -q'(p)`.
    fn inverse_hazard(&self, p: f64) -> f64;
    /// Whether `p - inverse_hazard(p)` has a single sign change.
    fn unimodal(&self) -> bool;

    fn revenue(&self, p: f64) -> f64 {
        p * self.prob(p)
    }
}

/// `F((alpha + beta p + c) / sigma)` for the scenario's noise family.
#[derive(Debug, Clone, Copy)]
pub struct ConditionalCurve<'a> {
    pub alpha: f64,
    pub index: f64,
    pub params: &'a TrueParameters,
}

impl ConditionalCurve<'_> {
    fn u(&self, p: f64) -> f64 {
        (self.alpha + self.params.beta * p + self.index) / self.params.sigma
    }
}

impl DemandCurve for ConditionalCurve<'_> {
    fn prob(&self, p: f64) -> f64 {
        self.params.noise.cdf(self.u(p))
    }

    fn inverse_hazard(&self, p: f64) -> f64 {
        self.params.sigma / self.params.beta.abs() * self.params.noise.cdf_over_pdf(self.u(p))
    }

    fn unimodal(&self) -> bool {
        self.params.noise.is_log_concave()
    }
}

/// `G(beta p + c)` with the preference integrated out.
#[derive(Debug, Clone, Copy)]
pub struct IntegratedCurve<'a> {
    pub curve: &'a MarginalCurve,
    pub beta: f64,
    pub index: f64,
    pub log_concave: bool,
}

impl DemandCurve for IntegratedCurve<'_> {
    fn prob(&self, p: f64) -> f64 {
        self.curve.prob(self.beta * p + self.index)
    }

    fn inverse_hazard(&self, p: f64) -> f64 {
        let z = self.beta * p + self.index;
        let (g, dg) = self.curve.eval(z);
        if dg > 0.0 && g > 0.0 {
            g / (self.beta.abs() * dg)
        } else if z > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }

    fn unimodal(&self) -> bool {
        self.log_concave
    }
}

/// Maximizes `p q(p)` over `p >= 0`.
///
/// Unimodal curves are solved through the first-order condition on a doubled
/// bracket. Otherwise a revenue grid over ten times that bracket picks the
/// best basin, which is then refined locally.
pub fn maximize_revenue<C: DemandCurve>(curve: &C) -> Result<f64> {
    let foc = |p: f64| p - curve.inverse_hazard(p);
    let mut hi = 1.0;
    let mut tries = 0;
    while !(foc(hi) > 0.0) {
        tries += 1;
        if tries > MAX_DOUBLINGS {
            return Err(Error::Numeric(format!(
                "first-order condition has no sign change on [0, {hi}] (value {})",
                foc(hi)
            )));
        }
        hi *= 2.0;
    }
    if foc(0.0) >= 0.0 {
        return Ok(0.0);
    }
    if curve.unimodal() {
        return find_root_monotone(foc, 0.0, hi, FIXED_POINT_TOL * 1e-2);
    }

    let p_max = 10.0 * hi;
    let step = p_max / REVENUE_GRID as f64;
    let best = (0..=REVENUE_GRID)
        .map(|i| i as f64 * step)
        .max_by(|a, b| curve.revenue(*a).total_cmp(&curve.revenue(*b)))
        .expect("nonempty grid");
    let lo = (best - step).max(0.0);
    let up = best + step;
    let (f_lo, f_up) = (foc(lo), foc(up));
    if f_lo < 0.0 && f_up > 0.0 {
        find_root_monotone(foc, lo, up, FIXED_POINT_TOL * 1e-2)
    } else {
        Ok(golden_section_max(|p| curve.revenue(p), lo, up))
    }
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 * (1.0 + b.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Price maximizing revenue when the segment preference `alpha` is known.
pub fn oracle_price_conditional(alpha: f64, params: &TrueParameters, x: &[f64]) -> Result<f64> {
    if !(params.beta < 0.0) {
        return Err(Error::Domain(format!(
            "price sensitivity must be negative, got {}",
            params.beta
        )));
    }
    if x.len() != params.mu.len() {
        return Err(Error::Shape(format!(
            "covariate length {} vs mu length {}",
            x.len(),
            params.mu.len()
        )));
    }
    let index = dot(x, &params.mu);
    if params.noise.is_gaussian() {
        let s = params.sigma;
        return Ok(marginal_price_for_index(params.beta / s, (alpha + index) / s)?.price);
    }
    maximize_revenue(&ConditionalCurve { alpha, index, params })
}

/// Price maximizing revenue averaged over the preference prior.
pub fn oracle_price_integrated(curve: &MarginalCurve, beta: f64, index: f64, log_concave: bool) -> Result<f64> {
    if !(beta < 0.0) {
        return Err(Error::Domain(format!("price sensitivity must be negative, got {beta}")));
    }
    if let MarginalCurve::Gaussian { total_sd } = curve {
        return Ok(marginal_price_for_index(beta / total_sd, index / total_sd)?.price);
    }
    maximize_revenue(&IntegratedCurve {
        curve,
        beta,
        index,
        log_concave,
    })
}

/// Variance band and price caps implied by the parameter bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriceBounds {
    pub beta_min_abs: f64,
    pub beta_max_abs: f64,
    pub mu_radius: f64,
    pub c_v: f64,
    pub cap_v: f64,
    /// `C_V (C_mu / c_V - phi(0) / 2) / c_beta`, the closed-form cap as usually quoted.
    pub stated_cap: f64,
    /// Least upper bound `C_V R(v) / c_beta` with `v` the inverse virtual valuation of `-C_mu / c_V`.
    pub cap: f64,
}

impl PriceBounds {
    /// Interval containing every attainable `b = beta / V`.
    pub fn b_interval(&self) -> (f64, f64) {
        (-self.beta_max_abs / self.c_v, -self.beta_min_abs / self.cap_v)
    }

    /// Radius of the ball for the normalized covariate coefficients `m`.
    pub fn m_radius(&self) -> f64 {
        self.mu_radius / self.c_v
    }
}

pub fn price_cap(bounds: &ParameterBounds, tau: f64, sigma: f64, epsilon: f64) -> Result<PriceBounds> {
    bounds.validate()?;
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::Config(format!("tau must be nonnegative, got {tau}")));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Config(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    let c_v = (tau * tau + sigma * sigma).sqrt();
    let cap_v = (tau * tau / (epsilon * epsilon) + sigma * sigma).sqrt();
    let index_max = bounds.mu_radius / c_v;
    let stated_cap = cap_v * (index_max - 0.5 * FRAC_1_SQRT_2PI) / bounds.beta_min_abs;
    let v = virtual_valuation_inverse(-index_max, INVERSE_TOL)?;
    let cap = cap_v * mills_ratio(v) / bounds.beta_min_abs;
    Ok(PriceBounds {
        beta_min_abs: bounds.beta_min_abs,
        beta_max_abs: bounds.beta_max_abs,
        mu_radius: bounds.mu_radius,
        c_v,
        cap_v,
        stated_cap,
        cap,
    })
}
