//! Scalar probability primitives and a bracketing root finder.
//!
//! Every noise family is standardized to location 0. The Gaussian has unit
//! variance, the Laplace unit scale (variance 2), and Student's t unit scale.

use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use libm::erfc;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use statrs::function::{beta::beta_reg, gamma::ln_gamma};

use crate::error::{Error, Result};

/// 1/sqrt(2*pi)
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Beyond this magnitude ratios of Gaussian tail quantities switch to the
/// continued-fraction form of the Mills ratio.
pub const MILLS_SWITCH: f64 = 7.0;

const DEFAULT_STUDENT_DOF: f64 = 4.0;

fn default_dof() -> f64 {
    DEFAULT_STUDENT_DOF
}

/// Distribution of the idiosyncratic utility shock.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NoiseFamily {
    #[default]
    Gaussian,
    Laplace,
    StudentT {
        #[serde(default = "default_dof")]
        dof: f64,
    },
}

impl NoiseFamily {
    pub fn student_t(dof: f64) -> Self {
        NoiseFamily::StudentT { dof }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseFamily::StudentT { dof } if !(dof > 2.0) || !dof.is_finite() => Err(Error::Config(format!(
                "student_t needs dof > 2 for a finite variance, got {dof}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, NoiseFamily::Gaussian)
    }

    /// Families whose CDF is log-concave have a unique revenue-maximizing price.
    pub fn is_log_concave(&self) -> bool {
        !matches!(self, NoiseFamily::StudentT { .. })
    }

    pub fn name(&self) -> String {
        match self {
            NoiseFamily::Gaussian => "gaussian".into(),
            NoiseFamily::Laplace => "laplace".into(),
            NoiseFamily::StudentT { dof } => format!("student_t(dof={dof})"),
        }
    }

    pub fn cdf(&self, v: f64) -> f64 {
        match *self {
            NoiseFamily::Gaussian => std_normal_cdf(v),
            NoiseFamily::Laplace => {
                if v < 0.0 {
                    0.5 * v.exp()
                } else {
                    1.0 - 0.5 * (-v).exp()
                }
            }
            NoiseFamily::StudentT { dof } => {
                let tail = student_lower_tail(dof, -v.abs());
                if v < 0.0 {
                    tail
                } else {
                    1.0 - tail
                }
            }
        }
    }

    /// Upper tail `1 - cdf(v)`, computed without cancellation.
    pub fn sf(&self, v: f64) -> f64 {
        self.cdf(-v)
    }

    pub fn pdf(&self, v: f64) -> f64 {
        match *self {
            NoiseFamily::Gaussian => std_normal_pdf(v),
            NoiseFamily::Laplace => 0.5 * (-v.abs()).exp(),
            NoiseFamily::StudentT { dof } => {
                let log_norm = ln_gamma(0.5 * (dof + 1.0)) - ln_gamma(0.5 * dof) - 0.5 * (dof * PI).ln();
                (log_norm - 0.5 * (dof + 1.0) * (v * v / dof).ln_1p()).exp()
            }
        }
    }

    pub fn log_cdf(&self, v: f64) -> f64 {
        match *self {
            NoiseFamily::Gaussian => log_std_normal_cdf(v),
            _ => {
                if v > 0.0 {
                    (-self.sf(v)).ln_1p()
                } else {
                    self.cdf(v).ln()
                }
            }
        }
    }

    /// `pdf(v) / cdf(v)`, stable far into the lower tail.
    pub fn pdf_over_cdf(&self, v: f64) -> f64 {
        match *self {
            NoiseFamily::Gaussian => inverse_mills(v),
            // cdf(v) = pdf(v) on the negative half-line
            NoiseFamily::Laplace if v < 0.0 => 1.0,
            _ => self.pdf(v) / self.cdf(v),
        }
    }

    /// `cdf(v) / pdf(v)`, the inverse hazard used by first-order pricing conditions.
    pub fn cdf_over_pdf(&self, v: f64) -> f64 {
        match *self {
            NoiseFamily::Gaussian => mills_ratio(-v),
            NoiseFamily::Laplace if v < 0.0 => 1.0,
            NoiseFamily::Laplace => 2.0 * v.exp() - 1.0,
            _ => self.cdf(v) / self.pdf(v),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseFamily::Gaussian => rng.sample(StandardNormal),
            NoiseFamily::Laplace => {
                let u: f64 = rng.random::<f64>() - 0.5;
                -u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            NoiseFamily::StudentT { dof } => StudentT::new(dof).expect("validated dof").sample(rng),
        }
    }
}

fn student_lower_tail(dof: f64, v: f64) -> f64 {
    debug_assert!(v <= 0.0);
    let x = dof / (dof + v * v);
    0.5 * beta_reg(0.5 * dof, 0.5, x)
}

fn check_finite(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("argument must be finite, got {v}")))
    }
}

/// CDF of a standardized noise family.
pub fn dist_cdf(fam: NoiseFamily, v: f64) -> Result<f64> {
    fam.validate()?;
    check_finite(v)?;
    Ok(fam.cdf(v))
}

/// Density of a standardized noise family.
pub fn dist_pdf(fam: NoiseFamily, v: f64) -> Result<f64> {
    fam.validate()?;
    check_finite(v)?;
    Ok(fam.pdf(v))
}

#[inline]
pub fn std_normal_pdf(v: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * v * v).exp()
}

#[inline]
pub fn std_normal_cdf(v: f64) -> f64 {
    0.5 * erfc(-v / SQRT_2)
}

/// Mills ratio `Phi(-x) / phi(x)`.
///
/// Uses the Laplace continued fraction for `x > 7`, where both numerator and
/// denominator head towards underflow.
pub fn mills_ratio(x: f64) -> f64 {
    if x > MILLS_SWITCH {
        let mut t = x;
        for k in (1..=80).rev() {
            t = x + k as f64 / t;
        }
        1.0 / t
    } else {
        std_normal_cdf(-x) / std_normal_pdf(x)
    }
}

/// `phi(u) / Phi(u)`, the inverse Mills ratio.
pub fn inverse_mills(u: f64) -> f64 {
    if u < -MILLS_SWITCH {
        1.0 / mills_ratio(-u)
    } else {
        std_normal_pdf(u) / std_normal_cdf(u)
    }
}

pub fn log_std_normal_cdf(u: f64) -> f64 {
    if u < -MILLS_SWITCH {
        -0.5 * u * u - 0.5 * (2.0 * PI).ln() + mills_ratio(-u).ln()
    } else if u > 0.0 {
        (-std_normal_cdf(-u)).ln_1p()
    } else {
        std_normal_cdf(u).ln()
    }
}

const MAX_ROOT_ITERATIONS: usize = 500;

/// Root of a continuous strictly monotone `f` on `[lo, hi]` by bisection.
pub fn find_root_monotone<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    solve_bracketed(|x| (f(x), f64::NAN), lo, hi, tol)
}

/// Same contract as [`find_root_monotone`], with `f` returning `(value, derivative)`.
///
/// A Newton step is taken whenever it stays inside the current bracket and at
/// least halves the bracket; otherwise the step falls back to bisection.
pub fn find_root_monotone_newton<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    solve_bracketed(f, lo, hi, tol)
}

fn solve_bracketed<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Argument(format!("invalid bracket [{lo}, {hi}]")));
    }
    let (f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    // neg is the endpoint where f < 0
    let (mut neg, mut pos) = if f_lo < 0.0 { (lo, hi) } else { (hi, lo) };
    let mut x = 0.5 * (lo + hi);
    let mut last_step = (hi - lo).abs();
    for _ in 0..MAX_ROOT_ITERATIONS {
        let (fx, dfx) = f(x);
        if fx.is_nan() {
            return Err(Error::Numeric(format!("root finder evaluated NaN at {x}")));
        }
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx < 0.0 {
            neg = x;
        } else {
            pos = x;
        }
        let (a, b) = if neg < pos { (neg, pos) } else { (pos, neg) };
        if b - a <= tol {
            return Ok(x);
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // bracket exhausted at double resolution
            return Ok(x);
        }
        let newton = if dfx.is_finite() && dfx != 0.0 {
            let step = fx / dfx;
            let cand = x - step;
            (cand > a && cand < b && step.abs() <= 0.5 * last_step).then_some((cand, step.abs()))
        } else {
            None
        };
        (x, last_step) = newton.unwrap_or((mid, 0.5 * (b - a)));
    }
    Ok(x)
}

/// Gauss-Hermite rule for expectations under the standard normal.
///
/// Returns nodes and weights with `sum_i w_i g(x_i) ~= E[g(Z)]`, from the
/// Golub-Welsch eigen-decomposition of the probabilists' Jacobi matrix.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let off = (k as f64).sqrt();
        jacobi[(k - 1, k)] = off;
        jacobi[(k, k - 1)] = off;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

pub(crate) const HERMITE_NODES: usize = 64;

/// Cached 64-point standard-normal quadrature.
pub(crate) fn hermite_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_hermite(HERMITE_NODES))
}
