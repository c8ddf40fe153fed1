//! Log-log growth rate of cumulative regret.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeEstimate {
    pub slope: f64,
    pub std_error: f64,
    pub intercept: f64,
    /// Points used in the fit.
    pub points: usize,
    /// Nonpositive values dropped from the window.
    pub excluded: usize,
}

/// OLS fit of `ln R_t` on `ln t` over the last `window` fraction of the
/// rounds. `trajectory[i]` is the cumulative regret after round `i + 1`.
pub fn loglog_slope(trajectory: &[f64], window: f64) -> Result<SlopeEstimate> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::Argument(format!(
            "slope window must lie in (0, 1], got {window}"
        )));
    }
    let n = trajectory.len();
    let start = ((n as f64) * (1.0 - window)).floor() as usize;
    let mut xs = Vec::with_capacity(n - start);
    let mut ys = Vec::with_capacity(n - start);
    let mut excluded = 0;
    for (i, &r) in trajectory.iter().enumerate().skip(start) {
        if r > 0.0 && r.is_finite() {
            xs.push(((i + 1) as f64).ln());
            ys.push(r.ln());
        } else {
            excluded += 1;
        }
    }
    let m = xs.len();
    if m < 2 {
        return Err(Error::Numeric(format!(
            "slope fit needs two positive points in the window, found {m}"
        )));
    }
    if excluded > 0 {
        log::warn!("slope fit: dropped {excluded} nonpositive values from the window");
    }
    let mf = m as f64;
    let mx = xs.iter().sum::<f64>() / mf;
    let my = ys.iter().sum::<f64>() / mf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Numeric("slope fit has no spread in log t".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let std_error = if m > 2 {
        let ssr: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (ssr / (mf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(SlopeEstimate {
        slope,
        std_error,
        intercept,
        points: m,
        excluded,
    })
}
