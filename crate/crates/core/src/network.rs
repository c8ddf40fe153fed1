//! Segment networks and the SAR prior on segment preferences.
//!
//! A network is a symmetric nonnegative contiguity matrix `W` with a zero
//! diagonal. The prior draws `alpha = tau * (I - rho W)^{-1} eps` with
//! `eps ~ N(0, I)`, so `alpha ~ N(0, tau^2 (I - rho W)^{-2})`.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::error::{Error, Result};

/// Default margin `epsilon` in `rho * omega_max <= 1 - epsilon`.
pub const DEFAULT_EPSILON: f64 = 0.05;

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct NetworkStructure {
    ids: Vec<String>,
    weights: DMatrix<f64>,
    omega_min: f64,
    omega_max: f64,
    psd: bool,
}

impl NetworkStructure {
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        let ids = (1..=weights.nrows()).map(|i| format!("seg{i}")).collect();
        Self::with_ids(weights, ids)
    }

    pub fn with_ids(weights: DMatrix<f64>, ids: Vec<String>) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::Shape(format!(
                "network matrix must be square, got {}x{}",
                weights.nrows(),
                weights.ncols()
            )));
        }
        if weights.nrows() == 0 {
            return Err(Error::Size("network needs at least one segment".into()));
        }
        if ids.len() != weights.nrows() {
            return Err(Error::Shape(format!(
                "{} segment ids for a {}-node network",
                ids.len(),
                weights.nrows()
            )));
        }
        if let Some(bad) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Validation(format!(
                "network weights must be finite and nonnegative, found {bad}"
            )));
        }
        let (omega_min, omega_max) = spectral_bounds(&weights)?;
        if omega_min < -PSD_TOL {
            log::info!(
                "network is not positive semi-definite (smallest eigenvalue {omega_min:.3e}); \
                 only I - rho W > 0 is enforced"
            );
        }
        Ok(NetworkStructure {
            ids,
            weights,
            omega_min,
            omega_max,
            psd: omega_min >= -PSD_TOL,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn omega_min(&self) -> f64 {
        self.omega_min
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn is_psd(&self) -> bool {
        self.psd
    }

    /// Weighted degree of each node.
    pub fn row_sums(&self) -> Vec<f64> {
        self.weights.row_iter().map(|r| r.sum()).collect()
    }

    /// Largest `rho` with `rho * omega_max <= 1 - epsilon`; infinite for an edgeless network.
    pub fn rho_upper_bound(&self, epsilon: f64) -> f64 {
        if self.omega_max > 0.0 {
            (1.0 - epsilon) / self.omega_max
        } else {
            f64::INFINITY
        }
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let l = self.len();
        let w = DMatrix::from_fn(l, l, |i, j| self.weights[(perm[i], perm[j])]);
        let ids = perm.iter().map(|&i| self.ids[i].clone()).collect();
        Self::with_ids(w, ids)
    }
}

/// Dense RBF-kernel network: `w_ij = exp(-|f_i - f_j|^2 / (2 width^2))`,
/// with entries below `threshold` and the diagonal set to zero.
pub fn build_rbf_network(features: &[Vec<f64>], width: f64, threshold: f64) -> Result<NetworkStructure> {
    let l = features.len();
    if l < 2 {
        return Err(Error::Size(format!("an RBF network needs at least 2 nodes, got {l}")));
    }
    if !(width > 0.0) || !width.is_finite() {
        return Err(Error::Argument(format!("kernel width must be positive, got {width}")));
    }
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::Argument(format!(
            "threshold must lie in [0, 1), got {threshold}"
        )));
    }
    let dim = features[0].len();
    if let Some((i, f)) = features.iter().enumerate().find(|(_, f)| f.len() != dim) {
        return Err(Error::Shape(format!(
            "feature vector {i} has dimension {}, expected {dim}",
            f.len()
        )));
    }
    let scale = 2.0 * width * width;
    let mut w = DMatrix::zeros(l, l);
    for i in 0..l {
        for j in (i + 1)..l {
            let d2: f64 = features[i]
                .iter()
                .zip(&features[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let k = (-d2 / scale).exp();
            let k = if k < threshold { 0.0 } else { k };
            w[(i, j)] = k;
            w[(j, i)] = k;
        }
    }
    NetworkStructure::from_weights(w)
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn spectral_bounds(w: &DMatrix<f64>) -> Result<(f64, f64)> {
    if !w.is_square() {
        return Err(Error::Shape("spectral bounds need a square matrix".into()));
    }
    let scale = w.amax().max(1.0);
    let asym = (w - w.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::Validation(format!(
            "matrix is not symmetric (max |w_ij - w_ji| = {asym:.3e})"
        )));
    }
    if w.nrows() == 0 {
        return Ok((0.0, 0.0));
    }
    let eig = SymmetricEigen::new(w.clone());
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    Ok((min, max))
}

/// Why a `rho` was refused for a network.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SarRejection {
    #[error("rho must be finite, got {rho}")]
    NonFinite { rho: f64 },
    #[error("rho = {rho} is negative; the autocorrelation must be nonnegative")]
    Negative { rho: f64 },
    #[error("rho * omega_max = {product:.6} exceeds 1 - epsilon = {limit:.6} (rho = {rho}, omega_max = {omega_max})")]
    AboveSpectralBound {
        rho: f64,
        omega_max: f64,
        product: f64,
        limit: f64,
    },
    #[error("tau must be finite and nonnegative, got {tau}")]
    InvalidTau { tau: f64 },
    #[error("epsilon must lie in [0, 1), got {epsilon}")]
    InvalidEpsilon { epsilon: f64 },
    #[error("I - rho W is not positive definite (Cholesky failed)")]
    Degenerate,
}

impl From<SarRejection> for Error {
    fn from(r: SarRejection) -> Self {
        match r {
            SarRejection::Degenerate => Error::Degenerate(r.to_string()),
            other => Error::Validation(other.to_string()),
        }
    }
}

/// A validated SAR prior with a cached Cholesky factor of `I - rho W`.
#[derive(Clone)]
pub struct SarPrior {
    network: Arc<NetworkStructure>,
    rho: f64,
    tau: f64,
    epsilon: f64,
    factor: Cholesky<f64, Dyn>,
}

impl fmt::Debug for SarPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SarPrior")
            .field("segments", &self.network.len())
            .field("rho", &self.rho)
            .field("tau", &self.tau)
            .field("epsilon", &self.epsilon)
            .finish()
    }
}

/// Accepts `rho` iff `0 <= rho` and `rho * omega_max <= 1 - epsilon`.
pub fn validate_sar(
    network: Arc<NetworkStructure>,
    rho: f64,
    tau: f64,
    epsilon: f64,
) -> std::result::Result<SarPrior, SarRejection> {
    if !rho.is_finite() {
        return Err(SarRejection::NonFinite { rho });
    }
    if rho < 0.0 {
        return Err(SarRejection::Negative { rho });
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(SarRejection::InvalidEpsilon { epsilon });
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(SarRejection::InvalidTau { tau });
    }
    let product = rho * network.omega_max();
    let limit = 1.0 - epsilon;
    if product > limit {
        return Err(SarRejection::AboveSpectralBound {
            rho,
            omega_max: network.omega_max(),
            product,
            limit,
        });
    }
    let l = network.len();
    let a = DMatrix::<f64>::identity(l, l) - network.weights() * rho;
    let factor = Cholesky::new(a).ok_or(SarRejection::Degenerate)?;
    Ok(SarPrior {
        network,
        rho,
        tau,
        epsilon,
        factor,
    })
}

impl SarPrior {
    pub fn network(&self) -> &Arc<NetworkStructure> {
        &self.network
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.network.len()
    }

    pub fn is_empty(&self) -> bool {
        self.network.is_empty()
    }

    /// Solves `(I - rho W) x = rhs`.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.factor.solve(rhs)
    }

    /// `tau^2 (I - rho W)^{-2}`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let inv = self.factor.inverse();
        &inv * &inv * (self.tau * self.tau)
    }

    pub fn sample_alpha<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let l = self.len();
        let eps = DVector::from_fn(l, |_, _| rng.sample::<f64, _>(StandardNormal));
        if self.tau == 0.0 {
            return vec![0.0; l];
        }
        let x = self.solve(&eps);
        x.iter().map(|v| self.tau * v).collect()
    }

    /// Per-segment sd of the utility once `alpha` is integrated out:
    /// `V_l = sqrt(tau^2 |(I - rho W)^{-1} e_l|^2 + sigma^2)`.
    pub fn marginal_variances(&self, sigma: f64) -> Result<Vec<f64>> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Argument(format!("sigma must be positive, got {sigma}")));
        }
        let inv = self.factor.inverse();
        Ok(inv
            .column_iter()
            .map(|c| (self.tau * self.tau * c.norm_squared() + sigma * sigma).sqrt())
            .collect())
    }
}

pub fn sample_alpha<R: Rng + ?Sized>(prior: &SarPrior, rng: &mut R) -> Vec<f64> {
    prior.sample_alpha(rng)
}

pub fn marginal_variances(prior: &SarPrior, sigma: f64) -> Result<Vec<f64>> {
    prior.marginal_variances(sigma)
}

/// Node features read from a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFeatures {
    pub ids: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NodeFeatures {
    /// Reads a header row followed by one row per segment: id, then numeric
    /// columns. When `columns` is given only those are kept, in that order.
    pub fn from_reader<R: Read>(reader: R, columns: Option<&[String]>, context: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::parse(context, e))?.clone();
        if header.len() < 2 {
            return Err(Error::parse(
                context,
                "need an id column and at least one feature column",
            ));
        }
        let all: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        let picks: Vec<usize> = match columns {
            None => (0..all.len()).collect(),
            Some(cols) => cols
                .iter()
                .map(|c| {
                    all.iter()
                        .position(|h| h == c)
                        .ok_or_else(|| Error::parse(context, format!("unknown column {c:?}")))
                })
                .collect::<Result<_>>()?,
        };
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(context, e))?;
            if rec.len() != header.len() {
                return Err(Error::parse(
                    context,
                    format!("row {} has {} fields, expected {}", line + 2, rec.len(), header.len()),
                ));
            }
            ids.push(rec[0].to_owned());
            let row = picks
                .iter()
                .map(|&c| {
                    let cell = &rec[c + 1];
                    if cell.is_empty() {
                        return Err(Error::parse(
                            context,
                            format!("missing value in row {} column {}", line + 2, all[c]),
                        ));
                    }
                    let v: f64 = cell.parse().map_err(|_| {
                        Error::parse(context, format!("non-numeric value {cell:?} in row {}", line + 2))
                    })?;
                    if !v.is_finite() {
                        return Err(Error::parse(context, format!("non-finite value in row {}", line + 2)));
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(NodeFeatures {
            ids,
            columns: picks.iter().map(|&c| all[c].clone()).collect(),
            rows,
        })
    }

    pub fn load(path: &Path, columns: Option<&[String]>) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, columns, &path.display().to_string())
    }

    /// Centers and scales each column to unit sample variance.
    pub fn standardized(&self) -> Self {
        let n = self.rows.len() as f64;
        let d = self.columns.len();
        let mut out = self.clone();
        for c in 0..d {
            let mean = self.rows.iter().map(|r| r[c]).sum::<f64>() / n;
            let var = self.rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
            for r in &mut out.rows {
                r[c] = (r[c] - mean) / sd;
            }
        }
        out
    }

    pub fn into_network(self, width: f64, threshold: f64) -> Result<NetworkStructure> {
        let net = build_rbf_network(&self.rows, width, threshold)?;
        NetworkStructure::with_ids(net.weights, self.ids)
    }
}

const MATRIX_HEADER_PREFIX: &str = "# sar-network L=";

/// Writes the dense matrix preceded by `# sar-network L=<L>`.
pub fn write_network_csv<W: Write>(network: &NetworkStructure, mut out: W) -> std::io::Result<()> {
    let l = network.len();
    writeln!(out, "{MATRIX_HEADER_PREFIX}{l}")?;
    for i in 0..l {
        let row: Vec<String> = (0..l).map(|j| format!("{}", network.weights()[(i, j)])).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_network_csv<R: Read>(reader: R, context: &str) -> Result<NetworkStructure> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(context, "empty network file"))?
        .map_err(|e| Error::parse(context, e))?;
    let l: usize = header
        .trim()
        .strip_prefix(MATRIX_HEADER_PREFIX)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::parse(context, format!("expected header `{MATRIX_HEADER_PREFIX}<L>`")))?;
    let mut data = Vec::with_capacity(l * l);
    let mut rows = 0;
    for line in lines {
        let line = line.map_err(|e| Error::parse(context, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(context, format!("row {}: {e}", rows + 1)))?;
        if vals.len() != l {
            return Err(Error::parse(
                context,
                format!("row {} has {} entries, expected {l}", rows + 1, vals.len()),
            ));
        }
        data.extend(vals);
        rows += 1;
    }
    if rows != l {
        return Err(Error::parse(context, format!("found {rows} rows, expected {l}")));
    }
    NetworkStructure::from_weights(DMatrix::from_row_slice(l, l, &data))
}

pub fn load_network_csv(path: &Path) -> Result<NetworkStructure> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_network_csv(file, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn net(rows: &[&[f64]]) -> Arc<NetworkStructure> {
        let l = rows.len();
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Arc::new(NetworkStructure::from_weights(DMatrix::from_row_slice(l, l, &data)).unwrap())
    }

    #[test]
    fn rbf_kernel_values() {
        let w = build_rbf_network(&[vec![0.3, 1.0], vec![0.3, 1.0]], 1.0, 0.0).unwrap();
        assert_eq!(w.weights()[(0, 1)], 1.0);
        assert_eq!(w.weights()[(0, 0)], 0.0);

        let h = 0.7;
        let d = h * 2f64.sqrt();
        let w = build_rbf_network(&[vec![0.0], vec![d]], h, 0.0).unwrap();
        assert_abs_diff_eq!(w.weights()[(0, 1)], (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(w.weights()[(1, 0)], 0.36788, epsilon = 1e-5);
    }

    #[test]
    fn rbf_threshold_drops_weak_edges() {
        // exp(-d^2 / 2) = 0.03  =>  d = sqrt(-2 ln 0.03)
        let d = (-2.0 * 0.03f64.ln()).sqrt();
        let feats = [vec![0.0], vec![d], vec![0.1]];
        let w = build_rbf_network(&feats, 1.0, 0.05).unwrap();
        assert_eq!(w.weights()[(0, 1)], 0.0);
        assert!(w.weights()[(0, 2)] > 0.05);
        let w0 = build_rbf_network(&feats, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(w0.weights()[(0, 1)], 0.03, epsilon = 1e-12);
    }

    #[test]
    fn rbf_errors() {
        assert!(matches!(
            build_rbf_network(&[vec![1.0, 2.0], vec![1.0]], 1.0, 0.0),
            Err(Error::Shape(_))
        ));
        assert!(matches!(build_rbf_network(&[vec![1.0]], 1.0, 0.0), Err(Error::Size(_))));
        assert!(build_rbf_network(&[vec![1.0], vec![2.0]], 0.0, 0.0).is_err());
    }

    #[test]
    fn spectral_bound_examples() {
        let (lo, hi) = spectral_bounds(&DMatrix::identity(3, 3)).unwrap();
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);
        let (lo, hi) = spectral_bounds(&DMatrix::zeros(4, 4)).unwrap();
        assert_eq!((lo, hi), (0.0, 0.0));
        let (lo, hi) = spectral_bounds(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(lo, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(spectral_bounds(&asym), Err(Error::Validation(_))));
    }

    #[test]
    fn zero_diagonal_network_flags_indefinite() {
        let n = net(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(!n.is_psd());
        assert!(NetworkStructure::from_weights(DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0])).is_err());
    }

    #[test]
    fn validate_sar_examples() {
        let id = Arc::new(NetworkStructure::from_weights(DMatrix::identity(3, 3)).unwrap());
        assert!(validate_sar(id.clone(), 0.5, 1.0, 0.1).is_ok());
        assert!(matches!(
            validate_sar(id.clone(), 1.0, 1.0, 0.1),
            Err(SarRejection::AboveSpectralBound { .. })
        ));
        assert!(matches!(
            validate_sar(id.clone(), -0.2, 1.0, 0.1),
            Err(SarRejection::Negative { .. })
        ));
        // boundary is inclusive
        assert!(validate_sar(id, 0.9, 1.0, 0.1).is_ok());
    }

    #[test]
    fn sample_alpha_special_cases() {
        let n = net(&[&[0.0, 0.5], &[0.5, 0.0]]);
        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        let prior = validate_sar(n.clone(), 0.0, 2.0, 0.05).unwrap();
        let a = prior.sample_alpha(&mut r1);
        let eps: Vec<f64> = (0..2).map(|_| r2.sample::<f64, _>(StandardNormal)).collect();
        assert_abs_diff_eq!(a[0], 2.0 * eps[0], epsilon = 1e-14);
        assert_abs_diff_eq!(a[1], 2.0 * eps[1], epsilon = 1e-14);

        let zero = validate_sar(n, 0.5, 0.0, 0.05).unwrap();
        assert_eq!(zero.sample_alpha(&mut r1), vec![0.0, 0.0]);
    }

    #[test]
    fn sample_alpha_two_node_covariance() {
        // (I - 0.5 W) = [[1, -1/4], [-1/4, 1]], inverse = (16/15) [[1, 1/4], [1/4, 1]]
        // squared: (256/225) [[17/16, 1/2], [1/2, 17/16]]
        let expected = [
            [256.0 / 225.0 * 17.0 / 16.0, 128.0 / 225.0],
            [128.0 / 225.0, 256.0 / 225.0 * 17.0 / 16.0],
        ];
        let n = net(&[&[0.0, 0.5], &[0.5, 0.0]]);
        let prior = validate_sar(n, 0.5, 1.0, 0.05).unwrap();
        let cov = prior.covariance();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(cov[(i, j)], expected[i][j], epsilon = 1e-12);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draws = 200_000;
        let mut s = [[0.0; 2]; 2];
        for _ in 0..draws {
            let a = prior.sample_alpha(&mut rng);
            for i in 0..2 {
                for j in 0..2 {
                    s[i][j] += a[i] * a[j];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!((s[i][j] / draws as f64 - expected[i][j]).abs() < 0.02);
            }
        }
    }

    #[test]
    fn marginal_variance_examples() {
        let n = net(&[&[0.0, 0.3, 0.1], &[0.3, 0.0, 0.2], &[0.1, 0.2, 0.0]]);
        let v = validate_sar(n, 0.0, 1.0, 0.05)
            .unwrap()
            .marginal_variances(1.0)
            .unwrap();
        for vl in v {
            assert_abs_diff_eq!(vl, 2f64.sqrt(), epsilon = 1e-14);
        }
        let single = net(&[&[0.0]]);
        let v = validate_sar(single, 3.0, 1.5, 0.05)
            .unwrap()
            .marginal_variances(0.5)
            .unwrap();
        assert_abs_diff_eq!(v[0], (1.5f64 * 1.5 + 0.25).sqrt(), epsilon = 1e-14);
        let selfloop = net(&[&[1.0]]);
        let v = validate_sar(selfloop, 0.5, 1.0, 0.05)
            .unwrap()
            .marginal_variances(1.0)
            .unwrap();
        assert_abs_diff_eq!(v[0], 5f64.sqrt(), epsilon = 1e-14);
        let n = net(&[&[0.0, 0.3], &[0.3, 0.0]]);
        assert!(validate_sar(n, 0.2, 1.0, 0.05)
            .unwrap()
            .marginal_variances(0.0)
            .is_err());
    }

    #[test]
    fn matrix_csv_round_trip() {
        let n = net(&[&[0.0, 0.25, 1e-7], &[0.25, 0.0, 0.5], &[1e-7, 0.5, 0.0]]);
        let mut buf = Vec::new();
        write_network_csv(&n, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# sar-network L=3\n"));
        let back = read_network_csv(buf.as_slice(), "mem").unwrap();
        assert_eq!(back.weights(), n.weights());
        assert!(read_network_csv("# sar-network L=2\n0,1\n".as_bytes(), "mem").is_err());
        assert!(read_network_csv("0,1\n1,0\n".as_bytes(), "mem").is_err());
    }

    #[test]
    fn feature_csv_parsing() {
        let text = "state,a,b,c\nAL,1.0,2.0,3.0\nAZ,0.5,-1.0,2.5\n";
        let f = NodeFeatures::from_reader(text.as_bytes(), None, "mem").unwrap();
        assert_eq!(f.ids, vec!["AL", "AZ"]);
        assert_eq!(f.rows[1], vec![0.5, -1.0, 2.5]);
        let cols = vec!["c".to_string(), "a".to_string()];
        let f = NodeFeatures::from_reader(text.as_bytes(), Some(&cols), "mem").unwrap();
        assert_eq!(f.rows[0], vec![3.0, 1.0]);
        let missing = "id,a,b\nx,1.0,\ny,2.0,3.0\n";
        assert!(NodeFeatures::from_reader(missing.as_bytes(), None, "mem").is_err());
        let junk = "id,a\nx,abc\n";
        assert!(NodeFeatures::from_reader(junk.as_bytes(), None, "mem").is_err());
        let bad_col = vec!["zz".to_string()];
        assert!(NodeFeatures::from_reader(text.as_bytes(), Some(&bad_col), "mem").is_err());
    }
}
