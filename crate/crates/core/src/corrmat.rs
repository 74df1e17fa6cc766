//! Correlation matrices and multivariate normal machinery: validation,
//! factorization for sampling, nearest-correlation repair by spectral
//! decomposition, random Gram-matrix generation, and a Monte Carlo Gaussian
//! copula CDF used by tests.

use crate::rng::RngStream;
use crate::specfun::{normal_cdf, normal_inv};
use nalgebra::{DMatrix, DVector};
use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorrError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {diff:.3e}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },
    #[error("diagonal entry a[{i}][{i}] = {value} is not 1")]
    NotUnitDiagonal { i: usize, value: f64 },
    #[error("off-diagonal entry a[{i}][{j}] = {value} outside [-1, 1]")]
    OffDiagonalRange { i: usize, j: usize, value: f64 },
    #[error("matrix is not positive semidefinite: smallest eigenvalue {0:.3e}")]
    NotPsd(f64),
    #[error("matrix is degenerate: zero diagonal after eigenvalue clipping")]
    Degenerate,
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CorrError>;

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_SLACK: f64 = -1e-10;

/// A validated correlation matrix: symmetric, unit diagonal, PSD up to
/// numerical slack.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    entries: DMatrix<f64>,
}

impl CorrelationMatrix {
    pub fn identity(n: usize) -> Self {
        Self {
            entries: DMatrix::identity(n, n),
        }
    }

    /// 2x2 matrix with off-diagonal `theta`.
    pub fn bivariate(theta: f64) -> Result<Self> {
        validate_correlation(DMatrix::from_row_slice(2, 2, &[1.0, theta, theta, 1.0]))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Leading principal submatrix, itself a correlation matrix.
    pub fn leading_submatrix(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.dim() {
            return Err(CorrError::NotSquare { rows: n, cols: n });
        }
        validate_correlation(self.entries.view((0, 0), (n, n)).into_owned())
    }

    /// Plain CSV: n rows of n comma-separated reals.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| format!("{:.17}", self.entries[(i, j)]))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let raw = read_square_csv(r)?;
        validate_correlation(raw)
    }
}

/// Parse a square numeric CSV matrix without validating correlation
/// structure (repair input may be an arbitrary symmetric matrix).
pub fn read_square_csv<R: BufRead>(r: R) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|tok| tok.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| CorrError::Csv(format!("line {}: {e}", lineno + 1)))?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CorrError::Csv(format!(
            "expected a square matrix, got {n} rows of lengths {:?}",
            rows.iter().map(|r| r.len()).collect::<Vec<_>>()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Check symmetry, unit diagonal, off-diagonal range, and positive
/// semidefiniteness (smallest eigenvalue >= -1e-10).
pub fn validate_correlation(entries: DMatrix<f64>) -> Result<CorrelationMatrix> {
    let n = entries.nrows();
    if n == 0 || entries.ncols() != n {
        return Err(CorrError::NotSquare {
            rows: n,
            cols: entries.ncols(),
        });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = (entries[(i, j)] - entries[(j, i)]).abs();
            if diff > SYMMETRY_TOL {
                return Err(CorrError::NotSymmetric { i, j, diff });
            }
        }
    }
    for i in 0..n {
        if (entries[(i, i)] - 1.0).abs() > SYMMETRY_TOL {
            return Err(CorrError::NotUnitDiagonal {
                i,
                value: entries[(i, i)],
            });
        }
        for j in 0..n {
            if i != j && entries[(i, j)].abs() > 1.0 + SYMMETRY_TOL {
                return Err(CorrError::OffDiagonalRange {
                    i,
                    j,
                    value: entries[(i, j)],
                });
            }
        }
    }
    let min_eig = DMatrix::from_fn(n, n, |i, j| 0.5 * (entries[(i, j)] + entries[(j, i)]))
        .symmetric_eigen()
        .eigenvalues
        .min();
    if min_eig < PSD_SLACK {
        return Err(CorrError::NotPsd(min_eig));
    }
    Ok(CorrelationMatrix { entries })
}

/// Nearest correlation matrix by one-shot spectral repair: symmetrize,
/// eigendecompose, clip negative eigenvalues at zero, reassemble, and
/// rescale both sides by the inverse square root of the resulting diagonal.
pub fn nearest_correlation_spectral(candidate: &DMatrix<f64>) -> Result<CorrelationMatrix> {
    let n = candidate.nrows();
    if n == 0 || candidate.ncols() != n {
        return Err(CorrError::NotSquare {
            rows: n,
            cols: candidate.ncols(),
        });
    }
    let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (candidate[(i, j)] + candidate[(j, i)]));
    let eig = sym.symmetric_eigen();
    let clipped = DVector::from_fn(n, |i, _| eig.eigenvalues[i].max(0.0));
    let b = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        if b[(i, i)] <= 0.0 {
            return Err(CorrError::Degenerate);
        }
    }
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = b[(i, j)] / (b[(i, i)] * b[(j, j)]).sqrt();
        }
    }
    // exact symmetry and unit diagonal regardless of rounding
    for i in 0..n {
        out[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let avg = 0.5 * (out[(i, j)] + out[(j, i)]);
            out[(i, j)] = avg.clamp(-1.0, 1.0);
            out[(j, i)] = out[(i, j)];
        }
    }
    validate_correlation(out)
}

/// Random Gram correlation matrix: n independent standard-normal n-vectors,
/// normalized to the unit sphere; `R = U^T U` with the normalized vectors as
/// columns. Deterministic in the seed.
pub fn random_correlation_gram(n: usize, seed: u64) -> Result<CorrelationMatrix> {
    if n == 0 {
        return Err(CorrError::NotSquare { rows: 0, cols: 0 });
    }
    let mut rng = RngStream::from_seed(seed);
    let mut u = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut col = DVector::from_fn(n, |_, _| rng.standard_normal());
        col /= col.norm();
        u.set_column(k, &col);
    }
    let mut r = u.transpose() * u;
    for i in 0..n {
        r[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let avg = 0.5 * (r[(i, j)] + r[(j, i)]);
            r[(i, j)] = avg;
            r[(j, i)] = avg;
        }
    }
    validate_correlation(r)
}

/// Factor `R = L L^T` for sampling. Cholesky when it exists; for
/// semidefinite matrices (exact repair output can be singular) the factor
/// falls back to `V diag(sqrt(max(eig, 0)))`, which is not triangular but
/// satisfies the same identity.
#[derive(Debug, Clone)]
pub struct FactorizedCorrelation {
    factor: DMatrix<f64>,
}

impl FactorizedCorrelation {
    pub fn new(r: &CorrelationMatrix) -> Self {
        let n = r.dim();
        let factor = match r.entries.clone().cholesky() {
            Some(chol) => chol.unpack(),
            None => {
                let eig = r.entries.clone().symmetric_eigen();
                let sqrt_eig = DVector::from_fn(n, |i, _| eig.eigenvalues[i].max(0.0).sqrt());
                &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_eig)
            }
        };
        Self { factor }
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// `z = L g` into `out`, with `g` the i.i.d. standard normals in
    /// `scratch`. Allocation-free for the samplers' hot loop. The factor is
    /// lower triangular from Cholesky but dense from the eigen fallback, so
    /// the whole row is accumulated either way.
    pub fn sample_into(&self, rng: &mut RngStream, scratch: &mut [f64], out: &mut [f64]) {
        let n = self.dim();
        debug_assert!(scratch.len() == n && out.len() == n);
        rng.fill_standard_normal(scratch);
        for i in 0..n {
            let mut acc = 0.0;
            for (j, g) in scratch.iter().enumerate() {
                acc += self.factor[(i, j)] * g;
            }
            out[i] = acc;
        }
    }
}

/// One multivariate normal draw with covariance `R`.
pub fn mvn_sample(fac: &FactorizedCorrelation, rng: &mut RngStream) -> Vec<f64> {
    let n = fac.dim();
    let mut g = vec![0.0; n];
    let mut z = vec![0.0; n];
    fac.sample_into(rng, &mut g, &mut z);
    z
}

/// Monte Carlo estimate of the Gaussian copula CDF
/// `C_R(u) = N_R(Ninv(u_1), ..., Ninv(u_n))`. Diagnostic tool, not used on
/// the pricing path.
pub fn gaussian_copula_cdf(
    r: &CorrelationMatrix,
    u: &[f64],
    mc_samples: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    assert_eq!(u.len(), r.dim(), "dimension mismatch");
    let thresholds: Vec<f64> = u
        .iter()
        .map(|&ui| normal_inv(ui).map_err(|e| CorrError::Csv(e.to_string())))
        .collect::<Result<_>>()?;
    let fac = FactorizedCorrelation::new(r);
    let n = r.dim();
    let mut g = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut hits = 0usize;
    for _ in 0..mc_samples {
        fac.sample_into(rng, &mut g, &mut z);
        if z.iter().zip(&thresholds).all(|(zi, ti)| zi <= ti) {
            hits += 1;
        }
    }
    Ok(hits as f64 / mc_samples as f64)
}

/// Sample correlation of two equally long series; used by tests and the
/// copula diagnostics.
pub fn sample_correlation(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Uniform scores of a sample under a CDF evaluated by the caller, reduced
/// to a Kolmogorov-Smirnov statistic. Returns `sqrt(n) * D_n`.
pub fn ks_statistic(mut cdf_values: Vec<f64>) -> f64 {
    cdf_values.sort_by(f64::total_cmp);
    let n = cdf_values.len();
    let mut d: f64 = 0.0;
    for (i, u) in cdf_values.iter().enumerate() {
        let lo = i as f64 / n as f64;
        let hi = (i + 1) as f64 / n as f64;
        d = d.max((u - lo).abs()).max((hi - u).abs());
    }
    (n as f64).sqrt() * d
}

/// Asymptotic Kolmogorov p-value `Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}`.
pub fn ks_p_value(scaled_stat: f64) -> f64 {
    if scaled_stat <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * scaled_stat * scaled_stat).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Normal scores useful to copula tests: `Ninv(cdf(x))` clipped to +-8.
pub fn normal_score(u: f64) -> f64 {
    let clipped = u.clamp(normal_cdf(-8.0), normal_cdf(8.0));
    normal_inv(clipped).expect("clipped probability is interior")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn validation_basics() {
        assert!(validate_correlation(DMatrix::identity(4, 4)).is_ok());
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            validate_correlation(bad),
            Err(CorrError::OffDiagonalRange { .. })
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.3, 1.0]);
        assert!(matches!(
            validate_correlation(asym),
            Err(CorrError::NotSymmetric { .. })
        ));
        let not_psd = DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0],
        );
        assert!(matches!(validate_correlation(not_psd), Err(CorrError::NotPsd(_))));
    }

    #[test]
    fn spectral_repair_fixed_point_and_idempotence() {
        let r = random_correlation_gram(6, 99).unwrap();
        let repaired = nearest_correlation_spectral(r.matrix()).unwrap();
        let diff = (repaired.matrix() - r.matrix()).abs().max();
        assert!(diff < 1e-12, "repair moved a valid matrix by {diff:.2e}");
        // idempotence on a matrix that needs repair
        let broken = DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0],
        );
        let once = nearest_correlation_spectral(&broken).unwrap();
        let twice = nearest_correlation_spectral(once.matrix()).unwrap();
        assert!((twice.matrix() - once.matrix()).abs().max() < 1e-10);
    }

    #[test]
    fn gram_matrices_are_valid_and_seeded() {
        let r1 = random_correlation_gram(1, 5).unwrap();
        assert_eq!(r1.dim(), 1);
        assert_eq!(r1.entry(0, 0), 1.0);
        let r = random_correlation_gram(5, 123).unwrap();
        let again = random_correlation_gram(5, 123).unwrap();
        assert_eq!(r.matrix(), again.matrix());
        let other = random_correlation_gram(5, 124).unwrap();
        assert_ne!(r.matrix(), other.matrix());
        // leading principal submatrices are correlation matrices
        for k in 1..=5 {
            assert!(r.leading_submatrix(k).is_ok());
        }
    }

    #[test]
    fn factorization_reproduces_r() {
        let r = random_correlation_gram(7, 3).unwrap();
        let fac = FactorizedCorrelation::new(&r);
        let recon = fac.factor() * fac.factor().transpose();
        assert!((recon - r.matrix()).abs().max() < 1e-10);
        // singular (rank-deficient) case through the eigen fallback
        let ones = DMatrix::from_element(3, 3, 1.0);
        let singular = validate_correlation(ones).unwrap();
        let fac = FactorizedCorrelation::new(&singular);
        let recon = fac.factor() * fac.factor().transpose();
        assert!((recon - singular.matrix()).abs().max() < 1e-10);
    }

    #[test]
    fn mvn_sample_correlation_converges() {
        let m = 1_000_000;
        let r = CorrelationMatrix::bivariate(0.75).unwrap();
        let fac = FactorizedCorrelation::new(&r);
        let mut rng = RngStream::from_seed(2024);
        let mut xs = Vec::with_capacity(m);
        let mut ys = Vec::with_capacity(m);
        for _ in 0..m {
            let z = mvn_sample(&fac, &mut rng);
            xs.push(z[0]);
            ys.push(z[1]);
        }
        let rho = sample_correlation(&xs, &ys);
        assert_abs_diff_eq!(rho, 0.75, epsilon = 0.004);
        // identity: independence
        let fac_id = FactorizedCorrelation::new(&CorrelationMatrix::identity(2));
        let mut rng = RngStream::from_seed(2025);
        let (mut xs, mut ys) = (Vec::with_capacity(m), Vec::with_capacity(m));
        for _ in 0..m {
            let z = mvn_sample(&fac_id, &mut rng);
            xs.push(z[0]);
            ys.push(z[1]);
        }
        assert!(sample_correlation(&xs, &ys).abs() < 4.0 / (m as f64).sqrt());
    }

    #[test]
    fn mvn_marginals_pass_ks() {
        let m = 100_000;
        let r = CorrelationMatrix::bivariate(0.6).unwrap();
        let fac = FactorizedCorrelation::new(&r);
        let mut rng = RngStream::from_seed(31);
        let mut u0 = Vec::with_capacity(m);
        let mut u1 = Vec::with_capacity(m);
        for _ in 0..m {
            let z = mvn_sample(&fac, &mut rng);
            u0.push(normal_cdf(z[0]));
            u1.push(normal_cdf(z[1]));
        }
        for u in [u0, u1] {
            let p = ks_p_value(ks_statistic(u));
            assert!(p > 0.01, "KS p-value {p:.4} below significance");
        }
    }

    #[test]
    fn mvn_covariance_frobenius() {
        let n = 8;
        let m = 1_000_000;
        let r = random_correlation_gram(n, 77).unwrap();
        let fac = FactorizedCorrelation::new(&r);
        let mut rng = RngStream::from_seed(4);
        let mut cov = DMatrix::<f64>::zeros(n, n);
        let mut g = vec![0.0; n];
        let mut z = vec![0.0; n];
        for _ in 0..m {
            fac.sample_into(&mut rng, &mut g, &mut z);
            for i in 0..n {
                for j in 0..n {
                    cov[(i, j)] += z[i] * z[j];
                }
            }
        }
        cov /= m as f64;
        assert!((cov - r.matrix()).norm() < 0.01);
    }

    #[test]
    fn copula_cdf_independence_and_margins() {
        let mut rng = RngStream::from_seed(8);
        let r = CorrelationMatrix::identity(3);
        let u = [0.3, 0.6, 0.9];
        let m = 1_000_000;
        let est = gaussian_copula_cdf(&r, &u, m, &mut rng).unwrap();
        let expected: f64 = u.iter().product();
        let se = (expected * (1.0 - expected) / m as f64).sqrt();
        assert_abs_diff_eq!(est, expected, epsilon = 3.0 * se);
        // a component at ~1 drops out of the copula
        let r2 = CorrelationMatrix::bivariate(0.5).unwrap();
        let mut rng = RngStream::from_seed(9);
        let with_one = gaussian_copula_cdf(&r2, &[0.4, 1.0 - 1e-12], m, &mut rng).unwrap();
        assert_abs_diff_eq!(with_one, 0.4, epsilon = 3.0 * (0.4 * 0.6 / m as f64).sqrt());
        // n = 1 is the identity copula
        let mut rng = RngStream::from_seed(10);
        let single = gaussian_copula_cdf(&CorrelationMatrix::identity(1), &[0.37], m, &mut rng)
            .unwrap();
        assert_abs_diff_eq!(single, 0.37, epsilon = 3.0 * (0.37 * 0.63 / m as f64).sqrt());
    }

    #[test]
    fn csv_round_trip() {
        let r = random_correlation_gram(4, 17).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let back = CorrelationMatrix::read_csv(buf.as_slice()).unwrap();
        assert_relative_eq!(
            (back.matrix() - r.matrix()).abs().max(),
            0.0,
            epsilon = 1e-15
        );
    }
}
