//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

/// Lower Cholesky factor, or `None` when `m` is not numerically positive definite.
pub fn cholesky_lower(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if m.nrows() != m.ncols() || m.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let chol = m.clone().cholesky()?;
    let l = chol.l();
    if l.diagonal().iter().all(|d| *d > 0.0 && d.is_finite()) {
        Some(l)
    } else {
        None
    }
}

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Relative ridge `scale * trace / p`, falling back to `scale` for a zero trace.
pub fn relative_ridge(m: &DMatrix<f64>, scale: f64) -> f64 {
    let p = m.nrows().max(1) as f64;
    let tr = m.trace();
    if tr > 0.0 && tr.is_finite() {
        scale * tr / p
    } else {
        scale
    }
}

/// Returns `m` if it is positive definite, otherwise `m + ridge·I` with the
/// ridge grown tenfold until the factorization succeeds. The flag reports
/// whether a repair happened.
pub fn ensure_spd(m: &DMatrix<f64>, ridge_scale: f64) -> (DMatrix<f64>, bool) {
    let mut sym = m.clone();
    symmetrize(&mut sym);
    if cholesky_lower(&sym).is_some() {
        return (sym, false);
    }
    let mut ridge = relative_ridge(&sym, ridge_scale);
    for _ in 0..30 {
        let mut repaired = sym.clone();
        for i in 0..repaired.nrows() {
            repaired[(i, i)] += ridge;
        }
        if cholesky_lower(&repaired).is_some() {
            return (repaired, true);
        }
        ridge *= 10.0;
    }
    // Last resort: diagonal of absolute values.
    let p = sym.nrows();
    let diag = DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            sym[(i, i)].abs().max(ridge_scale)
        } else {
            0.0
        }
    });
    (diag, true)
}

/// Inverse of a symmetric positive-definite matrix.
pub fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let chol = m.clone().cholesky()?;
    let mut inv = chol.inverse();
    symmetrize(&mut inv);
    Some(inv)
}

/// Draws `N(mean, L Lᵀ)` given the lower factor `l`.
pub fn sample_mvn<R: Rng + ?Sized>(mean: &DVector<f64>, l: &DMatrix<f64>, rng: &mut R) -> DVector<f64> {
    let p = mean.len();
    let eps = DVector::from_fn(p, |_, _| StandardNormal.sample(rng));
    mean + l * eps
}

/// Draws from a Wishart(df, scale) via the Bartlett decomposition.
pub fn sample_wishart<R: Rng + ?Sized>(df: f64, scale_chol: &DMatrix<f64>, rng: &mut R) -> DMatrix<f64> {
    let p = scale_chol.nrows();
    let mut a = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        let chi = ChiSquared::new(df - i as f64).expect("wishart degrees of freedom must exceed p - 1");
        a[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = StandardNormal.sample(rng);
        }
    }
    let la = scale_chol * a;
    let mut w = &la * la.transpose();
    symmetrize(&mut w);
    w
}

/// Draws `Σ ~ IW(df, scale)` (density ∝ |Σ|^{-(df+p+1)/2} exp(-tr(scale Σ⁻¹)/2)),
/// so that `E[Σ] = scale / (df - p - 1)`.
///
/// Returns the draw and whether a ridge repair was needed.
pub fn sample_inverse_wishart<R: Rng + ?Sized>(
    df: f64,
    scale: &DMatrix<f64>,
    rng: &mut R,
) -> (DMatrix<f64>, bool) {
    let (scale, mut repaired) = ensure_spd(scale, 1e-10);
    let scale_inv = spd_inverse(&scale).expect("repaired scale is positive definite");
    let chol = cholesky_lower(&scale_inv)
        .unwrap_or_else(|| cholesky_lower(&ensure_spd(&scale_inv, 1e-10).0).expect("repaired"));
    let w = sample_wishart(df, &chol, rng);
    let sigma = match spd_inverse(&w) {
        Some(s) => s,
        None => {
            repaired = true;
            spd_inverse(&ensure_spd(&w, 1e-10).0).expect("repaired")
        }
    };
    let (sigma, fixed) = ensure_spd(&sigma, 1e-10);
    (sigma, repaired || fixed)
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Sample mean of the rows of `rows` (each of length `p`).
pub fn mean_of(rows: &[&[f64]], p: usize) -> DVector<f64> {
    let mut mean = DVector::zeros(p);
    for r in rows {
        for (j, v) in r.iter().enumerate() {
            mean[j] += v;
        }
    }
    if !rows.is_empty() {
        mean /= rows.len() as f64;
    }
    mean
}

/// Unbiased sample covariance (denominator `n - 1`); zero for `n < 2`.
pub fn covariance_of(rows: &[&[f64]], p: usize) -> DMatrix<f64> {
    let mut cov = DMatrix::zeros(p, p);
    let n = rows.len();
    if n < 2 {
        return cov;
    }
    let mean = mean_of(rows, p);
    for r in rows {
        for i in 0..p {
            let di = r[i] - mean[i];
            for j in 0..=i {
                cov[(i, j)] += di * (r[j] - mean[j]);
            }
        }
    }
    for i in 0..p {
        for j in 0..=i {
            let v = cov[(i, j)] / (n - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    cov
}
