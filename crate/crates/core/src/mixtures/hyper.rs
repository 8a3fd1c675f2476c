//! Data-adaptive prior hyperparameters for the DPM and LDDP samplers.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{ColumnKind, MixedDataset};
use crate::error::{Error, Result};
use crate::kmeans::{distinct_rows, kmeans};
use crate::linalg::{ensure_spd, relative_ridge, spd_inverse};

/// Smallest Dirichlet parameter kept for categories unseen in the data.
pub const ETA_FLOOR: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpmHyperparams {
    pub m0: Vec<f64>,
    pub l0: Vec<Vec<f64>>,
    pub nu0: f64,
    pub s0: Vec<Vec<f64>>,
    pub eta: Vec<Vec<f64>>,
    /// Repairs and adjustments made during derivation.
    #[serde(default)]
    pub notes: Vec<String>,
}

fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let p = rows.len();
    DMatrix::from_fn(p, p, |i, j| rows[i][j])
}

fn from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    super::matrix_rows(m)
}

impl DpmHyperparams {
    pub fn p(&self) -> usize {
        self.m0.len()
    }

    pub fn m0_vec(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.m0)
    }

    pub fn l0_mat(&self) -> DMatrix<f64> {
        to_matrix(&self.l0)
    }

    pub fn s0_mat(&self) -> DMatrix<f64> {
        to_matrix(&self.s0)
    }

    pub fn validate(&self, p: usize, cards: &[usize]) -> Result<()> {
        if self.m0.len() != p || self.l0.len() != p || self.s0.len() != p {
            return Err(Error::shape(format!("hyperparameters sized for p={}, data has p={p}", self.m0.len())));
        }
        if p > 0 {
            if self.nu0 <= p as f64 + 1.0 {
                return Err(Error::arg(format!("nu0 = {} must exceed p + 1 = {}", self.nu0, p + 1)));
            }
            for (name, m) in [("L0", self.l0_mat()), ("S0", self.s0_mat())] {
                if crate::linalg::cholesky_lower(&m).is_none() {
                    return Err(Error::numeric(format!("{name} is not positive definite")));
                }
            }
        }
        if self.eta.len() != cards.len() {
            return Err(Error::shape("eta has one vector per categorical variable"));
        }
        for (e, &c) in self.eta.iter().zip(cards) {
            if e.len() != c || e.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::arg("eta entries must be positive, one per category"));
            }
        }
        Ok(())
    }
}

/// Splits a dataset into row-major continuous values and categorical indices.
pub(crate) fn split_blocks(data: &MixedDataset) -> (Vec<Vec<f64>>, Vec<Vec<usize>>, Vec<usize>) {
    let pts = data.points();
    let cards = data
        .columns()
        .iter()
        .filter(|c| c.kind == ColumnKind::Categorical)
        .map(|c| c.categories.len())
        .collect();
    let cont = pts.iter().map(|p| p.continuous.clone()).collect();
    let cat = pts.into_iter().map(|p| p.categorical).collect();
    (cont, cat, cards)
}

/// Prior hyperparameters from an initial k-means partition of the continuous
/// block and the empirical category proportions.
///
/// When the data hold fewer distinct continuous rows than `kmeans_k`, k is
/// lowered to that count (logged). Singular matrices get a relative ridge.
pub fn derive_dpm_hyperparams<R: Rng + ?Sized>(
    data: &MixedDataset,
    kmeans_k: usize,
    tau_k: f64,
    rng: &mut R,
) -> Result<DpmHyperparams> {
    if kmeans_k == 0 {
        return Err(Error::arg("kmeans_k must be positive"));
    }
    if !(tau_k > 0.0) {
        return Err(Error::arg("tau_k must be positive"));
    }
    let n = data.n_rows();
    if n < 2 * kmeans_k {
        return Err(Error::arg(format!("need at least {} rows for kmeans_k = {kmeans_k}, got {n}", 2 * kmeans_k)));
    }
    let (cont, cat, cards) = split_blocks(data);
    let p = cont.first().map_or(0, Vec::len);
    let mut notes = Vec::new();

    let (m0, l0, s0) = if p > 0 {
        let k = kmeans_k.min(distinct_rows(&cont));
        if k < kmeans_k {
            let msg = format!("k-means k lowered from {kmeans_k} to {k} distinct rows");
            log::warn!("{msg}");
            notes.push(msg);
        }
        let fit = kmeans(&cont, k, rng)?;
        let refs: Vec<&[f64]> = cont.iter().map(Vec::as_slice).collect();
        let m0 = crate::linalg::mean_of(&refs, p);
        let cents: Vec<&[f64]> = fit.centroids.iter().map(Vec::as_slice).collect();
        let l0 = crate::linalg::covariance_of(&cents, p);
        let mut within = DMatrix::zeros(p, p);
        for c in 0..k {
            let members: Vec<&[f64]> = cont
                .iter()
                .zip(&fit.labels)
                .filter(|(_, &l)| l == c)
                .map(|(r, _)| r.as_slice())
                .collect();
            within += crate::linalg::covariance_of(&members, p);
        }
        within /= k as f64;
        let nu0 = p as f64 + 2.0;
        let s0 = within * (nu0 + p as f64 + 1.0);
        let (l0, fixed_l) = ensure_spd(&l0, 1e-6);
        if fixed_l {
            let msg = format!("L0 ridge-repaired (ridge base {:.3e})", relative_ridge(&l0, 1e-6));
            log::info!("{msg}");
            notes.push(msg);
        }
        let (s0, fixed_s) = ensure_spd(&s0, 1e-6);
        if fixed_s {
            let msg = "S0 ridge-repaired".to_string();
            log::info!("{msg}");
            notes.push(msg);
        }
        (m0.iter().copied().collect(), from_matrix(&l0), from_matrix(&s0))
    } else {
        (Vec::new(), Vec::new(), Vec::new())
    };

    let mut eta = Vec::with_capacity(cards.len());
    for (j, &c) in cards.iter().enumerate() {
        let mut counts = vec![0.0; c];
        for row in &cat {
            counts[row[j]] += 1.0;
        }
        let e: Vec<f64> = counts.iter().map(|k| (tau_k * k / n as f64).max(ETA_FLOOR)).collect();
        if counts.iter().any(|k| *k == 0.0) {
            notes.push(format!("eta for categorical variable {j} floored at {ETA_FLOOR} for unseen categories"));
        }
        eta.push(e);
    }

    Ok(DpmHyperparams {
        m0,
        l0,
        nu0: p as f64 + 2.0,
        s0,
        eta,
        notes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LddpHyperparams {
    pub m0: Vec<f64>,
    pub s0: Vec<Vec<f64>>,
    pub nu: f64,
    pub psi: Vec<Vec<f64>>,
    pub a: f64,
    pub b: f64,
    /// OLS residual variance after flooring.
    pub sigma2: f64,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl LddpHyperparams {
    pub fn dim(&self) -> usize {
        self.m0.len()
    }

    pub fn m0_vec(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.m0)
    }

    pub fn s0_mat(&self) -> DMatrix<f64> {
        to_matrix(&self.s0)
    }

    pub fn psi_mat(&self) -> DMatrix<f64> {
        to_matrix(&self.psi)
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.m0.len() != d || self.s0.len() != d || self.psi.len() != d {
            return Err(Error::shape(format!("hyperparameters sized for {} coefficients, design has {d}", self.m0.len())));
        }
        if self.nu <= d as f64 + 1.0 {
            return Err(Error::arg(format!("nu = {} must exceed dim + 1 = {}", self.nu, d + 1)));
        }
        if !(self.a > 0.0 && self.b > 0.0) {
            return Err(Error::arg("a and b must be positive"));
        }
        for (name, m) in [("S0", self.s0_mat()), ("Psi", self.psi_mat())] {
            if crate::linalg::cholesky_lower(&m).is_none() {
                return Err(Error::numeric(format!("{name} is not positive definite")));
            }
        }
        Ok(())
    }
}

/// Floor applied to the OLS residual variance and to `b`.
pub const SIGMA2_FLOOR: f64 = 1e-12;

/// Hyperparameters from an OLS fit: `m0 = β̂`, `S0 = σ̂²(XᵀX)⁻¹`, `ν = d + 2`,
/// `Ψ = 30 σ̂²(XᵀX)⁻¹`, `a = 2`, `b = σ̂²/2`, where `d` is the design width.
pub fn derive_lddp_hyperparams(y: &[f64], x: &DMatrix<f64>) -> Result<LddpHyperparams> {
    let (n, d) = x.shape();
    if y.len() != n {
        return Err(Error::shape(format!("y has {} entries, design has {n} rows", y.len())));
    }
    if n <= d + 2 {
        return Err(Error::arg(format!("need more than {} rows for a design of width {d}", d + 2)));
    }
    let mut notes = Vec::new();
    let xtx = x.transpose() * x;
    let (xtx, repaired) = ensure_spd(&xtx, 1e-8);
    if repaired {
        let msg = "X'X rank-deficient; ridge-repaired".to_string();
        log::warn!("{msg}");
        notes.push(msg);
    }
    let xtx_inv = spd_inverse(&xtx).ok_or_else(|| Error::numeric("X'X inversion failed"))?;
    let yv = DVector::from_column_slice(y);
    let beta = &xtx_inv * (x.transpose() * &yv);
    let resid = &yv - x * &beta;
    let mut sigma2 = resid.norm_squared() / (n - d) as f64;
    if sigma2 < SIGMA2_FLOOR {
        let msg = format!("residual variance {sigma2:.3e} floored at {SIGMA2_FLOOR:e}");
        log::warn!("{msg}");
        notes.push(msg);
        sigma2 = SIGMA2_FLOOR;
    }
    let s0 = &xtx_inv * sigma2;
    let psi = &xtx_inv * (30.0 * sigma2);
    Ok(LddpHyperparams {
        m0: beta.iter().copied().collect(),
        s0: from_matrix(&s0),
        nu: d as f64 + 2.0,
        psi: from_matrix(&psi),
        a: 2.0,
        b: (sigma2 / 2.0).max(SIGMA2_FLOOR),
        sigma2,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ColumnMeta;
    use crate::seed::rng_from_seed;

    fn continuous(values: &[f64]) -> MixedDataset {
        let cols = vec![ColumnMeta {
            name: "v".into(),
            kind: ColumnKind::Continuous,
            categories: vec![],
        }];
        MixedDataset::new(cols, values.iter().map(|v| vec![*v]).collect()).unwrap()
    }

    #[test]
    fn constant_column() {
        let ds = continuous(&[2.5; 12]);
        let hp = derive_dpm_hyperparams(&ds, 3, 10.0, &mut rng_from_seed(0)).unwrap();
        assert_eq!(hp.m0, vec![2.5]);
        assert!(hp.s0[0][0] > 0.0);
        assert!(hp.notes.iter().any(|n| n.contains("S0")));
        hp.validate(1, &[]).unwrap();
    }

    #[test]
    fn eta_from_proportions() {
        let cols = vec![ColumnMeta {
            name: "g".into(),
            kind: ColumnKind::Categorical,
            categories: vec!["a".into(), "b".into()],
        }];
        let rows = (0..10).map(|i| vec![if i < 7 { 0.0 } else { 1.0 }]).collect();
        let ds = MixedDataset::new(cols, rows).unwrap();
        let hp = derive_dpm_hyperparams(&ds, 3, 10.0, &mut rng_from_seed(0)).unwrap();
        assert!((hp.eta[0][0] - 7.0).abs() < 1e-12);
        assert!((hp.eta[0][1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_rows() {
        let ds = continuous(&[1.0, 2.0, 3.0]);
        assert!(derive_dpm_hyperparams(&ds, 3, 10.0, &mut rng_from_seed(0)).is_err());
    }

    #[test]
    fn ols_exact_fit_floors_b() {
        let x = DMatrix::from_fn(10, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let y: Vec<f64> = (0..10).map(|i| 1.0 + 2.0 * i as f64).collect();
        let hp = derive_lddp_hyperparams(&y, &x).unwrap();
        assert!((hp.m0[0] - 1.0).abs() < 1e-9 && (hp.m0[1] - 2.0).abs() < 1e-9);
        assert_eq!(hp.b, SIGMA2_FLOOR);
        assert!(!hp.notes.is_empty());
    }

    #[test]
    fn intercept_only_design() {
        let y = [1.0, 2.0, 4.0, 5.0, 3.0, 3.0];
        let x = DMatrix::from_element(6, 1, 1.0);
        let hp = derive_lddp_hyperparams(&y, &x).unwrap();
        let mean = 3.0;
        let s2 = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 5.0;
        assert!((hp.m0[0] - mean).abs() < 1e-12);
        assert!((hp.s0[0][0] - s2 / 6.0).abs() < 1e-12);
        assert!((hp.psi[0][0] - 30.0 * s2 / 6.0).abs() < 1e-10);
        assert_eq!(hp.nu, 3.0);
        assert_eq!(hp.a, 2.0);
        assert!((hp.b - s2 / 2.0).abs() < 1e-12);
    }
}
