//! Blocked Gibbs sampler for the truncated single-weights LDDP: a
//! stick-breaking mixture of Gaussian linear regressions whose coefficients
//! share a normal base measure with normal / inverse-Wishart hyperpriors.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::hyper::LddpHyperparams;
use super::{
    counts, sample_allocations, update_alpha, update_sticks, ComponentParams, DrawsHeader, IterationState,
    LddpComponent, ModelKind, PosteriorDraws,
};
use crate::data::{ColumnKind, MixedDataset};
use crate::error::{Error, Result};
use crate::kmeans::{distinct_rows, kmeans};
use crate::linalg::{cholesky_lower, ensure_spd, sample_inverse_wishart, sample_mvn, spd_inverse};
use crate::seed::rng_from_seed;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LddpConfig {
    pub truncation: usize,
    pub a_alpha: f64,
    pub b_alpha: f64,
    pub n_iter: usize,
    pub n_burn: usize,
    pub thin: usize,
    pub seed: u64,
    /// Clusters used by the k-means initialisation (capped at `truncation`).
    pub init_k: usize,
    /// Holds every residual precision fixed at this value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_precision: Option<f64>,
    /// Holds the base measure at `μ = m0`, `Σ = Ψ` instead of sampling it.
    pub fix_base: bool,
}

impl Default for LddpConfig {
    fn default() -> Self {
        Self {
            truncation: 20,
            a_alpha: 2.0,
            b_alpha: 2.0,
            n_iter: 10_000,
            n_burn: 10_000,
            thin: 1,
            seed: 0,
            init_k: 10,
            known_precision: None,
            fix_base: false,
        }
    }
}

impl LddpConfig {
    pub fn desk() -> Self {
        Self {
            n_iter: 1000,
            n_burn: 1000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation < 1 || self.n_iter < 1 || self.thin < 1 || self.init_k < 1 {
            return Err(Error::arg("truncation, n_iter, thin and init_k must be at least 1"));
        }
        if !(self.a_alpha > 0.0 && self.b_alpha > 0.0) {
            return Err(Error::arg("a_alpha and b_alpha must be positive"));
        }
        if let Some(t) = self.known_precision {
            if !(t > 0.0) {
                return Err(Error::arg("known_precision must be positive"));
            }
        }
        Ok(())
    }
}

/// Builds the regression design: an intercept column, the continuous
/// covariates as-is and dummy codes for categorical covariates (first level
/// dropped). Returns the matrix and its column labels.
pub fn design_matrix(data: &MixedDataset, covariates: &[&str]) -> Result<(DMatrix<f64>, Vec<String>)> {
    let n = data.n_rows();
    let mut names = vec!["(intercept)".to_string()];
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; n]];
    for name in covariates {
        let meta = data.column(name)?;
        match meta.kind {
            ColumnKind::Continuous => {
                cols.push(data.continuous_column(name)?);
                names.push(name.to_string());
            }
            ColumnKind::Categorical => {
                let codes = data.categorical_column(name)?;
                for (c, label) in meta.categories.iter().enumerate().skip(1) {
                    cols.push(codes.iter().map(|&v| if v == c { 1.0 } else { 0.0 }).collect());
                    names.push(format!("{name}={label}"));
                }
            }
        }
    }
    let x = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
    Ok((x, names))
}

fn initial_allocations<R: Rng + ?Sized>(y: &[f64], x: &DMatrix<f64>, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let n = y.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    // Standardized non-constant design columns plus the response.
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for j in 0..x.ncols() {
        let c: Vec<f64> = x.column(j).iter().copied().collect();
        cols.push(c);
    }
    cols.push(y.to_vec());
    let cols: Vec<Vec<f64>> = cols
        .into_iter()
        .filter_map(|c| {
            let m = c.iter().sum::<f64>() / n as f64;
            let sd = (c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64).sqrt();
            (sd > 0.0).then(|| c.iter().map(|v| (v - m) / sd).collect())
        })
        .collect();
    if cols.is_empty() {
        return Ok(vec![0; n]);
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    let k = k.min(distinct_rows(&rows)).max(1);
    Ok(kmeans(&rows, k, rng)?.labels)
}

/// Runs `n_burn + n_iter` blocked Gibbs sweeps for `y ~ Σ w_l N(xᵀβ_l, 1/τ_l)`.
///
/// The base-measure covariance prior is `Σ ~ IW(ν, νΨ)` with `νΨ` as the
/// inverse-Wishart scale, so that `E[Σ⁻¹] = Ψ⁻¹`.
pub fn fit_lddp(y: &[f64], x: &DMatrix<f64>, hp: &LddpHyperparams, cfg: &LddpConfig) -> Result<PosteriorDraws> {
    cfg.validate()?;
    let (n, d) = x.shape();
    if y.len() != n {
        return Err(Error::shape(format!("y has {} entries, design has {n} rows", y.len())));
    }
    hp.validate(d)?;
    let l = cfg.truncation;
    let mut rng = rng_from_seed(cfg.seed);

    let m0 = hp.m0_vec();
    let s0 = hp.s0_mat();
    let s0_inv = spd_inverse(&s0).ok_or_else(|| Error::numeric("S0 inversion failed"))?;
    let s0_inv_m0 = &s0_inv * &m0;
    let iw_scale = hp.psi_mat() * hp.nu;
    let rows: Vec<DVector<f64>> = (0..n).map(|i| x.row(i).transpose()).collect();

    let mut mu = m0.clone();
    let mut sigma = hp.psi_mat();
    let init_tau = cfg.known_precision.unwrap_or(1.0 / hp.sigma2);
    let mut comps: Vec<LddpComponent> = (0..l)
        .map(|_| LddpComponent {
            beta: hp.m0.clone(),
            precision: init_tau,
        })
        .collect();
    let mut z = initial_allocations(y, x, cfg.init_k.min(l), &mut rng)?;
    let mut alpha = cfg.a_alpha / cfg.b_alpha;
    let mut repairs = 0usize;
    let total = cfg.n_burn + cfg.n_iter;
    let mut iterations = Vec::with_capacity(cfg.n_iter / cfg.thin + 1);
    let started = Instant::now();

    for sweep in 0..total {
        let cnt = counts(&z, l);
        let mut xtx = vec![DMatrix::<f64>::zeros(d, d); l];
        let mut xty = vec![DVector::<f64>::zeros(d); l];
        let mut yy = vec![0.0; l];
        for i in 0..n {
            let h = z[i];
            xtx[h] += &rows[i] * rows[i].transpose();
            xty[h] += &rows[i] * y[i];
            yy[h] += y[i] * y[i];
        }
        let (sigma_ok, fixed) = ensure_spd(&sigma, 1e-10);
        repairs += fixed as usize;
        sigma = sigma_ok;
        let sigma_inv = spd_inverse(&sigma).ok_or_else(|| Error::numeric("base covariance inversion"))?;
        let sigma_inv_mu = &sigma_inv * &mu;
        let mut beta_sum = DVector::<f64>::zeros(d);
        let mut betas = Vec::with_capacity(l);
        for h in 0..l {
            let tau = comps[h].precision;
            // β_h | τ_h, μ, Σ, data ~ N(V(Σ⁻¹μ + τ Xᵀy), V), V = (Σ⁻¹ + τ XᵀX)⁻¹.
            let prec = &sigma_inv + &xtx[h] * tau;
            let (prec, fixed) = ensure_spd(&prec, 1e-12);
            repairs += fixed as usize;
            let v = spd_inverse(&prec).ok_or_else(|| Error::numeric("coefficient precision inversion"))?;
            let mean = &v * (&sigma_inv_mu + &xty[h] * tau);
            let lv = cholesky_lower(&v).unwrap_or_else(|| cholesky_lower(&ensure_spd(&v, 1e-10).0).expect("repaired"));
            let beta = sample_mvn(&mean, &lv, &mut rng);
            // τ_h | β_h, data ~ Gamma(a + n_h/2, rate b + SSR/2).
            let ssr = (yy[h] - 2.0 * beta.dot(&xty[h]) + (beta.transpose() * &xtx[h] * &beta)[(0, 0)]).max(0.0);
            let tau = match cfg.known_precision {
                Some(t) => t,
                None => {
                    let shape = hp.a + cnt[h] as f64 / 2.0;
                    let rate = hp.b + ssr / 2.0;
                    Gamma::new(shape, 1.0 / rate).expect("positive gamma parameters").sample(&mut rng).max(1e-300)
                }
            };
            beta_sum += &beta;
            comps[h] = LddpComponent {
                beta: beta.iter().copied().collect(),
                precision: tau,
            };
            betas.push(beta);
        }
        if !cfg.fix_base {
            // μ | β, Σ ~ N(W(S0⁻¹m0 + Σ⁻¹Σβ), W), W = (S0⁻¹ + LΣ⁻¹)⁻¹.
            let prec = &s0_inv + &sigma_inv * l as f64;
            let w = spd_inverse(&prec).ok_or_else(|| Error::numeric("base mean precision inversion"))?;
            let mean = &w * (&s0_inv_m0 + &sigma_inv * &beta_sum);
            let lw = cholesky_lower(&w).unwrap_or_else(|| cholesky_lower(&ensure_spd(&w, 1e-10).0).expect("repaired"));
            mu = sample_mvn(&mean, &lw, &mut rng);
            // Σ | β, μ ~ IW(ν + L, νΨ + Σ(β − μ)(β − μ)ᵀ).
            let mut scatter = iw_scale.clone();
            for b in &betas {
                let dlt = b - &mu;
                scatter += &dlt * dlt.transpose();
            }
            let (s, fixed) = sample_inverse_wishart(hp.nu + l as f64, &scatter, &mut rng);
            repairs += fixed as usize;
            sigma = s;
        }
        let (sticks, weights) = update_sticks(&cnt, alpha, &mut rng);
        alpha = update_alpha(&sticks, cfg.a_alpha, cfg.b_alpha, &mut rng);
        let log_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
        let sweep_seed: u64 = rng.random();
        let half_log_tau: Vec<f64> = comps.iter().map(|c| 0.5 * (c.precision.ln() - LN_2PI)).collect();
        z = sample_allocations(n, &log_w, sweep_seed, |i, h| {
            let r = y[i] - rows[i].dot(&betas[h]);
            half_log_tau[h] - 0.5 * comps[h].precision * r * r
        });

        if sweep >= cfg.n_burn && (sweep - cfg.n_burn).is_multiple_of(cfg.thin) {
            iterations.push(IterationState {
                iteration: sweep - cfg.n_burn,
                allocations: z.clone(),
                sticks,
                weights,
                alpha,
                params: ComponentParams::Lddp {
                    components: comps.clone(),
                    base_mean: mu.iter().copied().collect(),
                    base_cov: super::matrix_rows(&sigma),
                },
            });
        }
    }
    if repairs > 0 {
        log::info!("LDDP fit: {repairs} covariance repairs");
    }
    let elapsed = started.elapsed().as_secs_f64();
    Ok(PosteriorDraws {
        header: DrawsHeader {
            model: ModelKind::Lddp,
            n,
            p: d,
            cardinalities: Vec::new(),
            truncation: l,
            config: serde_json::to_value(cfg)?,
            repairs,
            sweep_seconds: elapsed / total.max(1) as f64,
        },
        iterations,
    })
}
