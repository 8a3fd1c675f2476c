//! Blocked Gibbs sampler for a truncated DPM with a Gaussian × categorical
//! product kernel and independent normal / inverse-Wishart priors.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::hyper::{split_blocks, DpmHyperparams};
use super::{
    counts, sample_allocations, sample_dirichlet, update_alpha, update_sticks, ComponentParams, DpmComponent,
    DrawsHeader, IterationState, ModelKind, PosteriorDraws,
};
use crate::data::MixedDataset;
use crate::density::Gaussian;
use crate::error::{Error, Result};
use crate::kmeans::{distinct_rows, kmeans};
use crate::linalg::{cholesky_lower, ensure_spd, sample_inverse_wishart, sample_mvn, spd_inverse};
use crate::seed::rng_from_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DpmConfig {
    pub truncation: usize,
    pub a_alpha: f64,
    pub b_alpha: f64,
    pub tau_k: f64,
    pub kmeans_k: usize,
    pub n_iter: usize,
    pub n_burn: usize,
    /// Keep every `thin`-th post-burn-in sweep.
    pub thin: usize,
    pub seed: u64,
    /// Holds every kernel covariance fixed at this matrix (skips its update).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_cov: Option<Vec<Vec<f64>>>,
}

impl Default for DpmConfig {
    fn default() -> Self {
        Self {
            truncation: 10,
            a_alpha: 2.0,
            b_alpha: 2.0,
            tau_k: 10.0,
            kmeans_k: 5,
            n_iter: 10_000,
            n_burn: 10_000,
            thin: 1,
            seed: 0,
            known_cov: None,
        }
    }
}

impl DpmConfig {
    /// Short chains for desk-scale runs.
    pub fn desk() -> Self {
        Self {
            n_iter: 1000,
            n_burn: 1000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation < 1 {
            return Err(Error::arg("truncation L must be at least 1"));
        }
        if self.n_iter < 1 || self.thin < 1 {
            return Err(Error::arg("n_iter and thin must be at least 1"));
        }
        if !(self.tau_k > 0.0 && self.a_alpha > 0.0 && self.b_alpha > 0.0) {
            return Err(Error::arg("tau_k, a_alpha and b_alpha must be positive"));
        }
        if !(3..=10).contains(&self.kmeans_k) {
            return Err(Error::arg(format!("kmeans_k = {} outside [3, 10]", self.kmeans_k)));
        }
        Ok(())
    }
}

struct Kernel {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    gauss: Option<Gaussian>,
    log_probs: Vec<Vec<f64>>,
    probs: Vec<Vec<f64>>,
}

impl Kernel {
    fn refresh(&mut self) -> bool {
        if self.mean.is_empty() {
            self.gauss = None;
            return false;
        }
        match Gaussian::new(self.mean.clone(), self.cov.clone()) {
            Ok(g) => {
                self.gauss = Some(g);
                false
            }
            Err(_) => {
                let (c, _) = ensure_spd(&self.cov, 1e-10);
                self.cov = c;
                self.gauss = Some(Gaussian::new(self.mean.clone(), self.cov.clone()).expect("repaired covariance"));
                true
            }
        }
    }

    fn log_lik(&self, y: &[f64], x: &[usize]) -> f64 {
        let mut lp = match &self.gauss {
            Some(g) => g.log_density_slice(y),
            None => 0.0,
        };
        for (j, &c) in x.iter().enumerate() {
            lp += self.log_probs[j][c];
        }
        lp
    }

    fn to_component(&self) -> DpmComponent {
        DpmComponent {
            mean: self.mean.iter().copied().collect(),
            cov: super::matrix_rows(&self.cov),
            probs: self.probs.clone(),
        }
    }
}

fn initial_allocations<R: Rng + ?Sized>(
    cont: &[Vec<f64>],
    cat: &[Vec<usize>],
    cards: &[usize],
    cfg: &DpmConfig,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = cont.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    // k-means on the continuous block, or on a one-hot coding if there is none.
    let rows: Vec<Vec<f64>> = if cont[0].is_empty() {
        cat.iter()
            .map(|r| {
                let mut v = Vec::new();
                for (j, &c) in r.iter().enumerate() {
                    v.extend((0..cards[j]).map(|h| if h == c { 1.0 } else { 0.0 }));
                }
                v
            })
            .collect()
    } else {
        cont.to_vec()
    };
    let k = cfg.kmeans_k.min(cfg.truncation).min(distinct_rows(&rows)).max(1);
    Ok(kmeans(&rows, k, rng)?.labels)
}

/// Runs `n_burn + n_iter` sweeps of the blocked Gibbs sampler on the rows of
/// `data` and returns the retained states. Continuous columns form the
/// Gaussian block and categorical columns the categorical block.
pub fn fit_dpm(data: &MixedDataset, hp: &DpmHyperparams, cfg: &DpmConfig) -> Result<PosteriorDraws> {
    cfg.validate()?;
    let (cont, cat, cards) = split_blocks(data);
    let p = data.signature().map(|s| s.p_continuous).unwrap_or(0);
    hp.validate(p, &cards)?;
    let n = cont.len();
    let l = cfg.truncation;
    if n > 0 && n < l {
        log::warn!("DPM fit with n = {n} below truncation L = {l}");
    }
    let mut rng = rng_from_seed(cfg.seed);
    let known_cov = match &cfg.known_cov {
        Some(rows) => {
            let m = DMatrix::from_fn(p, p, |i, j| rows.get(i).and_then(|r| r.get(j)).copied().unwrap_or(f64::NAN));
            if rows.len() != p || cholesky_lower(&m).is_none() {
                return Err(Error::arg("known_cov must be a p x p positive-definite matrix"));
            }
            Some(m)
        }
        None => None,
    };

    let m0 = hp.m0_vec();
    let l0 = hp.l0_mat();
    let s0 = hp.s0_mat();
    let l0_inv = if p > 0 { spd_inverse(&l0).ok_or_else(|| Error::numeric("L0 inversion failed"))? } else { l0.clone() };
    let l0_inv_m0 = &l0_inv * &m0;
    let init_cov = known_cov.clone().unwrap_or_else(|| &s0 / (hp.nu0 + p as f64 + 1.0));

    let mut z = initial_allocations(&cont, &cat, &cards, cfg, &mut rng)?;
    let mut kernels: Vec<Kernel> = (0..l)
        .map(|_| Kernel {
            mean: m0.clone(),
            cov: init_cov.clone(),
            gauss: None,
            log_probs: Vec::new(),
            probs: hp.eta.iter().map(|e| super::normalized(e)).collect(),
        })
        .collect();
    // Start the means at their cluster averages.
    for (h, kern) in kernels.iter_mut().enumerate() {
        let members: Vec<&[f64]> = cont.iter().zip(&z).filter(|(_, &zi)| zi == h).map(|(r, _)| r.as_slice()).collect();
        if !members.is_empty() && p > 0 {
            kern.mean = crate::linalg::mean_of(&members, p);
        }
    }
    let mut alpha = cfg.a_alpha / cfg.b_alpha;
    let mut repairs = 0usize;
    let total = cfg.n_burn + cfg.n_iter;
    let mut iterations = Vec::with_capacity(cfg.n_iter / cfg.thin + 1);
    let started = Instant::now();

    for sweep in 0..total {
        let cnt = counts(&z, l);
        // Sufficient statistics per component.
        let mut sums = vec![DVector::<f64>::zeros(p); l];
        let mut outer = vec![DMatrix::<f64>::zeros(p, p); l];
        let mut cat_counts: Vec<Vec<Vec<f64>>> =
            (0..l).map(|_| cards.iter().map(|&c| vec![0.0; c]).collect()).collect();
        for i in 0..n {
            let h = z[i];
            if p > 0 {
                let y = DVector::from_column_slice(&cont[i]);
                outer[h] += &y * y.transpose();
                sums[h] += y;
            }
            for (j, &c) in cat[i].iter().enumerate() {
                cat_counts[h][j][c] += 1.0;
            }
        }
        for h in 0..l {
            let kern = &mut kernels[h];
            let nh = cnt[h] as f64;
            if p > 0 {
                // Σ | μ, data ~ IW(ν0 + n_h, S0 + Σ (y − μ)(y − μ)ᵀ).
                if let Some(kc) = &known_cov {
                    kern.cov = kc.clone();
                } else {
                    let mu = &kern.mean;
                    let scatter = &outer[h] - &sums[h] * mu.transpose() - mu * sums[h].transpose()
                        + (mu * mu.transpose()) * nh;
                    let (cov, fixed) = sample_inverse_wishart(hp.nu0 + nh, &(&s0 + scatter), &mut rng);
                    repairs += fixed as usize;
                    kern.cov = cov;
                }
                // μ | Σ, data ~ N(V(L0⁻¹m0 + Σ⁻¹ s), V), V = (L0⁻¹ + n Σ⁻¹)⁻¹.
                let (cov_ok, fixed) = ensure_spd(&kern.cov, 1e-10);
                repairs += fixed as usize;
                kern.cov = cov_ok;
                let sigma_inv = spd_inverse(&kern.cov).ok_or_else(|| Error::numeric("kernel covariance inversion"))?;
                let prec = &l0_inv + &sigma_inv * nh;
                let (prec, fixed) = ensure_spd(&prec, 1e-12);
                repairs += fixed as usize;
                let v = spd_inverse(&prec).ok_or_else(|| Error::numeric("mean posterior precision inversion"))?;
                let mean = &v * (&l0_inv_m0 + &sigma_inv * &sums[h]);
                let lv = cholesky_lower(&v).unwrap_or_else(|| cholesky_lower(&ensure_spd(&v, 1e-10).0).expect("repaired"));
                kern.mean = sample_mvn(&mean, &lv, &mut rng);
            }
            // π_h^(j) ~ Dirichlet(η^(j) + counts).
            kern.probs = hp
                .eta
                .iter()
                .zip(&cat_counts[h])
                .map(|(e, c)| {
                    let a: Vec<f64> = e.iter().zip(c).map(|(a, b)| a + b).collect();
                    sample_dirichlet(&a, &mut rng)
                })
                .collect();
            kern.log_probs = kern.probs.iter().map(|v| v.iter().map(|x| x.ln()).collect()).collect();
            repairs += kern.refresh() as usize;
        }
        let (sticks, weights) = update_sticks(&cnt, alpha, &mut rng);
        alpha = update_alpha(&sticks, cfg.a_alpha, cfg.b_alpha, &mut rng);
        let log_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
        let sweep_seed: u64 = rng.random();
        z = sample_allocations(n, &log_w, sweep_seed, |i, h| kernels[h].log_lik(&cont[i], &cat[i]));

        if sweep >= cfg.n_burn && (sweep - cfg.n_burn).is_multiple_of(cfg.thin) {
            iterations.push(IterationState {
                iteration: sweep - cfg.n_burn,
                allocations: z.clone(),
                sticks,
                weights,
                alpha,
                params: ComponentParams::Dpm {
                    components: kernels.iter().map(Kernel::to_component).collect(),
                },
            });
        }
    }
    if repairs > 0 {
        log::info!("DPM fit: {repairs} covariance repairs");
    }
    let elapsed = started.elapsed().as_secs_f64();
    Ok(PosteriorDraws {
        header: DrawsHeader {
            model: ModelKind::Dpm,
            n,
            p,
            cardinalities: cards,
            truncation: l,
            config: serde_json::to_value(cfg)?,
            repairs,
            sweep_seconds: elapsed / total.max(1) as f64,
        },
        iterations,
    })
}
