//! Truncated blocked Gibbs samplers for Dirichlet process mixtures.
//!
//! Two models share the stick-breaking machinery here:
//!
//! - [`dpm`]: Gaussian × categorical product kernel on a mixed response.
//! - [`lddp`]: single-weights mixture of linear regressions.
//!
//! Retained Gibbs states are stored in [`PosteriorDraws`] and serialize to a
//! newline-delimited JSON stream whose first line is a [`DrawsHeader`].

pub mod covariates;
pub mod dpm;
pub mod hyper;
pub mod lddp;
pub mod predictive;

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{CategoricalProduct, DensityModel, Gaussian};
use crate::error::{Error, Result};
use crate::seed::derived_rng;

pub use covariates::{cluster_covariate_densities, CovariateFit};
pub use dpm::{fit_dpm, DpmConfig};
pub use hyper::{derive_dpm_hyperparams, derive_lddp_hyperparams, DpmHyperparams, LddpHyperparams};
pub use lddp::{design_matrix, fit_lddp, LddpConfig};
pub use predictive::{posterior_predictive, PpcStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Dpm,
    Lddp,
}

/// Parameters of one DPM kernel: Gaussian block and per-variable category
/// probabilities. Either block may be empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpmComponent {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub probs: Vec<Vec<f64>>,
}

impl DpmComponent {
    pub fn to_density(&self) -> Result<DensityModel> {
        let cont = if self.mean.is_empty() {
            None
        } else {
            Some(Gaussian::from_vecs(self.mean.clone(), self.cov.clone())?)
        };
        let disc = if self.probs.is_empty() {
            None
        } else {
            Some(CategoricalProduct::new(self.probs.clone())?)
        };
        Ok(match (cont, disc) {
            (Some(g), Some(c)) => DensityModel::mixed(g, c),
            (Some(g), None) => DensityModel::Gaussian(g),
            (None, Some(c)) => DensityModel::CategoricalProduct(c),
            (None, None) => return Err(Error::shape("component has no variables")),
        })
    }
}

/// Regression coefficients and residual precision of one LDDP component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LddpComponent {
    pub beta: Vec<f64>,
    pub precision: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ComponentParams {
    Dpm {
        components: Vec<DpmComponent>,
    },
    Lddp {
        components: Vec<LddpComponent>,
        base_mean: Vec<f64>,
        base_cov: Vec<Vec<f64>>,
    },
}

/// One retained Gibbs state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationState {
    /// Sweep index counted from the first post-burn-in sweep.
    pub iteration: usize,
    /// 0-based component index per observation.
    pub allocations: Vec<usize>,
    pub sticks: Vec<f64>,
    pub weights: Vec<f64>,
    pub alpha: f64,
    pub params: ComponentParams,
}

impl IterationState {
    pub fn occupied(&self) -> usize {
        let mut seen = vec![false; self.weights.len()];
        for &z in &self.allocations {
            seen[z] = true;
        }
        seen.iter().filter(|s| **s).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrawsHeader {
    pub model: ModelKind,
    pub n: usize,
    /// Continuous dimension (DPM) or design width including intercept (LDDP).
    pub p: usize,
    #[serde(default)]
    pub cardinalities: Vec<usize>,
    pub truncation: usize,
    pub config: serde_json::Value,
    /// Covariance draws that needed a ridge repair.
    pub repairs: usize,
    pub sweep_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    pub header: DrawsHeader,
    pub iterations: Vec<IterationState>,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    pub fn allocations(&self) -> Vec<Vec<usize>> {
        self.iterations.iter().map(|it| it.allocations.clone()).collect()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.iterations.iter().map(|it| it.alpha).collect()
    }

    /// Number of occupied components per retained iteration.
    pub fn occupied_counts(&self) -> Vec<usize> {
        self.iterations.iter().map(IterationState::occupied).collect()
    }

    /// The DPM state at retained iteration `s` as a finite mixture density.
    pub fn mixture_at(&self, s: usize) -> Result<DensityModel> {
        let it = self
            .iterations
            .get(s)
            .ok_or_else(|| Error::arg(format!("iteration {s} out of range")))?;
        match &it.params {
            ComponentParams::Dpm { components } => {
                let comps = components.iter().map(DpmComponent::to_density).collect::<Result<Vec<_>>>()?;
                DensityModel::mixture(normalized(&it.weights), comps)
            }
            ComponentParams::Lddp { .. } => Err(Error::arg("LDDP draws define conditional densities only")),
        }
    }

    pub fn write_ndjson<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer(&mut w, &self.header)?;
        writeln!(w)?;
        for it in &self.iterations {
            serde_json::to_writer(&mut w, it)?;
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_ndjson<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let first = lines.next().ok_or_else(|| Error::arg("draws stream is empty"))??;
        let header: DrawsHeader = serde_json::from_str(&first)?;
        let mut iterations = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            iterations.push(serde_json::from_str(&line)?);
        }
        Ok(Self { header, iterations })
    }
}

/// Renormalizes weights so the mixture constructor's 1e-12 check holds after
/// floating-point accumulation.
pub(crate) fn normalized(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

pub(crate) fn counts(allocations: &[usize], l: usize) -> Vec<usize> {
    let mut c = vec![0; l];
    for &z in allocations {
        c[z] += 1;
    }
    c
}

const STICK_EPS: f64 = 1e-12;

/// Draws `v_l ~ Beta(1 + n_l, α + Σ_{m>l} n_m)` for `l < L` with `v_L = 1`,
/// returning sticks and weights `w_l = v_l Π_{m<l}(1 − v_m)`.
pub(crate) fn update_sticks<R: Rng + ?Sized>(counts: &[usize], alpha: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let l = counts.len();
    let mut tail: usize = counts.iter().sum();
    let mut v = vec![1.0; l];
    for h in 0..l.saturating_sub(1) {
        tail -= counts[h];
        let beta = Beta::new(1.0 + counts[h] as f64, alpha + tail as f64).expect("positive beta parameters");
        v[h] = beta.sample(rng).clamp(STICK_EPS, 1.0 - STICK_EPS);
    }
    let mut w = vec![0.0; l];
    let mut rest = 1.0;
    for h in 0..l {
        w[h] = v[h] * rest;
        rest *= 1.0 - v[h];
    }
    (v, w)
}

/// Draws `α ~ Gamma(a + L − 1, rate b − Σ_{l<L} log(1 − v_l))`.
pub(crate) fn update_alpha<R: Rng + ?Sized>(sticks: &[f64], a: f64, b: f64, rng: &mut R) -> f64 {
    let l = sticks.len();
    let s: f64 = sticks[..l.saturating_sub(1)].iter().map(|v| (1.0 - v).ln()).sum();
    let shape = a + (l as f64) - 1.0;
    let rate = b - s;
    Gamma::new(shape, 1.0 / rate).expect("positive gamma parameters").sample(rng).max(1e-300)
}

/// Draws `z_i ∝ exp(log w_l + loglik(i, l))` for every observation. Rows are
/// processed in fixed chunks, each with a generator derived from
/// `sweep_seed`, so the result does not depend on the worker count.
pub(crate) fn sample_allocations<F>(n: usize, log_w: &[f64], sweep_seed: u64, loglik: F) -> Vec<usize>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    const CHUNK: usize = 128;
    let l = log_w.len();
    let mut z = vec![0; n];
    z.par_chunks_mut(CHUNK).enumerate().for_each(|(c, out)| {
        let mut rng = derived_rng(sweep_seed, c as u64);
        let mut lp = vec![0.0; l];
        for (k, zi) in out.iter_mut().enumerate() {
            let i = c * CHUNK + k;
            let mut max = f64::NEG_INFINITY;
            for h in 0..l {
                lp[h] = log_w[h] + loglik(i, h);
                if lp[h] > max {
                    max = lp[h];
                }
            }
            if !max.is_finite() {
                // Every component gives zero likelihood; fall back to the weights.
                for h in 0..l {
                    lp[h] = log_w[h];
                }
                max = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            }
            let mut total = 0.0;
            for v in lp.iter_mut() {
                *v = (*v - max).exp();
                total += *v;
            }
            let mut u = rng.random::<f64>() * total;
            let mut pick = l - 1;
            for (h, v) in lp.iter().enumerate() {
                if u < *v {
                    pick = h;
                    break;
                }
                u -= v;
            }
            *zi = pick;
        }
    });
    z
}

/// Draws a Dirichlet vector by normalized gammas, flooring entries so that
/// every category keeps a finite log-probability.
pub(crate) fn sample_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Vec<f64> {
    let mut g: Vec<f64> = alpha
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("positive dirichlet parameter").sample(rng).max(1e-300))
        .collect();
    let s: f64 = g.iter().sum();
    for v in g.iter_mut() {
        *v /= s;
    }
    g
}

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}
