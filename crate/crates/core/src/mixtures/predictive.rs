//! Posterior predictive replicates and summary statistics for predictive checks.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{ComponentParams, ModelKind, PosteriorDraws};
use crate::density::{sample_categorical, MixedPoint};
use crate::error::{Error, Result};

/// Draws `n_rep` replicated datasets. Each replicate picks a retained
/// iteration uniformly, then per observation a component by its weight, then
/// a kernel draw. DPM replicates have the fitted sample size; LDDP replicates
/// have one response (as a 1-D point) per row of `x_new`.
pub fn posterior_predictive<R: Rng + ?Sized>(
    draws: &PosteriorDraws,
    x_new: Option<&DMatrix<f64>>,
    n_rep: usize,
    rng: &mut R,
) -> Result<Vec<Vec<MixedPoint>>> {
    match (draws.header.model, x_new) {
        (ModelKind::Dpm, Some(_)) => return Err(Error::arg("x_new is not accepted for DPM draws")),
        (ModelKind::Lddp, None) => return Err(Error::arg("x_new is required for LDDP draws")),
        (ModelKind::Lddp, Some(x)) if x.ncols() != draws.header.p => {
            return Err(Error::shape(format!("x_new has {} columns, fit used {}", x.ncols(), draws.header.p)))
        }
        _ => {}
    }
    if n_rep == 0 {
        return Ok(Vec::new());
    }
    if draws.is_empty() {
        return Err(Error::arg("no retained iterations"));
    }
    let mut out = Vec::with_capacity(n_rep);
    for _ in 0..n_rep {
        let s = rng.random_range(0..draws.len());
        let it = &draws.iterations[s];
        let weights = super::normalized(&it.weights);
        match &it.params {
            ComponentParams::Dpm { .. } => {
                let mix = draws.mixture_at(s)?;
                out.push(mix.sample(rng, draws.header.n.max(1))?);
            }
            ComponentParams::Lddp { components, .. } => {
                let x = x_new.expect("checked above");
                let rep = (0..x.nrows())
                    .map(|i| {
                        let c = &components[sample_categorical(&weights, rng)];
                        let mean: f64 = x.row(i).iter().zip(&c.beta).map(|(a, b)| a * b).sum();
                        let sd = (1.0 / c.precision).sqrt();
                        let y = Normal::new(mean, sd).map(|d| d.sample(rng)).unwrap_or(mean);
                        MixedPoint::continuous(vec![y])
                    })
                    .collect();
                out.push(rep);
            }
        }
    }
    Ok(out)
}

/// Moment summaries used in predictive checks. Kurtosis is the standardized
/// fourth moment (3 for a normal law).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PpcStats {
    pub mean: f64,
    pub sd: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub max: f64,
}

impl PpcStats {
    pub fn of(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::arg("predictive statistics need at least two values"));
        }
        let nf = n as f64;
        let mean = values.iter().sum::<f64>() / nf;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for v in values {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        m2 /= nf;
        m3 /= nf;
        m4 /= nf;
        let (skewness, kurtosis) = if m2 > 0.0 { (m3 / m2.powf(1.5), m4 / (m2 * m2)) } else { (0.0, 0.0) };
        Ok(Self {
            mean,
            sd: (m2 * nf / (nf - 1.0)).sqrt(),
            skewness,
            kurtosis,
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Response samples restricted to one covariate interval `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalSamples {
    pub lo: f64,
    pub hi: f64,
    pub observed: Vec<f64>,
    pub replicated: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PpcReport {
    pub observed: PpcStats,
    pub replicates: Vec<PpcStats>,
    /// Fraction of replicates whose statistic is at least the observed one,
    /// in the order mean, sd, skewness, kurtosis, max.
    pub upper_tail: [f64; 5],
    pub intervals: Vec<IntervalSamples>,
}

/// Empirical quantile by linear interpolation of the sorted sample.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Compares the observed response with replicated responses. `covariate`
/// (with optional interior cutoffs, default quartiles) bins rows for
/// interval-wise samples; at most `pooled` replicates are pooled per interval.
pub fn ppc_report(
    observed: &[f64],
    replicates: &[Vec<f64>],
    covariate: Option<(&[f64], Option<Vec<f64>>)>,
    pooled: usize,
) -> Result<PpcReport> {
    let obs = PpcStats::of(observed)?;
    let reps = replicates.iter().map(|r| PpcStats::of(r)).collect::<Result<Vec<_>>>()?;
    let mut upper_tail = [0.0; 5];
    if !reps.is_empty() {
        let key = |s: &PpcStats| [s.mean, s.sd, s.skewness, s.kurtosis, s.max];
        let o = key(&obs);
        for r in &reps {
            for (t, (rv, ov)) in upper_tail.iter_mut().zip(key(r).iter().zip(o)) {
                if *rv >= ov {
                    *t += 1.0;
                }
            }
        }
        for t in upper_tail.iter_mut() {
            *t /= reps.len() as f64;
        }
    }
    let mut intervals = Vec::new();
    if let Some((cov, cutoffs)) = covariate {
        if cov.len() != observed.len() || replicates.iter().any(|r| r.len() != cov.len()) {
            return Err(Error::shape("covariate, observed and replicated lengths differ"));
        }
        let cuts = match cutoffs {
            Some(c) => c,
            None => {
                let mut s = cov.to_vec();
                s.sort_by(f64::total_cmp);
                vec![quantile(&s, 0.25), quantile(&s, 0.5), quantile(&s, 0.75)]
            }
        };
        let mut edges = vec![f64::NEG_INFINITY];
        edges.extend(cuts);
        edges.push(f64::INFINITY);
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let rows: Vec<usize> = (0..cov.len()).filter(|&i| cov[i] >= lo && cov[i] < hi).collect();
            intervals.push(IntervalSamples {
                lo,
                hi,
                observed: rows.iter().map(|&i| observed[i]).collect(),
                replicated: replicates.iter().take(pooled).flat_map(|r| rows.iter().map(move |&i| r[i])).collect(),
            });
        }
    }
    Ok(PpcReport {
        observed: obs,
        replicates: reps,
        upper_tail,
        intervals,
    })
}
