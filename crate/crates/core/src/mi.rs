//! Mutual information between a group label and a variable, and the
//! normalized `MI_Z = I(Z;X) / H(Z)`, in nats.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{sample_categorical, validate_probability_vector, DensityModel};
use crate::error::{Error, Result};
use crate::linalg::log_sum_exp;
use crate::seed::derived_rng;
use crate::unl::{estimate_unl, variance_bound};

/// Joint law `p(k, x) = π_k f_k(x)`.
#[derive(Clone, Debug)]
pub struct LabeledMixture {
    priors: Vec<f64>,
    groups: Vec<DensityModel>,
}

impl LabeledMixture {
    pub fn new(priors: Vec<f64>, groups: Vec<DensityModel>) -> Result<Self> {
        if priors.len() != groups.len() {
            return Err(Error::shape(format!("{} priors for {} groups", priors.len(), groups.len())));
        }
        if groups.is_empty() {
            return Err(Error::arg("labeled mixture needs at least one group"));
        }
        let priors = validate_probability_vector(&priors, "label priors")?;
        let sig = groups[0].signature();
        if groups.iter().any(|g| g.signature() != sig) {
            return Err(Error::shape("groups have different support signatures"));
        }
        Ok(Self { priors, groups })
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn groups(&self) -> &[DensityModel] {
        &self.groups
    }
}

/// Shannon entropy `−Σ π log π` in nats, with `0 log 0 = 0`.
pub fn entropy_labels(priors: &[f64]) -> f64 {
    -priors
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    /// Clipped below at zero.
    pub value: f64,
    pub raw: f64,
    pub stderr: f64,
}

/// Averages `log f_z(x) − log p_X(x)` over `m` draws of `(z, x)` from the joint.
pub fn mutual_information_estimate<R: Rng + ?Sized>(
    model: &LabeledMixture,
    m: usize,
    rng: &mut R,
) -> Result<MiEstimate> {
    if m == 0 {
        return Err(Error::arg("number of draws must be at least 1"));
    }
    let log_priors: Vec<f64> = model.priors.iter().map(|p| p.ln()).collect();
    let mut terms = vec![0.0; model.groups.len()];
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for _ in 0..m {
        let z = sample_categorical(&model.priors, rng);
        let x = model.groups[z].sample_one(rng);
        let mut own = 0.0;
        for (k, (t, g)) in terms.iter_mut().zip(&model.groups).enumerate() {
            let lf = g.log_density_parts(&x.continuous, &x.categorical);
            if k == z {
                own = lf;
            }
            *t = if log_priors[k] == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                log_priors[k] + lf
            };
        }
        let v = own - log_sum_exp(&terms);
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / m as f64;
    let var = if m > 1 {
        ((sum_sq - m as f64 * mean * mean) / (m - 1) as f64).max(0.0)
    } else {
        0.0
    };
    Ok(MiEstimate {
        value: mean.max(0.0),
        raw: mean,
        stderr: (var / m as f64).sqrt(),
    })
}

/// `I(Z;X)` in nats, clipped at zero.
pub fn mutual_information<R: Rng + ?Sized>(model: &LabeledMixture, m: usize, rng: &mut R) -> Result<f64> {
    mutual_information_estimate(model, m, rng).map(|e| e.value)
}

/// `mi / H(Z)`, clamped to `[0, 1 + 1e-6]`.
pub fn normalized_mi_z(mi: f64, priors: &[f64]) -> Result<f64> {
    let h = entropy_labels(priors);
    if h <= 0.0 {
        return Err(Error::arg("label entropy is zero; MI_Z is undefined"));
    }
    Ok((mi / h).clamp(0.0, 1.0 + 1e-6))
}

/// Location family for the three-group unit-variance normal comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveFamily {
    /// Means `(−D, 0, D)`.
    Symmetric,
    /// Means `(−0.1, 0, D)`.
    Shifted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prevalence {
    /// `(1/3, 1/3, 1/3)`.
    Balanced,
    /// Two common groups at 0.495 and one rare group at 0.01. The rare group
    /// is the centre one in the symmetric family and the displaced one in
    /// the shifted family.
    Imbalanced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveScenario {
    pub family: CurveFamily,
    pub prevalence: Prevalence,
}

impl CurveScenario {
    pub fn means(&self, d: f64) -> [f64; 3] {
        match self.family {
            CurveFamily::Symmetric => [-d, 0.0, d],
            CurveFamily::Shifted => [-0.1, 0.0, d],
        }
    }

    pub fn priors(&self) -> [f64; 3] {
        match (self.prevalence, self.family) {
            (Prevalence::Balanced, _) => [1.0 / 3.0; 3],
            (Prevalence::Imbalanced, CurveFamily::Symmetric) => [0.495, 0.01, 0.495],
            (Prevalence::Imbalanced, CurveFamily::Shifted) => [0.495, 0.495, 0.01],
        }
    }

    pub fn groups(&self, d: f64) -> Result<Vec<DensityModel>> {
        self.means(d).iter().map(|m| DensityModel::normal(*m, 1.0)).collect()
    }
}

/// One row of a UNL-vs-MI curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    #[serde(rename = "D")]
    pub d: f64,
    pub unl: f64,
    /// `sqrt(UNL (K − UNL) / M)`.
    pub unl_stderr_bound: f64,
    pub mi_z: f64,
    /// Clipped mutual information in nats (not part of the CSV layout).
    #[serde(skip)]
    pub mi: f64,
}

/// UNL and `MI_Z` across `d_grid`; grid point `i` uses streams `2i` and
/// `2i + 1` of `seed`.
pub fn mi_unl_curve(scenario: CurveScenario, d_grid: &[f64], m: usize, seed: u64) -> Result<Vec<CurveRow>> {
    if d_grid.is_empty() {
        return Err(Error::arg("empty D grid"));
    }
    if m == 0 {
        return Err(Error::arg("number of draws must be at least 1"));
    }
    let priors = scenario.priors().to_vec();
    d_grid
        .par_iter()
        .enumerate()
        .map(|(i, &d)| {
            let groups = scenario.groups(d)?;
            let est = estimate_unl(&groups, m, &mut derived_rng(seed, 2 * i as u64))?;
            let model = LabeledMixture::new(priors.clone(), groups)?;
            let mi = mutual_information(&model, m, &mut derived_rng(seed, 2 * i as u64 + 1))?;
            Ok(CurveRow {
                d,
                unl: est.value,
                unl_stderr_bound: variance_bound(3, est.value, m)?.sqrt(),
                mi_z: normalized_mi_z(mi, &priors)?,
                mi,
            })
        })
        .collect()
}

/// Writes columns `D, unl, unl_stderr_bound, mi_z`, plus a trailing `mi`
/// column in the given unit when `mi_unit` is set.
pub fn write_curve_csv<W: std::io::Write>(rows: &[CurveRow], mi_unit: Option<MiUnit>, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["D", "unl", "unl_stderr_bound", "mi_z"];
    if mi_unit.is_some() {
        header.push("mi");
    }
    out.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.d.to_string(), r.unl.to_string(), r.unl_stderr_bound.to_string(), r.mi_z.to_string()];
        if let Some(unit) = mi_unit {
            rec.push(unit.convert(r.mi).to_string());
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MiUnit {
    Nats,
    Bits,
}

impl MiUnit {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            MiUnit::Nats => nats,
            MiUnit::Bits => nats / std::f64::consts::LN_2,
        }
    }
}
