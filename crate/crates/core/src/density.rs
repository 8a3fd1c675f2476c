//! Density models over mixed continuous/categorical supports.
//!
//! A point lives in `ℝ^p × S₁ × … × S_d`: a real vector plus one 0-based
//! category index per categorical variable. Densities are taken with respect
//! to the product of Lebesgue and counting measure, so a mixed model's value
//! is the Gaussian density times the categorical probability.
//!
//! Models are validated at construction (probability vectors, covariance
//! factorization) and immutable afterwards.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, log_sum_exp, symmetrize};

const PROB_TOL: f64 = 1e-12;
const LN_2PI: f64 = 1.837_877_066_409_345_5;
const STACK_DIM: usize = 32;

/// Shape of the support: number of continuous coordinates and the
/// cardinality of each categorical variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSignature {
    pub p_continuous: usize,
    pub categorical_cardinalities: Vec<usize>,
}

impl SupportSignature {
    pub fn new(p_continuous: usize, categorical_cardinalities: Vec<usize>) -> Result<Self> {
        if p_continuous == 0 && categorical_cardinalities.is_empty() {
            return Err(Error::arg("support must contain at least one variable"));
        }
        if let Some(c) = categorical_cardinalities.iter().find(|c| **c < 2) {
            return Err(Error::arg(format!("categorical cardinality {c} < 2")));
        }
        Ok(Self {
            p_continuous,
            categorical_cardinalities,
        })
    }

    pub fn n_variables(&self) -> usize {
        self.p_continuous + self.categorical_cardinalities.len()
    }

    pub fn n_categorical(&self) -> usize {
        self.categorical_cardinalities.len()
    }

    /// Size of the categorical state space, `None` on overflow.
    pub fn state_count(&self) -> Option<u64> {
        self.categorical_cardinalities
            .iter()
            .try_fold(1u64, |acc, c| acc.checked_mul(*c as u64))
    }

    /// Every categorical state in lexicographic order (last variable fastest).
    pub fn states(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for &card in &self.categorical_cardinalities {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..card).map(move |c| {
                        let mut s = prefix.clone();
                        s.push(c);
                        s
                    })
                })
                .collect();
        }
        out
    }

    fn check_point(&self, x: &MixedPoint) -> Result<()> {
        if x.continuous.len() != self.p_continuous || x.categorical.len() != self.n_categorical() {
            return Err(Error::shape(format!(
                "point has {} continuous / {} categorical entries, model expects {} / {}",
                x.continuous.len(),
                x.categorical.len(),
                self.p_continuous,
                self.n_categorical()
            )));
        }
        for (j, (&c, &card)) in x.categorical.iter().zip(&self.categorical_cardinalities).enumerate() {
            if c >= card {
                return Err(Error::shape(format!(
                    "categorical variable {j}: index {c} outside 0..{card}"
                )));
            }
        }
        Ok(())
    }
}

/// A point of the mixed support.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MixedPoint {
    #[serde(default)]
    pub continuous: Vec<f64>,
    #[serde(default)]
    pub categorical: Vec<usize>,
}

impl MixedPoint {
    pub fn continuous(values: Vec<f64>) -> Self {
        Self {
            continuous: values,
            categorical: Vec::new(),
        }
    }

    pub fn categorical(values: Vec<usize>) -> Self {
        Self {
            continuous: Vec::new(),
            categorical: values,
        }
    }
}

/// Multivariate normal with a cached lower Cholesky factor.
#[derive(Clone, Debug)]
pub struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol: DMatrix<f64>,
    log_norm: f64,
}

impl PartialEq for Gaussian {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean && self.cov == other.cov
    }
}

impl Gaussian {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let p = mean.len();
        if p == 0 {
            return Err(Error::arg("gaussian dimension must be positive"));
        }
        if cov.nrows() != p || cov.ncols() != p {
            return Err(Error::shape(format!(
                "covariance is {}x{}, mean has length {p}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("gaussian mean is not finite"));
        }
        let scale = cov.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        for i in 0..p {
            for j in 0..i {
                if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-9 * scale {
                    return Err(Error::numeric("covariance is not symmetric"));
                }
            }
        }
        let mut cov = cov;
        symmetrize(&mut cov);
        let chol = cholesky_lower(&cov).ok_or_else(|| Error::numeric("covariance is not positive definite"))?;
        let log_det_half: f64 = chol.diagonal().iter().map(|d| d.ln()).sum();
        let log_norm = -0.5 * p as f64 * LN_2PI - log_det_half;
        Ok(Self {
            mean,
            cov,
            chol,
            log_norm,
        })
    }

    pub fn from_vecs(mean: Vec<f64>, cov_rows: Vec<Vec<f64>>) -> Result<Self> {
        let p = mean.len();
        if cov_rows.len() != p || cov_rows.iter().any(|r| r.len() != p) {
            return Err(Error::shape("covariance rows do not match mean length"));
        }
        let flat: Vec<f64> = cov_rows.into_iter().flatten().collect();
        Self::new(DVector::from_vec(mean), DMatrix::from_row_slice(p, p, &flat))
    }

    pub fn univariate(mean: f64, var: f64) -> Result<Self> {
        Self::new(DVector::from_element(1, mean), DMatrix::from_element(1, 1, var))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn log_density_slice(&self, x: &[f64]) -> f64 {
        let p = self.dim();
        if p == 1 {
            let z = (x[0] - self.mean[0]) / self.chol[(0, 0)];
            return self.log_norm - 0.5 * z * z;
        }
        let mut stack = [0.0f64; STACK_DIM];
        let mut heap;
        let z: &mut [f64] = if p <= STACK_DIM {
            &mut stack[..p]
        } else {
            heap = vec![0.0; p];
            &mut heap
        };
        let mut quad = 0.0;
        for i in 0..p {
            let mut acc = x[i] - self.mean[i];
            for j in 0..i {
                acc -= self.chol[(i, j)] * z[j];
            }
            let zi = acc / self.chol[(i, i)];
            z[i] = zi;
            quad += zi * zi;
        }
        self.log_norm - 0.5 * quad
    }

    pub fn sample_vec<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let p = self.dim();
        let eps: Vec<f64> = (0..p).map(|_| StandardNormal.sample(rng)).collect();
        (0..p)
            .map(|i| self.mean[i] + (0..=i).map(|j| self.chol[(i, j)] * eps[j]).sum::<f64>())
            .collect()
    }

    /// Restriction to the listed coordinates (ascending, deduplicated).
    pub fn marginal(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::arg("marginal keep set is empty"));
        }
        if let Some(k) = keep.iter().find(|k| **k >= self.dim()) {
            return Err(Error::arg(format!("coordinate {k} out of range 0..{}", self.dim())));
        }
        let mean = DVector::from_fn(keep.len(), |i, _| self.mean[keep[i]]);
        let cov = DMatrix::from_fn(keep.len(), keep.len(), |i, j| self.cov[(keep[i], keep[j])]);
        Self::new(mean, cov)
    }

    /// Law of `A X + b`.
    pub fn affine(&self, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Self> {
        if a.ncols() != self.dim() || a.nrows() != self.dim() || b.len() != self.dim() {
            return Err(Error::shape("affine map does not match gaussian dimension"));
        }
        let mean = a * &self.mean + b;
        let mut cov = a * &self.cov * a.transpose();
        symmetrize(&mut cov);
        Self::new(mean, cov)
    }
}

/// Independent categorical variables.
#[derive(Clone, Debug)]
pub struct CategoricalProduct {
    probs: Vec<Vec<f64>>,
    log_probs: Vec<Vec<f64>>,
}

impl PartialEq for CategoricalProduct {
    fn eq(&self, other: &Self) -> bool {
        self.probs == other.probs
    }
}

pub(crate) fn validate_probability_vector(v: &[f64], what: &str) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::arg(format!("{what} is empty")));
    }
    if v.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::numeric(format!("{what} has a negative or non-finite entry")));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::numeric(format!("{what} sums to {sum}, not 1")));
    }
    Ok(v.iter().map(|p| p / sum).collect())
}

impl CategoricalProduct {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::arg("categorical product needs at least one variable"));
        }
        let mut checked = Vec::with_capacity(probs.len());
        for (j, p) in probs.iter().enumerate() {
            if p.len() < 2 {
                return Err(Error::arg(format!("categorical variable {j} has fewer than 2 categories")));
            }
            checked.push(validate_probability_vector(p, &format!("categorical variable {j}"))?);
        }
        let log_probs = checked.iter().map(|p| p.iter().map(|v| v.ln()).collect()).collect();
        Ok(Self {
            probs: checked,
            log_probs,
        })
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.probs.iter().map(Vec::len).collect()
    }

    pub fn log_prob_slice(&self, x: &[usize]) -> f64 {
        x.iter().zip(&self.log_probs).map(|(&c, lp)| lp[c]).sum()
    }

    pub fn prob(&self, x: &[usize]) -> f64 {
        x.iter().zip(&self.probs).map(|(&c, p)| p[c]).product()
    }

    pub fn sample_vec<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        self.probs.iter().map(|p| sample_categorical(p, rng)).collect()
    }

    pub fn marginal(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::arg("marginal keep set is empty"));
        }
        if let Some(k) = keep.iter().find(|k| **k >= self.probs.len()) {
            return Err(Error::arg(format!("categorical variable {k} out of range")));
        }
        Self::new(keep.iter().map(|&k| self.probs[k].clone()).collect())
    }
}

/// Index drawn proportionally to `probs` (assumed normalized).
pub fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            last_positive = i;
        }
        acc += p;
        if u < acc && *p > 0.0 {
            return i;
        }
    }
    last_positive
}

/// Finite mixture of models sharing one support signature.
#[derive(Clone, Debug)]
pub struct Mixture {
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    components: Vec<DensityModel>,
    signature: SupportSignature,
}

impl PartialEq for Mixture {
    fn eq(&self, other: &Self) -> bool {
        self.weights == other.weights && self.components == other.components
    }
}

impl Mixture {
    pub fn new(weights: Vec<f64>, components: Vec<DensityModel>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::arg("mixture needs at least one component"));
        }
        if weights.len() != components.len() {
            return Err(Error::shape(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        let weights = validate_probability_vector(&weights, "mixture weights")?;
        let signature = components[0].signature();
        if components.iter().any(|c| c.signature() != signature) {
            return Err(Error::shape("mixture components have different support signatures"));
        }
        let log_weights = weights.iter().map(|w| w.ln()).collect();
        Ok(Self {
            weights,
            log_weights,
            components,
            signature,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[DensityModel] {
        &self.components
    }
}

/// A probability model that can be evaluated and sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensitySpec", into = "DensitySpec")]
pub enum DensityModel {
    Gaussian(Gaussian),
    CategoricalProduct(CategoricalProduct),
    MixedProduct {
        continuous: Gaussian,
        discrete: CategoricalProduct,
    },
    Mixture(Mixture),
}

impl DensityModel {
    pub fn gaussian(mean: Vec<f64>, cov_rows: Vec<Vec<f64>>) -> Result<Self> {
        Ok(Self::Gaussian(Gaussian::from_vecs(mean, cov_rows)?))
    }

    pub fn normal(mean: f64, var: f64) -> Result<Self> {
        Ok(Self::Gaussian(Gaussian::univariate(mean, var)?))
    }

    pub fn categorical(probs: Vec<Vec<f64>>) -> Result<Self> {
        Ok(Self::CategoricalProduct(CategoricalProduct::new(probs)?))
    }

    pub fn mixed(continuous: Gaussian, discrete: CategoricalProduct) -> Self {
        Self::MixedProduct { continuous, discrete }
    }

    pub fn mixture(weights: Vec<f64>, components: Vec<DensityModel>) -> Result<Self> {
        Ok(Self::Mixture(Mixture::new(weights, components)?))
    }

    pub fn signature(&self) -> SupportSignature {
        match self {
            Self::Gaussian(g) => SupportSignature {
                p_continuous: g.dim(),
                categorical_cardinalities: Vec::new(),
            },
            Self::CategoricalProduct(c) => SupportSignature {
                p_continuous: 0,
                categorical_cardinalities: c.cardinalities(),
            },
            Self::MixedProduct { continuous, discrete } => SupportSignature {
                p_continuous: continuous.dim(),
                categorical_cardinalities: discrete.cardinalities(),
            },
            Self::Mixture(m) => m.signature.clone(),
        }
    }

    /// `log f(x)`; shape-checks the point first.
    pub fn log_density(&self, x: &MixedPoint) -> Result<f64> {
        self.signature().check_point(x)?;
        Ok(self.log_density_parts(&x.continuous, &x.categorical))
    }

    /// Unchecked evaluation on the two blocks of a point.
    pub fn log_density_parts(&self, cont: &[f64], cat: &[usize]) -> f64 {
        match self {
            Self::Gaussian(g) => g.log_density_slice(cont),
            Self::CategoricalProduct(c) => c.log_prob_slice(cat),
            Self::MixedProduct { continuous, discrete } => {
                continuous.log_density_slice(cont) + discrete.log_prob_slice(cat)
            }
            Self::Mixture(m) => {
                let mut stack = [0.0f64; 64];
                let mut heap;
                let terms: &mut [f64] = if m.components.len() <= 64 {
                    &mut stack[..m.components.len()]
                } else {
                    heap = vec![0.0; m.components.len()];
                    &mut heap
                };
                for ((t, lw), c) in terms.iter_mut().zip(&m.log_weights).zip(&m.components) {
                    *t = if *lw == f64::NEG_INFINITY {
                        f64::NEG_INFINITY
                    } else {
                        lw + c.log_density_parts(cont, cat)
                    };
                }
                log_sum_exp(terms)
            }
        }
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> MixedPoint {
        match self {
            Self::Gaussian(g) => MixedPoint::continuous(g.sample_vec(rng)),
            Self::CategoricalProduct(c) => MixedPoint::categorical(c.sample_vec(rng)),
            Self::MixedProduct { continuous, discrete } => MixedPoint {
                continuous: continuous.sample_vec(rng),
                categorical: discrete.sample_vec(rng),
            },
            Self::Mixture(m) => {
                let l = sample_categorical(&m.weights, rng);
                m.components[l].sample_one(rng)
            }
        }
    }

    /// `n` i.i.d. draws; mixtures use ancestral sampling.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<MixedPoint>> {
        if n == 0 {
            return Err(Error::arg("sample size must be at least 1"));
        }
        Ok((0..n).map(|_| self.sample_one(rng)).collect())
    }

    /// Marginal over the variables in `keep`, indexed continuous-first:
    /// `0..p` are the continuous coordinates, `p..p+d` the categorical ones.
    pub fn marginalize(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::arg("marginal keep set is empty"));
        }
        let sig = self.signature();
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(k) = keep.iter().find(|k| **k >= sig.n_variables()) {
            return Err(Error::arg(format!(
                "variable {k} out of range 0..{}",
                sig.n_variables()
            )));
        }
        let p = sig.p_continuous;
        let cont: Vec<usize> = keep.iter().copied().filter(|k| *k < p).collect();
        let cat: Vec<usize> = keep.iter().filter(|k| **k >= p).map(|k| k - p).collect();
        self.marginalize_split(&cont, &cat)
    }

    fn marginalize_split(&self, cont: &[usize], cat: &[usize]) -> Result<Self> {
        match self {
            Self::Gaussian(g) => Ok(Self::Gaussian(g.marginal(cont)?)),
            Self::CategoricalProduct(c) => Ok(Self::CategoricalProduct(c.marginal(cat)?)),
            Self::MixedProduct { continuous, discrete } => match (cont.is_empty(), cat.is_empty()) {
                (false, false) => Ok(Self::MixedProduct {
                    continuous: continuous.marginal(cont)?,
                    discrete: discrete.marginal(cat)?,
                }),
                (false, true) => Ok(Self::Gaussian(continuous.marginal(cont)?)),
                (true, false) => Ok(Self::CategoricalProduct(discrete.marginal(cat)?)),
                (true, true) => Err(Error::arg("marginal keep set is empty")),
            },
            Self::Mixture(m) => {
                let comps = m
                    .components
                    .iter()
                    .map(|c| c.marginalize_split(cont, cat))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Self::Mixture(Mixture::new(m.weights.clone(), comps)?))
            }
        }
    }

    /// Exact law of `A X + b` for Gaussians and (nested) mixtures of Gaussians.
    pub fn affine_pushforward(&self, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Self> {
        let sig = self.signature();
        let p = sig.p_continuous;
        if sig.n_categorical() > 0 || p == 0 {
            return Err(Error::arg("affine pushforward needs a purely continuous gaussian model"));
        }
        if a.nrows() != a.ncols() {
            return Err(Error::arg("affine map matrix is not square"));
        }
        if a.nrows() != p || b.len() != p {
            return Err(Error::shape(format!("affine map has dimension {}, model {p}", a.nrows())));
        }
        let row_scale: f64 = a.row_iter().map(|r| r.norm()).product();
        let det = a.determinant();
        if !(det.abs() > 1e-12 * row_scale) {
            return Err(Error::arg("affine map matrix is numerically singular"));
        }
        self.push_unchecked(a, b)
    }

    fn push_unchecked(&self, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Self> {
        match self {
            Self::Gaussian(g) => Ok(Self::Gaussian(g.affine(a, b)?)),
            Self::Mixture(m) => {
                let comps = m
                    .components
                    .iter()
                    .map(|c| c.push_unchecked(a, b))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Self::Mixture(Mixture::new(m.weights.clone(), comps)?))
            }
            _ => Err(Error::arg("affine pushforward needs a purely continuous gaussian model")),
        }
    }

    /// Mean of the continuous block.
    pub fn continuous_mean(&self) -> Option<DVector<f64>> {
        match self {
            Self::Gaussian(g) => Some(g.mean.clone()),
            Self::MixedProduct { continuous, .. } => Some(continuous.mean.clone()),
            Self::CategoricalProduct(_) => None,
            Self::Mixture(m) => {
                let mut acc: Option<DVector<f64>> = None;
                for (w, c) in m.weights.iter().zip(&m.components) {
                    let mu = c.continuous_mean()? * *w;
                    acc = Some(match acc {
                        Some(a) => a + mu,
                        None => mu,
                    });
                }
                acc
            }
        }
    }

    /// Covariance of the continuous block.
    pub fn continuous_cov(&self) -> Option<DMatrix<f64>> {
        match self {
            Self::Gaussian(g) => Some(g.cov.clone()),
            Self::MixedProduct { continuous, .. } => Some(continuous.cov.clone()),
            Self::CategoricalProduct(_) => None,
            Self::Mixture(m) => {
                let mean = self.continuous_mean()?;
                let p = mean.len();
                let mut acc = DMatrix::zeros(p, p);
                for (w, c) in m.weights.iter().zip(&m.components) {
                    let mu = c.continuous_mean()?;
                    let d = &mu - &mean;
                    acc += (c.continuous_cov()? + &d * d.transpose()) * *w;
                }
                Some(acc)
            }
        }
    }
}

// ---- JSON schema -------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub mean: Vec<f64>,
    /// Row-major covariance, one inner array per row.
    pub cov: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CategoricalSpec {
    pub probs: Vec<Vec<f64>>,
}

/// Wire form of [`DensityModel`], tagged by `kind`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DensitySpec {
    Gaussian(GaussianSpec),
    Catprod(CategoricalSpec),
    Mixed {
        continuous: GaussianSpec,
        discrete: CategoricalSpec,
    },
    Mixture {
        weights: Vec<f64>,
        components: Vec<DensitySpec>,
    },
}

impl From<&Gaussian> for GaussianSpec {
    fn from(g: &Gaussian) -> Self {
        let p = g.dim();
        Self {
            mean: g.mean.iter().copied().collect(),
            cov: (0..p).map(|i| (0..p).map(|j| g.cov[(i, j)]).collect()).collect(),
        }
    }
}

impl From<DensityModel> for DensitySpec {
    fn from(m: DensityModel) -> Self {
        (&m).into()
    }
}

impl From<&DensityModel> for DensitySpec {
    fn from(m: &DensityModel) -> Self {
        match m {
            DensityModel::Gaussian(g) => DensitySpec::Gaussian(g.into()),
            DensityModel::CategoricalProduct(c) => DensitySpec::Catprod(CategoricalSpec {
                probs: c.probs.clone(),
            }),
            DensityModel::MixedProduct { continuous, discrete } => DensitySpec::Mixed {
                continuous: continuous.into(),
                discrete: CategoricalSpec {
                    probs: discrete.probs.clone(),
                },
            },
            DensityModel::Mixture(mix) => DensitySpec::Mixture {
                weights: mix.weights.clone(),
                components: mix.components.iter().map(Into::into).collect(),
            },
        }
    }
}

impl TryFrom<DensitySpec> for DensityModel {
    type Error = Error;

    fn try_from(spec: DensitySpec) -> Result<Self> {
        match spec {
            DensitySpec::Gaussian(g) => DensityModel::gaussian(g.mean, g.cov),
            DensitySpec::Catprod(c) => DensityModel::categorical(c.probs),
            DensitySpec::Mixed { continuous, discrete } => Ok(DensityModel::MixedProduct {
                continuous: Gaussian::from_vecs(continuous.mean, continuous.cov)?,
                discrete: CategoricalProduct::new(discrete.probs)?,
            }),
            DensitySpec::Mixture { weights, components } => {
                let comps = components
                    .into_iter()
                    .map(DensityModel::try_from)
                    .collect::<Result<Vec<_>>>()?;
                DensityModel::mixture(weights, comps)
            }
        }
    }
}
