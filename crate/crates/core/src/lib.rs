//! Generalized underlap coefficient (UNL) estimation and its use as a
//! partition–covariate dependence diagnostic for Bayesian model-based
//! clustering.
//!
//! The crate is organised bottom-up:
//!
//! - [`density`]: evaluable and sampleable density models (Gaussian,
//!   categorical product, mixed product, finite mixtures).
//! - [`unl`]: the importance-sampling UNL estimator, exact and quadrature
//!   oracles, the variance bound and total-variation identities.
//! - [`mi`]: Monte Carlo mutual information and `MI_Z` for comparison curves.
//! - [`mixtures`]: truncated blocked Gibbs samplers for the DPM and LDDP
//!   models plus hyperparameter derivation and posterior predictive draws.
//! - [`partitions`]: posterior similarity matrices and the VI-bound
//!   representative partition.
//! - [`data`], [`simulate`] and [`pipeline`]: dataset ingestion, example
//!   generators and the end-to-end workflows behind the `underlap` binary.

pub mod data;
pub mod density;
pub mod error;
pub mod kmeans;
pub mod linalg;
pub mod mi;
pub mod mixtures;
pub mod partitions;
pub mod pipeline;
pub mod seed;
pub mod simulate;
pub mod unl;

pub use data::{ColumnKind, MixedDataset};
pub use density::{DensityModel, MixedPoint, SupportSignature};
pub use error::{Error, Result};
pub use mixtures::PosteriorDraws;
pub use partitions::{Partition, SimilarityMatrix};
pub use unl::{UnlEstimate, UnlPosterior};
