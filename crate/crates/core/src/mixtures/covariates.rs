//! Per-cluster covariate density posteriors for a fixed partition.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dpm::{fit_dpm, DpmConfig};
use super::hyper::derive_dpm_hyperparams;
use crate::data::MixedDataset;
use crate::density::DensityModel;
use crate::error::{Error, Result};
use crate::partitions::Partition;
use crate::seed::{derive_seed, derived_rng};

/// Smallest cluster for which a covariate density is fitted.
pub const MIN_CLUSTER_SIZE: usize = 5;

#[derive(Clone, Debug)]
pub struct CovariateFit {
    /// `densities[s][k]`: cluster `k`'s covariate mixture at retained iteration `s`.
    pub densities: Vec<Vec<DensityModel>>,
    pub summary: CovariateFitSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovariateFitSummary {
    pub cluster_sizes: Vec<usize>,
    /// Variable order of the fitted densities (continuous columns first).
    pub variables: Vec<String>,
    pub repairs: Vec<usize>,
    pub mean_occupied: Vec<f64>,
    pub notes: Vec<String>,
}

/// Fits an independent DPM to each cluster's covariate rows (concurrently,
/// with seeds derived from `cfg.seed` and the cluster index) and converts each
/// retained state into a mixture density.
///
/// Hyperparameters are derived per cluster; k-means uses at most `n_k / 2`
/// centers for small clusters.
pub fn cluster_covariate_densities(
    partition: &Partition,
    covariates: &MixedDataset,
    cfg: &DpmConfig,
) -> Result<CovariateFit> {
    cfg.validate()?;
    if partition.len() != covariates.n_rows() {
        return Err(Error::shape(format!(
            "partition has {} labels, covariates have {} rows",
            partition.len(),
            covariates.n_rows()
        )));
    }
    let clusters = partition.clusters();
    for (k, members) in clusters.iter().enumerate() {
        if members.len() < MIN_CLUSTER_SIZE {
            return Err(Error::Undersized {
                cluster: k + 1,
                size: members.len(),
                min: MIN_CLUSTER_SIZE,
            });
        }
    }
    let fits = clusters
        .par_iter()
        .enumerate()
        .map(|(k, members)| {
            let sub = covariates.select_rows(members);
            let cluster_seed = derive_seed(cfg.seed, k as u64);
            let km = cfg.kmeans_k.min(members.len() / 2).max(1);
            let hp = derive_dpm_hyperparams(&sub, km, cfg.tau_k, &mut derived_rng(cluster_seed, u64::MAX))?;
            let local = DpmConfig {
                seed: cluster_seed,
                ..cfg.clone()
            };
            let draws = fit_dpm(&sub, &hp, &local)?;
            let mixtures = (0..draws.len()).map(|s| draws.mixture_at(s)).collect::<Result<Vec<_>>>()?;
            let occ = draws.occupied_counts();
            let mean_occ = occ.iter().sum::<usize>() as f64 / occ.len().max(1) as f64;
            let notes: Vec<String> = hp.notes.iter().map(|n| format!("cluster {}: {n}", k + 1)).collect();
            Ok((mixtures, draws.header.repairs, mean_occ, notes))
        })
        .collect::<Result<Vec<_>>>()?;

    let s_count = fits[0].0.len();
    let densities = (0..s_count).map(|s| fits.iter().map(|f| f.0[s].clone()).collect()).collect();
    Ok(CovariateFit {
        densities,
        summary: CovariateFitSummary {
            cluster_sizes: clusters.iter().map(Vec::len).collect(),
            variables: covariates.variable_order().into_iter().map(String::from).collect(),
            repairs: fits.iter().map(|f| f.1).collect(),
            mean_occupied: fits.iter().map(|f| f.2).collect(),
            notes: fits.into_iter().flat_map(|f| f.3).collect(),
        },
    })
}
