mod common;

use rand_distr::{Distribution, Normal};

use common::samplers::*;
use underlap::data::ColumnKind;
use underlap::mixtures::{derive_dpm_hyperparams, fit_dpm, DpmConfig};
use underlap::partitions::representative_partition;
use underlap::seed::rng_from_seed;

#[test]
fn dpm_one_component_mean_matches_conjugate_posterior() {
    dpm_single_component_mean().unwrap();
}

#[test]
fn dpm_one_component_probabilities_match_dirichlet_posterior() {
    dpm_single_component_probs().unwrap();
}

#[test]
fn lddp_one_component_coefficients_match_conjugate_posterior() {
    lddp_single_component_beta().unwrap();
}

#[test]
fn alpha_without_data_follows_prior() {
    alpha_prior_moments().unwrap();
}

#[test]
fn single_gaussian_gives_one_dominant_cluster() {
    let mut rng = rng_from_seed(40);
    let z = Normal::new(0.0, 1.0).unwrap();
    let rows: Vec<Vec<f64>> = (0..200)
        .map(|_| {
            let (a, b) = (z.sample(&mut rng), z.sample(&mut rng));
            vec![a, 0.6 * a + 0.8 * b]
        })
        .collect();
    let data = dataset(rows, &[(ColumnKind::Continuous, 0), (ColumnKind::Continuous, 0)]);
    let hp = derive_dpm_hyperparams(&data, 5, 10.0, &mut rng).unwrap();
    let cfg = DpmConfig {
        n_iter: 1000,
        n_burn: 1000,
        seed: 2,
        ..DpmConfig::default()
    };
    let draws = fit_dpm(&data, &hp, &cfg).unwrap();
    let rep = representative_partition(&draws).unwrap();
    let largest = *rep.sizes().iter().max().unwrap();
    let dominant = draws
        .iterations
        .iter()
        .filter(|it| {
            let mut c = vec![0usize; it.weights.len()];
            it.allocations.iter().for_each(|&h| c[h] += 1);
            *c.iter().max().unwrap() >= 190
        })
        .count() as f64
        / draws.len() as f64;
    eprintln!("representative sizes {:?}, dominant fraction {dominant:.3}", rep.sizes());
    assert!(largest >= 190, "representative sizes {:?}", rep.sizes());
}
