//! Closed-form checks of the Gibbs samplers in degenerate configurations.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, Normal};

use underlap::data::{ColumnKind, ColumnMeta, MixedDataset};
use underlap::mixtures::{fit_dpm, fit_lddp, ComponentParams, DpmConfig, DpmHyperparams, LddpConfig, LddpHyperparams};
use underlap::seed::rng_from_seed;

pub fn dataset(rows: Vec<Vec<f64>>, kinds: &[(ColumnKind, usize)]) -> MixedDataset {
    let cols = kinds
        .iter()
        .enumerate()
        .map(|(j, (kind, card))| ColumnMeta {
            name: format!("v{j}"),
            kind: *kind,
            categories: (0..*card).map(|c| c.to_string()).collect(),
        })
        .collect();
    MixedDataset::new(cols, rows).unwrap()
}

/// Mean of each coordinate of the draws and its standard error under
/// independence.
fn mean_and_se(draws: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let s = draws.len() as f64;
    (0..draws[0].len())
        .map(|j| {
            let m = draws.iter().map(|d| d[j]).sum::<f64>() / s;
            let v = draws.iter().map(|d| (d[j] - m).powi(2)).sum::<f64>() / (s - 1.0);
            (m, (v / s).sqrt())
        })
        .collect()
}

/// Compares sample means with `target` to within 3 standard errors and the
/// sample variances with `target_var` to within 10 %.
fn compare(draws: &[Vec<f64>], target: &DVector<f64>, target_var: &DVector<f64>) -> Result<String, String> {
    let stats = mean_and_se(draws);
    let mut detail = Vec::new();
    for (j, (m, se)) in stats.iter().enumerate() {
        let z = (m - target[j]) / se;
        detail.push(format!("z{j}={z:+.2}"));
        if z.abs() > 3.0 {
            return Err(format!("coordinate {j}: mean {m} vs {} ({z:.2} se)", target[j]));
        }
        let v = draws.iter().map(|d| (d[j] - m).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
        if (v / target_var[j] - 1.0).abs() > 0.1 {
            return Err(format!("coordinate {j}: variance {v} vs {}", target_var[j]));
        }
    }
    Ok(detail.join(" "))
}

/// DPM with one component and a known kernel covariance: every retained mean
/// is an independent draw from `N(V(L0⁻¹m0 + nΣ⁻¹ȳ), V)`,
/// `V = (L0⁻¹ + nΣ⁻¹)⁻¹`.
pub fn dpm_single_component_mean() -> Result<String, String> {
    let mut rng = rng_from_seed(21);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let n = 25;
    let rows: Vec<Vec<f64>> =
        (0..n).map(|_| vec![1.0 + noise.sample(&mut rng), -0.5 + 0.7 * noise.sample(&mut rng)]).collect();
    let data = dataset(rows.clone(), &[(ColumnKind::Continuous, 0), (ColumnKind::Continuous, 0)]);
    let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.5]);
    let hp = DpmHyperparams {
        m0: vec![0.0, 0.0],
        l0: vec![vec![4.0, 0.5], vec![0.5, 2.0]],
        nu0: 6.0,
        s0: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        eta: vec![],
        notes: vec![],
    };
    let cfg = DpmConfig {
        truncation: 1,
        n_iter: 20_000,
        n_burn: 10,
        seed: 3,
        known_cov: Some(vec![vec![1.0, 0.3], vec![0.3, 0.5]]),
        ..DpmConfig::default()
    };
    let draws = fit_dpm(&data, &hp, &cfg).map_err(|e| e.to_string())?;
    let means: Vec<Vec<f64>> = draws
        .iterations
        .iter()
        .map(|it| match &it.params {
            ComponentParams::Dpm { components } => components[0].mean.clone(),
            _ => unreachable!(),
        })
        .collect();

    let l0_inv = DMatrix::from_row_slice(2, 2, &[4.0, 0.5, 0.5, 2.0]).try_inverse().unwrap();
    let s_inv = sigma.try_inverse().unwrap();
    let v = (&l0_inv + &s_inv * n as f64).try_inverse().unwrap();
    let ybar = DVector::from_fn(2, |j, _| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64);
    let target = &v * (&s_inv * ybar * n as f64);
    compare(&means, &target, &v.diagonal())
}

/// DPM with one component on a categorical column: the probabilities are
/// independent `Dirichlet(η + counts)` draws.
pub fn dpm_single_component_probs() -> Result<String, String> {
    let rows: Vec<Vec<f64>> = [0, 0, 1, 2, 2, 2, 2, 1, 0, 2].iter().map(|&c| vec![c as f64]).collect();
    let data = dataset(rows, &[(ColumnKind::Categorical, 3)]);
    let eta = [0.5, 1.0, 2.0];
    let hp = DpmHyperparams {
        m0: vec![],
        l0: vec![],
        nu0: 1.0,
        s0: vec![],
        eta: vec![eta.to_vec()],
        notes: vec![],
    };
    let cfg = DpmConfig {
        truncation: 1,
        n_iter: 20_000,
        n_burn: 10,
        seed: 8,
        ..DpmConfig::default()
    };
    let draws = fit_dpm(&data, &hp, &cfg).map_err(|e| e.to_string())?;
    let probs: Vec<Vec<f64>> = draws
        .iterations
        .iter()
        .map(|it| match &it.params {
            ComponentParams::Dpm { components } => components[0].probs[0].clone(),
            _ => unreachable!(),
        })
        .collect();
    let a: Vec<f64> = eta.iter().zip([3.0, 2.0, 5.0]).map(|(e, c)| e + c).collect();
    let a0: f64 = a.iter().sum();
    let target = DVector::from_iterator(3, a.iter().map(|x| x / a0));
    let var = DVector::from_iterator(3, a.iter().map(|x| x * (a0 - x) / (a0 * a0 * (a0 + 1.0))));
    compare(&probs, &target, &var)
}

/// LDDP with one component, known precision τ and the base measure fixed at
/// `(m0, Ψ)`: every β is an independent draw from `N(V(Ψ⁻¹m0 + τXᵀy), V)`,
/// `V = (Ψ⁻¹ + τXᵀX)⁻¹`.
pub fn lddp_single_component_beta() -> Result<String, String> {
    let mut rng = rng_from_seed(5);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let n = 30;
    let xs: Vec<f64> = (0..n).map(|_| 2.0 * noise.sample(&mut rng)).collect();
    let y: Vec<f64> = xs.iter().map(|x| 0.5 + 1.5 * x + 0.8 * noise.sample(&mut rng)).collect();
    let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { xs[i] });
    let tau = 1.0 / 0.64;
    let psi = DMatrix::from_row_slice(2, 2, &[2.0, 0.2, 0.2, 1.0]);
    let m0 = DVector::from_row_slice(&[0.3, 1.0]);
    let hp = LddpHyperparams {
        m0: m0.iter().copied().collect(),
        s0: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        nu: 4.0,
        psi: vec![vec![2.0, 0.2], vec![0.2, 1.0]],
        a: 2.0,
        b: 0.5,
        sigma2: 0.64,
        notes: vec![],
    };
    let cfg = LddpConfig {
        truncation: 1,
        n_iter: 20_000,
        n_burn: 10,
        seed: 4,
        init_k: 1,
        known_precision: Some(tau),
        fix_base: true,
        ..LddpConfig::default()
    };
    let draws = fit_lddp(&y, &x, &hp, &cfg).map_err(|e| e.to_string())?;
    let betas: Vec<Vec<f64>> = draws
        .iterations
        .iter()
        .map(|it| match &it.params {
            ComponentParams::Lddp { components, .. } => components[0].beta.clone(),
            _ => unreachable!(),
        })
        .collect();
    let psi_inv = psi.try_inverse().unwrap();
    let yv = DVector::from_column_slice(&y);
    let v = (&psi_inv + x.transpose() * &x * tau).try_inverse().unwrap();
    let target = &v * (&psi_inv * m0 + x.transpose() * yv * tau);
    compare(&betas, &target, &v.diagonal())
}

/// With no observations the (sticks, α) chain targets the Gamma(2, 2) prior:
/// `E[α] = 1`, `E[α²] = 1.5`. Both must hold within 5 %.
pub fn alpha_prior_moments() -> Result<String, String> {
    let data = dataset(vec![], &[(ColumnKind::Continuous, 0)]);
    let hp = DpmHyperparams {
        m0: vec![0.0],
        l0: vec![vec![1.0]],
        nu0: 4.0,
        s0: vec![vec![1.0]],
        eta: vec![],
        notes: vec![],
    };
    let cfg = DpmConfig {
        n_iter: 40_000,
        n_burn: 500,
        seed: 17,
        ..DpmConfig::default()
    };
    let draws = fit_dpm(&data, &hp, &cfg).map_err(|e| e.to_string())?;
    let alphas = draws.alphas();
    let s = alphas.len() as f64;
    let m1 = alphas.iter().sum::<f64>() / s;
    let m2 = alphas.iter().map(|a| a * a).sum::<f64>() / s;
    let detail = format!("E[a]={m1:.4} E[a^2]={m2:.4}");
    if (m1 - 1.0).abs() > 0.05 || (m2 / 1.5 - 1.0).abs() > 0.05 {
        return Err(detail);
    }
    Ok(detail)
}
