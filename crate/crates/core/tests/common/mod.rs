#![allow(dead_code)]

pub mod partitions;
pub mod samplers;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use underlap::density::DensityModel;
use underlap::unl::{estimate_unl_seeded, grid_sum, unl_quadrature, GridAxis, QuadratureGrid};

pub fn phi_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}

/// Standard normal pdf, written out directly.
pub fn phi_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Parameters of one 1-D component: (mean, sd).
pub fn component_1d() -> impl Strategy<Value = (f64, f64)> {
    (-3.0..3.0f64, 0.5..1.5f64)
}

/// Parameters of one 2-D component: mean, standard deviations, correlation.
pub fn component_2d() -> impl Strategy<Value = ([f64; 2], [f64; 2], f64)> {
    ([-2.5..2.5f64, -2.5..2.5f64], [0.6..1.4f64, 0.6..1.4f64], -0.6..0.6f64)
}

/// A 1-D Gaussian mixture with 1 to 3 components.
pub fn mixture_1d() -> impl Strategy<Value = DensityModel> {
    prop::collection::vec((component_1d(), 0.2..1.0f64), 1..=3).prop_map(|parts| {
        let total: f64 = parts.iter().map(|p| p.1).sum();
        let weights = parts.iter().map(|p| p.1 / total).collect();
        let comps = parts.iter().map(|((m, s), _)| DensityModel::normal(*m, s * s).unwrap()).collect();
        DensityModel::mixture(weights, comps).unwrap()
    })
}

pub fn gaussian_2d(mean: [f64; 2], sd: [f64; 2], rho: f64) -> DensityModel {
    let c = rho * sd[0] * sd[1];
    DensityModel::gaussian(mean.to_vec(), vec![vec![sd[0] * sd[0], c], vec![c, sd[1] * sd[1]]]).unwrap()
}

/// A 2-D Gaussian mixture with 1 or 2 components.
pub fn mixture_2d() -> impl Strategy<Value = DensityModel> {
    prop::collection::vec((component_2d(), 0.2..1.0f64), 1..=2).prop_map(|parts| {
        let total: f64 = parts.iter().map(|p| p.1).sum();
        let weights = parts.iter().map(|p| p.1 / total).collect();
        let comps = parts.iter().map(|((m, s, r), _)| gaussian_2d(*m, *s, *r)).collect();
        DensityModel::mixture(weights, comps).unwrap()
    })
}

pub fn grid_1d() -> QuadratureGrid {
    QuadratureGrid::uniform(1, -14.0, 14.0, 2e-3)
}

pub fn grid_2d() -> QuadratureGrid {
    QuadratureGrid::uniform(2, -14.0, 14.0, 0.05)
}

pub fn grid_for(p: usize) -> QuadratureGrid {
    if p == 1 {
        grid_1d()
    } else {
        grid_2d()
    }
}

fn gaussians(model: &DensityModel, out: &mut Vec<(DVector<f64>, DMatrix<f64>)>) {
    match model {
        DensityModel::Gaussian(g) => out.push((g.mean().clone(), g.cov().clone())),
        DensityModel::Mixture(m) => m.components().iter().for_each(|c| gaussians(c, out)),
        _ => panic!("expected a gaussian mixture"),
    }
}

/// Grid covering 6.5 standard deviations around every component.
pub fn fitted_grid(groups: &[DensityModel], step: f64) -> QuadratureGrid {
    let mut comps = Vec::new();
    groups.iter().for_each(|g| gaussians(g, &mut comps));
    let p = comps[0].0.len();
    let axes = (0..p)
        .map(|j| {
            let lo = comps.iter().map(|(m, c)| m[j] - 6.5 * c[(j, j)].sqrt()).fold(f64::INFINITY, f64::min);
            let hi = comps.iter().map(|(m, c)| m[j] + 6.5 * c[(j, j)].sqrt()).fold(f64::NEG_INFINITY, f64::max);
            let lo = (lo / step).floor() * step;
            let hi = (hi / step).ceil() * step;
            GridAxis::new(lo, hi, step)
        })
        .collect();
    QuadratureGrid::new(axes)
}

/// Quadrature UNL of Gaussian-mixture groups on a fitted grid.
pub fn quad(groups: &[DensityModel]) -> f64 {
    let p = groups[0].signature().p_continuous;
    let step = if p == 1 { 0.01 } else { 0.05 };
    unl_quadrature(groups, &fitted_grid(groups, step)).unwrap()
}

/// `½ ∫ |f₁ − f₂|` by the same grid.
pub fn tv_quadrature(f1: &DensityModel, f2: &DensityModel) -> f64 {
    let sig = f1.signature();
    let grid = grid_for(sig.p_continuous);
    0.5 * grid_sum(&sig, &grid, |c, s| (f1.log_density_parts(c, s).exp() - f2.log_density_parts(c, s).exp()).abs())
        .unwrap()
}

/// Law of `a·X` for a 2-D Gaussian mixture, computed component-wise.
pub fn project(model: &DensityModel, a: [f64; 2]) -> DensityModel {
    match model {
        DensityModel::Gaussian(g) => {
            let v = DVector::from_row_slice(&a);
            let mean = v.dot(g.mean());
            let var = (v.transpose() * g.cov() * &v)[(0, 0)];
            DensityModel::normal(mean, var).unwrap()
        }
        DensityModel::Mixture(m) => {
            DensityModel::mixture(m.weights().to_vec(), m.components().iter().map(|c| project(c, a)).collect()).unwrap()
        }
        _ => panic!("projection needs a gaussian mixture"),
    }
}

/// Equal-weight mixture of the groups, used as an extra group.
pub fn pooled(groups: &[DensityModel]) -> DensityModel {
    let k = groups.len();
    DensityModel::mixture(vec![1.0 / k as f64; k], groups.to_vec()).unwrap()
}

pub fn matrix2(a: [f64; 4]) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &a)
}

/// Every set partition of `n` items as a restricted growth string.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, n: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=max + 1 {
            prefix.push(c);
            rec(prefix, n, max.max(c), out);
            prefix.pop();
        }
    }
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut prefix = vec![0];
    rec(&mut prefix, n, 0, &mut out);
    out
}

/// Groups plus the transforms the invariance checks apply to them.
#[derive(Clone, Debug)]
pub struct Instance {
    pub groups: Vec<DensityModel>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Unit projection direction (2-D instances only).
    pub direction: [f64; 2],
}

impl Instance {
    pub fn dim(&self) -> usize {
        self.groups[0].signature().p_continuous
    }
}

fn scale() -> impl Strategy<Value = f64> {
    (0.7..1.2f64, any::<bool>()).prop_map(|(s, neg)| if neg { -s } else { s })
}

/// Two or three 1-D mixtures and a scalar affine map.
pub fn instance_1d() -> impl Strategy<Value = Instance> {
    (prop::collection::vec(mixture_1d(), 2..=3), scale(), -1.0..1.0f64).prop_map(|(groups, a, b)| Instance {
        groups,
        a: DMatrix::from_element(1, 1, a),
        b: DVector::from_element(1, b),
        direction: [1.0, 0.0],
    })
}

/// Two or three 2-D mixtures, a rotation-and-scale map and a direction.
pub fn instance_2d() -> impl Strategy<Value = Instance> {
    (
        prop::collection::vec(mixture_2d(), 2..=3),
        0.0..std::f64::consts::TAU,
        [0.7..1.2f64, 0.7..1.2f64],
        [-1.0..1.0f64, -1.0..1.0f64],
        0.0..std::f64::consts::PI,
    )
        .prop_map(|(groups, theta, s, b, phi)| {
            let (c, sn) = (theta.cos(), theta.sin());
            let a = matrix2([c * s[0], -sn * s[1], sn * s[0], c * s[1]]);
            Instance {
                groups,
                a,
                b: DVector::from_row_slice(&b),
                direction: [phi.cos(), phi.sin()],
            }
        })
}

pub const QUAD_TOL: f64 = 1e-6;

// In the checks below `base` is the quadrature UNL of `inst.groups`.

/// UNL of the joint is at least the UNL of every coordinate marginal.
pub fn check_marginal_monotonicity(inst: &Instance, base: f64) -> Result<(), String> {
    if inst.dim() < 2 {
        return Ok(());
    }
    for j in 0..inst.dim() {
        let marg: Vec<_> = inst.groups.iter().map(|g| g.marginalize(&[j]).unwrap()).collect();
        let m = quad(&marg);
        if m > base + QUAD_TOL {
            return Err(format!("marginal {j}: {m} > joint {base}"));
        }
    }
    Ok(())
}

/// An invertible affine map leaves UNL unchanged.
pub fn check_affine_invariance(inst: &Instance, base: f64) -> Result<(), String> {
    let moved: Vec<_> = inst.groups.iter().map(|g| g.affine_pushforward(&inst.a, &inst.b).unwrap()).collect();
    let after = quad(&moved);
    if (after - base).abs() > QUAD_TOL {
        return Err(format!("affine: {after} vs {base}"));
    }
    Ok(())
}

/// A linear projection cannot increase UNL.
pub fn check_projection_monotonicity(inst: &Instance, base: f64) -> Result<(), String> {
    if inst.dim() < 2 {
        return Ok(());
    }
    let proj: Vec<_> = inst.groups.iter().map(|g| project(g, inst.direction)).collect();
    let p = quad(&proj);
    if p > base + QUAD_TOL {
        return Err(format!("projection: {p} > {base}"));
    }
    Ok(())
}

/// Adding the pooled mixture as an extra group leaves UNL unchanged.
pub fn check_mixture_addition(inst: &Instance, base: f64) -> Result<(), String> {
    let mut extended = inst.groups.clone();
    extended.push(pooled(&inst.groups));
    let after = quad(&extended);
    if (after - base).abs() > QUAD_TOL {
        return Err(format!("mixture addition: {after} vs {base}"));
    }
    Ok(())
}

/// The importance-sampling estimate lies within four bound standard
/// deviations of the quadrature value.
pub fn check_estimate_agrees(inst: &Instance, oracle: f64, m: usize, seed: u64) -> Result<(), String> {
    let est = estimate_unl_seeded(&inst.groups, m, seed).unwrap();
    let k = inst.groups.len() as f64;
    let tol = 4.0 * (oracle * (k - oracle) / m as f64).sqrt();
    if (est.value - oracle).abs() > tol.max(1e-12) {
        return Err(format!("estimate {} vs oracle {oracle} (tol {tol})", est.value));
    }
    Ok(())
}
