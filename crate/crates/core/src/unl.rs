//! The underlap coefficient `UNL(f₁,…,f_K) = ∫ max_k f_k dν`.
//!
//! [`estimate_unl`] is the importance-sampling estimator with the equal-weight
//! mixture proposal `q = (1/K) Σ f_k`. Its weights `max_k f_k / q` lie in
//! `[1, K]`, which gives the bound `Var ≤ UNL (K − UNL) / M`. The exact
//! enumeration, grid quadrature and partition-supremum routines are
//! deterministic oracles used to validate the estimator.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{DensityModel, SupportSignature};
use crate::error::{Error, Result};
use crate::seed::derived_rng;

/// Largest categorical state space accepted by the exact oracles.
pub const MAX_EXACT_STATES: u64 = 10_000_000;

/// One importance-sampling estimate with weight diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnlEstimate {
    pub value: f64,
    /// Number of groups `K`.
    pub k: usize,
    /// Number of proposal draws `M`.
    pub m: usize,
    pub weight_mean: f64,
    pub weight_max: f64,
    /// `(Σw)² / Σw²`.
    pub ess: f64,
    /// Seed of the generator, when the estimate was produced from one.
    pub seed: Option<u64>,
}

impl UnlEstimate {
    /// `UNL (K − UNL) / M` evaluated at this estimate.
    pub fn variance_bound(&self) -> f64 {
        variance_bound(self.k, self.value.clamp(1.0, self.k as f64), self.m).unwrap_or(0.0)
    }
}

/// Estimates across posterior density draws, one per row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnlPosterior {
    pub draws: Vec<UnlEstimate>,
}

impl UnlPosterior {
    pub fn values(&self) -> Vec<f64> {
        self.draws.iter().map(|d| d.value).collect()
    }

    pub fn mean(&self) -> f64 {
        self.draws.iter().map(|d| d.value).sum::<f64>() / self.draws.len() as f64
    }

    /// Empirical quantile by linear interpolation of the sorted values.
    pub fn quantile(&self, q: f64) -> f64 {
        let mut v = self.values();
        v.sort_by(f64::total_cmp);
        let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    }

    /// CSV with columns `s, value, ess, weight_max` (`s` is 1-based).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["s", "value", "ess", "weight_max"])?;
        for (s, d) in self.draws.iter().enumerate() {
            out.write_record([
                (s + 1).to_string(),
                d.value.to_string(),
                d.ess.to_string(),
                d.weight_max.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn common_signature(groups: &[DensityModel]) -> Result<SupportSignature> {
    if groups.len() < 2 {
        return Err(Error::arg(format!("UNL needs at least 2 groups, got {}", groups.len())));
    }
    let sig = groups[0].signature();
    if let Some(i) = groups.iter().position(|g| g.signature() != sig) {
        return Err(Error::shape(format!("group {i} has a different support signature")));
    }
    Ok(sig)
}

/// `max_k f_k / q` at one point from the K log-densities, with
/// `q = (1/K) Σ f_k`. Computed as `K / Σ exp(l_k − max l)` so that the
/// result lies exactly in `[1, K]`.
#[inline]
pub fn importance_weight(log_f: &[f64]) -> f64 {
    let max = log_f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return 1.0;
    }
    let denom: f64 = log_f.iter().map(|l| (l - max).exp()).sum();
    log_f.len() as f64 / denom
}

/// Importance-sampling estimate of the UNL of `groups` from `m` draws of the
/// equal-weight mixture proposal.
pub fn estimate_unl<R: Rng + ?Sized>(groups: &[DensityModel], m: usize, rng: &mut R) -> Result<UnlEstimate> {
    common_signature(groups)?;
    if m == 0 {
        return Err(Error::arg("number of proposal draws must be at least 1"));
    }
    let k = groups.len();
    let mut log_f = vec![0.0; k];
    let (mut sum, mut sum_sq, mut max_w) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..m {
        let source = rng.random_range(0..k);
        let x = groups[source].sample_one(rng);
        for (l, g) in log_f.iter_mut().zip(groups) {
            *l = g.log_density_parts(&x.continuous, &x.categorical);
        }
        let w = importance_weight(&log_f);
        sum += w;
        sum_sq += w * w;
        max_w = max_w.max(w);
    }
    let value = sum / m as f64;
    Ok(UnlEstimate {
        value,
        k,
        m,
        weight_mean: value,
        weight_max: max_w,
        ess: sum * sum / sum_sq,
        seed: None,
    })
}

/// [`estimate_unl`] with a generator seeded from `seed`.
pub fn estimate_unl_seeded(groups: &[DensityModel], m: usize, seed: u64) -> Result<UnlEstimate> {
    let mut rng = crate::seed::rng_from_seed(seed);
    let mut est = estimate_unl(groups, m, &mut rng)?;
    est.seed = Some(seed);
    Ok(est)
}

/// One estimate per row of `group_draws`. Row `s` uses the seed
/// `derive_seed(seed, s)`, so the output does not depend on the number of
/// worker threads.
pub fn estimate_unl_posterior(group_draws: &[Vec<DensityModel>], m: usize, seed: u64) -> Result<UnlPosterior> {
    if group_draws.is_empty() {
        return Err(Error::arg("no posterior density draws"));
    }
    let k = group_draws[0].len();
    let sig = common_signature(&group_draws[0])?;
    for (s, row) in group_draws.iter().enumerate() {
        if row.len() != k {
            return Err(Error::shape(format!("row {s} has {} groups, expected {k}", row.len())));
        }
        if row.iter().any(|g| g.signature() != sig) {
            return Err(Error::shape(format!("row {s} has a mismatched support signature")));
        }
    }
    let draws = group_draws
        .par_iter()
        .enumerate()
        .map(|(s, row)| {
            let child = crate::seed::derive_seed(seed, s as u64);
            let mut rng = derived_rng(seed, s as u64);
            estimate_unl(row, m, &mut rng).map(|mut e| {
                e.seed = Some(child);
                e
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UnlPosterior { draws })
}

/// `UNL (K − UNL) / M`.
pub fn variance_bound(k_groups: usize, unl: f64, m: usize) -> Result<f64> {
    let k = k_groups as f64;
    if m == 0 {
        return Err(Error::arg("m must be at least 1"));
    }
    if !(unl >= 1.0 - 1e-9 && unl <= k + 1e-9) {
        return Err(Error::arg(format!("UNL {unl} outside [1, {k_groups}]")));
    }
    let unl = unl.clamp(1.0, k);
    Ok(unl * (k - unl) / m as f64)
}

fn check_categorical(groups: &[DensityModel]) -> Result<SupportSignature> {
    let sig = common_signature(groups)?;
    if sig.p_continuous != 0 {
        return Err(Error::arg("exact discrete UNL needs purely categorical models"));
    }
    Ok(sig)
}

/// Exact `Σ_x max_k p_k(x)` over the categorical state space.
pub fn unl_exact_discrete(groups: &[DensityModel]) -> Result<f64> {
    let sig = check_categorical(groups)?;
    match sig.state_count() {
        Some(n) if n <= MAX_EXACT_STATES => {}
        _ => return Err(Error::Capacity("categorical state space exceeds 10^7 states".into())),
    }
    let total = sig
        .states()
        .iter()
        .map(|s| {
            groups
                .iter()
                .map(|g| g.log_density_parts(&[], s).exp())
                .fold(0.0f64, f64::max)
        })
        .sum();
    Ok(total)
}

/// `sup over partitions {A_j} of Σ_j max_k P_k(A_j)` by enumerating every set
/// partition of the state space. Equals [`unl_exact_discrete`].
pub fn tv_partition_sup_discrete(groups: &[DensityModel], max_states: usize) -> Result<f64> {
    let sig = check_categorical(groups)?;
    if max_states > 10 {
        return Err(Error::Capacity("partition enumeration is limited to 10 states".into()));
    }
    let n_states = match sig.state_count() {
        Some(n) if n as usize <= max_states => n as usize,
        _ => {
            return Err(Error::Capacity(format!(
                "state space exceeds the enumeration limit of {max_states}"
            )))
        }
    };
    let probs: Vec<Vec<f64>> = sig
        .states()
        .iter()
        .map(|s| groups.iter().map(|g| g.log_density_parts(&[], s).exp()).collect())
        .collect();
    let k = groups.len();
    let mut best = f64::NEG_INFINITY;
    // Restricted growth strings enumerate each set partition exactly once.
    let mut rgs = vec![0usize; n_states];
    loop {
        let blocks = rgs.iter().copied().max().unwrap_or(0) + 1;
        let mut mass = vec![vec![0.0; k]; blocks];
        for (state, &b) in rgs.iter().enumerate() {
            for g in 0..k {
                mass[b][g] += probs[state][g];
            }
        }
        let total: f64 = mass.iter().map(|m| m.iter().copied().fold(0.0, f64::max)).sum();
        best = best.max(total);
        if !next_rgs(&mut rgs) {
            break;
        }
    }
    Ok(best)
}

fn next_rgs(rgs: &mut [usize]) -> bool {
    let n = rgs.len();
    for i in (1..n).rev() {
        let prefix_max = rgs[..i].iter().copied().max().unwrap_or(0);
        if rgs[i] <= prefix_max {
            rgs[i] += 1;
            for r in rgs.iter_mut().skip(i + 1) {
                *r = 0;
            }
            return true;
        }
    }
    false
}

/// One axis of a tensor quadrature grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, step: f64) -> Self {
        Self { lo, hi, step }
    }

    fn cells(&self) -> usize {
        ((self.hi - self.lo) / self.step).round().max(1.0) as usize
    }

    fn refined(&self) -> Self {
        Self {
            step: self.step / 2.0,
            ..*self
        }
    }
}

/// Tensor grid over the continuous coordinates (at most two).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub axes: Vec<GridAxis>,
}

impl QuadratureGrid {
    pub fn new(axes: Vec<GridAxis>) -> Self {
        Self { axes }
    }

    pub fn uniform(p: usize, lo: f64, hi: f64, step: f64) -> Self {
        Self {
            axes: vec![GridAxis::new(lo, hi, step); p],
        }
    }

    pub fn refined(&self) -> Self {
        Self {
            axes: self.axes.iter().map(GridAxis::refined).collect(),
        }
    }

    fn validate(&self, sig: &SupportSignature) -> Result<()> {
        if sig.p_continuous > 2 {
            return Err(Error::Capacity("quadrature supports at most 2 continuous coordinates".into()));
        }
        if self.axes.len() != sig.p_continuous {
            return Err(Error::shape(format!(
                "grid has {} axes, models have {} continuous coordinates",
                self.axes.len(),
                sig.p_continuous
            )));
        }
        for a in &self.axes {
            if !(a.hi > a.lo && a.step > 0.0 && a.step.is_finite()) {
                return Err(Error::arg("grid axis needs lo < hi and a positive step"));
            }
        }
        Ok(())
    }
}

/// Midpoint Riemann sum of `f(cont, cat)` over the grid and every categorical
/// state. Rows of the first axis are summed in parallel and reduced in order.
pub fn grid_sum<F>(sig: &SupportSignature, grid: &QuadratureGrid, f: F) -> Result<f64>
where
    F: Fn(&[f64], &[usize]) -> f64 + Sync,
{
    let parts = grid_sum_vec(sig, grid, 1, |c, s, out| out[0] = f(c, s))?;
    Ok(parts[0])
}

fn grid_sum_vec<F>(sig: &SupportSignature, grid: &QuadratureGrid, width: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &[usize], &mut [f64]) + Sync,
{
    grid.validate(sig)?;
    match sig.state_count() {
        Some(n) if n <= MAX_EXACT_STATES => {}
        _ => return Err(Error::Capacity("categorical state space exceeds 10^7 states".into())),
    }
    let states = sig.states();
    let eval_states = |cont: &[f64], acc: &mut [f64], scratch: &mut [f64], cell: f64| {
        for s in &states {
            f(cont, s, scratch);
            for (a, v) in acc.iter_mut().zip(scratch.iter()) {
                *a += v * cell;
            }
        }
    };
    let mut total = vec![0.0; width];
    match grid.axes.len() {
        0 => {
            let mut scratch = vec![0.0; width];
            eval_states(&[], &mut total, &mut scratch, 1.0);
        }
        1 => {
            let ax = grid.axes[0];
            let n = ax.cells();
            let h = (ax.hi - ax.lo) / n as f64;
            let chunk = 256;
            let rows: Vec<Vec<f64>> = (0..n.div_ceil(chunk))
                .into_par_iter()
                .map(|c| {
                    let mut acc = vec![0.0; width];
                    let mut scratch = vec![0.0; width];
                    for i in (c * chunk)..((c + 1) * chunk).min(n) {
                        let x = ax.lo + (i as f64 + 0.5) * h;
                        eval_states(&[x], &mut acc, &mut scratch, h);
                    }
                    acc
                })
                .collect();
            for r in rows {
                for (t, v) in total.iter_mut().zip(r) {
                    *t += v;
                }
            }
        }
        _ => {
            let (a0, a1) = (grid.axes[0], grid.axes[1]);
            let (n0, n1) = (a0.cells(), a1.cells());
            let (h0, h1) = ((a0.hi - a0.lo) / n0 as f64, (a1.hi - a1.lo) / n1 as f64);
            let rows: Vec<Vec<f64>> = (0..n0)
                .into_par_iter()
                .map(|i| {
                    let mut acc = vec![0.0; width];
                    let mut scratch = vec![0.0; width];
                    let x0 = a0.lo + (i as f64 + 0.5) * h0;
                    for j in 0..n1 {
                        let x1 = a1.lo + (j as f64 + 0.5) * h1;
                        eval_states(&[x0, x1], &mut acc, &mut scratch, h0 * h1);
                    }
                    acc
                })
                .collect();
            for r in rows {
                for (t, v) in total.iter_mut().zip(r) {
                    *t += v;
                }
            }
        }
    }
    Ok(total)
}

/// Quadrature value together with its self-check diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureResult {
    /// Extrapolated value from the grid and its refinement.
    pub value: f64,
    /// `|refined − coarse|`.
    pub refinement_change: f64,
    /// Mass of each group captured by the coarse grid.
    pub group_masses: Vec<f64>,
}

/// Coverage required of every group on the quadrature grid.
pub const QUADRATURE_COVERAGE: f64 = 1.0 - 1e-6;
/// Maximum change allowed when halving the step.
pub const QUADRATURE_REFINEMENT_TOL: f64 = 1e-3;

/// Sub-cells per axis used inside grid cells crossed by an argmax boundary.
const KINK_SUBDIVISION: usize = 8;

/// Fills `out[..k]` with the group densities and `out[k]` with their maximum;
/// returns the index of the largest.
fn densities_at(groups: &[DensityModel], cont: &[f64], cat: &[usize], out: &mut [f64]) -> usize {
    let k = groups.len();
    let mut arg = 0;
    for (i, g) in groups.iter().enumerate() {
        out[i] = g.log_density_parts(cont, cat).exp();
        if out[i] > out[arg] {
            arg = i;
        }
    }
    out[k] = out[arg];
    arg
}

/// Midpoint contribution of one cell. When the corners and the midpoint
/// disagree on the argmax, `∫ (max_k f_k − f_m)` over the cell, with `m` the
/// midpoint argmax, is added from `KINK_SUBDIVISION^p` sub-cells. The group
/// sums stay plain midpoint sums.
#[allow(clippy::too_many_arguments)]
fn add_cell(
    groups: &[DensityModel],
    cat: &[usize],
    lo: &[f64],
    h: &[f64],
    corners_agree: Option<usize>,
    acc: &mut [f64],
    scratch: &mut [f64],
    point: &mut [f64],
) {
    let k = groups.len();
    let area: f64 = h.iter().product();
    for (x, (l, w)) in point.iter_mut().zip(lo.iter().zip(h)) {
        *x = l + 0.5 * w;
    }
    let mid = densities_at(groups, point, cat, scratch);
    for (a, v) in acc.iter_mut().zip(scratch.iter()) {
        *a += v * area;
    }
    if corners_agree == Some(mid) {
        return;
    }
    let sdiv = KINK_SUBDIVISION;
    let sub_area = area / (sdiv as f64).powi(lo.len() as i32);
    let mut excess = 0.0;
    for idx in 0..sdiv.pow(lo.len() as u32) {
        let mut rem = idx;
        for (x, (l, w)) in point.iter_mut().zip(lo.iter().zip(h)) {
            let t = rem % sdiv;
            rem /= sdiv;
            *x = l + (t as f64 + 0.5) * w / sdiv as f64;
        }
        densities_at(groups, point, cat, scratch);
        excess += scratch[k] - scratch[mid];
    }
    acc[k] += excess * sub_area;
}

fn agree(args: &[usize]) -> Option<usize> {
    args.iter().all(|a| *a == args[0]).then_some(args[0])
}

/// Riemann sum of `(f_1, …, f_K, max_k f_k)` over the grid and every
/// categorical state, refining cells that straddle an argmax boundary.
fn unl_riemann(groups: &[DensityModel], sig: &SupportSignature, grid: &QuadratureGrid) -> Result<(f64, Vec<f64>)> {
    grid.validate(sig)?;
    match sig.state_count() {
        Some(n) if n <= MAX_EXACT_STATES => {}
        _ => return Err(Error::Capacity("categorical state space exceeds 10^7 states".into())),
    }
    let k = groups.len();
    let width = k + 1;
    let states = sig.states();
    let merge = |total: &mut Vec<f64>, parts: Vec<Vec<f64>>| {
        for r in parts {
            for (t, v) in total.iter_mut().zip(r) {
                *t += v;
            }
        }
    };
    let mut total = vec![0.0; width];
    match grid.axes.len() {
        0 => {
            let mut scratch = vec![0.0; width];
            for st in &states {
                densities_at(groups, &[], st, &mut scratch);
                for (t, v) in total.iter_mut().zip(&scratch) {
                    *t += v;
                }
            }
        }
        1 => {
            let ax = grid.axes[0];
            let n = ax.cells();
            let h = (ax.hi - ax.lo) / n as f64;
            let chunk = 256;
            let parts: Vec<Vec<f64>> = (0..n.div_ceil(chunk))
                .into_par_iter()
                .map(|c| {
                    let mut acc = vec![0.0; width];
                    let mut scratch = vec![0.0; width];
                    let mut point = [0.0];
                    for st in &states {
                        let range = (c * chunk)..((c + 1) * chunk).min(n);
                        let mut left = densities_at(groups, &[ax.lo + range.start as f64 * h], st, &mut scratch);
                        for i in range {
                            let lo = ax.lo + i as f64 * h;
                            let right = densities_at(groups, &[lo + h], st, &mut scratch);
                            let corners = agree(&[left, right]);
                            add_cell(groups, st, &[lo], &[h], corners, &mut acc, &mut scratch, &mut point);
                            left = right;
                        }
                    }
                    acc
                })
                .collect();
            merge(&mut total, parts);
        }
        _ => {
            let (a0, a1) = (grid.axes[0], grid.axes[1]);
            let (n0, n1) = (a0.cells(), a1.cells());
            let (h0, h1) = ((a0.hi - a0.lo) / n0 as f64, (a1.hi - a1.lo) / n1 as f64);
            let vertex_row = |x0: f64, st: &[usize], scratch: &mut [f64]| -> Vec<usize> {
                (0..=n1).map(|j| densities_at(groups, &[x0, a1.lo + j as f64 * h1], st, scratch)).collect()
            };
            let rows_per_task = 8;
            let parts: Vec<Vec<f64>> = (0..n0.div_ceil(rows_per_task))
                .into_par_iter()
                .map(|c| {
                    let mut acc = vec![0.0; width];
                    let mut scratch = vec![0.0; width];
                    let mut point = [0.0; 2];
                    let rows = (c * rows_per_task)..((c + 1) * rows_per_task).min(n0);
                    for st in &states {
                        let mut below = vertex_row(a0.lo + rows.start as f64 * h0, st, &mut scratch);
                        for i in rows.clone() {
                            let x0 = a0.lo + i as f64 * h0;
                            let above = vertex_row(x0 + h0, st, &mut scratch);
                            for j in 0..n1 {
                                let corners = agree(&[below[j], below[j + 1], above[j], above[j + 1]]);
                                let lo = [x0, a1.lo + j as f64 * h1];
                                add_cell(groups, st, &lo, &[h0, h1], corners, &mut acc, &mut scratch, &mut point);
                            }
                            below = above;
                        }
                    }
                    acc
                })
                .collect();
            merge(&mut total, parts);
        }
    }
    Ok((total[k], total[..k].to_vec()))
}

/// Brute-force UNL by a midpoint tensor-grid sum over the continuous block
/// (at most two coordinates) and exhaustive summation over categorical states.
/// Cells crossed by an argmax boundary get a sub-cell correction.
///
/// The grid must capture `1 − 1e-6` of each group's mass, and halving the
/// step must change the value by less than `1e-3`. The returned value is the
/// Richardson extrapolation `(4 fine − coarse) / 3` of the two sums.
pub fn unl_quadrature_detailed(groups: &[DensityModel], grid: &QuadratureGrid) -> Result<QuadratureResult> {
    let sig = common_signature(groups)?;
    grid.validate(&sig)?;
    let (coarse, masses) = unl_riemann(groups, &sig, grid)?;
    if let Some((i, m)) = masses.iter().enumerate().find(|(_, m)| **m < QUADRATURE_COVERAGE) {
        return Err(Error::Precondition(format!(
            "grid captures only {m:.9} of group {i}'s mass"
        )));
    }
    let (fine, _) = unl_riemann(groups, &sig, &grid.refined())?;
    let change = (fine - coarse).abs();
    if change >= QUADRATURE_REFINEMENT_TOL {
        return Err(Error::Precondition(format!(
            "quadrature not converged: halving the step changed the value by {change:.3e}"
        )));
    }
    let value = if sig.p_continuous == 0 { fine } else { (4.0 * fine - coarse) / 3.0 };
    Ok(QuadratureResult {
        value,
        refinement_change: change,
        group_masses: masses,
    })
}

pub fn unl_quadrature(groups: &[DensityModel], grid: &QuadratureGrid) -> Result<f64> {
    unl_quadrature_detailed(groups, grid).map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    fn normal(m: f64, v: f64) -> DensityModel {
        DensityModel::normal(m, v).unwrap()
    }

    fn cat(p: &[&[f64]]) -> DensityModel {
        DensityModel::categorical(p.iter().map(|v| v.to_vec()).collect()).unwrap()
    }

    #[test]
    fn identical_groups_give_exactly_one() {
        let mut rng = rng_from_seed(1);
        for k in 2..6 {
            let g = vec![normal(0.3, 2.0); k];
            let e = estimate_unl(&g, 500, &mut rng).unwrap();
            assert_eq!(e.value, 1.0);
            assert_eq!(e.weight_max, 1.0);
            assert!((e.ess - 500.0).abs() < 1e-9);
        }
    }

    #[test]
    fn disjoint_categorical_groups_give_exactly_k() {
        let g = vec![cat(&[&[1.0, 0.0]]), cat(&[&[0.0, 1.0]])];
        let e = estimate_unl(&g, 1000, &mut rng_from_seed(2)).unwrap();
        assert_eq!(e.value, 2.0);
        assert_eq!(e.weight_max, 2.0);
    }

    #[test]
    fn estimate_errors() {
        let mut rng = rng_from_seed(0);
        assert!(matches!(estimate_unl(&[normal(0.0, 1.0)], 10, &mut rng), Err(Error::Argument(_))));
        let g = vec![normal(0.0, 1.0), normal(1.0, 1.0)];
        assert!(matches!(estimate_unl(&g, 0, &mut rng), Err(Error::Argument(_))));
        let mixed = vec![normal(0.0, 1.0), cat(&[&[0.5, 0.5]])];
        assert!(matches!(estimate_unl(&mixed, 10, &mut rng), Err(Error::Shape(_))));
    }

    #[test]
    fn weights_stay_within_bounds() {
        let g = vec![normal(0.0, 1.0), normal(1.0, 0.3), normal(-2.0, 4.0)];
        let e = estimate_unl(&g, 20_000, &mut rng_from_seed(4)).unwrap();
        assert!(e.value >= 1.0 && e.value <= 3.0);
        assert!(e.weight_max <= 3.0 + 1e-9);
        assert_eq!(e.weight_mean, e.value);
    }

    #[test]
    fn importance_weight_extremes() {
        assert_eq!(importance_weight(&[-3.0, -3.0, -3.0]), 1.0);
        assert_eq!(importance_weight(&[0.0, f64::NEG_INFINITY]), 2.0);
        let w = importance_weight(&[-1.0, -2.0]);
        let (a, b) = ((-1.0f64).exp(), (-2.0f64).exp());
        assert!((w - a / ((a + b) / 2.0)).abs() < 1e-14);
    }

    #[test]
    fn posterior_single_row_matches_direct_estimate() {
        let row = vec![normal(0.0, 1.0), normal(2.0, 1.0)];
        let post = estimate_unl_posterior(std::slice::from_ref(&row), 300, 42).unwrap();
        assert_eq!(post.draws.len(), 1);
        let direct = estimate_unl_seeded(&row, 300, crate::seed::derive_seed(42, 0)).unwrap();
        assert_eq!(post.draws[0], direct);
    }

    #[test]
    fn posterior_rejects_ragged_rows() {
        let rows = vec![
            vec![normal(0.0, 1.0), normal(2.0, 1.0)],
            vec![normal(0.0, 1.0), normal(2.0, 1.0), normal(3.0, 1.0)],
        ];
        assert!(matches!(estimate_unl_posterior(&rows, 10, 1), Err(Error::Shape(_))));
    }

    #[test]
    fn posterior_of_identical_rows_concentrates() {
        let rows = vec![vec![normal(0.0, 1.0), normal(2.0, 1.0)]; 40];
        let post = estimate_unl_posterior(&rows, 4000, 3).unwrap();
        let vals = post.values();
        assert!(vals.windows(2).any(|w| w[0] != w[1]));
        let sd_bound = variance_bound(2, 1.6827, 4000).unwrap().sqrt();
        assert!(vals.iter().all(|v| (v - 1.6827).abs() < 5.0 * sd_bound));
    }

    #[test]
    fn exact_discrete_examples() {
        let two = vec![cat(&[&[0.7, 0.3]]), cat(&[&[0.4, 0.6]])];
        assert!((unl_exact_discrete(&two).unwrap() - 1.3).abs() < 1e-15);
        let same = vec![cat(&[&[0.2, 0.5, 0.3]]); 4];
        assert!((unl_exact_discrete(&same).unwrap() - 1.0).abs() < 1e-15);
        let three = vec![cat(&[&[1.0, 0.0]]), cat(&[&[0.0, 1.0]]), cat(&[&[0.5, 0.5]])];
        assert!((unl_exact_discrete(&three).unwrap() - 2.0).abs() < 1e-15);
        let huge = vec![DensityModel::categorical(vec![vec![0.5, 0.5]; 30]).unwrap(); 2];
        assert!(matches!(unl_exact_discrete(&huge), Err(Error::Capacity(_))));
    }

    #[test]
    fn partition_supremum_examples() {
        let two = vec![cat(&[&[0.7, 0.3]]), cat(&[&[0.4, 0.6]])];
        assert!((tv_partition_sup_discrete(&two, 6).unwrap() - 1.3).abs() < 1e-12);
        let same = vec![cat(&[&[0.2, 0.5, 0.3]]); 2];
        assert!((tv_partition_sup_discrete(&same, 6).unwrap() - 1.0).abs() < 1e-12);
        let three_state = vec![cat(&[&[0.5, 0.3, 0.2]]), cat(&[&[0.2, 0.3, 0.5]])];
        assert!((tv_partition_sup_discrete(&three_state, 6).unwrap() - 1.3).abs() < 1e-12);
        let big = vec![DensityModel::categorical(vec![vec![0.5, 0.5]; 3]).unwrap(); 2];
        assert!(matches!(tv_partition_sup_discrete(&big, 6), Err(Error::Capacity(_))));
    }

    #[test]
    fn restricted_growth_strings_count_bell_numbers() {
        for (n, bell) in [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52), (6, 203)] {
            let mut rgs = vec![0usize; n];
            let mut count = 1;
            while next_rgs(&mut rgs) {
                count += 1;
            }
            assert_eq!(count, bell, "n = {n}");
        }
    }

    #[test]
    fn variance_bound_examples() {
        assert_eq!(variance_bound(4, 4.0, 100).unwrap(), 0.0);
        assert!((variance_bound(5, 1.0, 1000).unwrap() - 4.0 / 1000.0).abs() < 1e-18);
        assert!((variance_bound(3, 1.5, 5000).unwrap() - 4.5e-4).abs() < 1e-15);
        assert!(matches!(variance_bound(3, 0.5, 10), Err(Error::Argument(_))));
        assert!(matches!(variance_bound(3, 3.5, 10), Err(Error::Argument(_))));
    }

    #[test]
    fn quadrature_identical_normals() {
        let g = vec![normal(0.0, 1.0), normal(0.0, 1.0)];
        let grid = QuadratureGrid::uniform(1, -8.0, 8.0, 1e-3);
        let v = unl_quadrature(&g, &grid).unwrap();
        assert!((v - 1.0).abs() < 1e-4);
    }

    #[test]
    fn quadrature_three_separated_normals() {
        let g = vec![normal(-6.0, 1.0), normal(0.0, 1.0), normal(6.0, 1.0)];
        let grid = QuadratureGrid::uniform(1, -14.0, 14.0, 1e-3);
        let v = unl_quadrature(&g, &grid).unwrap();
        // Boundaries at ±3: Φ(3) + (2Φ(3) − 1) + Φ(3).
        let phi3 = statrs::function::erf::erfc(-3.0 / std::f64::consts::SQRT_2) / 2.0;
        assert!((v - (4.0 * phi3 - 1.0)).abs() < 1e-6, "{v}");
        assert!((v - 3.0).abs() < 1e-2);
    }

    #[test]
    fn quadrature_preconditions() {
        let g = vec![normal(0.0, 1.0), normal(2.0, 1.0)];
        let narrow = QuadratureGrid::uniform(1, -2.0, 2.0, 1e-3);
        assert!(matches!(unl_quadrature(&g, &narrow), Err(Error::Precondition(_))));
        let g3 = vec![
            DensityModel::gaussian(vec![0.0; 3], vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]])
                .unwrap();
            2
        ];
        let grid3 = QuadratureGrid::uniform(3, -8.0, 8.0, 0.1);
        assert!(matches!(unl_quadrature(&g3, &grid3), Err(Error::Capacity(_))));
        let coarse = QuadratureGrid::uniform(1, -8.0, 10.0, 1.5);
        assert!(unl_quadrature(&[normal(0.0, 0.05), normal(0.3, 0.05)], &coarse).is_err());
    }

    #[test]
    fn posterior_csv_columns() {
        let rows = vec![vec![normal(0.0, 1.0), normal(1.0, 1.0)]; 3];
        let post = estimate_unl_posterior(&rows, 50, 9).unwrap();
        let mut buf = Vec::new();
        post.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "s,value,ess,weight_max");
        assert_eq!(lines.count(), 3);
    }
}
