//! Synthetic data generators for the worked examples A, B, C1, C2 and D.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::data::{ColumnKind, ColumnMeta, MixedDataset};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, sample_mvn};
use crate::seed::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Example {
    A,
    B,
    C1,
    C2,
    D,
}

impl Example {
    pub const ALL: [Example; 5] = [Example::A, Example::B, Example::C1, Example::C2, Example::D];

    pub fn default_n(self) -> usize {
        match self {
            Example::A | Example::B => 600,
            Example::C1 | Example::C2 => 800,
            Example::D => 1000,
        }
    }

    /// Number of covariates in the generated table.
    pub fn n_covariates(self) -> usize {
        match self {
            Example::A => 1,
            Example::B | Example::C1 | Example::C2 => 2,
            Example::D => D_DIM,
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Example::A => "A",
            Example::B => "B",
            Example::C1 => "C1",
            Example::C2 => "C2",
            Example::D => "D",
        };
        f.write_str(s)
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Example::A),
            "B" => Ok(Example::B),
            "C1" => Ok(Example::C1),
            "C2" => Ok(Example::C2),
            "D" => Ok(Example::D),
            other => Err(Error::arg(format!("unknown example '{other}' (expected A, B, C1, C2 or D)"))),
        }
    }
}

/// A generated table together with the latent generating group of each row.
#[derive(Clone, Debug)]
pub struct Simulated {
    pub data: MixedDataset,
    /// 0-based generating component per row (band, sign, or regression line).
    pub truth: Vec<usize>,
}

pub const D_DIM: usize = 20;

fn continuous(name: &str) -> ColumnMeta {
    ColumnMeta {
        name: name.to_string(),
        kind: ColumnKind::Continuous,
        categories: Vec::new(),
    }
}

/// Covariance of Example D's covariates: variance 4, covariance 3 within the
/// odd-indexed and within the even-indexed coordinates, 0 across.
pub fn example_d_covariance() -> DMatrix<f64> {
    DMatrix::from_fn(D_DIM, D_DIM, |i, j| {
        if i == j {
            4.0
        } else if i % 2 == j % 2 {
            3.0
        } else {
            0.0
        }
    })
}

/// Probability that Example D's response follows the first regression line.
pub fn example_d_weight(x1: f64) -> f64 {
    let (tau1, tau2, mu1, mu2) = (2.0f64, 2.0f64, 4.0, 6.0);
    let a = tau1 * (-(tau1 * tau1) / 2.0 * (x1 - mu1).powi(2)).exp();
    let b = tau2 * (-(tau2 * tau2) / 2.0 * (x1 - mu2).powi(2)).exp();
    if a + b == 0.0 {
        // Both terms underflow far from the centers; the nearer center wins.
        if (x1 - mu1).abs() < (x1 - mu2).abs() {
            1.0
        } else {
            0.0
        }
    } else {
        a / (a + b)
    }
}

/// Generates `n` rows of an example. Columns are `y` followed by the
/// covariates (`x`; `x1, x2`; `xc, xd`; `x1..x20`).
pub fn simulate(example: Example, n: usize, seed: u64) -> Result<Simulated> {
    if n < 10 {
        return Err(Error::arg(format!("n = {n} is below the minimum of 10")));
    }
    let mut rng = rng_from_seed(seed);
    let sd01 = Normal::new(0.0, 0.1).expect("valid normal");
    let mut rows = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    let columns = match example {
        Example::A => {
            let u = Uniform::new(-3.0, 3.0).expect("valid range");
            for _ in 0..n {
                let x: f64 = u.sample(&mut rng);
                let (band, level) = if x <= -1.0 {
                    (0, 2.0)
                } else if x >= 1.0 {
                    (2, -5.0)
                } else {
                    (1, 0.0)
                };
                rows.push(vec![level + sd01.sample(&mut rng), x]);
                truth.push(band);
            }
            vec![continuous("y"), continuous("x")]
        }
        Example::B => {
            let u = Uniform::new(-2.0, 2.0).expect("valid range");
            for _ in 0..n {
                let x1: f64 = u.sample(&mut rng);
                let x2: f64 = u.sample(&mut rng);
                let positive = (x1 * x2 * std::f64::consts::PI / 2.0).sin() <= 0.0;
                let m = if positive { 1.0 } else { -1.0 };
                rows.push(vec![m + sd01.sample(&mut rng), x1, x2]);
                truth.push(usize::from(!positive));
            }
            vec![continuous("y"), continuous("x1"), continuous("x2")]
        }
        Example::C1 | Example::C2 => {
            let u = Uniform::new(-3.0, 3.0).expect("valid range");
            let noise = Normal::new(0.0, 0.4).expect("valid normal");
            let slope1 = if example == Example::C1 { 2.0 } else { 12.0 };
            for _ in 0..n {
                let xc: f64 = u.sample(&mut rng);
                let level2 = rng.random::<f64>() >= 0.5;
                let sign = if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 };
                let (slope, offset) = if level2 { (12.0, 80.0) } else { (slope1, 0.0) };
                let y = sign * slope * xc + offset + noise.sample(&mut rng);
                rows.push(vec![y, xc, if level2 { 1.0 } else { 0.0 }]);
                truth.push(2 * usize::from(level2) + usize::from(sign > 0.0));
            }
            vec![
                continuous("y"),
                continuous("xc"),
                ColumnMeta {
                    name: "xd".into(),
                    kind: ColumnKind::Categorical,
                    categories: vec!["1".into(), "2".into()],
                },
            ]
        }
        Example::D => {
            let l = cholesky_lower(&example_d_covariance()).expect("example D covariance is positive definite");
            let mean = DVector::from_element(D_DIM, 4.0);
            let first = Normal::new(0.0, (1.0f64 / 16.0).sqrt()).expect("valid normal");
            let second = Normal::new(0.0, (1.0f64 / 8.0).sqrt()).expect("valid normal");
            for _ in 0..n {
                let x = sample_mvn(&mean, &l, &mut rng);
                let x1 = x[0];
                let on_first = rng.random::<f64>() < example_d_weight(x1);
                let y = if on_first {
                    x1 + first.sample(&mut rng)
                } else {
                    4.5 + 0.1 * x1 + second.sample(&mut rng)
                };
                let mut row = vec![y];
                row.extend(x.iter());
                rows.push(row);
                truth.push(usize::from(!on_first));
            }
            let mut cols = vec![continuous("y")];
            cols.extend((1..=D_DIM).map(|j| continuous(&format!("x{j}"))));
            cols
        }
    };
    Ok(Simulated {
        data: MixedDataset::new(columns, rows)?,
        truth,
    })
}

/// Covariate column names of an example, in table order.
pub fn covariate_names(example: Example) -> Vec<String> {
    match example {
        Example::A => vec!["x".into()],
        Example::B => vec!["x1".into(), "x2".into()],
        Example::C1 | Example::C2 => vec!["xc".into(), "xd".into()],
        Example::D => (1..=D_DIM).map(|j| format!("x{j}")).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_a_bands() {
        let sim = simulate(Example::A, 600, 1).unwrap();
        let y = sim.data.continuous_column("y").unwrap();
        let x = sim.data.continuous_column("x").unwrap();
        for ((yi, xi), t) in y.iter().zip(&x).zip(&sim.truth) {
            let level = [2.0, 0.0, -5.0][*t];
            assert!((yi - level).abs() < 0.6);
            assert!(xi.abs() < 3.0);
        }
    }

    #[test]
    fn example_b_sign_rule() {
        let sim = simulate(Example::B, 600, 2).unwrap();
        let ds = &sim.data;
        let (y, x1, x2) = (
            ds.continuous_column("y").unwrap(),
            ds.continuous_column("x1").unwrap(),
            ds.continuous_column("x2").unwrap(),
        );
        for i in 0..600 {
            let m = if (x1[i] * x2[i] * std::f64::consts::PI / 2.0).sin() <= 0.0 { 1.0 } else { -1.0 };
            assert!((y[i] - m).abs() < 0.6);
        }
    }

    #[test]
    fn example_d_correlations() {
        let sim = simulate(Example::D, 1000, 3).unwrap();
        let col = |j: usize| sim.data.continuous_column(&format!("x{j}")).unwrap();
        let corr = |a: &[f64], b: &[f64]| {
            let n = a.len() as f64;
            let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
            let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
            let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
            let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
            cov / (va * vb).sqrt()
        };
        assert!((corr(&col(1), &col(3)) - 0.75).abs() < 0.05);
        assert!(corr(&col(1), &col(2)).abs() < 0.1);
    }

    #[test]
    fn weights_and_errors() {
        assert!((example_d_weight(5.0) - 0.5).abs() < 1e-12);
        assert!(example_d_weight(-10.0) > 0.99);
        assert!(simulate(Example::A, 5, 0).is_err());
        assert!("E".parse::<Example>().is_err());
        assert_eq!("c1".parse::<Example>().unwrap(), Example::C1);
    }

    #[test]
    fn deterministic() {
        let a = simulate(Example::C1, 50, 9).unwrap();
        let b = simulate(Example::C1, 50, 9).unwrap();
        assert_eq!(a.data, b.data);
    }
}
