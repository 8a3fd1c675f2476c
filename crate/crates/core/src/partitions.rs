//! Posterior similarity matrices and representative-partition selection by
//! the lower bound on posterior expected variation of information.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixtures::PosteriorDraws;

/// Dense CSV output is refused above this many observations.
pub const MAX_DENSE_PSM: usize = 5000;

/// Cluster labels relabeled `1..=k` by first appearance.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Canonicalizes arbitrary labels.
    pub fn from_labels(raw: &[usize]) -> Self {
        let mut map = HashMap::new();
        let labels: Vec<usize> = raw
            .iter()
            .map(|l| {
                let next = map.len() + 1;
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self { k: map.len(), labels }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Member indices of each cluster, ordered by label.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, l) in self.labels.iter().enumerate() {
            out[l - 1].push(i);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters().iter().map(Vec::len).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["cluster"])?;
        for l in &self.labels {
            out.write_record([l.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut labels = Vec::new();
        for (row, rec) in rd.records().enumerate() {
            let rec = rec?;
            let cell = rec.get(0).unwrap_or("").trim();
            labels.push(cell.parse::<usize>().map_err(|e| Error::Parse {
                row: row + 1,
                column: "cluster".into(),
                message: e.to_string(),
            })?);
        }
        Ok(Self::from_labels(&labels))
    }
}

/// Pairwise co-clustering frequencies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Builds the matrix from allocation vectors of equal length.
    pub fn from_allocations(allocations: &[Vec<usize>]) -> Result<Self> {
        let first = allocations.first().ok_or_else(|| Error::arg("no partitions supplied"))?;
        let n = first.len();
        if allocations.iter().any(|a| a.len() != n) {
            return Err(Error::shape("partitions have different lengths"));
        }
        let s = allocations.len() as f64;
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut counts = vec![0u32; n];
                for z in allocations {
                    let zi = z[i];
                    for (c, zj) in counts.iter_mut().zip(z) {
                        if *zj == zi {
                            *c += 1;
                        }
                    }
                }
                counts.into_iter().map(|c| c as f64 / s).collect()
            })
            .collect();
        let mut values: Vec<f64> = rows.into_iter().flatten().collect();
        for i in 0..n {
            values[i * n + i] = 1.0;
        }
        Ok(Self { n, values })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        if self.n > MAX_DENSE_PSM {
            return Err(Error::Capacity(format!(
                "dense similarity matrix output is limited to n = {MAX_DENSE_PSM}"
            )));
        }
        let mut out = csv::Writer::from_writer(w);
        for i in 0..self.n {
            out.write_record(self.row(i).iter().map(|v| v.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Posterior similarity matrix of the retained allocations.
pub fn similarity_matrix(draws: &PosteriorDraws) -> Result<SimilarityMatrix> {
    SimilarityMatrix::from_allocations(&draws.allocations())
}

/// Lower bound (in bits) on the posterior expected VI of `candidate`:
/// `(1/n) Σ_i [log₂ Σ_j 1(c_i=c_j) + log₂ Σ_j π_ij − 2 log₂ Σ_j 1(c_i=c_j) π_ij]`.
pub fn vi_lower_bound(candidate: &Partition, psm: &SimilarityMatrix) -> Result<f64> {
    vi_lower_bound_labels(candidate.labels(), psm)
}

fn vi_lower_bound_labels(labels: &[usize], psm: &SimilarityMatrix) -> Result<f64> {
    let n = psm.n();
    if labels.len() != n {
        return Err(Error::shape(format!(
            "candidate has {} labels, similarity matrix is {n}x{n}",
            labels.len()
        )));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let total: f64 = (0..n)
        .map(|i| {
            let row = psm.row(i);
            let (mut same, mut mass, mut joint) = (0.0f64, 0.0f64, 0.0f64);
            for j in 0..n {
                mass += row[j];
                if labels[j] == labels[i] {
                    same += 1.0;
                    joint += row[j];
                }
            }
            same.log2() + mass.log2() - 2.0 * joint.log2()
        })
        .sum();
    Ok(total / n as f64)
}

/// Index of the allocation minimizing the VI bound against the similarity
/// matrix of all allocations; ties go to the earliest.
pub fn representative_index(allocations: &[Vec<usize>]) -> Result<(usize, f64)> {
    let psm = SimilarityMatrix::from_allocations(allocations)?;
    // Score each distinct partition once, keeping its earliest index.
    let mut seen: HashMap<Partition, usize> = HashMap::new();
    let mut unique = Vec::new();
    for (s, z) in allocations.iter().enumerate() {
        let p = Partition::from_labels(z);
        if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(p) {
            e.insert(s);
            unique.push(s);
        }
    }
    let scores: Vec<(usize, f64)> = unique
        .par_iter()
        .map(|&s| vi_lower_bound_labels(&allocations[s], &psm).map(|v| (s, v)))
        .collect::<Result<_>>()?;
    let mut best = scores[0];
    for &(s, v) in &scores[1..] {
        if v < best.1 || (v == best.1 && s < best.0) {
            best = (s, v);
        }
    }
    Ok(best)
}

/// The retained partition with the smallest VI lower bound.
pub fn representative_partition(draws: &PosteriorDraws) -> Result<Partition> {
    let allocations = draws.allocations();
    let (idx, _) = representative_index(&allocations)?;
    Ok(Partition::from_labels(&allocations[idx]))
}
