//! Enumeration checks of the VI lower bound on small sets.

use std::collections::HashMap;

use underlap::partitions::{representative_index, vi_lower_bound, Partition, SimilarityMatrix};

use super::all_partitions;

fn entropy_bits(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts.filter(|&c| c > 0).map(|c| c as f64 / n).map(|p| -p * p.log2()).sum()
}

/// Variation of information in bits, `H(a) + H(b) − 2 I(a, b)`, from the
/// contingency table.
pub fn vi_bits(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut ca: HashMap<usize, usize> = HashMap::new();
    let mut cb: HashMap<usize, usize> = HashMap::new();
    let mut cab: HashMap<(usize, usize), usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *ca.entry(x).or_default() += 1;
        *cb.entry(y).or_default() += 1;
        *cab.entry((x, y)).or_default() += 1;
    }
    let (ha, hb) = (entropy_bits(ca.values().copied(), n), entropy_bits(cb.values().copied(), n));
    let hab = entropy_bits(cab.values().copied(), n);
    2.0 * hab - ha - hb
}

/// With a single draw the bound equals the VI to the draw. Checked for
/// every ordered pair of partitions of `n ≤ 5` items; it must vanish
/// exactly on the diagonal.
pub fn bound_matches_vi_enumeration(max_n: usize) -> Result<usize, String> {
    let mut checked = 0;
    for n in 1..=max_n {
        let parts = all_partitions(n);
        for truth in &parts {
            let psm = SimilarityMatrix::from_allocations(std::slice::from_ref(truth)).map_err(|e| e.to_string())?;
            for cand in &parts {
                let b = vi_lower_bound(&Partition::from_labels(cand), &psm).map_err(|e| e.to_string())?;
                let expect = vi_bits(cand, truth);
                if (b - expect).abs() > 1e-9 {
                    return Err(format!("n={n} {cand:?} vs {truth:?}: {b} vs {expect}"));
                }
                if (cand == truth) != (b.abs() < 1e-12) {
                    return Err(format!("n={n} {cand:?} vs {truth:?}: bound {b}"));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

/// Hand-computed bounds.
///
/// Two points, PSM from `{1}{2}` and `{12}` (π₁₂ = 1/2):
/// candidate `{12}` gives `log₂(2) + log₂(3/2) − 2 log₂(3/2) = 1 − log₂ 1.5`;
/// candidate `{1}{2}` gives `log₂ 1.5`.
///
/// Three points, PSM from `{12|3}` and `{1|23}`: candidate `{12|3}` gives
/// `1 − 2 log₂(1.5) / 3`.
pub fn hand_values() -> Result<(), String> {
    let cases: [(&[Vec<usize>], Vec<usize>, f64); 3] = [
        (&[vec![0, 1], vec![0, 0]], vec![0, 0], 0.415_037_499_278_843_8),
        (&[vec![0, 1], vec![0, 0]], vec![0, 1], 0.584_962_500_721_156_2),
        (&[vec![0, 0, 1], vec![0, 1, 1]], vec![0, 0, 1], 0.610_024_999_519_229_2),
    ];
    for (draws, cand, expect) in cases {
        let psm = SimilarityMatrix::from_allocations(draws).map_err(|e| e.to_string())?;
        let b = vi_lower_bound(&Partition::from_labels(&cand), &psm).map_err(|e| e.to_string())?;
        if (b - expect).abs() > 1e-9 {
            return Err(format!("{cand:?}: {b} vs {expect}"));
        }
    }
    Ok(())
}

/// Relabeling the draws or the candidate leaves the bound and the chosen
/// representative bit-for-bit unchanged.
pub fn label_invariance(max_n: usize) -> Result<usize, String> {
    let mut checked = 0;
    for n in 2..=max_n {
        let parts = all_partitions(n);
        for (w, window) in parts.windows(3).enumerate() {
            let draws: Vec<Vec<usize>> = window.to_vec();
            let shuffled: Vec<Vec<usize>> = draws
                .iter()
                .enumerate()
                .map(|(s, d)| d.iter().map(|&l| (l + s + w) * 7 % 11 + 3 * (l % 2)).collect())
                .collect();
            let same_labels = |a: &[usize], b: &[usize]| Partition::from_labels(a) == Partition::from_labels(b);
            if !draws.iter().zip(&shuffled).all(|(a, b)| same_labels(a, b)) {
                continue;
            }
            let psm_a = SimilarityMatrix::from_allocations(&draws).map_err(|e| e.to_string())?;
            let psm_b = SimilarityMatrix::from_allocations(&shuffled).map_err(|e| e.to_string())?;
            for cand in &parts {
                let relabeled: Vec<usize> = cand.iter().map(|&l| 100 - l).collect();
                let a = vi_lower_bound(&Partition::from_labels(cand), &psm_a).map_err(|e| e.to_string())?;
                let b = vi_lower_bound(&Partition::from_labels(&relabeled), &psm_b).map_err(|e| e.to_string())?;
                if a.to_bits() != b.to_bits() {
                    return Err(format!("{cand:?}: {a} vs {b}"));
                }
                checked += 1;
            }
            let ra = representative_index(&draws).map_err(|e| e.to_string())?;
            let rb = representative_index(&shuffled).map_err(|e| e.to_string())?;
            if ra.0 != rb.0 || ra.1.to_bits() != rb.1.to_bits() {
                return Err(format!("representative {ra:?} vs {rb:?}"));
            }
        }
    }
    Ok(checked)
}
