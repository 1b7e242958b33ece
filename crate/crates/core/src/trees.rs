//! Oblivious decision trees: level-wise greedy structure search with a noisy
//! split score, and leaf estimation by per-leaf averaging.
//!
//! Leaf index of a row is the binary code of its split outcomes, level 0 in
//! the least significant bit; an outcome is 1 when `value <= border`.

use rand_distr::StandardNormal;

use crate::data::{BorderSet, QuantizedDataset};
use crate::{Error, Result};

/// One oblivious split: `x[feature] <= borders[feature][border]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Split {
    pub feature: usize,
    pub border: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObliviousTree {
    splits: Vec<Split>,
    leaf_values: Vec<f64>,
}

impl ObliviousTree {
    pub fn new(splits: Vec<Split>, leaf_values: Vec<f64>) -> Result<Self> {
        if splits.is_empty() {
            return Err(Error::InvalidModel("tree must have depth >= 1".into()));
        }
        if splits.len() >= usize::BITS as usize || leaf_values.len() != 1 << splits.len() {
            return Err(Error::InvalidModel(format!(
                "depth-{} tree needs {} leaves, found {}",
                splits.len(),
                1u128 << splits.len().min(127),
                leaf_values.len()
            )));
        }
        Ok(Self {
            splits,
            leaf_values,
        })
    }

    pub fn depth(&self) -> usize {
        self.splits.len()
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    pub fn leaf_values(&self) -> &[f64] {
        &self.leaf_values
    }

    /// Checks that every split references an existing border.
    pub fn validate(&self, borders: &BorderSet) -> Result<()> {
        for s in &self.splits {
            if s.feature >= borders.n_features() || s.border >= borders.feature(s.feature).len() {
                return Err(Error::InvalidModel(format!(
                    "split (feature {}, border {}) out of range",
                    s.feature, s.border
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn leaf_of_row(&self, borders: &BorderSet, x: &[f64]) -> usize {
        self.splits.iter().enumerate().fold(0, |acc, (level, s)| {
            acc | (usize::from(x[s.feature] <= borders.feature(s.feature)[s.border]) << level)
        })
    }

    pub(crate) fn leaf_of_bins(&self, q: &QuantizedDataset, row: usize) -> usize {
        self.splits.iter().enumerate().fold(0, |acc, (level, s)| {
            acc | (usize::from(q.bin(row, s.feature) as usize <= s.border) << level)
        })
    }
}

/// Leaf index per training row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafAssignment {
    leaves: Vec<usize>,
    n_leaves: usize,
}

impl LeafAssignment {
    pub fn new(leaves: Vec<usize>, n_leaves: usize) -> Result<Self> {
        if let Some(&bad) = leaves.iter().find(|&&l| l >= n_leaves) {
            return Err(Error::InvalidData(format!(
                "leaf index {bad} >= {n_leaves}"
            )));
        }
        Ok(Self { leaves, n_leaves })
    }

    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn n_rows(&self) -> usize {
        self.leaves.len()
    }

    pub fn leaf_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_leaves];
        for &l in &self.leaves {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Split-score noise: Gaussian with standard deviation
/// `random_strength * std(g) / (1 + N^(learning_rate * iteration))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionParams {
    pub random_strength: f64,
    pub learning_rate: f64,
    pub iteration: usize,
}

impl SelectionParams {
    pub fn deterministic() -> Self {
        Self {
            random_strength: 0.0,
            learning_rate: 0.0,
            iteration: 0,
        }
    }

    pub fn noise_std(&self, g: &[f64]) -> f64 {
        if self.random_strength == 0.0 || g.is_empty() {
            return 0.0;
        }
        let n = g.len() as f64;
        let mean = g.iter().sum::<f64>() / n;
        let var = g.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let decay = 1.0 + n.powf(self.learning_rate * self.iteration as f64);
        self.random_strength * var.sqrt() / decay
    }
}

/// `sqrt(sum over leaves of (sum of g in leaf)^2 / |leaf|)`; empty leaves
/// contribute nothing.
pub fn score_partition(g: &[f64], assignment: &LeafAssignment) -> f64 {
    let mut sums = vec![0.0; assignment.n_leaves()];
    let mut counts = vec![0usize; assignment.n_leaves()];
    for (&v, &l) in g.iter().zip(assignment.leaves()) {
        sums[l] += v;
        counts[l] += 1;
    }
    sums.iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| s * s / c as f64)
        .sum::<f64>()
        .sqrt()
}

/// Greedy level-wise split selection on the noisy score.
///
/// At each level every unused `(feature, border)` pair is scored on the
/// refined partition; when `random_strength > 0` one standard normal is drawn
/// per scored candidate, in ascending `(feature, border)` order, and scaled by
/// [`SelectionParams::noise_std`]. The argmax wins, ties going to the lowest
/// pair. Returns fewer than `depth` splits if candidates run out.
pub fn build_structure<R: rand::Rng + ?Sized>(
    g: &[f64],
    q: &QuantizedDataset,
    depth: usize,
    sel: &SelectionParams,
    rng: &mut R,
) -> Result<Vec<Split>> {
    let n = q.n_rows();
    if g.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.len(),
        });
    }
    let borders = q.borders();
    let total: usize = (0..q.n_features()).map(|f| borders.feature(f).len()).sum();
    if total == 0 {
        return Err(Error::NoCandidates);
    }
    let noise_std = sel.noise_std(g);
    let noisy = sel.random_strength > 0.0;

    let mut leaf = vec![0usize; n];
    let mut used: Vec<Split> = Vec::with_capacity(depth);
    let mut sums = Vec::new();
    let mut counts = Vec::new();

    for level in 0..depth.min(total) {
        let n_leaves = 1usize << level;
        let mut best: Option<(Split, f64)> = None;
        for f in 0..q.n_features() {
            let n_bins = borders.feature(f).len() + 1;
            if n_bins == 1 {
                continue;
            }
            sums.clear();
            sums.resize(n_leaves * n_bins, 0.0);
            counts.clear();
            counts.resize(n_leaves * n_bins, 0usize);
            for ((&bin, &l), &v) in q.column(f).iter().zip(&leaf).zip(g) {
                let k = l * n_bins + bin as usize;
                sums[k] += v;
                counts[k] += 1;
            }
            let totals: Vec<(f64, usize)> = (0..n_leaves)
                .map(|l| {
                    let r = l * n_bins..(l + 1) * n_bins;
                    (sums[r.clone()].iter().sum(), counts[r].iter().sum())
                })
                .collect();
            // running "bin <= b" sums per leaf
            let mut left: Vec<(f64, usize)> = vec![(0.0, 0); n_leaves];
            for b in 0..n_bins - 1 {
                for (l, acc) in left.iter_mut().enumerate() {
                    acc.0 += sums[l * n_bins + b];
                    acc.1 += counts[l * n_bins + b];
                }
                let split = Split {
                    feature: f,
                    border: b,
                };
                if used.contains(&split) {
                    continue;
                }
                let score = left
                    .iter()
                    .zip(&totals)
                    .map(|(&(ls, lc), &(ts, tc))| {
                        let (rs, rc) = (ts - ls, tc - lc);
                        let l = if lc > 0 { ls * ls / lc as f64 } else { 0.0 };
                        let r = if rc > 0 { rs * rs / rc as f64 } else { 0.0 };
                        l + r
                    })
                    .sum::<f64>()
                    .sqrt();
                let perturbed = if noisy {
                    let z: f64 = rng.sample(StandardNormal);
                    score + noise_std * z
                } else {
                    score
                };
                if best.is_none_or(|(_, v)| perturbed > v) {
                    best = Some((split, perturbed));
                }
            }
        }
        let Some((split, _)) = best else { break };
        for (l, &bin) in leaf.iter_mut().zip(q.column(split.feature)) {
            *l |= usize::from(bin as usize <= split.border) << level;
        }
        used.push(split);
    }
    Ok(used)
}

pub fn assign_leaves(splits: &[Split], q: &QuantizedDataset) -> Result<LeafAssignment> {
    let borders = q.borders();
    for s in splits {
        if s.feature >= q.n_features() || s.border >= borders.feature(s.feature).len() {
            return Err(Error::InvalidData(format!(
                "split (feature {}, border {}) out of range",
                s.feature, s.border
            )));
        }
    }
    let mut leaves = vec![0usize; q.n_rows()];
    for (level, s) in splits.iter().enumerate() {
        for (l, &bin) in leaves.iter_mut().zip(q.column(s.feature)) {
            *l |= usize::from(bin as usize <= s.border) << level;
        }
    }
    LeafAssignment::new(leaves, 1 << splits.len())
}

/// Per-leaf mean of `target`; empty leaves get 0.
pub fn estimate_leaves(target: &[f64], assignment: &LeafAssignment) -> Result<Vec<f64>> {
    if target.len() != assignment.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: assignment.n_rows(),
            found: target.len(),
        });
    }
    let mut sums = vec![0.0; assignment.n_leaves()];
    let mut counts = vec![0usize; assignment.n_leaves()];
    for (&v, &l) in target.iter().zip(assignment.leaves()) {
        sums[l] += v;
        counts[l] += 1;
    }
    Ok(sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect())
}

/// Evaluates a tree on one raw feature row.
pub fn apply_tree(tree: &ObliviousTree, borders: &BorderSet, x: &[f64]) -> Result<f64> {
    if x.len() != borders.n_features() {
        return Err(Error::DimensionMismatch {
            expected: borders.n_features(),
            found: x.len(),
        });
    }
    tree.validate(borders)?;
    Ok(tree.leaf_values[tree.leaf_of_row(borders, x)])
}
