//! CART-style trees: Gini classification trees and squared-error regression
//! trees (the latter back the boosted ensemble).
//!
//! Determinism rules: features are scanned in index order, a split replaces
//! the incumbent only on strictly larger gain, and leaf majorities break ties
//! toward the lowest label.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Number of features considered per split; `None` means all.
    pub features_per_split: Option<usize>,
}

impl TreeConfig {
    pub fn full(max_depth: usize, min_samples_split: usize) -> Self {
        TreeConfig { max_depth, min_samples_split, features_per_split: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node<L> {
    Leaf { value: L },
    Split {
        feature: usize,
        /// Samples with feature value < threshold go left.
        threshold: f64,
        left: Box<Node<L>>,
        right: Box<Node<L>>,
    },
}

impl<L: Copy> Node<L> {
    pub fn predict(&self, features: &[f64]) -> L {
        match self {
            Node::Leaf { value } => *value,
            Node::Split { feature, threshold, left, right } => {
                if features[*feature] < *threshold {
                    left.predict(features)
                } else {
                    right.predict(features)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassTree {
    pub root: Node<u8>,
}

impl ClassTree {
    pub fn predict(&self, features: &[f64]) -> u8 {
        self.root.predict(features)
    }
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / nf;
            p * p
        })
        .sum::<f64>()
}

fn majority(counts: &[usize]) -> u8 {
    let mut best = 0usize;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best as u8
}

fn candidate_features(
    n_features: usize,
    cfg: &TreeConfig,
    rng: &mut Option<&mut ChaCha8Rng>,
) -> Vec<usize> {
    match (cfg.features_per_split, rng) {
        (Some(m), Some(rng)) if m < n_features => {
            let mut idx: Vec<usize> = sample(*rng, n_features, m).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..n_features).collect(),
    }
}

/// Fit a Gini classification tree on the given sample indices.
pub fn fit_class_tree(
    x: &[Vec<f64>],
    y: &[u8],
    n_classes: usize,
    indices: &[usize],
    cfg: &TreeConfig,
    mut rng: Option<&mut ChaCha8Rng>,
) -> ClassTree {
    ClassTree { root: grow_class(x, y, n_classes, indices, cfg, &mut rng, 0) }
}

fn grow_class(
    x: &[Vec<f64>],
    y: &[u8],
    n_classes: usize,
    indices: &[usize],
    cfg: &TreeConfig,
    rng: &mut Option<&mut ChaCha8Rng>,
    depth: usize,
) -> Node<u8> {
    let mut counts = vec![0usize; n_classes];
    for &i in indices {
        counts[y[i] as usize] += 1;
    }
    let n = indices.len();
    let parent_gini = gini(&counts, n);
    let leaf = || Node::Leaf { value: majority(&counts) };
    if depth >= cfg.max_depth || n < cfg.min_samples_split || parent_gini == 0.0 {
        return leaf();
    }

    let n_features = x[indices[0]].len();
    let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
    for f in candidate_features(n_features, cfg, rng) {
        let mut vals: Vec<(f64, u8)> = indices.iter().map(|&i| (x[i][f], y[i])).collect();
        vals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut left = vec![0usize; n_classes];
        let mut right = counts.clone();
        for i in 1..n {
            let (v_prev, l_prev) = vals[i - 1];
            left[l_prev as usize] += 1;
            right[l_prev as usize] -= 1;
            if vals[i].0 <= v_prev {
                continue;
            }
            let nl = i;
            let nr = n - i;
            let weighted =
                (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / n as f64;
            let gain = parent_gini - weighted;
            if gain > best.map_or(1e-12, |b| b.0) {
                best = Some((gain, f, 0.5 * (v_prev + vals[i].0)));
            }
        }
    }

    match best {
        None => leaf(),
        Some((_, feature, threshold)) => {
            let (li, ri): (Vec<usize>, Vec<usize>) =
                indices.iter().partition(|&&i| x[i][feature] < threshold);
            Node::Split {
                feature,
                threshold,
                left: Box::new(grow_class(x, y, n_classes, &li, cfg, rng, depth + 1)),
                right: Box::new(grow_class(x, y, n_classes, &ri, cfg, rng, depth + 1)),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegTree {
    pub root: Node<f64>,
}

impl RegTree {
    pub fn predict(&self, features: &[f64]) -> f64 {
        self.root.predict(features)
    }
}

/// Fit a squared-error regression tree. `leaf_value` maps a leaf's sample
/// indices to its output (plain mean, or a boosting step formula).
pub fn fit_reg_tree(
    x: &[Vec<f64>],
    targets: &[f64],
    indices: &[usize],
    cfg: &TreeConfig,
    leaf_value: &dyn Fn(&[usize]) -> f64,
) -> RegTree {
    RegTree { root: grow_reg(x, targets, indices, cfg, leaf_value, 0) }
}

fn grow_reg(
    x: &[Vec<f64>],
    t: &[f64],
    indices: &[usize],
    cfg: &TreeConfig,
    leaf_value: &dyn Fn(&[usize]) -> f64,
    depth: usize,
) -> Node<f64> {
    let n = indices.len();
    let leaf = || Node::Leaf { value: leaf_value(indices) };
    if depth >= cfg.max_depth || n < cfg.min_samples_split {
        return leaf();
    }
    let total: f64 = indices.iter().map(|&i| t[i]).sum();
    let n_features = x[indices[0]].len();
    let mut best: Option<(f64, usize, f64)> = None; // (sse reduction, feature, threshold)
    #[allow(clippy::needless_range_loop)] // f indexes into every row of x
    for f in 0..n_features {
        let mut vals: Vec<(f64, f64)> = indices.iter().map(|&i| (x[i][f], t[i])).collect();
        vals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut left_sum = 0.0;
        for i in 1..n {
            let (v_prev, t_prev) = vals[i - 1];
            left_sum += t_prev;
            if vals[i].0 <= v_prev {
                continue;
            }
            let nl = i as f64;
            let nr = (n - i) as f64;
            let right_sum = total - left_sum;
            // SSE reduction = nl*mean_l^2 + nr*mean_r^2 - n*mean^2 (constant
            // offset dropped; compare the variable part only)
            let score = left_sum * left_sum / nl + right_sum * right_sum / nr;
            if score > best.map_or(total * total / n as f64 + 1e-12, |b| b.0) {
                best = Some((score, f, 0.5 * (v_prev + vals[i].0)));
            }
        }
    }
    match best {
        None => leaf(),
        Some((_, feature, threshold)) => {
            let (li, ri): (Vec<usize>, Vec<usize>) =
                indices.iter().partition(|&&i| x[i][feature] < threshold);
            Node::Split {
                feature,
                threshold,
                left: Box::new(grow_reg(x, t, &li, cfg, leaf_value, depth + 1)),
                right: Box::new(grow_reg(x, t, &ri, cfg, leaf_value, depth + 1)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_indices(n: usize) -> Vec<usize> {
        (0..n).collect()
    }

    #[test]
    fn shatters_separable_data() {
        let x = vec![
            vec![0.0, 0.1],
            vec![0.2, 0.9],
            vec![1.0, 0.2],
            vec![1.1, 0.8],
        ];
        let y = vec![0u8, 0, 1, 1];
        let tree = fit_class_tree(&x, &y, 2, &all_indices(4), &TreeConfig::full(8, 2), None);
        for (xi, &yi) in x.iter().zip(&y) {
            assert_eq!(tree.predict(xi), yi);
        }
    }

    #[test]
    fn pure_node_is_leaf() {
        let x = vec![vec![0.0], vec![1.0]];
        let y = vec![1u8, 1];
        let tree = fit_class_tree(&x, &y, 2, &all_indices(2), &TreeConfig::full(8, 2), None);
        assert!(matches!(tree.root, Node::Leaf { value: 1 }));
    }

    #[test]
    fn respects_depth_cap() {
        // alternating labels along one feature force deep splits
        let x: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64]).collect();
        let y: Vec<u8> = (0..64).map(|i| (i % 2) as u8).collect();
        let tree = fit_class_tree(&x, &y, 2, &all_indices(64), &TreeConfig::full(3, 2), None);
        assert!(tree.root.depth() <= 3);
    }

    #[test]
    fn majority_tie_breaks_low() {
        let x = vec![vec![0.0], vec![0.0]];
        let y = vec![0u8, 1];
        let tree = fit_class_tree(&x, &y, 2, &all_indices(2), &TreeConfig::full(8, 2), None);
        assert_eq!(tree.predict(&[0.0]), 0);
    }

    #[test]
    fn regression_tree_fits_step() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let t: Vec<f64> = (0..20).map(|i| if i < 10 { -1.0 } else { 1.0 }).collect();
        let mean = |idx: &[usize]| idx.iter().map(|&i| t[i]).sum::<f64>() / idx.len() as f64;
        let tree = fit_reg_tree(&x, &t, &all_indices(20), &TreeConfig::full(2, 2), &mean);
        assert!((tree.predict(&[3.0]) + 1.0).abs() < 1e-12);
        assert!((tree.predict(&[15.0]) - 1.0).abs() < 1e-12);
    }
}
