//! Bagged forest of Gini trees with per-split feature subsampling.
//!
//! Each tree draws its bootstrap sample and split features from its own
//! derived stream, so the fitted forest is identical regardless of the order
//! (or parallelism) in which trees are grown.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{fit_class_tree, ClassTree, TreeConfig};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { n_trees: 50, max_depth: 8, min_samples_split: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub n_classes: usize,
    pub trees: Vec<ClassTree>,
}

impl ForestModel {
    pub fn predict(&self, x: &[f64]) -> u8 {
        let mut votes = vec![0usize; self.n_classes];
        for tree in &self.trees {
            votes[tree.predict(x) as usize] += 1;
        }
        let mut best = 0usize;
        for (i, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = i;
            }
        }
        best as u8
    }
}

pub fn fit(
    x: &[Vec<f64>],
    y: &[u8],
    n_classes: usize,
    cfg: &ForestConfig,
    seed: u64,
) -> Result<ForestModel> {
    if x.is_empty() {
        return Err(Error::EmptyInput("forest fit: no samples".into()));
    }
    let n = x.len();
    let n_features = x[0].len();
    let mtry = (n_features as f64).sqrt().floor().max(1.0) as usize;
    let tree_cfg = TreeConfig {
        max_depth: cfg.max_depth,
        min_samples_split: cfg.min_samples_split,
        features_per_split: Some(mtry),
    };
    let mut trees = Vec::with_capacity(cfg.n_trees);
    for t in 0..cfg.n_trees {
        let mut stream = rng::derive_stream(seed, 0x1000 + t as u64);
        let bootstrap: Vec<usize> = (0..n).map(|_| stream.gen_range(0..n)).collect();
        trees.push(fit_class_tree(x, y, n_classes, &bootstrap, &tree_cfg, Some(&mut stream)));
    }
    Ok(ForestModel { n_classes, trees })
}
