//! Gradient-boosted decision trees: additive regression trees fit to softmax
//! cross-entropy gradients, one tree per class per round, with shrinkage.

use serde::{Deserialize, Serialize};

use super::tree::{fit_reg_tree, RegTree, TreeConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbdtConfig {
    pub rounds: usize,
    pub max_depth: usize,
    pub shrinkage: f64,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        GbdtConfig { rounds: 100, max_depth: 3, shrinkage: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub n_classes: usize,
    pub shrinkage: f64,
    /// trees[round][class]
    pub trees: Vec<Vec<RegTree>>,
}

impl GbdtModel {
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut f = vec![0.0; self.n_classes];
        for round in &self.trees {
            for (m, tree) in round.iter().enumerate() {
                f[m] += self.shrinkage * tree.predict(x);
            }
        }
        f
    }

    pub fn predict(&self, x: &[f64]) -> u8 {
        let f = self.scores(x);
        let mut best = 0usize;
        for (i, &v) in f.iter().enumerate() {
            if v > f[best] {
                best = i;
            }
        }
        best as u8
    }
}

fn softmax_rows(f: &[Vec<f64>]) -> Vec<Vec<f64>> {
    f.iter()
        .map(|row| {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = row.iter().map(|&v| (v - max).exp()).collect();
            let sum: f64 = exps.iter().sum();
            exps.into_iter().map(|e| e / sum).collect()
        })
        .collect()
}

pub fn fit(x: &[Vec<f64>], y: &[u8], n_classes: usize, cfg: &GbdtConfig) -> Result<GbdtModel> {
    if x.is_empty() {
        return Err(Error::EmptyInput("gbdt fit: no samples".into()));
    }
    let n = x.len();
    let indices: Vec<usize> = (0..n).collect();
    let tree_cfg = TreeConfig::full(cfg.max_depth, 2);
    let mut scores = vec![vec![0.0f64; n_classes]; n];
    let mut rounds = Vec::with_capacity(cfg.rounds);
    for _ in 0..cfg.rounds {
        let probs = softmax_rows(&scores);
        let mut class_trees = Vec::with_capacity(n_classes);
        for m in 0..n_classes {
            let residual: Vec<f64> = (0..n)
                .map(|i| (if y[i] as usize == m { 1.0 } else { 0.0 }) - probs[i][m])
                .collect();
            // Newton-step leaf value for multiclass log-loss (Friedman):
            // (M-1)/M * sum(r) / sum(|r| (1 - |r|))
            let km = (n_classes as f64 - 1.0) / n_classes as f64;
            let leaf_value = |idx: &[usize]| -> f64 {
                let num: f64 = idx.iter().map(|&i| residual[i]).sum();
                let den: f64 = idx
                    .iter()
                    .map(|&i| residual[i].abs() * (1.0 - residual[i].abs()))
                    .sum();
                if den.abs() < 1e-12 {
                    0.0
                } else {
                    km * num / den
                }
            };
            let tree = fit_reg_tree(x, &residual, &indices, &tree_cfg, &leaf_value);
            for i in 0..n {
                scores[i][m] += cfg.shrinkage * tree.predict(&x[i]);
            }
            class_trees.push(tree);
        }
        rounds.push(class_trees);
    }
    Ok(GbdtModel { n_classes, shrinkage: cfg.shrinkage, trees: rounds })
}
