//! From-scratch classifier suite behind one train/predict interface.
//!
//! Five kinds: a majority-class prior baseline, a Gini decision tree, a
//! bagged random forest, a one-hidden-layer MLP, and gradient-boosted trees.
//! All training is reproducible bit-for-bit under a fixed seed, and
//! prediction is deterministic.

pub mod forest;
pub mod gbdt;
pub mod mlp;
pub mod tree;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{RssiBounds, SampleSet, Scheme};
use crate::error::{Error, Result};
use crate::metrics::{self, MislabelSource, PredictionReport};
use crate::rng;

pub const MODEL_FORMAT_VERSION: u32 = 1;

fn d_depth8() -> usize {
    8
}
fn d_minsplit() -> usize {
    2
}
fn d_trees() -> usize {
    50
}
fn d_hidden() -> usize {
    16
}
fn d_epochs() -> usize {
    200
}
fn d_lr() -> f64 {
    0.05
}
fn d_batch() -> usize {
    32
}
fn d_rounds() -> usize {
    100
}
fn d_gbdt_depth() -> usize {
    3
}
fn d_shrinkage() -> f64 {
    0.1
}

/// Classifier kind plus hyperparameters. Every field has a documented default
/// and unknown keys are rejected when parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum PredictorConfig {
    /// Constant majority-class predictor.
    PriorBaseline {
        #[serde(default)]
        seed: u64,
    },
    /// Single CART tree with Gini impurity.
    DecisionTree {
        #[serde(default = "d_depth8")]
        max_depth: usize,
        #[serde(default = "d_minsplit")]
        min_samples_split: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Bagging of Gini trees with sqrt(features) subsampling per split.
    RandomForest {
        #[serde(default = "d_trees")]
        n_trees: usize,
        #[serde(default = "d_depth8")]
        max_depth: usize,
        #[serde(default = "d_minsplit")]
        min_samples_split: usize,
        #[serde(default)]
        seed: u64,
    },
    /// One hidden layer, logistic activations, softmax output.
    Mlp {
        #[serde(default = "d_hidden")]
        hidden_units: usize,
        #[serde(default = "d_epochs")]
        epochs: usize,
        #[serde(default = "d_lr")]
        learning_rate: f64,
        #[serde(default = "d_batch")]
        batch_size: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Additive regression trees on softmax gradients.
    Gbdt {
        #[serde(default = "d_rounds")]
        rounds: usize,
        #[serde(default = "d_gbdt_depth")]
        max_depth: usize,
        #[serde(default = "d_shrinkage")]
        shrinkage: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl PredictorConfig {
    pub fn kind_name(&self) -> &'static str {
        match self {
            PredictorConfig::PriorBaseline { .. } => "prior-baseline",
            PredictorConfig::DecisionTree { .. } => "decision-tree",
            PredictorConfig::RandomForest { .. } => "random-forest",
            PredictorConfig::Mlp { .. } => "mlp",
            PredictorConfig::Gbdt { .. } => "gbdt",
        }
    }

    fn sort_key(&self) -> usize {
        match self {
            PredictorConfig::PriorBaseline { .. } => 0,
            PredictorConfig::DecisionTree { .. } => 1,
            PredictorConfig::RandomForest { .. } => 2,
            PredictorConfig::Mlp { .. } => 3,
            PredictorConfig::Gbdt { .. } => 4,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            PredictorConfig::PriorBaseline { seed }
            | PredictorConfig::DecisionTree { seed, .. }
            | PredictorConfig::RandomForest { seed, .. }
            | PredictorConfig::Mlp { seed, .. }
            | PredictorConfig::Gbdt { seed, .. } => *seed,
        }
    }

    pub fn with_seed(mut self, new_seed: u64) -> Self {
        match &mut self {
            PredictorConfig::PriorBaseline { seed }
            | PredictorConfig::DecisionTree { seed, .. }
            | PredictorConfig::RandomForest { seed, .. }
            | PredictorConfig::Mlp { seed, .. }
            | PredictorConfig::Gbdt { seed, .. } => *seed = new_seed,
        }
        self
    }

    pub fn default_baseline() -> Self {
        PredictorConfig::PriorBaseline { seed: 0 }
    }

    pub fn default_decision_tree() -> Self {
        PredictorConfig::DecisionTree { max_depth: d_depth8(), min_samples_split: d_minsplit(), seed: 0 }
    }

    pub fn default_random_forest() -> Self {
        PredictorConfig::RandomForest {
            n_trees: d_trees(),
            max_depth: d_depth8(),
            min_samples_split: d_minsplit(),
            seed: 0,
        }
    }

    pub fn default_mlp() -> Self {
        PredictorConfig::Mlp {
            hidden_units: d_hidden(),
            epochs: d_epochs(),
            learning_rate: d_lr(),
            batch_size: d_batch(),
            seed: 0,
        }
    }

    pub fn default_gbdt() -> Self {
        PredictorConfig::Gbdt {
            rounds: d_rounds(),
            max_depth: d_gbdt_depth(),
            shrinkage: d_shrinkage(),
            seed: 0,
        }
    }

    /// All five kinds at their defaults, in canonical order.
    pub fn default_suite() -> Vec<Self> {
        vec![
            Self::default_baseline(),
            Self::default_decision_tree(),
            Self::default_random_forest(),
            Self::default_mlp(),
            Self::default_gbdt(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum ModelParams {
    Constant { label: u8 },
    Tree(tree::ClassTree),
    Forest(forest::ForestModel),
    Mlp(mlp::MlpModel),
    Gbdt(gbdt::GbdtModel),
}

/// A trained classifier plus everything needed to apply it: kind and
/// hyperparameters, scheme, window length, and RSSI normalization bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub version: u32,
    pub config: PredictorConfig,
    pub scheme: Scheme,
    pub k: usize,
    pub bounds: RssiBounds,
    /// Set when a non-baseline kind collapsed to a constant predictor
    /// because the training set contained a single class.
    pub degenerate: bool,
    params: ModelParams,
}

impl TrainedModel {
    /// Normalize the RSSI entries of a raw feature window.
    fn normalize(&self, features: &[f64]) -> Vec<f64> {
        features
            .iter()
            .enumerate()
            .map(|(i, &v)| if i % 2 == 1 { self.bounds.normalize(v) } else { v })
            .collect()
    }

    pub fn predict(&self, features: &[f64]) -> Result<u8> {
        if features.len() != 2 * self.k {
            return Err(Error::DimensionMismatch { expected: 2 * self.k, got: features.len() });
        }
        let x = self.normalize(features);
        Ok(match &self.params {
            ModelParams::Constant { label } => *label,
            ModelParams::Tree(t) => t.predict(&x),
            ModelParams::Forest(f) => f.predict(&x),
            ModelParams::Mlp(m) => m.predict(&x),
            ModelParams::Gbdt(g) => g.predict(&x),
        })
    }

    pub fn predict_set(&self, set: &SampleSet) -> Result<Vec<u8>> {
        set.samples.iter().map(|s| self.predict(&s.features)).collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::report::atomic_write(path, serde_json::to_string_pretty(self)?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let model: TrainedModel = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "model file version {} not supported (expected {})",
                model.version, MODEL_FORMAT_VERSION
            )));
        }
        Ok(model)
    }
}

fn majority_label(labels: &[u8], n_classes: usize) -> u8 {
    let mut counts = vec![0usize; n_classes];
    for &l in labels {
        counts[l as usize] += 1;
    }
    let mut best = 0usize;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best as u8
}

/// Train a classifier on a sample set.
pub fn train(config: &PredictorConfig, train_set: &SampleSet) -> Result<TrainedModel> {
    if train_set.is_empty() {
        return Err(Error::EmptyInput("train: empty training set".into()));
    }
    let m = train_set.scheme.n_labels();
    let labels = train_set.labels();
    if labels.iter().any(|&l| (l as usize) >= m) {
        return Err(Error::SchemeMismatch(format!(
            "training labels exceed {} classes of {}",
            m, train_set.scheme
        )));
    }
    let bounds = RssiBounds::from_set(train_set);
    let mut model = TrainedModel {
        version: MODEL_FORMAT_VERSION,
        config: config.clone(),
        scheme: train_set.scheme,
        k: train_set.k,
        bounds,
        degenerate: false,
        params: ModelParams::Constant { label: 0 },
    };

    let single_class = labels.windows(2).all(|w| w[0] == w[1]);
    if single_class || matches!(config, PredictorConfig::PriorBaseline { .. }) {
        model.params = ModelParams::Constant { label: majority_label(&labels, m) };
        model.degenerate =
            single_class && !matches!(config, PredictorConfig::PriorBaseline { .. });
        return Ok(model);
    }

    let x: Vec<Vec<f64>> = train_set
        .samples
        .iter()
        .map(|s| model.normalize(&s.features))
        .collect();
    let indices: Vec<usize> = (0..x.len()).collect();

    model.params = match config {
        PredictorConfig::PriorBaseline { .. } => unreachable!(),
        PredictorConfig::DecisionTree { max_depth, min_samples_split, .. } => {
            let cfg = tree::TreeConfig::full(*max_depth, *min_samples_split);
            ModelParams::Tree(tree::fit_class_tree(&x, &labels, m, &indices, &cfg, None))
        }
        PredictorConfig::RandomForest { n_trees, max_depth, min_samples_split, seed } => {
            let cfg = forest::ForestConfig {
                n_trees: *n_trees,
                max_depth: *max_depth,
                min_samples_split: *min_samples_split,
            };
            ModelParams::Forest(forest::fit(&x, &labels, m, &cfg, *seed)?)
        }
        PredictorConfig::Mlp { hidden_units, epochs, learning_rate, batch_size, seed } => {
            let cfg = mlp::MlpConfig {
                hidden_units: *hidden_units,
                epochs: *epochs,
                learning_rate: *learning_rate,
                batch_size: *batch_size,
            };
            let mut stream = rng::derive_stream(*seed, 0x4d4c50);
            ModelParams::Mlp(mlp::fit(&x, &labels, m, &cfg, &mut stream)?)
        }
        PredictorConfig::Gbdt { rounds, max_depth, shrinkage, .. } => {
            let cfg = gbdt::GbdtConfig {
                rounds: *rounds,
                max_depth: *max_depth,
                shrinkage: *shrinkage,
            };
            ModelParams::Gbdt(gbdt::fit(&x, &labels, m, &cfg)?)
        }
    };
    Ok(model)
}

/// Evaluate a trained model on a test set: confusion matrix, accuracy, U_p,
/// and the test set's Acc_max (empirical mislabel source).
pub fn evaluate(model: &TrainedModel, test_set: &SampleSet) -> Result<PredictionReport> {
    if test_set.is_empty() {
        return Err(Error::EmptyInput("evaluate: empty test set".into()));
    }
    if test_set.scheme != model.scheme {
        return Err(Error::SchemeMismatch(format!(
            "model is {}, test set is {}",
            model.scheme, test_set.scheme
        )));
    }
    let predicted = model.predict_set(test_set)?;
    let mut report = metrics::predictor_randomness(&test_set.labels(), &predicted, model.scheme)?;
    report.acc_max = Some(metrics::set_randomness(test_set, MislabelSource::Empirical)?.acc_max);
    Ok(report)
}

/// One line of a model-comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub kind: String,
    pub acc: f64,
    pub acc_max: f64,
    pub u_p: f64,
    /// U(T_e), the test set's own randomness (empirical source).
    pub u_set: f64,
    pub report: PredictionReport,
}

/// Train and evaluate each config; rows come back in canonical kind order.
pub fn compare_models(
    configs: &[PredictorConfig],
    train_set: &SampleSet,
    test_set: &SampleSet,
) -> Result<Vec<ComparisonRow>> {
    if configs.is_empty() {
        return Err(Error::EmptyInput("compare_models: no configs".into()));
    }
    let mut ordered: Vec<&PredictorConfig> = configs.iter().collect();
    ordered.sort_by_key(|c| c.sort_key());
    let u_set = metrics::set_randomness(test_set, MislabelSource::Empirical)?.u_bits;
    let mut rows = Vec::with_capacity(ordered.len());
    for cfg in ordered {
        let model = train(cfg, train_set)?;
        let report = evaluate(&model, test_set)?;
        rows.push(ComparisonRow {
            kind: cfg.kind_name().to_string(),
            acc: report.acc,
            acc_max: report.acc_max.unwrap_or(f64::NAN),
            u_p: report.u_p,
            u_set,
            report,
        });
    }
    Ok(rows)
}
