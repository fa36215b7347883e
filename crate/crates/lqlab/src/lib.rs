//! Link-quality prediction laboratory.
//!
//! Simulates log-normal shadow-fading wireless links, builds labeled
//! HELLO-beacon datasets, trains from-scratch classifiers, quantifies the
//! irreducible randomness of data and predictors, and demonstrates
//! prediction-gated packet filtering.
//!
//! Module map:
//! - [`channel`]: attenuation sampling, RSSI, threshold reception, the
//!   closed-form delivery-rate curve, and r0
//! - [`dataset`]: beacon traces, windowing, labeling, environment-partitioned
//!   sample sets, persistence
//! - [`metrics`]: mislabel matrices, U(S), A(S), Acc_max, and the predictor
//!   randomness U_p
//! - [`predictors`]: prior baseline, decision tree, random forest, MLP, GBDT
//! - [`filter`]: prediction-gated reception and before/after sweeps
//! - [`commands`] + [`config`]: the experiment runner behind the CLI

pub mod channel;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod filter;
pub mod metrics;
pub mod predictors;
pub mod report;
pub mod rng;

pub use channel::{erf, ChannelParams, LinkDraw};
pub use config::ExperimentConfig;
pub use dataset::{BeaconTrace, Sample, SampleSet, Scheme};
pub use error::{Error, Result};
pub use metrics::{MislabelMatrix, PredictionReport, RandomnessReport};
pub use predictors::{PredictorConfig, TrainedModel};
