//! HELLO-beacon traces, windowed feature vectors, labels, and sample sets.
//!
//! A trace is a per-cycle (received, RSSI) sequence for one node pair at a
//! fixed distance. Windows of the previous `K` cycles become 2K-dimensional
//! feature vectors (reception bit + raw RSSI per cycle); the label describes
//! what happens next under one of two schemes:
//!
//! * two-class: the next cycle's reception (Lost=0, Received=1)
//! * four-class: receptions over the next 3 cycles (G=0, MG=1, MB=2, B=3)
//!
//! Lost cycles carry a sentinel RSSI (the receiver observes nothing).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::rng;

/// Default input window length in broadcast cycles.
pub const DEFAULT_K: usize = 10;
/// RSSI recorded for a lost packet (configurable noise floor).
pub const DEFAULT_SENTINEL_DBM: f64 = -110.0;
/// The four-class label looks ahead this many cycles.
pub const FOUR_CLASS_HORIZON: usize = 3;

/// Label scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    TwoClass,
    FourClass,
}

impl Scheme {
    pub fn n_labels(&self) -> usize {
        match self {
            Scheme::TwoClass => 2,
            Scheme::FourClass => 4,
        }
    }

    /// Cycles of lookahead the labeling needs beyond the feature window.
    pub fn lookahead(&self) -> usize {
        match self {
            Scheme::TwoClass => 1,
            Scheme::FourClass => FOUR_CLASS_HORIZON,
        }
    }

    pub fn label_name(&self, label: u8) -> &'static str {
        match (self, label) {
            (Scheme::TwoClass, 0) => "Lost",
            (Scheme::TwoClass, 1) => "Received",
            (Scheme::FourClass, 0) => "G",
            (Scheme::FourClass, 1) => "MG",
            (Scheme::FourClass, 2) => "MB",
            (Scheme::FourClass, 3) => "B",
            _ => "?",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::TwoClass => write!(f, "two-class"),
            Scheme::FourClass => write!(f, "four-class"),
        }
    }
}

/// One broadcast cycle as seen by the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cycle {
    pub received: bool,
    /// Actual RSSI when received, sentinel otherwise.
    pub rssi_dbm: f64,
}

/// Per-cycle reception record for one node pair at fixed distance.
#[derive(Debug, Clone, PartialEq)]
pub struct BeaconTrace {
    pub distance_m: f64,
    pub sentinel_dbm: f64,
    pub cycles: Vec<Cycle>,
}

/// Generate `n_cycles` independent beacon receptions at distance `d`.
pub fn generate_trace<R: Rng + ?Sized>(
    d: f64,
    n_cycles: usize,
    params: &ChannelParams,
    sentinel_dbm: f64,
    rng: &mut R,
) -> Result<BeaconTrace> {
    if n_cycles == 0 {
        return Err(Error::Domain("n_cycles must be >= 1".into()));
    }
    let mut cycles = Vec::with_capacity(n_cycles);
    for _ in 0..n_cycles {
        let draw = params.draw_link(d, rng)?;
        cycles.push(Cycle {
            received: draw.received,
            rssi_dbm: if draw.received { draw.rssi_dbm } else { sentinel_dbm },
        });
    }
    Ok(BeaconTrace { distance_m: d, sentinel_dbm, cycles })
}

/// One labeled feature window.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// 2K reals: [recv_0, rssi_0, recv_1, rssi_1, ...], RSSI raw (unnormalized).
    pub features: Vec<f64>,
    pub label: u8,
    pub env_id: usize,
}

/// Per-environment metadata: here, the (representative) distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvDescriptor {
    pub env_id: usize,
    pub distance_m: f64,
}

/// Labeled samples partitioned into disjoint environment subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    pub envs: Vec<EnvDescriptor>,
    pub scheme: Scheme,
    pub k: usize,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Labels of one environment, in sample order.
    pub fn env_labels(&self, env_id: usize) -> Vec<u8> {
        self.samples
            .iter()
            .filter(|s| s.env_id == env_id)
            .map(|s| s.label)
            .collect()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.samples.iter().map(|s| s.label).collect()
    }

    fn validate_env_refs(&self) -> Result<()> {
        for s in &self.samples {
            if !self.envs.iter().any(|e| e.env_id == s.env_id) {
                return Err(Error::Domain(format!("sample references unknown env {}", s.env_id)));
            }
        }
        Ok(())
    }
}

fn window_features(trace: &BeaconTrace, start: usize, k: usize) -> Vec<f64> {
    let mut f = Vec::with_capacity(2 * k);
    for c in &trace.cycles[start..start + k] {
        f.push(if c.received { 1.0 } else { 0.0 });
        f.push(c.rssi_dbm);
    }
    f
}

/// Two-class windowing: label is the reception of the cycle right after the window.
pub fn window_two_class(trace: &BeaconTrace, k: usize) -> Result<Vec<Sample>> {
    if k == 0 {
        return Err(Error::Domain("K must be >= 1".into()));
    }
    if trace.cycles.len() < k + 1 {
        return Err(Error::EmptyInput(format!(
            "trace of {} cycles too short for K={k}+1",
            trace.cycles.len()
        )));
    }
    Ok((0..trace.cycles.len() - k)
        .map(|j| Sample {
            features: window_features(trace, j, k),
            label: trace.cycles[j + k].received as u8,
            env_id: 0,
        })
        .collect())
}

/// Four-class windowing: label counts receptions over the next 3 cycles
/// (3 -> G, 2 -> MG, 1 -> MB, 0 -> B).
pub fn window_four_class(trace: &BeaconTrace, k: usize) -> Result<Vec<Sample>> {
    let h = FOUR_CLASS_HORIZON;
    if k == 0 {
        return Err(Error::Domain("K must be >= 1".into()));
    }
    if trace.cycles.len() < k + h {
        return Err(Error::EmptyInput(format!(
            "trace of {} cycles too short for K={k}+{h}",
            trace.cycles.len()
        )));
    }
    Ok((0..trace.cycles.len() - k - h + 1)
        .map(|j| {
            let recvs = trace.cycles[j + k..j + k + h]
                .iter()
                .filter(|c| c.received)
                .count();
            Sample {
                features: window_features(trace, j, k),
                label: (h - recvs) as u8,
                env_id: 0,
            }
        })
        .collect())
}

pub fn window(trace: &BeaconTrace, k: usize, scheme: Scheme) -> Result<Vec<Sample>> {
    match scheme {
        Scheme::TwoClass => window_two_class(trace, k),
        Scheme::FourClass => window_four_class(trace, k),
    }
}

/// One environment to generate: a distance and how many samples to draw there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub distance_m: f64,
    pub count: usize,
}

/// Build a sample set with one environment per spec entry.
///
/// Each environment gets its own derived random stream, so assembly is
/// deterministic regardless of generation order.
pub fn assemble(
    spec: &[EnvSpec],
    scheme: Scheme,
    k: usize,
    params: &ChannelParams,
    sentinel_dbm: f64,
    master_seed: u64,
) -> Result<SampleSet> {
    if spec.is_empty() {
        return Err(Error::EmptyInput("assemble: empty environment spec".into()));
    }
    let mut samples = Vec::new();
    let mut envs = Vec::with_capacity(spec.len());
    for (env_id, e) in spec.iter().enumerate() {
        if e.count == 0 {
            return Err(Error::Domain("per-environment count must be >= 1".into()));
        }
        let mut stream = rng::derive_stream(master_seed, env_id as u64 + 1);
        let n_cycles = e.count + k + scheme.lookahead() - 1;
        let trace = generate_trace(e.distance_m, n_cycles, params, sentinel_dbm, &mut stream)?;
        let mut windowed = window(&trace, k, scheme)?;
        windowed.truncate(e.count);
        for s in &mut windowed {
            s.env_id = env_id;
        }
        samples.extend(windowed);
        envs.push(EnvDescriptor { env_id, distance_m: e.distance_m });
    }
    let set = SampleSet { samples, envs, scheme, k };
    set.validate_env_refs()?;
    Ok(set)
}

/// Environment spec for distances uniform in (0, d_max], binned at `bin_width`.
///
/// Draws `total` distances uniformly, counts them per bin, and represents each
/// non-empty bin by its center.
pub fn uniform_env_spec(d_max: f64, bin_width: f64, total: usize, seed: u64) -> Result<Vec<EnvSpec>> {
    if !(d_max > 0.0 && bin_width > 0.0) {
        return Err(Error::Domain("d_max and bin_width must be > 0".into()));
    }
    if total == 0 {
        return Err(Error::Domain("total must be >= 1".into()));
    }
    let mut stream = rng::master_stream(seed);
    let n_bins = (d_max / bin_width).ceil() as usize;
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for _ in 0..total {
        let d: f64 = stream.gen_range(0.0..d_max);
        let bin = ((d / bin_width) as usize).min(n_bins - 1);
        *counts.entry(bin).or_insert(0) += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(bin, count)| EnvSpec {
            distance_m: (bin as f64 + 0.5) * bin_width,
            count,
        })
        .collect())
}

/// Stratified train/test split. Per environment, round(fraction * n) samples
/// go to train; environments with fewer than 2 samples go entirely to train.
pub fn split(set: &SampleSet, train_fraction: f64, seed: u64) -> Result<(SampleSet, SampleSet)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Domain(format!(
            "train_fraction must be in (0,1), got {train_fraction}"
        )));
    }
    let mut in_train = vec![false; set.samples.len()];
    for env in &set.envs {
        let idx: Vec<usize> = set
            .samples
            .iter()
            .enumerate()
            .filter(|(_, s)| s.env_id == env.env_id)
            .map(|(i, _)| i)
            .collect();
        if idx.is_empty() {
            continue;
        }
        if idx.len() < 2 {
            log::warn!(
                "env {} has {} sample(s); assigning all to train",
                env.env_id,
                idx.len()
            );
            for &i in &idx {
                in_train[i] = true;
            }
            continue;
        }
        let mut shuffled = idx.clone();
        let mut stream = rng::derive_stream(seed, env.env_id as u64 + 1);
        shuffled.shuffle(&mut stream);
        let n_train = (train_fraction * idx.len() as f64).round() as usize;
        for &i in shuffled.iter().take(n_train) {
            in_train[i] = true;
        }
    }
    let pick = |keep: bool| SampleSet {
        samples: set
            .samples
            .iter()
            .enumerate()
            .filter(|(i, _)| in_train[*i] == keep)
            .map(|(_, s)| s.clone())
            .collect(),
        envs: set.envs.clone(),
        scheme: set.scheme,
        k: set.k,
    };
    Ok((pick(true), pick(false)))
}

/// RSSI min-max bounds observed on non-sentinel feature values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RssiBounds {
    pub min_dbm: f64,
    pub max_dbm: f64,
}

impl RssiBounds {
    /// Bounds over RSSI features of received cycles (the reception bit marks
    /// which RSSI entries are real). The lost-packet sentinel sits below the
    /// observed minimum and therefore normalizes below 0.
    pub fn from_set(set: &SampleSet) -> Self {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for s in &set.samples {
            for pair in s.features.chunks_exact(2) {
                if pair[0] > 0.5 {
                    min = min.min(pair[1]);
                    max = max.max(pair[1]);
                }
            }
        }
        if !min.is_finite() || !max.is_finite() {
            // No received cycle anywhere; any finite range works since every
            // RSSI entry is the sentinel.
            min = 0.0;
            max = 1.0;
        }
        RssiBounds { min_dbm: min, max_dbm: max }
    }

    pub fn normalize(&self, rssi_dbm: f64) -> f64 {
        let span = self.max_dbm - self.min_dbm;
        let span = if span > 0.0 { span } else { 1.0 };
        (rssi_dbm - self.min_dbm) / span
    }
}

/// Sidecar metadata stored next to a dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub params: ChannelParams,
    pub k: usize,
    pub scheme: Scheme,
    pub seed: u64,
    pub sentinel_dbm: f64,
    pub norm_bounds: Option<RssiBounds>,
    pub envs: Vec<EnvDescriptor>,
}

/// Write the dataset as CSV (`env_id,distance_m,label,f_0..f_{2K-1}`) plus a
/// JSON metadata sidecar.
pub fn save_csv(set: &SampleSet, meta: &DatasetMeta, csv_path: &Path, meta_path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("env_id,distance_m,label");
    for i in 0..2 * set.k {
        out.push_str(&format!(",f_{i}"));
    }
    out.push('\n');
    for s in &set.samples {
        let d = set
            .envs
            .iter()
            .find(|e| e.env_id == s.env_id)
            .map(|e| e.distance_m)
            .unwrap_or(f64::NAN);
        out.push_str(&format!("{},{},{}", s.env_id, d, s.label));
        for f in &s.features {
            out.push_str(&format!(",{f}"));
        }
        out.push('\n');
    }
    crate::report::atomic_write(csv_path, out.as_bytes())?;
    let json = serde_json::to_string_pretty(meta)?;
    crate::report::atomic_write(meta_path, json.as_bytes())?;
    Ok(())
}

/// Load a dataset saved by [`save_csv`].
pub fn load_csv(csv_path: &Path, meta_path: &Path) -> Result<(SampleSet, DatasetMeta)> {
    let meta: DatasetMeta = serde_json::from_str(&std::fs::read_to_string(meta_path)?)?;
    let text = std::fs::read_to_string(csv_path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::EmptyInput("dataset csv has no header".into()))?;
    let n_cols = header.split(',').count();
    if n_cols != 3 + 2 * meta.k {
        return Err(Error::Config(format!(
            "dataset csv has {n_cols} columns, metadata K={} implies {}",
            meta.k,
            3 + 2 * meta.k
        )));
    }
    let mut samples = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n_cols {
            return Err(Error::Config(format!("bad column count on data line {}", lineno + 1)));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number {s:?}: {e}")))
        };
        samples.push(Sample {
            env_id: fields[0]
                .parse()
                .map_err(|e| Error::Config(format!("bad env_id: {e}")))?,
            label: fields[2]
                .parse()
                .map_err(|e| Error::Config(format!("bad label: {e}")))?,
            features: fields[3..].iter().map(|s| parse(s)).collect::<Result<_>>()?,
        });
    }
    let set = SampleSet {
        samples,
        envs: meta.envs.clone(),
        scheme: meta.scheme,
        k: meta.k,
    };
    set.validate_env_refs()?;
    Ok((set, meta))
}
