//! Prediction-gated packet processing.
//!
//! A two-class predictor runs online over a beacon trace: for each cycle the
//! preceding K-cycle window is classified, and a packet that actually arrives
//! is processed only when the forecast was Received. Gating can only discard
//! packets, never create them, so the effective delivery rate is pointwise at
//! or below the raw one.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::dataset::{generate_trace, BeaconTrace, Scheme};
use crate::error::{Error, Result};
use crate::metrics::binary_entropy;
use crate::predictors::TrainedModel;
use crate::rng;

/// Per-cycle raw receptions, predictions, and gated outcomes for one trace.
/// Entry `j` corresponds to trace cycle `K + j`; the first K cycles only seed
/// the window and are excluded from statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct GatedTrace {
    pub distance_m: f64,
    pub raw: Vec<bool>,
    pub predicted: Vec<bool>,
    pub effective: Vec<bool>,
}

/// Run the gate over a trace.
pub fn gate_trace(trace: &BeaconTrace, model: &TrainedModel, k: usize) -> Result<GatedTrace> {
    if model.scheme != Scheme::TwoClass {
        return Err(Error::SchemeMismatch(
            "gating is defined for two-class models only".into(),
        ));
    }
    if k != model.k {
        return Err(Error::Config(format!("model expects K={}, got K={k}", model.k)));
    }
    if trace.cycles.len() <= k {
        return Err(Error::EmptyInput(format!(
            "trace of {} cycles too short for K={k}",
            trace.cycles.len()
        )));
    }
    let n = trace.cycles.len() - k;
    let mut raw = Vec::with_capacity(n);
    let mut predicted = Vec::with_capacity(n);
    let mut effective = Vec::with_capacity(n);
    let mut window = Vec::with_capacity(2 * k);
    for j in k..trace.cycles.len() {
        window.clear();
        for c in &trace.cycles[j - k..j] {
            window.push(if c.received { 1.0 } else { 0.0 });
            window.push(c.rssi_dbm);
        }
        let pred = model.predict(&window)? == 1;
        let got = trace.cycles[j].received;
        raw.push(got);
        predicted.push(pred);
        effective.push(got && pred);
    }
    Ok(GatedTrace { distance_m: trace.distance_m, raw, predicted, effective })
}

/// Delivery rate and randomness over a distance grid, before and after gating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub d_grid: Vec<f64>,
    pub rate_before: Vec<f64>,
    pub rate_after: Vec<f64>,
    pub u_before: Vec<f64>,
    pub u_after: Vec<f64>,
    pub u_threshold: f64,
    /// Intervals (first_d, last_d) of contiguous grid points with U >= threshold.
    pub unstable_before: Vec<(f64, f64)>,
    pub unstable_after: Vec<(f64, f64)>,
}

impl RegionReport {
    /// Total width of the unstable region, counting one grid step per point.
    pub fn unstable_measure(&self, after: bool) -> f64 {
        let step = if self.d_grid.len() > 1 {
            self.d_grid[1] - self.d_grid[0]
        } else {
            0.0
        };
        let curve = if after { &self.u_after } else { &self.u_before };
        curve.iter().filter(|&&u| u >= self.u_threshold).count() as f64 * step
    }
}

fn threshold_runs(grid: &[f64], curve: &[f64], th: f64) -> Vec<(f64, f64)> {
    let mut runs = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &u) in curve.iter().enumerate() {
        if u >= th {
            start.get_or_insert(i);
        } else if let Some(s) = start.take() {
            runs.push((grid[s], grid[i - 1]));
        }
    }
    if let Some(s) = start {
        runs.push((grid[s], grid[grid.len() - 1]));
    }
    runs
}

/// Monte Carlo sweep over a distance grid: one fresh trace per grid point,
/// gated online, with per-point derived random streams.
pub fn effective_rate_sweep(
    model: &TrainedModel,
    d_grid: &[f64],
    cycles_per_d: usize,
    params: &ChannelParams,
    sentinel_dbm: f64,
    master_seed: u64,
    u_threshold: f64,
) -> Result<RegionReport> {
    if d_grid.is_empty() {
        return Err(Error::EmptyInput("effective_rate_sweep: empty grid".into()));
    }
    let k = model.k;
    let mut rate_before = Vec::with_capacity(d_grid.len());
    let mut rate_after = Vec::with_capacity(d_grid.len());
    for (i, &d) in d_grid.iter().enumerate() {
        let mut stream = rng::derive_stream(master_seed, 0x2000 + i as u64);
        let trace = generate_trace(d, cycles_per_d + k, params, sentinel_dbm, &mut stream)?;
        let gated = gate_trace(&trace, model, k)?;
        let n = gated.raw.len() as f64;
        rate_before.push(gated.raw.iter().filter(|&&b| b).count() as f64 / n);
        rate_after.push(gated.effective.iter().filter(|&&b| b).count() as f64 / n);
    }
    let u_before: Vec<f64> = rate_before.iter().map(|&p| binary_entropy(p)).collect();
    let u_after: Vec<f64> = rate_after.iter().map(|&p| binary_entropy(p)).collect();
    let unstable_before = threshold_runs(d_grid, &u_before, u_threshold);
    let unstable_after = threshold_runs(d_grid, &u_after, u_threshold);
    Ok(RegionReport {
        d_grid: d_grid.to_vec(),
        rate_before,
        rate_after,
        u_before,
        u_after,
        u_threshold,
        unstable_before,
        unstable_after,
    })
}

/// Which side of the gate a query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Before,
    After,
}

/// Grid argmax of a U curve; ties break toward smaller distance.
pub fn peak_randomness_location(report: &RegionReport, side: Side) -> f64 {
    let curve = match side {
        Side::Before => &report.u_before,
        Side::After => &report.u_after,
    };
    let mut best = 0usize;
    for (i, &u) in curve.iter().enumerate() {
        if u > curve[best] {
            best = i;
        }
    }
    report.d_grid[best]
}

/// Default grid: `n` points over (0.02 r0, 2.5 r0].
pub fn default_grid(r0: f64, n: usize) -> Vec<f64> {
    let lo = 0.02 * r0;
    let hi = 2.5 * r0;
    let step = (hi - lo) / n as f64;
    (1..=n).map(|i| lo + step * i as f64).collect()
}
