//! Experiment runner: each command materializes one family of figures or
//! tables as CSV files in an output directory, together with a verbatim echo
//! of the config and a manifest of every artifact.

use std::path::Path;

use crate::config::ExperimentConfig;
use crate::dataset::{
    self, assemble, generate_trace, split, uniform_env_spec, DatasetMeta, EnvSpec, SampleSet,
    Scheme,
};
use crate::error::{Error, Result};
use crate::filter::{self, Side};
use crate::metrics::{self, MislabelSource};
use crate::predictors::{self, PredictorConfig, TrainedModel};
use crate::report::{Csv, Manifest};
use crate::rng;

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn echo_config(manifest: &mut Manifest, cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    manifest.write(out, "config.json", cfg.seed, cfg.to_json()?.as_bytes())?;
    Ok(())
}

/// Distance grid over (0, d_max_r0 * r0] that lands exactly on r0 when the
/// grid divides evenly.
fn distance_grid(cfg: &ExperimentConfig) -> Vec<f64> {
    let r0 = cfg.channel.r_zero();
    (1..=cfg.grid_points)
        .map(|i| r0 * (i as f64 * cfg.d_max_r0) / cfg.grid_points as f64)
        .collect()
}

fn build_mixed_set(cfg: &ExperimentConfig, scheme: Scheme, seed: u64) -> Result<SampleSet> {
    let r0 = cfg.channel.r_zero();
    let spec = uniform_env_spec(cfg.d_max_r0 * r0, cfg.bin_width_r0 * r0, cfg.total_samples, seed)?;
    assemble(&spec, scheme, cfg.k, &cfg.channel, cfg.sentinel_dbm, seed)
}

/// Delivery-rate curve, RSSI scatters, and an RSSI-over-time trace at r0.
pub fn cmd_channel_curves(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    cfg.validate()?;
    let mut manifest = Manifest::new();
    echo_config(&mut manifest, cfg, out)?;
    let grid = distance_grid(cfg);

    let mut curve = Csv::new("d_m,delivery_rate");
    for &d in &grid {
        curve.row([fmt(d), fmt(cfg.channel.delivery_rate(d)?)]);
    }
    manifest.write(out, "delivery_rate.csv", cfg.seed, &curve.into_bytes())?;

    // scatter: a few draws per grid distance
    let mut rssi_scatter = Csv::new("d_m,rssi_dbm,received");
    let mut recv_scatter = Csv::new("d_m,received");
    for (i, &d) in grid.iter().enumerate() {
        let mut stream = rng::derive_stream(cfg.seed, 0x100 + i as u64);
        for _ in 0..10 {
            let draw = cfg.channel.draw_link(d, &mut stream)?;
            rssi_scatter.row([fmt(d), fmt(draw.rssi_dbm), (draw.received as u8).to_string()]);
            recv_scatter.row([fmt(d), (draw.received as u8).to_string()]);
        }
    }
    manifest.write(out, "rssi_vs_distance.csv", cfg.seed, &rssi_scatter.into_bytes())?;
    manifest.write(out, "reception_vs_distance.csv", cfg.seed, &recv_scatter.into_bytes())?;

    let mut over_time = Csv::new("cycle,rssi_dbm,received");
    let mut stream = rng::derive_stream(cfg.seed, 0x200);
    let trace = generate_trace(
        cfg.channel.r_zero(),
        200,
        &cfg.channel,
        cfg.sentinel_dbm,
        &mut stream,
    )?;
    for (t, c) in trace.cycles.iter().enumerate() {
        over_time.row([t.to_string(), fmt(c.rssi_dbm), (c.received as u8).to_string()]);
    }
    manifest.write(out, "rssi_vs_time.csv", cfg.seed, &over_time.into_bytes())?;
    manifest.finish(out)
}

/// U-vs-distance curves for both schemes, analytic and empirical sources.
pub fn cmd_randomness_curve(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    cfg.validate()?;
    let mut manifest = Manifest::new();
    echo_config(&mut manifest, cfg, out)?;
    let grid = distance_grid(cfg);
    let mut csv = Csv::new("d_m,u_two_analytic,u_two_empirical,u_four_analytic,u_four_empirical");
    for (i, &d) in grid.iter().enumerate() {
        let mut vals = vec![fmt(d)];
        for (si, scheme) in [Scheme::TwoClass, Scheme::FourClass].into_iter().enumerate() {
            let matrix = metrics::analytic_mislabel(d, &cfg.channel, scheme)?;
            vals.push(fmt(metrics::label_entropy(&matrix.rows[0])?));
            let spec = [EnvSpec { distance_m: d, count: cfg.samples_per_env }];
            let seed_stream = cfg.seed ^ ((si as u64) << 32) ^ (i as u64);
            let set = assemble(&spec, scheme, cfg.k, &cfg.channel, cfg.sentinel_dbm, seed_stream)?;
            let rep = metrics::set_randomness(&set, MislabelSource::Empirical)?;
            vals.push(fmt(rep.u_bits));
        }
        // interleave: analytic two, empirical two, analytic four, empirical four
        csv.row([vals[0].clone(), vals[1].clone(), vals[2].clone(), vals[3].clone(), vals[4].clone()]);
    }
    manifest.write(out, "randomness_curve.csv", cfg.seed, &csv.into_bytes())?;
    manifest.finish(out)
}

fn write_table_files(
    manifest: &mut Manifest,
    out: &Path,
    scheme: Scheme,
    rows: &[predictors::ComparisonRow],
    seed: u64,
) -> Result<()> {
    let suffix = match scheme {
        Scheme::TwoClass => "two",
        Scheme::FourClass => "four",
    };
    let mut table = Csv::new("kind,acc,acc_max,u_p,u_set");
    let m = scheme.n_labels();
    let conf_header = {
        let mut h = String::from("kind");
        for t in 0..m {
            for u in 0..m {
                h.push_str(&format!(",c_{t}{u}"));
            }
        }
        h
    };
    let mut conf = Csv::new(&conf_header);
    for row in rows {
        table.row([
            row.kind.clone(),
            fmt(row.acc),
            fmt(row.acc_max),
            fmt(row.u_p),
            fmt(row.u_set),
        ]);
        let mut fields = vec![row.kind.clone()];
        for r in &row.report.confusion {
            for &c in r {
                fields.push(c.to_string());
            }
        }
        conf.row(fields);
    }
    manifest.write(out, &format!("table_{suffix}.csv"), seed, &table.into_bytes())?;
    manifest.write(out, &format!("confusion_{suffix}.csv"), seed, &conf.into_bytes())?;
    Ok(())
}

/// Model-comparison tables for both schemes on the mixed-distance dataset.
pub fn cmd_table(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    cfg.validate()?;
    let mut manifest = Manifest::new();
    echo_config(&mut manifest, cfg, out)?;
    for scheme in [Scheme::TwoClass, Scheme::FourClass] {
        let set = build_mixed_set(cfg, scheme, cfg.seed)?;
        let (train_set, test_set) = split(&set, cfg.train_fraction, cfg.seed ^ 0x5)?;
        let configs: Vec<PredictorConfig> = cfg
            .predictors
            .iter()
            .map(|p| p.clone().with_seed(cfg.seed))
            .collect();
        let rows = predictors::compare_models(&configs, &train_set, &test_set)?;
        write_table_files(&mut manifest, out, scheme, &rows, cfg.seed)?;
    }
    manifest.finish(out)
}

fn sweep_predictor(cfg: &ExperimentConfig, scheme: Scheme) -> PredictorConfig {
    match scheme {
        Scheme::TwoClass => cfg.sweep_predictor_two.clone(),
        Scheme::FourClass => cfg.sweep_predictor_four.clone(),
    }
    .with_seed(cfg.seed)
}

/// Per-distance train/test: accuracy and randomness as the distance (and with
/// it the sample randomness) varies.
pub fn cmd_static_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    cfg.validate()?;
    let mut manifest = Manifest::new();
    echo_config(&mut manifest, cfg, out)?;
    let r0 = cfg.channel.r_zero();
    let mut csv = Csv::new("scheme,d_m,acc,acc_max,u,u_p");
    for scheme in [Scheme::TwoClass, Scheme::FourClass] {
        for i in 1..=cfg.static_points {
            let d = r0 * (i as f64 * cfg.d_max_r0) / cfg.static_points as f64;
            let spec = [EnvSpec { distance_m: d, count: cfg.samples_per_env }];
            let seed = cfg.seed ^ 0x57A7 ^ ((i as u64) << 8) ^ scheme.n_labels() as u64;
            let set = assemble(&spec, scheme, cfg.k, &cfg.channel, cfg.sentinel_dbm, seed)?;
            let (train_set, test_set) = split(&set, cfg.train_fraction, seed ^ 0x1)?;
            let model = predictors::train(&sweep_predictor(cfg, scheme), &train_set)?;
            let report = predictors::evaluate(&model, &test_set)?;
            let u = metrics::set_randomness(&test_set, MislabelSource::Empirical)?.u_bits;
            csv.row([
                scheme.to_string(),
                fmt(d),
                fmt(report.acc),
                fmt(report.acc_max.unwrap_or(f64::NAN)),
                fmt(u),
                fmt(report.u_p),
            ]);
        }
    }
    manifest.write(out, "static_sweep.csv", cfg.seed, &csv.into_bytes())?;
    manifest.finish(out)
}

/// Environment spec for one dynamic-sweep mixture level: a `lambda` fraction
/// of samples at r0, the rest spread uniformly over (0.5 r0, 1.5 r0).
fn dynamic_mixture_spec(cfg: &ExperimentConfig, lambda: f64, seed: u64) -> Result<Vec<EnvSpec>> {
    let r0 = cfg.channel.r_zero();
    let n_center = (lambda * cfg.total_samples as f64).round() as usize;
    let n_spread = cfg.total_samples - n_center;
    let mut spec = Vec::new();
    if n_spread > 0 {
        let width = r0; // (0.5 r0, 1.5 r0)
        for mut e in uniform_env_spec(width, cfg.bin_width_r0 * r0, n_spread, seed)? {
            e.distance_m += 0.5 * r0;
            spec.push(e);
        }
    }
    if n_center > 0 {
        spec.push(EnvSpec { distance_m: r0, count: n_center });
    }
    Ok(spec)
}

/// Mixture-controlled randomness: sample sets with increasing U built by
/// concentrating mass at r0 inside (0.5 r0, 1.5 r0).
pub fn cmd_dynamic_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    cfg.validate()?;
    let mut manifest = Manifest::new();
    echo_config(&mut manifest, cfg, out)?;
    let mut csv = Csv::new("scheme,level,lambda,u,acc,acc_max,u_p");
    for scheme in [Scheme::TwoClass, Scheme::FourClass] {
        for level in 0..cfg.dynamic_levels {
            let lambda = level as f64 / (cfg.dynamic_levels - 1) as f64;
            let seed = cfg.seed ^ 0xD1 ^ ((level as u64) << 16) ^ scheme.n_labels() as u64;
            let spec = dynamic_mixture_spec(cfg, lambda, seed)?;
            let set = assemble(&spec, scheme, cfg.k, &cfg.channel, cfg.sentinel_dbm, seed)?;
            let (train_set, test_set) = split(&set, cfg.train_fraction, seed ^ 0x2)?;
            let model = predictors::train(&sweep_predictor(cfg, scheme), &train_set)?;
            let report = predictors::evaluate(&model, &test_set)?;
            let u = metrics::set_randomness(&test_set, MislabelSource::Empirical)?.u_bits;
            csv.row([
                scheme.to_string(),
                level.to_string(),
                fmt(lambda),
                fmt(u),
                fmt(report.acc),
                fmt(report.acc_max.unwrap_or(f64::NAN)),
                fmt(report.u_p),
            ]);
        }
    }
    manifest.write(out, "dynamic_sweep.csv", cfg.seed, &csv.into_bytes())?;
    manifest.finish(out)
}

/// Train the two-class gate model the filter demo and acceptance use.
pub fn train_gate_model(cfg: &ExperimentConfig, seed: u64) -> Result<TrainedModel> {
    let set = build_mixed_set(cfg, Scheme::TwoClass, seed)?;
    let (train_set, _) = split(&set, cfg.train_fraction, seed ^ 0x3)?;
    predictors::train(&cfg.sweep_predictor_two.clone().with_seed(seed), &train_set)
}

/// Prediction-gated reception: before/after delivery-rate and randomness
/// curves, unstable intervals, and per-distance timelines.
pub fn cmd_filter_demo(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    cfg.validate()?;
    let mut manifest = Manifest::new();
    echo_config(&mut manifest, cfg, out)?;
    let r0 = cfg.channel.r_zero();
    let model = train_gate_model(cfg, cfg.seed)?;

    let grid = filter::default_grid(r0, cfg.grid_points);
    let report = filter::effective_rate_sweep(
        &model,
        &grid,
        cfg.cycles_per_point,
        &cfg.channel,
        cfg.sentinel_dbm,
        cfg.seed ^ 0xF1,
        cfg.u_threshold,
    )?;

    let mut sweep = Csv::new("d_m,rate_before,rate_after,u_before,u_after");
    for i in 0..report.d_grid.len() {
        sweep.row([
            fmt(report.d_grid[i]),
            fmt(report.rate_before[i]),
            fmt(report.rate_after[i]),
            fmt(report.u_before[i]),
            fmt(report.u_after[i]),
        ]);
    }
    manifest.write(out, "filter_sweep.csv", cfg.seed, &sweep.into_bytes())?;

    let mut intervals = Csv::new("side,start_d_m,end_d_m");
    for (a, b) in &report.unstable_before {
        intervals.row(["before".to_string(), fmt(*a), fmt(*b)]);
    }
    for (a, b) in &report.unstable_after {
        intervals.row(["after".to_string(), fmt(*a), fmt(*b)]);
    }
    let mut summary = Csv::new("metric,value");
    summary.row(["u_threshold".into(), fmt(report.u_threshold)]);
    summary.row(["unstable_measure_before_m".into(), fmt(report.unstable_measure(false))]);
    summary.row(["unstable_measure_after_m".into(), fmt(report.unstable_measure(true))]);
    summary.row([
        "peak_u_before_d_m".into(),
        fmt(filter::peak_randomness_location(&report, Side::Before)),
    ]);
    summary.row([
        "peak_u_after_d_m".into(),
        fmt(filter::peak_randomness_location(&report, Side::After)),
    ]);
    manifest.write(out, "unstable_intervals.csv", cfg.seed, &intervals.into_bytes())?;
    manifest.write(out, "filter_summary.csv", cfg.seed, &summary.into_bytes())?;

    for (i, (tag, mult)) in [("080", 0.8), ("100", 1.0), ("120", 1.2)].into_iter().enumerate() {
        let mut stream = rng::derive_stream(cfg.seed, 0x3000 + i as u64);
        let trace = generate_trace(
            mult * r0,
            200 + cfg.k,
            &cfg.channel,
            cfg.sentinel_dbm,
            &mut stream,
        )?;
        let gated = filter::gate_trace(&trace, &model, cfg.k)?;
        let mut timeline = Csv::new("cycle,raw,predicted,effective");
        for i in 0..gated.raw.len() {
            timeline.row([
                i.to_string(),
                (gated.raw[i] as u8).to_string(),
                (gated.predicted[i] as u8).to_string(),
                (gated.effective[i] as u8).to_string(),
            ]);
        }
        manifest.write(out, &format!("timeline_{tag}r0.csv"), cfg.seed, &timeline.into_bytes())?;
    }
    manifest.finish(out)
}

/// Build and persist a mixed-distance dataset (CSV + metadata sidecar).
pub fn cmd_dataset_build(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    cfg.validate()?;
    let mut manifest = Manifest::new();
    echo_config(&mut manifest, cfg, out)?;
    let set = build_mixed_set(cfg, cfg.scheme, cfg.seed)?;
    let meta = DatasetMeta {
        params: cfg.channel,
        k: cfg.k,
        scheme: cfg.scheme,
        seed: cfg.seed,
        sentinel_dbm: cfg.sentinel_dbm,
        norm_bounds: Some(dataset::RssiBounds::from_set(&set)),
        envs: set.envs.clone(),
    };
    dataset::save_csv(&set, &meta, &out.join("dataset.csv"), &out.join("dataset.meta.json"))?;
    let mut summary = Csv::new("metric,value");
    summary.row(["samples".into(), set.len().to_string()]);
    summary.row(["environments".into(), set.envs.len().to_string()]);
    summary.row(["scheme".into(), cfg.scheme.to_string()]);
    let bytes = summary.into_bytes();
    manifest.write(out, "dataset.summary.csv", cfg.seed, &bytes)?;
    manifest.finish(out)
}

/// Human-readable summary of a stored dataset.
pub fn cmd_dataset_inspect(data: &Path, meta: &Path) -> Result<String> {
    let (set, meta) = dataset::load_csv(data, meta)?;
    let rep = metrics::set_randomness(&set, MislabelSource::Empirical)?;
    let mut out = String::new();
    out.push_str(&format!("samples: {}\n", set.len()));
    out.push_str(&format!("environments: {}\n", set.envs.len()));
    out.push_str(&format!("scheme: {} (K={})\n", set.scheme, set.k));
    out.push_str(&format!("seed: {}\n", meta.seed));
    out.push_str(&format!("U(S) empirical: {:.4} bits\n", rep.u_bits));
    out.push_str(&format!("A(S): {:.4}  Acc_max: {:.4}\n", rep.a, rep.acc_max));
    let labels = set.labels();
    for t in 0..set.scheme.n_labels() {
        let c = labels.iter().filter(|&&l| l as usize == t).count();
        out.push_str(&format!(
            "label {} ({}): {} ({:.1}%)\n",
            t,
            set.scheme.label_name(t as u8),
            c,
            100.0 * c as f64 / labels.len() as f64
        ));
    }
    Ok(out)
}

/// Train one model on a stored dataset and write it to `out/model.json`.
pub fn cmd_model_train(
    cfg: &ExperimentConfig,
    data: &Path,
    meta: &Path,
    kind: Option<&str>,
    out: &Path,
) -> Result<()> {
    cfg.validate()?;
    let (set, _) = dataset::load_csv(data, meta)?;
    let (train_set, _) = split(&set, cfg.train_fraction, cfg.seed ^ 0x4)?;
    let pc = match kind {
        None => cfg.predictors[0].clone(),
        Some(name) => cfg
            .predictors
            .iter()
            .find(|p| p.kind_name() == name)
            .cloned()
            .ok_or_else(|| Error::Config(format!("no predictor of kind {name:?} in config")))?,
    }
    .with_seed(cfg.seed);
    let model = predictors::train(&pc, &train_set)?;
    let mut manifest = Manifest::new();
    echo_config(&mut manifest, cfg, out)?;
    model.save(&out.join("model.json"))?;
    manifest.finish(out)
}

/// Evaluate a stored model on the test split of a stored dataset.
pub fn cmd_model_eval(
    cfg: &ExperimentConfig,
    model_path: &Path,
    data: &Path,
    meta: &Path,
    out: &Path,
) -> Result<String> {
    cfg.validate()?;
    let model = TrainedModel::load(model_path)?;
    let (set, _) = dataset::load_csv(data, meta)?;
    let (_, test_set) = split(&set, cfg.train_fraction, cfg.seed ^ 0x4)?;
    let report = predictors::evaluate(&model, &test_set)?;
    let u_set = metrics::set_randomness(&test_set, MislabelSource::Empirical)?.u_bits;
    let mut csv = Csv::new("kind,acc,acc_max,u_p,u_set");
    csv.row([
        model.config.kind_name().to_string(),
        fmt(report.acc),
        fmt(report.acc_max.unwrap_or(f64::NAN)),
        fmt(report.u_p),
        fmt(u_set),
    ]);
    let mut manifest = Manifest::new();
    echo_config(&mut manifest, cfg, out)?;
    manifest.write(out, "eval.csv", cfg.seed, &csv.into_bytes())?;
    manifest.finish(out)?;
    Ok(format!(
        "kind={} acc={:.4} acc_max={:.4} u_p={:.4} u_set={:.4}",
        model.config.kind_name(),
        report.acc,
        report.acc_max.unwrap_or(f64::NAN),
        report.u_p,
        u_set
    ))
}
