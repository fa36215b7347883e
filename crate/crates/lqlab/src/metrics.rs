//! Randomness and accuracy algebra over sample sets and predictor outputs.
//!
//! For each environment `i` and label `t`, `p_tu` is the probability that a
//! sample whose window looks like label `t` actually carries label `u`. All
//! rows of the mislabel matrix are identical because the shadowing draw that
//! decides the next cycle is independent of the window contents. From these:
//!
//! ```text
//! U_i(t) = sum_u -p_tu log2 p_tu          per-label randomness (bits)
//! R_i(t) = |{samples in S_i with label t}| / |S|
//! U(S)   = sum_i sum_t U_i(t) R_i(t)      sample-set randomness
//! A(S)   = sum_i sum_t R_i(t) p_tt        intrinsic accuracy
//! Acc_max = max(A(S), sum_i max_t R_i(t)) reference maximum accuracy
//! ```
//!
//! The predictor-side analogue conditions on the emitted label:
//!
//! ```text
//! p'_tu  = P(true = u | predicted = t)
//! R_p(t) = P(predicted = t)
//! U_p    = sum_t R_p(t) * sum_u -p'_tu log2 p'_tu
//! ```

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::dataset::{SampleSet, Scheme};
use crate::error::{Error, Result};

/// Per-environment mislabel probabilities; all rows identical by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MislabelMatrix {
    pub scheme: Scheme,
    /// M x M, rows indexed by nominal label t, columns by actual label u.
    pub rows: Vec<Vec<f64>>,
}

impl MislabelMatrix {
    fn from_marginal(scheme: Scheme, marginal: Vec<f64>) -> Self {
        let m = scheme.n_labels();
        debug_assert_eq!(marginal.len(), m);
        MislabelMatrix { scheme, rows: vec![marginal; m] }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.scheme.n_labels();
        if self.rows.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: self.rows.len() });
        }
        for row in &self.rows {
            if row.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: row.len() });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Domain(format!("mislabel row sums to {sum}, not 1")));
            }
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::Domain("mislabel entry outside [0,1]".into()));
            }
        }
        Ok(())
    }
}

/// Closed-form mislabel matrix at distance `d`: the two-class marginal is
/// (1-p(d), p(d)); the four-class marginal is the Binomial(3, p(d)) pmf in
/// label order (G, MG, MB, B).
pub fn analytic_mislabel(d: f64, params: &ChannelParams, scheme: Scheme) -> Result<MislabelMatrix> {
    let p = params.delivery_rate(d)?;
    let q = 1.0 - p;
    let marginal = match scheme {
        Scheme::TwoClass => vec![q, p],
        Scheme::FourClass => vec![p * p * p, 3.0 * p * p * q, 3.0 * p * q * q, q * q * q],
    };
    Ok(MislabelMatrix::from_marginal(scheme, marginal))
}

/// Empirical mislabel matrix of one environment: every row is the observed
/// label marginal.
pub fn empirical_mislabel(labels: &[u8], scheme: Scheme) -> Result<MislabelMatrix> {
    if labels.is_empty() {
        return Err(Error::EmptyInput("empirical_mislabel: no samples".into()));
    }
    let m = scheme.n_labels();
    let mut counts = vec![0usize; m];
    for &l in labels {
        if (l as usize) >= m {
            return Err(Error::Domain(format!("label {l} out of range for {scheme}")));
        }
        counts[l as usize] += 1;
    }
    let n = labels.len() as f64;
    let marginal = counts.iter().map(|&c| c as f64 / n).collect();
    Ok(MislabelMatrix::from_marginal(scheme, marginal))
}

/// Shannon entropy of one mislabel row, in bits, with 0*log(0) := 0.
pub fn label_entropy(row: &[f64]) -> Result<f64> {
    if row.iter().any(|&p| p < 0.0) {
        return Err(Error::Domain("negative probability".into()));
    }
    Ok(row
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum())
}

/// Where the per-environment mislabel matrices come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MislabelSource<'a> {
    /// Closed form from the channel model and the environment's distance.
    Analytic(&'a ChannelParams),
    /// Estimated from the environment's observed labels.
    Empirical,
}

/// Per-environment slice of a randomness report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvRandomness {
    pub env_id: usize,
    pub distance_m: f64,
    /// U_i(t) per label.
    pub u_per_label: Vec<f64>,
    /// R_i(t) per label (normalized by the full set size).
    pub r_per_label: Vec<f64>,
}

/// Randomness and intrinsic accuracy of a sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomnessReport {
    /// U(S), bits.
    pub u_bits: f64,
    /// A(S).
    pub a: f64,
    /// Reference maximum accuracy.
    pub acc_max: f64,
    pub per_env: Vec<EnvRandomness>,
}

/// Compute U(S), A(S), and Acc_max for a sample set.
pub fn set_randomness(set: &SampleSet, source: MislabelSource<'_>) -> Result<RandomnessReport> {
    if set.is_empty() {
        return Err(Error::EmptyInput("set_randomness: empty sample set".into()));
    }
    let m = set.scheme.n_labels();
    let n_total = set.len() as f64;
    let mut u = 0.0;
    let mut a = 0.0;
    let mut best_const = 0.0;
    let mut per_env = Vec::new();
    for env in &set.envs {
        let labels = set.env_labels(env.env_id);
        if labels.is_empty() {
            continue; // zero ratios: no contribution
        }
        let matrix = match source {
            MislabelSource::Analytic(params) => {
                analytic_mislabel(env.distance_m, params, set.scheme)?
            }
            MislabelSource::Empirical => empirical_mislabel(&labels, set.scheme)?,
        };
        matrix.validate()?;
        let mut r = vec![0.0f64; m];
        for &l in &labels {
            r[l as usize] += 1.0 / n_total;
        }
        let mut u_rows = Vec::with_capacity(m);
        #[allow(clippy::needless_range_loop)] // t couples rows and ratios
        for t in 0..m {
            let u_t = label_entropy(&matrix.rows[t])?;
            u += u_t * r[t];
            a += r[t] * matrix.rows[t][t];
            u_rows.push(u_t);
        }
        best_const += r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        per_env.push(EnvRandomness {
            env_id: env.env_id,
            distance_m: env.distance_m,
            u_per_label: u_rows,
            r_per_label: r,
        });
    }
    Ok(RandomnessReport { u_bits: u, a, acc_max: a.max(best_const), per_env })
}

/// Confusion matrix, accuracy, and predictor randomness U_p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    /// Counts indexed [true][predicted].
    pub confusion: Vec<Vec<usize>>,
    pub acc: f64,
    /// U_p, bits.
    pub u_p: f64,
    /// R_p(t): fraction of predictions per label.
    pub r_p: Vec<f64>,
    /// Reference maximum accuracy of the evaluated set, when known.
    pub acc_max: Option<f64>,
}

/// Compute the predictor randomness metric from true/predicted label pairs.
pub fn predictor_randomness(
    true_labels: &[u8],
    predicted_labels: &[u8],
    scheme: Scheme,
) -> Result<PredictionReport> {
    if true_labels.len() != predicted_labels.len() {
        return Err(Error::DimensionMismatch {
            expected: true_labels.len(),
            got: predicted_labels.len(),
        });
    }
    if true_labels.is_empty() {
        return Err(Error::EmptyInput("predictor_randomness: no labels".into()));
    }
    let m = scheme.n_labels();
    let mut confusion = vec![vec![0usize; m]; m];
    for (&t, &p) in true_labels.iter().zip(predicted_labels) {
        if (t as usize) >= m || (p as usize) >= m {
            return Err(Error::Domain(format!("label out of range for {scheme}")));
        }
        confusion[t as usize][p as usize] += 1;
    }
    let n = true_labels.len() as f64;
    let correct: usize = (0..m).map(|i| confusion[i][i]).sum();
    let mut u_p = 0.0;
    let mut r_p = vec![0.0f64; m];
    for t in 0..m {
        let emitted: usize = (0..m).map(|u| confusion[u][t]).sum();
        if emitted == 0 {
            continue; // never-emitted label contributes nothing
        }
        r_p[t] = emitted as f64 / n;
        let row: Vec<f64> = (0..m)
            .map(|u| confusion[u][t] as f64 / emitted as f64)
            .collect();
        u_p += r_p[t] * label_entropy(&row)?;
    }
    Ok(PredictionReport {
        confusion,
        acc: correct as f64 / n,
        u_p,
        r_p,
        acc_max: None,
    })
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    label_entropy(&[p.clamp(0.0, 1.0), (1.0 - p).clamp(0.0, 1.0)]).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{assemble, EnvDescriptor, EnvSpec, Sample, DEFAULT_SENTINEL_DBM};
    use crate::rng;
    use rand::Rng;

    const BINOM3_HALF_ENTROPY: f64 = 1.811278124459133; // mpmath, 30 digits

    fn set_from_labels(scheme: Scheme, envs: &[(f64, &[u8])]) -> SampleSet {
        let mut samples = Vec::new();
        let mut descs = Vec::new();
        for (env_id, (d, labels)) in envs.iter().enumerate() {
            descs.push(EnvDescriptor { env_id, distance_m: *d });
            for &l in *labels {
                samples.push(Sample { features: vec![0.0; 2], label: l, env_id });
            }
        }
        SampleSet { samples, envs: descs, scheme: envs[0].1.first().map(|_| scheme).unwrap_or(scheme), k: 1 }
    }

    #[test]
    fn analytic_two_class_at_r0() {
        let p = ChannelParams::default();
        let m = analytic_mislabel(p.r_zero(), &p, Scheme::TwoClass).unwrap();
        for row in &m.rows {
            assert!((row[0] - 0.5).abs() < 1e-9);
            assert!((row[1] - 0.5).abs() < 1e-9);
        }
        m.validate().unwrap();
    }

    #[test]
    fn analytic_four_class_at_r0() {
        let p = ChannelParams::default();
        let m = analytic_mislabel(p.r_zero(), &p, Scheme::FourClass).unwrap();
        let want = [0.125, 0.375, 0.375, 0.125];
        for row in &m.rows {
            for (got, w) in row.iter().zip(want) {
                assert!((got - w).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn analytic_two_class_deterministic_regime() {
        let p = ChannelParams::new(3.0, 1e-6, 17.0, 90.0).unwrap();
        let m = analytic_mislabel(100.0, &p, Scheme::TwoClass).unwrap();
        assert!(m.rows[0][0] < 1e-12);
        assert!((m.rows[0][1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_marginals() {
        let m = empirical_mislabel(&[1, 1, 0, 0], Scheme::TwoClass).unwrap();
        assert_eq!(m.rows[0], vec![0.5, 0.5]);
        let m = empirical_mislabel(&[0, 0, 0], Scheme::FourClass).unwrap();
        assert_eq!(m.rows[2], vec![1.0, 0.0, 0.0, 0.0]);
        assert!(empirical_mislabel(&[], Scheme::TwoClass).is_err());
        assert!(empirical_mislabel(&[5], Scheme::TwoClass).is_err());
    }

    #[test]
    fn empirical_converges_to_analytic() {
        let params = ChannelParams::default();
        let r0 = params.r_zero();
        let spec = [EnvSpec { distance_m: r0, count: 100_000 }];
        let set = assemble(&spec, Scheme::TwoClass, 3, &params, DEFAULT_SENTINEL_DBM, 17).unwrap();
        let emp = empirical_mislabel(&set.labels(), Scheme::TwoClass).unwrap();
        let ana = analytic_mislabel(r0, &params, Scheme::TwoClass).unwrap();
        for (er, ar) in emp.rows.iter().zip(&ana.rows) {
            for (e, a) in er.iter().zip(ar) {
                assert!((e - a).abs() < 0.01, "empirical {e} vs analytic {a}");
            }
        }
    }

    #[test]
    fn entropy_values() {
        assert_eq!(label_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((label_entropy(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-12);
        let h = label_entropy(&[0.125, 0.375, 0.375, 0.125]).unwrap();
        assert!((h - BINOM3_HALF_ENTROPY).abs() < 1e-12);
        assert!(label_entropy(&[-0.1, 1.1]).is_err());
    }

    #[test]
    fn set_randomness_all_at_r0_is_one_bit() {
        let params = ChannelParams::default();
        let set = set_from_labels(Scheme::TwoClass, &[(params.r_zero(), &[0, 1, 0, 1])]);
        let rep = set_randomness(&set, MislabelSource::Analytic(&params)).unwrap();
        assert!((rep.u_bits - 1.0).abs() < 1e-9);
    }

    #[test]
    fn set_randomness_mixture_halves() {
        // half in a zero-entropy env, half fair-coin: U = 0.5
        let set = set_from_labels(
            Scheme::TwoClass,
            &[(100.0, &[1, 1, 1, 1]), (1000.0, &[0, 1, 0, 1])],
        );
        let rep = set_randomness(&set, MislabelSource::Empirical).unwrap();
        assert!((rep.u_bits - 0.5).abs() < 1e-12);
    }

    #[test]
    fn set_accuracy_and_acc_max() {
        // single env, marginal (0.1, 0.9): A = 0.82, best constant = 0.9
        let labels: Vec<u8> = std::iter::repeat_n(0u8, 1)
            .chain(std::iter::repeat_n(1u8, 9))
            .collect();
        let set = set_from_labels(Scheme::TwoClass, &[(500.0, &labels)]);
        let rep = set_randomness(&set, MislabelSource::Empirical).unwrap();
        assert!((rep.a - 0.82).abs() < 1e-12);
        assert!((rep.acc_max - 0.9).abs() < 1e-12);
    }

    #[test]
    fn ratios_sum_to_one() {
        let params = ChannelParams::default();
        let spec = [
            EnvSpec { distance_m: 600.0, count: 40 },
            EnvSpec { distance_m: 1100.0, count: 60 },
        ];
        let set = assemble(&spec, Scheme::FourClass, 4, &params, DEFAULT_SENTINEL_DBM, 3).unwrap();
        let rep = set_randomness(&set, MislabelSource::Analytic(&params)).unwrap();
        let total: f64 = rep.per_env.iter().flat_map(|e| &e.r_per_label).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(rep.a <= rep.acc_max);
        assert!(rep.u_bits >= 0.0 && rep.u_bits <= 2.0);
    }

    #[test]
    fn u_curve_unimodal_with_peak_at_r0() {
        let params = ChannelParams::default();
        let r0 = params.r_zero();
        let grid: Vec<f64> = (1..=100).map(|i| i as f64 * 0.025 * r0).collect();
        let us: Vec<f64> = grid
            .iter()
            .map(|&d| {
                let set = set_from_labels(Scheme::TwoClass, &[(d, &[0, 1])]);
                set_randomness(&set, MislabelSource::Analytic(&params))
                    .unwrap()
                    .u_bits
            })
            .collect();
        let peak = us
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!((grid[peak] - r0).abs() < 1e-9, "peak at {}", grid[peak]);
        for w in us[..=peak].windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        for w in us[peak..].windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!((us[peak] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn four_class_u_matches_binomial_entropy() {
        let params = ChannelParams::default();
        let d = 0.9 * params.r_zero();
        let p = params.delivery_rate(d).unwrap();
        let set = set_from_labels(Scheme::FourClass, &[(d, &[0, 1, 2, 3])]);
        let rep = set_randomness(&set, MislabelSource::Analytic(&params)).unwrap();
        let q = 1.0 - p;
        let pmf = [p * p * p, 3.0 * p * p * q, 3.0 * p * q * q, q * q * q];
        let want = label_entropy(&pmf).unwrap();
        assert!((rep.u_bits - want).abs() < 1e-12);
    }

    #[test]
    fn predictor_perfect_and_constant() {
        let labels = [0u8, 1, 0, 1, 1, 0];
        let rep = predictor_randomness(&labels, &labels, Scheme::TwoClass).unwrap();
        assert_eq!(rep.acc, 1.0);
        assert_eq!(rep.u_p, 0.0);

        let constant = [1u8; 6];
        let rep = predictor_randomness(&labels, &constant, Scheme::TwoClass).unwrap();
        assert_eq!(rep.acc, 0.5);
        assert!((rep.u_p - 1.0).abs() < 1e-12);
        assert_eq!(rep.r_p, vec![0.0, 1.0]);
    }

    #[test]
    fn predictor_independent_uniform_is_one_bit() {
        let mut r = rng::master_stream(5);
        let n = 100_000;
        let t: Vec<u8> = (0..n).map(|_| r.gen_range(0..2u8)).collect();
        let p: Vec<u8> = (0..n).map(|_| r.gen_range(0..2u8)).collect();
        let rep = predictor_randomness(&t, &p, Scheme::TwoClass).unwrap();
        assert!((rep.u_p - 1.0).abs() < 0.02, "u_p {}", rep.u_p);
        let s: f64 = rep.r_p.iter().sum();
        assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn predictor_errors() {
        assert!(predictor_randomness(&[0, 1], &[0], Scheme::TwoClass).is_err());
        assert!(predictor_randomness(&[], &[], Scheme::TwoClass).is_err());
    }

    #[test]
    fn identity_predictor_matches_set_randomness_single_env() {
        // labels drawn per the analytic matrix; the "identity" predictor maps
        // the nominal label to itself, so p'_tu is the analytic row.
        let params = ChannelParams::default();
        let d = params.r_zero();
        let mut r = rng::master_stream(8);
        let p = params.delivery_rate(d).unwrap();
        let n = 100_000;
        let truth: Vec<u8> = (0..n).map(|_| (r.gen::<f64>() < p) as u8).collect();
        let nominal: Vec<u8> = (0..n).map(|_| (r.gen::<f64>() < p) as u8).collect();
        let rep = predictor_randomness(&truth, &nominal, Scheme::TwoClass).unwrap();
        let set = set_from_labels(Scheme::TwoClass, &[(d, &truth)]);
        let srep = set_randomness(&set, MislabelSource::Analytic(&params)).unwrap();
        assert!((rep.u_p - srep.u_bits).abs() < 0.02);
    }
}
