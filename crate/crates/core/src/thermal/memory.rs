//! Decoder-failure times over an ensemble of trajectories.

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::fixtures::stream_rng;

use super::bound::arrhenius_bound;
use super::kmc::{RunOptions, Simulation};

const BOOTSTRAP_RESAMPLES: usize = 1000;

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

/// Nearest-rank quantile of sorted data; `+inf` entries (runs that never
/// failed) are allowed.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of no data");
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

/// Percentile bootstrap interval of the median at level `level`.
pub fn bootstrap_median_ci(values: &[f64], level: f64, seed: u64) -> (f64, f64) {
    let mut rng = stream_rng(seed, u64::MAX - 7);
    let n = values.len();
    let mut medians: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let mut s: Vec<f64> = (0..n).map(|_| values[rng.gen_range(0..n)]).collect();
            s.sort_by(f64::total_cmp);
            quantile(&s, 0.5)
        })
        .collect();
    medians.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (quantile(&medians, tail), quantile(&medians, 1.0 - tail))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemoryTimeEstimate {
    pub beta: f64,
    pub max_time: f64,
    pub n_traj: usize,
    pub n_failed: usize,
    #[serde(serialize_with = "finite_or_null")]
    pub median: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub q25: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub q75: f64,
    /// 95% bootstrap interval of the median.
    #[serde(serialize_with = "finite_or_null")]
    pub ci_low: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub ci_high: f64,
    /// Per trajectory; `None` if it never failed before `max_time`.
    pub failure_times: Vec<Option<f64>>,
}

/// Run every trajectory of `config` until its first decoder failure.
pub fn memory_time_estimate(config: &SimConfig) -> Result<MemoryTimeEstimate> {
    let sim = Simulation::new(config)?;
    let runs = sim.run_all(RunOptions::failure_only())?;
    Ok(MemoryTimeEstimate::from_failure_times(
        config,
        runs.iter().map(|t| t.failure_time).collect(),
    ))
}

impl MemoryTimeEstimate {
    /// Ensemble statistics of per-trajectory failure times of `config`.
    pub fn from_failure_times(config: &SimConfig, failure_times: Vec<Option<f64>>) -> Self {
        let mut sorted: Vec<f64> = failure_times.iter().map(|t| t.unwrap_or(f64::INFINITY)).collect();
        sorted.sort_by(f64::total_cmp);
        let (ci_low, ci_high) = bootstrap_median_ci(&sorted, 0.95, config.seed);
        MemoryTimeEstimate {
            beta: config.rate.beta,
            max_time: config.max_time,
            n_traj: sorted.len(),
            n_failed: failure_times.iter().filter(|t| t.is_some()).count(),
            median: quantile(&sorted, 0.5),
            q25: quantile(&sorted, 0.25),
            q75: quantile(&sorted, 0.75),
            ci_low,
            ci_high,
            failure_times,
        }
    }
}

/// Pick `max_time` so that the failure grid resolves the failure times:
/// double from the configured value until 90% of `pilot` trajectories
/// fail, then return twice their 90th percentile.
pub fn calibrate_max_time(config: &SimConfig, pilot: usize) -> Result<f64> {
    let mut cfg = config.clone();
    cfg.trajectories = pilot.max(1);
    // the pilot must not share streams with the real run
    cfg.seed = config.seed ^ 0x9e37_79b9_7f4a_7c15;
    if !(cfg.max_time > 0.0) {
        return Err(Error::Config("calibration needs a positive starting max_time".into()));
    }
    for _ in 0..40 {
        let est = memory_time_estimate(&cfg)?;
        if est.n_failed * 10 >= est.n_traj * 9 {
            let mut times: Vec<f64> = est.failure_times.iter().flatten().copied().collect();
            times.sort_by(f64::total_cmp);
            let q90 = quantile(&times, 0.9);
            return Ok((2.0 * q90).max(cfg.max_time / 100.0));
        }
        cfg.max_time *= 2.0;
    }
    Err(Error::Size("no decoder failures within the calibration budget".into()))
}

/// One row of a β sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub median_t_fail: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub q25: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub q75: f64,
    pub n_traj: usize,
    pub bound_value: f64,
    pub n_failed: usize,
    #[serde(serialize_with = "finite_or_null")]
    pub ci_low: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub ci_high: f64,
    pub max_time: f64,
}

impl SweepRow {
    pub fn new(est: &MemoryTimeEstimate, bound_value: f64) -> Self {
        SweepRow {
            beta: est.beta,
            median_t_fail: est.median,
            q25: est.q25,
            q75: est.q75,
            n_traj: est.n_traj,
            bound_value,
            n_failed: est.n_failed,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            max_time: est.max_time,
        }
    }
}

/// Memory time and mixing-time bound at each β. With `pilot = Some(k)`,
/// `max_time` is recalibrated per β from `k` pilot trajectories.
pub fn sweep(config: &SimConfig, betas: &[f64], pilot: Option<usize>) -> Result<Vec<SweepRow>> {
    betas
        .iter()
        .map(|&beta| {
            let mut cfg = config.with_beta(beta);
            if let Some(k) = pilot {
                cfg.max_time = calibrate_max_time(&cfg, k)?;
            }
            let est = memory_time_estimate(&cfg)?;
            let bound = arrhenius_bound(Simulation::new(&cfg)?.dynamics())?;
            Ok(SweepRow::new(&est, bound.value))
        })
        .collect()
}

/// True unless some later β has a median significantly below an earlier
/// one, judged by non-overlapping bootstrap intervals.
pub fn medians_nondecreasing(rows: &[SweepRow]) -> bool {
    rows.windows(2).all(|w| w[1].ci_high >= w[0].ci_low)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::masses::MassSpec;
    use crate::thermal::{DecoderKind, RateKind, RateModel};

    fn config(beta: f64) -> SimConfig {
        SimConfig {
            lx: 4,
            ly: 4,
            d: 2,
            masses: MassSpec::uniform(2, vec![0.0, 1.0]),
            defects: None,
            rate: RateModel {
                kind: RateKind::Metropolis,
                beta,
            },
            max_time: 5.0,
            trajectories: 60,
            seed: 21,
            decoder: DecoderKind::Greedy,
        }
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, f64::INFINITY];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), f64::INFINITY);
        assert_eq!(quantile(&v, 0.25), 2.0);
    }

    #[test]
    fn infinite_temperature_fails_fast() {
        let est = memory_time_estimate(&config(0.0)).unwrap();
        assert_eq!(est.n_failed, est.n_traj);
        assert!(est.median < 1.0, "{est:?}");
        assert!(est.ci_low <= est.median && est.median <= est.ci_high);
    }

    #[test]
    fn colder_lasts_longer() {
        let rows = sweep(&config(0.0), &[0.0, 1.5], Some(30)).unwrap();
        assert!(rows[1].median_t_fail > rows[0].median_t_fail);
        assert!(medians_nondecreasing(&rows));
        assert!(rows.iter().all(|r| r.median_t_fail <= r.bound_value));
    }
}
