//! Cross-seed aggregation.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::SeedRun;
use crate::error::{Error, Result};

/// Sample mean and standard error of the mean; the error is 0 for one sample.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub seeds: usize,
    pub episodes: usize,
    pub mean_cum_regret: Vec<f64>,
    pub stderr_cum_regret: Vec<f64>,
    pub mean_inst_regret: Vec<f64>,
    /// Reported value (cost for inventory) of the last policy, per seed.
    pub final_values: Vec<f64>,
    pub final_mean: f64,
    pub final_stderr: f64,
}

pub fn aggregate(runs: &[SeedRun]) -> Result<Summary> {
    let first = runs.first().ok_or_else(|| Error::Config("nothing to aggregate".into()))?;
    let episodes = first.records.len();
    if let Some(bad) = runs.iter().find(|r| r.records.len() != episodes) {
        return Err(Error::RecordMismatch {
            expected: episodes,
            found: bad.records.len(),
        });
    }
    let mut mean_cum = Vec::with_capacity(episodes);
    let mut se_cum = Vec::with_capacity(episodes);
    let mut mean_inst = Vec::with_capacity(episodes);
    let mut col = vec![0.0; runs.len()];
    for k in 0..episodes {
        for (c, r) in col.iter_mut().zip(runs) {
            *c = r.records[k].cum_regret;
        }
        let (m, se) = mean_stderr(&col);
        mean_cum.push(m);
        se_cum.push(se);
        mean_inst.push(runs.iter().map(|r| r.records[k].inst_regret).sum::<f64>() / runs.len() as f64);
    }
    let final_values: Vec<f64> = runs.iter().map(SeedRun::final_value).collect();
    let (final_mean, final_stderr) = mean_stderr(&final_values);
    Ok(Summary {
        seeds: runs.len(),
        episodes,
        mean_cum_regret: mean_cum,
        stderr_cum_regret: se_cum,
        mean_inst_regret: mean_inst,
        final_values,
        final_mean,
        final_stderr,
    })
}

/// Welch's unequal-variance t-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelchT {
    /// `None` when both samples have zero variance.
    pub t: Option<f64>,
    pub dof: Option<f64>,
    /// Two-sided.
    pub p_value: Option<f64>,
    pub zero_variance: bool,
}

pub fn welch_t(a: &[f64], b: &[f64]) -> WelchT {
    let (ma, sa) = mean_stderr(a);
    let (mb, sb) = mean_stderr(b);
    let (va, vb) = (sa * sa, sb * sb);
    let se2 = va + vb;
    if se2 == 0.0 {
        return WelchT {
            t: None,
            dof: None,
            p_value: None,
            zero_variance: true,
        };
    }
    let t = (ma - mb) / se2.sqrt();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let denom = if na > 1.0 { va * va / (na - 1.0) } else { 0.0 } + if nb > 1.0 { vb * vb / (nb - 1.0) } else { 0.0 };
    let dof = se2 * se2 / denom;
    let p = StudentsT::new(0.0, 1.0, dof).ok().map(|d| 2.0 * d.cdf(-t.abs()));
    WelchT {
        t: Some(t),
        dof: Some(dof),
        p_value: p,
        zero_variance: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::RegretRecord;
    use crate::rng::{stream, Purpose};
    use rand::Rng;

    fn run(seed: u64, inst: &[f64]) -> SeedRun {
        let mut cum = 0.0;
        let records = inst
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                cum += x;
                RegretRecord {
                    seed,
                    episode: k + 1,
                    value: x,
                    inst_regret: x,
                    cum_regret: cum,
                    wall_secs: 0.0,
                }
            })
            .collect();
        SeedRun { seed, records }
    }

    #[test]
    fn single_seed_has_zero_stderr() {
        let s = aggregate(&[run(0, &[0.5, 0.25])]).unwrap();
        assert_eq!(s.stderr_cum_regret, vec![0.0, 0.0]);
        assert_eq!(s.mean_cum_regret, vec![0.5, 0.75]);
        assert_eq!(s.final_stderr, 0.0);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let err = aggregate(&[run(0, &[0.1, 0.2]), run(1, &[0.1])]).unwrap_err();
        assert!(matches!(err, Error::RecordMismatch { expected: 2, found: 1 }));
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn identical_samples_flag_zero_variance() {
        let w = welch_t(&[3.0, 3.0, 3.0], &[3.0, 3.0, 3.0]);
        assert!(w.zero_variance && w.t.is_none());
    }

    #[test]
    fn welch_matches_hand_computation() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [2.0, 4.0, 6.0];
        // var_a = 5/3, var_b = 4.
        let se2 = 5.0 / 12.0 + 4.0 / 3.0;
        let w = welch_t(&a, &b);
        assert!((w.t.unwrap() - (2.5 - 4.0) / f64::sqrt(se2)).abs() < 1e-12);
        let dof = se2 * se2 / ((5.0f64 / 12.0).powi(2) / 3.0 + (4.0f64 / 3.0).powi(2) / 2.0);
        assert!((w.dof.unwrap() - dof).abs() < 1e-12);
        let p = w.p_value.unwrap();
        assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn coin_cost_mean_is_calibrated() {
        let runs: Vec<SeedRun> = (0..100)
            .map(|seed| {
                let mut rng = stream(seed, Purpose::Auxiliary, 0);
                let x: Vec<f64> = (0..10).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
                run(seed, &x)
            })
            .collect();
        let s = aggregate(&runs).unwrap();
        // Truth 0.5 per episode.
        let (m, se) = (s.mean_cum_regret[9], s.stderr_cum_regret[9]);
        assert!((m - 5.0).abs() <= 3.0 * se, "{m} ± {se}");
        assert!((s.final_mean - 0.5).abs() <= 3.0 * s.final_stderr);
    }
}
