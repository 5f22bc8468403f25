use std::io::Write;

use serde::{Deserialize, Serialize};

use super::TrajectoryRecord;
use crate::error::{Error, Result};

pub const SUMMARY_HEADER: &str = "model,mean_ttf_ps,std_ttf_ps,median,q1,q3,n_failed";

/// Time-to-failure statistics (ps) over an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; `None` for a single trajectory.
    pub std: Option<f64>,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub n_failed: usize,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(records: &[TrajectoryRecord]) -> Result<EnsembleSummary> {
    if records.is_empty() {
        return Err(Error::invalid("no trajectories to summarize"));
    }
    let mut t: Vec<f64> = records.iter().map(|r| r.time_to_failure).collect();
    let n = t.len();
    let mean = t.iter().sum::<f64>() / n as f64;
    let std = (n > 1)
        .then(|| (t.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt());
    t.sort_by(f64::total_cmp);
    Ok(EnsembleSummary {
        n,
        mean,
        std,
        median: quantile(&t, 0.5),
        q1: quantile(&t, 0.25),
        q3: quantile(&t, 0.75),
        n_failed: records.iter().filter(|r| r.failed).count(),
    })
}

pub fn write_summary_csv<W: Write>(
    mut w: W,
    rows: &[(String, EnsembleSummary)],
) -> std::io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for (model, s) in rows {
        let std = s.std.map(|v| v.to_string()).unwrap_or_else(|| "nan".into());
        writeln!(
            w,
            "{model},{},{std},{},{},{},{}",
            s.mean, s.median, s.q1, s.q3, s.n_failed
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64, failed: bool) -> TrajectoryRecord {
        TrajectoryRecord {
            seed: 0,
            time_to_failure: t,
            failed,
            failure_cause: None,
            failure_pair: None,
            failure_distance: None,
            temperature_trace: vec![],
            steps: 0,
            snapshots: vec![],
        }
    }

    #[test]
    fn quartiles_interpolate() {
        let r: Vec<_> = [4.0, 1.0, 3.0, 2.0, 5.0]
            .iter()
            .map(|&t| rec(t, t < 5.0))
            .collect();
        let s = summarize(&r).unwrap();
        assert_eq!((s.median, s.q1, s.q3), (3.0, 2.0, 4.0));
        assert_eq!(s.n_failed, 4);
        assert!((s.std.unwrap() - 2.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_trajectory_has_no_std() {
        let s = summarize(&[rec(6.0, false)]).unwrap();
        assert_eq!(s.std, None);
        assert_eq!(s.median, 6.0);
    }
}
