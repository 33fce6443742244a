//! Accuracy metrics, ensemble aggregation and the exponential mixing fit.
//!
//! The error of a run is the min-max normalized energy gap
//! `α = (loss − e_min) / (e_max − e_min)`, clamped to `[0, 1]`, and its
//! accuracy is `1 − α`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GroundTruth;

pub fn normalized_error(final_loss: f64, gt: &GroundTruth) -> Result<f64> {
    let gap = gt.gap();
    if !(gap > 0.0) {
        return Err(Error::invalid(format!(
            "degenerate energy range [{}, {}]",
            gt.e_min, gt.e_max
        )));
    }
    Ok(((final_loss - gt.e_min) / gap).clamp(0.0, 1.0))
}

/// The log of the inverse square root of the least likely state's relative
/// Boltzmann weight: `β (e_max − e_min) / 2`.
pub fn pi_star_proxy(gt: &GroundTruth, beta: f64) -> f64 {
    beta * gt.gap() / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRecord {
    pub graph_id: String,
    pub seed: u64,
    pub method: String,
    pub beta: Option<f64>,
    pub xi: Option<f64>,
    pub eta: f64,
    pub final_loss: f64,
    pub alpha: f64,
    pub accuracy: f64,
}

impl AccuracyRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        graph_id: impl Into<String>,
        seed: u64,
        method: impl Into<String>,
        beta: Option<f64>,
        xi: Option<f64>,
        eta: f64,
        final_loss: f64,
        gt: &GroundTruth,
    ) -> Result<Self> {
        let alpha = normalized_error(final_loss, gt)?;
        Ok(AccuracyRecord {
            graph_id: graph_id.into(),
            seed,
            method: method.into(),
            beta,
            xi,
            eta,
            final_loss,
            alpha,
            accuracy: 1.0 - alpha,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub mean_accuracy: f64,
    /// Population standard deviation.
    pub std: f64,
    pub count: usize,
}

impl GroupSummary {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("cannot summarize an empty group"));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Ok(GroupSummary {
            mean_accuracy: mean,
            std: var.sqrt(),
            count: values.len(),
        })
    }
}

/// Mean and spread of accuracy per group, ordered by key.
pub fn aggregate_accuracy<K, F>(records: &[AccuracyRecord], key: F) -> Result<Vec<(K, GroupSummary)>>
where
    K: PartialEq + PartialOrd,
    F: Fn(&AccuracyRecord) -> K,
{
    if records.is_empty() {
        return Err(Error::invalid("no accuracy records to aggregate"));
    }
    let mut groups: Vec<(K, Vec<f64>)> = Vec::new();
    for r in records {
        let k = key(r);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, values)) => values.push(r.accuracy),
            None => groups.push((k, vec![r.accuracy])),
        }
    }
    groups.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    groups
        .into_iter()
        .map(|(k, values)| Ok((k, GroupSummary::from_values(&values)?)))
        .collect()
}

/// Mean normalized error per epoch across runs. Every curve must have the
/// same length; each is paired with its graph's ground truth.
pub fn mean_error_curve(runs: &[(&[f64], &GroundTruth)]) -> Result<Vec<f64>> {
    let Some(len) = runs.first().map(|(c, _)| c.len()) else {
        return Err(Error::invalid("no runs to average"));
    };
    let mut sum = vec![0.0; len];
    for (curve, gt) in runs {
        if curve.len() != len {
            return Err(Error::invalid(format!(
                "curve lengths differ ({} vs {len})",
                curve.len()
            )));
        }
        for (s, &loss) in sum.iter_mut().zip(curve.iter()) {
            *s += normalized_error(loss, gt)?;
        }
    }
    let n = runs.len() as f64;
    Ok(sum.into_iter().map(|s| s / n).collect())
}

/// Fitted `α(t) = amplitude · exp(−rate · t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingFit {
    pub amplitude: f64,
    pub rate: f64,
    /// Sum of squared residuals of `ln α`.
    pub residual: f64,
    pub n_points: usize,
}

impl MixingFit {
    pub fn predict(&self, t: f64) -> f64 {
        self.amplitude * (-self.rate * t).exp()
    }

    pub fn residual_per_point(&self) -> f64 {
        self.residual / self.n_points as f64
    }
}

/// Ordinary least squares of `ln α` against `t`.
pub fn fit_mixing_curve(points: &[(f64, f64)]) -> Result<MixingFit> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "mixing fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(t, a)) = points.iter().find(|(_, a)| !(*a > 0.0) || !a.is_finite()) {
        return Err(Error::invalid(format!(
            "error value {a} at t = {t} has no logarithm"
        )));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(t, a)| (t, a.ln())).collect();
    let t_mean = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - t_mean).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::invalid("mixing fit needs at least two distinct epochs"));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - t_mean) * (p.1 - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * t_mean;
    let residual = logs
        .iter()
        .map(|&(t, y)| (y - intercept - slope * t).powi(2))
        .sum();
    Ok(MixingFit {
        amplitude: intercept.exp(),
        rate: -slope,
        residual,
        n_points: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexAssignment;
    use proptest::prelude::*;

    fn gt(e_min: f64, e_max: f64) -> GroundTruth {
        GroundTruth {
            e_min,
            e_max,
            argmin: VertexAssignment::from_bits(1, 0),
        }
    }

    fn record(accuracy: f64, beta: f64) -> AccuracyRecord {
        AccuracyRecord::new("g", 0, "mcmc-vqa", Some(beta), Some(0.5), 0.1, 1.0 - accuracy, &gt(0.0, 1.0))
            .unwrap()
    }

    #[test]
    fn error_endpoints() {
        let g = gt(-4.0, 6.0);
        assert_eq!(normalized_error(-4.0, &g).unwrap(), 0.0);
        assert_eq!(normalized_error(6.0, &g).unwrap(), 1.0);
        assert_eq!(normalized_error(1.0, &g).unwrap(), 0.5);
        assert_eq!(normalized_error(-9.0, &g).unwrap(), 0.0);
        assert!(normalized_error(0.0, &gt(2.0, 2.0)).is_err());
    }

    #[test]
    fn record_accuracy_complements_error() {
        let r = AccuracyRecord::new("g0", 3, "vqe", None, None, 0.1, 0.5, &gt(-1.0, 3.0)).unwrap();
        assert_eq!(r.alpha, 0.375);
        assert_eq!(r.alpha + r.accuracy, 1.0);
    }

    #[test]
    fn aggregate_small_groups() {
        let single = aggregate_accuracy(&[record(0.8, 0.2)], |r| r.beta).unwrap();
        assert_eq!(single.len(), 1);
        assert!((single[0].1.mean_accuracy - 0.8).abs() < 1e-12);
        assert_eq!(single[0].1.std, 0.0);

        let pair = aggregate_accuracy(&[record(0.9, 0.2), record(1.0, 0.2)], |r| r.beta).unwrap();
        assert!((pair[0].1.mean_accuracy - 0.95).abs() < 1e-12);
        assert!((pair[0].1.std - 0.05).abs() < 1e-12);
        assert!(aggregate_accuracy(&[], |r| r.beta).is_err());
    }

    #[test]
    fn aggregate_orders_by_key() {
        let recs = [record(0.5, 0.8), record(0.9, 0.1), record(0.7, 0.4), record(0.6, 0.8)];
        let out = aggregate_accuracy(&recs, |r| r.beta).unwrap();
        let keys: Vec<_> = out.iter().map(|(k, s)| (k.unwrap(), s.count)).collect();
        assert_eq!(keys, vec![(0.1, 1), (0.4, 1), (0.8, 2)]);
    }

    #[test]
    fn recovers_synthetic_exponential() {
        let pts: Vec<_> = (0..=40)
            .map(|i| {
                let t = 10.0 * i as f64;
                (t, 0.5 * (-0.01 * t).exp())
            })
            .collect();
        let fit = fit_mixing_curve(&pts).unwrap();
        assert!((fit.amplitude - 0.5).abs() < 1e-9);
        assert!((fit.rate - 0.01).abs() < 1e-9);
        assert!(fit.residual < 1e-18);
    }

    #[test]
    fn flat_data_has_zero_rate() {
        let pts: Vec<_> = (0..10).map(|t| (t as f64, 0.3)).collect();
        let fit = fit_mixing_curve(&pts).unwrap();
        assert!(fit.rate.abs() < 1e-12);
        assert!((fit.amplitude - 0.3).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(fit_mixing_curve(&[(0.0, 1.0), (1.0, 0.5)]).is_err());
        assert!(fit_mixing_curve(&[(0.0, 1.0), (1.0, 0.0), (2.0, 0.5)]).is_err());
        assert!(fit_mixing_curve(&[(1.0, 1.0), (1.0, 0.5), (1.0, 0.2)]).is_err());
    }

    #[test]
    fn pi_star_proxy_scaling() {
        let g = gt(-3.0, 5.0);
        assert_eq!(pi_star_proxy(&g, 0.4), 2.0 * pi_star_proxy(&g, 0.2));
        assert_eq!(pi_star_proxy(&gt(1.0, 1.0), 0.5), 0.0);
        let ratios: Vec<f64> = [0.2, 0.5, 0.8]
            .iter()
            .map(|&b| pi_star_proxy(&g, b) / pi_star_proxy(&g, 0.2))
            .collect();
        for (r, want) in ratios.iter().zip([1.0, 2.5, 4.0]) {
            assert!((r - want).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_curve_averages_errors() {
        let g = gt(0.0, 10.0);
        let a = [10.0, 5.0, 0.0];
        let b = [10.0, 10.0, 5.0];
        let curve = mean_error_curve(&[(&a, &g), (&b, &g)]).unwrap();
        assert_eq!(curve, vec![1.0, 0.75, 0.25]);
        assert!(mean_error_curve(&[(&a, &g), (&b[..2], &g)]).is_err());
        assert!(mean_error_curve(&[]).is_err());
    }

    proptest! {
        #[test]
        fn error_monotone_and_shift_invariant(
            lo in -50.0f64..50.0, width in 0.1f64..50.0,
            x in -100.0f64..100.0, dx in 0.0f64..10.0, shift in -20.0f64..20.0,
        ) {
            let g = gt(lo, lo + width);
            let a = normalized_error(x, &g).unwrap();
            prop_assert!(a <= normalized_error(x + dx, &g).unwrap());
            let shifted = gt(lo + shift, lo + width + shift);
            prop_assert!((a - normalized_error(x + shift, &shifted).unwrap()).abs() < 1e-9);
        }

        #[test]
        fn fit_is_a_fixed_point(a in 0.01f64..10.0, b in -0.05f64..0.05, n in 3usize..60) {
            let pts: Vec<_> = (0..n).map(|i| (i as f64 * 7.0, a * (-b * i as f64 * 7.0).exp())).collect();
            let fit = fit_mixing_curve(&pts).unwrap();
            prop_assert!((fit.amplitude - a).abs() < 1e-9 * a.max(1.0));
            prop_assert!((fit.rate - b).abs() < 1e-9);
        }

        #[test]
        fn group_mean_within_range(accs in proptest::collection::vec(0.0f64..=1.0, 1..30)) {
            let recs: Vec<_> = accs.iter().map(|&a| record(a, 0.2)).collect();
            let out = aggregate_accuracy(&recs, |_| 0u8).unwrap();
            let lo = recs.iter().map(|r| r.accuracy).fold(f64::INFINITY, f64::min);
            let hi = recs.iter().map(|r| r.accuracy).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(out[0].1.mean_accuracy >= lo - 1e-12 && out[0].1.mean_accuracy <= hi + 1e-12);
        }
    }
}
