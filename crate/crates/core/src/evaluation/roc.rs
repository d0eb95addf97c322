//! Empirical ROC curves and fixed-false-alarm power.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub false_alarm_rate: f64,
    pub detection_prob: f64,
}

/// ROC curve from `(0, 0)` to `(1, 1)` with one vertex per distinct pooled
/// score; a pixel is declared a target when its score is `>=` the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

fn check_scores(scores: &[f64], what: &str) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::contract(format!("{what} scores are empty")));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::contract(format!("{what} scores must be finite")));
    }
    Ok(())
}

fn descending(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    s
}

/// ROC curve with trapezoidal AUC. The AUC numerator is accumulated in
/// integer counts, so it equals the Mann-Whitney statistic with half credit
/// for ties exactly.
pub fn empirical_roc(bkg: &[f64], tgt: &[f64]) -> Result<RocCurve> {
    check_scores(bkg, "background")?;
    check_scores(tgt, "target")?;
    let b = descending(bkg);
    let t = descending(tgt);
    let (nb, nt) = (b.len(), t.len());
    let mut points = vec![RocPoint {
        false_alarm_rate: 0.0,
        detection_prob: 0.0,
    }];
    let (mut ib, mut it) = (0usize, 0usize);
    let mut numerator: u128 = 0;
    while ib < nb || it < nt {
        let next = match (b.get(ib), t.get(it)) {
            (Some(&x), Some(&y)) => x.max(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        let prev_t = it;
        let prev_b = ib;
        while ib < nb && b[ib] >= next {
            ib += 1;
        }
        while it < nt && t[it] >= next {
            it += 1;
        }
        numerator += (ib - prev_b) as u128 * (prev_t + it) as u128;
        points.push(RocPoint {
            false_alarm_rate: ib as f64 / nb as f64,
            detection_prob: it as f64 / nt as f64,
        });
    }
    let auc = numerator as f64 / (2 * nb as u128 * nt as u128) as f64;
    Ok(RocCurve { points, auc })
}

/// Threshold at false-alarm rate `far`: the empirical `1 - far` quantile of
/// the background scores with "higher" interpolation, i.e. the sorted value
/// at index `ceil((1 - far)(n - 1))`.
pub fn threshold_at_far(bkg: &[f64], far: f64) -> Result<f64> {
    check_scores(bkg, "background")?;
    check_far(far)?;
    let mut s = bkg.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let pos = (1.0 - far) * (s.len() - 1) as f64;
    // guard against products like 9.000000000000002 that are integral in exact arithmetic
    let idx = ((pos - 1e-9).ceil().max(0.0) as usize).min(s.len() - 1);
    Ok(s[idx])
}

fn check_far(far: f64) -> Result<()> {
    if far > 0.0 && far <= 1.0 {
        Ok(())
    } else {
        Err(Error::contract(format!("false-alarm rate must lie in (0, 1], got {far}")))
    }
}

/// Fraction of target scores strictly above the [`threshold_at_far`]
/// threshold. At `far = 1` every target is detected.
pub fn power_at_far(bkg: &[f64], tgt: &[f64], far: f64) -> Result<f64> {
    check_scores(tgt, "target")?;
    check_far(far)?;
    if far == 1.0 {
        check_scores(bkg, "background")?;
        return Ok(1.0);
    }
    let thr = threshold_at_far(bkg, far)?;
    let hits = tgt.iter().filter(|&&s| s > thr).count();
    Ok(hits as f64 / tgt.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_examples() {
        assert_eq!(empirical_roc(&[1.0, 2.0], &[3.0, 4.0]).unwrap().auc, 1.0);
        assert_eq!(empirical_roc(&[1.0, 2.0, 2.0], &[2.0, 1.0, 2.0]).unwrap().auc, 0.5);
        assert_eq!(empirical_roc(&[1.0, 3.0], &[2.0, 4.0]).unwrap().auc, 0.75);
    }

    #[test]
    fn curve_endpoints_and_monotonicity() {
        let roc = empirical_roc(&[0.1, 0.5, 0.5, 0.9], &[0.3, 0.5, 1.2]).unwrap();
        assert_eq!(roc.points.first().unwrap().false_alarm_rate, 0.0);
        let last = roc.points.last().unwrap();
        assert_eq!((last.false_alarm_rate, last.detection_prob), (1.0, 1.0));
        for w in roc.points.windows(2) {
            assert!(w[1].false_alarm_rate >= w[0].false_alarm_rate);
            assert!(w[1].detection_prob >= w[0].detection_prob);
        }
    }

    #[test]
    fn empty_input_rejected() {
        assert!(empirical_roc(&[], &[1.0]).is_err());
        assert!(empirical_roc(&[1.0], &[]).is_err());
        assert!(power_at_far(&[1.0], &[], 0.1).is_err());
    }

    #[test]
    fn power_examples() {
        let bkg: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(threshold_at_far(&bkg, 0.05).unwrap(), 96.0);
        assert_eq!(power_at_far(&bkg, &[96.5, 10.0], 0.05).unwrap(), 0.5);
        assert_eq!(power_at_far(&bkg, &[101.0, 200.0], 0.3).unwrap(), 1.0);
        assert_eq!(power_at_far(&bkg, &[-5.0], 1.0).unwrap(), 1.0);
        assert!(power_at_far(&bkg, &[1.0], 0.0).is_err());
        assert!(power_at_far(&bkg, &[1.0], 1.5).is_err());
        assert!(power_at_far(&bkg, &[1.0], f64::NAN).is_err());
    }
}
