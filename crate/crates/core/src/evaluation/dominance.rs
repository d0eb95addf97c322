//! Empirical dominance between power curves.

use serde::{Deserialize, Serialize};

use super::power::{normal_quantile, PowerCurve};
use crate::error::{Error, Result};

/// Default confidence for dominance margins.
pub const DEFAULT_CONFIDENCE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ADominates,
    BDominates,
    Incomparable,
    StatisticallyIndistinguishable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub abundance: f64,
    /// Power of A minus power of B.
    pub difference: f64,
    pub halfwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub detector_a: String,
    pub detector_b: String,
    pub confidence: f64,
    pub verdict: Verdict,
    pub margins: Vec<Margin>,
}

/// Compare two power curves on a shared abundance grid.
///
/// The half-width at each abundance is the normal-approximation interval
/// for a difference of two binomial proportions. A dominates when it is
/// never significantly worse and somewhere significantly better.
pub fn dominance_check(a: &PowerCurve, b: &PowerCurve, confidence: f64) -> Result<DominanceReport> {
    if a.entries.len() != b.entries.len()
        || a.entries.iter().zip(&b.entries).any(|(x, y)| x.abundance != y.abundance)
    {
        return Err(Error::contract("power curves do not share an abundance grid"));
    }
    if a.far != b.far {
        return Err(Error::contract(format!(
            "power curves use different false-alarm rates ({} vs {})",
            a.far, b.far
        )));
    }
    let z = normal_quantile(confidence)?;
    let margins: Vec<Margin> = a
        .entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| {
            let var = x.detection_prob * (1.0 - x.detection_prob) / x.n_targets.max(1) as f64
                + y.detection_prob * (1.0 - y.detection_prob) / y.n_targets.max(1) as f64;
            Margin {
                abundance: x.abundance,
                difference: x.detection_prob - y.detection_prob,
                halfwidth: z * var.sqrt(),
            }
        })
        .collect();
    let verdict = if margins.iter().all(|m| m.difference.abs() <= m.halfwidth) {
        Verdict::StatisticallyIndistinguishable
    } else if margins.iter().all(|m| m.difference >= -m.halfwidth) {
        Verdict::ADominates
    } else if margins.iter().all(|m| m.difference <= m.halfwidth) {
        Verdict::BDominates
    } else {
        Verdict::Incomparable
    };
    Ok(DominanceReport {
        detector_a: a.label.clone(),
        detector_b: b.label.clone(),
        confidence,
        verdict,
        margins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::power::PowerEntry;

    fn curve(label: &str, powers: &[f64]) -> PowerCurve {
        PowerCurve {
            label: label.into(),
            far: 0.05,
            n_background: 1000,
            entries: powers
                .iter()
                .enumerate()
                .map(|(i, &p)| PowerEntry {
                    abundance: 0.1 * (i + 1) as f64,
                    detection_prob: p,
                    n_targets: 1000,
                })
                .collect(),
        }
    }

    #[test]
    fn verdicts() {
        let a = curve("a", &[0.2, 0.5, 0.9]);
        assert_eq!(dominance_check(&a, &a, 0.99).unwrap().verdict, Verdict::StatisticallyIndistinguishable);
        let b = curve("b", &[0.2, 0.3, 0.9]);
        assert_eq!(dominance_check(&a, &b, 0.99).unwrap().verdict, Verdict::ADominates);
        assert_eq!(dominance_check(&b, &a, 0.99).unwrap().verdict, Verdict::BDominates);
        let c = curve("c", &[0.4, 0.3, 0.9]);
        assert_eq!(dominance_check(&a, &c, 0.99).unwrap().verdict, Verdict::Incomparable);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let a = curve("a", &[0.2, 0.5]);
        let b = curve("b", &[0.2, 0.5, 0.6]);
        assert!(dominance_check(&a, &b, 0.99).is_err());
    }
}
