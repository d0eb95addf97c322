//! Bounded univariate maximization.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub argmax: f64,
    pub value: f64,
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`, stopping once the
/// bracket is narrower than `tol`.
pub fn golden_section_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Maximum {
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a) > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        Maximum { argmax: x1, value: f1 }
    } else {
        Maximum { argmax: x2, value: f2 }
    }
}

/// Maximize `f` over `[lo, hi]`: evaluate an equispaced grid of `grid_points`
/// (endpoints included), then refine around the best grid point by golden
/// section until the bracket is below `tol`.
///
/// Grid ties break toward the smaller abscissa. The refined point is kept only
/// if it strictly improves on the grid maximum, so the result is never worse
/// than any grid value. `f` may return `-inf` (e.g. a zero penalty) but not
/// NaN or `+inf`.
pub fn grid_then_golden_max(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    grid_points: usize,
    tol: f64,
) -> Result<Maximum> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::contract(format!("invalid search interval [{lo}, {hi}]")));
    }
    let mut checked = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_nan() || v == f64::INFINITY {
            Err(Error::numeric(format!("objective is {v} at abundance {x}"), Some(x)))
        } else {
            Ok(v)
        }
    };
    if grid_points < 2 || lo == hi {
        let v = checked(lo)?;
        return Ok(Maximum { argmax: lo, value: v });
    }
    let step = (hi - lo) / (grid_points - 1) as f64;
    let grid_x = |i: usize| {
        if i + 1 == grid_points {
            hi
        } else {
            lo + step * i as f64
        }
    };
    let mut best_i = 0;
    let mut best_v = checked(lo)?;
    for i in 1..grid_points {
        let v = checked(grid_x(i))?;
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    if best_v == f64::NEG_INFINITY {
        return Err(Error::contract(
            "objective is -inf over the entire search interval",
        ));
    }
    let a = grid_x(best_i.saturating_sub(1));
    let b = grid_x((best_i + 1).min(grid_points - 1));
    let mut failure = None;
    let refined = golden_section_max(
        |x| match checked(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        a,
        b,
        tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    if refined.value > best_v {
        Ok(refined)
    } else {
        Ok(Maximum {
            argmax: grid_x(best_i),
            value: best_v,
        })
    }
}
