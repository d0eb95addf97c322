//! ROC and power curves, dominance checks, convergence studies and
//! sculpting-weight search.

pub mod convergence;
pub mod dominance;
pub mod power;
pub mod rank;
pub mod roc;
pub mod sculpt;

pub use convergence::{convergence_study, fitted_log_slope, ConvergenceRow, ConvergenceStudy};
pub use dominance::{dominance_check, DominanceReport, Margin, Verdict, DEFAULT_CONFIDENCE};
pub use power::{
    binomial_halfwidth, draw_power_sample, normal_quantile, power_curve, power_curve_on_sample,
    PowerCurve, PowerEntry, PowerSample,
};
pub use rank::{kendall, RankAgreement};
pub use roc::{empirical_roc, power_at_far, threshold_at_far, RocCurve, RocPoint};
pub use sculpt::{project_to_simplex, sculpt_optimize, SculptResult, SculptSettings};
