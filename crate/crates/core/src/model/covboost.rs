//! COV-BOOST booster-vaccine trial summarised as a 20-arm, 3-objective
//! Gaussian bandit. Means are averages of log-transformed immune responses
//! (anti-spike IgG, NT50, cellular response); variances are pooled across arms.

use super::{BanditInstance, Family};
use crate::pareto::MeanMatrix;

pub const COVBOOST_LABELS: [&str; 20] = [
    "ChAd, Prime BNT/BNT",
    "NVX, Prime BNT/BNT",
    "NVX Half, Prime BNT/BNT",
    "BNT, Prime BNT/BNT",
    "BNT Half, Prime BNT/BNT",
    "VLA, Prime BNT/BNT",
    "VLA Half, Prime BNT/BNT",
    "Ad26, Prime BNT/BNT",
    "m1273, Prime BNT/BNT",
    "CVn, Prime BNT/BNT",
    "ChAd, Prime ChAd/ChAd",
    "NVX, Prime ChAd/ChAd",
    "NVX Half, Prime ChAd/ChAd",
    "BNT, Prime ChAd/ChAd",
    "BNT Half, Prime ChAd/ChAd",
    "VLA, Prime ChAd/ChAd",
    "VLA Half, Prime ChAd/ChAd",
    "Ad26, Prime ChAd/ChAd",
    "m1273, Prime ChAd/ChAd",
    "CVn, Prime ChAd/ChAd",
];

pub const COVBOOST_MEANS: [[f64; 3]; 20] = [
    [9.50, 6.86, 4.56],
    [9.29, 6.64, 4.04],
    [9.05, 6.41, 3.56],
    [10.21, 7.49, 4.43],
    [10.05, 7.20, 4.36],
    [8.34, 5.67, 3.51],
    [8.22, 5.46, 3.64],
    [9.75, 7.27, 4.71],
    [10.43, 7.61, 4.72],
    [8.94, 6.19, 3.84],
    [7.81, 5.26, 3.97],
    [8.85, 6.59, 4.73],
    [8.44, 6.15, 4.59],
    [9.93, 7.39, 4.75],
    [8.71, 7.20, 4.91],
    [7.51, 5.31, 3.96],
    [7.27, 4.99, 4.02],
    [8.62, 6.33, 4.66],
    [10.35, 7.77, 5.00],
    [8.29, 5.92, 3.87],
];

pub const COVBOOST_POOLED_VARIANCE: [f64; 3] = [0.70, 0.83, 1.54];

/// Observations are rescaled by the per-indicator standard deviation so the
/// learner sees unit-variance coordinates; this leaves the Pareto set unchanged.
pub fn covboost_instance() -> BanditInstance {
    let means = MeanMatrix::new(COVBOOST_MEANS.iter().map(|r| r.to_vec()).collect())
        .expect("embedded table is well formed");
    let variances = COVBOOST_POOLED_VARIANCE.to_vec();
    let scale = variances.iter().map(|v| v.sqrt()).collect();
    BanditInstance::with_scale(means, Family::GaussianDiagonal { variances }, scale)
        .and_then(|inst| inst.with_labels(COVBOOST_LABELS.iter().map(|s| s.to_string()).collect()))
        .expect("embedded table is well formed")
}
