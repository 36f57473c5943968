//! Least-squares extraction of the dimension from log-log scale data.
//!
//! Two models share the same closed-form weighted normal equations: the
//! plain line `y = D*x + h*` and the deflection-corrected variant where the
//! regressor `x = log(1/2^s)` is replaced by `x / (1/2^s + 0.9)`. The
//! correction flattens the model at fine scales, where the probabilistic
//! filter systematically undercounts boxes.

use serde::{Deserialize, Serialize};

use crate::boxcount::ScaleCounts;
use crate::error::{Error, Result};

/// Divisor offset of the deflection-corrected regressor.
pub const DEFLECTION_OFFSET: f64 = 0.9;

/// One regression observation on natural-log axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogPoint {
    /// `ln(1 / 2^s)`.
    pub x: f64,
    /// `ln(count)`.
    pub y: f64,
    pub weight: f64,
}

/// Which regression model produced a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    Linear,
    Deflected,
}

/// Slope/intercept estimate with its weighted residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub residual_sum_squares: f64,
    pub points_used: usize,
    pub model: FitModel,
}

impl FitResult {
    /// Model prediction of `ln(count)` at `x = ln(1 / 2^s)`.
    pub fn predict(&self, x: f64) -> f64 {
        match self.model {
            FitModel::Linear => self.slope * x + self.intercept,
            FitModel::Deflected => self.slope * deflect(x) + self.intercept,
        }
    }

    /// Weighted residual of this fit's model over arbitrary points.
    pub fn weighted_rss(&self, points: &[LogLogPoint]) -> f64 {
        points
            .iter()
            .map(|p| {
                let r = p.y - self.predict(p.x);
                p.weight * r * r
            })
            .sum()
    }
}

/// Weight assignment when converting counts to log-log points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Every scale weighs 1.
    Uniform,
    /// Scale `s` weighs `1 / 2^s`, emphasizing fine resolutions.
    Resolution,
}

/// Map counts to `(ln(1/2^s), ln(count))` points, dropping zero-count
/// scales. Fails unless at least two scales survive.
pub fn to_loglog(counts: &ScaleCounts, weighting: Weighting) -> Result<Vec<LogLogPoint>> {
    let points: Vec<LogLogPoint> = counts
        .nonzero()
        .map(|e| LogLogPoint {
            x: -(e.s as f64) * std::f64::consts::LN_2,
            y: e.count.ln(),
            weight: match weighting {
                Weighting::Uniform => 1.0,
                Weighting::Resolution => 0.5f64.powi(e.s as i32),
            },
        })
        .collect();
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} nonzero scale(s); a line needs at least 2",
            points.len()
        )));
    }
    Ok(points)
}

/// The deflection-corrected regressor `x / (1/2^s + 0.9)`, with
/// `1/2^s = e^x` recovered from the point itself.
fn deflect(x: f64) -> f64 {
    x / (x.exp() + DEFLECTION_OFFSET)
}

/// Weighted ordinary least squares of `y` on `x`.
pub fn fit_linear(points: &[LogLogPoint]) -> Result<FitResult> {
    weighted_fit(points, FitModel::Linear)
}

/// Weighted least squares of `y` on the deflection-corrected regressor.
/// Points are expected to carry resolution weights.
pub fn fit_deflected(points: &[LogLogPoint]) -> Result<FitResult> {
    weighted_fit(points, FitModel::Deflected)
}

fn weighted_fit(points: &[LogLogPoint], model: FitModel) -> Result<FitResult> {
    let data: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|p| p.weight > 0.0)
        .map(|p| {
            let reg = match model {
                FitModel::Linear => p.x,
                FitModel::Deflected => deflect(p.x),
            };
            (reg, p.y, p.weight)
        })
        .collect();

    if data.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} weighted point(s); a line needs at least 2",
            data.len()
        )));
    }
    let first = data[0].0;
    if data.iter().all(|&(r, _, _)| r == first) {
        return Err(Error::DegenerateDesign(
            "all regressor values coincide".into(),
        ));
    }

    let sw: f64 = data.iter().map(|&(_, _, w)| w).sum();
    let mean_r = data.iter().map(|&(r, _, w)| w * r).sum::<f64>() / sw;
    let mean_y = data.iter().map(|&(_, y, w)| w * y).sum::<f64>() / sw;
    let mut srr = 0.0;
    let mut sry = 0.0;
    for &(r, y, w) in &data {
        srr += w * (r - mean_r) * (r - mean_r);
        sry += w * (r - mean_r) * (y - mean_y);
    }
    let slope = sry / srr;
    let intercept = mean_y - slope * mean_r;
    let residual_sum_squares = data
        .iter()
        .map(|&(r, y, w)| {
            let e = y - slope * r - intercept;
            w * e * e
        })
        .sum();

    Ok(FitResult {
        slope,
        intercept,
        residual_sum_squares,
        points_used: data.len(),
        model,
    })
}
