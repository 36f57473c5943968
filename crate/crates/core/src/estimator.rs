//! End-to-end dimension pipelines: optional preprocessing, box counting,
//! regression, normalization, and calibration of the normalization factor.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxcount::{self, FilterConfig, FilterMode, ScaleCounts};
use crate::error::{Error, Result};
use crate::generators;
use crate::image::BinaryImage;
use crate::preprocess;
use crate::regression::{self, FitModel, FitResult, Weighting};

/// Which estimator a pipeline runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Hfd,
    Mhfd,
}

/// Optional binary preprocessing steps, applied in this fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreprocessStep {
    Denoise,
    Edge,
    Skeleton,
}

const STEP_ORDER: [PreprocessStep; 3] = [
    PreprocessStep::Denoise,
    PreprocessStep::Edge,
    PreprocessStep::Skeleton,
];

/// Everything a dimension computation depends on besides the image itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineOptions {
    /// Requested preprocessing steps; executed in denoise -> edge ->
    /// skeleton order regardless of listing order.
    pub preprocess: Vec<PreprocessStep>,
    pub method: Method,
    pub filter: FilterConfig,
    pub regression: FitModel,
    pub normalization_c: f64,
    pub invert_input: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            preprocess: Vec::new(),
            method: Method::Hfd,
            filter: FilterConfig::default(),
            regression: FitModel::Linear,
            normalization_c: 1.0,
            invert_input: false,
        }
    }
}

impl PipelineOptions {
    fn validate(&self) -> Result<()> {
        if self.normalization_c <= 0.0 || !self.normalization_c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "normalization factor must be a positive real, got {}",
                self.normalization_c
            )));
        }
        if self.filter.trials < 1 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// A dimension estimate together with the data that produced it.
///
/// Serializes to a stable JSON object whose keys include `method`, `value`,
/// `raw_value`, `c`, `slope`, `intercept`, `scale_table`, `preprocessing`,
/// `seed`, and `flags`. For multi-trial stochastic runs, `value` and
/// `raw_value` are means over trials, `value_stddev` carries the sample
/// standard deviation, and the fit and scale table come from the first
/// trial's seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionResult {
    pub method: Method,
    /// Normalized dimension: `c * raw_value` for MHFD, `raw_value` for HFD.
    pub value: f64,
    /// Regression slope before normalization.
    pub raw_value: f64,
    #[serde(rename = "c")]
    pub normalization_c: f64,
    #[serde(flatten)]
    pub fit: FitResult,
    pub scale_table: ScaleCounts,
    pub preprocessing: Vec<PreprocessStep>,
    pub mode: FilterMode,
    pub seed: u64,
    pub trials: u32,
    pub value_stddev: Option<f64>,
    pub flags: Vec<String>,
}

impl DimensionResult {
    /// Stable JSON rendering (keys sorted, shortest float round-trip).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// Sample statistics of repeated stochastic runs.
#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloResult {
    pub mean: f64,
    pub stddev: f64,
    pub values: Vec<f64>,
}

fn apply_preprocessing(
    image: &BinaryImage,
    opts: &PipelineOptions,
) -> (BinaryImage, Vec<PreprocessStep>) {
    let mut img = if opts.invert_input {
        image.invert()
    } else {
        image.clone()
    };
    let mut applied = Vec::new();
    for step in STEP_ORDER {
        if opts.preprocess.contains(&step) {
            img = match step {
                PreprocessStep::Denoise => preprocess::denoise_median3(&img),
                PreprocessStep::Edge => preprocess::extract_edges(&img),
                PreprocessStep::Skeleton => preprocess::skeletonize(&img),
            };
            applied.push(step);
        }
    }
    (img, applied)
}

/// Run the estimator selected by `opts.method`.
pub fn compute(image: &BinaryImage, opts: &PipelineOptions) -> Result<DimensionResult> {
    match opts.method {
        Method::Hfd => compute_hfd(image, opts),
        Method::Mhfd => compute_mhfd(image, opts),
    }
}

/// The per-scale table the selected method would fit, including zero-count
/// scales. Multi-trial stochastic runs report the first trial's table.
pub fn scale_table(image: &BinaryImage, opts: &PipelineOptions) -> Result<ScaleCounts> {
    opts.validate()?;
    let (img, _) = apply_preprocessing(image, opts);
    match opts.method {
        Method::Hfd => boxcount::hfd_counts(&img),
        Method::Mhfd => boxcount::mhfd_counts(&img, &opts.filter),
    }
}

/// Classical pipeline: preprocessing, occupancy counts, uniform-weight
/// linear fit. The value is the slope; no normalization applies.
pub fn compute_hfd(image: &BinaryImage, opts: &PipelineOptions) -> Result<DimensionResult> {
    opts.validate()?;
    let (img, applied) = apply_preprocessing(image, opts);
    let counts = boxcount::hfd_counts(&img)?;
    let points = regression::to_loglog(&counts, Weighting::Uniform)?;
    let fit = regression::fit_linear(&points)?;
    Ok(DimensionResult {
        method: Method::Hfd,
        value: fit.slope,
        raw_value: fit.slope,
        normalization_c: 1.0,
        fit,
        scale_table: counts,
        preprocessing: applied,
        mode: opts.filter.mode,
        seed: opts.filter.seed,
        trials: 1,
        value_stddev: None,
        flags: Vec::new(),
    })
}

/// Filtered pipeline: preprocessing, filtered counts, then either the
/// default linear fit or the deflection-corrected weighted fit; the value
/// is `normalization_c` times the slope.
pub fn compute_mhfd(image: &BinaryImage, opts: &PipelineOptions) -> Result<DimensionResult> {
    opts.validate()?;
    if opts.filter.mode == FilterMode::Stochastic && opts.filter.trials > 1 {
        let trials = opts.filter.trials;
        let mc = monte_carlo(image, opts, trials)?;
        let mut first_opts = opts.clone();
        first_opts.filter.trials = 1;
        let first = compute_mhfd(image, &first_opts)?;
        return Ok(DimensionResult {
            value: mc.mean,
            raw_value: mc.mean / opts.normalization_c,
            trials,
            value_stddev: Some(mc.stddev),
            ..first
        });
    }

    let (img, applied) = apply_preprocessing(image, opts);
    let counts = boxcount::mhfd_counts(&img, &opts.filter)?;
    let surviving = counts.nonzero().count();
    if surviving < 2 {
        return Err(Error::AllScalesFiltered(format!(
            "{surviving} of {} scales kept any box",
            counts.len()
        )));
    }
    let fit = match opts.regression {
        FitModel::Linear => {
            regression::fit_linear(&regression::to_loglog(&counts, Weighting::Uniform)?)?
        }
        FitModel::Deflected => {
            regression::fit_deflected(&regression::to_loglog(&counts, Weighting::Resolution)?)?
        }
    };
    Ok(DimensionResult {
        method: Method::Mhfd,
        value: opts.normalization_c * fit.slope,
        raw_value: fit.slope,
        normalization_c: opts.normalization_c,
        fit,
        scale_table: counts,
        preprocessing: applied,
        mode: opts.filter.mode,
        seed: opts.filter.seed,
        trials: 1,
        value_stddev: None,
        flags: Vec::new(),
    })
}

/// Repeat the stochastic MHFD pipeline with seeds `seed + 0 ..
/// seed + trials - 1` and report sample statistics of the normalized value.
pub fn monte_carlo(
    image: &BinaryImage,
    opts: &PipelineOptions,
    trials: u32,
) -> Result<MonteCarloResult> {
    if trials < 2 {
        return Err(Error::InvalidParameter(format!(
            "monte carlo needs at least 2 trials, got {trials}"
        )));
    }
    if opts.filter.mode != FilterMode::Stochastic {
        return Err(Error::InvalidParameter(
            "monte carlo requires stochastic mode".into(),
        ));
    }
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut per_trial = opts.clone();
            per_trial.filter.seed = opts.filter.seed.wrapping_add(t as u64);
            per_trial.filter.trials = 1;
            compute_mhfd(image, &per_trial).map(|r| r.value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64;
    Ok(MonteCarloResult {
        mean,
        stddev: var.sqrt(),
        values,
    })
}

/// Derive the normalization factor that maps the raw MHFD slope of a
/// generated reference triangle onto `target`. The reference run uses
/// expectation mode with edge extraction, so the factor is deterministic.
pub fn calibrate(reference_order: u32, target: f64) -> Result<f64> {
    if reference_order < 6 {
        return Err(Error::InvalidParameter(format!(
            "reference order {reference_order} too small; need at least 6 scales"
        )));
    }
    if target <= 0.0 || !target.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "calibration target must be positive, got {target}"
        )));
    }
    let reference = generators::sierpinski_triangle(reference_order)?;
    let opts = PipelineOptions {
        preprocess: vec![PreprocessStep::Edge],
        method: Method::Mhfd,
        filter: FilterConfig::expectation(),
        regression: FitModel::Linear,
        normalization_c: 1.0,
        invert_input: false,
    };
    let raw = compute_mhfd(&reference, &opts)?.raw_value;
    if raw <= 0.0 || !raw.is_finite() {
        return Err(Error::Calibration(format!(
            "reference raw slope {raw} is not a positive real"
        )));
    }
    Ok(target / raw)
}

/// Analytic dimension of the generated reference triangle, `log 3 / log 2`;
/// the default calibration target.
pub fn default_calibration_target() -> f64 {
    3f64.ln() / 2f64.ln()
}
