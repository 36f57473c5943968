//! `fracdim`: box-counting fractal dimension of binary images.
//!
//! Exit codes: 0 success, 1 input error, 2 degenerate computation,
//! 64 usage error.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fracdim_core::boxcount::{FilterConfig, FilterMode, ScaleCounts};
use fracdim_core::estimator::{self, DimensionResult, Method, PipelineOptions, PreprocessStep};
use fracdim_core::eval::ClassManifest;
use fracdim_core::generators;
use fracdim_core::image::{BinaryImage, Image};
use fracdim_core::regression::FitModel;
use fracdim_core::{netpbm, preprocess, Error};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "fracdim",
    version,
    about = "Box-counting fractal dimension of binary images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the fractal dimension of a netpbm image.
    Compute(ComputeArgs),
    /// Export the per-scale counts and fitted model as CSV.
    PlotData(PipelineArgs),
    /// Generate a synthetic test image as netpbm.
    Generate(GenerateArgs),
    /// Derive the normalization factor from a generated reference fractal
    /// and persist it to the config file.
    Calibrate(CalibrateArgs),
    /// Evaluate class separability of both estimators over a manifest.
    Eval(EvalArgs),
}

#[derive(Args)]
struct PipelineArgs {
    /// Input image, netpbm P1-P6.
    input: PathBuf,

    #[arg(long, value_enum, default_value_t = MethodArg::Hfd)]
    method: MethodArg,

    /// Comma-separated preprocessing steps: denoise,edge,skeleton.
    #[arg(long, value_enum, value_delimiter = ',')]
    preprocess: Vec<StepArg>,

    /// Box-filter evaluation mode (MHFD only).
    #[arg(long, value_enum, default_value_t = ModeArg::Stochastic)]
    mode: ModeArg,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Stochastic repetitions; above 1 the result reports mean and stddev.
    #[arg(long, default_value_t = 1)]
    trials: u32,

    #[arg(long, value_enum, default_value_t = RegressionArg::Linear)]
    regression: RegressionArg,

    /// Normalization factor applied to the MHFD slope.
    #[arg(long, conflicts_with = "calibrated")]
    c: Option<f64>,

    /// Load the normalization factor from the config file.
    #[arg(long)]
    calibrated: bool,

    /// Flip object polarity after loading (and binarization).
    #[arg(long)]
    invert: bool,

    /// Config file path (overrides FRACDIM_CONFIG and ./fracdim.conf).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,

    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Args)]
struct GenerateArgs {
    /// Image family to generate.
    #[arg(value_enum)]
    what: GenerateWhat,

    /// Fractal order (sierpinski-triangle, sierpinski-carpet).
    #[arg(long)]
    order: Option<u32>,

    /// Noise field width in pixels (salt-pepper).
    #[arg(long)]
    width: Option<usize>,

    /// Noise field height in pixels (salt-pepper).
    #[arg(long)]
    height: Option<usize>,

    /// Object-pixel probability in [0, 1] (salt-pepper).
    #[arg(long)]
    density: Option<f64>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Primitive shape (primitive).
    #[arg(long, value_enum)]
    kind: Option<PrimitiveArg>,

    /// Primitive side length in pixels (primitive).
    #[arg(long)]
    size: Option<usize>,

    /// Output path.
    #[arg(long)]
    out: PathBuf,

    /// Write ascii (P1) instead of packed (P4) bits.
    #[arg(long)]
    ascii: bool,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Order of the generated reference triangle.
    #[arg(long, default_value_t = 9)]
    order: u32,

    /// Calibration target; defaults to the triangle's analytic dimension.
    #[arg(long)]
    target: Option<f64>,

    /// Config file path (overrides FRACDIM_CONFIG and ./fracdim.conf).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Class manifest JSON file.
    #[arg(long)]
    manifest: PathBuf,

    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Hfd,
    Mhfd,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum StepArg {
    Denoise,
    Edge,
    Skeleton,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Stochastic,
    #[value(alias = "expectation")]
    Expected,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegressionArg {
    Linear,
    Deflected,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenerateWhat {
    SierpinskiTriangle,
    SierpinskiCarpet,
    SaltPepper,
    Primitive,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrimitiveArg {
    FilledRect,
    Hline,
    Point,
    Ring,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Compute(args) => cmd_compute(args),
        Command::PlotData(args) => cmd_plot_data(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Eval(args) => cmd_eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 1 for input problems, 2 when the computation itself is degenerate.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::EmptyObject
        | Error::InsufficientData(_)
        | Error::DegenerateDesign(_)
        | Error::AllScalesFiltered(_)
        | Error::Calibration(_) => 2,
        _ => 1,
    }
}

#[derive(Serialize)]
struct Versioned<T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    payload: T,
}

fn print_json<T: Serialize>(payload: T) {
    let versioned = Versioned {
        schema_version: SCHEMA_VERSION,
        payload,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&versioned).expect("output serializes")
    );
}

fn load_image(path: &Path) -> Result<Image, Error> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    netpbm::load(&bytes)
}

/// Load, reduce to binary, and remember whether Otsu degenerated.
fn load_binary(path: &Path) -> Result<(BinaryImage, bool), Error> {
    let image = load_image(path)?;
    let (binary, otsu) = preprocess::reduce_to_binary(&image)?;
    Ok((binary, otsu.is_some_and(|o| o.degenerate)))
}

fn build_options(args: &PipelineArgs) -> Result<PipelineOptions, Error> {
    let normalization_c = if args.calibrated {
        config::load_normalization(&config::config_path(args.config.as_deref()))?
    } else {
        args.c.unwrap_or(1.0)
    };
    let preprocess = args
        .preprocess
        .iter()
        .map(|s| match s {
            StepArg::Denoise => PreprocessStep::Denoise,
            StepArg::Edge => PreprocessStep::Edge,
            StepArg::Skeleton => PreprocessStep::Skeleton,
        })
        .collect();
    Ok(PipelineOptions {
        preprocess,
        method: match args.method {
            MethodArg::Hfd => Method::Hfd,
            MethodArg::Mhfd => Method::Mhfd,
        },
        filter: FilterConfig {
            mode: match args.mode {
                ModeArg::Stochastic => FilterMode::Stochastic,
                ModeArg::Expected => FilterMode::Expectation,
            },
            seed: args.seed,
            trials: args.trials,
        },
        regression: match args.regression {
            RegressionArg::Linear => FitModel::Linear,
            RegressionArg::Deflected => FitModel::Deflected,
        },
        normalization_c,
        invert_input: args.invert,
    })
}

fn cmd_compute(args: ComputeArgs) -> Result<(), Error> {
    let (binary, otsu_degenerate) = load_binary(&args.pipeline.input)?;
    let opts = build_options(&args.pipeline)?;
    let mut result = estimator::compute(&binary, &opts)?;
    if otsu_degenerate {
        result.flags.push("otsu_degenerate".to_string());
    }
    match args.format {
        FormatArg::Json => print_json(&result),
        FormatArg::Csv => print!("{}", result_csv(&result)),
    }
    Ok(())
}

fn result_csv(result: &DimensionResult) -> String {
    let preprocessing: Vec<String> = result
        .preprocessing
        .iter()
        .map(|s| {
            match s {
                PreprocessStep::Denoise => "denoise",
                PreprocessStep::Edge => "edge",
                PreprocessStep::Skeleton => "skeleton",
            }
            .to_string()
        })
        .collect();
    let mut out = String::from(
        "method,value,raw_value,c,slope,intercept,residual_sum_squares,points_used,model,mode,seed,trials,value_stddev,preprocessing,flags\n",
    );
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        match result.method {
            Method::Hfd => "hfd",
            Method::Mhfd => "mhfd",
        },
        result.value,
        result.raw_value,
        result.normalization_c,
        result.fit.slope,
        result.fit.intercept,
        result.fit.residual_sum_squares,
        result.fit.points_used,
        match result.fit.model {
            FitModel::Linear => "linear",
            FitModel::Deflected => "deflected",
        },
        match result.mode {
            FilterMode::Stochastic => "stochastic",
            FilterMode::Expectation => "expectation",
        },
        result.seed,
        result.trials,
        result
            .value_stddev
            .map(|s| s.to_string())
            .unwrap_or_default(),
        preprocessing.join(";"),
        result.flags.join(";"),
    ));
    out
}

fn cmd_plot_data(args: PipelineArgs) -> Result<(), Error> {
    let (binary, _) = load_binary(&args.input)?;
    let opts = build_options(&args)?;
    let table = estimator::scale_table(&binary, &opts)?;
    let fit_outcome = estimator::compute(&binary, &opts);
    let fit = fit_outcome.as_ref().ok().map(|r| r.fit);

    // Weighting actually used by the fit at each scale.
    let resolution_weighted = opts.method == Method::Mhfd && opts.regression == FitModel::Deflected;

    print!("{}", plot_csv(&table, fit.as_ref(), resolution_weighted));

    match fit_outcome {
        Ok(_) => Ok(()),
        Err(e) => Err(e),
    }
}

fn plot_csv(
    table: &ScaleCounts,
    fit: Option<&fracdim_core::regression::FitResult>,
    resolution_weighted: bool,
) -> String {
    let mut out = String::from(
        "s,box_size,inv_box_size,count,log_inv_box_size,log_count,weight,model_fit_y\n",
    );
    for e in table.entries() {
        // + 0.0 turns the s = 0 value -0.0 into plain 0 in the output.
        let x = -(e.s as f64) * std::f64::consts::LN_2 + 0.0;
        let inv = 0.5f64.powi(e.s as i32);
        let (log_count, weight, fit_y) = if e.count > 0.0 {
            let weight = if resolution_weighted { inv } else { 1.0 };
            (
                e.count.ln().to_string(),
                weight.to_string(),
                fit.map(|f| f.predict(x).to_string()).unwrap_or_default(),
            )
        } else {
            // Zero-count scales never enter the fit; leave its columns blank.
            (String::new(), String::new(), String::new())
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            e.s, e.box_size, inv, e.count, x, log_count, weight, fit_y
        ));
    }
    out
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Error> {
    let require = |value: Option<usize>, flag: &str| {
        value.ok_or_else(|| Error::InvalidParameter(format!("{flag} is required for this kind")))
    };
    let image = match args.what {
        GenerateWhat::SierpinskiTriangle => generators::sierpinski_triangle(
            args.order
                .ok_or_else(|| Error::InvalidParameter("--order is required".into()))?,
        )?,
        GenerateWhat::SierpinskiCarpet => generators::sierpinski_carpet(
            args.order
                .ok_or_else(|| Error::InvalidParameter("--order is required".into()))?,
        )?,
        GenerateWhat::SaltPepper => generators::salt_pepper(
            require(args.width, "--width")?,
            require(args.height, "--height")?,
            args.density
                .ok_or_else(|| Error::InvalidParameter("--density is required".into()))?,
            args.seed,
        )?,
        GenerateWhat::Primitive => {
            let kind = match args.kind.ok_or_else(|| {
                Error::InvalidParameter("--kind is required for primitives".into())
            })? {
                PrimitiveArg::FilledRect => generators::PrimitiveKind::FilledRect,
                PrimitiveArg::Hline => generators::PrimitiveKind::HLine,
                PrimitiveArg::Point => generators::PrimitiveKind::Point,
                PrimitiveArg::Ring => generators::PrimitiveKind::Ring,
            };
            generators::primitive(kind, require(args.size, "--size")?)?
        }
    };

    let bytes = netpbm::save_binary(&image, args.ascii);
    std::fs::write(&args.out, &bytes).map_err(|e| Error::Io {
        path: args.out.display().to_string(),
        source: e,
    })?;

    #[derive(Serialize)]
    struct Written {
        path: String,
        width: usize,
        height: usize,
        object_pixels: u64,
    }
    print_json(Written {
        path: args.out.display().to_string(),
        width: image.width(),
        height: image.height(),
        object_pixels: image.object_count(),
    });
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), Error> {
    let target = args
        .target
        .unwrap_or_else(estimator::default_calibration_target);
    let c = estimator::calibrate(args.order, target)?;
    let path = config::config_path(args.config.as_deref());
    config::store_normalization(&path, c)?;

    #[derive(Serialize)]
    struct Calibrated {
        normalization_c: f64,
        reference_order: u32,
        target: f64,
        config: String,
    }
    print_json(Calibrated {
        normalization_c: c,
        reference_order: args.order,
        target,
        config: path.display().to_string(),
    });
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), Error> {
    let manifest = ClassManifest::load(&args.manifest)?;
    let report = fracdim_core::eval::run_manifest(&manifest)?;
    match args.format {
        FormatArg::Json => print_json(&report),
        FormatArg::Csv => print!("{}", report.to_csv()),
    }
    Ok(())
}
