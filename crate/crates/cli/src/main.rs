use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use fbst::io::{
    load_draws, render, ColumnSelector, DrawsFileSpec, DrawsFormat, LoadError, OutputFormat, ResultDocument,
};
use fbst::plot::{render_fbst_plot, PlotSpec};
use fbst::{Dimensions, Error, Estimator, FbstAnalysis, FbstOptions, KdeOptions};

mod reference;
mod selfcheck;

use reference::{parse_reference, DescriptorError};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_WRITE: u8 = 4;
const EXIT_SELFCHECK: u8 = 5;

#[derive(Parser, Debug)]
#[command(name = "fbst", version, about = "Full Bayesian Significance Test on posterior draws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the test and print the summary.
    Test(TestArgs),
    /// Run the test and write the surprise-function plot as SVG.
    Plot(PlotArgs),
    /// Run the built-in numerical fixtures.
    Selfcheck,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FileFormat {
    Csv,
    Json,
    Plain,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EstimatorArg {
    Grid,
    Mc,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum OutputFormatArg {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// File with posterior draws of the tested parameter.
    #[arg(long)]
    draws: PathBuf,
    /// Draws file format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FileFormat>,
    /// Column (CSV header name or JSON member) holding the draws.
    #[arg(long, conflicts_with = "column_index")]
    column: Option<String>,
    /// Zero-based CSV column position holding the draws.
    #[arg(long)]
    column_index: Option<usize>,
    /// CSV field delimiter.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Null hypothesis value theta_0.
    #[arg(long = "null", allow_negative_numbers = true)]
    null_value: f64,
    /// Dimension of the parameter space.
    #[arg(long)]
    dim_theta: u32,
    /// Dimension of the null set.
    #[arg(long)]
    dim_null: u32,
    /// Reference function: flat, normal:mean=..,sd=.., cauchy:location=..,scale=..,
    /// student_t:location=..,scale=..,df=.. or table:<csv path>.
    #[arg(long = "ref", default_value = "flat")]
    reference: String,
    #[arg(long, value_enum, default_value = "grid")]
    estimator: EstimatorArg,
    /// Kernel bandwidth; Silverman's rule when omitted.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Number of density grid nodes.
    #[arg(long, env = "FBST_GRID_SIZE", default_value_t = 1024)]
    grid_size: usize,
}

#[derive(Args, Debug)]
struct TestArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Write the summary here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    output_format: OutputFormatArg,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Destination SVG file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    left_boundary: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    right_boundary: Option<f64>,
    #[arg(long, default_value_t = 800)]
    width: u32,
    #[arg(long, default_value_t = 500)]
    height: u32,
    #[arg(long, default_value = "#4a7fd4")]
    color_tangential: String,
    #[arg(long, default_value = "#d9534f")]
    color_complement: String,
    /// Omit the dashed line at the cutoff s*.
    #[arg(long)]
    no_cutoff_line: bool,
    /// x-axis label; the sample label when omitted.
    #[arg(long)]
    x_label: Option<String>,
}

/// A one-line diagnostic with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl std::fmt::Display) -> Self {
        Failure { code, message: message.to_string() }
    }
}

fn core_failure(e: Error) -> Failure {
    let code = match e {
        Error::Dimension(_) | Error::InvalidArgument(_) | Error::PlotRange(_) => EXIT_USAGE,
        Error::InvalidSample(_) => EXIT_INPUT,
        Error::Domain(_) | Error::DegenerateSample(_) | Error::Reference(_) | Error::Sampler(_) => EXIT_NUMERIC,
    };
    Failure::new(code, e)
}

fn load_failure(e: LoadError) -> Failure {
    match e {
        LoadError::Sample(inner) => Failure::new(EXIT_INPUT, inner),
        other => Failure::new(EXIT_INPUT, other),
    }
}

/// RFC 3339 UTC time, pinned by SOURCE_DATE_EPOCH when set.
fn timestamp() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0));
    pinned.unwrap_or_else(chrono::Utc::now).to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn analyse(args: &CommonArgs) -> Result<(FbstAnalysis, ResultDocument), Failure> {
    let dims = Dimensions::new(args.dim_theta, args.dim_null).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    if let Some(h) = args.bandwidth {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Failure::new(EXIT_USAGE, format!("--bandwidth must be positive, got {h}")));
        }
    }
    let delimiter = u8::try_from(args.delimiter)
        .map_err(|_| Failure::new(EXIT_USAGE, "--delimiter must be a single ASCII character"))?;
    let reference = parse_reference(&args.reference).map_err(|e| match e {
        DescriptorError::Syntax(_) => Failure::new(EXIT_USAGE, &e),
        DescriptorError::Table(_) => Failure::new(EXIT_INPUT, &e),
        DescriptorError::Invalid(inner) => core_failure(inner),
    })?;

    let mut spec = DrawsFileSpec::new(&args.draws);
    spec.delimiter = delimiter;
    if let Some(f) = args.format {
        spec.format = match f {
            FileFormat::Csv => DrawsFormat::Csv,
            FileFormat::Json => DrawsFormat::Json,
            FileFormat::Plain => DrawsFormat::Plain,
        };
    }
    spec.column = match (&args.column, args.column_index) {
        (Some(name), _) => Some(ColumnSelector::Name(name.clone())),
        (None, Some(i)) => Some(ColumnSelector::Index(i)),
        (None, None) => None,
    };
    let sample = load_draws(&spec).map_err(load_failure)?;

    let opts = FbstOptions {
        estimator: match args.estimator {
            EstimatorArg::Grid => Estimator::Grid,
            EstimatorArg::Mc => Estimator::MonteCarlo,
        },
        kde: KdeOptions { bandwidth: args.bandwidth, grid_size: args.grid_size },
    };
    let analysis = FbstAnalysis::run(&sample, args.null_value, &reference, dims, &opts).map_err(core_failure)?;
    let doc = ResultDocument {
        result: analysis.result.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        sample_label: sample.label().to_string(),
        sample_size: sample.len(),
        bandwidth: analysis.density.bandwidth().unwrap_or(f64::NAN),
        grid_size: analysis.density.grid().len(),
        timestamp: timestamp(),
    };
    Ok((analysis, doc))
}

fn write_file(path: &PathBuf, body: &str) -> Result<(), Failure> {
    std::fs::write(path, body).map_err(|e| Failure::new(EXIT_WRITE, format!("cannot write {}: {e}", path.display())))
}

fn run_test(args: &TestArgs) -> Result<(), Failure> {
    let (_, doc) = analyse(&args.common)?;
    let format = match args.output_format {
        OutputFormatArg::Text => OutputFormat::Text,
        OutputFormatArg::Json => OutputFormat::Json,
    };
    let body = render(&doc, format);
    match &args.out {
        Some(path) => write_file(path, &body),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::new(EXIT_WRITE, format!("cannot write to standard output: {e}")))
        }
    }
}

fn run_plot(args: &PlotArgs) -> Result<(), Failure> {
    let spec = PlotSpec {
        width_px: args.width,
        height_px: args.height,
        left_boundary: args.left_boundary,
        right_boundary: args.right_boundary,
        color_tangential: args.color_tangential.clone(),
        color_complement: args.color_complement.clone(),
        show_cutoff_line: !args.no_cutoff_line,
        x_label: String::new(),
    };
    // Reject a bad range before any work on the draws.
    spec.validate().map_err(core_failure)?;
    let (analysis, doc) = analyse(&args.common)?;
    let spec = PlotSpec { x_label: args.x_label.clone().unwrap_or(doc.sample_label), ..spec };
    let svg = render_fbst_plot(&analysis.surprise, &analysis.region, &spec).map_err(core_failure)?;
    write_file(&args.out, &svg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Test(args) => run_test(args),
        Command::Plot(args) => run_plot(args),
        Command::Selfcheck => {
            if selfcheck::run() {
                Ok(())
            } else {
                Err(Failure::new(EXIT_SELFCHECK, "selfcheck failed"))
            }
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fbst: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
