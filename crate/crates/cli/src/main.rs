use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use downscale_attack::attack::{self, AttackError, AttackMode, AttackSpec, DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE};
use downscale_attack::detect::{
    detect_scaling_attack, enforce_size_policy, DetectError, HistogramConfig, PolicyDecision, SizePolicy, Verdict,
    DEFAULT_THRESHOLD,
};
use downscale_attack::imagecore::{load_image, save_image, Dimensions, Image, ImageError};
use downscale_attack::kernels::{self, coefficients_csv, coverage_stats, KernelError, KernelKind, SamplingConvention};
use downscale_attack::profiles::{resolve_profile, PROFILES};
use downscale_attack::ScalingOperator;

const EXIT_IO: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_CRAFT_MISS: u8 = 3;
const EXIT_SUSPICIOUS: u8 = 4;
const EXIT_POLICY_REJECT: u8 = 5;

/// Downscaling-attack toolkit: resize, craft, detect and inspect.
#[derive(Debug, Parser)]
#[command(name = "downscale-attack", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Downscale an image.
    Scale(ScaleArgs),
    /// Craft an image that downscales to a chosen target.
    Craft(CraftArgs),
    /// Check whether downscaling changes an image's color distribution.
    Detect(DetectArgs),
    /// Print the coefficient matrices and coverage of an operator.
    Inspect(InspectArgs),
    /// Known framework resize configurations.
    Profiles {
        #[command(subcommand)]
        action: ProfilesAction,
    },
}

#[derive(Debug, Subcommand)]
enum ProfilesAction {
    /// One line per profile: name, kernel, convention.
    List,
}

#[derive(Debug, Args)]
struct KernelChoice {
    /// Interpolation kernel (nearest, bilinear, bicubic).
    #[arg(long, conflicts_with = "profile")]
    kernel: Option<KernelKind>,
    /// Sampling convention (half_pixel, corner_aligned).
    #[arg(long, conflicts_with = "profile")]
    convention: Option<SamplingConvention>,
    /// Framework profile supplying kernel and convention.
    #[arg(long)]
    profile: Option<String>,
}

impl KernelChoice {
    fn resolve(&self) -> Result<(KernelKind, SamplingConvention), CliError> {
        match &self.profile {
            Some(name) => {
                let p = resolve_profile(name).map_err(|e| CliError::validation(e.to_string()))?;
                Ok((p.kind, p.convention))
            }
            None => Ok((
                self.kernel.unwrap_or(KernelKind::Bilinear),
                self.convention.unwrap_or_default(),
            )),
        }
    }
}

#[derive(Debug, Args)]
struct ScaleArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
    #[command(flatten)]
    kernel: KernelChoice,
}

#[derive(Debug, Args)]
struct CraftArgs {
    /// Camouflage image shown at full resolution.
    #[arg(long)]
    source: PathBuf,
    /// Image the downscaled result should match.
    #[arg(long)]
    target: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
    /// exact-nn, local or iterative.
    #[arg(long, default_value = "local")]
    mode: AttackMode,
    /// Largest accepted per-pixel deviation of the downscaled crafted image.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: u8,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Write craft metrics as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    kernel: KernelChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum PolicyArg {
    None,
    Exact,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    model_width: usize,
    #[arg(long)]
    model_height: usize,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Histogram bins per channel; must divide 256.
    #[arg(long, default_value_t = 32)]
    bins: usize,
    /// `exact` rejects any input not already at the model size.
    #[arg(long, value_enum, default_value = "none")]
    policy: PolicyArg,
    /// Also write the JSON report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    kernel: KernelChoice,
}

#[derive(Debug, Args)]
struct InspectArgs {
    #[arg(long)]
    in_width: usize,
    #[arg(long)]
    in_height: usize,
    #[arg(long)]
    out_width: usize,
    #[arg(long)]
    out_height: usize,
    #[command(flatten)]
    kernel: KernelChoice,
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl From<ImageError> for CliError {
    fn from(e: ImageError) -> Self {
        let code = match e {
            ImageError::Unreadable { .. } | ImageError::Unwritable { .. } | ImageError::Corrupt(_) => EXIT_IO,
            _ => EXIT_VALIDATION,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::Image(img) => img.into(),
            other => CliError::validation(other.to_string()),
        }
    }
}

impl From<AttackError> for CliError {
    fn from(e: AttackError) -> Self {
        match e {
            AttackError::Image(img) => img.into(),
            AttackError::Kernel(k) => k.into(),
            other => CliError::validation(other.to_string()),
        }
    }
}

impl From<DetectError> for CliError {
    fn from(e: DetectError) -> Self {
        match e {
            DetectError::Kernel(k) => k.into(),
            other => CliError::validation(other.to_string()),
        }
    }
}

fn dims(width: usize, height: usize) -> Result<Dimensions, CliError> {
    Dimensions::new(width, height).map_err(|e| CliError::validation(e.to_string()))
}

/// Fails early when an output file could not be created.
fn check_writable(path: &Path) -> Result<(), CliError> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if parent.is_dir() {
        Ok(())
    } else {
        Err(CliError::io(format!(
            "cannot write {}: directory does not exist",
            path.display()
        )))
    }
}

fn check_image_output(path: &Path) -> Result<(), CliError> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    if !matches!(ext.as_deref(), Some("png" | "pgm" | "ppm")) {
        return Err(CliError::validation(format!(
            "{}: output must end in .png, .pgm or .ppm",
            path.display()
        )));
    }
    check_writable(path)
}

fn write_json(path: &Path, json: serde_json::Result<String>) -> Result<(), CliError> {
    let text = json.expect("report types serialize") + "\n";
    fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

fn operator(input: Dimensions, output: Dimensions, choice: &KernelChoice) -> Result<ScalingOperator, CliError> {
    let (kind, conv) = choice.resolve()?;
    Ok(ScalingOperator::new(input, output, kind, conv)?)
}

fn scale(args: &ScaleArgs) -> Result<u8, CliError> {
    let out_dims = dims(args.width, args.height)?;
    args.kernel.resolve()?;
    check_image_output(&args.output)?;
    let img = load_image(&args.input)?;
    let op = operator(img.dims(), out_dims, &args.kernel)?;
    let scaled = kernels::apply(&op, &img)?;
    save_image(&scaled, &args.output)?;
    println!("{} -> {} ({}, {})", img.dims(), out_dims, op.kind(), op.convention());
    Ok(0)
}

fn craft(args: &CraftArgs) -> Result<u8, CliError> {
    args.kernel.resolve()?;
    check_image_output(&args.output)?;
    if let Some(r) = &args.report {
        check_writable(r)?;
    }
    let source = load_image(&args.source)?;
    let target = load_image(&args.target)?;
    let op = operator(source.dims(), target.dims(), &args.kernel)?;
    let spec = AttackSpec::new(source, target, op, args.mode)?
        .with_tolerance(args.tolerance)
        .with_max_iters(args.max_iters);
    let result = attack::craft(&spec)?;
    save_image(&result.crafted, &args.output)?;
    if let Some(r) = &args.report {
        write_json(r, serde_json::to_string_pretty(&result))?;
    }
    println!(
        "{} {}: out_linf {}, source psnr {}, modified {:.4}, iterations {}",
        args.mode,
        spec.operator.kind(),
        result.out_linf,
        result.source_psnr,
        result.modified_fraction,
        result.iterations_used
    );
    if result.meets(args.tolerance) {
        Ok(0)
    } else {
        eprintln!(
            "crafted output misses tolerance {} (out_linf {})",
            args.tolerance, result.out_linf
        );
        Ok(EXIT_CRAFT_MISS)
    }
}

fn detect(args: &DetectArgs) -> Result<u8, CliError> {
    let model = dims(args.model_width, args.model_height)?;
    let cfg = HistogramConfig::new(args.bins)?;
    if !args.threshold.is_finite() || args.threshold < 0.0 {
        return Err(CliError::validation(format!(
            "threshold must be a non-negative number, got {}",
            args.threshold
        )));
    }
    args.kernel.resolve()?;
    if let Some(r) = &args.report {
        check_writable(r)?;
    }
    let img: Image = load_image(&args.input)?;
    if args.policy == PolicyArg::Exact {
        if let PolicyDecision::Reject(reason) = enforce_size_policy(&img, &SizePolicy::exact(model)) {
            eprintln!("rejected: {reason}");
            return Ok(EXIT_POLICY_REJECT);
        }
    }
    let op = operator(img.dims(), model, &args.kernel)?;
    let report = detect_scaling_attack(&img, &op, &cfg, args.threshold)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    if let Some(r) = &args.report {
        write_json(r, serde_json::to_string_pretty(&report))?;
    }
    Ok(match report.verdict {
        Verdict::Benign => 0,
        Verdict::Suspicious => EXIT_SUSPICIOUS,
    })
}

fn inspect(args: &InspectArgs) -> Result<u8, CliError> {
    let input = dims(args.in_width, args.in_height)?;
    let output = dims(args.out_width, args.out_height)?;
    let op = operator(input, output, &args.kernel)?;
    let stats = coverage_stats(&op);
    print!("{}", coefficients_csv(&op));
    println!("# operator {input} -> {output} {} {}", op.kind(), op.convention());
    println!("# influenced_pixels {}", stats.influenced_pixels);
    println!("# total_pixels {}", stats.total_pixels);
    println!("# influenced_fraction {}", stats.influenced_fraction);
    println!("# camouflage_fraction {}", stats.camouflage_fraction);
    println!("# disjoint_supports {}", op.has_disjoint_supports());
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Scale(a) => scale(a),
        Command::Craft(a) => craft(a),
        Command::Detect(a) => detect(a),
        Command::Inspect(a) => inspect(a),
        Command::Profiles {
            action: ProfilesAction::List,
        } => {
            for p in &PROFILES {
                println!("{}", p.list_line());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_VALIDATION } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
