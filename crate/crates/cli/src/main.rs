//! `advrank` command-line front end.
//!
//! Exit codes: 0 on success (including `--help`), 1 on usage errors, 2 on
//! runtime failures. Every run echoes its fully resolved spec into the
//! output directory so results are reproducible from the artifacts alone.

mod parse;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use advrank_core::attacks::KernelSpec;
use advrank_core::data::TransformSpec;
use advrank_core::harness::{
    self, derive_seed, emit_report, run_alpha_t_sweep, run_temperature_sweep, run_transfer,
    run_transform_robustness, run_zero_sum_probe, write_norms_csv, write_records_jsonl,
    ExperimentSpec, ReportFormat, ZeroSumProbeSpec,
};
use advrank_core::losses::LossKind;
use advrank_core::nn;

#[derive(Parser)]
#[command(
    name = "advrank",
    version,
    about = "Gradient-sign adversarial attacks on dense classifiers, evaluated by interest-class rank"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the surrogate model and save a checkpoint plus training log
    Train(CommonArgs),
    /// Craft white-box adversarial examples and report the rank metrics
    Attack(CommonArgs),
    /// Full surrogate-to-target transfer evaluation
    Eval(CommonArgs),
    /// Factorial sweep over step size and iteration count
    SweepAlphaT(SweepAlphaTArgs),
    /// Temperature sweep of the attack loss, bracketed by cw and rce
    SweepTemp(SweepTempArgs),
    /// Logit-sum statistics probes over inits, imbalance, and gradient weights
    ProbeZerosum(ProbeZeroSumArgs),
    /// Re-evaluate crafted adversarial examples under image corruptions
    Robustness(RobustnessArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON experiment spec; flags override individual fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (created if missing); all files go here
    #[arg(long)]
    out: PathBuf,
    /// Master seed; required when no --config supplies one
    #[arg(long)]
    seed: Option<u64>,
    /// L-infinity budget; accepts decimals or fractions like 16/255
    #[arg(long, value_parser = parse::parse_ratio)]
    eps: Option<f64>,
    /// Step size; accepts decimals or fractions like 4/255
    #[arg(long, value_parser = parse::parse_ratio)]
    alpha: Option<f64>,
    /// Attack iterations
    #[arg(long)]
    steps: Option<usize>,
    /// Attack loss: ce, ce-ll, cw, rce, rce-ll, ce-temp:<T>, wce:<w>
    #[arg(long, value_parser = LossKind::from_str)]
    loss: Option<LossKind>,
    /// Attack the per-sample pseudo-random target class instead
    #[arg(long)]
    targeted: bool,
    /// Momentum weight mu; nonzero enables momentum accumulation
    #[arg(long)]
    mi: Option<f64>,
    /// Probability of the pad-and-crop input transform
    #[arg(long)]
    di_prob: Option<f64>,
    /// Gradient-smoothing kernel as SIZE:SIGMA, e.g. 3:1
    #[arg(long, value_parser = KernelSpec::from_str)]
    ti_kernel: Option<KernelSpec>,
    /// Worker threads for per-sample attack crafting
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SweepAlphaTArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Step sizes to sweep
    #[arg(long, value_delimiter = ',', value_parser = parse::parse_ratio, required = true)]
    alphas: Vec<f64>,
    /// Iteration counts to sweep
    #[arg(long, value_delimiter = ',', required = true)]
    ts: Vec<usize>,
}

#[derive(Args)]
struct SweepTempArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Softmax temperatures to sweep
    #[arg(long, value_delimiter = ',', required = true)]
    temps: Vec<f64>,
}

#[derive(Args)]
struct ProbeZeroSumArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Gradient weights for the w*P - Y drift probe
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.9, 1.0, 1.1])]
    w_values: Vec<f64>,
    /// Init schemes, e.g. gaussian:0:1 or kaiming
    #[arg(long, value_delimiter = ',')]
    inits: Vec<String>,
    /// Imbalance profiles: none, linear:MAX:MIN, exp:FACTOR
    #[arg(long, value_delimiter = ',')]
    imbalance: Vec<String>,
    /// Architectures as comma-separated dims; repeat for several
    #[arg(long, value_parser = parse::parse_dims)]
    arch: Vec<Vec<usize>>,
}

#[derive(Args)]
struct RobustnessArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Corruptions: none, brightness:F, contrast:F, noise:STD
    #[arg(long, value_delimiter = ',', required = true)]
    transforms: Vec<String>,
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<advrank_core::Error> for CliError {
    fn from(e: advrank_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{err}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Base spec from the config file or the desk defaults, with flag overrides
/// applied on top.
fn resolve_spec(args: &CommonArgs) -> Result<ExperimentSpec, CliError> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {path:?}: {e}")))?;
            let mut spec: ExperimentSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("bad config {path:?}: {e}")))?;
            if let Some(seed) = args.seed {
                spec.seed = seed;
            }
            spec
        }
        None => {
            let seed = args.seed.ok_or_else(|| {
                CliError::Usage("--seed is required when no --config is given".into())
            })?;
            ExperimentSpec::desk_default(seed)
        }
    };
    if let Some(eps) = args.eps {
        spec.attack.epsilon = eps;
    }
    if let Some(alpha) = args.alpha {
        spec.attack.alpha = alpha;
    }
    if let Some(steps) = args.steps {
        spec.attack.steps = steps;
    }
    if let Some(loss) = args.loss {
        spec.attack.loss = loss;
    }
    if args.targeted {
        spec.attack.targeted = true;
        if spec.attack.steps == 20 {
            spec.attack.steps = 200;
        }
    }
    if let Some(mu) = args.mi {
        spec.attack.momentum_mu = mu;
    }
    if let Some(p) = args.di_prob {
        spec.attack.di_prob = p;
    }
    if let Some(kernel) = args.ti_kernel {
        spec.attack.ti_kernel = Some(kernel);
    }
    if let Some(workers) = args.workers {
        spec.workers = workers;
    }
    Ok(spec)
}

fn prepare_out_dir(out: &Path, spec: &ExperimentSpec) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    fs::write(
        out.join("resolved_spec.json"),
        serde_json::to_string_pretty(spec)?,
    )?;
    Ok(())
}

fn write_transfer_outputs(
    outcome: &harness::TransferOutcome,
    out: &Path,
) -> Result<(), CliError> {
    emit_report(&outcome.report, ReportFormat::Csv, &out.join("report.csv"))?;
    emit_report(&outcome.report, ReportFormat::Json, &out.join("report.json"))?;
    write_records_jsonl(&outcome.records, &out.join("records.jsonl"))?;
    write_norms_csv(&outcome.report.step_norms, &out.join("norms.csv"))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train(args) => {
            let spec = resolve_spec(&args)?;
            prepare_out_dir(&args.out, &spec)?;
            let data = spec.dataset.build()?;
            let model = nn::init_model(&spec.surrogate.dims, &spec.surrogate.init)?;
            let ce = |z: &nn::LogitVector, label: usize| {
                advrank_core::losses::logit_gradient(
                    LossKind::Ce,
                    z,
                    &advrank_core::losses::InterestSpec::non_targeted(label),
                )
                .expect("cross-entropy gradient")
            };
            let (trained, log) = nn::train(&model, &data, &spec.train, ce)?;
            nn::save_model(&trained, &args.out.join("model.json"))?;
            fs::write(
                args.out.join("training_log.json"),
                serde_json::to_string_pretty(&log)?,
            )?;
            println!(
                "trained {} to accuracy {:.4} over {} epochs",
                spec.surrogate.name,
                log.final_accuracy(),
                log.epochs.len()
            );
            Ok(())
        }
        Command::Attack(args) => {
            let mut spec = resolve_spec(&args)?;
            // White-box run: no target models.
            spec.targets.clear();
            prepare_out_dir(&args.out, &spec)?;
            let outcome = run_transfer(&spec)?;
            write_transfer_outputs(&outcome, &args.out)?;
            let row = &outcome.report.rows[0];
            println!(
                "{}: mean ICR {:.2}, ASR@1 {:.2}%",
                row.model,
                row.mean_icr,
                row.asr.first().map(|(_, v)| v * 100.0).unwrap_or(f64::NAN)
            );
            Ok(())
        }
        Command::Eval(args) => {
            let spec = resolve_spec(&args)?;
            prepare_out_dir(&args.out, &spec)?;
            let outcome = run_transfer(&spec)?;
            write_transfer_outputs(&outcome, &args.out)?;
            for row in &outcome.report.rows {
                println!("{}: mean ICR {:.2}", row.model, row.mean_icr);
            }
            Ok(())
        }
        Command::SweepAlphaT(args) => {
            let spec = resolve_spec(&args.common)?;
            prepare_out_dir(&args.common.out, &spec)?;
            let grid = run_alpha_t_sweep(&spec, &args.alphas, &args.ts)?;
            fs::write(
                args.common.out.join("sweep.json"),
                serde_json::to_string_pretty(&grid)?,
            )?;
            let mut csv = String::from("alpha,steps,model,mean_icr,asr_at_1\n");
            for cell in &grid.cells {
                for row in &cell.report.rows {
                    csv.push_str(&format!(
                        "{:.6},{},{},{:.4},{:.4}\n",
                        cell.alpha,
                        cell.steps,
                        row.model,
                        row.mean_icr,
                        row.asr.first().map(|(_, v)| *v).unwrap_or(f64::NAN),
                    ));
                }
            }
            fs::write(args.common.out.join("sweep.csv"), csv)?;
            println!("swept {} cells", grid.cells.len());
            Ok(())
        }
        Command::SweepTemp(args) => {
            let spec = resolve_spec(&args.common)?;
            prepare_out_dir(&args.common.out, &spec)?;
            let sweep = run_temperature_sweep(&spec, &args.temps)?;
            fs::write(
                args.common.out.join("temperature_sweep.json"),
                serde_json::to_string_pretty(&sweep)?,
            )?;
            let mut csv = String::from("loss,white_box_mean_icr\n");
            for row in &sweep.rows {
                csv.push_str(&format!("{},{:.4}\n", row.label, row.white_box_mean_icr));
                println!("{}: {:.2}", row.label, row.white_box_mean_icr);
            }
            fs::write(args.common.out.join("temperature_sweep.csv"), csv)?;
            Ok(())
        }
        Command::ProbeZerosum(args) => {
            let spec = resolve_spec(&args.common)?;
            let mut probe = ZeroSumProbeSpec::desk_default(spec.seed);
            probe.dataset = spec.dataset.clone();
            probe.attack = spec.attack.clone();
            probe.w_values = args.w_values.clone();
            if !args.arch.is_empty() {
                probe.architectures = args.arch.clone();
            }
            if !args.inits.is_empty() {
                probe.init_schemes = args
                    .inits
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        parse::parse_init(s, derive_seed(spec.seed, 40 + i as u64))
                            .map_err(CliError::Usage)
                    })
                    .collect::<Result<_, _>>()?;
            }
            if !args.imbalance.is_empty() {
                probe.imbalance = args
                    .imbalance
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        parse::parse_imbalance(s, derive_seed(spec.seed, 60 + i as u64))
                            .map_err(CliError::Usage)
                    })
                    .collect::<Result<_, _>>()?;
            }
            fs::create_dir_all(&args.common.out)?;
            fs::write(
                args.common.out.join("resolved_spec.json"),
                serde_json::to_string_pretty(&probe)?,
            )?;
            let report = run_zero_sum_probe(&probe)?;
            fs::write(
                args.common.out.join("zerosum.json"),
                serde_json::to_string_pretty(&report)?,
            )?;
            let mut csv = String::from(
                "architecture,init,imbalance,accuracy,clean_sum,clean_abs_sum,clean_ratio,adv_sum,adv_abs_sum,adv_ratio\n",
            );
            for row in &report.rows {
                csv.push_str(&format!(
                    "{},{},{},{:.4},{:.4},{:.4},{:.6},{:.4},{:.4},{:.6}\n",
                    row.architecture,
                    row.init,
                    row.imbalance,
                    row.accuracy,
                    row.clean.sum.mean,
                    row.clean.abs_sum.mean,
                    row.clean.sum_ratio(),
                    row.adversarial.sum.mean,
                    row.adversarial.abs_sum.mean,
                    row.adversarial.sum_ratio(),
                ));
                println!(
                    "{} {} {}: clean ratio {:.4}, adversarial ratio {:.4}",
                    row.architecture,
                    row.init,
                    row.imbalance,
                    row.clean.sum_ratio(),
                    row.adversarial.sum_ratio()
                );
            }
            fs::write(args.common.out.join("zerosum.csv"), csv)?;
            let mut curves = String::from("w,epoch,holdout_mean_logit_sum\n");
            for curve in &report.w_curves {
                for (epoch, value) in curve.epoch_mean_logit_sum.iter().enumerate() {
                    curves.push_str(&format!("{},{},{:.6}\n", curve.w, epoch + 1, value));
                }
            }
            fs::write(args.common.out.join("wcurves.csv"), curves)?;
            Ok(())
        }
        Command::Robustness(args) => {
            let spec = resolve_spec(&args.common)?;
            prepare_out_dir(&args.common.out, &spec)?;
            let transforms: Vec<TransformSpec> = args
                .transforms
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    parse::parse_transform(s, derive_seed(spec.seed, 80 + i as u64))
                        .map_err(CliError::Usage)
                })
                .collect::<Result<_, _>>()?;
            let table = run_transform_robustness(&spec, &transforms)?;
            fs::write(
                args.common.out.join("robustness.json"),
                serde_json::to_string_pretty(&table)?,
            )?;
            let mut csv = String::from("transform,mean_icr\n");
            for row in &table.rows {
                csv.push_str(&format!("{},{:.4}\n", row.transform, row.mean_icr));
                println!("{}: {:.2}", row.transform, row.mean_icr);
            }
            fs::write(args.common.out.join("robustness.csv"), csv)?;
            Ok(())
        }
    }
}
