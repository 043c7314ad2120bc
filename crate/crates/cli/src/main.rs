//! `qchaos`: run the toolkit's experiments from the command line.
//!
//! Each subcommand builds one experiment configuration, runs it through
//! the library, and emits the resulting table as CSV (default) or JSON,
//! to stdout or to `--out`. Alternatively `--config FILE` runs a full
//! experiment request from a JSON document. Every run is stamped with
//! its seed and config hash, and identical seed plus config reproduces
//! identical data rows.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 numerical
//! failure, 4 I/O failure.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qchaos::dqc1::{ScalingConfig, ShotMode, ShotSchedule};
use qchaos::ensembles::Ensemble;
use qchaos::error::Error;
use qchaos::experiments::{
    default_spin_grid, run_dqc1, run_ensemble_convergence, run_kicked_top_scan,
    run_resource_scaling, run_transition, run_walk, Dqc1RunConfig, Dqc1Source,
    EnsembleConvergenceConfig, ExperimentConfig, KickedTopScanConfig, OutputFormat, ResultTable,
    TopRegime, TransitionConfig, WalkConfig,
};
use qchaos::spectral::Beta;

#[derive(Parser)]
#[command(
    name = "qchaos",
    version,
    about = "Spectral form factors, ergodic hypothesis tests, and DQC1 trace estimation",
    subcommand_negates_reqs = true
)]
struct Cli {
    /// Run a complete experiment request from a JSON config file.
    #[arg(long, required = true)]
    config: Option<PathBuf>,

    /// Master seed override when running from --config.
    #[arg(long)]
    seed: Option<u64>,

    /// Output file override when running from --config.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format override when running from --config.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct OutputArgs {
    /// Master seed; all random streams derive from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output encoding.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RegimeArg {
    Regular,
    Chaotic,
}

impl From<RegimeArg> for TopRegime {
    fn from(value: RegimeArg) -> Self {
        match value {
            RegimeArg::Regular => TopRegime::Regular,
            RegimeArg::Chaotic => TopRegime::Chaotic,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EnsembleArg {
    Poisson,
    Cue,
    Coe,
    Cse,
}

impl From<EnsembleArg> for Ensemble {
    fn from(value: EnsembleArg) -> Self {
        match value {
            EnsembleArg::Poisson => Ensemble::Poisson,
            EnsembleArg::Cue => Ensemble::Cue,
            EnsembleArg::Coe => Ensemble::Coe,
            EnsembleArg::Cse => Ensemble::Cse,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Ergodic-average convergence over a random-matrix ensemble.
    Ensemble {
        #[command(flatten)]
        output: OutputArgs,

        /// Symmetry class: 0 (Poisson), 1 (COE), 2 (CUE) or 4 (CSE).
        #[arg(long, default_value_t = 2)]
        beta: u8,

        /// Matrix size (level count; doublet count for beta 4).
        #[arg(long, default_value_t = 600)]
        dim: usize,

        /// Number of ensemble samples.
        #[arg(long, default_value_t = 50)]
        samples: u32,

        /// Largest averaging window.
        #[arg(long, default_value_t = 30)]
        delta_n: u32,
    },

    /// Hypothesis statistics of one kicked-top regime across spins.
    Kickedtop {
        #[command(flatten)]
        output: OutputArgs,

        #[arg(long, value_enum, default_value_t = RegimeArg::Regular)]
        regime: RegimeArg,

        /// Spin values to scan; defaults to 10,20,..,250.
        #[arg(long, value_delimiter = ',')]
        j: Vec<f64>,

        /// Averaging window for the tabulated statistics.
        #[arg(long, default_value_t = 30)]
        delta_n: u32,
    },

    /// Eigenphase walks of the regular and chaotic reference tops.
    Walk {
        #[command(flatten)]
        output: OutputArgs,

        /// Spin of both tops.
        #[arg(long, default_value_t = 20.0)]
        j: f64,
    },

    /// t0 along the interpolation from the regular to the chaotic top.
    Transition {
        #[command(flatten)]
        output: OutputArgs,

        /// Spin values, one t0 column each.
        #[arg(long, value_delimiter = ',', default_values_t = [50.0, 100.0, 200.0])]
        j: Vec<f64>,

        /// Interpolation grid intervals: eps = 0, 1/steps, .., 1.
        #[arg(long, default_value_t = 20)]
        eps_steps: u32,

        #[arg(long, default_value_t = 30)]
        delta_n: u32,
    },

    /// DQC1 trace estimates for powers of one unitary.
    Dqc1 {
        #[command(flatten)]
        output: OutputArgs,

        /// Sample the unitary from this ensemble (with --dim).
        #[arg(long, value_enum, group = "source")]
        ensemble: Option<EnsembleArg>,

        /// Dimension of the sampled ensemble matrix.
        #[arg(long, default_value_t = 256)]
        dim: usize,

        /// Use a kicked-top Floquet operator (with --j) instead.
        #[arg(long, value_enum, group = "source")]
        regime: Option<RegimeArg>,

        /// Spin of the kicked top source.
        #[arg(long, default_value_t = 20.0)]
        j: f64,

        /// Load the unitary from a matrix JSON file instead.
        #[arg(long, group = "source")]
        matrix: Option<PathBuf>,

        /// Estimate powers 1..=n-max.
        #[arg(long, default_value_t = 30)]
        n_max: u32,

        /// Shots per estimate, split between the two settings.
        #[arg(long, default_value_t = 4096)]
        shots: u64,

        /// Compute exact expectations instead of sampling shots.
        #[arg(long)]
        analytic: bool,

        /// Polarization of the clean qubit.
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
    },

    /// Shot-budget scaling study of the discrimination error.
    Scaling {
        #[command(flatten)]
        output: OutputArgs,

        /// System sizes, each a power of 2.
        #[arg(long, value_delimiter = ',', default_values_t = [64, 256, 1024])]
        sizes: Vec<usize>,

        /// Trials per ensemble per size.
        #[arg(long, default_value_t = 100)]
        trials: u32,

        #[arg(long, default_value_t = 10)]
        delta_n: u32,

        /// Shot schedule, repeatable: 'analytic', 'constant:S' or
        /// 'per-dim:F'; defaults to constant:256 and per-dim:64.
        #[arg(long = "schedule", value_parser = parse_schedule)]
        schedules: Vec<ShotSchedule>,

        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
    },
}

fn parse_schedule(s: &str) -> Result<ShotSchedule, String> {
    if s == "analytic" {
        return Ok(ShotSchedule::Analytic);
    }
    let parse_count = |v: &str, what: &str| {
        v.parse::<u64>().map_err(|_| format!("bad {what} in schedule '{s}'"))
    };
    if let Some(v) = s.strip_prefix("constant:") {
        return Ok(ShotSchedule::Constant(parse_count(v, "shot count")?));
    }
    if let Some(v) = s.strip_prefix("per-dim:") {
        return Ok(ShotSchedule::PerDim(parse_count(v, "factor")?));
    }
    Err(format!("unknown schedule '{s}'; expected analytic, constant:S or per-dim:F"))
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}

/// Maps library errors onto the documented exit codes.
fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter(_)
        | Error::Dimension(_)
        | Error::Window(_)
        | Error::Parse(_) => 2,
        Error::Eigen(_) | Error::NotUnitary { .. } => 3,
        Error::Io(_) => 4,
    }
}

fn run(cli: Cli) -> qchaos::Result<()> {
    if cli.command.is_some()
        && (cli.config.is_some() || cli.seed.is_some() || cli.out.is_some() || cli.format.is_some())
    {
        return Err(Error::InvalidParameter(
            "--config, --seed, --out and --format before a subcommand conflict with it; \
             pass them after the subcommand instead"
                .into(),
        ));
    }
    match cli.command {
        Some(command) => run_subcommand(command),
        None => run_config_file(cli),
    }
}

fn run_config_file(cli: Cli) -> qchaos::Result<()> {
    let path = cli.config.expect("clap requires --config without a subcommand");
    let body = std::fs::read_to_string(&path)?;
    let mut request = ExperimentConfig::from_json(&body)?;
    if let Some(seed) = cli.seed {
        request.master_seed = Some(seed);
    }
    let table = request.run()?;
    let out = cli.out.or(request.output_path);
    let format = cli
        .format
        .map(OutputFormat::from)
        .or(request.output_format)
        .unwrap_or(OutputFormat::Csv);
    emit(&table, out.as_deref(), format)
}

fn run_subcommand(command: Command) -> qchaos::Result<()> {
    let (table, output) = match command {
        Command::Ensemble { output, beta, dim, samples, delta_n } => {
            let config = EnsembleConvergenceConfig {
                beta: Beta::from_index(beta)?,
                dim,
                samples,
                delta_n_max: delta_n,
                master_seed: output.seed,
            };
            (run_ensemble_convergence(&config)?, output)
        }
        Command::Kickedtop { output, regime, j, delta_n } => {
            let config = KickedTopScanConfig {
                regime: regime.into(),
                j_list: if j.is_empty() { default_spin_grid() } else { j },
                delta_n,
                master_seed: output.seed,
            };
            (run_kicked_top_scan(&config)?, output)
        }
        Command::Walk { output, j } => {
            let config = WalkConfig { j, master_seed: output.seed };
            (run_walk(&config)?, output)
        }
        Command::Transition { output, j, eps_steps, delta_n } => {
            let config =
                TransitionConfig { j_list: j, eps_steps, delta_n, master_seed: output.seed };
            (run_transition(&config)?, output)
        }
        Command::Dqc1 {
            output,
            ensemble,
            dim,
            regime,
            j,
            matrix,
            n_max,
            shots,
            analytic,
            epsilon,
        } => {
            let source = if let Some(path) = matrix {
                Dqc1Source::MatrixFile { path }
            } else if let Some(regime) = regime {
                Dqc1Source::KickedTop { regime: regime.into(), j }
            } else {
                let ensemble = ensemble.map(Ensemble::from).unwrap_or(Ensemble::Cue);
                Dqc1Source::Ensemble { ensemble, dim }
            };
            if n_max < 1 {
                return Err(Error::InvalidParameter("n-max must be at least 1".into()));
            }
            let config = Dqc1RunConfig {
                source,
                n_list: (1..=n_max).collect(),
                shots: if analytic { ShotMode::Analytic } else { ShotMode::Shots(shots) },
                epsilon,
                master_seed: output.seed,
            };
            (run_dqc1(&config)?, output)
        }
        Command::Scaling { output, sizes, trials, delta_n, schedules, epsilon } => {
            let config = ScalingConfig {
                sizes,
                trials,
                delta_n,
                schedules: if schedules.is_empty() {
                    vec![ShotSchedule::Constant(256), ShotSchedule::PerDim(64)]
                } else {
                    schedules
                },
                epsilon,
                master_seed: output.seed,
            };
            (run_resource_scaling(&config)?, output)
        }
    };
    emit(&table, output.out.as_deref(), output.format.into())
}

fn emit(table: &ResultTable, out: Option<&std::path::Path>, format: OutputFormat) -> qchaos::Result<()> {
    match out {
        Some(path) => table.write_to_file(path, format),
        None => {
            print!("{}", table.render(format));
            Ok(())
        }
    }
}
