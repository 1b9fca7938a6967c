use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nbsamp::harness::{
    emit_csv, emit_plotdata, point_recovery_config, selftest, sweep, trial_frame, Axis, ExperimentSpec, Method,
};
use nbsamp::observation::{build_observation, channel_eigenvalues, measure, to_frequency};
use nbsamp::recovery::{bit_errors, demodulate, ls_recover, refine_support};
use nbsamp::Error;

const EXIT_INVALID: u8 = 1;
const EXIT_PROPERTY: u8 = 2;
const EXIT_IO: u8 = 3;

/// Narrowband signal recovery under ZP-OFDM interference: single-frame
/// recovery, Monte-Carlo sweeps and a reduced-size self test.
///
/// Exit codes: 0 success, 1 invalid spec or arguments, 2 property failure, 3 I/O failure.
#[derive(Parser, Debug)]
#[command(name = "nbsamp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize one frame, recover its support and print diagnostics.
    Recover(RecoverArgs),
    /// Run a Monte-Carlo sweep and write metrics.csv plus plot data.
    Sweep(SweepArgs),
    /// Run the invariant suite at N=32, v=8, L=3.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Operating-point overrides shared by `recover` and `sweep`.
#[derive(Args, Debug)]
struct PointArgs {
    /// Experiment spec (TOML); flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    snr: Option<f64>,
    #[arg(long)]
    sir: Option<f64>,
    /// Occupied narrowband subcarriers (1, 3, 6 or 12).
    #[arg(long)]
    sparsity: Option<usize>,
    /// Give the recovery the true number of occupied subcarriers.
    #[arg(long)]
    known_sparsity: bool,
    /// Pursuit repetitions per outer iteration.
    #[arg(long)]
    r_max: Option<usize>,
    /// Outer iterations.
    #[arg(long)]
    i_max: Option<usize>,
}

#[derive(Args, Debug)]
struct RecoverArgs {
    #[command(flatten)]
    point: PointArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Trial index whose frame is drawn.
    #[arg(long, default_value_t = 0)]
    trial: usize,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Master seed.
    #[arg(long)]
    seed: u64,
    /// Trials per axis value.
    #[arg(long)]
    trials: usize,
    /// Swept parameter: snr, sir, sparsity or r_max.
    #[arg(long)]
    axis: Axis,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated axis values; defaults to the config file or a standard grid.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    /// Comma-separated methods: proposed, classic-samp, cws, genie.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn default_values(axis: Axis) -> Vec<f64> {
    match axis {
        Axis::Snr => vec![5.0, 10.0, 15.0, 20.0, 25.0],
        Axis::Sir => vec![0.0, 5.0, 10.0, 15.0, 20.0],
        Axis::Sparsity => vec![1.0, 3.0, 6.0, 12.0],
        Axis::RMax => vec![5.0, 10.0, 20.0, 30.0, 40.0, 50.0],
    }
}

fn base_spec(config: Option<&Path>, axis: Axis) -> nbsamp::Result<ExperimentSpec> {
    match config {
        Some(path) => ExperimentSpec::load(path),
        None => ExperimentSpec::from_toml_str(&format!("axis = \"{}\"\naxis_values = [0.0]\n", axis.name())),
    }
}

fn apply_point(spec: &mut ExperimentSpec, p: &PointArgs) {
    if let Some(v) = p.snr {
        spec.fixed.snr_db = v;
    }
    if let Some(v) = p.sir {
        spec.fixed.sir_db = v;
    }
    if let Some(v) = p.sparsity {
        spec.fixed.sparsity = v;
    }
    if p.known_sparsity {
        spec.fixed.sparsity_known = true;
    }
    if let Some(v) = p.r_max {
        spec.recovery.r_max = v;
    }
    if let Some(v) = p.i_max {
        spec.recovery.i_max = v;
    }
}

fn one_based(s: &[usize]) -> String {
    let v: Vec<String> = s.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", v.join(", "))
}

fn run_recover(args: &RecoverArgs) -> nbsamp::Result<()> {
    let mut spec = base_spec(args.point.config.as_deref(), Axis::Snr)?;
    let from_file = args.point.config.is_some();
    apply_point(&mut spec, &args.point);
    spec.master_seed = args.seed;
    spec.axis = Axis::Snr;
    spec.axis_values = vec![spec.fixed.snr_db];
    if !from_file {
        spec.methods = vec![Method::Proposed];
    }
    spec.methods.retain(|m| *m != Method::Cws || spec.fixed.sparsity_known);
    spec.validate()?;

    let point = spec.point(spec.fixed.snr_db);
    let Some((seed, frame)) = trial_frame(&spec, &point, args.trial)? else {
        return Err(Error::ChannelDegenerate {
            attempts: nbsamp::harness::MAX_FRAME_ATTEMPTS as usize,
        });
    };
    let dims = &spec.dims;
    let obs = build_observation(&channel_eigenvalues(&frame.cir, dims)?, dims)?;
    let y_freq = to_frequency(&frame.received);
    let y2 = measure(&obs, &y_freq)?.y2;
    let nb = frame.nb();
    let cfg = point_recovery_config(&spec, &point, args.trial);
    let power = frame.power();

    println!("dims              N={} v={} L={}", dims.n_subcarriers, dims.zp_len, dims.cir_len);
    println!("frame seed        {seed}");
    println!(
        "operating point   SNR {} dB, SIR {} dB (measured {:.3} dB, {:.3} dB)",
        point.snr_db, point.sir_db, power.snr_db, power.sir_db
    );
    println!("true support      {} (1-based)", one_based(&nb.sorted_support()));

    let t0 = Instant::now();
    let r = refine_support(&y_freq, &obs, frame.received.noise_var, &cfg)?;
    let elapsed = t0.elapsed();
    let d = &r.diagnostics;
    println!("pursuit tolerance {:.6e}", d.tolerance);
    for (k, it) in d.iterations.iter().enumerate() {
        let mean_res = it.residuals.iter().sum::<f64>() / it.residuals.len().max(1) as f64;
        println!(
            "iteration {:>3}     window {} len {} variance {:.3} accepted {} mean residual {:.3e}",
            k + 1,
            one_based(&it.estimate.sorted()),
            it.estimate.indices.len(),
            it.window_variance,
            it.estimate.accepted,
            mean_res
        );
    }
    println!(
        "pursuit runs      {} ({} cache hits, {} rank drops, {} empty clusters dropped)",
        d.samp_runs, d.cache_hits, d.rank_drops, d.dropped_clusters
    );
    println!("estimate          {} (1-based)", one_based(&r.estimate.sorted()));
    println!("accepted          {}{}", r.estimate.accepted, if d.fallback { " (fallback window)" } else { "" });
    println!("support exact     {}", r.estimate.sorted() == nb.sorted_support());
    let rec = ls_recover(&y2, &obs, &r.estimate.sorted());
    let bits = demodulate(&rec.vector, &nb.support, nb.gain);
    println!("bit errors        {} of {}", bit_errors(&bits, &nb.payload_bits), nb.payload_bits.len());
    println!("wall time         {:.3} s", elapsed.as_secs_f64());
    Ok(())
}

fn run_sweep(args: &SweepArgs) -> nbsamp::Result<()> {
    let mut spec = base_spec(args.point.config.as_deref(), args.axis)?;
    let from_file = args.point.config.is_some();
    apply_point(&mut spec, &args.point);
    spec.master_seed = args.seed;
    spec.trials = args.trials;
    if spec.axis != args.axis || !from_file {
        spec.axis_values = default_values(args.axis);
    }
    spec.axis = args.axis;
    if let Some(v) = &args.values {
        spec.axis_values = v.clone();
    }
    if let Some(m) = &args.methods {
        spec.methods = m.clone();
    }
    spec.validate()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?;
    let t0 = Instant::now();
    let result = pool.install(|| sweep(&spec))?;
    let elapsed = t0.elapsed();

    std::fs::create_dir_all(&args.out).map_err(|e| io_error(&args.out, e))?;
    let spec_path = args.out.join("spec.toml");
    std::fs::write(&spec_path, spec.to_toml_string()).map_err(|e| io_error(&spec_path, e))?;
    let csv_path = args.out.join("metrics.csv");
    emit_csv(&result.table, &csv_path)?;
    let files = emit_plotdata(&result.table, &args.out.join("plot"))?;

    for row in &result.table.rows {
        println!(
            "{:<13} {}={:<6} recovery {:.4} ± {:.4}  ber {:.3e} ± {:.1e}  ({} trials, {} invalid)",
            row.method.name(),
            row.axis.name(),
            row.axis_value,
            row.recovery_prob,
            row.recovery_ci,
            row.ber,
            row.ber_ci,
            row.trials,
            row.invalid_trials
        );
    }
    println!(
        "wrote {} and {} plot files in {:.1} s",
        csv_path.display(),
        files.len(),
        elapsed.as_secs_f64()
    );
    Ok(())
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Csv(_) => EXIT_IO,
        Error::ChannelDegenerate { .. } | Error::SingularChannelBin { .. } | Error::ZeroColumn(_) => EXIT_PROPERTY,
        _ => EXIT_INVALID,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Recover(a) => run_recover(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Selftest { seed } => {
            let report = selftest(*seed);
            println!("{report}");
            return if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_PROPERTY)
            };
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
