use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mqh_analytics::ReportOptions;
use mqh_calibration::{Baseline, CalibrationOptions, IsFitOptions};
use mqh_cli::*;
use mqh_io::{ClassifyOptions, RunConfig};

#[derive(Parser)]
#[command(name = "mqh", version, about = "Meta-queue Hawkes order book experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Run configuration JSON; the built-in reference configuration if absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; defaults to $MQH_OUT_ROOT/<command>.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated seconds per run.
    #[arg(long)]
    horizon: Option<f64>,
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Event log written by `simulate`.
    #[arg(long, conflicts_with_all = ["message", "orderbook"])]
    log: Option<PathBuf>,
    /// LOBSTER message file.
    #[arg(long, requires = "orderbook")]
    message: Option<PathBuf>,
    /// LOBSTER orderbook file.
    #[arg(long, requires = "message")]
    orderbook: Option<PathBuf>,
    /// Tick size in currency (LOBSTER input).
    #[arg(long, default_value_t = 0.01)]
    tick_size: f64,
    /// Half depth M in ticks (LOBSTER input).
    #[arg(long, default_value_t = 60)]
    m_half_depth: i64,
    /// Keep messages outside 9:30-16:00.
    #[arg(long)]
    all_day: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// One run: event log, snapshots, summary and metric report.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Runs from several initial spreads and deep widths.
    Ergodicity {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [5, 55, 105])]
        s0: Vec<i64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.5, 0.95])]
        m0: Vec<f64>,
        #[arg(long, default_value_t = 1000.0)]
        burn_in: f64,
        #[arg(long, default_value_t = 100.0)]
        bucket: f64,
        /// Seconds between m_D samples in the KS tests; chosen from the
        /// autocorrelation of m_D when absent.
        #[arg(long)]
        ks_spacing: Option<f64>,
    },
    /// Tick-size regime over an (alpha, beta) grid.
    PhaseDiagram {
        #[command(flatten)]
        run: RunArgs,
        /// Points per axis of the default grid.
        #[arg(long, default_value_t = 5)]
        grid: usize,
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        #[arg(long, default_value_t = 3)]
        seeds: usize,
        /// Skip the calibrated asset points.
        #[arg(long)]
        no_overlay: bool,
    },
    /// Scaling exponents of stylized facts against the relative tick size.
    Scaling {
        #[command(flatten)]
        run: RunArgs,
        /// Alpha values of a product grid; the config's when only other lists are given.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        /// Beta values of a product grid.
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        /// Offset parameters of a product grid.
        #[arg(long, value_delimiter = ',')]
        etas: Option<Vec<f64>>,
        /// Explicit points `alpha:beta:eta`. Without any grid flag the
        /// calibrated medium/small tick path is used.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["alphas", "betas", "etas"])]
        points: Option<Vec<String>>,
        #[arg(long, default_value_t = 3)]
        seeds: usize,
    },
    /// Stylized-fact report of an event log or LOBSTER pair.
    Report {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "data")]
        label: String,
    },
    /// Parameter estimates and a run-config fragment.
    Calibrate {
        #[command(flatten)]
        input: InputArgs,
        /// Spec whose baseline and kernels give the in-spread baseline.
        #[arg(long, conflicts_with = "lambda0")]
        config: Option<PathBuf>,
        /// Fixed per-side in-spread baseline rate.
        #[arg(long)]
        lambda0: Option<f64>,
        #[arg(long, default_value_t = 100)]
        min_obs: usize,
        /// Also fit kernel norms.
        #[arg(long)]
        kernels: bool,
        #[arg(long, default_value_t = 0.05)]
        kernel_bin: f64,
        #[arg(long, default_value_t = 8)]
        kernel_lags: usize,
        #[arg(long, default_value_t = 1e-8)]
        ridge: f64,
    },
}

fn out_dir(out: &Option<PathBuf>, name: &str) -> PathBuf {
    out.clone().unwrap_or_else(|| {
        PathBuf::from(std::env::var("MQH_OUT_ROOT").unwrap_or_else(|_| "results".into())).join(name)
    })
}

fn config(run: &RunArgs) -> Result<RunConfig> {
    let mut cfg = load_config(run.config.as_deref())?;
    apply_overrides(&mut cfg, run.seed, run.horizon);
    cfg.resolve()?;
    Ok(cfg)
}

fn input(args: &InputArgs) -> Result<Input> {
    match (&args.log, &args.message, &args.orderbook) {
        (Some(p), None, None) => Ok(Input::Log(p.clone())),
        (None, Some(m), Some(b)) => {
            let mut options = ClassifyOptions::new(args.tick_size, args.m_half_depth);
            if args.all_day {
                options.session = None;
            }
            Ok(Input::Lobster { message: m.clone(), orderbook: b.clone(), options })
        }
        _ => Err(CliError::Usage("give --log FILE or --message FILE --orderbook FILE".into())),
    }
}

fn parse_points(items: &[String]) -> Result<Vec<(f64, f64, f64)>> {
    items
        .iter()
        .map(|it| {
            let v: Vec<f64> = it.split(':').map(|x| x.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| {
                CliError::Usage(format!("bad point {it:?}, expected alpha:beta:eta"))
            })?;
            match v[..] {
                [a, b, e] => Ok((a, b, e)),
                _ => Err(CliError::Usage(format!("bad point {it:?}, expected alpha:beta:eta"))),
            }
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { run } => {
            let cfg = config(&run)?;
            let s = cmd_simulate(&cfg, &out_dir(&run.out, "simulate"))?;
            println!("seed {} horizon {} s: {} events, mean spread {:.3} ticks", s.seed, s.horizon, s.events, s.mean_spread);
            for (k, v) in &s.counts {
                println!("  {k:<10} {v}");
            }
        }
        Command::Ergodicity { run, s0, m0, burn_in, bucket, ks_spacing } => {
            let cfg = config(&run)?;
            let opts = ErgodicityOptions { s0, m0, burn_in, bucket, ks_spacing, jobs: run.jobs };
            let r = cmd_ergodicity(&cfg, &opts, &out_dir(&run.out, "ergodicity"))?;
            for x in &r.runs {
                println!("s0 {:>4} m0 {:<5} long-run mean spread {:.3}", x.s0, x.m0, x.long_run_mean_spread);
            }
            if let Some(v) = r.spread_relative_range {
                println!("relative range of long-run means: {v:.4}");
            }
            if let Some(p) = r.min_ks_p_value {
                println!("smallest KS p-value on m_D: {p:.4} (samples every {} s)", r.ks_spacing);
            }
        }
        Command::PhaseDiagram { run, grid, alphas, betas, seeds, no_overlay } => {
            let cfg = config(&run)?;
            let mut opts = PhaseOptions::default_grid(grid);
            if grid == 0 && (alphas.is_none() || betas.is_none()) {
                return Err(CliError::Usage("empty grid".into()));
            }
            if let Some(a) = alphas {
                opts.alphas = a;
            }
            if let Some(b) = betas {
                opts.betas = b;
            }
            opts.seeds = seeds;
            opts.overlay = !no_overlay;
            opts.jobs = run.jobs;
            let r = cmd_phase_diagram(&cfg, &opts, &out_dir(&run.out, "phase-diagram"))?;
            for (b, rho) in &r.row_spearman {
                println!("beta {b:.3}: spearman(alpha, spread) = {}", rho.map(|v| format!("{v:.3}")).unwrap_or("-".into()));
            }
            for p in &r.overlay {
                println!("{:<5} alpha {:<7} beta {:<5} -> {:?}", p.asset, p.alpha, p.beta, p.regime);
            }
        }
        Command::Scaling { run, alphas, betas, etas, points, seeds } => {
            let cfg = config(&run)?;
            let eta0 = match &cfg.handlers {
                mqh_io::HandlersConfig::Standard { eta, .. } => eta[0],
                mqh_io::HandlersConfig::Full(_) => f64::NAN,
            };
            let mut opts = if let Some(p) = points {
                ScalingOptions { points: parse_points(&p)?, seeds: 1, jobs: 0 }
            } else if alphas.is_none() && betas.is_none() && etas.is_none() {
                ScalingOptions::calibrated_path()
            } else {
                ScalingOptions::product(
                    &alphas.unwrap_or_else(|| vec![cfg.hawkes.is_alpha]),
                    &betas.unwrap_or_else(|| vec![cfg.hawkes.is_beta]),
                    &etas.unwrap_or_else(|| vec![eta0]),
                )
            };
            opts.seeds = seeds;
            opts.jobs = run.jobs;
            let r = cmd_scaling(&cfg, &opts, &out_dir(&run.out, "scaling"))?;
            for s in &r.slopes {
                println!(
                    "{:<20} slope {:+.3} (r2 {:.3}, n {})  reference {:+.2} / {:+.2}",
                    s.metric, s.fit.slope, s.fit.r2, s.fit.n, s.reference_simulated, s.reference_empirical
                );
            }
            if let Some(rho) = r.sparsity_spearman {
                println!("spearman(epsilon, wasserstein) = {rho:.3}");
            }
        }
        Command::Report { input: args, label } => {
            let inp = input(&args)?;
            let r = cmd_report(&inp, &label, &ReportOptions::default(), &out_dir(&args.out, "report"))?;
            println!("{}: {} events, mean spread {:.3} ticks, regime {:?}", r.label, r.n_events, r.mean_spread, r.regime);
        }
        Command::Calibrate { input: args, config, lambda0, min_obs, kernels, kernel_bin, kernel_lags, ridge } => {
            let inp = input(&args)?;
            let baseline = match (lambda0, config) {
                (Some(l), _) => Baseline::Given(l),
                (None, path) => Baseline::FromSpec(Box::new(load_config(path.as_deref())?.hawkes.to_spec()?)),
            };
            let opts = CalibrationOptions {
                is_fit: IsFitOptions::new(baseline),
                min_obs,
                kernels: kernels.then_some((kernel_bin, kernel_lags, ridge)),
            };
            let r = cmd_calibrate(&inp, &opts, &out_dir(&args.out, "calibrate"))?;
            match (r.alpha, r.beta) {
                (Some(a), Some(b)) => println!("alpha {a:.4} beta {b:.4}"),
                _ => println!("in-spread power law not identified: {}", r.is_fit_error.as_deref().unwrap_or("-")),
            }
            for (name, f) in [("eta_IS", &r.eta.eta_is), ("eta_T", &r.eta.eta_t), ("eta_T+1", &r.eta.eta_t1)] {
                println!("{name:<8} {}", f.p().map(|p| format!("{p:.4}")).unwrap_or("-".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
