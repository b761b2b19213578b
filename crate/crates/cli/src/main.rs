use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qoeshare::config::{load_config, Deployment, PolicyMode, SystemConfig};
use qoeshare::harness::{emit_plot, run_figure_sweep, run_single, Family, PlotSpec, ScenarioSpec};
use qoeshare::queueing::{p_succ, pooling_gain, QueueParams};

#[derive(Parser)]
#[command(name = "qoeshare", version, about = "Cross-operator timeslot sharing simulator")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "QOESHARE_OUT", default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one deployment from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run an experiment family and write its CSVs and plots.
    Sweep {
        /// arrival-imbalance, channel-heterogeneity, quality-scaling,
        /// coverage-imbalance, approx-comparison, correlated-delayed, multi-region
        family: Family,
        /// Base config; only its global settings are used, clients come from the family.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Delay of the delayed arm in the correlated-delayed family.
        #[arg(long, default_value_t = 1)]
        delay: usize,
        /// Periods per run.
        #[arg(long)]
        horizon: Option<usize>,
        /// Run jobs on the calling thread only.
        #[arg(long)]
        sequential: bool,
    },
    /// Deadline-success probabilities and pooling gain of M/M/1 queues with impatient customers.
    Analytic {
        #[arg(long, value_delimiter = ',', default_value = "1")]
        mu: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.7,0.9")]
        rho: Vec<f64>,
        #[arg(long, default_value_t = 5.0)]
        d_max: f64,
        #[arg(long, default_value_t = 0.1)]
        d_step: f64,
    },
    /// Render a CSV file as an SVG line plot.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Column splitting rows into separate lines.
        #[arg(long)]
        series: Option<String>,
        #[arg(long)]
        title: Option<String>,
        /// File name inside the output directory.
        #[arg(long, default_value = "plot.svg")]
        name: String,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Staleness of debts in periods for `--mode delayed`.
    #[arg(long)]
    delay: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sharing,
    NoSharing,
    Approx,
    Delayed,
}

fn read_config(path: &Path) -> Result<Deployment> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_config(&text).with_context(|| format!("parsing {}", path.display()))
}

fn apply(d: &mut Deployment, o: &Overrides) -> Result<()> {
    if let Some(seed) = o.seed {
        d.config.master_seed = seed;
    }
    if let Some(k) = o.horizon {
        d.config.horizon = k;
    }
    let configured_delay = match d.config.policy_mode {
        PolicyMode::SharingDelayed(k) => k,
        _ => 1,
    };
    match (o.mode, o.delay) {
        (Some(Mode::Sharing), _) => d.config.policy_mode = PolicyMode::Sharing,
        (Some(Mode::NoSharing), _) => d.config.policy_mode = PolicyMode::NoSharing,
        (Some(Mode::Approx), _) => d.config.policy_mode = PolicyMode::SharingApprox,
        (Some(Mode::Delayed), delay) => d.config.policy_mode = PolicyMode::SharingDelayed(delay.unwrap_or(configured_delay)),
        (None, Some(delay)) => match d.config.policy_mode {
            PolicyMode::SharingDelayed(_) => d.config.policy_mode = PolicyMode::SharingDelayed(delay),
            _ => bail!("--delay needs --mode delayed or a delayed config"),
        },
        (None, None) => {}
    }
    Ok(())
}

fn run(config: &Path, overrides: &Overrides, out: &Path) -> Result<()> {
    let mut d = read_config(config)?;
    apply(&mut d, overrides)?;
    let ledger = run_single(&d, out)?;
    let failures = (0..d.clients.len()).filter(|&n| !ledger.delivery_passes(&d, n)).count();
    println!("mode {}", d.config.policy_mode.label());
    println!("total QoE {:.6}", ledger.total_qoe());
    println!("clients below delivery requirement {failures}/{}", d.clients.len());
    println!("max debt / K {:.6}", ledger.final_debt_ratio());
    println!("wrote {}", out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    family: Family,
    config: Option<&Path>,
    seed: Option<u64>,
    reps: usize,
    delay: usize,
    horizon: Option<usize>,
    sequential: bool,
    out: &Path,
) -> Result<()> {
    let mut base = match config {
        Some(p) => read_config(p)?.config,
        None => SystemConfig::new(2, 2),
    };
    if let Some(k) = horizon {
        base.horizon = k;
    }
    let mut spec = ScenarioSpec::new(family);
    spec.replications = reps;
    spec.delay = delay;
    spec.base_seed = seed.unwrap_or(base.master_seed);
    if sequential {
        spec.execution = qoeshare::parallel::Execution::Sequential;
    }
    let (res, artifacts) = run_figure_sweep(&spec, &base, out)?;
    for (a, mode) in res.arms.iter().enumerate().take(res.arms.len() - 1) {
        let imp = res.mean_improvements(a);
        let row: Vec<String> = res.points.iter().zip(&imp).map(|(p, v)| format!("{:.3}:{v:.2}%", p.x)).collect();
        println!("{} {}", mode.label(), row.join(" "));
    }
    let blowups = res.runs.iter().flat_map(|r| &r.arms).filter(|a| a.debt_blowup()).count();
    if blowups > 0 {
        println!("warning: {blowups} runs ended with debt above 0.1 K (likely infeasible)");
    }
    for p in artifacts.csv.iter().chain(&artifacts.plots) {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn analytic(mu: &[f64], rho: &[f64], d_max: f64, d_step: f64, out: &Path) -> Result<()> {
    if !(d_step > 0.0 && d_max >= d_step) {
        bail!("need 0 < --d-step <= --d-max");
    }
    std::fs::create_dir_all(out)?;
    let path = out.join("analytic.csv");
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(w, "service_rate,intensity,deadline,p_succ,p_succ_pooled,pooling_gain,series")?;
    let steps = (d_max / d_step + 1e-9).floor() as usize;
    for &m in mu {
        for &r in rho {
            for k in 1..=steps {
                let dl = k as f64 * d_step;
                let q = QueueParams::new(m, r, dl);
                let pooled = QueueParams::new(2.0 * m, r, dl);
                writeln!(
                    w,
                    "{m},{r},{dl},{},{},{},mu={m} rho={r}",
                    p_succ(&q)?,
                    p_succ(&pooled)?,
                    pooling_gain(&q)?
                )?;
            }
        }
    }
    w.flush()?;
    drop(w);
    let plot = out.join("analytic.svg");
    emit_plot(
        &path,
        &PlotSpec::new("gain from pooling two queues", "deadline", "pooling_gain")
            .series("series")
            .labels("deadline D (time units)", "relative gain in deadline success"),
        &plot,
    )?;
    println!("wrote {}", path.display());
    println!("wrote {}", plot.display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { config, overrides } => run(config, overrides, &cli.out),
        Command::Sweep {
            family,
            config,
            seed,
            reps,
            delay,
            horizon,
            sequential,
        } => sweep(*family, config.as_deref(), *seed, *reps, *delay, *horizon, *sequential, &cli.out),
        Command::Analytic { mu, rho, d_max, d_step } => analytic(mu, rho, *d_max, *d_step, &cli.out),
        Command::Plot {
            csv,
            x,
            y,
            series,
            title,
            name,
        } => {
            let mut spec = PlotSpec::new(title.as_deref().unwrap_or(y), x, y);
            if let Some(s) = series {
                spec = spec.series(s);
            }
            std::fs::create_dir_all(&cli.out)?;
            let path = cli.out.join(name);
            emit_plot(csv, &spec, &path)?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}
