use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use boidplaus::dubins::{is_reachable, shortest_dubins_path};
use boidplaus::experiment::{self, comparison_order, BatchResult};
use boidplaus::metrics::{self, format_table};
use boidplaus::{Pose, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "boidplaus", version, about = "Swarm-based plausibilization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo batch for one swarm size.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Swarm size N_b (overrides the config).
        #[arg(long)]
        nb: Option<usize>,
    },
    /// One batch per swarm size, plus a comparison table.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated swarm sizes (overrides the config).
        #[arg(long, value_delimiter = ',')]
        nb: Option<Vec<usize>>,
    },
    /// Shortest Dubins path between two poses and its reachability verdict.
    Dubins {
        /// Start pose as x,y,heading (meters, meters, radians).
        #[arg(long, value_parser = parse_pose, allow_hyphen_values = true)]
        from: Pose,
        /// Target pose as x,y,heading.
        #[arg(long, value_parser = parse_pose, allow_hyphen_values = true)]
        to: Pose,
        /// Turn radius in meters.
        #[arg(long, conflicts_with = "speed")]
        radius: Option<f64>,
        /// Speed in m/s; the radius follows from the lateral acceleration limit.
        #[arg(long)]
        speed: Option<f64>,
        /// Config whose reachability policy is used.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Polyline CSV (x,y,heading) of the path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Polyline spacing in meters.
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
    /// Re-summarizes existing sample CSVs.
    Stats {
        /// samples_<N_b>.csv files written by simulate or sweep.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Directory for summary CSV/JSON files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo runs per swarm size (overrides the config).
    #[arg(long)]
    runs: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = load_config(self.config.as_deref())?;
        if let Some(seed) = self.seed {
            cfg.experiment.master_seed = seed;
        }
        if let Some(runs) = self.runs {
            cfg.experiment.runs = runs;
        }
        Ok(cfg)
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    Ok(match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    })
}

fn parse_pose(s: &str) -> std::result::Result<Pose, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [x, y, h] if parts.iter().all(|v| v.is_finite()) => Ok(Pose::new(x, y, h)),
        _ => Err("expected three finite numbers x,y,heading".into()),
    }
}

fn print_batch(r: &BatchResult) {
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    let s = r.filter_stats;
    println!(
        "N_b={}: reachability filter accepted {}, adjusted {}, kept previous {}",
        r.nb, s.accepted, s.adjusted, s.kept_previous
    );
}

fn simulate(run: &RunArgs, nb: Option<usize>) -> Result<()> {
    let mut cfg = run.load()?;
    if let Some(nb) = nb {
        cfg.lifecycle.target_flock_size = nb;
    }
    let res = experiment::simulate(&cfg, &run.out)?;
    print!("{}", format_table(&res.rows));
    print_batch(&res);
    println!("results written to {}", run.out.display());
    Ok(())
}

fn sweep(run: &RunArgs, nb: Option<Vec<usize>>) -> Result<()> {
    let mut cfg = run.load()?;
    if let Some(nb) = nb {
        cfg.experiment.sweep_nb = nb;
    }
    let results = experiment::sweep(&cfg, &run.out)?;
    let rows: Vec<_> = results.iter().flat_map(|r| r.rows.iter().cloned()).collect();
    print!("{}", format_table(&comparison_order(&rows)));
    for r in &results {
        print_batch(r);
    }
    println!("results written to {}", run.out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn dubins(
    from: Pose,
    to: Pose,
    radius: Option<f64>,
    speed: Option<f64>,
    config: Option<&Path>,
    out: Option<&Path>,
    step: f64,
) -> Result<()> {
    let policy = load_config(config)?.reachability;
    let radius = match (radius, speed) {
        (Some(r), _) => r,
        (None, Some(v)) => policy.turn_radius(v),
        (None, None) => bail!("give either --radius or --speed"),
    };
    if !(radius.is_finite() && radius > 0.0) {
        bail!("radius must be positive, got {radius}");
    }
    if !(step.is_finite() && step > 0.0) {
        bail!("--step must be positive, got {step}");
    }
    let path = shortest_dubins_path(from, to, radius);
    let chord = from.position.distance(to.position);
    let reachable = is_reachable(from, to, radius, &policy);
    let [a, b, c] = path.segment_lengths;
    println!("word      {}", path.word);
    println!("radius    {radius:.3} m");
    println!("segments  {a:.3} {b:.3} {c:.3} m");
    println!("length    {:.3} m", path.total_length);
    println!("chord     {chord:.3} m");
    println!(
        "verdict   {} (limit {:.3} m)",
        if reachable { "reachable" } else { "detour" },
        policy.detour_factor * chord.max(policy.min_chord)
    );
    if let Some(out) = out {
        let file = std::fs::File::create(out).with_context(|| format!("cannot create {}", out.display()))?;
        let mut w = std::io::BufWriter::new(file);
        writeln!(w, "x,y,heading")?;
        for p in path.sample_many(step) {
            writeln!(w, "{:.6},{:.6},{:.6}", p.position.x, p.position.y, p.heading)?;
        }
        w.flush()?;
        println!("polyline written to {}", out.display());
    }
    Ok(())
}

/// N_b encoded in a `samples_<nb>.csv` file name, if any.
fn nb_from_name(path: &Path) -> Option<usize> {
    path.file_stem()?.to_str()?.strip_prefix("samples_")?.parse().ok()
}

fn stats(files: &[PathBuf], out: Option<&Path>) -> Result<()> {
    let mut all = Vec::new();
    for f in files {
        let samples = metrics::read_samples_csv(f)?;
        let nb = nb_from_name(f).unwrap_or(0);
        let (rows, warnings) = metrics::summarize_pooled(&samples, nb);
        for w in warnings {
            eprintln!("warning: {}: {w}", f.display());
        }
        if let Some(dir) = out {
            std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            metrics::write_summary_csv(&dir.join(format!("summary_{nb}.csv")), &rows)?;
            metrics::write_summary_json(&dir.join(format!("summary_{nb}.json")), &rows)?;
        }
        all.extend(rows);
    }
    print!("{}", format_table(&comparison_order(&all)));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { run, nb } => simulate(&run, nb),
        Command::Sweep { run, nb } => sweep(&run, nb),
        Command::Dubins {
            from,
            to,
            radius,
            speed,
            config,
            out,
            step,
        } => dubins(from, to, radius, speed, config.as_deref(), out.as_deref(), step),
        Command::Stats { files, out } => stats(&files, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
