//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use cfvp_core::experiments::{build_realization, PointParams, RealizationSeeds};
use cfvp_core::experiments::threshold_of_curve;
use cfvp_core::{run_cfvp, CoupledSystem, EngineError, RunResult};
use clap::{Args, Parser, Subcommand};

use crate::config::{grid_step, parse_grid, PartialConfig, StrategyName, SweepConfig, SEED_ENV};
use crate::error::{CliError, ConfigError};
use crate::output::{self, Table, NOT_REACHED};
use crate::sweep;

#[derive(Debug, Parser)]
#[command(name = "cfvp", version, about = "Virus spreading and cascading failures on interdependent networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate one pair of layers and write them as edge lists.
    Generate(Common),
    /// Trace a single run stage by stage.
    Run(RunArgs),
    /// Final giant component versus transmission probability.
    SweepLambda(Common),
    /// Final giant component versus identification probability.
    SweepQ(Common),
    /// Mean infected fraction per stage, coupled and single-layer.
    Timeseries(Common),
    /// Critical transmission probability from an existing sweep_lambda.csv.
    Threshold(ThresholdArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Master seed. Without it the config file's value is used, then
    /// $CFVP_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Nodes per layer.
    #[arg(long)]
    n: Option<usize>,
    /// Average degree(s) of layer A, comma separated.
    #[arg(long = "ka", value_delimiter = ',')]
    k_a: Option<Vec<usize>>,
    /// Average degree(s) of layer B, comma separated.
    #[arg(long = "kb", value_delimiter = ',')]
    k_b: Option<Vec<usize>>,
    /// Transmission probability.
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Identification probability.
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    /// Spread of the per-node identification probabilities.
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyName>,
    /// Runs per grid point.
    #[arg(long)]
    realizations: Option<usize>,
    /// Worker threads (default: all cores). Never changes results.
    #[arg(long)]
    threads: Option<usize>,
    /// λ grid as `a,b,c` or `start:stop:step`.
    #[arg(long, value_parser = parse_grid_arg)]
    lambda_grid: Option<Grid>,
    /// q grid as `a,b,c` or `start:stop:step`.
    #[arg(long, value_parser = parse_grid_arg)]
    q_grid: Option<Grid>,
    /// Largest mean G that counts as collapsed.
    #[arg(long)]
    collapse_epsilon: Option<f64>,
}

// A named wrapper keeps clap from treating the grid as a repeated flag.
#[derive(Debug, Clone)]
struct Grid(Vec<f64>);

fn parse_grid_arg(s: &str) -> Result<Grid, String> {
    parse_grid(s).map(Grid)
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Edge list for layer A instead of a generated layer.
    #[arg(long, value_name = "PATH", requires = "layer_b")]
    layer_a: Option<PathBuf>,
    /// Edge list for layer B.
    #[arg(long, value_name = "PATH", requires = "layer_a")]
    layer_b: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[command(flatten)]
    common: Common,
    /// Sweep to read (default: OUT/sweep_lambda.csv).
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
}

impl Common {
    fn flags(&self) -> PartialConfig {
        PartialConfig {
            n: self.n,
            k_a: self.k_a.clone(),
            k_b: self.k_b.clone(),
            lambda: self.lambda,
            lambda_grid: self.lambda_grid.clone().map(|g| g.0),
            q: self.q,
            q_grid: self.q_grid.clone().map(|g| g.0),
            sigma: self.sigma,
            strategy: self.strategy,
            realizations: self.realizations,
            master_seed: self.seed,
            collapse_epsilon: self.collapse_epsilon,
            threads: self.threads,
        }
    }

    /// Defaults, overlaid by the config file, overlaid by flags. `$CFVP_SEED`
    /// only fills in a seed that neither of them sets.
    fn resolve(&self, env_seed: Option<&str>) -> Result<SweepConfig, CliError> {
        let file = match &self.config {
            Some(path) => {
                let text = output::read_file(path)?;
                PartialConfig::from_json(&text)?
            }
            None => PartialConfig::default(),
        };
        let merged = file.overlay(self.flags());
        Ok(merged.resolve(env_seed)?)
    }
}

/// Parses `args`, runs the command and returns the exit status. Usage
/// errors go to `stderr`; help and version go to `stdout`.
pub fn main_with<I, T>(args: I, env_seed: Option<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    1
                }
            };
        }
    };
    match execute(cli.command, env_seed.as_deref(), stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cmd: Command, env_seed: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let written = match cmd {
        Command::Generate(c) => generate(&c.resolve(env_seed)?, &c.out)?,
        Command::Run(r) => run(&r, env_seed, stdout)?,
        Command::SweepLambda(c) => sweep_lambda(&c.resolve(env_seed)?, &c.out)?,
        Command::SweepQ(c) => sweep_q(&c.resolve(env_seed)?, &c.out)?,
        Command::Timeseries(c) => timeseries(&c.resolve(env_seed)?, &c.out)?,
        Command::Threshold(t) => threshold(&t, env_seed)?,
    };
    for path in written {
        let _ = writeln!(stderr, "wrote {}", path.display());
    }
    Ok(())
}

fn single(field: &str, ks: &[usize]) -> Result<usize, ConfigError> {
    match ks {
        [k] => Ok(*k),
        _ => Err(ConfigError::new(field, "this command takes exactly one average degree")),
    }
}

/// Realization 0 of the configured point.
fn first_realization(cfg: &SweepConfig) -> Result<(PointParams, RealizationSeeds), CliError> {
    let params = PointParams {
        n: cfg.n,
        k_a: single("k_a", &cfg.k_a)?,
        k_b: single("k_b", &cfg.k_b)?,
        lambda: cfg.lambda,
        strategy: cfg.strategy_at(cfg.q)?,
    };
    let seeds = RealizationSeeds::derive(cfg.master_seed, params.n, params.k_a, params.k_b, 0);
    Ok((params, seeds))
}

fn build(params: &PointParams, seeds: &RealizationSeeds) -> Result<CoupledSystem, CliError> {
    build_realization(params, seeds).map_err(|e| CliError::Simulation(e.to_string()))
}

fn generate(cfg: &SweepConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let (params, seeds) = first_realization(cfg)?;
    let system = build(&params, &seeds)?;
    Ok(vec![
        output::write_file(out, "layer_a.edges", &output::render_edge_list(system.layer_a(), "generate", cfg))?,
        output::write_file(out, "layer_b.edges", &output::render_edge_list(system.layer_b(), "generate", cfg))?,
    ])
}

fn run(args: &RunArgs, env_seed: Option<&str>, stdout: &mut dyn Write) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = args.common.resolve(env_seed)?;
    let (mut system, dynamics) = match (&args.layer_a, &args.layer_b) {
        (Some(pa), Some(pb)) => {
            let a = output::read_edge_list(pa)?;
            let b = output::read_edge_list(pb)?;
            let system = CoupledSystem::from_layers(a, b).map_err(|e| CliError::Input { path: pb.clone(), message: e.to_string() })?;
            if !system.is_settled() {
                return Err(CliError::Input {
                    path: pa.clone(),
                    message: "both layers must be connected and have at least two nodes".into(),
                });
            }
            cfg.n = system.node_count();
            let seeds = RealizationSeeds::derive(cfg.master_seed, cfg.n, 0, 0, 0);
            (system, seeds.dynamics)
        }
        _ => {
            let (params, seeds) = first_realization(&cfg)?;
            (build(&params, &seeds)?, seeds.dynamics)
        }
    };
    let strategy = cfg.strategy_at(cfg.q)?;
    let result = run_cfvp(&mut system, cfg.lambda, &strategy, dynamics).map_err(|e| match e {
        EngineError::Epidemic(e) => CliError::Simulation(e.to_string()),
        other => CliError::Simulation(other.to_string()),
    })?;
    print_trace(&result, stdout).map_err(|e| CliError::io("<stdout>", e))?;
    let table = output::trace_table(&result.stages);
    Ok(vec![output::write_file(&args.common.out, "trace.csv", &table.render("run", &cfg))?])
}

fn print_trace(result: &RunResult, w: &mut dyn Write) -> std::io::Result<()> {
    let widths = [5, 14, 13, 17, 17, 12, 11, 14, 19];
    let line = |cells: &mut dyn Iterator<Item = String>| {
        cells.zip(widths).map(|(c, width)| format!("{c:>width$}")).collect::<Vec<_>>().join(" ")
    };
    writeln!(w, "{}", line(&mut output::TRACE_COLUMNS.iter().map(|c| c.to_string())))?;
    for s in &result.stages {
        let cells = [
            s.stage.to_string(),
            s.newly_infected.to_string(),
            s.virus_removed.to_string(),
            s.cascade_removed_a.to_string(),
            s.cascade_removed_b.to_string(),
            s.edges_pruned.to_string(),
            format!("{:.6}", s.f_i_current),
            format!("{:.6}", s.f_i_cumulative),
            format!("{:.6}", s.functional_fraction),
        ];
        writeln!(w, "{}", line(&mut cells.into_iter()))?;
    }
    writeln!(w, "g_final {}", result.g_final)
}

fn lambda_c_table(rows: &[sweep::Threshold], cfg: &SweepConfig, step: f64) -> Table {
    let mut t = Table::new(&output::LAMBDA_C_COLUMNS);
    for r in rows {
        t.push(vec![
            r.k_a.to_string(),
            r.k_b.to_string(),
            r.lambda_c.map_or_else(|| NOT_REACHED.to_string(), |l| l.to_string()),
            cfg.collapse_epsilon.to_string(),
            step.to_string(),
        ]);
    }
    t
}

fn sweep_lambda(cfg: &SweepConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let points = sweep::sweep_lambda(cfg)?;
    let mut t = Table::new(&output::SWEEP_LAMBDA_COLUMNS);
    for p in &points {
        t.push(vec![
            p.params.k_a.to_string(),
            p.params.k_b.to_string(),
            cfg.strategy.to_string(),
            p.params.strategy.q.to_string(),
            p.params.lambda.to_string(),
            p.mean_g.to_string(),
            p.std_g.to_string(),
            p.mean_total_infected.to_string(),
            p.realizations.to_string(),
        ]);
    }
    let th = sweep::thresholds(&points, cfg.collapse_epsilon)?;
    Ok(vec![
        output::write_file(out, "sweep_lambda.csv", &t.render("sweep-lambda", cfg))?,
        output::write_file(out, "lambda_c.csv", &lambda_c_table(&th, cfg, cfg.lambda_step()).render("sweep-lambda", cfg))?,
    ])
}

fn sweep_q(cfg: &SweepConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let points = sweep::sweep_q(cfg)?;
    let mut t = Table::new(&output::SWEEP_Q_COLUMNS);
    for p in &points {
        t.push(vec![
            p.params.k_a.to_string(),
            p.params.k_b.to_string(),
            cfg.strategy.to_string(),
            cfg.sigma.to_string(),
            p.params.lambda.to_string(),
            p.params.strategy.q.to_string(),
            p.mean_g.to_string(),
            p.std_g.to_string(),
            p.realizations.to_string(),
        ]);
    }
    Ok(vec![output::write_file(out, "sweep_q.csv", &t.render("sweep-q", cfg))?])
}

fn timeseries(cfg: &SweepConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut t = Table::new(&output::TIMESERIES_COLUMNS);
    for s in sweep::timeseries(cfg)? {
        for (i, (cur, cum)) in s.current.iter().zip(&s.cumulative).enumerate() {
            t.push(vec![
                s.mode.as_str().to_string(),
                s.k.to_string(),
                s.lambda.to_string(),
                (i + 1).to_string(),
                cur.to_string(),
                cum.to_string(),
            ]);
        }
    }
    Ok(vec![output::write_file(out, "timeseries.csv", &t.render("timeseries", cfg))?])
}

fn threshold(args: &ThresholdArgs, env_seed: Option<&str>) -> Result<Vec<PathBuf>, CliError> {
    let cfg = args.common.resolve(env_seed)?;
    let input = args.input.clone().unwrap_or_else(|| args.common.out.join("sweep_lambda.csv"));
    let rows = output::read_sweep_lambda(&input)?;
    // Group rows by (k_a, k_b) in first-seen order; λ order within a group
    // is whatever the file has, and must be ascending.
    let mut groups: Vec<((usize, usize), Vec<(f64, f64)>)> = Vec::new();
    for r in &rows {
        let key = (r.k_a, r.k_b);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, curve)) => curve.push((r.lambda, r.mean_g)),
            None => groups.push((key, vec![(r.lambda, r.mean_g)])),
        }
    }
    let mut out = Vec::new();
    let mut step = 0.0f64;
    for (key, curve) in &groups {
        let lambda_c = threshold_of_curve(curve, cfg.collapse_epsilon).map_err(|e| CliError::Input {
            path: input.clone(),
            message: format!("k_a={} k_b={}: {e}", key.0, key.1),
        })?;
        let lambdas: Vec<f64> = curve.iter().map(|c| c.0).collect();
        step = step.max(grid_step(&lambdas));
        out.push(sweep::Threshold { k_a: key.0, k_b: key.1, lambda_c });
    }
    let table = lambda_c_table(&out, &cfg, step);
    Ok(vec![output::write_file(&args.common.out, "lambda_c.csv", &table.render("threshold", &cfg))?])
}

/// Entry point used by the binary.
pub fn main() -> i32 {
    let env_seed = std::env::var(SEED_ENV).ok();
    main_with(std::env::args_os(), env_seed, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
