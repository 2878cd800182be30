use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use exo_mdp::environments::{EnvConfig, Scenario};
use exo_mdp::harness::{
    aggregate, default_algorithms, export_results, flatten, optimum, run_experiment, table2_row, ExperimentConfig,
    Format,
};
use exo_mdp::linear_mixture::{build_features, build_info_matrix};
use exo_mdp::{dp_solve, Exec};
use serde_json::json;

#[derive(Parser)]
#[command(name = "exo", version, about = "Exo-MDP solvers, learners and regret experiments")]
struct Cli {
    /// Directory for result files.
    #[arg(long, env = "EXO_OUTPUT_DIR", default_value = "results", global = true)]
    output_dir: PathBuf,
    /// Result file format.
    #[arg(long, default_value = "csv", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run { config: PathBuf },
    /// Print the information matrix spectrum and effective rank.
    Rank {
        /// Preset name or path to an environment JSON file.
        env: String,
        /// Also write the matrix as CSV to the output directory.
        #[arg(long)]
        dump: bool,
    },
    /// Compare learners on the inventory scenarios.
    Table2 {
        #[arg(long, value_delimiter = ',', default_value = "I,II,III")]
        scenarios: Vec<Scenario>,
        #[arg(long, default_value_t = 1000)]
        episodes: usize,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
    },
    /// Print the optimal value and policy.
    Solve {
        env: String,
        /// Print the whole policy table.
        #[arg(long)]
        policy: bool,
    },
}

fn load_env(arg: &str) -> Result<EnvConfig> {
    let path = Path::new(arg);
    if path.extension().is_some_and(|e| e == "json") {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?);
    }
    Ok(EnvConfig::preset(arg)?)
}

fn output_path(dir: &Path, stem: &str, format: Format) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.join(format!("{stem}.{}", format.extension())))
}

fn run(cli: &Cli, config: &Path) -> Result<()> {
    let text = std::fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfg = ExperimentConfig::from_json(&text).with_context(|| format!("in {}", config.display()))?;
    let runs = run_experiment(&cfg)?;
    let (path, format) = match &cfg.output {
        Some(o) => (o.path.clone(), o.format),
        None => {
            let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
            (output_path(&cli.output_dir, stem, cli.format)?, cli.format)
        }
    };
    export_results(&flatten(&runs), &path, format)?;
    let s = aggregate(&runs)?;
    let summary = json!({
        "algorithm": cfg.algorithm.label(),
        "episodes": s.episodes,
        "seeds": s.seeds,
        "final_value_mean": s.final_mean,
        "final_value_stderr": s.final_stderr,
        "cum_regret_mean": s.mean_cum_regret.last(),
        "cum_regret_stderr": s.stderr_cum_regret.last(),
        "records": path,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn rank(cli: &Cli, env: &str, dump: bool) -> Result<()> {
    let env = load_env(env)?.build()?;
    let features = build_features(&env.spec);
    let info = build_info_matrix(&features);
    if dump {
        let path = output_path(&cli.output_dir, "info_matrix", Format::Csv)?;
        info.write_csv(&path)?;
        eprintln!("wrote {}", path.display());
    }
    let out = json!({
        "symbols": info.cols(),
        "rows": info.total_rows(),
        "nonzero_rows": info.rows().len(),
        "singular_values": info.singular_values(),
        "rank": info.rank(),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn table2(cli: &Cli, scenarios: &[Scenario], episodes: usize, seeds: u64) -> Result<()> {
    if seeds == 0 || episodes == 0 {
        bail!("need at least one seed and one episode");
    }
    let seeds: Vec<u64> = (0..seeds).collect();
    let mut rows = Vec::new();
    for &sc in scenarios {
        let row = table2_row(sc, &default_algorithms(), episodes, &seeds, Exec::Parallel)?;
        println!("{}", sc.name());
        println!("  {:<20} {:>10.3}", "optimal", row.optimal_cost);
        println!("  {:<20} {:>10.3}  (b = {})", "best base-stock", row.best_base_stock_cost, row.best_base_stock);
        for l in &row.learners {
            println!("  {:<20} {:>10.3} ± {:.3}", l.algorithm, l.final_mean, l.final_stderr);
        }
        rows.push(row);
    }
    let path = output_path(&cli.output_dir, "table2", Format::Json)?;
    std::fs::write(&path, serde_json::to_string_pretty(&rows)?).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn solve(env: &str, full: bool) -> Result<()> {
    let env = load_env(env)?.build()?;
    let opt = optimum(&env);
    let spec = &env.spec;
    let mut out = json!({
        "states": spec.n_states(),
        "actions": spec.n_actions(),
        "symbols": spec.n_exo(),
        "horizon": spec.horizon(),
        "optimal_value": opt.value,
        "reported": opt.reported,
        "reported_is_cost": env.is_cost(),
    });
    if full {
        let (pi, _) = dp_solve(spec, spec.exo_dist());
        let table: Vec<&[usize]> = pi.as_slice().chunks(spec.n_states()).collect();
        out["policy"] = json!(table);
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { config } => run(&cli, config),
        Command::Rank { env, dump } => rank(&cli, env, *dump),
        Command::Table2 {
            scenarios,
            episodes,
            seeds,
        } => table2(&cli, scenarios, *episodes, *seeds),
        Command::Solve { env, policy } => solve(env, *policy),
    }
}
