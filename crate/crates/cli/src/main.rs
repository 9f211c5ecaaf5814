use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracton::analytic::{
    continuum_moments, single_fracton_final, two_fracton_final_profile, TwoFractonGeometry,
};
use fracton::automaton::{run_ensemble, EvolutionConfig};
use fracton::blocks::{
    compare_move_graphs, equivalence_check, piston_statistics, run_block_ensemble, PistonRun,
};
use fracton::chain::{SectorLabel, SpinState};
use fracton::ensemble::{geometric_schedule, linear_schedule};
use fracton::error::{Error, Result};
use fracton::gates::GateClassTable;
use fracton::harness::{
    fit_points, powerlaw_fit, run_experiment, tau_sweep, write_profiles, ExperimentKind,
    ExperimentSpec, SweepKind, SweepSettings,
};
use fracton::maxent::{
    distribution_from_multipliers, linear_profile, linearized_multipliers,
    linearized_multipliers_exact, solve_multipliers,
};
use fracton::sector::{enumerate_sector, krylov_decompose, sector_mean_profile};
use serde_json::json;

/// Simulate and analyse dipole-conserving spin chains.
#[derive(Parser)]
#[command(name = "fracton", version)]
struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Use the full published ensemble sizes.
    #[arg(long, global = true)]
    paper_scale: bool,
    /// Worker threads; defaults to all cores. Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Chain {
    /// Chain length L.
    #[arg(long, short = 'L')]
    length: usize,
    /// Sites (1-based) that carry a `+` charge, comma separated.
    #[arg(long, value_delimiter = ',')]
    sites: Vec<usize>,
}

impl Chain {
    fn state(&self) -> Result<SpinState> {
        SpinState::with_charges(self.length, &self.sites)
    }
}

#[derive(Args, Clone)]
struct Sector {
    #[arg(long, short = 'L')]
    length: usize,
    /// Total charge Q.
    #[arg(long, allow_hyphen_values = true)]
    q: i64,
    /// Dipole moment P = Σ i s_i.
    #[arg(long, allow_hyphen_values = true)]
    p: i64,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Automaton,
    Blocks,
}

#[derive(Clone, Copy, ValueEnum)]
enum BlockMode {
    /// Compare block and automaton ensembles at matched times.
    Equivalence,
    /// Stationary piston hop-rate ratios of a two-fracton state.
    Piston,
    /// Exhaustive move-graph comparison up to `--length`.
    Graph,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble and write profiles and metrics.
    Evolve {
        #[command(flatten)]
        chain: Chain,
        #[arg(long, default_value_t = 3)]
        width: usize,
        #[arg(long, default_value_t = 1000)]
        steps: u64,
        #[arg(long, default_value_t = 500)]
        realizations: u64,
        /// Snapshot every N steps; geometric spacing if omitted.
        #[arg(long)]
        record_every: Option<u64>,
        /// Also report the time average from this step on.
        #[arg(long)]
        average_from: Option<u64>,
        #[arg(long, value_enum, default_value = "automaton")]
        engine: EngineArg,
    },
    /// Enumerate a (Q, P) sector and write its flat-average profile.
    Enumerate {
        #[command(flatten)]
        sector: Sector,
    },
    /// Solve the maximum-entropy problem for a sector.
    Maxent {
        #[command(flatten)]
        sector: Sector,
    },
    /// Block-picture tools.
    Blocks {
        #[command(flatten)]
        chain: Chain,
        #[arg(long, value_enum, default_value = "equivalence")]
        mode: BlockMode,
        /// Automaton snapshot times (multiples of L − 2).
        #[arg(long, value_delimiter = ',', default_value = "29,116")]
        snapshots: Vec<u64>,
        #[arg(long, default_value_t = 500)]
        realizations: u64,
        #[arg(long, default_value_t = 10_000)]
        burn_in: u64,
        #[arg(long, default_value_t = 10_000)]
        steps: u64,
        #[arg(long, default_value_t = 20)]
        groups: usize,
    },
    /// Closed-form late-time profile of one or two fractons.
    Analytic {
        #[command(flatten)]
        chain: Chain,
    },
    /// Krylov decomposition of the sector of a state.
    Krylov {
        #[command(flatten)]
        chain: Chain,
        #[arg(long, default_value_t = 3)]
        width: usize,
    },
    /// Threshold-time sweep and power-law fit.
    Scaling {
        #[arg(long, value_enum)]
        kind: SweepKindArg,
        /// L values (single) or Δ values (double), comma separated.
        #[arg(long, value_delimiter = ',')]
        scales: Vec<usize>,
        #[arg(long, default_value_t = 0.5)]
        ratio: f64,
        #[arg(long, default_value_t = 8)]
        groups: usize,
        #[arg(long, default_value_t = 64)]
        realizations_per_group: u64,
        #[arg(long, default_value_t = 2.0)]
        budget: f64,
    },
    /// Run experiment spec files, or every figure with `--all`.
    Reproduce {
        /// TOML spec files.
        specs: Vec<PathBuf>,
        #[arg(long, conflicts_with = "specs")]
        all: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKindArg {
    Single,
    Double,
}

fn create(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn print(value: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let realizations = |n: u64| if cli.paper_scale { n.max(5000) } else { n };
    match cli.command {
        Command::Evolve {
            chain,
            width,
            steps,
            realizations: n,
            record_every,
            average_from,
            engine,
        } => {
            let times = match record_every {
                Some(every) => linear_schedule(steps, every),
                None => geometric_schedule(steps, 1.05),
            };
            let mut cfg = EvolutionConfig::new(chain.state()?, width)
                .steps(steps)
                .record(times)
                .realizations(realizations(n))
                .seed(cli.seed);
            if let Some(t) = average_from {
                cfg = cfg.average_from(t);
            }
            let result = match engine {
                EngineArg::Automaton => run_ensemble(&cfg)?,
                EngineArg::Blocks => run_block_ensemble(&cfg)?,
            };
            result.write_dir(&cli.out)?;
            eprintln!("wrote {}", cli.out.display());
        }
        Command::Enumerate { sector } => {
            let s = enumerate_sector(sector.length, SectorLabel::new(sector.q, sector.p))?;
            let profile = sector_mean_profile(&s)?;
            create(&cli.out)?;
            write_profiles(
                &cli.out.join("enumeration.csv"),
                &[("enumeration", &profile)],
            )?;
            print(&json!({ "sector_size": s.len(), "profile": profile.mean_charge }))?;
        }
        Command::Maxent { sector } => {
            let label = SectorLabel::new(sector.q, sector.p);
            let (lq, lp) = linearized_multipliers_exact(sector.length, label)?;
            let solved = solve_multipliers(sector.length, label)?;
            let exact = distribution_from_multipliers(sector.length, solved).mean_profile();
            let linear =
                linear_profile(sector.length, linearized_multipliers(sector.length, label)?);
            create(&cli.out)?;
            write_profiles(
                &cli.out.join("maxent.csv"),
                &[("maxent", &exact), ("linear", &linear)],
            )?;
            print(&json!({
                "linearized": { "lambda_q": lq.to_string(), "lambda_p": lp.to_string() },
                "solved": solved,
            }))?;
        }
        Command::Blocks {
            chain,
            mode,
            snapshots,
            realizations: n,
            burn_in,
            steps,
            groups,
        } => match mode {
            BlockMode::Equivalence => {
                let report =
                    equivalence_check(&chain.state()?, &snapshots, realizations(n), cli.seed)?;
                print(&serde_json::to_value(&report)?)?;
            }
            BlockMode::Piston => {
                let [i1, i2] = chain.sites[..] else {
                    return Err(Error::Invalid("piston mode needs exactly two sites".into()));
                };
                let stats = piston_statistics(&PistonRun {
                    length: chain.length,
                    i1,
                    i2,
                    burn_in,
                    n_steps: steps,
                    n_realizations: realizations(n),
                    n_groups: groups,
                    seed: cli.seed,
                })?;
                let total = stats.total();
                let rows: Vec<_> = total
                    .occupancy
                    .keys()
                    .filter_map(|&c| {
                        stats.rate_ratio(c).map(|(r, e)| {
                            json!({ "column": c, "xi": c as f64 - chain.length as f64 / 2.0, "ratio": r, "stderr": e })
                        })
                    })
                    .collect();
                print(&json!(rows))?;
            }
            BlockMode::Graph => {
                let reports = (3..=chain.length)
                    .map(compare_move_graphs)
                    .collect::<Result<Vec<_>>>()?;
                print(&serde_json::to_value(&reports)?)?;
            }
        },
        Command::Analytic { chain } => {
            create(&cli.out)?;
            match chain.sites[..] {
                [p] => {
                    let profile = single_fracton_final(chain.length, p)?;
                    write_profiles(&cli.out.join("analytic.csv"), &[("analytic", &profile)])?;
                }
                [i1, i2] => {
                    let geom = TwoFractonGeometry::from_sites(chain.length, i1, i2)?;
                    let profile = two_fracton_final_profile(&geom)?;
                    write_profiles(&cli.out.join("analytic.csv"), &[("analytic", &profile)])?;
                    print(&json!({
                        "geometry": geom,
                        "piston_width": geom.piston_width(),
                        "moments": continuum_moments(&geom)?,
                    }))?;
                }
                _ => {
                    return Err(Error::Invalid(
                        "analytic profiles take one or two sites".into(),
                    ))
                }
            }
        }
        Command::Krylov { chain, width } => {
            let state = chain.state()?;
            let sector = enumerate_sector(chain.length, state.sector())?;
            let d = krylov_decompose(&sector, &GateClassTable::build(width)?)?;
            let id = d.component_of(&state)?;
            print(&json!({
                "summary": d.summary(),
                "state_component_size": d.sizes()[id],
            }))?;
        }
        Command::Scaling {
            kind,
            scales,
            ratio,
            groups,
            realizations_per_group,
            budget,
        } => {
            let kind = match kind {
                SweepKindArg::Single => SweepKind::Single,
                SweepKindArg::Double => SweepKind::Double,
            };
            let settings = SweepSettings {
                ratio,
                groups,
                realizations_per_group: realizations(realizations_per_group * groups as u64)
                    .div_ceil(groups as u64),
                budget,
                ..SweepSettings::default()
            };
            let points = tau_sweep(kind, &scales, &settings, cli.seed)?;
            let fit = powerlaw_fit(&fit_points(&points)).ok();
            let summary = json!({ "points": points, "fit": fit });
            create(&cli.out)?;
            write_json(&cli.out.join("scaling.json"), &summary)?;
            print(&summary)?;
        }
        Command::Reproduce { specs, all } => {
            let mut jobs = Vec::new();
            if all {
                for kind in ExperimentKind::ALL {
                    jobs.push(ExperimentSpec::desk(kind, cli.seed));
                }
            } else if specs.is_empty() {
                return Err(Error::Invalid("give spec files or --all".into()));
            } else {
                for path in &specs {
                    jobs.push(ExperimentSpec::load(path)?);
                }
            }
            for spec in jobs {
                let spec = if cli.paper_scale {
                    spec.paper_scale()
                } else {
                    spec
                };
                let dir = cli.out.join(spec.kind.as_str());
                eprintln!("running {} -> {}", spec.kind, dir.display());
                run_experiment(&spec, &dir)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match cli.workers {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
