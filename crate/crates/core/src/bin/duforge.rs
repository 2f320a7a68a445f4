use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use duforge::cartan::{cartan_coords, chamber_trajectory};
use duforge::ensemble::{run_ensemble, EnsembleConfig};
use duforge::gates::{named_gate, GATE_NAMES};
use duforge::io::{chamber_csv, read_matrices, read_unitary, trace_csv, write_matrices, MatrixFile};
use duforge::measures::{measure, DEFAULT_CLASS_TOL};
use duforge::tensor::{ame_state, bipartition_entropies};
use duforge::{cue_sample, iterate, BipartiteUnitary, IterateOptions, MapKind, RngSeed};

#[derive(Parser)]
#[command(name = "duforge", version, about = "Dual-unitary and 2-unitary gates from nearest-unitary maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write CUE samples of order d² to a matrix file.
    Sample {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[command(flatten)]
        seed: SeedArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Iterate a map from one operator; trace CSV to --trace-out or stdout.
    Iterate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "MR")]
        map: MapKind,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_CLASS_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        /// Keep going to --n after convergence.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long = "out")]
        final_out: Option<PathBuf>,
    },
    /// Print the measures of every matrix in a file, one JSON object per line.
    Measure {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CLASS_TOL)]
        tol: f64,
    },
    /// Run a batch over CUE seeds; writes report.json, histograms.csv and
    /// per_seed.csv into --out.
    Ensemble(EnsembleArgs),
    /// Cartan coordinates of a two-qubit gate, or a trajectory with --n.
    Cartan {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value = "MR")]
        map: MapKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reference gates.
    Gates {
        #[command(subcommand)]
        action: GatesAction,
    },
    /// Bipartition entropies of the four-party state of a gate.
    Ame {
        #[arg(long = "in", conflicts_with = "gate")]
        input: Option<PathBuf>,
        #[arg(long, requires = "d")]
        gate: Option<String>,
        #[arg(long)]
        d: Option<usize>,
    },
}

#[derive(Subcommand)]
enum GatesAction {
    List,
    Export {
        #[arg(long)]
        name: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SeedArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
}

#[derive(Args)]
struct EnsembleArgs {
    /// Flat key = value file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n_seeds: Option<usize>,
    #[arg(long)]
    map: Option<MapKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stream: Option<u64>,
    #[arg(long)]
    record_every: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<usize>>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    override_dim_guard: bool,
    /// Also write the 2-unitary hits to two_unitaries.mat.
    #[arg(long)]
    dump_two_unitaries: bool,
    #[arg(long)]
    out: PathBuf,
}

fn write_or_print(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn ensemble_config(a: &EnsembleArgs) -> anyhow::Result<EnsembleConfig> {
    let mut cfg = EnsembleConfig::new(2, 100, MapKind::Realign, 100);
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        cfg.apply_kv(&text)?;
    }
    if let Some(v) = a.d {
        cfg.d = v;
    }
    if let Some(v) = a.n_seeds {
        cfg.n_seeds = v;
    }
    if let Some(v) = a.map {
        cfg.map = v;
    }
    if let Some(v) = a.n {
        cfg.n_iter = v;
    }
    if let Some(v) = a.eps {
        cfg.eps = v;
    }
    if let Some(v) = a.tol {
        cfg.class_tol = v;
    }
    if let Some(v) = a.bins {
        cfg.histogram_bins = v;
    }
    if let Some(v) = a.seed {
        cfg.base_seed.seed = v;
    }
    if let Some(v) = a.stream {
        cfg.base_seed.stream = v;
    }
    if let Some(v) = a.record_every {
        cfg.record_every = v;
    }
    if let Some(v) = &a.checkpoints {
        cfg.checkpoints = v.clone();
    }
    if let Some(v) = a.threads {
        cfg.threads = Some(v);
    }
    cfg.override_dim_guard |= a.override_dim_guard;
    cfg.keep_two_unitaries |= a.dump_two_unitaries;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Sample { d, count, seed, out } => {
            if d < 2 {
                bail!(duforge::Error::Dimension(format!("local dimension must be at least 2, got {d}")));
            }
            let files = (0..count as u64)
                .map(|k| {
                    let s = RngSeed::new(seed.seed, seed.stream + k);
                    MatrixFile::new(d, "cue", cue_sample(d * d, s))
                })
                .collect::<duforge::Result<Vec<_>>>()?;
            write_matrices(&out, &files)?;
        }
        Command::Iterate { input, map, n, eps, tol, record_every, full, trace_out, final_out } => {
            let u = read_unitary(&input)?;
            let opts = IterateOptions::new(n, eps).record_every(record_every).class_tol(tol).run_full(full);
            let trace = iterate(&u, map, &opts)?;
            write_or_print(trace_out.as_deref(), &trace_csv(&trace))?;
            if let Some(path) = final_out {
                let f = MatrixFile::from_unitary(&trace.final_operator, &format!("iterate:{map}"))?;
                write_matrices(&path, &[f])?;
            }
            if trace_out.is_some() {
                let last = trace.last();
                println!(
                    "{}",
                    json!({
                        "stop_reason": trace.stop_reason,
                        "iterations": trace.iterations,
                        "class": last.class,
                        "E_U": last.e_u,
                        "E_US": last.e_us,
                        "ep": last.ep,
                        "monotonicity_violations": trace.monotonicity_violations,
                    })
                );
            }
        }
        Command::Measure { input, tol } => {
            for f in read_matrices(&input)? {
                let m = measure(&f.to_unitary()?);
                let mut v = serde_json::to_value(&m)?;
                v["class"] = serde_json::to_value(m.classify(tol).label)?;
                println!("{v}");
            }
        }
        Command::Ensemble(args) => {
            let cfg = ensemble_config(&args)?;
            let report = run_ensemble(&cfg)?;
            let dir = &args.out;
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            fs::write(dir.join("report.json"), report.to_json()?)?;
            fs::write(dir.join("histograms.csv"), report.histograms_csv())?;
            fs::write(dir.join("per_seed.csv"), report.per_seed_csv())?;
            if args.dump_two_unitaries {
                let files = report
                    .two_unitaries
                    .iter()
                    .map(|(k, u)| MatrixFile::from_unitary(u, &format!("two_unitary:seed{k}")))
                    .collect::<duforge::Result<Vec<_>>>()?;
                fs::write(dir.join("two_unitaries.mat"), duforge::io::format_matrices(&files))?;
            }
            println!(
                "{}",
                json!({ "fractions": report.fractions, "stalled": report.stalled, "wall_time": report.wall_time })
            );
        }
        Command::Cartan { input, n, map, out } => {
            let u = read_unitary(&input)?;
            match n {
                None => {
                    let c = cartan_coords(&u)?;
                    write_or_print(out.as_deref(), &format!("{} {} {}\n", c.c1, c.c2, c.c3))?;
                }
                Some(n) => {
                    let points = chamber_trajectory(&u, map, n)?;
                    write_or_print(out.as_deref(), &chamber_csv(&points))?;
                }
            }
        }
        Command::Gates { action } => match action {
            GatesAction::List => {
                for name in GATE_NAMES {
                    println!("{name}");
                }
            }
            GatesAction::Export { name, d, out } => {
                let g = named_gate(&name, d)?;
                write_matrices(&out, &[MatrixFile::from_unitary(&g.gate, &format!("gate:{name}"))?])?;
            }
        },
        Command::Ame { input, gate, d } => {
            let u: BipartiteUnitary = match (input, gate, d) {
                (Some(path), _, _) => read_unitary(&path)?,
                (None, Some(name), Some(d)) => named_gate(&name, d)?.gate,
                _ => bail!(duforge::Error::Parameter("give --in, or --gate with --d".into())),
            };
            let e = bipartition_entropies(&ame_state(&u))?;
            println!("{}", serde_json::to_string(&e)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = err
                .downcast_ref::<duforge::Error>()
                .map(duforge::Error::kind)
                .or_else(|| err.downcast_ref::<std::io::Error>().map(|_| "io"))
                .unwrap_or("error");
            eprintln!("{}", json!({ "error": kind, "message": format!("{err:#}") }));
            ExitCode::FAILURE
        }
    }
}
