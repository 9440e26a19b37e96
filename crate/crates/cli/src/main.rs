//! `graceful`: command-line front end.
//!
//! Every subcommand prints its result as JSON on stdout. Errors print
//! `{"error": kind, "message": …}` on stderr and exit 1; `label` exits 2
//! when every attempt failed, and `verify` exits 3 when the labelling is
//! rejected.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use graceful_core::concentration::{results_csv, run_bundled};
use graceful_core::exact::{DEFAULT_CAP, exact_count, exact_graceful};
use graceful_core::harness::{ExperimentConfig, run_experiment, write_outputs};
use graceful_core::intervals::build_interval_system;
use graceful_core::labeller::{RunOptions, Status, run, trace_csv};
use graceful_core::params::{Rational, derive_practical_params};
use graceful_core::prepare::prepare;
use graceful_core::quasirandom::QuasiSpec;
use graceful_core::tree::random_tree;
use graceful_core::verify::{
    Labelling, LabellingFile, Report, build_cyclic_packing, verify_bipartite_graceful, verify_graceful,
    verify_harmonious, verify_packing,
};
use graceful_core::{Error, Result, SplitRng, Tree};
use serde_json::{Value, json};

#[derive(Parser)]
#[command(name = "graceful", version, about = "Approximate graceful labelling of trees")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Uniform random labelled tree.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the randomized labelling with practical parameters.
    Label {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        gamma: Rational,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        retries: usize,
        /// Trace CSV of the final attempt.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        checkpoint_every: Option<usize>,
        #[arg(long)]
        resample_plan: bool,
    },
    /// Check a labelling file against a tree.
    Verify {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Codomain bound; defaults to the file's `n_tilde`.
        #[arg(long)]
        m: Option<usize>,
        /// Check harmonious modulo this value instead.
        #[arg(long)]
        harmonious_q: Option<usize>,
        /// Also require the colour classes to occupy disjoint label ranges.
        #[arg(long)]
        bipartite: bool,
    },
    /// Exhaustive search on a small tree.
    Exact {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        count: bool,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Build and verify the cyclic packing from a graceful labelling.
    Pack {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded Monte-Carlo campaign from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "experiment-out")]
        out_dir: PathBuf,
    },
    /// Bundled tail-bound scenarios.
    Concentration {
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_tree(p: &Path) -> Result<Tree> {
    Tree::parse(&fs::read_to_string(p)?)
}

fn read_labelling(tree: &Tree, p: &Path, m: Option<usize>) -> Result<Labelling> {
    let mut f: LabellingFile =
        serde_json::from_str(&fs::read_to_string(p)?).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
    if let Some(m) = m {
        f.n_tilde = m;
    }
    f.into_labelling(tree)
}

fn write_json(path: Option<&Path>, v: &Value) -> Result<()> {
    let s = serde_json::to_string(v).expect("json") + "\n";
    match path {
        Some(p) => Ok(fs::write(p, s)?),
        None => {
            print!("{s}");
            Ok(())
        }
    }
}

/// Failure with a dedicated exit code and a JSON body for stderr.
struct Refusal(u8, Value);

fn main() -> ExitCode {
    match dispatch(Cli::parse().cmd) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Refusal(code, body))) => {
            eprintln!("{body}");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(1)
        }
    }
}

fn report_value(r: &Report) -> Value {
    serde_json::to_value(r).expect("report serializes")
}

fn dispatch(cmd: Cmd) -> Result<std::result::Result<(), Refusal>> {
    match cmd {
        Cmd::Generate { n, seed, out } => {
            let t = random_tree(n, &mut SplitRng::new(seed))?;
            fs::write(&out, t.to_text())?;
            write_json(None, &json!({ "n": n, "seed": seed, "out": out }))?;
        }
        Cmd::Label { tree, gamma, m, ell, seed, retries, trace, out, checkpoint_every, resample_plan } => {
            let t = read_tree(&tree)?;
            let p = derive_practical_params(t.n(), gamma, m, ell)?;
            let sys = build_interval_system(&p)?;
            let root = SplitRng::new(seed);
            let plan = prepare(&t, &p, &sys, &mut root.split(1))?;
            let opts = RunOptions { max_retries: retries, checkpoint_every, quasi: QuasiSpec::default(), resample_plan };
            let res = run(&plan, &sys, &p, &root.split(2), &opts)?;
            if let Some(path) = &trace {
                fs::write(path, trace_csv(&res.trace))?;
            }
            let mut hist: BTreeMap<&str, usize> = BTreeMap::new();
            for f in &res.failed_attempts {
                *hist.entry(f.site.as_str()).or_insert(0) += 1;
            }
            match &res.status {
                Status::Success { .. } => {
                    let lab = res.labelling(&t, p.n_tilde).expect("success")?;
                    if !verify_graceful(&lab).passed() {
                        return Err(Error::NotGraceful("labeller output failed verification".into()));
                    }
                    let file = serde_json::to_value(lab.to_file()).expect("json");
                    match &out {
                        Some(o) => {
                            write_json(Some(o), &file)?;
                            write_json(None, &json!({ "status": "success", "attempts": res.attempts, "n_tilde": p.n_tilde, "failure_histogram": hist }))?;
                        }
                        None => write_json(None, &file)?,
                    }
                }
                Status::Failure(f) => {
                    *hist.entry(f.site.as_str()).or_insert(0) += 1;
                    return Ok(Err(Refusal(
                        2,
                        json!({ "error": "labelling_failed", "attempts": res.attempts, "last_failure": f, "failure_histogram": hist }),
                    )));
                }
            }
        }
        Cmd::Verify { tree, labels, m, harmonious_q, bipartite } => {
            let t = read_tree(&tree)?;
            let lab = read_labelling(&t, &labels, m)?;
            let report = match (harmonious_q, bipartite) {
                (Some(q), _) => verify_harmonious(&lab, q)?,
                (None, true) => {
                    // either class may be the low one
                    let c = t.two_coloring();
                    let flipped: Vec<bool> = c.iter().map(|b| !b).collect();
                    let r = verify_bipartite_graceful(&lab, &c)?;
                    if r.passed() { r } else { verify_bipartite_graceful(&lab, &flipped)? }
                }
                (None, false) => verify_graceful(&lab),
            };
            let v = report_value(&report);
            if !report.passed() {
                return Ok(Err(Refusal(3, v)));
            }
            write_json(None, &v)?;
        }
        Cmd::Exact { tree, m, count, cap } => {
            let t = read_tree(&tree)?;
            let m = m.unwrap_or(t.n());
            if count {
                write_json(None, &json!({ "n": t.n(), "m": m, "count": exact_count(&t, m, cap)? }))?;
            } else {
                let found = exact_graceful(&t, m, cap)?.map(|l| l.to_file());
                write_json(None, &json!({ "n": t.n(), "m": m, "labelling": found }))?;
            }
        }
        Cmd::Pack { tree, labels, out } => {
            let t = read_tree(&tree)?;
            let lab = read_labelling(&t, &labels, None)?;
            let p = build_cyclic_packing(&lab)?;
            fs::write(&out, p.to_text())?;
            write_json(None, &serde_json::to_value(verify_packing(&p)).expect("json"))?;
        }
        Cmd::Experiment { config, out_dir } => {
            let cfg = ExperimentConfig::from_json(&fs::read_to_string(&config)?)?;
            let res = run_experiment(&cfg)?;
            write_outputs(&out_dir, &res)?;
            write_json(None, &serde_json::to_value(&res.summary.groups).expect("json"))?;
        }
        Cmd::Concentration { trials, seed, out } => {
            let rows = run_bundled(trials, seed);
            let csv = results_csv(&rows);
            match out {
                Some(p) => fs::write(p, csv)?,
                None => print!("{csv}"),
            }
            if let Some(bad) = rows.iter().find(|r| !r.passed) {
                return Ok(Err(Refusal(3, serde_json::to_value(bad).expect("json"))));
            }
        }
    }
    Ok(Ok(()))
}
