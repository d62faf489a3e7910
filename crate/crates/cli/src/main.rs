use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use active_flux::bench::config::{apply_option, parse_config};
use active_flux::bench::output::{format_convergence_table, format_run_summary, format_si_summary};
use active_flux::bench::{convergence_study, registry_lookup, run, si_study, write_csv, write_si_csv, RunOptions};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "active-flux", version, about = "Active flux Euler solver with a smoothness indicator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one problem to its final time.
    Run(Flags),
    /// L1 density errors and observed orders under mesh refinement.
    Convergence(Flags),
    /// Smoothness indicator on several meshes, with decay rates.
    SiStudy(Flags),
}

#[derive(Args)]
struct Flags {
    /// Flat `key = value` file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// shock-entropy, shock-density, blast, sod or smooth-wave.
    #[arg(long)]
    problem: Option<String>,
    /// Cell count; a comma-separated list for the studies.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Default 0.25.
    #[arg(long)]
    cfl: Option<f64>,
    /// Minmod parameter, default 1.3.
    #[arg(long)]
    theta: Option<f64>,
    /// Indicator threshold factor; defaults to the problem's value.
    #[arg(long)]
    k: Option<f64>,
    /// density, momentum (default), energy or pressure.
    #[arg(long)]
    alpha: Option<String>,
    /// Post-processing strength in [0, 1], default 0.5.
    #[arg(long)]
    beta: Option<f64>,
    /// everywhere (default) or flagged.
    #[arg(long)]
    gate: Option<String>,
    /// Clamp density and pressure instead of failing.
    #[arg(long)]
    floor: bool,
    /// CSV file for `run`, directory for `si-study`, table CSV for `convergence`.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Resolved {
    problem: String,
    n_list: Vec<usize>,
    out: Option<PathBuf>,
    opts: RunOptions,
}

fn resolve(flags: &Flags, default_n: &str) -> Result<Resolved> {
    let mut settings = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_config(&text)?
        }
        None => Default::default(),
    };
    let mut set = |key: &str, value: Option<String>| {
        if let Some(v) = value {
            settings.insert(key.to_string(), v);
        }
    };
    set("problem", flags.problem.clone());
    set("n", flags.n.clone());
    set("t-end", flags.t_end.map(|x| x.to_string()));
    set("cfl", flags.cfl.map(|x| x.to_string()));
    set("theta", flags.theta.map(|x| x.to_string()));
    set("k", flags.k.map(|x| x.to_string()));
    set("alpha", flags.alpha.clone());
    set("beta", flags.beta.map(|x| x.to_string()));
    set("gate", flags.gate.clone());
    set("out", flags.out.as_ref().map(|p| p.display().to_string()));
    if flags.floor {
        set("floor", Some("true".into()));
    }

    let Some(problem) = settings.remove("problem") else {
        bail!("no problem given (use --problem or `problem =` in the config file)");
    };
    let n_text = settings.remove("n").unwrap_or_else(|| default_n.to_string());
    let n_list = n_text
        .split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("invalid cell count `{s}`")))
        .collect::<Result<Vec<_>>>()?;
    let out = settings.remove("out").map(PathBuf::from);
    let mut opts = RunOptions::default();
    for (key, value) in &settings {
        apply_option(&mut opts, key, value)?;
    }
    Ok(Resolved {
        problem,
        n_list,
        out,
        opts,
    })
}

fn single(n_list: &[usize]) -> Result<usize> {
    match n_list {
        [n] => Ok(*n),
        _ => bail!("`run` takes a single cell count"),
    }
}

fn write_table(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(flags) => {
            let r = resolve(&flags, "200")?;
            let spec = registry_lookup(&r.problem)?;
            let record = run(
                &spec,
                &RunOptions {
                    n: single(&r.n_list)?,
                    ..r.opts
                },
            )?;
            print!("{}", format_run_summary(&record));
            if let Some(path) = r.out {
                write_csv(&record, &path)?;
                println!("wrote {}", path.display());
            }
        }
        Command::Convergence(flags) => {
            let r = resolve(&flags, "64,128,256,512")?;
            let spec = registry_lookup(&r.problem)?;
            let rows = convergence_study(&spec, &r.n_list, &r.opts)?;
            print!("{}", format_convergence_table(&rows));
            if let Some(path) = r.out {
                let mut csv = String::from("n,dx,l1_error,order\n");
                for row in &rows {
                    let order = row.order.map(|o| format!("{o:.16e}")).unwrap_or_default();
                    csv.push_str(&format!("{},{:.16e},{:.16e},{}\n", row.n, row.dx, row.l1_error, order));
                }
                write_table(&path, csv)?;
                println!("wrote {}", path.display());
            }
        }
        Command::SiStudy(flags) => {
            let r = resolve(&flags, "100,200,400,800")?;
            let spec = registry_lookup(&r.problem)?;
            let study = si_study(&spec, &r.n_list, &r.opts)?;
            print!("{}", format_si_summary(&study));
            if let Some(dir) = r.out {
                fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                for record in &study.runs {
                    let path = dir.join(format!("{}_{}.csv", spec.name, record.n));
                    write_si_csv(record, &path)?;
                    println!("wrote {}", path.display());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
