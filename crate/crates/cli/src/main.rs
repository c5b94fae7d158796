//! `rwre`: long-range resistor networks on point processes.
//!
//! Exit codes: 0 success, 1 threshold failure, 2 usage error, 3 numeric
//! failure.

use clap::{Args, Parser, Subcommand};
use rwre_cli::config::Config;
use rwre_cli::plots::emit_plots;
use rwre_cli::runner::execute_suite;
use rwre_cli::suites::SuiteKind;
use rwre_core::comparison::{lift_flux, nearest_point_map, SparseFlux};
use rwre_core::flux::{CircleFlux, RenewalFlux1d};
use rwre_core::kernel::JumpKernel;
use rwre_core::network::{build_network, BuildOptions};
use rwre_core::pointproc::{
    circle_set, lattice_set, sample_diluted_crystal, sample_percolation_cluster, sample_ppp,
    PointSet,
};
use rwre_core::reduction::{cube_collapse, series_split, shell_collapse_2d};
use rwre_core::resistance::{box_resistance_profile, fit_growth, GrowthModel, ProfileOptions};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "rwre", version, about = "long-range resistor networks on point sets")]
struct Cli {
    /// Base RNG seed.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Worker threads (0 = all available).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Output directory for suite runs.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Configuration file (TOML sections of key = value).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a point configuration and write it as a points file.
    Sample(SampleArgs),
    /// Build a network and export its edge list (debugging aid).
    Build(BuildArgs),
    /// Compute a box resistance profile.
    Resist(ResistArgs),
    /// Run the reduction pipeline to a nearest-neighbor chain.
    Reduce(ReduceArgs),
    /// Lift an edge flux along the nearest-point map.
    Lift(LiftArgs),
    /// Build an explicit flux and its energy certificate.
    Flux(FluxArgs),
    /// Shell-band and lattice-walk criteria checks.
    Appendix(AppendixArgs),
    /// Run a named theorem suite with PASS/FAIL checks.
    Run(RunArgs),
    /// Fit a growth model to a profile CSV.
    Fit(FitArgs),
    /// Re-emit the plot CSV of a stored report.
    Plots(PlotsArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// ppp | diluted_crystal | percolation | lattice | circles
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.7)]
    p: f64,
    /// Box half-width (lattice/percolation use its integer part).
    #[arg(long = "box", default_value_t = 64.0)]
    box_half_width: f64,
    /// Shell cap for the circle set.
    #[arg(long, default_value_t = 64)]
    nmax: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    points: PathBuf,
    /// poly | stretched
    #[arg(long, default_value = "poly")]
    kernel: String,
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Truncation radius.
    #[arg(long)]
    cut: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ResistArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long, default_value = "poly")]
    kernel: String,
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Comma-separated box list.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long)]
    cut: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long, default_value_t = 1)]
    cell: usize,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Stages to run (cube,shell,split).
    #[arg(long, default_value = "cube,shell,split", value_delimiter = ',')]
    pipeline: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LiftArgs {
    /// Flux CSV: `source,<idx>` line then `i,j,value` rows.
    #[arg(long)]
    flux: PathBuf,
    /// Reference point set carrying the flux.
    #[arg(long)]
    s0: PathBuf,
    /// Target point set.
    #[arg(long)]
    s: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FluxArgs {
    /// renewal | circles
    #[arg(long)]
    mode: String,
    #[arg(long, default_value_t = 1.3)]
    delta: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    nmax: usize,
    #[arg(long, default_value_t = 16)]
    theta_samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AppendixArgs {
    /// bimbo (shell bands) | spitzer (type classification)
    #[arg(long)]
    check: String,
    /// circles | squares
    #[arg(long, default_value = "squares")]
    family: String,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 200)]
    max_n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// fegato | combine | treno1 | alex | appendixB
    suite: String,
}

#[derive(Args)]
struct FitArgs {
    /// Profile CSV (`seed,n,R,...` as written by resist, or plain `n,R`).
    #[arg(long = "in")]
    input: PathBuf,
    /// power | log | n_over_log | n_over_sqrtlog | loglog
    #[arg(long, default_value = "power")]
    model: String,
}

#[derive(Args)]
struct PlotsArgs {
    /// report.json produced by a suite run.
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global().ok();
    }
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numeric = e.downcast_ref::<rwre_core::Error>().map(|err| {
                matches!(
                    err,
                    rwre_core::Error::Solver { .. }
                        | rwre_core::Error::Quadrature(..)
                        | rwre_core::Error::Data(..)
                )
            });
            match numeric {
                Some(true) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn load_config(cli_seed: u64, path: &Option<PathBuf>) -> anyhow::Result<Config> {
    let mut cfg = match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    cfg.run.seed = cli_seed;
    Ok(cfg)
}

fn kernel_from(name: &str, dim: usize, alpha: f64, beta: f64) -> anyhow::Result<JumpKernel<f64>> {
    Ok(match name {
        "poly" => JumpKernel::poly(dim as u32, alpha)?,
        "stretched" | "stretched_exp" => JumpKernel::stretched_exp(beta)?,
        other => anyhow::bail!("unknown kernel kind {other}"),
    })
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Sample(a) => {
            let pts: PointSet<f64> = match a.kind.as_str() {
                "ppp" => sample_ppp(a.dim, a.lambda, a.box_half_width, cli.seed)?,
                "diluted_crystal" => {
                    let mut basis = vec![0.0; a.dim * a.dim];
                    for k in 0..a.dim {
                        basis[k * a.dim + k] = 1.0;
                    }
                    sample_diluted_crystal(a.dim, &basis, a.p, a.box_half_width, cli.seed, None)?
                }
                "percolation" | "percolation_cluster" => {
                    sample_percolation_cluster(a.dim, a.p, a.box_half_width as usize, cli.seed)?
                }
                "lattice" => lattice_set(a.dim, a.box_half_width as usize)?,
                "circles" => circle_set(a.nmax)?,
                other => anyhow::bail!("unknown process kind {other}"),
            };
            pts.write_path(&a.out)?;
            println!("wrote {} points to {}", pts.len(), a.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Build(a) => {
            let pts = Arc::new(PointSet::<f64>::read_path(&a.points)?);
            let kernel = kernel_from(&a.kernel, pts.dim(), a.alpha, a.beta)?;
            let net =
                build_network(&pts, &kernel, &BuildOptions { cut: a.cut, ..Default::default() })?;
            let mut out = String::from("i,j,conductance\n");
            for i in 0..net.node_count() {
                for j in 0..i {
                    let c = net.conductance(i, j);
                    if c > 0.0 {
                        out.push_str(&format!("{j},{i},{c}\n"));
                    }
                }
            }
            std::fs::write(&a.out, out)?;
            if let Some(d) = net.dropped_mass_bound() {
                println!("dropped conductance mass bound: {d:e}");
            }
            println!("wrote {} nodes to {}", net.node_count(), a.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Resist(a) => {
            let cfg = load_config(cli.seed, &cli.config)?;
            let pts = PointSet::<f64>::read_path(&a.points)?;
            let kernel = kernel_from(&a.kernel, pts.dim(), a.alpha, a.beta)?;
            let source =
                pts.nearest_to_origin().ok_or_else(|| anyhow::anyhow!("empty point set"))?;
            let opts = ProfileOptions {
                solve: rwre_core::resistance::SolveOptions {
                    tol: cfg.solver.tol,
                    dense_threshold: cfg.solver.dense_threshold,
                    method: None,
                    iter_budget_factor: cfg.solver.iter_budget_factor,
                },
                packed_budget: cfg.solver.packed_budget,
                cut: a.cut,
            };
            let profile = box_resistance_profile(&pts, &kernel, source, &a.n, &opts)?;
            let seed =
                pts.provenance().seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into());
            let mut out = String::from("seed,n,R,residual,method\n");
            for e in &profile.entries {
                out.push_str(&format!(
                    "{seed},{},{},{},{:?}\n",
                    e.n, e.resistance, e.residual, e.method
                ));
            }
            std::fs::write(&a.out, out)?;
            for skipped in &profile.skipped {
                eprintln!("warning: box {skipped} skipped (empty exterior)");
            }
            println!("wrote {} rows to {}", profile.entries.len(), a.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Reduce(a) => {
            let pts = PointSet::<f64>::read_path(&a.points)?;
            let coarse = cube_collapse(&pts, a.cell, a.alpha)?;
            let run_shell = a.pipeline.iter().any(|s| s == "shell");
            let run_split = a.pipeline.iter().any(|s| s == "split");
            if run_split {
                let shells = shell_collapse_2d(&coarse)?;
                let chain = series_split(&shells)?;
                let mut out = String::from("i,phi\n");
                for (i, phi) in chain.phi.iter().enumerate() {
                    out.push_str(&format!("{},{}\n", i + 1, phi));
                }
                std::fs::write(&a.out, out)?;
                println!("wrote chain of {} links to {}", chain.len(), a.out.display());
                return Ok(ExitCode::SUCCESS);
            }
            if run_shell {
                let shells = shell_collapse_2d(&coarse)?;
                let mut out = String::from("shell,sites,mass\n");
                for (idx, shell) in shells.shells.iter().enumerate() {
                    let mass: u64 = shell.iter().map(|s| s.1).sum();
                    out.push_str(&format!("{idx},{},{mass}\n", shell.len()));
                }
                std::fs::write(&a.out, out)?;
                return Ok(ExitCode::SUCCESS);
            }
            let mut out = String::from("site,gamma\n");
            for idx in 0..coarse.site_count() {
                if coarse.gamma[idx] > 0 {
                    let v = coarse.site(idx);
                    let coords: Vec<String> = v.iter().map(|c| c.to_string()).collect();
                    out.push_str(&format!("{},{}\n", coords.join(";"), coarse.gamma[idx]));
                }
            }
            std::fs::write(&a.out, out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Lift(a) => {
            let s0 = PointSet::<f64>::read_path(&a.s0)?;
            let s = PointSet::<f64>::read_path(&a.s)?;
            let text = std::fs::read_to_string(&a.flux)?;
            let mut flux: Option<SparseFlux<f64>> = None;
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') || line.starts_with("x_index") {
                    continue;
                }
                if let Some(rest) = line.strip_prefix("source,") {
                    flux = Some(SparseFlux::new(rest.trim().parse()?));
                    continue;
                }
                let f = flux
                    .as_mut()
                    .ok_or_else(|| anyhow::anyhow!("flux file must start with a source line"))?;
                let mut parts = line.split(',');
                let i: usize = parts.next().unwrap().trim().parse()?;
                let j: usize =
                    parts.next().ok_or_else(|| anyhow::anyhow!("bad flux row"))?.trim().parse()?;
                let v: f64 =
                    parts.next().ok_or_else(|| anyhow::anyhow!("bad flux row"))?.trim().parse()?;
                f.add(i, j, v);
            }
            let flux = flux.ok_or_else(|| anyhow::anyhow!("empty flux file"))?;
            let map = nearest_point_map(&s0, &s)?;
            let lifted = lift_flux(&flux, &map);
            let mut out = format!("source,{}\n", lifted.source);
            out.push_str("x_index,y_index,value\n");
            for (&(i, j), &v) in &lifted.edges {
                out.push_str(&format!("{i},{j},{v}\n"));
            }
            std::fs::write(&a.out, out)?;
            println!(
                "lifted {} edges onto {} nodes; divergence defect {:e}",
                lifted.edges.len(),
                s.len(),
                lifted.divergence_defect(s.len())
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Flux(a) => {
            match a.mode.as_str() {
                "renewal" => {
                    let path =
                        a.points.ok_or_else(|| anyhow::anyhow!("renewal mode needs --points"))?;
                    let pts = PointSet::<f64>::read_path(&path)?;
                    let flux = RenewalFlux1d::new(&pts, a.delta)?;
                    let kernel = JumpKernel::poly(1, a.alpha)?;
                    let n = flux.len() - 1;
                    let cert = flux.energy_certificate(&kernel, a.alpha, &[n / 2, n])?;
                    let json = serde_json::to_string_pretty(&cert)?;
                    match &a.out {
                        Some(p) => std::fs::write(p, &json)?,
                        None => println!("{json}"),
                    }
                    println!(
                        "divergence defect {:e}; verdict {:?}",
                        flux.divergence_defect(),
                        cert.verdict
                    );
                }
                "circles" => {
                    let flux =
                        CircleFlux::new(a.nmax, a.delta, a.alpha, a.theta_samples, cli.seed)?;
                    let cert = flux.comparison_certificate();
                    let json = serde_json::to_string_pretty(&cert)?;
                    match &a.out {
                        Some(p) => std::fs::write(p, &json)?,
                        None => println!("{json}"),
                    }
                    println!(
                        "shell recursion defect {:e}; verdict {:?}",
                        flux.shell_recursion_defect(),
                        cert.verdict
                    );
                }
                other => anyhow::bail!("unknown flux mode {other}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Appendix(a) => {
            match a.check.as_str() {
                "bimbo" | "shell-bands" => {
                    let family = match a.family.as_str() {
                        "circles" => rwre_core::certificates::ShellFamily::Circles,
                        "squares" => rwre_core::certificates::ShellFamily::Squares,
                        other => anyhow::bail!("unknown family {other}"),
                    };
                    let scan =
                        rwre_core::certificates::shell_band_scan(family, a.alpha, a.max_n)?;
                    let json = serde_json::to_string_pretty(&scan)?;
                    match &a.out {
                        Some(p) => std::fs::write(p, &json)?,
                        None => println!("{json}"),
                    }
                }
                "spitzer" => {
                    let ts: Vec<f64> = (2..=6).map(|k| 1.0 - 10f64.powi(-k)).collect();
                    let res = rwre_core::certificates::spitzer_integral(a.d, a.alpha, &ts)?;
                    let json = serde_json::to_string_pretty(&res)?;
                    match &a.out {
                        Some(p) => std::fs::write(p, &json)?,
                        None => println!("{json}"),
                    }
                }
                other => anyhow::bail!("unknown appendix check {other}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(a) => {
            let cfg = load_config(cli.seed, &cli.config)?;
            let kind = SuiteKind::parse(&a.suite).ok_or_else(|| {
                anyhow::anyhow!(
                    "unknown suite {}; expected one of fegato, combine, treno1, alex, appendixB",
                    a.suite
                )
            })?;
            let out_dir = cli.out_dir.join(kind.canonical_name());
            let outcome = execute_suite(kind, &cfg, &out_dir)?;
            Ok(if outcome.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Fit(a) => {
            let text = std::fs::read_to_string(&a.input)?;
            let mut profile: Vec<(usize, f64)> = Vec::new();
            for line in text.lines().skip(1) {
                let cols: Vec<&str> = line.split(',').collect();
                if cols.len() >= 2 {
                    let (ncol, rcol) = if cols.len() >= 3 { (1, 2) } else { (0, 1) };
                    if let (Ok(n), Ok(r)) = (cols[ncol].parse(), cols[rcol].parse()) {
                        profile.push((n, r));
                    }
                }
            }
            let model = match a.model.as_str() {
                "power" => GrowthModel::Power,
                "log" => GrowthModel::Log,
                "n_over_log" => GrowthModel::NOverLog,
                "n_over_sqrtlog" => GrowthModel::NOverSqrtLog,
                "loglog" => GrowthModel::LogLog,
                other => anyhow::bail!("unknown model {other}"),
            };
            let fit = fit_growth(&profile, model)?;
            println!("{}", serde_json::to_string_pretty(&fit)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Plots(a) => {
            let report: rwre_cli::report::SuiteReport =
                serde_json::from_str(&std::fs::read_to_string(&a.report)?)?;
            std::fs::write(&a.out, emit_plots(&report.plot))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
