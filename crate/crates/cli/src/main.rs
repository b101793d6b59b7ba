use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use r13fem::config::{self, RunConfig};
use r13fem::driver::{convergence_on, kn_sweep, run};
use r13fem::fespace::Component;
use r13fem::postproc::{line_sample, nodal_table, write_csv, write_vtk, Table};

#[derive(Parser)]
#[command(name = "r13fem", version, about = "Linearized R13 equations with mixed finite elements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble and solve one problem, write VTK and nodal CSV.
    Solve(Common),
    /// Errors of a mesh series against the finest solve, written to errors.csv.
    Convergence(Common),
    /// Mass flow through one boundary over a list of Knudsen numbers.
    KnSweep(Common),
    /// Line profiles of selected components.
    Sample(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the Knudsen number.
    #[arg(long)]
    kn: Option<f64>,
    /// Directory for all written files.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(c: &Common) -> Result<RunConfig> {
    let mut cfg = config::load(&c.config).with_context(|| format!("invalid config {}", c.config.display()))?;
    if let Some(kn) = c.kn {
        if !(kn > 0.0) {
            bail!("--kn must be positive, got {kn}");
        }
        cfg.set_kn(kn);
    }
    if let Some(out) = &c.out {
        cfg.output.dir = Some(out.clone());
    }
    if let Some(dir) = &cfg.output.dir {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    Ok(cfg)
}

fn threads_from_env() -> Result<()> {
    if let Ok(v) = std::env::var("R13FEM_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("R13FEM_THREADS must be a positive integer, got '{v}'"))?;
        if n == 0 {
            bail!("R13FEM_THREADS must be a positive integer, got 0");
        }
        r13fem::system::set_threads(n);
    }
    Ok(())
}

fn write_table(cfg: &RunConfig, table: &Table, name: &Path) -> Result<PathBuf> {
    let path = cfg.output.resolve(name);
    write_csv(table, &path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

fn solve(cfg: &RunConfig) -> Result<()> {
    let out = run(&cfg.spec, &cfg.solve)?;
    let sol = &out.solution;
    println!("case      {}", cfg.spec.name);
    println!("cells     {}", sol.mesh().n_cells());
    println!("dofs      {}", sol.coeffs().len());
    println!("t_setup   {:.3} s", out.t_setup);
    println!("t_a       {:.3} s", out.t_assemble);
    println!("t_s       {:.3} s", out.t_solve);
    println!("residual  {:.3e}", out.report.residual);
    println!("cond est  {:.3e}", out.report.condition_estimate);
    let vtk = cfg.output.resolve(cfg.output.vtk.as_deref().unwrap_or(Path::new("solution.vtk")));
    write_vtk(sol, &vtk).with_context(|| format!("cannot write {}", vtk.display()))?;
    println!("wrote     {}", vtk.display());
    let csv = write_table(cfg, &nodal_table(sol), cfg.output.csv.as_deref().unwrap_or(Path::new("solution.csv")))?;
    println!("wrote     {}", csv.display());
    Ok(())
}

fn convergence(cfg: &RunConfig) -> Result<()> {
    let Some(conv) = &cfg.convergence else {
        bail!("config has no [convergence] section");
    };
    let study = convergence_on(&cfg.spec, &conv.coarse, &conv.reference, &cfg.solve)?;
    let path = write_table(cfg, &study.table(), &conv.csv)?;
    println!("{:8} {:>8} {:>8}", "field", "L2 rate", "linf rate");
    for c in Component::ALL {
        println!("{:8} {:8.2} {:8.2}", c.name(), study.l2_slope(c), study.linf_slope(c));
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn sweep(cfg: &RunConfig) -> Result<()> {
    let flows = kn_sweep(&cfg.spec, &cfg.sweep.kn, cfg.sweep.tag, &cfg.solve)?;
    let mut table = Table::new(["kn", "mass_flow"]);
    for &(kn, j) in &flows {
        println!("Kn {kn:<10} J {j:.6}");
        table.push(vec![kn, j]);
    }
    if let Some(&(kn, _)) = flows.iter().min_by(|a, b| a.1.total_cmp(&b.1)) {
        println!("minimum at Kn = {kn}");
    }
    let path = write_table(cfg, &table, &cfg.sweep.csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn sample(cfg: &RunConfig) -> Result<()> {
    if cfg.samples.is_empty() {
        bail!("config has no [[sample]] entries");
    }
    let out = run(&cfg.spec, &cfg.solve)?;
    for s in &cfg.samples {
        let mut headers = vec!["s".to_string(), "x".to_string(), "y".to_string()];
        headers.extend(s.components.iter().map(|c| c.name().to_string()));
        let columns = s
            .components
            .iter()
            .map(|&c| line_sample(&out.solution, s.p0, s.p1, s.n, c))
            .collect::<Result<Vec<_>, _>>()?;
        let mut table = Table::new(headers);
        for i in 0..s.n {
            let t = i as f64 / (s.n - 1) as f64;
            let mut row = vec![
                columns.first().map_or(0.0, |c| c[i].0),
                s.p0[0] + t * (s.p1[0] - s.p0[0]),
                s.p0[1] + t * (s.p1[1] - s.p0[1]),
            ];
            row.extend(columns.iter().map(|c| c[i].1));
            table.push(row);
        }
        let path = write_table(cfg, &table, &s.csv)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads_from_env().and_then(|()| match &cli.command {
        Command::Solve(c) => load(c).and_then(|cfg| solve(&cfg)),
        Command::Convergence(c) => load(c).and_then(|cfg| convergence(&cfg)),
        Command::KnSweep(c) => load(c).and_then(|cfg| sweep(&cfg)),
        Command::Sample(c) => load(c).and_then(|cfg| sample(&cfg)),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
