//! Command-line front end for the experiment drivers.

use clap::{Parser, Subcommand};
use nodalsym::experiments::{self, SolveConfig, SweepConfig};
use nodalsym::geometry::DomainSpec;
use nodalsym::oracles;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nodalsym", about = "Neumann eigenfunctions, parity and nodal domains on symmetric planar domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one domain and dump eigenvalues plus VTK eigenfunctions.
    Eig {
        /// Domain as inline JSON or `builtin:<name>`.
        #[arg(long, default_value = "builtin:disk")]
        domain: String,
        #[arg(long, default_value_t = 0.05)]
        h: f64,
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 20177)]
        seed: u64,
        /// Uniform refinement passes after generation.
        #[arg(long, default_value_t = 0)]
        refine: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Disk reference table: FEM vs. Bessel oracle, parity, nodal counts.
    DiskTable {
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 0.02)]
        h: f64,
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        refine: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wheel epsilon sweep with the Step 1/2 assertions.
    Sweep {
        #[arg(long, default_value_t = 1.0)]
        r1: f64,
        #[arg(long, default_value_t = 2.0)]
        r2: f64,
        #[arg(long, default_value_t = 3.0)]
        r3: f64,
        /// Comma-separated descending epsilon list.
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 20177)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Symmetry-principle verdict per builtin domain.
    Census {
        /// Comma-separated builtin names; defaults to all.
        #[arg(long, value_delimiter = ',')]
        domains: Vec<String>,
        #[arg(long, default_value_t = 0.05)]
        h: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 20177)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Passage-piece monotonicity table across epsilon.
    Step3 {
        #[arg(long, default_value_t = 1.0)]
        r1: f64,
        #[arg(long, default_value_t = 2.0)]
        r2: f64,
        #[arg(long, default_value_t = 3.0)]
        r3: f64,
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 20177)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Table of Bessel derivative zeros `j'_{k,m}`.
    BesselZeros {
        #[arg(long, default_value_t = 5)]
        kmax: u32,
        #[arg(long, default_value_t = 5)]
        mmax: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_domain(s: &str) -> Result<DomainSpec, String> {
    if let Some(name) = s.strip_prefix("builtin:") {
        return experiments::builtin(name).ok_or_else(|| {
            format!("unknown builtin '{name}'; available: {}", experiments::BUILTIN_NAMES.join(", "))
        });
    }
    DomainSpec::from_json(s).map_err(|e| format!("invalid domain JSON: {e}"))
}

fn run() -> Result<bool, String> {
    match Cli::parse().command {
        Command::Eig { domain, h, k, tol, seed, refine, out } => {
            let spec = parse_domain(&domain)?;
            let cfg = SolveConfig { h, k, tol, seed, refine };
            let solve = experiments::solve_domain(&spec, &cfg).map_err(|e| e.to_string())?;
            println!("dof {}  h {}", solve.dof(), solve.mesh.target_h);
            for (i, (mu, res)) in
                solve.eigen.eigenvalues.iter().zip(&solve.eigen.residuals).enumerate()
            {
                println!("mu_{:<2} {:>18.12}  residual {:.3e}", i + 1, mu, res);
            }
            if let Some(dir) = out {
                solve.write_outputs(&dir, "eig").map_err(|e| e.to_string())?;
                println!("wrote {}", dir.display());
            }
            Ok(true)
        }
        Command::DiskTable { r, h, k, refine, out } => {
            let table = experiments::run_disk_table(r, h, k, refine, out.as_deref())
                .map_err(|e| e.to_string())?;
            println!("disk r={r} h={} dof={}", table.h, table.dof);
            println!("{:<5} {:>16} {:>16} {:>9} {:>6} {:>6} {:>6}",
                "index", "mu_fem", "mu_exact", "rel_err", "parity", "nodal", "inner");
            for row in &table.rows {
                println!(
                    "{:<5} {:>16.10} {:>16.10} {:>9.2e} {:>6} {:>6} {:>6}",
                    row.index, row.mu_fem, row.mu_exact, row.rel_error,
                    row.parity.to_string(), row.nodal_count, row.has_inner_domain
                );
            }
            Ok(true)
        }
        Command::Sweep { r1, r2, r3, eps, tol, seed, out } => {
            let eps = if eps.is_empty() { experiments::default_eps_sweep() } else { eps };
            let cfg = SweepConfig { r1, r2, r3, eps, tol, seed };
            let report = experiments::run_epsilon_sweep(&cfg);
            println!("{:<6} {:>8} {:>14} {:>7} {:>14} {:>12} {:>12} {:>5} {:>5}",
                "eps", "dof", "mu2", "verdict", "step1_bound", "nu1_gt", "nu1_wedge", "nodal", "hub");
            for row in &report.rows {
                if let Some(err) = &row.error {
                    println!("{:<6} failed: {err}", row.eps);
                    continue;
                }
                println!(
                    "{:<6} {:>8} {:>14.8} {:>7} {:>14.8} {:>12.6} {:>12.6} {:>5} {:>5}",
                    row.eps, row.dof, row.mu2, row.verdict.to_string(), row.step1_bound,
                    row.nu1_gt, row.nu1_wedge, row.nodal_count, row.hub_concentrated
                );
            }
            match report.eps_star {
                Some(e) => println!("eps* = {e} (largest Even verdict)"),
                None => println!("no Even verdict in the swept range"),
            }
            for c in &report.checks {
                println!("[{}] {}: {}", if c.pass { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
                report.write_csv(&dir.join("sweep.csv")).map_err(|e| e.to_string())?;
                experiments::write_json(&report, &dir.join("verdicts.json"))
                    .map_err(|e| e.to_string())?;
                println!("wrote {}", dir.display());
            }
            Ok(report.passed())
        }
        Command::Census { domains, h, tol, seed, out } => {
            let names: Vec<String> = if domains.is_empty() {
                experiments::BUILTIN_NAMES.iter().map(|s| s.to_string()).collect()
            } else {
                domains
            };
            let mut specs = Vec::new();
            for name in &names {
                let spec = experiments::builtin(name)
                    .ok_or_else(|| format!("unknown builtin '{name}'"))?;
                specs.push((name.clone(), spec));
            }
            let report = experiments::run_principle_census(&specs, h, tol, seed)
                .map_err(|e| e.to_string())?;
            println!("{:<10} {:>8} {:>14} {:>5} {:>4} {:>7} {:>6} {:>15}",
                "domain", "dof", "mu2", "even", "odd", "verdict", "nodal", "ring");
            for row in &report.rows {
                println!(
                    "{:<10} {:>8} {:>14.8} {:>5} {:>4} {:>7} {:>6} {:>15}",
                    row.name, row.dof, row.mu2, row.even_dim, row.odd_dim,
                    if row.holds { "HOLDS" } else { "FAILS" }, row.nodal_count,
                    format!("{:?}", row.ring)
                );
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
                report.write_csv(&dir.join("census.csv")).map_err(|e| e.to_string())?;
                experiments::write_json(&report, &dir.join("verdicts.json"))
                    .map_err(|e| e.to_string())?;
                println!("wrote {}", dir.display());
            }
            Ok(true)
        }
        Command::Step3 { r1, r2, r3, eps, tol, seed, out } => {
            let eps = if eps.is_empty() { experiments::default_eps_sweep() } else { eps };
            let report = experiments::step3_monotonicity(r1, r2, r3, &eps, tol, seed)
                .map_err(|e| e.to_string())?;
            println!("{:<6} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
                "eps", "nu1_V+", "nu1_S", "nu1_A", "nu1_W", "nu1_gt", "nu1_wedge");
            for row in &report.rows {
                println!(
                    "{:<6} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
                    row.eps, row.nu1_vplus, row.nu1_s, row.nu1_a, row.nu1_w,
                    row.nu1_gt, row.nu1_wedge
                );
            }
            for c in &report.checks {
                println!("[{}] {}: {}", if c.pass { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
                report.write_csv(&dir.join("step3.csv")).map_err(|e| e.to_string())?;
                experiments::write_json(&report, &dir.join("verdicts.json"))
                    .map_err(|e| e.to_string())?;
                println!("wrote {}", dir.display());
            }
            Ok(report.passed())
        }
        Command::BesselZeros { kmax, mmax, out } => {
            let mut lines = vec!["k,m,zero".to_string()];
            for k in 0..=kmax {
                for m in 1..=mmax {
                    let z = oracles::bessel_deriv_zero(k, m).map_err(|e| e.to_string())?;
                    lines.push(format!("{k},{m},{z:.15}"));
                }
            }
            let text = lines.join("\n");
            println!("{text}");
            if let Some(path) = out {
                let mut f = std::fs::File::create(&path).map_err(|e| e.to_string())?;
                writeln!(f, "{text}").map_err(|e| e.to_string())?;
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
