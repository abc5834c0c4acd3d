//! Command-line harness around the library: solver runs, sweeps, and
//! diagnostic probes, all driven by one sectioned config file. Artifacts
//! land in the --out directory; every write is atomic.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nlskp::config::{RunConfig, schedule};
use nlskp::dump::{FieldDump, read_field, write_field};
use nlskp::error::{Error, Result};
use nlskp::grenier::residual_phamd;
use nlskp::invariants::{invariant_report, kdv_invariants};
use nlskp::limit::{KdvSoliton, LimitRunSpec, LimitState, simulate_limit};
use nlskp::madelung::{PolarState, polar_decompose};
use nlskp::nls::{NlsRunSpec, NlsState, simulate_nls, soliton_field};
use nlskp::profiles::{Profile, build_initial_data};
use nlskp::report::{
    limit_series_csv, manifest_csv, nls_series_csv, residual_csv, transport_csv, write_atomic,
};
use nlskp::spectral::{l2_distance, l2_distance_complex, spectral_derivative};
use nlskp::sweep::{SweepConfig, run_convergence_sweep};
use nlskp::transport::{TransportHorizon, window_norm_scaling};

#[derive(Parser)]
#[command(
    name = "nlskp",
    version,
    about = "Pseudospectral runs and diagnostics for long-wave limits of \
             nonlinear Schrodinger flows on a nonzero background"
)]
struct Cli {
    /// Sectioned key = value config file; built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for reports and field dumps.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for eps-parallel sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Offset mixed into random-profile seeds.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the wavefunction; dump snapshots, a manifest, invariants.
    SimulateNls,
    /// Evolve the one-dimensional limit equation from the configured datum.
    SimulateKdv,
    /// Evolve the two-dimensional limit equation from the configured datum.
    SimulateKpi,
    /// Convergence sweep across eps pairing both solvers.
    Sweep,
    /// Invariant report of one dumped field.
    Invariants {
        /// Dump file to analyze.
        #[arg(long = "in")]
        input: PathBuf,
        /// Scaling parameter; falls back to [run] eps.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Windowed free-transport bound across eps.
    TransportProbe {
        /// eps values to probe; falls back to [sweep] eps_list.
        #[arg(long = "eps")]
        eps: Vec<f64>,
        /// Window half-width; falls back to [transport] R, then L/8.
        #[arg(long = "R")]
        r: Option<f64>,
        /// Horizon; falls back to [transport] T, then one traversal.
        #[arg(long = "T")]
        t: Option<f64>,
    },
    /// Hydrodynamic residual certificate of a dumped trajectory.
    HydroCheck {
        /// Directory holding manifest.csv and the referenced dumps.
        #[arg(long)]
        traj: PathBuf,
        /// Scaling parameter; falls back to [run] eps.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Soliton propagation oracles for both solvers.
    SolitonCheck,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    std::fs::create_dir_all(&cli.out).map_err(|e| Error::io(&cli.out, e))?;
    match &cli.command {
        Command::SimulateNls => simulate_nls_cmd(&cfg, &cli),
        Command::SimulateKdv => simulate_limit_cmd(&cfg, &cli, 1),
        Command::SimulateKpi => simulate_limit_cmd(&cfg, &cli, 2),
        Command::Sweep => sweep_cmd(&cfg, &cli),
        Command::Invariants { input, eps } => invariants_cmd(&cfg, &cli, input, *eps),
        Command::TransportProbe { eps, r, t } => transport_cmd(&cfg, &cli, eps, *r, *t),
        Command::HydroCheck { traj, eps } => hydro_cmd(&cfg, &cli, traj, *eps),
        Command::SolitonCheck => soliton_cmd(&cfg, &cli),
    }
}

/// Applies the CLI seed offset to a random profile, once.
fn seeded_initial(cfg: &RunConfig, seed: u64) -> Result<nlskp::profiles::InitialDataConfig> {
    let mut initial = cfg.initial.build()?;
    if let Profile::RandomBandLimited { seed: s, .. } = &mut initial.profile {
        *s = s.wrapping_add(seed);
    }
    Ok(initial)
}

fn write_report(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}

// ─── simulate-nls ───────────────────────────────────────────────────────

fn simulate_nls_cmd(cfg: &RunConfig, cli: &Cli) -> Result<()> {
    let grid = cfg.grid.build()?;
    let eps = cfg.run.eps;
    let model = cfg.model.clone();
    let data = build_initial_data(&grid, &seeded_initial(cfg, cli.seed)?, eps, &model)?;

    let (dt, stride) = schedule(cfg.run.t_final, cfg.run.dt, cfg.run.snapshots);
    let spec = NlsRunSpec { t_final: cfg.run.t_final, dt, snapshot_stride: stride };
    let traj = simulate_nls(NlsState::new(data.psi0, eps, model)?, &spec)?;

    let mut manifest = Vec::new();
    for (i, state) in traj.snapshots.iter().enumerate() {
        let name = format!("state_{i:06}.nlskp");
        write_field(&cli.out.join(&name), &FieldDump::Complex(state.psi.clone()))?;
        manifest.push((i, state.t, name));
    }
    write_report(&cli.out.join("manifest.csv"), &manifest_csv(&manifest))?;
    write_report(&cli.out.join("invariants.csv"), &nls_series_csv(&traj.series))?;

    let first = &traj.series[0];
    let last = traj.series.last().unwrap();
    println!(
        "t = {}: {} snapshots, energy drift {:.3e}, momentum drift {:.3e}",
        last.t,
        traj.snapshots.len(),
        (last.energy - first.energy).abs(),
        (last.momentum - first.momentum).abs()
    );
    Ok(())
}

// ─── simulate-kdv / simulate-kpi ────────────────────────────────────────

fn simulate_limit_cmd(cfg: &RunConfig, cli: &Cli, dim: usize) -> Result<()> {
    let grid = cfg.grid.build()?;
    if grid.dim() != dim {
        return Err(Error::Config(format!(
            "this solver needs a {dim}d grid, config has {}d",
            grid.dim()
        )));
    }
    let eps = cfg.run.eps;
    let model = cfg.model.clone();
    let data = build_initial_data(&grid, &seeded_initial(cfg, cli.seed)?, eps, &model)?;

    let (dt, stride) = schedule(cfg.run.t_final, cfg.run.dt, cfg.run.snapshots);
    let spec = LimitRunSpec { t_final: cfg.run.t_final, dt, snapshot_stride: stride };
    let traj = simulate_limit(LimitState::new(data.limit_v0, model.c(), model.k()), &spec)?;

    let mut manifest = Vec::new();
    for (i, state) in traj.snapshots.iter().enumerate() {
        let name = format!("state_{i:06}.nlskp");
        write_field(&cli.out.join(&name), &FieldDump::Scalar(state.v.clone()))?;
        manifest.push((i, state.t, name));
    }
    write_report(&cli.out.join("manifest.csv"), &manifest_csv(&manifest))?;
    write_report(&cli.out.join("invariants.csv"), &limit_series_csv(&traj.series))?;

    let first = &traj.series[0];
    let last = traj.series.last().unwrap();
    println!(
        "t = {}: {} snapshots, I0 drift {:.3e}, I1 drift {:.3e}",
        last.t,
        traj.snapshots.len(),
        (last.i0 - first.i0).abs(),
        (last.i1 - first.i1).abs()
    );
    Ok(())
}

// ─── sweep ──────────────────────────────────────────────────────────────

fn sweep_cmd(cfg: &RunConfig, cli: &Cli) -> Result<()> {
    let sweep = SweepConfig::from_run_config(cfg, cli.seed, cli.threads)?;
    let report = run_convergence_sweep(&sweep)?;

    write_report(&cli.out.join("summary.csv"), &report.summary_csv())?;
    write_report(&cli.out.join("orders.csv"), &report.orders_csv())?;
    for branch in &report.branches {
        if branch.aborted.is_some() {
            continue;
        }
        let name = format!("branch_eps{}.dat", branch.eps);
        write_report(&cli.out.join(name), &report.branch_plotdata(branch))?;
    }

    println!("family size diagnostic M = {}", report.m_family());
    for b in &report.branches {
        match &b.aborted {
            Some(reason) => println!("eps = {}: aborted ({reason})", b.eps),
            None => println!(
                "eps = {}: sup_t err_L2 = {:.6e}, nu = {:.6e}",
                b.eps, b.sup_err_l2, b.nu_sup
            ),
        }
    }
    for o in &report.orders_l2 {
        println!(
            "order(L2) between eps = {} and {}: {:.3}",
            o.eps_pair.0, o.eps_pair.1, o.order
        );
    }
    Ok(())
}

// ─── invariants ─────────────────────────────────────────────────────────

fn invariants_cmd(cfg: &RunConfig, cli: &Cli, input: &Path, eps: Option<f64>) -> Result<()> {
    let eps = eps.unwrap_or(cfg.run.eps);
    let model = cfg.model.clone();
    match read_field(input)? {
        FieldDump::Scalar(v) => {
            let (i0, i1) = kdv_invariants(&v, model.c(), model.k());
            println!("I0 = {i0}");
            println!("I1 = {i1}");
            write_report(&cli.out.join("invariants_report.csv"), &format!("I0,I1\n{i0},{i1}\n"))
        }
        FieldDump::Complex(psi) => {
            let r = invariant_report(&psi, eps, &model)?;
            println!("mass = {}", r.mass);
            println!("E_eps = {}", r.e_eps);
            println!("P_eps = {}", r.p_eps);
            println!("E - 2cP = {}", r.e_minus_2cp);
            println!("E + 2cP = {}", r.e_plus_2cp);
            println!("I0 = {}", r.i0);
            println!("I1 = {}", r.i1);
            println!("energy expansion residual = {:.6e}", r.residual_energy);
            println!("momentum expansion residual = {:.6e}", r.residual_momentum);
            println!("combined expansion residual = {:.6e}", r.residual_energy_minus);
            let csv = format!(
                "mass,E_eps,P_eps,E_minus_2cP,E_plus_2cP,I0,I1,res_energy,res_momentum,res_combined\n\
                 {},{},{},{},{},{},{},{},{},{}\n",
                r.mass,
                r.e_eps,
                r.p_eps,
                r.e_minus_2cp,
                r.e_plus_2cp,
                r.i0,
                r.i1,
                r.residual_energy,
                r.residual_momentum,
                r.residual_energy_minus
            );
            write_report(&cli.out.join("invariants_report.csv"), &csv)
        }
    }
}

// ─── transport-probe ────────────────────────────────────────────────────

fn transport_cmd(
    cfg: &RunConfig,
    cli: &Cli,
    eps_flag: &[f64],
    r_flag: Option<f64>,
    t_flag: Option<f64>,
) -> Result<()> {
    let grid = cfg.grid.build()?;
    let model = cfg.model.clone();
    // The streamed pair (A0, u0) is built once at the configured run eps;
    // the probe's eps list only sets streaming speed and bound scaling.
    let data = build_initial_data(&grid, &seeded_initial(cfg, cli.seed)?, cfg.run.eps, &model)?;
    let a0 = data.polar0.amp.clone();
    let dphi = spectral_derivative(&data.polar0.phi, 0, 1)?;
    let u0 = dphi.map(|d| d / (2.0 * model.c()));

    let eps_list: Vec<f64> =
        if eps_flag.is_empty() { cfg.sweep.eps_list.clone() } else { eps_flag.to_vec() };
    let r = r_flag.or(cfg.transport.r).unwrap_or(grid.lengths()[0] / 8.0);
    let horizon = match t_flag.or(cfg.transport.t) {
        Some(t) => TransportHorizon::Fixed(t),
        None => TransportHorizon::Traversal,
    };

    let report = window_norm_scaling(&a0, &u0, &eps_list, horizon, r, cfg.transport.allow_wrap)?;
    for row in &report.rows {
        println!(
            "eps = {}: window integral {:.6e} <= bound {:.6e} (ratio {:.4})",
            row.eps, row.window_integral, row.bound, row.ratio
        );
    }
    write_report(&cli.out.join("transport.csv"), &transport_csv(&report))
}

// ─── hydro-check ────────────────────────────────────────────────────────

fn read_manifest(dir: &Path) -> Result<Vec<(f64, PathBuf)>> {
    let path = dir.join("manifest.csv");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.splitn(3, ',').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "{}: line {}: want 'index,t,file'",
                path.display(),
                lineno + 1
            )));
        }
        let t: f64 = parts[1].parse().map_err(|_| {
            Error::Config(format!("{}: line {}: bad time '{}'", path.display(), lineno + 1, parts[1]))
        })?;
        entries.push((t, dir.join(parts[2].trim())));
    }
    Ok(entries)
}

fn hydro_cmd(cfg: &RunConfig, cli: &Cli, traj: &Path, eps: Option<f64>) -> Result<()> {
    let eps = eps.unwrap_or(cfg.run.eps);
    let model = cfg.model.clone();
    let mut frames: Vec<(f64, PolarState)> = Vec::new();
    for (t, path) in read_manifest(traj)? {
        let psi = match read_field(&path)? {
            FieldDump::Complex(psi) => psi,
            FieldDump::Scalar(_) => {
                return Err(Error::Dump(format!(
                    "{}: hydro-check wants complex snapshots",
                    path.display()
                )));
            }
        };
        frames.push((t, polar_decompose(&psi, eps)?));
    }
    let rows = residual_phamd(&frames, &model)?;
    let worst = rows
        .iter()
        .fold((0.0_f64, 0.0_f64), |(a, p), r| (a.max(r.amplitude), p.max(r.phase)));
    println!(
        "{} interior frames: max amplitude residual {:.6e}, max phase residual {:.6e}",
        rows.len(),
        worst.0,
        worst.1
    );
    write_report(&cli.out.join("residuals.csv"), &residual_csv(&rows))
}

// ─── soliton-check ──────────────────────────────────────────────────────

fn soliton_cmd(cfg: &RunConfig, cli: &Cli) -> Result<()> {
    let grid = cfg.grid.build()?;
    if grid.dim() != 1 {
        return Err(Error::Config("soliton-check needs a 1d grid".into()));
    }
    let model = cfg.model.clone();
    let eps = cfg.run.eps;
    let t_final = cfg.run.t_final;

    // wavefunction side: exact traveling dark soliton (Gross-Pitaevskii
    // profile; the check is meaningful only for that model)
    let (dt, _) = schedule(t_final, cfg.run.dt, 1);
    let psi0 = soliton_field(&grid, eps, 0.0)?;
    let spec = NlsRunSpec { t_final, dt, snapshot_stride: usize::MAX };
    let traj = simulate_nls(NlsState::new(psi0, eps, model.clone())?, &spec)?;
    let exact = soliton_field(&grid, eps, t_final)?;
    let nls_err = l2_distance_complex(&traj.snapshots.last().unwrap().psi, &exact);
    println!("dark soliton: L2 error vs exact translate at t = {t_final}: {nls_err:.6e}");

    // limit side: sech^2 soliton with width tied to the configured profile
    let b = 1.0 / cfg.initial.width;
    let soliton = KdvSoliton::new(model.c(), model.k(), b);
    let v0 = soliton.field(&grid, 0.0);
    let lspec = LimitRunSpec { t_final, dt, snapshot_stride: usize::MAX };
    let ltraj = simulate_limit(LimitState::new(v0, model.c(), model.k()), &lspec)?;
    let kdv_err = l2_distance(&ltraj.snapshots.last().unwrap().v, &soliton.field(&grid, t_final));
    println!("limit soliton: L2 shape error at t = {t_final}: {kdv_err:.6e}");

    let csv = format!("check,t_final,l2_error\nnls_dark_soliton,{t_final},{nls_err}\nkdv_soliton,{t_final},{kdv_err}\n");
    write_report(&cli.out.join("soliton_check.csv"), &csv)
}
