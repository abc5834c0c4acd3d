//! End-to-end checks of the `nlskp` binary: config rejection, artifact
//! layout of the run commands, dump read-back, and seeded reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_nlskp");

/// Unique scratch directory, removed on drop.
struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("nlskp-cli-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary must launch")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_ok(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed\nstdout: {}\nstderr: {}",
        stdout(out),
        stderr(out)
    );
}

/// Data rows of a CSV file (header skipped), split on commas.
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|s| s.trim().to_string()).collect())
        .collect()
}

// ─── config handling ────────────────────────────────────────────────────

#[test]
fn bad_configs_exit_nonzero_with_a_pointed_message() {
    let s = Scratch::new("badcfg");

    let typo = s.write("typo.cfg", "[grid]\nn_x = 128\n");
    let out = run(&["--config", typo.to_str().unwrap(), "simulate-nls"]);
    assert!(!out.status.success(), "typo config must be rejected");
    assert!(stderr(&out).contains("n_x"), "message should name the bad key: {}", stderr(&out));

    let cap = s.write("cap.cfg", "[run]\ndt = 1e-2\ndt_max = 1e-3\n");
    let out = run(&["--config", cap.to_str().unwrap(), "simulate-nls"]);
    assert!(!out.status.success(), "dt above dt_max must be rejected");
    assert!(stderr(&out).contains("dt_max"), "message should name dt_max: {}", stderr(&out));

    let missing = s.path("nope.cfg");
    let out = run(&["--config", missing.to_str().unwrap(), "simulate-nls"]);
    assert!(!out.status.success(), "missing config file must be rejected");
}

#[test]
fn dimension_mismatch_is_rejected() {
    let s = Scratch::new("dim");
    // 1d grid but the 2d limit solver
    let cfg = s.write("one_d.cfg", "[grid]\ndimension = 1\nnx = 64\n");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        s.path("out").to_str().unwrap(),
        "simulate-kpi",
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("2d grid"), "got: {}", stderr(&out));
}

// ─── simulate-nls artifacts + read-back pipeline ────────────────────────

#[test]
fn nls_run_then_invariants_then_hydro_check() {
    let s = Scratch::new("pipeline");
    let cfg = s.write(
        "run.cfg",
        "[grid]\n\
         dimension = 1\n\
         nx = 128\n\
         lx = 50.26548245743669\n\
         [run]\n\
         eps = 0.1\n\
         t_final = 0.02\n\
         dt = 1e-3\n\
         snapshots = 4\n\
         [initial]\n\
         profile = sech2\n\
         amplitude = -0.3\n\
         width = 1.2\n",
    );
    let outdir = s.path("out");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
        "simulate-nls",
    ]);
    assert_ok(&out, "simulate-nls");

    // manifest rows reference existing dump files, uniformly spaced in t
    let manifest = csv_rows(&outdir.join("manifest.csv"));
    assert!(manifest.len() >= 5, "want >= 5 snapshots, got {}", manifest.len());
    let times: Vec<f64> = manifest.iter().map(|r| r[1].parse().unwrap()).collect();
    let dt0 = times[1] - times[0];
    for w in times.windows(2) {
        assert!(((w[1] - w[0]) - dt0).abs() < 1e-12, "snapshots not uniform: {times:?}");
    }
    for row in &manifest {
        assert!(outdir.join(&row[2]).is_file(), "missing dump {}", row[2]);
    }

    // invariant series: one row per snapshot, drift-free at this scale
    let series = csv_rows(&outdir.join("invariants.csv"));
    assert_eq!(series.len(), manifest.len());
    let e: Vec<f64> = series.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!((e[0] - e[e.len() - 1]).abs() <= 1e-8 * e[0].abs().max(1.0));

    // read one dump back through the invariants subcommand
    let dump = outdir.join(&manifest[0][2]);
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
        "invariants",
        "--in",
        dump.to_str().unwrap(),
    ]);
    assert_ok(&out, "invariants");
    assert!(stdout(&out).contains("E_eps"), "got: {}", stdout(&out));
    assert!(outdir.join("invariants_report.csv").is_file());

    // residual certificate over the dumped trajectory
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
        "hydro-check",
        "--traj",
        outdir.to_str().unwrap(),
    ]);
    assert_ok(&out, "hydro-check");
    assert!(stdout(&out).contains("interior frames"), "got: {}", stdout(&out));
    let residuals = csv_rows(&outdir.join("residuals.csv"));
    assert!(!residuals.is_empty());
    for row in &residuals {
        let amp: f64 = row[1].parse().unwrap();
        assert!(amp.is_finite() && amp >= 0.0);
    }
}

// ─── limit run ──────────────────────────────────────────────────────────

#[test]
fn kdv_run_reports_conserved_integrals() {
    let s = Scratch::new("kdv");
    let cfg = s.write(
        "run.cfg",
        "[grid]\n\
         dimension = 1\n\
         nx = 256\n\
         lx = 50.26548245743669\n\
         [run]\n\
         eps = 0.1\n\
         t_final = 0.1\n\
         dt = 1e-3\n\
         snapshots = 4\n\
         [initial]\n\
         profile = sech2\n\
         amplitude = -0.3\n",
    );
    let outdir = s.path("out");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
        "simulate-kdv",
    ]);
    assert_ok(&out, "simulate-kdv");
    let series = csv_rows(&outdir.join("invariants.csv"));
    let i0: Vec<f64> = series.iter().map(|r| r[1].parse().unwrap()).collect();
    let i1: Vec<f64> = series.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!((i0[0] - i0[i0.len() - 1]).abs() < 1e-10);
    assert!((i1[0] - i1[i1.len() - 1]).abs() < 1e-8 * i1[0].abs().max(1.0));
}

// ─── soliton-check ──────────────────────────────────────────────────────

#[test]
fn soliton_check_reports_small_propagation_errors() {
    let s = Scratch::new("soliton");
    let cfg = s.write(
        "run.cfg",
        "[grid]\n\
         dimension = 1\n\
         nx = 256\n\
         lx = 50.26548245743669\n\
         [run]\n\
         eps = 0.1\n\
         t_final = 0.05\n\
         dt = 2e-4\n",
    );
    let outdir = s.path("out");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
        "soliton-check",
    ]);
    assert_ok(&out, "soliton-check");
    let rows = csv_rows(&outdir.join("soliton_check.csv"));
    assert_eq!(rows.len(), 2);
    let nls_err: f64 = rows[0][2].parse().unwrap();
    let kdv_err: f64 = rows[1][2].parse().unwrap();
    assert!(nls_err < 1e-3, "dark-soliton error too big: {nls_err:.3e}");
    assert!(kdv_err < 1e-5, "limit-soliton error too big: {kdv_err:.3e}");
}

// ─── transport-probe ────────────────────────────────────────────────────

#[test]
fn transport_probe_respects_the_window_bound() {
    let s = Scratch::new("transport");
    let cfg = s.write(
        "run.cfg",
        "[grid]\n\
         dimension = 1\n\
         nx = 256\n\
         lx = 50.26548245743669\n\
         [initial]\n\
         profile = sech2\n\
         amplitude = -0.4\n",
    );
    let outdir = s.path("out");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
        "transport-probe",
        "--eps",
        "0.2",
        "--eps",
        "0.1",
    ]);
    assert_ok(&out, "transport-probe");
    let rows = csv_rows(&outdir.join("transport.csv"));
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let ratio: f64 = row[4].parse().unwrap();
        assert!(ratio <= 1.0 + 1e-9, "window bound violated: ratio {ratio}");
    }
}

// ─── sweep ──────────────────────────────────────────────────────────────

#[test]
fn sweep_writes_summary_orders_and_plotdata() {
    let s = Scratch::new("sweep");
    let cfg = s.write(
        "run.cfg",
        "[grid]\n\
         dimension = 1\n\
         nx = 128\n\
         lx = 50.26548245743669\n\
         [run]\n\
         t_final = 0.05\n\
         dt = 2e-4\n\
         snapshots = 5\n\
         [initial]\n\
         profile = sech2\n\
         amplitude = -0.3\n\
         [sweep]\n\
         eps_list = 0.2, 0.1\n",
    );
    let outdir = s.path("out");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
        "sweep",
    ]);
    assert_ok(&out, "sweep");
    assert!(stdout(&out).contains("order(L2)"), "got: {}", stdout(&out));

    let summary = csv_rows(&outdir.join("summary.csv"));
    assert_eq!(summary.len(), 2, "one summary row per eps");
    for row in &summary {
        assert_eq!(row.last().unwrap(), "", "no branch should abort (column holds the reason)");
    }
    let orders = csv_rows(&outdir.join("orders.csv"));
    assert_eq!(orders.len(), 1, "one order row per eps pair");
    assert!(outdir.join("branch_eps0.2.dat").is_file());
    assert!(outdir.join("branch_eps0.1.dat").is_file());
}

// ─── reproducibility ────────────────────────────────────────────────────

#[test]
fn seeded_random_runs_are_byte_reproducible() {
    let s = Scratch::new("seeds");
    let cfg = s.write(
        "run.cfg",
        "[grid]\n\
         dimension = 1\n\
         nx = 128\n\
         lx = 50.26548245743669\n\
         [run]\n\
         eps = 0.1\n\
         t_final = 0.01\n\
         dt = 1e-3\n\
         snapshots = 2\n\
         [initial]\n\
         profile = random\n\
         amplitude = 0.05\n\
         kmax = 4\n",
    );
    let run_once = |dir: &Path, seed: &str| {
        let out = run(&[
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--seed",
            seed,
            "simulate-nls",
        ]);
        assert_ok(&out, "seeded simulate-nls");
    };
    let (a, b, c) = (s.path("a"), s.path("b"), s.path("c"));
    run_once(&a, "7");
    run_once(&b, "7");
    run_once(&c, "8");

    let last_dump = |dir: &Path| {
        let rows = csv_rows(&dir.join("manifest.csv"));
        fs::read(dir.join(&rows.last().unwrap()[2])).unwrap()
    };
    assert_eq!(last_dump(&a), last_dump(&b), "same seed must reproduce dumps byte-for-byte");
    assert_ne!(last_dump(&a), last_dump(&c), "different seed must change the random datum");
    assert_eq!(
        fs::read(a.join("invariants.csv")).unwrap(),
        fs::read(b.join("invariants.csv")).unwrap()
    );
}
