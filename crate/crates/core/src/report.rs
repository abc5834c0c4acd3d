//! Report assembly and persistence
//!
//! All files go through an atomic temp + rename so a crashed run never
//! leaves a half-written artifact. Formats:
//!
//! - CSV with a fixed header row (`,` separator, `\n` endings, floats in
//!   Rust's shortest round-trip form, so identical inputs give identical
//!   bytes);
//! - "plotdata": whitespace-separated columns with one `#`-prefixed
//!   header line naming each column, loadable by any column plotter.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::limit::LimitInvariantRow;
use crate::nls::NlsInvariantRow;
use crate::transport::TransportReport;

// ─── atomic IO ──────────────────────────────────────────────────────────

/// Writes bytes to `path` via a sibling temp file and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path.parent().unwrap_or_else(|| Path::new("."));
    if !parent.as_os_str().is_empty() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = PathBuf::from(path);
    let mut name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("path '{}' has no file name", path.display())))?
        .to_os_string();
    name.push(".tmp");
    tmp.set_file_name(name);
    {
        let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

// ─── table formatting ───────────────────────────────────────────────────

/// CSV text from a header and rows of float columns.
pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Plotdata text: `# col1 col2 ...` then whitespace-separated rows.
pub fn plotdata_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::from("# ");
    out.push_str(&header.join(" "));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// `t,E_eps,P_eps,mass` series of a wavefunction run.
pub fn nls_series_csv(series: &[NlsInvariantRow]) -> String {
    let rows: Vec<Vec<f64>> = series
        .iter()
        .map(|r| vec![r.t, r.energy, r.momentum, r.mass])
        .collect();
    csv_table(&["t", "E_eps", "P_eps", "mass"], &rows)
}

/// `t,I0,I1` series of a limit-equation run.
pub fn limit_series_csv(series: &[LimitInvariantRow]) -> String {
    let rows: Vec<Vec<f64>> = series.iter().map(|r| vec![r.t, r.i0, r.i1]).collect();
    csv_table(&["t", "I0", "I1"], &rows)
}

/// One row per eps of the windowed transport probe.
pub fn transport_csv(report: &TransportReport) -> String {
    let rows: Vec<Vec<f64>> = report
        .rows
        .iter()
        .map(|r| vec![r.eps, r.t_final, r.window_integral, r.bound, r.ratio])
        .collect();
    csv_table(&["eps", "t_final", "window_integral", "bound", "ratio"], &rows)
}

/// `index,t,file` listing of dumped snapshots.
pub fn manifest_csv(entries: &[(usize, f64, String)]) -> String {
    let mut out = String::from("index,t,file\n");
    for (idx, t, file) in entries {
        out.push_str(&format!("{idx},{t},{file}\n"));
    }
    out
}

/// `t,amplitude_residual,phase_residual` rows of a hydrodynamic check.
pub fn residual_csv(rows: &[crate::grenier::ResidualRow]) -> String {
    let data: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.t, r.amplitude, r.phase]).collect();
    csv_table(&["t", "amplitude_residual", "phase_residual"], &data)
}

// ─── convergence report ─────────────────────────────────────────────────

/// Everything measured along one eps branch of a sweep.
#[derive(Debug, Clone)]
pub struct EpsBranchReport {
    pub eps: f64,
    /// Snapshot times shared by all series below.
    pub times: Vec<f64>,
    /// ||A_eps - A||_L2 against the paired limit solution.
    pub err_l2: Vec<f64>,
    /// Same in H^s for the configured s.
    pub err_hs: Vec<f64>,
    /// ||dx phi - 2c A||_L2 (preparedness deficit along the flow).
    pub deficit_l2: Vec<f64>,
    /// ||(A_eps + u1_eps)/2 - A||_L2 (the strongly convergent combination).
    pub half_sum_err: Vec<f64>,
    /// ||grad_perp phi||_L2; empty in 1d.
    pub grad_perp_phi: Vec<f64>,
    /// sup over snapshots of the H1-type defect in the refined functional.
    pub nu_sup: f64,
    /// The same defect evaluated at the final snapshot only.
    pub nu_final: f64,
    /// Relative drift of E_eps and P_eps over the run.
    pub drift_energy: f64,
    pub drift_momentum: f64,
    /// sup_t || |psi|^2 - 1 ||_inf / eps^2.
    pub sup_modulus_dev: f64,
    /// max over snapshots of err_l2.
    pub sup_err_l2: f64,
    pub m_diagnostic: f64,
    /// Populated when the branch stopped early (e.g. vortex crossing).
    pub aborted: Option<String>,
}

/// Convergence order measured between two eps branches.
#[derive(Debug, Clone, Copy)]
pub struct OrderEstimate {
    pub eps_pair: (f64, f64),
    pub order: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub hs_order: f64,
    pub branches: Vec<EpsBranchReport>,
    /// Orders of sup_t err_l2 between consecutive eps pairs.
    pub orders_l2: Vec<OrderEstimate>,
    /// Orders of the half-sum error between consecutive eps pairs.
    pub orders_half_sum: Vec<OrderEstimate>,
}

impl ConvergenceReport {
    /// Assembles order estimates from finished branches (aborted branches
    /// are skipped; the pair is only formed between adjacent survivors).
    pub fn from_branches(hs_order: f64, branches: Vec<EpsBranchReport>) -> Self {
        let alive: Vec<&EpsBranchReport> =
            branches.iter().filter(|b| b.aborted.is_none()).collect();
        let mut orders_l2 = Vec::new();
        let mut orders_half_sum = Vec::new();
        for w in alive.windows(2) {
            let (hi, lo) = (w[0], w[1]);
            let pair = (hi.eps, lo.eps);
            let ratio_eps = hi.eps / lo.eps;
            if hi.sup_err_l2 > 0.0 && lo.sup_err_l2 > 0.0 {
                orders_l2.push(OrderEstimate {
                    eps_pair: pair,
                    order: (hi.sup_err_l2 / lo.sup_err_l2).ln() / ratio_eps.ln(),
                });
            }
            let hs_hi = hi.half_sum_err.iter().fold(0.0_f64, |m, &x| m.max(x));
            let hs_lo = lo.half_sum_err.iter().fold(0.0_f64, |m, &x| m.max(x));
            if hs_hi > 0.0 && hs_lo > 0.0 {
                orders_half_sum.push(OrderEstimate {
                    eps_pair: pair,
                    order: (hs_hi / hs_lo).ln() / ratio_eps.ln(),
                });
            }
        }
        ConvergenceReport { hs_order, branches, orders_l2, orders_half_sum }
    }

    /// Uniform bound of the prepared family: sup over eps of the
    /// initial-data size diagnostic.
    pub fn m_family(&self) -> f64 {
        self.branches.iter().fold(0.0_f64, |m, b| m.max(b.m_diagnostic))
    }

    /// One-row-per-eps summary table.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "eps,sup_err_l2,sup_err_hs,sup_half_sum,sup_deficit,sup_grad_perp,nu_sup,nu_final,\
             drift_energy,drift_momentum,sup_modulus_dev,m_diagnostic,aborted\n",
        );
        for b in &self.branches {
            let sup = |v: &[f64]| v.iter().fold(0.0_f64, |m, &x| m.max(x));
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                b.eps,
                b.sup_err_l2,
                sup(&b.err_hs),
                sup(&b.half_sum_err),
                sup(&b.deficit_l2),
                sup(&b.grad_perp_phi),
                b.nu_sup,
                b.nu_final,
                b.drift_energy,
                b.drift_momentum,
                b.sup_modulus_dev,
                b.m_diagnostic,
                b.aborted.as_deref().unwrap_or("")
            ));
        }
        out
    }

    /// Time-series plotdata for one branch.
    pub fn branch_plotdata(&self, branch: &EpsBranchReport) -> String {
        let two_d = !branch.grad_perp_phi.is_empty();
        let mut header = vec!["t", "err_l2", "err_hs", "deficit_l2", "half_sum_err"];
        if two_d {
            header.push("grad_perp_phi");
        }
        let mut rows = Vec::with_capacity(branch.times.len());
        for i in 0..branch.times.len() {
            let mut row = vec![
                branch.times[i],
                branch.err_l2[i],
                branch.err_hs[i],
                branch.deficit_l2[i],
                branch.half_sum_err[i],
            ];
            if two_d {
                row.push(branch.grad_perp_phi[i]);
            }
            rows.push(row);
        }
        plotdata_table(&header, &rows)
    }

    /// Order estimates table (may be empty for single-eps sweeps).
    pub fn orders_csv(&self) -> String {
        let mut out = String::from("eps_high,eps_low,order_l2,order_half_sum\n");
        for i in 0..self.orders_l2.len().max(self.orders_half_sum.len()) {
            let l2 = self.orders_l2.get(i);
            let hs = self.orders_half_sum.get(i);
            let pair = l2.map(|o| o.eps_pair).or(hs.map(|o| o.eps_pair)).unwrap();
            out.push_str(&format!(
                "{},{},{},{}\n",
                pair.0,
                pair.1,
                l2.map(|o| o.order.to_string()).unwrap_or_default(),
                hs.map(|o| o.order.to_string()).unwrap_or_default()
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content_and_leaves_no_temp() {
        let dir = std::env::temp_dir().join(format!("report_test_{}", std::process::id()));
        let path = dir.join("out.csv");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        let leftovers: Vec<_> = std::fs::read_dir(&dir)
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
            .collect();
        assert!(leftovers.is_empty());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn csv_and_plotdata_have_expected_shape() {
        let rows = vec![vec![0.0, 1.5], vec![0.1, 2.5]];
        let csv = csv_table(&["t", "v"], &rows);
        assert_eq!(csv, "t,v\n0,1.5\n0.1,2.5\n");
        let pd = plotdata_table(&["t", "v"], &rows);
        assert!(pd.starts_with("# t v\n"));
        assert!(pd.contains("0.1 2.5\n"));
    }

    #[test]
    fn formatting_is_deterministic() {
        let rows = vec![vec![1.0 / 3.0, 2.0f64.sqrt()]];
        assert_eq!(csv_table(&["a", "b"], &rows), csv_table(&["a", "b"], &rows));
    }

    fn branch(eps: f64, sup: f64, half: f64) -> EpsBranchReport {
        EpsBranchReport {
            eps,
            times: vec![0.0, 1.0],
            err_l2: vec![sup / 2.0, sup],
            err_hs: vec![sup, sup],
            deficit_l2: vec![0.0, 0.0],
            half_sum_err: vec![half / 2.0, half],
            grad_perp_phi: Vec::new(),
            nu_sup: 0.1,
            nu_final: 0.05,
            drift_energy: 1e-12,
            drift_momentum: 1e-12,
            sup_modulus_dev: 0.5,
            sup_err_l2: sup,
            m_diagnostic: 1.0,
            aborted: None,
        }
    }

    #[test]
    fn orders_come_from_consecutive_pairs() {
        // err ~ eps: halving eps halves the error, order 1
        let report = ConvergenceReport::from_branches(
            1.0,
            vec![branch(0.2, 0.2, 0.04), branch(0.1, 0.1, 0.01)],
        );
        assert_eq!(report.orders_l2.len(), 1);
        let o = &report.orders_l2[0];
        assert_eq!(o.eps_pair, (0.2, 0.1));
        assert!((o.order - 1.0).abs() < 1e-12);
        // half-sum error ~ eps^2 here
        assert!((report.orders_half_sum[0].order - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_branch_has_no_orders() {
        let report = ConvergenceReport::from_branches(1.0, vec![branch(0.2, 0.1, 0.1)]);
        assert!(report.orders_l2.is_empty());
        assert!(!report.summary_csv().is_empty());
    }

    #[test]
    fn aborted_branches_are_skipped_in_order_estimates() {
        let mut mid = branch(0.1, 0.1, 0.01);
        mid.aborted = Some("vortex at t = 0.3".into());
        let report = ConvergenceReport::from_branches(
            1.0,
            vec![branch(0.2, 0.2, 0.04), mid, branch(0.05, 0.05, 0.0025)],
        );
        assert_eq!(report.orders_l2.len(), 1);
        assert_eq!(report.orders_l2[0].eps_pair, (0.2, 0.05));
        let csv = report.summary_csv();
        assert!(csv.contains("vortex at t = 0.3"));
    }
}
