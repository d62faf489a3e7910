//! CSV output and plain-text summary tables.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::driver::RunRecord;
use super::studies::{ConvergenceRow, SiStudy};

pub const CSV_HEADER: &str = "x,rho,u,p,E,eps,eps_hat,flag";
pub const SI_CSV_HEADER: &str = "x,rho,u,p,E,eps,eps_hat,flag,k_eps_ave,c_dx2";

/// 17 significant digits, enough to round-trip any `f64`.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_rows(record: &RunRecord, out: &mut impl Write, reference_columns: bool) -> std::io::Result<()> {
    writeln!(out, "{}", if reference_columns { SI_CSV_HEADER } else { CSV_HEADER })?;
    let extra = if reference_columns {
        format!(",{},{}", num(record.threshold()), num(record.reference_level()))
    } else {
        String::new()
    };
    for r in &record.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}{}",
            num(r.x),
            num(r.rho),
            num(r.u),
            num(r.p),
            num(r.energy),
            num(r.eps),
            num(r.eps_hat),
            u8::from(r.flag),
            extra
        )?;
    }
    Ok(())
}

/// Serializes a run into a string in the CSV format.
pub fn to_csv_string(record: &RunRecord, reference_columns: bool) -> String {
    let mut buf = Vec::new();
    write_rows(record, &mut buf, reference_columns).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn write_file(path: &Path, record: &RunRecord, reference_columns: bool) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    write_rows(record, &mut out, reference_columns).map_err(io)?;
    out.flush().map_err(io)
}

/// Writes `x,rho,u,p,E,eps,eps_hat,flag`, one row per primary cell.
pub fn write_csv(record: &RunRecord, path: &Path) -> Result<()> {
    write_file(path, record, false)
}

/// Same as [`write_csv`] plus the two indicator reference levels per row.
pub fn write_si_csv(record: &RunRecord, path: &Path) -> Result<()> {
    write_file(path, record, true)
}

pub fn format_run_summary(record: &RunRecord) -> String {
    let flagged = record.rows.iter().filter(|r| r.flag).count();
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k:<18} {v}\n"));
    line("problem", record.problem.clone());
    line("cells", record.n.to_string());
    line("time", format!("{:.6}", record.time));
    line("steps", record.steps.to_string());
    line("dt min / max", format!("{:.3e} / {:.3e}", record.dt_min, record.dt_max));
    line("mass drift", format!("{:.3e}", record.drift[0]));
    line("momentum drift", format!("{:.3e}", record.drift[1]));
    line("energy drift", format!("{:.3e}", record.drift[2]));
    line("slope fallbacks", record.slope_fallbacks.to_string());
    line("positivity repairs", record.positivity_repairs.to_string());
    line("K * eps_ave", format!("{:.3e}", record.threshold()));
    line("C * dx^2", format!("{:.3e}", record.reference_level()));
    line("rough cells", format!("{flagged} of {}", record.n));
    s
}

pub fn format_convergence_table(rows: &[ConvergenceRow]) -> String {
    let mut s = format!("{:>8} {:>12} {:>14} {:>8}\n", "N", "dx", "L1(rho)", "order");
    for r in rows {
        let order = r.order.map(|o| format!("{o:.3}")).unwrap_or_default();
        let mark = if r.non_monotone { "  (error grew)" } else { "" };
        s.push_str(&format!("{:>8} {:>12.4e} {:>14.6e} {:>8}{}\n", r.n, r.dx, r.l1_error, order, mark));
    }
    s
}

pub fn format_si_summary(study: &SiStudy) -> String {
    let mut s = format!(
        "{:>8} {:>12} {:>14} {:>14} {:>14} {:>8} {:>10}\n",
        "N", "dx", "max eps_hat", "K*eps_ave", "C*dx^2", "rough", "rate"
    );
    for (i, r) in study.runs.iter().enumerate() {
        let max = r.rows.iter().map(|c| c.eps_hat).fold(0.0, f64::max);
        let flagged = r.rows.iter().filter(|c| c.flag).count();
        let rate = match i.checked_sub(1).map(|j| study.rates[j]) {
            None => String::new(),
            Some(Some(x)) => format!("{x:.3}"),
            Some(None) => "undefined".to_string(),
        };
        s.push_str(&format!(
            "{:>8} {:>12.4e} {:>14.6e} {:>14.6e} {:>14.6e} {:>8} {:>10}\n",
            r.n,
            r.dx,
            max,
            r.threshold(),
            r.reference_level(),
            flagged,
            rate
        ));
    }
    match study.window {
        Some((a, b)) => s.push_str(&format!("rates over the smooth window [{a}, {b}] of the domain\n")),
        None => s.push_str("no smooth window declared; rates undefined\n"),
    }
    s
}
