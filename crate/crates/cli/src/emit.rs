//! Report rendering: canonical JSON (deterministic for a fixed config and
//! seed) and a fixed-width text table.

use std::fmt::Write as _;

use crate::run::RunReport;

pub fn to_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialization");
    s.push('\n');
    s
}

pub fn to_text(report: &RunReport, elapsed_ms: Option<u128>) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<12} {:<28} {:>8} {:>13} {:>9} {:>6}",
        "suite", "identity", "samples", "max residual", "tol", "pass"
    )
    .unwrap();
    writeln!(out, "{}", "-".repeat(82)).unwrap();
    for row in &report.rows {
        writeln!(
            out,
            "{:<12} {:<28} {:>8} {:>13.3e} {:>9.1e} {:>6}",
            row.suite,
            row.identity,
            row.samples,
            row.max_residual,
            row.tolerance,
            if row.pass { "ok" } else { "FAIL" }
        )
        .unwrap();
        if let Some(note) = &row.note {
            writeln!(out, "{:<12} {}", "", note).unwrap();
        }
    }
    writeln!(out, "{}", "-".repeat(82)).unwrap();
    writeln!(
        out,
        "{} rows, seed {}, all pass: {}",
        report.rows.len(),
        report.seed,
        report.all_pass
    )
    .unwrap();
    if let Some(c) = &report.constants {
        writeln!(
            out,
            "constants: rho = ({:.6}, {:.6}), V^2 = ({:.1}, {:.1})",
            c.rho.re, c.rho.im, c.v_squared.re, c.v_squared.im
        )
        .unwrap();
    }
    if let Some(ms) = elapsed_ms {
        writeln!(out, "elapsed: {ms} ms").unwrap();
    }
    out
}
