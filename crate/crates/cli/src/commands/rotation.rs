use std::fmt::Write as _;

use anyhow::Result;
use blockfade::rotation::{full_diversity_margin, FULL_DIVERSITY_THRESHOLD};
use blockfade::{Exec, Rotation};

use super::{constellation, num, Output, Table, SEED_ROW};
use crate::settings::Settings;

/// Largest accepted unitarity residual.
const UNITARY_TOLERANCE: f64 = 1e-9;

pub fn settings() -> Settings {
    Settings::with_defaults(&[
        SEED_ROW,
        ("check", "rotation", "kruskemper4", "catalog rotation name"),
        ("check", "constellation", "qam16", "qpsk or qam16"),
        ("check", "labeling", "gray", "gray or sp"),
        ("check", "scan_cap", "100000000", "largest number of difference vectors to enumerate"),
    ])
}

pub fn run(s: &Settings, exec: Exec) -> Result<Output> {
    let rot = Rotation::from_name(s.str("check", "rotation"))?;
    let c = constellation(s, "check")?;
    let scan = full_diversity_margin(&rot, &c, s.get("check", "scan_cap")?, exec)?;
    let residual = rot.unitarity_residual();
    let unitary = rot.claims_unitary() && residual <= UNITARY_TOLERANCE;
    let pass = unitary && scan.is_full_diversity();

    let mut summary = String::new();
    let _ = writeln!(summary, "rotation        {} (N={})", rot.name(), rot.dim());
    let _ = writeln!(summary, "constellation   {}", c.name());
    let _ = writeln!(summary, "unitarity       residual {residual:.3e}, claims unitary: {}", rot.claims_unitary());
    if !unitary {
        let norms: Vec<String> = rot.column_norms_sq().iter().map(|v| format!("{v:.6}")).collect();
        let _ = writeln!(summary, "column norms^2  {}", norms.join(" "));
    }
    let _ = writeln!(
        summary,
        "margin          {:.6e} over {} difference vectors (threshold {FULL_DIVERSITY_THRESHOLD:e})",
        scan.margin, scan.vectors_scanned
    );
    let _ = writeln!(summary, "{}", if pass { "PASS" } else { "FAIL" });

    let mut table = Table::new(&[
        "rotation",
        "constellation",
        "dim",
        "unitarity_residual",
        "claims_unitary",
        "margin",
        "vectors_scanned",
        "full_diversity",
        "verdict",
    ]);
    table.push(vec![
        rot.name().to_string(),
        c.name().to_string(),
        rot.dim().to_string(),
        num(residual),
        rot.claims_unitary().to_string(),
        num(scan.margin),
        scan.vectors_scanned.to_string(),
        scan.is_full_diversity().to_string(),
        if pass { "PASS" } else { "FAIL" }.to_string(),
    ]);
    Ok(Output { table, summary, status: if pass { 0 } else { 2 } })
}
