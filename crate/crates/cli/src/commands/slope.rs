use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use blockfade::outage::{fit_slope, CurveMeta, CurvePoint};
use blockfade::SimCurve;

use super::{num, Output, Table, SEED_ROW};
use crate::settings::Settings;

pub fn settings() -> Settings {
    Settings::with_defaults(&[
        SEED_ROW,
        ("slope", "input", "", "CSV from outage-sweep or fer-sim"),
        ("slope", "pmin", "1e-4", "lower end of the probability window"),
        ("slope", "pmax", "1e-2", "upper end of the probability window"),
        ("slope", "x_column", "snr_db", "SNR column (snr_db or ebn0_db)"),
        ("slope", "group", "", "only fit this model/scheme; empty fits every group"),
    ])
}

fn column(header: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    names.iter().find_map(|n| header.iter().position(|h| h == *n))
}

pub fn run(s: &Settings) -> Result<Output> {
    let input = s.str("slope", "input");
    if input.is_empty() {
        bail!("no input CSV given (--input or [slope] input)");
    }
    let p_lo: f64 = s.get("slope", "pmin")?;
    let p_hi: f64 = s.get("slope", "pmax")?;
    let mut reader = csv::Reader::from_path(input).with_context(|| format!("opening {input}"))?;
    let header = reader.headers()?.clone();
    let need = |names: &[&str]| column(&header, names).ok_or_else(|| anyhow!("{input} has no {} column", names.join("/")));
    let x_col = need(&[s.str("slope", "x_column")])?;
    let p_col = need(&["p_out", "fer"])?;
    let lo_col = need(&["ci_low"])?;
    let hi_col = need(&["ci_high"])?;
    let n_col = need(&["trials", "frames"])?;
    let k_col = column(&header, &["events", "frame_errors"]);
    let group_cols: Vec<usize> = ["model", "scheme", "labeling"].iter().filter_map(|n| column(&header, &[n])).collect();
    let wanted = s.str("slope", "group");

    let mut groups: BTreeMap<String, Vec<CurvePoint>> = BTreeMap::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let f = |i: usize| -> Result<f64> {
            field(i).parse::<f64>().with_context(|| format!("{input} row {}: bad number '{}'", line + 2, field(i)))
        };
        let group: Vec<&str> = group_cols.iter().map(|&i| field(i)).collect();
        let group = group.join("/");
        if !wanted.is_empty() && !group.split('/').any(|g| g == wanted) && group != wanted {
            continue;
        }
        let trials: u64 = field(n_col).parse().with_context(|| format!("{input} row {}: bad trial count", line + 2))?;
        let estimate = f(p_col)?;
        let events = match k_col {
            Some(i) => field(i).parse().with_context(|| format!("{input} row {}: bad event count", line + 2))?,
            None => (estimate * trials as f64).round() as u64,
        };
        groups.entry(group).or_default().push(CurvePoint {
            snr_db: f(x_col)?,
            estimate,
            ci_low: f(lo_col)?,
            ci_high: f(hi_col)?,
            trials,
            events,
            ambiguous: 0,
        });
    }
    if groups.is_empty() {
        bail!("no rows to fit in {input}");
    }

    let mut table = Table::new(&["group", "slope", "intercept", "points_used", "pmin", "pmax"]);
    let mut summary = String::new();
    let mut fitted = 0;
    for (group, mut points) in groups {
        points.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
        let curve = SimCurve::new(points, CurveMeta { model: group.clone(), ..CurveMeta::default() })?;
        match fit_slope(&curve, p_lo, p_hi) {
            Ok(fit) => {
                fitted += 1;
                table.push(vec![
                    group.clone(),
                    num(fit.slope),
                    num(fit.intercept),
                    fit.points_used.to_string(),
                    num(p_lo),
                    num(p_hi),
                ]);
                let _ = writeln!(summary, "{group:>24}: slope {:.3} from {} points", fit.slope, fit.points_used);
            }
            Err(e) => {
                table.push(vec![group.clone(), String::new(), String::new(), "0".into(), num(p_lo), num(p_hi)]);
                let _ = writeln!(summary, "{group:>24}: {e}");
            }
        }
    }
    if fitted == 0 {
        bail!("no group could be fitted:\n{summary}");
    }
    Ok(Output { table, summary, status: 0 })
}
