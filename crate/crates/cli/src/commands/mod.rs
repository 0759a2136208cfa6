//! Subcommand implementations. Each one declares its settings with defaults
//! and turns resolved settings into a CSV table plus a console summary.

pub mod exponents;
pub mod fer;
pub mod mi;
pub mod outage;
pub mod rotation;
pub mod slope;

use anyhow::Result;
use blockfade::{Constellation, Labeling};

use crate::settings::Settings;

/// Rows of a CSV file.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// What a subcommand produced.
#[derive(Debug, Clone, Default)]
pub struct Output {
    pub table: Table,
    pub summary: String,
    /// Process exit status when the run itself succeeded.
    pub status: i32,
}

/// `key = value` row shared by every subcommand.
pub const SEED_ROW: (&str, &str, &str, &str) = ("run", "seed", "1", "master seed (64-bit) for every random stream");

pub fn constellation(s: &Settings, section: &str) -> Result<Constellation> {
    let labeling = Labeling::from_name(s.str(section, "labeling"))?;
    Ok(Constellation::from_name(s.str(section, "constellation"), labeling)?)
}

/// Shortest round-trip formatting, independent of locale.
pub fn num(x: f64) -> String {
    format!("{x}")
}
