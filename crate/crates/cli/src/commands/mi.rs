use std::fmt::Write as _;

use anyhow::{bail, Result};
use blockfade::mutual_info::{gaussian_mi, MiOptions};
use blockfade::{Exec, MiMethod, Scheme};

use super::{constellation, num, Output, Table, SEED_ROW};
use crate::settings::Settings;

pub fn settings() -> Settings {
    Settings::with_defaults(&[
        SEED_ROW,
        ("channel", "h", "1.5, 0.1, 0.1, 0.1", "fixed fading amplitudes h_1..h_B"),
        ("mi", "constellation", "qam16", "qpsk or qam16"),
        ("mi", "labeling", "gray", "gray or sp"),
        ("mi", "schemes", "gaussian, unrotated, 2xcyclotomic2, kruskemper4", "gaussian or rotation lists covering B blocks"),
        ("mi", "snr_db", "0:1:40", "SNR grid in dB (start:step:stop or list)"),
        ("mi", "method", "auto", "auto, gauss-hermite or monte-carlo"),
        ("mi", "nodes", "16", "Gauss-Hermite nodes per real dimension"),
        ("mi", "samples", "2000", "Monte Carlo noise samples"),
        ("mi", "quadrature_cost_cap", "100000000", "largest nodes^(2N) 4^(MN) accepted for quadrature"),
        ("mi", "enumerate_limit", "256", "Monte Carlo averages over every s up to this many candidates"),
    ])
}

enum Job {
    Gaussian,
    Discrete(Scheme, MiMethod),
}

pub fn run(s: &Settings, exec: Exec) -> Result<Output> {
    let h: Vec<f64> = s.list_of("channel", "h")?;
    if h.is_empty() {
        bail!("[channel] h needs at least one amplitude");
    }
    let gamma: Vec<f64> = h.iter().map(|v| v * v).collect();
    let c = constellation(s, "mi")?;
    let grid = s.grid("mi", "snr_db")?;
    let nodes: usize = s.get("mi", "nodes")?;
    let samples: usize = s.get("mi", "samples")?;
    let cost_cap: u128 = s.get("mi", "quadrature_cost_cap")?;
    let opts = MiOptions {
        quadrature_cost_cap: cost_cap,
        enumerate_limit: s.get("mi", "enumerate_limit")?,
        seed: s.get("run", "seed")?,
    };
    let method = s.str("mi", "method").to_ascii_lowercase();

    let mut jobs = Vec::new();
    for name in s.list("mi", "schemes") {
        if name.eq_ignore_ascii_case("gaussian") {
            jobs.push((name, Job::Gaussian));
            continue;
        }
        let scheme = Scheme::parse(c.clone(), &name, h.len())?;
        let gh = MiMethod::GaussHermite { nodes };
        let mc = MiMethod::MonteCarlo { samples };
        let m = match method.as_str() {
            "gauss-hermite" | "gh" => gh,
            "monte-carlo" | "mc" => mc,
            "auto" => {
                let fits = scheme.evaluators().iter().all(|e| {
                    let n = e.dim() as u32;
                    e.dim() <= 2
                        && (nodes as u128)
                            .checked_pow(2 * n)
                            .and_then(|q| q.checked_mul(1u128 << (2 * e.bits())))
                            .is_some_and(|cost| cost <= cost_cap)
                });
                if fits {
                    gh
                } else {
                    mc
                }
            }
            other => bail!("unknown MI method '{other}'"),
        };
        jobs.push((name, Job::Discrete(scheme, m)));
    }

    let cells: Vec<(usize, f64)> = (0..jobs.len()).flat_map(|j| grid.iter().map(move |&x| (j, x))).collect();
    let values = exec.map_slice(&cells, |&(j, snr_db)| {
        let snr = 10f64.powf(snr_db / 10.0);
        match &jobs[j].1 {
            Job::Gaussian => Ok(gaussian_mi(snr, &gamma)),
            Job::Discrete(scheme, m) => scheme.mi(&gamma, snr, *m, &opts),
        }
    });

    let mut table = Table::new(&["snr_db", "scheme", "value_bits", "std_error", "method"]);
    let mut summary = String::new();
    let _ = writeln!(summary, "h = {h:?}, {} points per scheme", grid.len());
    for (&(j, snr_db), value) in cells.iter().zip(values) {
        let est = value?;
        let scheme = &jobs[j].0;
        table.push(vec![num(snr_db), scheme.clone(), num(est.value), num(est.std_error), est.method.label()]);
        if Some(&snr_db) == grid.last() {
            let _ = writeln!(summary, "{scheme:>16} at {snr_db} dB: {:.4} bits/use ({})", est.value, est.method.label());
        }
    }
    Ok(Output { table, summary, status: 0 })
}
