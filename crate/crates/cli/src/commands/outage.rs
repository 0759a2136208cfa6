use std::fmt::Write as _;

use anyhow::{bail, Result};
use blockfade::channel::FadingSpec;
use blockfade::outage::{ebn0_db, outage_sweep, snr_db_from_ebn0, DiscreteMiPolicy, OutageConfig};
use blockfade::{Exec, InputModel, Scheme};

use super::{constellation, num, Output, Table, SEED_ROW};
use crate::settings::Settings;

pub fn settings() -> Settings {
    Settings::with_defaults(&[
        SEED_ROW,
        ("channel", "blocks", "4", "number of fading blocks B"),
        ("channel", "m", "1", "Nakagami parameter"),
        ("outage", "rate", "1", "rate R in bits per channel use"),
        ("outage", "constellation", "qpsk", "qpsk or qam16"),
        ("outage", "labeling", "gray", "gray or sp"),
        ("outage", "schemes", "gaussian, unrotated, 2xcyclotomic2, kruskemper4", "gaussian or rotation lists covering B blocks"),
        ("outage", "ebn0_db", "0:1:20", "Eb/N0 grid in dB, used when snr_db is empty"),
        ("outage", "snr_db", "", "SNR grid in dB; overrides ebn0_db"),
        ("outage", "trials_gaussian", "10000000", "channel draws per point for Gaussian inputs"),
        ("outage", "trials_discrete", "100000", "channel draws per point for discrete inputs"),
        ("policy", "quadrature_nodes", "16", "Gauss-Hermite nodes per real dimension"),
        ("policy", "quadrature_cost_limit", "100000", "blocks costing more than this use Monte Carlo"),
        ("policy", "initial_samples", "64", "first Monte Carlo budget per block"),
        ("policy", "max_samples", "4096", "Monte Carlo budget cap per block"),
        ("policy", "enumerate_limit", "256", "average over every s up to this many candidates"),
    ])
}

pub fn run(s: &Settings, exec: Exec) -> Result<Output> {
    let fading = FadingSpec::new(s.get("channel", "blocks")?, s.get("channel", "m")?)?;
    let rate: f64 = s.get("outage", "rate")?;
    let c = constellation(s, "outage")?;
    let grid = if s.str("outage", "snr_db").is_empty() {
        s.grid("outage", "ebn0_db")?.into_iter().map(|e| snr_db_from_ebn0(e, rate)).collect()
    } else {
        s.grid("outage", "snr_db")?
    };
    if grid.is_empty() {
        bail!("empty SNR grid");
    }
    let seed: u64 = s.get("run", "seed")?;
    let policy = DiscreteMiPolicy {
        quadrature_nodes: s.get("policy", "quadrature_nodes")?,
        quadrature_cost_limit: s.get("policy", "quadrature_cost_limit")?,
        initial_samples: s.get("policy", "initial_samples")?,
        max_samples: s.get("policy", "max_samples")?,
        enumerate_limit: s.get("policy", "enumerate_limit")?,
    };

    let mut table = Table::new(&[
        "snr_db", "ebn0_db", "p_out", "ci_low", "ci_high", "trials", "model", "events", "ambiguous", "flagged",
    ]);
    let mut summary = String::new();
    for name in s.list("outage", "schemes") {
        let (model, trials) = if name.eq_ignore_ascii_case("gaussian") {
            (InputModel::Gaussian, s.get("outage", "trials_gaussian")?)
        } else {
            (InputModel::Discrete(Scheme::parse(c.clone(), &name, fading.blocks())?), s.get("outage", "trials_discrete")?)
        };
        let mut cfg = OutageConfig::new(fading, rate, trials, seed).with_exec(exec);
        cfg.policy = policy;
        let curve = outage_sweep(&model, &cfg, &grid)?;
        let label = model.label();
        for p in curve.points() {
            table.push(vec![
                num(p.snr_db),
                num(ebn0_db(p.snr_db, rate)),
                num(p.estimate),
                num(p.ci_low),
                num(p.ci_high),
                p.trials.to_string(),
                label.clone(),
                p.events.to_string(),
                p.ambiguous.to_string(),
                p.threshold_flagged().to_string(),
            ]);
        }
        let last = curve.points().last().expect("non-empty grid");
        let flagged = curve.points().iter().filter(|p| p.threshold_flagged()).count();
        let _ = writeln!(
            summary,
            "{label:>24}: P_out({} dB) = {:.3e} over {} trials; {flagged} flagged points",
            last.snr_db, last.estimate, last.trials
        );
    }
    Ok(Output { table, summary, status: 0 })
}
