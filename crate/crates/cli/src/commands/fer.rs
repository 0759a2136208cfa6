use std::fmt::Write as _;

use anyhow::{anyhow, bail, Result};
use blockfade::channel::FadingSpec;
use blockfade::codedmod::{simulate_fer, ConvCode, FerConfig, FrameConfig, Metric, NoiseMode, StopRule};
use blockfade::rotation::parse_rotation_list;
use blockfade::{Constellation, Exec, Labeling};

use super::{num, Output, Table, SEED_ROW};
use crate::settings::Settings;

pub fn settings() -> Settings {
    Settings::with_defaults(&[
        SEED_ROW,
        ("code", "generators", "5, 7", "two feedforward generators in octal"),
        ("code", "info_bits", "128", "information bits per frame"),
        ("modulation", "constellation", "qpsk", "qpsk or qam16"),
        ("modulation", "labelings", "gray", "labelings to simulate (gray, sp)"),
        ("rotation", "schemes", "unrotated, 2xcyclotomic2", "rotation lists to simulate, each covering B blocks"),
        ("channel", "blocks", "4", "number of fading blocks B (even)"),
        ("channel", "m", "1", "Nakagami parameter"),
        ("frame", "padding", "true", "zero-pad each stream to whole channel uses"),
        ("frame", "interleaver_seed", "0", "seed of the fixed per-stream interleavers"),
        ("decoder", "iterations", "2", "demapper/decoder passes"),
        ("decoder", "metric", "log-map", "log-map or max-log"),
        ("decoder", "candidate_cap", "65536", "largest 2^(MN) the exhaustive demapper accepts"),
        ("sim", "ebn0_db", "0:2:16", "Eb/N0 grid in dB"),
        ("sim", "min_errors", "100", "stop a point after this many frame errors"),
        ("sim", "max_frames", "100000", "frame budget per point"),
        ("sim", "batch", "512", "frames between stop-rule checks"),
        ("sim", "noise", "awgn", "awgn or noiseless"),
    ])
}

fn parse_metric(s: &str) -> Result<Metric> {
    match s.to_ascii_lowercase().as_str() {
        "log-map" | "logmap" => Ok(Metric::LogMap),
        "max-log" | "maxlog" | "max-log-map" => Ok(Metric::MaxLog),
        other => bail!("unknown metric '{other}' (log-map or max-log)"),
    }
}

fn parse_noise(s: &str) -> Result<NoiseMode> {
    match s.to_ascii_lowercase().as_str() {
        "awgn" => Ok(NoiseMode::Awgn),
        "noiseless" | "none" => Ok(NoiseMode::Noiseless),
        other => bail!("unknown noise mode '{other}' (awgn or noiseless)"),
    }
}

fn parse_code(s: &Settings) -> Result<ConvCode> {
    let gens = s.list("code", "generators");
    let [g0, g1] = &gens[..] else {
        bail!("[code] generators needs exactly two octal values");
    };
    let oct = |g: &str| u8::from_str_radix(g, 8).map_err(|e| anyhow!("generator '{g}' is not octal: {e}"));
    Ok(ConvCode::new(oct(g0)?, oct(g1)?)?)
}

pub fn run(s: &Settings, exec: Exec) -> Result<Output> {
    let fading = FadingSpec::new(s.get("channel", "blocks")?, s.get("channel", "m")?)?;
    let code = parse_code(s)?;
    let grid = s.grid("sim", "ebn0_db")?;
    let stop = StopRule {
        min_errors: s.get("sim", "min_errors")?,
        max_frames: s.get("sim", "max_frames")?,
        batch: s.get("sim", "batch")?,
    };
    let seed: u64 = s.get("run", "seed")?;

    let mut table = Table::new(&[
        "ebn0_db",
        "fer",
        "ber",
        "ci_low",
        "ci_high",
        "frames",
        "iterations",
        "scheme",
        "labeling",
        "snr_db",
        "frame_errors",
        "bit_errors",
        "fer_by_iteration",
    ]);
    let mut summary = String::new();
    for labeling in s.list("modulation", "labelings") {
        let labeling = Labeling::from_name(&labeling)?;
        let c = Constellation::from_name(s.str("modulation", "constellation"), labeling)?;
        for scheme in s.list("rotation", "schemes") {
            let mut frame = FrameConfig::new(c.clone(), parse_rotation_list(&scheme, fading.blocks())?);
            frame.code = code;
            frame.info_len = s.get("code", "info_bits")?;
            frame.padding = s.bool("frame", "padding")?;
            frame.interleaver_seed = s.get("frame", "interleaver_seed")?;
            frame.iterations = s.get("decoder", "iterations")?;
            let mut cfg = FerConfig::new(frame, fading, seed);
            cfg.stop = stop;
            cfg.metric = parse_metric(s.str("decoder", "metric"))?;
            cfg.noise = parse_noise(s.str("sim", "noise"))?;
            cfg.candidate_cap = s.get("decoder", "candidate_cap")?;
            cfg.exec = exec;
            let curve = simulate_fer(&cfg, &grid)?;
            for p in &curve.points {
                let by_iter: Vec<String> =
                    p.errors_by_iteration.iter().map(|&e| num(e as f64 / p.frames as f64)).collect();
                table.push(vec![
                    num(p.ebn0_db),
                    num(p.fer),
                    num(p.ber),
                    num(p.ci_low),
                    num(p.ci_high),
                    p.frames.to_string(),
                    p.iterations.to_string(),
                    scheme.clone(),
                    labeling.name().to_string(),
                    num(p.snr_db),
                    p.frame_errors.to_string(),
                    p.bit_errors.to_string(),
                    by_iter.join(";"),
                ]);
            }
            if let Some(p) = curve.points.last() {
                let _ = writeln!(
                    summary,
                    "{scheme:>16}/{}: FER({} dB) = {:.3e} ({} errors in {} frames)",
                    labeling.name(),
                    p.ebn0_db,
                    p.fer,
                    p.frame_errors,
                    p.frames
                );
            }
        }
    }
    Ok(Output { table, summary, status: 0 })
}
