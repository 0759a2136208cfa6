//! Frame error rate simulation of the iterative demapper/decoder loop.

use rand::Rng;

use crate::channel::{complex_noise, FadingSpec};
use crate::codedmod::conv::Metric;
use crate::codedmod::demap::{Demapper, DEFAULT_CANDIDATE_CAP};
use crate::codedmod::mapping::{FrameConfig, FrameMapper, PAD};
use crate::exec::{stream_rng, Exec, Stream};
use crate::outage::{snr_db_from_ebn0, CurveMeta, CurvePoint, SimCurve};
use crate::stats::{wilson_interval, Z95};
use crate::{Complex64, Error, Result};

/// When to stop simulating one SNR point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_frames: u64,
    /// Frames simulated between checks of the rule. The rule is only
    /// evaluated at batch boundaries, so the result does not depend on the
    /// number of threads.
    pub batch: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { min_errors: 100, max_frames: 100_000, batch: 512 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMode {
    #[default]
    Awgn,
    /// Transmit without noise; the receiver still uses the nominal SNR.
    Noiseless,
}

/// Simulation parameters.
#[derive(Debug, Clone)]
pub struct FerConfig {
    pub frame: FrameConfig,
    pub fading: FadingSpec,
    pub seed: u64,
    pub stop: StopRule,
    pub metric: Metric,
    pub noise: NoiseMode,
    pub candidate_cap: usize,
    pub exec: Exec,
}

impl FerConfig {
    pub fn new(frame: FrameConfig, fading: FadingSpec, seed: u64) -> Self {
        FerConfig {
            frame,
            fading,
            seed,
            stop: StopRule::default(),
            metric: Metric::LogMap,
            noise: NoiseMode::Awgn,
            candidate_cap: DEFAULT_CANDIDATE_CAP,
            exec: Exec::default(),
        }
    }
}

/// Error counts at one Eb/N0.
#[derive(Debug, Clone, PartialEq)]
pub struct FerPoint {
    pub ebn0_db: f64,
    pub snr_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub iterations: usize,
    /// Frame errors after each iteration; the last entry equals
    /// `frame_errors`.
    pub errors_by_iteration: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FerCurve {
    pub points: Vec<FerPoint>,
    pub meta: CurveMeta,
}

impl FerCurve {
    /// FER against SNR (dB), for slope fitting.
    pub fn to_sim_curve(&self) -> Result<SimCurve> {
        let points = self
            .points
            .iter()
            .map(|p| CurvePoint::from_counts(p.snr_db, p.frame_errors, p.frames))
            .collect();
        SimCurve::new(points, self.meta.clone())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct Tally {
    frames: u64,
    bit_errors: u64,
    frame_errors: Vec<u64>,
}

impl Tally {
    fn merge(&mut self, other: &Tally) {
        self.frames += other.frames;
        self.bit_errors += other.bit_errors;
        if self.frame_errors.len() < other.frame_errors.len() {
            self.frame_errors.resize(other.frame_errors.len(), 0);
        }
        for (a, b) in self.frame_errors.iter_mut().zip(&other.frame_errors) {
            *a += b;
        }
    }
}

/// One transmitted frame as seen by the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedFrame {
    pub info: Vec<u8>,
    /// Fading amplitudes, one per block.
    pub h: Vec<f64>,
    /// Received samples, `B` rows of `L` entries.
    pub y: Vec<Vec<Complex64>>,
}

/// Transmitter and receiver of one configuration.
#[derive(Debug, Clone)]
pub struct Link {
    cfg: FerConfig,
    mapper: FrameMapper,
    demappers: Vec<Demapper>,
}

impl Link {
    pub fn new(cfg: &FerConfig) -> Result<Self> {
        if cfg.fading.blocks() != cfg.frame.blocks() {
            return Err(Error::DimensionMismatch { expected: cfg.frame.blocks(), actual: cfg.fading.blocks() });
        }
        let mapper = FrameMapper::new(cfg.frame.clone())?;
        let demappers = cfg
            .frame
            .rotations
            .iter()
            .map(|r| Demapper::new(&cfg.frame.constellation, r, cfg.candidate_cap))
            .collect::<Result<_>>()?;
        Ok(Link { cfg: cfg.clone(), mapper, demappers })
    }

    pub fn mapper(&self) -> &FrameMapper {
        &self.mapper
    }

    /// Draws frame `index` (data, fading and noise streams) at `snr`.
    pub fn transmit(&self, snr: f64, index: u64) -> Result<ReceivedFrame> {
        let cfg = &self.cfg;
        let mut data = stream_rng(cfg.seed, Stream::Data, index);
        let info: Vec<u8> = (0..cfg.frame.info_len).map(|_| data.random_range(0..2u8)).collect();
        let mapped = self.mapper.map(&cfg.frame.code.encode(&info))?;
        let mut gamma = vec![0.0; cfg.fading.blocks()];
        cfg.fading.sample_into(&mut stream_rng(cfg.seed, Stream::Fading, index), &mut gamma);
        let h: Vec<f64> = gamma.iter().map(|g| g.sqrt()).collect();
        let amp = snr.sqrt();
        let mut noise = stream_rng(cfg.seed, Stream::Noise, index);
        let y = mapped
            .x
            .iter()
            .zip(&h)
            .map(|(row, &hb)| {
                row.iter()
                    .map(|&x| {
                        let z = complex_noise(&mut noise);
                        match cfg.noise {
                            NoiseMode::Awgn => x * (amp * hb) + z,
                            NoiseMode::Noiseless => x * (amp * hb),
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(ReceivedFrame { info, h, y })
    }

    /// Demapper extrinsic LLRs in code order, given decoder extrinsic LLRs
    /// (also in code order) as priors. Padding bits get zero prior.
    pub fn demap(&self, rx: &ReceivedFrame, snr: f64, priors: &[f64], out: &mut [f64]) -> Result<()> {
        let coded_len = self.mapper.coded_len();
        if priors.len() != coded_len || out.len() != coded_len {
            return Err(Error::DimensionMismatch { expected: coded_len, actual: priors.len().min(out.len()) });
        }
        let mut ys = Vec::new();
        let mut local = Vec::new();
        let mut ext = Vec::new();
        for (k, dm) in self.demappers.iter().enumerate() {
            let off = self.mapper.offsets()[k];
            let n = dm.dim();
            let hs = &rx.h[off..off + n];
            for l in 0..self.mapper.uses() {
                let slots = self.mapper.bit_slots(k, l);
                ys.clear();
                ys.extend((0..n).map(|i| rx.y[off + i][l]));
                local.clear();
                local.extend(slots.iter().map(|&c| if c == PAD { 0.0 } else { priors[c] }));
                ext.resize(slots.len(), 0.0);
                dm.extrinsic(&ys, hs, snr, &local, &mut ext)?;
                for (&c, &e) in slots.iter().zip(&ext) {
                    if c != PAD {
                        out[c] = e;
                    }
                }
            }
        }
        Ok(())
    }

    /// Runs the iterative receiver on frame `index`; returns the bit errors
    /// after each iteration.
    pub fn run_frame(&self, snr: f64, index: u64) -> Result<Vec<u64>> {
        let rx = self.transmit(snr, index)?;
        let code = &self.cfg.frame.code;
        let coded_len = self.mapper.coded_len();
        let mut channel_llr = vec![0.0; coded_len];
        let mut decoder_ext = vec![0.0; coded_len];
        let mut errors = Vec::with_capacity(self.cfg.frame.iterations);
        for _ in 0..self.cfg.frame.iterations {
            self.demap(&rx, snr, &decoder_ext, &mut channel_llr)?;
            let out = code.decode(&channel_llr, self.cfg.metric)?;
            decoder_ext = out.extrinsic;
            errors.push(out.decisions.iter().zip(&rx.info).filter(|(a, b)| a != b).count() as u64);
        }
        Ok(errors)
    }
}

/// Simulates frames at each Eb/N0 (dB) until the stop rule is met.
///
/// Frame `f` uses the same information bits, fading and unit-variance noise
/// at every Eb/N0, so points share random numbers.
pub fn simulate_fer(cfg: &FerConfig, ebn0_db: &[f64]) -> Result<FerCurve> {
    if cfg.stop.batch == 0 || cfg.stop.max_frames == 0 {
        return Err(Error::InvalidParameter("batch and max_frames must be positive".into()));
    }
    let link = Link::new(cfg)?;
    let rate = cfg.frame.rate();
    let iterations = cfg.frame.iterations;
    let mut points = Vec::with_capacity(ebn0_db.len());
    for &eb in ebn0_db {
        let snr_db = snr_db_from_ebn0(eb, rate);
        let snr = 10f64.powf(snr_db / 10.0);
        let mut total = Tally { frame_errors: vec![0; iterations], ..Default::default() };
        while total.frames < cfg.stop.max_frames {
            let end = (total.frames + cfg.stop.batch).min(cfg.stop.max_frames);
            let parts = cfg.exec.map_chunks_in(total.frames..end, 16, |range| -> Result<Tally> {
                let mut t = Tally { frame_errors: vec![0; iterations], ..Default::default() };
                for f in range {
                    let errors = link.run_frame(snr, f)?;
                    t.frames += 1;
                    t.bit_errors += errors.last().copied().unwrap_or(0);
                    for (slot, &e) in t.frame_errors.iter_mut().zip(&errors) {
                        *slot += (e > 0) as u64;
                    }
                }
                Ok(t)
            });
            for p in parts {
                total.merge(&p?);
            }
            if total.frame_errors[iterations - 1] >= cfg.stop.min_errors {
                break;
            }
        }
        let errors = total.frame_errors[iterations - 1];
        let (ci_low, ci_high) = wilson_interval(errors, total.frames, Z95);
        points.push(FerPoint {
            ebn0_db: eb,
            snr_db,
            frames: total.frames,
            frame_errors: errors,
            bit_errors: total.bit_errors,
            fer: errors as f64 / total.frames as f64,
            ber: total.bit_errors as f64 / (total.frames as f64 * cfg.frame.info_len as f64),
            ci_low,
            ci_high,
            iterations,
            errors_by_iteration: total.frame_errors,
        });
    }
    let labels: Vec<&str> = cfg.frame.rotations.iter().map(|r| r.name()).collect();
    Ok(FerCurve {
        points,
        meta: CurveMeta {
            model: format!("{}:{}", cfg.frame.constellation.name(), labels.join("+")),
            rate,
            blocks: cfg.frame.blocks(),
            m: cfg.fading.m(),
            seed: cfg.seed,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{Constellation, Labeling};
    use crate::rotation::parse_rotation_list;

    fn config(rot: &str, iterations: usize) -> FerConfig {
        let c = Constellation::qam(2, Labeling::Gray).unwrap();
        let mut frame = FrameConfig::new(c, parse_rotation_list(rot, 4).unwrap());
        frame.iterations = iterations;
        let mut cfg = FerConfig::new(frame, FadingSpec::new(4, 1.0).unwrap(), 11);
        cfg.stop = StopRule { min_errors: 20, max_frames: 400, batch: 64 };
        cfg
    }

    #[test]
    fn noiseless_frames_decode() {
        let mut cfg = config("2xcyclotomic2", 1);
        cfg.noise = NoiseMode::Noiseless;
        cfg.stop.max_frames = 200;
        let curve = simulate_fer(&cfg, &[30.0]).unwrap();
        assert_eq!(curve.points[0].frame_errors, 0);
        assert_eq!(curve.points[0].frames, 200);
    }

    #[test]
    fn stop_rule_and_bookkeeping() {
        let cfg = config("unrotated", 2);
        let curve = simulate_fer(&cfg, &[0.0]).unwrap();
        let p = &curve.points[0];
        assert!(p.frame_errors >= 20);
        assert_eq!(p.frames % 64, 0);
        assert_eq!(p.errors_by_iteration.len(), 2);
        assert_eq!(p.errors_by_iteration[1], p.frame_errors);
        assert!(p.ci_low <= p.fer && p.fer <= p.ci_high);
        assert!((p.snr_db - p.ebn0_db).abs() < 1e-12);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mut cfg = config("2xcyclotomic2", 2);
        cfg.stop = StopRule { min_errors: 1000, max_frames: 96, batch: 32 };
        cfg.exec = Exec::Sequential;
        let a = simulate_fer(&cfg, &[4.0]).unwrap();
        cfg.exec = Exec::Parallel;
        let b = simulate_fer(&cfg, &[4.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mismatched_fading_is_rejected() {
        let mut cfg = config("unrotated", 1);
        cfg.fading = FadingSpec::new(2, 1.0).unwrap();
        assert!(simulate_fer(&cfg, &[5.0]).is_err());
    }
}
