//! Monte Carlo information outage probability and diversity-slope fitting.
//!
//! A trial draws one fading realization and declares an outage when the
//! instantaneous mutual information does not exceed the rate,
//! `I(snr, H) <= R`. Trial `t` always draws the same realization, whatever
//! the SNR point, so the curves use common random numbers.

use std::f64::consts::LN_2;

use crate::channel::FadingSpec;
use crate::exec::{stream_rng, sub_stream_rng, Exec, Stream};
use crate::mutual_info::{log2_det_block, McAccumulator, Scheme};
use crate::stats::{linear_fit, wilson_interval, Z95};
use crate::{Error, Result};

/// Input distribution whose outage is estimated.
#[derive(Debug, Clone)]
pub enum InputModel {
    /// i.i.d. complex Gaussian inputs (closed-form information). Unitary
    /// rotations leave this model unchanged.
    Gaussian,
    /// Discrete constellation with rotations.
    Discrete(Scheme),
}

impl InputModel {
    pub fn label(&self) -> String {
        match self {
            InputModel::Gaussian => "gaussian".into(),
            InputModel::Discrete(s) => format!("{}:{}", s.constellation().name(), s.label()),
        }
    }
}

/// How the discrete-input information is resolved against the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteMiPolicy {
    pub quadrature_nodes: usize,
    /// Blocks whose quadrature cost `nodes^(2N) 4^(MN)` stays below this are
    /// integrated by Gauss-Hermite; the rest use adaptive Monte Carlo.
    pub quadrature_cost_limit: u128,
    pub initial_samples: usize,
    pub max_samples: usize,
    pub enumerate_limit: usize,
}

impl Default for DiscreteMiPolicy {
    fn default() -> Self {
        DiscreteMiPolicy {
            quadrature_nodes: 16,
            quadrature_cost_limit: 100_000,
            initial_samples: 64,
            max_samples: 4096,
            enumerate_limit: 256,
        }
    }
}

/// Everything but the SNR needed to estimate one outage point.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageConfig {
    pub fading: FadingSpec,
    /// Rate in bits per channel use.
    pub rate: f64,
    pub trials: u64,
    pub seed: u64,
    pub exec: Exec,
    pub policy: DiscreteMiPolicy,
}

impl OutageConfig {
    pub fn new(fading: FadingSpec, rate: f64, trials: u64, seed: u64) -> Self {
        OutageConfig { fading, rate, trials, seed, exec: Exec::default(), policy: DiscreteMiPolicy::default() }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }
}

/// One point of a probability-versus-SNR curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub snr_db: f64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub events: u64,
    /// Trials whose information stayed within three standard errors of the
    /// rate after the Monte Carlo budget was exhausted.
    pub ambiguous: u64,
}

impl CurvePoint {
    pub fn from_counts(snr_db: f64, events: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(events, trials, Z95);
        CurvePoint {
            snr_db,
            estimate: if trials == 0 { 0.0 } else { events as f64 / trials as f64 },
            ci_low,
            ci_high,
            trials,
            events,
            ambiguous: 0,
        }
    }

    /// True when more than 5% of the trials were threshold-ambiguous.
    pub fn threshold_flagged(&self) -> bool {
        self.trials > 0 && self.ambiguous as f64 > 0.05 * self.trials as f64
    }
}

/// Description attached to a curve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveMeta {
    pub model: String,
    pub rate: f64,
    pub blocks: usize,
    pub m: f64,
    pub seed: u64,
}

/// SNR-indexed probability estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct SimCurve {
    points: Vec<CurvePoint>,
    pub meta: CurveMeta,
}

impl SimCurve {
    pub fn new(points: Vec<CurvePoint>, meta: CurveMeta) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].snr_db > w[0].snr_db)) {
            return Err(Error::InvalidParameter("curve SNR values must be strictly increasing".into()));
        }
        for p in &points {
            if !(0.0..=1.0).contains(&p.estimate) || p.ci_low > p.estimate || p.estimate > p.ci_high {
                return Err(Error::InvalidParameter(format!("inconsistent curve point at {} dB", p.snr_db)));
            }
        }
        Ok(SimCurve { points, meta })
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }
}

/// `Eb/N0 = SNR / R` in dB.
pub fn ebn0_db(snr_db: f64, rate: f64) -> f64 {
    snr_db - 10.0 * rate.log10()
}

/// `SNR = R Eb/N0` in dB.
pub fn snr_db_from_ebn0(ebn0_db: f64, rate: f64) -> f64 {
    ebn0_db + 10.0 * rate.log10()
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Outcome of one discrete-input trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialDecision {
    pub outage: bool,
    pub ambiguous: bool,
}

/// Decides `I(snr, H) <= rate` for one realization of the discrete scheme.
///
/// Realizations whose Gaussian/cardinality upper bound is already below the
/// rate are declared in outage, and those whose cutoff-rate lower bound is
/// above it are declared reliable, without evaluating the discrete
/// information.
pub fn discrete_trial(
    scheme: &Scheme,
    gamma: &[f64],
    snr: f64,
    rate: f64,
    policy: &DiscreteMiPolicy,
    seed: u64,
    trial: u64,
) -> Result<TrialDecision> {
    let b = scheme.blocks() as f64;
    let h: Vec<f64> = gamma.iter().map(|g| g.sqrt()).collect();
    let offsets = scheme.offsets();
    let mut bound = 0.0;
    for ((eval, rot), &off) in scheme.evaluators().iter().zip(scheme.rotations()).zip(&offsets) {
        let logdet = log2_det_block(snr, &h[off..off + eval.dim()], rot)?;
        bound += logdet.min(eval.bits() as f64);
    }
    if bound / b <= rate {
        return Ok(TrialDecision { outage: true, ambiguous: false });
    }

    // Cutoff-rate lower bound: above the rate proves there is no outage.
    let received: Vec<_> = scheme
        .evaluators()
        .iter()
        .zip(&offsets)
        .map(|(eval, &off)| eval.received_candidates(&h[off..off + eval.dim()], snr))
        .collect();
    let mut floor = 0.0;
    for (eval, u) in scheme.evaluators().iter().zip(&received) {
        if eval.candidate_count() <= policy.enumerate_limit {
            floor += eval.cutoff_rate(u);
        }
    }
    if floor / b > rate {
        return Ok(TrialDecision { outage: false, ambiguous: false });
    }

    let mut exact = 0.0;
    let mut sampled = Vec::new();
    for (k, ((eval, &off), u)) in scheme.evaluators().iter().zip(&offsets).zip(received).enumerate() {
        let hk = &h[off..off + eval.dim()];
        let nodes = policy.quadrature_nodes as u128;
        let cost = nodes.pow(2 * eval.dim() as u32) * (eval.candidate_count() as u128).pow(2);
        if eval.dim() <= 2 && cost <= policy.quadrature_cost_limit {
            exact += eval.gauss_hermite(hk, snr, policy.quadrature_nodes, u128::MAX)?.value;
        } else {
            let rng = sub_stream_rng(seed, Stream::MiNoise, k as u64, trial);
            sampled.push((eval, u, rng, McAccumulator::default()));
        }
    }
    if sampled.is_empty() {
        return Ok(TrialDecision { outage: exact / b <= rate, ambiguous: false });
    }

    let mut target = policy.initial_samples.max(2);
    loop {
        let mut value = exact;
        let mut var = 0.0;
        for (eval, u, rng, acc) in sampled.iter_mut() {
            let need = target.saturating_sub(acc.count);
            eval.accumulate(u, need, policy.enumerate_limit, rng, acc);
            let est = eval.finish(acc);
            value += est.value;
            var += est.std_error * est.std_error;
        }
        let (value, se) = (value / b, var.sqrt() / b);
        let resolved = (value - rate).abs() > 3.0 * se;
        if resolved || target >= policy.max_samples {
            return Ok(TrialDecision { outage: value <= rate, ambiguous: !resolved });
        }
        target = (target * 2).min(policy.max_samples);
    }
}

/// Outage probability at one SNR.
pub fn estimate_outage(model: &InputModel, cfg: &OutageConfig, snr_db: f64) -> Result<CurvePoint> {
    if !(cfg.rate > 0.0) {
        return Err(Error::InvalidParameter(format!("rate must be > 0, got {}", cfg.rate)));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    if let InputModel::Discrete(s) = model {
        if s.blocks() != cfg.fading.blocks() {
            return Err(Error::DimensionMismatch { expected: cfg.fading.blocks(), actual: s.blocks() });
        }
    }
    let snr = db_to_linear(snr_db);
    let blocks = cfg.fading.blocks();
    let chunk = match model {
        InputModel::Gaussian => 1 << 16,
        InputModel::Discrete(_) => 256,
    };
    let threshold = cfg.rate * blocks as f64 * LN_2;
    let counts = cfg.exec.map_chunks(cfg.trials, chunk, |range| -> Result<(u64, u64)> {
        let mut gamma = vec![0.0; blocks];
        let (mut events, mut ambiguous) = (0u64, 0u64);
        for t in range {
            let mut rng = stream_rng(cfg.seed, Stream::Fading, t);
            cfg.fading.sample_into(&mut rng, &mut gamma);
            match model {
                InputModel::Gaussian => {
                    let nats: f64 = gamma.iter().map(|g| (snr * g).ln_1p()).sum();
                    if nats <= threshold {
                        events += 1;
                    }
                }
                InputModel::Discrete(scheme) => {
                    let d = discrete_trial(scheme, &gamma, snr, cfg.rate, &cfg.policy, cfg.seed, t)?;
                    events += d.outage as u64;
                    ambiguous += d.ambiguous as u64;
                }
            }
        }
        Ok((events, ambiguous))
    });
    let (mut events, mut ambiguous) = (0, 0);
    for c in counts {
        let (e, a) = c?;
        events += e;
        ambiguous += a;
    }
    let mut point = CurvePoint::from_counts(snr_db, events, cfg.trials);
    point.ambiguous = ambiguous;
    Ok(point)
}

/// Outage curve over increasing SNR points (dB).
pub fn outage_sweep(model: &InputModel, cfg: &OutageConfig, snr_db: &[f64]) -> Result<SimCurve> {
    let points = snr_db
        .iter()
        .map(|&s| estimate_outage(model, cfg, s))
        .collect::<Result<Vec<_>>>()?;
    SimCurve::new(
        points,
        CurveMeta {
            model: model.label(),
            rate: cfg.rate,
            blocks: cfg.fading.blocks(),
            m: cfg.fading.m(),
            seed: cfg.seed,
        },
    )
}

/// Least-squares diversity slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    /// Slope of `-log10 P` against `log10 SNR`.
    pub slope: f64,
    pub intercept: f64,
    pub points_used: usize,
}

/// Fits `-log10(estimate)` against `log10(SNR)` over points whose estimate
/// lies in `[p_lo, p_hi]` and whose confidence interval spans less than a
/// factor of two.
pub fn fit_slope(curve: &SimCurve, p_lo: f64, p_hi: f64) -> Result<SlopeFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = curve
        .points()
        .iter()
        .filter(|p| p.estimate >= p_lo && p.estimate <= p_hi && p.estimate > 0.0)
        .filter(|p| p.ci_low > 0.0 && p.ci_high / p.ci_low < 2.0)
        .map(|p| (p.snr_db / 10.0, -p.estimate.log10()))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::InsufficientPoints { found: xs.len() });
    }
    let (intercept, slope) = linear_fit(&xs, &ys);
    Ok(SlopeFit { slope, intercept, points_used: xs.len() })
}
