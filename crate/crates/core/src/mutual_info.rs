//! Instantaneous mutual information of block-fading channels.
//!
//! For discrete inputs each rotation `k` induces an `N x N` real MIMO channel
//! `sqrt(snr) H_k M_k`. With `u(s) = sqrt(snr) H_k M_k s` the per-block
//! information in bits is
//!
//! ```text
//! I_k = MN - 2^-MN  sum_s  E_z[ log2( sum_s' exp(-|u(s) - u(s') + z|^2 + |z|^2) ) ]
//! ```
//!
//! where `z ~ CN(0, I_N)`; the `s' = s` term contributes the leading `1`.
//! The inner sum is a log-sum-exp with running max subtraction.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rand::Rng;

use crate::channel::complex_noise;
use crate::constellation::Constellation;
use crate::exec::{stream_rng, Stream};
use crate::quadrature::GaussHermite;
use crate::rotation::{parse_rotation_list, Rotation};
use crate::{Error, Result};

/// Largest supported `M N` (candidate count `2^(MN)`).
pub const MAX_BLOCK_BITS: usize = 16;

/// How a mutual information value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiMethod {
    ClosedForm,
    /// Tensor Gauss-Hermite rule with this many nodes per real dimension.
    GaussHermite { nodes: usize },
    /// Monte Carlo with this many noise draws.
    MonteCarlo { samples: usize },
}

impl MiMethod {
    pub fn label(&self) -> String {
        match self {
            MiMethod::ClosedForm => "closed_form".into(),
            MiMethod::GaussHermite { nodes } => format!("gauss_hermite({nodes})"),
            MiMethod::MonteCarlo { samples } => format!("monte_carlo({samples})"),
        }
    }
}

/// A mutual information value with its estimator standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: MiMethod,
}

/// Knobs for the discrete-input estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiOptions {
    /// Upper bound on `nodes^(2N) * 4^(MN)` exponentials for quadrature.
    pub quadrature_cost_cap: u128,
    /// Monte Carlo averages over every `s` when `2^(MN)` is at most this,
    /// and draws `s` uniformly together with `z` otherwise.
    pub enumerate_limit: usize,
    /// Seed of the noise draws (common random numbers across SNR points).
    pub seed: u64,
}

impl Default for MiOptions {
    fn default() -> Self {
        MiOptions { quadrature_cost_cap: 100_000_000, enumerate_limit: 256, seed: 0 }
    }
}

/// Gaussian-input information `(1/B) sum_b log2(1 + snr gamma_b)`.
pub fn gaussian_mi(snr: f64, gamma: &[f64]) -> MiEstimate {
    let value = if gamma.is_empty() {
        0.0
    } else {
        gamma.iter().map(|g| (snr * g).ln_1p()).sum::<f64>() / (LN_2 * gamma.len() as f64)
    };
    MiEstimate { value, std_error: 0.0, method: MiMethod::ClosedForm }
}

/// `log2 det(I + snr H M M^T H)` for one rotation and its channel slice.
pub fn log2_det_block(snr: f64, h: &[f64], rotation: &Rotation) -> Result<f64> {
    let n = rotation.dim();
    if h.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: h.len() });
    }
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mm: f64 = (0..n).map(|k| rotation.entry(i, k) * rotation.entry(j, k)).sum();
            a[i * n + j] = snr * h[i] * h[j] * mm + if i == j { 1.0 } else { 0.0 };
        }
    }
    // Cholesky; the matrix is identity plus a PSD term.
    let mut log_det = 0.0;
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        let d = d.max(f64::MIN_POSITIVE).sqrt();
        a[j * n + j] = d;
        log_det += 2.0 * d.ln();
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Ok(log_det / LN_2)
}

/// Gaussian-input information of the rotated channel,
/// `(1/B) sum_k log2 det(I + snr H_k M_k M_k^T H_k)`.
pub fn gaussian_logdet_mi(snr: f64, gamma: &[f64], rotations: &[Rotation]) -> Result<f64> {
    let total: usize = rotations.iter().map(Rotation::dim).sum();
    if total != gamma.len() {
        return Err(Error::DimensionMismatch { expected: total, actual: gamma.len() });
    }
    let h: Vec<f64> = gamma.iter().map(|g| g.sqrt()).collect();
    let mut offset = 0;
    let mut acc = 0.0;
    for r in rotations {
        acc += log2_det_block(snr, &h[offset..offset + r.dim()], r)?;
        offset += r.dim();
    }
    Ok(acc / gamma.len() as f64)
}

/// Running sums for a Monte Carlo mean.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct McAccumulator {
    pub count: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl McAccumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count.max(1) as f64
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            return f64::INFINITY;
        }
        let n = self.count as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Per-rotation evaluator holding the `2^(MN)` rotated candidate vectors.
///
/// Candidate `c` stacks `N` symbols whose labels are the `M`-bit fields of
/// `c`, most significant field first.
#[derive(Debug, Clone)]
pub struct BlockMi {
    dim: usize,
    bits: usize,
    candidates: Vec<Complex64>,
}

impl BlockMi {
    pub fn new(constellation: &Constellation, rotation: &Rotation) -> Result<Self> {
        let m = constellation.bits_per_symbol();
        let n = rotation.dim();
        let bits = m * n;
        if bits > MAX_BLOCK_BITS {
            return Err(Error::CapExceeded {
                requested: 1u128 << bits,
                cap: 1u128 << MAX_BLOCK_BITS,
            });
        }
        let count = 1usize << bits;
        let mask = (1usize << m) - 1;
        let mut candidates = vec![Complex64::new(0.0, 0.0); count * n];
        let mut s = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..count {
            for (i, slot) in s.iter_mut().enumerate() {
                *slot = constellation.symbol((c >> (m * (n - 1 - i))) & mask);
            }
            rotation.rotate_into(&s, &mut candidates[c * n..(c + 1) * n]);
        }
        Ok(BlockMi { dim: n, bits, candidates })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `M N`, the saturation value in bits.
    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn candidate_count(&self) -> usize {
        1 << self.bits
    }

    /// Rotated candidates (`N` entries per candidate).
    pub fn candidates(&self) -> &[Complex64] {
        &self.candidates
    }

    /// Noiseless received candidates `sqrt(snr) h . x(c)`.
    pub fn received_candidates(&self, h: &[f64], snr: f64) -> Vec<Complex64> {
        let amp = snr.sqrt();
        self.candidates
            .chunks_exact(self.dim)
            .flat_map(|x| x.iter().zip(h).map(move |(&xi, &hi)| xi * (amp * hi)))
            .collect()
    }

    /// `log2 sum_c exp(-|u_s - u_c + z|^2 + |z|^2)`.
    fn log2_sum(&self, u: &[Complex64], s: usize, z: &[Complex64], w: &mut [Complex64]) -> f64 {
        let n = self.dim;
        let mut zn = 0.0;
        for i in 0..n {
            w[i] = u[s * n + i] + z[i];
            zn += z[i].norm_sqr();
        }
        let mut max = f64::NEG_INFINITY;
        let mut acc = 0.0;
        for uc in u.chunks_exact(n) {
            let mut d = 0.0;
            for i in 0..n {
                d += (w[i] - uc[i]).norm_sqr();
            }
            let e = zn - d;
            if e > max {
                acc = acc * (max - e).exp() + 1.0;
                max = e;
            } else {
                acc += (e - max).exp();
            }
        }
        (max + acc.ln()) / LN_2
    }

    /// Cutoff rate `-log2 (2^(-2MN) sum_{c,c'} exp(-|u_c - u_c'|^2 / 4))`
    /// of the received candidates, a lower bound on the information.
    pub fn cutoff_rate(&self, u: &[Complex64]) -> f64 {
        let n = self.dim;
        let mut total = 0.0;
        for (a, ua) in u.chunks_exact(n).enumerate() {
            // Diagonal terms contribute 1 each, off-diagonal ones twice.
            total += 1.0;
            for ub in u.chunks_exact(n).skip(a + 1) {
                let d: f64 = ua.iter().zip(ub).map(|(x, y)| (x - y).norm_sqr()).sum();
                total += 2.0 * (-0.25 * d).exp();
            }
        }
        self.clamp(2.0 * self.bits as f64 - total.log2())
    }

    fn check_h(&self, h: &[f64]) -> Result<()> {
        if h.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: h.len() });
        }
        Ok(())
    }

    fn clamp(&self, v: f64) -> f64 {
        v.clamp(0.0, self.bits as f64)
    }

    /// Tensor Gauss-Hermite evaluation (`N <= 2`).
    pub fn gauss_hermite(&self, h: &[f64], snr: f64, nodes: usize, cost_cap: u128) -> Result<MiEstimate> {
        self.check_h(h)?;
        if self.dim > 2 {
            return Err(Error::QuadratureDimension(self.dim));
        }
        let real_dims = 2 * self.dim as u32;
        let grid = (nodes as u128).pow(real_dims);
        let cost = grid * (self.candidate_count() as u128).pow(2);
        if cost > cost_cap {
            return Err(Error::CapExceeded { requested: cost, cap: cost_cap });
        }
        let rule = GaussHermite::new(nodes);
        let norm = PI.sqrt().recip();
        let u = self.received_candidates(h, snr);
        let mut z = vec![Complex64::new(0.0, 0.0); self.dim];
        let mut w = vec![Complex64::new(0.0, 0.0); self.dim];
        let mut idx = vec![0usize; real_dims as usize];
        let mut expectation = 0.0;
        for _ in 0..grid {
            let mut weight = 1.0;
            for (d, &k) in idx.iter().enumerate() {
                weight *= rule.weights()[k] * norm;
                let x = rule.nodes()[k];
                if d % 2 == 0 {
                    z[d / 2].re = x;
                } else {
                    z[d / 2].im = x;
                }
            }
            let inner: f64 = (0..self.candidate_count()).map(|s| self.log2_sum(&u, s, &z, &mut w)).sum();
            expectation += weight * inner;
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot < nodes {
                    break;
                }
                *slot = 0;
            }
        }
        let value = self.bits as f64 - expectation / self.candidate_count() as f64;
        Ok(MiEstimate {
            value: self.clamp(value),
            std_error: 0.0,
            method: MiMethod::GaussHermite { nodes },
        })
    }

    /// Adds `samples` Monte Carlo draws of the per-draw term to `acc`.
    pub fn accumulate<R: Rng + ?Sized>(
        &self,
        u: &[Complex64],
        samples: usize,
        enumerate_limit: usize,
        rng: &mut R,
        acc: &mut McAccumulator,
    ) {
        let mut z = vec![Complex64::new(0.0, 0.0); self.dim];
        let mut w = vec![Complex64::new(0.0, 0.0); self.dim];
        let count = self.candidate_count();
        for _ in 0..samples {
            for zi in z.iter_mut() {
                *zi = complex_noise(rng);
            }
            let term = if count <= enumerate_limit {
                (0..count).map(|s| self.log2_sum(u, s, &z, &mut w)).sum::<f64>() / count as f64
            } else {
                let s = rng.random_range(0..count);
                self.log2_sum(u, s, &z, &mut w)
            };
            acc.push(term);
        }
    }

    /// Converts accumulated terms into an estimate.
    pub fn finish(&self, acc: &McAccumulator) -> MiEstimate {
        MiEstimate {
            value: self.clamp(self.bits as f64 - acc.mean()),
            std_error: acc.std_error(),
            method: MiMethod::MonteCarlo { samples: acc.count },
        }
    }

    pub fn monte_carlo<R: Rng + ?Sized>(
        &self,
        h: &[f64],
        snr: f64,
        samples: usize,
        enumerate_limit: usize,
        rng: &mut R,
    ) -> Result<MiEstimate> {
        self.check_h(h)?;
        if samples == 0 {
            return Err(Error::InvalidParameter("Monte Carlo needs at least one sample".into()));
        }
        let u = self.received_candidates(h, snr);
        let mut acc = McAccumulator::default();
        self.accumulate(&u, samples, enumerate_limit, rng, &mut acc);
        Ok(self.finish(&acc))
    }

    /// Bits per block with the requested method.
    pub fn evaluate<R: Rng + ?Sized>(
        &self,
        h: &[f64],
        snr: f64,
        method: MiMethod,
        opts: &MiOptions,
        rng: &mut R,
    ) -> Result<MiEstimate> {
        match method {
            MiMethod::GaussHermite { nodes } => self.gauss_hermite(h, snr, nodes, opts.quadrature_cost_cap),
            MiMethod::MonteCarlo { samples } => self.monte_carlo(h, snr, samples, opts.enumerate_limit, rng),
            MiMethod::ClosedForm => Err(Error::InvalidParameter(
                "closed form is only available for Gaussian inputs".into(),
            )),
        }
    }
}

/// Per-block discrete-input information of one rotation (bits per block).
pub fn discrete_block_mi(
    constellation: &Constellation,
    rotation: &Rotation,
    h: &[f64],
    snr: f64,
    method: MiMethod,
    opts: &MiOptions,
) -> Result<MiEstimate> {
    let block = BlockMi::new(constellation, rotation)?;
    let mut rng = stream_rng(opts.seed, Stream::MiNoise, 0);
    block.evaluate(h, snr, method, opts, &mut rng)
}

/// A constellation combined with `K` rotations covering `B` blocks.
#[derive(Debug, Clone)]
pub struct Scheme {
    constellation: Constellation,
    rotations: Vec<Rotation>,
    evaluators: Vec<BlockMi>,
    label: String,
}

impl Scheme {
    pub fn new(constellation: Constellation, rotations: Vec<Rotation>) -> Result<Self> {
        if rotations.is_empty() {
            return Err(Error::InvalidParameter("a scheme needs at least one rotation".into()));
        }
        let evaluators = rotations
            .iter()
            .map(|r| BlockMi::new(&constellation, r))
            .collect::<Result<Vec<_>>>()?;
        let label = rotation_label(&rotations);
        Ok(Scheme { constellation, rotations, evaluators, label })
    }

    /// Builds a scheme from a rotation list such as `2xcyclotomic2`.
    pub fn parse(constellation: Constellation, rotations: &str, blocks: usize) -> Result<Self> {
        Self::new(constellation, parse_rotation_list(rotations, blocks)?)
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn rotations(&self) -> &[Rotation] {
        &self.rotations
    }

    pub fn evaluators(&self) -> &[BlockMi] {
        &self.evaluators
    }

    /// Compact description, e.g. `2xcyclotomic2`.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// `B`, the total number of blocks.
    pub fn blocks(&self) -> usize {
        self.rotations.iter().map(Rotation::dim).sum()
    }

    /// Block offsets of each rotation.
    pub fn offsets(&self) -> Vec<usize> {
        self.rotations
            .iter()
            .scan(0, |acc, r| {
                let start = *acc;
                *acc += r.dim();
                Some(start)
            })
            .collect()
    }

    /// Bits per channel use: `(1/B) sum_k I_k`. Block `k` uses the noise
    /// stream `k` of `opts.seed`.
    pub fn mi(&self, gamma: &[f64], snr: f64, method: MiMethod, opts: &MiOptions) -> Result<MiEstimate> {
        let b = self.blocks();
        if gamma.len() != b {
            return Err(Error::DimensionMismatch { expected: b, actual: gamma.len() });
        }
        let h: Vec<f64> = gamma.iter().map(|g| g.sqrt()).collect();
        let mut value = 0.0;
        let mut var = 0.0;
        for ((k, eval), off) in self.evaluators.iter().enumerate().zip(self.offsets()) {
            let mut rng = stream_rng(opts.seed, Stream::MiNoise, k as u64);
            let est = eval.evaluate(&h[off..off + eval.dim()], snr, method, opts, &mut rng)?;
            value += est.value;
            var += est.std_error * est.std_error;
        }
        Ok(MiEstimate { value: value / b as f64, std_error: var.sqrt() / b as f64, method })
    }
}

fn rotation_label(rotations: &[Rotation]) -> String {
    let mut parts: Vec<(usize, &str)> = Vec::new();
    for r in rotations {
        match parts.last_mut() {
            Some((n, name)) if *name == r.name() => *n += 1,
            _ => parts.push((1, r.name())),
        }
    }
    parts
        .iter()
        .map(|(n, name)| if *n == 1 { name.to_string() } else { format!("{n}x{name}") })
        .collect::<Vec<_>>()
        .join("+")
}
