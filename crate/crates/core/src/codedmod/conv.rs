//! Rate-1/2 feedforward convolutional code of memory 2 with zero-tail
//! termination, and its 4-state BCJR decoder.
//!
//! LLRs follow `log P(b = 0) / P(b = 1)`. Coded bits are ordered
//! `c[2t] = g0 output`, `c[2t + 1] = g1 output`.

use crate::{Error, Result};

/// Magnitude limit applied to every LLR leaving the demapper or decoder.
pub const LLR_CLAMP: f64 = 50.0;

pub fn clamp_llr(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-LLR_CLAMP, LLR_CLAMP)
    }
}

/// Combination rule for path metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    /// Exact Jacobian logarithm.
    #[default]
    LogMap,
    /// `max` approximation.
    MaxLog,
}

impl Metric {
    #[inline]
    pub fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            Metric::MaxLog => a.max(b),
            Metric::LogMap => {
                if a == f64::NEG_INFINITY {
                    return b;
                }
                if b == f64::NEG_INFINITY {
                    return a;
                }
                a.max(b) + (-(a - b).abs()).exp().ln_1p()
            }
        }
    }
}

const STATES: usize = 4;
const MEMORY: usize = 2;

/// Generator pair in octal, memory 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvCode {
    generators: [u8; 2],
    /// `(outputs, next_state)` indexed by `state * 2 + u`.
    table: [([u8; 2], usize); 2 * STATES],
}

impl Default for ConvCode {
    fn default() -> Self {
        ConvCode::new(0o5, 0o7).expect("(5,7) is a valid memory-2 code")
    }
}

impl ConvCode {
    /// Generators are octal taps on `(u_t, u_{t-1}, u_{t-2})`, most
    /// significant bit on `u_t`.
    pub fn new(g0: u8, g1: u8) -> Result<Self> {
        if g0 >= 8 || g1 >= 8 || (g0 | g1) & 0b100 == 0 || (g0 | g1) & 0b001 == 0 {
            return Err(Error::InvalidParameter(format!(
                "generators ({g0:o},{g1:o}) do not define a memory-2 code"
            )));
        }
        let mut table = [([0u8; 2], 0usize); 2 * STATES];
        for state in 0..STATES {
            for u in 0..2 {
                let reg = (u << 2) | state;
                let out = [g0, g1].map(|g| ((g as usize & reg).count_ones() & 1) as u8);
                table[state * 2 + u] = (out, reg >> 1);
            }
        }
        Ok(ConvCode { generators: [g0, g1], table })
    }

    pub fn generators(&self) -> [u8; 2] {
        self.generators
    }

    pub fn memory(&self) -> usize {
        MEMORY
    }

    pub fn rate(&self) -> f64 {
        0.5
    }

    /// `2 (info_len + memory)`.
    pub fn coded_len(&self, info_len: usize) -> usize {
        2 * (info_len + MEMORY)
    }

    #[inline]
    fn step(&self, state: usize, u: usize) -> ([u8; 2], usize) {
        self.table[state * 2 + u]
    }

    /// Zero-tail encoding.
    pub fn encode(&self, bits: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.coded_len(bits.len()));
        let mut state = 0;
        for &u in bits.iter().chain(&[0u8; MEMORY]) {
            let (o, next) = self.step(state, (u & 1) as usize);
            out.extend_from_slice(&o);
            state = next;
        }
        out
    }

    /// BCJR over the terminated trellis.
    pub fn decode(&self, llr: &[f64], metric: Metric) -> Result<BcjrOutput> {
        if !llr.len().is_multiple_of(2) || llr.len() < 2 * (MEMORY + 1) {
            return Err(Error::InvalidParameter(format!(
                "LLR length {} does not match a terminated trellis",
                llr.len()
            )));
        }
        let steps = llr.len() / 2;
        let info_len = steps - MEMORY;
        let half = |l: f64, c: u8| if c == 0 { 0.5 * l } else { -0.5 * l };
        let ninf = f64::NEG_INFINITY;
        let inputs = |t: usize| if t < info_len { 0..2 } else { 0..1 };

        let mut alpha = vec![[ninf; STATES]; steps + 1];
        alpha[0][0] = 0.0;
        for t in 0..steps {
            let (l0, l1) = (llr[2 * t], llr[2 * t + 1]);
            let mut next = [ninf; STATES];
            for s in 0..STATES {
                let a = alpha[t][s];
                if a == ninf {
                    continue;
                }
                for u in inputs(t) {
                    let (o, ns) = self.step(s, u);
                    next[ns] = metric.combine(next[ns], a + half(l0, o[0]) + half(l1, o[1]));
                }
            }
            let max = next.iter().cloned().fold(ninf, f64::max);
            alpha[t + 1] = next.map(|v| v - max);
        }

        let mut beta = vec![[ninf; STATES]; steps + 1];
        beta[steps][0] = 0.0;
        for t in (0..steps).rev() {
            let (l0, l1) = (llr[2 * t], llr[2 * t + 1]);
            let mut cur = [ninf; STATES];
            for (s, slot) in cur.iter_mut().enumerate() {
                for u in inputs(t) {
                    let (o, ns) = self.step(s, u);
                    let b = beta[t + 1][ns];
                    if b != ninf {
                        *slot = metric.combine(*slot, b + half(l0, o[0]) + half(l1, o[1]));
                    }
                }
            }
            let max = cur.iter().cloned().fold(ninf, f64::max);
            beta[t] = cur.map(|v| v - max);
        }

        let mut info_llr = Vec::with_capacity(info_len);
        let mut extrinsic = vec![0.0; llr.len()];
        for t in 0..steps {
            let (l0, l1) = (llr[2 * t], llr[2 * t + 1]);
            let mut by_u = [ninf; 2];
            let mut ext = [[ninf; 2]; 2];
            for s in 0..STATES {
                let a = alpha[t][s];
                if a == ninf {
                    continue;
                }
                for u in inputs(t) {
                    let (o, ns) = self.step(s, u);
                    let b = beta[t + 1][ns];
                    if b == ninf {
                        continue;
                    }
                    let (g0, g1) = (half(l0, o[0]), half(l1, o[1]));
                    by_u[u] = metric.combine(by_u[u], a + g0 + g1 + b);
                    ext[0][o[0] as usize] = metric.combine(ext[0][o[0] as usize], a + g1 + b);
                    ext[1][o[1] as usize] = metric.combine(ext[1][o[1] as usize], a + g0 + b);
                }
            }
            if t < info_len {
                info_llr.push(clamp_llr(by_u[0] - by_u[1]));
            }
            for j in 0..2 {
                extrinsic[2 * t + j] = clamp_llr(ext[j][0] - ext[j][1]);
            }
        }
        let decisions = info_llr.iter().map(|&l| (l < 0.0) as u8).collect();
        Ok(BcjrOutput { info_llr, decisions, extrinsic })
    }
}

/// Decoder outputs for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BcjrOutput {
    /// A posteriori LLRs of the information bits.
    pub info_llr: Vec<f64>,
    /// Hard decisions, `1` where the info LLR is negative.
    pub decisions: Vec<u8>,
    /// Extrinsic LLRs of the coded bits (a posteriori minus channel input).
    pub extrinsic: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Hard-output Viterbi on the same trellis, maximizing `sum (1-2c) L / 2`.
    fn viterbi(code: &ConvCode, llr: &[f64]) -> Vec<u8> {
        let steps = llr.len() / 2;
        let info_len = steps - MEMORY;
        let mut metric = [f64::NEG_INFINITY; STATES];
        metric[0] = 0.0;
        let mut back = vec![[(0usize, 0u8); STATES]; steps];
        for t in 0..steps {
            let mut next = [f64::NEG_INFINITY; STATES];
            for s in 0..STATES {
                if metric[s] == f64::NEG_INFINITY {
                    continue;
                }
                for u in 0..if t < info_len { 2 } else { 1 } {
                    let (o, ns) = code.step(s, u);
                    let m = metric[s]
                        + if o[0] == 0 { llr[2 * t] } else { -llr[2 * t] } / 2.0
                        + if o[1] == 0 { llr[2 * t + 1] } else { -llr[2 * t + 1] } / 2.0;
                    if m > next[ns] {
                        next[ns] = m;
                        back[t][ns] = (s, u as u8);
                    }
                }
            }
            metric = next;
        }
        let mut state = 0;
        let mut bits = vec![0u8; steps];
        for t in (0..steps).rev() {
            let (prev, u) = back[t][state];
            bits[t] = u;
            state = prev;
        }
        bits.truncate(info_len);
        bits
    }

    fn noisy_llrs(coded: &[u8], sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        coded
            .iter()
            .map(|&c| {
                let x = 1.0 - 2.0 * c as f64;
                let n: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
                2.0 * (x + sigma * n) / (sigma * sigma)
            })
            .collect()
    }

    #[test]
    fn impulse_response() {
        let code = ConvCode::default();
        assert_eq!(code.encode(&[1, 0, 0]), vec![1, 1, 0, 1, 1, 1, 0, 0, 0, 0]);
        assert!(code.encode(&[0; 16]).iter().all(|&b| b == 0));
        assert_eq!(code.encode(&[0; 128]).len(), 260);
    }

    #[test]
    fn encoder_is_linear() {
        let code = ConvCode::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a: Vec<u8> = (0..40).map(|_| rng.random_range(0..2)).collect();
            let b: Vec<u8> = (0..40).map(|_| rng.random_range(0..2)).collect();
            let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let sum: Vec<u8> = code.encode(&a).iter().zip(code.encode(&b)).map(|(x, y)| x ^ y).collect();
            assert_eq!(code.encode(&ab), sum);
        }
    }

    #[test]
    fn rejects_bad_generators_and_lengths() {
        assert!(ConvCode::new(0o3, 0o1).is_err());
        assert!(ConvCode::new(0o11, 0o7).is_err());
        assert!(ConvCode::default().decode(&[0.0; 5], Metric::LogMap).is_err());
    }

    #[test]
    fn noiseless_llrs_decode_exactly() {
        let code = ConvCode::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let info: Vec<u8> = (0..128).map(|_| rng.random_range(0..2)).collect();
        let llr: Vec<f64> = code.encode(&info).iter().map(|&c| if c == 0 { 50.0 } else { -50.0 }).collect();
        for metric in [Metric::LogMap, Metric::MaxLog] {
            assert_eq!(code.decode(&llr, metric).unwrap().decisions, info);
        }
    }

    #[test]
    fn zero_llrs_give_zero_extrinsic() {
        let out = ConvCode::default().decode(&[0.0; 260], Metric::LogMap).unwrap();
        assert!(out.extrinsic.iter().all(|&e| e == 0.0));
        assert!(out.info_llr.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn extrinsic_excludes_own_input() {
        let code = ConvCode::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let info: Vec<u8> = (0..32).map(|_| rng.random_range(0..2)).collect();
        let mut llr = noisy_llrs(&code.encode(&info), 0.9, &mut rng);
        let base = code.decode(&llr, Metric::LogMap).unwrap().extrinsic;
        llr[17] += 3.0;
        let moved = code.decode(&llr, Metric::LogMap).unwrap().extrinsic;
        assert!((base[17] - moved[17]).abs() < 1e-9);
    }

    #[test]
    fn max_log_matches_viterbi() {
        let code = ConvCode::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let info: Vec<u8> = (0..128).map(|_| rng.random_range(0..2)).collect();
            let llr = noisy_llrs(&code.encode(&info), 0.8, &mut rng);
            assert_eq!(code.decode(&llr, Metric::MaxLog).unwrap().decisions, viterbi(&code, &llr));
        }
    }
}
