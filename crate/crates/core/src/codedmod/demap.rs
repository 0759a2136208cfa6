//! Exhaustive a posteriori demapping of one rotated `N`-symbol slice.

use crate::codedmod::conv::clamp_llr;
use crate::constellation::Constellation;
use crate::mutual_info::BlockMi;
use crate::rotation::Rotation;
use crate::{Complex64, Error, Result};

/// Default limit on `2^(MN)`.
pub const DEFAULT_CANDIDATE_CAP: usize = 1 << 16;

/// APP demapper over all `2^(MN)` candidates. Bit `p` of a slice is bit
/// `p mod M` (most significant first) of the label of symbol `p div M`.
#[derive(Debug, Clone)]
pub struct Demapper {
    block: BlockMi,
}

impl Demapper {
    pub fn new(constellation: &Constellation, rotation: &Rotation, cap: usize) -> Result<Self> {
        let (m, n) = (constellation.bits_per_symbol(), rotation.dim());
        let candidates = 1u128 << (m * n).min(127);
        if candidates > cap as u128 {
            return Err(Error::DemapperCap { dim: n, bits_per_symbol: m, candidates, cap });
        }
        Ok(Demapper { block: BlockMi::new(constellation, rotation)? })
    }

    pub fn dim(&self) -> usize {
        self.block.dim()
    }

    /// `M N`.
    pub fn bits(&self) -> usize {
        self.block.bits()
    }

    fn check(&self, y: &[Complex64], h: &[f64], priors: &[f64]) -> Result<()> {
        for (len, want) in [(y.len(), self.dim()), (h.len(), self.dim()), (priors.len(), self.bits())] {
            if len != want {
                return Err(Error::DimensionMismatch { expected: want, actual: len });
            }
        }
        Ok(())
    }

    /// Log-metrics `-|y - sqrt(snr) H x(c)|^2` of every candidate.
    fn distances(&self, y: &[Complex64], h: &[f64], snr: f64) -> Vec<f64> {
        let n = self.dim();
        let amp = snr.sqrt();
        self.block
            .candidates()
            .chunks_exact(n)
            .map(|x| -(0..n).map(|i| (y[i] - x[i] * (amp * h[i])).norm_sqr()).sum::<f64>())
            .collect()
    }

    /// Extrinsic LLRs (`log P(0)/P(1)`), written to `out`.
    ///
    /// The prior of bit `p` never enters the computation of extrinsic `p`:
    /// the other bits' priors are summed from prefix and suffix tables that
    /// exclude it.
    pub fn extrinsic(&self, y: &[Complex64], h: &[f64], snr: f64, priors: &[f64], out: &mut [f64]) -> Result<()> {
        self.check(y, h, priors)?;
        if out.len() != self.bits() {
            return Err(Error::DimensionMismatch { expected: self.bits(), actual: out.len() });
        }
        let nb = self.bits();
        let d = self.distances(y, h, snr);
        // Log prior weight relative to all-zero labels: bit 1 adds -L.
        let mut prefix: Vec<Vec<f64>> = vec![vec![0.0]];
        for p in 0..nb {
            let prev = &prefix[p];
            let next: Vec<f64> = (0..prev.len() * 2).map(|a| prev[a >> 1] - (a & 1) as f64 * priors[p]).collect();
            prefix.push(next);
        }
        let mut suffix: Vec<Vec<f64>> = vec![Vec::new(); nb];
        suffix[nb - 1] = vec![0.0];
        for p in (1..nb).rev() {
            let width = nb - p;
            let prev = &suffix[p];
            let next: Vec<f64> =
                (0..1usize << width).map(|r| prev[r & ((1 << (width - 1)) - 1)] - (r >> (width - 1)) as f64 * priors[p]).collect();
            suffix[p - 1] = next;
        }
        for p in 0..nb {
            let shift = nb - p;
            let low = (1usize << (nb - 1 - p)) - 1;
            let bitpos = nb - 1 - p;
            let metric = |c: usize| d[c] + prefix[p][c >> shift] + suffix[p][c & low];
            let mut max = [f64::NEG_INFINITY; 2];
            for c in 0..d.len() {
                let b = (c >> bitpos) & 1;
                max[b] = max[b].max(metric(c));
            }
            let mut sum = [0.0; 2];
            for c in 0..d.len() {
                let b = (c >> bitpos) & 1;
                sum[b] += (metric(c) - max[b]).exp();
            }
            out[p] = clamp_llr((max[0] + sum[0].ln()) - (max[1] + sum[1].ln()));
        }
        Ok(())
    }

    /// Normalized posterior probability of every candidate.
    pub fn posteriors(&self, y: &[Complex64], h: &[f64], snr: f64, priors: &[f64]) -> Result<Vec<f64>> {
        self.check(y, h, priors)?;
        let nb = self.bits();
        let mut v = self.distances(y, h, snr);
        for (c, vc) in v.iter_mut().enumerate() {
            for (p, &l) in priors.iter().enumerate() {
                if (c >> (nb - 1 - p)) & 1 == 1 {
                    *vc -= l;
                }
            }
        }
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for vc in v.iter_mut() {
            *vc = (*vc - max).exp();
            total += *vc;
        }
        v.iter_mut().for_each(|vc| *vc /= total);
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::Labeling;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn qpsk() -> Constellation {
        Constellation::qam(2, Labeling::Gray).unwrap()
    }

    #[test]
    fn qpsk_closed_form() {
        let c = qpsk();
        let dm = Demapper::new(&c, &Rotation::identity(1), DEFAULT_CANDIDATE_CAP).unwrap();
        // Sign of the coordinate carrying bit value 0.
        let s0 = c.symbol(0);
        let (sr, si) = (s0.re.signum(), s0.im.signum());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let snr: f64 = rng.random_range(0.1..100.0);
            let h: f64 = rng.random_range(0.05..2.0);
            let y = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let mut out = [0.0; 2];
            dm.extrinsic(&[y], &[h], snr, &[0.0, 0.0], &mut out).unwrap();
            let k = 2.0 * snr.sqrt() * h * 2f64.sqrt();
            assert_abs_diff_eq!(out[0], clamp_llr(sr * k * y.re), epsilon = 1e-9);
            assert_abs_diff_eq!(out[1], clamp_llr(si * k * y.im), epsilon = 1e-9);
        }
    }

    #[test]
    fn noiseless_signs_recover_bits() {
        let c = Constellation::qam(4, Labeling::SetPartitioning).unwrap();
        let rot = Rotation::cyclotomic2();
        let dm = Demapper::new(&c, &rot, DEFAULT_CANDIDATE_CAP).unwrap();
        let h = [0.8, 1.3];
        for cand in 0..256usize {
            let s = [c.symbol(cand >> 4), c.symbol(cand & 15)];
            let x = rot.rotate(&s).unwrap();
            let y: Vec<Complex64> = x.iter().zip(h).map(|(xi, hi)| xi * (hi * 10.0)).collect();
            let mut out = [0.0; 8];
            dm.extrinsic(&y, &h, 100.0, &[0.0; 8], &mut out).unwrap();
            for (p, &l) in out.iter().enumerate() {
                assert_eq!((l < 0.0) as usize, (cand >> (7 - p)) & 1);
            }
        }
    }

    #[test]
    fn posteriors_are_normalized() {
        let dm = Demapper::new(&qpsk(), &Rotation::kruskemper4(), DEFAULT_CANDIDATE_CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let y: Vec<Complex64> = (0..4).map(|_| Complex64::new(rng.random(), rng.random())).collect();
        let priors: Vec<f64> = (0..8).map(|_| rng.random_range(-4.0..4.0)).collect();
        let p = dm.posteriors(&y, &[1.0, 0.5, 0.2, 1.1], 3.0, &priors).unwrap();
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn extrinsic_is_independent_of_own_prior() {
        let dm = Demapper::new(&qpsk(), &Rotation::cyclotomic2(), DEFAULT_CANDIDATE_CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let y: Vec<Complex64> = (0..2).map(|_| Complex64::new(rng.random(), rng.random())).collect();
            let h = [rng.random_range(0.1..2.0), rng.random_range(0.1..2.0)];
            let mut priors: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..5.0)).collect();
            let mut a = [0.0; 4];
            dm.extrinsic(&y, &h, 4.0, &priors, &mut a).unwrap();
            for p in 0..4 {
                let saved = priors[p];
                priors[p] = rng.random_range(-20.0..20.0);
                let mut b = [0.0; 4];
                dm.extrinsic(&y, &h, 4.0, &priors, &mut b).unwrap();
                assert_eq!(a[p], b[p]);
                priors[p] = saved;
            }
        }
    }

    #[test]
    fn extrinsic_matches_posterior_marginals() {
        let dm = Demapper::new(&qpsk(), &Rotation::cyclotomic2(), DEFAULT_CANDIDATE_CAP).unwrap();
        let y = [Complex64::new(0.3, -0.7), Complex64::new(-1.1, 0.2)];
        let h = [0.9, 0.4];
        let priors = [0.5, -1.0, 2.0, 0.0];
        let post = dm.posteriors(&y, &h, 2.0, &priors).unwrap();
        let mut ext = [0.0; 4];
        dm.extrinsic(&y, &h, 2.0, &priors, &mut ext).unwrap();
        for p in 0..4 {
            let p0: f64 = post.iter().enumerate().filter(|(c, _)| (c >> (3 - p)) & 1 == 0).map(|(_, v)| v).sum();
            let app = (p0 / (1.0 - p0)).ln();
            assert_abs_diff_eq!(ext[p] + priors[p], app, epsilon = 1e-9);
        }
    }

    #[test]
    fn cap_names_the_combination() {
        let c = Constellation::qam(4, Labeling::Gray).unwrap();
        let err = Demapper::new(&c, &Rotation::kruskemper4(), 1 << 12).unwrap_err();
        assert_eq!(err, Error::DemapperCap { dim: 4, bits_per_symbol: 4, candidates: 1 << 16, cap: 1 << 12 });
        assert!(err.to_string().contains("N=4"));
    }
}
