//! Nakagami-m block-fading channel.
//!
//! Amplitudes `|h_b|` follow a Nakagami-m law, so the power gains
//! `gamma_b = |h_b|^2` are Gamma(shape m, rate m) with unit mean. The fading
//! phase is assumed corrected at the receiver, so `h_b = sqrt(gamma_b)` is
//! real and nonnegative.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Number of blocks and Nakagami parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSpec {
    blocks: usize,
    m: f64,
}

impl FadingSpec {
    pub fn new(blocks: usize, m: f64) -> Result<Self> {
        if blocks == 0 {
            return Err(Error::InvalidParameter("B must be >= 1".into()));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter(format!("Nakagami m must be > 0, got {m}")));
        }
        Ok(FadingSpec { blocks, m })
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization {
        let mut gamma = vec![0.0; self.blocks];
        self.sample_into(rng, &mut gamma);
        ChannelRealization { gamma }
    }

    /// Fills `gamma` with i.i.d. unit-mean power gains.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, gamma: &mut [f64]) {
        for g in gamma.iter_mut() {
            *g = sample_standard_gamma(rng, self.m) / self.m;
        }
    }
}

/// Gamma(shape, 1) variate by Marsaglia-Tsang squeeze/rejection.
///
/// Shapes below one use `G(a) = G(a + 1) U^(1/a)`.
pub fn sample_standard_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let u: f64 = rng.random();
        return sample_standard_gamma(rng, shape + 1.0) * u.powf(shape.recip());
    }
    let d = shape - 1.0 / 3.0;
    let c = (9.0 * d).sqrt().recip();
    loop {
        let x: f64 = StandardNormal.sample(rng);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u: f64 = rng.random();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Circularly-symmetric complex Gaussian with unit variance per complex entry.
pub fn complex_noise<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Rician factor K to the equivalent Nakagami m.
pub fn rician_to_m(k: f64) -> f64 {
    (k + 1.0).powi(2) / (2.0 * k + 1.0)
}

/// Per-block power gains of one codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    gamma: Vec<f64>,
}

impl ChannelRealization {
    pub fn from_gamma(gamma: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() {
            return Err(Error::InvalidParameter("empty channel realization".into()));
        }
        if let Some(g) = gamma.iter().find(|g| !(**g >= 0.0)) {
            return Err(Error::InvalidParameter(format!("power gains must be >= 0, got {g}")));
        }
        Ok(ChannelRealization { gamma })
    }

    /// From real amplitudes `h_b` (sign is dropped).
    pub fn from_amplitudes(h: &[f64]) -> Result<Self> {
        Self::from_gamma(h.iter().map(|x| x * x).collect())
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn blocks(&self) -> usize {
        self.gamma.len()
    }

    /// `h_b = sqrt(gamma_b)`.
    pub fn amplitudes(&self) -> Vec<f64> {
        self.gamma.iter().map(|g| g.sqrt()).collect()
    }
}

/// `Y = sqrt(snr) diag(h) X + Z`, with `X` given as `B` rows of `L` symbols.
pub fn apply_channel<R: Rng + ?Sized>(
    x: &[Vec<Complex64>],
    h: &[f64],
    snr: f64,
    rng: &mut R,
) -> Result<Vec<Vec<Complex64>>> {
    if x.len() != h.len() {
        return Err(Error::DimensionMismatch { expected: h.len(), actual: x.len() });
    }
    let len = x.first().map_or(0, Vec::len);
    if let Some(row) = x.iter().find(|r| r.len() != len) {
        return Err(Error::DimensionMismatch { expected: len, actual: row.len() });
    }
    let amp = snr.sqrt();
    Ok(x.iter()
        .zip(h)
        .map(|(row, &hb)| row.iter().map(|&s| s * (amp * hb) + complex_noise(rng)).collect())
        .collect())
}

/// Normalized fading `alpha_b = -log(gamma_b) / log(snr)`.
///
/// A zero gain maps to `alpha_b = +inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedFading {
    pub alpha: Vec<f64>,
    pub snr: f64,
}

pub fn to_alpha(realization: &ChannelRealization, snr: f64) -> Result<NormalizedFading> {
    if !(snr > 1.0) {
        return Err(Error::InvalidParameter(format!("normalized fading needs snr > 1, got {snr}")));
    }
    let log_snr = snr.ln();
    let alpha = realization
        .gamma()
        .iter()
        .map(|&g| if g == 0.0 { f64::INFINITY } else { -g.ln() / log_snr })
        .collect();
    Ok(NormalizedFading { alpha, snr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{stream_rng, Stream};
    use approx::assert_abs_diff_eq;

    #[test]
    fn rician_mapping() {
        assert_eq!(rician_to_m(0.0), 1.0);
        assert_abs_diff_eq!(rician_to_m(1.0), 4.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rician_to_m(100.0), 10201.0 / 201.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rician_to_m(100.0), 50.75, epsilon = 0.01);
    }

    #[test]
    fn spec_validation() {
        assert!(FadingSpec::new(0, 1.0).is_err());
        assert!(FadingSpec::new(4, 0.0).is_err());
        assert!(FadingSpec::new(4, f64::NAN).is_err());
        assert!(FadingSpec::new(4, 0.2).is_ok());
    }

    fn moments(m: f64, n: usize, seed: u64) -> (f64, f64) {
        let spec = FadingSpec::new(1, m).unwrap();
        let mut rng = stream_rng(seed, Stream::Fading, 0);
        let mut g = [0.0];
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            spec.sample_into(&mut rng, &mut g);
            assert!(g[0] >= 0.0);
            s1 += g[0];
            s2 += g[0] * g[0];
        }
        let mean = s1 / n as f64;
        (mean, s2 / n as f64 - mean * mean)
    }

    #[test]
    fn rayleigh_mean() {
        let (mean, _) = moments(1.0, 1_000_000, 11);
        assert_abs_diff_eq!(mean, 1.0, epsilon = 0.01);
    }

    #[test]
    fn nakagami4_variance() {
        let (_, var) = moments(4.0, 1_000_000, 12);
        assert!((var - 0.25).abs() < 0.02 * 0.25, "var = {var}");
    }

    #[test]
    fn small_shape_mean() {
        let (mean, var) = moments(0.3, 400_000, 13);
        assert_abs_diff_eq!(mean, 1.0, epsilon = 0.02);
        assert!((var - 1.0 / 0.3).abs() < 0.1 / 0.3, "var = {var}");
    }

    #[test]
    fn channel_application() {
        let mut rng = stream_rng(1, Stream::Noise, 0);
        let x = vec![vec![Complex64::new(1.0, -1.0); 3]; 2];
        let pure = apply_channel(&x, &[1.0, 1.0], 0.0, &mut rng).unwrap();
        let mut rng = stream_rng(1, Stream::Noise, 0);
        let noise: Vec<Complex64> = (0..6).map(|_| complex_noise(&mut rng)).collect();
        let flat: Vec<Complex64> = pure.into_iter().flatten().collect();
        assert_eq!(flat, noise);
        assert!(apply_channel(&x, &[1.0], 1.0, &mut rng).is_err());
        let ragged = vec![vec![Complex64::new(0.0, 0.0); 3], vec![Complex64::new(0.0, 0.0); 2]];
        assert!(apply_channel(&ragged, &[1.0, 1.0], 1.0, &mut rng).is_err());
    }

    #[test]
    fn noise_has_unit_variance() {
        let mut rng = stream_rng(5, Stream::Noise, 0);
        let x = vec![vec![Complex64::new(0.6, 0.8); 1_000_000]];
        let snr = 4.0;
        let y = apply_channel(&x, &[0.7], snr, &mut rng).unwrap();
        let var = y[0]
            .iter()
            .map(|v| (v - Complex64::new(0.6, 0.8) * (2.0 * 0.7)).norm_sqr())
            .sum::<f64>()
            / 1e6;
        assert!((var - 1.0).abs() < 0.01, "var = {var}");
    }

    #[test]
    fn alpha_transform() {
        let r = ChannelRealization::from_gamma(vec![1.0, 0.01, 0.01, 0.0]).unwrap();
        let a = to_alpha(&r, 100.0).unwrap();
        assert_eq!(a.alpha[0], 0.0);
        assert_abs_diff_eq!(a.alpha[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.alpha[2], 1.0, epsilon = 1e-12);
        assert_eq!(a.alpha[3], f64::INFINITY);
        let r = ChannelRealization::from_gamma(vec![1.0 / 250.0]).unwrap();
        assert_abs_diff_eq!(to_alpha(&r, 250.0).unwrap().alpha[0], 1.0, epsilon = 1e-12);
        assert!(to_alpha(&r, 1.0).is_err());
        assert!(ChannelRealization::from_gamma(vec![-1.0]).is_err());
    }

    #[test]
    fn deterministic_streams() {
        let spec = FadingSpec::new(4, 0.5).unwrap();
        let a = spec.sample(&mut stream_rng(9, Stream::Fading, 17));
        let b = spec.sample(&mut stream_rng(9, Stream::Fading, 17));
        assert_eq!(a, b);
    }
}
