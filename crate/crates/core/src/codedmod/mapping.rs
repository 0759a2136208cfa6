//! Frame layout: generator split, interleaving, labeling and rotation.
//!
//! The two coded streams (outputs of the first and second generator) are
//! interleaved separately. Stream `g` fills blocks `g B/2 .. (g+1) B/2`:
//! its `t`-th `M`-bit label goes to block `g B/2 + (t mod B/2)` at channel
//! use `t div B/2`. Within a label the first bit is the most significant.
//! Each rotation then acts on the `N` symbols its blocks carry at one
//! channel use.

use rand::seq::SliceRandom;

use crate::codedmod::conv::ConvCode;
use crate::constellation::Constellation;
use crate::exec::{stream_rng, Stream};
use crate::rotation::Rotation;
use crate::{Complex64, Error, Result};

/// Marker for bit positions that carry padding rather than coded bits.
pub const PAD: usize = usize::MAX;

/// Code, modulation and rotation parameters of one frame.
#[derive(Debug, Clone)]
pub struct FrameConfig {
    pub info_len: usize,
    pub code: ConvCode,
    pub constellation: Constellation,
    /// Rotations covering the `B` blocks in order.
    pub rotations: Vec<Rotation>,
    pub interleaver_seed: u64,
    /// Number of demapper passes (each followed by a decoder pass).
    pub iterations: usize,
    /// Pad each stream with zeros up to a whole number of channel uses.
    /// When disabled, frames that do not fit exactly are rejected.
    pub padding: bool,
}

impl FrameConfig {
    pub fn new(constellation: Constellation, rotations: Vec<Rotation>) -> Self {
        FrameConfig {
            info_len: 128,
            code: ConvCode::default(),
            constellation,
            rotations,
            interleaver_seed: 0,
            iterations: 1,
            padding: true,
        }
    }

    pub fn blocks(&self) -> usize {
        self.rotations.iter().map(Rotation::dim).sum()
    }

    /// Nominal rate `R = r M` in bits per channel use (termination and
    /// padding excluded).
    pub fn rate(&self) -> f64 {
        self.code.rate() * self.constellation.bits_per_symbol() as f64
    }

    /// Errors unless `rate` equals `r M`.
    pub fn check_rate(&self, rate: f64) -> Result<()> {
        if (rate - self.rate()).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "rate {rate} does not equal r*M = {} for this code and constellation",
                self.rate()
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.info_len == 0 {
            return Err(Error::InvalidParameter("info_len must be positive".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("at least one iteration is required".into()));
        }
        if self.rotations.is_empty() {
            return Err(Error::InvalidParameter("no rotations given".into()));
        }
        let b = self.blocks();
        if !b.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "the generator split needs an even number of blocks, got B={b}"
            )));
        }
        let stream = self.info_len + self.code.memory();
        let per_use = self.constellation.bits_per_symbol() * b / 2;
        if !self.padding && !stream.is_multiple_of(per_use) {
            return Err(Error::InvalidParameter(format!(
                "{stream} bits per stream do not fill whole channel uses of {per_use} bits; enable padding or change info_len"
            )));
        }
        Ok(())
    }
}

/// Precomputed frame layout.
#[derive(Debug, Clone)]
pub struct FrameMapper {
    cfg: FrameConfig,
    offsets: Vec<usize>,
    uses: usize,
    /// Coded-bit index (or [`PAD`]) for each `(rotation k, use l, bit p)`,
    /// stored at `(group_offset[k] + l * M N_k) + p`.
    bit_map: Vec<usize>,
    group_offset: Vec<usize>,
}

/// A mapped frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedFrame {
    /// Labels `S`, `B` rows of `L` entries.
    pub labels: Vec<Vec<usize>>,
    /// Constellation symbols before rotation.
    pub symbols: Vec<Vec<Complex64>>,
    /// Rotated codeword `X`.
    pub x: Vec<Vec<Complex64>>,
}

impl FrameMapper {
    pub fn new(cfg: FrameConfig) -> Result<Self> {
        cfg.validate()?;
        let b = cfg.blocks();
        let m = cfg.constellation.bits_per_symbol();
        let half = b / 2;
        let stream = cfg.info_len + cfg.code.memory();
        let per_use = m * half;
        let uses = stream.div_ceil(per_use);
        let padded = uses * per_use;

        let mut offsets = Vec::with_capacity(cfg.rotations.len());
        let mut group_offset = Vec::with_capacity(cfg.rotations.len());
        let (mut off, mut goff) = (0, 0);
        for r in &cfg.rotations {
            offsets.push(off);
            group_offset.push(goff);
            off += r.dim();
            goff += uses * m * r.dim();
        }
        let mut bit_map = vec![PAD; goff];
        let mut block_group = vec![(0, 0); b];
        for (k, r) in cfg.rotations.iter().enumerate() {
            for i in 0..r.dim() {
                block_group[offsets[k] + i] = (k, i);
            }
        }
        for g in 0..2 {
            let mut perm: Vec<usize> = (0..stream).collect();
            perm.shuffle(&mut stream_rng(cfg.interleaver_seed, Stream::Interleaver, g as u64));
            for pos in 0..padded {
                let t = pos / m;
                let j = pos % m;
                let block = g * half + t % half;
                let l = t / half;
                let (k, i) = block_group[block];
                let mn = m * cfg.rotations[k].dim();
                let slot = group_offset[k] + l * mn + i * m + j;
                bit_map[slot] = if pos < stream { 2 * perm[pos] + g } else { PAD };
            }
        }
        Ok(FrameMapper { cfg, offsets, uses, bit_map, group_offset })
    }

    pub fn config(&self) -> &FrameConfig {
        &self.cfg
    }

    /// Channel uses per block, `L`.
    pub fn uses(&self) -> usize {
        self.uses
    }

    pub fn coded_len(&self) -> usize {
        self.cfg.code.coded_len(self.cfg.info_len)
    }

    /// First block of each rotation.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Coded-bit indices carried by rotation `k` at channel use `l`, one per
    /// label bit (`M N_k` entries, [`PAD`] for padding).
    pub fn bit_slots(&self, k: usize, l: usize) -> &[usize] {
        let mn = self.cfg.constellation.bits_per_symbol() * self.cfg.rotations[k].dim();
        let start = self.group_offset[k] + l * mn;
        &self.bit_map[start..start + mn]
    }

    /// Maps coded bits to labels, symbols and the rotated codeword.
    pub fn map(&self, coded: &[u8]) -> Result<MappedFrame> {
        if coded.len() != self.coded_len() {
            return Err(Error::DimensionMismatch { expected: self.coded_len(), actual: coded.len() });
        }
        let b = self.cfg.blocks();
        let m = self.cfg.constellation.bits_per_symbol();
        let zero = Complex64::new(0.0, 0.0);
        let mut labels = vec![vec![0usize; self.uses]; b];
        let mut symbols = vec![vec![zero; self.uses]; b];
        let mut x = vec![vec![zero; self.uses]; b];
        let mut s = Vec::new();
        let mut out = Vec::new();
        for (k, rot) in self.cfg.rotations.iter().enumerate() {
            let n = rot.dim();
            s.resize(n, zero);
            out.resize(n, zero);
            for l in 0..self.uses {
                let slots = self.bit_slots(k, l);
                for i in 0..n {
                    let label = slots[i * m..(i + 1) * m]
                        .iter()
                        .fold(0, |acc, &c| (acc << 1) | if c == PAD { 0 } else { coded[c] as usize & 1 });
                    labels[self.offsets[k] + i][l] = label;
                    s[i] = self.cfg.constellation.symbol(label);
                    symbols[self.offsets[k] + i][l] = s[i];
                }
                rot.rotate_into(&s, &mut out);
                for i in 0..n {
                    x[self.offsets[k] + i][l] = out[i];
                }
            }
        }
        Ok(MappedFrame { labels, symbols, x })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::Labeling;
    use crate::rotation::parse_rotation_list;
    use rand::{Rng, SeedableRng};

    fn cfg(rot: &str, blocks: usize, bits: usize) -> FrameConfig {
        let c = Constellation::qam(bits, Labeling::Gray).unwrap();
        FrameConfig::new(c, parse_rotation_list(rot, blocks).unwrap())
    }

    fn random_coded(mapper: &FrameMapper, seed: u64) -> Vec<u8> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let info: Vec<u8> = (0..mapper.config().info_len).map(|_| rng.random_range(0..2)).collect();
        mapper.config().code.encode(&info)
    }

    #[test]
    fn default_frame_needs_padding() {
        let mut c = cfg("2xcyclotomic2", 4, 2);
        let mapper = FrameMapper::new(c.clone()).unwrap();
        assert_eq!(mapper.uses(), 33);
        c.padding = false;
        assert!(FrameMapper::new(c.clone()).is_err());
        c.info_len = 126;
        assert_eq!(FrameMapper::new(c).unwrap().uses(), 32);
    }

    #[test]
    fn every_coded_bit_is_placed_once() {
        for (rot, bits) in [("unrotated", 2), ("2xcyclotomic2", 2), ("kruskemper4", 4)] {
            let mapper = FrameMapper::new(cfg(rot, 4, bits)).unwrap();
            let mut seen = vec![0; mapper.coded_len()];
            for &c in mapper.bit_map.iter().filter(|&&c| c != PAD) {
                seen[c] += 1;
            }
            assert!(seen.iter().all(|&n| n == 1), "{rot}");
        }
    }

    #[test]
    fn generator_split_onto_block_halves() {
        let mapper = FrameMapper::new(cfg("unrotated", 4, 2)).unwrap();
        for k in 0..4 {
            for l in 0..mapper.uses() {
                for &c in mapper.bit_slots(k, l).iter().filter(|&&c| c != PAD) {
                    assert_eq!(c % 2, k / 2, "block {k} carries the wrong generator stream");
                }
            }
        }
    }

    #[test]
    fn identity_rotation_leaves_symbols() {
        let mapper = FrameMapper::new(cfg("2xidentity2", 4, 2)).unwrap();
        let f = mapper.map(&random_coded(&mapper, 1)).unwrap();
        assert_eq!(f.x, f.symbols);
    }

    #[test]
    fn unitary_rotation_preserves_column_norms() {
        let mapper = FrameMapper::new(cfg("kruskemper4", 4, 4)).unwrap();
        let f = mapper.map(&random_coded(&mapper, 2)).unwrap();
        for l in 0..mapper.uses() {
            let ns: f64 = (0..4).map(|b| f.symbols[b][l].norm_sqr()).sum();
            let nx: f64 = (0..4).map(|b| f.x[b][l].norm_sqr()).sum();
            assert!((ns - nx).abs() < 1e-9);
        }
    }

    #[test]
    fn rate_bookkeeping() {
        let c = cfg("2xcyclotomic2", 4, 2);
        assert_eq!(c.rate(), 1.0);
        assert!(c.check_rate(1.0).is_ok());
        assert!(c.check_rate(2.0).is_err());
        assert_eq!(cfg("kruskemper4", 4, 4).rate(), 2.0);
    }

    #[test]
    fn rejects_odd_blocks_and_zero_iterations() {
        assert!(FrameMapper::new(cfg("unrotated", 3, 2)).is_err());
        let mut c = cfg("unrotated", 4, 2);
        c.iterations = 0;
        assert!(FrameMapper::new(c).is_err());
    }
}
