//! Square QAM signal sets with Gray or set-partitioning labels.
//!
//! Points are stored row-major over the QAM grid: row 0 is the top row
//! (largest imaginary part), column 0 the leftmost (most negative real part).
//! With `side = 2^(M/2)`, column `i` and row `r` give the unnormalized point
//! `(2i - side + 1) + j (side - 1 - 2r)`, scaled to unit mean energy.
//!
//! A label is an `M`-bit integer; bit `j` of the symbol (`j = 0` first) is
//! `(label >> (M - 1 - j)) & 1`.
//!
//! Gray: `label = gray(i) << (M/2) | gray(r)` with `gray(x) = x ^ (x >> 1)`.
//!
//! Set partitioning: with `i1 = i >> 1`, `r1 = r >> 1`, the label bits from
//! the least significant upward are `(i + r) & 1`, `i & 1`, `(i1 + r1) & 1`,
//! `i1 & 1`. Fixing the lowest `k` bits leaves a subset whose minimum squared
//! distance is `2^k` times that of the full constellation.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::{Error, Result};

/// Bit-to-point labeling rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Labeling {
    Gray,
    SetPartitioning,
}

impl Labeling {
    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "gray" | "gr" => Ok(Labeling::Gray),
            "sp" | "set-partitioning" | "set_partitioning" => Ok(Labeling::SetPartitioning),
            other => Err(Error::InvalidParameter(format!("unknown labeling '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Labeling::Gray => "gray",
            Labeling::SetPartitioning => "sp",
        }
    }
}

/// A labeled complex signal set with unit average energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    bits_per_symbol: usize,
    labeling: Labeling,
    label_to_point: Vec<usize>,
    point_to_label: Vec<usize>,
    name: String,
}

fn gray(x: usize) -> usize {
    x ^ (x >> 1)
}

fn sp_label(i: usize, r: usize, bits: usize) -> usize {
    let mut label = ((i + r) & 1) | ((i & 1) << 1);
    if bits == 4 {
        let (i1, r1) = (i >> 1, r >> 1);
        label |= (((i1 + r1) & 1) << 2) | ((i1 & 1) << 3);
    }
    label
}

impl Constellation {
    /// Square QPSK (`M = 2`) or 16-QAM (`M = 4`).
    pub fn qam(bits_per_symbol: usize, labeling: Labeling) -> Result<Self> {
        if bits_per_symbol != 2 && bits_per_symbol != 4 {
            return Err(Error::UnsupportedBitsPerSymbol(bits_per_symbol));
        }
        let side = 1usize << (bits_per_symbol / 2);
        let size = side * side;
        let mut raw = Vec::with_capacity(size);
        let mut point_to_label = Vec::with_capacity(size);
        for r in 0..side {
            for i in 0..side {
                let re = 2.0 * i as f64 - (side as f64 - 1.0);
                let im = (side as f64 - 1.0) - 2.0 * r as f64;
                raw.push(Complex64::new(re, im));
                point_to_label.push(match labeling {
                    Labeling::Gray => (gray(i) << (bits_per_symbol / 2)) | gray(r),
                    Labeling::SetPartitioning => sp_label(i, r, bits_per_symbol),
                });
            }
        }
        let energy = raw.iter().map(|p| p.norm_sqr()).sum::<f64>() / size as f64;
        let scale = energy.sqrt().recip();
        let points = raw.into_iter().map(|p| p * scale).collect();
        let mut label_to_point = vec![usize::MAX; size];
        for (p, &l) in point_to_label.iter().enumerate() {
            label_to_point[l] = p;
        }
        debug_assert!(label_to_point.iter().all(|&p| p < size));
        let name = match bits_per_symbol {
            2 => "qpsk",
            _ => "qam16",
        };
        Ok(Constellation {
            points,
            bits_per_symbol,
            labeling,
            label_to_point,
            point_to_label,
            name: name.to_string(),
        })
    }

    /// Looks a constellation up by name (`qpsk`, `qam16`/`16qam`).
    pub fn from_name(name: &str, labeling: Labeling) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "qpsk" | "qam4" | "4qam" => Self::qam(2, labeling),
            "qam16" | "16qam" | "16-qam" => Self::qam(4, labeling),
            other => Err(Error::UnknownConstellation(other.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labeling(&self) -> Labeling {
        self.labeling
    }

    /// `M`, the number of bits per symbol.
    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// Points in grid (row-major) order.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point_of_label(&self, label: usize) -> usize {
        self.label_to_point[label]
    }

    pub fn label_of_point(&self, point: usize) -> usize {
        self.point_to_label[point]
    }

    /// Symbol carrying `label`.
    pub fn symbol(&self, label: usize) -> Complex64 {
        self.points[self.label_to_point[label]]
    }

    /// Maps `M` bits (first bit most significant) to a symbol.
    pub fn map_bits(&self, bits: &[u8]) -> Complex64 {
        debug_assert_eq!(bits.len(), self.bits_per_symbol);
        let label = bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b as usize & 1));
        self.symbol(label)
    }

    /// Bit `j` (0 = first) of `label`.
    pub fn label_bit(&self, label: usize, j: usize) -> u8 {
        ((label >> (self.bits_per_symbol - 1 - j)) & 1) as u8
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.size() as f64
    }

    pub fn min_distance_sq(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (a, p) in self.points.iter().enumerate() {
            for q in &self.points[a + 1..] {
                best = best.min((p - q).norm_sqr());
            }
        }
        best
    }

    /// All distinct nonzero differences `s - s'`, sorted by (re, im).
    pub fn difference_set(&self) -> Vec<Complex64> {
        // Differences lie on a scaled integer grid; quantize to deduplicate.
        let unit = self.min_distance_sq().sqrt() / 2.0;
        let mut keys = BTreeSet::new();
        for p in &self.points {
            for q in &self.points {
                let d = p - q;
                let key = ((d.re / unit).round() as i64, (d.im / unit).round() as i64);
                if key != (0, 0) {
                    keys.insert(key);
                }
            }
        }
        keys.into_iter()
            .map(|(a, b)| Complex64::new(a as f64 * unit, b as f64 * unit))
            .collect()
    }
}
