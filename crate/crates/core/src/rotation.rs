//! Real rotation matrices acting on vectors of complex symbols.
//!
//! Matrices use the column convention: `x = M s`, so the image of the `n`-th
//! unit vector is the `n`-th column. Entries are stored row-major exactly as
//! published, with every decimal digit kept.

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::exec::Exec;
use crate::{Error, Result};

/// Margins above this value count as full diversity.
pub const FULL_DIVERSITY_THRESHOLD: f64 = 1e-6;

/// Default cap on the number of difference vectors scanned.
pub const DEFAULT_SCAN_CAP: u128 = 100_000_000;

const CYCLOTOMIC2: [f64; 4] = [
    -0.5257311121, -0.8506508083, //
    -0.8506508083, 0.5257311121,
];

const KRUSKEMPER4: [f64; 16] = [
    -0.3663925121, -0.2264430248, -0.474464708, -0.7677000246, //
    -0.7677000238, -0.4744647078, 0.2264430248, 0.3663925106, //
    0.4230815704, -0.6845603618, -0.5049593144, 0.3120820189, //
    0.3120820187, -0.5049593142, 0.6845603618, -0.4230815707,
];

// Stored verbatim; columns 3 and 4 have squared norm close to 2.
const MIXED4: [f64; 16] = [
    0.2011885864868, 0.3255299710843, 0.284523627604, 0.4603689000663, //
    0.3255299710843, -0.2011885864868, 0.4603689000663, -0.284523627604, //
    0.4857122140913, 0.7858988711506, -0.6869008005781, -1.1114288422349, //
    0.7858988711506, -0.4857122140913, -1.1114288422349, 0.6869008005782,
];

/// An `N x N` real matrix with a name and a unitarity claim.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    dim: usize,
    entries: Vec<f64>,
    name: String,
    claims_unitary: bool,
}

impl Rotation {
    /// Builds a rotation from row-major entries. Matrices that claim to be
    /// unitary must pass the `1e-9` Frobenius residual check.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        entries: Vec<f64>,
        claims_unitary: bool,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("rotation dimension must be >= 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, actual: entries.len() });
        }
        let rot = Rotation { dim, entries, name: name.into(), claims_unitary };
        if claims_unitary && rot.unitarity_residual() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "rotation '{}' claims to be unitary but has residual {:.3e}",
                rot.name,
                rot.unitarity_residual()
            )));
        }
        Ok(rot)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Rotation { dim, entries, name: format!("identity{dim}"), claims_unitary: true }
    }

    /// The `N = 2` cyclotomic rotation, orthonormalized. It rounds back to
    /// the published ten-digit table.
    pub fn cyclotomic2() -> Self {
        let mut rot = Self::cyclotomic2_printed().orthonormalized();
        rot.name = "cyclotomic2".into();
        rot
    }

    /// The published cyclotomic table, digit for digit.
    pub fn cyclotomic2_printed() -> Self {
        Rotation {
            dim: 2,
            entries: CYCLOTOMIC2.to_vec(),
            name: "cyclotomic2-printed".into(),
            claims_unitary: true,
        }
    }

    /// The `N = 4` Krüskemper rotation: the orthogonal matrix nearest to
    /// the published table, which is only orthonormal to about `4e-9`.
    /// Entries differ from the table by less than `3e-9`.
    pub fn kruskemper4() -> Self {
        let mut rot = Self::kruskemper4_printed().orthonormalized();
        rot.name = "kruskemper4".into();
        rot
    }

    /// The published Krüskemper table, digit for digit.
    pub fn kruskemper4_printed() -> Self {
        Rotation {
            dim: 4,
            entries: KRUSKEMPER4.to_vec(),
            name: "kruskemper4-printed".into(),
            claims_unitary: false,
        }
    }

    /// Orthogonal polar factor (nearest orthogonal matrix in Frobenius
    /// norm), by Newton-Schulz iteration `X <- X (3I - X^T X) / 2`. The
    /// matrix must already be close to orthogonal.
    pub fn orthonormalized(&self) -> Self {
        let n = self.dim;
        let mut x = self.entries.clone();
        for _ in 0..20 {
            let mut xtx = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    xtx[i * n + j] = (0..n).map(|k| x[k * n + i] * x[k * n + j]).sum();
                }
            }
            let mut next = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    next[i * n + j] = (0..n)
                        .map(|k| {
                            let t = if k == j { 3.0 } else { 0.0 } - xtx[k * n + j];
                            x[i * n + k] * t
                        })
                        .sum::<f64>()
                        / 2.0;
                }
            }
            let delta: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            x = next;
            if delta < 1e-17 {
                break;
            }
        }
        Rotation { dim: n, entries: x, name: format!("{}-orthonormalized", self.name), claims_unitary: true }
    }

    /// The `N = 4` "mixed" matrix as published. It is not orthonormal, so it
    /// is flagged `claims_unitary = false`.
    pub fn mixed4() -> Self {
        Rotation {
            dim: 4,
            entries: MIXED4.to_vec(),
            name: "mixed4".into(),
            claims_unitary: false,
        }
    }

    /// Catalog lookup: `identity<N>` / `identity(N)`, `cyclotomic2`,
    /// `kruskemper4`, `mixed4`.
    pub fn from_name(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        match lower.as_str() {
            "cyclotomic2" | "cyclotomic" => return Ok(Self::cyclotomic2()),
            "kruskemper4" | "kruskemper" => return Ok(Self::kruskemper4()),
            "cyclotomic2-printed" => return Ok(Self::cyclotomic2_printed()),
            "kruskemper4-printed" => return Ok(Self::kruskemper4_printed()),
            "mixed4" | "mixed" => return Ok(Self::mixed4()),
            _ => {}
        }
        if let Some(rest) = lower.strip_prefix("identity") {
            let digits = rest.trim_start_matches('(').trim_end_matches(')');
            if let Ok(n) = digits.parse::<usize>() {
                if n >= 1 {
                    return Ok(Self::identity(n));
                }
            }
        }
        Err(Error::UnknownRotation(name.to_string()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn claims_unitary(&self) -> bool {
        self.claims_unitary
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Column `col` of the matrix.
    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.dim).map(|r| self.entry(r, col)).collect()
    }

    /// `||M M^T - I||_F`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| self.entry(i, k) * self.entry(j, k)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                acc += (dot - target).powi(2);
            }
        }
        acc.sqrt()
    }

    /// Squared Euclidean norm of every column.
    pub fn column_norms_sq(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|c| (0..self.dim).map(|r| self.entry(r, c).powi(2)).sum())
            .collect()
    }

    /// `x = M s`.
    pub fn rotate(&self, s: &[Complex64]) -> Result<Vec<Complex64>> {
        if s.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: s.len() });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        self.rotate_into(s, &mut out);
        Ok(out)
    }

    /// Allocation-free [`Rotation::rotate`]; slices must have length `dim`.
    pub fn rotate_into(&self, s: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        for (r, o) in out.iter_mut().enumerate().take(n) {
            let row = &self.entries[r * n..(r + 1) * n];
            *o = row.iter().zip(s).map(|(&m, &x)| x * m).sum();
        }
    }
}

/// Parses a rotation list such as `2xcyclotomic2`, `kruskemper4`,
/// `cyclotomic2+identity2` or `unrotated` (which expands to `blocks` copies of
/// `identity1`).
pub fn parse_rotation_list(spec: &str, blocks: usize) -> Result<Vec<Rotation>> {
    let mut out = Vec::new();
    for token in spec.split('+').map(str::trim) {
        if token.eq_ignore_ascii_case("unrotated") || token.eq_ignore_ascii_case("none") {
            out.extend((0..blocks).map(|_| Rotation::identity(1)));
            continue;
        }
        let (count, name) = match token.split_once(['x', '*']) {
            Some((n, rest)) if !n.is_empty() && n.chars().all(|c| c.is_ascii_digit()) => {
                (n.parse::<usize>().unwrap_or(0), rest)
            }
            _ => (1, token),
        };
        if count == 0 {
            return Err(Error::InvalidParameter(format!("bad rotation token '{token}'")));
        }
        let rot = Rotation::from_name(name)?;
        out.extend(std::iter::repeat_n(rot, count));
    }
    let total: usize = out.iter().map(Rotation::dim).sum();
    if total != blocks {
        return Err(Error::DimensionMismatch { expected: blocks, actual: total });
    }
    Ok(out)
}

/// Outcome of the exhaustive full-diversity scan.
#[derive(Debug, Clone, PartialEq)]
pub struct DiversityScan {
    /// `min` over nonzero difference vectors `d` of `min_n |(M d)_n|`.
    pub margin: f64,
    pub vectors_scanned: u128,
}

impl DiversityScan {
    pub fn is_full_diversity(&self) -> bool {
        self.margin > FULL_DIVERSITY_THRESHOLD
    }
}

/// Scans every nonzero `d` in `(D ∪ {0})^N` where `D` is the difference set
/// of `constellation`, and returns the smallest rotated component modulus.
///
/// Zero means the rotation is not full-diversity for this constellation.
pub fn full_diversity_margin(
    rotation: &Rotation,
    constellation: &Constellation,
    cap: u128,
    exec: Exec,
) -> Result<DiversityScan> {
    let n = rotation.dim();
    let mut alphabet = vec![Complex64::new(0.0, 0.0)];
    alphabet.extend(constellation.difference_set());
    let q = alphabet.len() as u128;
    let total = (0..n).try_fold(1u128, |acc, _| acc.checked_mul(q)).unwrap_or(u128::MAX);
    let vectors = total - 1;
    if vectors > cap {
        return Err(Error::CapExceeded { requested: vectors, cap });
    }
    let total = total as u64;
    let q = q as u64;
    let chunk_mins = exec.map_chunks_in(1..total, 1 << 14, |range| {
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        let mut best = f64::INFINITY;
        for idx in range {
            let mut rem = idx;
            for slot in d.iter_mut() {
                *slot = alphabet[(rem % q) as usize];
                rem /= q;
            }
            rotation.rotate_into(&d, &mut x);
            let worst = x.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
            best = best.min(worst);
        }
        best
    });
    let margin = chunk_mins.into_iter().fold(f64::INFINITY, f64::min);
    Ok(DiversityScan { margin, vectors_scanned: vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::Labeling;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn catalog_entries_match_published_values() {
        let printed = Rotation::from_name("cyclotomic2-printed").unwrap();
        assert_eq!(printed.entries(), &[-0.5257311121, -0.8506508083, -0.8506508083, 0.5257311121]);
        let cyc = Rotation::from_name("cyclotomic2").unwrap();
        let rounded: Vec<f64> = cyc.entries().iter().map(|v| (v * 1e10).round() / 1e10).collect();
        assert_eq!(rounded, printed.entries());
        let printed = Rotation::from_name("kruskemper4-printed").unwrap();
        assert_eq!(printed.column(0), vec![-0.3663925121, -0.7677000238, 0.4230815704, 0.3120820187]);
        let k = Rotation::from_name("kruskemper4").unwrap();
        for (a, b) in k.entries().iter().zip(printed.entries()) {
            assert!((a - b).abs() < 3e-9);
        }
        assert_eq!(Rotation::from_name("identity(2)").unwrap(), Rotation::identity(2));
        assert_eq!(Rotation::from_name("identity4").unwrap().dim(), 4);
        assert!(matches!(Rotation::from_name("hadamard8"), Err(Error::UnknownRotation(_))));
        assert!(Rotation::from_name("identity0").is_err());
    }

    #[test]
    fn unitarity_of_catalog() {
        assert!(Rotation::cyclotomic2().unitarity_residual() <= 1e-9);
        assert!(Rotation::kruskemper4().unitarity_residual() <= 1e-9);
        let printed = Rotation::kruskemper4_printed();
        assert!(!printed.claims_unitary());
        assert!(printed.unitarity_residual() > 1e-9 && printed.unitarity_residual() < 1e-8);
        assert_eq!(Rotation::identity(4).unitarity_residual(), 0.0);
        let mixed = Rotation::mixed4();
        assert!(!mixed.claims_unitary());
        let norms = mixed.column_norms_sq();
        assert_abs_diff_eq!(norms[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(norms[2], 2.0, epsilon = 1e-9);
        assert!(mixed.unitarity_residual() > 0.5);
    }

    #[test]
    fn new_rejects_false_unitarity_claims() {
        assert!(Rotation::new("bad", 2, vec![1.0, 1.0, 0.0, 1.0], true).is_err());
        assert!(Rotation::new("ok", 2, vec![1.0, 1.0, 0.0, 1.0], false).is_ok());
        assert!(matches!(
            Rotation::new("short", 2, vec![1.0], false),
            Err(Error::DimensionMismatch { expected: 4, actual: 1 })
        ));
    }

    #[test]
    fn rotate_examples() {
        let s = vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, -1.0), c(2.0, 2.0)];
        assert_eq!(Rotation::identity(4).rotate(&s).unwrap(), s);
        let x = Rotation::cyclotomic2_printed().rotate(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(x, vec![c(-0.5257311121, 0.0), c(-0.8506508083, 0.0)]);
        let x = Rotation::cyclotomic2().rotate(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((x[0].re + 0.5257311121).abs() < 1e-10 && (x[1].re + 0.8506508083).abs() < 1e-10);
        assert!(matches!(
            Rotation::cyclotomic2().rotate(&s),
            Err(Error::DimensionMismatch { expected: 2, actual: 4 })
        ));
    }

    #[test]
    fn margins() {
        let qpsk = Constellation::qam(2, Labeling::Gray).unwrap();
        let qam16 = Constellation::qam(4, Labeling::Gray).unwrap();
        let id = full_diversity_margin(&Rotation::identity(2), &qpsk, DEFAULT_SCAN_CAP, Exec::Sequential)
            .unwrap();
        assert_eq!(id.margin, 0.0);
        assert_eq!(id.vectors_scanned, 80);
        let cyc = full_diversity_margin(&Rotation::cyclotomic2(), &qpsk, DEFAULT_SCAN_CAP, Exec::Parallel)
            .unwrap();
        assert!(cyc.is_full_diversity(), "{cyc:?}");
        let cyc16 =
            full_diversity_margin(&Rotation::cyclotomic2(), &qam16, DEFAULT_SCAN_CAP, Exec::Parallel).unwrap();
        assert!(cyc16.is_full_diversity());
        assert!(full_diversity_margin(&Rotation::identity(3), &qam16, DEFAULT_SCAN_CAP, Exec::Parallel)
            .unwrap()
            .margin
            == 0.0);
    }

    #[test]
    fn rotation_lists() {
        let r = parse_rotation_list("2xcyclotomic2", 4).unwrap();
        assert_eq!(r, vec![Rotation::cyclotomic2(), Rotation::cyclotomic2()]);
        assert_eq!(parse_rotation_list("unrotated", 4).unwrap().len(), 4);
        assert_eq!(parse_rotation_list("kruskemper4", 4).unwrap().len(), 1);
        assert_eq!(parse_rotation_list("cyclotomic2+identity2", 4).unwrap()[1], Rotation::identity(2));
        assert!(matches!(
            parse_rotation_list("cyclotomic2", 4),
            Err(Error::DimensionMismatch { expected: 4, actual: 2 })
        ));
        assert!(parse_rotation_list("0xcyclotomic2", 4).is_err());
    }

    #[test]
    fn scan_cap_is_enforced() {
        let qam16 = Constellation::qam(4, Labeling::Gray).unwrap();
        let err = full_diversity_margin(&Rotation::kruskemper4(), &qam16, 1000, Exec::Sequential);
        assert_eq!(err, Err(Error::CapExceeded { requested: 49u128.pow(4) - 1, cap: 1000 }));
    }

    #[test]
    fn margin_independent_of_execution() {
        let qpsk = Constellation::qam(2, Labeling::Gray).unwrap();
        let r = Rotation::kruskemper4();
        let a = full_diversity_margin(&r, &qpsk, DEFAULT_SCAN_CAP, Exec::Sequential).unwrap();
        let b = full_diversity_margin(&r, &qpsk, DEFAULT_SCAN_CAP, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(a.is_full_diversity());
    }
}
