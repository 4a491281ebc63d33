//! Linear algebra over F_2 for vectors of width at most 64.
//!
//! Coordinate `t` of a vector (0-based) is stored in bit `t` of a `u64`. When a
//! vector is written as a string, coordinate 0 comes first, so `"110"` is the
//! vector with ones at coordinates 0 and 1.
//!
//! Subspaces are kept in reduced row-echelon form with pivots at the lowest
//! set coordinate of each row, which makes the representation canonical: two
//! [`SubspaceBasis`] values describe the same subspace iff they are equal.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

/// Largest supported ambient dimension.
pub const MAX_WIDTH: usize = 64;

/// Largest ambient dimension accepted by [`enumerate_subspaces`].
pub const MAX_ENUMERATION_WIDTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("width {0} is outside 1..=64")]
    WidthOutOfRange(usize),
    #[error("vector of width {found} used where width {expected} was required")]
    WidthMismatch { expected: usize, found: usize },
    #[error("subspaces live in different ambient spaces ({left} vs {right})")]
    AmbientMismatch { left: usize, right: usize },
    #[error("dimension {dim} is outside 0..={ambient}")]
    DimensionOutOfRange { dim: i64, ambient: usize },
    #[error("Gaussian binomial needs n >= 0, got {0}")]
    NegativeN(i64),
    #[error("Gaussian binomial [{n} {k}] does not fit in 128 bits")]
    Overflow { n: i64, k: i64 },
    #[error("refusing to enumerate subspaces of F_2^{0}; limit is {MAX_ENUMERATION_WIDTH}")]
    EnumerationTooLarge(usize),
    #[error("cannot parse bit vector from {0:?}")]
    Parse(String),
}

fn width_mask(width: usize) -> u64 {
    if width == 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

fn check_width(width: usize) -> Result<(), Gf2Error> {
    if (1..=MAX_WIDTH).contains(&width) {
        Ok(())
    } else {
        Err(Gf2Error::WidthOutOfRange(width))
    }
}

/// A vector in F_2^width.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    width: u8,
    bits: u64,
}

impl BitVec {
    /// Builds a vector, rejecting bits set above `width`.
    pub fn new(width: usize, bits: u64) -> Result<Self, Gf2Error> {
        check_width(width)?;
        if bits & !width_mask(width) != 0 {
            return Err(Gf2Error::Parse(format!("{bits:#x} exceeds width {width}")));
        }
        Ok(Self {
            width: width as u8,
            bits,
        })
    }

    pub fn zero(width: usize) -> Result<Self, Gf2Error> {
        Self::new(width, 0)
    }

    /// The unit vector with a single one at coordinate `t`.
    pub fn unit(width: usize, t: usize) -> Result<Self, Gf2Error> {
        if t >= width {
            return Err(Gf2Error::DimensionOutOfRange {
                dim: t as i64,
                ambient: width,
            });
        }
        Self::new(width, 1u64 << t)
    }

    pub(crate) fn from_raw(width: usize, bits: u64) -> Self {
        debug_assert!(bits & !width_mask(width) == 0);
        Self {
            width: width as u8,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn get(&self, t: usize) -> bool {
        t < self.width() && (self.bits >> t) & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }
}

impl std::ops::BitXor for BitVec {
    type Output = BitVec;

    fn bitxor(self, rhs: BitVec) -> BitVec {
        assert_eq!(self.width, rhs.width, "xor of vectors with different widths");
        BitVec {
            width: self.width,
            bits: self.bits ^ rhs.bits,
        }
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in 0..self.width() {
            f.write_str(if self.get(t) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl FromStr for BitVec {
    type Err = Gf2Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let width = s.len();
        check_width(width).map_err(|_| Gf2Error::Parse(s.to_string()))?;
        let mut bits = 0u64;
        for (t, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << t,
                _ => return Err(Gf2Error::Parse(s.to_string())),
            }
        }
        Ok(Self::from_raw(width, bits))
    }
}

/// A linear subspace of F_2^ambient in canonical reduced row-echelon form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubspaceBasis {
    ambient: usize,
    rows: Vec<u64>,
}

impl SubspaceBasis {
    pub fn zero(ambient: usize) -> Result<Self, Gf2Error> {
        check_width(ambient)?;
        Ok(Self {
            ambient,
            rows: Vec::new(),
        })
    }

    pub fn full(ambient: usize) -> Result<Self, Gf2Error> {
        check_width(ambient)?;
        Ok(Self {
            ambient,
            rows: (0..ambient).map(|t| 1u64 << t).collect(),
        })
    }

    /// Span of the unit vectors at the given coordinates.
    pub fn coordinate(ambient: usize, coords: impl IntoIterator<Item = usize>) -> Result<Self, Gf2Error> {
        check_width(ambient)?;
        let mut bits = 0u64;
        for t in coords {
            if t >= ambient {
                return Err(Gf2Error::DimensionOutOfRange {
                    dim: t as i64,
                    ambient,
                });
            }
            bits |= 1 << t;
        }
        Ok(Self::from_coordinate_mask(ambient, bits))
    }

    pub(crate) fn from_coordinate_mask(ambient: usize, mask: u64) -> Self {
        let rows = (0..ambient)
            .filter(|t| (mask >> t) & 1 == 1)
            .map(|t| 1u64 << t)
            .collect();
        Self { ambient, rows }
    }

    /// Canonical basis of the span of `rows`.
    pub fn span(rows: &[BitVec], ambient: usize) -> Result<Self, Gf2Error> {
        rref(rows, ambient)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = BitVec> + '_ {
        self.rows.iter().map(|&r| BitVec::from_raw(self.ambient, r))
    }

    pub(crate) fn raw_rows(&self) -> &[u64] {
        &self.rows
    }

    /// Pivot coordinate of each row, strictly increasing.
    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|r| r.trailing_zeros() as usize)
    }

    pub fn contains(&self, v: BitVec) -> bool {
        if v.width() != self.ambient {
            return false;
        }
        let mut x = v.bits();
        for &r in &self.rows {
            if x & (r & r.wrapping_neg()) != 0 {
                x ^= r;
            }
        }
        x == 0
    }

    /// All `2^dim` elements. Panics for `dim > 20`.
    pub fn elements(&self) -> Vec<BitVec> {
        assert!(self.dim() <= 20, "too many elements to list");
        (0u64..1 << self.dim())
            .map(|c| {
                let bits = self
                    .rows
                    .iter()
                    .enumerate()
                    .filter(|(l, _)| (c >> l) & 1 == 1)
                    .fold(0u64, |acc, (_, r)| acc ^ r);
                BitVec::from_raw(self.ambient, bits)
            })
            .collect()
    }
}

impl fmt::Debug for SubspaceBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.rows().map(|r| r.to_string()).collect();
        write!(f, "span{{{}}} in F_2^{}", rows.join(", "), self.ambient)
    }
}

/// Row-reduces raw words over `ambient` columns into canonical echelon form.
fn reduce_words(mut rows: Vec<u64>, ambient: usize) -> Vec<u64> {
    let mut basis: Vec<u64> = Vec::with_capacity(rows.len().min(ambient));
    for col in 0..ambient {
        let bit = 1u64 << col;
        let Some(pos) = rows.iter().position(|r| r & bit != 0) else {
            continue;
        };
        let pivot = rows.swap_remove(pos);
        for r in rows.iter_mut() {
            if *r & bit != 0 {
                *r ^= pivot;
            }
        }
        for r in basis.iter_mut() {
            if *r & bit != 0 {
                *r ^= pivot;
            }
        }
        basis.push(pivot);
    }
    basis
}

/// Canonical reduced row-echelon basis of the span of `rows`.
pub fn rref(rows: &[BitVec], ambient: usize) -> Result<SubspaceBasis, Gf2Error> {
    check_width(ambient)?;
    if let Some(bad) = rows.iter().find(|r| r.width() != ambient) {
        return Err(Gf2Error::WidthMismatch {
            expected: ambient,
            found: bad.width(),
        });
    }
    let words = rows.iter().map(|r| r.bits()).collect();
    Ok(SubspaceBasis {
        ambient,
        rows: reduce_words(words, ambient),
    })
}

/// Intersection of two subspaces via the Zassenhaus construction.
///
/// Rows `[u | u]` for `u` in U and `[v | 0]` for `v` in V are reduced with the
/// left block eliminated first; rows whose left block vanishes carry a basis
/// of U ∩ V in their right block.
pub fn intersect(u: &SubspaceBasis, v: &SubspaceBasis) -> Result<SubspaceBasis, Gf2Error> {
    if u.ambient != v.ambient {
        return Err(Gf2Error::AmbientMismatch {
            left: u.ambient,
            right: v.ambient,
        });
    }
    let m = u.ambient;
    if u.rows.is_empty() || v.rows.is_empty() {
        return Ok(SubspaceBasis {
            ambient: m,
            rows: Vec::new(),
        });
    }
    let left_mask = width_mask(m) as u128;
    let mut work: Vec<u128> = u
        .rows
        .iter()
        .map(|&r| (r as u128) | ((r as u128) << m))
        .chain(v.rows.iter().map(|&r| r as u128))
        .collect();
    let mut tail = Vec::new();
    for col in 0..m {
        let bit = 1u128 << col;
        let Some(pos) = work.iter().position(|r| r & bit != 0) else {
            continue;
        };
        let pivot = work.swap_remove(pos);
        for r in work.iter_mut() {
            if *r & bit != 0 {
                *r ^= pivot;
            }
        }
    }
    for r in work {
        debug_assert_eq!(r & left_mask, 0);
        let right = (r >> m) as u64;
        if right != 0 {
            tail.push(right);
        }
    }
    Ok(SubspaceBasis {
        ambient: m,
        rows: reduce_words(tail, m),
    })
}

/// Coordinates at which every vector of `u` is zero.
pub fn zero_coordinate_mask(u: &SubspaceBasis) -> BitVec {
    let support = u.rows.iter().fold(0u64, |acc, r| acc | r);
    BitVec::from_raw(u.ambient, !support & width_mask(u.ambient))
}

/// Number of `k`-dimensional subspaces of F_2^n, exactly.
///
/// Returns 0 for `k < 0` or `k > n`; fails on negative `n` or when the value
/// does not fit in a `u128`.
pub fn gbinom(n: i64, k: i64) -> Result<u128, Gf2Error> {
    if n < 0 {
        return Err(Gf2Error::NegativeN(n));
    }
    if k < 0 || k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let overflow = || Gf2Error::Overflow { n, k };
    if n >= 128 {
        return Err(overflow());
    }
    // [n, j+1] = [n, j] (2^{n-j} - 1) / (2^{j+1} - 1), exact at every step.
    let mut acc: u128 = 1;
    for j in 0..k {
        let num = (1u128 << (n - j)) - 1;
        let den = (1u128 << (j + 1)) - 1;
        acc = acc.checked_mul(num).ok_or_else(overflow)? / den;
    }
    Ok(acc)
}

/// Uniformly random `d`-dimensional subspace of F_2^m.
///
/// Draws random `d x m` matrices until one has full rank; every subspace has
/// the same number of full-rank generator matrices, so the result is uniform.
pub fn sample_subspace<R: Rng + ?Sized>(m: usize, d: usize, rng: &mut R) -> Result<SubspaceBasis, Gf2Error> {
    check_width(m)?;
    if d > m {
        return Err(Gf2Error::DimensionOutOfRange {
            dim: d as i64,
            ambient: m,
        });
    }
    if d == m {
        return SubspaceBasis::full(m);
    }
    let mask = width_mask(m);
    loop {
        let words: Vec<u64> = (0..d).map(|_| rng.gen::<u64>() & mask).collect();
        let rows = reduce_words(words, m);
        if rows.len() == d {
            return Ok(SubspaceBasis { ambient: m, rows });
        }
    }
}

/// Uniformly random element of `v`.
pub fn sample_element<R: Rng + ?Sized>(v: &SubspaceBasis, rng: &mut R) -> BitVec {
    let bits = v
        .rows
        .iter()
        .filter(|_| rng.gen::<bool>())
        .fold(0u64, |acc, r| acc ^ r);
    BitVec::from_raw(v.ambient, bits)
}

/// Every `d`-dimensional subspace of F_2^m exactly once, in canonical order.
pub fn enumerate_subspaces(m: usize, d: usize) -> Result<Vec<SubspaceBasis>, Gf2Error> {
    check_width(m)?;
    if m > MAX_ENUMERATION_WIDTH {
        return Err(Gf2Error::EnumerationTooLarge(m));
    }
    if d > m {
        return Err(Gf2Error::DimensionOutOfRange {
            dim: d as i64,
            ambient: m,
        });
    }
    let nonzero: Vec<u64> = (1u64..1 << m).collect();
    let mut seen = BTreeSet::new();
    let mut pick = Vec::with_capacity(d);
    collect_spans(&nonzero, 0, d, m, &mut pick, &mut seen);
    if d == 0 {
        seen.insert(SubspaceBasis {
            ambient: m,
            rows: Vec::new(),
        });
    }
    Ok(seen.into_iter().collect())
}

fn collect_spans(
    pool: &[u64],
    start: usize,
    d: usize,
    m: usize,
    pick: &mut Vec<u64>,
    out: &mut BTreeSet<SubspaceBasis>,
) {
    if pick.len() == d {
        if d == 0 {
            return;
        }
        let rows = reduce_words(pick.clone(), m);
        if rows.len() == d {
            out.insert(SubspaceBasis { ambient: m, rows });
        }
        return;
    }
    for idx in start..pool.len() {
        pick.push(pool[idx]);
        collect_spans(pool, idx + 1, d, m, pick, out);
        pick.pop();
    }
}
