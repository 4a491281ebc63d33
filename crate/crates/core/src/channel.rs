//! Affine-subspace channels and the erasure transfer function of their
//! factor node.
//!
//! A channel use takes `x` in F_2^m and returns `y = x + z`, where `z` is
//! uniform over a random noise subspace `V`. The receiver learns `V`, so it
//! knows `x` lies in the affine subspace `y - V`. The law of `V` is fixed by
//! its dimension distribution `p_d`; given `d`, `V` is uniform.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{self, BitVec, Gf2Error, SubspaceBasis};

const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("symbol width m = {0} must be at least 1")]
    ZeroWidth(usize),
    #[error("W channel needs 0 <= w <= m, got w = {w} with m = {m}")]
    NoiseDimension { m: usize, w: usize },
    #[error("erasure parameter {0} is outside [0, 1]")]
    Epsilon(f64),
    #[error("dimension distribution has {found} entries, expected m + 1 = {expected}")]
    Length { expected: usize, found: usize },
    #[error("dimension distribution entry p_{index} = {value} is not a probability")]
    Probability { index: usize, value: f64 },
    #[error("dimension distribution sums to {0}, not 1")]
    Sum(f64),
    #[error("transfer function argument z = {0} is outside [0, 1]")]
    Argument(f64),
    #[error("exhaustive oracle supports m <= 4, got m = {0}")]
    OracleTooLarge(usize),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

/// Probabilities `p_0..=p_m` of the noise-subspace dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionDistribution {
    m: usize,
    probs: Vec<f64>,
}

impl DimensionDistribution {
    pub fn new(m: usize, probs: Vec<f64>) -> Result<Self, ChannelError> {
        if m == 0 {
            return Err(ChannelError::ZeroWidth(m));
        }
        if m > gf2::MAX_WIDTH {
            return Err(Gf2Error::WidthOutOfRange(m).into());
        }
        if probs.len() != m + 1 {
            return Err(ChannelError::Length {
                expected: m + 1,
                found: probs.len(),
            });
        }
        if let Some((index, &value)) = probs.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(ChannelError::Probability { index, value });
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(ChannelError::Sum(total));
        }
        Ok(Self { m, probs })
    }

    /// All mass on dimension `d`.
    pub fn point_mass(m: usize, d: usize) -> Result<Self, ChannelError> {
        if d > m {
            return Err(ChannelError::NoiseDimension { m, w: d });
        }
        let mut probs = vec![0.0; m + 1];
        probs[d] = 1.0;
        Self::new(m, probs)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Normalized capacity per input bit, `1 - sum_d (d/m) p_d`.
    pub fn capacity(&self) -> f64 {
        let m = self.m as f64;
        1.0 - self
            .probs
            .iter()
            .enumerate()
            .map(|(d, p)| d as f64 / m * p)
            .sum::<f64>()
    }

    /// Draws a noise subspace and a noise vector uniform in it.
    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> (SubspaceBasis, BitVec) {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut d = self.m;
        for (k, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                d = k;
                break;
            }
        }
        // Guard against rounding leaving u above the final partial sum.
        while self.probs[d] == 0.0 && d > 0 {
            d -= 1;
        }
        let v = gf2::sample_subspace(self.m, d, rng).expect("dimension within range");
        let z = gf2::sample_element(&v, rng);
        (v, z)
    }
}

/// Shape of the noise-dimension law, without its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    /// Deterministic dimension `w`.
    W,
    /// Concentrated dimension: mass split between `floor(eps m)` and the next integer.
    Cd,
    /// Binomial dimension `Bin(m, eps)`.
    Bd,
}

impl FamilyKind {
    /// Builds the CD or BD channel at `eps`. For `W`, `eps * m` must be an integer.
    pub fn with_epsilon(self, m: usize, eps: f64) -> Result<ChannelFamily, ChannelError> {
        match self {
            FamilyKind::Cd => ChannelFamily::cd(m, eps),
            FamilyKind::Bd => ChannelFamily::bd(m, eps),
            FamilyKind::W => {
                let w = (eps * m as f64).round();
                if (w - eps * m as f64).abs() > 1e-9 {
                    return Err(ChannelError::Epsilon(eps));
                }
                ChannelFamily::w(m, w as usize)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::W => "W",
            FamilyKind::Cd => "CD",
            FamilyKind::Bd => "BD",
        }
    }
}

/// A fully parametrized channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ChannelFamily {
    W { m: usize, w: usize },
    Cd { m: usize, eps: f64 },
    Bd { m: usize, eps: f64 },
}

impl ChannelFamily {
    pub fn w(m: usize, w: usize) -> Result<Self, ChannelError> {
        let family = ChannelFamily::W { m, w };
        family.validate()?;
        Ok(family)
    }

    pub fn cd(m: usize, eps: f64) -> Result<Self, ChannelError> {
        let family = ChannelFamily::Cd { m, eps };
        family.validate()?;
        Ok(family)
    }

    pub fn bd(m: usize, eps: f64) -> Result<Self, ChannelError> {
        let family = ChannelFamily::Bd { m, eps };
        family.validate()?;
        Ok(family)
    }

    fn validate(&self) -> Result<(), ChannelError> {
        let m = self.m();
        if m == 0 {
            return Err(ChannelError::ZeroWidth(m));
        }
        match *self {
            ChannelFamily::W { m, w } if w > m => Err(ChannelError::NoiseDimension { m, w }),
            ChannelFamily::Cd { eps, .. } | ChannelFamily::Bd { eps, .. } if !(0.0..=1.0).contains(&eps) => {
                Err(ChannelError::Epsilon(eps))
            }
            _ => Ok(()),
        }
    }

    pub fn m(&self) -> usize {
        match *self {
            ChannelFamily::W { m, .. } | ChannelFamily::Cd { m, .. } | ChannelFamily::Bd { m, .. } => m,
        }
    }

    pub fn kind(&self) -> FamilyKind {
        match self {
            ChannelFamily::W { .. } => FamilyKind::W,
            ChannelFamily::Cd { .. } => FamilyKind::Cd,
            ChannelFamily::Bd { .. } => FamilyKind::Bd,
        }
    }

    /// The erasure-like parameter: `eps` for CD/BD, `w/m` for W.
    pub fn epsilon(&self) -> f64 {
        match *self {
            ChannelFamily::W { m, w } => w as f64 / m as f64,
            ChannelFamily::Cd { eps, .. } | ChannelFamily::Bd { eps, .. } => eps,
        }
    }

    pub fn dimension_distribution(&self) -> Result<DimensionDistribution, ChannelError> {
        self.validate()?;
        match *self {
            ChannelFamily::W { m, w } => DimensionDistribution::point_mass(m, w),
            ChannelFamily::Cd { m, eps } => {
                let scaled = eps * m as f64;
                let nearest = scaled.round();
                // eps*m within rounding of an integer puts all mass on it.
                let (base, frac) = if (scaled - nearest).abs() < 1e-12 {
                    (nearest as usize, 0.0)
                } else {
                    (scaled.floor() as usize, scaled - scaled.floor())
                };
                let mut probs = vec![0.0; m + 1];
                probs[base] = 1.0 - frac;
                if frac > 0.0 {
                    probs[base + 1] = frac;
                }
                DimensionDistribution::new(m, probs)
            }
            ChannelFamily::Bd { m, eps } => {
                let probs = (0..=m)
                    .map(|d| binomial(m, d) * eps.powi(d as i32) * (1.0 - eps).powi((m - d) as i32))
                    .collect::<Vec<_>>();
                let total: f64 = probs.iter().sum();
                DimensionDistribution::new(m, probs.into_iter().map(|p| p / total).collect())
            }
        }
    }

    pub fn capacity(&self) -> Result<f64, ChannelError> {
        Ok(self.dimension_distribution()?.capacity())
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn gb(n: i64, k: i64) -> Result<u128, ChannelError> {
    if n < 0 {
        return Ok(0);
    }
    Ok(gf2::gbinom(n, k)?)
}

/// Distribution-independent part of the channel-node transfer function.
///
/// `f(z) = sum_{i=1}^{m} c_i B_{i-1}(z)` where `B_{i-1}(z) = C(m-1, i-1) z^{i-1}
/// (1-z)^{m-i}` is the law of `dim V_ex = i`, and `c_i = sum_j K[i][j] p_j` is
/// the erasure probability of the outgoing message given that dimension. The
/// table `K[i][j]` sums, over the dimension `k` of `V_ex ∩ V_ch`, the
/// intersection-dimension law times the chance that the intersection covers the
/// target coordinate. Only `K` depends on `m`; it is built once from exact
/// Gaussian binomials.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferKernel {
    m: usize,
    /// `table[i - 1][j]` for `i` in `1..=m`, `j` in `0..=m`.
    table: Vec<Vec<f64>>,
}

impl TransferKernel {
    pub fn new(m: usize) -> Result<Self, ChannelError> {
        if m == 0 {
            return Err(ChannelError::ZeroWidth(m));
        }
        let mi = m as i64;
        let mut table = vec![vec![0.0; m + 1]; m];
        for i in 1..=mi {
            for j in 0..=mi {
                let total_ch = gb(mi, j)? as f64;
                let mut acc = 0.0;
                for k in 0..=i.min(j) {
                    // P(dim V_a = k | dim V_ch = j, dim V_ex = i)
                    let shift = ((i - k) * (j - k)) as u32;
                    let count = gb(i, k)?
                        .checked_mul(gb(mi - i, j - k)?)
                        .and_then(|c| c.checked_mul(1u128.checked_shl(shift)?))
                        .ok_or(Gf2Error::Overflow { n: mi, k: j })?;
                    if count == 0 {
                        continue;
                    }
                    // P(erased | k, i) = 1 - [i-1 k] / [i k]
                    let all = gb(i, k)?;
                    let avoiding = gb(i - 1, k)?;
                    let erase = (all - avoiding) as f64 / all as f64;
                    acc += count as f64 / total_ch * erase;
                }
                table[(i - 1) as usize][j as usize] = acc;
            }
        }
        Ok(Self { m, table })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bind(&self, dist: &DimensionDistribution) -> Result<TransferFunction, ChannelError> {
        if dist.m() != self.m {
            return Err(ChannelError::Length {
                expected: self.m + 1,
                found: dist.m() + 1,
            });
        }
        let coeffs = self
            .table
            .iter()
            .enumerate()
            .map(|(row, k)| {
                let c: f64 = k.iter().zip(dist.probs()).map(|(a, p)| a * p).sum();
                c * binomial(self.m - 1, row)
            })
            .collect();
        Ok(TransferFunction { m: self.m, coeffs })
    }
}

/// The transfer function `f(z)` of one channel, ready for repeated evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    m: usize,
    /// `C(m-1, i) c_{i+1}` for `i` in `0..m`.
    coeffs: Vec<f64>,
}

impl TransferFunction {
    pub fn new(dist: &DimensionDistribution) -> Result<Self, ChannelError> {
        TransferKernel::new(dist.m())?.bind(dist)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Evaluates `f(z)` without range checks; callers guarantee `z` in `[0, 1]`.
    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        let y = 1.0 - z;
        let top = self.m - 1;
        let mut zp = 1.0;
        let mut acc = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            acc += c * zp * y.powi((top - i) as i32);
            zp *= z;
        }
        acc.clamp(0.0, 1.0)
    }

    pub fn eval_checked(&self, z: f64) -> Result<f64, ChannelError> {
        if !(0.0..=1.0).contains(&z) {
            return Err(ChannelError::Argument(z));
        }
        Ok(self.eval(z))
    }
}

/// Probability that the channel node's message to one of its bits is erased
/// when each of the other `m - 1` incoming messages is erased with
/// probability `z`.
pub fn transfer_f(dist: &DimensionDistribution, z: f64) -> Result<f64, ChannelError> {
    TransferFunction::new(dist)?.eval_checked(z)
}

/// Independent evaluation of [`transfer_f`] by exhaustive enumeration.
///
/// Sums over every erasure pattern of the other `m - 1` bits and every noise
/// subspace; the message to coordinate 0 is erased iff some vector of
/// `V_ex ∩ V` is nonzero at coordinate 0, with `V_ex` spanned by `e_0` and the
/// unit vectors of the erased companions.
pub fn transfer_f_oracle(dist: &DimensionDistribution, z: f64) -> Result<f64, ChannelError> {
    let m = dist.m();
    if m > gf2::MAX_ENUMERATION_WIDTH {
        return Err(ChannelError::OracleTooLarge(m));
    }
    if !(0.0..=1.0).contains(&z) {
        return Err(ChannelError::Argument(z));
    }
    let by_dim: Vec<Vec<SubspaceBasis>> = (0..=m).map(|d| gf2::enumerate_subspaces(m, d)).collect::<Result<_, _>>()?;
    let mut total = 0.0;
    for pattern in 0u64..1 << (m - 1) {
        let erased = pattern.count_ones() as i32;
        let weight = z.powi(erased) * (1.0 - z).powi(m as i32 - 1 - erased);
        if weight == 0.0 {
            continue;
        }
        let ex_mask = 1 | (pattern << 1);
        let ex = SubspaceBasis::coordinate(m, (0..m).filter(|t| (ex_mask >> t) & 1 == 1))?;
        let mut erased_mass = 0.0;
        for (d, spaces) in by_dim.iter().enumerate() {
            let pd = dist.probs()[d];
            if pd == 0.0 {
                continue;
            }
            let hits = spaces
                .iter()
                .filter(|v| {
                    let a = gf2::intersect(&ex, v).expect("same ambient");
                    !gf2::zero_coordinate_mask(&a).get(0)
                })
                .count();
            erased_mass += pd * hits as f64 / spaces.len() as f64;
        }
        total += weight * erased_mass;
    }
    Ok(total)
}
