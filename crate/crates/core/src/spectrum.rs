//! Large spectrum `R_α = {r : |Â(r)| ≥ αN}` and its dyadic level sets.
//!
//! Thresholds are compared on squared moduli. When α² is an exact rational
//! every comparison is exact: values far from the threshold are decided in
//! floating point, and near-ties are resolved in the cyclotomic field (see
//! [`crate::cyclotomic`]). With a floating-point α, values within
//! `1e-9·N²` of the threshold count as equal and are reported as slack.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use crate::cyclotomic::{squared_modulus_exact, ExactValue};
use crate::error::{Error, Result};
use crate::fourier::{dft_set, SpectrumTable};
use crate::group::ResidueSet;
use crate::verdict::Verdict;

/// Absolute slack on squared moduli, in units of N².
pub const BOUNDARY_SLACK: f64 = 1e-9;

/// Moduli above this use `|f̂(r)|²` from the transform instead of the
/// autocorrelation cosine sum, and skip exact tie resolution.
const EXACT_TIE_MAX_MODULUS: u64 = 1 << 14;

/// A spectral threshold α, stored through its square.
#[derive(Debug, Clone, PartialEq)]
pub enum Alpha {
    /// α² is known exactly.
    Exact(BigRational),
    /// α given as a double.
    Approx(f64),
}

impl Alpha {
    /// α given as an exact positive rational.
    pub fn rational(alpha: BigRational) -> Result<Self> {
        if !alpha.is_positive() {
            return Err(Error::input("alpha must be positive"));
        }
        Ok(Alpha::Exact(&alpha * &alpha))
    }

    /// α with an exact rational square (e.g. `δ^{3/2}/(2√2)`).
    pub fn from_squared(squared: BigRational) -> Result<Self> {
        if !squared.is_positive() {
            return Err(Error::input("alpha must be positive"));
        }
        Ok(Alpha::Exact(squared))
    }

    pub fn approx(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::input("alpha must be positive and finite"));
        }
        Ok(Alpha::Approx(alpha))
    }

    /// The density of `set` as an exact threshold (α = δ).
    pub fn density_of(set: &ResidueSet) -> Result<Self> {
        Self::rational(set.density_exact())
    }

    pub fn value(&self) -> f64 {
        match self {
            Alpha::Exact(sq) => sq.to_f64().unwrap_or(f64::NAN).sqrt(),
            Alpha::Approx(a) => *a,
        }
    }

    pub fn squared_f64(&self) -> f64 {
        match self {
            Alpha::Exact(sq) => sq.to_f64().unwrap_or(f64::NAN),
            Alpha::Approx(a) => a * a,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Alpha::Exact(_))
    }

    /// `α · 2^j`.
    pub fn times_power_of_two(&self, j: u32) -> Alpha {
        match self {
            Alpha::Exact(sq) => Alpha::Exact(sq * BigRational::from_integer(BigInt::one() << (2 * j))),
            Alpha::Approx(a) => Alpha::Approx(a * 2f64.powi(j as i32)),
        }
    }

    /// Squared-modulus threshold `(c·αN)²` for c = 2^j.
    fn threshold(&self, n: u64, j: u32) -> Threshold {
        let scale = self.times_power_of_two(j);
        match scale {
            Alpha::Exact(sq) => Threshold::Exact(sq * BigRational::from_integer(BigInt::from(n) * BigInt::from(n))),
            Alpha::Approx(a) => Threshold::Approx((a * n as f64).powi(2)),
        }
    }

    /// Enforces `0 < α ≤ δ` for the set's density δ.
    pub fn check_at_most_density(&self, set: &ResidueSet) -> Result<()> {
        let ok = match self {
            Alpha::Exact(sq) => {
                let d = set.density_exact();
                *sq <= &d * &d
            }
            Alpha::Approx(a) => *a <= set.density() * (1.0 + 1e-12),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::input(format!(
                "alpha = {} exceeds density {}",
                self.value(),
                set.density()
            )))
        }
    }

    /// Short human-readable form for reports.
    pub fn describe(&self) -> String {
        match self {
            Alpha::Exact(sq) => format!("sqrt({sq})"),
            Alpha::Approx(a) => format!("{a}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Threshold {
    Exact(BigRational),
    Approx(f64),
}

impl Threshold {
    fn to_f64(&self) -> f64 {
        match self {
            Threshold::Exact(t) => t.to_f64().unwrap_or(f64::NAN),
            Threshold::Approx(t) => *t,
        }
    }
}

/// How a near-boundary comparison was settled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Resolution {
    /// Exactly equal or decided in Z[ζ]: no rounding involved.
    ExactTie,
    /// Irrational value within slack of an exact threshold; decided by sign.
    NearTieFloat,
    /// Floating threshold: treated as equal because within slack.
    WithinSlack,
}

/// A coefficient whose squared modulus fell within the boundary slack.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlackEvent {
    pub r: u64,
    pub modulus_sq: f64,
    pub threshold_sq: f64,
    pub resolution: Resolution,
}

/// Fourier data of a set, with exact tie-breaking support.
#[derive(Debug, Clone)]
pub struct SetSpectrum {
    set: ResidueSet,
    table: SpectrumTable,
    autocorr: Vec<u64>,
    moduli_sq: Vec<f64>,
}

impl SetSpectrum {
    pub fn new(set: &ResidueSet) -> Self {
        let n = set.modulus() as usize;
        let table = dft_set(set);
        let members = set.to_vec();
        let mut autocorr = vec![0u64; n];
        for &a in &members {
            for &b in &members {
                autocorr[(a as usize + n - b as usize) % n] += 1;
            }
        }
        let moduli_sq = if set.modulus() <= EXACT_TIE_MAX_MODULUS {
            let cos: Vec<f64> = (0..n).map(|t| (2.0 * PI * t as f64 / n as f64).cos()).collect();
            (0..n)
                .map(|r| {
                    autocorr
                        .iter()
                        .enumerate()
                        .filter(|(_, &c)| c != 0)
                        .map(|(d, &c)| c as f64 * cos[d * r % n])
                        .sum::<f64>()
                        .max(0.0)
                })
                .collect()
        } else {
            table.coefficients().iter().map(|c| c.norm_sqr()).collect()
        };
        SetSpectrum {
            set: set.clone(),
            table,
            autocorr,
            moduli_sq,
        }
    }

    pub fn set(&self) -> &ResidueSet {
        &self.set
    }

    pub fn table(&self) -> &SpectrumTable {
        &self.table
    }

    pub fn modulus_sq(&self, r: u64) -> f64 {
        self.moduli_sq[(r % self.set.modulus()) as usize]
    }

    pub fn moduli_sq(&self) -> &[f64] {
        &self.moduli_sq
    }

    /// Exact value of `|Â(r)|²` when it is an integer.
    pub fn exact_modulus_sq(&self, r: u64) -> ExactValue {
        if r % self.set.modulus() == 0 {
            return ExactValue::Integer(self.set.len() as i128 * self.set.len() as i128);
        }
        if self.set.modulus() > EXACT_TIE_MAX_MODULUS {
            return ExactValue::Unknown;
        }
        squared_modulus_exact(&self.autocorr, r % self.set.modulus())
    }

    /// Compares `|Â(r)|²` with a threshold, recording slack if it is close.
    fn compare(&self, r: u64, t: &Threshold, slack: &mut Vec<SlackEvent>) -> Ordering {
        let n = self.set.modulus() as f64;
        let v = self.modulus_sq(r);
        let tf = t.to_f64();
        if (v - tf).abs() > BOUNDARY_SLACK * n * n {
            return v.partial_cmp(&tf).unwrap_or(Ordering::Equal);
        }
        let (ord, resolution) = match t {
            Threshold::Exact(te) => match self.exact_modulus_sq(r) {
                ExactValue::Integer(c) => {
                    let c = BigRational::from_integer(BigInt::from(c));
                    (c.cmp(te), Resolution::ExactTie)
                }
                ExactValue::Irrational | ExactValue::Unknown => (
                    v.partial_cmp(&tf).unwrap_or(Ordering::Equal),
                    Resolution::NearTieFloat,
                ),
            },
            Threshold::Approx(_) => (Ordering::Equal, Resolution::WithinSlack),
        };
        slack.push(SlackEvent {
            r,
            modulus_sq: v,
            threshold_sq: tf,
            resolution,
        });
        ord
    }

    /// `R_α = {r : |Â(r)| ≥ αN}`.
    pub fn threshold(&self, alpha: &Alpha) -> Result<SpectrumLevelSet> {
        alpha.check_at_most_density(&self.set)?;
        let n = self.set.modulus();
        let t = alpha.threshold(n, 0);
        let mut slack = Vec::new();
        let members =
            ResidueSet::from_predicate(self.set.group(), |r| self.compare(r, &t, &mut slack) != Ordering::Less);
        Ok(SpectrumLevelSet {
            alpha: alpha.clone(),
            kind: LevelKind::AtLeast,
            members,
            slack,
        })
    }

    /// `R'_{α'} = {r : α'N ≤ |Â(r)| < 2α'N}`.
    pub fn dyadic_window(&self, alpha: &Alpha) -> Result<SpectrumLevelSet> {
        alpha.check_at_most_density(&self.set)?;
        let n = self.set.modulus();
        let lo = alpha.threshold(n, 0);
        let hi = alpha.threshold(n, 1);
        let mut slack = Vec::new();
        let members = ResidueSet::from_predicate(self.set.group(), |r| {
            self.compare(r, &lo, &mut slack) != Ordering::Less
                && self.compare(r, &hi, &mut slack) == Ordering::Less
        });
        Ok(SpectrumLevelSet {
            alpha: alpha.clone(),
            kind: LevelKind::DyadicWindow,
            members,
            slack,
        })
    }

    /// Nonempty `B_i = {r ∈ R_α \ {0} : α2^{i-1}N ≤ |Â(r)| < α2^iN}`, by increasing i.
    pub fn dyadic_levels(&self, alpha: &Alpha) -> Result<Vec<SpectrumLevelSet>> {
        let r_alpha = self.threshold(alpha)?;
        let n = self.set.modulus();
        let mut slack = Vec::new();
        let mut levels: Vec<(u32, ResidueSet)> = Vec::new();
        for r in r_alpha.members.iter().filter(|&r| r != 0) {
            let mut i = 1u32;
            while self.compare(r, &alpha.threshold(n, i), &mut slack) != Ordering::Less {
                i += 1;
                if i > 2 * 64 {
                    return Err(Error::Precision {
                        what: "dyadic_levels",
                        detail: format!("no level found for r = {r}"),
                    });
                }
            }
            match levels.iter_mut().find(|(j, _)| *j == i) {
                Some((_, s)) => s.insert(r),
                None => {
                    let mut s = ResidueSet::empty(self.set.group());
                    s.insert(r);
                    levels.push((i, s));
                }
            }
        }
        levels.sort_by_key(|(i, _)| *i);
        Ok(levels
            .into_iter()
            .map(|(i, members)| SpectrumLevelSet {
                alpha: alpha.clone(),
                kind: LevelKind::DyadicIndex(i),
                members,
                slack: slack.clone(),
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LevelKind {
    /// `R_α`
    AtLeast,
    /// `R'_{α'}`
    DyadicWindow,
    /// `B_i`
    DyadicIndex(u32),
}

/// A set of frequencies selected by a window on `|Â(r)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumLevelSet {
    pub alpha: Alpha,
    pub kind: LevelKind,
    pub members: ResidueSet,
    pub slack: Vec<SlackEvent>,
}

pub fn spectrum_threshold(a: &ResidueSet, alpha: &Alpha) -> Result<SpectrumLevelSet> {
    SetSpectrum::new(a).threshold(alpha)
}

pub fn dyadic_levels(a: &ResidueSet, alpha: &Alpha) -> Result<Vec<SpectrumLevelSet>> {
    SetSpectrum::new(a).dyadic_levels(alpha)
}

/// `|R_α| ≤ δ/α²`, compared exactly when α² is rational.
pub fn spectrum_size_bound_check(a: &ResidueSet, alpha: &Alpha) -> Result<Verdict> {
    let r = spectrum_threshold(a, alpha)?;
    Ok(size_bound_verdict(a, alpha, r.members.len()))
}

pub(crate) fn size_bound_verdict(a: &ResidueSet, alpha: &Alpha, size: usize) -> Verdict {
    let bound = a.density() / alpha.squared_f64();
    let holds = match alpha {
        Alpha::Exact(sq) => {
            BigRational::from_integer(BigInt::from(size)) * sq <= a.density_exact()
        }
        Alpha::Approx(_) => size as f64 <= bound * (1.0 + 1e-12),
    };
    Verdict {
        check: "spectrum_size_bound_check",
        statement: "|R_alpha| <= delta/alpha^2",
        holds,
        lhs: size as f64,
        rhs: bound,
        deviation: bound - size as f64,
        tolerance: 0.0,
    }
}
