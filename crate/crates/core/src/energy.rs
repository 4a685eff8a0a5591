//! Additive energies `T_k(B)` and the lower bounds for large spectra.
//!
//! `T_k(B)` counts 2k-tuples `(r_1..r_k, r'_1..r'_k) ∈ B^{2k}` with
//! `r_1 + … + r_k ≡ r'_1 + … + r'_k (mod N)`. Three routes compute it:
//! exact sum-distribution convolution (certifying, the default), the
//! spectral power sum `(1/N) Σ_x |Σ_{r∈B} e(rx)|^{2k}` rounded to an integer,
//! and literal enumeration (the oracle).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::count::BigCount;
use crate::error::{Error, Result};
use crate::fourier::dft_set;
use crate::group::ResidueSet;
use crate::spectrum::{Alpha, SetSpectrum, SlackEvent};

/// Default cap on literally enumerated tuples.
pub const ENUMERATION_BUDGET: u64 = 10_000_000;

/// Largest count the spectral route is trusted to round correctly.
const SPECTRAL_MAX: f64 = (1u64 << 50) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyPath {
    /// Exact integer convolution of the k-fold sum distribution.
    #[default]
    Exact,
    /// Floating spectral power sum, rounded; fails rather than guess.
    Spectral,
    /// Literal enumeration of all 2k-tuples.
    BruteForce,
}

/// `c[s] = #{(b_1..b_k) ∈ B^k : b_1 + … + b_k ≡ s}`.
pub fn sum_distribution(b: &ResidueSet, k: u32) -> Vec<BigUint> {
    let n = b.modulus() as usize;
    let members = b.to_vec();
    let mut cur = vec![BigUint::zero(); n];
    cur[0] = BigUint::one();
    for _ in 0..k {
        let mut next = vec![BigUint::zero(); n];
        for (s, c) in cur.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for &m in &members {
                next[(s + m as usize) % n] += c;
            }
        }
        cur = next;
    }
    cur
}

/// Same as [`sum_distribution`] in machine integers; `None` on overflow risk.
fn sum_distribution_u128(b: &ResidueSet, k: u32) -> Option<Vec<u128>> {
    let n = b.modulus() as usize;
    let members = b.to_vec();
    // every entry is at most |B|^k and the energy at most |B|^{2k}
    if (members.len() as f64).log2() * 2.0 * k as f64 >= 126.0 {
        return None;
    }
    let mut cur = vec![0u128; n];
    cur[0] = 1;
    for _ in 0..k {
        let mut next = vec![0u128; n];
        for (s, &c) in cur.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &m in &members {
                next[(s + m as usize) % n] += c;
            }
        }
        cur = next;
    }
    Some(cur)
}

fn energy_exact(b: &ResidueSet, k: u32) -> BigCount {
    if let Some(c) = sum_distribution_u128(b, k) {
        let mut total = 0u128;
        for v in c {
            total += v * v;
        }
        return BigCount::from(total);
    }
    sum_distribution(b, k)
        .into_iter()
        .map(|v| BigCount::from(&v * &v))
        .sum()
}

fn energy_spectral(b: &ResidueSet, k: u32) -> Result<BigCount> {
    let n = b.modulus() as f64;
    let spec = dft_set(b);
    let total: f64 = spec
        .coefficients()
        .iter()
        .map(|c| c.norm_sqr().powi(k as i32))
        .sum::<f64>()
        / n;
    if !(total < SPECTRAL_MAX) {
        return Err(Error::Precision {
            what: "energy_tk",
            detail: format!("spectral value {total:e} too large to round reliably"),
        });
    }
    let rounded = total.round();
    let residual = (total - rounded).abs();
    if residual >= 0.5 || rounded < 0.0 {
        return Err(Error::Precision {
            what: "energy_tk",
            detail: format!("rounding residual {residual}"),
        });
    }
    Ok(BigCount::from(rounded as u64))
}

/// Number of 2k-tuples that literal enumeration would visit.
pub fn enumeration_size(set_size: usize, arity: u32) -> f64 {
    (set_size as f64).powi(arity as i32)
}

fn energy_bruteforce(b: &ResidueSet, k: u32, budget: u64) -> Result<BigCount> {
    let members = b.to_vec();
    let arity = 2 * k as usize;
    let needed = enumeration_size(members.len(), 2 * k);
    if needed > budget as f64 {
        return Err(Error::Budget {
            what: "energy_tk_bruteforce",
            needed,
            limit: budget as f64,
        });
    }
    if members.is_empty() {
        return Ok(BigCount::zero());
    }
    let g = b.group();
    let mut idx = vec![0usize; arity];
    let mut count = 0u64;
    loop {
        let mut left = 0u64;
        let mut right = 0u64;
        for (pos, &i) in idx.iter().enumerate() {
            if pos < k as usize {
                left = g.add(left, members[i]);
            } else {
                right = g.add(right, members[i]);
            }
        }
        if left == right {
            count += 1;
        }
        // odometer
        let mut p = 0;
        loop {
            if p == arity {
                return Ok(BigCount::from(count));
            }
            idx[p] += 1;
            if idx[p] < members.len() {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

fn check_k(k: u32) -> Result<()> {
    if k < 1 {
        return Err(Error::input("k must be at least 1"));
    }
    Ok(())
}

/// Exact `T_k(B)` via the certifying convolution route.
pub fn energy_tk(b: &ResidueSet, k: u32) -> Result<BigCount> {
    energy_tk_with(b, k, EnergyPath::Exact)
}

pub fn energy_tk_with(b: &ResidueSet, k: u32, path: EnergyPath) -> Result<BigCount> {
    check_k(k)?;
    match path {
        EnergyPath::Exact => Ok(energy_exact(b, k)),
        EnergyPath::Spectral => energy_spectral(b, k),
        EnergyPath::BruteForce => energy_bruteforce(b, k, ENUMERATION_BUDGET),
    }
}

/// Literal enumeration oracle, refusing above `|B|^{2k} > 10^7`.
pub fn energy_tk_bruteforce(b: &ResidueSet, k: u32) -> Result<BigCount> {
    check_k(k)?;
    energy_bruteforce(b, k, ENUMERATION_BUDGET)
}

/// Literal enumeration with a caller-chosen tuple budget.
pub fn energy_tk_bruteforce_within(b: &ResidueSet, k: u32, budget: u64) -> Result<BigCount> {
    check_k(k)?;
    energy_bruteforce(b, k, budget)
}

/// `δ α^{2k} m^{2k} / (2^{4k} δ^{2k})`.
pub fn tk_lower_bound(delta: f64, alpha: f64, k: u32, m: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= delta && delta <= 1.0) {
        return Err(Error::input(format!(
            "need 0 < alpha <= delta <= 1, got alpha = {alpha}, delta = {delta}"
        )));
    }
    if k < 2 {
        return Err(Error::input("the lower bound is stated for k >= 2"));
    }
    let k = k as i32;
    Ok(delta * alpha.powi(2 * k) * (m as f64).powi(2 * k) / (2f64.powi(4 * k) * delta.powi(2 * k)))
}

/// The same bound as an exact rational, from δ and α².
pub fn tk_lower_bound_exact(delta: &BigRational, alpha_sq: &BigRational, k: u32, m: usize) -> BigRational {
    let m = BigRational::from_integer(BigInt::from(m));
    let two = BigRational::from_integer(BigInt::from(2));
    delta * alpha_sq.pow(k as i32) * m.pow(2 * k as i32) / (two.pow(4 * k as i32) * delta.pow(2 * k as i32))
}

/// A computed energy paired with a lower bound and the verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub check: &'static str,
    pub statement: &'static str,
    pub n: u64,
    pub k: u32,
    /// Number of equations minus one (0 for plain energies).
    pub d: u32,
    pub set_size: usize,
    pub members: Vec<u64>,
    pub count: BigCount,
    pub bound: f64,
    pub ratio: Option<f64>,
    pub holds: bool,
    pub delta: f64,
    pub alpha: f64,
    /// Whether the comparison used exact rationals.
    pub exact_comparison: bool,
    /// k is odd; the supporting level lemma is proved only for even k.
    pub odd_k: bool,
    pub slack: Vec<SlackEvent>,
}

pub(crate) struct BoundComparison {
    pub bound: f64,
    pub holds: bool,
    pub exact: bool,
}

pub(crate) fn compare_count(count: &BigCount, exact: Option<BigRational>, approx: f64) -> BoundComparison {
    match exact {
        Some(b) => BoundComparison {
            bound: b.to_f64().unwrap_or(f64::INFINITY),
            holds: count.to_rational() >= b,
            exact: true,
        },
        None => BoundComparison {
            bound: approx,
            holds: count.to_f64() >= approx * (1.0 - 1e-12),
            exact: false,
        },
    }
}

pub(crate) fn ratio(count: &BigCount, bound: f64) -> Option<f64> {
    if bound > 0.0 {
        Some(count.to_f64() / bound)
    } else {
        None
    }
}

pub fn verify_main_theorem(a: &ResidueSet, alpha: &Alpha, k: u32) -> Result<EnergyReport> {
    verify_main_theorem_with(&SetSpectrum::new(a), alpha, k)
}

/// `T_k(R_α \ {0}) ≥ δα^{2k}|B|^{2k} / (2^{4k} δ^{2k})`, reusing a spectrum.
pub fn verify_main_theorem_with(spec: &SetSpectrum, alpha: &Alpha, k: u32) -> Result<EnergyReport> {
    if k < 2 {
        return Err(Error::input("the main lower bound is stated for k >= 2"));
    }
    let a = spec.set();
    let level = spec.threshold(alpha)?;
    let b = level.members.without(0);
    let count = energy_tk(&b, k)?;
    let delta = a.density();
    let m = b.len();
    let approx = tk_lower_bound(delta, alpha.value().min(delta), k, m)?;
    let exact = match alpha {
        Alpha::Exact(sq) => Some(tk_lower_bound_exact(&a.density_exact(), sq, k, m)),
        Alpha::Approx(_) => None,
    };
    let cmp = compare_count(&count, exact, approx);
    Ok(EnergyReport {
        check: "verify_main_theorem",
        statement: "T_k(B) >= delta alpha^2k |B|^2k / (2^4k delta^2k), B = R_alpha \\ {0}",
        n: a.modulus(),
        k,
        d: 0,
        set_size: m,
        members: b.to_vec(),
        ratio: ratio(&count, cmp.bound),
        count,
        bound: cmp.bound,
        holds: cmp.holds,
        delta,
        alpha: alpha.value(),
        exact_comparison: cmp.exact,
        odd_k: k % 2 == 1,
        slack: level.slack,
    })
}

/// Which subset of the dyadic window the level lemma is applied to.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelSubset {
    /// `B' = R'_{α'} \ {0}`.
    Whole,
    /// A caller-chosen subset (validated against the window).
    Given(ResidueSet),
}

pub fn verify_level_lemma(a: &ResidueSet, alpha: &Alpha, k: u32, subset: &LevelSubset) -> Result<EnergyReport> {
    verify_level_lemma_with(&SetSpectrum::new(a), alpha, k, subset)
}

/// Level-set lemma: for `B' ⊆ R'_{α'} \ {0}`,
/// k = 2: `T_2(B') ≥ α'^4 |B'|^4 / (16 δ³)`;
/// even k: `T_k(B') ≥ δ α'^{2k} |B'|^{2k} / (2δ)^{2k}`.
pub fn verify_level_lemma_with(
    spec: &SetSpectrum,
    alpha: &Alpha,
    k: u32,
    subset: &LevelSubset,
) -> Result<EnergyReport> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::input(format!("level lemma needs even k >= 2, got {k}")));
    }
    let a = spec.set();
    let window = spec.dyadic_window(alpha)?;
    let allowed = window.members.without(0);
    let b = match subset {
        LevelSubset::Whole => allowed,
        LevelSubset::Given(s) => {
            if !s.is_subset(&allowed) {
                return Err(Error::input("B' must be a subset of R'_alpha \\ {0}"));
            }
            s.clone()
        }
    };
    let count = energy_tk(&b, k)?;
    let delta = a.density();
    let m = b.len() as i32;
    let al = alpha.value();
    let ki = k as i32;
    let (approx, statement) = if k == 2 {
        (
            al.powi(4) * (m as f64).powi(4) / (16.0 * delta.powi(3)),
            "T_2(B') >= alpha'^4 |B'|^4 / (16 delta^3)",
        )
    } else {
        (
            delta * al.powi(2 * ki) * (m as f64).powi(2 * ki) / (2.0 * delta).powi(2 * ki),
            "T_k(B') >= delta alpha'^2k |B'|^2k / (2 delta)^2k",
        )
    };
    let exact = match alpha {
        Alpha::Exact(sq) => {
            let d = a.density_exact();
            let mm = BigRational::from_integer(BigInt::from(m));
            let two = BigRational::from_integer(BigInt::from(2));
            Some(if k == 2 {
                sq.pow(2) * mm.pow(4) / (BigRational::from_integer(BigInt::from(16)) * d.pow(3))
            } else {
                &d * sq.pow(ki) * mm.pow(2 * ki) / (two * &d).pow(2 * ki)
            })
        }
        Alpha::Approx(_) => None,
    };
    let cmp = compare_count(&count, exact, approx);
    Ok(EnergyReport {
        check: "verify_level_lemma",
        statement,
        n: a.modulus(),
        k,
        d: 0,
        set_size: b.len(),
        members: b.to_vec(),
        ratio: ratio(&count, cmp.bound),
        count,
        bound: cmp.bound,
        holds: cmp.holds,
        delta,
        alpha: al,
        exact_comparison: cmp.exact,
        odd_k: false,
        slack: window.slack,
    })
}

/// `Σ_r |B̂(r)|⁴ = N · T_2(B)`, with the spectral side rounded to an integer.
pub fn fourth_moment_identity(b: &ResidueSet) -> (BigCount, BigCount) {
    let n = b.modulus();
    let s: f64 = dft_set(b).coefficients().iter().map(|c| c.norm_sqr().powi(2)).sum();
    let lhs = BigCount::from(s.round().to_u128().unwrap_or(0));
    let rhs = energy_tk(b, 2).expect("k = 2 is valid") * BigCount::from(n);
    (lhs, rhs)
}
