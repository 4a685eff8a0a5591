//! Bohr sets `B(K, ε) = {x : ‖rx/N‖ < ε for all r ∈ K}` and their
//! containment in `2A - 2A`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::dissociated::{improved_decomposition_with, ImprovedVariant};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fourier::{dft_set, inverse_dft, SpectrumTable};
use crate::group::ResidueSet;
use crate::spectrum::{Alpha, SetSpectrum, SlackEvent};
use crate::verdict::Verdict;

/// Bohr radius; rational radii give exact membership at the boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum Radius {
    Exact(BigRational),
    Float(f64),
}

impl Radius {
    pub fn value(&self) -> f64 {
        match self {
            Radius::Exact(e) => e.to_f64().unwrap_or(f64::NAN),
            Radius::Float(e) => *e,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BohrSpec {
    pub frequencies: ResidueSet,
    pub radius: Radius,
}

impl BohrSpec {
    pub fn new(frequencies: ResidueSet, radius: Radius) -> Result<Self> {
        let ok = match &radius {
            Radius::Exact(e) => e.is_positive() && *e < BigRational::one(),
            Radius::Float(e) => *e > 0.0 && *e < 1.0,
        };
        if !ok {
            return Err(Error::input(format!("Bohr radius {} must lie in (0, 1)", radius.value())));
        }
        Ok(BohrSpec { frequencies, radius })
    }

    pub fn contains(&self, x: u64) -> bool {
        let g = self.frequencies.group();
        let n = g.modulus() as u128;
        match &self.radius {
            Radius::Exact(e) => {
                // ‖rx/N‖ < p/q  ⟺  q·min(rx, N - rx) < p·N
                let p = e.numer().to_u128().expect("radius below one");
                let q = e.denom().to_u128().expect("positive denominator");
                self.frequencies
                    .iter()
                    .all(|r| q * (g.circle_distance(g.mul(r, x)) as u128) < p * n)
            }
            Radius::Float(e) => {
                let bound = e * n as f64;
                self.frequencies
                    .iter()
                    .all(|r| (g.circle_distance(g.mul(r, x)) as f64) < bound)
            }
        }
    }
}

pub fn bohr_set(spec: &BohrSpec) -> ResidueSet {
    bohr_set_with(spec, Execution::default())
}

pub fn bohr_set_with(spec: &BohrSpec, exec: Execution) -> ResidueSet {
    let g = spec.frequencies.group();
    let inside = exec.map_range(g.order(), |x| spec.contains(x as u64));
    ResidueSet::from_predicate(g, |x| inside[x as usize])
}

/// `|B(K, ε)| ≥ ½ ε^{|K|} N`, exact for rational ε and in log form otherwise.
pub fn bourgain_size_check(spec: &BohrSpec) -> Verdict {
    let b = bohr_set(spec);
    let n = spec.frequencies.modulus();
    let size = spec.frequencies.len() as i32;
    let (holds, rhs) = match &spec.radius {
        Radius::Exact(e) => {
            let bound = e.pow(size) * BigRational::new(BigInt::from(n), BigInt::from(2));
            let holds = BigRational::from_integer(BigInt::from(b.len())) >= bound;
            (holds, bound.to_f64().unwrap_or(0.0))
        }
        Radius::Float(e) => {
            let log_bound = size as f64 * e.ln() + (n as f64).ln() - 2f64.ln();
            ((b.len() as f64).ln() >= log_bound, log_bound.exp())
        }
    };
    Verdict {
        check: "bourgain_size_check",
        statement: "|B(K,eps)| >= eps^|K| N / 2",
        holds,
        lhs: b.len() as f64,
        rhs,
        deviation: (rhs - b.len() as f64).max(0.0),
        tolerance: 0.0,
    }
}

/// `2A - 2A` with `counts[x] = #{(a₁,a₂,a₃,a₄) ∈ A⁴ : a₁+a₂-a₃-a₄ ≡ x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceSet {
    pub set: ResidueSet,
    pub counts: Vec<u128>,
    /// Largest distance from `(1/N) Σ_r |Â(r)|⁴ e(rx)` to an integer.
    pub spectral_residual: f64,
    /// The rounded spectral counts equal the direct counts.
    pub spectral_agrees: bool,
}

/// Rounded spectral counts are trusted only below this magnitude.
const SPECTRAL_COUNT_LIMIT: f64 = 4e15;

pub fn two_a_minus_two_a(a: &ResidueSet) -> DifferenceSet {
    two_a_minus_two_a_from(a, &dft_set(a))
}

fn two_a_minus_two_a_from(a: &ResidueSet, table: &SpectrumTable) -> DifferenceSet {
    let g = a.group();
    let n = g.order();
    let members = a.to_vec();
    let mut pair = vec![0u128; n];
    for &x in &members {
        for &y in &members {
            pair[g.add(x, y) as usize] += 1;
        }
    }
    let support: Vec<usize> = (0..n).filter(|&s| pair[s] > 0).collect();
    let mut counts = vec![0u128; n];
    for &s in &support {
        for &t in &support {
            counts[g.sub(s as u64, t as u64) as usize] += pair[s] * pair[t];
        }
    }
    let fourth = SpectrumTable::new(
        g,
        table
            .coefficients()
            .iter()
            .map(|c| Complex64::new(c.norm_sqr().powi(2), 0.0))
            .collect(),
    )
    .expect("same group");
    let spectral = inverse_dft(&fourth);
    let mut residual = 0f64;
    let mut agrees = true;
    for (x, v) in spectral.values().iter().enumerate() {
        let r = v.re.round();
        residual = residual.max((v.re - r).abs()).max(v.im.abs());
        if !(r.abs() < SPECTRAL_COUNT_LIMIT) || r < 0.0 || r as u128 != counts[x] {
            agrees = false;
        }
    }
    if residual >= 0.5 {
        agrees = false;
    }
    DifferenceSet {
        set: ResidueSet::from_predicate(g, |x| counts[x as usize] > 0),
        counts,
        spectral_residual: residual,
        spectral_agrees: agrees,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BohrContainmentReport {
    pub n: u64,
    pub delta: f64,
    /// `α² = δ³/8`.
    pub alpha_sq: BigRational,
    /// `R_α \ {0}`.
    pub frequencies: ResidueSet,
    /// `B(R_α \ {0}, 1/20)`.
    pub bohr: ResidueSet,
    pub difference: DifferenceSet,
    /// `B₁ ⊆ 2A - 2A`.
    pub contained: bool,
    /// `Σ_r |Â(r)|⁴ e(rx) > 0` on `B₁`.
    pub certificate_positive: bool,
    /// `Σ_r |Â(r)|⁴ e(rx) ≥ δ⁴N⁴/4` on `B₁`, as `4N·counts(x) ≥ |A|⁴`.
    pub chain_holds: bool,
    /// `max |1 - e(rx)|` over `x ∈ B₁`, `r ∈ R_α \ {0}`; must stay below 1/2.
    pub max_phase_gap: f64,
    pub slack: Vec<SlackEvent>,
    pub holds: bool,
}

/// `α² = δ³/8` for the density of `a`.
pub fn proposition_alpha(a: &ResidueSet) -> Result<Alpha> {
    Alpha::from_squared(a.density_exact().pow(3) / BigRational::from_integer(BigInt::from(8)))
}

pub fn verify_bohr_containment(a: &ResidueSet) -> Result<BohrContainmentReport> {
    verify_bohr_containment_with(&SetSpectrum::new(a))
}

pub fn verify_bohr_containment_with(spec: &SetSpectrum) -> Result<BohrContainmentReport> {
    let a = spec.set();
    if a.is_empty() {
        return Err(Error::input("A must be nonempty"));
    }
    let g = a.group();
    let n = g.modulus();
    let alpha = proposition_alpha(a)?;
    let level = spec.threshold(&alpha)?;
    let frequencies = level.members.without(0);
    let b1 = BohrSpec::new(frequencies.clone(), Radius::Exact(BigRational::new(1.into(), 20.into())))?;
    let bohr = bohr_set(&b1);
    let difference = two_a_minus_two_a_from(a, spec.table());
    let size4 = (a.len() as u128).pow(4);
    let mut certificate_positive = true;
    let mut chain_holds = true;
    let mut max_phase_gap = 0f64;
    for x in bohr.iter() {
        let c = difference.counts[x as usize];
        certificate_positive &= c > 0;
        chain_holds &= 4 * n as u128 * c >= size4;
        for r in frequencies.iter() {
            let phase = 2.0 * std::f64::consts::PI * g.mul(r, x) as f64 / n as f64;
            max_phase_gap = max_phase_gap.max((Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -phase)).norm());
        }
    }
    let contained = bohr.is_subset(&difference.set);
    let holds = contained && certificate_positive && chain_holds && max_phase_gap < 0.5 && difference.spectral_agrees;
    let Alpha::Exact(alpha_sq) = alpha else { unreachable!("exact by construction") };
    Ok(BohrContainmentReport {
        n,
        delta: a.density(),
        alpha_sq,
        frequencies,
        bohr,
        difference,
        contained,
        certificate_positive,
        chain_holds,
        max_phase_gap,
        slack: level.slack,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullPropositionReport {
    pub containment: BohrContainmentReport,
    /// `Λ*` from the improved decomposition at `α² = δ³/8`.
    pub basis: ResidueSet,
    /// `1/(2^8 log(1/δ))`.
    pub radius: f64,
    /// `B(Λ*, radius)`.
    pub bohr: ResidueSet,
    pub inside_first: bool,
    pub inside_difference: bool,
    /// `2^{33} δ^{-1} log(1/δ)`, reported only.
    pub basis_bound: f64,
    /// Earlier form: `|K| ≤ 8δ^{-1} log(1/δ)` at radius `δ/(2^8 log(1/δ))`, reported only.
    pub chang_frequency_bound: f64,
    pub chang_radius: f64,
    pub holds: bool,
}

pub fn verify_full_proposition(a: &ResidueSet) -> Result<FullPropositionReport> {
    let n = a.modulus();
    if n.gcd(&6) != 1 {
        return Err(Error::input(format!("modulus {n} must be coprime to 6")));
    }
    if a.is_empty() || 2 * a.len() as u64 > n {
        return Err(Error::input(format!("density {}/{n} must lie in (0, 1/2]", a.len())));
    }
    let spec = SetSpectrum::new(a);
    let containment = verify_bohr_containment_with(&spec)?;
    let alpha = proposition_alpha(a)?;
    let dec = improved_decomposition_with(&spec, &alpha, ImprovedVariant::Star, Execution::default())?;
    let delta = a.density();
    let log = (1.0 / delta).log2();
    let radius = 1.0 / (256.0 * log);
    let bohr = bohr_set(&BohrSpec::new(dec.basis.clone(), Radius::Float(radius))?);
    let inside_first = bohr.is_subset(&containment.bohr);
    let inside_difference = bohr.is_subset(&containment.difference.set);
    Ok(FullPropositionReport {
        holds: containment.holds && inside_first && inside_difference,
        containment,
        basis: dec.basis,
        radius,
        bohr,
        inside_first,
        inside_difference,
        basis_bound: 2f64.powi(33) / delta * log,
        chang_frequency_bound: 8.0 / delta * log,
        chang_radius: delta / (256.0 * log),
    })
}
