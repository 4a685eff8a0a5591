//! The balanced sign system `M·r ≡ 0`, its solution counts `S_{k,d}(B)`,
//! and Gowers uniformity norms.
//!
//! `M` has d+1 rows and 2^{d+1}k columns. Row 0 is +1 on the first half of
//! the columns and -1 on the second half; row t ≥ 1 keeps the sign of row 0
//! in the columns whose 0-based index has bit t-1 set and is zero elsewhere.
//! For d = 0 the system is the single equation defining `T_k`.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::compensated::{ComplexNeumaier, Neumaier};
use crate::count::BigCount;
use crate::energy::{compare_count, ratio, tk_lower_bound_exact, EnergyReport, ENUMERATION_BUDGET};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fourier::{dft_set, ComplexSignal};
use crate::group::ResidueSet;
use crate::spectrum::{Alpha, SetSpectrum};
use crate::verdict::Verdict;

/// Column-count guard for [`build_matrix`].
pub const MAX_COLUMNS: u64 = 1 << 20;
/// Work limit (state updates) for the exact dynamic-programming count.
pub const EXACT_WORK_BUDGET: f64 = 2e9;
/// Work limit (cube products) for transform-based sums.
pub const SPECTRAL_WORK_BUDGET: f64 = 2e9;

/// The (d+1) × 2^{d+1}k sign matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquationSystem {
    pub k: u32,
    pub d: u32,
    pub columns: usize,
    pub entries: Vec<i8>,
}

impl EquationSystem {
    pub fn rows(&self) -> usize {
        self.d as usize + 1
    }

    /// Entry at row `t`, 0-based column `j`.
    pub fn get(&self, t: usize, j: usize) -> i8 {
        self.entries[t * self.columns + j]
    }

    pub fn row(&self, t: usize) -> &[i8] {
        &self.entries[t * self.columns..(t + 1) * self.columns]
    }

    /// Coefficients of column j across all rows.
    pub fn column(&self, j: usize) -> Vec<i8> {
        (0..self.rows()).map(|t| self.get(t, j)).collect()
    }
}

pub fn build_matrix(k: u32, d: u32) -> Result<EquationSystem> {
    if k < 1 {
        return Err(Error::input("k must be at least 1"));
    }
    let columns = (k as u64).checked_shl(d + 1).filter(|&c| c <= MAX_COLUMNS && d < 40);
    let Some(columns) = columns else {
        return Err(Error::Budget {
            what: "build_matrix",
            needed: k as f64 * 2f64.powi(d as i32 + 1),
            limit: MAX_COLUMNS as f64,
        });
    };
    let columns = columns as usize;
    let half = columns / 2;
    let mut entries = vec![0i8; (d as usize + 1) * columns];
    for j in 0..columns {
        let sign = if j < half { 1 } else { -1 };
        entries[j] = sign;
        for t in 1..=d as usize {
            if (j >> (t - 1)) & 1 == 1 {
                entries[t * columns + j] = sign;
            }
        }
    }
    Ok(EquationSystem { k, d, columns, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolutionPath {
    /// Enumeration when within budget, else exact DP, else the transform.
    #[default]
    Auto,
    /// Literal enumeration of all `|B|^{2^{d+1}k}` assignments.
    Enumerate,
    /// Dynamic programming over the vector of partial row sums.
    Exact,
    /// `(1/N^{d+1}) Σ_{x,h} Π_ω |B̂(x + ω·h)|^{2k}`, rounded.
    Spectral,
}

fn enumerate_solutions(b: &ResidueSet, m: &EquationSystem, budget: u64) -> Result<BigCount> {
    let members = b.to_vec();
    let needed = (members.len() as f64).powi(m.columns as i32);
    if needed > budget as f64 {
        return Err(Error::Budget {
            what: "count_solutions (enumeration)",
            needed,
            limit: budget as f64,
        });
    }
    if members.is_empty() {
        return Ok(BigCount::zero());
    }
    let g = b.group();
    let rows = m.rows();
    let mut idx = vec![0usize; m.columns];
    let mut count = 0u64;
    loop {
        let ok = (0..rows).all(|t| {
            let mut s = 0i128;
            for (j, &i) in idx.iter().enumerate() {
                s += m.get(t, j) as i128 * members[i] as i128;
            }
            g.reduce(s) == 0
        });
        if ok {
            count += 1;
        }
        let mut p = 0;
        loop {
            if p == m.columns {
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

/// Counts assignments by propagating the distribution of the row-sum vector
/// in Z_N^{d+1} one column at a time.
fn exact_solutions(b: &ResidueSet, m: &EquationSystem) -> Result<BigCount> {
    let n = b.modulus() as usize;
    let members = b.to_vec();
    let rows = m.rows();
    let states = (n as f64).powi(rows as i32);
    let work = states * m.columns as f64 * members.len() as f64;
    if work > EXACT_WORK_BUDGET || states > 1e8 {
        return Err(Error::Budget {
            what: "count_solutions (exact)",
            needed: work,
            limit: EXACT_WORK_BUDGET,
        });
    }
    if members.is_empty() {
        return Ok(BigCount::zero());
    }
    let states = states as usize;
    // state index = Σ_t s_t N^t; moving column j by value b shifts each s_t by m_tj·b
    let shift_for = |j: usize, v: u64| -> Vec<usize> {
        (0..rows)
            .map(|t| (m.get(t, j) as i64 * v as i64).rem_euclid(n as i64) as usize)
            .collect()
    };
    let step = |from: usize, shift: &[usize]| -> usize {
        let mut rest = from;
        let mut out = 0usize;
        let mut place = 1usize;
        for &sh in shift {
            let digit = rest % n;
            rest /= n;
            out += ((digit + sh) % n) * place;
            place *= n;
        }
        out
    };
    let fits_u128 = (members.len() as f64).log2() * (m.columns as f64) <= 126.0;
    if fits_u128 {
        let mut cur = vec![0u128; states];
        cur[0] = 1;
        for j in 0..m.columns {
            let shifts: Vec<Vec<usize>> = members.iter().map(|&v| shift_for(j, v)).collect();
            let mut next = vec![0u128; states];
            for (s, &c) in cur.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for sh in &shifts {
                    next[step(s, sh)] += c;
                }
            }
            cur = next;
        }
        Ok(BigCount::from(cur[0]))
    } else {
        let mut cur = vec![BigUint::zero(); states];
        cur[0] = BigUint::from(1u8);
        for j in 0..m.columns {
            let shifts: Vec<Vec<usize>> = members.iter().map(|&v| shift_for(j, v)).collect();
            let mut next = vec![BigUint::zero(); states];
            for (s, c) in cur.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for sh in &shifts {
                    next[step(s, sh)] += c;
                }
            }
            cur = next;
        }
        Ok(BigCount::from(cur[0].clone()))
    }
}

/// Offsets `ω·h mod N` for every ω ∈ {0,1}^d, ω indexed by its bits.
fn cube_offsets(h: &[usize], n: usize) -> Vec<usize> {
    let d = h.len();
    (0..1usize << d)
        .map(|w| (0..d).filter(|&i| (w >> i) & 1 == 1).map(|i| h[i]).sum::<usize>() % n)
        .collect()
}

/// Decodes a flat index into `h ∈ Z_N^d`.
fn decode(mut idx: usize, n: usize, d: usize) -> Vec<usize> {
    (0..d)
        .map(|_| {
            let v = idx % n;
            idx /= n;
            v
        })
        .collect()
}

fn spectral_solutions(b: &ResidueSet, k: u32, d: u32, exec: Execution) -> Result<BigCount> {
    let n = b.modulus() as usize;
    let work = (n as f64).powi(d as i32 + 1) * 2f64.powi(d as i32);
    if work > SPECTRAL_WORK_BUDGET {
        return Err(Error::Budget {
            what: "count_solutions (transform)",
            needed: work,
            limit: SPECTRAL_WORK_BUDGET,
        });
    }
    let power: Vec<f64> = dft_set(b)
        .coefficients()
        .iter()
        .map(|c| c.norm_sqr().powi(k as i32))
        .collect();
    let hs = n.pow(d);
    let partials = exec.map_range(hs, |hi| {
        let offs = cube_offsets(&decode(hi, n, d as usize), n);
        let mut acc = Neumaier::default();
        for x in 0..n {
            let p: f64 = offs.iter().map(|&o| power[(x + o) % n]).product();
            acc.add(p);
        }
        acc.total()
    });
    let mut total = Neumaier::default();
    for p in partials {
        total.add(p);
    }
    let value = total.total() / (n as f64).powi(d as i32 + 1);
    if !(value < 2f64.powi(50)) {
        return Err(Error::Precision {
            what: "count_solutions (transform)",
            detail: format!("value {value:e} too large to round reliably"),
        });
    }
    let rounded = value.round();
    if (value - rounded).abs() >= 0.5 || rounded < 0.0 {
        return Err(Error::Precision {
            what: "count_solutions (transform)",
            detail: format!("rounding residual {}", (value - rounded).abs()),
        });
    }
    Ok(BigCount::from(rounded as u64))
}

/// `S_{k,d}(B)`: assignments of `B` to the 2^{d+1}k variables solving `M·r ≡ 0`.
pub fn count_solutions(b: &ResidueSet, k: u32, d: u32) -> Result<BigCount> {
    count_solutions_with(b, k, d, SolutionPath::Auto)
}

/// Literal enumeration of `S_{k,d}(B)` with a caller-chosen tuple budget.
pub fn count_solutions_enumerated(b: &ResidueSet, k: u32, d: u32, budget: u64) -> Result<BigCount> {
    enumerate_solutions(b, &build_matrix(k, d)?, budget)
}

pub fn count_solutions_with(b: &ResidueSet, k: u32, d: u32, path: SolutionPath) -> Result<BigCount> {
    let m = build_matrix(k, d)?;
    match path {
        SolutionPath::Enumerate => enumerate_solutions(b, &m, ENUMERATION_BUDGET),
        SolutionPath::Exact => exact_solutions(b, &m),
        SolutionPath::Spectral => spectral_solutions(b, k, d, Execution::default()),
        SolutionPath::Auto => {
            let size = (b.len() as f64).powi(m.columns as i32);
            if size <= ENUMERATION_BUDGET as f64 {
                return enumerate_solutions(b, &m, ENUMERATION_BUDGET);
            }
            match exact_solutions(b, &m) {
                Err(Error::Budget { .. }) => spectral_solutions(b, k, d, Execution::default()),
                other => other,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GowersNormValue {
    pub d: u32,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GowersPath {
    /// Definitional cube sum when within budget, else the derivative recursion.
    #[default]
    Auto,
    /// `Σ_{x,h} Π_ω C^{|ω|} f(x + ω·h)` with compensated summation.
    Definitional,
    /// `Σ_h raw(Δ_h f, d-1)` with `Δ_h f(x) = f(x)·conj(f(x+h))`.
    Recursive,
}

/// Cube products evaluated by the definitional sum before switching.
const DEFINITIONAL_LIMIT: f64 = 1e8;
/// Negative inner sums above this are rounding noise and clamp to zero.
const NEGATIVE_CLAMP: f64 = -1e-9;

/// Unnormalized `Σ_{x, h ∈ Z_N^d} Π_ω C^{|ω|} f(x + ω·h)`.
fn cube_sum_definitional(f: &[Complex64], d: u32, exec: Execution) -> Complex64 {
    let n = f.len();
    let hs = n.pow(d);
    let parities: Vec<bool> = (0..1usize << d).map(|w| w.count_ones() % 2 == 1).collect();
    let partials = exec.map_range(hs, |hi| {
        let offs = cube_offsets(&decode(hi, n, d as usize), n);
        let mut acc = ComplexNeumaier::default();
        for x in 0..n {
            let mut p = Complex64::new(1.0, 0.0);
            for (o, &odd) in offs.iter().zip(&parities) {
                let v = f[(x + o) % n];
                p *= if odd { v.conj() } else { v };
            }
            acc.add(p);
        }
        acc.total()
    });
    let mut total = ComplexNeumaier::default();
    for p in partials {
        total.add(p);
    }
    total.total()
}

fn cube_sum_recursive(f: &[Complex64], d: u32) -> Complex64 {
    let n = f.len();
    if d == 0 {
        return f.iter().sum();
    }
    if d == 1 {
        let s: Complex64 = f.iter().sum();
        return Complex64::new(s.norm_sqr(), 0.0);
    }
    let mut total = ComplexNeumaier::default();
    let mut diff = vec![Complex64::new(0.0, 0.0); n];
    for h in 0..n {
        for x in 0..n {
            diff[x] = f[x] * f[(x + h) % n].conj();
        }
        total.add(cube_sum_recursive(&diff, d - 1));
    }
    total.total()
}

/// `‖f‖_{U^d} = ((1/N^{d+1}) Σ_{x,h} Π_ω C^{|ω|} f(x + ω·h))^{1/2^d}`.
pub fn gowers_norm(f: &ComplexSignal, d: u32) -> Result<GowersNormValue> {
    gowers_norm_with(f, d, GowersPath::Auto, Execution::default())
}

pub fn gowers_norm_with(f: &ComplexSignal, d: u32, path: GowersPath, exec: Execution) -> Result<GowersNormValue> {
    if d < 1 {
        return Err(Error::input("Gowers norm needs d >= 1"));
    }
    let n = f.group().order() as f64;
    let definitional_work = n.powi(d as i32 + 1) * 2f64.powi(d as i32);
    let recursive_work = n.powi(d as i32);
    let path = match path {
        GowersPath::Auto if definitional_work <= DEFINITIONAL_LIMIT => GowersPath::Definitional,
        GowersPath::Auto => GowersPath::Recursive,
        p => p,
    };
    let (work, limit) = match path {
        GowersPath::Definitional => (definitional_work, SPECTRAL_WORK_BUDGET),
        _ => (recursive_work, SPECTRAL_WORK_BUDGET),
    };
    if work > limit || d > 16 {
        return Err(Error::Budget {
            what: "gowers_norm",
            needed: work,
            limit,
        });
    }
    let raw = match path {
        GowersPath::Definitional => cube_sum_definitional(f.values(), d, exec),
        _ => cube_sum_recursive(f.values(), d),
    };
    let scale = n.powi(d as i32 + 1);
    let inner = raw.re / scale;
    let mag = f.max_abs().powi(1 << d).max(1.0);
    if (raw.im / scale).abs() > 1e-9 * mag {
        return Err(Error::Precision {
            what: "gowers_norm",
            detail: format!("inner sum has imaginary part {}", raw.im / scale),
        });
    }
    let inner = if inner < 0.0 {
        if inner > NEGATIVE_CLAMP * mag {
            0.0
        } else {
            return Err(Error::Precision {
                what: "gowers_norm",
                detail: format!("inner sum is negative: {inner}"),
            });
        }
    } else {
        inner
    };
    Ok(GowersNormValue {
        d,
        value: inner.powf(1.0 / (1u64 << d) as f64),
    })
}

/// Norms `U^1..U^{d_max}` and the check `‖f‖_{U^d} ≤ ‖f‖_{U^{d+1}} + 1e-9`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub norms: Vec<GowersNormValue>,
    pub verdict: Verdict,
}

pub const MONOTONICITY_TOL: f64 = 1e-9;

pub fn gowers_monotonicity_check(f: &ComplexSignal, d_max: u32) -> Result<MonotonicityReport> {
    if d_max < 2 {
        return Err(Error::input("d_max must be at least 2"));
    }
    let norms = (1..=d_max)
        .map(|d| gowers_norm(f, d))
        .collect::<Result<Vec<_>>>()?;
    // worst = max over d of ‖f‖_{U^d} - ‖f‖_{U^{d+1}}
    let (mut worst, mut at) = (f64::NEG_INFINITY, 0usize);
    for (i, w) in norms.windows(2).enumerate() {
        let gap = w[0].value - w[1].value;
        if gap > worst {
            worst = gap;
            at = i;
        }
    }
    Ok(MonotonicityReport {
        verdict: Verdict {
            check: "gowers_monotonicity_check",
            statement: "||f||_U^d <= ||f||_U^(d+1)",
            holds: worst <= MONOTONICITY_TOL,
            lhs: norms[at].value,
            rhs: norms[at + 1].value,
            deviation: worst,
            tolerance: MONOTONICITY_TOL,
        },
        norms,
    })
}

/// `(δα^{2k}m^{2k} / (2^{4k}δ^{2k}))^{2^d}` as a double.
pub fn matrix_lower_bound(delta: f64, alpha: f64, k: u32, d: u32, m: usize) -> f64 {
    let k = k as i32;
    let base = delta * alpha.powi(2 * k) * (m as f64).powi(2 * k) / (2f64.powi(4 * k) * delta.powi(2 * k));
    base.powf(2f64.powi(d as i32))
}

pub fn verify_matrix_theorem(a: &ResidueSet, alpha: &Alpha, k: u32, d: u32) -> Result<EnergyReport> {
    verify_matrix_theorem_with(&SetSpectrum::new(a), alpha, k, d)
}

/// `S_{k,d}(R_α \ {0}) ≥ (δα^{2k}|B|^{2k} / (2^{4k}δ^{2k}))^{2^d}`.
pub fn verify_matrix_theorem_with(spec: &SetSpectrum, alpha: &Alpha, k: u32, d: u32) -> Result<EnergyReport> {
    if k < 1 {
        return Err(Error::input("k must be at least 1"));
    }
    if d > 8 {
        return Err(Error::input("d above 8 is outside every counting budget"));
    }
    let a = spec.set();
    let level = spec.threshold(alpha)?;
    let b = level.members.without(0);
    let count = count_solutions(&b, k, d)?;
    let delta = a.density();
    let m = b.len();
    let approx = matrix_lower_bound(delta, alpha.value(), k, d, m);
    let exact = match alpha {
        Alpha::Exact(sq) => Some(tk_lower_bound_exact(&a.density_exact(), sq, k, m).pow(1 << d)),
        Alpha::Approx(_) => None,
    };
    let cmp = compare_count(&count, exact, approx);
    Ok(EnergyReport {
        check: "verify_matrix_theorem",
        statement: "S_kd(B) >= (delta alpha^2k |B|^2k / (2^4k delta^2k))^(2^d), B = R_alpha \\ {0}",
        n: a.modulus(),
        k,
        d,
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

/// Level lemma for the system: for `B' = R'_{α'} \ {0}`,
/// `S_{k,d}(B') ≥ (δα'^{2k}|B'|^{2k} / (2^{2k}δ^{2k}))^{2^d}`.
pub fn verify_matrix_level_lemma(a: &ResidueSet, alpha: &Alpha, k: u32, d: u32) -> Result<EnergyReport> {
    if k < 1 {
        return Err(Error::input("k must be at least 1"));
    }
    let spec = SetSpectrum::new(a);
    let window = spec.dyadic_window(alpha)?;
    let b = window.members.without(0);
    let count = count_solutions(&b, k, d)?;
    let delta = a.density();
    let m = b.len();
    let ki = k as i32;
    let base = delta * alpha.value().powi(2 * ki) * (m as f64).powi(2 * ki) / (2f64.powi(2 * ki) * delta.powi(2 * ki));
    let approx = base.powf(2f64.powi(d as i32));
    let exact = match alpha {
        Alpha::Exact(sq) => {
            let dd = a.density_exact();
            let mm = BigRational::from_integer(BigInt::from(m));
            let four = BigRational::from_integer(BigInt::from(4));
            Some((&dd * sq.pow(ki) * mm.pow(2 * ki) / (four.pow(ki) * dd.pow(2 * ki))).pow(1 << d))
        }
        Alpha::Approx(_) => None,
    };
    let cmp = compare_count(&count, exact, approx);
    Ok(EnergyReport {
        check: "verify_matrix_level_lemma",
        statement: "S_kd(B') >= (delta alpha'^2k |B'|^2k / (2^2k delta^2k))^(2^d)",
        n: a.modulus(),
        k,
        d,
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
        slack: window.slack,
    })
}
