//! Exact arithmetic in Z[ζ_m] for deciding threshold ties.
//!
//! `|Â(r)|²` is the integer combination `Σ_d c_d ζ^{d r}` of autocorrelation
//! counts. Reducing that polynomial modulo the cyclotomic polynomial `Φ_m`
//! (m the order of ζ^r) yields its canonical form in the power basis; the value
//! is rational (then an integer) exactly when the reduced form is constant.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_integer::Integer;

fn cache() -> &'static Mutex<HashMap<u64, Arc<Vec<i64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<i64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Coefficients of Φ_m, lowest degree first.
pub fn cyclotomic_poly(m: u64) -> Arc<Vec<i64>> {
    assert!(m >= 1);
    if let Some(p) = cache().lock().unwrap().get(&m) {
        return p.clone();
    }
    // x^m - 1 divided by every Φ_d with d | m, d < m.
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m % d == 0 {
            let phi = cyclotomic_poly(d);
            num = exact_div_monic(&num, &phi);
        }
    }
    let p = Arc::new(num);
    cache().lock().unwrap().insert(m, p.clone());
    p
}

fn exact_div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let qlen = num.len() - dn;
    let mut q = vec![0i64; qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dn];
        q[i] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[i + j] -= c * dj;
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0), "inexact cyclotomic division");
    q
}

/// Outcome of an exact evaluation in Z[ζ_m].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactValue {
    Integer(i128),
    Irrational,
    /// Intermediate coefficients overflowed; caller falls back to floating point.
    Unknown,
}

/// Evaluates `Σ_e coeffs[e] ζ_m^e` exactly (coeffs has length m).
pub fn reduce_in_cyclotomic_field(coeffs: &[i128], m: u64) -> ExactValue {
    assert_eq!(coeffs.len() as u64, m);
    let phi = cyclotomic_poly(m);
    let deg = phi.len() - 1;
    let mut p = coeffs.to_vec();
    for i in (deg..p.len()).rev() {
        let c = p[i];
        if c == 0 {
            continue;
        }
        for (j, &pj) in phi.iter().enumerate() {
            let Some(t) = c.checked_mul(pj as i128).and_then(|t| p[i - deg + j].checked_sub(t))
            else {
                return ExactValue::Unknown;
            };
            p[i - deg + j] = t;
        }
    }
    if p[1..deg].iter().all(|&c| c == 0) {
        ExactValue::Integer(p[0])
    } else {
        ExactValue::Irrational
    }
}

/// Exact value of `|Σ_{a∈A} ζ_N^{a r}|²` given autocorrelation counts
/// `autocorr[d] = #{(a, b) ∈ A² : a - b ≡ d}`.
pub fn squared_modulus_exact(autocorr: &[u64], r: u64) -> ExactValue {
    let n = autocorr.len() as u64;
    let g = r.gcd(&n);
    let m = n / g;
    let mut coeffs = vec![0i128; m as usize];
    for (d, &c) in autocorr.iter().enumerate() {
        if c != 0 {
            let e = (d as u128 * r as u128 % n as u128) as u64 / g;
            coeffs[e as usize] += c as i128;
        }
    }
    reduce_in_cyclotomic_field(&coeffs, m)
}
