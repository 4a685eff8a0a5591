//! Discrete Fourier transform on Z_N and its structural identities.
//!
//! Convention: `e(x) = exp(-2πi x/N)` and `f̂(r) = Σ_n f(n) e(-nr)`, so
//! `f̂(r) = Σ_n f(n) exp(+2πi nr/N)`. The inverse is
//! `f(x) = (1/N) Σ_r f̂(r) e(rx)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::group::{CyclicGroup, ResidueSet};
use crate::verdict::Verdict;

/// Above this modulus `dft` switches from the O(N²) definitional sum to the
/// FFT path.
pub const FAST_TRANSFORM_THRESHOLD: u64 = 4096;

/// Relative tolerance for identities between sums of squares.
pub const SQUARE_SUM_RTOL: f64 = 1e-9;
/// Tolerance, relative to N and operand magnitudes, for product identities.
pub const PRODUCT_RTOL: f64 = 1e-6;

/// A function `f: Z_N → ℂ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    group: CyclicGroup,
    values: Vec<Complex64>,
}

impl ComplexSignal {
    pub fn new(group: CyclicGroup, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::input(format!(
                "signal has {} values, modulus is {}",
                values.len(),
                group.modulus()
            )));
        }
        Ok(ComplexSignal { group, values })
    }

    pub fn from_real(group: CyclicGroup, values: &[f64]) -> Result<Self> {
        Self::new(group, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn indicator(set: &ResidueSet) -> Self {
        ComplexSignal {
            group: set.group(),
            values: set.indicator().into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn constant(group: CyclicGroup, c: Complex64) -> Self {
        ComplexSignal { group, values: vec![c; group.order()] }
    }

    pub fn zero(group: CyclicGroup) -> Self {
        Self::constant(group, Complex64::new(0.0, 0.0))
    }

    /// Entries with real and imaginary parts uniform in [-1, 1).
    pub fn random<R: Rng + ?Sized>(group: CyclicGroup, rng: &mut R) -> Self {
        let values = (0..group.order())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ComplexSignal { group, values }
    }

    /// Real entries uniform in [-1, 1).
    pub fn random_real<R: Rng + ?Sized>(group: CyclicGroup, rng: &mut R) -> Self {
        let values = (0..group.order())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
            .collect();
        ComplexSignal { group, values }
    }

    pub fn group(&self) -> CyclicGroup {
        self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, x: u64) -> Complex64 {
        self.values[(x % self.group.modulus()) as usize]
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// True when every value satisfies `|f(x)|² = f(x)`, i.e. f is 0/1-valued.
    pub fn is_indicator(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.im == 0.0 && (v.re == 0.0 || v.re == 1.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// The coefficients `r ↦ f̂(r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    group: CyclicGroup,
    coefficients: Vec<Complex64>,
}

impl SpectrumTable {
    pub fn new(group: CyclicGroup, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != group.order() {
            return Err(Error::input("spectrum length must equal the modulus"));
        }
        Ok(SpectrumTable { group, coefficients })
    }

    pub fn group(&self) -> CyclicGroup {
        self.group
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn get(&self, r: u64) -> Complex64 {
        self.coefficients[(r % self.group.modulus()) as usize]
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.norm()).collect()
    }
}

/// `exp(2πi t/N)` for t in [0, N), built from exact integer phases.
pub(crate) fn unit_roots(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|t| {
            let theta = 2.0 * PI * t as f64 / n as f64;
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect()
}

/// Which algorithm evaluates the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformPath {
    /// Definitional O(N²) summation.
    Direct,
    /// Mixed-radix / Bluestein FFT, valid for any N.
    Fast,
}

/// `Σ_n values[n] · exp(sign · 2πi nr/N)` for every r.
fn transform(values: &[Complex64], sign: i32, path: TransformPath, exec: Execution) -> Vec<Complex64> {
    let n = values.len();
    match path {
        TransformPath::Direct => {
            let roots = unit_roots(n);
            exec.map_range(n, |r| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (x, v) in values.iter().enumerate() {
                    let mut t = (x as u128 * r as u128 % n as u128) as usize;
                    if sign < 0 && t != 0 {
                        t = n - t;
                    }
                    acc += v * roots[t];
                }
                acc
            })
        }
        TransformPath::Fast => {
            let mut planner = FftPlanner::<f64>::new();
            // rustfft's forward transform uses exp(-2πi nk/N).
            let fft = if sign > 0 {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            };
            let mut buf = values.to_vec();
            fft.process(&mut buf);
            buf
        }
    }
}

fn default_path(n: u64) -> TransformPath {
    if n > FAST_TRANSFORM_THRESHOLD {
        TransformPath::Fast
    } else {
        TransformPath::Direct
    }
}

pub fn dft(f: &ComplexSignal) -> SpectrumTable {
    dft_with(f, default_path(f.group.modulus()), Execution::default())
}

pub fn dft_with(f: &ComplexSignal, path: TransformPath, exec: Execution) -> SpectrumTable {
    SpectrumTable {
        group: f.group,
        coefficients: transform(&f.values, 1, path, exec),
    }
}

/// Transform of the indicator of `set`; `Â(0) = |A|`.
pub fn dft_set(set: &ResidueSet) -> SpectrumTable {
    dft(&ComplexSignal::indicator(set))
}

pub fn inverse_dft(spec: &SpectrumTable) -> ComplexSignal {
    let n = spec.group.modulus();
    let raw = transform(&spec.coefficients, -1, default_path(n), Execution::default());
    let scale = 1.0 / n as f64;
    ComplexSignal {
        group: spec.group,
        values: raw.into_iter().map(|v| v * scale).collect(),
    }
}

fn same_group(f: &ComplexSignal, g: &ComplexSignal) -> Result<()> {
    if f.group != g.group {
        return Err(Error::input(format!(
            "moduli differ: {} vs {}",
            f.group.modulus(),
            g.group.modulus()
        )));
    }
    Ok(())
}

/// `(f*g)(x) = Σ_y f(y) g(y - x)`.
pub fn convolution(f: &ComplexSignal, g: &ComplexSignal) -> Result<ComplexSignal> {
    same_group(f, g)?;
    let n = f.group.order();
    let values = Execution::default().map_range(n, |x| {
        let mut acc = Complex64::new(0.0, 0.0);
        for y in 0..n {
            acc += f.values[y] * g.values[(y + n - x) % n];
        }
        acc
    });
    Ok(ComplexSignal { group: f.group, values })
}

/// Checks `(f*g)^(r) = f̂(r) · conj(ĝ(r))` for all r.
///
/// The identity requires a real-valued `g`; for complex `g` the right-hand
/// side becomes `f̂(r) · conj(ĥ(r))` with `h = conj(g)`, and that is not what
/// this check asserts.
pub fn convolution_identity_check(f: &ComplexSignal, g: &ComplexSignal) -> Result<Verdict> {
    same_group(f, g)?;
    if !g.is_real() {
        return Err(Error::input("convolution transform identity needs a real-valued g"));
    }
    let lhs = dft(&convolution(f, g)?);
    let fh = dft(f);
    let gh = dft(g);
    let mut dev = 0.0f64;
    let mut scale = 1.0f64;
    for r in 0..f.group.order() {
        let rhs = fh.coefficients[r] * gh.coefficients[r].conj();
        dev = dev.max((lhs.coefficients[r] - rhs).norm());
        scale = scale.max(rhs.norm());
    }
    Ok(Verdict::identity(
        "convolution",
        "(f*g)^(r) = f^(r) conj(g^(r))",
        dev,
        0.0,
        dev,
        SQUARE_SUM_RTOL * scale,
    ))
}

/// `Σ_r |f̂(r)|² = N Σ_x |f(x)|²`.
pub fn parseval_check(f: &ComplexSignal) -> Verdict {
    let spec = dft(f);
    let lhs: f64 = spec.coefficients.iter().map(|c| c.norm_sqr()).sum();
    let rhs = f.group.modulus() as f64 * f.values.iter().map(|v| v.norm_sqr()).sum::<f64>();
    let dev = (lhs - rhs).abs();
    Verdict::identity(
        "parseval_check",
        "sum_r |f^(r)|^2 = N sum_x |f(x)|^2",
        lhs,
        rhs,
        dev,
        SQUARE_SUM_RTOL * lhs.abs().max(rhs.abs()),
    )
}

/// Roundtrip `inverse_dft(dft(f)) = f`, max absolute entry error.
pub fn inversion_check(f: &ComplexSignal) -> Verdict {
    let back = inverse_dft(&dft(f));
    let dev = f
        .values
        .iter()
        .zip(&back.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Verdict::identity(
        "inverse_dft",
        "f(x) = (1/N) sum_r f^(r) e(rx)",
        dev,
        0.0,
        dev,
        SQUARE_SUM_RTOL,
    )
}

/// `(1/N) Σ_r f̂(r) conj(ĝ(r - u))` for every u.
fn correlation_of_spectra(fh: &SpectrumTable, gh: &SpectrumTable) -> Vec<Complex64> {
    let n = fh.group.order();
    let inv_n = 1.0 / n as f64;
    Execution::default().map_range(n, |u| {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..n {
            acc += fh.coefficients[r] * gh.coefficients[(r + n - u) % n].conj();
        }
        acc * inv_n
    })
}

/// Result of the characteristic-function identity check.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFunctionReport {
    pub verdict: Verdict,
    /// Whether `f` is 0/1-valued (where the identity must hold).
    pub is_indicator: bool,
    /// The u attaining the largest deviation.
    pub worst_u: u64,
}

/// `f̂(u) = (1/N) Σ_r f̂(r) conj(f̂(r - u))` for all u.
///
/// The identity characterizes 0/1-valued functions: for an indicator the
/// verdict holds, otherwise the report exposes the (nonzero) maximal deviation.
pub fn char_function_identity_check(f: &ComplexSignal) -> CharFunctionReport {
    let fh = dft(f);
    let rhs = correlation_of_spectra(&fh, &fh);
    let (mut dev, mut worst) = (0.0f64, 0u64);
    for (u, r) in rhs.iter().enumerate() {
        let d = (fh.coefficients[u] - r).norm();
        if d > dev {
            dev = d;
            worst = u as u64;
        }
    }
    let n = f.group.modulus() as f64;
    let scale = n * f.max_abs().powi(2).max(1.0);
    CharFunctionReport {
        verdict: Verdict::identity(
            "char_function_identity_check",
            "f^(u) = (1/N) sum_r f^(r) conj(f^(r-u))",
            fh.coefficients[worst as usize].norm(),
            rhs[worst as usize].norm(),
            dev,
            PRODUCT_RTOL * scale,
        ),
        is_indicator: f.is_indicator(),
        worst_u: worst,
    }
}

/// `(1/N) Σ_r f̂(r) conj(ĝ(r - u)) = Σ_x f(x) conj(g(x)) e(-xu)`.
pub fn cross_correlation_identity_check(
    f: &ComplexSignal,
    g: &ComplexSignal,
    u: u64,
) -> Result<Verdict> {
    same_group(f, g)?;
    let n = f.group.order();
    let u = (u % n as u64) as usize;
    let fh = dft(f);
    let gh = dft(g);
    let mut lhs = Complex64::new(0.0, 0.0);
    for r in 0..n {
        lhs += fh.coefficients[r] * gh.coefficients[(r + n - u) % n].conj();
    }
    lhs /= n as f64;
    let roots = unit_roots(n);
    let mut rhs = Complex64::new(0.0, 0.0);
    for x in 0..n {
        // e(-xu) = exp(+2πi xu/N)
        rhs += f.values[x] * g.values[x].conj() * roots[x * u % n];
    }
    let dev = (lhs - rhs).norm();
    let scale = n as f64 * f.max_abs().max(1.0) * g.max_abs().max(1.0);
    Ok(Verdict::identity(
        "cross_correlation_identity_check",
        "(1/N) sum_r f^(r) conj(g^(r-u)) = sum_x f(x) conj(g(x)) e(-xu)",
        lhs.norm(),
        rhs.norm(),
        dev,
        PRODUCT_RTOL * scale,
    ))
}
