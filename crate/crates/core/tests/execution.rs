//! Sequential and rayon execution produce the same results.

use num_bigint::BigInt;
use num_rational::BigRational;
use speclab::bohr::{bohr_set_with, BohrSpec, Radius};
use speclab::dissociated::{chang_decomposition_with, improved_decomposition_with, ImprovedVariant};
use speclab::fourier::{dft_with, ComplexSignal, TransformPath};
use speclab::setspec::random_subset;
use speclab::spectrum::SetSpectrum;
use speclab::systems::{gowers_norm_with, GowersPath};
use speclab::{Alpha, CyclicGroup, Execution};

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

#[test]
fn bohr_sets_agree() {
    for (n, seed) in [(97u64, 1), (1000, 2), (4099, 3)] {
        let g = CyclicGroup::new(n).unwrap();
        let spec = BohrSpec::new(random_subset(g, 5, seed), Radius::Exact(q(1, 5))).unwrap();
        assert_eq!(bohr_set_with(&spec, Execution::Sequential), bohr_set_with(&spec, Execution::Parallel));
    }
}

#[test]
fn direct_transforms_agree_bit_for_bit() {
    let g = CyclicGroup::new(513).unwrap();
    let f = ComplexSignal::indicator(&random_subset(g, 100, 4));
    let a = dft_with(&f, TransformPath::Direct, Execution::Sequential);
    let b = dft_with(&f, TransformPath::Direct, Execution::Parallel);
    assert_eq!(a.coefficients(), b.coefficients());
}

#[test]
fn gowers_norms_agree() {
    let g = CyclicGroup::new(20).unwrap();
    let f = ComplexSignal::indicator(&random_subset(g, 7, 5));
    for d in 1..=3 {
        let a = gowers_norm_with(&f, d, GowersPath::Definitional, Execution::Sequential).unwrap();
        let b = gowers_norm_with(&f, d, GowersPath::Definitional, Execution::Parallel).unwrap();
        assert!((a.value - b.value).abs() < 1e-12, "d={d}: {} vs {}", a.value, b.value);
    }
}

#[test]
fn decompositions_agree() {
    for (n, size, seed) in [(101u64, 30, 6), (385, 100, 7)] {
        let g = CyclicGroup::new(n).unwrap();
        let a = random_subset(g, size, seed);
        let spec = SetSpectrum::new(&a);
        let alpha = Alpha::rational(a.density_exact() * q(1, 3)).unwrap();
        let s = chang_decomposition_with(&spec, &alpha, Execution::Sequential).unwrap();
        let p = chang_decomposition_with(&spec, &alpha, Execution::Parallel).unwrap();
        assert_eq!(s.representations, p.representations);
        assert_eq!(s.dissociated, p.dissociated);
        let s = improved_decomposition_with(&spec, &alpha, ImprovedVariant::Star, Execution::Sequential).unwrap();
        let p = improved_decomposition_with(&spec, &alpha, ImprovedVariant::Star, Execution::Parallel).unwrap();
        assert_eq!(s.representations, p.representations);
        assert_eq!(s.basis, p.basis);
    }
}
