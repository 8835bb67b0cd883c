//! Property tests for the structural invariants: kernel symmetry and
//! positive semidefiniteness, correlation inequalities, estimator merge
//! associativity, and rank-invariance of the KS distance.

use hel_core::ensemble::{log_density, EnsembleSpec, PointConfiguration, Sampler, ScaleTag};
use hel_core::estimators::{estimate_rho1, ks_distance};
use hel_core::kernels::{correlation_fn, CorrelationKernel, KernelMatrix, LaguerreKernelN};
use hel_core::specfun::Order;
use proptest::prelude::*;

fn ord(a: f64) -> Order {
    Order::new(a).unwrap()
}

fn distinct_points(max_n: usize, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3..hi, 1..=max_n).prop_map(|mut v| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_symmetry_and_schwarz(
        alpha in 0.0f64..3.0,
        n in 1usize..40,
        x in 1e-3f64..200.0,
        y in 1e-3f64..200.0,
    ) {
        let k = LaguerreKernelN::new(ord(alpha), n).unwrap();
        let kxy = k.eval(x, y).unwrap();
        let kyx = k.eval(y, x).unwrap();
        prop_assert!((kxy - kyx).abs() <= 1e-12 * (1.0 + kxy.abs()));
        let bound = (k.rho1(x).unwrap() * k.rho1(y).unwrap()).sqrt();
        prop_assert!(kxy.abs() <= bound + 1e-10, "|K| = {} > {}", kxy.abs(), bound);
    }

    #[test]
    fn kernel_matrices_are_psd(
        alpha in 0.0f64..2.5,
        n in 2usize..30,
        points in distinct_points(8, 300.0),
    ) {
        let k = LaguerreKernelN::new(ord(alpha), n).unwrap();
        let m = KernelMatrix::build(&k, &points).unwrap();
        let min_ev = m.min_eigenvalue().unwrap();
        prop_assert!(min_ev >= -1e-8 * m.trace().abs().max(1e-12),
            "min eigenvalue {min_ev}, trace {}", m.trace());
    }

    #[test]
    fn two_point_correlation_inequalities(
        alpha in 0.0f64..2.5,
        n in 2usize..30,
        y in 0.1f64..150.0,
        z in 0.1f64..150.0,
    ) {
        prop_assume!((y - z).abs() > 1e-6);
        let k = LaguerreKernelN::new(ord(alpha), n).unwrap();
        let rho2 = correlation_fn(&k, &[y, z]).unwrap();
        let prod = k.rho1(y).unwrap() * k.rho1(z).unwrap();
        // PSD gives rho2 <= rho rho; the factor-2 form is the cited bound
        prop_assert!(rho2 <= prod + 1e-10);
        prop_assert!(rho2 <= 2.0 * prod + 1e-10);
        prop_assert!(rho2 >= 0.0);
    }

    #[test]
    fn log_density_is_permutation_invariant(
        points in distinct_points(6, 100.0),
        swap_a in 0usize..6,
        swap_b in 0usize..6,
    ) {
        prop_assume!(points.len() >= 2);
        let spec = EnsembleSpec::new(ord(1.0), points.len(), 0, Sampler::Tridiagonal).unwrap();
        let base = log_density(&spec, &points);
        let mut permuted = points.clone();
        permuted.swap(swap_a % points.len(), swap_b % points.len());
        let other = log_density(&spec, &permuted);
        prop_assert!((base - other).abs() <= 1e-9 * (1.0 + base.abs()));
    }

    #[test]
    fn ks_distance_is_rank_invariant(
        a in prop::collection::vec(-4.0f64..4.0, 3..60),
        b in prop::collection::vec(-4.0f64..4.0, 3..60),
    ) {
        let (d1, p1) = ks_distance(&a, &b).unwrap();
        let t = |x: f64| x.exp() + 0.5 * x;
        let ta: Vec<f64> = a.iter().map(|&x| t(x)).collect();
        let tb: Vec<f64> = b.iter().map(|&x| t(x)).collect();
        let (d2, p2) = ks_distance(&ta, &tb).unwrap();
        prop_assert_eq!(d1, d2);
        prop_assert_eq!(p1, p2);
    }

    #[test]
    fn histogram_merge_is_associative(
        rows in prop::collection::vec(
            prop::collection::vec(0.01f64..19.9, 1..5), 3..12),
    ) {
        let configs: Vec<PointConfiguration> = rows
            .into_iter()
            .map(|mut v| {
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
                PointConfiguration::new(v, ScaleTag::HardEdgeScale).unwrap()
            })
            .collect();
        let edges = [0.0, 5.0, 10.0, 20.0];
        let third = configs.len() / 3;
        prop_assume!(third >= 1);
        let h = |c: &[PointConfiguration]| estimate_rho1(c, &edges).unwrap();
        let (a, b, c) = (
            h(&configs[..third]),
            h(&configs[third..2 * third]),
            h(&configs[2 * third..]),
        );
        // (a + b) + c
        let mut left = a.clone();
        left.merge(&b).unwrap();
        left.merge(&c).unwrap();
        // a + (b + c)
        let mut bc = b.clone();
        bc.merge(&c).unwrap();
        let mut right = a.clone();
        right.merge(&bc).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(left, h(&configs));
    }
}
