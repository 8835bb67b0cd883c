//! Cross-module validation: samplers against determinantal formulas, drift
//! against the density gradient, Palm conditioning against brute-force
//! conditional densities.

use hel_core::dynamics::{drift, DriftMode, DriftSpec};
use hel_core::ensemble::{log_density, sample_batch, EnsembleSpec, PointConfiguration, Sampler};
use hel_core::estimators::{edges_with_min_expected, estimate_rho1, estimate_rho2, ks_distance};
use hel_core::kernels::{correlation_fn, CorrelationKernel, LaguerreKernelN, PalmKernelN};
use hel_core::quad;
use hel_core::specfun::Order;

fn ord(a: f64) -> Order {
    Order::new(a).unwrap()
}

/// Bin-averaged kernel density: expected count in a bin is the integral of
/// the kernel diagonal, not its midpoint value.
fn bin_average_rho1(kernel: &LaguerreKernelN, lo: f64, hi: f64) -> f64 {
    quad::integrate(&|x: f64| kernel.rho1(x.max(1e-300)).unwrap(), lo, hi, 1e-10).unwrap()
        / (hi - lo)
}

#[test]
fn empirical_rho1_matches_kernel_within_3_se() {
    let n = 8;
    let alpha = ord(1.0);
    let spec = EnsembleSpec::new(alpha, n, 314, Sampler::Tridiagonal).unwrap();
    let draws = sample_batch(&spec, 4000, 1).unwrap();
    let edges = edges_with_min_expected(&draws, 400, 40).unwrap();
    let hist = estimate_rho1(&draws, &edges).unwrap();
    let kernel = LaguerreKernelN::new(alpha, n).unwrap();
    for i in 0..hist.bins() {
        if hist.counts[i] < 100 {
            continue;
        }
        let expected = bin_average_rho1(&kernel, hist.edges[i], hist.edges[i + 1]);
        let dev = (hist.density(i) - expected).abs();
        assert!(
            dev <= 3.0 * hist.stderr(i),
            "bin {i} [{}, {}]: density {} vs kernel {expected}, 3se {}",
            hist.edges[i],
            hist.edges[i + 1],
            hist.density(i),
            3.0 * hist.stderr(i)
        );
    }
}

#[test]
fn empirical_rho2_matches_determinant_within_3_se() {
    let n = 6;
    let alpha = ord(1.0);
    let spec = EnsembleSpec::new(alpha, n, 99, Sampler::Tridiagonal).unwrap();
    let draws = sample_batch(&spec, 4000, 1).unwrap();
    let kernel = LaguerreKernelN::new(alpha, n).unwrap();
    // coarse grid over the bulk of the spectrum
    let edges = [2.0, 12.0, 25.0, 45.0, 75.0, 120.0];
    let pair = estimate_rho2(&draws, &edges, &edges).unwrap();
    let cells = edges.len() - 1;
    let mut checked = 0;
    for i in 0..cells {
        for j in 0..cells {
            let se = pair.stderr(i, j);
            if se == 0.0 {
                continue;
            }
            // cell-averaged determinant via a 4x4 midpoint grid
            let mut avg = 0.0;
            let m = 4;
            for a in 0..m {
                for b in 0..m {
                    let y = edges[i] + (edges[i + 1] - edges[i]) * (a as f64 + 0.5) / m as f64;
                    let z = edges[j] + (edges[j + 1] - edges[j]) * (b as f64 + 0.5) / m as f64;
                    avg += if (y - z).abs() < 1e-9 {
                        0.0
                    } else {
                        correlation_fn(&kernel, &[y, z]).unwrap()
                    };
                }
            }
            avg /= (m * m) as f64;
            let dev = (pair.density(i, j) - avg).abs();
            assert!(
                dev <= 3.0 * se + 0.03 * avg,
                "cell ({i},{j}): {} vs {avg}, 3se {}",
                pair.density(i, j),
                3.0 * se
            );
            checked += 1;
        }
    }
    assert!(checked >= 20);
}

#[test]
fn repulsion_shows_at_close_range() {
    // determinantal repulsion: near-diagonal pair density sits below the
    // product of one-point densities
    let n = 6;
    let alpha = ord(1.0);
    let spec = EnsembleSpec::new(alpha, n, 7, Sampler::Tridiagonal).unwrap();
    let draws = sample_batch(&spec, 4000, 1).unwrap();
    let kernel = LaguerreKernelN::new(alpha, n).unwrap();
    let edges = [10.0, 14.0, 18.0];
    let pair = estimate_rho2(&draws, &edges, &edges).unwrap();
    let rho_prod = kernel.rho1(12.0).unwrap() * kernel.rho1(12.0).unwrap();
    assert!(
        pair.density(0, 0) < rho_prod,
        "no repulsion: {} vs {rho_prod}",
        pair.density(0, 0)
    );
}

#[test]
fn tridiagonal_and_hkpv_samplers_agree() {
    let alpha = ord(1.0);
    let tri = EnsembleSpec::new(alpha, 3, 55, Sampler::Tridiagonal).unwrap();
    let dpp = EnsembleSpec::new(alpha, 3, 56, Sampler::DppHkpv).unwrap();
    let a: Vec<f64> = sample_batch(&tri, 4000, 1)
        .unwrap()
        .iter()
        .map(|d| d.smallest())
        .collect();
    let b: Vec<f64> = sample_batch(&dpp, 4000, 1)
        .unwrap()
        .iter()
        .map(|d| d.smallest())
        .collect();
    let (stat, p) = ks_distance(&a, &b).unwrap();
    assert!(p > 0.01, "KS stat {stat}, p {p}");
}

#[test]
fn drift_is_half_the_log_density_gradient() {
    // finite differences of the labeled log-density against the SDE drift
    for &n in &[2usize, 5] {
        let alpha = ord(1.0);
        let ens = EnsembleSpec::new(alpha, n, 21, Sampler::Tridiagonal).unwrap();
        let spec = DriftSpec {
            alpha,
            mode: DriftMode::FiniteN { n },
        };
        for draw in 0..30 {
            let config = hel_core::ensemble::sample_draw(&ens, draw).unwrap();
            let pts = config.points();
            for i in 0..n {
                let h = 1e-6 * pts[i].max(1.0);
                let mut up = pts.to_vec();
                up[i] += h;
                let mut dn = pts.to_vec();
                dn[i] -= h;
                let grad = (log_density(&ens, &up) - log_density(&ens, &dn)) / (2.0 * h);
                let d = drift(&spec, i, pts).unwrap();
                let rel = (grad - 2.0 * d).abs() / (1.0 + (2.0 * d).abs());
                assert!(
                    rel < 1e-5,
                    "N={n} draw={draw} i={i}: grad {grad} vs 2d {}",
                    2.0 * d
                );
            }
        }
    }
}

#[test]
fn expected_count_in_interval_matches_kernel_mass() {
    // int_0^r rho^1 equals the mean particle count in [0, r] within 3 SE
    let n = 8;
    let alpha = ord(1.0);
    let spec = EnsembleSpec::new(alpha, n, 1234, Sampler::Tridiagonal).unwrap();
    let draws = sample_batch(&spec, 4000, 1).unwrap();
    let kernel = LaguerreKernelN::new(alpha, n).unwrap();
    let r = 40.0;
    let mass =
        quad::integrate(&|x: f64| kernel.rho1(x.max(1e-300)).unwrap(), 0.0, r, 1e-9).unwrap();
    let counts: Vec<f64> = draws
        .iter()
        .map(|d| d.points().iter().filter(|&&p| p <= r).count() as f64)
        .collect();
    let m = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / m;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let se = (var / m).sqrt();
    assert!(
        (mean - mass).abs() <= 3.0 * se,
        "count mean {mean} vs kernel mass {mass} (3se {})",
        3.0 * se
    );
}

#[test]
fn every_draw_has_exactly_n_points() {
    // projection rank: both samplers always produce N particles
    for sampler in [Sampler::Tridiagonal, Sampler::DppHkpv] {
        let spec = EnsembleSpec::new(ord(0.5), 4, 8, sampler).unwrap();
        for d in sample_batch(&spec, 200, 1).unwrap() {
            assert_eq!(d.len(), 4);
        }
    }
}

#[test]
fn palm_matches_brute_force_conditional_density() {
    // N = 2: the Palm one-point density at conditioning point x equals the
    // conditional density m(x, y) / int m(x, y') dy' computed by quadrature
    let alpha = ord(1.0);
    let n = 2;
    let base = LaguerreKernelN::new(alpha, n).unwrap();
    let x = 9.0;
    let palm = PalmKernelN::new(base, x).unwrap();
    // labeled density on the hard-edge scale, normalizer-free
    let m = |y: f64| -> f64 {
        if y <= 0.0 || y == x {
            return 0.0;
        }
        (-(x + y) / 8.0).exp() * x * y * (x - y) * (x - y)
    };
    let norm = quad::integrate_with_breakpoints(&m, 0.0, 400.0, &[x, 40.0, 150.0], 1e-12).unwrap();
    for &y in &[1.0, 4.0, 15.0, 40.0] {
        let conditional = m(y) / norm;
        let got = palm.rho1(y).unwrap();
        let rel = (got - conditional).abs() / conditional;
        assert!(rel < 1e-6, "y={y}: palm {got} vs conditional {conditional}");
    }
}

#[test]
fn batch_errors_carry_draw_index() {
    // force an eigen-size mismatch through an impossible configuration:
    // the only reachable per-draw error here is via PointConfiguration
    // validation, so instead check the index tagging on the error type
    let err = hel_core::Error::Draw {
        draw: 17,
        source: Box::new(hel_core::Error::EmptySample("x".into())),
    };
    assert!(format!("{err}").contains("17"));
    // and the public sampler path stays clean on valid input
    let spec = EnsembleSpec::new(ord(1.0), 3, 5, Sampler::Tridiagonal).unwrap();
    assert_eq!(sample_batch(&spec, 5, 2).unwrap().len(), 5);
    let _ = PointConfiguration::new(vec![1.0, 2.0], hel_core::ensemble::ScaleTag::HardEdgeScale)
        .unwrap();
}
