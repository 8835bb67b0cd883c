//! Adaptive quadrature on Gauss–Kronrod 7-15 panels, plus generalized
//! Gauss–Laguerre rules for weight-exact orthogonality integrals.
//!
//! Panels bisect until their local error estimate drops below the per-panel
//! tolerance; callers pass breakpoints at known kinks or singular-adjacent
//! abscissae so no panel straddles them.

use crate::error::{Error, Result};
use crate::linalg::tridiag_eigenvalues;
use crate::specfun::{laguerre, ln_gamma, Order};

// 15-point Kronrod abscissae (positive half), 7-point Gauss weights, and
// 15-point Kronrod weights. Standard QUADPACK constants.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_33,
    0.949_107_912_342_758_524_526_189_684_047_85,
    0.864_864_423_359_769_072_789_712_788_640_93,
    0.741_531_185_599_394_439_863_864_773_280_79,
    0.586_087_235_467_691_130_294_144_838_258_73,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_24,
    0.0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_08,
    0.279_705_391_489_276_667_901_467_771_423_78,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_33,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_52,
    0.140_653_259_715_525_918_745_189_590_510_24,
    0.169_004_726_639_267_902_826_583_426_598_55,
    0.190_350_578_064_785_409_913_256_402_421_01,
    0.204_432_940_075_298_892_414_161_999_234_65,
    0.209_482_141_084_727_828_012_999_174_891_71,
];

/// One Gauss–Kronrod 7-15 evaluation on `[a, b]`; returns the Kronrod value
/// and the |K15 - G7| error estimate.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive bisection with a per-panel absolute tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panel_tol: f64) -> Result<f64> {
    integrate_with_breakpoints(f, a, b, &[], panel_tol)
}

/// Adaptive integration of `f` over `[a, b]`, pre-split at `breaks`.
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breaks: &[f64],
    panel_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a < b) {
        return Err(Error::Domain(format!("integration bounds [{a}, {b}]")));
    }
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&t| t > a && t < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup();

    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += adapt(f, w[0], w[1], panel_tol, 0)?;
    }
    Ok(total)
}

const MAX_DEPTH: u32 = 48;

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let (value, err) = gk15(f, a, b);
    if err <= tol || b - a < 1e-14 * (1.0 + a.abs()) {
        return Ok(value);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureNonConvergence { a, b, tol, err });
    }
    let mid = 0.5 * (a + b);
    Ok(adapt(f, a, mid, tol, depth + 1)? + adapt(f, mid, b, tol, depth + 1)?)
}

/// Generalized Gauss–Laguerre rule: nodes and weights for
/// `int_0^inf f(x) x^alpha e^{-x} dx ~= sum w_i f(x_i)`.
///
/// Nodes come from the symmetric tridiagonal Jacobi matrix of the Laguerre
/// recurrence (diagonal `2k + alpha + 1`, off-diagonal `sqrt(k (k+alpha))`),
/// polished by two Newton steps; weights from the classical closed form
/// `w_i = Gamma(n+alpha+1) x_i / (n! (n+1)^2 L_{n+1}^{[alpha]}(x_i)^2)`.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(n: usize, alpha: Order) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("Gauss-Laguerre needs n >= 1".into()));
        }
        let a = alpha.alpha();
        let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + a + 1.0).collect();
        let off: Vec<f64> = (1..n).map(|k| (k as f64 * (k as f64 + a)).sqrt()).collect();
        let mut nodes = tridiag_eigenvalues(diag, off)?;

        let alpha_up = Order::new(a + 1.0).expect("alpha + 1 > -1");
        for x in nodes.iter_mut() {
            for _ in 0..2 {
                let p = laguerre(n, alpha, *x);
                let dp = -laguerre(n - 1, alpha_up, *x);
                let step = p / dp;
                if step.is_finite() {
                    *x -= step;
                }
            }
        }

        // ln[ Gamma(n+alpha+1) / (n! (n+1)^2) ]
        let ln_pref =
            ln_gamma(n as f64 + a + 1.0)? - ln_gamma(n as f64 + 1.0)? - 2.0 * ((n + 1) as f64).ln();
        let weights = nodes
            .iter()
            .map(|&x| {
                let l = laguerre(n + 1, alpha, x);
                (ln_pref + x.ln() - 2.0 * l.abs().ln()).exp()
            })
            .collect();
        Ok(GaussLaguerre { nodes, weights })
    }

    /// `int_0^inf f(x) x^alpha e^{-x} dx`
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn polynomial_exactness() {
        let v = integrate(&|x: f64| x * x * x, 0.0, 2.0, 1e-10).unwrap();
        assert_relative_eq!(v, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn breakpoints_handle_kinks() {
        let f = |x: f64| (x - 1.0).abs();
        let v = integrate_with_breakpoints(&f, 0.0, 2.0, &[1.0], 1e-12).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn oscillatory_integral() {
        let v = integrate(&|x: f64| x.sin(), 0.0, 50.0, 1e-11).unwrap();
        assert_abs_diff_eq!(v, 1.0 - 50f64.cos(), epsilon = 1e-9);
    }

    #[test]
    fn gauss_laguerre_moments() {
        // int x^k x^alpha e^{-x} = Gamma(alpha + k + 1)
        for &a in &[0.0, 0.5, 1.0, 2.0] {
            let rule = GaussLaguerre::new(24, Order::new(a).unwrap()).unwrap();
            for k in 0..=8u32 {
                let got = rule.integrate(|x| x.powi(k as i32));
                let want = gamma(a + k as f64 + 1.0).unwrap();
                assert_relative_eq!(got, want, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn monic_norm_identity() {
        // int p_{N-1}^2 w = Gamma(N + alpha) Gamma(N), to 1e-8 relative
        use crate::specfun::laguerre_monic;
        for &a in &[0.0, 0.5, 1.0, 2.0] {
            let alpha = Order::new(a).unwrap();
            let rule = GaussLaguerre::new(48, alpha).unwrap();
            for n in 1..=8usize {
                let got = rule.integrate(|x| {
                    let v = laguerre_monic(n - 1, alpha, x);
                    v * v
                });
                let want = gamma(n as f64 + a).unwrap() * gamma(n as f64).unwrap();
                assert_relative_eq!(got, want, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn gauss_laguerre_total_mass() {
        let rule = GaussLaguerre::new(40, Order::new(1.5).unwrap()).unwrap();
        assert_relative_eq!(
            rule.integrate(|_| 1.0),
            gamma(2.5).unwrap(),
            max_relative = 1e-11
        );
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(rule.weights.iter().all(|&w| w > 0.0));
    }
}
