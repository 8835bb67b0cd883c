//! Generalized Laguerre polynomials `L_n^{[alpha]}`, their monic companions
//! `p_n = (-1)^n n! L_n`, and the weighted products `w(x)^{1/2} L_n(x)` that
//! the determinantal kernels are built from.
//!
//! Evaluation is always the ascending three-term recurrence. The explicit
//! alternating sum loses all significant digits by n ~ 30 and survives only
//! as a small-n oracle in the tests. Weighted products run the recurrence
//! with power-of-two rescaling and attach the half-weight in log space, so
//! ensemble sizes of several hundred stay representable.

use super::{Order, PolyDegree, SignedLog};
use crate::error::Result;

impl Order {
    /// Order shifted up by a non-negative amount; stays inside `alpha > -1`.
    pub(crate) fn shift_up(self, d: f64) -> Order {
        debug_assert!(d >= 0.0);
        Order::new(self.alpha() + d).expect("shift_up keeps alpha > -1")
    }
}

/// `L_n^{[alpha]}(x)` by the ascending three-term recurrence
/// `(k+1) L_{k+1} = (2k+1+alpha-x) L_k - (k+alpha) L_{k-1}`.
pub fn laguerre(n: PolyDegree, alpha: Order, x: f64) -> f64 {
    let a = alpha.alpha();
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + a + 1.0 - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Recurrence state scaled by powers of two to dodge overflow; exact in the
/// mantissa since the rescale factor is a power of two.
struct Scaled {
    prev: f64,
    cur: f64,
    exp2: i64,
}

impl Scaled {
    fn rescale(&mut self) {
        let m = self.cur.abs().max(self.prev.abs());
        if m > 1e250 {
            let f = 2f64.powi(-1000);
            self.cur *= f;
            self.prev *= f;
            self.exp2 += 1000;
        } else if m != 0.0 && m < 1e-250 {
            let f = 2f64.powi(1000);
            self.cur *= f;
            self.prev *= f;
            self.exp2 -= 1000;
        }
    }

    fn to_signed_log(&self) -> SignedLog {
        if self.cur == 0.0 {
            SignedLog::ZERO
        } else {
            SignedLog::new(
                self.cur.signum(),
                self.cur.abs().ln() + self.exp2 as f64 * std::f64::consts::LN_2,
            )
        }
    }
}

fn laguerre_scaled(n: PolyDegree, alpha: Order, x: f64) -> Scaled {
    let a = alpha.alpha();
    let mut s = Scaled {
        prev: 0.0,
        cur: 1.0,
        exp2: 0,
    };
    if n == 0 {
        return s;
    }
    s.prev = 1.0;
    s.cur = 1.0 + a - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + a + 1.0 - x) * s.cur - (kf + a) * s.prev) / (kf + 1.0);
        s.prev = s.cur;
        s.cur = next;
        s.rescale();
    }
    s
}

/// `w(x)^{1/2} L_n^{[alpha]}(x)` as a sign/log pair.
///
/// Requires `x > 0`; kernel code handles the `x = 0` boundary itself.
pub fn laguerre_weighted(n: PolyDegree, alpha: Order, x: f64) -> SignedLog {
    debug_assert!(x > 0.0, "laguerre_weighted requires x > 0");
    let half_log_w = 0.5 * (alpha.alpha() * x.ln() - x);
    laguerre_scaled(n, alpha, x)
        .to_signed_log()
        .mul_exp(half_log_w)
}

/// Monic Laguerre polynomial `p_n^{[alpha]}(x) = (-1)^n n! L_n^{[alpha]}(x)`
/// in sign/log representation (the overflow-safe form; `n!` alone exceeds
/// `f64` past n = 170).
///
/// Monic recurrence: `p_{k+1} = (x - (2k+1+alpha)) p_k - k (k+alpha) p_{k-1}`.
pub fn laguerre_monic_log(n: PolyDegree, alpha: Order, x: f64) -> SignedLog {
    let a = alpha.alpha();
    let mut s = Scaled {
        prev: 0.0,
        cur: 1.0,
        exp2: 0,
    };
    if n == 0 {
        return s.to_signed_log();
    }
    s.prev = 1.0;
    s.cur = x - (1.0 + a);
    for k in 1..n {
        let kf = k as f64;
        let next = (x - (2.0 * kf + 1.0 + a)) * s.cur - kf * (kf + a) * s.prev;
        s.prev = s.cur;
        s.cur = next;
        s.rescale();
    }
    s.to_signed_log()
}

/// `p_n^{[alpha]}(x)` as plain `f64`; overflows to infinity where `n!` does.
pub fn laguerre_monic(n: PolyDegree, alpha: Order, x: f64) -> f64 {
    laguerre_monic_log(n, alpha, x).to_f64()
}

/// Both sides of the derivative identity `d/dx L_n^{[alpha]} = -L_{n-1}^{[alpha+1]}`:
/// a central finite difference of [`laguerre`] on the left, the closed form on
/// the right. Exposed for the test suites; `n >= 1`.
pub fn laguerre_derivative_check(n: PolyDegree, alpha: Order, x: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(crate::error::Error::Domain(
            "derivative check needs n >= 1".into(),
        ));
    }
    let h = 1e-5;
    let lhs = (laguerre(n, alpha, x + h) - laguerre(n, alpha, x - h)) / (2.0 * h);
    let rhs = -laguerre(n - 1, alpha.shift_up(1.0), x);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn ord(a: f64) -> Order {
        Order::new(a).unwrap()
    }

    /// Double-double scalar: the alternating sum needs ~105 bits to act as
    /// an oracle (it cancels catastrophically in plain f64 by n ~ 12 at
    /// x = 20, which is precisely why the shipped code uses the recurrence).
    #[derive(Clone, Copy)]
    struct Dd {
        hi: f64,
        lo: f64,
    }

    impl Dd {
        fn from(v: f64) -> Dd {
            Dd { hi: v, lo: 0.0 }
        }
        fn two_sum(a: f64, b: f64) -> Dd {
            let s = a + b;
            let bb = s - a;
            Dd {
                hi: s,
                lo: (a - (s - bb)) + (b - bb),
            }
        }
        fn two_prod(a: f64, b: f64) -> Dd {
            let p = a * b;
            Dd {
                hi: p,
                lo: a.mul_add(b, -p),
            }
        }
        fn add(self, other: Dd) -> Dd {
            let s = Self::two_sum(self.hi, other.hi);
            Self::two_sum(s.hi, s.lo + self.lo + other.lo)
        }
        fn mul_f64(self, b: f64) -> Dd {
            let p = Self::two_prod(self.hi, b);
            Self::two_sum(p.hi, p.lo + self.lo * b)
        }
        fn div_f64(self, d: f64) -> Dd {
            let q1 = self.hi / d;
            let p = Self::two_prod(q1, d);
            let r = ((self.hi - p.hi) - p.lo) + self.lo;
            Self::two_sum(q1, r / d)
        }
        fn value(self) -> f64 {
            self.hi + self.lo
        }
    }

    /// Explicit alternating sum of the defining formula, in double-double;
    /// the extended-precision test oracle.
    fn laguerre_sum(n: usize, alpha: f64, x: f64) -> f64 {
        // t_0 = binom(n+alpha, n) = prod_{j=1..n} (alpha+j)/j
        let mut term = Dd::from(1.0);
        for j in 1..=n {
            term = term.mul_f64(alpha + j as f64).div_f64(j as f64);
        }
        let mut total = term;
        // t_{m+1} = -t_m x (n-m) / ((m+1)(alpha+m+1))
        for m in 0..n {
            term = term
                .mul_f64(-x)
                .mul_f64((n - m) as f64)
                .div_f64((m as f64 + 1.0) * (alpha + m as f64 + 1.0));
            total = total.add(term);
        }
        total.value()
    }

    #[test]
    fn degree_zero_and_one() {
        for &a in &[0.0, 0.5, 1.0, 2.0] {
            for &x in &[0.1, 1.0, 7.7] {
                assert_eq!(laguerre(0, ord(a), x), 1.0);
                assert_relative_eq!(laguerre(1, ord(a), x), 1.0 + a - x, max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn frozen_small_n_values() {
        // mpmath explicit-sum values
        assert_relative_eq!(
            laguerre(5, ord(1.0), 2.5),
            0.889_322_916_666_666_666_7,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            laguerre(12, ord(0.5), 7.25),
            -0.687_357_996_970_281_198_2,
            max_relative = 1e-12
        );
        assert_relative_eq!(laguerre(2, ord(0.0), 1.0), -0.5, max_relative = 1e-14);
    }

    #[test]
    fn recurrence_matches_explicit_sum() {
        for &a in &[0.0, 0.5, 1.0, 2.0] {
            for n in 0..=12 {
                for i in 1..=20 {
                    let x = i as f64;
                    let rec = laguerre(n, ord(a), x);
                    let sum = laguerre_sum(n, a, x);
                    assert_abs_diff_eq!(rec, sum, epsilon = 1e-9 * (1.0 + rec.abs()));
                }
            }
        }
    }

    #[test]
    fn monic_small_cases() {
        for &a in &[0.0, 1.0, 1.7] {
            for &x in &[0.0, 0.6, 3.2] {
                assert_eq!(laguerre_monic(0, ord(a), x), 1.0);
                assert_relative_eq!(
                    laguerre_monic(1, ord(a), x),
                    x - (1.0 + a),
                    max_relative = 1e-14
                );
            }
        }
        // p_3^[1](0) = -Gamma(4) L_3^[1](0) = -6 binom(4,3) = -24
        assert_relative_eq!(
            laguerre_monic(3, ord(1.0), 0.0),
            -24.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn monic_matches_scaled_factorial_form() {
        for &a in &[0.0, 0.5, 2.0] {
            for n in 0..=15 {
                for &x in &[0.3, 2.0, 11.0] {
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    let want = sign * gamma(n as f64 + 1.0).unwrap() * laguerre(n, ord(a), x);
                    let got = laguerre_monic(n, ord(a), x);
                    assert_abs_diff_eq!(got, want, epsilon = 1e-11 * (1.0 + want.abs()));
                }
            }
        }
    }

    #[test]
    fn monic_log_survives_large_n() {
        // ln |p_n| = ln n! + ln |L_n|; check against the weighted evaluation
        // which carries its own independent rescaling.
        let a = ord(0.5);
        let (n, x) = (150usize, 7.3);
        let p = laguerre_monic_log(n, a, x);
        assert!(p.ln_abs.is_finite());
        let wl = laguerre_weighted(n, a, x);
        let ln_l = wl.ln_abs - 0.5 * (a.alpha() * x.ln() - x);
        let want = crate::specfun::ln_gamma(n as f64 + 1.0).unwrap() + ln_l;
        assert_abs_diff_eq!(p.ln_abs, want, epsilon = 1e-9);
        assert_eq!(p.sign, wl.sign * if n % 2 == 0 { 1.0 } else { -1.0 });
    }

    #[test]
    fn weighted_matches_direct_product() {
        for &a in &[0.0, 1.0, 2.0] {
            for n in [0usize, 1, 4, 9] {
                for &x in &[0.2f64, 1.9, 14.0] {
                    let direct = (x.powf(a) * (-x).exp()).sqrt() * laguerre(n, ord(a), x);
                    let got = laguerre_weighted(n, ord(a), x).to_f64();
                    assert_abs_diff_eq!(got, direct, epsilon = 1e-12 * (1.0 + direct.abs()));
                }
            }
        }
    }

    #[test]
    fn weighted_no_overflow_at_extreme_scale() {
        let v = laguerre_weighted(500, ord(1.0), 3000.0);
        assert!(v.ln_abs.is_finite());
        // deep in the exponential tail the weighted product is minuscule
        assert!(v.ln_abs < -100.0);
    }

    #[test]
    fn derivative_identity() {
        // n=1: L_1^[1] = 2 - x, derivative -1; rhs = -L_0^[2] = -1
        let (lhs, rhs) = laguerre_derivative_check(1, ord(1.0), 5.21).unwrap();
        assert_abs_diff_eq!(lhs, -1.0, epsilon = 1e-8);
        assert_eq!(rhs, -1.0);

        // n=2, alpha=0, x=1: rhs = -L_1^[1](1) = -(2-1) = -1
        let (_, rhs) = laguerre_derivative_check(2, ord(0.0), 1.0).unwrap();
        assert_relative_eq!(rhs, -1.0, max_relative = 1e-14);

        for &(n, a, x) in &[(3usize, 1.5, 0.7), (7, 0.0, 2.2), (12, 2.0, 9.9)] {
            let (lhs, rhs) = laguerre_derivative_check(n, ord(a), x).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-6 * (1.0 + rhs.abs()));
        }
        assert!(laguerre_derivative_check(0, ord(1.0), 1.0).is_err());
    }
}
