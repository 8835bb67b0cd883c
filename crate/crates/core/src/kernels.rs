//! Determinantal kernels: the Bessel kernel of the hard edge, the finite-N
//! Laguerre Christoffel–Darboux kernel on matrix and hard-edge scales, the
//! Palm-conditioned (rank-one deflated) kernel, and correlation functions as
//! determinants of kernel matrices.
//!
//! Every kernel evaluation is pure; kernel objects are immutable after
//! construction and safe to share across workers.

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigenvalues, lu_determinant};
use crate::quad;
use crate::report::DiagnosticReport;
use crate::specfun::{bessel_j, laguerre_weighted, ln_gamma, Order, SignedLog};

/// Relative half-width of the diagonal band where the confluent forms take
/// over from the ratio forms. Chosen so the two branches agree to at least
/// eight digits across the overlap (validated in the tests).
pub const REL_DIAG_BAND: f64 = 1e-4;

/// Conditioning is refused where the one-point density is this small.
pub const EPS_PALM: f64 = 1e-12;

/// Default outer scale for the trace quadrature region `[0, 4 N omega]`.
pub const OMEGA_TRACE: f64 = 4.0;

/// Hard-edge coordinate from matrix-scale coordinate: `x = 4 N z`.
pub fn hard_edge_from_matrix(n: usize, z: f64) -> f64 {
    4.0 * n as f64 * z
}

/// Matrix-scale coordinate from hard-edge coordinate: `z = x / (4 N)`.
pub fn matrix_from_hard_edge(n: usize, x: f64) -> f64 {
    x / (4.0 * n as f64)
}

fn in_diag_band(x: f64, y: f64) -> bool {
    (x - y).abs() < REL_DIAG_BAND * x.abs().max(y.abs()).max(1.0)
}

/// Anything that can serve as the kernel of a determinantal correlation.
pub trait CorrelationKernel {
    fn eval(&self, x: f64, y: f64) -> Result<f64>;

    /// One-point correlation density `rho^1(x) = K(x, x)`.
    fn rho1(&self, x: f64) -> Result<f64> {
        self.eval(x, x)
    }
}

// ---------------------------------------------------------------------------
// Bessel kernel (the hard-edge limit)
// ---------------------------------------------------------------------------

/// The Bessel kernel
/// `K(x,y) = [sqrt(x) J_{a+1}(sqrt x) J_a(sqrt y) - J_a(sqrt x) sqrt(y) J_{a+1}(sqrt y)] / (2(x-y))`
/// with the confluent diagonal
/// `K(x,x) = (1/4) [J_a(sqrt x)^2 - J_{a+1}(sqrt x) J_{a-1}(sqrt x)]`.
#[derive(Debug, Clone, Copy)]
pub struct BesselKernel {
    alpha: Order,
}

impl BesselKernel {
    pub fn new(alpha: Order) -> Self {
        BesselKernel { alpha }
    }

    pub fn alpha(&self) -> Order {
        self.alpha
    }

    fn check_domain(&self, x: f64, y: f64) -> Result<()> {
        if x < 0.0 || y < 0.0 {
            return Err(Error::Domain(format!(
                "Bessel kernel requires nonnegative arguments, got ({x}, {y})"
            )));
        }
        if self.alpha.alpha() < 0.0 && (x == 0.0 || y == 0.0) {
            return Err(Error::Domain(
                "Bessel kernel diverges at 0 for alpha < 0".into(),
            ));
        }
        Ok(())
    }

    /// Derivative-free off-diagonal form. Factors are grouped per point so
    /// the evaluation is exactly antisymmetric in floating point, making the
    /// kernel symmetric to the bit.
    fn eval_separated(&self, x: f64, y: f64) -> Result<f64> {
        let a = self.alpha.alpha();
        let f = |t: f64| -> Result<(f64, f64)> {
            let s = t.sqrt();
            Ok((s * bessel_j(a + 1.0, s)?, bessel_j(a, s)?))
        };
        let (ax, bx) = f(x)?;
        let (ay, by) = f(y)?;
        Ok((ax * by - ay * bx) / (2.0 * (x - y)))
    }

    /// Confluent diagonal value.
    pub fn diagonal(&self, x: f64) -> Result<f64> {
        self.check_domain(x, x)?;
        let a = self.alpha.alpha();
        if x == 0.0 {
            // leading behaviour x^a / (4^(a+1) Gamma(1+a) Gamma(2+a))
            return Ok(if a > 0.0 { 0.0 } else { 0.25 });
        }
        let s = x.sqrt();
        let ja = bessel_j(a, s)?;
        Ok(0.25 * (ja * ja - bessel_j(a + 1.0, s)? * bessel_j(a - 1.0, s)?))
    }
}

impl CorrelationKernel for BesselKernel {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.check_domain(x, y)?;
        if x == y {
            return self.diagonal(x);
        }
        if !in_diag_band(x, y) {
            return self.eval_separated(x, y);
        }
        // Expand about the midpoint; odd orders cancel, so the midpoint
        // diagonal plus a transverse-curvature term is accurate to O(d^4).
        let m = 0.5 * (x + y);
        let d = 0.5 * (y - x);
        let kd = self.diagonal(m)?;
        let h = (0.01 * m.max(1.0)).min(0.5 * m);
        let curv = (self.eval_separated(m - h, m + h)? - kd) / (h * h);
        Ok(kd + d * d * curv)
    }
}

// ---------------------------------------------------------------------------
// Finite-N Laguerre kernel
// ---------------------------------------------------------------------------

/// The rank-N Christoffel–Darboux kernel of the Laguerre weight
/// `w(z) = z^alpha e^{-z}`, either on matrix scale (`k_N`) or pushed to the
/// hard edge (`K_N(x,y) = k_N(x/4N, y/4N) / 4N`).
///
/// Separated arguments use the ratio form
/// `k(x,y) = sqrt(w(x)w(y)) [G(N+1)/G(N+alpha)]
///           [L_{N-1}(x) L_N(y) - L_N(x) L_{N-1}(y)] / (x-y)`;
/// inside the diagonal band the confluent (Wronskian) combination
/// `L^{[a+1]}_{N-1} L_{N-1} - L_N L^{[a+1]}_{N-2}` is evaluated at the
/// midpoint together with its second-order transverse correction, which the
/// derivative identity `dL_n/dx = -L^{[a+1]}_{n-1}` makes exact. All factor
/// products are sign/log pairs so N in the hundreds cannot overflow.
#[derive(Debug, Clone)]
pub struct LaguerreKernelN {
    alpha: Order,
    n: usize,
    hard_edge: bool,
    ln_gamma_ratio: f64,
}

/// Per-point Christoffel–Darboux factors `(w^{1/2} L_{N-1}, w^{1/2} L_N)`,
/// cached by quadrature loops that pin one argument.
#[derive(Debug, Clone, Copy)]
pub struct CdFactors {
    pub lower: SignedLog,
    pub upper: SignedLog,
    pub z: f64,
}

impl LaguerreKernelN {
    /// Hard-edge scale kernel `K_alpha^N`.
    pub fn new(alpha: Order, n: usize) -> Result<Self> {
        Self::with_scale(alpha, n, true)
    }

    /// Matrix-scale kernel `k_alpha^N`.
    pub fn matrix_scale(alpha: Order, n: usize) -> Result<Self> {
        Self::with_scale(alpha, n, false)
    }

    fn with_scale(alpha: Order, n: usize, hard_edge: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("ensemble size N must be >= 1".into()));
        }
        let ln_gamma_ratio = ln_gamma(n as f64 + 1.0)? - ln_gamma(n as f64 + alpha.alpha())?;
        Ok(LaguerreKernelN {
            alpha,
            n,
            hard_edge,
            ln_gamma_ratio,
        })
    }

    pub fn alpha(&self) -> Order {
        self.alpha
    }

    pub fn ensemble_size(&self) -> usize {
        self.n
    }

    pub fn is_hard_edge(&self) -> bool {
        self.hard_edge
    }

    fn check_domain(&self, x: f64, y: f64) -> Result<()> {
        if x < 0.0 || y < 0.0 {
            return Err(Error::Domain(format!(
                "Laguerre kernel requires nonnegative arguments, got ({x}, {y})"
            )));
        }
        if self.alpha.alpha() < 0.0 && (x == 0.0 || y == 0.0) {
            return Err(Error::Domain(
                "Laguerre kernel diverges at 0 for alpha < 0".into(),
            ));
        }
        Ok(())
    }

    /// Weighted Laguerre factor of shifted order; degree below zero is the
    /// zero polynomial.
    fn wf(&self, shift: f64, degree: isize, z: f64) -> SignedLog {
        if degree < 0 {
            return SignedLog::ZERO;
        }
        laguerre_weighted(degree as usize, self.alpha.shift_up(shift), z)
    }

    /// CD factors at a matrix-scale point `z >= 0`.
    pub fn factors_matrix(&self, z: f64) -> Result<CdFactors> {
        self.check_domain(z, z)?;
        if z == 0.0 {
            let a = self.alpha.alpha();
            if a > 0.0 {
                return Ok(CdFactors {
                    lower: SignedLog::ZERO,
                    upper: SignedLog::ZERO,
                    z,
                });
            }
            // alpha == 0: w(0)^{1/2} L_j(0) = binom(j, j) = 1
            return Ok(CdFactors {
                lower: SignedLog::from_f64(1.0),
                upper: SignedLog::from_f64(1.0),
                z,
            });
        }
        Ok(CdFactors {
            lower: self.wf(0.0, self.n as isize - 1, z),
            upper: self.wf(0.0, self.n as isize, z),
            z,
        })
    }

    /// Ratio-form evaluation from cached factors; both points must be
    /// outside the diagonal band of each other.
    pub fn eval_matrix_from_factors(&self, fx: &CdFactors, fy: &CdFactors) -> f64 {
        let num = SignedLog::diff(fx.lower.mul(fy.upper), fx.upper.mul(fy.lower));
        num.mul_exp(self.ln_gamma_ratio).to_f64() / (fx.z - fy.z)
    }

    /// Matrix-scale kernel value `k_alpha^N(x, y)`.
    pub fn eval_matrix(&self, x: f64, y: f64) -> Result<f64> {
        self.check_domain(x, y)?;
        if x == 0.0 && y == 0.0 {
            let a = self.alpha.alpha();
            return Ok(if a > 0.0 {
                0.0
            } else {
                // orthonormal sum at the origin: N terms, each 1
                self.n as f64
            });
        }
        let v = if (x == 0.0 || y == 0.0) || !in_diag_band(x, y) {
            if x == y {
                return self.diagonal_matrix(x);
            }
            let fx = self.factors_matrix(x)?;
            let fy = self.factors_matrix(y)?;
            self.eval_matrix_from_factors(&fx, &fy)
        } else {
            self.eval_matrix_confluent(x, y)?
        };
        if !v.is_finite() {
            return Err(Error::Overflow(format!(
                "kernel evaluation left the representable range at ({x}, {y})"
            )));
        }
        Ok(v)
    }

    /// Confluent diagonal `k(x, x)`; the `M`-combination of weighted
    /// Laguerre factors divided by `sqrt(x)`.
    pub fn diagonal_matrix(&self, x: f64) -> Result<f64> {
        self.check_domain(x, x)?;
        if x == 0.0 {
            return self.eval_matrix(0.0, 0.0);
        }
        let nn = self.n as isize;
        let t1 = self.wf(0.0, nn - 1, x).mul(self.wf(1.0, nn - 1, x));
        let t2 = self.wf(0.0, nn, x).mul(self.wf(1.0, nn - 2, x));
        Ok(SignedLog::diff(t1, t2)
            .mul_exp(self.ln_gamma_ratio - 0.5 * x.ln())
            .to_f64())
    }

    /// Near-diagonal evaluation: confluent combination at the midpoint plus
    /// the second-order transverse term, both exact in the derivative
    /// identity; the residual error is O(band^4).
    fn eval_matrix_confluent(&self, x: f64, y: f64) -> Result<f64> {
        let m = 0.5 * (x + y);
        let d = 0.5 * (y - x);
        let nn = self.n as isize;

        let t1 = self.wf(0.0, nn - 1, m).mul(self.wf(1.0, nn - 1, m));
        let t2 = self.wf(0.0, nn, m).mul(self.wf(1.0, nn - 2, m));
        // third-derivative group: L_{N-1} L^{[a+3]}_{N-3} - L_N L^{[a+3]}_{N-4}
        let u1 = self.wf(0.0, nn - 1, m).mul(self.wf(3.0, nn - 3, m));
        let u2 = self.wf(0.0, nn, m).mul(self.wf(3.0, nn - 4, m));
        // mixed second/first group: L^{[a+2]}_{N-3} L^{[a+1]}_{N-1} - L^{[a+1]}_{N-2} L^{[a+2]}_{N-2}
        let v1 = self.wf(2.0, nn - 3, m).mul(self.wf(1.0, nn - 1, m));
        let v2 = self.wf(1.0, nn - 2, m).mul(self.wf(2.0, nn - 2, m));

        let ref_ln = [t1, t2, u1, u2, v1, v2]
            .iter()
            .filter(|s| !s.is_zero())
            .map(|s| s.ln_abs)
            .fold(f64::NEG_INFINITY, f64::max);
        if ref_ln == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        let at = |s: SignedLog| {
            if s.is_zero() {
                0.0
            } else {
                s.sign * (s.ln_abs - ref_ln).exp()
            }
        };

        let d0 = (at(t1) - at(t2)) / m.sqrt();
        let d2 = ((at(u1) - at(u2)) / 6.0 + (at(v1) - at(v2)) / 2.0) / (m * m.sqrt());
        // sqrt(w(x) w(y)) / w(m) with x + y = 2m reduces to a pure power
        let weight_corr = self.alpha.alpha() * (0.5 * (x.ln() + y.ln()) - m.ln());
        Ok((d0 + d * d * d2) * (ref_ln + self.ln_gamma_ratio + weight_corr).exp())
    }

    /// Direct orthonormal-sum evaluation (matrix scale); the small-N oracle
    /// for the ratio and confluent forms.
    pub fn sum_form_matrix(&self, x: f64, y: f64) -> Result<f64> {
        self.check_domain(x, y)?;
        let a = self.alpha.alpha();
        let mut total = 0.0;
        for m in 0..self.n {
            // h_m = Gamma(m+alpha+1) / Gamma(m+1)
            let ln_h = ln_gamma(m as f64 + a + 1.0)? - ln_gamma(m as f64 + 1.0)?;
            let phi = |z: f64| -> Result<f64> {
                if z == 0.0 {
                    if a > 0.0 {
                        return Ok(0.0);
                    }
                    // alpha == 0: w^{1/2} L_m at 0 is 1
                    return Ok((-0.5 * ln_h).exp());
                }
                Ok(laguerre_weighted(m, self.alpha, z)
                    .mul_exp(-0.5 * ln_h)
                    .to_f64())
            };
            total += phi(x)? * phi(y)?;
        }
        Ok(total)
    }

    /// Kernel value on the scale the instance was constructed with.
    pub fn eval_scaled(&self, x: f64, y: f64) -> Result<f64> {
        if self.hard_edge {
            Ok(self.eval_matrix(
                matrix_from_hard_edge(self.n, x),
                matrix_from_hard_edge(self.n, y),
            )? / (4.0 * self.n as f64))
        } else {
            self.eval_matrix(x, y)
        }
    }

    /// Reproducing-rank trace `int k(z,z) dz` over `[0, 4 N omega_trace]`
    /// (matrix scale; the hard-edge trace is the same number by
    /// substitution). Equals N up to quadrature error and an exponentially
    /// small tail.
    pub fn trace(&self, omega_trace: f64, panel_tol: f64) -> Result<f64> {
        let hi = 4.0 * self.n as f64 * omega_trace;
        let f = |z: f64| {
            if z <= 0.0 {
                0.0
            } else {
                self.diagonal_matrix(z).unwrap_or(f64::NAN)
            }
        };
        quad::integrate_with_breakpoints(
            &f,
            0.0,
            hi,
            &[1e-6, 1e-4, 1e-2, 0.1, 1.0, 4.0 * self.n as f64],
            panel_tol,
        )
    }
}

impl CorrelationKernel for LaguerreKernelN {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.eval_scaled(x, y)
    }
}

// ---------------------------------------------------------------------------
// Palm (rank-one deflated) kernel
// ---------------------------------------------------------------------------

/// Kernel of the reduced Palm measure conditioned at `point`:
/// `K^x(y, z) = K(y,z) - K(y,x) K(x,z) / K(x,x)`.
#[derive(Debug, Clone)]
pub struct PalmKernelN {
    base: LaguerreKernelN,
    point: f64,
    diag_at_point: f64,
}

impl PalmKernelN {
    pub fn new(base: LaguerreKernelN, point: f64) -> Result<Self> {
        let diag = base.eval(point, point)?;
        if diag <= EPS_PALM {
            return Err(Error::DegenerateConditioning {
                x: point,
                diag,
                floor: EPS_PALM,
            });
        }
        Ok(PalmKernelN {
            base,
            point,
            diag_at_point: diag,
        })
    }

    pub fn conditioning_point(&self) -> f64 {
        self.point
    }

    pub fn base(&self) -> &LaguerreKernelN {
        &self.base
    }

    /// Two-point correlation of the Palm process.
    pub fn rho2(&self, y: f64, z: f64) -> Result<f64> {
        let kyy = self.eval(y, y)?;
        let kzz = self.eval(z, z)?;
        let kyz = self.eval(y, z)?;
        Ok(kyy * kzz - kyz * kyz)
    }
}

impl CorrelationKernel for PalmKernelN {
    fn eval(&self, y: f64, z: f64) -> Result<f64> {
        Ok(self.base.eval(y, z)?
            - self.base.eval(y, self.point)? * self.base.eval(self.point, z)? / self.diag_at_point)
    }
}

// ---------------------------------------------------------------------------
// Kernel matrices and correlation determinants
// ---------------------------------------------------------------------------

/// A symmetric Gram matrix `[K(x_i, x_j)]` over an ordered point set.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    points: Vec<f64>,
    entries: Vec<f64>,
}

impl KernelMatrix {
    pub fn build<K: CorrelationKernel>(kernel: &K, points: &[f64]) -> Result<Self> {
        let n = points.len();
        let mut sorted = points.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicatePoint { x: w[0] });
        }
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = kernel.eval(points[i], points[j])?;
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        Ok(KernelMatrix {
            points: points.to_vec(),
            entries,
        })
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim() + j]
    }

    pub fn determinant(&self) -> f64 {
        lu_determinant(self.entries.clone(), self.dim())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*jacobi_eigenvalues(self.entries.clone(), self.dim())?
            .first()
            .expect("non-empty matrix"))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entry(i, i)).sum()
    }
}

/// The n-point correlation `rho^n(x_1..x_n) = det [K(x_i, x_j)]`.
///
/// Determinants within roundoff below zero are clamped to zero; anything
/// more negative than `-1e-10 * prod_i K(x_i, x_i)` indicates a kernel bug
/// and raises.
pub fn correlation_fn<K: CorrelationKernel>(kernel: &K, points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidConfig(
            "correlation_fn needs at least one point".into(),
        ));
    }
    let matrix = KernelMatrix::build(kernel, points)?;
    let det = matrix.determinant();
    if det >= 0.0 {
        return Ok(det);
    }
    let diag_product: f64 = (0..matrix.dim())
        .map(|i| matrix.entry(i, i).abs().max(1e-300))
        .product();
    let clamp = 1e-10 * diag_product.max(1e-300);
    if det >= -clamp {
        Ok(0.0)
    } else {
        Err(Error::NegativeDeterminant { det, clamp })
    }
}

// ---------------------------------------------------------------------------
// Convergence report and grid diagnostics
// ---------------------------------------------------------------------------

/// Sup-norm distance between hard-edge kernels `K^N` and the Bessel limit
/// over a uniform `grid x grid` mesh on `[0, r]^2`, for each N in
/// `n_list`. Passes when the sup-norms are strictly decreasing and the last
/// one is below `target`.
pub fn kernel_convergence_report(
    alpha: Order,
    n_list: &[usize],
    r: f64,
    grid: usize,
    target: f64,
) -> Result<DiagnosticReport> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("n_list must be increasing".into()));
    }
    if grid < 2 || r <= 0.0 {
        return Err(Error::InvalidConfig("need grid >= 2 and r > 0".into()));
    }
    let mut report = DiagnosticReport::new(
        "kernel-convergence",
        serde_json::json!({"alpha": alpha.alpha(), "n_list": n_list, "r": r, "grid": grid, "target": target}),
    );
    let limit = BesselKernel::new(alpha);
    let mesh: Vec<f64> = (0..grid)
        .map(|i| {
            let t = r * i as f64 / (grid - 1) as f64;
            if t == 0.0 && alpha.alpha() < 0.0 {
                0.5 * r / (grid - 1) as f64
            } else {
                t
            }
        })
        .collect();
    let limit_vals: Vec<Vec<f64>> = mesh
        .iter()
        .map(|&x| {
            mesh.iter()
                .map(|&y| limit.eval(x, y))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut prev = f64::INFINITY;
    let mut last = f64::NAN;
    for &n in n_list {
        let kn = LaguerreKernelN::new(alpha, n)?;
        let mut sup: f64 = 0.0;
        for (i, &x) in mesh.iter().enumerate() {
            for (j, &y) in mesh.iter().enumerate().take(i + 1) {
                sup = sup.max((kn.eval(x, y)? - limit_vals[i][j]).abs());
            }
        }
        report.push(
            format!("sup|K^{n} - K| on [0,{r}]^2"),
            sup,
            prev,
            sup < prev,
        );
        prev = sup;
        last = sup;
    }
    report.push("sup at largest N below target", last, target, last < target);
    Ok(report)
}

/// Finite-grid surrogate for the operator bounds `0 <= K <= Id`: Nystrom
/// eigenvalues of the Bessel kernel on `[0, r]` with a uniform midpoint
/// rule. Returns `(min, max)` of the discretized spectrum. Soft diagnostic:
/// the operator statement itself is not finitely checkable.
pub fn nystrom_spectrum_bounds(alpha: Order, r: f64, nodes: usize) -> Result<(f64, f64)> {
    let kernel = BesselKernel::new(alpha);
    let h = r / nodes as f64;
    let xs: Vec<f64> = (0..nodes).map(|i| (i as f64 + 0.5) * h).collect();
    let mut m = vec![0.0; nodes * nodes];
    for i in 0..nodes {
        for j in i..nodes {
            let v = h * kernel.eval(xs[i], xs[j])?;
            m[i * nodes + j] = v;
            m[j * nodes + i] = v;
        }
    }
    let ev = jacobi_eigenvalues(m, nodes)?;
    Ok((*ev.first().unwrap(), *ev.last().unwrap()))
}
