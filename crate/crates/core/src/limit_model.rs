//! Covariance algebra of the Bargmann–Fock limit field `ξ(w,z) = exp(−½‖w−z‖²)`.
//!
//! Every `z`-dependent matrix lives in the adapted basis whose first axis is parallel to
//! `z`; variables are ordered point-major inside each slot:
//! `(s(0), s(z), ∂₁s(0), ∂₁s(z), …, ∂ₙs(0), ∂ₙs(z))`.

use crate::error::Result;
use crate::gaussian::{block_diag, condition_on_zero, SymmetricMatrix};
use nalgebra::{DMatrix, Matrix2, Matrix4, SymmetricEigen};
use serde::Serialize;

pub fn bf_kernel(w: &[f64], z: &[f64]) -> f64 {
    let d2: f64 = w.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
    (-0.5 * d2).exp()
}

/// First and mixed derivatives of `ξ(w, z)`: `x` differentiates `w`, `y` differentiates `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelJet {
    pub grad_x: Vec<f64>,
    pub grad_y: Vec<f64>,
    pub hess_xy: DMatrix<f64>,
}

pub fn bf_jet_derivatives(w: &[f64], z: &[f64]) -> KernelJet {
    let n = w.len();
    let xi = bf_kernel(w, z);
    let diff: Vec<f64> = w.iter().zip(z).map(|(a, b)| a - b).collect();
    KernelJet {
        grad_x: diff.iter().map(|d| -d * xi).collect(),
        grad_y: diff.iter().map(|d| d * xi).collect(),
        hess_xy: DMatrix::from_fn(n, n, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            (delta - diff[i] * diff[j]) * xi
        }),
    }
}

// asinh(x) − x, accurate near zero.
fn asinh_minus_x(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        // coefficients (−1)^k (2k)! / (4^k (k!)² (2k+1))
        let mut term = x;
        let mut sum = 0.0;
        for k in 1..12 {
            let kf = k as f64;
            term *= -x2 * (2.0 * kf - 1.0) * (2.0 * kf - 1.0) / ((2.0 * kf) * (2.0 * kf + 1.0));
            sum += term;
        }
        sum
    } else {
        x.asinh() - x
    }
}

// sinh(x) − x, accurate near zero.
fn sinh_minus_x(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let x2 = x * x;
        let mut term = x;
        let mut sum = 0.0;
        for k in 1..15 {
            let kf = k as f64;
            term *= x2 / ((2.0 * kf) * (2.0 * kf + 1.0));
            sum += term;
        }
        sum
    } else {
        x.sinh() - x
    }
}

/// The scalar functions of `t = ‖z‖²` that diagonalize the limit covariances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarFamilies {
    pub t: f64,
    pub a: f64,
    pub b_plus: f64,
    pub b_minus: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub v4: f64,
    pub u1: f64,
    pub u2: f64,
}

impl ScalarFamilies {
    pub fn at(t: f64) -> Self {
        assert!(t >= 0.0, "t must be non-negative");
        let x = 0.5 * t;
        let root = x.hypot(1.0);
        let ash = x.asinh();
        let em = (-x).exp();
        // 1 ∓ a written without cancellation
        let one_minus_a = (x + x * x / (root + 1.0)) / root;
        let one_plus_a = (1.0 + (-ash).exp()) / root;
        let u2 = if t == 0.0 { 0.0 } else { 2.0 * sinh_minus_x(x) / x.exp_m1() };
        Self {
            t,
            a: (1.0 - x) / root,
            b_plus: one_plus_a.sqrt(),
            b_minus: one_minus_a.sqrt(),
            v1: 1.0 + (-x - ash).exp(),
            v2: -asinh_minus_x(x).exp_m1(),
            v3: -(-x - ash).exp_m1(),
            v4: 1.0 + (ash - x).exp(),
            u1: (-(-t).exp_m1() + t * em) / (1.0 + em),
            u2,
        }
    }
}

/// `f(t) = 1 − (t² + 2)e^{−t} + e^{−2t}`, evaluated as `4e^{−t}(sinh x − x)(sinh x + x)`.
pub fn det_f(t: f64) -> f64 {
    let x = 0.5 * t;
    let s = sinh_minus_x(x);
    4.0 * (-t).exp() * s * (s + 2.0 * x)
}

/// Value-block core `[[1, e^{−t/2}], [e^{−t/2}, 1]]`.
pub fn theta_core(t: f64) -> Matrix2<f64> {
    let e = (-0.5 * t).exp();
    Matrix2::new(1.0, e, e, 1.0)
}

/// The 4×4 covariance of `(s(0), s(z), ∂₁s(0), ∂₁s(z))`.
pub fn omega_tilde(t: f64) -> Matrix4<f64> {
    let e = (-0.5 * t).exp();
    let s = t.sqrt() * e;
    let c = (1.0 - t) * e;
    Matrix4::new(
        1.0, e, 0.0, -s, //
        e, 1.0, s, 0.0, //
        0.0, s, 1.0, c, //
        -s, 0.0, c, 1.0,
    )
}

/// Conditional covariance of `(∂₁s(0), ∂₁s(z))` given both values vanish; zero at `t = 0`.
pub fn lambda_tilde(t: f64) -> Matrix2<f64> {
    if t == 0.0 {
        return Matrix2::zeros();
    }
    let p = 1.0 - t / t.exp_m1();
    let q = (-0.5 * t).exp() * (1.0 + t / (-t).exp_m1());
    Matrix2::new(p, q, q, p)
}

/// Rotation by π/4.
pub fn q_matrix() -> Matrix2<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Matrix2::new(h, -h, h, h)
}

/// The orthogonal matrix with `P Ω̃ Pᵗ = diag(v₁, v₂, v₃, v₄)`.
pub fn p_matrix(t: f64) -> Matrix4<f64> {
    let s = ScalarFamilies::at(t);
    let (bp, bm) = (s.b_plus, s.b_minus);
    0.5 * Matrix4::new(
        bm, -bm, -bp, -bp, //
        bp, -bp, bm, bm, //
        bm, bm, -bp, bp, //
        bp, bp, bm, -bm,
    )
}

pub fn diagonalize_omega_tilde(t: f64) -> (Matrix4<f64>, [f64; 4]) {
    let s = ScalarFamilies::at(t);
    (p_matrix(t), [s.v1, s.v2, s.v3, s.v4])
}

pub fn diagonalize_lambda_tilde(t: f64) -> (f64, f64) {
    let s = ScalarFamilies::at(t);
    (s.u1, s.u2)
}

fn to_dmatrix2(m: &Matrix2<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(2, 2, m.as_slice())
}

/// All limit covariances at a point `z ∈ Rⁿ`, in the adapted basis.
#[derive(Debug, Clone)]
pub struct LimitCovariances {
    pub z_norm_sq: f64,
    pub n: usize,
    pub r: usize,
    /// `Θ core ⊗ I_r`, index `point·r + component`.
    pub theta: SymmetricMatrix,
    pub omega_prime: SymmetricMatrix,
    pub lambda_prime: SymmetricMatrix,
    pub omega_tilde: Matrix4<f64>,
    pub lambda_tilde: Matrix2<f64>,
    pub p: Matrix4<f64>,
    pub q: Matrix2<f64>,
}

pub fn build_limit_covariances(z: &[f64], r: usize) -> LimitCovariances {
    let n = z.len();
    assert!(n >= 1 && r >= 1 && r <= n, "need 1 <= r <= n");
    let t: f64 = z.iter().map(|v| v * v).sum();
    let core = to_dmatrix2(&theta_core(t));
    let ot = omega_tilde(t);
    let lt = lambda_tilde(t);
    let mut om_blocks = vec![DMatrix::from_column_slice(4, 4, ot.as_slice())];
    let mut la_blocks = vec![to_dmatrix2(&lt)];
    for _ in 1..n {
        om_blocks.push(core.clone());
        la_blocks.push(core.clone());
    }
    let omega = block_diag(&om_blocks.iter().collect::<Vec<_>>());
    let lambda = block_diag(&la_blocks.iter().collect::<Vec<_>>());
    let theta_core_sym = SymmetricMatrix::new(core).expect("symmetric by construction");
    LimitCovariances {
        z_norm_sq: t,
        n,
        r,
        theta: theta_core_sym.kron_identity(r),
        omega_prime: SymmetricMatrix::new(omega).expect("symmetric by construction"),
        lambda_prime: SymmetricMatrix::new(lambda).expect("symmetric by construction"),
        omega_tilde: ot,
        lambda_tilde: lt,
        p: p_matrix(t),
        q: q_matrix(),
    }
}

/// Covariance of the 1-jets at `0` and `z = (√t, 0, …)` assembled straight from the kernel
/// derivatives, as an independent route to `Ω′`.
pub fn omega_prime_from_kernel(t: f64, n: usize) -> SymmetricMatrix {
    let p0 = vec![0.0; n];
    let mut p1 = vec![0.0; n];
    p1[0] = t.sqrt();
    let pts = [&p0, &p1];
    let dim = 2 * (n + 1);
    let mut m = DMatrix::zeros(dim, dim);
    // slot 0 = value, slot k = ∂ₖ; index = 2·slot + point
    for (a, pa) in pts.iter().enumerate() {
        for (b, pb) in pts.iter().enumerate() {
            let jet = bf_jet_derivatives(pa, pb);
            m[(a, b)] = bf_kernel(pa, pb);
            for i in 0..n {
                m[(2 * (i + 1) + a, b)] = jet.grad_x[i];
                m[(a, 2 * (i + 1) + b)] = jet.grad_y[i];
                for j in 0..n {
                    m[(2 * (i + 1) + a, 2 * (j + 1) + b)] = jet.hess_xy[(i, j)];
                }
            }
        }
    }
    SymmetricMatrix::new(m).expect("kernel jets are symmetric")
}

/// `‖diag(0, Λ̃^{1/2}) Ω̃^{−1/2}‖₂`, built from the exact diagonalizers so that it stays
/// meaningful when `Ω̃` is nearly singular. The other derivative blocks contribute exactly 1.
pub fn sqrt_ratio_norm(t: f64) -> f64 {
    let (p, v) = diagonalize_omega_tilde(t);
    let (u1, u2) = diagonalize_lambda_tilde(t);
    let q = q_matrix();
    let omega_inv_half = p.transpose() * Matrix4::from_diagonal(&nalgebra::Vector4::from_fn(|i, _| 1.0 / v[i].sqrt())) * p;
    let lam_half = q.transpose() * Matrix2::new(u1.sqrt(), 0.0, 0.0, u2.sqrt()) * q;
    let mut d = Matrix4::zeros();
    d.fixed_view_mut::<2, 2>(2, 2).copy_from(&lam_half);
    let m = d * omega_inv_half;
    let s = SymmetricEigen::new(m.transpose() * m).eigenvalues.max().max(0.0).sqrt();
    s.max(1.0)
}

/// One line of the deterministic identity suite.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub max_err: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Log-spaced grid of `count` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

// mixed absolute/relative error
fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Check the closed-form identities on a 40-point log grid over `[1e-4, 40]`.
pub fn identity_suite() -> Result<Vec<IdentityCheck>> {
    let grid = log_grid(1e-4, 40.0, 40);
    let mut det_theta = 0.0f64;
    let mut p_orth = 0.0f64;
    let mut p_diag = 0.0f64;
    let mut q_diag = 0.0f64;
    let mut schur = 0.0f64;
    let mut v_prod = 0.0f64;
    let mut u_prod = 0.0f64;
    for &t in &grid {
        let sf = ScalarFamilies::at(t);
        let f = det_f(t);
        let n = 3;
        let r = 2;
        let mut z = vec![0.0; n];
        // a generic direction: the adapted basis must not care
        z[0] = t.sqrt();
        let lc = build_limit_covariances(&z, r);
        det_theta = det_theta.max(rel(lc.theta.determinant(), (-(-t).exp_m1()).powi(r as i32)));

        let p = lc.p;
        p_orth = p_orth.max((p * p.transpose() - Matrix4::identity()).amax());
        let diag = Matrix4::from_diagonal(&nalgebra::Vector4::new(sf.v1, sf.v2, sf.v3, sf.v4));
        p_diag = p_diag.max((p * lc.omega_tilde * p.transpose() - diag).amax());

        let q = lc.q;
        let qd = Matrix2::new(sf.u1, 0.0, 0.0, sf.u2);
        q_diag = q_diag.max((q * lc.lambda_tilde * q.transpose() - qd).amax());

        let cond = condition_on_zero(&lc.omega_prime, 2)?;
        schur = schur.max((cond.as_matrix() - lc.lambda_prime.as_matrix()).amax());

        v_prod = v_prod.max(rel(sf.v1 * sf.v2 * sf.v3 * sf.v4, f));
        u_prod = u_prod.max(rel(sf.u1 * sf.u2, f / (-(-t).exp_m1())));
    }
    let mk = |name, max_err: f64, tol| IdentityCheck { name, max_err, tol, passed: max_err <= tol };
    Ok(vec![
        mk("det_theta", det_theta, 1e-10),
        mk("p_orthogonal", p_orth, 1e-10),
        mk("p_diagonalizes_omega_tilde", p_diag, 1e-10),
        mk("q_diagonalizes_lambda_tilde", q_diag, 1e-12),
        mk("schur_omega_is_lambda", schur, 1e-9),
        mk("v_product_is_f", v_prod, 1e-10),
        mk("u_product_is_f_ratio", u_prod, 1e-10),
    ])
}
