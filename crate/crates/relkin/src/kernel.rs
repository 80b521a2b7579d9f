//! Pointwise collision-kernel evaluation.
//!
//! Everything here is a closed-form function of a momentum pair (p, q): the
//! shifted Lorentzian product tau, the scalar factor, the degenerate matrix
//! S, the full kernel matrix Phi = Lambda * S = G * Psi, the scalar kernel G
//! with its explicit gradient, the vector kernel H, and the local weight
//! kappa. The diagonal p = q is a genuine singularity and is refused rather
//! than sampled.
//!
//! tau - 2 is evaluated through the exact conjugate rearrangement
//! (|p-q|^2 + |p x q|^2) / (<p><q> + p.q + 1), whose denominator is >= 1;
//! the naive <p><q> - p.q - 1 loses all significant digits near the diagonal
//! and everything downstream depends on this quantity.

use crate::error::{Error, Result};
use crate::lorentz::{energy, Vec3};
use crate::rng::SampleRng;
use nalgebra::Matrix3;
use serde::Serialize;

/// tau - 2 in cancellation-safe form. Exact zero iff p = q.
///
/// The cross product is taken against the difference (p x q = p x (q - p)):
/// the componentwise subtraction q - p is nearly exact for close arguments,
/// while p x q computed directly cancels catastrophically there.
pub fn tau_minus_2(p: &Vec3, q: &Vec3) -> f64 {
    let d = q - p;
    let c = p.cross(&d);
    (d.norm_squared() + c.norm_squared()) / (energy(p) * energy(q) + p.dot(q) + 1.0)
}

/// Shifted Lorentzian inner product <p><q> - p.q + 1, always >= 2.
pub fn tau(p: &Vec3, q: &Vec3) -> f64 {
    tau_minus_2(p, q) + 2.0
}

/// Bundled kernel values at a momentum pair.
#[derive(Debug, Clone)]
pub struct KernelEval {
    pub tau: f64,
    pub lambda: f64,
    pub s: Matrix3<f64>,
    pub phi: Matrix3<f64>,
    pub g: f64,
    pub grad_g: Vec3,
    pub h: Vec3,
    pub psi: Matrix3<f64>,
}

fn s_matrix(p: &Vec3, q: &Vec3, tt: f64, tm2: f64) -> Matrix3<f64> {
    let d = p - q;
    Matrix3::identity() * tt - d * d.transpose()
        + (p * q.transpose() + q * p.transpose()) * tm2
}

/// Full kernel bundle. Errors on p = q and on tau - 2 underflow.
pub fn kernel_eval(p: &Vec3, q: &Vec3) -> Result<KernelEval> {
    let tm2 = tau_minus_2(p, q);
    if p == q {
        return Err(Error::SingularKernel { tau_minus_2: 0.0 });
    }
    if tm2 < 1e-300 {
        return Err(Error::SingularKernel { tau_minus_2: tm2 });
    }
    let gp = energy(p);
    let gq = energy(q);
    let t = tm2 + 2.0;
    let m = tm2 + 1.0; // tau - 1
    let tt = t * tm2; // tau (tau - 2)
    let st = tt.sqrt();
    let lambda = m * m / (gp * gq * tt * st);
    let s = s_matrix(p, q, tt, tm2);
    let phi = s * lambda;
    let g = m / (gp * gq * st);
    let psi = s * (m / tt);
    let h = (p + q) * (lambda * tm2);

    // gradient of G from its two-term closed form
    let pq = p.dot(q);
    let g1 = (p * pq - q * (gp * gp)) / (gp * gp * gp * gq * st);
    let g2 = (p * gq - q * gp) * (m * m / (gp * gp * gq * st * tt));
    let grad_g = g1 - g2;

    Ok(KernelEval {
        tau: t,
        lambda,
        s,
        phi,
        g,
        grad_g,
        h,
        psi,
    })
}

/// Lean bundle for the coefficient quadrature hot loop: the integrands of
/// the four nonlocal coefficients at one (p, q) node.
#[derive(Debug, Clone, Copy)]
pub struct CoeffIntegrand {
    pub phi: Matrix3<f64>,
    /// Integrand of b (without the factor 2): Lambda (tau-2) (p + q).
    pub h: Vec3,
    /// Integrand of B (without the factor 2): Lambda [(tau-1) p - q].
    pub bb: Vec3,
    /// Integrand of c (without the factor 4).
    pub g: f64,
}

pub fn coeff_integrand(p: &Vec3, gp: f64, q: &Vec3) -> CoeffIntegrand {
    let tm2 = tau_minus_2(p, q);
    let gq = energy(q);
    let t = tm2 + 2.0;
    let m = tm2 + 1.0;
    let tt = t * tm2;
    let st = tt.sqrt();
    let lambda = m * m / (gp * gq * tt * st);
    CoeffIntegrand {
        phi: s_matrix(p, q, tt, tm2) * lambda,
        h: (p + q) * (lambda * tm2),
        bb: (p * m - q) * lambda,
        g: m / (gp * gq * st),
    }
}

/// p-gradient of each Phi^{ij}: returns d Phi / d p_k for k = 0, 1, 2,
/// assembled from the explicit gradient of G and the term-by-term derivative
/// of Psi.
pub fn grad_phi(p: &Vec3, q: &Vec3) -> Result<[Matrix3<f64>; 3]> {
    let ev = kernel_eval(p, q)?;
    let gp = energy(p);
    let gq = energy(q);
    let t = ev.tau;
    let m = t - 1.0;
    let tm2 = t - 2.0;
    let tt = t * tm2;
    let d = p - q;
    let pq_sym = p * q.transpose() + q * p.transpose();
    let mut out = [Matrix3::zeros(); 3];
    for k in 0..3 {
        let dtau = (p[k] * gq - q[k] * gp) / gp;
        let mut dpsi = Matrix3::identity() * dtau;
        dpsi += (d * d.transpose()) * (dtau * (t * t - 2.0 * t + 2.0) / (tt * tt));
        let mut rank1 = Matrix3::zeros();
        for j in 0..3 {
            rank1[(k, j)] += d[j];
            rank1[(j, k)] += d[j];
        }
        dpsi -= rank1 * (m / tt);
        dpsi += pq_sym * (dtau / (t * t));
        let mut rank2 = Matrix3::zeros();
        for j in 0..3 {
            rank2[(k, j)] += q[j];
            rank2[(j, k)] += q[j];
        }
        dpsi += rank2 * (m / t);
        out[k] = ev.psi * ev.grad_g[k] + dpsi * ev.g;
    }
    Ok(out)
}

/// Closed form of kappa: 8 pi / <p>, from the u = cos(theta) antiderivative
/// u / (a^2 sqrt(a^2 - b^2 u^2)) of the polar-angle integral. The prefactor
/// is the one consistent with the flux form of the collision operator (the
/// three operator forms agree with it and disagree otherwise; see the
/// equilibrium tests).
pub fn kappa_closed_form(p_norm: f64) -> f64 {
    let gp = (1.0 + p_norm * p_norm).sqrt();
    8.0 * std::f64::consts::PI / gp
}

/// kappa(p) by adaptive quadrature of the polar-angle integral to relative
/// tolerance better than 1e-10. Depends on |p| only.
pub fn kappa(p: &Vec3) -> f64 {
    let p2 = p.norm_squared();
    let gp = (1.0 + p2).sqrt();
    let f = |theta: f64| {
        let s = theta.sin();
        (1.0 + p2 * s * s).powf(-1.5) * s
    };
    let integral = adaptive_simpson(&f, 0.0, std::f64::consts::PI, 1e-12, 40);
    4.0 * std::f64::consts::PI * gp * integral
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, max_depth: u32) -> f64 {
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let scale = whole.abs().max(1e-30);
    rec(f, a, b, fa, fm, fb, whole, rel_tol * scale, max_depth)
}

/// Worst-case sampled constants for the kernel upper bounds, plus the exact
/// sandwich on tau - 2.
#[derive(Debug, Clone, Serialize)]
pub struct KernelBoundReport {
    pub samples: usize,
    /// Count of sandwich violations beyond 1e-12 arithmetic slack.
    pub sandwich_violations: usize,
    /// sup |Phi^{ij}| |p-q| / (<p><q>)^{1/2} over tau - 2 < 1/8.
    pub phi_near_constant: f64,
    /// sup |Phi^{ij}| / (<p>/<q> + <q>/<p>) over tau - 2 >= 1/8.
    pub phi_far_constant: f64,
    /// sup |Phi^{ij}| min(|p-q|/(<p><q>)^{1/2}, (<p>/<q> + <q>/<p>)^{-1}).
    pub phi_combined_constant: f64,
    /// sup G |p-q|.
    pub g_constant: f64,
    /// sup |grad G| / (<q>^{7/2} (1 + |p-q|^{-2})).
    pub grad_g_constant: f64,
}

pub fn kernel_bound_report(
    sample_count: usize,
    momentum_cap: f64,
    rng: &mut SampleRng,
) -> Result<KernelBoundReport> {
    if sample_count < 1 {
        return Err(Error::domain("sample_count must be >= 1"));
    }
    let mut rep = KernelBoundReport {
        samples: sample_count,
        sandwich_violations: 0,
        phi_near_constant: 0.0,
        phi_far_constant: 0.0,
        phi_combined_constant: 0.0,
        g_constant: 0.0,
        grad_g_constant: 0.0,
    };
    let mut done = 0;
    while done < sample_count {
        let p = rng.vector_in_ball(momentum_cap);
        let q = rng.vector_in_ball(momentum_cap);
        let gp = energy(&p);
        let gq = energy(&q);
        let tm2 = tau_minus_2(&p, &q);
        let diff = q - p;
        let d = diff.norm();
        let c = p.cross(&diff).norm();
        // exact sandwich, no constants
        let lower = (d * d + c * c) / (2.0 * gp * gq);
        let upper = 0.5 * d * d;
        let slack = 1e-12 * (1.0 + tm2);
        if tm2 < lower - slack || tm2 > upper + slack {
            rep.sandwich_violations += 1;
        }
        done += 1;
        if d < 1e-8 {
            continue; // bound ratios only away from the diagonal
        }
        let ev = kernel_eval(&p, &q)?;
        let phi_max = ev.phi.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let near = phi_max * d / (gp * gq).sqrt();
        let far = phi_max / (gp / gq + gq / gp);
        if tm2 < 0.125 {
            rep.phi_near_constant = rep.phi_near_constant.max(near);
        } else {
            rep.phi_far_constant = rep.phi_far_constant.max(far);
        }
        rep.phi_combined_constant = rep.phi_combined_constant.max(near.min(far));
        rep.g_constant = rep.g_constant.max(ev.g * d);
        let grad_bound = gq.powf(3.5) * (1.0 + 1.0 / (d * d));
        rep.grad_g_constant = rep.grad_g_constant.max(ev.grad_g.norm() / grad_bound);
    }
    Ok(rep)
}

/// Residual report for the degenerate direction of S: S(p,q) applied to
/// p/<p> - q/<q> should vanish identically.
#[derive(Debug, Clone, Serialize)]
pub struct NullDirectionReport {
    pub samples: usize,
    pub max_relative_residual: f64,
}

pub fn null_direction_check(sample_count: usize, rng: &mut SampleRng) -> NullDirectionReport {
    let mut max_rel = 0.0_f64;
    for _ in 0..sample_count {
        let p = rng.vector_in_ball(10.0);
        let q = rng.vector_in_ball(10.0);
        if (p - q).norm() < 1e-8 {
            continue;
        }
        let tm2 = tau_minus_2(&p, &q);
        let t = tm2 + 2.0;
        let s = s_matrix(&p, &q, t * tm2, tm2);
        let w = p / energy(&p) - q / energy(&q);
        let wn = w.norm();
        if wn < 1e-14 {
            continue;
        }
        let rel = (s * w).norm() / (s.norm() * wn);
        max_rel = max_rel.max(rel);
    }
    NullDirectionReport {
        samples: sample_count,
        max_relative_residual: max_rel,
    }
}
