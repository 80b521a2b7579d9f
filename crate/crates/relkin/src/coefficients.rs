//! Nonlocal coefficients of the collision operator and its three forms.
//!
//! All four coefficients at an evaluation point come out of one pass over a
//! spherical quadrature centered there. Refinement levels double the rule;
//! the returned error estimates are two-level differences.

use crate::distribution::DistributionSpec;
use crate::error::{Error, Result};
use crate::kernel::{coeff_integrand, grad_phi, kappa_closed_form};
use crate::lorentz::{energy, Vec3};
use crate::quadrature::{build_spherical, SphericalConfig, SphericalScheme};
use nalgebra::Matrix3;
use serde::Serialize;

/// Quadrature policy for the nonlocal integrals.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    pub radial_nodes: usize,
    pub panel_count: usize,
    pub theta_nodes: usize,
    pub phi_nodes: usize,
    /// Tail-truncation tolerance fed to the declared-decay bound.
    pub tail_tol: f64,
    /// Worst kernel growth <q>^w used in the tail bound.
    pub kernel_growth: f64,
    /// Target relative tolerance of the refinement loop.
    pub target_rel_tol: f64,
    /// Maximum refinement levels past the base rule (0 = single level, no
    /// error estimate refinement).
    pub max_refine: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            radial_nodes: 6,
            panel_count: 8,
            theta_nodes: 16,
            phi_nodes: 32,
            tail_tol: 1e-9,
            kernel_growth: 7.0,
            target_rel_tol: 1e-4,
            max_refine: 3,
        }
    }
}

impl QuadratureConfig {
    /// Cheap fixed-rule policy for inner solver loops.
    pub fn solver_grade() -> Self {
        QuadratureConfig {
            radial_nodes: 4,
            panel_count: 6,
            theta_nodes: 8,
            phi_nodes: 16,
            tail_tol: 1e-7,
            kernel_growth: 7.0,
            target_rel_tol: 1e-3,
            max_refine: 0,
        }
    }

    fn spherical(&self, f: &DistributionSpec, p: &Vec3) -> Result<SphericalConfig> {
        let tail = f.tail_radius(self.kernel_growth, self.tail_tol)?;
        let mut cfg = SphericalConfig::new(tail + p.norm());
        cfg.radial_nodes = self.radial_nodes;
        cfg.panel_count = self.panel_count;
        cfg.theta_nodes = self.theta_nodes;
        cfg.phi_nodes = self.phi_nodes;
        if let Some(hint) = f.support_hint {
            let d = hint.center - p;
            let dist = d.norm();
            if dist > 1e-12 {
                cfg.axis = Some(d);
            }
            cfg.extra_radii = vec![
                (dist - hint.radius).max(0.0),
                dist + hint.radius,
                (dist - 0.3 * hint.radius).max(0.0),
                dist + 0.3 * hint.radius,
            ];
            // far from the support, the mass sits in a cone around the axis:
            // split the polar rule at the cone boundary and half-way inside
            if dist > hint.radius {
                let u_star = (1.0 - (hint.radius / dist).powi(2)).sqrt();
                cfg.theta_panels = vec![u_star, 0.5 * (1.0 + u_star)];
            }
        }
        Ok(cfg)
    }
}

/// The coefficient bundle at one momentum, with two-level error estimates.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientEval {
    pub a: [[f64; 3]; 3],
    pub b: [f64; 3],
    pub bb: [f64; 3],
    pub c: f64,
    pub err_a: f64,
    pub err_b: f64,
    pub err_bb: f64,
    pub err_c: f64,
}

impl CoefficientEval {
    pub fn a_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.a[i][j])
    }

    pub fn b_vector(&self) -> Vec3 {
        Vec3::new(self.b[0], self.b[1], self.b[2])
    }

    pub fn bb_vector(&self) -> Vec3 {
        Vec3::new(self.bb[0], self.bb[1], self.bb[2])
    }

    /// Smallest eigenvalue of the (symmetric) diffusion matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        self.a_matrix()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, &e| m.min(e))
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.a_matrix()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::NEG_INFINITY, |m, &e| m.max(e))
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct RawSums {
    a: Matrix3<f64>,
    b: Vec3,
    bb: Vec3,
    c: f64,
}

fn accumulate(f: &DistributionSpec, p: &Vec3, scheme: &SphericalScheme) -> RawSums {
    let gp = energy(p);
    let mut sums = RawSums {
        a: Matrix3::zeros(),
        b: Vec3::zeros(),
        bb: Vec3::zeros(),
        c: 0.0,
    };
    for (off, w) in scheme.offsets.iter().zip(&scheme.weights) {
        let q = p + off;
        let fq = f.density(&q);
        if fq == 0.0 {
            continue;
        }
        let ig = coeff_integrand(p, gp, &q);
        let wf = w * fq;
        sums.a += ig.phi * wf;
        sums.b += ig.h * wf;
        sums.bb += ig.bb * wf;
        sums.c += ig.g * wf;
    }
    sums.b *= 2.0;
    sums.bb *= 2.0;
    sums.c *= 4.0;
    sums
}

fn require_decay(f: &DistributionSpec, min_k: f64, what: &str) -> Result<()> {
    if let Some(k) = f.polynomial_order() {
        if k <= min_k {
            return Err(Error::config(format!(
                "{what} requires declared polynomial decay k > {min_k}, got k = {k}"
            )));
        }
    }
    Ok(())
}

/// All four coefficients at `p`, refined until the two-level difference of
/// every component group is below the target (relative to its scale).
pub fn assemble(f: &DistributionSpec, p: &Vec3, config: &QuadratureConfig) -> Result<CoefficientEval> {
    require_decay(f, 5.0, "coefficient assembly")?;
    let mut sph = config.spherical(f, p)?;
    let mut scheme = build_spherical(&sph);
    let mut prev = accumulate(f, p, &scheme);
    let mut level = 0usize;
    loop {
        if config.max_refine == 0 {
            // single-level mode: reuse the same sums, no refinement estimate
            return Ok(finish(f, p, &prev, &prev));
        }
        sph = sph.refined();
        scheme = build_spherical(&sph);
        let cur = accumulate(f, p, &scheme);
        let scale = cur.a.norm() + cur.b.norm() + cur.bb.norm() + cur.c.abs() + 1e-300;
        let diff = (cur.a - prev.a).norm()
            + (cur.b - prev.b).norm()
            + (cur.bb - prev.bb).norm()
            + (cur.c - prev.c).abs();
        level += 1;
        if diff <= config.target_rel_tol * scale || level >= config.max_refine {
            if diff > config.target_rel_tol * scale {
                return Err(Error::Convergence(format!(
                    "coefficient quadrature not converged after {level} refinements: rel diff {:.3e}",
                    diff / scale
                )));
            }
            return Ok(finish(f, p, &cur, &prev));
        }
        prev = cur;
    }
}

fn finish(f: &DistributionSpec, p: &Vec3, cur: &RawSums, prev: &RawSums) -> CoefficientEval {
    // symmetrize a: the integrand matrix is symmetric pointwise, keep the
    // stored value exactly symmetric
    let a_sym = (cur.a + cur.a.transpose()) * 0.5;
    let c_total = cur.c + kappa_closed_form(p.norm()) * f.density(p);
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = a_sym[(i, j)];
        }
    }
    CoefficientEval {
        a,
        b: [cur.b.x, cur.b.y, cur.b.z],
        bb: [cur.bb.x, cur.bb.y, cur.bb.z],
        c: c_total,
        err_a: (cur.a - prev.a).norm(),
        err_b: (cur.b - prev.b).norm(),
        err_bb: (cur.bb - prev.bb).norm(),
        err_c: (cur.c - prev.c).abs(),
    }
}

/// Diffusion matrix a^f(p).
pub fn coeff_a(f: &DistributionSpec, p: &Vec3, config: &QuadratureConfig) -> Result<Matrix3<f64>> {
    require_decay(f, 5.0, "coeff_a")?;
    Ok(assemble(f, p, config)?.a_matrix())
}

/// Drift vector b^f(p) of the nondivergence form.
pub fn coeff_b(f: &DistributionSpec, p: &Vec3, config: &QuadratureConfig) -> Result<Vec3> {
    require_decay(f, 4.0, "coeff_b")?;
    Ok(assemble(f, p, config)?.b_vector())
}

/// Drift vector B^f(p) of the divergence form.
pub fn coeff_bb(f: &DistributionSpec, p: &Vec3, config: &QuadratureConfig) -> Result<Vec3> {
    require_decay(f, 4.0, "coeff_bb")?;
    Ok(assemble(f, p, config)?.bb_vector())
}

/// Zeroth-order coefficient c^f(p), including the local kappa term.
pub fn coeff_c(f: &DistributionSpec, p: &Vec3, config: &QuadratureConfig) -> Result<f64> {
    require_decay(f, 3.0, "coeff_c")?;
    Ok(assemble(f, p, config)?.c)
}

/// Row divergence of the diffusion matrix, (div a)_j = sum_i d_i a_ij,
/// by quadrature of the explicit kernel gradient.
pub fn coeff_a_divergence(
    f: &DistributionSpec,
    p: &Vec3,
    config: &QuadratureConfig,
) -> Result<Vec3> {
    require_decay(f, 5.0, "coeff_a_divergence")?;
    let sph = config.spherical(f, p)?;
    let scheme = build_spherical(&sph);
    let mut out = Vec3::zeros();
    for (off, w) in scheme.offsets.iter().zip(&scheme.weights) {
        let q = p + off;
        let fq = f.density(&q);
        if fq == 0.0 {
            continue;
        }
        let gp = grad_phi(p, &q)?;
        for j in 0..3 {
            let mut s = 0.0;
            for (i, gpi) in gp.iter().enumerate() {
                s += gpi[(i, j)];
            }
            out[j] += w * fq * s;
        }
    }
    Ok(out)
}

/// Second argument of the collision operator: value plus derivatives, either
/// analytic or by scale-aware 4th-order central differences.
pub trait TestFunction: Sync {
    fn value(&self, p: &Vec3) -> f64;

    fn gradient(&self, p: &Vec3) -> Vec3 {
        let h = 1e-3 * (1.0 + p.norm());
        let mut g = Vec3::zeros();
        for k in 0..3 {
            let shift = |s: f64| {
                let mut pp = *p;
                pp[k] += s;
                self.value(&pp)
            };
            g[k] = (8.0 * (shift(h) - shift(-h)) - (shift(2.0 * h) - shift(-2.0 * h)))
                / (12.0 * h);
        }
        g
    }

    fn hessian(&self, p: &Vec3) -> Matrix3<f64> {
        let h = 1e-3 * (1.0 + p.norm());
        let mut m = Matrix3::zeros();
        let at = |dp: Vec3| self.value(&(p + dp));
        for k in 0..3 {
            let mut e = Vec3::zeros();
            e[k] = h;
            m[(k, k)] = (-at(e * 2.0) + 16.0 * at(e) - 30.0 * at(Vec3::zeros()) + 16.0 * at(-e)
                - at(e * -2.0))
                / (12.0 * h * h);
        }
        for k in 0..3 {
            for l in (k + 1)..3 {
                let mut ek = Vec3::zeros();
                let mut el = Vec3::zeros();
                ek[k] = h;
                el[l] = h;
                let v = (at(ek + el) - at(ek - el) - at(-ek + el) + at(-ek - el))
                    / (4.0 * h * h);
                m[(k, l)] = v;
                m[(l, k)] = v;
            }
        }
        m
    }
}

/// Wrap plain closures as a test function (derivatives by differences).
pub struct NumericFn<F: Fn(&Vec3) -> f64 + Sync>(pub F);

impl<F: Fn(&Vec3) -> f64 + Sync> TestFunction for NumericFn<F> {
    fn value(&self, p: &Vec3) -> f64 {
        (self.0)(p)
    }
}

/// Juttner as a test function with analytic derivatives.
pub struct JuttnerFn {
    pub c1: f64,
    pub c2: f64,
}

impl TestFunction for JuttnerFn {
    fn value(&self, p: &Vec3) -> f64 {
        self.c1 * (-self.c2 * energy(p)).exp()
    }

    fn gradient(&self, p: &Vec3) -> Vec3 {
        let gp = energy(p);
        p * (-self.c1 * self.c2 / gp * (-self.c2 * gp).exp())
    }

    fn hessian(&self, p: &Vec3) -> Matrix3<f64> {
        let gp = energy(p);
        let v = self.c1 * (-self.c2 * gp).exp();
        let pp = p * p.transpose();
        // D^2 e^{-c2 <p>} = e^{-c2<p>} [ c2^2 pp/<p>^2 - c2 (I/<p> - pp/<p>^3) ]
        (pp * (self.c2 * self.c2 / (gp * gp))
            - (Matrix3::identity() / gp - pp / (gp * gp * gp)) * self.c2)
            * v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OperatorForm {
    /// Finite-difference divergence of the flux integral.
    Direct,
    /// tr(a D^2 g) + b . grad g + c g.
    Nondivergence,
    /// div(a grad g) + B . grad g + c g.
    Divergence,
}

/// Collision operator in the requested form at one momentum point.
pub fn q_rl(
    f: &DistributionSpec,
    g: &dyn TestFunction,
    p: &Vec3,
    form: OperatorForm,
    config: &QuadratureConfig,
) -> Result<f64> {
    match form {
        OperatorForm::Nondivergence => {
            let ev = assemble(f, p, config)?;
            Ok((ev.a_matrix() * g.hessian(p)).trace()
                + ev.b_vector().dot(&g.gradient(p))
                + ev.c * g.value(p))
        }
        OperatorForm::Divergence => {
            let ev = assemble(f, p, config)?;
            let div_a = coeff_a_divergence(f, p, config)?;
            Ok((ev.a_matrix() * g.hessian(p)).trace()
                + (div_a + ev.bb_vector()).dot(&g.gradient(p))
                + ev.c * g.value(p))
        }
        OperatorForm::Direct => {
            // flux I(p') = int Phi(p',q) [f(q) grad g(p') - g(p') grad f(q)] dq,
            // then a central-difference divergence in p'.
            let sph = config.spherical(f, p)?;
            let scheme = build_spherical(&sph);
            let flux = |pp: &Vec3| -> Vec3 {
                let gpp = energy(pp);
                let grad_g = g.gradient(pp);
                let g_val = g.value(pp);
                let mut acc = Vec3::zeros();
                for (off, w) in scheme.offsets.iter().zip(&scheme.weights) {
                    let q = pp + off;
                    let fq = f.density(&q);
                    let gradf = f.gradient(&q);
                    let vec = grad_g * fq - gradf * g_val;
                    if vec == Vec3::zeros() {
                        continue;
                    }
                    let phi = coeff_integrand(pp, gpp, &q).phi;
                    acc += phi * vec * *w;
                }
                acc
            };
            let h = 1e-4 * (1.0 + p.norm());
            let mut div = 0.0;
            for k in 0..3 {
                let mut pp = *p;
                let mut pm = *p;
                pp[k] += h;
                pm[k] -= h;
                div += (flux(&pp)[k] - flux(&pm)[k]) / (2.0 * h);
            }
            Ok(div)
        }
    }
}

/// Macroscopic moments of a density, by the same spherical machinery.
#[derive(Debug, Clone, Serialize)]
pub struct Moments {
    pub mass: f64,
    pub energy: f64,
    pub momentum: [f64; 3],
    /// Absolute entropy integral of f |log f|.
    pub entropy_abs: f64,
    pub err_mass: f64,
}

pub fn macroscopic_moments(f: &DistributionSpec, config: &QuadratureConfig) -> Result<Moments> {
    let center = f.support_hint.map(|h| h.center).unwrap_or_else(Vec3::zeros);
    let tail = f.tail_radius(1.0, config.tail_tol)?;
    let mut sph = SphericalConfig::new(tail + center.norm());
    sph.radial_nodes = config.radial_nodes;
    sph.panel_count = config.panel_count;
    sph.theta_nodes = config.theta_nodes;
    sph.phi_nodes = config.phi_nodes;
    if let Some(hint) = f.support_hint {
        sph.extra_radii = vec![
            (hint.radius * 0.5).max(0.0),
            hint.radius,
            hint.radius * 1.5,
        ];
    }
    let eval = |scheme: &SphericalScheme| {
        let mut m = (0.0, 0.0, Vec3::zeros(), 0.0);
        for (off, w) in scheme.offsets.iter().zip(&scheme.weights) {
            let q = center + off;
            let fq = f.density(&q);
            if fq == 0.0 {
                continue;
            }
            m.0 += w * fq;
            m.1 += w * fq * energy(&q);
            m.2 += q * (w * fq);
            m.3 += w * fq * fq.ln().abs();
        }
        m
    };
    let coarse = eval(&build_spherical(&sph));
    let fine = eval(&build_spherical(&sph.refined()));
    Ok(Moments {
        mass: fine.0,
        energy: fine.1,
        momentum: [fine.2.x, fine.2.y, fine.2.z],
        entropy_abs: fine.3,
        err_mass: (fine.0 - coarse.0).abs(),
    })
}
