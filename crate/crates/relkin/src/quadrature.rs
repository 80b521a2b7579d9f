//! Quadrature rules for the nonlocal coefficient integrals.
//!
//! The workhorse is a spherical product rule centered at the evaluation
//! point: the r^2 Jacobian annihilates the 1/|p-q| kernel singularity
//! exactly, so the radial integrand is smooth up to r = 0. Radial panels are
//! geometrically refined toward the center and extra panel splits can be
//! injected at feature radii (narrow bumps, mollified edges). The polar axis
//! can be aligned with a known feature direction; Gauss-Legendre nodes in
//! cos(theta) cluster quadratically at the poles, which buys angular
//! resolution exactly where an aligned feature sits.

use crate::lorentz::Vec3;
use nalgebra::Matrix3;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((-x, w));
    }
    // mirror to the full set
    for i in (0..n - m).rev() {
        let (x, w) = out[i];
        out.push((-x, w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_legendre(n)
        .into_iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Spherical product rule: offsets from the center and weights including the
/// r^2 Jacobian. Integrates q -> F(q) over the ball of radius `r_max` around
/// the center as sum w_i F(center + offset_i).
#[derive(Debug, Clone)]
pub struct SphericalScheme {
    pub offsets: Vec<Vec3>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SphericalConfig {
    /// Gauss-Legendre nodes per radial panel.
    pub radial_nodes: usize,
    /// Geometric panels between 0 and r_max (halving toward the center).
    pub panel_count: usize,
    /// Gauss-Legendre nodes in cos(theta).
    pub theta_nodes: usize,
    /// Uniform nodes in phi (trapezoid; spectral for periodic integrands).
    pub phi_nodes: usize,
    pub r_max: f64,
    /// Extra radial panel boundaries, e.g. at a feature distance.
    pub extra_radii: Vec<f64>,
    /// Panel splits in u = cos(theta), for integrands concentrated in a
    /// cone around the axis (each u-panel gets the full theta rule).
    pub theta_panels: Vec<f64>,
    /// Polar axis; None keeps e_z.
    pub axis: Option<Vec3>,
}

impl SphericalConfig {
    pub fn new(r_max: f64) -> Self {
        SphericalConfig {
            radial_nodes: 6,
            panel_count: 8,
            theta_nodes: 16,
            phi_nodes: 32,
            r_max,
            extra_radii: Vec::new(),
            theta_panels: Vec::new(),
            axis: None,
        }
    }

    /// Double the angular resolution and add radial panels; used by the
    /// refinement loop.
    pub fn refined(&self) -> Self {
        let mut c = self.clone();
        c.theta_nodes = (c.theta_nodes * 3).div_ceil(2);
        c.phi_nodes = (c.phi_nodes * 3).div_ceil(2);
        c.radial_nodes += 2;
        c.panel_count += 2;
        c
    }
}

fn orthonormal_frame(axis: &Vec3) -> Matrix3<f64> {
    let n = axis.norm();
    if n < 1e-300 {
        return Matrix3::identity();
    }
    let w = axis / n;
    let pick = if w.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = w.cross(&pick).normalize();
    let v = w.cross(&u);
    Matrix3::from_columns(&[u, v, w])
}

pub fn build_spherical(config: &SphericalConfig) -> SphericalScheme {
    // radial panel boundaries: geometric toward 0, plus requested splits
    let mut bounds = vec![0.0, config.r_max];
    let mut r = config.r_max;
    for _ in 1..config.panel_count {
        r *= 0.5;
        bounds.push(r);
    }
    for &x in &config.extra_radii {
        if x > 0.0 && x < config.r_max {
            bounds.push(x);
        }
    }
    bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bounds.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * config.r_max);

    let mut radial = Vec::new();
    for w in bounds.windows(2) {
        radial.extend(gauss_legendre_on(w[0], w[1], config.radial_nodes));
    }

    let frame = orthonormal_frame(&config.axis.unwrap_or_else(Vec3::z));
    // nodes in u = cos(theta), panelized at the requested splits
    let mut u_bounds = vec![-1.0, 1.0];
    for &u in &config.theta_panels {
        if u > -1.0 + 1e-12 && u < 1.0 - 1e-12 {
            u_bounds.push(u);
        }
    }
    u_bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    u_bounds.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut theta = Vec::new();
    for w in u_bounds.windows(2) {
        theta.extend(gauss_legendre_on(w[0], w[1], config.theta_nodes));
    }
    let nphi = config.phi_nodes.max(1);
    let wphi = std::f64::consts::TAU / nphi as f64;

    let mut offsets = Vec::with_capacity(radial.len() * theta.len() * nphi);
    let mut weights = Vec::with_capacity(offsets.capacity());
    for &(rr, wr) in &radial {
        for &(u, wu) in &theta {
            let s = (1.0 - u * u).max(0.0).sqrt();
            for k in 0..nphi {
                let phi = wphi * k as f64;
                let local = Vec3::new(s * phi.cos(), s * phi.sin(), u);
                offsets.push(frame * local * rr);
                weights.push(wr * wu * wphi * rr * rr);
            }
        }
    }
    SphericalScheme { offsets, weights }
}

/// Tensor Gauss-Legendre rule on the cube [-half, half]^3, for smooth
/// rapidly-decaying integrands (test surrogates).
pub fn build_box(half: f64, nodes_per_axis: usize, panels_per_axis: usize) -> SphericalScheme {
    let mut axis = Vec::new();
    let h = 2.0 * half / panels_per_axis as f64;
    for k in 0..panels_per_axis {
        let a = -half + k as f64 * h;
        axis.extend(gauss_legendre_on(a, a + h, nodes_per_axis));
    }
    let mut offsets = Vec::new();
    let mut weights = Vec::new();
    for &(x, wx) in &axis {
        for &(y, wy) in &axis {
            for &(z, wz) in &axis {
                offsets.push(Vec3::new(x, y, z));
                weights.push(wx * wy * wz);
            }
        }
    }
    SphericalScheme { offsets, weights }
}

impl SphericalScheme {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn integrate(&self, center: &Vec3, f: impl Fn(&Vec3) -> f64) -> f64 {
        self.offsets
            .iter()
            .zip(&self.weights)
            .map(|(o, w)| w * f(&(center + o)))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gl_nodes_integrate_polynomials_exactly ()
    {
        for n in [2usize, 5, 8, 16, 32] {
            let rule = gauss_legendre(n);
            let wsum: f64 = rule.iter().map(|(_, w)| w).sum();
            assert_relative_eq!(wsum, 2.0, max_relative = 1e-13);
            // degree 2n-1 monomial
            let d = 2 * n - 1;
            let val: f64 = rule.iter().map(|(x, w)| w * x.powi(d as i32)).sum();
            assert!(val.abs() < 1e-12, "odd monomial not annihilated");
            let d = 2 * n - 2;
            let val: f64 = rule.iter().map(|(x, w)| w * x.powi(d as i32)).sum();
            let exact = 2.0 / (d as f64 + 1.0);
            assert_relative_eq!(val, exact, max_relative = 1e-11);
        }
    }

    #[test]
    fn ball_volume() {
        let scheme = build_spherical(&SphericalConfig::new(2.0));
        let vol = scheme.integrate(&Vec3::zeros(), |_| 1.0);
        assert_relative_eq!(vol, 4.0 / 3.0 * std::f64::consts::PI * 8.0, max_relative = 1e-12);
    }

    #[test]
    fn singular_kernel_integrates() {
        // integral of 1/|q - c| over ball of radius R around c is 2 pi R^2
        let scheme = build_spherical(&SphericalConfig::new(1.5));
        let c = Vec3::new(0.3, -1.0, 0.2);
        let val = scheme.integrate(&c, |q| 1.0 / (q - c).norm());
        assert_relative_eq!(val, std::f64::consts::TAU * 1.5 * 1.5, max_relative = 1e-12);
    }

    #[test]
    fn gaussian_mass_with_axis_alignment() {
        // narrow bump far from the center resolved by aligning the axis
        let center = Vec3::zeros();
        let bump_at = Vec3::new(0.0, 3.0, 0.0);
        let sigma = 0.15;
        let mut cfg = SphericalConfig::new(6.0);
        cfg.theta_nodes = 96;
        cfg.phi_nodes = 32;
        cfg.radial_nodes = 8;
        cfg.extra_radii = vec![3.0 - 3.0 * sigma, 3.0 + 3.0 * sigma];
        cfg.axis = Some(bump_at);
        let scheme = build_spherical(&cfg);
        let val = scheme.integrate(&center, |q| {
            (-(q - bump_at).norm_squared() / (2.0 * sigma * sigma)).exp()
        });
        let exact = (std::f64::consts::TAU * sigma * sigma).powf(1.5);
        assert_relative_eq!(val, exact, max_relative = 1e-4);
    }

    #[test]
    fn box_rule_gaussian() {
        let scheme = build_box(8.0, 12, 4);
        let val = scheme.integrate(&Vec3::zeros(), |q| (-q.norm_squared()).exp());
        assert_relative_eq!(val, std::f64::consts::PI.powf(1.5), max_relative = 1e-8);
    }
}
