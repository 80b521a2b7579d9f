//! Lorentz boosts, kinetic distances, cylinders, and boost-matrix algebra.
//!
//! Phase space is 1+3+3 dimensional: a point carries time, position and
//! momentum. The frame-shift product recenters phase space around a base
//! point; unlike its Galilean counterpart it is not associative, but it has
//! a two-sided inverse and leaves the kinetic distance invariant.

use crate::error::{Error, Result};
use crate::rng::SampleRng;
use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::Serialize;

pub type Vec3 = Vector3<f64>;

/// Particle energy sqrt(1 + |p|^2), with c = m = 1.
pub fn energy(p: &Vec3) -> f64 {
    (1.0 + p.norm_squared()).sqrt()
}

/// Checked energy: rejects non-finite momenta.
pub fn energy_checked(p: &Vec3) -> Result<f64> {
    if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
        return Err(Error::domain("momentum has non-finite component"));
    }
    Ok(energy(p))
}

/// Momentum to velocity, p / <p>. Always lands in the open unit ball: for
/// |p| beyond ~9.5e7 the quotient saturates to 1 in double precision and is
/// nudged back inside.
pub fn mom_to_vel(p: &Vec3) -> Vec3 {
    let v = p / energy(p);
    let n = v.norm();
    if n >= 1.0 {
        v * ((1.0 - f64::EPSILON) / n)
    } else {
        v
    }
}

/// Velocity to momentum, v / sqrt(1 - |v|^2). Requires |v| < 1.
pub fn vel_to_mom(v: &Vec3) -> Result<Vec3> {
    let n2 = v.norm_squared();
    if n2 >= 1.0 {
        return Err(Error::domain(format!("|v| = {} >= 1", n2.sqrt())));
    }
    Ok(v / (1.0 - n2).sqrt())
}

/// Split `w` into (parallel, perpendicular) components along `axis`.
/// The degenerate axis = 0 returns (0, w), the continuous limit used by the
/// boost formulas.
pub fn split_along(w: &Vec3, axis: &Vec3) -> (Vec3, Vec3) {
    let n = axis.norm();
    if n < 1e-300 {
        return (Vec3::zeros(), *w);
    }
    let hat = axis / n;
    let par = hat * w.dot(&hat);
    (par, w - par)
}

/// A point z = (t, x, p) of kinetic phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub t: f64,
    pub x: Vec3,
    pub p: Vec3,
}

impl PhasePoint {
    pub fn new(t: f64, x: Vec3, p: Vec3) -> Self {
        PhasePoint { t, x, p }
    }

    pub fn origin() -> Self {
        PhasePoint::new(0.0, Vec3::zeros(), Vec3::zeros())
    }

    pub fn energy(&self) -> f64 {
        energy(&self.p)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.x.iter().all(|c| c.is_finite())
            && self.p.iter().all(|c| c.is_finite())
    }

    /// Kinetic norm |t|^{1/2} + |x|^{1/3} + |p|.
    pub fn kinetic_norm(&self) -> f64 {
        self.t.abs().sqrt() + self.x.norm().cbrt() + self.p.norm()
    }
}

/// Forward frame shift recentering around `z0`.
pub fn boost_forward(z0: &PhasePoint, z: &PhasePoint) -> PhasePoint {
    let g0 = z0.energy();
    let (xpar, xperp) = split_along(&z.x, &z0.p);
    let (ppar, pperp) = split_along(&z.p, &z0.p);
    PhasePoint {
        t: z0.t + z.t * g0 + z0.p.dot(&z.x),
        x: z0.x + xperp + xpar * g0 + z0.p * z.t,
        p: pperp + ppar * g0 + z0.p * z.energy(),
    }
}

/// Inverse frame shift: `boost_forward(z0, boost_inverse(z0, z)) == z`.
pub fn boost_inverse(z0: &PhasePoint, z: &PhasePoint) -> PhasePoint {
    let g0 = z0.energy();
    let dt = z.t - z0.t;
    let dx = z.x - z0.x;
    let (xpar, xperp) = split_along(&dx, &z0.p);
    let (ppar, pperp) = split_along(&z.p, &z0.p);
    PhasePoint {
        t: g0 * dt - z0.p.dot(&dx),
        x: xperp + xpar * g0 - z0.p * dt,
        p: pperp + ppar * g0 - z0.p * z.energy(),
    }
}

/// Galilean shift, with the third slot read as a velocity.
pub fn galilean_forward(z0: &PhasePoint, z: &PhasePoint) -> PhasePoint {
    PhasePoint {
        t: z0.t + z.t,
        x: z0.x + z.x + z0.p * z.t,
        p: z0.p + z.p,
    }
}

/// Inverse Galilean shift.
pub fn galilean_inverse(z0: &PhasePoint, z: &PhasePoint) -> PhasePoint {
    let dt = z.t - z0.t;
    PhasePoint {
        t: dt,
        x: z.x - z0.x - z0.p * dt,
        p: z.p - z0.p,
    }
}

/// Relativistic kinetic distance, evaluated in the second argument's frame.
/// Not symmetric; no triangle inequality is claimed.
pub fn dist_lorentz(z1: &PhasePoint, z2: &PhasePoint) -> f64 {
    boost_inverse(z2, z1).kinetic_norm()
}

/// Galilean kinetic distance with the third slot read as a velocity.
pub fn dist_galilean(z1: &PhasePoint, z2: &PhasePoint) -> f64 {
    galilean_inverse(z2, z1).kinetic_norm()
}

/// 4x4 boost matrix with block structure [<p>, -p; -p, M(p)].
#[derive(Debug, Clone, Copy)]
pub struct BoostMatrix4 {
    pub entries: Matrix4<f64>,
}

/// Spatial block I + (<p> - 1) phat (x) phat; the identity at p = 0
/// (removable limit).
pub fn m_matrix(p: &Vec3) -> Matrix3<f64> {
    let n2 = p.norm_squared();
    if n2 < 1e-300 {
        return Matrix3::identity();
    }
    let g = (1.0 + n2).sqrt();
    Matrix3::identity() + (p * p.transpose()) * ((g - 1.0) / n2)
}

pub fn boost_matrix(p: &Vec3) -> BoostMatrix4 {
    let g = energy(p);
    let m = m_matrix(p);
    let mut e = Matrix4::zeros();
    e[(0, 0)] = g;
    for i in 0..3 {
        e[(0, i + 1)] = -p[i];
        e[(i + 1, 0)] = -p[i];
        for j in 0..3 {
            e[(i + 1, j + 1)] = m[(i, j)];
        }
    }
    BoostMatrix4 { entries: e }
}

/// Rotation extracted from a product of boost matrices, with the residual of
/// the block structure. The lower-right block is read off directly and its
/// orthogonality verified, not enforced.
#[derive(Debug, Clone)]
pub struct BoostDecomposition {
    pub rotation: Matrix3<f64>,
    pub residual_norm: f64,
}

impl BoostDecomposition {
    pub fn orthogonality_defect(&self) -> f64 {
        (self.rotation.transpose() * self.rotation - Matrix3::identity()).norm()
    }

    pub fn det_defect(&self) -> f64 {
        (self.rotation.determinant() - 1.0).abs()
    }
}

/// Decompose L(pbar2) L(p0) L(-p2) into diag(1, R). Here pbar2 is the
/// momentum slot of the inverse shift of (0,0,p2) by (0,0,p0).
pub fn boost_product_decompose(p0: &Vec3, p2: &Vec3) -> BoostDecomposition {
    let z0 = PhasePoint::new(0.0, Vec3::zeros(), *p0);
    let z2 = PhasePoint::new(0.0, Vec3::zeros(), *p2);
    let pbar2 = boost_inverse(&z0, &z2).p;
    let t = boost_matrix(&pbar2).entries * boost_matrix(p0).entries * boost_matrix(&(-p2)).entries;
    let mut rotation = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            rotation[(i, j)] = t[(i + 1, j + 1)];
        }
    }
    let mut structured = Matrix4::zeros();
    structured[(0, 0)] = 1.0;
    for i in 0..3 {
        for j in 0..3 {
            structured[(i + 1, j + 1)] = rotation[(i, j)];
        }
    }
    BoostDecomposition {
        rotation,
        residual_norm: (t - structured).norm(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CylinderKind {
    /// Galilean kinetic cylinder; the center's third slot is a velocity.
    Kinetic,
    /// Boost-adapted cylinder in momentum variables.
    Relativistic,
    /// Galilean cylinder pushed forward through the velocity-to-momentum map.
    Transformed,
}

/// A backward-in-time cylinder of radius r around a center point.
#[derive(Debug, Clone, Copy)]
pub struct CylinderSpec {
    pub center: PhasePoint,
    pub radius: f64,
    pub kind: CylinderKind,
}

impl CylinderSpec {
    pub fn new(center: PhasePoint, radius: f64, kind: CylinderKind) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::domain("cylinder radius must be positive"));
        }
        Ok(CylinderSpec {
            center,
            radius,
            kind,
        })
    }
}

/// Membership test. Time interval is half-open: -r^2 < (shifted t) <= 0.
pub fn cylinder_contains(spec: &CylinderSpec, z: &PhasePoint) -> bool {
    let r = spec.radius;
    let z0 = &spec.center;
    match spec.kind {
        CylinderKind::Kinetic => {
            let dt = z.t - z0.t;
            -r * r < dt
                && dt <= 0.0
                && (z.x - z0.x - z0.p * dt).norm() < r * r * r
                && (z.p - z0.p).norm() < r
        }
        CylinderKind::Relativistic => {
            let w = boost_inverse(z0, z);
            -r * r < w.t && w.t <= 0.0 && w.x.norm() < r * r * r && w.p.norm() < r
        }
        CylinderKind::Transformed => {
            let v0 = mom_to_vel(&z0.p);
            let dt = z.t - z0.t;
            -r * r < dt
                && dt <= 0.0
                && (z.x - z0.x - v0 * dt).norm() < r * r * r
                && (mom_to_vel(&z.p) - v0).norm() < r
        }
    }
}

/// Worst sampled constants for the metric-comparison inequalities.
#[derive(Debug, Clone, Serialize)]
pub struct MetricComparisonReport {
    pub samples: usize,
    pub skipped_degenerate: usize,
    /// sup d_G / (d_L + <p0>^{1/2} d_L^{3/2})
    pub lorentz_controls_galilean: f64,
    /// sup d_L / (<p0><p> d_G + <p0>^{1/2} d_G^{3/2})
    pub galilean_controls_lorentz: f64,
    /// sup d_E / (<p0>^2 (d_L + d_L^3))
    pub euclidean_vs_lorentz: f64,
}

/// Sample random point pairs and report the worst ratio for each of the
/// three metric-comparison inequalities. Degenerate pairs (zero denominator)
/// are skipped and counted.
pub fn metric_comparison_report(
    sample_count: usize,
    momentum_cap: f64,
    rng: &mut SampleRng,
) -> Result<MetricComparisonReport> {
    if sample_count < 1 {
        return Err(Error::domain("sample_count must be >= 1"));
    }
    let mut report = MetricComparisonReport {
        samples: sample_count,
        skipped_degenerate: 0,
        lorentz_controls_galilean: 0.0,
        galilean_controls_lorentz: 0.0,
        euclidean_vs_lorentz: 0.0,
    };
    for _ in 0..sample_count {
        let z1 = PhasePoint::new(
            rng.uniform_in(-1.0, 1.0),
            rng.vector_in_cube(1.0),
            rng.vector_in_ball(momentum_cap),
        );
        let z0 = PhasePoint::new(
            rng.uniform_in(-1.0, 1.0),
            rng.vector_in_cube(1.0),
            rng.vector_in_ball(momentum_cap),
        );
        let dl = dist_lorentz(&z1, &z0);
        if dl < 1e-12 {
            report.skipped_degenerate += 1;
            continue;
        }
        let g0 = z0.energy();
        let g1 = z1.energy();
        let z1v = PhasePoint::new(z1.t, z1.x, mom_to_vel(&z1.p));
        let z0v = PhasePoint::new(z0.t, z0.x, mom_to_vel(&z0.p));
        let dg = dist_galilean(&z1v, &z0v);
        if dg < 1e-12 {
            report.skipped_degenerate += 1;
            continue;
        }
        let de = (z1.t - z0.t).abs() + (z1.x - z0.x).norm() + (z1.p - z0.p).norm();

        let r1 = dg / (dl + g0.sqrt() * dl.powf(1.5));
        let r2 = dl / (g0 * g1 * dg + g0.sqrt() * dg.powf(1.5));
        let r3 = de / (g0 * g0 * (dl + dl * dl * dl));
        report.lorentz_controls_galilean = report.lorentz_controls_galilean.max(r1);
        report.galilean_controls_lorentz = report.galilean_controls_lorentz.max(r2);
        report.euclidean_vs_lorentz = report.euclidean_vs_lorentz.max(r3);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rand_point(rng: &mut SampleRng, pcap: f64) -> PhasePoint {
        PhasePoint::new(
            rng.uniform_in(-2.0, 2.0),
            rng.vector_in_cube(3.0),
            rng.vector_in_ball(pcap),
        )
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy(&Vec3::zeros()), 1.0);
        assert_relative_eq!(energy(&Vec3::new(1.0, 0.0, 0.0)), 2.0_f64.sqrt());
        assert_relative_eq!(energy(&Vec3::new(3.0, 4.0, 0.0)), 26.0_f64.sqrt());
        assert!(energy_checked(&Vec3::new(f64::NAN, 0.0, 0.0)).is_err());
    }

    #[test]
    fn velocity_map_examples() {
        assert_eq!(mom_to_vel(&Vec3::zeros()), Vec3::zeros());
        let p = Vec3::new(0.3, -1.2, 5.0);
        let back = vel_to_mom(&mom_to_vel(&p)).unwrap();
        assert_relative_eq!(back, p, max_relative = 1e-12);
        let v = mom_to_vel(&Vec3::new(0.0, 0.0, 3.0_f64.sqrt()));
        assert_relative_eq!(v.z, 3.0_f64.sqrt() / 2.0, max_relative = 1e-14);
        assert!(vel_to_mom(&Vec3::new(1.0, 0.0, 0.0)).is_err());
        // |v| < 1 for huge momenta
        assert!(mom_to_vel(&Vec3::new(1e8, 0.0, 0.0)).norm() < 1.0);
    }

    #[test]
    fn boost_forward_examples() {
        let z0 = rand_point(&mut SampleRng::new(1), 5.0);
        let id = boost_forward(&z0, &PhasePoint::origin());
        assert_relative_eq!(id.t, z0.t, max_relative = 1e-14);
        assert_relative_eq!(id.x, z0.x, max_relative = 1e-14);
        assert_relative_eq!(id.p, z0.p, max_relative = 1e-14);

        // p0 = 0 reduces to a plain translation
        let z0 = PhasePoint::new(1.5, Vec3::new(1.0, 2.0, 3.0), Vec3::zeros());
        let z = PhasePoint::new(0.5, Vec3::new(-1.0, 0.0, 1.0), Vec3::new(0.1, 0.2, 0.3));
        let w = boost_forward(&z0, &z);
        assert_eq!(w.t, 2.0);
        assert_eq!(w.x, Vec3::new(0.0, 2.0, 4.0));
        assert_eq!(w.p, z.p);

        // direct substitution with <p0> = sqrt(2)
        let z0 = PhasePoint::new(0.0, Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0));
        let z = PhasePoint::new(1.0, Vec3::zeros(), Vec3::zeros());
        let w = boost_forward(&z0, &z);
        assert_relative_eq!(w.t, 2.0_f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(w.x, Vec3::new(1.0, 0.0, 0.0), max_relative = 1e-15);
        assert_relative_eq!(w.p, Vec3::new(1.0, 0.0, 0.0), max_relative = 1e-15);
    }

    #[test]
    fn boost_inverse_examples() {
        let mut rng = SampleRng::new(2);
        let z0 = rand_point(&mut rng, 5.0);
        let w = boost_inverse(&z0, &z0);
        assert!(w.t.abs() < 1e-12 && w.x.norm() < 1e-12 && w.p.norm() < 1e-12);

        // Galilean limit at p0 = 0
        let z0 = PhasePoint::new(1.0, Vec3::new(0.5, 0.0, 0.0), Vec3::zeros());
        let z = rand_point(&mut rng, 3.0);
        let w = boost_inverse(&z0, &z);
        assert_relative_eq!(w.t, z.t - z0.t, max_relative = 1e-14);
        assert_relative_eq!(w.x, z.x - z0.x, max_relative = 1e-14);
        assert_eq!(w.p, z.p);
    }

    #[test]
    fn boost_roundtrip_many() {
        let mut rng = SampleRng::new(3);
        let mut worst = 0.0_f64;
        for _ in 0..10_000 {
            let z0 = rand_point(&mut rng, 10.0);
            let z = rand_point(&mut rng, 10.0);
            let back = boost_forward(&z0, &boost_inverse(&z0, &z));
            let scale = 1.0 + z.t.abs() + z.x.norm() + z.p.norm();
            let err = ((back.t - z.t).abs() + (back.x - z.x).norm() + (back.p - z.p).norm()) / scale;
            worst = worst.max(err);
        }
        assert!(worst <= 1e-10, "roundtrip residual {worst}");
    }

    #[test]
    fn energy_identity_under_inverse_boost() {
        // <(z0^-1 o z)_p> = <p0><p> - p0.p
        let mut rng = SampleRng::new(4);
        for _ in 0..200 {
            let z0 = rand_point(&mut rng, 8.0);
            let z = rand_point(&mut rng, 8.0);
            let w = boost_inverse(&z0, &z);
            let expect = z0.energy() * z.energy() - z0.p.dot(&z.p);
            assert_relative_eq!(w.energy(), expect, max_relative = 1e-11);
        }
    }

    #[test]
    fn boost_matrix_properties() {
        let mut rng = SampleRng::new(5);
        assert_eq!(boost_matrix(&Vec3::zeros()).entries, Matrix4::identity());

        let p = Vec3::new(2.0, -1.0, 0.5);
        let mp = m_matrix(&p) * p;
        assert_relative_eq!(mp, p * energy(&p), max_relative = 1e-14);

        for _ in 0..100 {
            let p = rng.vector_in_ball(20.0);
            let l = boost_matrix(&p).entries;
            let linv = boost_matrix(&(-p)).entries;
            assert!((l * linv - Matrix4::identity()).norm() < 1e-10 * (1.0 + l.norm()));
            assert!((l.determinant() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn boost_product_rotation() {
        let mut rng = SampleRng::new(6);
        // p0 = 0: exact identity
        let d = boost_product_decompose(&Vec3::zeros(), &Vec3::new(1.0, 2.0, 0.0));
        assert!(d.residual_norm < 1e-12);
        assert!((d.rotation - Matrix3::identity()).norm() < 1e-12);

        // collinear boosts compose to a boost
        let d = boost_product_decompose(&Vec3::new(0.0, 3.0, 0.0), &Vec3::new(0.0, -1.5, 0.0));
        assert!((d.rotation - Matrix3::identity()).norm() < 1e-10);

        for _ in 0..500 {
            let p0 = rng.vector_in_ball(5.0);
            let p2 = rng.vector_in_ball(5.0);
            let d = boost_product_decompose(&p0, &p2);
            assert!(d.residual_norm <= 1e-10, "residual {}", d.residual_norm);
            assert!(d.orthogonality_defect() <= 1e-10);
            assert!(d.det_defect() <= 1e-10);
        }
    }

    #[test]
    fn distance_examples() {
        let mut rng = SampleRng::new(7);
        let z = rand_point(&mut rng, 5.0);
        assert!(dist_lorentz(&z, &z) < 1e-10);

        let z = PhasePoint::new(-0.7, Vec3::new(2.0, 0.0, 1.0), Vec3::new(0.0, 1.0, 0.0));
        let d = dist_lorentz(&z, &PhasePoint::origin());
        assert_relative_eq!(d, z.kinetic_norm(), max_relative = 1e-14);
    }

    #[test]
    fn left_invariance_sampled() {
        let mut rng = SampleRng::new(8);
        for _ in 0..10_000 {
            let z0 = rand_point(&mut rng, 6.0);
            let z1 = rand_point(&mut rng, 6.0);
            let z2 = rand_point(&mut rng, 6.0);
            let d = dist_lorentz(&z1, &z2);
            let ds = dist_lorentz(&boost_inverse(&z0, &z1), &boost_inverse(&z0, &z2));
            assert!(
                (d - ds).abs() <= 1e-9 * (1.0 + d),
                "invariance defect {} at d = {}",
                (d - ds).abs(),
                d
            );
        }
    }

    #[test]
    fn group_like_identities() {
        let mut rng = SampleRng::new(9);
        for _ in 0..2000 {
            let z0 = rand_point(&mut rng, 10.0);
            let z = rand_point(&mut rng, 10.0);
            let back = boost_forward(&z0, &boost_inverse(&z0, &z));
            let scale = 1.0 + z.t.abs() + z.x.norm() + z.p.norm();
            assert!(
                (back.t - z.t).abs() + (back.x - z.x).norm() + (back.p - z.p).norm()
                    <= 1e-10 * scale
            );
            let w = boost_forward(&z, &PhasePoint::origin());
            assert!((w.t - z.t).abs() + (w.x - z.x).norm() + (w.p - z.p).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn product_is_not_associative() {
        let mut rng = SampleRng::new(10);
        let mut worst = 0.0_f64;
        for _ in 0..100 {
            let a = rand_point(&mut rng, 3.0);
            let b = rand_point(&mut rng, 3.0);
            let c = rand_point(&mut rng, 3.0);
            let lhs = boost_forward(&boost_forward(&a, &b), &c);
            let rhs = boost_forward(&a, &boost_forward(&b, &c));
            worst = worst
                .max((lhs.t - rhs.t).abs() + (lhs.x - rhs.x).norm() + (lhs.p - rhs.p).norm());
        }
        assert!(worst > 1e-6, "product unexpectedly associative");
    }

    #[test]
    fn perp_parallel_inequalities() {
        let mut rng = SampleRng::new(11);
        for _ in 0..5000 {
            let u = rng.vector_in_cube(5.0);
            let w = rng.vector_in_cube(5.0);
            let c = rng.uniform_in(1.0, 10.0);
            let (upar, uperp) = split_along(&u, &w);
            let lhs1 = (uperp + upar * c + w).norm();
            let rhs1 = (u * c + w).norm();
            assert!(lhs1 <= rhs1 + 1e-12 * (1.0 + rhs1));
            let lhs2 = (uperp + upar + w).norm();
            let rhs2 = (uperp + (upar + w) * c).norm();
            assert!(lhs2 <= rhs2 + 1e-12 * (1.0 + rhs2));
        }
    }

    #[test]
    fn newtonian_limit() {
        let mut rng = SampleRng::new(12);
        for _ in 0..2000 {
            let mut p0 = rng.vector_in_ball(1.0) * 1e-6;
            if p0.norm() > 1e-6 {
                p0 *= 1e-6 / p0.norm();
            }
            let z0 = PhasePoint::new(
                rng.uniform_in(-2.0, 2.0),
                rng.vector_in_cube(3.0),
                p0,
            );
            let z = rand_point(&mut rng, 5.0);
            let v0 = mom_to_vel(&z0.p);
            let zg = PhasePoint::new(z0.t, z0.x, v0);
            let lor = boost_forward(&z0, &z);
            let gal = galilean_forward(&zg, &z);
            let diff = (lor.t - gal.t).abs() + (lor.x - gal.x).norm() + (lor.p - gal.p).norm();
            let scale = 1.0 + z.t.abs() + z.x.norm() + z.p.norm();
            assert!(diff <= 1e-5 * scale, "newtonian gap {diff}");
        }
    }

    #[test]
    fn cylinder_membership() {
        let mut rng = SampleRng::new(13);
        let z0 = rand_point(&mut rng, 5.0);
        for kind in [
            CylinderKind::Kinetic,
            CylinderKind::Relativistic,
            CylinderKind::Transformed,
        ] {
            let spec = CylinderSpec::new(z0, 0.5, kind).unwrap();
            assert!(cylinder_contains(&spec, &z0), "center not in {kind:?}");
        }
        // future time excluded at p0 = 0
        let z0 = PhasePoint::origin();
        let spec = CylinderSpec::new(z0, 1.0, CylinderKind::Relativistic).unwrap();
        let future = PhasePoint::new(1e-6, Vec3::zeros(), Vec3::zeros());
        assert!(!cylinder_contains(&spec, &future));
        assert!(CylinderSpec::new(z0, 0.0, CylinderKind::Kinetic).is_err());
    }

    #[test]
    fn cylinder_recentering_equivalence() {
        let mut rng = SampleRng::new(14);
        for _ in 0..10_000 {
            let z0 = rand_point(&mut rng, 5.0);
            let r = rng.uniform_in(0.2, 1.5);
            // sample z near the origin cylinder so both branches get exercised
            let z = PhasePoint::new(
                rng.uniform_in(-1.2 * r * r, 0.2 * r * r),
                rng.vector_in_cube(1.2 * r * r * r),
                rng.vector_in_ball(1.2 * r),
            );
            let origin_spec =
                CylinderSpec::new(PhasePoint::origin(), r, CylinderKind::Kinetic).unwrap();
            let rel_spec = CylinderSpec::new(z0, r, CylinderKind::Relativistic).unwrap();
            let in_origin = cylinder_contains(&origin_spec, &z);
            let in_rel = cylinder_contains(&rel_spec, &boost_forward(&z0, &z));
            assert_eq!(in_origin, in_rel, "recentering mismatch at r = {r}");
        }
    }

    #[test]
    fn metric_report_runs() {
        let mut rng = SampleRng::new(15);
        let rep = metric_comparison_report(20_000, 20.0, &mut rng).unwrap();
        assert!(rep.lorentz_controls_galilean.is_finite());
        assert!(rep.galilean_controls_lorentz.is_finite());
        assert!(rep.euclidean_vs_lorentz.is_finite());

        // p0 = 0, pure momentum offset: euclidean ratio bounded by 1
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let p = rng.vector_in_ball(10.0);
            if p.norm() < 1e-9 {
                continue;
            }
            let z1 = PhasePoint::new(0.0, Vec3::zeros(), p);
            let z0 = PhasePoint::origin();
            let dl = dist_lorentz(&z1, &z0);
            let de = p.norm();
            worst = worst.max(de / (dl + dl * dl * dl));
        }
        assert!(worst <= 1.0 + 1e-12);
    }
}
