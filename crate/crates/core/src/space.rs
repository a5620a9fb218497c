//! The parabolic quasi-metric measure space `N = R x R^n` and its half-space
//! `X = (0, inf) x R^n`.
//!
//! Distances follow the heat scaling `t ~ |x|^2`:
//! `d(t,x; s,y) = max(|x - y|, |t - s|^(1/2))`. A ball of radius `r` is the
//! product `(t0 - r^2, t0 + r^2) x B(x0, r)`, so in the Euclidean model its
//! measure is exactly `2 r^2 * omega_n r^n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Volume of the Euclidean unit ball in `R^n` (`n` is 1 or 2 here).
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => std::f64::consts::PI,
        // general formula, kept so callers never see a panic
        _ => {
            let half = n as f64 / 2.0;
            std::f64::consts::PI.powf(half) / libm::tgamma(half + 1.0)
        }
    }
}

/// Which spatial domain the half-space is built over.
///
/// `HalfLine` is the `n = 1` domain `Omega = (0, inf)` used for the
/// Dirichlet/Neumann image kernels; `X` is then `(0, inf) x (0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialDomain {
    #[default]
    Whole,
    HalfLine,
}

impl SpatialDomain {
    pub fn contains(self, x: &[f64]) -> bool {
        match self {
            SpatialDomain::Whole => true,
            SpatialDomain::HalfLine => x[0] > 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacePoint {
    pub t: f64,
    pub x: Vec<f64>,
}

impl SpacePoint {
    pub fn new(t: f64, x: impl Into<Vec<f64>>) -> Self {
        SpacePoint { t, x: x.into() }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Membership in `X = (0, inf) x domain`.
    pub fn in_half_space(&self, domain: SpatialDomain) -> bool {
        self.t > 0.0 && domain.contains(&self.x)
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}

/// Parabolic quasi-distance `max(|x - y|, |t - s|^(1/2))`.
pub fn parabolic_distance(p: &SpacePoint, q: &SpacePoint) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    Ok(euclid(&p.x, &q.x).max((p.t - q.t).abs().sqrt()))
}

/// Open parabolic ball `{(t,x) : |x - x0| < r, |t - t0| < r^2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicBall {
    pub center: SpacePoint,
    pub radius: f64,
}

impl ParabolicBall {
    pub fn new(center: SpacePoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::NonPositiveRadius(radius));
        }
        let n = center.dim();
        if n == 0 || n > 2 {
            return Err(Error::UnsupportedDimension(n));
        }
        if !center.t.is_finite() || center.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite ball center".into()));
        }
        Ok(ParabolicBall { center, radius })
    }

    /// Convenience constructor for `n = 1`.
    pub fn new_1d(t0: f64, x0: f64, radius: f64) -> Result<Self> {
        Self::new(SpacePoint::new(t0, vec![x0]), radius)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn t0(&self) -> f64 {
        self.center.t
    }

    /// Time interval `(t0 - r^2, t0 + r^2)`.
    pub fn time_interval(&self) -> (f64, f64) {
        let r2 = self.radius * self.radius;
        (self.center.t - r2, self.center.t + r2)
    }

    /// `nu(Q) = 2 r^2 * omega_n r^n`.
    pub fn volume(&self) -> f64 {
        let n = self.dim();
        2.0 * self.radius.powi(2) * unit_ball_volume(n) * self.radius.powi(n as i32)
    }

    /// Exact measure of `Q ∩ X` over the whole spatial space.
    pub fn truncated_volume(&self) -> f64 {
        self.truncated_volume_in(SpatialDomain::Whole)
    }

    /// Exact measure of `Q ∩ ((0, inf) x domain)`.
    pub fn truncated_volume_in(&self, domain: SpatialDomain) -> f64 {
        let (lo, hi) = self.time_interval();
        let dt = (hi - lo.max(0.0)).max(0.0);
        dt * self.spatial_measure_in(domain)
    }

    /// Measure of the spatial ball `B(x0, r) ∩ domain`.
    pub fn spatial_measure_in(&self, domain: SpatialDomain) -> f64 {
        let n = self.dim();
        match domain {
            SpatialDomain::Whole => unit_ball_volume(n) * self.radius.powi(n as i32),
            SpatialDomain::HalfLine => {
                let x0 = self.center.x[0];
                ((x0 + self.radius) - (x0 - self.radius).max(0.0)).max(0.0)
            }
        }
    }

    pub fn dilate(&self, theta: f64) -> ParabolicBall {
        ParabolicBall {
            center: self.center.clone(),
            radius: self.radius * theta,
        }
    }

    /// `theta Q ⊆ X` iff `t0 - (theta r)^2 >= 0` (the closed case counts as inside).
    pub fn scaled_inside_x(&self, theta: f64) -> bool {
        let rr = theta * self.radius;
        self.center.t - rr * rr >= 0.0
    }

    /// Flags `(2Q ⊆ X, 4Q ⊆ X)`.
    pub fn contains_scaled(&self) -> (bool, bool) {
        (self.scaled_inside_x(2.0), self.scaled_inside_x(4.0))
    }

    pub fn contains(&self, p: &SpacePoint) -> bool {
        let r = self.radius;
        (p.t - self.center.t).abs() < r * r && euclid(&p.x, &self.center.x) < r
    }

    /// Membership for raw coordinates, avoiding a `SpacePoint` allocation.
    pub fn contains_coords(&self, t: f64, x: &[f64]) -> bool {
        let r = self.radius;
        (t - self.center.t).abs() < r * r && euclid(x, &self.center.x) < r
    }

    /// Membership in the annulus `B_j(Q)`: `4Q ∩ X` for `j = 1`,
    /// `(2^{j+1}Q \ 2^j Q) ∩ X` for `j >= 2`.
    pub fn annulus_contains(&self, j: u32, p: &SpacePoint) -> bool {
        self.annulus_contains_in(j, p.t, &p.x, SpatialDomain::Whole)
    }

    pub fn annulus_contains_in(&self, j: u32, t: f64, x: &[f64], domain: SpatialDomain) -> bool {
        if j == 0 || !(t > 0.0) || !domain.contains(x) {
            return false;
        }
        let outer = self.dilate(2f64.powi(j as i32 + 1));
        if !outer.contains_coords(t, x) {
            return false;
        }
        if j == 1 {
            return true;
        }
        !self.dilate(2f64.powi(j as i32)).contains_coords(t, x)
    }

    /// Exact measure of `B_j(Q)`.
    pub fn annulus_volume_in(&self, j: u32, domain: SpatialDomain) -> f64 {
        assert!(j >= 1, "annulus index starts at 1");
        let outer = self
            .dilate(2f64.powi(j as i32 + 1))
            .truncated_volume_in(domain);
        if j == 1 {
            outer
        } else {
            outer - self.dilate(2f64.powi(j as i32)).truncated_volume_in(domain)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p1(t: f64, x: f64) -> SpacePoint {
        SpacePoint::new(t, vec![x])
    }

    #[test]
    fn distance_examples() {
        assert_eq!(parabolic_distance(&p1(0.0, 0.0), &p1(0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(parabolic_distance(&p1(1.0, 0.0), &p1(0.0, 0.0)).unwrap(), 1.0);
        let a = SpacePoint::new(0.0, vec![3.0, 4.0]);
        let b = SpacePoint::new(0.0, vec![0.0, 0.0]);
        assert_eq!(parabolic_distance(&a, &b).unwrap(), 5.0);
        assert!(parabolic_distance(&a, &p1(0.0, 0.0)).is_err());
    }

    #[test]
    fn volumes() {
        assert_eq!(ParabolicBall::new_1d(0.0, 0.0, 1.0).unwrap().volume(), 4.0);
        assert_eq!(ParabolicBall::new_1d(0.0, 0.0, 2.0).unwrap().volume(), 32.0);
        let q2 = ParabolicBall::new(SpacePoint::new(0.0, vec![0.0, 0.0]), 2.0).unwrap();
        assert_relative_eq!(q2.volume(), 32.0 * std::f64::consts::PI, max_relative = 1e-15);
        assert!(ParabolicBall::new_1d(0.0, 0.0, 0.0).is_err());
        assert!(ParabolicBall::new_1d(0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn truncated_volumes() {
        assert_eq!(ParabolicBall::new_1d(4.0, 0.0, 1.0).unwrap().truncated_volume(), 4.0);
        assert_eq!(ParabolicBall::new_1d(0.0, 0.0, 1.0).unwrap().truncated_volume(), 2.0);
        assert_eq!(ParabolicBall::new_1d(-2.0, 0.0, 1.0).unwrap().truncated_volume(), 0.0);
        // half-line: spatial interval (-0.5, 1.5) clipped to (0, 1.5)
        let q = ParabolicBall::new_1d(4.0, 0.5, 1.0).unwrap();
        assert_eq!(q.truncated_volume_in(SpatialDomain::HalfLine), 2.0 * 1.5);
    }

    #[test]
    fn dilation_flags() {
        let q = ParabolicBall::new_1d(17.0, 0.0, 1.0).unwrap();
        assert!(q.contains_scaled().1);
        let q = ParabolicBall::new_1d(5.0, 0.0, 1.0).unwrap();
        assert_eq!(q.contains_scaled(), (true, false));
        let q = ParabolicBall::new_1d(1.0, 0.0, 1.0).unwrap();
        assert!(!q.contains_scaled().0);
        // critical case t0 = 16 r^2 counts as inside
        let q = ParabolicBall::new_1d(16.0, 0.0, 1.0).unwrap();
        assert!(q.contains_scaled().1);
        assert_eq!(q.dilate(3.0).radius, 3.0);
    }

    #[test]
    fn annulus_examples() {
        let q = ParabolicBall::new_1d(100.0, 0.0, 1.0).unwrap();
        assert!(q.annulus_contains(1, &q.center));
        // distance 3r < 4r: in B_1, not in B_2
        let p = p1(100.0, 3.0);
        assert!(q.annulus_contains(1, &p));
        assert!(!q.annulus_contains(2, &p));
        let p = p1(100.0, 5.0);
        assert!(q.annulus_contains(2, &p));
        // clipped by X
        let q0 = ParabolicBall::new_1d(1.0, 0.0, 1.0).unwrap();
        let below = p1(-0.5, 0.0);
        assert!((1..10).all(|j| !q0.annulus_contains(j, &below)));
    }

    fn arb_point() -> impl Strategy<Value = SpacePoint> {
        (-50.0..50.0f64, -20.0..20.0f64, -20.0..20.0f64)
            .prop_map(|(t, a, b)| SpacePoint::new(t, vec![a, b]))
    }

    proptest! {
        #[test]
        fn triangle_inequality(p in arb_point(), q in arb_point(), r in arb_point()) {
            let pr = parabolic_distance(&p, &r).unwrap();
            let pq = parabolic_distance(&p, &q).unwrap();
            let qr = parabolic_distance(&q, &r).unwrap();
            prop_assert!(pr <= pq + qr + 1e-12);
            prop_assert!((pq - parabolic_distance(&q, &p).unwrap()).abs() == 0.0);
        }

        #[test]
        fn exact_doubling(r in 0.01..10.0f64, theta in 0.01..50.0f64, n in 1usize..3) {
            let q = ParabolicBall::new(SpacePoint::new(0.0, vec![0.0; n]), r).unwrap();
            let ratio = q.dilate(theta).volume() / q.volume();
            prop_assert!((ratio / theta.powi(n as i32 + 2) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn centered_in_x_keeps_half(t0 in 1e-6..100.0f64, r in 0.01..20.0f64) {
            let q = ParabolicBall::new_1d(t0, 0.3, r).unwrap();
            prop_assert!(q.truncated_volume() >= 0.5 * q.volume() * (1.0 - 1e-12));
        }

        #[test]
        fn annuli_partition(t0 in -10.0..100.0f64, r in 0.1..3.0f64, jmax in 1u32..10) {
            let q = ParabolicBall::new_1d(t0, 0.0, r).unwrap();
            let sum: f64 = (1..=jmax).map(|j| q.annulus_volume_in(j, SpatialDomain::Whole)).sum();
            let whole = q.dilate(2f64.powi(jmax as i32 + 1)).truncated_volume();
            prop_assert!((sum - whole).abs() <= 1e-9 * whole.max(1.0));
        }
    }
}
