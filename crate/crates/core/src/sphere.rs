//! Points and frames on the unit sphere.

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// A unit vector in R^3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint(Vector3<f64>);

impl SpherePoint {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_vector(Vector3::new(x, y, z))
    }

    /// Normalize `v` onto the sphere. Fails on zero or non-finite input.
    pub fn from_vector(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n < 1e-100 {
            return Err(Error::InvalidParameter(
                "cannot project a zero or non-finite vector onto the sphere".into(),
            ));
        }
        Ok(SpherePoint(v / n))
    }

    pub fn vector(&self) -> Vector3<f64> {
        self.0
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.0.dot(&other.0)
    }

    /// Geodesic (great-circle) distance, in [0, pi].
    pub fn geodesic_distance(&self, other: &SpherePoint) -> f64 {
        self.dot(other).clamp(-1.0, 1.0).acos()
    }

    pub fn antipode(&self) -> SpherePoint {
        SpherePoint(-self.0)
    }

    /// A deterministic orthonormal basis of the tangent plane.
    pub fn tangent_basis(&self) -> (Vector3<f64>, Vector3<f64>) {
        let n = self.0;
        let h = if n.x.abs() < 0.9 {
            Vector3::x()
        } else {
            Vector3::y()
        };
        let e1 = n.cross(&h).normalize();
        let e2 = n.cross(&e1);
        (e1, e2)
    }

    /// Walk the geodesic leaving `self` with unit tangent `v` for arc length `t`.
    pub fn geodesic_step(&self, v: &Vector3<f64>, t: f64) -> SpherePoint {
        SpherePoint((self.0 * t.cos() + v * t.sin()).normalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_input() {
        let p = SpherePoint::new(3.0, 0.0, 4.0).unwrap();
        assert!((p.vector().norm() - 1.0).abs() < 1e-15);
        assert!((p.x() - 0.6).abs() < 1e-15);
        assert!(SpherePoint::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn tangent_basis_is_orthonormal() {
        let p = SpherePoint::new(0.3, -0.8, 0.52).unwrap();
        let (e1, e2) = p.tangent_basis();
        assert!(e1.dot(&e2).abs() < 1e-14);
        assert!(e1.dot(&p.vector()).abs() < 1e-14);
        assert!(e2.dot(&p.vector()).abs() < 1e-14);
        assert!((e1.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn geodesic_step_matches_distance() {
        let p = SpherePoint::new(0.0, 0.0, 1.0).unwrap();
        let (e1, _) = p.tangent_basis();
        let q = p.geodesic_step(&e1, 0.7);
        assert!((p.geodesic_distance(&q) - 0.7).abs() < 1e-12);
    }
}
