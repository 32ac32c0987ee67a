//! Harmonics vanishing on prescribed point sets.
//!
//! The kernel sections phi_{a_1}, ..., phi_{a_k} span the orthogonal
//! complement of every harmonic vanishing at all a_i; bordering their Gram
//! matrix with a row of sections at a probe point y and expanding the
//! determinant along that row produces such a harmonic directly.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::harmonics::{zonal_eval, RealHarmonic, ZonalKernel};
use crate::sphere::SpherePoint;

/// A degree plus k points with the Gram matrix of their kernel sections.
#[derive(Clone, Debug)]
pub struct PointConfiguration {
    degree: usize,
    points: Vec<SpherePoint>,
    gram: DMatrix<f64>,
}

impl PointConfiguration {
    /// Build the k x k Gram matrix phi(a_i, a_j). Requires 1 <= k <= 2n+1.
    pub fn new(degree: usize, points: Vec<SpherePoint>) -> Result<Self> {
        let k = points.len();
        if k == 0 {
            return Err(Error::InvalidParameter(
                "a point configuration needs at least one point".into(),
            ));
        }
        if k > 2 * degree + 1 {
            return Err(Error::TooManyPoints {
                count: k,
                max: 2 * degree + 1,
                degree,
            });
        }
        let gram = DMatrix::from_fn(k, k, |i, j| zonal_eval(degree, &points[i], &points[j]));
        Ok(PointConfiguration {
            degree,
            points,
            gram,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }
}

/// Numerical rank of the Gram matrix at a relative singular-value cutoff,
/// and whether the kernel sections at the points are linearly independent.
pub fn independence_rank(cfg: &PointConfiguration, tol: f64) -> (usize, bool) {
    let svd = cfg.gram.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > tol * smax)
        .count();
    (rank, rank == cfg.points.len())
}

/// The harmonic obtained by cofactor expansion of the bordered Gram
/// determinant along its last row: it vanishes at every prescribed point,
/// and is the zero harmonic exactly when the points are dependent.
///
/// Requires 1 <= k <= 2n so that a nonzero result exists for generic data.
pub fn harmonic_vanishing_at(
    points: &[SpherePoint],
    degree: usize,
    y: &SpherePoint,
) -> Result<RealHarmonic> {
    let k = points.len();
    if k == 0 {
        return Err(Error::InvalidParameter(
            "need at least one prescribed zero".into(),
        ));
    }
    if k > 2 * degree {
        return Err(Error::TooManyPoints {
            count: k,
            max: 2 * degree,
            degree,
        });
    }
    // k x (k+1) matrix of kernel values against the columns [a_1..a_k, y]
    let mut columns: Vec<SpherePoint> = points.to_vec();
    columns.push(*y);
    let body = DMatrix::from_fn(k, k + 1, |i, j| zonal_eval(degree, &points[i], &columns[j]));

    let kernel = ZonalKernel::new(degree);
    let mut v = RealHarmonic::zero(degree);
    for (j, col_point) in columns.iter().enumerate() {
        let minor = body.clone().remove_column(j).determinant();
        let sign = if (k + j) % 2 == 0 { 1.0 } else { -1.0 };
        v = v.add_scaled(&kernel.expand(col_point), sign * minor)?;
    }
    Ok(v)
}

/// Minimal-norm interpolation: solve the Gram system for coefficients of
/// the kernel sections, using the default independence cutoff 1e-9.
pub fn interpolate(
    points: &[SpherePoint],
    values: &[f64],
    degree: usize,
) -> Result<RealHarmonic> {
    interpolate_with_tol(points, values, degree, 1e-9)
}

/// [`interpolate`] with an explicit relative singular-value cutoff.
pub fn interpolate_with_tol(
    points: &[SpherePoint],
    values: &[f64],
    degree: usize,
    tol: f64,
) -> Result<RealHarmonic> {
    if points.len() != values.len() {
        return Err(Error::InvalidParameter(format!(
            "{} points but {} values",
            points.len(),
            values.len()
        )));
    }
    let cfg = PointConfiguration::new(degree, points.to_vec())?;
    let (_, independent) = independence_rank(&cfg, tol);
    if !independent {
        return Err(Error::DependentPoints { tol });
    }
    let rhs = DMatrix::from_column_slice(points.len(), 1, values);
    let sol = cfg
        .gram
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::DependentPoints { tol })?;
    let kernel = ZonalKernel::new(degree);
    let mut u = RealHarmonic::zero(degree);
    for (c, p) in sol.iter().zip(points) {
        u = u.add_scaled(&kernel.expand(p), *c)?;
    }
    Ok(u)
}
