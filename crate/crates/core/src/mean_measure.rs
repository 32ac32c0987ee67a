//! Mean Hausdorff measure of intersected nodal sets.
//!
//! For k <= m independent uniform harmonics of degrees n_1..n_k on S^m, the
//! mean (m-k)-measure of the intersection of their nodal sets is
//! omega_{m-k} * prod_j s_{n_j}, where s_n = sqrt(lambda_n / m) is the local
//! homothety coefficient of the kernel embedding and lambda_n = n(n+m-1).
//! Closed forms are exposed for every m; Monte Carlo verification runs on
//! S^2, where k = 1 is the mean nodal length and k = 2 the mean number of
//! common zeros.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harmonics::{basis_row, sample_with_rng};
use crate::mesh::SphereMesh;
use crate::nodal_geometry::{common_zeros_fields, crofton_length_field};
use crate::rng;
use crate::sphere::SpherePoint;
use crate::harmonics::HarmonicField;
use nalgebra::Vector3;

/// Sphere dimension m, plus the degrees n_1..n_k with k <= m.
#[derive(Clone, Debug)]
pub struct MeanSpec {
    m: usize,
    degrees: Vec<usize>,
}

impl MeanSpec {
    pub fn new(m: usize, degrees: Vec<usize>) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(
                "sphere dimension must be at least 2".into(),
            ));
        }
        if degrees.is_empty() || degrees.len() > m {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= k <= m = {m} degrees, got {}",
                degrees.len()
            )));
        }
        if degrees.iter().any(|&n| n == 0) {
            return Err(Error::InvalidParameter("degrees must be positive".into()));
        }
        Ok(MeanSpec { m, degrees })
    }

    pub fn dimension(&self) -> usize {
        self.m
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }
}

/// Surface measure of S^k: omega_k = 2 pi^((k+1)/2) / Gamma((k+1)/2),
/// reduced to integer factorials and double factorials.
pub fn omega(k: usize) -> f64 {
    if k % 2 == 0 {
        // 2 (2 pi)^(k/2) / (k-1)!!
        let mut acc = 2.0;
        for i in 0..k / 2 {
            acc *= std::f64::consts::TAU;
            acc /= (2 * i + 1) as f64;
        }
        acc
    } else {
        // 2 pi^((k+1)/2) / ((k-1)/2)!
        let mut acc = 2.0;
        for i in 0..(k + 1) / 2 {
            acc *= std::f64::consts::PI;
            if i > 0 {
                acc /= i as f64;
            }
        }
        acc
    }
}

/// Eigenvalue of the (negated) spherical Laplacian on degree-n harmonics
/// on S^m: n (n + m - 1).
pub fn lambda_n(n: usize, m: usize) -> f64 {
    debug_assert!(n >= 1 && m >= 2);
    (n * (n + m - 1)) as f64
}

/// Homothety coefficient s_n = sqrt(lambda_n / m) of the kernel embedding
/// of S^m into the eigenspace sphere.
pub fn immersion_scale(n: usize, m: usize) -> f64 {
    (lambda_n(n, m) / m as f64).sqrt()
}

/// Closed-form mean measure: omega_{m-k} * prod_j s_{n_j}.
pub fn mean_measure_closed(spec: &MeanSpec) -> f64 {
    let m = spec.m;
    let k = spec.degrees.len();
    let mut acc = omega(m - k);
    for &n in &spec.degrees {
        acc *= immersion_scale(n, m);
    }
    acc
}

/// Finite-difference check of the homothety coefficient on S^2: the norm
/// of the differential of x -> phi_x / |phi_x| at `a` in the tangent
/// direction `v`, central step 1e-5. Equals sqrt(lambda_n / 2) to about
/// 1e-4 relative and is direction-independent.
pub fn immersion_scale_numeric(n: usize, a: &SpherePoint, v: &Vector3<f64>) -> Result<f64> {
    let tangent = v - a.vector() * v.dot(&a.vector());
    let norm = tangent.norm();
    if norm < 1e-12 {
        return Err(Error::InvalidParameter(
            "direction is parallel to the base point".into(),
        ));
    }
    let dir = tangent / norm;
    let h = 1e-5;
    let embed = |p: &SpherePoint| -> Vec<f64> {
        // phi_p has coefficients Y_j(p) and norm sqrt(2n+1)
        let scale = 1.0 / ((2 * n + 1) as f64).sqrt();
        basis_row(n, p).into_iter().map(|y| y * scale).collect()
    };
    let plus = embed(&a.geodesic_step(&dir, h));
    let minus = embed(&a.geodesic_step(&dir, -h));
    let diff_sq: f64 = plus
        .iter()
        .zip(&minus)
        .map(|(p, q)| (p - q) * (p - q))
        .sum();
    Ok(diff_sq.sqrt() / (2.0 * h))
}

/// A Monte Carlo estimate with its standard error and the number of
/// redrawn (near-singular or unresolved) samples.
#[derive(Clone, Copy, Debug)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub rejected: usize,
}

fn summarize(values: &[f64], rejected: usize) -> McEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    McEstimate {
        mean,
        stderr: (var / n).sqrt(),
        rejected,
    }
}

pub const DEFAULT_MC_CIRCLES: usize = 200;

/// Mean nodal length over uniform degree-n harmonics on S^2, by Crofton
/// sampling with [`DEFAULT_MC_CIRCLES`] circles per harmonic.
pub fn mc_mean_nodal_length(n: usize, samples: usize, seed: u64) -> McEstimate {
    mc_mean_nodal_length_with_circles(n, samples, DEFAULT_MC_CIRCLES, seed)
}

pub fn mc_mean_nodal_length_with_circles(
    n: usize,
    samples: usize,
    circles: usize,
    seed: u64,
) -> McEstimate {
    let estimates: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream_rng(seed, i as u64);
            let u = sample_with_rng(n, &mut r);
            let field = HarmonicField::new(&u);
            crofton_length_field(&field, circles, rng::derive_seed(seed, i as u64)).0
        })
        .collect();
    summarize(&estimates, 0)
}

/// Mean number of common zeros of independent uniform pairs of degrees
/// (n1, n2) on S^2. Samples with near-singular crossings or unresolved
/// cells are redrawn and counted in `rejected`.
pub fn mc_mean_common_zeros(n1: usize, n2: usize, samples: usize, seed: u64) -> Result<McEstimate> {
    let mesh = SphereMesh::for_degree(n1.max(n2));
    mc_mean_common_zeros_with_mesh(n1, n2, samples, seed, &mesh)
}

pub fn mc_mean_common_zeros_with_mesh(
    n1: usize,
    n2: usize,
    samples: usize,
    seed: u64,
    mesh: &SphereMesh,
) -> Result<McEstimate> {
    const MAX_ATTEMPTS: usize = 50;
    let per_sample: Vec<Result<(f64, usize)>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            for attempt in 0..MAX_ATTEMPTS {
                let stream = (i as u64) * 128 + 2 * attempt as u64;
                let u = sample_with_rng(n1, &mut rng::stream_rng(seed, stream));
                let v = sample_with_rng(n2, &mut rng::stream_rng(seed, stream + 1));
                let uf = HarmonicField::new(&u);
                let vf = HarmonicField::new(&v);
                let cz = common_zeros_fields(&uf, &vf, mesh)?;
                if cz.is_clean() {
                    return Ok((cz.count() as f64, attempt));
                }
            }
            Err(Error::NoConvergence(
                "a Monte Carlo sample kept drawing near-singular pairs",
            ))
        })
        .collect();
    let mut counts = Vec::with_capacity(samples);
    let mut rejected = 0;
    for r in per_sample {
        let (count, redraws) = r?;
        counts.push(count);
        rejected += redraws;
    }
    Ok(summarize(&counts, rejected))
}
