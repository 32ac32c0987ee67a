//! Real spherical harmonics on S^2.
//!
//! Basis convention `real-orthonormal-prob-v1`, orthonormal with respect to
//! the rotation-invariant probability measure sigma:
//!
//! ```text
//! Y_{n,0}     = sqrt(2n+1) P_n(cos theta)
//! Y_{n,j}     = sqrt(2 (2n+1) (n-j)!/(n+j)!) P_n^j(cos theta) cos(j phi),  j > 0
//! Y_{n,-j}    = same with sin(j phi)
//! ```
//!
//! with P_n^j the associated Legendre function without the Condon-Shortley
//! phase. Under this normalization the reproducing kernel of the degree-n
//! eigenspace is phi(a, x) = (2n+1) P_n(<a, x>).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::Vector3;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::legendre;
use crate::poly::{legendre_monomial_coeffs, TriPoly};
use crate::rng;
use crate::sphere::SpherePoint;

/// A degree-n real harmonic stored as 2n+1 coefficients in the pinned
/// basis, index i holding the coefficient of Y_{n, i-n}.
#[derive(Clone, Debug, PartialEq)]
pub struct RealHarmonic {
    degree: usize,
    coeffs: Vec<f64>,
}

impl RealHarmonic {
    pub fn new(degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != 2 * degree + 1 {
            return Err(Error::InvalidParameter(format!(
                "degree {} harmonic needs {} coefficients, got {}",
                degree,
                2 * degree + 1,
                coeffs.len()
            )));
        }
        Ok(RealHarmonic { degree, coeffs })
    }

    pub fn zero(degree: usize) -> Self {
        RealHarmonic {
            degree,
            coeffs: vec![0.0; 2 * degree + 1],
        }
    }

    /// The basis function Y_{n,j} itself.
    pub fn basis_vector(degree: usize, j: i64) -> Result<Self> {
        check_index(degree, j)?;
        let mut u = Self::zero(degree);
        u.coeffs[(j + degree as i64) as usize] = 1.0;
        Ok(u)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of Y_{n,j}.
    pub fn coeff(&self, j: i64) -> f64 {
        self.coeffs[(j + self.degree as i64) as usize]
    }

    /// L^2(sigma) norm; equals the Euclidean norm of the coefficients.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn eval(&self, x: &SpherePoint) -> f64 {
        let row = basis_row(self.degree, x);
        self.coeffs.iter().zip(&row).map(|(c, y)| c * y).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        RealHarmonic {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// self + s * other.
    pub fn add_scaled(&self, other: &RealHarmonic, s: f64) -> Result<Self> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        Ok(RealHarmonic {
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + s * b)
                .collect(),
        })
    }

    /// The harmonic homogeneous polynomial on R^3 restricting to this
    /// function on the sphere.
    pub fn to_poly(&self) -> TriPoly {
        let basis = basis_polys(self.degree);
        let mut out = TriPoly::zero(self.degree);
        for (c, p) in self.coeffs.iter().zip(basis.iter()) {
            if *c != 0.0 {
                out.add_scaled(p, *c);
            }
        }
        out
    }
}

fn check_index(degree: usize, j: i64) -> Result<()> {
    if j.unsigned_abs() as usize > degree {
        return Err(Error::IndexOutOfRange { degree, index: j });
    }
    Ok(())
}

/// Associated Legendre P_n^j(ct) for j = 0..=n, without Condon-Shortley
/// phase, by the stable ascending recurrence. `st` is sin(theta) >= 0.
fn assoc_legendre_all(n: usize, ct: f64, st: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for j in 0..=n {
        // seed P_j^j = (2j-1)!! st^j, then ascend in degree
        let mut pjj = 1.0;
        for i in 1..=j {
            pjj *= (2 * i - 1) as f64 * st;
        }
        if j == n {
            out[j] = pjj;
            continue;
        }
        let mut p_prev = pjj;
        let mut p = (2 * j + 1) as f64 * ct * pjj;
        for l in j + 2..=n {
            let lf = l as f64;
            let jf = j as f64;
            let p_next = ((2.0 * lf - 1.0) * ct * p - (lf + jf - 1.0) * p_prev) / (lf - jf);
            p_prev = p;
            p = p_next;
        }
        out[j] = p;
    }
    out
}

/// Orthonormality factor for Y_{n,j}, j >= 0.
fn norm_factor(n: usize, j: usize) -> f64 {
    let base = (2 * n + 1) as f64;
    if j == 0 {
        return base.sqrt();
    }
    // (n-j)!/(n+j)! as a running product
    let mut ratio = 1.0;
    for t in (n - j + 1)..=(n + j) {
        ratio /= t as f64;
    }
    (2.0 * base * ratio).sqrt()
}

/// All 2n+1 basis values at `x`, index i holding Y_{n, i-n}(x).
pub fn basis_row(n: usize, x: &SpherePoint) -> Vec<f64> {
    let ct = x.z();
    let st = x.x().hypot(x.y());
    let (cphi, sphi) = if st > 1e-300 {
        (x.x() / st, x.y() / st)
    } else {
        (1.0, 0.0)
    };
    let p = assoc_legendre_all(n, ct, st);
    let mut row = vec![0.0; 2 * n + 1];
    row[n] = norm_factor(n, 0) * p[0];
    let (mut cj, mut sj) = (1.0, 0.0); // cos(j phi), sin(j phi) at j = 0
    for j in 1..=n {
        let (cn, sn) = (cj * cphi - sj * sphi, sj * cphi + cj * sphi);
        cj = cn;
        sj = sn;
        let nf = norm_factor(n, j);
        row[n + j] = nf * p[j] * cj;
        row[n - j] = nf * p[j] * sj;
    }
    row
}

/// Y_{n,j}(x).
pub fn basis_eval(n: usize, j: i64, x: &SpherePoint) -> Result<f64> {
    check_index(n, j)?;
    let row = basis_row(n, x);
    Ok(row[(j + n as i64) as usize])
}

/// The reproducing kernel phi(a, x) = (2n+1) P_n(<a, x>) of the degree-n
/// eigenspace under the probability measure.
#[derive(Clone, Copy, Debug)]
pub struct ZonalKernel {
    degree: usize,
}

impl ZonalKernel {
    pub fn new(degree: usize) -> Self {
        ZonalKernel { degree }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The normalizer c_n forced by the reproducing property.
    pub fn normalizer(&self) -> f64 {
        (2 * self.degree + 1) as f64
    }

    pub fn eval(&self, a: &SpherePoint, x: &SpherePoint) -> f64 {
        self.normalizer() * legendre::eval(self.degree, a.dot(x))
    }

    /// The section phi_a expanded in the pinned basis. By the addition
    /// theorem its coefficients are the basis values at `a`.
    pub fn expand(&self, a: &SpherePoint) -> RealHarmonic {
        RealHarmonic {
            degree: self.degree,
            coeffs: basis_row(self.degree, a),
        }
    }
}

/// phi(a, x) without constructing a kernel object.
pub fn zonal_eval(n: usize, a: &SpherePoint, x: &SpherePoint) -> f64 {
    ZonalKernel::new(n).eval(a, x)
}

/// Ambient gradient of the homogeneous extension projected onto the
/// tangent plane at `x`.
pub fn gradient_sphere(u: &RealHarmonic, x: &SpherePoint) -> Vector3<f64> {
    HarmonicField::new(u).gradient_tangent(x)
}

/// L^2(sigma) inner product by quadrature exact for degree <= 2n
/// integrands: Gauss-Legendre in cos(theta) with n+1 nodes crossed with
/// 2n+2 uniform longitudes. Coincides with the coefficient dot product.
pub fn inner_product(u: &RealHarmonic, v: &RealHarmonic) -> Result<f64> {
    if u.degree != v.degree {
        return Err(Error::DegreeMismatch {
            left: u.degree,
            right: v.degree,
        });
    }
    let mut sum = 0.0;
    for (x, w) in sphere_quadrature(2 * u.degree) {
        let row = basis_row(u.degree, &x);
        let uv: f64 = u.coeffs.iter().zip(&row).map(|(c, y)| c * y).sum();
        let vv: f64 = v.coeffs.iter().zip(&row).map(|(c, y)| c * y).sum();
        sum += w * uv * vv;
    }
    Ok(sum)
}

/// Product quadrature on S^2 exact for polynomial integrands of total
/// degree <= `max_degree`, with weights summing to 1.
pub fn sphere_quadrature(max_degree: usize) -> Vec<(SpherePoint, f64)> {
    let m = max_degree / 2 + 1;
    let n_phi = max_degree + 2;
    let (nodes, weights) = legendre::gauss_legendre(m);
    let mut out = Vec::with_capacity(m * n_phi);
    for (&t, &wt) in nodes.iter().zip(&weights) {
        let st = (1.0 - t * t).max(0.0).sqrt();
        for k in 0..n_phi {
            let phi = std::f64::consts::TAU * k as f64 / n_phi as f64;
            let p = SpherePoint::from_vector(Vector3::new(st * phi.cos(), st * phi.sin(), t))
                .expect("quadrature node");
            out.push((p, 0.5 * wt / n_phi as f64));
        }
    }
    out
}

/// Uniform draw from the unit sphere of the degree-n eigenspace:
/// 2n+1 independent standard Gaussian coefficients, normalized.
pub fn sample_uniform(n: usize, seed: u64) -> RealHarmonic {
    let mut r = rng::stream_rng(seed, 0);
    sample_with_rng(n, &mut r)
}

/// Same as [`sample_uniform`] but drawing from a caller-managed stream.
pub fn sample_with_rng(n: usize, r: &mut ChaCha8Rng) -> RealHarmonic {
    loop {
        let g = rng::normal_vector(r, 2 * n + 1);
        let norm = g.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-100 {
            return RealHarmonic {
                degree: n,
                coeffs: g.into_iter().map(|c| c / norm).collect(),
            };
        }
    }
}

/// Project a homogeneous polynomial onto the degree-n harmonics by
/// quadrature, n being the polynomial degree. Exact when the input is
/// harmonic; otherwise yields the L^2(sigma) projection of its trace
/// onto the degree-n eigenspace.
pub fn project_polynomial(p: &TriPoly) -> RealHarmonic {
    let n = p.degree();
    let mut coeffs = vec![0.0; 2 * n + 1];
    for (x, w) in sphere_quadrature(2 * n) {
        let val = p.eval(&[x.x(), x.y(), x.z()]);
        let row = basis_row(n, &x);
        for (c, y) in coeffs.iter_mut().zip(&row) {
            *c += w * val * y;
        }
    }
    RealHarmonic { degree: n, coeffs }
}

/// Cached monomial expansions of the basis functions of each degree.
fn basis_poly_cache() -> &'static Mutex<HashMap<usize, Arc<Vec<TriPoly>>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<TriPoly>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Monomial expansions of Y_{n,-n}..Y_{n,n} as harmonic homogeneous
/// polynomials of degree n.
pub fn basis_polys(n: usize) -> Arc<Vec<TriPoly>> {
    if let Some(hit) = basis_poly_cache().lock().unwrap().get(&n) {
        return hit.clone();
    }
    let built = Arc::new(build_basis_polys(n));
    basis_poly_cache()
        .lock()
        .unwrap()
        .entry(n)
        .or_insert(built)
        .clone()
}

fn build_basis_polys(n: usize) -> Vec<TriPoly> {
    // d^j/dt^j P_n, homogenized with r^2 = x^2+y^2+z^2, times the
    // sectoral factor Re/Im((x+iy)^j).
    let p_n = legendre_monomial_coeffs(n);
    let mut r2 = TriPoly::zero(2);
    *r2.coeff_mut(2, 0) = 1.0;
    *r2.coeff_mut(0, 2) = 1.0;
    *r2.coeff_mut(0, 0) = 1.0;

    let mut out = vec![TriPoly::zero(n); 2 * n + 1];
    let mut deriv = p_n;
    for j in 0..=n {
        if j > 0 {
            // one formal derivative in t
            let mut d = vec![0.0; deriv.len().saturating_sub(1).max(1)];
            for (k, &c) in deriv.iter().enumerate().skip(1) {
                d[k - 1] = k as f64 * c;
            }
            deriv = d;
        }
        let (re_j, im_j) = sectoral_factors(j);
        let mut body = TriPoly::zero(n - j);
        for (k, &c) in deriv.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            // c * z^k * (r^2)^((n-j-k)/2)
            debug_assert!((n - j - k) % 2 == 0);
            let term = TriPoly::monomial(k, 0, 0, c).mul(&r2.pow((n - j - k) / 2));
            body.add_scaled(&term, 1.0);
        }
        let nf = norm_factor(n, j);
        if j == 0 {
            out[n] = body.scaled(nf);
        } else {
            out[n + j] = body.mul(&re_j).scaled(nf);
            out[n - j] = body.mul(&im_j).scaled(nf);
        }
    }
    out
}

/// (Re((x+iy)^j), Im((x+iy)^j)) as polynomials.
fn sectoral_factors(j: usize) -> (TriPoly, TriPoly) {
    let mut re = TriPoly::zero(j);
    let mut im = TriPoly::zero(j);
    let mut binom = 1.0;
    for t in 0..=j {
        match t % 4 {
            0 => *re.coeff_mut(j - t, t) += binom,
            1 => *im.coeff_mut(j - t, t) += binom,
            2 => *re.coeff_mut(j - t, t) -= binom,
            _ => *im.coeff_mut(j - t, t) -= binom,
        }
        binom = binom * (j - t) as f64 / (t + 1) as f64;
    }
    (re, im)
}

/// A harmonic prepared for repeated evaluation: monomial form plus its
/// ambient gradient. All heavy geometry routines work through this.
#[derive(Clone, Debug)]
pub struct HarmonicField {
    degree: usize,
    norm: f64,
    poly: TriPoly,
    grad: [TriPoly; 3],
}

impl HarmonicField {
    pub fn new(u: &RealHarmonic) -> Self {
        let poly = u.to_poly();
        let grad = [poly.diff(0), poly.diff(1), poly.diff(2)];
        HarmonicField {
            degree: u.degree(),
            norm: u.norm(),
            poly,
            grad,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient norm of the source harmonic.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn poly(&self) -> &TriPoly {
        &self.poly
    }

    pub fn eval(&self, x: &SpherePoint) -> f64 {
        self.poly.eval(&[x.x(), x.y(), x.z()])
    }

    pub fn eval_vec(&self, v: &Vector3<f64>) -> f64 {
        self.poly.eval(&[v.x, v.y, v.z])
    }

    pub fn gradient_ambient(&self, x: &SpherePoint) -> Vector3<f64> {
        let p = [x.x(), x.y(), x.z()];
        Vector3::new(
            self.grad[0].eval(&p),
            self.grad[1].eval(&p),
            self.grad[2].eval(&p),
        )
    }

    /// Surface gradient: ambient gradient minus its radial component.
    pub fn gradient_tangent(&self, x: &SpherePoint) -> Vector3<f64> {
        let g = self.gradient_ambient(x);
        let n = x.vector();
        g - n * g.dot(&n)
    }
}
