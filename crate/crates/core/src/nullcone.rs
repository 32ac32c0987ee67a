//! Complex null-cone machinery.
//!
//! The cone z1^2 + z2^2 + z3^2 = 0 in C^3 is parametrized two-to-one by
//! kappa(z1, z2) = (2 z1 z2, z1^2 - z2^2, i (z1^2 + z2^2)). Composing a
//! degree-n harmonic with kappa gives a degree-2n binary form; its 2n
//! projective roots (the poles) determine the harmonic up to scale, and a
//! bordered determinant in the powers <x, a_k>^n reconstructs it.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonics::{basis_polys, basis_row, sphere_quadrature, RealHarmonic};
use crate::poly::TriPoly;
use crate::polyroots;
use crate::rng;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// kappa: C^2 -> null cone in C^3.
pub fn kappa(z: [Complex64; 2]) -> [Complex64; 3] {
    let [z1, z2] = z;
    [
        z1 * z2 * 2.0,
        z1 * z1 - z2 * z2,
        (z1 * z1 + z2 * z2) * Complex64::i(),
    ]
}

/// The quaternionic twist j(z1, z2) = (-z2, z1); j^2 = -1.
pub fn j_map(z: [Complex64; 2]) -> [Complex64; 2] {
    [-z[1], z[0]]
}

/// Bilinear (conjugation-free) inner product on C^2.
pub fn bilinear2(a: [Complex64; 2], b: [Complex64; 2]) -> Complex64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Bilinear inner product on C^3.
pub fn bilinear3(a: [Complex64; 3], b: [Complex64; 3]) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Both sides of <kappa(a), kappa(b)> = -2 <a, j b>^2.
pub fn inner_product_identity(a: [Complex64; 2], b: [Complex64; 2]) -> (Complex64, Complex64) {
    let lhs = bilinear3(kappa(a), kappa(b));
    let t = bilinear2(a, j_map(b));
    (lhs, t * t * -2.0)
}

/// A complex harmonic u + iv in the pinned real basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexHarmonic {
    degree: usize,
    coeffs: Vec<Complex64>,
}

impl ComplexHarmonic {
    pub fn new(degree: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * degree + 1 {
            return Err(Error::InvalidParameter(format!(
                "degree {} harmonic needs {} coefficients, got {}",
                degree,
                2 * degree + 1,
                coeffs.len()
            )));
        }
        Ok(ComplexHarmonic { degree, coeffs })
    }

    pub fn from_parts(re: &RealHarmonic, im: &RealHarmonic) -> Result<Self> {
        if re.degree() != im.degree() {
            return Err(Error::DegreeMismatch {
                left: re.degree(),
                right: im.degree(),
            });
        }
        Ok(ComplexHarmonic {
            degree: re.degree(),
            coeffs: re
                .coeffs()
                .iter()
                .zip(im.coeffs())
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect(),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn re(&self) -> RealHarmonic {
        RealHarmonic::new(self.degree, self.coeffs.iter().map(|c| c.re).collect()).unwrap()
    }

    pub fn im(&self) -> RealHarmonic {
        RealHarmonic::new(self.degree, self.coeffs.iter().map(|c| c.im).collect()).unwrap()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Holomorphic evaluation of the homogeneous extension at a point of C^3.
    pub fn eval_complex(&self, z: &[Complex64; 3]) -> Complex64 {
        let polys = basis_polys(self.degree);
        self.coeffs
            .iter()
            .zip(polys.iter())
            .filter(|(c, _)| c.norm_sqr() != 0.0)
            .map(|(c, p)| p.eval_complex(z) * c)
            .sum()
    }

    /// Value on the real sphere.
    pub fn eval(&self, x: &crate::sphere::SpherePoint) -> Complex64 {
        let row = basis_row(self.degree, x);
        self.coeffs
            .iter()
            .zip(&row)
            .map(|(c, y)| c * *y)
            .sum()
    }
}

/// A homogeneous binary form of degree 2n; index i holds the coefficient
/// of zeta1^i zeta2^(2n-i).
#[derive(Clone, Debug)]
pub struct BinaryForm {
    degree: usize,
    coeffs: Vec<Complex64>,
}

impl BinaryForm {
    pub fn new(degree: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != degree + 1 {
            return Err(Error::InvalidParameter(format!(
                "degree {} binary form needs {} coefficients, got {}",
                degree,
                degree + 1,
                coeffs.len()
            )));
        }
        Ok(BinaryForm { degree, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn eval(&self, z: [Complex64; 2]) -> Complex64 {
        let mut p1 = Complex64::new(1.0, 0.0);
        let mut acc = czero();
        let mut pows1 = Vec::with_capacity(self.degree + 1);
        for _ in 0..=self.degree {
            pows1.push(p1);
            p1 *= z[0];
        }
        let mut p2 = Complex64::new(1.0, 0.0);
        for i in (0..=self.degree).rev() {
            acc += self.coeffs[i] * pows1[i] * p2;
            p2 *= z[1];
        }
        acc
    }
}

/// Binary-polynomial convolution (coefficients by zeta1-power).
fn conv(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![czero(); a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai.norm_sqr() == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Coefficients of p(kappa(zeta)) by zeta1-power, computed by exact
/// monomial composition (x, y, z are degree-2 binary forms).
pub(crate) fn compose_with_kappa(p: &TriPoly) -> Vec<Complex64> {
    let n = p.degree();
    let x_form = [czero(), Complex64::new(2.0, 0.0), czero()];
    let y_form = [Complex64::new(-1.0, 0.0), czero(), Complex64::new(1.0, 0.0)];
    let z_form = [Complex64::new(0.0, 1.0), czero(), Complex64::new(0.0, 1.0)];
    let ladder = |base: [Complex64; 3]| -> Vec<Vec<Complex64>> {
        let mut l = vec![vec![Complex64::new(1.0, 0.0)]];
        for i in 1..=n {
            l.push(conv(&l[i - 1], &base));
        }
        l
    };
    let (px, py, pz) = (ladder(x_form), ladder(y_form), ladder(z_form));
    let mut out = vec![czero(); 2 * n + 1];
    for (a, b, c, coeff) in p.terms() {
        let term = conv(&conv(&px[a], &py[b]), &pz[c]);
        for (o, t) in out.iter_mut().zip(term) {
            *o += t * coeff;
        }
    }
    out
}

fn binary_basis_cache() -> &'static Mutex<HashMap<usize, Arc<Vec<Vec<Complex64>>>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Vec<Complex64>>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn basis_binary_forms(n: usize) -> Arc<Vec<Vec<Complex64>>> {
    if let Some(hit) = binary_basis_cache().lock().unwrap().get(&n) {
        return hit.clone();
    }
    let polys = basis_polys(n);
    let built: Arc<Vec<Vec<Complex64>>> =
        Arc::new(polys.iter().map(compose_with_kappa).collect());
    binary_basis_cache()
        .lock()
        .unwrap()
        .entry(n)
        .or_insert(built)
        .clone()
}

/// The restriction p o kappa as a degree-2n binary form. Injective: a
/// nonzero harmonic maps to a nonzero form.
pub fn restrict(p: &ComplexHarmonic) -> BinaryForm {
    let n = p.degree();
    let forms = basis_binary_forms(n);
    let mut coeffs = vec![czero(); 2 * n + 1];
    for (c, f) in p.coeffs().iter().zip(forms.iter()) {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        for (o, fi) in coeffs.iter_mut().zip(f) {
            *o += fi * c;
        }
    }
    BinaryForm { degree: 2 * n, coeffs }
}

/// The root lines of the restricted form: distinct unit representatives in
/// C^2 with multiplicities summing to 2n.
#[derive(Clone, Debug)]
pub struct PoleSet {
    pub representatives: Vec<[Complex64; 2]>,
    pub multiplicities: Vec<usize>,
    pub distinct: bool,
}

impl PoleSet {
    pub fn total_multiplicity(&self) -> usize {
        self.multiplicities.iter().sum()
    }
}

/// Projective (Fubini-Study sine) distance between two lines in C^2,
/// given unit representatives.
pub fn projective_distance(a: [Complex64; 2], b: [Complex64; 2]) -> f64 {
    let ip = a[0] * b[0].conj() + a[1] * b[1].conj();
    (1.0 - ip.norm_sqr()).max(0.0).sqrt()
}

/// Poles with the default seed for the coordinate-change draw.
pub fn poles(p: &ComplexHarmonic) -> Result<PoleSet> {
    poles_with_seed(p, 0)
}

/// The 2n pole lines of a nonzero harmonic.
///
/// A random special-unitary change of coordinates makes the leading
/// coefficient of the dehomogenized form well-conditioned; the roots are
/// companion-matrix eigenvalues, Newton-polished, with multiple roots
/// recovered by the cluster/verify pass and representatives finally merged
/// at projective distance 1e-7.
pub fn poles_with_seed(p: &ComplexHarmonic, seed: u64) -> Result<PoleSet> {
    let n = p.degree();
    let d = 2 * n;
    let maxc = p.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
    if maxc == 0.0 {
        return Err(Error::ZeroHarmonic);
    }
    if n == 0 {
        return Err(Error::InvalidParameter(
            "a degree-0 harmonic has no poles".into(),
        ));
    }
    let form = restrict(p);
    let fmax = form.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let scaled: Vec<Complex64> = form.coeffs.iter().map(|c| c / fmax).collect();

    // Middle coefficients carry binomial weight, so a leading coefficient
    // around 1e-3 of the largest is already generic; keep the best draw in
    // case every sample lands below the threshold.
    let mut r = rng::stream_rng(seed, 0);
    let mut chosen: Option<(Complex64, Complex64, Vec<Complex64>, f64)> = None;
    for _ in 0..12 {
        let g: Vec<f64> = rng::normal_vector(&mut r, 4);
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        let a = Complex64::new(g[0] / norm, g[1] / norm);
        let b = Complex64::new(g[2] / norm, g[3] / norm);
        let transformed = su2_transform(&scaled, a, b);
        let tmax = transformed.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let quality = transformed[d].norm() / tmax;
        if chosen.as_ref().map_or(true, |c| quality > c.3) {
            chosen = Some((a, b, transformed, quality));
        }
        if quality >= 1e-3 {
            break;
        }
    }
    let (a, b, coeffs, quality) =
        chosen.ok_or(Error::NoConvergence("coordinate change stayed degenerate"))?;
    if quality < 1e-9 {
        return Err(Error::NoConvergence("coordinate change stayed degenerate"));
    }

    let raw = polyroots::roots(&coeffs, 1e-13);
    debug_assert_eq!(raw.len(), d);
    let resolved = polyroots::resolve_multiplicities(&coeffs, &raw);

    let mut reps: Vec<[Complex64; 2]> = Vec::new();
    let mut mults: Vec<usize> = Vec::new();
    for (w, m) in resolved {
        let zeta = [a * w + b, -b.conj() * w + a.conj()];
        let rep = canonical_rep(zeta);
        // enforce the merge contract at reporting level
        if let Some(idx) = reps
            .iter()
            .position(|&r0| projective_distance(r0, rep) < 1e-7)
        {
            mults[idx] += m;
        } else {
            reps.push(rep);
            mults.push(m);
        }
    }
    debug_assert_eq!(mults.iter().sum::<usize>(), d);
    let distinct = mults.iter().all(|&m| m == 1);
    Ok(PoleSet {
        representatives: reps,
        multiplicities: mults,
        distinct,
    })
}

/// Substitute (zeta1, zeta2) -> (a zeta1 + b zeta2, -conj(b) zeta1 + conj(a) zeta2).
fn su2_transform(coeffs: &[Complex64], a: Complex64, b: Complex64) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    let l1 = [b, a];
    let l2 = [a.conj(), -b.conj()];
    let ladder = |base: [Complex64; 2]| -> Vec<Vec<Complex64>> {
        let mut l = vec![vec![Complex64::new(1.0, 0.0)]];
        for i in 1..=d {
            l.push(conv(&l[i - 1], &base));
        }
        l
    };
    let (p1, p2) = (ladder(l1), ladder(l2));
    let mut out = vec![czero(); d + 1];
    for (i, &ci) in coeffs.iter().enumerate() {
        if ci.norm_sqr() == 0.0 {
            continue;
        }
        let term = conv(&p1[i], &p2[d - i]);
        for (o, t) in out.iter_mut().zip(term) {
            *o += t * ci;
        }
    }
    out
}

/// Unit-norm representative with the largest component made real positive.
fn canonical_rep(z: [Complex64; 2]) -> [Complex64; 2] {
    let norm = (z[0].norm_sqr() + z[1].norm_sqr()).sqrt();
    let z = [z[0] / norm, z[1] / norm];
    let lead = if z[0].norm() >= z[1].norm() { z[0] } else { z[1] };
    let phase = lead / lead.norm();
    [z[0] * phase.conj(), z[1] * phase.conj()]
}

/// Expand x -> <x, a>^n (a in C^3) in the pinned basis by quadrature,
/// exact for this degree-2n integrand.
fn expand_power_harmonic(a: [Complex64; 3], n: usize) -> Vec<Complex64> {
    let mut coeffs = vec![czero(); 2 * n + 1];
    for (x, w) in sphere_quadrature(2 * n) {
        let t = a[0] * x.x() + a[1] * x.y() + a[2] * x.z();
        let val = t.powu(n as u32) * w;
        let row = basis_row(n, &x);
        for (c, y) in coeffs.iter_mut().zip(&row) {
            *c += val * *y;
        }
    }
    coeffs
}

/// Rebuild a harmonic (up to a complex scale) from 2n distinct pole lines:
/// border the matrix (<a_r, a_s>^n) with a generic null-cone probe point
/// y = kappa(eta) and expand along the last row. Each summand <x, a>^n with
/// a on the cone is itself harmonic.
pub fn reconstruct(ps: &PoleSet, degree: usize, seed: u64) -> Result<ComplexHarmonic> {
    let d = 2 * degree;
    if !ps.distinct {
        return Err(Error::CoincidentPoles);
    }
    if ps.representatives.len() != d {
        return Err(Error::InvalidParameter(format!(
            "need {} distinct pole lines for degree {}, got {}",
            d,
            degree,
            ps.representatives.len()
        )));
    }
    let cone_points: Vec<[Complex64; 3]> =
        ps.representatives.iter().map(|&z| kappa(z)).collect();
    let expansions: Vec<Vec<Complex64>> = cone_points
        .iter()
        .map(|&a| expand_power_harmonic(a, degree))
        .collect();

    let mut r = rng::stream_rng(seed, 0);
    for _ in 0..5 {
        let g = rng::normal_vector(&mut r, 4);
        let eta = [Complex64::new(g[0], g[1]), Complex64::new(g[2], g[3])];
        let y = kappa(eta);

        let body = DMatrix::from_fn(d, d + 1, |row, col| {
            if col < d {
                bilinear3(cone_points[row], cone_points[col]).powu(degree as u32)
            } else {
                bilinear3(cone_points[row], y).powu(degree as u32)
            }
        });
        let mut cofactors = Vec::with_capacity(d + 1);
        for j in 0..=d {
            let minor = body.clone().remove_column(j).determinant();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            cofactors.push(minor * sign);
        }

        let y_expansion = expand_power_harmonic(y, degree);
        let mut coeffs = vec![czero(); d + 1];
        let mut magnitude = 0.0;
        for (j, cof) in cofactors.iter().enumerate() {
            let term = if j < d { &expansions[j] } else { &y_expansion };
            let tnorm: f64 = term.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            magnitude += cof.norm() * tnorm;
            for (c, t) in coeffs.iter_mut().zip(term) {
                *c += t * cof;
            }
        }
        let vnorm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        // a cancelling probe point (c(y) = 0) shows up as catastrophic loss
        if vnorm > 1e-10 * magnitude && vnorm > 0.0 {
            return ComplexHarmonic::new(degree, coeffs);
        }
    }
    Err(Error::NoConvergence(
        "every probe point cancelled in the reconstruction determinant",
    ))
}

/// Closed-form determinant of the (k+1) x (k+1) matrix with entries
/// <a_r, b_s>^k: the binomial product times the pair products
/// <a_r, j a_s> <b_r, j b_s> over s < r.
pub fn detcc_closed(a: &[[Complex64; 2]], b: &[[Complex64; 2]]) -> Complex64 {
    assert_eq!(a.len(), b.len(), "need equally many a and b vectors");
    assert!(!a.is_empty());
    let k = a.len() - 1;
    let mut acc = Complex64::new(1.0, 0.0);
    let mut binom = 1.0f64;
    for t in 1..=k {
        binom = binom * (k - t + 1) as f64 / t as f64;
        acc *= binom;
    }
    for r in 0..=k {
        for s in 0..r {
            acc *= bilinear2(a[r], j_map(a[s]));
        }
    }
    for r in 0..=k {
        for s in 0..r {
            acc *= bilinear2(b[r], j_map(b[s]));
        }
    }
    acc
}

/// The same determinant evaluated directly; kept as the independent
/// cross-check for [`detcc_closed`].
pub fn detcc_direct(a: &[[Complex64; 2]], b: &[[Complex64; 2]]) -> Complex64 {
    assert_eq!(a.len(), b.len());
    let k = a.len() - 1;
    DMatrix::from_fn(k + 1, k + 1, |r, s| {
        bilinear2(a[r], b[s]).powu(k as u32)
    })
    .determinant()
}
