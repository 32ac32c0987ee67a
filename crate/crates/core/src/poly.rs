//! Homogeneous polynomials on R^3 in the monomial basis.
//!
//! Used for the holomorphic extension of spherical harmonics to C^3,
//! ambient gradients, and rotation derivatives. A `TriPoly` of degree d
//! stores the coefficient of x^a y^b z^c (a + b + c = d) densely.

use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct TriPoly {
    degree: usize,
    coeffs: Vec<f64>,
}

fn terms_of_degree(d: usize) -> usize {
    (d + 1) * (d + 2) / 2
}

impl TriPoly {
    pub fn zero(degree: usize) -> Self {
        TriPoly {
            degree,
            coeffs: vec![0.0; terms_of_degree(degree)],
        }
    }

    pub fn constant(value: f64) -> Self {
        TriPoly {
            degree: 0,
            coeffs: vec![value],
        }
    }

    /// x^a y^b z^c with a + b + c = degree.
    pub fn monomial(degree: usize, a: usize, b: usize, coeff: f64) -> Self {
        let mut p = Self::zero(degree);
        *p.coeff_mut(a, b) += coeff;
        p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        self.coeffs[index_of(self.degree, a, b)]
    }

    pub fn coeff_mut(&mut self, a: usize, b: usize) -> &mut f64 {
        let i = index_of(self.degree, a, b);
        &mut self.coeffs[i]
    }

    /// Iterate (a, b, c, coefficient) over nonzero terms.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        let d = self.degree;
        (0..=d).flat_map(move |a| {
            (0..=d - a).filter_map(move |b| {
                let c = self.coeffs[index_of(d, a, b)];
                (c != 0.0).then_some((a, b, d - a - b, c))
            })
        })
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scaled(&self, s: f64) -> TriPoly {
        TriPoly {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// self += s * other (equal degrees).
    pub fn add_scaled(&mut self, other: &TriPoly, s: f64) {
        assert_eq!(self.degree, other.degree, "degree mismatch in add_scaled");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn mul(&self, other: &TriPoly) -> TriPoly {
        let mut out = TriPoly::zero(self.degree + other.degree);
        for (a1, b1, _, c1) in self.terms() {
            for (a2, b2, _, c2) in other.terms() {
                *out.coeff_mut(a1 + a2, b1 + b2) += c1 * c2;
            }
        }
        out
    }

    pub fn pow(&self, e: usize) -> TriPoly {
        let mut out = TriPoly::constant(1.0);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Formal partial derivative along axis 0, 1, or 2.
    pub fn diff(&self, axis: usize) -> TriPoly {
        if self.degree == 0 {
            return TriPoly::zero(0);
        }
        let mut out = TriPoly::zero(self.degree - 1);
        for (a, b, c, coeff) in self.terms() {
            match axis {
                0 if a > 0 => *out.coeff_mut(a - 1, b) += a as f64 * coeff,
                1 if b > 0 => *out.coeff_mut(a, b - 1) += b as f64 * coeff,
                2 if c > 0 => *out.coeff_mut(a, b) += c as f64 * coeff,
                0 | 1 | 2 => {}
                _ => panic!("axis out of range"),
            }
        }
        out
    }

    pub fn laplacian(&self) -> TriPoly {
        if self.degree < 2 {
            return TriPoly::zero(0);
        }
        let mut out = self.diff(0).diff(0);
        out.add_scaled(&self.diff(1).diff(1), 1.0);
        out.add_scaled(&self.diff(2).diff(2), 1.0);
        out
    }

    pub fn eval(&self, p: &[f64; 3]) -> f64 {
        let d = self.degree;
        let px = power_table(p[0], d);
        let py = power_table(p[1], d);
        let pz = power_table(p[2], d);
        let mut sum = 0.0;
        let mut i = 0;
        for a in 0..=d {
            for b in 0..=d - a {
                let c = self.coeffs[i];
                if c != 0.0 {
                    sum += c * px[a] * py[b] * pz[d - a - b];
                }
                i += 1;
            }
        }
        sum
    }

    /// Holomorphic evaluation at a point of C^3.
    pub fn eval_complex(&self, z: &[Complex64; 3]) -> Complex64 {
        let d = self.degree;
        let px = cpower_table(z[0], d);
        let py = cpower_table(z[1], d);
        let pz = cpower_table(z[2], d);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut i = 0;
        for a in 0..=d {
            for b in 0..=d - a {
                let c = self.coeffs[i];
                if c != 0.0 {
                    sum += px[a] * py[b] * pz[d - a - b] * c;
                }
                i += 1;
            }
        }
        sum
    }
}

fn index_of(degree: usize, a: usize, b: usize) -> usize {
    // Row-major over a; row a holds degree + 1 - a entries.
    debug_assert!(a + b <= degree);
    a * (degree + 1) - a * a.saturating_sub(1) / 2 + b
}

fn power_table(x: f64, d: usize) -> Vec<f64> {
    let mut t = vec![1.0; d + 1];
    for i in 1..=d {
        t[i] = t[i - 1] * x;
    }
    t
}

fn cpower_table(x: Complex64, d: usize) -> Vec<Complex64> {
    let mut t = vec![Complex64::new(1.0, 0.0); d + 1];
    for i in 1..=d {
        t[i] = t[i - 1] * x;
    }
    t
}

/// Monomial coefficients of P_n (index = power of t).
pub fn legendre_monomial_coeffs(n: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for k in 1..n {
        let kf = k as f64;
        let mut next = vec![0.0; k + 2];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += (2.0 * kf + 1.0) * c / (kf + 1.0);
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= kf * c / (kf + 1.0);
        }
        prev = cur;
        cur = next;
    }
    cur
}
