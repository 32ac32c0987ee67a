//! Roots of complex univariate polynomials.
//!
//! Companion-matrix eigenvalues via an explicit single-shift QR iteration on
//! the complex upper-Hessenberg form, Newton polish, and a recursive
//! cluster/verify pass that recovers multiple roots. Eigenvalues of an
//! m-fold root scatter like eps^(1/m); the verify pass collapses such clouds
//! by running Newton on the (m-1)-st derivative, where the root is simple,
//! and accepting only if all lower derivatives vanish to tolerance.

use num_complex::Complex64;

pub(crate) fn poly_eval(coeffs: &[Complex64], w: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c)
}

pub(crate) fn poly_deriv(coeffs: &[Complex64]) -> Vec<Complex64> {
    if coeffs.len() <= 1 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Newton refinement of a single root.
pub(crate) fn newton_polish(
    coeffs: &[Complex64],
    deriv: &[Complex64],
    mut w: Complex64,
    iters: usize,
) -> Complex64 {
    for _ in 0..iters {
        let f = poly_eval(coeffs, w);
        let d = poly_eval(deriv, w);
        if d.norm() < 1e-300 {
            break;
        }
        let step = f / d;
        w -= step;
        if step.norm() <= 1e-15 * (1.0 + w.norm()) {
            break;
        }
    }
    w
}

/// All roots of sum_j coeffs[j] w^j, multiplicities included (the returned
/// list has `degree` entries after trimming).
///
/// Coefficients at either end smaller than `trim_tol` times the largest are
/// trimmed: trailing near-zeros become exact roots at 0, trimmed leading
/// coefficients drop roots near infinity.
pub(crate) fn roots(coeffs: &[Complex64], trim_tol: f64) -> Vec<Complex64> {
    let maxc = coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    if maxc == 0.0 {
        return Vec::new();
    }
    let mut lo = 0;
    while lo < coeffs.len() && coeffs[lo].norm() <= trim_tol * maxc {
        lo += 1;
    }
    let mut hi = coeffs.len();
    while hi > lo && coeffs[hi - 1].norm() <= trim_tol * maxc {
        hi -= 1;
    }
    let mut out = vec![Complex64::new(0.0, 0.0); lo];
    let c = &coeffs[lo..hi];
    if c.len() <= 1 {
        return out;
    }
    if c.len() == 2 {
        out.push(-c[0] / c[1]);
        return out;
    }
    let d = c.len() - 1;
    let lead = c[d];
    // companion matrix, upper Hessenberg: subdiagonal ones, last column -c_i/c_d
    let mut h = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for i in 1..d {
        h[i][i - 1] = Complex64::new(1.0, 0.0);
    }
    for i in 0..d {
        h[i][d - 1] = -c[i] / lead;
    }
    out.extend(hessenberg_eigenvalues(h));
    out
}

/// Eigenvalues of a complex upper-Hessenberg matrix by explicit
/// single-shift QR with Wilkinson shifts.
fn hessenberg_eigenvalues(mut h: Vec<Vec<Complex64>>) -> Vec<Complex64> {
    let n = h.len();
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n;
    let mut stagnation = 0usize;
    let mut spent = 0usize;
    let budget = 80 * n + 200;
    while hi > 0 {
        if hi == 1 {
            eigs.push(h[0][0]);
            break;
        }
        // largest k with a negligible subdiagonal entry starts the active block
        let mut start = 0;
        for k in (1..hi).rev() {
            let scale = h[k - 1][k - 1].norm() + h[k][k].norm();
            if h[k][k - 1].norm() <= 1e-16 * (scale + 1e-300) {
                h[k][k - 1] = Complex64::new(0.0, 0.0);
                start = k;
                break;
            }
        }
        if start == hi - 1 {
            eigs.push(h[hi - 1][hi - 1]);
            hi -= 1;
            stagnation = 0;
            continue;
        }
        spent += 1;
        if spent > budget {
            // conditioning pathologies land here; hand back the diagonal of
            // the unconverged block and let Newton polish sort it out
            for k in start..hi {
                eigs.push(h[k][k]);
            }
            break;
        }
        stagnation += 1;
        let shift = if stagnation % 12 == 0 {
            // exceptional shift to break rare cycles
            h[hi - 1][hi - 1] + Complex64::new(1.5, 0.75) * h[hi - 1][hi - 2].norm()
        } else {
            wilkinson_shift(
                h[hi - 2][hi - 2],
                h[hi - 2][hi - 1],
                h[hi - 1][hi - 2],
                h[hi - 1][hi - 1],
            )
        };
        qr_step(&mut h, start, hi, shift);
    }
    eigs
}

/// Eigenvalue of the trailing 2x2 closest to its bottom-right entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det * 4.0).sqrt();
    let l1 = (tr + disc) * 0.5;
    let l2 = (tr - disc) * 0.5;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit QR sweep on the active block [start, hi).
fn qr_step(h: &mut [Vec<Complex64>], start: usize, hi: usize, shift: Complex64) {
    let m = hi - start;
    if m < 2 {
        return;
    }
    // H <- H - shift I; QR by Givens on the subdiagonal; H <- RQ + shift I
    for k in start..hi {
        h[k][k] -= shift;
    }
    let mut rots = Vec::with_capacity(m - 1);
    for k in start..hi - 1 {
        let f = h[k][k];
        let g = h[k + 1][k];
        let (c, s) = givens(f, g);
        rots.push((c, s));
        for j in k..hi {
            let a = h[k][j];
            let b = h[k + 1][j];
            h[k][j] = a * c + b * s;
            h[k + 1][j] = -a * s.conj() + b * c;
        }
        h[k + 1][k] = Complex64::new(0.0, 0.0);
    }
    for (k, (c, s)) in (start..hi - 1).zip(rots) {
        for i in start..=(k + 1) {
            let a = h[i][k];
            let b = h[i][k + 1];
            h[i][k] = a * c + b * s.conj();
            h[i][k + 1] = -a * s + b * c;
        }
    }
    for k in start..hi {
        h[k][k] += shift;
    }
}

/// Complex Givens rotation zeroing g: returns (c real, s) with
/// [c, s; -conj(s), c] [f; g] = [r; 0].
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let fn_ = f.norm();
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if fn_ == 0.0 {
        return (0.0, g.conj() / gn);
    }
    let r = fn_.hypot(gn);
    let c = fn_ / r;
    let s = (f / fn_) * g.conj() / r;
    (c, s)
}

/// Collapse raw eigenvalue clouds into (root, multiplicity) pairs.
///
/// Starts from the full set and recursively splits: a cluster of size m is
/// accepted as an m-fold root when Newton on the (m-1)-st derivative
/// converges to a point where all derivatives below order m vanish to a
/// relative 1e-8; otherwise it is bipartitioned at its widest gap.
pub(crate) fn resolve_multiplicities(
    coeffs: &[Complex64],
    raw: &[Complex64],
) -> Vec<(Complex64, usize)> {
    let mut derivs: Vec<Vec<Complex64>> = vec![coeffs.to_vec()];
    for _ in 0..raw.len() {
        let d = poly_deriv(derivs.last().unwrap());
        derivs.push(d);
    }
    let mut sorted: Vec<Complex64> = raw.to_vec();
    sorted.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let mut out = Vec::new();
    resolve(&derivs, sorted, &mut out);
    out
}

fn residual_ok(derivs: &[Vec<Complex64>], order: usize, w: Complex64) -> bool {
    let c = &derivs[order];
    let scale: f64 = c
        .iter()
        .enumerate()
        .map(|(j, cj)| cj.norm() * w.norm().max(1.0).powi(j as i32))
        .sum();
    poly_eval(c, w).norm() <= 1e-8 * (scale + 1e-300)
}

fn resolve(derivs: &[Vec<Complex64>], cluster: Vec<Complex64>, out: &mut Vec<(Complex64, usize)>) {
    let m = cluster.len();
    if m == 0 {
        return;
    }
    if m == 1 {
        let w = newton_polish(&derivs[0], &derivs[1], cluster[0], 30);
        out.push((w, 1));
        return;
    }
    let mean = cluster.iter().sum::<Complex64>() / m as f64;
    let center = newton_polish(&derivs[m - 1], &derivs[m], mean, 60);
    if (0..m).all(|i| residual_ok(derivs, i, center)) {
        out.push((center, m));
        return;
    }
    // split at the widest pair and partition by proximity
    let (mut pi, mut pj, mut best) = (0, 1, -1.0);
    for i in 0..m {
        for j in i + 1..m {
            let d = (cluster[i] - cluster[j]).norm();
            if d > best {
                best = d;
                pi = i;
                pj = j;
            }
        }
    }
    let (ci, cj) = (cluster[pi], cluster[pj]);
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for w in cluster {
        if (w - ci).norm() <= (w - cj).norm() {
            left.push(w);
        } else {
            right.push(w);
        }
    }
    resolve(derivs, left, out);
    resolve(derivs, right, out);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
        let mut p = vec![c(1.0, 0.0)];
        for &r in roots {
            let mut q = vec![c(0.0, 0.0); p.len() + 1];
            for (i, &pi) in p.iter().enumerate() {
                q[i + 1] += pi;
                q[i] -= pi * r;
            }
            p = q;
        }
        p
    }

    #[test]
    fn simple_roots_are_recovered() {
        let truth = [c(1.0, 0.0), c(-0.5, 2.0), c(0.3, -0.7), c(-2.0, -1.0)];
        let p = poly_from_roots(&truth);
        let mut got = roots(&p, 1e-14);
        assert_eq!(got.len(), truth.len());
        let d = poly_deriv(&p);
        for g in got.iter_mut() {
            *g = newton_polish(&p, &d, *g, 20);
        }
        for t in truth {
            let err = got.iter().map(|g| (g - t).norm()).fold(f64::MAX, f64::min);
            assert!(err < 1e-10, "missed root {t}: err {err}");
        }
    }

    #[test]
    fn zero_roots_and_degree_trimming() {
        // w^2 (w - 3) plus a negligible cubic tail coefficient
        let p = [c(0.0, 0.0), c(0.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)];
        let got = roots(&p, 1e-14);
        assert_eq!(got.len(), 3);
        assert_eq!(got.iter().filter(|w| w.norm() == 0.0).count(), 2);
        assert!(got.iter().any(|w| (w - c(3.0, 0.0)).norm() < 1e-10));
    }

    #[test]
    fn multiplicities_are_resolved() {
        // (w - 1)^4 (w + 2i)
        let truth = [c(1.0, 0.0); 4];
        let mut all = truth.to_vec();
        all.push(c(0.0, -2.0));
        let p = poly_from_roots(&all);
        let raw = roots(&p, 1e-14);
        let mut resolved = resolve_multiplicities(&p, &raw);
        resolved.sort_by_key(|(_, m)| *m);
        assert_eq!(resolved.len(), 2);
        assert_eq!(resolved[0].1, 1);
        assert!((resolved[0].0 - c(0.0, -2.0)).norm() < 1e-8);
        assert_eq!(resolved[1].1, 4);
        assert!((resolved[1].0 - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn full_degeneracy_collapses_to_one_root() {
        // (w - (0.5 + 0.5i))^8
        let r = c(0.5, 0.5);
        let p = poly_from_roots(&[r; 8]);
        let raw = roots(&p, 1e-14);
        assert_eq!(raw.len(), 8);
        let resolved = resolve_multiplicities(&p, &raw);
        assert_eq!(resolved.len(), 1);
        assert_eq!(resolved[0].1, 8);
        assert!((resolved[0].0 - r).norm() < 1e-9);
    }

    #[test]
    fn close_but_distinct_roots_stay_distinct() {
        let truth = [c(0.4, 0.0), c(0.4 + 3e-4, 0.0), c(-1.0, 1.0)];
        let p = poly_from_roots(&truth);
        let raw = roots(&p, 1e-14);
        let resolved = resolve_multiplicities(&p, &raw);
        assert_eq!(resolved.len(), 3);
        assert!(resolved.iter().all(|&(_, m)| m == 1));
    }
}
