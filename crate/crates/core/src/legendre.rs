//! Legendre polynomials: evaluation, derivatives, roots, Gauss quadrature,
//! and the angle of the smallest zonal circle with its Bessel-zero bound.

/// First positive zero of the Bessel function J_0.
pub const BESSEL_J0_FIRST_ZERO: f64 = 2.404825557695773;

/// P_n(t) by the three-term recurrence. Valid for any real t.
pub fn eval(n: usize, t: f64) -> f64 {
    eval_pair(n, t).0
}

/// (P_n(t), P_n'(t)), both by three-term recurrences.
pub fn eval_pair(n: usize, t: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, t);
    let (mut d_prev, mut d) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * t * p - kf * p_prev) / (kf + 1.0);
        let d_next = ((2.0 * kf + 1.0) * (p + t * d) - kf * d_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// The n simple roots of P_n together with theta_n = arccos(largest root).
#[derive(Clone, Debug)]
pub struct LegendreRoots {
    pub degree: usize,
    /// Strictly increasing, symmetric about 0.
    pub roots: Vec<f64>,
    /// Angular radius of the smallest circle in the zonal nodal set.
    pub theta_n: f64,
}

/// All roots of P_n, Newton-polished from the Chebyshev-angle initial
/// guesses cos(pi (k - 1/4) / (n + 1/2)).
///
/// Panics if Newton fails to converge within 100 iterations; the roots are
/// simple and the guesses land in their basins, so that is a bug, not a
/// property of the input.
pub fn roots(n: usize) -> LegendreRoots {
    assert!(n >= 1, "degree must be positive");
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let mut t = (std::f64::consts::PI * (k as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..100 {
            let (p, d) = eval_pair(n, t);
            let step = p / d;
            t -= step;
            if step.abs() < 1e-14 {
                converged = true;
                break;
            }
        }
        assert!(
            converged,
            "Newton did not converge for root {k} of P_{n}; this is a bug"
        );
        out.push(t);
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Final polish: |P'| reaches ~n^2 at the extreme roots, so the last ulp
    // matters. Pick the float neighbor minimizing |P_n|, then mirror; the
    // recurrence value at -t is the exactly negated/copied value at t.
    for i in n / 2..n {
        let t = out[i];
        let best = [t, t.next_down(), t.next_up()]
            .into_iter()
            .min_by(|&x, &y| {
                eval(n, x)
                    .abs()
                    .partial_cmp(&eval(n, y).abs())
                    .unwrap()
            })
            .unwrap();
        out[i] = best;
        out[n - 1 - i] = -best;
    }
    if n % 2 == 1 {
        out[n / 2] = 0.0;
    }
    let theta_n = out[n - 1].clamp(-1.0, 1.0).acos();
    LegendreRoots {
        degree: n,
        roots: out,
        theta_n,
    }
}

/// theta_n, its bound j_0 / (n + 1/2), and whether 0 < theta_n < bound.
pub fn theta_bound_check(n: usize) -> (f64, f64, bool) {
    let theta = roots(n).theta_n;
    let bound = BESSEL_J0_FIRST_ZERO / (n as f64 + 0.5);
    (theta, bound, theta > 0.0 && theta < bound)
}

/// Gauss-Legendre nodes (ascending) and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let r = roots(n);
    let weights = r
        .roots
        .iter()
        .map(|&t| {
            let (_, d) = eval_pair(n, t);
            2.0 / ((1.0 - t * t) * d * d)
        })
        .collect();
    (r.roots, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eval_known_values() {
        // 2 P_3(t) = 5 t^3 - 3 t
        assert!((eval(3, 0.5) - (-0.4375)).abs() < 1e-15);
        // recurrence by hand: P_2(0) = -1/2, P_4(0) = (7*0*P_3 - 3*P_2)/4 = 3/8
        assert!((eval(4, 0.0) - 0.375).abs() < 1e-15);
        for n in 0..60 {
            assert!((eval(n, 1.0) - 1.0).abs() < 1e-13, "P_{n}(1)");
        }
    }

    #[test]
    fn roots_small_degrees() {
        assert_eq!(roots(1).roots, vec![0.0]);
        let r2 = roots(2).roots;
        let s = (1.0f64 / 3.0).sqrt();
        assert!((r2[0] + s).abs() < 1e-14 && (r2[1] - s).abs() < 1e-14);
        let r3 = roots(3).roots;
        let q = 0.6f64.sqrt();
        assert!((r3[0] + q).abs() < 1e-14);
        assert_eq!(r3[1], 0.0);
        assert!((r3[2] - q).abs() < 1e-14);
    }

    #[test]
    fn roots_are_simple_symmetric_and_exact_up_to_degree_100() {
        for n in 1..=100 {
            let r = roots(n);
            assert_eq!(r.roots.len(), n);
            for w in r.roots.windows(2) {
                assert!(w[0] < w[1], "roots not strictly increasing at n={n}");
            }
            for (i, &t) in r.roots.iter().enumerate() {
                assert_eq!(t, -r.roots[n - 1 - i], "asymmetric root set at n={n}");
                let (p, d) = eval_pair(n, t);
                assert!(p.abs() < 1e-13, "|P_{n}({t})| = {}", p.abs());
                assert!(d.abs() > 1e-6, "root not simple at n={n}");
            }
        }
    }

    #[test]
    fn theta_bound_examples_and_monotonicity() {
        let (t1, b1, ok1) = theta_bound_check(1);
        assert!((t1 - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
        assert!((b1 - 1.6032170384638486).abs() < 1e-14);
        assert!(ok1);

        let (t2, b2, ok2) = theta_bound_check(2);
        assert!((t2 - (1.0f64 / 3.0f64.sqrt()).acos()).abs() < 1e-14);
        assert!((t2 - 0.9553166181245093).abs() < 1e-12);
        assert!((b2 - 0.9619302230783092).abs() < 1e-12);
        assert!(ok2);

        let (t3, b3, ok3) = theta_bound_check(3);
        assert!((t3 - 0.6847192030022829).abs() < 1e-12);
        assert!((b3 - 0.6870930164845065).abs() < 1e-12);
        assert!(ok3);

        let mut prev = 0.0;
        for n in 1..=100 {
            let (t, _, ok) = theta_bound_check(n);
            assert!(ok, "theta bound violated at n={n}");
            let nt = n as f64 * t;
            assert!(nt > prev - 1e-9, "n*theta_n not increasing at n={n}");
            assert!(nt < BESSEL_J0_FIRST_ZERO);
            prev = nt;
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // Oracle: monomial integrals over [-1,1] are 2/(k+1) for even k.
        let (x, w) = gauss_legendre(8);
        for k in 0..=15usize {
            let q: f64 = x
                .iter()
                .zip(&w)
                .map(|(&t, &wi)| wi * t.powi(k as i32))
                .sum();
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((q - exact).abs() < 1e-13, "degree {k}: {q} vs {exact}");
        }
    }

    proptest! {
        #[test]
        fn parity(n in 0usize..40, t in -1.0f64..1.0) {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let lhs = eval(n, -t);
            let rhs = sign * eval(n, t);
            prop_assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + rhs.abs()));
        }
    }
}
