//! Acceptance suite: one test per criterion, each printing a pass line with
//! its measured residuals and runtime. Run with `--nocapture` to see the
//! lines for passing criteria.

use std::time::Instant;

use num_complex::Complex64;

use nodal_core::harmonics::{
    basis_row, inner_product, sample_with_rng, sphere_quadrature, zonal_eval,
};
use nodal_core::legendre;
use nodal_core::mean_measure::{
    immersion_scale, immersion_scale_numeric, mc_mean_common_zeros,
    mc_mean_nodal_length_with_circles,
};
use nodal_core::nodal_geometry::{
    common_zeros, critical_points, crofton_length, inner_radius, nodal_length, trace_nodal,
    NodalCurveSet,
};
use nodal_core::nullcone::{
    detcc_closed, detcc_direct, inner_product_identity, poles, reconstruct, ComplexHarmonic,
};
use nodal_core::rng::{normal_vector, random_sphere_point, stream_rng};
use nodal_core::{RealHarmonic, SphereMesh, SpherePoint, ZonalKernel};

fn finish(name: &str, start: Instant, limit_s: f64, detail: &str) {
    let dt = start.elapsed().as_secs_f64();
    println!("[acceptance] {name}: PASS ({detail}; {dt:.1}s)");
    assert!(
        dt < limit_s,
        "{name} exceeded its runtime budget: {dt:.1}s >= {limit_s}s"
    );
}

/// Project a pointwise function onto the degree-n eigenspace by quadrature.
fn project_fn(n: usize, f: impl Fn(&SpherePoint) -> f64) -> RealHarmonic {
    let mut coeffs = vec![0.0; 2 * n + 1];
    for (x, w) in sphere_quadrature(2 * n) {
        let val = f(&x);
        for (c, y) in coeffs.iter_mut().zip(&basis_row(n, &x)) {
            *c += w * val * y;
        }
    }
    RealHarmonic::new(n, coeffs).unwrap()
}

fn sectoral(n: usize, real_part: bool) -> RealHarmonic {
    RealHarmonic::basis_vector(n, if real_part { n as i64 } else { -(n as i64) }).unwrap()
}

fn complex_cosine(u: &[Complex64], v: &[Complex64]) -> f64 {
    let ip: Complex64 = u.iter().zip(v).map(|(a, b)| a * b.conj()).sum();
    let nu: f64 = u.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    ip.norm() / (nu * nv)
}

fn real_cosine(u: &RealHarmonic, v: &RealHarmonic) -> f64 {
    let ip: f64 = u.coeffs().iter().zip(v.coeffs()).map(|(a, b)| a * b).sum();
    ip.abs() / (u.norm() * v.norm())
}

/// Draw until the trace at this mesh is regular; random harmonics are
/// regular off a measure-zero set, so this rarely loops.
fn sample_regular(
    n: usize,
    mesh: &SphereMesh,
    r: &mut rand_chacha::ChaCha8Rng,
) -> (RealHarmonic, NodalCurveSet) {
    loop {
        let u = sample_with_rng(n, r);
        let curves = trace_nodal(&u, mesh).unwrap();
        if curves.regular {
            return (u, curves);
        }
    }
}

#[test]
fn criterion_01_kernel_suite() {
    let start = Instant::now();
    let mut r = stream_rng(101, 0);
    let mut worst_repro: f64 = 0.0;
    let mut worst_add: f64 = 0.0;
    for case in 0..200 {
        let n = 1 + case % 8;
        let u = sample_with_rng(n, &mut r);
        let a = random_sphere_point(&mut r);
        let x = random_sphere_point(&mut r);
        let phi_a = ZonalKernel::new(n).expand(&a);
        let repro = (inner_product(&u, &phi_a).unwrap() - u.eval(&a)).abs();
        worst_repro = worst_repro.max(repro);
        let lhs: f64 = basis_row(n, &a)
            .iter()
            .zip(&basis_row(n, &x))
            .map(|(p, q)| p * q)
            .sum();
        worst_add = worst_add.max((lhs - zonal_eval(n, &a, &x)).abs());
    }
    assert!(worst_repro < 1e-9, "reproducing residual {worst_repro}");
    assert!(worst_add < 1e-9, "addition-theorem residual {worst_add}");
    finish(
        "C01 kernel-suite",
        start,
        5.0,
        &format!("reproducing {worst_repro:.2e}, addition {worst_add:.2e}"),
    );
}

#[test]
fn criterion_02_prescribed_zeros() {
    let start = Instant::now();
    let mut r = stream_rng(102, 0);
    let mut worst_vanish: f64 = 0.0;
    for case in 0..100 {
        let n = 1 + case % 5;
        let k = 1 + (case / 5) % (2 * n);
        let pts: Vec<_> = (0..k).map(|_| random_sphere_point(&mut r)).collect();
        let y = random_sphere_point(&mut r);
        let v = nodal_core::prescribed_zeros::harmonic_vanishing_at(&pts, n, &y).unwrap();
        let norm = v.norm();
        for p in &pts {
            worst_vanish = worst_vanish.max(v.eval(p).abs() / norm);
        }
    }
    assert!(worst_vanish < 1e-8, "vanishing residual {worst_vanish}");

    let mut worst_cos: f64 = 1.0;
    for n in 2..=5usize {
        for _ in 0..5 {
            let pts: Vec<_> = (0..2 * n).map(|_| random_sphere_point(&mut r)).collect();
            let y1 = random_sphere_point(&mut r);
            let y2 = random_sphere_point(&mut r);
            let v1 = nodal_core::prescribed_zeros::harmonic_vanishing_at(&pts, n, &y1).unwrap();
            let v2 = nodal_core::prescribed_zeros::harmonic_vanishing_at(&pts, n, &y2).unwrap();
            worst_cos = worst_cos.min(real_cosine(&v1, &v2));
        }
    }
    assert!(worst_cos > 1.0 - 1e-8, "uniqueness cosine {worst_cos}");
    finish(
        "C02 prescribed-zeros",
        start,
        10.0,
        &format!("vanishing {worst_vanish:.2e}, uniqueness 1-cos {:.2e}", 1.0 - worst_cos),
    );
}

#[test]
fn criterion_03_nullcone_round_trip() {
    let start = Instant::now();
    let mut r = stream_rng(103, 0);
    let mut worst_cos: f64 = 1.0;
    for n in 1..=5usize {
        for _ in 0..50 {
            let re = sample_with_rng(n, &mut r);
            let im = sample_with_rng(n, &mut r);
            let p = ComplexHarmonic::from_parts(&re, &im).unwrap();
            let ps = poles(&p).unwrap();
            let q = reconstruct(&ps, n, 0).unwrap();
            worst_cos = worst_cos.min(complex_cosine(p.coeffs(), q.coeffs()));
        }
    }
    assert!(worst_cos >= 1.0 - 1e-8, "round-trip cosine {worst_cos}");

    let mut worst_det: f64 = 0.0;
    for k in 1..=4usize {
        for _ in 0..50 {
            let mut draw = || -> Vec<[Complex64; 2]> {
                (0..=k)
                    .map(|_| {
                        let g = normal_vector(&mut r, 4);
                        [Complex64::new(g[0], g[1]), Complex64::new(g[2], g[3])]
                    })
                    .collect()
            };
            let a = draw();
            let b = draw();
            let cf = detcc_closed(&a, &b);
            let df = detcc_direct(&a, &b);
            worst_det = worst_det.max((cf - df).norm() / (1.0 + df.norm()));
        }
    }
    assert!(worst_det < 1e-9, "structured determinant residual {worst_det}");

    let mut worst_id: f64 = 0.0;
    for _ in 0..100 {
        let g = normal_vector(&mut r, 8);
        let a = [Complex64::new(g[0], g[1]), Complex64::new(g[2], g[3])];
        let b = [Complex64::new(g[4], g[5]), Complex64::new(g[6], g[7])];
        let (lhs, rhs) = inner_product_identity(a, b);
        worst_id = worst_id.max((lhs - rhs).norm() / (1.0 + lhs.norm()));
    }
    assert!(worst_id < 1e-12, "cone identity residual {worst_id}");
    finish(
        "C03 nullcone-round-trip",
        start,
        30.0,
        &format!(
            "1-cos {:.2e}, detcc {worst_det:.2e}, identity {worst_id:.2e}",
            1.0 - worst_cos
        ),
    );
}

#[test]
fn criterion_04_sharp_length_equality() {
    let start = Instant::now();
    let mesh = SphereMesh::new(6);
    let mut detail = String::new();
    for n in [2usize, 3, 5] {
        let psi = sectoral(n, true);
        let expected = std::f64::consts::TAU * n as f64;
        let len = nodal_length(&trace_nodal(&psi, &mesh).unwrap());
        let rel = (len - expected).abs() / expected;
        assert!(rel < 5e-3, "n={n}: mesh length {len} vs {expected}");
        let (est, stderr) = crofton_length(&psi, 10_000, 104);
        assert!(
            (est - expected).abs() <= 3.0 * stderr + 1e-9,
            "n={n}: crofton {est} vs {expected} (stderr {stderr})"
        );
        detail.push_str(&format!("n={n} mesh {rel:.1e} mc {est:.4}; "));
    }
    finish("C04 sharp-length-equality", start, 60.0, detail.trim_end());
}

#[test]
fn criterion_05_length_bounds() {
    let start = Instant::now();
    let mesh = SphereMesh::new(6);
    let mut r = stream_rng(105, 0);
    let tau = std::f64::consts::TAU;
    let mut lo_margin: f64 = f64::MAX;
    let mut hi_margin: f64 = f64::MAX;
    for n in 2..=8usize {
        let lower = tau / legendre::BESSEL_J0_FIRST_ZERO * (n as f64 + 0.5);
        let upper = tau * n as f64 * 1.005;
        for _ in 0..50 {
            let (_, curves) = sample_regular(n, &mesh, &mut r);
            let len = nodal_length(&curves);
            assert!(len > lower, "n={n}: length {len} below {lower}");
            assert!(len <= upper, "n={n}: length {len} above {upper}");
            lo_margin = lo_margin.min(len - lower);
            hi_margin = hi_margin.min(upper - len);
        }
    }
    finish(
        "C05 length-bounds",
        start,
        120.0,
        &format!("min margins: lower {lo_margin:.3}, upper {hi_margin:.3}"),
    );
}

#[test]
fn criterion_06_inner_radius() {
    let start = Instant::now();
    let mesh = SphereMesh::new(6);
    let eps = mesh.max_edge_arc();
    let a = SpherePoint::new(0.21, -0.46, 0.86).unwrap();
    let mut worst_zonal: f64 = 0.0;
    for n in 1..=8usize {
        let phi = ZonalKernel::new(n).expand(&a);
        let inr = inner_radius(&phi, &mesh).unwrap();
        let theta = legendre::roots(n).theta_n;
        worst_zonal = worst_zonal.max((inr - theta).abs());
        assert!(
            (inr - theta).abs() < eps,
            "n={n}: zonal inner radius {inr} vs theta {theta}"
        );
    }
    let mut r = stream_rng(106, 0);
    for case in 0..50 {
        let n = 2 + case % 7;
        let (u, _) = sample_regular(n, &mesh, &mut r);
        let inr = inner_radius(&u, &mesh).unwrap();
        let lower = (1.0 / n as f64).asin() - eps;
        let upper = legendre::roots(n).theta_n + eps;
        assert!(
            inr >= lower && inr <= upper,
            "n={n}: inner radius {inr} outside [{lower}, {upper}]"
        );
    }
    finish(
        "C06 inner-radius",
        start,
        120.0,
        &format!("zonal |inr - theta_n| <= {worst_zonal:.2e} (mesh edge {eps:.2e})"),
    );
}

#[test]
fn criterion_07_bezout_equality() {
    let start = Instant::now();
    let a = SpherePoint::new(1.0, 0.0, 0.0).unwrap();
    let mut detail = String::new();
    for n in [2usize, 3, 4] {
        let mesh = SphereMesh::for_degree(n);
        let u = ZonalKernel::new(n).expand(&a);
        let v = project_fn(n, |p| Complex64::new(p.y(), p.z()).powu(n as u32).re);
        let cz = common_zeros(&u, &v, &mesh).unwrap();
        assert!(cz.is_clean(), "n={n}: flagged or unresolved crossings");
        assert_eq!(cz.count(), 2 * n * n, "n={n}");
        detail.push_str(&format!("2n^2@{n}={}; ", cz.count()));

        let s1 = sectoral(n, true);
        let s2 = sectoral(n, false);
        let cz2 = common_zeros(&s1, &s2, &mesh).unwrap();
        assert!(cz2.unresolved.is_empty());
        assert_eq!(cz2.count(), 2, "n={n}: sectoral pair");
    }
    finish("C07 bezout-equality", start, 30.0, detail.trim_end());
}

#[test]
fn criterion_08_bezout_bound() {
    let start = Instant::now();
    let mut r = stream_rng(108, 0);
    let mut support = 0usize;
    let mut total = 0usize;
    for n in 1..=5usize {
        let mesh = SphereMesh::for_degree(n);
        while total < n * 20 {
            let u = sample_with_rng(n, &mut r);
            let v = sample_with_rng(n, &mut r);
            let cz = common_zeros(&u, &v, &mesh).unwrap();
            if !cz.is_clean() {
                continue; // regular pairs only
            }
            assert!(
                cz.count() <= 2 * n * n,
                "n={n}: {} zeros above the Bezout cap",
                cz.count()
            );
            if cz.count() >= 2 * n {
                support += 1;
            }
            total += 1;
        }
    }
    // counts >= 2n are reported as observed support, never asserted
    finish(
        "C08 bezout-bound",
        start,
        180.0,
        &format!("100 pairs under the cap; {support}/{total} at or above 2n"),
    );
}

#[test]
fn criterion_09_critical_points() {
    let start = Instant::now();
    let a = SpherePoint::new(0.31, -0.52, 0.80).unwrap();
    let mesh1 = SphereMesh::for_degree(1);
    let linear = RealHarmonic::new(1, vec![a.y(), a.z(), a.x()]).unwrap();
    let pts = critical_points(&linear, &mesh1, 0).unwrap();
    assert_eq!(pts.len(), 2, "linear harmonic has two critical points");
    for p in &pts {
        assert!(p.dot(&a).abs() > 1.0 - 1e-8);
    }

    let n = 2usize;
    let mesh2 = SphereMesh::for_degree(n);
    let ax = SpherePoint::new(1.0, 0.0, 0.0).unwrap();
    let u = ZonalKernel::new(n).expand(&ax);
    let v = project_fn(n, |p| Complex64::new(p.y(), p.z()).powu(n as u32).re);
    let perturbed = u.add_scaled(&v, 0.05).unwrap();
    let pts2 = critical_points(&perturbed, &mesh2, 0).unwrap();
    assert_eq!(
        pts2.len(),
        2 * (n * n - n + 1),
        "perturbed equality pair at n=2"
    );
    finish(
        "C09 critical-points",
        start,
        30.0,
        &format!("n=1: {}, perturbed n=2: {}", pts.len(), pts2.len()),
    );
}

#[test]
fn criterion_10_bezout_in_the_mean() {
    let start = Instant::now();
    let mut detail = String::new();

    let exact = mc_mean_common_zeros(1, 1, 2000, 110).unwrap();
    assert_eq!(exact.mean, 2.0, "(1,1) mean");
    assert_eq!(exact.stderr, 0.0, "(1,1) variance");
    detail.push_str("zeros(1,1)=2 exact; ");

    for (n1, n2) in [(2usize, 2usize), (1, 3), (3, 3)] {
        let target = (((n1 * (n1 + 1)) * (n2 * (n2 + 1))) as f64).sqrt();
        let est = mc_mean_common_zeros(n1, n2, 2000, 110 + n1 as u64 * 10 + n2 as u64).unwrap();
        assert!(
            (est.mean - target).abs() < 3.0 * est.stderr + 1e-12,
            "zeros ({n1},{n2}): mean {} vs {target} (stderr {}, rejected {})",
            est.mean,
            est.stderr,
            est.rejected
        );
        detail.push_str(&format!(
            "zeros({n1},{n2})={:.3}+-{:.3}; ",
            est.mean, est.stderr
        ));
    }

    for n in [1usize, 3, 5] {
        let lambda = (n * (n + 1)) as f64;
        let target = std::f64::consts::TAU * (lambda / 2.0).sqrt();
        let est = mc_mean_nodal_length_with_circles(n, 1000, 200, 120 + n as u64);
        assert!(
            (est.mean - target).abs() < 3.0 * est.stderr + 1e-9,
            "length n={n}: mean {} vs {target} (stderr {})",
            est.mean,
            est.stderr
        );
        detail.push_str(&format!("len({n})={:.4}+-{:.4}; ", est.mean, est.stderr));
    }
    finish("C10 bezout-in-the-mean", start, 600.0, detail.trim_end());
}

#[test]
fn criterion_11_immersion_scale() {
    let start = Instant::now();
    let mut r = stream_rng(111, 0);
    let mut worst_rel: f64 = 0.0;
    let mut worst_dir: f64 = 0.0;
    for n in 1..=8usize {
        let target = immersion_scale(n, 2);
        let mut probes = Vec::new();
        for _ in 0..20 {
            let a = random_sphere_point(&mut r);
            let v = random_sphere_point(&mut r).vector();
            if v.cross(&a.vector()).norm() < 1e-6 {
                continue;
            }
            let s = immersion_scale_numeric(n, &a, &v).unwrap();
            worst_rel = worst_rel.max((s - target).abs() / target);
            probes.push(s);
        }
        let (lo, hi) = probes
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), &s| (lo.min(s), hi.max(s)));
        worst_dir = worst_dir.max(hi - lo);
    }
    assert!(worst_rel < 1e-4, "immersion scale residual {worst_rel}");
    assert!(worst_dir < 1e-6, "direction dependence {worst_dir}");
    finish(
        "C11 immersion-scale",
        start,
        30.0,
        &format!("rel {worst_rel:.2e}, direction spread {worst_dir:.2e}"),
    );
}

#[test]
fn criterion_12_green_residual() {
    let start = Instant::now();
    let mesh = SphereMesh::new(6);
    let mut r = stream_rng(112, 0);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    for n in 1..=4usize {
        let mut per_degree = 0;
        while per_degree < 5 {
            let u = sample_with_rng(n, &mut r);
            let v = sample_with_rng(n, &mut r);
            if !trace_nodal(&u, &mesh).unwrap().regular {
                continue;
            }
            let res = nodal_core::nodal_geometry::green_residual(&u, &v, &mesh).unwrap();
            assert!(res < 1e-3, "n={n}: residual {res}");
            worst = worst.max(res);
            per_degree += 1;
            done += 1;
        }
    }
    assert_eq!(done, 20);
    finish(
        "C12 green-residual",
        start,
        120.0,
        &format!("max normalized residual {worst:.2e}"),
    );
}

#[test]
fn criterion_13_theta_bound() {
    let start = Instant::now();
    let mut prev = 0.0;
    for n in 1..=100usize {
        let (theta, bound, ok) = legendre::theta_bound_check(n);
        assert!(ok, "n={n}: theta {theta} vs bound {bound}");
        let nt = n as f64 * theta;
        assert!(nt > prev - 1e-9, "n*theta_n not increasing at n={n}");
        assert!(nt < legendre::BESSEL_J0_FIRST_ZERO);
        prev = nt;
    }
    finish(
        "C13 theta-bound",
        start,
        30.0,
        &format!("100*theta_100 = {prev:.6} -> j0 = {}", legendre::BESSEL_J0_FIRST_ZERO),
    );
}
