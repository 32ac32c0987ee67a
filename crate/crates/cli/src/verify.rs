//! Invariant suites behind the `verify` subcommand.

use num_complex::Complex64;
use serde::Serialize;

use nodal_core::harmonics::{basis_row, inner_product, sample_with_rng, zonal_eval};
use nodal_core::mean_measure::{
    immersion_scale, immersion_scale_numeric, mc_mean_common_zeros, mc_mean_nodal_length,
    mean_measure_closed, omega, MeanSpec,
};
use nodal_core::nodal_geometry::{
    common_zeros, crofton_length, inner_radius, nodal_length, trace_nodal,
};
use nodal_core::nullcone::{
    bilinear3, detcc_closed, detcc_direct, inner_product_identity, kappa, poles, reconstruct,
    ComplexHarmonic,
};
use nodal_core::rng::{normal_vector, random_sphere_point, stream_rng};
use nodal_core::{legendre, RealHarmonic, SphereMesh, SpherePoint, ZonalKernel};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn check(name: &str, residual: f64, threshold: f64) -> Check {
    Check {
        name: name.to_string(),
        residual,
        threshold,
        pass: residual <= threshold,
    }
}

fn finish(suite: &str, checks: Vec<Check>) -> SuiteReport {
    let pass = checks.iter().all(|c| c.pass);
    SuiteReport {
        suite: suite.to_string(),
        checks,
        pass,
    }
}

pub fn kernel_suite(seed: u64) -> SuiteReport {
    let mut r = stream_rng(seed, 0);
    let mut reproducing: f64 = 0.0;
    let mut addition: f64 = 0.0;
    let mut parseval: f64 = 0.0;
    for case in 0..200 {
        let n = 1 + case % 8;
        let u = sample_with_rng(n, &mut r);
        let a = random_sphere_point(&mut r);
        let x = random_sphere_point(&mut r);
        let phi_a = ZonalKernel::new(n).expand(&a);
        reproducing =
            reproducing.max((inner_product(&u, &phi_a).unwrap() - u.eval(&a)).abs());
        let lhs: f64 = basis_row(n, &a)
            .iter()
            .zip(&basis_row(n, &x))
            .map(|(p, q)| p * q)
            .sum();
        addition = addition.max((lhs - zonal_eval(n, &a, &x)).abs());
        let coeff_sq: f64 = u.coeffs().iter().map(|c| c * c).sum();
        parseval = parseval.max((inner_product(&u, &u).unwrap() - coeff_sq).abs());
    }
    finish(
        "kernel",
        vec![
            check("reproducing-property", reproducing, 1e-9),
            check("addition-theorem", addition, 1e-9),
            check("parseval", parseval, 1e-10),
        ],
    )
}

pub fn nullcone_suite(seed: u64) -> SuiteReport {
    let mut r = stream_rng(seed, 1);
    let mut membership: f64 = 0.0;
    for _ in 0..1000 {
        let g = normal_vector(&mut r, 4);
        let z = [Complex64::new(g[0], g[1]), Complex64::new(g[2], g[3])];
        let k = kappa(z);
        let scale = (z[0].norm_sqr() + z[1].norm_sqr()).powi(2).max(1e-30);
        membership = membership.max(bilinear3(k, k).norm() / scale);
    }

    let mut identity: f64 = 0.0;
    for _ in 0..100 {
        let g = normal_vector(&mut r, 8);
        let a = [Complex64::new(g[0], g[1]), Complex64::new(g[2], g[3])];
        let b = [Complex64::new(g[4], g[5]), Complex64::new(g[6], g[7])];
        let (lhs, rhs) = inner_product_identity(a, b);
        identity = identity.max((lhs - rhs).norm() / (1.0 + lhs.norm()));
    }

    let mut detcc: f64 = 0.0;
    for k in 1..=4usize {
        for _ in 0..50 {
            let draw = |r: &mut _| -> Vec<[Complex64; 2]> {
                (0..=k)
                    .map(|_| {
                        let g = normal_vector(r, 4);
                        [Complex64::new(g[0], g[1]), Complex64::new(g[2], g[3])]
                    })
                    .collect()
            };
            let a = draw(&mut r);
            let b = draw(&mut r);
            let cf = detcc_closed(&a, &b);
            let df = detcc_direct(&a, &b);
            detcc = detcc.max((cf - df).norm() / (1.0 + df.norm()));
        }
    }

    let mut roundtrip: f64 = 0.0;
    for n in 1..=5usize {
        for _ in 0..5 {
            let re = sample_with_rng(n, &mut r);
            let im = sample_with_rng(n, &mut r);
            let p = ComplexHarmonic::from_parts(&re, &im).unwrap();
            let ps = poles(&p).unwrap();
            let q = reconstruct(&ps, n, 0).unwrap();
            let ip: Complex64 = p
                .coeffs()
                .iter()
                .zip(q.coeffs())
                .map(|(a, b)| a * b.conj())
                .sum();
            let cos = ip.norm() / (p.norm() * q.norm());
            roundtrip = roundtrip.max(1.0 - cos);
        }
    }

    finish(
        "nullcone",
        vec![
            check("null-cone-membership", membership, 1e-14),
            check("bilinear-identity", identity, 1e-12),
            check("structured-determinant", detcc, 1e-9),
            check("pole-round-trip", roundtrip, 1e-8),
        ],
    )
}

pub fn geometry_suite(seed: u64) -> SuiteReport {
    let mesh = SphereMesh::new(6);
    let tau = std::f64::consts::TAU;

    let equator = RealHarmonic::basis_vector(1, 0).unwrap();
    let eq_len = nodal_length(&trace_nodal(&equator, &mesh).unwrap());
    let c_equator = check("equator-length", (eq_len - tau).abs() / tau, 1e-3);

    let sectoral = RealHarmonic::basis_vector(3, 3).unwrap();
    let sec_len = nodal_length(&trace_nodal(&sectoral, &mesh).unwrap());
    let c_sectoral = check("sectoral-length", (sec_len - 3.0 * tau).abs() / (3.0 * tau), 5e-3);

    let mut r = stream_rng(seed, 2);
    let u = sample_with_rng(4, &mut r);
    let mesh_len = nodal_length(&trace_nodal(&u, &mesh).unwrap());
    let (est, stderr) = crofton_length(&u, 2000, seed ^ 0x51ab);
    let tol = (0.01 * mesh_len).max(3.0 * stderr);
    let c_crofton = check(
        "crofton-vs-mesh",
        (est - mesh_len).abs() / tol,
        1.0,
    );

    let n = 2usize;
    let zmesh = SphereMesh::for_degree(n);
    let a = SpherePoint::new(1.0, 0.0, 0.0).unwrap();
    let zonal = ZonalKernel::new(n).expand(&a);
    // v = Re (x2 + i x3)^n, projected through quadrature
    let v = {
        let mut coeffs = vec![0.0; 2 * n + 1];
        for (x, w) in nodal_core::harmonics::sphere_quadrature(2 * n) {
            let val = Complex64::new(x.y(), x.z()).powu(n as u32).re;
            for (c, y) in coeffs.iter_mut().zip(&basis_row(n, &x)) {
                *c += w * val * y;
            }
        }
        RealHarmonic::new(n, coeffs).unwrap()
    };
    let cz = common_zeros(&zonal, &v, &zmesh).unwrap();
    let c_bezout = check(
        "bezout-equality-count",
        (cz.count() as f64 - (2 * n * n) as f64).abs(),
        0.0,
    );

    let inr = inner_radius(&ZonalKernel::new(4).expand(&a), &mesh).unwrap();
    let theta = legendre::roots(4).theta_n;
    let c_inr = check(
        "zonal-inner-radius",
        (inr - theta).abs(),
        mesh.max_edge_arc(),
    );

    finish(
        "geometry",
        vec![c_equator, c_sectoral, c_crofton, c_bezout, c_inr],
    )
}

pub fn mean_suite(seed: u64) -> SuiteReport {
    let c_omega = check(
        "surface-measures",
        (omega(0) - 2.0)
            .abs()
            .max((omega(1) - std::f64::consts::TAU).abs())
            .max((omega(2) - 4.0 * std::f64::consts::PI).abs()),
        1e-12,
    );
    let spec = MeanSpec::new(2, vec![2, 2]).unwrap();
    let c_closed = check("closed-form-2-2", (mean_measure_closed(&spec) - 6.0).abs(), 1e-12);

    let mut r = stream_rng(seed, 3);
    let mut homothety: f64 = 0.0;
    for n in 1..=6usize {
        let a = random_sphere_point(&mut r);
        let v = random_sphere_point(&mut r).vector();
        if v.cross(&a.vector()).norm() < 1e-6 {
            continue;
        }
        let s = immersion_scale_numeric(n, &a, &v).unwrap();
        homothety = homothety.max((s - immersion_scale(n, 2)).abs() / immersion_scale(n, 2));
    }
    let c_homothety = check("immersion-scale", homothety, 1e-4);

    let exact = mc_mean_nodal_length(1, 50, seed);
    let c_exact = check(
        "degree-one-length",
        (exact.mean - std::f64::consts::TAU).abs() + exact.stderr,
        1e-12,
    );

    let zeros = mc_mean_common_zeros(2, 2, 300, seed).unwrap();
    let c_zeros = check(
        "mean-common-zeros-2-2",
        (zeros.mean - 6.0).abs() / (3.0 * zeros.stderr + 1e-12),
        1.0,
    );

    finish(
        "mean",
        vec![c_omega, c_closed, c_homothety, c_exact, c_zeros],
    )
}

pub fn run_suites(which: &str, seed: u64) -> Vec<SuiteReport> {
    match which {
        "kernel" => vec![kernel_suite(seed)],
        "nullcone" => vec![nullcone_suite(seed)],
        "geometry" => vec![geometry_suite(seed)],
        "mean" => vec![mean_suite(seed)],
        "all" => vec![
            kernel_suite(seed),
            nullcone_suite(seed),
            geometry_suite(seed),
            mean_suite(seed),
        ],
        other => panic!("unknown suite {other}"),
    }
}
