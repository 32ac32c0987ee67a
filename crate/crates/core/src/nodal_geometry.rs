//! Nodal-curve geometry on S^2.
//!
//! Marching-triangles tracing of N_u on an icosphere, nodal length by mesh
//! polylines and by Crofton (random great circle) sampling, the inner radius
//! of the complement, common zeros of two harmonics under the Bezout cap
//! 2n^2, critical points via rotation derivatives, and the Green-formula
//! residual along nodal contours.

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harmonics::{project_polynomial, HarmonicField, RealHarmonic};
use crate::mesh::SphereMesh;
use crate::poly::TriPoly;
use crate::polyroots;
use crate::rng;
use crate::sphere::SpherePoint;

/// Closed polylines approximating the nodal set of one harmonic.
#[derive(Clone, Debug)]
pub struct NodalCurveSet {
    /// Cyclic vertex lists; the last vertex connects back to the first.
    pub components: Vec<Vec<SpherePoint>>,
    /// False when some refined vertex saw a surface gradient below
    /// 1e-4 * ||u|| * sqrt(lambda_n).
    pub regular: bool,
}

/// A great circle through an orthonormal frame: t -> cos(t) e1 + sin(t) e2.
#[derive(Clone, Debug)]
pub struct GreatCircle {
    e1: Vector3<f64>,
    e2: Vector3<f64>,
}

impl GreatCircle {
    pub fn new(e1: Vector3<f64>, e2: Vector3<f64>) -> Result<Self> {
        if (e1.norm() - 1.0).abs() > 1e-12
            || (e2.norm() - 1.0).abs() > 1e-12
            || e1.dot(&e2).abs() > 1e-12
        {
            return Err(Error::InvalidParameter(
                "great circle frame must be orthonormal".into(),
            ));
        }
        Ok(GreatCircle { e1, e2 })
    }

    /// Uniformly random circle: the kernel of a uniformly random normal.
    pub fn random(r: &mut rand_chacha::ChaCha8Rng) -> Self {
        let normal = rng::random_sphere_point(r);
        let (e1, e2) = normal.tangent_basis();
        GreatCircle { e1, e2 }
    }

    pub fn point_at(&self, t: f64) -> SpherePoint {
        SpherePoint::from_vector(self.e1 * t.cos() + self.e2 * t.sin()).expect("circle point")
    }
}

fn positive(v: f64) -> bool {
    v >= 0.0
}

/// Newton steps along the surface gradient pulling `x` onto the zero set.
fn refine_onto_curve(field: &HarmonicField, x: SpherePoint, steps: usize) -> SpherePoint {
    let mut p = x;
    let guard = 1e-18 * field.norm() * field.norm();
    for _ in 0..steps {
        let f = field.eval(&p);
        let g = field.gradient_tangent(&p);
        let g2 = g.norm_squared();
        if g2 < guard {
            break;
        }
        match SpherePoint::from_vector(p.vector() - g * (f / g2)) {
            Ok(q) => p = q,
            Err(_) => break,
        }
        if f.abs() <= 1e-14 * field.norm() {
            break;
        }
    }
    p
}

/// Marching-triangles extraction of the nodal set.
///
/// Sign changes on edges are interpolated linearly, chained into closed
/// polylines through the triangle adjacency, and each vertex is pulled onto
/// the curve by up to three Newton steps.
pub fn trace_nodal(u: &RealHarmonic, mesh: &SphereMesh) -> Result<NodalCurveSet> {
    let field = HarmonicField::new(u);
    trace_nodal_field(&field, mesh)
}

pub(crate) fn trace_nodal_field(field: &HarmonicField, mesh: &SphereMesh) -> Result<NodalCurveSet> {
    if field.norm() == 0.0 {
        return Err(Error::ZeroHarmonic);
    }
    let values: Vec<f64> = mesh.vertices().iter().map(|v| field.eval(v)).collect();

    // one crossing per mixed edge
    let mut crossing: Vec<Option<SpherePoint>> = vec![None; mesh.edges().len()];
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        let (va, vb) = (values[a as usize], values[b as usize]);
        if positive(va) == positive(vb) {
            continue;
        }
        let t = va / (va - vb);
        let pa = mesh.vertices()[a as usize].vector();
        let pb = mesh.vertices()[b as usize].vector();
        crossing[e] = Some(SpherePoint::from_vector(pa + (pb - pa) * t).expect("edge crossing"));
    }

    // each triangle has zero or exactly two mixed edges
    let mut tri_mixed: Vec<[u32; 2]> = Vec::with_capacity(mesh.triangles().len());
    for ids in mesh.tri_edges() {
        let mut pair = [u32::MAX; 2];
        let mut count = 0;
        for &e in ids {
            if crossing[e as usize].is_some() {
                if count < 2 {
                    pair[count] = e;
                }
                count += 1;
            }
        }
        debug_assert!(count == 0 || count == 2, "odd crossing count in a triangle");
        tri_mixed.push(pair);
    }

    // stitch mixed edges into cycles by walking triangle adjacency
    let mut visited = vec![false; mesh.edges().len()];
    let mut components = Vec::new();
    for start in 0..mesh.edges().len() {
        if crossing[start].is_none() || visited[start] {
            continue;
        }
        let mut loop_edges = Vec::new();
        let mut edge = start as u32;
        let mut prev_tri = u32::MAX;
        loop {
            visited[edge as usize] = true;
            loop_edges.push(edge);
            let [t0, t1] = mesh.edge_triangles()[edge as usize];
            let tri = if t0 == prev_tri { t1 } else { t0 };
            let pair = tri_mixed[tri as usize];
            let next = if pair[0] == edge { pair[1] } else { pair[0] };
            debug_assert_ne!(next, u32::MAX, "curve left through a clean triangle");
            prev_tri = tri;
            edge = next;
            if edge == start as u32 {
                break;
            }
        }
        let polyline: Vec<SpherePoint> = loop_edges
            .iter()
            .map(|&e| refine_onto_curve(field, crossing[e as usize].unwrap(), 3))
            .collect();
        components.push(polyline);
    }

    let lambda = (field.degree() * (field.degree() + 1)) as f64;
    let threshold = 1e-4 * field.norm() * lambda.sqrt();
    let regular = components
        .iter()
        .flatten()
        .all(|p| field.gradient_tangent(p).norm() >= threshold);

    Ok(NodalCurveSet {
        components,
        regular,
    })
}

/// Total geodesic length of all polylines.
pub fn nodal_length(curves: &NodalCurveSet) -> f64 {
    curves
        .components
        .iter()
        .map(|poly| {
            poly.iter()
                .zip(poly.iter().cycle().skip(1))
                .take(poly.len())
                .map(|(p, q)| p.geodesic_distance(q))
                .sum::<f64>()
        })
        .sum()
}

/// Number of zeros of u on the circle, counted via the roots of the
/// restricted trigonometric polynomial.
///
/// The restriction has degree n, so e^{-int} u(t) is a polynomial of degree
/// 2n in w = e^{it}; zeros of u are its roots on the unit circle. Root
/// clusters of odd size cross, even-size clusters are tangencies. This
/// counts correctly even when crossings bunch tightly together, which they
/// do for harmonics with nodal lines through near-antipodal points.
pub fn circle_crossings(field: &HarmonicField, circle: &GreatCircle) -> usize {
    let n = field.degree();
    if n == 0 {
        return 0;
    }
    let m = 2 * n + 2;
    // exact DFT of the degree-n trigonometric restriction
    let mut poly = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
    let samples: Vec<Complex64> = (0..m)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / m as f64;
            let q = Complex64::from_polar(1.0, n as f64 * t);
            q * field.eval(&circle.point_at(t))
        })
        .collect();
    for (j, pj) in poly.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &s) in samples.iter().enumerate() {
            let ang = -std::f64::consts::TAU * (j * k % m) as f64 / m as f64;
            acc += s * Complex64::from_polar(1.0, ang);
        }
        *pj = acc / m as f64;
    }
    let maxc = poly.iter().fold(0.0f64, |acc, c| acc.max(c.norm()));
    if maxc <= 1e-13 * field.norm() {
        // the circle lies inside the nodal set; measure zero, report none
        return 0;
    }

    let roots: Vec<Complex64> = polyroots::roots(&poly, 1e-13)
        .into_iter()
        .filter(|w| w.norm_sqr() != 0.0)
        .collect();

    // On-circle classification via the conjugate-reciprocal symmetry of the
    // real restriction: roots come in pairs (w, 1/conj(w)), and a real zero
    // is its own partner, so the self-pairing test is made relative to the
    // distance to the nearest other root (an off-circle root has its
    // partner at most that far away).
    //
    // Crossings bunch when the circle passes close to a point where several
    // nodal lines meet; inside such a bunch the individual eigenvalues blur
    // by eps^(1/m) and carry no usable radial information, but their
    // centroid is coefficient-accurate. Bunches are therefore merged by
    // single-linkage and classified through their centroid, counting all
    // member roots; on resolved circles both paths give the same answer.
    let m = roots.len();
    let mut cluster_of: Vec<usize> = (0..m).collect();
    loop {
        let mut changed = false;
        for i in 0..m {
            for j in i + 1..m {
                if cluster_of[i] != cluster_of[j] && (roots[i] - roots[j]).norm() < 2e-3 {
                    let (from, to) = (cluster_of[j].max(cluster_of[i]), cluster_of[j].min(cluster_of[i]));
                    for c in cluster_of.iter_mut() {
                        if *c == from {
                            *c = to;
                        }
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut count = 0usize;
    for id in 0..m {
        let members: Vec<usize> = (0..m).filter(|&i| cluster_of[i] == id).collect();
        if members.is_empty() {
            continue;
        }
        let center = members.iter().map(|&i| roots[i]).sum::<Complex64>() / members.len() as f64;
        if center.norm_sqr() == 0.0 {
            continue;
        }
        let nearest_outside = (0..m)
            .filter(|i| !members.contains(i))
            .map(|i| (roots[i] - center).norm())
            .fold(f64::MAX, f64::min);
        let self_dist = (Complex64::new(1.0, 0.0) / center.conj() - center).norm();
        if self_dist <= (2e-5 * (1.0 + center.norm())).max(0.45 * nearest_outside) {
            count += members.len();
        }
    }
    assert!(
        count <= 2 * n,
        "{count} crossings of a degree-{n} harmonic on one circle"
    );
    count
}

/// Crofton estimate of the nodal length: pi times the mean crossing count
/// over `num_circles` uniformly random great circles, with its standard
/// error. Counts are independent across circles (streams of `seed`), so the
/// estimate is reproducible for a fixed seed. Intended for
/// `num_circles >= 100`.
pub fn crofton_length(u: &RealHarmonic, num_circles: usize, seed: u64) -> (f64, f64) {
    let field = HarmonicField::new(u);
    crofton_length_field(&field, num_circles, seed)
}

pub(crate) fn crofton_length_field(
    field: &HarmonicField,
    num_circles: usize,
    seed: u64,
) -> (f64, f64) {
    let counts: Vec<usize> = (0..num_circles)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream_rng(seed, i as u64);
            circle_crossings(field, &GreatCircle::random(&mut r))
        })
        .collect();
    let nf = num_circles as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / nf;
    let var = if num_circles > 1 {
        counts
            .iter()
            .map(|&c| {
                let d = c as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / (nf - 1.0)
    } else {
        0.0
    };
    let pi = std::f64::consts::PI;
    (pi * mean, pi * (var / nf).sqrt())
}

/// Inner radius of the complement of the nodal set: the largest geodesic
/// distance from any mesh vertex to the traced curves.
pub fn inner_radius(u: &RealHarmonic, mesh: &SphereMesh) -> Result<f64> {
    let curves = trace_nodal(u, mesh)?;
    let pts: Vec<Vector3<f64>> = curves
        .components
        .iter()
        .flatten()
        .map(|p| p.vector())
        .collect();
    if pts.is_empty() {
        return Ok(std::f64::consts::PI);
    }

    // spatial hash over the embedding cube for nearest-curve-point queries
    const CELL: f64 = 0.125;
    let key = |v: &Vector3<f64>| -> (i32, i32, i32) {
        (
            (v.x / CELL).floor() as i32,
            (v.y / CELL).floor() as i32,
            (v.z / CELL).floor() as i32,
        )
    };
    let mut grid: std::collections::HashMap<(i32, i32, i32), Vec<u32>> =
        std::collections::HashMap::new();
    for (i, p) in pts.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i as u32);
    }

    let best_chord_sq = |v: &Vector3<f64>| -> f64 {
        let (cx, cy, cz) = key(v);
        let mut best = f64::MAX;
        for ring in 0..64i32 {
            // cells at Chebyshev distance `ring`
            let mut any = false;
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    for dz in -ring..=ring {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != ring {
                            continue;
                        }
                        if let Some(cell) = grid.get(&(cx + dx, cy + dy, cz + dz)) {
                            any = true;
                            for &i in cell {
                                let d = (pts[i as usize] - v).norm_squared();
                                if d < best {
                                    best = d;
                                }
                            }
                        }
                    }
                }
            }
            let _ = any;
            // all unscanned cells are at least (ring * CELL) away
            let lower = ring as f64 * CELL;
            if best <= lower * lower {
                break;
            }
        }
        best
    };

    let max_chord_sq = mesh
        .vertices()
        .par_iter()
        .map(|v| best_chord_sq(&v.vector()))
        .reduce(|| 0.0, f64::max);
    // chord to geodesic
    Ok(2.0 * (0.5 * max_chord_sq.sqrt()).clamp(-1.0, 1.0).asin())
}

/// One common zero of a pair of harmonics.
#[derive(Clone, Copy, Debug)]
pub struct CommonZero {
    pub point: SpherePoint,
    /// The scaled 2x2 Jacobian of (u, v) in the tangent chart has smallest
    /// singular value below 1e-5; the crossing is not reliably transversal.
    pub near_singular: bool,
}

/// Result of a common-zero search.
#[derive(Clone, Debug)]
pub struct CommonZeros {
    pub zeros: Vec<CommonZero>,
    /// Triangles where both harmonics change sign but Newton could not
    /// certify a zero; a finer mesh is needed. Never silently dropped.
    pub unresolved: Vec<u32>,
}

impl CommonZeros {
    pub fn count(&self) -> usize {
        self.zeros.len()
    }

    pub fn regular_count(&self) -> usize {
        self.zeros.iter().filter(|z| !z.near_singular).count()
    }

    pub fn any_near_singular(&self) -> bool {
        self.zeros.iter().any(|z| z.near_singular)
    }

    pub fn is_clean(&self) -> bool {
        !self.any_near_singular() && self.unresolved.is_empty()
    }
}

/// Common zeros of two harmonics by subdivision plus 2-variable Newton in
/// the tangent chart.
///
/// Candidate triangles are those where both sign patterns are mixed within
/// one ring; converged points are deduplicated at geodesic radius 1e-6.
/// When both degrees are n and every zero is transversal with nothing
/// unresolved, the count is asserted against the Bezout cap 2n^2.
pub fn common_zeros(u: &RealHarmonic, v: &RealHarmonic, mesh: &SphereMesh) -> Result<CommonZeros> {
    let uf = HarmonicField::new(u);
    let vf = HarmonicField::new(v);
    common_zeros_fields(&uf, &vf, mesh)
}

pub(crate) fn common_zeros_fields(
    uf: &HarmonicField,
    vf: &HarmonicField,
    mesh: &SphereMesh,
) -> Result<CommonZeros> {
    if uf.norm() == 0.0 || vf.norm() == 0.0 {
        return Err(Error::ZeroHarmonic);
    }
    let mixed = |field: &HarmonicField| -> Vec<bool> {
        let values: Vec<f64> = mesh.vertices().iter().map(|p| field.eval(p)).collect();
        mesh.triangles()
            .iter()
            .map(|&[a, b, c]| {
                let (sa, sb, sc) = (
                    positive(values[a as usize]),
                    positive(values[b as usize]),
                    positive(values[c as usize]),
                );
                !(sa == sb && sb == sc)
            })
            .collect()
    };
    let dilate = |flags: &[bool]| -> Vec<bool> {
        let mut out = flags.to_vec();
        for (t, ids) in mesh.tri_edges().iter().enumerate() {
            if flags[t] {
                continue;
            }
            let near = ids.iter().any(|&e| {
                let [t0, t1] = mesh.edge_triangles()[e as usize];
                flags[t0 as usize] || flags[t1 as usize]
            });
            if near {
                out[t] = true;
            }
        }
        out
    };
    let mixed_u = mixed(uf);
    let mixed_v = mixed(vf);
    let near_u = dilate(&mixed_u);
    let near_v = dilate(&mixed_v);

    let scale_u = uf.norm() * ((uf.degree() * (uf.degree() + 1)) as f64).sqrt().max(1.0);
    let scale_v = vf.norm() * ((vf.degree() * (vf.degree() + 1)) as f64).sqrt().max(1.0);

    let mut zeros: Vec<CommonZero> = Vec::new();
    let mut unresolved = Vec::new();
    for t in 0..mesh.triangles().len() {
        if !(near_u[t] && near_v[t]) {
            continue;
        }
        let strict = mixed_u[t] && mixed_v[t];
        // Strict cells host the crossing (or a close pair of them); start
        // Newton from every sub-triangle where both signs stay mixed after
        // one barycentric refinement, so near-coincident zeros inside one
        // cell are each seen from their own basin.
        let starts = if strict {
            let mut s = subdivision_starts(uf, vf, mesh, t);
            s.push(mesh.triangle_centroid(t));
            s
        } else {
            vec![mesh.triangle_centroid(t)]
        };
        let mut found_zero = false;
        let mut failed = false;
        for start in starts {
            match newton_pair(uf, vf, start, scale_u, scale_v) {
                PairOutcome::Zero(p, near_singular) => {
                    found_zero = true;
                    let duplicate = zeros
                        .iter()
                        .any(|z| z.point.geodesic_distance(&p) < 1e-6);
                    if !duplicate {
                        zeros.push(CommonZero {
                            point: p,
                            near_singular,
                        });
                    }
                }
                // a Newton fixed point with nonzero residual is the closest
                // approach of two non-crossing curves, not a zero
                PairOutcome::NoZero => {}
                PairOutcome::Failed => failed = true,
            }
        }
        if strict && failed && !found_zero {
            unresolved.push(t as u32);
        }
    }

    let out = CommonZeros { zeros, unresolved };
    if uf.degree() == vf.degree() && out.is_clean() {
        let n = uf.degree();
        assert!(
            out.count() <= 2 * n * n,
            "found {} transversal common zeros of two degree-{n} harmonics, above the Bezout cap {}",
            out.count(),
            2 * n * n
        );
    }
    Ok(out)
}

enum PairOutcome {
    Zero(SpherePoint, bool),
    /// Newton reached a fixed point whose residual stayed large: the
    /// closest approach of two curves that do not cross there.
    NoZero,
    Failed,
}

/// Starting points for the pair Newton inside one triangle: centroids of
/// the depth-2 barycentric sub-triangles where both harmonics still change
/// sign.
fn subdivision_starts(
    uf: &HarmonicField,
    vf: &HarmonicField,
    mesh: &SphereMesh,
    t: usize,
) -> Vec<SpherePoint> {
    const L: usize = 4; // 4 rows -> 16 sub-triangles
    let [ia, ib, ic] = mesh.triangles()[t];
    let a = mesh.vertices()[ia as usize].vector();
    let b = mesh.vertices()[ib as usize].vector();
    let c = mesh.vertices()[ic as usize].vector();
    let grid_point = |i: usize, j: usize| -> SpherePoint {
        let w = (
            (L - i - j) as f64 / L as f64,
            i as f64 / L as f64,
            j as f64 / L as f64,
        );
        SpherePoint::from_vector(a * w.0 + b * w.1 + c * w.2).expect("barycentric point")
    };
    let mut signs_u = vec![vec![(false, false); L + 1]; L + 1];
    let mut points = vec![vec![None::<SpherePoint>; L + 1]; L + 1];
    for i in 0..=L {
        for j in 0..=L - i {
            let p = grid_point(i, j);
            signs_u[i][j] = (positive(uf.eval(&p)), positive(vf.eval(&p)));
            points[i][j] = Some(p);
        }
    }
    let mut starts = Vec::new();
    let mut push_mixed = |corners: [(usize, usize); 3]| {
        let su: Vec<bool> = corners.iter().map(|&(i, j)| signs_u[i][j].0).collect();
        let sv: Vec<bool> = corners.iter().map(|&(i, j)| signs_u[i][j].1).collect();
        let mixed_u = !(su[0] == su[1] && su[1] == su[2]);
        let mixed_v = !(sv[0] == sv[1] && sv[1] == sv[2]);
        if mixed_u && mixed_v {
            let sum = corners
                .iter()
                .map(|&(i, j)| points[i][j].unwrap().vector())
                .sum();
            if let Ok(p) = SpherePoint::from_vector(sum) {
                starts.push(p);
            }
        }
    };
    for i in 0..L {
        for j in 0..L - i {
            push_mixed([(i, j), (i + 1, j), (i, j + 1)]);
            if i + j <= L - 2 {
                push_mixed([(i + 1, j), (i, j + 1), (i + 1, j + 1)]);
            }
        }
    }
    starts
}

/// Levenberg-Marquardt on the scaled residuals (u/s_u, v/s_v) in the local
/// tangent chart.
///
/// Unlike plain Newton, the damped iteration cannot limit-cycle across a
/// residual valley: rejected steps grow the damping until the step turns
/// gradient-like, and at a valley floor the first-order optimality test
/// certifies that two curves pass without crossing (NoZero). A descent to
/// zero merit is a common zero.
fn newton_pair(
    uf: &HarmonicField,
    vf: &HarmonicField,
    start: SpherePoint,
    scale_u: f64,
    scale_v: f64,
) -> PairOutcome {
    let merit = |p: &SpherePoint| -> f64 {
        let ru = uf.eval(p) / scale_u;
        let rv = vf.eval(p) / scale_v;
        ru * ru + rv * rv
    };
    // both residuals within 1e-8 of scale
    const ZERO_MERIT: f64 = 2e-16;
    let mut x = start;
    let mut m = merit(&x);
    let mut mu = 1e-8;
    let mut settled = false;
    for _ in 0..300 {
        let (e1, e2) = x.tangent_basis();
        let ru = uf.eval(&x) / scale_u;
        let rv = vf.eval(&x) / scale_v;
        let gu = uf.gradient_tangent(&x) / scale_u;
        let gv = vf.gradient_tangent(&x) / scale_v;
        let (a, b) = (gu.dot(&e1), gu.dot(&e2));
        let (c, d) = (gv.dot(&e1), gv.dot(&e2));
        // normal equations of the 2x2 least-squares model
        let (h11, h12, h22) = (a * a + c * c, a * b + c * d, b * b + d * d);
        let (g1, g2) = (a * ru + c * rv, b * ru + d * rv);
        let gnorm = g1.hypot(g2);
        if gnorm < 1e-14 && m > 1e-13 {
            // stationary with a clearly positive residual: closest approach
            settled = true;
            break;
        }
        let tr = h11 + h22 + 1e-300;
        let mut accepted = false;
        for _ in 0..40 {
            let damp = mu * tr;
            let det = (h11 + damp) * (h22 + damp) - h12 * h12;
            if det <= 0.0 {
                mu *= 4.0;
                continue;
            }
            let mut s1 = (-(h22 + damp) * g1 + h12 * g2) / det;
            let mut s2 = (h12 * g1 - (h11 + damp) * g2) / det;
            let step = s1.hypot(s2);
            if step > 0.3 {
                s1 *= 0.3 / step;
                s2 *= 0.3 / step;
            }
            let candidate = SpherePoint::from_vector(x.vector() + e1 * s1 + e2 * s2);
            if let Ok(p) = candidate {
                let mp = merit(&p);
                if mp < m {
                    x = p;
                    m = mp;
                    mu = (mu / 3.0).max(1e-12);
                    accepted = true;
                    if step.min(0.3) < 1e-11 {
                        settled = true;
                    }
                    break;
                }
            }
            mu *= 4.0;
            if mu > 1e15 {
                break;
            }
        }
        if !accepted {
            // no decrease in any damped direction: numerical floor
            settled = true;
            break;
        }
        if settled {
            break;
        }
    }
    if !settled && m > ZERO_MERIT {
        return PairOutcome::Failed;
    }
    if m > ZERO_MERIT {
        return PairOutcome::NoZero;
    }
    // transversality of the scaled Jacobian
    let (e1, e2) = x.tangent_basis();
    let gu = uf.gradient_tangent(&x) / scale_u;
    let gv = vf.gradient_tangent(&x) / scale_v;
    let (a, b) = (gu.dot(&e1), gu.dot(&e2));
    let (c, d) = (gv.dot(&e1), gv.dot(&e2));
    let e = 0.5 * (a * a + b * b + c * c + d * d);
    let f = a * d - b * c;
    let sigma_min_sq = (e - (e * e - f * f).max(0.0).sqrt()).max(0.0);
    PairOutcome::Zero(x, sigma_min_sq.sqrt() < 1e-5)
}

/// The rotation derivative of u about `axis`: x -> <grad U(x), axis cross x>,
/// itself a harmonic of the same degree.
pub fn rotation_derivative(u: &RealHarmonic, axis: &Vector3<f64>) -> RealHarmonic {
    let p = u.to_poly();
    let n = u.degree();
    let grads = [p.diff(0), p.diff(1), p.diff(2)];
    // components of axis cross x as linear polynomials
    let lin = |cx: f64, cy: f64, cz: f64| -> TriPoly {
        let mut l = TriPoly::zero(1);
        *l.coeff_mut(1, 0) = cx;
        *l.coeff_mut(0, 1) = cy;
        *l.coeff_mut(0, 0) = cz;
        l
    };
    let fields = [
        lin(0.0, -axis.z, axis.y),
        lin(axis.z, 0.0, -axis.x),
        lin(-axis.y, axis.x, 0.0),
    ];
    let mut out = TriPoly::zero(n);
    for (g, l) in grads.iter().zip(&fields) {
        if n >= 1 {
            out.add_scaled(&g.mul(l), 1.0);
        }
    }
    project_polynomial(&out)
}

/// Critical points of u as the common zeros of two rotation derivatives.
///
/// Zonal harmonics are rejected: their rotation orbit is 2-dimensional and
/// the critical set is a curve. Axes are redrawn (deterministically from
/// `seed`) if a derivative degenerates or a spurious zero appears where the
/// two fields are dependent.
pub fn critical_points(
    u: &RealHarmonic,
    mesh: &SphereMesh,
    seed: u64,
) -> Result<Vec<SpherePoint>> {
    let n = u.degree();
    if n == 0 {
        return Err(Error::ZonalHarmonic);
    }
    // Orbit dimension: for n >= 2 a rank-2 rotation orbit means a zonal
    // multiple, whose critical set is a union of circles. Degree 1 is
    // exempt: every linear harmonic is zonal yet has exactly two critical
    // points, the poles of its axis.
    if n >= 2 {
        let d_x = rotation_derivative(u, &Vector3::x());
        let d_y = rotation_derivative(u, &Vector3::y());
        let d_z = rotation_derivative(u, &Vector3::z());
        let m = nalgebra::DMatrix::from_fn(3, 2 * n + 1, |i, j| {
            [&d_x, &d_y, &d_z][i].coeffs()[j]
        });
        let sv = m.svd(false, false).singular_values;
        if sv[2] < 1e-8 * sv[0] {
            return Err(Error::ZonalHarmonic);
        }
    }

    // The common zeros of two rotation derivatives contain the critical set
    // but generically also a few extra points on the circle where the two
    // fields become dependent. The surface gradient is the arbiter: only
    // points annihilating it are kept. Two successful axes pairs are
    // unioned so a crossing missed by one dependency configuration is
    // caught by the other.
    let field = HarmonicField::new(u);
    let gate = 1e-6 * u.norm() * ((n * (n + 1)) as f64).sqrt();
    let mut axes = (Vector3::x(), Vector3::y());
    let mut rng_state = rng::stream_rng(seed, 0);
    let mut found: Vec<SpherePoint> = Vec::new();
    let mut successes = 0;
    for _attempt in 0..8 {
        let xi = rotation_derivative(u, &axes.0);
        let eta = rotation_derivative(u, &axes.1);
        // a near-annihilated field (axis close to a near-zonal symmetry
        // axis) makes the search ill-conditioned; redraw instead
        let healthy = xi.norm() > 0.1 * u.norm() && eta.norm() > 0.1 * u.norm();
        if healthy {
            let cz = common_zeros(&xi, &eta, mesh)?;
            if cz.unresolved.is_empty() {
                for z in cz.zeros {
                    if field.gradient_tangent(&z.point).norm() < gate
                        && !found
                            .iter()
                            .any(|p| p.geodesic_distance(&z.point) < 1e-6)
                    {
                        found.push(z.point);
                    }
                }
                successes += 1;
                if successes >= 2 {
                    return Ok(found);
                }
            }
        }
        axes = (
            rng::random_sphere_point(&mut rng_state).vector(),
            rng::random_sphere_point(&mut rng_state).vector(),
        );
    }
    Err(Error::NoConvergence(
        "no rotation-field pair isolated the critical set",
    ))
}

/// True when the sign of v changes at least twice along every traced
/// component of N_u (cyclically). Requires a regular u.
pub fn two_points_per_component_check(
    u: &RealHarmonic,
    v: &RealHarmonic,
    mesh: &SphereMesh,
) -> Result<bool> {
    let curves = trace_nodal(u, mesh)?;
    if !curves.regular {
        return Err(Error::InvalidParameter(
            "the traced harmonic is not regular".into(),
        ));
    }
    let vf = HarmonicField::new(v);
    for comp in &curves.components {
        let signs: Vec<bool> = comp.iter().map(|p| positive(vf.eval(p))).collect();
        let changes = signs
            .iter()
            .zip(signs.iter().cycle().skip(1))
            .take(signs.len())
            .filter(|(a, b)| a != b)
            .count();
        if changes < 2 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Normalized residual of the contour integral of v times the normal
/// derivative of u over each component of N_u; zero in exact arithmetic.
///
/// Each polyline is refined dyadically (midpoints pulled back onto the
/// curve) until the cyclic trapezoid rule stabilizes, then Richardson
/// extrapolated. Returns the maximum over components of
/// |integral| / (length * ||v|| * max |grad u|).
pub fn green_residual(u: &RealHarmonic, v: &RealHarmonic, mesh: &SphereMesh) -> Result<f64> {
    if u.degree() != v.degree() {
        // the identity needs equal eigenvalues; Green's formula otherwise
        // leaves the area term (lambda_v - lambda_u) * integral of u v
        return Err(Error::DegreeMismatch {
            left: u.degree(),
            right: v.degree(),
        });
    }
    let uf = HarmonicField::new(u);
    let curves = trace_nodal_field(&uf, mesh)?;
    if !curves.regular {
        return Err(Error::InvalidParameter(
            "the traced harmonic is not regular".into(),
        ));
    }
    let vf = HarmonicField::new(v);
    let mut worst: f64 = 0.0;
    for comp in &curves.components {
        let mut pts = comp.clone();
        let mut previous: Option<f64> = None;
        let mut pair = (0.0, 0.0);
        for depth in 0..=4 {
            let (integral, len, gmax) = contour_integral(&uf, &vf, &pts);
            let scale = len * vf.norm() * gmax;
            pair = (previous.unwrap_or(integral), integral);
            if let Some(prev) = previous {
                if (integral - prev).abs() <= 1e-10 * scale || depth == 4 {
                    break;
                }
            }
            previous = Some(integral);
            pts = subdivide_on_curve(&uf, &pts);
        }
        // one Richardson step on the trapezoid pair
        let refined = (4.0 * pair.1 - pair.0) / 3.0;
        let (_, len, gmax) = contour_integral(&uf, &vf, &pts);
        let scale = len * vf.norm() * gmax;
        if scale > 0.0 {
            worst = worst.max(refined.abs() / scale);
        }
    }
    Ok(worst)
}

/// Cyclic trapezoid rule for the flux integrand v |grad u| along a
/// polyline, returning (integral, length, max |grad u|).
fn contour_integral(
    uf: &HarmonicField,
    vf: &HarmonicField,
    pts: &[SpherePoint],
) -> (f64, f64, f64) {
    let m = pts.len();
    let f: Vec<f64> = pts
        .iter()
        .map(|p| vf.eval(p) * uf.gradient_tangent(p).norm())
        .collect();
    let gmax = pts
        .iter()
        .map(|p| uf.gradient_tangent(p).norm())
        .fold(0.0, f64::max);
    let mut integral = 0.0;
    let mut length = 0.0;
    for i in 0..m {
        let j = (i + 1) % m;
        let ds = pts[i].geodesic_distance(&pts[j]);
        integral += 0.5 * (f[i] + f[j]) * ds;
        length += ds;
    }
    (integral, length, gmax)
}

fn subdivide_on_curve(uf: &HarmonicField, pts: &[SpherePoint]) -> Vec<SpherePoint> {
    let m = pts.len();
    let mut out = Vec::with_capacity(2 * m);
    for i in 0..m {
        let j = (i + 1) % m;
        out.push(pts[i]);
        if let Ok(mid) = SpherePoint::from_vector(pts[i].vector() + pts[j].vector()) {
            out.push(refine_onto_curve(uf, mid, 3));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::{sample_with_rng, zonal_eval, ZonalKernel};
    use crate::legendre;
    use crate::rng::stream_rng;

    fn sectoral(n: usize, real_part: bool) -> RealHarmonic {
        // Re/Im (x1 + i x2)^n is proportional to the j = +/-n basis vector
        RealHarmonic::basis_vector(n, if real_part { n as i64 } else { -(n as i64) }).unwrap()
    }

    fn harmonic_from_fn(n: usize, f: impl Fn(&SpherePoint) -> f64) -> RealHarmonic {
        // test-side oracle: project a pointwise closure through quadrature
        let mut coeffs = vec![0.0; 2 * n + 1];
        for (x, w) in crate::harmonics::sphere_quadrature(2 * n) {
            let val = f(&x);
            let row = crate::harmonics::basis_row(n, &x);
            for (c, y) in coeffs.iter_mut().zip(&row) {
                *c += w * val * y;
            }
        }
        RealHarmonic::new(n, coeffs).unwrap()
    }

    #[test]
    fn equator_is_traced_as_one_component() {
        let mesh = SphereMesh::new(6);
        let u = RealHarmonic::basis_vector(1, 0).unwrap(); // ~ x3
        let curves = trace_nodal(&u, &mesh).unwrap();
        assert_eq!(curves.components.len(), 1);
        assert!(curves.regular);
        let len = nodal_length(&curves);
        let tau = std::f64::consts::TAU;
        assert!((len - tau).abs() < 1e-3 * tau, "equator length {len}");
        for p in &curves.components[0] {
            assert!(u.eval(p).abs() < 1e-6 * u.norm());
        }
    }

    #[test]
    fn zonal_nodal_set_is_parallel_circles() {
        let mesh = SphereMesh::new(5);
        let a = SpherePoint::new(0.0, 0.0, 1.0).unwrap();
        let n = 3;
        let u = ZonalKernel::new(n).expand(&a);
        let curves = trace_nodal(&u, &mesh).unwrap();
        assert_eq!(curves.components.len(), n);
        assert!(curves.regular);
        // components sit at heights equal to the Legendre roots
        let roots = legendre::roots(n).roots;
        let mut heights: Vec<f64> = curves
            .components
            .iter()
            .map(|c| c.iter().map(|p| p.z()).sum::<f64>() / c.len() as f64)
            .collect();
        heights.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (h, r) in heights.iter().zip(&roots) {
            assert!((h - r).abs() < 1e-4, "height {h} vs root {r}");
        }
        // total length: sum of circle circumferences 2 pi sqrt(1 - t^2)
        let expected: f64 = roots
            .iter()
            .map(|t| std::f64::consts::TAU * (1.0 - t * t).sqrt())
            .sum();
        let len = nodal_length(&curves);
        assert!(
            (len - expected).abs() < 5e-3 * expected,
            "{len} vs {expected}"
        );
    }

    #[test]
    fn sectoral_length_attains_the_sharp_bound() {
        let mesh = SphereMesh::new(6);
        for n in [2usize, 3] {
            let u = sectoral(n, true);
            let curves = trace_nodal(&u, &mesh).unwrap();
            let len = nodal_length(&curves);
            let expected = std::f64::consts::TAU * n as f64;
            assert!(
                (len - expected).abs() < 5e-3 * expected,
                "n={n}: {len} vs {expected}"
            );
        }
    }

    #[test]
    fn crofton_on_a_great_circle_is_exact() {
        let u = RealHarmonic::basis_vector(1, 0).unwrap();
        let (est, stderr) = crofton_length(&u, 400, 11);
        assert_eq!(stderr, 0.0);
        assert!((est - std::f64::consts::TAU).abs() < 1e-12);
    }

    #[test]
    fn crofton_matches_mesh_length_for_random_harmonics() {
        let mesh = SphereMesh::new(6);
        let mut r = stream_rng(13, 0);
        let u = sample_with_rng(4, &mut r);
        let mesh_len = nodal_length(&trace_nodal(&u, &mesh).unwrap());
        let (est, stderr) = crofton_length(&u, 4000, 17);
        let tol = (0.01 * mesh_len).max(3.0 * stderr);
        assert!(
            (est - mesh_len).abs() < tol,
            "crofton {est} vs mesh {mesh_len} (stderr {stderr})"
        );
    }

    #[test]
    fn crofton_handles_bunched_crossings_of_the_sectoral_harmonic() {
        // circles near the poles meet the n meridian lines in tight clusters
        let u = sectoral(3, true);
        let (est, stderr) = crofton_length(&u, 3000, 23);
        let expected = std::f64::consts::TAU * 3.0;
        assert!(
            (est - expected).abs() <= 3.0 * stderr + 1e-9,
            "{est} vs {expected}, stderr {stderr}"
        );
    }

    #[test]
    fn deterministic_given_seed_and_mesh() {
        let mesh = SphereMesh::new(5);
        let u = sample_with_rng(3, &mut stream_rng(19, 0));
        let a = trace_nodal(&u, &mesh).unwrap();
        let b = trace_nodal(&u, &mesh).unwrap();
        assert_eq!(a.components.len(), b.components.len());
        for (ca, cb) in a.components.iter().zip(&b.components) {
            assert_eq!(ca.len(), cb.len());
            for (p, q) in ca.iter().zip(cb) {
                assert_eq!(p.vector(), q.vector());
            }
        }
        let (e1, s1) = crofton_length(&u, 500, 7);
        let (e2, s2) = crofton_length(&u, 500, 7);
        assert_eq!(e1.to_bits(), e2.to_bits());
        assert_eq!(s1.to_bits(), s2.to_bits());
    }

    #[test]
    fn inner_radius_of_hemispheres_and_zonal_caps() {
        let mesh = SphereMesh::new(6);
        let eps = mesh.max_edge_arc();
        let u = RealHarmonic::basis_vector(1, 0).unwrap();
        let inr = inner_radius(&u, &mesh).unwrap();
        assert!((inr - std::f64::consts::FRAC_PI_2).abs() < eps);

        let a = SpherePoint::new(0.0, 0.0, 1.0).unwrap();
        for n in [2usize, 5] {
            let phi = ZonalKernel::new(n).expand(&a);
            let inr = inner_radius(&phi, &mesh).unwrap();
            let theta = legendre::roots(n).theta_n;
            assert!((inr - theta).abs() < eps, "n={n}: {inr} vs {theta}");
        }

        // sectoral lune: half-width pi / (2n)
        let n = 2;
        let psi = sectoral(n, true);
        let inr = inner_radius(&psi, &mesh).unwrap();
        let expected = std::f64::consts::PI / (2 * n) as f64;
        assert!((inr - expected).abs() < eps, "{inr} vs {expected}");
    }

    #[test]
    fn bezout_equality_pair() {
        let n = 2;
        let mesh = SphereMesh::for_degree(n);
        let a = SpherePoint::new(1.0, 0.0, 0.0).unwrap();
        let u = ZonalKernel::new(n).expand(&a);
        let v = harmonic_from_fn(n, |p| {
            let w = Complex64::new(p.y(), p.z());
            w.powu(n as u32).re
        });
        let cz = common_zeros(&u, &v, &mesh).unwrap();
        assert!(cz.is_clean());
        assert_eq!(cz.count(), 2 * n * n);
    }

    #[test]
    fn sectoral_pair_meets_only_at_the_poles() {
        for n in [2usize, 3] {
            let mesh = SphereMesh::for_degree(n);
            let u = sectoral(n, true);
            let v = sectoral(n, false);
            let cz = common_zeros(&u, &v, &mesh).unwrap();
            assert_eq!(cz.count(), 2, "n={n}");
            assert!(cz.unresolved.is_empty());
            for z in &cz.zeros {
                assert!(z.point.z().abs() > 1.0 - 1e-6);
                if n > 1 {
                    assert!(z.near_singular, "pole crossing should be flagged");
                }
            }
        }
    }

    #[test]
    fn close_zonal_pair_meets_in_2n_points() {
        let n = 3;
        let mesh = SphereMesh::for_degree(n);
        let a = SpherePoint::new(0.0, 0.0, 1.0).unwrap();
        let (e1, _) = a.tangent_basis();
        let b = a.geodesic_step(&e1, 0.05);
        let u = ZonalKernel::new(n).expand(&a);
        let v = ZonalKernel::new(n).expand(&b);
        let cz = common_zeros(&u, &v, &mesh).unwrap();
        assert!(cz.is_clean());
        assert_eq!(cz.count(), 2 * n);
    }

    #[test]
    fn critical_points_of_a_linear_harmonic() {
        let mesh = SphereMesh::for_degree(1);
        let a = SpherePoint::new(0.3, -0.5, 0.81).unwrap();
        // u proportional to <a, x>: coefficients (a_y, a_z, a_x) on (Y_{1,-1}, Y_{1,0}, Y_{1,1})
        let u = RealHarmonic::new(1, vec![a.y(), a.z(), a.x()]).unwrap();
        let pts = critical_points(&u, &mesh, 0).unwrap();
        assert_eq!(pts.len(), 2);
        for p in &pts {
            assert!(p.dot(&a).abs() > 1.0 - 1e-8);
        }
    }

    #[test]
    fn zonal_input_is_rejected_for_critical_points() {
        let mesh = SphereMesh::for_degree(2);
        let a = SpherePoint::new(0.0, 1.0, 0.0).unwrap();
        let phi = ZonalKernel::new(2).expand(&a);
        assert!(matches!(
            critical_points(&phi, &mesh, 0),
            Err(Error::ZonalHarmonic)
        ));
    }

    #[test]
    fn two_points_per_component_examples() {
        let mesh = SphereMesh::new(5);
        let u = RealHarmonic::basis_vector(1, 0).unwrap();
        let v = RealHarmonic::basis_vector(1, 1).unwrap();
        assert!(two_points_per_component_check(&u, &v, &mesh).unwrap());

        let mut r = stream_rng(29, 0);
        for _ in 0..10 {
            let u = sample_with_rng(3, &mut r);
            let v = sample_with_rng(3, &mut r);
            let curves = trace_nodal(&u, &mesh).unwrap();
            if !curves.regular {
                continue;
            }
            assert!(two_points_per_component_check(&u, &v, &mesh).unwrap());
        }
    }

    #[test]
    fn green_residual_examples() {
        let mesh = SphereMesh::new(6);
        let u = RealHarmonic::basis_vector(1, 0).unwrap();
        let mut r = stream_rng(31, 0);
        // equator case: the restriction of v is a zero-mean trigonometric
        // polynomial and the refined quadrature is near-exact
        for _ in 0..4 {
            let v = sample_with_rng(1, &mut r);
            let res = green_residual(&u, &v, &mesh).unwrap();
            assert!(res < 1e-6, "equator residual {res}");
        }
        assert!(matches!(
            green_residual(&u, &sample_with_rng(2, &mut r), &mesh),
            Err(Error::DegreeMismatch { .. })
        ));
        // v = u makes the integrand vanish on the contour
        let w = sample_with_rng(3, &mut r);
        let res = green_residual(&w, &w, &mesh).unwrap();
        assert!(res < 1e-3, "self residual {res}");
        // random regular pairs
        for n in 1..=4usize {
            let u = sample_with_rng(n, &mut r);
            let v = sample_with_rng(n, &mut r);
            if !trace_nodal(&u, &mesh).unwrap().regular {
                continue;
            }
            let res = green_residual(&u, &v, &mesh).unwrap();
            assert!(res < 1e-3, "n={n}: residual {res}");
        }
    }
}
