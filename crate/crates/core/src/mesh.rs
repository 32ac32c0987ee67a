//! Geodesic icosphere triangulation of S^2.
//!
//! An icosahedron subdivided `level` times with midpoints projected back to
//! the sphere; no pole clustering, near-uniform triangle size. Edge and
//! edge-to-triangle tables are built in deterministic (first-appearance)
//! order so downstream traversals are reproducible.

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::sphere::SpherePoint;

#[derive(Clone, Debug)]
pub struct SphereMesh {
    level: u32,
    vertices: Vec<SpherePoint>,
    triangles: Vec<[u32; 3]>,
    edges: Vec<[u32; 2]>,
    tri_edges: Vec<[u32; 3]>,
    edge_triangles: Vec<[u32; 2]>,
    max_edge_arc: f64,
}

fn icosahedron() -> (Vec<Vector3<f64>>, Vec<[u32; 3]>) {
    let p = (1.0 + 5.0f64.sqrt()) / 2.0;
    let verts = vec![
        Vector3::new(-1.0, p, 0.0),
        Vector3::new(1.0, p, 0.0),
        Vector3::new(-1.0, -p, 0.0),
        Vector3::new(1.0, -p, 0.0),
        Vector3::new(0.0, -1.0, p),
        Vector3::new(0.0, 1.0, p),
        Vector3::new(0.0, -1.0, -p),
        Vector3::new(0.0, 1.0, -p),
        Vector3::new(p, 0.0, -1.0),
        Vector3::new(p, 0.0, 1.0),
        Vector3::new(-p, 0.0, -1.0),
        Vector3::new(-p, 0.0, 1.0),
    ];
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (verts, faces)
}

impl SphereMesh {
    pub fn new(level: u32) -> Self {
        let (raw, mut triangles) = icosahedron();
        let mut vertices: Vec<Vector3<f64>> = raw.into_iter().map(|v| v.normalize()).collect();

        for _ in 0..level {
            let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
            let mut next = Vec::with_capacity(triangles.len() * 4);
            let mut midpoint = |a: u32, b: u32, vertices: &mut Vec<Vector3<f64>>| -> u32 {
                let key = (a.min(b), a.max(b));
                *midpoints.entry(key).or_insert_with(|| {
                    let m = (vertices[a as usize] + vertices[b as usize]).normalize();
                    vertices.push(m);
                    (vertices.len() - 1) as u32
                })
            };
            for &[a, b, c] in &triangles {
                let ab = midpoint(a, b, &mut vertices);
                let bc = midpoint(b, c, &mut vertices);
                let ca = midpoint(c, a, &mut vertices);
                next.push([a, ab, ca]);
                next.push([b, bc, ab]);
                next.push([c, ca, bc]);
                next.push([ab, bc, ca]);
            }
            triangles = next;
        }

        // edge table in first-appearance order
        let mut edge_ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut edges: Vec<[u32; 2]> = Vec::new();
        let mut edge_triangles: Vec<[u32; 2]> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (t, &[a, b, c]) in triangles.iter().enumerate() {
            let mut ids = [0u32; 3];
            for (slot, (u, v)) in [(a, b), (b, c), (c, a)].into_iter().enumerate() {
                let key = (u.min(v), u.max(v));
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_triangles.push([u32::MAX, u32::MAX]);
                    (edges.len() - 1) as u32
                });
                let slots = &mut edge_triangles[id as usize];
                if slots[0] == u32::MAX {
                    slots[0] = t as u32;
                } else {
                    debug_assert_eq!(slots[1], u32::MAX, "edge in more than two triangles");
                    slots[1] = t as u32;
                }
                ids[slot] = id;
            }
            tri_edges.push(ids);
        }
        assert!(
            edge_triangles.iter().all(|e| e[1] != u32::MAX),
            "triangulation is not a closed 2-manifold"
        );

        let max_edge_arc = edges
            .iter()
            .map(|&[a, b]| {
                vertices[a as usize]
                    .dot(&vertices[b as usize])
                    .clamp(-1.0, 1.0)
                    .acos()
            })
            .fold(0.0, f64::max);

        SphereMesh {
            level,
            vertices: vertices
                .into_iter()
                .map(|v| SpherePoint::from_vector(v).expect("mesh vertex"))
                .collect(),
            triangles,
            edges,
            tri_edges,
            edge_triangles,
            max_edge_arc,
        }
    }

    /// Coarsest level whose longest edge resolves the nodal scale of a
    /// degree-n harmonic (arc <= 0.2 / n), capped at level 7.
    pub fn for_degree(n: usize) -> Self {
        let target = 0.2 / n.max(1) as f64;
        for level in 2..7 {
            let mesh = Self::new(level);
            if mesh.max_edge_arc <= target {
                return mesh;
            }
        }
        Self::new(7)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn vertices(&self) -> &[SpherePoint] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    pub fn tri_edges(&self) -> &[[u32; 3]] {
        &self.tri_edges
    }

    pub fn edge_triangles(&self) -> &[[u32; 2]] {
        &self.edge_triangles
    }

    /// Longest edge, as a geodesic arc; the spatial resolution of the mesh.
    pub fn max_edge_arc(&self) -> f64 {
        self.max_edge_arc
    }

    pub fn triangle_centroid(&self, t: usize) -> SpherePoint {
        let [a, b, c] = self.triangles[t];
        SpherePoint::from_vector(
            self.vertices[a as usize].vector()
                + self.vertices[b as usize].vector()
                + self.vertices[c as usize].vector(),
        )
        .expect("triangle centroid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_follow_the_subdivision_rule() {
        for level in 0..=4u32 {
            let m = SphereMesh::new(level);
            let f = 20usize << (2 * level);
            assert_eq!(m.triangles().len(), f);
            assert_eq!(m.edges().len(), 3 * f / 2);
            assert_eq!(m.vertices().len(), 2 + f / 2); // Euler characteristic 2
        }
    }

    #[test]
    fn level_six_matches_expected_resolution() {
        let m = SphereMesh::new(6);
        assert_eq!(m.vertices().len(), 40_962);
        assert!(m.max_edge_arc() < 0.025, "edge {}", m.max_edge_arc());
    }

    #[test]
    fn closed_manifold_and_unit_vertices() {
        let m = SphereMesh::new(3);
        for v in m.vertices() {
            assert!((v.vector().norm() - 1.0).abs() < 1e-12);
        }
        // every edge in exactly two triangles, and those triangles list it
        for (e, &[t0, t1]) in m.edge_triangles().iter().enumerate() {
            assert_ne!(t0, t1);
            for t in [t0, t1] {
                assert!(m.tri_edges()[t as usize].contains(&(e as u32)));
            }
        }
    }

    #[test]
    fn for_degree_respects_the_resolution_rule() {
        for n in 1..=8usize {
            let m = SphereMesh::for_degree(n);
            assert!(
                m.max_edge_arc() <= 0.2 / n as f64 || m.level() == 7,
                "n={n} level={} edge={}",
                m.level(),
                m.max_edge_arc()
            );
        }
    }
}
