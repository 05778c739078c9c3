//! Structured triangulation of the unit square and the connectivity queries
//! used by assembly.
//!
//! Each of the `n x n` cells is split along its lower-left to upper-right
//! diagonal. Cells are visited row by row (bottom row first), and within a cell
//! the lower-right triangle precedes the upper-left one, so the index arrays
//! are a pure function of `n`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Result, WgError};

pub type Point = [f64; 2];

/// A triangle's reference to one of its edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRef {
    pub edge: usize,
    /// `+1` when the local edge (v_i -> v_{i+1}) runs from the lower to the
    /// higher global vertex index, `-1` otherwise.
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Vertex pairs stored as (lower index, higher index).
    pub edges: Vec<[usize; 2]>,
    /// Local edge `i` of a triangle joins its vertices `i` and `i + 1 (mod 3)`.
    pub triangle_edges: Vec<[EdgeRef; 3]>,
    pub edge_triangles: Vec<Vec<usize>>,
    pub boundary_edge: Vec<bool>,
    /// Triangle diameters.
    pub h_k: Vec<f64>,
    pub h: f64,
    /// Cells per side for structured meshes; the refinement label is `1/n`.
    pub n: usize,
}

/// Geometry of one edge as seen from its adjacent triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGeometry {
    pub midpoint: Point,
    /// Unit tangent pointing from the lower to the higher vertex index.
    pub tangent: Point,
    pub length: f64,
    /// `(triangle, outward unit normal)` for each adjacent triangle.
    pub normals: Vec<(usize, Point)>,
}

/// Builds the `n x n` split-square triangulation of the unit square.
pub fn build_uniform_square_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(WgError::InvalidResolution(n));
    }
    let np = n + 1;
    let mut vertices = Vec::with_capacity(np * np);
    for j in 0..np {
        for i in 0..np {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let vid = |i: usize, j: usize| j * np + i;

    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = vid(i, j);
            let v10 = vid(i + 1, j);
            let v11 = vid(i + 1, j + 1);
            let v01 = vid(i, j + 1);
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    Ok(Mesh::from_triangles(vertices, triangles, n))
}

impl Mesh {
    /// Derives edges, adjacency, boundary flags and sizes from a
    /// counterclockwise triangle list.
    pub fn from_triangles(vertices: Vec<Point>, triangles: Vec<[usize; 3]>, n: usize) -> Mesh {
        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut edge_triangles: Vec<Vec<usize>> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());

        for (t, tri) in triangles.iter().enumerate() {
            let mut refs = [EdgeRef { edge: 0, sign: 1 }; 3];
            for (i, r) in refs.iter_mut().enumerate() {
                let a = tri[i];
                let b = tri[(i + 1) % 3];
                let key = (a.min(b), a.max(b));
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_triangles.push(Vec::with_capacity(2));
                    edges.len() - 1
                });
                edge_triangles[e].push(t);
                *r = EdgeRef {
                    edge: e,
                    sign: if a < b { 1 } else { -1 },
                };
            }
            triangle_edges.push(refs);
        }

        let boundary_edge = edge_triangles.iter().map(|ts| ts.len() == 1).collect();
        let h_k: Vec<f64> = triangles
            .iter()
            .map(|tri| {
                (0..3)
                    .map(|i| dist(vertices[tri[i]], vertices[tri[(i + 1) % 3]]))
                    .fold(0.0, f64::max)
            })
            .collect();
        let h = h_k.iter().cloned().fold(0.0, f64::max);

        Mesh {
            vertices,
            triangles,
            edges,
            triangle_edges,
            edge_triangles,
            boundary_edge,
            h_k,
            h,
            n,
        }
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// The `1/n` refinement label used to key convergence tables.
    pub fn h_label(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let tri = self.triangles[t];
        [
            self.vertices[tri[0]],
            self.vertices[tri[1]],
            self.vertices[tri[2]],
        ]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_points(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        dist(self.vertices[a], self.vertices[b])
    }

    /// Outward unit normal of local edge `i` of triangle `t`.
    pub fn outward_normal(&self, t: usize, i: usize) -> Point {
        let tri = self.triangles[t];
        let a = self.vertices[tri[i]];
        let b = self.vertices[tri[(i + 1) % 3]];
        let len = dist(a, b);
        [(b[1] - a[1]) / len, -(b[0] - a[0]) / len]
    }

    /// Midpoint, tangent, length and outward normals of an edge.
    pub fn edge_geometry(&self, e: usize) -> EdgeGeometry {
        let [a, b] = self.edges[e];
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let length = dist(pa, pb);
        let tangent = [(pb[0] - pa[0]) / length, (pb[1] - pa[1]) / length];
        let normals = self.edge_triangles[e]
            .iter()
            .map(|&t| {
                let local = self.triangle_edges[t]
                    .iter()
                    .position(|r| r.edge == e)
                    .expect("edge adjacency is consistent");
                (t, self.outward_normal(t, local))
            })
            .collect();
        EdgeGeometry {
            midpoint: [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
            tangent,
            length,
            normals,
        }
    }

    /// Index of the triangle containing `p`, searching the structured grid
    /// cell first. Points on shared boundaries resolve to the lower index.
    pub fn locate(&self, p: Point) -> Option<usize> {
        const EPS: f64 = 1e-12;
        if self.n > 0 && self.triangles.len() == 2 * self.n * self.n {
            let n = self.n as f64;
            let i = ((p[0] * n).floor() as isize).clamp(0, self.n as isize - 1) as usize;
            let j = ((p[1] * n).floor() as isize).clamp(0, self.n as isize - 1) as usize;
            let base = 2 * (j * self.n + i);
            for t in [base, base + 1] {
                if self.contains(t, p, EPS) {
                    return Some(t);
                }
            }
        }
        (0..self.triangles.len()).find(|&t| self.contains(t, p, EPS))
    }

    fn contains(&self, t: usize, p: Point, eps: f64) -> bool {
        let [a, b, c] = self.triangle_points(t);
        let cross = |u: Point, v: Point, w: Point| (v[0] - u[0]) * (w[1] - u[1]) - (w[0] - u[0]) * (v[1] - u[1]);
        cross(a, b, p) >= -eps && cross(b, c, p) >= -eps && cross(c, a, p) >= -eps
    }

    /// Legacy ASCII VTK (POLYDATA) rendering of the triangulation.
    pub fn to_vtk(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# vtk DataFile Version 3.0");
        let _ = writeln!(out, "wgfem mesh n={}", self.n);
        let _ = writeln!(out, "ASCII");
        let _ = writeln!(out, "DATASET POLYDATA");
        let _ = writeln!(out, "POINTS {} double", self.vertices.len());
        for v in &self.vertices {
            let _ = writeln!(out, "{} {} 0", v[0], v[1]);
        }
        let _ = writeln!(out, "POLYGONS {} {}", self.triangles.len(), 4 * self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
        }
        out
    }
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}
