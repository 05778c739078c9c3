use crate::mesh::Mesh;
use crate::polybasis::poly_dim;

/// Entity owning a free degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DofOwner {
    Interior { triangle: usize, index: usize },
    Edge { edge: usize, index: usize },
}

/// Numbering of the free degrees of freedom: all interior coefficients
/// element by element, then the coefficients of every interior edge.
/// Boundary-edge coefficients are fixed at zero and have no number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    pub dim_interior: usize,
    pub dim_edge: usize,
    pub n_triangles: usize,
    pub n_interior: usize,
    /// Coefficients on all edges, boundary included.
    pub n_edge: usize,
    pub n_free_edge: usize,
    pub total_free: usize,
    edge_offset: Vec<Option<usize>>,
    free_edges: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, k: usize, j: usize) -> Self {
        let dim_interior = poly_dim(k);
        let dim_edge = j + 1;
        let n_triangles = mesh.num_triangles();
        let n_interior = n_triangles * dim_interior;
        let mut next = n_interior;
        let mut free_edges = Vec::new();
        let edge_offset = mesh
            .boundary_edge
            .iter()
            .enumerate()
            .map(|(e, &b)| {
                if b {
                    None
                } else {
                    let o = next;
                    next += dim_edge;
                    free_edges.push(e);
                    Some(o)
                }
            })
            .collect();
        DofMap {
            dim_interior,
            dim_edge,
            n_triangles,
            n_interior,
            n_edge: mesh.num_edges() * dim_edge,
            n_free_edge: next - n_interior,
            total_free: next,
            edge_offset,
            free_edges,
        }
    }

    /// Number of local weak coefficients on one triangle.
    pub fn local_dim(&self) -> usize {
        self.dim_interior + 3 * self.dim_edge
    }

    pub fn interior(&self, triangle: usize, index: usize) -> usize {
        triangle * self.dim_interior + index
    }

    pub fn interior_offset(&self, triangle: usize) -> usize {
        triangle * self.dim_interior
    }

    /// `None` for boundary edges.
    pub fn edge_offset(&self, edge: usize) -> Option<usize> {
        self.edge_offset[edge]
    }

    pub fn edge(&self, edge: usize, index: usize) -> Option<usize> {
        self.edge_offset[edge].map(|o| o + index)
    }

    /// Global index of every local coefficient of `triangle`, ordered as
    /// `[interior, edge 0, edge 1, edge 2]`.
    pub fn local_to_global(&self, mesh: &Mesh, triangle: usize) -> Vec<Option<usize>> {
        let mut map = Vec::with_capacity(self.local_dim());
        let base = self.interior_offset(triangle);
        map.extend((0..self.dim_interior).map(|i| Some(base + i)));
        for r in &mesh.triangle_edges[triangle] {
            map.extend((0..self.dim_edge).map(|i| self.edge(r.edge, i)));
        }
        map
    }

    pub fn owner(&self, dof: usize) -> Option<DofOwner> {
        if dof < self.n_interior {
            return Some(DofOwner::Interior {
                triangle: dof / self.dim_interior,
                index: dof % self.dim_interior,
            });
        }
        if dof >= self.total_free {
            return None;
        }
        let slot = dof - self.n_interior;
        Some(DofOwner::Edge {
            edge: self.free_edges[slot / self.dim_edge],
            index: slot % self.dim_edge,
        })
    }
}
