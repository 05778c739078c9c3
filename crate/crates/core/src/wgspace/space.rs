use super::coefficient::Coefficient;
use super::config::WgConfig;
use super::dofs::DofMap;
use super::element::{self, ElementFrame, ElementOperators, ElementRules};
use super::field::WeakField;
use crate::error::Result;
use crate::linalg::DenseCholesky;
use crate::mesh::{Mesh, Point};
use crate::polybasis::{gauss_rule, legendre_values, triangle_rule};

/// The discrete space `V_h⁰` on a mesh: degrees of freedom, element frames
/// and the quadrature rules used for operators and data.
#[derive(Debug, Clone)]
pub struct WgSpace {
    mesh: Mesh,
    config: WgConfig,
    dofs: DofMap,
    frames: Vec<ElementFrame>,
    rules: ElementRules,
    data_rules: ElementRules,
}

impl WgSpace {
    pub fn new(mesh: Mesh, config: WgConfig) -> Result<Self> {
        config.validate()?;
        let q = config.quadrature;
        let rules = ElementRules {
            triangle: triangle_rule(q.triangle_exactness)?,
            edge: gauss_rule(q.edge_points)?,
        };
        let data_rules = ElementRules {
            triangle: triangle_rule(q.data_triangle_exactness)?,
            edge: gauss_rule(q.data_edge_points)?,
        };
        let dofs = DofMap::new(&mesh, config.k, config.j);
        let frames = (0..mesh.num_triangles()).map(|t| ElementFrame::new(&mesh, t)).collect();
        Ok(WgSpace {
            mesh,
            config,
            dofs,
            frames,
            rules,
            data_rules,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn config(&self) -> &WgConfig {
        &self.config
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn dim(&self) -> usize {
        self.dofs.total_free
    }

    pub fn num_elements(&self) -> usize {
        self.frames.len()
    }

    pub fn frame(&self, t: usize) -> &ElementFrame {
        &self.frames[t]
    }

    pub fn rules(&self) -> &ElementRules {
        &self.rules
    }

    pub fn data_rules(&self) -> &ElementRules {
        &self.data_rules
    }

    pub fn local_map(&self, t: usize) -> Vec<Option<usize>> {
        self.dofs.local_to_global(&self.mesh, t)
    }

    pub fn element_operators(&self, t: usize, a: &Coefficient) -> Result<ElementOperators> {
        element::element_operators(&self.config, &self.frames[t], &self.rules, a)
    }

    /// `Q_k⁰`-style L² projection of `f` onto `P_degree(K)`.
    pub fn project_interior(&self, t: usize, degree: usize, f: &dyn Fn(Point) -> f64) -> Result<Vec<f64>> {
        let frame = &self.frames[t];
        let basis = frame.basis(degree);
        let n = basis.dim();
        let chol = DenseCholesky::new(&element::mass_matrix(frame, &basis, &self.data_rules.triangle))?;
        let mut rhs = vec![0.0; n];
        let mut v = vec![0.0; n];
        for (p, w) in frame.quadrature(&self.data_rules.triangle) {
            let fw = w * f(p);
            basis.values_into(p, &mut v);
            for (r, b) in rhs.iter_mut().zip(&v) {
                *r += fw * b;
            }
        }
        Ok(chol.solve(&rhs))
    }

    /// Componentwise L² projection of a vector field onto `[P_degree(K)]²`,
    /// returned component-major.
    pub fn project_vector(&self, t: usize, degree: usize, g: &dyn Fn(Point) -> [f64; 2]) -> Result<Vec<f64>> {
        let mut out = self.project_interior(t, degree, &|p| g(p)[0])?;
        out.extend(self.project_interior(t, degree, &|p| g(p)[1])?);
        Ok(out)
    }

    /// L² projection onto `P_degree(e)` in the edge's global Legendre basis.
    pub fn project_edge(&self, e: usize, degree: usize, f: &dyn Fn(Point) -> f64) -> Vec<f64> {
        let [a, b] = self.mesh.edges[e];
        let (pa, pb) = (self.mesh.vertices[a], self.mesh.vertices[b]);
        let mut c = vec![0.0; degree + 1];
        for (s, w) in self.data_rules.edge.points.iter().zip(&self.data_rules.edge.weights) {
            let t = s[0];
            let h = 0.5 * (t + 1.0);
            let p = [pa[0] + h * (pb[0] - pa[0]), pa[1] + h * (pb[1] - pa[1])];
            let fw = w * f(p);
            for (ci, l) in c.iter_mut().zip(legendre_values(degree, t)) {
                *ci += fw * l;
            }
        }
        for (r, ci) in c.iter_mut().enumerate() {
            *ci *= (2 * r + 1) as f64 / 2.0;
        }
        c
    }

    /// `Q_h v` restricted to one element, boundary edges included.
    pub fn interpolate_local(&self, t: usize, f: &dyn Fn(Point) -> f64) -> Result<Vec<f64>> {
        let mut local = self.project_interior(t, self.config.k, f)?;
        for le in &self.frames[t].edges {
            local.extend(self.project_edge(le.edge, self.config.j, f));
        }
        Ok(local)
    }

    /// `Q_h v` on the free degrees of freedom.
    pub fn interpolate(&self, f: &(dyn Fn(Point) -> f64 + Sync)) -> Result<WeakField> {
        let mut values = vec![0.0; self.dim()];
        let nk = self.dofs.dim_interior;
        for t in 0..self.num_elements() {
            let c = self.project_interior(t, self.config.k, f)?;
            let o = self.dofs.interior_offset(t);
            values[o..o + nk].copy_from_slice(&c);
        }
        for e in 0..self.mesh.num_edges() {
            if let Some(o) = self.dofs.edge_offset(e) {
                let c = self.project_edge(e, self.config.j, f);
                values[o..o + c.len()].copy_from_slice(&c);
            }
        }
        Ok(WeakField::from_values(values))
    }

    /// Local coefficients of a free-DOF vector; boundary edges read as zero.
    pub fn gather(&self, t: usize, values: &[f64]) -> Vec<f64> {
        self.local_map(t)
            .into_iter()
            .map(|g| g.map_or(0.0, |g| values[g]))
            .collect()
    }

    /// Interior component `v_0` of a field at a point of triangle `t`.
    pub fn eval_interior(&self, t: usize, values: &[f64], p: Point) -> f64 {
        let basis = self.frames[t].basis(self.config.k);
        let o = self.dofs.interior_offset(t);
        let coeffs = &values[o..o + basis.dim()];
        basis.values(p).iter().zip(coeffs).map(|(b, c)| b * c).sum()
    }
}
