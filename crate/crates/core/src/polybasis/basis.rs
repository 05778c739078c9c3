use crate::mesh::Point;

/// Scaled monomials `((x - xc)/h)^a ((y - yc)/h)^b`, `a + b <= degree`,
/// ordered by total degree and then by descending power of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriBasis {
    pub degree: usize,
    pub center: Point,
    pub scale: f64,
    exponents: Vec<(u32, u32)>,
}

pub fn poly_dim(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

impl TriBasis {
    pub fn new(degree: usize, center: Point, scale: f64) -> Self {
        let mut exponents = Vec::with_capacity(poly_dim(degree));
        for d in 0..=degree as u32 {
            for b in 0..=d {
                exponents.push((d - b, b));
            }
        }
        TriBasis {
            degree,
            center,
            scale,
            exponents,
        }
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[(u32, u32)] {
        &self.exponents
    }

    pub fn values(&self, p: Point) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.values_into(p, &mut v);
        v
    }

    pub fn values_into(&self, p: Point, out: &mut [f64]) {
        let (px, py) = self.powers(p);
        for (o, &(a, b)) in out.iter_mut().zip(&self.exponents) {
            *o = px[a as usize] * py[b as usize];
        }
    }

    /// Values and gradients (including the `1/scale` chain-rule factor).
    pub fn eval(&self, p: Point) -> (Vec<f64>, Vec<[f64; 2]>) {
        let mut v = vec![0.0; self.dim()];
        let mut g = vec![[0.0; 2]; self.dim()];
        self.eval_into(p, &mut v, &mut g);
        (v, g)
    }

    pub fn eval_into(&self, p: Point, values: &mut [f64], grads: &mut [[f64; 2]]) {
        let (px, py) = self.powers(p);
        let inv = 1.0 / self.scale;
        for (i, &(a, b)) in self.exponents.iter().enumerate() {
            let (a, b) = (a as usize, b as usize);
            values[i] = px[a] * py[b];
            let dx = if a > 0 { a as f64 * px[a - 1] * py[b] } else { 0.0 };
            let dy = if b > 0 { b as f64 * px[a] * py[b - 1] } else { 0.0 };
            grads[i] = [dx * inv, dy * inv];
        }
    }

    fn powers(&self, p: Point) -> (Vec<f64>, Vec<f64>) {
        let x = (p[0] - self.center[0]) / self.scale;
        let y = (p[1] - self.center[1]) / self.scale;
        let mut px = vec![1.0; self.degree + 1];
        let mut py = vec![1.0; self.degree + 1];
        for i in 1..=self.degree {
            px[i] = px[i - 1] * x;
            py[i] = py[i - 1] * y;
        }
        (px, py)
    }
}

/// Legendre polynomials `L_0..L_degree` in the edge parameter `t in [-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeBasis {
    pub degree: usize,
}

impl EdgeBasis {
    pub fn new(degree: usize) -> Self {
        EdgeBasis { degree }
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn values(&self, t: f64) -> Vec<f64> {
        legendre_values(self.degree, t)
    }

    /// Diagonal of the edge mass matrix, `|e| / (2i + 1)`.
    pub fn mass_diagonal(&self, length: f64) -> Vec<f64> {
        (0..=self.degree).map(|i| length / (2 * i + 1) as f64).collect()
    }
}

pub fn legendre_values(degree: usize, t: f64) -> Vec<f64> {
    let mut v = vec![0.0; degree + 1];
    v[0] = 1.0;
    if degree >= 1 {
        v[1] = t;
    }
    for k in 2..=degree {
        let kf = k as f64;
        v[k] = ((2.0 * kf - 1.0) * t * v[k - 1] - (kf - 1.0) * v[k - 2]) / kf;
    }
    v
}
