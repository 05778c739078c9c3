/// Coefficients of a weak function `{v_0, v_b}` over the free degrees of
/// freedom of a [`super::WgSpace`]. Edge values are single-valued by
/// construction and vanish on the boundary.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeakField {
    values: Vec<f64>,
}

impl WeakField {
    pub fn zeros(dim: usize) -> Self {
        WeakField { values: vec![0.0; dim] }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        WeakField { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sub(&self, other: &WeakField) -> WeakField {
        WeakField {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }
}
