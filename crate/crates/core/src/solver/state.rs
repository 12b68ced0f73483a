/// Global coefficient vector: `m` components on `n_elements` elements with
/// `dof` local modes each, stored element-major, then component, then mode.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    m: usize,
    n_elements: usize,
    dof: usize,
    coeffs: Vec<f64>,
    pub time: f64,
}

impl FieldState {
    pub fn zeros(m: usize, n_elements: usize, dof: usize) -> Self {
        Self {
            m,
            n_elements,
            dof,
            coeffs: vec![0.0; m * n_elements * dof],
            time: 0.0,
        }
    }

    pub fn from_coefficients(m: usize, n_elements: usize, dof: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), m * n_elements * dof, "coefficient length mismatch");
        Self {
            m,
            n_elements,
            dof,
            coeffs,
            time: 0.0,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn dof(&self) -> usize {
        self.dof
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    #[inline]
    pub fn offset(&self, element: usize, component: usize) -> usize {
        (element * self.m + component) * self.dof
    }

    pub fn element(&self, element: usize, component: usize) -> &[f64] {
        let o = self.offset(element, component);
        &self.coeffs[o..o + self.dof]
    }

    pub fn element_mut(&mut self, element: usize, component: usize) -> &mut [f64] {
        let o = self.offset(element, component);
        &mut self.coeffs[o..o + self.dof]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|v| v.is_finite())
    }

    /// Same shape, new coefficients.
    pub fn with_coefficients(&self, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), self.coeffs.len());
        Self {
            coeffs,
            ..*self
        }
    }
}
