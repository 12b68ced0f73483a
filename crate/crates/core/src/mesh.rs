//! One-dimensional element partition with a uniform sub-grid inside every element.

use crate::error::{Error, Result};

/// Partition of `[a, b]` into elements, each split into `n_sub` equal sub-cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    boundaries: Vec<f64>,
    n_sub: usize,
}

impl Mesh {
    /// Build a mesh from an explicit, strictly increasing list of element boundaries.
    pub fn from_boundaries(boundaries: Vec<f64>, n_sub: usize) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::InvalidMesh("need at least two element boundaries".into()));
        }
        if n_sub == 0 {
            return Err(Error::InvalidMesh("n_sub must be positive".into()));
        }
        if boundaries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMesh("non-finite element boundary".into()));
        }
        if boundaries.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMesh("element boundaries must be strictly increasing".into()));
        }
        Ok(Self { boundaries, n_sub })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.boundaries[0], *self.boundaries.last().unwrap())
    }

    pub fn n_elements(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn n_sub(&self) -> usize {
        self.n_sub
    }

    pub fn n_subcells(&self) -> usize {
        self.n_elements() * self.n_sub
    }

    pub fn element_boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn element_bounds(&self, element: usize) -> Result<(f64, f64)> {
        if element >= self.n_elements() {
            return Err(Error::IndexOutOfRange {
                what: "element",
                index: element,
                limit: self.n_elements(),
            });
        }
        Ok((self.boundaries[element], self.boundaries[element + 1]))
    }

    pub fn element_width(&self, element: usize) -> f64 {
        self.boundaries[element + 1] - self.boundaries[element]
    }

    /// Bounds `[left, right]` of sub-cell `sub` of element `element`.
    pub fn subcell_bounds(&self, element: usize, sub: usize) -> Result<(f64, f64)> {
        let (a, b) = self.element_bounds(element)?;
        if sub >= self.n_sub {
            return Err(Error::IndexOutOfRange {
                what: "sub-cell",
                index: sub,
                limit: self.n_sub,
            });
        }
        let h = (b - a) / self.n_sub as f64;
        let left = a + sub as f64 * h;
        // pin the last edge to the element boundary so sub-cells tile exactly
        let right = if sub + 1 == self.n_sub { b } else { a + (sub + 1) as f64 * h };
        Ok((left, right))
    }

    /// Element containing `x`; points on an interior boundary belong to the element on the right.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let (a, b) = self.domain();
        if x < a || x > b {
            return None;
        }
        let idx = self.boundaries.partition_point(|&bd| bd <= x);
        Some(idx.saturating_sub(1).min(self.n_elements() - 1))
    }

    /// Smallest sub-cell width over the mesh.
    pub fn min_subcell_width(&self) -> f64 {
        (0..self.n_elements())
            .map(|l| self.element_width(l))
            .fold(f64::INFINITY, f64::min)
            / self.n_sub as f64
    }
}

/// `n_elements` equal elements on `[a, b]`, each split into `n_sub` equal sub-cells.
pub fn build_uniform_mesh(a: f64, b: f64, n_elements: usize, n_sub: usize) -> Result<Mesh> {
    if !(b > a) {
        return Err(Error::InvalidMesh(format!("empty domain [{a}, {b}]")));
    }
    if n_elements == 0 {
        return Err(Error::InvalidMesh("n_elements must be positive".into()));
    }
    let h = (b - a) / n_elements as f64;
    let mut boundaries: Vec<f64> = (0..n_elements).map(|l| a + l as f64 * h).collect();
    boundaries.push(b);
    Mesh::from_boundaries(boundaries, n_sub)
}
