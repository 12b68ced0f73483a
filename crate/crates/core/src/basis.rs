//! Modal basis for the combined space: zero-average Legendre modes of degree
//! `1..=p` on the element followed by the indicator functions of the `n`
//! sub-cells, left to right.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Legendre polynomial `L_i(x)` normalized so that `L_i(1) = 1`.
pub fn legendre_eval(i: usize, x: f64) -> f64 {
    legendre_with_derivative(i, x).0
}

/// `(L_i(x), L_i'(x))` by the three-term recurrence.
pub fn legendre_with_derivative(i: usize, x: f64) -> (f64, f64) {
    if i == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut d_prev, mut d) = (0.0, 1.0);
    for k in 1..i {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        // L'_{k+1} = L'_{k-1} + (2k+1) L_k
        let d_next = d_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// Gauss-Legendre rule with `q` points on `[-1, 1]`, nodes ascending.
pub fn gauss_rule(q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(q >= 1, "gauss rule needs at least one point");
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let qf = q as f64;
    for i in 0..q.div_ceil(2) {
        // Tricomi initial guess, then Newton
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(q, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(q, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        nodes[i] = x;
        nodes[q - 1 - i] = -x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    (nodes, weights)
}

/// Local discretization of one element: degree `p`, `n` sub-cells, geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementSpace {
    pub p: usize,
    pub n: usize,
    pub left: f64,
    pub right: f64,
}

impl ElementSpace {
    pub fn new(p: usize, n: usize, left: f64, right: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("sub-cell count n must be positive".into()));
        }
        if !(right > left) {
            return Err(Error::InvalidMesh(format!("empty element [{left}, {right}]")));
        }
        Ok(Self { p, n, left, right })
    }

    /// Number of zero-average polynomial modes (`p` in one dimension).
    pub fn n_poly(&self) -> usize {
        self.p
    }

    pub fn dof(&self) -> usize {
        self.p + self.n
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    /// `dx/dxi` of the affine map from `[-1, 1]`.
    pub fn jacobian(&self) -> f64 {
        0.5 * self.width()
    }

    pub fn to_reference(&self, x: f64) -> f64 {
        (2.0 * (x - self.left) / self.width() - 1.0).clamp(-1.0, 1.0)
    }

    pub fn to_physical(&self, xi: f64) -> f64 {
        self.left + 0.5 * (xi + 1.0) * self.width()
    }

    /// Value of basis function `i` at physical coordinate `x` inside the element.
    pub fn basis_eval(&self, i: usize, x: f64) -> Result<f64> {
        if i >= self.dof() {
            return Err(Error::IndexOutOfRange {
                what: "basis function",
                index: i,
                limit: self.dof(),
            });
        }
        if x < self.left || x > self.right {
            return Err(Error::Config(format!(
                "x = {x} outside element [{}, {}]",
                self.left, self.right
            )));
        }
        let xi = self.to_reference(x);
        if i < self.p {
            Ok(legendre_eval(i + 1, xi))
        } else {
            Ok(if subcell_of(xi, self.n) == i - self.p { 1.0 } else { 0.0 })
        }
    }
}

/// Sub-cell index of reference coordinate `xi`; sub-cells are half-open
/// `[xi_j, xi_{j+1})` except the last, which includes `xi = 1`.
pub fn subcell_of(xi: f64, n: usize) -> usize {
    let j = ((xi + 1.0) * 0.5 * n as f64).floor();
    (j.max(0.0) as usize).min(n - 1)
}

/// Reference sub-cell edges `-1 = xi_0 < ... < xi_n = 1`.
pub fn subcell_edges(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| if j == n { 1.0 } else { -1.0 + 2.0 * j as f64 / n as f64 })
        .collect()
}

/// Composite Gauss rule on `[-1, 1]` with `q` points on each of the `n` sub-cells.
#[derive(Debug, Clone)]
pub struct SubcellQuadrature {
    pub q: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Sub-cell owning each node.
    pub owner: Vec<usize>,
}

impl SubcellQuadrature {
    pub fn new(n: usize, q: usize) -> Self {
        let (gx, gw) = gauss_rule(q);
        let edges = subcell_edges(n);
        let mut nodes = Vec::with_capacity(n * q);
        let mut weights = Vec::with_capacity(n * q);
        let mut owner = Vec::with_capacity(n * q);
        for j in 0..n {
            let (a, b) = (edges[j], edges[j + 1]);
            let half = 0.5 * (b - a);
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(a + half * (x + 1.0));
                weights.push(half * w);
                owner.push(j);
            }
        }
        Self { q, nodes, weights, owner }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Quadrature points per sub-cell used for mass matrices and residuals.
pub fn default_points(p: usize) -> usize {
    p + 2
}

/// Reference-element tables shared by every element with the same `(p, n)`.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    pub p: usize,
    pub n: usize,
    pub quad: SubcellQuadrature,
    /// `poly_at_quad[k * nq + g] = L_{k+1}(xi_g)`.
    pub poly_at_quad: Vec<f64>,
    /// `dpoly_at_quad[k * nq + g] = L'_{k+1}(xi_g)` (reference derivative).
    pub dpoly_at_quad: Vec<f64>,
    /// Sub-cell edges in reference coordinates.
    pub edges: Vec<f64>,
    /// `poly_at_edges[k * (n + 1) + j] = L_{k+1}(xi_j)`.
    pub poly_at_edges: Vec<f64>,
    /// `subcell_means[(j, k)]`: mean of `L_k` over sub-cell `j`, `k = 0..=p`.
    pub subcell_means: DMatrix<f64>,
    /// Mass matrix on `[-1, 1]`; the physical one is this times the Jacobian.
    pub mass: DMatrix<f64>,
    /// Penalty mass matrix on `[-1, 1]`.
    pub penalty_mass: DMatrix<f64>,
}

impl ReferenceElement {
    pub fn new(p: usize, n: usize) -> Self {
        Self::with_points(p, n, default_points(p))
    }

    pub fn with_points(p: usize, n: usize, q: usize) -> Self {
        assert!(n >= 1);
        let quad = SubcellQuadrature::new(n, q);
        let nq = quad.len();
        let mut poly_at_quad = vec![0.0; p * nq];
        let mut dpoly_at_quad = vec![0.0; p * nq];
        for k in 0..p {
            for (g, &xi) in quad.nodes.iter().enumerate() {
                let (v, d) = legendre_with_derivative(k + 1, xi);
                poly_at_quad[k * nq + g] = v;
                dpoly_at_quad[k * nq + g] = d;
            }
        }
        let edges = subcell_edges(n);
        let mut poly_at_edges = vec![0.0; p * (n + 1)];
        for k in 0..p {
            for (j, &xi) in edges.iter().enumerate() {
                poly_at_edges[k * (n + 1) + j] = legendre_eval(k + 1, xi);
            }
        }

        let mut subcell_means = DMatrix::zeros(n, p + 1);
        for g in 0..nq {
            let j = quad.owner[g];
            let scale = quad.weights[g] * n as f64 * 0.5;
            subcell_means[(j, 0)] += scale;
            for k in 0..p {
                subcell_means[(j, k + 1)] += scale * poly_at_quad[k * nq + g];
            }
        }

        let dof = p + n;
        let mut mass = DMatrix::zeros(dof, dof);
        let mut phi = vec![0.0; dof];
        for g in 0..nq {
            phi.iter_mut().for_each(|v| *v = 0.0);
            for k in 0..p {
                phi[k] = poly_at_quad[k * nq + g];
            }
            phi[p + quad.owner[g]] = 1.0;
            let w = quad.weights[g];
            for i in 0..dof {
                if phi[i] == 0.0 {
                    continue;
                }
                for j in 0..dof {
                    mass[(i, j)] += w * phi[i] * phi[j];
                }
            }
        }
        let penalty_mass = penalty_mass_from_components(&mass, p, n);

        Self {
            p,
            n,
            quad,
            poly_at_quad,
            dpoly_at_quad,
            edges,
            poly_at_edges,
            subcell_means,
            mass,
            penalty_mass,
        }
    }

    pub fn dof(&self) -> usize {
        self.p + self.n
    }

    /// Value at reference point `xi` of the function with local coefficients `c`.
    pub fn evaluate(&self, c: &[f64], xi: f64) -> f64 {
        let poly: f64 = (0..self.p).map(|k| c[k] * legendre_eval(k + 1, xi)).sum();
        poly + c[self.p + subcell_of(xi, self.n)]
    }
}

/// Matrix `P` (`p x dof`) extracting the polynomial-mode component of a local
/// coefficient vector: identity on the polynomial modes, zero on the indicators.
pub fn polynomial_component_matrix(p: usize, n: usize) -> DMatrix<f64> {
    let mut pm = DMatrix::zeros(p, p + n);
    for k in 0..p {
        pm[(k, k)] = 1.0;
    }
    pm
}

/// `P^T M_poly P` with `M_poly` the polynomial block of `mass`.
fn penalty_mass_from_components(mass: &DMatrix<f64>, p: usize, n: usize) -> DMatrix<f64> {
    let pm = polynomial_component_matrix(p, n);
    let m_poly = mass.view((0, 0), (p, p)).into_owned();
    pm.transpose() * m_poly * pm
}

/// Element mass matrix and penalty mass matrix.
#[derive(Debug, Clone)]
pub struct MassMatrices {
    pub mass: DMatrix<f64>,
    pub penalty_mass: DMatrix<f64>,
}

/// `M_ij = (phi_j, phi_i)_K` with per-sub-cell Gauss quadrature.
pub fn assemble_mass(space: &ElementSpace) -> DMatrix<f64> {
    ReferenceElement::new(space.p, space.n).mass * space.jacobian()
}

/// Gram matrix of the polynomial-mode components of the basis functions.
pub fn assemble_penalty_mass(space: &ElementSpace) -> DMatrix<f64> {
    ReferenceElement::new(space.p, space.n).penalty_mass * space.jacobian()
}

pub fn assemble_mass_matrices(space: &ElementSpace) -> MassMatrices {
    let r = ReferenceElement::new(space.p, space.n);
    let j = space.jacobian();
    MassMatrices {
        mass: &r.mass * j,
        penalty_mass: &r.penalty_mass * j,
    }
}
