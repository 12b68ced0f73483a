use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::basis::{ElementSpace, ReferenceElement};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::physics::{boundary_ghost, BoundaryCondition, ConservationLaw, Inadmissible, State};
use crate::projections::{project_l2_split, project_penalized_split};

use super::imex::{ImexTableau, SplitOperator};
use super::state::FieldState;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DiscretizationOptions {
    /// Harten entropy fix in the Roe flux (gas dynamics only).
    pub entropy_fix: bool,
}

/// DG discretization of one conservation law on a mesh with fixed `(p, n)`.
#[derive(Debug, Clone)]
pub struct Discretization {
    mesh: Mesh,
    law: ConservationLaw,
    reference: ReferenceElement,
    mass_inv: DMatrix<f64>,
    left_bc: BoundaryCondition,
    right_bc: BoundaryCondition,
    options: DiscretizationOptions,
}

impl Discretization {
    pub fn new(
        mesh: Mesh,
        law: ConservationLaw,
        p: usize,
        left_bc: BoundaryCondition,
        right_bc: BoundaryCondition,
        options: DiscretizationOptions,
    ) -> Result<Self> {
        let periodic_left = left_bc == BoundaryCondition::Periodic;
        let periodic_right = right_bc == BoundaryCondition::Periodic;
        if periodic_left != periodic_right {
            return Err(Error::Config(
                "periodic boundaries must be applied at both ends".into(),
            ));
        }
        let reference = ReferenceElement::new(p, mesh.n_sub());
        let mass_inv = reference
            .mass
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Config("singular reference mass matrix".into()))?;
        Ok(Self {
            mesh,
            law,
            reference,
            mass_inv,
            left_bc,
            right_bc,
            options,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn law(&self) -> &ConservationLaw {
        &self.law
    }

    pub fn reference(&self) -> &ReferenceElement {
        &self.reference
    }

    pub fn p(&self) -> usize {
        self.reference.p
    }

    pub fn n(&self) -> usize {
        self.reference.n
    }

    pub fn dof(&self) -> usize {
        self.reference.dof()
    }

    pub fn components(&self) -> usize {
        self.law.components()
    }

    pub fn is_periodic(&self) -> bool {
        self.left_bc == BoundaryCondition::Periodic
    }

    pub fn element_space(&self, element: usize) -> ElementSpace {
        let (a, b) = self.mesh.element_bounds(element).expect("element index");
        ElementSpace { p: self.p(), n: self.n(), left: a, right: b }
    }

    fn jacobian(&self, element: usize) -> f64 {
        0.5 * self.mesh.element_width(element)
    }

    pub fn zero_state(&self) -> FieldState {
        FieldState::zeros(self.components(), self.mesh.n_elements(), self.dof())
    }

    /// L2 projection of `f` onto the discrete space, splitting the quadrature
    /// at the listed discontinuity locations.
    pub fn project<F: Fn(f64) -> State>(&self, f: F, breaks: &[f64]) -> FieldState {
        let mut state = self.zero_state();
        for l in 0..self.mesh.n_elements() {
            let space = self.element_space(l);
            for c in 0..self.components() {
                let coeffs = project_l2_split(|x| f(x)[c], &space, breaks);
                state.element_mut(l, c).copy_from_slice(&coeffs);
            }
        }
        state
    }

    /// Penalized projection of `f`, element `l` using penalty `gammas[l]`.
    /// Elements with zero penalty get the plain L2 projection.
    pub fn project_penalized<F: Fn(f64) -> State>(
        &self,
        f: F,
        breaks: &[f64],
        gammas: &[f64],
    ) -> Result<FieldState> {
        let mut state = self.zero_state();
        for (l, &gamma) in gammas.iter().enumerate().take(self.mesh.n_elements()) {
            let space = self.element_space(l);
            for c in 0..self.components() {
                let coeffs = project_penalized_split(|x| f(x)[c], &space, gamma, breaks)?;
                state.element_mut(l, c).copy_from_slice(&coeffs);
            }
        }
        Ok(state)
    }

    /// Point value in `element` at reference coordinate `xi`.
    pub fn evaluate_reference(&self, u: &FieldState, element: usize, xi: f64) -> State {
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate().take(self.components()) {
            *o = self.reference.evaluate(u.element(element, c), xi);
        }
        out
    }

    /// Point value at physical `x`.
    pub fn evaluate(&self, u: &FieldState, x: f64) -> State {
        let l = self.mesh.locate(x).expect("x inside the domain");
        let xi = self.element_space(l).to_reference(x);
        self.evaluate_reference(u, l, xi)
    }

    pub fn subcell_averages(&self, u: &FieldState, element: usize, component: usize) -> Vec<f64> {
        crate::projections::subcell_averages(&self.reference, u.element(element, component))
    }

    /// `int u_c dx` for every component.
    pub fn conserved_totals(&self, u: &FieldState) -> Vec<f64> {
        let n = self.n();
        (0..self.components())
            .map(|c| {
                (0..self.mesh.n_elements())
                    .map(|l| {
                        let w = self.mesh.element_width(l) / n as f64;
                        self.subcell_averages(u, l, c).iter().map(|a| a * w).sum::<f64>()
                    })
                    .sum()
            })
            .collect()
    }

    /// `||poly(u)||_K^2`, the energy in the polynomial modes of one element.
    pub fn polynomial_energy(&self, u: &FieldState, element: usize, component: usize) -> f64 {
        let c = u.element(element, component);
        let h = self.mesh.element_width(element);
        (0..self.p())
            .map(|k| c[k] * c[k] * h / (2.0 * k as f64 + 3.0))
            .sum()
    }

    /// `||u_c||^2` over the whole domain, via the element mass matrices.
    pub fn l2_energy(&self, u: &FieldState, component: usize) -> f64 {
        (0..self.mesh.n_elements())
            .map(|l| {
                let c = DVector::from_column_slice(u.element(l, component));
                self.jacobian(l) * c.dot(&(&self.reference.mass * &c))
            })
            .sum()
    }

    /// Largest wave speed over all quadrature points and sub-cell edges.
    pub fn max_wave_speed(&self, u: &FieldState) -> Result<f64> {
        let mut lam = 0.0f64;
        for l in 0..self.mesh.n_elements() {
            let space = self.element_space(l);
            let pts = self.reference.quad.nodes.iter().chain(self.reference.edges.iter());
            for &xi in pts {
                let s = self.evaluate_reference(u, l, xi);
                let x = space.to_physical(xi);
                let v = self.law.max_wave_speed(&s, x).map_err(|e| inadmissible(l, x, e))?;
                lam = lam.max(v);
            }
        }
        Ok(lam)
    }

    fn face_position(&self, face: usize) -> f64 {
        let nsub = self.mesh.n_subcells();
        if face == nsub {
            return self.mesh.domain().1;
        }
        let n = self.n();
        self.mesh.subcell_bounds(face / n, face % n).expect("face index").0
    }

    /// Roe flux at every sub-cell face, each computed once. Face `g` is the
    /// left edge of global sub-cell `g`; the last face is the right boundary.
    fn face_fluxes(&self, u: &[f64], t: f64) -> Result<Vec<State>> {
        let (p, n, m, dof) = (self.p(), self.n(), self.components(), self.dof());
        let ne = self.mesh.n_elements();
        let nsub = ne * n;
        let r = &self.reference;
        let mut left_tr = vec![[0.0; 3]; nsub];
        let mut right_tr = vec![[0.0; 3]; nsub];
        let mut poly_edge = vec![0.0; n + 1];
        for l in 0..ne {
            for c in 0..m {
                let co = &u[(l * m + c) * dof..(l * m + c + 1) * dof];
                for (j, pe) in poly_edge.iter_mut().enumerate() {
                    *pe = (0..p).map(|k| co[k] * r.poly_at_edges[k * (n + 1) + j]).sum();
                }
                for j in 0..n {
                    left_tr[l * n + j][c] = poly_edge[j] + co[p + j];
                    right_tr[l * n + j][c] = poly_edge[j + 1] + co[p + j];
                }
            }
        }
        let mut fluxes = vec![[0.0; 3]; nsub + 1];
        let fix = self.options.entropy_fix;
        for g in 1..nsub {
            fluxes[g] = self
                .law
                .roe_flux_with(&right_tr[g - 1], &left_tr[g], fix)
                .map_err(|e| inadmissible(g / n, self.face_position(g), e))?;
        }
        let (a, b) = self.mesh.domain();
        let ghost_l = boundary_ghost(&self.left_bc, &left_tr[0], &right_tr[nsub - 1], &self.law, a, t)
            .map_err(|e| relocate(e, 0))?;
        fluxes[0] = self
            .law
            .roe_flux_with(&ghost_l, &left_tr[0], fix)
            .map_err(|e| inadmissible(0, a, e))?;
        if self.is_periodic() {
            fluxes[nsub] = fluxes[0];
        } else {
            let ghost_r =
                boundary_ghost(&self.right_bc, &right_tr[nsub - 1], &left_tr[0], &self.law, b, t)
                    .map_err(|e| relocate(e, ne - 1))?;
            fluxes[nsub] = self
                .law
                .roe_flux_with(&right_tr[nsub - 1], &ghost_r, fix)
                .map_err(|e| inadmissible(ne - 1, b, e))?;
        }
        Ok(fluxes)
    }

    /// Right-hand side `R(U)`: volume flux terms, sub-cell face fluxes and sources.
    pub fn residual(&self, u: &FieldState, t: f64) -> Result<FieldState> {
        let mut out = self.zero_state();
        self.residual_into(u.as_slice(), t, out.as_mut_slice(), None)?;
        Ok(out)
    }

    /// Like [`Self::residual`], writing into `out` and visiting elements in
    /// `order` when given.
    pub fn residual_into(
        &self,
        u: &[f64],
        t: f64,
        out: &mut [f64],
        order: Option<&[usize]>,
    ) -> Result<()> {
        let (p, n, m, dof) = (self.p(), self.n(), self.components(), self.dof());
        let ne = self.mesh.n_elements();
        let r = &self.reference;
        let nq = r.quad.len();
        let fluxes = self.face_fluxes(u, t)?;
        let has_source = self.law.has_source();
        let natural: Vec<usize>;
        let order = match order {
            Some(o) => o,
            None => {
                natural = (0..ne).collect();
                &natural
            }
        };
        for &l in order {
            let block = &mut out[l * m * dof..(l + 1) * m * dof];
            block.iter_mut().for_each(|v| *v = 0.0);
            let u_el = &u[l * m * dof..(l + 1) * m * dof];
            let space = self.element_space(l);
            let jac = self.jacobian(l);
            for g in 0..nq {
                let j = r.quad.owner[g];
                let mut state = [0.0; 3];
                for (c, s) in state.iter_mut().enumerate().take(m) {
                    let co = &u_el[c * dof..(c + 1) * dof];
                    let poly: f64 = (0..p).map(|k| co[k] * r.poly_at_quad[k * nq + g]).sum();
                    *s = poly + co[p + j];
                }
                let x = space.to_physical(r.quad.nodes[g]);
                let w = r.quad.weights[g];
                if p > 0 {
                    let f = self.law.flux(&state, x).map_err(|e| inadmissible(l, x, e))?;
                    for c in 0..m {
                        let wf = w * f[c];
                        for k in 0..p {
                            block[c * dof + k] += wf * r.dpoly_at_quad[k * nq + g];
                        }
                    }
                }
                if has_source {
                    let s = self.law.source(&state, x).map_err(|e| inadmissible(l, x, e))?;
                    for c in 0..m {
                        let ws = w * jac * s[c];
                        for k in 0..p {
                            block[c * dof + k] += ws * r.poly_at_quad[k * nq + g];
                        }
                        block[c * dof + p + j] += ws;
                    }
                }
            }
            let (f_left, f_right) = (fluxes[l * n], fluxes[(l + 1) * n]);
            for c in 0..m {
                for k in 0..p {
                    block[c * dof + k] += f_left[c] * r.poly_at_edges[k * (n + 1)]
                        - f_right[c] * r.poly_at_edges[k * (n + 1) + n];
                }
                for j in 0..n {
                    block[c * dof + p + j] += fluxes[l * n + j][c] - fluxes[l * n + j + 1][c];
                }
            }
        }
        Ok(())
    }

    /// Replaces `r` by `M^{-1} r` element by element.
    pub fn apply_mass_inverse(&self, r: &mut [f64]) {
        let dof = self.dof();
        let m = self.components();
        let mut tmp = vec![0.0; dof];
        for l in 0..self.mesh.n_elements() {
            let inv_j = 1.0 / self.jacobian(l);
            for c in 0..m {
                let block = &mut r[(l * m + c) * dof..(l * m + c + 1) * dof];
                for (i, t) in tmp.iter_mut().enumerate() {
                    *t = (0..dof).map(|k| self.mass_inv[(i, k)] * block[k]).sum::<f64>() * inv_j;
                }
                block.copy_from_slice(&tmp);
            }
        }
    }

    /// `Gamma M_pp U`, one penalty per element applied to every component.
    pub fn apply_penalty(&self, u: &FieldState, gammas: &[f64]) -> FieldState {
        let mut out = self.zero_state();
        let dof = self.dof();
        for l in 0..self.mesh.n_elements() {
            let scale = gammas[l] * self.jacobian(l);
            for c in 0..self.components() {
                let src = u.element(l, c);
                let dst = out.element_mut(l, c);
                for i in 0..dof {
                    dst[i] = scale
                        * (0..dof)
                            .map(|k| self.reference.penalty_mass[(i, k)] * src[k])
                            .sum::<f64>();
                }
            }
        }
        out
    }
}

fn inadmissible(element: usize, x: f64, e: Inadmissible) -> Error {
    Error::Inadmissible {
        element,
        x,
        reason: e.0,
    }
}

fn relocate(e: Error, element: usize) -> Error {
    match e {
        Error::Inadmissible { x, reason, .. } => Error::Inadmissible { element, x, reason },
        other => other,
    }
}

/// The split system of one time step with the element penalties frozen.
pub struct FrozenPenaltySystem<'a> {
    disc: &'a Discretization,
    gammas: Vec<f64>,
    /// Cholesky factors of `M + a_dt gamma M_pp` per cached `a_dt`, per element.
    factors: Vec<(f64, Vec<Option<Cholesky<f64, Dyn>>>)>,
}

impl<'a> FrozenPenaltySystem<'a> {
    /// Factorizes the stage matrices of every penalized element once for the
    /// diagonal entries of `tableau` at step size `dt`.
    pub fn new(disc: &'a Discretization, gammas: Vec<f64>, dt: f64, tableau: &ImexTableau) -> Self {
        assert_eq!(gammas.len(), disc.mesh.n_elements());
        let factors = tableau
            .diagonal_values()
            .into_iter()
            .map(|d| {
                let a_dt = d * dt;
                let per_elem = gammas
                    .iter()
                    .map(|&g| (g > 0.0).then(|| Self::factor(disc, a_dt, g)))
                    .collect();
                (a_dt, per_elem)
            })
            .collect();
        Self {
            disc,
            gammas,
            factors,
        }
    }

    fn factor(disc: &Discretization, a_dt: f64, gamma: f64) -> Cholesky<f64, Dyn> {
        let r = &disc.reference;
        (&r.mass + &r.penalty_mass * (a_dt * gamma))
            .cholesky()
            .expect("stage matrix is symmetric positive definite")
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }
}

impl SplitOperator for FrozenPenaltySystem<'_> {
    fn explicit(&self, t: f64, u: &[f64], out: &mut [f64]) -> Result<()> {
        self.disc.residual_into(u, t, out, None)?;
        self.disc.apply_mass_inverse(out);
        Ok(())
    }

    fn implicit(&self, a_dt: f64, u: &[f64], out: &mut [f64]) -> Result<()> {
        let disc = self.disc;
        let (m, dof) = (disc.components(), disc.dof());
        let cached = self.factors.iter().find(|(d, _)| *d == a_dt).map(|(_, f)| f);
        let mpp = &disc.reference.penalty_mass;
        for (l, &gamma) in self.gammas.iter().enumerate() {
            let block = &mut out[l * m * dof..(l + 1) * m * dof];
            if gamma == 0.0 {
                block.iter_mut().for_each(|v| *v = 0.0);
                continue;
            }
            let owned;
            let chol = match cached.and_then(|f| f[l].as_ref()) {
                Some(c) => c,
                None => {
                    owned = Self::factor(disc, a_dt, gamma);
                    &owned
                }
            };
            for c in 0..m {
                let src = &u[(l * m + c) * dof..(l * m + c + 1) * dof];
                // the Jacobian scales both sides and cancels
                let rhs = DVector::from_fn(dof, |i, _| {
                    -gamma * (0..dof).map(|k| mpp[(i, k)] * src[k]).sum::<f64>()
                });
                let sol = chol.solve(&rhs);
                block[c * dof..(c + 1) * dof].copy_from_slice(sol.as_slice());
            }
        }
        Ok(())
    }
}
