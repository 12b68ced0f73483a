use serde::Serialize;

use crate::basis::gauss_rule;
use crate::projections::projection_points;
use crate::solver::{Discretization, FieldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormKind {
    L1,
    L2,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::L1 => "L1",
            NormKind::L2 => "L2",
        }
    }
}

/// Value of component `c` in sub-cell `j` of element `l` at reference coordinate `xi`.
fn subcell_value(disc: &Discretization, u: &FieldState, l: usize, j: usize, c: usize, xi: f64) -> f64 {
    let p = disc.p();
    let co = u.element(l, c);
    let poly: f64 = (0..p)
        .map(|k| co[k] * crate::basis::legendre_eval(k + 1, xi))
        .sum();
    poly + co[p + j]
}

/// `||u_c - reference||` over the domain. Each sub-cell is further split at the
/// points of `breaks` inside it, where the reference may jump.
pub fn error_norm<F: Fn(f64) -> f64>(
    disc: &Discretization,
    u: &FieldState,
    component: usize,
    reference: F,
    breaks: &[f64],
    kind: NormKind,
) -> f64 {
    let mesh = disc.mesh();
    let (nodes, weights) = gauss_rule(projection_points(disc.p()));
    let mut sorted: Vec<f64> = breaks.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut total = 0.0;
    for l in 0..mesh.n_elements() {
        let space = disc.element_space(l);
        for j in 0..mesh.n_sub() {
            let (x0, x1) = mesh.subcell_bounds(l, j).expect("sub-cell index");
            let start = sorted.partition_point(|b| *b <= x0);
            let mut pieces = vec![x0];
            pieces.extend(sorted[start..].iter().take_while(|b| **b < x1));
            pieces.push(x1);
            for w in pieces.windows(2) {
                let (a, b) = (w[0], w[1]);
                let half = 0.5 * (b - a);
                for (t, wt) in nodes.iter().zip(&weights) {
                    let x = 0.5 * (a + b) + half * t;
                    let e = (subcell_value(disc, u, l, j, component, space.to_reference(x)) - reference(x)).abs();
                    total += wt
                        * half
                        * match kind {
                            NormKind::L1 => e,
                            NormKind::L2 => e * e,
                        };
                }
            }
        }
    }
    match kind {
        NormKind::L1 => total,
        NormKind::L2 => total.sqrt(),
    }
}

/// `||a_c - b_c||` for two states on the same discretization.
pub fn difference_norm(
    disc: &Discretization,
    a: &FieldState,
    b: &FieldState,
    component: usize,
    kind: NormKind,
) -> f64 {
    let diff = a.with_coefficients(
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| x - y)
            .collect(),
    );
    match kind {
        NormKind::L2 => disc.l2_energy(&diff, component).max(0.0).sqrt(),
        NormKind::L1 => error_norm(disc, &diff, component, |_| 0.0, &[], NormKind::L1),
    }
}

/// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})`.
pub fn observed_order(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}
