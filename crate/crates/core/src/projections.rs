//! Projections onto the combined space and its two sub-spaces, the
//! average-preserving polynomial fit used by the sensor, and the numerical
//! injectivity check for sub-cell averaging of polynomials.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::basis::{gauss_rule, legendre_eval, ElementSpace, ReferenceElement};
use crate::error::{Error, Result};

/// Local coefficients of one solution component on one element, laid out as
/// `p` polynomial modes followed by `n` sub-cell indicators.
pub type LocalCoefficients = Vec<f64>;

/// Relative singular-value threshold separating rank deficiency from conditioning.
pub const INJECTIVITY_TOLERANCE: f64 = 1e-10;

/// Gauss points per sub-cell (or sub-cell piece) when projecting arbitrary functions.
pub fn projection_points(p: usize) -> usize {
    p + 8
}

/// Value at physical `x` of the function with local coefficients `c`.
pub fn evaluate(space: &ElementSpace, c: &[f64], x: f64) -> f64 {
    let xi = space.to_reference(x);
    let poly: f64 = (0..space.p).map(|k| c[k] * legendre_eval(k + 1, xi)).sum();
    poly + c[space.p + crate::basis::subcell_of(xi, space.n)]
}

/// `b_i = (f, phi_i)_K`, integrating each sub-cell piecewise between the given
/// break points so that jumps of `f` at those points are integrated exactly.
pub fn load_vector<F: Fn(f64) -> f64>(f: F, space: &ElementSpace, breaks: &[f64]) -> Vec<f64> {
    let (p, n) = (space.p, space.n);
    let (gx, gw) = gauss_rule(projection_points(p));
    let mut b = vec![0.0; p + n];
    let edges = crate::basis::subcell_edges(n);
    for j in 0..n {
        let (a, c) = (space.to_physical(edges[j]), space.to_physical(edges[j + 1]));
        let mut cuts = vec![a];
        cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < c));
        cuts.push(c);
        cuts.sort_by(f64::total_cmp);
        for piece in cuts.windows(2) {
            let (lo, hi) = (piece[0], piece[1]);
            let half = 0.5 * (hi - lo);
            for (x, w) in gx.iter().zip(&gw) {
                let xp = lo + half * (x + 1.0);
                let fw = f(xp) * w * half;
                b[p + j] += fw;
                let xi = space.to_reference(xp);
                for k in 0..p {
                    b[k] += fw * legendre_eval(k + 1, xi);
                }
            }
        }
    }
    b
}

fn solve_spd(a: DMatrix<f64>, b: Vec<f64>) -> Vec<f64> {
    let chol = a
        .cholesky()
        .expect("element matrix must be symmetric positive definite");
    chol.solve(&DVector::from_vec(b)).iter().copied().collect()
}

/// L2 projection onto the combined space of element `space`.
pub fn project_l2<F: Fn(f64) -> f64>(f: F, space: &ElementSpace) -> LocalCoefficients {
    project_l2_split(f, space, &[])
}

/// L2 projection with quadrature split at the discontinuities of `f` listed in `breaks`.
pub fn project_l2_split<F: Fn(f64) -> f64>(
    f: F,
    space: &ElementSpace,
    breaks: &[f64],
) -> LocalCoefficients {
    let r = ReferenceElement::new(space.p, space.n);
    let b = load_vector(f, space, breaks);
    solve_spd(r.mass.clone() * space.jacobian(), b)
}

/// Coefficients on `L_1..L_p` of the L2 projection onto zero-average
/// polynomials of the function represented by `c`.
pub fn project_ho(c: &[f64], space: &ElementSpace) -> Vec<f64> {
    let r = ReferenceElement::new(space.p, space.n);
    project_ho_with(&r, c)
}

pub(crate) fn project_ho_with(r: &ReferenceElement, c: &[f64]) -> Vec<f64> {
    let (p, n) = (r.p, r.n);
    (0..p)
        .map(|k| {
            let kf = (k + 1) as f64;
            // (1_j, L_k) / (L_k, L_k) = (2/n) mean_jk (2k+1)/2
            let from_indicators: f64 = (0..n)
                .map(|j| c[p + j] * r.subcell_means[(j, k + 1)] * (2.0 * kf + 1.0) / n as f64)
                .sum();
            c[k] + from_indicators
        })
        .collect()
}

/// Polynomial-mode component of `c`, the part penalized by the sensor.
pub fn polynomial_component(c: &[f64], space: &ElementSpace) -> Vec<f64> {
    c[..space.p].to_vec()
}

/// Sub-cell averages of the function represented by `c`.
pub fn project_lo(c: &[f64], space: &ElementSpace) -> Vec<f64> {
    let r = ReferenceElement::new(space.p, space.n);
    subcell_averages(&r, c)
}

pub(crate) fn subcell_averages(r: &ReferenceElement, c: &[f64]) -> Vec<f64> {
    let (p, n) = (r.p, r.n);
    (0..n)
        .map(|j| {
            let poly: f64 = (0..p).map(|k| r.subcell_means[(j, k + 1)] * c[k]).sum();
            c[p + j] + poly
        })
        .collect()
}

/// Penalized projection: solves `(M + gamma M_pp) c = b`.
pub fn project_penalized<F: Fn(f64) -> f64>(
    f: F,
    space: &ElementSpace,
    gamma: f64,
) -> Result<LocalCoefficients> {
    project_penalized_split(f, space, gamma, &[])
}

pub fn project_penalized_split<F: Fn(f64) -> f64>(
    f: F,
    space: &ElementSpace,
    gamma: f64,
    breaks: &[f64],
) -> Result<LocalCoefficients> {
    if !(gamma >= 0.0) {
        return Err(Error::NegativePenalty(gamma));
    }
    let r = ReferenceElement::new(space.p, space.n);
    let b = load_vector(f, space, breaks);
    let a = (&r.mass + &r.penalty_mass * gamma) * space.jacobian();
    Ok(solve_spd(a, b))
}

/// `||w - f||_K^2 + gamma ||poly(w)||_K^2`, the functional minimized by the
/// penalized projection.
pub fn penalized_functional<F: Fn(f64) -> f64>(
    w: &[f64],
    f: F,
    space: &ElementSpace,
    gamma: f64,
    breaks: &[f64],
) -> f64 {
    let (gx, gw) = gauss_rule(projection_points(space.p));
    let edges = crate::basis::subcell_edges(space.n);
    let mut misfit = 0.0;
    for j in 0..space.n {
        let (a, c) = (space.to_physical(edges[j]), space.to_physical(edges[j + 1]));
        let mut cuts = vec![a];
        cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < c));
        cuts.push(c);
        cuts.sort_by(f64::total_cmp);
        for piece in cuts.windows(2) {
            let half = 0.5 * (piece[1] - piece[0]);
            for (x, wq) in gx.iter().zip(&gw) {
                let xp = piece[0] + half * (x + 1.0);
                // evaluate inside sub-cell j even at its right edge
                let xi = space.to_reference(xp);
                let poly: f64 = (0..space.p).map(|k| w[k] * legendre_eval(k + 1, xi)).sum();
                let d = poly + w[space.p + j] - f(xp);
                misfit += wq * half * d * d;
            }
        }
    }
    let poly_energy: f64 = (0..space.p)
        .map(|k| w[k] * w[k] * space.width() / (2.0 * k as f64 + 3.0))
        .sum();
    misfit + gamma * poly_energy
}

/// Weighted least-squares fit of a full polynomial (constant included) to
/// sub-cell averages, precomputed for one `(p, n)`.
#[derive(Debug, Clone)]
pub struct AveragePreservingFit {
    pub p: usize,
    pub n: usize,
    /// `(p+1) x n`: sub-cell averages to coefficients on `L_0..L_p`.
    fit: DMatrix<f64>,
    /// `n x n`: sub-cell averages to residual averages `a - B fit(a)`.
    residual: DMatrix<f64>,
    pub smin: f64,
    pub smax: f64,
}

impl AveragePreservingFit {
    pub fn new(r: &ReferenceElement) -> Result<Self> {
        let (p, n) = (r.p, r.n);
        let b = &r.subcell_means;
        // uniform sub-cells: weights |k_j| = 2/n in reference units
        let sqrt_w = DVector::from_element(n, (2.0 / n as f64).sqrt());
        let bw = DMatrix::from_fn(n, p + 1, |j, k| sqrt_w[j] * b[(j, k)]);
        let svd = bw.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = if n >= p + 1 { svd.singular_values.min() } else { 0.0 };
        if !(smin > INJECTIVITY_TOLERANCE * smax) {
            return Err(Error::NonInjective {
                p,
                n,
                ratio: smin / smax,
            });
        }
        let pinv = svd
            .pseudo_inverse(INJECTIVITY_TOLERANCE * smax)
            .map_err(|e| Error::Config(e.to_string()))?;
        let fit = DMatrix::from_fn(p + 1, n, |k, j| pinv[(k, j)] * sqrt_w[j]);
        let residual = DMatrix::identity(n, n) - b * &fit;
        Ok(Self {
            p,
            n,
            fit,
            residual,
            smin,
            smax,
        })
    }

    /// Coefficients on `L_0..L_p` of the best polynomial for the given averages.
    pub fn fit_averages(&self, averages: &[f64]) -> Vec<f64> {
        (0..=self.p)
            .map(|k| (0..self.n).map(|j| self.fit[(k, j)] * averages[j]).sum())
            .collect()
    }

    /// Sub-cell average discrepancy between the field and its polynomial fit.
    pub fn residual_averages(&self, averages: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.residual[(i, j)] * averages[j]).sum())
            .collect()
    }

    pub fn max_residual(&self, averages: &[f64]) -> f64 {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| self.residual[(i, j)] * averages[j])
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max)
    }
}

/// The polynomial (constant included, coefficients on `L_0..L_p`) whose
/// sub-cell averages best match those of `c` in the `|k_j|`-weighted sense.
pub fn project_avg_preserving(c: &[f64], space: &ElementSpace) -> Result<Vec<f64>> {
    let r = ReferenceElement::new(space.p, space.n);
    let fit = AveragePreservingFit::new(&r)?;
    Ok(fit.fit_averages(&subcell_averages(&r, c)))
}

/// Outcome of the numerical injectivity check for sub-cell averaging.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct InjectivityReport {
    pub p: usize,
    pub r: usize,
    pub d: usize,
    /// Number of sub-cells, `(r+1)^d`.
    pub n: usize,
    /// Dimension of the full polynomial space of degree `p`.
    pub dofs: usize,
    pub injective: bool,
    pub smin: f64,
    pub smax: f64,
}

impl InjectivityReport {
    pub fn smallest_singular_value(&self) -> f64 {
        self.smin
    }
}

/// Exponents `(a, b)` of the monomials of total degree at most `p` in `d` variables.
fn monomial_exponents(p: usize, d: usize) -> Vec<(usize, usize)> {
    match d {
        1 => (0..=p).map(|a| (a, 0)).collect(),
        _ => (0..=p)
            .flat_map(|total| (0..=total).map(move |b| (total - b, b)))
            .collect(),
    }
}

/// Averages of `x^a y^b` over a triangle via a collapsed tensor Gauss rule.
fn triangle_monomial_averages(v: [[f64; 2]; 3], exps: &[(usize, usize)], q: usize) -> Vec<f64> {
    let (gx, gw) = gauss_rule(q);
    let e1 = [v[1][0] - v[0][0], v[1][1] - v[0][1]];
    let e2 = [v[2][0] - v[1][0], v[2][1] - v[1][1]];
    let det = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
    let area = 0.5 * det;
    let mut out = vec![0.0; exps.len()];
    for (s, ws) in gx.iter().zip(&gw) {
        let s = 0.5 * (s + 1.0);
        for (t, wt) in gx.iter().zip(&gw) {
            let t = 0.5 * (t + 1.0);
            let x = v[0][0] + s * e1[0] + s * t * e2[0];
            let y = v[0][1] + s * e1[1] + s * t * e2[1];
            let w = 0.25 * ws * wt * s * det;
            for (o, &(a, b)) in out.iter_mut().zip(exps) {
                *o += w * x.powi(a as i32) * y.powi(b as i32);
            }
        }
    }
    out.iter_mut().for_each(|o| *o /= area);
    out
}

/// Builds the sub-cell average matrix of a monomial basis of total degree
/// `<= p` over the uniform subdivision of the unit simplex into `(r+1)^d`
/// congruent pieces and reports whether it has full column rank.
pub fn check_injectivity(p: usize, r: usize, d: usize) -> Result<InjectivityReport> {
    if d != 1 && d != 2 {
        return Err(Error::Config(format!("dimension must be 1 or 2, got {d}")));
    }
    let exps = monomial_exponents(p, d);
    let dofs = exps.len();
    let m = r + 1;
    let h = 1.0 / m as f64;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    if d == 1 {
        for j in 0..m {
            let (a, b) = (j as f64 * h, (j + 1) as f64 * h);
            // centred coordinate 2x - 1 keeps the matrix well conditioned
            let (a, b) = (2.0 * a - 1.0, 2.0 * b - 1.0);
            rows.push(
                exps.iter()
                    .map(|&(e, _)| {
                        let k = e as i32 + 1;
                        (b.powi(k) - a.powi(k)) / (k as f64 * (b - a))
                    })
                    .collect(),
            );
        }
    } else {
        let q = p + 2;
        let pt = |i: usize, j: usize| [i as f64 * h, j as f64 * h];
        for i in 0..m {
            for j in 0..m - i {
                rows.push(triangle_monomial_averages(
                    [pt(i, j), pt(i + 1, j), pt(i, j + 1)],
                    &exps,
                    q,
                ));
                if i + j + 1 < m {
                    rows.push(triangle_monomial_averages(
                        [pt(i + 1, j), pt(i + 1, j + 1), pt(i, j + 1)],
                        &exps,
                        q,
                    ));
                }
            }
        }
    }
    let n = rows.len();
    debug_assert_eq!(n, m.pow(d as u32));
    let a = DMatrix::from_fn(n, dofs, |i, k| rows[i][k]);
    let sv = a.singular_values();
    let smax = sv.max();
    // fewer rows than columns: the trailing singular values are structurally zero
    let smin = if n >= dofs { sv.min() } else { 0.0 };
    Ok(InjectivityReport {
        p,
        r,
        d,
        n,
        dofs,
        injective: smin > INJECTIVITY_TOLERANCE * smax,
        smin,
        smax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(p: usize, n: usize) -> ElementSpace {
        ElementSpace::new(p, n, -1.0, 1.0).unwrap()
    }

    #[test]
    fn constant_is_reproduced() {
        let s = space(3, 5);
        let c = project_l2(|_| 2.5, &s);
        for k in 0..3 {
            assert!(c[k].abs() < 1e-13);
        }
        for j in 0..5 {
            assert!((c[3 + j] - 2.5).abs() < 1e-13);
        }
    }

    #[test]
    fn heaviside_on_subcell_edge_is_reproduced() {
        let s = space(4, 4);
        let c = project_l2_split(|x| if x < 0.0 { 0.0 } else { 1.0 }, &s, &[0.0]);
        let expect = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0];
        for (a, b) in c.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn linear_function_is_reproduced() {
        for n in 1..6 {
            let s = space(2, n);
            let c = project_l2(|x| x, &s);
            assert!((c[0] - 1.0).abs() < 1e-12);
            assert!(c[1].abs() < 1e-12);
            assert!(c[2..].iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn ho_projection_examples() {
        let s = space(1, 2);
        // indicator of [-1, 0]
        assert!((project_ho(&[0.0, 1.0, 0.0], &s)[0] + 0.75).abs() < 1e-14);
        assert!(project_ho(&[0.0, 3.0, 3.0], &s)[0].abs() < 1e-14);
        assert!((project_ho(&[0.7, 0.0, 0.0], &s)[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn lo_projection_examples() {
        let s = space(1, 2);
        let avg = project_lo(&[1.0, 0.0, 0.0], &s);
        assert!((avg[0] + 0.5).abs() < 1e-15 && (avg[1] - 0.5).abs() < 1e-15);
        assert_eq!(project_lo(&[0.0, 4.0, 4.0], &s), vec![4.0, 4.0]);
        let s = space(2, 3);
        assert_eq!(project_lo(&[0.0, 0.0, 0.0, 1.0, 0.0], &s), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn penalized_rejects_negative_gamma() {
        assert!(matches!(
            project_penalized(|x| x, &space(2, 3), -1.0),
            Err(Error::NegativePenalty(_))
        ));
    }

    #[test]
    fn penalized_zero_gamma_matches_l2() {
        let s = space(3, 4);
        let f = |x: f64| (2.0 * x).sin() + x * x;
        let a = project_l2(f, &s);
        let b = project_penalized(f, &s, 0.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn avg_preserving_two_by_two() {
        // p=1, n=2 on [-1,1], averages (0, 1): mean of L_1 on halves is -1/2, 1/2
        // so c0 - c1/2 = 0 and c0 + c1/2 = 1 give c0 = 1/2, c1 = 1
        let s = space(1, 2);
        let q = project_avg_preserving(&[0.0, 0.0, 1.0], &s).unwrap();
        assert!((q[0] - 0.5).abs() < 1e-14 && (q[1] - 1.0).abs() < 1e-14, "{q:?}");
    }

    #[test]
    fn avg_preserving_p0_is_mean() {
        let s = space(0, 4);
        let q = project_avg_preserving(&[1.0, 2.0, 3.0, 6.0], &s).unwrap();
        assert!((q[0] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn avg_preserving_rejects_underdetermined() {
        let s = space(3, 3);
        assert!(matches!(
            project_avg_preserving(&[0.0; 6], &s),
            Err(Error::NonInjective { .. })
        ));
    }

    #[test]
    fn injectivity_examples() {
        assert!(!check_injectivity(1, 0, 1).unwrap().injective);
        assert!(check_injectivity(4, 4, 1).unwrap().injective);
        let rep = check_injectivity(4, 3, 2).unwrap();
        assert_eq!((rep.n, rep.dofs), (16, 15));
        assert!(rep.injective);
        assert!(check_injectivity(1, 1, 3).is_err());
    }
}
