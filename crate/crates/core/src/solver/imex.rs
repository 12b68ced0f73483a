//! Additive Runge-Kutta (IMEX) stepping for `M U' = R(U) - Gamma M_pp U`
//! with the penalty frozen over the step.

use crate::error::Result;

/// Butcher tableaux of an IMEX scheme: implicit `a`, explicit `a_hat`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImexTableau {
    pub a: Vec<Vec<f64>>,
    pub a_hat: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub b_hat: Vec<f64>,
}

impl ImexTableau {
    /// ARS(2,2,2): `alpha = 1 - 1/sqrt(2)`, `delta = -2 sqrt(2) / 3`.
    pub fn ars222() -> Self {
        let alpha = 1.0 - 1.0 / 2f64.sqrt();
        let delta = -2.0 * 2f64.sqrt() / 3.0;
        Self {
            a: vec![
                vec![0.0, 0.0, 0.0],
                vec![0.0, alpha, 0.0],
                vec![0.0, 1.0 - alpha, alpha],
            ],
            a_hat: vec![
                vec![0.0, 0.0, 0.0],
                vec![alpha, 0.0, 0.0],
                vec![delta, 1.0 - delta, 0.0],
            ],
            b: vec![0.0, 1.0 - alpha, alpha],
            b_hat: vec![0.0, 1.0 - alpha, alpha],
        }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// Distinct diagonal entries of the implicit tableau.
    pub fn diagonal_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for i in 0..self.stages() {
            let d = self.a[i][i];
            if !out.contains(&d) {
                out.push(d);
            }
        }
        out
    }

    /// Explicit stage times `c_i = sum_j a_hat_ij`.
    pub fn explicit_nodes(&self) -> Vec<f64> {
        self.a_hat.iter().map(|row| row.iter().sum()).collect()
    }
}

/// The two halves of a split semi-discrete system acting on flat coefficient vectors.
pub trait SplitOperator {
    /// Writes `M^{-1} R(u)` into `out`.
    fn explicit(&self, t: f64, u: &[f64], out: &mut [f64]) -> Result<()>;

    /// Writes the solution `r` of `(M + a_dt Gamma M_pp) r = -Gamma M_pp u` into `out`.
    fn implicit(&self, a_dt: f64, u: &[f64], out: &mut [f64]) -> Result<()>;
}

/// One IMEX step from `u` with step size `dt`.
pub fn imex_step<S: SplitOperator + ?Sized>(
    op: &S,
    t: f64,
    u: &[f64],
    dt: f64,
    tableau: &ImexTableau,
) -> Result<Vec<f64>> {
    let s = tableau.stages();
    let len = u.len();
    let nodes = tableau.explicit_nodes();
    let mut r = vec![vec![0.0; len]; s];
    let mut r_hat = vec![vec![0.0; len]; s];
    let mut stage = vec![0.0; len];
    let mut acc = vec![0.0; len];
    for i in 0..s {
        acc.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..i {
            let (a, ah) = (tableau.a[i][j], tableau.a_hat[i][j]);
            for ((acc, rj), rhj) in acc.iter_mut().zip(&r[j]).zip(&r_hat[j]) {
                *acc += a * rj + ah * rhj;
            }
        }
        for ((st, u0), ac) in stage.iter_mut().zip(u).zip(&acc) {
            *st = u0 + dt * ac;
        }
        let a_dt = dt * tableau.a[i][i];
        op.implicit(a_dt, &stage, &mut r[i])?;
        for (st, ri) in stage.iter_mut().zip(&r[i]) {
            *st += a_dt * ri;
        }
        op.explicit(t + nodes[i] * dt, &stage, &mut r_hat[i])?;
    }
    acc.iter_mut().for_each(|v| *v = 0.0);
    for j in 0..s {
        let (b, bh) = (tableau.b[j], tableau.b_hat[j]);
        for ((acc, rj), rhj) in acc.iter_mut().zip(&r[j]).zip(&r_hat[j]) {
            *acc += b * rj + bh * rhj;
        }
    }
    Ok(u.iter().zip(&acc).map(|(u0, ac)| u0 + dt * ac).collect())
}

/// The explicit half of the scheme alone, `M U' = R(U)`.
pub fn explicit_ars_step<S: SplitOperator + ?Sized>(
    op: &S,
    t: f64,
    u: &[f64],
    dt: f64,
    tableau: &ImexTableau,
) -> Result<Vec<f64>> {
    let s = tableau.stages();
    let len = u.len();
    let nodes = tableau.explicit_nodes();
    let mut r_hat = vec![vec![0.0; len]; s];
    let mut stage = vec![0.0; len];
    let mut acc = vec![0.0; len];
    for i in 0..s {
        acc.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..i {
            let ah = tableau.a_hat[i][j];
            for (acc, rhj) in acc.iter_mut().zip(&r_hat[j]) {
                *acc += ah * rhj;
            }
        }
        for ((st, u0), ac) in stage.iter_mut().zip(u).zip(&acc) {
            *st = u0 + dt * ac;
        }
        op.explicit(t + nodes[i] * dt, &stage, &mut r_hat[i])?;
    }
    acc.iter_mut().for_each(|v| *v = 0.0);
    for j in 0..s {
        let bh = tableau.b_hat[j];
        for (acc, rhj) in acc.iter_mut().zip(&r_hat[j]) {
            *acc += bh * rhj;
        }
    }
    Ok(u.iter().zip(&acc).map(|(u0, ac)| u0 + dt * ac).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `u' = lambda u - mu u` with `lambda` explicit and `mu` implicit.
    struct Scalar {
        lambda: f64,
        mu: f64,
    }

    impl SplitOperator for Scalar {
        fn explicit(&self, _t: f64, u: &[f64], out: &mut [f64]) -> Result<()> {
            out[0] = self.lambda * u[0];
            Ok(())
        }
        fn implicit(&self, a_dt: f64, u: &[f64], out: &mut [f64]) -> Result<()> {
            out[0] = -self.mu * u[0] / (1.0 + a_dt * self.mu);
            Ok(())
        }
    }

    #[test]
    fn tableau_structure() {
        let t = ImexTableau::ars222();
        let alpha = 1.0 - 1.0 / 2f64.sqrt();
        assert_eq!(t.a[0][0], 0.0);
        for i in 0..3 {
            for j in i + 1..3 {
                assert_eq!(t.a[i][j], 0.0);
            }
            for j in i..3 {
                assert_eq!(t.a_hat[i][j], 0.0);
            }
        }
        assert_eq!(t.b, t.b_hat);
        assert!((t.b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((t.a[1][1] - alpha).abs() < 1e-16);
        assert!((t.a_hat[2][0] + 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-15);
        assert_eq!(t.diagonal_values(), vec![0.0, alpha]);
    }

    #[test]
    fn scalar_step_matches_hand_recurrence() {
        let (lambda, mu, dt, u0) = (-0.7, 3.0, 0.1, 1.3);
        let t = ImexTableau::ars222();
        let alpha = 1.0 - 1.0 / 2f64.sqrt();
        let delta = -2.0 * 2f64.sqrt() / 3.0;
        // stage 1
        let y1 = u0;
        let rh1 = lambda * y1;
        // stage 2
        let u2 = u0 + dt * alpha * rh1;
        let r2 = -mu * u2 / (1.0 + dt * alpha * mu);
        let y2 = u2 + dt * alpha * r2;
        let rh2 = lambda * y2;
        // stage 3
        let u3 = u0 + dt * ((1.0 - alpha) * r2 + delta * rh1 + (1.0 - delta) * rh2);
        let r3 = -mu * u3 / (1.0 + dt * alpha * mu);
        let y3 = u3 + dt * alpha * r3;
        let rh3 = lambda * y3;
        let expect = u0 + dt * ((1.0 - alpha) * (r2 + rh2) + alpha * (r3 + rh3));
        let got = imex_step(&Scalar { lambda, mu }, 0.0, &[u0], dt, &t).unwrap()[0];
        assert!((got - expect).abs() < 1e-15, "{got} vs {expect}");
    }

    #[test]
    fn zero_penalty_bit_matches_explicit_path() {
        let op = Scalar { lambda: -1.3, mu: 0.0 };
        let t = ImexTableau::ars222();
        let a = imex_step(&op, 0.0, &[0.77], 0.05, &t).unwrap();
        let b = explicit_ars_step(&op, 0.0, &[0.77], 0.05, &t).unwrap();
        assert_eq!(a[0].to_bits(), b[0].to_bits());
    }
}
