//! Shock sensor built from the sub-cell averages: the largest sub-cell average
//! mismatch between the field and the polynomial that best preserves those
//! averages, normalized and mapped to an element penalty.

use serde::Serialize;

use crate::basis::{ElementSpace, ReferenceElement};
use crate::error::Result;
use crate::projections::{subcell_averages, AveragePreservingFit};
use crate::solver::FieldState;

pub const DEFAULT_C_PEN: f64 = 1e7;
pub const DEFAULT_S_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorParams {
    pub c_pen: f64,
    /// Activation threshold; `None` means `0.01 / p`.
    pub tau: Option<f64>,
    pub s_eps: f64,
}

impl Default for SensorParams {
    fn default() -> Self {
        Self {
            c_pen: DEFAULT_C_PEN,
            tau: None,
            s_eps: DEFAULT_S_EPS,
        }
    }
}

impl SensorParams {
    pub fn threshold(&self, p: usize) -> f64 {
        self.tau.unwrap_or(if p == 0 { 0.0 } else { 0.01 / p as f64 })
    }
}

/// Per-element sensor values, normalizations and penalties.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SensorReport {
    pub s: Vec<f64>,
    pub s0: Vec<f64>,
    pub gamma: Vec<f64>,
}

/// `max_j |avg_j(u) - avg_j(fit(u))|` over the sub-cells.
pub fn sensor_value(c: &[f64], space: &ElementSpace) -> Result<f64> {
    let r = ReferenceElement::new(space.p, space.n);
    let fit = AveragePreservingFit::new(&r)?;
    Ok(fit.max_residual(&subcell_averages(&r, c)))
}

/// `max_j |avg_j(u)| + s_eps`.
pub fn sensor_scale(c: &[f64], space: &ElementSpace, s_eps: f64) -> f64 {
    let r = ReferenceElement::new(space.p, space.n);
    max_abs(&subcell_averages(&r, c)) + s_eps
}

/// `C_pen * max(0, s/s0 - tau)`.
pub fn penalty(s: f64, s0: f64, c_pen: f64, tau: f64) -> f64 {
    c_pen * (s / s0 - tau).max(0.0)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Field-wide sensor for one `(p, n)` configuration.
#[derive(Debug, Clone)]
pub struct FieldSensor {
    reference: ReferenceElement,
    fit: Option<AveragePreservingFit>,
    params: SensorParams,
}

impl FieldSensor {
    /// Fails with [`crate::Error::NonInjective`] when `p >= 1` and the
    /// sub-cell averages cannot determine a degree-`p` polynomial.
    pub fn new(reference: ReferenceElement, params: SensorParams) -> Result<Self> {
        let fit = if reference.p == 0 {
            None
        } else {
            Some(AveragePreservingFit::new(&reference)?)
        };
        Ok(Self {
            reference,
            fit,
            params,
        })
    }

    pub fn params(&self) -> &SensorParams {
        &self.params
    }

    /// `(s, s0)` for one element and component.
    pub fn element_values(&self, c: &[f64]) -> (f64, f64) {
        let avg = subcell_averages(&self.reference, c);
        let s0 = max_abs(&avg) + self.params.s_eps;
        let s = self.fit.as_ref().map_or(0.0, |f| f.max_residual(&avg));
        (s, s0)
    }

    /// Sensor report for every element. The element penalty follows from the
    /// largest ratio `s/s0` over the solution components.
    pub fn evaluate(&self, state: &FieldState) -> SensorReport {
        let ne = state.n_elements();
        let mut report = SensorReport {
            s: vec![0.0; ne],
            s0: vec![0.0; ne],
            gamma: vec![0.0; ne],
        };
        let tau = self.params.threshold(self.reference.p);
        for l in 0..ne {
            let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
            for comp in 0..state.m() {
                let (s, s0) = self.element_values(state.element(l, comp));
                let ratio = s / s0;
                if ratio > best.0 {
                    best = (ratio, s, s0);
                }
            }
            report.s[l] = best.1;
            report.s0[l] = best.2;
            if self.fit.is_some() {
                report.gamma[l] = penalty(best.1, best.2, self.params.c_pen, tau);
            }
        }
        report
    }
}

/// Sensor report of `state` for elements of degree `p` with `n` sub-cells.
pub fn evaluate_field_sensor(
    state: &FieldState,
    p: usize,
    n: usize,
    params: SensorParams,
) -> Result<SensorReport> {
    Ok(FieldSensor::new(ReferenceElement::new(p, n), params)?.evaluate(state))
}
