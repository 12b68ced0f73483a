mod common;

use common::{golub_welsch, legendre_sum};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use subcell_dg::physics::{BoundaryCondition, ConservationLaw, State};
use subcell_dg::solver::{
    default_time_step, imex_step, DiscretizationOptions, FrozenPenaltySystem, ImexTableau,
    SplitOperator,
};
use subcell_dg::{build_uniform_mesh, Discretization, Error, FieldState, GammaMode, Simulation};

fn disc(law: ConservationLaw, p: usize, n: usize, ne: usize, bc: (BoundaryCondition, BoundaryCondition)) -> Discretization {
    let mesh = build_uniform_mesh(0.0, 1.0, ne, n).unwrap();
    Discretization::new(mesh, law, p, bc.0, bc.1, DiscretizationOptions::default()).unwrap()
}

fn periodic(law: ConservationLaw, p: usize, n: usize, ne: usize) -> Discretization {
    disc(law, p, n, ne, (BoundaryCondition::Periodic, BoundaryCondition::Periodic))
}

#[test]
fn free_stream_is_preserved() {
    let euler = ConservationLaw::Euler { gamma: 1.4 };
    let gas = euler.conserved_from_primitive(1.3, 0.4, 2.0, 0.0);
    let cases: Vec<(Discretization, State)> = vec![
        (periodic(ConservationLaw::Convection { beta: 1.0 }, 3, 4, 5), [0.7, 0.0, 0.0]),
        (periodic(ConservationLaw::Burgers, 4, 8, 4), [1.2, 0.0, 0.0]),
        (periodic(euler, 2, 5, 6), gas),
        (
            disc(euler, 2, 5, 6, (BoundaryCondition::Prescribed(gas), BoundaryCondition::Prescribed(gas))),
            gas,
        ),
    ];
    for (d, state) in cases {
        let u0 = d.project(|_| state, &[]);
        let r = d.residual(&u0, 0.0).unwrap();
        assert!(r.as_slice().iter().all(|v| v.abs() < 1e-12), "{}", d.law().name());
        let ne = d.mesh().n_elements();
        let dt = default_time_step(&d, &u0, 0.15).unwrap();
        for gammas in [vec![0.0; ne], vec![1e7; ne]] {
            let mut sim = Simulation::new(d.clone(), u0.clone(), GammaMode::Fixed(gammas)).unwrap();
            for _ in 0..100 {
                sim.step(dt).unwrap();
            }
            for (a, b) in sim.state().as_slice().iter().zip(u0.as_slice()) {
                assert!((a - b).abs() < 1e-12, "{}: {a} vs {b}", d.law().name());
            }
        }
    }
}

fn burgers_roe(l: f64, r: f64) -> f64 {
    let a = 0.5 * (l + r);
    0.25 * (l * l + r * r) - 0.5 * a.abs() * (r - l)
}

#[test]
fn first_order_burgers_residual_is_flux_difference() {
    let d = periodic(ConservationLaw::Burgers, 0, 1, 3);
    let vals = [0.9, -0.4, 0.3];
    let u = FieldState::from_coefficients(1, 3, 1, vals.to_vec());
    let r = d.residual(&u, 0.0).unwrap();
    for i in 0..3 {
        let (l, c, rr) = (vals[(i + 2) % 3], vals[i], vals[(i + 1) % 3]);
        let expect = burgers_roe(l, c) - burgers_roe(c, rr);
        assert!((r.as_slice()[i] - expect).abs() < 1e-15, "cell {i}");
    }
}

fn legendre_derivative(k: usize, x: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    k as f64 * (x * legendre_sum(k, x) - legendre_sum(k - 1, x)) / (x * x - 1.0)
}

#[test]
fn convection_residual_matches_quadrature_oracle() {
    let (p, n, ne, beta) = (3, 4, 5, 1.0);
    let d = periodic(ConservationLaw::Convection { beta }, p, n, ne);
    let u = d.project(|x| [x, 0.0, 0.0], &[]);
    let r = d.residual(&u, 0.0).unwrap();
    let (gx, gw) = golub_welsch(10);
    let h = 1.0 / ne as f64;
    let hs = h / n as f64;
    for l in 0..ne {
        let a = l as f64 * h;
        for i in 0..p + n {
            let mut val = 0.0;
            if i < p {
                // volume term of beta x against the derivative of L_{i+1}
                for (x, w) in gx.iter().zip(&gw) {
                    let xp = a + 0.5 * h * (x + 1.0);
                    val += w * 0.5 * h * beta * xp * legendre_derivative(i + 1, *x) * 2.0 / h;
                }
                // element-boundary faces; upwind value from the left neighbor
                let upstream = if l == 0 { 1.0 } else { a };
                val += beta * upstream * legendre_sum(i + 1, -1.0) - beta * (a + h) * legendre_sum(i + 1, 1.0);
            } else {
                let j = i - p;
                let left = a + j as f64 * hs;
                let upstream = if l == 0 && j == 0 { 1.0 } else { left };
                val += beta * upstream - beta * (left + hs);
            }
            let got = r.element(l, 0)[i];
            assert!((got - val).abs() < 1e-12, "element {l} mode {i}: {got} vs {val}");
        }
    }
}

#[test]
fn element_order_does_not_change_residual() {
    let euler = ConservationLaw::Euler { gamma: 1.4 };
    let d = periodic(euler, 3, 5, 12);
    let u = d.project(
        |x| euler.conserved_from_primitive(1.0 + 0.3 * (6.0 * x).sin(), 0.5, 1.0 + 0.2 * (4.0 * x).cos(), x),
        &[],
    );
    let mut natural = vec![0.0; u.len()];
    d.residual_into(u.as_slice(), 0.0, &mut natural, None).unwrap();
    let mut rng = StdRng::seed_from_u64(21);
    let mut order: Vec<usize> = (0..12).collect();
    for _ in 0..10 {
        order.shuffle(&mut rng);
        let mut shuffled = vec![f64::NAN; u.len()];
        d.residual_into(u.as_slice(), 0.0, &mut shuffled, Some(&order)).unwrap();
        for (a, b) in natural.iter().zip(&shuffled) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn periodic_runs_conserve_mass_with_active_penalty() {
    let d = periodic(ConservationLaw::Burgers, 4, 8, 6);
    let u0 = d.project(|x| [0.5 + (2.0 * std::f64::consts::PI * x).sin(), 0.0, 0.0], &[]);
    let m0 = d.conserved_totals(&u0)[0];
    let mut sim = Simulation::new(d.clone(), u0, GammaMode::Sensor(Default::default())).unwrap();
    sim.force_penalty(2, 1e7).unwrap();
    for _ in 0..400 {
        sim.step(1e-3).unwrap();
        let m = d.conserved_totals(sim.state())[0];
        assert!((m - m0).abs() <= 1e-11 * m0.abs(), "{m} vs {m0}");
    }
}

#[test]
fn apply_penalty_examples() {
    let d = periodic(ConservationLaw::Convection { beta: 1.0 }, 2, 3, 2);
    let mut u = d.zero_state();
    u.element_mut(1, 0)[0] = 1.0;
    assert!(d.apply_penalty(&u, &[0.0, 0.0]).as_slice().iter().all(|v| *v == 0.0));
    let out = d.apply_penalty(&u, &[5.0, 2.0]);
    let mpp = subcell_dg::basis::assemble_penalty_mass(&d.element_space(1));
    for i in 0..d.dof() {
        assert!((out.element(1, 0)[i] - 2.0 * mpp[(i, 0)]).abs() < 1e-15);
        assert_eq!(out.element(0, 0)[i], 0.0);
    }
    let mut constant = d.zero_state();
    for l in 0..2 {
        constant.element_mut(l, 0)[2..].iter_mut().for_each(|v| *v = 3.0);
    }
    assert!(d.apply_penalty(&constant, &[1e7, 1e7]).as_slice().iter().all(|v| *v == 0.0));
}

#[test]
fn remainder_step_lands_on_final_time() {
    let d = periodic(ConservationLaw::Convection { beta: 1.0 }, 1, 2, 4);
    let u0 = d.project(|x| [x.sin(), 0.0, 0.0], &[]);
    let mut sim = Simulation::new(d, u0, GammaMode::Off).unwrap();
    let dt = 0.01;
    let traj = sim.advance(dt, 3.5 * dt, &[], |_, _| true).unwrap();
    assert_eq!(traj.steps(), 4);
    assert!((traj.events[3].dt - 0.5 * dt).abs() < 1e-15);
    assert_eq!(sim.time(), 3.5 * dt);
    assert_eq!(traj.snapshots.len(), 1);
}

#[test]
fn cfl_violation_is_reported() {
    let d = periodic(ConservationLaw::Convection { beta: 1.0 }, 4, 8, 8);
    let u0 = d.project(|x| [(-(x - 0.5) * (x - 0.5) / 0.02).exp(), 0.0, 0.0], &[]);
    let mut sim = Simulation::new(d, u0, GammaMode::Off).unwrap();
    let err = sim.advance(0.5, 1e4, &[], |_, _| true).unwrap_err();
    assert!(matches!(err, Error::NonFinite { .. }), "{err}");
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn linear_stability_over_ten_thousand_steps() {
    let d = periodic(ConservationLaw::Convection { beta: 1.0 }, 4, 8, 8);
    let u0 = d.project(|x| [subcell_dg::harness::cases::periodic_gaussian(x, 0.5), 0.0, 0.0], &[]);
    let e0 = d.l2_energy(&u0, 0);
    let dt = default_time_step(&d, &u0, subcell_dg::harness::config::DEFAULT_CFL).unwrap();
    let mut sim = Simulation::new(d.clone(), u0, GammaMode::Sensor(Default::default())).unwrap();
    for _ in 0..10_000 {
        sim.step(dt).unwrap();
        let e = d.l2_energy(sim.state(), 0);
        assert!(e.sqrt() <= e0.sqrt() * (1.0 + 1e-8), "{e} > {e0}");
    }
}

/// The implicit half of the penalized system with no flux.
struct PenaltyOnly<'a>(FrozenPenaltySystem<'a>);

impl SplitOperator for PenaltyOnly<'_> {
    fn explicit(&self, _t: f64, _u: &[f64], out: &mut [f64]) -> subcell_dg::Result<()> {
        out.iter_mut().for_each(|v| *v = 0.0);
        Ok(())
    }
    fn implicit(&self, a_dt: f64, u: &[f64], out: &mut [f64]) -> subcell_dg::Result<()> {
        self.0.implicit(a_dt, u, out)
    }
}

#[test]
fn implicit_stage_contracts_polynomial_modes() {
    let d = periodic(ConservationLaw::Convection { beta: 1.0 }, 4, 6, 5);
    let tab = ImexTableau::ars222();
    let mut rng = StdRng::seed_from_u64(17);
    for _ in 0..200 {
        let coeffs: Vec<f64> = (0..5 * d.dof()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u = FieldState::from_coefficients(1, 5, d.dof(), coeffs);
        let gammas: Vec<f64> = (0..5).map(|_| 10f64.powf(rng.random_range(-3.0..8.0))).collect();
        let dt = rng.random_range(1e-4..1e-1);
        let op = PenaltyOnly(FrozenPenaltySystem::new(&d, gammas, dt, &tab));
        let next = u.with_coefficients(imex_step(&op, 0.0, u.as_slice(), dt, &tab).unwrap());
        for l in 0..5 {
            let before = d.polynomial_energy(&u, l, 0);
            let after = d.polynomial_energy(&next, l, 0);
            assert!(after <= before * (1.0 + 1e-12), "{after} > {before}");
        }
        let (t0, t1) = (d.conserved_totals(&u)[0], d.conserved_totals(&next)[0]);
        assert!((t0 - t1).abs() < 1e-13);
    }
}

#[test]
fn periodic_at_one_end_only_is_rejected() {
    let mesh = build_uniform_mesh(0.0, 1.0, 2, 2).unwrap();
    let r = Discretization::new(
        mesh,
        ConservationLaw::Burgers,
        1,
        BoundaryCondition::Periodic,
        BoundaryCondition::Prescribed([0.0; 3]),
        DiscretizationOptions::default(),
    );
    assert!(r.is_err());
}
