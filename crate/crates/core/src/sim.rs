//! Fixed-step RK4 simulation of state-space models, paired trajectories,
//! and the variational (linearized-along-trajectory) dynamics.
//!
//! Inputs are realized with a zero-order hold: the value sampled at `t_k`
//! drives the model on the whole cell `[t_k, t_{k+1})`. A trajectory
//! therefore stores its input as a `Zoh` signal (the staircase is exactly
//! the input the model saw) while states are continuous and stored as
//! `Pwl`. Output reconstruction follows the model's feedthrough flag.
//!
//! Simulation is a pure function of `(model, input, x0)`; runs may execute
//! concurrently without coordination.

use crate::error::{Error, Result};
use crate::models::StateSpaceModel;
use crate::signals::{Signal, SignalKind};

/// Largest admissible integration step.
pub const MAX_STEP: f64 = 0.1;

/// One simulated run: the realized input, the state trace and the outputs,
/// all on a shared grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub input: Signal,
    pub states: Signal,
    pub outputs: Signal,
    pub x0: Vec<f64>,
    pub model_name: String,
}

impl Trajectory {
    pub fn step(&self) -> f64 {
        self.input.step()
    }

    pub fn len(&self) -> usize {
        self.input.len()
    }

    pub fn is_empty(&self) -> bool {
        self.input.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        self.input.end_time()
    }

    /// Writes `t, u*, x*, y*` rows as CSV.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t")?;
        for c in 0..self.input.channels() {
            write!(w, ",u{c}")?;
        }
        for c in 0..self.states.channels() {
            write!(w, ",x{c}")?;
        }
        for c in 0..self.outputs.channels() {
            write!(w, ",y{c}")?;
        }
        writeln!(w)?;
        for k in 0..self.len() {
            write!(w, "{}", self.input.time(k))?;
            for c in 0..self.input.channels() {
                write!(w, ",{}", self.input.value(k, c))?;
            }
            for c in 0..self.states.channels() {
                write!(w, ",{}", self.states.value(k, c))?;
            }
            for c in 0..self.outputs.channels() {
                write!(w, ",{}", self.outputs.value(k, c))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Two trajectories of the same model on the same grid; the carrier of
/// increment signals.
#[derive(Debug, Clone)]
pub struct TrajectoryPair {
    pub first: Trajectory,
    pub second: Trajectory,
}

impl TrajectoryPair {
    pub fn new(first: Trajectory, second: Trajectory) -> Result<Self> {
        if first.model_name != second.model_name {
            return Err(Error::Misaligned(format!(
                "trajectory pair mixes models `{}` and `{}`",
                first.model_name, second.model_name
            )));
        }
        first.input.check_aligned(&second.input)?;
        first.states.check_aligned(&second.states)?;
        first.outputs.check_aligned(&second.outputs)?;
        Ok(Self { first, second })
    }

    pub fn delta_input(&self) -> Signal {
        self.first
            .input
            .sub(&self.second.input)
            .expect("pair is aligned")
    }

    pub fn delta_states(&self) -> Signal {
        self.first
            .states
            .sub(&self.second.states)
            .expect("pair is aligned")
    }

    pub fn delta_outputs(&self) -> Signal {
        self.first
            .outputs
            .sub(&self.second.outputs)
            .expect("pair is aligned")
    }

    /// Running monotonicity integrand `<P_t du, P_t dy>` at every node.
    pub fn objective_prefix(&self) -> Vec<f64> {
        Signal::diff_inner_prefix(
            &self.first.input,
            &self.second.input,
            &self.first.outputs,
            &self.second.outputs,
        )
    }

    /// Running `(|P_t du|^2, |P_t dy|^2)` at every node.
    pub fn energy_prefixes(&self) -> (Vec<f64>, Vec<f64>) {
        let uu = Signal::diff_inner_prefix(
            &self.first.input,
            &self.second.input,
            &self.first.input,
            &self.second.input,
        );
        let yy = Signal::diff_inner_prefix(
            &self.first.outputs,
            &self.second.outputs,
            &self.first.outputs,
            &self.second.outputs,
        );
        (uu, yy)
    }

    pub fn step(&self) -> f64 {
        self.first.step()
    }
}

fn check_sim_inputs(m: &StateSpaceModel, u: &Signal, x0: &[f64]) -> Result<()> {
    if u.channels() != m.n_u() {
        return Err(Error::Dimension(format!(
            "input has {} channels, model `{}` expects {}",
            u.channels(),
            m.name(),
            m.n_u()
        )));
    }
    if x0.len() != m.n_x() {
        return Err(Error::Dimension(format!(
            "x0 has {} entries, model `{}` has {} states",
            x0.len(),
            m.name(),
            m.n_x()
        )));
    }
    if u.step() > MAX_STEP {
        return Err(Error::InvalidParam(format!(
            "step {} exceeds the maximum {MAX_STEP}",
            u.step()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParam("x0 must be finite".into()));
    }
    Ok(())
}

/// Integrates the model over the input grid with classical RK4 and a
/// zero-order-hold input. Fails when the state or input leaves the model's
/// domain box (reporting the first offending time) or turns non-finite.
pub fn simulate(m: &StateSpaceModel, u: &Signal, x0: &[f64]) -> Result<Trajectory> {
    check_sim_inputs(m, u, x0)?;
    let n = u.len();
    let n_x = m.n_x();
    let h = u.step();

    let mut states = Vec::with_capacity(n * n_x);
    let mut x = x0.to_vec();
    m.check_state(&x, 0.0)?;
    states.extend_from_slice(&x);

    let mut k1 = vec![0.0; n_x];
    let mut k2 = vec![0.0; n_x];
    let mut k3 = vec![0.0; n_x];
    let mut k4 = vec![0.0; n_x];
    let mut xs = vec![0.0; n_x];

    for k in 0..n - 1 {
        let t = u.time(k);
        let uk = u.row(k);
        m.check_input(uk, t)?;

        m.dynamics(&x, uk, &mut k1);
        for i in 0..n_x {
            xs[i] = x[i] + 0.5 * h * k1[i];
        }
        m.dynamics(&xs, uk, &mut k2);
        for i in 0..n_x {
            xs[i] = x[i] + 0.5 * h * k2[i];
        }
        m.dynamics(&xs, uk, &mut k3);
        for i in 0..n_x {
            xs[i] = x[i] + h * k3[i];
        }
        m.dynamics(&xs, uk, &mut k4);
        for i in 0..n_x {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }

        let t_next = u.time(k + 1);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                time: t_next,
                model: m.name().to_string(),
            });
        }
        m.check_state(&x, t_next)?;
        states.extend_from_slice(&x);
    }
    // The input value on the final node never drives the dynamics but the
    // output map still sees it, so it must be admissible too.
    m.check_input(u.row(n - 1), u.time(n - 1))?;

    let mut outputs = Vec::with_capacity(n * m.n_y());
    let mut y = vec![0.0; m.n_y()];
    for k in 0..n {
        let xk = &states[k * n_x..(k + 1) * n_x];
        m.output(xk, u.row(k), &mut y);
        outputs.extend_from_slice(&y);
    }

    let input = Signal::from_raw_parts(h, m.n_u(), n, u.values().to_vec(), SignalKind::Zoh, None);
    let states = if n_x == 0 {
        Signal::empty_rows(h, n)
    } else {
        Signal::from_raw_parts(h, n_x, n, states, SignalKind::Pwl, None)
    };
    let outputs = Signal::from_raw_parts(h, m.n_y(), n, outputs, m.output_kind(), None);
    Ok(Trajectory {
        input,
        states,
        outputs,
        x0: x0.to_vec(),
        model_name: m.name().to_string(),
    })
}

/// Simulates the same model on two inputs from a common initial state, so
/// the state increment starts at zero.
pub fn simulate_pair(
    m: &StateSpaceModel,
    u1: &Signal,
    u2: &Signal,
    x0: &[f64],
) -> Result<TrajectoryPair> {
    u1.check_aligned(u2)?;
    let first = simulate(m, u1, x0)?;
    let second = simulate(m, u2, x0)?;
    TrajectoryPair::new(first, second)
}

/// Integrates the variational system
/// `d(dx)/dt = A(t) dx + B(t) du`, `dy = C(t) dx + D(t) du`
/// along a base trajectory. Jacobians are evaluated at the grid nodes of the
/// base and linearly interpolated at RK4 half-steps; `du` is zero-order held
/// like any other input.
pub fn simulate_variational(
    m: &StateSpaceModel,
    base: &Trajectory,
    delta_u: &Signal,
    delta_x0: &[f64],
) -> Result<Trajectory> {
    check_sim_inputs(m, delta_u, delta_x0)?;
    base.input.check_aligned(delta_u)?;
    let n = delta_u.len();
    let n_x = m.n_x();
    let n_y = m.n_y();
    let h = delta_u.step();

    let jacs: Vec<_> = (0..n)
        .map(|k| m.linearize_at(base.states.row(k), base.input.row(k)))
        .collect::<Result<_>>()?;

    let mut states = Vec::with_capacity(n * n_x);
    let mut dx = delta_x0.to_vec();
    states.extend_from_slice(&dx);

    let apply = |a: &nalgebra::DMatrix<f64>,
                 b: &nalgebra::DMatrix<f64>,
                 x: &[f64],
                 u: &[f64],
                 out: &mut [f64]| {
        for i in 0..x.len() {
            let mut acc = 0.0;
            for (j, xj) in x.iter().enumerate() {
                acc += a[(i, j)] * xj;
            }
            for (j, uj) in u.iter().enumerate() {
                acc += b[(i, j)] * uj;
            }
            out[i] = acc;
        }
    };

    let mut k1 = vec![0.0; n_x];
    let mut k2 = vec![0.0; n_x];
    let mut k3 = vec![0.0; n_x];
    let mut k4 = vec![0.0; n_x];
    let mut xs = vec![0.0; n_x];

    for k in 0..n - 1 {
        let uk = delta_u.row(k);
        let (j0, j1) = (&jacs[k], &jacs[k + 1]);
        let a_half = (&j0.a + &j1.a) * 0.5;
        let b_half = (&j0.b + &j1.b) * 0.5;

        apply(&j0.a, &j0.b, &dx, uk, &mut k1);
        for i in 0..n_x {
            xs[i] = dx[i] + 0.5 * h * k1[i];
        }
        apply(&a_half, &b_half, &xs, uk, &mut k2);
        for i in 0..n_x {
            xs[i] = dx[i] + 0.5 * h * k2[i];
        }
        apply(&a_half, &b_half, &xs, uk, &mut k3);
        for i in 0..n_x {
            xs[i] = dx[i] + h * k3[i];
        }
        apply(&j1.a, &j1.b, &xs, uk, &mut k4);
        for i in 0..n_x {
            dx[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if dx.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                time: delta_u.time(k + 1),
                model: m.name().to_string(),
            });
        }
        states.extend_from_slice(&dx);
    }

    let mut outputs = Vec::with_capacity(n * n_y);
    for k in 0..n {
        let xk = &states[k * n_x..(k + 1) * n_x];
        let uk = delta_u.row(k);
        let j = &jacs[k];
        for i in 0..n_y {
            let mut acc = 0.0;
            for (jj, xj) in xk.iter().enumerate() {
                acc += j.c[(i, jj)] * xj;
            }
            for (jj, uj) in uk.iter().enumerate() {
                acc += j.d[(i, jj)] * uj;
            }
            outputs.push(acc);
        }
    }

    let input = Signal::from_raw_parts(
        h,
        m.n_u(),
        n,
        delta_u.values().to_vec(),
        SignalKind::Zoh,
        None,
    );
    let states = if n_x == 0 {
        Signal::empty_rows(h, n)
    } else {
        Signal::from_raw_parts(h, n_x, n, states, SignalKind::Pwl, None)
    };
    let outputs = Signal::from_raw_parts(h, n_y, n, outputs, m.output_kind(), None);
    Ok(Trajectory {
        input,
        states,
        outputs,
        x0: delta_x0.to_vec(),
        model_name: format!("variational[{}]", m.name()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::zoo;
    use crate::models::StaticMap;

    fn const_input(step: f64, horizon: f64, level: f64) -> Signal {
        let n = (horizon / step).round() as usize + 1;
        Signal::constant(step, n, &[level], SignalKind::Zoh).unwrap()
    }

    #[test]
    fn capacitor_integrates_a_constant_exactly() {
        let m = zoo::linear_capacitor(1.0).unwrap();
        let u = const_input(1e-3, 1.0, 1.0);
        let t = simulate(&m, &u, &[0.0]).unwrap();
        let last = t.len() - 1;
        assert!((t.states.value(last, 0) - 1.0).abs() < 1e-9);
        assert!((t.outputs.value(last, 0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equilibrium_is_invariant() {
        // dn/dt = 0 at n = alpha/(alpha+beta) for constant V.
        let m = zoo::hh_potassium(36.0, -77.0, zoo::HhKinetics::Standard).unwrap();
        let v = -65.0;
        let n_inf = zoo::hh_alpha(v) / (zoo::hh_alpha(v) + zoo::hh_beta(v));
        let u = const_input(1e-3, 2.0, v);
        let t = simulate(&m, &u, &[n_inf]).unwrap();
        for k in 0..t.len() {
            assert!((t.states.value(k, 0) - n_inf).abs() < 1e-12);
        }
    }

    #[test]
    fn lag_step_response_matches_closed_form() {
        let m = zoo::first_order_lag(1.0).unwrap();
        let u = const_input(1e-3, 1.0, 1.0);
        let t = simulate(&m, &u, &[0.0]).unwrap();
        let want = 1.0 - (-1.0f64).exp();
        assert!((t.states.value(t.len() - 1, 0) - want).abs() < 1e-8);
    }

    #[test]
    fn rk4_is_fourth_order_on_smooth_dynamics() {
        // Constant input keeps the zero-order hold exact, so the remaining
        // error is the integrator's. Halving the step should cut it by ~16.
        for m in [
            zoo::first_order_lag(1.0).unwrap(),
            zoo::hh_potassium(36.0, -77.0, zoo::HhKinetics::Standard).unwrap(),
        ] {
            let x0 = [0.3];
            let level = if m.name().starts_with("hh") {
                -40.0
            } else {
                1.0
            };
            let reference = {
                let u = const_input(1e-5, 1.0, level);
                let t = simulate(&m, &u, &x0).unwrap();
                t.states.value(t.len() - 1, 0)
            };
            let terminal = |step: f64| {
                let u = const_input(step, 1.0, level);
                let t = simulate(&m, &u, &x0).unwrap();
                t.states.value(t.len() - 1, 0)
            };
            let err_coarse = (terminal(0.02) - reference).abs();
            let err_fine = (terminal(0.01) - reference).abs();
            assert!(
                err_coarse >= 12.0 * err_fine,
                "{}: ratio {} (errors {err_coarse:.3e}, {err_fine:.3e})",
                m.name(),
                err_coarse / err_fine
            );
        }
    }

    #[test]
    fn domain_exit_reports_first_offending_time() {
        let m = zoo::hh_potassium(36.0, -77.0, zoo::HhKinetics::Standard).unwrap();
        let u = const_input(1e-3, 1.0, -80.0); // below V_K
        match simulate(&m, &u, &[0.3]) {
            Err(Error::DomainExit { time, .. }) => assert_eq!(time, 0.0),
            other => panic!("expected domain exit, got {other:?}"),
        }
    }

    #[test]
    fn state_domain_exit_mid_run() {
        let m = zoo::nonlinear_capacitor(StaticMap::cubic()).unwrap();
        let u = const_input(1e-2, 5.0, 1.0); // charge ramps past x = 3 at t = 3
        match simulate(&m, &u, &[0.0]) {
            Err(Error::DomainExit { time, what }) => {
                assert!((time - 3.0).abs() < 0.05, "time {time}");
                assert!(what.contains("state[0]"));
            }
            other => panic!("expected domain exit, got {other:?}"),
        }
    }

    #[test]
    fn identical_inputs_give_zero_increment() {
        let m = zoo::nonlinear_capacitor(StaticMap::cubic()).unwrap();
        let u = const_input(1e-3, 1.0, 0.7);
        let pair = simulate_pair(&m, &u, &u, &[0.0]).unwrap();
        assert!(pair.delta_outputs().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_model_increment_depends_only_on_input_difference() {
        let m = zoo::first_order_lag(0.7).unwrap();
        let step = 1e-3;
        let n = 1001;
        let u1 = Signal::from_fn(step, n, 1, SignalKind::Zoh, |t, _| (2.0 * t).sin()).unwrap();
        let u2 = Signal::from_fn(step, n, 1, SignalKind::Zoh, |t, _| 0.3 * t.cos()).unwrap();
        let shift = Signal::from_fn(step, n, 1, SignalKind::Zoh, |t, _| 0.5 - t).unwrap();
        let d1 = simulate_pair(&m, &u1, &u2, &[0.0]).unwrap().delta_outputs();
        let d2 = simulate_pair(
            &m,
            &u1.add(&shift).unwrap(),
            &u2.add(&shift).unwrap(),
            &[0.0],
        )
        .unwrap()
        .delta_outputs();
        for (a, b) in d1.values().iter().zip(d2.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_pair_increment_at_unit_time() {
        let m = zoo::nonlinear_capacitor(StaticMap::cubic()).unwrap();
        let u1 = const_input(1e-3, 1.0, 1.0);
        let u2 = const_input(1e-3, 1.0, 0.0);
        let pair = simulate_pair(&m, &u1, &u2, &[0.0]).unwrap();
        let d = pair.delta_outputs();
        assert!((d.value(d.len() - 1, 0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn variational_system_of_linear_model_is_the_model() {
        let m = zoo::first_order_lag(1.3).unwrap();
        let step = 1e-3;
        let n = 1001;
        let base_u = Signal::from_fn(step, n, 1, SignalKind::Zoh, |t, _| t.sin()).unwrap();
        let base = simulate(&m, &base_u, &[0.4]).unwrap();
        let du = Signal::from_fn(step, n, 1, SignalKind::Zoh, |t, _| (3.0 * t).cos()).unwrap();
        let dx0 = [0.2];
        let variational = simulate_variational(&m, &base, &du, &dx0).unwrap();
        let direct = simulate(&m, &du, &dx0).unwrap();
        for k in 0..n {
            let a = variational.outputs.value(k, 0);
            let b = direct.outputs.value(k, 0);
            assert!((a - b).abs() < 1e-10, "sample {k}: {a} vs {b}");
        }
    }

    #[test]
    fn variational_zero_perturbation_is_zero() {
        let m = zoo::nonlinear_capacitor(StaticMap::cubic()).unwrap();
        let u = const_input(1e-3, 1.0, 0.5);
        let base = simulate(&m, &u, &[0.0]).unwrap();
        let du = Signal::zeros(1e-3, u.len(), 1, SignalKind::Zoh).unwrap();
        let v = simulate_variational(&m, &base, &du, &[0.0]).unwrap();
        assert!(v.outputs.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn variational_matches_finite_difference_to_first_order() {
        let m = zoo::nonlinear_capacitor(StaticMap::cubic()).unwrap();
        let step = 1e-3;
        let n = 1001;
        let base_u =
            Signal::from_fn(step, n, 1, SignalKind::Zoh, |t, _| 0.8 * (2.0 * t).sin()).unwrap();
        let base = simulate(&m, &base_u, &[0.2]).unwrap();
        let du = Signal::from_fn(step, n, 1, SignalKind::Zoh, |t, _| (5.0 * t).cos()).unwrap();
        let dy = simulate_variational(&m, &base, &du, &[0.0]).unwrap();

        let fd_error = |eps: f64| -> f64 {
            let perturbed = base_u.add(&du.scale(eps)).unwrap();
            let t2 = simulate(&m, &perturbed, &[0.2]).unwrap();
            let mut worst = 0.0f64;
            for k in 0..n {
                let fd = (t2.outputs.value(k, 0) - base.outputs.value(k, 0)) / eps;
                worst = worst.max((fd - dy.outputs.value(k, 0)).abs());
            }
            worst
        };
        let e3 = fd_error(1e-3);
        let e4 = fd_error(1e-4);
        assert!(e3 < 1e-2, "first-order error too large: {e3}");
        assert!(e3 / e4 > 5.0, "not first order: e(1e-3)={e3}, e(1e-4)={e4}");
    }

    #[test]
    fn causality_inputs_agreeing_early_agree_early() {
        let m = zoo::saturated_integrator(1.0).unwrap();
        let step = 1e-3;
        let n = 2001;
        let u1 = Signal::from_fn(step, n, 1, SignalKind::Zoh, |t, _| {
            if t < 1.0 {
                t.sin()
            } else {
                1.0
            }
        })
        .unwrap();
        let u2 = Signal::from_fn(step, n, 1, SignalKind::Zoh, |t, _| {
            if t < 1.0 {
                t.sin()
            } else {
                -1.0
            }
        })
        .unwrap();
        let t1 = simulate(&m, &u1, &[0.0]).unwrap();
        let t2 = simulate(&m, &u2, &[0.0]).unwrap();
        for k in 0..1000 {
            assert!((t1.outputs.value(k, 0) - t2.outputs.value(k, 0)).abs() <= 1e-12);
        }
    }

    #[test]
    fn stateless_model_simulates() {
        let m = zoo::static_resistor(StaticMap::linear(2.0)).unwrap();
        let u = const_input(1e-2, 1.0, 3.0);
        let t = simulate(&m, &u, &[]).unwrap();
        assert_eq!(t.states.channels(), 0);
        assert!((t.outputs.value(50, 0) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn trajectory_csv_layout() {
        let m = zoo::first_order_lag(1.0).unwrap();
        let u = const_input(0.05, 0.2, 1.0);
        let t = simulate(&m, &u, &[0.0]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,u0,x0,y0");
        assert_eq!(lines.count(), t.len());
    }

    #[test]
    fn oversized_step_is_rejected() {
        let m = zoo::first_order_lag(1.0).unwrap();
        let u = const_input(0.5, 2.0, 1.0);
        assert!(matches!(
            simulate(&m, &u, &[0.0]),
            Err(Error::InvalidParam(_))
        ));
    }

    #[test]
    fn hh_gate_state_is_forward_invariant() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;

        let m = zoo::hh_potassium(36.0, -77.0, zoo::HhKinetics::Standard).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            // Random piecewise voltage inside [V_K, V_K + 120].
            let levels: Vec<f64> = (0..8).map(|_| rng.gen_range(-77.0..43.0)).collect();
            let u = Signal::from_fn(1e-3, 5001, 1, SignalKind::Zoh, |t, _| {
                levels[((t / 0.625) as usize).min(7)]
            })
            .unwrap();
            let n0 = rng.gen_range(0.0..1.0);
            let t = simulate(&m, &u, &[n0]).unwrap();
            for k in 0..t.len() {
                let n = t.states.value(k, 0);
                assert!((-1e-9..=1.0 + 1e-9).contains(&n), "n = {n} left [0, 1]");
            }
        }
    }
}
