//! State-space models `dx/dt = f(x, u), y = h(x, u)` and static nonlinear
//! maps, plus the preset zoo of circuit and biophysical one-ports.

pub mod zoo;

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::signals::SignalKind;

pub use zoo::{zoo, HhKinetics};

type VecField = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;
type JacField = Arc<dyn Fn(&[f64], &[f64]) -> Jacobians + Send + Sync>;

/// Jacobians of `(f, h)` at a point: `a = df/dx`, `b = df/du`, `c = dh/dx`,
/// `d = dh/du`.
#[derive(Debug, Clone)]
pub struct Jacobians {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

/// A scalar static nonlinearity with optional analytic derivatives and a
/// declared monotonicity flag. All zoo elements are one-ports, so scalar
/// maps cover every preset.
#[derive(Clone)]
pub struct StaticMap {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    df: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    d2f: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    monotone: bool,
}

impl std::fmt::Debug for StaticMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "StaticMap({}, monotone={})", self.name, self.monotone)
    }
}

impl StaticMap {
    pub fn new(
        name: impl Into<String>,
        monotone: bool,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            df: None,
            d2f: None,
            monotone,
        }
    }

    pub fn with_derivative(mut self, df: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.df = Some(Arc::new(df));
        self
    }

    pub fn with_second_derivative(
        mut self,
        d2f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.d2f = Some(Arc::new(d2f));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn eval(&self, v: f64) -> f64 {
        (self.f)(v)
    }

    /// Analytic derivative when available, else a central difference.
    pub fn deriv(&self, v: f64) -> f64 {
        match &self.df {
            Some(df) => df(v),
            None => {
                let d = 1e-6 * (1.0 + v.abs());
                ((self.f)(v + d) - (self.f)(v - d)) / (2.0 * d)
            }
        }
    }

    pub fn second_deriv(&self, v: f64) -> f64 {
        match &self.d2f {
            Some(d2f) => d2f(v),
            None => {
                let d = 1e-5 * (1.0 + v.abs());
                (self.deriv(v + d) - self.deriv(v - d)) / (2.0 * d)
            }
        }
    }

    /// `phi(v) = slope * v`.
    pub fn linear(slope: f64) -> Self {
        Self::new(format!("linear({slope})"), slope >= 0.0, move |v| slope * v)
            .with_derivative(move |_| slope)
            .with_second_derivative(|_| 0.0)
    }

    /// `phi(q) = q^3`.
    pub fn cubic() -> Self {
        Self::new("cubic", true, |q| q * q * q)
            .with_derivative(|q| 3.0 * q * q)
            .with_second_derivative(|q| 6.0 * q)
    }

    /// `phi(q) = q + q^3`.
    pub fn stiffening() -> Self {
        Self::new("stiffening", true, |q| q + q * q * q)
            .with_derivative(|q| 1.0 + 3.0 * q * q)
            .with_second_derivative(|q| 6.0 * q)
    }

    /// `phi(v) = tanh(gain * v)`.
    pub fn tanh(gain: f64) -> Self {
        Self::new(format!("tanh({gain})"), gain >= 0.0, move |v| {
            (gain * v).tanh()
        })
        .with_derivative(move |v| {
            let t = (gain * v).tanh();
            gain * (1.0 - t * t)
        })
        .with_second_derivative(move |v| {
            let t = (gain * v).tanh();
            -2.0 * gain * gain * t * (1.0 - t * t)
        })
    }

    /// Default memristor flux law `mu(q) = q + q^3/3`, giving memristance
    /// `mu'(q) = 1 + q^2 > 0`.
    pub fn memristance_default() -> Self {
        Self::new("q+q^3/3", true, |q| q + q * q * q / 3.0)
            .with_derivative(|q| 1.0 + q * q)
            .with_second_derivative(|q| 2.0 * q)
    }
}

/// Immutable state-space model. Dynamics, output map and Jacobians are pure
/// functions, so a model can be evaluated concurrently without coordination.
#[derive(Clone)]
pub struct StateSpaceModel {
    name: String,
    n_x: usize,
    n_u: usize,
    n_y: usize,
    f: VecField,
    h: VecField,
    jac: Option<JacField>,
    /// Per-coordinate `(lo, hi)` boxes; infinite bounds mean unconstrained.
    state_domain: Vec<(f64, f64)>,
    input_domain: Vec<(f64, f64)>,
    state_bounded: bool,
    input_bounded: bool,
    x0_default: Vec<f64>,
    /// Whether `h` depends directly on `u`. Feedthrough outputs jump with a
    /// held input and are reconstructed as staircases; the rest are
    /// continuous and reconstructed piecewise linearly.
    feedthrough: bool,
}

impl std::fmt::Debug for StateSpaceModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "StateSpaceModel({}, n_x={}, n_u={}, n_y={})",
            self.name, self.n_x, self.n_u, self.n_y
        )
    }
}

impl StateSpaceModel {
    pub fn builder(name: impl Into<String>, n_x: usize, n_u: usize, n_y: usize) -> ModelBuilder {
        ModelBuilder {
            name: name.into(),
            n_x,
            n_u,
            n_y,
            f: None,
            h: None,
            jac: None,
            state_domain: vec![(f64::NEG_INFINITY, f64::INFINITY); n_x],
            input_domain: vec![(f64::NEG_INFINITY, f64::INFINITY); n_u],
            x0_default: vec![0.0; n_x],
            feedthrough: true,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_u(&self) -> usize {
        self.n_u
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn x0_default(&self) -> &[f64] {
        &self.x0_default
    }

    pub fn state_domain(&self) -> &[(f64, f64)] {
        &self.state_domain
    }

    pub fn input_domain(&self) -> &[(f64, f64)] {
        &self.input_domain
    }

    pub fn has_feedthrough(&self) -> bool {
        self.feedthrough
    }

    /// Reconstruction kind of simulated outputs.
    pub fn output_kind(&self) -> SignalKind {
        if self.feedthrough {
            SignalKind::Zoh
        } else {
            SignalKind::Pwl
        }
    }

    /// Evaluates `dx/dt = f(x, u)` into `dxdt`. Slices must match the
    /// model's dimensions.
    #[inline]
    pub fn dynamics(&self, x: &[f64], u: &[f64], dxdt: &mut [f64]) {
        (self.f)(x, u, dxdt);
    }

    /// Evaluates `y = h(x, u)` into `y`.
    #[inline]
    pub fn output(&self, x: &[f64], u: &[f64], y: &mut [f64]) {
        (self.h)(x, u, y);
    }

    fn check_box(domain: &[(f64, f64)], v: &[f64], time: f64, what: &str) -> Result<()> {
        for (i, (&vi, &(lo, hi))) in v.iter().zip(domain).enumerate() {
            if !vi.is_finite() {
                return Err(Error::DomainExit {
                    time,
                    what: format!("{what}[{i}] is not finite"),
                });
            }
            let slack = 1e-9 * (1.0 + lo.abs().min(hi.abs()).min(f64::MAX));
            let slack = if slack.is_finite() { slack } else { 1e-9 };
            if vi < lo - slack || vi > hi + slack {
                return Err(Error::DomainExit {
                    time,
                    what: format!("{what}[{i}] = {vi} outside [{lo}, {hi}]"),
                });
            }
        }
        Ok(())
    }

    pub fn check_state(&self, x: &[f64], time: f64) -> Result<()> {
        if !self.state_bounded {
            return Ok(());
        }
        Self::check_box(&self.state_domain, x, time, "state")
    }

    pub fn check_input(&self, u: &[f64], time: f64) -> Result<()> {
        if !self.input_bounded {
            return Ok(());
        }
        Self::check_box(&self.input_domain, u, time, "input")
    }

    /// Jacobians `(A, B, C, D)` of the model at `(x, u)`: analytic when the
    /// model declares them, otherwise central finite differences with step
    /// `1e-6 * (1 + |coordinate|)`.
    pub fn linearize_at(&self, x: &[f64], u: &[f64]) -> Result<Jacobians> {
        if x.len() != self.n_x || u.len() != self.n_u {
            return Err(Error::Dimension(format!(
                "linearize_at: got ({}, {}) for model with (n_x, n_u) = ({}, {})",
                x.len(),
                u.len(),
                self.n_x,
                self.n_u
            )));
        }
        self.check_state(x, f64::NAN)
            .and_then(|_| self.check_input(u, f64::NAN))
            .map_err(|e| match e {
                Error::DomainExit { what, .. } => {
                    Error::InvalidParam(format!("linearization point outside domain: {what}"))
                }
                other => other,
            })?;
        if let Some(jac) = &self.jac {
            return Ok(jac(x, u));
        }
        Ok(self.finite_difference_jacobians(x, u))
    }

    fn finite_difference_jacobians(&self, x: &[f64], u: &[f64]) -> Jacobians {
        let (n, m, p) = (self.n_x, self.n_u, self.n_y);
        let mut a = DMatrix::zeros(n, n);
        let mut b = DMatrix::zeros(n, m);
        let mut c = DMatrix::zeros(p, n);
        let mut d = DMatrix::zeros(p, m);
        let mut lo_f = vec![0.0; n];
        let mut hi_f = vec![0.0; n];
        let mut lo_h = vec![0.0; p];
        let mut hi_h = vec![0.0; p];

        let mut xs = x.to_vec();
        for j in 0..n {
            let delta = 1e-6 * (1.0 + x[j].abs());
            xs[j] = x[j] + delta;
            (self.f)(&xs, u, &mut hi_f);
            (self.h)(&xs, u, &mut hi_h);
            xs[j] = x[j] - delta;
            (self.f)(&xs, u, &mut lo_f);
            (self.h)(&xs, u, &mut lo_h);
            xs[j] = x[j];
            for i in 0..n {
                a[(i, j)] = (hi_f[i] - lo_f[i]) / (2.0 * delta);
            }
            for i in 0..p {
                c[(i, j)] = (hi_h[i] - lo_h[i]) / (2.0 * delta);
            }
        }
        let mut us = u.to_vec();
        for j in 0..m {
            let delta = 1e-6 * (1.0 + u[j].abs());
            us[j] = u[j] + delta;
            (self.f)(x, &us, &mut hi_f);
            (self.h)(x, &us, &mut hi_h);
            us[j] = u[j] - delta;
            (self.f)(x, &us, &mut lo_f);
            (self.h)(x, &us, &mut lo_h);
            us[j] = u[j];
            for i in 0..n {
                b[(i, j)] = (hi_f[i] - lo_f[i]) / (2.0 * delta);
            }
            for i in 0..p {
                d[(i, j)] = (hi_h[i] - lo_h[i]) / (2.0 * delta);
            }
        }
        Jacobians { a, b, c, d }
    }

    /// Draws a point of the state and input boxes, mapping unbounded
    /// coordinates to `[-amp, amp]`. Used by sampling-based tests.
    pub fn sample_domain_point(
        &self,
        unit_state: &[f64],
        unit_input: &[f64],
        amp: f64,
    ) -> (Vec<f64>, Vec<f64>) {
        let map = |unit: f64, (lo, hi): (f64, f64)| -> f64 {
            if lo.is_finite() && hi.is_finite() {
                lo + (unit + 1.0) / 2.0 * (hi - lo)
            } else {
                unit * amp
            }
        };
        let x = unit_state
            .iter()
            .zip(&self.state_domain)
            .map(|(&s, &b)| map(s, b))
            .collect();
        let u = unit_input
            .iter()
            .zip(&self.input_domain)
            .map(|(&s, &b)| map(s, b))
            .collect();
        (x, u)
    }
}

/// Builder for [`StateSpaceModel`]; the zoo uses it and so can library users
/// assembling custom models.
pub struct ModelBuilder {
    name: String,
    n_x: usize,
    n_u: usize,
    n_y: usize,
    f: Option<VecField>,
    h: Option<VecField>,
    jac: Option<JacField>,
    state_domain: Vec<(f64, f64)>,
    input_domain: Vec<(f64, f64)>,
    x0_default: Vec<f64>,
    feedthrough: bool,
}

impl ModelBuilder {
    pub fn dynamics(
        mut self,
        f: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.f = Some(Arc::new(f));
        self
    }

    pub fn output(
        mut self,
        h: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.h = Some(Arc::new(h));
        self
    }

    pub fn jacobians(
        mut self,
        jac: impl Fn(&[f64], &[f64]) -> Jacobians + Send + Sync + 'static,
    ) -> Self {
        self.jac = Some(Arc::new(jac));
        self
    }

    pub fn state_bounds(mut self, coord: usize, lo: f64, hi: f64) -> Self {
        self.state_domain[coord] = (lo, hi);
        self
    }

    pub fn input_bounds(mut self, coord: usize, lo: f64, hi: f64) -> Self {
        self.input_domain[coord] = (lo, hi);
        self
    }

    pub fn x0_default(mut self, x0: Vec<f64>) -> Self {
        self.x0_default = x0;
        self
    }

    pub fn feedthrough(mut self, yes: bool) -> Self {
        self.feedthrough = yes;
        self
    }

    pub fn build(self) -> Result<StateSpaceModel> {
        let f = match (self.n_x, self.f) {
            (0, None) => Arc::new(|_: &[f64], _: &[f64], _: &mut [f64]| {}) as VecField,
            (_, Some(f)) => f,
            (n, None) => {
                return Err(Error::InvalidParam(format!(
                    "model with {n} states needs dynamics"
                )))
            }
        };
        let h = self
            .h
            .ok_or_else(|| Error::InvalidParam("model needs an output map".into()))?;
        if self.x0_default.len() != self.n_x {
            return Err(Error::Dimension(format!(
                "x0_default has {} entries for {} states",
                self.x0_default.len(),
                self.n_x
            )));
        }
        let bounded = |d: &[(f64, f64)]| d.iter().any(|(lo, hi)| lo.is_finite() || hi.is_finite());
        let state_bounded = bounded(&self.state_domain);
        let input_bounded = bounded(&self.input_domain);
        Ok(StateSpaceModel {
            name: self.name,
            n_x: self.n_x,
            n_u: self.n_u,
            n_y: self.n_y,
            f,
            h,
            jac: self.jac,
            state_domain: self.state_domain,
            input_domain: self.input_domain,
            state_bounded,
            input_bounded,
            x0_default: self.x0_default,
            feedthrough: self.feedthrough,
        })
    }
}
