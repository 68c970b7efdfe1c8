//! Supply rates, storage functions, and dissipation-inequality checks in
//! non-incremental, incremental and differential form.
//!
//! The central object is the residual `r(t) = S(x(t)) - integral_0^t w`:
//! the dissipation inequality holds between every pair of grid times iff
//! `r` is nonincreasing, so each check reports the worst forward increase
//! of `r` as its margin.
//!
//! Supply integrals use the same exact piecewise quadrature as the signals
//! module: on each cell the input is constant and the output affine, so a
//! quadratic supply is a quadratic polynomial in time and a per-cell Simpson
//! rule integrates it exactly. This keeps lossless elements lossless on the
//! grid instead of drifting by `O(step)`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::StateSpaceModel;
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::signals::{grid_floor, Signal};
use crate::sim::{simulate, Trajectory, TrajectoryPair};

/// Integration grid of a report, for reproducibility.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridInfo {
    pub step: f64,
    pub horizon: f64,
}

impl GridInfo {
    pub fn of(signal: &Signal) -> Self {
        Self {
            step: signal.step(),
            horizon: signal.end_time(),
        }
    }
}

/// Instantaneous exchange term `w(u, y)`.
#[derive(Debug, Clone)]
pub enum SupplyRate {
    /// `w = u' y`; requires as many outputs as inputs.
    Passivity,
    /// `w = gamma^2 |u|^2 - |y|^2` with level `gamma > 0`.
    Gain(f64),
    /// General quadratic form `w = [u; y]' M [u; y]` with symmetric `M`.
    QuadraticForm(DMatrix<f64>),
}

impl SupplyRate {
    pub fn validate(&self, n_u: usize, n_y: usize) -> Result<()> {
        match self {
            SupplyRate::Passivity => {
                if n_u != n_y {
                    return Err(Error::InvalidStorage(format!(
                        "passivity supply needs n_u == n_y, got {n_u} and {n_y}"
                    )));
                }
            }
            SupplyRate::Gain(g) => {
                if g.is_nan() || *g <= 0.0 {
                    return Err(Error::InvalidStorage(format!(
                        "gain level must be positive, got {g}"
                    )));
                }
            }
            SupplyRate::QuadraticForm(m) => {
                let dim = n_u + n_y;
                if m.nrows() != dim || m.ncols() != dim {
                    return Err(Error::InvalidStorage(format!(
                        "quadratic form is {}x{}, expected {dim}x{dim}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                let asym = (m - m.transpose()).abs().max();
                if asym > 1e-12 * (1.0 + m.abs().max()) {
                    return Err(Error::InvalidStorage(format!(
                        "quadratic form not symmetric (max asymmetry {asym})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Pointwise evaluation on an input/output sample.
    pub fn eval(&self, u: &[f64], y: &[f64]) -> f64 {
        match self {
            SupplyRate::Passivity => u.iter().zip(y).map(|(a, b)| a * b).sum(),
            SupplyRate::Gain(g) => {
                let uu: f64 = u.iter().map(|v| v * v).sum();
                let yy: f64 = y.iter().map(|v| v * v).sum();
                g * g * uu - yy
            }
            SupplyRate::QuadraticForm(m) => {
                let dim = u.len() + y.len();
                let mut acc = 0.0;
                let z = |i: usize| if i < u.len() { u[i] } else { y[i - u.len()] };
                for i in 0..dim {
                    for j in 0..dim {
                        acc += z(i) * m[(i, j)] * z(j);
                    }
                }
                acc
            }
        }
    }

    /// The supply as a symmetric matrix on `[u; y]`.
    pub fn form_matrix(&self, n_u: usize, n_y: usize) -> DMatrix<f64> {
        let dim = n_u + n_y;
        match self {
            SupplyRate::Passivity => {
                let mut w = DMatrix::zeros(dim, dim);
                for i in 0..n_u {
                    w[(i, n_u + i)] = 0.5;
                    w[(n_u + i, i)] = 0.5;
                }
                w
            }
            SupplyRate::Gain(g) => {
                let mut w = DMatrix::zeros(dim, dim);
                for i in 0..n_u {
                    w[(i, i)] = g * g;
                }
                for i in 0..n_y {
                    w[(n_u + i, n_u + i)] = -1.0;
                }
                w
            }
            SupplyRate::QuadraticForm(m) => m.clone(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SupplyRate::Passivity => "passivity".into(),
            SupplyRate::Gain(g) => format!("gain({g})"),
            SupplyRate::QuadraticForm(m) => format!("quadratic_form({}x{})", m.nrows(), m.ncols()),
        }
    }
}

/// How a quadratic storage is meant to be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageMode {
    /// `S(x)` on states.
    State,
    /// `S(dx)` on increments between two trajectories.
    Increment,
    /// `S(dx)` on tangent vectors of the variational system.
    Differential,
}

/// Quadratic storage `S(xi) = xi' P xi` with symmetric positive-semidefinite
/// `P`.
#[derive(Debug, Clone)]
pub struct QuadraticStorage {
    p: DMatrix<f64>,
    mode: StorageMode,
}

impl QuadraticStorage {
    pub fn new(p: DMatrix<f64>, mode: StorageMode) -> Result<Self> {
        if p.nrows() != p.ncols() {
            return Err(Error::InvalidStorage(format!(
                "P is {}x{}",
                p.nrows(),
                p.ncols()
            )));
        }
        let scale = 1.0 + p.abs().max();
        let asym = (&p - p.transpose()).abs().max();
        if asym > 1e-12 * scale {
            return Err(Error::InvalidStorage(format!(
                "P not symmetric (asymmetry {asym})"
            )));
        }
        if p.nrows() > 0 {
            let min_eig = sym_eig_min(&p);
            if min_eig < -1e-10 * p.norm() {
                return Err(Error::InvalidStorage(format!(
                    "P not positive semidefinite (min eigenvalue {min_eig})"
                )));
            }
        }
        Ok(Self { p, mode })
    }

    /// Scalar storage `S = p * x^2`.
    pub fn scalar(p: f64, mode: StorageMode) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, p), mode)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn mode(&self) -> StorageMode {
        self.mode
    }

    fn quad(&self, xi: &[f64]) -> f64 {
        let n = self.p.nrows();
        debug_assert_eq!(xi.len(), n);
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += xi[i] * self.p[(i, j)] * xi[j];
            }
        }
        acc
    }
}

/// Storage evaluated on a single state vector.
pub trait Storage {
    fn eval(&self, x: &[f64]) -> f64;
    fn label(&self) -> String;
}

/// Storage evaluated on a pair of states, the general two-argument
/// incremental form `S(x1, x2)` with `S(x, x) = 0`.
pub trait PairStorage {
    fn eval_pair(&self, x1: &[f64], x2: &[f64]) -> f64;
    fn label(&self) -> String;
}

impl Storage for QuadraticStorage {
    fn eval(&self, x: &[f64]) -> f64 {
        self.quad(x)
    }

    fn label(&self) -> String {
        format!(
            "quadratic({}x{}, {:?})",
            self.p.nrows(),
            self.p.ncols(),
            self.mode
        )
    }
}

impl PairStorage for QuadraticStorage {
    fn eval_pair(&self, x1: &[f64], x2: &[f64]) -> f64 {
        let dx: Vec<f64> = x1.iter().zip(x2).map(|(a, b)| a - b).collect();
        self.quad(&dx)
    }

    fn label(&self) -> String {
        format!(
            "quadratic({}x{}, {:?})",
            self.p.nrows(),
            self.p.ncols(),
            self.mode
        )
    }
}

type StateFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type StatePairFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// Nonnegative storage given as an arbitrary function of the state.
#[derive(Clone)]
pub struct GeneralStorage {
    name: String,
    f: StateFn,
}

impl GeneralStorage {
    pub fn new(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }
}

impl Storage for GeneralStorage {
    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn label(&self) -> String {
        format!("general({})", self.name)
    }
}

/// Nonnegative two-argument storage `S(x1, x2)`, zero on the diagonal.
#[derive(Clone)]
pub struct TwoPointStorage {
    name: String,
    f: StatePairFn,
}

impl TwoPointStorage {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }
}

impl PairStorage for TwoPointStorage {
    fn eval_pair(&self, x1: &[f64], x2: &[f64]) -> f64 {
        (self.f)(x1, x2)
    }

    fn label(&self) -> String {
        format!("two_point({})", self.name)
    }
}

/// Outcome of a dissipation-inequality check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DissipationReport {
    pub pass: bool,
    /// Worst forward increase of the residual `r(t) = S - integral w` over
    /// all grid interval choices; nonpositive residual drift passes.
    pub margin: f64,
    pub worst_time: f64,
    pub tolerance: f64,
    pub storage: String,
    pub supply: String,
    pub model: String,
    pub grid: GridInfo,
}

/// Outcome of the pointwise differential check: the largest eigenvalue of
/// the dissipation matrix along the base trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginReport {
    pub pass: bool,
    pub margin: f64,
    pub worst_time: f64,
    pub tolerance: f64,
    pub storage: String,
    pub supply: String,
    pub model: String,
    pub grid: GridInfo,
}

/// Exact integral of `w(u(t), y(t))` over the first `n_cells` cells.
/// `u` and `y` are reconstructed per their kinds; each cell is integrated
/// with Simpson's rule, exact because quadratic supplies of affine signals
/// are quadratic in time.
fn supply_cells(u: &Signal, y: &Signal, s: &SupplyRate, n_cells: usize) -> f64 {
    let h6 = u.step() / 6.0;
    let (m, p) = (u.channels(), y.channels());
    let mut ul = vec![0.0; m];
    let mut um = vec![0.0; m];
    let mut ur = vec![0.0; m];
    let mut yl = vec![0.0; p];
    let mut ym = vec![0.0; p];
    let mut yr = vec![0.0; p];
    let mut acc = 0.0;
    for k in 0..n_cells {
        for c in 0..m {
            let (a, b) = u.cell(k, c);
            ul[c] = a;
            ur[c] = b;
            um[c] = 0.5 * (a + b);
        }
        for c in 0..p {
            let (a, b) = y.cell(k, c);
            yl[c] = a;
            yr[c] = b;
            ym[c] = 0.5 * (a + b);
        }
        acc += h6 * (s.eval(&ul, &yl) + 4.0 * s.eval(&um, &ym) + s.eval(&ur, &yr));
    }
    acc
}

/// Cumulative supply integral at every grid node.
fn supply_prefix(u: &Signal, y: &Signal, s: &SupplyRate) -> Vec<f64> {
    let h6 = u.step() / 6.0;
    let (m, p) = (u.channels(), y.channels());
    let mut ul = vec![0.0; m];
    let mut um = vec![0.0; m];
    let mut ur = vec![0.0; m];
    let mut yl = vec![0.0; p];
    let mut ym = vec![0.0; p];
    let mut yr = vec![0.0; p];
    let mut out = Vec::with_capacity(u.len());
    out.push(0.0);
    let mut acc = 0.0;
    for k in 0..u.len() - 1 {
        for c in 0..m {
            let (a, b) = u.cell(k, c);
            ul[c] = a;
            ur[c] = b;
            um[c] = 0.5 * (a + b);
        }
        for c in 0..p {
            let (a, b) = y.cell(k, c);
            yl[c] = a;
            yr[c] = b;
            ym[c] = 0.5 * (a + b);
        }
        acc += h6 * (s.eval(&ul, &yl) + 4.0 * s.eval(&um, &ym) + s.eval(&ur, &yr));
        out.push(acc);
    }
    out
}

/// Integral of the supply along a trajectory over `[0, min(T, end)]`.
pub fn supply_integral(traj: &Trajectory, s: &SupplyRate, t: f64) -> Result<f64> {
    s.validate(traj.input.channels(), traj.outputs.channels())?;
    let n_cells = grid_floor(traj.step(), t.max(0.0)).min(traj.len() - 1);
    Ok(supply_cells(&traj.input, &traj.outputs, s, n_cells))
}

/// Integral of the incremental supply (the supply evaluated on the input
/// and output differences of the pair).
pub fn incremental_supply_integral(pair: &TrajectoryPair, s: &SupplyRate, t: f64) -> Result<f64> {
    let du = pair.delta_input();
    let dy = pair.delta_outputs();
    s.validate(du.channels(), dy.channels())?;
    let n_cells = grid_floor(pair.step(), t.max(0.0)).min(du.len() - 1);
    Ok(supply_cells(&du, &dy, s, n_cells))
}

/// Worst forward increase over all ordered grid pairs: `max_{a<=b} r_b - r_a`
/// computed with a running minimum. Returns the increase and the time at
/// which it is realized.
fn worst_forward_increase(r: &[f64], step: f64) -> (f64, f64) {
    let mut run_min = f64::INFINITY;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = 0.0;
    for (k, &v) in r.iter().enumerate() {
        run_min = run_min.min(v);
        let rise = v - run_min;
        if rise > worst {
            worst = rise;
            worst_at = k as f64 * step;
        }
    }
    (worst.max(0.0), worst_at)
}

fn dissipation_report(
    r: &[f64],
    step: f64,
    storage: String,
    supply: &SupplyRate,
    model: &str,
    grid: GridInfo,
) -> DissipationReport {
    let (margin, worst_time) = worst_forward_increase(r, step);
    let scale = r.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tolerance = 1e-6 * (1.0 + scale);
    DissipationReport {
        pass: margin <= tolerance,
        margin,
        worst_time,
        tolerance,
        storage,
        supply: supply.describe(),
        model: model.to_string(),
        grid,
    }
}

/// Checks `S(x_a) + integral_a^b w >= S(x_b)` for every grid interval by
/// testing that `r(t) = S(x(t)) - integral_0^t w` never rises.
pub fn check_dissipation(
    m: &StateSpaceModel,
    storage: &dyn Storage,
    s: &SupplyRate,
    u: &Signal,
    x0: &[f64],
) -> Result<DissipationReport> {
    s.validate(m.n_u(), m.n_y())?;
    let traj = simulate(m, u, x0)?;
    let w = supply_prefix(&traj.input, &traj.outputs, s);
    let r: Vec<f64> = (0..traj.len())
        .map(|k| storage.eval(traj.states.row(k)) - w[k])
        .collect();
    Ok(dissipation_report(
        &r,
        traj.step(),
        storage.label(),
        s,
        m.name(),
        GridInfo::of(&traj.input),
    ))
}

/// Incremental form of [`check_dissipation`]: the inequality on differences
/// of two trajectories, with possibly distinct initial conditions.
pub fn check_incremental_dissipation(
    m: &StateSpaceModel,
    storage: &dyn PairStorage,
    s: &SupplyRate,
    u1: &Signal,
    u2: &Signal,
    x0_1: &[f64],
    x0_2: &[f64],
) -> Result<DissipationReport> {
    s.validate(m.n_u(), m.n_y())?;
    u1.check_aligned(u2)?;
    let first = simulate(m, u1, x0_1)?;
    let second = simulate(m, u2, x0_2)?;
    let pair = TrajectoryPair::new(first, second)?;
    let du = pair.delta_input();
    let dy = pair.delta_outputs();
    let w = supply_prefix(&du, &dy, s);
    let r: Vec<f64> = (0..du.len())
        .map(|k| storage.eval_pair(pair.first.states.row(k), pair.second.states.row(k)) - w[k])
        .collect();
    Ok(dissipation_report(
        &r,
        pair.step(),
        storage.label(),
        s,
        m.name(),
        GridInfo::of(&du),
    ))
}

/// Largest eigenvalue of a symmetric matrix, with closed forms for the tiny
/// sizes that dominate here.
fn sym_eig_max(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        0 => f64::NEG_INFINITY,
        1 => m[(0, 0)],
        2 => {
            let (a, b, d) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
            let mid = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            mid + rad
        }
        _ => m
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b)),
    }
}

fn sym_eig_min(m: &DMatrix<f64>) -> f64 {
    -sym_eig_max(&(-m.clone()))
}

/// The dissipation matrix of the variational system at one linearization:
/// with `z = [dx; du]`,
/// `d/dt (dx' P dx) - dw = z' M z`,
/// `M = [[A'P + PA, PB], [B'P, 0]] - sym(T' W T)`, `T = [[0, I], [C, D]]`.
/// For the passivity supply this is the familiar
/// `[[A'P + PA, PB - C'/2], [B'P - C/2, -(D + D')/2]]`.
fn pointwise_matrix(
    jac: &crate::models::Jacobians,
    p: &DMatrix<f64>,
    w: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = jac.a.nrows();
    let mu = jac.b.ncols();
    let py = jac.c.nrows();
    let mut m = DMatrix::zeros(n + mu, n + mu);

    let atp_pa = jac.a.transpose() * p + p * &jac.a;
    let pb = p * &jac.b;
    m.view_mut((0, 0), (n, n)).copy_from(&atp_pa);
    m.view_mut((0, n), (n, mu)).copy_from(&pb);
    m.view_mut((n, 0), (mu, n)).copy_from(&pb.transpose());

    let mut t = DMatrix::zeros(mu + py, n + mu);
    for i in 0..mu {
        t[(i, n + i)] = 1.0;
    }
    t.view_mut((mu, 0), (py, n)).copy_from(&jac.c);
    t.view_mut((mu, n), (py, mu)).copy_from(&jac.d);

    let twt = t.transpose() * w * t;
    m -= &twt;
    // Enforce symmetry against rounding before the eigenvalue call.
    0.5 * (&m + m.transpose())
}

fn validate_p(p: &DMatrix<f64>, n_x: usize) -> Result<()> {
    if p.nrows() != n_x || p.ncols() != n_x {
        return Err(Error::InvalidStorage(format!(
            "P is {}x{}, model has {n_x} states",
            p.nrows(),
            p.ncols()
        )));
    }
    if n_x > 0 {
        let asym = (p - p.transpose()).abs().max();
        if asym > 1e-12 * (1.0 + p.abs().max()) {
            return Err(Error::InvalidStorage("P not symmetric".into()));
        }
        if sym_eig_min(p) < -1e-10 * p.norm() {
            return Err(Error::InvalidStorage("P not positive semidefinite".into()));
        }
    }
    Ok(())
}

/// Pointwise differential dissipativity check for an arbitrary quadratic
/// supply: reports the largest eigenvalue of the dissipation matrix over the
/// base trajectory's grid. Nonpositive eigenvalues everywhere certify the
/// differential inequality along the base.
pub fn check_differential_supply_pointwise(
    m: &StateSpaceModel,
    base: &Trajectory,
    p: &DMatrix<f64>,
    s: &SupplyRate,
) -> Result<MarginReport> {
    s.validate(m.n_u(), m.n_y())?;
    validate_p(p, m.n_x())?;
    let w = s.form_matrix(m.n_u(), m.n_y());
    let mut margin = f64::NEG_INFINITY;
    let mut worst_time = 0.0;
    for k in 0..base.len() {
        let jac = m.linearize_at(base.states.row(k), base.input.row(k))?;
        let eig = sym_eig_max(&pointwise_matrix(&jac, p, &w));
        if eig > margin {
            margin = eig;
            worst_time = base.input.time(k);
        }
    }
    let tolerance = 1e-8 * (1.0 + p.norm());
    Ok(MarginReport {
        pass: margin <= tolerance,
        margin,
        worst_time,
        tolerance,
        storage: format!("quadratic({}x{}, Differential)", p.nrows(), p.ncols()),
        supply: s.describe(),
        model: m.name().to_string(),
        grid: GridInfo::of(&base.input),
    })
}

/// The passivity instance of the pointwise differential check.
pub fn check_differential_passivity_pointwise(
    m: &StateSpaceModel,
    base: &Trajectory,
    p: &DMatrix<f64>,
) -> Result<MarginReport> {
    check_differential_supply_pointwise(m, base, p, &SupplyRate::Passivity)
}

/// Options for [`search_constant_storage_with`].
#[derive(Debug, Clone)]
pub struct StorageSearchOptions {
    pub starts: usize,
    pub iters_per_start: usize,
    pub seed: u64,
    /// Grid stride for the search objective; the final margin is always
    /// re-evaluated on the full grid.
    pub objective_stride_target: usize,
}

impl Default for StorageSearchOptions {
    fn default() -> Self {
        Self {
            starts: 20,
            iters_per_start: 200,
            seed: 7,
            objective_stride_target: 512,
        }
    }
}

/// Searches for a constant quadratic storage `P = L L'` certifying the
/// pointwise differential inequality on every base trajectory. Returns the
/// matrix when the full-grid margin meets the pointwise tolerance, `None`
/// otherwise; absence of a certificate is not proof of impossibility.
pub fn search_constant_storage(
    m: &StateSpaceModel,
    bases: &[Trajectory],
    s: &SupplyRate,
) -> Result<Option<DMatrix<f64>>> {
    search_constant_storage_with(m, bases, s, &StorageSearchOptions::default())
}

pub fn search_constant_storage_with(
    m: &StateSpaceModel,
    bases: &[Trajectory],
    s: &SupplyRate,
    opts: &StorageSearchOptions,
) -> Result<Option<DMatrix<f64>>> {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    s.validate(m.n_u(), m.n_y())?;
    let n = m.n_x();
    if n > 6 {
        return Err(Error::InvalidParam(format!(
            "constant-storage search supports n_x <= 6, model has {n}"
        )));
    }
    if bases.is_empty() {
        return Err(Error::InvalidParam(
            "need at least one base trajectory".into(),
        ));
    }

    let full_margin = |p: &DMatrix<f64>| -> Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        for base in bases {
            let rep = check_differential_supply_pointwise(m, base, p, s)?;
            worst = worst.max(rep.margin);
        }
        Ok(worst)
    };

    if n == 0 {
        let p = DMatrix::zeros(0, 0);
        let margin = full_margin(&p)?;
        return Ok(if margin <= 1e-8 { Some(p) } else { None });
    }

    // Linearizations do not depend on P: precompute them once, subsampled
    // for the search objective.
    let w = s.form_matrix(m.n_u(), m.n_y());
    let mut jacs = Vec::new();
    for base in bases {
        let total = base.len();
        let stride = (total / opts.objective_stride_target).max(1);
        let mut k = 0;
        while k < total {
            jacs.push(m.linearize_at(base.states.row(k), base.input.row(k))?);
            k += stride;
        }
        if !(total - 1).is_multiple_of(stride) {
            jacs.push(m.linearize_at(base.states.row(total - 1), base.input.row(total - 1))?);
        }
    }

    let dim = n * (n + 1) / 2;
    let lower_from = |theta: &[f64]| -> DMatrix<f64> {
        let mut l = DMatrix::zeros(n, n);
        let mut idx = 0;
        for i in 0..n {
            for j in 0..=i {
                l[(i, j)] = theta[idx];
                idx += 1;
            }
        }
        l
    };
    let objective = |theta: &[f64]| -> f64 {
        let l = lower_from(theta);
        let p = &l * l.transpose();
        jacs.iter()
            .map(|j| sym_eig_max(&pointwise_matrix(j, &p, &w)))
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for start in 0..opts.starts {
        let x0: Vec<f64> = if start == 0 {
            // Cholesky factor of P = I/2.
            let mut v = vec![0.0; dim];
            let mut idx = 0;
            for i in 0..n {
                for j in 0..=i {
                    if i == j {
                        v[idx] = 0.5f64.sqrt();
                    }
                    idx += 1;
                }
            }
            v
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(start as u64));
            (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        let scale = vec![0.25; dim];
        let result = nelder_mead(
            objective,
            &x0,
            &scale,
            &NelderMeadOptions {
                max_iters: opts.iters_per_start,
                f_tol: 1e-14,
                ..Default::default()
            },
        );
        let better = match &best {
            None => true,
            Some((v, _, _)) => result.value < *v,
        };
        if better {
            best = Some((result.value, start, result.x));
        }
    }

    let (_, _, theta) = best.expect("at least one start");
    let l = lower_from(&theta);
    let p = &l * l.transpose();
    let p = 0.5 * (&p + p.transpose());
    let margin = full_margin(&p)?;
    Ok(if margin <= 1e-8 * (1.0 + p.norm()) {
        Some(p)
    } else {
        None
    })
}
