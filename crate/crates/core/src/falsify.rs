//! Optimization-based falsification of input-output monotonicity, lower
//! bounds on the incremental gain, and the scattering transform tying the
//! two together.
//!
//! The falsifier searches input pairs `(u1, u2)` and horizons `T` for a
//! negative truncated inner product `<P_T du, P_T dy>`. A hit is returned
//! as a [`ViolationCertificate`]: the full recipe (coefficients, horizon,
//! seed, grid) to re-simulate and reproduce the value. Absence of a hit is
//! returned as a search summary: evidence, not proof, of monotonicity.
//!
//! Both trajectories start from one shared initial state, so the model
//! defines a single input-output operator and certificates need no
//! initial-increment bookkeeping. Whether a given violation survives under
//! other initial-condition conventions is a property of the model, not of
//! this search; probe it by rerunning from different `x0`.

use serde::{Deserialize, Serialize};

use crate::dissipativity::GridInfo;
use crate::error::{Error, Result};
use crate::models::StateSpaceModel;
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::signals::{grid_floor, Signal, SignalKind};
use crate::sim::{simulate_pair, TrajectoryPair};

/// Family of candidate input signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamKind {
    /// `k` equal-length constant segments over the horizon.
    #[serde(rename = "piecewise-constant")]
    PiecewiseConstant,
    /// Truncated Fourier series with `k` harmonics, coefficients scaled so
    /// the amplitude bound holds by the triangle inequality.
    #[serde(rename = "fourier-lowpass")]
    FourierLowpass,
}

/// Finite-dimensional parameterization of candidate inputs.
///
/// Decoded signals satisfy `|u(t)| <= a_max` per channel by construction
/// (clamping for segments, coefficient scaling for the Fourier family).
/// When `ranges` is set, the normalized value is mapped affinely onto the
/// given per-channel interval instead, used for models whose admissible
/// inputs are a box away from the origin, with `a_max` then acting through
/// the normalization only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputParameterization {
    pub kind: ParamKind,
    /// Segment count or harmonic count.
    pub k: usize,
    pub horizon: f64,
    pub a_max: f64,
    pub channels: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranges: Option<Vec<(f64, f64)>>,
}

impl InputParameterization {
    pub fn piecewise_constant(k: usize, horizon: f64, a_max: f64, channels: usize) -> Self {
        Self {
            kind: ParamKind::PiecewiseConstant,
            k,
            horizon,
            a_max,
            channels,
            ranges: None,
        }
    }

    pub fn fourier_lowpass(k: usize, horizon: f64, a_max: f64, channels: usize) -> Self {
        Self {
            kind: ParamKind::FourierLowpass,
            k,
            horizon,
            a_max,
            channels,
            ranges: None,
        }
    }

    /// Maps decoded values onto the model's input box where it is bounded.
    /// For the potassium-current model this realizes "amplitude bound as a
    /// fraction of the voltage range".
    pub fn with_model_input_range(mut self, m: &StateSpaceModel) -> Self {
        let boxes: Vec<(f64, f64)> = m.input_domain().to_vec();
        if boxes
            .iter()
            .any(|(lo, hi)| lo.is_finite() && hi.is_finite())
        {
            let ranges = boxes
                .iter()
                .map(|&(lo, hi)| {
                    if lo.is_finite() && hi.is_finite() {
                        (lo, hi)
                    } else {
                        (-self.a_max, self.a_max)
                    }
                })
                .collect();
            self.ranges = Some(ranges);
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParam("parameterization needs k >= 1".into()));
        }
        if self.horizon.is_nan() || self.horizon <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.a_max.is_nan() || self.a_max <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "a_max must be positive, got {}",
                self.a_max
            )));
        }
        if self.channels == 0 {
            return Err(Error::InvalidParam(
                "parameterization needs channels >= 1".into(),
            ));
        }
        if let Some(r) = &self.ranges {
            if r.len() != self.channels {
                return Err(Error::InvalidParam(format!(
                    "{} ranges for {} channels",
                    r.len(),
                    self.channels
                )));
            }
            if r.iter()
                .any(|(lo, hi)| !lo.is_finite() || !hi.is_finite() || lo >= hi)
            {
                return Err(Error::InvalidParam(
                    "ranges must be finite nonempty intervals".into(),
                ));
            }
        }
        Ok(())
    }

    /// Coefficient-vector length for one input signal.
    pub fn dim(&self) -> usize {
        match self.kind {
            ParamKind::PiecewiseConstant => self.channels * self.k,
            ParamKind::FourierLowpass => self.channels * (2 * self.k + 1),
        }
    }

    /// Decodes coefficients into a `Zoh` signal on the simulation grid.
    pub fn decode(&self, theta: &[f64], step: f64) -> Result<Signal> {
        self.validate()?;
        if theta.len() != self.dim() {
            return Err(Error::InvalidParam(format!(
                "{} coefficients, parameterization needs {}",
                theta.len(),
                self.dim()
            )));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam("coefficients must be finite".into()));
        }
        if step.is_nan() || step <= 0.0 || step > self.horizon {
            return Err(Error::InvalidParam(format!(
                "step {step} incompatible with horizon {}",
                self.horizon
            )));
        }
        let n = grid_floor(step, self.horizon) + 1;
        let map_range = |normalized: f64, c: usize| -> f64 {
            match &self.ranges {
                Some(r) => {
                    let (lo, hi) = r[c];
                    lo + (normalized + 1.0) / 2.0 * (hi - lo)
                }
                None => normalized * self.a_max,
            }
        };
        let mut values = Vec::with_capacity(n * self.channels);
        match self.kind {
            ParamKind::PiecewiseConstant => {
                // Clamp and range-map once per segment, then fill samples.
                let levels: Vec<f64> = (0..self.channels)
                    .flat_map(|c| {
                        (0..self.k).map(move |s| {
                            let raw = theta[c * self.k + s].clamp(-self.a_max, self.a_max);
                            map_range(raw / self.a_max, c)
                        })
                    })
                    .collect();
                let seg_len = self.horizon / self.k as f64;
                for sample in 0..n {
                    let t = sample as f64 * step;
                    let seg = ((t / seg_len) as usize).min(self.k - 1);
                    for c in 0..self.channels {
                        values.push(levels[c * self.k + seg]);
                    }
                }
            }
            ParamKind::FourierLowpass => {
                // Scale each channel's coefficients so that
                // |c0| + sum_j sqrt(a_j^2 + b_j^2) <= a_max.
                let per = 2 * self.k + 1;
                let mut scaled = theta.to_vec();
                for c in 0..self.channels {
                    let coeffs = &mut scaled[c * per..(c + 1) * per];
                    let mut budget = coeffs[0].abs();
                    for j in 0..self.k {
                        budget += (coeffs[1 + 2 * j].powi(2) + coeffs[2 + 2 * j].powi(2)).sqrt();
                    }
                    if budget > self.a_max {
                        let factor = self.a_max / budget;
                        for v in coeffs.iter_mut() {
                            *v *= factor;
                        }
                    }
                }
                let omega = std::f64::consts::TAU / self.horizon;
                for sample in 0..n {
                    let t = sample as f64 * step;
                    for c in 0..self.channels {
                        let coeffs = &scaled[c * per..(c + 1) * per];
                        let mut v = coeffs[0];
                        for j in 0..self.k {
                            let phase = omega * (j + 1) as f64 * t;
                            v += coeffs[1 + 2 * j] * phase.cos() + coeffs[2 + 2 * j] * phase.sin();
                        }
                        values.push(map_range(v / self.a_max, c));
                    }
                }
            }
        }
        Ok(Signal::from_raw_parts(
            step,
            self.channels,
            n,
            values,
            SignalKind::Zoh,
            None,
        ))
    }
}

/// A reproducible witness that the monotonicity inequality fails: decoding
/// the two coefficient vectors, simulating from `x0` on the stored grid and
/// evaluating the inner product at `t_eval` recovers `value`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ViolationCertificate {
    pub model_name: String,
    /// Preset parameters needed to rebuild the model; filled by callers
    /// that construct models from configuration.
    #[serde(default)]
    pub model_params: serde_json::Value,
    pub parameterization: InputParameterization,
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
    pub x0: Vec<f64>,
    pub t_eval: f64,
    /// The achieved inner product; negative by more than the tolerance.
    pub value: f64,
    pub seed: u64,
    pub grid: GridInfo,
}

impl ViolationCertificate {
    /// Whether a freshly computed value matches the stored one to the
    /// certified relative tolerance.
    pub fn matches(&self, fresh: f64) -> bool {
        (fresh - self.value).abs() <= 1e-9 * (1.0 + self.value.abs())
    }
}

/// Search outcome: a certificate when the best value crosses the violation
/// tolerance, plus the raw search statistics either way.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FalsifyResult {
    pub certificate: Option<ViolationCertificate>,
    pub best_value: f64,
    pub tol_violation: f64,
    pub evaluations: usize,
    pub seed: u64,
}

/// Lower-bound estimate of the incremental gain, with its witness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GainEstimate {
    pub value: f64,
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
    pub t_eval: f64,
    pub evaluations: usize,
    pub seed: u64,
}

/// Eight geometrically spaced evaluation horizons in `(0, T]`, snapped to
/// whole grid cells.
fn horizon_cells(horizon: f64, step: f64, max_cells: usize) -> Vec<usize> {
    (0..8)
        .map(|j| {
            let t = horizon * 2f64.powi(j - 7);
            grid_floor(step, t).clamp(1, max_cells)
        })
        .collect()
}

/// What a search scores on: the inner product per horizon (monotonicity) or
/// the output/input energies per horizon (gain).
enum PairScore {
    Objective,
    GainRatio,
}

/// `(value to minimize, index of the realizing horizon)` for one pair.
fn score_pair(pair: &TrajectoryPair, cells: &[usize], what: &PairScore) -> (f64, usize) {
    match what {
        PairScore::Objective => {
            let duy = pair.objective_prefix();
            let mut best = (f64::INFINITY, 0usize);
            for (i, &n) in cells.iter().enumerate() {
                if duy[n] < best.0 {
                    best = (duy[n], i);
                }
            }
            best
        }
        PairScore::GainRatio => {
            let (duu, dyy) = pair.energy_prefixes();
            let mut best = (0.0f64, 0usize);
            for (i, &n) in cells.iter().enumerate() {
                if duu[n] >= 1e-12 {
                    let ratio = (dyy[n] / duu[n]).sqrt();
                    if ratio > best.0 {
                        best = (ratio, i);
                    }
                }
            }
            (-best.0, best.1)
        }
    }
}

/// The falsifier's objective: decode both coefficient vectors, simulate the
/// pair from `x0`, and return `<P_T du, P_T dy>` at `t_eval`. A domain exit
/// or blown-up simulation rejects the candidate with `+inf` rather than
/// counting as a violation.
pub fn monotonicity_objective(
    m: &StateSpaceModel,
    theta1: &[f64],
    theta2: &[f64],
    param: &InputParameterization,
    t_eval: f64,
    x0: &[f64],
    step: f64,
) -> Result<f64> {
    let u1 = param.decode(theta1, step)?;
    let u2 = param.decode(theta2, step)?;
    match simulate_pair(m, &u1, &u2, x0) {
        Ok(pair) => pair.delta_input().inner(&pair.delta_outputs(), t_eval),
        Err(Error::DomainExit { .. }) | Err(Error::NonFinite { .. }) => Ok(f64::INFINITY),
        Err(other) => Err(other),
    }
}

/// Shared two-phase search: uniform seeding over the coefficient box, then
/// Nelder-Mead refinement from the best five starts.
fn two_phase_search(
    m: &StateSpaceModel,
    param: &InputParameterization,
    step: f64,
    x0: &[f64],
    budget: usize,
    seed: u64,
    score: PairScore,
) -> Result<(f64, Vec<f64>, usize, usize)> {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    param.validate()?;
    if budget == 0 {
        return Err(Error::InvalidParam("budget must be at least 1".into()));
    }
    let dim = param.dim();
    let joint = 2 * dim;
    let max_cells = grid_floor(step, param.horizon);
    let cells = horizon_cells(param.horizon, step, max_cells);

    let mut evaluations = 0usize;
    let evaluate = |theta12: &[f64], evaluations: &mut usize| -> Result<(f64, usize)> {
        *evaluations += 1;
        let u1 = param.decode(&theta12[..dim], step)?;
        let u2 = param.decode(&theta12[dim..], step)?;
        match simulate_pair(m, &u1, &u2, x0) {
            Ok(pair) => Ok(score_pair(&pair, &cells, &score)),
            Err(Error::DomainExit { .. }) | Err(Error::NonFinite { .. }) => Ok((f64::INFINITY, 0)),
            Err(other) => Err(other),
        }
    };

    let n_random = (budget / 2).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n_random);
    for _ in 0..n_random {
        let theta: Vec<f64> = (0..joint)
            .map(|_| rng.gen_range(-param.a_max..param.a_max))
            .collect();
        let (value, _) = evaluate(&theta, &mut evaluations)?;
        sampled.push((value, theta));
    }

    let mut order: Vec<usize> = (0..sampled.len()).collect();
    order.sort_by(|&a, &b| sampled[a].0.total_cmp(&sampled[b].0).then(a.cmp(&b)));
    let starts: Vec<usize> = order
        .into_iter()
        .take(5)
        .filter(|&i| sampled[i].0.is_finite())
        .collect();

    let mut best_value = f64::INFINITY;
    let mut best_theta: Vec<f64> = Vec::new();
    if let Some(&first) = starts.first() {
        best_value = sampled[first].0;
        best_theta = sampled[first].1.clone();
    }

    let remaining = budget.saturating_sub(evaluations);
    let per_start = if starts.is_empty() {
        0
    } else {
        (remaining / starts.len()).max(1)
    };
    for &idx in &starts {
        let mut err: Option<Error> = None;
        let result = {
            let evals_ref = &mut evaluations;
            let err_ref = &mut err;
            nelder_mead(
                |theta| match evaluate(theta, evals_ref) {
                    Ok((v, _)) => v,
                    Err(e) => {
                        if err_ref.is_none() {
                            *err_ref = Some(e);
                        }
                        f64::INFINITY
                    }
                },
                &sampled[idx].1,
                &vec![0.25 * param.a_max; joint],
                &NelderMeadOptions {
                    max_iters: 200,
                    max_evals: per_start,
                    ..Default::default()
                },
            )
        };
        if let Some(e) = err {
            return Err(e);
        }
        if result.value < best_value {
            best_value = result.value;
            best_theta = result.x;
        }
    }

    if best_theta.is_empty() {
        // Every candidate was rejected (e.g. domain exits everywhere).
        return Ok((f64::INFINITY, vec![0.0; joint], 0, evaluations));
    }
    // Re-evaluate the winner to recover the realizing horizon.
    let (value, horizon_idx) = evaluate(&best_theta, &mut evaluations)?;
    let cell = cells[horizon_idx];
    Ok((value, best_theta, cell, evaluations))
}

/// Searches for a monotonicity violation of the model's input-output map.
///
/// Minimizes `<P_T du, P_T dy>` jointly over both coefficient vectors and
/// over eight geometrically spaced horizons. Returns a certificate iff the
/// best value is below `-1e-6 (1 + a_max^2 T)`; `None` in `certificate`
/// means no violation was found within the budget, not that none exists.
/// Identical `(model, param, budget, seed)` reproduce the result bit for
/// bit.
pub fn falsify_monotonicity(
    m: &StateSpaceModel,
    param: &InputParameterization,
    step: f64,
    x0: &[f64],
    budget: usize,
    seed: u64,
) -> Result<FalsifyResult> {
    let tol_violation = 1e-6 * (1.0 + param.a_max * param.a_max * param.horizon);
    let (value, theta, cell, evaluations) =
        two_phase_search(m, param, step, x0, budget, seed, PairScore::Objective)?;

    let dim = param.dim();
    let certificate = if value < -tol_violation {
        Some(ViolationCertificate {
            model_name: m.name().to_string(),
            model_params: serde_json::Value::Null,
            parameterization: param.clone(),
            theta1: theta[..dim].to_vec(),
            theta2: theta[dim..].to_vec(),
            x0: x0.to_vec(),
            t_eval: cell as f64 * step,
            value,
            seed,
            grid: GridInfo {
                step,
                horizon: param.horizon,
            },
        })
    } else {
        None
    };
    Ok(FalsifyResult {
        certificate,
        best_value: value,
        tol_violation,
        evaluations,
        seed,
    })
}

/// Best found ratio `|P_T dy| / |P_T du|` over input pairs and horizons,
/// a lower bound on the incremental gain by definition. Pairs with
/// `|P_T du| < 1e-6` are skipped.
pub fn incremental_gain_lb(
    m: &StateSpaceModel,
    param: &InputParameterization,
    step: f64,
    x0: &[f64],
    budget: usize,
    seed: u64,
) -> Result<GainEstimate> {
    let (neg_ratio, theta, cell, evaluations) =
        two_phase_search(m, param, step, x0, budget, seed, PairScore::GainRatio)?;
    let dim = param.dim();
    let value = if neg_ratio.is_finite() {
        (-neg_ratio).max(0.0)
    } else {
        0.0
    };
    Ok(GainEstimate {
        value,
        theta1: theta[..dim].to_vec(),
        theta2: theta[dim..].to_vec(),
        t_eval: cell as f64 * step,
        evaluations,
        seed,
    })
}

/// Scattering transform of an increment pair:
/// `du' = (du + dy) / sqrt(2)`, `dy' = (du - dy) / sqrt(2)`.
///
/// The sums are formed cell-exactly (the operands may carry different
/// reconstructions), so the identity
/// `|P_T du'|^2 - |P_T dy'|^2 = 2 <P_T du, P_T dy>`
/// holds to rounding for every horizon, and a negative inner product is
/// exactly a truncated-gain ratio above one for the scattered pair.
pub fn scatter(pair: &TrajectoryPair) -> Result<(Signal, Signal)> {
    let du = pair.delta_input();
    let dy = pair.delta_outputs();
    if du.channels() != dy.channels() {
        return Err(Error::Dimension(format!(
            "scattering needs square io, got {} inputs and {} outputs",
            du.channels(),
            dy.channels()
        )));
    }
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let u_s = du.add(&dy)?.scale(inv_sqrt2);
    let y_s = du.sub(&dy)?.scale(inv_sqrt2);
    Ok((u_s, y_s))
}

/// Re-simulates a certificate against a freshly built model and returns the
/// recomputed inner product. The caller compares it with
/// [`ViolationCertificate::matches`].
pub fn validate_certificate(m: &StateSpaceModel, cert: &ViolationCertificate) -> Result<f64> {
    let u1 = cert.parameterization.decode(&cert.theta1, cert.grid.step)?;
    let u2 = cert.parameterization.decode(&cert.theta2, cert.grid.step)?;
    let pair = simulate_pair(m, &u1, &u2, &cert.x0)?;
    pair.delta_input().inner(&pair.delta_outputs(), cert.t_eval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{zoo, StaticMap};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const STEP: f64 = 1e-3;

    #[test]
    fn equal_coefficients_give_exactly_zero() {
        let m = zoo::nonlinear_capacitor(StaticMap::cubic()).unwrap();
        let param = InputParameterization::piecewise_constant(8, 10.0, 1.0, 1);
        let theta: Vec<f64> = (0..8).map(|i| 0.1 * i as f64 - 0.4).collect();
        let v = monotonicity_objective(&m, &theta, &theta, &param, 10.0, &[0.0], STEP).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn objective_is_symmetric_under_swap() {
        let m = zoo::saturated_integrator(1.0).unwrap();
        let param = InputParameterization::piecewise_constant(6, 5.0, 1.0, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let t1: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let t2: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = monotonicity_objective(&m, &t1, &t2, &param, 5.0, &[0.0], STEP).unwrap();
            let b = monotonicity_objective(&m, &t2, &t1, &param, 5.0, &[0.0], STEP).unwrap();
            assert_eq!(a, b, "swap changed the objective");
        }
    }

    #[test]
    fn monotone_static_resistor_never_goes_negative() {
        let m = zoo::static_resistor(StaticMap::stiffening()).unwrap();
        let param = InputParameterization::piecewise_constant(8, 10.0, 1.0, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let t1: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let t2: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for t_eval in [0.7, 2.0, 10.0] {
                let v = monotonicity_objective(&m, &t1, &t2, &param, t_eval, &[], STEP).unwrap();
                assert!(v >= -1e-12, "monotone resistor violated: {v}");
            }
        }
    }

    #[test]
    fn linear_capacitor_objective_is_half_square_of_charge_increment() {
        let m = zoo::linear_capacitor(1.0).unwrap();
        let param = InputParameterization::piecewise_constant(8, 10.0, 1.0, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let t1: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let t2: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let u1 = param.decode(&t1, STEP).unwrap();
            let u2 = param.decode(&t2, STEP).unwrap();
            let pair = simulate_pair(&m, &u1, &u2, &[0.0]).unwrap();
            for t_eval in [1.25, 5.0, 10.0] {
                let v = pair
                    .delta_input()
                    .inner(&pair.delta_outputs(), t_eval)
                    .unwrap();
                let k = (t_eval / STEP).round() as usize;
                let dq = pair.first.states.value(k, 0) - pair.second.states.value(k, 0);
                let want = 0.5 * dq * dq;
                assert!(
                    (v - want).abs() <= 1e-9 * (1.0 + want),
                    "t={t_eval}: {v} vs {want}"
                );
                assert!(v >= -1e-9);
            }
        }
    }

    #[test]
    fn falsifier_breaks_the_cubic_capacitor() {
        let m = zoo::nonlinear_capacitor(StaticMap::cubic()).unwrap();
        let param = InputParameterization::piecewise_constant(8, 10.0, 1.0, 1);
        let result = falsify_monotonicity(&m, &param, STEP, &[0.0], 2000, 42).unwrap();
        let cert = result.certificate.expect("cubic capacitor is not monotone");
        assert!(cert.value < -1e-4, "value {}", cert.value);
        let fresh = validate_certificate(&m, &cert).unwrap();
        assert!(cert.matches(fresh));
        assert!(result.evaluations <= 2000 + 8);
    }

    #[test]
    fn falsifier_is_deterministic() {
        let m = zoo::saturated_integrator(1.0).unwrap();
        let param = InputParameterization::piecewise_constant(8, 10.0, 1.0, 1);
        let a = falsify_monotonicity(&m, &param, STEP, &[0.0], 600, 9).unwrap();
        let b = falsify_monotonicity(&m, &param, STEP, &[0.0], 600, 9).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn the_other_nonlinear_chua_elements_are_falsified_too() {
        // The inductor shares the capacitor's integrator-plus-nonlinearity
        // structure and falls at the default signal class.
        let m = zoo::chua_inductor(StaticMap::stiffening()).unwrap();
        let param = InputParameterization::piecewise_constant(8, 10.0, 1.0, 1);
        let result = falsify_monotonicity(&m, &param, STEP, &[0.0], 2000, 42).unwrap();
        let cert = result.certificate.expect("nonlinear inductor should not be monotone");
        let fresh = validate_certificate(&m, &cert).unwrap();
        assert!(cert.matches(fresh));

        // The memristor v = (1 + q^2) i needs room to work with: every
        // violation must first pay for separating the charges through the
        // instantaneously passive law, and within |i| <= 1, T = 10 the
        // search bottoms out at zero. Double the amplitude and horizon and
        // it is falsified decisively.
        let m = zoo::chua_memristor(StaticMap::memristance_default()).unwrap();
        let param = InputParameterization::piecewise_constant(8, 20.0, 2.0, 1);
        let result = falsify_monotonicity(&m, &param, 2e-3, &[0.0], 3000, 42).unwrap();
        let cert = result.certificate.expect("memristor should fall at the wider signal class");
        assert!(cert.value < -1.0, "expected a deep violation, got {}", cert.value);
        let fresh = validate_certificate(&m, &cert).unwrap();
        assert!(cert.matches(fresh));
    }

    #[test]
    fn fourier_decode_respects_amplitude_bound() {
        let param = InputParameterization::fourier_lowpass(4, 5.0, 0.8, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let theta: Vec<f64> = (0..param.dim()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let u = param.decode(&theta, 1e-2).unwrap();
            for k in 0..u.len() {
                for c in 0..2 {
                    assert!(u.value(k, c).abs() <= 0.8 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn range_mapping_targets_the_model_input_box() {
        let m = zoo::hh_potassium(36.0, -77.0, zoo::HhKinetics::Standard).unwrap();
        let param =
            InputParameterization::piecewise_constant(8, 10.0, 1.0, 1).with_model_input_range(&m);
        let theta = vec![1.0, -1.0, 0.0, 0.5, -0.5, 1.0, -1.0, 0.0];
        let u = param.decode(&theta, 1e-2).unwrap();
        for k in 0..u.len() {
            let v = u.value(k, 0);
            assert!((-77.0..=43.0).contains(&v), "V = {v} outside the box");
        }
        assert_eq!(u.value(0, 0), 43.0); // theta = +1 maps to the top
        let mid_seg1 = (1.3 / 1e-2) as usize;
        assert_eq!(u.value(mid_seg1, 0), -77.0); // theta = -1 maps to the bottom
    }

    #[test]
    fn static_gain_of_two_has_incremental_gain_two() {
        let m = zoo::static_resistor(StaticMap::linear(2.0)).unwrap();
        let param = InputParameterization::piecewise_constant(8, 10.0, 1.0, 1);
        let est = incremental_gain_lb(&m, &param, STEP, &[], 300, 3).unwrap();
        assert!((est.value - 2.0).abs() < 1e-6, "gain {}", est.value);
    }

    #[test]
    fn zero_operator_has_zero_gain() {
        let m = zoo::static_resistor(StaticMap::linear(0.0)).unwrap();
        let param = InputParameterization::piecewise_constant(4, 5.0, 1.0, 1);
        let est = incremental_gain_lb(&m, &param, STEP, &[], 100, 1).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn scattering_identities() {
        // Identity operator: dy = du, so the scattered output vanishes.
        let m = zoo::static_resistor(StaticMap::linear(1.0)).unwrap();
        let param = InputParameterization::piecewise_constant(6, 4.0, 1.0, 1);
        let u1 = param
            .decode(&[0.3, -0.8, 0.5, 0.0, 0.9, -0.2], STEP)
            .unwrap();
        let u2 = param
            .decode(&[-0.1, 0.4, -0.6, 0.7, 0.2, 0.8], STEP)
            .unwrap();
        let pair = simulate_pair(&m, &u1, &u2, &[]).unwrap();
        let (u_s, y_s) = scatter(&pair).unwrap();
        assert!(y_s.norm(4.0) < 1e-12);
        assert!(u_s.norm(4.0) > 0.1);

        // Zero operator: both scattered signals carry the input energy.
        let zero = zoo::static_resistor(StaticMap::linear(0.0)).unwrap();
        let pair = simulate_pair(&zero, &u1, &u2, &[]).unwrap();
        let (u_s, y_s) = scatter(&pair).unwrap();
        assert!((u_s.norm(4.0) - y_s.norm(4.0)).abs() < 1e-12);
    }

    #[test]
    fn scattering_norm_identity_on_a_dynamic_pair() {
        let m = zoo::nonlinear_capacitor(StaticMap::cubic()).unwrap();
        let param = InputParameterization::piecewise_constant(8, 10.0, 1.0, 1);
        let u1 = param
            .decode(&[0.4, -0.6, 0.2, 0.8, -0.3, 0.1, -0.9, 0.5], STEP)
            .unwrap();
        let u2 = param
            .decode(&[-0.2, 0.3, -0.5, 0.1, 0.6, -0.4, 0.7, -0.1], STEP)
            .unwrap();
        let pair = simulate_pair(&m, &u1, &u2, &[0.0]).unwrap();
        let (u_s, y_s) = scatter(&pair).unwrap();
        let du = pair.delta_input();
        let dy = pair.delta_outputs();
        for t in [0.9, 3.3, 10.0] {
            let lhs = u_s.inner(&u_s, t).unwrap() - y_s.inner(&y_s, t).unwrap();
            let rhs = 2.0 * du.inner(&dy, t).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()),
                "t={t}: {lhs} vs {rhs}"
            );
            let total = du.inner(&du, t).unwrap() + dy.inner(&dy, t).unwrap();
            let scattered = u_s.inner(&u_s, t).unwrap() + y_s.inner(&y_s, t).unwrap();
            assert!(
                (total - scattered).abs() <= 1e-9 * (1.0 + total),
                "energy not preserved"
            );
        }
    }

    #[test]
    fn corrupted_certificate_fails_validation() {
        let m = zoo::nonlinear_capacitor(StaticMap::cubic()).unwrap();
        let param = InputParameterization::piecewise_constant(8, 10.0, 1.0, 1);
        let result = falsify_monotonicity(&m, &param, STEP, &[0.0], 1500, 7).unwrap();
        let mut cert = result.certificate.expect("violation expected");
        cert.value *= 1.5;
        let fresh = validate_certificate(&m, &cert).unwrap();
        assert!(!cert.matches(fresh));
    }
}
