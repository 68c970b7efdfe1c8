//! Preset models: Chua's one-port circuit elements, the saturated
//! integrator, the Hodgkin-Huxley potassium current and an LTI reference lag.
//!
//! Every preset ships analytic Jacobians. Concrete nonlinearities and rate
//! constants not fixed by the element definitions (the capacitor law, the
//! HH rate functions and conductances) are documented choices of this crate.

use nalgebra::DMatrix;
use serde_json::Value;

use super::{Jacobians, StateSpaceModel, StaticMap};
use crate::error::{Error, Result};

/// Which form of the potassium gate kinetics to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum HhKinetics {
    /// Classical Hodgkin-Huxley relaxation `dn/dt = alpha(V)(1-n) - beta(V)n`.
    Standard,
    /// The printed equation `dn/dt = alpha(V)n + beta(V)(1-n)`, kept for
    /// comparison; it is unstable for `alpha > 0` and can push `n` out of
    /// `[0, 1]`, which the simulator then reports as a domain exit.
    PaperLiteral,
}

fn require_positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParam(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// Charge integrator with linear output: `dq/dt = i`, `v = q / C`.
pub fn linear_capacitor(c: f64) -> Result<StateSpaceModel> {
    let c = require_positive("C", c)?;
    StateSpaceModel::builder("linear_capacitor", 1, 1, 1)
        .dynamics(|_x, u, dx| dx[0] = u[0])
        .output(move |x, _u, y| y[0] = x[0] / c)
        .jacobians(move |_x, _u| Jacobians {
            a: DMatrix::from_element(1, 1, 0.0),
            b: DMatrix::from_element(1, 1, 1.0),
            c: DMatrix::from_element(1, 1, 1.0 / c),
            d: DMatrix::from_element(1, 1, 0.0),
        })
        .feedthrough(false)
        .build()
}

/// Current-controlled nonlinear capacitor: `dq/dt = i`, `v = c(q)` with a
/// monotone charge-voltage law.
pub fn nonlinear_capacitor(law: StaticMap) -> Result<StateSpaceModel> {
    if !law.is_monotone() {
        return Err(Error::InvalidParam(format!(
            "capacitor law `{}` must be monotone",
            law.name()
        )));
    }
    let law_h = law.clone();
    let law_j = law.clone();
    StateSpaceModel::builder(format!("nonlinear_capacitor[{}]", law.name()), 1, 1, 1)
        .dynamics(|_x, u, dx| dx[0] = u[0])
        .output(move |x, _u, y| y[0] = law_h.eval(x[0]))
        .jacobians(move |x, _u| Jacobians {
            a: DMatrix::from_element(1, 1, 0.0),
            b: DMatrix::from_element(1, 1, 1.0),
            c: DMatrix::from_element(1, 1, law_j.deriv(x[0])),
            d: DMatrix::from_element(1, 1, 0.0),
        })
        .state_bounds(0, -3.0, 3.0)
        .input_bounds(0, -2.0, 2.0)
        .feedthrough(false)
        .build()
}

/// Integrator with a saturating output stage: `dx/dt = u`, `y = tanh(k x)`.
pub fn saturated_integrator(k: f64) -> Result<StateSpaceModel> {
    let k = require_positive("gain k", k)?;
    StateSpaceModel::builder("saturated_integrator", 1, 1, 1)
        .dynamics(|_x, u, dx| dx[0] = u[0])
        .output(move |x, _u, y| y[0] = (k * x[0]).tanh())
        .jacobians(move |x, _u| {
            let t = (k * x[0]).tanh();
            Jacobians {
                a: DMatrix::from_element(1, 1, 0.0),
                b: DMatrix::from_element(1, 1, 1.0),
                c: DMatrix::from_element(1, 1, k * (1.0 - t * t)),
                d: DMatrix::from_element(1, 1, 0.0),
            }
        })
        .feedthrough(false)
        .build()
}

/// `x / (1 - exp(-x))`, the shape shared by the HH alpha rate, with the
/// removable singularity at `x = 0` filled by its series.
fn softrate(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x / 2.0 + x * x / 12.0
    } else {
        x / (1.0 - (-x).exp())
    }
}

fn softrate_deriv(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        0.5 + x / 6.0
    } else {
        let e = (-x).exp();
        let den = 1.0 - e;
        (den - x * e) / (den * den)
    }
}

/// `alpha_n(V) = 0.01 (V + 55) / (1 - exp(-(V + 55) / 10))`.
pub fn hh_alpha(v: f64) -> f64 {
    0.1 * softrate((v + 55.0) / 10.0)
}

fn hh_alpha_deriv(v: f64) -> f64 {
    0.01 * softrate_deriv((v + 55.0) / 10.0)
}

/// `beta_n(V) = 0.125 exp(-(V + 65) / 80)`.
pub fn hh_beta(v: f64) -> f64 {
    0.125 * (-(v + 65.0) / 80.0).exp()
}

fn hh_beta_deriv(v: f64) -> f64 {
    -hh_beta(v) / 80.0
}

/// Hodgkin-Huxley potassium current: gate state `n`, input `V`, output
/// `I = g_K n^4 (V - V_K)`, on the domain `V >= V_K`, `n` in `[0, 1]`.
pub fn hh_potassium(g_k: f64, v_k: f64, kinetics: HhKinetics) -> Result<StateSpaceModel> {
    let g_k = require_positive("g_K", g_k)?;
    if !v_k.is_finite() {
        return Err(Error::InvalidParam(format!(
            "V_K must be finite, got {v_k}"
        )));
    }
    let name = match kinetics {
        HhKinetics::Standard => "hh_potassium".to_string(),
        HhKinetics::PaperLiteral => "hh_potassium[paper-literal]".to_string(),
    };
    StateSpaceModel::builder(name, 1, 1, 1)
        .dynamics(move |x, u, dx| {
            let (n, v) = (x[0], u[0]);
            dx[0] = match kinetics {
                HhKinetics::Standard => hh_alpha(v) * (1.0 - n) - hh_beta(v) * n,
                HhKinetics::PaperLiteral => hh_alpha(v) * n + hh_beta(v) * (1.0 - n),
            };
        })
        .output(move |x, u, y| {
            let n2 = x[0] * x[0];
            y[0] = g_k * n2 * n2 * (u[0] - v_k);
        })
        .jacobians(move |x, u| {
            let (n, v) = (x[0], u[0]);
            let (df_dn, df_dv) = match kinetics {
                HhKinetics::Standard => (
                    -(hh_alpha(v) + hh_beta(v)),
                    hh_alpha_deriv(v) * (1.0 - n) - hh_beta_deriv(v) * n,
                ),
                HhKinetics::PaperLiteral => (
                    hh_alpha(v) - hh_beta(v),
                    hh_alpha_deriv(v) * n + hh_beta_deriv(v) * (1.0 - n),
                ),
            };
            Jacobians {
                a: DMatrix::from_element(1, 1, df_dn),
                b: DMatrix::from_element(1, 1, df_dv),
                c: DMatrix::from_element(1, 1, 4.0 * g_k * n * n * n * (v - v_k)),
                d: DMatrix::from_element(1, 1, g_k * n * n * n * n),
            }
        })
        .state_bounds(0, 0.0, 1.0)
        .input_bounds(0, v_k, v_k + 120.0)
        .x0_default(vec![0.3])
        .feedthrough(true)
        .build()
}

/// Flux integrator with monotone current law: `dphi/dt = v`, `i = l(phi)`.
pub fn chua_inductor(law: StaticMap) -> Result<StateSpaceModel> {
    if !law.is_monotone() {
        return Err(Error::InvalidParam(format!(
            "inductor law `{}` must be monotone",
            law.name()
        )));
    }
    let law_h = law.clone();
    let law_j = law.clone();
    StateSpaceModel::builder(format!("chua_inductor[{}]", law.name()), 1, 1, 1)
        .dynamics(|_x, u, dx| dx[0] = u[0])
        .output(move |x, _u, y| y[0] = law_h.eval(x[0]))
        .jacobians(move |x, _u| Jacobians {
            a: DMatrix::from_element(1, 1, 0.0),
            b: DMatrix::from_element(1, 1, 1.0),
            c: DMatrix::from_element(1, 1, law_j.deriv(x[0])),
            d: DMatrix::from_element(1, 1, 0.0),
        })
        .feedthrough(false)
        .build()
}

/// Memristor from the flux-charge relation `phi = mu(q)`: `dq/dt = i`,
/// `v = mu'(q) i`. A monotone increasing `mu` makes the memristance
/// `mu'(q)` positive, so the element is instantaneously passive.
pub fn chua_memristor(mu: StaticMap) -> Result<StateSpaceModel> {
    if !mu.is_monotone() {
        return Err(Error::InvalidParam(format!(
            "memristor flux law `{}` must be monotone increasing",
            mu.name()
        )));
    }
    let mu_h = mu.clone();
    let mu_j = mu.clone();
    StateSpaceModel::builder(format!("chua_memristor[{}]", mu.name()), 1, 1, 1)
        .dynamics(|_x, u, dx| dx[0] = u[0])
        .output(move |x, u, y| y[0] = mu_h.deriv(x[0]) * u[0])
        .jacobians(move |x, u| Jacobians {
            a: DMatrix::from_element(1, 1, 0.0),
            b: DMatrix::from_element(1, 1, 1.0),
            c: DMatrix::from_element(1, 1, mu_j.second_deriv(x[0]) * u[0]),
            d: DMatrix::from_element(1, 1, mu_j.deriv(x[0])),
        })
        .feedthrough(true)
        .build()
}

/// Stateless resistor `y = g(u)`.
pub fn static_resistor(g: StaticMap) -> Result<StateSpaceModel> {
    let g_h = g.clone();
    let g_j = g.clone();
    StateSpaceModel::builder(format!("static_resistor[{}]", g.name()), 0, 1, 1)
        .output(move |_x, u, y| y[0] = g_h.eval(u[0]))
        .jacobians(move |_x, u| Jacobians {
            a: DMatrix::zeros(0, 0),
            b: DMatrix::zeros(0, 1),
            c: DMatrix::zeros(1, 0),
            d: DMatrix::from_element(1, 1, g_j.deriv(u[0])),
        })
        .feedthrough(true)
        .build()
}

/// First-and-third-quadrant resistor with regions of negative slope:
/// `y = 0.5 u (1.1 + cos(3u))`. Instantaneous power `u y >= 0.05 u^2` is
/// nonnegative everywhere, yet `dy/du < 0` near `|u| = 0.9`.
pub fn negative_resistance_passive() -> Result<StateSpaceModel> {
    StateSpaceModel::builder("negative_resistance_passive", 0, 1, 1)
        .output(|_x, u, y| y[0] = 0.5 * u[0] * (1.1 + (3.0 * u[0]).cos()))
        .jacobians(|_x, u| Jacobians {
            a: DMatrix::zeros(0, 0),
            b: DMatrix::zeros(0, 1),
            c: DMatrix::zeros(1, 0),
            d: DMatrix::from_element(
                1,
                1,
                0.55 + 0.5 * (3.0 * u[0]).cos() - 1.5 * u[0] * (3.0 * u[0]).sin(),
            ),
        })
        .feedthrough(true)
        .build()
}

/// LTI reference case: `dx/dt = -a x + u`, `y = x`.
pub fn first_order_lag(a: f64) -> Result<StateSpaceModel> {
    let a = require_positive("a", a)?;
    StateSpaceModel::builder("first_order_lag", 1, 1, 1)
        .dynamics(move |x, u, dx| dx[0] = -a * x[0] + u[0])
        .output(|x, _u, y| y[0] = x[0])
        .jacobians(move |_x, _u| Jacobians {
            a: DMatrix::from_element(1, 1, -a),
            b: DMatrix::from_element(1, 1, 1.0),
            c: DMatrix::from_element(1, 1, 1.0),
            d: DMatrix::from_element(1, 1, 0.0),
        })
        .feedthrough(false)
        .build()
}

fn param_f64(params: &serde_json::Map<String, Value>, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None => Ok(default),
        Some(Value::Number(n)) => n
            .as_f64()
            .ok_or_else(|| Error::InvalidParam(format!("{key}: not representable as f64"))),
        Some(other) => Err(Error::InvalidParam(format!(
            "{key}: expected number, got {other}"
        ))),
    }
}

/// Parses a static-map parameter: either a preset name (`"cubic"`,
/// `"stiffening"`) or an object like `{"preset": "linear", "slope": 2.0}` /
/// `{"preset": "tanh", "gain": 1.5}`.
fn param_static_map(
    params: &serde_json::Map<String, Value>,
    key: &str,
    default: StaticMap,
) -> Result<StaticMap> {
    let spec = match params.get(key) {
        None => return Ok(default),
        Some(v) => v,
    };
    let (preset, obj) = match spec {
        Value::String(s) => (s.as_str(), None),
        Value::Object(o) => (
            o.get("preset").and_then(Value::as_str).ok_or_else(|| {
                Error::InvalidParam(format!("{key}: object needs a `preset` string"))
            })?,
            Some(o),
        ),
        other => {
            return Err(Error::InvalidParam(format!(
                "{key}: expected preset name or object, got {other}"
            )))
        }
    };
    let get = |field: &str, default: f64| -> Result<f64> {
        match obj.and_then(|o| o.get(field)) {
            None => Ok(default),
            Some(Value::Number(n)) => n
                .as_f64()
                .ok_or_else(|| Error::InvalidParam(format!("{key}.{field}: bad number"))),
            Some(other) => Err(Error::InvalidParam(format!(
                "{key}.{field}: bad value {other}"
            ))),
        }
    };
    match preset {
        "cubic" => Ok(StaticMap::cubic()),
        "stiffening" => Ok(StaticMap::stiffening()),
        "linear" => Ok(StaticMap::linear(get("slope", 1.0)?)),
        "tanh" => Ok(StaticMap::tanh(get("gain", 1.0)?)),
        "memristance_default" => Ok(StaticMap::memristance_default()),
        other => Err(Error::InvalidParam(format!(
            "{key}: unknown static map `{other}`"
        ))),
    }
}

/// Builds a preset model by name with a JSON parameter object, the form
/// used by the command-line configuration.
pub fn zoo(name: &str, params: &serde_json::Map<String, Value>) -> Result<StateSpaceModel> {
    match name {
        "linear_capacitor" => linear_capacitor(param_f64(params, "C", 1.0)?),
        "nonlinear_capacitor" => {
            nonlinear_capacitor(param_static_map(params, "c", StaticMap::cubic())?)
        }
        "saturated_integrator" => saturated_integrator(param_f64(params, "k", 1.0)?),
        "hh_potassium" => {
            let kinetics = match params.get("kinetics") {
                None => HhKinetics::Standard,
                Some(Value::String(s)) if s == "standard" => HhKinetics::Standard,
                Some(Value::String(s)) if s == "paper-literal" => HhKinetics::PaperLiteral,
                Some(other) => {
                    return Err(Error::InvalidParam(format!(
                        "kinetics: expected \"standard\" or \"paper-literal\", got {other}"
                    )))
                }
            };
            hh_potassium(
                param_f64(params, "g_K", 36.0)?,
                param_f64(params, "V_K", -77.0)?,
                kinetics,
            )
        }
        "chua_inductor" => chua_inductor(param_static_map(params, "l", StaticMap::stiffening())?),
        "chua_memristor" => chua_memristor(param_static_map(
            params,
            "mu",
            StaticMap::memristance_default(),
        )?),
        "static_resistor" => {
            static_resistor(param_static_map(params, "g", StaticMap::stiffening())?)
        }
        "negative_resistance_passive" => negative_resistance_passive(),
        "first_order_lag" => first_order_lag(param_f64(params, "a", 1.0)?),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}
