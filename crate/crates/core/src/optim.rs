//! Derivative-free minimization: the Nelder-Mead simplex method.
//!
//! Used by the falsification search and the constant-storage search. Both
//! objectives are nonsmooth (saturations, eigenvalue maxima, domain
//! rejections mapped to infinity), which rules out gradient methods.

/// Options for a single Nelder-Mead run.
#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    /// Reflection coefficient.
    pub alpha: f64,
    /// Expansion coefficient.
    pub gamma: f64,
    /// Contraction coefficient.
    pub rho: f64,
    /// Shrink coefficient.
    pub sigma: f64,
    pub max_iters: usize,
    /// Hard cap on objective evaluations; the run stops once reached.
    pub max_evals: usize,
    /// Stop when the simplex value spread falls below this.
    pub f_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            gamma: 2.0,
            rho: 0.5,
            sigma: 0.5,
            max_iters: 200,
            max_evals: usize::MAX,
            f_tol: 1e-12,
        }
    }
}

/// Result of a Nelder-Mead run.
#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iters: usize,
    pub evals: usize,
}

/// Minimizes `f` starting from `x0`, with the initial simplex spanned by
/// per-coordinate steps `scale`. Infinite objective values are legal and are
/// treated as worst; the method is fully deterministic.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    scale: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let n = x0.len();
    assert!(n > 0, "empty parameter vector");
    assert_eq!(scale.len(), n);

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += scale[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

    let mut iters = 0;
    while iters < opts.max_iters && evals < opts.max_evals {
        iters += 1;

        // Order vertices best to worst; ties keep insertion order so the
        // search is independent of the platform's sort internals.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if values[n].is_finite() && (values[n] - values[0]).abs() <= opts.f_tol {
            break;
        }

        let mut centroid = vec![0.0; n];
        for v in simplex.iter().take(n) {
            for (c, vi) in centroid.iter_mut().zip(v) {
                *c += vi;
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }

        let lerp = |from: &[f64], to: &[f64], coeff: f64| -> Vec<f64> {
            from.iter()
                .zip(to)
                .map(|(a, b)| a + coeff * (b - a))
                .collect()
        };

        // Reflect the worst vertex through the centroid.
        let reflected = lerp(&centroid, &simplex[n], -opts.alpha);
        let f_r = eval(&reflected, &mut evals);

        if f_r < values[0] {
            let expanded = lerp(&centroid, &reflected, opts.gamma);
            let f_e = eval(&expanded, &mut evals);
            if f_e < f_r {
                simplex[n] = expanded;
                values[n] = f_e;
            } else {
                simplex[n] = reflected;
                values[n] = f_r;
            }
        } else if f_r < values[n - 1] {
            simplex[n] = reflected;
            values[n] = f_r;
        } else {
            let (contracted, f_c) = if f_r < values[n] {
                let c = lerp(&centroid, &reflected, opts.rho);
                let v = eval(&c, &mut evals);
                (c, v)
            } else {
                let c = lerp(&centroid, &simplex[n], opts.rho);
                let v = eval(&c, &mut evals);
                (c, v)
            };
            if f_c < values[n].min(f_r) {
                simplex[n] = contracted;
                values[n] = f_c;
            } else {
                // Shrink everything toward the best vertex.
                for i in 1..=n {
                    simplex[i] = lerp(&simplex[0], &simplex[i], opts.sigma);
                    values[i] = eval(&simplex[i], &mut evals);
                    if evals >= opts.max_evals {
                        break;
                    }
                }
            }
        }
    }

    let best = values
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.total_cmp(b).then(i.cmp(j)))
        .map(|(i, _)| i)
        .unwrap();
    NelderMeadResult {
        x: simplex[best].clone(),
        value: values[best],
        iters,
        evals,
    }
}
