//! Sampled multichannel signals on a uniform grid, with truncation,
//! L2 inner products and norms.
//!
//! A [`Signal`] stores node samples at `t_k = k * step` together with a
//! reconstruction kind that fixes the continuous-time function the samples
//! stand for:
//!
//! * [`SignalKind::Zoh`]: staircase, constant on each cell `[t_k, t_{k+1})`.
//!   This is exactly how the simulator realizes input signals, so inputs and
//!   input increments are `Zoh`.
//! * [`SignalKind::Pwl`]: piecewise linear through the samples. States and
//!   feedthrough-free outputs of an ODE are continuous, so they are `Pwl`.
//! * [`SignalKind::Cells`]: independent affine segment per cell. Closed
//!   under sums of mixed kinds; produced by the scattering transform.
//!
//! Inner products and norms are the *exact* L2 integrals of the reconstructed
//! functions, evaluated cell by cell. Every cell is an affine segment for all
//! three kinds, so one closed-form cell integral covers all combinations.
//! Plain node-sample trapezoid quadrature is not used: against a zero-order
//! hold it carries an `O(step)` bias on products like `u * integral(u)`,
//! large enough to turn a lossless integrator into a false monotonicity
//! violation. The exact cell integrals make such cases clean to rounding.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Continuous-time reconstruction associated with a signal's samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SignalKind {
    /// Zero-order hold: constant on each cell, jumps at the nodes.
    Zoh,
    /// Piecewise-linear interpolation through the samples.
    Pwl,
    /// Independent affine segment per cell (start and end value stored).
    Cells,
}

/// Uniformly sampled multichannel signal starting at t = 0.
#[derive(Debug, Clone)]
pub struct Signal {
    step: f64,
    channels: usize,
    samples: usize,
    /// Row-major node values: sample `k`, channel `c` at `k * channels + c`.
    values: Vec<f64>,
    kind: SignalKind,
    /// For `Cells` only: end value of each cell, `(samples - 1)` rows.
    cell_end: Option<Vec<f64>>,
}

/// Largest index `n` with `n * step <= t`, guarded against f64 slop so that
/// a nominally on-grid `t` lands on its node.
pub(crate) fn grid_floor(step: f64, t: f64) -> usize {
    if t <= 0.0 {
        return 0;
    }
    let q = t / step;
    (q + 1e-9 * q.max(1.0)).floor() as usize
}

impl Signal {
    /// Builds a signal from flat row-major values.
    pub fn new(step: f64, channels: usize, values: Vec<f64>, kind: SignalKind) -> Result<Self> {
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::InvalidSignal(format!(
                "step must be positive, got {step}"
            )));
        }
        if kind == SignalKind::Cells {
            return Err(Error::InvalidSignal(
                "cell signals cannot be built from node values alone".into(),
            ));
        }
        let samples = if channels == 0 {
            return Err(Error::InvalidSignal("channels must be positive".into()));
        } else {
            if !values.len().is_multiple_of(channels) {
                return Err(Error::InvalidSignal(format!(
                    "{} values do not fill rows of {} channels",
                    values.len(),
                    channels
                )));
            }
            values.len() / channels
        };
        if samples == 0 {
            return Err(Error::InvalidSignal(
                "signal needs at least one sample".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal("non-finite sample value".into()));
        }
        Ok(Self {
            step,
            channels,
            samples,
            values,
            kind,
            cell_end: None,
        })
    }

    /// Signal with empty rows, used for the state track of stateless models.
    pub(crate) fn empty_rows(step: f64, samples: usize) -> Self {
        Self {
            step,
            channels: 0,
            samples,
            values: Vec::new(),
            kind: SignalKind::Pwl,
            cell_end: None,
        }
    }

    pub(crate) fn from_raw_parts(
        step: f64,
        channels: usize,
        samples: usize,
        values: Vec<f64>,
        kind: SignalKind,
        cell_end: Option<Vec<f64>>,
    ) -> Self {
        debug_assert_eq!(values.len(), samples * channels);
        debug_assert_eq!(kind == SignalKind::Cells, cell_end.is_some());
        Self {
            step,
            channels,
            samples,
            values,
            kind,
            cell_end,
        }
    }

    /// Samples `f(t, channel)` on `n` grid points.
    pub fn from_fn(
        step: f64,
        samples: usize,
        channels: usize,
        kind: SignalKind,
        f: impl Fn(f64, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(samples * channels);
        for k in 0..samples {
            let t = k as f64 * step;
            for c in 0..channels {
                values.push(f(t, c));
            }
        }
        Self::new(step, channels, values, kind)
    }

    /// Constant signal holding `level` on every sample.
    pub fn constant(step: f64, samples: usize, level: &[f64], kind: SignalKind) -> Result<Self> {
        Self::from_fn(step, samples, level.len(), kind, |_, c| level[c])
    }

    /// All-zero signal.
    pub fn zeros(step: f64, samples: usize, channels: usize, kind: SignalKind) -> Result<Self> {
        Self::from_fn(step, samples, channels, kind, |_, _| 0.0)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Number of samples (grid nodes).
    pub fn len(&self) -> usize {
        self.samples
    }

    pub fn is_empty(&self) -> bool {
        self.samples == 0
    }

    pub fn kind(&self) -> SignalKind {
        self.kind
    }

    /// Time of the last sample.
    pub fn end_time(&self) -> f64 {
        (self.samples - 1) as f64 * self.step
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn value(&self, sample: usize, channel: usize) -> f64 {
        self.values[sample * self.channels + channel]
    }

    pub fn row(&self, sample: usize) -> &[f64] {
        &self.values[sample * self.channels..(sample + 1) * self.channels]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Start and end value of the affine segment on cell `k` for `channel`.
    #[inline]
    pub(crate) fn cell(&self, k: usize, channel: usize) -> (f64, f64) {
        let s = self.values[k * self.channels + channel];
        match self.kind {
            SignalKind::Zoh => (s, s),
            SignalKind::Pwl => (s, self.values[(k + 1) * self.channels + channel]),
            SignalKind::Cells => (
                s,
                self.cell_end.as_ref().expect("cells store ends")[k * self.channels + channel],
            ),
        }
    }

    /// True when binary operations between the two signals are defined.
    pub fn is_aligned(&self, other: &Signal) -> bool {
        let step_ok = (self.step - other.step).abs() <= 1e-12 * self.step.max(other.step);
        step_ok && self.channels == other.channels && self.samples == other.samples
    }

    pub(crate) fn check_aligned(&self, other: &Signal) -> Result<()> {
        if self.is_aligned(other) {
            Ok(())
        } else {
            Err(Error::Misaligned(format!(
                "({} samples, {} ch, step {}) vs ({} samples, {} ch, step {})",
                self.samples, self.channels, self.step, other.samples, other.channels, other.step
            )))
        }
    }

    /// Truncation operator: samples at `t >= T` are zeroed, where a non-grid
    /// `T` is first rounded down to the nearest grid point. Length, grid and
    /// kind are unchanged; `T` past the end returns the signal as is.
    pub fn truncate(&self, t: f64) -> Signal {
        let n_keep = grid_floor(self.step, t.max(0.0)).min(self.samples);
        let mut out = self.clone();
        for v in out.values[n_keep * self.channels..].iter_mut() {
            *v = 0.0;
        }
        if let Some(ends) = out.cell_end.as_mut() {
            let first_dead_cell = n_keep.min(self.samples - 1);
            for v in ends[first_dead_cell * self.channels..].iter_mut() {
                *v = 0.0;
            }
        }
        out
    }

    /// Inner product `<P_T a, P_T b>`: the exact integral of the product of
    /// the two reconstructions over `[0, min(T, end)]`, summed over channels.
    pub fn inner(&self, other: &Signal, t: f64) -> Result<f64> {
        self.check_aligned(other)?;
        let n_cells = grid_floor(self.step, t.max(0.0)).min(self.samples - 1);
        Ok(self.inner_cells(other, n_cells))
    }

    /// Inner product over the first `n_cells` grid cells.
    pub(crate) fn inner_cells(&self, other: &Signal, n_cells: usize) -> f64 {
        let mut acc = 0.0;
        self.fold_cells(other, n_cells, |v| acc += v);
        acc
    }

    /// Streams the exact integral of the product over each cell, in order.
    /// Single-channel node-valued signals take a branch-free path per kind
    /// pair; this is the falsifier's innermost loop.
    fn fold_cells(&self, other: &Signal, n_cells: usize, mut sink: impl FnMut(f64)) {
        if self.channels == 1 && self.kind != SignalKind::Cells && other.kind != SignalKind::Cells {
            let a = &self.values;
            let b = &other.values;
            match (self.kind, other.kind) {
                (SignalKind::Zoh, SignalKind::Zoh) => {
                    let h = self.step;
                    for k in 0..n_cells {
                        sink(h * a[k] * b[k]);
                    }
                }
                (SignalKind::Zoh, SignalKind::Pwl) => {
                    let h2 = 0.5 * self.step;
                    for k in 0..n_cells {
                        sink(h2 * a[k] * (b[k] + b[k + 1]));
                    }
                }
                (SignalKind::Pwl, SignalKind::Zoh) => {
                    let h2 = 0.5 * self.step;
                    for k in 0..n_cells {
                        sink(h2 * b[k] * (a[k] + a[k + 1]));
                    }
                }
                _ => {
                    let h6 = self.step / 6.0;
                    for k in 0..n_cells {
                        sink(
                            h6 * (2.0 * a[k] * b[k]
                                + a[k] * b[k + 1]
                                + a[k + 1] * b[k]
                                + 2.0 * a[k + 1] * b[k + 1]),
                        );
                    }
                }
            }
            return;
        }
        let h6 = self.step / 6.0;
        for k in 0..n_cells {
            let mut cell = 0.0;
            for c in 0..self.channels {
                let (s1, e1) = self.cell(k, c);
                let (s2, e2) = other.cell(k, c);
                cell += 2.0 * s1 * s2 + s1 * e2 + e1 * s2 + 2.0 * e1 * e2;
            }
            sink(h6 * cell);
        }
    }

    /// `||P_T a||`, the truncated L2 norm.
    pub fn norm(&self, t: f64) -> f64 {
        self.inner(self, t)
            .expect("signal aligns with itself")
            .max(0.0)
            .sqrt()
    }

    /// Running inner product: entry `n` is `<P_{t_n} a, P_{t_n} b>`, so one
    /// pass serves every evaluation horizon.
    pub fn inner_prefix(&self, other: &Signal) -> Result<Vec<f64>> {
        self.check_aligned(other)?;
        let mut out = Vec::with_capacity(self.samples);
        let mut acc = 0.0;
        out.push(0.0);
        self.fold_cells(other, self.samples - 1, |v| {
            acc += v;
            out.push(acc);
        });
        Ok(out)
    }

    /// Running inner product of differences, `<P_t (a1 - a2), P_t (b1 - b2)>`
    /// at every node, without materializing the difference signals. This is
    /// the falsifier's innermost quantity, evaluated tens of thousands of
    /// times per search.
    pub(crate) fn diff_inner_prefix(
        a1: &Signal,
        a2: &Signal,
        b1: &Signal,
        b2: &Signal,
    ) -> Vec<f64> {
        let samples = a1.samples;
        let mut out = Vec::with_capacity(samples);
        out.push(0.0);
        let single = a1.channels == 1
            && a1.kind == a2.kind
            && b1.kind == b2.kind
            && a1.kind != SignalKind::Cells
            && b1.kind != SignalKind::Cells;
        if single {
            let (av1, av2, bv1, bv2) = (&a1.values, &a2.values, &b1.values, &b2.values);
            let mut acc = 0.0;
            match (a1.kind, b1.kind) {
                (SignalKind::Zoh, SignalKind::Zoh) => {
                    let h = a1.step;
                    for k in 0..samples - 1 {
                        acc += h * (av1[k] - av2[k]) * (bv1[k] - bv2[k]);
                        out.push(acc);
                    }
                }
                (SignalKind::Zoh, SignalKind::Pwl) => {
                    let h2 = 0.5 * a1.step;
                    let mut db = bv1[0] - bv2[0];
                    for k in 0..samples - 1 {
                        let db_next = bv1[k + 1] - bv2[k + 1];
                        acc += h2 * (av1[k] - av2[k]) * (db + db_next);
                        db = db_next;
                        out.push(acc);
                    }
                }
                (SignalKind::Pwl, SignalKind::Zoh) => {
                    let h2 = 0.5 * a1.step;
                    let mut da = av1[0] - av2[0];
                    for k in 0..samples - 1 {
                        let da_next = av1[k + 1] - av2[k + 1];
                        acc += h2 * (bv1[k] - bv2[k]) * (da + da_next);
                        da = da_next;
                        out.push(acc);
                    }
                }
                _ => {
                    let h6 = a1.step / 6.0;
                    let mut da = av1[0] - av2[0];
                    let mut db = bv1[0] - bv2[0];
                    for k in 0..samples - 1 {
                        let da_next = av1[k + 1] - av2[k + 1];
                        let db_next = bv1[k + 1] - bv2[k + 1];
                        acc += h6
                            * (2.0 * da * db
                                + da * db_next
                                + da_next * db
                                + 2.0 * da_next * db_next);
                        da = da_next;
                        db = db_next;
                        out.push(acc);
                    }
                }
            }
            return out;
        }
        let da = a1.sub(a2).expect("aligned");
        let db = b1.sub(b2).expect("aligned");
        da.inner_prefix(&db).expect("aligned")
    }

    /// Difference `self - other`; exact even when the kinds differ.
    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        self.combine(other, -1.0)
    }

    /// Sum `self + other`; exact even when the kinds differ.
    pub fn add(&self, other: &Signal) -> Result<Signal> {
        self.combine(other, 1.0)
    }

    fn combine(&self, other: &Signal, sign: f64) -> Result<Signal> {
        self.check_aligned(other)?;
        if self.kind == other.kind && self.kind != SignalKind::Cells {
            let values = self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + sign * b)
                .collect();
            return Ok(Signal::from_raw_parts(
                self.step,
                self.channels,
                self.samples,
                values,
                self.kind,
                None,
            ));
        }
        // Mixed kinds: the sum is affine on every cell but neither Zoh nor
        // Pwl, so keep both segment endpoints per cell.
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + sign * b)
            .collect();
        let mut ends = Vec::with_capacity((self.samples - 1) * self.channels);
        for k in 0..self.samples - 1 {
            for c in 0..self.channels {
                let (_, e1) = self.cell(k, c);
                let (_, e2) = other.cell(k, c);
                ends.push(e1 + sign * e2);
            }
        }
        Ok(Signal::from_raw_parts(
            self.step,
            self.channels,
            self.samples,
            values,
            SignalKind::Cells,
            Some(ends),
        ))
    }

    /// Scales every value by `factor`.
    pub fn scale(&self, factor: f64) -> Signal {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v *= factor;
        }
        if let Some(ends) = out.cell_end.as_mut() {
            for v in ends.iter_mut() {
                *v *= factor;
            }
        }
        out
    }

    /// Writes the signal as CSV with header `t,ch0,ch1,...`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t")?;
        for c in 0..self.channels {
            write!(w, ",ch{c}")?;
        }
        writeln!(w)?;
        for k in 0..self.samples {
            write!(w, "{}", self.time(k))?;
            for c in 0..self.channels {
                write!(w, ",{}", self.value(k, c))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Reads a CSV signal written by [`Signal::write_csv`]. The grid must be
    /// uniform to a relative tolerance of 1e-9 on the step and start at t = 0.
    /// Imported samples are reconstructed piecewise linearly.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Signal> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Csv("empty file".into()))??;
        let fields: Vec<&str> = header.trim().split(',').collect();
        if fields.first() != Some(&"t") || fields.len() < 2 {
            return Err(Error::Csv(format!(
                "bad header `{header}`, expected `t,ch0,...`"
            )));
        }
        let channels = fields.len() - 1;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<&str> = line.trim().split(',').collect();
            if row.len() != channels + 1 {
                return Err(Error::Csv(format!(
                    "row {} has {} fields, expected {}",
                    i + 2,
                    row.len(),
                    channels + 1
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Csv(format!("bad number `{s}` in row {}", i + 2)))
            };
            times.push(parse(row[0])?);
            for field in &row[1..] {
                values.push(parse(field)?);
            }
        }
        if times.len() < 2 {
            return Err(Error::Csv("need at least two samples".into()));
        }
        if times[0].abs() > 1e-12 {
            return Err(Error::Csv(format!(
                "signals start at t = 0, got t0 = {}",
                times[0]
            )));
        }
        let step = times[1] - times[0];
        if step.is_nan() || step <= 0.0 {
            return Err(Error::Csv(format!(
                "non-increasing time column, step {step}"
            )));
        }
        for k in 1..times.len() {
            let local = times[k] - times[k - 1];
            if (local - step).abs() > 1e-9 * step {
                return Err(Error::Csv(format!(
                    "non-uniform grid at row {}: step {} vs {}",
                    k + 1,
                    local,
                    step
                )));
            }
        }
        Signal::new(step, channels, values, SignalKind::Pwl)
    }

    /// Convenience file-path wrappers around the CSV readers/writers.
    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Signal> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Signal({} ch, {} samples, step {}, {:?})",
            self.channels, self.samples, self.step, self.kind
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(samples: usize) -> Signal {
        Signal::constant(1e-3, samples, &[1.0], SignalKind::Pwl).unwrap()
    }

    #[test]
    fn truncate_constant_one() {
        let s = ones(2001); // [0, 2]
        let t = s.truncate(1.0);
        assert_eq!(t.value(999, 0), 1.0);
        assert_eq!(t.value(1000, 0), 0.0);
        assert_eq!(t.value(2000, 0), 0.0);
        assert_eq!(t.len(), s.len());
    }

    #[test]
    fn truncate_zero_horizon_clears_everything() {
        let s = ones(100);
        let t = s.truncate(0.0);
        assert!(t.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn truncate_is_idempotent() {
        let s =
            Signal::from_fn(0.01, 301, 2, SignalKind::Pwl, |t, c| (t + c as f64).sin()).unwrap();
        let once = s.truncate(1.5);
        let twice = once.truncate(1.5);
        assert_eq!(once.values(), twice.values());
    }

    #[test]
    fn truncate_past_end_is_identity() {
        let s = ones(100);
        let t = s.truncate(10.0);
        assert_eq!(t.values(), s.values());
    }

    #[test]
    fn inner_of_unit_constants() {
        let a = ones(2001);
        let b = ones(2001);
        assert!((a.inner(&b, 1.0).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(a.inner(&b, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn inner_sin_cos_orthogonal_over_period() {
        let f = std::f64::consts::TAU;
        let a = Signal::from_fn(1e-3, 1001, 1, SignalKind::Pwl, |t, _| (f * t).sin()).unwrap();
        let b = Signal::from_fn(1e-3, 1001, 1, SignalKind::Pwl, |t, _| (f * t).cos()).unwrap();
        assert!(a.inner(&b, 1.0).unwrap().abs() < 1e-5);
    }

    #[test]
    fn norm_examples() {
        let a = Signal::constant(1e-3, 4001, &[1.0], SignalKind::Pwl).unwrap();
        assert!((a.norm(4.0) - 2.0).abs() < 1e-9);
        let z = Signal::zeros(1e-3, 100, 1, SignalKind::Pwl).unwrap();
        assert_eq!(z.norm(0.05), 0.0);
        let f = std::f64::consts::TAU;
        let s = Signal::from_fn(1e-3, 1001, 1, SignalKind::Pwl, |t, _| (f * t).sin()).unwrap();
        assert!((s.norm(1.0) - 0.5f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn norm_monotone_in_horizon() {
        let s =
            Signal::from_fn(1e-2, 500, 1, SignalKind::Zoh, |t, _| (3.0 * t).sin() - 0.2).unwrap();
        let mut prev = 0.0;
        for i in 0..=50 {
            let n = s.norm(0.1 * i as f64);
            assert!(
                n + 1e-12 >= prev,
                "norm decreased at horizon {}",
                0.1 * i as f64
            );
            prev = n;
        }
    }

    #[test]
    fn misaligned_inner_is_an_error() {
        let a = ones(100);
        let b = Signal::constant(1e-3, 101, &[1.0], SignalKind::Pwl).unwrap();
        assert!(matches!(a.inner(&b, 0.05), Err(Error::Misaligned(_))));
        let c = Signal::constant(1e-3, 100, &[1.0, 2.0], SignalKind::Pwl).unwrap();
        assert!(matches!(a.inner(&c, 0.05), Err(Error::Misaligned(_))));
    }

    #[test]
    fn mixed_kind_difference_is_exact_per_cell() {
        let step = 0.1;
        let zoh = Signal::from_fn(step, 11, 1, SignalKind::Zoh, |t, _| t).unwrap();
        let pwl = Signal::from_fn(step, 11, 1, SignalKind::Pwl, |t, _| 2.0 * t).unwrap();
        let d = pwl.sub(&zoh).unwrap();
        assert_eq!(d.kind(), SignalKind::Cells);
        // On cell k the difference runs from 2 t_k - t_k = t_k to 2 t_{k+1} - t_k.
        let (s0, e0) = d.cell(3, 0);
        assert!((s0 - 0.3).abs() < 1e-12);
        assert!((e0 - (0.8 - 0.3)).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let s = Signal::from_fn(0.05, 41, 2, SignalKind::Pwl, |t, c| t * (c as f64 + 1.0)).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let r = Signal::read_csv(std::io::Cursor::new(buf)).unwrap();
        assert!(r.is_aligned(&s));
        for k in 0..s.len() {
            for c in 0..2 {
                assert!((r.value(k, c) - s.value(k, c)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_rejects_nonuniform_grid() {
        let text = "t,ch0\n0,1\n0.1,1\n0.25,1\n";
        let err = Signal::read_csv(std::io::Cursor::new(text));
        assert!(matches!(err, Err(Error::Csv(_))));
    }

    #[test]
    fn csv_rejects_nonzero_start() {
        let text = "t,ch0\n0.5,1\n0.6,1\n";
        assert!(matches!(
            Signal::read_csv(std::io::Cursor::new(text)),
            Err(Error::Csv(_))
        ));
    }
}
