//! Fixed-step RK4 integration of the master equations and extraction of
//! quasi-stationary rates.
//!
//! The state is stored as a vector over the matrix elements `(a, b)` that the
//! generator can reach from the initial state. Starting from a state diagonal
//! in the energy basis only energy-degenerate pairs are ever populated, which
//! keeps the vector small and makes the free Hamiltonian drop out of the
//! stiffness.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::time::Instant;

use log::{debug, info};
use num_complex::Complex64;
use sprs::{CsMat, TriMat};

use crate::error::{Error, Result};
use crate::hilbert::{DensityState, OperatorMatrix};
use crate::models::{self, EffectiveRates, EngineParams, LoadWindow, ModelBundle, ModelKind, Observable};

/// Entries of the generator below this magnitude are dropped.
const GENERATOR_PRUNE: f64 = 1e-14;

/// How `dt` is tied to the fastest rate of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepPolicy {
    /// `dt * max_rate <= 0.05`: every mode is resolved.
    Resolved,
    /// `dt * max_rate <= 2.5`: fast modes are only damped stably, slow modes stay exact to `O((dt lambda)^5)`.
    StiffStable,
}

impl StepPolicy {
    pub fn courant_limit(self) -> f64 {
        match self {
            StepPolicy::Resolved => 0.05,
            StepPolicy::StiffStable => 2.5,
        }
    }

    pub fn for_kind(kind: ModelKind) -> Self {
        match kind {
            ModelKind::ThreeQubitFull => StepPolicy::StiffStable,
            _ => StepPolicy::Resolved,
        }
    }
}

/// Knobs used to derive an [`IntegrationConfig`] from a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    /// `t_end = horizon / transient_rate`; `None` picks [`RunSettings::default_horizon`].
    pub horizon: Option<f64>,
    /// Fraction of the Courant limit actually used.
    pub courant_fraction: f64,
    /// Approximate number of recorded samples.
    pub samples: usize,
    pub check_positivity: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings { horizon: None, courant_fraction: 1.0, samples: 400, check_positivity: false }
    }
}

impl RunSettings {
    /// 30 transient times for the two-qubit models; 20 for the three-qubit ones,
    /// whose load drifts about `0.4 E_v` per transient time at strong coupling.
    pub fn default_horizon(kind: ModelKind) -> f64 {
        match kind {
            ModelKind::TwoQubitReset | ModelKind::TwoQubitLocal => 30.0,
            ModelKind::ThreeQubitEffective | ModelKind::ThreeQubitFull => 20.0,
        }
    }

    pub fn horizon_for(&self, kind: ModelKind) -> f64 {
        self.horizon.unwrap_or_else(|| Self::default_horizon(kind))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Steps between recorded samples.
    pub sample_stride: usize,
    /// Leading fraction of the horizon discarded before fitting.
    pub transient_cut: f64,
    pub policy: StepPolicy,
    pub trace_tolerance: f64,
    pub leak_tolerance: f64,
    /// Number of rungs at each end of the window counted as boundary.
    pub edge_rungs: usize,
    pub min_r2: f64,
    /// Smallest eigenvalue check at start and end (dense, expensive).
    pub check_positivity: bool,
}

impl IntegrationConfig {
    pub fn for_bundle(bundle: &ModelBundle, settings: &RunSettings) -> Self {
        let policy = StepPolicy::for_kind(bundle.kind);
        let dt_max = policy.courant_limit() * settings.courant_fraction / bundle.max_rate();
        let t_end = settings.horizon_for(bundle.kind) / bundle.transient_rate();
        let steps = (t_end / dt_max).ceil().max(1.0) as usize;
        let stride = (steps / settings.samples.max(1)).max(1);
        // round the step count up to a multiple of the stride so the last step is a sample
        let steps = steps.div_ceil(stride) * stride;
        IntegrationConfig {
            dt: t_end / steps as f64,
            t_end,
            sample_stride: stride,
            transient_cut: 0.5,
            policy,
            trace_tolerance: 1e-9,
            leak_tolerance: 1e-8,
            edge_rungs: 5,
            min_r2: 0.999,
            check_positivity: settings.check_positivity,
        }
    }

    /// Same sample times, half the step.
    pub fn halved(&self) -> Self {
        IntegrationConfig { dt: self.dt / 2.0, sample_stride: self.sample_stride * 2, ..*self }
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self, bundle: &ModelBundle) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) || !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("dt = {} and t_end = {} must be positive", self.dt, self.t_end));
        }
        if self.sample_stride == 0 {
            return bad("sample_stride must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.transient_cut) {
            return bad(format!("transient_cut = {} must lie in [0, 1)", self.transient_cut));
        }
        let courant = self.dt * bundle.max_rate();
        if courant > self.policy.courant_limit() * (1.0 + 1e-9) {
            return bad(format!(
                "dt * max_rate = {courant:.4} exceeds {} for {:?} stepping",
                self.policy.courant_limit(),
                self.policy
            ));
        }
        let horizon = self.t_end * bundle.transient_rate();
        if horizon < 20.0 * (1.0 - 1e-9) {
            return bad(format!("t_end covers only {horizon:.2} transient decay times (need 20)"));
        }
        if 2 * self.edge_rungs >= bundle.window.rungs() as usize {
            return bad("edge rungs cover the whole load window".into());
        }
        Ok(())
    }
}

/// Generator restricted to the reachable matrix elements.
#[derive(Debug, Clone)]
pub struct Superoperator {
    dim: usize,
    pairs: Vec<(u32, u32)>,
    index: HashMap<u64, usize>,
    matrix: CsMat<Complex64>,
}

fn column_lists(op: &OperatorMatrix) -> Vec<Vec<(usize, Complex64)>> {
    let mut cols = vec![Vec::new(); op.dim()];
    for (r, c, v) in op.entries() {
        cols[c].push((r, v));
    }
    cols
}

impl Superoperator {
    /// Closure of the nonzero elements of `seed` under the generator of `bundle`.
    pub fn build(bundle: &ModelBundle, seed: &DensityState) -> Self {
        let dim = bundle.layout.dim();
        let mut heff = bundle.hamiltonian.clone();
        let mut jumps = Vec::new();
        for ch in &bundle.channels {
            if ch.rate == 0.0 {
                continue;
            }
            let l = &ch.operator;
            let decay = &(&l.adjoint() * l) * (ch.rate / 2.0);
            heff = &heff - &decay.scale(Complex64::new(0.0, 1.0));
            jumps.push((ch.rate, column_lists(l)));
        }
        let h_cols = column_lists(&heff);
        let key = |a: usize, b: usize| (a * dim + b) as u64;

        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let mut index: HashMap<u64, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        for (_, (a, b)) in seed.matrix().iter() {
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(key(a, b)) {
                e.insert(pairs.len());
                pairs.push((a as u32, b as u32));
                queue.push_back(pairs.len() - 1);
            }
        }

        let i = Complex64::new(0.0, 1.0);
        let mut tri: Vec<(usize, usize, Complex64)> = Vec::new();
        let mut image: HashMap<(usize, usize), Complex64> = HashMap::new();
        while let Some(src) = queue.pop_front() {
            let (c, d) = (pairs[src].0 as usize, pairs[src].1 as usize);
            image.clear();
            for &(a, h) in &h_cols[c] {
                *image.entry((a, d)).or_default() += -i * h;
            }
            for &(b, h) in &h_cols[d] {
                *image.entry((c, b)).or_default() += i * h.conj();
            }
            for (rate, cols) in &jumps {
                for &(a, la) in &cols[c] {
                    for &(b, lb) in &cols[d] {
                        *image.entry((a, b)).or_default() += la * lb.conj() * *rate;
                    }
                }
            }
            let mut targets: Vec<_> = image.iter().filter(|(_, v)| v.norm() > GENERATOR_PRUNE).collect();
            targets.sort_unstable_by_key(|(k, _)| **k);
            for (&(a, b), &v) in targets {
                let next = pairs.len();
                let tgt = *index.entry(key(a, b)).or_insert(next);
                if tgt == next {
                    pairs.push((a as u32, b as u32));
                    queue.push_back(tgt);
                }
                tri.push((tgt, src, v));
            }
        }
        let n = pairs.len();
        let mut m = TriMat::with_capacity((n, n), tri.len());
        for (r, c, v) in tri {
            m.add_triplet(r, c, v);
        }
        let matrix = m.to_csr();
        debug!("generator: {} pairs, {} nonzeros (dimension {})", n, matrix.nnz(), dim);
        Superoperator { dim, pairs, index, matrix }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn position(&self, a: usize, b: usize) -> Option<usize> {
        self.index.get(&((a * self.dim + b) as u64)).copied()
    }

    /// `y = L x`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let indptr = self.matrix.indptr();
        let indptr = indptr.raw_storage();
        let indices = self.matrix.indices();
        let data = self.matrix.data();
        for (row, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::default();
            for k in indptr[row]..indptr[row + 1] {
                acc += data[k] * x[indices[k]];
            }
            *out = acc;
        }
    }

    pub fn vectorise(&self, state: &DensityState) -> Vec<Complex64> {
        let mut x = vec![Complex64::default(); self.len()];
        for (v, (a, b)) in state.matrix().iter() {
            if let Some(k) = self.position(a, b) {
                x[k] = *v;
            }
        }
        x
    }

    pub fn to_state(&self, like: &DensityState, x: &[Complex64]) -> DensityState {
        let mut tri = TriMat::new((self.dim, self.dim));
        for (k, &(a, b)) in self.pairs.iter().enumerate() {
            if x[k] != Complex64::default() {
                tri.add_triplet(a as usize, b as usize, x[k]);
            }
        }
        DensityState::from_parts(like.layout_arc().clone(), tri.to_csr())
    }

    /// `Tr(rho O)` as a sparse dot product over stored pairs.
    pub fn dual(&self, op: &OperatorMatrix) -> Dual {
        let mut terms: Vec<(usize, Complex64)> =
            op.entries().filter_map(|(b, a, v)| self.position(a, b).map(|k| (k, v))).collect();
        terms.sort_unstable_by_key(|t| t.0);
        Dual { terms }
    }

    fn diagonal_where(&self, keep: impl Fn(usize) -> bool) -> Vec<usize> {
        self.pairs
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| a == b && keep(a as usize))
            .map(|(k, _)| k)
            .collect()
    }
}

/// Linear functional `x -> Re sum_k w_k x_k`.
#[derive(Debug, Clone)]
pub struct Dual {
    terms: Vec<(usize, Complex64)>,
}

impl Dual {
    pub fn eval(&self, x: &[Complex64]) -> f64 {
        self.terms.iter().map(|&(k, w)| (w * x[k]).re).sum()
    }
}

/// Time-stamped expectation values of one run.
#[derive(Debug, Clone)]
pub struct ObservableSeries {
    pub kind: ModelKind,
    pub params: EngineParams,
    pub config: IntegrationConfig,
    pub times: Vec<f64>,
    pub values: BTreeMap<Observable, Vec<f64>>,
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
    pub boundary_leak: Vec<f64>,
    pub trace_drift: Vec<f64>,
    pub final_state: DensityState,
    pub pair_count: usize,
    pub wall_seconds: f64,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn get(&self, which: Observable) -> Option<&[f64]> {
        self.values.get(&which).map(Vec::as_slice)
    }

    pub fn max_trace_drift(&self) -> f64 {
        self.trace_drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_boundary_leak(&self) -> f64 {
        self.boundary_leak.iter().copied().fold(0.0, f64::max)
    }
}

fn axpy_into(out: &mut [Complex64], x: &[Complex64], h: f64, k: &[Complex64]) {
    for ((o, a), b) in out.iter_mut().zip(x).zip(k) {
        *o = a + b * h;
    }
}

pub fn integrate(bundle: &ModelBundle, initial: &DensityState, cfg: &IntegrationConfig) -> Result<ObservableSeries> {
    cfg.validate(bundle)?;
    if initial.layout() != bundle.layout.as_ref() {
        return Err(Error::LayoutMismatch);
    }
    if cfg.check_positivity {
        initial.check_positive()?;
    }
    let started = Instant::now();
    let gen = Superoperator::build(bundle, initial);
    let observables: Vec<(Observable, Dual)> =
        bundle.observables.iter().map(|(k, op)| (*k, gen.dual(op))).collect();
    let heat = [gen.dual(&bundle.heat_operators[0]), gen.dual(&bundle.heat_operators[1])];
    let trace_idx = gen.diagonal_where(|_| true);
    let rungs = bundle.window.rungs() as usize;
    let ladder = bundle.ladder_factor();
    let edge = cfg.edge_rungs;
    let edge_idx = gen.diagonal_where(|a| {
        let d = bundle.layout.digit(a, ladder);
        d < edge || d >= rungs - edge
    });

    let n = gen.len();
    let mut x = gen.vectorise(initial);
    let tr0: f64 = trace_idx.iter().map(|&k| x[k].re).sum();
    let (mut k1, mut k2, mut k3, mut k4) =
        (vec![Complex64::default(); n], vec![Complex64::default(); n], vec![Complex64::default(); n], vec![
            Complex64::default();
            n
        ]);
    let mut tmp = vec![Complex64::default(); n];

    let steps = cfg.steps();
    let cap = steps / cfg.sample_stride + 2;
    let mut times = Vec::with_capacity(cap);
    let mut values: BTreeMap<Observable, Vec<f64>> =
        observables.iter().map(|(k, _)| (*k, Vec::with_capacity(cap))).collect();
    let mut q1 = Vec::with_capacity(cap);
    let mut q2 = Vec::with_capacity(cap);
    let mut leak = Vec::with_capacity(cap);
    let mut drift = Vec::with_capacity(cap);

    let mut record = |step: usize, x: &[Complex64]| -> Result<()> {
        let t = step as f64 * cfg.dt;
        let tr: f64 = trace_idx.iter().map(|&k| x[k].re).sum();
        if !tr.is_finite() {
            return Err(Error::NonFinite(t));
        }
        let dr = (tr - tr0).abs();
        if dr > cfg.trace_tolerance {
            return Err(Error::TraceDrift { drift: dr, time: t });
        }
        let lk: f64 = edge_idx.iter().map(|&k| x[k].re).sum();
        if lk > cfg.leak_tolerance {
            return Err(Error::BoundaryLeak { leak: lk, time: t });
        }
        times.push(t);
        for (k, dual) in &observables {
            let v = dual.eval(x);
            if !v.is_finite() {
                return Err(Error::NonFinite(t));
            }
            values.get_mut(k).expect("observable registered").push(v);
        }
        q1.push(heat[0].eval(x));
        q2.push(heat[1].eval(x));
        leak.push(lk);
        drift.push(dr);
        Ok(())
    };

    record(0, &x)?;
    let h = cfg.dt;
    for step in 1..=steps {
        gen.apply(&x, &mut k1);
        axpy_into(&mut tmp, &x, h / 2.0, &k1);
        gen.apply(&tmp, &mut k2);
        axpy_into(&mut tmp, &x, h / 2.0, &k2);
        gen.apply(&tmp, &mut k3);
        axpy_into(&mut tmp, &x, h, &k3);
        gen.apply(&tmp, &mut k4);
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        if step % cfg.sample_stride == 0 || step == steps {
            record(step, &x)?;
        }
    }

    let final_state = gen.to_state(initial, &x);
    if cfg.check_positivity {
        final_state.check_positive()?;
    }
    let wall = started.elapsed().as_secs_f64();
    info!(
        "{}: {} steps of dt = {:.3e} over {} pairs in {:.2} s",
        bundle.kind,
        steps,
        cfg.dt,
        n,
        wall
    );
    Ok(ObservableSeries {
        kind: bundle.kind,
        params: bundle.params,
        config: *cfg,
        times,
        values,
        q1,
        q2,
        boundary_leak: leak,
        trace_drift: drift,
        final_state,
        pair_count: n,
        wall_seconds: wall,
    })
}

/// Least-squares line through `(x, y)`: slope, intercept and `r^2`.
///
/// A series with no spread around its mean (e.g. the load at zero bias) is a perfect fit.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let scale: f64 = y.iter().map(|b| b * b).sum::<f64>().max(1.0);
    let r2 = if ss_tot <= 1e-24 * scale { 1.0 } else { 1.0 - ss_res / ss_tot };
    (slope, intercept, r2)
}

/// Quasi-stationary rates extracted from one run.
#[derive(Debug, Clone, PartialEq)]
pub struct NessReport {
    pub kind: ModelKind,
    pub w_dot: f64,
    pub delta_w_dot: f64,
    pub sigma_dot: f64,
    pub q1_dot: f64,
    pub q2_dot: f64,
    /// `W_dot / Q2_dot`; NaN when no heat flows.
    pub eta: f64,
    pub tur_ratio: f64,
    pub fit_r2_mean: f64,
    pub fit_r2_var: f64,
    pub mean_current: f64,
    pub mean_bias: f64,
    /// Only defined for the two-qubit models.
    pub mean_occupation: Option<f64>,
    pub mean_interaction: f64,
    pub max_trace_drift: f64,
    pub max_boundary_leak: f64,
    pub samples_fitted: usize,
    pub wall_seconds: f64,
}

impl NessReport {
    pub fn first_law_defect(&self) -> f64 {
        (self.w_dot - self.q1_dot - self.q2_dot).abs()
    }
}

fn window_mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn extract_ness(series: &ObservableSeries, cfg: &IntegrationConfig) -> Result<NessReport> {
    let t_last = *series.times.last().ok_or_else(|| Error::SeriesTooShort("empty series".into()))?;
    let start = series.times.partition_point(|&t| t < cfg.transient_cut * t_last);
    let m = series.times.len() - start;
    if m < 10 {
        return Err(Error::SeriesTooShort(format!("{m} samples after the transient cut")));
    }
    let need = |o: Observable| {
        series
            .get(o)
            .map(|v| &v[start..])
            .ok_or_else(|| Error::SeriesTooShort(format!("observable {o:?} was not recorded")))
    };
    let t = &series.times[start..];
    let w = need(Observable::Work)?;
    let w2 = need(Observable::WorkSquared)?;
    let var: Vec<f64> = w.iter().zip(w2).map(|(a, b)| b - a * a).collect();
    let (w_dot, _, r2_mean) = linear_fit(t, w);
    let (delta_w_dot, _, r2_var) = linear_fit(t, &var);
    let q1_dot = window_mean(&series.q1[start..]);
    let q2_dot = window_mean(&series.q2[start..]);
    let p = &series.params;
    let sigma_dot = -p.beta1 * q1_dot - p.beta2 * q2_dot;
    let report = NessReport {
        kind: series.kind,
        w_dot,
        delta_w_dot,
        sigma_dot,
        q1_dot,
        q2_dot,
        eta: if q2_dot.abs() > 1e-300 { w_dot / q2_dot } else { f64::NAN },
        tur_ratio: delta_w_dot * sigma_dot / (w_dot * w_dot),
        fit_r2_mean: r2_mean,
        fit_r2_var: r2_var,
        mean_current: window_mean(need(Observable::Current)?),
        mean_bias: window_mean(need(Observable::Bias)?),
        mean_occupation: series.get(Observable::Occupation).map(|v| window_mean(&v[start..])),
        mean_interaction: window_mean(need(Observable::InteractionEnergy)?),
        max_trace_drift: series.max_trace_drift(),
        max_boundary_leak: series.max_boundary_leak(),
        samples_fitted: m,
        wall_seconds: series.wall_seconds,
    };
    if r2_mean < cfg.min_r2 || r2_var < cfg.min_r2 {
        return Err(Error::FitRejected(Box::new(report)));
    }
    Ok(report)
}

/// Build, integrate from the default initial state, and fit.
pub fn simulate(bundle: &ModelBundle, settings: &RunSettings) -> Result<NessReport> {
    let cfg = IntegrationConfig::for_bundle(bundle, settings);
    let series = integrate(bundle, &bundle.default_initial_state()?, &cfg)?;
    extract_ness(&series, &cfg)
}

/// Relative deviation `|a - b| / max(|b|, 1e-12)`.
pub fn relative_deviation(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(1e-12)
}

/// Full three-qubit model against its adiabatically eliminated counterpart.
#[derive(Debug, Clone)]
pub struct EffectiveComparison {
    pub rates: EffectiveRates,
    pub full: NessReport,
    pub effective: NessReport,
    pub dev_w_dot: f64,
    pub dev_delta_w_dot: f64,
    pub dev_sigma_dot: f64,
}

pub fn validate_effective_3qe(
    full_params: &EngineParams,
    window: LoadWindow,
    settings: &RunSettings,
) -> Result<EffectiveComparison> {
    let fastest = full_params.k.max(full_params.g);
    if full_params.p_prime < 20.0 * fastest {
        return Err(Error::InvalidParameter(format!(
            "p' = {} must be at least 20 max(k, g) = {}",
            full_params.p_prime,
            20.0 * fastest
        )));
    }
    let rates = models::effective_rates_from_full(full_params)?;
    let full_bundle = models::build_3qe_full(full_params, window)?;
    let reduced = EngineParams { p: rates.p_effective, ..*full_params };
    let eff_bundle = models::build_3qe_effective(&reduced, window)?;
    let full = simulate(&full_bundle, settings)?;
    let effective = simulate(&eff_bundle, settings)?;
    Ok(EffectiveComparison {
        rates,
        dev_w_dot: relative_deviation(full.w_dot, effective.w_dot),
        dev_delta_w_dot: relative_deviation(full.delta_w_dot, effective.delta_w_dot),
        dev_sigma_dot: relative_deviation(full.sigma_dot, effective.sigma_dot),
        full,
        effective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::models::{build_2qe_local, build_2qe_reset, build_3qe_effective};

    fn small() -> LoadWindow {
        LoadWindow::new(-20, 20)
    }

    #[test]
    fn linear_fit_recovers_line() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|t| 3.0 * t - 1.0).collect();
        let (s, c, r2) = linear_fit(&x, &y);
        assert!((s - 3.0).abs() < 1e-12 && (c + 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
        let flat = vec![0.25; 50];
        assert_eq!(linear_fit(&x, &flat).2, 1.0);
        let noisy: Vec<f64> = x.iter().enumerate().map(|(i, _)| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(linear_fit(&x, &noisy).2 < 0.1);
    }

    #[test]
    fn generator_preserves_trace_and_matches_dense_lindbladian() {
        // oracle: dense L acting on a random Hermitian matrix element by element
        let p = EngineParams { g: 0.7, ..Default::default() };
        let b = build_2qe_reset(&p, LoadWindow::new(-2, 2)).unwrap();
        let rho = b.default_initial_state().unwrap();
        let gen = Superoperator::build(&b, &rho);
        let x: Vec<Complex64> = (0..gen.len())
            .map(|k| {
                let (a, bb) = gen.pairs()[k];
                Complex64::new(((a * 7 + bb * 3) % 11) as f64 / 10.0, if a == bb { 0.0 } else { 0.1 })
            })
            .collect();
        let mut y = vec![Complex64::default(); gen.len()];
        gen.apply(&x, &mut y);

        let dim = b.layout.dim();
        let mut r = nalgebra::DMatrix::<Complex64>::zeros(dim, dim);
        for (k, &(a, bb)) in gen.pairs().iter().enumerate() {
            r[(a as usize, bb as usize)] = x[k];
        }
        let h = b.hamiltonian.to_dense();
        let i = Complex64::new(0.0, 1.0);
        let mut dense = (&h * &r - &r * &h) * (-i);
        for ch in &b.channels {
            let l = ch.operator.to_dense();
            let ld = l.adjoint();
            let ll = &ld * &l;
            dense += (&l * &r * &ld - (&ll * &r + &r * &ll) * Complex64::new(0.5, 0.0)) * Complex64::new(ch.rate, 0.0);
        }
        let mut covered = 0.0;
        for (k, &(a, bb)) in gen.pairs().iter().enumerate() {
            assert!((y[k] - dense[(a as usize, bb as usize)]).norm() < 1e-12);
            covered += dense[(a as usize, bb as usize)].norm();
        }
        let total: f64 = dense.iter().map(|v| v.norm()).sum();
        assert!((total - covered).abs() < 1e-12, "generator leaves the tracked pairs");
        let dtrace: Complex64 = (0..dim).map(|a| dense[(a, a)]).sum();
        assert!(dtrace.norm() < 1e-13);
    }

    #[test]
    fn config_is_validated() {
        let b = build_2qe_reset(&EngineParams::default(), small()).unwrap();
        let cfg = IntegrationConfig::for_bundle(&b, &RunSettings::default());
        cfg.validate(&b).unwrap();
        assert!(cfg.dt * b.max_rate() <= 0.05 + 1e-12);
        let coarse = IntegrationConfig { dt: cfg.dt * 2.0, ..cfg };
        assert!(matches!(coarse.validate(&b), Err(Error::InvalidConfig(_))));
        let short = IntegrationConfig { t_end: 5.0, ..cfg };
        assert!(short.validate(&b).is_err());
        let half = cfg.halved();
        assert_eq!(half.steps(), 2 * cfg.steps());
    }

    #[test]
    fn decoupled_load_stays_put() {
        let p = EngineParams { g: 0.0, ..Default::default() };
        let b = build_2qe_reset(&p, small()).unwrap();
        let cfg = IntegrationConfig::for_bundle(&b, &RunSettings::default());
        let s = integrate(&b, &b.default_initial_state().unwrap(), &cfg).unwrap();
        let w = s.get(Observable::Work).unwrap();
        assert!(w.iter().all(|v| v.abs() < 1e-15));
        let z = s.get(Observable::Bias).unwrap();
        assert!((z.last().unwrap() - 0.2215155).abs() < 1e-6);
        // thermal qubits times one rung: only the four populations are ever reached
        assert_eq!(s.pair_count, 4);
    }

    #[test]
    fn reset_model_reference_rates() {
        let p = EngineParams::default();
        let b = build_2qe_reset(&p, small()).unwrap();
        let r = simulate(&b, &RunSettings::default()).unwrap();
        let exact = analytic::ness_2qe_reset(&p).unwrap();
        assert!(relative_deviation(r.w_dot, exact.w_dot) < 1e-4, "{r:?}");
        assert!(relative_deviation(r.delta_w_dot, exact.delta_w_dot) < 1e-4);
        assert!(relative_deviation(r.tur_ratio, exact.tur_ratio) < 1e-4);
        assert!(r.mean_interaction.abs() < 1e-6);
        assert!(r.first_law_defect() <= 1e-3 * r.w_dot);
        assert!((r.q1_dot / r.w_dot + 1.0).abs() < 1e-4);
        assert!((r.q2_dot / r.w_dot - 2.0).abs() < 1e-4);
        assert!(r.max_trace_drift <= 1e-9);
    }

    #[test]
    fn heat_operator_matches_population_formula() {
        // Q_j = (p E_j / 2)(<sz_j>_eq - <sz_j>) - p <H_int>
        let p = EngineParams { g: 0.6, ..Default::default() };
        let b = build_2qe_reset(&p, small()).unwrap();
        let cfg = IntegrationConfig::for_bundle(&b, &RunSettings { horizon: Some(21.0), ..Default::default() });
        let s = integrate(&b, &b.default_initial_state().unwrap(), &cfg).unwrap();
        let rho = &s.final_state;
        let hint = rho.expectation_real(&b.interaction).unwrap();
        for (j, (e, x)) in [(p.e1, p.beta1 * p.e1), (p.e2, p.beta2 * p.e2)].into_iter().enumerate() {
            let sz = crate::hilbert::embed(&crate::hilbert::pauli::sigma_z(), j, &b.layout).unwrap();
            let z = rho.expectation_real(&sz).unwrap();
            let formula = p.p * e / 2.0 * (-(x / 2.0).tanh() - z) - p.p * hint;
            let direct = rho.expectation_real(&b.heat_operators[j]).unwrap();
            assert!((formula - direct).abs() < 1e-12, "bath {j}");
        }
    }

    #[test]
    fn local_and_effective_models_run() {
        let p = EngineParams { g: 0.4, ..Default::default() };
        let wide = LoadWindow::new(-30, 30);
        let local = simulate(&build_2qe_local(&p, wide).unwrap(), &RunSettings::default()).unwrap();
        let exact = analytic::ness_2qe_local(&p).unwrap();
        assert!(relative_deviation(local.tur_ratio, exact.tur_ratio) < 1e-3);
        let eff = simulate(&build_3qe_effective(&p, wide).unwrap(), &RunSettings::default()).unwrap();
        let exact = analytic::ness_3qe(&p).unwrap();
        assert!(relative_deviation(eff.w_dot, exact.w_dot) < 1e-3);
        assert!(relative_deviation(eff.tur_ratio, exact.tur_ratio) < 1e-3);
    }

    #[test]
    fn zero_bias_gives_zero_power_but_fluctuations() {
        let p = EngineParams { beta1: 1.0, ..Default::default() };
        let r = simulate(&build_2qe_reset(&p, small()).unwrap(), &RunSettings::default()).unwrap();
        assert!(r.w_dot.abs() < 1e-12);
        assert!(r.sigma_dot.abs() < 1e-12);
        assert!(r.delta_w_dot > 0.01);
    }

    #[test]
    fn narrow_window_aborts_on_leak() {
        let p = EngineParams { g: 1.0, ..Default::default() };
        let b = build_2qe_reset(&p, LoadWindow::new(-6, 6)).unwrap();
        let cfg = IntegrationConfig::for_bundle(&b, &RunSettings::default());
        assert!(matches!(
            integrate(&b, &b.default_initial_state().unwrap(), &cfg),
            Err(Error::BoundaryLeak { .. })
        ));
    }

    #[test]
    fn effective_check_requires_separated_scales() {
        let p = EngineParams { g: 0.1, ..Default::default() }.with_three_qubit(0.1, 1.0).unwrap();
        assert!(validate_effective_3qe(&p, small(), &RunSettings::default()).is_err());
    }
}
