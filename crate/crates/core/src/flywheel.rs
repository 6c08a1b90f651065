//! Qubit Otto engine driving a harmonic-oscillator flywheel.
//!
//! Each cycle displaces the oscillator's coherent state by `+2d`, `-2d` or
//! not at all, so the flywheel performs a discrete-time random walk.

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::chi_coth_half;
use crate::error::{Error, Result};
use crate::hilbert::{build_space, fock_ops, pauli, DensityState, Factor};
use crate::parallel::{self, Execution};

/// Largest number of cycles accepted by [`quantum_map_check`].
pub const MAX_MAP_CYCLES: usize = 50;
/// Largest top-level Fock population tolerated by [`quantum_map_check`].
pub const FOCK_LEAK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlywheelParams {
    pub omega_z: f64,
    pub omega_0: f64,
    /// Dimensionless qubit-oscillator coupling.
    pub d: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub cycles: u64,
}

impl Default for FlywheelParams {
    /// Reference point: `chi = 2`, `p0 = 0.6`, `d = 0.1`, `omega_z = 20`, `omega_0 = 1`.
    fn default() -> Self {
        FlywheelParams::from_chi_p0(2.0, 0.6, 0.1, 1000).expect("reference point is valid")
    }
}

/// Excited-state population `e^{-x/2} / (2 cosh(x/2))` at `x = beta omega_z`.
fn excited(x: f64) -> f64 {
    1.0 / (1.0 + x.exp())
}

impl FlywheelParams {
    pub const DEFAULT_OMEGA_Z: f64 = 20.0;
    pub const DEFAULT_OMEGA_0: f64 = 1.0;

    pub fn new(omega_z: f64, omega_0: f64, d: f64, beta1: f64, beta2: f64, cycles: u64) -> Result<Self> {
        let p = FlywheelParams { omega_z, omega_0, d, beta1, beta2, cycles };
        p.validate()?;
        Ok(p)
    }

    /// Parameters realising a walk with bias `chi` and idle probability `p0`.
    ///
    /// Only `(chi, p0)` matter for the walk; `omega_z = 20`, `omega_0 = 1` fix the rest.
    /// The cold population solves `p1^2 - (1 - D) p1 + p_- = 0` with `D = p_+ - p_-`;
    /// the smaller root keeps both populations below one half (positive temperatures).
    /// Positive temperatures also force `p0 >= 1/2`.
    pub fn from_chi_p0(chi: f64, p0: f64, d: f64, cycles: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p0) || !chi.is_finite() || chi < 0.0 {
            return Err(Error::InvalidParameter(format!("need chi >= 0 and 0 <= p0 <= 1, got chi = {chi}, p0 = {p0}")));
        }
        let p_minus = (1.0 - p0) / (1.0 + chi.exp());
        let p_plus = (1.0 - p0) - p_minus;
        let diff = p_plus - p_minus;
        let disc = (1.0 - diff).powi(2) - 4.0 * p_minus;
        if disc < 0.0 {
            return Err(Error::InvalidParameter(format!("no thermal populations give chi = {chi}, p0 = {p0}")));
        }
        let p1 = ((1.0 - diff) - disc.sqrt()) / 2.0;
        let p2 = p1 + diff;
        if !(p2 <= 0.5 + 1e-15) {
            return Err(Error::InvalidParameter(format!(
                "chi = {chi}, p0 = {p0} needs a negative hot temperature"
            )));
        }
        let wz = Self::DEFAULT_OMEGA_Z;
        let x = |p: f64| if p <= 0.0 { f64::INFINITY } else { ((1.0 - p) / p).ln().max(0.0) };
        FlywheelParams::new(wz, Self::DEFAULT_OMEGA_0, d, x(p1) / wz, x(p2) / wz, cycles)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.omega_z, self.omega_0, self.d];
        if vals.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter("omega_z, omega_0 and d must be positive".into()));
        }
        if self.beta1.is_nan() || self.beta2.is_nan() || self.beta1 < 0.0 || self.beta2 < 0.0 {
            return Err(Error::InvalidParameter("inverse temperatures must be non-negative".into()));
        }
        if self.omega_z / self.omega_0 < 10.0 {
            warn!("omega_z / omega_0 = {} is not large", self.omega_z / self.omega_0);
        }
        if self.d > 0.2 {
            warn!("coupling d = {} is not weak", self.d);
        }
        if self.chi() < 0.0 {
            warn!("chi = {} < 0: the flywheel is braked", self.chi());
        }
        Ok(())
    }

    /// `(beta1 - beta2) omega_z`.
    pub fn chi(&self) -> f64 {
        (self.beta1 - self.beta2) * self.omega_z
    }

    /// Excited-state populations `(p1, p2)` after the cold and hot isochores.
    pub fn populations(&self) -> (f64, f64) {
        (excited(self.beta1 * self.omega_z), excited(self.beta2 * self.omega_z))
    }

    /// Cycle period `2 pi / omega_0`.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega_0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDistribution {
    pub p_plus: f64,
    pub p_minus: f64,
    pub p_zero: f64,
    /// Displacement per step, `2d`.
    pub step: f64,
}

impl StepDistribution {
    pub fn bias(&self) -> f64 {
        self.p_plus - self.p_minus
    }

    /// First four raw moments of one step.
    fn step_moments(&self) -> [f64; 4] {
        let (s, a, b) = (self.step, self.p_plus + self.p_minus, self.bias());
        [s * b, s * s * a, s.powi(3) * b, s.powi(4) * a]
    }

    /// Cumulants of one step.
    pub fn cumulants(&self) -> [f64; 4] {
        let [m1, m2, m3, m4] = self.step_moments();
        [
            m1,
            m2 - m1 * m1,
            m3 - 3.0 * m2 * m1 + 2.0 * m1.powi(3),
            m4 - 4.0 * m3 * m1 - 3.0 * m2 * m2 + 12.0 * m2 * m1 * m1 - 6.0 * m1.powi(4),
        ]
    }
}

pub fn step_distribution(params: &FlywheelParams) -> StepDistribution {
    let (p1, p2) = params.populations();
    let p_plus = p2 * (1.0 - p1);
    let p_minus = p1 * (1.0 - p2);
    StepDistribution { p_plus, p_minus, p_zero: 1.0 - p_plus - p_minus, step: 2.0 * params.d }
}

/// `G_1(s) = 1 + 2 sinh(ds) (p_+ e^{ds} - p_- e^{-ds})`.
pub fn generating_function(dist: &StepDistribution, s: f64) -> f64 {
    let x = dist.step / 2.0 * s;
    1.0 + 2.0 * x.sinh() * (dist.p_plus * x.exp() - dist.p_minus * (-x).exp())
}

/// `G_N(s) = G_1(s)^N`.
pub fn generating_function_n(dist: &StepDistribution, s: f64, n: u64) -> f64 {
    generating_function(dist, s).powf(n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkMoments {
    pub mean_alpha: f64,
    pub var_alpha: f64,
    pub e_alpha2: f64,
    pub e_alpha4: f64,
}

impl WalkMoments {
    /// `<n> = E[alpha^2]`.
    pub fn mean_n(&self) -> f64 {
        self.e_alpha2
    }

    /// `<n^2> = E[alpha^4] + E[alpha^2]` (normal ordering over coherent states).
    pub fn mean_n2(&self) -> f64 {
        self.e_alpha4 + self.e_alpha2
    }

    /// Variance of `n` for the coherent-state walk.
    pub fn var_n(&self) -> f64 {
        self.mean_n2() - self.e_alpha2 * self.e_alpha2
    }
}

/// Exact moments of `alpha_N` from `N`-fold cumulant addition.
pub fn moments(dist: &StepDistribution, n: u64) -> WalkMoments {
    let nf = n as f64;
    let [k1, k2, k3, k4] = dist.cumulants().map(|k| k * nf);
    WalkMoments {
        mean_alpha: k1,
        var_alpha: k2,
        e_alpha2: k2 + k1 * k1,
        e_alpha4: k4 + 4.0 * k3 * k1 + 3.0 * k2 * k2 + 6.0 * k2 * k1 * k1 + k1.powi(4),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleThermo {
    pub q1: f64,
    pub q2: f64,
    pub w_cyc: f64,
}

/// Heat and work of one cycle at displacement amplitude `<a + a^dagger>`.
pub fn cycle_thermodynamics(params: &FlywheelParams, displacement: f64) -> CycleThermo {
    let (p1, p2) = params.populations();
    let shift = params.omega_0 * params.d * displacement;
    CycleThermo {
        q1: (p1 - p2) * (params.omega_z - shift),
        q2: (p2 - p1) * (params.omega_z + shift),
        w_cyc: 2.0 * params.omega_0 * params.d * (p2 - p1) * displacement,
    }
}

/// Leading-order work, energy variance and entropy production after `params.cycles` cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotics {
    pub w_n: f64,
    pub delta_w_n: f64,
    pub sigma_n: f64,
}

pub fn asymptotic_work_fluct_entropy(params: &FlywheelParams) -> Asymptotics {
    let dist = step_distribution(params);
    let n = params.cycles as f64;
    let (b, a) = (dist.bias(), dist.p_plus + dist.p_minus);
    let (w0, d) = (params.omega_0, params.d);
    Asymptotics {
        w_n: 4.0 * w0 * d * d * b * b * n * n,
        delta_w_n: 64.0 * w0 * w0 * d.powi(4) * b * b * (a - b * b) * n.powi(3),
        sigma_n: (params.beta1 - params.beta2) * b * params.omega_z * n,
    }
}

/// `3 chi [coth(chi/2) - (p_+ - p_-)]` for the walk over coherent states.
pub fn tur_ratio_flywheel(params: &FlywheelParams) -> f64 {
    3.0 * tur_ratio_fock(params)
}

/// The same walk over Fock states: a third of the coherent-state value.
pub fn tur_ratio_fock(params: &FlywheelParams) -> f64 {
    let chi = params.chi();
    chi_coth_half(chi) - chi * step_distribution(params).bias()
}

/// Continuous-time biased random walk, `chi coth(chi/2)`.
pub fn tur_ratio_ct(chi: f64) -> f64 {
    chi_coth_half(chi)
}

/// Empirical moments at one checkpoint, with standard errors of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalMoments {
    pub cycles: u64,
    pub trials: u64,
    pub mean_alpha: f64,
    pub se_mean_alpha: f64,
    pub var_alpha: f64,
    pub se_var_alpha: f64,
    pub mean_n: f64,
    pub se_mean_n: f64,
    pub mean_n2: f64,
    pub se_mean_n2: f64,
}

impl EmpiricalMoments {
    /// z-scores of (mean alpha, var alpha, <n>, <n^2>) against exact moments.
    pub fn z_scores(&self, exact: &WalkMoments) -> [f64; 4] {
        let z = |v: f64, e: f64, se: f64| if se > 0.0 { (v - e) / se } else if v == e { 0.0 } else { f64::INFINITY };
        [
            z(self.mean_alpha, exact.mean_alpha, self.se_mean_alpha),
            z(self.var_alpha, exact.var_alpha, self.se_var_alpha),
            z(self.mean_n, exact.mean_n(), self.se_mean_n),
            z(self.mean_n2, exact.mean_n2(), self.se_mean_n2),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub seed: u64,
    pub trials: u64,
    pub checkpoints: Vec<EmpiricalMoments>,
    /// `E[alpha_n]` for `n = 0..=N`.
    pub mean_trajectory: Vec<f64>,
}

/// Exact integer power sums `sum_k k^j`, `j = 1..=8`, of step counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct PowerSums([i128; 8]);

impl PowerSums {
    fn add(&mut self, k: i64) {
        let k = k as i128;
        let mut p = 1i128;
        for s in self.0.iter_mut() {
            p *= k;
            *s += p;
        }
    }

    fn merge(&mut self, other: &PowerSums) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
    }

    /// Means of `(k - c)^j`, `j = 0..=8`, by exact binomial expansion about the integer `c`.
    fn central_about(&self, n: u64, c: i128) -> [f64; 9] {
        let mut raw = [0i128; 9];
        raw[0] = n as i128;
        raw[1..].copy_from_slice(&self.0);
        let mut out = [0f64; 9];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = 0i128;
            let mut binom = 1i128;
            for i in 0..=j {
                // C(j, i) (-c)^{j-i} S_i
                acc += binom * (-c).pow((j - i) as u32) * raw[i];
                binom = binom * (j - i) as i128 / (i + 1) as i128;
            }
            *o = acc as f64 / n as f64;
        }
        out
    }
}

fn summarise(sums: &PowerSums, trials: u64, cycles: u64, step: f64) -> EmpiricalMoments {
    let n = trials as f64;
    let c = (sums.0[0] as f64 / n).round() as i128;
    let m = sums.central_about(trials, c);
    let cf = c as f64;
    // moments of k about its sample mean
    let mu = m[1];
    let var_k = m[2] - mu * mu;
    let c4 = m[4] - 4.0 * m[3] * mu + 6.0 * m[2] * mu * mu - 3.0 * mu.powi(4);
    // raw moments of k from moments about c
    let raw = |j: usize| -> f64 {
        let mut acc = 0.0;
        let mut binom = 1.0;
        for i in 0..=j {
            acc += binom * cf.powi((j - i) as i32) * m[i];
            binom = binom * (j - i) as f64 / (i + 1) as f64;
        }
        acc
    };
    let (k2, k4, k6, k8) = (raw(2), raw(4), raw(6), raw(8));
    let s2 = step * step;
    let s4 = s2 * s2;
    let denom = (n - 1.0).max(1.0);
    let var_of = |second: f64, first: f64| ((second - first * first) * n / denom).max(0.0);
    let n2 = s4 * k4 + s2 * k2;
    // (a^4 + a^2)^2 = a^8 + 2 a^6 + a^4
    let n2_sq = s4 * s4 * k8 + 2.0 * s4 * s2 * k6 + s4 * k4;
    EmpiricalMoments {
        cycles,
        trials,
        mean_alpha: step * (cf + mu),
        se_mean_alpha: step * (var_of(m[2], mu) / n).sqrt(),
        var_alpha: s2 * var_k * n / denom,
        se_var_alpha: s2 * ((c4 - var_k * var_k).max(0.0) / n).sqrt(),
        mean_n: s2 * k2,
        se_mean_n: (var_of(s4 * k4, s2 * k2) / n).sqrt(),
        mean_n2: n2,
        se_mean_n2: (var_of(n2_sq, n2) / n).sqrt(),
    }
}

struct Block {
    sums: Vec<PowerSums>,
    trajectory: Vec<i64>,
}

fn run_block(dist: &StepDistribution, seed: u64, trials: std::ops::Range<u64>, checkpoints: &[u64], cycles: u64) -> Block {
    let mut sums = vec![PowerSums::default(); checkpoints.len()];
    let mut trajectory = vec![0i64; cycles as usize + 1];
    let up = dist.p_plus;
    let move_ = dist.p_plus + dist.p_minus;
    for trial in trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let mut k = 0i64;
        let mut next = 0;
        for cycle in 1..=cycles {
            let u: f64 = rng.random();
            if u < up {
                k += 1;
            } else if u < move_ {
                k -= 1;
            }
            trajectory[cycle as usize] += k;
            while next < checkpoints.len() && checkpoints[next] == cycle {
                sums[next].add(k);
                next += 1;
            }
        }
        while next < checkpoints.len() {
            // checkpoint 0
            sums[next].add(0);
            next += 1;
        }
    }
    Block { sums, trajectory }
}

/// Sample `trials` independent walks of `params.cycles` steps.
///
/// Trial `i` uses ChaCha8 stream `i` of `seed`, and all accumulation is in
/// exact integers, so the report is bitwise identical for any execution mode.
pub fn monte_carlo_walk(
    params: &FlywheelParams,
    trials: u64,
    seed: u64,
    checkpoints: &[u64],
    exec: Execution,
) -> Result<MonteCarloReport> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    params.validate()?;
    let mut cps: Vec<u64> = checkpoints.to_vec();
    if cps.is_empty() {
        cps.push(params.cycles);
    }
    cps.sort_unstable();
    cps.dedup();
    if let Some(&last) = cps.last() {
        if last > params.cycles {
            return Err(Error::InvalidParameter(format!("checkpoint {last} beyond {} cycles", params.cycles)));
        }
    }
    // checkpoint 0 is handled at the end of each trial, keep it last in the scan order
    let zero_first = cps.first() == Some(&0);
    if zero_first {
        cps.remove(0);
        cps.push(0);
    }
    let dist = step_distribution(params);
    const BLOCK: u64 = 1024;
    let n_blocks = trials.div_ceil(BLOCK) as usize;
    let blocks = parallel::map_range(n_blocks, exec, |b| {
        let lo = b as u64 * BLOCK;
        let hi = (lo + BLOCK).min(trials);
        run_block(&dist, seed, lo..hi, &cps, params.cycles)
    });
    let mut sums = vec![PowerSums::default(); cps.len()];
    let mut traj = vec![0i64; params.cycles as usize + 1];
    for block in &blocks {
        for (a, b) in sums.iter_mut().zip(&block.sums) {
            a.merge(b);
        }
        for (a, b) in traj.iter_mut().zip(&block.trajectory) {
            *a += b;
        }
    }
    let mut checkpoints: Vec<EmpiricalMoments> =
        cps.iter().zip(&sums).map(|(&c, s)| summarise(s, trials, c, dist.step)).collect();
    checkpoints.sort_by_key(|m| m.cycles);
    Ok(MonteCarloReport {
        seed,
        trials,
        checkpoints,
        mean_trajectory: traj.iter().map(|&s| dist.step * s as f64 / trials as f64).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumMapReport {
    pub cycles: usize,
    pub fock_n_max: usize,
    pub mean_n: f64,
    pub mean_n2: f64,
    pub walk_mean_n: f64,
    pub walk_mean_n2: f64,
    pub rel_dev_n: f64,
    pub rel_dev_n2: f64,
    /// Largest population of the top Fock level seen during the run.
    pub max_top_population: f64,
}

/// Fock cutoff comfortably above the walk's reach after `cycles` steps.
pub fn suggested_fock_cutoff(d: f64, cycles: usize) -> usize {
    let reach = 2.0 * d * cycles as f64;
    (reach * reach + 12.0 * reach + 40.0).ceil() as usize
}

/// Iterate `rho -> U K1 U K2 rho` on qubit x truncated Fock space from the oscillator ground state.
pub fn quantum_map_check(params: &FlywheelParams, cycles: usize, fock_n_max: usize) -> Result<QuantumMapReport> {
    params.validate()?;
    if cycles > MAX_MAP_CYCLES {
        return Err(Error::InvalidParameter(format!("at most {MAX_MAP_CYCLES} cycles, got {cycles}")));
    }
    let layout = std::sync::Arc::new(build_space(&[
        Factor::Qubit,
        Factor::FockOscillator { n_max: fock_n_max, frequency: params.omega_0 },
    ])?);
    let (_, n_op) = fock_ops(&layout, 1)?;
    let m = fock_n_max + 1;

    // local oscillator operators
    let mut gen = DMatrix::<f64>::zeros(m, m);
    for n in 0..m - 1 {
        let s = ((n + 1) as f64).sqrt();
        gen[(n + 1, n)] += s; // a^dagger
        gen[(n, n + 1)] -= s; // -a
    }
    let disp_plus = (&gen * params.d).exp();
    let disp_minus = disp_plus.transpose();
    let parity = DMatrix::<f64>::from_fn(m, m, |r, c| if r == c { if r % 2 == 0 { 1.0 } else { -1.0 } } else { 0.0 });
    let branch_plus = &parity * &disp_plus;
    let branch_minus = &parity * &disp_minus;
    let mut u = DMatrix::<Complex64>::zeros(2 * m, 2 * m);
    for r in 0..m {
        for c in 0..m {
            // qubit index 0 is the excited state (Pi_+)
            u[(r, c)] = Complex64::new(branch_plus[(r, c)], 0.0);
            u[(m + r, m + c)] = Complex64::new(branch_minus[(r, c)], 0.0);
        }
    }
    let u_adj = u.adjoint();
    let (p1, p2) = params.populations();
    let thermalise = |rho: &DMatrix<Complex64>, p: f64| -> DMatrix<Complex64> {
        let reduced = rho.view((0, 0), (m, m)) + rho.view((m, m), (m, m));
        let mut out = DMatrix::<Complex64>::zeros(2 * m, 2 * m);
        out.view_mut((0, 0), (m, m)).copy_from(&(&reduced * Complex64::new(p, 0.0)));
        out.view_mut((m, m), (m, m)).copy_from(&(&reduced * Complex64::new(1.0 - p, 0.0)));
        out
    };
    let top = |rho: &DMatrix<Complex64>| rho[(m - 1, m - 1)].re + rho[(2 * m - 1, 2 * m - 1)].re;

    let mut ground = DMatrix::<Complex64>::zeros(m, m);
    ground[(0, 0)] = Complex64::new(1.0, 0.0);
    let mut rho = DensityState::product(layout.clone(), &[pauli::thermal(params.beta2 * params.omega_z), ground])?
        .to_dense();
    let mut max_top = top(&rho);
    for cycle in 1..=cycles {
        rho = thermalise(&rho, p2);
        rho = &u * &rho * &u_adj;
        rho = thermalise(&rho, p1);
        rho = &u * &rho * &u_adj;
        let t = top(&rho);
        max_top = max_top.max(t);
        if t > FOCK_LEAK_TOL {
            return Err(Error::TruncationLeak { population: t, cycle });
        }
    }
    let state = DensityState::from_dense(layout, &rho)?;
    let n2_op = &n_op * &n_op;
    let mean_n = state.expectation_real(&n_op)?;
    let mean_n2 = state.expectation_real(&n2_op)?;
    let exact = moments(&step_distribution(params), cycles as u64);
    let rel = |v: f64, e: f64| (v - e).abs() / e.abs().max(1e-12);
    Ok(QuantumMapReport {
        cycles,
        fock_n_max,
        mean_n,
        mean_n2,
        walk_mean_n: exact.mean_n(),
        walk_mean_n2: exact.mean_n2(),
        rel_dev_n: if cycles == 0 { mean_n.abs() } else { rel(mean_n, exact.mean_n()) },
        rel_dev_n2: if cycles == 0 { mean_n2.abs() } else { rel(mean_n2, exact.mean_n2()) },
        max_top_population: max_top,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig5() -> FlywheelParams {
        FlywheelParams::default()
    }

    #[test]
    fn parametrisation_round_trip() {
        for (chi, p0) in [(0.1, 0.6), (2.0, 0.6), (10.0, 0.6), (1.0, 0.9)] {
            let p = FlywheelParams::from_chi_p0(chi, p0, 0.1, 10).unwrap();
            let dist = step_distribution(&p);
            assert!((p.chi() - chi).abs() < 1e-10, "chi {chi}");
            assert!((dist.p_zero - p0).abs() < 1e-12);
            assert!((dist.p_plus / dist.p_minus - chi.exp()).abs() < 1e-10 * chi.exp());
        }
        assert!(FlywheelParams::from_chi_p0(2.0, 1.5, 0.1, 1).is_err());
    }

    #[test]
    fn reference_step_probabilities() {
        let dist = step_distribution(&fig5());
        assert!((dist.p_minus - 0.047681).abs() < 1e-6);
        assert!((dist.p_plus - 0.352319).abs() < 1e-6);
        assert!((dist.p_plus + dist.p_minus + dist.p_zero - 1.0).abs() < 1e-12);
        let flat = FlywheelParams { beta2: fig5().beta1, ..fig5() };
        let d = step_distribution(&flat);
        assert!((d.p_plus - d.p_minus).abs() < 1e-15);
        let hot = FlywheelParams { beta2: 0.0, ..fig5() };
        assert_eq!(hot.populations().1, 0.5);
    }

    #[test]
    fn generating_function_and_moments() {
        let dist = step_distribution(&fig5());
        assert_eq!(generating_function(&dist, 0.0), 1.0);
        // oracle: direct expectation over the three outcomes
        let s = 0.7;
        let direct = dist.p_plus * (dist.step * s).exp() + dist.p_minus * (-dist.step * s).exp() + dist.p_zero;
        assert!((generating_function(&dist, s) - direct).abs() < 1e-15);
        let one = moments(&dist, 1);
        assert!((one.mean_alpha - 0.0609276).abs() < 1e-7);
        assert!((one.e_alpha2 - 0.04 * 0.4).abs() < 1e-15);

        // oracle: finite differences of G_N at s = 0
        let n = 7;
        let h = 1e-2;
        let g = |s: f64| generating_function_n(&dist, s, n);
        let m = moments(&dist, n);
        let d1 = (g(h) - g(-h)) / (2.0 * h);
        let d2 = (g(h) - 2.0 * g(0.0) + g(-h)) / (h * h);
        let d4 = (g(2.0 * h) - 4.0 * g(h) + 6.0 * g(0.0) - 4.0 * g(-h) + g(-2.0 * h)) / h.powi(4);
        assert!((d1 - m.mean_alpha).abs() < 1e-5);
        assert!((d2 - m.e_alpha2).abs() < 1e-5);
        assert!((d4 - m.e_alpha4).abs() / m.e_alpha4 < 1e-3);

        let sym = StepDistribution { p_plus: 0.2, p_minus: 0.2, p_zero: 0.6, step: 0.2 };
        assert_eq!(moments(&sym, 1000).mean_alpha, 0.0);
    }

    #[test]
    fn cycle_thermodynamics_balance() {
        let p = fig5();
        for x in [0.0, 0.3, 5.0] {
            let c = cycle_thermodynamics(&p, x);
            assert!((c.q1 + c.q2 - c.w_cyc).abs() < 1e-12);
        }
        let (p1, p2) = p.populations();
        let c = cycle_thermodynamics(&p, 0.0);
        assert!((c.q1 - (p1 - p2) * p.omega_z).abs() < 1e-15);
        assert_eq!(c.w_cyc, 0.0);
        let flat = FlywheelParams { beta2: p.beta1, ..p };
        assert_eq!(cycle_thermodynamics(&flat, 1.0).w_cyc, 0.0);
    }

    #[test]
    fn asymptotic_scalings() {
        let p = FlywheelParams { cycles: 100, ..fig5() };
        let a = asymptotic_work_fluct_entropy(&p);
        let b = asymptotic_work_fluct_entropy(&FlywheelParams { cycles: 200, ..p });
        assert!((b.w_n / a.w_n - 4.0).abs() < 1e-12);
        assert!((b.delta_w_n / a.delta_w_n - 8.0).abs() < 1e-12);
        assert!((b.sigma_n / a.sigma_n - 2.0).abs() < 1e-12);
        assert!((a.sigma_n / 100.0 - 0.609276).abs() < 1e-6);
    }

    #[test]
    fn work_increment_matches_cycle_work() {
        // W_{N+1} - W_N = W_cyc (2N + 1) / 2N with <a + a^dagger> = 2 <a>
        let n = 100u64;
        let p = FlywheelParams { cycles: n, ..fig5() };
        let dist = step_distribution(&p);
        let inc = asymptotic_work_fluct_entropy(&FlywheelParams { cycles: n + 1, ..p }).w_n
            - asymptotic_work_fluct_entropy(&p).w_n;
        let disp = 2.0 * moments(&dist, n).mean_alpha;
        let w = cycle_thermodynamics(&p, disp).w_cyc;
        assert!((inc / w - (2.0 * n as f64 + 1.0) / (2.0 * n as f64)).abs() < 1e-12);
    }

    #[test]
    fn tur_ratios_at_reference_point() {
        let p = fig5();
        assert!((tur_ratio_flywheel(&p) - 6.0503857).abs() < 1e-6);
        assert!((tur_ratio_fock(&p) - 2.0167952).abs() < 1e-6);
        assert!((tur_ratio_ct(2.0) - 2.6260706).abs() < 1e-6);
        let near_ct = FlywheelParams::from_chi_p0(2.0, 1.0 - 1e-9, 0.1, 1).unwrap();
        assert!((tur_ratio_flywheel(&near_ct) - 3.0 * tur_ratio_ct(2.0)).abs() < 1e-6);
    }

    #[test]
    fn monte_carlo_is_deterministic_and_consistent() {
        let p = FlywheelParams { cycles: 200, ..fig5() };
        let a = monte_carlo_walk(&p, 4000, 7, &[0, 50, 200], Execution::Sequential).unwrap();
        let b = monte_carlo_walk(&p, 4000, 7, &[200, 50, 0], Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo_walk(&p, 4000, 8, &[200], Execution::Sequential).unwrap();
        assert_ne!(a.checkpoints[2], c.checkpoints[0]);
        assert_eq!(a.checkpoints[0].mean_n, 0.0);
        let dist = step_distribution(&p);
        for cp in &a.checkpoints[1..] {
            let z = cp.z_scores(&moments(&dist, cp.cycles));
            assert!(z.iter().all(|v| v.abs() < 5.0), "{z:?}");
        }
        assert_eq!(a.mean_trajectory.len(), 201);
        assert!((a.mean_trajectory[200] - a.checkpoints[2].mean_alpha).abs() < 1e-12);
        assert!(matches!(monte_carlo_walk(&p, 0, 1, &[], Execution::Sequential), Err(Error::NoTrials)));
    }

    #[test]
    fn idle_walk_stays_put() {
        let p = FlywheelParams::from_chi_p0(2.0, 1.0, 0.1, 50).unwrap();
        let r = monte_carlo_walk(&p, 200, 3, &[50], Execution::Sequential).unwrap();
        assert_eq!(r.checkpoints[0].mean_alpha, 0.0);
        assert_eq!(r.checkpoints[0].var_alpha, 0.0);
        let q = quantum_map_check(&p, 5, 20).unwrap();
        assert!(q.mean_n.abs() < 1e-14);
    }

    #[test]
    fn power_sums_are_exact() {
        let mut s = PowerSums::default();
        for k in [-3i64, 0, 4, 4, 11] {
            s.add(k);
        }
        let central = s.central_about(5, 3);
        let direct: f64 = [-3i64, 0, 4, 4, 11].iter().map(|k| ((k - 3) as f64).powi(3)).sum::<f64>() / 5.0;
        assert_eq!(central[3], direct);
        assert_eq!(central[0], 1.0);
    }

    #[test]
    fn quantum_map_matches_walk() {
        let p = fig5();
        let r = quantum_map_check(&p, 20, suggested_fock_cutoff(p.d, 20)).unwrap();
        assert!(r.rel_dev_n < 1e-6, "{r:?}");
        assert!(r.rel_dev_n2 < 1e-6, "{r:?}");
        let zero = quantum_map_check(&p, 0, 10).unwrap();
        assert_eq!(zero.mean_n, 0.0);
        assert!(quantum_map_check(&p, 51, 10).is_err());
        assert!(matches!(quantum_map_check(&p, 20, 8), Err(Error::TruncationLeak { .. })));
    }
}
