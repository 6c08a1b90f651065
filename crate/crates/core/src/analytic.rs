//! Exact quasi-stationary solutions, TUR bound functions and their minima.

use std::fmt;

use crate::error::{Error, Result};
use crate::models::{effective_rates_from_full, EngineParams, ModelKind};

/// Below this `|chi|` the series `chi coth(chi/2) = 2 + chi^2/6` is used.
pub const CHI_SERIES_CUTOFF: f64 = 1e-8;
/// Argument tolerance of the golden-section minimiser.
pub const GOLDEN_TOL: f64 = 1e-6;

/// `chi coth(chi/2)`, finite at `chi = 0`.
pub fn chi_coth_half(chi: f64) -> f64 {
    if chi.abs() < CHI_SERIES_CUTOFF {
        2.0 + chi * chi / 6.0
    } else {
        chi / (chi / 2.0).tanh()
    }
}

pub fn chi_tanh_half(chi: f64) -> f64 {
    (chi / 2.0).tanh()
}

/// Model families with a closed-form solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnalyticModel {
    Reset,
    Local,
    ThreeQubit,
}

impl AnalyticModel {
    pub const ALL: [AnalyticModel; 3] = [AnalyticModel::Reset, AnalyticModel::Local, AnalyticModel::ThreeQubit];

    pub fn for_kind(kind: ModelKind) -> Self {
        match kind {
            ModelKind::TwoQubitReset => AnalyticModel::Reset,
            ModelKind::TwoQubitLocal => AnalyticModel::Local,
            ModelKind::ThreeQubitEffective | ModelKind::ThreeQubitFull => AnalyticModel::ThreeQubit,
        }
    }

    /// Lower bound on the TUR ratio as published (three decimals).
    pub fn published_bound(self) -> f64 {
        match self {
            AnalyticModel::Reset => 2.0,
            AnalyticModel::Local => 1.982,
            AnalyticModel::ThreeQubit => 1.245,
        }
    }

    /// Maximum of `f(r)` over `r`, and where it is attained.
    pub fn bound_function_max(self) -> (f64, f64) {
        match self {
            AnalyticModel::Reset => (1.0, 2.0 / 3.0),
            AnalyticModel::Local => ((5.0f64 / 12.0).sqrt(), 25.0 / 32.0),
            AnalyticModel::ThreeQubit => (1.0 / (2.0 * 2.0f64.sqrt()), 0.75),
        }
    }

    /// `c` in `chi coth(chi/2) [1 - c tanh^2(chi/2)]`.
    ///
    /// For the two-qubit models `c = max f / 2` (the bias is at most half of
    /// `tanh(chi/2)`); for the three-qubit model the bias equals `tanh(chi/2)`
    /// and `c = max f`.
    pub fn bound_coefficient(self) -> f64 {
        let (_, fmax) = self.bound_function_max();
        match self {
            AnalyticModel::Reset | AnalyticModel::Local => fmax / 2.0,
            AnalyticModel::ThreeQubit => fmax,
        }
    }
}

impl fmt::Display for AnalyticModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnalyticModel::Reset => "2qe-reset",
            AnalyticModel::Local => "2qe-local",
            AnalyticModel::ThreeQubit => "3qe",
        })
    }
}

/// Virtual-qubit equilibrium of two uncoupled thermal qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualEquilibrium {
    pub z_eq: f64,
    pub n_eq: f64,
    pub s_eq: f64,
    /// Virtual temperature `-E_v / chi`; infinite at `chi = 0`.
    pub t_v: f64,
}

pub fn eq_virtual(params: &EngineParams) -> VirtualEquilibrium {
    let t1 = (params.beta1 * params.e1 / 2.0).tanh();
    let t2 = (params.beta2 * params.e2 / 2.0).tanh();
    let n_eq = 0.5 * (1.0 - t1 * t2);
    VirtualEquilibrium {
        z_eq: chi_tanh_half(params.chi()) * n_eq,
        n_eq,
        s_eq: -(t1 + t2) / 2.0,
        t_v: params.virtual_temperature(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticReport {
    pub model: AnalyticModel,
    /// Characteristic energy-transfer rate.
    pub gamma: f64,
    /// Equilibrium bias of the working qubit: `Z_eq` or `<sigma_3^z>_eq`.
    pub bias_eq: f64,
    /// `N_eq` for two-qubit models, 1 for the three-qubit model.
    pub n_eq: f64,
    pub w_dot: f64,
    pub sigma_dot: f64,
    pub delta_w_dot: f64,
    pub tur_ratio: f64,
    pub q1_dot: f64,
    pub q2_dot: f64,
    pub eta: f64,
    pub eta_c: f64,
    pub t_v: f64,
    /// Quasi-stationary means of `C`, the bias and `N`.
    pub mean_current: f64,
    pub mean_bias: f64,
    pub mean_occupation: f64,
}

/// Shared assembly: every model has `W = Gamma E_v b`, `Sigma = Gamma chi b`,
/// `Delta = Gamma E_v^2 [n - f b^2]` and `TUR = chi coth(chi/2) - chi f b'`.
struct Pieces {
    model: AnalyticModel,
    gamma: f64,
    bias_eq: f64,
    n_eq: f64,
    f: f64,
    mean_current: f64,
    mean_bias: f64,
    mean_occupation: f64,
}

fn assemble(params: &EngineParams, pc: Pieces) -> AnalyticReport {
    let e_v = params.e_v();
    let chi = params.chi();
    let w_dot = pc.gamma * e_v * pc.bias_eq;
    let delta_w_dot = pc.gamma * e_v * e_v * (pc.n_eq - pc.f * pc.bias_eq * pc.bias_eq);
    // b / n = tanh(chi/2) in every model, which removes the 0/0 at chi = 0
    let tur_ratio = chi_coth_half(chi) - chi * pc.f * pc.bias_eq;
    AnalyticReport {
        model: pc.model,
        gamma: pc.gamma,
        bias_eq: pc.bias_eq,
        n_eq: pc.n_eq,
        w_dot,
        sigma_dot: pc.gamma * chi * pc.bias_eq,
        delta_w_dot,
        tur_ratio,
        q1_dot: -params.e1 / e_v * w_dot,
        q2_dot: params.e2 / e_v * w_dot,
        eta: params.otto_efficiency(),
        eta_c: params.carnot_efficiency(),
        t_v: params.virtual_temperature(),
        mean_current: pc.mean_current,
        mean_bias: pc.mean_bias,
        mean_occupation: pc.mean_occupation,
    }
}

fn check_rates(params: &EngineParams) -> Result<()> {
    params.validate()?;
    if !(params.g > 0.0) {
        return Err(Error::InvalidParameter(format!("closed forms need g > 0, got {}", params.g)));
    }
    Ok(())
}

pub fn ness_2qe_reset(params: &EngineParams) -> Result<AnalyticReport> {
    check_rates(params)?;
    let (p, g) = (params.p, params.g);
    let eq = eq_virtual(params);
    let d = p * p + 2.0 * g * g;
    let gamma = g * g * p / d;
    Ok(assemble(
        params,
        Pieces {
            model: AnalyticModel::Reset,
            gamma,
            bias_eq: eq.z_eq,
            n_eq: eq.n_eq,
            f: 2.0 * gamma * (2.0 * p * p + g * g) / (p * d),
            mean_current: g * p / d * eq.z_eq,
            mean_bias: p * p / d * eq.z_eq,
            mean_occupation: eq.n_eq - g * g / d * eq.z_eq * eq.z_eq,
        },
    ))
}

pub fn ness_2qe_local(params: &EngineParams) -> Result<AnalyticReport> {
    check_rates(params)?;
    let (p, g) = (params.p, params.g);
    let eq = eq_virtual(params);
    let d = p * p + 4.0 * g * g;
    let gamma = 2.0 * g * g * p / d;
    Ok(assemble(
        params,
        Pieces {
            model: AnalyticModel::Local,
            gamma,
            bias_eq: eq.z_eq,
            n_eq: eq.n_eq,
            f: gamma * (5.0 * p * p + 4.0 * g * g) / (p * d),
            mean_current: 2.0 * g * p / d * eq.z_eq,
            mean_bias: p * p / d * eq.z_eq,
            mean_occupation: eq.n_eq - 2.0 * g * g / d * eq.z_eq * eq.z_eq,
        },
    ))
}

/// Reduced three-qubit model at effective rate `params.p`.
pub fn ness_3qe(params: &EngineParams) -> Result<AnalyticReport> {
    check_rates(params)?;
    let (p, g) = (params.p, params.g);
    let s_eq = chi_tanh_half(params.chi());
    let d = p * p + 8.0 * g * g;
    let gamma = 4.0 * g * g * p / d;
    Ok(assemble(
        params,
        Pieces {
            model: AnalyticModel::ThreeQubit,
            gamma,
            bias_eq: s_eq,
            n_eq: 1.0,
            f: 6.0 * gamma * p / d,
            mean_current: 4.0 * g * p / d * s_eq,
            mean_bias: p * p / d * s_eq,
            mean_occupation: 1.0,
        },
    ))
}

/// Closed form for a simulated model; the full three-qubit model uses its eliminated rate.
pub fn ness(kind: ModelKind, params: &EngineParams) -> Result<AnalyticReport> {
    match kind {
        ModelKind::TwoQubitReset => ness_2qe_reset(params),
        ModelKind::TwoQubitLocal => ness_2qe_local(params),
        ModelKind::ThreeQubitEffective => ness_3qe(params),
        ModelKind::ThreeQubitFull => ness_3qe(&params.reduced_from_full()?),
    }
}

/// `f(r)` with `r = g/p`.
pub fn bound_function(model: AnalyticModel, r: f64) -> f64 {
    let r2 = r * r;
    match model {
        AnalyticModel::Reset => 2.0 * r2 * (2.0 + r2) / (1.0 + 2.0 * r2).powi(2),
        AnalyticModel::Local => 2.0 * r2 * (5.0 + 4.0 * r2) / (1.0 + 4.0 * r2).powi(2),
        AnalyticModel::ThreeQubit => 24.0 * r2 / (1.0 + 8.0 * r2).powi(2),
    }
}

/// `chi coth(chi/2) [1 - c tanh^2(chi/2)]`.
pub fn bound_curve(model: AnalyticModel, chi: f64) -> f64 {
    let t = chi_tanh_half(chi);
    chi_coth_half(chi) * (1.0 - model.bound_coefficient() * t * t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub argmin: f64,
    pub value: f64,
}

/// Golden-section search for a unimodal `f` on `[lo, hi]`, to argument tolerance `tol`.
pub fn golden_section(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Minimum {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let argmin = (a + b) / 2.0;
    Minimum { argmin, value: f(argmin) }
}

/// Minimum of the bound curve over `chi > 0`.
///
/// For the reset model the curve increases monotonically and the minimum is the `chi -> 0` limit.
pub fn minimise_bound_curve(model: AnalyticModel) -> Minimum {
    golden_section(|chi| bound_curve(model, chi), 0.0, 20.0, GOLDEN_TOL)
}

/// `chi coth(chi/2) (<N> - 3<C>^2) / N_eq`, the coherence form of the reset-model ratio.
pub fn tur_coherence_form(params: &EngineParams, n_mean: f64, c_mean: f64) -> f64 {
    let eq = eq_virtual(params);
    chi_coth_half(params.chi()) * (n_mean - 3.0 * c_mean * c_mean) / eq.n_eq
}

/// Slowest transient decay rate of the mean-value equations.
///
/// Reset: `(C, Z)` decay at `3p/2 -/+ sqrt(p^2/4 - 4g^2)`, never slower than `S` at `p`.
/// Local: `(C, Z)` at `p`. Three-qubit: `3p/4 -/+ sqrt(p^2/16 - 4g^2)`.
pub fn transient_rate(kind: ModelKind, params: &EngineParams) -> Result<f64> {
    let p = match kind {
        ModelKind::ThreeQubitFull => effective_rates_from_full(params)?.p_effective,
        _ => params.p,
    };
    let g = params.g;
    let slow = |centre: f64, disc: f64| centre - if disc > 0.0 { disc.sqrt() } else { 0.0 };
    Ok(match kind {
        ModelKind::TwoQubitReset | ModelKind::TwoQubitLocal => p,
        ModelKind::ThreeQubitEffective | ModelKind::ThreeQubitFull => {
            slow(0.75 * p, p * p / 16.0 - 4.0 * g * g)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> EngineParams {
        EngineParams::default()
    }

    #[test]
    fn chi_coth_limit_branch_is_continuous() {
        assert_eq!(chi_coth_half(0.0), 2.0);
        let below = chi_coth_half(0.99e-8);
        let above = chi_coth_half(1.01e-8);
        assert!((below - above).abs() < 1e-12);
        assert!((chi_coth_half(2.0) - 2.0 / 1.0f64.tanh()).abs() < 1e-15);
        assert!((chi_coth_half(2.0) - 2.626070571).abs() < 1e-9);
    }

    #[test]
    fn virtual_equilibrium() {
        let eq = eq_virtual(&fig2());
        assert!((eq.n_eq - 0.290857).abs() < 1e-6);
        assert!((eq.z_eq - 0.221515).abs() < 1e-6);
        // oracle: populations of the two virtual levels from independent thermal qubits
        let exc = |x: f64| 1.0 / (1.0 + x.exp());
        let (e1, e2) = (exc(3.0), exc(1.0));
        let upper = (1.0 - e1) * e2;
        let lower = e1 * (1.0 - e2);
        assert!((eq.z_eq - (upper - lower)).abs() < 1e-15);
        assert!((eq.n_eq - (upper + lower)).abs() < 1e-15);
        assert_eq!(eq.t_v, -0.5);

        let flat = eq_virtual(&EngineParams { beta1: 1.0, ..fig2() });
        assert_eq!(flat.z_eq, 0.0);
        assert!(flat.t_v.is_infinite());
        let frozen = eq_virtual(&EngineParams { beta1: 400.0, beta2: 199.0, ..fig2() });
        assert!(frozen.n_eq < 1e-80);
    }

    #[test]
    fn reset_reference_point() {
        let r = ness_2qe_reset(&fig2()).unwrap();
        assert!((r.gamma - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.w_dot - 0.073838).abs() < 1e-6);
        assert!((r.sigma_dot - 0.147677).abs() < 1e-6);
        assert!((r.delta_w_dot - 0.086048).abs() < 1e-6);
        assert!((r.tur_ratio - 2.3307).abs() < 1e-4);
        assert!((r.tur_ratio - r.delta_w_dot * r.sigma_dot / (r.w_dot * r.w_dot)).abs() < 1e-12);
        assert!((r.eta - 0.5).abs() < 1e-15);
        assert!(r.eta <= r.eta_c);
        assert!((r.q1_dot + r.q2_dot - r.w_dot).abs() < 1e-15);
        assert!((-3.0 * r.q1_dot - 0.5 * r.q2_dot - r.sigma_dot).abs() < 1e-15);
    }

    #[test]
    fn local_reference_point() {
        let r = ness_2qe_local(&fig2()).unwrap();
        assert!((r.gamma - 0.4).abs() < 1e-15);
        // 2 (coth 1 - 0.72 Z_eq)
        let z = eq_virtual(&fig2()).z_eq;
        assert!((r.tur_ratio - 2.0 * (1.0f64 / 1.0f64.tanh() - 0.72 * z)).abs() < 1e-14);
        assert!((r.tur_ratio - 2.3070882).abs() < 1e-6);
        assert!((r.tur_ratio - r.delta_w_dot * r.sigma_dot / (r.w_dot * r.w_dot)).abs() < 1e-12);
    }

    #[test]
    fn three_qubit_violates_classical_tur() {
        let params = EngineParams { g: 1.0 / (2.0 * 2.0f64.sqrt()), ..fig2() };
        let r = ness_3qe(&params).unwrap();
        assert!((r.tur_ratio - 1.48368).abs() < 1e-5);
        assert!(r.tur_ratio < 2.0);
        assert!((r.tur_ratio - r.delta_w_dot * r.sigma_dot / (r.w_dot * r.w_dot)).abs() < 1e-12);
        assert!((r.tur_ratio - bound_curve(AnalyticModel::ThreeQubit, 2.0)).abs() < 1e-12);
    }

    #[test]
    fn weak_coupling_recovers_random_walk() {
        let weak = EngineParams { g: 1e-5, ..fig2() };
        for r in [ness_2qe_reset(&weak), ness_2qe_local(&weak), ness_3qe(&weak)] {
            assert!((r.unwrap().tur_ratio - chi_coth_half(2.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn bound_function_maxima() {
        for m in AnalyticModel::ALL {
            let (r, fmax) = m.bound_function_max();
            assert!((bound_function(m, r) - fmax).abs() < 1e-15, "{m}");
            for s in [0.5, 0.9, 1.1, 2.0] {
                assert!(bound_function(m, r * s) < fmax);
            }
        }
        assert_eq!(bound_function(AnalyticModel::Reset, 1.0), 2.0 / 3.0);
    }

    #[test]
    fn bound_minima() {
        let reset = minimise_bound_curve(AnalyticModel::Reset);
        assert!((reset.value - 2.0).abs() < 1e-6);
        let local = minimise_bound_curve(AnalyticModel::Local);
        assert!((local.value - 1.982).abs() < 1e-3);
        let three = minimise_bound_curve(AnalyticModel::ThreeQubit);
        assert!((three.value - 1.245).abs() < 1e-3);
        assert!(three.argmin > 1.0);
    }

    #[test]
    fn golden_section_on_parabola() {
        let m = golden_section(|x| (x - 1.3).powi(2) + 0.5, -4.0, 7.0, 1e-9);
        assert!((m.argmin - 1.3).abs() < 1e-8);
        assert!((m.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coherence_form_is_an_identity() {
        for (g, b1) in [(1.0, 3.0), (0.2, 1.7), (4.0, 5.0), (0.05, 0.6)] {
            let params = EngineParams { g, beta1: b1, ..fig2() };
            let r = ness_2qe_reset(&params).unwrap();
            let form = tur_coherence_form(&params, r.mean_occupation, r.mean_current);
            assert!((form - r.tur_ratio).abs() < 1e-10);
            assert!(r.mean_occupation < r.n_eq);
        }
    }

    #[test]
    fn bias_never_exceeds_half_tanh() {
        for b1 in [0.6, 1.0, 3.0, 10.0] {
            let params = EngineParams { beta1: b1, beta2: 0.1, ..fig2() };
            let eq = eq_virtual(&params);
            assert!(eq.z_eq <= 0.5 * chi_tanh_half(params.chi()) + 1e-15);
        }
        let hot = EngineParams { beta1: 2e-4, beta2: 5e-5, ..fig2() };
        let eq = eq_virtual(&hot);
        assert!((eq.z_eq / (0.5 * chi_tanh_half(hot.chi())) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn transient_rates() {
        let p = fig2();
        assert_eq!(transient_rate(ModelKind::TwoQubitReset, &p).unwrap(), 1.0);
        let weak = EngineParams { g: 0.1, ..p };
        assert_eq!(transient_rate(ModelKind::TwoQubitLocal, &weak).unwrap(), 1.0);
        assert_eq!(transient_rate(ModelKind::ThreeQubitEffective, &p).unwrap(), 0.75);
        let r = transient_rate(ModelKind::ThreeQubitEffective, &EngineParams { g: 0.05, ..p }).unwrap();
        assert!((r - (0.75 - (1.0f64 / 16.0 - 0.01).sqrt())).abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_coupling() {
        assert!(ness_2qe_reset(&EngineParams { g: 0.0, ..fig2() }).is_err());
    }
}
