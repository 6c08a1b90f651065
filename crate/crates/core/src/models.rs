//! Hamiltonians, dissipators and observables of the autonomous engine models.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::analytic;
use crate::error::{Error, Result};
use crate::hilbert::{
    anticommutator, build_space, commutator, embed, ladder_ops, pauli, DensityState, Factor, OperatorMatrix,
    SpaceLayout,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    /// Two-qubit engine with reset thermalisation.
    TwoQubitReset,
    /// Two-qubit engine with local gain/loss only (no dephasing).
    TwoQubitLocal,
    /// Qubit 3 plus load after eliminating the fast qubits.
    ThreeQubitEffective,
    /// All three qubits plus load, reset thermalisation on qubits 1 and 2.
    ThreeQubitFull,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::TwoQubitReset,
        ModelKind::TwoQubitLocal,
        ModelKind::ThreeQubitEffective,
        ModelKind::ThreeQubitFull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::TwoQubitReset => "2qe-reset",
            ModelKind::TwoQubitLocal => "2qe-local",
            ModelKind::ThreeQubitEffective => "3qe-effective",
            ModelKind::ThreeQubitFull => "3qe-full",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown engine model '{s}'"))
    }
}

/// Physical constants of one engine configuration.
///
/// `p` is the thermalisation rate of the two-qubit models and the effective
/// dissipation rate of the reduced three-qubit model; `k` and `p_prime` only
/// matter for the full three-qubit model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineParams {
    pub e1: f64,
    pub e2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub p: f64,
    pub g: f64,
    pub k: f64,
    pub p_prime: f64,
}

impl Default for EngineParams {
    /// `beta1 E1 = 3`, `beta2 E2 = 1` with `E1 = 1`, `E2 = 2`, and `g = p = 1`.
    fn default() -> Self {
        EngineParams { e1: 1.0, e2: 2.0, beta1: 3.0, beta2: 0.5, p: 1.0, g: 1.0, k: 0.0, p_prime: 1.0 }
    }
}

/// Gain and decay rates `p e^{-/+ x/2} / Z` of a qubit with `x = beta E`.
pub fn thermal_rates(rate: f64, x: f64) -> (f64, f64) {
    let gain = rate / (1.0 + x.exp());
    let loss = rate / (1.0 + (-x).exp());
    (gain, loss)
}

impl EngineParams {
    pub fn new(e1: f64, e2: f64, beta1: f64, beta2: f64, p: f64, g: f64) -> Result<Self> {
        let params = EngineParams { e1, e2, beta1, beta2, p, g, ..Default::default() };
        params.validate()?;
        Ok(params)
    }

    pub fn with_three_qubit(self, k: f64, p_prime: f64) -> Result<Self> {
        let params = EngineParams { k, p_prime, ..self };
        params.validate()?;
        if !(p_prime > 0.0) {
            return Err(Error::InvalidParameter(format!("p_prime must be positive, got {p_prime}")));
        }
        Ok(params)
    }

    pub fn with_coupling(self, g: f64) -> Self {
        EngineParams { g, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.e1, self.e2, self.beta1, self.beta2, self.p, self.g, self.k, self.p_prime];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("all parameters must be finite".into()));
        }
        if !(self.e_v() > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "load quantum E2 - E1 must be positive, got {}",
                self.e_v()
            )));
        }
        if !(self.p > 0.0) {
            return Err(Error::InvalidParameter(format!("rate p must be positive, got {}", self.p)));
        }
        if self.g < 0.0 || self.k < 0.0 {
            return Err(Error::InvalidParameter("couplings g and k must be non-negative".into()));
        }
        if self.beta1 < 0.0 || self.beta2 < 0.0 {
            return Err(Error::InvalidParameter("inverse temperatures must be non-negative".into()));
        }
        Ok(())
    }

    pub fn e_v(&self) -> f64 {
        self.e2 - self.e1
    }

    /// Entropy produced per quantum delivered to the load, `beta1 E1 - beta2 E2`.
    pub fn chi(&self) -> f64 {
        self.beta1 * self.e1 - self.beta2 * self.e2
    }

    /// `T_v = -E_v / chi`; infinite at zero bias.
    pub fn virtual_temperature(&self) -> f64 {
        let chi = self.chi();
        if chi == 0.0 {
            f64::INFINITY
        } else {
            -self.e_v() / chi
        }
    }

    fn bath_x(&self, bath: usize) -> f64 {
        match bath {
            1 => self.beta1 * self.e1,
            2 => self.beta2 * self.e2,
            _ => panic!("bath index must be 1 or 2"),
        }
    }

    /// Partition function `2 cosh(beta_j E_j / 2)`.
    pub fn partition(&self, bath: usize) -> f64 {
        2.0 * (self.bath_x(bath) / 2.0).cosh()
    }

    pub fn gamma_plus(&self, bath: usize) -> f64 {
        thermal_rates(self.p, self.bath_x(bath)).0
    }

    pub fn gamma_minus(&self, bath: usize) -> f64 {
        thermal_rates(self.p, self.bath_x(bath)).1
    }

    pub fn gamma_z(&self) -> f64 {
        self.p / 4.0
    }

    pub fn carnot_efficiency(&self) -> f64 {
        1.0 - self.beta2 / self.beta1
    }

    pub fn otto_efficiency(&self) -> f64 {
        1.0 - self.e1 / self.e2
    }

    /// Parameters of the reduced model whose rate `p` equals the rates generated by the full model.
    pub fn reduced_from_full(&self) -> Result<EngineParams> {
        let rates = effective_rates_from_full(self)?;
        Ok(EngineParams { p: rates.p_effective, ..*self })
    }
}

/// Rates of the reduced three-qubit model generated by the fast qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveRates {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub p_effective: f64,
}

/// `gamma_pm = k^2 e^{+/- chi/2} / (p' Z1 Z2)`.
pub fn effective_rates_from_full(params: &EngineParams) -> Result<EffectiveRates> {
    if !(params.p_prime > 0.0) {
        return Err(Error::InvalidParameter(format!("p_prime must be positive, got {}", params.p_prime)));
    }
    let scale = params.k * params.k / (params.p_prime * params.partition(1) * params.partition(2));
    let half = params.chi() / 2.0;
    let gamma_plus = scale * half.exp();
    let gamma_minus = scale * (-half).exp();
    let p_effective = gamma_plus + gamma_minus;
    if p_effective >= 0.1 * params.p_prime {
        warn!("effective rate {p_effective} is not small compared with p' = {}", params.p_prime);
    }
    Ok(EffectiveRates { gamma_plus, gamma_minus, p_effective })
}

/// Truncation window of the load ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadWindow {
    pub n_min: i64,
    pub n_max: i64,
}

impl Default for LoadWindow {
    fn default() -> Self {
        LoadWindow { n_min: -40, n_max: 40 }
    }
}

impl LoadWindow {
    pub fn new(n_min: i64, n_max: i64) -> Self {
        LoadWindow { n_min, n_max }
    }

    pub fn rungs(&self) -> i64 {
        self.n_max - self.n_min + 1
    }

    /// Local index of rung 0.
    pub fn origin(&self) -> usize {
        (-self.n_min) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observable {
    /// Load energy `W`.
    Work,
    WorkSquared,
    /// Dimensionless current `C`, with `dW/dt = g E_v C`.
    Current,
    /// Virtual-qubit bias `Z` (two-qubit models) or `sigma_3^z` (three-qubit models).
    Bias,
    /// Virtual-qubit occupation `N`.
    Occupation,
    /// Total spin `S`.
    Spin,
    /// Engine-load interaction energy `H_int`.
    InteractionEnergy,
    /// `K = {W, C}`.
    CurrentWorkAnticommutator,
    /// `Omega = Z W` (or `sigma_3^z W`).
    BiasWork,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bath {
    Cold,
    Hot,
    /// Effective reservoir seen by qubit 3 in the reduced model.
    Effective,
}

#[derive(Debug, Clone)]
pub struct JumpChannel {
    pub label: String,
    pub operator: OperatorMatrix,
    pub rate: f64,
    pub bath: Bath,
}

/// Everything needed to integrate and analyse one engine model.
#[derive(Debug, Clone)]
pub struct ModelBundle {
    pub kind: ModelKind,
    pub params: EngineParams,
    pub window: LoadWindow,
    pub layout: Arc<SpaceLayout>,
    pub hamiltonian: OperatorMatrix,
    pub free_hamiltonian: OperatorMatrix,
    pub interaction: OperatorMatrix,
    /// Three-qubit exchange `V` (full model only).
    pub engine_coupling: Option<OperatorMatrix>,
    pub channels: Vec<JumpChannel>,
    pub observables: BTreeMap<Observable, OperatorMatrix>,
    /// Operators whose expectations are the heat currents from the cold and hot baths.
    pub heat_operators: [OperatorMatrix; 2],
    initial_qubits: Vec<DMatrix<Complex64>>,
}

impl ModelBundle {
    pub fn observable(&self, which: Observable) -> Option<&OperatorMatrix> {
        self.observables.get(&which)
    }

    pub fn ladder_factor(&self) -> usize {
        self.layout.n_factors() - 1
    }

    /// Load rung `n` of composite basis index `index`.
    pub fn rung(&self, index: usize) -> i64 {
        self.window.n_min + self.layout.digit(index, self.ladder_factor()) as i64
    }

    /// Thermal (or virtual-temperature) qubits with the load on rung 0.
    pub fn default_initial_state(&self) -> Result<DensityState> {
        let d = self.window.rungs() as usize;
        let origin = self.window.origin();
        let load = DMatrix::from_fn(d, d, |r, c| {
            if r == origin && c == origin {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        });
        let mut locals = self.initial_qubits.clone();
        locals.push(load);
        DensityState::product(self.layout.clone(), &locals)
    }

    /// Crude bound on the generator's spectral radius: sum of jump rates plus twice the couplings.
    pub fn max_rate(&self) -> f64 {
        let jumps: f64 = self.channels.iter().map(|c| c.rate).sum();
        let couplings = match self.kind {
            ModelKind::ThreeQubitFull => self.params.g + self.params.k,
            _ => self.params.g,
        };
        jumps + 2.0 * couplings
    }

    /// Slowest decay rate of the transients (the quasi-stationary regime is approached as `exp(-rate t)`).
    pub fn transient_rate(&self) -> f64 {
        analytic::transient_rate(self.kind, &self.params).unwrap_or(self.params.p)
    }

    /// `max |[H0, H_int + V]|` over basis states away from the window edges.
    pub fn resonance_defect(&self) -> f64 {
        let mut coupling = self.interaction.clone();
        if let Some(v) = &self.engine_coupling {
            coupling = &coupling + v;
        }
        let comm = commutator(&self.free_hamiltonian, &coupling);
        let edge = self.window.rungs() as usize - 1;
        let f = self.ladder_factor();
        comm.max_abs_where(|i| {
            let d = self.layout.digit(i, f);
            d != 0 && d != edge
        })
    }
}

fn check_window(window: LoadWindow) -> Result<()> {
    if window.rungs() < 3 {
        return Err(Error::WindowTooSmall { n_min: window.n_min, n_max: window.n_max });
    }
    Ok(())
}

fn engine_layout(qubits: usize, window: LoadWindow, e_v: f64) -> Result<Arc<SpaceLayout>> {
    check_window(window)?;
    let mut factors = vec![Factor::Qubit; qubits];
    factors.push(Factor::ladder(window.n_min, window.n_max, e_v));
    Ok(Arc::new(build_space(&factors)?))
}

fn warn_regime(params: &EngineParams) {
    if params.chi() < 0.0 {
        warn!("chi = {} < 0: the machine runs as a refrigerator", params.chi());
    }
}

/// Adjoint dissipator applied to `h`: `sum rate (L^+ h L - {L^+ L, h}/2)`.
fn adjoint_dissipator(channels: &[&JumpChannel], h: &OperatorMatrix) -> OperatorMatrix {
    let mut acc = OperatorMatrix::zeros(h.layout_arc().clone());
    for ch in channels {
        let l = &ch.operator;
        let ld = l.adjoint();
        let sandwich = &(&ld * h) * l;
        let anti = anticommutator(&(&ld * l), h);
        let term = &sandwich - &(&anti * 0.5);
        acc = &acc + &(&term * ch.rate);
    }
    acc
}

fn heat_operators_by_bath(channels: &[JumpChannel], h: &OperatorMatrix) -> Result<[OperatorMatrix; 2]> {
    let cold: Vec<&JumpChannel> = channels.iter().filter(|c| c.bath == Bath::Cold).collect();
    let hot: Vec<&JumpChannel> = channels.iter().filter(|c| c.bath == Bath::Hot).collect();
    Ok([
        adjoint_dissipator(&cold, h).into_hermitian()?,
        adjoint_dissipator(&hot, h).into_hermitian()?,
    ])
}

fn qubit_channels(
    layout: &Arc<SpaceLayout>,
    qubit: usize,
    bath: Bath,
    rate: f64,
    x: f64,
    dephasing: bool,
) -> Result<Vec<JumpChannel>> {
    let (gain, loss) = thermal_rates(rate, x);
    let label = |op: &str| format!("{op}_{}", qubit + 1);
    let mut out = vec![
        JumpChannel { label: label("sigma+"), operator: embed(&pauli::sigma_plus(), qubit, layout)?, rate: gain, bath },
        JumpChannel { label: label("sigma-"), operator: embed(&pauli::sigma_minus(), qubit, layout)?, rate: loss, bath },
    ];
    if dephasing {
        out.push(JumpChannel {
            label: label("sigmaz"),
            operator: embed(&pauli::sigma_z(), qubit, layout)?,
            rate: rate / 4.0,
            bath,
        });
    }
    Ok(out)
}

fn work_observables(
    w: &OperatorMatrix,
    current: &OperatorMatrix,
    bias: &OperatorMatrix,
    h_int: &OperatorMatrix,
) -> Result<BTreeMap<Observable, OperatorMatrix>> {
    let mut obs = BTreeMap::new();
    obs.insert(Observable::Work, w.clone());
    obs.insert(Observable::WorkSquared, (w * w).into_hermitian()?);
    obs.insert(Observable::Current, current.clone());
    obs.insert(Observable::Bias, bias.clone());
    obs.insert(Observable::InteractionEnergy, h_int.clone());
    obs.insert(Observable::CurrentWorkAnticommutator, anticommutator(w, current).into_hermitian()?);
    obs.insert(Observable::BiasWork, (bias * w).into_hermitian()?);
    Ok(obs)
}

fn build_two_qubit(params: &EngineParams, window: LoadWindow, kind: ModelKind) -> Result<ModelBundle> {
    params.validate()?;
    warn_regime(params);
    let e_v = params.e_v();
    let layout = engine_layout(2, window, e_v)?;
    let (w, a) = ladder_ops(&layout, 2)?;
    let ad = a.adjoint();
    let sz1 = embed(&pauli::sigma_z(), 0, &layout)?;
    let sz2 = embed(&pauli::sigma_z(), 1, &layout)?;
    let sp1 = embed(&pauli::sigma_plus(), 0, &layout)?;
    let sm1 = embed(&pauli::sigma_minus(), 0, &layout)?;
    let sp2 = embed(&pauli::sigma_plus(), 1, &layout)?;
    let sm2 = embed(&pauli::sigma_minus(), 1, &layout)?;
    let id = OperatorMatrix::identity(layout.clone());

    let h0 = &(&(&sz1 * (params.e1 / 2.0)) + &(&sz2 * (params.e2 / 2.0))) + &w;
    // sigma1+ sigma2- A^dagger moves a quantum E_v onto the load
    let forward = &(&sp1 * &sm2) * &ad;
    let backward = &(&sm1 * &sp2) * &a;
    let h_int = (&(&forward + &backward) * params.g).into_hermitian()?;
    let hamiltonian = (&h0 + &h_int).into_hermitian()?;
    let i = Complex64::new(0.0, 1.0);
    let current = (&backward - &forward).scale(i).into_hermitian()?;

    let bias = &(&sz2 - &sz1) * 0.5;
    let occupation = (&(&id - &(&sz1 * &sz2)) * 0.5).into_hermitian()?;
    let spin = &(&sz1 + &sz2) * 0.5;

    let dephasing = kind == ModelKind::TwoQubitReset;
    let mut channels = qubit_channels(&layout, 0, Bath::Cold, params.p, params.beta1 * params.e1, dephasing)?;
    channels.extend(qubit_channels(&layout, 1, Bath::Hot, params.p, params.beta2 * params.e2, dephasing)?);

    let mut observables = work_observables(&w, &current, &bias, &h_int)?;
    observables.insert(Observable::Occupation, occupation);
    observables.insert(Observable::Spin, spin);
    let heat_operators = heat_operators_by_bath(&channels, &hamiltonian)?;

    Ok(ModelBundle {
        kind,
        params: *params,
        window,
        layout,
        hamiltonian,
        free_hamiltonian: h0,
        interaction: h_int,
        engine_coupling: None,
        channels,
        observables,
        heat_operators,
        initial_qubits: vec![pauli::thermal(params.beta1 * params.e1), pauli::thermal(params.beta2 * params.e2)],
    })
}

/// Two-qubit engine, reset thermalisation in Lindblad form (gain, loss and dephasing per qubit).
pub fn build_2qe_reset(params: &EngineParams, window: LoadWindow) -> Result<ModelBundle> {
    build_two_qubit(params, window, ModelKind::TwoQubitReset)
}

/// Two-qubit engine with the dephasing channels removed.
pub fn build_2qe_local(params: &EngineParams, window: LoadWindow) -> Result<ModelBundle> {
    build_two_qubit(params, window, ModelKind::TwoQubitLocal)
}

/// Qubit 3 and load with effective gain/loss `gamma+/gamma- = e^chi`, `gamma+ + gamma- = p`.
///
/// Heat from the effective reservoir is split between the real baths in the
/// ratio of the qubit energies: each quantum `E_v` handed to qubit 3 draws `E2`
/// from the hot bath and releases `E1` into the cold one.
pub fn build_3qe_effective(params: &EngineParams, window: LoadWindow) -> Result<ModelBundle> {
    params.validate()?;
    warn_regime(params);
    let e_v = params.e_v();
    let layout = engine_layout(1, window, e_v)?;
    let (w, a) = ladder_ops(&layout, 1)?;
    let ad = a.adjoint();
    let sz = embed(&pauli::sigma_z(), 0, &layout)?;
    let sp = embed(&pauli::sigma_plus(), 0, &layout)?;
    let sm = embed(&pauli::sigma_minus(), 0, &layout)?;

    let h0 = &(&sz * (e_v / 2.0)) + &w;
    let forward = &sm * &ad;
    let backward = &sp * &a;
    let h_int = (&(&forward + &backward) * params.g).into_hermitian()?;
    let hamiltonian = (&h0 + &h_int).into_hermitian()?;
    let current = (&backward - &forward).scale(Complex64::new(0.0, 1.0)).into_hermitian()?;

    let (gain, loss) = thermal_rates(params.p, -params.chi());
    let channels = vec![
        JumpChannel { label: "sigma+_3".into(), operator: sp.clone(), rate: gain, bath: Bath::Effective },
        JumpChannel { label: "sigma-_3".into(), operator: sm.clone(), rate: loss, bath: Bath::Effective },
    ];
    let all: Vec<&JumpChannel> = channels.iter().collect();
    let effective_heat = adjoint_dissipator(&all, &hamiltonian);
    let heat_operators = [
        (&effective_heat * (-params.e1 / e_v)).into_hermitian()?,
        (&effective_heat * (params.e2 / e_v)).into_hermitian()?,
    ];
    let observables = work_observables(&w, &current, &sz, &h_int)?;

    Ok(ModelBundle {
        kind: ModelKind::ThreeQubitEffective,
        params: *params,
        window,
        layout,
        hamiltonian,
        free_hamiltonian: h0,
        interaction: h_int,
        engine_coupling: None,
        channels,
        observables,
        heat_operators,
        initial_qubits: vec![pauli::with_bias(analytic::chi_tanh_half(params.chi()))],
    })
}

/// Three qubits and load; qubits 1 and 2 reset at rate `p_prime`, `E3 = E_v`.
pub fn build_3qe_full(params: &EngineParams, window: LoadWindow) -> Result<ModelBundle> {
    params.validate()?;
    if !(params.p_prime > 0.0) {
        return Err(Error::InvalidParameter(format!("p_prime must be positive, got {}", params.p_prime)));
    }
    warn_regime(params);
    if params.k > 0.1 * params.p_prime || params.g > 0.1 * params.p_prime {
        warn!(
            "k = {}, g = {} are not small compared with p' = {}; adiabatic elimination is inaccurate",
            params.k, params.g, params.p_prime
        );
    }
    let e_v = params.e_v();
    let layout = engine_layout(3, window, e_v)?;
    let (w, a) = ladder_ops(&layout, 3)?;
    let ad = a.adjoint();
    let sz: Vec<OperatorMatrix> = (0..3).map(|q| embed(&pauli::sigma_z(), q, &layout)).collect::<Result<_>>()?;
    let sp: Vec<OperatorMatrix> = (0..3).map(|q| embed(&pauli::sigma_plus(), q, &layout)).collect::<Result<_>>()?;
    let sm: Vec<OperatorMatrix> = (0..3).map(|q| embed(&pauli::sigma_minus(), q, &layout)).collect::<Result<_>>()?;

    let energies = [params.e1, params.e2, e_v];
    let mut h0 = w.clone();
    for (z, e) in sz.iter().zip(energies) {
        h0 = &h0 + &(z * (e / 2.0));
    }
    let exchange = &(&sp[0] * &sm[1]) * &sp[2];
    let v = (&(&exchange + &exchange.adjoint()) * params.k).into_hermitian()?;
    let forward = &sm[2] * &ad;
    let backward = &sp[2] * &a;
    let h_int = (&(&forward + &backward) * params.g).into_hermitian()?;
    let hamiltonian = (&(&h0 + &v) + &h_int).into_hermitian()?;
    let current = (&backward - &forward).scale(Complex64::new(0.0, 1.0)).into_hermitian()?;

    let mut channels = qubit_channels(&layout, 0, Bath::Cold, params.p_prime, params.beta1 * params.e1, true)?;
    channels.extend(qubit_channels(&layout, 1, Bath::Hot, params.p_prime, params.beta2 * params.e2, true)?);
    let heat_operators = heat_operators_by_bath(&channels, &hamiltonian)?;
    let observables = work_observables(&w, &current, &sz[2], &h_int)?;

    Ok(ModelBundle {
        kind: ModelKind::ThreeQubitFull,
        params: *params,
        window,
        layout,
        hamiltonian,
        free_hamiltonian: h0,
        interaction: h_int,
        engine_coupling: Some(v),
        channels,
        observables,
        heat_operators,
        initial_qubits: vec![
            pauli::thermal(params.beta1 * params.e1),
            pauli::thermal(params.beta2 * params.e2),
            pauli::with_bias(analytic::chi_tanh_half(params.chi())),
        ],
    })
}

pub fn build(kind: ModelKind, params: &EngineParams, window: LoadWindow) -> Result<ModelBundle> {
    match kind {
        ModelKind::TwoQubitReset => build_2qe_reset(params, window),
        ModelKind::TwoQubitLocal => build_2qe_local(params, window),
        ModelKind::ThreeQubitEffective => build_3qe_effective(params, window),
        ModelKind::ThreeQubitFull => build_3qe_full(params, window),
    }
}
