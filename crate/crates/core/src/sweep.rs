//! Parameter sweeps comparing integrated master equations against the closed forms.

use std::time::Instant;

use crate::analytic::{self, AnalyticReport};
use crate::error::{Error, Result};
use crate::evolution::{self, relative_deviation, NessReport, RunSettings};
use crate::flywheel::{self, FlywheelParams};
use crate::models::{self, EngineParams, LoadWindow, ModelKind};
use crate::parallel::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

impl std::str::FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "lin" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            _ => Err(Error::InvalidConfig(format!("unknown spacing '{s}' (linear|log)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl SweepAxis {
    pub fn new(name: &str, start: f64, stop: f64, count: usize, spacing: Spacing) -> Result<Self> {
        let axis = SweepAxis { name: name.to_string(), start, stop, count, spacing };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidConfig("sweep count must be at least 1".into()));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::InvalidConfig("sweep bounds must be finite".into()));
        }
        if self.spacing == Spacing::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(Error::InvalidConfig("log sweep needs positive bounds".into()));
        }
        Ok(())
    }

    /// Grid points; a single point sits at `start`. Endpoints are exact.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == self.count - 1 {
                    return self.stop;
                }
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + t * (self.stop - self.start),
                    Spacing::Log => (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

/// Engine parameter names accepted by [`set_engine_param`].
pub const ENGINE_PARAM_NAMES: [&str; 10] = ["e1", "e2", "beta1", "beta2", "p", "g", "k", "p_prime", "g_over_p", "chi"];

/// Set one parameter by name.
///
/// `g_over_p` scales `g` with the current `p`; `chi` moves `beta2` at fixed `beta1`.
pub fn set_engine_param(params: &mut EngineParams, name: &str, value: f64) -> Result<()> {
    match name {
        "e1" => params.e1 = value,
        "e2" => params.e2 = value,
        "beta1" => params.beta1 = value,
        "beta2" => params.beta2 = value,
        "p" => params.p = value,
        "g" => params.g = value,
        "k" => params.k = value,
        "p_prime" => params.p_prime = value,
        "g_over_p" => params.g = value * params.p,
        "chi" => {
            let beta2 = (params.beta1 * params.e1 - value) / params.e2;
            if beta2 < 0.0 {
                return Err(Error::InvalidParameter(format!("chi = {value} exceeds beta1 E1 = {}", params.beta1 * params.e1)));
            }
            params.beta2 = beta2;
        }
        _ => return Err(Error::InvalidConfig(format!("unknown engine parameter '{name}'"))),
    }
    Ok(())
}

/// One simulated point with its closed-form counterpart.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub params: EngineParams,
    pub sim: NessReport,
    pub analytic: AnalyticReport,
    pub dev_w_dot: f64,
    pub dev_delta_w_dot: f64,
    pub dev_sigma_dot: f64,
    pub dev_tur_ratio: f64,
    pub dev_eta: f64,
    pub wall_seconds: f64,
}

impl SweepPoint {
    pub fn max_deviation(&self) -> f64 {
        [self.dev_w_dot, self.dev_delta_w_dot, self.dev_sigma_dot, self.dev_tur_ratio]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

pub fn evaluate_point(
    kind: ModelKind,
    params: &EngineParams,
    window: LoadWindow,
    settings: &RunSettings,
    value: f64,
) -> Result<SweepPoint> {
    let start = Instant::now();
    let bundle = models::build(kind, params, window)?;
    let sim = evolution::simulate(&bundle, settings)?;
    let analytic = analytic::ness(kind, params)?;
    Ok(SweepPoint {
        value,
        params: *params,
        dev_w_dot: relative_deviation(sim.w_dot, analytic.w_dot),
        dev_delta_w_dot: relative_deviation(sim.delta_w_dot, analytic.delta_w_dot),
        dev_sigma_dot: relative_deviation(sim.sigma_dot, analytic.sigma_dot),
        dev_tur_ratio: relative_deviation(sim.tur_ratio, analytic.tur_ratio),
        dev_eta: relative_deviation(sim.eta, analytic.eta),
        sim,
        analytic,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Evaluate every grid point; results come back in grid order.
pub fn run_sweep(
    kind: ModelKind,
    base: &EngineParams,
    axis: &SweepAxis,
    window: LoadWindow,
    settings: &RunSettings,
    exec: Execution,
) -> Result<Vec<Result<SweepPoint>>> {
    axis.validate()?;
    let grid = axis.values();
    let mut points = Vec::with_capacity(grid.len());
    for &v in &grid {
        let mut p = *base;
        set_engine_param(&mut p, &axis.name, v)?;
        points.push(p);
    }
    Ok(parallel::map_range(points.len(), exec, |i| evaluate_point(kind, &points[i], window, settings, grid[i])))
}

/// TUR ratios of the flywheel walk at one bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlywheelTurPoint {
    pub chi: f64,
    pub p0: f64,
    pub coherent: f64,
    pub fock: f64,
    pub ct: f64,
}

pub fn flywheel_tur_point(chi: f64, p0: f64) -> Result<FlywheelTurPoint> {
    let params = FlywheelParams::from_chi_p0(chi, p0, 0.1, 1)?;
    Ok(FlywheelTurPoint {
        chi,
        p0,
        coherent: flywheel::tur_ratio_flywheel(&params),
        fock: flywheel::tur_ratio_fock(&params),
        ct: flywheel::tur_ratio_ct(chi),
    })
}

pub fn flywheel_tur_sweep(axis: &SweepAxis, p0: f64) -> Result<Vec<FlywheelTurPoint>> {
    axis.validate()?;
    axis.values().into_iter().map(|chi| flywheel_tur_point(chi, p0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let a = SweepAxis::new("g_over_p", 0.01, 10.0, 4, Spacing::Log).unwrap();
        let v = a.values();
        assert_eq!(v[0], 0.01);
        assert_eq!(v[3], 10.0);
        assert!((v[1] - 0.1).abs() < 1e-12 && (v[2] - 1.0).abs() < 1e-12);
        let one = SweepAxis::new("chi", 2.0, 5.0, 1, Spacing::Linear).unwrap();
        assert_eq!(one.values(), vec![2.0]);
        assert!(SweepAxis::new("g", 1.0, 2.0, 0, Spacing::Linear).is_err());
        assert!(SweepAxis::new("g", 0.0, 2.0, 3, Spacing::Log).is_err());
    }

    #[test]
    fn parameter_names() {
        let mut p = EngineParams::default();
        set_engine_param(&mut p, "g_over_p", 0.5).unwrap();
        assert_eq!(p.g, 0.5);
        set_engine_param(&mut p, "chi", 1.0).unwrap();
        assert!((p.chi() - 1.0).abs() < 1e-15);
        assert!(set_engine_param(&mut p, "chi", 10.0).is_err());
        assert!(matches!(set_engine_param(&mut p, "nope", 1.0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn single_point_sweep() {
        let axis = SweepAxis::new("g_over_p", 1.0, 1.0, 1, Spacing::Log).unwrap();
        let settings = RunSettings::default();
        let out = run_sweep(
            ModelKind::TwoQubitReset,
            &EngineParams::default(),
            &axis,
            LoadWindow::default(),
            &settings,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(out.len(), 1);
        let pt = out[0].as_ref().unwrap();
        assert!(pt.max_deviation() < 5e-3, "{pt:?}");
        assert_eq!(pt.value, 1.0);
    }

    #[test]
    fn flywheel_ratios_order() {
        let axis = SweepAxis::new("chi", 0.1, 10.0, 12, Spacing::Linear).unwrap();
        for pt in flywheel_tur_sweep(&axis, 0.6).unwrap() {
            assert!((pt.coherent - 3.0 * pt.fock).abs() < 1e-12);
            assert!(pt.fock <= pt.ct);
        }
    }
}
