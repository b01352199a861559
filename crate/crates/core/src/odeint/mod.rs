//! Explicit Runge–Kutta integration for small ODE systems.
//!
//! Two methods: classical RK4 with a fixed step, and the Dormand–Prince 5(4)
//! embedded pair with error-per-step control. Accepted steps keep the state and
//! its derivative, which gives a cubic Hermite dense output between samples.
//! Integration may run backwards (`xi_span.1 < xi_span.0`); samples are stored in
//! integration order.

mod events;
mod homoclinic;

pub use events::{detect_event, Crossing};
pub use homoclinic::{
    default_span, homoclinic_return_metric, homoclinic_return_metric_with, ReturnConfig, ReturnMetric,
    NEAR_CLOSED_FRACTION,
};

use crate::error::{Result, SolwaveError};
use crate::rlw::ModelParams;
use crate::slowfast::PerturbationKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Rk4 {
        h: f64,
    },
    Rk45 {
        atol: f64,
        rtol: f64,
        h_init: f64,
        h_min: f64,
        h_max: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub xi_span: (f64, f64),
    pub max_steps: usize,
}

impl IntegratorConfig {
    pub fn rk4(h: f64, xi_span: (f64, f64)) -> Self {
        Self {
            method: Method::Rk4 { h },
            xi_span,
            max_steps: 10_000_000,
        }
    }

    /// Adaptive Dormand–Prince with `h_max` set to the full span.
    pub fn rk45(atol: f64, rtol: f64, xi_span: (f64, f64)) -> Self {
        let length = (xi_span.1 - xi_span.0).abs();
        Self {
            method: Method::Rk45 {
                atol,
                rtol,
                h_init: (1e-3 * length).max(1e-12).min(length),
                h_min: 1e-14 * length.max(1.0),
                h_max: length,
            },
            xi_span,
            max_steps: 1_000_000,
        }
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        if let Method::Rk45 {
            h_max, h_init, h_min, ..
        } = &mut self.method
        {
            *h_max = h;
            *h_init = h_init.min(h);
            *h_min = h_min.min(h);
        }
        self
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = self.xi_span;
        if !(a.is_finite() && b.is_finite()) {
            return Err(SolwaveError::InvalidArgument("integration span must be finite".into()));
        }
        match self.method {
            Method::Rk4 { h } if !(h > 0.0) => Err(SolwaveError::InvalidArgument(format!(
                "RK4 step must be positive, got {h}"
            ))),
            Method::Rk45 {
                atol,
                rtol,
                h_init,
                h_min,
                h_max,
            } => {
                if !(atol > 0.0 && rtol > 0.0) {
                    return Err(SolwaveError::InvalidArgument("tolerances must be positive".into()));
                }
                if !(h_min > 0.0 && h_min <= h_init && h_init <= h_max) {
                    return Err(SolwaveError::InvalidArgument(format!(
                        "need 0 < h_min <= h_init <= h_max, got {h_min}, {h_init}, {h_max}"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Model that produced a trajectory, when known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMeta {
    pub kind: Option<PerturbationKind>,
    pub params: ModelParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub xi: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub derivatives: Vec<Vec<f64>>,
    pub stats: StepStats,
    pub meta: Option<RunMeta>,
    /// Set when a stop condition ended the run before the span was covered.
    pub stopped_early: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least the initial sample")
    }

    pub fn last_xi(&self) -> f64 {
        *self.xi.last().expect("trajectory has at least the initial sample")
    }

    /// Cubic Hermite interpolation on step `i` (between samples `i` and `i + 1`).
    pub fn hermite(&self, i: usize, xi: f64) -> Vec<f64> {
        let (x0, x1) = (self.xi[i], self.xi[i + 1]);
        let h = x1 - x0;
        let t = (xi - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        (0..self.states[i].len())
            .map(|k| {
                h00 * self.states[i][k]
                    + h10 * h * self.derivatives[i][k]
                    + h01 * self.states[i + 1][k]
                    + h11 * h * self.derivatives[i + 1][k]
            })
            .collect()
    }

    /// Dense output at `xi`; `None` outside the covered range.
    pub fn interpolate(&self, xi: f64) -> Option<Vec<f64>> {
        let n = self.len();
        if n == 0 {
            return None;
        }
        if n == 1 {
            return (xi == self.xi[0]).then(|| self.states[0].clone());
        }
        let forward = self.xi[1] > self.xi[0];
        let key = |x: f64| if forward { x } else { -x };
        let target = key(xi);
        if target < key(self.xi[0]) || target > key(self.xi[n - 1]) {
            return None;
        }
        let idx = self.xi.partition_point(|&x| key(x) <= target);
        let i = idx.saturating_sub(1).min(n - 2);
        Some(self.hermite(i, xi))
    }
}

fn check_finite(xi: f64, state: &[f64]) -> Result<()> {
    if state.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SolwaveError::NonFiniteState { xi })
    }
}

/// Integrates `field(xi, state, out)` from `s0` across `cfg.xi_span`.
pub fn integrate<F>(field: F, s0: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    integrate_until(field, s0, cfg, |_, _| false)
}

/// Like [`integrate`], but stops after the first accepted step for which
/// `stop(xi, state)` is true.
pub fn integrate_until<F, S>(field: F, s0: &[f64], cfg: &IntegratorConfig, stop: S) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &mut [f64]),
    S: Fn(f64, &[f64]) -> bool,
{
    cfg.validate()?;
    let (start, end) = cfg.xi_span;
    check_finite(start, s0)?;
    let dim = s0.len();
    let mut d0 = vec![0.0; dim];
    field(start, s0, &mut d0);
    let mut traj = Trajectory {
        xi: vec![start],
        states: vec![s0.to_vec()],
        derivatives: vec![d0],
        stats: StepStats {
            evaluations: 1,
            ..StepStats::default()
        },
        meta: None,
        stopped_early: false,
    };
    if start == end {
        return Ok(traj);
    }
    match cfg.method {
        Method::Rk4 { h } => rk4_loop(&field, &mut traj, end, h, cfg.max_steps, &stop)?,
        Method::Rk45 {
            atol,
            rtol,
            h_init,
            h_min,
            h_max,
        } => dopri_loop(
            &field,
            &mut traj,
            end,
            (atol, rtol),
            (h_init, h_min, h_max),
            cfg.max_steps,
            &stop,
        )?,
    }
    Ok(traj)
}

fn axpy(out: &mut [f64], base: &[f64], terms: &[(f64, &[f64])]) {
    for (k, o) in out.iter_mut().enumerate() {
        *o = base[k] + terms.iter().map(|(w, v)| w * v[k]).sum::<f64>();
    }
}

fn rk4_loop<F, S>(field: &F, traj: &mut Trajectory, end: f64, h: f64, max_steps: usize, stop: &S) -> Result<()>
where
    F: Fn(f64, &[f64], &mut [f64]),
    S: Fn(f64, &[f64]) -> bool,
{
    let dir = (end - traj.xi[0]).signum();
    let dim = traj.states[0].len();
    let (mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    let total = ((end - traj.xi[0]).abs() / h).ceil() as usize;
    if total > max_steps {
        return Err(SolwaveError::MaxStepsExceeded(max_steps));
    }
    let start = traj.xi[0];
    for step in 1..=total {
        let x = traj.last_xi();
        // xi_k = start + k h, with the last step clipped to the span.
        let x_next = if step == total {
            end
        } else {
            start + dir * h * step as f64
        };
        let hs = x_next - x;
        let y = traj.last_state().to_vec();
        let k1 = traj.derivatives.last().expect("nonempty").clone();
        axpy(&mut tmp, &y, &[(0.5 * hs, &k1)]);
        field(x + 0.5 * hs, &tmp, &mut k2);
        axpy(&mut tmp, &y, &[(0.5 * hs, &k2)]);
        field(x + 0.5 * hs, &tmp, &mut k3);
        axpy(&mut tmp, &y, &[(hs, &k3)]);
        field(x_next, &tmp, &mut k4);
        let mut y_next = vec![0.0; dim];
        axpy(
            &mut y_next,
            &y,
            &[(hs / 6.0, &k1), (hs / 3.0, &k2), (hs / 3.0, &k3), (hs / 6.0, &k4)],
        );
        check_finite(x_next, &y_next)?;
        let mut d_next = vec![0.0; dim];
        field(x_next, &y_next, &mut d_next);
        traj.stats.evaluations += 4;
        traj.stats.accepted += 1;
        traj.xi.push(x_next);
        traj.states.push(y_next);
        traj.derivatives.push(d_next);
        if stop(x_next, traj.last_state()) {
            traj.stopped_early = step != total;
            break;
        }
    }
    Ok(())
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn dopri_loop<F, S>(
    field: &F,
    traj: &mut Trajectory,
    end: f64,
    (atol, rtol): (f64, f64),
    (h_init, h_min, h_max): (f64, f64, f64),
    max_steps: usize,
    stop: &S,
) -> Result<()>
where
    F: Fn(f64, &[f64], &mut [f64]),
    S: Fn(f64, &[f64]) -> bool,
{
    let dir = (end - traj.xi[0]).signum();
    let dim = traj.states[0].len();
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
    );
    let mut tmp = vec![0.0; dim];
    let mut y_next = vec![0.0; dim];
    let mut h = h_init.min(h_max);
    let mut steps = 0;
    loop {
        let x = traj.last_xi();
        if (end - x) * dir <= 0.0 {
            return Ok(());
        }
        if steps >= max_steps {
            return Err(SolwaveError::MaxStepsExceeded(max_steps));
        }
        steps += 1;
        let remaining = (end - x).abs();
        let last = h >= remaining;
        let hs = dir * if last { remaining } else { h };
        let y = traj.last_state().to_vec();
        let k1 = traj.derivatives.last().expect("nonempty").clone();

        axpy(&mut tmp, &y, &[(hs * A21, &k1)]);
        field(x + C2 * hs, &tmp, &mut k2);
        axpy(&mut tmp, &y, &[(hs * A31, &k1), (hs * A32, &k2)]);
        field(x + C3 * hs, &tmp, &mut k3);
        axpy(&mut tmp, &y, &[(hs * A41, &k1), (hs * A42, &k2), (hs * A43, &k3)]);
        field(x + C4 * hs, &tmp, &mut k4);
        axpy(
            &mut tmp,
            &y,
            &[(hs * A51, &k1), (hs * A52, &k2), (hs * A53, &k3), (hs * A54, &k4)],
        );
        field(x + C5 * hs, &tmp, &mut k5);
        axpy(
            &mut tmp,
            &y,
            &[
                (hs * A61, &k1),
                (hs * A62, &k2),
                (hs * A63, &k3),
                (hs * A64, &k4),
                (hs * A65, &k5),
            ],
        );
        field(x + hs, &tmp, &mut k6);
        axpy(
            &mut y_next,
            &y,
            &[
                (hs * B1, &k1),
                (hs * B3, &k3),
                (hs * B4, &k4),
                (hs * B5, &k5),
                (hs * B6, &k6),
            ],
        );
        let x_next = if last { end } else { x + hs };
        field(x_next, &y_next, &mut k7);
        traj.stats.evaluations += 6;

        let mut err = 0.0_f64;
        for i in 0..dim {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = atol + rtol * y[i].abs().max(y_next[i].abs());
            err = err.max(e.abs() / scale);
        }
        if !err.is_finite() {
            // A non-finite error estimate counts as a rejected step.
            err = f64::INFINITY;
        }

        if err <= 1.0 {
            check_finite(x_next, &y_next)?;
            traj.stats.accepted += 1;
            traj.xi.push(x_next);
            traj.states.push(y_next.clone());
            traj.derivatives.push(k7.clone());
            if stop(x_next, &y_next) {
                traj.stopped_early = !last;
                return Ok(());
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).min(h_max);
        } else {
            traj.stats.rejected += 1;
            let factor = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.1
            };
            h *= factor;
            if h < h_min {
                if y_next.iter().any(|v| !v.is_finite()) {
                    return Err(SolwaveError::NonFiniteState { xi: x_next });
                }
                return Err(SolwaveError::StepUnderflow { xi: x, h });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rlw::{first_integral, HomoclinicOrbit};

    fn planar(params: ModelParams) -> impl Fn(f64, &[f64], &mut [f64]) {
        move |_, s, out| {
            let (a, b) = params.planar_field(s[0], s[1]);
            out[0] = a;
            out[1] = b;
        }
    }

    #[test]
    fn rk4_conserves_first_integral() {
        let params = ModelParams::unperturbed(0.5, 0.0).unwrap();
        // Inside the loop: between the center (0) and phi_r (0.5).
        let s0 = [0.25, 0.0];
        let h0 = first_integral(&params, s0[0], s0[1]);
        let traj = integrate(planar(params), &s0, &IntegratorConfig::rk4(1e-3, (0.0, 50.0))).unwrap();
        let drift = traj
            .states
            .iter()
            .map(|s| (first_integral(&params, s[0], s[1]) - h0).abs())
            .fold(0.0, f64::max);
        assert!(drift <= 1e-8, "{drift}");
        assert_eq!(traj.last_xi(), 50.0);
    }

    #[test]
    fn rk45_exponential_decay() {
        let cfg = IntegratorConfig::rk45(1e-10, 1e-10, (0.0, 1.0));
        let traj = integrate(|_, s, out| out[0] = -s[0], &[1.0], &cfg).unwrap();
        assert!((traj.last_state()[0] - (-1.0f64).exp()).abs() < 1e-9);
        assert!(traj.xi.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn saddle_is_stationary() {
        let params = ModelParams::unperturbed(0.5, 0.0).unwrap();
        let traj = integrate(
            planar(params),
            &[-1.0, 0.0],
            &IntegratorConfig::rk45(1e-10, 1e-10, (0.0, 20.0)),
        )
        .unwrap();
        assert!(traj.states.iter().all(|s| s[0] == -1.0 && s[1] == 0.0));
    }

    #[test]
    fn forward_then_backward_returns() {
        let params = ModelParams::unperturbed(0.8, 0.2).unwrap();
        let s0 = [0.4, 0.1];
        let fwd = integrate(planar(params), &s0, &IntegratorConfig::rk45(1e-12, 1e-12, (0.0, 5.0))).unwrap();
        let back = integrate(
            planar(params),
            fwd.last_state(),
            &IntegratorConfig::rk45(1e-12, 1e-12, (5.0, 0.0)),
        )
        .unwrap();
        assert!(back.xi.windows(2).all(|w| w[1] < w[0]));
        for (a, b) in back.last_state().iter().zip(s0) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let params = ModelParams::unperturbed(0.5, 0.0).unwrap();
        let orbit = HomoclinicOrbit::new(params).unwrap();
        let err = |h: f64| {
            let t = integrate(
                planar(params),
                &[orbit.eq.phi_r, 0.0],
                &IntegratorConfig::rk4(h, (0.0, 2.0)),
            )
            .unwrap();
            (t.last_state()[0] - orbit.phi(2.0)).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 2.0, "{ratio}");
    }

    #[test]
    fn hermite_dense_output() {
        let cfg = IntegratorConfig::rk45(1e-11, 1e-11, (0.0, 3.0));
        let traj = integrate(|_, s, out| out[0] = s[0].cos(), &[0.0], &cfg).unwrap();
        // y' = cos y, y(0) = 0  =>  y = 2 atan(tanh(x / 2))
        for x in [0.05, 0.77, 1.5, 2.9] {
            let y = traj.interpolate(x).unwrap()[0];
            assert!((y - 2.0 * (0.5 * x).tanh().atan()).abs() < 1e-7);
        }
        assert!(traj.interpolate(3.5).is_none());
    }

    #[test]
    fn stop_condition_ends_run() {
        let cfg = IntegratorConfig::rk45(1e-9, 1e-9, (0.0, 10.0));
        let traj = integrate_until(|_, _, out| out[0] = 1.0, &[0.0], &cfg, |_, s| s[0] > 2.0).unwrap();
        assert!(traj.stopped_early);
        assert!(traj.last_xi() < 10.0 && traj.last_state()[0] > 2.0);
    }

    #[test]
    fn blow_up_is_reported() {
        let cfg = IntegratorConfig::rk4(1e-2, (0.0, 5.0));
        let r = integrate(|_, s, out| out[0] = s[0] * s[0], &[1.0], &cfg);
        assert!(matches!(r, Err(SolwaveError::NonFiniteState { .. })));
        let cfg = IntegratorConfig::rk45(1e-8, 1e-8, (0.0, 5.0));
        let r = integrate(|_, s, out| out[0] = s[0] * s[0], &[1.0], &cfg);
        assert!(matches!(
            r,
            Err(SolwaveError::StepUnderflow { .. }) | Err(SolwaveError::NonFiniteState { .. })
        ));
    }

    #[test]
    fn step_limits() {
        let mut cfg = IntegratorConfig::rk45(1e-10, 1e-10, (0.0, 100.0));
        cfg.max_steps = 5;
        let r = integrate(|_, s, out| out[0] = -s[0], &[1.0], &cfg);
        assert!(matches!(r, Err(SolwaveError::MaxStepsExceeded(5))));
        let bad = IntegratorConfig {
            method: Method::Rk45 {
                atol: 1e-8,
                rtol: 1e-8,
                h_init: 1.0,
                h_min: 2.0,
                h_max: 3.0,
            },
            xi_span: (0.0, 1.0),
            max_steps: 10,
        };
        assert!(integrate(|_, _, out| out[0] = 0.0, &[1.0], &bad).is_err());
    }
}
