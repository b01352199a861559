//! Return experiment for the reduced planar flow.
//!
//! A trajectory is launched from just inside the far vertex of the unperturbed
//! homoclinic loop, `(phi_r - eps0, 0)`, and integrated both forwards and
//! backwards. If a homoclinic connection persists at the chosen speed, both
//! branches pass close to the saddle `(phi1, 0)`.

use super::{detect_event, integrate_until, IntegratorConfig, RunMeta, Trajectory};
use crate::error::{Result, SolwaveError};
use crate::rlw::{first_integral, HomoclinicOrbit, ModelParams};
use crate::slowfast::{reduced_vector_field, PerturbationKind};

/// A run counts as near-closed when it comes within this fraction of the loop height of the saddle.
pub const NEAR_CLOSED_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnConfig {
    pub eps0: f64,
    /// Length of each branch; `None` means [`default_span`] of the reference loop.
    pub span: Option<f64>,
    pub atol: f64,
    pub rtol: f64,
    /// Maximum step is the span divided by this.
    pub min_steps: usize,
    /// Runs stop once `|phi - phi1|` or `|y|` exceeds this many loop heights.
    pub escape_factor: f64,
    /// Section `phi = phi1 + section_fraction * L` used for the closure gap.
    pub section_fraction: f64,
}

impl Default for ReturnConfig {
    fn default() -> Self {
        Self {
            eps0: 1e-4,
            span: None,
            atol: 1e-10,
            rtol: 1e-10,
            min_steps: 2000,
            escape_factor: 10.0,
            section_fraction: 0.1,
        }
    }
}

impl ReturnConfig {
    pub fn with_eps0(eps0: f64) -> Self {
        Self {
            eps0,
            ..Self::default()
        }
    }
}

/// Four decay lengths of the reference loop.
pub fn default_span(orbit: &HomoclinicOrbit) -> f64 {
    4.0 / orbit.width
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMetric {
    /// Smallest Euclidean distance of the forward branch to `(phi1, 0)`.
    pub min_saddle_distance: f64,
    /// Same distance for the backward branch.
    pub backward_saddle_distance: f64,
    /// `|H_forward - H_backward|` at the first crossings of the closure section,
    /// infinite when either branch never reaches it.
    pub loop_closure_gap: f64,
    /// `L = phi_r - phi1` of the reference loop.
    pub loop_height: f64,
    pub saddle: (f64, f64),
    pub start: (f64, f64),
    pub forward: Trajectory,
    pub backward: Trajectory,
}

impl ReturnMetric {
    pub fn threshold(&self) -> f64 {
        NEAR_CLOSED_FRACTION * self.loop_height
    }

    pub fn is_near_closed(&self) -> bool {
        self.min_saddle_distance < self.threshold()
    }
}

/// Return experiment using the loop of `params` itself as reference geometry.
pub fn homoclinic_return_metric(kind: PerturbationKind, params: &ModelParams, eps0: f64) -> Result<ReturnMetric> {
    let reference = HomoclinicOrbit::new(ModelParams::unperturbed(params.c, params.g)?)?;
    homoclinic_return_metric_with(kind, params, &reference, &ReturnConfig::with_eps0(eps0))
}

/// Return experiment for the reduced flow of `(kind, params)`, with start point,
/// saddle and span taken from `reference`.
pub fn homoclinic_return_metric_with(
    kind: PerturbationKind,
    params: &ModelParams,
    reference: &HomoclinicOrbit,
    cfg: &ReturnConfig,
) -> Result<ReturnMetric> {
    let eq = reference.eq;
    let height = eq.loop_height();
    if !(cfg.eps0 >= 0.0 && cfg.eps0 < height) {
        return Err(SolwaveError::InvalidArgument(format!(
            "eps0 must lie in [0, {height}), got {}",
            cfg.eps0
        )));
    }
    let span = cfg.span.unwrap_or_else(|| default_span(reference));
    if !(span > 0.0 && span.is_finite()) {
        return Err(SolwaveError::InvalidArgument(format!(
            "span must be positive, got {span}"
        )));
    }
    let p = *params;
    let field = move |_: f64, s: &[f64], out: &mut [f64]| {
        let (a, b) = reduced_vector_field(kind, &p, s[0], s[1]);
        out[0] = a;
        out[1] = b;
    };
    let escape = cfg.escape_factor * height;
    let phi1 = eq.phi1;
    let escaped = move |_: f64, s: &[f64]| (s[0] - phi1).abs() > escape || s[1].abs() > escape;
    let start = [eq.phi_r - cfg.eps0, 0.0];
    let run = |end: f64| -> Result<Trajectory> {
        let c = IntegratorConfig::rk45(cfg.atol, cfg.rtol, (0.0, end)).with_max_step(span / cfg.min_steps as f64);
        let mut t = integrate_until(field, &start, &c, escaped)?;
        t.meta = Some(RunMeta {
            kind: Some(kind),
            params: p,
        });
        Ok(t)
    };
    let forward = run(span)?;
    let backward = run(-span)?;

    let distance = |s: &[f64]| (s[0] - phi1).hypot(s[1]);
    let closest = |traj: &Trajectory| {
        let sampled = traj.states.iter().map(|s| distance(s));
        let turning = detect_event(traj, |s| s[1]).into_iter().map(|hit| distance(&hit.state));
        sampled.chain(turning).fold(f64::INFINITY, f64::min)
    };
    let min_saddle_distance = closest(&forward);
    let backward_saddle_distance = closest(&backward);

    let section = phi1 + cfg.section_fraction * height;
    let first_inward = |traj: &Trajectory| {
        detect_event(traj, |s| s[0] - section)
            .into_iter()
            .find(|hit| !hit.rising)
            .map(|hit| first_integral(&p, hit.state[0], hit.state[1]))
    };
    let loop_closure_gap = match (first_inward(&forward), first_inward(&backward)) {
        (Some(hf), Some(hb)) => (hf - hb).abs(),
        _ => f64::INFINITY,
    };

    Ok(ReturnMetric {
        min_saddle_distance,
        backward_saddle_distance,
        loop_closure_gap,
        loop_height: height,
        saddle: (phi1, 0.0),
        start: (start[0], start[1]),
        forward,
        backward,
    })
}
