//! Zero crossings of a scalar function along a stored trajectory.

use super::Trajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub xi: f64,
    pub state: Vec<f64>,
    /// Sign of the change in the event function, taken in integration order.
    pub rising: bool,
    /// Index of the step (samples `step`, `step + 1`) that contains the crossing.
    pub step: usize,
}

const REFINE_ITERATIONS: usize = 60;

/// Finds every sign change of `event(state)` between consecutive samples.
///
/// The first guess is the linear interpolant of the sampled event values. It is
/// then refined with Illinois-modified regula falsi on the Hermite dense output,
/// which keeps the root bracketed inside the step. A sample where the event
/// function is exactly zero is reported once.
pub fn detect_event<E>(traj: &Trajectory, event: E) -> Vec<Crossing>
where
    E: Fn(&[f64]) -> f64,
{
    let mut out = Vec::new();
    if traj.len() < 2 {
        return out;
    }
    let values: Vec<f64> = traj.states.iter().map(|s| event(s)).collect();
    for i in 0..traj.len() - 1 {
        let (g0, g1) = (values[i], values[i + 1]);
        if g0 == 0.0 {
            // Counted at the step that leaves the zero, unless it is the final sample.
            if i > 0 && values[i - 1] != 0.0 && values[i - 1].signum() != g1.signum() && g1 != 0.0 {
                out.push(Crossing {
                    xi: traj.xi[i],
                    state: traj.states[i].clone(),
                    rising: g1 > values[i - 1],
                    step: i,
                });
            }
            continue;
        }
        if g1 == 0.0 {
            if i + 2 == traj.len() {
                out.push(Crossing {
                    xi: traj.xi[i + 1],
                    state: traj.states[i + 1].clone(),
                    rising: g1 > g0,
                    step: i,
                });
            }
            continue;
        }
        if g0.signum() == g1.signum() {
            continue;
        }
        let xi = refine(traj, i, &event, g0, g1);
        out.push(Crossing {
            xi,
            state: traj.hermite(i, xi),
            rising: g1 > g0,
            step: i,
        });
    }
    out
}

fn refine<E>(traj: &Trajectory, i: usize, event: &E, g0: f64, g1: f64) -> f64
where
    E: Fn(&[f64]) -> f64,
{
    let (mut a, mut b) = (traj.xi[i], traj.xi[i + 1]);
    let (mut fa, mut fb) = (g0, g1);
    let tol = 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0);
    let mut side = 0i8;
    let mut x = a - fa * (b - a) / (fb - fa);
    for _ in 0..REFINE_ITERATIONS {
        let fx = event(&traj.hermite(i, x));
        if fx == 0.0 || (b - a).abs() < tol {
            break;
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        let next = a - fa * (b - a) / (fb - fa);
        if (next - x).abs() < tol {
            x = next;
            break;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::super::{integrate, IntegratorConfig};
    use super::*;
    use std::f64::consts::PI;

    fn oscillator(span: (f64, f64)) -> Trajectory {
        let cfg = IntegratorConfig::rk45(1e-12, 1e-12, span).with_max_step(0.3);
        integrate(
            |_, s, out| {
                out[0] = s[1];
                out[1] = -s[0];
            },
            &[0.0, 1.0],
            &cfg,
        )
        .unwrap()
    }

    #[test]
    fn harmonic_zeros_at_half_periods() {
        let traj = oscillator((0.0, 10.0));
        let hits = detect_event(&traj, |s| s[0]);
        // x = sin(xi): zeros at pi, 2 pi, 3 pi (xi = 0 is the start sample)
        assert_eq!(hits.len(), 3);
        for (k, hit) in hits.iter().enumerate() {
            assert!((hit.xi - PI * (k + 1) as f64).abs() < 1e-6, "{}", hit.xi);
        }
        assert!(!hits[0].rising && hits[1].rising && !hits[2].rising);
    }

    #[test]
    fn backward_run_crossings() {
        let traj = oscillator((0.0, -4.0));
        let hits = detect_event(&traj, |s| s[0]);
        assert_eq!(hits.len(), 1);
        assert!((hits[0].xi + PI).abs() < 1e-6);
        // sin(xi) is negative just below zero and positive past -pi.
        assert!(hits[0].rising);
    }

    #[test]
    fn constant_sign_has_no_events() {
        let traj = oscillator((0.0, 10.0));
        assert!(detect_event(&traj, |s| 2.0 + s[0]).is_empty());
    }

    #[test]
    fn events_of_velocity() {
        let traj = oscillator((0.0, 7.0));
        let hits = detect_event(&traj, |s| s[1]);
        let expected = [0.5 * PI, 1.5 * PI];
        assert_eq!(hits.len(), 2);
        for (hit, want) in hits.iter().zip(expected) {
            assert!((hit.xi - want).abs() < 1e-6);
            assert!((hit.state[0].abs() - 1.0).abs() < 1e-8);
        }
    }
}
