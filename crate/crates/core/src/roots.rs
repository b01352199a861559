//! Bracketed scalar root finding: bisection followed by a short secant polish.

use crate::error::{Result, SolwaveError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracketed {
    pub root: f64,
    /// Final bracket that still encloses the sign change.
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// Bisects `[lo, hi]` down to `width`, then takes up to `secant_steps` secant steps
/// from the bracket ends. Secant iterates that leave the bracket are discarded.
pub fn bisect_then_secant<F>(f: F, lo: f64, hi: f64, width: f64, secant_steps: usize) -> Result<Bracketed>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(Bracketed {
            root: a,
            bracket: (a, a),
            iterations: 0,
        });
    }
    if fb == 0.0 {
        return Ok(Bracketed {
            root: b,
            bracket: (b, b),
            iterations: 0,
        });
    }
    if !(fa.signum() != fb.signum()) || !fa.is_finite() || !fb.is_finite() {
        return Err(SolwaveError::BracketFailure { lo: a, hi: b });
    }
    let mut iterations = 0;
    while b - a > width {
        let m = 0.5 * (a + b);
        let fm = f(m);
        iterations += 1;
        if fm == 0.0 {
            return Ok(Bracketed {
                root: m,
                bracket: (m, m),
                iterations,
            });
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if iterations > 2000 {
            break;
        }
    }
    let bracket = (a, b);
    let (mut x0, mut x1) = (a, b);
    let (mut f0, mut f1) = (fa, f(b));
    let mut best = if f0.abs() < f1.abs() { x0 } else { x1 };
    let mut best_f = f0.abs().min(f1.abs());
    for _ in 0..secant_steps {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !(x2 >= bracket.0 && x2 <= bracket.1) {
            break;
        }
        let f2 = f(x2);
        iterations += 1;
        if f2.abs() < best_f {
            best = x2;
            best_f = f2.abs();
        }
        if f2 == 0.0 {
            break;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
    }
    Ok(Bracketed {
        root: best,
        bracket,
        iterations,
    })
}
