//! Melnikov analysis of the reduced (slow-manifold) systems.
//!
//! Along the unperturbed homoclinic loop the two Abelian integrals
//!
//! ```text
//! I1 = oint y^2 dxi   = -(24/5) sqrt(1/c) Delta^(5/4)
//! I2 = oint phi y^2 dxi = -(8/35) sqrt(1/c) (15 sqrt(Delta) + 21c - 21) Delta^(5/4)
//! ```
//!
//! (oriented from `phi_r` to `phi1`, hence negative) combine into
//!
//! ```text
//! M_KS = (2c-1)/c^2 I1 - I2 / c^2     =  P(c, g) M*_KS,  M*_KS = (5/7) sqrt(Delta) - c
//! M_ME = (2c-1)/c^2 I1 + (c-1)/c^2 I2 = -P(c, g) M*_ME,  M*_ME = (5(c-1)/7) sqrt(Delta) + c^2
//! ```
//!
//! with `P = (24 / (5 c^2)) sqrt(1/c) Delta^(5/4) > 0`. Simple zeros of `M*` in `c`
//! select the wave speed at which the solitary wave persists.

use crate::error::{Result, SolwaveError};
use crate::quadrature::{self, QuadConfig};
use crate::rlw::{discriminant, equilibria, ModelParams};
use crate::roots;
use crate::slowfast::PerturbationKind;

/// Bisection stops at this bracket width before the secant polish.
pub const BISECTION_WIDTH: f64 = 1e-10;
pub const SECANT_STEPS: usize = 3;
/// Required `|M*(c*)|`.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-12;
/// A root is simple when `|dM*/dc| > SIMPLE_ZERO_TOL`.
pub const SIMPLE_ZERO_TOL: f64 = 1e-6;
/// Upper limit for the doubling search of an unbounded bracket.
pub const BRACKET_CAP: f64 = 1e6;

fn require_orbit(params: &ModelParams) -> Result<f64> {
    let delta = params.discriminant();
    if !(delta > 0.0) {
        return Err(SolwaveError::DegenerateSystem {
            c: params.c,
            g: params.g,
            delta,
        });
    }
    Ok(delta)
}

pub fn abelian_i1(params: &ModelParams) -> Result<f64> {
    let delta = require_orbit(params)?;
    Ok(-24.0 / 5.0 * (1.0 / params.c).sqrt() * delta.powf(1.25))
}

pub fn abelian_i2(params: &ModelParams) -> Result<f64> {
    let delta = require_orbit(params)?;
    let c = params.c;
    Ok(-8.0 / 35.0 * (1.0 / c).sqrt() * (15.0 * delta.sqrt() + 21.0 * c - 21.0) * delta.powf(1.25))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbelianIntegral {
    I1,
    I2,
}

/// Quadrature for the Abelian integrals, independent of the closed forms.
///
/// Evaluates `2 sqrt(1/(3c)) int_{phi_r}^{phi1} w(phi) (phi - phi1) sqrt(phi_r - phi) dphi`
/// (`w = 1` or `phi`) after substituting `phi = phi_r - u^2`, which removes the
/// square-root endpoint behaviour.
pub fn abelian_oracle(params: &ModelParams, which: AbelianIntegral, cfg: &QuadConfig) -> Result<f64> {
    let eq = equilibria(params)?;
    let height = eq.loop_height();
    let weight = |phi: f64| match which {
        AbelianIntegral::I1 => 1.0,
        AbelianIntegral::I2 => phi,
    };
    let integrand = |u: f64| {
        let u2 = u * u;
        weight(eq.phi_r - u2) * (height - u2) * u2
    };
    let r = quadrature::integrate(integrand, 0.0, height.sqrt(), cfg)?;
    // dphi = -2u du reverses the orientation.
    Ok(-4.0 / (3.0 * params.c).sqrt() * r.value)
}

/// Default tolerances for [`abelian_oracle`].
pub fn oracle_config() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-300,
        rel_tol: 1e-11,
        max_subdivisions: 500,
    }
}

/// `M*` without the domain check; `sqrt(Delta)` is clamped at zero so the value is
/// continuous up to the edge of the admissible domain.
fn m_star_raw(kind: PerturbationKind, c: f64, g: f64) -> f64 {
    let root = discriminant(c, g).max(0.0).sqrt();
    match kind {
        PerturbationKind::Ks => 5.0 / 7.0 * root - c,
        PerturbationKind::Me => 5.0 * (c - 1.0) / 7.0 * root + c * c,
    }
}

pub fn reduced_melnikov(kind: PerturbationKind, params: &ModelParams) -> Result<f64> {
    require_orbit(params)?;
    Ok(m_star_raw(kind, params.c, params.g))
}

/// Signed factor relating `M` and `M*`: positive for KS, negative for ME.
pub fn melnikov_prefactor(kind: PerturbationKind, params: &ModelParams) -> Result<f64> {
    let delta = require_orbit(params)?;
    let c = params.c;
    let magnitude = 24.0 / (5.0 * c * c) * (1.0 / c).sqrt() * delta.powf(1.25);
    Ok(match kind {
        PerturbationKind::Ks => magnitude,
        PerturbationKind::Me => -magnitude,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MelnikovEval {
    pub kind: PerturbationKind,
    pub i1: f64,
    pub i2: f64,
    pub m: f64,
    pub m_star: f64,
    pub prefactor: f64,
}

pub fn melnikov(kind: PerturbationKind, params: &ModelParams) -> Result<MelnikovEval> {
    let i1 = abelian_i1(params)?;
    let i2 = abelian_i2(params)?;
    let c = params.c;
    let m = match kind {
        PerturbationKind::Ks => (2.0 * c - 1.0) / (c * c) * i1 - i2 / (c * c),
        PerturbationKind::Me => (2.0 * c - 1.0) / (c * c) * i1 + (c - 1.0) / (c * c) * i2,
    };
    let m_star = reduced_melnikov(kind, params)?;
    let prefactor = melnikov_prefactor(kind, params)?;
    debug_assert!(
        (m - prefactor * m_star).abs() <= 1e-12 * m.abs().max(prefactor.abs() * (m_star.abs() + c)),
        "M = P M* violated: {m} vs {}",
        prefactor * m_star
    );
    Ok(MelnikovEval {
        kind,
        i1,
        i2,
        m,
        m_star,
        prefactor,
    })
}

/// `dM*/dc`.
///
/// KS: `5(c-1) / (7 sqrt(Delta)) - 1`;
/// ME: `(2/7) (7c sqrt(Delta) + 5(c-1)^2 + 5g) / sqrt(Delta)`.
pub fn melnikov_dc(kind: PerturbationKind, params: &ModelParams) -> Result<f64> {
    let root = require_orbit(params)?.sqrt();
    let c = params.c;
    Ok(match kind {
        PerturbationKind::Ks => 5.0 * (c - 1.0) / (7.0 * root) - 1.0,
        PerturbationKind::Me => 2.0 / 7.0 * (7.0 * c * root + 5.0 * (c - 1.0) * (c - 1.0) + 5.0 * params.g) / root,
    })
}

/// The two speed ranges on which `(c - 1)^2 > -2g` holds when `g < 0`.
///
/// For `g >= 0` the whole half-line `c > 0` is one range and is reported as
/// `Lower`; `Upper` is then empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedBranch {
    /// `0 < c < 1 - sqrt(-2g)` (or `c > 0` when `g >= 0`).
    Lower,
    /// `c > 1 + sqrt(-2g)`.
    Upper,
}

/// Admissible open interval of speeds on a branch, if non-empty.
pub fn admissible_interval(g: f64, branch: SpeedBranch) -> Option<(f64, f64)> {
    match branch {
        SpeedBranch::Lower if g >= 0.0 => Some((0.0, f64::INFINITY)),
        SpeedBranch::Lower if g > -0.5 => Some((0.0, 1.0 - (-2.0 * g).sqrt())),
        SpeedBranch::Lower => None,
        SpeedBranch::Upper if g < 0.0 => Some((1.0 + (-2.0 * g).sqrt(), f64::INFINITY)),
        SpeedBranch::Upper => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroExistence {
    /// `M*` has exactly one simple zero strictly inside `(lo, hi)`.
    UniqueZeroIn {
        lo: f64,
        hi: f64,
    },
    NoZero,
}

/// Case analysis on the lower branch (the one carrying the persistent wave).
pub fn zero_existence(kind: PerturbationKind, g: f64) -> ZeroExistence {
    zero_existence_on(kind, g, SpeedBranch::Lower)
}

/// Case analysis of the zeros of `M*(., g)` on one speed branch.
///
/// * `-1/2 < g < 0`, lower branch: `M*` is monotone with opposite signs at the
///   ends, so one zero in `(0, 1 - sqrt(-2g))`.
/// * `g >= 0`: one zero on `(0, inf)`; the upper end is found by doubling.
/// * `g < 0`, upper branch: KS is bounded above by `-(4 sqrt 3 / 7) sqrt(-g) - 1`
///   and ME below by `(1 + sqrt(-2g))^2`, so there is no zero.
/// * `g <= -1/2`: the lower branch is empty.
pub fn zero_existence_on(kind: PerturbationKind, g: f64, branch: SpeedBranch) -> ZeroExistence {
    let Some((lo, hi)) = admissible_interval(g, branch) else {
        return ZeroExistence::NoZero;
    };
    if branch == SpeedBranch::Upper {
        return ZeroExistence::NoZero;
    }
    if hi.is_finite() {
        return ZeroExistence::UniqueZeroIn { lo, hi };
    }
    let sign_lo = m_star_raw(kind, lo, g).signum();
    let mut hi = 1.0;
    while m_star_raw(kind, hi, g).signum() == sign_lo && hi <= BRACKET_CAP {
        hi *= 2.0;
    }
    ZeroExistence::UniqueZeroIn { lo, hi }
}

/// Upper-branch maximizer of `M*_KS` for `g < 0`: `c = 1 + (7/6) sqrt(-3g)`.
pub fn ks_upper_branch_maximizer(g: f64) -> f64 {
    1.0 + 7.0 / 6.0 * (-3.0 * g).sqrt()
}

/// Closed-form maximum of `M*_KS` on the upper branch: `-(4 sqrt 3 / 7) sqrt(-g) - 1`.
pub fn ks_upper_branch_maximum(g: f64) -> f64 {
    -4.0 * 3f64.sqrt() / 7.0 * (-g).sqrt() - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    pub kind: PerturbationKind,
    pub g: f64,
    pub c_star: f64,
    /// Bracket left after bisection.
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// `|M*(c_star)|`.
    pub residual: f64,
    /// `dM*/dc` at the root.
    pub derivative: f64,
}

/// Wave speed `c*(g)` at which the reduced Melnikov function has its simple zero.
pub fn find_c_star(kind: PerturbationKind, g: f64) -> Result<RootResult> {
    let (lo, hi) = match zero_existence(kind, g) {
        ZeroExistence::NoZero => return Err(SolwaveError::NoRoot { g }),
        ZeroExistence::UniqueZeroIn { lo, hi } => (lo, hi),
    };
    if hi > BRACKET_CAP {
        return Err(SolwaveError::BracketFailure { lo, hi });
    }
    let f = |c: f64| m_star_raw(kind, c, g);
    let found = roots::bisect_then_secant(f, lo, hi, BISECTION_WIDTH, SECANT_STEPS)?;
    let c_star = found.root;
    // Domain filter: the zero must sit where the homoclinic loop exists.
    let params = ModelParams::new(c_star, g, 0.0)?;
    if !(params.discriminant() > 0.0) {
        return Err(SolwaveError::NoRoot { g });
    }
    let derivative = melnikov_dc(kind, &params)?;
    if !(derivative.abs() > SIMPLE_ZERO_TOL) {
        return Err(SolwaveError::NotSimpleZero { c: c_star, derivative });
    }
    Ok(RootResult {
        kind,
        g,
        c_star,
        bracket: found.bracket,
        iterations: found.iterations,
        residual: f(c_star).abs(),
        derivative,
    })
}
