//! Unperturbed travelling-wave system of the regularized long-wave equation.
//!
//! With `u(x, t) = phi(xi)`, `xi = x - c t`, the unperturbed equation integrates
//! once to `(1 - c) phi + phi^2 / 2 + c phi'' = g`, i.e. the planar system
//!
//! ```text
//! phi' = y
//! y'   = [(c - 1) phi - phi^2 / 2 + g] / c
//! ```
//!
//! For `(c - 1)^2 + 2g > 0` it has a saddle at `phi1`, a center at `phi2`, and a
//! homoclinic loop through the saddle whose right turning point is `phi_r`. The
//! loop is the `tanh^2` pulse returned by [`HomoclinicOrbit`].

use crate::error::{Result, SolwaveError};

/// Absolute tolerance on the equilibrium quadratic used by [`classify_equilibrium`].
pub const EQUILIBRIUM_TOL: f64 = 1e-9;

/// Wave speed `c`, integration constant `g` and perturbation size `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub c: f64,
    pub g: f64,
    pub tau: f64,
}

impl ModelParams {
    pub fn new(c: f64, g: f64, tau: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(SolwaveError::InvalidArgument(format!(
                "wave speed c must be positive and finite, got {c}"
            )));
        }
        if !g.is_finite() {
            return Err(SolwaveError::InvalidArgument(format!("g must be finite, got {g}")));
        }
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(SolwaveError::InvalidArgument(format!(
                "tau must be non-negative and finite, got {tau}"
            )));
        }
        Ok(Self { c, g, tau })
    }

    /// Unperturbed parameters (`tau = 0`).
    pub fn unperturbed(c: f64, g: f64) -> Result<Self> {
        Self::new(c, g, 0.0)
    }

    pub fn with_tau(self, tau: f64) -> Result<Self> {
        Self::new(self.c, self.g, tau)
    }

    pub fn with_c(self, c: f64) -> Result<Self> {
        Self::new(c, self.g, self.tau)
    }

    /// `Delta = (c - 1)^2 + 2g`.
    pub fn discriminant(&self) -> f64 {
        discriminant(self.c, self.g)
    }

    /// Residual of the equilibrium quadratic `(c - 1) phi - phi^2 / 2 + g`.
    pub fn equilibrium_residual(&self, phi: f64) -> f64 {
        (self.c - 1.0) * phi - 0.5 * phi * phi + self.g
    }

    /// Right-hand side of the unperturbed planar system.
    pub fn planar_field(&self, phi: f64, y: f64) -> (f64, f64) {
        (y, self.equilibrium_residual(phi) / self.c)
    }
}

pub fn discriminant(c: f64, g: f64) -> f64 {
    (c - 1.0) * (c - 1.0) + 2.0 * g
}

/// Equilibria of the planar system and the energy levels through them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSet {
    pub delta: f64,
    /// Saddle abscissa.
    pub phi1: f64,
    /// Center abscissa.
    pub phi2: f64,
    /// Right turning point of the homoclinic loop.
    pub phi_r: f64,
    /// `H(phi1, 0)`.
    pub h1: f64,
    /// `H(phi2, 0)`.
    pub h2: f64,
}

impl EquilibriumSet {
    /// Amplitude of the loop, `phi_r - phi1 = 3 sqrt(Delta)`.
    pub fn loop_height(&self) -> f64 {
        self.phi_r - self.phi1
    }
}

pub fn equilibria(params: &ModelParams) -> Result<EquilibriumSet> {
    let delta = params.discriminant();
    if !(delta > 0.0) {
        return Err(SolwaveError::DegenerateSystem {
            c: params.c,
            g: params.g,
            delta,
        });
    }
    let root = delta.sqrt();
    let shift = params.c - 1.0;
    let phi1 = shift - root;
    let phi2 = shift + root;
    Ok(EquilibriumSet {
        delta,
        phi1,
        phi2,
        phi_r: shift + 2.0 * root,
        h1: first_integral(params, phi1, 0.0),
        h2: first_integral(params, phi2, 0.0),
    })
}

/// `H(phi, y) = y^2 / 2 - [(c - 1) phi^2 / 2 - phi^3 / 6 + g phi] / c`.
pub fn first_integral(params: &ModelParams, phi: f64, y: f64) -> f64 {
    let c = params.c;
    let potential = 0.5 * (c - 1.0) * phi * phi - phi * phi * phi / 6.0 + params.g * phi;
    0.5 * y * y - potential / c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    Saddle,
    Center,
}

/// Classifies an equilibrium `(phi, 0)` by the sign of `det A = -(c - 1 - phi) / c`.
pub fn classify_equilibrium(params: &ModelParams, phi: f64) -> Result<EquilibriumKind> {
    let residual = params.equilibrium_residual(phi);
    if !(residual.abs() < EQUILIBRIUM_TOL) {
        return Err(SolwaveError::NotAnEquilibrium { phi, residual });
    }
    // Linearization [[0, 1], [(c - 1 - phi) / c, 0]].
    let det = -(params.c - 1.0 - phi) / params.c;
    if det < 0.0 {
        Ok(EquilibriumKind::Saddle)
    } else {
        Ok(EquilibriumKind::Center)
    }
}

/// Closed-form homoclinic loop `phi(xi) = phi_r - (phi_r - phi1) tanh^2(kappa xi)`.
///
/// The loop is traversed with `y > 0` for `xi < 0` and `y < 0` for `xi > 0`, so the
/// profile is a pulse peaked at `xi = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomoclinicOrbit {
    pub params: ModelParams,
    pub eq: EquilibriumSet,
    /// Inverse length scale `kappa = sqrt((phi_r - phi1) / (3c)) / 2`.
    pub width: f64,
}

impl HomoclinicOrbit {
    pub fn new(params: ModelParams) -> Result<Self> {
        let eq = equilibria(&params)?;
        let width = 0.5 * (eq.loop_height() / (3.0 * params.c)).sqrt();
        Ok(Self { params, eq, width })
    }

    pub fn phi(&self, xi: f64) -> f64 {
        let t = (self.width * xi).tanh();
        self.eq.phi_r - self.eq.loop_height() * t * t
    }

    pub fn y(&self, xi: f64) -> f64 {
        let t = (self.width * xi).tanh();
        let sech2 = 1.0 - t * t;
        -2.0 * self.width * self.eq.loop_height() * t * sech2
    }

    /// Analytic second derivative of the profile.
    pub fn phi_xx(&self, xi: f64) -> f64 {
        let t = (self.width * xi).tanh();
        let sech2 = 1.0 - t * t;
        -2.0 * self.width * self.width * self.eq.loop_height() * sech2 * (1.0 - 3.0 * t * t)
    }

    /// Residual of `(1 - c) phi + phi^2 / 2 + c phi'' - g` along the profile.
    pub fn ode_residual(&self, xi: f64) -> f64 {
        let c = self.params.c;
        let phi = self.phi(xi);
        (1.0 - c) * phi + 0.5 * phi * phi + c * self.phi_xx(xi) - self.params.g
    }
}

pub fn orbit_phi(orbit: &HomoclinicOrbit, xi: f64) -> f64 {
    orbit.phi(xi)
}

pub fn orbit_y(orbit: &HomoclinicOrbit, xi: f64) -> f64 {
    orbit.y(xi)
}

/// Bright solitary wave `u(x, t) = phi(x - c t)`.
pub fn solitary_wave(params: &ModelParams, x: f64, t: f64) -> Result<f64> {
    let orbit = HomoclinicOrbit::new(*params)?;
    Ok(orbit.phi(x - params.c * t))
}
