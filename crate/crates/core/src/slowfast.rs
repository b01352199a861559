//! Slow-fast formulation of the perturbed travelling-wave problem.
//!
//! The delay convolution is replaced by two chain variables `psi`, `zeta`
//! (linear chain trick for the strong kernel), and the nonlocal flux
//! `F = int_{-inf}^xi psi phi' ds` is carried as an extra state with `F' = psi y`.
//! The slow system in `xi` is
//!
//! ```text
//! phi' = y
//! y'   = z
//! tau z'     = (c - 1) phi - F - c z + g - tau P(phi, y)
//! c tau psi' = 2 psi - zeta
//! c tau zeta' = 2 (zeta - 2 phi)
//! F'   = psi y
//! ```
//!
//! with `P = y` for the KS perturbation and `P = y + phi y` for ME. The fast
//! system is the same field multiplied by `tau` (derivatives in `xi / tau`).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Result, SolwaveError};
use crate::rlw::ModelParams;
use crate::spectrum;

/// Which small perturbation is added to the delayed RLW equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PerturbationKind {
    /// Kuramoto–Sivashinsky: `u_xx + u_xxxx`.
    Ks,
    /// Marangoni effect: `u_xx + (u u_x)_x + u_xxxx`.
    Me,
}

impl PerturbationKind {
    pub const ALL: [PerturbationKind; 2] = [PerturbationKind::Ks, PerturbationKind::Me];

    /// Perturbation term `P(phi, y)` entering the `z` equation.
    pub fn forcing(self, phi: f64, y: f64) -> f64 {
        match self {
            PerturbationKind::Ks => y,
            PerturbationKind::Me => y + phi * y,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PerturbationKind::Ks => "ks",
            PerturbationKind::Me => "me",
        }
    }
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PerturbationKind::Ks => "KS",
            PerturbationKind::Me => "ME",
        })
    }
}

impl FromStr for PerturbationKind {
    type Err = SolwaveError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ks" => Ok(PerturbationKind::Ks),
            "me" => Ok(PerturbationKind::Me),
            other => Err(SolwaveError::InvalidArgument(format!(
                "unknown perturbation kind '{other}' (expected ks or me)"
            ))),
        }
    }
}

/// State of the augmented six-dimensional system. Also used for its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AugmentedState {
    pub phi: f64,
    pub y: f64,
    pub z: f64,
    pub psi: f64,
    pub zeta: f64,
    pub flux: f64,
}

impl AugmentedState {
    pub fn to_array(self) -> [f64; 6] {
        [self.phi, self.y, self.z, self.psi, self.zeta, self.flux]
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Self {
            phi: s[0],
            y: s[1],
            z: s[2],
            psi: s[3],
            zeta: s[4],
            flux: s[5],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn z_forcing(kind: PerturbationKind, p: &ModelParams, s: &AugmentedState) -> f64 {
    let c = p.c;
    (c - 1.0) * s.phi - s.flux - c * s.z + p.g - p.tau * kind.forcing(s.phi, s.y)
}

pub fn slow_vector_field(kind: PerturbationKind, params: &ModelParams, s: &AugmentedState) -> Result<AugmentedState> {
    let tau = params.tau;
    if !(tau > 0.0) {
        return Err(SolwaveError::InvalidArgument(format!(
            "slow system requires tau > 0, got {tau}"
        )));
    }
    let c = params.c;
    Ok(AugmentedState {
        phi: s.y,
        y: s.z,
        z: z_forcing(kind, params, s) / tau,
        psi: (2.0 * s.psi - s.zeta) / (c * tau),
        zeta: 2.0 * (s.zeta - 2.0 * s.phi) / (c * tau),
        flux: s.psi * s.y,
    })
}

/// Layer (fast-time) field; well defined at `tau = 0`.
pub fn fast_vector_field(kind: PerturbationKind, params: &ModelParams, s: &AugmentedState) -> AugmentedState {
    let tau = params.tau;
    let c = params.c;
    AugmentedState {
        phi: tau * s.y,
        y: tau * s.z,
        z: z_forcing(kind, params, s),
        psi: (2.0 * s.psi - s.zeta) / c,
        zeta: 2.0 * (s.zeta - 2.0 * s.phi) / c,
        flux: tau * s.psi * s.y,
    }
}

/// Point of the critical manifold above `(phi, y)`.
///
/// The flux is taken as `phi^2 / 2`, i.e. `F(-inf) = phi1^2 / 2`, which makes the
/// layer equilibria coincide with the manifold.
pub fn critical_manifold_point(params: &ModelParams, phi: f64, y: f64) -> AugmentedState {
    let c = params.c;
    let flux = 0.5 * phi * phi;
    AugmentedState {
        phi,
        y,
        z: ((c - 1.0) * phi - flux + params.g) / c,
        psi: phi,
        zeta: 2.0 * phi,
        flux,
    }
}

/// Jacobian of the `tau = 0` layer field in `(phi, y, z, psi, zeta)`, with the
/// flux slaved to `phi^2 / 2`.
pub fn layer_jacobian(params: &ModelParams, phi: f64) -> [[f64; 5]; 5] {
    let c = params.c;
    [
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [c - 1.0 - phi, 0.0, -c, 0.0, 0.0],
        [0.0, 0.0, 0.0, 2.0 / c, -1.0 / c],
        [-4.0 / c, 0.0, 0.0, 0.0, 2.0 / c],
    ]
}

/// Eigenvalues of the layer linearization at a point of the critical manifold,
/// sorted by real part.
pub fn layer_spectrum(params: &ModelParams, phi: f64) -> Vec<Complex64> {
    let jac: Vec<Vec<f64>> = layer_jacobian(params, phi).iter().map(|r| r.to_vec()).collect();
    let mut ev = spectrum::eigenvalues(&jac);
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev
}

/// First-order coefficients of the slow manifold
/// `psi = phi + tau p1`, `zeta = 2 phi + tau q1`, `c z = (c-1) phi - F + g - tau omega1`.
///
/// `p1 = p1_gain * y`. The invariance equations for `psi` and `zeta` give
/// `q1 = c y` and `2 p1 - q1 = c y`, i.e. `p1_gain = c`, which is the value set by
/// [`SlowManifoldExpansion::new`]. Any other gain leaves an `O(tau)` defect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowManifoldExpansion {
    pub kind: PerturbationKind,
    pub c: f64,
    pub p1_gain: f64,
}

impl SlowManifoldExpansion {
    pub fn new(kind: PerturbationKind, c: f64) -> Self {
        Self { kind, c, p1_gain: c }
    }

    pub fn p1(&self, _phi: f64, y: f64) -> f64 {
        self.p1_gain * y
    }

    pub fn q1(&self, _phi: f64, y: f64) -> f64 {
        self.c * y
    }

    /// KS: `((c-1)/c) y - phi y / c + y`; ME adds `phi y`.
    pub fn omega1(&self, phi: f64, y: f64) -> f64 {
        let c = self.c;
        let base = (c - 1.0) / c * y - phi * y / c + y;
        match self.kind {
            PerturbationKind::Ks => base,
            PerturbationKind::Me => base + phi * y,
        }
    }

    /// `(d omega1 / d phi, d omega1 / d y)`.
    pub fn omega1_gradient(&self, phi: f64, y: f64) -> (f64, f64) {
        let c = self.c;
        let (dphi, dy) = (-y / c, (c - 1.0) / c - phi / c + 1.0);
        match self.kind {
            PerturbationKind::Ks => (dphi, dy),
            PerturbationKind::Me => (dphi + y, dy + phi),
        }
    }

    /// Manifold state above `(phi, y)` with the flux at `phi^2 / 2`.
    pub fn state(&self, params: &ModelParams, phi: f64, y: f64) -> AugmentedState {
        let c = params.c;
        let tau = params.tau;
        let flux = 0.5 * phi * phi;
        AugmentedState {
            phi,
            y,
            z: ((c - 1.0) * phi - flux + params.g - tau * self.omega1(phi, y)) / c,
            psi: phi + tau * self.p1(phi, y),
            zeta: 2.0 * phi + tau * self.q1(phi, y),
            flux,
        }
    }
}

/// Invariance defects of the expanded manifold in the `z`, `psi`, `zeta` equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionDefect {
    pub z: f64,
    pub psi: f64,
    pub zeta: f64,
}

impl ExpansionDefect {
    pub fn max_abs(&self) -> f64 {
        self.z.abs().max(self.psi.abs()).max(self.zeta.abs())
    }
}

/// Plugs the manifold graph into the slow system at `(phi, y)`.
///
/// Each defect is `tau * (d/dxi of the graph along the flow) - (right-hand side)`
/// for the equations written as `tau z' = ...`, `c tau psi' = ...`,
/// `c tau zeta' = ...`. The flux is treated as a coordinate with `F' = psi y`.
pub fn expansion_defect(expansion: &SlowManifoldExpansion, params: &ModelParams, phi: f64, y: f64) -> ExpansionDefect {
    let c = params.c;
    let tau = params.tau;
    let s = expansion.state(params, phi, y);
    let (w_phi, w_y) = expansion.omega1_gradient(phi, y);

    // Derivatives along the slow flow: phi' = y, y' = z, F' = psi y.
    let z_dot = ((c - 1.0) * y - s.psi * y - tau * (w_phi * y + w_y * s.z)) / c;
    let psi_dot = y + tau * expansion.p1_gain * s.z;
    let zeta_dot = 2.0 * y + tau * c * s.z;

    ExpansionDefect {
        z: tau * z_dot - z_forcing(expansion.kind, params, &s),
        psi: c * tau * psi_dot - (2.0 * s.psi - s.zeta),
        zeta: c * tau * zeta_dot - 2.0 * (s.zeta - 2.0 * phi),
    }
}

/// Largest componentwise defect of the first-order slow manifold; `O(tau^2)`.
pub fn expansion_residual(kind: PerturbationKind, params: &ModelParams, phi: f64, y: f64) -> f64 {
    expansion_defect(&SlowManifoldExpansion::new(kind, params.c), params, phi, y).max_abs()
}

/// Planar flow on the slow manifold, truncated after the `O(tau)` term.
///
/// KS: `y' = [(c-1) phi - phi^2/2 + g]/c - (tau/c) [((2c-1)/c) y - phi y / c]`
/// ME: `y' = [(c-1) phi - phi^2/2 + g]/c - (tau/c) [((2c-1)/c) y + ((c-1)/c) phi y]`
pub fn reduced_vector_field(kind: PerturbationKind, params: &ModelParams, phi: f64, y: f64) -> (f64, f64) {
    let c = params.c;
    let base = params.equilibrium_residual(phi) / c;
    let damping = match kind {
        PerturbationKind::Ks => (2.0 * c - 1.0) / c * y - phi * y / c,
        PerturbationKind::Me => (2.0 * c - 1.0) / c * y + (c - 1.0) / c * phi * y,
    };
    (y, base - params.tau / c * damping)
}
