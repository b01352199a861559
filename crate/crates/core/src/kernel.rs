//! Strong generic delay kernel `f(t) = (4t / tau^2) e^{-2t / tau}` and the history
//! convolution `(f * u)(x, t) = int_{-inf}^t f(t - s) u(x, s) ds`.

use crate::error::{Result, SolwaveError};
use crate::quadrature::{self, QuadConfig};

/// The history integral is truncated to `[t - HISTORY_WINDOW * tau, t]`; the
/// discarded kernel mass is `(1 + 2W) e^{-2W} ~ 1.7e-16` for `W = 20`.
pub const HISTORY_WINDOW: f64 = 20.0;

/// Absolute tolerance of the adaptive convolution quadrature.
pub const CONVOLUTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayKernel {
    tau: f64,
}

impl DelayKernel {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(SolwaveError::InvalidArgument(format!(
                "kernel delay must be positive, got {tau}"
            )));
        }
        Ok(Self { tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Kernel value without argument checks; zero for `t < 0`.
    fn value(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        4.0 * t / (self.tau * self.tau) * (-2.0 * t / self.tau).exp()
    }

    /// Location of the kernel maximum.
    pub fn peak(&self) -> f64 {
        0.5 * self.tau
    }
}

pub fn kernel_eval(k: &DelayKernel, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(SolwaveError::InvalidArgument(format!(
            "kernel argument must be non-negative, got {t}"
        )));
    }
    Ok(k.value(t))
}

/// Mass `int f` and mean `int t f` of the kernel.
///
/// With `s = 2t / tau` both integrals become Gamma-type integrals against `e^{-s}`
/// (`int s e^{-s} ds` and `tau/2 int s^2 e^{-s} ds`), evaluated by a
/// `quad_points`-node Gauss–Laguerre rule.
pub fn kernel_moments(k: &DelayKernel, quad_points: usize) -> Result<(f64, f64)> {
    if quad_points < 64 {
        return Err(SolwaveError::InvalidArgument(format!(
            "kernel moments need at least 64 quadrature points, got {quad_points}"
        )));
    }
    let (nodes, weights) = quadrature::gauss_laguerre(quad_points);
    let half_tau = 0.5 * k.tau;
    let mut mass = 0.0;
    let mut mean = 0.0;
    for (&s, &w) in nodes.iter().zip(&weights) {
        // f(t) dt = s e^{-s} ds, t = s tau / 2
        mass += w * s;
        mean += w * s * (half_tau * s);
    }
    Ok((mass, mean))
}

/// History convolution of `u(x, s)` with the kernel at `(x, t)`.
pub fn convolve<U>(k: &DelayKernel, u: U, x: f64, t: f64) -> Result<f64>
where
    U: Fn(f64, f64) -> f64,
{
    let cfg = QuadConfig {
        abs_tol: CONVOLUTION_TOL,
        rel_tol: 0.0,
        max_subdivisions: 4000,
    };
    // Integrate over the lag r = t - s in [0, W tau].
    let r = quadrature::integrate(|lag| k.value(lag) * u(x, t - lag), 0.0, HISTORY_WINDOW * k.tau, &cfg)?;
    Ok(r.value)
}

/// `|convolve_tau(u) - u(x, t)|` for each delay in `taus`.
///
/// For smooth `u` the error behaves like `tau |u_t(x, t)|`, so halving `tau`
/// roughly halves the error.
pub fn convergence_check<U>(u: U, x: f64, t: f64, taus: &[f64]) -> Result<Vec<f64>>
where
    U: Fn(f64, f64) -> f64,
{
    if taus.iter().any(|&tau| !(tau > 0.0)) {
        return Err(SolwaveError::InvalidArgument("delays must be positive".into()));
    }
    if taus.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(SolwaveError::InvalidArgument(
            "delays must be strictly decreasing".into(),
        ));
    }
    let exact = u(x, t);
    taus.iter()
        .map(|&tau| {
            let k = DelayKernel::new(tau)?;
            Ok((convolve(&k, &u, x, t)? - exact).abs())
        })
        .collect()
}

/// Least-squares slope of `log(error)` against `log(tau)`.
pub fn loglog_slope(taus: &[f64], errors: &[f64]) -> f64 {
    let n = taus.len() as f64;
    let xs: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rlw::{solitary_wave, ModelParams};

    #[test]
    fn kernel_values() {
        let k = DelayKernel::new(1.0).unwrap();
        assert_eq!(kernel_eval(&k, 0.0).unwrap(), 0.0);
        let v = kernel_eval(&k, 0.5).unwrap();
        assert!((v - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.735_758_882_3).abs() < 1e-10);
    }

    #[test]
    fn kernel_peak_is_half_tau() {
        for tau in [0.01, 0.3, 2.0] {
            let k = DelayKernel::new(tau).unwrap();
            let t = k.peak();
            let h = 1e-6 * tau;
            let d = (kernel_eval(&k, t + h).unwrap() - kernel_eval(&k, t - h).unwrap()) / (2.0 * h);
            assert!(d.abs() < 1e-6 / tau, "tau={tau} d={d}");
            assert!(kernel_eval(&k, t).unwrap() > kernel_eval(&k, 0.9 * t).unwrap());
            assert!(kernel_eval(&k, t).unwrap() > kernel_eval(&k, 1.1 * t).unwrap());
        }
    }

    #[test]
    fn kernel_argument_checks() {
        assert!(DelayKernel::new(0.0).is_err());
        assert!(DelayKernel::new(-1.0).is_err());
        let k = DelayKernel::new(1.0).unwrap();
        assert!(kernel_eval(&k, -0.1).is_err());
        assert!(kernel_moments(&k, 32).is_err());
    }

    #[test]
    fn moments_match_unit_mass_and_mean_tau() {
        for tau in [1.0, 0.01, 2.0] {
            let (mass, mean) = kernel_moments(&DelayKernel::new(tau).unwrap(), 64).unwrap();
            assert!((mass - 1.0).abs() < 1e-10);
            assert!((mean - tau).abs() < 1e-10 * tau.max(1.0));
        }
    }

    #[test]
    fn moments_agree_with_direct_quadrature() {
        let k = DelayKernel::new(0.7).unwrap();
        let cfg = QuadConfig::default();
        let mass = quadrature::integrate(|t| k.value(t), 0.0, 60.0 * k.tau(), &cfg)
            .unwrap()
            .value;
        let mean = quadrature::integrate(|t| t * k.value(t), 0.0, 60.0 * k.tau(), &cfg)
            .unwrap()
            .value;
        let (m0, m1) = kernel_moments(&k, 64).unwrap();
        assert!((mass - m0).abs() < 1e-11);
        assert!((mean - m1).abs() < 1e-11);
    }

    #[test]
    fn convolution_of_constant_and_linear() {
        let k = DelayKernel::new(1.0).unwrap();
        let c = convolve(&k, |_, _| 2.75, 0.0, 3.0).unwrap();
        assert!((c - 2.75).abs() < 1e-12);
        let lin = convolve(&k, |_, s| s, 0.0, 0.0).unwrap();
        assert!((lin + 1.0).abs() < 1e-12);
    }

    #[test]
    fn convolution_of_solitary_wave_is_order_tau_close() {
        let params = ModelParams::unperturbed(0.5, 0.0).unwrap();
        let u = |x: f64, t: f64| solitary_wave(&params, x, t).unwrap();
        let k = DelayKernel::new(1e-3).unwrap();
        for x in [-3.0, -0.5, 0.0, 1.0, 4.0] {
            let diff = (convolve(&k, u, x, 0.0).unwrap() - u(x, 0.0)).abs();
            assert!(diff < 1e-3, "x={x} diff={diff}");
        }
    }

    #[test]
    fn convergence_ratios_are_two() {
        let u = |x: f64, t: f64| (x - t).sin() + 0.3 * (x + 2.0 * t).cos();
        let errs = convergence_check(u, 0.4, 0.2, &[0.1, 0.05, 0.025]).unwrap();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 2.0).abs() < 0.15, "ratio={ratio}");
        }
    }

    #[test]
    fn convergence_of_constant_is_exact() {
        let errs = convergence_check(|_, _| -4.0, 0.0, 0.0, &[0.1, 0.05, 0.025]).unwrap();
        assert!(errs.iter().all(|&e| e < 1e-12));
    }

    #[test]
    fn convergence_at_solitary_peak_is_monotone() {
        let params = ModelParams::unperturbed(0.5, 0.0).unwrap();
        let u = |x: f64, t: f64| solitary_wave(&params, x, t).unwrap();
        let errs = convergence_check(u, 0.0, 0.0, &[0.2, 0.1, 0.05, 0.025]).unwrap();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }

    #[test]
    fn convergence_check_rejects_unsorted_delays() {
        assert!(convergence_check(|_, _| 1.0, 0.0, 0.0, &[0.1, 0.2]).is_err());
    }
}
