//! Self-check suite behind `solwave verify`.

use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solwave_core::kernel::{convergence_check, kernel_moments, loglog_slope, DelayKernel};
use solwave_core::melnikov::{
    abelian_i1, abelian_i2, abelian_oracle, find_c_star, melnikov, oracle_config, AbelianIntegral,
};
use solwave_core::odeint::{homoclinic_return_metric, integrate, IntegratorConfig};
use solwave_core::rlw::{discriminant, equilibria, first_integral, HomoclinicOrbit, ModelParams};
use solwave_core::slowfast::{expansion_residual, layer_spectrum, PerturbationKind};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Flip the sign of the closed-form I2 before comparing with quadrature.
    I2Sign,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Seed for the randomly sampled parameter points
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Deliberately break one quantity to confirm the checks can fail
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn result(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

fn random_loop_params(rng: &mut ChaCha8Rng, n: usize) -> Vec<ModelParams> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (c, g) = (rng.gen_range(0.1..5.0), rng.gen_range(-0.4..3.0));
        if discriminant(c, g) > 1e-3 {
            out.push(ModelParams::unperturbed(c, g).expect("sampled parameters are finite"));
        }
    }
    out
}

fn failure(name: &'static str, e: impl std::fmt::Display) -> CheckResult {
    result(name, false, format!("error: {e}"))
}

fn check_roots() -> CheckResult {
    const NAME: &str = "reference wave speeds";
    let table = [
        (PerturbationKind::Ks, -0.2, 0.2660295689),
        (PerturbationKind::Ks, 0.0, 0.4166666667),
        (PerturbationKind::Ks, 2.0, 1.466998871),
        (PerturbationKind::Me, -0.2, 0.3286393802),
        (PerturbationKind::Me, 0.0, 0.4580398915),
        (PerturbationKind::Me, 2.0, 0.6801960271),
    ];
    let mut worst = 0.0_f64;
    for (kind, g, want) in table {
        match find_c_star(kind, g) {
            Ok(r) => worst = worst.max((r.c_star - want).abs()),
            Err(e) => return failure(NAME, e),
        }
    }
    result(NAME, worst <= 1e-6, format!("max deviation {worst:.2e}"))
}

fn check_oracle(points: &[ModelParams], fault: Option<Fault>) -> CheckResult {
    const NAME: &str = "Abelian integrals vs quadrature";
    let cfg = oracle_config();
    let mut worst = 0.0_f64;
    for p in points {
        let pairs = (|| -> solwave_core::Result<[(f64, f64); 2]> {
            let mut i2 = abelian_i2(p)?;
            if fault == Some(Fault::I2Sign) {
                i2 = -i2;
            }
            Ok([
                (abelian_i1(p)?, abelian_oracle(p, AbelianIntegral::I1, &cfg)?),
                (i2, abelian_oracle(p, AbelianIntegral::I2, &cfg)?),
            ])
        })();
        match pairs {
            Ok(pairs) => {
                for (closed, oracle) in pairs {
                    worst = worst.max((closed - oracle).abs() / oracle.abs());
                }
            }
            Err(e) => return failure(NAME, e),
        }
    }
    result(
        NAME,
        worst <= 1e-8,
        format!("{} points, max relative difference {worst:.2e}", points.len()),
    )
}

fn check_level_set(points: &[ModelParams], rng: &mut ChaCha8Rng) -> CheckResult {
    const NAME: &str = "loop on saddle level set";
    let mut worst = 0.0_f64;
    for p in points {
        let (orbit, eq) = match (HomoclinicOrbit::new(*p), equilibria(p)) {
            (Ok(o), Ok(e)) => (o, e),
            (Err(e), _) | (_, Err(e)) => return failure(NAME, e),
        };
        for _ in 0..8 {
            let xi = rng.gen_range(-10.0..10.0);
            let h = first_integral(p, orbit.phi(xi), orbit.y(xi));
            worst = worst.max((h - eq.h1).abs() / eq.h1.abs().max(1.0));
        }
    }
    result(NAME, worst <= 1e-10, format!("max relative deviation {worst:.2e}"))
}

fn check_profile_residual() -> CheckResult {
    const NAME: &str = "closed-form profile residual";
    let mut worst = 0.0_f64;
    for (c, g) in [(0.5, 0.0), (2.0, 0.0), (1.5, -0.1)] {
        let orbit = match ModelParams::unperturbed(c, g).and_then(HomoclinicOrbit::new) {
            Ok(o) => o,
            Err(e) => return failure(NAME, e),
        };
        for i in 0..=4000 {
            let xi = -20.0 + 0.01 * i as f64;
            worst = worst.max(orbit.ode_residual(xi).abs());
        }
    }
    result(NAME, worst <= 1e-9, format!("max residual {worst:.2e}"))
}

fn check_layer_spectrum(rng: &mut ChaCha8Rng) -> CheckResult {
    const NAME: &str = "layer spectrum {0,0,-c,2/c,2/c}";
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let c = rng.gen_range(0.1..5.0);
        let phi = rng.gen_range(-2.0..2.0);
        let p = ModelParams::unperturbed(c, 0.0).expect("positive speed");
        let ev = layer_spectrum(&p, phi);
        let expected = [-c, 0.0, 0.0, 2.0 / c, 2.0 / c];
        for (z, e) in ev.iter().zip(expected) {
            worst = worst.max((z.re - e).abs()).max(z.im.abs());
        }
    }
    result(NAME, worst <= 1e-10, format!("max deviation {worst:.2e}"))
}

fn check_expansion_slope() -> CheckResult {
    const NAME: &str = "slow-manifold residual slope";
    let taus: Vec<f64> = (0..9).map(|i| 10f64.powf(-4.0 + 0.25 * i as f64)).collect();
    let orbit = HomoclinicOrbit::new(ModelParams::unperturbed(0.5, 0.0).expect("valid")).expect("valid");
    let (phi, y) = (orbit.phi(0.8), orbit.y(0.8));
    let mut slopes = Vec::new();
    for kind in PerturbationKind::ALL {
        let r: Vec<f64> = taus
            .iter()
            .map(|&t| expansion_residual(kind, &ModelParams::new(0.5, 0.0, t).expect("valid"), phi, y))
            .collect();
        slopes.push(loglog_slope(&taus, &r));
    }
    let ok = slopes.iter().all(|s| (s - 2.0).abs() <= 0.1);
    result(NAME, ok, format!("KS {:.3}, ME {:.3}", slopes[0], slopes[1]))
}

fn check_kernel(rng: &mut ChaCha8Rng) -> CheckResult {
    const NAME: &str = "kernel moments and convergence";
    let mut worst = 0.0_f64;
    for _ in 0..5 {
        let tau = 10f64.powf(rng.gen_range(-3.0..0.5));
        match DelayKernel::new(tau).and_then(|k| kernel_moments(&k, 64)) {
            Ok((mass, mean)) => worst = worst.max((mass - 1.0).abs()).max((mean - tau).abs()),
            Err(e) => return failure(NAME, e),
        }
    }
    let taus = [0.1, 0.05, 0.025, 0.0125, 0.00625];
    let slope = match convergence_check(|x, s| (x - 0.5 * s).sin(), 0.4, 1.0, &taus) {
        Ok(errors) => loglog_slope(&taus, &errors),
        Err(e) => return failure(NAME, e),
    };
    result(
        NAME,
        worst <= 1e-10 && (0.8..=1.2).contains(&slope),
        format!("moment error {worst:.2e}, slope {slope:.3}"),
    )
}

fn check_factorization(points: &[ModelParams]) -> CheckResult {
    const NAME: &str = "M = prefactor * M*";
    let mut worst = 0.0_f64;
    for p in points {
        for kind in PerturbationKind::ALL {
            match melnikov(kind, p) {
                Ok(m) => worst = worst.max((m.m - m.prefactor * m.m_star).abs() / m.prefactor.abs()),
                Err(e) => return failure(NAME, e),
            }
        }
    }
    result(NAME, worst <= 1e-10, format!("max scaled deviation {worst:.2e}"))
}

fn check_integrators() -> CheckResult {
    const NAME: &str = "integrator accuracy";
    let params = ModelParams::unperturbed(0.5, 0.0).expect("valid");
    let field = move |_: f64, s: &[f64], out: &mut [f64]| {
        let (a, b) = params.planar_field(s[0], s[1]);
        out[0] = a;
        out[1] = b;
    };
    let h0 = first_integral(&params, 0.25, 0.0);
    let drift = match integrate(field, &[0.25, 0.0], &IntegratorConfig::rk4(1e-3, (0.0, 50.0))) {
        Ok(t) => t
            .states
            .iter()
            .map(|s| (first_integral(&params, s[0], s[1]) - h0).abs())
            .fold(0.0, f64::max),
        Err(e) => return failure(NAME, e),
    };
    let decay = match integrate(
        |_, s, out| out[0] = -s[0],
        &[1.0],
        &IntegratorConfig::rk45(1e-10, 1e-10, (0.0, 1.0)),
    ) {
        Ok(t) => (t.last_state()[0] - (-1.0f64).exp()).abs(),
        Err(e) => return failure(NAME, e),
    };
    result(
        NAME,
        drift <= 1e-8 && decay <= 1e-9,
        format!("RK4 energy drift {drift:.2e}, RK45 decay error {decay:.2e}"),
    )
}

fn check_persistence() -> CheckResult {
    const NAME: &str = "near-closed loop at KS root";
    let run = || -> solwave_core::Result<(f64, f64)> {
        let c = find_c_star(PerturbationKind::Ks, 0.0)?.c_star + 1e-4;
        let m = homoclinic_return_metric(PerturbationKind::Ks, &ModelParams::new(c, 0.0, 0.01)?, 1e-4)?;
        Ok((m.min_saddle_distance, m.threshold()))
    };
    match run() {
        Ok((d, t)) => result(NAME, d < t, format!("distance {d:.3e}, threshold {t:.3e}")),
        Err(e) => failure(NAME, e),
    }
}

pub fn run_checks(seed: u64, fault: Option<Fault>) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = random_loop_params(&mut rng, 24);
    vec![
        check_roots(),
        check_oracle(&points, fault),
        check_level_set(&points, &mut rng),
        check_profile_residual(),
        check_layer_spectrum(&mut rng),
        check_expansion_slope(),
        check_kernel(&mut rng),
        check_factorization(&points),
        check_integrators(),
        check_persistence(),
    ]
}

pub fn verify(args: &VerifyArgs) -> CliResult<()> {
    let results = run_checks(args.seed, args.inject_fault);
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    println!("seed {}", args.seed);
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status}  {:width$}  {}", r.name, r.detail);
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if failed.is_empty() {
        println!("all {} checks passed", results.len());
        Ok(())
    } else {
        println!("failed: {}", failed.join(", "));
        Err(CliError::VerificationFailed(failed.len()))
    }
}
