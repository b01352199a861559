use proptest::prelude::*;
use solwave_core::kernel::{kernel_moments, DelayKernel};
use solwave_core::melnikov::{find_c_star, melnikov, reduced_melnikov, zero_existence, ZeroExistence};
use solwave_core::rlw::{discriminant, equilibria, first_integral, HomoclinicOrbit, ModelParams};
use solwave_core::slowfast::PerturbationKind;

fn kind() -> impl Strategy<Value = PerturbationKind> {
    prop_oneof![Just(PerturbationKind::Ks), Just(PerturbationKind::Me)]
}

/// Speeds and constants with a comfortably nondegenerate loop.
fn loop_params() -> impl Strategy<Value = (f64, f64)> {
    (0.1f64..5.0, -0.4f64..3.0).prop_filter("needs Delta > 0.01", |&(c, g)| discriminant(c, g) > 1e-2)
}

proptest! {
    #[test]
    fn orbit_stays_on_saddle_level((c, g) in loop_params(), xi in -15.0f64..15.0) {
        let params = ModelParams::unperturbed(c, g).unwrap();
        let orbit = HomoclinicOrbit::new(params).unwrap();
        let eq = equilibria(&params).unwrap();
        let h = first_integral(&params, orbit.phi(xi), orbit.y(xi));
        let scale = eq.h1.abs().max(eq.loop_height().powi(3) / c).max(1.0);
        prop_assert!((h - eq.h1).abs() <= 1e-12 * scale);
    }

    #[test]
    fn orbit_is_even_pulse((c, g) in loop_params(), xi in 0.0f64..15.0) {
        let orbit = HomoclinicOrbit::new(ModelParams::unperturbed(c, g).unwrap()).unwrap();
        prop_assert_eq!(orbit.phi(-xi), orbit.phi(xi));
        prop_assert_eq!(orbit.y(-xi), -orbit.y(xi));
        let ulp = 4.0 * f64::EPSILON * orbit.eq.phi1.abs().max(orbit.eq.phi_r.abs());
        prop_assert!(orbit.phi(xi) <= orbit.eq.phi_r && orbit.phi(xi) >= orbit.eq.phi1 - ulp);
    }

    #[test]
    fn melnikov_factorizes(kind in kind(), (c, g) in loop_params()) {
        let params = ModelParams::unperturbed(c, g).unwrap();
        let m = melnikov(kind, &params).unwrap();
        prop_assert!((m.m - m.prefactor * m.m_star).abs() <= 1e-12 * m.m.abs().max(1e-300));
    }

    #[test]
    fn kernel_is_a_probability_density(tau in 1e-3f64..5.0) {
        let (mass, mean) = kernel_moments(&DelayKernel::new(tau).unwrap(), 64).unwrap();
        prop_assert!((mass - 1.0).abs() < 1e-12);
        prop_assert!((mean - tau).abs() < 1e-12 * tau.max(1.0));
    }

    #[test]
    fn roots_lie_in_their_interval(kind in kind(), g in -0.49f64..3.0) {
        let root = find_c_star(kind, g).unwrap();
        let ZeroExistence::UniqueZeroIn { lo, hi } = zero_existence(kind, g) else {
            return Err(TestCaseError::fail("expected a zero"));
        };
        prop_assert!(root.c_star > lo && root.c_star < hi);
        let p = ModelParams::unperturbed(root.c_star, g).unwrap();
        prop_assert!(reduced_melnikov(kind, &p).unwrap().abs() < 1e-9);
    }
}
