use proptest::prelude::*;
use relrocket::control::place_poles;
use relrocket::dynamics::{
    mass_ratio_from_velocity, rel_accel, rel_accel_mass_form, relativistic_factor, velocity_from_mass_ratio,
};
use relrocket::linearization::{to_physical, to_virtual};
use relrocket::{Complex, Model, RocketParams};

fn params(vbar: f64, model: Model) -> RocketParams<f64> {
    RocketParams::natural(1.0, vbar, model).unwrap()
}

proptest! {
    #[test]
    fn mass_ratio_is_a_bijection(beta in -0.999f64..0.999, vbar in 0.01f64..=1.0) {
        let p = params(vbar, Model::Relativistic);
        let r = mass_ratio_from_velocity(beta, &p).unwrap();
        let back = velocity_from_mass_ratio(r, &p).unwrap();
        prop_assert!((back - beta).abs() <= 1e-12 * beta.abs().max(1e-300) + 1e-15);
    }

    #[test]
    fn acceleration_forms_agree(beta in -0.999f64..0.999, vbar in 0.01f64..=1.0, u in -3.0f64..3.0) {
        let p = params(vbar, Model::Relativistic);
        let m = mass_ratio_from_velocity(beta, &p).unwrap();
        let a = rel_accel(beta, u, &p).unwrap();
        let b = rel_accel_mass_form(m, u, &p).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs() + 1e-300);
    }

    #[test]
    fn compensator_round_trips(beta in -0.999f64..0.999, w in -1e3f64..1e3) {
        for model in [Model::Relativistic, Model::Photon, Model::Classical] {
            let p = params(1.0, model);
            let back = to_virtual(to_physical(w, beta, &p).unwrap(), beta, &p).unwrap();
            prop_assert!((back - w).abs() <= 1e-12 * w.abs().max(1.0));
        }
    }

    #[test]
    fn mass_ratio_decreases_with_velocity(a in -0.99f64..0.99, d in 1e-6f64..0.009, vbar in 0.01f64..=1.0) {
        let p = params(vbar, Model::Relativistic);
        prop_assert!(mass_ratio_from_velocity(a + d, &p).unwrap() < mass_ratio_from_velocity(a, &p).unwrap());
    }

    #[test]
    fn relativistic_factor_is_positive(beta in -0.999f64..0.999, vbar in 0.01f64..=1.0) {
        prop_assert!(relativistic_factor(beta, &params(vbar, Model::Relativistic)).unwrap() > 0.0);
    }

    #[test]
    fn placed_poles_solve_the_characteristic_polynomial(
        re in -10.0f64..-0.1,
        im in 0.0f64..10.0,
        vbar in 0.1f64..=1.0,
        m0 in 0.1f64..10.0,
    ) {
        let p = RocketParams::natural(m0, vbar, Model::Relativistic).unwrap();
        let poles = [Complex::new(re, im), Complex::new(re, -im)];
        let k = place_poles(&p, poles).unwrap();
        let b = p.input_coefficient();
        // s^2 + b k2 s + b k1 vanishes at each pole.
        for s in poles {
            let residual = s * s + s * (b * k.k2) + b * k.k1;
            prop_assert!(residual.norm() <= 1e-10 * (1.0 + s.norm_sqr()));
        }
    }
}

#[test]
fn speed_at_or_above_light_is_rejected() {
    let p = params(1.0, Model::Relativistic);
    assert!(rel_accel(1.0, -1.0, &p).is_err());
    assert!(rel_accel(-1.5, -1.0, &p).is_err());
    assert!(to_physical(1.0, 1.0, &p).is_err());
    assert!(mass_ratio_from_velocity(f64::NAN, &p).is_err());
}
