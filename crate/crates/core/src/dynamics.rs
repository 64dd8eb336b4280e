//! Closed-form rocket dynamics in both regimes.
//!
//! Classical operations take the Earth-frame mass rate `dm/dt`; relativistic
//! operations take the proper-frame rate `dm/dτ`. Every fractional power of
//! `(c - v)/(c + v)` is evaluated in log space through `atanh`, since the
//! exponent `c / 2vbar` reaches the thousands for chemical exhaust speeds.

use crate::error::{DynamicsError, Result};
use crate::params::{check_finite, check_speed_against, RocketParams};
use crate::scalar::Scalar;

/// `ln[(c - v)/(c + v)]^(c / 2vbar) = -(c / vbar) atanh(v / c)`.
///
/// No speed check; callers guard `|v| < c`.
pub(crate) fn ln_mass_ratio<T: Scalar>(v: T, params: &RocketParams<T>) -> T {
    -params.c_over_vbar() * (v / params.c()).atanh()
}

/// `ln(1 - v²/c²)`, split as `ln(1 - β) + ln(1 + β)` to keep precision at both ends.
pub(crate) fn ln_one_minus_beta_sq<T: Scalar>(v: T, c: T) -> T {
    let beta = v / c;
    (-beta).ln_1p() + beta.ln_1p()
}

/// Compensation factor `[(c - v)/(c + v)]^(c/2vbar) · [1 - v²/c²]^(-3/2)`.
///
/// Unity at rest. This is both the denominator of the relativistic
/// acceleration (scaled by `m0`) and the feedback-linearizing gain.
pub fn relativistic_factor<T: Scalar>(v: T, params: &RocketParams<T>) -> Result<T> {
    check_speed_against(v, params.c())?;
    let exponent = ln_mass_ratio(v, params) - T::lit(1.5) * ln_one_minus_beta_sq(v, params.c());
    Ok(exponent.exp())
}

/// Classical rocket acceleration `a = -e^(v/vbar) (vbar/m0) dm/dt`.
pub fn classical_accel<T: Scalar>(v: T, mdot: T, params: &RocketParams<T>) -> Result<T> {
    params.require_model(false)?;
    check_finite("v", v)?;
    check_finite("mdot", mdot)?;
    let a = -(v / params.vbar()).exp() * (params.vbar() / params.m0()) * mdot;
    check_finite("acceleration", a)?;
    Ok(a)
}

/// Classical mass law `m = m0 e^(-v/vbar)`.
pub fn classical_mass<T: Scalar>(v: T, params: &RocketParams<T>) -> Result<T> {
    params.require_model(false)?;
    check_finite("v", v)?;
    Ok(params.m0() * (-v / params.vbar()).exp())
}

/// Earth-frame acceleration of the relativistic rocket in velocity form,
/// driven by the proper-frame mass rate `dm/dτ`.
pub fn rel_accel<T: Scalar>(v: T, mdot_tau: T, params: &RocketParams<T>) -> Result<T> {
    params.require_model(true)?;
    check_finite("mdot_tau", mdot_tau)?;
    let factor = relativistic_factor(v, params)?;
    Ok(-params.vbar() * mdot_tau / (params.m0() * factor))
}

/// Earth-frame acceleration in mass form,
/// `a = -8 vbar dm/dτ / (m [R^(vbar/c) + R^(-vbar/c)]³)` with `R = m / m0`.
///
/// Masses above `m0` are accepted; they correspond to negative velocities
/// reached by accreting mass.
pub fn rel_accel_mass_form<T: Scalar>(m: T, mdot_tau: T, params: &RocketParams<T>) -> Result<T> {
    params.require_model(true)?;
    check_finite("m", m)?;
    check_finite("mdot_tau", mdot_tau)?;
    if m <= T::zero() {
        return Err(DynamicsError::Domain {
            name: "m",
            value: m.as_f64(),
            reason: "mass must be positive",
        });
    }
    let exponent = (m / params.m0()).ln() / params.c_over_vbar();
    let bracket = exponent.exp() + (-exponent).exp();
    let eight = T::lit(8.0);
    Ok(-eight * params.vbar() * mdot_tau / (m * bracket.powi(3)))
}

/// Velocity reached when the mass ratio is `m / m0 = ratio`,
/// `v/c = (1 - R^(2vbar/c)) / (1 + R^(2vbar/c))`.
///
/// Ratios in `(0, 1]` give `v ∈ [0, c)`; ratios above one give negative
/// velocities.
pub fn velocity_from_mass_ratio<T: Scalar>(ratio: T, params: &RocketParams<T>) -> Result<T> {
    check_finite("ratio", ratio)?;
    if ratio <= T::zero() {
        return Err(DynamicsError::Domain {
            name: "ratio",
            value: ratio.as_f64(),
            reason: "mass ratio must be positive",
        });
    }
    // (1 - R^2k)/(1 + R^2k) = -tanh(k ln R)
    let beta = -(ratio.ln() / params.c_over_vbar()).tanh();
    // tanh saturates to ±1 in floating point; stay strictly below c
    let beta = beta.max(T::epsilon() - T::one()).min(T::one() - T::epsilon());
    Ok(params.c() * beta)
}

/// Mass ratio `m/m0 = [(c - v)/(c + v)]^(c / 2vbar)`; inverse of
/// [`velocity_from_mass_ratio`].
pub fn mass_ratio_from_velocity<T: Scalar>(v: T, params: &RocketParams<T>) -> Result<T> {
    check_speed_against(v, params.c())?;
    Ok(ln_mass_ratio(v, params).exp())
}

/// Time-dilation rate `dτ/dt = sqrt(1 - v²/c²)`.
pub fn proper_time_rate<T: Scalar>(v: T, c: T) -> Result<T> {
    check_speed_against(v, c)?;
    let beta = v / c;
    Ok(((T::one() - beta) * (T::one() + beta)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Model;
    use approx::assert_relative_eq;

    fn classical(m0: f64, vbar: f64) -> RocketParams<f64> {
        RocketParams::new(m0, vbar, 1e3, 0.0, Model::Classical).unwrap()
    }

    fn relativistic(m0: f64, vbar: f64) -> RocketParams<f64> {
        RocketParams::natural(m0, vbar, Model::Relativistic).unwrap()
    }

    #[test]
    fn classical_accel_examples() {
        assert_eq!(classical_accel(0.0, 0.0, &classical(2.0, 1.0)).unwrap(), 0.0);
        assert_relative_eq!(classical_accel(0.0, -1.0, &classical(2.0, 1.0)).unwrap(), 0.5);
        let v = std::f64::consts::LN_2;
        assert_relative_eq!(
            classical_accel(v, -1.0, &classical(2.0, 1.0)).unwrap(),
            1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn classical_accel_rejects_non_finite() {
        let p = classical(2.0, 1.0);
        assert!(matches!(
            classical_accel(f64::NAN, -1.0, &p),
            Err(DynamicsError::NonFinite { .. })
        ));
        assert!(classical_accel(0.0, f64::INFINITY, &p).is_err());
    }

    #[test]
    fn classical_mass_examples() {
        let p = classical(3.0, 2.0);
        assert_eq!(classical_mass(0.0, &p).unwrap(), 3.0);
        assert_relative_eq!(classical_mass(2.0, &p).unwrap(), 3.0 / std::f64::consts::E);
        assert_relative_eq!(
            classical_mass(2.0 * std::f64::consts::LN_2, &p).unwrap(),
            1.5,
            max_relative = 1e-15
        );
        assert!(classical_mass(1.0, &p).unwrap() > classical_mass(1.1, &p).unwrap());
    }

    #[test]
    fn rel_accel_examples() {
        let p = relativistic(1.0, 1.0);
        assert_eq!(rel_accel(0.0, -1.0, &p).unwrap(), 1.0);
        assert_relative_eq!(rel_accel(0.6, -1.0, &p).unwrap(), 1.024, max_relative = 1e-14);
        assert_eq!(rel_accel(0.3, 0.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn rel_accel_scales_with_c() {
        let p = RocketParams::photon(1.0, 3.0).unwrap();
        assert_relative_eq!(rel_accel(1.8, -1.0, &p).unwrap(), 3.0 * 1.024, max_relative = 1e-14);
    }

    #[test]
    fn rel_accel_speed_limit() {
        let p = relativistic(1.0, 1.0);
        assert!(matches!(
            rel_accel(1.0, -1.0, &p),
            Err(DynamicsError::SpeedLimit { .. })
        ));
        assert!(matches!(
            rel_accel(-1.5, -1.0, &p),
            Err(DynamicsError::SpeedLimit { .. })
        ));
    }

    #[test]
    fn model_mismatch_is_rejected() {
        assert!(matches!(
            rel_accel(0.0, -1.0, &classical(1.0, 1.0)),
            Err(DynamicsError::WrongModel { .. })
        ));
        assert!(classical_accel(0.0, -1.0, &relativistic(1.0, 1.0)).is_err());
    }

    #[test]
    fn mass_form_examples() {
        let p = relativistic(1.0, 1.0);
        assert_relative_eq!(rel_accel_mass_form(1.0, -1.0, &p).unwrap(), 1.0, max_relative = 1e-15);
        assert_eq!(rel_accel_mass_form(1.0, 0.0, &p).unwrap(), 0.0);
        let v = velocity_from_mass_ratio(0.5, &p).unwrap();
        assert_relative_eq!(
            rel_accel_mass_form(0.5, -1.0, &p).unwrap(),
            rel_accel(v, -1.0, &p).unwrap(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn mass_form_rejects_non_positive_mass() {
        let p = relativistic(1.0, 1.0);
        assert!(matches!(
            rel_accel_mass_form(0.0, -1.0, &p),
            Err(DynamicsError::Domain { name: "m", .. })
        ));
        assert!(rel_accel_mass_form(-1.0, -1.0, &p).is_err());
    }

    #[test]
    fn velocity_from_mass_ratio_examples() {
        let p = relativistic(1.0, 1.0);
        assert_eq!(velocity_from_mass_ratio(1.0, &p).unwrap(), 0.0);
        assert_relative_eq!(velocity_from_mass_ratio(0.5, &p).unwrap(), 0.6, max_relative = 1e-15);
        let half = relativistic(1.0, 0.5);
        assert_relative_eq!(
            velocity_from_mass_ratio(0.5, &half).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-15
        );
        assert!(velocity_from_mass_ratio(0.0, &p).is_err());
        assert!(velocity_from_mass_ratio(-0.5, &p).is_err());
        assert!(velocity_from_mass_ratio(1e-300, &p).unwrap() < 1.0);
    }

    #[test]
    fn mass_ratio_from_velocity_examples() {
        let p = relativistic(1.0, 1.0);
        assert_eq!(mass_ratio_from_velocity(0.0, &p).unwrap(), 1.0);
        assert_relative_eq!(mass_ratio_from_velocity(0.6, &p).unwrap(), 0.5, max_relative = 1e-15);
        let v = 0.9;
        let back = velocity_from_mass_ratio(mass_ratio_from_velocity(v, &p).unwrap(), &p).unwrap();
        assert_relative_eq!(back, v, max_relative = 1e-12);
        assert!(matches!(
            mass_ratio_from_velocity(1.0, &p),
            Err(DynamicsError::SpeedLimit { .. })
        ));
    }

    #[test]
    fn mass_ratio_does_not_underflow_for_slow_exhaust() {
        // c / 2vbar = 5e4: a naive powf would underflow to zero here
        let p = RocketParams::natural(1.0, 1e-5, Model::Relativistic).unwrap();
        let f: f64 = relativistic_factor(1e-3, &p).unwrap();
        assert!(f > 0.0 && f.is_finite());
        let r = mass_ratio_from_velocity(1e-3, &p).unwrap();
        assert_relative_eq!(r, (-100.0f64 - 1e-4 / 3.0).exp(), max_relative = 1e-10);
    }

    #[test]
    fn proper_time_rate_examples() {
        assert_eq!(proper_time_rate(0.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(proper_time_rate(0.6, 1.0).unwrap(), 0.8, max_relative = 1e-15);
        assert_relative_eq!(proper_time_rate(0.8, 1.0).unwrap(), 0.6, max_relative = 1e-15);
        assert_relative_eq!(proper_time_rate(-0.8 * 5.0, 5.0).unwrap(), 0.6, max_relative = 1e-15);
        assert!(proper_time_rate(1.0, 1.0).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let p = RocketParams::<f32>::natural(1.0, 1.0, Model::Photon).unwrap();
        let a = rel_accel(0.6f32, -1.0, &p).unwrap();
        assert!((a - 1.024).abs() < 1e-5);
        let v = velocity_from_mass_ratio(0.5f32, &p).unwrap();
        assert!((v - 0.6).abs() < 1e-6);
    }
}
