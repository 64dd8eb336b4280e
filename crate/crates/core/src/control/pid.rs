use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linearization::{compensator_gain, CompensatorGain};
use crate::params::{check_finite, RocketParams};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PIDGains<T> {
    pub kp: T,
    pub ki: T,
    pub kd: T,
    /// Symmetric clamp on the accumulated integral. `None` leaves it unbounded.
    #[serde(default)]
    pub integral_limit: Option<T>,
}

impl<T: Scalar> PIDGains<T> {
    pub fn new(kp: T, ki: T, kd: T) -> Self {
        Self {
            kp,
            ki,
            kd,
            integral_limit: None,
        }
    }

    pub fn with_integral_limit(mut self, limit: T) -> Self {
        self.integral_limit = Some(limit.abs());
        self
    }

    /// Textbook PID term `kp e + ki ∫e + kd de/dt`.
    pub fn virtual_input(&self, e: T, integral: T, e_dot: T) -> T {
        self.kp * e + self.ki * integral + self.kd * e_dot
    }

    pub fn clamp_integral(&self, integral: T) -> T {
        match self.integral_limit {
            Some(limit) => integral.max(-limit).min(limit),
            None => integral,
        }
    }
}

/// Controller memory threaded through successive [`pid_control`] calls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PIDState<T> {
    pub integral: T,
    pub prev_error: Option<T>,
    /// Position setpoint in the Earth frame.
    pub reference: T,
}

impl<T: Scalar> PIDState<T> {
    pub fn new(reference: T) -> Self {
        Self {
            integral: T::zero(),
            prev_error: None,
            reference,
        }
    }

    pub fn reset(&mut self) {
        self.integral = T::zero();
        self.prev_error = None;
    }

    pub fn error(&self, y: T) -> T {
        self.reference - y
    }
}

/// Compensator of the relativistic PID law, evaluated at the error rate:
/// `[(c - ė)/(c + ė)]^(c/2vbar) [1 - ė²/c²]^(-3/2)`.
///
/// Unity whenever `ė = 0`. For a constant reference `ė = -v`, so this is the
/// state-feedback gain mirrored in velocity.
pub fn pid_compensator<T: Scalar>(e_dot: T, params: &RocketParams<T>) -> Result<CompensatorGain<T>> {
    compensator_gain(e_dot, params)
}

/// One PID update over an Earth-time step `dt`.
///
/// The integral advances by the trapezoidal rule using the previous error
/// sample (the current one when there is none), is clamped if a limit is set,
/// and then feeds the compensated law. `e_dot` is the exact error rate,
/// `ṙ - v`.
pub fn pid_control<T: Scalar>(
    e: T,
    state: PIDState<T>,
    e_dot: T,
    gains: &PIDGains<T>,
    dt: T,
    params: &RocketParams<T>,
) -> Result<(T, PIDState<T>)> {
    check_finite("e", e)?;
    check_finite("dt", dt)?;
    let gain = pid_compensator(e_dot, params)?;
    let prev = state.prev_error.unwrap_or(e);
    let integral = gains.clamp_integral(state.integral + dt * (prev + e) * T::half());
    let u = gain.to_physical(gains.virtual_input(e, integral, e_dot));
    Ok((
        u,
        PIDState {
            integral,
            prev_error: Some(e),
            reference: state.reference,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::DynamicsError;
    use crate::params::Model;
    use approx::assert_relative_eq;

    fn photon() -> RocketParams<f64> {
        RocketParams::photon(1.0, 1.0).unwrap()
    }

    #[test]
    fn proportional_only_at_rest() {
        let (u, _) = pid_control(
            1.0,
            PIDState::new(1.0),
            0.0,
            &PIDGains::new(2.0, 0.0, 0.0),
            0.01,
            &photon(),
        )
        .unwrap();
        assert_eq!(u, 2.0);
    }

    #[test]
    fn compensator_at_negative_error_rate() {
        let (u, _) = pid_control(
            1.0,
            PIDState::new(1.0),
            -0.6,
            &PIDGains::new(1.0, 0.0, 0.0),
            0.01,
            &photon(),
        )
        .unwrap();
        assert_relative_eq!(u, 3.90625, max_relative = 1e-14);
    }

    #[test]
    fn zero_error_zero_output() {
        let (u, s) = pid_control(
            0.0,
            PIDState::new(0.0),
            0.0,
            &PIDGains::new(1.0, 1.0, 1.0),
            0.01,
            &photon(),
        )
        .unwrap();
        assert_eq!(u, 0.0);
        assert_eq!(s.integral, 0.0);
    }

    #[test]
    fn degenerates_to_textbook_pid_when_error_rate_vanishes() {
        let gains = PIDGains::new(1.3, 0.4, -0.8);
        let state = PIDState {
            integral: 0.25,
            prev_error: Some(0.5),
            reference: 1.0,
        };
        let params = RocketParams::natural(1.0, 0.3, Model::Relativistic).unwrap();
        let (u, next) = pid_control(0.7, state, 0.0, &gains, 0.1, &params).unwrap();
        assert_eq!(next.integral, 0.25 + 0.1 * (0.5 + 0.7) * 0.5);
        assert_eq!(u, gains.virtual_input(0.7, next.integral, 0.0));
        assert_eq!(pid_compensator(0.0, &params).unwrap().value(), 1.0);
    }

    #[test]
    fn trapezoidal_integral_of_linear_error_is_exact() {
        let gains = PIDGains::new(0.0, 1.0, 0.0);
        let params = photon();
        let mut state = PIDState::new(0.0);
        let dt = 0.125;
        for k in 0..=8 {
            let e = k as f64 * dt;
            state = pid_control(e, state, 0.0, &gains, dt, &params).unwrap().1;
        }
        assert_relative_eq!(state.integral, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn integral_clamp() {
        let gains = PIDGains::new(0.0, 1.0, 0.0).with_integral_limit(0.3);
        let mut state = PIDState::new(0.0);
        for _ in 0..100 {
            state = pid_control(1.0, state, 0.0, &gains, 0.1, &photon()).unwrap().1;
        }
        assert_eq!(state.integral, 0.3);
        state.reset();
        assert_eq!(state.integral, 0.0);
        assert_eq!(state.prev_error, None);
    }

    #[test]
    fn error_rate_speed_limit() {
        let res = pid_control(
            1.0,
            PIDState::new(1.0),
            -1.0,
            &PIDGains::new(1.0, 0.0, 0.0),
            0.01,
            &photon(),
        );
        assert!(matches!(res, Err(DynamicsError::SpeedLimit { .. })));
    }
}
