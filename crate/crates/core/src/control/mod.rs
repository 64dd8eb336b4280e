//! Feedback laws designed on the double integrator and mapped back onto the
//! rocket through the linearizing gain.

mod pid;
mod steering;

pub use pid::{pid_compensator, pid_control, PIDGains, PIDState};
pub use steering::{controllability_gramian, min_energy_steering, SteeringPlan};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{DynamicsError, Result};
use crate::linearization::{compensator_gain, to_physical};
use crate::params::{KinematicState, RocketParams};
use crate::scalar::Scalar;

/// State-feedback gain `K = [k1, k2]`, applied as `w = -K x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainVector<T> {
    pub k1: T,
    pub k2: T,
}

impl<T: Scalar> GainVector<T> {
    pub fn new(k1: T, k2: T) -> Self {
        Self { k1, k2 }
    }

    /// Virtual input `w = -K x`.
    pub fn virtual_input(&self, x: &KinematicState<T>) -> T {
        -(self.k1 * x.p + self.k2 * x.v)
    }

    /// Closed-loop matrix `A - B K` of the double integrator with input coefficient `b`.
    pub fn closed_loop(&self, b: T) -> [[T; 2]; 2] {
        [[T::zero(), T::one()], [-b * self.k1, -b * self.k2]]
    }
}

/// Gains placing the eigenvalues of `A - B K` at `poles`.
///
/// The closed loop has characteristic polynomial `s² + b k2 s + b k1`, so the
/// gains follow from matching it against `(s - p1)(s - p2)`.
pub fn place_poles<T: Scalar>(params: &RocketParams<T>, poles: [Complex<T>; 2]) -> Result<GainVector<T>> {
    let b = params.input_coefficient();
    if b == T::zero() || !b.is_finite() {
        return Err(DynamicsError::Uncontrollable { b: b.as_f64() });
    }
    let [p1, p2] = poles;
    for p in poles {
        if !(p.re.is_finite() && p.im.is_finite()) {
            return Err(DynamicsError::NonFinite {
                name: "pole",
                value: if p.re.is_finite() { p.im.as_f64() } else { p.re.as_f64() },
            });
        }
    }
    let both_real = p1.im == T::zero() && p2.im == T::zero();
    if !both_real && !is_conjugate(p1, p2) {
        return Err(DynamicsError::PolesNotConjugate(format!("{p1}, {p2}")));
    }
    let sum = p1.re + p2.re;
    let product = if both_real {
        p1.re * p2.re
    } else {
        p1.re * p1.re + p1.im * p1.im
    };
    Ok(GainVector {
        k1: product / b,
        k2: -sum / b,
    })
}

fn is_conjugate<T: Scalar>(a: Complex<T>, b: Complex<T>) -> bool {
    let scale = a.norm().max(b.norm()).max(T::one());
    let tol = T::lit(1e-12) * scale;
    (a.re - b.re).abs() <= tol && (a.im + b.im).abs() <= tol
}

/// State-feedback controller `u = g(v) · (-K x)`.
pub fn state_feedback<T: Scalar>(x: &KinematicState<T>, gains: &GainVector<T>, params: &RocketParams<T>) -> Result<T> {
    to_physical(gains.virtual_input(x), x.v, params)
}

/// Output-feedback map `w = l[y]`. Plain closures of `y` qualify; the presets
/// additionally read the measured rate `dy/dt`.
pub trait OutputLaw<T> {
    fn eval(&self, y: T, ydot: T) -> T;
}

impl<T, F> OutputLaw<T> for F
where
    F: Fn(T) -> T,
{
    fn eval(&self, y: T, _ydot: T) -> T {
        self(y)
    }
}

/// Ready-made output laws regulating `y` to `reference`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum OutputPreset<T> {
    /// `w = kp (r - y)`
    Proportional { kp: T, reference: T },
    /// `w = kp (r - y) - kd dy/dt`
    ProportionalDerivative { kp: T, kd: T, reference: T },
}

impl<T: Scalar> OutputLaw<T> for OutputPreset<T> {
    fn eval(&self, y: T, ydot: T) -> T {
        match *self {
            OutputPreset::Proportional { kp, reference } => kp * (reference - y),
            OutputPreset::ProportionalDerivative { kp, kd, reference } => kp * (reference - y) - kd * ydot,
        }
    }
}

/// Output-feedback controller `u = g(dy/dt) · l[y]`. The rate is the state
/// velocity, not a differenced output.
pub fn output_feedback<T: Scalar, L: OutputLaw<T> + ?Sized>(
    y: T,
    ydot: T,
    law: &L,
    params: &RocketParams<T>,
) -> Result<T> {
    let gain = compensator_gain(ydot, params)?;
    Ok(gain.to_physical(law.eval(y, ydot)))
}

/// `|v| < c` for relativistic models; every finite state is reachable classically.
pub fn is_relativistically_reachable<T: Scalar>(x: &KinematicState<T>, params: &RocketParams<T>) -> bool {
    if !x.v.is_finite() {
        return false;
    }
    !params.model().is_relativistic() || x.v.abs() < params.c()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Model;
    use approx::assert_relative_eq;

    fn params(m0: f64, vbar: f64) -> RocketParams<f64> {
        RocketParams::natural(m0, vbar, Model::Relativistic).unwrap()
    }

    fn real(a: f64, b: f64) -> [Complex<f64>; 2] {
        [Complex::new(a, 0.0), Complex::new(b, 0.0)]
    }

    #[test]
    fn place_poles_examples() {
        assert_eq!(
            place_poles(&params(1.0, 1.0), real(-1.0, -1.0)).unwrap(),
            GainVector::new(-1.0, -2.0)
        );
        assert_eq!(
            place_poles(&params(1.0, 1.0), real(-1.0, -2.0)).unwrap(),
            GainVector::new(-2.0, -3.0)
        );
        assert_eq!(
            place_poles(&params(0.5, 1.0), real(-1.0, -1.0)).unwrap(),
            GainVector::new(-0.5, -1.0)
        );
    }

    #[test]
    fn place_poles_complex_pair() {
        let k = place_poles(&params(1.0, 1.0), [Complex::new(-1.0, 2.0), Complex::new(-1.0, -2.0)]).unwrap();
        // s² + 2s + 5
        assert_eq!(k, GainVector::new(-5.0, -2.0));
    }

    #[test]
    fn place_poles_rejects_unpaired_complex() {
        let err = place_poles(&params(1.0, 1.0), [Complex::new(-1.0, 2.0), Complex::new(-1.0, 1.0)]).unwrap_err();
        assert!(matches!(err, DynamicsError::PolesNotConjugate(_)));
    }

    #[test]
    fn state_feedback_examples() {
        let p = params(1.0, 1.0);
        let k = GainVector::new(-1.0, -2.0);
        assert_eq!(state_feedback(&KinematicState::origin(), &k, &p).unwrap(), 0.0);
        assert_eq!(state_feedback(&KinematicState::new(1.0, 0.0), &k, &p).unwrap(), 1.0);
        let k = GainVector::new(0.0, 0.7);
        assert_relative_eq!(
            state_feedback(&KinematicState::new(0.0, 0.6), &k, &p).unwrap(),
            0.9765625 * (-0.7 * 0.6),
            max_relative = 1e-14
        );
        assert!(state_feedback(&KinematicState::new(0.0, 1.0), &k, &p).is_err());
    }

    #[test]
    fn state_feedback_is_to_physical_of_linear_law() {
        let p = params(1.0, 0.5);
        let k = GainVector::new(-0.3, -1.1);
        let x = KinematicState::new(0.4, -0.7);
        assert_eq!(
            state_feedback(&x, &k, &p).unwrap(),
            to_physical(-(k.k1 * x.p + k.k2 * x.v), x.v, &p).unwrap()
        );
    }

    #[test]
    fn output_feedback_examples() {
        let p = params(1.0, 1.0);
        assert_eq!(output_feedback(3.0, 0.2, &|_y: f64| 0.0, &p).unwrap(), 0.0);
        assert_eq!(output_feedback(2.0, 0.0, &|y: f64| -y, &p).unwrap(), -2.0);
        assert_relative_eq!(
            output_feedback(2.0, 0.6, &|y: f64| -y, &p).unwrap(),
            -1.953125,
            max_relative = 1e-14
        );
        assert!(output_feedback(2.0, 1.0, &|y: f64| -y, &p).is_err());
    }

    #[test]
    fn output_presets() {
        let prop = OutputPreset::Proportional {
            kp: 2.0,
            reference: 1.0,
        };
        assert_eq!(prop.eval(0.25, 9.0), 1.5);
        let pd = OutputPreset::ProportionalDerivative {
            kp: 2.0,
            kd: 0.5,
            reference: 1.0,
        };
        assert_eq!(pd.eval(0.25, 1.0), 1.0);
    }

    #[test]
    fn reachability() {
        let p = params(1.0, 1.0);
        assert!(is_relativistically_reachable(&KinematicState::new(0.0, 0.0), &p));
        assert!(!is_relativistically_reachable(&KinematicState::new(0.0, 1.1), &p));
        assert!(is_relativistically_reachable(&KinematicState::new(0.0, 0.999), &p));
        assert!(!is_relativistically_reachable(&KinematicState::new(0.0, -1.0), &p));
        let cl = p.with_model(Model::Classical).unwrap();
        assert!(is_relativistically_reachable(&KinematicState::new(0.0, 1.1), &cl));
    }
}
