//! Input transformation that turns either rocket plant into the double
//! integrator `p' = v, v' = b w` with `b = -vbar/m0`.

use serde::Serialize;

use crate::dynamics::relativistic_factor;
use crate::error::Result;
use crate::params::{check_finite, Model, RocketParams};
use crate::scalar::Scalar;

/// Multiplier `g` in `u = g · w`. Strictly positive wherever it is defined.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct CompensatorGain<T>(T);

impl<T: Scalar> CompensatorGain<T> {
    pub fn value(self) -> T {
        self.0
    }

    pub fn to_physical(self, w: T) -> T {
        self.0 * w
    }

    pub fn to_virtual(self, u: T) -> T {
        u / self.0
    }
}

/// Linearizing gain at velocity `v`.
///
/// Classical: `e^(-v/vbar)`. Relativistic and photon:
/// `[(c - v)/(c + v)]^(c/2vbar) [1 - v²/c²]^(-3/2)`, where the photon
/// exponent is exactly `1/2`.
pub fn compensator_gain<T: Scalar>(v: T, params: &RocketParams<T>) -> Result<CompensatorGain<T>> {
    let g = match params.model() {
        Model::Classical => {
            check_finite("v", v)?;
            (-v / params.vbar()).exp()
        }
        Model::Relativistic | Model::Photon => relativistic_factor(v, params)?,
    };
    Ok(CompensatorGain(g))
}

/// Physical mass rate commanded by the virtual input `w`.
pub fn to_physical<T: Scalar>(w: T, v: T, params: &RocketParams<T>) -> Result<T> {
    check_finite("w", w)?;
    Ok(compensator_gain(v, params)?.to_physical(w))
}

/// Virtual input corresponding to the physical mass rate `u`.
pub fn to_virtual<T: Scalar>(u: T, v: T, params: &RocketParams<T>) -> Result<T> {
    check_finite("u", u)?;
    Ok(compensator_gain(v, params)?.to_virtual(u))
}

/// The linear plant `x' = A x + B w`, `y = C x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearStateSpace<T> {
    pub a: [[T; 2]; 2],
    pub b: [T; 2],
    pub c: [T; 2],
}

impl<T: Scalar> LinearStateSpace<T> {
    /// Input coefficient, the second entry of `B`.
    pub fn input_coefficient(&self) -> T {
        self.b[1]
    }

    /// State transition `e^(A dt) = [[1, dt], [0, 1]]`.
    pub fn transition(&self, dt: T) -> [[T; 2]; 2] {
        [[T::one(), dt], [T::zero(), T::one()]]
    }

    pub fn derivative(&self, x: [T; 2], w: T) -> [T; 2] {
        [
            self.a[0][0] * x[0] + self.a[0][1] * x[1] + self.b[0] * w,
            self.a[1][0] * x[0] + self.a[1][1] * x[1] + self.b[1] * w,
        ]
    }

    pub fn output(&self, x: [T; 2]) -> T {
        self.c[0] * x[0] + self.c[1] * x[1]
    }
}

/// `A = [[0, 1], [0, 0]]`, `B = [0, -vbar/m0]`, `C = [1, 0]`.
pub fn linearized_system<T: Scalar>(params: &RocketParams<T>) -> LinearStateSpace<T> {
    let (zero, one) = (T::zero(), T::one());
    LinearStateSpace {
        a: [[zero, one], [zero, zero]],
        b: [zero, params.input_coefficient()],
        c: [one, zero],
    }
}
