//! Finite-horizon steering of the linearized plant with the minimum-energy
//! open-loop input.

use serde::Serialize;

use crate::error::{DynamicsError, Result};
use crate::params::{check_finite, KinematicState, RocketParams};
use crate::scalar::Scalar;

use super::is_relativistically_reachable;

/// Controllability Gramian of the double integrator over `[t0, t_end]`,
/// `b² [[Δ³/3, Δ²/2], [Δ²/2, Δ]]` with `Δ = t_end - t0`.
pub fn controllability_gramian<T: Scalar>(params: &RocketParams<T>, t0: T, t_end: T) -> Result<[[T; 2]; 2]> {
    check_finite("t0", t0)?;
    check_finite("T", t_end)?;
    if t_end <= t0 {
        return Err(DynamicsError::Domain {
            name: "T",
            value: t_end.as_f64(),
            reason: "horizon end must be after its start",
        });
    }
    let b = params.input_coefficient();
    if b == T::zero() {
        return Err(DynamicsError::Uncontrollable { b: b.as_f64() });
    }
    let d = t_end - t0;
    let b2 = b * b;
    let off = b2 * d * d * T::half();
    Ok([[b2 * d * d * d / T::lit(3.0), off], [off, b2 * d]])
}

/// Open-loop virtual input `w(s) = Bᵀ e^(Aᵀ(T - s)) λ` on `[t0, T]`, where
/// `λ = W⁻¹ (x_T - e^(A(T - t0)) x0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteeringPlan<T> {
    pub t0: T,
    pub t_end: T,
    /// `λ`, the Gramian-weighted terminal miss.
    pub coefficients: [T; 2],
    /// Input coefficient `b` of the plant the plan was designed for.
    pub b: T,
}

impl<T: Scalar> SteeringPlan<T> {
    /// Virtual input at time `s`; zero outside `[t0, T]`.
    pub fn input(&self, s: T) -> T {
        if s < self.t0 || s > self.t_end {
            return T::zero();
        }
        let [l0, l1] = self.coefficients;
        self.b * ((self.t_end - s) * l0 + l1)
    }

    /// The input is affine in time: `w(s) = slope · s + intercept` on the horizon.
    pub fn affine_form(&self) -> (T, T) {
        let [l0, l1] = self.coefficients;
        let slope = -self.b * l0;
        let intercept = self.b * (self.t_end * l0 + l1);
        (slope, intercept)
    }

    /// State of the double integrator at `s ∈ [t0, T]` under this plan,
    /// starting from `x0` at `t0`.
    pub fn linear_state(&self, x0: &KinematicState<T>, s: T) -> KinematicState<T> {
        let (slope, intercept) = self.affine_form();
        let h = s - self.t0;
        let w0 = slope * self.t0 + intercept;
        let two = T::two();
        let six = T::lit(6.0);
        // v' = b w0 + b slope (s - t0)
        let v = x0.v + self.b * (w0 * h + slope * h * h / two);
        let p = x0.p + x0.v * h + self.b * (w0 * h * h / two + slope * h * h * h / six);
        KinematicState::new(p, v)
    }

    pub fn energy(&self) -> T {
        // ∫ w² over the horizon of an affine w, Simpson-exact
        let (a, b) = (self.input(self.t0), self.input(self.t_end));
        let mid = self.input((self.t0 + self.t_end) * T::half());
        (self.t_end - self.t0) * (a * a + T::lit(4.0) * mid * mid + b * b) / T::lit(6.0)
    }
}

/// Minimum-energy input steering `x0` at `t0` to `xT` at `T`.
///
/// Both endpoints must satisfy `|v| < c` for relativistic models.
pub fn min_energy_steering<T: Scalar>(
    x0: &KinematicState<T>,
    x_target: &KinematicState<T>,
    t0: T,
    t_end: T,
    params: &RocketParams<T>,
) -> Result<SteeringPlan<T>> {
    for x in [x0, x_target] {
        check_finite("p", x.p)?;
        if !is_relativistically_reachable(x, params) {
            return Err(DynamicsError::Unreachable {
                speed: x.v.abs().as_f64(),
                c: params.c().as_f64(),
            });
        }
    }
    let w = controllability_gramian(params, t0, t_end)?;
    let det = w[0][0] * w[1][1] - w[0][1] * w[1][0];
    let inv = [[w[1][1] / det, -w[0][1] / det], [-w[1][0] / det, w[0][0] / det]];
    let d = t_end - t0;
    let miss = [x_target.p - (x0.p + d * x0.v), x_target.v - x0.v];
    let coefficients = [
        inv[0][0] * miss[0] + inv[0][1] * miss[1],
        inv[1][0] * miss[0] + inv[1][1] * miss[1],
    ];
    Ok(SteeringPlan {
        t0,
        t_end,
        coefficients,
        b: params.input_coefficient(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Model;
    use approx::assert_relative_eq;

    fn params(m0: f64, vbar: f64) -> RocketParams<f64> {
        RocketParams::new(m0, vbar, 10.0, 0.0, Model::Relativistic).unwrap()
    }

    /// Composite Simpson quadrature of `e^(A(T-s)) B Bᵀ e^(Aᵀ(T-s))`.
    fn gramian_by_quadrature(b: f64, t0: f64, t_end: f64) -> [[f64; 2]; 2] {
        let n = 2000;
        let h = (t_end - t0) / n as f64;
        let mut acc = [[0.0; 2]; 2];
        for i in 0..=n {
            let s = t0 + i as f64 * h;
            let weight = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            // e^(A(T-s)) B = [b (T - s), b]
            let g = [b * (t_end - s), b];
            for r in 0..2 {
                for c in 0..2 {
                    acc[r][c] += weight * g[r] * g[c];
                }
            }
        }
        acc.map(|row| row.map(|x| x * h / 3.0))
    }

    #[test]
    fn gramian_matches_quadrature() {
        for (m0, vbar, t0, t_end) in [(1.0, 1.0, 0.0, 1.0), (0.5, 1.0, 0.0, 1.0), (2.0, 3.0, 1.5, 4.0)] {
            let p = params(m0, vbar);
            let w = controllability_gramian(&p, t0, t_end).unwrap();
            let q = gramian_by_quadrature(p.input_coefficient(), t0, t_end);
            for r in 0..2 {
                for c in 0..2 {
                    assert_relative_eq!(w[r][c], q[r][c], max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn gramian_examples() {
        let w = controllability_gramian(&params(1.0, 1.0), 0.0, 1.0).unwrap();
        assert_relative_eq!(w[0][0], 1.0 / 3.0);
        assert_eq!(w[0][1], 0.5);
        assert_eq!(w[1][0], 0.5);
        assert_eq!(w[1][1], 1.0);
        let w2 = controllability_gramian(&params(0.5, 1.0), 0.0, 1.0).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert_relative_eq!(w2[r][c], 4.0 * w[r][c]);
            }
        }
        let tiny = controllability_gramian(&params(1.0, 1.0), 0.0, 1e-9).unwrap();
        assert!(tiny.iter().flatten().all(|x| x.abs() < 1e-8));
        assert!(controllability_gramian(&params(1.0, 1.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn steering_unit_move() {
        let p = params(1.0, 1.0);
        let plan =
            min_energy_steering(&KinematicState::origin(), &KinematicState::new(1.0, 0.0), 0.0, 1.0, &p).unwrap();
        for s in [0.0, 0.1, 0.5, 0.77, 1.0] {
            assert!((plan.input(s) - (12.0 * s - 6.0)).abs() <= 1e-12);
        }
        let end = plan.linear_state(&KinematicState::origin(), 1.0);
        assert!((end.p - 1.0).abs() < 1e-12 && end.v.abs() < 1e-12);
    }

    #[test]
    fn steering_already_at_target_is_zero() {
        let x = KinematicState::new(0.3, 0.0);
        let plan = min_energy_steering(&x, &x, 0.0, 2.0, &params(1.0, 1.0)).unwrap();
        assert_eq!(plan.input(1.0), 0.0);
        assert_eq!(plan.energy(), 0.0);
    }

    #[test]
    fn steering_rejects_superluminal_endpoints() {
        let p = RocketParams::natural(1.0, 1.0, Model::Relativistic).unwrap();
        let err =
            min_energy_steering(&KinematicState::origin(), &KinematicState::new(0.0, 1.1), 0.0, 1.0, &p).unwrap_err();
        assert!(matches!(err, DynamicsError::Unreachable { .. }));
    }
}
