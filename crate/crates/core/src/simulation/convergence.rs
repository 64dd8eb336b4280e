use serde::Serialize;

use super::{SimError, Trajectory};
use crate::scalar::Scalar;

/// Terminal-state errors at `dt` and `dt/2` measured against a `dt/16` run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceStudy<T> {
    pub dt: T,
    pub error_coarse: T,
    pub error_fine: T,
    /// `error_coarse / error_fine`; about 16 for a fourth-order method.
    pub ratio: T,
    /// Both errors sit at the rounding floor, so the ratio carries no information.
    pub at_rounding_floor: bool,
    /// Some run ended on a terminal event before the horizon.
    pub truncated: bool,
}

impl<T: Scalar> ConvergenceStudy<T> {
    /// Accepts observed ratios in `[12, 20]`, or errors already at the rounding floor.
    pub fn is_fourth_order(&self) -> bool {
        !self.truncated && (self.at_rounding_floor || (self.ratio >= T::lit(12.0) && self.ratio <= T::lit(20.0)))
    }
}

fn terminal_distance<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>) -> T {
    match (a.terminal(), b.terminal()) {
        (Some(x), Some(y)) => {
            let (x, y) = (&x.state, &y.state);
            (x.kin.p - y.kin.p)
                .abs()
                .max((x.kin.v - y.kin.v).abs())
                .max((x.m - y.m).abs())
                .max((x.clock.tau - y.clock.tau).abs())
        }
        _ => T::nan(),
    }
}

/// Runs `simulate` at `dt`, `dt/2` and `dt/16` and compares terminal states.
pub fn convergence_study<T, F>(dt: T, simulate: F) -> Result<ConvergenceStudy<T>, SimError>
where
    T: Scalar,
    F: Fn(T) -> Result<Trajectory<T>, SimError>,
{
    let coarse = simulate(dt)?;
    let fine = simulate(dt * T::half())?;
    let reference = simulate(dt / T::lit(16.0))?;
    let truncated = [&coarse, &fine, &reference]
        .iter()
        .any(|t| t.terminal_event().is_some());
    let error_coarse = terminal_distance(&coarse, &reference);
    let error_fine = terminal_distance(&fine, &reference);
    let scale = reference
        .terminal()
        .map(|s| {
            let st = &s.state;
            st.kin
                .p
                .abs()
                .max(st.kin.v.abs())
                .max(st.m.abs())
                .max(st.clock.tau.abs())
        })
        .unwrap_or(T::one())
        .max(T::one());
    // Rounding in the reference run grows with its step count.
    let steps = T::lit(reference.samples.len() as f64);
    let floor = (steps * T::epsilon()).max(T::lit(1e-12)) * scale;
    Ok(ConvergenceStudy {
        dt,
        error_coarse,
        error_fine,
        ratio: error_coarse / error_fine,
        at_rounding_floor: error_coarse <= floor,
        truncated,
    })
}
