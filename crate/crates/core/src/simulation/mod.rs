//! Fixed-step closed-loop integration in Earth time with proper time and
//! mass carried alongside the kinematic state.

mod controller;
mod convergence;
mod io;

pub use controller::{
    Command, Controller, InputChannel, OpenLoop, OutputFeedback, Pid, PidCompensation, Schedule, StateFeedback,
    Steering, ZeroInput,
};
pub use convergence::{convergence_study, ConvergenceStudy};
pub use io::{format_value, TrajectoryFormat, TrajectoryIoError, CSV_HEADER};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::is_relativistically_reachable;
use crate::dynamics::{classical_accel, ln_mass_ratio, mass_ratio_from_velocity, proper_time_rate, rel_accel};
use crate::error::DynamicsError;
use crate::params::{check_speed_against, FrameClock, KinematicState, Model, RocketParams};
use crate::scalar::Scalar;

use controller::Held;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Joint state spanning both frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimState<T> {
    pub clock: FrameClock<T>,
    pub kin: KinematicState<T>,
    /// Current total mass.
    pub m: T,
}

impl<T: Scalar> SimState<T> {
    pub fn new(kin: KinematicState<T>, m: T) -> Self {
        Self {
            clock: FrameClock::zero(),
            kin,
            m,
        }
    }

    /// Rest at the origin with the full initial mass.
    pub fn at_rest(params: &RocketParams<T>) -> Self {
        Self::new(KinematicState::origin(), params.m0())
    }

    /// State at `(p, v)` whose mass follows the closed-form mass law from rest.
    pub fn consistent(p: T, v: T, params: &RocketParams<T>) -> Result<Self, DynamicsError> {
        let ratio = match params.model() {
            Model::Classical => (-v / params.vbar()).exp(),
            Model::Relativistic | Model::Photon => mass_ratio_from_velocity(v, params)?,
        };
        Ok(Self::new(KinematicState::new(p, v), params.m0() * ratio))
    }
}

/// Time derivatives of `(p, v, m, τ)` with respect to Earth time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives<T> {
    pub dp: T,
    pub dv: T,
    pub dm: T,
    pub dtau: T,
}

/// Right-hand side of the plant.
///
/// Relativistic: `dv/dt` from the velocity-form rocket equation with `u = dm/dτ`,
/// `dτ/dt = sqrt(1 - v²/c²)` and `dm/dt = u dτ/dt`. Classical: `u = dm/dt`
/// and `dτ/dt = 1`.
pub fn derivatives<T: Scalar>(
    state: &SimState<T>,
    u: T,
    params: &RocketParams<T>,
) -> Result<Derivatives<T>, DynamicsError> {
    let v = state.kin.v;
    match params.model() {
        Model::Classical => Ok(Derivatives {
            dp: v,
            dv: classical_accel(v, u, params)?,
            dm: u,
            dtau: T::one(),
        }),
        Model::Relativistic | Model::Photon => {
            let dtau = proper_time_rate(v, params.c())?;
            Ok(Derivatives {
                dp: v,
                dv: rel_accel(v, u, params)?,
                dm: u * dtau,
                dtau,
            })
        }
    }
}

/// Deviation of the tracked mass from the closed-form mass law, measured
/// relative to the trajectory's starting point:
/// `m/m_initial - R(v)/R(v_initial)`.
pub fn consistency_residual<T: Scalar>(
    state: &SimState<T>,
    params: &RocketParams<T>,
    v_initial: T,
    m_initial: T,
) -> Result<T, DynamicsError> {
    let ln_ratio = match params.model() {
        Model::Classical => -(state.kin.v - v_initial) / params.vbar(),
        Model::Relativistic | Model::Photon => {
            check_speed_against(state.kin.v, params.c())?;
            check_speed_against(v_initial, params.c())?;
            ln_mass_ratio(state.kin.v, params) - ln_mass_ratio(v_initial, params)
        }
    };
    Ok(state.m / m_initial - ln_ratio.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Signed mass rates, exactly as the rocket equations allow.
    #[default]
    Ideal,
    /// Mass can only be ejected and the run stops at the dry mass.
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig<T> {
    pub dt: T,
    pub horizon: T,
    pub mode: Mode,
    /// Runs abort once `|v| >= c (1 - abort_epsilon)`.
    pub abort_epsilon: T,
    /// Bound on `|consistency_residual|` used by the invariant monitors.
    pub residual_tolerance: T,
    /// Zero-order-hold sample period. `None` evaluates the controller at
    /// every integration stage.
    pub zoh_period: Option<T>,
}

impl<T: Scalar> SimConfig<T> {
    pub fn new(dt: T, horizon: T) -> Self {
        Self {
            dt,
            horizon,
            mode: Mode::Ideal,
            abort_epsilon: T::lit(1e-9),
            residual_tolerance: T::lit(1e-8),
            zoh_period: None,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_dt(mut self, dt: T) -> Self {
        self.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let finite = [self.dt, self.horizon, self.abort_epsilon, self.residual_tolerance]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(SimError::Config("non-finite simulation setting".into()));
        }
        if self.dt <= T::zero() {
            return Err(SimError::Config(format!("dt = {} must be positive", self.dt)));
        }
        if self.horizon < self.dt {
            return Err(SimError::Config(format!(
                "horizon = {} must be at least dt = {}",
                self.horizon, self.dt
            )));
        }
        if self.abort_epsilon <= T::zero() || self.abort_epsilon > T::lit(1e-6) {
            return Err(SimError::Config(format!(
                "abort_epsilon = {} must lie in (0, 1e-6]",
                self.abort_epsilon
            )));
        }
        if self.residual_tolerance <= T::zero() {
            return Err(SimError::Config("residual_tolerance must be positive".into()));
        }
        if let Some(period) = self.zoh_period {
            if !(period.is_finite() && period >= self.dt) {
                return Err(SimError::Config(format!(
                    "zoh_period = {period} must be finite and at least dt"
                )));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round().to_usize().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    SpeedLimitAbort,
    MassDepleted,
    InputClamped,
}

impl EventKind {
    pub fn is_terminal(self) -> bool {
        !matches!(self, EventKind::InputClamped)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event<T> {
    pub t: T,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Sample<T> {
    pub state: SimState<T>,
    /// `NaN` (`null` in JSON) when the controller could not be evaluated.
    #[serde(with = "io::nullable")]
    pub u: T,
    #[serde(with = "io::nullable")]
    pub w: T,
    #[serde(with = "io::nullable")]
    pub gain: T,
    #[serde(with = "io::nullable")]
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Trajectory<T> {
    pub samples: Vec<Sample<T>>,
    pub events: Vec<Event<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn terminal(&self) -> Option<&Sample<T>> {
        self.samples.last()
    }

    pub fn terminal_event(&self) -> Option<&Event<T>> {
        self.events.iter().find(|e| e.kind.is_terminal())
    }

    pub fn max_abs_residual(&self) -> T {
        self.samples
            .iter()
            .map(|s| s.residual.abs())
            .fold(T::zero(), |acc, r| if r.is_nan() { r } else { acc.max(r) })
    }

    pub fn max_abs_velocity(&self) -> T {
        self.samples.iter().map(|s| s.state.kin.v.abs()).fold(T::zero(), T::max)
    }
}

/// Outcome of a single integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step<T> {
    pub state: SimState<T>,
    pub aux: T,
    /// Whether the Physical-mode clamp bound at any stage.
    pub clamped: bool,
}

const STATE_DIM: usize = 5;

fn unpack<T: Scalar>(y: &[T; STATE_DIM], clock: FrameClock<T>) -> SimState<T> {
    SimState {
        clock: FrameClock { t: clock.t, tau: y[3] },
        kin: KinematicState::new(y[0], y[1]),
        m: y[2],
    }
}

fn stage<T: Scalar, C: Controller<T> + ?Sized>(
    controller: &C,
    t: T,
    y: &[T; STATE_DIM],
    params: &RocketParams<T>,
    mode: Mode,
) -> Result<([T; STATE_DIM], bool), DynamicsError> {
    let state = unpack(y, FrameClock { t, tau: y[3] });
    let mut u = controller.command(t, &state.kin, y[4], params)?.u;
    let mut clamped = false;
    if mode == Mode::Physical && u > T::zero() {
        u = T::zero();
        clamped = true;
    }
    let d = derivatives(&state, u, params)?;
    let aux_rate = controller.aux_rate(t, &state.kin, y[4]);
    Ok(([d.dp, d.dv, d.dm, d.dtau, aux_rate], clamped))
}

/// One classical Runge–Kutta step over `(p, v, m, τ)` plus the controller's
/// internal state, re-evaluating the controller at every stage. In Physical
/// mode a commanded `u > 0` is replaced by zero.
pub fn step_rk4<T: Scalar, C: Controller<T> + ?Sized>(
    state: &SimState<T>,
    aux: T,
    controller: &C,
    dt: T,
    params: &RocketParams<T>,
    mode: Mode,
) -> Result<Step<T>, DynamicsError> {
    let t = state.clock.t;
    let y0 = [state.kin.p, state.kin.v, state.m, state.clock.tau, aux];
    let half = dt * T::half();
    let offset = |y: &[T; STATE_DIM], k: &[T; STATE_DIM], h: T| {
        let mut out = *y;
        for i in 0..STATE_DIM {
            out[i] = y[i] + h * k[i];
        }
        out
    };
    let (k1, c1) = stage(controller, t, &y0, params, mode)?;
    let (k2, c2) = stage(controller, t + half, &offset(&y0, &k1, half), params, mode)?;
    let (k3, c3) = stage(controller, t + half, &offset(&y0, &k2, half), params, mode)?;
    let (k4, c4) = stage(controller, t + dt, &offset(&y0, &k3, dt), params, mode)?;
    let two = T::two();
    let sixth = dt / T::lit(6.0);
    let mut y = y0;
    for i in 0..STATE_DIM {
        y[i] = y0[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
    }
    let next = unpack(&y, FrameClock { t: t + dt, tau: y[3] });
    Ok(Step {
        state: next,
        aux: controller.clamp_aux(y[4]),
        clamped: c1 || c2 || c3 || c4,
    })
}

fn sample_at<T: Scalar>(
    state: SimState<T>,
    command: Option<Command<T>>,
    params: &RocketParams<T>,
    mode: Mode,
    start: &SimState<T>,
) -> Sample<T> {
    let nan = T::nan();
    let (mut u, w, gain) = command.map_or((nan, nan, nan), |c| (c.u, c.w, c.gain));
    if mode == Mode::Physical && u > T::zero() {
        u = T::zero();
    }
    let residual = consistency_residual(&state, params, start.kin.v, start.m).unwrap_or(nan);
    Sample {
        state,
        u,
        w,
        gain,
        residual,
    }
}

/// Integrates the closed loop over `config.horizon`.
///
/// The trajectory holds the initial sample plus one per step. A speed-limit
/// crossing or (in Physical mode) reaching the dry mass ends the run with a
/// terminal event and a partial trajectory; clamping is logged each time it
/// starts binding.
pub fn run_closed_loop<T: Scalar, C: Controller<T> + ?Sized>(
    params: &RocketParams<T>,
    config: &SimConfig<T>,
    initial: SimState<T>,
    controller: &C,
) -> Result<Trajectory<T>, SimError> {
    config.validate()?;
    if !is_relativistically_reachable(&initial.kin, params) {
        return Err(DynamicsError::Unreachable {
            speed: initial.kin.v.abs().as_f64(),
            c: params.c().as_f64(),
        }
        .into());
    }
    params.check_speed(initial.kin.v)?;
    if !(initial.m > T::zero() && initial.m.is_finite()) {
        return Err(SimError::Config(format!("initial mass {} must be positive", initial.m)));
    }
    if config.mode == Mode::Physical && initial.m <= params.m_dry() {
        return Err(SimError::Config(format!(
            "initial mass {} must exceed the dry mass {}",
            initial.m,
            params.m_dry()
        )));
    }

    let steps = config.steps();
    let speed_limit = params.c() * (T::one() - config.abort_epsilon);
    let relativistic = params.model().is_relativistic();
    let mut trajectory = Trajectory {
        samples: Vec::with_capacity(steps + 1),
        events: Vec::new(),
    };

    let mut state = initial;
    let t_start = initial.clock.t;
    let mut aux = controller.aux_initial();
    let mut clamping = false;
    let mut held: Option<Command<T>> = None;
    let mut next_sample_time = t_start;

    for k in 0..=steps {
        let command = match config.zoh_period {
            Some(period) => {
                if held.is_none() || state.clock.t >= next_sample_time - config.dt * T::lit(1e-9) {
                    held = controller.command(state.clock.t, &state.kin, aux, params).ok();
                    next_sample_time = next_sample_time + period;
                }
                held
            }
            None => controller.command(state.clock.t, &state.kin, aux, params).ok(),
        };
        trajectory
            .samples
            .push(sample_at(state, command, params, config.mode, &initial));
        if k == steps {
            break;
        }

        let result = match (config.zoh_period, held) {
            (Some(_), Some(cmd)) => {
                let hold = Held {
                    inner: controller,
                    command: cmd,
                };
                step_rk4(&state, aux, &hold, config.dt, params, config.mode)
            }
            _ => step_rk4(&state, aux, controller, config.dt, params, config.mode),
        };
        let t_next = t_start + T::from_usize(k + 1).expect("step index fits scalar") * config.dt;
        let step = match result {
            Ok(step) => step,
            Err(DynamicsError::SpeedLimit { .. }) => {
                trajectory.events.push(Event {
                    t: t_next,
                    kind: EventKind::SpeedLimitAbort,
                });
                break;
            }
            Err(e) => return Err(e.into()),
        };

        if step.clamped && !clamping {
            trajectory.events.push(Event {
                t: state.clock.t,
                kind: EventKind::InputClamped,
            });
        }
        clamping = step.clamped;

        let mut next = step.state;
        next.clock.t = t_next;
        if relativistic && (next.kin.v.is_nan() || next.kin.v.abs() >= speed_limit) {
            trajectory.events.push(Event {
                t: t_next,
                kind: EventKind::SpeedLimitAbort,
            });
            break;
        }
        if config.mode == Mode::Physical && (next.m.is_nan() || next.m <= params.m_dry()) {
            trajectory.events.push(Event {
                t: t_next,
                kind: EventKind::MassDepleted,
            });
            break;
        }
        if !(next.kin.p.is_finite() && next.kin.v.is_finite() && next.m.is_finite()) {
            return Err(SimError::Dynamics(DynamicsError::NonFinite {
                name: "state",
                value: next.kin.v.as_f64(),
            }));
        }
        state = next;
        aux = step.aux;
    }
    Ok(trajectory)
}

/// Drives the double integrator `p' = v, v' = b w` with the controller's
/// virtual input, as a reference for the nonlinear run under the same law.
///
/// Returns the kinematic state at every sample time; stops early if the
/// controller cannot be evaluated (for instance once the linear velocity
/// reaches `c`).
pub fn run_linearized<T: Scalar, C: Controller<T> + ?Sized>(
    params: &RocketParams<T>,
    config: &SimConfig<T>,
    initial: &KinematicState<T>,
    controller: &C,
) -> Result<Vec<KinematicState<T>>, SimError> {
    config.validate()?;
    let b = params.input_coefficient();
    let dt = config.dt;
    let steps = config.steps();
    let rhs = |t: T, y: &[T; 3]| -> Result<[T; 3], DynamicsError> {
        let x = KinematicState::new(y[0], y[1]);
        let w = controller.command(t, &x, y[2], params)?.w;
        Ok([y[1], b * w, controller.aux_rate(t, &x, y[2])])
    };
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = [initial.p, initial.v, controller.aux_initial()];
    out.push(*initial);
    let half = dt * T::half();
    let two = T::two();
    for k in 0..steps {
        let t = T::from_usize(k).expect("step index fits scalar") * dt;
        let shifted = |k: &[T; 3], h: T| [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]];
        let stages = (|| {
            let k1 = rhs(t, &y)?;
            let k2 = rhs(t + half, &shifted(&k1, half))?;
            let k3 = rhs(t + half, &shifted(&k2, half))?;
            let k4 = rhs(t + dt, &shifted(&k3, dt))?;
            Ok::<_, DynamicsError>([k1, k2, k3, k4])
        })();
        let Ok([k1, k2, k3, k4]) = stages else { break };
        for i in 0..3 {
            y[i] = y[i] + dt / T::lit(6.0) * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
        }
        y[2] = controller.clamp_aux(y[2]);
        out.push(KinematicState::new(y[0], y[1]));
    }
    Ok(out)
}
