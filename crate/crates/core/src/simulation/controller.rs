//! Input providers evaluated inside the integration loop.

use serde::{Deserialize, Serialize};

use crate::control::{pid_compensator, GainVector, OutputLaw, PIDGains, SteeringPlan};
use crate::error::Result;
use crate::linearization::compensator_gain;
use crate::params::{KinematicState, RocketParams};
use crate::scalar::Scalar;

/// Input applied over one integration stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Command<T> {
    /// Physical mass rate (`dm/dτ` for relativistic models, `dm/dt` classically).
    pub u: T,
    /// Virtual input designed on the double integrator.
    pub w: T,
    /// Compensator gain relating the two, `u = gain · w`.
    pub gain: T,
}

impl<T: Scalar> Command<T> {
    pub fn zero() -> Self {
        Self {
            u: T::zero(),
            w: T::zero(),
            gain: T::one(),
        }
    }

    /// Maps a virtual input through the linearizing gain at `v`.
    pub fn from_virtual(w: T, v: T, params: &RocketParams<T>) -> Result<Self> {
        let gain = compensator_gain(v, params)?.value();
        Ok(Self { u: gain * w, w, gain })
    }

    /// Wraps a physical mass rate, recording its virtual equivalent at `v`.
    pub fn from_physical(u: T, v: T, params: &RocketParams<T>) -> Result<Self> {
        let gain = compensator_gain(v, params)?.value();
        Ok(Self { u, w: u / gain, gain })
    }
}

/// A control law evaluated at every integration stage.
///
/// Controllers may carry one scalar of internal state (the PID integral),
/// which the integrator advances alongside the plant using [`Controller::aux_rate`].
pub trait Controller<T: Scalar> {
    fn command(&self, t: T, x: &KinematicState<T>, aux: T, params: &RocketParams<T>) -> Result<Command<T>>;

    fn aux_rate(&self, _t: T, _x: &KinematicState<T>, _aux: T) -> T {
        T::zero()
    }

    fn aux_initial(&self) -> T {
        T::zero()
    }

    /// Projection applied to the internal state after every step.
    fn clamp_aux(&self, aux: T) -> T {
        aux
    }
}

impl<T: Scalar, C: Controller<T> + ?Sized> Controller<T> for &C {
    fn command(&self, t: T, x: &KinematicState<T>, aux: T, params: &RocketParams<T>) -> Result<Command<T>> {
        (**self).command(t, x, aux, params)
    }

    fn aux_rate(&self, t: T, x: &KinematicState<T>, aux: T) -> T {
        (**self).aux_rate(t, x, aux)
    }

    fn aux_initial(&self) -> T {
        (**self).aux_initial()
    }

    fn clamp_aux(&self, aux: T) -> T {
        (**self).clamp_aux(aux)
    }
}

impl<T: Scalar, C: Controller<T> + ?Sized> Controller<T> for Box<C> {
    fn command(&self, t: T, x: &KinematicState<T>, aux: T, params: &RocketParams<T>) -> Result<Command<T>> {
        (**self).command(t, x, aux, params)
    }

    fn aux_rate(&self, t: T, x: &KinematicState<T>, aux: T) -> T {
        (**self).aux_rate(t, x, aux)
    }

    fn aux_initial(&self) -> T {
        (**self).aux_initial()
    }

    fn clamp_aux(&self, aux: T) -> T {
        (**self).clamp_aux(aux)
    }
}

/// Coasting: no mass flow.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroInput;

impl<T: Scalar> Controller<T> for ZeroInput {
    fn command(&self, _t: T, _x: &KinematicState<T>, _aux: T, _params: &RocketParams<T>) -> Result<Command<T>> {
        Ok(Command::zero())
    }
}

/// `u = g(v) · (-K x)`.
#[derive(Debug, Clone, Copy)]
pub struct StateFeedback<T> {
    pub gains: GainVector<T>,
}

impl<T: Scalar> Controller<T> for StateFeedback<T> {
    fn command(&self, _t: T, x: &KinematicState<T>, _aux: T, params: &RocketParams<T>) -> Result<Command<T>> {
        Command::from_virtual(self.gains.virtual_input(x), x.v, params)
    }
}

/// `u = g(dy/dt) · l[y]`.
#[derive(Debug, Clone, Copy)]
pub struct OutputFeedback<L> {
    pub law: L,
}

impl<T: Scalar, L: OutputLaw<T>> Controller<T> for OutputFeedback<L> {
    fn command(&self, _t: T, x: &KinematicState<T>, _aux: T, params: &RocketParams<T>) -> Result<Command<T>> {
        Command::from_virtual(self.law.eval(x.p, x.v), x.v, params)
    }
}

/// Where the PID compensator is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PidCompensation {
    /// At the error rate `ė`, as the PID law is usually written.
    #[default]
    ErrorRate,
    /// At the state velocity `v = ṙ - ė`, which makes the loop exactly linear.
    Velocity,
}

/// Continuous-time PID on the position error against the reference
/// `r(t) = reference + reference_rate · t`.
///
/// The integral is carried as controller state and integrated in Earth time
/// together with the plant; the derivative uses the exact rate `ṙ - v`.
#[derive(Debug, Clone, Copy)]
pub struct Pid<T> {
    pub gains: PIDGains<T>,
    pub reference: T,
    pub reference_rate: T,
    pub compensation: PidCompensation,
}

impl<T: Scalar> Pid<T> {
    pub fn new(gains: PIDGains<T>, reference: T) -> Self {
        Self {
            gains,
            reference,
            reference_rate: T::zero(),
            compensation: PidCompensation::ErrorRate,
        }
    }

    pub fn reference_at(&self, t: T) -> T {
        self.reference + self.reference_rate * t
    }
}

impl<T: Scalar> Controller<T> for Pid<T> {
    fn command(&self, t: T, x: &KinematicState<T>, aux: T, params: &RocketParams<T>) -> Result<Command<T>> {
        let e = self.reference_at(t) - x.p;
        let e_dot = self.reference_rate - x.v;
        let w = self.gains.virtual_input(e, aux, e_dot);
        let gain = match self.compensation {
            PidCompensation::ErrorRate => pid_compensator(e_dot, params)?.value(),
            PidCompensation::Velocity => compensator_gain(x.v, params)?.value(),
        };
        Ok(Command { u: gain * w, w, gain })
    }

    fn aux_rate(&self, t: T, x: &KinematicState<T>, _aux: T) -> T {
        self.reference_at(t) - x.p
    }

    fn clamp_aux(&self, aux: T) -> T {
        self.gains.clamp_integral(aux)
    }
}

/// Time profile of an open-loop input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule<T> {
    Constant {
        value: T,
    },
    /// `amplitude · sin(omega t + phase) + offset`
    Sine {
        amplitude: T,
        omega: T,
        #[serde(default)]
        phase: T,
        #[serde(default)]
        offset: T,
    },
    /// Piecewise-constant steps `(start_time, value)`, sorted by time; zero
    /// before the first step.
    Steps {
        steps: Vec<(T, T)>,
    },
}

impl<T: Scalar> Schedule<T> {
    pub fn value(&self, t: T) -> T {
        match self {
            Schedule::Constant { value } => *value,
            Schedule::Sine {
                amplitude,
                omega,
                phase,
                offset,
            } => *amplitude * (*omega * t + *phase).sin() + *offset,
            Schedule::Steps { steps } => steps
                .iter()
                .take_while(|(start, _)| *start <= t)
                .last()
                .map_or(T::zero(), |(_, value)| *value),
        }
    }
}

/// Whether an open-loop schedule specifies `w` or `u` directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputChannel {
    /// Virtual input, mapped through the linearizing gain.
    #[default]
    Virtual,
    /// Physical mass rate applied as is.
    Physical,
}

#[derive(Debug, Clone)]
pub struct OpenLoop<T> {
    pub schedule: Schedule<T>,
    pub channel: InputChannel,
}

impl<T: Scalar> Controller<T> for OpenLoop<T> {
    fn command(&self, t: T, x: &KinematicState<T>, _aux: T, params: &RocketParams<T>) -> Result<Command<T>> {
        let value = self.schedule.value(t);
        match self.channel {
            InputChannel::Virtual => Command::from_virtual(value, x.v, params),
            InputChannel::Physical => Command::from_physical(value, x.v, params),
        }
    }
}

/// Executes a [`SteeringPlan`] through the linearizing gain; zero input
/// outside the plan's horizon.
#[derive(Debug, Clone, Copy)]
pub struct Steering<T> {
    pub plan: SteeringPlan<T>,
}

impl<T: Scalar> Controller<T> for Steering<T> {
    fn command(&self, t: T, x: &KinematicState<T>, _aux: T, params: &RocketParams<T>) -> Result<Command<T>> {
        Command::from_virtual(self.plan.input(t), x.v, params)
    }
}

/// Replays a fixed command; used for zero-order-hold sampling.
pub(crate) struct Held<'a, C: ?Sized, T> {
    pub inner: &'a C,
    pub command: Command<T>,
}

impl<T: Scalar, C: Controller<T> + ?Sized> Controller<T> for Held<'_, C, T> {
    fn command(&self, _t: T, _x: &KinematicState<T>, _aux: T, _params: &RocketParams<T>) -> Result<Command<T>> {
        Ok(self.command)
    }

    fn aux_rate(&self, t: T, x: &KinematicState<T>, aux: T) -> T {
        self.inner.aux_rate(t, x, aux)
    }

    fn clamp_aux(&self, aux: T) -> T {
        self.inner.clamp_aux(aux)
    }
}
