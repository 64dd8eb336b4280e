//! Scenario documents: JSON with unknown keys rejected, validated into
//! library types.

use relrocket::control::{OutputPreset, PIDGains};
use relrocket::simulation::{InputChannel, Mode, PidCompensation, Schedule, SimConfig, SimState, TrajectoryFormat};
use relrocket::{Complex, KinematicState, Model, RocketParams, SPEED_OF_LIGHT_SI};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: &str, message: impl Into<String>) -> Self {
        ConfigError::Validation {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub params: ParamsDoc,
    #[serde(default)]
    pub si_units: bool,
    #[serde(default)]
    pub initial: Option<InitialDoc>,
    pub controller: ControllerDoc,
    pub sim: SimDoc,
    #[serde(default)]
    pub output: Option<OutputDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    pub m0: f64,
    /// Required unless `model` is `photon`, where it defaults to `c`.
    #[serde(default)]
    pub vbar: Option<f64>,
    /// Overrides the unit regime's light speed.
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub m_dry: f64,
    #[serde(default = "default_model")]
    pub model: Model,
}

fn default_model() -> Model {
    Model::Relativistic
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDoc {
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub v: f64,
    /// Defaults to the closed-form mass at `v` when started from rest with `m0`.
    #[serde(default)]
    pub m: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControllerDoc {
    /// Either `poles` (designed by pole placement) or explicit `gains`.
    StateFeedback {
        #[serde(default)]
        poles: Option<[[f64; 2]; 2]>,
        #[serde(default)]
        gains: Option<[f64; 2]>,
    },
    OutputFeedback {
        preset: OutputPresetName,
        kp: f64,
        #[serde(default)]
        kd: Option<f64>,
        #[serde(default)]
        reference: f64,
    },
    Pid {
        kp: f64,
        ki: f64,
        kd: f64,
        reference: f64,
        #[serde(default)]
        reference_rate: f64,
        #[serde(default)]
        integral_limit: Option<f64>,
        #[serde(default)]
        compensation: PidCompensation,
    },
    OpenLoop {
        schedule: Schedule<f64>,
        #[serde(default)]
        channel: InputChannel,
    },
    Steering {
        #[serde(default)]
        x0: Option<[f64; 2]>,
        x_target: [f64; 2],
        #[serde(default)]
        t0: f64,
        t_end: f64,
    },
    Coast {},
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputPresetName {
    Proportional,
    ProportionalDerivative,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimDoc {
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub horizon: f64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_abort_epsilon")]
    pub abort_epsilon: f64,
    #[serde(default = "default_residual_tolerance")]
    pub residual_tolerance: f64,
    #[serde(default)]
    pub zoh_period: Option<f64>,
    /// Bound on the terminal distance to the controller's target.
    #[serde(default = "default_target_tolerance")]
    pub target_tolerance: f64,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_abort_epsilon() -> f64 {
    1e-9
}

fn default_residual_tolerance() -> f64 {
    1e-8
}

fn default_target_tolerance() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDoc {
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub format: TrajectoryFormat,
}

/// Validated controller choice. State-feedback poles and steering endpoints
/// are kept as given; design happens at execution time.
#[derive(Debug, Clone, PartialEq)]
pub enum ControllerSpec {
    StateFeedbackPoles([Complex<f64>; 2]),
    StateFeedbackGains([f64; 2]),
    OutputFeedback(OutputPreset<f64>),
    Pid {
        gains: PIDGains<f64>,
        reference: f64,
        reference_rate: f64,
        compensation: PidCompensation,
    },
    OpenLoop {
        schedule: Schedule<f64>,
        channel: InputChannel,
    },
    Steering {
        x0: KinematicState<f64>,
        x_target: KinematicState<f64>,
        t0: f64,
        t_end: f64,
    },
    Coast,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: RocketParams<f64>,
    pub initial: SimState<f64>,
    pub controller: ControllerSpec,
    pub sim: SimConfig<f64>,
    pub target_tolerance: f64,
    pub output: OutputDoc,
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    doc.validate()
}

fn finite(field: &str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::invalid(field, "must be finite"))
    }
}

impl ScenarioDoc {
    pub fn validate(self) -> Result<Scenario, ConfigError> {
        let params = self.build_params()?;
        let controller = self.build_controller(&params)?;

        let mut kin = match &self.initial {
            Some(init) => KinematicState::new(finite("initial.p", init.p)?, finite("initial.v", init.v)?),
            None => KinematicState::origin(),
        };
        if let ControllerSpec::Steering { x0, .. } = &controller {
            if self.initial.is_some() && (x0.p != kin.p || x0.v != kin.v) {
                return Err(ConfigError::invalid(
                    "controller.x0",
                    "conflicts with `initial`; give the start state once",
                ));
            }
            kin = *x0;
        }
        if params.model().is_relativistic() && params.check_speed(kin.v).is_err() {
            return Err(ConfigError::invalid(
                "initial.v",
                format!("|v| = {} is not below c = {}", kin.v.abs(), params.c()),
            ));
        }
        let mut initial = SimState::consistent(kin.p, kin.v, &params)
            .map_err(|e| ConfigError::invalid("initial.v", e.to_string()))?;
        if let Some(m) = self.initial.as_ref().and_then(|i| i.m) {
            if !(m.is_finite() && m > 0.0) {
                return Err(ConfigError::invalid("initial.m", "must be positive and finite"));
            }
            initial.m = m;
        }

        let sim = SimConfig {
            dt: self.sim.dt,
            horizon: self.sim.horizon,
            mode: self.sim.mode,
            abort_epsilon: self.sim.abort_epsilon,
            residual_tolerance: self.sim.residual_tolerance,
            zoh_period: self.sim.zoh_period,
        };
        sim.validate().map_err(|e| {
            let field = match e.to_string() {
                s if s.contains("dt =") => "sim.dt",
                s if s.contains("horizon") => "sim.horizon",
                s if s.contains("abort_epsilon") => "sim.abort_epsilon",
                s if s.contains("residual_tolerance") => "sim.residual_tolerance",
                s if s.contains("zoh_period") => "sim.zoh_period",
                _ => "sim",
            };
            ConfigError::invalid(field, e.to_string())
        })?;
        if sim.mode == Mode::Physical && initial.m <= params.m_dry() {
            return Err(ConfigError::invalid(
                "initial.m",
                "must exceed params.m_dry in physical mode",
            ));
        }
        if !(self.sim.target_tolerance.is_finite() && self.sim.target_tolerance > 0.0) {
            return Err(ConfigError::invalid("sim.target_tolerance", "must be positive"));
        }

        Ok(Scenario {
            params,
            initial,
            controller,
            sim,
            target_tolerance: self.sim.target_tolerance,
            output: self.output.unwrap_or_default(),
        })
    }

    fn build_params(&self) -> Result<RocketParams<f64>, ConfigError> {
        let p = &self.params;
        let c = match p.c {
            Some(c) => finite("params.c", c)?,
            None if self.si_units => SPEED_OF_LIGHT_SI,
            None => 1.0,
        };
        if c <= 0.0 {
            return Err(ConfigError::invalid("params.c", "must be positive"));
        }
        let vbar = match (p.vbar, p.model) {
            (Some(v), _) => finite("params.vbar", v)?,
            (None, Model::Photon) => c,
            (None, _) => return Err(ConfigError::invalid("params.vbar", "required unless model is photon")),
        };
        if p.model == Model::Photon && vbar != c {
            return Err(ConfigError::invalid(
                "params.vbar",
                format!("a photon rocket ejects light, so vbar must equal c = {c} (got {vbar})"),
            ));
        }
        if vbar <= 0.0 {
            return Err(ConfigError::invalid("params.vbar", "must be positive"));
        }
        if vbar > c {
            return Err(ConfigError::invalid("params.vbar", format!("{vbar} exceeds c = {c}")));
        }
        let m0 = finite("params.m0", p.m0)?;
        if m0 <= 0.0 {
            return Err(ConfigError::invalid("params.m0", "must be positive"));
        }
        let m_dry = finite("params.m_dry", p.m_dry)?;
        if m_dry < 0.0 || m_dry >= m0 {
            return Err(ConfigError::invalid("params.m_dry", "must satisfy 0 <= m_dry < m0"));
        }
        RocketParams::new(m0, vbar, c, m_dry, p.model).map_err(|e| ConfigError::invalid("params", e.to_string()))
    }

    fn build_controller(&self, params: &RocketParams<f64>) -> Result<ControllerSpec, ConfigError> {
        let spec = match &self.controller {
            ControllerDoc::StateFeedback { poles, gains } => match (poles, gains) {
                (Some(poles), None) => {
                    let [a, b] = *poles;
                    for (i, x) in a.iter().chain(b.iter()).enumerate() {
                        finite(&format!("controller.poles[{}]", i / 2), *x)?;
                    }
                    let poles = [Complex::new(a[0], a[1]), Complex::new(b[0], b[1])];
                    relrocket::control::place_poles(params, poles)
                        .map_err(|e| ConfigError::invalid("controller.poles", e.to_string()))?;
                    ControllerSpec::StateFeedbackPoles(poles)
                }
                (None, Some(gains)) => {
                    finite("controller.gains", gains[0])?;
                    finite("controller.gains", gains[1])?;
                    ControllerSpec::StateFeedbackGains(*gains)
                }
                _ => {
                    return Err(ConfigError::invalid(
                        "controller",
                        "state_feedback needs exactly one of `poles` or `gains`",
                    ))
                }
            },
            ControllerDoc::OutputFeedback {
                preset,
                kp,
                kd,
                reference,
            } => {
                let kp = finite("controller.kp", *kp)?;
                let reference = finite("controller.reference", *reference)?;
                match (preset, kd) {
                    (OutputPresetName::Proportional, None) => {
                        ControllerSpec::OutputFeedback(OutputPreset::Proportional { kp, reference })
                    }
                    (OutputPresetName::Proportional, Some(_)) => {
                        return Err(ConfigError::invalid(
                            "controller.kd",
                            "not used by the proportional preset",
                        ))
                    }
                    (OutputPresetName::ProportionalDerivative, Some(kd)) => {
                        ControllerSpec::OutputFeedback(OutputPreset::ProportionalDerivative {
                            kp,
                            kd: finite("controller.kd", *kd)?,
                            reference,
                        })
                    }
                    (OutputPresetName::ProportionalDerivative, None) => {
                        return Err(ConfigError::invalid("controller.kd", "required by the PD preset"))
                    }
                }
            }
            ControllerDoc::Pid {
                kp,
                ki,
                kd,
                reference,
                reference_rate,
                integral_limit,
                compensation,
            } => {
                let mut gains = PIDGains::new(
                    finite("controller.kp", *kp)?,
                    finite("controller.ki", *ki)?,
                    finite("controller.kd", *kd)?,
                );
                if let Some(limit) = integral_limit {
                    let limit = finite("controller.integral_limit", *limit)?;
                    if limit <= 0.0 {
                        return Err(ConfigError::invalid("controller.integral_limit", "must be positive"));
                    }
                    gains = gains.with_integral_limit(limit);
                }
                let reference_rate = finite("controller.reference_rate", *reference_rate)?;
                if params.model().is_relativistic() && reference_rate.abs() >= params.c() {
                    return Err(ConfigError::invalid("controller.reference_rate", "must be below c"));
                }
                ControllerSpec::Pid {
                    gains,
                    reference: finite("controller.reference", *reference)?,
                    reference_rate,
                    compensation: *compensation,
                }
            }
            ControllerDoc::OpenLoop { schedule, channel } => {
                let ok = match schedule {
                    Schedule::Constant { value } => value.is_finite(),
                    Schedule::Sine {
                        amplitude,
                        omega,
                        phase,
                        offset,
                    } => [amplitude, omega, phase, offset].iter().all(|x| x.is_finite()),
                    Schedule::Steps { steps } => {
                        steps.iter().all(|(t, v)| t.is_finite() && v.is_finite())
                            && steps.windows(2).all(|w| w[0].0 <= w[1].0)
                    }
                };
                if !ok {
                    return Err(ConfigError::invalid(
                        "controller.schedule",
                        "values must be finite and steps sorted by time",
                    ));
                }
                ControllerSpec::OpenLoop {
                    schedule: schedule.clone(),
                    channel: *channel,
                }
            }
            ControllerDoc::Steering {
                x0,
                x_target,
                t0,
                t_end,
            } => {
                let x0 = match x0 {
                    Some(x) => KinematicState::new(finite("controller.x0", x[0])?, finite("controller.x0", x[1])?),
                    None => self
                        .initial
                        .as_ref()
                        .map_or(KinematicState::origin(), |i| KinematicState::new(i.p, i.v)),
                };
                let x_target = KinematicState::new(
                    finite("controller.x_target", x_target[0])?,
                    finite("controller.x_target", x_target[1])?,
                );
                let (t0, t_end) = (finite("controller.t0", *t0)?, finite("controller.t_end", *t_end)?);
                if t0 != 0.0 {
                    return Err(ConfigError::invalid(
                        "controller.t0",
                        "runs start at t = 0, so the plan must too",
                    ));
                }
                relrocket::control::min_energy_steering(&x0, &x_target, t0, t_end, params)
                    .map_err(|e| ConfigError::invalid("controller.x_target", e.to_string()))?;
                ControllerSpec::Steering {
                    x0,
                    x_target,
                    t0,
                    t_end,
                }
            }
            ControllerDoc::Coast {} => ControllerSpec::Coast,
        };
        Ok(spec)
    }
}
