//! Design, simulation and verification of a parsed [`Scenario`].

use relrocket::control::{min_energy_steering, place_poles, GainVector, PIDGains, SteeringPlan};
use relrocket::dynamics::{classical_accel, rel_accel};
use relrocket::linearization::{linearized_system, to_physical, to_virtual, LinearStateSpace};
use relrocket::simulation::{
    convergence_study, run_closed_loop, run_linearized, Controller, Event, EventKind, Mode, OpenLoop, OutputFeedback,
    Pid, Sample, SimConfig, SimError, StateFeedback, Steering, Trajectory, ZeroInput,
};
use relrocket::{KinematicState, Model, RocketParams};
use serde::Serialize;

use crate::config::{ControllerSpec, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_TERMINAL: i32 = 2;

const ROUND_TRIP_TOLERANCE: f64 = 1e-12;
const CLASSICAL_LIMIT_TOLERANCE: f64 = 1e-4;
const LINEARIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct SteeringDesign {
    pub plan: SteeringPlan<f64>,
    /// `w(s) = slope · s + intercept` on the horizon.
    pub slope: f64,
    pub intercept: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Design {
    pub linear_system: LinearStateSpace<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gains: Option<GainVector<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pid: Option<PIDGains<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steering: Option<SteeringDesign>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub detail: String,
}

impl Check {
    fn measured(name: &'static str, measured: f64, threshold: f64, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            measured: Some(measured),
            threshold: Some(threshold),
            detail: detail.into(),
        }
    }

    fn skipped(name: &'static str, detail: impl Into<String>) -> Self {
        Self {
            name,
            verdict: Verdict::Skipped,
            measured: None,
            threshold: None,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSummary {
    pub model: Model,
    pub m0: f64,
    pub vbar: f64,
    pub c: f64,
    pub m_dry: f64,
    pub dt: f64,
    pub horizon: f64,
    pub mode: Mode,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioSummary,
    pub design: Design,
    pub terminal: Option<Sample<f64>>,
    pub events: Vec<Event<f64>>,
    pub checks: Vec<Check>,
    pub exit_code: i32,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let s = &self.scenario;
        let _ = writeln!(
            out,
            "scenario: model={} m0={} vbar={} c={} dt={} horizon={} mode={:?}",
            s.model.name(),
            s.m0,
            s.vbar,
            s.c,
            s.dt,
            s.horizon,
            s.mode
        );
        if let Some(k) = &self.design.gains {
            let _ = writeln!(out, "gains: k1={} k2={}", k.k1, k.k2);
        }
        if let Some(pid) = &self.design.pid {
            let _ = writeln!(out, "pid: kp={} ki={} kd={}", pid.kp, pid.ki, pid.kd);
        }
        if let Some(st) = &self.design.steering {
            let _ = writeln!(
                out,
                "steering: w(s) = {} s + {} on [{}, {}], energy {}",
                st.slope, st.intercept, st.plan.t0, st.plan.t_end, st.energy
            );
        }
        if let Some(t) = &self.terminal {
            let st = &t.state;
            let _ = writeln!(
                out,
                "terminal: t={} tau={} p={} v={} m={}",
                st.clock.t, st.clock.tau, st.kin.p, st.kin.v, st.m
            );
        }
        for e in &self.events {
            let _ = writeln!(out, "event: {:?} at t={}", e.kind, e.t);
        }
        for c in &self.checks {
            let verdict = match c.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
                Verdict::Skipped => "SKIP",
            };
            let _ = write!(out, "[{verdict}] {}", c.name);
            if let (Some(m), Some(t)) = (c.measured, c.threshold) {
                let _ = write!(out, ": measured {m:e} vs {t:e}");
            }
            if !c.detail.is_empty() {
                let _ = write!(out, " ({})", c.detail);
            }
            out.push('\n');
        }
        let _ = writeln!(out, "exit code: {}", self.exit_code);
        out
    }
}

/// Design output plus the controller that realizes it.
pub struct Built {
    pub design: Design,
    pub controller: Box<dyn Controller<f64>>,
    /// Where the controller is meant to drive the state, and when.
    pub target: Option<(KinematicState<f64>, f64)>,
}

pub fn design(scenario: &Scenario) -> anyhow::Result<Built> {
    let params = &scenario.params;
    let mut design = Design {
        linear_system: linearized_system(params),
        gains: None,
        pid: None,
        steering: None,
    };
    let horizon = scenario.sim.horizon;
    let (controller, target): (Box<dyn Controller<f64>>, _) = match &scenario.controller {
        ControllerSpec::StateFeedbackPoles(poles) => {
            let gains = place_poles(params, *poles)?;
            design.gains = Some(gains);
            (
                Box::new(StateFeedback { gains }),
                Some((KinematicState::origin(), horizon)),
            )
        }
        ControllerSpec::StateFeedbackGains([k1, k2]) => {
            let gains = GainVector::new(*k1, *k2);
            design.gains = Some(gains);
            (
                Box::new(StateFeedback { gains }),
                Some((KinematicState::origin(), horizon)),
            )
        }
        ControllerSpec::OutputFeedback(preset) => {
            let reference = match *preset {
                relrocket::control::OutputPreset::Proportional { reference, .. } => reference,
                relrocket::control::OutputPreset::ProportionalDerivative { reference, .. } => reference,
            };
            (
                Box::new(OutputFeedback { law: *preset }),
                Some((KinematicState::new(reference, 0.0), horizon)),
            )
        }
        ControllerSpec::Pid {
            gains,
            reference,
            reference_rate,
            compensation,
        } => {
            design.pid = Some(*gains);
            let target = (*reference_rate == 0.0).then(|| (KinematicState::new(*reference, 0.0), horizon));
            (
                Box::new(Pid {
                    gains: *gains,
                    reference: *reference,
                    reference_rate: *reference_rate,
                    compensation: *compensation,
                }),
                target,
            )
        }
        ControllerSpec::OpenLoop { schedule, channel } => (
            Box::new(OpenLoop {
                schedule: schedule.clone(),
                channel: *channel,
            }),
            None,
        ),
        ControllerSpec::Steering {
            x0,
            x_target,
            t0,
            t_end,
        } => {
            let plan = min_energy_steering(x0, x_target, *t0, *t_end, params)?;
            let (slope, intercept) = plan.affine_form();
            design.steering = Some(SteeringDesign {
                plan,
                slope,
                intercept,
                energy: plan.energy(),
            });
            (Box::new(Steering { plan }), Some((*x_target, *t_end)))
        }
        ControllerSpec::Coast => (Box::new(ZeroInput), None),
    };
    Ok(Built {
        design,
        controller,
        target,
    })
}

pub struct Execution {
    pub report: RunReport,
    pub trajectory: Trajectory<f64>,
}

fn summary(scenario: &Scenario) -> ScenarioSummary {
    let p = &scenario.params;
    ScenarioSummary {
        model: p.model(),
        m0: p.m0(),
        vbar: p.vbar(),
        c: p.c(),
        m_dry: p.m_dry(),
        dt: scenario.sim.dt,
        horizon: scenario.sim.horizon,
        mode: scenario.sim.mode,
    }
}

fn simulate_with(scenario: &Scenario, built: &Built, dt: f64) -> Result<Trajectory<f64>, SimError> {
    let config = SimConfig { dt, ..scenario.sim };
    run_closed_loop(&scenario.params, &config, scenario.initial, built.controller.as_ref())
}

/// Designs the controller, runs the closed loop and checks the
/// trajectory-level invariants.
pub fn execute(scenario: &Scenario) -> anyhow::Result<Execution> {
    let built = design(scenario)?;
    let trajectory = simulate_with(scenario, &built, scenario.sim.dt)?;
    let mut checks = trajectory_checks(scenario, &built, &trajectory);
    checks.push(Check::skipped("linearization_exactness", "computed by `verify`"));
    checks.push(Check::skipped("convergence_order", "computed by `verify`"));
    let exit_code = if trajectory.terminal_event().is_some() {
        EXIT_TERMINAL
    } else {
        EXIT_OK
    };
    Ok(Execution {
        report: RunReport {
            scenario: summary(scenario),
            design: built.design,
            terminal: trajectory.terminal().copied(),
            events: trajectory.events.clone(),
            checks,
            exit_code,
        },
        trajectory,
    })
}

/// [`execute`] plus the invariant suite that needs extra runs.
pub fn verify(scenario: &Scenario) -> anyhow::Result<Execution> {
    let built = design(scenario)?;
    let trajectory = simulate_with(scenario, &built, scenario.sim.dt)?;
    let mut checks = trajectory_checks(scenario, &built, &trajectory);
    checks.push(round_trip_check(&scenario.params, &trajectory));
    checks.push(classical_limit_check(&scenario.params));
    checks.push(linearization_check(scenario, &built, &trajectory)?);
    let study = convergence_study(scenario.sim.dt, |dt| simulate_with(scenario, &built, dt))?;
    checks.push(Check::measured(
        "convergence_order",
        study.ratio,
        16.0,
        study.is_fourth_order(),
        if study.truncated {
            "a refinement run ended on a terminal event".to_string()
        } else if study.at_rounding_floor {
            format!(
                "errors at rounding floor ({:e}, {:e})",
                study.error_coarse, study.error_fine
            )
        } else {
            format!(
                "terminal error {:e} at dt, {:e} at dt/2; accepted ratio [12, 20]",
                study.error_coarse, study.error_fine
            )
        },
    ));
    let failed = checks.iter().any(|c| c.verdict == Verdict::Fail);
    let exit_code = if failed || trajectory.terminal_event().is_some() {
        EXIT_TERMINAL
    } else {
        EXIT_OK
    };
    Ok(Execution {
        report: RunReport {
            scenario: summary(scenario),
            design: built.design,
            terminal: trajectory.terminal().copied(),
            events: trajectory.events.clone(),
            checks,
            exit_code,
        },
        trajectory,
    })
}

fn trajectory_checks(scenario: &Scenario, built: &Built, traj: &Trajectory<f64>) -> Vec<Check> {
    let params = &scenario.params;
    let relativistic = params.model().is_relativistic();
    let mut checks = Vec::new();

    if relativistic {
        let max_beta = traj.max_abs_velocity() / params.c();
        let aborted = traj.events.iter().any(|e| e.kind == EventKind::SpeedLimitAbort);
        checks.push(Check::measured(
            "speed_limit",
            max_beta,
            1.0,
            max_beta < 1.0 && !aborted,
            if aborted {
                "run aborted at the speed limit"
            } else {
                "max |v|/c"
            },
        ));
        let residual = traj.max_abs_residual();
        let tol = scenario.sim.residual_tolerance;
        checks.push(Check::measured(
            "consistency_residual",
            residual,
            tol,
            residual <= tol,
            "max |m/m_0 - R(v)/R(v_0)|",
        ));
    } else {
        checks.push(Check::skipped("speed_limit", "classical model"));
        checks.push(Check::skipped("consistency_residual", "classical model"));
    }

    if scenario.sim.mode == Mode::Physical {
        let monotone = traj.samples.windows(2).all(|w| w[1].state.m <= w[0].state.m);
        let above_dry = traj.samples.iter().all(|s| s.state.m > params.m_dry());
        let min_mass = traj.samples.iter().map(|s| s.state.m).fold(f64::INFINITY, f64::min);
        checks.push(Check::measured(
            "mass_monotonicity",
            min_mass,
            params.m_dry(),
            monotone && above_dry,
            if monotone {
                "minimum mass vs dry mass"
            } else {
                "mass increased"
            },
        ));
    } else {
        checks.push(Check::skipped("mass_monotonicity", "ideal mode permits mass gain"));
    }

    let lag = traj
        .samples
        .iter()
        .map(|s| s.state.clock.tau - s.state.clock.t)
        .fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-12 * scenario.sim.horizon.max(1.0);
    checks.push(Check::measured(
        "proper_time_lag",
        lag,
        slack,
        lag <= slack,
        "max (tau - t)",
    ));

    match built.target {
        Some((target, at)) => {
            let index = (at / scenario.sim.dt).round() as usize;
            match traj.samples.get(index) {
                Some(sample) => {
                    let kin = sample.state.kin;
                    let miss = (kin.p - target.p).hypot(kin.v - target.v);
                    checks.push(Check::measured(
                        "target",
                        miss,
                        scenario.target_tolerance,
                        miss <= scenario.target_tolerance,
                        format!("distance to ({}, {}) at t = {}", target.p, target.v, at),
                    ));
                }
                None => checks.push(Check::measured(
                    "target",
                    f64::NAN,
                    scenario.target_tolerance,
                    false,
                    format!("trajectory ended before t = {at}"),
                )),
            }
        }
        None => checks.push(Check::skipped("target", "controller has no fixed target")),
    }
    checks
}

fn round_trip_check(params: &RocketParams<f64>, traj: &Trajectory<f64>) -> Check {
    let mut worst: f64 = 0.0;
    for s in &traj.samples {
        let (w, v) = (s.w, s.state.kin.v);
        if !w.is_finite() || w == 0.0 {
            continue;
        }
        match to_physical(w, v, params).and_then(|u| to_virtual(u, v, params)) {
            Ok(back) => worst = worst.max(((back - w) / w).abs()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    Check::measured(
        "diffeomorphism_round_trip",
        worst,
        ROUND_TRIP_TOLERANCE,
        worst <= ROUND_TRIP_TOLERANCE,
        "max relative |to_virtual(to_physical(w)) - w| along the trajectory",
    )
}

fn classical_limit_check(params: &RocketParams<f64>) -> Check {
    if !params.model().is_relativistic() {
        return Check::skipped("classical_limit", "classical model");
    }
    let Ok(classical) = params.with_model(Model::Classical) else {
        return Check::skipped("classical_limit", "parameters have no classical counterpart");
    };
    let mut worst: f64 = 0.0;
    for beta in [1e-4, 1e-3] {
        let v = (beta * params.c()).min(10.0 * params.vbar());
        for v in [v, -v] {
            let rel = rel_accel(v, -1.0, params);
            let cl = classical_accel(v, -1.0, &classical);
            match (rel, cl) {
                (Ok(r), Ok(c)) => worst = worst.max(((r - c) / c).abs()),
                _ => worst = f64::INFINITY,
            }
        }
    }
    Check::measured(
        "classical_limit",
        worst,
        CLASSICAL_LIMIT_TOLERANCE,
        worst <= CLASSICAL_LIMIT_TOLERANCE,
        "relative gap between relativistic and classical acceleration at |v|/c <= 1e-3",
    )
}

fn linearization_check(scenario: &Scenario, built: &Built, traj: &Trajectory<f64>) -> anyhow::Result<Check> {
    if scenario.sim.zoh_period.is_some() {
        return Ok(Check::skipped(
            "linearization_exactness",
            "zero-order hold breaks exact linearization",
        ));
    }
    let linear = run_linearized(
        &scenario.params,
        &scenario.sim,
        &scenario.initial.kin,
        built.controller.as_ref(),
    )?;
    let scale = linear.iter().map(|x| x.p.abs().max(x.v.abs())).fold(1.0f64, f64::max);
    let mut worst: f64 = 0.0;
    for (lin, s) in linear.iter().zip(&traj.samples) {
        worst = worst.max((lin.p - s.state.kin.p).abs().max((lin.v - s.state.kin.v).abs()));
    }
    let complete = linear.len() == traj.samples.len();
    let threshold = LINEARIZATION_TOLERANCE * scale;
    Ok(Check::measured(
        "linearization_exactness",
        worst,
        threshold,
        complete && worst <= threshold,
        if complete {
            "max state gap to the double integrator under the same law"
        } else {
            "runs ended at different times"
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_scenario;

    fn scenario(text: &str) -> Scenario {
        parse_scenario(text).unwrap()
    }

    const REGULATION: &str = r#"{
        "params": {"m0": 1, "vbar": 1},
        "initial": {"p": 1},
        "controller": {"type": "state_feedback", "poles": [[-1, 0], [-1, 0]]},
        "sim": {"horizon": 20}
    }"#;

    #[test]
    fn regulation_scenario_passes_every_check() {
        let exec = verify(&scenario(REGULATION)).unwrap();
        let report = &exec.report;
        assert_eq!(report.exit_code, EXIT_OK, "{}", report.to_text());
        assert!(report.all_passed(), "{}", report.to_text());
        assert_eq!(report.design.gains, Some(GainVector::new(-1.0, -2.0)));
        assert_eq!(report.check("target").unwrap().verdict, Verdict::Pass);
        for name in [
            "speed_limit",
            "consistency_residual",
            "mass_monotonicity",
            "proper_time_lag",
            "linearization_exactness",
            "convergence_order",
        ] {
            assert!(report.check(name).is_some(), "missing {name}");
        }
    }

    #[test]
    fn propellant_exhaustion_exits_with_terminal_code() {
        let text = r#"{
            "params": {"m0": 1, "vbar": 1, "m_dry": 0.6},
            "controller": {"type": "open_loop", "schedule": {"kind": "constant", "value": -1}, "channel": "physical"},
            "sim": {"horizon": 5, "dt": 0.01, "mode": "physical"}
        }"#;
        let exec = execute(&scenario(text)).unwrap();
        assert_eq!(exec.report.exit_code, EXIT_TERMINAL);
        assert!(exec.report.events.iter().any(|e| e.kind == EventKind::MassDepleted));
    }

    #[test]
    fn steering_scenario_reaches_target() {
        let text = r#"{
            "si_units": true,
            "params": {"m0": 1, "vbar": 1},
            "controller": {"type": "steering", "x_target": [1, 0], "t_end": 1},
            "sim": {"horizon": 1, "target_tolerance": 1e-4}
        }"#;
        let exec = execute(&scenario(text)).unwrap();
        assert_eq!(exec.report.exit_code, EXIT_OK);
        let check = exec.report.check("target").unwrap();
        assert_eq!(check.verdict, Verdict::Pass, "{}", exec.report.to_text());
        let st = exec.report.design.steering.as_ref().unwrap();
        assert!((st.slope - 12.0).abs() < 1e-12 && (st.intercept + 6.0).abs() < 1e-12);
    }

    #[test]
    fn coarse_step_on_stiff_gain_flags_convergence() {
        let text = r#"{
            "params": {"m0": 1, "vbar": 1},
            "initial": {"p": 0.1},
            "controller": {"type": "state_feedback", "poles": [[-6, 0], [-7, 0]]},
            "sim": {"horizon": 10, "dt": 0.5}
        }"#;
        let exec = verify(&scenario(text)).unwrap();
        let check = exec.report.check("convergence_order").unwrap();
        assert_eq!(check.verdict, Verdict::Fail, "{}", exec.report.to_text());
    }

    #[test]
    fn classical_scenario_skips_relativistic_checks() {
        let text = REGULATION.replace("\"vbar\": 1", "\"vbar\": 1, \"model\": \"classical\"");
        let exec = verify(&scenario(&text)).unwrap();
        for name in ["speed_limit", "consistency_residual", "classical_limit"] {
            assert_eq!(exec.report.check(name).unwrap().verdict, Verdict::Skipped);
        }
        assert!(exec.report.all_passed(), "{}", exec.report.to_text());
    }
}
