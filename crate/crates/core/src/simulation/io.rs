//! Trajectory files.
//!
//! CSV carries one row per sample with columns
//! `t,tau,p,v,m,u,w,gain,residual`, every value written with 17 significant
//! digits; events follow as `# event,<t>,<kind>` comment lines. JSON mirrors
//! [`Trajectory`] field by field.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Event, EventKind, Sample, SimState, Trajectory};
use crate::params::{FrameClock, KinematicState};
use crate::scalar::Scalar;

pub const CSV_HEADER: &str = "t,tau,p,v,m,u,w,gain,residual";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for TrajectoryFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown trajectory format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum TrajectoryIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
}

fn kind_name(kind: EventKind) -> &'static str {
    match kind {
        EventKind::SpeedLimitAbort => "speed_limit_abort",
        EventKind::MassDepleted => "mass_depleted",
        EventKind::InputClamped => "input_clamped",
    }
}

fn parse_kind(s: &str) -> Option<EventKind> {
    match s {
        "speed_limit_abort" => Some(EventKind::SpeedLimitAbort),
        "mass_depleted" => Some(EventKind::MassDepleted),
        "input_clamped" => Some(EventKind::InputClamped),
        _ => None,
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_value<T: Scalar>(x: T) -> String {
    format!("{:.16e}", x.as_f64())
}

impl<T: Scalar + FromStr> Trajectory<T> {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(200 * (self.samples.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let row = [
                s.state.clock.t,
                s.state.clock.tau,
                s.state.kin.p,
                s.state.kin.v,
                s.state.m,
                s.u,
                s.w,
                s.gain,
                s.residual,
            ];
            for (i, x) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&format_value(*x));
            }
            out.push('\n');
        }
        for e in &self.events {
            let _ = writeln!(out, "# event,{},{}", format_value(e.t), kind_name(e.kind));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<(), TrajectoryIoError> {
        writer.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self, TrajectoryIoError> {
        let parse = |field: &str, line: usize| -> Result<T, TrajectoryIoError> {
            field.trim().parse::<T>().map_err(|_| TrajectoryIoError::Csv {
                line,
                message: format!("invalid number `{field}`"),
            })
        };
        let mut samples = Vec::new();
        let mut events = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if idx == 0 {
                if line != CSV_HEADER {
                    return Err(TrajectoryIoError::Csv {
                        line: line_no,
                        message: format!("expected header `{CSV_HEADER}`"),
                    });
                }
                continue;
            }
            if let Some(rest) = line.strip_prefix("# event,") {
                let (t, kind) = rest.split_once(',').ok_or_else(|| TrajectoryIoError::Csv {
                    line: line_no,
                    message: "malformed event line".into(),
                })?;
                let kind = parse_kind(kind.trim()).ok_or_else(|| TrajectoryIoError::Csv {
                    line: line_no,
                    message: format!("unknown event kind `{kind}`"),
                })?;
                events.push(Event {
                    t: parse(t, line_no)?,
                    kind,
                });
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(TrajectoryIoError::Csv {
                    line: line_no,
                    message: format!("expected 9 columns, found {}", fields.len()),
                });
            }
            let mut v = [T::zero(); 9];
            for (slot, field) in v.iter_mut().zip(&fields) {
                *slot = parse(field, line_no)?;
            }
            samples.push(Sample {
                state: SimState {
                    clock: FrameClock { t: v[0], tau: v[1] },
                    kin: KinematicState::new(v[2], v[3]),
                    m: v[4],
                },
                u: v[5],
                w: v[6],
                gain: v[7],
                residual: v[8],
            });
        }
        Ok(Self { samples, events })
    }
}

impl<T: Scalar + Serialize + DeserializeOwned> Trajectory<T> {
    pub fn to_json_string(&self) -> Result<String, TrajectoryIoError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn read_json<R: std::io::Read>(reader: R) -> Result<Self, TrajectoryIoError> {
        Ok(serde_json::from_reader(reader)?)
    }
}

/// Serializes `NaN` as `null` and reads `null` back as `NaN`.
pub(crate) mod nullable {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::scalar::Scalar;

    pub fn serialize<T, S>(x: &T, serializer: S) -> Result<S::Ok, S::Error>
    where
        T: Scalar + Serialize,
        S: Serializer,
    {
        if x.is_nan() {
            serializer.serialize_none()
        } else {
            serializer.serialize_some(x)
        }
    }

    pub fn deserialize<'de, T, D>(deserializer: D) -> Result<T, D::Error>
    where
        T: Scalar + Deserialize<'de>,
        D: Deserializer<'de>,
    {
        Ok(Option::<T>::deserialize(deserializer)?.unwrap_or_else(T::nan))
    }
}
