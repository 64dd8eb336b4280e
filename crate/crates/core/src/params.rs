//! Physical parameters and the small state types shared across modules.

use serde::{Deserialize, Serialize};

use crate::error::{DynamicsError, Result};
use crate::scalar::Scalar;

/// Speed of light in SI units (m/s).
pub const SPEED_OF_LIGHT_SI: f64 = 299_792_458.0;

/// Relative headroom below `c` that every speed-guarded operation enforces.
pub const SPEED_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Classical,
    Relativistic,
    /// Relativistic rocket ejecting photons, `vbar == c`.
    Photon,
}

impl Model {
    pub fn is_relativistic(self) -> bool {
        !matches!(self, Model::Classical)
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Classical => "classical",
            Model::Relativistic => "relativistic",
            Model::Photon => "photon",
        }
    }
}

/// Rocket constants. Construct through [`RocketParams::new`] or one of the
/// unit-regime helpers so the invariants below always hold:
///
/// * `m0 > m_dry >= 0`
/// * `0 < vbar <= c`, and `vbar == c` exactly for [`Model::Photon`]
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocketParams<T> {
    m0: T,
    vbar: T,
    c: T,
    m_dry: T,
    model: Model,
    #[serde(skip)]
    c_over_vbar: T,
}

impl<T: Scalar> RocketParams<T> {
    pub fn new(m0: T, vbar: T, c: T, m_dry: T, model: Model) -> Result<Self> {
        for (name, value) in [("m0", m0), ("vbar", vbar), ("c", c), ("m_dry", m_dry)] {
            if !value.is_finite() {
                return Err(DynamicsError::NonFinite {
                    name,
                    value: value.as_f64(),
                });
            }
        }
        if c <= T::zero() {
            return Err(DynamicsError::InvalidParams(format!("c = {c} must be positive")));
        }
        if m_dry < T::zero() {
            return Err(DynamicsError::InvalidParams(format!(
                "m_dry = {m_dry} must be non-negative"
            )));
        }
        if m0 <= m_dry {
            return Err(DynamicsError::InvalidParams(format!(
                "m0 = {m0} must exceed m_dry = {m_dry}"
            )));
        }
        if vbar <= T::zero() {
            return Err(DynamicsError::InvalidParams(format!("vbar = {vbar} must be positive")));
        }
        if vbar > c {
            return Err(DynamicsError::InvalidParams(format!("vbar = {vbar} exceeds c = {c}")));
        }
        if model == Model::Photon && vbar != c {
            return Err(DynamicsError::InvalidParams(format!(
                "photon rocket requires vbar == c, got vbar = {vbar}, c = {c}"
            )));
        }
        Ok(Self {
            m0,
            vbar,
            c,
            m_dry,
            model,
            c_over_vbar: c / vbar,
        })
    }

    /// Natural units, `c = 1`.
    pub fn natural(m0: T, vbar: T, model: Model) -> Result<Self> {
        Self::new(m0, vbar, T::one(), T::zero(), model)
    }

    /// SI units, `c = 299 792 458 m/s`.
    pub fn si(m0: T, vbar: T, model: Model) -> Result<Self> {
        Self::new(m0, vbar, T::lit(SPEED_OF_LIGHT_SI), T::zero(), model)
    }

    /// Photon rocket with `vbar = c`.
    pub fn photon(m0: T, c: T) -> Result<Self> {
        Self::new(m0, c, c, T::zero(), Model::Photon)
    }

    pub fn with_dry_mass(self, m_dry: T) -> Result<Self> {
        Self::new(self.m0, self.vbar, self.c, m_dry, self.model)
    }

    pub fn with_model(self, model: Model) -> Result<Self> {
        Self::new(self.m0, self.vbar, self.c, self.m_dry, model)
    }

    pub fn m0(&self) -> T {
        self.m0
    }

    pub fn vbar(&self) -> T {
        self.vbar
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn m_dry(&self) -> T {
        self.m_dry
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// `c / vbar`; twice the exponent of the mass-ratio power law.
    pub fn c_over_vbar(&self) -> T {
        self.c_over_vbar
    }

    /// Input coefficient `b = -vbar / m0` of the linearized plant.
    pub fn input_coefficient(&self) -> T {
        -self.vbar / self.m0
    }

    /// Largest admissible speed, `c * (1 - 1e-12)`.
    pub fn speed_bound(&self) -> T {
        self.c * (T::one() - T::lit(SPEED_GUARD))
    }

    /// Rejects `|v| >= c (1 - 1e-12)` for relativistic models; classical
    /// parameters only require a finite velocity.
    pub fn check_speed(&self, v: T) -> Result<()> {
        check_finite("v", v)?;
        if self.model.is_relativistic() {
            check_speed_against(v, self.c)?;
        }
        Ok(())
    }

    pub(crate) fn require_model(&self, relativistic: bool) -> Result<()> {
        if self.model.is_relativistic() == relativistic {
            Ok(())
        } else {
            Err(DynamicsError::WrongModel {
                expected: if relativistic {
                    "relativistic or photon"
                } else {
                    "classical"
                },
                actual: self.model.name(),
            })
        }
    }
}

pub(crate) fn check_finite<T: Scalar>(name: &'static str, value: T) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(DynamicsError::NonFinite {
            name,
            value: value.as_f64(),
        })
    }
}

pub(crate) fn check_speed_against<T: Scalar>(v: T, c: T) -> Result<()> {
    check_finite("v", v)?;
    let limit = c * (T::one() - T::lit(SPEED_GUARD));
    if v.abs() < limit {
        Ok(())
    } else {
        Err(DynamicsError::SpeedLimit {
            speed: v.abs().as_f64(),
            limit: limit.as_f64(),
            c: c.as_f64(),
        })
    }
}

/// Earth-frame position and velocity, `x = [p; v]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KinematicState<T> {
    pub p: T,
    pub v: T,
}

impl<T: Scalar> KinematicState<T> {
    pub fn new(p: T, v: T) -> Self {
        Self { p, v }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn as_array(&self) -> [T; 2] {
        [self.p, self.v]
    }

    pub fn norm(&self) -> T {
        self.p.hypot(self.v)
    }
}

impl<T: Scalar> From<[T; 2]> for KinematicState<T> {
    fn from([p, v]: [T; 2]) -> Self {
        Self { p, v }
    }
}

/// Earth time `t` and rocket proper time `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameClock<T> {
    pub t: T,
    pub tau: T,
}

impl<T: Scalar> FrameClock<T> {
    pub fn zero() -> Self {
        Self {
            t: T::zero(),
            tau: T::zero(),
        }
    }
}
