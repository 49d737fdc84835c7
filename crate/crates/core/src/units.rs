//! Conversion between SI and the internal natural units.
//!
//! With `hbar = c = k_B = 1` a single length `L0` fixes every other scale:
//! time `L0/c`, energy `hbar c / L0`, temperature `hbar c / (k_B L0)`.

use serde::{Deserialize, Serialize};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const C_LIGHT: f64 = 299_792_458.0;
pub const K_B: f64 = 1.380_649e-23;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Length,
    Time,
    /// Angular frequency, rates, and Gaussian conductivity (all s^-1).
    Frequency,
    Temperature,
    Energy,
    Power,
    /// Same dimension as energy.
    Torque,
    Force,
    AngularMomentum,
    MomentOfInertia,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    /// SI length (m) of one natural length unit.
    pub length_m: f64,
}

impl UnitSystem {
    pub fn new(length_m: f64) -> Self {
        Self { length_m }
    }

    /// SI value of one natural unit of `q`.
    pub fn scale(&self, q: Quantity) -> f64 {
        let l = self.length_m;
        match q {
            Quantity::Length => l,
            Quantity::Time => l / C_LIGHT,
            Quantity::Frequency => C_LIGHT / l,
            Quantity::Temperature => HBAR * C_LIGHT / (K_B * l),
            Quantity::Energy | Quantity::Torque => HBAR * C_LIGHT / l,
            Quantity::Power => HBAR * C_LIGHT * C_LIGHT / (l * l),
            Quantity::Force => HBAR * C_LIGHT / (l * l),
            Quantity::AngularMomentum => HBAR,
            Quantity::MomentOfInertia => HBAR * l / C_LIGHT,
        }
    }

    pub fn to_natural(&self, q: Quantity, si: f64) -> f64 {
        si / self.scale(q)
    }

    pub fn to_si(&self, q: Quantity, natural: f64) -> f64 {
        natural * self.scale(q)
    }
}
