//! Fundamental constants, Planck scales and the natural-unit system
//! (ħ = c = ε₀ = 1, so that the Planck charge satisfies q_P² = 4π).
//!
//! Natural units fix only three of the four SI base scales; the remaining
//! freedom is pinned by [`NATURAL_LENGTH`], the SI length that maps to 1.
//! Every other conversion factor follows from ħ, c and ε₀.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

/// SI length (metres) represented by 1 in natural units.
pub const NATURAL_LENGTH: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    hbar: f64,
    c: f64,
    #[serde(rename = "G")]
    g: f64,
    epsilon0: f64,
    e_charge: f64,
}

impl PhysicalConstants {
    /// CODATA 2018 values (exact SI definitions for ħ, c and e).
    pub const SI: PhysicalConstants = PhysicalConstants {
        hbar: 1.054_571_817e-34,
        c: 299_792_458.0,
        g: 6.674_30e-11,
        epsilon0: 8.854_187_812_8e-12,
        e_charge: 1.602_176_634e-19,
    };

    /// All constants set to one; for dimensionless (natural-unit) work where
    /// only ħ matters.
    pub const UNIT: PhysicalConstants = PhysicalConstants {
        hbar: 1.0,
        c: 1.0,
        g: 1.0,
        epsilon0: 1.0,
        e_charge: 1.0,
    };

    pub fn new(hbar: f64, c: f64, g: f64, epsilon0: f64, e_charge: f64) -> Result<Self> {
        Ok(Self {
            hbar: positive("hbar", hbar)?,
            c: positive("c", c)?,
            g: positive("G", g)?,
            epsilon0: positive("epsilon0", epsilon0)?,
            e_charge: positive("e_charge", e_charge)?,
        })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn epsilon0(&self) -> f64 {
        self.epsilon0
    }

    pub fn e_charge(&self) -> f64 {
        self.e_charge
    }

    /// Coulomb constant 1/(4πε₀).
    pub fn coulomb(&self) -> f64 {
        1.0 / (4.0 * PI * self.epsilon0)
    }

    pub fn with_g(self, g: f64) -> Result<Self> {
        Self::new(self.hbar, self.c, g, self.epsilon0, self.e_charge)
    }

    pub fn with_epsilon0(self, epsilon0: f64) -> Result<Self> {
        Self::new(self.hbar, self.c, self.g, epsilon0, self.e_charge)
    }

    pub fn planck_scales(&self) -> PlanckScales {
        planck_scales(self)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanckScales {
    pub mass: f64,
    pub charge: f64,
    pub length: f64,
}

pub fn planck_scales(k: &PhysicalConstants) -> PlanckScales {
    PlanckScales {
        mass: (k.hbar * k.c / k.g).sqrt(),
        charge: (4.0 * PI * k.epsilon0 * k.hbar * k.c).sqrt(),
        length: (k.hbar * k.g / k.c.powi(3)).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Mass,
    Charge,
    Length,
    Time,
    Momentum,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::Mass,
        Dimension::Charge,
        Dimension::Length,
        Dimension::Time,
        Dimension::Momentum,
    ];

    /// SI value of one natural unit of this dimension.
    fn natural_unit(self, k: &PhysicalConstants) -> f64 {
        match self {
            Dimension::Length => NATURAL_LENGTH,
            Dimension::Time => NATURAL_LENGTH / k.c,
            Dimension::Mass => k.hbar / (k.c * NATURAL_LENGTH),
            Dimension::Momentum => k.hbar / NATURAL_LENGTH,
            Dimension::Charge => (k.epsilon0 * k.hbar * k.c).sqrt(),
        }
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mass" => Ok(Dimension::Mass),
            "charge" => Ok(Dimension::Charge),
            "length" => Ok(Dimension::Length),
            "time" => Ok(Dimension::Time),
            "momentum" => Ok(Dimension::Momentum),
            _ => Err(Error::UnknownDimension(s.to_string())),
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dimension::Mass => "mass",
            Dimension::Charge => "charge",
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Momentum => "momentum",
        };
        f.write_str(name)
    }
}

/// An SI value tagged with its dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub dimension: Dimension,
}

impl Quantity {
    pub fn new(value: f64, dimension: Dimension) -> Self {
        Self { value, dimension }
    }

    /// Builds a quantity from a textual dimension tag.
    pub fn tagged(value: f64, tag: &str) -> Result<Self> {
        Ok(Self::new(value, tag.parse()?))
    }
}

pub fn to_natural(q: Quantity, k: &PhysicalConstants) -> f64 {
    q.value / q.dimension.natural_unit(k)
}

pub fn from_natural(value: f64, dimension: Dimension, k: &PhysicalConstants) -> Quantity {
    Quantity::new(value * dimension.natural_unit(k), dimension)
}
