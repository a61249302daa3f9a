use clap::ValueEnum;
use serde::Serialize;

use liwave::constants::{ANGSTROM, MBAR};

/// Output unit system. Energies are always joules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Units {
    Si,
    MbarAngstrom,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitLabels {
    pub length: &'static str,
    pub area: &'static str,
    pub volume: &'static str,
    pub pressure: &'static str,
    pub energy: &'static str,
}

impl Units {
    pub fn length(self) -> f64 {
        match self {
            Units::Si => 1.0,
            Units::MbarAngstrom => ANGSTROM,
        }
    }

    pub fn area(self) -> f64 {
        self.length().powi(2)
    }

    pub fn volume(self) -> f64 {
        self.length().powi(3)
    }

    pub fn pressure(self) -> f64 {
        match self {
            Units::Si => 1.0,
            Units::MbarAngstrom => MBAR,
        }
    }

    pub fn labels(self) -> UnitLabels {
        match self {
            Units::Si => UnitLabels { length: "m", area: "m^2", volume: "m^3", pressure: "Pa", energy: "J" },
            Units::MbarAngstrom => {
                UnitLabels { length: "angstrom", area: "angstrom^2", volume: "angstrom^3", pressure: "mbar", energy: "J" }
            }
        }
    }
}
