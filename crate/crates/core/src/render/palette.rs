use serde::{Deserialize, Serialize};

use crate::classify::ClassKind;

pub type Rgb = [u8; 3];

/// Named color schemes; the id is what specs and URLs carry.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaletteId {
    #[default]
    Classic,
    Dusk,
}

impl PaletteId {
    pub fn colors(self) -> ColorMap {
        match self {
            PaletteId::Classic => ColorMap::classic(),
            PaletteId::Dusk => ColorMap::dusk(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PaletteId::Classic => "classic",
            PaletteId::Dusk => "dusk",
        }
    }
}

impl std::str::FromStr for PaletteId {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "classic" => Ok(PaletteId::Classic),
            "dusk" => Ok(PaletteId::Dusk),
            _ => Err(crate::Error::InvalidSpec(format!("unknown palette {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColorMap {
    /// Colors for periods `1..=10`; index 0 is period 1.
    pub period_colors: [Rgb; 10],
    /// Periods above 10.
    pub high_period: Rgb,
    pub shift: Rgb,
    pub undetermined: Rgb,
    pub singular: Rgb,
    pub basin_zero: Rgb,
    pub basin_cycle: Rgb,
    pub center_marker: Rgb,
    pub pole_marker: Rgb,
    pub fixed_marker: Rgb,
    pub sstar_line: Rgb,
    pub circle_line: Rgb,
}

impl ColorMap {
    pub fn classic() -> Self {
        Self {
            period_colors: [
                [255, 230, 0],
                [0, 215, 230],
                [225, 30, 30],
                [215, 0, 215],
                [255, 140, 0],
                [40, 80, 230],
                [120, 40, 170],
                [255, 150, 190],
                [130, 130, 20],
                [140, 80, 30],
            ],
            high_period: [0, 0, 0],
            shift: [40, 170, 60],
            undetermined: [0, 0, 0],
            singular: [255, 255, 255],
            basin_zero: [255, 230, 0],
            basin_cycle: [40, 90, 220],
            center_marker: [255, 255, 255],
            pole_marker: [0, 0, 0],
            fixed_marker: [255, 255, 255],
            sstar_line: [255, 0, 255],
            circle_line: [0, 0, 0],
        }
    }

    pub fn dusk() -> Self {
        Self {
            shift: [20, 70, 45],
            basin_zero: [200, 170, 60],
            basin_cycle: [30, 50, 110],
            circle_line: [230, 230, 230],
            ..Self::classic()
        }
    }

    /// Color of a hyperbolic component of the given period.
    pub fn period(&self, period: usize) -> Rgb {
        match period {
            1..=10 => self.period_colors[period - 1],
            _ => self.high_period,
        }
    }

    pub fn class(&self, kind: ClassKind, period: usize) -> Rgb {
        match kind {
            ClassKind::ShiftLocus => self.shift,
            ClassKind::MLambda | ClassKind::MMu => self.period(period),
            ClassKind::Undetermined => self.undetermined,
            ClassKind::Singular => self.singular,
        }
    }
}
