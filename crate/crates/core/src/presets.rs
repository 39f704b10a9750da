//! Named input states of the figure sets: the σx eigenstates and the
//! σz eigenstates (`up_z` excited, `down_z` ground), plus the tracial state.

use serde::{Deserialize, Serialize};

use crate::algebra::BlochVector;
use crate::error::{Error, Result};
use crate::pointer_density::GridKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatePreset {
    MinusX,
    PlusX,
    UpZ,
    DownZ,
    Tracial,
}

impl StatePreset {
    pub const ALL: [Self; 5] = [Self::MinusX, Self::Tracial, Self::PlusX, Self::UpZ, Self::DownZ];

    pub fn bloch(self) -> BlochVector {
        match self {
            Self::MinusX => BlochVector::MINUS_X,
            Self::PlusX => BlochVector::PLUS_X,
            Self::UpZ => BlochVector::EXCITED,
            Self::DownZ => BlochVector::GROUND,
            Self::Tracial => BlochVector::TRACIAL,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::MinusX => "minus_x",
            Self::PlusX => "plus_x",
            Self::UpZ => "up_z",
            Self::DownZ => "down_z",
            Self::Tracial => "tracial",
        }
    }

    /// Accepts the canonical names and `ground` / `excited` as aliases.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "minus_x" => Some(Self::MinusX),
            "plus_x" => Some(Self::PlusX),
            "up_z" | "excited" => Some(Self::UpZ),
            "down_z" | "ground" => Some(Self::DownZ),
            "tracial" => Some(Self::Tracial),
            _ => None,
        }
    }
}

/// Parses `"px,py,pz"` into a validated Bloch vector.
pub fn parse_bloch(s: &str) -> Result<BlochVector> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument {
            name: "bloch",
            value: parts.len() as f64,
            reason: "expected three comma-separated components px,py,pz",
        });
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| Error::InvalidArgument {
            name: "bloch",
            value: f64::NAN,
            reason: "components must be real numbers",
        })?;
    }
    BlochVector::new(v[0], v[1], v[2])
}

/// The density figures: number, grid kind and input state.
pub const FIGURES: [(u32, GridKind, StatePreset); 12] = [
    (1, GridKind::Endpoint, StatePreset::MinusX),
    (2, GridKind::Endpoint, StatePreset::Tracial),
    (3, GridKind::Endpoint, StatePreset::PlusX),
    (5, GridKind::PointerX, StatePreset::MinusX),
    (6, GridKind::PointerX, StatePreset::Tracial),
    (7, GridKind::PointerX, StatePreset::PlusX),
    (8, GridKind::Endpoint, StatePreset::UpZ),
    (9, GridKind::Endpoint, StatePreset::Tracial),
    (10, GridKind::Endpoint, StatePreset::DownZ),
    (12, GridKind::PointerZ, StatePreset::UpZ),
    (13, GridKind::PointerZ, StatePreset::Tracial),
    (14, GridKind::PointerZ, StatePreset::DownZ),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in StatePreset::ALL {
            assert_eq!(StatePreset::parse(p.name()), Some(p));
        }
        assert_eq!(StatePreset::parse("ground"), Some(StatePreset::DownZ));
        assert_eq!(StatePreset::parse("sideways"), None);
    }

    #[test]
    fn bloch_parsing() {
        assert_eq!(parse_bloch("0.5, 0, -0.5").unwrap(), BlochVector::new(0.5, 0.0, -0.5).unwrap());
        assert!(parse_bloch("1,1,0").is_err());
        assert!(parse_bloch("1,0").is_err());
        assert!(parse_bloch("a,0,0").is_err());
    }
}
