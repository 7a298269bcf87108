//! The ordered 247-feature schema.

use std::fmt;

use serde::Serialize;

use crate::features::distribution::{zernike_pairs, BINS};
use crate::features::intensity::INTENSITY_NAMES;
use crate::features::shape::SHAPE_NAMES;
use crate::features::texture::{ANGLES, HARALICK_NAMES, SCALES};

pub const MANIFEST_VERSION: &str = "pathex-247/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    SizeShape,
    Texture,
    Intensity,
    Distribution,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::SizeShape,
        Family::Texture,
        Family::Intensity,
        Family::Distribution,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            Family::SizeShape => "SizeShape",
            Family::Texture => "Texture",
            Family::Intensity => "Intensity",
            Family::Distribution => "Distribution",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.prefix())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureEntry {
    pub name: String,
    pub family: Family,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureManifest {
    pub version: String,
    pub entries: Vec<FeatureEntry>,
}

impl Default for FeatureManifest {
    fn default() -> Self {
        Self::v1()
    }
}

impl FeatureManifest {
    pub fn v1() -> Self {
        let mut entries = Vec::with_capacity(247);
        let mut push = |family: Family, name: String, description: String| {
            entries.push(FeatureEntry {
                name: format!("{}_{}", family.prefix(), name),
                family,
                description,
            })
        };
        for n in SHAPE_NAMES {
            push(Family::SizeShape, n.to_string(), format!("{n} of the binary mask"));
        }
        for s in SCALES {
            for a in ANGLES {
                for stat in HARALICK_NAMES {
                    push(
                        Family::Texture,
                        format!("{stat}_s{s}_a{a}"),
                        format!("Haralick {stat}, offset {s} px at {a} degrees, 8 gray levels"),
                    );
                }
            }
        }
        for n in INTENSITY_NAMES {
            push(Family::Intensity, n.to_string(), format!("{n} over in-mask pixels"));
        }
        for (stat, what) in [
            ("FracAtD", "fraction of total intensity"),
            ("MeanFrac", "intensity fraction over pixel fraction"),
            ("RadialCV", "coefficient of variation over 8 wedges"),
        ] {
            for b in 0..BINS {
                push(
                    Family::Distribution,
                    format!("{stat}_b{b}"),
                    format!("{what}, radial bin {b} of {BINS}"),
                );
            }
        }
        for (stat, what) in [("ZernikeMag", "magnitude"), ("ZernikePhase", "phase")] {
            for (n, m) in zernike_pairs() {
                push(
                    Family::Distribution,
                    format!("{stat}_n{n}_m{m}"),
                    format!("Zernike {what}, degree {n}, repetition {m}"),
                );
            }
        }
        FeatureManifest {
            version: MANIFEST_VERSION.to_string(),
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn family_count(&self, family: Family) -> usize {
        self.entries.iter().filter(|e| e.family == family).count()
    }
}
