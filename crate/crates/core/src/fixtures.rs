//! Map specs shipped with the crate.

use crate::error::Result;
use crate::mapdef::MapSpec;

pub const TWIST: &str = include_str!("../fixtures/twist.toml");
pub const FLOW_COMPOSITE: &str = include_str!("../fixtures/flow_composite.toml");
pub const WIDE_TWIST: &str = include_str!("../fixtures/wide_twist.toml");
pub const IRRATIONAL_ROTATION: &str = include_str!("../fixtures/irrational_rotation.toml");
pub const DISK_BUMP_TWISTS: &str = include_str!("../fixtures/disk_bump_twists.toml");

/// `(name, spec text)` for every shipped fixture.
pub const ALL: [(&str, &str); 5] = [
    ("twist", TWIST),
    ("flow_composite", FLOW_COMPOSITE),
    ("wide_twist", WIDE_TWIST),
    ("irrational_rotation", IRRATIONAL_ROTATION),
    ("disk_bump_twists", DISK_BUMP_TWISTS),
];

pub fn load(name: &str) -> Option<Result<MapSpec>> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, text)| MapSpec::parse(text))
}
