//! Bundled instances reproducing the worked examples of the mechanism.
//!
//! | name                | what it shows                                                      |
//! |---------------------|--------------------------------------------------------------------|
//! | `line`              | two-agent line where the low bidder keeps the item                  |
//! | `cavallo-deficit`   | networked Cavallo pays out more than it collects                    |
//! | `cavallo-diffusion` | networked Cavallo rewards withholding invitations                   |
//! | `tree`              | three-step redistribution on a tree                                 |
//! | `graph`             | two-step redistribution with non-tree dominated sets                |
//! | `diffusion-example` | an agent withholding her invitation hides her whole branch          |

use crate::instance::parse_instance;
use crate::network::{SocialNetwork, StrategyProfile};

pub const LINE: &str = include_str!("../fixtures/line.toml");
pub const CAVALLO_DEFICIT: &str = include_str!("../fixtures/cavallo_deficit.toml");
pub const CAVALLO_DIFFUSION: &str = include_str!("../fixtures/cavallo_diffusion.toml");
pub const TREE: &str = include_str!("../fixtures/tree.toml");
pub const GRAPH: &str = include_str!("../fixtures/graph.toml");
pub const DIFFUSION_EXAMPLE: &str = include_str!("../fixtures/diffusion_example.toml");

pub const ALL: [(&str, &str); 6] = [
    ("line", LINE),
    ("cavallo-deficit", CAVALLO_DEFICIT),
    ("cavallo-diffusion", CAVALLO_DIFFUSION),
    ("tree", TREE),
    ("graph", GRAPH),
    ("diffusion-example", DIFFUSION_EXAMPLE),
];

pub fn load(text: &str) -> (SocialNetwork, StrategyProfile) {
    parse_instance(text).expect("bundled fixture parses")
}

pub fn by_name(name: &str) -> Option<(SocialNetwork, StrategyProfile)> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, text)| load(text))
}
