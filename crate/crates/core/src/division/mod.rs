//! Division of bijections `n x A -> n x B` by `n`.

mod complex;
mod greedy;
mod parens;
mod repair;
mod repeated;

use std::cmp::Ordering;
use std::fmt;

use crate::space::Element;

pub use greedy::{
    divide_by_n, divide_by_n_staged, divide_by_n_with, divide_inequality_by_n, greedy_match_stage, GreedyConfig,
    StagedMatching,
};
pub use parens::{
    divide_by_two, divide_by_two_2omega, match_parentheses, paren_count_trace, paren_partner, string_orientation, Down, Orientation,
    TwoOmegaReport,
};
pub use repeated::{repeated_subtraction_divide, RepeatedSubtraction};

/// An arrow of a division-by-two picture: a blue element of `A` or a red element of `B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arrow {
    Blue(Element),
    Red(Element),
}

impl fmt::Display for Arrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arrow::Blue(e) => write!(f, "A{e}"),
            Arrow::Red(e) => write!(f, "B{e}"),
        }
    }
}

/// A path from a blue triangle to a red one, as `(exit label, entry label)`
/// hops. Ordered by length, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PathDescription(pub Vec<(usize, usize)>);

impl Ord for PathDescription {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for PathDescription {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PathDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hops: Vec<String> = self.0.iter().map(|(e, n)| format!("({e},{n})")).collect();
        write!(f, "{}", hops.join(""))
    }
}
