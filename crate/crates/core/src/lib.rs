//! Choice-free cancellation for sets built from finite blocks and copies of
//! the naturals.
//!
//! The central objects are [`Space`]s (lists of `Fin(n)` and `Omega` slots)
//! and [`PamMap`]s (maps given by finitely many exceptions and finitely many
//! progression pieces). On top of these the crate builds the classical
//! constructions: Cantor-Schroder-Bernstein, finite subtraction, swallowing,
//! the division of bijections `n x A -> n x B` by `n`, and the variants.

pub mod ap;
pub mod arithmetic;
pub mod csb;
pub mod division;
pub mod dot;
pub mod error;
pub mod harness;
pub mod io;
pub mod map;
pub mod orbit;
pub mod periodic;
pub mod space;
pub mod subset;
pub mod witness;

pub use ap::Ap;
pub use error::{Error, Result};
pub use map::{ApPiece, Injectivity, PamMap};
pub use periodic::TailBound;
pub use space::{product_fin_space, sum_space, Element, ProductSpace, Slot, Space, SumSpace};
pub use subset::{renumber_subset, Renumbered, SlotSubset, SubsetRep};
pub use orbit::{
    classify_backward_walk, orbit_stream, visitation_profile, Dynamics, Escape, FuelPolicy, Outcome, Side, Visitation,
    Visitor, WalkClassification,
};
pub use csb::{csb_bijection, csb_components, csb_rule, CsbComponents, CsbRule};
pub use witness::{Procedural, Repr, Witness, WitnessBijection, WitnessInjection, WitnessKind};
pub use arithmetic::{
    lemma1_combine, lemma2_split, lemma3_divide_swallow, make_swallow, omega_injection_from_swallow, subtract_finite,
    subtract_finite_map, swallow_from_omega_injection, tarski_cancel, Lemma2Split, SwallowWitness,
};
pub use division::{
    divide_by_n, divide_by_n_staged, divide_by_n_with, divide_by_two, divide_by_two_2omega, divide_inequality_by_n,
    greedy_match_stage, match_parentheses, paren_count_trace, paren_partner, repeated_subtraction_divide, string_orientation, Arrow, Down,
    GreedyConfig, Orientation, PathDescription, RepeatedSubtraction, StagedMatching, TwoOmegaReport,
};
pub use dot::{arrows_dot, csb_dot, emit_dot, triangles_dot, DotKind};
pub use harness::{
    equivariance_check, generate_instance, run_construction, verify_witness, Construction, EquivarianceReport, Instance,
    InstanceKind, InstanceSpec, VerifyMode, VerifyReport,
};
