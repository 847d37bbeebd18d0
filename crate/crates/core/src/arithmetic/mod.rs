//! Cancellation: finite subtraction, swallowing and Tarski's cancellation of `n`.

mod subtract;
mod swallow;
mod tarski;

pub use subtract::{subtract_finite, subtract_finite_map};
pub use swallow::{lemma1_combine, make_swallow, omega_injection_from_swallow, swallow_from_omega_injection, SwallowWitness};
pub use tarski::{lemma2_split, lemma3_divide_swallow, tarski_cancel, Lemma2Split};
