//! Division by repeated subtraction: marry the triangles that meet sharp
//! point to sharp point, subtract them, and repeat. This is not a division
//! algorithm, and the outcome says when it gets stuck.

use super::complex::Complex;
use crate::error::{Error, Result};
use crate::map::PamMap;
use crate::orbit::{Dynamics, FuelPolicy, Outcome};
use crate::periodic::TailBound;
use crate::space::{sum_space, Element, Space};
use crate::subset::SubsetRep;
use crate::witness::Witness;

#[derive(Clone, Debug)]
pub enum RepeatedSubtraction {
    Complete { witness: Witness, rounds: usize },
    Stuck { leftover_blue: SubsetRep, leftover_red: SubsetRep, rounds: usize, reason: String },
}

impl RepeatedSubtraction {
    pub fn is_complete(&self) -> bool {
        matches!(self, RepeatedSubtraction::Complete { .. })
    }
}

fn copies(s: &SubsetRep, space: &Space, n: usize) -> Result<SubsetRep> {
    let mut parts = Vec::new();
    for _ in 0..n {
        parts.extend_from_slice(s.parts());
    }
    SubsetRep::from_parts(space, parts)
}

/// Rounds of sharp-point matching and subtraction on a bijection
/// `f : n x A -> n x B`, at most `max_rounds` of them.
pub fn repeated_subtraction_divide(n: usize, f: &PamMap, fuel: FuelPolicy, max_rounds: usize) -> Result<RepeatedSubtraction> {
    if n == 0 {
        return Err(Error::Precondition("cannot divide by zero".into()));
    }
    f.require_bijection("f")?;
    let cx = Complex::new(n, f)?;
    let mut fk = f.clone();
    let mut ak = SubsetRep::full(&cx.a);
    let mut bk = SubsetRep::full(&cx.b);
    let mut pi = PamMap::empty(&cx.a, &cx.b);
    let stuck = |a: &SubsetRep, b: &SubsetRep, rounds, reason: &str| RepeatedSubtraction::Stuck {
        leftover_blue: a.clone(),
        leftover_red: b.clone(),
        rounds,
        reason: reason.into(),
    };
    for round in 0..max_rounds {
        if ak.is_empty() && bk.is_empty() {
            return Ok(RepeatedSubtraction::Complete { witness: Witness::bijection(pi)?, rounds: round });
        }
        let mu = cx.pa.copy_injection(0).then(&fk)?.then(&cx.pb.copy_projection(0))?;
        let matched = mu.domain();
        if matched.is_empty() {
            return Ok(stuck(&ak, &bk, round, "no triangles meet sharp point to sharp point"));
        }
        let next_a = ak.difference(&matched)?;
        let next_b = bk.difference(&mu.image())?;

        // Walk n x (A - M) -> n x B, bouncing back through the matched pairs.
        let x = sum_space(&cx.pa.space, &cx.pb.space);
        let blue = fk.then(&x.right)?;
        let red = PamMap::lift_product(n, &mu.invert()?).then(&x.left)?;
        let walk = Dynamics::new(PamMap::copair(&blue, &red)?)?;
        let split = cx.pa.space.num_slots();
        let dom = copies(&next_a, &cx.pa.space, n)?;
        let eval = |v: Element| -> Result<Option<Element>> {
            if !dom.contains(v) {
                return Ok(None);
            }
            match walk.run(v, fuel) {
                Outcome::Terminated { state, .. } if state.slot >= split => {
                    Ok(Some(Element::new(state.slot - split, state.index)))
                }
                Outcome::Undecided { steps } => Err(Error::undecided(steps, format!("subtracting from {v}"))),
                _ => Ok(None),
            }
        };
        let bounds: Vec<TailBound> = match walk.tail_bounds() {
            Some(wb) => {
                let (db, fb) = (dom.bounds(), fk.source_bounds());
                (0..split).map(|s| wb[s].join(db[s]).join(fb[s])).collect()
            }
            None if cx.pa.space.is_dedekind_finite() => vec![TailBound::TRIVIAL; split],
            None => return Err(Error::Unsupported("subtraction walk is not analysable".into())),
        };
        let next = PamMap::from_eval(&cx.pa.space, &cx.pb.space, &bounds, eval)?;
        pi = pi.union(&mu)?;
        if next.domain() != dom {
            return Ok(stuck(&next_a, &next_b, round + 1, "some triangles fell off during subtraction"));
        }
        fk = next;
        ak = next_a;
        bk = next_b;
    }
    if ak.is_empty() && bk.is_empty() {
        return Ok(RepeatedSubtraction::Complete { witness: Witness::bijection(pi)?, rounds: max_rounds });
    }
    Ok(stuck(&ak, &bk, max_rounds, "round limit reached"))
}
