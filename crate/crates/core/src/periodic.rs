//! Normal forms for eventually periodic sets and maps on a single `Omega` slot.
//!
//! Everything here takes a description of behaviour above a threshold (a
//! [`TailBound`]) and a pointwise oracle, and recovers the unique canonical
//! representation: a finite list of exceptional points plus progressions.

use std::collections::BTreeSet;

use num_rational::Ratio;

use crate::ap::{first_at_least, lcm, Ap};
use crate::error::{Error, Result};
use crate::space::Element;

/// Promise that behaviour is `period`-periodic at or above `threshold`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TailBound {
    pub threshold: u64,
    pub period: u64,
}

impl TailBound {
    pub const TRIVIAL: TailBound = TailBound { threshold: 0, period: 1 };

    pub fn new(threshold: u64, period: u64) -> TailBound {
        TailBound { threshold, period: period.max(1) }
    }

    pub fn join(self, other: TailBound) -> TailBound {
        TailBound {
            threshold: self.threshold.max(other.threshold),
            period: lcm(self.period, other.period),
        }
    }

    pub fn raise(self, threshold: u64) -> TailBound {
        TailBound { threshold: self.threshold.max(threshold), ..self }
    }
}

/// Cosets of divisors of the minimal period that cover every class with a law.
/// Returned as `(residue, modulus, law)` sorted by modulus then residue.
fn cover<L: Clone + PartialEq>(laws: &[Option<L>]) -> Vec<(u64, u64, L)> {
    let big = laws.len();
    let period = (1..=big)
        .filter(|d| big % d == 0)
        .find(|&d| (0..big).all(|r| laws[r] == laws[(r + d) % big]))
        .unwrap_or(big);
    let mut covered = vec![false; period];
    let mut out = Vec::new();
    for d in (1..=period).filter(|d| period % d == 0) {
        for r in 0..d {
            let Some(law) = &laws[r] else { continue };
            let members = (r..period).step_by(d);
            if members.clone().all(|c| !covered[c] && laws[c].as_ref() == Some(law)) {
                for c in members {
                    covered[c] = true;
                }
                out.push((r as u64, d as u64, law.clone()));
            }
        }
    }
    out
}

fn class_points(bound: TailBound, class: u64, samples: u64) -> impl Iterator<Item = u64> {
    let first = first_at_least(class, bound.period, bound.threshold);
    (0..samples).map(move |k| first + k * bound.period)
}

/// Canonical `(finite part, progressions)` of a set given by a predicate.
pub(crate) fn normalize_set(
    bound: TailBound,
    pred: impl Fn(u64) -> bool,
) -> Result<(BTreeSet<u64>, Vec<Ap>)> {
    let mut laws = Vec::with_capacity(bound.period as usize);
    for class in 0..bound.period {
        let pts: Vec<bool> = class_points(bound, class, 2).map(&pred).collect();
        if pts[0] != pts[1] {
            return Err(Error::NotPeriodic(format!(
                "membership differs across period {} above {}",
                bound.period, bound.threshold
            )));
        }
        laws.push(pts[0].then_some(()));
    }
    let mut aps = Vec::new();
    for (r, d, ()) in cover(&laws) {
        let mut x = first_at_least(r, d, bound.threshold);
        while x >= d && pred(x - d) {
            x -= d;
        }
        aps.push(Ap::new(r, d, x).expect("nonzero modulus"));
    }
    aps.sort();
    let finite = (0..bound.threshold)
        .filter(|&x| pred(x) && !aps.iter().any(|ap| ap.contains(x)))
        .collect();
    Ok((finite, aps))
}

/// `x -> slope * x + intercept` into a fixed slot.
#[derive(Clone, Debug, PartialEq, Eq)]
struct AffineLaw {
    slot: usize,
    slope: Ratio<i128>,
    intercept: Ratio<i128>,
}

impl AffineLaw {
    fn apply(&self, x: u64) -> Option<u64> {
        let y = self.slope * Ratio::from_integer(x as i128) + self.intercept;
        (y.is_integer() && *y.numer() >= 0).then(|| y.to_integer() as u64)
    }
}

/// A map slot in normal form: exceptional pairs plus `(src, dst_slot, dst)` pieces.
pub(crate) type SlotNormalForm = (Vec<(u64, Element)>, Vec<(Ap, usize, Ap)>);

/// Canonical form of the restriction of a map to one `Omega` source slot.
pub(crate) fn normalize_map_slot(
    bound: TailBound,
    eval: impl Fn(u64) -> Result<Option<Element>>,
) -> Result<SlotNormalForm> {
    let mut laws = Vec::with_capacity(bound.period as usize);
    for class in 0..bound.period {
        let pts = class_points(bound, class, 3)
            .map(|x| eval(x).map(|y| (x, y)))
            .collect::<Result<Vec<_>>>()?;
        laws.push(class_law(bound, &pts)?);
    }
    let mut pieces = Vec::new();
    for (r, d, law) in cover(&laws) {
        let mut x = first_at_least(r, d, bound.threshold);
        while x >= d {
            match law.apply(x - d) {
                Some(i) if eval(x - d)? == Some(Element::new(law.slot, i)) => x -= d,
                _ => break,
            }
        }
        let step = law.slope * Ratio::from_integer(d as i128);
        let y = law.apply(x).ok_or_else(|| Error::NotPeriodic("non-integral image".into()))?;
        if !step.is_integer() || *step.numer() < 1 {
            return Err(Error::NotPeriodic(format!("step {step} is not a positive integer")));
        }
        let dst = Ap::new(y, step.to_integer() as u64, y).expect("positive modulus");
        pieces.push((Ap::new(r, d, x).expect("nonzero modulus"), law.slot, dst));
    }
    pieces.sort();
    let mut exceptions = Vec::new();
    for x in 0..bound.threshold {
        if pieces.iter().any(|(src, _, _)| src.contains(x)) {
            continue;
        }
        if let Some(y) = eval(x)? {
            exceptions.push((x, y));
        }
    }
    Ok((exceptions, pieces))
}

fn class_law(bound: TailBound, pts: &[(u64, Option<Element>)]) -> Result<Option<AffineLaw>> {
    let ys: Vec<Element> = match pts.iter().filter_map(|(_, y)| *y).collect::<Vec<_>>() {
        ys if ys.is_empty() => return Ok(None),
        ys if ys.len() == pts.len() => ys,
        _ => {
            return Err(Error::NotPeriodic(format!(
                "domain differs across period {} above {}",
                bound.period, bound.threshold
            )))
        }
    };
    let slot = ys[0].slot;
    if ys.iter().any(|y| y.slot != slot) {
        return Err(Error::NotPeriodic("target slot varies within a class".into()));
    }
    let d1 = ys[1].index as i128 - ys[0].index as i128;
    let d2 = ys[2].index as i128 - ys[1].index as i128;
    if d1 != d2 {
        return Err(Error::NotPeriodic("class is not affine".into()));
    }
    if d1 <= 0 {
        return Err(Error::NotPeriodic("class is not strictly increasing".into()));
    }
    let slope = Ratio::new(d1, bound.period as i128);
    let intercept = Ratio::from_integer(ys[0].index as i128) - slope * Ratio::from_integer(pts[0].0 as i128);
    Ok(Some(AffineLaw { slot, slope, intercept }))
}
