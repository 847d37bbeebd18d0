//! Repair after greedy matching leaves blue triangles over: every leftover
//! triangle starts an infinite sequence of blue triangles, and the members
//! pass their partners one notch up the sequence.

use std::sync::Arc;

use super::complex::Complex;
use crate::error::{Error, Result};
use crate::map::PamMap;
use crate::orbit::{Dynamics, FuelPolicy, Outcome};
use crate::periodic::TailBound;
use crate::space::Element;
use crate::subset::SubsetRep;
use crate::witness::{Procedural, Witness, WitnessKind};

struct Repair {
    cx: Complex,
    pi: PamMap,
    pi_inv: PamMap,
    u: SubsetRep,
    fwd: Dynamics,
    bwd: Dynamics,
    fuel: FuelPolicy,
}

impl Repair {
    fn label(&self, s: Element) -> usize {
        self.cx.pa.from_product(s).0
    }

    /// The least label met infinitely often on the walk from vertex 0 of `x`.
    fn class(&self, x: Element) -> Result<usize> {
        match self.fwd.run(self.cx.pa.to_product(0, x), self.fuel) {
            Outcome::Escape(esc) => Ok(esc.cycle.iter().map(|&s| self.label(s)).min().unwrap()),
            Outcome::Undecided { steps } => Err(Error::undecided(steps, format!("classifying leftover {x}"))),
            other => Err(Error::NotBijective(format!("walk from leftover {x} ends: {other:?}"))),
        }
    }

    fn next_with_label(&self, start: Element, label: usize, dynamics: &Dynamics) -> Result<Option<Element>> {
        dynamics.find_forward(start, self.fuel, |s| self.label(s) == label)
    }

    /// The leftover triangle whose sequence passes through vertex `s`, if
    /// its class is `i`.
    fn sequence_of(&self, s: Element, i: usize) -> Result<Option<Element>> {
        match self.bwd.run(s, self.fuel) {
            Outcome::Terminated { state, .. } if state != s => {
                let (l, x) = self.cx.pa.from_product(state);
                Ok((l == 0 && self.u.contains(x) && self.class(x)? == i).then_some(x))
            }
            Outcome::Undecided { steps } => Err(Error::undecided(steps, format!("backward walk from {s}"))),
            _ => Ok(None),
        }
    }

    /// Partner of `z` after the passes for classes `0 .. stage`.
    fn partner(&self, stage: usize, z: Element) -> Result<Option<Element>> {
        if stage == 0 {
            return Ok(self.pi.eval(z));
        }
        let i = stage - 1;
        let s = if self.u.contains(z) {
            if self.class(z)? != i {
                return self.partner(i, z);
            }
            self.cx.pa.to_product(0, z)
        } else {
            let s = self.cx.pa.to_product(i, z);
            if self.sequence_of(s, i)?.is_none() {
                return self.partner(i, z);
            }
            s
        };
        match self.next_with_label(s, i, &self.fwd)? {
            Some(next) => self.partner(i, self.cx.pa.from_product(next).1),
            None => Err(Error::NotBijective(format!("sequence through {z} ends"))),
        }
    }

    /// Inverse of `partner(stage, .)`.
    fn owner(&self, stage: usize, y: Element) -> Result<Option<Element>> {
        if stage == 0 {
            return Ok(self.pi_inv.eval(y));
        }
        let i = stage - 1;
        let Some(w) = self.owner(i, y)? else { return Ok(None) };
        if self.u.contains(w) {
            return Ok(Some(w));
        }
        let s = self.cx.pa.to_product(i, w);
        let Some(x) = self.sequence_of(s, i)? else { return Ok(Some(w)) };
        Ok(Some(match self.next_with_label(s, i, &self.bwd)? {
            Some(prev) => self.cx.pa.from_product(prev).1,
            None => x,
        }))
    }

    fn bounds(&self) -> Option<Vec<TailBound>> {
        let (fb, bb) = (self.fwd.tail_bounds()?, self.bwd.tail_bounds()?);
        let k = self.cx.a.num_slots();
        let f = self.cx.f.source_bounds();
        let p = self.pi.source_bounds();
        let u = self.u.bounds();
        Some(
            (0..k)
                .map(|s| {
                    let mut b = p[s].join(u[s]);
                    for l in 0..self.cx.n {
                        b = b.join(fb[l * k + s]).join(bb[l * k + s]).join(f[l * k + s]);
                    }
                    b
                })
                .collect(),
        )
    }
}

/// Completes a greedy matching `pi` (a bijection from `A - u` onto `B`) to
/// a bijection `A -> B`.
pub(crate) fn pass_the_partner(cx: &Complex, pi: &PamMap, u: &SubsetRep, fuel: FuelPolicy) -> Result<Witness> {
    let pi_inv = pi.invert()?;
    let w = cx.f.then(&PamMap::lift_product(cx.n, &pi_inv))?;
    let empty = SubsetRep::empty(&cx.a);
    let mut parts = u.parts().to_vec();
    for _ in 1..cx.n {
        parts.extend_from_slice(empty.parts());
    }
    let lifted = SubsetRep::from_parts(&cx.pa.space, parts)?;
    let r = Repair {
        cx: cx.clone(),
        pi: pi.clone(),
        pi_inv,
        u: u.clone(),
        fwd: Dynamics::new(w.clone())?.observe_subset(&lifted),
        bwd: Dynamics::new(w.invert()?)?.observe_subset(&lifted),
        fuel,
    };
    let n = cx.n;
    if let Some(bounds) = r.bounds() {
        match PamMap::from_eval(&cx.a, &cx.b, &bounds, |z| r.partner(n, z)) {
            Ok(m) => return Witness::bijection(m),
            Err(Error::NotPeriodic(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let (a, b) = (cx.a.clone(), cx.b.clone());
    let r = Arc::new(r);
    let (r1, r2) = (r.clone(), r);
    let p = Procedural {
        forward: Arc::new(move |z| r1.partner(n, z)),
        inverse: Arc::new(move |y| r2.owner(n, y)),
        provenance: "pass the partner".into(),
    };
    Ok(Witness::procedural(WitnessKind::Bijection, &a, &b, p))
}
