//! Eventually periodic subsets of a space.

use std::collections::BTreeSet;
use std::fmt;

use crate::ap::{lcm, Ap};
use crate::error::{Error, Result};
use crate::map::PamMap;
use crate::periodic::{normalize_set, TailBound};
use crate::space::{Element, Slot, Space};

/// The part of a subset living in one slot: finitely many points plus
/// progressions. For `Fin` slots the progression list is empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SlotSubset {
    pub finite: BTreeSet<u64>,
    pub aps: Vec<Ap>,
}

impl SlotSubset {
    pub fn contains(&self, x: u64) -> bool {
        self.finite.contains(&x) || self.aps.iter().any(|ap| ap.contains(x))
    }

    pub fn is_empty(&self) -> bool {
        self.finite.is_empty() && self.aps.is_empty()
    }

    fn bound(&self) -> TailBound {
        let threshold = self
            .finite
            .last()
            .map(|x| x + 1)
            .into_iter()
            .chain(self.aps.iter().map(|ap| ap.start()))
            .max()
            .unwrap_or(0);
        TailBound::new(threshold, self.aps.iter().fold(1, |l, ap| lcm(l, ap.modulus())))
    }
}

/// A subset of a space in canonical form, so `==` is set equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubsetRep {
    space: Space,
    parts: Vec<SlotSubset>,
}

impl SubsetRep {
    pub fn empty(space: &Space) -> SubsetRep {
        SubsetRep { space: space.clone(), parts: vec![SlotSubset::default(); space.num_slots()] }
    }

    pub fn full(space: &Space) -> SubsetRep {
        let parts = space
            .slots()
            .iter()
            .map(|s| match *s {
                Slot::Fin(n) => SlotSubset { finite: (0..n).collect(), aps: vec![] },
                Slot::Omega => SlotSubset { finite: BTreeSet::new(), aps: vec![Ap::tail(0)] },
            })
            .collect();
        SubsetRep { space: space.clone(), parts }
    }

    pub fn from_elements(space: &Space, elems: impl IntoIterator<Item = Element>) -> Result<SubsetRep> {
        let mut out = SubsetRep::empty(space);
        for e in elems {
            space.check(e, "subset element")?;
            out.parts[e.slot].finite.insert(e.index);
        }
        Ok(out)
    }

    /// Builds a subset from per-slot points and progressions, normalising.
    pub fn from_parts(space: &Space, parts: Vec<SlotSubset>) -> Result<SubsetRep> {
        if parts.len() != space.num_slots() {
            return Err(Error::SpaceMismatch("one part per slot expected".into()));
        }
        for (s, p) in parts.iter().enumerate() {
            for &x in &p.finite {
                space.check(Element::new(s, x), "subset element")?;
            }
            if !p.aps.is_empty() && !space.slots()[s].is_omega() {
                return Err(Error::InvalidMap(format!("progression in finite slot {s}")));
            }
        }
        let raw = SubsetRep { space: space.clone(), parts };
        let bounds = raw.bounds();
        SubsetRep::from_predicate(space, &bounds, |e| raw.contains(e))
    }

    /// Canonical subset from a membership oracle that is periodic above the
    /// given per-slot bounds.
    pub fn from_predicate(
        space: &Space,
        bounds: &[TailBound],
        pred: impl Fn(Element) -> bool,
    ) -> Result<SubsetRep> {
        let mut parts = Vec::with_capacity(space.num_slots());
        for (s, slot) in space.slots().iter().enumerate() {
            let part = match *slot {
                Slot::Fin(n) => SlotSubset {
                    finite: (0..n).filter(|&i| pred(Element::new(s, i))).collect(),
                    aps: vec![],
                },
                Slot::Omega => {
                    let (finite, aps) = normalize_set(bounds[s], |i| pred(Element::new(s, i)))?;
                    SlotSubset { finite, aps }
                }
            };
            parts.push(part);
        }
        Ok(SubsetRep { space: space.clone(), parts })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn parts(&self) -> &[SlotSubset] {
        &self.parts
    }

    pub fn part(&self, slot: usize) -> &SlotSubset {
        &self.parts[slot]
    }

    pub fn contains(&self, e: Element) -> bool {
        self.space.contains(e) && self.parts[e.slot].contains(e.index)
    }

    pub fn is_empty(&self) -> bool {
        self.parts.iter().all(SlotSubset::is_empty)
    }

    pub fn is_finite(&self) -> bool {
        self.parts.iter().all(|p| p.aps.is_empty())
    }

    /// Number of elements, if finite.
    pub fn len(&self) -> Option<u64> {
        self.is_finite().then(|| self.parts.iter().map(|p| p.finite.len() as u64).sum())
    }

    /// Elements in slot-major order, if finite.
    pub fn elements(&self) -> Option<Vec<Element>> {
        self.is_finite().then(|| {
            self.parts
                .iter()
                .enumerate()
                .flat_map(|(s, p)| p.finite.iter().map(move |&i| Element::new(s, i)))
                .collect()
        })
    }

    /// Per-slot bounds above which membership is periodic.
    pub fn bounds(&self) -> Vec<TailBound> {
        self.parts.iter().map(SlotSubset::bound).collect()
    }

    pub fn bound(&self, slot: usize) -> TailBound {
        self.parts[slot].bound()
    }

    fn combine(&self, other: &SubsetRep, op: impl Fn(bool, bool) -> bool) -> Result<SubsetRep> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch("subsets of different spaces".into()));
        }
        let bounds: Vec<_> =
            self.bounds().into_iter().zip(other.bounds()).map(|(a, b)| a.join(b)).collect();
        SubsetRep::from_predicate(&self.space, &bounds, |e| op(self.contains(e), other.contains(e)))
    }

    pub fn union(&self, other: &SubsetRep) -> Result<SubsetRep> {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &SubsetRep) -> Result<SubsetRep> {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &SubsetRep) -> Result<SubsetRep> {
        self.combine(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> SubsetRep {
        let bounds = self.bounds();
        SubsetRep::from_predicate(&self.space, &bounds, |e| !self.contains(e))
            .expect("complement of a normal form is periodic")
    }

    pub fn is_subset_of(&self, other: &SubsetRep) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }
}

impl fmt::Display for SubsetRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (s, p) in self.parts.iter().enumerate() {
            if p.is_empty() {
                continue;
            }
            if !first {
                write!(f, "; ")?;
            }
            first = false;
            write!(f, "slot {s}: {{")?;
            let items: Vec<String> = p
                .finite
                .iter()
                .map(|x| x.to_string())
                .chain(p.aps.iter().map(|ap| ap.to_string()))
                .collect();
            write!(f, "{}}}", items.join(", "))?;
        }
        if first {
            write!(f, "{{}}")?;
        }
        Ok(())
    }
}

/// A subset presented as a space in its own right.
#[derive(Clone, Debug)]
pub struct Renumbered {
    pub space: Space,
    /// Bijection from `space` onto the subset.
    pub embed: PamMap,
}

/// Turns a subset into a space: per source slot, one `Fin` slot for its
/// finite points (when there are any) followed by one `Omega` slot per
/// progression.
pub fn renumber_subset(subset: &SubsetRep) -> Renumbered {
    let mut slots = Vec::new();
    let mut exceptions = Vec::new();
    let mut pieces = Vec::new();
    for (s, part) in subset.parts.iter().enumerate() {
        if !part.finite.is_empty() {
            let slot = slots.len();
            slots.push(Slot::Fin(part.finite.len() as u64));
            for (j, &x) in part.finite.iter().enumerate() {
                exceptions.push((Element::new(slot, j as u64), Element::new(s, x)));
            }
        }
        for ap in &part.aps {
            let slot = slots.len();
            slots.push(Slot::Omega);
            pieces.push(crate::map::ApPiece::new(slot, Ap::tail(0), s, *ap));
        }
    }
    let space = Space::new(slots);
    let embed = PamMap::new(&space, &subset.space, exceptions, pieces).expect("renumbering is valid");
    Renumbered { space, embed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn omega_set(finite: &[u64], aps: &[(u64, u64, u64)]) -> SubsetRep {
        let part = SlotSubset {
            finite: finite.iter().copied().collect(),
            aps: aps.iter().map(|&(r, m, c)| Ap::new(r, m, c).unwrap()).collect(),
        };
        SubsetRep::from_parts(&Space::omega(), vec![part]).unwrap()
    }

    #[test]
    fn evens_and_odds_complement() {
        let evens = omega_set(&[], &[(0, 2, 0)]);
        let odds = omega_set(&[], &[(1, 2, 0)]);
        assert_eq!(evens.complement(), odds);
        assert!(evens.intersect(&odds).unwrap().is_empty());
        assert_eq!(evens.union(&odds).unwrap(), SubsetRep::full(&Space::omega()));
    }

    #[test]
    fn normal_form_absorbs_points() {
        let a = omega_set(&[0, 2, 4, 7], &[(0, 2, 6)]);
        assert_eq!(a, omega_set(&[7], &[(0, 2, 0)]));
        assert_eq!(a.part(0).aps, vec![Ap::new(0, 2, 0).unwrap()]);
    }

    #[test]
    fn renumber_example() {
        let s = omega_set(&[0, 2], &[(1, 2, 5)]);
        let r = renumber_subset(&s);
        assert_eq!(r.space, Space::new([Slot::Fin(2), Slot::Omega]));
        assert_eq!(r.embed.eval(Element::new(0, 1)), Some(Element::new(0, 2)));
        assert_eq!(r.embed.eval(Element::new(1, 0)), Some(Element::new(0, 5)));
        assert_eq!(r.embed.eval(Element::new(1, 3)), Some(Element::new(0, 11)));
        assert!(r.embed.is_injective());
        assert_eq!(r.embed.image(), s);
    }

    #[test]
    fn renumber_whole_space() {
        let x = Space::new([Slot::Fin(3), Slot::Omega]);
        let r = renumber_subset(&SubsetRep::full(&x));
        assert_eq!(r.space, x);
        assert_eq!(r.embed, PamMap::identity(&x));
    }

    fn arb_subset() -> impl Strategy<Value = SubsetRep> {
        (
            proptest::collection::btree_set(0u64..40, 0..6),
            proptest::collection::vec((0u64..6, 1u64..6, 0u64..30), 0..3),
            proptest::collection::btree_set(0u64..4, 0..4),
        )
            .prop_map(|(fin, aps, small)| {
                let space = Space::new([Slot::Omega, Slot::Fin(4)]);
                let parts = vec![
                    SlotSubset {
                        finite: fin,
                        aps: aps.into_iter().map(|(r, m, c)| Ap::new(r, m, c).unwrap()).collect(),
                    },
                    SlotSubset { finite: small, aps: vec![] },
                ];
                SubsetRep::from_parts(&space, parts).unwrap()
            })
    }

    proptest! {
        #[test]
        fn boolean_algebra_pointwise(a in arb_subset(), b in arb_subset()) {
            let u = a.union(&b).unwrap();
            let i = a.intersect(&b).unwrap();
            let d = a.difference(&b).unwrap();
            let c = a.complement();
            for e in a.space().prefix(200) {
                prop_assert_eq!(u.contains(e), a.contains(e) || b.contains(e));
                prop_assert_eq!(i.contains(e), a.contains(e) && b.contains(e));
                prop_assert_eq!(d.contains(e), a.contains(e) && !b.contains(e));
                prop_assert_eq!(c.contains(e), !a.contains(e));
            }
            prop_assert_eq!(c.complement(), a.clone());
        }

        #[test]
        fn renumber_is_a_bijection_onto_the_subset(a in arb_subset()) {
            let r = renumber_subset(&a);
            let inj = r.embed.injectivity();
            prop_assert!(inj.injective && inj.total);
            prop_assert_eq!(r.embed.image(), a);
        }
    }
}
