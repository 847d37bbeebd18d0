//! Spaces: ordered lists of finite and countable slots.

use std::fmt;

use crate::error::{Error, Result};
use crate::map::PamMap;

/// One block of a space: `{0, .., n-1}` or the naturals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Fin(u64),
    Omega,
}

impl Slot {
    pub fn contains(&self, index: u64) -> bool {
        match *self {
            Slot::Fin(n) => index < n,
            Slot::Omega => true,
        }
    }

    pub fn is_omega(&self) -> bool {
        matches!(self, Slot::Omega)
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Fin(n) => write!(f, "Fin({n})"),
            Slot::Omega => write!(f, "Omega"),
        }
    }
}

/// An address `(slot, index)`. Ordering is slot-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    pub slot: usize,
    pub index: u64,
}

impl Element {
    pub const fn new(slot: usize, index: u64) -> Element {
        Element { slot, index }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.slot, self.index)
    }
}

impl From<(usize, u64)> for Element {
    fn from((slot, index): (usize, u64)) -> Element {
        Element { slot, index }
    }
}

/// A disjoint union of slots. Equality ignores the provenance tag.
#[derive(Clone, Debug, Default)]
pub struct Space {
    slots: Vec<Slot>,
    provenance: Option<String>,
}

impl PartialEq for Space {
    fn eq(&self, other: &Self) -> bool {
        self.slots == other.slots
    }
}

impl Eq for Space {}

impl std::hash::Hash for Space {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.slots.hash(state);
    }
}

impl Space {
    pub fn new(slots: impl Into<Vec<Slot>>) -> Space {
        Space { slots: slots.into(), provenance: None }
    }

    pub fn empty() -> Space {
        Space::default()
    }

    pub fn fin(n: u64) -> Space {
        Space::new([Slot::Fin(n)])
    }

    pub fn omega() -> Space {
        Space::new([Slot::Omega])
    }

    pub fn with_provenance(mut self, tag: impl Into<String>) -> Space {
        self.provenance = Some(tag.into());
        self
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn slot(&self, i: usize) -> Option<Slot> {
        self.slots.get(i).copied()
    }

    pub fn contains(&self, e: Element) -> bool {
        self.slot(e.slot).is_some_and(|s| s.contains(e.index))
    }

    pub(crate) fn check(&self, e: Element, context: &str) -> Result<()> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(Error::OutOfSpace { element: e, context: context.to_string() })
        }
    }

    /// True when every slot is finite. For these spaces Dedekind-finite and
    /// finite coincide.
    pub fn is_dedekind_finite(&self) -> bool {
        self.slots.iter().all(|s| !s.is_omega())
    }

    pub fn cardinality(&self) -> Option<u64> {
        self.slots.iter().try_fold(0u64, |acc, s| match s {
            Slot::Fin(n) => Some(acc + n),
            Slot::Omega => None,
        })
    }

    /// All elements in slot-major order, or `None` if some slot is countable.
    pub fn elements(&self) -> Option<Vec<Element>> {
        self.is_dedekind_finite().then(|| self.prefix(u64::MAX))
    }

    /// The first `k` elements of each slot, slot-major.
    pub fn prefix(&self, k: u64) -> Vec<Element> {
        let mut out = Vec::new();
        for (s, slot) in self.slots.iter().enumerate() {
            let n = match slot {
                Slot::Fin(n) => (*n).min(k),
                Slot::Omega => k,
            };
            out.extend((0..n).map(|i| Element::new(s, i)));
        }
        out
    }

    /// `self + other`: slots of `other` follow those of `self`.
    pub fn concat(&self, other: &Space) -> Space {
        let mut slots = self.slots.clone();
        slots.extend_from_slice(&other.slots);
        let provenance = match (&self.provenance, &other.provenance) {
            (Some(a), Some(b)) => Some(format!("({a})+({b})")),
            _ => None,
        };
        Space { slots, provenance }
    }

    /// `k x self`, label-major: copy `l` occupies slots `l*s .. (l+1)*s`.
    pub fn repeat(&self, k: usize) -> Space {
        Space {
            slots: self.slots.repeat(k),
            provenance: self.provenance.as_ref().map(|p| format!("{k}x({p})")),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.slots.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]")
    }
}

/// `A + B` together with both inclusions.
#[derive(Clone, Debug)]
pub struct SumSpace {
    pub space: Space,
    pub left: PamMap,
    pub right: PamMap,
}

pub fn sum_space(a: &Space, b: &Space) -> SumSpace {
    let space = a.concat(b);
    let na = a.num_slots();
    let left = PamMap::slot_embedding(a, &space, &(0..na).collect::<Vec<_>>()).expect("prefix slots");
    let right = PamMap::slot_embedding(b, &space, &(na..space.num_slots()).collect::<Vec<_>>())
        .expect("suffix slots");
    SumSpace { space, left, right }
}

/// `k x A` with its label-major indexing.
#[derive(Clone, Debug)]
pub struct ProductSpace {
    pub space: Space,
    pub factor: Space,
    pub copies: usize,
}

pub fn product_fin_space(k: usize, a: &Space) -> ProductSpace {
    ProductSpace { space: a.repeat(k), factor: a.clone(), copies: k }
}

impl ProductSpace {
    pub fn to_product(&self, label: usize, e: Element) -> Element {
        debug_assert!(label < self.copies && e.slot < self.factor.num_slots());
        Element::new(label * self.factor.num_slots() + e.slot, e.index)
    }

    pub fn from_product(&self, e: Element) -> (usize, Element) {
        let s = self.factor.num_slots();
        (e.slot / s, Element::new(e.slot % s, e.index))
    }

    /// `A -> k x A`, onto copy `label`.
    pub fn copy_injection(&self, label: usize) -> PamMap {
        let s = self.factor.num_slots();
        let slots: Vec<usize> = (label * s..(label + 1) * s).collect();
        PamMap::slot_embedding(&self.factor, &self.space, &slots).expect("copy slots")
    }

    /// The partial map `k x A -> A` defined on copy `label`.
    pub fn copy_projection(&self, label: usize) -> PamMap {
        self.copy_injection(label).invert().expect("embeddings are injective")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinality_and_finiteness() {
        let a = Space::new([Slot::Fin(3), Slot::Fin(2)]);
        assert_eq!(a.cardinality(), Some(5));
        assert!(a.is_dedekind_finite());
        let b = Space::new([Slot::Fin(1), Slot::Omega]);
        assert!(!b.is_dedekind_finite());
        assert_eq!(b.cardinality(), None);
        assert!(Space::empty().is_dedekind_finite());
    }

    #[test]
    fn sum_and_product_layout() {
        let a = Space::new([Slot::Fin(3), Slot::Fin(2)]);
        let p = product_fin_space(3, &a);
        assert_eq!(p.space.num_slots(), 6);
        assert_eq!(p.to_product(2, Element::new(1, 1)), Element::new(5, 1));
        assert_eq!(p.from_product(Element::new(5, 1)), (2, Element::new(1, 1)));

        let s = sum_space(&Space::fin(2), &Space::omega());
        assert_eq!(s.space, Space::new([Slot::Fin(2), Slot::Omega]));
        assert_eq!(s.right.eval(Element::new(0, 7)), Some(Element::new(1, 7)));
    }

    #[test]
    fn sum_is_associative_on_slots() {
        let (a, b, c) = (Space::fin(1), Space::omega(), Space::fin(4));
        assert_eq!(a.concat(&b).concat(&c), a.concat(&b.concat(&c)));
    }
}
