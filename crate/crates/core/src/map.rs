//! Piecewise arithmetic-progression maps between spaces.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::ap::{gcd, Ap};
use crate::error::{Error, Result};
use crate::periodic::{normalize_map_slot, TailBound};
use crate::space::{Element, Slot, Space};
use crate::subset::SubsetRep;

/// Sends the k-th member of `src` (in `src_slot`) to the k-th member of `dst`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ApPiece {
    pub src_slot: usize,
    pub src: Ap,
    pub dst_slot: usize,
    pub dst: Ap,
}

impl ApPiece {
    pub fn new(src_slot: usize, src: Ap, dst_slot: usize, dst: Ap) -> ApPiece {
        ApPiece { src_slot, src, dst_slot, dst }
    }

    pub fn apply(&self, x: u64) -> Option<u64> {
        self.src.index_of(x).map(|k| self.dst.nth(k))
    }

    pub fn preimage(&self, y: u64) -> Option<u64> {
        self.dst.index_of(y).map(|k| self.src.nth(k))
    }

    pub fn is_translation(&self) -> bool {
        self.src.modulus() == self.dst.modulus()
    }

    /// `dst.start - src.start`; the displacement when this is a translation.
    pub fn shift(&self) -> i128 {
        self.dst.start() as i128 - self.src.start() as i128
    }
}

/// What [`PamMap::injectivity`] found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Injectivity {
    pub injective: bool,
    /// Defined on the whole source.
    pub total: bool,
    /// Image is the whole target.
    pub surjective: bool,
    pub collision: Option<(Element, Element)>,
}

impl Injectivity {
    pub fn bijective(&self) -> bool {
        self.injective && self.total && self.surjective
    }
}

/// A partial map given by finitely many exceptional pairs and finitely many
/// progression pieces. Exceptions take precedence over pieces.
///
/// Every constructor normalises, so two maps are `==` exactly when they agree
/// pointwise.
#[derive(Clone, Debug)]
pub struct PamMap {
    source: Space,
    target: Space,
    exceptions: BTreeMap<Element, Element>,
    pieces: Vec<ApPiece>,
    injectivity: OnceLock<Injectivity>,
}

impl PartialEq for PamMap {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.exceptions == other.exceptions
            && self.pieces == other.pieces
    }
}

impl Eq for PamMap {}

impl PamMap {
    pub fn new(
        source: &Space,
        target: &Space,
        exceptions: impl IntoIterator<Item = (Element, Element)>,
        pieces: impl IntoIterator<Item = ApPiece>,
    ) -> Result<PamMap> {
        let mut table = BTreeMap::new();
        for (x, y) in exceptions {
            source.check(x, "exception key")?;
            target.check(y, "exception value")?;
            if let Some(old) = table.insert(x, y) {
                if old != y {
                    return Err(Error::InvalidMap(format!("{x} listed with two images")));
                }
            }
        }
        let pieces: Vec<ApPiece> = pieces.into_iter().collect();
        for (i, p) in pieces.iter().enumerate() {
            if source.slot(p.src_slot) != Some(Slot::Omega) || target.slot(p.dst_slot) != Some(Slot::Omega) {
                return Err(Error::InvalidMap(format!("piece {i} must join two Omega slots")));
            }
            for q in &pieces[..i] {
                if q.src_slot == p.src_slot && q.src.intersect(&p.src).is_some() {
                    return Err(Error::InvalidMap(format!("piece {i} overlaps an earlier piece")));
                }
            }
        }
        let raw = PamMap {
            source: source.clone(),
            target: target.clone(),
            exceptions: table,
            pieces,
            injectivity: OnceLock::new(),
        };
        let bounds = raw.source_bounds();
        PamMap::from_eval(source, target, &bounds, |x| Ok(raw.eval(x)))
    }

    /// Canonical map from a pointwise oracle that is class-wise affine above
    /// the per-slot bounds.
    pub fn from_eval(
        source: &Space,
        target: &Space,
        bounds: &[TailBound],
        eval: impl Fn(Element) -> Result<Option<Element>>,
    ) -> Result<PamMap> {
        let checked = |x: Element| -> Result<Option<Element>> {
            let y = eval(x)?;
            if let Some(y) = y {
                target.check(y, "map value")?;
            }
            Ok(y)
        };
        let mut exceptions = BTreeMap::new();
        let mut pieces = Vec::new();
        for (s, slot) in source.slots().iter().enumerate() {
            match *slot {
                Slot::Fin(n) => {
                    for i in 0..n {
                        let x = Element::new(s, i);
                        if let Some(y) = checked(x)? {
                            exceptions.insert(x, y);
                        }
                    }
                }
                Slot::Omega => {
                    let (exc, ps) = normalize_map_slot(bounds[s], |i| checked(Element::new(s, i)))?;
                    exceptions.extend(exc.into_iter().map(|(i, y)| (Element::new(s, i), y)));
                    for (src, dst_slot, dst) in ps {
                        if target.slot(dst_slot) != Some(Slot::Omega) {
                            return Err(Error::NotPeriodic(format!("infinitely many values in finite slot {dst_slot}")));
                        }
                        pieces.push(ApPiece::new(s, src, dst_slot, dst));
                    }
                }
            }
        }
        Ok(PamMap {
            source: source.clone(),
            target: target.clone(),
            exceptions,
            pieces,
            injectivity: OnceLock::new(),
        })
    }

    /// A finite table. Every key must lie in a finite slot or be listed explicitly.
    pub fn from_table(source: &Space, target: &Space, pairs: impl IntoIterator<Item = (Element, Element)>) -> Result<PamMap> {
        PamMap::new(source, target, pairs, [])
    }

    pub fn identity(space: &Space) -> PamMap {
        let slots: Vec<usize> = (0..space.num_slots()).collect();
        PamMap::slot_embedding(space, space, &slots).expect("identity")
    }

    pub fn empty(source: &Space, target: &Space) -> PamMap {
        PamMap::new(source, target, [], []).expect("empty map")
    }

    /// Sends slot `s` of `source` identically onto slot `slot_map[s]` of `target`.
    pub fn slot_embedding(source: &Space, target: &Space, slot_map: &[usize]) -> Result<PamMap> {
        if slot_map.len() != source.num_slots() {
            return Err(Error::SpaceMismatch("slot map length".into()));
        }
        let mut exceptions = Vec::new();
        let mut pieces = Vec::new();
        for (s, &t) in slot_map.iter().enumerate() {
            match (source.slots()[s], target.slot(t)) {
                (Slot::Fin(n), Some(Slot::Fin(m))) if n <= m => {
                    exceptions.extend((0..n).map(|i| (Element::new(s, i), Element::new(t, i))));
                }
                (Slot::Omega, Some(Slot::Omega)) => pieces.push(ApPiece::new(s, Ap::tail(0), t, Ap::tail(0))),
                _ => return Err(Error::SpaceMismatch(format!("slot {s} cannot be sent to slot {t}"))),
            }
        }
        PamMap::new(source, target, exceptions, pieces)
    }

    pub fn source(&self) -> &Space {
        &self.source
    }

    pub fn target(&self) -> &Space {
        &self.target
    }

    pub fn exceptions(&self) -> &BTreeMap<Element, Element> {
        &self.exceptions
    }

    pub fn pieces(&self) -> &[ApPiece] {
        &self.pieces
    }

    pub fn is_translation_like(&self) -> bool {
        self.pieces.iter().all(ApPiece::is_translation)
    }

    pub fn eval(&self, x: Element) -> Option<Element> {
        if let Some(y) = self.exceptions.get(&x) {
            return Some(*y);
        }
        self.pieces
            .iter()
            .filter(|p| p.src_slot == x.slot)
            .find_map(|p| p.apply(x.index).map(|i| Element::new(p.dst_slot, i)))
    }

    pub fn try_eval(&self, x: Element) -> Result<Option<Element>> {
        self.source.check(x, "map argument")?;
        Ok(self.eval(x))
    }

    /// Some preimage of `y`, the least one among exceptions first.
    pub fn preimage(&self, y: Element) -> Option<Element> {
        if let Some((x, _)) = self.exceptions.iter().find(|(_, v)| **v == y) {
            return Some(*x);
        }
        self.pieces.iter().filter(|p| p.dst_slot == y.slot).find_map(|p| {
            let x = Element::new(p.src_slot, p.preimage(y.index)?);
            (!self.exceptions.contains_key(&x)).then_some(x)
        })
    }

    fn source_bound(&self, slot: usize) -> TailBound {
        let mut b = TailBound::TRIVIAL;
        if let Some(Slot::Fin(n)) = self.source.slot(slot) {
            return TailBound::new(n, 1);
        }
        for x in self.exceptions.keys().filter(|x| x.slot == slot) {
            b = b.raise(x.index + 1);
        }
        for p in self.pieces.iter().filter(|p| p.src_slot == slot) {
            b = b.join(TailBound::new(p.src.start(), p.src.modulus()));
        }
        b
    }

    /// Per source slot, where the map becomes class-wise affine.
    pub fn source_bounds(&self) -> Vec<TailBound> {
        (0..self.source.num_slots()).map(|s| self.source_bound(s)).collect()
    }

    fn target_bound(&self, slot: usize) -> TailBound {
        let mut b = TailBound::TRIVIAL;
        for (x, y) in &self.exceptions {
            if y.slot == slot {
                b = b.raise(y.index + 1);
            }
            for p in self.pieces.iter().filter(|p| p.src_slot == x.slot && p.dst_slot == slot) {
                if let Some(v) = p.apply(x.index) {
                    b = b.raise(v + 1);
                }
            }
        }
        for p in self.pieces.iter().filter(|p| p.dst_slot == slot) {
            b = b.join(TailBound::new(p.dst.start(), p.dst.modulus()));
        }
        b
    }

    /// Per target slot, where preimages become class-wise affine.
    pub fn target_bounds(&self) -> Vec<TailBound> {
        (0..self.target.num_slots()).map(|s| self.target_bound(s)).collect()
    }

    /// Source bounds that also make `after(self(x))` periodic, where `after`
    /// is periodic above the given bounds on the target.
    pub(crate) fn pullback_bounds(&self, after: &[TailBound]) -> Vec<TailBound> {
        let mut bounds = self.source_bounds();
        for p in &self.pieces {
            let g = after[p.dst_slot];
            let b = &mut bounds[p.src_slot];
            if g.threshold > p.dst.start() {
                let k = (g.threshold - p.dst.start()).div_ceil(p.dst.modulus());
                *b = b.raise(p.src.nth(k));
            }
            let m = p.src.modulus() * (g.period / gcd(p.dst.modulus(), g.period));
            *b = b.join(TailBound::new(0, m));
        }
        bounds
    }

    /// `then . self`.
    pub fn then(&self, then: &PamMap) -> Result<PamMap> {
        if self.target != then.source {
            return Err(Error::SpaceMismatch(format!(
                "cannot compose: {} is not {}",
                self.target, then.source
            )));
        }
        let bounds = self.pullback_bounds(&then.source_bounds());
        PamMap::from_eval(&self.source, &then.target, &bounds, |x| Ok(self.eval(x).and_then(|y| then.eval(y))))
    }

    /// Inverse of an injective map, as a partial map on the target.
    pub fn invert(&self) -> Result<PamMap> {
        let inj = self.injectivity();
        if let Some((first, second)) = inj.collision {
            return Err(Error::NotInjective { first, second });
        }
        let bounds = self.target_bounds();
        PamMap::from_eval(&self.target, &self.source, &bounds, |y| Ok(self.preimage(y)))
    }

    pub fn restrict(&self, domain: &SubsetRep) -> Result<PamMap> {
        if domain.space() != &self.source {
            return Err(Error::SpaceMismatch("restriction domain".into()));
        }
        let bounds: Vec<_> = self.source_bounds().into_iter().zip(domain.bounds()).map(|(a, b)| a.join(b)).collect();
        PamMap::from_eval(&self.source, &self.target, &bounds, |x| {
            Ok(if domain.contains(x) { self.eval(x) } else { None })
        })
    }

    /// Keeps only the points whose image lies in `allowed`.
    pub fn restrict_image(&self, allowed: &SubsetRep) -> Result<PamMap> {
        if allowed.space() != &self.target {
            return Err(Error::SpaceMismatch("image restriction".into()));
        }
        let bounds = self.pullback_bounds(&allowed.bounds());
        PamMap::from_eval(&self.source, &self.target, &bounds, |x| {
            Ok(self.eval(x).filter(|y| allowed.contains(*y)))
        })
    }

    /// Union of two maps with disjoint domains.
    pub fn union(&self, other: &PamMap) -> Result<PamMap> {
        if self.source != other.source || self.target != other.target {
            return Err(Error::SpaceMismatch("union of maps between different spaces".into()));
        }
        if !self.domain().intersect(&other.domain())?.is_empty() {
            return Err(Error::InvalidMap("union of maps with overlapping domains".into()));
        }
        let bounds: Vec<_> =
            self.source_bounds().into_iter().zip(other.source_bounds()).map(|(a, b)| a.join(b)).collect();
        PamMap::from_eval(&self.source, &self.target, &bounds, |x| Ok(self.eval(x).or_else(|| other.eval(x))))
    }

    /// `[f, g] : X + Y -> Z` from `f : X -> Z` and `g : Y -> Z`.
    pub fn copair(f: &PamMap, g: &PamMap) -> Result<PamMap> {
        if f.target != g.target {
            return Err(Error::SpaceMismatch("copair needs a common target".into()));
        }
        let off = f.source.num_slots();
        let source = f.source.concat(&g.source);
        let shift = |x: &Element| Element::new(x.slot + off, x.index);
        let exceptions = f.exceptions.iter().map(|(x, y)| (*x, *y)).chain(g.exceptions.iter().map(|(x, y)| (shift(x), *y)));
        let pieces = f.pieces.iter().copied().chain(g.pieces.iter().map(|p| ApPiece { src_slot: p.src_slot + off, ..*p }));
        PamMap::new(&source, &f.target, exceptions.collect::<Vec<_>>(), pieces.collect::<Vec<_>>())
    }

    /// `f + g : A + B -> C + D`.
    pub fn sum(f: &PamMap, g: &PamMap) -> PamMap {
        let (so, to) = (f.source.num_slots(), f.target.num_slots());
        let source = f.source.concat(&g.source);
        let target = f.target.concat(&g.target);
        let exceptions: Vec<_> = f
            .exceptions
            .iter()
            .map(|(x, y)| (*x, *y))
            .chain(g.exceptions.iter().map(|(x, y)| (Element::new(x.slot + so, x.index), Element::new(y.slot + to, y.index))))
            .collect();
        let pieces: Vec<_> = f
            .pieces
            .iter()
            .copied()
            .chain(g.pieces.iter().map(|p| ApPiece { src_slot: p.src_slot + so, dst_slot: p.dst_slot + to, ..*p }))
            .collect();
        PamMap::new(&source, &target, exceptions, pieces).expect("sum of valid maps")
    }

    /// `k x f : k x A -> k x B`, acting copy by copy.
    pub fn lift_product(k: usize, f: &PamMap) -> PamMap {
        let mut out = PamMap::empty(&Space::empty(), &Space::empty());
        for _ in 0..k {
            out = PamMap::sum(&out, f);
        }
        out
    }

    /// The set of points where the map is defined.
    pub fn domain(&self) -> SubsetRep {
        SubsetRep::from_predicate(&self.source, &self.source_bounds(), |x| self.eval(x).is_some())
            .expect("domain of a normal form is periodic")
    }

    pub fn image(&self) -> SubsetRep {
        SubsetRep::from_predicate(&self.target, &self.target_bounds(), |y| self.preimage(y).is_some())
            .expect("image of a normal form is periodic")
    }

    /// Exact injectivity, totality and surjectivity. Cached.
    pub fn injectivity(&self) -> &Injectivity {
        self.injectivity.get_or_init(|| {
            let collision = self.find_collision();
            Injectivity {
                injective: collision.is_none(),
                total: self.domain() == SubsetRep::full(&self.source),
                surjective: self.image() == SubsetRep::full(&self.target),
                collision,
            }
        })
    }

    pub fn is_injective(&self) -> bool {
        self.injectivity().injective
    }

    pub fn is_bijective(&self) -> bool {
        self.injectivity().bijective()
    }

    /// Errors unless this is a total injection.
    pub fn require_injection(&self, what: &str) -> Result<()> {
        let inj = self.injectivity();
        if let Some((first, second)) = inj.collision {
            return Err(Error::NotInjective { first, second });
        }
        if !inj.total {
            return Err(Error::Precondition(format!("{what} is not defined everywhere")));
        }
        Ok(())
    }

    pub fn require_bijection(&self, what: &str) -> Result<()> {
        self.require_injection(what)?;
        if !self.injectivity().surjective {
            return Err(Error::NotBijective(format!("{what} is not onto its target")));
        }
        Ok(())
    }

    fn find_collision(&self) -> Option<(Element, Element)> {
        let mut seen: BTreeMap<Element, Element> = BTreeMap::new();
        for (x, y) in &self.exceptions {
            if let Some(first) = seen.insert(*y, *x) {
                return Some((first, *x));
            }
        }
        for (x, y) in &self.exceptions {
            for q in self.pieces.iter().filter(|q| q.dst_slot == y.slot) {
                if let Some(i) = q.preimage(y.index) {
                    let other = Element::new(q.src_slot, i);
                    if other != *x && !self.exceptions.contains_key(&other) {
                        return Some((*x.min(&other), *x.max(&other)));
                    }
                }
            }
        }
        let budget = 2 * self.exceptions.len() as u64 + 1;
        for (i, p) in self.pieces.iter().enumerate() {
            for q in self.pieces[i + 1..].iter().filter(|q| q.dst_slot == p.dst_slot) {
                let Some(both) = p.dst.intersect(&q.dst) else { continue };
                for k in 0..budget {
                    let y = both.nth(k);
                    let a = Element::new(p.src_slot, p.preimage(y).expect("in dst"));
                    let b = Element::new(q.src_slot, q.preimage(y).expect("in dst"));
                    if !self.exceptions.contains_key(&a) && !self.exceptions.contains_key(&b) {
                        return Some((a.min(b), a.max(b)));
                    }
                }
            }
        }
        None
    }

    /// Full table of a map on a finite source, in slot-major order.
    pub fn tabulate(&self) -> Result<Vec<(Element, Option<Element>)>> {
        let elems = self
            .source
            .elements()
            .ok_or_else(|| Error::Unsupported("tabulating a map on a countable space".into()))?;
        Ok(elems.into_iter().map(|x| (x, self.eval(x))).collect())
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn successor() -> PamMap {
        PamMap::new(&Space::omega(), &Space::omega(), [], [ApPiece::new(0, Ap::tail(0), 0, Ap::tail(1))]).unwrap()
    }

    fn swap_pairs() -> PamMap {
        PamMap::new(
            &Space::omega(),
            &Space::omega(),
            [],
            [
                ApPiece::new(0, Ap::new(0, 2, 0).unwrap(), 0, Ap::new(1, 2, 1).unwrap()),
                ApPiece::new(0, Ap::new(1, 2, 1).unwrap(), 0, Ap::new(0, 2, 0).unwrap()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn successor_is_injective_not_bijective() {
        let s = successor();
        let inj = s.injectivity();
        assert!(inj.injective && inj.total && !inj.surjective);
        assert!(!s.image().contains(Element::new(0, 0)));
    }

    #[test]
    fn swap_composed_with_itself_is_identity() {
        let f = swap_pairs();
        assert!(f.is_bijective());
        assert_eq!(f.then(&f).unwrap(), PamMap::identity(&Space::omega()));
        assert_eq!(f.invert().unwrap(), f);
    }

    #[test]
    fn finite_collision_reported() {
        let a = Space::fin(3);
        let f = PamMap::from_table(
            &a,
            &a,
            [(Element::new(0, 0), Element::new(0, 1)), (Element::new(0, 1), Element::new(0, 1)), (Element::new(0, 2), Element::new(0, 0))],
        )
        .unwrap();
        let inj = f.injectivity();
        assert!(!inj.injective);
        assert_eq!(inj.collision, Some((Element::new(0, 0), Element::new(0, 1))));
    }

    #[test]
    fn piece_collision_found_past_exceptions() {
        let f = PamMap::new(
            &Space::omega(),
            &Space::omega(),
            [(Element::new(0, 0), Element::new(0, 100))],
            [
                ApPiece::new(0, Ap::new(0, 2, 0).unwrap(), 0, Ap::tail(0)),
                ApPiece::new(0, Ap::new(1, 2, 1).unwrap(), 0, Ap::new(0, 3, 0).unwrap()),
            ],
        )
        .unwrap();
        let (a, b) = f.injectivity().collision.unwrap();
        assert_eq!(f.eval(a), f.eval(b));
        assert_ne!(a, b);
    }

    #[test]
    fn normal_form_moves_redundant_exceptions_into_pieces() {
        let f = PamMap::new(
            &Space::omega(),
            &Space::omega(),
            [(Element::new(0, 0), Element::new(0, 1))],
            [ApPiece::new(0, Ap::tail(1), 0, Ap::tail(2))],
        )
        .unwrap();
        assert_eq!(f, successor());
    }

    #[test]
    fn invert_successor_is_partial() {
        let p = successor().invert().unwrap();
        assert_eq!(p.eval(Element::new(0, 0)), None);
        assert_eq!(p.eval(Element::new(0, 5)), Some(Element::new(0, 4)));
        assert_eq!(successor().then(&p).unwrap(), PamMap::identity(&Space::omega()));
    }

    #[test]
    fn rejects_bad_input() {
        let bad = PamMap::new(&Space::fin(2), &Space::omega(), [], [ApPiece::new(0, Ap::tail(0), 0, Ap::tail(0))]);
        assert!(matches!(bad, Err(Error::InvalidMap(_))));
        let out = PamMap::from_table(&Space::fin(2), &Space::fin(2), [(Element::new(0, 0), Element::new(0, 5))]);
        assert!(matches!(out, Err(Error::OutOfSpace { .. })));
    }

    fn arb_translation_map() -> impl Strategy<Value = PamMap> {
        // A random bijection of omega built from a permutation of residues mod m
        // plus a finite permutation of small points.
        (1u64..5, any::<u64>(), proptest::collection::vec(0u64..6, 0..4)).prop_map(|(m, seed, swaps)| {
            let mut perm: Vec<u64> = (0..m).collect();
            let mut s = seed;
            for i in (1..perm.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let base = PamMap::new(
                &Space::omega(),
                &Space::omega(),
                [],
                (0..m).map(|r| ApPiece::new(0, Ap::new(r, m, 0).unwrap(), 0, Ap::new(perm[r as usize], m, 0).unwrap())).collect::<Vec<_>>(),
            )
            .unwrap();
            let mut table: Vec<u64> = (0..8).collect();
            for w in swaps.chunks(2) {
                if w.len() == 2 {
                    table.swap(w[0] as usize, w[1] as usize);
                }
            }
            let swap = PamMap::new(
                &Space::omega(),
                &Space::omega(),
                (0..8).map(|i| (Element::new(0, i), Element::new(0, table[i as usize]))).collect::<Vec<_>>(),
                [ApPiece::new(0, Ap::tail(8), 0, Ap::tail(8))],
            )
            .unwrap();
            base.then(&swap).unwrap()
        })
    }

    proptest! {
        #[test]
        fn compose_and_invert_agree_pointwise(f in arb_translation_map(), g in arb_translation_map()) {
            prop_assert!(f.is_bijective());
            let h = f.then(&g).unwrap();
            let fi = f.invert().unwrap();
            for x in Space::omega().prefix(100) {
                prop_assert_eq!(h.eval(x), g.eval(f.eval(x).unwrap()));
                prop_assert_eq!(fi.eval(f.eval(x).unwrap()), Some(x));
            }
            prop_assert_eq!(f.then(&fi).unwrap(), PamMap::identity(&Space::omega()));
            prop_assert_eq!(fi.invert().unwrap(), f);
        }
    }
}
