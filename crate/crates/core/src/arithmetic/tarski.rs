use std::collections::BTreeMap;

use super::swallow::{lemma1_combine, make_swallow, SwallowWitness};
use crate::error::{Error, Result};
use crate::map::PamMap;
use crate::orbit::{Dynamics, FuelPolicy, Outcome};
use crate::space::{sum_space, Element, Space};
use crate::subset::{renumber_subset, Renumbered, SubsetRep};
use crate::witness::Witness;

/// The guests of a swallow witness, split by the building their cascade
/// keeps returning to, with a swallow witness for each building.
#[derive(Clone, Debug)]
pub struct Lemma2Split {
    pub buildings: Vec<Space>,
    /// Partition of the guest space.
    pub parts: Vec<SubsetRep>,
    /// Each part as a space, with its embedding into the guest space.
    pub renumbered: Vec<Renumbered>,
    /// Building `i` swallows part `i`.
    pub witnesses: Vec<SwallowWitness>,
}

/// Splits the host into consecutive buildings of the given slot counts. A
/// guest belongs to the lowest-numbered building its cascade visits
/// infinitely often.
pub fn lemma2_split(w: &SwallowWitness, buildings: &[usize], fuel: FuelPolicy) -> Result<Lemma2Split> {
    let nh = w.host.num_slots();
    if buildings.iter().sum::<usize>() != nh {
        return Err(Error::SpaceMismatch("building slot counts must add up to the host".into()));
    }
    let offsets: Vec<usize> = buildings.iter().scan(0, |acc, &k| { let o = *acc; *acc += k; Some(o) }).collect();
    let building_of = |slot: usize| -> Option<usize> { (slot < nh).then(|| offsets.iter().rposition(|&o| o <= slot).unwrap()) };
    let spaces: Vec<Space> = offsets
        .iter()
        .zip(buildings)
        .map(|(&o, &k)| Space::new(w.host.slots()[o..o + k].to_vec()))
        .collect();

    let hx = w.self_map()?;
    let fwd = Dynamics::new(hx.clone())?;
    let bwd = Dynamics::new(hx.invert()?)?;
    let (Some(fb), Some(bb)) = (fwd.tail_bounds(), bwd.tail_bounds()) else {
        return Err(Error::Unsupported("cascades of this witness cannot be classified exactly".into()));
    };

    let class_of = |g: Element| -> Result<usize> {
        match fwd.run(Element::new(nh + g.slot, g.index), fuel) {
            Outcome::Escape(esc) => Ok(esc.cycle.iter().filter_map(|e| building_of(e.slot)).min().expect("cascades stay in the host")),
            Outcome::Undecided { steps } => Err(Error::undecided(steps, format!("cascade of guest {g}"))),
            other => Err(Error::NotBijective(format!("cascade of guest {g} does not run off: {other:?}"))),
        }
    };
    let mut classes: BTreeMap<Element, usize> = BTreeMap::new();
    let guest_bounds: Vec<_> = (0..w.guest.num_slots()).map(|s| fb[nh + s]).collect();
    let mut parts = Vec::new();
    for i in 0..buildings.len() {
        let err = std::cell::RefCell::new(None);
        let part = SubsetRep::from_predicate(&w.guest, &guest_bounds, |g| {
            let c = match classes.get(&g) {
                Some(c) => *c,
                None => match class_of(g) {
                    Ok(c) => c,
                    Err(e) => {
                        err.borrow_mut().get_or_insert(e);
                        usize::MAX
                    }
                },
            };
            c == i
        });
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        let part = part?;
        if let Some(elems) = part.elements() {
            classes.extend(elems.into_iter().map(|g| (g, i)));
        }
        parts.push(part);
    }

    let mut renumbered = Vec::new();
    let mut witnesses = Vec::new();
    for (i, part) in parts.iter().enumerate() {
        let r = renumber_subset(part);
        let (o, bi) = (offsets[i], &spaces[i]);
        let in_building = |e: Element| building_of(e.slot) == Some(i);
        let local = |e: Element| Element::new(e.slot - o, e.index);
        let first_room = |from: Element| -> Result<Option<Element>> { Ok(fwd.find_forward(from, fuel, in_building)?.map(local)) };
        let nb = bi.num_slots();
        let eval = |x: Element| -> Result<Option<Element>> {
            if x.slot >= nb {
                let g = r.embed.eval(Element::new(x.slot - nb, x.index)).expect("embedding is total");
                return first_room(Element::new(nh + g.slot, g.index));
            }
            let room = Element::new(o + x.slot, x.index);
            let on_cascade = match bwd.run(room, fuel) {
                Outcome::Terminated { state, .. } if state.slot >= nh => part.contains(Element::new(state.slot - nh, state.index)),
                Outcome::Undecided { steps } => return Err(Error::undecided(steps, format!("backward walk from room {room}"))),
                _ => false,
            };
            if on_cascade {
                first_room(room)
            } else {
                Ok(Some(x))
            }
        };
        let source = bi.concat(&r.space);
        let mut bounds: Vec<_> = (0..nb).map(|s| fb[o + s].join(bb[o + s])).collect();
        bounds.extend(r.space.slots().iter().map(|_| fb.iter().fold(crate::periodic::TailBound::TRIVIAL, |a, b| a.join(*b))));
        let u = PamMap::from_eval(&source, bi, &bounds, eval)?;
        u.require_injection("building witness")?;
        witnesses.push(make_swallow(&u, bi, &r.space, fuel)?);
        renumbered.push(r);
    }
    Ok(Lemma2Split { buildings: spaces, parts, renumbered, witnesses })
}

/// From `n x B` swallowing `A`, `B` swallows `A`.
pub fn lemma3_divide_swallow(w: &SwallowWitness, n: usize, fuel: FuelPolicy) -> Result<SwallowWitness> {
    if n == 0 || w.host.num_slots() % n != 0 {
        return Err(Error::SpaceMismatch(format!("host {} is not {n} copies of a space", w.host)));
    }
    let k = w.host.num_slots() / n;
    let b = Space::new(w.host.slots()[..k].to_vec());
    if b.repeat(n) != w.host {
        return Err(Error::SpaceMismatch(format!("host {} is not {n} copies of {b}", w.host)));
    }
    if n == 1 {
        return Ok(w.clone());
    }
    let split = lemma2_split(w, &vec![k; n], fuel)?;
    let mut acc = split.witnesses[0].clone();
    let mut psi = split.renumbered[0].embed.clone();
    for i in 1..n {
        acc = lemma1_combine(&acc, &split.witnesses[i])?;
        psi = PamMap::copair(&psi, &split.renumbered[i].embed)?;
    }
    let psi_inv = Witness::bijection(psi.invert()?)?;
    let id_b = Witness::bijection(PamMap::identity(&b))?;
    let h = id_b.sum(&psi_inv).then(&acc.h)?;
    SwallowWitness::new(&b, &w.guest, h)
}

/// Tarski's cancellation: from injections `s : B -> A` and
/// `t : n x A -> n x B`, a bijection `A -> B`.
pub fn tarski_cancel(s: &PamMap, t: &PamMap, n: usize, fuel: FuelPolicy) -> Result<Witness> {
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    s.require_injection("s")?;
    t.require_injection("t")?;
    let (a, b) = (s.target().clone(), s.source().clone());
    if t.source() != &a.repeat(n) || t.target() != &b.repeat(n) {
        return Err(Error::SpaceMismatch(format!("expected t : {n} x {a} -> {n} x {b}")));
    }
    let rest = s.image().complement();
    if rest.is_empty() {
        return Witness::bijection(s.invert()?);
    }
    let c = renumber_subset(&rest);
    let phi = PamMap::copair(s, &c.embed)?;
    phi.require_bijection("[s, embed]")?;

    let (nb, nc) = (b.num_slots(), c.space.num_slots());
    let nbc = b.repeat(n).concat(&c.space.repeat(n));
    let mut slot_map = Vec::new();
    for l in 0..n {
        slot_map.extend((0..nb).map(|j| l * (nb + nc) + j));
    }
    for l in 0..n {
        slot_map.extend((0..nc).map(|j| l * (nb + nc) + nb + j));
    }
    let reslot = PamMap::slot_embedding(&nbc, &b.concat(&c.space).repeat(n), &slot_map)?;
    let u = reslot.then(&PamMap::lift_product(n, &phi))?.then(t)?;
    let w1 = make_swallow(&u, &b.repeat(n), &c.space.repeat(n), fuel)?;

    let first_copy = sum_space(&c.space, &c.space.repeat(n - 1)).left;
    let restrict = PamMap::sum(&PamMap::identity(&b.repeat(n)), &first_copy);
    let h1 = w1
        .h
        .as_map()
        .ok_or_else(|| Error::Unsupported("swallow witness is only known pointwise".into()))?;
    let u2 = restrict.then(h1)?;
    let w2 = make_swallow(&u2, &b.repeat(n), &c.space, fuel)?;
    let w3 = lemma3_divide_swallow(&w2, n, fuel)?;
    Witness::bijection(phi.invert()?)?.then(&w3.h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ap::Ap;
    use crate::map::ApPiece;
    use crate::space::Slot;

    fn succ() -> PamMap {
        PamMap::new(&Space::omega(), &Space::omega(), [], [ApPiece::new(0, Ap::tail(0), 0, Ap::tail(1))]).unwrap()
    }

    #[test]
    fn tarski_on_successor_and_identity() {
        let t = PamMap::identity(&Space::omega().repeat(3));
        let w = tarski_cancel(&succ(), &t, 3, FuelPolicy::default()).unwrap();
        let m = w.as_map().expect("explicit");
        assert!(m.is_bijective());
    }

    #[test]
    fn tarski_with_bijective_s_inverts_it() {
        let a = Space::fin(4);
        let s = PamMap::from_table(&a, &a, (0..4).map(|i| (Element::new(0, i), Element::new(0, 3 - i)))).unwrap();
        let t = PamMap::identity(&a.repeat(2));
        let w = tarski_cancel(&s, &t, 2, FuelPolicy::default()).unwrap();
        assert_eq!(w.as_map().unwrap(), &s.invert().unwrap());
    }

    #[test]
    fn lemma2_on_empty_guests() {
        let host = Space::new([Slot::Omega, Slot::Omega, Slot::Omega]);
        let w = SwallowWitness::new(&host, &Space::empty(), Witness::bijection(PamMap::identity(&host)).unwrap()).unwrap();
        let split = lemma2_split(&w, &[1, 1, 1], FuelPolicy::default()).unwrap();
        assert!(split.parts.iter().all(SubsetRep::is_empty));
    }
}
