use std::ops::ControlFlow;

use crate::csb::csb_bijection;
use crate::error::{Error, Result};
use crate::map::{ApPiece, PamMap};
use crate::orbit::{Dynamics, FuelPolicy, Outcome, Visitor};
use crate::periodic::TailBound;
use crate::space::{sum_space, Element, Slot, Space};
use crate::ap::Ap;
use crate::witness::Witness;

/// `host` swallows `guest`: a bijection `host + guest -> host`.
#[derive(Clone, Debug)]
pub struct SwallowWitness {
    pub host: Space,
    pub guest: Space,
    pub h: Witness,
}

impl SwallowWitness {
    pub fn new(host: &Space, guest: &Space, h: Witness) -> Result<SwallowWitness> {
        if h.source() != &host.concat(guest) || h.target() != host {
            return Err(Error::SpaceMismatch("swallow witness must map host + guest onto host".into()));
        }
        Ok(SwallowWitness { host: host.clone(), guest: guest.clone(), h })
    }

    /// `h` as a self-map of `host + guest`.
    pub(crate) fn self_map(&self) -> Result<PamMap> {
        let h = self
            .h
            .as_map()
            .ok_or_else(|| Error::Unsupported("swallow witness is only known pointwise".into()))?;
        let x = sum_space(&self.host, &self.guest);
        h.then(&x.left)
    }
}

/// Upgrades an injection `host + guest -> host` to a bijection, by
/// Cantor-Schroder-Bernstein against the inclusion of `host`.
pub fn make_swallow(u: &PamMap, host: &Space, guest: &Space, fuel: FuelPolicy) -> Result<SwallowWitness> {
    if u.source() != &host.concat(guest) || u.target() != host {
        return Err(Error::SpaceMismatch("expected u : host + guest -> host".into()));
    }
    let incl = sum_space(host, guest).left;
    let h = csb_bijection(u, &incl, fuel)?;
    SwallowWitness::new(host, guest, h)
}

struct Recorder(Vec<Element>);

impl Visitor for Recorder {
    fn visit(&mut self, state: Element) -> ControlFlow<()> {
        self.0.push(state);
        ControlFlow::Continue(())
    }

    fn skip(&mut self, _cycle: &[Element], _times: u64) -> u64 {
        0
    }
}

/// The cascades of a swallow witness with a finite guest space `B`, as an
/// injection `B x Omega -> host`: `(b, k)` goes to the k-th room of `b`'s cascade.
/// Slot `j` of the source is the j-th element of `B` in slot-major order.
pub fn omega_injection_from_swallow(w: &SwallowWitness, fuel: FuelPolicy) -> Result<PamMap> {
    let guests = w
        .guest
        .elements()
        .ok_or_else(|| Error::Precondition(format!("guest space {} must be finite", w.guest)))?;
    let hx = w.self_map()?;
    let dynamics = Dynamics::new(hx)?;
    let nh = w.host.num_slots();
    let source = Space::new(vec![Slot::Omega; guests.len()]);
    let mut orbits = Vec::new();
    for b in &guests {
        let start = Element::new(nh + b.slot, b.index);
        let mut rec = Recorder(Vec::new());
        match dynamics.walk(start, fuel, &mut rec) {
            Outcome::Escape(esc) => orbits.push((rec.0, esc)),
            Outcome::Undecided { steps } => return Err(Error::undecided(steps, format!("cascade of guest {b}"))),
            other => return Err(Error::NotBijective(format!("cascade of guest {b} is finite: {other:?}"))),
        }
    }
    let mut bounds = Vec::new();
    for (_, esc) in &orbits {
        bounds.push(TailBound::new(esc.entry_step + esc.cycle.len() as u64, esc.cycle.len() as u64));
    }
    let room = |j: usize, k: u64| -> Element {
        let (trace, esc) = &orbits[j];
        let step = k + 1;
        if (step as usize) < trace.len() {
            return trace[step as usize];
        }
        let q = esc.cycle.len() as u64;
        let off = step - esc.entry_step;
        let base = esc.cycle[(off % q) as usize];
        Element::new(base.slot, base.index + (off / q) * esc.drift)
    };
    PamMap::from_eval(&source, &w.host, &bounds, |e| Ok(Some(room(e.slot, e.index))))
}

/// A swallow witness from an injection `e : B x Omega -> host` (with `B`
/// finite): guests enter at the start of their row and every room on a row
/// moves one step along it.
pub fn swallow_from_omega_injection(e: &PamMap, host: &Space, guest: &Space, fuel: FuelPolicy) -> Result<SwallowWitness> {
    let guests = guest
        .elements()
        .ok_or_else(|| Error::Precondition(format!("guest space {guest} must be finite")))?;
    let rows = Space::new(vec![Slot::Omega; guests.len()]);
    if e.source() != &rows || e.target() != host {
        return Err(Error::SpaceMismatch(format!("expected e : {rows} -> {host}")));
    }
    e.require_injection("e")?;
    let shift_pieces: Vec<_> = (0..guests.len()).map(|j| ApPiece::new(j, Ap::tail(0), j, Ap::tail(1))).collect();
    let shift = PamMap::new(&rows, &rows, [], shift_pieces)?;
    let mover = e.invert()?.then(&shift)?.then(e)?;
    let stay = PamMap::identity(host).restrict(&e.image().complement())?;
    let on_host = mover.union(&stay)?;
    let entries: Vec<_> = guests
        .iter()
        .enumerate()
        .map(|(j, b)| (*b, e.eval(Element::new(j, 0)).expect("total")))
        .collect();
    let on_guest = PamMap::from_table(guest, host, entries)?;
    let u = PamMap::copair(&on_host, &on_guest)?;
    make_swallow(&u, host, guest, fuel)
}

/// From `C` swallowing `A` and `C` swallowing `B`, `C` swallows `A + B`:
/// `h = h2 . (h1 + id_B)`.
pub fn lemma1_combine(w1: &SwallowWitness, w2: &SwallowWitness) -> Result<SwallowWitness> {
    if w1.host != w2.host {
        return Err(Error::SpaceMismatch("both witnesses need the same host".into()));
    }
    let id_b = Witness::bijection(PamMap::identity(&w2.guest))?;
    let h = w1.h.sum(&id_b).then(&w2.h)?;
    SwallowWitness::new(&w1.host, &w1.guest.concat(&w2.guest), h)
}
