//! Forward walks of a partial self-map, decided exactly when the map is
//! translation-like above some threshold.
//!
//! Above a region bound `R`, every step of an analysable map moves a point
//! by a fixed displacement that depends only on its slot and its class
//! modulo `L`. A walk that stays above `R` long enough therefore repeats an
//! abstract state `(slot, x mod L)`; the change of index between the two
//! visits tells whether it escapes to infinity, falls back towards the
//! region, or closes up.

use std::collections::HashMap;
use std::ops::ControlFlow;
use std::sync::{Arc, OnceLock};

use crate::ap::lcm;
use crate::error::{Error, Result};
use crate::map::PamMap;
use crate::periodic::TailBound;
use crate::space::{Element, Slot, Space};
use crate::subset::SubsetRep;

/// Limit on the number of simulated steps in a single walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FuelPolicy {
    pub max_steps: u64,
}

impl Default for FuelPolicy {
    fn default() -> Self {
        FuelPolicy { max_steps: 1_000_000 }
    }
}

impl FuelPolicy {
    pub fn new(max_steps: u64) -> FuelPolicy {
        FuelPolicy { max_steps }
    }

    /// The default, overridden by `CCANCEL_FUEL` when it parses.
    pub fn from_env() -> FuelPolicy {
        std::env::var("CCANCEL_FUEL")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(FuelPolicy::new)
            .unwrap_or_default()
    }
}

pub type StepFn = Arc<dyn Fn(Element) -> Option<Element> + Send + Sync>;

#[derive(Clone)]
enum Stepper {
    Map(PamMap),
    Func(StepFn),
}

/// One period of a walk that runs off to infinity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Escape {
    /// Step at which the recorded period starts.
    pub entry_step: u64,
    /// The states of one period, in walk order.
    pub cycle: Vec<Element>,
    /// Increase of the index over one period.
    pub drift: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The visitor asked to stop here.
    Stopped { state: Element, steps: u64 },
    /// No further step is defined at `state`.
    Terminated { state: Element, steps: u64 },
    /// The walk closed up. `entry == 0` means it returned to its start.
    Cycle { entry: u64, period: u64 },
    Escape(Escape),
    Undecided { steps: u64 },
}

/// Observer of a walk.
pub trait Visitor {
    /// Called on each state, including the start.
    fn visit(&mut self, state: Element) -> ControlFlow<()>;

    /// The walk is about to fast-forward over `times` repetitions of `cycle`
    /// (all shifted down). Return how many the visitor accounts for.
    fn skip(&mut self, _cycle: &[Element], times: u64) -> u64 {
        times
    }
}

impl<F: FnMut(Element) -> ControlFlow<()>> Visitor for F {
    fn visit(&mut self, state: Element) -> ControlFlow<()> {
        self(state)
    }
}

#[derive(Debug)]
struct Analysis {
    region: u64,
    modulus: u64,
    bounds: Vec<TailBound>,
}

/// A partial self-map of a space, walked forward.
#[derive(Clone)]
pub struct Dynamics {
    space: Space,
    step: Stepper,
    observers: Vec<TailBound>,
    analysis: Arc<OnceLock<Option<Analysis>>>,
}

const MAX_MODULUS: u64 = 1 << 20;

impl Dynamics {
    pub fn new(step: PamMap) -> Result<Dynamics> {
        if step.source() != step.target() {
            return Err(Error::SpaceMismatch("dynamics needs a self-map".into()));
        }
        let space = step.source().clone();
        let observers = vec![TailBound::TRIVIAL; space.num_slots()];
        Ok(Dynamics { space, step: Stepper::Map(step), observers, analysis: Arc::default() })
    }

    /// Dynamics given only pointwise; walks are simulated under fuel.
    pub fn from_fn(space: &Space, step: StepFn) -> Dynamics {
        Dynamics {
            space: space.clone(),
            step: Stepper::Func(step),
            observers: vec![TailBound::TRIVIAL; space.num_slots()],
            analysis: Arc::default(),
        }
    }

    /// Registers periodic observations (for instance membership in a
    /// subset) so that walks and bounds respect them.
    pub fn observe(mut self, bounds: &[TailBound]) -> Dynamics {
        for (o, b) in self.observers.iter_mut().zip(bounds) {
            *o = o.join(*b);
        }
        self.analysis = Arc::default();
        self
    }

    pub fn observe_subset(self, s: &SubsetRep) -> Dynamics {
        let b = s.bounds();
        self.observe(&b)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn map(&self) -> Option<&PamMap> {
        match &self.step {
            Stepper::Map(m) => Some(m),
            Stepper::Func(_) => None,
        }
    }

    pub fn step(&self, x: Element) -> Option<Element> {
        match &self.step {
            Stepper::Map(m) => m.eval(x),
            Stepper::Func(f) => f(x),
        }
    }

    /// Whether walks are decided exactly rather than under fuel.
    pub fn is_exact(&self) -> bool {
        self.analysis().is_some()
    }

    /// Per slot, the threshold and period above which anything computed
    /// from a walk's outcome (with the registered observers) is class-wise
    /// periodic in the starting point. `None` for inexact dynamics.
    pub fn tail_bounds(&self) -> Option<Vec<TailBound>> {
        self.analysis().map(|a| a.bounds.clone())
    }

    fn analysis(&self) -> Option<&Analysis> {
        self.analysis.get_or_init(|| self.analyse()).as_ref()
    }

    fn analyse(&self) -> Option<Analysis> {
        let map = self.map()?;
        let n = self.space.num_slots();
        let mut entered = vec![false; n];
        let mut left = vec![false; n];
        for p in map.pieces() {
            entered[p.dst_slot] = true;
            left[p.src_slot] = true;
        }
        for p in map.pieces() {
            if !p.is_translation() && entered[p.src_slot] && left[p.dst_slot] {
                return None;
            }
        }
        let mut region = 0u64;
        let mut modulus = 1u64;
        for (x, y) in map.exceptions() {
            region = region.max(x.index + 1).max(y.index + 1);
        }
        for p in map.pieces() {
            region = region.max(p.src.start()).max(p.dst.start());
            modulus = lcm(modulus, p.src.modulus());
        }
        for o in &self.observers {
            region = region.max(o.threshold);
            modulus = lcm(modulus, o.period);
        }
        if modulus > MAX_MODULUS {
            return None;
        }
        // Abstract graph on (slot, class) for slots that can recur.
        let omega: Vec<usize> = (0..n).filter(|&s| self.space.slots()[s] == Slot::Omega).collect();
        let index_of = |s: usize, r: u64| -> usize { omega.iter().position(|&t| t == s).unwrap() * modulus as usize + r as usize };
        let total = omega.len() * modulus as usize;
        let mut next: Vec<Option<(usize, i128)>> = vec![None; total];
        let mut max_shift = 0u64;
        for &s in &omega {
            for r in 0..modulus {
                let x = crate::ap::first_at_least(r, modulus, region);
                let piece = map.pieces().iter().find(|p| p.src_slot == s && p.src.contains(x));
                if let Some(p) = piece.filter(|p| p.is_translation()) {
                    let shift = p.shift();
                    max_shift = max_shift.max(shift.unsigned_abs() as u64);
                    let y = (x as i128 + shift) as u64;
                    next[index_of(s, r)] = Some((index_of(p.dst_slot, y % modulus), shift));
                }
            }
        }
        let mut drift_lcm = 1u64;
        let mut state = vec![0u8; total];
        for start in 0..total {
            let mut path = Vec::new();
            let mut cur = Some(start);
            while let Some(c) = cur {
                if state[c] != 0 {
                    if state[c] == 1 {
                        let pos = path.iter().position(|&p| p == c).unwrap();
                        let d: i128 = path[pos..].iter().map(|&p: &usize| next[p].unwrap().1).sum();
                        if d != 0 {
                            drift_lcm = lcm(drift_lcm, d.unsigned_abs() as u64);
                        }
                    }
                    break;
                }
                state[c] = 1;
                path.push(c);
                cur = next[c].map(|(t, _)| t);
            }
            for p in path {
                state[p] = 2;
            }
        }
        let period = modulus.checked_mul(drift_lcm)?;
        let threshold = region + 2 * (total as u64) * max_shift + 1;
        let base = TailBound::new(threshold, period);
        let mut bounds: Vec<TailBound> = (0..n)
            .map(|s| match self.space.slots()[s] {
                Slot::Fin(k) => TailBound::new(k, 1),
                Slot::Omega => base,
            })
            .collect();
        for p in map.pieces().iter().filter(|p| !p.is_translation() && !entered[p.src_slot]) {
            let g = base;
            let b = &mut bounds[p.src_slot];
            if g.threshold > p.dst.start() {
                let k = (g.threshold - p.dst.start()).div_ceil(p.dst.modulus());
                *b = b.raise(p.src.nth(k));
            }
            let m = p.src.modulus() * (g.period / crate::ap::gcd(p.dst.modulus(), g.period));
            *b = b.join(TailBound::new(0, m));
        }
        Some(Analysis { region, modulus, bounds })
    }

    /// Walks forward from `start`, calling `visitor` on every state.
    pub fn walk(&self, start: Element, fuel: FuelPolicy, visitor: &mut dyn Visitor) -> Outcome {
        match self.analysis() {
            Some(a) => self.walk_exact(a, start, fuel, visitor),
            None => self.walk_simulated(start, fuel, visitor),
        }
    }

    fn walk_simulated(&self, start: Element, fuel: FuelPolicy, visitor: &mut dyn Visitor) -> Outcome {
        let mut seen: HashMap<Element, u64> = HashMap::new();
        let mut state = start;
        let mut steps = 0u64;
        loop {
            if let Some(i) = seen.insert(state, steps) {
                return Outcome::Cycle { entry: i, period: steps - i };
            }
            if visitor.visit(state).is_break() {
                return Outcome::Stopped { state, steps };
            }
            if steps >= fuel.max_steps {
                return Outcome::Undecided { steps };
            }
            match self.step(state) {
                Some(next) => state = next,
                None => return Outcome::Terminated { state, steps },
            }
            steps += 1;
        }
    }

    fn walk_exact(&self, a: &Analysis, start: Element, fuel: FuelPolicy, visitor: &mut dyn Visitor) -> Outcome {
        let in_region = |e: Element| self.space.slots()[e.slot] != Slot::Omega || e.index < a.region;
        let mut region_seen: HashMap<Element, u64> = HashMap::new();
        let mut abstract_seen: HashMap<(usize, u64), (u64, u64, usize)> = HashMap::new();
        let mut trace: Vec<Element> = Vec::new();
        let mut state = start;
        let mut steps = 0u64;
        let mut simulated = 0u64;
        loop {
            if in_region(state) {
                if let Some(i) = region_seen.insert(state, steps) {
                    return Outcome::Cycle { entry: i, period: steps - i };
                }
                abstract_seen.clear();
                trace.clear();
            } else {
                let key = (state.slot, state.index % a.modulus);
                if let Some(&(i, x0, pos)) = abstract_seen.get(&key) {
                    let cycle: Vec<Element> = trace[pos..].to_vec();
                    if state.index > x0 {
                        return Outcome::Escape(Escape { entry_step: i, cycle, drift: state.index - x0 });
                    }
                    if state.index == x0 {
                        return Outcome::Cycle { entry: i, period: steps - i };
                    }
                    let d = x0 - state.index;
                    let low = cycle.iter().map(|e| e.index).min().unwrap().checked_sub(d);
                    let times = match low {
                        Some(low) if low >= a.region => (low - a.region) / d,
                        _ => 0,
                    };
                    let times = if times > 0 { visitor.skip(&cycle, times) } else { 0 };
                    abstract_seen.clear();
                    trace.clear();
                    if times > 0 {
                        state = Element::new(state.slot, state.index - times * d);
                        steps += times * cycle.len() as u64;
                    }
                }
                abstract_seen.insert((state.slot, state.index % a.modulus), (steps, state.index, trace.len()));
                trace.push(state);
            }
            if visitor.visit(state).is_break() {
                return Outcome::Stopped { state, steps };
            }
            if simulated >= fuel.max_steps {
                return Outcome::Undecided { steps };
            }
            match self.step(state) {
                Some(next) => state = next,
                None => return Outcome::Terminated { state, steps },
            }
            steps += 1;
            simulated += 1;
        }
    }

    /// Walks without observing anything.
    pub fn run(&self, start: Element, fuel: FuelPolicy) -> Outcome {
        self.walk(start, fuel, &mut |_| ControlFlow::Continue(()))
    }

    /// First state after `start` satisfying `pred`. The predicate must be
    /// periodic above the registered observer bounds. `Ok(None)` when the
    /// walk ends, cycles or escapes without meeting it.
    pub fn find_forward(&self, start: Element, fuel: FuelPolicy, pred: impl Fn(Element) -> bool) -> Result<Option<Element>> {
        let mut first = true;
        let mut visitor = |e: Element| {
            if std::mem::take(&mut first) || !pred(e) {
                ControlFlow::Continue(())
            } else {
                ControlFlow::Break(())
            }
        };
        match self.walk(start, fuel, &mut visitor) {
            Outcome::Stopped { state, .. } => Ok(Some(state)),
            Outcome::Undecided { steps } => Err(Error::undecided(steps, format!("forward walk from {start}"))),
            // The period after the detected one has not been looked at yet.
            Outcome::Escape(esc) => Ok(esc
                .cycle
                .iter()
                .map(|e| Element::new(e.slot, e.index + esc.drift))
                .find(|&e| pred(e))),
            Outcome::Cycle { entry: 0, .. } if pred(start) => Ok(Some(start)),
            _ => Ok(None),
        }
    }
}

/// Which side a state of a two-sided walk lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    A,
    B,
}

/// Outcome of the backward walk used by the Cantor-Schroder-Bernstein construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WalkClassification {
    /// Stops at `at` on `side`, which has no preimage.
    Terminates { side: Side, at: Element, steps: u64 },
    /// Returns to its start.
    Cycle { period: u64 },
    /// Never repeats.
    Infinite,
}

/// Backward dynamics on `A + B` for injections `f : A -> B`, `g : B -> A`:
/// from `A` apply `g^-1`, from `B` apply `f^-1`.
pub fn backward_dynamics(f: &PamMap, g: &PamMap) -> Result<Dynamics> {
    if f.source() != g.target() || f.target() != g.source() {
        return Err(Error::SpaceMismatch("f : A -> B and g : B -> A required".into()));
    }
    let (a, b) = (f.source(), f.target());
    let x = crate::space::sum_space(a, b);
    let step_a = g.invert()?.then(&x.right)?;
    let step_b = f.invert()?.then(&x.left)?;
    Dynamics::new(PamMap::copair(&step_a, &step_b)?)
}

pub(crate) fn classify(dynamics: &Dynamics, split: usize, start: Element, fuel: FuelPolicy) -> Result<WalkClassification> {
    let side = |e: Element| if e.slot < split { Side::A } else { Side::B };
    let local = |e: Element| if e.slot < split { e } else { Element::new(e.slot - split, e.index) };
    match dynamics.run(start, fuel) {
        Outcome::Terminated { state, steps } => Ok(WalkClassification::Terminates { side: side(state), at: local(state), steps }),
        Outcome::Cycle { entry: 0, period } => Ok(WalkClassification::Cycle { period }),
        Outcome::Cycle { .. } | Outcome::Escape(_) => Ok(WalkClassification::Infinite),
        Outcome::Undecided { steps } => Err(Error::undecided(steps, format!("backward walk from {start}"))),
        Outcome::Stopped { .. } => unreachable!("no visitor stops"),
    }
}

/// Classifies the backward walk from `x` on `side`.
pub fn classify_backward_walk(f: &PamMap, g: &PamMap, side: Side, x: Element, fuel: FuelPolicy) -> Result<WalkClassification> {
    let split = f.source().num_slots();
    let start = match side {
        Side::A => {
            f.source().check(x, "walk start")?;
            x
        }
        Side::B => {
            f.target().check(x, "walk start")?;
            Element::new(x.slot + split, x.index)
        }
    };
    classify(&backward_dynamics(f, g)?, split, start, fuel)
}

/// The forward orbit `x, h(x), h(h(x)), ...` of a self-map, ending where `h`
/// is undefined.
pub fn orbit_stream(h: &PamMap, x: Element) -> impl Iterator<Item = Element> + '_ {
    std::iter::successors(Some(x), move |&e| h.eval(e))
}

/// Which parts a forward orbit visits infinitely often.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Visitation {
    /// The orbit is infinite; indices of the parts it keeps returning to.
    Infinite(std::collections::BTreeSet<usize>),
    /// The orbit stops at the given state.
    Finite(Element),
}

pub fn visitation_profile(h: &PamMap, x: Element, parts: &[SubsetRep], fuel: FuelPolicy) -> Result<Visitation> {
    let mut d = Dynamics::new(h.clone())?;
    for p in parts {
        d = d.observe_subset(p);
    }
    let hits = |states: &[Element]| -> std::collections::BTreeSet<usize> {
        (0..parts.len()).filter(|&i| states.iter().any(|&e| parts[i].contains(e))).collect()
    };
    match d.run(x, fuel) {
        Outcome::Terminated { state, .. } => Ok(Visitation::Finite(state)),
        Outcome::Escape(esc) => Ok(Visitation::Infinite(hits(&esc.cycle))),
        Outcome::Cycle { entry, period } => {
            let states: Vec<Element> = orbit_stream(h, x).skip(entry as usize).take(period as usize).collect();
            Ok(Visitation::Infinite(hits(&states)))
        }
        Outcome::Undecided { steps } => Err(Error::undecided(steps, format!("orbit of {x}"))),
        Outcome::Stopped { .. } => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ap::Ap;
    use crate::map::ApPiece;

    fn succ() -> PamMap {
        PamMap::new(&Space::omega(), &Space::omega(), [], [ApPiece::new(0, Ap::tail(0), 0, Ap::tail(1))]).unwrap()
    }

    #[test]
    fn successor_escapes() {
        let d = Dynamics::new(succ()).unwrap();
        assert!(d.is_exact());
        match d.run(Element::new(0, 5), FuelPolicy::default()) {
            Outcome::Escape(e) => assert_eq!(e.drift, 1),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn predecessor_terminates_quickly_from_far_away() {
        let d = Dynamics::new(succ().invert().unwrap()).unwrap();
        let out = d.run(Element::new(0, 1_000_000_000_000), FuelPolicy::new(1000));
        assert_eq!(out, Outcome::Terminated { state: Element::new(0, 0), steps: 1_000_000_000_000 });
    }

    #[test]
    fn swap_cycles() {
        let swap = PamMap::new(
            &Space::omega(),
            &Space::omega(),
            [],
            [
                ApPiece::new(0, Ap::new(0, 2, 0).unwrap(), 0, Ap::new(1, 2, 1).unwrap()),
                ApPiece::new(0, Ap::new(1, 2, 1).unwrap(), 0, Ap::new(0, 2, 0).unwrap()),
            ],
        )
        .unwrap();
        let d = Dynamics::new(swap).unwrap();
        assert_eq!(d.run(Element::new(0, 41), FuelPolicy::default()), Outcome::Cycle { entry: 0, period: 2 });
    }

    #[test]
    fn csb_walk_on_successors() {
        let s = succ();
        let w = classify_backward_walk(&s, &s, Side::A, Element::new(0, 4), FuelPolicy::default()).unwrap();
        assert_eq!(w, WalkClassification::Terminates { side: Side::A, at: Element::new(0, 0), steps: 4 });
        let w = classify_backward_walk(&s, &s, Side::A, Element::new(0, 3), FuelPolicy::default()).unwrap();
        assert_eq!(w, WalkClassification::Terminates { side: Side::B, at: Element::new(0, 0), steps: 3 });
    }

    #[test]
    fn doubling_is_simulated() {
        let dbl = PamMap::new(&Space::omega(), &Space::omega(), [], [ApPiece::new(0, Ap::tail(0), 0, Ap::new(0, 2, 0).unwrap())]).unwrap();
        let d = Dynamics::new(dbl.invert().unwrap()).unwrap();
        assert!(!d.is_exact());
        assert_eq!(d.run(Element::new(0, 96), FuelPolicy::default()), Outcome::Terminated { state: Element::new(0, 3), steps: 5 });
    }

    #[test]
    fn visitation_of_alternating_orbit() {
        let sp = Space::new([Slot::Omega, Slot::Omega]);
        let h = PamMap::new(&sp, &sp, [], [ApPiece::new(0, Ap::tail(0), 1, Ap::tail(0)), ApPiece::new(1, Ap::tail(0), 0, Ap::tail(1))]).unwrap();
        let parts = [SubsetRep::full(&Space::omega()), SubsetRep::full(&Space::omega())];
        let parts: Vec<SubsetRep> = parts
            .iter()
            .enumerate()
            .map(|(i, _)| SubsetRep::from_predicate(&sp, &[TailBound::TRIVIAL; 2], |e| e.slot == i).unwrap())
            .collect();
        let v = visitation_profile(&h, Element::new(0, 0), &parts, FuelPolicy::default()).unwrap();
        assert_eq!(v, Visitation::Infinite([0, 1].into_iter().collect()));
    }
}
