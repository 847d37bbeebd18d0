//! The Cantor-Schroder-Bernstein bijection.
//!
//! For injections `f : A -> B` and `g : B -> A`, walk backwards from `x` in
//! `A` by alternating `g^-1` and `f^-1`. If the walk gets stuck in `B`, send
//! `x` to `g^-1(x)`; in every other case send it to `f(x)`.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::map::PamMap;
use crate::orbit::{backward_dynamics, classify, Dynamics, FuelPolicy, Side, WalkClassification};
use crate::space::Element;
use crate::witness::{Procedural, Witness, WitnessKind};

/// Which rule the bijection uses at a point of `A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsbRule {
    /// `x -> f(x)`.
    Forward,
    /// `x -> g^-1(x)`: the walk ends in `B`.
    SadieHawkins,
}

struct Csb {
    f: PamMap,
    f_inv: PamMap,
    g: PamMap,
    g_inv: PamMap,
    dynamics: Dynamics,
    split: usize,
    fuel: FuelPolicy,
}

impl Csb {
    fn new(f: &PamMap, g: &PamMap, fuel: FuelPolicy) -> Result<Csb> {
        f.require_injection("f")?;
        g.require_injection("g")?;
        if f.source() != g.target() || f.target() != g.source() {
            return Err(Error::SpaceMismatch("f : A -> B and g : B -> A required".into()));
        }
        Ok(Csb {
            f: f.clone(),
            f_inv: f.invert()?,
            g: g.clone(),
            g_inv: g.invert()?,
            dynamics: backward_dynamics(f, g)?,
            split: f.source().num_slots(),
            fuel,
        })
    }

    fn walk(&self, side: Side, x: Element) -> Result<WalkClassification> {
        let start = match side {
            Side::A => x,
            Side::B => Element::new(x.slot + self.split, x.index),
        };
        classify(&self.dynamics, self.split, start, self.fuel)
    }

    fn rule(&self, x: Element) -> Result<CsbRule> {
        Ok(match self.walk(Side::A, x)? {
            WalkClassification::Terminates { side: Side::B, .. } => CsbRule::SadieHawkins,
            _ => CsbRule::Forward,
        })
    }

    fn forward(&self, x: Element) -> Result<Option<Element>> {
        Ok(match self.rule(x)? {
            CsbRule::SadieHawkins => self.g_inv.eval(x),
            CsbRule::Forward => self.f.eval(x),
        })
    }

    fn inverse(&self, y: Element) -> Result<Option<Element>> {
        Ok(match self.walk(Side::B, y)? {
            WalkClassification::Terminates { side: Side::B, .. } => self.g.eval(y),
            _ => self.f_inv.eval(y),
        })
    }
}

/// A bijection `A -> B` from injections both ways. Explicit whenever the
/// backward walks can be decided exactly; otherwise procedural.
pub fn csb_bijection(f: &PamMap, g: &PamMap, fuel: FuelPolicy) -> Result<Witness> {
    let csb = Csb::new(f, g, fuel)?;
    if let Some(walk_bounds) = csb.dynamics.tail_bounds() {
        let bounds: Vec<_> = (0..csb.split)
            .map(|s| walk_bounds[s].join(f.source_bounds()[s]).join(csb.g_inv.source_bounds()[s]))
            .collect();
        let map = PamMap::from_eval(f.source(), f.target(), &bounds, |x| csb.forward(x))?;
        return Witness::bijection(map);
    }
    let (source, target) = (f.source().clone(), f.target().clone());
    let csb = Arc::new(csb);
    let (c1, c2) = (csb.clone(), csb);
    let p = Procedural {
        forward: Arc::new(move |x| c1.forward(x)),
        inverse: Arc::new(move |y| c2.inverse(y)),
        provenance: "cantor-schroder-bernstein".into(),
    };
    Ok(Witness::procedural(WitnessKind::Bijection, &source, &target, p))
}

/// The rule used at `x`.
pub fn csb_rule(f: &PamMap, g: &PamMap, x: Element, fuel: FuelPolicy) -> Result<CsbRule> {
    f.source().check(x, "csb point")?;
    Csb::new(f, g, fuel)?.rule(x)
}

/// How the components met by a prefix of `A` and `B` end.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CsbComponents {
    /// Starting points in `A` of one-sided components.
    pub a_starts: BTreeSet<Element>,
    /// Starting points in `B` of one-sided components (Sadie Hawkins).
    pub b_starts: BTreeSet<Element>,
    /// Points whose walk is a finite cycle.
    pub cyclic_points: u64,
    /// Points whose walk never ends (two-sided infinite or eventually so).
    pub unbounded_points: u64,
}

pub fn csb_components(f: &PamMap, g: &PamMap, prefix: u64, fuel: FuelPolicy) -> Result<CsbComponents> {
    let csb = Csb::new(f, g, fuel)?;
    let mut out = CsbComponents::default();
    let starts = f
        .source()
        .prefix(prefix)
        .into_iter()
        .map(|x| (Side::A, x))
        .chain(f.target().prefix(prefix).into_iter().map(|y| (Side::B, y)));
    for (side, x) in starts {
        match csb.walk(side, x)? {
            WalkClassification::Terminates { side: Side::A, at, .. } => {
                out.a_starts.insert(at);
            }
            WalkClassification::Terminates { side: Side::B, at, .. } => {
                out.b_starts.insert(at);
            }
            WalkClassification::Cycle { .. } => out.cyclic_points += 1,
            WalkClassification::Infinite => out.unbounded_points += 1,
        }
    }
    Ok(out)
}
