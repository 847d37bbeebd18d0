//! Bijection and injection witnesses: explicit maps when the construction
//! stays eventually periodic, pointwise procedures otherwise.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::map::PamMap;
use crate::space::{Element, Space};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessKind {
    Bijection,
    Injection,
}

pub type PointFn = Arc<dyn Fn(Element) -> Result<Option<Element>> + Send + Sync>;

/// A witness computed on demand by bounded walks.
#[derive(Clone)]
pub struct Procedural {
    pub forward: PointFn,
    pub inverse: PointFn,
    pub provenance: String,
}

#[derive(Clone)]
pub enum Repr {
    Explicit(PamMap),
    Procedural(Procedural),
}

#[derive(Clone)]
pub struct Witness {
    kind: WitnessKind,
    source: Space,
    target: Space,
    repr: Repr,
}

pub type WitnessBijection = Witness;
pub type WitnessInjection = Witness;

impl fmt::Debug for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("Witness");
        d.field("kind", &self.kind).field("source", &self.source).field("target", &self.target);
        match &self.repr {
            Repr::Explicit(m) => d.field("map", m),
            Repr::Procedural(p) => d.field("procedural", &p.provenance),
        };
        d.finish()
    }
}

impl Witness {
    /// Wraps a map after checking it exactly.
    pub fn explicit(kind: WitnessKind, map: PamMap) -> Result<Witness> {
        match kind {
            WitnessKind::Bijection => map.require_bijection("witness")?,
            WitnessKind::Injection => map.require_injection("witness")?,
        }
        Ok(Witness { kind, source: map.source().clone(), target: map.target().clone(), repr: Repr::Explicit(map) })
    }

    pub fn bijection(map: PamMap) -> Result<Witness> {
        Witness::explicit(WitnessKind::Bijection, map)
    }

    pub fn procedural(kind: WitnessKind, source: &Space, target: &Space, p: Procedural) -> Witness {
        Witness { kind, source: source.clone(), target: target.clone(), repr: Repr::Procedural(p) }
    }

    pub fn kind(&self) -> WitnessKind {
        self.kind
    }

    pub fn source(&self) -> &Space {
        &self.source
    }

    pub fn target(&self) -> &Space {
        &self.target
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn as_map(&self) -> Option<&PamMap> {
        match &self.repr {
            Repr::Explicit(m) => Some(m),
            Repr::Procedural(_) => None,
        }
    }

    pub fn is_explicit(&self) -> bool {
        self.as_map().is_some()
    }

    pub fn provenance(&self) -> &str {
        match &self.repr {
            Repr::Explicit(_) => "explicit",
            Repr::Procedural(p) => &p.provenance,
        }
    }

    pub fn eval(&self, x: Element) -> Result<Option<Element>> {
        self.source.check(x, "witness argument")?;
        match &self.repr {
            Repr::Explicit(m) => Ok(m.eval(x)),
            Repr::Procedural(p) => (p.forward)(x),
        }
    }

    /// The preimage of `y`, if any.
    pub fn inverse_eval(&self, y: Element) -> Result<Option<Element>> {
        self.target.check(y, "witness argument")?;
        match &self.repr {
            Repr::Explicit(m) => Ok(m.preimage(y)),
            Repr::Procedural(p) => (p.inverse)(y),
        }
    }

    /// Forward values for a bijection or injection, which are always defined.
    pub fn apply(&self, x: Element) -> Result<Element> {
        self.eval(x)?.ok_or_else(|| Error::Precondition(format!("witness undefined at {x}")))
    }

    pub(crate) fn forward_fn(&self) -> PointFn {
        match &self.repr {
            Repr::Explicit(m) => {
                let m = m.clone();
                Arc::new(move |x| Ok(m.eval(x)))
            }
            Repr::Procedural(p) => p.forward.clone(),
        }
    }

    pub(crate) fn inverse_fn(&self) -> PointFn {
        match &self.repr {
            Repr::Explicit(m) => {
                let m = m.clone();
                Arc::new(move |y| Ok(m.preimage(y)))
            }
            Repr::Procedural(p) => p.inverse.clone(),
        }
    }

    /// `then . self`, explicit when both are.
    pub fn then(&self, then: &Witness) -> Result<Witness> {
        if self.target != then.source {
            return Err(Error::SpaceMismatch("witness composition".into()));
        }
        let kind = if self.kind == WitnessKind::Bijection && then.kind == WitnessKind::Bijection {
            WitnessKind::Bijection
        } else {
            WitnessKind::Injection
        };
        if let (Some(a), Some(b)) = (self.as_map(), then.as_map()) {
            return Witness::explicit(kind, a.then(b)?);
        }
        let (f1, f2, i1, i2) = (self.forward_fn(), then.forward_fn(), self.inverse_fn(), then.inverse_fn());
        let p = Procedural {
            forward: Arc::new(move |x| match f1(x)? {
                Some(y) => f2(y),
                None => Ok(None),
            }),
            inverse: Arc::new(move |z| match i2(z)? {
                Some(y) => i1(y),
                None => Ok(None),
            }),
            provenance: format!("({}) then ({})", self.provenance(), then.provenance()),
        };
        Ok(Witness::procedural(kind, &self.source, &then.target, p))
    }

    /// The inverse of a bijection.
    pub fn inverse(&self) -> Result<Witness> {
        if self.kind != WitnessKind::Bijection {
            return Err(Error::Precondition("only bijections have inverses".into()));
        }
        match &self.repr {
            Repr::Explicit(m) => Witness::bijection(m.invert()?),
            Repr::Procedural(p) => {
                let q = Procedural {
                    forward: p.inverse.clone(),
                    inverse: p.forward.clone(),
                    provenance: format!("inverse of ({})", p.provenance),
                };
                Ok(Witness::procedural(WitnessKind::Bijection, &self.target, &self.source, q))
            }
        }
    }

    /// Forgets surjectivity.
    pub fn as_injection(mut self) -> Witness {
        self.kind = WitnessKind::Injection;
        self
    }

    /// `self + other` on `A + B -> C + D`.
    pub fn sum(&self, other: &Witness) -> Witness {
        let kind = if self.kind == other.kind { self.kind } else { WitnessKind::Injection };
        if let (Some(a), Some(b)) = (self.as_map(), other.as_map()) {
            return Witness::explicit(kind, PamMap::sum(a, b)).expect("sum of witnesses");
        }
        let (so, to) = (self.source.num_slots(), self.target.num_slots());
        let (f1, f2, i1, i2) = (self.forward_fn(), other.forward_fn(), self.inverse_fn(), other.inverse_fn());
        let p = Procedural {
            forward: Arc::new(move |x: Element| {
                if x.slot < so {
                    f1(x)
                } else {
                    Ok(f2(Element::new(x.slot - so, x.index))?.map(|y| Element::new(y.slot + to, y.index)))
                }
            }),
            inverse: Arc::new(move |y: Element| {
                if y.slot < to {
                    i1(y)
                } else {
                    Ok(i2(Element::new(y.slot - to, y.index))?.map(|x| Element::new(x.slot + so, x.index)))
                }
            }),
            provenance: format!("({}) + ({})", self.provenance(), other.provenance()),
        };
        Witness::procedural(kind, &self.source.concat(&other.source), &self.target.concat(&other.target), p)
    }

    /// Checks round trips and distinctness on the first `k` elements of
    /// every slot (exact for explicit witnesses).
    pub fn verify_prefix(&self, k: u64) -> Result<()> {
        if let Some(m) = self.as_map() {
            return match self.kind {
                WitnessKind::Bijection => m.require_bijection("witness"),
                WitnessKind::Injection => m.require_injection("witness"),
            };
        }
        let mut seen = std::collections::HashMap::new();
        for x in self.source.prefix(k) {
            let y = self.apply(x)?;
            self.target.check(y, "witness value")?;
            if let Some(first) = seen.insert(y, x) {
                return Err(Error::NotInjective { first, second: x });
            }
            if self.inverse_eval(y)? != Some(x) {
                return Err(Error::NotBijective(format!("inverse of {y} is not {x}")));
            }
        }
        if self.kind == WitnessKind::Bijection {
            for y in self.target.prefix(k) {
                let x = self
                    .inverse_eval(y)?
                    .ok_or_else(|| Error::NotBijective(format!("{y} has no preimage")))?;
                if self.apply(x)? != y {
                    return Err(Error::NotBijective(format!("{x} does not map back to {y}")));
                }
            }
        }
        Ok(())
    }

    /// Full table on a finite source.
    pub fn table(&self) -> Result<Vec<(Element, Element)>> {
        let elems = self
            .source
            .elements()
            .ok_or_else(|| Error::Unsupported("tabulating a witness on a countable space".into()))?;
        elems.into_iter().map(|x| Ok((x, self.apply(x)?))).collect()
    }
}
