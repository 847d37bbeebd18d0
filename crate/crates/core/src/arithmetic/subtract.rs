use std::sync::Arc;

use crate::error::{Error, Result};
use crate::map::PamMap;
use crate::space::{Element, Space};
use crate::witness::{Procedural, Witness, WitnessKind};

/// From a bijection `A + C -> B + C` with `C` finite, a bijection `A -> B`:
/// follow `f` out of `A` and keep applying it while the value lands in `C`.
pub fn subtract_finite(f: &Witness, a: &Space, b: &Space, c: &Space) -> Result<Witness> {
    check_shapes(f.source(), f.target(), a, b, c)?;
    if let Some(m) = f.as_map() {
        return subtract_finite_map(m, a, b, c);
    }
    let (na, nb) = (a.num_slots(), b.num_slots());
    let limit = c.cardinality().unwrap_or(0) + 1;
    let (fwd, inv) = (f.forward_fn(), f.inverse_fn());
    let chase = move |step: &crate::witness::PointFn, from: usize, to: usize, x: Element| -> Result<Option<Element>> {
        let mut y = step(x)?;
        for _ in 0..limit {
            match y {
                Some(v) if v.slot >= to => y = step(Element::new(from + v.slot - to, v.index))?,
                _ => return Ok(y),
            }
        }
        Err(Error::NotBijective("walk through the finite summand does not leave it".into()))
    };
    let chase = Arc::new(chase);
    let (c1, c2) = (chase.clone(), chase);
    let p = Procedural {
        forward: Arc::new(move |x| c1(&fwd, na, nb, x)),
        inverse: Arc::new(move |y| c2(&inv, nb, na, y)),
        provenance: "finite subtraction".into(),
    };
    Ok(Witness::procedural(WitnessKind::Bijection, a, b, p))
}

/// [`subtract_finite`] for an explicit map; the result is explicit.
pub fn subtract_finite_map(f: &PamMap, a: &Space, b: &Space, c: &Space) -> Result<Witness> {
    check_shapes(f.source(), f.target(), a, b, c)?;
    f.require_bijection("f")?;
    let (na, nb) = (a.num_slots(), b.num_slots());
    let limit = c.cardinality().unwrap_or(0) + 1;
    let eval = |x: Element| -> Result<Option<Element>> {
        let mut y = f.eval(x);
        for _ in 0..limit {
            match y {
                Some(v) if v.slot >= nb => y = f.eval(Element::new(na + v.slot - nb, v.index)),
                _ => return Ok(y),
            }
        }
        Err(Error::NotBijective("walk through the finite summand does not leave it".into()))
    };
    let bounds = &f.source_bounds()[..na];
    Witness::bijection(PamMap::from_eval(a, b, bounds, eval)?)
}

fn check_shapes(source: &Space, target: &Space, a: &Space, b: &Space, c: &Space) -> Result<()> {
    if !c.is_dedekind_finite() {
        return Err(Error::Precondition(format!(
            "the common summand {c} is infinite; an infinite summand cannot be subtracted (1 + Omega is equinumerous with Omega)"
        )));
    }
    if source != &a.concat(c) || target != &b.concat(c) {
        return Err(Error::SpaceMismatch("expected f : A + C -> B + C".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ap::Ap;
    use crate::map::ApPiece;
    use crate::space::Slot;

    #[test]
    fn two_plus_c() {
        // A = {a0, a1}, B = {b0, b1}, C = {c}; f: a0->c, c->b1, a1->b0.
        let (a, b, c) = (Space::fin(2), Space::fin(2), Space::fin(1));
        let f = PamMap::from_table(
            &a.concat(&c),
            &b.concat(&c),
            [
                (Element::new(0, 0), Element::new(1, 0)),
                (Element::new(1, 0), Element::new(0, 1)),
                (Element::new(0, 1), Element::new(0, 0)),
            ],
        )
        .unwrap();
        let g = subtract_finite_map(&f, &a, &b, &c).unwrap();
        assert_eq!(g.table().unwrap(), vec![(Element::new(0, 0), Element::new(0, 1)), (Element::new(0, 1), Element::new(0, 0))]);
    }

    #[test]
    fn empty_c_is_identity_on_f() {
        let a = Space::omega();
        let f = PamMap::identity(&a);
        let g = subtract_finite_map(&f, &a, &a, &Space::empty()).unwrap();
        assert_eq!(g.as_map().unwrap(), &f);
    }

    #[test]
    fn infinite_c_rejected() {
        // 1 + Omega -> Omega, x -> x.
        let a = Space::fin(1);
        let c = Space::omega();
        let src = a.concat(&c);
        let f = PamMap::new(&src, &c, [(Element::new(0, 0), Element::new(0, 0))], [ApPiece::new(1, Ap::tail(0), 0, Ap::tail(1))]).unwrap();
        assert!(f.is_bijective());
        let err = subtract_finite_map(&f, &a, &Space::empty(), &c).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn countable_a_with_finite_c() {
        // Omega + 1 -> Omega + 1: shift Omega up by one, the extra point to 0, and 0's slot to the extra.
        let src = Space::new([Slot::Omega, Slot::Fin(1)]);
        let f = PamMap::new(
            &src,
            &src,
            [(Element::new(1, 0), Element::new(0, 0)), (Element::new(0, 0), Element::new(1, 0))],
            [ApPiece::new(0, Ap::tail(1), 0, Ap::tail(1))],
        )
        .unwrap();
        let g = subtract_finite_map(&f, &Space::omega(), &Space::omega(), &Space::fin(1)).unwrap();
        assert_eq!(g.as_map().unwrap(), &PamMap::identity(&Space::omega()));
    }
}
