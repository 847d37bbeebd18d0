use crate::error::{Error, Result};
use crate::map::PamMap;
use crate::space::{product_fin_space, Element, ProductSpace, Space};

/// A map `n x A -> n x B` viewed as triangles: blue triangle `x` has
/// vertices `(l, x)`, red triangle `y` has vertices `(l, y)`, and `f` joins
/// blue vertices to red ones.
#[derive(Clone, Debug)]
pub(crate) struct Complex {
    pub n: usize,
    pub a: Space,
    pub b: Space,
    pub pa: ProductSpace,
    pub pb: ProductSpace,
    pub f: PamMap,
    pub finv: PamMap,
}

/// The factor `A` of a space of the form `n x A`.
pub(crate) fn factor(space: &Space, n: usize) -> Result<Space> {
    if n == 0 || space.num_slots() % n != 0 {
        return Err(Error::SpaceMismatch(format!("{space} is not {n} copies of a space")));
    }
    let a = Space::new(space.slots()[..space.num_slots() / n].to_vec());
    if a.repeat(n) != *space {
        return Err(Error::SpaceMismatch(format!("{space} is not {n} copies of {a}")));
    }
    Ok(a)
}

impl Complex {
    pub fn new(n: usize, f: &PamMap) -> Result<Complex> {
        let a = factor(f.source(), n)?;
        let b = factor(f.target(), n)?;
        f.require_injection("f")?;
        Ok(Complex {
            n,
            pa: product_fin_space(n, &a),
            pb: product_fin_space(n, &b),
            a,
            b,
            f: f.clone(),
            finv: f.invert()?,
        })
    }

    /// Leave blue triangle `x` by vertex `e`: the label entered and the red triangle.
    pub fn blue_hop(&self, x: Element, e: usize) -> Option<(usize, Element)> {
        self.f.eval(self.pa.to_product(e, x)).map(|v| self.pb.from_product(v))
    }

    pub fn red_hop(&self, y: Element, e: usize) -> Option<(usize, Element)> {
        self.finv.eval(self.pb.to_product(e, y)).map(|v| self.pa.from_product(v))
    }

    /// `x -> y` where leaving `x` by vertex `e` enters `y` at vertex `entry`.
    pub fn blue_hop_map(&self, e: usize, entry: usize) -> Result<PamMap> {
        self.pa.copy_injection(e).then(&self.f)?.then(&self.pb.copy_projection(entry))
    }

    pub fn red_hop_map(&self, e: usize, entry: usize) -> Result<PamMap> {
        self.pb.copy_injection(e).then(&self.finv)?.then(&self.pa.copy_projection(entry))
    }

    /// The complex with colours exchanged (`f^-1` as a map `n x B -> n x A`).
    pub fn flipped(&self) -> Complex {
        Complex {
            n: self.n,
            a: self.b.clone(),
            b: self.a.clone(),
            pa: self.pb.clone(),
            pb: self.pa.clone(),
            f: self.finv.clone(),
            finv: self.f.clone(),
        }
    }
}
