//! Graphviz output for the pictures behind the constructions.
//!
//! Node names are `A<slot>:<index>` for blue elements and `B<slot>:<index>`
//! for red ones. Countable slots are cut off after `prefix` elements and
//! the cut is noted in a comment.

use std::fmt::Write;

use crate::division::Arrow;
use crate::error::{Error, Result};
use crate::map::PamMap;
use crate::space::{product_fin_space, Element, Slot, Space};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DotKind {
    /// Arrows of a map `2 x A -> 2 x B`, linked end to end.
    Arrows,
    /// Triangles of a map `n x A -> n x B`, glued at vertices.
    Triangles,
    /// The two injections of a Cantor-Schroder-Bernstein instance.
    Csb,
}

impl std::str::FromStr for DotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<DotKind> {
        match s {
            "arrows" => Ok(DotKind::Arrows),
            "triangles" => Ok(DotKind::Triangles),
            "csb" => Ok(DotKind::Csb),
            _ => Err(Error::Parse(format!("unknown picture kind {s:?}"))),
        }
    }
}

fn header(out: &mut String, graph: &str, name: &str, spaces: &[&Space], prefix: u64) {
    writeln!(out, "{graph} {name} {{").unwrap();
    if spaces.iter().any(|s| s.cardinality().is_none()) {
        writeln!(out, "  // truncated: first {prefix} elements of each countable slot").unwrap();
    }
}

/// Finite slots in full, countable ones up to `prefix`.
fn visible(s: &Space, prefix: u64) -> Vec<Element> {
    let mut out = Vec::new();
    for (i, slot) in s.slots().iter().enumerate() {
        let k = match slot {
            Slot::Fin(k) => *k,
            Slot::Omega => prefix,
        };
        out.extend((0..k).map(|j| Element::new(i, j)));
    }
    out
}

fn shown(s: &Space, e: Element, prefix: u64) -> bool {
    !s.slots()[e.slot].is_omega() || e.index < prefix
}

fn node(out: &mut String, a: Arrow) {
    let colour = match a {
        Arrow::Blue(_) => "blue",
        Arrow::Red(_) => "red",
    };
    writeln!(out, "  \"{a}\" [color={colour}];").unwrap();
}

fn factor(space: &Space, n: usize) -> Result<Space> {
    if n == 0 || space.num_slots() % n != 0 {
        return Err(Error::SpaceMismatch(format!("{space} is not {n} copies of a space")));
    }
    Ok(Space::new(space.slots()[..space.num_slots() / n].to_vec()))
}

fn glued(f: &PamMap, n: usize, prefix: u64, graph: &str, name: &str, edge: &str) -> Result<String> {
    let (a, b) = (factor(f.source(), n)?, factor(f.target(), n)?);
    let (pa, pb) = (product_fin_space(n, &a), product_fin_space(n, &b));
    let mut out = String::new();
    header(&mut out, graph, name, &[&a, &b], prefix);
    let (xs, ys) = (visible(&a, prefix), visible(&b, prefix));
    for &x in &xs {
        node(&mut out, Arrow::Blue(x));
    }
    for &y in &ys {
        node(&mut out, Arrow::Red(y));
    }
    for &x in &xs {
        for l in 0..n {
            let Some(v) = f.eval(pa.to_product(l, x)) else { continue };
            let (m, y) = pb.from_product(v);
            if !shown(&b, y, prefix) {
                continue;
            }
            writeln!(out, "  \"{}\" {edge} \"{}\" [taillabel=\"{l}\", headlabel=\"{m}\"];", Arrow::Blue(x), Arrow::Red(y))
                .unwrap();
        }
    }
    out.push_str("}\n");
    Ok(out)
}

/// Blue and red arrows as nodes; each link joins an end of a blue arrow
/// (0 tail, 1 head) to an end of a red one.
pub fn arrows_dot(f: &PamMap, prefix: u64) -> Result<String> {
    glued(f, 2, prefix, "graph", "arrows", "--")
}

pub fn triangles_dot(n: usize, f: &PamMap, prefix: u64) -> Result<String> {
    glued(f, n, prefix, "graph", "triangles", "--")
}

/// `f : A -> B` as solid edges, `g : B -> A` as dashed ones. Elements with
/// no preimage, where chains start, get a double outline.
pub fn csb_dot(f: &PamMap, g: &PamMap, prefix: u64) -> Result<String> {
    let (a, b) = (f.source(), f.target());
    if g.source() != b || g.target() != a {
        return Err(Error::SpaceMismatch("g must go back from the target of f to its source".into()));
    }
    let mut out = String::new();
    header(&mut out, "digraph", "csb", &[a, b], prefix);
    let (xs, ys) = (visible(a, prefix), visible(b, prefix));
    let start = |m: &PamMap, e: Element| m.preimage(e).is_none();
    for &x in &xs {
        let extra = if start(g, x) { ", peripheries=2" } else { "" };
        writeln!(out, "  \"{}\" [color=blue{extra}];", Arrow::Blue(x)).unwrap();
    }
    for &y in &ys {
        let extra = if start(f, y) { ", peripheries=2" } else { "" };
        writeln!(out, "  \"{}\" [color=red{extra}];", Arrow::Red(y)).unwrap();
    }
    for &x in &xs {
        if let Some(y) = f.eval(x).filter(|&y| shown(b, y, prefix)) {
            writeln!(out, "  \"{}\" -> \"{}\" [color=blue];", Arrow::Blue(x), Arrow::Red(y)).unwrap();
        }
    }
    for &y in &ys {
        if let Some(x) = g.eval(y).filter(|&x| shown(a, x, prefix)) {
            writeln!(out, "  \"{}\" -> \"{}\" [color=red, style=dashed];", Arrow::Red(y), Arrow::Blue(x)).unwrap();
        }
    }
    out.push_str("}\n");
    Ok(out)
}

/// Dispatch on the kind; `g` is needed for [`DotKind::Csb`] only.
pub fn emit_dot(kind: DotKind, n: usize, f: &PamMap, g: Option<&PamMap>, prefix: u64) -> Result<String> {
    match kind {
        DotKind::Arrows => arrows_dot(f, prefix),
        DotKind::Triangles => triangles_dot(n, f, prefix),
        DotKind::Csb => csb_dot(f, g.ok_or_else(|| Error::Precondition("a CSB picture needs g".into()))?, prefix),
    }
}
