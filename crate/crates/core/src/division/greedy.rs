//! Greedy matching of blue and red triangles along path descriptions.
//!
//! Descriptions are scanned shortest first, then lexicographically; at each
//! description every still-unmatched blue triangle it leads to a
//! still-unmatched red triangle is married to it. Finite pictures are run
//! pointwise; countable ones with maps on whole progressions.

use std::collections::{BTreeMap, BTreeSet};

use super::complex::Complex;
use super::repair::pass_the_partner;
use super::PathDescription;
use crate::arithmetic::tarski_cancel;
use crate::error::{Error, Result};
use crate::map::PamMap;
use crate::orbit::FuelPolicy;
use crate::space::Element;
use crate::subset::SubsetRep;
use crate::witness::{Witness, WitnessKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GreedyConfig {
    /// Longest description scanned. `None` means twice the number of
    /// triangles (plus one) on finite pictures and 3 on countable ones.
    pub max_len: Option<usize>,
    pub fuel: FuelPolicy,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        GreedyConfig { max_len: None, fuel: FuelPolicy::default() }
    }
}

const COUNTABLE_MAX_LEN: usize = 3;

pub(crate) struct FiniteGreedy {
    pub pi: BTreeMap<Element, Element>,
    pub ub: BTreeSet<Element>,
    pub ur: BTreeSet<Element>,
}

/// Greedy matching on a finite complex, starting from the pairs in `init`.
pub(crate) fn finite_greedy(cx: &Complex, init: &BTreeMap<Element, Element>, cfg: GreedyConfig) -> Result<FiniteGreedy> {
    let (blues, reds) = match (cx.a.elements(), cx.b.elements()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Unsupported("pointwise greedy matching needs finite spaces".into())),
    };
    let mut pi = init.clone();
    let taken: BTreeSet<Element> = init.values().copied().collect();
    let mut ub: BTreeSet<Element> = blues.iter().copied().filter(|x| !init.contains_key(x)).collect();
    let mut ur: BTreeSet<Element> = reds.iter().copied().filter(|y| !taken.contains(y)).collect();
    let cap = cfg.max_len.unwrap_or(2 * (blues.len() + reds.len()) + 1);
    let hop = |k: usize, t: Element, e: usize| if k % 2 == 0 { cx.blue_hop(t, e) } else { cx.red_hop(t, e) };

    let mut len = 1;
    while len <= cap && !ub.is_empty() && !ur.is_empty() {
        let mut triples: Vec<(PathDescription, Element, Element)> = Vec::new();
        for &v in &ur {
            // layers[k]: triangles from which `v` is reached in `len - k` hops.
            let mut layers = vec![BTreeSet::new(); len + 1];
            layers[len].insert(v);
            for k in (0..len).rev() {
                let pool = if k % 2 == 0 { &blues } else { &reds };
                let next = &layers[k + 1];
                let here: BTreeSet<Element> = pool
                    .iter()
                    .copied()
                    .filter(|&t| (0..cx.n).any(|e| hop(k, t, e).is_some_and(|(_, s)| next.contains(&s))))
                    .collect();
                layers[k] = here;
            }
            for &u in layers[0].intersection(&ub) {
                let mut desc = Vec::with_capacity(len);
                let mut t = u;
                for k in 0..len {
                    let (e, (m, s)) = (0..cx.n)
                        .find_map(|e| hop(k, t, e).filter(|(_, s)| layers[k + 1].contains(s)).map(|h| (e, h)))
                        .expect("layer membership");
                    desc.push((e, m));
                    t = s;
                }
                triples.push((PathDescription(desc), u, v));
            }
        }
        triples.sort();
        for w in triples.windows(2) {
            if w[0].0 == w[1].0 && (w[0].1 == w[1].1 || w[0].2 == w[1].2) {
                return Err(Error::InvalidMap(format!("description {} matches a triangle twice", w[0].0)));
            }
        }
        for (_, u, v) in triples {
            if ub.contains(&u) && ur.contains(&v) {
                ub.remove(&u);
                ur.remove(&v);
                pi.insert(u, v);
            }
        }
        len += 2;
    }
    Ok(FiniteGreedy { pi, ub, ur })
}

/// Result of greedy matching with maps on whole progressions.
#[derive(Clone, Debug)]
pub struct StagedMatching {
    /// Matched pairs, blue to red.
    pub matched: PamMap,
    pub unmatched_blue: SubsetRep,
    pub unmatched_red: SubsetRep,
    /// Descriptions that matched something, in scan order.
    pub stages: Vec<PathDescription>,
    /// Longest description scanned.
    pub scanned: usize,
}

impl StagedMatching {
    pub fn is_perfect(&self) -> bool {
        self.unmatched_blue.is_empty() && self.unmatched_red.is_empty()
    }
}

fn partial_matching(m: &PamMap) -> Result<()> {
    match m.injectivity().collision {
        Some((first, second)) => Err(Error::NotInjective { first, second }),
        None => Ok(()),
    }
}

fn hop_maps(cx: &Complex) -> Result<[Vec<Vec<PamMap>>; 2]> {
    let mut blue = Vec::new();
    let mut red = Vec::new();
    for e in 0..cx.n {
        blue.push((0..cx.n).map(|m| cx.blue_hop_map(e, m)).collect::<Result<Vec<_>>>()?);
        red.push((0..cx.n).map(|m| cx.red_hop_map(e, m)).collect::<Result<Vec<_>>>()?);
    }
    Ok([blue, red])
}

/// The map `A -> B` following description `d` from every blue triangle.
fn path_map(cx: &Complex, hops: &[Vec<Vec<PamMap>>; 2], d: &PathDescription) -> Result<PamMap> {
    if d.0.is_empty() || d.0.len() % 2 == 0 {
        return Err(Error::Precondition("a description from blue to red has odd length".into()));
    }
    let mut m = PamMap::identity(&cx.a);
    for (k, &(e, n)) in d.0.iter().enumerate() {
        if e >= cx.n || n >= cx.n {
            return Err(Error::Precondition(format!("label out of range in {d}")));
        }
        m = m.then(&hops[k % 2][e][n])?;
    }
    Ok(m)
}

struct Stager<'a> {
    cx: &'a Complex,
    hops: [Vec<Vec<PamMap>>; 2],
    pi: PamMap,
    ub: SubsetRep,
    ur: SubsetRep,
    stages: Vec<PathDescription>,
}

impl Stager<'_> {
    fn done(&self) -> bool {
        self.ub.is_empty() || self.ur.is_empty()
    }

    fn leaf(&mut self, prefix: &PamMap, d: &[(usize, usize)]) -> Result<()> {
        let m = prefix.restrict(&self.ub)?.restrict_image(&self.ur)?;
        if m.domain().is_empty() {
            return Ok(());
        }
        partial_matching(&m)?;
        self.ub = self.ub.difference(&m.domain())?;
        self.ur = self.ur.difference(&m.image())?;
        self.pi = self.pi.union(&m)?;
        self.stages.push(PathDescription(d.to_vec()));
        Ok(())
    }

    fn dfs(&mut self, prefix: &PamMap, d: &mut Vec<(usize, usize)>, len: usize) -> Result<()> {
        if d.len() == len {
            return self.leaf(prefix, d);
        }
        let side = d.len() % 2;
        for e in 0..self.cx.n {
            for n in 0..self.cx.n {
                if self.done() {
                    return Ok(());
                }
                let next = prefix.then(&self.hops[side][e][n])?;
                if next.domain().is_empty() {
                    continue;
                }
                d.push((e, n));
                self.dfs(&next, d, len)?;
                d.pop();
            }
        }
        Ok(())
    }
}

fn staged(cx: &Complex, max_len: usize) -> Result<StagedMatching> {
    let mut st = Stager {
        cx,
        hops: hop_maps(cx)?,
        pi: PamMap::empty(&cx.a, &cx.b),
        ub: SubsetRep::full(&cx.a),
        ur: SubsetRep::full(&cx.b),
        stages: Vec::new(),
    };
    let mut len = 1;
    let mut scanned = 0;
    while len <= max_len && !st.done() {
        let start = PamMap::identity(&cx.a).restrict(&st.ub)?;
        st.dfs(&start, &mut Vec::new(), len)?;
        scanned = len;
        len += 2;
    }
    Ok(StagedMatching { matched: st.pi, unmatched_blue: st.ub, unmatched_red: st.ur, stages: st.stages, scanned })
}

fn default_cap(cx: &Complex) -> usize {
    match (cx.a.cardinality(), cx.b.cardinality()) {
        (Some(a), Some(b)) => 2 * (a + b) as usize + 1,
        _ => COUNTABLE_MAX_LEN,
    }
}

/// Greedy matching of `f : n x A -> n x B` with maps on progressions,
/// scanning descriptions up to `cfg.max_len`.
pub fn divide_by_n_staged(n: usize, f: &PamMap, cfg: GreedyConfig) -> Result<StagedMatching> {
    let cx = Complex::new(n, f)?;
    staged(&cx, cfg.max_len.unwrap_or_else(|| default_cap(&cx)))
}

/// The pairs one description matches among the given unmatched triangles.
pub fn greedy_match_stage(
    n: usize,
    f: &PamMap,
    d: &PathDescription,
    unmatched_blue: &SubsetRep,
    unmatched_red: &SubsetRep,
) -> Result<PamMap> {
    let cx = Complex::new(n, f)?;
    let m = path_map(&cx, &hop_maps(&cx)?, d)?.restrict(unmatched_blue)?.restrict_image(unmatched_red)?;
    partial_matching(&m)?;
    Ok(m)
}

enum Matched {
    Table(BTreeMap<Element, Element>),
    Staged(StagedMatching),
}

fn run_greedy(cx: &Complex, cfg: GreedyConfig) -> Result<Matched> {
    if cx.a.cardinality().is_some() && cx.b.cardinality().is_some() {
        let g = finite_greedy(cx, &BTreeMap::new(), cfg)?;
        if !g.ub.is_empty() {
            return Err(Error::NotBijective(format!("{} blue triangles left over on a finite picture", g.ub.len())));
        }
        Ok(Matched::Table(g.pi))
    } else {
        Ok(Matched::Staged(staged(cx, cfg.max_len.unwrap_or(COUNTABLE_MAX_LEN))?))
    }
}

fn undecided_leftovers(s: &StagedMatching) -> Error {
    Error::undecided(
        0,
        format!(
            "descriptions up to length {} leave blue {} and red {} unmatched",
            s.scanned, s.unmatched_blue, s.unmatched_red
        ),
    )
}

/// A bijection `A -> B` from a bijection `f : n x A -> n x B`.
pub fn divide_by_n(n: usize, f: &PamMap, fuel: FuelPolicy) -> Result<Witness> {
    divide_by_n_with(n, f, GreedyConfig { fuel, ..GreedyConfig::default() })
}

pub fn divide_by_n_with(n: usize, f: &PamMap, cfg: GreedyConfig) -> Result<Witness> {
    if n == 0 {
        return Err(Error::Precondition("cannot divide by zero".into()));
    }
    f.require_bijection("f")?;
    let cx = Complex::new(n, f)?;
    if n == 1 {
        return Witness::bijection(PamMap::new(&cx.a, &cx.b, f.exceptions().clone(), f.pieces().to_vec())?);
    }
    match run_greedy(&cx, cfg)? {
        Matched::Table(pi) => Witness::bijection(PamMap::from_table(&cx.a, &cx.b, pi)?),
        Matched::Staged(s) => match (s.unmatched_blue.is_empty(), s.unmatched_red.is_empty()) {
            (true, true) => Witness::bijection(s.matched),
            (false, true) => pass_the_partner(&cx, &s.matched, &s.unmatched_blue, cfg.fuel),
            (true, false) => pass_the_partner(&cx.flipped(), &s.matched.invert()?, &s.unmatched_red, cfg.fuel)?.inverse(),
            (false, false) => Err(undecided_leftovers(&s)),
        },
    }
}

/// An injection `A -> B` from an injection `t : n x A -> n x B`.
pub fn divide_inequality_by_n(n: usize, t: &PamMap, fuel: FuelPolicy) -> Result<Witness> {
    if n == 0 {
        return Err(Error::Precondition("cannot divide by zero".into()));
    }
    t.require_injection("t")?;
    let cx = Complex::new(n, t)?;
    let cfg = GreedyConfig { fuel, ..GreedyConfig::default() };
    match run_greedy(&cx, cfg)? {
        Matched::Table(pi) => Witness::explicit(WitnessKind::Injection, PamMap::from_table(&cx.a, &cx.b, pi)?),
        Matched::Staged(s) => match (s.unmatched_blue.is_empty(), s.unmatched_red.is_empty()) {
            (true, _) => Witness::explicit(WitnessKind::Injection, s.matched),
            // Every red triangle is taken, so B injects into A as well.
            (false, true) => Ok(tarski_cancel(&s.matched.invert()?, t, n, fuel)?.as_injection()),
            (false, false) => Err(undecided_leftovers(&s)),
        },
    }
}
