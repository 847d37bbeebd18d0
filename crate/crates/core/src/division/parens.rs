//! Division by two through parentheses.
//!
//! Each blue or red arrow is a parenthesis whose inside faces the arrow's
//! tail. The arrows glue end to end into strings (necklaces or bi-infinite
//! lines). Blue and red parentheses that match are married; if some are
//! left over they determine a direction along the string, and every blue
//! arrow marries its red neighbour up the street.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;
use std::sync::Arc;

use super::complex::Complex;
use super::greedy::{finite_greedy, GreedyConfig};
use super::Arrow;
use crate::error::{Error, Result};
use crate::map::PamMap;
use crate::orbit::{Dynamics, Escape, FuelPolicy, Outcome, Visitor};
use crate::periodic::TailBound;
use crate::space::{Element, Space};
use crate::witness::{Procedural, Witness, WitnessKind};

/// Which way "down the street" points, relative to an arrow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Down {
    /// Out of the arrow's head.
    Head,
    /// Out of the arrow's tail.
    Tail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    AllMatched,
    Down(Down),
}

/// Walks along strings. A state is an arrow end through which the walk
/// entered the arrow: blue ends are `2 x A`, red ends follow as `2 x B`.
struct Strings {
    cx: Complex,
    walk: Dynamics,
    split: usize,
    fuel: FuelPolicy,
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

fn flip(p: &crate::space::ProductSpace) -> Result<PamMap> {
    let k = p.factor.num_slots();
    let slots: Vec<usize> = (0..2 * k).map(|s| (s + k) % (2 * k)).collect();
    PamMap::slot_embedding(&p.space, &p.space, &slots)
}

impl Strings {
    fn new(f: &PamMap, fuel: FuelPolicy) -> Result<Strings> {
        f.require_bijection("f")?;
        let cx = Complex::new(2, f)?;
        let x = crate::space::sum_space(&cx.pa.space, &cx.pb.space);
        let blue = flip(&cx.pa)?.then(&cx.f)?.then(&x.right)?;
        let red = flip(&cx.pb)?.then(&cx.finv)?.then(&x.left)?;
        let walk = Dynamics::new(PamMap::copair(&blue, &red)?)?;
        Ok(Strings { split: cx.pa.space.num_slots(), cx, walk, fuel })
    }

    /// The state "entered `arrow` through end `end`".
    fn state(&self, arrow: Arrow, end: usize) -> Element {
        match arrow {
            Arrow::Blue(x) => self.cx.pa.to_product(end, x),
            Arrow::Red(y) => {
                let v = self.cx.pb.to_product(end, y);
                Element::new(v.slot + self.split, v.index)
            }
        }
    }

    fn decode(&self, s: Element) -> (Arrow, usize) {
        if s.slot < self.split {
            let (end, x) = self.cx.pa.from_product(s);
            (Arrow::Blue(x), end)
        } else {
            let (end, y) = self.cx.pb.from_product(Element::new(s.slot - self.split, s.index));
            (Arrow::Red(y), end)
        }
    }

    fn record(&self, start: Element) -> Result<(Vec<Element>, Outcome)> {
        let mut rec = Recorder(Vec::new());
        let out = self.walk.walk(start, self.fuel, &mut rec);
        match out {
            Outcome::Undecided { steps } => Err(Error::undecided(steps, "walk along a string")),
            Outcome::Terminated { .. } => Err(Error::NotBijective("a string ends".into())),
            _ => Ok((rec.0, out)),
        }
    }

    /// Matching parenthesis of `p`, by counting: start at one, walk out of
    /// the tail of `p`, add one on entering an arrow at its head and
    /// subtract one on entering at its tail.
    fn partner(&self, p: Arrow) -> Result<Option<Arrow>> {
        let weight = |s: Element| if self.decode(s).1 == 1 { 1i64 } else { -1 };
        let mut count = 0i64;
        let mut counts = Vec::new();
        let mut visitor = |s: Element| {
            count += weight(s);
            counts.push(count);
            if count == 0 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        };
        let out = self.walk.walk(self.state(p, 1), self.fuel, &mut NoSkip(&mut visitor));
        match out {
            Outcome::Stopped { state, .. } => Ok(Some(self.decode(state).0)),
            Outcome::Cycle { .. } => Ok(None),
            Outcome::Escape(esc) => Ok(self.partner_after_escape(&esc, &counts, weight)),
            Outcome::Undecided { steps } => Err(Error::undecided(steps, format!("matching {p}"))),
            Outcome::Terminated { .. } => Err(Error::NotBijective("a string ends".into())),
        }
    }

    fn partner_after_escape(&self, esc: &Escape, counts: &[i64], weight: impl Fn(Element) -> i64) -> Option<Arrow> {
        let delta: i64 = esc.cycle.iter().map(|&s| weight(s)).sum();
        if delta >= 0 {
            return None;
        }
        let first = esc.entry_step as usize;
        let window = &counts[first..first + esc.cycle.len()];
        let reps = window.iter().map(|&c| (c + (-delta) - 1) / -delta).min().unwrap();
        let i = window.iter().position(|&c| c + reps * delta <= 0).unwrap();
        let s = esc.cycle[i];
        Some(self.decode(Element::new(s.slot, s.index + reps as u64 * esc.drift)).0)
    }

    /// Direction of "down" at arrow `p`.
    fn orientation(&self, p: Arrow) -> Result<Orientation> {
        let is_blue = matches!(p, Arrow::Blue(_));
        // Weights of parentheses read left to right, where "right" is out of p's head.
        let (right, out) = self.record(self.state(p, 0))?;
        let w_right = |s: &Element| if self.decode(*s).1 == 0 { -1i64 } else { 1 };
        if let Outcome::Cycle { .. } = out {
            let beta: i64 = right.iter().map(w_right).sum();
            return Ok(match beta.cmp(&0) {
                std::cmp::Ordering::Greater => Orientation::Down(Down::Tail),
                std::cmp::Ordering::Less => Orientation::Down(Down::Head),
                std::cmp::Ordering::Equal => Orientation::AllMatched,
            });
        }
        let Outcome::Escape(er) = out else { unreachable!() };
        let (left, out) = self.record(self.state(p, 1))?;
        let Outcome::Escape(el) = out else {
            return Err(Error::NotPeriodic("string closes up in one direction only".into()));
        };
        let w_left = |s: &Element| -w_right(s);
        let cyc = |e: &Escape| e.entry_step as usize..e.entry_step as usize + e.cycle.len();
        let beta_r: i64 = right[cyc(&er)].iter().map(w_right).sum();
        let beta_l: i64 = left[cyc(&el)].iter().map(w_left).sum();
        if beta_r < 0 && beta_l > 0 {
            return Ok(Orientation::AllMatched);
        }
        if beta_r < 0 {
            return Ok(Orientation::Down(Down::Head));
        }
        if beta_l > 0 {
            return Ok(Orientation::Down(Down::Tail));
        }
        // Height profile S(pos) with S(-1) = 0 and S(pos) = S(pos-1) + w(pos).
        let mut s_right = Vec::with_capacity(right.len());
        let mut acc = 0i64;
        for s in &right {
            acc += w_right(s);
            s_right.push(acc);
        }
        // s_left[k] = S(-k) for k = 1 ..= entry + period.
        let left_len = el.entry_step as usize + el.cycle.len();
        let mut s_left = vec![0i64; left_len + 1];
        for k in 1..left_len {
            s_left[k + 1] = s_left[k] - w_left(&left[k]);
        }
        let g = s_right.iter().chain(&s_left[1..]).copied().min().unwrap();
        let left_cycle_min = s_left[el.entry_step as usize + 1..=left_len].iter().copied().min().unwrap();
        let right_cycle_min = s_right[cyc(&er)].iter().copied().min().unwrap();
        let first = if beta_l == 0 && left_cycle_min == g {
            None
        } else {
            (1..=left_len)
                .rev()
                .find(|&k| s_left[k] == g)
                .map(|k| -(k as i64))
                .or_else(|| s_right.iter().position(|&v| v == g).map(|k| k as i64))
        };
        let last = if beta_r == 0 && right_cycle_min == g {
            None
        } else {
            s_right
                .iter()
                .rposition(|&v| v == g)
                .map(|k| k as i64)
                .or_else(|| (1..=left_len).find(|&k| s_left[k] == g).map(|k| -(k as i64)))
        };
        let blue_at = |pos: i64| (pos.rem_euclid(2) == 0) == is_blue;
        Ok(match (first, last) {
            (Some(a), Some(_)) if blue_at(a) => Orientation::Down(Down::Head),
            (Some(_), Some(_)) => Orientation::Down(Down::Tail),
            (Some(_), None) => Orientation::Down(Down::Head),
            (None, Some(_)) => Orientation::Down(Down::Tail),
            (None, None) => Orientation::AllMatched,
        })
    }

    fn neighbour(&self, p: Arrow, end: usize) -> Arrow {
        let s = self.walk.step(self.state(p, 1 - end)).expect("strings do not end");
        self.decode(s).0
    }

    /// Partner of `p` in the division-by-two bijection.
    fn married(&self, p: Arrow) -> Result<Arrow> {
        let o = self.orientation(p)?;
        Ok(match (o, p) {
            (Orientation::AllMatched, _) => self.partner(p)?.ok_or_else(|| Error::NotPeriodic("matched string has an unmatched parenthesis".into()))?,
            // Blue marries up the street, red marries down.
            (Orientation::Down(Down::Head), Arrow::Blue(_)) | (Orientation::Down(Down::Tail), Arrow::Red(_)) => self.neighbour(p, 0),
            (Orientation::Down(Down::Tail), Arrow::Blue(_)) | (Orientation::Down(Down::Head), Arrow::Red(_)) => self.neighbour(p, 1),
        })
    }

    fn blue_bounds(&self) -> Option<Vec<TailBound>> {
        let wb = self.walk.tail_bounds()?;
        let fb = self.cx.f.source_bounds();
        let k = self.cx.a.num_slots();
        Some((0..k).map(|s| wb[s].join(wb[s + k]).join(fb[s]).join(fb[s + k])).collect())
    }
}

struct NoSkip<'a, F>(&'a mut F);

impl<F: FnMut(Element) -> ControlFlow<()>> Visitor for NoSkip<'_, F> {
    fn visit(&mut self, state: Element) -> ControlFlow<()> {
        (self.0)(state)
    }

    fn skip(&mut self, _cycle: &[Element], _times: u64) -> u64 {
        0
    }
}

/// The matching parenthesis of one arrow of `f : 2 x A -> 2 x B`.
pub fn paren_partner(f: &PamMap, arrow: Arrow, fuel: FuelPolicy) -> Result<Option<Arrow>> {
    Strings::new(f, fuel)?.partner(arrow)
}

/// The counts met while looking for the partner of `arrow`, one per
/// parenthesis visited, ending at zero if a partner is found.
pub fn paren_count_trace(f: &PamMap, arrow: Arrow, fuel: FuelPolicy) -> Result<Vec<(Arrow, i64)>> {
    let st = Strings::new(f, fuel)?;
    let mut count = 0i64;
    let mut trace = Vec::new();
    let mut visitor = |s: Element| {
        let (p, end) = st.decode(s);
        count += if end == 1 { 1 } else { -1 };
        trace.push((p, count));
        if count == 0 {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    };
    match st.walk.walk(st.state(arrow, 1), fuel, &mut NoSkip(&mut visitor)) {
        Outcome::Undecided { steps } => Err(Error::undecided(steps, format!("matching {arrow}"))),
        _ => Ok(trace),
    }
}

/// Direction of "down" at an arrow.
pub fn string_orientation(f: &PamMap, arrow: Arrow, fuel: FuelPolicy) -> Result<Orientation> {
    Strings::new(f, fuel)?.orientation(arrow)
}

/// Every arrow of a finite picture with its matching parenthesis.
pub fn match_parentheses(f: &PamMap, fuel: FuelPolicy) -> Result<BTreeMap<Arrow, Option<Arrow>>> {
    let st = Strings::new(f, fuel)?;
    let (a, b) = finite_sides(&st.cx.a, &st.cx.b)?;
    let arrows = a.into_iter().map(Arrow::Blue).chain(b.into_iter().map(Arrow::Red));
    arrows.map(|p| Ok((p, st.partner(p)?))).collect()
}

fn finite_sides(a: &Space, b: &Space) -> Result<(Vec<Element>, Vec<Element>)> {
    match (a.elements(), b.elements()) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::Unsupported("this needs finite spaces".into())),
    }
}

fn red(a: Arrow) -> Element {
    match a {
        Arrow::Red(y) => y,
        Arrow::Blue(_) => unreachable!("blue arrows marry red ones"),
    }
}

/// The division-by-two bijection `A -> B` for a bijection `f : 2 x A -> 2 x B`.
pub fn divide_by_two(f: &PamMap, fuel: FuelPolicy) -> Result<Witness> {
    let st = Strings::new(f, fuel)?;
    let (a, b) = (st.cx.a.clone(), st.cx.b.clone());
    if let Some(bounds) = st.blue_bounds() {
        let made = PamMap::from_eval(&a, &b, &bounds, |x| Ok(Some(red(st.married(Arrow::Blue(x))?))));
        match made {
            Ok(m) => return Witness::bijection(m),
            Err(Error::NotPeriodic(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let st = Arc::new(st);
    let (s1, s2) = (st.clone(), st);
    let p = Procedural {
        forward: Arc::new(move |x| Ok(Some(red(s1.married(Arrow::Blue(x))?)))),
        inverse: Arc::new(move |y| match s2.married(Arrow::Red(y))? {
            Arrow::Blue(x) => Ok(Some(x)),
            Arrow::Red(_) => unreachable!(),
        }),
        provenance: "division by two".into(),
    };
    Ok(Witness::procedural(WitnessKind::Bijection, &a, &b, p))
}

/// What the 2-omega greedy left unmatched, per string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoOmegaReport {
    /// One entry per string: how many parentheses the greedy left over.
    pub leftovers: Vec<usize>,
    pub paren_pairs: usize,
    pub path_pairs: usize,
}

impl TwoOmegaReport {
    pub fn max_leftover(&self) -> usize {
        self.leftovers.iter().copied().max().unwrap_or(0)
    }
}

/// Division by two with the matchings of parentheses placed before all
/// other path descriptions, on finite pictures.
pub fn divide_by_two_2omega(f: &PamMap, fuel: FuelPolicy) -> Result<(Witness, TwoOmegaReport)> {
    let st = Strings::new(f, fuel)?;
    let (blues, reds) = finite_sides(&st.cx.a, &st.cx.b)?;
    let mut init = BTreeMap::new();
    for &x in &blues {
        if let Some(y) = st.partner(Arrow::Blue(x))? {
            init.insert(x, red(y));
        }
    }
    let paren_pairs = init.len();
    let run = finite_greedy(&st.cx, &init, GreedyConfig::default())?;
    let mut pi = run.pi;
    let path_pairs = pi.len() - paren_pairs;
    let unmatched: BTreeSet<Arrow> =
        run.ub.iter().map(|&x| Arrow::Blue(x)).chain(run.ur.iter().map(|&y| Arrow::Red(y))).collect();

    let mut seen = BTreeSet::new();
    let mut leftovers = Vec::new();
    for p in blues.iter().map(|&x| Arrow::Blue(x)).chain(reds.iter().map(|&y| Arrow::Red(y))) {
        if seen.contains(&p) {
            continue;
        }
        let (states, _) = st.record(st.state(p, 0))?;
        let string: Vec<Arrow> = states.iter().map(|&s| st.decode(s).0).collect();
        let left: Vec<Arrow> = string.iter().copied().filter(|q| unmatched.contains(q)).collect();
        if !left.is_empty() {
            // Leftovers orient the string; marry next door along all of it.
            for q in &string {
                if let Arrow::Blue(x) = q {
                    pi.insert(*x, red(st.married(*q)?));
                }
            }
        }
        leftovers.push(left.len());
        seen.extend(string);
    }
    let map = PamMap::from_table(&st.cx.a, &st.cx.b, pi)?;
    Ok((Witness::bijection(map)?, TwoOmegaReport { leftovers, paren_pairs, path_pairs }))
}
