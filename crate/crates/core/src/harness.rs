//! Seeded instances, witness checks and the relabelling test.
//!
//! A construction that makes no arbitrary choices commutes with renaming
//! the elements of `A` and `B`: feeding it the conjugated input
//! `(id x tau) . f . (id x sigma^-1)` must give `tau . g . sigma^-1`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ap::Ap;
use crate::csb::csb_bijection;
use crate::division::{divide_by_n, divide_by_two, divide_by_two_2omega, divide_inequality_by_n};
use crate::error::{Error, Result};
use crate::io::{map_to_json, space_to_json, InstanceJson};
use crate::map::{ApPiece, PamMap};
use crate::orbit::FuelPolicy;
use crate::space::{product_fin_space, Element, Space};
use crate::witness::{Witness, WitnessKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    Bijection,
    Injection,
    CsbPair,
    Swallow,
    Tarski,
}

/// What to generate. A missing size means a countable, shift-only instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default)]
    pub size_a: Option<u64>,
    #[serde(default)]
    pub size_b: Option<u64>,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

impl InstanceSpec {
    pub fn finite(kind: InstanceKind, n: usize, size_a: u64, size_b: u64, seed: u64) -> InstanceSpec {
        InstanceSpec { kind, n, size_a: Some(size_a), size_b: Some(size_b), seed }
    }

    pub fn countable(kind: InstanceKind, n: usize, seed: u64) -> InstanceSpec {
        InstanceSpec { kind, n, size_a: None, size_b: None, seed }
    }
}

/// Spaces `A`, `B` and named maps: `f` for bijections and injections
/// `n x A -> n x B`, `f` and `g` for a CSB pair, `u : B + C -> B` for a
/// swallow (with `A = C`), `s` and `t` for Tarski's cancellation.
#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub a: Space,
    pub b: Space,
    pub maps: BTreeMap<String, PamMap>,
}

impl Instance {
    pub fn map(&self, name: &str) -> Result<&PamMap> {
        self.maps.get(name).ok_or_else(|| Error::Precondition(format!("instance has no map {name:?}")))
    }

    pub fn to_json(&self) -> InstanceJson {
        InstanceJson {
            spec: serde_json::to_value(&self.spec).expect("plain data"),
            a: space_to_json(&self.a),
            b: space_to_json(&self.b),
            maps: self.maps.iter().map(|(k, m)| (k.clone(), map_to_json(m))).collect(),
        }
    }
}

fn space_of(size: Option<u64>) -> Space {
    size.map_or_else(Space::omega, Space::fin)
}

/// A random injection between finite spaces.
fn random_injection(rng: &mut ChaCha8Rng, from: &Space, to: &Space) -> Result<PamMap> {
    let xs = from.elements().expect("finite");
    let mut ys = to.elements().expect("finite");
    if xs.len() > ys.len() {
        return Err(Error::Precondition(format!("no injection from {from} into {to}")));
    }
    ys.shuffle(rng);
    PamMap::from_table(from, to, xs.into_iter().zip(ys))
}

/// `(l, x) -> (sigma(l), x + shift)`, with the points below `mix` of each
/// copy shuffled among themselves first.
fn shift_only(rng: &mut ChaCha8Rng, n: usize, shift: u64, mix: u64) -> Result<PamMap> {
    let s = Space::omega().repeat(n);
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.shuffle(rng);
    let mut low: Vec<Element> = (0..n).flat_map(|l| (0..mix).map(move |x| Element::new(l, x))).collect();
    let before = low.clone();
    low.shuffle(rng);
    let exceptions: Vec<(Element, Element)> = before
        .into_iter()
        .zip(low)
        .map(|(x, y)| (x, Element::new(sigma[y.slot], y.index + shift)))
        .collect();
    let pieces: Vec<ApPiece> = (0..n).map(|l| ApPiece::new(l, Ap::tail(mix), sigma[l], Ap::tail(mix + shift))).collect();
    PamMap::new(&s, &s, exceptions, pieces)
}

fn successor_by(k: u64) -> PamMap {
    let w = Space::omega();
    PamMap::new(&w, &w, [], [ApPiece::new(0, Ap::tail(0), 0, Ap::tail(k))]).expect("shift")
}

pub fn generate_instance(spec: &InstanceSpec) -> Result<Instance> {
    if spec.n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    if spec.size_a.is_some() != spec.size_b.is_some() {
        return Err(Error::Precondition("give both sizes or neither".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (a, b) = (space_of(spec.size_a), space_of(spec.size_b));
    let n = spec.n;
    let mut maps = BTreeMap::new();
    let finite = spec.size_a.is_some();
    match spec.kind {
        InstanceKind::Bijection | InstanceKind::Injection => {
            let f = if finite {
                if spec.kind == InstanceKind::Bijection && spec.size_a != spec.size_b {
                    return Err(Error::Precondition(format!("no bijection between sizes {a} and {b}")));
                }
                random_injection(&mut rng, &a.repeat(n), &b.repeat(n))?
            } else {
                let shift = if spec.kind == InstanceKind::Injection { rng.gen_range(1..=2) } else { 0 };
                shift_only(&mut rng, n, shift, 2)?
            };
            maps.insert("f".into(), f);
        }
        InstanceKind::CsbPair => {
            let (f, g) = if finite {
                (random_injection(&mut rng, &a, &b)?, random_injection(&mut rng, &b, &a)?)
            } else {
                (successor_by(rng.gen_range(0..=2)), successor_by(rng.gen_range(0..=2)))
            };
            maps.insert("f".into(), f);
            maps.insert("g".into(), g);
        }
        InstanceKind::Swallow => {
            // Host B = omega swallows the guest A: B + A -> B, x -> x + |A|, i -> i.
            let guest = spec.size_a.map_or_else(|| Space::fin(rng.gen_range(1..=3)), Space::fin);
            let k = guest.cardinality().expect("finite guest");
            let host = Space::omega();
            let u = PamMap::new(
                &host.concat(&guest),
                &host,
                (0..k).map(|i| (Element::new(1, i), Element::new(0, i))).collect::<Vec<_>>(),
                [ApPiece::new(0, Ap::tail(0), 0, Ap::tail(k))],
            )?;
            maps.insert("u".into(), u);
            return Ok(Instance { spec: spec.clone(), a: guest, b: host, maps });
        }
        InstanceKind::Tarski => {
            if finite {
                return Err(Error::Precondition("tarski instances are countable".into()));
            }
            maps.insert("s".into(), successor_by(rng.gen_range(1..=2)));
            let shift = rng.gen_range(0..=1);
            maps.insert("t".into(), shift_only(&mut rng, n, shift, 1)?);
        }
    }
    for (name, m) in &maps {
        m.require_injection(name)?;
    }
    Ok(Instance { spec: spec.clone(), a, b, maps })
}

/// The constructions the harness knows how to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    DivideByTwo,
    DivideByTwo2Omega,
    DivideByN,
    DivideInequality,
    Csb,
    /// Matches the elements of `A` and `B` in order of their ids. A valid
    /// bijection on equal finite sizes, but not a canonical one.
    OrderMutant,
}

impl FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Construction> {
        Ok(match s {
            "divide2" => Construction::DivideByTwo,
            "divide2-2omega" => Construction::DivideByTwo2Omega,
            "divide" => Construction::DivideByN,
            "divide-ineq" => Construction::DivideInequality,
            "csb" => Construction::Csb,
            "mutant" => Construction::OrderMutant,
            _ => return Err(Error::Parse(format!("unknown construction {s:?}"))),
        })
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Construction::DivideByTwo => "divide2",
            Construction::DivideByTwo2Omega => "divide2-2omega",
            Construction::DivideByN => "divide",
            Construction::DivideInequality => "divide-ineq",
            Construction::Csb => "csb",
            Construction::OrderMutant => "mutant",
        })
    }
}

pub fn run_construction(c: Construction, inst: &Instance, fuel: FuelPolicy) -> Result<Witness> {
    let n = inst.spec.n;
    match c {
        Construction::DivideByTwo => divide_by_two(inst.map("f")?, fuel),
        Construction::DivideByTwo2Omega => Ok(divide_by_two_2omega(inst.map("f")?, fuel)?.0),
        Construction::DivideByN => divide_by_n(n, inst.map("f")?, fuel),
        Construction::DivideInequality => divide_inequality_by_n(n, inst.map("f")?, fuel),
        Construction::Csb => csb_bijection(inst.map("f")?, inst.map("g")?, fuel),
        Construction::OrderMutant => {
            let (xs, ys) = match (inst.a.elements(), inst.b.elements()) {
                (Some(x), Some(y)) => (x, y),
                _ => return Err(Error::Unsupported("the mutant needs finite spaces".into())),
            };
            let m = PamMap::from_table(&inst.a, &inst.b, xs.into_iter().zip(ys))?;
            Witness::explicit(WitnessKind::Injection, m)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    Exhaustive,
    Prefix(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub mode: VerifyMode,
    pub kind: String,
    pub checked: u64,
    pub ok: bool,
    pub counterexample: Option<String>,
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            VerifyMode::Exhaustive => "exhaustive".to_string(),
            VerifyMode::Prefix(k) => format!("prefix {k}"),
        };
        match &self.counterexample {
            None => write!(f, "verify {} ({mode}): ok, {} points", self.kind, self.checked),
            Some(c) => write!(f, "verify {} ({mode}): FAILED: {c}", self.kind),
        }
    }
}

fn exhaustive(w: &Witness) -> Result<(u64, Option<String>)> {
    let (xs, ys) = match (w.source().elements(), w.target().elements()) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(Error::Precondition("exhaustive checking needs finite spaces".into())),
    };
    let mut seen: BTreeMap<Element, Element> = BTreeMap::new();
    for &x in &xs {
        let Some(y) = w.eval(x)? else { return Ok((seen.len() as u64, Some(format!("{x} has no image")))) };
        if !w.target().contains(y) {
            return Ok((seen.len() as u64, Some(format!("{x} maps outside the target to {y}"))));
        }
        if let Some(first) = seen.insert(y, x) {
            return Ok((seen.len() as u64, Some(format!("{first} and {x} both map to {y}"))));
        }
    }
    for (&y, &x) in &seen {
        if w.inverse_eval(y)? != Some(x) {
            return Ok((xs.len() as u64, Some(format!("inverse of {y} is not {x}"))));
        }
    }
    if w.kind() == WitnessKind::Bijection {
        if let Some(y) = ys.iter().find(|y| !seen.contains_key(y)) {
            return Ok((xs.len() as u64, Some(format!("{y} has no preimage"))));
        }
    }
    Ok((xs.len() as u64, None))
}

pub fn verify_witness(w: &Witness, mode: VerifyMode) -> Result<VerifyReport> {
    let (checked, counterexample) = match mode {
        VerifyMode::Exhaustive => exhaustive(w)?,
        VerifyMode::Prefix(k) => {
            let checked = w.source().prefix(k).len() as u64;
            match w.verify_prefix(k) {
                Ok(()) => (checked, None),
                Err(e @ (Error::Undecided { .. } | Error::Unsupported(_))) => return Err(e),
                Err(e) => (checked, Some(e.to_string())),
            }
        }
    };
    let kind = match w.kind() {
        WitnessKind::Bijection => "bijection",
        WitnessKind::Injection => "injection",
    };
    Ok(VerifyReport { mode, kind: kind.into(), checked, ok: counterexample.is_none(), counterexample })
}

/// Outcome of running a construction on relabelled copies of an instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub construction: Construction,
    pub trials: usize,
    pub passed: usize,
    pub violation: Option<String>,
}

impl EquivarianceReport {
    pub fn ok(&self) -> bool {
        self.violation.is_none()
    }
}

impl fmt::Display for EquivarianceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "equivariance {}: {}/{} trials", self.construction, self.passed, self.trials)?;
        if let Some(v) = &self.violation {
            write!(f, ", first violation: {v}")?;
        }
        Ok(())
    }
}

type Relabel = BTreeMap<Element, Element>;

fn random_relabel(rng: &mut ChaCha8Rng, s: &Space) -> Relabel {
    let xs = s.elements().expect("finite");
    let mut ys = xs.clone();
    ys.shuffle(rng);
    xs.into_iter().zip(ys).collect()
}

/// `rho . m . sigma^-1` where `sigma` and `rho` act on the factors of
/// `k x A` and `k x B` copywise.
fn conjugate_map(m: &PamMap, k: usize, sigma: &Relabel, rho: &Relabel) -> Result<PamMap> {
    let pa = product_fin_space(k, &Space::new(m.source().slots()[..m.source().num_slots() / k].to_vec()));
    let pb = product_fin_space(k, &Space::new(m.target().slots()[..m.target().num_slots() / k].to_vec()));
    let mut pairs = Vec::new();
    for x in m.source().elements().expect("finite") {
        if let Some(y) = m.eval(x) {
            let (l, xa) = pa.from_product(x);
            let (j, yb) = pb.from_product(y);
            pairs.push((pa.to_product(l, sigma[&xa]), pb.to_product(j, rho[&yb])));
        }
    }
    PamMap::from_table(m.source(), m.target(), pairs)
}

fn conjugate(inst: &Instance, sigma: &Relabel, tau: &Relabel) -> Result<Instance> {
    let mut maps = BTreeMap::new();
    for (name, m) in &inst.maps {
        let c = match name.as_str() {
            "f" if inst.spec.kind == InstanceKind::CsbPair => conjugate_map(m, 1, sigma, tau)?,
            "g" => conjugate_map(m, 1, tau, sigma)?,
            _ => conjugate_map(m, inst.spec.n, sigma, tau)?,
        };
        maps.insert(name.clone(), c);
    }
    Ok(Instance { spec: inst.spec.clone(), a: inst.a.clone(), b: inst.b.clone(), maps })
}

/// Runs `c` on `trials` random relabellings of a finite instance and
/// compares with the relabelled output on the original.
pub fn equivariance_check(c: Construction, inst: &Instance, trials: usize, seed: u64, fuel: FuelPolicy) -> Result<EquivarianceReport> {
    if inst.a.cardinality().is_none() || inst.b.cardinality().is_none() {
        return Err(Error::Unsupported("relabelling needs finite spaces".into()));
    }
    let base = run_construction(c, inst, fuel)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut passed = 0;
    for trial in 0..trials {
        let sigma = random_relabel(&mut rng, &inst.a);
        let tau = random_relabel(&mut rng, &inst.b);
        let out = run_construction(c, &conjugate(inst, &sigma, &tau)?, fuel)?;
        let mut violation = None;
        for x in inst.a.elements().expect("finite") {
            let expected = base.eval(x)?.map(|y| tau[&y]);
            let got = out.eval(sigma[&x])?;
            if got != expected {
                let show = |v: Option<Element>| v.map_or("nothing".to_string(), |e| e.to_string());
                violation = Some(format!(
                    "trial {trial}: relabelled input sends {} to {}, relabelled output expects {}",
                    sigma[&x],
                    show(got),
                    show(expected)
                ));
                break;
            }
        }
        if let Some(v) = violation {
            return Ok(EquivarianceReport { construction: c, trials: trial + 1, passed, violation: Some(v) });
        }
        passed += 1;
    }
    Ok(EquivarianceReport { construction: c, trials, passed, violation: None })
}
