//! JSON files for spaces, maps, witnesses and generated instances.
//!
//! Output is pretty-printed with a trailing newline, and every map is
//! written in its normal form, so serializing a parsed file twice gives the
//! same bytes.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ap::Ap;
use crate::error::{Error, Result};
use crate::map::{ApPiece, PamMap};
use crate::space::{Element, Slot, Space};
use crate::witness::{Witness, WitnessKind};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SlotJson {
    Fin { size: u64 },
    Omega,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SpaceJson {
    pub slots: Vec<SlotJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct PairJson {
    pub from: [u64; 2],
    pub to: [u64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct PieceJson {
    pub src_slot: usize,
    pub src_r: u64,
    pub src_m: u64,
    pub src_c: u64,
    pub dst_slot: usize,
    pub dst_r: u64,
    pub dst_m: u64,
    pub dst_c: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct MapJson {
    pub source: SpaceJson,
    pub target: SpaceJson,
    #[serde(default)]
    pub exceptions: Vec<PairJson>,
    #[serde(default)]
    pub pieces: Vec<PieceJson>,
}

/// A witness: the map itself when explicit, otherwise a sample of its
/// values together with the fuel it was computed under.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct WitnessJson {
    pub kind: String,
    pub representation: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub map: Option<MapJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub source: Option<SpaceJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target: Option<SpaceJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub provenance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fuel: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub prefix: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub table: Option<Vec<PairJson>>,
}

pub fn space_to_json(s: &Space) -> SpaceJson {
    SpaceJson {
        slots: s
            .slots()
            .iter()
            .map(|slot| match *slot {
                Slot::Fin(size) => SlotJson::Fin { size },
                Slot::Omega => SlotJson::Omega,
            })
            .collect(),
    }
}

pub fn space_from_json(j: &SpaceJson) -> Space {
    Space::new(
        j.slots
            .iter()
            .map(|s| match *s {
                SlotJson::Fin { size } => Slot::Fin(size),
                SlotJson::Omega => Slot::Omega,
            })
            .collect::<Vec<_>>(),
    )
}

fn pair(x: Element, y: Element) -> PairJson {
    PairJson { from: [x.slot as u64, x.index], to: [y.slot as u64, y.index] }
}

fn element(a: [u64; 2]) -> Element {
    Element::new(a[0] as usize, a[1])
}

pub fn map_to_json(m: &PamMap) -> MapJson {
    MapJson {
        source: space_to_json(m.source()),
        target: space_to_json(m.target()),
        exceptions: m.exceptions().iter().map(|(x, y)| pair(*x, *y)).collect(),
        pieces: m
            .pieces()
            .iter()
            .map(|p| PieceJson {
                src_slot: p.src_slot,
                src_r: p.src.residue(),
                src_m: p.src.modulus(),
                src_c: p.src.start(),
                dst_slot: p.dst_slot,
                dst_r: p.dst.residue(),
                dst_m: p.dst.modulus(),
                dst_c: p.dst.start(),
            })
            .collect(),
    }
}

fn ap(r: u64, m: u64, c: u64, what: &str) -> Result<Ap> {
    Ap::new(r, m, c).ok_or_else(|| Error::Parse(format!("{what}: no progression with residue {r} modulo {m}")))
}

pub fn map_from_json(j: &MapJson) -> Result<PamMap> {
    let (source, target) = (space_from_json(&j.source), space_from_json(&j.target));
    let exceptions: Vec<_> = j.exceptions.iter().map(|p| (element(p.from), element(p.to))).collect();
    let pieces = j
        .pieces
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let what = format!("piece {i}");
            Ok(ApPiece::new(p.src_slot, ap(p.src_r, p.src_m, p.src_c, &what)?, p.dst_slot, ap(p.dst_r, p.dst_m, p.dst_c, &what)?))
        })
        .collect::<Result<Vec<_>>>()?;
    PamMap::new(&source, &target, exceptions, pieces).map_err(|e| Error::Parse(e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

fn parse_value(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
}

/// Reads a `T`, either as the whole document or under the key `key`.
fn parse_wrapped<T: DeserializeOwned>(text: &str, key: &str) -> Result<T> {
    let v = parse_value(text)?;
    let inner = match v.get(key) {
        Some(inner) if v.as_object().is_some_and(|o| o.len() == 1) => inner.clone(),
        _ => v,
    };
    serde_json::from_value(inner).map_err(|e| Error::Parse(format!("{key}: {e}")))
}

pub fn parse_space(text: &str) -> Result<Space> {
    Ok(space_from_json(&parse_wrapped(text, "space")?))
}

pub fn parse_map(text: &str) -> Result<PamMap> {
    map_from_json(&parse_wrapped(text, "map")?)
}

pub fn map_to_string(m: &PamMap) -> String {
    to_pretty(&map_to_json(m))
}

fn kind_name(k: WitnessKind) -> &'static str {
    match k {
        WitnessKind::Bijection => "bijection",
        WitnessKind::Injection => "injection",
    }
}

/// A witness as JSON. Procedural witnesses are sampled on the first
/// `prefix` elements of every slot.
pub fn witness_to_json(w: &Witness, prefix: u64, fuel: u64) -> Result<WitnessJson> {
    let kind = kind_name(w.kind()).to_string();
    if let Some(m) = w.as_map() {
        return Ok(WitnessJson {
            kind,
            representation: "explicit".into(),
            map: Some(map_to_json(m)),
            source: None,
            target: None,
            provenance: None,
            fuel: None,
            prefix: None,
            table: None,
        });
    }
    let table = w.source().prefix(prefix).into_iter().map(|x| Ok(pair(x, w.apply(x)?))).collect::<Result<Vec<_>>>()?;
    Ok(WitnessJson {
        kind,
        representation: "sampled".into(),
        map: None,
        source: Some(space_to_json(w.source())),
        target: Some(space_to_json(w.target())),
        provenance: Some(w.provenance().to_string()),
        fuel: Some(fuel),
        prefix: Some(prefix),
        table: Some(table),
    })
}

pub fn witness_to_string(w: &Witness, prefix: u64, fuel: u64) -> Result<String> {
    Ok(to_pretty(&witness_to_json(w, prefix, fuel)?))
}

/// Reads an explicit witness back, checking it.
pub fn parse_witness(text: &str) -> Result<Witness> {
    let j: WitnessJson = parse_wrapped(text, "witness")?;
    let kind = match j.kind.as_str() {
        "bijection" => WitnessKind::Bijection,
        "injection" => WitnessKind::Injection,
        other => return Err(Error::Parse(format!("unknown witness kind {other:?}"))),
    };
    match (j.representation.as_str(), &j.map) {
        ("explicit", Some(m)) => Witness::explicit(kind, map_from_json(m)?),
        ("sampled", _) => Err(Error::Unsupported("a sampled witness only records part of a map".into())),
        _ => Err(Error::Parse("witness needs a representation and, when explicit, a map".into())),
    }
}

/// Named maps with the spaces they live on, as produced by the harness.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct InstanceJson {
    pub spec: Value,
    pub a: SpaceJson,
    pub b: SpaceJson,
    pub maps: BTreeMap<String, MapJson>,
}
