//! Text format for circuits: one JSON document per circuit,
//!
//! ```text
//! {"version":1,"n":4,"ensemble":"iqp","seed":0,"layers":[
//!  [["H",0],["H",1],["H",2],["H",3]],
//!  [["DPHASE",0.7853981633974483,"1011"]],
//!  ...
//! ]}
//! ```
//!
//! Gates are arrays tagged by name. Mask strings list qubit 0 first.

use super::{format_bits, Circuit, Ensemble, Gate, Layer};
use crate::error::{Error, Result};
use serde::de::{self, DeserializeSeed, Deserializer, IgnoredAny, MapAccess, SeqAccess, Visitor};
use std::fmt::{self, Write as _};

const VERSION: u64 = 1;

fn num(x: f64) -> String {
    serde_json::to_string(&x).expect("finite angle")
}

fn gate_json(g: &Gate, n: usize) -> String {
    match *g {
        Gate::H(q) => format!("[\"H\",{q}]"),
        Gate::SqrtX(q) => format!("[\"SX\",{q}]"),
        Gate::SqrtY(q) => format!("[\"SY\",{q}]"),
        Gate::SqrtW(q) => format!("[\"SW\",{q}]"),
        Gate::PauliX(q) => format!("[\"X\",{q}]"),
        Gate::PauliY(q) => format!("[\"Y\",{q}]"),
        Gate::PauliZ(q) => format!("[\"Z\",{q}]"),
        Gate::FSim { a, b, theta, phi } => {
            format!("[\"FSIM\",{a},{b},{},{}]", num(theta), num(phi))
        }
        Gate::CZ(a, b) => format!("[\"CZ\",{a},{b}]"),
        Gate::CNOT { control, target } => format!("[\"CNOT\",{control},{target}]"),
        Gate::ZZ { a, b, angle } => format!("[\"ZZ\",{a},{b},{}]", num(angle)),
        Gate::DiagonalPhase { theta, mask } => {
            format!("[\"DPHASE\",{},\"{}\"]", num(theta), format_bits(mask, n))
        }
    }
}

/// Canonical text form of a circuit. One layer per line.
pub fn serialize(c: &Circuit) -> String {
    let n = c.n_qubits();
    let mut out = format!(
        "{{\"version\":{VERSION},\"n\":{n},\"ensemble\":\"{}\",\"seed\":{},\"layers\":[",
        c.ensemble().tag(),
        c.seed()
    );
    for (i, layer) in c.layers().iter().enumerate() {
        out.push_str(if i == 0 { "\n [" } else { ",\n [" });
        for (j, g) in layer.gates.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&gate_json(g, n));
        }
        out.push(']');
    }
    if !c.layers().is_empty() {
        out.push('\n');
    }
    let _ = writeln!(out, "]}}");
    out
}

/// Parses the text form. Syntax errors and gates that violate the circuit
/// invariants are reported with their line and column.
pub fn parse(text: &str) -> Result<Circuit> {
    let mut de = serde_json::Deserializer::from_str(text);
    let doc = de.deserialize_map(DocVisitor).map_err(json_err)?;
    de.end().map_err(json_err)?;
    let n = doc.n.ok_or_else(|| missing("n"))?;
    let layers = doc.layers.ok_or_else(|| missing("layers"))?;
    let ensemble = doc.ensemble.ok_or_else(|| missing("ensemble"))?;
    let seed = doc.seed.ok_or_else(|| missing("seed"))?;
    if doc.version.is_none() {
        return Err(missing("version"));
    }
    Circuit::new(n, layers, ensemble, seed).map_err(|e| Error::Parse {
        line: 0,
        column: 0,
        msg: e.to_string(),
    })
}

fn missing(field: &str) -> Error {
    Error::Parse {
        line: 0,
        column: 0,
        msg: format!("missing field `{field}`"),
    }
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    }
}

#[derive(Default)]
struct Doc {
    version: Option<u64>,
    n: Option<usize>,
    ensemble: Option<Ensemble>,
    seed: Option<u64>,
    layers: Option<Vec<Layer>>,
}

struct DocVisitor;

impl<'de> Visitor<'de> for DocVisitor {
    type Value = Doc;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a circuit document")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Doc, A::Error> {
        let mut doc = Doc::default();
        while let Some(key) = map.next_key::<String>()? {
            match key.as_str() {
                "version" => {
                    let v: u64 = map.next_value()?;
                    if v != VERSION {
                        return Err(de::Error::custom(format!("unsupported version {v}")));
                    }
                    doc.version = Some(v);
                }
                "n" => {
                    let n: usize = map.next_value()?;
                    if n == 0 || n > super::MAX_QUBITS {
                        return Err(de::Error::custom(format!("n = {n} out of range")));
                    }
                    doc.n = Some(n);
                }
                "ensemble" => {
                    let tag: String = map.next_value()?;
                    doc.ensemble =
                        Some(Ensemble::from_tag(&tag).ok_or_else(|| {
                            de::Error::custom(format!("unknown ensemble `{tag}`"))
                        })?);
                }
                "seed" => doc.seed = Some(map.next_value()?),
                "layers" => doc.layers = Some(map.next_value_seed(LayersSeed { n: doc.n })?),
                other => {
                    let _: IgnoredAny = map.next_value()?;
                    return Err(de::Error::custom(format!("unknown field `{other}`")));
                }
            }
        }
        Ok(doc)
    }
}

struct LayersSeed {
    n: Option<usize>,
}

impl<'de> DeserializeSeed<'de> for LayersSeed {
    type Value = Vec<Layer>;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Vec<Layer>, D::Error> {
        d.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for LayersSeed {
    type Value = Vec<Layer>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a list of layers")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Vec<Layer>, A::Error> {
        let mut layers = Vec::new();
        while let Some(layer) = seq.next_element_seed(LayerSeed { n: self.n })? {
            layers.push(layer);
        }
        Ok(layers)
    }
}

struct LayerSeed {
    n: Option<usize>,
}

impl<'de> DeserializeSeed<'de> for LayerSeed {
    type Value = Layer;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Layer, D::Error> {
        d.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for LayerSeed {
    type Value = Layer;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a list of gates")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Layer, A::Error> {
        let mut gates = Vec::new();
        let mut used = 0u64;
        while let Some(gate) = seq.next_element_seed(GateSeed { n: self.n })? {
            if self.n.is_some() {
                let support = gate.support_mask();
                if used & support != 0 {
                    return Err(de::Error::custom(format!(
                        "{} overlaps another gate in the same layer",
                        gate.name()
                    )));
                }
                used |= support;
            }
            gates.push(gate);
        }
        Ok(Layer::new(gates))
    }
}

struct GateSeed {
    n: Option<usize>,
}

impl<'de> DeserializeSeed<'de> for GateSeed {
    type Value = Gate;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Gate, D::Error> {
        d.deserialize_seq(self)
    }
}

fn next<'de, A: SeqAccess<'de>, T: serde::Deserialize<'de>>(
    seq: &mut A,
    what: &str,
) -> Result<T, A::Error> {
    seq.next_element()?
        .ok_or_else(|| de::Error::custom(format!("gate is missing its {what}")))
}

impl<'de> Visitor<'de> for GateSeed {
    type Value = Gate;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a gate array such as [\"H\", 0]")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Gate, A::Error> {
        let name: String = next(&mut seq, "name")?;
        let gate = match name.as_str() {
            "H" => Gate::H(next(&mut seq, "qubit")?),
            "SX" => Gate::SqrtX(next(&mut seq, "qubit")?),
            "SY" => Gate::SqrtY(next(&mut seq, "qubit")?),
            "SW" => Gate::SqrtW(next(&mut seq, "qubit")?),
            "X" => Gate::PauliX(next(&mut seq, "qubit")?),
            "Y" => Gate::PauliY(next(&mut seq, "qubit")?),
            "Z" => Gate::PauliZ(next(&mut seq, "qubit")?),
            "FSIM" => Gate::FSim {
                a: next(&mut seq, "first qubit")?,
                b: next(&mut seq, "second qubit")?,
                theta: next(&mut seq, "theta")?,
                phi: next(&mut seq, "phi")?,
            },
            "CZ" => Gate::CZ(
                next(&mut seq, "first qubit")?,
                next(&mut seq, "second qubit")?,
            ),
            "CNOT" => Gate::CNOT {
                control: next(&mut seq, "control")?,
                target: next(&mut seq, "target")?,
            },
            "ZZ" => Gate::ZZ {
                a: next(&mut seq, "first qubit")?,
                b: next(&mut seq, "second qubit")?,
                angle: next(&mut seq, "angle")?,
            },
            "DPHASE" => {
                let theta: f64 = next(&mut seq, "theta")?;
                let bits: String = next(&mut seq, "mask")?;
                if let Some(n) = self.n {
                    if bits.len() != n {
                        return Err(de::Error::custom(format!(
                            "mask `{bits}` has {} bits, expected {n}",
                            bits.len()
                        )));
                    }
                }
                let mask = super::parse_bits(&bits).map_err(de::Error::custom)?;
                Gate::DiagonalPhase { theta, mask }
            }
            other => return Err(de::Error::custom(format!("unknown gate `{other}`"))),
        };
        if seq.next_element::<IgnoredAny>()?.is_some() {
            return Err(de::Error::custom(format!("too many arguments for {name}")));
        }
        if let Some(n) = self.n {
            gate.validate(n).map_err(de::Error::custom)?;
        }
        Ok(gate)
    }
}
