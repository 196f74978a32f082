//! JSON encoding of elements, paths and traces.
//!
//! Points and lines are written as real coordinates over
//! `{1, i, j, ji, k, ki, kj, k(ji)}`; a plane is the matrix of its morphism
//! over the pure F-bases, complex entries interleaved as `re, im`. Every number
//! is written with 17 significant digits.

use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Map, Number, Value};

use crate::algebra::{AlgElement, Scalar, Variant};
use crate::error::{Error, Result};
use crate::geometry::{Element, Geometry, Line, Plane, Point};
use crate::homotopy::{self, ElementaryMove, GPath, HomotopyTrace, MoveKind, PrimitivePath};
use crate::morphism::SharpMorphism;

/// A JSON number with 17 significant digits; non-finite values become null.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let x = if x == 0.0 { 0.0 } else { x };
    Value::Number(Number::from_str(&format!("{x:.16e}")).expect("formatted float"))
}

fn parse_err(s: impl Into<String>) -> Error {
    Error::Parse(s.into())
}

fn get_f64(v: &Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| parse_err(format!("expected a number, got {v}")))
}

fn floats(v: &Value, len: usize) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| parse_err("expected an array"))?;
    if arr.len() != len {
        return Err(parse_err(format!("expected {len} numbers, got {}", arr.len())));
    }
    arr.iter().map(get_f64).collect()
}

fn coords_json(x: &AlgElement) -> Value {
    Value::Array(x.coords().iter().map(|&c| num(c)).collect())
}

fn coords_from(v: &Value) -> Result<AlgElement> {
    let f = floats(v, 8)?;
    let mut c = [0.0; 8];
    c.copy_from_slice(&f);
    Ok(AlgElement::from_coords(c))
}

pub fn element_to_json(e: &Element) -> Value {
    let variant = e.variant();
    let mut m = Map::new();
    m.insert("kind".into(), json!(e.kind().name()));
    m.insert("variant".into(), json!(variant.name()));
    let data = match e {
        Element::Point(p) => coords_json(p.rep()),
        Element::Line(l) => json!([coords_json(l.a()), coords_json(l.u())]),
        Element::Plane(x) => {
            m.insert(
                "field".into(),
                json!(match variant {
                    Variant::RH => "R",
                    Variant::CO => "C",
                }),
            );
            let matrix = x.morphism().matrix();
            let rows = matrix.iter().map(|row| {
                let entries: Vec<Value> = match variant {
                    Variant::RH => row.iter().map(|z| num(z.re)).collect(),
                    Variant::CO => row.iter().flat_map(|z| [num(z.re), num(z.im)]).collect(),
                };
                Value::Array(entries)
            });
            Value::Array(rows.collect())
        }
    };
    m.insert("data".into(), data);
    Value::Object(m)
}

pub fn element_from_json(v: &Value) -> Result<Element> {
    let s = |key: &str| {
        v.get(key)
            .and_then(Value::as_str)
            .ok_or_else(|| parse_err(format!("missing string field `{key}`")))
    };
    let variant = Variant::parse(s("variant")?).ok_or_else(|| parse_err("unknown variant"))?;
    let data = v.get("data").ok_or_else(|| parse_err("missing field `data`"))?;
    let bad = |e: Error| parse_err(format!("invalid element data: {e}"));
    match s("kind")? {
        "point" => Ok(Point::new(variant, &coords_from(data)?).map_err(bad)?.into()),
        "line" => {
            let pair = data.as_array().filter(|a| a.len() == 2).ok_or_else(|| parse_err("line data is [a, u]"))?;
            Ok(Line::new(variant, &coords_from(&pair[0])?, &coords_from(&pair[1])?)
                .map_err(bad)?
                .into())
        }
        "plane" => {
            let field = s("field")?;
            let expected = match variant {
                Variant::RH => "R",
                Variant::CO => "C",
            };
            if field != expected {
                return Err(parse_err(format!("field {field} does not match variant {}", variant.name())));
            }
            let rows = data.as_array().ok_or_else(|| parse_err("plane data is a list of rows"))?;
            let width = variant.pure_dim(crate::AlgebraTag::O);
            let matrix = rows
                .iter()
                .map(|row| {
                    Ok(match variant {
                        Variant::RH => floats(row, width)?.into_iter().map(|x| Scalar::new(x, 0.0)).collect(),
                        Variant::CO => floats(row, 2 * width)?.chunks(2).map(|p| Scalar::new(p[0], p[1])).collect(),
                    })
                })
                .collect::<Result<Vec<Vec<Scalar>>>>()?;
            let phi = SharpMorphism::from_matrix(variant, variant.algebra(), &matrix)?;
            Ok(Plane::new(phi).into())
        }
        other => Err(parse_err(format!("unknown kind `{other}`"))),
    }
}

pub fn path_to_json(path: &[Element]) -> Value {
    Value::Array(path.iter().map(element_to_json).collect())
}

pub fn path_from_json(v: &Value) -> Result<GPath> {
    v.as_array()
        .ok_or_else(|| parse_err("a path is a list of elements"))?
        .iter()
        .map(element_from_json)
        .collect()
}

/// `{"path": [...]}`.
pub fn path_document(path: &[Element]) -> Value {
    json!({ "path": path_to_json(path) })
}

pub fn path_from_document(v: &Value) -> Result<GPath> {
    path_from_json(v.get("path").ok_or_else(|| parse_err("missing field `path`"))?)
}

pub fn trace_to_json(t: &HomotopyTrace) -> Value {
    let moves: Vec<Value> = t
        .moves
        .iter()
        .map(|m| json!({ "kind": m.kind.name(), "pos": m.pos, "witness": element_to_json(&m.witness) }))
        .collect();
    json!({ "start": path_to_json(&t.start), "moves": moves })
}

pub fn trace_from_json(v: &Value) -> Result<HomotopyTrace> {
    let start = path_from_json(v.get("start").ok_or_else(|| parse_err("missing field `start`"))?)?;
    let moves = v
        .get("moves")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("missing list `moves`"))?
        .iter()
        .map(|m| {
            let kind = m
                .get("kind")
                .and_then(Value::as_str)
                .and_then(MoveKind::parse)
                .ok_or_else(|| parse_err("bad move kind"))?;
            let pos = m.get("pos").and_then(Value::as_u64).ok_or_else(|| parse_err("bad move position"))?;
            let witness = element_from_json(m.get("witness").ok_or_else(|| parse_err("missing witness"))?)?;
            Ok(ElementaryMove::new(kind, pos as usize, witness))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HomotopyTrace { start, moves })
}

/// `{"trace": {"start": ..., "moves": [...]}}`.
pub fn trace_document(t: &HomotopyTrace) -> Value {
    json!({ "trace": trace_to_json(t) })
}

pub fn trace_from_document(v: &Value) -> Result<HomotopyTrace> {
    trace_from_json(v.get("trace").ok_or_else(|| parse_err("missing field `trace`"))?)
}

/// Pretty JSON with a trailing newline.
pub fn to_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| parse_err(format!("{}: {e}", path.display())))
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, to_string(v)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Output of [`reduce_file`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedFile {
    pub primitive: PrimitivePath,
    pub trace: HomotopyTrace,
}

/// Reads `{"path": [...]}`, reduces it to a primitive path and writes
/// `{"primitive": [...], "trace": {...}}`.
pub fn reduce_file(input: &Path, output: &Path) -> Result<ReducedFile> {
    let path = path_from_document(&read_json(input)?)?;
    let variant = path
        .first()
        .map(Element::variant)
        .ok_or_else(|| Error::InvalidPath("empty path".into()))?;
    if path.iter().any(|e| e.variant() != variant) {
        return Err(Error::InvalidPath("elements of different variants".into()));
    }
    let geo = Geometry::new(variant);
    let red = homotopy::reduce_to_primitive(&geo, &path)?;
    let doc = json!({
        "primitive": path_to_json(&red.primitive.to_path()),
        "trace": trace_to_json(&red.trace),
    });
    write_json(output, &doc)?;
    Ok(ReducedFile {
        primitive: red.primitive,
        trace: red.trace,
    })
}

/// Reads the output of [`reduce_file`].
pub fn read_reduced(path: &Path) -> Result<(GPath, HomotopyTrace)> {
    let v = read_json(path)?;
    let primitive = path_from_json(v.get("primitive").ok_or_else(|| parse_err("missing field `primitive`"))?)?;
    let trace = trace_from_json(v.get("trace").ok_or_else(|| parse_err("missing field `trace`"))?)?;
    Ok((primitive, trace))
}
