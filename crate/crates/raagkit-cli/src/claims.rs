//! Claim-file parsing for `raagkit validate`.
//!
//! A claim file holds one JSON object whose `kind` selects the check:
//!
//! ```json
//! {"kind": "distance", "from": "a b", "to": "b a", "claimed": 2}
//! {"kind": "wall-equality", "first": {"base": "1", "type": "a"},
//!  "second": {"base": "b", "type": "a"}, "claimed": true}
//! {"kind": "wall-crossing", "first": ..., "second": ..., "claimed": false}
//! {"kind": "double-coset", "element": "a b a", "left": ["a"],
//!  "right": ["a", "b"], "claimed": true}
//! {"kind": "essential-singleton", "u": "a", "v": "b", "v_conjugator": "1",
//!  "wall": {"base": "1", "type": "a"}, "bound": 4, "claimed": true}
//! ```
//!
//! Wall objects use the same `{"base", "type"}` shape the rest of the
//! toolkit emits; generator lists are vertex names.

use std::sync::Arc;

use serde_json::Value;

use raagkit::oracle::{Claim, WallRef};
use raagkit::{DefiningGraph, Error, GroupElement};

fn parse_err(detail: String) -> Error {
    Error::Parse { detail }
}

fn str_field<'a>(value: &'a Value, key: &str) -> Result<&'a str, Error> {
    value
        .get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| parse_err(format!("claim field `{key}` must be a string")))
}

fn usize_field(value: &Value, key: &str) -> Result<usize, Error> {
    value
        .get(key)
        .and_then(Value::as_u64)
        .map(|n| n as usize)
        .ok_or_else(|| parse_err(format!("claim field `{key}` must be a nonnegative integer")))
}

fn bool_field(value: &Value, key: &str) -> Result<bool, Error> {
    value
        .get(key)
        .and_then(Value::as_bool)
        .ok_or_else(|| parse_err(format!("claim field `{key}` must be a boolean")))
}

fn element_field(
    graph: &Arc<DefiningGraph>,
    value: &Value,
    key: &str,
) -> Result<GroupElement, Error> {
    GroupElement::parse(graph, str_field(value, key)?)
}

fn wall_field(graph: &Arc<DefiningGraph>, value: &Value, key: &str) -> Result<WallRef, Error> {
    let wall = value
        .get(key)
        .ok_or_else(|| parse_err(format!("claim field `{key}` must be a wall object")))?;
    let base = element_field(graph, wall, "base")?;
    let type_name = str_field(wall, "type")?;
    let vertex = graph
        .vertex_index(type_name)
        .ok_or_else(|| parse_err(format!("wall type `{type_name}` is not a vertex")))?;
    WallRef::new(base, vertex)
}

fn vertex_list(graph: &Arc<DefiningGraph>, value: &Value, key: &str) -> Result<Vec<usize>, Error> {
    let list = value
        .get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err(format!("claim field `{key}` must be a list of names")))?;
    list.iter()
        .map(|item| {
            let name = item
                .as_str()
                .ok_or_else(|| parse_err(format!("claim field `{key}` holds a non-string")))?;
            graph
                .vertex_index(name)
                .ok_or_else(|| parse_err(format!("generator `{name}` is not a vertex")))
        })
        .collect()
}

pub fn parse(graph: &Arc<DefiningGraph>, value: &Value) -> Result<Claim, Error> {
    let kind = str_field(value, "kind")?;
    match kind {
        "distance" => Ok(Claim::Distance {
            from: element_field(graph, value, "from")?,
            to: element_field(graph, value, "to")?,
            claimed: usize_field(value, "claimed")?,
        }),
        "wall-equality" => Ok(Claim::WallEquality {
            first: wall_field(graph, value, "first")?,
            second: wall_field(graph, value, "second")?,
            claimed: bool_field(value, "claimed")?,
        }),
        "wall-crossing" => Ok(Claim::WallCrossing {
            first: wall_field(graph, value, "first")?,
            second: wall_field(graph, value, "second")?,
            claimed: bool_field(value, "claimed")?,
        }),
        "double-coset" => Ok(Claim::DoubleCoset {
            element: element_field(graph, value, "element")?,
            left: vertex_list(graph, value, "left")?,
            right: vertex_list(graph, value, "right")?,
            claimed: bool_field(value, "claimed")?,
        }),
        "essential-singleton" => Ok(Claim::EssentialSingleton {
            u: element_field(graph, value, "u")?,
            v: element_field(graph, value, "v")?,
            v_conjugator: element_field(graph, value, "v_conjugator")?,
            wall: wall_field(graph, value, "wall")?,
            bound: usize_field(value, "bound")?,
            claimed: bool_field(value, "claimed")?,
        }),
        other => Err(parse_err(format!(
            "unknown claim kind `{other}`; expected distance, wall-equality, \
             wall-crossing, double-coset, or essential-singleton"
        ))),
    }
}
