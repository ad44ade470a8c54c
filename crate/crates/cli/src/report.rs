//! Structured command reports: one self-describing tree with stable field
//! names (`command`, `input`, `result`, `stats`, `wall_clock_ms`), rendered
//! either as indented text or as JSON. Identical inputs produce identical
//! reports except for the wall-clock field.

use clap::ValueEnum;
use serde_json::{json, Map, Value};
use smpswap_core::{EdgeSet, Subgraph, Swap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    #[value(name = "json-like")]
    JsonLike,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub input: Value,
    pub result: Value,
    pub stats: Value,
    pub wall_clock_ms: f64,
}

impl Report {
    pub fn new(command: &str, input: Value, result: Value, stats: Value) -> Report {
        Report {
            command: command.to_string(),
            input,
            result,
            stats,
            wall_clock_ms: 0.0,
        }
    }

    pub fn to_value(&self) -> Value {
        json!({
            "command": self.command,
            "input": self.input,
            "result": self.result,
            "stats": self.stats,
            "wall_clock_ms": self.wall_clock_ms,
        })
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::JsonLike => {
                let mut s = serde_json::to_string_pretty(&self.to_value())
                    .expect("report serializes");
                s.push('\n');
                s
            }
            ReportFormat::Text => {
                let mut out = String::new();
                render_map_entries(self.to_value().as_object().unwrap(), 0, &mut out);
                out
            }
        }
    }
}

fn is_scalar(v: &Value) -> bool {
    !(v.is_object() || v.is_array())
}

fn scalar_to_string(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_inline(v: &Value) -> String {
    serde_json::to_string(v).expect("report serializes")
}

fn render_map_entries(map: &Map<String, Value>, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    for (key, value) in map {
        match value {
            v if is_scalar(v) => out.push_str(&format!("{pad}{key}: {}\n", scalar_to_string(v))),
            Value::Array(items) => {
                if items.is_empty() {
                    out.push_str(&format!("{pad}{key}: []\n"));
                } else if items.iter().all(|v| is_scalar(v) || v.is_array()) {
                    out.push_str(&format!("{pad}{key}: {}\n", render_inline(value)));
                } else {
                    out.push_str(&format!("{pad}{key}:\n"));
                    for item in items {
                        out.push_str(&format!("{pad}  - {}\n", render_inline(item)));
                    }
                }
            }
            Value::Object(inner) => {
                if inner.is_empty() {
                    out.push_str(&format!("{pad}{key}: {{}}\n"));
                } else {
                    out.push_str(&format!("{pad}{key}:\n"));
                    render_map_entries(inner, indent + 1, out);
                }
            }
            _ => unreachable!(),
        }
    }
}

/// 1-based JSON rendering of an edge set: `[[i, j], ...]`.
pub fn edges_value(edges: &EdgeSet) -> Value {
    Value::Array(
        edges.iter().map(|&(i, j)| json!([i + 1, j + 1])).collect(),
    )
}

pub fn subgraph_value(s: &Subgraph) -> Value {
    edges_value(s.edges())
}

/// 1-based JSON rendering of a swap: side, vertex, pre-swap position.
pub fn swap_value(s: &Swap) -> Value {
    json!({
        "side": s.side.to_string(),
        "vertex": s.vertex + 1,
        "pos": s.pos + 1,
    })
}

pub fn swaps_value(seq: &[Swap]) -> Value {
    Value::Array(seq.iter().map(swap_value).collect())
}
