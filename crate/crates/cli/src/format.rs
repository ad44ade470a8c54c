//! Line-based text formats. All indices are 1-based on disk and 0-based in
//! the API; `#` starts a comment anywhere on a line.
//!
//! Instance files:
//!
//! ```text
//! smp 1
//! A <n_a>
//! B <n_b>
//! cap a <i> <c>            # optional, default 1
//! cap b <j> <c>
//! pref a <i> : <j1> <j2> ...
//! pref b <j> : <i1> <i2> ...
//! ```
//!
//! Every edge must appear on both sides; vertices without a `pref` line are
//! isolated. Subgraph files hold `match <i> <j>` lines; swap files hold
//! `swap a|b <vertex> <position>` lines applied in file order, positions
//! referring to the list as it is just before each swap.

use smpswap_core::{Instance, Side, Subgraph, Swap, SwapSequence, Violation};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    At { line: usize, msg: String },
    #[error("{msg}")]
    General { msg: String },
}

impl ParseError {
    fn at(line: usize, msg: impl Into<String>) -> ParseError {
        ParseError::At { line, msg: msg.into() }
    }

    fn general(msg: impl Into<String>) -> ParseError {
        ParseError::General { msg: msg.into() }
    }
}

/// A parsed instance plus the line each vertex's `pref` directive came
/// from, for error attribution.
pub struct ParsedInstance {
    pub instance: Instance,
    pub violations: Vec<(Violation, Option<usize>)>,
}

impl ParsedInstance {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn meaningful_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            None
        } else {
            Some((idx + 1, stripped))
        }
    })
}

fn parse_index(token: &str, line: usize, what: &str) -> Result<usize, ParseError> {
    let v: usize = token
        .parse()
        .map_err(|_| ParseError::at(line, format!("expected {what}, got `{token}`")))?;
    if v == 0 {
        return Err(ParseError::at(line, format!("{what} must be >= 1")));
    }
    Ok(v - 1)
}

fn parse_side(token: &str, line: usize) -> Result<Side, ParseError> {
    match token {
        "a" | "A" => Ok(Side::A),
        "b" | "B" => Ok(Side::B),
        _ => Err(ParseError::at(line, format!("expected side `a` or `b`, got `{token}`"))),
    }
}

/// Parses an instance and keeps invariant violations as data instead of
/// failing, so callers can report them all.
pub fn parse_instance_lenient(text: &str) -> Result<ParsedInstance, ParseError> {
    let mut lines = meaningful_lines(text);
    match lines.next() {
        Some((_, "smp 1")) => {}
        Some((n, other)) => {
            return Err(ParseError::at(n, format!("expected header `smp 1`, got `{other}`")))
        }
        None => return Err(ParseError::general("empty file: expected header `smp 1`")),
    }

    let mut n_a: Option<usize> = None;
    let mut n_b: Option<usize> = None;
    let mut caps: Vec<(usize, Side, usize, u32)> = Vec::new();
    let mut prefs: Vec<(usize, Side, usize, Vec<usize>)> = Vec::new();

    for (line, content) in lines {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens[0] {
            "A" | "B" => {
                if tokens.len() != 2 {
                    return Err(ParseError::at(line, "expected `A <count>` or `B <count>`"));
                }
                let count: usize = tokens[1]
                    .parse()
                    .map_err(|_| ParseError::at(line, "vertex count must be an integer"))?;
                let slot = if tokens[0] == "A" { &mut n_a } else { &mut n_b };
                if slot.is_some() {
                    return Err(ParseError::at(line, format!("duplicate `{}` line", tokens[0])));
                }
                *slot = Some(count);
            }
            "cap" => {
                if tokens.len() != 4 {
                    return Err(ParseError::at(line, "expected `cap a|b <vertex> <capacity>`"));
                }
                let side = parse_side(tokens[1], line)?;
                let vertex = parse_index(tokens[2], line, "vertex index")?;
                let cap: u32 = tokens[3]
                    .parse()
                    .map_err(|_| ParseError::at(line, "capacity must be an integer"))?;
                caps.push((line, side, vertex, cap));
            }
            "pref" => {
                let colon = tokens
                    .iter()
                    .position(|&t| t == ":")
                    .ok_or_else(|| ParseError::at(line, "expected `:` in pref line"))?;
                if colon != 3 {
                    return Err(ParseError::at(line, "expected `pref a|b <vertex> : <entries>`"));
                }
                let side = parse_side(tokens[1], line)?;
                let vertex = parse_index(tokens[2], line, "vertex index")?;
                let entries = tokens[colon + 1..]
                    .iter()
                    .map(|t| parse_index(t, line, "list entry"))
                    .collect::<Result<Vec<usize>, ParseError>>()?;
                prefs.push((line, side, vertex, entries));
            }
            other => {
                return Err(ParseError::at(line, format!("unknown directive `{other}`")));
            }
        }
    }

    let n_a = n_a.ok_or_else(|| ParseError::general("missing `A <count>` line"))?;
    let n_b = n_b.ok_or_else(|| ParseError::general("missing `B <count>` line"))?;

    let mut prefs_a: Vec<Option<(usize, Vec<usize>)>> = vec![None; n_a];
    let mut prefs_b: Vec<Option<(usize, Vec<usize>)>> = vec![None; n_b];
    for (line, side, vertex, entries) in prefs {
        let (slot, n) = match side {
            Side::A => (&mut prefs_a, n_a),
            Side::B => (&mut prefs_b, n_b),
        };
        if vertex >= n {
            return Err(ParseError::at(
                line,
                format!("vertex {}{} out of range (side has {n})", side, vertex + 1),
            ));
        }
        if slot[vertex].is_some() {
            return Err(ParseError::at(line, format!("duplicate pref line for {}{}", side, vertex + 1)));
        }
        slot[vertex] = Some((line, entries));
    }

    let mut cap_a = vec![1u32; n_a];
    let mut cap_b = vec![1u32; n_b];
    let mut cap_lines: Vec<Option<usize>> = vec![None; n_a + n_b];
    for (line, side, vertex, cap) in caps {
        let (caps_vec, n, off) = match side {
            Side::A => (&mut cap_a, n_a, 0),
            Side::B => (&mut cap_b, n_b, n_a),
        };
        if vertex >= n {
            return Err(ParseError::at(
                line,
                format!("vertex {}{} out of range (side has {n})", side, vertex + 1),
            ));
        }
        if cap_lines[off + vertex].replace(line).is_some() {
            return Err(ParseError::at(line, format!("duplicate cap line for {}{}", side, vertex + 1)));
        }
        caps_vec[vertex] = cap;
    }

    let pref_line = |side: Side, vertex: usize| -> Option<usize> {
        match side {
            Side::A => prefs_a.get(vertex).and_then(|s| s.as_ref().map(|&(l, _)| l)),
            Side::B => prefs_b.get(vertex).and_then(|s| s.as_ref().map(|&(l, _)| l)),
        }
    };
    let instance = Instance::with_capacities(
        prefs_a.iter().map(|s| s.as_ref().map_or(Vec::new(), |(_, e)| e.clone())).collect(),
        prefs_b.iter().map(|s| s.as_ref().map_or(Vec::new(), |(_, e)| e.clone())).collect(),
        cap_a,
        cap_b,
    );
    let violations = instance
        .validate()
        .violations
        .into_iter()
        .map(|v| {
            let (side, vertex) = v.subject();
            let line = match v {
                Violation::ZeroCapacity { .. } => {
                    let off = if side == Side::A { 0 } else { n_a };
                    cap_lines[off + vertex]
                }
                _ => pref_line(side, vertex),
            };
            (v, line)
        })
        .collect();
    Ok(ParsedInstance { instance, violations })
}

/// Parses and validates an instance; any invariant violation is an error
/// pointing at the offending line.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let parsed = parse_instance_lenient(text)?;
    match parsed.violations.first() {
        None => Ok(parsed.instance),
        Some((v, Some(line))) => Err(ParseError::at(*line, v.to_string())),
        Some((v, None)) => Err(ParseError::general(v.to_string())),
    }
}

pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    out.push_str("smp 1\n");
    out.push_str(&format!("A {}\n", inst.n_a()));
    out.push_str(&format!("B {}\n", inst.n_b()));
    for i in 0..inst.n_a() {
        if inst.cap_a(i) != 1 {
            out.push_str(&format!("cap a {} {}\n", i + 1, inst.cap_a(i)));
        }
    }
    for j in 0..inst.n_b() {
        if inst.cap_b(j) != 1 {
            out.push_str(&format!("cap b {} {}\n", j + 1, inst.cap_b(j)));
        }
    }
    for (side, n) in [(Side::A, inst.n_a()), (Side::B, inst.n_b())] {
        for v in 0..n {
            let list = inst.pref(side, v);
            if list.is_empty() {
                continue;
            }
            let entries: Vec<String> = list.iter().map(|&u| (u + 1).to_string()).collect();
            out.push_str(&format!("pref {} {} : {}\n", side, v + 1, entries.join(" ")));
        }
    }
    out
}

/// Parses a subgraph and checks it against the instance (edges must exist,
/// capacities must hold).
pub fn parse_subgraph(text: &str, inst: &Instance) -> Result<Subgraph, ParseError> {
    let mut edges = Vec::new();
    for (line, content) in meaningful_lines(text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens[0] != "match" || tokens.len() != 3 {
            return Err(ParseError::at(line, "expected `match <i> <j>`"));
        }
        let i = parse_index(tokens[1], line, "A vertex")?;
        let j = parse_index(tokens[2], line, "B vertex")?;
        if !inst.has_edge(i, j) {
            return Err(ParseError::at(line, format!("({},{}) is not an edge", i + 1, j + 1)));
        }
        edges.push((i, j));
    }
    let s = Subgraph::from_edges(edges);
    s.validate_in(inst).map_err(|e| ParseError::general(e.to_string()))?;
    Ok(s)
}

pub fn serialize_subgraph(s: &Subgraph) -> String {
    let mut out = String::new();
    for &(i, j) in s.edges() {
        out.push_str(&format!("match {} {}\n", i + 1, j + 1));
    }
    out
}

pub fn parse_swaps(text: &str) -> Result<SwapSequence, ParseError> {
    let mut seq = Vec::new();
    for (line, content) in meaningful_lines(text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens[0] != "swap" || tokens.len() != 4 {
            return Err(ParseError::at(line, "expected `swap a|b <vertex> <position>`"));
        }
        let side = parse_side(tokens[1], line)?;
        let vertex = parse_index(tokens[2], line, "vertex index")?;
        let pos = parse_index(tokens[3], line, "position")?;
        seq.push(Swap::new(side, vertex, pos));
    }
    Ok(seq)
}

pub fn serialize_swaps(seq: &[Swap]) -> String {
    let mut out = String::new();
    for s in seq {
        out.push_str(&format!("{s}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use smpswap_core::gen::sample_3x3;

    const SAMPLE: &str = "\
# the worked 3x3 example
smp 1
A 3
B 3
pref a 1 : 1 3 2
pref a 2 : 2 1 3
pref a 3 : 1 2
pref b 1 : 1 3 2
pref b 2 : 2 1 3
pref b 3 : 2 1
";

    #[test]
    fn parses_the_sample_fixture() {
        let inst = parse_instance(SAMPLE).unwrap();
        assert_eq!(inst, sample_3x3());
        assert_eq!(inst.edge_count(), 8);
    }

    #[test]
    fn duplicate_entry_is_an_error_with_its_line() {
        let text = "smp 1\nA 1\nB 2\npref a 1 : 2 2\npref b 2 : 1\n";
        match parse_instance(text) {
            Err(ParseError::At { line, msg }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("duplicate"), "{msg}");
            }
            other => panic!("expected duplicate-entry error, got {other:?}"),
        }
    }

    #[test]
    fn missing_pref_line_means_isolated_vertex() {
        let text = "smp 1\nA 2\nB 1\npref a 1 : 1\npref b 1 : 1\n";
        let inst = parse_instance(text).unwrap();
        assert!(inst.pref_a(1).is_empty());
    }

    #[test]
    fn explicit_empty_pref_line_is_valid() {
        let text = "smp 1\nA 1\nB 1\npref a 1 :\npref b 1 :\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.edge_count(), 0);
    }

    #[test]
    fn asymmetric_edge_is_an_error() {
        let text = "smp 1\nA 1\nB 1\npref a 1 : 1\n";
        match parse_instance(text) {
            Err(ParseError::At { line, msg }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("asymmetric"), "{msg}");
            }
            other => panic!("expected asymmetric-edge error, got {other:?}"),
        }
    }

    #[test]
    fn header_and_directive_errors() {
        assert!(matches!(parse_instance(""), Err(ParseError::General { .. })));
        assert!(parse_instance("smp 2\n").is_err());
        assert!(parse_instance("smp 1\nA 1\nB 1\nfoo bar\n").is_err());
        assert!(parse_instance("smp 1\nA 1\npref a 1 :\n").is_err(), "missing B line");
    }

    #[test]
    fn capacities_round_trip() {
        let text = "smp 1\nA 1\nB 2\ncap a 1 2\npref a 1 : 1 2\npref b 1 : 1\npref b 2 : 1\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.cap_a(0), 2);
        let reparsed = parse_instance(&serialize_instance(&inst)).unwrap();
        assert_eq!(reparsed, inst);
    }

    #[test]
    fn subgraph_parsing_checks_edges_and_caps() {
        let inst = sample_3x3();
        let s = parse_subgraph("match 1 2\nmatch 2 1\n", &inst).unwrap();
        assert_eq!(s.len(), 2);
        assert!(parse_subgraph("match 3 3\n", &inst).is_err(), "not an edge");
        assert!(parse_subgraph("match 1 1\nmatch 1 2\n", &inst).is_err(), "capacity");
    }

    #[test]
    fn swap_lines_round_trip() {
        let seq = vec![Swap::new(Side::B, 0, 1), Swap::new(Side::A, 2, 0)];
        let text = serialize_swaps(&seq);
        assert_eq!(text, "swap b 1 2\nswap a 3 1\n");
        assert_eq!(parse_swaps(&text).unwrap(), seq);
    }
}
