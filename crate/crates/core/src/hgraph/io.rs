//! hMetis hypergraph and partition file formats.
//!
//! Hypergraph: header `m n [fmt]` where `fmt` is `1` (edge costs), `10`
//! (node weights) or `11` (both); then `m` edge lines with an optional
//! leading cost followed by 1-indexed pins; then `n` node weight lines when
//! weights are present. Lines starting with `%` are comments.
//!
//! Partition: one block id per line, in node order.

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use super::{BlockId, Hypergraph, HypergraphError, NodeId, Weight};

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: malformed header: {msg}")]
    Header { line: usize, msg: String },
    #[error("line {line}: invalid number `{token}`")]
    Number { line: usize, token: String },
    #[error("line {line}: pin {pin} outside [1, {n}]")]
    PinOutOfRange { line: usize, pin: i64, n: usize },
    #[error("line {line}: duplicate pin {pin}")]
    DuplicatePin { line: usize, pin: i64 },
    #[error("line {line}: empty hyperedge")]
    EmptyEdge { line: usize },
    #[error("line {line}: negative weight")]
    NegativeWeight { line: usize },
    #[error("expected {expected} {what} lines, found {found}")]
    Truncated { what: &'static str, expected: usize, found: usize },
    #[error("line {line}: unexpected trailing data")]
    TrailingData { line: usize },
    #[error("line {line}: block id {block} out of range")]
    BlockOutOfRange { line: usize, block: i64 },
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn parse_num(tok: &str, line: usize) -> Result<i64, ParseError> {
    tok.parse::<i64>().map_err(|_| ParseError::Number { line, token: tok.to_string() })
}

/// Parses an hMetis hypergraph.
pub fn parse_hmetis(text: &str) -> Result<Hypergraph, ParseError> {
    // (1-based line number, content) for every non-comment line
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.starts_with('%'));

    let (hline, header) = loop {
        match lines.next() {
            Some((_, "")) => continue,
            Some(x) => break x,
            None => return Err(ParseError::Header { line: 1, msg: "missing header".into() }),
        }
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if !(2..=3).contains(&fields.len()) {
        return Err(ParseError::Header { line: hline, msg: format!("expected 2 or 3 fields, got {}", fields.len()) });
    }
    let m = parse_num(fields[0], hline)?;
    let n = parse_num(fields[1], hline)?;
    if m < 0 || n < 0 {
        return Err(ParseError::Header { line: hline, msg: "negative counts".into() });
    }
    let (m, n) = (m as usize, n as usize);
    let (has_costs, has_weights) = match fields.get(2).copied() {
        None | Some("0") => (false, false),
        Some("1") => (true, false),
        Some("10") => (false, true),
        Some("11") => (true, true),
        Some(other) => return Err(ParseError::Header { line: hline, msg: format!("unknown fmt `{other}`") }),
    };

    let mut edges = Vec::with_capacity(m);
    let mut costs = has_costs.then(|| Vec::with_capacity(m));
    let mut seen = vec![usize::MAX; n];
    for e in 0..m {
        let Some((line, content)) = lines.next() else {
            return Err(ParseError::Truncated { what: "hyperedge", expected: m, found: e });
        };
        let mut toks = content.split_whitespace();
        if let Some(costs) = costs.as_mut() {
            let Some(tok) = toks.next() else {
                return Err(ParseError::EmptyEdge { line });
            };
            let c = parse_num(tok, line)?;
            if c < 0 {
                return Err(ParseError::NegativeWeight { line });
            }
            costs.push(c as Weight);
        }
        let mut pins = Vec::new();
        for tok in toks {
            let pin = parse_num(tok, line)?;
            if pin < 1 || pin as usize > n {
                return Err(ParseError::PinOutOfRange { line, pin, n });
            }
            let idx = pin as usize - 1;
            if seen[idx] == e {
                return Err(ParseError::DuplicatePin { line, pin });
            }
            seen[idx] = e;
            pins.push(idx as NodeId);
        }
        if pins.is_empty() {
            return Err(ParseError::EmptyEdge { line });
        }
        edges.push(pins);
    }

    let weights = if has_weights {
        let mut w = Vec::with_capacity(n);
        for v in 0..n {
            let Some((line, content)) = lines.next() else {
                return Err(ParseError::Truncated { what: "node weight", expected: n, found: v });
            };
            let mut toks = content.split_whitespace();
            let value = match (toks.next(), toks.next()) {
                (Some(tok), None) => parse_num(tok, line)?,
                (None, _) => return Err(ParseError::Number { line, token: String::new() }),
                (Some(_), Some(extra)) => return Err(ParseError::Number { line, token: extra.to_string() }),
            };
            if value < 0 {
                return Err(ParseError::NegativeWeight { line });
            }
            w.push(value as Weight);
        }
        Some(w)
    } else {
        None
    };

    if let Some((line, _)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(ParseError::TrailingData { line });
    }

    Ok(Hypergraph::new(n, edges, weights, costs)?)
}

pub fn read_hmetis(path: impl AsRef<Path>) -> Result<Hypergraph, ParseError> {
    parse_hmetis(&fs::read_to_string(path)?)
}

/// Writes `h` in hMetis format. Only active nodes are expected; contracted
/// hypergraphs should be uncontracted first.
pub fn write_hmetis(h: &Hypergraph, mut sink: impl Write) -> std::io::Result<()> {
    let has_costs = h.edge_costs().iter().any(|&c| c != 1);
    let has_weights = h.node_weights().iter().any(|&w| w != 1);
    let fmt = match (has_costs, has_weights) {
        (false, false) => "",
        (true, false) => " 1",
        (false, true) => " 10",
        (true, true) => " 11",
    };
    writeln!(sink, "{} {}{}", h.num_edges(), h.num_nodes(), fmt)?;
    for e in h.edges() {
        let mut first = true;
        if has_costs {
            write!(sink, "{}", h.edge_cost(e))?;
            first = false;
        }
        for &p in h.pins(e) {
            if !first {
                write!(sink, " ")?;
            }
            write!(sink, "{}", p + 1)?;
            first = false;
        }
        writeln!(sink)?;
    }
    if has_weights {
        for &w in h.node_weights() {
            writeln!(sink, "{w}")?;
        }
    }
    Ok(())
}

/// Writes one block id per line.
pub fn write_partition(assignment: &[BlockId], mut sink: impl Write) -> std::io::Result<()> {
    let mut buf = String::with_capacity(assignment.len() * 3);
    for b in assignment {
        buf.push_str(&b.to_string());
        buf.push('\n');
    }
    sink.write_all(buf.as_bytes())?;
    sink.flush()
}

/// Reads a partition file with exactly `n` entries, each below `k`.
pub fn read_partition(reader: impl BufRead, n: usize, k: usize) -> Result<Vec<BlockId>, ParseError> {
    let mut out = Vec::with_capacity(n);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if out.len() == n {
            return Err(ParseError::TrailingData { line: i + 1 });
        }
        let b = parse_num(t, i + 1)?;
        if b < 0 || b as usize >= k {
            return Err(ParseError::BlockOutOfRange { line: i + 1, block: b });
        }
        out.push(b as BlockId);
    }
    if out.len() != n {
        return Err(ParseError::Truncated { what: "partition", expected: n, found: out.len() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_instance() {
        let h = parse_hmetis("1 2\n1 2\n").unwrap();
        assert_eq!(h.num_nodes(), 2);
        assert_eq!(h.num_edges(), 1);
        assert_eq!(h.pins(0), &[0, 1]);
        assert_eq!(h.node_weights(), &[1, 1]);
        assert_eq!(h.edge_costs(), &[1]);
    }

    #[test]
    fn weighted_instance() {
        let text = "% weighted\n3 4 11\n5 1 2\n2 3 4\n7 1 3 4\n1\n1\n2\n3\n";
        let h = parse_hmetis(text).unwrap();
        assert_eq!(h.edge_costs(), &[5, 2, 7]);
        assert_eq!(h.node_weights(), &[1, 1, 2, 3]);
        assert_eq!(h.pins(2), &[0, 2, 3]);
    }

    #[test]
    fn node_weights_only() {
        let h = parse_hmetis("2 3 10\n1 2\n2 3\n4\n5\n6\n").unwrap();
        assert_eq!(h.node_weights(), &[4, 5, 6]);
        assert_eq!(h.edge_costs(), &[1, 1]);
    }

    #[test]
    fn rejects_corrupt_inputs() {
        assert!(matches!(parse_hmetis(""), Err(ParseError::Header { .. })));
        assert!(matches!(parse_hmetis("1\n1 2\n"), Err(ParseError::Header { .. })));
        assert!(matches!(parse_hmetis("1 2 7\n1 2\n"), Err(ParseError::Header { .. })));
        assert!(matches!(parse_hmetis("x 2\n1 2\n"), Err(ParseError::Number { .. })));
        assert!(matches!(parse_hmetis("1 2\n1 3\n"), Err(ParseError::PinOutOfRange { pin: 3, .. })));
        assert!(matches!(parse_hmetis("1 2\n0 1\n"), Err(ParseError::PinOutOfRange { pin: 0, .. })));
        assert!(matches!(parse_hmetis("1 2\n2 2\n"), Err(ParseError::DuplicatePin { pin: 2, .. })));
        assert!(matches!(parse_hmetis("2 2\n1 2\n\n"), Err(ParseError::EmptyEdge { line: 3 })));
        assert!(matches!(parse_hmetis("1 2 1\n4\n"), Err(ParseError::EmptyEdge { .. })));
        assert!(matches!(parse_hmetis("3 2\n1 2\n"), Err(ParseError::Truncated { expected: 3, found: 1, .. })));
        assert!(matches!(parse_hmetis("1 2 10\n1 2\n1\n"), Err(ParseError::Truncated { .. })));
        assert!(matches!(parse_hmetis("1 2\n1 2\n1 2\n"), Err(ParseError::TrailingData { line: 3 })));
    }

    #[test]
    fn comments_and_trailing_blank_lines() {
        let h = parse_hmetis("% c\n2 3\n% mid\n1 2\n2 3\n\n\n").unwrap();
        assert_eq!(h.num_edges(), 2);
    }

    #[test]
    fn hmetis_write_round_trip() {
        let text = "3 4 11\n5 1 2\n2 3 4\n7 1 3 4\n1\n1\n2\n3\n";
        let h = parse_hmetis(text).unwrap();
        let mut out = Vec::new();
        write_hmetis(&h, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn partition_lines() {
        let mut out = Vec::new();
        write_partition(&[0, 0, 1, 1], &mut out).unwrap();
        assert_eq!(out, b"0\n0\n1\n1\n");
        let back = read_partition(&out[..], 4, 2).unwrap();
        assert_eq!(back, vec![0, 0, 1, 1]);
    }

    #[test]
    fn partition_large_k() {
        let assignment: Vec<BlockId> = (0..128).collect();
        let mut out = Vec::new();
        write_partition(&assignment, &mut out).unwrap();
        let text = String::from_utf8(out.clone()).unwrap();
        assert_eq!(text.lines().last(), Some("127"));
        assert_eq!(read_partition(&out[..], 128, 128).unwrap(), assignment);
        assert!(matches!(read_partition(&out[..], 128, 127), Err(ParseError::BlockOutOfRange { block: 127, .. })));
    }
}
