use std::io::{BufRead, Write};

use super::{Graph, NodeId};
use crate::error::{Error, Result};

/// One parsed `u v [timestamp]` line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRecord {
    pub source: NodeId,
    pub target: NodeId,
    pub timestamp: Option<i64>,
}

/// Parsed edge list, before it is turned into a graph.
#[derive(Debug, Clone, Default)]
pub struct EdgeList {
    pub records: Vec<EdgeRecord>,
}

impl EdgeList {
    pub fn has_timestamps(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.timestamp.is_some())
    }

    /// Number of nodes implied by the largest id.
    pub fn node_count(&self) -> usize {
        self.records.iter().map(|r| r.source.max(r.target) + 1).max().unwrap_or(0)
    }

    /// Builds the graph. Self-loops and repeated pairs are skipped; the
    /// number skipped is returned alongside.
    pub fn to_graph(&self, directed: bool) -> (Graph, usize) {
        let n = self.node_count();
        let mut g = if directed { Graph::new_directed(n) } else { Graph::new_undirected(n) };
        let mut skipped = 0;
        for r in &self.records {
            if g.add_edge(r.source, r.target).is_err() {
                skipped += 1;
            }
        }
        (g, skipped)
    }

    /// Node timestamps: the smallest timestamp on any line a node appears on.
    pub fn node_timestamps(&self) -> Result<Vec<Option<i64>>> {
        if !self.has_timestamps() {
            return Err(Error::MissingTimestamps);
        }
        let mut ts = vec![None; self.node_count()];
        for r in &self.records {
            let t = r.timestamp.expect("checked above");
            for v in [r.source, r.target] {
                ts[v] = Some(ts[v].map_or(t, |old: i64| old.min(t)));
            }
        }
        Ok(ts)
    }
}

/// Reads whitespace-separated `u v [timestamp]` lines. Blank lines and lines
/// starting with `#` are ignored. Line numbers in errors are 1-based.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<EdgeList> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 2 or 3 fields, found {}", fields.len()),
            });
        }
        let id = |s: &str| {
            s.parse::<NodeId>()
                .map_err(|e| Error::Parse { line: lineno, msg: format!("bad node id {s:?}: {e}") })
        };
        let timestamp = match fields.get(2) {
            Some(s) => Some(s.parse::<i64>().map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("bad timestamp {s:?}: {e}"),
            })?),
            None => None,
        };
        records.push(EdgeRecord { source: id(fields[0])?, target: id(fields[1])?, timestamp });
    }
    Ok(EdgeList { records })
}

/// Writes one `u v` line per edge in ascending order.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_file() {
        let list = read_edge_list("0 1\n1 2\n2 0\n".as_bytes()).unwrap();
        let (g, skipped) = list.to_graph(false);
        assert_eq!(skipped, 0);
        assert_eq!(g.triangle_count(), 1);
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let err = read_edge_list("0 1\n1 x\n2 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = read_edge_list("0 1\n\n1 2 3 4\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn round_trip_preserves_edges() {
        let text = "0 3\n1 2\n2 0\n3 1\n";
        for directed in [false, true] {
            let (g, _) = read_edge_list(text.as_bytes()).unwrap().to_graph(directed);
            let mut buf = Vec::new();
            write_edge_list(&g, &mut buf).unwrap();
            let (h, _) = read_edge_list(buf.as_slice()).unwrap().to_graph(directed);
            assert_eq!(g.edges(), h.edges());
            assert_eq!(g, h);
        }
    }

    #[test]
    fn timestamps() {
        let list = read_edge_list("2 0 1959\n2 1 1959\n3 2 1961\n".as_bytes()).unwrap();
        let ts = list.node_timestamps().unwrap();
        assert_eq!(ts, vec![Some(1959), Some(1959), Some(1959), Some(1961)]);
        let plain = read_edge_list("0 1\n".as_bytes()).unwrap();
        assert!(matches!(plain.node_timestamps(), Err(Error::MissingTimestamps)));
    }
}
