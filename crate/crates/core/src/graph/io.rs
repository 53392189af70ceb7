use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SignedGraph;
use crate::error::{Error, Result};
use crate::output::to_json_string;

/// On-disk graph: `{"n": 3, "edges": [[0, 1, -1.0], ...], "meta": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl GraphFile {
    pub fn from_graph(g: &SignedGraph, meta: Option<serde_json::Value>) -> Self {
        GraphFile {
            n: g.n(),
            edges: g.edges(),
            meta,
        }
    }

    pub fn to_graph(&self) -> Result<SignedGraph> {
        SignedGraph::from_edges(self.n, &self.edges)
    }
}

pub fn read_graph_json(
    text: &str,
    context: &str,
) -> Result<(SignedGraph, Option<serde_json::Value>)> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        context: context.to_string(),
        message: e.to_string(),
    })?;
    let g = file.to_graph()?;
    Ok((g, file.meta))
}

/// Reads `i,j,w` lines (0-based). `n` is one more than the largest index.
/// Lines starting with `#` and a non-numeric header row are skipped.
pub fn read_edge_csv<R: Read>(reader: R, context: &str) -> Result<SignedGraph> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut edges = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            context: context.to_string(),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(row as u64 + 1, |p| p.line());
        if rec.len() != 3 {
            return Err(Error::Parse {
                context: context.to_string(),
                message: format!("line {line}: expected 3 fields `i,j,w`, got {}", rec.len()),
            });
        }
        let parsed = (
            rec[0].parse::<usize>(),
            rec[1].parse::<usize>(),
            rec[2].parse::<f64>(),
        );
        match parsed {
            (Ok(i), Ok(j), Ok(w)) => edges.push((i, j, w)),
            _ if row == 0 => continue,
            _ => {
                return Err(Error::Parse {
                    context: context.to_string(),
                    message: format!(
                        "line {line}: cannot parse `{}`",
                        rec.iter().collect::<Vec<_>>().join(",")
                    ),
                })
            }
        }
    }
    let n = edges
        .iter()
        .map(|&(i, j, _)| i.max(j) + 1)
        .max()
        .unwrap_or(0);
    SignedGraph::from_edges(n, &edges)
}

/// Dispatches on the extension: `.csv` is an edge list, anything else JSON.
pub fn read_graph_file(path: &Path) -> Result<(SignedGraph, Option<serde_json::Value>)> {
    let context = path.display().to_string();
    let text = std::fs::read_to_string(path)?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        Ok((read_edge_csv(text.as_bytes(), &context)?, None))
    } else {
        read_graph_json(&text, &context)
    }
}

pub fn write_graph_json(g: &SignedGraph, meta: Option<serde_json::Value>) -> String {
    to_json_string(&GraphFile::from_graph(g, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip() {
        let g = SignedGraph::from_edges(3, &[(0, 1, -0.3), (1, 2, 0.7), (0, 2, -1.0)]).unwrap();
        let text = write_graph_json(&g, Some(serde_json::json!({"source": "test"})));
        let (back, meta) = read_graph_json(&text, "mem").unwrap();
        assert_eq!(back, g);
        assert_eq!(meta.unwrap()["source"], "test");
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = read_graph_json("{\"n\": 3,\n \"edges\": [[0, 1]]}", "g.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("g.json") && msg.contains("line 2"), "{msg}");
        let err = read_graph_json("{\"edges\": []}", "g.json").unwrap_err();
        assert!(err.to_string().contains("missing field `n`"));
    }

    #[test]
    fn csv_with_header_and_comments() {
        let text = "i,j,w\n# comment\n0,1,-1\n1,2,0.5\n0,2,2\n";
        let g = read_edge_csv(text.as_bytes(), "e.csv").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.weight(0, 1), -1.0);
        assert!(read_edge_csv("0,1,1\n1,x,2\n".as_bytes(), "e.csv").is_err());
    }
}
