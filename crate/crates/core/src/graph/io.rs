//! Plain CSV dataset files.
//!
//! * edges: one `u,v` pair of 0-indexed node ids per line
//! * features: one comma-separated row of reals per node, row `i` is node `i`
//! * labels: `node,label` per line, every node labelled
//!
//! Blank lines and lines starting with `#` are ignored everywhere.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Adjacency, Graph};
use crate::error::{Error, Result};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_pair(path: &Path, line: usize, l: &str) -> Result<(usize, usize)> {
    let mut it = l.split(',').map(str::trim);
    let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
        return Err(parse_err(path, line, format!("expected two fields, got `{l}`")));
    };
    let a = a
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid node id `{a}`")))?;
    let b = b
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid integer `{b}`")))?;
    Ok((a, b))
}

fn parse_edges(path: &Path) -> Result<Vec<(usize, usize, usize)>> {
    let text = read(path)?;
    content_lines(&text)
        .map(|(line, l)| parse_pair(path, line, l).map(|(u, v)| (line, u, v)))
        .collect()
}

/// Reads a dense real matrix, one row per line, as written by
/// [`write_features`].
pub fn load_features(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = read(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, l) in content_lines(&text) {
        let row = l
            .split(',')
            .map(|f| {
                let f = f.trim();
                f.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| parse_err(path, line, format!("invalid feature value `{f}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(
                    path,
                    line,
                    format!("ragged row: {} values, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Loads an undirected graph. The node count is the number of feature rows
/// when features are given, otherwise one more than the largest id seen.
pub fn load_graph(
    edges_path: &Path,
    features_path: Option<&Path>,
    labels_path: Option<&Path>,
) -> Result<Graph> {
    let edges = parse_edges(edges_path)?;
    let features = features_path.map(load_features).transpose()?;
    let labels = match labels_path {
        Some(p) => {
            let text = read(p)?;
            Some(
                content_lines(&text)
                    .map(|(line, l)| parse_pair(p, line, l).map(|(u, c)| (line, u, c)))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        None => None,
    };

    let n = match &features {
        Some(f) => f.len(),
        None => {
            let max_edge = edges.iter().map(|&(_, u, v)| u.max(v) + 1).max().unwrap_or(0);
            let max_label = labels
                .iter()
                .flatten()
                .map(|&(_, u, _)| u + 1)
                .max()
                .unwrap_or(0);
            max_edge.max(max_label)
        }
    };

    for &(line, u, v) in &edges {
        if u >= n || v >= n {
            return Err(parse_err(
                edges_path,
                line,
                format!("node id out of range for {n} nodes: {u},{v}"),
            ));
        }
    }

    let labels = match (labels, labels_path) {
        (Some(entries), Some(p)) => {
            let mut out = vec![None; n];
            for (line, u, c) in entries {
                if u >= n {
                    return Err(parse_err(p, line, format!("node id {u} out of range for {n} nodes")));
                }
                if out[u].replace(c).is_some_and(|prev| prev != c) {
                    return Err(parse_err(p, line, format!("conflicting labels for node {u}")));
                }
            }
            let missing: Vec<usize> = (0..n).filter(|&i| out[i].is_none()).collect();
            if !missing.is_empty() {
                return Err(Error::Data(format!(
                    "{}: {} nodes without a label (first: {})",
                    p.display(),
                    missing.len(),
                    missing[0]
                )));
            }
            Some(out.into_iter().map(Option::unwrap).collect())
        }
        _ => None,
    };

    let adjacency = Adjacency::from_edges(n, edges.into_iter().map(|(_, u, v)| (u, v)));
    Graph::new(adjacency, features, labels)
}

fn write(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_edges(path: &Path, graph: &Graph) -> Result<()> {
    let mut s = String::new();
    for (u, v) in graph.adjacency().edges() {
        let _ = writeln!(s, "{u},{v}");
    }
    write(path, s)
}

/// Writes rows with Rust's shortest round-trip float formatting.
pub fn write_features(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let mut s = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    write(path, s)
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut s = String::new();
    for (i, l) in labels.iter().enumerate() {
        let _ = writeln!(s, "{i},{l}");
    }
    write(path, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn single_edge() {
        let dir = tempfile::tempdir().unwrap();
        let e = file(&dir, "e.csv", "0,1\n");
        let g = load_graph(&e, None, None).unwrap();
        assert_eq!(g.num_nodes(), 2);
        assert_eq!(g.neighbors(0).len(), 1);
        assert_eq!(g.neighbors(1).len(), 1);
    }

    #[test]
    fn duplicate_edges_collapse() {
        let dir = tempfile::tempdir().unwrap();
        let e = file(&dir, "e.csv", "0,1\n1,0\n0,1\n");
        let g = load_graph(&e, None, None).unwrap();
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn triangle() {
        let dir = tempfile::tempdir().unwrap();
        let e = file(&dir, "e.csv", "0,1\n1,2\n2,0");
        let g = load_graph(&e, None, None).unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert!((0..3).all(|i| g.neighbors(i).len() == 2));
    }

    #[test]
    fn features_and_labels() {
        let dir = tempfile::tempdir().unwrap();
        let e = file(&dir, "e.csv", "# header comment\n0,1\n\n1,2\n");
        let f = file(&dir, "f.csv", "1,0\n0,1\n0.5,0.5\n0,0\n");
        let l = file(&dir, "l.csv", "0,0\n1,1\n2,1\n3,0\n");
        let g = load_graph(&e, Some(&f), Some(&l)).unwrap();
        assert_eq!(g.num_nodes(), 4);
        assert_eq!(g.neighbors(3), &[] as &[usize]);
        assert_eq!(g.labels().unwrap(), &[0, 1, 1, 0]);
        assert_eq!(g.feature_dim(), 2);
        assert_eq!(g.num_classes(), 2);
    }

    #[test]
    fn out_of_range_edge_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let e = file(&dir, "e.csv", "0,1\n1,5\n");
        let f = file(&dir, "f.csv", "1\n2\n3\n");
        match load_graph(&e, Some(&f), None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_features_report_line() {
        let dir = tempfile::tempdir().unwrap();
        let e = file(&dir, "e.csv", "0,1\n");
        let f = file(&dir, "f.csv", "1,2\n3\n");
        match load_graph(&e, Some(&f), None) {
            Err(Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("ragged"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_edge_line() {
        let dir = tempfile::tempdir().unwrap();
        let e = file(&dir, "e.csv", "0,1\n2;3\n");
        assert!(matches!(
            load_graph(&e, None, None),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_graph(Path::new("/nonexistent/edges.csv"), None, None).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/edges.csv"));
    }

    #[test]
    fn write_then_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Graph::new(
            Adjacency::from_edges(3, [(0, 1), (1, 2)]),
            Some(vec![vec![0.1, -2.5], vec![1e-17, 3.0], vec![0.0, 1.0 / 3.0]]),
            Some(vec![0, 1, 0]),
        )
        .unwrap();
        let (e, f, l) = (dir.path().join("e"), dir.path().join("f"), dir.path().join("l"));
        write_edges(&e, &g).unwrap();
        write_features(&f, g.features().unwrap()).unwrap();
        write_labels(&l, g.labels().unwrap()).unwrap();
        assert_eq!(load_graph(&e, Some(&f), Some(&l)).unwrap(), g);
    }
}
