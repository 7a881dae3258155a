//! The search-to-sampling graph family: a one-hot matrix is encoded into
//! edge weights so that the positive-weight spanning tree reads the matrix
//! back off. The refined variant replaces zeros by `1/rows^4`, keeping every
//! weight positive while the planted tree still dominates.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{SpanningTree, WeightedGraph};

/// A 0/1 matrix with exactly one 1 per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchMatrix {
    rows: usize,
    cols: usize,
    /// Column of the 1-entry in each row.
    hot: Vec<usize>,
}

impl SearchMatrix {
    pub fn new(rows: usize, cols: usize, hot: Vec<usize>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidSearchMatrix("rows and cols must be >= 1".into()));
        }
        if hot.len() != rows {
            return Err(Error::InvalidSearchMatrix(format!(
                "{} hot entries for {rows} rows",
                hot.len()
            )));
        }
        if let Some(&bad) = hot.iter().find(|&&c| c >= cols) {
            return Err(Error::InvalidSearchMatrix(format!(
                "hot column {bad} out of range for {cols} columns"
            )));
        }
        Ok(SearchMatrix { rows, cols, hot })
    }

    pub fn identity(n: usize) -> Self {
        SearchMatrix { rows: n, cols: n, hot: (0..n).collect() }
    }

    pub fn random(rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        SearchMatrix {
            rows,
            cols,
            hot: (0..rows).map(|_| rng.random_range(0..cols)).collect(),
        }
    }

    /// Parses rows of whitespace-separated 0/1 entries.
    pub fn parse(text: &str) -> Result<Self> {
        let mut hot = Vec::new();
        let mut cols = None;
        for (i, line) in text.lines().map(str::trim).filter(|l| !l.is_empty()).enumerate() {
            let entries: Vec<&str> = line.split_whitespace().collect();
            match cols {
                None => cols = Some(entries.len()),
                Some(c) if c != entries.len() => {
                    return Err(Error::InvalidSearchMatrix(format!(
                        "row {i} has {} entries, expected {c}",
                        entries.len()
                    )));
                }
                _ => {}
            }
            let ones: Vec<usize> = entries
                .iter()
                .enumerate()
                .filter_map(|(j, &e)| match e {
                    "1" => Some(Some(j)),
                    "0" => None,
                    _ => Some(None),
                })
                .map(|x| x.ok_or_else(|| Error::InvalidSearchMatrix(format!("row {i}: entries must be 0 or 1"))))
                .collect::<Result<_>>()?;
            if ones.len() != 1 {
                return Err(Error::InvalidSearchMatrix(format!(
                    "row {i} has {} ones, expected exactly 1",
                    ones.len()
                )));
            }
            hot.push(ones[0]);
        }
        let cols = cols.ok_or_else(|| Error::InvalidSearchMatrix("empty matrix".into()))?;
        SearchMatrix::new(hot.len(), cols, hot)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn hot(&self, row: usize) -> usize {
        self.hot[row]
    }

    pub fn entry(&self, row: usize, col: usize) -> bool {
        self.hot[row] == col
    }
}

impl fmt::Display for SearchMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in 0..self.rows {
            for col in 0..self.cols {
                if col > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", u8::from(self.entry(row, col)))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Vertex layout of the encoded graph: hub `s = 0`, left vertices
/// `1..=cols`, right vertices `cols+1..cols+rows`.
pub fn left_vertex(col: usize) -> usize {
    1 + col
}

pub fn right_vertex(cols: usize, row: usize) -> usize {
    1 + cols + row
}

/// Encodes the matrix: hub-to-left star edges of weight 1 first, then the
/// left-right matrix edges row-major with weight 1 on hot entries and 0
/// (or `1/rows^4` when `refined`) elsewhere.
pub fn build_gadget(matrix: &SearchMatrix, refined: bool) -> WeightedGraph {
    let (rows, cols) = (matrix.rows(), matrix.cols());
    let zero_weight = if refined {
        1.0 / (rows as f64).powi(4)
    } else {
        0.0
    };
    let mut edges = Vec::with_capacity(cols + rows * cols);
    for col in 0..cols {
        edges.push((0, left_vertex(col), 1.0));
    }
    for row in 0..rows {
        for col in 0..cols {
            let w = if matrix.entry(row, col) { 1.0 } else { zero_weight };
            edges.push((left_vertex(col), right_vertex(cols, row), w));
        }
    }
    WeightedGraph::from_edges(1 + cols + rows, &edges)
        .expect("gadget construction yields a valid simple graph")
}

/// The tree of all weight-1 edges: the star plus one hot edge per row.
pub fn planted_tree(matrix: &SearchMatrix) -> SpanningTree {
    let cols = matrix.cols();
    let mut ids: Vec<usize> = (0..cols).collect();
    for row in 0..matrix.rows() {
        ids.push(cols + row * cols + matrix.hot(row));
    }
    SpanningTree::from_edge_ids(ids)
}

/// Reads the matrix back from a spanning tree of the encoded graph: each
/// right vertex must touch exactly one matrix edge in the tree. Trees that
/// attach a right vertex to several left vertices are reported as failures
/// (possible under the refined weights).
pub fn recover_matrix(tree: &SpanningTree, rows: usize, cols: usize) -> Result<SearchMatrix> {
    let mut hot: Vec<Vec<usize>> = vec![Vec::new(); rows];
    for &id in tree.edge_ids() {
        if id < cols {
            continue;
        }
        let flat = id - cols;
        let (row, col) = (flat / cols, flat % cols);
        if row >= rows {
            return Err(Error::InvalidInput(format!(
                "edge {id} is outside a {rows} x {cols} matrix layout"
            )));
        }
        hot[row].push(col);
    }
    for (row, cands) in hot.iter().enumerate() {
        if cands.len() != 1 {
            return Err(Error::RecoveryFailed {
                vertex: right_vertex(cols, row),
                degree: cands.len(),
            });
        }
    }
    SearchMatrix::new(rows, cols, hot.into_iter().map(|c| c[0]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::enumerate_trees;

    #[test]
    fn identity_gadget_shape() {
        let m = SearchMatrix::identity(2);
        let g = build_gadget(&m, false);
        assert_eq!(g.n(), 5);
        assert_eq!(g.m(), 6);
        let positive: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .filter(|e| e.weight > 0.0)
            .map(|e| (e.u, e.v))
            .collect();
        assert_eq!(positive, vec![(0, 1), (0, 2), (1, 3), (2, 4)]);
    }

    #[test]
    fn single_cell_gadget_is_a_path() {
        let m = SearchMatrix::new(1, 1, vec![0]).unwrap();
        let g = build_gadget(&m, false);
        assert_eq!(g.n(), 3);
        let trees = enumerate_trees(&g).unwrap();
        assert_eq!(trees.len(), 1);
        assert_eq!(trees[0].0, planted_tree(&m));
    }

    #[test]
    fn refined_zero_weight_is_inverse_fourth_power() {
        let m = SearchMatrix::identity(2);
        let g = build_gadget(&m, true);
        // Matrix edge (row 0, col 1) is a zero entry.
        let id = 2 + 0 * 2 + 1;
        assert_eq!(g.edge(id).weight, 1.0 / 16.0);
    }

    #[test]
    fn planted_tree_is_the_unique_positive_tree() {
        let m = SearchMatrix::new(3, 2, vec![1, 0, 1]).unwrap();
        let g = build_gadget(&m, false);
        assert_eq!(g.n(), 1 + 2 + 3);
        let positive = g.edges().iter().filter(|e| e.weight > 0.0).count();
        assert_eq!(positive, 3 + 2);
        let trees = enumerate_trees(&g).unwrap();
        let planted = planted_tree(&m);
        for (t, p) in trees {
            if t == planted {
                assert!((p - 1.0).abs() < 1e-12);
            } else {
                assert_eq!(p, 0.0);
            }
        }
    }

    #[test]
    fn recover_round_trips_planted_trees() {
        let m = SearchMatrix::new(4, 3, vec![2, 0, 1, 2]).unwrap();
        let recovered = recover_matrix(&planted_tree(&m), 4, 3).unwrap();
        assert_eq!(recovered, m);
    }

    #[test]
    fn recover_rejects_double_attachment() {
        // Star edge 0 plus both matrix edges at the right vertex: a valid
        // tree of the refined 1x2 gadget that recovery must reject.
        let m = SearchMatrix::new(1, 2, vec![0]).unwrap();
        let tree = SpanningTree::from_edge_ids(vec![0, 2, 3]);
        let g = build_gadget(&m, true);
        g.validate_tree(&tree).unwrap();
        assert!(matches!(
            recover_matrix(&tree, 1, 2),
            Err(Error::RecoveryFailed { degree: 2, .. })
        ));
    }

    #[test]
    fn parse_and_display_round_trip() {
        let text = "0 1 0\n1 0 0\n";
        let m = SearchMatrix::parse(text).unwrap();
        assert_eq!(m.hot(0), 1);
        assert_eq!(m.hot(1), 0);
        assert_eq!(m.to_string(), text);
        assert!(SearchMatrix::parse("0 0\n").is_err());
        assert!(SearchMatrix::parse("1 1\n").is_err());
        assert!(SearchMatrix::parse("2 0\n").is_err());
    }
}
