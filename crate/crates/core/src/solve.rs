//! Laplacian solves: dense factorization for small graphs, preconditioned
//! conjugate gradients above the cutoff.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Vertex count up to which the dense path is used.
pub(crate) const DENSE_CUTOFF: usize = 2000;

const CG_TOL: f64 = 1e-10;

pub(crate) enum LaplacianSolver {
    /// Inverse of `L + J/n`, which agrees with the pseudoinverse on the
    /// complement of the all-ones vector.
    Dense { inv: DMatrix<f64> },
    Cg {
        adj: Vec<Vec<(usize, f64)>>,
        inv_diag: Vec<f64>,
        max_iter: usize,
    },
}

impl LaplacianSolver {
    pub(crate) fn new(graph: &WeightedGraph, dense_cutoff: usize) -> Result<Self> {
        if !graph.is_connected(true) {
            return Err(Error::Disconnected);
        }
        let n = graph.n();
        if n <= dense_cutoff {
            let mut shifted = graph.laplacian();
            let shift = 1.0 / n as f64;
            for i in 0..n {
                for j in 0..n {
                    shifted[(i, j)] += shift;
                }
            }
            let chol = shifted
                .cholesky()
                .ok_or_else(|| Error::InvalidInput("Laplacian factorization failed".into()))?;
            Ok(LaplacianSolver::Dense { inv: chol.inverse() })
        } else {
            let mut adj = vec![Vec::new(); n];
            let mut diag = vec![0.0; n];
            for e in graph.edges() {
                if e.weight > 0.0 {
                    adj[e.u].push((e.v, e.weight));
                    adj[e.v].push((e.u, e.weight));
                    diag[e.u] += e.weight;
                    diag[e.v] += e.weight;
                }
            }
            let inv_diag = diag.iter().map(|&d| 1.0 / d).collect();
            Ok(LaplacianSolver::Cg {
                adj,
                inv_diag,
                max_iter: 50 * n.max(100),
            })
        }
    }

    pub(crate) fn default_for(graph: &WeightedGraph) -> Result<Self> {
        Self::new(graph, DENSE_CUTOFF)
    }

    /// Solves `L x = b` for `b` orthogonal to the all-ones vector, returning
    /// the minimum-norm solution.
    pub(crate) fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            LaplacianSolver::Dense { inv } => Ok(inv * b),
            LaplacianSolver::Cg { adj, inv_diag, max_iter } => {
                cg_solve(adj, inv_diag, b, *max_iter)
            }
        }
    }

    /// Effective resistance between `a` and `b`.
    pub(crate) fn resistance(&self, a: usize, b: usize) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        match self {
            LaplacianSolver::Dense { inv } => {
                Ok(inv[(a, a)] + inv[(b, b)] - 2.0 * inv[(a, b)])
            }
            LaplacianSolver::Cg { adj, inv_diag, max_iter } => {
                let n = adj.len();
                let mut rhs = DVector::zeros(n);
                rhs[a] = 1.0;
                rhs[b] = -1.0;
                let x = cg_solve(adj, inv_diag, &rhs, *max_iter)?;
                Ok(x[a] - x[b])
            }
        }
    }
}

fn apply_laplacian(adj: &[Vec<(usize, f64)>], x: &DVector<f64>, out: &mut DVector<f64>) {
    for (u, nbrs) in adj.iter().enumerate() {
        let mut acc = 0.0;
        for &(v, w) in nbrs {
            acc += w * (x[u] - x[v]);
        }
        out[u] = acc;
    }
}

fn project_out_mean(v: &mut DVector<f64>) {
    let mean = v.mean();
    v.add_scalar_mut(-mean);
}

/// Jacobi-preconditioned CG restricted to the complement of the all-ones
/// vector; the residual is re-projected every iteration to hold the drift.
fn cg_solve(
    adj: &[Vec<(usize, f64)>],
    inv_diag: &[f64],
    b: &DVector<f64>,
    max_iter: usize,
) -> Result<DVector<f64>> {
    let n = adj.len();
    let mut rhs = b.clone();
    project_out_mean(&mut rhs);
    let b_norm = rhs.norm();
    if b_norm == 0.0 {
        return Ok(DVector::zeros(n));
    }
    let mut x = DVector::zeros(n);
    let mut r = rhs;
    let mut z = DVector::from_iterator(n, r.iter().zip(inv_diag).map(|(ri, di)| ri * di));
    project_out_mean(&mut z);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let mut ap = DVector::zeros(n);
    for _ in 0..max_iter {
        apply_laplacian(adj, &p, &mut ap);
        let denom = p.dot(&ap);
        if denom <= 0.0 {
            break;
        }
        let alpha = rz / denom;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        project_out_mean(&mut r);
        if r.norm() <= CG_TOL * b_norm {
            project_out_mean(&mut x);
            return Ok(x);
        }
        z = DVector::from_iterator(n, r.iter().zip(inv_diag).map(|(ri, di)| ri * di));
        project_out_mean(&mut z);
        let rz_next = r.dot(&z);
        let beta = rz_next / rz;
        rz = rz_next;
        p = &z + beta * p;
    }
    if r.norm() <= CG_TOL * b_norm {
        project_out_mean(&mut x);
        Ok(x)
    } else {
        Err(Error::SolverStalled { iterations: max_iter })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dense_and_cg_agree_on_resistances() {
        let g = WeightedGraph::parse("4 5\n0 1 1\n1 2 2\n2 3 1\n0 3 0.5\n0 2 1.5").unwrap();
        let dense = LaplacianSolver::new(&g, 2000).unwrap();
        let cg = LaplacianSolver::new(&g, 1).unwrap();
        for a in 0..4 {
            for b in (a + 1)..4 {
                assert_relative_eq!(
                    dense.resistance(a, b).unwrap(),
                    cg.resistance(a, b).unwrap(),
                    max_relative = 1e-8
                );
            }
        }
    }

    #[test]
    fn series_resistance_adds() {
        let g = WeightedGraph::parse("3 2\n0 1 1\n1 2 1").unwrap();
        let solver = LaplacianSolver::default_for(&g).unwrap();
        assert_relative_eq!(solver.resistance(0, 2).unwrap(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn disconnected_is_rejected() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0)]).unwrap();
        assert!(matches!(LaplacianSolver::default_for(&g), Err(Error::Disconnected)));
    }
}
