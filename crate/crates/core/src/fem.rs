//! P1 finite elements on a truncated star graph with a shared vertex unknown.
//!
//! Each distinct edge class of a sector is one branch of a [`StarMatrix`],
//! weighted by its multiplicity. Edges are cut at `x = L` with a Dirichlet
//! condition, so branch unknowns are the nodes `1..M-1`. The mass matrix is
//! lumped (trapezoid rule), which keeps it diagonal.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::graph::{GraphFunction, GridSpec, Sector, StarGraph};
use crate::scalar::Real;
use crate::star_matrix::StarMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization<T> {
    graph: StarGraph<T>,
    grid: GridSpec<T>,
}

impl<T: Real> Discretization<T> {
    pub fn new(graph: StarGraph<T>, grid: GridSpec<T>) -> Self {
        Self { graph, grid }
    }

    pub fn graph(&self) -> &StarGraph<T> {
        &self.graph
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn sector(&self) -> Sector {
        self.graph.sector()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.graph.sector().multiplicities(self.graph.n_edges())
    }

    /// Representative edge of each branch.
    pub fn representatives(&self) -> Vec<usize> {
        let n = self.graph.n_edges();
        match self.graph.sector() {
            Sector::Full => (0..n).collect(),
            Sector::Split(k) => vec![0, k],
            Sector::Equal => vec![0],
        }
    }

    pub fn n_branches(&self) -> usize {
        self.multiplicities().len()
    }

    pub fn branch_len(&self) -> usize {
        self.grid.intervals() - 1
    }

    pub fn dim(&self) -> usize {
        1 + self.n_branches() * self.branch_len()
    }

    /// Stiffness plus the vertex term `alpha |u(0)|^2` plus the lumped
    /// potential `V(branch, node)`; node 0 is the vertex.
    pub fn assemble<V: Fn(usize, usize) -> T>(&self, potential: V) -> StarMatrix<T> {
        let h = self.grid.spacing();
        let inv_h = h.recip();
        let half_h = h * T::lit(0.5);
        let two = T::lit(2.0);
        let len = self.branch_len();
        let mult = self.multiplicities();
        let mut a = StarMatrix::zeros(mult.len(), len);
        a.vertex = self.graph.alpha();
        for (b, (&m, br)) in mult.iter().zip(a.branches.iter_mut()).enumerate() {
            let w = T::from_usize_lossy(m);
            br.coupling = -w * inv_h;
            for i in 0..len {
                br.diag[i] = w * (two * inv_h + h * potential(b, i + 1));
            }
            for o in br.off.iter_mut() {
                *o = -w * inv_h;
            }
            a.vertex += w * (inv_h + half_h * potential(b, 0));
        }
        a
    }

    /// Lumped mass: `sum_b m_b h/2` at the vertex, `m_b h` on branch nodes.
    pub fn mass(&self) -> Vec<T> {
        let h = self.grid.spacing();
        let len = self.branch_len();
        let mult = self.multiplicities();
        let total: usize = mult.iter().sum();
        let mut d = Vec::with_capacity(self.dim());
        d.push(T::from_usize_lossy(total) * h * T::lit(0.5));
        for &m in &mult {
            d.extend(std::iter::repeat_n(T::from_usize_lossy(m) * h, len));
        }
        d
    }

    /// Unknown vector of `u`, which must lie in this sector.
    pub fn restrict(&self, u: &GraphFunction<T>) -> Result<Vec<Complex<T>>> {
        if u.n_edges() != self.graph.n_edges() || !u.grid().same_as(&self.grid) {
            return Err(Error::Dimension("function does not match the discretization".into()));
        }
        let len = self.branch_len();
        let reps = self.representatives();
        let tol = T::tolerance(1e-12) * u.sup_norm().max(T::one());
        let n = self.graph.n_edges();
        for j in 0..n {
            let r = reps[self.sector().component_of(j)];
            if r == j {
                continue;
            }
            let defect = u
                .edge_tail(j)
                .iter()
                .zip(u.edge_tail(r))
                .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).norm()));
            if defect > tol {
                return Err(Error::Sector(format!(
                    "edge {j} differs from edge {r} by {defect:e} in sector {}",
                    self.sector()
                )));
            }
        }
        let mut x = Vec::with_capacity(self.dim());
        x.push(u.vertex());
        for &r in &reps {
            x.extend_from_slice(&u.edge_tail(r)[..len]);
        }
        Ok(x)
    }

    pub fn restrict_real(&self, u: &GraphFunction<T>) -> Result<Vec<T>> {
        Ok(self.restrict(u)?.into_iter().map(|z| z.re).collect())
    }

    /// Graph function on all `N` edges from an unknown vector (zero at `x = L`).
    pub fn extend(&self, x: &[Complex<T>]) -> Result<GraphFunction<T>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!("vector length {} vs {}", x.len(), self.dim())));
        }
        let len = self.branch_len();
        let zero = Complex::new(T::zero(), T::zero());
        let sector = self.sector();
        let samples = (0..self.graph.n_edges())
            .map(|j| {
                let b = sector.component_of(j);
                let mut s = Vec::with_capacity(len + 2);
                s.push(x[0]);
                s.extend_from_slice(&x[1 + b * len..1 + (b + 1) * len]);
                s.push(zero);
                s
            })
            .collect();
        GraphFunction::from_edge_samples(self.graph, self.grid, samples, T::zero())
    }

    pub fn extend_real(&self, x: &[T]) -> Result<GraphFunction<T>> {
        let z: Vec<Complex<T>> = x.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.extend(&z)
    }
}

/// `x^T diag(d) y` for real vectors.
pub fn weighted_dot<T: Real>(d: &[T], x: &[T], y: &[T]) -> T {
    d.iter().zip(x).zip(y).map(|((&w, &a), &b)| w * a * b).sum()
}

/// Plain dot product.
pub fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}
