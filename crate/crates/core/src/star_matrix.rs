//! Symmetric "star-banded" matrices and their LDLᵀ factorization.
//!
//! Unknowns are ordered `[vertex, branch 0 nodes, branch 1 nodes, ...]`.
//! Each branch is a tridiagonal chain whose first node couples to the
//! vertex. Eliminating every chain from its far end towards the vertex and
//! the vertex last produces no fill, so factorization and solves are
//! `O(total size)`. The entries may be real or complex (complex symmetric,
//! not Hermitian).

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Matrix entry type: a real scalar or a complex number over one.
pub trait Entry:
    Copy
    + Zero
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + std::fmt::Debug
{
    type Real: Real;
    fn modulus(self) -> Self::Real;
    fn from_real(x: Self::Real) -> Self;
    fn finite(self) -> bool;
}

macro_rules! real_entry {
    ($($t:ty),*) => {$(
        impl Entry for $t {
            type Real = $t;
            fn modulus(self) -> $t {
                self.abs()
            }
            fn from_real(x: $t) -> $t {
                x
            }
            fn finite(self) -> bool {
                self.is_finite()
            }
        }
    )*};
}

real_entry!(f32, f64);

impl<T: Real> Entry for Complex<T> {
    type Real = T;
    fn modulus(self) -> T {
        self.norm()
    }
    fn from_real(x: T) -> Self {
        Complex::new(x, T::zero())
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// One tridiagonal chain attached to the vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch<F> {
    /// Entry between the vertex and node 0 of the chain.
    pub coupling: F,
    pub diag: Vec<F>,
    /// `off[i]` couples nodes `i` and `i + 1`.
    pub off: Vec<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarMatrix<F> {
    pub vertex: F,
    pub branches: Vec<Branch<F>>,
}

impl<F: Entry> StarMatrix<F> {
    /// Zero matrix with `n_branches` chains of `len` nodes.
    pub fn zeros(n_branches: usize, len: usize) -> Self {
        let z = F::zero();
        Self {
            vertex: z,
            branches: (0..n_branches)
                .map(|_| Branch { coupling: z, diag: vec![z; len], off: vec![z; len.saturating_sub(1)] })
                .collect(),
        }
    }

    pub fn branch_len(&self) -> usize {
        self.branches.first().map_or(0, |b| b.diag.len())
    }

    pub fn dim(&self) -> usize {
        1 + self.branches.iter().map(|b| b.diag.len()).sum::<usize>()
    }

    /// Flat index of node `i` on branch `b`.
    #[inline]
    pub fn index(&self, b: usize, i: usize) -> usize {
        1 + b * self.branch_len() + i
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.branches.len() == other.branches.len()
            && self.branches.iter().zip(&other.branches).all(|(a, b)| a.diag.len() == b.diag.len())
    }

    /// Entrywise `self + factor * other`.
    pub fn add_scaled(&self, factor: F, other: &Self) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::Dimension("star matrices have different shapes".into()));
        }
        let branches = self
            .branches
            .iter()
            .zip(&other.branches)
            .map(|(a, b)| Branch {
                coupling: a.coupling + factor * b.coupling,
                diag: a.diag.iter().zip(&b.diag).map(|(&x, &y)| x + factor * y).collect(),
                off: a.off.iter().zip(&b.off).map(|(&x, &y)| x + factor * y).collect(),
            })
            .collect();
        Ok(Self { vertex: self.vertex + factor * other.vertex, branches })
    }

    /// Maps every entry through `f` (used to lift a real matrix to complex).
    pub fn map<G: Entry>(&self, f: impl Fn(F) -> G) -> StarMatrix<G> {
        StarMatrix {
            vertex: f(self.vertex),
            branches: self
                .branches
                .iter()
                .map(|b| Branch {
                    coupling: f(b.coupling),
                    diag: b.diag.iter().map(|&x| f(x)).collect(),
                    off: b.off.iter().map(|&x| f(x)).collect(),
                })
                .collect(),
        }
    }

    pub fn matvec(&self, x: &[F]) -> Result<Vec<F>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!("vector length {} vs matrix {}", x.len(), self.dim())));
        }
        let mut y = vec![F::zero(); x.len()];
        y[0] = self.vertex * x[0];
        let mut offset = 1;
        for br in &self.branches {
            let n = br.diag.len();
            let xs = &x[offset..offset + n];
            let ys = &mut y[offset..offset + n];
            for i in 0..n {
                ys[i] = br.diag[i] * xs[i];
            }
            for i in 0..n.saturating_sub(1) {
                ys[i] = ys[i] + br.off[i] * xs[i + 1];
                ys[i + 1] = ys[i + 1] + br.off[i] * xs[i];
            }
            if n > 0 {
                ys[0] = ys[0] + br.coupling * x[0];
                y[0] = y[0] + br.coupling * xs[0];
            }
            offset += n;
        }
        Ok(y)
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> F::Real {
        let mut vertex_row = self.vertex.modulus();
        let mut worst = F::Real::zero();
        for br in &self.branches {
            let n = br.diag.len();
            vertex_row += br.coupling.modulus();
            for i in 0..n {
                let mut row = br.diag[i].modulus();
                if i > 0 {
                    row += br.off[i - 1].modulus();
                } else {
                    row += br.coupling.modulus();
                }
                if i + 1 < n {
                    row += br.off[i].modulus();
                }
                if row > worst {
                    worst = row;
                }
            }
        }
        if vertex_row > worst {
            vertex_row
        } else {
            worst
        }
    }

    /// Dense copy, row-major. For tests and small oracles.
    pub fn to_dense(&self) -> Vec<Vec<F>> {
        let n = self.dim();
        let mut d = vec![vec![F::zero(); n]; n];
        d[0][0] = self.vertex;
        for (b, br) in self.branches.iter().enumerate() {
            for i in 0..br.diag.len() {
                let r = self.index(b, i);
                d[r][r] = br.diag[i];
                if i + 1 < br.diag.len() {
                    d[r][r + 1] = br.off[i];
                    d[r + 1][r] = br.off[i];
                }
            }
            if !br.diag.is_empty() {
                let r = self.index(b, 0);
                d[0][r] = br.coupling;
                d[r][0] = br.coupling;
            }
        }
        d
    }

    /// LDLᵀ factorization without pivoting. A pivot below `eps * ||A||` is
    /// replaced by `1e-14 * ||A||` and the factorization is flagged.
    pub fn factor(&self) -> Result<StarLdlt<F>> {
        let norm = self.norm_inf();
        let small = <F::Real as num_traits::Float>::epsilon() * norm;
        let reg_value = F::from_real(F::Real::lit(1e-14) * norm);
        let mut regularized = false;
        let mut fix = |d: F| -> F {
            if d.modulus() <= small {
                regularized = true;
                reg_value
            } else {
                d
            }
        };
        let mut chains = Vec::with_capacity(self.branches.len());
        let mut dv = self.vertex;
        for br in &self.branches {
            let n = br.diag.len();
            let mut d = vec![F::zero(); n];
            let mut l = vec![F::zero(); n.saturating_sub(1)];
            if n > 0 {
                d[n - 1] = fix(br.diag[n - 1]);
                for i in (0..n - 1).rev() {
                    l[i] = br.off[i] / d[i + 1];
                    d[i] = fix(br.diag[i] - br.off[i] * l[i]);
                }
            }
            let lv = if n > 0 { br.coupling / d[0] } else { F::zero() };
            dv = dv - br.coupling * lv;
            chains.push(ChainFactor { d, l, lv });
        }
        let dv = fix(dv);
        let finite = dv.finite() && chains.iter().all(|c| c.d.iter().all(|x| x.finite()));
        if !finite {
            return Err(Error::Numerical("LDLt factorization broke down".into()));
        }
        Ok(StarLdlt { chains, vertex_pivot: dv, regularized })
    }
}

#[derive(Debug, Clone)]
struct ChainFactor<F> {
    d: Vec<F>,
    l: Vec<F>,
    lv: F,
}

/// LDLᵀ factors of a [`StarMatrix`].
#[derive(Debug, Clone)]
pub struct StarLdlt<F> {
    chains: Vec<ChainFactor<F>>,
    vertex_pivot: F,
    regularized: bool,
}

/// Sylvester inertia: counts of negative, zero and positive pivots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

impl<F: Entry> StarLdlt<F> {
    pub fn was_regularized(&self) -> bool {
        self.regularized
    }

    pub fn pivots(&self) -> impl Iterator<Item = F> + '_ {
        std::iter::once(self.vertex_pivot).chain(self.chains.iter().flat_map(|c| c.d.iter().copied()))
    }

    pub fn solve(&self, rhs: &[F]) -> Result<Vec<F>> {
        let dim = 1 + self.chains.iter().map(|c| c.d.len()).sum::<usize>();
        if rhs.len() != dim {
            return Err(Error::Dimension(format!("rhs length {} vs {}", rhs.len(), dim)));
        }
        let mut z = rhs.to_vec();
        // forward: L z = b in elimination order
        let mut offset = 1;
        for c in &self.chains {
            let n = c.d.len();
            let zs = &mut z[offset..offset + n];
            for i in (1..n).rev() {
                zs[i - 1] = zs[i - 1] - c.l[i - 1] * zs[i];
            }
            offset += n;
        }
        let mut offset = 1;
        let mut zv = z[0];
        for c in &self.chains {
            if !c.d.is_empty() {
                zv = zv - c.lv * z[offset];
            }
            offset += c.d.len();
        }
        z[0] = zv / self.vertex_pivot;
        // diagonal
        let mut offset = 1;
        for c in &self.chains {
            for (i, &d) in c.d.iter().enumerate() {
                z[offset + i] = z[offset + i] / d;
            }
            offset += c.d.len();
        }
        // backward: Lᵀ x = w in reverse elimination order
        let xv = z[0];
        let mut offset = 1;
        for c in &self.chains {
            let n = c.d.len();
            if n > 0 {
                z[offset] = z[offset] - c.lv * xv;
                for i in 1..n {
                    z[offset + i] = z[offset + i] - c.l[i - 1] * z[offset + i - 1];
                }
            }
            offset += n;
        }
        Ok(z)
    }
}

impl<T: Real> StarLdlt<T> {
    pub fn inertia(&self) -> Inertia {
        let mut inertia = Inertia { negative: 0, zero: 0, positive: 0 };
        for d in self.pivots() {
            if d < T::zero() {
                inertia.negative += 1;
            } else if d > T::zero() {
                inertia.positive += 1;
            } else {
                inertia.zero += 1;
            }
        }
        inertia
    }
}
