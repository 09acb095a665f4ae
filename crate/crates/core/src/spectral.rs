//! Linearized operators around a standing wave, their Morse indices and
//! kernels.
//!
//! For a real profile `phi` the Hessian of the action splits into
//! `L1 = -d^2/dx^2 + omega - mu p phi^{p-1}` acting on real parts and
//! `L2 = -d^2/dx^2 + omega - mu phi^{p-1}` acting on imaginary parts, both
//! with the δ condition at the vertex.

use serde::{Deserialize, Serialize};

use crate::eigen::{count_below, lowest_eigenvalues, shift_invert, EigenPair};
use crate::error::{Error, Result};
use crate::fem::{dot, weighted_dot, Discretization};
use crate::graph::{GraphFunction, GridSpec, Sector};
use crate::profiles::ProfileSpec;
use crate::scalar::Real;
use crate::star_matrix::StarMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    L1,
    L2,
    /// The linear vertex Hamiltonian without potential.
    HLinear,
}

impl std::fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OperatorKind::L1 => "L1",
            OperatorKind::L2 => "L2",
            OperatorKind::HLinear => "H",
        })
    }
}

/// Symmetric pencil `(A, M)` of one operator on one sector.
#[derive(Debug, Clone)]
pub struct DiscreteOperator<T> {
    pub kind: OperatorKind,
    pub spec: ProfileSpec<T>,
    pub disc: Discretization<T>,
    pub a: StarMatrix<T>,
    /// Diagonal of the lumped mass matrix.
    pub mass: Vec<T>,
}

/// `tau = 50 h^2 omega + 10 exp(-sqrt(omega) L)`.
pub fn kernel_threshold<T: Real>(grid: &GridSpec<T>, omega: T) -> T {
    let h = grid.spacing();
    T::lit(50.0) * h * h * omega + T::lit(10.0) * (-omega.sqrt() * grid.length()).exp()
}

/// Assembles `L1`, `L2` or the bare vertex Hamiltonian around `spec` on `sector`.
pub fn assemble<T: Real>(
    kind: OperatorKind,
    spec: &ProfileSpec<T>,
    grid: &GridSpec<T>,
    sector: Sector,
) -> Result<DiscreteOperator<T>> {
    let spec = spec.validated()?;
    if !spec.fits_sector(sector) {
        return Err(Error::Sector(format!(
            "{} profile does not lie in sector {sector}",
            spec.family.name()
        )));
    }
    let disc = Discretization::new(spec.star_graph(sector)?, *grid);
    let reps = disc.representatives();
    let mu: T = spec.mu.sign();
    let coupling = match kind {
        OperatorKind::L1 => spec.p,
        OperatorKind::L2 => T::one(),
        OperatorKind::HLinear => T::zero(),
    };
    let pm1 = spec.p - T::one();
    let potential = |b: usize, i: usize| -> T {
        if kind == OperatorKind::HLinear {
            return T::zero();
        }
        let phi = spec.value(reps[b], grid.node(i));
        spec.omega - mu * coupling * phi.powf(pm1)
    };
    let a = disc.assemble(potential);
    let mass = disc.mass();
    Ok(DiscreteOperator { kind, spec, disc, a, mass })
}

impl<T: Real> DiscreteOperator<T> {
    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    pub fn grid(&self) -> &GridSpec<T> {
        self.disc.grid()
    }

    pub fn sector(&self) -> Sector {
        self.disc.sector()
    }

    pub fn kernel_threshold(&self) -> T {
        kernel_threshold(self.grid(), self.spec.omega)
    }

    pub fn count_below(&self, sigma: T) -> Result<usize> {
        count_below(&self.a, &self.mass, sigma)
    }

    /// `x^T A x`.
    pub fn form(&self, x: &[T]) -> Result<T> {
        Ok(dot(x, &self.a.matvec(x)?))
    }

    /// `x^T M x`.
    pub fn mass_form(&self, x: &[T]) -> T {
        weighted_dot(&self.mass, x, x)
    }

    /// Unknown vector of the (real part of the) sampled profile.
    pub fn profile_vector(&self) -> Result<Vec<T>> {
        let phi = crate::profiles::build_profile(&self.spec, self.grid())?;
        self.disc.restrict_real(&phi)
    }

    pub fn to_function(&self, x: &[T]) -> Result<GraphFunction<T>> {
        self.disc.extend_real(x)
    }

    /// `M`-cosine between two unknown vectors.
    pub fn cosine(&self, x: &[T], y: &[T]) -> T {
        let xy = weighted_dot(&self.mass, x, y);
        xy / (self.mass_form(x) * self.mass_form(y)).sqrt()
    }
}

/// Number of pencil eigenvalues below `-tau`; kernel-band eigenvalues are
/// not counted.
pub fn morse_index<T: Real>(op: &DiscreteOperator<T>) -> Result<usize> {
    op.count_below(-op.kernel_threshold())
}

/// Eigenvalues inside `(-tau, tau)` with `M`-orthonormal vectors.
#[derive(Debug, Clone)]
pub struct KernelData<T> {
    pub dim: usize,
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
    pub tau: T,
    /// Eigenvalues on both sides of `tau` within a factor 2: refine the grid.
    pub ambiguous: bool,
}

pub fn kernel_detect<T: Real>(op: &DiscreteOperator<T>) -> Result<KernelData<T>> {
    let tau = op.kernel_threshold();
    let half = tau * T::lit(0.5);
    let two = tau * T::lit(2.0);
    let c = |s: T| op.count_below(s);
    let (below_m2, below_m1, below_mh) = (c(-two)?, c(-tau)?, c(-half)?);
    let (below_h, below_1, below_2) = (c(half)?, c(tau)?, c(two)?);
    let dim = below_1 - below_m1;
    let inner = (below_mh - below_m1) + (below_1 - below_h);
    let outer = (below_m1 - below_m2) + (below_2 - below_1);
    let ambiguous = inner > 0 && outer > 0;
    let mut values = Vec::new();
    let mut vectors = Vec::new();
    if dim > 0 {
        let pairs = shift_invert(&op.a, &op.mass, -tau, dim, dim + 3, T::tolerance(1e-9), 500)?;
        let mut inside: Vec<EigenPair<T>> = pairs.into_iter().filter(|p| p.value.abs() < tau).collect();
        inside.sort_by(|p, q| p.value.abs().partial_cmp(&q.value.abs()).unwrap_or(std::cmp::Ordering::Equal));
        if inside.len() < dim {
            return Err(Error::Numerical(format!(
                "found {} of {dim} kernel vectors by subspace iteration",
                inside.len()
            )));
        }
        for p in inside.into_iter().take(dim) {
            values.push(p.value);
            vectors.push(p.vector);
        }
    }
    Ok(KernelData { dim, values, vectors, tau, ambiguous })
}

/// Reportable summary of one operator's spectrum near zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct SpectrumSummary<T> {
    pub operator: OperatorKind,
    pub sector: Sector,
    pub n_neg: usize,
    pub kernel_dim: usize,
    pub kernel_eigenvalues: Vec<T>,
    pub lowest: Vec<T>,
    pub tau: T,
    pub ambiguous: bool,
    pub length: T,
    pub intervals: usize,
    #[serde(skip)]
    pub kernel_vectors: Vec<Vec<T>>,
}

pub fn spectrum<T: Real>(op: &DiscreteOperator<T>, n_lowest: usize) -> Result<SpectrumSummary<T>> {
    let n_neg = morse_index(op)?;
    let kernel = kernel_detect(op)?;
    let lowest = lowest_eigenvalues(&op.a, &op.mass, n_lowest, T::tolerance(1e-12))?;
    Ok(SpectrumSummary {
        operator: op.kind,
        sector: op.sector(),
        n_neg,
        kernel_dim: kernel.dim,
        kernel_eigenvalues: kernel.values,
        lowest,
        tau: kernel.tau,
        ambiguous: kernel.ambiguous,
        length: op.grid().length(),
        intervals: op.grid().intervals(),
        kernel_vectors: kernel.vectors,
    })
}

/// Second-lowest eigenvalue of `L1` in a sector, for one coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint<T> {
    pub alpha: T,
    pub lambda2: T,
    pub tau: T,
}

/// Profile used by the perturbation scan: the `k`-bump state, or the
/// half-soliton at `alpha = 0`.
pub fn scan_profile<T: Real>(n: usize, k: usize, alpha: T, omega: T, p: T) -> Result<ProfileSpec<T>> {
    if alpha == T::zero() {
        ProfileSpec::kirchhoff(n, omega, p)
    } else {
        ProfileSpec::attractive(n, k, alpha, omega, p)
    }
}

/// `lambda_2(alpha)` of `L1` restricted to `Sector(k)` for every `alpha`,
/// by shift-invert iteration at `-tau`; the eigenvalue index is confirmed by
/// an inertia count.
pub fn perturbation_scan<T: Real>(
    n: usize,
    k: usize,
    omega: T,
    p: T,
    alphas: &[T],
    grid: &GridSpec<T>,
) -> Result<Vec<ScanPoint<T>>> {
    alphas
        .iter()
        .map(|&alpha| {
            let spec = scan_profile(n, k, alpha, omega, p)?;
            let op = assemble(OperatorKind::L1, &spec, grid, Sector::Split(k))?;
            let tau = op.kernel_threshold();
            let lambda2 = second_eigenvalue(&op)?;
            Ok(ScanPoint { alpha, lambda2, tau })
        })
        .collect()
}

fn second_eigenvalue<T: Real>(op: &DiscreteOperator<T>) -> Result<T> {
    let tau = op.kernel_threshold();
    let mut pairs = shift_invert(&op.a, &op.mass, -tau, 1, 4, T::tolerance(1e-10), 500)?;
    pairs.sort_by(|p, q| p.value.partial_cmp(&q.value).unwrap_or(std::cmp::Ordering::Equal));
    for p in &pairs {
        let delta = (p.residual * T::lit(10.0)).max(T::tolerance(1e-9) * (T::one() + p.value.abs()));
        if op.count_below(p.value - delta)? == 1 && op.count_below(p.value + delta)? == 2 {
            return Ok(p.value);
        }
    }
    Err(Error::Numerical("second eigenvalue not among the shift-invert Ritz values".into()))
}
