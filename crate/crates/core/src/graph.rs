//! Star-graph geometry, sampled graph functions and symmetry sectors.
//!
//! A star graph is `N` half-lines glued at a single vertex. Every edge is
//! truncated to `[0, L]` and sampled on the same uniform grid. A
//! [`GraphFunction`] stores the vertex sample once, so continuity at the
//! vertex holds by construction.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Symmetry sector in which a problem is posed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    /// No symmetry constraint.
    Full,
    /// First `k` edges identical and remaining `N - k` edges identical.
    Split(usize),
    /// All edges identical.
    Equal,
}

impl Sector {
    /// Multiplicities of the distinct components, in edge order.
    pub fn multiplicities(&self, n_edges: usize) -> Vec<usize> {
        match *self {
            Sector::Full => vec![1; n_edges],
            Sector::Split(k) => vec![k, n_edges - k],
            Sector::Equal => vec![n_edges],
        }
    }

    /// Index of the reduced component that represents `edge`.
    pub fn component_of(&self, edge: usize) -> usize {
        match *self {
            Sector::Full => edge,
            Sector::Split(k) => usize::from(edge >= k),
            Sector::Equal => 0,
        }
    }

    pub fn validate(&self, n_edges: usize) -> Result<()> {
        if let Sector::Split(k) = *self {
            let kmax = (n_edges - 1) / 2;
            if k < 1 || k > kmax {
                return Err(Error::Sector(format!(
                    "Split({k}) needs 1 <= k <= floor((N-1)/2) = {kmax}"
                )));
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for Sector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sector::Full => write!(f, "full"),
            Sector::Split(k) => write!(f, "split({k})"),
            Sector::Equal => write!(f, "equal"),
        }
    }
}

/// Edge count, vertex strength and symmetry sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarGraph<T> {
    n_edges: usize,
    alpha: T,
    sector: Sector,
}

impl<T: Real> StarGraph<T> {
    pub fn new(n_edges: usize, alpha: T, sector: Sector) -> Result<Self> {
        if n_edges < 2 {
            return Err(Error::Parameter(format!("N = {n_edges}, need N >= 2")));
        }
        if !alpha.is_finite() {
            return Err(Error::Parameter("alpha must be finite".into()));
        }
        sector.validate(n_edges)?;
        Ok(Self { n_edges, alpha, sector })
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn with_sector(&self, sector: Sector) -> Result<Self> {
        Self::new(self.n_edges, self.alpha, sector)
    }
}

/// Uniform grid on `[0, L]` with `M` intervals; node 0 is the vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    length: T,
    intervals: usize,
}

impl<T: Real> GridSpec<T> {
    pub const DEFAULT_INTERVALS: usize = 4000;

    pub fn new(length: T, intervals: usize) -> Result<Self> {
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::Parameter(format!("truncation length L = {length} must be > 0")));
        }
        if intervals < 2 {
            return Err(Error::Parameter(format!("M = {intervals}, need M >= 2")));
        }
        Ok(Self { length, intervals })
    }

    /// Default grid for frequency `omega`: `L = max(40/sqrt(omega), 20)`, `M = 4000`.
    pub fn for_omega(omega: T) -> Result<Self> {
        Self::new(Self::default_length(omega), Self::DEFAULT_INTERVALS)
    }

    pub fn default_length(omega: T) -> T {
        (T::lit(40.0) / omega.sqrt()).max(T::lit(20.0))
    }

    pub fn length(&self) -> T {
        self.length
    }

    /// Number of intervals `M`; samples per edge are `M + 1`.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn spacing(&self) -> T {
        self.length / T::from_usize_lossy(self.intervals)
    }

    pub fn node(&self, i: usize) -> T {
        T::from_usize_lossy(i) * self.spacing()
    }

    /// Trapezoid weight of node `i` on one edge.
    pub fn weight(&self, i: usize) -> T {
        let h = self.spacing();
        if i == 0 || i == self.intervals {
            h * T::lit(0.5)
        } else {
            h
        }
    }

    pub fn refined(&self) -> Self {
        Self { length: self.length, intervals: 2 * self.intervals }
    }

    pub fn with_intervals(&self, intervals: usize) -> Result<Self> {
        Self::new(self.length, intervals)
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.intervals == other.intervals && self.length == other.length
    }
}

/// Complex samples of an `N`-tuple of half-line functions.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFunction<T> {
    graph: StarGraph<T>,
    grid: GridSpec<T>,
    vertex: Complex<T>,
    /// `edges[j][i - 1]` is the sample at node `i >= 1` of edge `j`.
    edges: Vec<Vec<Complex<T>>>,
}

impl<T: Real> GraphFunction<T> {
    pub fn zeros(graph: StarGraph<T>, grid: GridSpec<T>) -> Self {
        let m = grid.intervals();
        Self {
            graph,
            grid,
            vertex: Complex::new(T::zero(), T::zero()),
            edges: vec![vec![Complex::new(T::zero(), T::zero()); m]; graph.n_edges()],
        }
    }

    /// Samples `f(edge, x)` for `x > 0`; the vertex takes `vertex`.
    pub fn from_fn<F>(graph: StarGraph<T>, grid: GridSpec<T>, vertex: Complex<T>, f: F) -> Self
    where
        F: Fn(usize, T) -> Complex<T>,
    {
        let m = grid.intervals();
        let edges = (0..graph.n_edges())
            .map(|j| (1..=m).map(|i| f(j, grid.node(i))).collect())
            .collect();
        Self { graph, grid, vertex, edges }
    }

    /// Real-valued variant of [`GraphFunction::from_fn`].
    pub fn from_real_fn<F>(graph: StarGraph<T>, grid: GridSpec<T>, vertex: T, f: F) -> Self
    where
        F: Fn(usize, T) -> T,
    {
        Self::from_fn(graph, grid, Complex::new(vertex, T::zero()), |j, x| {
            Complex::new(f(j, x), T::zero())
        })
    }

    /// Builds from per-edge sample vectors of length `M + 1`. The vertex
    /// samples must agree to `tol` (absolute); edge 0 supplies the stored value.
    pub fn from_edge_samples(
        graph: StarGraph<T>,
        grid: GridSpec<T>,
        samples: Vec<Vec<Complex<T>>>,
        tol: T,
    ) -> Result<Self> {
        let m = grid.intervals();
        if samples.len() != graph.n_edges() || samples.iter().any(|s| s.len() != m + 1) {
            return Err(Error::Dimension(format!(
                "expected {} edges of {} samples",
                graph.n_edges(),
                m + 1
            )));
        }
        let vertex = samples[0][0];
        if let Some(j) = samples.iter().position(|s| (s[0] - vertex).norm() > tol) {
            return Err(Error::Parameter(format!("edge {j} is discontinuous at the vertex")));
        }
        let edges = samples.into_iter().map(|s| s[1..].to_vec()).collect();
        Ok(Self { graph, grid, vertex, edges })
    }

    pub fn graph(&self) -> &StarGraph<T> {
        &self.graph
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn n_edges(&self) -> usize {
        self.graph.n_edges()
    }

    pub fn vertex(&self) -> Complex<T> {
        self.vertex
    }

    /// Sample at node `i` of edge `j` (node 0 is the shared vertex).
    #[inline]
    pub fn at(&self, j: usize, i: usize) -> Complex<T> {
        if i == 0 {
            self.vertex
        } else {
            self.edges[j][i - 1]
        }
    }

    /// Samples of edge `j` excluding the vertex (nodes `1..=M`).
    pub fn edge_tail(&self, j: usize) -> &[Complex<T>] {
        &self.edges[j]
    }

    /// Samples of edge `j` including the vertex (nodes `0..=M`).
    pub fn edge(&self, j: usize) -> Vec<Complex<T>> {
        std::iter::once(self.vertex).chain(self.edges[j].iter().copied()).collect()
    }

    pub fn set_vertex(&mut self, value: Complex<T>) {
        self.vertex = value;
    }

    pub fn set(&mut self, j: usize, i: usize, value: Complex<T>) {
        if i == 0 {
            self.vertex = value;
        } else {
            self.edges[j][i - 1] = value;
        }
    }

    pub fn map<F: Fn(Complex<T>) -> Complex<T>>(&self, f: F) -> Self {
        Self {
            graph: self.graph,
            grid: self.grid,
            vertex: f(self.vertex),
            edges: self.edges.iter().map(|e| e.iter().map(|&z| f(z)).collect()).collect(),
        }
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        self.map(|z| z * factor)
    }

    /// `self + factor * other` on a matching grid.
    pub fn axpy(&self, factor: Complex<T>, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.vertex = self.vertex + factor * other.vertex;
        for (e, o) in out.edges.iter_mut().zip(&other.edges) {
            for (a, &b) in e.iter_mut().zip(o) {
                *a += factor * b;
            }
        }
        Ok(out)
    }

    pub fn sup_norm(&self) -> T {
        self.edges
            .iter()
            .flatten()
            .fold(self.vertex.norm(), |acc, z| acc.max(z.norm()))
    }

    /// Maximum imaginary magnitude; zero for real-valued functions.
    pub fn max_imag(&self) -> T {
        self.edges
            .iter()
            .flatten()
            .fold(self.vertex.im.abs(), |acc, z| acc.max(z.im.abs()))
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n_edges() != other.n_edges() {
            return Err(Error::Dimension(format!(
                "edge counts differ: {} vs {}",
                self.n_edges(),
                other.n_edges()
            )));
        }
        if !self.grid.same_as(&other.grid) {
            return Err(Error::Dimension("grids differ".into()));
        }
        Ok(())
    }

    /// Largest deviation from the declared sector's edge identities.
    pub fn sector_defect(&self) -> T {
        let n = self.n_edges();
        let groups: Vec<(usize, usize)> = match self.graph.sector() {
            Sector::Full => return T::zero(),
            Sector::Split(k) => vec![(0, k), (k, n)],
            Sector::Equal => vec![(0, n)],
        };
        let mut defect = T::zero();
        for (lo, hi) in groups {
            for j in lo + 1..hi {
                for (a, b) in self.edges[lo].iter().zip(&self.edges[j]) {
                    defect = defect.max((*a - *b).norm());
                }
            }
        }
        defect
    }
}

/// Trapezoid approximation of `sum_j int_0^L u_j conj(v_j) dx`.
pub fn inner_product<T: Real>(u: &GraphFunction<T>, v: &GraphFunction<T>) -> Result<Complex<T>> {
    u.check_compatible(v)?;
    let grid = u.grid();
    let m = grid.intervals();
    let n = T::from_usize_lossy(u.n_edges());
    let mut acc = u.vertex * v.vertex.conj() * grid.weight(0) * n;
    for j in 0..u.n_edges() {
        let mut edge_acc = Complex::new(T::zero(), T::zero());
        for i in 1..=m {
            edge_acc += u.edges[j][i - 1] * v.edges[j][i - 1].conj() * grid.weight(i);
        }
        acc += edge_acc;
    }
    Ok(acc)
}

/// `(sum_j int |v_j|^q)^(1/q)` by the trapezoid rule.
pub fn norm_lp<T: Real>(v: &GraphFunction<T>, q: T) -> Result<T> {
    if !(q >= T::one()) {
        return Err(Error::Parameter(format!("L^q norm needs q >= 1, got {q}")));
    }
    let grid = v.grid();
    let n = T::from_usize_lossy(v.n_edges());
    let mut acc = v.vertex.norm().powf(q) * grid.weight(0) * n;
    for edge in &v.edges {
        for (i, z) in edge.iter().enumerate() {
            acc += z.norm().powf(q) * grid.weight(i + 1);
        }
    }
    Ok(acc.powf(T::one() / q))
}

/// Sector representative: one component per distinct edge class, with
/// multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorReduction<T> {
    pub sector: Sector,
    pub grid: GridSpec<T>,
    /// `(multiplicity, samples at nodes 0..=M)`.
    pub components: Vec<(usize, Vec<Complex<T>>)>,
}

impl<T: Real> SectorReduction<T> {
    pub fn total_multiplicity(&self) -> usize {
        self.components.iter().map(|(m, _)| m).sum()
    }

    /// Weighted inner product `sum_i m_i int u_i conj(v_i)`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.sector != other.sector || !self.grid.same_as(&other.grid) {
            return Err(Error::Dimension("reductions live in different sectors or grids".into()));
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for ((m, u), (_, v)) in self.components.iter().zip(&other.components) {
            let mut part = Complex::new(T::zero(), T::zero());
            for (i, (a, b)) in u.iter().zip(v).enumerate() {
                part += *a * b.conj() * self.grid.weight(i);
            }
            acc += part * T::from_usize_lossy(*m);
        }
        Ok(acc)
    }

    pub fn norm(&self) -> T {
        self.inner(self).map(|z| z.re.max(T::zero()).sqrt()).unwrap_or_else(|_| T::nan())
    }

    /// Expands back to a full graph function.
    pub fn expand(&self, graph: StarGraph<T>) -> Result<GraphFunction<T>> {
        if self.total_multiplicity() != graph.n_edges() {
            return Err(Error::Dimension("multiplicities do not sum to N".into()));
        }
        let samples = (0..graph.n_edges())
            .map(|j| self.components[self.sector.component_of(j)].1.clone())
            .collect();
        GraphFunction::from_edge_samples(graph, self.grid, samples, T::zero())
    }
}

/// Reduces `v` to its declared sector, checking edge identities to 1e-12.
pub fn reduce_to_sector<T: Real>(v: &GraphFunction<T>) -> Result<SectorReduction<T>> {
    let sector = v.graph().sector();
    let tol = T::tolerance(1e-12) * v.sup_norm().max(T::one());
    let defect = v.sector_defect();
    if defect > tol {
        return Err(Error::Sector(format!(
            "function deviates from sector {sector} by {defect:e}"
        )));
    }
    let n = v.n_edges();
    let reps: Vec<usize> = match sector {
        Sector::Full => (0..n).collect(),
        Sector::Split(k) => vec![0, k],
        Sector::Equal => vec![0],
    };
    let components = sector
        .multiplicities(n)
        .into_iter()
        .zip(reps)
        .map(|(m, j)| (m, v.edge(j)))
        .collect();
    Ok(SectorReduction { sector, grid: *v.grid(), components })
}

/// Vertex value and one-sided derivatives at the vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexTrace<T> {
    pub value: Complex<T>,
    pub derivatives: Vec<Complex<T>>,
}

impl<T: Real> VertexTrace<T> {
    pub fn flux(&self) -> Complex<T> {
        self.derivatives.iter().fold(Complex::new(T::zero(), T::zero()), |a, &b| a + b)
    }
}

/// Second-order one-sided derivative `(-3 v0 + 4 v1 - v2) / (2h)` on every edge.
pub fn vertex_trace<T: Real>(v: &GraphFunction<T>) -> Result<VertexTrace<T>> {
    if v.grid().intervals() < 3 {
        return Err(Error::Dimension("vertex trace needs M >= 3".into()));
    }
    let h = v.grid().spacing();
    let (three, four, two) = (T::lit(3.0), T::lit(4.0), T::lit(2.0));
    let derivatives = (0..v.n_edges())
        .map(|j| (v.at(j, 0) * (-three) + v.at(j, 1) * four - v.at(j, 2)) / (two * h))
        .collect();
    Ok(VertexTrace { value: v.vertex(), derivatives })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, sector: Sector) -> StarGraph<f64> {
        StarGraph::new(n, -1.0, sector).unwrap()
    }

    #[test]
    fn sector_bounds_are_enforced() {
        assert!(StarGraph::new(3, 1.0, Sector::Split(1)).is_ok());
        assert!(StarGraph::new(3, 1.0, Sector::Split(2)).is_err());
        assert!(StarGraph::new(4, 1.0, Sector::Split(2)).is_err());
        assert!(StarGraph::new(5, 1.0, Sector::Split(0)).is_err());
        assert!(StarGraph::new(1, 1.0, Sector::Full).is_err());
    }

    #[test]
    fn constant_function_norm() {
        let grid = GridSpec::new(10.0, 100).unwrap();
        let one = GraphFunction::from_real_fn(graph(3, Sector::Full), grid, 1.0, |_, _| 1.0);
        let n2 = norm_lp(&one, 2.0).unwrap();
        assert!((n2 - 30f64.sqrt()).abs() < 1e-12);
        let ip = inner_product(&one, &one).unwrap();
        assert!((ip.re.sqrt() - n2).abs() < 1e-12);
    }

    #[test]
    fn zero_inner_product() {
        let grid = GridSpec::new(5.0, 50).unwrap();
        let g = graph(4, Sector::Full);
        let zero = GraphFunction::zeros(g, grid);
        let v = GraphFunction::from_real_fn(g, grid, 1.0, |j, x| (x + j as f64).cos());
        assert_eq!(inner_product(&zero, &v).unwrap(), Complex::new(0.0, 0.0));
    }

    #[test]
    fn norm_rejects_small_exponent() {
        let grid = GridSpec::new(5.0, 50).unwrap();
        let v = GraphFunction::<f64>::zeros(graph(3, Sector::Full), grid);
        assert!(matches!(norm_lp(&v, 0.5), Err(Error::Parameter(_))));
    }

    #[test]
    fn grid_mismatch_is_a_dimension_error() {
        let g = graph(3, Sector::Full);
        let a = GraphFunction::<f64>::zeros(g, GridSpec::new(5.0, 50).unwrap());
        let b = GraphFunction::<f64>::zeros(g, GridSpec::new(5.0, 60).unwrap());
        assert!(matches!(inner_product(&a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn reduce_split_and_equal() {
        let grid = GridSpec::new(4.0, 40).unwrap();
        let v = GraphFunction::from_real_fn(graph(3, Sector::Split(1)), grid, 1.0, |j, x| {
            if j == 0 { 1.0 + x } else { 1.0 - x * x }
        });
        let r = reduce_to_sector(&v).unwrap();
        assert_eq!(r.components.len(), 2);
        assert_eq!(r.components[0].0, 1);
        assert_eq!(r.components[1].0, 2);
        assert_eq!(r.components[0].1[3].re, 1.0 + grid.node(3));

        let e = GraphFunction::from_real_fn(graph(5, Sector::Equal), grid, 2.0, |_, x| 2.0 - x);
        let r = reduce_to_sector(&e).unwrap();
        assert_eq!(r.components.len(), 1);
        assert_eq!(r.components[0].0, 5);
        assert_eq!(r.expand(*e.graph()).unwrap(), e);
    }

    #[test]
    fn sector_violation_is_reported() {
        let grid = GridSpec::new(4.0, 40).unwrap();
        let v = GraphFunction::from_real_fn(graph(3, Sector::Split(1)), grid, 1.0, |j, x| {
            1.0 + x * j as f64
        });
        assert!(matches!(reduce_to_sector(&v), Err(Error::Sector(_))));
    }

    #[test]
    fn vertex_trace_exact_on_quadratics() {
        let grid = GridSpec::new(2.0, 20).unwrap();
        let g = graph(3, Sector::Full);
        let lin = GraphFunction::from_real_fn(g, grid, 0.0, |_, x| x);
        let t = vertex_trace(&lin).unwrap();
        assert_eq!(t.value.re, 0.0);
        for d in &t.derivatives {
            assert!((d.re - 1.0).abs() < 1e-13);
        }
        let quad = GraphFunction::from_real_fn(g, grid, 0.0, |_, x| x * x);
        for d in vertex_trace(&quad).unwrap().derivatives {
            assert!(d.re.abs() < 1e-13);
        }
        let short = GraphFunction::<f64>::zeros(g, GridSpec::new(1.0, 2).unwrap());
        assert!(vertex_trace(&short).is_err());
    }

    #[test]
    fn from_edge_samples_checks_continuity() {
        let grid = GridSpec::new(1.0, 4).unwrap();
        let g = graph(2, Sector::Full);
        let c = |x: f64| Complex::new(x, 0.0);
        let ok = vec![vec![c(1.0), c(2.0), c(3.0), c(4.0), c(5.0)]; 2];
        assert!(GraphFunction::from_edge_samples(g, grid, ok, 0.0).is_ok());
        let bad = vec![vec![c(1.0); 5], vec![c(2.0); 5]];
        assert!(GraphFunction::from_edge_samples(g, grid, bad, 1e-9).is_err());
    }
}
