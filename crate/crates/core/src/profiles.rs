//! Closed-form stationary states on the star graph.
//!
//! All profiles are built from the sech/csch power soliton
//! `[(p+1) omega / 2 * sech^2(c x + s)]^(1/(p-1))` with `c = (p-1) sqrt(omega) / 2`;
//! families differ only in the per-edge shift `s` and in sech vs csch.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{norm_lp, vertex_trace, GraphFunction, GridSpec, Sector, StarGraph};
use crate::scalar::{ln_csch, ln_sech, Real};

/// Sign of the nonlinearity: `+1` attractive (focusing), `-1` repulsive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Nonlinearity {
    Focusing,
    Defocusing,
}

impl Nonlinearity {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Nonlinearity::Focusing => T::one(),
            Nonlinearity::Defocusing => -T::one(),
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Nonlinearity::Focusing => 1,
            Nonlinearity::Defocusing => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProfileFamily<T> {
    /// `k` bump-branch edges, `N - k` tail-branch edges, focusing, `alpha != 0`.
    AttractiveDelta { k: usize },
    /// `alpha = 0`, every edge carries the half-soliton.
    KirchhoffHalfSoliton,
    /// `alpha = 0`, `N` even, half the edges shifted by `+a`, half by `-a`.
    KirchhoffShifted { shift: T },
    /// Defocusing csch profile, `alpha < 0`, `omega < alpha^2 / N^2`.
    RepulsiveDelta,
}

impl<T> ProfileFamily<T> {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileFamily::AttractiveDelta { .. } => "attractive",
            ProfileFamily::KirchhoffHalfSoliton => "kirchhoff",
            ProfileFamily::KirchhoffShifted { .. } => "kirchhoff-shifted",
            ProfileFamily::RepulsiveDelta => "repulsive",
        }
    }
}

/// Selects one closed-form stationary state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec<T> {
    pub family: ProfileFamily<T>,
    pub n_edges: usize,
    pub alpha: T,
    pub omega: T,
    pub p: T,
    pub mu: Nonlinearity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Sech,
    Csch,
}

impl<T: Real> ProfileSpec<T> {
    pub fn attractive(n_edges: usize, k: usize, alpha: T, omega: T, p: T) -> Result<Self> {
        Self {
            family: ProfileFamily::AttractiveDelta { k },
            n_edges,
            alpha,
            omega,
            p,
            mu: Nonlinearity::Focusing,
        }
        .validated()
    }

    pub fn kirchhoff(n_edges: usize, omega: T, p: T) -> Result<Self> {
        Self {
            family: ProfileFamily::KirchhoffHalfSoliton,
            n_edges,
            alpha: T::zero(),
            omega,
            p,
            mu: Nonlinearity::Focusing,
        }
        .validated()
    }

    pub fn kirchhoff_shifted(n_edges: usize, shift: T, omega: T, p: T) -> Result<Self> {
        Self {
            family: ProfileFamily::KirchhoffShifted { shift },
            n_edges,
            alpha: T::zero(),
            omega,
            p,
            mu: Nonlinearity::Focusing,
        }
        .validated()
    }

    pub fn repulsive(n_edges: usize, alpha: T, omega: T, p: T) -> Result<Self> {
        Self {
            family: ProfileFamily::RepulsiveDelta,
            n_edges,
            alpha,
            omega,
            p,
            mu: Nonlinearity::Defocusing,
        }
        .validated()
    }

    /// Checks the existence region of the selected family.
    pub fn validated(self) -> Result<Self> {
        let n = self.n_edges;
        if n < 2 {
            return Err(Error::Parameter(format!("N = {n}, need N >= 2")));
        }
        if !(self.p > T::one()) || !self.p.is_finite() {
            return Err(Error::Parameter(format!("p = {}, need p > 1", self.p)));
        }
        if !(self.omega > T::zero()) || !self.omega.is_finite() {
            return Err(Error::Parameter(format!("omega = {}, need omega > 0", self.omega)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::Parameter("alpha must be finite".into()));
        }
        let nf = T::from_usize_lossy(n);
        match self.family {
            ProfileFamily::AttractiveDelta { k } => {
                if self.mu != Nonlinearity::Focusing {
                    return Err(Error::Existence("attractive family requires mu = +1".into()));
                }
                let kmax = (n - 1) / 2;
                if k > kmax {
                    return Err(Error::Existence(format!(
                        "k = {k} violates 0 <= k <= floor((N-1)/2) = {kmax}"
                    )));
                }
                if self.alpha == T::zero() {
                    return Err(Error::Existence(
                        "attractive delta family requires alpha != 0 (use the Kirchhoff family)".into(),
                    ));
                }
                let threshold = existence_threshold(n, k, self.alpha);
                if !(self.omega > threshold) {
                    return Err(Error::Existence(format!(
                        "omega > alpha^2/(N-2k)^2 violated: omega = {} <= {}",
                        self.omega, threshold
                    )));
                }
            }
            ProfileFamily::KirchhoffHalfSoliton => {
                if self.alpha != T::zero() || self.mu != Nonlinearity::Focusing {
                    return Err(Error::Existence("Kirchhoff family requires alpha = 0, mu = +1".into()));
                }
            }
            ProfileFamily::KirchhoffShifted { shift } => {
                if self.alpha != T::zero() || self.mu != Nonlinearity::Focusing {
                    return Err(Error::Existence("Kirchhoff family requires alpha = 0, mu = +1".into()));
                }
                if !n.is_multiple_of(2) {
                    return Err(Error::Existence(format!("shifted Kirchhoff family requires N even, got {n}")));
                }
                if !shift.is_finite() {
                    return Err(Error::Parameter("shift must be finite".into()));
                }
            }
            ProfileFamily::RepulsiveDelta => {
                if self.mu != Nonlinearity::Defocusing {
                    return Err(Error::Existence("repulsive family requires mu = -1".into()));
                }
                if !(self.alpha < T::zero()) {
                    return Err(Error::Existence(format!(
                        "repulsive profile requires alpha < 0, got alpha = {}",
                        self.alpha
                    )));
                }
                let bound = self.alpha * self.alpha / (nf * nf);
                if !(self.omega < bound) {
                    return Err(Error::Existence(format!(
                        "0 < omega < alpha^2/N^2 violated: omega = {} >= {}",
                        self.omega, bound
                    )));
                }
            }
        }
        Ok(self)
    }

    /// Sector in which the profile naturally lives.
    pub fn natural_sector(&self) -> Sector {
        match self.family {
            ProfileFamily::AttractiveDelta { k } if k >= 1 => Sector::Split(k),
            ProfileFamily::KirchhoffShifted { shift } if shift != T::zero() => Sector::Full,
            _ => Sector::Equal,
        }
    }

    /// True when every edge carries the same function.
    pub fn is_symmetric(&self) -> bool {
        self.natural_sector() == Sector::Equal
    }

    /// Whether the profile lies in `sector`.
    pub fn fits_sector(&self, sector: Sector) -> bool {
        match sector {
            Sector::Full => true,
            Sector::Equal => self.is_symmetric(),
            Sector::Split(k) => {
                self.is_symmetric() || self.natural_sector() == Sector::Split(k)
            }
        }
    }

    /// Bump-branch index `k` (zero for symmetric families).
    pub fn bump_count(&self) -> usize {
        match self.family {
            ProfileFamily::AttractiveDelta { k } => k,
            _ => 0,
        }
    }

    pub fn star_graph(&self, sector: Sector) -> Result<StarGraph<T>> {
        StarGraph::new(self.n_edges, self.alpha, sector)
    }

    fn rate(&self) -> T {
        (self.p - T::one()) * self.omega.sqrt() * T::lit(0.5)
    }

    /// Shift `s` and shape of edge `j`: the profile is a power of
    /// `sech^2(c x + s)` or `csch^2(c x + s)`.
    fn edge_shape(&self, j: usize) -> (Shape, T) {
        let n = T::from_usize_lossy(self.n_edges);
        match self.family {
            ProfileFamily::AttractiveDelta { k } => {
                let a = attractive_shift(self.n_edges, k, self.alpha, self.omega);
                (Shape::Sech, if j < k { -a } else { a })
            }
            ProfileFamily::KirchhoffHalfSoliton => (Shape::Sech, T::zero()),
            ProfileFamily::KirchhoffShifted { shift } => {
                let s = self.rate() * shift;
                (Shape::Sech, if j < self.n_edges / 2 { -s } else { s })
            }
            ProfileFamily::RepulsiveDelta => {
                // coth^{-1}(y) = tanh^{-1}(1/y)
                let y = -self.alpha / (n * self.omega.sqrt());
                (Shape::Csch, y.recip().atanh())
            }
        }
    }

    /// Profile value on edge `j` at `x >= 0`.
    pub fn value(&self, j: usize, x: T) -> T {
        let (shape, s) = self.edge_shape(j);
        let u = self.rate() * x + s;
        let two = T::lit(2.0);
        let ln_amp = ((self.p + T::one()) * self.omega / two).ln();
        let ln_h = match shape {
            Shape::Sech => ln_sech(u),
            Shape::Csch => ln_csch(u),
        };
        ((ln_amp + two * ln_h) / (self.p - T::one())).exp()
    }

    /// Derivative of the profile on edge `j` at `x >= 0`.
    pub fn derivative(&self, j: usize, x: T) -> T {
        let (shape, s) = self.edge_shape(j);
        let u = self.rate() * x + s;
        let log_slope = match shape {
            Shape::Sech => u.tanh(),
            Shape::Csch => u.tanh().recip(),
        };
        -self.omega.sqrt() * log_slope * self.value(j, x)
    }

    pub fn vertex_value(&self) -> T {
        self.value(0, T::zero())
    }
}

/// `alpha^2 / (N - 2k)^2`, the lower frequency bound of the attractive family.
pub fn existence_threshold<T: Real>(n_edges: usize, k: usize, alpha: T) -> T {
    let d = T::from_usize_lossy(n_edges) - T::lit(2.0) * T::from_usize_lossy(k);
    alpha * alpha / (d * d)
}

/// `a_k = tanh^{-1}(alpha / ((2k - N) sqrt(omega)))`.
pub fn attractive_shift<T: Real>(n_edges: usize, k: usize, alpha: T, omega: T) -> T {
    let d = T::lit(2.0) * T::from_usize_lossy(k) - T::from_usize_lossy(n_edges);
    (alpha / (d * omega.sqrt())).atanh()
}

/// Samples the closed-form profile on `grid`, tagged with its natural sector.
pub fn build_profile<T: Real>(spec: &ProfileSpec<T>, grid: &GridSpec<T>) -> Result<GraphFunction<T>> {
    let spec = spec.validated()?;
    let graph = spec.star_graph(spec.natural_sector())?;
    Ok(GraphFunction::from_real_fn(graph, *grid, spec.vertex_value(), |j, x| spec.value(j, x)))
}

#[inline]
fn signed_power<T: Real>(z: Complex<T>, exponent: T) -> Complex<T> {
    let r = z.norm();
    if r == T::zero() {
        z
    } else {
        z * r.powf(exponent)
    }
}

/// Max-norm defect of the stationary equation
/// `-phi'' + omega phi - mu |phi|^{p-1} phi = 0` on interior nodes `2..M-1` (node 1 is covered by the flux term),
/// combined with the vertex flux defect `|sum phi_j'(0) - alpha phi(0)|`.
pub fn stationary_residual<T: Real>(phi: &GraphFunction<T>, spec: &ProfileSpec<T>) -> Result<T> {
    if phi.n_edges() != spec.n_edges {
        return Err(Error::Dimension("profile and spec disagree on N".into()));
    }
    let grid = phi.grid();
    let m = grid.intervals();
    let h2 = grid.spacing() * grid.spacing();
    let mu: T = spec.mu.sign();
    let two = T::lit(2.0);
    let pm1 = spec.p - T::one();
    let mut worst = T::zero();
    for j in 0..phi.n_edges() {
        for i in 2..m {
            let (l, c, r) = (phi.at(j, i - 1), phi.at(j, i), phi.at(j, i + 1));
            let lap = (l - c * two + r) / h2;
            let defect = -lap + c * spec.omega - signed_power(c, pm1) * mu;
            worst = worst.max(defect.norm());
        }
    }
    let trace = vertex_trace(phi)?;
    let flux_defect = (trace.flux() - trace.value * spec.alpha).norm();
    Ok(worst.max(flux_defect))
}

/// Mass, energy and action of a graph function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Functionals<T> {
    pub mass: T,
    pub energy: T,
    pub action: T,
}

/// `sum_j int |u_j'|^2` for the piecewise-linear interpolant.
pub fn gradient_energy<T: Real>(u: &GraphFunction<T>) -> T {
    let h = u.grid().spacing();
    let m = u.grid().intervals();
    let mut acc = T::zero();
    for j in 0..u.n_edges() {
        for i in 0..m {
            acc += (u.at(j, i + 1) - u.at(j, i)).norm_sqr();
        }
    }
    acc / h
}

/// `mass = ||U||^2`, `E = ||U'||^2/2 - mu/(p+1) ||U||_{p+1}^{p+1} + alpha/2 |u(0)|^2`,
/// `S = E + omega/2 * mass`.
pub fn functionals<T: Real>(u: &GraphFunction<T>, spec: &ProfileSpec<T>) -> Result<Functionals<T>> {
    if u.n_edges() != spec.n_edges {
        return Err(Error::Dimension("function and spec disagree on N".into()));
    }
    let half = T::lit(0.5);
    let mass = norm_lp(u, T::lit(2.0))?.powi(2);
    let pp1 = spec.p + T::one();
    let potential = norm_lp(u, pp1)?.powf(pp1);
    let mu: T = spec.mu.sign();
    let energy = half * gradient_energy(u) - mu / pp1 * potential
        + half * spec.alpha * u.vertex().norm_sqr();
    let action = energy + half * spec.omega * mass;
    Ok(Functionals { mass, energy, action })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fine_grid(omega: f64) -> GridSpec<f64> {
        GridSpec::new(GridSpec::<f64>::default_length(omega), 4000).unwrap()
    }

    #[test]
    fn attractive_example_values() {
        let spec = ProfileSpec::attractive(3, 1, -1.0, 4.0, 3.0).unwrap();
        assert!((spec.vertex_value() - 6f64.sqrt()).abs() < 1e-14);
        let a1 = 0.5f64.atanh();
        assert!((a1 - 0.549_306_144_334_054_8).abs() < 1e-15);
        let x_peak = a1 / 2.0;
        assert!((x_peak - 0.274_653_072_167_027_4).abs() < 1e-15);
        // independent scalar evaluation of sqrt(8) sech(2x - a1)
        let oracle = |x: f64| 8f64.sqrt() / (2.0 * x - a1).cosh();
        for &x in &[0.0, 0.1, x_peak, 1.0, 3.0] {
            assert!((spec.value(0, x) - oracle(x)).abs() < 1e-13);
        }
        assert!((spec.value(0, x_peak) - 8f64.sqrt()).abs() < 1e-14);
        // tail edges decrease monotonically
        assert!(spec.value(1, 0.1) < spec.value(1, 0.0));
    }

    #[test]
    fn kirchhoff_vertex_and_monotonicity() {
        let spec = ProfileSpec::kirchhoff(3, 1.0, 3.0).unwrap();
        assert!((spec.vertex_value() - 2f64.sqrt()).abs() < 1e-14);
        let grid = GridSpec::new(20.0, 200).unwrap();
        let phi = build_profile(&spec, &grid).unwrap();
        let e = phi.edge(0);
        assert!(e.windows(2).all(|w| w[1].re < w[0].re));
    }

    #[test]
    fn repulsive_vertex_value() {
        let spec = ProfileSpec::repulsive(3, -6.0, 1.0, 3.0).unwrap();
        assert!((spec.vertex_value() - 6f64.sqrt()).abs() < 1e-13);
        let a = 3f64.ln() / 2.0;
        let oracle = |x: f64| 2f64.sqrt() / (x + a).sinh();
        for &x in &[0.0, 0.5, 2.0] {
            assert!((spec.value(2, x) - oracle(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn existence_errors_name_the_inequality() {
        let err = ProfileSpec::attractive(3, 1, -1.0, 1.0, 3.0).unwrap_err();
        assert!(matches!(&err, Error::Existence(m) if m.contains("alpha^2/(N-2k)^2")));
        let err = ProfileSpec::repulsive(3, 1.0, 0.01, 3.0).unwrap_err();
        assert!(matches!(&err, Error::Existence(m) if m.contains("alpha < 0")));
        let err = ProfileSpec::repulsive(3, -3.0, 1.0, 3.0).unwrap_err();
        assert!(matches!(&err, Error::Existence(m) if m.contains("alpha^2/N^2")));
        assert!(ProfileSpec::kirchhoff_shifted(3, 0.5, 1.0, 3.0).is_err());
        assert!(ProfileSpec::attractive(5, 3, 1.0, 10.0, 3.0).is_err());
    }

    #[test]
    fn existence_boundary_is_sharp() {
        let (n, k, alpha, p) = (5, 1, -1.5, 3.0);
        let thr = existence_threshold(n, k, alpha);
        assert!(ProfileSpec::attractive(n, k, alpha, thr, p).is_err());
        assert!(ProfileSpec::attractive(n, k, alpha, thr * (1.0 + 1e-6), p).is_ok());
        let bound = 4.0 / 9.0;
        assert!(ProfileSpec::repulsive(3, -2.0, bound, p).is_err());
        assert!(ProfileSpec::repulsive(3, -2.0, bound * (1.0 - 1e-6), p).is_ok());
    }

    #[test]
    fn attractive_profile_satisfies_vertex_flux() {
        let spec = ProfileSpec::attractive(3, 1, -1.0, 4.0, 3.0).unwrap();
        let flux: f64 = (0..3).map(|j| spec.derivative(j, 0.0)).sum();
        assert!((flux - spec.alpha * spec.vertex_value()).abs() < 1e-13);
        let grid = fine_grid(4.0);
        let phi = build_profile(&spec, &grid).unwrap();
        let t = vertex_trace(&phi).unwrap();
        let sum = t.flux().re;
        assert!((sum - (-(6f64.sqrt()))).abs() < 1e-3, "{sum}");
    }

    #[test]
    fn residual_of_exact_profile_is_second_order() {
        let spec = ProfileSpec::attractive(3, 1, -1.0, 4.0, 3.0).unwrap();
        let g = GridSpec::new(20.0, 1000).unwrap();
        let r1 = stationary_residual(&build_profile(&spec, &g).unwrap(), &spec).unwrap();
        let r2 = stationary_residual(&build_profile(&spec, &g.refined()).unwrap(), &spec).unwrap();
        assert!(r1 / r2 >= 3.5, "{r1} {r2}");
    }

    #[test]
    fn scaled_profile_has_large_residual() {
        let spec = ProfileSpec::attractive(3, 1, -1.0, 4.0, 3.0).unwrap();
        let g = fine_grid(4.0);
        let phi = build_profile(&spec, &g).unwrap().scale(Complex::new(1.1, 0.0));
        assert!(stationary_residual(&phi, &spec).unwrap() >= 0.01);
        let zero = GraphFunction::zeros(*phi.graph(), g);
        assert_eq!(stationary_residual(&zero, &spec).unwrap(), 0.0);
    }

    #[test]
    fn mass_matches_closed_form() {
        let spec = ProfileSpec::attractive(3, 1, -1.0, 4.0, 3.0).unwrap();
        let f = functionals(&build_profile(&spec, &fine_grid(4.0)).unwrap(), &spec).unwrap();
        assert!((f.mass - 10.0).abs() < 1e-4, "{}", f.mass);
        let zero = GraphFunction::zeros(spec.star_graph(Sector::Full).unwrap(), fine_grid(4.0));
        assert_eq!(functionals(&zero, &spec).unwrap().energy, 0.0);
    }

    #[test]
    fn action_grows_with_bump_count() {
        let grid = fine_grid(2.0);
        let s0 = ProfileSpec::attractive(5, 0, -1.0, 2.0, 3.0).unwrap();
        let s1 = ProfileSpec::attractive(5, 1, -1.0, 2.0, 3.0).unwrap();
        let s2 = ProfileSpec::attractive(5, 2, -1.0, 2.0, 3.0).unwrap();
        let a = |s: &ProfileSpec<f64>| functionals(&build_profile(s, &grid).unwrap(), s).unwrap().action;
        assert!(a(&s0) < a(&s1));
        assert!(a(&s1) < a(&s2));
    }

    #[test]
    fn small_alpha_approaches_half_soliton() {
        let spec = ProfileSpec::attractive(3, 1, 1e-4, 1.0, 3.0).unwrap();
        let kirch = ProfileSpec::kirchhoff(3, 1.0, 3.0).unwrap();
        let mut worst = 0.0f64;
        for j in 0..3 {
            for i in 0..200 {
                let x = i as f64 * 0.05;
                worst = worst.max((spec.value(j, x) - kirch.value(j, x)).abs());
            }
        }
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn profile_is_symmetric_within_branches() {
        let spec = ProfileSpec::attractive(5, 2, 0.7, 1.0, 2.5).unwrap();
        let phi = build_profile(&spec, &GridSpec::new(20.0, 400).unwrap()).unwrap();
        assert_eq!(phi.edge(0), phi.edge(1));
        assert_eq!(phi.edge(2), phi.edge(4));
        assert_eq!(phi.sector_defect(), 0.0);
    }

    #[test]
    fn noninteger_power_is_finite() {
        let spec = ProfileSpec::attractive(4, 1, 0.5_f64, 1.0, 2.7).unwrap();
        let phi = build_profile(&spec, &GridSpec::new(40.0, 400).unwrap()).unwrap();
        assert!(phi.edge(3).iter().all(|z| z.re.is_finite() && z.re > 0.0));
    }
}
