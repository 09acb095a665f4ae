//! Mass of the attractive family as a function of the frequency, the slope
//! `J(omega) = d/d omega ||Phi_k||^2`, its sign and the critical frequencies
//! where it vanishes.
//!
//! Both the mass and the slope reduce to the incomplete integral
//! `F(t0) = int_{t0}^1 (1 - t^2)^beta dt`, `beta = (3 - p)/(p - 1)`, which is
//! evaluated in the variable `t = tanh y` as `int_{atanh t0}^inf sech^q y dy`,
//! `q = 4/(p - 1)`. That form has no endpoint singularity for any `p > 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::existence_threshold;
use crate::quad::integrate;
use crate::scalar::Real;

/// Half-width of the band `|J~| <= DEGENERATE_BAND` treated as a zero slope.
pub const DEGENERATE_BAND: f64 = 1e-10;

/// Sign indicator `p(omega)` of the slope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum POmega {
    Zero,
    One,
    Degenerate,
}

impl POmega {
    pub fn as_option(self) -> Option<u8> {
        match self {
            POmega::Zero => Some(0),
            POmega::One => Some(1),
            POmega::Degenerate => None,
        }
    }
}

impl std::fmt::Display for POmega {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            POmega::Zero => f.write_str("0"),
            POmega::One => f.write_str("1"),
            POmega::Degenerate => f.write_str("degenerate"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeResult<T> {
    pub omega: T,
    pub j: T,
    pub j_tilde: T,
    pub c: T,
    pub p_omega: POmega,
}

/// Parameters of one branch `Phi_k` of the attractive family. `alpha = 0`,
/// `k = 0` is the Kirchhoff half-soliton.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Branch<T> {
    n: usize,
    k: usize,
    alpha: T,
    p: T,
}

impl<T: Real> Branch<T> {
    fn new(n: usize, k: usize, alpha: T, p: T) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter(format!("N = {n}, need N >= 2")));
        }
        if 2 * k >= n {
            return Err(Error::Parameter(format!("k = {k} must satisfy 2k < N = {n}")));
        }
        if !(p > T::one()) || !p.is_finite() {
            return Err(Error::Parameter(format!("p = {p} must be > 1")));
        }
        if !alpha.is_finite() {
            return Err(Error::Parameter("alpha must be finite".into()));
        }
        Ok(Self { n, k, alpha, p })
    }

    fn threshold(&self) -> T {
        existence_threshold(self.n, self.k, self.alpha)
    }

    fn check_omega(&self, omega: T) -> Result<()> {
        let thr = self.threshold();
        if !(omega > thr) || !omega.is_finite() || !(omega > T::zero()) {
            return Err(Error::Existence(format!(
                "omega > alpha^2/(N-2k)^2 violated: omega = {omega} <= {thr}"
            )));
        }
        Ok(())
    }

    fn beta(&self) -> T {
        (T::lit(3.0) - self.p) / (self.p - T::one())
    }

    /// `(t_bump, t_tail)` lower limits of the incomplete integrals.
    fn limits(&self, omega: T) -> (T, T) {
        let d = T::from_usize_lossy(self.n) - T::lit(2.0) * T::from_usize_lossy(self.k);
        let t = self.alpha / (d * omega.sqrt());
        (t, -t)
    }

    /// `k F(t_bump) + (N - k) F(t_tail)`.
    fn weighted_integral(&self, omega: T) -> Result<T> {
        let (tb, tt) = self.limits(omega);
        let kk = T::from_usize_lossy(self.k);
        let rest = T::from_usize_lossy(self.n - self.k);
        let bump = if self.k > 0 { incomplete_integral(tb, self.p)? } else { T::zero() };
        Ok(kk * bump + rest * incomplete_integral(tt, self.p)?)
    }

    fn j_tilde(&self, omega: T) -> Result<T> {
        self.check_omega(omega)?;
        let five = T::lit(5.0);
        let pm1 = self.p - T::one();
        let main = if self.p == five {
            T::zero()
        } else {
            (five - self.p) / pm1 * self.weighted_integral(omega)?
        };
        let boundary = if self.alpha == T::zero() {
            T::zero()
        } else {
            let ratio = self.threshold() / omega;
            self.alpha / omega.sqrt() * (T::one() - ratio).powf(self.beta())
        };
        Ok(main - boundary)
    }
}

/// `C = ((p+1)/2)^{2/(p-1)} / (p-1)`.
pub fn slope_constant<T: Real>(p: T) -> T {
    let pm1 = p - T::one();
    ((p + T::one()) * T::lit(0.5)).powf(T::lit(2.0) / pm1) / pm1
}

/// `F(t0) = int_{t0}^1 (1 - t^2)^{(3-p)/(p-1)} dt` for `-1 < t0 < 1`.
pub fn incomplete_integral<T: Real>(t0: T, p: T) -> Result<T> {
    if !(t0 > -T::one() && t0 < T::one()) {
        return Err(Error::Parameter(format!("lower limit {t0} outside (-1, 1)")));
    }
    if !(p > T::one()) {
        return Err(Error::Parameter(format!("p = {p} must be > 1")));
    }
    let q = T::lit(4.0) / (p - T::one());
    let y0 = t0.atanh();
    let cut = y0.max(T::zero()) + T::lit(20.0);
    let tol = T::tolerance(1e-14);
    let sech_q = |y: T| (q * crate::scalar::ln_sech(y)).exp();
    let body = integrate(sech_q, y0, cut, tol)?;
    Ok(body + sech_power_tail(q, cut))
}

/// `int_Y^inf sech^q y dy` for large `Y` from the series
/// `2^q sum_n binom(-q, n) e^{-(q+2n) y}`.
fn sech_power_tail<T: Real>(q: T, y: T) -> T {
    let two = T::lit(2.0);
    let mut coeff = T::one();
    let mut sum = T::zero();
    for n in 0..8 {
        let nn = T::from_usize_lossy(n);
        let rate = q + two * nn;
        sum += coeff * (-rate * y).exp() / rate;
        coeff = coeff * (-q - nn) / (nn + T::one());
    }
    two.powf(q) * sum
}

/// Closed-form mass `||Phi_k||^2` on the untruncated star graph, with the
/// incomplete integrals evaluated by quadrature.
pub fn mass<T: Real>(n: usize, k: usize, alpha: T, omega: T, p: T) -> Result<T> {
    let br = Branch::new(n, k, alpha, p)?;
    br.check_omega(omega)?;
    let pm1 = p - T::one();
    let two = T::lit(2.0);
    let amp = ((p + T::one()) / two).powf(two / pm1);
    let scale = omega.powf(two / pm1 - T::lit(0.5)) * two / pm1;
    Ok(amp * scale * br.weighted_integral(omega)?)
}

/// Slope `J_k(omega)` with its factorization `J = C omega^{(7-3p)/(2(p-1))} J~`.
pub fn slope_j<T: Real>(n: usize, k: usize, alpha: T, omega: T, p: T) -> Result<SlopeResult<T>> {
    let br = Branch::new(n, k, alpha, p)?;
    let j_tilde = br.j_tilde(omega)?;
    let c = slope_constant(p);
    let exponent = (T::lit(7.0) - T::lit(3.0) * p) / (T::lit(2.0) * (p - T::one()));
    let j = c * omega.powf(exponent) * j_tilde;
    let p_omega = if j_tilde.abs() <= T::lit(DEGENERATE_BAND) {
        POmega::Degenerate
    } else if j_tilde > T::zero() {
        POmega::One
    } else {
        POmega::Zero
    };
    Ok(SlopeResult { omega, j, j_tilde, c, p_omega })
}

/// Slope of the Kirchhoff half-soliton family.
pub fn kirchhoff_slope<T: Real>(n: usize, omega: T, p: T) -> Result<SlopeResult<T>> {
    slope_j(n, 0, T::zero(), omega, p)
}

/// `p(omega)`: 1 if the slope is positive, 0 if negative. A slope inside the
/// degenerate band is an error.
pub fn p_omega<T: Real>(n: usize, k: usize, alpha: T, omega: T, p: T) -> Result<POmega> {
    let r = slope_j(n, k, alpha, omega, p)?;
    match r.p_omega {
        POmega::Degenerate => Err(Error::DegenerateSlope { j_tilde: r.j_tilde.to_f64_lossy() }),
        s => Ok(s),
    }
}

/// Which critical frequency a regime has.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalKind {
    /// `alpha < 0`, `p > 5`: slope positive below, negative above.
    Star,
    /// `alpha > 0`, `3 < p < 5`: slope negative below, positive above.
    Hat,
}

/// Regime of `(alpha, p)` that has a sign change of the slope, if any.
pub fn critical_kind<T: Real>(alpha: T, p: T) -> Option<CriticalKind> {
    let (three, five) = (T::lit(3.0), T::lit(5.0));
    if alpha < T::zero() && p > five {
        Some(CriticalKind::Star)
    } else if alpha > T::zero() && p > three && p < five {
        Some(CriticalKind::Hat)
    } else {
        None
    }
}

/// Root of `J~_k` in the regimes where the slope changes sign; `None`
/// elsewhere. Bisection on a bracket that starts just above the existence
/// threshold and doubles its upper end until the sign changes.
pub fn find_critical_omega<T: Real>(n: usize, k: usize, alpha: T, p: T) -> Result<Option<T>> {
    let br = Branch::new(n, k, alpha, p)?;
    if critical_kind(alpha, p).is_none() {
        return Ok(None);
    }
    let mut lo = br.threshold() * (T::one() + T::lit(1e-8));
    let f_lo = br.j_tilde(lo)?;
    let mut hi = lo;
    let mut f_hi = f_lo;
    let mut bracketed = false;
    for _ in 0..60 {
        hi *= T::lit(2.0);
        f_hi = br.j_tilde(hi)?;
        if f_hi.signum() != f_lo.signum() {
            bracketed = true;
            break;
        }
        lo = hi;
    }
    if !bracketed {
        return Err(Error::Convergence("no sign change of the slope after 60 doublings".into()));
    }
    let band = T::lit(DEGENERATE_BAND);
    let mut f_lo = br.j_tilde(lo)?;
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = br.j_tilde(mid)?;
        if f_mid == T::zero() {
            return Ok(Some(mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    let (root, value) = if f_lo.abs() <= f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    // single precision cannot resolve the band; the bracket is the answer there
    if value.abs() >= band && T::epsilon() < T::lit(1e-10) {
        return Err(Error::Convergence(format!("slope at bracket end still {value:e}")));
    }
    Ok(Some(root))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_value() {
        let r = slope_j::<f64>(3, 1, -1.0, 4.0, 3.0).unwrap();
        assert!((r.j_tilde - 3.0).abs() < 1e-12);
        assert!((r.c - 1.0).abs() < 1e-15);
        assert!((r.j - 1.5).abs() < 1e-12);
        assert_eq!(r.p_omega, POmega::One);
    }

    #[test]
    fn incomplete_integral_closed_forms() {
        // p = 3: beta = 0
        assert!((incomplete_integral::<f64>(0.25, 3.0).unwrap() - 0.75).abs() < 1e-13);
        // p = 2: beta = 1, int (1 - t^2) = 2/3 - t0 + t0^3/3
        let t0: f64 = -0.4;
        let exact = 2.0 / 3.0 - t0 + t0.powi(3) / 3.0;
        assert!((incomplete_integral::<f64>(t0, 2.0).unwrap() - exact).abs() < 1e-13);
        // p = 5: beta = -1/2, int = pi/2 - asin t0
        let exact = std::f64::consts::FRAC_PI_2 - t0.asin();
        assert!((incomplete_integral::<f64>(t0, 5.0).unwrap() - exact).abs() < 1e-12);
        // p = 7: beta = -2/3; with t = 1 - s^3 the integrand becomes 3 (2 - s^3)^{-2/3}
        let direct = integrate(|s: f64| 3.0 * (2.0 - s * s * s).powf(-2.0 / 3.0), 0.0, 0.7_f64.cbrt(), 1e-14)
            .unwrap();
        assert!((incomplete_integral::<f64>(0.3, 7.0).unwrap() - direct).abs() < 1e-10);
    }

    #[test]
    fn mass_hand_value() {
        let m = mass::<f64>(3, 1, -1.0, 4.0, 3.0).unwrap();
        assert!((m - 10.0).abs() < 1e-12);
    }

    #[test]
    fn existence_is_checked() {
        assert!(matches!(slope_j::<f64>(3, 1, -1.0, 1.0, 3.0), Err(Error::Existence(_))));
        assert!(matches!(slope_j::<f64>(4, 2, -1.0, 1.0, 3.0), Err(Error::Parameter(_))));
        assert!(matches!(slope_j::<f64>(3, 1, -1.0, 4.0, 1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn p_five_has_only_the_boundary_term() {
        let r = slope_j::<f64>(3, 1, 1.0, 2.0, 5.0).unwrap();
        let expected = -(1.0 / 2f64.sqrt()) * (1.0 - 0.5f64).powf(-0.5);
        assert!((r.j_tilde - expected).abs() < 1e-14);
    }

    #[test]
    fn signs_in_the_definite_regimes() {
        for &p in &[1.5, 2.0, 3.0, 4.5, 5.0] {
            for &w in &[1.01, 2.0, 30.0] {
                assert!(slope_j::<f64>(3, 1, -1.0, w, p).unwrap().j > 0.0, "p={p} w={w}");
            }
        }
        for &p in &[5.0, 6.0, 8.0] {
            for &w in &[1.01, 2.0, 30.0] {
                assert!(slope_j::<f64>(3, 1, 1.0, w, p).unwrap().j < 0.0, "p={p} w={w}");
            }
        }
        for &p in &[1.5, 3.0, 4.9] {
            assert!(kirchhoff_slope::<f64>(4, 1.0, p).unwrap().j > 0.0);
        }
        assert!(kirchhoff_slope::<f64>(4, 1.0, 6.0).unwrap().j < 0.0);
        assert_eq!(kirchhoff_slope::<f64>(4, 1.0, 5.0).unwrap().p_omega, POmega::Degenerate);
    }

    #[test]
    fn critical_frequencies() {
        let star = find_critical_omega::<f64>(3, 1, -1.0, 7.0).unwrap().unwrap();
        assert!(slope_j::<f64>(3, 1, -1.0, star, 7.0).unwrap().j_tilde.abs() < 1e-10);
        assert!(slope_j::<f64>(3, 1, -1.0, star * 0.999, 7.0).unwrap().j > 0.0);
        assert!(slope_j::<f64>(3, 1, -1.0, star * 1.001, 7.0).unwrap().j < 0.0);
        let hat = find_critical_omega::<f64>(3, 1, 1.0, 4.0).unwrap().unwrap();
        assert!(slope_j::<f64>(3, 1, 1.0, hat * 0.999, 4.0).unwrap().j < 0.0);
        assert!(slope_j::<f64>(3, 1, 1.0, hat * 1.001, 4.0).unwrap().j > 0.0);
        assert_eq!(find_critical_omega::<f64>(3, 1, -1.0, 3.0).unwrap(), None);
        assert_eq!(find_critical_omega::<f64>(3, 1, 1.0, 6.0).unwrap(), None);
    }

    #[test]
    fn degenerate_band_is_an_error() {
        let star = find_critical_omega::<f64>(3, 1, -1.0, 7.0).unwrap().unwrap();
        assert!(matches!(p_omega::<f64>(3, 1, -1.0, star, 7.0), Err(Error::DegenerateSlope { .. })));
        assert_eq!(p_omega::<f64>(3, 1, 1.0, 3.0, 6.0).unwrap(), POmega::Zero);
    }

    #[test]
    fn large_frequency_limit() {
        for &p in &[2.0, 3.0, 4.0] {
            let limit = (5.0 - p) / (p - 1.0) * 3.0 * incomplete_integral::<f64>(0.0, p).unwrap();
            let r = slope_j::<f64>(3, 1, 1.0, 1e6, p).unwrap();
            assert!(((r.j_tilde - limit) / limit).abs() < 1e-2);
        }
    }

    #[test]
    fn single_precision_is_usable() {
        let r = slope_j(3, 1, -1.0_f32, 4.0, 3.0).unwrap();
        assert!((r.j - 1.5).abs() < 1e-4);
    }

    #[test]
    fn matches_finite_difference_of_mass() {
        let cases = [(3, 1, -1.0, 4.0, 3.0), (5, 2, -0.5, 1.0, 2.0), (3, 1, 1.0, 3.0, 4.0), (4, 1, 1.0, 2.0, 6.5), (3, 1, -1.0, 5.0, 7.0)];
        for &(n, k, a, w, p) in &cases {
            let step = 1e-4 * w;
            let fd = (mass::<f64>(n, k, a, w + step, p).unwrap() - mass::<f64>(n, k, a, w - step, p).unwrap()) / (2.0 * step);
            let j = slope_j::<f64>(n, k, a, w, p).unwrap().j;
            assert!(((j - fd) / j).abs() < 1e-6, "{n} {k} {a} {w} {p}: {j} vs {fd}");
        }
    }
}
