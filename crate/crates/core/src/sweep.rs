//! Parameter sweeps: expansion of list-valued specifications into points,
//! validation of every point, and parallel numerical/analytic cross-checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GridSpec;
use crate::profiles::{existence_threshold, Nonlinearity, ProfileFamily, ProfileSpec};
use crate::report::{fmt17, stability_row};
use crate::scalar::Real;
use crate::slope::find_critical_omega;
use crate::verdict::{cross_check, CrossCheck, Source};

/// Environment variable holding the worker count of [`run_sweep`].
pub const THREADS_ENV: &str = "NLS_STAR_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Attractive,
    Kirchhoff,
    Repulsive,
}

impl std::str::FromStr for FamilyName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "attractive" => Ok(FamilyName::Attractive),
            "kirchhoff" => Ok(FamilyName::Kirchhoff),
            "repulsive" => Ok(FamilyName::Repulsive),
            _ => Err(Error::Parameter(format!("unknown family {s:?} (attractive, kirchhoff, repulsive)"))),
        }
    }
}

/// List-valued sweep description. Frequencies may be given absolutely, as
/// multiples of the existence threshold, or as multiples of the critical
/// frequency; all three lists are combined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec<T> {
    pub family: Vec<FamilyName>,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    /// Bump counts; all admissible `k` when absent.
    pub k: Option<Vec<usize>>,
    pub alpha: Vec<T>,
    pub omega: Vec<T>,
    /// `omega = r alpha^2 / (N - 2k)^2` (attractive) or `r alpha^2 / N^2` (repulsive).
    pub omega_rel: Vec<T>,
    /// `omega = r omega*` where the regime has a critical frequency.
    pub omega_crit: Vec<T>,
    pub p: Vec<T>,
    /// Nonlinearity signs; the family's own sign when empty.
    pub mu: Vec<Nonlinearity>,
    pub intervals: Option<usize>,
    pub length: Option<T>,
}

impl<T: Real> Default for SweepSpec<T> {
    fn default() -> Self {
        Self {
            family: vec![FamilyName::Attractive],
            n: vec![3],
            k: None,
            alpha: vec![-T::one()],
            omega: Vec::new(),
            omega_rel: Vec::new(),
            omega_crit: Vec::new(),
            p: vec![T::lit(3.0)],
            mu: Vec::new(),
            intervals: None,
            length: None,
        }
    }
}

/// Parameters of one expanded point, kept even when they do not form a
/// valid profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointParams<T> {
    pub family: FamilyName,
    pub n: usize,
    pub k: Option<usize>,
    pub alpha: T,
    pub omega: Option<T>,
    pub p: T,
    pub mu: Nonlinearity,
}

impl<T: Real> PointParams<T> {
    pub fn cells(&self) -> [String; 6] {
        [
            self.n.to_string(),
            self.k.map(|k| k.to_string()).unwrap_or_default(),
            fmt17(self.alpha),
            self.omega.map(fmt17).unwrap_or_default(),
            fmt17(self.p),
            match self.family {
                FamilyName::Attractive => "attractive",
                FamilyName::Kirchhoff => "kirchhoff",
                FamilyName::Repulsive => "repulsive",
            }
            .to_string(),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint<T> {
    pub params: PointParams<T>,
    pub spec: Result<ProfileSpec<T>>,
}

#[derive(Debug, Clone)]
pub struct SweepRow<T> {
    pub params: PointParams<T>,
    pub result: std::result::Result<CrossCheck<T>, Error>,
}

impl<T: Real> SweepRow<T> {
    pub fn cells(&self) -> Vec<String> {
        stability_row(self.params.cells(), &self.result)
    }

    pub fn is_conflict(&self) -> bool {
        matches!(&self.result, Ok(c) if c.source == Source::Conflict)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub points: usize,
    pub agree: usize,
    pub conflicts: usize,
    pub invalid: usize,
    pub failed: usize,
}

pub fn summarize<T: Real>(rows: &[SweepRow<T>]) -> SweepSummary {
    let mut s = SweepSummary { points: rows.len(), ..Default::default() };
    for r in rows {
        match &r.result {
            Ok(c) if c.source == Source::Conflict => s.conflicts += 1,
            Ok(_) => s.agree += 1,
            Err(e) if e.is_validation() => s.invalid += 1,
            Err(_) => s.failed += 1,
        }
    }
    s
}

fn bump_counts(n: usize) -> Vec<usize> {
    (1..=n.saturating_sub(1) / 2).collect()
}

impl<T: Real> SweepSpec<T> {
    /// Every combination of the lists, in a fixed order. Invalid points keep
    /// their error.
    pub fn expand(&self) -> Vec<SweepPoint<T>> {
        let mut out = Vec::new();
        for &family in &self.family {
            let mus: Vec<Nonlinearity> = if self.mu.is_empty() {
                vec![match family {
                    FamilyName::Repulsive => Nonlinearity::Defocusing,
                    _ => Nonlinearity::Focusing,
                }]
            } else {
                self.mu.clone()
            };
            for &n in &self.n {
                let ks: Vec<Option<usize>> = match family {
                    FamilyName::Attractive => {
                        self.k.clone().unwrap_or_else(|| bump_counts(n)).into_iter().map(Some).collect()
                    }
                    _ => vec![None],
                };
                let alphas = match family {
                    FamilyName::Kirchhoff => vec![T::zero()],
                    _ => self.alpha.clone(),
                };
                for &k in &ks {
                    for &alpha in &alphas {
                        for &p in &self.p {
                            for &mu in &mus {
                                for omega in self.frequencies(family, n, k, alpha, p) {
                                    let params = PointParams { family, n, k, alpha, omega: omega.as_ref().ok().copied(), p, mu };
                                    let spec = omega.and_then(|omega| point_spec(family, n, k, alpha, omega, p, mu));
                                    out.push(SweepPoint { params, spec });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn frequencies(&self, family: FamilyName, n: usize, k: Option<usize>, alpha: T, p: T) -> Vec<Result<T>> {
        let mut out: Vec<Result<T>> = self.omega.iter().map(|&w| Ok(w)).collect();
        for &r in &self.omega_rel {
            out.push(match family {
                FamilyName::Attractive => Ok(r * existence_threshold(n, k.unwrap_or(0), alpha)),
                FamilyName::Repulsive => Ok(r * existence_threshold(n, 0, alpha)),
                FamilyName::Kirchhoff => Err(Error::Parameter("omega_rel needs alpha != 0".into())),
            });
        }
        for &r in &self.omega_crit {
            out.push(match (family, k) {
                (FamilyName::Attractive, Some(k)) => match find_critical_omega(n, k, alpha, p) {
                    Ok(Some(w)) => Ok(r * w),
                    Ok(None) => Err(Error::Parameter("no critical frequency in this regime".into())),
                    Err(e) => Err(e),
                },
                _ => Err(Error::Parameter("omega_crit needs the attractive family".into())),
            });
        }
        out
    }

    pub fn grid_for(&self, omega: T) -> Result<GridSpec<T>> {
        GridSpec::new(
            self.length.unwrap_or_else(|| GridSpec::default_length(omega)),
            self.intervals.unwrap_or(GridSpec::<T>::DEFAULT_INTERVALS),
        )
    }
}

/// Validated profile of one family from flat parameters.
pub fn point_spec<T: Real>(
    family: FamilyName,
    n: usize,
    k: Option<usize>,
    alpha: T,
    omega: T,
    p: T,
    mu: Nonlinearity,
) -> Result<ProfileSpec<T>> {
    let family = match family {
        FamilyName::Attractive => ProfileFamily::AttractiveDelta { k: k.unwrap_or(0) },
        FamilyName::Kirchhoff => ProfileFamily::KirchhoffHalfSoliton,
        FamilyName::Repulsive => ProfileFamily::RepulsiveDelta,
    };
    ProfileSpec { family, n_edges: n, alpha, omega, p, mu }.validated()
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn configured_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Parameter(format!("{THREADS_ENV} = {s:?} is not a positive integer"))),
        },
    }
}

/// Cross-checks every point on a worker pool; rows come back in point order.
pub fn run_sweep<T: Real>(spec: &SweepSpec<T>) -> Result<Vec<SweepRow<T>>> {
    let points = spec.expand();
    let work = || {
        points
            .par_iter()
            .map(|pt| SweepRow {
                params: pt.params,
                result: pt.spec.clone().and_then(|s| cross_check(&s, &spec.grid_for(s.omega)?)),
            })
            .collect::<Vec<_>>()
    };
    match configured_threads()? {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Numerical(e.to_string()))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

/// Sweep covering every case of the three stability theorems: both signs of
/// `alpha` for `p` in {2, 3}, both sides of the critical frequency for
/// `p = 4` (`alpha > 0`) and `p = 7` (`alpha < 0`), `p = 6` beyond the
/// subcritical range, the Kirchhoff half-soliton below and above `p = 5`,
/// and the repulsive family.
pub fn acceptance_grid<T: Real>(intervals: usize) -> Vec<SweepSpec<T>> {
    let base = SweepSpec { intervals: Some(intervals), ..SweepSpec::default() };
    vec![
        SweepSpec {
            n: vec![3, 4, 5],
            alpha: vec![-T::one(), T::one()],
            omega_rel: vec![T::lit(2.0), T::lit(4.0)],
            p: vec![T::lit(2.0), T::lit(3.0)],
            ..base.clone()
        },
        SweepSpec {
            n: vec![3],
            alpha: vec![-T::one()],
            omega_crit: vec![T::lit(0.9), T::lit(2.0)],
            p: vec![T::lit(7.0)],
            ..base.clone()
        },
        SweepSpec {
            n: vec![3],
            alpha: vec![T::one()],
            omega_crit: vec![T::lit(0.9), T::lit(2.0)],
            p: vec![T::lit(4.0)],
            ..base.clone()
        },
        SweepSpec {
            n: vec![3],
            alpha: vec![T::one()],
            omega_rel: vec![T::lit(2.0)],
            p: vec![T::lit(6.0)],
            ..base.clone()
        },
        SweepSpec {
            family: vec![FamilyName::Kirchhoff],
            n: vec![3, 4],
            omega: vec![T::one()],
            p: vec![T::lit(3.0), T::lit(6.0)],
            ..base.clone()
        },
        SweepSpec {
            family: vec![FamilyName::Repulsive],
            n: vec![3],
            alpha: vec![-T::lit(2.0)],
            omega_rel: vec![T::lit(0.5)],
            p: vec![T::lit(2.0), T::lit(3.0)],
            ..base
        },
    ]
}
