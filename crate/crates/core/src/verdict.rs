//! Stability verdicts from the Morse index of the Hessian and the slope
//! sign, and the closed-form theorem tables they should reproduce.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GridSpec, Sector};
use crate::profiles::{ProfileFamily, ProfileSpec};
use crate::scalar::Real;
use crate::slope::{find_critical_omega, kirchhoff_slope, slope_j, POmega};
use crate::spectral::{assemble, kernel_detect, morse_index, OperatorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    StableInSector,
    UnstableInE,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::StableInSector => "StableInSector",
            Verdict::UnstableInE => "UnstableInE",
            Verdict::Inconclusive => "Inconclusive",
        })
    }
}

/// Energy space in which a verdict holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    /// Whole energy space.
    E,
    /// Functions with the `Sector(k)` symmetry.
    Ek,
    /// Functions with all edges equal.
    Eeq,
}

impl std::fmt::Display for Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Space::E => "E",
            Space::Ek => "E_k",
            Space::Eeq => "E_eq",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    Numerical,
    AnalyticTable,
    BothAgree,
    Conflict,
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Source::Numerical => "numerical",
            Source::AnalyticTable => "analytic-table",
            Source::BothAgree => "both-agree",
            Source::Conflict => "conflict",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport<T> {
    pub spec: ProfileSpec<T>,
    /// Sector in which the Hessian was examined.
    pub sector: Sector,
    pub n_h: usize,
    pub n_l1: usize,
    pub n_l2: usize,
    pub p_omega: POmega,
    pub verdict: Verdict,
    pub space: Space,
    pub source: Source,
    /// Critical frequency of the regime, when one exists.
    pub omega_critical: Option<T>,
    /// Set on unstable verdicts with `p <= 2`, where the instability argument
    /// relies on a data-solution map that is only known to be C^2 for `p > 2`.
    pub low_power_caveat: bool,
    pub reason: Option<String>,
}

/// Sector in which each family's theorem is stated.
pub fn theorem_sector<T: Real>(spec: &ProfileSpec<T>) -> Sector {
    match spec.family {
        ProfileFamily::AttractiveDelta { k } if k >= 1 => Sector::Split(k),
        ProfileFamily::KirchhoffHalfSoliton => Sector::Equal,
        _ => Sector::Full,
    }
}

fn stable_space<T: Real>(spec: &ProfileSpec<T>) -> Space {
    match spec.family {
        ProfileFamily::AttractiveDelta { .. } => Space::Ek,
        ProfileFamily::KirchhoffHalfSoliton => Space::Eeq,
        _ => Space::E,
    }
}

/// `(n_H, p(omega))` rule: stable iff both are 1, unstable iff they differ by 1.
pub fn verdict_rule(n_h: usize, p_omega: POmega) -> Verdict {
    match p_omega.as_option() {
        None => Verdict::Inconclusive,
        Some(p) => {
            let p = p as usize;
            if n_h == 1 && p == 1 {
                Verdict::StableInSector
            } else if n_h == p + 1 {
                Verdict::UnstableInE
            } else {
                Verdict::Inconclusive
            }
        }
    }
}

fn caveat<T: Real>(spec: &ProfileSpec<T>, verdict: Verdict) -> bool {
    verdict == Verdict::UnstableInE && spec.p <= T::lit(2.0)
}

fn space_of<T: Real>(spec: &ProfileSpec<T>, verdict: Verdict) -> Space {
    match verdict {
        Verdict::StableInSector => stable_space(spec),
        _ => Space::E,
    }
}

fn check_applicable<T: Real>(spec: &ProfileSpec<T>) -> Result<()> {
    match spec.family {
        ProfileFamily::AttractiveDelta { k } if k >= 1 => Ok(()),
        ProfileFamily::KirchhoffHalfSoliton | ProfileFamily::RepulsiveDelta => Ok(()),
        _ => Err(Error::Parameter(format!(
            "no stability theory for the {} family with these parameters",
            spec.family.name()
        ))),
    }
}

/// Slope sign of the attractive or Kirchhoff family.
fn slope_indicator<T: Real>(spec: &ProfileSpec<T>) -> Result<POmega> {
    let r = match spec.family {
        ProfileFamily::AttractiveDelta { k } => slope_j(spec.n_edges, k, spec.alpha, spec.omega, spec.p)?,
        ProfileFamily::KirchhoffHalfSoliton => kirchhoff_slope(spec.n_edges, spec.omega, spec.p)?,
        _ => return Err(Error::Parameter("slope is only defined for focusing families".into())),
    };
    Ok(r.p_omega)
}

fn critical<T: Real>(spec: &ProfileSpec<T>) -> Result<Option<T>> {
    match spec.family {
        ProfileFamily::AttractiveDelta { k } => find_critical_omega(spec.n_edges, k, spec.alpha, spec.p),
        _ => Ok(None),
    }
}

/// Verdict from computed Morse indices, kernels and the slope sign.
pub fn classify_numerical<T: Real>(spec: &ProfileSpec<T>, grid: &GridSpec<T>) -> Result<StabilityReport<T>> {
    let spec = spec.validated()?;
    check_applicable(&spec)?;
    let sector = theorem_sector(&spec);
    let l1 = assemble(OperatorKind::L1, &spec, grid, sector)?;
    let l2 = assemble(OperatorKind::L2, &spec, grid, sector)?;
    let n_l1 = morse_index(&l1)?;
    let n_l2 = morse_index(&l2)?;
    let k1 = kernel_detect(&l1)?;
    let k2 = kernel_detect(&l2)?;
    let n_h = n_l1 + n_l2;
    let mut reason = None;
    let (p_omega, verdict) = if spec.family == ProfileFamily::RepulsiveDelta {
        // no slope condition: a non-negative Hessian whose kernel is the
        // phase direction gives stability directly
        let v = if n_h == 0 && k1.dim == 0 && k2.dim == 1 {
            Verdict::StableInSector
        } else {
            reason = Some(format!("Hessian counts {n_l1}/{n_l2}, kernels {}/{}", k1.dim, k2.dim));
            Verdict::Inconclusive
        };
        (POmega::Degenerate, v)
    } else {
        let p_omega = slope_indicator(&spec)?;
        let mut v = verdict_rule(n_h, p_omega);
        if p_omega == POmega::Degenerate {
            reason = Some("slope inside the degenerate band".into());
        } else if v == Verdict::Inconclusive {
            reason = Some(format!("n(H) - p(omega) = {} gives no information", n_h as i64 - p_omega.as_option().unwrap_or(0) as i64));
        }
        if k1.dim != 0 || k2.dim != 1 || k1.ambiguous || k2.ambiguous {
            reason = Some(format!(
                "kernel hypotheses fail: dim ker L1 = {}, dim ker L2 = {}{}",
                k1.dim,
                k2.dim,
                if k1.ambiguous || k2.ambiguous { ", ambiguous threshold" } else { "" }
            ));
            v = Verdict::Inconclusive;
        }
        (p_omega, v)
    };
    Ok(StabilityReport {
        spec,
        sector,
        n_h,
        n_l1,
        n_l2,
        p_omega,
        verdict,
        space: space_of(&spec, verdict),
        source: Source::Numerical,
        omega_critical: critical(&spec)?,
        low_power_caveat: caveat(&spec, verdict),
        reason,
    })
}

/// Verdict read off the closed-form theorem tables.
pub fn classify_analytic<T: Real>(spec: &ProfileSpec<T>) -> Result<StabilityReport<T>> {
    let spec = spec.validated()?;
    let sector = theorem_sector(&spec);
    let (three, five) = (T::lit(3.0), T::lit(5.0));
    let p = spec.p;
    let omega = spec.omega;
    let mut omega_critical = None;
    let mut reason = None;
    let (n_l1, p_omega) = match spec.family {
        ProfileFamily::AttractiveDelta { k } if k >= 1 => {
            let root = find_critical_omega(spec.n_edges, k, spec.alpha, p)?;
            omega_critical = root;
            let side = |w: T| {
                let gap = (omega - w) / w;
                if gap.abs() <= T::tolerance(1e-12) {
                    None
                } else {
                    Some(gap > T::zero())
                }
            };
            let p_omega = if spec.alpha < T::zero() {
                match root.map(side) {
                    None => POmega::One,
                    Some(None) => POmega::Degenerate,
                    Some(Some(above)) => if above { POmega::Zero } else { POmega::One },
                }
            } else if p <= three {
                POmega::One
            } else if p < five {
                match root.map(side) {
                    Some(None) => POmega::Degenerate,
                    Some(Some(above)) => if above { POmega::One } else { POmega::Zero },
                    None => return Err(Error::Convergence("missing critical frequency".into())),
                }
            } else {
                POmega::Zero
            };
            (if spec.alpha < T::zero() { 2 } else { 1 }, p_omega)
        }
        ProfileFamily::KirchhoffHalfSoliton => {
            let p_omega = if p < five {
                POmega::One
            } else if p > five {
                POmega::Zero
            } else {
                POmega::Degenerate
            };
            (1, p_omega)
        }
        ProfileFamily::RepulsiveDelta => (0, POmega::Degenerate),
        _ => {
            reason = Some("outside every theorem regime".into());
            (0, POmega::Degenerate)
        }
    };
    let verdict = match spec.family {
        ProfileFamily::RepulsiveDelta => Verdict::StableInSector,
        _ if reason.is_some() => Verdict::Inconclusive,
        _ => verdict_rule(n_l1, p_omega),
    };
    if verdict == Verdict::Inconclusive && reason.is_none() {
        reason = Some(if p_omega == POmega::Degenerate {
            "critical frequency: the theorem is silent".into()
        } else {
            "n(H) - p(omega) = 2: the theorem is silent".into()
        });
    }
    Ok(StabilityReport {
        spec,
        sector,
        n_h: n_l1,
        n_l1,
        n_l2: 0,
        p_omega,
        verdict,
        space: space_of(&spec, verdict),
        source: Source::AnalyticTable,
        omega_critical,
        low_power_caveat: caveat(&spec, verdict),
        reason,
    })
}

/// Both classifications and their agreement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck<T> {
    pub source: Source,
    pub numerical: StabilityReport<T>,
    pub analytic: StabilityReport<T>,
}

pub fn cross_check<T: Real>(spec: &ProfileSpec<T>, grid: &GridSpec<T>) -> Result<CrossCheck<T>> {
    let numerical = classify_numerical(spec, grid)?;
    let analytic = classify_analytic(spec)?;
    let agree = numerical.verdict == analytic.verdict && numerical.space == analytic.space;
    Ok(CrossCheck {
        source: if agree { Source::BothAgree } else { Source::Conflict },
        numerical,
        analytic,
    })
}
