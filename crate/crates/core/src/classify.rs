//! Singularity-type classification through the critical tower.

use serde::Serialize;

use crate::crit::{critical_tower, CritError, CritTower, Termination, TowerOptions};
use crate::field::Scalar;
use crate::gb::{LocalIdeal, QuotientDim};
use crate::germ::GermMap;

/// Why the classifier gave up on weak finiteness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NotWfstReason {
    Stabilized,
    PointDiscriminantNonfinite,
    DepthLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    /// The map itself is finite.
    Finite,
    /// `Crit_1 → Δ_1` is finite.
    Fst,
    /// `Crit_r → Δ_r` is finite for the given minimal `r ≥ 2`.
    Wfst { r: usize },
    /// `proven` is false when the tower was cut by the depth limit.
    NotWfst { reason: NotWfstReason, proven: bool },
}

impl Verdict {
    pub fn level(&self) -> Option<usize> {
        match self {
            Verdict::Finite => Some(0),
            Verdict::Fst => Some(1),
            Verdict::Wfst { r } => Some(*r),
            Verdict::NotWfst { .. } => None,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Finite => write!(f, "finite(r=0)"),
            Verdict::Fst => write!(f, "fst(r=1)"),
            Verdict::Wfst { r } => write!(f, "wfst(r={r})"),
            Verdict::NotWfst { reason, proven } => {
                let why = match reason {
                    NotWfstReason::Stabilized => "stabilized",
                    NotWfstReason::PointDiscriminantNonfinite => "point-discriminant-nonfinite",
                    NotWfstReason::DepthLimit => "depth-limit",
                };
                write!(f, "not-wfst({why}{})", if *proven { "" } else { ", inconclusive" })
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SingTypeReport<F: Scalar> {
    pub verdict: Verdict,
    pub tower: CritTower<F>,
    /// Fibre length of `Crit_r → Δ_r` for each tower level.
    pub quotient_dims: Vec<QuotientDim>,
}

/// Fibre length of `f` restricted to `V(crit)`: the local quotient
/// dimension of `J_X + crit + (f_1, …, f_m)`.
pub fn is_finite_restriction<F: Scalar>(f: &GermMap<F>, crit: &LocalIdeal<F>) -> QuotientDim {
    f.source_ideal().sum(crit).with_generators(f.components().iter().cloned()).quotient_dimension()
}

/// Minimal `r` with `Crit_r → Δ_r` finite, or the reason none was found.
pub fn classify<F: Scalar>(f: &GermMap<F>, opts: &TowerOptions) -> Result<SingTypeReport<F>, CritError> {
    let tower = critical_tower(f, opts)?;
    let g = &tower.map;
    let quotient_dims: Vec<QuotientDim> = tower
        .levels
        .iter()
        .map(|l| if l.index == 0 { is_finite_restriction(g, g.source_ideal()) } else { is_finite_restriction(g, &l.crit) })
        .collect();
    let first = quotient_dims.iter().position(|d| d.is_finite());
    let verdict = match first {
        Some(0) => Verdict::Finite,
        Some(1) => Verdict::Fst,
        Some(r) => Verdict::Wfst { r },
        None => match tower.termination {
            Termination::Stabilized(_) => Verdict::NotWfst { reason: NotWfstReason::Stabilized, proven: true },
            Termination::PointDiscriminant(_) => {
                Verdict::NotWfst { reason: NotWfstReason::PointDiscriminantNonfinite, proven: true }
            }
            Termination::DepthLimit(_) => Verdict::NotWfst { reason: NotWfstReason::DepthLimit, proven: false },
            Termination::Empty(_) => unreachable!("an empty level always has a finite restriction"),
        },
    };
    Ok(SingTypeReport { verdict, tower, quotient_dims })
}
