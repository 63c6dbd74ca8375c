use nalgebra::DVector;

use super::point::PrimalDualPoint;
use super::tol;

/// Feasible region of a single block, or of a whole point when `Product`.
#[derive(Clone, Debug, PartialEq)]
pub enum FeasibleSet {
    Whole,
    Box { lo: DVector<f64>, hi: DVector<f64> },
    Simplex,
    /// One set per block, `[x-set, y-set]`.
    Product(Vec<FeasibleSet>),
}

impl FeasibleSet {
    pub fn unit_box(n: usize) -> Self {
        FeasibleSet::Box { lo: DVector::from_element(n, -1.0), hi: DVector::from_element(n, 1.0) }
    }

    /// Box validity: `lo <= hi` coordinatewise.
    pub fn is_valid(&self) -> bool {
        match self {
            FeasibleSet::Box { lo, hi } => lo.len() == hi.len() && lo.iter().zip(hi.iter()).all(|(l, h)| l <= h),
            FeasibleSet::Product(sets) => sets.iter().all(|s| s.is_valid()),
            _ => true,
        }
    }

    pub fn contains(&self, v: &DVector<f64>, tolerance: f64) -> bool {
        match self {
            FeasibleSet::Whole => v.iter().all(|a| a.is_finite()),
            FeasibleSet::Box { lo, hi } => {
                lo.len() == v.len()
                    && v.iter().zip(lo.iter().zip(hi.iter())).all(|(a, (l, h))| *a >= l - tolerance && *a <= h + tolerance)
            }
            FeasibleSet::Simplex => {
                v.iter().all(|a| *a >= -tolerance) && (v.sum() - 1.0).abs() <= tolerance.max(tol::FEAS)
            }
            FeasibleSet::Product(_) => false,
        }
    }

    pub fn contains_point(&self, z: &PrimalDualPoint, tolerance: f64) -> bool {
        match self {
            FeasibleSet::Product(sets) if sets.len() == 2 => {
                sets[0].contains(&z.x, tolerance) && sets[1].contains(&z.y, tolerance)
            }
            other => other.contains(&z.x, tolerance) && z.y.is_empty(),
        }
    }

    /// Projects by clamping (box) or clipping and rescaling (simplex). The
    /// simplex branch is the drift correction used after multiplicative
    /// updates, not a Euclidean projection.
    pub fn renormalize(&self, v: &mut DVector<f64>) {
        match self {
            FeasibleSet::Box { lo, hi } => {
                for ((a, l), h) in v.iter_mut().zip(lo.iter()).zip(hi.iter()) {
                    *a = a.clamp(*l, *h);
                }
            }
            FeasibleSet::Simplex => renormalize_simplex(v),
            _ => {}
        }
    }
}

/// Clips negatives to zero and rescales to unit sum.
pub(crate) fn renormalize_simplex(v: &mut DVector<f64>) {
    for a in v.iter_mut() {
        if *a < 0.0 || !a.is_finite() {
            *a = 0.0;
        }
    }
    let s = v.sum();
    if s > 0.0 {
        *v /= s;
    } else if !v.is_empty() {
        v.fill(1.0 / v.len() as f64);
    }
}
