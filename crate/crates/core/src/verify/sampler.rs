use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, PrimalDualPoint, Regularizer};
use crate::rng::{seeded, SeededRng};

/// Draws points, pairs and triples from a product domain.
///
/// A third of the tuples are local: each later point is pulled toward the
/// previous one by a factor `10^{−U[0,4]}`, which keeps them feasible by convexity.
#[derive(Clone, Debug)]
pub struct TripleSampler {
    pub dims: (usize, usize),
    pub x: FeasibleSet,
    pub y: FeasibleSet,
    pub count: usize,
    pub seed: u64,
    /// Every simplex coordinate is at least this.
    pub margin: f64,
    /// Half-width of the cube used for unconstrained blocks.
    pub radius: f64,
}

pub const DEFAULT_MARGIN: f64 = 1e-3;

impl TripleSampler {
    pub fn new(dims: (usize, usize), x: FeasibleSet, y: FeasibleSet, count: usize, seed: u64) -> Self {
        Self { dims, x, y, count, seed, margin: DEFAULT_MARGIN, radius: 1.0 }
    }

    /// Uses the regularizer's own domain; a two-part product splits into blocks.
    pub fn for_regularizer(r: &dyn Regularizer, dims: (usize, usize), count: usize, seed: u64) -> Self {
        let (x, y) = match r.feasible_set() {
            FeasibleSet::Product(parts) if parts.len() == 2 => (parts[0].clone(), parts[1].clone()),
            other => (other, FeasibleSet::Whole),
        };
        Self::new(dims, x, y, count, seed)
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn rng(&self) -> SeededRng {
        seeded(self.seed)
    }

    fn block(&self, set: &FeasibleSet, k: usize, rng: &mut SeededRng) -> Result<DVector<f64>> {
        match set {
            FeasibleSet::Whole => Ok(DVector::from_fn(k, |_, _| rng.random_range(-self.radius..=self.radius))),
            FeasibleSet::Box { lo, hi } => Ok(DVector::from_fn(k, |i, _| lo[i] + (hi[i] - lo[i]) * rng.random::<f64>())),
            FeasibleSet::Simplex => {
                let e = DVector::from_fn(k, |_, _| -(1.0 - rng.random::<f64>()).ln());
                let p = &e / e.sum();
                let floor = self.margin * k as f64;
                if floor < 1.0 {
                    Ok(p * (1.0 - floor) + DVector::from_element(k, self.margin))
                } else {
                    Ok(DVector::from_element(k, 1.0 / k as f64))
                }
            }
            FeasibleSet::Product(_) => Err(Error::Unsupported("nested product domains cannot be sampled".into())),
        }
    }

    pub fn point(&self, rng: &mut SeededRng) -> Result<PrimalDualPoint> {
        Ok(PrimalDualPoint::new(self.block(&self.x, self.dims.0, rng)?, self.block(&self.y, self.dims.1, rng)?))
    }

    /// `k` points, local with probability one third.
    pub fn tuple(&self, k: usize, rng: &mut SeededRng) -> Result<Vec<PrimalDualPoint>> {
        let local = rng.random::<f64>() < 1.0 / 3.0;
        let mut out: Vec<PrimalDualPoint> = Vec::with_capacity(k);
        for _ in 0..k {
            let p = self.point(rng)?;
            let p = match out.last() {
                Some(prev) if local => {
                    let s = 10f64.powf(-4.0 * rng.random::<f64>());
                    prev.add_scaled(s, &(&p - prev))
                }
                _ => p,
            };
            out.push(p);
        }
        Ok(out)
    }
}
