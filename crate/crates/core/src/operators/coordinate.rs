use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DVector;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::geometry::{DualVector, PrimalDualPoint, SmoothFunction};

/// Alias-table sampler over coordinates.
#[derive(Clone, Debug)]
pub struct CoordinateSampler {
    probs: Vec<f64>,
    alias: WeightedAliasIndex<f64>,
}

impl CoordinateSampler {
    /// Probabilities proportional to `weights`.
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Config("sampling weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Config("sampling weights sum to zero".into()));
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let alias = WeightedAliasIndex::new(weights.to_vec()).map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self { probs, alias })
    }

    /// `p_i = √L_i / Σ_j √L_j`
    pub fn from_smoothness(li: &[f64]) -> Result<Self> {
        Self::new(&li.iter().map(|l| l.sqrt()).collect::<Vec<_>>())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.alias.sample(rng)
    }
}

struct Sampled {
    i: usize,
    delta: f64,
    v_hat: DVector<f64>,
}

/// One iteration's view of the shared-randomness estimators of the Fenchel
/// game operator at `z_t = (x_t, v_t)`.
pub struct CoordinateEstimatorState {
    pub x: DVector<f64>,
    pub v: DVector<f64>,
    mu: f64,
    lambda: f64,
    probs: Vec<f64>,
    sampled: Option<Sampled>,
}

impl CoordinateEstimatorState {
    pub fn new(x: DVector<f64>, v: DVector<f64>, mu: f64, lambda: f64, probs: Vec<f64>) -> Result<Self> {
        if x.len() != v.len() || probs.len() != x.len() {
            return Err(Error::dim("estimator state blocks and probabilities must share a dimension"));
        }
        if (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::Config("coordinate probabilities must sum to one".into()));
        }
        Ok(Self { x, v, mu, lambda, probs, sampled: None })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn prob(&self, i: usize) -> Result<f64> {
        match self.probs.get(i) {
            None => Err(Error::dim(format!("coordinate {i} out of range"))),
            Some(p) if *p > 0.0 => Ok(*p),
            Some(_) => Err(Error::Config(format!("coordinate {i} has zero sampling probability"))),
        }
    }

    /// `v̂ = (1 − 1/λ)v_t + x_t/λ`, the same for every `i`.
    pub fn v_hat(&self) -> DVector<f64> {
        &self.v * (1.0 - 1.0 / self.lambda) + &self.x / self.lambda
    }

    /// `g_i(z_t) = ((1/p_i)∇_i f(v_t) e_i, v_t − x_t)`. Records `i` and the
    /// step `Δ^{(i)}` for the matching call to [`Self::at_w`].
    pub fn at_z(&mut self, f: &dyn SmoothFunction, i: usize) -> Result<DualVector> {
        let p = self.prob(i)?;
        let gi = f.partial(i, 1.0, &self.v, 0.0, &self.v);
        let mut gx = DVector::zeros(self.x.len());
        gx[i] = gi / p;
        let delta = -gi / (self.mu * self.lambda * p);
        self.sampled = Some(Sampled { i, delta, v_hat: self.v_hat() });
        Ok(PrimalDualPoint::new(gx, &self.v - &self.x))
    }

    /// `Δ^{(i)}_t` for the recorded coordinate.
    pub fn delta(&self) -> Option<(usize, f64)> {
        self.sampled.as_ref().map(|s| (s.i, s.delta))
    }

    /// `w^{(i)}_t = (x_t + Δ^{(i)}_t, v̂)`.
    pub fn w(&self) -> Result<PrimalDualPoint> {
        let s = self.sampled.as_ref().ok_or_else(|| Error::Config("no coordinate sampled yet".into()))?;
        let mut x = self.x.clone();
        x[s.i] += s.delta;
        Ok(PrimalDualPoint::new(x, s.v_hat.clone()))
    }

    /// `g_i(w^{(i)}) = ((1/p_i)∇_i f(v̂) e_i, v̂ − (x_t + (1/p_i)Δ^{(i)}_t))`.
    pub fn at_w(&self, f: &dyn SmoothFunction, i: usize) -> Result<DualVector> {
        let s = self.sampled.as_ref().ok_or_else(|| Error::Config("no coordinate sampled yet".into()))?;
        if s.i != i {
            return Err(Error::Config(format!("estimator sampled coordinate {} but was queried at {i}", s.i)));
        }
        let p = self.prob(i)?;
        let mut gx = DVector::zeros(self.x.len());
        gx[i] = f.partial(i, 1.0, &s.v_hat, 0.0, &s.v_hat) / p;
        let mut shifted = self.x.clone();
        shifted[i] += s.delta / p;
        Ok(PrimalDualPoint::new(gx, &s.v_hat - shifted))
    }
}

/// Estimator of `g(z_t)` for coordinate `i`.
pub fn coord_estimate_at_z(f: &dyn SmoothFunction, state: &mut CoordinateEstimatorState, i: usize) -> Result<DualVector> {
    state.at_z(f, i)
}

/// Estimator of `g(w_t)` for coordinate `i`; `i` must match the preceding
/// [`coord_estimate_at_z`] call.
pub fn coord_estimate_at_w(f: &dyn SmoothFunction, state: &CoordinateEstimatorState, i: usize) -> Result<DualVector> {
    state.at_w(f, i)
}

/// Wraps a function and counts oracle calls.
pub struct CountingFunction<F> {
    inner: F,
    partials: AtomicUsize,
    grads: AtomicUsize,
}

impl<F: SmoothFunction> CountingFunction<F> {
    pub fn new(inner: F) -> Self {
        Self { inner, partials: AtomicUsize::new(0), grads: AtomicUsize::new(0) }
    }

    pub fn partial_calls(&self) -> usize {
        self.partials.load(Ordering::Relaxed)
    }

    pub fn grad_calls(&self) -> usize {
        self.grads.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.partials.store(0, Ordering::Relaxed);
        self.grads.store(0, Ordering::Relaxed);
    }
}

impl<F: SmoothFunction> SmoothFunction for CountingFunction<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        self.inner.value(x)
    }

    fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        self.grads.fetch_add(1, Ordering::Relaxed);
        self.inner.grad(x)
    }

    fn partial(&self, i: usize, a: f64, x: &DVector<f64>, b: f64, y: &DVector<f64>) -> f64 {
        self.partials.fetch_add(1, Ordering::Relaxed);
        self.inner.partial(i, a, x, b, y)
    }

    fn bregman(&self, base: &DVector<f64>, to: &DVector<f64>) -> f64 {
        self.inner.bregman(base, to)
    }
}
