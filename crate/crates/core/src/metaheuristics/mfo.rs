//! Moth-flame optimization: moths spiral around a shrinking sorted flame list.

use serde::{Deserialize, Serialize};

use super::{mfo_flame_count, unif, Ctx, Objective, Population};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MfoParams {
    /// Logarithmic spiral shape.
    pub b: f64,
}

impl Default for MfoParams {
    fn default() -> Self {
        Self { b: 1.0 }
    }
}

impl MfoParams {
    pub fn validate(&self) -> Result<()> {
        if !self.b.is_finite() {
            return Err(Error::invalid("mfo", "b must be finite"));
        }
        Ok(())
    }
}

pub(crate) struct Mfo<T> {
    p: MfoParams,
    /// Best positions found so far, sorted by fitness.
    pub flames: Vec<(Vec<T>, T)>,
    /// Flames in use at the last iteration.
    pub active: usize,
}

impl<T: Scalar> Mfo<T> {
    pub fn new(p: &MfoParams) -> Self {
        Self {
            p: *p,
            flames: Vec::new(),
            active: 0,
        }
    }

    fn update_flames(&mut self, pop: &Population<T>) {
        let n = pop.len();
        let mut all: Vec<(Vec<T>, T)> = self.flames.drain(..).collect();
        all.extend(pop.x.iter().cloned().zip(pop.f.iter().copied()));
        all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        all.truncate(n);
        self.flames = all;
    }

    #[cfg(test)]
    pub fn active_flames(&self) -> &[(Vec<T>, T)] {
        &self.flames[..self.active]
    }

    pub fn iterate<F: Objective<T>>(
        &mut self,
        t: usize,
        pop: &mut Population<T>,
        ctx: &mut Ctx<'_, T, F>,
    ) {
        self.update_flames(pop);
        self.active = mfo_flame_count(pop.len(), t, ctx.max_iterations);
        let b = T::lit(self.p.b);
        let two_pi = T::lit(2.0) * T::PI();
        let space = ctx.space;
        let active = self.active;
        let (xs, flames) = (&pop.x, &self.flames);
        let out = ctx.map(t, |i, rng, probe| {
            let flame = &flames[i.min(active - 1)].0;
            let mut x = xs[i].clone();
            for j in 0..x.len() {
                let d = (flame[j] - x[j]).abs();
                let l = T::lit(2.0) * unif::<T, _>(rng) - T::one();
                x[j] = d * (b * l).exp() * (two_pi * l).cos() + flame[j];
            }
            space.clamp_in_place(&mut x);
            let f = probe.eval(&x);
            (x, f)
        });
        for (i, (x, f)) in out.into_iter().enumerate() {
            pop.x[i] = x;
            pop.f[i] = f;
        }
    }
}
