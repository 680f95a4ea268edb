//! Particle swarm with inertia, global and personal attraction.

use serde::{Deserialize, Serialize};

use super::{unif, Ctx, Objective, Population};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoParams {
    /// Acceleration towards the global best.
    pub alpha: f64,
    /// Acceleration towards the particle's own best.
    pub beta: f64,
    /// Inertia.
    pub theta: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            beta: 2.0,
            theta: 1.0,
        }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<()> {
        if [self.alpha, self.beta, self.theta]
            .iter()
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(Error::invalid(
                "pso",
                "alpha, beta and theta must be finite and >= 0",
            ));
        }
        Ok(())
    }
}

pub(crate) struct Pso<T> {
    p: PsoParams,
    v: Vec<Vec<T>>,
    own_x: Vec<Vec<T>>,
    own_f: Vec<T>,
}

impl<T: Scalar> Pso<T> {
    pub fn new(p: &PsoParams, pop: &Population<T>) -> Self {
        Self {
            p: *p,
            v: vec![vec![T::zero(); pop.x[0].len()]; pop.len()],
            own_x: pop.x.clone(),
            own_f: pop.f.clone(),
        }
    }

    pub fn iterate<F: Objective<T>>(
        &mut self,
        t: usize,
        pop: &mut Population<T>,
        ctx: &mut Ctx<'_, T, F>,
    ) {
        let (alpha, beta, theta) = (
            T::lit(self.p.alpha),
            T::lit(self.p.beta),
            T::lit(self.p.theta),
        );
        let g = ctx.best_x.clone();
        let space = ctx.space;
        let (xs, vs, own_x) = (&pop.x, &self.v, &self.own_x);
        let out = ctx.map(t, |i, rng, probe| {
            let mut v = vs[i].clone();
            let mut x = xs[i].clone();
            let (u1, u2): (T, T) = (unif(rng), unif(rng));
            for j in 0..x.len() {
                v[j] = theta * v[j] + alpha * u1 * (g[j] - x[j]) + beta * u2 * (own_x[i][j] - x[j]);
                x[j] = x[j] + v[j];
            }
            space.clamp_in_place(&mut x);
            let f = probe.eval(&x);
            (x, v, f)
        });
        for (i, (x, v, f)) in out.into_iter().enumerate() {
            if f < self.own_f[i] {
                self.own_f[i] = f;
                self.own_x[i] = x.clone();
            }
            pop.x[i] = x;
            pop.f[i] = f;
            self.v[i] = v;
        }
    }
}
