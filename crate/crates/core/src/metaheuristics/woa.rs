//! Whale optimization: shrinking encirclement, random-whale search, spiral.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{a_int, unif, Ctx, Objective, Population};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WoaParams {
    /// Logarithmic spiral shape.
    pub b: f64,
}

impl Default for WoaParams {
    fn default() -> Self {
        Self { b: 1.0 }
    }
}

impl WoaParams {
    pub fn validate(&self) -> Result<()> {
        if !self.b.is_finite() {
            return Err(Error::invalid("woa", "b must be finite"));
        }
        Ok(())
    }
}

pub(crate) struct Woa {
    p: WoaParams,
}

impl Woa {
    pub fn new(p: &WoaParams) -> Self {
        Self { p: *p }
    }

    pub fn iterate<T: Scalar, F: Objective<T>>(
        &mut self,
        t: usize,
        pop: &mut Population<T>,
        ctx: &mut Ctx<'_, T, F>,
    ) {
        let a: T = a_int(t, ctx.max_iterations);
        let b = T::lit(self.p.b);
        let two = T::lit(2.0);
        let two_pi = two * T::PI();
        let half = T::lit(0.5);
        let g = ctx.best_x.clone();
        let space = ctx.space;
        let n = pop.len();
        let xs = &pop.x;
        let out = ctx.map(t, |i, rng, probe| {
            let big_a = two * a * unif::<T, _>(rng) - a;
            let c = two * unif::<T, _>(rng);
            let u3: T = unif(rng);
            let l = two * unif::<T, _>(rng) - T::one();
            let k = rng.random_range(0..n);
            let xi = &xs[i];
            let mut x: Vec<T> = if u3 < half {
                let target = if big_a.abs() < T::one() { &g } else { &xs[k] };
                (0..xi.len())
                    .map(|j| target[j] - big_a * (c * target[j] - xi[j]).abs())
                    .collect()
            } else {
                (0..xi.len())
                    .map(|j| (g[j] - xi[j]).abs() * (b * l).exp() * (two_pi * l).cos() + g[j])
                    .collect()
            };
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
