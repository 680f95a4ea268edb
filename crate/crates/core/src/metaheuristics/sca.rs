//! Sine cosine algorithm.

use serde::{Deserialize, Serialize};

use super::{sca_r, unif, Ctx, Objective, Population};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScaParams {
    pub a: f64,
}

impl Default for ScaParams {
    fn default() -> Self {
        Self { a: 2.0 }
    }
}

impl ScaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::invalid("sca", "a must be finite and > 0"));
        }
        Ok(())
    }
}

pub(crate) struct Sca {
    p: ScaParams,
}

impl Sca {
    pub fn new(p: &ScaParams) -> Self {
        Self { p: *p }
    }

    pub fn iterate<T: Scalar, F: Objective<T>>(
        &mut self,
        t: usize,
        pop: &mut Population<T>,
        ctx: &mut Ctx<'_, T, F>,
    ) {
        let r = sca_r(T::lit(self.p.a), t, ctx.max_iterations);
        let two = T::lit(2.0);
        let two_pi = two * T::PI();
        let half = T::lit(0.5);
        let g = ctx.best_x.clone();
        let space = ctx.space;
        let xs = &pop.x;
        let out = ctx.map(t, |i, rng, probe| {
            let mut x = xs[i].clone();
            for j in 0..x.len() {
                let r1 = two_pi * unif::<T, _>(rng);
                let r2 = two * unif::<T, _>(rng);
                let u3: T = unif(rng);
                let wave = if u3 < half { r1.sin() } else { r1.cos() };
                x[j] = x[j] + r * wave * (r2 * g[j] - x[j]).abs();
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
