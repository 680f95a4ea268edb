//! Flower pollination: Lévy-driven global moves, local mixing otherwise.

use serde::{Deserialize, Serialize};

use super::levy::{levy_sigma, levy_step, LevyFlavor};
use super::{unif, Ctx, Objective, Population};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FpaParams {
    /// Switch probability of global pollination.
    pub p: f64,
    pub lambda: f64,
    /// Scale of the global step.
    pub gamma: f64,
}

impl Default for FpaParams {
    fn default() -> Self {
        Self {
            p: 0.8,
            lambda: 1.5,
            gamma: 0.1,
        }
    }
}

impl FpaParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid(
                "fpa",
                "switch probability must lie in [0, 1]",
            ));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::invalid("fpa", "gamma must be finite and > 0"));
        }
        levy_sigma(self.lambda).map(|_| ())
    }
}

pub(crate) struct Fpa {
    p: FpaParams,
    sigma: f64,
}

impl Fpa {
    pub fn new(p: &FpaParams) -> Self {
        Self {
            p: *p,
            sigma: levy_sigma(p.lambda).expect("validated"),
        }
    }

    pub fn iterate<T: Scalar, F: Objective<T>>(
        &mut self,
        t: usize,
        pop: &mut Population<T>,
        ctx: &mut Ctx<'_, T, F>,
    ) {
        let (switch, lambda, gamma, sigma) = (
            T::lit(self.p.p),
            T::lit(self.p.lambda),
            T::lit(self.p.gamma),
            T::lit(self.sigma),
        );
        let best = ctx.best_x.clone();
        let space = ctx.space;
        let n = pop.len();
        let (xs, fs) = (&pop.x, &pop.f);
        let out = ctx.map(t, |i, rng, probe| {
            let mut x = xs[i].clone();
            if unif::<T, _>(rng) < switch {
                for j in 0..x.len() {
                    let l = levy_step(LevyFlavor::Mantegna, lambda, sigma, rng);
                    x[j] = x[j] + gamma * l * (best[j] - x[j]);
                }
            } else {
                let picked = rand::seq::index::sample(rng, n, 2);
                let (a, b) = (picked.index(0), picked.index(1));
                let u: T = unif(rng);
                for j in 0..x.len() {
                    x[j] = x[j] + u * (xs[a][j] - xs[b][j]);
                }
            }
            space.clamp_in_place(&mut x);
            let f = probe.eval(&x);
            if f < fs[i] {
                (x, f)
            } else {
                (xs[i].clone(), fs[i])
            }
        });
        for (i, (x, f)) in out.into_iter().enumerate() {
            pop.x[i] = x;
            pop.f[i] = f;
        }
    }
}
