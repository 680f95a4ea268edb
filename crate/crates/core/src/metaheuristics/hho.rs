//! Harris hawks optimization.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::levy::{levy_sigma, levy_step, LevyFlavor};
use super::{hho_energy, unif, Ctx, Objective, Population};
use crate::error::Result;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HhoParams {
    pub lambda: f64,
}

impl Default for HhoParams {
    fn default() -> Self {
        Self { lambda: 1.5 }
    }
}

impl HhoParams {
    pub fn validate(&self) -> Result<()> {
        levy_sigma(self.lambda).map(|_| ())
    }
}

pub(crate) struct Hho {
    p: HhoParams,
    sigma: f64,
}

impl Hho {
    pub fn new(p: &HhoParams) -> Self {
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
        let lambda = T::lit(self.p.lambda);
        let sigma = T::lit(self.sigma);
        let (one, two, half) = (T::one(), T::lit(2.0), T::lit(0.5));
        let rabbit = ctx.best_x.clone();
        let mean = pop.mean();
        let space = ctx.space;
        let k_max = ctx.max_iterations;
        let n = pop.len();
        let (xs, fs) = (&pop.x, &pop.f);
        let out = ctx.map(t, |i, rng, probe| {
            let xi = &xs[i];
            let d = xi.len();
            let e0 = two * unif::<T, _>(rng) - one;
            let jump = two * (one - unif::<T, _>(rng));
            let e = hho_energy(e0, t, k_max);
            let finish = |mut x: Vec<T>, probe: &mut super::Probe<'_, T, F>| {
                space.clamp_in_place(&mut x);
                let f = probe.eval(&x);
                (x, f)
            };
            if e.abs() >= one {
                let u: [T; 5] = std::array::from_fn(|_| unif(rng));
                let k = rng.random_range(0..n);
                let x: Vec<T> = if u[4] >= half {
                    (0..d)
                        .map(|j| xs[k][j] - u[0] * (xs[k][j] - two * u[1] * xi[j]).abs())
                        .collect()
                } else {
                    (0..d)
                        .map(|j| {
                            (xs[k][j] - mean[j]) - u[2] * (space.lower[j] + u[3] * space.width(j))
                        })
                        .collect()
                };
                return finish(x, probe);
            }
            let u6: T = unif(rng);
            let soft = e.abs() >= half;
            if u6 >= half {
                let x: Vec<T> = (0..d)
                    .map(|j| {
                        let delta = (rabbit[j] - xi[j]).abs();
                        if soft {
                            delta - e * (jump * rabbit[j] - xi[j]).abs()
                        } else {
                            rabbit[j] - e * delta
                        }
                    })
                    .collect();
                return finish(x, probe);
            }
            // Progressive rapid dives: try y, then z, else stay.
            let anchor = if soft { xi } else { &mean };
            let y: Vec<T> = (0..d)
                .map(|j| rabbit[j] - e * (jump * rabbit[j] - anchor[j]).abs())
                .collect();
            let u7: T = unif(rng);
            let z: Vec<T> = (0..d)
                .map(|j| y[j] + u7 * levy_step(LevyFlavor::ScaledNormal, lambda, sigma, rng))
                .collect();
            let (y, fy) = finish(y, probe);
            if fy < fs[i] {
                return (y, fy);
            }
            let (z, fz) = finish(z, probe);
            if fz < fs[i] {
                return (z, fz);
            }
            (xi.clone(), fs[i])
        });
        for (i, (x, f)) in out.into_iter().enumerate() {
            pop.x[i] = x;
            pop.f[i] = f;
        }
    }
}
