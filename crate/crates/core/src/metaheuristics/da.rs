//! Dragonfly algorithm: swarm steps among neighbours, Lévy walk when alone.
//!
//! Weight schedules follow the algorithm's original publication: inertia
//! falls linearly from `w_start` to `w_end`, the swarm weights scale with a
//! factor falling from `c_max` to zero over the first half of the run, and
//! the neighbourhood radius grows linearly from `radius_start` to
//! `radius_end` times the box diagonal (measured in box-normalised units).
//! Steps are limited to `delta_max` times the box width per dimension.

use serde::{Deserialize, Serialize};

use super::levy::{levy_sigma, levy_step, LevyFlavor};
use super::{unif, Ctx, Objective, Population, SHARED_STREAM};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DaParams {
    pub lambda: f64,
    pub w_start: f64,
    pub w_end: f64,
    pub c_max: f64,
    pub radius_start: f64,
    pub radius_end: f64,
    pub delta_max: f64,
}

impl Default for DaParams {
    fn default() -> Self {
        Self {
            lambda: 1.5,
            w_start: 0.9,
            w_end: 0.4,
            c_max: 0.1,
            radius_start: 0.25,
            radius_end: 1.0,
            delta_max: 0.1,
        }
    }
}

impl DaParams {
    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.w_start,
            self.w_end,
            self.c_max,
            self.radius_start,
            self.radius_end,
            self.delta_max,
        ];
        if vals.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(
                "da",
                "schedule parameters must be finite and >= 0",
            ));
        }
        if self.delta_max == 0.0 {
            return Err(Error::invalid("da", "delta_max must be > 0"));
        }
        levy_sigma(self.lambda).map(|_| ())
    }
}

/// Per-iteration weights.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DaWeights<T> {
    pub s: T,
    pub a: T,
    pub c: T,
    pub f: T,
    pub e: T,
    pub w: T,
    /// Neighbourhood radius in box-normalised units.
    pub radius: T,
}

pub(crate) struct Da<T> {
    p: DaParams,
    sigma: f64,
    dx: Vec<Vec<T>>,
    enemy: (Vec<T>, T),
}

impl<T: Scalar> Da<T> {
    pub fn new<F: Objective<T>>(p: &DaParams, pop: &Population<T>, _ctx: &Ctx<'_, T, F>) -> Self {
        let mut da = Self {
            p: *p,
            sigma: levy_sigma(p.lambda).expect("validated"),
            dx: vec![vec![T::zero(); pop.x[0].len()]; pop.len()],
            enemy: (Vec::new(), T::neg_infinity()),
        };
        da.update_enemy(pop);
        da
    }

    fn update_enemy(&mut self, pop: &Population<T>) {
        for (x, &f) in pop.x.iter().zip(&pop.f) {
            if f > self.enemy.1 || self.enemy.0.is_empty() {
                self.enemy = (x.clone(), f);
            }
        }
    }

    pub(crate) fn weights<F: Objective<T>>(&self, t: usize, ctx: &Ctx<'_, T, F>) -> DaWeights<T> {
        let p = &self.p;
        let frac = t as f64 / ctx.max_iterations as f64;
        let my_c = (p.c_max - p.c_max * t as f64 / (ctx.max_iterations as f64 / 2.0)).max(0.0);
        let mut rng = ctx.rng(t, SHARED_STREAM);
        let mut draw = || 2.0 * unif::<f64, _>(&mut rng);
        let (s, a, c, f) = (draw() * my_c, draw() * my_c, draw() * my_c, draw());
        let diag = (ctx.space.dim() as f64).sqrt();
        DaWeights {
            s: T::lit(s),
            a: T::lit(a),
            c: T::lit(c),
            f: T::lit(f),
            e: T::lit(my_c),
            w: T::lit(p.w_start - (p.w_start - p.w_end) * frac),
            radius: T::lit((p.radius_start + (p.radius_end - p.radius_start) * frac) * diag),
        }
    }

    pub fn iterate<F: Objective<T>>(
        &mut self,
        t: usize,
        pop: &mut Population<T>,
        ctx: &mut Ctx<'_, T, F>,
    ) {
        let wt = self.weights(t, ctx);
        let lambda = T::lit(self.p.lambda);
        let sigma = T::lit(self.sigma);
        let delta_max = T::lit(self.p.delta_max);
        let food = ctx.best_x.clone();
        let space = ctx.space;
        let n = pop.len();
        let (xs, dxs, enemy) = (&pop.x, &self.dx, &self.enemy.0);
        let out = ctx.map(t, |i, rng, probe| {
            let xi = &xs[i];
            let d = xi.len();
            let neighbours: Vec<usize> = (0..n)
                .filter(|&k| {
                    k != i && {
                        let dist2: T = (0..d)
                            .map(|j| ((xs[k][j] - xi[j]) / space.width(j)).powi(2))
                            .sum();
                        dist2.sqrt() <= wt.radius
                    }
                })
                .collect();
            let mut x = xi.clone();
            let mut dx = vec![T::zero(); d];
            if neighbours.is_empty() {
                for j in 0..d {
                    x[j] = x[j] + levy_step(LevyFlavor::ScaledUniform, lambda, sigma, rng) * x[j];
                }
            } else {
                let m = T::from_usize_lossy(neighbours.len());
                for j in 0..d {
                    let sep = -neighbours.iter().map(|&k| xi[j] - xs[k][j]).sum::<T>();
                    let ali = neighbours.iter().map(|&k| dxs[k][j]).sum::<T>() / m;
                    let coh = neighbours.iter().map(|&k| xs[k][j]).sum::<T>() / m - xi[j];
                    let fd = food[j] - xi[j];
                    let en = enemy[j] - xi[j];
                    let step = wt.s * sep
                        + wt.a * ali
                        + wt.c * coh
                        + wt.f * fd
                        + wt.e * en
                        + wt.w * dxs[i][j];
                    let lim = delta_max * space.width(j);
                    dx[j] = step.max(-lim).min(lim);
                    x[j] = x[j] + dx[j];
                }
            }
            space.clamp_in_place(&mut x);
            let f = probe.eval(&x);
            (x, dx, f)
        });
        for (i, (x, dx, f)) in out.into_iter().enumerate() {
            pop.x[i] = x;
            pop.f[i] = f;
            self.dx[i] = dx;
        }
        self.update_enemy(pop);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metaheuristics::tests::{quadratic, setup};
    use crate::metaheuristics::{RunConfig, SearchSpace};

    #[test]
    fn schedules() {
        let s = SearchSpace::<f64>::ihtc_default();
        let q = quadratic(&s);
        let cfg = RunConfig::default();
        let (ctx, pop) = setup(&s, &q, &cfg);
        let da = Da::new(&DaParams::default(), &pop, &ctx);
        let start = da.weights(0, &ctx);
        let mid = da.weights(50, &ctx);
        let end = da.weights(100, &ctx);
        assert!((start.w - 0.9).abs() < 1e-12 && (end.w - 0.4).abs() < 1e-12);
        assert!((start.radius - 0.25 * 2f64.sqrt()).abs() < 1e-12);
        assert!((end.radius - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!((mid.s, mid.a, mid.c, mid.e), (0.0, 0.0, 0.0, 0.0));
        assert!((start.e - 0.1).abs() < 1e-12);
    }
}
