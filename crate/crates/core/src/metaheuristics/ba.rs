//! Bat algorithm: frequency-tuned velocities, loudness-gated acceptance.

use serde::{Deserialize, Serialize};

use super::{normal, unif, Ctx, Objective, Population};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaParams {
    /// Initial loudness.
    pub loudness: f64,
    /// Asymptotic pulse rate.
    pub pulse_rate: f64,
    pub f_min: f64,
    pub f_max: f64,
    /// Pulse-rate growth constant.
    pub gamma: f64,
    /// Loudness decay factor.
    pub alpha: f64,
    /// Scale of the local random walk.
    pub sigma: f64,
}

impl Default for BaParams {
    fn default() -> Self {
        Self {
            loudness: 0.25,
            pulse_rate: 0.5,
            f_min: 0.0,
            f_max: 2.0,
            gamma: 0.9,
            alpha: 0.9,
            sigma: 1.0,
        }
    }
}

impl BaParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.loudness) || !unit(self.pulse_rate) || !unit(self.alpha) {
            return Err(Error::invalid(
                "ba",
                "loudness, pulse_rate and alpha must lie in [0, 1]",
            ));
        }
        if !(self.f_min.is_finite() && self.f_max.is_finite() && self.f_min <= self.f_max) {
            return Err(Error::invalid("ba", "need finite f_min <= f_max"));
        }
        if !(self.gamma >= 0.0
            && self.sigma >= 0.0
            && self.gamma.is_finite()
            && self.sigma.is_finite())
        {
            return Err(Error::invalid(
                "ba",
                "gamma and sigma must be finite and >= 0",
            ));
        }
        Ok(())
    }
}

pub(crate) struct Ba<T> {
    p: BaParams,
    pub v: Vec<Vec<T>>,
    pub loudness: Vec<T>,
    pub pulse: Vec<T>,
}

struct Move<T> {
    x: Vec<T>,
    f: T,
    v: Vec<T>,
    accepted: bool,
}

impl<T: Scalar> Ba<T> {
    pub fn new(p: &BaParams, pop: &Population<T>) -> Self {
        let n = pop.len();
        Self {
            p: *p,
            v: vec![vec![T::zero(); pop.x[0].len()]; n],
            loudness: vec![T::lit(p.loudness); n],
            pulse: vec![T::lit(p.pulse_rate); n],
        }
    }

    pub fn iterate<F: Objective<T>>(
        &mut self,
        t: usize,
        pop: &mut Population<T>,
        ctx: &mut Ctx<'_, T, F>,
    ) {
        let p = self.p;
        let (f_min, f_max, sigma) = (T::lit(p.f_min), T::lit(p.f_max), T::lit(p.sigma));
        let best = ctx.best_x.clone();
        let mean_loudness =
            self.loudness.iter().copied().sum::<T>() / T::from_usize_lossy(self.loudness.len());
        let space = ctx.space;
        let (xs, fs, vs, loud, pulse) = (&pop.x, &pop.f, &self.v, &self.loudness, &self.pulse);
        let out = ctx.map(t, |i, rng, probe| {
            let freq = f_min + unif::<T, _>(rng) * (f_max - f_min);
            let mut v = vs[i].clone();
            let mut x = xs[i].clone();
            for j in 0..x.len() {
                v[j] = v[j] + freq * (xs[i][j] - best[j]);
                x[j] = xs[i][j] + v[j];
            }
            if unif::<T, _>(rng) > pulse[i] {
                for j in 0..x.len() {
                    x[j] = xs[i][j] + sigma * normal::<T, _>(rng) * mean_loudness;
                }
            }
            space.clamp_in_place(&mut x);
            let f = probe.eval(&x);
            let accepted = unif::<T, _>(rng) < loud[i] && f <= fs[i];
            Move { x, f, v, accepted }
        });
        let r0 = T::lit(p.pulse_rate);
        let growth = T::one() - (-T::lit(p.gamma) * T::from_usize_lossy(t)).exp();
        for (i, m) in out.into_iter().enumerate() {
            self.v[i] = m.v;
            if m.accepted {
                pop.x[i] = m.x;
                pop.f[i] = m.f;
                self.loudness[i] = T::lit(p.alpha) * self.loudness[i];
                self.pulse[i] = r0 * growth;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metaheuristics::tests::{quadratic, setup};
    use crate::metaheuristics::{RunConfig, SearchSpace};

    #[test]
    fn loudness_decays_geometrically_on_acceptance() {
        let s = SearchSpace::<f64>::ihtc_default();
        let q = quadratic(&s);
        let cfg = RunConfig::default().with_seed(2);
        let (mut ctx, mut pop) = setup(&s, &q, &cfg);
        let p = BaParams::default();
        let mut ba = Ba::new(&p, &pop);
        let mut accepted = 0;
        for t in 1..=60 {
            let before = ba.loudness.clone();
            ba.iterate(t, &mut pop, &mut ctx);
            let expected_pulse = p.pulse_rate * (1.0 - (-p.gamma * t as f64).exp());
            for i in 0..pop.len() {
                let ratio = ba.loudness[i] / before[i];
                if ratio != 1.0 {
                    accepted += 1;
                    assert!((ratio - p.alpha).abs() < 1e-12);
                    assert!((ba.pulse[i] - expected_pulse).abs() < 1e-12);
                }
            }
        }
        assert!(accepted > 0);
        let converged = p.pulse_rate * (1.0 - (-p.gamma * 60.0f64).exp());
        assert!((converged - p.pulse_rate).abs() < 1e-12);
    }
}
