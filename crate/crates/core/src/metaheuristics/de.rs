//! Differential evolution, DE/rand/2/bin with greedy selection.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{unif, Ctx, Objective, Population};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeParams {
    pub f1: f64,
    pub f2: f64,
    /// Crossover probability.
    pub cr: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        Self {
            f1: 0.5,
            f2: 0.5,
            cr: 0.8,
        }
    }
}

impl DeParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=2.0).contains(&self.f1) || !(0.0..=2.0).contains(&self.f2) {
            return Err(Error::invalid(
                "de",
                "differential weights must lie in [0, 2]",
            ));
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return Err(Error::invalid(
                "de",
                "crossover probability must lie in [0, 1]",
            ));
        }
        Ok(())
    }
}

/// Five pairwise distinct indices in `0..n`, none equal to `i`.
pub(crate) fn donor_indices<R: Rng + ?Sized>(rng: &mut R, n: usize, i: usize) -> [usize; 5] {
    let picked = rand::seq::index::sample(rng, n - 1, 5);
    let mut k = [0; 5];
    for (slot, j) in k.iter_mut().zip(picked.iter()) {
        *slot = if j >= i { j + 1 } else { j };
    }
    k
}

/// Binomial crossover: mutant component where `u <= cr`, parent otherwise.
pub(crate) fn crossover<T: Scalar>(parent: &[T], mutant: &[T], draws: &[T], cr: T) -> Vec<T> {
    parent
        .iter()
        .zip(mutant)
        .zip(draws)
        .map(|((&p, &m), &u)| if u <= cr { m } else { p })
        .collect()
}

pub(crate) struct De {
    p: DeParams,
}

impl De {
    pub fn new(p: &DeParams) -> Self {
        Self { p: *p }
    }

    pub fn iterate<T: Scalar, F: Objective<T>>(
        &mut self,
        t: usize,
        pop: &mut Population<T>,
        ctx: &mut Ctx<'_, T, F>,
    ) {
        let (f1, f2, cr) = (T::lit(self.p.f1), T::lit(self.p.f2), T::lit(self.p.cr));
        let space = ctx.space;
        let n = pop.len();
        let (xs, fs) = (&pop.x, &pop.f);
        let out = ctx.map(t, |i, rng, probe| {
            let k = donor_indices(rng, n, i);
            let mutant: Vec<T> = (0..xs[i].len())
                .map(|j| {
                    xs[k[0]][j]
                        + f1 * (xs[k[1]][j] - xs[k[2]][j])
                        + f2 * (xs[k[3]][j] - xs[k[4]][j])
                })
                .collect();
            let draws: Vec<T> = (0..mutant.len()).map(|_| unif(rng)).collect();
            let mut trial = crossover(&xs[i], &mutant, &draws, cr);
            space.clamp_in_place(&mut trial);
            let f = probe.eval(&trial);
            if f <= fs[i] {
                (trial, f)
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

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn donors_distinct_and_exclude_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..2000 {
            let n = 6 + trial % 20;
            let i = trial % n;
            let k = donor_indices(&mut rng, n, i);
            for a in 0..5 {
                assert!(k[a] < n && k[a] != i);
                for b in a + 1..5 {
                    assert_ne!(k[a], k[b]);
                }
            }
        }
    }

    #[test]
    fn crossover_branches() {
        let parent = [1.0, 2.0, 3.0];
        let mutant = [10.0, 20.0, 30.0];
        assert_eq!(
            crossover(&parent, &mutant, &[0.1, 0.9, 0.8], 0.8),
            vec![10.0, 2.0, 30.0]
        );
    }
}
