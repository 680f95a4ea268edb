//! Grey wolf optimizer: moves towards the mean of three leader-guided points.

use super::{a_int, unif, Ctx, Objective, Population};
use crate::scalar::Scalar;

pub(crate) struct Gwo<T> {
    /// Alpha, beta and delta: the three best points seen so far.
    leaders: Vec<(Vec<T>, T)>,
}

impl<T: Scalar> Gwo<T> {
    pub fn new(pop: &Population<T>) -> Self {
        let mut g = Self {
            leaders: Vec::new(),
        };
        g.update_leaders(pop);
        g
    }

    fn update_leaders(&mut self, pop: &Population<T>) {
        let mut all: Vec<(Vec<T>, T)> = self.leaders.drain(..).collect();
        all.extend(pop.x.iter().cloned().zip(pop.f.iter().copied()));
        // Stable sort keeps earlier entries first on ties.
        all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        all.truncate(3);
        self.leaders = all;
    }

    pub fn iterate<F: Objective<T>>(
        &mut self,
        t: usize,
        pop: &mut Population<T>,
        ctx: &mut Ctx<'_, T, F>,
    ) {
        let a: T = a_int(t, ctx.max_iterations);
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let space = ctx.space;
        let (xs, leaders) = (&pop.x, &self.leaders);
        let out = ctx.map(t, |i, rng, probe| {
            let xi = &xs[i];
            let mut x = vec![T::zero(); xi.len()];
            for (lead, _) in leaders {
                for j in 0..x.len() {
                    let big_a = two * a * unif::<T, _>(rng) - a;
                    let c = two * unif::<T, _>(rng);
                    x[j] = x[j] + lead[j] - big_a * (c * lead[j] - xi[j]).abs();
                }
            }
            for v in x.iter_mut() {
                *v = *v / three;
            }
            space.clamp_in_place(&mut x);
            let f = probe.eval(&x);
            (x, f)
        });
        for (i, (x, f)) in out.into_iter().enumerate() {
            pop.x[i] = x;
            pop.f[i] = f;
        }
        self.update_leaders(pop);
    }
}
