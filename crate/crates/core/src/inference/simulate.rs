use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{PatternMixture, Trace, UserStrategy};
use crate::{Error, Result};

fn sampler(weights: &[f64], what: &str) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(weights).map_err(|e| Error::InvalidModel(format!("{what}: {e}")))
}

/// Precomputed samplers for the generative process of a mixture: the first
/// state is drawn from the shared initial distribution, then every step
/// draws a pattern `k ~ theta` followed by `s' ~ P_k(s, .)`.
pub struct Simulator<'a> {
    mixture: &'a PatternMixture,
    iota: WeightedIndex<f64>,
    rows: Vec<Vec<WeightedIndex<f64>>>,
}

impl<'a> Simulator<'a> {
    pub fn new(mixture: &'a PatternMixture) -> Result<Self> {
        let iota = sampler(mixture.iota_init(), "initial distribution")?;
        let rows = mixture
            .patterns()
            .iter()
            .map(|p| {
                (0..mixture.n())
                    .map(|s| sampler(p.row(s), "pattern row"))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            mixture,
            iota,
            rows,
        })
    }

    /// Draws one state sequence (1-based states) of `length` events.
    pub fn run<R: Rng + ?Sized>(&self, theta: &[f64], length: usize, rng: &mut R) -> Result<Vec<usize>> {
        self.mixture.check_theta(theta)?;
        if length == 0 {
            return Err(Error::InvalidArgument("trace length must be at least 1".into()));
        }
        let pick = sampler(theta, "strategy")?;
        let mut s = self.iota.sample(rng);
        let mut out = Vec::with_capacity(length);
        out.push(s + 1);
        for _ in 1..length {
            let k = pick.sample(rng);
            s = self.rows[k][s].sample(rng);
            out.push(s + 1);
        }
        Ok(out)
    }
}

/// One trace of `length` events drawn from the generative process.
pub fn simulate<R: Rng + ?Sized>(
    mixture: &PatternMixture,
    theta: &[f64],
    length: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    Simulator::new(mixture)?.run(theta, length, rng)
}

/// One trace per strategy, drawn sequentially from a single seeded stream.
pub fn simulate_population(
    mixture: &PatternMixture,
    strategies: &[UserStrategy],
    length: usize,
    seed: u64,
) -> Result<Vec<Trace>> {
    let sim = Simulator::new(mixture)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    strategies
        .iter()
        .map(|s| Trace::new(s.user_id.clone(), sim.run(s.theta(), length, &mut rng)?))
        .collect()
}
