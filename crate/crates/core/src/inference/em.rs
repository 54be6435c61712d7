//! EM for a mixture of Markov chains where the pattern is re-drawn at every
//! step.
//!
//! For user `m` with strategy `theta_m`, a transition `s -> s'` has
//! probability `sum_k theta_m(k) P_k(s, s')`. The E-step assigns each
//! observed transition a responsibility vector over patterns; the M-step
//! re-estimates `theta_m`, every `P_k` and the shared initial distribution
//! from responsibility-weighted counts plus a pseudo-count `smoothing`.
//! Responsibilities only depend on `(user, s, s')`, so the implementation
//! works on per-user transition counts.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::model::{Matrix, PatternMixture, StateSpace, Trace, UserStrategy};
use crate::numeric::kahan_sum;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    pub k: usize,
    pub max_iters: usize,
    /// Stop once the log-likelihood improves by less than this.
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Dirichlet pseudo-count added to every estimated entry.
    pub smoothing: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            k: 2,
            max_iters: 500,
            tol: 1e-8,
            restarts: 10,
            seed: 0,
            smoothing: 1e-6,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("K must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if !(self.smoothing >= 0.0) || !self.smoothing.is_finite() {
            return Err(Error::InvalidArgument("smoothing must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Responsibilities for one distinct transition of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionResponsibility {
    /// 1-based source state.
    pub from: usize,
    /// 1-based target state.
    pub to: usize,
    /// Occurrences of this transition in the user's trace.
    pub count: usize,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserResponsibilities {
    pub user_id: String,
    pub transitions: Vec<TransitionResponsibility>,
    /// Transition at trace position `t` (i.e. `s_t -> s_{t+1}`) is
    /// `transitions[positions[t]]`.
    positions: Vec<usize>,
}

impl UserResponsibilities {
    /// Responsibility vector of the transition leaving position `t`.
    pub fn at(&self, t: usize) -> &[f64] {
        &self.transitions[self.positions[t]].gamma
    }

    /// Number of transitions in the trace.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Responsibilities {
    space: StateSpace,
    k: usize,
    pub users: Vec<UserResponsibilities>,
}

impl Responsibilities {
    /// `gamma_{m,t}` for user index `m` and trace position `t`.
    pub fn gamma(&self, user: usize, t: usize) -> &[f64] {
        self.users[user].at(t)
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// Per-user sufficient statistics: first state and distinct transitions.
#[derive(Debug, Clone)]
struct UserStats {
    user_id: String,
    first: usize,
    /// `(from, to, count)`, 0-based states, in order of first occurrence.
    pairs: Vec<(usize, usize, usize)>,
    /// Position of the first occurrence of each pair.
    first_pos: Vec<usize>,
    positions: Vec<usize>,
}

fn collect_stats(traces: &[Trace], n: usize) -> Result<Vec<UserStats>> {
    traces
        .iter()
        .map(|t| {
            t.check_states(n)?;
            let mut index: HashMap<(usize, usize), usize> = HashMap::new();
            let mut pairs = Vec::new();
            let mut first_pos = Vec::new();
            let mut positions = Vec::with_capacity(t.len().saturating_sub(1));
            for (pos, (a, b)) in t.transitions().enumerate() {
                let key = (a - 1, b - 1);
                let idx = *index.entry(key).or_insert_with(|| {
                    pairs.push((key.0, key.1, 0));
                    first_pos.push(pos);
                    pairs.len() - 1
                });
                pairs[idx].2 += 1;
                positions.push(idx);
            }
            Ok(UserStats {
                user_id: t.user_id.clone(),
                first: t.events()[0] - 1,
                pairs,
                first_pos,
                positions,
            })
        })
        .collect()
}

fn check_strategies(
    traces_len: usize,
    mixture: &PatternMixture,
    strategies: &[UserStrategy],
) -> Result<()> {
    if strategies.len() != traces_len {
        return Err(Error::Dimension(format!(
            "{} strategies for {traces_len} traces",
            strategies.len()
        )));
    }
    for s in strategies {
        mixture.check_theta(s.theta())?;
    }
    Ok(())
}

fn loglik_stats(stats: &[UserStats], mixture: &PatternMixture, strategies: &[UserStrategy]) -> f64 {
    let terms = stats.iter().zip(strategies).flat_map(|(u, strat)| {
        let theta = strat.theta();
        std::iter::once(mixture.iota_init()[u.first].ln()).chain(u.pairs.iter().map(
            move |&(a, b, c)| {
                let p = kahan_sum(
                    mixture
                        .patterns()
                        .iter()
                        .zip(theta)
                        .map(|(pk, w)| w * pk[(a, b)]),
                );
                c as f64 * p.ln()
            },
        ))
    });
    let mut total = 0.0;
    for t in terms {
        if t == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        total += t;
    }
    total
}

/// Log-likelihood of the traces under the mixture and per-user strategies
/// (`strategies[m]` belongs to `traces[m]`). Returns `-inf` when some event
/// has probability zero.
pub fn log_likelihood(
    traces: &[Trace],
    mixture: &PatternMixture,
    strategies: &[UserStrategy],
) -> Result<f64> {
    check_strategies(traces.len(), mixture, strategies)?;
    let stats = collect_stats(traces, mixture.n())?;
    Ok(loglik_stats(&stats, mixture, strategies))
}

fn e_step_stats(
    stats: &[UserStats],
    mixture: &PatternMixture,
    strategies: &[UserStrategy],
) -> Result<Responsibilities> {
    let k = mixture.k();
    let users = stats
        .iter()
        .zip(strategies)
        .map(|(u, strat)| {
            let theta = strat.theta();
            let transitions = u
                .pairs
                .iter()
                .zip(&u.first_pos)
                .map(|(&(a, b, count), &pos)| {
                    let w: Vec<f64> = (0..k)
                        .map(|j| theta[j] * mixture.patterns()[j][(a, b)])
                        .collect();
                    let den = kahan_sum(w.iter().copied());
                    if den <= 0.0 {
                        return Err(Error::ZeroProbability {
                            user: u.user_id.clone(),
                            position: pos,
                            from: a + 1,
                            to: b + 1,
                        });
                    }
                    Ok(TransitionResponsibility {
                        from: a + 1,
                        to: b + 1,
                        count,
                        gamma: w.into_iter().map(|x| x / den).collect(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(UserResponsibilities {
                user_id: u.user_id.clone(),
                transitions,
                positions: u.positions.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Responsibilities {
        space: mixture.space().clone(),
        k,
        users,
    })
}

/// Posterior pattern responsibilities for every observed transition.
pub fn e_step(
    traces: &[Trace],
    mixture: &PatternMixture,
    strategies: &[UserStrategy],
) -> Result<Responsibilities> {
    check_strategies(traces.len(), mixture, strategies)?;
    let stats = collect_stats(traces, mixture.n())?;
    e_step_stats(&stats, mixture, strategies)
}

/// Normalizes in place; an all-zero vector becomes uniform.
fn normalize(v: &mut [f64]) {
    let sum = kahan_sum(v.iter().copied());
    if sum > 0.0 {
        v.iter_mut().for_each(|x| *x /= sum);
    } else {
        let u = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|x| *x = u);
    }
}

/// Closed-form re-estimation from responsibilities.
pub fn m_step(
    traces: &[Trace],
    resp: &Responsibilities,
    config: &EmConfig,
) -> Result<(PatternMixture, Vec<UserStrategy>)> {
    if resp.users.len() != traces.len() {
        return Err(Error::Dimension(format!(
            "responsibilities for {} users, {} traces",
            resp.users.len(),
            traces.len()
        )));
    }
    let n = resp.space.n_states();
    let k = resp.k;
    let eps = config.smoothing;

    let mut counts = vec![Matrix::zeros(n, n); k];
    let mut strategies = Vec::with_capacity(traces.len());
    for (trace, user) in traces.iter().zip(&resp.users) {
        if user.len() != trace.len().saturating_sub(1) {
            return Err(Error::Dimension(format!(
                "responsibilities for `{}` do not match its trace",
                user.user_id
            )));
        }
        let mut theta = vec![0.0; k];
        for tr in &user.transitions {
            if tr.gamma.len() != k {
                return Err(Error::Dimension("responsibility vector length differs from K".into()));
            }
            let c = tr.count as f64;
            for j in 0..k {
                let w = c * tr.gamma[j];
                theta[j] += w;
                counts[j][(tr.from - 1, tr.to - 1)] += w;
            }
        }
        theta.iter_mut().for_each(|x| *x += eps);
        normalize(&mut theta);
        strategies.push(UserStrategy::new(trace.user_id.clone(), theta)?);
    }

    let patterns = counts
        .into_iter()
        .map(|mut m| {
            for s in 0..n {
                let row = m.row_mut(s);
                row.iter_mut().for_each(|x| *x += eps);
                normalize(row);
            }
            m
        })
        .collect();

    let mut iota = vec![0.0; n];
    for t in traces {
        iota[t.events()[0] - 1] += 1.0;
    }
    iota.iter_mut().for_each(|x| *x += eps);
    normalize(&mut iota);

    let mixture = PatternMixture::new(resp.space.clone(), patterns, iota)?;
    Ok((mixture, strategies))
}

/// Outcome of one EM run from a given starting point.
#[derive(Debug, Clone)]
pub struct EmRun {
    pub mixture: PatternMixture,
    pub strategies: Vec<UserStrategy>,
    /// Log-likelihood at the starting point followed by the value after
    /// every iteration.
    pub trajectory: Vec<f64>,
}

impl EmRun {
    pub fn loglik(&self) -> f64 {
        *self.trajectory.last().expect("trajectory is never empty")
    }

    pub fn iterations(&self) -> usize {
        self.trajectory.len() - 1
    }
}

fn run_stats(
    traces: &[Trace],
    stats: &[UserStats],
    mut mixture: PatternMixture,
    mut strategies: Vec<UserStrategy>,
    config: &EmConfig,
) -> Result<EmRun> {
    let mut prev = loglik_stats(stats, &mixture, &strategies);
    let mut trajectory = vec![prev];
    for _ in 0..config.max_iters {
        let resp = e_step_stats(stats, &mixture, &strategies)?;
        let (m, s) = m_step(traces, &resp, config)?;
        mixture = m;
        strategies = s;
        let ll = loglik_stats(stats, &mixture, &strategies);
        trajectory.push(ll);
        // NaN (both -inf) also stops here.
        if !(ll - prev >= config.tol) {
            break;
        }
        prev = ll;
    }
    Ok(EmRun {
        mixture,
        strategies,
        trajectory,
    })
}

/// Runs EM from an explicit starting point.
pub fn run_em(
    traces: &[Trace],
    init_mixture: PatternMixture,
    init_strategies: Vec<UserStrategy>,
    config: &EmConfig,
) -> Result<EmRun> {
    config.validate()?;
    check_strategies(traces.len(), &init_mixture, &init_strategies)?;
    let stats = collect_stats(traces, init_mixture.n())?;
    run_stats(traces, &stats, init_mixture, init_strategies, config)
}

/// Dirichlet(1, ..., 1) pattern rows, uniform strategies and initial
/// distribution.
fn random_start<R: Rng>(
    space: &StateSpace,
    k: usize,
    traces: &[Trace],
    rng: &mut R,
) -> Result<(PatternMixture, Vec<UserStrategy>)> {
    let n = space.n_states();
    let patterns = (0..k)
        .map(|_| {
            let mut m = Matrix::zeros(n, n);
            for s in 0..n {
                let row = m.row_mut(s);
                for x in row.iter_mut() {
                    *x = rng.sample::<f64, _>(Exp1);
                }
                normalize(row);
            }
            m
        })
        .collect();
    let mixture = PatternMixture::new(space.clone(), patterns, vec![1.0 / n as f64; n])?;
    let strategies = traces
        .iter()
        .map(|t| UserStrategy::new(t.user_id.clone(), vec![1.0 / k as f64; k]))
        .collect::<Result<Vec<_>>>()?;
    Ok((mixture, strategies))
}

/// Best of several EM runs, with patterns in canonical order.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub mixture: PatternMixture,
    pub strategies: Vec<UserStrategy>,
    pub loglik: f64,
    pub iters_per_restart: Vec<usize>,
    pub chosen_restart: usize,
    /// Log-likelihood trajectory of every restart.
    pub trajectories: Vec<Vec<f64>>,
}

impl FitResult {
    /// Tab-separated `restart, iter, loglik` rows with a header.
    pub fn diagnostics_tsv(&self) -> String {
        let mut out = String::from("restart\titer\tloglik\n");
        for (r, traj) in self.trajectories.iter().enumerate() {
            for (i, ll) in traj.iter().enumerate() {
                out.push_str(&format!("{r}\t{i}\t{ll}\n"));
            }
        }
        out
    }
}

/// Fits `config.k` patterns over `space` with `config.restarts` independent
/// random restarts and keeps the run with the highest final log-likelihood
/// (lowest restart index on ties). Patterns are returned in descending
/// order of total strategy weight `sum_m theta_m(k)`.
pub fn em_fit(traces: &[Trace], space: &StateSpace, config: &EmConfig) -> Result<FitResult> {
    config.validate()?;
    if traces.is_empty() {
        return Err(Error::InvalidArgument("no traces to fit".into()));
    }
    let space = space.with_dummy_init(false)?;
    let stats = collect_stats(traces, space.n_states())?;
    let runs = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(r as u64);
            let (m, s) = random_start(&space, config.k, traces, &mut rng)?;
            run_stats(traces, &stats, m, s, config)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut chosen = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.loglik() > runs[chosen].loglik() {
            chosen = i;
        }
    }
    let iters_per_restart = runs.iter().map(EmRun::iterations).collect();
    let trajectories = runs.iter().map(|r| r.trajectory.clone()).collect();
    let best = runs.into_iter().nth(chosen).expect("at least one restart");

    let mut weight = vec![0.0; config.k];
    for s in &best.strategies {
        for (w, t) in weight.iter_mut().zip(s.theta()) {
            *w += t;
        }
    }
    let mut order: Vec<usize> = (0..config.k).collect();
    order.sort_by(|&a, &b| weight[b].total_cmp(&weight[a]).then(a.cmp(&b)));

    Ok(FitResult {
        mixture: best.mixture.permuted(&order)?,
        strategies: best.strategies.iter().map(|s| s.permuted(&order)).collect(),
        loglik: best.loglik(),
        iters_per_restart,
        chosen_restart: chosen,
        trajectories,
    })
}
