//! Replication runner and result aggregation.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use super::rng::{demand_stream, environment_stream};
use super::scenario::Scenario;
use super::slope::loglog_slope;
use crate::demand::{purchase_prob_conditional, sample_demand, DriftTotals, EnvironmentState};
use crate::error::{Error, ErrorKind};
use crate::policies::{
    benchmark_probability, oracle_policy_price, Observation, Policy, PolicyDecision, PolicyDiagnostics, PolicyKind,
};

/// Master seed used when none is given.
pub const DEFAULT_MASTER_SEED: u64 = 20_240_817;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretTrajectory {
    pub scenario: String,
    pub policy: PolicyKind,
    /// Replication index.
    pub seed: usize,
    /// Cumulative regret after each round.
    pub cumulative: Vec<f64>,
    /// Oracle expected revenue in each round, over the same segments.
    pub oracle_revenue: Vec<f64>,
    pub diagnostics: PolicyDiagnostics,
    pub drift: DriftTotals,
}

impl RegretTrajectory {
    pub fn horizon(&self) -> usize {
        self.cumulative.len()
    }

    /// Cumulative regret after round `t` (1-based).
    pub fn at(&self, t: usize) -> Option<f64> {
        t.checked_sub(1).and_then(|i| self.cumulative.get(i)).copied()
    }
}

/// A replication that aborted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationFailure {
    pub scenario: String,
    pub policy: PolicyKind,
    pub seed: usize,
    pub round: usize,
    pub segment: Option<usize>,
    pub message: String,
    #[serde(skip)]
    pub kind: Option<ErrorKind>,
}

impl fmt::Display for ReplicationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/seed {} failed at round {}",
            self.scenario, self.policy, self.seed, self.round
        )?;
        if let Some(l) = self.segment {
            write!(f, ", segment {l}")?;
        }
        write!(f, ": {}", self.message)
    }
}

struct Failer<'a> {
    scenario: &'a str,
    policy: PolicyKind,
    seed: usize,
}

impl Failer<'_> {
    fn fail(&self, round: usize, segment: Option<usize>, e: Error) -> ReplicationFailure {
        ReplicationFailure {
            scenario: self.scenario.to_owned(),
            policy: self.policy,
            seed: self.seed,
            round,
            segment,
            message: e.to_string(),
            kind: Some(e.kind()),
        }
    }
}

/// Runs one policy for the scenario's horizon against replication `seed`.
///
/// Regret is computed analytically from the benchmark purchase probability;
/// only the realized sales fed to the policy are random.
pub fn run_replication(
    scenario: &Scenario,
    policy: PolicyKind,
    seed: usize,
    master: u64,
) -> Result<RegretTrajectory, ReplicationFailure> {
    let name = scenario.name();
    let failer = Failer {
        scenario: name,
        policy,
        seed,
    };
    let mode = scenario.policy_config.oracle;
    let mut env = EnvironmentState::new(scenario.env.clone()).map_err(|e| failer.fail(0, None, e))?;
    let mut agent =
        Policy::new(policy, &scenario.policy_config, &scenario.policy_context).map_err(|e| failer.fail(0, None, e))?;
    let mut env_rng = environment_stream(master, name, seed);
    let mut demand_rng = demand_stream(master, name, policy.as_str(), seed);

    let horizon = scenario.config.horizon;
    let l_count = scenario.env.segments();
    let mut in_scope = vec![false; l_count];
    for &l in &scenario.regret_segments {
        in_scope[l] = true;
    }
    let mut cumulative = Vec::with_capacity(horizon);
    let mut oracle_revenue = Vec::with_capacity(horizon);
    let mut total = 0.0;
    let mut observations = Vec::with_capacity(l_count);

    for t in 1..=horizon {
        let round = env.advance(&mut env_rng).map_err(|e| failer.fail(t, None, e))?;
        let mut star = vec![f64::NAN; l_count];
        for (l, s) in star.iter_mut().enumerate() {
            if in_scope[l] || matches!(agent, Policy::Oracle(m) if m == mode) {
                *s = oracle_policy_price(&round, l, mode).map_err(|e| failer.fail(t, Some(l), e))?;
            }
        }
        let decision = match agent {
            Policy::Oracle(m) if m == mode => PolicyDecision {
                prices: star.clone(),
                ..Default::default()
            },
            _ => agent.decide(&round).map_err(|e| failer.fail(t, None, e))?,
        };

        let mut regret = 0.0;
        let mut best = 0.0;
        observations.clear();
        for l in 0..l_count {
            let n = round.arrivals[l];
            let p = decision.prices[l];
            if !p.is_finite() {
                return Err(failer.fail(t, Some(l), Error::Numeric(format!("policy posted price {p}"))));
            }
            let q = purchase_prob_conditional(round.alpha[l], &round.params, &round.covariates[l], p);
            let y = sample_demand(n, q, &mut demand_rng);
            if in_scope[l] {
                let nf = n as f64;
                let top = nf * star[l] * benchmark_probability(&round, l, star[l], mode);
                regret += top - nf * p * benchmark_probability(&round, l, p, mode);
                best += top;
            }
            observations.push(Observation {
                y,
                n,
                x: round.covariates[l].clone(),
                p,
            });
        }
        agent.update(&observations).map_err(|e| failer.fail(t, None, e))?;
        if !regret.is_finite() {
            return Err(failer.fail(t, None, Error::Numeric(format!("regret {regret} is not finite"))));
        }
        total += regret;
        cumulative.push(total);
        oracle_revenue.push(best);
    }

    Ok(RegretTrajectory {
        scenario: name.to_owned(),
        policy,
        seed,
        cumulative,
        oracle_revenue,
        diagnostics: agent.diagnostics(),
        drift: env.drift_totals().clone(),
    })
}

/// One line of the checkpoint table. `seed == None` marks the seed average.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub scenario: String,
    pub policy: PolicyKind,
    pub seed: Option<usize>,
    pub t: usize,
    /// Absent when the replication failed.
    pub cum_regret: Option<f64>,
    /// Standard error across seeds (average rows only).
    pub std_error: Option<f64>,
    /// Seeds contributing to an average row.
    pub seeds: usize,
    /// `100 (R_base - R) / R_base` against the unshrunken baseline.
    pub relative_regret_pct: Option<f64>,
    pub slope: Option<f64>,
    pub slope_se: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<ReplicationFailure>,
}

impl ResultTable {
    /// Seed-average row for `(scenario, policy, t)`.
    pub fn mean(&self, scenario: &str, policy: PolicyKind, t: usize) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.scenario == scenario && r.policy == policy && r.t == t && r.seed.is_none())
    }
}

/// Output of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct Experiment {
    pub scenario: Scenario,
    pub master_seed: u64,
    pub table: ResultTable,
    /// Successful replications sorted by (policy, seed).
    pub trajectories: Vec<RegretTrajectory>,
}

impl Experiment {
    /// Seed-averaged trajectory of a policy.
    pub fn mean_trajectory(&self, policy: PolicyKind) -> Option<Vec<f64>> {
        mean_trajectory(self.trajectories.iter().filter(|t| t.policy == policy))
    }
}

pub fn relative_regret(base: f64, other: f64) -> Option<f64> {
    (base > 0.0 && base.is_finite() && other.is_finite()).then(|| 100.0 * (base - other) / base)
}

/// Pointwise mean over trajectories of equal length.
pub fn mean_trajectory<'a>(trajectories: impl IntoIterator<Item = &'a RegretTrajectory>) -> Option<Vec<f64>> {
    let mut sum: Option<Vec<f64>> = None;
    let mut count = 0usize;
    for t in trajectories {
        match &mut sum {
            None => sum = Some(t.cumulative.clone()),
            Some(s) => {
                let n = s.len().min(t.cumulative.len());
                s.truncate(n);
                s.iter_mut().zip(&t.cumulative).for_each(|(a, b)| *a += b);
            }
        }
        count += 1;
    }
    sum.map(|mut s| {
        s.iter_mut().for_each(|v| *v /= count as f64);
        s
    })
}

fn slope_upto(traj: &[f64], t: usize, window: f64) -> (Option<f64>, Option<f64>) {
    match loglog_slope(&traj[..t.min(traj.len())], window) {
        Ok(s) => (Some(s.slope), Some(s.std_error)),
        Err(_) => (None, None),
    }
}

/// Builds the checkpoint table from trajectories of one or more scenarios.
///
/// `settings` maps scenario names to `(checkpoints, seeds, slope window)`.
/// Seeds without a trajectory get absent rows.
pub fn summarize(
    trajectories: &[RegretTrajectory],
    failures: &[ReplicationFailure],
    settings: &BTreeMap<String, (Vec<usize>, usize, f64)>,
) -> ResultTable {
    let mut by_key: BTreeMap<(&str, PolicyKind), BTreeMap<usize, &RegretTrajectory>> = BTreeMap::new();
    for tr in trajectories {
        by_key.entry((&tr.scenario, tr.policy)).or_default().insert(tr.seed, tr);
    }
    for f in failures {
        by_key.entry((&f.scenario, f.policy)).or_default();
    }
    let mut rows = Vec::new();
    for ((scenario, policy), runs) in &by_key {
        let Some((checkpoints, seeds, window)) = settings.get(*scenario) else {
            continue;
        };
        let base = (*policy != PolicyKind::Unshrunken)
            .then(|| by_key.get(&(*scenario, PolicyKind::Unshrunken)))
            .flatten();
        let mean = mean_trajectory(runs.values().copied());
        let base_mean = base.and_then(|b| mean_trajectory(b.values().copied()));
        let max_seed = runs.keys().next_back().map_or(0, |s| s + 1).max(*seeds);
        for &t in checkpoints {
            let values: Vec<f64> = runs.values().filter_map(|r| r.at(t)).collect();
            let (cum, se) = if values.is_empty() {
                (None, None)
            } else {
                let n = values.len() as f64;
                let m = values.iter().sum::<f64>() / n;
                let se = if values.len() > 1 {
                    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
                } else {
                    0.0
                };
                (Some(m), Some(se))
            };
            let base_at = base_mean.as_ref().and_then(|b| b.get(t - 1)).copied();
            let (slope, slope_se) = match &mean {
                Some(m) if m.len() >= t => slope_upto(m, t, *window),
                _ => (None, None),
            };
            rows.push(ResultRow {
                scenario: (*scenario).to_owned(),
                policy: *policy,
                seed: None,
                t,
                cum_regret: cum,
                std_error: se,
                seeds: values.len(),
                relative_regret_pct: base_at.zip(cum).and_then(|(b, c)| relative_regret(b, c)),
                slope,
                slope_se,
            });
            for seed in 0..max_seed {
                let run = runs.get(&seed);
                let cum = run.and_then(|r| r.at(t));
                let base_at = base.and_then(|b| b.get(&seed)).and_then(|r| r.at(t));
                let (slope, slope_se) = match run {
                    Some(r) if r.horizon() >= t => slope_upto(&r.cumulative, t, *window),
                    _ => (None, None),
                };
                rows.push(ResultRow {
                    scenario: (*scenario).to_owned(),
                    policy: *policy,
                    seed: Some(seed),
                    t,
                    cum_regret: cum,
                    std_error: None,
                    seeds: usize::from(cum.is_some()),
                    relative_regret_pct: base_at.zip(cum).and_then(|(b, c)| relative_regret(b, c)),
                    slope,
                    slope_se,
                });
            }
        }
    }
    let mut failures = failures.to_vec();
    failures.sort_by(|a, b| (&a.scenario, a.policy, a.seed).cmp(&(&b.scenario, b.policy, b.seed)));
    ResultTable { rows, failures }
}

/// Runs every `(policy, seed)` pair, at most `parallelism` at a time, and
/// aggregates the results. Output does not depend on `parallelism`.
pub fn run_experiment(
    scenario: &Scenario,
    policies: &[PolicyKind],
    seeds: usize,
    parallelism: usize,
    master: u64,
) -> crate::error::Result<Experiment> {
    if seeds == 0 {
        return Err(Error::Config("at least one seed is required".into()));
    }
    if policies.is_empty() {
        return Err(Error::Config("no policies selected".into()));
    }
    let mut policies = policies.to_vec();
    policies.sort();
    policies.dedup();
    let jobs: Vec<(PolicyKind, usize)> = policies.iter().flat_map(|&p| (0..seeds).map(move |s| (p, s))).collect();
    let run = || -> Vec<_> {
        jobs.par_iter()
            .map(|&(p, s)| run_replication(scenario, p, s, master))
            .collect()
    };
    let outcomes = if parallelism <= 1 {
        jobs.iter()
            .map(|&(p, s)| run_replication(scenario, p, s, master))
            .collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {parallelism} worker threads: {e}")))?
            .install(run)
    };
    let mut trajectories = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(t) => trajectories.push(t),
            Err(f) => {
                log::error!("{f}");
                failures.push(f);
            }
        }
    }
    trajectories.sort_by_key(|t| (t.policy, t.seed));
    let mut settings = BTreeMap::new();
    settings.insert(
        scenario.name().to_owned(),
        (scenario.checkpoints.clone(), seeds, scenario.config.slope_window),
    );
    let table = summarize(&trajectories, &failures, &settings);
    Ok(Experiment {
        scenario: scenario.clone(),
        master_seed: master,
        table,
        trajectories,
    })
}
