//! Periodic swarm dispersion guided by an external archive.
//!
//! The archive keeps good historical positions. Every `period` iterations a batch of
//! target positions is synthesized from it (per-dimension roulette donation, then one
//! generation of crossover and mutation), the best targets by fitness and distance from
//! the swarm center are kept, and a fraction of the swarm is relocated onto them. The
//! personal bests of relocated particles are left untouched.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::diversity::{center, euclidean_distance};
use crate::error::{Error, Result};
use crate::objective::ObjectiveProblem;
use crate::rng::Rng;
use crate::swarm::{DispersedUpdate, Swarm};

/// Number of initial generations during which every generation's global best is offered
/// to the archive.
pub const WARMUP_GENERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RelocationPolicy {
    LowFitness,
    Idle,
    #[default]
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialVelocity {
    #[default]
    Zero,
    Random,
    Previous,
}

macro_rules! keyword_enum {
    ($ty:ty, $what:literal, { $($name:literal => $variant:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($name => Ok($variant),)+
                    other => Err(Error::config(format!(
                        concat!("unknown ", $what, " `{}` (expected one of: {})"),
                        other,
                        [$($name),+].join(", ")
                    ))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let name = [$(($variant, $name)),+]
                    .into_iter()
                    .find(|(v, _)| v == self)
                    .map(|(_, n)| n)
                    .unwrap_or("?");
                f.write_str(name)
            }
        }
    };
}

keyword_enum!(RelocationPolicy, "relocation policy", {
    "low_fitness" => RelocationPolicy::LowFitness,
    "idle" => RelocationPolicy::Idle,
    "hybrid" => RelocationPolicy::Hybrid,
});

keyword_enum!(InitialVelocity, "initial velocity", {
    "zero" => InitialVelocity::Zero,
    "random" => InitialVelocity::Random,
    "previous" => InitialVelocity::Previous,
});

keyword_enum!(DispersedUpdate, "post-relocation regime", {
    "eq1" => DispersedUpdate::Standard,
    "eq1_low_inertia" => DispersedUpdate::LowInertia,
    "eq4" => DispersedUpdate::Contracted,
});

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionConfig {
    /// Iterations between dispersion events.
    pub period: usize,
    /// Fraction of the swarm relocated per event.
    pub rate: f64,
    pub archive_capacity: usize,
    pub policy: RelocationPolicy,
    pub initial_velocity: InitialVelocity,
    pub post_regime: DispersedUpdate,
    /// Roulette-generated points per event.
    pub candidate_count: usize,
    /// Relative global-best improvement that triggers an archive replacement after warm-up.
    pub improvement_delta: f64,
    /// `None` means "same as `period`".
    pub idle_threshold: Option<usize>,
    /// Weight of the fitness rank against the distance rank.
    pub weight_alpha: f64,
    pub crossover_prob: f64,
    /// `None` means `1 / dim`.
    pub mutation_prob: Option<f64>,
    /// Mutation standard deviation as a fraction of the search range.
    pub mutation_sigma_frac: f64,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        DispersionConfig {
            period: 30,
            rate: 0.45,
            archive_capacity: 100,
            policy: RelocationPolicy::Hybrid,
            initial_velocity: InitialVelocity::Zero,
            post_regime: DispersedUpdate::Contracted,
            candidate_count: 100,
            improvement_delta: 0.01,
            idle_threshold: None,
            weight_alpha: 0.5,
            crossover_prob: 0.9,
            mutation_prob: None,
            mutation_sigma_frac: 0.1,
        }
    }
}

impl DispersionConfig {
    pub fn idle_threshold(&self) -> usize {
        self.idle_threshold.unwrap_or(self.period)
    }

    pub fn mutation_prob(&self, dim: usize) -> f64 {
        self.mutation_prob.unwrap_or(1.0 / dim.max(1) as f64)
    }

    /// Particles relocated per event for a swarm of `m`.
    pub fn relocated_count(&self, m: usize) -> usize {
        (self.rate * m as f64).floor() as usize
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.period == 0 {
            return Err(Error::config("dispersion period must be at least 1"));
        }
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return Err(Error::config(format!("dispersion rate must lie in (0, 1], got {}", self.rate)));
        }
        let k = self.relocated_count(m);
        if k < 1 || k >= m {
            return Err(Error::config(format!(
                "dispersion rate {} relocates {k} of {m} particles; need 1 <= k < m",
                self.rate
            )));
        }
        if self.archive_capacity < 2 {
            return Err(Error::config("archive capacity must be at least 2"));
        }
        if self.candidate_count == 0 {
            return Err(Error::config("candidate count must be at least 1"));
        }
        if self.idle_threshold == Some(0) {
            return Err(Error::config("idle threshold must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.weight_alpha) {
            return Err(Error::config("weight alpha must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return Err(Error::config("crossover probability must lie in [0, 1]"));
        }
        if self.mutation_prob.is_some_and(|p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::config("mutation probability must lie in [0, 1]"));
        }
        if !(self.mutation_sigma_frac >= 0.0) || !(self.improvement_delta >= 0.0) {
            return Err(Error::config("mutation sigma and improvement delta must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub position: Vec<f64>,
    pub fitness: f64,
}

/// Fixed-capacity store of good positions, plus the two bound vectors used as extra
/// roulette donors.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalArchive {
    entries: Vec<ArchiveEntry>,
    extremes: [ArchiveEntry; 2],
}

/// Fills an archive of `capacity` uniformly random in-bound positions.
pub fn init_archive(
    problem: &mut ObjectiveProblem,
    capacity: usize,
    rng: &mut Rng,
) -> Result<ExternalArchive> {
    if capacity < 2 {
        return Err(Error::config("archive capacity must be at least 2"));
    }
    let dim = problem.dim();
    let mut entries = Vec::with_capacity(capacity);
    for _ in 0..capacity {
        let position: Vec<f64> = (0..dim)
            .map(|d| rng.random_range(problem.lower()[d]..=problem.upper()[d]))
            .collect();
        let fitness = problem.evaluate(&position)?;
        entries.push(ArchiveEntry { position, fitness });
    }
    let upper = problem.upper().to_vec();
    let lower = problem.lower().to_vec();
    let extremes = [
        ArchiveEntry {
            fitness: problem.evaluate(&upper)?,
            position: upper,
        },
        ArchiveEntry {
            fitness: problem.evaluate(&lower)?,
            position: lower,
        },
    ];
    Ok(ExternalArchive { entries, extremes })
}

impl ExternalArchive {
    /// Archive over explicit entries; the extremes are taken from `problem`'s bounds.
    pub fn from_entries(problem: &mut ObjectiveProblem, entries: Vec<ArchiveEntry>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::config("archive capacity must be at least 2"));
        }
        let upper = problem.upper().to_vec();
        let lower = problem.lower().to_vec();
        Ok(ExternalArchive {
            entries,
            extremes: [
                ArchiveEntry {
                    fitness: problem.evaluate(&upper)?,
                    position: upper,
                },
                ArchiveEntry {
                    fitness: problem.evaluate(&lower)?,
                    position: lower,
                },
            ],
        })
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn capacity(&self) -> usize {
        self.entries.len()
    }

    /// `[x_max, x_min]`.
    pub fn extremes(&self) -> &[ArchiveEntry; 2] {
        &self.extremes
    }

    /// The entries followed by `x_max` and `x_min`, the donor table of the roulette.
    pub fn donors(&self) -> impl Iterator<Item = &ArchiveEntry> {
        self.entries.iter().chain(self.extremes.iter())
    }

    fn worst_index(&self) -> usize {
        let mut worst = 0;
        for (i, e) in self.entries.iter().enumerate() {
            if e.fitness > self.entries[worst].fitness {
                worst = i;
            }
        }
        worst
    }

    /// Warm-up rule: `gbest` replaces the worst entry if it is strictly better.
    pub fn warmup_update(&mut self, position: &[f64], fitness: f64) -> bool {
        let worst = self.worst_index();
        if fitness < self.entries[worst].fitness {
            self.entries[worst] = ArchiveEntry {
                position: position.to_vec(),
                fitness,
            };
            true
        } else {
            false
        }
    }

    /// Steady-state rule: on a relative improvement above `delta`, the entry closest to
    /// the archive mean is replaced by the new global best.
    pub fn steady_update(&mut self, old_fitness: f64, position: &[f64], fitness: f64, delta: f64) -> bool {
        if (fitness - old_fitness).abs() <= delta * old_fitness.abs().max(1e-12) {
            return false;
        }
        let positions: Vec<&[f64]> = self.entries.iter().map(|e| e.position.as_slice()).collect();
        let mean = center(&positions).expect("archive is non-empty");
        let mut closest = 0;
        let mut closest_dist = f64::INFINITY;
        for (i, e) in self.entries.iter().enumerate() {
            let d = euclidean_distance(&e.position, &mean).expect("archive entries share the dimension");
            if d < closest_dist {
                closest = i;
                closest_dist = d;
            }
        }
        self.entries[closest] = ArchiveEntry {
            position: position.to_vec(),
            fitness,
        };
        true
    }
}

/// Midranks (1-based) of `values` in ascending order; ties share the average rank.
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Combined rank score in `(0, 1]`: `alpha` times the fitness rank (lower fitness
/// scores higher) plus `1 - alpha` times the distance rank (farther scores higher).
pub fn rank_scores(fitness: &[f64], distance: &[f64], alpha: f64) -> Vec<f64> {
    let n = fitness.len() as f64;
    let fit_ranks = midranks(fitness);
    let dist_ranks = midranks(distance);
    fit_ranks
        .iter()
        .zip(&dist_ranks)
        .map(|(fr, dr)| alpha * (n - fr + 1.0) / n + (1.0 - alpha) * dr / n)
        .collect()
}

fn distances_to(points: impl Iterator<Item = impl AsRef<[f64]>>, target: &[f64]) -> Result<Vec<f64>> {
    points.map(|p| euclidean_distance(p.as_ref(), target)).collect()
}

/// Roulette weights over the archive entries followed by `x_max` and `x_min`.
pub fn build_roulette(archive: &ExternalArchive, swarm_center: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let fitness: Vec<f64> = archive.donors().map(|e| e.fitness).collect();
    let distance = distances_to(archive.donors().map(|e| e.position.as_slice()), swarm_center)?;
    let scores = rank_scores(&fitness, &distance, alpha);
    let total: f64 = scores.iter().sum();
    Ok(scores.into_iter().map(|s| s / total).collect())
}

/// `count` points whose every coordinate is donated by an independently
/// roulette-selected donor (see [`ExternalArchive::donors`]).
pub fn generate_candidates(
    archive: &ExternalArchive,
    weights: &[f64],
    count: usize,
    rng: &mut Rng,
) -> Result<Vec<Vec<f64>>> {
    let donors: Vec<&ArchiveEntry> = archive.donors().collect();
    if weights.len() != donors.len() {
        return Err(Error::domain(format!(
            "{} roulette weights for {} donors",
            weights.len(),
            donors.len()
        )));
    }
    let wheel = WeightedIndex::new(weights).map_err(|e| Error::domain(format!("invalid roulette weights: {e}")))?;
    let dim = donors[0].position.len();
    Ok((0..count)
        .map(|_| (0..dim).map(|d| donors[wheel.sample(rng)].position[d]).collect())
        .collect())
}

/// Genetic operator settings for one mating-pool generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneticOperators {
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub mutation_sigma_frac: f64,
}

impl GeneticOperators {
    pub fn from_config(cfg: &DispersionConfig, dim: usize) -> Self {
        GeneticOperators {
            crossover_prob: cfg.crossover_prob,
            mutation_prob: cfg.mutation_prob(dim),
            mutation_sigma_frac: cfg.mutation_sigma_frac,
        }
    }
}

/// Pools the candidates with the archive, produces one offspring generation by random
/// pairing, uniform crossover and per-gene Gaussian mutation, and returns the evaluated
/// pool followed by the evaluated offspring.
pub fn mating_pool_evolve(
    candidates: Vec<Vec<f64>>,
    archive: &ExternalArchive,
    problem: &mut ObjectiveProblem,
    ops: GeneticOperators,
    rng: &mut Rng,
) -> Result<Vec<ArchiveEntry>> {
    if candidates.is_empty() {
        return Err(Error::domain("mating pool needs at least one candidate"));
    }
    let mut pool = Vec::with_capacity(2 * (candidates.len() + archive.capacity()));
    for position in candidates {
        let fitness = problem.evaluate(&position)?;
        pool.push(ArchiveEntry { position, fitness });
    }
    pool.extend(archive.entries().iter().cloned());

    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.shuffle(rng);
    let mut offspring: Vec<Vec<f64>> = Vec::with_capacity(pool.len());
    for pair in order.chunks(2) {
        match *pair {
            [a, b] => {
                let mut x = pool[a].position.clone();
                let mut y = pool[b].position.clone();
                if rng.random::<f64>() < ops.crossover_prob {
                    for d in 0..x.len() {
                        if rng.random::<bool>() {
                            std::mem::swap(&mut x[d], &mut y[d]);
                        }
                    }
                }
                offspring.push(x);
                offspring.push(y);
            }
            [a] => offspring.push(pool[a].position.clone()),
            _ => unreachable!(),
        }
    }

    for child in &mut offspring {
        for (d, gene) in child.iter_mut().enumerate() {
            if rng.random::<f64>() < ops.mutation_prob {
                let sigma = ops.mutation_sigma_frac * problem.range(d);
                if sigma > 0.0 {
                    let noise: f64 = Normal::new(0.0, sigma).expect("positive sigma").sample(rng);
                    *gene += noise;
                }
            }
        }
        problem.clamp(child);
    }
    for position in offspring {
        let fitness = problem.evaluate(&position)?;
        pool.push(ArchiveEntry { position, fitness });
    }
    Ok(pool)
}

/// The `k` pool members with the highest combined rank score, best first.
pub fn select_targets(pool: &[ArchiveEntry], k: usize, swarm_center: &[f64], alpha: f64) -> Result<Vec<Vec<f64>>> {
    if k > pool.len() {
        return Err(Error::domain(format!("{k} targets requested from a pool of {}", pool.len())));
    }
    let fitness: Vec<f64> = pool.iter().map(|e| e.fitness).collect();
    let distance = distances_to(pool.iter().map(|e| e.position.as_slice()), swarm_center)?;
    let scores = rank_scores(&fitness, &distance, alpha);
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    Ok(order[..k].iter().map(|&i| pool[i].position.clone()).collect())
}

/// Indices of the particles to relocate.
pub fn select_relocation_indices(
    swarm: &Swarm,
    policy: RelocationPolicy,
    k: usize,
    idle_threshold: usize,
) -> Result<Vec<usize>> {
    let m = swarm.particles.len();
    if k == 0 || k >= m {
        return Err(Error::domain(format!("cannot relocate {k} of {m} particles")));
    }
    let p = &swarm.particles;
    let worst_first = |a: &usize, b: &usize| p[*b].fitness.total_cmp(&p[*a].fitness);
    let mut all: Vec<usize> = (0..m).collect();
    let chosen = match policy {
        RelocationPolicy::LowFitness => {
            all.sort_by(worst_first);
            all.truncate(k);
            all
        }
        RelocationPolicy::Idle => {
            all.sort_by(|a, b| p[*b].idle_count.cmp(&p[*a].idle_count).then_with(|| worst_first(a, b)));
            all.truncate(k);
            all
        }
        RelocationPolicy::Hybrid => {
            let (mut idle, mut active): (Vec<usize>, Vec<usize>) =
                all.into_iter().partition(|&i| p[i].idle_count >= idle_threshold);
            idle.sort_by(worst_first);
            active.sort_by(worst_first);
            idle.truncate(k);
            let missing = k - idle.len();
            idle.extend(active.into_iter().take(missing));
            idle
        }
    };
    Ok(chosen)
}

/// Relocates particle `indices[j]` onto a randomly assigned target. Personal bests are
/// kept; the particle enters the post-relocation regime for `cfg.period` iterations.
pub fn disperse(
    swarm: &mut Swarm,
    problem: &mut ObjectiveProblem,
    mut targets: Vec<Vec<f64>>,
    indices: &[usize],
    cfg: &DispersionConfig,
    rng: &mut Rng,
) -> Result<()> {
    if targets.len() != indices.len() {
        return Err(Error::domain(format!(
            "{} targets for {} relocated particles",
            targets.len(),
            indices.len()
        )));
    }
    let mut seen = vec![false; swarm.particles.len()];
    for &i in indices {
        if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
            return Err(Error::domain(format!("invalid or duplicate relocation index {i}")));
        }
    }
    targets.shuffle(rng);
    let until = swarm.iter + cfg.period;
    for (&i, target) in indices.iter().zip(targets) {
        let p = &mut swarm.particles[i];
        match cfg.initial_velocity {
            InitialVelocity::Zero => p.velocity.iter_mut().for_each(|v| *v = 0.0),
            InitialVelocity::Random => {
                for (d, v) in p.velocity.iter_mut().enumerate() {
                    let r = problem.range(d);
                    *v = rng.random_range(-r..=r);
                }
            }
            InitialVelocity::Previous => {}
        }
        p.fitness = problem.evaluate(&target)?;
        p.position = target;
        p.idle_count = 0;
        p.dispersed_until = Some(until);
    }
    Ok(())
}

/// True on every positive multiple of `period`.
pub fn dispersion_due(iter: usize, period: usize) -> bool {
    period > 0 && iter > 0 && iter % period == 0
}

/// Diversity around one dispersion event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionEvent {
    pub iter: usize,
    pub diversity_before: f64,
    pub diversity_after: f64,
}

/// Archive plus configuration and random stream of one dispersing run.
#[derive(Debug, Clone)]
pub struct DispersionEngine {
    cfg: DispersionConfig,
    archive: ExternalArchive,
    rng: Rng,
}

impl DispersionEngine {
    pub fn new(cfg: DispersionConfig, problem: &mut ObjectiveProblem, mut rng: Rng) -> Result<Self> {
        let archive = init_archive(problem, cfg.archive_capacity, &mut rng)?;
        Ok(DispersionEngine { cfg, archive, rng })
    }

    pub fn config(&self) -> &DispersionConfig {
        &self.cfg
    }

    pub fn archive(&self) -> &ExternalArchive {
        &self.archive
    }

    /// Archive maintenance after the step that completed generation `generation`
    /// (0-based). `previous_gbest` is the global best fitness before that step.
    pub fn observe(&mut self, swarm: &Swarm, generation: usize, previous_gbest: f64) {
        if generation < WARMUP_GENERATIONS {
            self.archive.warmup_update(&swarm.gbest_pos, swarm.gbest_fit);
        } else if swarm.gbest_fit < previous_gbest {
            self.archive.steady_update(
                previous_gbest,
                &swarm.gbest_pos,
                swarm.gbest_fit,
                self.cfg.improvement_delta,
            );
        }
    }

    pub fn is_due(&self, iter: usize) -> bool {
        dispersion_due(iter, self.cfg.period)
    }

    /// One full dispersion event on `swarm`. Returns the relocated indices.
    pub fn disperse(&mut self, swarm: &mut Swarm, problem: &mut ObjectiveProblem) -> Result<Vec<usize>> {
        let m = swarm.particles.len();
        let k = self.cfg.relocated_count(m);
        let positions: Vec<&[f64]> = swarm.particles.iter().map(|p| p.position.as_slice()).collect();
        let swarm_center = center(&positions)?;
        let weights = build_roulette(&self.archive, &swarm_center, self.cfg.weight_alpha)?;
        let candidates = generate_candidates(&self.archive, &weights, self.cfg.candidate_count, &mut self.rng)?;
        let ops = GeneticOperators::from_config(&self.cfg, problem.dim());
        let pool = mating_pool_evolve(candidates, &self.archive, problem, ops, &mut self.rng)?;
        let targets = select_targets(&pool, k, &swarm_center, self.cfg.weight_alpha)?;
        let indices = select_relocation_indices(swarm, self.cfg.policy, k, self.cfg.idle_threshold())?;
        disperse(swarm, problem, targets, &indices, &self.cfg, &mut self.rng)?;
        Ok(indices)
    }
}
