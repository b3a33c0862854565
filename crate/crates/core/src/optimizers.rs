//! Complete optimizer runs: GPSO (star), LPSO (ring), DMS-PSO (regrouped sub-swarms)
//! and DSDPSO (star plus periodic dispersion).
//!
//! All drivers derive the problem instance and the initial swarm from the run seed
//! alone, so runs of different algorithms with the same seed start from the same
//! population.

use std::fmt;
use std::str::FromStr;

use crate::dispersion::{DispersionConfig, DispersionEngine, DispersionEvent};
use crate::diversity::position_diversity;
use crate::error::{Error, Result};
use crate::objective::{make_problem, FunctionId, ObjectiveProblem};
use crate::rng::{self, Stream};
use crate::swarm::{init_swarm, step, Acceleration, InertiaSchedule, Partition, Swarm, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Gpso,
    Lpso,
    DmsPso,
    Dsdpso,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Gpso, Algorithm::Lpso, Algorithm::DmsPso, Algorithm::Dsdpso];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Gpso => "gpso",
            Algorithm::Lpso => "lpso",
            Algorithm::DmsPso => "dmspso",
            Algorithm::Dsdpso => "dsdpso",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s.trim())
            .ok_or_else(|| Error::config(format!("unknown algorithm `{s}` (expected gpso, lpso, dmspso or dsdpso)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub algo: Algorithm,
    pub function: FunctionId,
    pub dim: usize,
    pub swarm_size: usize,
    pub max_iter: usize,
    pub acceleration: Acceleration,
    pub w_start: f64,
    pub w_end: f64,
    /// Used by DSDPSO only.
    pub dispersion: DispersionConfig,
    pub dms_group_size: usize,
    pub dms_regroup_period: usize,
    pub seed: u64,
}

impl OptimizerConfig {
    /// 20 particles, 3000 iterations, `c1 = c2 = 2`, inertia 0.9 → 0.4.
    pub fn new(algo: Algorithm, function: FunctionId, dim: usize, seed: u64) -> Self {
        OptimizerConfig {
            algo,
            function,
            dim,
            swarm_size: 20,
            max_iter: 3000,
            acceleration: Acceleration::default(),
            w_start: 0.9,
            w_end: 0.4,
            dispersion: DispersionConfig::default(),
            dms_group_size: 3,
            dms_regroup_period: 5,
            seed,
        }
    }

    pub fn with_algo(&self, algo: Algorithm) -> Self {
        OptimizerConfig { algo, ..self.clone() }
    }

    pub fn schedule(&self) -> InertiaSchedule {
        InertiaSchedule {
            w_start: self.w_start,
            w_end: self.w_end,
            max_iter: self.max_iter,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::config("dim must be at least 1"));
        }
        if self.swarm_size < 2 {
            return Err(Error::config("swarm size must be at least 2"));
        }
        if self.max_iter == 0 {
            return Err(Error::config("iterations must be at least 1"));
        }
        match self.algo {
            Algorithm::DmsPso => {
                if self.dms_group_size == 0 || self.swarm_size % self.dms_group_size != 0 {
                    return Err(Error::config(format!(
                        "dmspso needs the swarm size ({}) to be divisible by the group size ({})",
                        self.swarm_size, self.dms_group_size
                    )));
                }
                if self.dms_regroup_period == 0 {
                    return Err(Error::config("dmspso regroup period must be at least 1"));
                }
            }
            Algorithm::Dsdpso => self.dispersion.validate(self.swarm_size)?,
            Algorithm::Gpso | Algorithm::Lpso => {}
        }
        Ok(())
    }
}

/// Trace of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub final_best: f64,
    /// Global best fitness after each iteration.
    pub best_curve: Vec<f64>,
    /// Position diversity at the end of each iteration.
    pub diversity_curve: Vec<f64>,
    pub evals_used: u64,
    /// DSDPSO only.
    pub dispersion_events: Vec<DispersionEvent>,
    pub seed: u64,
    pub config: OptimizerConfig,
}

/// The problem instance and initial swarm shared by every algorithm for `cfg.seed`.
pub fn initial_state(cfg: &OptimizerConfig, topology: Topology) -> Result<(ObjectiveProblem, Swarm)> {
    let mut problem = make_problem(cfg.function, cfg.dim, cfg.seed)?;
    let swarm = init_swarm(
        &mut problem,
        cfg.swarm_size,
        topology,
        &mut rng::stream(cfg.seed, Stream::Init),
    )?;
    Ok((problem, swarm))
}

fn diversity_of(swarm: &Swarm) -> Result<f64> {
    let positions: Vec<&[f64]> = swarm.particles.iter().map(|p| p.position.as_slice()).collect();
    position_diversity(&positions)
}

struct Trace {
    best: Vec<f64>,
    diversity: Vec<f64>,
}

impl Trace {
    fn new(n: usize) -> Self {
        Trace {
            best: Vec::with_capacity(n),
            diversity: Vec::with_capacity(n),
        }
    }

    fn record(&mut self, swarm: &Swarm) -> Result<()> {
        self.best.push(swarm.gbest_fit);
        self.diversity.push(diversity_of(swarm)?);
        Ok(())
    }

    fn finish(self, cfg: &OptimizerConfig, problem: &ObjectiveProblem, swarm: &Swarm, events: Vec<DispersionEvent>) -> RunRecord {
        RunRecord {
            final_best: swarm.gbest_fit,
            best_curve: self.best,
            diversity_curve: self.diversity,
            evals_used: problem.eval_count(),
            dispersion_events: events,
            seed: cfg.seed,
            config: cfg.clone(),
        }
    }
}

fn expect_algo(cfg: &OptimizerConfig, algo: Algorithm) -> Result<()> {
    if cfg.algo != algo {
        return Err(Error::config(format!("config is for {}, not {algo}", cfg.algo)));
    }
    cfg.validate()
}

fn run_topology(cfg: &OptimizerConfig, topology: Topology) -> Result<RunRecord> {
    let (mut problem, mut swarm) = initial_state(cfg, topology)?;
    let schedule = cfg.schedule();
    let mut rng = rng::stream(cfg.seed, Stream::Step);
    let mut trace = Trace::new(cfg.max_iter);
    for _ in 0..cfg.max_iter {
        step(&mut swarm, &mut problem, &schedule, cfg.acceleration, &mut rng)?;
        trace.record(&swarm)?;
    }
    Ok(trace.finish(cfg, &problem, &swarm, Vec::new()))
}

/// Global-best PSO.
pub fn run_gpso(cfg: &OptimizerConfig) -> Result<RunRecord> {
    expect_algo(cfg, Algorithm::Gpso)?;
    run_topology(cfg, Topology::Star)
}

/// Ring-neighborhood PSO.
pub fn run_lpso(cfg: &OptimizerConfig) -> Result<RunRecord> {
    expect_algo(cfg, Algorithm::Lpso)?;
    run_topology(cfg, Topology::Ring)
}

/// Dynamic multi-swarm PSO: sub-swarms of `dms_group_size` whose membership is
/// re-drawn every `dms_regroup_period` iterations.
pub fn run_dmspso(cfg: &OptimizerConfig) -> Result<RunRecord> {
    expect_algo(cfg, Algorithm::DmsPso)?;
    let mut rng = rng::stream(cfg.seed, Stream::Step);
    let partition = Partition::random(cfg.swarm_size, cfg.dms_group_size, &mut rng)?;
    let (mut problem, mut swarm) = initial_state(cfg, Topology::Groups(partition))?;
    let schedule = cfg.schedule();
    let mut trace = Trace::new(cfg.max_iter);
    for _ in 0..cfg.max_iter {
        step(&mut swarm, &mut problem, &schedule, cfg.acceleration, &mut rng)?;
        if swarm.iter % cfg.dms_regroup_period == 0 {
            swarm.topology = Topology::Groups(Partition::random(cfg.swarm_size, cfg.dms_group_size, &mut rng)?);
        }
        trace.record(&swarm)?;
    }
    Ok(trace.finish(cfg, &problem, &swarm, Vec::new()))
}

/// Star-topology PSO with archive maintenance every iteration and a dispersion event
/// every `dispersion.period` iterations.
pub fn run_dsdpso(cfg: &OptimizerConfig) -> Result<RunRecord> {
    expect_algo(cfg, Algorithm::Dsdpso)?;
    let (mut problem, mut swarm) = initial_state(cfg, Topology::Star)?;
    swarm.dispersed_update = cfg.dispersion.post_regime;
    let mut engine = DispersionEngine::new(
        cfg.dispersion.clone(),
        &mut problem,
        rng::stream(cfg.seed, Stream::Dispersion),
    )?;
    let schedule = cfg.schedule();
    let mut rng = rng::stream(cfg.seed, Stream::Step);
    let mut trace = Trace::new(cfg.max_iter);
    let mut events = Vec::new();
    for generation in 0..cfg.max_iter {
        let previous = swarm.gbest_fit;
        step(&mut swarm, &mut problem, &schedule, cfg.acceleration, &mut rng)?;
        engine.observe(&swarm, generation, previous);
        if engine.is_due(swarm.iter) {
            let diversity_before = diversity_of(&swarm)?;
            engine.disperse(&mut swarm, &mut problem)?;
            events.push(DispersionEvent {
                iter: swarm.iter,
                diversity_before,
                diversity_after: diversity_of(&swarm)?,
            });
        }
        trace.record(&swarm)?;
    }
    Ok(trace.finish(cfg, &problem, &swarm, events))
}

/// Runs the algorithm named in `cfg`.
pub fn run(cfg: &OptimizerConfig) -> Result<RunRecord> {
    match cfg.algo {
        Algorithm::Gpso => run_gpso(cfg),
        Algorithm::Lpso => run_lpso(cfg),
        Algorithm::DmsPso => run_dmspso(cfg),
        Algorithm::Dsdpso => run_dsdpso(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(algo: Algorithm, function: FunctionId) -> OptimizerConfig {
        OptimizerConfig {
            max_iter: 200,
            ..OptimizerConfig::new(algo, function, 10, 17)
        }
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.to_string().parse::<Algorithm>().unwrap(), a);
        }
        assert!("clpso".parse::<Algorithm>().unwrap_err().is_config());
    }

    #[test]
    fn records_have_full_monotone_curves() {
        for algo in Algorithm::ALL {
            let mut cfg = short(algo, FunctionId::F7);
            if algo == Algorithm::DmsPso {
                cfg.swarm_size = 21;
            }
            let r = run(&cfg).unwrap();
            assert_eq!(r.best_curve.len(), 200);
            assert_eq!(r.diversity_curve.len(), 200);
            assert!(r.best_curve.windows(2).all(|w| w[1] <= w[0]), "{algo}");
            assert_eq!(r.final_best, *r.best_curve.last().unwrap());
            assert!(r.diversity_curve.iter().all(|&d| d >= 0.0));
            assert!(r.evals_used >= 20 * 201);
            assert_eq!(r.seed, 17);
        }
    }

    #[test]
    fn wrong_driver_or_bad_config_is_rejected() {
        let cfg = short(Algorithm::Gpso, FunctionId::F1);
        assert!(run_lpso(&cfg).unwrap_err().is_config());
        let dms = short(Algorithm::DmsPso, FunctionId::F1);
        assert!(run(&dms).unwrap_err().is_config());
        let mut d = short(Algorithm::Dsdpso, FunctionId::F1);
        d.dispersion.rate = 0.01;
        assert!(run(&d).unwrap_err().is_config());
        let mut g = short(Algorithm::Gpso, FunctionId::F1);
        g.max_iter = 0;
        assert!(run(&g).unwrap_err().is_config());
    }

    #[test]
    fn ring_of_three_matches_star() {
        let mut g = short(Algorithm::Gpso, FunctionId::F7);
        g.swarm_size = 3;
        let l = g.with_algo(Algorithm::Lpso);
        let a = run(&g).unwrap();
        let b = run(&l).unwrap();
        assert_eq!(a.best_curve, b.best_curve);
        assert_eq!(a.diversity_curve, b.diversity_curve);
    }

    #[test]
    fn dispersion_events_fire_on_schedule() {
        let cfg = short(Algorithm::Dsdpso, FunctionId::F7);
        let r = run(&cfg).unwrap();
        let iters: Vec<usize> = r.dispersion_events.iter().map(|e| e.iter).collect();
        assert_eq!(iters, vec![30, 60, 90, 120, 150, 180]);
    }

    #[test]
    fn shared_initial_population() {
        let base = short(Algorithm::Gpso, FunctionId::F5);
        let (_, a) = initial_state(&base, Topology::Star).unwrap();
        let (_, b) = initial_state(&base.with_algo(Algorithm::Dsdpso), Topology::Ring).unwrap();
        let pa: Vec<_> = a.particles.iter().map(|p| &p.position).collect();
        let pb: Vec<_> = b.particles.iter().map(|p| &p.position).collect();
        assert_eq!(pa, pb);
    }
}
