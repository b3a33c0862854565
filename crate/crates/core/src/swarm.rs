//! Particle and swarm state and one synchronous PSO iteration.
//!
//! Velocities are clamped to the full per-dimension search range, positions are clamped
//! into the box and any coordinate that hits a bound has its velocity component zeroed.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::objective::ObjectiveProblem;
use crate::rng::Rng;

/// Minimum decrease of a personal best that counts as an improvement for idle accounting.
pub const IMPROVEMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub fitness: f64,
    pub pbest_pos: Vec<f64>,
    pub pbest_fit: f64,
    /// Iterations since the personal best last improved by more than [`IMPROVEMENT_TOL`].
    pub idle_count: usize,
    /// Exclusive end of the post-relocation regime, if the particle was relocated.
    pub dispersed_until: Option<usize>,
}

impl Particle {
    pub fn is_dispersed_at(&self, iter: usize) -> bool {
        self.dispersed_until.is_some_and(|until| iter < until)
    }
}

/// Disjoint cover of the particle indices by equally sized groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    groups: Vec<Vec<usize>>,
    member_of: Vec<usize>,
}

impl Partition {
    /// Random partition of `0..m` into groups of `group_size`.
    pub fn random(m: usize, group_size: usize, rng: &mut Rng) -> Result<Self> {
        if group_size == 0 || m % group_size != 0 {
            return Err(Error::config(format!(
                "swarm size {m} is not divisible by group size {group_size}"
            )));
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(rng);
        let groups: Vec<Vec<usize>> = order.chunks(group_size).map(<[usize]>::to_vec).collect();
        let mut member_of = vec![0; m];
        for (g, members) in groups.iter().enumerate() {
            for &i in members {
                member_of[i] = g;
            }
        }
        Ok(Partition { groups, member_of })
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group_of(&self, i: usize) -> &[usize] {
        &self.groups[self.member_of[i]]
    }
}

/// Which best position enters the social term.
#[derive(Debug, Clone, PartialEq)]
pub enum Topology {
    /// Global best.
    Star,
    /// Best of the particle and its two ring neighbors.
    Ring,
    /// Best within the particle's sub-swarm.
    Groups(Partition),
}

/// Velocity rule used by relocated particles while inside their post-relocation window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DispersedUpdate {
    /// The standard equation with the scheduled inertia.
    Standard,
    /// The standard equation with the schedule's minimum inertia.
    LowInertia,
    /// Random contraction of the minimum-inertia velocity.
    #[default]
    Contracted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Swarm {
    pub particles: Vec<Particle>,
    pub iter: usize,
    pub gbest_pos: Vec<f64>,
    pub gbest_fit: f64,
    pub topology: Topology,
    pub dispersed_update: DispersedUpdate,
}

/// Linearly decreasing inertia weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaSchedule {
    pub w_start: f64,
    pub w_end: f64,
    pub max_iter: usize,
}

impl InertiaSchedule {
    pub fn new(max_iter: usize) -> Self {
        InertiaSchedule {
            w_start: 0.9,
            w_end: 0.4,
            max_iter,
        }
    }

    /// Inertia at `iter`; iterations past `max_iter` get `w_end`.
    pub fn at(&self, iter: usize) -> f64 {
        if self.max_iter == 0 || iter >= self.max_iter {
            return self.w_end;
        }
        self.w_start + (self.w_end - self.w_start) * iter as f64 / self.max_iter as f64
    }
}

/// Free-function form of [`InertiaSchedule::at`].
pub fn inertia_at(schedule: &InertiaSchedule, iter: usize) -> f64 {
    schedule.at(iter)
}

/// Acceleration constants of the cognitive and social terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acceleration {
    pub c1: f64,
    pub c2: f64,
}

impl Default for Acceleration {
    fn default() -> Self {
        Acceleration { c1: 2.0, c2: 2.0 }
    }
}

/// Uniform random positions in the box, velocities uniform in `±(upper - lower)`.
pub fn init_swarm(
    problem: &mut ObjectiveProblem,
    m: usize,
    topology: Topology,
    rng: &mut Rng,
) -> Result<Swarm> {
    if m < 2 {
        return Err(Error::config(format!("swarm size must be at least 2, got {m}")));
    }
    let dim = problem.dim();
    let mut particles = Vec::with_capacity(m);
    for _ in 0..m {
        let position: Vec<f64> = (0..dim)
            .map(|d| rng.random_range(problem.lower()[d]..=problem.upper()[d]))
            .collect();
        let velocity: Vec<f64> = (0..dim)
            .map(|d| {
                let r = problem.range(d);
                rng.random_range(-r..=r)
            })
            .collect();
        particles.push((position, velocity));
    }
    let particles = particles
        .into_iter()
        .map(|(position, velocity)| {
            let fitness = problem.evaluate(&position)?;
            Ok(Particle {
                pbest_pos: position.clone(),
                pbest_fit: fitness,
                position,
                velocity,
                fitness,
                idle_count: 0,
                dispersed_until: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = best_index(&particles);
    Ok(Swarm {
        gbest_pos: particles[best].pbest_pos.clone(),
        gbest_fit: particles[best].pbest_fit,
        particles,
        iter: 0,
        topology,
        dispersed_update: DispersedUpdate::default(),
    })
}

fn best_index(particles: &[Particle]) -> usize {
    let mut best = 0;
    for (i, p) in particles.iter().enumerate() {
        if p.pbest_fit < particles[best].pbest_fit {
            best = i;
        }
    }
    best
}

/// `r0 · (w·v + c1·r1·(pbest − x) + c2·r2·(nbest − x))`, unclamped.
pub(crate) fn raw_velocity(
    p: &Particle,
    nbest: &[f64],
    w: f64,
    acc: Acceleration,
    r0: f64,
    r1: &[f64],
    r2: &[f64],
) -> Vec<f64> {
    (0..p.position.len())
        .map(|d| {
            let x = p.position[d];
            r0 * (w * p.velocity[d]
                + acc.c1 * r1[d] * (p.pbest_pos[d] - x)
                + acc.c2 * r2[d] * (nbest[d] - x))
        })
        .collect()
}

/// Applies the velocity clamp, moves, and clamps the position into the box.
pub(crate) fn apply_move(
    problem: &ObjectiveProblem,
    position: &[f64],
    mut velocity: Vec<f64>,
) -> (Vec<f64>, Vec<f64>) {
    let mut next = position.to_vec();
    for d in 0..next.len() {
        let vmax = problem.range(d);
        velocity[d] = velocity[d].clamp(-vmax, vmax);
        next[d] += velocity[d];
        let (lo, hi) = (problem.lower()[d], problem.upper()[d]);
        if next[d] < lo || next[d] > hi {
            next[d] = next[d].clamp(lo, hi);
            velocity[d] = 0.0;
        }
    }
    (velocity, next)
}

fn draw_coefficients(dim: usize, rng: &mut Rng) -> (Vec<f64>, Vec<f64>) {
    let mut r1 = Vec::with_capacity(dim);
    let mut r2 = Vec::with_capacity(dim);
    for _ in 0..dim {
        r1.push(rng.random::<f64>());
        r2.push(rng.random::<f64>());
    }
    (r1, r2)
}

/// The standard inertia-weight update. Returns `(velocity, position)`.
pub fn standard_velocity_update(
    p: &Particle,
    nbest: &[f64],
    w: f64,
    acc: Acceleration,
    problem: &ObjectiveProblem,
    rng: &mut Rng,
) -> (Vec<f64>, Vec<f64>) {
    let (r1, r2) = draw_coefficients(p.position.len(), rng);
    let v = raw_velocity(p, nbest, w, acc, 1.0, &r1, &r2);
    apply_move(problem, &p.position, v)
}

/// The relocated-particle update: the minimum-inertia velocity scaled by one uniform
/// `r0 ∈ (0, 1)` drawn per particle. Returns `(velocity, position)`.
pub fn dispersed_velocity_update(
    p: &Particle,
    nbest: &[f64],
    w_min: f64,
    acc: Acceleration,
    problem: &ObjectiveProblem,
    rng: &mut Rng,
) -> (Vec<f64>, Vec<f64>) {
    let r0 = loop {
        let r: f64 = rng.random();
        if r > 0.0 {
            break r;
        }
    };
    let (r1, r2) = draw_coefficients(p.position.len(), rng);
    let v = raw_velocity(p, nbest, w_min, acc, r0, &r1, &r2);
    apply_move(problem, &p.position, v)
}

fn best_among<'a>(swarm: &'a Swarm, members: impl IntoIterator<Item = usize>) -> &'a [f64] {
    let mut best: Option<usize> = None;
    for i in members {
        if best.is_none_or(|b| swarm.particles[i].pbest_fit < swarm.particles[b].pbest_fit) {
            best = Some(i);
        }
    }
    &swarm.particles[best.expect("non-empty neighborhood")].pbest_pos
}

/// Best position visible to particle `i` under the swarm's topology.
pub fn neighborhood_best(swarm: &Swarm, i: usize) -> &[f64] {
    let m = swarm.particles.len();
    match &swarm.topology {
        Topology::Star => &swarm.gbest_pos,
        Topology::Ring => best_among(swarm, [(i + m - 1) % m, i, (i + 1) % m]),
        Topology::Groups(partition) => best_among(swarm, partition.group_of(i).iter().copied()),
    }
}

/// Recomputes the global best from the personal bests, keeping the old record on ties.
pub(crate) fn refresh_gbest(swarm: &mut Swarm) {
    let best = best_index(&swarm.particles);
    if swarm.particles[best].pbest_fit < swarm.gbest_fit {
        swarm.gbest_fit = swarm.particles[best].pbest_fit;
        swarm.gbest_pos = swarm.particles[best].pbest_pos.clone();
    }
}

/// One synchronous iteration: every particle moves using the neighborhood bests of the
/// previous iteration, then all are evaluated and the personal and global bests updated.
pub fn step(
    swarm: &mut Swarm,
    problem: &mut ObjectiveProblem,
    schedule: &InertiaSchedule,
    acc: Acceleration,
    rng: &mut Rng,
) -> Result<()> {
    let iter = swarm.iter;
    let w = schedule.at(iter);
    let w_min = schedule.w_end;
    let nbests: Vec<Vec<f64>> = (0..swarm.particles.len())
        .map(|i| neighborhood_best(swarm, i).to_vec())
        .collect();
    let regime = swarm.dispersed_update;

    for (p, nbest) in swarm.particles.iter_mut().zip(&nbests) {
        let (v, x) = if p.is_dispersed_at(iter) {
            match regime {
                DispersedUpdate::Standard => standard_velocity_update(p, nbest, w, acc, problem, rng),
                DispersedUpdate::LowInertia => {
                    standard_velocity_update(p, nbest, w_min, acc, problem, rng)
                }
                DispersedUpdate::Contracted => {
                    dispersed_velocity_update(p, nbest, w_min, acc, problem, rng)
                }
            }
        } else {
            standard_velocity_update(p, nbest, w, acc, problem, rng)
        };
        p.velocity = v;
        p.position = x;
    }

    for p in &mut swarm.particles {
        p.fitness = problem.evaluate(&p.position)?;
        if p.fitness < p.pbest_fit {
            if p.pbest_fit - p.fitness > IMPROVEMENT_TOL {
                p.idle_count = 0;
            } else {
                p.idle_count += 1;
            }
            p.pbest_fit = p.fitness;
            p.pbest_pos.clone_from(&p.position);
        } else {
            p.idle_count += 1;
        }
    }
    refresh_gbest(swarm);
    swarm.iter += 1;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{make_problem, FunctionId};
    use crate::rng::{stream, Stream};

    fn particle(x: &[f64], v: &[f64], pbest: &[f64]) -> Particle {
        Particle {
            position: x.to_vec(),
            velocity: v.to_vec(),
            fitness: 0.0,
            pbest_pos: pbest.to_vec(),
            pbest_fit: 0.0,
            idle_count: 0,
            dispersed_until: None,
        }
    }

    fn small_swarm(fits: &[f64], topology: Topology) -> Swarm {
        let particles: Vec<Particle> = fits
            .iter()
            .enumerate()
            .map(|(i, &f)| {
                let mut p = particle(&[i as f64], &[0.0], &[i as f64]);
                p.fitness = f;
                p.pbest_fit = f;
                p
            })
            .collect();
        let best = best_index(&particles);
        Swarm {
            gbest_pos: particles[best].pbest_pos.clone(),
            gbest_fit: particles[best].pbest_fit,
            particles,
            iter: 0,
            topology,
            dispersed_update: DispersedUpdate::default(),
        }
    }

    #[test]
    fn inertia_schedule() {
        let s = InertiaSchedule::new(3000);
        assert_eq!(inertia_at(&s, 0), 0.9);
        assert_eq!(s.at(3000), 0.4);
        assert!((s.at(1500) - 0.65).abs() < 1e-15);
        assert_eq!(s.at(5000), 0.4);
        assert!(s.at(10) > s.at(11));
    }

    #[test]
    fn init_is_contained_and_deterministic() {
        let mut problem = make_problem(FunctionId::F1, 30, 3).unwrap();
        let mut rng = stream(9, Stream::Init);
        let swarm = init_swarm(&mut problem, 20, Topology::Star, &mut rng).unwrap();
        assert_eq!(swarm.particles.len(), 20);
        assert_eq!(problem.eval_count(), 20);
        for p in &swarm.particles {
            assert!(problem.contains(&p.position));
            assert_eq!(p.pbest_pos, p.position);
            for (d, v) in p.velocity.iter().enumerate() {
                assert!(v.abs() <= problem.range(d));
            }
        }
        let min = swarm.particles.iter().map(|p| p.fitness).fold(f64::INFINITY, f64::min);
        assert_eq!(swarm.gbest_fit, min);
        assert_eq!(swarm.iter, 0);

        let mut problem2 = make_problem(FunctionId::F1, 30, 3).unwrap();
        let again = init_swarm(&mut problem2, 20, Topology::Star, &mut stream(9, Stream::Init)).unwrap();
        assert_eq!(swarm, again);
        let mut problem3 = make_problem(FunctionId::F1, 30, 3).unwrap();
        assert!(init_swarm(&mut problem3, 1, Topology::Star, &mut rng).is_err());
    }

    #[test]
    fn equation_fixed_point() {
        let p = particle(&[1.0, -2.0], &[0.0, 0.0], &[1.0, -2.0]);
        let problem = make_problem(FunctionId::F1, 2, 0).unwrap();
        let mut rng = stream(1, Stream::Step);
        let (v, x) = standard_velocity_update(&p, &[1.0, -2.0], 0.9, Acceleration::default(), &problem, &mut rng);
        assert_eq!(v, vec![0.0, 0.0]);
        assert_eq!(x, vec![1.0, -2.0]);
    }

    #[test]
    fn scalar_hand_computation() {
        // w·v = 0.5·2 = 1; c1·r1·(p−x) = 2·0.75·2 = 3; c2·r2·(g−x) = 2·0.25·2 = 1
        let p = particle(&[0.0], &[2.0], &[2.0]);
        let v = raw_velocity(&p, &[2.0], 0.5, Acceleration::default(), 1.0, &[0.75], &[0.25]);
        assert_eq!(v, vec![5.0]);
        let problem = make_problem(FunctionId::F1, 1, 0).unwrap();
        let (v, x) = apply_move(&problem, &p.position, v);
        assert_eq!((v, x), (vec![5.0], vec![5.0]));

        // inertia only
        let p = particle(&[1.0], &[3.0], &[7.0]);
        let v = raw_velocity(&p, &[-4.0], 1.0, Acceleration::default(), 1.0, &[0.0], &[0.0]);
        assert_eq!(v, vec![3.0]);

        // contracted: 0.5·(0.4·1 + 2 + 2) = 2.2 with cognitive = social = 2
        let p = particle(&[0.0], &[1.0], &[1.0]);
        let v = raw_velocity(&p, &[1.0], 0.4, Acceleration::default(), 0.5, &[1.0], &[1.0]);
        assert!((v[0] - 2.2).abs() < 1e-15);
        let zero = raw_velocity(&p, &[1.0], 0.4, Acceleration::default(), 0.0, &[1.0], &[1.0]);
        assert_eq!(zero, vec![0.0]);
        let full = raw_velocity(&p, &[1.0], 0.4, Acceleration::default(), 1.0, &[0.3], &[0.6]);
        let standard = raw_velocity(&p, &[1.0], 0.4, Acceleration { c1: 2.0, c2: 2.0 }, 1.0, &[0.3], &[0.6]);
        assert_eq!(full, standard);
    }

    #[test]
    fn contracted_update_decelerates_in_equilibrium() {
        let problem = make_problem(FunctionId::F1, 3, 0).unwrap();
        let mut rng = stream(2, Stream::Step);
        let p = particle(&[1.0, 2.0, 3.0], &[5.0, -4.0, 2.0], &[1.0, 2.0, 3.0]);
        for _ in 0..200 {
            let (v, _) = dispersed_velocity_update(&p, &[1.0, 2.0, 3.0], 0.4, Acceleration::default(), &problem, &mut rng);
            for (a, b) in v.iter().zip(&p.velocity) {
                assert!(a.abs() <= 0.4 * b.abs() + 1e-15);
            }
        }
    }

    #[test]
    fn clamping_zeroes_violating_velocity() {
        let problem = make_problem(FunctionId::F7, 2, 0).unwrap();
        let (v, x) = apply_move(&problem, &[5.0, 0.0], vec![1.0, 30.0]);
        assert_eq!(x, vec![5.12, 5.12]);
        assert_eq!(v, vec![0.0, 0.0]);
        let (v, x) = apply_move(&problem, &[0.0, 0.0], vec![-1.0, 2.0]);
        assert_eq!(x, vec![-1.0, 2.0]);
        assert_eq!(v, vec![-1.0, 2.0]);
    }

    #[test]
    fn neighborhoods() {
        let star = small_swarm(&[5.0, 1.0, 3.0, 4.0, 2.0], Topology::Star);
        for i in 0..5 {
            assert_eq!(neighborhood_best(&star, i), star.gbest_pos.as_slice());
        }
        let ring3 = small_swarm(&[5.0, 1.0, 3.0], Topology::Ring);
        for i in 0..3 {
            assert_eq!(neighborhood_best(&ring3, i), ring3.gbest_pos.as_slice());
        }
        // best at index 0; neighborhood of 2 is {1, 2, 3}
        let fits = [0.0, 4.0, 3.0, 5.0, 1.0];
        let ring = small_swarm(&fits, Topology::Ring);
        let oracle = [1usize, 2, 3]
            .into_iter()
            .min_by(|&a, &b| fits[a].total_cmp(&fits[b]))
            .unwrap();
        assert_eq!(neighborhood_best(&ring, 2), &[oracle as f64]);
        assert_eq!(neighborhood_best(&ring, 4), &[0.0]);
    }

    #[test]
    fn partition_is_a_disjoint_cover() {
        let mut rng = stream(3, Stream::Step);
        for _ in 0..20 {
            let part = Partition::random(21, 3, &mut rng).unwrap();
            let mut seen: Vec<usize> = part.groups().iter().flatten().copied().collect();
            assert!(part.groups().iter().all(|g| g.len() == 3));
            seen.sort_unstable();
            assert_eq!(seen, (0..21).collect::<Vec<_>>());
            for i in 0..21 {
                assert!(part.group_of(i).contains(&i));
            }
        }
        assert!(Partition::random(20, 3, &mut rng).unwrap_err().is_config());
    }

    #[test]
    fn steps_keep_invariants() {
        for topology in [Topology::Star, Topology::Ring] {
            let mut problem = make_problem(FunctionId::F7, 10, 4).unwrap();
            let mut swarm = init_swarm(&mut problem, 12, topology, &mut stream(4, Stream::Init)).unwrap();
            let schedule = InertiaSchedule::new(200);
            let mut rng = stream(4, Stream::Step);
            let mut improvements = vec![0usize; 12];
            let mut resets = vec![0usize; 12];
            for _ in 0..200 {
                let before = swarm.clone();
                step(&mut swarm, &mut problem, &schedule, Acceleration::default(), &mut rng).unwrap();
                assert!(swarm.gbest_fit <= before.gbest_fit);
                let min_pbest = swarm.particles.iter().map(|p| p.pbest_fit).fold(f64::INFINITY, f64::min);
                assert_eq!(swarm.gbest_fit, min_pbest);
                for (i, (p, q)) in swarm.particles.iter().zip(&before.particles).enumerate() {
                    assert!(problem.contains(&p.position));
                    assert!(p.pbest_fit <= p.fitness);
                    assert!(p.pbest_fit <= q.pbest_fit);
                    if q.pbest_fit - p.pbest_fit > IMPROVEMENT_TOL {
                        improvements[i] += 1;
                    }
                    if p.idle_count == 0 {
                        resets[i] += 1;
                    } else {
                        assert_eq!(p.idle_count, q.idle_count + 1);
                    }
                }
            }
            assert_eq!(improvements, resets);
            assert_eq!(swarm.iter, 200);
        }
    }

    #[test]
    fn dispersed_particle_with_zero_velocity_stays_near() {
        let mut problem = make_problem(FunctionId::F1, 4, 0).unwrap();
        let mut swarm = init_swarm(&mut problem, 4, Topology::Star, &mut stream(1, Stream::Init)).unwrap();
        // at its pbest with gbest equal to it and zero velocity, only inertia moves it
        let x = swarm.gbest_pos.clone();
        for p in &mut swarm.particles {
            p.position.clone_from(&x);
            p.pbest_pos.clone_from(&x);
            p.velocity = vec![0.0; 4];
            p.dispersed_until = Some(5);
        }
        step(&mut swarm, &mut problem, &InertiaSchedule::new(10), Acceleration::default(), &mut stream(1, Stream::Step)).unwrap();
        for p in &swarm.particles {
            assert_eq!(p.position, x);
        }
    }
}
