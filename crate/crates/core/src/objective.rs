//! Scalable benchmark functions `f1`..`f12`.
//!
//! All functions are minimized, have their global optimum value at 0, and accept any
//! dimension. `f3`/`f4` are stochastic (one fresh noise draw per evaluation from a
//! stream owned by the problem instance); `f11`/`f12` evaluate `z = x·M` for an
//! orthogonal `M` fixed when the instance is created.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{self, Rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionId {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
    F9,
    F10,
    F11,
    F12,
}

impl FunctionId {
    pub const ALL: [FunctionId; 12] = [
        FunctionId::F1,
        FunctionId::F2,
        FunctionId::F3,
        FunctionId::F4,
        FunctionId::F5,
        FunctionId::F6,
        FunctionId::F7,
        FunctionId::F8,
        FunctionId::F9,
        FunctionId::F10,
        FunctionId::F11,
        FunctionId::F12,
    ];

    /// 1-based function number.
    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            FunctionId::F1 => "Sphere",
            FunctionId::F2 => "Schwefel 1.2",
            FunctionId::F3 => "Schwefel 1.2 with noise",
            FunctionId::F4 => "Noisy quartic",
            FunctionId::F5 => "Rosenbrock",
            FunctionId::F6 => "Schwefel",
            FunctionId::F7 => "Rastrigin",
            FunctionId::F8 => "Noncontinuous Rastrigin",
            FunctionId::F9 => "Schaffer",
            FunctionId::F10 => "Griewank",
            FunctionId::F11 => "Rotated Ackley",
            FunctionId::F12 => "Rotated Rastrigin",
        }
    }

    /// Search interval, identical in every dimension.
    pub fn interval(self) -> (f64, f64) {
        match self {
            FunctionId::F1 | FunctionId::F2 | FunctionId::F3 => (-100.0, 100.0),
            FunctionId::F4 => (-1.28, 1.28),
            FunctionId::F5 => (-30.0, 30.0),
            FunctionId::F6 => (-500.0, 500.0),
            FunctionId::F7 | FunctionId::F8 | FunctionId::F12 => (-5.12, 5.12),
            FunctionId::F9 => (-32.767, 32.767),
            FunctionId::F10 => (-600.0, 600.0),
            FunctionId::F11 => (-32.0, 32.0),
        }
    }

    pub fn optimum(self) -> f64 {
        0.0
    }

    /// A global minimizer in `dim` dimensions.
    pub fn minimizer(self, dim: usize) -> Vec<f64> {
        match self {
            FunctionId::F5 => vec![1.0; dim],
            FunctionId::F6 => vec![SCHWEFEL_MINIMIZER; dim],
            _ => vec![0.0; dim],
        }
    }

    pub fn is_noisy(self) -> bool {
        matches!(self, FunctionId::F3 | FunctionId::F4)
    }

    pub fn is_rotated(self) -> bool {
        matches!(self, FunctionId::F11 | FunctionId::F12)
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.number())
    }
}

impl FromStr for FunctionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n: usize = s
            .trim()
            .strip_prefix('f')
            .or_else(|| s.trim().strip_prefix('F'))
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| Error::config(format!("unknown function id `{s}` (expected f1..f12)")))?;
        if (1..=12).contains(&n) {
            Ok(FunctionId::ALL[n - 1])
        } else {
            Err(Error::config(format!("unknown function id `{s}` (expected f1..f12)")))
        }
    }
}

const SCHWEFEL_OFFSET: f64 = 418.9829;
const SCHWEFEL_MINIMIZER: f64 = 420.9687;

/// One benchmark instance: function, dimension, bounds, rotation and noise stream.
#[derive(Debug, Clone)]
pub struct ObjectiveProblem {
    id: FunctionId,
    dim: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rotation: Option<DMatrix<f64>>,
    noise: Rng,
    noise_seed: u64,
    eval_count: u64,
}

/// Builds the instance of `id` in `dim` dimensions. The rotation (f11, f12) and the
/// noise stream (f3, f4) are derived deterministically from `seed`.
pub fn make_problem(id: FunctionId, dim: usize, seed: u64) -> Result<ObjectiveProblem> {
    if dim == 0 {
        return Err(Error::domain("problem dimension must be at least 1"));
    }
    let (lo, hi) = id.interval();
    let rotation = if id.is_rotated() {
        Some(rotation_matrix(dim, seed)?)
    } else {
        None
    };
    Ok(ObjectiveProblem {
        id,
        dim,
        lower: vec![lo; dim],
        upper: vec![hi; dim],
        rotation,
        noise: rng::stream(seed, Stream::Noise),
        noise_seed: seed,
        eval_count: 0,
    })
}

/// Deterministic random orthogonal matrix: QR of a seeded standard-Gaussian matrix with
/// the signs of `R`'s diagonal folded into `Q`.
pub fn rotation_matrix(dim: usize, seed: u64) -> Result<DMatrix<f64>> {
    if dim == 0 {
        return Err(Error::domain("rotation dimension must be at least 1"));
    }
    let mut rng = rng::stream(seed, Stream::Rotation);
    let gaussian = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
    let qr = gaussian.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(q)
}

impl ObjectiveProblem {
    pub fn id(&self) -> FunctionId {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Per-dimension width `upper - lower`.
    pub fn range(&self, d: usize) -> f64 {
        self.upper[d] - self.lower[d]
    }

    pub fn rotation(&self) -> Option<&DMatrix<f64>> {
        self.rotation.as_ref()
    }

    pub fn noise_seed(&self) -> u64 {
        self.noise_seed
    }

    pub fn eval_count(&self) -> u64 {
        self.eval_count
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// Clamps `x` into the box, coordinate-wise.
    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// Evaluates the objective at `x`. Points outside the box are evaluated as-is.
    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::domain(format!(
                "point has {} coordinates, problem dimension is {}",
                x.len(),
                self.dim
            )));
        }
        if x.iter().any(|v| v.is_nan()) {
            return Err(Error::domain("point contains NaN"));
        }
        self.eval_count += 1;
        let value = match self.id {
            FunctionId::F1 => sphere(x),
            FunctionId::F2 => schwefel_1_2(x),
            FunctionId::F3 => {
                let n: f64 = StandardNormal.sample(&mut self.noise);
                schwefel_1_2(x) * (1.0 + 0.4 * n.abs())
            }
            FunctionId::F4 => {
                let u: f64 = self.noise.random();
                quartic(x) + u
            }
            FunctionId::F5 => rosenbrock(x),
            FunctionId::F6 => schwefel(x),
            FunctionId::F7 => rastrigin(x.iter().copied()),
            FunctionId::F8 => rastrigin(x.iter().map(|&v| noncontinuous(v))),
            FunctionId::F9 => schaffer(x),
            FunctionId::F10 => griewank(x),
            FunctionId::F11 => ackley(&self.rotate(x)),
            FunctionId::F12 => rastrigin(self.rotate(x).into_iter()),
        };
        Ok(value)
    }

    /// `z = x·M` (row vector times matrix).
    fn rotate(&self, x: &[f64]) -> Vec<f64> {
        match &self.rotation {
            Some(m) => m.tr_mul(&DVector::from_column_slice(x)).as_slice().to_vec(),
            None => x.to_vec(),
        }
    }
}

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn schwefel_1_2(x: &[f64]) -> f64 {
    let mut prefix = 0.0;
    let mut total = 0.0;
    for v in x {
        prefix += v;
        total += prefix * prefix;
    }
    total
}

fn quartic(x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, v)| (i + 1) as f64 * v.powi(4))
        .sum()
}

fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (w[0] - 1.0).powi(2))
        .sum()
}

fn schwefel(x: &[f64]) -> f64 {
    SCHWEFEL_OFFSET * x.len() as f64 - x.iter().map(|v| v * v.abs().sqrt().sin()).sum::<f64>()
}

fn rastrigin(x: impl Iterator<Item = f64>) -> f64 {
    x.map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0).sum()
}

/// `f64::round` rounds half away from zero.
fn noncontinuous(v: f64) -> f64 {
    if v.abs() < 0.5 {
        v
    } else {
        (2.0 * v).round() / 2.0
    }
}

fn schaffer(x: &[f64]) -> f64 {
    let s = sphere(x);
    s.powf(0.25) * ((50.0 * s.powf(0.1)).sin().powi(2) + 1.0)
}

/// Product form; the optimum value 0 at the origin requires it.
fn griewank(x: &[f64]) -> f64 {
    let prod: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    1.0 + sphere(x) / 4000.0 - prod
}

fn ackley(z: &[f64]) -> f64 {
    let n = z.len() as f64;
    let rms = (sphere(z) / n).sqrt();
    let mean_cos = z.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
    // grouped so that the origin yields exactly 0
    (20.0 - 20.0 * (-0.2 * rms).exp()) + (E - mean_cos.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(id: FunctionId, x: &[f64]) -> f64 {
        make_problem(id, x.len(), 11).unwrap().evaluate(x).unwrap()
    }

    #[test]
    fn bounds_follow_the_interval_table() {
        let p = make_problem(FunctionId::F1, 30, 1).unwrap();
        assert!(p.lower().iter().all(|&v| v == -100.0));
        assert!(p.upper().iter().all(|&v| v == 100.0));
        let p = make_problem(FunctionId::F7, 30, 1).unwrap();
        assert!(p.lower().iter().all(|&v| v == -5.12));
        assert!(p.upper().iter().all(|&v| v == 5.12));
        for id in FunctionId::ALL {
            let (lo, hi) = id.interval();
            assert!(lo < hi);
            assert_eq!(lo, -hi);
        }
    }

    #[test]
    fn parse_ids() {
        assert_eq!("f1".parse::<FunctionId>().unwrap(), FunctionId::F1);
        assert_eq!("f12".parse::<FunctionId>().unwrap(), FunctionId::F12);
        for bad in ["f0", "f13", "g1", "", "f"] {
            assert!(bad.parse::<FunctionId>().unwrap_err().is_config(), "{bad}");
        }
        for id in FunctionId::ALL {
            assert_eq!(id.to_string().parse::<FunctionId>().unwrap(), id);
        }
    }

    #[test]
    fn zero_dimension_is_a_domain_error() {
        assert!(matches!(make_problem(FunctionId::F1, 0, 0), Err(Error::Domain(_))));
        assert!(matches!(rotation_matrix(0, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn evaluation_errors() {
        let mut p = make_problem(FunctionId::F1, 3, 0).unwrap();
        assert!(matches!(p.evaluate(&[0.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(p.evaluate(&[0.0, f64::NAN, 0.0]), Err(Error::Domain(_))));
        assert_eq!(p.eval_count(), 0);
        // out-of-bounds points are still evaluable
        assert_eq!(p.evaluate(&[1000.0, 0.0, 0.0]).unwrap(), 1.0e6);
        assert_eq!(p.eval_count(), 1);
    }

    #[test]
    fn known_values() {
        assert_eq!(eval(FunctionId::F1, &[0.0; 30]), 0.0);
        assert_eq!(eval(FunctionId::F7, &[0.0; 30]), 0.0);
        assert_eq!(eval(FunctionId::F8, &[0.0; 30]), 0.0);
        assert_eq!(eval(FunctionId::F5, &[1.0; 30]), 0.0);
        assert_eq!(eval(FunctionId::F1, &[1.0; 30]), 30.0);
        assert!(eval(FunctionId::F6, &[SCHWEFEL_MINIMIZER; 30]).abs() < 1e-2);
        // prefix sums 1, 3, 6
        assert_eq!(eval(FunctionId::F2, &[1.0, 2.0, 3.0]), 1.0 + 9.0 + 36.0);
        // 100·(2-1)² + (1-1)²
        assert_eq!(eval(FunctionId::F5, &[1.0, 2.0]), 100.0);
        // noncontinuous mapping: 0.7 -> round(1.4)/2 = 0.5, -0.75 -> round(-1.5)/2 = -1
        assert_eq!(noncontinuous(0.7), 0.5);
        assert_eq!(noncontinuous(-0.75), -1.0);
        assert_eq!(noncontinuous(0.3), 0.3);
        assert!((eval(FunctionId::F7, &[1.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn every_function_vanishes_at_its_minimizer() {
        for id in FunctionId::ALL {
            for dim in [1, 2, 10, 30] {
                let mut p = make_problem(id, dim, 5).unwrap();
                let v = p.evaluate(&id.minimizer(dim)).unwrap();
                let tol = match id {
                    // additive uniform noise in [0, 1)
                    FunctionId::F4 => 1.0,
                    _ => 1e-2,
                };
                assert!((0.0..tol).contains(&v) || v.abs() < tol, "{id} dim {dim}: {v}");
                if !matches!(id, FunctionId::F4 | FunctionId::F6) {
                    assert_eq!(v, 0.0, "{id} dim {dim}");
                }
            }
        }
    }

    #[test]
    fn quartic_noise_is_additive_and_bounded() {
        let mut p = make_problem(FunctionId::F4, 5, 9).unwrap();
        let x = [0.5, -0.2, 0.1, 0.3, -1.0];
        let base = quartic(&x);
        let a = p.evaluate(&x).unwrap();
        let b = p.evaluate(&x).unwrap();
        assert_ne!(a, b);
        for v in [a, b] {
            assert!(v >= base && v < base + 1.0);
        }
    }

    #[test]
    fn noise_stream_is_seeded() {
        let x = [3.0, -4.0];
        let seq = |seed| {
            let mut p = make_problem(FunctionId::F3, 2, seed).unwrap();
            (0..5).map(|_| p.evaluate(&x).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(seq(1), seq(1));
        assert_ne!(seq(1), seq(2));
        assert!(seq(1).iter().all(|&v| v >= schwefel_1_2(&x)));
    }

    #[test]
    fn rotation_is_orthogonal_and_deterministic() {
        for dim in [1, 2, 5, 10, 30] {
            let m = rotation_matrix(dim, 42).unwrap();
            let prod = &m * m.transpose();
            let err = (prod - DMatrix::<f64>::identity(dim, dim)).abs().max();
            assert!(err < 1e-10, "dim {dim}: {err}");
            assert!((m.determinant().abs() - 1.0).abs() < 1e-8);
            assert_eq!(m, rotation_matrix(dim, 42).unwrap());
        }
        let one = rotation_matrix(1, 3).unwrap();
        assert_eq!(one[(0, 0)].abs(), 1.0);
        assert_ne!(rotation_matrix(4, 1).unwrap(), rotation_matrix(4, 2).unwrap());
        let p = make_problem(FunctionId::F11, 10, 8).unwrap();
        assert!(p.rotation().is_some());
        assert!(make_problem(FunctionId::F7, 10, 8).unwrap().rotation().is_none());
    }

    #[test]
    fn rotated_functions_are_rotation_invariant_in_norm() {
        // Ackley depends on |z| and cos terms; the sphere part must match |x|
        let mut p = make_problem(FunctionId::F11, 4, 3).unwrap();
        let x = [1.0, -2.0, 0.5, 3.0];
        let z = p.rotate(&x);
        assert!((sphere(&z) - sphere(&x)).abs() < 1e-12);
        assert_eq!(p.evaluate(&x).unwrap(), ackley(&z));
    }
}
