//! Population diversity and particle distances.

use crate::error::{Error, Result};

/// Diversity of the swarm at one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityReading {
    pub iter: usize,
    pub value: f64,
}

fn check_population<V: AsRef<[f64]>>(positions: &[V]) -> Result<usize> {
    let first = positions
        .first()
        .ok_or_else(|| Error::domain("empty population"))?;
    let n = first.as_ref().len();
    if positions.iter().any(|p| p.as_ref().len() != n) {
        return Err(Error::domain("population vectors have different lengths"));
    }
    Ok(n)
}

/// Per-dimension arithmetic mean of the positions.
pub fn center<V: AsRef<[f64]>>(positions: &[V]) -> Result<Vec<f64>> {
    let n = check_population(positions)?;
    let mut mean = vec![0.0; n];
    for p in positions {
        for (m, v) in mean.iter_mut().zip(p.as_ref()) {
            *m += v;
        }
    }
    let m = positions.len() as f64;
    mean.iter_mut().for_each(|v| *v /= m);
    Ok(mean)
}

/// Dimension-wise L1 position diversity: the mean over dimensions of the mean absolute
/// deviation of each coordinate from its population mean.
pub fn position_diversity<V: AsRef<[f64]>>(positions: &[V]) -> Result<f64> {
    let mean = center(positions)?;
    let n = mean.len();
    if n == 0 {
        return Ok(0.0);
    }
    let m = positions.len() as f64;
    let mut per_dim = vec![0.0; n];
    for p in positions {
        for ((acc, v), c) in per_dim.iter_mut().zip(p.as_ref()).zip(&mean) {
            *acc += (v - c).abs();
        }
    }
    Ok(per_dim.iter().map(|d| d / m).sum::<f64>() / n as f64)
}

pub fn euclidean_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::domain(format!(
            "distance between vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}
