//! Qubit sites: an ideal cubic lattice plus quenched random displacements.
//!
//! Sites are indexed with the first axis running fastest, so a 1-D register
//! is `dims = [L, 1, 1]` and consecutive indices are nearest neighbours.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// A register of `L1 * L2 * L3` qubits with lattice constant `d` and
/// RMS site disorder `delta`, realized for one disorder seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterGeometry {
    pub dims: [usize; 3],
    pub d: f64,
    pub delta: f64,
    pub seed: u64,
    positions: Vec<Vec3>,
}

impl RegisterGeometry {
    pub fn new(dims: [usize; 3], d: f64, delta: f64, seed: u64) -> Result<Self> {
        let ideal = build_lattice(dims, d)?;
        let positions = apply_disorder(&ideal, delta, seed)?;
        Ok(Self {
            dims,
            d,
            delta,
            seed,
            positions,
        })
    }

    /// Ideal lattice with no disorder.
    pub fn periodic(dims: [usize; 3], d: f64) -> Result<Self> {
        Self::new(dims, d, 0.0, 0)
    }

    /// Same lattice, fresh disorder realization.
    pub fn reseeded(&self, seed: u64) -> Result<Self> {
        Self::new(self.dims, self.d, self.delta, seed)
    }

    /// Same lattice and seed, different disorder amplitude.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.dims, self.d, delta, self.seed)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn ideal_positions(&self) -> Vec<Vec3> {
        // dims and d were validated at construction.
        build_lattice(self.dims, self.d).expect("validated lattice")
    }
}

/// Sites `(l1 d, l2 d, l3 d)` of the ideal lattice, first axis fastest.
pub fn build_lattice(dims: [usize; 3], d: f64) -> Result<Vec<Vec3>> {
    if dims.contains(&0) {
        return Err(invalid("dims", format!("{dims:?} has a zero extent")));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(invalid("d", format!("lattice constant must be positive, got {d}")));
    }
    let [n1, n2, n3] = dims;
    let mut out = Vec::with_capacity(n1 * n2 * n3);
    for l3 in 0..n3 {
        for l2 in 0..n2 {
            for l1 in 0..n1 {
                out.push([l1 as f64 * d, l2 as f64 * d, l3 as f64 * d]);
            }
        }
    }
    Ok(out)
}

/// Adds i.i.d. isotropic Gaussian displacements with per-axis standard
/// deviation `delta / sqrt(3)`, so the RMS displacement length is `delta`.
pub fn apply_disorder(ideal: &[Vec3], delta: f64, seed: u64) -> Result<Vec<Vec3>> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(invalid(
            "delta",
            format!("disorder amplitude must be >= 0, got {delta}"),
        ));
    }
    if delta == 0.0 {
        return Ok(ideal.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, delta / 3f64.sqrt()).expect("finite sigma");
    Ok(ideal
        .iter()
        .map(|r| {
            let mut p = *r;
            for c in p.iter_mut() {
                *c += normal.sample(&mut rng);
            }
            p
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_examples() {
        assert_eq!(build_lattice([1, 1, 1], 1.0).unwrap(), vec![[0.0; 3]]);
        assert_eq!(
            build_lattice([3, 1, 1], 2.0).unwrap(),
            vec![[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [4.0, 0.0, 0.0]]
        );
        let sq = build_lattice([2, 2, 1], 1.0).unwrap();
        assert_eq!(
            sq,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]]
        );
    }

    #[test]
    fn rejects_bad_lattice() {
        assert!(build_lattice([0, 1, 1], 1.0).is_err());
        assert!(build_lattice([2, 1, 1], 0.0).is_err());
        assert!(build_lattice([2, 1, 1], -1.0).is_err());
        assert!(apply_disorder(&[[0.0; 3]], -0.1, 1).is_err());
    }

    #[test]
    fn zero_disorder_is_identity() {
        let ideal = build_lattice([4, 3, 2], 0.7).unwrap();
        for seed in [0, 1, 99] {
            assert_eq!(apply_disorder(&ideal, 0.0, seed).unwrap(), ideal);
        }
    }

    #[test]
    fn disorder_is_deterministic() {
        let ideal = build_lattice([5, 1, 1], 1.0).unwrap();
        let a = apply_disorder(&ideal, 0.1, 7).unwrap();
        let b = apply_disorder(&ideal, 0.1, 7).unwrap();
        let c = apply_disorder(&ideal, 0.1, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn disorder_rms_matches_delta() {
        // 1e5 single-site samples; |δ|² is δ²/3·χ²₃ so its relative std is
        // sqrt(2/3), and the RMS estimate has relative std sqrt(2/3)/2/sqrt(N).
        let n = 100_000;
        let delta = 0.1;
        let mut sum_sq = 0.0;
        let mut sum = [0.0; 3];
        for seed in 0..n {
            let p = apply_disorder(&[[0.0; 3]], delta, seed).unwrap()[0];
            sum_sq += dot(&p, &p);
            for a in 0..3 {
                sum[a] += p[a];
            }
        }
        let rms = (sum_sq / n as f64).sqrt();
        assert!((rms / delta - 1.0).abs() < 0.02, "rms = {rms}");
        for s in sum {
            // per-axis std of the mean is δ/sqrt(3N)
            assert!((s / n as f64).abs() < 4.0 * delta / (3.0 * n as f64).sqrt());
        }
    }

    #[test]
    fn geometry_carries_positions() {
        let g = RegisterGeometry::new([2, 2, 2], 1.5, 0.05, 3).unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!(g.ideal_positions().len(), 8);
        assert_eq!(g.reseeded(3).unwrap(), g);
    }
}
