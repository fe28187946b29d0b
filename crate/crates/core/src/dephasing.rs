//! Exact reduced dynamics of a register under pure dephasing.
//!
//! For basis labels `i`, `j` (σᶻ eigenvalues ±1 per qubit) the coherence
//! `ρ_ij` is multiplied by `exp(-η_ij(t) + i(φ_ij(t) + χ_ij(t)))` where
//!
//! * `η_ij = Σ_k |g_k|² coth(ω_k/2T) (1 - cos ω_k t)/ω_k² · λ₁(k)` is the phase
//!   damping, with `λ₁(k) = |Σ_l (i_l - j_l) e^{ik·r_l}|²`;
//! * `φ_ij = Σ_k |g_k|² (ω_k t - sin ω_k t)/ω_k² · λ₂(k)` is the Lamb phase
//!   shift, with `λ₂(k) = |Σ_l i_l e^{ik·r_l}|² - |Σ_l j_l e^{ik·r_l}|²`;
//! * `χ_ij = Σ_k 2|g_k|² (1 - cos ω_k t)/ω_k² · Im(S_j(k) S_i(k)*)`, with
//!   `S_i(k) = Σ_l i_l e^{-ik·r_l}`, is the phase of the overlap of the two
//!   displaced bath states. It is odd under `k → -k`, so it cancels for any
//!   inversion-symmetric mode set, and it vanishes identically when `i = ±j`.
//!
//! Populations are never touched.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::{coth_factor, BathSpectrum};
use crate::error::{invalid, Error, Result};
use crate::geometry::{dot, Vec3};
use crate::numeric::pairwise_sum;

/// Computational basis string of σᶻ eigenvalues (each ±1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisLabel(Vec<i8>);

impl BasisLabel {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.is_empty() {
            return Err(invalid("label", "empty basis label"));
        }
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(invalid("label", format!("spin value {bad} is not +1 or -1")));
        }
        Ok(Self(spins))
    }

    pub fn uniform(len: usize, spin: i8) -> Self {
        assert!(spin == 1 || spin == -1);
        Self(vec![spin; len])
    }

    /// Label whose bit `l` of `index` set means spin −1 on qubit `l`.
    pub fn from_index(index: usize, len: usize) -> Self {
        Self((0..len).map(|l| if index >> l & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == -1)
            .map(|(l, _)| 1usize << l)
            .sum()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flipped(&self, qubit: usize) -> Self {
        let mut s = self.0.clone();
        s[qubit] = -s[qubit];
        Self(s)
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    /// Number of qubits on which the two labels differ (`L₀`).
    pub fn hamming(&self, other: &Self) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// `Σ_l (i_l - j_l)²`, i.e. `4 L₀`.
    pub fn squared_difference(&self, other: &Self) -> f64 {
        4.0 * self.hamming(other) as f64
    }

    /// All `2^len` labels in index order.
    pub fn all(len: usize) -> impl Iterator<Item = BasisLabel> {
        (0..1usize << len).map(move |idx| Self::from_index(idx, len))
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s == 1 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Parses `+-+`, `+1-1+1`, or a mix; whitespace and commas are ignored.
impl FromStr for BasisLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut spins = Vec::new();
        let mut chars = s.chars().filter(|c| !c.is_whitespace() && *c != ',').peekable();
        while let Some(c) = chars.next() {
            let spin = match c {
                '+' => 1,
                '-' => -1,
                _ => return Err(invalid("label", format!("unexpected character {c:?} in {s:?}"))),
            };
            if chars.peek() == Some(&'1') {
                chars.next();
            }
            spins.push(spin);
        }
        Self::new(spins)
    }
}

/// Normalized pure register state `Σ c_i |i⟩`, stored sparsely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterState {
    amplitudes: BTreeMap<BasisLabel, Complex64>,
}

impl RegisterState {
    pub const NORM_TOLERANCE: f64 = 1e-12;

    /// Requires `Σ|c|² = 1` to within [`Self::NORM_TOLERANCE`].
    pub fn new(entries: impl IntoIterator<Item = (BasisLabel, Complex64)>) -> Result<Self> {
        Self::with_tolerance(entries, Self::NORM_TOLERANCE)
    }

    /// Checks normalization to `tol`, then rescales to unit norm exactly.
    pub fn with_tolerance(entries: impl IntoIterator<Item = (BasisLabel, Complex64)>, tol: f64) -> Result<Self> {
        let state = Self::collect(entries)?;
        let n = state.norm_sqr();
        if (n - 1.0).abs() > tol {
            return Err(Error::NotNormalized(n));
        }
        Ok(state.rescaled(n))
    }

    /// Rescales any nonzero superposition to unit norm.
    pub fn normalized(entries: impl IntoIterator<Item = (BasisLabel, Complex64)>) -> Result<Self> {
        let state = Self::collect(entries)?;
        let n = state.norm_sqr();
        Ok(state.rescaled(n))
    }

    fn collect(entries: impl IntoIterator<Item = (BasisLabel, Complex64)>) -> Result<Self> {
        let mut amplitudes = BTreeMap::new();
        let mut len = None;
        for (label, c) in entries {
            let expected = *len.get_or_insert(label.len());
            if label.len() != expected {
                return Err(Error::LengthMismatch {
                    expected,
                    actual: label.len(),
                });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(invalid("amplitude", format!("non-finite amplitude for {label}")));
            }
            if amplitudes.insert(label.clone(), c).is_some() {
                return Err(invalid("state", format!("label {label} listed twice")));
            }
        }
        amplitudes.retain(|_, c| c.norm_sqr() > 0.0);
        if amplitudes.is_empty() {
            return Err(Error::EmptyState);
        }
        Ok(Self { amplitudes })
    }

    fn rescaled(mut self, norm_sqr: f64) -> Self {
        let s = norm_sqr.sqrt();
        for c in self.amplitudes.values_mut() {
            *c /= s;
        }
        self
    }

    pub fn basis(label: BasisLabel) -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(label, Complex64::new(1.0, 0.0));
        Self { amplitudes }
    }

    /// `(|+…+⟩ + |−…−⟩)/√2`.
    pub fn cat(len: usize) -> Self {
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let up = BasisLabel::uniform(len, 1);
        let down = up.negated();
        Self {
            amplitudes: [(up, a), (down, a)].into_iter().collect(),
        }
    }

    /// `(|+…+⟩ + |+…+⟩ with qubit `qubit` flipped)/√2`.
    pub fn single_flip(len: usize, qubit: usize) -> Self {
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let up = BasisLabel::uniform(len, 1);
        let flip = up.flipped(qubit);
        Self {
            amplitudes: [(up, a), (flip, a)].into_iter().collect(),
        }
    }

    pub fn qubits(&self) -> usize {
        self.amplitudes.keys().next().map_or(0, BasisLabel::len)
    }

    pub fn support_len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude(&self, label: &BasisLabel) -> Complex64 {
        self.amplitudes.get(label).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisLabel, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn labels(&self) -> impl Iterator<Item = &BasisLabel> {
        self.amplitudes.keys()
    }

    pub fn norm_sqr(&self) -> f64 {
        let parts: Vec<f64> = self.amplitudes.values().map(|c| c.norm_sqr()).collect();
        pairwise_sum(&parts)
    }
}

/// `|Σ_l (i_l - j_l) e^{ik·r_l}|²`.
pub fn lambda1(i: &BasisLabel, j: &BasisLabel, k: &Vec3, positions: &[Vec3]) -> Result<f64> {
    check_len(i, positions)?;
    check_len(j, positions)?;
    let s: Complex64 = i
        .spins()
        .iter()
        .zip(j.spins())
        .zip(positions)
        .map(|((&a, &b), r)| Complex64::from_polar(f64::from(a - b), dot(k, r)))
        .sum();
    Ok(s.norm_sqr())
}

/// `|Σ_l i_l e^{ik·r_l}|² - |Σ_l j_l e^{ik·r_l}|²`.
pub fn lambda2(i: &BasisLabel, j: &BasisLabel, k: &Vec3, positions: &[Vec3]) -> Result<f64> {
    check_len(i, positions)?;
    check_len(j, positions)?;
    let sum = |lab: &BasisLabel| -> Complex64 {
        lab.spins()
            .iter()
            .zip(positions)
            .map(|(&s, r)| Complex64::from_polar(f64::from(s), dot(k, r)))
            .sum()
    };
    Ok(sum(i).norm_sqr() - sum(j).norm_sqr())
}

fn check_len(label: &BasisLabel, positions: &[Vec3]) -> Result<()> {
    if label.len() != positions.len() {
        return Err(Error::LengthMismatch {
            expected: positions.len(),
            actual: label.len(),
        });
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(invalid("t", format!("time must be >= 0, got {t}")))
    }
}

/// `x - sin x`, accurate for small `x`.
pub fn x_minus_sin(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        // x³/3! - x⁵/5! + x⁷/7! - x⁹/9! + x¹¹/11!
        x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0 * (1.0 - x2 / 110.0))))
    } else {
        x - x.sin()
    }
}

/// `1 - cos x` without cancellation.
pub fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// η, Lamb phase φ and overlap phase χ for one ordered pair of labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairFactors {
    pub eta: f64,
    pub phi: f64,
    pub cross_phase: f64,
}

impl PairFactors {
    /// Total phase acquired by the coherence, `φ + χ`.
    pub fn phase(&self) -> f64 {
        self.phi + self.cross_phase
    }

    /// `exp(-η + i(φ + χ))`.
    pub fn multiplier(&self) -> Complex64 {
        Complex64::from_polar((-self.eta).exp(), self.phase())
    }
}

/// Per-mode time weights shared by every pair at one instant.
struct TimeWeights {
    damping: Vec<f64>,
    phase: Vec<f64>,
    cross: Vec<f64>,
}

/// Closed-form dephasing for a fixed bath and set of qubit positions.
#[derive(Debug, Clone, Copy)]
pub struct DephasingModel<'a> {
    bath: &'a BathSpectrum,
    positions: &'a [Vec3],
}

impl<'a> DephasingModel<'a> {
    pub fn new(bath: &'a BathSpectrum, positions: &'a [Vec3]) -> Self {
        Self { bath, positions }
    }

    pub fn qubits(&self) -> usize {
        self.positions.len()
    }

    /// `S_i(k) = Σ_l i_l e^{-ik·r_l}` for every bath mode.
    pub fn structure_factors(&self, label: &BasisLabel) -> Result<Vec<Complex64>> {
        check_len(label, self.positions)?;
        Ok(self
            .bath
            .modes()
            .iter()
            .map(|m| {
                label
                    .spins()
                    .iter()
                    .zip(self.positions)
                    .map(|(&s, r)| Complex64::from_polar(f64::from(s), -dot(&m.k, r)))
                    .sum()
            })
            .collect())
    }

    fn weights(&self, t: f64) -> TimeWeights {
        let temp = self.bath.temperature;
        let modes = self.bath.modes();
        let mut damping = Vec::with_capacity(modes.len());
        let mut phase = Vec::with_capacity(modes.len());
        let mut cross = Vec::with_capacity(modes.len());
        for m in modes {
            let x = m.omega * t;
            let base = m.g2 / (m.omega * m.omega);
            let omc = one_minus_cos(x);
            damping.push(base * coth_factor(m.omega, temp) * omc);
            phase.push(base * x_minus_sin(x));
            cross.push(2.0 * base * omc);
        }
        TimeWeights { damping, phase, cross }
    }

    fn pair_from_factors(w: &TimeWeights, si: &[Complex64], sj: &[Complex64]) -> PairFactors {
        let n = si.len();
        let mut eta = Vec::with_capacity(n);
        let mut phi = Vec::with_capacity(n);
        let mut cross = Vec::with_capacity(n);
        for k in 0..n {
            let (a, b) = (si[k], sj[k]);
            eta.push(w.damping[k] * (a - b).norm_sqr());
            phi.push(w.phase[k] * (a.norm_sqr() - b.norm_sqr()));
            cross.push(w.cross[k] * (b * a.conj()).im);
        }
        PairFactors {
            eta: pairwise_sum(&eta),
            phi: pairwise_sum(&phi),
            cross_phase: pairwise_sum(&cross),
        }
    }

    pub fn pair_factors(&self, i: &BasisLabel, j: &BasisLabel, t: f64) -> Result<PairFactors> {
        check_time(t)?;
        let si = self.structure_factors(i)?;
        let sj = self.structure_factors(j)?;
        Ok(Self::pair_from_factors(&self.weights(t), &si, &sj))
    }

    pub fn damping_factor(&self, i: &BasisLabel, j: &BasisLabel, t: f64) -> Result<f64> {
        Ok(self.pair_factors(i, j, t)?.eta)
    }

    pub fn lamb_phase(&self, i: &BasisLabel, j: &BasisLabel, t: f64) -> Result<f64> {
        Ok(self.pair_factors(i, j, t)?.phi)
    }

    /// `f_i(t) = Σ_k (ω_k t - sin ω_k t)/ω_k² · |Σ_l g_kl i_l|²`.
    pub fn f_phase(&self, i: &BasisLabel, t: f64) -> Result<f64> {
        check_time(t)?;
        let s = self.structure_factors(i)?;
        let w = self.weights(t);
        let terms: Vec<f64> = w.phase.iter().zip(&s).map(|(p, a)| p * a.norm_sqr()).collect();
        Ok(pairwise_sum(&terms))
    }

    /// Factors for every ordered pair of labels in the state's support.
    pub fn decoherence_factors(&self, state: &RegisterState, t: f64) -> Result<DecoherenceFactors> {
        check_time(t)?;
        let labels: Vec<BasisLabel> = state.labels().cloned().collect();
        let s: Vec<Vec<Complex64>> = labels
            .iter()
            .map(|l| self.structure_factors(l))
            .collect::<Result<_>>()?;
        let w = self.weights(t);
        let n = labels.len();
        let pairs: Vec<PairFactors> = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (a, b) = (idx / n, idx % n);
                if a == b {
                    PairFactors {
                        eta: 0.0,
                        phi: 0.0,
                        cross_phase: 0.0,
                    }
                } else {
                    Self::pair_from_factors(&w, &s[a], &s[b])
                }
            })
            .collect();
        Ok(DecoherenceFactors { t, labels, pairs })
    }

    /// Reduced register density at time `t` for a pure initial state.
    pub fn evolve(&self, state: &RegisterState, t: f64) -> Result<ReducedDensity> {
        check_state(state, self.qubits())?;
        let factors = self.decoherence_factors(state, t)?;
        let amps: Vec<Complex64> = factors.labels.iter().map(|l| state.amplitude(l)).collect();
        let n = amps.len();
        let entries = (0..n * n)
            .map(|idx| {
                let (a, b) = (idx / n, idx % n);
                amps[a] * amps[b].conj() * factors.pairs[idx].multiplier()
            })
            .collect();
        Ok(ReducedDensity {
            labels: factors.labels,
            entries,
        })
    }

    /// `F = ⟨Ψ(0)|ρ(t)|Ψ(0)⟩ = Σ_ij |c_i|²|c_j|² exp(-η_ij + i phase_ij)`.
    pub fn fidelity(&self, state: &RegisterState, t: f64) -> Result<f64> {
        check_state(state, self.qubits())?;
        let factors = self.decoherence_factors(state, t)?;
        let p: Vec<f64> = factors.labels.iter().map(|l| state.amplitude(l).norm_sqr()).collect();
        let n = p.len();
        // the imaginary parts cancel between (i, j) and (j, i)
        let terms: Vec<f64> = (0..n * n)
            .map(|idx| p[idx / n] * p[idx % n] * factors.pairs[idx].multiplier().re)
            .collect();
        Ok(pairwise_sum(&terms))
    }
}

fn check_state(state: &RegisterState, qubits: usize) -> Result<()> {
    if state.qubits() != qubits {
        return Err(Error::LengthMismatch {
            expected: qubits,
            actual: state.qubits(),
        });
    }
    let n = state.norm_sqr();
    if (n - 1.0).abs() > RegisterState::NORM_TOLERANCE {
        return Err(Error::NotNormalized(n));
    }
    Ok(())
}

/// Dephasing factors for all ordered label pairs of a state's support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceFactors {
    pub t: f64,
    pub labels: Vec<BasisLabel>,
    /// Row-major `labels.len()²`, entry `(a, b)` for labels `a`, `b`.
    pub pairs: Vec<PairFactors>,
}

impl DecoherenceFactors {
    pub fn get(&self, i: &BasisLabel, j: &BasisLabel) -> Option<&PairFactors> {
        let a = self.labels.iter().position(|l| l == i)?;
        let b = self.labels.iter().position(|l| l == j)?;
        Some(&self.pairs[a * self.labels.len() + b])
    }
}

/// Register density restricted to the initial state's support (entries
/// outside it stay zero under pure dephasing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedDensity {
    labels: Vec<BasisLabel>,
    entries: Vec<Complex64>,
}

impl ReducedDensity {
    /// Builds from labels and a row-major square matrix.
    pub fn from_parts(labels: Vec<BasisLabel>, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != labels.len() * labels.len() {
            return Err(Error::LengthMismatch {
                expected: labels.len() * labels.len(),
                actual: entries.len(),
            });
        }
        Ok(Self { labels, entries })
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn at(&self, a: usize, b: usize) -> Complex64 {
        self.entries[a * self.labels.len() + b]
    }

    pub fn entry(&self, i: &BasisLabel, j: &BasisLabel) -> Complex64 {
        let a = self.labels.iter().position(|l| l == i);
        let b = self.labels.iter().position(|l| l == j);
        match (a, b) {
            (Some(a), Some(b)) => self.at(a, b),
            _ => Complex64::default(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|a| self.at(a, a)).sum()
    }

    /// Largest `|ρ_ab - conj(ρ_ba)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                worst = worst.max((self.at(a, b) - self.at(b, a).conj()).norm());
            }
        }
        worst
    }

    /// Largest entrywise deviation from another density on the same labels.
    pub fn max_deviation(&self, other: &ReducedDensity) -> f64 {
        let mut worst = 0.0f64;
        for (a, i) in self.labels.iter().enumerate() {
            for (b, j) in self.labels.iter().enumerate() {
                worst = worst.max((self.at(a, b) - other.entry(i, j)).norm());
            }
        }
        worst
    }

    /// Full `2^L × 2^L` row-major matrix indexed by [`BasisLabel::index`].
    pub fn to_dense(&self) -> Result<Vec<Complex64>> {
        let l = self.labels.first().map_or(0, BasisLabel::len);
        if l > 12 {
            return Err(invalid(
                "density",
                format!("dense storage limited to 12 qubits, got {l}"),
            ));
        }
        let dim = 1usize << l;
        let mut out = vec![Complex64::default(); dim * dim];
        for (a, i) in self.labels.iter().enumerate() {
            for (b, j) in self.labels.iter().enumerate() {
                out[i.index() * dim + j.index()] = self.at(a, b);
            }
        }
        Ok(out)
    }
}

pub fn damping_factor(i: &BasisLabel, j: &BasisLabel, t: f64, bath: &BathSpectrum, positions: &[Vec3]) -> Result<f64> {
    DephasingModel::new(bath, positions).damping_factor(i, j, t)
}

pub fn lamb_phase(i: &BasisLabel, j: &BasisLabel, t: f64, bath: &BathSpectrum, positions: &[Vec3]) -> Result<f64> {
    DephasingModel::new(bath, positions).lamb_phase(i, j, t)
}

pub fn f_phase_value(i: &BasisLabel, t: f64, bath: &BathSpectrum, positions: &[Vec3]) -> Result<f64> {
    DephasingModel::new(bath, positions).f_phase(i, t)
}

pub fn evolve(state: &RegisterState, t: f64, bath: &BathSpectrum, positions: &[Vec3]) -> Result<ReducedDensity> {
    DephasingModel::new(bath, positions).evolve(state, t)
}

pub fn fidelity(state: &RegisterState, t: f64, bath: &BathSpectrum, positions: &[Vec3]) -> Result<f64> {
    DephasingModel::new(bath, positions).fidelity(state, t)
}
