//! Pairing encodings that map each logical qubit onto a qubit pair whose
//! collective coupling cancels.
//!
//! * Adjacent code: `|−1⟩ → |−1, +1⟩`, `|+1⟩ → |+1, −1⟩` on sites `(2q, 2q+1)`.
//! * Modulated code for a mode at `k̄` with `e^{ik̄md} ≈ (−1)ⁿ`:
//!   `|−1⟩ → |−1, (−1)ⁿ⟩`, `|+1⟩ → |+1, (−1)ⁿ⁺¹⟩` on sites `(l, l+m)`. The
//!   register is cut into blocks of `2m` sites and site `l` pairs with `l+m`
//!   inside its block.

use serde::{Deserialize, Serialize};

use crate::bath::BathSpectrum;
use crate::dephasing::{BasisLabel, DephasingModel, RegisterState};
use crate::error::{invalid, Error, Result};
use crate::geometry::Vec3;

/// Result of the `(m, n)` commensuration search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingPlan {
    /// Pairing distance in lattice sites.
    pub m: usize,
    /// Parity integer: `e^{ik̄md} ≈ (−1)ⁿ`.
    pub n: u64,
    /// `|m k̄ d/π − n|`.
    pub residual: f64,
}

impl PairingPlan {
    pub fn new(m: usize, n: u64) -> Result<Self> {
        if m == 0 {
            return Err(invalid("m", "pairing distance must be >= 1"));
        }
        Ok(Self { m, n, residual: 0.0 })
    }

    /// Partner spin for a first-member spin `s`.
    pub fn partner(&self, s: i8) -> i8 {
        let parity: i8 = if self.n.is_multiple_of(2) { 1 } else { -1 };
        // s = −1 → (−1)ⁿ ; s = +1 → (−1)ⁿ⁺¹
        -s * parity
    }

    /// Site pairs `(l, l+m)` for `logical` qubits, blocked in runs of `2m`.
    pub fn pairs(&self, logical: usize) -> Result<Vec<(usize, usize)>> {
        if logical == 0 || !logical.is_multiple_of(self.m) {
            return Err(invalid(
                "logical qubits",
                format!("{logical} is not a positive multiple of m = {}", self.m),
            ));
        }
        Ok((0..logical)
            .map(|q| {
                let first = 2 * self.m * (q / self.m) + q % self.m;
                (first, first + self.m)
            })
            .collect())
    }

    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("m", self.m.to_string()),
            ("n", self.n.to_string()),
            ("residual", format!("{:.11e}", self.residual)),
        ]
    }
}

/// Smallest `m ≤ m_max` for which some integer `n` has
/// `|m k̄ d/π − n| ≤ eps_tol`; for that `m` the nearest `n` is taken.
pub fn find_pairing(kbar: f64, d: f64, m_max: usize, eps_tol: f64) -> Result<PairingPlan> {
    if !(kbar > 0.0 && kbar.is_finite()) {
        return Err(invalid("kbar", format!("must be > 0, got {kbar}")));
    }
    if !(d > 0.0) {
        return Err(invalid("d", "lattice constant must be > 0"));
    }
    if m_max == 0 {
        return Err(invalid("m_max", "must be >= 1"));
    }
    if !(eps_tol > 0.0) {
        return Err(invalid("eps_tol", "must be > 0"));
    }
    let ratio = kbar * d / std::f64::consts::PI;
    for m in 1..=m_max {
        let x = m as f64 * ratio;
        let n = x.round();
        let residual = (x - n).abs();
        if residual <= eps_tol {
            return Ok(PairingPlan {
                m,
                n: n as u64,
                residual,
            });
        }
    }
    Err(Error::NoPairing { m_max, tol: eps_tol })
}

/// A pairing encoding of logical qubits into a physical register.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PairingCode {
    Adjacent,
    Modulated(PairingPlan),
}

impl PairingCode {
    pub fn pairs(&self, logical: usize) -> Result<Vec<(usize, usize)>> {
        match self {
            PairingCode::Adjacent => {
                if logical == 0 {
                    return Err(invalid("logical qubits", "need at least one"));
                }
                Ok((0..logical).map(|q| (2 * q, 2 * q + 1)).collect())
            }
            PairingCode::Modulated(plan) => plan.pairs(logical),
        }
    }

    fn partner(&self, s: i8) -> i8 {
        match self {
            PairingCode::Adjacent => -s,
            PairingCode::Modulated(plan) => plan.partner(s),
        }
    }

    pub fn physical_len(&self, logical: usize) -> Result<usize> {
        Ok(2 * self.pairs(logical)?.len())
    }

    /// Encodes one basis label onto a register of `physical` qubits.
    pub fn encode_label(&self, logical: &BasisLabel, physical: usize) -> Result<BasisLabel> {
        let pairs = self.pairs(logical.len())?;
        if 2 * pairs.len() != physical {
            return Err(Error::LengthMismatch {
                expected: 2 * pairs.len(),
                actual: physical,
            });
        }
        let mut spins = vec![0i8; physical];
        for (&s, &(a, b)) in logical.spins().iter().zip(&pairs) {
            spins[a] = s;
            spins[b] = self.partner(s);
        }
        BasisLabel::new(spins)
    }

    /// Linear extension of [`Self::encode_label`]; amplitudes are unchanged.
    pub fn encode_state(&self, state: &RegisterState, physical: usize) -> Result<RegisterState> {
        let entries = state
            .iter()
            .map(|(l, c)| Ok((self.encode_label(l, physical)?, *c)))
            .collect::<Result<Vec<_>>>()?;
        RegisterState::new(entries)
    }

    /// Reads the first member of every pair. A partner that does not match
    /// the code is reported, not corrected.
    pub fn decode_label(&self, physical: &BasisLabel) -> Result<BasisLabel> {
        if !physical.len().is_multiple_of(2) {
            return Err(invalid("label", "physical register must have an even size"));
        }
        let logical = physical.len() / 2;
        let pairs = self.pairs(logical)?;
        let s = physical.spins();
        let mut out = Vec::with_capacity(logical);
        for (q, &(a, b)) in pairs.iter().enumerate() {
            if s[b] != self.partner(s[a]) {
                return Err(Error::DecodeMismatch(q));
            }
            out.push(s[a]);
        }
        BasisLabel::new(out)
    }

    /// Every encoded basis label for `logical` qubits, in logical index order.
    pub fn code_labels(&self, logical: usize) -> Result<Vec<BasisLabel>> {
        let physical = self.physical_len(logical)?;
        BasisLabel::all(logical)
            .map(|l| self.encode_label(&l, physical))
            .collect()
    }
}

pub fn encode_adjacent(logical: &BasisLabel) -> BasisLabel {
    PairingCode::Adjacent
        .encode_label(logical, 2 * logical.len())
        .expect("adjacent code covers any register")
}

pub fn encode_modulated(logical: &BasisLabel, plan: &PairingPlan) -> Result<BasisLabel> {
    let code = PairingCode::Modulated(*plan);
    code.encode_label(logical, code.physical_len(logical.len())?)
}

/// Largest dephasing factors over all ordered pairs of code-space labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub max_eta: f64,
    pub max_lamb_phase: f64,
    /// Largest `|φ + χ|`.
    pub max_phase: f64,
}

pub fn subdecoherence_residual(
    code: &PairingCode,
    logical: usize,
    positions: &[Vec3],
    bath: &BathSpectrum,
    t: f64,
) -> Result<Residual> {
    let labels = code.code_labels(logical)?;
    residual_over(&labels, positions, bath, t)
}

/// Same as [`subdecoherence_residual`] for an explicit label set.
pub fn residual_over(labels: &[BasisLabel], positions: &[Vec3], bath: &BathSpectrum, t: f64) -> Result<Residual> {
    let support = RegisterState::normalized(
        labels
            .iter()
            .map(|l| (l.clone(), num_complex::Complex64::new(1.0, 0.0))),
    )?;
    let factors = DephasingModel::new(bath, positions).decoherence_factors(&support, t)?;
    Ok(factors.pairs.iter().fold(
        Residual {
            max_eta: 0.0,
            max_lamb_phase: 0.0,
            max_phase: 0.0,
        },
        |r, p| Residual {
            max_eta: r.max_eta.max(p.eta),
            max_lamb_phase: r.max_lamb_phase.max(p.phi.abs()),
            max_phase: r.max_phase.max(p.phase().abs()),
        },
    ))
}
