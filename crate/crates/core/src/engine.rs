//! Exact state-vector execution of the generic hidden-subgroup pipeline.
//!
//! Two registers, LEFT over the basis of `G` and RIGHT over the basis of `H`,
//! stored as one amplitude vector indexed `g·|H| + h`:
//!
//! 0. `|ψ₀⟩ = |e⟩|1_H⟩`
//! 1. Fourier transform on the left register (uniform superposition over `G`)
//! 2. the oracle `U_f`
//! 3. Fourier transform (or its inverse) on the left register again
//! 4. Born probabilities of the left register, marginal over the right one
//!
//! The right register is never collapsed; its contribution is summed out.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{QhsError, Result};
use crate::oracle::{HspInstance, OracleUnitary};
use crate::repr::{FourierOperator, FourierRow, C64};

/// Largest `|G|·|H|` a state may have.
pub const MAX_STATE_DIM: usize = 65536;

/// Probabilities below this are treated as exact zeros.
pub const PROB_FLOOR: f64 = 1e-15;

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    left: usize,
    right: usize,
    amplitudes: Vec<C64>,
}

impl QuantumState {
    pub fn from_amplitudes(left: usize, right: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let dim = left
            .checked_mul(right)
            .filter(|&d| d <= MAX_STATE_DIM)
            .ok_or_else(|| {
                QhsError::ResourceCap(format!(
                    "state of {left}x{right} amplitudes exceeds {MAX_STATE_DIM}"
                ))
            })?;
        if amplitudes.len() != dim {
            return Err(QhsError::DimensionMismatch {
                expected: dim,
                got: amplitudes.len(),
            });
        }
        Ok(QuantumState {
            left,
            right,
            amplitudes,
        })
    }

    /// The basis state `|g⟩|h⟩`.
    pub fn basis(left: usize, right: usize, g: usize, h: usize) -> Result<Self> {
        if g >= left || h >= right {
            return Err(QhsError::IndexOutOfRange {
                index: g.max(h),
                order: if g >= left { left } else { right },
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); left * right];
        amps[g * right + h] = C64::new(1.0, 0.0);
        Self::from_amplitudes(left, right, amps)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.left, self.right)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, g: usize, h: usize) -> C64 {
        self.amplitudes[g * self.right + h]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `p(x) = Σ_h |⟨x, h|ψ⟩|²`.
    pub fn left_marginal(&self) -> Vec<f64> {
        self.amplitudes
            .chunks(self.right)
            .map(|row| row.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    /// Applies `F` (or `F†`) to the left register, slice by slice over the
    /// right register. Zero amplitudes are skipped, so a state with one
    /// non-zero entry per left index costs `O(|G|²)`.
    pub fn apply_left(&self, f: &FourierOperator, adjoint: bool) -> Result<QuantumState> {
        let n = f.dim();
        if n != self.left {
            return Err(QhsError::DimensionMismatch {
                expected: self.left,
                got: n,
            });
        }
        let zero = C64::new(0.0, 0.0);
        let mut out = vec![zero; self.amplitudes.len()];
        let m = f.matrix();
        for g in 0..n {
            for h in 0..self.right {
                let amp = self.amplitudes[g * self.right + h];
                if amp == zero {
                    continue;
                }
                if adjoint {
                    // (F†)_{x,g} = conj(F_{g,x})
                    for (x, a) in m[g * n..(g + 1) * n].iter().enumerate() {
                        out[x * self.right + h] += a.conj() * amp;
                    }
                } else {
                    for r in 0..n {
                        out[r * self.right + h] += m[r * n + g] * amp;
                    }
                }
            }
        }
        QuantumState::from_amplitudes(self.left, self.right, out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SecondTransform {
    #[default]
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeasureGranularity {
    #[default]
    FullTriple,
    /// Weak Fourier sampling: only the irrep label is observed.
    IrrepLabelOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PipelineConfig {
    pub second_transform: SecondTransform,
    pub measure_granularity: MeasureGranularity,
}

/// What a left-register measurement reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutcomeLabel {
    /// Character index of an abelian group.
    Character(usize),
    /// Full `(irrep, row, column)` of a non-abelian Fourier row.
    Triple(FourierRow),
    /// Irrep label only.
    Irrep(usize),
    /// Group element (inverse second transform on a non-abelian group).
    Element(usize),
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeLabel::Character(y) => write!(f, "{y}"),
            OutcomeLabel::Triple(r) => write!(f, "({},{},{})", r.irrep, r.row, r.col),
            OutcomeLabel::Irrep(i) => write!(f, "irrep:{i}"),
            OutcomeLabel::Element(g) => write!(f, "g:{g}"),
        }
    }
}

impl FromStr for OutcomeLabel {
    type Err = QhsError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let err = || QhsError::parse("outcome label", s);
        let num = |x: &str| x.trim().parse::<usize>().map_err(|_| err());
        if let Some(rest) = t.strip_prefix("irrep:") {
            return Ok(OutcomeLabel::Irrep(num(rest)?));
        }
        if let Some(rest) = t.strip_prefix("g:") {
            return Ok(OutcomeLabel::Element(num(rest)?));
        }
        if let Some(inner) = t.strip_prefix('(').and_then(|x| x.strip_suffix(')')) {
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != 3 {
                return Err(err());
            }
            return Ok(OutcomeLabel::Triple(FourierRow {
                irrep: num(parts[0])?,
                row: num(parts[1])?,
                col: num(parts[2])?,
            }));
        }
        Ok(OutcomeLabel::Character(num(t)?))
    }
}

/// Exact Born distribution over left-register outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    labels: Vec<OutcomeLabel>,
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    /// Validates and clamps: entries below [`PROB_FLOOR`] become 0, the total
    /// must be 1 within 1e-10.
    pub fn new(labels: Vec<OutcomeLabel>, probs: Vec<f64>) -> Result<Self> {
        if labels.len() != probs.len() {
            return Err(QhsError::DimensionMismatch {
                expected: labels.len(),
                got: probs.len(),
            });
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < -PROB_FLOOR) {
            return Err(QhsError::Integrity(format!("invalid probability {p}")));
        }
        let probs: Vec<f64> = probs
            .into_iter()
            .map(|p| if p < PROB_FLOOR { 0.0 } else { p })
            .collect();
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(QhsError::Integrity(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(OutcomeDistribution { labels, probs })
    }

    pub fn labels(&self) -> &[OutcomeLabel] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (OutcomeLabel, f64)> + '_ {
        self.labels.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn prob_of(&self, label: &OutcomeLabel) -> f64 {
        self.labels
            .iter()
            .position(|l| l == label)
            .map_or(0.0, |i| self.probs[i])
    }

    /// Outcomes with non-zero probability, in label order.
    pub fn support(&self) -> Vec<OutcomeLabel> {
        self.iter().filter(|(_, p)| *p > 0.0).map(|(l, _)| l).collect()
    }

    /// `½ Σ |p − q|` against a distribution over the same labels.
    pub fn total_variation(&self, other: &OutcomeDistribution) -> Result<f64> {
        if self.labels != other.labels {
            return Err(QhsError::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(p, q)| (p - q).abs())
                .sum::<f64>())
    }
}

/// A state after one pipeline step.
#[derive(Debug, Clone)]
pub struct StepSnapshot {
    pub step: usize,
    pub state: QuantumState,
    pub norm: f64,
}

fn check_operator(oracle: &OracleUnitary, f: &FourierOperator) -> Result<()> {
    if f.group() != oracle.domain() {
        return Err(QhsError::DimensionMismatch {
            expected: oracle.domain().order(),
            got: f.dim(),
        });
    }
    Ok(())
}

fn trace(oracle: &OracleUnitary, f: &FourierOperator, cfg: &PipelineConfig) -> Result<Vec<QuantumState>> {
    check_operator(oracle, f)?;
    let (ng, nh) = (oracle.domain().order(), oracle.codomain().order());
    let psi0 = QuantumState::basis(ng, nh, 0, 0)?;
    // F† of the trivial Fourier row is the uniform superposition for every
    // group; for abelian groups it coincides with F|e⟩.
    let psi1 = QuantumState::basis(ng, nh, f.trivial_row(), 0)?.apply_left(f, true)?;
    let psi2 = oracle.apply(&psi1)?;
    let psi3 = psi2.apply_left(f, cfg.second_transform == SecondTransform::Inverse)?;
    Ok(vec![psi0, psi1, psi2, psi3])
}

fn measure(f: &FourierOperator, cfg: &PipelineConfig, psi: &QuantumState) -> Result<OutcomeDistribution> {
    let marginal = psi.left_marginal();
    let abelian = f.irreps().iter().all(|p| p.dim() == 1);
    let labels: Vec<OutcomeLabel> = match (cfg.second_transform, cfg.measure_granularity) {
        (SecondTransform::Forward, MeasureGranularity::FullTriple) => f
            .rows()
            .iter()
            .map(|r| {
                if abelian {
                    OutcomeLabel::Character(r.irrep)
                } else {
                    OutcomeLabel::Triple(*r)
                }
            })
            .collect(),
        (SecondTransform::Forward, MeasureGranularity::IrrepLabelOnly) => {
            f.rows().iter().map(|r| OutcomeLabel::Irrep(r.irrep)).collect()
        }
        (SecondTransform::Inverse, MeasureGranularity::FullTriple) => (0..f.dim())
            .map(|g| {
                if abelian {
                    OutcomeLabel::Character(g)
                } else {
                    OutcomeLabel::Element(g)
                }
            })
            .collect(),
        (SecondTransform::Inverse, MeasureGranularity::IrrepLabelOnly) => {
            if !abelian {
                return Err(QhsError::InvalidParameter(
                    "irrep-label measurement needs the forward second transform on non-abelian groups"
                        .into(),
                ));
            }
            (0..f.dim()).map(OutcomeLabel::Irrep).collect()
        }
    };
    // Merge repeated labels (irrep-only granularity) in first-appearance order.
    let mut merged_labels: Vec<OutcomeLabel> = Vec::with_capacity(labels.len());
    let mut merged_probs: Vec<f64> = Vec::with_capacity(labels.len());
    let merge = cfg.measure_granularity == MeasureGranularity::IrrepLabelOnly;
    for (l, p) in labels.into_iter().zip(marginal) {
        let found = if merge {
            merged_labels.iter().position(|m| *m == l)
        } else {
            None
        };
        match found {
            Some(i) => merged_probs[i] += p,
            None => {
                merged_labels.push(l);
                merged_probs.push(p);
            }
        }
    }
    OutcomeDistribution::new(merged_labels, merged_probs)
}

/// Steps 0–4 for an arbitrary tabulated oracle.
pub fn run_oracle_pipeline(
    oracle: &OracleUnitary,
    f: &FourierOperator,
    cfg: &PipelineConfig,
) -> Result<OutcomeDistribution> {
    let states = trace(oracle, f, cfg)?;
    measure(f, cfg, &states[3])
}

pub fn run_pipeline(
    instance: &HspInstance,
    f: &FourierOperator,
    cfg: &PipelineConfig,
) -> Result<OutcomeDistribution> {
    run_oracle_pipeline(&instance.oracle(), f, cfg)
}

/// Snapshots `ψ₀ … ψ₃` with their norms.
pub fn step_trace(
    instance: &HspInstance,
    f: &FourierOperator,
    cfg: &PipelineConfig,
) -> Result<Vec<StepSnapshot>> {
    Ok(trace(&instance.oracle(), f, cfg)?
        .into_iter()
        .enumerate()
        .map(|(step, state)| StepSnapshot {
            step,
            norm: state.norm(),
            state,
        })
        .collect())
}

fn draw(dist: &OutcomeDistribution, cumulative: &[f64], rng: &mut ChaCha8Rng) -> OutcomeLabel {
    let u: f64 = rng.gen();
    let idx = cumulative.partition_point(|&c| c <= u);
    let idx = if idx < dist.len() && dist.probs[idx] > 0.0 {
        idx
    } else {
        // u landed past the rounded total; take the last outcome with mass
        dist.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    };
    dist.labels[idx]
}

fn cumulative(dist: &OutcomeDistribution) -> Vec<f64> {
    dist.probs
        .iter()
        .scan(0.0, |acc, &p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

/// `n` i.i.d. draws by inverse CDF over the label order of `dist`.
pub fn sample(dist: &OutcomeDistribution, n: usize, seed: u64) -> Vec<OutcomeLabel> {
    if n == 0 || dist.is_empty() {
        return Vec::new();
    }
    let cdf = cumulative(dist);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| draw(dist, &cdf, &mut rng)).collect()
}

/// Per-trial seed derived from a master seed (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One measurement per trial, each from its own derived RNG stream; the
/// result is independent of how trials are scheduled.
pub fn sample_trials(dist: &OutcomeDistribution, trials: usize, master_seed: u64) -> Vec<OutcomeLabel> {
    if dist.is_empty() {
        return Vec::new();
    }
    let cdf = cumulative(dist);
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, t as u64));
            draw(dist, &cdf, &mut rng)
        })
        .collect()
}
