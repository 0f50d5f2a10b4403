//! Transversals `τ: Q → G` of an epimorphism `ν: G → Q`, the approximate
//! function `f̃ = f∘τ`, and modular-exponentiation period-finding instances.
//!
//! For period finding `G` is the integer line and `Q = Z_Q`; the integers are
//! never materialized, only the tables `q ↦ τ(q)` and `q ↦ f(τ(q))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{run_oracle_pipeline, OutcomeDistribution, OutcomeLabel, PipelineConfig};
use crate::error::{QhsError, Result};
use crate::group::{FiniteGroup, Subgroup};
use crate::oracle::OracleUnitary;
use crate::repr::{fourier_operator, root_of_unity, BasisOrdering, FourierOperator};

/// Largest `Q·N` accepted by [`shor_pipeline`].
pub const SHOR_CAP: u64 = 1 << 22;

/// Above this `Q` the pipeline is evaluated fiber by fiber instead of through
/// a materialized Fourier matrix.
const DENSE_Q_LIMIT: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransversalKind {
    /// Least non-negative representatives of `Z_Q` in `Z`.
    Shor,
    /// `τ(q) = q + Q·m_q` with `m_q` uniform in `[0, bound)`.
    Offset { seed: u64, bound: u64 },
    LeastIndex,
    SeededRandom { seed: u64 },
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransversalTarget {
    Integers,
    /// A finite group with the projection `ν` onto the quotient.
    Group {
        group: FiniteGroup,
        projection: Vec<usize>,
    },
}

/// An injection `τ: Q → G` with `ν∘τ = id_Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transversal {
    quotient: FiniteGroup,
    target: TransversalTarget,
    table: Vec<u64>,
    kind: TransversalKind,
}

impl Transversal {
    fn checked(self) -> Result<Self> {
        self.verify()?;
        Ok(self)
    }

    /// Integer transversal from an explicit table.
    pub fn from_integer_table(q: usize, table: Vec<u64>) -> Result<Self> {
        Transversal {
            quotient: FiniteGroup::cyclic(q)?,
            target: TransversalTarget::Integers,
            table,
            kind: TransversalKind::Custom,
        }
        .checked()
    }

    pub fn quotient(&self) -> &FiniteGroup {
        &self.quotient
    }

    pub fn quotient_order(&self) -> usize {
        self.quotient.order()
    }

    pub fn target(&self) -> &TransversalTarget {
        &self.target
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    pub fn kind(&self) -> TransversalKind {
        self.kind
    }

    /// `ν(x)`.
    pub fn project(&self, x: u64) -> Result<usize> {
        match &self.target {
            TransversalTarget::Integers => Ok((x % self.quotient.order() as u64) as usize),
            TransversalTarget::Group { projection, .. } => projection
                .get(x as usize)
                .copied()
                .ok_or(QhsError::IndexOutOfRange {
                    index: x as usize,
                    order: projection.len(),
                }),
        }
    }

    /// Checks `ν(τ(q)) = q` for every `q` and injectivity.
    pub fn verify(&self) -> Result<()> {
        if self.table.len() != self.quotient.order() {
            return Err(QhsError::DimensionMismatch {
                expected: self.quotient.order(),
                got: self.table.len(),
            });
        }
        for (q, &x) in self.table.iter().enumerate() {
            let back = self.project(x)?;
            if back != q {
                return Err(QhsError::Integrity(format!(
                    "representative {x} of {q} projects to {back}"
                )));
            }
        }
        // ν∘τ = id already forces injectivity; kept as an explicit check.
        let mut sorted = self.table.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.table.len() {
            return Err(QhsError::Integrity("transversal is not injective".into()));
        }
        Ok(())
    }
}

/// `τ(q) = q` on `[0, Q)`.
pub fn shor_transversal(q: usize) -> Result<Transversal> {
    Transversal {
        quotient: FiniteGroup::cyclic(q)?,
        target: TransversalTarget::Integers,
        table: (0..q as u64).collect(),
        kind: TransversalKind::Shor,
    }
    .checked()
}

/// `τ(q) = q + Q·m_q`, `m_q` drawn uniformly from `[0, bound)`.
pub fn offset_transversal(q: usize, bound: u64, seed: u64) -> Result<Transversal> {
    if bound == 0 {
        return Err(QhsError::InvalidParameter("offset bound must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = (0..q as u64)
        .map(|x| x + q as u64 * rng.gen_range(0..bound))
        .collect();
    Transversal {
        quotient: FiniteGroup::cyclic(q)?,
        target: TransversalTarget::Integers,
        table,
        kind: TransversalKind::Offset { seed, bound },
    }
    .checked()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepresentativePolicy {
    LeastIndex,
    SeededRandom(u64),
}

/// One representative per coset of a normal subgroup.
pub fn finite_transversal(
    group: &FiniteGroup,
    normal: &Subgroup,
    policy: RepresentativePolicy,
) -> Result<Transversal> {
    let quotient = group.quotient(normal)?;
    let cosets = group.cosets(normal)?;
    let (table, kind) = match policy {
        RepresentativePolicy::LeastIndex => (
            quotient.representatives().iter().map(|&r| r as u64).collect(),
            TransversalKind::LeastIndex,
        ),
        RepresentativePolicy::SeededRandom(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (
                cosets
                    .blocks()
                    .iter()
                    .map(|b| b[rng.gen_range(0..b.len())] as u64)
                    .collect(),
                TransversalKind::SeededRandom { seed },
            )
        }
    };
    Transversal {
        quotient: quotient.group.clone(),
        target: TransversalTarget::Group {
            group: group.clone(),
            projection: quotient.projection().to_vec(),
        },
        table,
        kind,
    }
    .checked()
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut b = base as u128 % m;
    let mut acc: u128 = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Multiplicative order of `a` modulo `n`; `a` must be a unit.
pub fn multiplicative_order(a: u64, n: u64) -> Result<u64> {
    if n < 2 {
        return Err(QhsError::InvalidParameter("modulus must be >= 2".into()));
    }
    if gcd(a % n, n) != 1 {
        return Err(QhsError::NotCoprime { a, n });
    }
    let a = a % n;
    let mut x = a;
    let mut r = 1;
    while x != 1 {
        x = (x as u128 * a as u128 % n as u128) as u64;
        r += 1;
    }
    Ok(r)
}

/// `f(x) = aˣ mod N` on the integers, approximated through `Z_Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicInstance {
    modulus: u64,
    base: u64,
    period: u64,
    q: usize,
}

impl PeriodicInstance {
    /// `Q` must be a power of two.
    pub fn new(modulus: u64, base: u64, q: usize) -> Result<Self> {
        if !q.is_power_of_two() {
            return Err(QhsError::InvalidParameter(format!(
                "Q = {q} is not a power of two"
            )));
        }
        Self::with_any_q(modulus, base, q)
    }

    pub fn with_any_q(modulus: u64, base: u64, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(QhsError::InvalidParameter("Q must be >= 1".into()));
        }
        let period = multiplicative_order(base, modulus)?;
        Ok(PeriodicInstance {
            modulus,
            base,
            period,
            q,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn f(&self, x: u64) -> u64 {
        mod_pow(self.base, x, self.modulus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Shor,
    Offset { seed: u64, bound: u64 },
    Custom,
}

/// `f̃ = f∘τ` tabulated over `Z_Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximateFunction {
    transversal: Transversal,
    table: Vec<usize>,
    provenance: Provenance,
}

impl ApproximateFunction {
    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn transversal(&self) -> &Transversal {
        &self.transversal
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Recomputes `f(τ(q))` for every `q`.
    pub fn is_consistent_with(&self, inst: &PeriodicInstance) -> bool {
        self.transversal
            .table()
            .iter()
            .zip(&self.table)
            .all(|(&x, &v)| inst.f(x) as usize == v)
    }
}

pub fn approximate_function(inst: &PeriodicInstance, tau: &Transversal) -> Result<ApproximateFunction> {
    if tau.target != TransversalTarget::Integers || tau.quotient_order() != inst.q {
        return Err(QhsError::InvalidParameter(format!(
            "period finding needs an integer transversal of Z_{}",
            inst.q
        )));
    }
    let provenance = match tau.kind {
        TransversalKind::Shor => Provenance::Shor,
        TransversalKind::Offset { seed, bound } => Provenance::Offset { seed, bound },
        _ => Provenance::Custom,
    };
    Ok(ApproximateFunction {
        table: tau.table.iter().map(|&x| inst.f(x) as usize).collect(),
        transversal: tau.clone(),
        provenance,
    })
}

/// `q ↦ f(τ(q) + c)`: every representative moved by the same constant.
pub fn approximate_function_shifted(
    inst: &PeriodicInstance,
    tau: &Transversal,
    c: u64,
) -> Result<ApproximateFunction> {
    let base = approximate_function(inst, tau)?;
    Ok(ApproximateFunction {
        table: tau.table.iter().map(|&x| inst.f(x + c) as usize).collect(),
        provenance: Provenance::Custom,
        ..base
    })
}

fn check_shor_caps(inst: &PeriodicInstance) -> Result<()> {
    if inst.q as u64 * inst.modulus > SHOR_CAP {
        return Err(QhsError::ResourceCap(format!(
            "Q·N = {} exceeds {SHOR_CAP}",
            inst.q as u64 * inst.modulus
        )));
    }
    Ok(())
}

/// Exact left-register distribution of the pipeline on `Z_Q` with
/// `f̃(q) = a^{τ(q)} mod N` and right register `Cyclic(N)`.
pub fn shor_pipeline(inst: &PeriodicInstance, tau: &Transversal) -> Result<OutcomeDistribution> {
    run_approximate(inst, &approximate_function(inst, tau)?)
}

/// Runs the pipeline on an already tabulated `f̃`.
pub fn run_approximate(inst: &PeriodicInstance, approx: &ApproximateFunction) -> Result<OutcomeDistribution> {
    check_shor_caps(inst)?;
    if inst.q <= DENSE_Q_LIMIT && inst.q as u64 * inst.modulus <= crate::engine::MAX_STATE_DIM as u64 {
        let f = fourier_operator(&FiniteGroup::cyclic(inst.q)?, &BasisOrdering::default())?;
        shor_pipeline_with(inst, approx, &f)
    } else {
        fiber_distribution(inst, approx)
    }
}

/// [`shor_pipeline`] with a prebuilt Fourier operator on `Z_Q`.
pub fn shor_pipeline_with(
    inst: &PeriodicInstance,
    approx: &ApproximateFunction,
    f: &FourierOperator,
) -> Result<OutcomeDistribution> {
    check_shor_caps(inst)?;
    let domain = FiniteGroup::cyclic(inst.q)?;
    if f.group() != &domain {
        return Err(QhsError::DimensionMismatch {
            expected: inst.q,
            got: f.dim(),
        });
    }
    let oracle = OracleUnitary::from_table(
        domain,
        FiniteGroup::cyclic(inst.modulus as usize)?,
        approx.table.clone(),
    )?;
    run_oracle_pipeline(&oracle, f, &PipelineConfig::default())
}

/// Same distribution evaluated per right-register value:
/// `p(y) = Q⁻² Σ_h |Σ_{q: f̃(q)=h} ω^{−qy}|²`.
pub fn fiber_distribution(inst: &PeriodicInstance, approx: &ApproximateFunction) -> Result<OutcomeDistribution> {
    check_shor_caps(inst)?;
    let q = inst.q;
    let roots: Vec<_> = (0..q as u64).map(|k| root_of_unity(k, q as u64)).collect();
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); inst.modulus as usize];
    for (x, &h) in approx.table.iter().enumerate() {
        fibers[h].push(x);
    }
    fibers.retain(|f| !f.is_empty());
    let norm = (q as f64).powi(2);
    let probs: Vec<f64> = (0..q)
        .map(|y| {
            fibers
                .iter()
                .map(|fiber| {
                    fiber
                        .iter()
                        .map(|&x| roots[(q - x * y % q) % q])
                        .sum::<crate::repr::C64>()
                        .norm_sqr()
                })
                .sum::<f64>()
                / norm
        })
        .collect();
    OutcomeDistribution::new((0..q).map(OutcomeLabel::Character).collect(), probs)
}

/// Probability within half a unit of some multiple `jQ/r`, `0 ≤ j < r`.
pub fn peak_mass(dist: &OutcomeDistribution, r: u64, q: usize) -> Result<f64> {
    if r == 0 {
        return Err(QhsError::InvalidParameter("period r must be >= 1".into()));
    }
    let q = q as u64;
    let mut mass = 0.0;
    for (label, p) in dist.iter() {
        let y = match label {
            OutcomeLabel::Character(y) => y as u64,
            other => {
                return Err(QhsError::InvalidParameter(format!(
                    "peak mass needs character outcomes over Z_Q, got {other}"
                )))
            }
        };
        // |y − jQ/r| ≤ 1/2  ⇔  2|y·r − j·Q| ≤ r, j nearest to y·r/Q
        let yr = y * r;
        let j_lo = yr / q;
        let near = [j_lo, j_lo + 1]
            .into_iter()
            .filter(|&j| j < r)
            .any(|j| 2 * yr.abs_diff(j * q) <= r);
        if near {
            mass += p;
        }
    }
    Ok(mass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shor_transversal_table() {
        let t = shor_transversal(4).unwrap();
        assert_eq!(t.table(), &[0, 1, 2, 3]);
        for q in 0..4 {
            assert_eq!(t.project(t.table()[q]).unwrap(), q);
        }
    }

    #[test]
    fn shor_approximation_of_seven_mod_fifteen() {
        let inst = PeriodicInstance::new(15, 7, 16).unwrap();
        assert_eq!(inst.period(), 4);
        let f = approximate_function(&inst, &shor_transversal(16).unwrap()).unwrap();
        assert_eq!(&f.table()[..8], &[1, 7, 4, 13, 1, 7, 4, 13]);
        assert!(f.is_consistent_with(&inst));
        assert_eq!(f.provenance(), Provenance::Shor);
    }

    #[test]
    fn offset_reduces_to_shor_with_unit_bound() {
        for seed in 0..5 {
            assert_eq!(
                offset_transversal(16, 1, seed).unwrap().table(),
                shor_transversal(16).unwrap().table()
            );
        }
        assert!(offset_transversal(16, 0, 0).is_err());
    }

    #[test]
    fn offset_keeps_section_property() {
        for seed in 0..20 {
            let t = offset_transversal(16, 4, seed).unwrap();
            for (q, &x) in t.table().iter().enumerate() {
                assert_eq!(x % 16, q as u64);
            }
        }
    }

    #[test]
    fn offset_destroys_periodicity_when_period_does_not_divide_q() {
        // 2 has order 6 mod 21; 2^{16} ≡ 2^4 so offsets multiply f̃ by 16^{m_q}
        let inst = PeriodicInstance::new(21, 2, 16).unwrap();
        let f = approximate_function(&inst, &offset_transversal(16, 4, 3).unwrap()).unwrap();
        let t = f.table();
        let periodic = (1..16).any(|p| (0..16 - p).all(|x| t[x] == t[x + p]));
        assert!(!periodic, "{t:?}");
    }

    #[test]
    fn finite_transversals() {
        let z12: FiniteGroup = "Z12".parse().unwrap();
        let k = z12.subgroup_from_generators(&[4]).unwrap();
        let t = finite_transversal(&z12, &k, RepresentativePolicy::LeastIndex).unwrap();
        assert_eq!(t.table(), &[0, 1, 2, 3]);
        let r = finite_transversal(&z12, &k, RepresentativePolicy::SeededRandom(5)).unwrap();
        r.verify().unwrap();

        let d4: FiniteGroup = "D4".parse().unwrap();
        let k = d4.subgroup_from_generators(&[2]).unwrap();
        let t = finite_transversal(&d4, &k, RepresentativePolicy::LeastIndex).unwrap();
        assert_eq!(t.table().len(), 4);
        t.verify().unwrap();

        let d3: FiniteGroup = "D3".parse().unwrap();
        let k = d3.subgroup_from_generators(&[3]).unwrap();
        assert_eq!(
            finite_transversal(&d3, &k, RepresentativePolicy::LeastIndex).unwrap_err(),
            QhsError::NotNormal
        );
    }

    #[test]
    fn custom_tables_are_validated() {
        assert!(Transversal::from_integer_table(4, vec![0, 1, 2, 7]).is_ok());
        assert!(Transversal::from_integer_table(4, vec![0, 1, 2, 2]).is_err());
        assert!(Transversal::from_integer_table(4, vec![0, 1, 2]).is_err());
    }

    #[test]
    fn periodic_instance_validation() {
        assert_eq!(
            PeriodicInstance::new(15, 5, 16).unwrap_err(),
            QhsError::NotCoprime { a: 5, n: 15 }
        );
        assert!(PeriodicInstance::new(15, 7, 12).is_err());
        assert_eq!(PeriodicInstance::with_any_q(15, 7, 12).unwrap().period(), 4);
        assert_eq!(PeriodicInstance::new(21, 2, 512).unwrap().period(), 6);
        assert_eq!(multiplicative_order(1, 15).unwrap(), 1);
    }

    #[test]
    fn exact_case_distribution() {
        let inst = PeriodicInstance::new(15, 7, 16).unwrap();
        let d = shor_pipeline(&inst, &shor_transversal(16).unwrap()).unwrap();
        for y in 0..16 {
            let want = if y % 4 == 0 { 0.25 } else { 0.0 };
            assert!((d.probs()[y] - want).abs() < 1e-12, "y={y}");
        }
        assert!((peak_mass(&d, 4, 16).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn offsets_are_invisible_when_period_divides_q() {
        // Q·m_q ≡ 0 mod r, so f̃ is unchanged
        let inst = PeriodicInstance::new(15, 7, 16).unwrap();
        let shor = shor_pipeline(&inst, &shor_transversal(16).unwrap()).unwrap();
        let off = shor_pipeline(&inst, &offset_transversal(16, 15, 1).unwrap()).unwrap();
        assert!(shor.total_variation(&off).unwrap() < 1e-12);
    }

    #[test]
    fn trivial_period_is_point_mass() {
        let inst = PeriodicInstance::new(15, 1, 16).unwrap();
        let d = shor_pipeline(&inst, &shor_transversal(16).unwrap()).unwrap();
        assert!((d.probs()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dense_and_fiber_routes_agree() {
        for (n, a, q, bound) in [(21, 2, 64, 1), (21, 2, 64, 21), (15, 2, 32, 5), (35, 3, 128, 7)] {
            let inst = PeriodicInstance::new(n, a, q).unwrap();
            let tau = offset_transversal(q, bound, 11).unwrap();
            let approx = approximate_function(&inst, &tau).unwrap();
            let dense = shor_pipeline(&inst, &tau).unwrap();
            let fiber = fiber_distribution(&inst, &approx).unwrap();
            assert!(dense.total_variation(&fiber).unwrap() < 1e-12);
        }
    }

    #[test]
    fn shifted_function_is_a_relabelling() {
        let inst = PeriodicInstance::new(15, 7, 16).unwrap();
        let tau = offset_transversal(16, 3, 2).unwrap();
        let base = approximate_function(&inst, &tau).unwrap();
        let moved = approximate_function_shifted(&inst, &tau, 3).unwrap();
        assert!(!moved.is_consistent_with(&inst));
        // f(x + 3) = 7^3 · f(x) mod 15
        for (a, b) in base.table().iter().zip(moved.table()) {
            assert_eq!(*b as u64, 343 * *a as u64 % 15);
        }
    }

    #[test]
    fn peak_mass_edges() {
        let q = 64;
        let uniform = OutcomeDistribution::new(
            (0..q).map(OutcomeLabel::Character).collect(),
            vec![1.0 / q as f64; q],
        )
        .unwrap();
        // peaks at 0, 10.67, 21.33, 32, 42.67, 53.33 -> nearest 0, 11, 21, 32, 43, 53
        assert!((peak_mass(&uniform, 6, q).unwrap() - 6.0 / 64.0).abs() < 1e-12);
        assert!(peak_mass(&uniform, 0, q).is_err());
    }
}
