//! Hidden-subgroup instances `f = ι∘γ` and the two-register oracle
//! `U_f |g⟩|h⟩ = |g⟩|f(g)·h⁻¹⟩`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::QuantumState;
use crate::error::{QhsError, Result};
use crate::group::{FiniteGroup, Subgroup};

/// A function on `G` that is constant on the left cosets of `K` and takes
/// distinct values on distinct cosets.
#[derive(Debug, Clone)]
pub struct HspInstance {
    domain: FiniteGroup,
    hidden: Subgroup,
    codomain: FiniteGroup,
    /// Coset index → codomain element.
    injection: Vec<usize>,
    f_table: Vec<usize>,
    seed: u64,
}

/// Builds an instance with codomain `Cyclic(|G|/|K|)` and a seeded injection.
pub fn build_instance(domain: &FiniteGroup, hidden: &Subgroup, seed: u64) -> Result<HspInstance> {
    let cosets = domain.cosets(hidden)?;
    build_instance_with_codomain(domain, hidden, seed, cosets.len())
}

/// Same as [`build_instance`] with codomain `Cyclic(codomain_order)`, which
/// must be at least the number of cosets.
pub fn build_instance_with_codomain(
    domain: &FiniteGroup,
    hidden: &Subgroup,
    seed: u64,
    codomain_order: usize,
) -> Result<HspInstance> {
    let cosets = domain.cosets(hidden)?;
    if codomain_order < cosets.len() {
        return Err(QhsError::InvalidParameter(format!(
            "codomain of order {codomain_order} cannot separate {} cosets",
            cosets.len()
        )));
    }
    let codomain = FiniteGroup::cyclic(codomain_order)?;
    let mut values: Vec<usize> = codomain.elements().collect();
    values.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    values.truncate(cosets.len());
    let f_table = domain
        .elements()
        .map(|g| values[cosets.block_of(g)])
        .collect();
    Ok(HspInstance {
        domain: domain.clone(),
        hidden: hidden.clone(),
        codomain,
        injection: values,
        f_table,
        seed,
    })
}

impl HspInstance {
    pub fn domain(&self) -> &FiniteGroup {
        &self.domain
    }

    pub fn hidden(&self) -> &Subgroup {
        &self.hidden
    }

    pub fn codomain(&self) -> &FiniteGroup {
        &self.codomain
    }

    pub fn injection(&self) -> &[usize] {
        &self.injection
    }

    pub fn f_table(&self) -> &[usize] {
        &self.f_table
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn f(&self, g: usize) -> usize {
        self.f_table[g]
    }

    pub fn oracle(&self) -> OracleUnitary {
        OracleUnitary {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            f_table: self.f_table.clone(),
        }
    }
}

/// The basis permutation `|g⟩|h⟩ ↦ |g⟩|f(g)·h⁻¹⟩` for an arbitrary tabulated
/// `f: G → H`.
#[derive(Debug, Clone)]
pub struct OracleUnitary {
    domain: FiniteGroup,
    codomain: FiniteGroup,
    f_table: Vec<usize>,
}

impl OracleUnitary {
    pub fn from_table(domain: FiniteGroup, codomain: FiniteGroup, f_table: Vec<usize>) -> Result<Self> {
        if f_table.len() != domain.order() {
            return Err(QhsError::DimensionMismatch {
                expected: domain.order(),
                got: f_table.len(),
            });
        }
        if let Some(&bad) = f_table.iter().find(|&&v| v >= codomain.order()) {
            return Err(QhsError::IndexOutOfRange {
                index: bad,
                order: codomain.order(),
            });
        }
        Ok(OracleUnitary {
            domain,
            codomain,
            f_table,
        })
    }

    pub fn domain(&self) -> &FiniteGroup {
        &self.domain
    }

    pub fn codomain(&self) -> &FiniteGroup {
        &self.codomain
    }

    pub fn f_table(&self) -> &[usize] {
        &self.f_table
    }

    /// Right-register index that `(g, h)` is sent to.
    pub fn target(&self, g: usize, h: usize) -> usize {
        self.codomain
            .mul(self.f_table[g], self.codomain.inverse(h))
    }

    pub fn apply(&self, psi: &QuantumState) -> Result<QuantumState> {
        let (ng, nh) = psi.dims();
        if ng != self.domain.order() || nh != self.codomain.order() {
            return Err(QhsError::DimensionMismatch {
                expected: self.domain.order() * self.codomain.order(),
                got: ng * nh,
            });
        }
        let src = psi.amplitudes();
        let mut out = vec![Default::default(); src.len()];
        for g in 0..ng {
            for h in 0..nh {
                out[g * nh + self.target(g, h)] = src[g * nh + h];
            }
        }
        QuantumState::from_amplitudes(ng, nh, out)
    }
}

pub fn apply_oracle(u: &OracleUnitary, psi: &QuantumState) -> Result<QuantumState> {
    u.apply(psi)
}

/// Recovers `K = {g : f(g) = f(e)}` by scanning the table, then checks that
/// `f` really factors through `G/K` with distinct values per coset.
pub fn classical_brute_force_hsp(instance: &HspInstance) -> Result<Subgroup> {
    hidden_subgroup_of_table(&instance.domain, &instance.f_table)
}

pub fn hidden_subgroup_of_table(domain: &FiniteGroup, f_table: &[usize]) -> Result<Subgroup> {
    if f_table.len() != domain.order() {
        return Err(QhsError::DimensionMismatch {
            expected: domain.order(),
            got: f_table.len(),
        });
    }
    let fe = f_table[0];
    let candidate: Vec<usize> = domain.elements().filter(|&g| f_table[g] == fe).collect();
    let k = domain
        .subgroup_from_elements(&candidate)
        .map_err(|e| QhsError::Integrity(format!("level set of f(e) is not a subgroup: {e}")))?;
    let cosets = domain.cosets(&k)?;
    let mut seen = std::collections::HashSet::new();
    for block in cosets.blocks() {
        let v = f_table[block[0]];
        if block.iter().any(|&g| f_table[g] != v) {
            return Err(QhsError::Integrity(format!(
                "f is not constant on the coset of {}",
                block[0]
            )));
        }
        if !seen.insert(v) {
            return Err(QhsError::Integrity(format!(
                "f repeats value {v} on distinct cosets"
            )));
        }
    }
    Ok(k)
}
