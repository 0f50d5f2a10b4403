//! Benchmark fixtures; see `benches/`.

use qhs_core::{build_instance, fourier_operator, BasisOrdering, FiniteGroup, FourierOperator, HspInstance, PeriodicInstance};

/// `D_n` with hidden subgroup `⟨s⟩` and its Fourier operator.
pub fn dihedral_instance(n: usize) -> (HspInstance, FourierOperator) {
    let g = FiniteGroup::dihedral(n).unwrap();
    let k = g.subgroup_from_generators(&[g.parse_element("s").unwrap()]).unwrap();
    let f = fourier_operator(&g, &BasisOrdering::default()).unwrap();
    (build_instance(&g, &k, 0).unwrap(), f)
}

pub fn period_instance(n: u64, a: u64, q: usize) -> PeriodicInstance {
    PeriodicInstance::new(n, a, q).unwrap()
}
