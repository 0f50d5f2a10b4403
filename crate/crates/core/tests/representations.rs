mod common;

use common::{max_dev, plain_root};
use proptest::prelude::*;
use qhs_core::repr::{contragredient_by_inverse, root_of_unity};
use qhs_core::{
    contragredient, fourier_operator, irreps_of, BasisOrdering, BlockOrder, FiniteGroup,
    IrrepOrder, C64,
};

/// Character-table DFT built directly from `exp(−2πi·⟨y,g⟩)`, one row per
/// dual element in mixed-radix order.
fn character_dft(factors: &[usize]) -> Vec<C64> {
    let n: usize = factors.iter().product();
    let digits = |mut x: usize| {
        let mut d = vec![0; factors.len()];
        for (i, &m) in factors.iter().enumerate().rev() {
            d[i] = x % m;
            x /= m;
        }
        d
    };
    let scale = 1.0 / (n as f64).sqrt();
    let mut out = Vec::with_capacity(n * n);
    for y in 0..n {
        let yd = digits(y);
        for g in 0..n {
            let gd = digits(g);
            let mut z = C64::new(1.0, 0.0);
            for ((&a, &b), &m) in yd.iter().zip(&gd).zip(factors) {
                z *= plain_root(-((a * b) as i64), m as i64);
            }
            out.push(z * scale);
        }
    }
    out
}

/// Finds `P` with `F = P·C` by matching each row of `F` to a distinct row of `C`.
fn row_permutation(f: &[C64], c: &[C64], n: usize, tol: f64) -> Option<Vec<usize>> {
    let mut used = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    for i in 0..n {
        let row = &f[i * n..(i + 1) * n];
        let j = (0..n).find(|&j| !used[j] && max_dev(row, &c[j * n..(j + 1) * n]) < tol)?;
        used[j] = true;
        perm.push(j);
    }
    Some(perm)
}

#[test]
fn cyclic_fourier_is_a_row_permutation_of_the_character_dft() {
    for n in 1..=32 {
        let g = FiniteGroup::cyclic(n).unwrap();
        let f = fourier_operator(&g, &BasisOrdering::default()).unwrap();
        let c = character_dft(&[n]);
        let perm = row_permutation(f.matrix(), &c, n, 1e-12)
            .unwrap_or_else(|| panic!("Z{n}: no row permutation"));
        // labels are characters, so the permutation is the identity under the default ordering
        assert!(perm.iter().enumerate().all(|(i, &j)| i == j), "Z{n}: {perm:?}");
    }
}

#[test]
fn product_fourier_matches_character_dft_under_every_ordering() {
    let orderings = [
        BasisOrdering::default(),
        BasisOrdering {
            irreps: IrrepOrder::DimDescending,
            within_block: BlockOrder::ColumnMajor,
        },
        BasisOrdering {
            irreps: IrrepOrder::Explicit((0..12).rev().collect()),
            within_block: BlockOrder::RowMajor,
        },
    ];
    for factors in [vec![2, 6], vec![2, 2, 3], vec![3, 4]] {
        let g = FiniteGroup::product(&factors).unwrap();
        let c = character_dft(&factors);
        for ord in &orderings {
            let f = fourier_operator(&g, ord).unwrap();
            let perm = row_permutation(f.matrix(), &c, 12, 1e-12).expect("row permutation");
            for (i, row) in f.rows().iter().enumerate() {
                assert_eq!(perm[i], row.irrep, "{g}: row label is the character index");
            }
        }
    }
}

#[test]
fn every_ordering_gives_a_unitary_operator() {
    for n in [3, 4, 5, 6, 8] {
        let d = FiniteGroup::dihedral(n).unwrap();
        let labels: Vec<usize> = irreps_of(&d).unwrap().iter().map(|p| p.label()).collect();
        let mut reversed = labels.clone();
        reversed.reverse();
        for irreps in [
            IrrepOrder::DimThenLabel,
            IrrepOrder::Label,
            IrrepOrder::DimDescending,
            IrrepOrder::Explicit(reversed),
        ] {
            for within_block in [BlockOrder::RowMajor, BlockOrder::ColumnMajor] {
                let ord = BasisOrdering {
                    irreps: irreps.clone(),
                    within_block,
                };
                let f = fourier_operator(&d, &ord).unwrap();
                assert!(f.unitarity_residual() < 1e-12, "D{n} {ord:?}");
                let mut rows = f.rows().to_vec();
                rows.sort();
                rows.dedup();
                assert_eq!(rows.len(), d.order());
            }
        }
    }
}

#[test]
fn explicit_ordering_must_be_a_permutation() {
    let d = FiniteGroup::dihedral(4).unwrap();
    for bad in [vec![0, 1, 2], vec![0, 0, 1, 2, 3], vec![0, 1, 2, 3, 9]] {
        let ord = BasisOrdering {
            irreps: IrrepOrder::Explicit(bad.clone()),
            within_block: BlockOrder::RowMajor,
        };
        assert!(fourier_operator(&d, &ord).is_err(), "{bad:?}");
    }
}

#[test]
fn contragredient_routes_agree_and_are_involutive() {
    for n in 1..=12 {
        let d = FiniteGroup::dihedral(n).unwrap();
        for pi in irreps_of(&d).unwrap() {
            let conj = contragredient(&pi).unwrap();
            let lit = contragredient_by_inverse(&d, &pi).unwrap();
            for g in d.elements() {
                assert!(max_dev(conj.matrix(g), lit.matrix(g)) < 1e-12, "D{n} irrep {}", pi.label());
            }
            let back = contragredient(&conj).unwrap();
            for g in d.elements() {
                assert!(max_dev(back.matrix(g), pi.matrix(g)) < 1e-15);
            }
        }
    }
}

#[test]
fn dihedral_characters_are_orthonormal() {
    for n in 1..=16 {
        let d = FiniteGroup::dihedral(n).unwrap();
        let irreps = irreps_of(&d).unwrap();
        for p in &irreps {
            for q in &irreps {
                let ip: C64 = d
                    .elements()
                    .map(|g| p.character(g) * q.character(g).conj())
                    .sum::<C64>()
                    / d.order() as f64;
                let want = if p.label() == q.label() { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-12, "D{n}: ⟨χ{}, χ{}⟩ = {ip}", p.label(), q.label());
            }
        }
        let expected_count = if n % 2 == 0 { 4 + (n - 1) / 2 } else { 2 + (n - 1) / 2 };
        assert_eq!(irreps.len(), expected_count, "D{n}");
    }
}

proptest! {
    #[test]
    fn roots_of_unity_match_trigonometry(k in 0u64..10_000, n in 1u64..5_000) {
        let z = root_of_unity(k, n);
        let w = plain_root(k as i64, n as i64);
        prop_assert!((z - w).norm() < 1e-12);
        prop_assert!((z.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn forward_then_adjoint_is_identity(n in 1usize..=12, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let d = FiniteGroup::dihedral(n).unwrap();
        let f = fourier_operator(&d, &BasisOrdering::default()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<C64> = (0..d.order()).map(|_| C64::new(rng.gen(), rng.gen())).collect();
        let back = f.apply_adjoint(&f.apply(&v));
        prop_assert!(max_dev(&back, &v) < 1e-12);
    }
}
