#![allow(dead_code)]

use qhs_core::{FiniteGroup, C64};

/// Every built-in group of order at most 64 exercised by the suites.
pub fn builtin_groups_upto_64() -> Vec<FiniteGroup> {
    let mut out: Vec<FiniteGroup> = (1..=64).map(|n| FiniteGroup::cyclic(n).unwrap()).collect();
    out.extend((1..=6).map(|n| FiniteGroup::boolean(n).unwrap()));
    for spec in [
        "Z2xZ4", "Z2xZ6", "Z3xZ3", "Z2xZ8", "Z4xZ4", "Z2^2xZ4", "Z3xZ6", "Z2xZ3xZ5",
        "Z2^2xZ8", "Z4xZ8", "Z2xZ4xZ8", "Z8xZ8", "Z4^3", "Z3xZ9", "Z5xZ5", "Z6xZ6",
        "Z2xZ16", "Z2xZ32",
    ] {
        out.push(spec.parse().unwrap());
    }
    out.extend((1..=32).map(|n| FiniteGroup::dihedral(n).unwrap()));
    out
}

pub fn max_dev(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `exp(2πi·k/n)` straight from `sin`/`cos`, without exact quarter turns.
pub fn plain_root(k: i64, n: i64) -> C64 {
    let theta = std::f64::consts::TAU * (k.rem_euclid(n) as f64) / n as f64;
    C64::new(theta.cos(), theta.sin())
}

/// Dense `n×n` complex matrix product, row-major.
pub fn matmul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub fn matvec(a: &[C64], v: &[C64]) -> Vec<C64> {
    let n = v.len();
    (0..a.len() / n)
        .map(|i| (0..n).map(|j| a[i * n + j] * v[j]).sum())
        .collect()
}
