//! Irreducible unitary representations of the built-in groups and the
//! non-abelian Fourier operator assembled from their contragredients.
//!
//! The Fourier operator sends the amplitude vector of a state over the group
//! basis to the direct sum of endomorphism blocks, one `dᵢ × dᵢ` block per
//! irrep. Row `(i, j, k)` has entries `√(dᵢ/|G|) · conj(πᵢ(g)ⱼₖ)`; the scaling is
//! the unique per-block factor that makes the operator unitary.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{QhsError, Result};
use crate::group::{FiniteGroup, GroupKind};

pub type C64 = Complex64;

const UNITARY_TOL: f64 = 1e-12;

/// `exp(2πi · num/den)` with the angle reduced exactly; quarter turns are
/// returned as exact `±1`, `±i`.
pub fn root_of_unity(num: u64, den: u64) -> C64 {
    let m = num % den;
    if m == 0 {
        return C64::new(1.0, 0.0);
    }
    if (4 * m).is_multiple_of(den) {
        return match 4 * m / den {
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    let theta = std::f64::consts::TAU * (m as f64) / (den as f64);
    C64::new(theta.cos(), theta.sin())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn mat_mul(a: &[C64], b: &[C64], d: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

/// Max entry of `|M·M† − I|`.
fn unitarity_defect(m: &[C64], d: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                acc += m[i * d + k] * m[j * d + k].conj();
            }
            if i == j {
                acc -= 1.0;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

/// A unitary matrix representation `π: G → U(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Irrep {
    label: usize,
    dim: usize,
    /// Row-major `dim × dim` matrix for every element index.
    matrices: Vec<Vec<C64>>,
}

impl Irrep {
    pub fn new(label: usize, dim: usize, matrices: Vec<Vec<C64>>) -> Result<Self> {
        if dim == 0 {
            return Err(QhsError::InvalidParameter("representation dimension must be >= 1".into()));
        }
        if let Some(m) = matrices.iter().find(|m| m.len() != dim * dim) {
            return Err(QhsError::DimensionMismatch {
                expected: dim * dim,
                got: m.len(),
            });
        }
        Ok(Irrep {
            label,
            dim,
            matrices,
        })
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn group_order(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrix(&self, g: usize) -> &[C64] {
        &self.matrices[g]
    }

    pub fn entry(&self, g: usize, row: usize, col: usize) -> C64 {
        self.matrices[g][row * self.dim + col]
    }

    pub fn character(&self, g: usize) -> C64 {
        (0..self.dim).map(|j| self.entry(g, j, j)).sum()
    }

    /// `(1/|G|) Σ_g |χ(g)|²`; equals 1 exactly for irreducible representations.
    pub fn character_norm(&self) -> f64 {
        let n = self.group_order() as f64;
        (0..self.group_order())
            .map(|g| self.character(g).norm_sqr())
            .sum::<f64>()
            / n
    }

    pub fn max_unitarity_defect(&self) -> f64 {
        self.matrices
            .iter()
            .map(|m| unitarity_defect(m, self.dim))
            .fold(0.0, f64::max)
    }

    /// Max entry of `|π(ab) − π(a)π(b)|` over the given pairs.
    pub fn homomorphism_defect(
        &self,
        group: &FiniteGroup,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, b) in pairs {
            let prod = mat_mul(self.matrix(a), self.matrix(b), self.dim);
            let ab = self.matrix(group.mul(a, b));
            for (x, y) in prod.iter().zip(ab) {
                worst = worst.max((x - y).norm());
            }
        }
        worst
    }
}

/// A complete set of inequivalent irreps, indexed by label.
///
/// Abelian kinds yield their characters (label = character index, which for
/// cyclic and product groups coincides with the element index of the dual
/// element). `Dihedral(N)` yields the trivial and sign representations, the
/// two extra one-dimensional representations when `N` is even, then the
/// two-dimensional `ρ_k`, `k = 1..⌊(N−1)/2⌋`, with
/// `ρ_k(r) = diag(ω^k, ω^{−k})` and `ρ_k(s)` the swap.
pub fn irreps_of(group: &FiniteGroup) -> Result<Vec<Irrep>> {
    let n = group.order();
    match group.kind() {
        GroupKind::Cyclic(m) => {
            let m = *m as u64;
            Ok((0..n)
                .map(|y| Irrep {
                    label: y,
                    dim: 1,
                    matrices: (0..n)
                        .map(|x| vec![root_of_unity((x as u64 * y as u64) % m, m)])
                        .collect(),
                })
                .collect())
        }
        GroupKind::ProductOfCyclics(factors) => {
            let lcm = factors
                .iter()
                .fold(1u64, |acc, &f| acc / gcd(acc, f as u64) * f as u64);
            let comps: Vec<Vec<usize>> = group
                .elements()
                .map(|x| group.components(x))
                .collect::<Result<_>>()?;
            Ok((0..n)
                .map(|y| Irrep {
                    label: y,
                    dim: 1,
                    matrices: (0..n)
                        .map(|x| {
                            let num: u64 = factors
                                .iter()
                                .enumerate()
                                .map(|(i, &f)| {
                                    let f = f as u64;
                                    (comps[x][i] as u64 * comps[y][i] as u64 % f) * (lcm / f)
                                })
                                .sum();
                            vec![root_of_unity(num, lcm)]
                        })
                        .collect(),
                })
                .collect())
        }
        GroupKind::Dihedral(m) => {
            let m = *m;
            let split = |x: usize| (x % m, x >= m);
            let sign = |odd: bool| C64::new(if odd { -1.0 } else { 1.0 }, 0.0);
            let mut out = Vec::new();
            let mut one_dim: Vec<Box<dyn Fn(usize, bool) -> C64>> = vec![
                Box::new(|_, _| sign(false)),
                Box::new(move |_, s| sign(s)),
            ];
            if m % 2 == 0 {
                one_dim.push(Box::new(move |a, _| sign(a % 2 == 1)));
                one_dim.push(Box::new(move |a, s| sign((a % 2 == 1) != s)));
            }
            for chi in one_dim {
                let label = out.len();
                out.push(Irrep {
                    label,
                    dim: 1,
                    matrices: (0..n)
                        .map(|x| {
                            let (a, s) = split(x);
                            vec![chi(a, s)]
                        })
                        .collect(),
                });
            }
            let zero = C64::new(0.0, 0.0);
            for k in 1..=(m.saturating_sub(1)) / 2 {
                let label = out.len();
                let matrices = (0..n)
                    .map(|x| {
                        let (a, s) = split(x);
                        let w = root_of_unity((a * k) as u64, m as u64);
                        let wbar = root_of_unity(((m - a * k % m) % m) as u64, m as u64);
                        if s {
                            vec![zero, w, wbar, zero]
                        } else {
                            vec![w, zero, zero, wbar]
                        }
                    })
                    .collect();
                out.push(Irrep {
                    label,
                    dim: 2,
                    matrices,
                });
            }
            Ok(out)
        }
        GroupKind::Table(_) => Err(QhsError::UnsupportedGroup(format!(
            "no irreducible representations known for {group}"
        ))),
    }
}

/// The contragredient `g ↦ π(g⁻¹)ᵀ`, realized as the entrywise conjugate,
/// which coincides for unitary input. Non-unitary input is refused.
pub fn contragredient(pi: &Irrep) -> Result<Irrep> {
    let residual = pi.max_unitarity_defect();
    if residual > UNITARY_TOL {
        return Err(QhsError::NotUnitary { residual });
    }
    Ok(Irrep {
        label: pi.label,
        dim: pi.dim,
        matrices: pi
            .matrices
            .iter()
            .map(|m| m.iter().map(|z| z.conj()).collect())
            .collect(),
    })
}

/// The contragredient computed from its definition, `g ↦ π(g⁻¹)ᵀ`.
pub fn contragredient_by_inverse(group: &FiniteGroup, pi: &Irrep) -> Result<Irrep> {
    if pi.group_order() != group.order() {
        return Err(QhsError::DimensionMismatch {
            expected: group.order(),
            got: pi.group_order(),
        });
    }
    let d = pi.dim;
    let matrices = group
        .elements()
        .map(|g| {
            let m = pi.matrix(group.inverse(g));
            (0..d * d).map(|idx| m[(idx % d) * d + idx / d]).collect()
        })
        .collect();
    Ok(Irrep {
        label: pi.label,
        dim: d,
        matrices,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum IrrepOrder {
    /// Dimension ascending, then label ascending.
    #[default]
    DimThenLabel,
    Label,
    DimDescending,
    /// Explicit permutation of irrep labels.
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockOrder {
    #[default]
    RowMajor,
    ColumnMajor,
}

/// Row ordering of the Fourier operator.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BasisOrdering {
    pub irreps: IrrepOrder,
    pub within_block: BlockOrder,
}

/// Row label `(irrep, row, column)` of the Fourier operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FourierRow {
    pub irrep: usize,
    pub row: usize,
    pub col: usize,
}

/// The `|G| × |G|` unitary Fourier operator of a group.
#[derive(Debug, Clone)]
pub struct FourierOperator {
    group: FiniteGroup,
    irreps: Vec<Irrep>,
    rows: Vec<FourierRow>,
    /// Row-major, `rows.len() × |G|`.
    matrix: Vec<C64>,
}

pub fn fourier_operator(group: &FiniteGroup, ordering: &BasisOrdering) -> Result<FourierOperator> {
    let irreps = irreps_of(group)?;
    let mut order: Vec<usize> = (0..irreps.len()).collect();
    match &ordering.irreps {
        IrrepOrder::DimThenLabel => order.sort_by_key(|&i| (irreps[i].dim, irreps[i].label)),
        IrrepOrder::Label => {}
        IrrepOrder::DimDescending => {
            order.sort_by_key(|&i| (std::cmp::Reverse(irreps[i].dim), irreps[i].label))
        }
        IrrepOrder::Explicit(perm) => {
            let mut sorted = perm.clone();
            sorted.sort_unstable();
            if sorted != order {
                return Err(QhsError::InvalidParameter(format!(
                    "explicit irrep order must be a permutation of 0..{}",
                    irreps.len()
                )));
            }
            order = perm.clone();
        }
    }
    let n = group.order();
    let mut rows = Vec::with_capacity(n);
    for &i in &order {
        let d = irreps[i].dim;
        for a in 0..d {
            for b in 0..d {
                let (row, col) = match ordering.within_block {
                    BlockOrder::RowMajor => (a, b),
                    BlockOrder::ColumnMajor => (b, a),
                };
                rows.push(FourierRow {
                    irrep: irreps[i].label,
                    row,
                    col,
                });
            }
        }
    }
    if rows.len() != n {
        return Err(QhsError::Integrity(format!(
            "irrep dimensions squared sum to {}, expected {n}",
            rows.len()
        )));
    }
    let duals: Vec<Irrep> = irreps.iter().map(contragredient).collect::<Result<_>>()?;
    let mut matrix = Vec::with_capacity(n * n);
    for r in &rows {
        let pi = &duals[r.irrep];
        let scale = (pi.dim as f64 / n as f64).sqrt();
        matrix.extend((0..n).map(|g| pi.entry(g, r.row, r.col) * scale));
    }
    Ok(FourierOperator {
        group: group.clone(),
        irreps,
        rows,
        matrix,
    })
}

impl FourierOperator {
    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn irreps(&self) -> &[Irrep] {
        &self.irreps
    }

    pub fn rows(&self) -> &[FourierRow] {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn matrix(&self) -> &[C64] {
        &self.matrix
    }

    pub fn entry(&self, row: usize, g: usize) -> C64 {
        self.matrix[row * self.dim() + g]
    }

    /// Normalization factor `√(dᵢ/|G|)` of the block a row belongs to.
    pub fn row_scale(&self, row: usize) -> f64 {
        let d = self.irreps[self.rows[row].irrep].dim;
        (d as f64 / self.dim() as f64).sqrt()
    }

    /// Row index belonging to the trivial representation.
    pub fn trivial_row(&self) -> usize {
        self.rows
            .iter()
            .position(|r| r.irrep == 0)
            .expect("label 0 is always the trivial representation")
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        (0..n)
            .map(|r| {
                self.matrix[r * n..(r + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn apply_adjoint(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (r, &vr) in v.iter().enumerate() {
            if vr == C64::new(0.0, 0.0) {
                continue;
            }
            for (o, a) in out.iter_mut().zip(&self.matrix[r * n..(r + 1) * n]) {
                *o += a.conj() * vr;
            }
        }
        out
    }

    /// Max entry of `|F·F† − I|` and `|F†·F − I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut rows = C64::new(0.0, 0.0);
                let mut cols = C64::new(0.0, 0.0);
                for k in 0..n {
                    rows += m[i * n + k] * m[j * n + k].conj();
                    cols += m[k * n + i].conj() * m[k * n + j];
                }
                if i == j {
                    rows -= 1.0;
                    cols -= 1.0;
                }
                worst = worst.max(rows.norm()).max(cols.norm());
            }
        }
        worst
    }
}

/// Numerical certificate that a representation set is complete, irreducible,
/// pairwise inequivalent, and unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationReport {
    /// `Σ dᵢ² − |G|`.
    pub completeness_defect: i64,
    /// Largest Schur orthogonality residual over all entry pairs.
    pub max_schur_residual: f64,
    /// Largest unitarity defect over irrep matrices and the Fourier operator.
    pub max_unitarity_residual: f64,
    /// Largest `|π(ab) − π(a)π(b)|`; exhaustive up to order 16, 1000 seeded
    /// random pairs above.
    pub max_homomorphism_residual: f64,
}

pub fn verify_representation_suite(group: &FiniteGroup) -> Result<RepresentationReport> {
    let irreps = irreps_of(group)?;
    let n = group.order();
    let sum_sq: usize = irreps.iter().map(|p| p.dim * p.dim).sum();

    let mut schur: f64 = 0.0;
    for p in &irreps {
        for q in &irreps {
            let scale = p.dim as f64 / n as f64;
            for j in 0..p.dim {
                for k in 0..p.dim {
                    for jj in 0..q.dim {
                        for kk in 0..q.dim {
                            let acc: C64 = (0..n)
                                .map(|g| p.entry(g, j, k) * q.entry(g, jj, kk).conj())
                                .sum::<C64>()
                                * scale;
                            let target =
                                if p.label == q.label && j == jj && k == kk { 1.0 } else { 0.0 };
                            schur = schur.max((acc - target).norm());
                        }
                    }
                }
            }
        }
    }

    let pairs: Vec<(usize, usize)> = if n <= 16 {
        group
            .elements()
            .flat_map(|a| group.elements().map(move |b| (a, b)))
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        (0..1000)
            .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
            .collect()
    };
    let hom = irreps
        .iter()
        .map(|p| p.homomorphism_defect(group, pairs.iter().copied()))
        .fold(0.0, f64::max);

    let f = fourier_operator(group, &BasisOrdering::default())?;
    let unitary = irreps
        .iter()
        .map(Irrep::max_unitarity_defect)
        .fold(f.unitarity_residual(), f64::max);

    Ok(RepresentationReport {
        completeness_defect: sum_sq as i64 - n as i64,
        max_schur_residual: schur,
        max_unitarity_residual: unitary,
        max_homomorphism_residual: hom,
    })
}
