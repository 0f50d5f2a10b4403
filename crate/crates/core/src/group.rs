//! Finite groups with dense integer element indices.
//!
//! Every built-in group enumerates its elements in a fixed canonical order and
//! the identity always has index 0:
//!
//! * `Cyclic(N)`: residues `0..N`, composed by addition mod `N`.
//! * `ProductOfCyclics([N₁, …, Nₘ])`: mixed-radix tuples with the first
//!   component most significant, so `Z2^3` indices read as binary numbers.
//! * `Dihedral(N)`: `e, r, …, r^{N-1}, s, rs, …, r^{N-1}s` with `s r s⁻¹ = r⁻¹`.
//!
//! Quotients are materialized as Cayley tables.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{QhsError, Result};

/// Largest group order accepted by the constructors.
pub const MAX_ORDER: usize = 4096;

/// Largest group order for which [`FiniteGroup::all_subgroups`] will run.
pub const SUBGROUP_LATTICE_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CayleyTable {
    order: usize,
    mul: Vec<usize>,
    inv: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupKind {
    Cyclic(usize),
    ProductOfCyclics(Vec<usize>),
    Dihedral(usize),
    /// A group given by its multiplication table (quotients end up here).
    Table(Arc<CayleyTable>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    kind: GroupKind,
    order: usize,
}

/// Human-readable canonical label of an element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElementForm {
    Residue(usize),
    Tuple(Vec<usize>),
    Dihedral { rotation: usize, reflection: bool },
    Indexed(usize),
}

impl fmt::Display for ElementForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementForm::Residue(x) => write!(f, "{x}"),
            ElementForm::Tuple(xs) => {
                write!(f, "(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            ElementForm::Dihedral {
                rotation,
                reflection,
            } => match (rotation, reflection) {
                (0, false) => write!(f, "e"),
                (0, true) => write!(f, "s"),
                (1, false) => write!(f, "r"),
                (1, true) => write!(f, "rs"),
                (a, false) => write!(f, "r^{a}"),
                (a, true) => write!(f, "r^{a}s"),
            },
            ElementForm::Indexed(i) => write!(f, "#{i}"),
        }
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(QhsError::OrderLimit {
            order,
            limit: MAX_ORDER,
        });
    }
    Ok(())
}

impl FiniteGroup {
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(QhsError::InvalidParameter("cyclic group order must be >= 1".into()));
        }
        check_order(n)?;
        Ok(FiniteGroup {
            kind: GroupKind::Cyclic(n),
            order: n,
        })
    }

    pub fn product(factors: &[usize]) -> Result<Self> {
        if factors.is_empty() || factors.contains(&0) {
            return Err(QhsError::InvalidParameter(
                "product factors must be a non-empty list of positive orders".into(),
            ));
        }
        let mut order = 1usize;
        for &n in factors {
            order = order.checked_mul(n).ok_or(QhsError::OrderLimit {
                order: usize::MAX,
                limit: MAX_ORDER,
            })?;
            check_order(order)?;
        }
        Ok(FiniteGroup {
            kind: GroupKind::ProductOfCyclics(factors.to_vec()),
            order,
        })
    }

    /// `(Z_2)^n`, the group of Simon's problem.
    pub fn boolean(n: usize) -> Result<Self> {
        Self::product(&vec![2; n])
    }

    pub fn dihedral(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(QhsError::InvalidParameter("dihedral parameter must be >= 1".into()));
        }
        check_order(2 * n)?;
        Ok(FiniteGroup {
            kind: GroupKind::Dihedral(n),
            order: 2 * n,
        })
    }

    /// Builds a group from a row-major multiplication table whose identity is
    /// index 0. Inverses are derived from the table.
    pub fn from_table(order: usize, mul: Vec<usize>) -> Result<Self> {
        if order == 0 || mul.len() != order * order {
            return Err(QhsError::DimensionMismatch {
                expected: order * order,
                got: mul.len(),
            });
        }
        check_order(order)?;
        if let Some(&bad) = mul.iter().find(|&&x| x >= order) {
            return Err(QhsError::IndexOutOfRange { index: bad, order });
        }
        for a in 0..order {
            if mul[a] != a || mul[a * order] != a {
                return Err(QhsError::Integrity("index 0 is not the identity".into()));
            }
        }
        let mut inv = vec![usize::MAX; order];
        for a in 0..order {
            inv[a] = (0..order)
                .find(|&b| mul[a * order + b] == 0)
                .ok_or_else(|| QhsError::Integrity(format!("element {a} has no inverse")))?;
        }
        Ok(FiniteGroup {
            kind: GroupKind::Table(Arc::new(CayleyTable { order, mul, inv })),
            order,
        })
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self.kind, GroupKind::Table(_))
    }

    pub fn is_abelian(&self) -> bool {
        match &self.kind {
            GroupKind::Cyclic(_) | GroupKind::ProductOfCyclics(_) => true,
            GroupKind::Dihedral(n) => *n <= 2,
            GroupKind::Table(_) => self
                .generators()
                .iter()
                .enumerate()
                .all(|(i, &a)| self.generators()[i..].iter().all(|&b| self.mul(a, b) == self.mul(b, a))),
        }
    }

    fn check(&self, a: usize) -> Result<()> {
        if a >= self.order {
            Err(QhsError::IndexOutOfRange {
                index: a,
                order: self.order,
            })
        } else {
            Ok(())
        }
    }

    /// Group composition `a·b`.
    pub fn op(&self, a: usize, b: usize) -> Result<usize> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub fn inv(&self, a: usize) -> Result<usize> {
        self.check(a)?;
        Ok(self.inverse(a))
    }

    /// Composition on indices already known to be valid.
    pub(crate) fn mul(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < self.order && b < self.order);
        match &self.kind {
            GroupKind::Cyclic(n) => (a + b) % n,
            GroupKind::ProductOfCyclics(factors) => {
                let mut out = 0;
                let mut place = 1;
                let (mut x, mut y) = (a, b);
                for &n in factors.iter().rev() {
                    out += ((x % n + y % n) % n) * place;
                    place *= n;
                    x /= n;
                    y /= n;
                }
                out
            }
            GroupKind::Dihedral(n) => {
                let n = *n;
                let (ra, sa) = (a % n, a >= n);
                let (rb, sb) = (b % n, b >= n);
                let rot = if sa { (ra + n - rb) % n } else { (ra + rb) % n };
                rot + if sa != sb { n } else { 0 }
            }
            GroupKind::Table(t) => t.mul[a * t.order + b],
        }
    }

    pub(crate) fn inverse(&self, a: usize) -> usize {
        debug_assert!(a < self.order);
        match &self.kind {
            GroupKind::Cyclic(n) => (n - a) % n,
            GroupKind::ProductOfCyclics(factors) => {
                let mut out = 0;
                let mut place = 1;
                let mut x = a;
                for &n in factors.iter().rev() {
                    out += ((n - x % n) % n) * place;
                    place *= n;
                    x /= n;
                }
                out
            }
            GroupKind::Dihedral(n) => {
                if a < *n {
                    (n - a) % n
                } else {
                    a
                }
            }
            GroupKind::Table(t) => t.inv[a],
        }
    }

    /// A generating set of the whole group.
    pub fn generators(&self) -> Vec<usize> {
        match &self.kind {
            GroupKind::Cyclic(n) => {
                if *n == 1 {
                    vec![]
                } else {
                    vec![1]
                }
            }
            GroupKind::ProductOfCyclics(factors) => {
                let mut gens = Vec::new();
                let mut place = 1;
                for &n in factors.iter().rev() {
                    if n > 1 {
                        gens.push(place);
                    }
                    place *= n;
                }
                gens.reverse();
                gens
            }
            GroupKind::Dihedral(n) => {
                if *n == 1 {
                    vec![1]
                } else {
                    vec![1, *n]
                }
            }
            GroupKind::Table(_) => (1..self.order).collect(),
        }
    }

    pub fn element_order(&self, a: usize) -> Result<usize> {
        self.check(a)?;
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        Ok(k)
    }

    /// Mixed-radix components of an element of a product (or cyclic) group.
    pub fn components(&self, a: usize) -> Result<Vec<usize>> {
        self.check(a)?;
        match &self.kind {
            GroupKind::Cyclic(_) => Ok(vec![a]),
            GroupKind::ProductOfCyclics(factors) => {
                let mut digits = vec![0; factors.len()];
                let mut x = a;
                for (i, &n) in factors.iter().enumerate().rev() {
                    digits[i] = x % n;
                    x /= n;
                }
                Ok(digits)
            }
            _ => Err(QhsError::UnsupportedGroup(format!(
                "{self} has no component representation"
            ))),
        }
    }

    pub fn element_from_components(&self, digits: &[usize]) -> Result<usize> {
        let factors: Vec<usize> = match &self.kind {
            GroupKind::Cyclic(n) => vec![*n],
            GroupKind::ProductOfCyclics(factors) => factors.clone(),
            _ => {
                return Err(QhsError::UnsupportedGroup(format!(
                    "{self} has no component representation"
                )))
            }
        };
        if digits.len() != factors.len() {
            return Err(QhsError::DimensionMismatch {
                expected: factors.len(),
                got: digits.len(),
            });
        }
        let mut idx = 0;
        for (&d, &n) in digits.iter().zip(&factors) {
            if d >= n {
                return Err(QhsError::IndexOutOfRange { index: d, order: n });
            }
            idx = idx * n + d;
        }
        Ok(idx)
    }

    pub fn label(&self, a: usize) -> Result<ElementForm> {
        self.check(a)?;
        Ok(match &self.kind {
            GroupKind::Cyclic(_) => ElementForm::Residue(a),
            GroupKind::ProductOfCyclics(_) => ElementForm::Tuple(self.components(a)?),
            GroupKind::Dihedral(n) => ElementForm::Dihedral {
                rotation: a % n,
                reflection: a >= *n,
            },
            GroupKind::Table(_) => ElementForm::Indexed(a),
        })
    }

    /// Parses an element label: a plain index, a component tuple such as
    /// `(1,0,1)`, or a dihedral word such as `r^2s`.
    pub fn parse_element(&self, text: &str) -> Result<usize> {
        let t = text.trim();
        if let Ok(i) = t.parse::<usize>() {
            self.check(i)?;
            return Ok(i);
        }
        match &self.kind {
            GroupKind::ProductOfCyclics(_) | GroupKind::Cyclic(_) => {
                let inner = t.trim_start_matches('(').trim_end_matches(')');
                let digits = inner
                    .split(',')
                    .map(|d| d.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| QhsError::parse("element", text))?;
                self.element_from_components(&digits)
            }
            GroupKind::Dihedral(n) => {
                let (word, reflection) = match t.strip_suffix('s') {
                    Some(w) => (w, true),
                    None => (t, false),
                };
                let rotation = match word {
                    "" | "e" => 0,
                    "r" => 1 % *n,
                    w => {
                        let exp = w
                            .strip_prefix("r^")
                            .or_else(|| w.strip_prefix('r'))
                            .ok_or_else(|| QhsError::parse("element", text))?;
                        exp.parse::<usize>()
                            .map_err(|_| QhsError::parse("element", text))?
                    }
                };
                if rotation >= *n {
                    return Err(QhsError::IndexOutOfRange {
                        index: rotation,
                        order: *n,
                    });
                }
                Ok(rotation + if reflection { *n } else { 0 })
            }
            GroupKind::Table(_) => Err(QhsError::parse("element", text)),
        }
    }

    fn closure_from(&self, seed: &[usize], gens: &[usize]) -> Vec<bool> {
        let mut member = vec![false; self.order];
        let mut queue = VecDeque::new();
        member[0] = true;
        queue.push_back(0);
        for &x in seed {
            if !member[x] {
                member[x] = true;
                queue.push_back(x);
            }
        }
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !member[y] {
                    member[y] = true;
                    queue.push_back(y);
                }
            }
        }
        member
    }

    fn is_normal_mask(&self, member: &[bool]) -> bool {
        let gens = self.generators();
        (0..self.order).filter(|&k| member[k]).all(|k| {
            gens.iter()
                .all(|&g| member[self.mul(self.mul(g, k), self.inverse(g))])
        })
    }

    fn subgroup_from_mask(&self, member: &[bool], generators: Vec<usize>) -> Subgroup {
        let elements: Vec<usize> = (0..self.order).filter(|&x| member[x]).collect();
        Subgroup {
            parent_order: self.order,
            normal: self.is_normal_mask(member),
            elements,
            generators,
        }
    }

    /// The subgroup generated by `gens`.
    pub fn subgroup_from_generators(&self, gens: &[usize]) -> Result<Subgroup> {
        for &g in gens {
            self.check(g)?;
        }
        let member = self.closure_from(&[], gens);
        Ok(self.subgroup_from_mask(&member, gens.to_vec()))
    }

    /// Wraps an explicit element set, refusing anything that is not closed.
    pub fn subgroup_from_elements(&self, elements: &[usize]) -> Result<Subgroup> {
        let mut member = vec![false; self.order];
        for &x in elements {
            self.check(x)?;
            member[x] = true;
        }
        if !member[0] {
            return Err(QhsError::NotASubgroup("identity missing".into()));
        }
        let els: Vec<usize> = (0..self.order).filter(|&x| member[x]).collect();
        for &a in &els {
            for &b in &els {
                if !member[self.mul(a, b)] {
                    return Err(QhsError::NotASubgroup(format!(
                        "product of {a} and {b} leaves the set"
                    )));
                }
            }
        }
        Ok(self.subgroup_from_mask(&member, els[1..].to_vec()))
    }

    pub fn trivial_subgroup(&self) -> Subgroup {
        Subgroup {
            parent_order: self.order,
            elements: vec![0],
            generators: vec![],
            normal: true,
        }
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup {
            parent_order: self.order,
            elements: self.elements().collect(),
            generators: self.generators(),
            normal: true,
        }
    }

    fn check_subgroup(&self, k: &Subgroup) -> Result<()> {
        if k.parent_order != self.order {
            return Err(QhsError::NotASubgroup(format!(
                "subgroup belongs to a group of order {}, not {}",
                k.parent_order, self.order
            )));
        }
        for &g in k.generators.iter().chain(&k.elements) {
            self.check(g)?;
        }
        let closed = k
            .elements
            .iter()
            .all(|&x| k.generators.iter().all(|&g| k.contains(self.mul(x, g))));
        if !closed || !k.contains(0) {
            return Err(QhsError::NotASubgroup("element set is not closed".into()));
        }
        Ok(())
    }

    /// Left cosets `gK`, ordered by representative; each block is sorted and
    /// its first entry is the least-index representative.
    pub fn cosets(&self, k: &Subgroup) -> Result<Cosets> {
        self.check_subgroup(k)?;
        let mut block_of = vec![usize::MAX; self.order];
        let mut blocks = Vec::with_capacity(self.order / k.order());
        for g in 0..self.order {
            if block_of[g] != usize::MAX {
                continue;
            }
            let mut block: Vec<usize> = k.elements.iter().map(|&x| self.mul(g, x)).collect();
            block.sort_unstable();
            for &x in &block {
                block_of[x] = blocks.len();
            }
            blocks.push(block);
        }
        Ok(Cosets { blocks, block_of })
    }

    /// `G/K` with its natural epimorphism. Refused unless `K` is normal.
    pub fn quotient(&self, k: &Subgroup) -> Result<Quotient> {
        self.check_subgroup(k)?;
        if !k.normal {
            return Err(QhsError::NotNormal);
        }
        let cosets = self.cosets(k)?;
        let m = cosets.len();
        let reps = cosets.representatives();
        let mut mul = vec![0; m * m];
        for (i, &a) in reps.iter().enumerate() {
            for (j, &b) in reps.iter().enumerate() {
                mul[i * m + j] = cosets.block_of[self.mul(a, b)];
            }
        }
        Ok(Quotient {
            group: FiniteGroup::from_table(m, mul)?,
            projection: cosets.block_of,
            representatives: reps,
        })
    }

    /// Every subgroup, sorted by `(order, element list)`. Limited to order 64.
    pub fn all_subgroups(&self) -> Result<Vec<Subgroup>> {
        if self.order > SUBGROUP_LATTICE_LIMIT {
            return Err(QhsError::OrderLimit {
                order: self.order,
                limit: SUBGROUP_LATTICE_LIMIT,
            });
        }
        let to_mask = |member: &[bool]| -> u64 {
            member
                .iter()
                .enumerate()
                .filter(|(_, &m)| m)
                .fold(0u64, |acc, (i, _)| acc | (1 << i))
        };
        let mut found: HashMap<u64, Vec<usize>> = HashMap::new();
        let mut cyclic: Vec<(usize, u64)> = Vec::new();
        for x in self.elements() {
            let mask = to_mask(&self.closure_from(&[], &[x]));
            if let std::collections::hash_map::Entry::Vacant(e) = found.entry(mask) {
                e.insert(if x == 0 { vec![] } else { vec![x] });
                cyclic.push((x, mask));
            }
        }
        let mut work: Vec<u64> = found.keys().copied().collect();
        work.sort_unstable();
        while let Some(h) = work.pop() {
            let gens = found[&h].clone();
            let seed: Vec<usize> = (0..self.order).filter(|&i| h >> i & 1 == 1).collect();
            for &(x, cmask) in &cyclic {
                if cmask & !h == 0 {
                    continue;
                }
                let mut joined_gens = gens.clone();
                joined_gens.push(x);
                let mask = to_mask(&self.closure_from(&seed, &joined_gens));
                if let std::collections::hash_map::Entry::Vacant(e) = found.entry(mask) {
                    e.insert(joined_gens);
                    work.push(mask);
                }
            }
        }
        let mut subgroups: Vec<Subgroup> = found
            .into_iter()
            .map(|(mask, gens)| {
                let member: Vec<bool> = (0..self.order).map(|i| mask >> i & 1 == 1).collect();
                self.subgroup_from_mask(&member, gens)
            })
            .collect();
        subgroups.sort_by(|a, b| {
            (a.order(), &a.elements).cmp(&(b.order(), &b.elements))
        });
        Ok(subgroups)
    }
}

impl fmt::Display for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GroupKind::Cyclic(n) => write!(f, "Z{n}"),
            GroupKind::Dihedral(n) => write!(f, "D{n}"),
            GroupKind::ProductOfCyclics(factors) => {
                let mut first = true;
                let mut i = 0;
                while i < factors.len() {
                    let n = factors[i];
                    let run = factors[i..].iter().take_while(|&&m| m == n).count();
                    if !first {
                        write!(f, "x")?;
                    }
                    first = false;
                    if run > 1 {
                        write!(f, "Z{n}^{run}")?;
                    } else {
                        write!(f, "Z{n}")?;
                    }
                    i += run;
                }
                Ok(())
            }
            GroupKind::Table(t) => write!(f, "table({})", t.order),
        }
    }
}

impl FromStr for FiniteGroup {
    type Err = QhsError;

    /// Accepts `Z6`, `Z2^3`, `Z2xZ4`, `Z2^2xZ4`, `D4`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let err = || QhsError::parse("group", s);
        if let Some(n) = t.strip_prefix('D') {
            return FiniteGroup::dihedral(n.parse().map_err(|_| err())?);
        }
        let mut factors = Vec::new();
        for part in t.split('x') {
            let body = part.strip_prefix('Z').ok_or_else(err)?;
            let (n, reps) = match body.split_once('^') {
                Some((n, k)) => (n, k.parse::<usize>().map_err(|_| err())?),
                None => (body, 1),
            };
            let n: usize = n.parse().map_err(|_| err())?;
            if reps == 0 {
                return Err(err());
            }
            factors.extend(std::iter::repeat_n(n, reps));
        }
        match factors.as_slice() {
            [] => Err(err()),
            [n] if !t.contains('^') => FiniteGroup::cyclic(*n),
            _ => FiniteGroup::product(&factors),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    parent_order: usize,
    elements: Vec<usize>,
    generators: Vec<usize>,
    normal: bool,
}

impl Subgroup {
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn parent_order(&self) -> usize {
        self.parent_order
    }

    pub fn is_normal(&self) -> bool {
        self.normal
    }

    pub fn contains(&self, x: usize) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    /// Same element set, regardless of generators.
    pub fn same_elements(&self, other: &Subgroup) -> bool {
        self.parent_order == other.parent_order && self.elements == other.elements
    }
}

/// Left cosets of a subgroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cosets {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Cosets {
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Index of the coset containing `g`.
    pub fn block_of(&self, g: usize) -> usize {
        self.block_of[g]
    }

    pub fn representatives(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b[0]).collect()
    }
}

/// A quotient group together with the projection `G → G/K`.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub group: FiniteGroup,
    projection: Vec<usize>,
    representatives: Vec<usize>,
}

impl Quotient {
    pub fn project(&self, g: usize) -> Result<usize> {
        self.projection
            .get(g)
            .copied()
            .ok_or(QhsError::IndexOutOfRange {
                index: g,
                order: self.projection.len(),
            })
    }

    pub fn projection(&self) -> &[usize] {
        &self.projection
    }

    /// Least-index representative of each coset, in quotient index order.
    pub fn representatives(&self) -> &[usize] {
        &self.representatives
    }
}
