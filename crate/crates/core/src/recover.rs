//! Classical post-processing of measurement outcomes into hidden-subgroup
//! candidates.
//!
//! All arithmetic here is exact: characters are tested for triviality with
//! integer arithmetic and continued fractions never divide in floating point.

use rayon::prelude::*;

use crate::engine::{run_pipeline, OutcomeDistribution, OutcomeLabel, PipelineConfig};
use crate::error::{QhsError, Result};
use crate::group::{FiniteGroup, GroupKind, Subgroup};
use crate::oracle::build_instance;
use crate::repr::FourierOperator;
use crate::transversal::{gcd, mod_pow};

/// Largest group order accepted by [`subgroup_consistency_rank`].
pub const CONSISTENCY_LIMIT: usize = 32;

/// Predicted distributions closer than this (total variation) form a tie.
const TIE_TOL: f64 = 1e-12;

/// Observed character indices of an abelian group.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    group: FiniteGroup,
    outcomes: Vec<usize>,
}

impl SampleSet {
    pub fn new(group: &FiniteGroup, outcomes: Vec<usize>) -> Result<Self> {
        if !group.is_abelian() || !group.is_builtin() {
            return Err(QhsError::UnsupportedGroup(format!(
                "character samples need a built-in abelian group, got {group}"
            )));
        }
        if let Some(&y) = outcomes.iter().find(|&&y| y >= group.order()) {
            return Err(QhsError::IndexOutOfRange {
                index: y,
                order: group.order(),
            });
        }
        Ok(SampleSet {
            group: group.clone(),
            outcomes,
        })
    }

    /// Accepts `Character` and `Irrep` labels (identical for abelian groups).
    pub fn from_labels(group: &FiniteGroup, labels: &[OutcomeLabel]) -> Result<Self> {
        let outcomes = labels
            .iter()
            .map(|l| match l {
                OutcomeLabel::Character(y) | OutcomeLabel::Irrep(y) => Ok(*y),
                other => Err(QhsError::InvalidParameter(format!(
                    "{other} is not a character label"
                ))),
            })
            .collect::<Result<_>>()?;
        Self::new(group, outcomes)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    fn with_support(&self, reference: &OutcomeDistribution) -> Result<SampleSet> {
        let extra = SampleSet::from_labels(&self.group, &reference.support())?;
        let mut outcomes = self.outcomes.clone();
        outcomes.extend(extra.outcomes);
        Ok(SampleSet {
            group: self.group.clone(),
            outcomes,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub candidate: Subgroup,
    /// Set only by an independent check: the support of the exact reference
    /// distribution does not shrink the candidate further.
    pub confirmed: bool,
    pub samples_used: usize,
}

/// `χ_y(k) = 1`, decided in integers.
pub fn character_is_trivial(group: &FiniteGroup, y: usize, k: usize) -> Result<bool> {
    match group.kind() {
        GroupKind::Cyclic(n) => Ok((y * k).is_multiple_of(*n)),
        GroupKind::ProductOfCyclics(factors) => {
            let lcm = factors.iter().fold(1usize, |acc, &f| acc / gcd(acc as u64, f as u64) as usize * f);
            let (ys, ks) = (group.components(y)?, group.components(k)?);
            let num: usize = factors
                .iter()
                .enumerate()
                .map(|(i, &f)| (ys[i] * ks[i] % f) * (lcm / f))
                .sum();
            Ok(num.is_multiple_of(lcm))
        }
        _ => Err(QhsError::UnsupportedGroup(format!(
            "{group} has no character indexing"
        ))),
    }
}

fn sieve(samples: &SampleSet) -> Result<Subgroup> {
    let g = &samples.group;
    let mut kernel = Vec::new();
    for k in g.elements() {
        let mut inside = true;
        for &y in &samples.outcomes {
            if !character_is_trivial(g, y, k)? {
                inside = false;
                break;
            }
        }
        if inside {
            kernel.push(k);
        }
    }
    g.subgroup_from_elements(&kernel)
}

/// `K = ∩ ker χ_y` over the samples.
pub fn character_sieve(samples: &SampleSet, reference: Option<&OutcomeDistribution>) -> Result<RecoveryResult> {
    let candidate = sieve(samples)?;
    let confirmed = match reference {
        Some(dist) => sieve(&samples.with_support(dist)?)?.same_elements(&candidate),
        None => false,
    };
    Ok(RecoveryResult {
        candidate,
        confirmed,
        samples_used: samples.len(),
    })
}

fn boolean_rank(group: &FiniteGroup) -> Result<usize> {
    let n = group.order().trailing_zeros() as usize;
    let ok = match group.kind() {
        GroupKind::Cyclic(2) => true,
        GroupKind::ProductOfCyclics(f) => f.iter().all(|&x| x == 2),
        _ => false,
    };
    if !ok {
        return Err(QhsError::UnsupportedGroup(format!(
            "Simon's problem lives on Z2^n, got {group}"
        )));
    }
    Ok(n)
}

/// Basis of `{x : y·x = 0 for every row y}` over the two-element field.
fn null_space(rows: &[u64], n: usize) -> Vec<u64> {
    let mut pivots: Vec<(u32, u64)> = Vec::new();
    for &r in rows {
        let mut v = r;
        for &(bit, p) in &pivots {
            if v >> bit & 1 == 1 {
                v ^= p;
            }
        }
        if v == 0 {
            continue;
        }
        let bit = 63 - v.leading_zeros();
        // keep the basis fully reduced
        for (_, p) in pivots.iter_mut() {
            if *p >> bit & 1 == 1 {
                *p ^= v;
            }
        }
        pivots.push((bit, v));
    }
    let pivot_bits: u64 = pivots.iter().fold(0, |acc, &(b, _)| acc | 1 << b);
    (0..n as u32)
        .filter(|b| pivot_bits >> b & 1 == 0)
        .map(|free| {
            let mut x = 1u64 << free;
            for &(bit, p) in &pivots {
                if p >> free & 1 == 1 {
                    x |= 1 << bit;
                }
            }
            x
        })
        .collect()
}

/// Simon's post-processing: the null space of the sampled vectors.
pub fn simon_solve(samples: &SampleSet, reference: Option<&OutcomeDistribution>) -> Result<RecoveryResult> {
    let n = boolean_rank(&samples.group)?;
    let solve = |set: &SampleSet| -> Result<Subgroup> {
        let rows: Vec<u64> = set.outcomes.iter().map(|&y| y as u64).collect();
        let basis: Vec<usize> = null_space(&rows, n).into_iter().map(|x| x as usize).collect();
        set.group.subgroup_from_generators(&basis)
    };
    let candidate = solve(samples)?;
    let confirmed = match reference {
        Some(dist) => solve(&samples.with_support(dist)?)?.same_elements(&candidate),
        None => false,
    };
    Ok(RecoveryResult {
        candidate,
        confirmed,
        samples_used: samples.len(),
    })
}

/// Smallest convergent denominator `d < N` of `y/Q` with
/// `|y/Q − c/d| ≤ 1/(2Q)`.
pub fn continued_fraction_period(y: u64, q: u64, n: u64) -> Result<Option<u64>> {
    if q == 0 {
        return Err(QhsError::InvalidParameter("Q must be >= 1".into()));
    }
    if y >= q {
        return Err(QhsError::IndexOutOfRange {
            index: y as usize,
            order: q as usize,
        });
    }
    if y == 0 {
        return Ok(None);
    }
    for (c, d) in convergents(y, q) {
        if d >= n {
            break;
        }
        let err = (y as u128 * d as u128).abs_diff(c as u128 * q as u128);
        if 2 * err <= d as u128 {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// Convergents `c/d` of `num/den`, in order.
pub fn convergents(num: u64, den: u64) -> Vec<(u64, u64)> {
    let (mut a, mut b) = (num, den);
    let (mut h1, mut h2) = (1u64, 0u64);
    let (mut k1, mut k2) = (0u64, 1u64);
    let mut out = Vec::new();
    while b != 0 {
        let t = a / b;
        let h = t * h1 + h2;
        let k = t * k1 + k2;
        out.push((h, k));
        (h2, h1) = (h1, h);
        (k2, k1) = (k1, k);
        (a, b) = (b, a % b);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodEstimate {
    pub candidate: Option<u64>,
    /// `a^r ≡ 1 (mod N)` holds for the candidate.
    pub confirmed: bool,
}

/// Least common multiple of per-sample denominators, checked against
/// `a^r ≡ 1 (mod N)`.
pub fn period_from_samples(samples: &[u64], q: u64, n: u64, a: u64) -> Result<PeriodEstimate> {
    let mut r: Option<u64> = None;
    for &y in samples {
        if let Some(d) = continued_fraction_period(y, q, n)? {
            r = Some(match r {
                None => d,
                Some(acc) => acc / gcd(acc, d) * d,
            });
        }
    }
    Ok(PeriodEstimate {
        candidate: r,
        confirmed: r.is_some_and(|r| n >= 2 && mod_pow(a, r, n) == 1),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedCandidate {
    pub subgroup: Subgroup,
    pub distance: f64,
    /// Position (in the ranking) of the first candidate whose predicted
    /// distribution is indistinguishable from this one's.
    pub tie_class: usize,
}

/// Ranks every subgroup by the total-variation distance between its
/// predicted exact distribution and `dist`.
pub fn subgroup_consistency_rank(
    dist: &OutcomeDistribution,
    f: &FourierOperator,
    cfg: &PipelineConfig,
) -> Result<Vec<RankedCandidate>> {
    let group = f.group();
    if group.order() > CONSISTENCY_LIMIT {
        return Err(QhsError::OrderLimit {
            order: group.order(),
            limit: CONSISTENCY_LIMIT,
        });
    }
    let candidates = group.all_subgroups()?;
    let mut scored: Vec<(Subgroup, f64, OutcomeDistribution)> = candidates
        .into_par_iter()
        .map(|k| {
            let predicted = run_pipeline(&build_instance(group, &k, 0)?, f, cfg)?;
            let d = predicted.total_variation(dist)?;
            Ok((k, d, predicted))
        })
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| {
        a.1.total_cmp(&b.1)
            .then_with(|| a.0.elements().cmp(b.0.elements()))
    });
    let mut classes = vec![usize::MAX; scored.len()];
    for i in 0..scored.len() {
        if classes[i] != usize::MAX {
            continue;
        }
        classes[i] = i;
        for j in i + 1..scored.len() {
            if classes[j] == usize::MAX && scored[i].2.total_variation(&scored[j].2)? < TIE_TOL {
                classes[j] = i;
            }
        }
    }
    Ok(scored
        .into_iter()
        .zip(classes)
        .map(|((subgroup, distance, _), tie_class)| RankedCandidate {
            subgroup,
            distance,
            tie_class,
        })
        .collect())
}

/// Tie classes with more than one member, as lists of ranking positions.
pub fn tie_groups(ranking: &[RankedCandidate]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, c) in ranking.iter().enumerate() {
        match groups.iter_mut().find(|g| g[0] == c.tie_class) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups.retain(|g| g.len() > 1);
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> FiniteGroup {
        s.parse().unwrap()
    }

    fn set(grp: &str, ys: &[usize]) -> SampleSet {
        SampleSet::new(&g(grp), ys.to_vec()).unwrap()
    }

    #[test]
    fn simon_examples() {
        let r = simon_solve(&set("Z2^2", &[3]), None).unwrap();
        assert_eq!(r.candidate.elements(), &[0, 3]);
        let r = simon_solve(&set("Z2^2", &[1, 2]), None).unwrap();
        assert_eq!(r.candidate.elements(), &[0]);
        let r = simon_solve(&set("Z2^2", &[]), None).unwrap();
        assert_eq!(r.candidate.order(), 4);
        assert!(!r.confirmed);
        assert!(simon_solve(&set("Z4", &[1]), None).is_err());
    }

    #[test]
    fn sieve_examples() {
        let r = character_sieve(&set("Z12", &[6]), None).unwrap();
        assert_eq!(r.candidate.elements(), &[0, 2, 4, 6, 8, 10]);
        let r = character_sieve(&set("Z12", &[0]), None).unwrap();
        assert_eq!(r.candidate.order(), 12);
        assert!(!r.confirmed);
        let r = character_sieve(&set("Z12", &[4, 6]), None).unwrap();
        assert_eq!(r.candidate.elements(), &[0, 6]);
    }

    #[test]
    fn sieve_handles_mixed_products() {
        // Z2xZ4: y = (1,2) is trivial on k = (1,1)? 1/2 + 2/4 = 1 -> yes
        let grp = g("Z2xZ4");
        let y = grp.parse_element("(1,2)").unwrap();
        let k = grp.parse_element("(1,1)").unwrap();
        assert!(character_is_trivial(&grp, y, k).unwrap());
        let k2 = grp.parse_element("(1,0)").unwrap();
        assert!(!character_is_trivial(&grp, y, k2).unwrap());
    }

    #[test]
    fn sample_sets_reject_bad_input() {
        assert!(SampleSet::new(&g("D4"), vec![0]).is_err());
        assert!(SampleSet::new(&g("Z4"), vec![4]).is_err());
        assert!(SampleSet::from_labels(&g("Z4"), &[OutcomeLabel::Element(1)]).is_err());
    }

    #[test]
    fn convergent_examples() {
        assert_eq!(convergents(12, 16), vec![(0, 1), (1, 1), (3, 4)]);
        assert_eq!(convergents(13, 16), vec![(0, 1), (1, 1), (4, 5), (13, 16)]);
        assert_eq!(continued_fraction_period(12, 16, 15).unwrap(), Some(4));
        assert_eq!(continued_fraction_period(0, 16, 15).unwrap(), None);
        // 4/5: |13·5 − 4·16| = 1 and 2·1 ≤ 5
        assert_eq!(continued_fraction_period(13, 16, 15).unwrap(), Some(5));
        assert!(continued_fraction_period(1, 0, 15).is_err());
        assert!(continued_fraction_period(16, 16, 15).is_err());
    }

    #[test]
    fn period_examples() {
        let e = period_from_samples(&[12, 8], 16, 15, 7).unwrap();
        assert_eq!(e, PeriodEstimate { candidate: Some(4), confirmed: true });
        let e = period_from_samples(&[8], 16, 15, 7).unwrap();
        assert_eq!(e, PeriodEstimate { candidate: Some(2), confirmed: false });
        let e = period_from_samples(&[0, 0, 0], 16, 15, 7).unwrap();
        assert_eq!(e, PeriodEstimate { candidate: None, confirmed: false });
    }

    #[test]
    fn null_space_dimensions() {
        assert_eq!(null_space(&[], 3).len(), 3);
        assert_eq!(null_space(&[0b111, 0b011], 3), vec![0b011]);
        let basis = null_space(&[0b1010, 0b0110, 0b1100], 4);
        assert_eq!(basis.len(), 2);
        for x in basis {
            for r in [0b1010u64, 0b0110, 0b1100] {
                assert_eq!((x & r).count_ones() % 2, 0);
            }
        }
    }
}
