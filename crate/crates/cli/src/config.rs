//! Experiment configuration: strict JSON in, validated config out.

use std::fmt;
use std::path::PathBuf;

use qhs_core::engine::MAX_STATE_DIM;
use qhs_core::group::MAX_ORDER;
use qhs_core::recover::CONSISTENCY_LIMIT;
use qhs_core::transversal::{gcd, SHOR_CAP};
use qhs_core::{FiniteGroup, MeasureGranularity, QhsError, SecondTransform, Subgroup};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    Simon,
    Shor,
    SweepTransversal,
    Irreps,
    FourierCheck,
    Recover,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Simon => "simon",
            ExperimentKind::Shor => "shor",
            ExperimentKind::SweepTransversal => "sweep-transversal",
            ExperimentKind::Irreps => "irreps",
            ExperimentKind::FourierCheck => "fourier-check",
            ExperimentKind::Recover => "recover",
        };
        f.write_str(s)
    }
}

/// A group element as written in a config: an index, a component tuple, or
/// a label such as `"r^2"` or `"101"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementSpec {
    Index(usize),
    Tuple(Vec<usize>),
    Label(String),
}

impl ElementSpec {
    pub fn resolve(&self, group: &FiniteGroup) -> qhs_core::Result<usize> {
        match self {
            ElementSpec::Index(i) => group.parse_element(&i.to_string()),
            ElementSpec::Tuple(d) => group.element_from_components(d),
            ElementSpec::Label(s) => {
                // bitstrings over Z2^n, most significant component first
                if is_boolean(group) && !s.is_empty() && s.chars().all(|c| c == '0' || c == '1') {
                    let digits: Vec<usize> = s.bytes().map(|b| (b - b'0') as usize).collect();
                    group.element_from_components(&digits)
                } else {
                    group.parse_element(s)
                }
            }
        }
    }
}

pub(crate) fn is_boolean(group: &FiniteGroup) -> bool {
    match group.kind() {
        qhs_core::GroupKind::Cyclic(2) => true,
        qhs_core::GroupKind::ProductOfCyclics(f) => f.iter().all(|&x| x == 2),
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransversalChoice {
    Shor,
    Offset,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransversalSpec {
    pub kind: TransversalChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecondTransformSpec {
    #[default]
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GranularitySpec {
    #[default]
    FullTriple,
    IrrepLabelOnly,
}

impl From<SecondTransformSpec> for SecondTransform {
    fn from(s: SecondTransformSpec) -> Self {
        match s {
            SecondTransformSpec::Forward => SecondTransform::Forward,
            SecondTransformSpec::Inverse => SecondTransform::Inverse,
        }
    }
}

impl From<GranularitySpec> for MeasureGranularity {
    fn from(s: GranularitySpec) -> Self {
        match s {
            GranularitySpec::FullTriple => MeasureGranularity::FullTriple,
            GranularitySpec::IrrepLabelOnly => MeasureGranularity::IrrepLabelOnly,
        }
    }
}

pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_SWEEP_SEEDS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_generators: Option<Vec<ElementSpec>>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<u64>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_any_q: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transversal: Option<TransversalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Number of offset transversals in a sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<usize>,
    #[serde(default, alias = "master_seed")]
    pub seed: u64,
    /// Seed of the injection `ι`; defaults to `seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_transform: Option<SecondTransformSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure_granularity: Option<GranularitySpec>,
    /// Distribution CSV to rank against (`recover`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            group: None,
            hidden_generators: None,
            n: None,
            a: None,
            q: None,
            allow_any_q: false,
            transversal: None,
            trials: None,
            seeds: None,
            seed: 0,
            instance_seed: None,
            second_transform: None,
            measure_granularity: None,
            dist: None,
        }
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(DEFAULT_TRIALS)
    }

    pub fn sweep_seeds(&self) -> usize {
        self.seeds.unwrap_or(DEFAULT_SWEEP_SEEDS)
    }

    pub fn instance_seed(&self) -> u64 {
        self.instance_seed.unwrap_or(self.seed)
    }

    pub fn pipeline(&self) -> qhs_core::PipelineConfig {
        qhs_core::PipelineConfig {
            second_transform: self.second_transform.unwrap_or_default().into(),
            measure_granularity: self.measure_granularity.unwrap_or_default().into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The group named by `group`, or a field error.
    pub fn parsed_group(&self) -> Result<FiniteGroup, CliError> {
        let text = self
            .group
            .as_deref()
            .ok_or_else(|| CliError::field("group", "required for this experiment"))?;
        text.parse::<FiniteGroup>().map_err(|e| match e {
            QhsError::OrderLimit { .. } => CliError::ResourceCap(format!("group: {e}")),
            _ => CliError::field("group", e.to_string()),
        })
    }

    /// The subgroup generated by `hidden_generators` (trivial when absent).
    pub fn hidden_subgroup(&self, group: &FiniteGroup) -> Result<Subgroup, CliError> {
        let gens = self
            .hidden_generators
            .iter()
            .flatten()
            .map(|s| s.resolve(group))
            .collect::<qhs_core::Result<Vec<usize>>>()
            .map_err(|e| CliError::field("hidden_generators", e.to_string()))?;
        group
            .subgroup_from_generators(&gens)
            .map_err(|e| CliError::field("hidden_generators", e.to_string()))
    }

    /// Periodic-function parameters `(N, a, Q)`, checked.
    pub fn period_params(&self) -> Result<(u64, u64, usize), CliError> {
        let n = self.n.ok_or_else(|| CliError::field("N", "required"))?;
        let a = self.a.ok_or_else(|| CliError::field("a", "required"))?;
        let q = self.q.ok_or_else(|| CliError::field("Q", "required"))?;
        if n < 2 {
            return Err(CliError::field("N", "must be >= 2"));
        }
        if a == 0 || a >= n {
            return Err(CliError::field("a", format!("must satisfy 1 <= a < N = {n}")));
        }
        let d = gcd(a, n);
        if d != 1 {
            return Err(CliError::field("a", format!("gcd({a},{n}) = {d} ≠ 1")));
        }
        if q == 0 {
            return Err(CliError::field("Q", "must be >= 1"));
        }
        if !q.is_power_of_two() && !self.allow_any_q {
            return Err(CliError::field(
                "Q",
                format!("{q} is not a power of two (set allow_any_q to override)"),
            ));
        }
        if q > MAX_ORDER {
            return Err(CliError::ResourceCap(format!("Q = {q} exceeds {MAX_ORDER}")));
        }
        if (q as u64).saturating_mul(n) > SHOR_CAP {
            return Err(CliError::ResourceCap(format!(
                "Q·N = {} exceeds {SHOR_CAP}",
                q as u64 * n
            )));
        }
        Ok((n, a, q))
    }

    fn positive(&self, field: &'static str, v: Option<usize>) -> Result<(), CliError> {
        match v {
            Some(0) => Err(CliError::field(field, "must be >= 1")),
            _ => Ok(()),
        }
    }

    fn reject(&self, fields: &[(&'static str, bool)]) -> Result<(), CliError> {
        for &(name, present) in fields {
            if present {
                return Err(CliError::field(
                    name,
                    format!("not used by experiment {}", self.experiment),
                ));
            }
        }
        Ok(())
    }

    /// Structural and resource checks; nothing is computed beyond what is
    /// needed to bound the run.
    pub fn validate(&self) -> Result<(), CliError> {
        self.positive("trials", self.trials)?;
        self.positive("seeds", self.seeds)?;
        let period_fields = [
            ("N", self.n.is_some()),
            ("a", self.a.is_some()),
            ("Q", self.q.is_some()),
            ("allow_any_q", self.allow_any_q),
            ("transversal", self.transversal.is_some()),
        ];
        match self.experiment {
            ExperimentKind::Simulate | ExperimentKind::Simon => {
                self.reject(&period_fields)?;
                self.reject(&[("seeds", self.seeds.is_some()), ("dist", self.dist.is_some())])?;
                let g = self.parsed_group()?;
                let k = self.hidden_subgroup(&g)?;
                let h = g.order() / k.order();
                if g.order() * h > MAX_STATE_DIM {
                    return Err(CliError::ResourceCap(format!(
                        "|G|·|H| = {} exceeds {MAX_STATE_DIM}",
                        g.order() * h
                    )));
                }
                if self.experiment == ExperimentKind::Simon {
                    if !is_boolean(&g) {
                        return Err(CliError::field("group", format!("{g} is not Z2^n")));
                    }
                    self.reject(&[
                        ("second_transform", self.second_transform.is_some()),
                        ("measure_granularity", self.measure_granularity.is_some()),
                    ])?;
                } else if !g.is_abelian()
                    && self.pipeline().second_transform == SecondTransform::Inverse
                    && self.pipeline().measure_granularity == MeasureGranularity::IrrepLabelOnly
                {
                    return Err(CliError::field(
                        "measure_granularity",
                        "irrep-label-only needs the forward second transform on non-abelian groups",
                    ));
                }
            }
            ExperimentKind::Shor | ExperimentKind::SweepTransversal => {
                self.reject(&[
                    ("group", self.group.is_some()),
                    ("hidden_generators", self.hidden_generators.is_some()),
                    ("instance_seed", self.instance_seed.is_some()),
                    ("second_transform", self.second_transform.is_some()),
                    ("measure_granularity", self.measure_granularity.is_some()),
                    ("dist", self.dist.is_some()),
                ])?;
                self.period_params()?;
                let t = self.transversal.as_ref();
                if self.experiment == ExperimentKind::Shor {
                    self.reject(&[("seeds", self.seeds.is_some())])?;
                    let t = t.ok_or_else(|| CliError::field("transversal", "required"))?;
                    match (t.kind, t.bound) {
                        (TransversalChoice::Offset, None) => {
                            return Err(CliError::field("transversal.bound", "required for offset"))
                        }
                        (TransversalChoice::Offset, Some(0)) => {
                            return Err(CliError::field("transversal.bound", "must be >= 1"))
                        }
                        (TransversalChoice::Shor, Some(_)) => {
                            return Err(CliError::field("transversal.bound", "only used by offset"))
                        }
                        _ => {}
                    }
                } else {
                    self.reject(&[("trials", self.trials.is_some())])?;
                    let bound = t
                        .filter(|t| t.kind == TransversalChoice::Offset)
                        .and_then(|t| t.bound)
                        .ok_or_else(|| {
                            CliError::field("transversal", "a sweep needs {\"kind\":\"offset\",\"bound\":B}")
                        })?;
                    if bound == 0 {
                        return Err(CliError::field("transversal.bound", "must be >= 1"));
                    }
                }
            }
            ExperimentKind::Irreps | ExperimentKind::FourierCheck => {
                self.reject(&period_fields)?;
                self.reject(&[
                    ("hidden_generators", self.hidden_generators.is_some()),
                    ("trials", self.trials.is_some()),
                    ("seeds", self.seeds.is_some()),
                    ("instance_seed", self.instance_seed.is_some()),
                    ("second_transform", self.second_transform.is_some()),
                    ("measure_granularity", self.measure_granularity.is_some()),
                    ("dist", self.dist.is_some()),
                ])?;
                self.parsed_group()?;
            }
            ExperimentKind::Recover => {
                self.reject(&period_fields)?;
                self.reject(&[
                    ("hidden_generators", self.hidden_generators.is_some()),
                    ("trials", self.trials.is_some()),
                    ("seeds", self.seeds.is_some()),
                    ("instance_seed", self.instance_seed.is_some()),
                ])?;
                if self.dist.is_none() {
                    return Err(CliError::field("dist", "required"));
                }
                let g = self.parsed_group()?;
                if g.order() > CONSISTENCY_LIMIT {
                    return Err(CliError::ResourceCap(format!(
                        "ranking every subgroup is limited to order {CONSISTENCY_LIMIT}, got {}",
                        g.order()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Strict parse: unknown keys, wrong types and failed checks are all errors.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}
