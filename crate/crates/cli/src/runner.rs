//! Executes a validated config and writes its artifacts.
//!
//! Every file written here is a pure function of the config bytes: trials
//! draw from per-trial derived seeds and are gathered in trial order.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use qhs_core::recover::tie_groups;
use qhs_core::transversal::approximate_function;
use qhs_core::{
    build_instance, character_sieve, classical_brute_force_hsp, derive_seed, fourier_operator,
    irreps_of, offset_transversal, peak_mass, period_from_samples, run_pipeline,
    sample_trials, shor_pipeline, shor_transversal, simon_solve, step_trace,
    subgroup_consistency_rank, verify_representation_suite, BasisOrdering, FiniteGroup,
    MeasureGranularity, OutcomeDistribution, OutcomeLabel, PeriodicInstance, PipelineConfig,
    SampleSet, SecondTransform, Subgroup,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::value::RawValue;

use crate::config::{is_boolean, ExperimentConfig, ExperimentKind, TransversalChoice};
use crate::error::CliError;

pub const DISTRIBUTION_CSV: &str = "distribution.csv";
pub const SAMPLES_CSV: &str = "samples.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const REPORT_JSON: &str = "report.json";

/// `x` with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// An `f64` serialized as a JSON number with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom(format!("non-finite number {}", self.0)));
        }
        let raw = RawValue::from_string(fmt17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SubgroupJson {
    pub elements: Vec<String>,
    pub indices: Vec<usize>,
    pub generators: Vec<String>,
    pub order: usize,
    pub normal: bool,
}

impl SubgroupJson {
    fn new(group: &FiniteGroup, k: &Subgroup) -> Result<Self, CliError> {
        let label = |x: &usize| -> Result<String, CliError> { element_text(group, *x) };
        Ok(SubgroupJson {
            elements: k.elements().iter().map(label).collect::<Result<_, _>>()?,
            indices: k.elements().to_vec(),
            generators: k.generators().iter().map(label).collect::<Result<_, _>>()?,
            order: k.order(),
            normal: k.is_normal(),
        })
    }
}

/// Bitstrings over `Z2^n`, the usual label otherwise.
fn element_text(group: &FiniteGroup, x: usize) -> Result<String, CliError> {
    if is_boolean(group) {
        Ok(group.components(x)?.iter().map(|d| char::from(b'0' + *d as u8)).collect())
    } else {
        Ok(group.label(x)?.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DistEntry {
    pub label: String,
    pub probability: F17,
}

#[derive(Debug, Clone, Serialize)]
pub struct SieveJson {
    pub candidate: SubgroupJson,
    pub confirmed: bool,
    pub samples_used: usize,
    pub matches_hidden: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankedJson {
    pub rank: usize,
    pub subgroup: SubgroupJson,
    pub distance: F17,
    pub tie_class: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub group: String,
    pub hidden: SubgroupJson,
    pub distribution_csv: String,
    pub samples_csv: String,
    pub distribution: Vec<DistEntry>,
    pub samples: Vec<String>,
    pub norms: Vec<F17>,
    pub brute_force_hidden: SubgroupJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sieve: Option<SieveJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consistency: Option<Vec<RankedJson>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimonReport {
    pub group: String,
    pub hidden: SubgroupJson,
    pub distribution_csv: String,
    pub samples_csv: String,
    pub recovered_generators: Vec<String>,
    pub recovered: SubgroupJson,
    pub confirmed: bool,
    pub trials_used: usize,
    pub matches_brute_force: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodJson {
    pub candidate: Option<u64>,
    pub confirmed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShorReport {
    pub distribution_csv_path: String,
    pub samples_csv: String,
    pub r_true: u64,
    pub peak_mass: F17,
    pub samples: Vec<u64>,
    pub period_estimate: PeriodJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub peak_mass_shor: F17,
    pub peak_mass_offset: F17,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub sweep_csv: String,
    pub r_true: u64,
    pub seeds: usize,
    pub peak_mass_shor: F17,
    pub median_offset_peak_mass: F17,
    pub shor_wins: usize,
    #[serde(skip)]
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IrrepJson {
    pub label: usize,
    pub dim: usize,
    /// `[re, im]` per group element.
    pub character: Vec<[F17; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IrrepsReport {
    pub group: String,
    pub elements: Vec<String>,
    pub irreps: Vec<IrrepJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FourierCheckReport {
    pub group: String,
    pub completeness_defect: i64,
    pub max_schur_residual: F17,
    pub max_unitarity_residual: F17,
    pub max_homomorphism_residual: F17,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoverReport {
    pub group: String,
    pub dist: String,
    pub candidates: Vec<RankedJson>,
    /// Ranking positions that predict indistinguishable distributions.
    pub tie_groups: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum ReportBody {
    Simulate(SimulateReport),
    Simon(SimonReport),
    Shor(ShorReport),
    Sweep(SweepReport),
    Irreps(IrrepsReport),
    FourierCheck(FourierCheckReport),
    Recover(RecoverReport),
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub version: &'static str,
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub config: ExperimentConfig,
    #[serde(flatten)]
    pub body: ReportBody,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

pub fn distribution_csv(dist: &OutcomeDistribution) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(["outcome_label", "probability"]).map_err(err)?;
    for (label, p) in dist.iter() {
        w.write_record([label.to_string(), fmt17(p)]).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
}

fn samples_csv(labels: &[String], master_seed: u64) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(["trial", "seed", "outcome_label"]).map_err(err)?;
    for (t, label) in labels.iter().enumerate() {
        w.write_record([t.to_string(), derive_seed(master_seed, t as u64).to_string(), label.clone()])
            .map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(["seed", "peak_mass_shor", "peak_mass_offset"]).map_err(err)?;
    for r in rows {
        w.write_record([r.seed.to_string(), fmt17(r.peak_mass_shor.0), fmt17(r.peak_mass_offset.0)])
            .map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
}

/// Reads a distribution CSV (`outcome_label,probability`) into a map.
pub fn read_distribution_csv(path: &Path) -> Result<BTreeMap<OutcomeLabel, f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::field("dist", format!("{}: {e}", path.display())))?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| CliError::field("dist", e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["outcome_label", "probability"] {
        return Err(CliError::field("dist", "expected header outcome_label,probability"));
    }
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::field("dist", e))?;
        let label: OutcomeLabel = rec[0].parse().map_err(|e| CliError::field("dist", e))?;
        let p: f64 = rec[1]
            .trim()
            .parse()
            .map_err(|_| CliError::field("dist", format!("bad probability {:?}", &rec[1])))?;
        if out.insert(label, p).is_some() {
            return Err(CliError::field("dist", format!("duplicate outcome {label}")));
        }
    }
    Ok(out)
}

fn rank_json(group: &FiniteGroup, ranking: &[qhs_core::RankedCandidate]) -> Result<Vec<RankedJson>, CliError> {
    ranking
        .iter()
        .enumerate()
        .map(|(i, c)| {
            Ok(RankedJson {
                rank: i,
                subgroup: SubgroupJson::new(group, &c.subgroup)?,
                distance: F17(c.distance),
                tie_class: c.tie_class,
            })
        })
        .collect()
}

fn labels_text(labels: &[OutcomeLabel]) -> Vec<String> {
    labels.iter().map(|l| l.to_string()).collect()
}

fn simulate(cfg: &ExperimentConfig, out: &Path) -> Result<SimulateReport, CliError> {
    let g = cfg.parsed_group()?;
    let k = cfg.hidden_subgroup(&g)?;
    let inst = build_instance(&g, &k, cfg.instance_seed())?;
    let f = fourier_operator(&g, &BasisOrdering::default())?;
    let pipeline = cfg.pipeline();
    let trace = step_trace(&inst, &f, &pipeline)?;
    let dist = run_pipeline(&inst, &f, &pipeline)?;
    let samples = sample_trials(&dist, cfg.trials(), cfg.seed);
    let brute = classical_brute_force_hsp(&inst)?;
    if !brute.same_elements(&k) {
        return Err(CliError::Internal("brute-force search disagrees with the constructed K".into()));
    }

    let character_outcomes = g.is_abelian()
        && !matches!(g.kind(), qhs_core::GroupKind::Dihedral(_))
        && pipeline.second_transform == SecondTransform::Forward;
    let sieve = if character_outcomes {
        let set = SampleSet::from_labels(&g, &samples)?;
        let res = character_sieve(&set, Some(&dist))?;
        Some(SieveJson {
            matches_hidden: res.candidate.same_elements(&k),
            candidate: SubgroupJson::new(&g, &res.candidate)?,
            confirmed: res.confirmed,
            samples_used: res.samples_used,
        })
    } else {
        None
    };
    let consistency = if !character_outcomes && g.order() <= qhs_core::recover::CONSISTENCY_LIMIT {
        Some(rank_json(&g, &subgroup_consistency_rank(&dist, &f, &pipeline)?)?)
    } else {
        None
    };

    write_file(&out.join(DISTRIBUTION_CSV), &distribution_csv(&dist)?)?;
    let sample_text = labels_text(&samples);
    write_file(&out.join(SAMPLES_CSV), &samples_csv(&sample_text, cfg.seed)?)?;
    Ok(SimulateReport {
        group: g.to_string(),
        hidden: SubgroupJson::new(&g, &k)?,
        distribution_csv: DISTRIBUTION_CSV.into(),
        samples_csv: SAMPLES_CSV.into(),
        distribution: dist
            .iter()
            .map(|(l, p)| DistEntry {
                label: l.to_string(),
                probability: F17(p),
            })
            .collect(),
        samples: sample_text,
        norms: trace.iter().map(|s| F17(s.norm)).collect(),
        brute_force_hidden: SubgroupJson::new(&g, &brute)?,
        sieve,
        consistency,
    })
}

fn simon(cfg: &ExperimentConfig, out: &Path) -> Result<SimonReport, CliError> {
    let g = cfg.parsed_group()?;
    let k = cfg.hidden_subgroup(&g)?;
    let inst = build_instance(&g, &k, cfg.instance_seed())?;
    let f = fourier_operator(&g, &BasisOrdering::default())?;
    let dist = run_pipeline(&inst, &f, &PipelineConfig::default())?;
    let samples = sample_trials(&dist, cfg.trials(), cfg.seed);
    let res = simon_solve(&SampleSet::from_labels(&g, &samples)?, Some(&dist))?;
    let brute = classical_brute_force_hsp(&inst)?;

    write_file(&out.join(DISTRIBUTION_CSV), &distribution_csv(&dist)?)?;
    let sample_text = labels_text(&samples);
    write_file(&out.join(SAMPLES_CSV), &samples_csv(&sample_text, cfg.seed)?)?;
    let recovered = SubgroupJson::new(&g, &res.candidate)?;
    Ok(SimonReport {
        group: g.to_string(),
        hidden: SubgroupJson::new(&g, &k)?,
        distribution_csv: DISTRIBUTION_CSV.into(),
        samples_csv: SAMPLES_CSV.into(),
        recovered_generators: recovered.generators.clone(),
        recovered,
        confirmed: res.confirmed,
        trials_used: res.samples_used,
        matches_brute_force: res.candidate.same_elements(&brute),
    })
}

fn periodic_instance(cfg: &ExperimentConfig) -> Result<PeriodicInstance, CliError> {
    let (n, a, q) = cfg.period_params()?;
    Ok(if cfg.allow_any_q {
        PeriodicInstance::with_any_q(n, a, q)?
    } else {
        PeriodicInstance::new(n, a, q)?
    })
}

fn character_values(dist: &[OutcomeLabel]) -> Result<Vec<u64>, CliError> {
    dist.iter()
        .map(|l| match l {
            OutcomeLabel::Character(y) => Ok(*y as u64),
            other => Err(CliError::Internal(format!("unexpected outcome {other} over Z_Q"))),
        })
        .collect()
}

fn shor(cfg: &ExperimentConfig, out: &Path) -> Result<ShorReport, CliError> {
    let inst = periodic_instance(cfg)?;
    let spec = cfg.transversal.as_ref().expect("validated");
    let tau = match spec.kind {
        TransversalChoice::Shor => shor_transversal(inst.q())?,
        TransversalChoice::Offset => offset_transversal(inst.q(), spec.bound.expect("validated"), cfg.seed)?,
    };
    let approx = approximate_function(&inst, &tau)?;
    if !approx.is_consistent_with(&inst) {
        return Err(CliError::Internal("approximate function table does not match f∘τ".into()));
    }
    let dist = qhs_core::transversal::run_approximate(&inst, &approx)?;
    let samples = sample_trials(&dist, cfg.trials(), cfg.seed);
    let ys = character_values(&samples)?;
    let est = period_from_samples(&ys, inst.q() as u64, inst.modulus(), inst.base())?;

    write_file(&out.join(DISTRIBUTION_CSV), &distribution_csv(&dist)?)?;
    write_file(&out.join(SAMPLES_CSV), &samples_csv(&labels_text(&samples), cfg.seed)?)?;
    Ok(ShorReport {
        distribution_csv_path: DISTRIBUTION_CSV.into(),
        samples_csv: SAMPLES_CSV.into(),
        r_true: inst.period(),
        peak_mass: F17(peak_mass(&dist, inst.period(), inst.q())?),
        samples: ys,
        period_estimate: PeriodJson {
            candidate: est.candidate,
            confirmed: est.confirmed,
        },
    })
}

/// Median of a non-empty slice (mean of the middle pair for even length).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

fn sweep(cfg: &ExperimentConfig, out: &Path) -> Result<SweepReport, CliError> {
    let inst = periodic_instance(cfg)?;
    let bound = cfg.transversal.as_ref().and_then(|t| t.bound).expect("validated");
    let (r, q) = (inst.period(), inst.q());
    let shor_mass = peak_mass(&shor_pipeline(&inst, &shor_transversal(q)?)?, r, q)?;
    let rows: Vec<SweepRow> = (0..cfg.sweep_seeds() as u64)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(cfg.seed, i);
            let dist = shor_pipeline(&inst, &offset_transversal(q, bound, seed)?)?;
            Ok(SweepRow {
                seed,
                peak_mass_shor: F17(shor_mass),
                peak_mass_offset: F17(peak_mass(&dist, r, q)?),
            })
        })
        .collect::<Result<_, CliError>>()?;
    let offsets: Vec<f64> = rows.iter().map(|r| r.peak_mass_offset.0).collect();
    write_file(&out.join(SWEEP_CSV), &sweep_csv(&rows)?)?;
    Ok(SweepReport {
        sweep_csv: SWEEP_CSV.into(),
        r_true: r,
        seeds: rows.len(),
        peak_mass_shor: F17(shor_mass),
        median_offset_peak_mass: F17(median(&offsets)),
        shor_wins: offsets.iter().filter(|&&m| shor_mass > m).count(),
        rows,
    })
}

fn irreps(cfg: &ExperimentConfig) -> Result<IrrepsReport, CliError> {
    let g = cfg.parsed_group()?;
    Ok(IrrepsReport {
        group: g.to_string(),
        elements: g.elements().map(|x| element_text(&g, x)).collect::<Result<_, _>>()?,
        irreps: irreps_of(&g)?
            .iter()
            .map(|p| IrrepJson {
                label: p.label(),
                dim: p.dim(),
                character: g
                    .elements()
                    .map(|x| {
                        let c = p.character(x);
                        [F17(c.re), F17(c.im)]
                    })
                    .collect(),
            })
            .collect(),
    })
}

fn fourier_check(cfg: &ExperimentConfig) -> Result<FourierCheckReport, CliError> {
    let g = cfg.parsed_group()?;
    let r = verify_representation_suite(&g)?;
    Ok(FourierCheckReport {
        group: g.to_string(),
        completeness_defect: r.completeness_defect,
        max_schur_residual: F17(r.max_schur_residual),
        max_unitarity_residual: F17(r.max_unitarity_residual),
        max_homomorphism_residual: F17(r.max_homomorphism_residual),
    })
}

/// Rebuilds an [`OutcomeDistribution`] in the label order the pipeline
/// itself produces, so it can be compared against predictions.
pub fn distribution_for_group(
    group: &FiniteGroup,
    observed: &BTreeMap<OutcomeLabel, f64>,
    pipeline: &PipelineConfig,
) -> Result<OutcomeDistribution, CliError> {
    let f = fourier_operator(group, &BasisOrdering::default())?;
    let template = run_pipeline(&build_instance(group, &group.whole(), 0)?, &f, pipeline)?;
    for label in observed.keys() {
        if !template.labels().contains(label) {
            return Err(CliError::field(
                "dist",
                format!("outcome {label} does not occur for {group}"),
            ));
        }
    }
    let probs = template
        .labels()
        .iter()
        .map(|l| observed.get(l).copied().unwrap_or(0.0))
        .collect();
    OutcomeDistribution::new(template.labels().to_vec(), probs).map_err(|e| CliError::field("dist", e))
}

fn recover(cfg: &ExperimentConfig) -> Result<RecoverReport, CliError> {
    let g = cfg.parsed_group()?;
    let path = cfg.dist.as_ref().expect("validated");
    let observed = read_distribution_csv(path)?;
    let mut pipeline = cfg.pipeline();
    if cfg.second_transform.is_none() && observed.keys().any(|l| matches!(l, OutcomeLabel::Element(_))) {
        pipeline.second_transform = SecondTransform::Inverse;
    }
    if cfg.measure_granularity.is_none() && observed.keys().any(|l| matches!(l, OutcomeLabel::Irrep(_))) {
        pipeline.measure_granularity = MeasureGranularity::IrrepLabelOnly;
    }
    let dist = distribution_for_group(&g, &observed, &pipeline)?;
    let f = fourier_operator(&g, &BasisOrdering::default())?;
    let ranking = subgroup_consistency_rank(&dist, &f, &pipeline)?;
    Ok(RecoverReport {
        group: g.to_string(),
        dist: path.display().to_string(),
        candidates: rank_json(&g, &ranking)?,
        tie_groups: tie_groups(&ranking),
    })
}

/// Runs `cfg` (validated here again) and writes its files plus
/// `report.json` into `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentReport, CliError> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(format!("creating {}", out_dir.display()), e))?;
    let body = match cfg.experiment {
        ExperimentKind::Simulate => ReportBody::Simulate(simulate(cfg, out_dir)?),
        ExperimentKind::Simon => ReportBody::Simon(simon(cfg, out_dir)?),
        ExperimentKind::Shor => ReportBody::Shor(shor(cfg, out_dir)?),
        ExperimentKind::SweepTransversal => ReportBody::Sweep(sweep(cfg, out_dir)?),
        ExperimentKind::Irreps => ReportBody::Irreps(irreps(cfg)?),
        ExperimentKind::FourierCheck => ReportBody::FourierCheck(fourier_check(cfg)?),
        ExperimentKind::Recover => ReportBody::Recover(recover(cfg)?),
    };
    let report = ExperimentReport {
        version: env!("CARGO_PKG_VERSION"),
        experiment: cfg.experiment,
        seed: cfg.seed,
        config: cfg.clone(),
        body,
    };
    write_file(&out_dir.join(REPORT_JSON), report.to_json()?.as_bytes())?;
    Ok(report)
}

/// Path of an artifact inside an output directory.
pub fn artifact(out_dir: &Path, name: &str) -> PathBuf {
    out_dir.join(name)
}
