use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qhs_cli::config::{ElementSpec, GranularitySpec, SecondTransformSpec};
use qhs_cli::runner::{self, fmt17};
use qhs_cli::{run_experiment, CliError, ExperimentConfig, ExperimentKind, ReportBody, TransversalChoice, TransversalSpec};
use qhs_core::{fourier_operator, BasisOrdering, FiniteGroup};
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "qhs", version, about = "Exact hidden subgroup simulations over small finite groups")]
struct Cli {
    /// Master seed for sampling and seeded constructions.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for CSV and JSON artifacts.
    #[arg(long, global = true, default_value = "qhs-out")]
    out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransversalArg {
    Shor,
    Offset,
}

#[derive(Clone, Copy, ValueEnum)]
enum SecondArg {
    Forward,
    Inverse,
}

#[derive(Clone, Copy, ValueEnum)]
enum GranularityArg {
    FullTriple,
    IrrepLabelOnly,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Irreducible representations and characters of a group.
    Irreps { group: String },
    /// Fourier operator of a group, or its residual report with --check.
    Fourier {
        group: String,
        #[arg(long)]
        check: bool,
    },
    /// Exact pipeline distribution and samples for one instance.
    Simulate {
        /// Instance JSON (path or inline): {"group": .., "hidden_generators": [..]}.
        #[arg(long)]
        instance: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, value_enum)]
        second_transform: Option<SecondArg>,
        #[arg(long, value_enum)]
        measure_granularity: Option<GranularityArg>,
    },
    /// Simon's problem on Z2^n.
    Simon {
        #[arg(long)]
        n: usize,
        /// Comma-separated generator bitstrings, e.g. 101,011.
        #[arg(long, default_value = "")]
        hidden: String,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Period finding for a^x mod N through Z_Q.
    Shor {
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        a: u64,
        #[arg(long = "Q")]
        q: usize,
        #[arg(long, value_enum, default_value_t = TransversalArg::Shor)]
        transversal: TransversalArg,
        #[arg(long)]
        bound: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        allow_any_q: bool,
    },
    /// Peak mass of the Shor transversal against seeded offset transversals.
    SweepTransversal {
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        a: u64,
        #[arg(long = "Q")]
        q: usize,
        #[arg(long)]
        bound: u64,
        /// Number of offset transversals.
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        allow_any_q: bool,
    },
    /// Rank every subgroup against an observed distribution CSV.
    Recover {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        group: String,
        #[arg(long, value_enum)]
        second_transform: Option<SecondArg>,
        #[arg(long, value_enum)]
        measure_granularity: Option<GranularityArg>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceSpec {
    group: String,
    #[serde(default)]
    hidden_generators: Option<Vec<ElementSpec>>,
    #[serde(default)]
    instance_seed: Option<u64>,
}

fn second(a: Option<SecondArg>) -> Option<SecondTransformSpec> {
    a.map(|a| match a {
        SecondArg::Forward => SecondTransformSpec::Forward,
        SecondArg::Inverse => SecondTransformSpec::Inverse,
    })
}

fn granularity(a: Option<GranularityArg>) -> Option<GranularitySpec> {
    a.map(|a| match a {
        GranularityArg::FullTriple => GranularitySpec::FullTriple,
        GranularityArg::IrrepLabelOnly => GranularitySpec::IrrepLabelOnly,
    })
}

fn read_text(arg: &str, field: &str) -> Result<String, CliError> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::field(field, format!("{arg}: {e}")))
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.command {
        Command::Run { config } => {
            let text = fs::read_to_string(config)
                .map_err(|e| CliError::field("config", format!("{}: {e}", config.display())))?;
            return qhs_cli::parse_config(&text);
        }
        Command::Irreps { group } => {
            let mut c = ExperimentConfig::new(ExperimentKind::Irreps);
            c.group = Some(group.clone());
            c
        }
        Command::Fourier { group, .. } => {
            let mut c = ExperimentConfig::new(ExperimentKind::FourierCheck);
            c.group = Some(group.clone());
            c
        }
        Command::Simulate {
            instance,
            trials,
            second_transform,
            measure_granularity,
        } => {
            let spec: InstanceSpec = serde_json::from_str(&read_text(instance, "instance")?)
                .map_err(|e| CliError::field("instance", e))?;
            let mut c = ExperimentConfig::new(ExperimentKind::Simulate);
            c.group = Some(spec.group);
            c.hidden_generators = spec.hidden_generators;
            c.instance_seed = spec.instance_seed;
            c.trials = *trials;
            c.second_transform = second(*second_transform);
            c.measure_granularity = granularity(*measure_granularity);
            c
        }
        Command::Simon { n, hidden, trials } => {
            let mut c = ExperimentConfig::new(ExperimentKind::Simon);
            c.group = Some(format!("Z2^{n}"));
            c.hidden_generators = Some(
                hidden
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| ElementSpec::Label(s.to_string()))
                    .collect(),
            );
            c.trials = *trials;
            c
        }
        Command::Shor {
            n,
            a,
            q,
            transversal,
            bound,
            trials,
            allow_any_q,
        } => {
            let mut c = ExperimentConfig::new(ExperimentKind::Shor);
            (c.n, c.a, c.q, c.allow_any_q, c.trials) = (Some(*n), Some(*a), Some(*q), *allow_any_q, *trials);
            c.transversal = Some(TransversalSpec {
                kind: match transversal {
                    TransversalArg::Shor => TransversalChoice::Shor,
                    TransversalArg::Offset => TransversalChoice::Offset,
                },
                bound: *bound,
            });
            c
        }
        Command::SweepTransversal {
            n,
            a,
            q,
            bound,
            seeds,
            allow_any_q,
        } => {
            let mut c = ExperimentConfig::new(ExperimentKind::SweepTransversal);
            (c.n, c.a, c.q, c.allow_any_q, c.seeds) = (Some(*n), Some(*a), Some(*q), *allow_any_q, *seeds);
            c.transversal = Some(TransversalSpec {
                kind: TransversalChoice::Offset,
                bound: Some(*bound),
            });
            c
        }
        Command::Recover {
            dist,
            group,
            second_transform,
            measure_granularity,
        } => {
            let mut c = ExperimentConfig::new(ExperimentKind::Recover);
            c.group = Some(group.clone());
            c.dist = Some(dist.clone());
            c.second_transform = second(*second_transform);
            c.measure_granularity = granularity(*measure_granularity);
            c
        }
    };
    cfg.seed = cli.seed;
    cfg.validate()?;
    Ok(cfg)
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

fn read_artifact(out_dir: &std::path::Path, name: &str) -> Result<String, CliError> {
    let path = out_dir.join(name);
    fs::read_to_string(&path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))
}

fn render_csv(report: &qhs_cli::ExperimentReport, out_dir: &std::path::Path) -> Result<String, CliError> {
    match &report.body {
        ReportBody::Simulate(_) | ReportBody::Simon(_) | ReportBody::Shor(_) => {
            read_artifact(out_dir, runner::DISTRIBUTION_CSV)
        }
        ReportBody::Sweep(_) => read_artifact(out_dir, runner::SWEEP_CSV),
        ReportBody::Irreps(r) => {
            let mut header = vec!["label", "dim"];
            header.extend(r.elements.iter().map(String::as_str));
            let rows = r
                .irreps
                .iter()
                .map(|p| {
                    let mut row = vec![p.label.to_string(), p.dim.to_string()];
                    row.extend(p.character.iter().map(|[re, im]| format!("{}{:+.16e}i", fmt17(re.0), im.0)));
                    row
                })
                .collect();
            csv_text(&header, rows)
        }
        ReportBody::FourierCheck(r) => csv_text(
            &["metric", "value"],
            vec![
                vec!["completeness_defect".into(), r.completeness_defect.to_string()],
                vec!["max_schur_residual".into(), fmt17(r.max_schur_residual.0)],
                vec!["max_unitarity_residual".into(), fmt17(r.max_unitarity_residual.0)],
                vec!["max_homomorphism_residual".into(), fmt17(r.max_homomorphism_residual.0)],
            ],
        ),
        ReportBody::Recover(r) => csv_text(
            &["rank", "elements", "normal", "distance", "tie_class"],
            r.candidates
                .iter()
                .map(|c| {
                    vec![
                        c.rank.to_string(),
                        c.subgroup.elements.join(" "),
                        c.subgroup.normal.to_string(),
                        fmt17(c.distance.0),
                        c.tie_class.to_string(),
                    ]
                })
                .collect(),
        ),
    }
}

/// `fourier <group>` without `--check`: the operator itself.
fn fourier_matrix(group: &str, format: Format) -> Result<String, CliError> {
    let g: FiniteGroup = group.parse().map_err(|e| CliError::field("group", e))?;
    let f = fourier_operator(&g, &BasisOrdering::default())?;
    let rows: Vec<String> = f.rows().iter().map(|r| format!("({},{},{})", r.irrep, r.row, r.col)).collect();
    let cell = |i: usize, x: usize| {
        let z = f.entry(i, x);
        (z.re, z.im)
    };
    match format {
        Format::Csv => {
            let header: Vec<String> = ["row".to_string()]
                .into_iter()
                .chain(g.elements().map(|x| g.label(x).map(|l| l.to_string())).collect::<Result<Vec<_>, _>>()?)
                .collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let body = (0..f.dim())
                .map(|i| {
                    let mut row = vec![rows[i].clone()];
                    row.extend(g.elements().map(|x| {
                        let (re, im) = cell(i, x);
                        format!("{}{:+.16e}i", fmt17(re), im)
                    }));
                    row
                })
                .collect();
            csv_text(&header, body)
        }
        Format::Json => {
            let matrix: Vec<Vec<[runner::F17; 2]>> = (0..f.dim())
                .map(|i| {
                    g.elements()
                        .map(|x| {
                            let (re, im) = cell(i, x);
                            [runner::F17(re), runner::F17(im)]
                        })
                        .collect()
                })
                .collect();
            #[derive(serde::Serialize)]
            struct Out {
                group: String,
                rows: Vec<String>,
                matrix: Vec<Vec<[runner::F17; 2]>>,
            }
            serde_json::to_string_pretty(&Out {
                group: g.to_string(),
                rows,
                matrix,
            })
            .map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}

fn run(cli: &Cli) -> Result<String, CliError> {
    if let Command::Fourier { group, check: false } = &cli.command {
        return fourier_matrix(group, cli.format);
    }
    let cfg = build_config(cli)?;
    let report = run_experiment(&cfg, &cli.out_dir)?;
    match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => render_csv(&report, &cli.out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            println!("{}", text.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qhs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
