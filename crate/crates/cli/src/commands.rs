use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use serde::Serialize;
use tabanon_core::anonymizer::{self, ConstraintOutcome, Exploration, Objective, SearchConfig, Strategy};
use tabanon_core::dataset::{to_csv_string, CsvOptions};
use tabanon_core::hierarchy::suppress_records;
use tabanon_core::metrics::{self, LossReport, RiskReport};
use tabanon_core::ontology::{Explanation, StudyPlan, ValidationReport};
use tabanon_core::{partition, privacy, Error, GeneralizationScheme, PopulationIndex, PrivacyConstraint};

use crate::args::{AnonymizeArgs, AssessArgs, ExplainArgs, PlanArgs};
use crate::artifacts::{OutputDir, Tagged};
use crate::inputs::{self, RunConfig};

// Writes to stdout, ignoring a closed pipe.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 2;

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    outln!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

#[derive(Serialize)]
struct SearchReport<'a> {
    #[serde(flatten)]
    exploration: &'a Exploration,
}

#[derive(Serialize)]
struct ReleaseMetrics<'a> {
    scheme: &'a GeneralizationScheme,
    suppressed_rows: usize,
    constraints: Vec<ConstraintOutcome>,
    risk: RiskReport,
    loss: LossReport,
}

#[derive(Serialize)]
struct Summary<'a> {
    status: &'a str,
    config_digest: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    scheme: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    loss_score: Option<f64>,
    suppressed_rows: usize,
    evaluated: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    plan_valid: Option<bool>,
}

pub fn anonymize(args: &AnonymizeArgs) -> Result<i32> {
    let schema = inputs::schema(&args.input.schema)?;
    let hierarchy_files = inputs::hierarchy_files(&schema, &args.input.hierarchies)?;
    let hierarchies = inputs::hierarchies(&schema, &hierarchy_files)?;
    let original = inputs::dataset(&args.input.data, &schema, &CsvOptions::default())?;
    let d = original.drop_identifiers();
    let population = match &args.constraints.population {
        Some(p) => Some(Arc::new(
            inputs::dataset(p, &schema, &CsvOptions::default())?.drop_identifiers(),
        )),
        None => None,
    };
    let constraints = inputs::constraints(&args.constraints, population.clone())?;
    let objective: Objective = args.objective.into();
    let strategy: Strategy = args.strategy.into();

    let config = RunConfig {
        command: "anonymize",
        tool_version: env!("CARGO_PKG_VERSION"),
        data_sha256: inputs::hash_file(&args.input.data)?,
        schema_sha256: inputs::hash_file(&args.input.schema)?,
        hierarchies_sha256: hierarchy_files
            .iter()
            .map(|(n, p)| inputs::hash_file(p).map(|h| (n.clone(), h)))
            .collect::<Result<_>>()?,
        population_sha256: inputs::optional_hash(args.constraints.population.as_deref())?,
        constraints: constraints.iter().map(PrivacyConstraint::to_string).collect(),
        suppression_budget: args.budget,
        objective: objective.to_string(),
        strategy: strategy.to_string(),
        original_sha256: None,
        suppressed_sha256: None,
        plan_sha256: inputs::optional_hash(args.plan.as_deref())?,
        ontology_override_sha256: inputs::optional_hash(args.override_ontology.as_deref())?,
    };
    let digest = config.digest();

    let plan_report = match &args.plan {
        Some(path) => {
            let graph = inputs::graph(args.override_ontology.as_deref())?;
            let plan = StudyPlan::load(path)?;
            Some(graph.validate_plan(&plan)?)
        }
        None => None,
    };

    let mut input_paths: Vec<&Path> = vec![&args.input.data, &args.input.schema];
    input_paths.extend(hierarchy_files.values().map(|p| p.as_path()));
    input_paths.extend(args.constraints.population.as_deref());
    input_paths.extend(args.plan.as_deref());
    input_paths.extend(args.override_ontology.as_deref());
    let mut out = OutputDir::create(&args.out, input_paths)?;

    let cfg = SearchConfig::new(constraints)
        .with_budget(args.budget)
        .with_objective(objective)
        .with_strategy(strategy)
        .with_workers(args.workers as usize);
    let exploration = anonymizer::explore(&d, &hierarchies, &cfg)?;
    out.write_json(
        "search_report.json",
        &Tagged {
            config_digest: &digest,
            body: SearchReport {
                exploration: &exploration,
            },
        },
    )?;
    if let Some(report) = &plan_report {
        out.write_json(
            "validation.json",
            &Tagged {
                config_digest: &digest,
                body: report,
            },
        )?;
    }

    let Some(best) = exploration.best_node() else {
        out.finish(&digest, &config)?;
        if args.human {
            outln!(
                "no solution: {} of {} lattice nodes evaluated",
                exploration.evaluated,
                exploration.lattice_size
            );
        } else {
            print_json(&Summary {
                status: "no_solution",
                config_digest: &digest,
                scheme: None,
                loss_score: None,
                suppressed_rows: 0,
                evaluated: exploration.evaluated,
                plan_valid: plan_report.as_ref().map(|r| r.passed),
            })?;
        }
        return Err(Error::NoSolution {
            evaluated: exploration.evaluated,
        }
        .into());
    };

    let applied = anonymizer::apply(&d, best, &hierarchies)?;
    let dz = &applied.dataset;
    let survivors = suppress_records(&d, &applied.suppressed.iter().copied().collect::<BTreeSet<_>>())?;
    let part = partition(dz);
    let pop_index = match &population {
        Some(p) => Some(PopulationIndex::build(
            p,
            d.quasi_identifiers(),
            &best.scheme,
            &hierarchies,
        )?),
        None => None,
    };
    let metrics_body = ReleaseMetrics {
        scheme: &best.scheme,
        suppressed_rows: applied.suppressed.len(),
        constraints: cfg
            .constraints
            .iter()
            .map(|c| {
                let v = privacy::check(c, &part, dz, pop_index.as_ref())?;
                Ok(ConstraintOutcome {
                    constraint: c.to_string(),
                    satisfied: v.satisfied,
                    violating_classes: v.violating_classes.len(),
                })
            })
            .collect::<Result<_, Error>>()?,
        risk: metrics::risk_report(&part, pop_index.as_ref(), false)?,
        loss: metrics::loss_report(&survivors, dz)?,
    };

    out.write("anonymized.csv", to_csv_string(dz, &CsvOptions::default())?.as_bytes())?;
    out.write_json(
        "metrics.json",
        &Tagged {
            config_digest: &digest,
            body: &metrics_body,
        },
    )?;
    let suppressed: String = applied.suppressed.iter().map(|i| format!("{i}\n")).collect();
    out.write("suppressed_rows.txt", suppressed.as_bytes())?;
    out.finish(&digest, &config)?;

    let plan_valid = plan_report.as_ref().map(|r| r.passed);
    if args.human {
        outln!(
            "scheme {}  loss score {:.4}",
            best.scheme,
            best.loss_score.unwrap_or(0.0)
        );
        outln!(
            "suppressed {} of {} records; average risk {:.4}%, maximum risk {:.4}%",
            applied.suppressed.len(),
            d.n(),
            metrics_body.risk.average,
            metrics_body.risk.maximum
        );
        outln!(
            "NUE {:.4}  IG {:.4}  ({} of {} nodes evaluated)",
            metrics_body.loss.nue.overall,
            metrics_body.loss.ig,
            exploration.evaluated,
            exploration.lattice_size
        );
        if let Some(report) = &plan_report {
            out!("{report}");
        }
        outln!("config digest {digest}");
    } else {
        print_json(&Summary {
            status: "ok",
            config_digest: &digest,
            scheme: Some(best.scheme.to_string()),
            loss_score: best.loss_score,
            suppressed_rows: applied.suppressed.len(),
            evaluated: exploration.evaluated,
            plan_valid,
        })?;
    }
    Ok(if plan_valid == Some(false) {
        EXIT_REJECTED
    } else {
        EXIT_OK
    })
}

#[derive(Serialize)]
struct AssessReport {
    n: usize,
    equivalence_classes: usize,
    risk: RiskReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    loss: Option<LossReport>,
}

pub fn assess(args: &AssessArgs) -> Result<i32> {
    let schema = inputs::schema(&args.schema)?;
    let released = CsvOptions::released();
    let dz = match inputs::dataset(&args.data, &inputs::released_schema(&schema, false), &released) {
        Ok(d) => d,
        Err(e) if matches!(e.downcast_ref::<Error>(), Some(Error::HeaderMismatch { .. })) => {
            inputs::dataset(&args.data, &inputs::released_schema(&schema, true), &released)?.drop_identifiers()
        }
        Err(e) => return Err(e),
    };
    let part = partition(&dz);

    let pop_index = match &args.population {
        Some(path) => {
            let population = inputs::dataset(path, &schema, &CsvOptions::default())?;
            let qis: Vec<_> = schema.iter().filter(|a| a.is_quasi_identifier()).cloned().collect();
            let scheme = match &args.scheme {
                Some(s) => s.parse::<GeneralizationScheme>()?,
                None => GeneralizationScheme::identity(qis.len()),
            };
            let files = inputs::hierarchy_files(&schema, &args.hierarchies)?;
            let hierarchies = if scheme.height() == 0 {
                Default::default()
            } else {
                inputs::hierarchies(&schema, &files)?
            };
            Some(PopulationIndex::build(&population, &qis, &scheme, &hierarchies)?)
        }
        None => None,
    };
    let risk = metrics::risk_report(&part, pop_index.as_ref(), args.individual)?;

    let loss = match &args.original {
        Some(path) => {
            let mut d = inputs::dataset(path, &schema, &CsvOptions::default())?.drop_identifiers();
            if let Some(list) = &args.suppressed {
                let text = fs::read_to_string(list).with_context(|| format!("cannot read {}", list.display()))?;
                let rows = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(|l| {
                        l.parse::<usize>()
                            .with_context(|| format!("bad row index `{l}` in {}", list.display()))
                    })
                    .collect::<Result<BTreeSet<_>>>()?;
                d = suppress_records(&d, &rows)?;
            }
            Some(metrics::loss_report(&d, &dz)?)
        }
        None => None,
    };

    let report = AssessReport {
        n: dz.n(),
        equivalence_classes: part.class_count(),
        risk,
        loss,
    };
    if let Some(dir) = &args.out {
        let config = RunConfig {
            command: "assess",
            tool_version: env!("CARGO_PKG_VERSION"),
            data_sha256: inputs::hash_file(&args.data)?,
            schema_sha256: inputs::hash_file(&args.schema)?,
            hierarchies_sha256: Default::default(),
            population_sha256: inputs::optional_hash(args.population.as_deref())?,
            constraints: Vec::new(),
            suppression_budget: 0.0,
            objective: String::new(),
            strategy: String::new(),
            original_sha256: inputs::optional_hash(args.original.as_deref())?,
            suppressed_sha256: inputs::optional_hash(args.suppressed.as_deref())?,
            plan_sha256: None,
            ontology_override_sha256: None,
        };
        let digest = config.digest();
        let mut inputs_used: Vec<&Path> = vec![&args.data, &args.schema];
        inputs_used.extend(args.original.as_deref());
        inputs_used.extend(args.suppressed.as_deref());
        inputs_used.extend(args.population.as_deref());
        let mut out = OutputDir::create(dir, inputs_used)?;
        out.write_json(
            "metrics.json",
            &Tagged {
                config_digest: &digest,
                body: &report,
            },
        )?;
        out.finish(&digest, &config)?;
    }
    if args.human {
        outln!(
            "{} records in {} equivalence classes",
            report.n,
            report.equivalence_classes
        );
        outln!(
            "average risk {:.4}%  maximum risk {:.4}%  (prosecutor {:.4}%, marketer {:.4}%)",
            report.risk.average,
            report.risk.maximum,
            report.risk.attack.prosecutor,
            report.risk.attack.marketer
        );
        if let Some(j) = report.risk.attack.journalist {
            outln!("journalist risk {j:.4}%");
        }
        if let Some(loss) = &report.loss {
            outln!("NUE {:.4}  IG {:.4}", loss.nue.overall, loss.ig);
            for (name, gg) in &loss.gg {
                outln!("GG {name} {gg:.4}");
            }
        }
    } else {
        print_json(&report)?;
    }
    Ok(EXIT_OK)
}

pub fn validate_plan(args: &PlanArgs) -> Result<i32> {
    let graph = inputs::graph(args.override_ontology.as_deref())?;
    let plan = StudyPlan::load(&args.plan)?;
    let report: ValidationReport = graph.validate_plan(&plan)?;
    if let Some(dir) = &args.out {
        let digest = inputs::sha256_hex(
            format!(
                "{}:{}",
                inputs::hash_file(&args.plan)?,
                inputs::optional_hash(args.override_ontology.as_deref())?.unwrap_or_default()
            )
            .as_bytes(),
        );
        let mut inputs_used: Vec<&Path> = vec![&args.plan];
        inputs_used.extend(args.override_ontology.as_deref());
        let mut out = OutputDir::create(dir, inputs_used)?;
        out.write_json(
            "validation.json",
            &Tagged {
                config_digest: &digest,
                body: &report,
            },
        )?;
    }
    if args.human {
        out!("{report}");
    } else {
        print_json(&report)?;
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_REJECTED })
}

pub fn explain(args: &ExplainArgs) -> Result<i32> {
    let graph = inputs::graph(args.override_ontology.as_deref())?;
    let explanation: Explanation = graph.explain(&args.term);
    if args.json {
        print_json(&explanation)?;
    } else {
        out!("{explanation}");
    }
    Ok(EXIT_OK)
}
