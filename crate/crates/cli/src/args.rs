use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tabanon_core::anonymizer::{Objective, Strategy};

#[derive(Debug, Parser)]
#[command(
    name = "tabanon",
    version,
    about = "Anonymize tabular data and assess re-identification risk"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search the generalization lattice and release an anonymized dataset.
    Anonymize(AnonymizeArgs),
    /// Report risk for a dataset, and information loss against its original.
    Assess(AssessArgs),
    /// Check a study plan against the knowledge graph.
    ValidatePlan(PlanArgs),
    /// Print the definition and relations of an ontology term.
    Explain(ExplainArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV dataset.
    #[arg(long)]
    pub data: PathBuf,
    /// JSON attribute schema.
    #[arg(long)]
    pub schema: PathBuf,
    /// Hierarchy for an attribute, as NAME=PATH or PATH (name from the file stem).
    #[arg(long = "hierarchy", value_name = "NAME=PATH")]
    pub hierarchies: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ConstraintArgs {
    /// Minimum equivalence-class size (k-anonymity).
    #[arg(long)]
    pub k: Option<usize>,
    /// Minimum distinct sensitive values per class (l-diversity).
    #[arg(long)]
    pub l: Option<usize>,
    /// Largest distance between class and overall sensitive distributions (t-closeness).
    #[arg(long)]
    pub t: Option<f64>,
    /// Sensitive attribute for --l and --t.
    #[arg(long)]
    pub sensitive: Option<String>,
    /// Lower bound on the population share of each class (delta-presence).
    #[arg(long, requires_all = ["delta_max", "population"])]
    pub delta_min: Option<f64>,
    /// Upper bound on the population share of each class (delta-presence).
    #[arg(long, requires_all = ["delta_min", "population"])]
    pub delta_max: Option<f64>,
    /// Population CSV with the dataset's schema, for delta-presence and journalist risk.
    #[arg(long)]
    pub population: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Nue,
    Ig,
    Gg,
    /// NUE with ties resolved by lower average risk.
    AvgRr,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Nue => Objective::Nue,
            ObjectiveArg::Ig => Objective::Ig,
            ObjectiveArg::Gg => Objective::GgMean,
            ObjectiveArg::AvgRr => Objective::NueAvgRrTiebreak,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Exhaustive,
    PrunedBfs,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Exhaustive => Strategy::Exhaustive,
            StrategyArg::PrunedBfs => Strategy::PrunedBfs,
        }
    }
}

#[derive(Debug, Args)]
pub struct AnonymizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub constraints: ConstraintArgs,
    /// Largest fraction of records that may be suppressed.
    #[arg(long, default_value_t = 0.0)]
    pub budget: f64,
    /// Loss score maximized among satisfying nodes.
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Nue)]
    pub objective: ObjectiveArg,
    /// Lattice traversal.
    #[arg(long, value_enum, default_value_t = StrategyArg::PrunedBfs)]
    pub strategy: StrategyArg,
    /// Study plan to validate alongside the run.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// JSON file merged over the built-in knowledge graph.
    #[arg(long)]
    pub override_ontology: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Threads evaluating lattice nodes; results do not depend on it.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub workers: u16,
    /// Print a readable summary instead of JSON.
    #[arg(long)]
    pub human: bool,
}

#[derive(Debug, Args)]
pub struct AssessArgs {
    /// Dataset to assess, usually a released file.
    #[arg(long)]
    pub data: PathBuf,
    /// Schema of the original data.
    #[arg(long)]
    pub schema: PathBuf,
    /// Hierarchy for an attribute, as NAME=PATH or PATH (name from the file stem).
    #[arg(long = "hierarchy", value_name = "NAME=PATH")]
    pub hierarchies: Vec<String>,
    /// Original dataset; enables the information-loss report.
    #[arg(long)]
    pub original: Option<PathBuf>,
    /// Suppressed row indices of the original, one per line.
    #[arg(long, requires = "original")]
    pub suppressed: Option<PathBuf>,
    /// Population CSV for journalist risk.
    #[arg(long)]
    pub population: Option<PathBuf>,
    /// Scheme the released data was generalized with, e.g. "(1,0)", for population matching.
    #[arg(long, requires = "population")]
    pub scheme: Option<String>,
    /// Include every record's individual risk.
    #[arg(long)]
    pub individual: bool,
    /// Directory for metrics.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print a readable summary instead of JSON.
    #[arg(long)]
    pub human: bool,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Study plan JSON.
    #[arg(long)]
    pub plan: PathBuf,
    /// JSON file merged over the built-in knowledge graph.
    #[arg(long)]
    pub override_ontology: Option<PathBuf>,
    /// Directory for validation.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print a readable summary instead of JSON.
    #[arg(long)]
    pub human: bool,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    /// Term, alias or label to look up.
    pub term: String,
    /// JSON file merged over the built-in knowledge graph.
    #[arg(long)]
    pub override_ontology: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
}
