use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use tabanon_core::dataset::{load_csv, load_schema, CsvOptions};
use tabanon_core::hierarchy::load_hierarchy;
use tabanon_core::ontology::{builtin_graph, OntologyGraph};
use tabanon_core::{AttributeRole, AttributeSchema, DataType, Dataset, Error, HierarchySet, PrivacyConstraint};

use crate::args::ConstraintArgs;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

pub fn schema(path: &Path) -> Result<Vec<AttributeSchema>> {
    load_schema(path).with_context(|| format!("loading schema {}", path.display()))
}

pub fn dataset(path: &Path, schema: &[AttributeSchema], options: &CsvOptions) -> Result<Dataset> {
    load_csv(path, schema, options).with_context(|| format!("loading dataset {}", path.display()))
}

/// Splits `NAME=PATH`; a bare path names the attribute after its file stem.
pub fn hierarchy_arg(arg: &str) -> Result<(String, PathBuf)> {
    if let Some((name, path)) = arg.split_once('=') {
        if name.is_empty() || path.is_empty() {
            bail!("--hierarchy expects NAME=PATH, got `{arg}`");
        }
        return Ok((name.to_string(), PathBuf::from(path)));
    }
    let path = PathBuf::from(arg);
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .with_context(|| format!("cannot derive an attribute name from `{arg}`"))?;
    Ok((stem.to_string(), path))
}

/// Hierarchy files by attribute: those named in the schema, overridden by flags.
pub fn hierarchy_files(schema: &[AttributeSchema], args: &[String]) -> Result<BTreeMap<String, PathBuf>> {
    let mut files: BTreeMap<String, PathBuf> = schema
        .iter()
        .filter_map(|a| a.hierarchy.clone().map(|p| (a.name.clone(), p)))
        .collect();
    for arg in args {
        let (name, path) = hierarchy_arg(arg)?;
        if !schema.iter().any(|a| a.name == name) {
            return Err(Error::UnknownAttribute(name)).context("in --hierarchy");
        }
        files.insert(name, path);
    }
    Ok(files)
}

pub fn hierarchies(schema: &[AttributeSchema], files: &BTreeMap<String, PathBuf>) -> Result<HierarchySet> {
    let mut set = HierarchySet::new();
    for (name, path) in files {
        let attr = schema
            .iter()
            .find(|a| &a.name == name)
            .expect("checked by hierarchy_files");
        let h = load_hierarchy(path, attr).with_context(|| format!("loading hierarchy {}", path.display()))?;
        set.insert(h);
    }
    Ok(set)
}

pub fn constraints(args: &ConstraintArgs, population: Option<Arc<Dataset>>) -> Result<Vec<PrivacyConstraint>> {
    let mut out = Vec::new();
    let sensitive = || {
        args.sensitive
            .clone()
            .context("--l and --t need --sensitive to name the sensitive attribute")
    };
    if let Some(k) = args.k {
        out.push(PrivacyConstraint::k_anonymity(k)?);
    }
    if let Some(l) = args.l {
        out.push(PrivacyConstraint::l_diversity(l, sensitive()?)?);
    }
    if let Some(t) = args.t {
        out.push(PrivacyConstraint::t_closeness(t, sensitive()?)?);
    }
    if let (Some(lo), Some(hi)) = (args.delta_min, args.delta_max) {
        let population = population.context("--delta-min/--delta-max need --population")?;
        out.push(PrivacyConstraint::delta_presence(lo, hi, population)?);
    }
    if out.is_empty() {
        bail!("no privacy constraint given; use --k, --l, --t or --delta-min/--delta-max");
    }
    Ok(out)
}

/// Schema of a released file: generalized quasi-identifiers are read as labels.
pub fn released_schema(schema: &[AttributeSchema], keep_identifiers: bool) -> Vec<AttributeSchema> {
    schema
        .iter()
        .filter(|a| keep_identifiers || a.role != AttributeRole::Identifier)
        .cloned()
        .map(|mut a| {
            if a.is_quasi_identifier() {
                a.data_type = DataType::Nominal;
                a.order = None;
            }
            a
        })
        .collect()
}

pub fn graph(override_path: Option<&Path>) -> Result<OntologyGraph> {
    let mut g = builtin_graph();
    if let Some(path) = override_path {
        g.merge_file(path)
            .with_context(|| format!("loading ontology override {}", path.display()))?;
    }
    Ok(g)
}

/// Everything that determines a run's outputs; hashed into the config digest.
/// Output location and worker count are excluded because they do not change results.
#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub tool_version: &'static str,
    pub data_sha256: String,
    pub schema_sha256: String,
    pub hierarchies_sha256: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub population_sha256: Option<String>,
    pub constraints: Vec<String>,
    pub suppression_budget: f64,
    pub objective: String,
    pub strategy: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub original_sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suppressed_sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan_sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ontology_override_sha256: Option<String>,
}

impl RunConfig {
    pub fn digest(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }
}

pub fn optional_hash(path: Option<&Path>) -> Result<Option<String>> {
    path.map(hash_file).transpose()
}
