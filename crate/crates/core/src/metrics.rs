//! Re-identification risk and information-loss metrics.
//!
//! Every metric is reported on a 0–100 percent scale. Risks are derived from
//! equivalence-class sizes (CES); losses compare an original dataset `d` with
//! an anonymized, row-aligned `dz` where 100 means nothing was lost.
//!
//! Two formulas are normalized here rather than transcribed literally:
//! the average risk multiplies by 100 once (it is the mean of per-record
//! percentages), and non-uniform entropy is computed as
//! `1 − Σ log2(CES_out/CES_in) / Σ log2(n/CES_in)`, scaled to percent.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::dataset::{CellKey, Dataset};
use crate::error::{Error, Result};
use crate::partition::{partition_by, Partition};
use crate::privacy::PopulationIndex;

/// `RR(i) = 100 / CES(i)`.
pub fn individual_rr(part: &Partition, row: usize) -> Result<f64> {
    part.ces(row).map(|c| 100.0 / c as f64)
}

pub fn individual_rrs(part: &Partition) -> Vec<f64> {
    part.ces_per_row().into_iter().map(|c| 100.0 / c as f64).collect()
}

/// Mean of the per-record risks. Equals `100 · j / n`.
pub fn average_rr(part: &Partition) -> Result<f64> {
    if part.n() == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(individual_rrs(part).iter().sum::<f64>() / part.n() as f64)
}

/// `100 / k`.
pub fn maximum_rr_for_k(k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidParameter(format!("k must be >= 1, got {k}")));
    }
    Ok(100.0 / k as f64)
}

/// `100 / min CES`, the risk of the most exposed record.
pub fn maximum_rr(part: &Partition) -> Result<f64> {
    maximum_rr_for_k(part.min_ces()?)
}

fn aligned(d: &Dataset, dz: &Dataset) -> Result<()> {
    if d.n() != dz.n() {
        return Err(Error::RowCountMismatch {
            original: d.n(),
            anonymized: dz.n(),
        });
    }
    Ok(())
}

fn qi_names(d: &Dataset) -> Vec<&str> {
    d.quasi_identifiers().map(|a| a.name.as_str()).collect()
}

/// Non-uniform entropy over an attribute subset (default: all
/// quasi-identifiers of `d`, taken together).
pub fn nue(d: &Dataset, dz: &Dataset, attributes: Option<&[&str]>) -> Result<f64> {
    aligned(d, dz)?;
    let names: Vec<&str> = match attributes {
        Some(a) => a.to_vec(),
        None => qi_names(d),
    };
    let cols_in = names.iter().map(|n| d.column_index(n)).collect::<Result<Vec<_>>>()?;
    let cols_out = names.iter().map(|n| dz.column_index(n)).collect::<Result<Vec<_>>>()?;
    let ces_in = partition_by(d, &cols_in).ces_per_row();
    let ces_out = partition_by(dz, &cols_out).ces_per_row();
    let n = d.n() as f64;

    let mut lost = 0.0;
    let mut available = 0.0;
    for (&cin, &cout) in ces_in.iter().zip(&ces_out) {
        lost += (cout as f64 / cin as f64).log2();
        available += (n / cin as f64).log2();
    }
    if available == 0.0 {
        return Ok(100.0);
    }
    Ok((1.0 - lost / available) * 100.0)
}

/// NUE of each quasi-identifier on its own.
pub fn nue_per_attribute(d: &Dataset, dz: &Dataset) -> Result<BTreeMap<String, f64>> {
    qi_names(d)
        .into_iter()
        .map(|name| nue(d, dz, Some(&[name])).map(|v| (name.to_string(), v)))
        .collect()
}

/// Share of quasi-identifier cells left unchanged, compared by displayed label.
pub fn ig(d: &Dataset, dz: &Dataset) -> Result<f64> {
    aligned(d, dz)?;
    let names = qi_names(d);
    if names.is_empty() {
        return Err(Error::NoQuasiIdentifiers);
    }
    if d.n() == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut changed = 0usize;
    for name in &names {
        let ci = d.column_index(name)?;
        let co = dz.column_index(name)?;
        changed += d
            .column(ci)
            .zip(dz.column(co))
            .filter(|(a, b)| a.key() != b.key())
            .count();
    }
    let cells = (d.n() * names.len()) as f64;
    Ok((1.0 - changed as f64 / cells) * 100.0)
}

fn distinct(d: &Dataset, col: usize) -> usize {
    d.column(col).map(|v| v.key()).collect::<HashSet<CellKey>>().len()
}

/// Distinct values after over distinct values before, in percent. A fully
/// suppressed column has one distinct value.
pub fn gg(d: &Dataset, dz: &Dataset, attribute: &str) -> Result<f64> {
    let before = distinct(d, d.column_index(attribute)?);
    let after = distinct(dz, dz.column_index(attribute)?);
    if before == 0 {
        return Err(Error::ZeroDistinct(attribute.to_string()));
    }
    Ok(after as f64 / before as f64 * 100.0)
}

pub fn gg_per_attribute(d: &Dataset, dz: &Dataset) -> Result<BTreeMap<String, f64>> {
    qi_names(d)
        .into_iter()
        .map(|name| gg(d, dz, name).map(|v| (name.to_string(), v)))
        .collect()
}

/// Mean GG over the quasi-identifiers; 100 when there are none.
pub fn gg_mean(d: &Dataset, dz: &Dataset) -> Result<f64> {
    let per = gg_per_attribute(d, dz)?;
    if per.is_empty() {
        return Ok(100.0);
    }
    Ok(per.values().sum::<f64>() / per.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackProfile {
    /// Attacker knows the target is in the set: the worst record's risk.
    pub prosecutor: f64,
    /// Attacker links against an external population; `None` without one.
    pub journalist: Option<f64>,
    /// No specific target: expected share of records re-identified.
    pub marketer: f64,
}

pub fn attack_profile(part: &Partition, population: Option<&PopulationIndex>) -> Result<AttackProfile> {
    let journalist = match population {
        None => None,
        Some(index) => index
            .class_counts(part)?
            .into_iter()
            .map(|c| 100.0 / c as f64)
            .reduce(f64::max),
    };
    Ok(AttackProfile {
        prosecutor: maximum_rr(part)?,
        journalist,
        marketer: average_rr(part)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub individual: Option<Vec<f64>>,
    pub average: f64,
    pub maximum: f64,
    pub attack: AttackProfile,
}

pub fn risk_report(
    part: &Partition,
    population: Option<&PopulationIndex>,
    include_individual: bool,
) -> Result<RiskReport> {
    let attack = attack_profile(part, population)?;
    let report = RiskReport {
        individual: include_individual.then(|| individual_rrs(part)),
        average: attack.marketer,
        maximum: attack.prosecutor,
        attack,
    };
    debug_assert!(report.average <= report.maximum + 1e-9);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NueReport {
    pub overall: f64,
    pub per_attribute: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossReport {
    pub nue: NueReport,
    pub ig: f64,
    pub gg: BTreeMap<String, f64>,
}

pub fn loss_report(d: &Dataset, dz: &Dataset) -> Result<LossReport> {
    Ok(LossReport {
        nue: NueReport {
            overall: nue(d, dz, None)?,
            per_attribute: nue_per_attribute(d, dz)?,
        },
        ig: ig(d, dz)?,
        gg: gg_per_attribute(d, dz)?,
    })
}
