//! Privacy-model predicates evaluated against a [`Partition`].

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::dataset::{AttributeRole, AttributeSchema, CellKey, DataType, Dataset, Value};
use crate::error::{Error, Result};
use crate::hierarchy::{generalize, GeneralizationScheme, HierarchySet};
use crate::partition::{partition, Partition};

/// Slack allowed when comparing a computed distance or probability with its
/// threshold, so that values equal to the bound up to rounding still pass.
const THRESHOLD_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum PrivacyConstraint {
    KAnonymity {
        k: usize,
    },
    /// Distinct l-diversity.
    LDiversity {
        l: usize,
        sensitive: String,
    },
    TCloseness {
        t: f64,
        sensitive: String,
    },
    DeltaPresence {
        delta_min: f64,
        delta_max: f64,
        population: Arc<Dataset>,
    },
}

impl PrivacyConstraint {
    pub fn k_anonymity(k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParameter(format!("k must be >= 1, got {k}")));
        }
        Ok(PrivacyConstraint::KAnonymity { k })
    }

    pub fn l_diversity(l: usize, sensitive: impl Into<String>) -> Result<Self> {
        if l < 1 {
            return Err(Error::InvalidParameter(format!("l must be >= 1, got {l}")));
        }
        Ok(PrivacyConstraint::LDiversity {
            l,
            sensitive: sensitive.into(),
        })
    }

    pub fn t_closeness(t: f64, sensitive: impl Into<String>) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("t must lie in [0, 1], got {t}")));
        }
        Ok(PrivacyConstraint::TCloseness {
            t,
            sensitive: sensitive.into(),
        })
    }

    pub fn delta_presence(delta_min: f64, delta_max: f64, population: Arc<Dataset>) -> Result<Self> {
        check_delta_bounds(delta_min, delta_max)?;
        Ok(PrivacyConstraint::DeltaPresence {
            delta_min,
            delta_max,
            population,
        })
    }

    /// Satisfaction at a scheme implies satisfaction at every coarser scheme.
    pub fn is_anti_monotone(&self) -> bool {
        matches!(
            self,
            PrivacyConstraint::KAnonymity { .. } | PrivacyConstraint::LDiversity { .. }
        )
    }

    pub fn k(&self) -> Option<usize> {
        match self {
            PrivacyConstraint::KAnonymity { k } => Some(*k),
            _ => None,
        }
    }
}

impl fmt::Display for PrivacyConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrivacyConstraint::KAnonymity { k } => write!(f, "k-anonymity(k={k})"),
            PrivacyConstraint::LDiversity { l, sensitive } => {
                write!(f, "l-diversity(l={l}, {sensitive})")
            }
            PrivacyConstraint::TCloseness { t, sensitive } => {
                write!(f, "t-closeness(t={t}, {sensitive})")
            }
            PrivacyConstraint::DeltaPresence {
                delta_min, delta_max, ..
            } => write!(f, "delta-presence([{delta_min}, {delta_max}])"),
        }
    }
}

fn check_delta_bounds(delta_min: f64, delta_max: f64) -> Result<()> {
    if !(0.0 <= delta_min && delta_min <= delta_max && delta_max <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= delta_min <= delta_max <= 1, got [{delta_min}, {delta_max}]"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    ClassSize { class: usize, size: usize },
    DistinctCount { class: usize, distinct: usize },
    Distance { class: usize, distance: f64 },
    Presence { class: usize, probability: f64 },
}

impl Witness {
    pub fn class(&self) -> usize {
        match *self {
            Witness::ClassSize { class, .. }
            | Witness::DistinctCount { class, .. }
            | Witness::Distance { class, .. }
            | Witness::Presence { class, .. } => class,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelVerdict {
    pub satisfied: bool,
    pub violating_classes: Vec<usize>,
    pub witnesses: Vec<Witness>,
}

impl ModelVerdict {
    fn from_witnesses(witnesses: Vec<Witness>) -> Self {
        ModelVerdict {
            satisfied: witnesses.is_empty(),
            violating_classes: witnesses.iter().map(Witness::class).collect(),
            witnesses,
        }
    }
}

pub fn check_k_anonymity(part: &Partition, k: usize) -> Result<ModelVerdict> {
    if k < 1 {
        return Err(Error::InvalidParameter(format!("k must be >= 1, got {k}")));
    }
    let witnesses = part
        .classes()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.size() < k)
        .map(|(class, c)| Witness::ClassSize { class, size: c.size() })
        .collect();
    Ok(ModelVerdict::from_witnesses(witnesses))
}

fn sensitive_column(d: &Dataset, sensitive: &str) -> Result<usize> {
    let col = d.column_index(sensitive)?;
    if d.schema()[col].role != AttributeRole::Sensitive {
        return Err(Error::AttributeNotSensitive(sensitive.to_string()));
    }
    Ok(col)
}

/// Distinct l-diversity: each class holds at least `l` distinct non-missing
/// sensitive values. `part` must have been computed from `d`.
pub fn check_l_diversity(part: &Partition, d: &Dataset, l: usize, sensitive: &str) -> Result<ModelVerdict> {
    if l < 1 {
        return Err(Error::InvalidParameter(format!("l must be >= 1, got {l}")));
    }
    let col = sensitive_column(d, sensitive)?;
    let records = d.records();
    let witnesses = part
        .classes()
        .iter()
        .enumerate()
        .filter_map(|(class, c)| {
            let distinct = c
                .members
                .iter()
                .map(|&r| &records[r][col])
                .filter(|v| !v.is_missing())
                .collect::<HashSet<_>>()
                .len();
            (distinct < l).then_some(Witness::DistinctCount { class, distinct })
        })
        .collect();
    Ok(ModelVerdict::from_witnesses(witnesses))
}

/// Total variation distance `½ Σ |p_i − q_i|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Earth mover's distance between two distributions over `m` ordered
/// positions with ground distance `|i − j| / (m − 1)`.
pub fn ordered_emd(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let m = p.len();
    if m < 2 {
        return 0.0;
    }
    let mut carried = 0.0;
    let mut work = 0.0;
    for i in 0..m - 1 {
        carried += p[i] - q[i];
        work += carried.abs();
    }
    work / (m - 1) as f64
}

fn ordering_key(a: &Value, b: &Value) -> std::cmp::Ordering {
    match (a, b) {
        (Value::Ordinal { rank: x, .. }, Value::Ordinal { rank: y, .. }) => x.cmp(y),
        _ => match (a.as_f64(), b.as_f64()) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            _ => a.label().cmp(&b.label()),
        },
    }
}

/// Distance between each class's sensitive-value distribution and the whole
/// set's. Missing values are left out of both distributions; a class with no
/// non-missing values has distance 0.
pub fn t_closeness_distances(part: &Partition, d: &Dataset, sensitive: &str) -> Result<Vec<f64>> {
    let col = sensitive_column(d, sensitive)?;
    let data_type = d.schema()[col].data_type;
    let records = d.records();

    let mut support: Vec<&Value> = d
        .column(col)
        .filter(|v| !v.is_missing())
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    support.sort_by(|a, b| ordering_key(a, b));
    let position: HashMap<&Value, usize> = support.iter().enumerate().map(|(i, v)| (*v, i)).collect();

    let histogram = |rows: &mut dyn Iterator<Item = usize>| -> Option<Vec<f64>> {
        let mut counts = vec![0usize; support.len()];
        let mut total = 0usize;
        for r in rows {
            if let Some(&i) = position.get(&records[r][col]) {
                counts[i] += 1;
                total += 1;
            }
        }
        (total > 0).then(|| counts.iter().map(|&c| c as f64 / total as f64).collect())
    };

    let Some(global) = histogram(&mut (0..d.n())) else {
        return Ok(vec![0.0; part.class_count()]);
    };
    Ok(part
        .classes()
        .iter()
        .map(|c| match histogram(&mut c.members.iter().copied()) {
            None => 0.0,
            Some(local) if data_type == DataType::Nominal => total_variation(&local, &global),
            Some(local) => ordered_emd(&local, &global),
        })
        .collect())
}

/// Total variation for nominal attributes, normalized ordered EMD otherwise.
pub fn check_t_closeness(part: &Partition, d: &Dataset, t: f64, sensitive: &str) -> Result<ModelVerdict> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("t must lie in [0, 1], got {t}")));
    }
    let witnesses = t_closeness_distances(part, d, sensitive)?
        .into_iter()
        .enumerate()
        .filter(|(_, dist)| *dist > t + THRESHOLD_EPS)
        .map(|(class, distance)| Witness::Distance { class, distance })
        .collect();
    Ok(ModelVerdict::from_witnesses(witnesses))
}

/// Equivalence-class counts of a population generalized with a given scheme,
/// keyed by displayed labels so that released files (where generalized cells
/// are plain labels) can be matched as well as in-memory datasets.
#[derive(Debug, Clone)]
pub struct PopulationIndex {
    counts: HashMap<Vec<CellKey>, usize>,
    n: usize,
}

impl PopulationIndex {
    /// `qi_schema` lists the sample's quasi-identifiers at level 0, in the
    /// order the scheme refers to them.
    pub fn build<'a>(
        population: &Dataset,
        qi_schema: impl IntoIterator<Item = &'a AttributeSchema>,
        scheme: &GeneralizationScheme,
        hierarchies: &HierarchySet,
    ) -> Result<Self> {
        let mut schema = Vec::new();
        let mut columns = Vec::new();
        for attr in qi_schema {
            let col = population
                .column_index(&attr.name)
                .map_err(|_| Error::SchemaMismatch(format!("population lacks quasi-identifier `{}`", attr.name)))?;
            let pop_attr = &population.schema()[col];
            if pop_attr.data_type != attr.data_type || pop_attr.level != 0 {
                return Err(Error::SchemaMismatch(format!(
                    "`{}` is {} in the sample but {} (level {}) in the population",
                    attr.name, attr.data_type, pop_attr.data_type, pop_attr.level
                )));
            }
            let mut a = pop_attr.clone();
            a.role = AttributeRole::QuasiIdentifier;
            a.level = 0;
            schema.push(a);
            columns.push(col);
        }
        let records = population
            .records()
            .iter()
            .map(|r| columns.iter().map(|&c| r[c].clone()).collect())
            .collect();
        let projected = Dataset::from_parts_unchecked(schema, records);
        let generalized = generalize(&projected, scheme, hierarchies)?;
        let part = partition(&generalized);
        let counts = part
            .classes()
            .iter()
            .map(|c| (c.key.iter().map(Value::key).collect(), c.size()))
            .collect();
        Ok(PopulationIndex {
            counts,
            n: population.n(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self, key: &[Value]) -> usize {
        let k: Vec<CellKey> = key.iter().map(Value::key).collect();
        self.counts.get(&k).copied().unwrap_or(0)
    }

    /// Population count of every class of `sample`, failing on classes the
    /// population does not contain.
    pub fn class_counts(&self, sample: &Partition) -> Result<Vec<usize>> {
        sample
            .classes()
            .iter()
            .map(|c| match self.count(&c.key) {
                0 => Err(Error::ClassNotInPopulation {
                    key: format_key(&c.key),
                }),
                n => Ok(n),
            })
            .collect()
    }
}

pub(crate) fn format_key(key: &[Value]) -> String {
    let parts: Vec<String> = key.iter().map(|v| v.key().to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Presence probability of each sample class: sample count over population count.
pub fn presence_probabilities(sample: &Partition, population: &PopulationIndex) -> Result<Vec<f64>> {
    let counts = population.class_counts(sample)?;
    Ok(sample
        .classes()
        .iter()
        .zip(counts)
        .map(|(c, pop)| c.size() as f64 / pop as f64)
        .collect())
}

pub fn check_delta_presence(
    sample: &Partition,
    population: &PopulationIndex,
    delta_min: f64,
    delta_max: f64,
) -> Result<ModelVerdict> {
    check_delta_bounds(delta_min, delta_max)?;
    let witnesses = presence_probabilities(sample, population)?
        .into_iter()
        .enumerate()
        .filter(|(_, p)| *p < delta_min - THRESHOLD_EPS || *p > delta_max + THRESHOLD_EPS)
        .map(|(class, probability)| Witness::Presence { class, probability })
        .collect();
    Ok(ModelVerdict::from_witnesses(witnesses))
}

/// Evaluates one constraint against a partition of `d`. δ-presence needs
/// the population index built for the same scheme.
pub fn check(
    constraint: &PrivacyConstraint,
    part: &Partition,
    d: &Dataset,
    population: Option<&PopulationIndex>,
) -> Result<ModelVerdict> {
    match constraint {
        PrivacyConstraint::KAnonymity { k } => check_k_anonymity(part, *k),
        PrivacyConstraint::LDiversity { l, sensitive } => check_l_diversity(part, d, *l, sensitive),
        PrivacyConstraint::TCloseness { t, sensitive } => check_t_closeness(part, d, *t, sensitive),
        PrivacyConstraint::DeltaPresence {
            delta_min, delta_max, ..
        } => {
            let index =
                population.ok_or_else(|| Error::InvalidParameter("delta-presence requires a population".into()))?;
            check_delta_presence(part, index, *delta_min, *delta_max)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{Bin, Hierarchy};
    use proptest::prelude::*;

    fn dataset(rows: &[(&str, &str)], sensitive_type: DataType) -> Dataset {
        let schema = vec![
            AttributeSchema::new("g", DataType::Nominal, AttributeRole::QuasiIdentifier),
            match sensitive_type {
                DataType::Ordinal => {
                    AttributeSchema::new("s", DataType::Ordinal, AttributeRole::Sensitive).with_order(["A", "B", "C"])
                }
                t => AttributeSchema::new("s", t, AttributeRole::Sensitive),
            },
        ];
        let records = rows
            .iter()
            .map(|(g, s)| {
                let cell = if s.is_empty() {
                    Value::Missing
                } else {
                    schema[1].parse_token(s).unwrap()
                };
                vec![Value::Nominal(g.to_string()), cell]
            })
            .collect();
        Dataset::new(schema, records).unwrap()
    }

    #[test]
    fn k_anonymity_examples() {
        let d = dataset(
            &[("a", "x"), ("a", "x"), ("b", "x"), ("b", "x"), ("b", "x")],
            DataType::Nominal,
        );
        let p = partition(&d);
        assert!(check_k_anonymity(&p, 2).unwrap().satisfied);
        let v = check_k_anonymity(&p, 3).unwrap();
        assert!(!v.satisfied);
        assert_eq!(v.witnesses, vec![Witness::ClassSize { class: 0, size: 2 }]);
        assert!(check_k_anonymity(&p, 1).unwrap().satisfied);
        assert!(matches!(check_k_anonymity(&p, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn l_diversity_examples() {
        let d = dataset(
            &[("a", "flu"), ("a", "flu"), ("b", "flu"), ("b", "covid")],
            DataType::Nominal,
        );
        let p = partition(&d);
        let v = check_l_diversity(&p, &d, 2, "s").unwrap();
        assert_eq!(v.violating_classes, vec![0]);
        assert_eq!(v.witnesses, vec![Witness::DistinctCount { class: 0, distinct: 1 }]);
        assert!(check_l_diversity(&p, &d, 1, "s").unwrap().satisfied);
        assert!(matches!(
            check_l_diversity(&p, &d, 2, "g"),
            Err(Error::AttributeNotSensitive(_))
        ));
        assert!(matches!(
            check_l_diversity(&p, &d, 0, "s"),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn l_diversity_ignores_missing() {
        let d = dataset(&[("a", "flu"), ("a", "")], DataType::Nominal);
        assert!(!check_l_diversity(&partition(&d), &d, 2, "s").unwrap().satisfied);
    }

    #[test]
    fn t_closeness_total_variation() {
        // overall {A: .5, B: .5}; class q1 = {A: 1}
        let d = dataset(&[("q1", "A"), ("q1", "A"), ("q2", "B"), ("q2", "B")], DataType::Nominal);
        let p = partition(&d);
        let dist = t_closeness_distances(&p, &d, "s").unwrap();
        assert!((dist[0] - 0.5).abs() < 1e-12);
        assert!(!check_t_closeness(&p, &d, 0.4, "s").unwrap().satisfied);
        assert!(check_t_closeness(&p, &d, 0.5, "s").unwrap().satisfied);
    }

    #[test]
    fn t_closeness_identity_cases() {
        let d = dataset(&[("q1", "A"), ("q1", "B"), ("q2", "A"), ("q2", "B")], DataType::Nominal);
        let p = partition(&d);
        assert!(check_t_closeness(&p, &d, 0.0, "s").unwrap().satisfied);

        let single = dataset(&[("q", "A"), ("q", "B"), ("q", "B")], DataType::Nominal);
        let p = partition(&single);
        assert_eq!(t_closeness_distances(&p, &single, "s").unwrap(), vec![0.0]);
        assert!(matches!(
            check_t_closeness(&p, &single, 1.5, "s"),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn t_closeness_ordinal_uses_emd() {
        // overall A,B,C uniform; class q1 = {A}; EMD = (|1-1/3| + |1-2/3|)/2 = 1/2
        let d = dataset(&[("q1", "A"), ("q2", "B"), ("q3", "C")], DataType::Ordinal);
        let p = partition(&d);
        let dist = t_closeness_distances(&p, &d, "s").unwrap();
        assert!((dist[0] - 0.5).abs() < 1e-12);
        // class {B}: cumulative (0,1,1) vs (1/3,2/3,1) gives (1/3 + 1/3)/2
        assert!((dist[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!((dist[2] - 0.5).abs() < 1e-12);
    }

    /// Quantile-function form of the 1-D Wasserstein distance, used as an
    /// independent oracle for the cumulative-difference implementation.
    fn emd_by_quantiles(p: &[f64], q: &[f64]) -> f64 {
        let m = p.len();
        let mut cuts: Vec<f64> = Vec::new();
        let (mut cp, mut cq) = (0.0, 0.0);
        for i in 0..m {
            cp += p[i];
            cq += q[i];
            cuts.push(cp.min(1.0));
            cuts.push(cq.min(1.0));
        }
        cuts.push(0.0);
        cuts.push(1.0);
        cuts.sort_by(f64::total_cmp);
        let inverse = |dist: &[f64], u: f64| -> usize {
            let mut acc = 0.0;
            for (i, w) in dist.iter().enumerate() {
                acc += w;
                if u < acc {
                    return i;
                }
            }
            dist.iter().rposition(|&w| w > 0.0).unwrap_or(m - 1)
        };
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let width = w[1] - w[0];
            if width <= 0.0 {
                continue;
            }
            let mid = 0.5 * (w[0] + w[1]);
            total += width * (inverse(p, mid) as f64 - inverse(q, mid) as f64).abs();
        }
        total / (m - 1) as f64
    }

    fn normalize(w: Vec<u32>) -> Vec<f64> {
        let s: u32 = w.iter().sum();
        w.iter().map(|&x| x as f64 / s as f64).collect()
    }

    proptest! {
        #[test]
        fn emd_matches_quantile_oracle(
            pair in (2usize..7).prop_flat_map(|m| (
                prop::collection::vec(0u32..5, m),
                prop::collection::vec(0u32..5, m),
            ))
        ) {
            let (a, b) = pair;
            prop_assume!(a.iter().sum::<u32>() > 0 && b.iter().sum::<u32>() > 0);
            let (p, q) = (normalize(a), normalize(b));
            let fast = ordered_emd(&p, &q);
            prop_assert!((fast - emd_by_quantiles(&p, &q)).abs() < 1e-9);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&fast));
            let tv = total_variation(&p, &q);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&tv));
        }
    }

    #[test]
    fn delta_presence_examples() {
        let h = Hierarchy::interval("age", vec![vec![Bin::new(0.0, 100.0, "0-99")]]).unwrap();
        let hs: HierarchySet = [h].into_iter().collect();
        let attr = AttributeSchema::new("age", DataType::Discrete, AttributeRole::QuasiIdentifier);
        let pop = Dataset::new(vec![attr.clone()], (0..10).map(|i| vec![Value::Discrete(i)]).collect()).unwrap();
        let sample = Dataset::new(
            vec![attr.clone()],
            vec![vec![Value::Discrete(1)], vec![Value::Discrete(2)]],
        )
        .unwrap();
        let scheme = GeneralizationScheme::new(vec![1]);
        let index = PopulationIndex::build(&pop, [&attr], &scheme, &hs).unwrap();
        let dz = generalize(&sample, &scheme, &hs).unwrap();
        let part = partition(&dz);
        assert_eq!(presence_probabilities(&part, &index).unwrap(), vec![0.2]);
        assert!(check_delta_presence(&part, &index, 0.0, 0.5).unwrap().satisfied);
        assert!(check_delta_presence(&part, &index, 0.0, 1.0).unwrap().satisfied);
        assert!(!check_delta_presence(&part, &index, 0.3, 1.0).unwrap().satisfied);

        // sample equals population: probability 1
        let full = generalize(&pop, &scheme, &hs).unwrap();
        let v = check_delta_presence(&partition(&full), &index, 0.0, 0.9).unwrap();
        assert_eq!(
            v.witnesses,
            vec![Witness::Presence {
                class: 0,
                probability: 1.0
            }]
        );

        // a sample class the population lacks
        let raw = PopulationIndex::build(&pop, [&attr], &GeneralizationScheme::new(vec![0]), &hs).unwrap();
        let outsider = Dataset::new(vec![attr.clone()], vec![vec![Value::Discrete(50)]]).unwrap();
        assert!(matches!(
            check_delta_presence(&partition(&outsider), &raw, 0.0, 1.0),
            Err(Error::ClassNotInPopulation { .. })
        ));
    }

    #[test]
    fn population_schema_mismatch() {
        let hs = HierarchySet::new();
        let attr = AttributeSchema::new("age", DataType::Discrete, AttributeRole::QuasiIdentifier);
        let other = AttributeSchema::new("age", DataType::Nominal, AttributeRole::QuasiIdentifier);
        let pop = Dataset::new(vec![other], vec![vec![Value::Nominal("1".into())]]).unwrap();
        assert!(matches!(
            PopulationIndex::build(&pop, [&attr], &GeneralizationScheme::new(vec![0]), &hs),
            Err(Error::SchemaMismatch(_))
        ));
        assert!(PrivacyConstraint::delta_presence(0.6, 0.5, Arc::new(pop)).is_err());
    }
}
