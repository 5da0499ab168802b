//! Generalization hierarchies and the grouping/suppression transformations
//! built on them.
//!
//! Every hierarchy has an implicit top level `L` that maps all values to `*`;
//! generalizing to that level yields [`Value::Suppressed`] cells, so full-cell
//! suppression is the last step of grouping.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeSchema, DataType, Dataset, Value, SUPPRESSED_LABEL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HierarchyKind {
    Categorical,
    Interval,
}

/// Half-open numeric range `[lo, hi)` with a display label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub label: Option<String>,
}

impl Bin {
    pub fn new(lo: f64, hi: f64, label: impl Into<String>) -> Self {
        Bin {
            lo,
            hi,
            label: Some(label.into()),
        }
    }

    fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }

    fn display(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| format!("[{}, {})", self.lo, self.hi))
    }
}

#[derive(Debug, Clone)]
struct Categorical {
    /// One row per level-0 value; columns are levels `0..L` (top excluded).
    rows: Vec<Vec<String>>,
    /// Per level: label -> a representative row carrying it.
    index: Vec<HashMap<String, usize>>,
}

#[derive(Debug, Clone)]
struct Interval {
    /// Declared levels `1..L`, each sorted by `lo`.
    levels: Vec<Vec<Bin>>,
    labels: Vec<Vec<String>>,
    label_index: Vec<HashMap<String, usize>>,
    /// `parent[l][b]` is the bin at declared level `l + 1` containing bin `b` of level `l`.
    parent: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
enum Levels {
    Categorical(Categorical),
    Interval(Interval),
}

#[derive(Debug, Clone)]
pub struct Hierarchy {
    attribute: String,
    levels: Levels,
}

impl Hierarchy {
    /// Builds a categorical hierarchy from rows `v0, v1, ..., vm` (ascending
    /// levels). A final all-`*` column is treated as the top level; if absent
    /// it is synthesized.
    pub fn categorical<R, S>(attribute: impl Into<String>, rows: R) -> Result<Self>
    where
        R: IntoIterator,
        R::Item: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let attribute = attribute.into();
        let invalid = |reason: String| Error::InvalidHierarchy {
            attribute: attribute.clone(),
            reason,
        };
        let mut rows: Vec<Vec<String>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|s| s.into().trim().to_string()).collect())
            .collect();
        if rows.is_empty() {
            return Err(invalid("no rows".into()));
        }
        let width = rows[0].len();
        if width == 0 {
            return Err(invalid("empty row".into()));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != width) {
            return Err(invalid(format!(
                "row {} has {} levels, expected {width}",
                r + 1,
                rows[r].len()
            )));
        }
        if width > 1 && rows.iter().all(|r| r[width - 1] == SUPPRESSED_LABEL) {
            for r in &mut rows {
                r.pop();
            }
        }
        let width = rows[0].len();
        for r in &rows {
            if r.iter().any(|l| l == SUPPRESSED_LABEL) {
                return Err(invalid(format!(
                    "`{SUPPRESSED_LABEL}` is reserved for the top level (row starting `{}`)",
                    r[0]
                )));
            }
        }

        // Level 0 must identify rows uniquely; duplicates must agree.
        let mut by_value: HashMap<&str, usize> = HashMap::new();
        let mut keep = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            match by_value.get(r[0].as_str()) {
                None => {
                    by_value.insert(&r[0], i);
                    keep.push(i);
                }
                Some(&j) => {
                    if let Some(level) = (1..width).find(|&l| rows[j][l] != r[l]) {
                        return Err(Error::NonFunctionalMapping {
                            attribute,
                            value: r[0].clone(),
                            level,
                            first: rows[j][level].clone(),
                            second: r[level].clone(),
                        });
                    }
                }
            }
        }
        let rows: Vec<Vec<String>> = keep.into_iter().map(|i| rows[i].clone()).collect();

        // Coarsening: a label at level l determines the label at level l + 1.
        let mut index: Vec<HashMap<String, usize>> = vec![HashMap::new(); width];
        for (i, r) in rows.iter().enumerate() {
            for level in 0..width {
                let seen = *index[level].entry(r[level].clone()).or_insert(i);
                if level + 1 < width && rows[seen][level + 1] != r[level + 1] {
                    return Err(Error::NonMonotone {
                        attribute,
                        label: r[level].clone(),
                        level,
                        first: rows[seen][level + 1].clone(),
                        second: r[level + 1].clone(),
                    });
                }
            }
            // Once a value is relabelled it must not get its own label back.
            if let Some(changed) = (1..width).find(|&l| r[l] != r[0]) {
                if let Some(l) = (changed + 1..width).find(|&l| r[l] == r[0]) {
                    return Err(invalid(format!(
                        "value `{}` regains its original label at level {l}",
                        r[0]
                    )));
                }
            }
        }

        Ok(Hierarchy {
            attribute,
            levels: Levels::Categorical(Categorical { rows, index }),
        })
    }

    /// Builds an interval hierarchy from declared range levels (level 1
    /// upward). Level 0 is the raw value and the top level is `*`.
    pub fn interval(attribute: impl Into<String>, levels: Vec<Vec<Bin>>) -> Result<Self> {
        let attribute = attribute.into();
        let mut levels = levels;
        let mut labels = Vec::with_capacity(levels.len());
        let mut label_index = Vec::with_capacity(levels.len());
        for (li, bins) in levels.iter_mut().enumerate() {
            let level = li + 1;
            if bins.is_empty() {
                return Err(Error::InvalidHierarchy {
                    attribute,
                    reason: format!("level {level} has no ranges"),
                });
            }
            for b in bins.iter() {
                if !(b.lo.is_finite() && b.hi.is_finite() && b.lo < b.hi) {
                    return Err(Error::InvalidHierarchy {
                        attribute,
                        reason: format!("level {level} has an empty or non-finite range [{}, {})", b.lo, b.hi),
                    });
                }
            }
            bins.sort_by(|a, b| a.lo.total_cmp(&b.lo));
            for pair in bins.windows(2) {
                if pair[1].lo > pair[0].hi {
                    return Err(Error::RangeGap {
                        attribute,
                        level,
                        hi: pair[0].hi,
                        next_lo: pair[1].lo,
                    });
                }
                if pair[1].lo < pair[0].hi {
                    return Err(Error::RangeOverlap {
                        attribute,
                        level,
                        at: pair[1].lo,
                    });
                }
            }
            let names: Vec<String> = bins.iter().map(Bin::display).collect();
            let mut idx = HashMap::new();
            for (i, name) in names.iter().enumerate() {
                if name == SUPPRESSED_LABEL || idx.insert(name.clone(), i).is_some() {
                    return Err(Error::InvalidHierarchy {
                        attribute,
                        reason: format!("label `{name}` is reserved or repeated at level {level}"),
                    });
                }
            }
            labels.push(names);
            label_index.push(idx);
        }

        let mut parent = Vec::with_capacity(levels.len().saturating_sub(1));
        for l in 0..levels.len().saturating_sub(1) {
            let upper = &levels[l + 1];
            let mut ps = Vec::with_capacity(levels[l].len());
            for b in &levels[l] {
                let p = upper
                    .iter()
                    .position(|p| p.lo <= b.lo && b.hi <= p.hi)
                    .ok_or_else(|| Error::NonMonotone {
                        attribute: attribute.clone(),
                        label: b.display(),
                        level: l + 1,
                        first: upper
                            .iter()
                            .find(|p| p.contains(b.lo))
                            .map(Bin::display)
                            .unwrap_or_else(|| "<uncovered>".into()),
                        second: upper
                            .iter()
                            .find(|p| p.lo < b.hi && b.hi <= p.hi)
                            .map(Bin::display)
                            .unwrap_or_else(|| "<uncovered>".into()),
                    })?;
                ps.push(p);
            }
            parent.push(ps);
        }

        // A bin labelled with the canonical text of a value it contains leaves
        // that value looking unchanged; lower levels must then do the same.
        for (li, bins) in levels.iter().enumerate().skip(1) {
            for (b, name) in bins.iter().zip(&labels[li]) {
                let Ok(x) = name.parse::<f64>() else { continue };
                if !b.contains(x) || x.to_string() != *name {
                    continue;
                }
                for lower in 0..li {
                    let i = levels[lower].iter().position(|c| c.contains(x));
                    if i.map(|i| &labels[lower][i]) != Some(name) {
                        return Err(Error::InvalidHierarchy {
                            attribute,
                            reason: format!("value {name} regains its original label at level {}", li + 1),
                        });
                    }
                }
            }
        }

        Ok(Hierarchy {
            attribute,
            levels: Levels::Interval(Interval {
                levels,
                labels,
                label_index,
                parent,
            }),
        })
    }

    pub fn attribute(&self) -> &str {
        &self.attribute
    }

    pub fn kind(&self) -> HierarchyKind {
        match self.levels {
            Levels::Categorical(_) => HierarchyKind::Categorical,
            Levels::Interval(_) => HierarchyKind::Interval,
        }
    }

    /// Top level `L`; level `L` is full suppression.
    pub fn top(&self) -> usize {
        match &self.levels {
            Levels::Categorical(c) => c.rows[0].len(),
            Levels::Interval(i) => i.levels.len() + 1,
        }
    }

    /// Maps a cell currently at level `from` to level `to` (`from <= to`).
    /// `None` means the value is not covered by the hierarchy.
    pub fn map(&self, value: &Value, from: usize, to: usize) -> Option<Value> {
        let top = self.top();
        debug_assert!(from <= to && to <= top);
        if from == to {
            return Some(value.clone());
        }
        if to == top {
            return Some(Value::Suppressed);
        }
        match value {
            Value::Missing => return Some(Value::Missing),
            Value::Suppressed => return None,
            _ => {}
        }
        match &self.levels {
            Levels::Categorical(c) => {
                let label = value.label();
                let row = *c.index[from].get(label.as_ref())?;
                Some(Value::Nominal(c.rows[row][to].clone()))
            }
            Levels::Interval(iv) => {
                // declared level l lives at iv.levels[l - 1]
                let (mut level, mut bin) = if from == 0 {
                    let x = value.as_f64()?;
                    let bins = &iv.levels[0];
                    let i = bins.partition_point(|b| b.lo <= x);
                    if i == 0 || !bins[i - 1].contains(x) {
                        return None;
                    }
                    (1, i - 1)
                } else {
                    let label = value.label();
                    (from, *iv.label_index[from - 1].get(label.as_ref())?)
                };
                while level < to {
                    bin = iv.parent[level - 1][bin];
                    level += 1;
                }
                Some(Value::Nominal(iv.labels[level - 1][bin].clone()))
            }
        }
    }
}

#[derive(Debug, Deserialize)]
struct IntervalDocument {
    #[serde(default)]
    #[allow(dead_code)]
    attribute: Option<String>,
    levels: Vec<Vec<Bin>>,
}

/// Loads the hierarchy for `attribute`. Files ending in `.json` are interval
/// hierarchies; anything else is a semicolon-separated categorical table.
pub fn load_hierarchy(path: &Path, attribute: &AttributeSchema) -> Result<Hierarchy> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let h = if is_json {
        parse_interval_hierarchy(&attribute.name, &text)?
    } else {
        parse_categorical_hierarchy(&attribute.name, &text)?
    };
    check_compatible(&h, attribute)?;
    Ok(h)
}

pub fn parse_categorical_hierarchy(attribute: &str, text: &str) -> Result<Hierarchy> {
    let rows: Vec<Vec<&str>> = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(';').collect())
        .collect();
    Hierarchy::categorical(attribute, rows)
}

pub fn parse_interval_hierarchy(attribute: &str, text: &str) -> Result<Hierarchy> {
    let doc: IntervalDocument =
        serde_json::from_str(text).map_err(|e| Error::json(format!("interval hierarchy for `{attribute}`"), e))?;
    Hierarchy::interval(attribute, doc.levels)
}

/// Rejects hierarchy/attribute pairings that cannot work: interval hierarchies
/// need numeric data, and continuous quasi-identifiers need intervals.
pub fn check_compatible(h: &Hierarchy, attribute: &AttributeSchema) -> Result<()> {
    let numeric = matches!(attribute.data_type, DataType::Discrete | DataType::Continuous);
    match h.kind() {
        HierarchyKind::Interval if !numeric => Err(Error::InvalidHierarchy {
            attribute: attribute.name.clone(),
            reason: format!("interval hierarchy on {} attribute", attribute.data_type),
        }),
        HierarchyKind::Categorical
            if attribute.data_type == DataType::Continuous && attribute.is_quasi_identifier() =>
        {
            Err(Error::InvalidHierarchy {
                attribute: attribute.name.clone(),
                reason: "continuous quasi-identifiers require an interval hierarchy".into(),
            })
        }
        _ => Ok(()),
    }
}

/// Level vector `(z1, ..., zp)`, one entry per quasi-identifier in schema order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeneralizationScheme(Vec<usize>);

impl GeneralizationScheme {
    pub fn new(levels: Vec<usize>) -> Self {
        GeneralizationScheme(levels)
    }

    pub fn identity(p: usize) -> Self {
        GeneralizationScheme(vec![0; p])
    }

    pub fn levels(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn height(&self) -> usize {
        self.0.iter().sum()
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &GeneralizationScheme) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for GeneralizationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(")")
    }
}

impl std::str::FromStr for GeneralizationScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        if inner.trim().is_empty() {
            return Ok(GeneralizationScheme(Vec::new()));
        }
        inner
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidScheme(format!("bad level `{t}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(GeneralizationScheme)
    }
}

/// Hierarchies keyed by attribute name.
#[derive(Debug, Clone, Default)]
pub struct HierarchySet {
    by_attribute: BTreeMap<String, Hierarchy>,
}

impl HierarchySet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, h: Hierarchy) {
        self.by_attribute.insert(h.attribute.clone(), h);
    }

    pub fn get(&self, attribute: &str) -> Option<&Hierarchy> {
        self.by_attribute.get(attribute)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Hierarchy> + '_ {
        self.by_attribute.values()
    }

    /// Top level of each quasi-identifier of `d`, in schema order.
    pub fn bounds(&self, d: &Dataset) -> Result<Vec<usize>> {
        d.quasi_identifiers()
            .map(|a| {
                let h = self
                    .get(&a.name)
                    .ok_or_else(|| Error::MissingHierarchy(a.name.clone()))?;
                if a.level == 0 {
                    check_compatible(h, a)?;
                }
                Ok(h.top())
            })
            .collect()
    }

    pub fn check_scheme(&self, d: &Dataset, scheme: &GeneralizationScheme) -> Result<Vec<usize>> {
        let bounds = self.bounds(d)?;
        if scheme.len() != bounds.len() {
            return Err(Error::InvalidScheme(format!(
                "scheme {scheme} has {} entries for {} quasi-identifiers",
                scheme.len(),
                bounds.len()
            )));
        }
        for ((level, top), attr) in scheme.levels().iter().zip(&bounds).zip(d.quasi_identifiers()) {
            if level > top {
                return Err(Error::InvalidScheme(format!(
                    "level {level} exceeds top level {top} of `{}`",
                    attr.name
                )));
            }
            if *level < attr.level {
                return Err(Error::InvalidScheme(format!(
                    "`{}` is already generalized to level {}; cannot lower it to {level}",
                    attr.name, attr.level
                )));
            }
        }
        Ok(bounds)
    }
}

impl FromIterator<Hierarchy> for HierarchySet {
    fn from_iter<I: IntoIterator<Item = Hierarchy>>(iter: I) -> Self {
        let mut set = HierarchySet::new();
        for h in iter {
            set.insert(h);
        }
        set
    }
}

/// Replaces every quasi-identifier cell by its label at the scheme's level.
/// Non-QI cells, record order and `n` are unchanged.
pub fn generalize(d: &Dataset, scheme: &GeneralizationScheme, hierarchies: &HierarchySet) -> Result<Dataset> {
    hierarchies.check_scheme(d, scheme)?;
    let mut schema = d.schema().to_vec();
    let mut records: Vec<Vec<Value>> = d.records().to_vec();

    for (col, &target) in d.qi_indices().iter().zip(scheme.levels()) {
        let attr = &d.schema()[*col];
        let current = attr.level;
        if target == current {
            continue;
        }
        let h = hierarchies
            .get(&attr.name)
            .ok_or_else(|| Error::MissingHierarchy(attr.name.clone()))?;
        let mut cache: HashMap<&Value, Value> = HashMap::new();
        for (row, original) in d.records().iter().enumerate() {
            let cell = &original[*col];
            let mapped = match cache.get(cell) {
                Some(v) => v.clone(),
                None => {
                    let v = h.map(cell, current, target).ok_or_else(|| Error::UnmappedValue {
                        row,
                        column: attr.name.clone(),
                        value: cell.label().into_owned(),
                    })?;
                    cache.insert(cell, v.clone());
                    v
                }
            };
            records[row][*col] = mapped;
        }
        let out = &mut schema[*col];
        out.level = target;
        if target > 0 {
            out.data_type = DataType::Nominal;
            out.order = None;
        }
    }
    Ok(Dataset::from_parts_unchecked(schema, records))
}

/// Removes whole records. An empty result is allowed here; consumers that
/// need rows report `EmptyDataset`.
pub fn suppress_records(d: &Dataset, rows: &BTreeSet<usize>) -> Result<Dataset> {
    if let Some(&bad) = rows.iter().find(|&&r| r >= d.n()) {
        return Err(Error::IndexOutOfRange { index: bad, len: d.n() });
    }
    let keep: Vec<usize> = (0..d.n()).filter(|r| !rows.contains(r)).collect();
    d.select_rows(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{read_csv, AttributeRole, CsvOptions};
    use proptest::prelude::*;

    fn decades() -> Hierarchy {
        let bins = (0..10)
            .map(|i| {
                Bin::new(
                    i as f64 * 10.0,
                    i as f64 * 10.0 + 10.0,
                    format!("{}-{}", i * 10, i * 10 + 9),
                )
            })
            .collect();
        Hierarchy::interval("age", vec![bins]).unwrap()
    }

    fn sex() -> Hierarchy {
        parse_categorical_hierarchy("sex", "M;person\nF;person\n").unwrap()
    }

    fn toy() -> Dataset {
        let schema = vec![
            AttributeSchema::new("age", DataType::Discrete, AttributeRole::QuasiIdentifier),
            AttributeSchema::new("sex", DataType::Nominal, AttributeRole::QuasiIdentifier),
            AttributeSchema::new("dx", DataType::Nominal, AttributeRole::Sensitive),
        ];
        read_csv(
            "age,sex,dx\n34,M,flu\n31,F,covid\n58,M,flu\n".as_bytes(),
            &schema,
            &CsvOptions::default(),
        )
        .unwrap()
    }

    fn set() -> HierarchySet {
        [decades(), sex()].into_iter().collect()
    }

    #[test]
    fn categorical_synthesizes_top() {
        let h = sex();
        assert_eq!(h.top(), 2);
        assert_eq!(
            h.map(&Value::Nominal("M".into()), 0, 1),
            Some(Value::Nominal("person".into()))
        );
        assert_eq!(h.map(&Value::Nominal("M".into()), 0, 2), Some(Value::Suppressed));

        let explicit = parse_categorical_hierarchy("sex", "M;person;*\nF;person;*\n").unwrap();
        assert_eq!(explicit.top(), 2);
    }

    #[test]
    fn non_functional_rows_rejected() {
        let err = parse_categorical_hierarchy("sex", "M;person\nM;adult\n").unwrap_err();
        assert!(matches!(err, Error::NonFunctionalMapping { level: 1, .. }));
    }

    #[test]
    fn merge_then_split_rejected() {
        let err = parse_categorical_hierarchy("x", "a;ab;left\nb;ab;right\n").unwrap_err();
        assert!(matches!(err, Error::NonMonotone { level: 1, .. }));
    }

    #[test]
    fn reserved_star_and_ragged_rows_rejected() {
        assert!(parse_categorical_hierarchy("x", "a;*;z\nb;*;z\n").is_err());
        assert!(parse_categorical_hierarchy("x", "a;b\nc\n").is_err());
    }

    #[test]
    fn interval_levels_parse() {
        let text = r#"{"levels": [
            [{"lo": 0, "hi": 50}, {"lo": 50, "hi": 100}],
            [{"lo": 0, "hi": 100, "label": "0-99"}]
        ]}"#;
        let h = parse_interval_hierarchy("age", text).unwrap();
        assert_eq!(h.top(), 3);
        assert_eq!(
            h.map(&Value::Discrete(70), 0, 1),
            Some(Value::Nominal("[50, 100)".into()))
        );
        assert_eq!(h.map(&Value::Discrete(70), 0, 2), Some(Value::Nominal("0-99".into())));
        assert_eq!(
            h.map(&Value::Nominal("[50, 100)".into()), 1, 2),
            Some(Value::Nominal("0-99".into()))
        );
        assert_eq!(h.map(&Value::Discrete(100), 0, 1), None);
    }

    #[test]
    fn interval_gap_and_overlap() {
        let gap = vec![vec![Bin::new(0.0, 10.0, "a"), Bin::new(20.0, 30.0, "b")]];
        assert!(matches!(Hierarchy::interval("x", gap), Err(Error::RangeGap { .. })));
        let overlap = vec![vec![Bin::new(0.0, 10.0, "a"), Bin::new(5.0, 30.0, "b")]];
        assert!(matches!(
            Hierarchy::interval("x", overlap),
            Err(Error::RangeOverlap { .. })
        ));
        let straddle = vec![
            vec![Bin::new(0.0, 10.0, "a"), Bin::new(10.0, 20.0, "b")],
            vec![Bin::new(0.0, 5.0, "c"), Bin::new(5.0, 20.0, "d")],
        ];
        assert!(matches!(
            Hierarchy::interval("x", straddle),
            Err(Error::NonMonotone { .. })
        ));
    }

    #[test]
    fn continuous_qi_needs_interval() {
        let attr = AttributeSchema::new("bmi", DataType::Continuous, AttributeRole::QuasiIdentifier);
        let h = parse_categorical_hierarchy("bmi", "20.5;low\n").unwrap();
        assert!(check_compatible(&h, &attr).is_err());
        let nominal = AttributeSchema::new("sex", DataType::Nominal, AttributeRole::QuasiIdentifier);
        assert!(check_compatible(&decades(), &nominal).is_err());
    }

    #[test]
    fn generalize_decade() {
        let d = toy();
        let dz = generalize(&d, &GeneralizationScheme::new(vec![1, 0]), &set()).unwrap();
        assert_eq!(dz.records()[0][0], Value::Nominal("30-39".into()));
        assert_eq!(dz.records()[0][1], Value::Nominal("M".into()));
        assert_eq!(dz.records()[0][2], d.records()[0][2]);
        assert_eq!(dz.schema()[0].level, 1);
    }

    #[test]
    fn generalize_identity_and_top() {
        let d = toy();
        let same = generalize(&d, &GeneralizationScheme::identity(2), &set()).unwrap();
        assert_eq!(same, d);
        let top = generalize(&d, &GeneralizationScheme::new(vec![2, 2]), &set()).unwrap();
        for row in top.records() {
            assert!(row[0].is_suppressed() && row[1].is_suppressed());
            assert!(!row[2].is_suppressed());
        }
    }

    #[test]
    fn generalize_errors() {
        let d = toy();
        let only_age: HierarchySet = [decades()].into_iter().collect();
        assert!(matches!(
            generalize(&d, &GeneralizationScheme::new(vec![1, 0]), &only_age),
            Err(Error::MissingHierarchy(a)) if a == "sex"
        ));
        assert!(matches!(
            generalize(&d, &GeneralizationScheme::new(vec![3, 0]), &set()),
            Err(Error::InvalidScheme(_))
        ));
        let small = parse_categorical_hierarchy("sex", "M;person\n").unwrap();
        let partial: HierarchySet = [decades(), small].into_iter().collect();
        match generalize(&d, &GeneralizationScheme::new(vec![0, 1]), &partial) {
            Err(Error::UnmappedValue { row, column, value }) => {
                assert_eq!((row, column.as_str(), value.as_str()), (1, "sex", "F"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn suppress_records_cases() {
        let d = toy();
        let out = suppress_records(&d, &BTreeSet::from([2])).unwrap();
        assert_eq!(out.n(), 2);
        assert_eq!(suppress_records(&d, &BTreeSet::new()).unwrap(), d);
        assert!(suppress_records(&d, &BTreeSet::from([0, 1, 2])).unwrap().is_empty());
        assert!(matches!(
            suppress_records(&d, &BTreeSet::from([3])),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn scheme_parse_and_order() {
        let s: GeneralizationScheme = "(1, 0,2)".parse().unwrap();
        assert_eq!(s.levels(), &[1, 0, 2]);
        assert_eq!(s.to_string(), "(1,0,2)");
        assert!(GeneralizationScheme::new(vec![1, 0, 1]).le(&s));
        assert!(!s.le(&GeneralizationScheme::new(vec![1, 1, 1])));
    }

    fn distinct(d: &Dataset, col: usize) -> usize {
        d.column(col).collect::<std::collections::HashSet<_>>().len()
    }

    proptest! {
        #[test]
        fn coarsening_composes(
            ages in prop::collection::vec(0i64..100, 1..30),
            sexes in prop::collection::vec(prop::bool::ANY, 30),
            z in (0usize..=2, 0usize..=2),
            dz in (0usize..=2, 0usize..=2),
        ) {
            let schema = vec![
                AttributeSchema::new("age", DataType::Discrete, AttributeRole::QuasiIdentifier),
                AttributeSchema::new("sex", DataType::Nominal, AttributeRole::QuasiIdentifier),
                AttributeSchema::new("dx", DataType::Nominal, AttributeRole::Insensitive),
            ];
            let rows = ages.iter().zip(&sexes).map(|(a, s)| vec![
                Value::Discrete(*a),
                Value::Nominal(if *s { "M" } else { "F" }.into()),
                Value::Nominal(format!("r{a}")),
            ]).collect();
            let d = Dataset::new(schema, rows).unwrap();
            let hs = set();
            let lo = GeneralizationScheme::new(vec![z.0, z.1]);
            let hi = GeneralizationScheme::new(vec![(z.0 + dz.0).min(2), (z.1 + dz.1).min(2)]);
            let step = generalize(&d, &lo, &hs).unwrap();
            let two_step = generalize(&step, &hi, &hs).unwrap();
            let direct = generalize(&d, &hi, &hs).unwrap();
            prop_assert_eq!(&two_step, &direct);
            prop_assert_eq!(step.n(), d.n());
            for (a, b) in step.records().iter().zip(d.records()) {
                prop_assert_eq!(&a[2], &b[2]);
            }
            for col in 0..2 {
                prop_assert!(distinct(&direct, col) <= distinct(&step, col));
                prop_assert!(distinct(&step, col) <= distinct(&d, col));
            }
        }
    }
}
