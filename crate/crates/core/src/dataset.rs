//! Typed tabular data model and CSV ingestion.
//!
//! A [`Dataset`] is immutable once built: every transformation in this crate
//! (identifier removal, generalization, record suppression) returns a new one.

use std::borrow::Cow;
use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::hash::{Hash, Hasher};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Label written for suppressed cells.
pub const SUPPRESSED_LABEL: &str = "*";

/// Nature of an attribute: qualitative (nominal, ordinal) or quantitative
/// (discrete, continuous). Computational typing follows from it: labels are
/// strings, discrete values are integers, continuous values are floats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataType {
    Nominal,
    Ordinal,
    Discrete,
    Continuous,
}

impl DataType {
    pub fn is_ordered(self) -> bool {
        !matches!(self, DataType::Nominal)
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DataType::Nominal => "nominal",
            DataType::Ordinal => "ordinal",
            DataType::Discrete => "discrete",
            DataType::Continuous => "continuous",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeRole {
    /// Directly identifies the subject; removed before release.
    Identifier,
    /// Identifies only in combination with other attributes; generalized.
    QuasiIdentifier,
    /// Health or other sensitive information protected by l-diversity / t-closeness.
    Sensitive,
    /// Neither identifying nor sensitive; passed through untouched.
    Insensitive,
}

/// A single cell.
#[derive(Debug, Clone)]
pub enum Value {
    Missing,
    Nominal(String),
    Ordinal {
        label: String,
        rank: u32,
    },
    Discrete(i64),
    Continuous(f64),
    /// Masked cell produced by suppression.
    Suppressed,
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    pub fn is_suppressed(&self) -> bool {
        matches!(self, Value::Suppressed)
    }

    /// Textual form of the cell as it appears in a CSV file. Missing cells
    /// render as the empty string.
    pub fn label(&self) -> Cow<'_, str> {
        match self {
            Value::Missing => Cow::Borrowed(""),
            Value::Nominal(s) => Cow::Borrowed(s),
            Value::Ordinal { label, .. } => Cow::Borrowed(label),
            Value::Discrete(v) => Cow::Owned(v.to_string()),
            Value::Continuous(v) => Cow::Owned(v.to_string()),
            Value::Suppressed => Cow::Borrowed(SUPPRESSED_LABEL),
        }
    }

    /// Numeric view used by interval hierarchies and ordered distances.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Discrete(v) => Some(*v as f64),
            Value::Continuous(v) => Some(*v),
            _ => None,
        }
    }

    pub fn matches_type(&self, data_type: DataType) -> bool {
        matches!(
            (self, data_type),
            (Value::Missing | Value::Suppressed, _)
                | (Value::Nominal(_), DataType::Nominal)
                | (Value::Ordinal { .. }, DataType::Ordinal)
                | (Value::Discrete(_), DataType::Discrete)
                | (Value::Continuous(_), DataType::Continuous)
        )
    }

    /// Canonical key for comparing cells across datasets whose typing may
    /// differ (e.g. an original discrete column against generalized labels).
    pub fn key(&self) -> CellKey {
        match self {
            Value::Missing => CellKey::Missing,
            Value::Suppressed => CellKey::Suppressed,
            other => CellKey::Label(other.label().into_owned()),
        }
    }

    fn normalized_bits(v: f64) -> u64 {
        if v == 0.0 {
            0.0f64.to_bits()
        } else {
            v.to_bits()
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Missing, Value::Missing) | (Value::Suppressed, Value::Suppressed) => true,
            (Value::Nominal(a), Value::Nominal(b)) => a == b,
            (Value::Ordinal { label: a, rank: ra }, Value::Ordinal { label: b, rank: rb }) => ra == rb && a == b,
            (Value::Discrete(a), Value::Discrete(b)) => a == b,
            (Value::Continuous(a), Value::Continuous(b)) => Value::normalized_bits(*a) == Value::normalized_bits(*b),
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Value::Missing | Value::Suppressed => {}
            Value::Nominal(s) => s.hash(state),
            Value::Ordinal { label, rank } => {
                label.hash(state);
                rank.hash(state);
            }
            Value::Discrete(v) => v.hash(state),
            Value::Continuous(v) => Value::normalized_bits(*v).hash(state),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Type-erased cell identity: missing, suppressed, or a displayed label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CellKey {
    Missing,
    Suppressed,
    Label(String),
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellKey::Missing => f.write_str("<missing>"),
            CellKey::Suppressed => f.write_str(SUPPRESSED_LABEL),
            CellKey::Label(s) => f.write_str(s),
        }
    }
}

/// Per-column metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub name: String,
    pub data_type: DataType,
    pub role: AttributeRole,
    /// Declared order of ordinal labels, lowest rank first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<String>>,
    /// Path of the generalization hierarchy file, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<PathBuf>,
    /// Language/region tag, e.g. `pt-BR`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locale: Option<String>,
    /// Generalization level currently applied to this column (0 = original).
    #[serde(default, skip_serializing_if = "is_zero")]
    pub level: usize,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

impl AttributeSchema {
    pub fn new(name: impl Into<String>, data_type: DataType, role: AttributeRole) -> Self {
        AttributeSchema {
            name: name.into(),
            data_type,
            role,
            order: None,
            hierarchy: None,
            locale: None,
            level: 0,
        }
    }

    pub fn with_order<I, S>(mut self, order: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.order = Some(order.into_iter().map(Into::into).collect());
        self
    }

    pub fn with_hierarchy(mut self, path: impl Into<PathBuf>) -> Self {
        self.hierarchy = Some(path.into());
        self
    }

    pub fn is_quasi_identifier(&self) -> bool {
        self.role == AttributeRole::QuasiIdentifier
    }

    /// Parses one raw token according to the declared type. Missing-token
    /// handling happens in the caller.
    pub fn parse_token(&self, token: &str) -> Option<Value> {
        match self.data_type {
            DataType::Nominal => Some(Value::Nominal(token.to_string())),
            DataType::Ordinal => {
                let order = self.order.as_ref()?;
                let rank = order.iter().position(|l| l == token)?;
                Some(Value::Ordinal {
                    label: token.to_string(),
                    rank: rank as u32,
                })
            }
            DataType::Discrete => token.trim().parse::<i64>().ok().map(Value::Discrete),
            DataType::Continuous => token
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Value::Continuous),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::InvalidSchema("attribute with empty name".into()));
        }
        match (&self.order, self.data_type) {
            (Some(order), DataType::Ordinal) => {
                let mut seen = HashSet::new();
                for label in order {
                    if !seen.insert(label) {
                        return Err(Error::InvalidSchema(format!(
                            "ordinal attribute `{}` lists `{label}` twice in its order",
                            self.name
                        )));
                    }
                }
            }
            (None, DataType::Ordinal) if self.level == 0 => {
                return Err(Error::InvalidSchema(format!(
                    "ordinal attribute `{}` needs an `order` list",
                    self.name
                )))
            }
            (Some(_), other) => {
                return Err(Error::InvalidSchema(format!(
                    "attribute `{}` is {other} but declares an ordinal order",
                    self.name
                )))
            }
            _ => {}
        }
        Ok(())
    }
}

/// On-disk schema document. Either a bare list of attributes or an object
/// carrying the dataset format alongside them.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum SchemaDocument {
    List(Vec<AttributeSchema>),
    Full {
        #[serde(default = "default_format")]
        format: String,
        attributes: Vec<AttributeSchema>,
    },
}

fn default_format() -> String {
    "plaintext".to_string()
}

/// Reads a JSON schema file. Relative hierarchy paths are resolved against
/// the schema file's directory.
pub fn load_schema(path: &Path) -> Result<Vec<AttributeSchema>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut attrs = parse_schema(&text)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    for attr in &mut attrs {
        if let Some(h) = attr.hierarchy.as_mut() {
            if h.is_relative() {
                *h = base.join(&*h);
            }
        }
    }
    Ok(attrs)
}

pub fn parse_schema(text: &str) -> Result<Vec<AttributeSchema>> {
    let doc: SchemaDocument = serde_json::from_str(text).map_err(|e| Error::json("schema", e))?;
    let attrs = match doc {
        SchemaDocument::List(attrs) => attrs,
        SchemaDocument::Full { format, attributes } => {
            match format.to_ascii_lowercase().as_str() {
                "plaintext" | "csv" | "utf-8" | "utf8" => {}
                _ => return Err(Error::UnsupportedFormat(format)),
            }
            attributes
        }
    };
    validate_schema(&attrs)?;
    Ok(attrs)
}

fn validate_schema(schema: &[AttributeSchema]) -> Result<()> {
    let mut names = HashSet::new();
    for attr in schema {
        attr.validate()?;
        if !names.insert(attr.name.as_str()) {
            return Err(Error::InvalidSchema(format!(
                "attribute `{}` declared twice",
                attr.name
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub quote: u8,
    /// Token that parses to [`Value::Missing`].
    pub missing_token: String,
    /// Token that parses to [`Value::Suppressed`] when reading released data.
    pub suppressed_token: Option<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            quote: b'"',
            missing_token: String::new(),
            suppressed_token: None,
        }
    }
}

impl CsvOptions {
    /// Options for reading a file this crate wrote: `*` cells are suppressed.
    pub fn released() -> Self {
        CsvOptions {
            suppressed_token: Some(SUPPRESSED_LABEL.to_string()),
            ..CsvOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<AttributeSchema>,
    records: Vec<Vec<Value>>,
}

impl Dataset {
    pub fn new(schema: Vec<AttributeSchema>, records: Vec<Vec<Value>>) -> Result<Self> {
        validate_schema(&schema)?;
        for (i, row) in records.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(Error::InvalidSchema(format!(
                    "row {i} has {} cells, schema has {}",
                    row.len(),
                    schema.len()
                )));
            }
            for (cell, attr) in row.iter().zip(&schema) {
                if !cell.matches_type(attr.data_type) {
                    return Err(Error::Parse {
                        row: i,
                        column: attr.name.clone(),
                        value: cell.label().into_owned(),
                        expected: attr.data_type.to_string(),
                    });
                }
            }
        }
        Ok(Dataset { schema, records })
    }

    pub(crate) fn from_parts_unchecked(schema: Vec<AttributeSchema>, records: Vec<Vec<Value>>) -> Self {
        Dataset { schema, records }
    }

    pub fn schema(&self) -> &[AttributeSchema] {
        &self.schema
    }

    pub fn records(&self) -> &[Vec<Value>] {
        &self.records
    }

    /// Record count `n`.
    pub fn n(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn row(&self, row: usize) -> Result<&[Value]> {
        self.records.get(row).map(Vec::as_slice).ok_or(Error::IndexOutOfRange {
            index: row,
            len: self.n(),
        })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.schema
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn attribute(&self, name: &str) -> Result<&AttributeSchema> {
        self.column_index(name).map(|i| &self.schema[i])
    }

    pub fn column(&self, index: usize) -> impl Iterator<Item = &Value> + '_ {
        self.records.iter().map(move |r| &r[index])
    }

    /// Column positions of the quasi-identifiers, in schema order.
    pub fn qi_indices(&self) -> Vec<usize> {
        self.schema
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_quasi_identifier())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn quasi_identifiers(&self) -> impl Iterator<Item = &AttributeSchema> + '_ {
        self.schema.iter().filter(|a| a.is_quasi_identifier())
    }

    /// The row's cells restricted to quasi-identifiers, in schema order.
    pub fn qi_projection(&self, row: usize) -> Result<Vec<Value>> {
        let cells = self.row(row)?;
        Ok(self
            .schema
            .iter()
            .zip(cells)
            .filter(|(a, _)| a.is_quasi_identifier())
            .map(|(_, v)| v.clone())
            .collect())
    }

    /// Removes every identifier column.
    pub fn drop_identifiers(&self) -> Dataset {
        let keep: Vec<usize> = self
            .schema
            .iter()
            .enumerate()
            .filter(|(_, a)| a.role != AttributeRole::Identifier)
            .map(|(i, _)| i)
            .collect();
        let schema = keep.iter().map(|&i| self.schema[i].clone()).collect();
        let records = self
            .records
            .iter()
            .map(|r| keep.iter().map(|&i| r[i].clone()).collect())
            .collect();
        Dataset { schema, records }
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        let records = rows
            .iter()
            .map(|&r| self.row(r).map(<[Value]>::to_vec))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            schema: self.schema.clone(),
            records,
        })
    }

    /// Hex SHA-256 over schema and cell contents.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for attr in &self.schema {
            hasher.update(attr.name.as_bytes());
            hasher.update([0u8]);
            hasher.update(attr.data_type.to_string().as_bytes());
            hasher.update(format!("{:?}/{}", attr.role, attr.level).as_bytes());
            hasher.update([0xffu8]);
        }
        for row in &self.records {
            for cell in row {
                let tag: u8 = match cell {
                    Value::Missing => 0,
                    Value::Nominal(_) => 1,
                    Value::Ordinal { .. } => 2,
                    Value::Discrete(_) => 3,
                    Value::Continuous(_) => 4,
                    Value::Suppressed => 5,
                };
                hasher.update([tag]);
                hasher.update(cell.label().as_bytes());
                hasher.update([0u8]);
            }
            hasher.update([0xfeu8]);
        }
        hex::encode(hasher.finalize())
    }
}

/// Loads a CSV file whose header must match `schema` names in order.
pub fn load_csv(path: &Path, schema: &[AttributeSchema], options: &CsvOptions) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema, options)
}

pub fn read_csv<R: Read>(reader: R, schema: &[AttributeSchema], options: &CsvOptions) -> Result<Dataset> {
    validate_schema(schema)?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .quote(options.quote)
        .has_headers(true)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    for (i, attr) in schema.iter().enumerate() {
        let found = headers.get(i).unwrap_or("");
        if found.trim() != attr.name {
            return Err(Error::HeaderMismatch {
                column: i,
                expected: attr.name.clone(),
                found: found.to_string(),
            });
        }
    }
    if headers.len() > schema.len() {
        return Err(Error::HeaderMismatch {
            column: schema.len(),
            expected: "<end of header>".into(),
            found: headers[schema.len()].to_string(),
        });
    }

    let mut records = Vec::new();
    for result in rdr.records() {
        let record = result?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let row = schema
            .iter()
            .zip(record.iter())
            .map(|(attr, token)| {
                if token == options.missing_token {
                    return Ok(Value::Missing);
                }
                if options.suppressed_token.as_deref() == Some(token) {
                    return Ok(Value::Suppressed);
                }
                attr.parse_token(token).ok_or_else(|| Error::Parse {
                    row: line,
                    column: attr.name.clone(),
                    value: token.to_string(),
                    expected: attr.data_type.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        records.push(row);
    }
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(Dataset::from_parts_unchecked(schema.to_vec(), records))
}

/// Writes the dataset as CSV. Missing cells use the missing token and
/// suppressed cells are written as `*`.
pub fn write_csv<W: Write>(d: &Dataset, writer: W, options: &CsvOptions) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .delimiter(options.delimiter)
        .quote(options.quote)
        .from_writer(writer);
    wtr.write_record(d.schema().iter().map(|a| a.name.as_str()))?;
    for row in d.records() {
        wtr.write_record(
            row.iter()
                .map(|v| match v {
                    Value::Missing => Cow::Borrowed(options.missing_token.as_str()),
                    Value::Suppressed => Cow::Borrowed(options.suppressed_token.as_deref().unwrap_or(SUPPRESSED_LABEL)),
                    other => other.label(),
                })
                .map(|c| c.into_owned()),
        )?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn to_csv_string(d: &Dataset, options: &CsvOptions) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(d, &mut buf, options)?;
    Ok(String::from_utf8(buf).expect("CSV writer emits UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy_schema() -> Vec<AttributeSchema> {
        vec![
            AttributeSchema::new("mrn", DataType::Discrete, AttributeRole::Identifier),
            AttributeSchema::new("age", DataType::Discrete, AttributeRole::QuasiIdentifier),
            AttributeSchema::new("sex", DataType::Nominal, AttributeRole::QuasiIdentifier),
            AttributeSchema::new("dx", DataType::Nominal, AttributeRole::Sensitive),
        ]
    }

    fn parse(text: &str, schema: &[AttributeSchema]) -> Result<Dataset> {
        read_csv(text.as_bytes(), schema, &CsvOptions::default())
    }

    #[test]
    fn loads_three_rows() {
        let schema = &toy_schema()[1..];
        let d = parse("age,sex,dx\n30,M,flu\n31,F,covid\n30,M,flu\n", schema).unwrap();
        assert_eq!(d.n(), 3);
        assert_eq!(d.records()[1][0], Value::Discrete(31));
        assert_eq!(d.records()[1][1], Value::Nominal("F".into()));
    }

    #[test]
    fn bad_discrete_cell_reports_coordinates() {
        let schema = &toy_schema()[1..];
        let err = parse("age,sex,dx\nabc,M,flu\n", schema).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "age");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_only_is_empty() {
        let schema = &toy_schema()[1..];
        assert!(matches!(parse("age,sex,dx\n", schema), Err(Error::EmptyDataset)));
    }

    #[test]
    fn header_mismatch() {
        let schema = &toy_schema()[1..];
        let err = parse("sex,age,dx\nM,30,flu\n", schema).unwrap_err();
        assert!(matches!(err, Error::HeaderMismatch { column: 0, .. }));
    }

    #[test]
    fn missing_token_parses_to_missing() {
        let schema = &toy_schema()[1..];
        let opts = CsvOptions {
            missing_token: "NA".into(),
            ..CsvOptions::default()
        };
        let d = read_csv("age,sex,dx\nNA,M,\n".as_bytes(), schema, &opts).unwrap();
        assert!(d.records()[0][0].is_missing());
        // empty string is an ordinary nominal label once the token is "NA"
        assert_eq!(d.records()[0][2], Value::Nominal(String::new()));
    }

    #[test]
    fn ordinal_ranks_follow_declared_order() {
        let schema = vec![
            AttributeSchema::new("edu", DataType::Ordinal, AttributeRole::QuasiIdentifier).with_order([
                "primary",
                "secondary",
                "tertiary",
            ]),
        ];
        let d = parse("edu\ntertiary\nprimary\n", &schema).unwrap();
        assert_eq!(
            d.records()[0][0],
            Value::Ordinal {
                label: "tertiary".into(),
                rank: 2
            }
        );
        assert!(parse("edu\nnone\n", &schema).is_err());
    }

    #[test]
    fn proprietary_format_rejected() {
        let text = r#"{"format": "encrypted", "attributes": []}"#;
        assert!(matches!(parse_schema(text), Err(Error::UnsupportedFormat(_))));
        let text = r#"[{"name": "age", "data_type": "discrete", "role": "quasi_identifier"}]"#;
        assert_eq!(parse_schema(text).unwrap().len(), 1);
    }

    #[test]
    fn drop_identifiers_cases() {
        let schema = toy_schema();
        let d = parse("mrn,age,sex,dx\n7,30,M,flu\n8,40,F,flu\n", &schema).unwrap();
        let dropped = d.drop_identifiers();
        assert_eq!(dropped.schema().len(), 3);
        assert_eq!(dropped.schema()[0].name, "age");
        assert_eq!(dropped.n(), 2);
        assert_eq!(dropped.drop_identifiers(), dropped);

        let ids = vec![AttributeSchema::new(
            "mrn",
            DataType::Discrete,
            AttributeRole::Identifier,
        )];
        let d = parse("mrn\n1\n2\n", &ids).unwrap();
        let dropped = d.drop_identifiers();
        assert!(dropped.schema().is_empty());
        assert_eq!(dropped.n(), 2);
        assert!(dropped.records().iter().all(|r| r.is_empty()));
    }

    #[test]
    fn qi_projection_cases() {
        let d = parse("mrn,age,sex,dx\n7,30,M,flu\n", &toy_schema()).unwrap();
        assert_eq!(
            d.qi_projection(0).unwrap(),
            vec![Value::Discrete(30), Value::Nominal("M".into())]
        );
        assert!(matches!(
            d.qi_projection(1),
            Err(Error::IndexOutOfRange { index: 1, len: 1 })
        ));

        let no_qi = vec![AttributeSchema::new("dx", DataType::Nominal, AttributeRole::Sensitive)];
        let d = parse("dx\nflu\n", &no_qi).unwrap();
        assert!(d.qi_projection(0).unwrap().is_empty());
    }

    #[test]
    fn suppressed_equals_only_suppressed() {
        assert_eq!(Value::Suppressed, Value::Suppressed);
        assert_ne!(Value::Suppressed, Value::Nominal("*".into()));
        assert_ne!(Value::Suppressed, Value::Missing);
        assert_eq!(Value::Continuous(0.0), Value::Continuous(-0.0));
    }

    fn token(dt: DataType) -> BoxedStrategy<String> {
        match dt {
            DataType::Nominal => "[a-z]{1,6}".boxed(),
            DataType::Ordinal => prop::sample::select(vec!["low", "mid", "high"])
                .prop_map(str::to_string)
                .boxed(),
            DataType::Discrete => any::<i64>().prop_map(|v| v.to_string()).boxed(),
            DataType::Continuous => (-1.0e9f64..1.0e9).prop_map(|v| v.to_string()).boxed(),
        }
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_token_exact(
            rows in prop::collection::vec(
                (token(DataType::Nominal), token(DataType::Ordinal),
                 token(DataType::Discrete), token(DataType::Continuous)),
                1..20)
        ) {
            let schema = vec![
                AttributeSchema::new("a", DataType::Nominal, AttributeRole::QuasiIdentifier),
                AttributeSchema::new("b", DataType::Ordinal, AttributeRole::QuasiIdentifier)
                    .with_order(["low", "mid", "high"]),
                AttributeSchema::new("c", DataType::Discrete, AttributeRole::Sensitive),
                AttributeSchema::new("d", DataType::Continuous, AttributeRole::Insensitive),
            ];
            let mut text = String::from("a,b,c,d\n");
            for (a, b, c, d) in &rows {
                text.push_str(&format!("{a},{b},{c},{d}\n"));
            }
            let d = parse(&text, &schema).unwrap();
            prop_assert_eq!(to_csv_string(&d, &CsvOptions::default()).unwrap(), text);

            let dropped = d.drop_identifiers();
            prop_assert_eq!(&dropped.drop_identifiers(), &dropped);
            let arity = d.qi_projection(0).unwrap().len();
            for i in 0..d.n() {
                prop_assert_eq!(d.qi_projection(i).unwrap().len(), arity);
            }
        }
    }
}
