//! Equivalence classes over quasi-identifier projections.

use std::collections::HashMap;

use crate::dataset::{Dataset, Value};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceClass {
    pub key: Vec<Value>,
    pub members: Vec<usize>,
}

impl EquivalenceClass {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Decomposition `D = E1 ∪ ... ∪ Ej`. Classes are ordered by the index of
/// their first member.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    classes: Vec<EquivalenceClass>,
    class_of_row: Vec<usize>,
}

impl Partition {
    pub fn classes(&self) -> &[EquivalenceClass] {
        &self.classes
    }

    /// Number of classes `j`.
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Number of rows `n` the partition was built from.
    pub fn n(&self) -> usize {
        self.class_of_row.len()
    }

    pub fn class_of(&self, row: usize) -> Result<usize> {
        self.class_of_row.get(row).copied().ok_or(Error::IndexOutOfRange {
            index: row,
            len: self.n(),
        })
    }

    /// Equivalence-class size of the row's class.
    pub fn ces(&self, row: usize) -> Result<usize> {
        self.class_of(row).map(|c| self.classes[c].size())
    }

    pub fn min_ces(&self) -> Result<usize> {
        self.classes
            .iter()
            .map(EquivalenceClass::size)
            .min()
            .ok_or(Error::EmptyDataset)
    }

    /// CES of every row, in row order.
    pub fn ces_per_row(&self) -> Vec<usize> {
        self.class_of_row.iter().map(|&c| self.classes[c].size()).collect()
    }
}

/// Partitions `d` on its quasi-identifiers.
pub fn partition(d: &Dataset) -> Partition {
    partition_by(d, &d.qi_indices())
}

/// Partitions `d` on an arbitrary column subset. An empty subset yields one
/// class holding every row.
pub fn partition_by(d: &Dataset, columns: &[usize]) -> Partition {
    let mut lookup: HashMap<Vec<&Value>, usize> = HashMap::new();
    let mut classes: Vec<EquivalenceClass> = Vec::new();
    let mut class_of_row = Vec::with_capacity(d.n());
    for (i, row) in d.records().iter().enumerate() {
        let key: Vec<&Value> = columns.iter().map(|&c| &row[c]).collect();
        let next = classes.len();
        let c = *lookup.entry(key).or_insert(next);
        if c == next {
            classes.push(EquivalenceClass {
                key: columns.iter().map(|&col| row[col].clone()).collect(),
                members: Vec::new(),
            });
        }
        classes[c].members.push(i);
        class_of_row.push(c);
    }
    Partition { classes, class_of_row }
}
