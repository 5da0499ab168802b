//! Lattice search over generalization schemes.
//!
//! Each node of the lattice `∏ (L_q + 1)` is a level vector. Evaluating a node
//! generalizes the data, greedily suppresses whole violating classes
//! (smallest first) within the suppression budget, re-checks every
//! constraint and scores the information loss. The best node is the
//! satisfying one with the highest loss score (100 = no loss), ties broken by
//! lower total level and then lexicographic scheme order.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hierarchy::{generalize, GeneralizationScheme, HierarchySet};
use crate::metrics;
use crate::partition::partition;
use crate::privacy::{self, PopulationIndex, PrivacyConstraint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Overall non-uniform entropy of the quasi-identifier tuple.
    Nue,
    Ig,
    /// Mean general granularity over quasi-identifiers.
    GgMean,
    /// NUE, with equal scores resolved in favour of lower average risk.
    NueAvgRrTiebreak,
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nue" => Ok(Objective::Nue),
            "ig" => Ok(Objective::Ig),
            "gg" | "gg-mean" => Ok(Objective::GgMean),
            "avg-rr" | "nue-avg-rr" | "average-rr-tiebreak" => Ok(Objective::NueAvgRrTiebreak),
            other => Err(Error::InvalidParameter(format!("unknown objective `{other}`"))),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Nue => "nue",
            Objective::Ig => "ig",
            Objective::GgMean => "gg-mean",
            Objective::NueAvgRrTiebreak => "nue-avg-rr",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Exhaustive,
    /// Breadth-first by total level; skips strict generalizations of nodes
    /// that already satisfy every constraint when that cannot lose the optimum.
    PrunedBfs,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exhaustive" => Ok(Strategy::Exhaustive),
            "pruned" | "pruned-bfs" => Ok(Strategy::PrunedBfs),
            other => Err(Error::InvalidParameter(format!("unknown strategy `{other}`"))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Exhaustive => "exhaustive",
            Strategy::PrunedBfs => "pruned-bfs",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub constraints: Vec<PrivacyConstraint>,
    /// Largest fraction of records that may be removed, in `[0, 1]`.
    pub suppression_budget: f64,
    pub objective: Objective,
    pub strategy: Strategy,
    /// Parallel node evaluations; results do not depend on it.
    pub workers: usize,
}

impl SearchConfig {
    pub fn new(constraints: Vec<PrivacyConstraint>) -> Self {
        SearchConfig {
            constraints,
            suppression_budget: 0.0,
            objective: Objective::Nue,
            strategy: Strategy::PrunedBfs,
            workers: 1,
        }
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.suppression_budget = budget;
        self
    }

    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.constraints.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one privacy constraint is required".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.suppression_budget) {
            return Err(Error::InvalidParameter(format!(
                "suppression budget must lie in [0, 1], got {}",
                self.suppression_budget
            )));
        }
        Ok(())
    }
}

/// Maximum number of records removable: `⌊budget · n⌋`.
pub fn suppression_limit(budget: f64, n: usize) -> usize {
    // absorb representation error such as 0.3333333333333333 * 3
    (budget * n as f64 + 1e-9).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintOutcome {
    pub constraint: String,
    pub satisfied: bool,
    pub violating_classes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeLosses {
    pub nue: f64,
    pub ig: f64,
    pub gg_mean: f64,
    pub average_rr: f64,
    pub maximum_rr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeNode {
    pub scheme: GeneralizationScheme,
    pub evaluated: bool,
    pub satisfies_all: bool,
    pub verdicts: Vec<ConstraintOutcome>,
    pub loss_score: Option<f64>,
    pub losses: Option<NodeLosses>,
    pub suppressed_rows: usize,
    /// Original row indices removed at this node, ascending.
    #[serde(skip)]
    pub suppressed: Vec<usize>,
    #[serde(skip)]
    dataset_digest: String,
}

impl LatticeNode {
    fn pruned(scheme: GeneralizationScheme, digest: &str) -> Self {
        LatticeNode {
            scheme,
            evaluated: false,
            satisfies_all: false,
            verdicts: Vec::new(),
            loss_score: None,
            losses: None,
            suppressed_rows: 0,
            suppressed: Vec::new(),
            dataset_digest: digest.to_string(),
        }
    }

    /// A node for applying a scheme chosen outside a search.
    pub fn for_scheme(d: &Dataset, scheme: GeneralizationScheme, suppressed: Vec<usize>) -> Self {
        let mut node = LatticeNode::pruned(scheme, &d.digest());
        node.suppressed_rows = suppressed.len();
        node.suppressed = suppressed;
        node
    }

    pub fn dataset_digest(&self) -> &str {
        &self.dataset_digest
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Exploration {
    pub strategy: Strategy,
    pub objective: Objective,
    pub suppression_limit: usize,
    pub lattice_size: usize,
    pub evaluated: usize,
    pub pruned: usize,
    /// Index into `nodes` of the best satisfying node.
    pub best: Option<usize>,
    /// Every lattice node ordered by (total level, scheme).
    pub nodes: Vec<LatticeNode>,
}

impl Exploration {
    pub fn best_node(&self) -> Option<&LatticeNode> {
        self.best.map(|i| &self.nodes[i])
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best: LatticeNode,
    pub exploration: Exploration,
}

/// All level vectors with `0 <= z_q <= bounds[q]`, by total level then lexicographically.
pub fn lattice(bounds: &[usize]) -> Vec<GeneralizationScheme> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for &top in bounds {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=top).map(move |l| {
                    let mut v = prefix.clone();
                    v.push(l);
                    v
                })
            })
            .collect();
    }
    out.sort_by(|a, b| {
        let (ha, hb): (usize, usize) = (a.iter().sum(), b.iter().sum());
        ha.cmp(&hb).then_with(|| a.cmp(b))
    });
    out.into_iter().map(GeneralizationScheme::new).collect()
}

struct Evaluator<'a> {
    d: &'a Dataset,
    hierarchies: &'a HierarchySet,
    cfg: &'a SearchConfig,
    limit: usize,
    digest: String,
    pool: Option<rayon::ThreadPool>,
}

impl Evaluator<'_> {
    fn population_indices(&self, scheme: &GeneralizationScheme) -> Result<Vec<Option<PopulationIndex>>> {
        self.cfg
            .constraints
            .iter()
            .map(|c| match c {
                PrivacyConstraint::DeltaPresence { population, .. } => {
                    PopulationIndex::build(population, self.d.quasi_identifiers(), scheme, self.hierarchies).map(Some)
                }
                _ => Ok(None),
            })
            .collect()
    }

    fn evaluate(&self, scheme: &GeneralizationScheme) -> Result<LatticeNode> {
        let generalized = generalize(self.d, scheme, self.hierarchies)?;
        let populations = self.population_indices(scheme)?;
        let mut kept: Vec<usize> = (0..self.d.n()).collect();
        let mut removed: BTreeSet<usize> = BTreeSet::new();

        let (dz, part, verdicts) = loop {
            let dz = generalized.select_rows(&kept)?;
            let part = partition(&dz);
            let verdicts = self
                .cfg
                .constraints
                .iter()
                .zip(&populations)
                .map(|(c, pop)| privacy::check(c, &part, &dz, pop.as_ref()))
                .collect::<Result<Vec<_>>>()?;

            let violating: BTreeSet<usize> = verdicts
                .iter()
                .flat_map(|v| v.violating_classes.iter().copied())
                .collect();
            if violating.is_empty() {
                break (dz, part, verdicts);
            }
            let mut order: Vec<usize> = violating.into_iter().collect();
            order.sort_by_key(|&c| (part.classes()[c].size(), c));
            let mut drop_local = Vec::new();
            let mut budget_left = self.limit - removed.len();
            let mut remaining = kept.len();
            for c in order {
                let size = part.classes()[c].size();
                // keep at least one record: an empty release satisfies nothing meaningful
                if size > budget_left || size >= remaining {
                    break;
                }
                budget_left -= size;
                remaining -= size;
                drop_local.extend_from_slice(&part.classes()[c].members);
            }
            if drop_local.is_empty() {
                break (dz, part, verdicts);
            }
            let drop_local: BTreeSet<usize> = drop_local.into_iter().collect();
            removed.extend(drop_local.iter().map(|&i| kept[i]));
            kept = kept
                .iter()
                .enumerate()
                .filter(|(i, _)| !drop_local.contains(i))
                .map(|(_, &r)| r)
                .collect();
        };

        let satisfies_all = verdicts.iter().all(|v| v.satisfied);
        let outcomes = self
            .cfg
            .constraints
            .iter()
            .zip(&verdicts)
            .map(|(c, v)| ConstraintOutcome {
                constraint: c.to_string(),
                satisfied: v.satisfied,
                violating_classes: v.violating_classes.len(),
            })
            .collect();

        let original = self.d.select_rows(&kept)?;
        let losses = NodeLosses {
            nue: metrics::nue(&original, &dz, None)?,
            ig: if original.qi_indices().is_empty() {
                100.0
            } else {
                metrics::ig(&original, &dz)?
            },
            gg_mean: metrics::gg_mean(&original, &dz)?,
            average_rr: metrics::average_rr(&part)?,
            maximum_rr: metrics::maximum_rr(&part)?,
        };
        let loss_score = match self.cfg.objective {
            Objective::Nue | Objective::NueAvgRrTiebreak => losses.nue,
            Objective::Ig => losses.ig,
            Objective::GgMean => losses.gg_mean,
        };
        let suppressed: Vec<usize> = removed.into_iter().collect();
        debug_assert!(suppressed.len() <= self.limit);
        Ok(LatticeNode {
            scheme: scheme.clone(),
            evaluated: true,
            satisfies_all,
            verdicts: outcomes,
            loss_score: Some(loss_score),
            losses: Some(losses),
            suppressed_rows: suppressed.len(),
            suppressed,
            dataset_digest: self.digest.clone(),
        })
    }

    fn evaluate_all(&self, schemes: &[GeneralizationScheme]) -> Result<Vec<LatticeNode>> {
        let Some(pool) = self.pool.as_ref().filter(|_| schemes.len() > 1) else {
            return schemes.iter().map(|s| self.evaluate(s)).collect();
        };
        // collect keeps input order, so the result is independent of scheduling
        let results: Vec<Result<LatticeNode>> = pool.install(|| schemes.par_iter().map(|s| self.evaluate(s)).collect());
        results.into_iter().collect()
    }

    /// Whether skipping generalizations of a satisfying node keeps the optimum.
    /// Without suppression every objective here is non-increasing upward; with
    /// suppression losses are measured on different surviving rows, and the
    /// average-risk tie-break favours coarser nodes.
    fn can_prune(&self) -> bool {
        self.limit == 0 && self.cfg.objective != Objective::NueAvgRrTiebreak
    }
}

/// Ordering of satisfying nodes, best first.
fn compare(objective: Objective, a: &LatticeNode, b: &LatticeNode) -> Ordering {
    let score = |n: &LatticeNode| n.loss_score.unwrap_or(f64::NEG_INFINITY);
    let avg = |n: &LatticeNode| n.losses.as_ref().map_or(f64::INFINITY, |l| l.average_rr);
    let mut ord = score(b).total_cmp(&score(a));
    if objective == Objective::NueAvgRrTiebreak {
        ord = ord.then_with(|| avg(a).total_cmp(&avg(b)));
    }
    ord.then_with(|| a.scheme.height().cmp(&b.scheme.height()))
        .then_with(|| a.scheme.cmp(&b.scheme))
}

/// Evaluates the lattice and reports every node, with the best satisfying
/// node if there is one.
pub fn explore(d: &Dataset, hierarchies: &HierarchySet, cfg: &SearchConfig) -> Result<Exploration> {
    cfg.validate()?;
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(a) = d.quasi_identifiers().find(|a| a.level != 0) {
        return Err(Error::InvalidScheme(format!(
            "`{}` is already generalized; search expects original data",
            a.name
        )));
    }
    let bounds = hierarchies.bounds(d)?;
    let evaluator = Evaluator {
        d,
        hierarchies,
        cfg,
        limit: suppression_limit(cfg.suppression_budget, d.n()),
        digest: d.digest(),
        pool: if cfg.workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(cfg.workers)
                    .build()
                    .map_err(|e| Error::InvalidParameter(format!("cannot start workers: {e}")))?,
            )
        } else {
            None
        },
    };
    let schemes = lattice(&bounds);
    let lattice_size = schemes.len();

    let nodes = match cfg.strategy {
        Strategy::Exhaustive => evaluator.evaluate_all(&schemes)?,
        Strategy::PrunedBfs => {
            let prune = evaluator.can_prune();
            let mut nodes: Vec<LatticeNode> = Vec::with_capacity(lattice_size);
            let mut solutions: Vec<GeneralizationScheme> = Vec::new();
            let mut start = 0;
            while start < schemes.len() {
                let height = schemes[start].height();
                let end = schemes[start..]
                    .iter()
                    .position(|s| s.height() != height)
                    .map_or(schemes.len(), |p| start + p);
                let layer = &schemes[start..end];
                let (skip, todo): (Vec<_>, Vec<_>) = layer
                    .iter()
                    .partition(|s| prune && solutions.iter().any(|sol| sol.le(s)));
                let todo: Vec<GeneralizationScheme> = todo.into_iter().cloned().collect();
                let evaluated = evaluator.evaluate_all(&todo)?;
                solutions.extend(evaluated.iter().filter(|n| n.satisfies_all).map(|n| n.scheme.clone()));
                nodes.extend(evaluated);
                nodes.extend(
                    skip.into_iter()
                        .map(|s| LatticeNode::pruned(s.clone(), &evaluator.digest)),
                );
                start = end;
            }
            nodes.sort_by(|a, b| {
                a.scheme
                    .height()
                    .cmp(&b.scheme.height())
                    .then_with(|| a.scheme.cmp(&b.scheme))
            });
            nodes
        }
    };

    let evaluated = nodes.iter().filter(|n| n.evaluated).count();
    let best = nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.evaluated && n.satisfies_all)
        .min_by(|(_, a), (_, b)| compare(cfg.objective, a, b))
        .map(|(i, _)| i);
    Ok(Exploration {
        strategy: cfg.strategy,
        objective: cfg.objective,
        suppression_limit: evaluator.limit,
        lattice_size,
        evaluated,
        pruned: lattice_size - evaluated,
        best,
        nodes,
    })
}

/// Finds the best satisfying node or fails with `NoSolution`.
pub fn search(d: &Dataset, hierarchies: &HierarchySet, cfg: &SearchConfig) -> Result<SearchOutcome> {
    let exploration = explore(d, hierarchies, cfg)?;
    match exploration.best_node() {
        Some(best) => Ok(SearchOutcome {
            best: best.clone(),
            exploration,
        }),
        None => Err(Error::NoSolution {
            evaluated: exploration.evaluated,
        }),
    }
}

#[derive(Debug, Clone)]
pub struct Applied {
    pub dataset: Dataset,
    /// Original indices of the removed records, ascending.
    pub suppressed: Vec<usize>,
}

/// Replays a node's transformation on the dataset it was found for.
pub fn apply(d: &Dataset, node: &LatticeNode, hierarchies: &HierarchySet) -> Result<Applied> {
    if node.dataset_digest != d.digest() {
        return Err(Error::StaleNode);
    }
    let generalized = generalize(d, &node.scheme, hierarchies)?;
    let removed: BTreeSet<usize> = node.suppressed.iter().copied().collect();
    let dataset = crate::hierarchy::suppress_records(&generalized, &removed)?;
    Ok(Applied {
        dataset,
        suppressed: removed.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AttributeRole, AttributeSchema, DataType, Value};
    use crate::hierarchy::{Bin, Hierarchy};

    fn ages(values: &[i64]) -> Dataset {
        let schema = vec![AttributeSchema::new(
            "age",
            DataType::Discrete,
            AttributeRole::QuasiIdentifier,
        )];
        Dataset::new(schema, values.iter().map(|&v| vec![Value::Discrete(v)]).collect()).unwrap()
    }

    fn decades() -> HierarchySet {
        let bins = (0..10)
            .map(|i| {
                Bin::new(
                    i as f64 * 10.0,
                    i as f64 * 10.0 + 10.0,
                    format!("{}-{}", i * 10, i * 10 + 9),
                )
            })
            .collect();
        [Hierarchy::interval("age", vec![bins]).unwrap()].into_iter().collect()
    }

    fn k(k: usize) -> Vec<PrivacyConstraint> {
        vec![PrivacyConstraint::k_anonymity(k).unwrap()]
    }

    #[test]
    fn lattice_order() {
        let l: Vec<String> = lattice(&[1, 2]).iter().map(|s| s.to_string()).collect();
        assert_eq!(l, ["(0,0)", "(0,1)", "(1,0)", "(0,2)", "(1,1)", "(1,2)"]);
        assert_eq!(lattice(&[]).len(), 1);
    }

    #[test]
    fn decade_example() {
        // level 0 has a singleton 31; level 1 puts all three in 30-39
        let d = ages(&[30, 31, 30]);
        for strategy in [Strategy::Exhaustive, Strategy::PrunedBfs] {
            let cfg = SearchConfig::new(k(2)).with_strategy(strategy);
            let out = search(&d, &decades(), &cfg).unwrap();
            assert_eq!(out.best.scheme.levels(), &[1]);
            let applied = apply(&d, &out.best, &decades()).unwrap();
            assert_eq!(applied.dataset.n(), 3);
            assert!(applied
                .dataset
                .records()
                .iter()
                .all(|r| r[0] == Value::Nominal("30-39".into())));
        }
        let ex = explore(&d, &decades(), &SearchConfig::new(k(2))).unwrap();
        assert!(!ex.nodes[0].satisfies_all);
        // (2) is a strict generalization of the solution (1)
        assert!(!ex.nodes[2].evaluated);
    }

    #[test]
    fn k_one_keeps_identity() {
        let d = ages(&[30, 31, 77]);
        let out = search(&d, &decades(), &SearchConfig::new(k(1))).unwrap();
        assert_eq!(out.best.scheme.levels(), &[0]);
        assert_eq!(out.best.loss_score, Some(100.0));
        let applied = apply(&d, &out.best, &decades()).unwrap();
        assert_eq!(applied.dataset, d);
    }

    #[test]
    fn k_above_n() {
        let d = ages(&[30, 31, 77]);
        let out = search(&d, &decades(), &SearchConfig::new(k(3))).unwrap();
        assert_eq!(out.best.scheme.levels(), &[2]);
        assert!(matches!(
            search(&d, &decades(), &SearchConfig::new(k(4))),
            Err(Error::NoSolution { .. })
        ));
    }

    #[test]
    fn suppression_beats_generalization_on_gg() {
        let d = ages(&[30, 30, 77]);
        let cfg = SearchConfig::new(k(2))
            .with_budget(1.0 / 3.0)
            .with_objective(Objective::GgMean);
        let out = search(&d, &decades(), &cfg).unwrap();
        assert_eq!(out.best.scheme.levels(), &[0]);
        assert_eq!(out.best.suppressed, vec![2]);
        let applied = apply(&d, &out.best, &decades()).unwrap();
        assert_eq!(applied.dataset.n(), 2);
        assert_eq!(applied.suppressed, vec![2]);

        let none = search(
            &d,
            &decades(),
            &SearchConfig::new(k(2)).with_objective(Objective::GgMean),
        )
        .unwrap();
        assert_eq!(none.best.scheme.levels(), &[2]);
        assert_eq!(none.best.suppressed_rows, 0);
    }

    #[test]
    fn stale_node_rejected() {
        let d = ages(&[30, 31, 30]);
        let out = search(&d, &decades(), &SearchConfig::new(k(2))).unwrap();
        assert!(matches!(
            apply(&ages(&[30, 31, 31]), &out.best, &decades()),
            Err(Error::StaleNode)
        ));
    }

    #[test]
    fn config_errors() {
        let d = ages(&[30]);
        assert!(matches!(
            explore(&d, &decades(), &SearchConfig::new(Vec::new())),
            Err(Error::InvalidParameter(_))
        ));
        assert!(explore(&d, &decades(), &SearchConfig::new(k(1)).with_budget(1.5)).is_err());
        assert!(matches!(
            explore(&d, &HierarchySet::new(), &SearchConfig::new(k(1))),
            Err(Error::MissingHierarchy(_))
        ));
    }

    #[test]
    fn limit_floor() {
        assert_eq!(suppression_limit(1.0 / 3.0, 3), 1);
        assert_eq!(suppression_limit(0.0, 100), 0);
        assert_eq!(suppression_limit(0.1, 25), 2);
        assert_eq!(suppression_limit(1.0, 7), 7);
    }

    #[test]
    fn workers_do_not_change_result() {
        let values: Vec<i64> = (0..40).map(|i| (i * 37 % 90) as i64).collect();
        let d = ages(&values);
        let base = explore(&d, &decades(), &SearchConfig::new(k(3)).with_budget(0.1)).unwrap();
        let par = explore(
            &d,
            &decades(),
            &SearchConfig::new(k(3)).with_budget(0.1).with_workers(4),
        )
        .unwrap();
        assert_eq!(base.nodes, par.nodes);
        assert_eq!(base.best, par.best);
    }
}
