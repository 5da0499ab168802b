//! Knowledge graph of anonymization concepts and study-plan validation.
//!
//! The graph is a flat triple store. Nodes are either classes or instances of
//! a class; classes are related by `subclass-of`. Every other property has a
//! domain and range class that both endpoints must fall under.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("../data/knowledge.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    HasPreparation,
    HasMeasure,
    HasImpact,
    Mitigates,
    Threatens,
    SubclassOf,
}

impl Property {
    pub const ALL: [Property; 6] = [
        Property::HasPreparation,
        Property::HasMeasure,
        Property::HasImpact,
        Property::Mitigates,
        Property::Threatens,
        Property::SubclassOf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::HasPreparation => "has-preparation",
            Property::HasMeasure => "has-measure",
            Property::HasImpact => "has-impact",
            Property::Mitigates => "mitigates",
            Property::Threatens => "threatens",
            Property::SubclassOf => "subclass-of",
        }
    }

    /// Domain and range classes; `None` for `subclass-of`, which relates classes.
    pub fn signature(self) -> Option<(&'static str, &'static str)> {
        match self {
            Property::HasPreparation => Some(("privacy-model", "preparation-technique")),
            Property::HasMeasure => Some(("data-type", "information-metric")),
            Property::HasImpact => Some(("information-metric", "use-type")),
            Property::Mitigates => Some(("privacy-model", "risk-type")),
            Property::Threatens => Some(("attack-type", "risk-type")),
            Property::SubclassOf => None,
        }
    }

    pub fn parse(name: &str) -> Option<Property> {
        let n = normalize(name);
        Property::ALL.into_iter().find(|p| p.name() == n)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Class,
    #[default]
    Instance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "is_instance")]
    pub kind: NodeKind,
    /// Class of an instance node.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default)]
    pub definition: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    /// Why a preparation technique is outside the engine's treatment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excluded: Option<String>,
    /// Why a privacy method is not considered anonymization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub not_anonymization: Option<String>,
}

fn is_instance(k: &NodeKind) -> bool {
    *k == NodeKind::Instance
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub subject: String,
    pub property: Property,
    pub object: String,
    /// Interpretation rather than a property stated with the class lists.
    pub editorial: bool,
}

impl Serialize for Edge {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let triple = (&self.subject, self.property.name(), &self.object);
        if self.editorial {
            #[derive(Serialize)]
            struct Annotated<'a> {
                edge: (&'a String, &'a str, &'a String),
                editorial: bool,
            }
            Annotated {
                edge: triple,
                editorial: true,
            }
            .serialize(serializer)
        } else {
            triple.serialize(serializer)
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EdgeSpec {
    Triple(String, String, String),
    Annotated {
        edge: (String, String, String),
        #[serde(default)]
        editorial: bool,
    },
}

impl EdgeSpec {
    fn into_parts(self) -> ((String, String, String), bool) {
        match self {
            EdgeSpec::Triple(s, p, o) => ((s, p, o), false),
            EdgeSpec::Annotated { edge, editorial } => (edge, editorial),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KnowledgeFile {
    #[serde(default)]
    version: Option<String>,
    #[serde(default)]
    note: Option<String>,
    #[serde(default)]
    nodes: Vec<Node>,
    #[serde(default)]
    edges: Vec<EdgeSpec>,
    #[serde(default)]
    remove_edges: Vec<EdgeSpec>,
}

fn normalize(name: &str) -> String {
    name.split(|c: char| c.is_whitespace() || c == '_')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("-")
        .to_lowercase()
}

#[derive(Debug, Clone, Default)]
pub struct OntologyGraph {
    version: String,
    note: Option<String>,
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    names: HashMap<String, usize>,
    edges: Vec<Edge>,
}

/// The shipped graph.
pub fn builtin_graph() -> OntologyGraph {
    OntologyGraph::from_json(BUILTIN, "builtin knowledge file").expect("builtin knowledge file is valid")
}

impl OntologyGraph {
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let mut g = OntologyGraph::default();
        g.merge_json(text, context)?;
        Ok(g)
    }

    /// Merges an override file: nodes are inserted or replaced by id, listed
    /// edges added and `remove_edges` deleted. The result is re-validated.
    pub fn merge_json(&mut self, text: &str, context: &str) -> Result<()> {
        let file: KnowledgeFile = serde_json::from_str(text).map_err(|e| Error::json(context, e))?;
        let mut next = self.clone();
        if let Some(v) = file.version {
            next.version = v;
        }
        if file.note.is_some() {
            next.note = file.note;
        }
        for node in file.nodes {
            next.upsert(node)?;
        }
        next.reindex()?;
        for entry in file.remove_edges {
            let ((s, p, o), _) = entry.into_parts();
            let (s, p, o) = next.resolve_triple(&s, &p, &o)?;
            next.edges
                .retain(|e| !(e.subject == s && e.property == p && e.object == o));
        }
        for entry in file.edges {
            let ((s, p, o), editorial) = entry.into_parts();
            let (s, p, o) = next.resolve_triple(&s, &p, &o)?;
            if !next
                .edges
                .iter()
                .any(|e| e.subject == s && e.property == p && e.object == o)
            {
                next.edges.push(Edge {
                    subject: s,
                    property: p,
                    object: o,
                    editorial,
                });
            }
        }
        next.validate()?;
        *self = next;
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.merge_json(&text, &path.display().to_string())
    }

    fn upsert(&mut self, node: Node) -> Result<()> {
        if node.id.is_empty() || normalize(&node.id) != node.id {
            return Err(Error::InvalidGraph(format!(
                "node id `{}` must be lowercase kebab-case",
                node.id
            )));
        }
        match self.nodes.iter_mut().find(|n| n.id == node.id) {
            Some(existing) => *existing = node,
            None => self.nodes.push(node),
        }
        Ok(())
    }

    fn reindex(&mut self) -> Result<()> {
        self.index = self.nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();
        self.names.clear();
        for (i, n) in self.nodes.iter().enumerate() {
            self.names.insert(n.id.clone(), i);
        }
        for (i, n) in self.nodes.iter().enumerate() {
            for name in std::iter::once(&n.label).chain(&n.aliases) {
                let key = normalize(name);
                match self.names.get(&key) {
                    Some(&j) if j != i => {
                        return Err(Error::InvalidGraph(format!(
                            "name `{name}` refers to both `{}` and `{}`",
                            self.nodes[j].id, n.id
                        )))
                    }
                    _ => {
                        self.names.insert(key, i);
                    }
                }
            }
        }
        Ok(())
    }

    fn resolve_triple(&self, s: &str, p: &str, o: &str) -> Result<(String, Property, String)> {
        let property = Property::parse(p).ok_or_else(|| Error::UnknownProperty {
            subject: s.to_string(),
            property: p.to_string(),
            reason: "not a known property".into(),
        })?;
        Ok((self.node(s)?.id.clone(), property, self.node(o)?.id.clone()))
    }

    /// Checks closure, class references, acyclic subclassing and every
    /// property signature.
    pub fn validate(&self) -> Result<()> {
        for n in &self.nodes {
            match (n.kind, &n.class) {
                (NodeKind::Instance, None) => {
                    return Err(Error::InvalidGraph(format!("instance `{}` has no class", n.id)))
                }
                (NodeKind::Instance, Some(c)) => match self.index.get(c) {
                    Some(&i) if self.nodes[i].kind == NodeKind::Class => {}
                    _ => {
                        return Err(Error::InvalidGraph(format!(
                            "`{}` is declared an instance of `{c}`, which is not a class",
                            n.id
                        )))
                    }
                },
                (NodeKind::Class, Some(_)) => {
                    return Err(Error::InvalidGraph(format!(
                        "class `{}` must use subclass-of instead of a class field",
                        n.id
                    )))
                }
                (NodeKind::Class, None) => {}
            }
        }
        for e in &self.edges {
            let (Some(&s), Some(&o)) = (self.index.get(&e.subject), self.index.get(&e.object)) else {
                return Err(Error::InvalidGraph(format!("dangling edge {}", self.describe(e))));
            };
            let (s, o) = (&self.nodes[s], &self.nodes[o]);
            match e.property.signature() {
                None => {
                    if s.kind != NodeKind::Class || o.kind != NodeKind::Class {
                        return Err(Error::InvalidGraph(format!(
                            "subclass-of must relate two classes: {}",
                            self.describe(e)
                        )));
                    }
                }
                Some((domain, range)) => {
                    if !self.is_a(&s.id, domain) || !self.is_a(&o.id, range) {
                        return Err(Error::InvalidGraph(format!(
                            "{} violates {} ({domain}, {range})",
                            self.describe(e),
                            e.property
                        )));
                    }
                }
            }
        }
        for n in self.nodes.iter().filter(|n| n.kind == NodeKind::Class) {
            if self.superclasses(&n.id).iter().skip(1).any(|c| *c == n.id) {
                return Err(Error::InvalidGraph(format!("subclass cycle through `{}`", n.id)));
            }
        }
        Ok(())
    }

    fn describe(&self, e: &Edge) -> String {
        format!("({}, {}, {})", e.subject, e.property, e.object)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Looks a node up by id, label or alias, ignoring case and spacing.
    pub fn node(&self, name: &str) -> Result<&Node> {
        self.names
            .get(&normalize(name))
            .map(|&i| &self.nodes[i])
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn label<'a>(&'a self, id: &'a str) -> &'a str {
        self.index.get(id).map_or(id, |&i| &self.nodes[i].label)
    }

    /// The class itself followed by its ancestors, breadth-first.
    fn superclasses(&self, class: &str) -> Vec<String> {
        let mut out = vec![class.to_string()];
        let mut i = 0;
        while i < out.len() && out.len() <= self.nodes.len() + 1 {
            let current = out[i].clone();
            for e in &self.edges {
                if e.property == Property::SubclassOf && e.subject == current {
                    out.push(e.object.clone());
                }
            }
            i += 1;
        }
        out
    }

    /// Whether node `id` is `class`, a subclass of it, or an instance of either.
    pub fn is_a(&self, id: &str, class: &str) -> bool {
        let Some(&i) = self.index.get(id) else {
            return false;
        };
        let n = &self.nodes[i];
        let start = match n.kind {
            NodeKind::Class => n.id.as_str(),
            NodeKind::Instance => match &n.class {
                Some(c) => c.as_str(),
                None => return false,
            },
        };
        self.superclasses(start).iter().any(|c| c == class)
    }

    fn objects(&self, subject: &str, property: Property) -> Vec<&str> {
        self.edges
            .iter()
            .filter(|e| e.subject == subject && e.property == property)
            .map(|e| e.object.as_str())
            .collect()
    }

    /// Objects of `(subject, property, ?)` in insertion order.
    pub fn query(&self, subject: &str, property: &str) -> Result<Vec<&Node>> {
        let node = self.node(subject)?;
        let p = Property::parse(property).ok_or_else(|| Error::UnknownProperty {
            subject: subject.to_string(),
            property: property.to_string(),
            reason: format!("known properties are {}", Property::ALL.map(Property::name).join(", ")),
        })?;
        // a concept outside every domain simply has no such edges; one that
        // belongs to another property's domain is asked the wrong question
        let in_domain = |p: Property| match p.signature() {
            Some((domain, _)) => self.is_a(&node.id, domain),
            None => node.kind == NodeKind::Class,
        };
        let has_any = Property::ALL
            .into_iter()
            .any(|q| q != Property::SubclassOf && in_domain(q));
        if !in_domain(p) && has_any {
            let domain = p.signature().map_or("class", |(d, _)| d);
            return Err(Error::UnknownProperty {
                subject: node.label.clone(),
                property: p.name().to_string(),
                reason: format!(
                    "its domain is {domain}, but `{}` is a {}",
                    node.id,
                    self.class_name(node)
                ),
            });
        }
        Ok(self
            .objects(&node.id, p)
            .into_iter()
            .map(|o| &self.nodes[self.index[o]])
            .collect())
    }

    fn class_name(&self, node: &Node) -> String {
        match node.kind {
            NodeKind::Class => "class".into(),
            NodeKind::Instance => node.class.clone().unwrap_or_default(),
        }
    }

    /// Renders `Subject <property> Object`, braces for several objects.
    pub fn render(&self, subject: &str, property: &str) -> Result<String> {
        let subj = self.node(subject)?.label.clone();
        let objects = self.query(subject, property)?;
        let p = Property::parse(property).expect("query validated the property");
        let rhs = match objects.as_slice() {
            [one] => one.label.clone(),
            many => format!(
                "{{{}}}",
                many.iter().map(|n| n.label.as_str()).collect::<Vec<_>>().join(", ")
            ),
        };
        Ok(format!("{subj} <{p}> {rhs}"))
    }

    fn render_edge(&self, subject: &str, property: Property, object: &str) -> String {
        format!("{} <{}> {}", self.label(subject), property, self.label(object))
    }

    /// Canonical JSON form; identical graphs give identical bytes.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            version: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            note: Option<&'a str>,
            nodes: &'a [Node],
            edges: &'a [Edge],
        }
        let mut s = serde_json::to_string_pretty(&Out {
            version: &self.version,
            note: self.note.as_deref(),
            nodes: &self.nodes,
            edges: &self.edges,
        })
        .expect("graph serializes");
        s.push('\n');
        s
    }

    /// Names closest to `term`, best first.
    pub fn suggest(&self, term: &str, limit: usize) -> Vec<String> {
        let t = normalize(term);
        let mut scored: Vec<(f64, &str)> = self
            .nodes
            .iter()
            .map(|n| {
                let best = std::iter::once(&n.id)
                    .chain(std::iter::once(&n.label))
                    .chain(&n.aliases)
                    .map(|name| strsim::jaro_winkler(&t, &normalize(name)))
                    .fold(0.0, f64::max);
                (best, n.id.as_str())
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        scored.into_iter().take(limit).map(|(_, id)| id.to_string()).collect()
    }

    pub fn explain(&self, term: &str) -> Explanation {
        let Ok(node) = self.node(term) else {
            return Explanation::Unknown {
                term: term.to_string(),
                suggestions: self.suggest(term, 5),
            };
        };
        let mut outgoing: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut incoming: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for e in &self.edges {
            if e.subject == node.id {
                outgoing
                    .entry(e.property.name().to_string())
                    .or_default()
                    .push(self.label(&e.object).to_string());
            }
            if e.object == node.id {
                incoming
                    .entry(e.property.name().to_string())
                    .or_default()
                    .push(self.label(&e.subject).to_string());
            }
        }
        let rendered = Property::ALL
            .into_iter()
            .filter(|p| outgoing.contains_key(p.name()))
            .map(|p| self.render(&node.id, p.name()).expect("edge exists"))
            .collect();
        Explanation::Known {
            id: node.id.clone(),
            label: node.label.clone(),
            class: self.class_name(node),
            definition: node.definition.clone(),
            aliases: node.aliases.clone(),
            not_anonymization: node.not_anonymization.clone(),
            excluded: node.excluded.clone(),
            outgoing,
            incoming,
            rendered,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Explanation {
    Known {
        id: String,
        label: String,
        class: String,
        definition: String,
        aliases: Vec<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        not_anonymization: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        excluded: Option<String>,
        outgoing: BTreeMap<String, Vec<String>>,
        incoming: BTreeMap<String, Vec<String>>,
        rendered: Vec<String>,
    },
    Unknown {
        term: String,
        suggestions: Vec<String>,
    },
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Explanation::Known {
                id,
                label,
                class,
                definition,
                aliases,
                not_anonymization,
                excluded,
                rendered,
                ..
            } => {
                writeln!(f, "{label} [{id}] ({class})")?;
                writeln!(f, "  {definition}")?;
                if !aliases.is_empty() {
                    writeln!(f, "  aliases: {}", aliases.join(", "))?;
                }
                if let Some(r) = not_anonymization {
                    writeln!(f, "  not an anonymization method: {r}")?;
                }
                if let Some(r) = excluded {
                    writeln!(f, "  excluded: {r}")?;
                }
                for line in rendered {
                    writeln!(f, "  {line}")?;
                }
                Ok(())
            }
            Explanation::Unknown { term, suggestions } => {
                writeln!(f, "unknown term `{term}`; did you mean: {}?", suggestions.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlanModel {
    Name(String),
    WithParameters {
        model: String,
        #[serde(default)]
        parameters: BTreeMap<String, serde_json::Value>,
    },
}

impl PlanModel {
    pub fn name(&self) -> &str {
        match self {
            PlanModel::Name(n) => n,
            PlanModel::WithParameters { model, .. } => model,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyPlan {
    pub study_design: String,
    pub use_type: String,
    #[serde(default)]
    pub data_types: Vec<String>,
    /// Attribute name to attribute type.
    #[serde(default)]
    pub attribute_roles: BTreeMap<String, String>,
    pub risk_target: String,
    #[serde(default)]
    pub attack_models: Vec<String>,
    pub privacy_models: Vec<PlanModel>,
    #[serde(default)]
    pub preparation_techniques: Vec<String>,
    #[serde(default)]
    pub metrics: Vec<String>,
}

impl StudyPlan {
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json(context, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: char,
    pub name: &'static str,
    pub passed: bool,
    pub explanation: String,
    /// Edges that support the verdict, rendered `Subject <property> Object`.
    pub edges_consulted: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "[{mark}] ({}) {}: {}", c.id, c.name, c.explanation)?;
            for e in &c.edges_consulted {
                writeln!(f, "       {e}")?;
            }
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        writeln!(
            f,
            "{}",
            if self.passed {
                "plan is valid"
            } else {
                "plan is invalid"
            }
        )
    }
}

/// A plan term resolved to its node, or an out-of-scope node kept for a
/// failing check instead of an error.
struct Resolved<'g> {
    nodes: Vec<&'g Node>,
    rejected: Vec<(String, String)>,
}

impl OntologyGraph {
    fn resolve_as(&self, name: &str, class: &str) -> Result<&Node> {
        let node = self.node(name)?;
        if self.is_a(&node.id, class) {
            Ok(node)
        } else {
            Err(Error::WrongClass {
                name: name.to_string(),
                expected: class.to_string(),
                found: self.class_name(node),
            })
        }
    }

    fn resolve_all<'g, S: AsRef<str>>(&'g self, names: &[S], class: &str) -> Result<Resolved<'g>> {
        let mut out = Resolved {
            nodes: Vec::new(),
            rejected: Vec::new(),
        };
        for name in names {
            let name = name.as_ref();
            let node = self.node(name)?;
            if let Some(reason) = &node.not_anonymization {
                out.rejected.push((
                    name.to_string(),
                    format!("{} is not considered an anonymization method: {reason}", node.label),
                ));
                continue;
            }
            out.nodes.push(self.resolve_as(name, class)?);
        }
        Ok(out)
    }

    /// Checks a study plan against the graph.
    ///
    /// (a) every privacy model mitigates the risk target; (b) every attack
    /// threatens a risk some model mitigates; (c) every technique is a
    /// has-preparation object of some model; (d) every metric is a risk
    /// metric or a has-measure object of a declared data type; (e) the use
    /// type is a has-impact object of some chosen loss metric.
    pub fn validate_plan(&self, plan: &StudyPlan) -> Result<ValidationReport> {
        let mut warnings = Vec::new();
        match self.node(&plan.study_design) {
            Ok(n) if self.is_a(&n.id, "study-design") => {}
            _ => warnings.push(format!(
                "study design `{}` is not one of the observational designs listed; anonymization may be unfeasible",
                plan.study_design
            )),
        }
        let use_type = self.resolve_as(&plan.use_type, "use-type")?;
        let data_types = self.resolve_all(&plan.data_types, "data-type")?;
        for role in plan.attribute_roles.values() {
            self.resolve_as(role, "attribute-type")?;
        }
        let risk = self.resolve_as(&plan.risk_target, "risk-type")?;
        let attacks = self.resolve_all(&plan.attack_models, "attack-type")?;
        let model_names: Vec<&str> = plan.privacy_models.iter().map(PlanModel::name).collect();
        let models = self.resolve_all(&model_names, "privacy-model")?;
        let techniques = self.resolve_all(&plan.preparation_techniques, "preparation-technique")?;
        let metrics = self.resolve_all(&plan.metrics, "information-metric")?;
        if plan.privacy_models.is_empty() {
            warnings.push("plan selects no privacy model".into());
        }
        let mut rejected: Vec<(String, String)> = Vec::new();
        for r in [&data_types, &attacks, &metrics] {
            rejected.extend(r.rejected.iter().cloned());
        }

        let mut checks = Vec::new();

        // (a)
        let mut consulted = Vec::new();
        let mut failures: Vec<String> = models.rejected.iter().map(|(_, why)| why.clone()).collect();
        for m in &models.nodes {
            let mitigated = self.objects(&m.id, Property::Mitigates);
            if mitigated.contains(&risk.id.as_str()) {
                consulted.push(self.render_edge(&m.id, Property::Mitigates, &risk.id));
            } else {
                let what = if mitigated.is_empty() {
                    "nothing".to_string()
                } else {
                    mitigated.iter().map(|o| self.label(o)).collect::<Vec<_>>().join(", ")
                };
                failures.push(format!("{} mitigates {what}, not {}", m.label, risk.label));
            }
        }
        checks.push(conclude(
            'a',
            "models mitigate the risk target",
            failures,
            consulted,
            || format!("every privacy model mitigates {}", risk.label),
        ));

        // (b)
        let mitigated: Vec<(&str, &str)> = models
            .nodes
            .iter()
            .flat_map(|m| {
                self.objects(&m.id, Property::Mitigates)
                    .into_iter()
                    .map(move |r| (m.id.as_str(), r))
            })
            .collect();
        let mut consulted = Vec::new();
        let mut failures = Vec::new();
        for a in &attacks.nodes {
            let threatened = self.objects(&a.id, Property::Threatens);
            let hit = threatened
                .iter()
                .find_map(|r| mitigated.iter().find(|(_, mr)| mr == r).map(|(m, _)| (*r, *m)));
            match hit {
                Some((r, m)) => {
                    consulted.push(self.render_edge(&a.id, Property::Threatens, r));
                    consulted.push(self.render_edge(m, Property::Mitigates, r));
                }
                None => failures.push(format!("{} threatens no risk mitigated by the chosen models", a.label)),
            }
        }
        checks.push(conclude('b', "attacks are countered", failures, consulted, || {
            if attacks.nodes.is_empty() {
                "no attack model declared".into()
            } else {
                "every attack model threatens a mitigated risk".into()
            }
        }));

        // (c)
        let mut consulted = Vec::new();
        let mut failures: Vec<String> = techniques.rejected.iter().map(|(_, why)| why.clone()).collect();
        for t in &techniques.nodes {
            let from = models
                .nodes
                .iter()
                .find(|m| self.objects(&m.id, Property::HasPreparation).contains(&t.id.as_str()));
            match from {
                Some(m) => consulted.push(self.render_edge(&m.id, Property::HasPreparation, &t.id)),
                None => {
                    let mut msg = format!("no chosen privacy model has-preparation {}", t.label);
                    if let Some(reason) = &t.excluded {
                        msg.push_str(&format!(" ({} is excluded: {reason})", t.label));
                    }
                    failures.push(msg);
                }
            }
        }
        checks.push(conclude(
            'c',
            "techniques are prepared by a model",
            failures,
            consulted,
            || "every technique is a preparation of a chosen model".into(),
        ));

        // (d)
        let mut consulted = Vec::new();
        let mut failures: Vec<String> = metrics.rejected.iter().map(|(_, why)| why.clone()).collect();
        failures.extend(data_types.rejected.iter().map(|(_, why)| why.clone()));
        for m in &metrics.nodes {
            if self.is_a(&m.id, "risk-metric") {
                consulted.push(format!("{} is a risk metric", m.label));
                continue;
            }
            let from = data_types
                .nodes
                .iter()
                .find(|dt| self.objects(&dt.id, Property::HasMeasure).contains(&m.id.as_str()));
            match from {
                Some(dt) => consulted.push(self.render_edge(&dt.id, Property::HasMeasure, &m.id)),
                None => failures.push(format!(
                    "{} is not a risk metric and no declared data type has-measure it",
                    m.label
                )),
            }
        }
        checks.push(conclude('d', "metrics fit the data types", failures, consulted, || {
            "every metric is a risk metric or measures a declared data type".into()
        }));

        // (e)
        let loss: Vec<&&Node> = metrics
            .nodes
            .iter()
            .filter(|m| !self.is_a(&m.id, "risk-metric"))
            .collect();
        let check_e = if loss.is_empty() {
            CheckResult {
                id: 'e',
                name: "use type is impacted by a metric",
                passed: true,
                explanation: format!("no loss metric chosen, so no impact on {} is claimed", use_type.label),
                edges_consulted: Vec::new(),
            }
        } else {
            match loss
                .iter()
                .find(|m| self.objects(&m.id, Property::HasImpact).contains(&use_type.id.as_str()))
            {
                Some(m) => CheckResult {
                    id: 'e',
                    name: "use type is impacted by a metric",
                    passed: true,
                    explanation: format!("{} has-impact {}", m.label, use_type.label),
                    edges_consulted: vec![self.render_edge(&m.id, Property::HasImpact, &use_type.id)],
                },
                None => CheckResult {
                    id: 'e',
                    name: "use type is impacted by a metric",
                    passed: false,
                    explanation: format!("no chosen loss metric has-impact {}", use_type.label),
                    edges_consulted: Vec::new(),
                },
            }
        };
        checks.push(check_e);

        for (name, why) in rejected {
            warnings.push(format!("`{name}`: {why}"));
        }
        Ok(ValidationReport {
            passed: checks.iter().all(|c| c.passed),
            checks,
            warnings,
        })
    }
}

fn conclude(
    id: char,
    name: &'static str,
    failures: Vec<String>,
    edges_consulted: Vec<String>,
    ok: impl FnOnce() -> String,
) -> CheckResult {
    let passed = failures.is_empty();
    CheckResult {
        id,
        name,
        passed,
        explanation: if passed { ok() } else { failures.join("; ") },
        edges_consulted,
    }
}
