//! Domain knowledge artifacts: the three-layer meta-model, the symbol
//! library and grammar that make up a requirements representation, and the
//! testability constraint set, together with consensus purification and
//! aggregation over artifacts produced by independent sources.

pub mod aggregate;
pub mod builtin;
pub mod matching;
pub mod plantuml;
pub mod purify;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Schema version stamped into every persisted knowledge document.
pub const SCHEMA_VERSION: u32 = 1;

pub const ROOT_NAME: &str = "Rule";
pub const MIDDLE_NAMES: [&str; 3] = ["Precondition", "Operation", "ExpectedResult"];
pub const LOGICAL_SYMBOLS: [&str; 3] = ["and", "or", "not"];
pub const COMPARATOR_SYMBOLS: [&str; 7] = ["=", "!=", ">", "<", ">=", "<=", "in"];

/// The middle layer of the meta-model, also the category of every domain key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Precondition,
    Operation,
    ExpectedResult,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Precondition, Category::Operation, Category::ExpectedResult];

    pub fn name(&self) -> &'static str {
        match self {
            Category::Precondition => "Precondition",
            Category::Operation => "Operation",
            Category::ExpectedResult => "ExpectedResult",
        }
    }

    pub fn from_name(name: &str) -> Option<Category> {
        match name {
            "Precondition" => Some(Category::Precondition),
            "Operation" => Some(Category::Operation),
            "ExpectedResult" => Some(Category::ExpectedResult),
            _ => None,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A leaf element of the meta-model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaElement {
    pub name: String,
    pub category: Category,
    #[serde(default)]
    pub description: String,
    /// Number of source models containing a matching element.
    #[serde(default)]
    pub support: u32,
}

impl MetaElement {
    pub fn new(name: &str, category: Category, description: &str) -> Self {
        MetaElement { name: name.to_string(), category, description: description.to_string(), support: 0 }
    }
}

/// Relation kinds used in the class-diagram subset. Anything outside the
/// four named kinds is carried verbatim as `Other`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationKind {
    Contains,
    Constrains,
    DependsOn,
    Triggers,
    Other(String),
}

impl RelationKind {
    pub fn from_label(label: &str) -> RelationKind {
        match label {
            "contains" => RelationKind::Contains,
            "constrains" => RelationKind::Constrains,
            "dependsOn" | "depends on" => RelationKind::DependsOn,
            "triggers" => RelationKind::Triggers,
            other => RelationKind::Other(other.to_string()),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            RelationKind::Contains => "contains",
            RelationKind::Constrains => "constrains",
            RelationKind::DependsOn => "dependsOn",
            RelationKind::Triggers => "triggers",
            RelationKind::Other(s) => s,
        }
    }
}

impl Serialize for RelationKind {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for RelationKind {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(RelationKind::from_label(&s))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub from: String,
    pub to: String,
    pub kind: RelationKind,
}

impl Relation {
    pub fn new(from: &str, to: &str, kind: RelationKind) -> Self {
        Relation { from: from.to_string(), to: to.to_string(), kind }
    }
}

/// A three-layer domain meta-model: one root, the fixed category triple,
/// and leaf elements each contained by exactly one category node.
///
/// The struct itself can hold non-canonical shapes (diagram parsing is
/// lenient); [`MetaModel::structural_issues`] reports deviations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaModel {
    pub root: String,
    pub middle: Vec<String>,
    pub elements: Vec<MetaElement>,
    pub relations: Vec<Relation>,
    #[serde(default)]
    pub provenance: String,
}

impl MetaModel {
    /// Canonical three-layer model: backbone relations and one `contains`
    /// parent per element are materialized.
    pub fn three_layer(elements: Vec<MetaElement>, extra_relations: Vec<Relation>, provenance: &str) -> Self {
        let mut relations = Vec::new();
        for m in MIDDLE_NAMES {
            relations.push(Relation::new(ROOT_NAME, m, RelationKind::Contains));
        }
        for e in &elements {
            relations.push(Relation::new(e.category.name(), &e.name, RelationKind::Contains));
        }
        relations.extend(extra_relations);
        MetaModel {
            root: ROOT_NAME.to_string(),
            middle: MIDDLE_NAMES.iter().map(|s| s.to_string()).collect(),
            elements,
            relations,
            provenance: provenance.to_string(),
        }
    }

    pub fn elements_in(&self, category: Category) -> impl Iterator<Item = &MetaElement> {
        self.elements.iter().filter(move |e| e.category == category)
    }

    pub fn find_element(&self, name: &str) -> Option<&MetaElement> {
        self.elements.iter().find(|e| e.name == name)
    }

    fn class_names(&self) -> Vec<&str> {
        let mut names = vec![self.root.as_str()];
        names.extend(self.middle.iter().map(|s| s.as_str()));
        names.extend(self.elements.iter().map(|e| e.name.as_str()));
        names
    }

    /// Deviations from the canonical shape, empty when the model is valid.
    pub fn structural_issues(&self) -> Vec<String> {
        let mut issues = Vec::new();
        if self.root != ROOT_NAME {
            issues.push(format!("root is {:?}, expected {ROOT_NAME:?}", self.root));
        }
        if self.middle != MIDDLE_NAMES {
            issues.push(format!("middle layer is {:?}, expected {MIDDLE_NAMES:?}", self.middle));
        }
        let classes = self.class_names();
        for r in &self.relations {
            for endpoint in [&r.from, &r.to] {
                if !classes.contains(&endpoint.as_str()) {
                    issues.push(format!("relation endpoint {endpoint:?} is not a declared class"));
                }
            }
        }
        // Element identity is (category, name): the same leaf name may appear
        // under different categories (notably Others), so a parent edge is
        // the contains relation from the element's own category node.
        for e in &self.elements {
            if e.name.is_empty() {
                issues.push("element with empty name".to_string());
                continue;
            }
            let direct = self
                .relations
                .iter()
                .filter(|r| r.kind == RelationKind::Contains && r.to == e.name && r.from == e.category.name())
                .count();
            match direct {
                0 => issues.push(format!("element {:?} has no contains parent", e.name)),
                1 => {}
                n => issues.push(format!("element {:?} has {n} contains parents", e.name)),
            }
        }
        // Every contains edge out of a category node must land on an element
        // of that category; edges out of leaves break the tree.
        for r in self.relations.iter().filter(|r| r.kind == RelationKind::Contains) {
            if r.from == self.root {
                continue;
            }
            if self.middle.contains(&r.from) {
                let matched = self.elements.iter().any(|e| e.name == r.to && e.category.name() == r.from);
                if !matched {
                    issues.push(format!("contains edge {:?} -> {:?} matches no element of that category", r.from, r.to));
                }
            } else if self.elements.iter().any(|e| e.name == r.from) {
                issues.push(format!("leaf element {:?} contains {:?}, breaking the tree", r.from, r.to));
            }
        }
        for c in Category::ALL {
            let others = self.elements_in(c).filter(|e| e.name == "Others").count();
            if others > 1 {
                issues.push(format!("category {} has {} Others elements", c.name(), others));
            }
        }
        issues
    }

    pub fn is_canonical(&self) -> bool {
        self.structural_issues().is_empty()
    }
}

/// Semantic type of a domain key, used by classification and test generation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SemanticType {
    Text,
    Number,
    Boolean,
    Time,
    /// Finite string domain, exhaustively enumerable.
    Enum(Vec<String>),
}

impl SemanticType {
    pub fn type_name(&self) -> &'static str {
        match self {
            SemanticType::Text => "string",
            SemanticType::Number => "number",
            SemanticType::Boolean => "boolean",
            SemanticType::Time => "time",
            SemanticType::Enum(_) => "enum",
        }
    }

    /// Width rank for aggregation conflicts: the widest type wins.
    pub fn width_rank(&self) -> u8 {
        match self {
            SemanticType::Text => 0,
            SemanticType::Enum(_) => 1,
            SemanticType::Boolean => 2,
            SemanticType::Time => 3,
            SemanticType::Number => 4,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SemanticTypeRepr {
    #[serde(rename = "type")]
    type_name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    values: Vec<String>,
}

impl Serialize for SemanticType {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = SemanticTypeRepr {
            type_name: self.type_name().to_string(),
            values: match self {
                SemanticType::Enum(vs) => vs.clone(),
                _ => Vec::new(),
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SemanticType {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = SemanticTypeRepr::deserialize(deserializer)?;
        Ok(match repr.type_name.as_str() {
            "number" => SemanticType::Number,
            "boolean" => SemanticType::Boolean,
            "time" => SemanticType::Time,
            "enum" => SemanticType::Enum(repr.values),
            _ => SemanticType::Text,
        })
    }
}

/// One key of the domain vocabulary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolKey {
    pub name: String,
    #[serde(flatten)]
    pub sem_type: SemanticType,
    /// Keys that denote an executable behavior (checked by action
    /// executability).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub actionlike: bool,
    /// Keys intentionally listed under more than one category.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub shared: bool,
}

impl SymbolKey {
    pub fn text(name: &str) -> Self {
        SymbolKey { name: name.to_string(), sem_type: SemanticType::Text, actionlike: false, shared: false }
    }

    pub fn number(name: &str) -> Self {
        SymbolKey { name: name.to_string(), sem_type: SemanticType::Number, actionlike: false, shared: false }
    }

    pub fn time(name: &str) -> Self {
        SymbolKey { name: name.to_string(), sem_type: SemanticType::Time, actionlike: false, shared: false }
    }

    pub fn actionlike(mut self) -> Self {
        self.actionlike = true;
        self
    }

    pub fn shared(mut self) -> Self {
        self.shared = true;
        self
    }
}

/// The domain symbol vocabulary: fixed logical and comparison symbols plus
/// an ordered key list per category.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolLibrary {
    pub precondition: Vec<SymbolKey>,
    pub operation: Vec<SymbolKey>,
    pub expected_result: Vec<SymbolKey>,
}

impl SymbolLibrary {
    pub fn empty() -> Self {
        SymbolLibrary { precondition: Vec::new(), operation: Vec::new(), expected_result: Vec::new() }
    }

    pub fn keys(&self, category: Category) -> &[SymbolKey] {
        match category {
            Category::Precondition => &self.precondition,
            Category::Operation => &self.operation,
            Category::ExpectedResult => &self.expected_result,
        }
    }

    pub fn keys_mut(&mut self, category: Category) -> &mut Vec<SymbolKey> {
        match category {
            Category::Precondition => &mut self.precondition,
            Category::Operation => &mut self.operation,
            Category::ExpectedResult => &mut self.expected_result,
        }
    }

    /// Category of a base key name. Keys listed in several categories
    /// resolve by the declared priority Precondition > Operation >
    /// ExpectedResult.
    pub fn classify(&self, base_name: &str) -> Option<Category> {
        for c in Category::ALL {
            if self.keys(c).iter().any(|k| k.name == base_name) {
                return Some(c);
            }
        }
        None
    }

    pub fn lookup(&self, base_name: &str) -> Option<(Category, &SymbolKey)> {
        for c in Category::ALL {
            if let Some(k) = self.keys(c).iter().find(|k| k.name == base_name) {
                return Some((c, k));
            }
        }
        None
    }

    pub fn semantic_type(&self, base_name: &str) -> Option<&SemanticType> {
        self.lookup(base_name).map(|(_, k)| &k.sem_type)
    }

    pub fn is_actionlike(&self, base_name: &str) -> bool {
        self.lookup(base_name).map(|(_, k)| k.actionlike).unwrap_or(false)
    }

    /// Duplicate keys across categories that are not flagged shared.
    pub fn duplicate_issues(&self) -> Vec<String> {
        let mut seen: BTreeMap<&str, Category> = BTreeMap::new();
        let mut issues = Vec::new();
        for c in Category::ALL {
            for k in self.keys(c) {
                if let Some(first) = seen.get(k.name.as_str()) {
                    if !k.shared {
                        issues.push(format!("key {:?} appears in both {} and {}", k.name, first.name(), c.name()));
                    }
                } else {
                    seen.insert(&k.name, c);
                }
            }
        }
        issues
    }
}

/// The formal requirements representation: vocabulary plus grammar text.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Representation {
    pub symbols: SymbolLibrary,
    pub syntax_text: String,
    #[serde(default)]
    pub provenance: String,
}

/// Kind tag deciding which built-in predicate executes a constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    StructuralCompleteness,
    Determinism,
    ActionExecutability,
    ResultObservability,
    NonConflict,
    /// Stored and reported verbatim, never executed.
    Custom,
}

impl ConstraintKind {
    pub const BUILTIN: [ConstraintKind; 5] = [
        ConstraintKind::StructuralCompleteness,
        ConstraintKind::Determinism,
        ConstraintKind::ActionExecutability,
        ConstraintKind::ResultObservability,
        ConstraintKind::NonConflict,
    ];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestabilityConstraint {
    pub id: String,
    pub name: String,
    pub kind: ConstraintKind,
    #[serde(default)]
    pub ocl_text: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
}

impl TestabilityConstraint {
    pub fn new(id: &str, name: &str, kind: ConstraintKind, ocl_text: &str) -> Self {
        TestabilityConstraint {
            id: id.to_string(),
            name: name.to_string(),
            kind,
            ocl_text: ocl_text.to_string(),
            params: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub constraints: Vec<TestabilityConstraint>,
    #[serde(default)]
    pub provenance: String,
}

impl ConstraintSet {
    pub fn find(&self, kind: ConstraintKind) -> Option<&TestabilityConstraint> {
        self.constraints.iter().find(|c| c.kind == kind)
    }

    pub fn id_issues(&self) -> Vec<String> {
        let mut seen = std::collections::BTreeSet::new();
        let mut issues = Vec::new();
        for c in &self.constraints {
            if !seen.insert(&c.id) {
                issues.push(format!("duplicate constraint id {:?}", c.id));
            }
        }
        issues
    }
}

/// Persistence wrapper adding a schema version to any knowledge document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Document<T> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Document<T> {
    pub fn new(body: T) -> Self {
        Document { schema_version: SCHEMA_VERSION, body }
    }
}

pub fn to_json_document<T: Serialize>(body: &T) -> String {
    #[derive(Serialize)]
    struct Ref<'a, T> {
        schema_version: u32,
        #[serde(flatten)]
        body: &'a T,
    }
    let doc = Ref { schema_version: SCHEMA_VERSION, body };
    let mut s = serde_json::to_string_pretty(&doc).expect("knowledge documents serialize");
    s.push('\n');
    s
}

pub fn from_json_document<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, serde_json::Error> {
    let doc: Document<T> = serde_json::from_str(text)?;
    Ok(doc.body)
}
