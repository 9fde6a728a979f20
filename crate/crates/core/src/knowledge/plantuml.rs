//! PlantUML class-diagram persistence for meta-models.
//!
//! Covers the subset the explication prompts ask for: bare class
//! declarations and `*--` / `--` / `--|>` arrows with optional `: label`.
//! The `.puml` form carries structure only (classes and relations);
//! element descriptions and support counts live in the JSON form.

use super::{Category, MetaElement, MetaModel, Relation, RelationKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlantUmlError {
    #[error("missing @startuml")]
    MissingStart,
    #[error("missing @enduml")]
    MissingEnd,
    #[error("line {line}: arrow references undeclared class {name:?}")]
    UndeclaredClass { line: usize, name: String },
    #[error("diagram declares no classes")]
    NoClasses,
}

pub fn to_plantuml(model: &MetaModel) -> String {
    let mut out = String::from("@startuml\n");
    out.push_str(&format!("class {}\n", model.root));
    for m in &model.middle {
        out.push_str(&format!("class {m}\n"));
    }
    let mut seen = Vec::new();
    for e in &model.elements {
        // Shared leaf names (Others) declare once, relate per category.
        if !seen.contains(&&e.name) {
            out.push_str(&format!("class {}\n", e.name));
            seen.push(&e.name);
        }
    }
    out.push('\n');
    for r in &model.relations {
        match &r.kind {
            RelationKind::Contains => out.push_str(&format!("{} *-- {} : contains\n", r.from, r.to)),
            RelationKind::Other(label) if label == "generalizes" => {
                out.push_str(&format!("{} --|> {}\n", r.from, r.to))
            }
            other => out.push_str(&format!("{} -- {} : {}\n", r.from, r.to, other.label())),
        }
    }
    out.push_str("@enduml\n");
    out
}

/// Pull the first `@startuml … @enduml` block out of surrounding text
/// (model completions wrap diagrams in prose and code fences).
pub fn extract_diagram(text: &str) -> Option<String> {
    let start = text.find("@startuml")?;
    let end_rel = text[start..].find("@enduml")?;
    Some(text[start..start + end_rel + "@enduml".len()].to_string())
}

/// Parse a class diagram into a meta-model, leniently.
///
/// Unsupported syntax is skipped with a diagnostic; only unbalanced
/// `@startuml`/`@enduml` and arrows to undeclared classes are hard errors.
/// The root is the class named `Rule` when declared, otherwise the first
/// declared class; the middle layer is whatever the root directly contains.
pub fn from_plantuml(text: &str, provenance: &str) -> Result<(MetaModel, Vec<String>), PlantUmlError> {
    if !text.contains("@startuml") {
        return Err(PlantUmlError::MissingStart);
    }
    if !text.contains("@enduml") {
        return Err(PlantUmlError::MissingEnd);
    }
    let body = extract_diagram(text).expect("both markers present");

    let mut diagnostics = Vec::new();
    let mut classes: Vec<String> = Vec::new();
    let mut relations: Vec<Relation> = Vec::new();

    for (idx, raw) in body.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty()
            || line.starts_with('\'')
            || line.starts_with("@startuml")
            || line.starts_with("@enduml")
            || line == "}"
        {
            continue;
        }
        if line.starts_with("skinparam") || line.starts_with("hide ") || line.starts_with("title") {
            diagnostics.push(format!("line {line_no}: ignored directive {line:?}"));
            continue;
        }
        if let Some(rest) = line.strip_prefix("class ") {
            let name = rest.trim().trim_end_matches('{').trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                diagnostics.push(format!("line {line_no}: ignored malformed class declaration {line:?}"));
            } else if !classes.iter().any(|c| c == name) {
                classes.push(name.to_string());
            }
            continue;
        }
        // Arrow forms, most specific first.
        let (arrow, default_kind): (&str, Option<RelationKind>) = if line.contains("--|>") {
            ("--|>", Some(RelationKind::Other("generalizes".to_string())))
        } else if line.contains("*--") {
            ("*--", Some(RelationKind::Contains))
        } else if line.contains("--") {
            ("--", None)
        } else {
            diagnostics.push(format!("line {line_no}: ignored unsupported line {line:?}"));
            continue;
        };
        let (endpoints, label) = match line.split_once(':') {
            Some((lhs, label)) => (lhs, Some(label.trim().to_string())),
            None => (line, None),
        };
        let Some((from, to)) = endpoints.split_once(arrow) else {
            diagnostics.push(format!("line {line_no}: ignored malformed arrow {line:?}"));
            continue;
        };
        let from = from.trim().to_string();
        let to = to.trim().to_string();
        for name in [&from, &to] {
            if !classes.iter().any(|c| c == name) {
                return Err(PlantUmlError::UndeclaredClass { line: line_no, name: name.clone() });
            }
        }
        let kind = match (&label, default_kind) {
            // Generalization arrows keep their meaning regardless of label.
            (_, Some(RelationKind::Other(g))) if g == "generalizes" => RelationKind::Other(g),
            (Some(l), _) if !l.is_empty() => RelationKind::from_label(l),
            (_, Some(k)) => k,
            (_, None) => RelationKind::Other("related".to_string()),
        };
        relations.push(Relation { from, to, kind });
    }

    if classes.is_empty() {
        return Err(PlantUmlError::NoClasses);
    }

    let root = if classes.iter().any(|c| c == "Rule") { "Rule".to_string() } else { classes[0].clone() };
    let middle: Vec<String> = classes
        .iter()
        .filter(|c| {
            **c != root
                && relations
                    .iter()
                    .any(|r| r.kind == RelationKind::Contains && r.from == root && r.to == **c)
        })
        .cloned()
        .collect();

    let mut elements = Vec::new();
    for name in classes.iter().filter(|c| **c != root && !middle.contains(c)) {
        // A class contained by several category nodes denotes one element
        // per category (the shared Others leaf renders this way).
        let parent_categories: Vec<Category> = relations
            .iter()
            .filter(|r| r.kind == RelationKind::Contains && r.to == *name)
            .filter_map(|r| Category::from_name(&r.from))
            .collect();
        if parent_categories.is_empty() {
            diagnostics.push(format!(
                "class {name:?} has no canonical category parent; defaulting to Precondition"
            ));
            elements.push(MetaElement {
                name: name.clone(),
                category: Category::Precondition,
                description: String::new(),
                support: 0,
            });
        } else {
            for category in parent_categories {
                elements.push(MetaElement { name: name.clone(), category, description: String::new(), support: 0 });
            }
        }
    }

    let model = MetaModel { root, middle, elements, relations, provenance: provenance.to_string() };
    Ok((model, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::MIDDLE_NAMES;

    fn canonical(elements: &[(&str, Category)]) -> MetaModel {
        MetaModel::three_layer(
            elements.iter().map(|(n, c)| MetaElement::new(n, *c, "")).collect(),
            vec![],
            "test",
        )
    }

    #[test]
    fn skeleton_round_trip() {
        let model = canonical(&[]);
        let text = to_plantuml(&model);
        // Root plus the three category classes.
        assert_eq!(text.matches("class ").count(), 4);
        let (back, diags) = from_plantuml(&text, "test").unwrap();
        assert!(diags.is_empty());
        assert_eq!(back, model);
    }

    #[test]
    fn canonical_round_trip_preserves_structure() {
        let model = canonical(&[
            ("Actor", Category::Precondition),
            ("Quantity", Category::Operation),
            ("Result", Category::ExpectedResult),
        ]);
        let (back, _) = from_plantuml(&to_plantuml(&model), "test").unwrap();
        assert_eq!(back.root, model.root);
        assert_eq!(back.middle, MIDDLE_NAMES.map(String::from).to_vec());
        assert_eq!(back.elements, model.elements);
        assert_eq!(back.relations, model.relations);
    }

    #[test]
    fn parses_foreign_class_diagram() {
        let text = r#"@startuml
skinparam defaultFontSize 20

class TradingRule
class Condition
class Operator
class Action
class RuleSet
class EntryRule

TradingRule *-- Condition : conditions
TradingRule *-- Action : actions
TradingRule -- RuleSet : part of
RuleSet *-- TradingRule : contains
Condition *-- Operator
EntryRule --|> TradingRule
@enduml"#;
        let (model, diags) = from_plantuml(text, "fixture").unwrap();
        assert_eq!(model.root, "TradingRule");
        let mut all: Vec<&str> = vec![model.root.as_str()];
        all.extend(model.middle.iter().map(|s| s.as_str()));
        all.extend(model.elements.iter().map(|e| e.name.as_str()));
        for expected in ["TradingRule", "Condition", "Operator", "Action", "RuleSet", "EntryRule"] {
            assert!(all.contains(&expected), "missing class {expected}");
        }
        assert!(model.relations.iter().any(|r| r.kind == RelationKind::Contains && r.from == "RuleSet"));
        assert!(model
            .relations
            .iter()
            .any(|r| r.kind == RelationKind::Other("generalizes".into()) && r.from == "EntryRule"));
        assert!(model.relations.iter().any(|r| r.kind == RelationKind::Other("part of".into())));
        // skinparam ignored with a note, model is non-canonical but parsed.
        assert!(diags.iter().any(|d| d.contains("skinparam")));
        assert!(!model.is_canonical());
    }

    #[test]
    fn unbalanced_markers_are_errors() {
        assert_eq!(from_plantuml("class A\n@enduml", "t").unwrap_err(), PlantUmlError::MissingStart);
        assert_eq!(from_plantuml("@startuml\nclass A\n", "t").unwrap_err(), PlantUmlError::MissingEnd);
    }

    #[test]
    fn arrow_to_undeclared_class_is_an_error() {
        let text = "@startuml\nclass A\nA *-- B : contains\n@enduml";
        assert!(matches!(
            from_plantuml(text, "t"),
            Err(PlantUmlError::UndeclaredClass { name, .. }) if name == "B"
        ));
    }

    #[test]
    fn extracts_diagram_from_prose() {
        let text = "Here is the model:\n```plantuml\n@startuml\nclass Rule\n@enduml\n```\nDone.";
        let block = extract_diagram(text).unwrap();
        assert!(block.starts_with("@startuml"));
        assert!(block.ends_with("@enduml"));
    }
}
