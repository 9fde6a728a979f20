//! Prompt templates with dynamic knowledge injection.
//!
//! Templates are plain text with named placeholders; assembly is pure
//! string substitution, so identical inputs produce byte-identical prompts.
//! The requirement-generation prompt embeds the full symbol vocabulary and
//! grammar; the testability prompt carries exactly one constraint per call
//! so each criterion is judged independently.

use serde::{Deserialize, Serialize};

use super::GatewayError;

pub const PLACEHOLDERS: [&str; 6] =
    ["meta_model", "symbols", "syntax", "constraints", "retrieved", "input_rule"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TemplateId {
    Metamodel,
    Representation,
    Constraints,
    Formalize,
    Testability,
    E2eBaseline,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub body: String,
}

impl PromptTemplate {
    pub fn default_for(id: TemplateId) -> Self {
        let body = match id {
            TemplateId::Metamodel => METAMODEL_TEMPLATE,
            TemplateId::Representation => REPRESENTATION_TEMPLATE,
            TemplateId::Constraints => CONSTRAINTS_TEMPLATE,
            TemplateId::Formalize => FORMALIZE_TEMPLATE,
            TemplateId::Testability => TESTABILITY_TEMPLATE,
            TemplateId::E2eBaseline => E2E_BASELINE_TEMPLATE,
        };
        PromptTemplate { id, body: body.to_string() }
    }

    /// Placeholder names referenced by the body.
    pub fn placeholders(&self) -> Vec<&'static str> {
        PLACEHOLDERS
            .iter()
            .filter(|p| self.body.contains(&format!("{{{p}}}")))
            .copied()
            .collect()
    }
}

/// Values available for substitution. `None` for a referenced placeholder
/// is an error; extra values are ignored.
#[derive(Clone, Debug, Default)]
pub struct PromptInputs {
    pub meta_model: Option<String>,
    pub symbols: Option<String>,
    pub syntax: Option<String>,
    pub constraints: Option<String>,
    pub retrieved: Option<String>,
    pub input_rule: Option<String>,
}

impl PromptInputs {
    fn get(&self, name: &str) -> Option<&String> {
        match name {
            "meta_model" => self.meta_model.as_ref(),
            "symbols" => self.symbols.as_ref(),
            "syntax" => self.syntax.as_ref(),
            "constraints" => self.constraints.as_ref(),
            "retrieved" => self.retrieved.as_ref(),
            "input_rule" => self.input_rule.as_ref(),
            _ => None,
        }
    }
}

/// Substitute every referenced placeholder. Literal braces elsewhere in the
/// body (BNF quantifiers, JSON examples) pass through untouched.
pub fn build_prompt(template: &PromptTemplate, inputs: &PromptInputs) -> Result<String, GatewayError> {
    let mut out = template.body.clone();
    for name in template.placeholders() {
        let marker = format!("{{{name}}}");
        match inputs.get(name) {
            Some(value) => out = out.replace(&marker, value),
            None => {
                return Err(GatewayError::MissingPlaceholder {
                    template: format!("{:?}", template.id),
                    placeholder: name.to_string(),
                })
            }
        }
    }
    Ok(out)
}

const METAMODEL_TEMPLATE: &str = r#"You are a software requirements modeling and testing expert.

Your task is to construct a domain meta-model describing the vocabulary of regulatory rules for this domain, as a tree-structured class diagram.

### Construction requirements
1. Three-layer structure: top layer is a single class `Rule`; the middle layer is exactly the three classes `Precondition`, `Operation`, `ExpectedResult`; the bottom layer holds the leaf rule elements.
2. Around 15 leaf elements. Merge semantically overlapping elements; bucket scattered low-frequency elements into a leaf named `Others` under each of the three middle classes.
3. Leaf elements are attribute keys (UpperCamelCase class names, empty bodies), never concrete values.
4. Every relationship is labeled: `contains` for middle-to-leaf composition, plus `constrains`, `dependsOn`, `triggers` where the semantics call for them. Each leaf attaches to exactly one middle class.

### Working material (regulatory documents and historical test cases)
{retrieved}

### Output
First a numbered list of the leaf elements, each with a description of at most 10 words. Then the complete three-layer class diagram as a single PlantUML block (@startuml ... @enduml) using the exact leaf names from the list.
"#;

const REPRESENTATION_TEMPLATE: &str = r#"You are a software requirements modeling expert.

Your task is to define a formal requirement representation language for domain rules so they can be parsed and checked mechanically.

### Input meta-model (PlantUML)
{meta_model}

### Working material (regulatory documents and historical test cases)
{retrieved}

### What to define
1. Symbols: logical symbols (and, or, not), comparison symbols (=, !=, >, >=, <, <=, in), and domain symbols grouped under Precondition, Operation, and ExpectedResult, aligned with the meta-model's leaf elements.
2. Syntax: a BNF grammar for IF-THEN rules over KEY-OP-VALUE clauses, where values are strings, numbers, booleans, times, or time-range sets.

### Output format
### Symbols:
* Logical Symbols: ...
* Comparison Symbols: ...
* Domain Symbols
  * Precondition: <comma-separated keys>
  * Operation: <comma-separated keys>
  * ExpectedResult: <comma-separated keys>

### Syntax:
```BNF
<the grammar>
```
"#;

const CONSTRAINTS_TEMPLATE: &str = r#"You are a software testing and requirements validation expert.

Your task is to define formal testability constraints over the requirement representation below: the conditions a formal rule must satisfy to be unambiguously verifiable and usable for automated test generation.

### Requirement representation symbols
{symbols}

### Requirement representation syntax
{syntax}

### Working material
{retrieved}

### What to cover
Completeness of condition, action, and result; determinism of every element value; executability of actions; observability of expected results; absence of conflicting outcomes for identical conditions.

### Output format
A numbered list. Each entry: a short constraint name, a one-sentence rationale, and the constraint formalized in OCL inside an ```OCL code block with `context Rule`.
"#;

const FORMALIZE_TEMPLATE: &str = r#"You are a software requirements modeling and testing expert, proficient in formal requirements representation.

### Task
Convert the natural-language rules below into the testable requirement language defined here. Output only the formal rules.

### Testable Requirement Language Definition
#### Symbol Definition
{symbols}

#### Syntax Definition
```BNF
{syntax}
```

#### Other Requirements
1. Strictly follow the defined symbols and syntax.
2. Except for modulo calculations (Key % n = r), every expression is a key-op-value triple.
3. Express the full meaning of the rule; omit nothing, invent no words absent from the source text.
4. Use parentheses only where needed (or, not).
5. Number the rules `rule 1`, `rule 2`, ... with each body as `if <condition> then <outcome>`.

### Input
{input_rule}

### Output
The formal rules, inside one ``` code block.
"#;

const TESTABILITY_TEMPLATE: &str = r#"You are a software requirements modeling and testing expert, specialized in judging whether a formalized rule is a testable requirement.

### Rule under evaluation
{input_rule}

### Evaluation criterion (judge this criterion only)
{constraints}

### Instructions
1. Decide whether the rule satisfies this single criterion.
2. If it does not, rewrite the rule so it does, changing as little as possible: complete missing elements, make vague values concrete, keep the rule's meaning.

### Output format
First line: `true` or `false`.
If false: one sentence naming the violation, then the refined rule inside one ``` code block.
"#;

const E2E_BASELINE_TEMPLATE: &str = r#"You are a requirement modeling and testing expert.

Generate test cases for the rule below. Each test case is a JSON object with an "id" field, the relevant input elements as keys, and the expected "Result". Cover positive, negative, and boundary scenarios; no duplicates. Output strictly a JSON array.

### Input rule
{input_rule}
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formalize_prompt_embeds_knowledge_sections() {
        let template = PromptTemplate::default_for(TemplateId::Formalize);
        let inputs = PromptInputs {
            symbols: Some("* Precondition: Actor, Time".to_string()),
            syntax: Some("Rule ::= \"IF\" <Precondition>".to_string()),
            input_rule: Some("the quantity shall be at least 1000".to_string()),
            ..Default::default()
        };
        let prompt = build_prompt(&template, &inputs).unwrap();
        assert!(prompt.contains("Symbol Definition"));
        assert!(prompt.contains("Syntax Definition"));
        assert!(prompt.contains("Actor, Time"));
        assert!(prompt.contains("Rule ::="));
        assert!(prompt.contains("at least 1000"));
    }

    #[test]
    fn template_without_placeholders_passes_through() {
        let template = PromptTemplate { id: TemplateId::E2eBaseline, body: "fixed body, {not_a_placeholder}".into() };
        let prompt = build_prompt(&template, &PromptInputs::default()).unwrap();
        assert_eq!(prompt, "fixed body, {not_a_placeholder}");
    }

    #[test]
    fn testability_prompt_carries_one_criterion() {
        let template = PromptTemplate::default_for(TemplateId::Testability);
        let inputs = PromptInputs {
            constraints: Some("Element Determinism: every value must be concrete".to_string()),
            input_rule: Some("rule 1\nif Time = \"core session\" then Result = Success".to_string()),
            ..Default::default()
        };
        let prompt = build_prompt(&template, &inputs).unwrap();
        assert!(prompt.contains("Element Determinism"));
        assert!(!prompt.contains("Structural Completeness"));
    }

    #[test]
    fn missing_placeholder_is_an_error() {
        let template = PromptTemplate::default_for(TemplateId::Formalize);
        let err = build_prompt(&template, &PromptInputs::default()).unwrap_err();
        assert!(matches!(err, GatewayError::MissingPlaceholder { .. }));
    }

    #[test]
    fn prompt_assembly_is_deterministic() {
        let template = PromptTemplate::default_for(TemplateId::Metamodel);
        let inputs = PromptInputs { retrieved: Some("chunk a\nchunk b".into()), ..Default::default() };
        let a = build_prompt(&template, &inputs).unwrap();
        let b = build_prompt(&template, &inputs).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn literal_braces_survive_substitution() {
        let template = PromptTemplate::default_for(TemplateId::Formalize);
        let inputs = PromptInputs {
            symbols: Some("s".into()),
            syntax: Some("TimeLiteral ::= [0-9]{2} \":\" [0-9]{2}".into()),
            input_rule: Some("r".into()),
            ..Default::default()
        };
        let prompt = build_prompt(&template, &inputs).unwrap();
        assert!(prompt.contains("[0-9]{2}"));
    }
}
