//! Knowledge explication: ask each provider for one artifact, parse it, and
//! hand the per-provider results to purification or aggregation. One
//! provider failing (transport or unparseable output) never aborts the
//! others; each failure is recorded.

use std::collections::BTreeMap;

use crate::knowledge::aggregate::render_grammar;
use crate::knowledge::plantuml::from_plantuml;
use crate::knowledge::{
    Category, ConstraintKind, ConstraintSet, MetaModel, Representation, SymbolKey, SymbolLibrary,
    TestabilityConstraint,
};

use super::prompt::{build_prompt, PromptInputs, PromptTemplate, TemplateId};
use super::provider::Completer;
use super::retrieval::RetrievalIndex;
use super::UsageStats;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExplicationKind {
    MetaModel,
    Representation,
    Constraints,
}

#[derive(Clone, Debug)]
pub enum Artifact {
    MetaModel(MetaModel),
    Representation(Representation),
    Constraints(ConstraintSet),
}

/// Knowledge already explicated in earlier steps, injected into later
/// prompts (the representation prompt sees the purified meta-model, the
/// constraints prompt sees the aggregated representation).
#[derive(Clone, Debug, Default)]
pub struct ExplicationContext {
    pub meta_model_uml: Option<String>,
    pub symbols_text: Option<String>,
    pub syntax_text: Option<String>,
    /// Chunks injected as retrieval grounding.
    pub top_k: usize,
}

#[derive(Debug, Default)]
pub struct ExplicationOutcome {
    /// One artifact per provider that succeeded, in provider order.
    pub artifacts: Vec<(String, Artifact)>,
    /// Providers that failed, with the reason.
    pub failures: Vec<(String, String)>,
    pub usage: Vec<(String, UsageStats)>,
}

fn retrieval_query(kind: ExplicationKind) -> &'static str {
    match kind {
        ExplicationKind::MetaModel => "rule elements actors instruments quantities prices times results",
        ExplicationKind::Representation => "formal rule representation condition action expected result values",
        ExplicationKind::Constraints => "testability verification observable deterministic executable outcome",
    }
}

/// Render a symbol library the way prompts embed it.
pub fn render_symbols(symbols: &SymbolLibrary) -> String {
    let list = |c: Category| {
        symbols
            .keys(c)
            .iter()
            .map(|k| k.name.clone())
            .collect::<Vec<_>>()
            .join(", ")
    };
    format!(
        "* Logical Symbols:\n  * and, or, not\n* Comparison Symbols:\n  * =, !=, >, >=, <, <=, in\n* Domain Symbols\n  * Precondition: {}\n  * Operation: {}\n  * ExpectedResult: {}",
        list(Category::Precondition),
        list(Category::Operation),
        list(Category::ExpectedResult),
    )
}

/// Ask every provider for one artifact of the given kind. Providers run in
/// waves bounded by `in_flight_limit`; results keep provider order. A parse
/// failure triggers one reformat re-prompt before the provider is recorded
/// as failed.
pub fn explicate(
    providers: &[&dyn Completer],
    kind: ExplicationKind,
    docs: &[(String, String)],
    cases: &[(String, String)],
    context: &ExplicationContext,
    in_flight_limit: usize,
) -> ExplicationOutcome {
    let mut corpus: Vec<(String, String)> = docs.to_vec();
    corpus.extend(cases.iter().cloned());
    let index = RetrievalIndex::build_default(&corpus);
    let top_k = if context.top_k == 0 { 4 } else { context.top_k };
    let retrieved = RetrievalIndex::render_retrieved(&index.retrieve(retrieval_query(kind), top_k));

    let template = PromptTemplate::default_for(match kind {
        ExplicationKind::MetaModel => TemplateId::Metamodel,
        ExplicationKind::Representation => TemplateId::Representation,
        ExplicationKind::Constraints => TemplateId::Constraints,
    });
    let inputs = PromptInputs {
        meta_model: context.meta_model_uml.clone(),
        symbols: context.symbols_text.clone(),
        syntax: context.syntax_text.clone(),
        retrieved: Some(retrieved),
        ..Default::default()
    };
    let prompt = match build_prompt(&template, &inputs) {
        Ok(p) => p,
        Err(e) => {
            return ExplicationOutcome {
                artifacts: vec![],
                failures: providers.iter().map(|p| (p.name().to_string(), e.to_string())).collect(),
                usage: vec![],
            }
        }
    };

    let limit = in_flight_limit.max(1);
    let mut results: Vec<(String, Result<(Artifact, UsageStats), String>)> = Vec::new();
    for wave in providers.chunks(limit) {
        let wave_results: Vec<(String, Result<(Artifact, UsageStats), String>)> = std::thread::scope(|scope| {
            let handles: Vec<_> = wave
                .iter()
                .map(|provider| {
                    let prompt = prompt.clone();
                    scope.spawn(move || {
                        let name = provider.name().to_string();
                        (name, run_one(*provider, kind, &prompt))
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("explication worker panicked")).collect()
        });
        results.extend(wave_results);
    }

    let mut outcome = ExplicationOutcome::default();
    for (name, result) in results {
        match result {
            Ok((artifact, usage)) => {
                outcome.usage.push((name.clone(), usage));
                outcome.artifacts.push((name, artifact));
            }
            Err(reason) => outcome.failures.push((name, reason)),
        }
    }
    outcome
}

fn run_one(
    provider: &dyn Completer,
    kind: ExplicationKind,
    prompt: &str,
) -> Result<(Artifact, UsageStats), String> {
    let mut usage = UsageStats::default();
    let completion = provider.complete(prompt).map_err(|e| e.to_string())?;
    usage.accumulate(&completion.usage);
    match parse_artifact(kind, &completion.text, provider.name()) {
        Ok(artifact) => Ok((artifact, usage)),
        Err(first_error) => {
            // One reformat re-prompt, then give up on this provider.
            let reformat = format!(
                "{prompt}\n\n### Reformat\nYour previous output could not be parsed ({first_error}). Reply again, strictly in the required output format, with no surrounding commentary."
            );
            let retry = provider.complete(&reformat).map_err(|e| e.to_string())?;
            usage.accumulate(&retry.usage);
            match parse_artifact(kind, &retry.text, provider.name()) {
                Ok(artifact) => Ok((artifact, usage)),
                Err(second_error) => Err(format!("unparseable after reformat re-prompt: {second_error}")),
            }
        }
    }
}

pub fn parse_artifact(kind: ExplicationKind, text: &str, provider: &str) -> Result<Artifact, String> {
    match kind {
        ExplicationKind::MetaModel => {
            let (model, _) = from_plantuml(text, provider).map_err(|e| e.to_string())?;
            Ok(Artifact::MetaModel(model))
        }
        ExplicationKind::Representation => parse_representation(text, provider).map(Artifact::Representation),
        ExplicationKind::Constraints => parse_constraints(text, provider).map(Artifact::Constraints),
    }
}

/// Keys that default to numeric / time semantics when a completion does not
/// annotate types (completions rarely do).
const NUMERIC_KEY_HINTS: [&str; 9] =
    ["Quantity", "Price", "Balance", "Amount", "Volume", "Count", "Size", "Rate", "Limit"];
const ACTIONLIKE_KEY_HINTS: [&str; 3] = ["Action", "TradingDirection", "TradingMethod"];

fn infer_key(name: &str) -> SymbolKey {
    let base = name.to_string();
    let mut key = if NUMERIC_KEY_HINTS.iter().any(|h| base.contains(h)) {
        SymbolKey::number(name)
    } else if base.starts_with("Time") {
        SymbolKey::time(name)
    } else {
        SymbolKey::text(name)
    };
    key.actionlike = ACTIONLIKE_KEY_HINTS.contains(&name);
    key
}

fn extract_keys(line: &str) -> Vec<String> {
    line.split(|c: char| c == ',' || c == ';')
        .map(|s| s.trim().trim_matches(['`', '*', '"']).trim())
        .filter(|s| !s.is_empty() && s.chars().next().map(|c| c.is_ascii_uppercase()).unwrap_or(false))
        .filter(|s| s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
        .map(|s| s.to_string())
        .collect()
}

/// Parse a representation completion: category key lists under a Domain
/// Symbols section plus a BNF code block.
pub fn parse_representation(text: &str, provider: &str) -> Result<Representation, String> {
    let mut symbols = SymbolLibrary::empty();
    let mut found_any = false;
    for line in text.lines() {
        let trimmed = line.trim().trim_start_matches(['*', '-', ' ']).trim();
        let category = if let Some(rest) = trimmed.strip_prefix("Precondition:") {
            Some((Category::Precondition, rest))
        } else if let Some(rest) = trimmed.strip_prefix("Operation:") {
            Some((Category::Operation, rest))
        } else if let Some(rest) = trimmed.strip_prefix("Action:") {
            // Some completions label the middle category by its lead key.
            Some((Category::Operation, rest))
        } else if let Some(rest) = trimmed.strip_prefix("ExpectedResult:") {
            Some((Category::ExpectedResult, rest))
        } else {
            trimmed.strip_prefix("Expected Result:").map(|rest| (Category::ExpectedResult, rest))
        };
        if let Some((category, rest)) = category {
            for name in extract_keys(rest) {
                let keys = symbols.keys_mut(category);
                if !keys.iter().any(|k| k.name == name) {
                    keys.push(infer_key(&name));
                    found_any = true;
                }
            }
        }
    }
    if !found_any {
        return Err("no domain symbol lists found (expected 'Precondition:', 'Operation:', 'ExpectedResult:')".to_string());
    }
    // Keys listed under several categories are shared by declaration.
    let mut seen: BTreeMap<String, u32> = BTreeMap::new();
    for c in Category::ALL {
        for k in symbols.keys(c) {
            *seen.entry(k.name.clone()).or_insert(0) += 1;
        }
    }
    for c in Category::ALL {
        for k in symbols.keys_mut(c) {
            if seen.get(&k.name).copied().unwrap_or(0) > 1 {
                k.shared = true;
            }
        }
    }

    let syntax_text = extract_code_block(text, &["bnf"])
        .unwrap_or_else(|| render_grammar(&symbols));
    Ok(Representation { symbols, syntax_text, provenance: provider.to_string() })
}

/// Parse a constraints completion: numbered entries with names, kinds
/// recovered from the names, OCL bodies from code blocks.
pub fn parse_constraints(text: &str, provider: &str) -> Result<ConstraintSet, String> {
    let mut constraints: Vec<TestabilityConstraint> = Vec::new();
    let mut current: Option<(String, ConstraintKind)> = None;
    let mut ocl_lines: Vec<String> = Vec::new();
    let mut in_code = false;

    let flush = |current: &mut Option<(String, ConstraintKind)>,
                 ocl_lines: &mut Vec<String>,
                 constraints: &mut Vec<TestabilityConstraint>| {
        if let Some((name, kind)) = current.take() {
            let id = kebab(&name);
            let ocl_text = ocl_lines.join("\n");
            ocl_lines.clear();
            if !constraints.iter().any(|c| c.id == id) {
                constraints.push(TestabilityConstraint::new(&id, &name, kind, ocl_text.trim()));
            }
        }
    };

    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with("```") {
            in_code = !in_code;
            continue;
        }
        if in_code {
            ocl_lines.push(line.to_string());
            continue;
        }
        if let Some(name) = numbered_item_name(trimmed) {
            flush(&mut current, &mut ocl_lines, &mut constraints);
            let kind = kind_from_name(&name);
            current = Some((name, kind));
        }
    }
    flush(&mut current, &mut ocl_lines, &mut constraints);

    if constraints.is_empty() {
        return Err("no numbered constraints found".to_string());
    }
    Ok(ConstraintSet { constraints, provenance: provider.to_string() })
}

fn numbered_item_name(line: &str) -> Option<String> {
    let rest = line.strip_prefix(|c: char| c.is_ascii_digit())?;
    let rest = rest.trim_start_matches(|c: char| c.is_ascii_digit());
    let rest = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')'))?;
    let name_part = rest.split(&[':', '-'][..]).next().unwrap_or(rest);
    let name = name_part.trim().trim_matches(['*', '`']).trim();
    if name.is_empty() {
        None
    } else {
        Some(name.to_string())
    }
}

pub fn kind_from_name(name: &str) -> ConstraintKind {
    let lower = name.to_lowercase();
    if lower.contains("structural") || lower.contains("completeness") {
        ConstraintKind::StructuralCompleteness
    } else if lower.contains("determin") {
        ConstraintKind::Determinism
    } else if lower.contains("executab") || lower.contains("action") {
        ConstraintKind::ActionExecutability
    } else if lower.contains("observab") {
        ConstraintKind::ResultObservability
    } else if lower.contains("conflict") || lower.contains("unambig") {
        ConstraintKind::NonConflict
    } else {
        ConstraintKind::Custom
    }
}

fn kebab(name: &str) -> String {
    crate::knowledge::matching::split_words(name).join("-")
}

/// First fenced code block whose info string matches one of `languages`
/// (case-insensitive), else the first fenced block containing `::=`.
pub fn extract_code_block(text: &str, languages: &[&str]) -> Option<String> {
    let mut blocks: Vec<(String, String)> = Vec::new();
    let mut current_lang: Option<String> = None;
    let mut current: Vec<&str> = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.trim_start().strip_prefix("```") {
            match current_lang.take() {
                Some(lang) => {
                    blocks.push((lang, current.join("\n")));
                    current.clear();
                }
                None => current_lang = Some(rest.trim().to_lowercase()),
            }
        } else if current_lang.is_some() {
            current.push(line);
        }
    }
    blocks
        .iter()
        .find(|(lang, _)| languages.iter().any(|l| lang == l))
        .or_else(|| blocks.iter().find(|(_, body)| body.contains("::=")))
        .map(|(_, body)| body.clone())
}
