//! Element identity across independently generated models.
//!
//! Consensus counting needs a deterministic answer to "is `TradingInstruments`
//! the same element as `TradingInstrument`?". Names are split on camel-case
//! boundaries into a lowercase word multiset, plurals are stripped, and an
//! optional synonym map folds known spelling variants.

use std::collections::BTreeMap;

use super::MetaElement;

pub type SynonymMap = BTreeMap<String, String>;

/// Split an UpperCamelCase (or snake_case) identifier into lowercase words.
pub fn split_words(name: &str) -> Vec<String> {
    let mut words = Vec::new();
    let mut current = String::new();
    let chars: Vec<char> = name.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if c == '_' || c == '-' || c == ' ' {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            continue;
        }
        if c.is_uppercase() && !current.is_empty() {
            // New word at lower->Upper boundaries and at the end of acronym
            // runs (HTTPServer -> http server).
            let prev_lower = chars[i - 1].is_lowercase() || chars[i - 1].is_ascii_digit();
            let next_lower = chars.get(i + 1).map(|n| n.is_lowercase()).unwrap_or(false);
            if prev_lower || (chars[i - 1].is_uppercase() && next_lower) {
                words.push(std::mem::take(&mut current));
            }
        }
        // Digits start their own word: Article5 -> article 5.
        if c.is_ascii_digit() && !current.is_empty() && chars[i - 1].is_alphabetic() {
            words.push(std::mem::take(&mut current));
        }
        current.extend(c.to_lowercase());
    }
    if !current.is_empty() {
        words.push(current);
    }
    words
}

fn strip_plural(word: &str) -> String {
    if word.len() > 3 && word.ends_with('s') && !word.ends_with("ss") {
        word[..word.len() - 1].to_string()
    } else {
        word.to_string()
    }
}

/// Normalized identity of a name: sorted lowercase word multiset after
/// plural stripping and synonym folding.
pub fn normalize_name(name: &str, synonyms: &SynonymMap) -> Vec<String> {
    let mut words: Vec<String> = split_words(name)
        .iter()
        .map(|w| {
            let stripped = strip_plural(w);
            synonyms.get(&stripped).cloned().unwrap_or(stripped)
        })
        .collect();
    words.sort();
    words
}

/// True iff the two elements denote the same concept: equal categories and
/// equal normalized names. Symmetric and reflexive by construction.
pub fn match_elements(a: &MetaElement, b: &MetaElement, synonyms: Option<&SynonymMap>) -> bool {
    static EMPTY: std::sync::OnceLock<SynonymMap> = std::sync::OnceLock::new();
    let map = synonyms.unwrap_or_else(|| EMPTY.get_or_init(SynonymMap::new));
    a.category == b.category && normalize_name(&a.name, map) == normalize_name(&b.name, map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::Category;

    fn el(name: &str, c: Category) -> MetaElement {
        MetaElement::new(name, c, "")
    }

    #[test]
    fn splits_camel_case() {
        assert_eq!(split_words("TradingInstrument"), vec!["trading", "instrument"]);
        assert_eq!(split_words("Time2"), vec!["time", "2"]);
        assert_eq!(split_words("account_status"), vec!["account", "status"]);
    }

    #[test]
    fn plural_strip_matches() {
        let a = el("TradingInstrument", Category::Precondition);
        let b = el("TradingInstruments", Category::Precondition);
        assert!(match_elements(&a, &b, None));
        assert!(match_elements(&b, &a, None));
    }

    #[test]
    fn category_mismatch_never_matches() {
        let a = el("Price", Category::Operation);
        let b = el("Price", Category::Precondition);
        assert!(!match_elements(&a, &b, None));
    }

    #[test]
    fn synonyms_fold_variants() {
        let a = el("TradeVariety", Category::Operation);
        let b = el("TradingVariety", Category::Operation);
        assert!(!match_elements(&a, &b, None));
        let mut syn = SynonymMap::new();
        syn.insert("trade".to_string(), "trading".to_string());
        assert!(match_elements(&a, &b, Some(&syn)));
    }

    #[test]
    fn word_order_is_irrelevant() {
        let a = el("StatusAccount", Category::Precondition);
        let b = el("AccountStatus", Category::Precondition);
        assert!(match_elements(&a, &b, None));
    }

    #[test]
    fn short_and_double_s_words_keep_their_s() {
        assert_eq!(normalize_name("Gas", &SynonymMap::new()), vec!["gas"]);
        assert_eq!(normalize_name("Process", &SynonymMap::new()), vec!["process"]);
        assert_eq!(normalize_name("Others", &SynonymMap::new()), vec!["other"]);
    }
}
