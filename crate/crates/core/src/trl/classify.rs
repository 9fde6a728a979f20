//! Key classification against the symbol library.

use crate::knowledge::{Category, SymbolLibrary};

/// Strip a trailing numeric suffix: `Time2` and `Action3` look up as `Time`
/// and `Action`. A key that is all digits keeps its name.
pub fn base_key(key: &str) -> String {
    let trimmed = key.trim_end_matches(|c: char| c.is_ascii_digit());
    if trimmed.is_empty() {
        key.to_string()
    } else {
        trimmed.to_string()
    }
}

/// Category of a clause key, or `None` when the key is unknown to the
/// library. Keys declared in several categories resolve by the priority
/// Precondition > Operation > ExpectedResult.
pub fn classify_key(key: &str, symbols: &SymbolLibrary) -> Option<Category> {
    symbols.classify(&base_key(key))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::builtin::finance_symbols;

    #[test]
    fn operation_keys() {
        let lib = finance_symbols();
        assert_eq!(classify_key("Quantity", &lib), Some(Category::Operation));
        assert_eq!(classify_key("Action", &lib), Some(Category::Operation));
    }

    #[test]
    fn numeric_suffix_stripped() {
        let lib = finance_symbols();
        assert_eq!(classify_key("Time2", &lib), Some(Category::Precondition));
        assert_eq!(classify_key("Action2", &lib), Some(Category::Operation));
        assert_eq!(base_key("Time"), "Time");
        assert_eq!(base_key("42"), "42");
    }

    #[test]
    fn unknown_keys() {
        let lib = finance_symbols();
        assert_eq!(classify_key("FooBar", &lib), None);
    }

    #[test]
    fn shared_key_resolves_to_precondition() {
        let lib = finance_symbols();
        assert_eq!(classify_key("Constraint", &lib), Some(Category::Precondition));
    }
}
