//! Consensus purification of meta-models from independent sources.
//!
//! Elements present in at least `k` of the `n` source models survive;
//! low-frequency elements are kept aside and can be folded into per-category
//! `Others` buckets so coverage is not silently lost.

use serde::{Deserialize, Serialize};

use super::matching::{match_elements, SynonymMap};
use super::{Category, MetaElement, MetaModel, Relation, RelationKind, MIDDLE_NAMES, ROOT_NAME};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PurifyError {
    #[error("consensus threshold k={k} out of range, need 1 < k <= {n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("no source models given")]
    EmptyInput,
    #[error("source model {index} ({provenance:?}) is not a canonical three-layer model: {issue}")]
    MalformedModel { index: usize, provenance: String, issue: String },
}

/// Result of purification: the consensus model plus the elements that fell
/// below the threshold (candidates for `Others` bucketing).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Purified {
    pub model: MetaModel,
    pub others_candidates: Vec<MetaElement>,
}

struct ElementGroup {
    representative: MetaElement,
    /// Indices of source models containing a match.
    models: Vec<usize>,
}

/// Majority-consensus filter over meta-model elements: keep an element iff
/// it appears (under normalized-name matching) in at least `k` source models.
/// Relations survive iff both endpoints survive and the relation itself has
/// support of at least `k`.
pub fn k_purify(models: &[MetaModel], k: usize, synonyms: Option<&SynonymMap>) -> Result<Purified, PurifyError> {
    if models.is_empty() {
        return Err(PurifyError::EmptyInput);
    }
    let n = models.len();
    if k <= 1 || k > n {
        return Err(PurifyError::KOutOfRange { k, n });
    }
    for (index, m) in models.iter().enumerate() {
        let issues = m.structural_issues();
        if let Some(issue) = issues.first() {
            return Err(PurifyError::MalformedModel {
                index,
                provenance: m.provenance.clone(),
                issue: issue.clone(),
            });
        }
    }

    // Group elements across models; the first-seen element names the group.
    let mut groups: Vec<ElementGroup> = Vec::new();
    for (mi, model) in models.iter().enumerate() {
        for e in &model.elements {
            match groups.iter_mut().find(|g| match_elements(&g.representative, e, synonyms)) {
                Some(g) => {
                    if g.models.last() != Some(&mi) {
                        g.models.push(mi);
                    }
                }
                None => groups.push(ElementGroup { representative: e.clone(), models: vec![mi] }),
            }
        }
    }

    let mut kept: Vec<MetaElement> = Vec::new();
    let mut candidates: Vec<MetaElement> = Vec::new();
    for g in &groups {
        let mut e = g.representative.clone();
        e.support = g.models.len() as u32;
        if g.models.len() >= k {
            kept.push(e);
        } else {
            candidates.push(e);
        }
    }

    // Map any surviving endpoint name to its group representative so
    // relations from different models line up.
    let canonical_endpoint = |name: &str, category_hint: Option<Category>| -> Option<String> {
        if name == ROOT_NAME || MIDDLE_NAMES.contains(&name) {
            return Some(name.to_string());
        }
        let probe_categories: Vec<Category> = match category_hint {
            Some(c) => vec![c],
            None => Category::ALL.to_vec(),
        };
        for c in probe_categories {
            let probe = MetaElement::new(name, c, "");
            if let Some(g) = groups.iter().find(|g| match_elements(&g.representative, &probe, synonyms)) {
                return Some(g.representative.name.clone());
            }
        }
        None
    };

    // Count support for non-backbone relations under canonical endpoints.
    struct RelationGroup {
        relation: Relation,
        models: Vec<usize>,
    }
    let mut rel_groups: Vec<RelationGroup> = Vec::new();
    for (mi, model) in models.iter().enumerate() {
        for r in &model.relations {
            let (Some(from), Some(to)) = (canonical_endpoint(&r.from, None), canonical_endpoint(&r.to, None)) else {
                continue;
            };
            let canon = Relation { from, to, kind: r.kind.clone() };
            match rel_groups.iter_mut().find(|g| g.relation == canon) {
                Some(g) => {
                    if g.models.last() != Some(&mi) {
                        g.models.push(mi);
                    }
                }
                None => rel_groups.push(RelationGroup { relation: canon, models: vec![mi] }),
            }
        }
    }

    let kept_names: Vec<&str> = kept.iter().map(|e| e.name.as_str()).collect();
    let endpoint_survives = |name: &str| name == ROOT_NAME || MIDDLE_NAMES.contains(&name) || kept_names.contains(&name);
    let backbone_or_parent = |r: &Relation| {
        r.kind == RelationKind::Contains
            && ((r.from == ROOT_NAME && MIDDLE_NAMES.contains(&r.to.as_str()))
                || MIDDLE_NAMES.contains(&r.from.as_str()))
    };
    let extra_relations: Vec<Relation> = rel_groups
        .iter()
        .filter(|g| g.models.len() >= k)
        .map(|g| g.relation.clone())
        .filter(|r| !backbone_or_parent(r))
        .filter(|r| endpoint_survives(&r.from) && endpoint_survives(&r.to))
        .collect();

    let model = MetaModel::three_layer(kept, extra_relations, "purified");
    Ok(Purified { model, others_candidates: candidates })
}

/// Fold the below-threshold candidates into one `Others` element per
/// affected category. Idempotent: candidate names already recorded are not
/// duplicated, and existing `Others` nodes are reused.
pub fn bucket_others(purified: &MetaModel, candidates: &[MetaElement]) -> MetaModel {
    let mut model = purified.clone();
    for category in Category::ALL {
        let mut names: Vec<String> = candidates
            .iter()
            .filter(|c| c.category == category && c.name != "Others")
            .map(|c| c.name.clone())
            .collect();
        if names.is_empty() {
            continue;
        }
        if let Some(existing) = model.elements.iter_mut().find(|e| e.category == category && e.name == "Others") {
            let mut recorded = parse_grouped_names_from(&existing.description);
            recorded.extend(names);
            recorded.sort();
            recorded.dedup();
            existing.description = grouped_description(&recorded);
        } else {
            names.sort();
            names.dedup();
            let mut e = MetaElement::new("Others", category, &grouped_description(&names));
            e.support = 0;
            model.elements.push(e);
            model.relations.push(Relation::new(category.name(), "Others", RelationKind::Contains));
        }
    }
    model
}

const GROUP_PREFIX: &str = "groups low-consensus elements: ";

fn grouped_description(names: &[String]) -> String {
    format!("{GROUP_PREFIX}{}", names.join(", "))
}

fn parse_grouped_names_from(description: &str) -> Vec<String> {
    description
        .strip_prefix(GROUP_PREFIX)
        .map(|rest| rest.split(", ").map(|s| s.to_string()).collect())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(provenance: &str, ops: &[&str]) -> MetaModel {
        let elements = ops
            .iter()
            .map(|name| MetaElement::new(name, Category::Operation, "op element"))
            .collect();
        MetaModel::three_layer(elements, vec![], provenance)
    }

    #[test]
    fn majority_elements_survive() {
        let models = vec![
            model("m1", &["Price", "Quantity"]),
            model("m2", &["Price"]),
            model("m3", &["Fee"]),
        ];
        let purified = k_purify(&models, 2, None).unwrap();
        let names: Vec<&str> = purified.model.elements.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, vec!["Price"]);
        assert_eq!(purified.model.find_element("Price").unwrap().support, 2);
        let dropped: Vec<&str> = purified.others_candidates.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(dropped, vec!["Quantity", "Fee"]);
    }

    #[test]
    fn unanimity_preserves_everything() {
        let models = vec![model("a", &["Price", "Quantity"]); 3];
        let purified = k_purify(&models, 2, None).unwrap();
        assert_eq!(purified.model.elements.len(), 2);
        assert!(purified.others_candidates.is_empty());
        assert!(purified.model.elements.iter().all(|e| e.support == 3));
    }

    #[test]
    fn k_out_of_range_rejected() {
        let models = vec![model("a", &["X"]); 3];
        assert!(matches!(k_purify(&models, 1, None), Err(PurifyError::KOutOfRange { .. })));
        assert!(matches!(k_purify(&models, 4, None), Err(PurifyError::KOutOfRange { .. })));
        assert!(matches!(k_purify(&[], 2, None), Err(PurifyError::EmptyInput)));
    }

    #[test]
    fn malformed_model_rejected() {
        let mut bad = model("bad", &["X"]);
        bad.root = "TradingRule".into();
        let models = vec![model("a", &["X"]), bad, model("c", &["X"])];
        assert!(matches!(k_purify(&models, 2, None), Err(PurifyError::MalformedModel { index: 1, .. })));
    }

    #[test]
    fn plural_variants_count_as_one_element() {
        let models = vec![
            model("m1", &["TradingInstrument"]),
            model("m2", &["TradingInstruments"]),
            model("m3", &["Fee"]),
        ];
        let purified = k_purify(&models, 2, None).unwrap();
        assert_eq!(purified.model.elements.len(), 1);
        // First-seen spelling names the group.
        assert_eq!(purified.model.elements[0].name, "TradingInstrument");
    }

    #[test]
    fn bucket_creates_one_others_per_category() {
        let purified = k_purify(
            &[
                model("m1", &["Price"]),
                model("m2", &["Price"]),
                model("m3", &["Fee"]),
            ],
            2,
            None,
        )
        .unwrap();
        let bucketed = bucket_others(&purified.model, &purified.others_candidates);
        let others: Vec<&MetaElement> = bucketed.elements.iter().filter(|e| e.name == "Others").collect();
        assert_eq!(others.len(), 1);
        assert_eq!(others[0].category, Category::Operation);
        assert!(others[0].description.contains("Fee"));
        assert!(bucketed.is_canonical(), "{:?}", bucketed.structural_issues());

        // Idempotent.
        let again = bucket_others(&bucketed, &purified.others_candidates);
        assert_eq!(again, bucketed);
    }

    #[test]
    fn bucket_with_no_candidates_is_identity() {
        let m = model("m", &["Price"]);
        assert_eq!(bucket_others(&m, &[]), m);
    }

    #[test]
    fn candidates_in_two_categories_give_two_buckets() {
        let pre = MetaElement::new("Venue", Category::Precondition, "");
        let op = MetaElement::new("Fee", Category::Operation, "");
        let m = model("m", &["Price"]);
        let bucketed = bucket_others(&m, &[pre, op]);
        let others: Vec<Category> = bucketed
            .elements
            .iter()
            .filter(|e| e.name == "Others")
            .map(|e| e.category)
            .collect();
        assert_eq!(others, vec![Category::Precondition, Category::Operation]);
    }

    #[test]
    fn relations_need_surviving_endpoints_and_support() {
        let mut m1 = model("m1", &["Action", "Status"]);
        m1.relations.push(Relation::new("Action", "Status", RelationKind::Triggers));
        let mut m2 = model("m2", &["Action", "Status"]);
        m2.relations.push(Relation::new("Action", "Status", RelationKind::Triggers));
        let mut m3 = model("m3", &["Action", "Fee"]);
        m3.relations.push(Relation::new("Action", "Fee", RelationKind::Constrains));

        let purified = k_purify(&[m1, m2, m3], 2, None).unwrap();
        let triggers: Vec<&Relation> = purified
            .model
            .relations
            .iter()
            .filter(|r| r.kind == RelationKind::Triggers)
            .collect();
        assert_eq!(triggers.len(), 1);
        assert!(!purified.model.relations.iter().any(|r| r.kind == RelationKind::Constrains));
        assert!(purified.model.is_canonical());
    }
}
