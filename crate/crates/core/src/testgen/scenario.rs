//! Scenario construction: rules link when one produces a behavioral value
//! (`Status` or `Action`) that another consumes in its condition, and the
//! weakly connected components of that graph are the business scenarios.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::trl::{base_key, AtomicClause, Comparator, Rule, RuleSet};
use crate::value::Value;

/// Keys that link rules into flows.
const LINK_KEYS: [&str; 2] = ["Status", "Action"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioLink {
    pub from_rule: u64,
    pub to_rule: u64,
    pub key: String,
    /// Canonical text of the linking value.
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: u64,
    /// Topological order when the link graph is acyclic, document order
    /// otherwise.
    pub member_rules: Vec<u64>,
    pub links: Vec<ScenarioLink>,
    #[serde(default)]
    pub cyclic: bool,
}

fn produced_atoms(rule: &Rule) -> Vec<&AtomicClause> {
    rule.outcome
        .atoms()
        .into_iter()
        .chain(rule.condition.atoms())
        .filter(|a| a.comparator == Comparator::Eq && LINK_KEYS.contains(&base_key(&a.key).as_str()))
        .collect()
}

fn consumed_atoms(rule: &Rule) -> Vec<&AtomicClause> {
    rule.condition
        .atoms()
        .into_iter()
        .filter(|a| a.comparator == Comparator::Eq && LINK_KEYS.contains(&base_key(&a.key).as_str()))
        .collect()
}

fn link_value_text(v: &Value) -> String {
    v.to_string()
}

/// Weakly connected components over producer/consumer links; every rule id
/// lands in exactly one scenario, singletons included.
pub fn build_scenarios(rules: &RuleSet) -> Vec<Scenario> {
    let ids: Vec<u64> = rules.rules.iter().map(|r| r.id).collect();
    let index_of: BTreeMap<u64, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();

    let mut links: Vec<ScenarioLink> = Vec::new();
    for producer in &rules.rules {
        for consumer in rules.rules.iter().filter(|r| r.id != producer.id) {
            for p in produced_atoms(producer) {
                for c in consumed_atoms(consumer) {
                    if base_key(&p.key) == base_key(&c.key) && p.value == c.value {
                        let link = ScenarioLink {
                            from_rule: producer.id,
                            to_rule: consumer.id,
                            key: base_key(&p.key),
                            value: link_value_text(&p.value),
                        };
                        if !links.contains(&link) {
                            links.push(link);
                        }
                    }
                }
            }
        }
    }

    // Union-find over rule indices.
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for link in &links {
        let (a, b) = (index_of[&link.from_rule], index_of[&link.to_rule]);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent[hi] = lo;
        }
    }

    // Components keyed by root, in document order of their first member.
    let mut components: Vec<(usize, Vec<u64>)> = Vec::new();
    for (i, id) in ids.iter().enumerate() {
        let root = find(&mut parent, i);
        match components.iter_mut().find(|(r, _)| *r == root) {
            Some((_, members)) => members.push(*id),
            None => components.push((root, vec![*id])),
        }
    }

    components
        .into_iter()
        .enumerate()
        .map(|(ci, (_, members))| {
            let member_links: Vec<ScenarioLink> = links
                .iter()
                .filter(|l| members.contains(&l.from_rule))
                .cloned()
                .collect();
            let (ordered, cyclic) = order_members(&members, &member_links, &index_of);
            Scenario { id: (ci + 1) as u64, member_rules: ordered, links: member_links, cyclic }
        })
        .collect()
}

/// Kahn's algorithm with document-order tie-breaking; on a cycle, fall back
/// to document order and flag it.
fn order_members(
    members: &[u64],
    links: &[ScenarioLink],
    index_of: &BTreeMap<u64, usize>,
) -> (Vec<u64>, bool) {
    let mut indegree: BTreeMap<u64, usize> = members.iter().map(|id| (*id, 0)).collect();
    for l in links {
        if l.from_rule != l.to_rule {
            if let Some(d) = indegree.get_mut(&l.to_rule) {
                *d += 1;
            }
        }
    }
    let mut ready: Vec<u64> = members.iter().filter(|id| indegree[id] == 0).copied().collect();
    let mut ordered = Vec::with_capacity(members.len());
    while !ready.is_empty() {
        ready.sort_by_key(|id| index_of[id]);
        let next = ready.remove(0);
        ordered.push(next);
        for l in links.iter().filter(|l| l.from_rule == next && l.from_rule != l.to_rule) {
            if let Some(d) = indegree.get_mut(&l.to_rule) {
                *d -= 1;
                if *d == 0 {
                    ready.push(l.to_rule);
                }
            }
        }
    }
    if ordered.len() == members.len() {
        (ordered, false)
    } else {
        let mut doc = members.to_vec();
        doc.sort_by_key(|id| index_of[id]);
        (doc, true)
    }
}

/// Edge-list text export, one scenario per block.
pub fn scenarios_to_text(scenarios: &[Scenario]) -> String {
    let mut out = String::new();
    for s in scenarios {
        let members: Vec<String> = s.member_rules.iter().map(|id| id.to_string()).collect();
        out.push_str(&format!(
            "scenario {}{}: rules {}\n",
            s.id,
            if s.cyclic { " (cyclic)" } else { "" },
            members.join(", ")
        ));
        for l in &s.links {
            out.push_str(&format!("  {} -> {} on {} = {}\n", l.from_rule, l.to_rule, l.key, l.value));
        }
    }
    out
}

/// Activity-diagram style description of the flows, as text.
pub fn scenarios_to_diagram(scenarios: &[Scenario]) -> String {
    let mut out = String::from("@startuml\n");
    for s in scenarios {
        out.push_str(&format!("partition scenario_{} {{\n", s.id));
        if s.links.is_empty() {
            for id in &s.member_rules {
                out.push_str(&format!("  :rule {id};\n"));
            }
        } else {
            for l in &s.links {
                out.push_str(&format!("  :rule {};\n  -> {} = {};\n  :rule {};\n", l.from_rule, l.key, l.value, l.to_rule));
            }
        }
        out.push_str("}\n");
    }
    out.push_str("@enduml\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::builtin::finance_symbols;
    use crate::trl::parse_rules;

    fn parse(source: &str) -> RuleSet {
        let (set, diags) = parse_rules(source, &finance_symbols(), false, "test");
        assert!(!crate::trl::has_errors(&diags), "{diags:?}");
        set
    }

    #[test]
    fn status_link_chains_two_rules() {
        let set = parse(
            "rule 1\nif Action = Submit then Status = Matched and Result = Success\n\
             rule 2\nif Status = Matched and Action = Settle then Result = Success",
        );
        let scenarios = build_scenarios(&set);
        assert_eq!(scenarios.len(), 1);
        assert_eq!(scenarios[0].member_rules, vec![1, 2]);
        assert!(!scenarios[0].cyclic);
        // Status=Matched links 1 -> 2; Action atoms differ so no other link.
        assert!(scenarios[0].links.iter().any(|l| l.key == "Status" && l.from_rule == 1 && l.to_rule == 2));
    }

    #[test]
    fn unrelated_rules_are_singletons() {
        let set = parse(
            "rule 1\nif Action = Submit and Quantity > 5 then Result = Success\n\
             rule 2\nif Action = Cancel and Quantity > 5 then Result = Success",
        );
        let scenarios = build_scenarios(&set);
        assert_eq!(scenarios.len(), 2);
        assert_eq!(scenarios[0].member_rules, vec![1]);
        assert_eq!(scenarios[1].member_rules, vec![2]);
    }

    #[test]
    fn cycles_are_flagged_and_document_ordered() {
        let set = parse(
            "rule 1\nif Status = Open and Action = Match then Status = Closed and Result = Success\n\
             rule 2\nif Status = Closed and Action = Reopen then Status = Open and Result = Success",
        );
        let scenarios = build_scenarios(&set);
        assert_eq!(scenarios.len(), 1);
        assert!(scenarios[0].cyclic);
        assert_eq!(scenarios[0].member_rules, vec![1, 2]);
    }

    #[test]
    fn every_rule_in_exactly_one_scenario() {
        let set = parse(
            "rule 1\nif Action = A1 then Status = S1 and Result = Success\n\
             rule 2\nif Status = S1 and Action = A2 then Result = Success\n\
             rule 3\nif Action = A3 and Quantity > 1 then Result = Success\n\
             rule 4\nif Action = A2 and Price > 1 then Result = Success",
        );
        let scenarios = build_scenarios(&set);
        let mut seen: Vec<u64> = scenarios.iter().flat_map(|s| s.member_rules.clone()).collect();
        seen.sort();
        assert_eq!(seen, vec![1, 2, 3, 4]);
        // Rule 4 consumes Action=A2 which rule 2's condition also carries:
        // condition atoms count as produced behavioral elements.
        let of_rule4 = scenarios.iter().find(|s| s.member_rules.contains(&4)).unwrap();
        assert!(of_rule4.member_rules.contains(&2));
    }

    #[test]
    fn text_export_shape() {
        let set = parse(
            "rule 1\nif Action = Submit then Status = Matched and Result = Success\n\
             rule 2\nif Status = Matched and Action = Settle then Result = Success",
        );
        let scenarios = build_scenarios(&set);
        let text = scenarios_to_text(&scenarios);
        assert!(text.contains("scenario 1: rules 1, 2"));
        assert!(text.contains("1 -> 2 on Status = Matched"));
        let diagram = scenarios_to_diagram(&scenarios);
        assert!(diagram.starts_with("@startuml"));
    }
}
