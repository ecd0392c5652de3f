//! Tree flattening and label projection.

use super::{
    DiscourseError, FlatRelationSeq, LabelSeq, Nuclearity, RelationInventory, RstNode, RstTree,
    NULL_LABEL,
};
use crate::corpus::Paragraph;
use std::collections::BTreeSet;

/// Flattens a tree into one relation per adjacent-EDU boundary.
///
/// The boundary between EDUs k and k+1 takes the relation of the deepest
/// node whose children straddle it; that is exactly the node where the
/// boundary separates two adjacent children, so a single pass can assign
/// every boundary. The relation is replaced by `None` when the node's
/// leftmost nucleus child starts after the boundary, i.e. the central
/// span follows its dependent.
pub fn flatten(tree: &RstTree) -> Result<FlatRelationSeq, DiscourseError> {
    let edus = tree.edu_count();
    if edus < 2 {
        return Err(DiscourseError::Invalid(format!(
            "flatten needs at least 2 EDUs, got {edus}"
        )));
    }
    let mut entries: Vec<Option<Option<String>>> = vec![None; edus - 1];
    assign(&tree.root, 0, &mut entries);
    let entries = entries
        .into_iter()
        .map(|e| e.expect("every boundary lies between children of exactly one node"))
        .collect();
    Ok(FlatRelationSeq { entries })
}

/// Walks the subtree rooted at `node`, whose leftmost leaf has index
/// `first`, filling the boundaries that lie between its children.
/// Returns the number of leaves under `node`.
fn assign(node: &RstNode, first: usize, entries: &mut [Option<Option<String>>]) -> usize {
    match node {
        RstNode::Leaf(_) => 1,
        RstNode::Internal { relation, children } => {
            let mut child_first = first;
            let mut child_firsts = Vec::with_capacity(children.len());
            for c in children {
                child_firsts.push(child_first);
                child_first += assign(&c.node, child_first, entries);
            }
            let total = child_first - first;
            let nucleus_start = children
                .iter()
                .zip(&child_firsts)
                .find(|(c, _)| c.nuclearity == Nuclearity::Nucleus)
                .map(|(_, &f)| f)
                .expect("validated trees have a nucleus child");
            for &f in &child_firsts[1..] {
                let boundary = f - 1;
                let excluded = nucleus_start > boundary;
                entries[boundary] = Some(if excluded {
                    None
                } else {
                    Some(relation.clone())
                });
            }
            total
        }
    }
}

/// How [`project_labels`] treats relations missing from the inventory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    /// Unknown relations are an error (training data must be closed).
    Train,
    /// Unknown relations map to the null label.
    Eval,
}

/// Places each boundary relation at the first token of the EDU to its
/// right, in that EDU's sentence; every other position gets the null
/// label. Returns one label sequence per sentence.
pub fn project_labels(
    paragraph: &Paragraph,
    tree: &RstTree,
    flat: &FlatRelationSeq,
    inventory: &RelationInventory,
    mode: LabelMode,
) -> Result<Vec<LabelSeq>, DiscourseError> {
    let leaves = tree.leaves();
    if flat.len() + 1 != leaves.len() {
        return Err(DiscourseError::Invalid(format!(
            "{} flat entries for {} EDUs",
            flat.len(),
            leaves.len()
        )));
    }
    let mut labels: Vec<LabelSeq> = paragraph
        .sentences
        .iter()
        .map(|s| vec![0; s.len()])
        .collect();
    for (k, entry) in flat.entries.iter().enumerate() {
        let Some(relation) = entry else { continue };
        let idx = match inventory.index_of(relation) {
            Some(i) => i,
            None => match mode {
                LabelMode::Train => {
                    return Err(DiscourseError::UnknownRelation(relation.clone()))
                }
                LabelMode::Eval => 0,
            },
        };
        let target = leaves[k + 1];
        labels[target.sentence][target.start] = idx;
    }
    Ok(labels)
}

/// Collects the sorted distinct relation names used by training trees and
/// prepends the null label.
pub fn build_inventory(trees: &[RstTree]) -> RelationInventory {
    let mut names = BTreeSet::new();
    for t in trees {
        collect_relations(&t.root, &mut names);
    }
    names.remove(NULL_LABEL);
    RelationInventory::new(names)
}

fn collect_relations(node: &RstNode, out: &mut BTreeSet<String>) {
    if let RstNode::Internal { relation, children } = node {
        out.insert(relation.clone());
        for c in children {
            collect_relations(&c.node, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::bracket::parse_tree_file;
    use super::*;
    use crate::corpus::Domain;

    fn para(lens: &[usize]) -> Paragraph {
        Paragraph {
            id: "p".into(),
            domain: Domain::Synthetic,
            sentences: lens.iter().map(|&n| vec!["w".to_string(); n]).collect(),
        }
    }

    #[test]
    fn nucleus_first_keeps_relations() {
        let t = parse_tree_file(
            "(Attribution (N (Elaboration (N 0:0-2) (S 0:3-5))) (S 1:0-4))",
        )
        .unwrap();
        let flat = flatten(&t).unwrap();
        assert_eq!(
            flat.entries,
            vec![
                Some("Elaboration".to_string()),
                Some("Attribution".to_string())
            ]
        );
    }

    #[test]
    fn nucleus_after_dependent_is_excluded() {
        let t = parse_tree_file("(Attribution (S 0:0-2) (N 0:3-5))").unwrap();
        assert_eq!(flatten(&t).unwrap().entries, vec![None]);
    }

    #[test]
    fn deeper_node_wins_at_shared_boundaries() {
        // Boundary 1 lies between the children of the inner node, not the root.
        let t = parse_tree_file(
            "(Background (N 0:0-1) (S (Contrast (N 1:0-2) (S 1:3-4))))",
        )
        .unwrap();
        let flat = flatten(&t).unwrap();
        assert_eq!(
            flat.entries,
            vec![
                Some("Background".to_string()),
                Some("Contrast".to_string())
            ]
        );
    }

    #[test]
    fn three_child_node_fills_two_boundaries() {
        let t = parse_tree_file("(List (N 0:0-1) (N 0:2-3) (N 0:4-5))").unwrap();
        let flat = flatten(&t).unwrap();
        assert_eq!(flat.len(), 2);
        assert!(flat.entries.iter().all(|e| e.as_deref() == Some("List")));
    }

    #[test]
    fn multi_nucleus_is_never_excluded() {
        // Nucleus on both sides of every boundary keeps the relation.
        let t = parse_tree_file("(Joint (N 0:0-2) (N 0:3-5))").unwrap();
        assert_eq!(
            flatten(&t).unwrap().entries,
            vec![Some("Joint".to_string())]
        );
    }

    #[test]
    fn satellite_then_two_nuclei_excludes_only_first_boundary() {
        let t = parse_tree_file("(R (S 0:0-1) (N 0:2-3) (N 0:4-5))").unwrap();
        assert_eq!(
            flatten(&t).unwrap().entries,
            vec![None, Some("R".to_string())]
        );
    }

    #[test]
    fn single_edu_tree_is_an_error() {
        let t = parse_tree_file("(N 0:0-5)").unwrap();
        assert!(flatten(&t).is_err());
    }

    #[test]
    fn labels_go_to_first_token_of_right_edu() {
        let t = parse_tree_file("(Attribution (N 0:0-2) (S 0:3-5))").unwrap();
        let flat = flatten(&t).unwrap();
        let inv = RelationInventory::new(["Attribution".to_string()]);
        let labels =
            project_labels(&para(&[6]), &t, &flat, &inv, LabelMode::Train).unwrap();
        assert_eq!(labels, vec![vec![0, 0, 0, 1, 0, 0]]);
    }

    #[test]
    fn cross_sentence_relation_labels_sentence_start() {
        let t = parse_tree_file("(Elaboration (N 0:0-5) (S 1:0-4))").unwrap();
        let flat = flatten(&t).unwrap();
        let inv = RelationInventory::new(["Elaboration".to_string()]);
        let labels =
            project_labels(&para(&[6, 5]), &t, &flat, &inv, LabelMode::Train).unwrap();
        assert_eq!(labels[0], vec![0; 6]);
        assert_eq!(labels[1][0], 1);
        assert!(labels[1][1..].iter().all(|&l| l == 0));
    }

    #[test]
    fn excluded_boundary_projects_null() {
        let t = parse_tree_file("(Attribution (S 0:0-2) (N 0:3-5))").unwrap();
        let flat = flatten(&t).unwrap();
        let inv = RelationInventory::new(["Attribution".to_string()]);
        let labels =
            project_labels(&para(&[6]), &t, &flat, &inv, LabelMode::Train).unwrap();
        assert_eq!(labels, vec![vec![0; 6]]);
    }

    #[test]
    fn unknown_relation_errors_in_train_mode() {
        let t = parse_tree_file("(Exotic (N 0:0-2) (S 0:3-5))").unwrap();
        let flat = flatten(&t).unwrap();
        let inv = RelationInventory::new(["Attribution".to_string()]);
        assert!(matches!(
            project_labels(&para(&[6]), &t, &flat, &inv, LabelMode::Train),
            Err(DiscourseError::UnknownRelation(_))
        ));
        let eval =
            project_labels(&para(&[6]), &t, &flat, &inv, LabelMode::Eval).unwrap();
        assert_eq!(eval, vec![vec![0; 6]]);
    }

    #[test]
    fn inventory_is_sorted_and_deduplicated() {
        let trees: Vec<RstTree> = [
            "(Contrast (N 0:0-2) (S 0:3-5))",
            "(Attribution (N (Contrast (N 0:0-1) (S 0:2-3))) (S 0:4-5))",
        ]
        .iter()
        .map(|t| parse_tree_file(t).unwrap())
        .collect();
        let inv = build_inventory(&trees);
        assert_eq!(inv.names(), &["o", "Attribution", "Contrast"]);
    }

    #[test]
    fn empty_tree_list_gives_null_only_inventory() {
        let inv = build_inventory(&[]);
        assert_eq!(inv.names(), &[NULL_LABEL]);
    }
}
