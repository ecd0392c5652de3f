//! Discourse trees and their flattened relation sequences.
//!
//! A paragraph's rhetorical-structure parse is a tree whose leaves are
//! elementary discourse units (EDUs) and whose internal nodes carry a
//! relation plus per-child nucleus/satellite marks. [`flatten`] turns a
//! tree into one relation (or none) per adjacent-EDU boundary, and
//! [`project_labels`] places those relations onto per-token label
//! sequences for the sequence-labeling head.

mod bracket;
mod files;
mod flatten;
mod stub;

pub use bracket::{parse_tree_file, render_tree};
pub use files::{
    read_labels, read_tree_records, write_labels, write_tree_records, LabeledParagraph,
};
pub use flatten::{build_inventory, flatten, project_labels, LabelMode};
pub use stub::{stub_parse, STUB_RELATIONS};

use crate::corpus::Paragraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One EDU: a contiguous token span inside a single sentence.
/// `start`/`end` are inclusive token positions within the sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EduSpan {
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
}

/// Nucleus (central span) or satellite (dependent span).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Nuclearity {
    Nucleus,
    Satellite,
}

impl Nuclearity {
    pub fn letter(self) -> char {
        match self {
            Nuclearity::Nucleus => 'N',
            Nuclearity::Satellite => 'S',
        }
    }
}

/// A child edge: nuclearity mark plus subtree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RstChild {
    pub nuclearity: Nuclearity,
    pub node: RstNode,
}

/// Tree node: an EDU leaf or a relation over ordered children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RstNode {
    Leaf(EduSpan),
    Internal {
        relation: String,
        children: Vec<RstChild>,
    },
}

/// A full discourse parse of one paragraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RstTree {
    pub root: RstNode,
}

/// Flattened tree: one entry per boundary between adjacent EDUs, in order;
/// `None` marks an excluded (nucleus-after-dependent) relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatRelationSeq {
    pub entries: Vec<Option<String>>,
}

impl FlatRelationSeq {
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

/// Per-token label ids for one sentence; 0 is the null label.
pub type LabelSeq = Vec<usize>;

/// Ordered relation names with the null label at index 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationInventory {
    names: Vec<String>,
}

/// Name of the null label.
pub const NULL_LABEL: &str = "o";

#[derive(Serialize, Deserialize)]
struct InventoryFile {
    count: usize,
    relations: Vec<String>,
}

impl RelationInventory {
    /// Builds an inventory with `o` prepended; `names` must not contain it.
    pub fn new(names: impl IntoIterator<Item = String>) -> RelationInventory {
        let mut all = vec![NULL_LABEL.to_string()];
        all.extend(names);
        RelationInventory { names: all }
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), DiscourseError> {
        let file = InventoryFile {
            count: self.names.len(),
            relations: self.names.clone(),
        };
        std::fs::write(path, serde_json::to_string_pretty(&file).expect("serializes"))?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<RelationInventory, DiscourseError> {
        let text = std::fs::read_to_string(path)?;
        let file: InventoryFile =
            serde_json::from_str(&text).map_err(|e| DiscourseError::Parse {
                pos: 0,
                msg: format!("inventory file: {e}"),
            })?;
        if file.relations.first().map(String::as_str) != Some(NULL_LABEL) {
            return Err(DiscourseError::Invalid(
                "inventory must start with the null label".into(),
            ));
        }
        if file.count != file.relations.len() {
            return Err(DiscourseError::Invalid(format!(
                "inventory count {} does not match {} relations",
                file.count,
                file.relations.len()
            )));
        }
        Ok(RelationInventory {
            names: file.relations,
        })
    }
}

#[derive(Debug, Error)]
pub enum DiscourseError {
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("alignment: {0}")]
    Align(String),
    #[error("invalid tree: {0}")]
    Invalid(String),
    #[error("unknown relation {0:?}")]
    UnknownRelation(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl RstNode {
    /// Collects leaf spans left to right.
    pub fn leaves(&self) -> Vec<EduSpan> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<EduSpan>) {
        match self {
            RstNode::Leaf(span) => out.push(*span),
            RstNode::Internal { children, .. } => {
                for c in children {
                    c.node.collect_leaves(out);
                }
            }
        }
    }
}

impl RstTree {
    pub fn leaves(&self) -> Vec<EduSpan> {
        self.root.leaves()
    }

    /// Number of EDUs.
    pub fn edu_count(&self) -> usize {
        self.leaves().len()
    }

    /// Checks structural invariants: internal nodes have at least two
    /// children and at least one nucleus child; spans are non-empty and
    /// strictly ordered left to right without overlap.
    pub fn validate(&self) -> Result<(), DiscourseError> {
        validate_node(&self.root)?;
        let leaves = self.leaves();
        for span in &leaves {
            if span.end < span.start {
                return Err(DiscourseError::Invalid(format!(
                    "empty span {}:{}-{}",
                    span.sentence, span.start, span.end
                )));
            }
        }
        for w in leaves.windows(2) {
            let (a, b) = (w[0], w[1]);
            let ordered = b.sentence > a.sentence || (b.sentence == a.sentence && b.start > a.end);
            if !ordered {
                return Err(DiscourseError::Invalid(format!(
                    "leaves out of order: {}:{}-{} then {}:{}-{}",
                    a.sentence, a.start, a.end, b.sentence, b.start, b.end
                )));
            }
        }
        Ok(())
    }

    /// Checks that the leaves tile the paragraph's tokens exactly.
    pub fn check_alignment(&self, paragraph: &Paragraph) -> Result<(), DiscourseError> {
        let leaves = self.leaves();
        let lens: Vec<usize> = paragraph.sentences.iter().map(Vec::len).collect();
        let first = leaves
            .first()
            .ok_or_else(|| DiscourseError::Invalid("tree has no leaves".into()))?;
        if (first.sentence, first.start) != (0, 0) {
            return Err(DiscourseError::Align(format!(
                "first EDU starts at {}:{}, expected 0:0",
                first.sentence, first.start
            )));
        }
        for span in &leaves {
            let len = *lens.get(span.sentence).ok_or_else(|| {
                DiscourseError::Align(format!("sentence {} out of range", span.sentence))
            })?;
            if span.end >= len {
                return Err(DiscourseError::Align(format!(
                    "span {}:{}-{} exceeds sentence length {}",
                    span.sentence, span.start, span.end, len
                )));
            }
        }
        for w in leaves.windows(2) {
            let (a, b) = (w[0], w[1]);
            let contiguous = if b.sentence == a.sentence {
                b.start == a.end + 1
            } else {
                b.sentence == a.sentence + 1 && a.end + 1 == lens[a.sentence] && b.start == 0
            };
            if !contiguous {
                return Err(DiscourseError::Align(format!(
                    "gap between {}:{}-{} and {}:{}-{}",
                    a.sentence, a.start, a.end, b.sentence, b.start, b.end
                )));
            }
        }
        let last = leaves.last().expect("non-empty");
        if last.sentence != lens.len() - 1 || last.end + 1 != lens[last.sentence] {
            return Err(DiscourseError::Align(format!(
                "last EDU ends at {}:{}, paragraph has {} sentences",
                last.sentence,
                last.end,
                lens.len()
            )));
        }
        Ok(())
    }
}

fn validate_node(node: &RstNode) -> Result<(), DiscourseError> {
    if let RstNode::Internal { relation, children } = node {
        if children.len() < 2 {
            return Err(DiscourseError::Invalid(format!(
                "internal node {relation:?} has {} children",
                children.len()
            )));
        }
        if !children
            .iter()
            .any(|c| c.nuclearity == Nuclearity::Nucleus)
        {
            return Err(DiscourseError::Invalid(format!(
                "internal node {relation:?} has no nucleus child"
            )));
        }
        for c in children {
            validate_node(&c.node)?;
        }
    }
    Ok(())
}
