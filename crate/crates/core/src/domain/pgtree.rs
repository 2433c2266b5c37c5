//! Two-layer writing-guideline tree for the detailed description.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::DomainError;

/// Position of a guideline node: section `i`, subsection `j`, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId {
    pub section: usize,
    pub subsection: usize,
}

impl NodeId {
    pub fn new(section: usize, subsection: usize) -> Self {
        Self {
            section,
            subsection,
        }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.section, self.subsection)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuidelineNode {
    pub section_index: usize,
    pub subsection_index: usize,
    pub guideline_text: String,
}

impl GuidelineNode {
    pub fn id(&self) -> NodeId {
        NodeId::new(self.section_index, self.subsection_index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionPlan {
    pub section_index: usize,
    pub section_overview: String,
    pub subsections: Vec<GuidelineNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PgTreeRaw")]
pub struct PgTree {
    sections: Vec<SectionPlan>,
}

#[derive(Deserialize)]
struct PgTreeRaw {
    sections: Vec<SectionPlan>,
}

impl TryFrom<PgTreeRaw> for PgTree {
    type Error = DomainError;

    fn try_from(raw: PgTreeRaw) -> Result<Self, Self::Error> {
        PgTree::new(raw.sections)
    }
}

impl PgTree {
    /// Validates indices (contiguous from 1 at both levels) and non-empty
    /// guideline texts.
    pub fn new(sections: Vec<SectionPlan>) -> Result<Self, DomainError> {
        if sections.is_empty() {
            return Err(DomainError::InvalidTree("tree has no sections".into()));
        }
        for (i, s) in sections.iter().enumerate() {
            if s.section_index != i + 1 {
                return Err(DomainError::InvalidTree(format!(
                    "section at position {} has index {}",
                    i + 1,
                    s.section_index
                )));
            }
            if s.subsections.is_empty() {
                return Err(DomainError::InvalidTree(format!(
                    "section {} has no subsections",
                    s.section_index
                )));
            }
            for (j, n) in s.subsections.iter().enumerate() {
                if n.section_index != s.section_index || n.subsection_index != j + 1 {
                    return Err(DomainError::InvalidTree(format!(
                        "node {}.{} misplaced under section {} at position {}",
                        n.section_index,
                        n.subsection_index,
                        s.section_index,
                        j + 1
                    )));
                }
                if n.guideline_text.trim().is_empty() {
                    return Err(DomainError::InvalidTree(format!(
                        "node {} has an empty guideline",
                        n.id()
                    )));
                }
            }
        }
        Ok(Self { sections })
    }

    /// One guideline per section, each equal to the section text.
    pub fn single_layer(first_level: &[(usize, String)]) -> Result<Self, DomainError> {
        Self::new(
            first_level
                .iter()
                .map(|(k, text)| SectionPlan {
                    section_index: *k,
                    section_overview: text.clone(),
                    subsections: vec![GuidelineNode {
                        section_index: *k,
                        subsection_index: 1,
                        guideline_text: text.clone(),
                    }],
                })
                .collect(),
        )
    }

    pub fn sections(&self) -> &[SectionPlan] {
        &self.sections
    }

    /// m
    pub fn section_count(&self) -> usize {
        self.sections.len()
    }

    /// (t_1, ..., t_m)
    pub fn shape(&self) -> Vec<usize> {
        self.sections.iter().map(|s| s.subsections.len()).collect()
    }

    /// Σ t_i
    pub fn node_count(&self) -> usize {
        self.sections.iter().map(|s| s.subsections.len()).sum()
    }

    /// Nodes in traversal order: section by section, subsection by subsection.
    pub fn nodes(&self) -> impl Iterator<Item = &GuidelineNode> {
        self.sections.iter().flat_map(|s| s.subsections.iter())
    }

    pub fn node(&self, id: NodeId) -> Option<&GuidelineNode> {
        self.sections
            .get(id.section.checked_sub(1)?)?
            .subsections
            .get(id.subsection.checked_sub(1)?)
    }

    pub fn contains(&self, node: &GuidelineNode) -> bool {
        self.node(node.id()) == Some(node)
    }

    /// Whole-tree text used as the guideline overview in writer prompts.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.sections {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&format!("Section {}: {}\n", s.section_index, s.section_overview.trim()));
            for n in &s.subsections {
                out.push_str(&format!(
                    "  Subsection {}.{}: {}\n",
                    n.section_index,
                    n.subsection_index,
                    n.guideline_text.trim()
                ));
            }
        }
        out.trim_end().to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(i: usize, j: usize) -> GuidelineNode {
        GuidelineNode {
            section_index: i,
            subsection_index: j,
            guideline_text: format!("g{i}{j}"),
        }
    }

    #[test]
    fn shape_and_traversal() {
        let tree = PgTree::new(vec![
            SectionPlan {
                section_index: 1,
                section_overview: "first".into(),
                subsections: vec![node(1, 1), node(1, 2)],
            },
            SectionPlan {
                section_index: 2,
                section_overview: "second".into(),
                subsections: vec![node(2, 1), node(2, 2), node(2, 3)],
            },
        ])
        .unwrap();
        assert_eq!(tree.shape(), vec![2, 3]);
        assert_eq!(tree.node_count(), 5);
        let ids: Vec<String> = tree.nodes().map(|n| n.id().to_string()).collect();
        assert_eq!(ids, ["1.1", "1.2", "2.1", "2.2", "2.3"]);
        assert!(tree.contains(&node(2, 3)));
        assert!(!tree.contains(&node(3, 1)));
        assert!(tree.render().contains("Subsection 2.3: g23"));
    }

    #[test]
    fn rejects_bad_trees() {
        assert!(PgTree::new(vec![]).is_err());
        let empty_section = SectionPlan {
            section_index: 1,
            section_overview: "x".into(),
            subsections: vec![],
        };
        assert!(PgTree::new(vec![empty_section]).is_err());
        let gap = SectionPlan {
            section_index: 1,
            section_overview: "x".into(),
            subsections: vec![node(1, 2)],
        };
        assert!(PgTree::new(vec![gap]).is_err());
    }

    #[test]
    fn single_layer_has_one_node_per_section() {
        let tree = PgTree::single_layer(&[(1, "a".into()), (2, "b".into()), (3, "c".into())]).unwrap();
        assert_eq!(tree.shape(), vec![1, 1, 1]);
        assert_eq!(tree.node(NodeId::new(2, 1)).unwrap().guideline_text, "b");
    }
}
