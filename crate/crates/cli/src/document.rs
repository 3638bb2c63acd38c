//! The JSON tree document.
//!
//! ```json
//! {
//!   "root": "v0",
//!   "vertices": [
//!     {"id": "v0", "edges": [{"to": "v1", "label": "theta0"}, {"to": "v2", "label": "theta1"}]}
//!   ],
//!   "atom_names": ["p1", "p2"]
//! }
//! ```
//!
//! Leaves need not be listed. Stages come only from shared label names; the
//! optional `stages` field written by `export --annotate-stages` is ignored
//! when reading.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use stagedtree::tree::{StagedTree, TreeGraph};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDocument {
    pub root: String,
    pub vertices: Vec<VertexEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: String,
    #[serde(default)]
    pub edges: Vec<EdgeEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub to: String,
    pub label: String,
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("parse error in `{field}`: {message}")]
    Field { field: String, message: String },

    #[error(transparent)]
    Invalid(#[from] stagedtree::error::Error),
}

impl TreeDocument {
    pub fn to_graph(&self) -> Result<TreeGraph, DocumentError> {
        let mut seen = BTreeSet::new();
        let mut g = TreeGraph::new(&self.root);
        for (n, v) in self.vertices.iter().enumerate() {
            if !seen.insert(v.id.as_str()) {
                return Err(DocumentError::Field {
                    field: format!("vertices[{n}].id"),
                    message: format!("vertex `{}` is listed twice", v.id),
                });
            }
            g.add_vertex(&v.id);
            for e in &v.edges {
                g.add_edge(&v.id, &e.to, &e.label);
            }
        }
        if let Some(names) = &self.atom_names {
            g.set_atom_names(names.clone());
        }
        Ok(g)
    }

    pub fn from_tree(t: &StagedTree) -> Self {
        let g = t.to_graph();
        let vertices = g
            .vertex_names()
            .iter()
            .filter_map(|v| {
                let edges: Vec<EdgeEntry> = g
                    .edges_of(v)
                    .into_iter()
                    .map(|(to, label)| EdgeEntry {
                        to: to.to_string(),
                        label: label.to_string(),
                    })
                    .collect();
                (!edges.is_empty()).then(|| VertexEntry {
                    id: v.clone(),
                    edges,
                })
            })
            .collect();
        TreeDocument {
            root: g.root().to_string(),
            vertices,
            atom_names: g.atom_names().map(|a| a.to_vec()),
            stages: None,
        }
    }

    pub fn with_stage_annotations(mut self, t: &StagedTree) -> Self {
        self.stages = Some(
            t.stage_classes()
                .classes
                .iter()
                .map(|c| c.vertices.iter().map(|&v| t.name(v).to_string()).collect())
                .collect(),
        );
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serialises");
        s.push('\n');
        s
    }
}

pub fn parse_document(text: &str) -> Result<TreeDocument, DocumentError> {
    serde_json::from_str(text).map_err(|e| {
        let full = e.to_string();
        let message = match full.rfind(" at line ") {
            Some(i) => full[..i].to_string(),
            None => full,
        };
        DocumentError::Syntax {
            line: e.line(),
            column: e.column(),
            message,
        }
    })
}

/// Parses and validates a tree document.
pub fn parse_tree_document(text: &str) -> Result<StagedTree, DocumentError> {
    Ok(parse_document(text)?.to_graph()?.build()?)
}
