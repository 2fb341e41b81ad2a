//! JSON germ files.
//!
//! ```json
//! {"kind":"smooth","branches":[{"coeff":"1/2"}],"contacts":[[0,1,3]]}
//! {"kind":"singular","graph":{"weights":[2,2],"edges":[[0,1]]},
//!  "attachments":[{"coeff":"1/2","host":0}],"contacts":[]}
//! ```
//!
//! Rationals are `p/q` or integer strings. Serialisation is canonical, so
//! serialising a parsed canonical file reproduces it byte for byte.

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mld_engine::{Attachment, SingularGerm};
use crate::rational::{serde_q, Q};
use crate::smooth_germ::{Branch, BranchId, ContactTable, SmoothGerm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GermFileError {
    #[error("malformed germ file: {0}")]
    Syntax(String),
    #[error("invalid germ file: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Germ {
    Smooth(SmoothGerm),
    Singular(SingularGerm),
}

#[derive(Serialize, Deserialize)]
struct CoeffEntry {
    #[serde(with = "serde_q")]
    coeff: Q,
}

#[derive(Serialize, Deserialize)]
struct AttachmentEntry {
    #[serde(with = "serde_q")]
    coeff: Q,
    host: usize,
}

#[derive(Serialize, Deserialize)]
struct GraphEntry {
    weights: Vec<u32>,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum GermFile {
    Smooth {
        branches: Vec<CoeffEntry>,
        #[serde(default)]
        contacts: Vec<(u32, u32, u32)>,
    },
    Singular {
        graph: GraphEntry,
        #[serde(default)]
        attachments: Vec<AttachmentEntry>,
        #[serde(default)]
        contacts: Vec<(u32, u32, u32)>,
    },
}

fn contacts_of(t: &ContactTable) -> Vec<(u32, u32, u32)> {
    t.entries().map(|(i, j, c)| (i.0, j.0, c)).collect()
}

fn table(n: usize, entries: &[(u32, u32, u32)]) -> Result<ContactTable, GermFileError> {
    let mut t = ContactTable::default();
    for &(i, j, c) in entries {
        if i as usize >= n || j as usize >= n || i == j {
            return Err(GermFileError::Invalid(format!("contact [{i},{j},{c}] names bad branches")));
        }
        t.set(BranchId(i), BranchId(j), c);
    }
    Ok(t)
}

pub fn parse(text: &str) -> Result<Germ, GermFileError> {
    let file: GermFile = serde_json::from_str(text).map_err(|e| GermFileError::Syntax(e.to_string()))?;
    match file {
        GermFile::Smooth { branches, contacts } => {
            let branches: Vec<Branch> = branches
                .into_iter()
                .enumerate()
                .map(|(i, e)| Branch { id: BranchId(i as u32), coefficient: e.coeff })
                .collect();
            let contacts = table(branches.len(), &contacts)?;
            let germ = SmoothGerm { branches, contacts, ambient: vec![] };
            germ.validate_boundary().map_err(|e| GermFileError::Invalid(e.to_string()))?;
            Ok(Germ::Smooth(germ))
        }
        GermFile::Singular { graph, attachments, contacts } => {
            let n = graph.weights.len();
            if let Some(&(i, j)) = graph.edges.iter().find(|(i, j)| *i >= n || *j >= n || i == j) {
                return Err(GermFileError::Invalid(format!("edge [{i},{j}] is out of range")));
            }
            if let Some(a) = attachments.iter().find(|a| a.host >= n) {
                return Err(GermFileError::Invalid(format!("host {} is out of range", a.host)));
            }
            if let Some(i) = attachments.iter().position(|a| !a.coeff.is_positive() || a.coeff > Q::one()) {
                return Err(GermFileError::Invalid(format!("attachment {i} has coefficient outside (0, 1]")));
            }
            let contacts = table(attachments.len(), &contacts)?;
            Ok(Germ::Singular(SingularGerm {
                weights: graph.weights,
                edges: graph.edges,
                attachments: attachments
                    .into_iter()
                    .map(|a| Attachment { coefficient: a.coeff, host: a.host })
                    .collect(),
                contacts,
            }))
        }
    }
}

/// Canonical single-line JSON followed by a newline.
pub fn serialize(germ: &Germ) -> String {
    let file = match germ {
        Germ::Smooth(g) => GermFile::Smooth {
            branches: g.branches.iter().map(|b| CoeffEntry { coeff: b.coefficient.clone() }).collect(),
            contacts: contacts_of(&g.contacts),
        },
        Germ::Singular(g) => GermFile::Singular {
            graph: GraphEntry { weights: g.weights.clone(), edges: g.edges.clone() },
            attachments: g
                .attachments
                .iter()
                .map(|a| AttachmentEntry { coeff: a.coefficient.clone(), host: a.host })
                .collect(),
            contacts: contacts_of(&g.contacts),
        },
    };
    let mut s = serde_json::to_string(&file).expect("germ files always serialise");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trip() {
        for text in [
            "{\"kind\":\"smooth\",\"branches\":[{\"coeff\":\"1/2\"},{\"coeff\":\"3/4\"}],\"contacts\":[[0,1,3]]}\n",
            "{\"kind\":\"singular\",\"graph\":{\"weights\":[2,2],\"edges\":[[0,1]]},\"attachments\":[{\"coeff\":\"1/2\",\"host\":0}],\"contacts\":[]}\n",
        ] {
            let g = parse(text).unwrap();
            assert_eq!(serialize(&g), text);
        }
    }

    #[test]
    fn rejects_floats_and_bad_indices() {
        assert!(matches!(parse("{\"kind\":\"smooth\",\"branches\":[{\"coeff\":\"0.5\"}]}"), Err(GermFileError::Syntax(_))));
        assert!(matches!(parse("{\"kind\":\"smooth\",\"branches\":[{\"coeff\":0.5}]}"), Err(GermFileError::Syntax(_))));
        assert!(matches!(
            parse("{\"kind\":\"singular\",\"graph\":{\"weights\":[2],\"edges\":[[0,1]]}}"),
            Err(GermFileError::Invalid(_))
        ));
        assert!(matches!(parse("{\"kind\":\"conic\"}"), Err(GermFileError::Syntax(_))));
    }
}
