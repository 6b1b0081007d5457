//! Dependency-tree view over CoNLL sentences.
//!
//! A tree stores heads, relation labels, and POS tags indexed by 1-based
//! token position. Multiple tokens may attach to the artificial root
//! (index 0); that is a real treebank convention for punctuation. What is
//! rejected is any token that cannot reach the root, i.e. cycles.

use thiserror::Error;

use crate::conll::ConllSentence;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("token {token}: head {head} out of range 0..={len}")]
    HeadOutOfRange { token: usize, head: usize, len: usize },
    #[error("token {token} does not reach the root (cycle)")]
    Cycle { token: usize },
    #[error("token {token}: missing {what} annotation")]
    MissingAnnotation { token: usize, what: &'static str },
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
}

/// Which side of its head a dependent sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "L",
            Side::Right => "R",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepTree {
    heads: Vec<usize>,
    relations: Vec<String>,
    pos: Vec<String>,
}

impl DepTree {
    /// Build and validate a tree from parallel arrays (index 0 = token 1).
    pub fn new(heads: Vec<usize>, relations: Vec<String>, pos: Vec<String>) -> Result<Self, TreeError> {
        assert_eq!(heads.len(), relations.len());
        assert_eq!(heads.len(), pos.len());
        let tree = DepTree { heads, relations, pos };
        tree.validate()?;
        Ok(tree)
    }

    fn validate(&self) -> Result<(), TreeError> {
        let n = self.len();
        for (k, &h) in self.heads.iter().enumerate() {
            if h > n {
                return Err(TreeError::HeadOutOfRange { token: k + 1, head: h, len: n });
            }
            if h == k + 1 {
                return Err(TreeError::Cycle { token: k + 1 });
            }
        }
        // Every token must reach the root in at most n steps.
        for start in 1..=n {
            let mut cur = start;
            let mut steps = 0;
            while cur != 0 {
                cur = self.heads[cur - 1];
                steps += 1;
                if steps > n {
                    return Err(TreeError::Cycle { token: start });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    /// Head of token `i` (1-based); 0 is the root.
    pub fn head(&self, i: usize) -> usize {
        self.heads[i - 1]
    }

    pub fn relation(&self, i: usize) -> &str {
        &self.relations[i - 1]
    }

    pub fn pos(&self, i: usize) -> &str {
        &self.pos[i - 1]
    }

    /// Dependents of token `i` in surface order, with relation and side.
    pub fn dependents_of(&self, i: usize) -> Result<Vec<(usize, &str, Side)>, TreeError> {
        if i == 0 || i > self.len() {
            return Err(TreeError::IndexOutOfRange { index: i, len: self.len() });
        }
        Ok(self
            .heads
            .iter()
            .enumerate()
            .filter(|&(_, &h)| h == i)
            .map(|(k, _)| {
                let j = k + 1;
                let side = if j < i { Side::Left } else { Side::Right };
                (j, self.relations[k].as_str(), side)
            })
            .collect())
    }
}

/// Extract the tree of a sentence from its gold or predicted columns.
pub fn tree_from_sentence(s: &ConllSentence, use_predicted: bool) -> Result<DepTree, TreeError> {
    let mut heads = Vec::with_capacity(s.len());
    let mut relations = Vec::with_capacity(s.len());
    let mut pos = Vec::with_capacity(s.len());
    for t in s.tokens() {
        if use_predicted {
            heads.push(t.phead.ok_or(TreeError::MissingAnnotation { token: t.id, what: "PHEAD" })?);
            relations.push(
                t.pdeprel
                    .clone()
                    .ok_or(TreeError::MissingAnnotation { token: t.id, what: "PDEPREL" })?,
            );
            pos.push(t.ppos.clone().unwrap_or_else(|| "_".to_string()));
        } else {
            heads.push(t.head);
            relations.push(t.deprel.clone());
            pos.push(t.pos.clone().unwrap_or_else(|| "_".to_string()));
        }
    }
    DepTree::new(heads, relations, pos)
}
