//! Dependency-based supertagging and semantic role labeling.
//!
//! The pipeline reads CoNLL-2009 treebanks, extracts supertags under four
//! rule systems (Model 0, Model 1, Model 2, Model TAG), trains a
//! character-CNN + BiLSTM supertagger, and feeds supertags into a highway
//! BiLSTM role labeler. Everything runs on a small reverse-mode autodiff
//! engine so models are trainable and gradient-checkable on one CPU.

pub mod autodiff;
pub mod conll;
pub mod embeddings;
pub mod supertags;
pub mod synth;
pub mod tensor;
pub mod treebank;

pub use conll::{ConllError, ConllSentence, ConllToken};
pub use embeddings::EmbeddingTable;
pub use supertags::{ObligatorySet, Supertag, SupertagModel, SupertagVocab};
pub use synth::SynthConfig;
pub use tensor::Tensor;
pub use treebank::DepTree;
