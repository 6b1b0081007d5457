//! Seeded synthetic treebank generator for desk-scale experiments.
//!
//! Sentences are drawn from a configurable relation alphabet. Obligatory
//! relations attach only under verb-POS heads, and when role emission is
//! on, every verb becomes a predicate whose obligatory dependents carry
//! core roles determined by their relation (first obligatory relation in
//! the config maps to A0, the second to A1, and so on) while a random
//! subset of its optional dependents carries AM. Roles therefore follow
//! the latent syntax by construction, which is exactly what makes
//! supertags informative for the labeler.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::conll::{ConllSentence, ConllToken};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationSpec {
    pub name: String,
    pub weight: f64,
    pub obligatory: bool,
}

impl RelationSpec {
    pub fn new(name: &str, weight: f64, obligatory: bool) -> Self {
        RelationSpec {
            name: name.to_string(),
            weight,
            obligatory,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub sentences: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub relations: Vec<RelationSpec>,
    /// Probability that a token is a verb (POS `VB`).
    pub verb_prob: f64,
    pub projective: bool,
    /// Emit FILLPRED/PRED/APRED columns.
    pub emit_roles: bool,
    /// Probability that an optional dependent of a predicate carries AM.
    pub am_prob: f64,
    /// Number of distinct word forms per POS family.
    pub word_variety: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            sentences: 100,
            min_len: 3,
            max_len: 10,
            relations: vec![
                RelationSpec::new("SBJ", 3.0, true),
                RelationSpec::new("OBJ", 3.0, true),
                RelationSpec::new("PRD", 1.0, true),
                RelationSpec::new("VC", 1.0, true),
                RelationSpec::new("NMOD", 4.0, false),
                RelationSpec::new("ADV", 2.0, false),
                RelationSpec::new("DEP", 1.0, false),
                RelationSpec::new("P", 2.0, false),
            ],
            verb_prob: 0.3,
            projective: true,
            emit_roles: true,
            am_prob: 0.25,
            word_variety: 20,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: &str| Err(SynthError::InvalidConfig(msg.to_string()));
        if self.min_len == 0 || self.min_len > self.max_len {
            return fail("length range is empty");
        }
        if self.relations.is_empty() {
            return fail("relation alphabet is empty");
        }
        if self.relations.iter().any(|r| r.weight <= 0.0) {
            return fail("relation weights must be positive");
        }
        if !self.relations.iter().any(|r| !r.obligatory) {
            return fail("at least one non-obligatory relation is required");
        }
        if !(0.0..=1.0).contains(&self.verb_prob) || !(0.0..=1.0).contains(&self.am_prob) {
            return fail("probabilities must lie in [0,1]");
        }
        if self.word_variety == 0 {
            return fail("word_variety must be positive");
        }
        Ok(())
    }

    /// Obligatory relation names in config order; index = core role number.
    pub fn obligatory_relations(&self) -> Vec<&str> {
        self.relations
            .iter()
            .filter(|r| r.obligatory)
            .map(|r| r.name.as_str())
            .collect()
    }
}

const NON_VERB_POS: [&str; 4] = ["NN", "JJ", "RB", "DT"];
const VERB_POS: &str = "VB";

/// Generate a corpus. The seed fully determines the output.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<Vec<ConllSentence>, SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sentences = Vec::with_capacity(cfg.sentences);
    for _ in 0..cfg.sentences {
        sentences.push(one_sentence(cfg, &mut rng));
    }
    Ok(sentences)
}

fn one_sentence(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> ConllSentence {
    let n = rng.random_range(cfg.min_len..=cfg.max_len);

    let pos: Vec<&str> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < cfg.verb_prob {
                VERB_POS
            } else {
                NON_VERB_POS[rng.random_range(0..NON_VERB_POS.len())]
            }
        })
        .collect();

    let heads = if cfg.projective {
        let mut heads = vec![0usize; n];
        projective_span(rng, 1, n, 0, &mut heads);
        heads
    } else {
        random_attachment(rng, n)
    };

    // Relations: obligatory ones only under verb heads.
    let oblig: Vec<&RelationSpec> = cfg.relations.iter().filter(|r| r.obligatory).collect();
    let optional: Vec<&RelationSpec> = cfg.relations.iter().filter(|r| !r.obligatory).collect();
    let relations: Vec<String> = (0..n)
        .map(|k| {
            if heads[k] == 0 {
                "ROOT".to_string()
            } else if pos[heads[k] - 1] == VERB_POS {
                weighted_pick(rng, &oblig, &optional, true)
            } else {
                weighted_pick(rng, &oblig, &optional, false)
            }
        })
        .collect();

    let forms: Vec<String> = pos
        .iter()
        .map(|p| format!("{}{}", p.to_lowercase(), rng.random_range(0..cfg.word_variety)))
        .collect();

    // Roles.
    let predicates: Vec<usize> = if cfg.emit_roles {
        (1..=n).filter(|&i| pos[i - 1] == VERB_POS).collect()
    } else {
        Vec::new()
    };
    let role_of_relation = cfg.obligatory_relations();
    let mut apreds: Vec<Vec<Option<String>>> = vec![vec![None; predicates.len()]; n];
    for (j, &p) in predicates.iter().enumerate() {
        for t in 1..=n {
            if heads[t - 1] != p {
                continue;
            }
            let rel = relations[t - 1].as_str();
            if let Some(k) = role_of_relation.iter().position(|r| *r == rel) {
                apreds[t - 1][j] = Some(format!("A{k}"));
            } else if rng.random::<f64>() < cfg.am_prob {
                apreds[t - 1][j] = Some("AM".to_string());
            }
        }
    }

    let tokens: Vec<ConllToken> = (0..n)
        .map(|k| {
            let i = k + 1;
            let is_pred = predicates.contains(&i);
            ConllToken {
                id: i,
                form: forms[k].clone(),
                lemma: Some(forms[k].clone()),
                plemma: Some(forms[k].clone()),
                pos: Some(pos[k].to_string()),
                ppos: Some(pos[k].to_string()),
                feat: None,
                pfeat: None,
                head: heads[k],
                phead: Some(heads[k]),
                deprel: relations[k].clone(),
                pdeprel: Some(relations[k].clone()),
                fillpred: is_pred,
                pred: if is_pred {
                    Some(format!("{}.01", forms[k]))
                } else {
                    None
                },
                apreds: apreds[k].clone(),
            }
        })
        .collect();

    ConllSentence::new(tokens).expect("generated sentence is valid by construction")
}

/// Attach every token in `lo..=hi` under `parent`, projectively: the span
/// head attaches to `parent`, and the rest of the span splits into
/// contiguous sub-spans attached under the span head.
fn projective_span(rng: &mut ChaCha8Rng, lo: usize, hi: usize, parent: usize, heads: &mut [usize]) {
    if lo > hi {
        return;
    }
    let h = rng.random_range(lo..=hi);
    heads[h - 1] = parent;
    let mut start = lo;
    while start < h {
        let end = rng.random_range(start..h);
        projective_span(rng, start, end, h, heads);
        start = end + 1;
    }
    let mut start = h + 1;
    while start <= hi {
        let end = rng.random_range(start..=hi);
        projective_span(rng, start, end, h, heads);
        start = end + 1;
    }
}

/// Uniform random attachment to any previously placed token; often
/// non-projective, always acyclic.
fn random_attachment(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut heads = vec![0usize; n];
    for (k, &tok) in order.iter().enumerate() {
        if k == 0 {
            heads[tok - 1] = 0;
        } else {
            heads[tok - 1] = order[rng.random_range(0..k)];
        }
    }
    heads
}

fn weighted_pick(
    rng: &mut ChaCha8Rng,
    oblig: &[&RelationSpec],
    optional: &[&RelationSpec],
    allow_oblig: bool,
) -> String {
    let pool: Vec<&RelationSpec> = if allow_oblig {
        oblig.iter().chain(optional.iter()).copied().collect()
    } else {
        optional.to_vec()
    };
    let total: f64 = pool.iter().map(|r| r.weight).sum();
    let mut x = rng.random::<f64>() * total;
    for r in &pool {
        x -= r.weight;
        if x <= 0.0 {
            return r.name.clone();
        }
    }
    pool.last().expect("pool is nonempty").name.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conll::serialize_conll2009;
    use crate::treebank::{tree_from_sentence, DepTree};

    #[test]
    fn same_seed_gives_byte_identical_corpora() {
        let cfg = SynthConfig { sentences: 30, seed: 7, ..SynthConfig::default() };
        let a = serialize_conll2009(&generate_synthetic(&cfg).unwrap());
        let b = serialize_conll2009(&generate_synthetic(&cfg).unwrap());
        assert_eq!(a, b);
        let other = SynthConfig { sentences: 30, seed: 8, ..SynthConfig::default() };
        let c = serialize_conll2009(&generate_synthetic(&other).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn unit_length_range_gives_single_root_sentences() {
        let cfg = SynthConfig {
            sentences: 20,
            min_len: 1,
            max_len: 1,
            ..SynthConfig::default()
        };
        for s in generate_synthetic(&cfg).unwrap() {
            assert_eq!(s.len(), 1);
            assert_eq!(s.token(1).head, 0);
            assert_eq!(s.token(1).deprel, "ROOT");
        }
    }

    #[test]
    fn every_generated_sentence_is_a_valid_tree() {
        let cfg = SynthConfig { sentences: 200, seed: 7, ..SynthConfig::default() };
        for s in generate_synthetic(&cfg).unwrap() {
            tree_from_sentence(&s, false).expect("gold tree valid");
            tree_from_sentence(&s, true).expect("predicted tree valid");
        }
    }

    #[test]
    fn obligatory_relations_only_under_verbs() {
        let cfg = SynthConfig { sentences: 100, seed: 3, ..SynthConfig::default() };
        let oblig = cfg.obligatory_relations();
        for s in generate_synthetic(&cfg).unwrap() {
            for t in s.tokens() {
                if t.head == 0 {
                    continue;
                }
                if oblig.contains(&t.deprel.as_str()) {
                    assert_eq!(s.token(t.head).pos.as_deref(), Some("VB"));
                }
            }
        }
    }

    #[test]
    fn roles_follow_obligatory_dependents() {
        let cfg = SynthConfig { sentences: 60, seed: 11, ..SynthConfig::default() };
        let oblig = cfg.obligatory_relations();
        for s in generate_synthetic(&cfg).unwrap() {
            let preds = s.predicates();
            for t in s.tokens() {
                for (j, role) in t.apreds.iter().enumerate() {
                    let p = preds[j];
                    match role.as_deref() {
                        Some(r) if r.starts_with('A') && r != "AM" => {
                            // Core role index matches the relation.
                            assert_eq!(t.head, p);
                            let k: usize = r[1..].parse().unwrap();
                            assert_eq!(oblig[k], t.deprel.as_str());
                        }
                        Some("AM") => {
                            assert_eq!(t.head, p);
                            assert!(!oblig.contains(&t.deprel.as_str()));
                        }
                        Some(other) => panic!("unexpected role {other}"),
                        None => {}
                    }
                }
            }
        }
    }

    #[test]
    fn mutating_one_head_into_a_cycle_flips_validation() {
        let cfg = SynthConfig { sentences: 10, seed: 5, min_len: 3, ..SynthConfig::default() };
        for s in generate_synthetic(&cfg).unwrap() {
            let tree = tree_from_sentence(&s, false).unwrap();
            // Find an arc head(b) = a and reverse it so a <-> b.
            let b = (1..=tree.len()).find(|&j| tree.head(j) != 0).unwrap();
            let a = tree.head(b);
            let mut heads: Vec<usize> = (1..=tree.len()).map(|i| tree.head(i)).collect();
            heads[a - 1] = b;
            let rels: Vec<String> = (1..=tree.len()).map(|i| tree.relation(i).to_string()).collect();
            let pos: Vec<String> = (1..=tree.len()).map(|i| tree.pos(i).to_string()).collect();
            assert!(DepTree::new(heads, rels, pos).is_err());
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = SynthConfig { min_len: 5, max_len: 3, ..SynthConfig::default() };
        assert!(generate_synthetic(&cfg).is_err());
        cfg = SynthConfig::default();
        cfg.relations.retain(|r| r.obligatory);
        assert!(generate_synthetic(&cfg).is_err());
    }

    #[test]
    fn non_projective_mode_also_generates_valid_trees() {
        let cfg = SynthConfig {
            sentences: 50,
            projective: false,
            seed: 2,
            ..SynthConfig::default()
        };
        for s in generate_synthetic(&cfg).unwrap() {
            tree_from_sentence(&s, false).unwrap();
        }
    }
}
