//! Dependency-based supertags: extraction, string form, projection,
//! consistency checking, vocabulary statistics, and the `.stags` sidecar
//! format.
//!
//! Four rule systems are supported. Model 0 records the relation and
//! direction of a token's head. Model 1 adds on which sides the token has
//! dependents. Model 2 replaces the direction flags with the relations of
//! obligatory dependents when there are any, falling back to Model 1 flags
//! otherwise. Model TAG omits the head component for tokens whose own
//! relation is obligatory and records obligatory dependents only for
//! verbs.
//!
//! Tag strings are bit-exact contracts: `ROOT+L_R`, `ROOT+SBJ/L_PRD/R`,
//! `SBJ/R+L`, `-`, `-+OBJ/R`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::treebank::{DepTree, Side};

#[derive(Debug, Error)]
pub enum TagError {
    #[error("token {token}: relation {relation:?} contains a reserved character (/ + _)")]
    ReservedChar { token: usize, relation: String },
    #[error("cannot parse tag {tag:?}: {msg}")]
    Parse { tag: String, msg: String },
    #[error("no projection from {from} to {to}")]
    UnsupportedProjection { from: SupertagModel, to: SupertagModel },
    #[error(".stags sentence {sentence}: {msg}")]
    Sidecar { sentence: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SupertagModel {
    Model0,
    Model1,
    Model2,
    ModelTag,
}

impl SupertagModel {
    pub const ALL: [SupertagModel; 4] = [
        SupertagModel::Model0,
        SupertagModel::Model1,
        SupertagModel::Model2,
        SupertagModel::ModelTag,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SupertagModel::Model0 => "0",
            SupertagModel::Model1 => "1",
            SupertagModel::Model2 => "2",
            SupertagModel::ModelTag => "tag",
        }
    }
}

impl fmt::Display for SupertagModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SupertagModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "0" => Ok(SupertagModel::Model0),
            "1" => Ok(SupertagModel::Model1),
            "2" => Ok(SupertagModel::Model2),
            "tag" | "TAG" => Ok(SupertagModel::ModelTag),
            other => Err(format!("unknown supertag model {other:?} (expected 0, 1, 2 or tag)")),
        }
    }
}

/// Obligatory relations plus the POS prefixes that identify verbs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObligatorySet {
    relations: BTreeSet<String>,
    verb_pos_prefixes: Vec<String>,
}

impl ObligatorySet {
    pub fn new<R, P>(relations: R, verb_pos_prefixes: P) -> Self
    where
        R: IntoIterator<Item = String>,
        P: IntoIterator<Item = String>,
    {
        let relations: BTreeSet<String> = relations.into_iter().collect();
        assert!(!relations.is_empty(), "obligatory relation set must be nonempty");
        ObligatorySet {
            relations,
            verb_pos_prefixes: verb_pos_prefixes.into_iter().collect(),
        }
    }

    /// English CoNLL-2009: SBJ, OBJ, PRD, VC; PTB verb tags start with V.
    pub fn english() -> Self {
        ObligatorySet::new(
            ["SBJ", "OBJ", "PRD", "VC"].map(String::from),
            ["V".to_string()],
        )
    }

    /// Spanish CoNLL-2009: dc, suj, cd, cpred; verb tags start with v.
    pub fn spanish() -> Self {
        ObligatorySet::new(
            ["dc", "suj", "cd", "cpred"].map(String::from),
            ["v".to_string()],
        )
    }

    pub fn contains(&self, relation: &str) -> bool {
        self.relations.contains(relation)
    }

    pub fn is_verb(&self, pos: &str) -> bool {
        self.verb_pos_prefixes.iter().any(|p| pos.starts_with(p.as_str()))
    }

    pub fn relations(&self) -> impl Iterator<Item = &str> {
        self.relations.iter().map(|s| s.as_str())
    }
}

/// Sides on which dependents exist. At least one flag is set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DirFlags {
    pub left: bool,
    pub right: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum HeadPart {
    Root,
    Relation { relation: String, side: Side },
    /// Model TAG drops the head component when the token's own relation
    /// is obligatory; rendered `-`.
    Omitted,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DepPart {
    None,
    Flags(DirFlags),
    /// Obligatory dependents in surface order. `flags` records the sides
    /// of the remaining optional dependents and is only populated under
    /// the opt-in Model 2 variant (see [`ExtractOptions`]).
    Obligatory {
        items: Vec<(String, Side)>,
        flags: Option<DirFlags>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Supertag {
    pub model: SupertagModel,
    pub head: HeadPart,
    pub deps: DepPart,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExtractOptions {
    /// Model 2 variant: alongside a nonempty obligatory list, also record
    /// the direction flags of the token's optional dependents. Off by
    /// default; the standard rule falls back to flags only when the
    /// obligatory list is empty.
    pub optional_flags_with_obligatory: bool,
}

/// One supertag per token under the standard extraction rules.
pub fn extract(
    tree: &DepTree,
    model: SupertagModel,
    oblig: &ObligatorySet,
) -> Result<Vec<Supertag>, TagError> {
    extract_with_options(tree, model, oblig, ExtractOptions::default())
}

pub fn extract_with_options(
    tree: &DepTree,
    model: SupertagModel,
    oblig: &ObligatorySet,
    opts: ExtractOptions,
) -> Result<Vec<Supertag>, TagError> {
    for i in 1..=tree.len() {
        let rel = tree.relation(i);
        if rel.contains(['/', '+', '_']) {
            return Err(TagError::ReservedChar {
                token: i,
                relation: rel.to_string(),
            });
        }
    }

    let mut tags = Vec::with_capacity(tree.len());
    for i in 1..=tree.len() {
        let head_rel = || HeadPart::Relation {
            relation: tree.relation(i).to_string(),
            side: if tree.head(i) < i { Side::Left } else { Side::Right },
        };
        let m0_head = if tree.head(i) == 0 { HeadPart::Root } else { head_rel() };

        let deps = tree.dependents_of(i).expect("index in range");
        let all_flags = dir_flags(deps.iter().map(|d| d.2));
        let oblig_items: Vec<(String, Side)> = deps
            .iter()
            .filter(|(_, rel, _)| oblig.contains(rel))
            .map(|(_, rel, side)| (rel.to_string(), *side))
            .collect();

        let tag = match model {
            SupertagModel::Model0 => Supertag {
                model,
                head: m0_head,
                deps: DepPart::None,
            },
            SupertagModel::Model1 => Supertag {
                model,
                head: m0_head,
                deps: all_flags.map_or(DepPart::None, DepPart::Flags),
            },
            SupertagModel::Model2 => {
                let deps = if oblig_items.is_empty() {
                    all_flags.map_or(DepPart::None, DepPart::Flags)
                } else {
                    let flags = if opts.optional_flags_with_obligatory {
                        dir_flags(
                            deps.iter()
                                .filter(|(_, rel, _)| !oblig.contains(rel))
                                .map(|d| d.2),
                        )
                    } else {
                        None
                    };
                    DepPart::Obligatory { items: oblig_items, flags }
                };
                Supertag { model, head: m0_head, deps }
            }
            SupertagModel::ModelTag => {
                let head = if tree.head(i) != 0 && oblig.contains(tree.relation(i)) {
                    HeadPart::Omitted
                } else {
                    m0_head
                };
                let deps = if oblig.is_verb(tree.pos(i)) && !oblig_items.is_empty() {
                    DepPart::Obligatory { items: oblig_items, flags: None }
                } else {
                    DepPart::None
                };
                Supertag { model, head, deps }
            }
        };
        tags.push(tag);
    }
    Ok(tags)
}

fn dir_flags(sides: impl Iterator<Item = Side>) -> Option<DirFlags> {
    let mut flags = DirFlags { left: false, right: false };
    for s in sides {
        match s {
            Side::Left => flags.left = true,
            Side::Right => flags.right = true,
        }
    }
    if flags.left || flags.right {
        Some(flags)
    } else {
        None
    }
}

// ---- string form ----

pub fn serialize_tag(tag: &Supertag) -> String {
    let head = match &tag.head {
        HeadPart::Root => "ROOT".to_string(),
        HeadPart::Relation { relation, side } => format!("{}/{}", relation, side.as_str()),
        HeadPart::Omitted => "-".to_string(),
    };
    let deps = match &tag.deps {
        DepPart::None => String::new(),
        DepPart::Flags(f) => flags_str(*f),
        DepPart::Obligatory { items, flags } => {
            let mut pieces: Vec<String> = items
                .iter()
                .map(|(rel, side)| format!("{}/{}", rel, side.as_str()))
                .collect();
            if let Some(f) = flags {
                if f.left {
                    pieces.push("L".to_string());
                }
                if f.right {
                    pieces.push("R".to_string());
                }
            }
            pieces.join("_")
        }
    };
    if deps.is_empty() {
        head
    } else {
        format!("{}+{}", head, deps)
    }
}

fn flags_str(f: DirFlags) -> String {
    match (f.left, f.right) {
        (true, true) => "L_R".to_string(),
        (true, false) => "L".to_string(),
        (false, true) => "R".to_string(),
        (false, false) => unreachable!("empty direction flags"),
    }
}

impl fmt::Display for Supertag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_tag(self))
    }
}

pub fn parse_tag(s: &str, model: SupertagModel) -> Result<Supertag, TagError> {
    let fail = |msg: &str| TagError::Parse {
        tag: s.to_string(),
        msg: msg.to_string(),
    };
    let (head_str, deps_str) = match s.split_once('+') {
        Some((h, d)) => (h, Some(d)),
        None => (s, None),
    };
    if head_str.is_empty() {
        return Err(fail("empty head part"));
    }
    if let Some(d) = deps_str {
        if d.is_empty() {
            return Err(fail("'+' with empty dependent part"));
        }
    }

    let head = match head_str {
        "ROOT" => HeadPart::Root,
        "-" => {
            if model != SupertagModel::ModelTag {
                return Err(fail("omitted head is only valid under model tag"));
            }
            HeadPart::Omitted
        }
        other => {
            let (rel, dir) = other
                .split_once('/')
                .ok_or_else(|| fail("head part must be ROOT, -, or REL/DIR"))?;
            if rel.is_empty() {
                return Err(fail("empty relation"));
            }
            HeadPart::Relation {
                relation: rel.to_string(),
                side: parse_side(dir).ok_or_else(|| fail("unknown direction token"))?,
            }
        }
    };

    let deps = match deps_str {
        None => DepPart::None,
        Some(d) => {
            if model == SupertagModel::Model0 {
                return Err(fail("model 0 tags have no dependent part"));
            }
            let pieces: Vec<&str> = d.split('_').collect();
            let is_flag = |p: &str| p == "L" || p == "R";
            if pieces.iter().all(|p| is_flag(p)) {
                if model == SupertagModel::ModelTag {
                    return Err(fail("model tag records obligatory dependents, not flags"));
                }
                let canonical = matches!(pieces.as_slice(), ["L"] | ["R"] | ["L", "R"]);
                if !canonical {
                    return Err(fail("direction flags must be L, R, or L_R"));
                }
                DepPart::Flags(DirFlags {
                    left: pieces.contains(&"L"),
                    right: pieces.contains(&"R"),
                })
            } else {
                if model == SupertagModel::Model1 {
                    return Err(fail("model 1 records direction flags, not relations"));
                }
                // Relation items form a prefix; bare flags may follow them
                // (Model 2 optional-flags variant).
                let mut items = Vec::new();
                let mut flags = DirFlags { left: false, right: false };
                let mut seen_flag = false;
                for p in pieces {
                    if is_flag(p) {
                        seen_flag = true;
                        if p == "L" {
                            flags.left = true;
                        } else {
                            flags.right = true;
                        }
                    } else if seen_flag {
                        return Err(fail("relation item after direction flag"));
                    } else {
                        let (rel, dir) = p
                            .split_once('/')
                            .ok_or_else(|| fail("dependent item must be REL/DIR"))?;
                        if rel.is_empty() {
                            return Err(fail("empty relation"));
                        }
                        items.push((
                            rel.to_string(),
                            parse_side(dir).ok_or_else(|| fail("unknown direction token"))?,
                        ));
                    }
                }
                if items.is_empty() {
                    return Err(fail("empty obligatory list"));
                }
                DepPart::Obligatory {
                    items,
                    flags: if seen_flag { Some(flags) } else { None },
                }
            }
        }
    };

    Ok(Supertag { model, head, deps })
}

fn parse_side(s: &str) -> Option<Side> {
    match s {
        "L" => Some(Side::Left),
        "R" => Some(Side::Right),
        _ => None,
    }
}

// ---- projection ----

/// Project a finer tag onto a coarser model: M1->M0, M2->M1, M2->M0.
/// Model TAG is not comparable on the feature grid.
pub fn project(tag: &Supertag, target: SupertagModel) -> Result<Supertag, TagError> {
    use SupertagModel::*;
    let unsupported = || TagError::UnsupportedProjection {
        from: tag.model,
        to: target,
    };
    match (tag.model, target) {
        (Model1, Model0) | (Model2, Model0) => Ok(Supertag {
            model: Model0,
            head: tag.head.clone(),
            deps: DepPart::None,
        }),
        (Model2, Model1) => {
            let deps = match &tag.deps {
                DepPart::None => DepPart::None,
                DepPart::Flags(f) => DepPart::Flags(*f),
                DepPart::Obligatory { items, flags } => {
                    let mut f = flags.unwrap_or(DirFlags { left: false, right: false });
                    for (_, side) in items {
                        match side {
                            Side::Left => f.left = true,
                            Side::Right => f.right = true,
                        }
                    }
                    DepPart::Flags(f)
                }
            };
            Ok(Supertag {
                model: Model1,
                head: tag.head.clone(),
                deps,
            })
        }
        _ => Err(unsupported()),
    }
}

/// True iff extracting `tag.model` supertags from `tree` yields `tag` at
/// 1-based position `i`. Trees whose relations cannot be serialized are
/// never consistent.
pub fn consistent(tag: &Supertag, tree: &DepTree, i: usize, oblig: &ObligatorySet) -> bool {
    match extract(tree, tag.model, oblig) {
        Ok(tags) => i >= 1 && i <= tags.len() && &tags[i - 1] == tag,
        Err(_) => false,
    }
}

// ---- vocabulary statistics ----

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupertagVocab {
    pub model: SupertagModel,
    pub counts: BTreeMap<String, u64>,
    pub total: u64,
}

impl SupertagVocab {
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }
}

/// Count serialized tags over a corpus of trees.
pub fn vocab_stats(
    trees: &[DepTree],
    model: SupertagModel,
    oblig: &ObligatorySet,
) -> Result<SupertagVocab, TagError> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut total = 0u64;
    for tree in trees {
        for tag in extract(tree, model, oblig)? {
            *counts.entry(serialize_tag(&tag)).or_insert(0) += 1;
            total += 1;
        }
    }
    Ok(SupertagVocab { model, counts, total })
}

// ---- .stags sidecar format ----

/// One sentence per block, one `index<TAB>tag` line per token, blank line
/// after each block.
pub fn write_stags(sentences: &[Vec<Supertag>]) -> String {
    let mut out = String::new();
    for tags in sentences {
        for (k, tag) in tags.iter().enumerate() {
            out.push_str(&format!("{}\t{}\n", k + 1, serialize_tag(tag)));
        }
        out.push('\n');
    }
    out
}

pub fn read_stags(text: &str, model: SupertagModel) -> Result<Vec<Vec<Supertag>>, TagError> {
    let mut sentences = Vec::new();
    let mut tags: Vec<Supertag> = Vec::new();
    for raw in text.lines() {
        if raw.trim().is_empty() {
            if !tags.is_empty() {
                sentences.push(std::mem::take(&mut tags));
            }
            continue;
        }
        let sentence = sentences.len() + 1;
        let (idx, tag_str) = raw.split_once(['\t', ' ']).ok_or_else(|| TagError::Sidecar {
            sentence,
            msg: format!("expected 'index<TAB>tag', found {raw:?}"),
        })?;
        let idx: usize = idx.parse().map_err(|_| TagError::Sidecar {
            sentence,
            msg: format!("bad token index {idx:?}"),
        })?;
        if idx != tags.len() + 1 {
            return Err(TagError::Sidecar {
                sentence,
                msg: format!("token index {} out of order, expected {}", idx, tags.len() + 1),
            });
        }
        tags.push(parse_tag(tag_str.trim(), model)?);
    }
    if !tags.is_empty() {
        sentences.push(tags);
    }
    Ok(sentences)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::DepTree;

    fn tree(heads: &[usize], rels: &[&str], pos: &[&str]) -> DepTree {
        DepTree::new(
            heads.to_vec(),
            rels.iter().map(|s| s.to_string()).collect(),
            pos.iter().map(|s| s.to_string()).collect(),
        )
        .unwrap()
    }

    /// "No, it wasn't black Monday."
    fn table1() -> DepTree {
        tree(
            &[4, 4, 4, 0, 4, 7, 4, 4],
            &["DEP", "P", "SBJ", "ROOT", "ADV", "NAME", "PRD", "P"],
            &["UH", ",", "PRP", "VBD", "RB", "JJ", "NNP", "."],
        )
    }

    fn strings(tags: &[Supertag]) -> Vec<String> {
        tags.iter().map(serialize_tag).collect()
    }

    #[test]
    fn table1_model1_matches_published_column() {
        let tags = extract(&table1(), SupertagModel::Model1, &ObligatorySet::english()).unwrap();
        assert_eq!(
            strings(&tags),
            ["DEP/R", "P/R", "SBJ/R", "ROOT+L_R", "ADV/L", "NAME/R", "PRD/L+L", "P/L"]
        );
    }

    #[test]
    fn table1_model_tag_matches_published_column() {
        let tags = extract(&table1(), SupertagModel::ModelTag, &ObligatorySet::english()).unwrap();
        assert_eq!(
            strings(&tags),
            ["DEP/R", "P/R", "-", "ROOT+SBJ/L_PRD/R", "ADV/L", "NAME/R", "-", "P/L"]
        );
    }

    #[test]
    fn three_token_tree_under_all_models() {
        // the -> dog (NMOD), dog -> barks (SBJ), barks -> root, barks is a verb
        let t = tree(&[2, 3, 0], &["NMOD", "SBJ", "ROOT"], &["DT", "NN", "VBZ"]);
        let oblig = ObligatorySet::english();
        let get = |m| strings(&extract(&t, m, &oblig).unwrap());
        assert_eq!(get(SupertagModel::Model0), ["NMOD/R", "SBJ/R", "ROOT"]);
        assert_eq!(get(SupertagModel::Model1), ["NMOD/R", "SBJ/R+L", "ROOT+L"]);
        assert_eq!(get(SupertagModel::Model2), ["NMOD/R", "SBJ/R+L", "ROOT+SBJ/L"]);
        assert_eq!(get(SupertagModel::ModelTag), ["NMOD/R", "-", "ROOT+SBJ/L"]);
    }

    #[test]
    fn single_token_sentence() {
        let t = tree(&[0], &["ROOT"], &["VB"]);
        let oblig = ObligatorySet::english();
        let m0 = extract(&t, SupertagModel::Model0, &oblig).unwrap();
        let m1 = extract(&t, SupertagModel::Model1, &oblig).unwrap();
        assert_eq!(serialize_tag(&m0[0]), "ROOT");
        assert_eq!(serialize_tag(&m1[0]), "ROOT");
    }

    #[test]
    fn omitted_head_with_own_obligatory_dependents() {
        // He has eaten apples: eaten is VC-attached and has an OBJ.
        let t = tree(
            &[2, 0, 2, 3],
            &["SBJ", "ROOT", "VC", "OBJ"],
            &["PRP", "VBZ", "VBN", "NNS"],
        );
        let tags = extract(&t, SupertagModel::ModelTag, &ObligatorySet::english()).unwrap();
        assert_eq!(strings(&tags), ["-", "ROOT+SBJ/L_VC/R", "-+OBJ/R", "-"]);
        let back = parse_tag("-+OBJ/R", SupertagModel::ModelTag).unwrap();
        assert_eq!(back, tags[2]);
    }

    #[test]
    fn serialize_parse_round_trip_on_paper_forms() {
        for (s, m) in [
            ("SBJ/R+L", SupertagModel::Model1),
            ("ROOT+L_R", SupertagModel::Model1),
            ("ROOT+SBJ/L_PRD/R", SupertagModel::ModelTag),
            ("-", SupertagModel::ModelTag),
            ("NAME/R", SupertagModel::Model0),
            ("PRD/L+L", SupertagModel::Model1),
            ("NMOD/L+R", SupertagModel::Model1),
            ("OBJ/L+R", SupertagModel::Model1),
        ] {
            let tag = parse_tag(s, m).unwrap();
            assert_eq!(serialize_tag(&tag), s);
            assert_eq!(parse_tag(&serialize_tag(&tag), m).unwrap(), tag);
        }
    }

    #[test]
    fn parse_rejects_malformed_tags() {
        use SupertagModel::*;
        for (s, m) in [
            ("SBJ/X", Model0),          // unknown direction
            ("/L", Model0),             // empty relation
            ("ROOT+", Model1),          // empty dep part
            ("-", Model0),              // omitted head outside TAG
            ("ROOT+L", Model0),         // model 0 has no dep part
            ("ROOT+SBJ/L", Model1),     // model 1 has no relation items
            ("ROOT+L", ModelTag),       // model TAG has no flags
            ("ROOT+R_L", Model1),       // non-canonical flag order
            ("ROOT+L_SBJ/L", Model2),   // relation item after flag
            ("", Model0),               // empty
        ] {
            assert!(parse_tag(s, m).is_err(), "{s:?} should not parse");
        }
    }

    #[test]
    fn projection_follows_the_feature_grid() {
        let m2 = parse_tag("ROOT+SBJ/L", SupertagModel::Model2).unwrap();
        assert_eq!(serialize_tag(&project(&m2, SupertagModel::Model1).unwrap()), "ROOT+L");
        assert_eq!(serialize_tag(&project(&m2, SupertagModel::Model0).unwrap()), "ROOT");

        let m1 = parse_tag("SBJ/R+L", SupertagModel::Model1).unwrap();
        assert_eq!(serialize_tag(&project(&m1, SupertagModel::Model0).unwrap()), "SBJ/R");

        let tag = parse_tag("-", SupertagModel::ModelTag).unwrap();
        assert!(project(&tag, SupertagModel::Model0).is_err());
        assert!(project(&m1, SupertagModel::Model2).is_err());
        assert!(project(&m1, SupertagModel::Model1).is_err());
    }

    #[test]
    fn extracted_tags_are_consistent_and_mutations_are_not() {
        let t = table1();
        let oblig = ObligatorySet::english();
        for model in SupertagModel::ALL {
            let tags = extract(&t, model, &oblig).unwrap();
            for (k, tag) in tags.iter().enumerate() {
                assert!(consistent(tag, &t, k + 1, &oblig));
            }
        }
        // Flip the head direction of "it" (SBJ/R -> SBJ/L).
        let mut flipped = parse_tag("SBJ/R", SupertagModel::Model0).unwrap();
        assert!(consistent(&flipped, &t, 3, &oblig));
        flipped = parse_tag("SBJ/L", SupertagModel::Model0).unwrap();
        assert!(!consistent(&flipped, &t, 3, &oblig));
    }

    #[test]
    fn appendix_example_president_wollaeger() {
        // President -> Wollaeger (NAME), Wollaeger -> said (SBJ), said root verb.
        let t = tree(
            &[2, 3, 0],
            &["NAME", "SBJ", "ROOT"],
            &["NNP", "NNP", "VBD"],
        );
        let oblig = ObligatorySet::english();
        let tags = extract(&t, SupertagModel::Model1, &oblig).unwrap();
        assert_eq!(serialize_tag(&tags[0]), "NAME/R");
        assert_eq!(serialize_tag(&tags[1]), "SBJ/R+L");
        let president = parse_tag("NAME/R", SupertagModel::Model1).unwrap();
        assert!(consistent(&president, &t, 1, &oblig));
    }

    #[test]
    fn vocab_stats_on_table1_model0() {
        let trees = vec![table1()];
        let vocab = vocab_stats(&trees, SupertagModel::Model0, &ObligatorySet::english()).unwrap();
        // P appears with both directions, so all eight tags are distinct.
        assert_eq!(vocab.distinct(), 8);
        assert_eq!(vocab.total, 8);
        assert_eq!(vocab.counts["P/R"], 1);
        assert_eq!(vocab.counts["P/L"], 1);
    }

    #[test]
    fn vocab_stats_on_empty_corpus() {
        let vocab = vocab_stats(&[], SupertagModel::Model0, &ObligatorySet::english()).unwrap();
        assert_eq!(vocab.distinct(), 0);
        assert_eq!(vocab.total, 0);
    }

    #[test]
    fn reserved_characters_in_relations_are_rejected() {
        let t = tree(&[0, 1], &["ROOT", "A/B"], &["VB", "NN"]);
        let err = extract(&t, SupertagModel::Model0, &ObligatorySet::english()).unwrap_err();
        assert!(matches!(err, TagError::ReservedChar { token: 2, .. }), "{err}");
    }

    #[test]
    fn model2_optional_flags_variant() {
        // was has obligatory SBJ left plus optional ADV right.
        let t = tree(
            &[2, 0, 2],
            &["SBJ", "ROOT", "ADV"],
            &["NN", "VBD", "RB"],
        );
        let oblig = ObligatorySet::english();
        let standard = extract(&t, SupertagModel::Model2, &oblig).unwrap();
        assert_eq!(serialize_tag(&standard[1]), "ROOT+SBJ/L");
        let variant = extract_with_options(
            &t,
            SupertagModel::Model2,
            &oblig,
            ExtractOptions { optional_flags_with_obligatory: true },
        )
        .unwrap();
        assert_eq!(serialize_tag(&variant[1]), "ROOT+SBJ/L_R");
        let parsed = parse_tag("ROOT+SBJ/L_R", SupertagModel::Model2).unwrap();
        assert_eq!(parsed, variant[1]);
    }

    #[test]
    fn tag_nullability_rule() {
        let t = table1();
        let oblig = ObligatorySet::english();
        let tags = extract(&t, SupertagModel::ModelTag, &oblig).unwrap();
        for (k, tag) in tags.iter().enumerate() {
            let i = k + 1;
            let own_oblig = t.head(i) != 0 && oblig.contains(t.relation(i));
            let has_oblig_deps = t
                .dependents_of(i)
                .unwrap()
                .iter()
                .any(|(_, rel, _)| oblig.contains(rel));
            let is_dash = serialize_tag(tag) == "-";
            let expect_dash = own_oblig && (!oblig.is_verb(t.pos(i)) || !has_oblig_deps);
            assert_eq!(is_dash, expect_dash, "token {i}");
        }
    }

    #[test]
    fn stags_sidecar_round_trip() {
        let t = table1();
        let tags = extract(&t, SupertagModel::Model1, &ObligatorySet::english()).unwrap();
        let text = write_stags(&[tags.clone()]);
        let back = read_stags(&text, SupertagModel::Model1).unwrap();
        assert_eq!(back, vec![tags]);
        assert!(text.starts_with("1\tDEP/R\n"));
    }

    #[test]
    fn stags_rejects_out_of_order_indices() {
        let err = read_stags("2\tROOT\n", SupertagModel::Model0).unwrap_err();
        assert!(matches!(err, TagError::Sidecar { sentence: 1, .. }), "{err}");
    }
}
