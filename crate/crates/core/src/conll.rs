//! CoNLL-2009 shared-task format: reader, validator, writer.
//!
//! Token lines carry 14 fixed columns plus one APRED column per predicate:
//! `ID FORM LEMMA PLEMMA POS PPOS FEAT PFEAT HEAD PHEAD DEPREL PDEPREL
//! FILLPRED PRED APRED1..APREDn`. `_` in an optional column means absent;
//! FORM and DEPREL are kept verbatim. Input may be separated by spaces or
//! tabs; output always uses tabs.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConllError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("sentence {sentence}, token {token}: {msg}")]
    Validation {
        sentence: usize,
        token: usize,
        msg: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConllToken {
    /// 1-based position in the sentence.
    pub id: usize,
    pub form: String,
    pub lemma: Option<String>,
    pub plemma: Option<String>,
    pub pos: Option<String>,
    pub ppos: Option<String>,
    pub feat: Option<String>,
    pub pfeat: Option<String>,
    /// Head token id; 0 is the artificial root.
    pub head: usize,
    pub phead: Option<usize>,
    pub deprel: String,
    pub pdeprel: Option<String>,
    pub fillpred: bool,
    pub pred: Option<String>,
    /// One entry per predicate of the sentence, in predicate order.
    pub apreds: Vec<Option<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConllSentence {
    tokens: Vec<ConllToken>,
    /// 1-based ids of tokens with FILLPRED = Y, in surface order.
    predicates: Vec<usize>,
}

impl ConllSentence {
    /// Validate tokens and derive the predicate list.
    pub fn new(tokens: Vec<ConllToken>) -> Result<Self, ConllError> {
        Self::validated(tokens, 0)
    }

    fn validated(tokens: Vec<ConllToken>, sentence: usize) -> Result<Self, ConllError> {
        let n = tokens.len();
        let fail = |token: usize, msg: String| ConllError::Validation {
            sentence,
            token,
            msg,
        };
        for (k, tok) in tokens.iter().enumerate() {
            if tok.id != k + 1 {
                return Err(fail(k + 1, format!("id {} out of order, expected {}", tok.id, k + 1)));
            }
            if tok.head > n {
                return Err(fail(tok.id, format!("head {} out of range 0..={}", tok.head, n)));
            }
            if tok.head == tok.id {
                return Err(fail(tok.id, format!("head {} is a self-loop", tok.head)));
            }
        }
        let predicates: Vec<usize> = tokens
            .iter()
            .filter(|t| t.fillpred)
            .map(|t| t.id)
            .collect();
        for tok in &tokens {
            if tok.apreds.len() != predicates.len() {
                return Err(fail(
                    tok.id,
                    format!(
                        "{} APRED columns for {} predicates",
                        tok.apreds.len(),
                        predicates.len()
                    ),
                ));
            }
        }
        Ok(ConllSentence { tokens, predicates })
    }

    pub fn tokens(&self) -> &[ConllToken] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// 1-based token ids of the predicates, in surface order.
    pub fn predicates(&self) -> &[usize] {
        &self.predicates
    }

    pub fn token(&self, id: usize) -> &ConllToken {
        &self.tokens[id - 1]
    }

    /// Replace predicate marking and argument columns.
    ///
    /// `preds` maps a token id to its PRED string; `apreds[k][j]` is the
    /// role of token `k+1` for the `j`-th predicate. Used when writing
    /// labeler output and when adopting externally supplied predicates.
    pub fn with_predicates(
        &self,
        preds: &[(usize, Option<String>)],
        apreds: Vec<Vec<Option<String>>>,
    ) -> Result<ConllSentence, ConllError> {
        let mut tokens = self.tokens.clone();
        for t in &mut tokens {
            t.fillpred = false;
            t.pred = None;
        }
        for (id, sense) in preds {
            tokens[id - 1].fillpred = true;
            tokens[id - 1].pred = sense.clone();
        }
        for (t, cols) in tokens.iter_mut().zip(apreds) {
            t.apreds = cols;
        }
        ConllSentence::new(tokens)
    }
}

fn opt(col: &str) -> Option<String> {
    if col == "_" {
        None
    } else {
        Some(col.to_string())
    }
}

fn unopt(col: &Option<String>) -> &str {
    col.as_deref().unwrap_or("_")
}

/// Parse a whole file. Sentences are separated by blank lines.
pub fn parse_conll2009(text: &str) -> Result<Vec<ConllSentence>, ConllError> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<ConllToken> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            if !tokens.is_empty() {
                sentences.push(ConllSentence::validated(
                    std::mem::take(&mut tokens),
                    sentences.len() + 1,
                )?);
            }
            continue;
        }
        let cols: Vec<&str> = raw.split_whitespace().collect();
        if cols.len() < 14 {
            return Err(ConllError::Parse {
                line,
                msg: format!("expected at least 14 columns, found {}", cols.len()),
            });
        }
        let parse_num = |s: &str, what: &str| -> Result<usize, ConllError> {
            s.parse::<usize>().map_err(|_| ConllError::Parse {
                line,
                msg: format!("{} column is not a number: {:?}", what, s),
            })
        };
        let id = parse_num(cols[0], "ID")?;
        let head = parse_num(cols[8], "HEAD")?;
        let phead = match cols[9] {
            "_" => None,
            s => Some(parse_num(s, "PHEAD")?),
        };
        let fillpred = match cols[12] {
            "Y" => true,
            "_" => false,
            s => {
                return Err(ConllError::Parse {
                    line,
                    msg: format!("FILLPRED column must be Y or _, found {:?}", s),
                })
            }
        };
        tokens.push(ConllToken {
            id,
            form: cols[1].to_string(),
            lemma: opt(cols[2]),
            plemma: opt(cols[3]),
            pos: opt(cols[4]),
            ppos: opt(cols[5]),
            feat: opt(cols[6]),
            pfeat: opt(cols[7]),
            head,
            phead,
            deprel: cols[10].to_string(),
            pdeprel: opt(cols[11]),
            fillpred,
            pred: opt(cols[13]),
            apreds: cols[14..].iter().map(|c| opt(c)).collect(),
        });
    }
    if !tokens.is_empty() {
        sentences.push(ConllSentence::validated(tokens, sentences.len() + 1)?);
    }
    Ok(sentences)
}

/// Serialize sentences back to the tab-separated format. Every sentence
/// block, including the last, is followed by one blank line.
pub fn serialize_conll2009(sentences: &[ConllSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        for t in s.tokens() {
            let mut cols: Vec<String> = vec![
                t.id.to_string(),
                t.form.clone(),
                unopt(&t.lemma).to_string(),
                unopt(&t.plemma).to_string(),
                unopt(&t.pos).to_string(),
                unopt(&t.ppos).to_string(),
                unopt(&t.feat).to_string(),
                unopt(&t.pfeat).to_string(),
                t.head.to_string(),
                t.phead.map_or_else(|| "_".to_string(), |h| h.to_string()),
                t.deprel.clone(),
                unopt(&t.pdeprel).to_string(),
                if t.fillpred { "Y" } else { "_" }.to_string(),
                unopt(&t.pred).to_string(),
            ];
            cols.extend(t.apreds.iter().map(|a| unopt(a).to_string()));
            out.push_str(&cols.join("\t"));
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> String {
        let lines = [
            "1\tdog\tdog\tdog\tNN\tNN\t_\t_\t2\t2\tSBJ\tSBJ\t_\t_\tA0",
            "2\tbarks\tbark\tbark\tVBZ\tVBZ\t_\t_\t0\t0\tROOT\tROOT\tY\tbarks.01\t_",
        ];
        format!("{}\n{}\n\n", lines[0], lines[1])
    }

    #[test]
    fn parses_two_token_fixture() {
        let sents = parse_conll2009(&fixture()).unwrap();
        assert_eq!(sents.len(), 1);
        let s = &sents[0];
        assert_eq!(s.len(), 2);
        assert_eq!(s.predicates(), &[2]);
        let dog = s.token(1);
        assert_eq!(dog.form, "dog");
        assert_eq!(dog.head, 2);
        assert_eq!(dog.deprel, "SBJ");
        assert!(!dog.fillpred);
        assert_eq!(dog.apreds, vec![Some("A0".to_string())]);
        let barks = s.token(2);
        assert_eq!(barks.head, 0);
        assert!(barks.fillpred);
        assert_eq!(barks.pred.as_deref(), Some("barks.01"));
        assert_eq!(barks.apreds, vec![None]);
    }

    #[test]
    fn empty_input_is_empty_list() {
        assert!(parse_conll2009("").unwrap().is_empty());
        assert!(parse_conll2009("\n\n").unwrap().is_empty());
    }

    #[test]
    fn thirteen_columns_is_a_parse_error() {
        let line = "1 dog dog dog NN NN _ _ 2 2 SBJ SBJ _";
        let err = parse_conll2009(line).unwrap_err();
        assert!(matches!(err, ConllError::Parse { line: 1, .. }), "{err}");
        assert!(err.to_string().contains("13"));
    }

    #[test]
    fn round_trip_is_byte_identical_on_fixture() {
        let text = fixture();
        let sents = parse_conll2009(&text).unwrap();
        assert_eq!(serialize_conll2009(&sents), text);
    }

    #[test]
    fn space_separated_input_is_accepted() {
        let text = "1 a a a X X _ _ 0 _ ROOT _ _ _\n";
        let sents = parse_conll2009(text).unwrap();
        assert_eq!(sents[0].token(1).form, "a");
        // Re-parse of the tab output matches.
        let again = parse_conll2009(&serialize_conll2009(&sents)).unwrap();
        assert_eq!(sents, again);
    }

    #[test]
    fn rejects_self_loop_head() {
        let text = "1 a a a X X _ _ 1 _ DEP _ _ _\n";
        let err = parse_conll2009(text).unwrap_err();
        assert!(err.to_string().contains("self-loop"), "{err}");
    }

    #[test]
    fn rejects_head_out_of_range() {
        let text = "1 a a a X X _ _ 5 _ DEP _ _ _\n";
        let err = parse_conll2009(text).unwrap_err();
        match err {
            ConllError::Validation { sentence: 1, token: 1, ref msg } => {
                assert!(msg.contains("out of range"))
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_ragged_apreds() {
        // Token 1 claims one APRED column, token 2 claims none, but the
        // sentence has one predicate.
        let text = "1 a a a X X _ _ 2 _ DEP _ _ _ A0\n2 b b b V V _ _ 0 _ ROOT _ Y b.01\n";
        let err = parse_conll2009(text).unwrap_err();
        assert!(err.to_string().contains("APRED"), "{err}");
    }

    #[test]
    fn non_numeric_head_is_a_parse_error() {
        let text = "1 a a a X X _ _ x _ DEP _ _ _\n";
        let err = parse_conll2009(text).unwrap_err();
        assert!(err.to_string().contains("HEAD"), "{err}");
    }
}
