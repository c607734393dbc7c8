//! Reading and writing CoNLL-U treebanks.
//!
//! Only syntactic words are kept: multiword range lines (`3-4`) and empty
//! nodes (`3.1`) are dropped at parse time, since morphological features live
//! on the split words. Columns that the rest of the crate never inspects
//! (XPOS, DEPS, MISC) are still carried verbatim so that a parse/write cycle
//! is lossless.

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Grammatical number as annotated in UD (`Number=Sing|Plur`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Number {
    Sing,
    Plur,
}

impl Number {
    pub fn inverse(self) -> Number {
        match self {
            Number::Sing => Number::Plur,
            Number::Plur => Number::Sing,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Number::Sing => "Sing",
            Number::Plur => "Plur",
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Number {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Sing" => Ok(Number::Sing),
            "Plur" => Ok(Number::Plur),
            other => Err(format!("invalid Number value `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gender {
    Masc,
    Fem,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Masc => "Masc",
            Gender::Fem => "Fem",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Masc" => Ok(Gender::Masc),
            "Fem" => Ok(Gender::Fem),
            other => Err(format!("invalid Gender value `{other}`")),
        }
    }
}

/// The FEATS column: unique feature names mapped to values.
///
/// Names are kept in sorted order, which is also the canonical CoNLL-U
/// serialization order. Unknown names are accepted as-is.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MorphFeatures(BTreeMap<String, String>);

impl MorphFeatures {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses a FEATS column value (`_` for no features).
    pub fn parse(column: &str) -> Result<Self, String> {
        let mut feats = MorphFeatures::new();
        if column == "_" {
            return Ok(feats);
        }
        for pair in column.split('|') {
            let (name, value) = pair
                .split_once('=')
                .ok_or_else(|| format!("feature `{pair}` is not of the form Name=Value"))?;
            if name.is_empty() || value.is_empty() {
                return Err(format!("empty feature name or value in `{pair}`"));
            }
            if name == "Number" {
                value.parse::<Number>()?;
            }
            if feats.0.insert(name.to_owned(), value.to_owned()).is_some() {
                return Err(format!("duplicate feature `{name}`"));
            }
        }
        Ok(feats)
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.0.get(name).map(String::as_str)
    }

    pub fn insert(&mut self, name: impl Into<String>, value: impl Into<String>) -> Option<String> {
        self.0.insert(name.into(), value.into())
    }

    pub fn remove(&mut self, name: &str) -> Option<String> {
        self.0.remove(name)
    }

    pub fn number(&self) -> Option<Number> {
        self.get("Number").and_then(|v| v.parse().ok())
    }

    /// `None` also covers multi-valued annotations such as `Fem,Masc`.
    pub fn gender(&self) -> Option<Gender> {
        self.get("Gender").and_then(|v| v.parse().ok())
    }

    pub fn with_number(&self, number: Number) -> Self {
        let mut out = self.clone();
        out.insert("Number", number.as_str());
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for MorphFeatures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("_");
        }
        for (i, (name, value)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{name}={value}")?;
        }
        Ok(())
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for MorphFeatures {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        MorphFeatures(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

/// One syntactic word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// 1-based position within the sentence.
    pub id: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: MorphFeatures,
    /// Id of the governor, 0 for the root.
    pub head: usize,
    pub deprel: String,
    pub deps: String,
    pub misc: String,
}

impl Token {
    pub fn new(
        id: usize,
        form: impl Into<String>,
        lemma: impl Into<String>,
        upos: impl Into<String>,
        feats: MorphFeatures,
        head: usize,
        deprel: impl Into<String>,
    ) -> Self {
        Token {
            id,
            form: form.into(),
            lemma: lemma.into(),
            upos: upos.into(),
            xpos: "_".into(),
            feats,
            head,
            deprel: deprel.into(),
            deps: "_".into(),
            misc: "_".into(),
        }
    }

    /// Relation without its subtype (`acl:relcl` -> `acl`).
    pub fn base_deprel(&self) -> &str {
        self.deprel.split(':').next().unwrap_or(&self.deprel)
    }

    pub fn number(&self) -> Option<Number> {
        self.feats.number()
    }

    pub fn gender(&self) -> Option<Gender> {
        self.feats.gender()
    }

    pub fn is_nominal(&self) -> bool {
        self.upos == "NOUN" || self.upos == "PROPN"
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub sent_id: Option<String>,
    pub text: Option<String>,
    /// Other comment lines, stored without the leading `#`.
    pub comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SentenceError {
    #[error("sentence has no tokens")]
    Empty,
    #[error("token ids are not contiguous: expected {expected}, found {found}")]
    NonContiguous { expected: usize, found: usize },
    #[error("token {id} has an empty form")]
    EmptyForm { id: usize },
    #[error("token {id} is its own head")]
    SelfHead { id: usize },
    #[error("token {id} has head {head}, which does not exist")]
    DanglingHead { id: usize, head: usize },
    #[error("sentence has {0} roots")]
    RootCount(usize),
    #[error("head cycle through token {id}")]
    Cycle { id: usize },
}

impl SentenceError {
    fn token_id(&self) -> Option<usize> {
        match *self {
            SentenceError::NonContiguous { found, .. } => Some(found),
            SentenceError::EmptyForm { id }
            | SentenceError::SelfHead { id }
            | SentenceError::DanglingHead { id, .. }
            | SentenceError::Cycle { id } => Some(id),
            SentenceError::Empty | SentenceError::RootCount(_) => None,
        }
    }
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence {
            tokens,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token by its 1-based id.
    pub fn token(&self, id: usize) -> Option<&Token> {
        id.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    pub fn token_mut(&mut self, id: usize) -> Option<&mut Token> {
        id.checked_sub(1).and_then(move |i| self.tokens.get_mut(i))
    }

    pub fn children(&self, id: usize) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(move |t| t.head == id)
    }

    pub fn forms(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.form.as_str())
    }

    /// Is `ancestor` on the head chain of `id` (or equal to it)?
    pub fn dominates(&self, ancestor: usize, id: usize) -> bool {
        let mut cur = id;
        for _ in 0..=self.tokens.len() {
            if cur == ancestor {
                return true;
            }
            match self.token(cur) {
                Some(t) if t.head != 0 => cur = t.head,
                _ => return false,
            }
        }
        false
    }

    /// Checks id contiguity, head references and tree shape.
    pub fn validate(&self) -> Result<(), SentenceError> {
        if self.tokens.is_empty() {
            return Err(SentenceError::Empty);
        }
        let n = self.tokens.len();
        let mut roots = 0;
        for (i, t) in self.tokens.iter().enumerate() {
            if t.id != i + 1 {
                return Err(SentenceError::NonContiguous {
                    expected: i + 1,
                    found: t.id,
                });
            }
            if t.form.is_empty() {
                return Err(SentenceError::EmptyForm { id: t.id });
            }
            if t.head == t.id {
                return Err(SentenceError::SelfHead { id: t.id });
            }
            if t.head > n {
                return Err(SentenceError::DanglingHead {
                    id: t.id,
                    head: t.head,
                });
            }
            if t.head == 0 {
                roots += 1;
            }
        }
        if roots != 1 {
            return Err(SentenceError::RootCount(roots));
        }
        // 0 = unvisited, 1 = on current path, 2 = reaches the root
        let mut state = vec![0u8; n + 1];
        state[0] = 2;
        for start in 1..=n {
            let mut path = Vec::new();
            let mut cur = start;
            while state[cur] == 0 {
                state[cur] = 1;
                path.push(cur);
                cur = self.tokens[cur - 1].head;
            }
            if state[cur] == 1 {
                return Err(SentenceError::Cycle { id: cur });
            }
            for id in path {
                state[id] = 2;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("expected 10 tab-separated columns, found {0}")]
    ColumnCount(usize),
    #[error("invalid token id `{0}`")]
    BadId(String),
    #[error("invalid head `{0}`")]
    BadHead(String),
    #[error("invalid FEATS column: {0}")]
    BadFeatures(String),
    #[error(transparent)]
    Sentence(#[from] SentenceError),
    #[error("input is not valid UTF-8")]
    Encoding,
}

/// A malformed line or sentence, located by 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

/// What to do with a sentence containing a malformed line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Abort,
    SkipSentence,
}

#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub sentences: Vec<Sentence>,
    /// Errors of the sentences dropped in [`ParseMode::SkipSentence`].
    pub skipped: Vec<ParseError>,
}

#[derive(Debug, Error)]
pub enum ConlluError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

enum Line {
    Word(Token),
    Ignored,
}

fn parse_token_line(line: &str) -> Result<Line, ParseErrorKind> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(ParseErrorKind::ColumnCount(cols.len()));
    }
    let id_col = cols[0];
    if id_col.contains('-') || id_col.contains('.') {
        // multiword range or empty node; still must look like one
        let ok = id_col
            .split(['-', '.'])
            .all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()));
        return if ok {
            Ok(Line::Ignored)
        } else {
            Err(ParseErrorKind::BadId(id_col.to_owned()))
        };
    }
    let id: usize = id_col
        .parse()
        .ok()
        .filter(|&i| i >= 1)
        .ok_or_else(|| ParseErrorKind::BadId(id_col.to_owned()))?;
    let head: usize = cols[6]
        .parse()
        .map_err(|_| ParseErrorKind::BadHead(cols[6].to_owned()))?;
    let feats = MorphFeatures::parse(cols[5]).map_err(ParseErrorKind::BadFeatures)?;
    Ok(Line::Word(Token {
        id,
        form: cols[1].to_owned(),
        lemma: cols[2].to_owned(),
        upos: cols[3].to_owned(),
        xpos: cols[4].to_owned(),
        feats,
        head,
        deprel: cols[7].to_owned(),
        deps: cols[8].to_owned(),
        misc: cols[9].to_owned(),
    }))
}

#[derive(Default)]
struct Pending {
    sentence: Sentence,
    token_lines: Vec<usize>,
    error: Option<ParseError>,
    has_content: bool,
}

impl Pending {
    fn finish(self, last_line: usize) -> Option<Result<Sentence, ParseError>> {
        if let Some(err) = self.error {
            return Some(Err(err));
        }
        if self.sentence.tokens.is_empty() {
            // comment-only block (e.g. a lone `# newdoc`)
            return None;
        }
        match self.sentence.validate() {
            Ok(()) => Some(Ok(self.sentence)),
            Err(e) => {
                let line = e
                    .token_id()
                    .and_then(|id| self.sentence.tokens.iter().position(|t| t.id == id))
                    .map(|i| self.token_lines[i])
                    .unwrap_or(last_line);
                Some(Err(ParseError {
                    line,
                    kind: e.into(),
                }))
            }
        }
    }
}

/// Parses a CoNLL-U stream.
///
/// In [`ParseMode::Abort`] the first error is returned; in
/// [`ParseMode::SkipSentence`] offending sentences are dropped and their
/// errors collected in [`ParseOutcome::skipped`].
pub fn parse_conllu<R: BufRead>(reader: R, mode: ParseMode) -> Result<ParseOutcome, ConlluError> {
    let mut out = ParseOutcome::default();
    let mut pending = Pending::default();
    let mut line_no = 0;

    let flush = |pending: Pending, line_no: usize, out: &mut ParseOutcome| -> Result<(), ParseError> {
        match pending.finish(line_no) {
            Some(Ok(s)) => out.sentences.push(s),
            Some(Err(e)) => match mode {
                ParseMode::Abort => return Err(e),
                ParseMode::SkipSentence => out.skipped.push(e),
            },
            None => {}
        }
        Ok(())
    };

    for raw in reader.split(b'\n') {
        let raw = raw?;
        line_no += 1;
        let Ok(text) = std::str::from_utf8(&raw) else {
            let err = ParseError {
                line: line_no,
                kind: ParseErrorKind::Encoding,
            };
            match mode {
                ParseMode::Abort => return Err(err.into()),
                ParseMode::SkipSentence => {
                    pending.error.get_or_insert(err);
                    pending.has_content = true;
                    continue;
                }
            }
        };
        let line = text.strip_suffix('\r').unwrap_or(text);
        if line.trim().is_empty() {
            if pending.has_content {
                flush(std::mem::take(&mut pending), line_no, &mut out)?;
            }
            continue;
        }
        pending.has_content = true;
        if pending.error.is_some() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let trimmed = comment.trim_start();
            if let Some(v) = trimmed.strip_prefix("sent_id") .and_then(|r| r.trim_start().strip_prefix('=')) {
                pending.sentence.sent_id = Some(v.trim().to_owned());
            } else if let Some(v) = trimmed.strip_prefix("text").and_then(|r| r.trim_start().strip_prefix('=')) {
                pending.sentence.text = Some(v.trim().to_owned());
            } else {
                pending.sentence.comments.push(comment.to_owned());
            }
            continue;
        }
        match parse_token_line(line) {
            Ok(Line::Word(tok)) => {
                pending.sentence.tokens.push(tok);
                pending.token_lines.push(line_no);
            }
            Ok(Line::Ignored) => {}
            Err(kind) => pending.error = Some(ParseError { line: line_no, kind }),
        }
    }
    if pending.has_content {
        flush(pending, line_no, &mut out)?;
    }
    Ok(out)
}

/// Parses a string in abort mode.
pub fn parse_str(input: &str) -> Result<Vec<Sentence>, ParseError> {
    match parse_conllu(input.as_bytes(), ParseMode::Abort) {
        Ok(outcome) => Ok(outcome.sentences),
        Err(ConlluError::Parse(e)) => Err(e),
        Err(ConlluError::Io(_)) => unreachable!("reading from a byte slice cannot fail"),
    }
}

pub fn write_sentence(sentence: &Sentence, out: &mut String) {
    use std::fmt::Write;
    if let Some(id) = &sentence.sent_id {
        let _ = writeln!(out, "# sent_id = {id}");
    }
    if let Some(text) = &sentence.text {
        let _ = writeln!(out, "# text = {text}");
    }
    for c in &sentence.comments {
        let _ = writeln!(out, "#{c}");
    }
    for t in &sentence.tokens {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            t.id, t.form, t.lemma, t.upos, t.xpos, t.feats, t.head, t.deprel, t.deps, t.misc
        );
    }
    out.push('\n');
}

/// Serializes sentences; range and empty-node lines are not regenerated.
pub fn write_conllu(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        write_sentence(s, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const RANGE_FIXTURE: &str = "\
# sent_id = fr-1
# text = Il parle du livre.
1\tIl\til\tPRON\t_\tNumber=Sing|Person=3\t2\tnsubj\t_\t_
2\tparle\tparler\tVERB\t_\tNumber=Sing\t0\troot\t_\t_
3-4\tdu\t_\t_\t_\t_\t_\t_\t_\t_
3\tde\tde\tADP\t_\t_\t5\tcase\t_\t_
4\tle\tle\tDET\t_\tNumber=Sing\t5\tdet\t_\t_
5\tlivre\tlivre\tNOUN\t_\tGender=Masc|Number=Sing\t2\tobl\t_\t_
5.1\tfoo\tfoo\tX\t_\t_\t_\t_\t2:dep\t_
6\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_

";

    #[test]
    fn maps_columns_onto_fields() {
        let s = parse_str("1\tLes\tle\tDET\t_\tNumber=Plur\t2\tdet\t_\t_\n2\toffres\toffre\tNOUN\t_\t_\t0\troot\t_\t_\n")
            .unwrap();
        let t = &s[0].tokens[0];
        assert_eq!(t.id, 1);
        assert_eq!(t.form, "Les");
        assert_eq!(t.lemma, "le");
        assert_eq!(t.upos, "DET");
        assert_eq!(t.feats.number(), Some(Number::Plur));
        assert_eq!(t.feats.len(), 1);
        assert_eq!(t.head, 2);
        assert_eq!(t.deprel, "det");
    }

    #[test]
    fn empty_input() {
        assert!(parse_str("").unwrap().is_empty());
        assert!(write_conllu(&[]).is_empty());
    }

    #[test]
    fn drops_ranges_and_empty_nodes() {
        let s = parse_str(RANGE_FIXTURE).unwrap();
        assert_eq!(s.len(), 1);
        // 6 word lines; the range and empty-node lines do not count
        assert_eq!(s[0].tokens.len(), 6);
        assert_eq!(s[0].sent_id.as_deref(), Some("fr-1"));
        assert_eq!(s[0].text.as_deref(), Some("Il parle du livre."));
    }

    #[test]
    fn round_trip() {
        let s = parse_str(RANGE_FIXTURE).unwrap();
        let again = parse_str(&write_conllu(&s)).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn reports_line_numbers() {
        let input = "1\tIl\til\tPRON\t_\t_\t2\tnsubj\t_\t_\n2\tdort\tdormir\tVERB\t_\t_\n";
        let err = parse_str(input).unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.kind, ParseErrorKind::ColumnCount(6));

        let input = "1\tIl\til\tPRON\t_\t_\t9\tnsubj\t_\t_\n2\tdort\tdormir\tVERB\t_\t_\t0\troot\t_\t_\n";
        let err = parse_str(input).unwrap_err();
        assert_eq!(err.line, 1);
        assert!(matches!(err.kind, ParseErrorKind::Sentence(SentenceError::DanglingHead { id: 1, head: 9 })));

        let input = "x\tIl\til\tPRON\t_\t_\t0\troot\t_\t_\n";
        assert_eq!(parse_str(input).unwrap_err().kind, ParseErrorKind::BadId("x".into()));
    }

    #[test]
    fn skip_mode_keeps_good_sentences() {
        let input = "1\tA\ta\tX\t_\t_\t0\troot\t_\t_\n\n1\tB\tb\tX\t_\tNumber=Dual\t0\troot\t_\t_\n\n1\tC\tc\tX\t_\t_\t0\troot\t_\t_\n";
        let out = parse_conllu(input.as_bytes(), ParseMode::SkipSentence).unwrap();
        assert_eq!(out.sentences.len(), 2);
        assert_eq!(out.skipped.len(), 1);
        assert_eq!(out.skipped[0].line, 3);
        assert!(parse_conllu(input.as_bytes(), ParseMode::Abort).is_err());
    }

    #[test]
    fn rejects_cycles_and_duplicate_features() {
        let input = "1\tA\ta\tX\t_\t_\t2\tdep\t_\t_\n2\tB\tb\tX\t_\t_\t1\tdep\t_\t_\n3\tC\tc\tX\t_\t_\t0\troot\t_\t_\n";
        let err = parse_str(input).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Sentence(SentenceError::Cycle { .. })));
        assert!(MorphFeatures::parse("Number=Sing|Number=Plur").is_err());
        assert!(MorphFeatures::parse("Number=Dual").is_err());
    }

    #[test]
    fn dominance() {
        let s = parse_str(RANGE_FIXTURE).unwrap().remove(0);
        assert!(s.dominates(2, 3));
        assert!(s.dominates(5, 3));
        assert!(!s.dominates(1, 3));
    }
}
