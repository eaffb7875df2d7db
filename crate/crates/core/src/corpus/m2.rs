//! M2 corpus files.
//!
//! ```text
//! S I has a apple
//! A 1 2|||R:VERB|||have|||REQUIRED|||-NONE-|||0
//! A 2 3|||R:DET|||an|||REQUIRED|||-NONE-|||0
//!
//! ```
//!
//! Only coarse operation types are kept; on output the type field is
//! `M`, `R` or `U`.

use std::collections::BTreeMap;
use std::io::BufRead;

use crate::align::{validate_edit_set, Edit, TokenSeq};

use super::CorpusError;

const FIELD_SEP: &str = "|||";
const NONE_MARKER: &str = "-NONE-";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotatedSentence {
    pub source: TokenSeq,
    /// Annotator id to its sorted edit set. A noop annotation is an empty set.
    pub annotations: BTreeMap<u32, Vec<Edit>>,
}

impl AnnotatedSentence {
    pub fn new(source: TokenSeq) -> Self {
        Self {
            source,
            annotations: BTreeMap::new(),
        }
    }

    /// Edits of the given annotator; empty if the annotator is absent.
    pub fn edits_of(&self, annotator: u32) -> &[Edit] {
        self.annotations
            .get(&annotator)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Annotation sets in ascending annotator order, or a single empty set
    /// when the sentence carries no annotation lines.
    pub fn reference_sets(&self) -> Vec<Vec<Edit>> {
        if self.annotations.is_empty() {
            vec![Vec::new()]
        } else {
            self.annotations.values().cloned().collect()
        }
    }
}

struct Pending {
    sentence: AnnotatedSentence,
    first_line: usize,
}

/// Streaming M2 parser over any line source.
pub struct M2Reader<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
    done: bool,
}

impl<R: BufRead> M2Reader<R> {
    pub fn new(reader: R) -> Self {
        Self {
            lines: reader.lines(),
            line_no: 0,
            done: false,
        }
    }

    fn next_block(&mut self) -> Result<Option<AnnotatedSentence>, CorpusError> {
        let mut pending: Option<Pending> = None;
        for line in self.lines.by_ref() {
            let line = line?;
            self.line_no += 1;
            let line = line.strip_suffix('\r').unwrap_or(&line);

            if line.trim().is_empty() {
                if pending.is_some() {
                    break;
                }
                continue;
            }

            if let Some(rest) = line.strip_prefix('S').filter(|r| r.is_empty() || r.starts_with(' ')) {
                if pending.is_some() {
                    return Err(CorpusError::format(self.line_no, "S line inside a block"));
                }
                pending = Some(Pending {
                    sentence: AnnotatedSentence::new(TokenSeq::tokenize(rest)),
                    first_line: self.line_no,
                });
            } else if let Some(rest) = line.strip_prefix("A ") {
                let Some(block) = pending.as_mut() else {
                    return Err(CorpusError::format(self.line_no, "A line before any S line"));
                };
                parse_annotation(rest, self.line_no, &mut block.sentence)?;
            } else {
                return Err(CorpusError::format(self.line_no, "expected an S or A line"));
            }
        }

        let Some(Pending {
            mut sentence,
            first_line,
        }) = pending
        else {
            return Ok(None);
        };
        for edits in sentence.annotations.values_mut() {
            edits.sort();
            validate_edit_set(sentence.source.len(), edits).map_err(|source| {
                CorpusError::UnsortedEdits {
                    line: first_line,
                    source,
                }
            })?;
        }
        Ok(Some(sentence))
    }
}

impl<R: BufRead> Iterator for M2Reader<R> {
    type Item = Result<AnnotatedSentence, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self.next_block().transpose();
        if !matches!(item, Some(Ok(_))) {
            self.done = true;
        }
        item
    }
}

fn parse_annotation(
    rest: &str,
    line_no: usize,
    sentence: &mut AnnotatedSentence,
) -> Result<(), CorpusError> {
    let fields: Vec<&str> = rest.split(FIELD_SEP).collect();
    if fields.len() != 6 {
        return Err(CorpusError::format(
            line_no,
            format!("expected 6 |||-separated fields, found {}", fields.len()),
        ));
    }
    let annotator: u32 = fields[5]
        .trim()
        .parse()
        .map_err(|_| CorpusError::format(line_no, format!("bad annotator id {:?}", fields[5])))?;

    let mut span = fields[0].split_whitespace();
    let (Some(start), Some(end), None) = (span.next(), span.next(), span.next()) else {
        return Err(CorpusError::format(line_no, "span must be two integers"));
    };
    let err_type = fields[1].trim();
    let entry = sentence.annotations.entry(annotator).or_default();

    if start == "-1" && end == "-1" {
        if err_type.eq_ignore_ascii_case("noop") {
            return Ok(());
        }
        return Err(CorpusError::format(line_no, "span -1 -1 is only valid for noop"));
    }
    let parse_idx = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| CorpusError::format(line_no, format!("bad span index {s:?}")))
    };
    let (start, end) = (parse_idx(start)?, parse_idx(end)?);
    if start > end || end > sentence.source.len() {
        return Err(CorpusError::format(
            line_no,
            format!(
                "span {start} {end} invalid for a {}-token sentence",
                sentence.source.len()
            ),
        ));
    }

    let correction = fields[2].trim();
    let replacement = if correction == NONE_MARKER {
        TokenSeq::new()
    } else {
        TokenSeq::tokenize(correction)
    };
    // detection-only annotations (e.g. UNK) leave the text unchanged
    if replacement.tokens() == &sentence.source[start..end] {
        return Ok(());
    }
    let edit = Edit::new(start, end, replacement)
        .map_err(|e| CorpusError::format(line_no, e.to_string()))?;
    entry.push(edit);
    Ok(())
}

/// Parse a whole M2 document held in memory.
pub fn parse_m2(text: &str) -> Result<Vec<AnnotatedSentence>, CorpusError> {
    M2Reader::new(text.as_bytes()).collect()
}

pub fn write_sentence(out: &mut String, sentence: &AnnotatedSentence) {
    out.push('S');
    for token in sentence.source.iter() {
        out.push(' ');
        out.push_str(token);
    }
    out.push('\n');
    for (annotator, edits) in &sentence.annotations {
        if edits.is_empty() {
            out.push_str(&format!(
                "A -1 -1|||noop|||{NONE_MARKER}|||REQUIRED|||{NONE_MARKER}|||{annotator}\n"
            ));
        }
        for edit in edits {
            out.push_str(&format!(
                "A {} {}|||{}|||{}|||REQUIRED|||{NONE_MARKER}|||{annotator}\n",
                edit.start(),
                edit.end(),
                edit.op_type().code(),
                edit.replacement()
            ));
        }
    }
    out.push('\n');
}

/// Canonical M2 text: one block per sentence, each followed by a blank line.
pub fn write_m2<'a, I>(sentences: I) -> String
where
    I: IntoIterator<Item = &'a AnnotatedSentence>,
{
    let mut out = String::new();
    for sentence in sentences {
        write_sentence(&mut out, sentence);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edit(start: usize, end: usize, repl: &str) -> Edit {
        Edit::new(start, end, TokenSeq::tokenize(repl)).unwrap()
    }

    #[test]
    fn parses_single_edit() {
        let text = "S I has a apple\nA 1 2|||R:VERB|||have|||REQUIRED|||-NONE-|||0\n\n";
        let parsed = parse_m2(text).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0].source, TokenSeq::tokenize("I has a apple"));
        assert_eq!(parsed[0].edits_of(0), &[edit(1, 2, "have")]);
    }

    #[test]
    fn noop_gives_empty_annotation() {
        let text = "S Hello .\nA -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n\n";
        let parsed = parse_m2(text).unwrap();
        assert_eq!(parsed[0].annotations.get(&0), Some(&vec![]));
    }

    #[test]
    fn orphan_annotation_is_error() {
        let err = parse_m2("A 1 2|||R|||x|||REQUIRED|||-NONE-|||0\n").unwrap_err();
        assert!(matches!(err, CorpusError::Format { line: 1, .. }), "{err}");
    }

    #[test]
    fn malformed_lines() {
        for (text, line) in [
            ("S a b\nA 1 2|||R|||x\n", 2),
            ("S a b\nA x 2|||R|||x|||REQUIRED|||-NONE-|||0\n", 2),
            ("S a b\nA 1 5|||R|||x|||REQUIRED|||-NONE-|||0\n", 2),
            ("S a b\nA 1 2|||R|||x|||REQUIRED|||-NONE-|||z\n", 2),
            ("S a b\n\nS c\nQ nonsense\n", 4),
            ("S a b\nS c d\n", 2),
        ] {
            match parse_m2(text) {
                Err(CorpusError::Format { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn overlapping_edits_are_rejected() {
        let text = "S a b c\nA 0 2|||R|||x|||REQUIRED|||-NONE-|||0\nA 1 3|||R|||y|||REQUIRED|||-NONE-|||0\n";
        assert!(matches!(parse_m2(text), Err(CorpusError::UnsortedEdits { line: 1, .. })));
        // the same spans from different annotators are fine
        let text = "S a b c\nA 0 2|||R|||x|||REQUIRED|||-NONE-|||0\nA 1 3|||R|||y|||REQUIRED|||-NONE-|||1\n";
        assert!(parse_m2(text).is_ok());
    }

    #[test]
    fn multi_token_correction_and_deletion() {
        let text = "S He go to to school\nA 1 2|||R:VERB|||has gone|||REQUIRED|||-NONE-|||0\nA 3 4|||U:PREP||||||REQUIRED|||-NONE-|||0\n";
        let parsed = parse_m2(text).unwrap();
        assert_eq!(parsed[0].edits_of(0), &[edit(1, 2, "has gone"), edit(3, 4, "")]);
    }

    #[test]
    fn unsorted_lines_are_sorted() {
        let text = "S a b c\nA 2 3|||R|||z|||REQUIRED|||-NONE-|||0\nA 0 1|||R|||x|||REQUIRED|||-NONE-|||0\n";
        let parsed = parse_m2(text).unwrap();
        assert_eq!(parsed[0].edits_of(0), &[edit(0, 1, "x"), edit(2, 3, "z")]);
    }

    #[test]
    fn detection_only_lines_are_skipped() {
        let text = "S a b\nA 1 2|||UNK|||b|||REQUIRED|||-NONE-|||0\n";
        let parsed = parse_m2(text).unwrap();
        assert_eq!(parsed[0].annotations.get(&0), Some(&vec![]));
        // an empty insertion changes nothing either
        let parsed = parse_m2("S a\nA 1 1|||M||||||REQUIRED|||-NONE-|||0\n").unwrap();
        assert_eq!(parsed[0].annotations.get(&0), Some(&vec![]));
    }

    #[test]
    fn tolerates_crlf_and_missing_final_blank() {
        let text = "S a b\r\nA 0 1|||R|||x|||REQUIRED|||-NONE-|||0\r\n\r\nS c";
        let parsed = parse_m2(text).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[1].source, TokenSeq::tokenize("c"));
        assert!(parsed[1].annotations.is_empty());
    }

    #[test]
    fn writes_annotators_ascending() {
        let mut sentence = AnnotatedSentence::new(TokenSeq::tokenize("I has a apple"));
        sentence.annotations.insert(1, vec![edit(1, 2, "have"), edit(2, 3, "an")]);
        sentence.annotations.insert(0, vec![edit(3, 3, "red")]);
        sentence.annotations.insert(2, vec![]);
        let text = write_m2([&sentence]);
        assert_eq!(
            text,
            "S I has a apple\n\
             A 3 3|||M|||red|||REQUIRED|||-NONE-|||0\n\
             A 1 2|||R|||have|||REQUIRED|||-NONE-|||1\n\
             A 2 3|||R|||an|||REQUIRED|||-NONE-|||1\n\
             A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||2\n\n"
        );
        assert_eq!(parse_m2(&text).unwrap(), vec![sentence]);
    }

    #[test]
    fn empty_stream() {
        assert_eq!(write_m2([]), "");
        assert!(parse_m2("").unwrap().is_empty());
        assert!(parse_m2("\n\n").unwrap().is_empty());
    }

    #[test]
    fn reader_stops_after_error() {
        let mut reader = M2Reader::new("Q\nS a\n".as_bytes());
        assert!(reader.next().unwrap().is_err());
        assert!(reader.next().is_none());
    }
}
