//! Prompt templates and output parsing.

use std::collections::BTreeMap;
use std::fmt;

use crate::align::{tag_diff, TokenSeq};

use super::LlmError;

const COT_BODY: &str = include_str!("../../templates/cot.txt");
const OVERCORRECT_COT_BODY: &str = include_str!("../../templates/overcorrect_cot.txt");
const POST_CORRECT_BODY: &str = include_str!("../../templates/post_correct.txt");

pub const INPUT_KEY: &str = "INPUT";
pub const SOURCE_KEY: &str = "Source";
pub const OVERCORRECTED_KEY: &str = "Overcorrected output";
pub const UNDERCORRECTED_KEY: &str = "Undercorrected output";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemplateId {
    /// Zero-shot chain-of-thought correction that asks to keep sentence structure.
    Cot,
    /// Same prompt tuned to find as many errors as possible.
    OvercorrectCot,
    /// LLM post-correction given over- and undercorrected outputs with hint tags.
    PostCorrect,
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TemplateId::Cot => "cot",
            TemplateId::OvercorrectCot => "overcorrect_cot",
            TemplateId::PostCorrect => "post_correct",
        })
    }
}

/// A placeholder as it appears in a body, and the binding key that fills it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Placeholder {
    marker: &'static str,
    key: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub body: &'static str,
    placeholders: &'static [Placeholder],
}

const INPUT_PLACEHOLDERS: &[Placeholder] = &[Placeholder {
    marker: INPUT_KEY,
    key: INPUT_KEY,
}];

const POST_CORRECT_PLACEHOLDERS: &[Placeholder] = &[
    Placeholder {
        marker: "{{Source}}",
        key: SOURCE_KEY,
    },
    Placeholder {
        marker: "{{Overcorrected output}}",
        key: OVERCORRECTED_KEY,
    },
    Placeholder {
        marker: "{{Undercorrected output}}",
        key: UNDERCORRECTED_KEY,
    },
];

impl PromptTemplate {
    pub fn get(id: TemplateId) -> Self {
        let (body, placeholders) = match id {
            TemplateId::Cot => (COT_BODY, INPUT_PLACEHOLDERS),
            TemplateId::OvercorrectCot => (OVERCORRECT_COT_BODY, INPUT_PLACEHOLDERS),
            TemplateId::PostCorrect => (POST_CORRECT_BODY, POST_CORRECT_PLACEHOLDERS),
        };
        Self {
            id,
            body,
            placeholders,
        }
    }

    /// Binding keys this template needs.
    pub fn keys(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.placeholders.iter().map(|p| p.key)
    }

    /// Substitute every placeholder in one left-to-right pass; bound values
    /// are never rescanned.
    pub fn render(&self, bindings: &BTreeMap<&str, &str>) -> Result<String, LlmError> {
        for placeholder in self.placeholders {
            if !bindings.contains_key(placeholder.key) {
                return Err(LlmError::MissingBinding(placeholder.key.to_owned()));
            }
        }
        let mut out = String::with_capacity(self.body.len() + 64);
        let mut rest = self.body;
        loop {
            let next = self
                .placeholders
                .iter()
                .filter_map(|p| rest.find(p.marker).map(|pos| (pos, p)))
                .min_by_key(|(pos, _)| *pos);
            let Some((pos, placeholder)) = next else {
                out.push_str(rest);
                break;
            };
            out.push_str(&rest[..pos]);
            out.push_str(bindings[placeholder.key]);
            rest = &rest[pos + placeholder.marker.len()..];
        }
        Ok(out)
    }
}

/// Overcorrection prompt for one sentence.
pub fn overcorrect_prompt(source: &str) -> String {
    let bindings = BTreeMap::from([(INPUT_KEY, source)]);
    PromptTemplate::get(TemplateId::OvercorrectCot)
        .render(&bindings)
        .expect("INPUT is bound")
}

/// Post-correction prompt with `<R>/<M>/<U>` hints on both candidate outputs.
pub fn post_correct_prompt(source: &str, overcorrected: &str, undercorrected: &str) -> String {
    let src = TokenSeq::tokenize(source);
    let over = tag_diff(&src, &TokenSeq::tokenize(overcorrected));
    let under = tag_diff(&src, &TokenSeq::tokenize(undercorrected));
    let bindings = BTreeMap::from([
        (SOURCE_KEY, source),
        (OVERCORRECTED_KEY, over.as_str()),
        (UNDERCORRECTED_KEY, under.as_str()),
    ]);
    PromptTemplate::get(TemplateId::PostCorrect)
        .render(&bindings)
        .expect("all post-correct keys are bound")
}

const OPEN_TAG: &str = "<output>";
const CLOSE_TAG: &str = "</output>";

/// Extract the corrected sentence from a completion.
///
/// Takes the text between the first `<output>` and the last `</output>`. A
/// lone opening or closing tag bounds the text on that side only. Falls back
/// to `source_fallback` when nothing non-blank remains.
pub fn parse_output(raw_text: &str, source_fallback: &str) -> String {
    let open = raw_text.find(OPEN_TAG);
    let close = raw_text.rfind(CLOSE_TAG);
    let inner = match (open, close) {
        (Some(o), Some(c)) if o + OPEN_TAG.len() <= c => &raw_text[o + OPEN_TAG.len()..c],
        (Some(o), Some(_)) | (Some(o), None) => &raw_text[o + OPEN_TAG.len()..],
        (None, Some(c)) => &raw_text[..c],
        (None, None) => raw_text,
    };
    let trimmed = inner.trim();
    if trimmed.is_empty() {
        source_fallback.to_owned()
    } else {
        trimmed.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KEEP_STRUCTURE: &str = "keeping the original sentence structure unchanged as much as possible";
    const FIND_MANY: &str = "find as many errors as you can";

    #[test]
    fn overcorrect_template_wording() {
        let body = PromptTemplate::get(TemplateId::OvercorrectCot).body;
        assert!(body.contains(FIND_MANY));
        assert!(!body.contains(KEEP_STRUCTURE));
        let cot = PromptTemplate::get(TemplateId::Cot).body;
        assert!(cot.contains(KEEP_STRUCTURE));
        assert!(!cot.contains(FIND_MANY));
        // the instructions after the correction clause are shared word for word
        let tail = |b: &'static str| &b[b.find("Afterward,").unwrap()..];
        assert_eq!(tail(body), tail(cot));
    }

    #[test]
    fn renders_input() {
        let prompt = overcorrect_prompt("He go home .");
        assert!(prompt.contains("<input> He go home . </input>"));
        assert!(prompt.ends_with("Please start: <input> He go home . </input>:"));
        assert!(prompt.contains("<input> ERROR </input>"));
    }

    #[test]
    fn missing_binding_names_key() {
        let err = PromptTemplate::get(TemplateId::Cot)
            .render(&BTreeMap::new())
            .unwrap_err();
        assert!(matches!(err, LlmError::MissingBinding(ref k) if k == "INPUT"));
    }

    #[test]
    fn bound_values_are_not_rescanned() {
        let bindings = BTreeMap::from([(INPUT_KEY, "INPUT INPUT")]);
        let prompt = PromptTemplate::get(TemplateId::Cot).render(&bindings).unwrap();
        assert!(prompt.contains("<input> INPUT INPUT </input>"));
    }

    #[test]
    fn post_correct_sections() {
        let prompt = post_correct_prompt("He go home", "He went to home", "He go home");
        assert!(prompt.contains("Source: He go home\n"));
        assert!(prompt.contains("Overcorrect: He <R>went to</R> home\n"));
        assert!(prompt.contains("Undercorrect: He go home\n"));
        assert!(!prompt.contains("{{"));
        let template = PromptTemplate::get(TemplateId::PostCorrect);
        assert_eq!(
            template.keys().collect::<Vec<_>>(),
            [SOURCE_KEY, OVERCORRECTED_KEY, UNDERCORRECTED_KEY]
        );
    }

    #[test]
    fn parse_output_cases() {
        assert_eq!(parse_output("<output> He went home . </output>", "x"), "He went home .");
        assert_eq!(parse_output("He went home .", "x"), "He went home .");
        assert_eq!(parse_output("", "He go home ."), "He go home .");
        assert_eq!(parse_output("<output>   </output>", "src"), "src");
        assert_eq!(
            parse_output("Sure!\n<output> a </output> and <output> b </output>", "x"),
            "a </output> and <output> b"
        );
        assert_eq!(parse_output("<output> dangling", "x"), "dangling");
        assert_eq!(parse_output("</output> <output> a", "x"), "a");
    }
}
