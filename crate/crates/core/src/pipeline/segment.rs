//! Rule-based sentence splitting and fixed-size context windows.

use crate::error::ConfigError;

/// Tokens ending in a period that do not end a sentence.
const ABBREVIATIONS: &[&str] = &[
    "dr.", "e.g.", "etc.", "i.e.", "inc.", "jr.", "mr.", "mrs.", "ms.", "no.", "sr.", "st.", "u.s.", "vs.",
];

const QUOTES: &[char] = &['"', '\'', '\u{201c}', '\u{201d}', '\u{2018}', '\u{2019}'];

pub const MAX_WINDOW: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segmentation {
    pub segments: Vec<String>,
    pub sentences: usize,
    pub warnings: Vec<String>,
}

pub fn check_window(window: usize, overlap: usize) -> Result<(), ConfigError> {
    if !(1..=MAX_WINDOW).contains(&window) {
        return Err(ConfigError::Window(window));
    }
    if overlap >= window {
        return Err(ConfigError::Overlap { window, overlap });
    }
    Ok(())
}

fn is_abbreviation(before: &str) -> bool {
    let word = before.rsplit(char::is_whitespace).next().unwrap_or("");
    let word = word.trim_start_matches(|c: char| QUOTES.contains(&c) || c == '(');
    let lower = word.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}

/// Splits on `.`, `?` or `!` (plus any closing quotes or brackets) followed
/// by whitespace and then an uppercase letter or an opening quote.
/// Returns trimmed sentences; the second value is false when the text has
/// no terminator at all.
pub fn split_sentences(text: &str) -> (Vec<String>, bool) {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let mut saw_terminator = false;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if !matches!(c, '.' | '?' | '!') {
            i += 1;
            continue;
        }
        saw_terminator = true;
        let mut j = i + 1;
        while j < chars.len() && matches!(chars[j].1, '.' | '?' | '!' | ')' | ']') | QUOTES.contains(&chars[j].1) {
            j += 1;
        }
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        let boundary = k > j
            && k < chars.len()
            && (chars[k].1.is_uppercase() || QUOTES.contains(&chars[k].1))
            && !(c == '.' && is_abbreviation(&text[start..pos + 1]));
        if boundary {
            let end = chars.get(j).map_or(text.len(), |(p, _)| *p);
            let sentence = text[start..end].trim();
            if !sentence.is_empty() {
                out.push(sentence.to_string());
            }
            start = chars[k].0;
            i = k;
        } else {
            i = j;
        }
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail.to_string());
    }
    (out, saw_terminator)
}

/// Groups sentences into windows of `window` sentences, stepping by
/// `window - overlap`; the last window may be short.
pub fn segment(text: &str, window: usize, overlap: usize) -> Result<Segmentation, ConfigError> {
    check_window(window, overlap)?;
    let mut warnings = Vec::new();
    if text.trim().is_empty() {
        return Ok(Segmentation { segments: Vec::new(), sentences: 0, warnings });
    }
    let (sentences, saw_terminator) = split_sentences(text);
    if !saw_terminator {
        warnings.push("no sentence terminator found; using the whole text as one segment".to_string());
        return Ok(Segmentation { segments: vec![text.trim().to_string()], sentences: 1, warnings });
    }
    let step = window - overlap;
    let mut segments = Vec::new();
    let mut at = 0;
    while at < sentences.len() {
        let end = (at + window).min(sentences.len());
        segments.push(sentences[at..end].join(" "));
        if end == sentences.len() {
            break;
        }
        at += step;
    }
    Ok(Segmentation { segments, sentences: sentences.len(), warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{S1_TEXT, S2_TEXT};
    use proptest::prelude::*;

    const FIVE: &str = "Yesterday, law enforcement officers apprehended Johnathan Miller in the downtown area. \
        Miller is a 32-year-old resident of Greenview Avenue. The arrest followed a reported robbery. \
        Officers had responded within minutes. No injuries were reported.";

    fn squash(s: &str) -> String {
        s.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn five_sentences_make_three_plus_two() {
        let s = segment(FIVE, 3, 0).unwrap();
        assert_eq!(s.sentences, 5);
        assert_eq!(s.segments.len(), 2);
        assert!(s.segments[1].starts_with("Officers had"));
    }

    #[test]
    fn single_sentence_is_one_segment() {
        let s = segment(S1_TEXT, 3, 0).unwrap();
        assert_eq!(s.segments, vec![S1_TEXT.to_string()]);
    }

    #[test]
    fn abbreviations_do_not_split() {
        let (s, _) = split_sentences("Dr. Smith arrived. He left.");
        assert_eq!(s, ["Dr. Smith arrived.", "He left."]);
        let (s, _) = split_sentences("The U.S. Marshals came at 5 p.m. on Friday. Mr. Lee left.");
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn quotes_and_questions() {
        let (s, _) = split_sentences("\"Stop!\" she said. Was it him? \"Yes,\" he replied.");
        assert_eq!(s, ["\"Stop!\" she said.", "Was it him?", "\"Yes,\" he replied."]);
    }

    #[test]
    fn lowercase_after_period_is_not_a_boundary() {
        let (s, _) = split_sentences("Version 2. then more text.");
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn story_at_window_one() {
        let story = format!("{S1_TEXT} {S2_TEXT}");
        assert_eq!(segment(&story, 1, 0).unwrap().segments, [S1_TEXT, S2_TEXT]);
    }

    #[test]
    fn overlapping_windows() {
        let s = segment(FIVE, 3, 1).unwrap();
        // starts at sentences 0 and 2; the second reaches the end
        assert_eq!(s.segments.len(), 2);
        assert!(s.segments[1].starts_with("The arrest"));
    }

    #[test]
    fn unterminated_text_warns() {
        let s = segment("no terminator here", 3, 0).unwrap();
        assert_eq!(s.segments, ["no terminator here"]);
        assert_eq!(s.warnings.len(), 1);
        assert!(segment("  \n ", 3, 0).unwrap().segments.is_empty());
    }

    #[test]
    fn bad_windows_are_rejected() {
        assert!(matches!(segment(FIVE, 0, 0), Err(ConfigError::Window(0))));
        assert!(matches!(segment(FIVE, 11, 0), Err(ConfigError::Window(11))));
        assert!(matches!(segment(FIVE, 3, 3), Err(ConfigError::Overlap { .. })));
    }

    fn sentence() -> impl Strategy<Value = String> {
        ("[A-Z][a-z]{0,8}", prop::collection::vec("[a-z]{1,8}", 0..6), prop::sample::select(vec![".", "?", "!"]))
            .prop_map(|(head, rest, end)| {
                let mut s = head;
                for w in rest {
                    s.push(' ');
                    s.push_str(&w);
                }
                s + end
            })
            .prop_filter("ends in an abbreviation", |s| !is_abbreviation(s))
    }

    proptest! {
        #[test]
        fn segments_recover_the_sentence_stream(
            sents in prop::collection::vec(sentence(), 1..15),
            window in 1usize..=10,
            gaps in prop::collection::vec(prop::sample::select(vec![" ", "  ", "\n", " \t "]), 15),
        ) {
            let mut text = String::new();
            for (i, s) in sents.iter().enumerate() {
                if i > 0 { text.push_str(gaps[i]); }
                text.push_str(s);
            }
            let seg = segment(&text, window, 0).unwrap();
            prop_assert_eq!(seg.sentences, sents.len());
            prop_assert_eq!(squash(&seg.segments.join(" ")), squash(&text));
            prop_assert_eq!(seg.segments.len(), sents.len().div_ceil(window));
        }
    }
}
