use serde::{Deserialize, Serialize};

use super::tagger::{Tag, TaggedToken, Tagger};
use super::NlError;

const NEGATIONS: [&str; 7] = ["don't", "dont", "do", "not", "doesn't", "no", "never"];
const NEGATORS: [&str; 6] = ["don't", "dont", "not", "doesn't", "no", "never"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerbPhrase {
    /// Indices into the tagged token sequence, ascending.
    pub indices: Vec<usize>,
    pub tokens: Vec<TaggedToken>,
    /// Set when a negating adverb ("never") precedes the phrase.
    #[serde(default)]
    pub negated: bool,
}

impl VerbPhrase {
    /// Lowercased words of the phrase, punctuation dropped.
    pub fn text(&self) -> String {
        words(&self.tokens)
    }

    /// Whether a negation word ("don't", "not", …) comes before the first
    /// verb.
    pub fn has_negation(&self) -> bool {
        self.tokens
            .iter()
            .take_while(|t| t.tag != Tag::Verb)
            .any(|t| NEGATORS.contains(&t.token.to_lowercase().as_str()))
    }

    /// The phrase from its first verb or negation word on; leading subject
    /// words ("the robot should") are dropped.
    pub fn core_text(&self) -> String {
        let start = self
            .tokens
            .iter()
            .position(|t| t.tag == Tag::Verb || NEGATIONS.contains(&t.token.to_lowercase().as_str()))
            .unwrap_or(0);
        words(&self.tokens[start..])
    }
}

fn words(tokens: &[TaggedToken]) -> String {
    tokens.iter().filter(|t| !t.is_punct()).map(|t| t.token.to_lowercase()).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitResult {
    pub phrases: Vec<VerbPhrase>,
    pub conjunctions: Vec<String>,
    pub adverbs: Vec<String>,
}

/// Cuts the token stream at verbs and connectives. A verb opens a new phrase
/// when the current one already has a verb, unless it directly follows it; a conjunction closes the current
/// phrase; consecutive conjunctions merge ("and then"); adverbs are pulled
/// out. Verbless stretches join the neighbouring phrase.
pub fn split(tokens: &[TaggedToken], tagger: &Tagger) -> Result<SplitResult, NlError> {
    let mut out = SplitResult { phrases: Vec::new(), conjunctions: Vec::new(), adverbs: Vec::new() };
    let mut cur = VerbPhrase { indices: Vec::new(), tokens: Vec::new(), negated: false };
    let mut cur_has_verb = false;
    let mut negate_next = false;
    let mut prev_conj = false;

    let flush = |cur: &mut VerbPhrase, has_verb: &mut bool, out: &mut SplitResult| {
        if *has_verb {
            out.phrases.push(std::mem::replace(
                cur,
                VerbPhrase { indices: Vec::new(), tokens: Vec::new(), negated: false },
            ));
            *has_verb = false;
        }
    };

    for (i, tok) in tokens.iter().enumerate() {
        match tok.tag {
            Tag::Conj => {
                flush(&mut cur, &mut cur_has_verb, &mut out);
                let word = tok.token.to_lowercase();
                match out.conjunctions.last_mut() {
                    Some(last) if prev_conj => {
                        last.push(' ');
                        last.push_str(&word);
                    }
                    _ => out.conjunctions.push(word),
                }
                prev_conj = true;
                continue;
            }
            Tag::Adv => {
                out.adverbs.push(tok.token.to_lowercase());
                if tagger.is_negating_adverb(&tok.token) {
                    negate_next = true;
                }
            }
            Tag::Verb => {
                // "take hold", "go grab": a verb right after a verb stays put.
                let follows_verb = i > 0 && tokens[i - 1].tag == Tag::Verb && cur.indices.last() == Some(&(i - 1));
                if cur_has_verb && !follows_verb {
                    flush(&mut cur, &mut cur_has_verb, &mut out);
                }
                if !cur_has_verb {
                    cur.negated = negate_next;
                    negate_next = false;
                }
                cur_has_verb = true;
                cur.indices.push(i);
                cur.tokens.push(tok.clone());
            }
            _ => {
                cur.indices.push(i);
                cur.tokens.push(tok.clone());
            }
        }
        if !tok.is_punct() {
            prev_conj = false;
        }
    }
    if cur_has_verb {
        out.phrases.push(cur);
    } else if let Some(last) = out.phrases.last_mut() {
        last.indices.extend(cur.indices);
        last.tokens.extend(cur.tokens);
    } else {
        return Err(NlError::NoVerb);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(s: &str) -> Result<SplitResult, NlError> {
        let t = Tagger::default();
        split(&t.tag_tokens(s)?, &t)
    }

    fn texts(r: &SplitResult) -> Vec<String> {
        r.phrases.iter().map(VerbPhrase::text).collect()
    }

    #[test]
    fn running_example() {
        let r = run("turn on the lamp and pick up the cube").unwrap();
        assert_eq!(texts(&r), vec!["turn on the lamp", "pick up the cube"]);
        assert_eq!(r.conjunctions, vec!["and"]);
        assert!(r.adverbs.is_empty());
    }

    #[test]
    fn adverbs_are_removed() {
        let r = run("Always don't hit into walls.").unwrap();
        assert_eq!(texts(&r), vec!["don't hit into walls"]);
        assert!(r.conjunctions.is_empty());
        assert_eq!(r.adverbs, vec!["always"]);
    }

    #[test]
    fn connectives_merge() {
        let r = run("Open the door and then charge yourself.").unwrap();
        assert_eq!(texts(&r), vec!["open the door", "charge yourself"]);
        assert_eq!(r.conjunctions, vec!["and then"]);
        let r = run("Turn on the lamp, then pick up the cube").unwrap();
        assert_eq!(r.conjunctions, vec!["then"]);
        assert_eq!(texts(&r), vec!["turn on the lamp", "pick up the cube"]);
    }

    #[test]
    fn subject_is_kept_but_trimmed_for_matching() {
        let r = run("The robot should pick up the purple cube").unwrap();
        assert_eq!(r.phrases.len(), 1);
        assert_eq!(r.phrases[0].text(), "the robot should pick up the purple cube");
        assert_eq!(r.phrases[0].core_text(), "pick up the purple cube");
        let r = run("do not walk into water").unwrap();
        assert_eq!(r.phrases[0].core_text(), "do not walk into water");
        assert!(r.phrases[0].has_negation());
        assert!(!run("walk into water").unwrap().phrases[0].has_negation());
    }

    #[test]
    fn negating_adverb_marks_phrase() {
        let r = run("never walk into water").unwrap();
        assert!(r.phrases[0].negated);
        assert_eq!(r.adverbs, vec!["never"]);
    }

    #[test]
    fn adjacent_verbs_stay_together() {
        let r = run("Take hold of the purple cube").unwrap();
        assert_eq!(texts(&r), vec!["take hold of the purple cube"]);
        let r = run("go grab the cube and sit down").unwrap();
        assert_eq!(texts(&r), vec!["go grab the cube", "sit down"]);
    }

    #[test]
    fn no_verb() {
        assert!(matches!(run("the lamp"), Err(NlError::NoVerb)));
    }

    #[test]
    fn spans_cover_input() {
        let t = Tagger::default();
        let toks = t.tag_tokens("first turn on the lamp and then always pick up the cube").unwrap();
        let r = split(&toks, &t).unwrap();
        let mut covered: Vec<usize> = r.phrases.iter().flat_map(|p| p.indices.clone()).collect();
        covered.sort();
        let removed: Vec<usize> =
            toks.iter().enumerate().filter(|(_, t)| matches!(t.tag, Tag::Conj | Tag::Adv)).map(|(i, _)| i).collect();
        let mut all = covered.clone();
        all.extend(removed);
        all.sort();
        assert_eq!(all, (0..toks.len()).collect::<Vec<_>>());
    }
}
