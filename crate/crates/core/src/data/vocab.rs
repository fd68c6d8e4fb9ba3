use std::collections::HashMap;
use std::path::Path;

use crate::error::{CoreError, Result};

pub const PAD: usize = 0;
pub const BOS: usize = 1;
pub const EOS: usize = 2;
pub const UNK: usize = 3;
pub const SPECIALS: [&str; 4] = ["<pad>", "<bos>", "<eos>", "<unk>"];

const HEADER: &str =
    "# scc-vocab v1: specials <pad>=0 <bos>=1 <eos>=2 <unk>=3; token on line k after this header has id k+3";

/// Word ↔ id mapping with the four fixed specials in front.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Vocabulary {
    /// Frequency-ranked words occurring at least `min_frequency` times,
    /// ties broken lexicographically, at most `max_size` non-special entries.
    pub fn build<'a, I, S>(sentences: I, min_frequency: usize, max_size: usize) -> Vocabulary
    where
        I: IntoIterator<Item = &'a S>,
        S: AsRef<[String]> + 'a + ?Sized,
    {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for s in sentences {
            for w in s.as_ref() {
                *counts.entry(w.as_str()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> =
            counts.into_iter().filter(|&(w, n)| n >= min_frequency.max(1) && !SPECIALS.contains(&w)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(max_size);
        Vocabulary::from_words(ranked.into_iter().map(|(w, _)| w.to_string()))
    }

    fn from_words(words: impl IntoIterator<Item = String>) -> Vocabulary {
        let words: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).chain(words).collect();
        let ids = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Vocabulary { words, ids }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, word: &str) -> usize {
        self.ids.get(word).copied().unwrap_or(UNK)
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.words.get(id).map(String::as_str)
    }

    /// Ids of `words` (at most `max_len`) followed by the end marker.
    pub fn encode(&self, words: &[String], max_len: usize) -> Vec<usize> {
        words.iter().take(max_len).map(|w| self.id(w)).chain(std::iter::once(EOS)).collect()
    }

    /// Space-joined words of `ids`, stopping at the end marker and skipping
    /// padding and the start marker.
    pub fn decode(&self, ids: &[usize]) -> String {
        ids.iter()
            .take_while(|&&i| i != EOS)
            .filter(|&&i| i != PAD && i != BOS)
            .map(|&i| self.word(i).unwrap_or(SPECIALS[UNK]))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for w in &self.words[SPECIALS.len()..] {
            out.push_str(w);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Vocabulary> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.starts_with("# scc-vocab v1") => {}
            _ => return Err(CoreError::Data("vocabulary file lacks its header".into())),
        }
        let words: Vec<String> = lines.map(str::to_string).collect();
        let vocab = Vocabulary::from_words(words);
        if vocab.ids.len() != vocab.words.len() {
            return Err(CoreError::Data("vocabulary has duplicate entries".into()));
        }
        Ok(vocab)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| CoreError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Vocabulary> {
        Vocabulary::from_text(&std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn threshold_and_unknowns() {
        let corpus = [words("a a b")];
        let v = Vocabulary::build(&corpus, 2, 20000);
        assert_eq!(v.len(), 5);
        assert_eq!(v.id("a"), 4);
        assert_eq!(v.id("b"), UNK);
    }

    #[test]
    fn ranking_ties_and_cap() {
        let corpus = [words("z z y y x x x w w"), words("v")];
        let v = Vocabulary::build(&corpus, 1, 3);
        assert_eq!(v.len(), 7);
        assert_eq!((v.id("x"), v.id("w"), v.id("y")), (4, 5, 6));
        assert_eq!(v.id("z"), UNK);
    }

    #[test]
    fn file_round_trip_is_byte_stable() {
        let corpus = [words("the move is good"), words("the move is bad !")];
        let a = Vocabulary::build(&corpus, 1, 100);
        let b = Vocabulary::build(&corpus, 1, 100);
        assert_eq!(a.to_text(), b.to_text());
        let back = Vocabulary::from_text(&a.to_text()).unwrap();
        assert_eq!(back, a);
        let ids = a.encode(&words("the move is awful"), 50);
        assert_eq!(*ids.last().unwrap(), EOS);
        assert_eq!(a.decode(&ids), "the move is <unk>");
        assert_eq!(a.encode(&words("a b c"), 2).len(), 3);
    }
}
