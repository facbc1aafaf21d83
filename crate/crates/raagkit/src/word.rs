//! Letters, words, and the geodesic word calculus.
//!
//! Words over a defining graph multiply subject to the commutation
//! relations the graph declares.  Two operations drive everything else:
//!
//! * [`reduce`] deletes cancelling pairs until the word is geodesic
//!   (shortest in its group element).  A pair `x ... x^-1` cancels when
//!   every letter strictly between commutes with `x`, meaning it shares
//!   `x`'s vertex or is adjacent to it.
//! * [`canonical`] shuffles a geodesic word into the ShortLex-least word
//!   of its element, so canonical words compare by plain equality.
//!
//! Letters order by vertex index, positive before negative; words order
//! by length first, then letter-by-letter.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::DefiningGraph;

/// Exponent of a letter: `Plus` is the generator, `Minus` its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// A single letter: a generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub vertex: usize,
    pub sign: Sign,
}

impl Letter {
    pub fn new(vertex: usize, sign: Sign) -> Self {
        Letter { vertex, sign }
    }

    pub fn positive(vertex: usize) -> Self {
        Letter { vertex, sign: Sign::Plus }
    }

    pub fn negative(vertex: usize) -> Self {
        Letter { vertex, sign: Sign::Minus }
    }

    pub fn inverse(self) -> Self {
        Letter { vertex: self.vertex, sign: self.sign.flip() }
    }
}

/// A word as a letter sequence.  Construction does not reduce; call
/// [`reduce`] or [`canonical`] explicitly.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Concatenation without reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Bitmask of vertices whose letters occur in the word.
    pub fn support_mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, l| m | (1 << l.vertex))
    }

    /// Letter multiset as counts indexed `[vertex][sign]`.
    pub fn letter_counts(&self, vertex_count: usize) -> Vec<[usize; 2]> {
        let mut counts = vec![[0usize; 2]; vertex_count];
        for l in &self.0 {
            counts[l.vertex][if l.sign == Sign::Plus { 0 } else { 1 }] += 1;
        }
        counts
    }

    /// ShortLex order: length first, then letters.
    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }

    /// Parses a word string over the graph's generators.
    ///
    /// Two grammars are accepted.  The token grammar splits on whitespace
    /// into `name` or `name^-1` tokens.  When the input contains no
    /// whitespace or `^` and is not a single vertex name, each character
    /// is read as a one-letter name, uppercase meaning the inverse; this
    /// compact form requires every referenced vertex name to be a single
    /// lowercase letter.  The empty string and `"1"` denote the identity.
    pub fn parse(graph: &DefiningGraph, text: &str) -> Result<Word> {
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed == "1" {
            return Ok(Word::identity());
        }
        if trimmed.contains(char::is_whitespace) || trimmed.contains('^') {
            return Self::parse_tokens(graph, trimmed);
        }
        if graph.vertex_index(trimmed).is_some() {
            return Self::parse_tokens(graph, trimmed);
        }
        Self::parse_compact(graph, trimmed)
    }

    fn parse_tokens(graph: &DefiningGraph, text: &str) -> Result<Word> {
        let mut letters = Vec::new();
        for (position, token) in text.split_whitespace().enumerate() {
            let (name, sign) = match token.strip_suffix("^-1") {
                Some(base) => (base, Sign::Minus),
                None => match token.strip_suffix("^1") {
                    Some(base) => (base, Sign::Plus),
                    None => (token, Sign::Plus),
                },
            };
            if name.is_empty() || name.contains('^') {
                return Err(Error::UnknownGenerator { token: token.to_owned(), position });
            }
            let vertex = graph.vertex_index(name).ok_or_else(|| Error::UnknownGenerator {
                token: token.to_owned(),
                position,
            })?;
            letters.push(Letter { vertex, sign });
        }
        Ok(Word(letters))
    }

    fn parse_compact(graph: &DefiningGraph, text: &str) -> Result<Word> {
        let mut letters = Vec::new();
        for (position, ch) in text.chars().enumerate() {
            let lower = ch.to_ascii_lowercase();
            let name = lower.to_string();
            let vertex = graph.vertex_index(&name).ok_or_else(|| Error::UnknownGenerator {
                token: ch.to_string(),
                position,
            })?;
            let sign = if ch.is_ascii_uppercase() { Sign::Minus } else { Sign::Plus };
            letters.push(Letter { vertex, sign });
        }
        Ok(Word(letters))
    }

    /// Renders the word in token form; the identity prints as `1`.
    pub fn display<'a>(&'a self, graph: &'a DefiningGraph) -> WordDisplay<'a> {
        WordDisplay { word: self, graph }
    }

    pub fn to_text(&self, graph: &DefiningGraph) -> String {
        self.display(graph).to_string()
    }
}

pub struct WordDisplay<'a> {
    word: &'a Word,
    graph: &'a DefiningGraph,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return f.write_str("1");
        }
        for (i, l) in self.word.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(self.graph.vertex_name(l.vertex))?;
            if l.sign == Sign::Minus {
                f.write_str("^-1")?;
            }
        }
        Ok(())
    }
}

/// Validates that every letter's vertex lies in the graph.
pub fn check_letters(graph: &DefiningGraph, letters: &[Letter]) -> Result<()> {
    for l in letters {
        if l.vertex >= graph.vertex_count() {
            return Err(Error::LetterOutOfRange {
                index: l.vertex,
                vertex_count: graph.vertex_count(),
            });
        }
    }
    Ok(())
}

/// Reduces a word to geodesic form.
///
/// Single left-to-right pass keeping the prefix reduced: each incoming
/// letter scans the prefix right-to-left across letters of adjacent
/// distinct vertices; meeting its own inverse cancels both, meeting its
/// own vertex with equal sign or a non-adjacent vertex stops the scan.
/// The result is geodesic and represents the same group element.
pub fn reduce(graph: &DefiningGraph, letters: &[Letter]) -> Vec<Letter> {
    let mut stack: Vec<Letter> = Vec::with_capacity(letters.len());
    'outer: for &x in letters {
        let mut k = stack.len();
        while k > 0 {
            k -= 1;
            let y = stack[k];
            if y.vertex == x.vertex {
                if y.sign != x.sign {
                    stack.remove(k);
                    continue 'outer;
                }
                break;
            }
            if !graph.adjacent(y.vertex, x.vertex) {
                break;
            }
        }
        stack.push(x);
    }
    stack
}

/// True when the word contains no cancelling pair, checked directly from
/// the definition.  Quadratic; intended for tests and validation.
pub fn is_reduced(graph: &DefiningGraph, letters: &[Letter]) -> bool {
    for i in 0..letters.len() {
        'pair: for j in (i + 1)..letters.len() {
            if letters[j].vertex == letters[i].vertex {
                if letters[j].sign != letters[i].sign {
                    for k in (i + 1)..j {
                        let t = letters[k].vertex;
                        if t != letters[i].vertex && !graph.adjacent(t, letters[i].vertex) {
                            continue 'pair;
                        }
                    }
                    return false;
                }
                break 'pair;
            }
            if !graph.adjacent(letters[j].vertex, letters[i].vertex) {
                break 'pair;
            }
        }
    }
    true
}

/// ShortLex normal form: reduces, then repeatedly emits the least letter
/// that can shuffle to the front.
///
/// A letter can reach the front when every earlier letter has a distinct
/// adjacent vertex; a letter of the same vertex or of a non-adjacent
/// vertex blocks it.  Greedy extraction yields the global ShortLex
/// minimum over all shuffles of the geodesic word.
pub fn canonical(graph: &DefiningGraph, letters: &[Letter]) -> Vec<Letter> {
    let mut remaining = reduce(graph, letters);
    let mut out = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let mut seen: u64 = 0;
        let mut best: Option<(Letter, usize)> = None;
        for (i, &l) in remaining.iter().enumerate() {
            if seen & !graph.link_mask(l.vertex) == 0 {
                match best {
                    Some((b, _)) if b <= l => {}
                    _ => best = Some((l, i)),
                }
            }
            seen |= 1 << l.vertex;
        }
        let (l, i) = best.expect("front letter is always movable");
        out.push(l);
        remaining.remove(i);
    }
    out
}

/// Geodesic length of the element the word represents.
pub fn geodesic_length(graph: &DefiningGraph, letters: &[Letter]) -> usize {
    reduce(graph, letters).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DefiningGraph;

    fn w(graph: &DefiningGraph, text: &str) -> Vec<Letter> {
        Word::parse(graph, text).unwrap().0
    }

    #[test]
    fn reduce_cancels_across_commuting_letters() {
        let g = DefiningGraph::path(&["a", "b", "c"]).unwrap();
        assert_eq!(reduce(&g, &w(&g, "a b a^-1")), w(&g, "b"));
        assert_eq!(reduce(&g, &w(&g, "a c a^-1")), w(&g, "a c a^-1"));
        assert_eq!(reduce(&g, &w(&g, "b a c b^-1 c^-1 a^-1")), Vec::new());
    }

    #[test]
    fn reduce_is_idempotent_and_geodesic() {
        let g = DefiningGraph::cycle(&["v1", "v2", "v3", "v4", "v5"]).unwrap();
        let word = w(&g, "v1 v2 v1^-1 v2^-1 v3 v3^-1 v4");
        let r = reduce(&g, &word);
        assert!(is_reduced(&g, &r));
        assert_eq!(reduce(&g, &r), r);
    }

    /// All shuffles of a geodesic word, by closing under adjacent swaps of
    /// commuting distinct letters; the canonical form must be the ShortLex
    /// minimum of this set.
    fn shuffle_closure(graph: &DefiningGraph, start: &[Letter]) -> Vec<Vec<Letter>> {
        let mut seen = vec![start.to_vec()];
        let mut queue = vec![start.to_vec()];
        while let Some(cur) = queue.pop() {
            for i in 0..cur.len().saturating_sub(1) {
                let (x, y) = (cur[i], cur[i + 1]);
                if x.vertex != y.vertex && graph.adjacent(x.vertex, y.vertex) {
                    let mut next = cur.clone();
                    next.swap(i, i + 1);
                    if !seen.contains(&next) {
                        seen.push(next.clone());
                        queue.push(next);
                    }
                }
            }
        }
        seen
    }

    #[test]
    fn canonical_is_shortlex_min_of_shuffles() {
        let g = DefiningGraph::path(&["a", "b", "c"]).unwrap();
        let start = w(&g, "c a b");
        let closure = shuffle_closure(&g, &start);
        let min = closure
            .iter()
            .min_by(|x, y| Word(x.to_vec()).shortlex_cmp(&Word(y.to_vec())))
            .unwrap()
            .clone();
        let canon = canonical(&g, &start);
        assert_eq!(canon, min);
        // `a` cannot pass `c`, so the minimum starts with `b`
        assert_eq!(Word(canon).to_text(&g), "b c a");
    }

    #[test]
    fn canonical_orders_commuting_letters() {
        let g = DefiningGraph::complete(&["a", "b"]).unwrap();
        assert_eq!(canonical(&g, &w(&g, "b a")), w(&g, "a b"));
        assert_eq!(canonical(&g, &w(&g, "b a b a")), w(&g, "a a b b"));
        assert_eq!(canonical(&g, &w(&g, "a^-1 a b")), w(&g, "b"));
    }

    #[test]
    fn parse_rejects_unknown_names() {
        let g = DefiningGraph::free(&["a", "b"]).unwrap();
        assert!(Word::parse(&g, "a q").is_err());
        assert!(Word::parse(&g, "aq").is_err());
        assert!(Word::parse(&g, "a^2").is_err());
    }

    #[test]
    fn compact_grammar_reads_case_as_sign() {
        let g = DefiningGraph::free(&["a", "b"]).unwrap();
        assert_eq!(w(&g, "aB"), w(&g, "a b^-1"));
        assert_eq!(Word::parse(&g, "1").unwrap(), Word::identity());
    }

    #[test]
    fn display_round_trips() {
        let g = DefiningGraph::path(&["a", "b", "c"]).unwrap();
        let word = Word(w(&g, "a b^-1 c"));
        let text = word.to_text(&g);
        assert_eq!(text, "a b^-1 c");
        assert_eq!(Word::parse(&g, &text).unwrap(), word);
    }
}
