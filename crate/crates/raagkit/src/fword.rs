//! Reduced words in a finitely generated free group.
//!
//! Letters are nonzero integers: +k is the k-th generator (1-based), -k its
//! inverse. Every constructor reduces, so a `FreeWord` is always a reduced
//! word and its length is the free-group word length.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FreeWord {
    letters: Vec<i32>,
}

impl FreeWord {
    pub fn identity() -> FreeWord {
        FreeWord { letters: Vec::new() }
    }

    /// The `index`-th generator (0-based) as a one-letter word.
    pub fn generator(index: usize) -> FreeWord {
        FreeWord { letters: vec![index as i32 + 1] }
    }

    /// Builds a word from raw letters, cancelling adjacent inverse pairs.
    /// Zero entries are rejected.
    pub fn from_letters(raw: &[i32]) -> Result<FreeWord> {
        let mut letters: Vec<i32> = Vec::with_capacity(raw.len());
        for &l in raw {
            if l == 0 {
                return Err(Error::Parse { detail: "free-word letter 0 is not valid".into() });
            }
            if letters.last() == Some(&-l) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        Ok(FreeWord { letters })
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord { letters: self.letters.iter().rev().map(|l| -l).collect() }
    }

    pub fn concat(&self, other: &FreeWord) -> FreeWord {
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            if letters.last() == Some(&-l) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        FreeWord { letters }
    }

    pub fn pow(&self, n: i64) -> FreeWord {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = FreeWord::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    /// Largest 0-based generator index used, if any.
    pub fn max_generator(&self) -> Option<usize> {
        self.letters.iter().map(|l| l.unsigned_abs() as usize - 1).max()
    }

    /// Replaces each generator by its image: letter ±k becomes
    /// images[k-1]^(±1). Errors when a letter has no image.
    pub fn substitute(&self, images: &[FreeWord]) -> Result<FreeWord> {
        let mut out = FreeWord::identity();
        for &l in &self.letters {
            let idx = l.unsigned_abs() as usize - 1;
            let image = images.get(idx).ok_or_else(|| Error::Precondition {
                op: "substitute",
                detail: format!("letter {l} has no image among {} generators", images.len()),
            })?;
            let piece = if l > 0 { image.clone() } else { image.inverse() };
            out = out.concat(&piece);
        }
        Ok(out)
    }

    /// Parses whitespace-separated tokens over the given generator names.
    /// A token is a name, optionally followed by `^-1` or `^k`; the single
    /// token `1` is the identity.
    pub fn parse(text: &str, names: &[&str]) -> Result<FreeWord> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens == ["1"] {
            return Ok(FreeWord::identity());
        }
        let mut raw = Vec::new();
        for (position, token) in tokens.iter().enumerate() {
            let (name, exponent) = match token.split_once('^') {
                Some((n, e)) => {
                    let exp: i64 = e.parse().map_err(|_| Error::Parse {
                        detail: format!("bad exponent in token `{token}`"),
                    })?;
                    (n, exp)
                }
                None => (*token, 1),
            };
            let idx = names.iter().position(|&n| n == name).ok_or(Error::UnknownGenerator {
                token: name.to_owned(),
                position,
            })?;
            let letter = if exponent >= 0 { idx as i32 + 1 } else { -(idx as i32 + 1) };
            for _ in 0..exponent.unsigned_abs() {
                raw.push(letter);
            }
        }
        FreeWord::from_letters(&raw)
    }

    pub fn to_text(&self, names: &[&str]) -> String {
        if self.letters.is_empty() {
            return "1".to_owned();
        }
        self.letters
            .iter()
            .map(|&l| {
                let idx = l.unsigned_abs() as usize - 1;
                let name = names.get(idx).map_or("?", |n| *n);
                if l > 0 { name.to_owned() } else { format!("{name}^-1") }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_reduces() {
        let w = FreeWord::from_letters(&[1, 2, -2, -1, 1]).unwrap();
        assert_eq!(w.letters(), &[1]);
        assert!(FreeWord::from_letters(&[0]).is_err());
        assert!(FreeWord::from_letters(&[1, -1]).unwrap().is_empty());
    }

    #[test]
    fn group_operations() {
        let a = FreeWord::generator(0);
        let b = FreeWord::generator(1);
        let ab = a.concat(&b);
        assert_eq!(ab.letters(), &[1, 2]);
        assert!(ab.concat(&ab.inverse()).is_empty());
        assert_eq!(ab.pow(-2).letters(), &[-2, -1, -2, -1]);
        assert_eq!(a.pow(3).len(), 3);
        assert_eq!(ab.max_generator(), Some(1));
    }

    #[test]
    fn substitution_composes() {
        // V -> U V, applied to U V^-1.
        let w = FreeWord::from_letters(&[1, -2]).unwrap();
        let images = [FreeWord::generator(0), FreeWord::from_letters(&[1, 2]).unwrap()];
        let out = w.substitute(&images).unwrap();
        assert_eq!(out.letters(), &[1, -2, -1]);
        assert!(w.substitute(&images[..1]).is_err());
    }

    #[test]
    fn text_round_trips() {
        let names = ["a", "b"];
        let w = FreeWord::parse("a b^-1 a^2", &names).unwrap();
        assert_eq!(w.letters(), &[1, -2, 1, 1]);
        assert_eq!(w.to_text(&names), "a b^-1 a a");
        assert_eq!(FreeWord::parse("1", &names).unwrap(), FreeWord::identity());
        assert!(FreeWord::parse("c", &names).is_err());
        assert_eq!(FreeWord::parse("b^-2", &names).unwrap().letters(), &[-2, -2]);
    }
}
