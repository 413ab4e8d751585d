use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

/// A word in the generators: letter `+k` is generator `k − 1`, `−k` its
/// inverse. The empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Word(pub Vec<i32>);

/// Position of a letter in the order g1, g1⁻¹, g2, g2⁻¹, ….
fn rank(letter: i32) -> u32 {
    2 * (letter.unsigned_abs() - 1) + u32::from(letter < 0)
}

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

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|l| -l).collect())
    }

    /// Concatenation followed by free reduction.
    pub fn then(&self, other: &Word) -> Self {
        let mut out = self.0.clone();
        out.extend_from_slice(&other.0);
        Word(out).free_reduce()
    }

    pub fn free_reduce(self) -> Self {
        let mut out: Vec<i32> = Vec::with_capacity(self.0.len());
        for l in self.0 {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    /// Shortlex order: length first, then letters in generator order.
    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            self.0
                .iter()
                .map(|&l| rank(l))
                .cmp(other.0.iter().map(|&l| rank(l)))
        })
    }

    /// Renders the word with generator names, e.g. `S T^-1`.
    pub fn render(&self, names: &[String]) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        self.0
            .iter()
            .map(|&l| {
                let name = names
                    .get(l.unsigned_abs() as usize - 1)
                    .cloned()
                    .unwrap_or_else(|| format!("g{}", l.abs()));
                if l < 0 {
                    format!("{name}^-1")
                } else {
                    name
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&[]))
    }
}
