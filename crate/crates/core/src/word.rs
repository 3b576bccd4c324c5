//! Letters, words and the symmetric generating alphabet.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// Index into the symmetric alphabet. Its numeric order is the shortlex order.
pub type Letter = u8;

/// Generators together with their formal inverses, in shortlex order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    names: Vec<String>,
    inverse: Vec<Letter>,
}

impl Alphabet {
    /// Builds an alphabet from `(name, inverse index)` pairs.
    pub fn new(names: Vec<String>, inverse: Vec<Letter>) -> Self {
        assert_eq!(names.len(), inverse.len());
        for (i, &j) in inverse.iter().enumerate() {
            assert_eq!(inverse[j as usize] as usize, i, "inverse must be an involution");
            assert_ne!(i, j as usize, "letters may not be their own inverse");
        }
        Alphabet { names, inverse }
    }

    /// `a, a^-1, b, b^-1, ...` in the given generator order.
    pub fn from_generators<S: AsRef<str>>(gens: &[S]) -> Self {
        let mut names = Vec::new();
        let mut inverse = Vec::new();
        for (k, g) in gens.iter().enumerate() {
            names.push(g.as_ref().to_string());
            names.push(format!("{}^-1", g.as_ref()));
            inverse.push((2 * k + 1) as Letter);
            inverse.push((2 * k) as Letter);
        }
        Alphabet { names, inverse }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn inv(&self, l: Letter) -> Letter {
        self.inverse[l as usize]
    }

    pub fn name(&self, l: Letter) -> &str {
        &self.names[l as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn inverse_table(&self) -> &[Letter] {
        &self.inverse
    }

    pub fn letter(&self, name: &str) -> Option<Letter> {
        self.names.iter().position(|n| n == name).map(|i| i as Letter)
    }

    pub fn inverse_word(&self, w: &[Letter]) -> Word {
        Word(w.iter().rev().map(|&l| self.inv(l)).collect())
    }

    pub fn free_reduce(&self, w: &[Letter]) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(w.len());
        for &l in w {
            if out.last() == Some(&self.inv(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn is_freely_reduced(&self, w: &[Letter]) -> bool {
        w.windows(2).all(|p| p[1] != self.inv(p[0]))
    }

    pub fn is_cyclically_reduced(&self, w: &[Letter]) -> bool {
        self.is_freely_reduced(w)
            && (w.len() < 2 || w[0] != self.inv(w[w.len() - 1]))
    }

    pub fn render(&self, w: &[Letter]) -> String {
        if w.is_empty() {
            return "e".to_string();
        }
        w.iter().map(|&l| self.name(l)).collect::<Vec<_>>().join(" ")
    }
}

/// A word over the symmetric alphabet.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
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

    pub fn concat(&self, other: &[Letter]) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(other);
        Word(v)
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

/// Length first, then lexicographic in letter order.
pub fn shortlex_cmp(a: &[Letter], b: &[Letter]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        shortlex_cmp(&self.0, &other.0)
    }
}

/// Shortlex-least representative of a group element.
///
/// Only the ball and the oracles hand these out.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NormalWord(pub(crate) Word);

impl NormalWord {
    pub fn word(&self) -> &Word {
        &self.0
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0 .0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Every prefix of a shortlex normal form is again one.
    pub fn prefix(&self, m: usize) -> NormalWord {
        NormalWord(Word(self.letters()[..m.min(self.len())].to_vec()))
    }
}

/// Numbers of the form k/2, stored as k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub fn from_halves(k: i64) -> Self {
        HalfInt(k)
    }

    pub fn from_int(n: i64) -> Self {
        HalfInt(2 * n)
    }

    pub fn halves(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Exact multiple by an integer.
    pub fn times(self, k: i64) -> HalfInt {
        HalfInt(self.0 * k)
    }

    pub fn plus_int(self, k: i64) -> HalfInt {
        HalfInt(self.0 + 2 * k)
    }

    pub fn ceil(self) -> i64 {
        self.0.div_euclid(2) + i64::from(self.0.rem_euclid(2) != 0)
    }

    pub fn floor(self) -> i64 {
        self.0.div_euclid(2)
    }

    /// Parses `3`, `2.5` or `-1.5`; anything finer than a half is rejected.
    pub fn parse(s: &str) -> Option<HalfInt> {
        let v: f64 = s.trim().parse().ok()?;
        let k = v * 2.0;
        if (k - k.round()).abs() > 1e-9 {
            return None;
        }
        Some(HalfInt(k.round() as i64))
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 + o.0)
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 - o.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}.5", if self.0 < 0 { format!("-{}", (-self.0) / 2) } else { (self.0 / 2).to_string() })
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.is_integer() {
            s.serialize_i64(self.0 / 2)
        } else {
            s.serialize_f64(self.as_f64())
        }
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        HalfInt::parse(&v.to_string()).ok_or_else(|| serde::de::Error::custom("not a half-integer"))
    }
}
