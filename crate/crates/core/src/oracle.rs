//! Word-problem oracles: free reduction, Dehn's algorithm, multiplication tables.

use crate::presentation::{GroupPresentation, OracleKind};
use crate::word::{shortlex_cmp, Alphabet, Letter, NormalWord, Word};
use serde::Deserialize;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::path::Path;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("table file: {0}")]
    Table(String),
}

pub trait WordOracle: Send + Sync + std::fmt::Debug {
    fn kind(&self) -> &'static str;

    /// A word for the same element that is never longer than `w`.
    fn reduce(&self, w: &[Letter]) -> Result<Word, OracleError>;

    /// Whether `reduce` always returns a geodesic.
    fn reduce_is_geodesic(&self) -> bool;

    fn is_identity(&self, w: &[Letter]) -> Result<bool, OracleError> {
        Ok(self.reduce(w)?.is_empty())
    }

    /// Best shortlex representative the oracle can find on its own.
    fn normalize(&self, w: &[Letter]) -> Result<NormalWord, OracleError>;
}

pub fn make_oracle(p: &GroupPresentation) -> Result<Arc<dyn WordOracle>, OracleError> {
    Ok(match &p.oracle {
        OracleKind::Free => Arc::new(FreeOracle::new(p.alphabet.clone())),
        OracleKind::Dehn => Arc::new(DehnOracle::new(p)),
        OracleKind::Table(path) => Arc::new(TableOracle::load(p, path)?),
    })
}

#[derive(Debug)]
pub struct FreeOracle {
    alphabet: Alphabet,
}

impl FreeOracle {
    pub fn new(alphabet: Alphabet) -> Self {
        FreeOracle { alphabet }
    }
}

impl WordOracle for FreeOracle {
    fn kind(&self) -> &'static str {
        "free"
    }

    fn reduce(&self, w: &[Letter]) -> Result<Word, OracleError> {
        Ok(self.alphabet.free_reduce(w))
    }

    fn reduce_is_geodesic(&self) -> bool {
        true
    }

    fn normalize(&self, w: &[Letter]) -> Result<NormalWord, OracleError> {
        Ok(NormalWord(self.alphabet.free_reduce(w)))
    }
}

/// Dehn's algorithm for C'(1/6) presentations.
///
/// Every window of `L/2 + 1` letters that reads the start of a cyclic
/// conjugate of a relator is replaced by the inverse of the rest of it.
#[derive(Debug)]
pub struct DehnOracle {
    alphabet: Alphabet,
    /// (window length, window -> replacement)
    shortening: Vec<(usize, HashMap<Vec<Letter>, Vec<Letter>>)>,
    /// half-length windows of even relators -> the other half, inverted
    swaps: Vec<(usize, HashMap<Vec<Letter>, Vec<Vec<Letter>>>)>,
    orbit_budget: usize,
}

impl DehnOracle {
    pub fn new(p: &GroupPresentation) -> Self {
        let alpha = p.alphabet.clone();
        let mut shortening: Vec<(usize, HashMap<Vec<Letter>, Vec<Letter>>)> = Vec::new();
        let mut swaps: Vec<(usize, HashMap<Vec<Letter>, Vec<Vec<Letter>>>)> = Vec::new();
        for c in p.symmetrized() {
            let l = c.len();
            let h = l / 2 + 1;
            let key = c.letters()[..h].to_vec();
            let rep = alpha.inverse_word(&c.letters()[h..]).0;
            let slot = match shortening.iter().position(|(k, _)| *k == h) {
                Some(i) => i,
                None => {
                    shortening.push((h, HashMap::new()));
                    shortening.len() - 1
                }
            };
            shortening[slot].1.entry(key).or_insert(rep);
            if l % 2 == 0 {
                let half = l / 2;
                let key = c.letters()[..half].to_vec();
                let rep = alpha.inverse_word(&c.letters()[half..]).0;
                let slot = match swaps.iter().position(|(k, _)| *k == half) {
                    Some(i) => i,
                    None => {
                        swaps.push((half, HashMap::new()));
                        swaps.len() - 1
                    }
                };
                let e = swaps[slot].1.entry(key).or_default();
                if !e.contains(&rep) {
                    e.push(rep);
                }
            }
        }
        shortening.sort_by_key(|(h, _)| *h);
        swaps.sort_by_key(|(h, _)| *h);
        DehnOracle { alphabet: alpha, shortening, swaps, orbit_budget: 1 << 12 }
    }

    /// Dehn-reduced form of `w`: freely reduced, no window longer than half a relator.
    pub fn dehn_reduce(&self, w: &[Letter]) -> Vec<Letter> {
        let mut out: Vec<Letter> = Vec::with_capacity(w.len());
        let mut pending: Vec<Letter> = w.iter().rev().copied().collect();
        while let Some(x) = pending.pop() {
            if out.last() == Some(&self.alphabet.inv(x)) {
                out.pop();
                continue;
            }
            out.push(x);
            for (h, table) in &self.shortening {
                if out.len() >= *h {
                    if let Some(rep) = table.get(&out[out.len() - h..]) {
                        out.truncate(out.len() - h);
                        pending.extend(rep.iter().rev());
                        break;
                    }
                }
            }
        }
        out
    }

    /// Explores equal-length half swaps from a Dehn-reduced word and keeps the
    /// shortlex-least word seen, restarting whenever a swap enables a Dehn step.
    fn swap_orbit_min(&self, start: Vec<Letter>) -> Vec<Letter> {
        let mut current = start;
        'restart: loop {
            let mut seen: BTreeSet<Vec<Letter>> = BTreeSet::new();
            let mut queue = VecDeque::new();
            seen.insert(current.clone());
            queue.push_back(current.clone());
            while let Some(w) = queue.pop_front() {
                for (half, table) in &self.swaps {
                    if w.len() < *half {
                        continue;
                    }
                    for i in 0..=w.len() - half {
                        let Some(reps) = table.get(&w[i..i + half]) else { continue };
                        for rep in reps {
                            let mut v = w[..i].to_vec();
                            v.extend_from_slice(rep);
                            v.extend_from_slice(&w[i + half..]);
                            let r = self.dehn_reduce(&v);
                            if r.len() < w.len() {
                                current = r;
                                continue 'restart;
                            }
                            if seen.len() < self.orbit_budget && seen.insert(r.clone()) {
                                queue.push_back(r);
                            }
                        }
                    }
                }
            }
            return seen.into_iter().min_by(|a, b| shortlex_cmp(a, b)).unwrap();
        }
    }
}

impl WordOracle for DehnOracle {
    fn kind(&self) -> &'static str {
        "dehn"
    }

    fn reduce(&self, w: &[Letter]) -> Result<Word, OracleError> {
        Ok(Word(self.dehn_reduce(w)))
    }

    fn reduce_is_geodesic(&self) -> bool {
        false
    }

    fn normalize(&self, w: &[Letter]) -> Result<NormalWord, OracleError> {
        let r = self.dehn_reduce(w);
        Ok(NormalWord(Word(self.swap_orbit_min(r))))
    }
}

#[derive(Deserialize)]
struct TableFile {
    generators: Vec<String>,
    #[serde(default)]
    identity: usize,
    action: Vec<Vec<Option<usize>>>,
}

/// Right-multiplication table `action[g][s] = g s`, possibly partial.
#[derive(Debug)]
pub struct TableOracle {
    identity: usize,
    action: Vec<Vec<Option<u32>>>,
    normal: OnceLock<Vec<Option<Word>>>,
}

impl TableOracle {
    pub fn load(p: &GroupPresentation, path: &Path) -> Result<Self, OracleError> {
        let text = std::fs::read_to_string(path).map_err(|e| OracleError::Table(format!("{}: {e}", path.display())))?;
        Self::from_json(p, &text)
    }

    pub fn from_json(p: &GroupPresentation, text: &str) -> Result<Self, OracleError> {
        let t: TableFile = serde_json::from_str(text).map_err(|e| OracleError::Table(e.to_string()))?;
        if t.generators != p.alphabet.names() {
            return Err(OracleError::Table(format!(
                "table generators {:?} do not match alphabet {:?}",
                t.generators,
                p.alphabet.names()
            )));
        }
        let n = t.action.len();
        if t.identity >= n {
            return Err(OracleError::Table("identity out of range".into()));
        }
        let mut action = Vec::with_capacity(n);
        for row in &t.action {
            if row.len() != p.alphabet.len() {
                return Err(OracleError::Table("row width differs from alphabet size".into()));
            }
            let mut r = Vec::with_capacity(row.len());
            for e in row {
                match e {
                    Some(x) if *x >= n => return Err(OracleError::Table(format!("entry {x} out of range"))),
                    Some(x) => r.push(Some(*x as u32)),
                    None => r.push(None),
                }
            }
            action.push(r);
        }
        Ok(TableOracle { identity: t.identity, action, normal: OnceLock::new() })
    }

    pub fn element_count(&self) -> usize {
        self.action.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn step(&self, g: usize, s: Letter) -> Option<usize> {
        self.action[g][s as usize].map(|x| x as usize)
    }

    pub fn evaluate(&self, w: &[Letter]) -> Result<usize, OracleError> {
        let mut g = self.identity;
        for (i, &s) in w.iter().enumerate() {
            g = self
                .step(g, s)
                .ok_or_else(|| OracleError::BudgetExceeded(format!("missing table entry at letter {i}")))?;
        }
        Ok(g)
    }

    fn normal_forms(&self) -> &Vec<Option<Word>> {
        self.normal.get_or_init(|| {
            let mut nf: Vec<Option<Word>> = vec![None; self.action.len()];
            nf[self.identity] = Some(Word::empty());
            let mut queue = VecDeque::from([self.identity]);
            while let Some(g) = queue.pop_front() {
                for s in 0..self.action[g].len() {
                    if let Some(h) = self.action[g][s] {
                        let h = h as usize;
                        if nf[h].is_none() {
                            nf[h] = Some(nf[g].as_ref().unwrap().concat(&[s as Letter]));
                            queue.push_back(h);
                        }
                    }
                }
            }
            nf
        })
    }

    pub fn normal_form_of(&self, g: usize) -> Result<Word, OracleError> {
        self.normal_forms()[g]
            .clone()
            .ok_or_else(|| OracleError::BudgetExceeded(format!("element {g} unreachable in table")))
    }
}

impl WordOracle for TableOracle {
    fn kind(&self) -> &'static str {
        "table"
    }

    fn reduce(&self, w: &[Letter]) -> Result<Word, OracleError> {
        let g = self.evaluate(w)?;
        self.normal_form_of(g)
    }

    fn reduce_is_geodesic(&self) -> bool {
        true
    }

    fn normalize(&self, w: &[Letter]) -> Result<NormalWord, OracleError> {
        Ok(NormalWord(self.reduce(w)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surface() -> GroupPresentation {
        GroupPresentation::parse("gens: a b c d\nrel: [a,b][c,d]").unwrap()
    }

    #[test]
    fn dehn_kills_relator_conjugates() {
        let p = surface();
        let o = DehnOracle::new(&p);
        for c in p.symmetrized() {
            assert!(o.is_identity(c.letters()).unwrap());
        }
        let w = p.parse_word("a b a^-1").unwrap();
        assert!(!o.is_identity(w.letters()).unwrap());
    }

    #[test]
    fn dehn_shortens_long_relator_window() {
        let p = surface();
        let o = DehnOracle::new(&p);
        // five letters of the relator become the inverse of the other three
        let w = p.parse_word("a b a^-1 b^-1 c").unwrap();
        let r = o.reduce(w.letters()).unwrap();
        assert_eq!(p.alphabet.render(r.letters()), "d c d^-1");
        let back = o.reduce(&[w.letters(), &p.alphabet.inverse_word(r.letters()).0].concat()).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn half_swaps_find_shortlex_least() {
        let p = surface();
        let o = DehnOracle::new(&p);
        let w = p.parse_word("d c d^-1 c^-1").unwrap();
        let nf = o.normalize(w.letters()).unwrap();
        assert_eq!(p.alphabet.render(nf.letters()), "a b a^-1 b^-1");
    }

    #[test]
    fn free_oracle_is_free_reduction() {
        let p = GroupPresentation::parse("gens: a b").unwrap();
        let o = make_oracle(&p).unwrap();
        let w = p.parse_word("a b b^-1 a^-1 b").unwrap();
        assert_eq!(o.normalize(w.letters()).unwrap().letters(), &[2]);
        assert!(o.reduce_is_geodesic());
    }

    #[test]
    fn table_oracle_cyclic_group() {
        let p = GroupPresentation::parse("gens: a\nrel: a^5\noracle: table t.json").unwrap();
        let json = r#"{"generators":["a","a^-1"],"identity":0,
            "action":[[1,4],[2,0],[3,1],[4,2],[0,3]]}"#;
        let o = TableOracle::from_json(&p, json).unwrap();
        let nf = o.normalize(&[0, 0, 0]).unwrap();
        assert_eq!(nf.letters(), &[1, 1]);
        assert!(o.is_identity(&[0; 5]).unwrap());
    }

    #[test]
    fn partial_table_reports_budget() {
        let p = GroupPresentation::parse("gens: a\noracle: table t.json").unwrap();
        let json = r#"{"generators":["a","a^-1"],"identity":0,"action":[[1,null],[null,0]]}"#;
        let o = TableOracle::from_json(&p, json).unwrap();
        assert!(matches!(o.reduce(&[0, 0]), Err(OracleError::BudgetExceeded(_))));
    }
}
