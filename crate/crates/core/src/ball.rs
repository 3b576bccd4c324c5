//! Cayley balls indexed by shortlex normal forms.
//!
//! Elements are numbered sphere by sphere in shortlex order, so element 0 is
//! the identity and `S_n` is a contiguous range. Each element stores its
//! parent (the normal form minus its last letter) and the last letter.

use crate::oracle::{make_oracle, OracleError, TableOracle, WordOracle};
use crate::par;
use crate::presentation::{GroupPresentation, OracleKind};
use crate::word::{HalfInt, Letter, NormalWord, Word};
use serde::Serialize;
use std::collections::{HashMap, HashSet};
use std::ops::Range;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

pub const NONE: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum BallError {
    #[error("ball of radius {radius} exceeds the element cap {cap} (reached {reached} at radius {at})")]
    TooLarge { radius: usize, cap: usize, reached: usize, at: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("inconsistent ball: {0}")]
    Inconsistent(String),
}

#[derive(Clone, Copy, Debug)]
pub struct BallOptions {
    pub radius: usize,
    pub element_cap: usize,
}

impl BallOptions {
    pub fn new(radius: usize) -> Self {
        BallOptions { radius, element_cap: 2_000_000 }
    }
}

/// Lower and upper bound on a word distance. Equal bounds mean the value is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DistanceBounds {
    pub lo: u32,
    pub hi: u32,
}

impl DistanceBounds {
    pub fn exact(d: u32) -> Self {
        DistanceBounds { lo: d, hi: d }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn value(&self) -> Option<u32> {
        self.is_exact().then_some(self.lo)
    }

    /// `Some(true/false)` when the comparison `d <= k` is decided.
    pub fn at_most(&self, k: u32) -> Option<bool> {
        if self.hi <= k {
            Some(true)
        } else if self.lo > k {
            Some(false)
        } else {
            None
        }
    }
}

/// Bounds on a Gromov product, in halves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProductBounds {
    pub lo: HalfInt,
    pub hi: HalfInt,
}

impl ProductBounds {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

pub struct CayleyBall {
    presentation: GroupPresentation,
    oracle: Arc<dyn WordOracle>,
    radius: usize,
    ngen: usize,
    parent: Vec<u32>,
    last: Vec<Letter>,
    level: Vec<u16>,
    offsets: Vec<usize>,
    adj: Vec<u32>,
    buckets: OnceLock<Buckets>,
}

/// Ball elements grouped by an abelian invariant, for exact membership tests
/// of words the oracle cannot shorten into the ball.
struct Buckets {
    key: AbelianKey,
    map: HashMap<Vec<i64>, Vec<u32>>,
}

/// Linear functionals on exponent sums that vanish on every relator, plus the
/// length parity when all relators have even length.
#[derive(Clone, Debug)]
pub struct AbelianKey {
    gen_of: Vec<(usize, i64)>,
    functionals: Vec<Vec<i64>>,
    parity: bool,
}

impl AbelianKey {
    pub fn new(p: &GroupPresentation) -> Self {
        let a = &p.alphabet;
        let mut gen_of = vec![(0usize, 0i64); a.len()];
        let mut k = 0;
        for l in 0..a.len() {
            let li = a.inv(l as Letter) as usize;
            if l < li {
                gen_of[l] = (k, 1);
                gen_of[li] = (k, -1);
                k += 1;
            }
        }
        let rows: Vec<Vec<i64>> = p
            .relators
            .iter()
            .map(|r| {
                let mut v = vec![0i64; k];
                for &l in r.letters() {
                    let (g, sgn) = gen_of[l as usize];
                    v[g] += sgn;
                }
                v
            })
            .collect();
        let functionals = integer_nullspace(&rows, k);
        let parity = !p.relators.is_empty() && p.relators.iter().all(|r| r.len() % 2 == 0);
        AbelianKey { gen_of, functionals, parity }
    }

    pub fn of(&self, w: &[Letter]) -> Vec<i64> {
        let k = self.functionals.first().map_or(0, |f| f.len());
        let mut v = vec![0i64; k];
        for &l in w {
            let (g, sgn) = self.gen_of[l as usize];
            v[g] += sgn;
        }
        let mut key: Vec<i64> = self.functionals.iter().map(|f| f.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        if self.parity {
            key.push((w.len() % 2) as i64);
        }
        key
    }
}

/// Integer basis of `{c : row . c = 0 for every row}` by fraction-free elimination.
fn integer_nullspace(rows: &[Vec<i64>], k: usize) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..k {
        let Some(pr) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, pr);
        for i in 0..m.len() {
            if i != r && m[i][c] != 0 {
                let (a, b) = (m[r][c], m[i][c]);
                for j in 0..k {
                    m[i][j] = m[i][j] * a - m[r][j] * b;
                }
                let g = m[i].iter().fold(0i128, |g, &x| num_integer::gcd(g, x));
                if g > 1 {
                    for x in &mut m[i] {
                        *x /= g;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut basis = Vec::new();
    for f in 0..k {
        if pivots.contains(&f) {
            continue;
        }
        // c_f = L, c_p = -m[row][f] * L / m[row][p] with L the lcm of pivot entries
        let l = pivots.iter().enumerate().fold(1i128, |l, (row, &p)| num_integer::lcm(l, m[row][p].abs()));
        let mut c = vec![0i128; k];
        c[f] = l;
        for (row, &p) in pivots.iter().enumerate() {
            c[p] = -m[row][f] * l / m[row][p];
        }
        let g = c.iter().fold(0i128, |g, &x| num_integer::gcd(g, x)).max(1);
        basis.push(c.iter().map(|&x| (x / g) as i64).collect());
    }
    basis
}

impl std::fmt::Debug for CayleyBall {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CayleyBall")
            .field("radius", &self.radius)
            .field("elements", &self.len())
            .field("oracle", &self.oracle.kind())
            .finish()
    }
}

impl CayleyBall {
    pub fn build(p: &GroupPresentation, opts: BallOptions) -> Result<Self, BallError> {
        let oracle = make_oracle(p)?;
        Self::build_with_oracle(p, oracle, opts)
    }

    pub fn build_with_oracle(p: &GroupPresentation, oracle: Arc<dyn WordOracle>, opts: BallOptions) -> Result<Self, BallError> {
        if opts.radius > u16::MAX as usize - 1 {
            return Err(BallError::Inconsistent("radius too large".into()));
        }
        let mut b = CayleyBall {
            presentation: p.clone(),
            oracle,
            radius: opts.radius,
            ngen: p.alphabet.len(),
            parent: vec![NONE],
            last: vec![0],
            level: vec![0],
            offsets: vec![0, 1],
            adj: vec![NONE; p.alphabet.len()],
            buckets: OnceLock::new(),
        };
        match &p.oracle {
            OracleKind::Table(path) => {
                let t = TableOracle::load(p, path)?;
                b.grow_from_table(&t, opts)?;
            }
            _ => b.grow_by_link_closure(opts)?,
        }
        b.check_dehn_irreducible()?;
        Ok(b)
    }

    /// Builds from an in-memory table; used when the table is not on disk.
    pub fn build_from_table(p: &GroupPresentation, table: TableOracle, opts: BallOptions) -> Result<Self, BallError> {
        let table = Arc::new(table);
        let mut b = CayleyBall {
            presentation: p.clone(),
            oracle: table.clone(),
            radius: opts.radius,
            ngen: p.alphabet.len(),
            parent: vec![NONE],
            last: vec![0],
            level: vec![0],
            offsets: vec![0, 1],
            adj: vec![NONE; p.alphabet.len()],
            buckets: OnceLock::new(),
        };
        b.grow_from_table(&table, opts)?;
        Ok(b)
    }

    pub(crate) fn from_parts(
        presentation: GroupPresentation,
        oracle: Arc<dyn WordOracle>,
        radius: usize,
        parent: Vec<u32>,
        last: Vec<Letter>,
        offsets: Vec<usize>,
        adj: Vec<u32>,
    ) -> Result<Self, BallError> {
        let ngen = presentation.alphabet.len();
        let n = parent.len();
        if last.len() != n || adj.len() != n * ngen || offsets.len() != radius + 2 || offsets[radius + 1] != n {
            return Err(BallError::Inconsistent("array lengths disagree".into()));
        }
        let mut level = vec![0u16; n];
        for k in 0..=radius {
            for l in &mut level[offsets[k]..offsets[k + 1]] {
                *l = k as u16;
            }
        }
        Ok(CayleyBall { presentation, oracle, radius, ngen, parent, last, level, offsets, adj, buckets: OnceLock::new() })
    }

    fn push_element(&mut self, parent: u32, letter: Letter, level: usize) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(parent);
        self.last.push(letter);
        self.level.push(level as u16);
        self.adj.extend(std::iter::repeat(NONE).take(self.ngen));
        id
    }

    fn set_edge(&mut self, u: u32, s: Letter, v: u32) {
        let si = self.presentation.alphabet.inv(s);
        self.adj[u as usize * self.ngen + s as usize] = v;
        self.adj[v as usize * self.ngen + si as usize] = u;
    }

    fn grow_from_table(&mut self, t: &TableOracle, opts: BallOptions) -> Result<(), BallError> {
        let mut index: HashMap<usize, u32> = HashMap::new();
        let mut tid: Vec<usize> = vec![t.identity()];
        index.insert(t.identity(), 0);
        for n in 1..=opts.radius + 1 {
            let prev = self.offsets[n - 1]..self.offsets[n];
            for u in prev {
                for s in 0..self.ngen {
                    let h = match t.step(tid[u], s as Letter) {
                        Some(h) => h,
                        None if n > opts.radius => continue,
                        None => {
                            return Err(OracleError::BudgetExceeded(format!(
                                "missing table entry for element {} and letter {s}",
                                tid[u]
                            ))
                            .into())
                        }
                    };
                    if let Some(&v) = index.get(&h) {
                        self.set_edge(u as u32, s as Letter, v);
                    } else if n <= opts.radius {
                        if self.parent.len() >= opts.element_cap {
                            return Err(BallError::TooLarge { radius: opts.radius, cap: opts.element_cap, reached: self.parent.len(), at: n });
                        }
                        let v = self.push_element(u as u32, s as Letter, n);
                        index.insert(h, v);
                        tid.push(h);
                        self.set_edge(u as u32, s as Letter, v);
                    }
                }
            }
            if n <= opts.radius {
                self.offsets.push(self.parent.len());
            }
        }
        Ok(())
    }

    /// Sphere by sphere: every unknown edge `(u, s)` out of `S_{n-1}` is either
    /// identified with a known vertex or with other unknown edges by walking
    /// round relator cells whose remaining edges are already known. Each class
    /// of unknown edges becomes one new element.
    fn grow_by_link_closure(&mut self, opts: BallOptions) -> Result<(), BallError> {
        let alpha = self.presentation.alphabet.clone();
        let g = self.ngen;
        // conjugates grouped by first letter
        let mut by_first: Vec<Vec<Vec<Letter>>> = vec![Vec::new(); g];
        for c in self.presentation.symmetrized() {
            by_first[c.letters()[0] as usize].push(c.0.clone());
        }
        for n in 1..=opts.radius + 1 {
            let start = self.offsets[n - 1];
            let end = self.offsets[n];
            let count = end - start;
            let adj = &self.adj;
            let level = &self.level;
            // for each pair: the relator-cell consequences
            let links: Vec<Vec<(usize, Link)>> = par::map_range(count, |k| {
                let u = (start + k) as u32;
                let mut out = Vec::new();
                for s in 0..g {
                    if adj[u as usize * g + s] != NONE {
                        continue;
                    }
                    let pid = k * g + s;
                    for r in &by_first[s] {
                        let l = r.len();
                        let mut x = u;
                        let mut ok = true;
                        for j in (2..l).rev() {
                            let y = adj[x as usize * g + alpha.inv(r[j]) as usize];
                            if y == NONE {
                                ok = false;
                                break;
                            }
                            x = y;
                        }
                        if !ok {
                            continue;
                        }
                        let t = alpha.inv(r[1]);
                        let y = adj[x as usize * g + t as usize];
                        if y != NONE {
                            out.push((pid, Link::Known(y)));
                        } else if level[x as usize] as usize == n - 1 {
                            out.push((pid, Link::Pair((x as usize - start) * g + t as usize)));
                        }
                    }
                }
                out
            });
            let npairs = count * g;
            let mut uf = UnionFind::new(npairs);
            let mut known = vec![NONE; npairs];
            for list in &links {
                for &(p, link) in list {
                    match link {
                        Link::Pair(q) => uf.union(p, q),
                        Link::Known(v) => {
                            if known[p] != NONE && known[p] != v {
                                return Err(BallError::Inconsistent(format!("edge resolves to two vertices at level {n}")));
                            }
                            known[p] = v;
                        }
                    }
                }
            }
            let mut class_target = vec![NONE; npairs];
            for p in 0..npairs {
                if known[p] != NONE {
                    let r = uf.find(p);
                    if class_target[r] != NONE && class_target[r] != known[p] {
                        return Err(BallError::Inconsistent(format!("class resolves to two vertices at level {n}")));
                    }
                    class_target[r] = known[p];
                }
            }
            for p in 0..npairs {
                let u = (start + p / g) as u32;
                let s = (p % g) as Letter;
                if self.adj[u as usize * g + s as usize] != NONE {
                    continue;
                }
                let r = uf.find(p);
                if class_target[r] == NONE {
                    if n > opts.radius {
                        continue;
                    }
                    if self.parent.len() >= opts.element_cap {
                        return Err(BallError::TooLarge { radius: opts.radius, cap: opts.element_cap, reached: self.parent.len(), at: n });
                    }
                    class_target[r] = self.push_element(u, s, n);
                }
                let v = class_target[r];
                self.set_edge(u, s, v);
            }
            if n <= opts.radius {
                self.offsets.push(self.parent.len());
            }
        }
        Ok(())
    }

    fn check_dehn_irreducible(&self) -> Result<(), BallError> {
        let bad = par::map_range(self.len(), |i| {
            let w = self.word(i as u32);
            match self.oracle.reduce(w.letters()) {
                Ok(r) if r.len() == w.len() => None,
                Ok(_) => Some(format!("normal form of element {i} is not reduced")),
                Err(e) => Some(e.to_string()),
            }
        });
        match bad.into_iter().flatten().next() {
            Some(msg) => Err(BallError::Inconsistent(msg)),
            None => Ok(()),
        }
    }

    pub fn presentation(&self) -> &GroupPresentation {
        &self.presentation
    }

    pub fn oracle(&self) -> &Arc<dyn WordOracle> {
        &self.oracle
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn generator_count(&self) -> usize {
        self.ngen
    }

    pub fn sphere(&self, n: usize) -> Range<u32> {
        if n > self.radius {
            return 0..0;
        }
        self.offsets[n] as u32..self.offsets[n + 1] as u32
    }

    pub fn sphere_size(&self, n: usize) -> usize {
        let r = self.sphere(n);
        (r.end - r.start) as usize
    }

    pub fn sphere_sizes(&self) -> Vec<usize> {
        (0..=self.radius).map(|n| self.sphere_size(n)).collect()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn level(&self, g: u32) -> usize {
        self.level[g as usize] as usize
    }

    pub fn parent(&self, g: u32) -> u32 {
        self.parent[g as usize]
    }

    pub fn parents(&self) -> &[u32] {
        &self.parent
    }

    pub fn last_letters(&self) -> &[Letter] {
        &self.last
    }

    pub fn adjacency(&self) -> &[u32] {
        &self.adj
    }

    /// `g s`, if it lies in the ball and the edge is known.
    pub fn step(&self, g: u32, s: Letter) -> Option<u32> {
        let v = self.adj[g as usize * self.ngen + s as usize];
        (v != NONE).then_some(v)
    }

    pub fn word(&self, mut g: u32) -> Word {
        let mut v = Vec::with_capacity(self.level(g));
        while g != 0 {
            v.push(self.last[g as usize]);
            g = self.parent[g as usize];
        }
        v.reverse();
        Word(v)
    }

    pub fn normal_word(&self, g: u32) -> NormalWord {
        NormalWord(self.word(g))
    }

    pub fn render(&self, g: u32) -> String {
        self.presentation.alphabet.render(self.word(g).letters())
    }

    /// `p^n_m`: the element spelled by the first `m` letters of the normal form.
    pub fn prefix(&self, mut g: u32, m: usize) -> u32 {
        while self.level(g) > m {
            g = self.parent[g as usize];
        }
        g
    }

    /// Follows a word from the identity without reducing it.
    pub fn walk(&self, w: &[Letter]) -> Option<u32> {
        let mut g = 0u32;
        for &s in w {
            g = self.step(g, s)?;
        }
        Some(g)
    }

    fn buckets(&self) -> &Buckets {
        self.buckets.get_or_init(|| {
            let key = AbelianKey::new(&self.presentation);
            let mut map: HashMap<Vec<i64>, Vec<u32>> = HashMap::new();
            for g in 0..self.len() as u32 {
                map.entry(key.of(self.word(g).letters())).or_default().push(g);
            }
            Buckets { key, map }
        })
    }

    /// Least-level ball element of level at most `max_level` equal to `w`.
    fn scan_bucket(&self, w: &[Letter], max_level: usize) -> Result<Option<u32>, OracleError> {
        let b = self.buckets();
        let Some(cands) = b.map.get(&b.key.of(w)) else { return Ok(None) };
        let alpha = &self.presentation.alphabet;
        for &g in cands {
            if self.level(g) > max_level {
                break;
            }
            let mut v = w.to_vec();
            v.extend(alpha.inverse_word(self.word(g).letters()).0);
            if self.oracle.is_identity(&v)? {
                return Ok(Some(g));
            }
        }
        Ok(None)
    }

    /// Element named by an arbitrary word, or `None` if it lies outside the ball.
    pub fn locate(&self, w: &[Letter]) -> Result<Option<u32>, OracleError> {
        let r = self.oracle.reduce(w)?;
        if r.len() <= self.radius {
            return Ok(self.walk(r.letters()));
        }
        if self.oracle.reduce_is_geodesic() {
            return Ok(None);
        }
        self.scan_bucket(r.letters(), self.radius)
    }

    /// Exact shortlex normal form when the element lies in the ball.
    pub fn normalize(&self, w: &[Letter]) -> Result<Option<NormalWord>, OracleError> {
        Ok(self.locate(w)?.map(|g| self.normal_word(g)))
    }

    /// `w_x^{-1} w_y` with the common prefix of the normal forms cancelled.
    pub fn relative_word(&self, mut x: u32, mut y: u32) -> Vec<Letter> {
        let alpha = &self.presentation.alphabet;
        let mut ux: Vec<Letter> = Vec::new();
        let mut uy: Vec<Letter> = Vec::new();
        while self.level(x) > self.level(y) {
            ux.push(self.last[x as usize]);
            x = self.parent[x as usize];
        }
        while self.level(y) > self.level(x) {
            uy.push(self.last[y as usize]);
            y = self.parent[y as usize];
        }
        while x != y {
            ux.push(self.last[x as usize]);
            x = self.parent[x as usize];
            uy.push(self.last[y as usize]);
            y = self.parent[y as usize];
        }
        let mut w: Vec<Letter> = ux.iter().map(|&l| alpha.inv(l)).collect();
        w.extend(uy.iter().rev());
        w
    }

    /// Element `x^{-1} y`, if inside the ball.
    pub fn quotient(&self, x: u32, y: u32) -> Result<Option<u32>, OracleError> {
        self.locate(&self.relative_word(x, y))
    }

    /// Element `x w`, if inside the ball.
    pub fn translate(&self, x: u32, w: &[Letter]) -> Result<Option<u32>, OracleError> {
        let mut v = self.word(x).0;
        v.extend_from_slice(w);
        self.locate(&v)
    }

    /// Element `x y`, if inside the ball.
    pub fn multiply(&self, x: u32, y: u32) -> Result<Option<u32>, OracleError> {
        self.translate(x, self.word(y).letters())
    }

    pub fn inverse(&self, x: u32) -> Result<Option<u32>, OracleError> {
        let w = self.presentation.alphabet.inverse_word(self.word(x).letters());
        self.locate(w.letters())
    }

    /// Decides `d(x, y) <= k`; `None` only when `k` exceeds the radius and the
    /// answer would need elements outside the ball.
    pub fn distance_at_most(&self, x: u32, y: u32, k: u32) -> Option<bool> {
        if x == y {
            return Some(true);
        }
        let w = self.relative_word(x, y);
        let r = self.oracle.reduce(&w).ok()?;
        if r.len() as u32 <= k {
            return Some(true);
        }
        if self.oracle.reduce_is_geodesic() {
            return Some(false);
        }
        if r.len() <= self.radius {
            return self.walk(r.letters()).map(|g| self.level(g) as u32 <= k);
        }
        let limit = (k as usize).min(self.radius);
        match self.scan_bucket(r.letters(), limit).ok()? {
            Some(_) => Some(true),
            None if k as usize <= self.radius => Some(false),
            None => None,
        }
    }

    /// Bounds on the length of the element spelled by `w`.
    pub fn length_bounds(&self, w: &[Letter], level_gap: u32) -> Result<DistanceBounds, OracleError> {
        let r = self.oracle.reduce(w)?;
        let len = r.len() as u32;
        if self.oracle.reduce_is_geodesic() {
            return Ok(DistanceBounds::exact(len));
        }
        if r.len() <= self.radius {
            if let Some(g) = self.walk(r.letters()) {
                return Ok(DistanceBounds::exact(self.level(g) as u32));
            }
        }
        if let Some(g) = self.scan_bucket(r.letters(), self.radius)? {
            return Ok(DistanceBounds::exact(self.level(g) as u32));
        }
        Ok(DistanceBounds { lo: level_gap.max(self.radius as u32 + 1).min(len), hi: len })
    }

    /// Word distance between two ball elements; exact whenever it is at most the radius.
    pub fn distance(&self, x: u32, y: u32) -> DistanceBounds {
        if x == y {
            return DistanceBounds::exact(0);
        }
        let w = self.relative_word(x, y);
        let gap = (self.level(x) as i64 - self.level(y) as i64).unsigned_abs() as u32;
        // reduction of ball words never touches a partial table
        self.length_bounds(&w, gap).unwrap_or(DistanceBounds { lo: gap, hi: w.len() as u32 })
    }

    /// `(y|z)_x`.
    pub fn gromov_product(&self, x: u32, y: u32, z: u32) -> ProductBounds {
        let a = self.distance(x, y);
        let b = self.distance(x, z);
        let c = self.distance(y, z);
        ProductBounds {
            lo: HalfInt::from_halves(a.lo as i64 + b.lo as i64 - c.hi as i64),
            hi: HalfInt::from_halves(a.hi as i64 + b.hi as i64 - c.lo as i64),
        }
    }

    /// Neighbours one step closer to the identity.
    pub fn down_neighbors(&self, g: u32) -> impl Iterator<Item = u32> + '_ {
        let lv = self.level(g);
        (0..self.ngen).filter_map(move |s| {
            let h = self.adj[g as usize * self.ngen + s];
            (h != NONE && lv > 0 && self.level(h) == lv - 1).then_some(h)
        })
    }

    pub fn neighbors(&self, g: u32) -> impl Iterator<Item = u32> + '_ {
        (0..self.ngen).filter_map(move |s| {
            let h = self.adj[g as usize * self.ngen + s];
            (h != NONE).then_some(h)
        })
    }

    /// Elements of `S_n` within distance `t` of some center, sorted. `None`
    /// when the radius is too small to decide.
    pub fn sphere_neighborhood(&self, centers: &[u32], n: usize, t: u32) -> Option<Vec<u32>> {
        let range = self.sphere(n);
        if n > self.radius || centers.is_empty() {
            return (n <= self.radius).then(Vec::new);
        }
        let top = centers.iter().map(|&c| self.level(c)).max().unwrap();
        if n + top <= t as usize {
            return Some(range.collect());
        }
        if (n + top + t as usize) / 2 <= self.radius {
            // geodesics of length <= t between the two levels stay inside the ball
            let mut seen: HashSet<u32> = centers.iter().copied().collect();
            let mut frontier: Vec<u32> = centers.to_vec();
            let mut out: Vec<u32> = centers.iter().copied().filter(|c| range.contains(c)).collect();
            for _ in 0..t {
                let mut next = Vec::new();
                for &u in &frontier {
                    for v in self.neighbors(u) {
                        if seen.insert(v) {
                            next.push(v);
                            if range.contains(&v) {
                                out.push(v);
                            }
                        }
                    }
                }
                frontier = next;
            }
            out.sort_unstable();
            out.dedup();
            return Some(out);
        }
        if t as usize > self.radius {
            return None;
        }
        let hits = par::map_range((range.end - range.start) as usize, |i| {
            let x = range.start + i as u32;
            let mut undecided = false;
            for &c in centers {
                match self.distance_at_most(x, c, t) {
                    Some(true) => return Some(true),
                    Some(false) => {}
                    None => undecided = true,
                }
            }
            (!undecided).then_some(false)
        });
        let mut out = Vec::new();
        for (i, h) in hits.into_iter().enumerate() {
            match h {
                Some(true) => out.push(range.start + i as u32),
                Some(false) => {}
                None => return None,
            }
        }
        Some(out)
    }

    /// Bounds on the largest distance between a point of `a` and a point of
    /// `b`. Large products whose level sums already meet `bound` are not enumerated.
    pub fn max_cross_distance(&self, a: &[u32], b: &[u32], bound: u32) -> (DistanceBounds, Option<(u32, u32)>) {
        let la = a.iter().map(|&x| self.level(x)).max().unwrap_or(0);
        let lb = b.iter().map(|&x| self.level(x)).max().unwrap_or(0);
        if a.len() * b.len() > 40_000 && (la + lb) as u32 <= bound {
            return (DistanceBounds { lo: 0, hi: (la + lb) as u32 }, None);
        }
        let rows = par::map_slice(a, |&x| {
            let mut best = (DistanceBounds::exact(0), None);
            for &y in b {
                let d = self.distance(x, y);
                if d.hi > best.0.hi || (d.hi == best.0.hi && best.1.is_none()) {
                    best.1 = Some((x, y));
                }
                best.0 = DistanceBounds { lo: best.0.lo.max(d.lo), hi: best.0.hi.max(d.hi) };
            }
            best
        });
        let mut out = (DistanceBounds::exact(0), None);
        for (d, w) in rows {
            if d.hi > out.0.hi || out.1.is_none() {
                out.1 = w;
            }
            out.0 = DistanceBounds { lo: out.0.lo.max(d.lo), hi: out.0.hi.max(d.hi) };
        }
        out
    }

    /// Points at level `k` on geodesics from the identity to `target`, sorted.
    pub fn geodesic_cone(&self, target: u32, k: usize) -> Vec<u32> {
        let mut layer = vec![target];
        let mut lv = self.level(target);
        while lv > k {
            let mut next: Vec<u32> = layer.iter().flat_map(|&g| self.down_neighbors(g)).collect();
            next.sort_unstable();
            next.dedup();
            layer = next;
            lv -= 1;
        }
        if lv < k {
            return Vec::new();
        }
        layer
    }

    /// All geodesic vertex paths from the identity to `target`, or `None` past `budget`.
    pub fn geodesics(&self, target: u32, budget: usize) -> Option<Vec<Vec<u32>>> {
        let mut out = Vec::new();
        let mut path = vec![target];
        if !self.geodesics_rec(target, &mut path, &mut out, budget) {
            return None;
        }
        Some(out)
    }

    fn geodesics_rec(&self, g: u32, path: &mut Vec<u32>, out: &mut Vec<Vec<u32>>, budget: usize) -> bool {
        if g == 0 {
            if out.len() >= budget {
                return false;
            }
            out.push(path.iter().rev().copied().collect());
            return true;
        }
        let downs: Vec<u32> = self.down_neighbors(g).collect();
        for h in downs {
            path.push(h);
            let ok = self.geodesics_rec(h, path, out, budget);
            path.pop();
            if !ok {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Copy, Debug)]
enum Link {
    Pair(usize),
    Known(u32),
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index stays root so class roots are their minimum
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo as u32;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(text: &str, r: usize) -> CayleyBall {
        CayleyBall::build(&GroupPresentation::parse(text).unwrap(), BallOptions::new(r)).unwrap()
    }

    #[test]
    fn integers_have_two_point_spheres() {
        let b = ball("gens: a", 8);
        assert_eq!(b.sphere_sizes(), vec![1, 2, 2, 2, 2, 2, 2, 2, 2]);
        assert_eq!(b.render(b.sphere(3).start), "a a a");
        assert_eq!(b.render(b.sphere(3).start + 1), "a^-1 a^-1 a^-1");
    }

    #[test]
    fn free_group_sphere_sizes() {
        let b = ball("gens: a b", 5);
        assert_eq!(b.sphere_sizes(), vec![1, 4, 12, 36, 108, 324]);
    }

    #[test]
    fn surface_sphere_sizes_match_growth_series() {
        let b = ball("gens: a b c d\nrel: [a,b][c,d]", 4);
        assert_eq!(b.sphere_sizes(), vec![1, 8, 56, 392, 2736]);
    }

    #[test]
    fn normal_forms_are_shortlex_ordered_within_spheres() {
        let b = ball("gens: a b c d\nrel: [a,b][c,d]", 3);
        for n in 0..=3 {
            let r = b.sphere(n);
            for g in r.start + 1..r.end {
                assert!(b.word(g - 1) < b.word(g));
            }
        }
    }

    #[test]
    fn locate_and_distance() {
        let b = ball("gens: a b c d\nrel: [a,b][c,d]", 4);
        let p = b.presentation().clone();
        let w = p.parse_word("d c d^-1 c^-1").unwrap();
        let g = b.locate(w.letters()).unwrap().unwrap();
        assert_eq!(b.render(g), "a b a^-1 b^-1");
        let x = b.walk(&[0, 2]).unwrap();
        let y = b.walk(&[0, 4]).unwrap();
        assert_eq!(b.distance(x, y), DistanceBounds::exact(2));
        assert_eq!(b.distance(x, x), DistanceBounds::exact(0));
        let pb = b.gromov_product(0, x, y);
        assert_eq!(pb.lo, HalfInt::from_int(1));
        assert!(pb.is_exact());
    }

    #[test]
    fn prefix_projection_is_truncation() {
        let b = ball("gens: a b", 4);
        for g in b.sphere(4) {
            let p = b.prefix(g, 2);
            assert_eq!(b.word(p).letters(), &b.word(g).letters()[..2]);
        }
    }

    #[test]
    fn element_cap_refuses_large_balls() {
        let p = GroupPresentation::parse("gens: a b").unwrap();
        let e = CayleyBall::build(&p, BallOptions { radius: 6, element_cap: 100 }).unwrap_err();
        assert!(matches!(e, BallError::TooLarge { .. }));
    }

    #[test]
    fn geodesic_cone_in_surface_group() {
        let b = ball("gens: a b c d\nrel: [a,b][c,d]", 4);
        let w = b.presentation().parse_word("a b a^-1 b^-1").unwrap();
        let g = b.locate(w.letters()).unwrap().unwrap();
        let gs = b.geodesics(g, 100).unwrap();
        // the two halves of the relator octagon
        assert_eq!(gs.len(), 2);
        assert_eq!(b.geodesic_cone(g, 2).len(), 2);
    }
}
