//! Models that share no code with the library: the genus-2 surface group as a
//! Fuchsian group acting on the disc, balls grown over it by plain
//! breadth-first search, brute-force slimness, and homology ranks over a
//! large prime field.
#![allow(dead_code)]

use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;

/// `[[a, b], [conj b, conj a]]` in SU(1,1), up to sign.
#[derive(Clone, Copy, Debug)]
pub struct Mobius {
    a: Complex64,
    b: Complex64,
}

impl Mobius {
    pub fn identity() -> Self {
        Mobius { a: Complex64::new(1.0, 0.0), b: Complex64::new(0.0, 0.0) }
    }

    fn rotation(t: f64) -> Self {
        Mobius { a: Complex64::from_polar(1.0, t / 2.0), b: Complex64::new(0.0, 0.0) }
    }

    fn translation(rho: f64) -> Self {
        Mobius { a: Complex64::new(rho.cosh(), 0.0), b: Complex64::new(rho.sinh(), 0.0) }
    }

    pub fn mul(self, o: Mobius) -> Mobius {
        Mobius { a: self.a * o.a + self.b * o.b.conj(), b: self.a * o.b + self.b * o.a.conj() }
    }

    pub fn inv(self) -> Mobius {
        Mobius { a: self.a.conj(), b: -self.b }
    }

    pub fn key(self) -> [i64; 4] {
        let s = if self.a.re < 0.0 { -1.0 } else { 1.0 };
        let q = |x: f64| (s * x * 1e4).round() as i64;
        [q(self.a.re), q(self.a.im), q(self.b.re), q(self.b.im)]
    }
}

/// Side pairings of the regular octagon with interior angles pi/4, oriented
/// so that [a,b][c,d] = 1.
pub fn surface_generators() -> Vec<Mobius> {
    // centre to side midpoint: cosh(rho) = cot(pi/8)
    let rho = (1.0 / (PI / 8.0).tan()).acosh();
    let pair = |i: f64, j: f64| {
        Mobius::rotation(j * PI / 4.0)
            .mul(Mobius::translation(rho))
            .mul(Mobius::rotation(PI - i * PI / 4.0))
    };
    let a = pair(2.0, 0.0);
    let b = pair(3.0, 1.0).inv();
    let c = pair(6.0, 4.0);
    let d = pair(7.0, 5.0).inv();
    vec![a, a.inv(), b, b.inv(), c, c.inv(), d, d.inv()]
}

pub const SURFACE_NAMES: [&str; 8] = ["a", "a^-1", "b", "b^-1", "c", "c^-1", "d", "d^-1"];

/// Ball of the Fuchsian model, grown in shortlex order so the first word
/// reaching an element is its shortlex-least geodesic.
pub struct ModelBall {
    pub gens: Vec<Mobius>,
    pub elems: Vec<Mobius>,
    pub words: Vec<Vec<u8>>,
    pub level: Vec<u8>,
    pub offsets: Vec<usize>,
    index: HashMap<[i64; 4], u32>,
}

impl ModelBall {
    pub fn surface(radius: usize) -> Self {
        Self::grow(surface_generators(), radius)
    }

    pub fn grow(gens: Vec<Mobius>, radius: usize) -> Self {
        let mut b = ModelBall {
            gens,
            elems: vec![Mobius::identity()],
            words: vec![vec![]],
            level: vec![0],
            offsets: vec![0, 1],
            index: HashMap::new(),
        };
        b.index.insert(Mobius::identity().key(), 0);
        for r in 1..=radius {
            let (lo, hi) = (b.offsets[r - 1], b.offsets[r]);
            for x in lo..hi {
                for s in 0..b.gens.len() {
                    let y = b.elems[x].mul(b.gens[s]);
                    let k = y.key();
                    if b.index.contains_key(&k) {
                        continue;
                    }
                    b.index.insert(k, b.elems.len() as u32);
                    let mut w = b.words[x].clone();
                    w.push(s as u8);
                    b.elems.push(y);
                    b.words.push(w);
                    b.level.push(r as u8);
                }
            }
            b.offsets.push(b.elems.len());
        }
        b
    }

    pub fn radius(&self) -> usize {
        self.offsets.len() - 2
    }

    pub fn sphere(&self, n: usize) -> std::ops::Range<usize> {
        self.offsets[n]..self.offsets[n + 1]
    }

    pub fn sphere_sizes(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn lookup(&self, m: Mobius) -> Option<u32> {
        self.index.get(&m.key()).copied()
    }

    pub fn render(&self, g: usize, names: &[&str]) -> String {
        if self.words[g].is_empty() {
            return "e".into();
        }
        self.words[g].iter().map(|&s| names[s as usize]).collect::<Vec<_>>().join(" ")
    }

    /// Word length of `x^{-1} y`, when that lies in the ball.
    pub fn distance(&self, x: Mobius, y: Mobius) -> Option<u32> {
        self.lookup(x.inv().mul(y)).map(|g| self.level[g as usize] as u32)
    }

    /// Every geodesic from e to `g`, as vertex sequences.
    pub fn geodesics(&self, g: u32) -> Vec<Vec<u32>> {
        let l = self.level[g as usize];
        if l == 0 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for s in &self.gens {
            let Some(p) = self.lookup(self.elems[g as usize].mul(s.inv())) else { continue };
            if self.level[p as usize] + 1 != l {
                continue;
            }
            for mut path in self.geodesics(p) {
                path.push(g);
                out.push(path);
            }
        }
        out
    }
}

/// Brute-force slimness over every triangle `(e, x, y)` with `x, y` in
/// `B_r` and `d(x, y) <= r`, every choice of geodesic sides, and every
/// vertex and edge midpoint of every side. Distances beyond `r` count as
/// `r + 1`. Returns `(delta in halves, triangles)`.
pub fn slimness(model: &ModelBall, r: usize) -> (i64, u64) {
    assert!(model.radius() >= r);
    let m = model.offsets[r + 1];
    let geos: Vec<Vec<Vec<u32>>> = (0..m as u32).map(|g| model.geodesics(g)).collect();
    let cap = (r + 1) as i64;
    let mut best = 0i64;
    let mut triangles = 0u64;
    for x in 0..m {
        for y in 0..m {
            let (ex, ey) = (model.elems[x], model.elems[y]);
            let Some(h) = model.lookup(ex.inv().mul(ey)) else { continue };
            if model.level[h as usize] as usize > r {
                continue;
            }
            triangles += 1;
            let side = |g: &Vec<Vec<u32>>, shift: Option<Mobius>| -> Vec<Vec<Mobius>> {
                g.iter()
                    .map(|p| {
                        p.iter()
                            .map(|&v| match shift {
                                Some(s) => s.mul(model.elems[v as usize]),
                                None => model.elems[v as usize],
                            })
                            .collect()
                    })
                    .collect()
            };
            let sides = [side(&geos[x], None), side(&geos[y], None), side(&geos[h as usize], Some(ex))];
            best = best.max(triangle_defect(model, &sides, cap));
        }
    }
    (best, triangles)
}

fn triangle_defect(model: &ModelBall, sides: &[Vec<Vec<Mobius>>; 3], cap: i64) -> i64 {
    // distinct points of the triangle and their pairwise distances
    let mut pts: Vec<Mobius> = Vec::new();
    let mut keys: HashMap<[i64; 4], usize> = HashMap::new();
    let ids: Vec<Vec<Vec<usize>>> = sides
        .iter()
        .map(|choices| {
            choices
                .iter()
                .map(|path| {
                    path.iter()
                        .map(|&p| {
                            *keys.entry(p.key()).or_insert_with(|| {
                                pts.push(p);
                                pts.len() - 1
                            })
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let k = pts.len();
    let mut dist = vec![0i64; k * k];
    for i in 0..k {
        for j in 0..k {
            dist[i * k + j] = model.distance(pts[i], pts[j]).map(|d| (d as i64).min(cap)).unwrap_or(cap);
        }
    }
    let to_path = |p: usize, path: &[usize]| path.iter().map(|&q| dist[p * k + q]).min().unwrap() * 2;
    let on_edge = |u: usize, v: usize, path: &[usize]| path.windows(2).any(|w| (w[0] == u && w[1] == v) || (w[0] == v && w[1] == u));
    let mut best = 0;
    for s in 0..3 {
        let (o1, o2) = (&ids[(s + 1) % 3], &ids[(s + 2) % 3]);
        for path in &ids[s] {
            for j in 0..path.len() {
                let p = path[j];
                let f = |others: &Vec<Vec<usize>>| others.iter().map(|q| to_path(p, q)).max().unwrap();
                best = best.max(f(o1).min(f(o2)));
                if j + 1 < path.len() {
                    let (u, v) = (path[j], path[j + 1]);
                    let g = |others: &Vec<Vec<usize>>| {
                        others
                            .iter()
                            .map(|q| if on_edge(u, v, q) { 0 } else { 1 + to_path(u, q).min(to_path(v, q)) })
                            .max()
                            .unwrap()
                    };
                    best = best.max(g(o1).min(g(o2)));
                }
            }
        }
    }
    best
}

/// Rips graph on `S_n` of the model with parameter `d`; needs radius >= d.
pub fn model_rips_edges(model: &ModelBall, n: usize, d: u32) -> (usize, Vec<(u32, u32)>) {
    let sphere = model.sphere(n);
    let verts: Vec<Mobius> = sphere.clone().map(|g| model.elems[g]).collect();
    let mut edges = Vec::new();
    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            if matches!(model.distance(verts[i], verts[j]), Some(x) if x <= d) {
                edges.push((i as u32, j as u32));
            }
        }
    }
    (verts.len(), edges)
}

/// All triangles of the flag complex, by checking every triple.
pub fn brute_force_triangles(nv: usize, edges: &[(u32, u32)]) -> Vec<(u32, u32, u32)> {
    let mut adj = vec![false; nv * nv];
    for &(u, v) in edges {
        adj[u as usize * nv + v as usize] = true;
        adj[v as usize * nv + u as usize] = true;
    }
    let mut out = Vec::new();
    for i in 0..nv {
        for j in i + 1..nv {
            if !adj[i * nv + j] {
                continue;
            }
            for k in j + 1..nv {
                if adj[i * nv + k] && adj[j * nv + k] {
                    out.push((i as u32, j as u32, k as u32));
                }
            }
        }
    }
    out
}

const P: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

/// `(betti_0, betti_1)` with the boundary rank taken over GF(2^61 - 1).
pub fn rational_betti(nv: usize, edges: &[(u32, u32)], triangles: &[(u32, u32, u32)]) -> (usize, usize) {
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let n = p[y];
            p[y] = r;
            y = n;
        }
        r
    }
    let mut comps = nv;
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
        if a != b {
            parent[a] = b;
            comps -= 1;
        }
    }
    let index: HashMap<(u32, u32), usize> = edges.iter().enumerate().map(|(i, &(u, v))| ((u.min(v), u.max(v)), i)).collect();
    let e = |u: u32, v: u32| index[&(u.min(v), u.max(v))];
    // columns kept sorted by row; pivot = last row
    let mut pivots: HashMap<usize, Vec<(usize, u64)>> = HashMap::new();
    let mut rank = 0;
    for &(a, b, c) in triangles {
        // boundary of [a, b, c] = [b, c] - [a, c] + [a, b]
        let mut col: Vec<(usize, u64)> = vec![(e(b, c), 1), (e(a, c), P - 1), (e(a, b), 1)];
        col.sort();
        loop {
            let Some(&(row, val)) = col.last() else { break };
            let Some(piv) = pivots.get(&row) else {
                pivots.insert(row, col);
                rank += 1;
                break;
            };
            let pv = piv.last().unwrap().1;
            let f = mulmod(val, powmod(pv, P - 2));
            let mut merged: Vec<(usize, u64)> = Vec::with_capacity(col.len() + piv.len());
            let (mut i, mut j) = (0, 0);
            while i < col.len() || j < piv.len() {
                let take_col = j == piv.len() || (i < col.len() && col[i].0 < piv[j].0);
                let take_piv = i == col.len() || (j < piv.len() && piv[j].0 < col[i].0);
                if take_col {
                    merged.push(col[i]);
                    i += 1;
                } else if take_piv {
                    merged.push((piv[j].0, (P - mulmod(f, piv[j].1)) % P));
                    j += 1;
                } else {
                    let v = (col[i].1 + P - mulmod(f, piv[j].1)) % P;
                    if v != 0 {
                        merged.push((col[i].0, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
            col = merged;
        }
    }
    (comps, edges.len() - (nv - comps) - rank)
}
