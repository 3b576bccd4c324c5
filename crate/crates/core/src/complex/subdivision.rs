//! Iterated barycentric subdivisions of the interval and the 2-simplex.
//!
//! Vertices are points with integer barycentric coordinates over a common
//! denominator (`2^k` for the interval, `6^k` for the triangle), which names
//! them deterministically.

use super::{FlagComplex, Graph};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelBase {
    Interval,
    Triangle,
}

#[derive(Clone, Debug)]
pub struct ModelComplex {
    pub base: ModelBase,
    pub depth: u32,
    pub denominator: i64,
    /// Barycentric coordinates of each vertex, sorted.
    pub coords: Vec<Vec<i64>>,
    pub edges: Vec<[u32; 2]>,
    pub triangles: Vec<[u32; 3]>,
    graph: Graph,
}

impl FlagComplex for ModelComplex {
    fn graph(&self) -> &Graph {
        &self.graph
    }
}

impl ModelComplex {
    pub fn vertex_count(&self) -> usize {
        self.coords.len()
    }

    pub fn vertex_name(&self, v: u32) -> String {
        let c: Vec<String> = self.coords[v as usize].iter().map(|x| x.to_string()).collect();
        format!("({})/{}", c.join(","), self.denominator)
    }

    pub fn vertex_of(&self, coords: &[i64]) -> Option<u32> {
        self.coords.binary_search_by(|c| c.as_slice().cmp(coords)).ok().map(|i| i as u32)
    }

    /// Boundary vertices in order, starting at the first corner and running
    /// towards the second. For the interval this is the edge path from one
    /// end to the other.
    pub fn boundary_cycle(&self) -> Vec<u32> {
        let dim = self.coords[0].len();
        let mut corner = vec![0i64; dim];
        corner[0] = self.denominator;
        let start = self.vertex_of(&corner).unwrap();
        let on_boundary = |a: u32, b: u32| -> bool {
            (0..dim).any(|i| self.coords[a as usize][i] == 0 && self.coords[b as usize][i] == 0)
        };
        let mut bnd: Vec<Vec<u32>> = vec![Vec::new(); self.vertex_count()];
        for &[a, b] in &self.edges {
            if dim == 2 || on_boundary(a, b) {
                bnd[a as usize].push(b);
                bnd[b as usize].push(a);
            }
        }
        if dim == 2 {
            return super::edge_path_search(&self.graph, start, self.vertex_of(&[0, self.denominator]).unwrap(), usize::MAX)
                .unwrap();
        }
        // first step stays on the face opposite the third corner
        let first = *bnd[start as usize].iter().find(|&&v| self.coords[v as usize][2] == 0).unwrap();
        let mut out = vec![start, first];
        loop {
            let (prev, cur) = (out[out.len() - 2], out[out.len() - 1]);
            let next = *bnd[cur as usize].iter().find(|&&v| v != prev).unwrap();
            if next == start {
                return out;
            }
            out.push(next);
        }
    }
}

/// `sd^k` of the interval or the 2-simplex.
pub fn subdivide_model(base: ModelBase, k: u32) -> ModelComplex {
    let (dim, factor) = match base {
        ModelBase::Interval => (2usize, 2i64),
        ModelBase::Triangle => (3usize, 6i64),
    };
    let mut scale = 1i64;
    let mut tops: Vec<Vec<Vec<i64>>> = vec![(0..dim)
        .map(|i| {
            let mut c = vec![0; dim];
            c[i] = 1;
            c
        })
        .collect()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(tops.len() * if dim == 2 { 2 } else { 6 });
        for simplex in &tops {
            for perm in permutations(dim) {
                // flag of faces {p0} < {p0,p1} < ...
                let flag: Vec<Vec<i64>> = (1..=dim)
                    .map(|size| {
                        let mut c = vec![0i64; dim];
                        for &i in &perm[..size] {
                            for (x, y) in c.iter_mut().zip(&simplex[i]) {
                                *x += y * (factor / size as i64);
                            }
                        }
                        c
                    })
                    .collect();
                next.push(flag);
            }
        }
        tops = next;
        scale *= factor;
    }
    let mut index: BTreeMap<Vec<i64>, u32> = BTreeMap::new();
    for s in &tops {
        for v in s {
            index.entry(v.clone()).or_insert(0);
        }
    }
    for (i, v) in index.values_mut().enumerate() {
        *v = i as u32;
    }
    let coords: Vec<Vec<i64>> = index.keys().cloned().collect();
    let mut edges = Vec::new();
    let mut triangles = Vec::new();
    for s in &tops {
        let mut ids: Vec<u32> = s.iter().map(|v| index[v]).collect();
        ids.sort_unstable();
        for a in 0..ids.len() {
            for b in a + 1..ids.len() {
                edges.push([ids[a], ids[b]]);
            }
        }
        if ids.len() == 3 {
            triangles.push([ids[0], ids[1], ids[2]]);
        }
    }
    edges.sort_unstable();
    edges.dedup();
    triangles.sort_unstable();
    let pairs: Vec<(u32, u32)> = edges.iter().map(|e| (e[0], e[1])).collect();
    let graph = Graph::from_edges(coords.len(), &pairs);
    ModelComplex { base, depth: k, denominator: scale, coords, edges, triangles, graph }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 2 {
        return vec![vec![0, 1], vec![1, 0]];
    }
    vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]]
}
