//! First homology of flag complexes.
//!
//! The complex is first shrunk by removing dominated vertices (a vertex whose
//! closed neighbourhood sits inside another's). Each removal is a strong
//! deformation retraction, so homology is unchanged and loops can be pushed
//! along the retraction. On the reduced complex, cycles are coordinatised by
//! the edges outside a spanning forest and the triangle boundaries are
//! reduced to Smith normal form.

use super::snf::{smith_form, ModPEchelon, SparseMatrix};
use super::{ComplexError, FlagComplex, Graph};
use num_bigint::BigInt;
use serde::{Serialize, Serializer};
use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct H1Summary {
    pub betti_0: usize,
    pub betti_1: usize,
    #[serde(serialize_with = "as_strings")]
    pub torsion: Vec<BigInt>,
}

fn as_strings<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// Triangle count above which homology is refused.
pub const TRIANGLE_BUDGET: u64 = 30_000_000;

/// Reduced complex with everything needed to test loop classes.
#[derive(Debug)]
pub struct HomologyContext {
    summary: H1Summary,
    reduced: Graph,
    keep: Vec<u32>,
    to_reduced: Vec<u32>,
    parent: Vec<u32>,
    depth: Vec<u32>,
    nontree: HashMap<(u32, u32), u32>,
    nontree_edges: Vec<(u32, u32)>,
    boundary: SparseMatrix,
    rank: usize,
    echelon: OnceLock<ModPEchelon>,
}

/// Vertices left after repeatedly deleting dominated vertices, with the
/// retraction of every vertex onto a survivor.
fn strong_collapse(g: &Graph) -> (Vec<u32>, Vec<u32>) {
    let n = g.vertex_count();
    let mut alive = vec![true; n];
    let mut ret: Vec<u32> = (0..n as u32).collect();
    let mut queued = vec![true; n];
    let mut queue: VecDeque<u32> = (0..n as u32).collect();
    while let Some(v) = queue.pop_front() {
        queued[v as usize] = false;
        if !alive[v as usize] {
            continue;
        }
        let nv: Vec<u32> = g.neighbors(v).into_iter().filter(|&u| alive[u as usize]).collect();
        let dominator = nv.iter().copied().find(|&w| nv.iter().all(|&u| u == w || g.has_edge(w, u)));
        if let Some(w) = dominator {
            alive[v as usize] = false;
            ret[v as usize] = w;
            for u in nv {
                if !queued[u as usize] {
                    queued[u as usize] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    let keep: Vec<u32> = (0..n as u32).filter(|&v| alive[v as usize]).collect();
    let mut index = vec![u32::MAX; n];
    for (i, &v) in keep.iter().enumerate() {
        index[v as usize] = i as u32;
    }
    let to_reduced = (0..n as u32)
        .map(|mut v| {
            while !alive[v as usize] {
                v = ret[v as usize];
            }
            index[v as usize]
        })
        .collect();
    (keep, to_reduced)
}

impl HomologyContext {
    pub fn new(k: &impl FlagComplex) -> Result<Self, ComplexError> {
        let g = k.graph();
        let (keep, to_reduced) = strong_collapse(g);
        let reduced = g.induced(&keep);
        let n = reduced.vertex_count();

        let mut parent = vec![u32::MAX; n];
        let mut depth = vec![0u32; n];
        let mut seen = vec![false; n];
        let mut betti_0 = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            betti_0 += 1;
            seen[s] = true;
            let mut queue = VecDeque::from([s as u32]);
            while let Some(u) = queue.pop_front() {
                for v in reduced.neighbors(u) {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        parent[v as usize] = u;
                        depth[v as usize] = depth[u as usize] + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        let mut nontree = HashMap::new();
        let mut nontree_edges = Vec::new();
        for (u, v) in reduced.edges() {
            if parent[v as usize] != u && parent[u as usize] != v {
                nontree.insert((u, v), nontree_edges.len() as u32);
                nontree_edges.push((u, v));
            }
        }
        let triangles = reduced.triangle_count();
        if triangles > TRIANGLE_BUDGET {
            return Err(ComplexError::Budget(format!(
                "{} triangles on {} vertices after reduction (budget {})",
                triangles, n, TRIANGLE_BUDGET
            )));
        }
        let mut boundary = SparseMatrix::new(nontree_edges.len());
        for (a, b, c) in reduced.triangles() {
            let col: Vec<(u32, i64)> = [((b, c), 1), ((a, c), -1), ((a, b), 1)]
                .into_iter()
                .filter_map(|(e, s)| nontree.get(&e).map(|&i| (i, s)))
                .collect();
            if !col.is_empty() {
                boundary.push_col(col);
            }
        }
        let snf = smith_form(&boundary).map_err(|t| {
            ComplexError::Budget(format!("dense remainder {}x{} after sparse elimination", t.rows, t.cols))
        })?;
        let summary = H1Summary { betti_0, betti_1: nontree_edges.len() - snf.rank, torsion: snf.torsion };
        Ok(HomologyContext {
            summary,
            reduced,
            keep,
            to_reduced,
            parent,
            depth,
            nontree,
            nontree_edges,
            boundary,
            rank: snf.rank,
            echelon: OnceLock::new(),
        })
    }

    pub fn summary(&self) -> &H1Summary {
        &self.summary
    }

    pub fn reduced_vertex_count(&self) -> usize {
        self.keep.len()
    }

    fn echelon(&self) -> &ModPEchelon {
        self.echelon.get_or_init(|| ModPEchelon::from_matrix(&self.boundary))
    }

    /// Coordinates of a closed vertex walk on the edges outside the forest.
    pub fn loop_class(&self, walk: &[u32]) -> Vec<(u32, i64)> {
        let mut acc: HashMap<u32, i64> = HashMap::new();
        let len = walk.len();
        for i in 0..len {
            let x = self.to_reduced[walk[i] as usize];
            let y = self.to_reduced[walk[(i + 1) % len] as usize];
            if x == y {
                continue;
            }
            let (e, s) = if x < y { ((x, y), 1) } else { ((y, x), -1) };
            if let Some(&j) = self.nontree.get(&e) {
                *acc.entry(j).or_insert(0) += s;
            }
        }
        let mut v: Vec<(u32, i64)> = acc.into_iter().filter(|e| e.1 != 0).collect();
        v.sort_unstable();
        v
    }

    /// `Some(true)` when the walk is certified nonzero in rational homology,
    /// `Some(false)` when its class is zero modulo the prime, `None` when the
    /// prime loses rank and nothing can be certified.
    pub fn is_nontrivial(&self, walk: &[u32]) -> Option<bool> {
        let z = self.loop_class(walk);
        if z.is_empty() {
            return Some(false);
        }
        let e = self.echelon();
        if e.rank() != self.rank {
            return None;
        }
        Some(!e.contains(&z))
    }

    /// Fundamental cycles whose classes form a basis of rational `H_1`, as
    /// closed walks in the original vertex numbering.
    pub fn generator_loops(&self) -> Vec<Vec<u32>> {
        let mut e = self.echelon().clone();
        let mut out = Vec::new();
        for (i, &(u, v)) in self.nontree_edges.iter().enumerate() {
            if out.len() == self.summary.betti_1 {
                break;
            }
            let before = e.rank();
            e.push_integer(&[(i as u32, 1)]);
            if e.rank() > before {
                out.push(self.fundamental_cycle(u, v));
            }
        }
        out
    }

    /// Rank of the span of the given closed walks in `H_1` over the prime field.
    pub fn class_rank(&self, walks: &[Vec<u32>]) -> usize {
        let mut e = self.echelon().clone();
        let base = e.rank();
        for w in walks {
            e.push_integer(&self.loop_class(w));
        }
        e.rank() - base
    }

    fn fundamental_cycle(&self, u: u32, v: u32) -> Vec<u32> {
        let (mut a, mut b) = (u, v);
        let (mut left, mut right) = (vec![a], vec![b]);
        while a != b {
            if self.depth[a as usize] >= self.depth[b as usize] {
                a = self.parent[a as usize];
                left.push(a);
            } else {
                b = self.parent[b as usize];
                right.push(b);
            }
        }
        right.pop();
        right.reverse();
        // u .. lca .. v, then the edge back to u
        left.extend(right);
        left.into_iter().map(|x| self.keep[x as usize]).collect()
    }

    pub fn reduced_graph(&self) -> &Graph {
        &self.reduced
    }
}

pub fn homology_h1(k: &impl FlagComplex) -> Result<H1Summary, ComplexError> {
    Ok(HomologyContext::new(k)?.summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(u32, u32)]) -> Graph {
        Graph::from_edges(n, edges)
    }

    #[test]
    fn filled_triangle() {
        let h = homology_h1(&graph(3, &[(0, 1), (1, 2), (0, 2)])).unwrap();
        assert_eq!((h.betti_0, h.betti_1), (1, 0));
    }

    #[test]
    fn hollow_square_and_octahedron() {
        let sq = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let h = homology_h1(&sq).unwrap();
        assert_eq!((h.betti_0, h.betti_1), (1, 1));
        // octahedron: antipodal pairs 0-1, 2-3, 4-5 are the only non-edges
        let mut e = Vec::new();
        for a in 0..6u32 {
            for b in a + 1..6 {
                if b != a + 1 || a % 2 == 1 {
                    e.push((a, b));
                }
            }
        }
        let h = homology_h1(&graph(6, &e)).unwrap();
        assert_eq!((h.betti_0, h.betti_1), (1, 0));
    }

    #[test]
    fn two_circles_and_a_point() {
        let mut e: Vec<(u32, u32)> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        e.extend((5..9).map(|i| (i, if i == 8 { 5 } else { i + 1 })));
        let ctx = HomologyContext::new(&graph(10, &e)).unwrap();
        assert_eq!(ctx.summary().betti_0, 3);
        assert_eq!(ctx.summary().betti_1, 2);
        let gens = ctx.generator_loops();
        assert_eq!(gens.len(), 2);
        assert_eq!(ctx.class_rank(&gens), 2);
        assert_eq!(ctx.is_nontrivial(&[0, 1, 2, 3, 4]), Some(true));
        assert_eq!(ctx.is_nontrivial(&[0, 1, 0]), Some(false));
    }

    #[test]
    fn collapse_retracts_cones() {
        // a cone over a hexagon collapses to a point
        let mut e: Vec<(u32, u32)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        e.extend((0..6).map(|i| (i, 6)));
        let ctx = HomologyContext::new(&graph(7, &e)).unwrap();
        assert_eq!(ctx.reduced_vertex_count(), 1);
        assert_eq!(ctx.summary().betti_1, 0);
    }
}
