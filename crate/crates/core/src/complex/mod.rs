//! Rips complexes on spheres, their homology, loops and disks.
//!
//! Every complex here is a flag complex, so it is determined by its graph:
//! triangles are exactly the 3-cliques.

mod graph;
pub mod homology;
pub mod loops;
pub mod snf;
pub mod subdivision;

pub use graph::Graph;
pub use homology::{H1Summary, HomologyContext};
pub use loops::{edge_path_search, null_homotopy_search, DiskDiagram, NullHomotopyVerdict, SimplicialLoop};
pub use subdivision::{subdivide_model, ModelBase, ModelComplex};

use crate::ball::CayleyBall;
use crate::par;
use serde::Serialize;
use std::cell::RefCell;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("sphere S_{n} lies outside the ball of radius {radius}")]
    SphereOutsideBall { n: usize, radius: usize },
    #[error("radius {radius} cannot decide distances up to D={d} on S_{n}; need D <= radius, D >= 2n or radius >= n + ceil(D/2)")]
    InsufficientRadius { n: usize, d: u32, radius: usize },
    #[error("homology budget exceeded: {0}")]
    Budget(String),
}

/// A flag complex given by its graph.
pub trait FlagComplex: Sync {
    fn graph(&self) -> &Graph;
}

impl FlagComplex for Graph {
    fn graph(&self) -> &Graph {
        self
    }
}

/// `K_n`: the Rips 2-skeleton on `S_n` with parameter `D`. Vertex `i` is the
/// `i`-th element of the sphere in shortlex order.
#[derive(Clone, Debug)]
pub struct SphereComplex {
    pub n: usize,
    pub d: u32,
    pub first: u32,
    pub graph: Graph,
}

impl FlagComplex for SphereComplex {
    fn graph(&self) -> &Graph {
        &self.graph
    }
}

impl SphereComplex {
    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    /// Ball element of a vertex.
    pub fn element(&self, v: u32) -> u32 {
        self.first + v
    }

    pub fn vertex_of(&self, g: u32) -> u32 {
        g - self.first
    }

    pub fn edge_count(&self) -> u64 {
        self.graph.edge_count()
    }

    pub fn triangle_count(&self) -> u64 {
        self.graph.triangle_count()
    }
}

thread_local! {
    static STAMPS: RefCell<(Vec<u32>, u32)> = const { RefCell::new((Vec::new(), 0)) };
}

pub fn build_sphere_complex(ball: &CayleyBall, n: usize, d: u32) -> Result<SphereComplex, ComplexError> {
    if n > ball.radius() {
        return Err(ComplexError::SphereOutsideBall { n, radius: ball.radius() });
    }
    let range = ball.sphere(n);
    let first = range.start;
    let count = (range.end - range.start) as usize;
    // any two points of S_n are joined through the identity
    if d as usize >= 2 * n {
        return Ok(SphereComplex { n, d, first, graph: Graph::complete(count) });
    }
    let rows: Vec<Vec<u32>> = if n + (d as usize).div_ceil(2) <= ball.radius() {
        // geodesics between points of S_n at distance <= D stay in the ball
        par::map_range(count, |i| local_neighbors(ball, first, count, first + i as u32, d))
    } else if d as usize <= ball.radius() {
        let decided = par::map_range(count, |i| {
            (0..count)
                .filter(|&j| j != i)
                .filter(|&j| ball.distance_at_most(first + i as u32, first + j as u32, d) == Some(true))
                .map(|j| j as u32)
                .collect::<Vec<u32>>()
        });
        decided
    } else {
        return Err(ComplexError::InsufficientRadius { n, d, radius: ball.radius() });
    };
    Ok(SphereComplex { n, d, first, graph: Graph::from_rows(rows) })
}

/// Vertices of `S_n` within `d` of `x`, by breadth-first search inside the ball.
fn local_neighbors(ball: &CayleyBall, first: u32, count: usize, x: u32, d: u32) -> Vec<u32> {
    STAMPS.with(|cell| {
        let mut cell = cell.borrow_mut();
        let (stamps, gen) = &mut *cell;
        if stamps.len() != ball.len() {
            *stamps = vec![0; ball.len()];
            *gen = 0;
        }
        *gen += 1;
        let g = *gen;
        stamps[x as usize] = g;
        let mut frontier = vec![x];
        let mut out = Vec::new();
        for _ in 0..d {
            let mut next = Vec::new();
            for &u in &frontier {
                for v in ball.neighbors(u) {
                    if stamps[v as usize] != g {
                        stamps[v as usize] = g;
                        next.push(v);
                        if v >= first && ((v - first) as usize) < count {
                            out.push(v - first);
                        }
                    }
                }
            }
            frontier = next;
        }
        out.sort_unstable();
        out
    })
}

/// Vertex sets of the connected components, each sorted, ordered by least vertex.
pub fn connected_components(k: &impl FlagComplex) -> Vec<Vec<u32>> {
    k.graph().components()
}

#[derive(Serialize)]
struct ExportJson<'a> {
    n: usize,
    d: u32,
    vertices: Vec<String>,
    edges: Vec<[u32; 2]>,
    triangles: Option<Vec<[u32; 3]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

/// JSON with vertex words, edges and (when at most `max_triangles`) triangles.
pub fn export_json(ball: &CayleyBall, k: &SphereComplex, max_triangles: u64) -> String {
    let vertices = (0..k.vertex_count() as u32).map(|v| ball.render(k.element(v))).collect();
    let edges = k.graph.edges().map(|(u, v)| [u, v]).collect();
    let tc = k.triangle_count();
    let (triangles, note) = if tc <= max_triangles {
        (Some(k.graph.triangles().map(|(a, b, c)| [a, b, c]).collect()), None)
    } else {
        (None, Some("triangle list omitted: over the export budget"))
    };
    serde_json::to_string_pretty(&ExportJson { n: k.n, d: k.d, vertices, edges, triangles, note }).unwrap()
}

pub fn export_dot(ball: &CayleyBall, k: &SphereComplex) -> String {
    let mut s = format!("graph K{} {{\n", k.n);
    for v in 0..k.vertex_count() as u32 {
        s.push_str(&format!("  {v} [label=\"{}\"];\n", ball.render(k.element(v))));
    }
    for (u, v) in k.graph.edges() {
        s.push_str(&format!("  {u} -- {v};\n"));
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{BallOptions, GroupPresentation};

    fn ball(text: &str, r: usize) -> CayleyBall {
        CayleyBall::build(&GroupPresentation::parse(text).unwrap(), BallOptions::new(r)).unwrap()
    }

    #[test]
    fn integer_spheres_are_two_points() {
        let b = ball("gens: a", 6);
        for n in 1..=6 {
            let k = build_sphere_complex(&b, n, 1).unwrap();
            assert_eq!(k.vertex_count(), 2);
            assert_eq!(k.edge_count(), 0);
            assert_eq!(connected_components(&k).len(), 2);
        }
    }

    #[test]
    fn free_group_sphere_d2_joins_siblings() {
        let b = ball("gens: a b", 3);
        let k = build_sphere_complex(&b, 2, 2).unwrap();
        // siblings share a parent: 4 groups of 3
        assert_eq!(k.edge_count(), 4 * 3);
        assert_eq!(connected_components(&k).len(), 4);
    }

    #[test]
    fn large_d_gives_a_simplex() {
        let b = ball("gens: a b c d\nrel: [a,b][c,d]", 3);
        let k = build_sphere_complex(&b, 2, 98).unwrap();
        assert_eq!(k.edge_count(), 56 * 55 / 2);
        assert_eq!(k.triangle_count(), 56 * 55 * 54 / 6);
    }

    #[test]
    fn local_and_pairwise_methods_agree() {
        let b = ball("gens: a b c d\nrel: [a,b][c,d]", 5);
        let local = build_sphere_complex(&b, 3, 2).unwrap();
        let b3 = ball("gens: a b c d\nrel: [a,b][c,d]", 3);
        let pairwise = build_sphere_complex(&b3, 3, 2).unwrap();
        assert_eq!(local.edge_count(), pairwise.edge_count());
        assert_eq!(local.edge_count(), 1184);
    }

    #[test]
    fn refuses_when_radius_cannot_decide() {
        let b = ball("gens: a b c d\nrel: [a,b][c,d]", 3);
        assert_eq!(
            build_sphere_complex(&b, 3, 5).unwrap_err(),
            ComplexError::InsufficientRadius { n: 3, d: 5, radius: 3 }
        );
    }

    #[test]
    fn export_lists_words() {
        let b = ball("gens: a", 2);
        let k = build_sphere_complex(&b, 1, 2).unwrap();
        let j = export_json(&b, &k, 10);
        assert!(j.contains("\"a^-1\""));
        assert!(export_dot(&b, &k).contains("0 -- 1"));
    }
}
