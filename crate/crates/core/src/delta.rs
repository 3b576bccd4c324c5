//! Slimness of geodesic triangles.
//!
//! Exhaustive mode audits every geodesic triangle whose three sides have
//! length at most `R`. Up to translation such a triangle has a vertex at the
//! identity, and that family is closed under moving the base vertex, so it
//! is enough to measure the side `[e, a]` of triangles `(e, a, b)`.

use crate::ball::CayleyBall;
use crate::par;
use crate::word::HalfInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaMode {
    Exhaustive { radius: usize },
    Sampled { radius: usize, count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coverage {
    Exhaustive { radius: usize, triangles: u64 },
    Sampled { radius: usize, count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaEstimate {
    pub delta_raw: HalfInt,
    pub delta_ideal: HalfInt,
    pub coverage: Coverage,
    /// Vertex words of a triangle realising the maximum.
    pub witness: Option<(String, String)>,
    /// Pairs whose distance could not be certified and were treated as far.
    pub unresolved_pairs: u64,
}

#[derive(Debug, Error)]
pub enum DeltaError {
    #[error("ball radius {ball} is smaller than the audit radius {audit}")]
    BallTooSmall { ball: usize, audit: usize },
    #[error("audit radius must be at least 1")]
    RadiusTooSmall,
    #[error("exhaustive audit over {0} elements is too large; use sampled mode")]
    TooLarge(usize),
    #[error("geodesic enumeration budget exceeded at element {0}")]
    GeodesicBudget(String),
}

const GEODESIC_BUDGET: usize = 4096;

/// Distances inside `B_r`, capped at `r + 1`.
struct Capped<'a> {
    ball: &'a CayleyBall,
    r: u32,
    matrix: Option<Vec<u8>>,
    m: usize,
}

impl<'a> Capped<'a> {
    fn raw(ball: &CayleyBall, r: u32, x: u32, y: u32) -> (u8, bool) {
        if ball.distance_at_most(x, y, r) != Some(true) {
            return ((r + 1) as u8, false);
        }
        match ball.distance(x, y).value() {
            Some(v) => (v as u8, false),
            None => ((r + 1) as u8, true),
        }
    }

    fn get(&self, x: u32, y: u32) -> u8 {
        match &self.matrix {
            Some(m) => m[x as usize * self.m + y as usize],
            None => Self::raw(self.ball, self.r, x, y).0,
        }
    }
}

pub fn estimate_delta(ball: &CayleyBall, mode: DeltaMode) -> Result<DeltaEstimate, DeltaError> {
    let r = match mode {
        DeltaMode::Exhaustive { radius } | DeltaMode::Sampled { radius, .. } => radius,
    };
    if r < 1 {
        return Err(DeltaError::RadiusTooSmall);
    }
    if ball.radius() < r {
        return Err(DeltaError::BallTooSmall { ball: ball.radius(), audit: r });
    }
    let m = ball.offsets()[r + 1];
    let geos: Vec<Option<Vec<Vec<u32>>>> = par::map_range(m, |g| ball.geodesics(g as u32, GEODESIC_BUDGET));
    if let Some(g) = geos.iter().position(|v| v.is_none()) {
        return Err(DeltaError::GeodesicBudget(ball.render(g as u32)));
    }
    let geos: Vec<Vec<Vec<u32>>> = geos.into_iter().map(|v| v.unwrap()).collect();

    match mode {
        DeltaMode::Exhaustive { .. } => {
            if m > 8192 {
                return Err(DeltaError::TooLarge(m));
            }
            let rows: Vec<(Vec<u8>, u64)> = par::map_range(m, |x| {
                let mut row = vec![0u8; m];
                let mut unresolved = 0;
                for (y, cell) in row.iter_mut().enumerate() {
                    let (d, u) = Capped::raw(ball, r as u32, x as u32, y as u32);
                    *cell = d;
                    unresolved += u as u64;
                }
                (row, unresolved)
            });
            let unresolved = rows.iter().map(|(_, u)| u).sum();
            let matrix: Vec<u8> = rows.into_iter().flat_map(|(row, _)| row).collect();
            let cap = Capped { ball, r: r as u32, matrix: Some(matrix), m };
            let per_a: Vec<(HalfInt, Option<u32>, u64)> = par::map_range(m, |a| {
                let mut best = (HalfInt::ZERO, None, 0u64);
                let backs = backs_of(ball, &geos, a as u32);
                for b in 0..m {
                    if cap.get(a as u32, b as u32) as usize > r {
                        continue;
                    }
                    best.2 += 1;
                    let d = defect(ball, &cap, &geos, &backs, a as u32, b as u32);
                    if d > best.0 {
                        best.0 = d;
                        best.1 = Some(b as u32);
                    }
                }
                best
            });
            let triangles = per_a.iter().map(|t| t.2).sum();
            let (mut delta, mut witness) = (HalfInt::ZERO, None);
            for (a, (d, b, _)) in per_a.iter().enumerate() {
                if *d > delta {
                    delta = *d;
                    witness = b.map(|b| (ball.render(a as u32), ball.render(b)));
                }
            }
            Ok(DeltaEstimate {
                delta_raw: delta,
                delta_ideal: delta.times(4),
                coverage: Coverage::Exhaustive { radius: r, triangles },
                witness,
                unresolved_pairs: unresolved,
            })
        }
        DeltaMode::Sampled { count, seed, .. } => {
            let cap = Capped { ball, r: r as u32, matrix: None, m };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pairs = Vec::with_capacity(count);
            let mut attempts = 0usize;
            while pairs.len() < count && attempts < 50 * count.max(1) {
                attempts += 1;
                let a = rng.gen_range(0..m) as u32;
                let b = rng.gen_range(0..m) as u32;
                if cap.get(a, b) as usize <= r {
                    pairs.push((a, b));
                }
            }
            let defects = par::map_slice(&pairs, |&(a, b)| defect(ball, &cap, &geos, &backs_of(ball, &geos, a), a, b));
            let (mut delta, mut witness) = (HalfInt::ZERO, None);
            for (&(a, b), &d) in pairs.iter().zip(&defects) {
                if d > delta {
                    delta = d;
                    witness = Some((ball.render(a), ball.render(b)));
                }
            }
            Ok(DeltaEstimate {
                delta_raw: delta,
                delta_ideal: delta.times(4),
                coverage: Coverage::Sampled { radius: r, count: pairs.len(), seed },
                witness,
                unresolved_pairs: 0,
            })
        }
    }
}

/// `a^{-1} p` for every vertex `p` of every geodesic from e to `a`.
fn backs_of(ball: &CayleyBall, geos: &[Vec<Vec<u32>>], a: u32) -> Vec<Vec<u32>> {
    geos[a as usize]
        .iter()
        .map(|s1| s1.iter().map(|&p| ball.quotient(a, p).ok().flatten().unwrap_or(0)).collect())
        .collect()
}

/// Largest distance from a point of a geodesic `[e, a]` to the union of a
/// geodesic `[e, b]` and a geodesic `[a, b]`, maximised over all choices.
fn defect(ball: &CayleyBall, cap: &Capped<'_>, geos: &[Vec<Vec<u32>>], backs: &[Vec<u32>], a: u32, b: u32) -> HalfInt {
    let la = ball.level(a);
    if la == 0 {
        return HalfInt::ZERO;
    }
    // [a, b] is a translate of a geodesic from e to h = a^{-1} b
    let Ok(Some(h)) = ball.quotient(a, b) else { return HalfInt::ZERO };
    let g2 = &geos[b as usize];
    let g3 = &geos[h as usize];
    let mut best = HalfInt::ZERO;
    for (s1, back) in geos[a as usize].iter().zip(backs) {
        // |a^{-1} p| = la - j for the j-th vertex p of s1
        let far = |j: usize, s: &Vec<u32>, shift: bool| -> i64 {
            // distance in halves from vertex j of s1 to the vertex set of s
            let p = if shift { back[j] } else { s1[j] };
            s.iter().map(|&q| cap.get(p, q) as i64).min().unwrap_or(0) * 2
        };
        for j in 0..=la {
            let f2 = g2.iter().map(|s| far(j, s, false)).max().unwrap_or(0);
            let f3 = g3.iter().map(|s| far(j, s, true)).max().unwrap_or(0);
            best = best.max(HalfInt::from_halves(f2.min(f3)));
            if j < la {
                let f2 = g2
                    .iter()
                    .map(|s| {
                        let on = s.len() > j + 1 && s[j] == s1[j] && s[j + 1] == s1[j + 1];
                        if on { 0 } else { 1 + far(j, s, false).min(far(j + 1, s, false)) }
                    })
                    .max()
                    .unwrap_or(0);
                let f3 = g3
                    .iter()
                    .map(|s| {
                        // back[j] sits at position la - j of s
                        let i = la - j;
                        let on = i < s.len() && s[i] == back[j] && s[i - 1] == back[j + 1];
                        if on { 0 } else { 1 + far(j, s, true).min(far(j + 1, s, true)) }
                    })
                    .max()
                    .unwrap_or(0);
                best = best.max(HalfInt::from_halves(f2.min(f3)));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{BallOptions, GroupPresentation};

    fn ball(text: &str, r: usize) -> CayleyBall {
        CayleyBall::build(&GroupPresentation::parse(text).unwrap(), BallOptions::new(r)).unwrap()
    }

    #[test]
    fn trees_are_zero_slim() {
        for t in ["gens: a", "gens: a b"] {
            let b = ball(t, 4);
            let e = estimate_delta(&b, DeltaMode::Exhaustive { radius: 4 }).unwrap();
            assert_eq!(e.delta_raw, HalfInt::ZERO);
            assert_eq!(e.delta_ideal, HalfInt::ZERO);
        }
    }

    #[test]
    fn sampled_is_bounded_by_exhaustive() {
        let b = ball("gens: a b c d\nrel: [a,b][c,d]", 3);
        let ex = estimate_delta(&b, DeltaMode::Exhaustive { radius: 3 }).unwrap();
        let s = estimate_delta(&b, DeltaMode::Sampled { radius: 3, count: 200, seed: 7 }).unwrap();
        assert!(s.delta_raw <= ex.delta_raw);
        assert!(ex.delta_raw > HalfInt::ZERO);
    }

    #[test]
    fn radius_must_fit_in_ball() {
        let b = ball("gens: a", 2);
        assert!(matches!(
            estimate_delta(&b, DeltaMode::Exhaustive { radius: 3 }),
            Err(DeltaError::BallTooSmall { .. })
        ));
    }
}
