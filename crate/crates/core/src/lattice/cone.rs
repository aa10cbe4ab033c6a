//! Decomposition of a displacement in `Z^3` into at most four directed cones.
//!
//! With `x` translated to the origin and `|y - x|` sorted as `a <= b <= c`,
//! the route runs along `(1,1,1)` to the apex `m(1,1,1)` with `m = (a+b)/2`,
//! then `(-1,1,1)` for `(b-a)/2` time units, then `(1,1,1)` and `(-1,-1,1)`
//! for `(c-b)/2` units each. A time unit is one diagonal displacement, i.e.
//! three lattice steps. Each cone after the first opens with a deterministic
//! one-unit joint so consecutive cones touch only through the joint.

use crate::error::{Error, Result};

/// Maps local cone axes onto global axes with orientation signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frame {
    pub axes: [usize; 3],
    pub signs: [i64; 3],
}

impl Frame {
    pub fn identity() -> Self {
        Self { axes: [0, 1, 2], signs: [1, 1, 1] }
    }

    /// Global displacement of a local displacement.
    pub fn apply(&self, local: [i64; 3]) -> [i64; 3] {
        let mut g = [0; 3];
        for l in 0..3 {
            g[self.axes[l]] += self.signs[l] * local[l];
        }
        g
    }

    /// Global unit step for a step along local axis `l`.
    pub fn unit(&self, l: usize) -> [i64; 3] {
        let mut g = [0; 3];
        g[self.axes[l]] = self.signs[l];
        g
    }
}

/// A monotone box bridge from `start` to `start + frame.apply([time; 3])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeSegment {
    pub start: [i64; 3],
    pub frame: Frame,
    pub time: usize,
}

impl ConeSegment {
    pub fn end(&self) -> [i64; 3] {
        let t = self.time as i64;
        add(self.start, self.frame.apply([t, t, t]))
    }

    /// Number of lattice steps in any path through this cone.
    pub fn steps(&self) -> usize {
        3 * self.time
    }

    /// The eight corners of the cone's bounding box.
    pub fn corners(&self) -> Vec<[i64; 3]> {
        let t = self.time as i64;
        let mut out = Vec::with_capacity(8);
        for mask in 0..8 {
            let local = [(mask & 1) as i64 * t, ((mask >> 1) & 1) as i64 * t, ((mask >> 2) & 1) as i64 * t];
            out.push(add(self.start, self.frame.apply(local)));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConePiece {
    /// Deterministic unit steps (parity fixes and joints).
    Steps(Vec<[i64; 3]>),
    Cone(ConeSegment),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeDecomposition {
    pub from: [i64; 3],
    pub to: [i64; 3],
    pub pieces: Vec<ConePiece>,
}

impl ConeDecomposition {
    /// The four cone segments in route order (some may have zero time).
    pub fn segments(&self) -> Vec<&ConeSegment> {
        self.pieces
            .iter()
            .filter_map(|p| match p {
                ConePiece::Cone(c) => Some(c),
                ConePiece::Steps(_) => None,
            })
            .collect()
    }

    /// Sum of all piece displacements.
    pub fn displacement(&self) -> [i64; 3] {
        self.pieces.iter().fold([0; 3], |acc, p| match p {
            ConePiece::Steps(s) => s.iter().fold(acc, |a, &u| add(a, u)),
            ConePiece::Cone(c) => {
                let t = c.time as i64;
                add(acc, c.frame.apply([t, t, t]))
            }
        })
    }

    /// Total path length of any path following this decomposition.
    pub fn path_length(&self) -> usize {
        self.pieces
            .iter()
            .map(|p| match p {
                ConePiece::Steps(s) => s.len(),
                ConePiece::Cone(c) => c.steps(),
            })
            .sum()
    }

    /// Whether every cone box and joint vertex lies in `B((x+y)/2, 2|x-y|_2)`.
    pub fn within_ball(&self) -> bool {
        let center: Vec<f64> = (0..3).map(|k| 0.5 * (self.from[k] + self.to[k]) as f64).collect();
        let r = 2.0 * dist(self.from, self.to);
        let inside = |p: [i64; 3]| {
            let d2: f64 = (0..3).map(|k| (p[k] as f64 - center[k]).powi(2)).sum();
            d2 <= r * r + 1e-9
        };
        let mut cur = self.from;
        for p in &self.pieces {
            match p {
                ConePiece::Steps(s) => {
                    for &u in s {
                        cur = add(cur, u);
                        if !inside(cur) {
                            return false;
                        }
                    }
                }
                ConePiece::Cone(c) => {
                    if !c.corners().into_iter().all(inside) {
                        return false;
                    }
                    cur = c.end();
                }
            }
        }
        true
    }
}

fn add(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn dist(a: [i64; 3], b: [i64; 3]) -> f64 {
    (0..3).map(|k| ((a[k] - b[k]) as f64).powi(2)).sum::<f64>().sqrt()
}

/// Route from `x` to `y` through at most four directed cones.
pub fn cone_decomposition(x: &[i64], y: &[i64]) -> Result<ConeDecomposition> {
    if x.len() != 3 || y.len() != 3 {
        return Err(Error::Geometry(format!(
            "the four-cone route needs dimension 3, got {}",
            x.len().max(y.len())
        )));
    }
    if x == y {
        return Err(Error::Geometry("endpoints coincide".into()));
    }
    let from = [x[0], x[1], x[2]];
    let to = [y[0], y[1], y[2]];
    let mut pieces = Vec::new();
    let mut cur = from;

    let delta = |c: [i64; 3]| [to[0] - c[0], to[1] - c[1], to[2] - c[2]];
    let d0 = delta(cur);
    let same_parity = d0.iter().all(|v| v.rem_euclid(2) == d0[0].rem_euclid(2));
    if !same_parity {
        // Step along each odd coordinate towards y so every remaining difference is even.
        let mut fix = Vec::new();
        for k in 0..3 {
            if d0[k].rem_euclid(2) == 1 {
                let mut u = [0; 3];
                u[k] = d0[k].signum();
                fix.push(u);
                cur = add(cur, u);
            }
        }
        pieces.push(ConePiece::Steps(fix));
    }

    let d = delta(cur);
    let mut axes = [0usize, 1, 2];
    axes.sort_by_key(|&k| (d[k].abs(), k));
    // An axis emptied by a parity step keeps moving away from x, or the route
    // could step straight back onto it.
    let sign = |k: usize| if d[k] < 0 || (d[k] == 0 && d0[k] < 0) { -1 } else { 1 };
    let signs = [sign(axes[0]), sign(axes[1]), sign(axes[2])];
    let frame = Frame { axes, signs };
    let (a, b, c) = (d[axes[0]].abs(), d[axes[1]].abs(), d[axes[2]].abs());

    // Legs in the sorted local frame: (direction pattern, total time).
    let legs: [([i64; 3], i64); 4] = [
        ([1, 1, 1], a + (b - a) / 2),
        ([-1, 1, 1], (b - a) / 2),
        ([1, 1, 1], (c - b) / 2),
        ([-1, -1, 1], (c - b) / 2),
    ];
    let mut prev_pattern: Option<[i64; 3]> = None;
    for (k, &(pattern, total)) in legs.iter().enumerate() {
        let leg_frame = Frame {
            axes,
            signs: [frame.signs[0] * pattern[0], frame.signs[1] * pattern[1], frame.signs[2] * pattern[2]],
        };
        let joint = if k == 0 { 0 } else { total.min(1) };
        if joint > 0 {
            // Leave the previous cone through the coordinates that keep their direction.
            let prev = prev_pattern.unwrap_or(pattern);
            let mut order: Vec<usize> = (0..3).filter(|&l| pattern[l] == prev[l]).collect();
            order.extend((0..3).filter(|&l| pattern[l] != prev[l]));
            let steps: Vec<[i64; 3]> = order.iter().map(|&l| leg_frame.unit(l)).collect();
            for &u in &steps {
                cur = add(cur, u);
            }
            pieces.push(ConePiece::Steps(steps));
        }
        let time = (total - joint).max(0) as usize;
        let seg = ConeSegment { start: cur, frame: leg_frame, time };
        cur = seg.end();
        pieces.push(ConePiece::Cone(seg));
        if total > 0 {
            prev_pattern = Some(pattern);
        }
    }
    debug_assert_eq!(cur, to);
    Ok(ConeDecomposition { from, to, pieces })
}
