// SPDX-License-Identifier: MIT OR Apache-2.0

//! Kinetic segment tree over lines `slope_j * x + b_j`.
//!
//! Supports adding a constant to the intercepts of a suffix of lines,
//! advancing the shared parameter `x` monotonically, and querying the
//! maximum line with its smallest index. Each node caches its winning line
//! and the first integer `x` at which any winner in its subtree changes
//! (its melt time), so advancing `x` only revisits nodes that melted.

const NEVER: i64 = i64::MAX;

#[derive(Clone, Copy, Debug)]
struct Node {
    win: u32,
    /// Intercept of `win`, with every pending add at or above this node applied.
    b: i64,
    melt: i64,
    lazy: i64,
}

pub(crate) struct KineticMax {
    slope: Vec<i64>,
    nodes: Vec<Node>,
    x: i64,
}

impl KineticMax {
    /// All intercepts start at zero and `x` at zero.
    pub(crate) fn new(slope: Vec<i64>) -> Self {
        assert!(!slope.is_empty());
        let size = slope.len();
        let mut tree = Self {
            slope,
            nodes: vec![Node { win: 0, b: 0, melt: NEVER, lazy: 0 }; 4 * size],
            x: 0,
        };
        tree.build(1, 0, size);
        tree
    }

    fn build(&mut self, node: usize, lo: usize, hi: usize) {
        if hi - lo == 1 {
            self.nodes[node] = Node { win: lo as u32, b: 0, melt: NEVER, lazy: 0 };
            return;
        }
        let mid = (lo + hi) / 2;
        self.build(2 * node, lo, mid);
        self.build(2 * node + 1, mid, hi);
        self.pull(node);
    }

    /// Current maximum value and the smallest index attaining it.
    pub(crate) fn max(&self) -> (i64, usize) {
        let root = &self.nodes[1];
        (self.value(root.win, root.b), root.win as usize)
    }

    /// Adds `delta` to the intercepts of lines `from..to`.
    pub(crate) fn add(&mut self, from: usize, to: usize, delta: i64) {
        let size = self.slope.len();
        self.add_rec(1, 0, size, from, to, delta);
    }

    /// Moves `x` forward to `x`.
    pub(crate) fn advance(&mut self, x: i64) {
        debug_assert!(x >= self.x);
        self.x = x;
        let size = self.slope.len();
        self.advance_rec(1, 0, size);
    }

    fn value(&self, line: u32, b: i64) -> i64 {
        self.slope[line as usize] * self.x + b
    }

    fn apply(&mut self, node: usize, delta: i64) {
        let n = &mut self.nodes[node];
        n.b += delta;
        n.lazy += delta;
    }

    fn push(&mut self, node: usize) {
        let lazy = self.nodes[node].lazy;
        if lazy != 0 {
            self.apply(2 * node, lazy);
            self.apply(2 * node + 1, lazy);
            self.nodes[node].lazy = 0;
        }
    }

    /// Recomputes the winner and melt time of an internal node from its
    /// children, which must be current at `x`.
    fn pull(&mut self, node: usize) {
        let l = self.nodes[2 * node];
        let r = self.nodes[2 * node + 1];
        let (al, ar) = (self.slope[l.win as usize], self.slope[r.win as usize]);
        let vl = al * self.x + l.b;
        let vr = ar * self.x + r.b;
        // Left indices are smaller, so the left line keeps ties.
        let (win, b, cross) = if vr > vl {
            // Left takes over once al x + bl >= ar x + br.
            let cross = if al > ar { div_ceil(r.b - l.b, al - ar) } else { NEVER };
            (r.win, r.b, cross)
        } else {
            // Right takes over once ar x + br > al x + bl.
            let cross = if ar > al { div_floor(l.b - r.b, ar - al) + 1 } else { NEVER };
            (l.win, l.b, cross)
        };
        let n = &mut self.nodes[node];
        n.win = win;
        n.b = b;
        n.melt = cross.min(l.melt).min(r.melt);
    }

    fn add_rec(&mut self, node: usize, lo: usize, hi: usize, from: usize, to: usize, delta: i64) {
        if to <= lo || hi <= from {
            return;
        }
        if from <= lo && hi <= to {
            // Every line below shifts equally: winners and melt times stay.
            self.apply(node, delta);
            return;
        }
        self.push(node);
        let mid = (lo + hi) / 2;
        self.add_rec(2 * node, lo, mid, from, to, delta);
        self.add_rec(2 * node + 1, mid, hi, from, to, delta);
        self.pull(node);
    }

    fn advance_rec(&mut self, node: usize, lo: usize, hi: usize) {
        if self.nodes[node].melt > self.x {
            return;
        }
        self.push(node);
        let mid = (lo + hi) / 2;
        self.advance_rec(2 * node, lo, mid);
        self.advance_rec(2 * node + 1, mid, hi);
        self.pull(node);
    }
}

fn div_floor(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

fn div_ceil(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    -(-a).div_euclid(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(slope: &[i64], b: &[i64], x: i64) -> (i64, usize) {
        let mut best = (slope[0] * x + b[0], 0);
        for j in 1..slope.len() {
            let v = slope[j] * x + b[j];
            if v > best.0 {
                best = (v, j);
            }
        }
        best
    }

    #[test]
    fn rounding_helpers() {
        assert_eq!(div_floor(7, 2), 3);
        assert_eq!(div_floor(-7, 2), -4);
        assert_eq!(div_ceil(7, 2), 4);
        assert_eq!(div_ceil(-7, 2), -3);
        assert_eq!(div_ceil(6, 2), 3);
    }

    #[test]
    fn matches_brute_force_under_random_operations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let size = rng.random_range(1..40);
            let slope: Vec<i64> = (0..size).map(|_| rng.random_range(-20..20)).collect();
            let mut b = vec![0i64; size];
            let mut tree = KineticMax::new(slope.clone());
            let mut x = 0i64;
            for _ in 0..60 {
                if rng.random_bool(0.5) {
                    let from = rng.random_range(0..size);
                    let to = rng.random_range(from + 1..=size);
                    let delta = rng.random_range(-30..30);
                    tree.add(from, to, delta);
                    for v in &mut b[from..to] {
                        *v += delta;
                    }
                } else {
                    x += rng.random_range(0..5);
                    tree.advance(x);
                }
                assert_eq!(tree.max(), brute(&slope, &b, x));
            }
        }
    }
}
