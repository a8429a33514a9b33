//! Closest point of a one-dimensional integer combination over a box.
//!
//! Minimises `|t - sum_k c_k x_k|` over `x_k in [lo_k, hi_k]` by depth-first
//! branch and bound. Levels are visited in decreasing coefficient order and
//! each level enumerates outward from the rounded centre, alternating sides.
//! A branch is cut once `|r - c_k x_k|` exceeds the best distance by more
//! than the largest amount the remaining levels can correct.

use crate::{Error, Result};

pub(crate) const MAX_LEVELS: usize = 6;

#[derive(Debug, Clone)]
pub(crate) struct BoxSearch {
    n: usize,
    /// Original variable index per level.
    order: [usize; MAX_LEVELS],
    c: [i128; MAX_LEVELS],
    lo: [i128; MAX_LEVELS],
    hi: [i128; MAX_LEVELS],
    /// `sum_{j > k} c_j max(|lo_j|, |hi_j|)`
    tail: [i128; MAX_LEVELS],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Hit {
    pub dist: i128,
    /// Minimiser in the caller's variable order.
    pub x: Vec<i128>,
    pub nodes: u64,
}

#[inline]
fn div_round(r: i128, c: i128) -> i128 {
    let q = r.div_euclid(c);
    if 2 * r.rem_euclid(c) >= c {
        q + 1
    } else {
        q
    }
}

impl BoxSearch {
    /// Every coefficient must be positive and `lo <= hi` for every variable.
    pub fn new(c: &[i128], lo: &[i128], hi: &[i128]) -> Self {
        let n = c.len();
        assert!(n >= 1 && n <= MAX_LEVELS && lo.len() == n && hi.len() == n);
        assert!(c.iter().all(|&v| v > 0), "coefficients must be positive");
        assert!(lo.iter().zip(hi).all(|(l, h)| l <= h));
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| c[b].cmp(&c[a]).then(a.cmp(&b)));
        let mut s = BoxSearch {
            n,
            order: [0; MAX_LEVELS],
            c: [0; MAX_LEVELS],
            lo: [0; MAX_LEVELS],
            hi: [0; MAX_LEVELS],
            tail: [0; MAX_LEVELS],
        };
        for (k, &i) in idx.iter().enumerate() {
            s.order[k] = i;
            s.c[k] = c[i];
            s.lo[k] = lo[i];
            s.hi[k] = hi[i];
        }
        let mut acc = 0i128;
        for k in (0..n).rev() {
            s.tail[k] = acc;
            acc += s.c[k] * s.lo[k].abs().max(s.hi[k].abs());
        }
        s
    }

    /// Rough node count for a target inside the box: the width of each
    /// non-final level's window `|r - c x| <= tail`.
    pub fn estimated_nodes(&self) -> f64 {
        let mut est = 1.0f64;
        for k in 0..self.n.saturating_sub(1) {
            let range = (self.hi[k] - self.lo[k] + 1) as f64;
            let window = 2.0 * self.tail[k] as f64 / self.c[k] as f64 + 3.0;
            est *= range.min(window);
        }
        est
    }

    /// Closest combination to `target`; with `exclude_zero` the all-zero
    /// vector is skipped. `None` only when nothing else is admissible.
    pub fn closest(&self, target: i128, exclude_zero: bool, cap: u64) -> Result<Option<Hit>> {
        let mut st = State {
            s: self,
            x: [0; MAX_LEVELS],
            best: i128::MAX,
            best_x: [0; MAX_LEVELS],
            found: false,
            nodes: 0,
            cap,
            exclude_zero,
        };
        st.visit(0, target, false)?;
        if !st.found {
            return Ok(None);
        }
        let mut x = vec![0; self.n];
        for k in 0..self.n {
            x[self.order[k]] = st.best_x[k];
        }
        Ok(Some(Hit {
            dist: st.best,
            x,
            nodes: st.nodes,
        }))
    }
}

struct State<'a> {
    s: &'a BoxSearch,
    x: [i128; MAX_LEVELS],
    best: i128,
    best_x: [i128; MAX_LEVELS],
    found: bool,
    nodes: u64,
    cap: u64,
    exclude_zero: bool,
}

impl State<'_> {
    fn bump(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(Error::CapExceeded {
                estimated: self.nodes as f64,
                cap: self.cap,
            });
        }
        Ok(())
    }

    fn offer(&mut self, k: usize, xk: i128, d: i128) {
        if !self.found || d < self.best {
            self.found = true;
            self.best = d;
            self.x[k] = xk;
            self.best_x = self.x;
        }
    }

    fn visit(&mut self, k: usize, r: i128, nonzero: bool) -> Result<()> {
        self.bump()?;
        let (c, lo, hi) = (self.s.c[k], self.s.lo[k], self.s.hi[k]);
        let centre = div_round(r, c).clamp(lo, hi);

        if k + 1 == self.s.n {
            if self.exclude_zero && !nonzero && centre == 0 {
                for xk in [1, -1] {
                    if (lo..=hi).contains(&xk) {
                        self.offer(k, xk, (r - c * xk).abs());
                    }
                }
            } else {
                self.offer(k, centre, (r - c * centre).abs());
            }
            return Ok(());
        }

        let tail = self.s.tail[k];
        let cut = |st: &Self, d: i128| st.found && d - tail >= st.best;
        let mut up = centre;
        let mut down = centre - 1;
        let (mut up_open, mut down_open) = (true, down >= lo);
        let mut take_up = true;
        while up_open || down_open {
            let xk = if (take_up && up_open) || !down_open { up } else { down };
            let d = (r - c * xk).abs();
            if cut(self, d) {
                if xk == up {
                    up_open = false;
                } else {
                    down_open = false;
                }
            } else {
                self.x[k] = xk;
                self.visit(k + 1, r - c * xk, nonzero || xk != 0)?;
                if xk == up {
                    up += 1;
                    up_open = up <= hi;
                } else {
                    down -= 1;
                    down_open = down >= lo;
                }
            }
            take_up = !take_up;
        }
        Ok(())
    }
}
