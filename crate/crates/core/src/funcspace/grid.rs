use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform partition of `[a, b]` into `n` cells, nodes `x_j = a + j·h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::domain(format!("grid needs finite a < b, got [{a}, {b}]")));
        }
        if n < 2 {
            return Err(Error::domain(format!("grid needs at least 2 cells, got {n}")));
        }
        Ok(Grid { a, b, n })
    }

    /// `[0, 1]` with `n` cells.
    pub fn unit(n: usize) -> Result<Self> {
        Grid::new(0.0, 1.0, n)
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of cells.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    #[inline]
    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    /// Node `x_j`; the last node is exactly `b`.
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        debug_assert!(j <= self.n);
        if j == self.n {
            self.b
        } else {
            self.a + j as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|j| self.node(j)).collect()
    }

    /// Index of the cell `[x_c, x_{c+1})` containing `x`, clamped to the grid.
    pub fn cell_of(&self, x: f64) -> usize {
        let c = ((x - self.a) / self.h()).floor();
        if c <= 0.0 {
            0
        } else {
            (c as usize).min(self.n - 1)
        }
    }

    /// Node index `j` with `x_j == x`, if any.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let c = ((x - self.a) / self.h()).round();
        if c < 0.0 || c > self.n as f64 {
            return None;
        }
        let j = c as usize;
        (self.node(j) == x).then_some(j)
    }

    /// Same interval with twice as many cells.
    pub fn refined(&self) -> Grid {
        Grid { n: 2 * self.n, ..*self }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    /// Mirror image `a + b − x`; nodes map exactly onto nodes.
    #[inline]
    pub fn mirror(&self, x: f64) -> f64 {
        match self.node_index(x) {
            Some(j) => self.node(self.n - j),
            None => self.a + self.b - x,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(1.0, 0.0, 8).is_err());
        assert!(Grid::new(0.0, 0.0, 8).is_err());
        assert!(Grid::new(0.0, 1.0, 1).is_err());
        assert!(Grid::new(0.0, f64::INFINITY, 8).is_err());
    }

    #[test]
    fn nodes_are_uniform_and_end_at_b() {
        let g = Grid::new(-1.0, 2.0, 6).unwrap();
        let xs = g.nodes();
        assert_eq!(xs.len(), 7);
        assert_eq!(xs[0], -1.0);
        assert_eq!(xs[6], 2.0);
        for w in xs.windows(2) {
            assert!((w[1] - w[0] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn cell_lookup() {
        let g = Grid::unit(8).unwrap();
        assert_eq!(g.cell_of(0.0), 0);
        assert_eq!(g.cell_of(0.25), 2);
        assert_eq!(g.cell_of(0.26), 2);
        assert_eq!(g.cell_of(1.0), 7);
        assert_eq!(g.node_index(0.25), Some(2));
        assert_eq!(g.node_index(0.3), None);
    }
}
