//! B-spline bases on a uniform grid over `[-1, 1]`.
//!
//! `degree` follows the KAN convention: a grid with `G` intervals is
//! extended by `degree` knots on each side, giving `G + 2*degree + 1` knots
//! and `G + degree` basis functions. Inputs outside the grid are clamped to
//! the grid edge before evaluation.

use serde::{Deserialize, Serialize};

pub const GRID_LO: f64 = -1.0;
pub const GRID_HI: f64 = 1.0;

/// Uniform extended knot vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineGrid {
    pub intervals: usize,
    pub degree: usize,
    knots: Vec<f64>,
}

impl SplineGrid {
    pub fn new(intervals: usize, degree: usize) -> SplineGrid {
        assert!(intervals >= 1, "grid needs at least one interval");
        let h = (GRID_HI - GRID_LO) / intervals as f64;
        let knots = (0..intervals + 2 * degree + 1)
            .map(|m| GRID_LO + (m as f64 - degree as f64) * h)
            .collect();
        SplineGrid { intervals, degree, knots }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn n_basis(&self) -> usize {
        self.intervals + self.degree
    }

    fn step(&self) -> f64 {
        (GRID_HI - GRID_LO) / self.intervals as f64
    }

    /// Evaluates the `degree + 1` non-zero basis functions at `x` (clamped)
    /// and their derivatives. Returns the index of the first non-zero basis
    /// function and whether `x` was inside the grid. Derivatives are zero for
    /// clamped inputs.
    pub fn local(&self, x: f64, values: &mut [f64], derivs: &mut [f64]) -> (usize, bool) {
        let p = self.degree;
        debug_assert!(values.len() > p && derivs.len() > p);
        let inside = (GRID_LO..=GRID_HI).contains(&x);
        let u = x.clamp(GRID_LO, GRID_HI);
        let cell = (((u - GRID_LO) / self.step()).floor() as usize).min(self.intervals - 1);
        let span = cell + p;
        let t = &self.knots;

        // Cox-de Boor on the non-zero triangle (The NURBS Book, A2.2).
        let mut left = [0.0f64; 16];
        let mut right = [0.0f64; 16];
        let mut lower = [0.0f64; 16];
        values[0] = 1.0;
        for j in 1..=p {
            left[j] = u - t[span + 1 - j];
            right[j] = t[span + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                let tmp = values[r] / (right[r + 1] + left[j - r]);
                values[r] = saved + right[r + 1] * tmp;
                saved = left[j - r] * tmp;
            }
            values[j] = saved;
            if j + 1 == p {
                lower[..=j].copy_from_slice(&values[..=j]);
            }
        }
        if p == 0 {
            derivs[0] = 0.0;
        } else if !inside {
            derivs[..=p].iter_mut().for_each(|d| *d = 0.0);
        } else {
            if p == 1 {
                lower[0] = 1.0;
            }
            // B'_{i,p} = (B_{i,p-1} - B_{i+1,p-1}) / h on a uniform grid;
            // `lower` holds the p non-zero degree-(p-1) values starting at
            // index span-p+1.
            let c = 1.0 / self.step();
            for r in 0..=p {
                let a = if r >= 1 { lower[r - 1] } else { 0.0 };
                let b = if r < p { lower[r] } else { 0.0 };
                derivs[r] = c * (a - b);
            }
        }
        (span - p, inside)
    }
}

/// Full basis vector (length `G + degree`) by the textbook Cox-de Boor
/// recursion over all knots. `x` is clamped to the grid.
pub fn spline_basis(x: f64, knots: &[f64], degree: usize) -> Vec<f64> {
    let n0 = knots.len() - 1;
    let lo = knots[degree];
    let hi = knots[knots.len() - 1 - degree];
    let u = x.clamp(lo, hi);
    let last_cell = knots.len() - 2 - degree;
    let mut b: Vec<f64> = (0..n0)
        .map(|i| {
            let hit = knots[i] <= u && u < knots[i + 1];
            let closing = u == hi && i == last_cell;
            if hit || closing {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    if u == hi {
        // right edge belongs to the last interior cell only
        for (i, v) in b.iter_mut().enumerate() {
            if i != last_cell {
                *v = 0.0;
            }
        }
    }
    for p in 1..=degree {
        let next: Vec<f64> = (0..n0 - p)
            .map(|i| {
                let mut v = 0.0;
                let d1 = knots[i + p] - knots[i];
                if d1 > 0.0 {
                    v += (u - knots[i]) / d1 * b[i];
                }
                let d2 = knots[i + p + 1] - knots[i + 1];
                if d2 > 0.0 {
                    v += (knots[i + p + 1] - u) / d2 * b[i + 1];
                }
                v
            })
            .collect();
        b = next;
    }
    b
}

/// Derivative of every basis function with respect to `x`.
pub fn spline_basis_derivative(x: f64, knots: &[f64], degree: usize) -> Vec<f64> {
    let n = knots.len() - degree - 1;
    if degree == 0 {
        return vec![0.0; n];
    }
    let lower = spline_basis(x, knots, degree - 1);
    let p = degree as f64;
    (0..n)
        .map(|i| {
            let mut d = 0.0;
            let d1 = knots[i + degree] - knots[i];
            if d1 > 0.0 {
                d += p / d1 * lower[i];
            }
            let d2 = knots[i + degree + 1] - knots[i + 1];
            if d2 > 0.0 {
                d -= p / d2 * lower[i + 1];
            }
            d
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity() {
        let g = SplineGrid::new(5, 5);
        for k in 0..=200 {
            let x = -1.0 + 2.0 * k as f64 / 200.0;
            let b = spline_basis(x, g.knots(), 5);
            assert_eq!(b.len(), 10);
            assert!(b.iter().all(|&v| v >= 0.0));
            assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn degree_zero_is_indicator() {
        let g = SplineGrid::new(4, 0);
        // midpoint of the second cell
        let b = spline_basis(-0.25, g.knots(), 0);
        assert_eq!(b, vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn degree_one_at_knot_has_single_unit_entry() {
        let g = SplineGrid::new(4, 1);
        let b = spline_basis(0.0, g.knots(), 1);
        let nonzero: Vec<f64> = b.iter().copied().filter(|&v| v != 0.0).collect();
        assert_eq!(nonzero, vec![1.0]);
    }

    #[test]
    fn local_matches_full() {
        for degree in 0..=5 {
            let g = SplineGrid::new(5, degree);
            let mut vals = [0.0; 8];
            let mut ders = [0.0; 8];
            for k in 0..=97 {
                let x = -1.2 + 2.4 * k as f64 / 97.0;
                let full = spline_basis(x, g.knots(), degree);
                let dfull = spline_basis_derivative(x, g.knots(), degree);
                let (first, inside) = g.local(x, &mut vals, &mut ders);
                for (i, want) in full.iter().enumerate() {
                    let got = if i >= first && i <= first + degree { vals[i - first] } else { 0.0 };
                    assert!((got - want).abs() < 1e-12, "deg {degree} x={x} i={i}");
                    if inside {
                        let got_d =
                            if i >= first && i <= first + degree { ders[i - first] } else { 0.0 };
                        assert!((got_d - dfull[i]).abs() < 1e-9, "deg {degree} x={x} i={i}");
                    }
                }
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let g = SplineGrid::new(5, 5);
        let h = 1e-5;
        for k in 1..50 {
            let x = -0.98 + 1.96 * k as f64 / 50.0;
            let d = spline_basis_derivative(x, g.knots(), 5);
            let bp = spline_basis(x + h, g.knots(), 5);
            let bm = spline_basis(x - h, g.knots(), 5);
            for i in 0..d.len() {
                let fd = (bp[i] - bm[i]) / (2.0 * h);
                assert!((fd - d[i]).abs() < 1e-6, "x={x} i={i}: {fd} vs {}", d[i]);
            }
        }
    }

    #[test]
    fn outside_inputs_clamp() {
        let g = SplineGrid::new(5, 3);
        assert_eq!(spline_basis(3.0, g.knots(), 3), spline_basis(1.0, g.knots(), 3));
        assert_eq!(spline_basis(-7.0, g.knots(), 3), spline_basis(-1.0, g.knots(), 3));
    }
}
