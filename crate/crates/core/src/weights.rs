//! Product-trapezoid weights for the sech² kernel on a uniform grid.
//!
//! With f' linear on each cell, the cell ending q cells before the
//! evaluation node contributes `rising[q]·f'(right end) + falling[q]·f'(left end)`.
//! The weights only depend on the lag, so one table serves every node.

use crate::kernels::{ln_cosh, sech2};
use crate::quadrature::kronrod15;

#[derive(Debug, Clone, PartialEq)]
pub struct Sech2Weights {
    rising: Vec<f64>,
    falling: Vec<f64>,
}

impl Sech2Weights {
    /// Weights for `cells` lags on a grid with spacing `h` and kernel width `w`.
    pub fn new(h: f64, w: f64, cells: usize) -> Self {
        let delta = h / w;
        let mut rising = Vec::with_capacity(cells);
        let mut falling = Vec::with_capacity(cells);
        for q in 0..cells {
            let (r, f) = if delta <= 1.0 {
                // The closed form cancels badly for narrow cells; a 15-point
                // rule is exact to rounding on a cell this smooth.
                let shift = (q + 1) as f64;
                let r = h * kronrod15(|th| th * sech2((th - shift) * delta), 0.0, 1.0);
                let all = h * kronrod15(|th| sech2((th - shift) * delta), 0.0, 1.0);
                (r, all - r)
            } else {
                let y0 = -((q + 1) as f64) * delta;
                let y1 = -(q as f64) * delta;
                let mass = y1.tanh() - y0.tanh();
                let moment = delta * y1.tanh() - (ln_cosh(y1) - ln_cosh(y0));
                let r = w * moment / delta;
                (r, w * mass - r)
            };
            rising.push(r);
            falling.push(f);
        }
        Self { rising, falling }
    }

    pub fn len(&self) -> usize {
        self.rising.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rising.is_empty()
    }

    /// Weight on f'_j for the integral up to node i (j ≤ i), without C₁.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        debug_assert!(j <= i && i <= self.len());
        let mut v = 0.0;
        if j >= 1 {
            v += self.rising[i - j];
        }
        if j < i {
            v += self.falling[i - j - 1];
        }
        v
    }

    /// ∫ from node 0 to node i of the piecewise-linear interpolant of `d` times the kernel.
    pub fn apply_row(&self, d: &[f64], i: usize) -> f64 {
        (0..i)
            .map(|c| self.rising[i - 1 - c] * d[c + 1] + self.falling[i - 1 - c] * d[c])
            .sum()
    }

    pub fn rising(&self) -> &[f64] {
        &self.rising
    }

    pub fn falling(&self) -> &[f64] {
        &self.falling
    }
}
