use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid in the similarity variable y, either symmetric about the
/// origin (`[-R, R]^N`) or radial (`[0, R]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dimension: usize,
    pub radial: bool,
    /// Node spacing.
    pub h: f64,
    /// Truncation radius, snapped to a multiple of `h`.
    pub radius: f64,
}

impl Grid {
    /// Symmetric tensor grid on `[-R, R]^N`.
    pub fn new(dimension: usize, h: f64, radius: f64) -> Result<Self> {
        Self::build(dimension, false, h, radius)
    }

    /// Radial grid on `[0, R]`.
    pub fn radial(dimension: usize, h: f64, radius: f64) -> Result<Self> {
        Self::build(dimension, true, h, radius)
    }

    fn build(dimension: usize, radial: bool, h: f64, radius: f64) -> Result<Self> {
        if dimension != 1 && dimension != 2 {
            return Err(Error::UnsupportedDimension(dimension));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "spacing h = {h} must be positive"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "radius R = {radius} must be positive"
            )));
        }
        let m = (radius / h).round() as usize;
        let grid = Grid {
            dimension,
            radial,
            h,
            radius: m as f64 * h,
        };
        if grid.axis_len() < 64 {
            return Err(Error::InvalidGrid(format!(
                "{} nodes per axis, at least 64 required",
                grid.axis_len()
            )));
        }
        Ok(grid)
    }

    /// Number of spacings between the origin and the truncation radius.
    pub fn half_count(&self) -> usize {
        (self.radius / self.h).round() as usize
    }

    pub fn axis_len(&self) -> usize {
        if self.radial {
            self.half_count() + 1
        } else {
            2 * self.half_count() + 1
        }
    }

    /// Total number of nodes. Radial grids are one-dimensional in storage.
    pub fn len(&self) -> usize {
        if self.radial {
            self.axis_len()
        } else {
            self.axis_len().pow(self.dimension as u32)
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node coordinates along one axis.
    pub fn axis(&self) -> Vec<f64> {
        let m = self.half_count() as i64;
        let start = if self.radial { 0 } else { -m };
        (start..=m).map(|i| i as f64 * self.h).collect()
    }

    /// Coordinates of every node; 2D grids are stored row-major with y1 outer.
    pub fn points(&self) -> Vec<[f64; 2]> {
        let ax = self.axis();
        if self.radial || self.dimension == 1 {
            ax.iter().map(|&y| [y, 0.0]).collect()
        } else {
            let mut pts = Vec::with_capacity(self.len());
            for &a in &ax {
                for &b in &ax {
                    pts.push([a, b]);
                }
            }
            pts
        }
    }

    /// Trapezoidal weights along one axis.
    pub fn axis_weights(&self) -> Vec<f64> {
        let n = self.axis_len();
        let mut w = vec![self.h; n];
        w[0] *= 0.5;
        w[n - 1] *= 0.5;
        w
    }

    /// Tensor-trapezoidal quadrature weights for every node. Radial grids
    /// carry the surface factor (2 for N=1, 2πr for N=2) so that the weights
    /// integrate radial functions over all of R^N.
    pub fn weights(&self) -> Vec<f64> {
        let aw = self.axis_weights();
        if self.radial {
            let ax = self.axis();
            return aw
                .iter()
                .zip(&ax)
                .map(|(w, r)| {
                    if self.dimension == 1 {
                        2.0 * w
                    } else {
                        2.0 * std::f64::consts::PI * r * w
                    }
                })
                .collect();
        }
        if self.dimension == 1 {
            aw
        } else {
            let mut w = Vec::with_capacity(self.len());
            for a in &aw {
                for b in &aw {
                    w.push(a * b);
                }
            }
            w
        }
    }

    /// Indices of nodes within the inner `fraction` of the truncation box.
    pub fn inner_indices(&self, fraction: f64) -> Vec<usize> {
        let lim = fraction * self.radius + 1e-12;
        self.points()
            .iter()
            .enumerate()
            .filter(|(_, p)| p[0].abs() <= lim && p[1].abs() <= lim)
            .map(|(i, _)| i)
            .collect()
    }

    /// Indices of nodes in the outermost `layers` rings of the box.
    pub fn boundary_indices(&self, layers: usize) -> Vec<usize> {
        let lim = self.radius - (layers as f64 - 0.5) * self.h;
        self.points()
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                if self.radial {
                    p[0] > lim
                } else {
                    p[0].abs() > lim || p[1].abs() > lim
                }
            })
            .map(|(i, _)| i)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_axis() {
        let g = Grid::new(1, 0.1, 10.0).unwrap();
        let ax = g.axis();
        assert_eq!(ax.len(), 201);
        for i in 0..ax.len() {
            assert!((ax[i] + ax[ax.len() - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            Grid::new(3, 0.1, 10.0),
            Err(Error::UnsupportedDimension(3))
        ));
        assert!(Grid::new(1, -0.1, 10.0).is_err());
        assert!(Grid::new(1, 1.0, 10.0).is_err());
    }

    #[test]
    fn weights_integrate_constants() {
        let g = Grid::new(2, 0.25, 8.0).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - 256.0).abs() < 1e-9);
    }
}
