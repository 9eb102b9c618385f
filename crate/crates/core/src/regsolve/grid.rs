use crate::error::{Error, Result};
use crate::geometry::Point;

/// Uniform tensor grid over `[-half_width, half_width]^2`. Points are stored
/// row-major: index `iy * resolution + ix`, x varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingGrid {
    half_width: f64,
    resolution: usize,
}

impl SamplingGrid {
    pub fn new(half_width: f64, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Domain(format!("grid resolution {resolution} < 2")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Domain(format!("grid half-width {half_width}")));
        }
        Ok(SamplingGrid { half_width, resolution })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.resolution - 1) as f64
    }

    /// Coordinates along one axis.
    pub fn axis(&self) -> Vec<f64> {
        (0..self.resolution)
            .map(|i| -self.half_width + self.spacing() * i as f64)
            .collect()
    }

    pub fn point(&self, index: usize) -> Point {
        let h = self.spacing();
        let ix = index % self.resolution;
        let iy = index / self.resolution;
        [-self.half_width + h * ix as f64, -self.half_width + h * iy as f64]
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}
