//! Obstacle scenes, boundary parametrizations and point membership.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// A point or vector in the plane.
pub type Point = [f64; 2];

/// Kite shape coefficient in `(cos t + 0.65 cos 2t - 0.65, 1.5 sin t)`.
const KITE_A: f64 = 0.65;
const KITE_B: f64 = 1.5;

/// Boundary samples used for the disjointness and winding-number tests.
const MEMBERSHIP_SAMPLES: usize = 4096;

/// A single sound-soft obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Obstacle {
    Disk {
        center: Point,
        radius: f64,
    },
    Ellipse {
        center: Point,
        semi_a: f64,
        semi_b: f64,
        rotation: f64,
    },
    /// The classical kite curve scaled by `scale` and translated to `center`.
    Kite {
        center: Point,
        scale: f64,
    },
}

impl Obstacle {
    pub fn disk(center: Point, radius: f64) -> Self {
        Obstacle::Disk { center, radius }
    }

    pub fn ellipse(center: Point, semi_a: f64, semi_b: f64, rotation: f64) -> Self {
        Obstacle::Ellipse {
            center,
            semi_a,
            semi_b,
            rotation,
        }
    }

    pub fn kite(center: Point, scale: f64) -> Self {
        Obstacle::Kite { center, scale }
    }

    pub fn center(&self) -> Point {
        match *self {
            Obstacle::Disk { center, .. } | Obstacle::Ellipse { center, .. } | Obstacle::Kite { center, .. } => center,
        }
    }

    /// Same obstacle moved by `shift`.
    pub fn translated(&self, shift: Point) -> Self {
        let mv = |c: Point| [c[0] + shift[0], c[1] + shift[1]];
        match *self {
            Obstacle::Disk { center, radius } => Obstacle::Disk {
                center: mv(center),
                radius,
            },
            Obstacle::Ellipse {
                center,
                semi_a,
                semi_b,
                rotation,
            } => Obstacle::Ellipse {
                center: mv(center),
                semi_a,
                semi_b,
                rotation,
            },
            Obstacle::Kite { center, scale } => Obstacle::Kite {
                center: mv(center),
                scale,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        let (c, sizes): (Point, Vec<f64>) = match *self {
            Obstacle::Disk { center, radius } => (center, vec![radius]),
            Obstacle::Ellipse {
                center,
                semi_a,
                semi_b,
                rotation,
            } => {
                if !finite(rotation) {
                    return Err(Error::InvalidObstacle("non-finite rotation".into()));
                }
                (center, vec![semi_a, semi_b])
            }
            Obstacle::Kite { center, scale } => (center, vec![scale]),
        };
        if !finite(c[0]) || !finite(c[1]) {
            return Err(Error::InvalidObstacle("non-finite center".into()));
        }
        if sizes.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidObstacle(format!(
                "size parameters must be positive: {sizes:?}"
            )));
        }
        Ok(())
    }

    /// Smooth `2 pi`-periodic parametrization of the boundary.
    pub fn parametrize(&self) -> BoundaryParametrization {
        BoundaryParametrization { obstacle: *self }
    }

    /// Inside test (boundary inclusive for disks).
    pub fn contains(&self, z: Point) -> bool {
        match *self {
            Obstacle::Disk { center, radius } => {
                let dx = z[0] - center[0];
                let dy = z[1] - center[1];
                dx * dx + dy * dy <= radius * radius
            }
            Obstacle::Ellipse {
                center,
                semi_a,
                semi_b,
                rotation,
            } => {
                let (s, c) = rotation.sin_cos();
                let dx = z[0] - center[0];
                let dy = z[1] - center[1];
                let u = c * dx + s * dy;
                let v = -s * dx + c * dy;
                (u / semi_a).powi(2) + (v / semi_b).powi(2) <= 1.0
            }
            Obstacle::Kite { .. } => winding_number(&self.parametrize().sample(MEMBERSHIP_SAMPLES), z) != 0,
        }
    }

    /// Radius of a disk about the center that contains the obstacle.
    pub fn bounding_radius(&self) -> f64 {
        match *self {
            Obstacle::Disk { radius, .. } => radius,
            Obstacle::Ellipse { semi_a, semi_b, .. } => semi_a.max(semi_b),
            Obstacle::Kite { scale, .. } => {
                let b = self.parametrize();
                let c = self.center();
                b.sample(512)
                    .iter()
                    .map(|p| ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt())
                    .fold(0.0, f64::max)
                    .max(scale)
            }
        }
    }
}

/// Position and derivatives of a closed boundary curve over `[0, 2 pi)`.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryParametrization {
    obstacle: Obstacle,
}

impl BoundaryParametrization {
    /// All supported curves are analytic.
    pub fn is_analytic(&self) -> bool {
        true
    }

    pub fn period(&self) -> f64 {
        TAU
    }

    pub fn position(&self, t: f64) -> Point {
        let (s, c) = t.sin_cos();
        match self.obstacle {
            Obstacle::Disk { center, radius } => [center[0] + radius * c, center[1] + radius * s],
            Obstacle::Ellipse {
                center,
                semi_a,
                semi_b,
                rotation,
            } => {
                let (rs, rc) = rotation.sin_cos();
                let u = semi_a * c;
                let v = semi_b * s;
                [center[0] + rc * u - rs * v, center[1] + rs * u + rc * v]
            }
            Obstacle::Kite { center, scale } => [
                center[0] + scale * (c + KITE_A * (2.0 * t).cos() - KITE_A),
                center[1] + scale * KITE_B * s,
            ],
        }
    }

    pub fn derivative(&self, t: f64) -> Point {
        let (s, c) = t.sin_cos();
        match self.obstacle {
            Obstacle::Disk { radius, .. } => [-radius * s, radius * c],
            Obstacle::Ellipse {
                semi_a,
                semi_b,
                rotation,
                ..
            } => {
                let (rs, rc) = rotation.sin_cos();
                let u = -semi_a * s;
                let v = semi_b * c;
                [rc * u - rs * v, rs * u + rc * v]
            }
            Obstacle::Kite { scale, .. } => [scale * (-s - 2.0 * KITE_A * (2.0 * t).sin()), scale * KITE_B * c],
        }
    }

    pub fn second_derivative(&self, t: f64) -> Point {
        let (s, c) = t.sin_cos();
        match self.obstacle {
            Obstacle::Disk { radius, .. } => [-radius * c, -radius * s],
            Obstacle::Ellipse {
                semi_a,
                semi_b,
                rotation,
                ..
            } => {
                let (rs, rc) = rotation.sin_cos();
                let u = -semi_a * c;
                let v = -semi_b * s;
                [rc * u - rs * v, rs * u + rc * v]
            }
            Obstacle::Kite { scale, .. } => [scale * (-c - 4.0 * KITE_A * (2.0 * t).cos()), -scale * KITE_B * s],
        }
    }

    /// `count` equispaced boundary points starting at `t = 0`.
    pub fn sample(&self, count: usize) -> Vec<Point> {
        (0..count)
            .map(|i| self.position(TAU * i as f64 / count as f64))
            .collect()
    }
}

/// Winding number of a closed polygon around `z`.
pub fn winding_number(polygon: &[Point], z: Point) -> i32 {
    let mut wn = 0;
    let n = polygon.len();
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        let cross = (b[0] - a[0]) * (z[1] - a[1]) - (z[0] - a[0]) * (b[1] - a[1]);
        if a[1] <= z[1] {
            if b[1] > z[1] && cross > 0.0 {
                wn += 1;
            }
        } else if b[1] <= z[1] && cross < 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// A non-empty collection of pairwise disjoint obstacles.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    obstacles: Vec<Obstacle>,
}

impl Scene {
    pub fn new(obstacles: Vec<Obstacle>) -> Result<Self> {
        if obstacles.is_empty() {
            return Err(Error::InvalidObstacle("scene is empty".into()));
        }
        for o in &obstacles {
            o.validate()?;
        }
        for i in 0..obstacles.len() {
            for j in i + 1..obstacles.len() {
                if overlapping(&obstacles[i], &obstacles[j]) {
                    return Err(Error::InvalidObstacle(format!("obstacles {i} and {j} overlap")));
                }
            }
        }
        Ok(Scene { obstacles })
    }

    pub fn single(obstacle: Obstacle) -> Result<Self> {
        Scene::new(vec![obstacle])
    }

    /// Like [`Scene::new`], additionally requiring every obstacle to lie in
    /// the square `[-half_width, half_width]^2`.
    pub fn within(obstacles: Vec<Obstacle>, half_width: f64) -> Result<Self> {
        let scene = Scene::new(obstacles)?;
        for (i, o) in scene.obstacles.iter().enumerate() {
            let outside = o
                .parametrize()
                .sample(256)
                .iter()
                .any(|p| p[0].abs() > half_width || p[1].abs() > half_width);
            if outside {
                return Err(Error::InvalidObstacle(format!(
                    "obstacle {i} leaves the probing domain of half-width {half_width}"
                )));
            }
        }
        Ok(scene)
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn contains(&self, z: Point) -> bool {
        self.obstacles.iter().any(|o| o.contains(z))
    }

    pub fn translated(&self, shift: Point) -> Self {
        Scene {
            obstacles: self.obstacles.iter().map(|o| o.translated(shift)).collect(),
        }
    }

    /// Approximate distance from `z` to the union of obstacles (zero inside).
    pub fn distance(&self, z: Point) -> f64 {
        if self.contains(z) {
            return 0.0;
        }
        self.obstacles
            .iter()
            .flat_map(|o| o.parametrize().sample(512))
            .map(|p| ((p[0] - z[0]).powi(2) + (p[1] - z[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min)
    }
}

fn overlapping(a: &Obstacle, b: &Obstacle) -> bool {
    let pa = a.parametrize().sample(MEMBERSHIP_SAMPLES / 4);
    let pb = b.parametrize().sample(MEMBERSHIP_SAMPLES / 4);
    // one inside the other, or boundaries touching
    if a.contains(pb[0]) || b.contains(pa[0]) {
        return true;
    }
    if pb.iter().any(|&p| a.contains(p)) || pa.iter().any(|&p| b.contains(p)) {
        return true;
    }
    let min_dist = pa
        .iter()
        .flat_map(|p| pb.iter().map(move |q| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)))
        .fold(f64::INFINITY, f64::min);
    min_dist <= 0.0
}
