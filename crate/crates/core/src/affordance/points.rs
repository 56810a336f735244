use std::fmt;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Mask;

pub const MAX_POINTS: usize = 50;

/// A point in normalized image coordinates, x right and y down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormPoint {
    pub x: f64,
    pub y: f64,
}

pub fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

impl NormPoint {
    pub fn new(x: f64, y: f64) -> Self {
        NormPoint { x, y }
    }

    /// Normalizes a pixel by the image size, unrounded.
    pub fn from_pixel(px: u32, py: u32, width: u32, height: u32) -> Self {
        NormPoint {
            x: px as f64 / width as f64,
            y: py as f64 / height as f64,
        }
    }

    pub fn rounded(self) -> Self {
        NormPoint {
            x: round2(self.x),
            y: round2(self.y),
        }
    }

    /// The pixel a normalized point scores against: round-to-nearest after
    /// scaling by (width - 1, height - 1).
    pub fn to_pixel(self, width: u32, height: u32) -> (u32, u32) {
        let q = |v: f64, n: u32| ((v * (n - 1) as f64).round().max(0.0) as u32).min(n - 1);
        (q(self.x, width), q(self.y, height))
    }

    pub fn in_unit_square(self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }
}

/// Ground-truth answer points, rounded to two decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<NormPoint>", into = "Vec<NormPoint>")]
pub struct PointSet(Vec<NormPoint>);

impl PointSet {
    /// Rounds each point; fails unless 1..=50 points all lie in [0, 1].
    pub fn new(points: Vec<NormPoint>) -> Result<Self> {
        if points.is_empty() || points.len() > MAX_POINTS {
            return Err(Error::Invalid(format!("point count {} outside 1..={MAX_POINTS}", points.len())));
        }
        if let Some(p) = points.iter().find(|p| !p.in_unit_square()) {
            return Err(Error::Invalid(format!("point ({}, {}) outside the unit square", p.x, p.y)));
        }
        Ok(PointSet(points.into_iter().map(NormPoint::rounded).collect()))
    }

    pub fn points(&self) -> &[NormPoint] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<NormPoint>> for PointSet {
    type Error = Error;

    fn try_from(v: Vec<NormPoint>) -> Result<Self> {
        PointSet::new(v)
    }
}

impl From<PointSet> for Vec<NormPoint> {
    fn from(p: PointSet) -> Self {
        p.0
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_points(&self.0))
    }
}

/// `[(0.56, 0.69), (0.53, 0.76)]`
pub fn format_points(points: &[NormPoint]) -> String {
    let body: Vec<String> = points.iter().map(|p| format!("({:.2}, {:.2})", p.x, p.y)).collect();
    format!("[{}]", body.join(", "))
}

/// One sampled answer: the pixels drawn from the mask and their rounded
/// normalized coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPoints {
    pub pixels: Vec<(u32, u32)>,
    pub points: PointSet,
}

/// Draws `n` mask pixels uniformly, without replacement when the mask holds
/// at least `n` pixels.
pub fn sample_points_in_mask<R: Rng + ?Sized>(mask: &Mask, n: usize, rng: &mut R) -> Result<SampledPoints> {
    if n == 0 || n > MAX_POINTS {
        return Err(Error::Invalid(format!("point count {n} outside 1..={MAX_POINTS}")));
    }
    let population: Vec<(u32, u32)> = mask.pixels().collect();
    if population.is_empty() {
        return Err(Error::UnreferencableTarget("empty mask".into()));
    }
    let pixels: Vec<(u32, u32)> = if population.len() >= n {
        index::sample(rng, population.len(), n).iter().map(|i| population[i]).collect()
    } else {
        (0..n).map(|_| population[rng.random_range(0..population.len())]).collect()
    };
    let (w, h) = (mask.width(), mask.height());
    let points = PointSet::new(pixels.iter().map(|&(x, y)| NormPoint::from_pixel(x, y, w, h)).collect())?;
    Ok(SampledPoints { pixels, points })
}

/// Mask pixels whose rounded normalized coordinates score back inside
/// `mask`, minus the pixels in `exclude`.
pub fn answerable_pixels(mask: &Mask, exclude: Option<&Mask>) -> Mask {
    let (w, h) = (mask.width(), mask.height());
    let mut out = Mask::new(w, h);
    for (x, y) in mask.pixels() {
        if exclude.is_some_and(|e| e.get(x, y)) {
            continue;
        }
        let (qx, qy) = NormPoint::from_pixel(x, y, w, h).rounded().to_pixel(w, h);
        if mask.get(qx, qy) {
            out.set(x, y, true);
        }
    }
    out
}
