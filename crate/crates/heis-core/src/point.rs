//! Points of the Heisenberg group H^n and the Korányi gauge.
//!
//! A point is stored as 2n interleaved horizontal coordinates
//! (x_1, y_1, …, x_n, y_n) plus one vertical coordinate t. The product twists
//! the vertical coordinate by the symplectic cross term
//! 2·Σ_j (y_j x'_j − x_j y'_j); everything else in the crate (horizontal
//! lifts, Lévy areas, left-invariant derivatives) flows from that one formula.

use serde::Serialize;

use crate::error::{HeisError, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupPoint {
    horizontal: Vec<f64>,
    vertical: f64,
}

/// Vertical cross term of the group law: 2·Σ_j (a_y_j b_x_j − a_x_j b_y_j).
pub(crate) fn cross_term(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.len() / 2 {
        acc += a[2 * j + 1] * b[2 * j] - a[2 * j] * b[2 * j + 1];
    }
    2.0 * acc
}

impl GroupPoint {
    /// Builds a point from interleaved horizontal coordinates and a vertical
    /// coordinate. Panics if the horizontal slice has odd length, since no
    /// ambient group exists for it.
    pub fn new(horizontal: Vec<f64>, vertical: f64) -> Self {
        assert!(
            horizontal.len().is_multiple_of(2),
            "horizontal coordinate count must be even (2n), got {}",
            horizontal.len()
        );
        Self {
            horizontal,
            vertical,
        }
    }

    pub fn origin(n: usize) -> Self {
        Self::new(vec![0.0; 2 * n], 0.0)
    }

    /// Point from a flat (2n+1)-coordinate slice (x_1, y_1, …, x_n, y_n, t).
    pub fn from_coords(coords: &[f64]) -> Self {
        assert!(!coords.len().is_multiple_of(2), "flat coordinates must have odd length 2n+1");
        Self::new(coords[..coords.len() - 1].to_vec(), coords[coords.len() - 1])
    }

    pub fn n(&self) -> usize {
        self.horizontal.len() / 2
    }

    pub fn horizontal(&self) -> &[f64] {
        &self.horizontal
    }

    pub fn vertical(&self) -> f64 {
        self.vertical
    }

    /// x_j for 0-based complex index j.
    pub fn x(&self, j: usize) -> f64 {
        self.horizontal[2 * j]
    }

    /// y_j for 0-based complex index j.
    pub fn y(&self, j: usize) -> f64 {
        self.horizontal[2 * j + 1]
    }

    /// Flat coordinates (x_1, y_1, …, x_n, y_n, t).
    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.horizontal.clone();
        c.push(self.vertical);
        c
    }

    /// |z|² = Σ x_j² + y_j².
    pub fn horizontal_norm_sq(&self) -> f64 {
        self.horizontal.iter().map(|v| v * v).sum()
    }

    /// Group product: (z,t)·(z',t') = (z+z', t+t'+2Σ(y_j x'_j − x_j y'_j)).
    pub fn mul(&self, rhs: &GroupPoint) -> Result<GroupPoint> {
        if self.n() != rhs.n() {
            return Err(HeisError::DimensionMismatch {
                expected: self.n(),
                got: rhs.n(),
            });
        }
        let horizontal: Vec<f64> = self
            .horizontal
            .iter()
            .zip(&rhs.horizontal)
            .map(|(a, b)| a + b)
            .collect();
        let vertical =
            self.vertical + rhs.vertical + cross_term(&self.horizontal, &rhs.horizontal);
        Ok(GroupPoint::new(horizontal, vertical))
    }

    /// Group inverse (−z, −t); the cross term vanishes by antisymmetry.
    pub fn inverse(&self) -> GroupPoint {
        GroupPoint::new(
            self.horizontal.iter().map(|v| -v).collect(),
            -self.vertical,
        )
    }

    /// Korányi norm ρ(z,t) = (|z|⁴ + t²)^{1/4}.
    pub fn koranyi_norm(&self) -> f64 {
        let z2 = self.horizontal_norm_sq();
        (z2 * z2 + self.vertical * self.vertical).powf(0.25)
    }

    /// Korányi distance ρ(b⁻¹·a); a true left-invariant metric for this gauge.
    pub fn koranyi_dist(&self, other: &GroupPoint) -> Result<f64> {
        Ok(other.inverse().mul(self)?.koranyi_norm())
    }

    /// Anisotropic dilation δ_α(z,t) = (αz, α²t).
    pub fn dilate(&self, alpha: f64) -> GroupPoint {
        GroupPoint::new(
            self.horizontal.iter().map(|v| alpha * v).collect(),
            alpha * alpha * self.vertical,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.vertical.is_finite() && self.horizontal.iter().all(|v| v.is_finite())
    }
}
