//! Scalar fields on H^n, maps between Heisenberg groups, and derivatives
//! along the left-invariant horizontal frame.
//!
//! Derivatives are taken along group flows: the flow of X_i for time h is
//! right multiplication by the point with x_i = h and every other coordinate
//! zero (Y_i analogously with y_i = h). Because the frame is left invariant
//! the flow is exact, so the central stencil is O(h²) with no cross terms.
//! Directions are indexed 0..2n in the order (X_1, Y_1, …, X_n, Y_n).

use std::fmt;
use std::sync::Arc;

use crate::error::{HeisError, Result};
use crate::point::GroupPoint;

pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// g · e_dir(h): the time-h group flow of the dir-th horizontal field.
pub fn flow(g: &GroupPoint, dir: usize, h: f64) -> Result<GroupPoint> {
    let n = g.n();
    if dir >= 2 * n {
        return Err(HeisError::InvalidDirection { dir, n });
    }
    let mut horizontal = g.horizontal().to_vec();
    horizontal[dir] += h;
    let j = dir / 2;
    let vertical = if dir.is_multiple_of(2) {
        g.vertical() + 2.0 * g.y(j) * h
    } else {
        g.vertical() - 2.0 * g.x(j) * h
    };
    Ok(GroupPoint::new(horizontal, vertical))
}

type EvalFn = dyn Fn(&GroupPoint) -> f64 + Send + Sync;
type GradFn = dyn Fn(&GroupPoint) -> Vec<f64> + Send + Sync;

/// A real-valued field on H^n with an optional analytic horizontal gradient.
///
/// Evaluators must be pure: they are called concurrently from worker threads.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    eval: Arc<EvalFn>,
    gradient: Option<Arc<GradFn>>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&GroupPoint) -> f64 + Send + Sync + 'static,
    {
        Self {
            dim,
            eval: Arc::new(eval),
            gradient: None,
        }
    }

    /// Attaches an analytic horizontal gradient (X_1 u, Y_1 u, …, Y_n u).
    pub fn with_gradient<G>(mut self, gradient: G) -> Self
    where
        G: Fn(&GroupPoint) -> Vec<f64> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new(dim, move |_| c).with_gradient(move |g: &GroupPoint| vec![0.0; 2 * g.n()])
    }

    /// The horizontal coordinate field with interleaved index `idx` (0..2n).
    pub fn coordinate(dim: usize, idx: usize) -> Self {
        assert!(idx < 2 * dim);
        Self::new(dim, move |g: &GroupPoint| g.horizontal()[idx]).with_gradient(
            move |g: &GroupPoint| {
                let mut grad = vec![0.0; 2 * g.n()];
                grad[idx] = 1.0;
                grad
            },
        )
    }

    /// The vertical coordinate field t; ∇_H t = (2y_1, −2x_1, …, −2x_n).
    pub fn vertical_coordinate(dim: usize) -> Self {
        Self::new(dim, |g: &GroupPoint| g.vertical()).with_gradient(|g: &GroupPoint| {
            let mut grad = vec![0.0; 2 * g.n()];
            for j in 0..g.n() {
                grad[2 * j] = 2.0 * g.y(j);
                grad[2 * j + 1] = -2.0 * g.x(j);
            }
            grad
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, g: &GroupPoint) -> f64 {
        (self.eval)(g)
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    /// Central difference along the dir-th group flow, always by stencil.
    pub fn fd_derivative(&self, g: &GroupPoint, dir: usize, step: f64) -> Result<f64> {
        if step <= 0.0 {
            return Err(HeisError::NonpositiveStep(step));
        }
        let fwd = self.eval(&flow(g, dir, step)?);
        let bwd = self.eval(&flow(g, dir, -step)?);
        Ok((fwd - bwd) / (2.0 * step))
    }

    /// Derivative along the dir-th field; analytic value when one is attached.
    pub fn derivative(&self, g: &GroupPoint, dir: usize, step: f64) -> Result<f64> {
        if let Some(grad) = &self.gradient {
            if dir >= 2 * g.n() {
                return Err(HeisError::InvalidDirection { dir, n: g.n() });
            }
            if step <= 0.0 {
                return Err(HeisError::NonpositiveStep(step));
            }
            return Ok(grad(g)[dir]);
        }
        self.fd_derivative(g, dir, step)
    }

    /// Stencil gradient over all 2n directions, ordered (X_1, Y_1, …, Y_n).
    pub fn fd_gradient(&self, g: &GroupPoint, step: f64) -> Result<Vec<f64>> {
        (0..2 * g.n())
            .map(|dir| self.fd_derivative(g, dir, step))
            .collect()
    }

    /// Horizontal gradient; analytic when attached, stencil otherwise.
    pub fn gradient(&self, g: &GroupPoint, step: f64) -> Result<Vec<f64>> {
        if let Some(grad) = &self.gradient {
            if step <= 0.0 {
                return Err(HeisError::NonpositiveStep(step));
            }
            return Ok(grad(g));
        }
        self.fd_gradient(g, step)
    }

    /// Sub-Laplacian Δ_H u = Σ_j (X_j² + Y_j²) u by the symmetric three-point
    /// stencil along each group flow.
    pub fn sub_laplacian(&self, g: &GroupPoint, step: f64) -> Result<f64> {
        if step <= 0.0 {
            return Err(HeisError::NonpositiveStep(step));
        }
        let center = self.eval(g);
        let mut acc = 0.0;
        for dir in 0..2 * g.n() {
            let fwd = self.eval(&flow(g, dir, step)?);
            let bwd = self.eval(&flow(g, dir, -step)?);
            acc += fwd - 2.0 * center + bwd;
        }
        Ok(acc / (step * step))
    }

    /// Max |analytic − stencil| gradient component over the sample points;
    /// `None` when no analytic gradient is attached.
    pub fn gradient_consistency(
        &self,
        points: &[GroupPoint],
        step: f64,
    ) -> Result<Option<f64>> {
        if self.gradient.is_none() {
            return Ok(None);
        }
        let mut worst: f64 = 0.0;
        for g in points {
            let ana = self.gradient(g, step)?;
            let fd = self.fd_gradient(g, step)?;
            for (a, b) in ana.iter().zip(&fd) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok(Some(worst))
    }
}

/// A map U ⊂ H^n → H^p given by 2p+1 scalar components ordered
/// (u_1, v_1, …, u_p, v_p, h).
#[derive(Clone, Debug)]
pub struct GroupMap {
    source: usize,
    target: usize,
    components: Vec<ScalarField>,
}

impl GroupMap {
    pub fn from_components(source: usize, components: Vec<ScalarField>) -> Result<Self> {
        if components.len().is_multiple_of(2) || components.is_empty() {
            return Err(HeisError::InvalidCatalog(format!(
                "a map into H^p needs 2p+1 components, got {}",
                components.len()
            )));
        }
        for c in &components {
            if c.dim() != source {
                return Err(HeisError::DimensionMismatch {
                    expected: source,
                    got: c.dim(),
                });
            }
        }
        let target = components.len() / 2;
        Ok(Self {
            source,
            target,
            components,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut comps: Vec<ScalarField> =
            (0..2 * n).map(|i| ScalarField::coordinate(n, i)).collect();
        comps.push(ScalarField::vertical_coordinate(n));
        Self::from_components(n, comps).expect("identity components are well formed")
    }

    /// The coordinate projection H^n → H^{n−1}, (z_1,…,z_n,t) ↦ (z_1,…,z_{n−1},t).
    /// Not a contact map: the vertical coordinate keeps the dropped pair's
    /// area contribution.
    pub fn projection(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(HeisError::InvalidCatalog(
                "projection needs source dimension n >= 2".into(),
            ));
        }
        let mut comps: Vec<ScalarField> = (0..2 * (n - 1))
            .map(|i| ScalarField::coordinate(n, i))
            .collect();
        comps.push(ScalarField::vertical_coordinate(n));
        Self::from_components(n, comps)
    }

    /// (x, y, t) ↦ (2x, y, 2t) on H^1: contact and harmonic but not
    /// horizontally conformal (gradient lengths 2 and 1).
    pub fn anisotropic() -> Self {
        let u = ScalarField::new(1, |g: &GroupPoint| 2.0 * g.x(0))
            .with_gradient(|_| vec![2.0, 0.0]);
        let v = ScalarField::coordinate(1, 1);
        let h = ScalarField::new(1, |g: &GroupPoint| 2.0 * g.vertical())
            .with_gradient(|g: &GroupPoint| vec![4.0 * g.y(0), -4.0 * g.x(0)]);
        Self::from_components(1, vec![u, v, h]).expect("anisotropic components are well formed")
    }

    pub fn source_dim(&self) -> usize {
        self.source
    }

    pub fn target_dim(&self) -> usize {
        self.target
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn has_analytic_gradients(&self) -> bool {
        self.components.iter().all(ScalarField::has_gradient)
    }

    pub fn apply(&self, g: &GroupPoint) -> Result<GroupPoint> {
        if g.n() != self.source {
            return Err(HeisError::DimensionMismatch {
                expected: self.source,
                got: g.n(),
            });
        }
        let mut coords: Vec<f64> = Vec::with_capacity(2 * self.target + 1);
        for c in &self.components {
            coords.push(c.eval(g));
        }
        Ok(GroupPoint::from_coords(&coords))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn x_derivative_of_x_is_one() {
        let u = ScalarField::new(1, |g: &GroupPoint| g.x(0));
        let g = GroupPoint::from_coords(&[0.7, -2.0, 5.0]);
        assert_abs_diff_eq!(
            u.fd_derivative(&g, 0, DEFAULT_FD_STEP).unwrap(),
            1.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn vertical_field_sees_the_frame_twist() {
        // X_1 t = 2y and Y_1 t = −2x by hand from the field formulas.
        let u = ScalarField::new(1, |g: &GroupPoint| g.vertical());
        let at_0_1 = GroupPoint::from_coords(&[0.0, 1.0, 0.0]);
        let at_1_0 = GroupPoint::from_coords(&[1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(u.fd_derivative(&at_0_1, 0, 1e-3).unwrap(), 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(u.fd_derivative(&at_1_0, 1, 1e-3).unwrap(), -2.0, epsilon = 1e-9);
    }

    #[test]
    fn gradient_of_vertical_coordinate() {
        let u = ScalarField::new(1, |g: &GroupPoint| g.vertical());
        let g = GroupPoint::from_coords(&[0.3, -0.9, 2.0]);
        let grad = u.fd_gradient(&g, 1e-3).unwrap();
        assert_abs_diff_eq!(grad[0], 2.0 * g.y(0), epsilon = 1e-9);
        assert_abs_diff_eq!(grad[1], -2.0 * g.x(0), epsilon = 1e-9);
        // Analytic route agrees.
        let v = ScalarField::vertical_coordinate(1);
        let ana = v.gradient(&g, 1e-3).unwrap();
        assert_abs_diff_eq!(ana[0], grad[0], epsilon = 1e-9);
        assert_abs_diff_eq!(ana[1], grad[1], epsilon = 1e-9);
    }

    #[test]
    fn scaled_coordinate_gradient_norm() {
        let alpha = 1.7;
        let u = ScalarField::new(1, move |g: &GroupPoint| alpha * g.x(0));
        let g = GroupPoint::from_coords(&[0.2, 0.4, -1.0]);
        let grad = u.fd_gradient(&g, 1e-3).unwrap();
        let norm_sq: f64 = grad.iter().map(|v| v * v).sum();
        assert_abs_diff_eq!(norm_sq, alpha * alpha, epsilon = 1e-9);
    }

    #[test]
    fn sub_laplacian_kills_linear_coordinates() {
        for n in [1usize, 2] {
            let g = GroupPoint::new(vec![0.4; 2 * n], -0.8);
            for idx in 0..2 * n {
                let u = ScalarField::coordinate(n, idx);
                assert!(u.sub_laplacian(&g, 1e-3).unwrap().abs() < 1e-7);
            }
            let t = ScalarField::vertical_coordinate(n);
            assert!(t.sub_laplacian(&g, 1e-3).unwrap().abs() < 1e-7);
        }
    }

    #[test]
    fn sub_laplacian_of_z_norm_squared_is_4n() {
        for n in [1usize, 3] {
            let u = ScalarField::new(n, |g: &GroupPoint| g.horizontal_norm_sq());
            let g = GroupPoint::new(vec![0.25; 2 * n], 1.0);
            assert_abs_diff_eq!(
                u.sub_laplacian(&g, 1e-3).unwrap(),
                4.0 * n as f64,
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn nonpositive_step_is_rejected() {
        let u = ScalarField::coordinate(1, 0);
        let g = GroupPoint::origin(1);
        assert!(u.fd_derivative(&g, 0, 0.0).is_err());
        assert!(u.sub_laplacian(&g, -1.0).is_err());
    }

    #[test]
    fn identity_map_applies() {
        let id = GroupMap::identity(2);
        let g = GroupPoint::from_coords(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(id.apply(&g).unwrap(), g);
    }

    #[test]
    fn projection_drops_last_pair() {
        let pr = GroupMap::projection(2).unwrap();
        let g = GroupPoint::from_coords(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(pr.apply(&g).unwrap().coords(), vec![1.0, 2.0, 5.0]);
        assert!(GroupMap::projection(1).is_err());
    }
}
