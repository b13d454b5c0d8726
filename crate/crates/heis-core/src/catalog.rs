//! The rigid map catalog: left translations, unitary rotations, dilations,
//! and their compositions, with exact Jacobians and analytic horizontal
//! gradients. These are the maps H^n → H^n that survive every morphism check,
//! and they double as ground truth for the checkers' tolerances.

use crate::error::{HeisError, Result};
use crate::field::{GroupMap, ScalarField};
use crate::linalg::Matrix;
use crate::point::GroupPoint;

/// Unitarity / complex-structure tolerance for rotation matrices.
pub const ROTATION_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub enum CatalogMap {
    /// g ↦ b·g.
    Translation(GroupPoint),
    /// (z,t) ↦ (Az, t) for a real 2n×2n matrix representing a unitary on ℂ^n.
    Rotation { n: usize, matrix: Vec<f64> },
    /// δ_α(z,t) = (αz, α²t), α > 0.
    Dilation { n: usize, alpha: f64 },
    /// Composition applied left to right: [f, g] means g(f(·)).
    Composition(Vec<CatalogMap>),
}

impl CatalogMap {
    pub fn identity(n: usize) -> Self {
        CatalogMap::Dilation { n, alpha: 1.0 }
    }

    /// Block-diagonal rotation acting as e^{iθ_j} on each complex coordinate.
    pub fn rotation_from_angles(angles: &[f64]) -> Self {
        let n = angles.len();
        let mut matrix = vec![0.0; 4 * n * n];
        let dim = 2 * n;
        for (j, th) in angles.iter().enumerate() {
            let (s, c) = th.sin_cos();
            matrix[(2 * j) * dim + 2 * j] = c;
            matrix[(2 * j) * dim + 2 * j + 1] = -s;
            matrix[(2 * j + 1) * dim + 2 * j] = s;
            matrix[(2 * j + 1) * dim + 2 * j + 1] = c;
        }
        CatalogMap::Rotation { n, matrix }
    }

    pub fn dim(&self) -> usize {
        match self {
            CatalogMap::Translation(b) => b.n(),
            CatalogMap::Rotation { n, .. } => *n,
            CatalogMap::Dilation { n, .. } => *n,
            CatalogMap::Composition(parts) => parts.first().map_or(0, CatalogMap::dim),
        }
    }

    /// Checks the structural invariants: AᵀA = I and AJ = JA for rotations,
    /// α > 0 for dilations, equal dimensions along compositions.
    pub fn validate(&self) -> Result<()> {
        match self {
            CatalogMap::Translation(b) => {
                if !b.is_finite() {
                    return Err(HeisError::InvalidCatalog(
                        "translation offset has non-finite coordinates".into(),
                    ));
                }
                Ok(())
            }
            CatalogMap::Dilation { alpha, .. } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return Err(HeisError::InvalidCatalog(format!(
                        "dilation factor must be positive, got {alpha}"
                    )));
                }
                Ok(())
            }
            CatalogMap::Rotation { n, matrix } => {
                let dim = 2 * n;
                if matrix.len() != dim * dim {
                    return Err(HeisError::InvalidCatalog(format!(
                        "rotation matrix must be {dim}x{dim}"
                    )));
                }
                let a = Matrix {
                    rows: dim,
                    cols: dim,
                    data: matrix.clone(),
                };
                let ortho = a.transpose().matmul(&a).max_abs_diff(&Matrix::identity(dim));
                if ortho > ROTATION_TOL {
                    return Err(HeisError::InvalidCatalog(format!(
                        "rotation matrix is not orthogonal (residual {ortho:.3e})"
                    )));
                }
                let j = complex_structure(*n);
                let comm = a.matmul(&j).max_abs_diff(&j.matmul(&a));
                if comm > ROTATION_TOL {
                    return Err(HeisError::InvalidCatalog(format!(
                        "rotation matrix does not commute with the complex structure (residual {comm:.3e})"
                    )));
                }
                Ok(())
            }
            CatalogMap::Composition(parts) => {
                if parts.is_empty() {
                    return Err(HeisError::InvalidCatalog("empty composition".into()));
                }
                let n = parts[0].dim();
                for p in parts {
                    p.validate()?;
                    if p.dim() != n {
                        return Err(HeisError::DimensionMismatch {
                            expected: n,
                            got: p.dim(),
                        });
                    }
                }
                Ok(())
            }
        }
    }

    pub fn apply(&self, g: &GroupPoint) -> Result<GroupPoint> {
        match self {
            CatalogMap::Translation(b) => b.mul(g),
            CatalogMap::Dilation { n, alpha } => {
                check_dim(*n, g)?;
                Ok(g.dilate(*alpha))
            }
            CatalogMap::Rotation { n, matrix } => {
                check_dim(*n, g)?;
                let dim = 2 * n;
                let mut h = vec![0.0; dim];
                for i in 0..dim {
                    let mut acc = 0.0;
                    for k in 0..dim {
                        acc += matrix[i * dim + k] * g.horizontal()[k];
                    }
                    h[i] = acc;
                }
                Ok(GroupPoint::new(h, g.vertical()))
            }
            CatalogMap::Composition(parts) => {
                let mut out = g.clone();
                for p in parts {
                    out = p.apply(&out)?;
                }
                Ok(out)
            }
        }
    }

    /// Full Euclidean differential as a (2n+1)×(2n+1) matrix at g.
    /// Catalog maps are affine, so these are exact; compositions chain.
    pub fn euclidean_jacobian(&self, g: &GroupPoint) -> Result<Matrix> {
        let n = self.dim();
        let dim = 2 * n + 1;
        match self {
            CatalogMap::Translation(b) => {
                check_dim(n, g)?;
                let mut m = Matrix::identity(dim);
                for j in 0..n {
                    m.set(dim - 1, 2 * j, 2.0 * b.y(j));
                    m.set(dim - 1, 2 * j + 1, -2.0 * b.x(j));
                }
                Ok(m)
            }
            CatalogMap::Dilation { alpha, .. } => {
                check_dim(n, g)?;
                let mut m = Matrix::identity(dim);
                for k in 0..2 * n {
                    m.set(k, k, *alpha);
                }
                m.set(dim - 1, dim - 1, alpha * alpha);
                Ok(m)
            }
            CatalogMap::Rotation { matrix, .. } => {
                check_dim(n, g)?;
                let mut m = Matrix::identity(dim);
                for i in 0..2 * n {
                    for j in 0..2 * n {
                        m.set(i, j, matrix[i * 2 * n + j]);
                    }
                }
                Ok(m)
            }
            CatalogMap::Composition(parts) => {
                let mut jac = Matrix::identity(dim);
                let mut point = g.clone();
                for p in parts {
                    jac = p.euclidean_jacobian(&point)?.matmul(&jac);
                    point = p.apply(&point)?;
                }
                Ok(jac)
            }
        }
    }

    /// Horizontal differential M[i][d] = X_d f_i as a (2n+1)×2n matrix at g,
    /// derived from the Euclidean one by X_d = ∂_d + (±2 y/x)·∂_t.
    pub fn horizontal_differential(&self, g: &GroupPoint) -> Result<Matrix> {
        let n = self.dim();
        let jac = self.euclidean_jacobian(g)?;
        let mut m = Matrix::zeros(2 * n + 1, 2 * n);
        for i in 0..2 * n + 1 {
            for d in 0..2 * n {
                let twist = if d % 2 == 0 {
                    2.0 * g.y(d / 2)
                } else {
                    -2.0 * g.x(d / 2)
                };
                m.set(i, d, jac.get(i, d) + twist * jac.get(i, 2 * n));
            }
        }
        Ok(m)
    }

    /// Converts to a [`GroupMap`] with analytic horizontal gradients attached
    /// to every component.
    pub fn to_group_map(&self) -> Result<GroupMap> {
        self.validate()?;
        let n = self.dim();
        let mut comps = Vec::with_capacity(2 * n + 1);
        for i in 0..2 * n + 1 {
            let map_eval = self.clone();
            let map_grad = self.clone();
            let field = ScalarField::new(n, move |g: &GroupPoint| {
                let image = map_eval.apply(g).expect("dimension checked at build");
                if i < 2 * n {
                    image.horizontal()[i]
                } else {
                    image.vertical()
                }
            })
            .with_gradient(move |g: &GroupPoint| {
                let m = map_grad
                    .horizontal_differential(g)
                    .expect("dimension checked at build");
                (0..2 * n).map(|d| m.get(i, d)).collect()
            });
            comps.push(field);
        }
        GroupMap::from_components(n, comps)
    }

    /// Parses a catalog id: `identity`, `dilation:<α>`,
    /// `translation:<x1>,<y1>,…,<t>`, `rotation:<θ1>,…,<θn>`,
    /// `compose:<id>;<id>;…` (not nested).
    pub fn parse(id: &str, n: usize) -> Result<Self> {
        let bad = |msg: &str| HeisError::BadMapId(id.to_string(), msg.to_string());
        let map = if id == "identity" {
            CatalogMap::identity(n)
        } else if let Some(rest) = id.strip_prefix("dilation:") {
            let alpha: f64 = rest.trim().parse().map_err(|_| bad("bad dilation factor"))?;
            CatalogMap::Dilation { n, alpha }
        } else if let Some(rest) = id.strip_prefix("translation:") {
            let coords = parse_f64_list(rest).ok_or_else(|| bad("bad coordinate list"))?;
            if coords.len() != 2 * n + 1 {
                return Err(bad(&format!("translation needs {} coordinates", 2 * n + 1)));
            }
            CatalogMap::Translation(GroupPoint::from_coords(&coords))
        } else if let Some(rest) = id.strip_prefix("rotation:") {
            let angles = parse_f64_list(rest).ok_or_else(|| bad("bad angle list"))?;
            if angles.len() != n {
                return Err(bad(&format!("rotation needs {n} angles")));
            }
            CatalogMap::rotation_from_angles(&angles)
        } else if let Some(rest) = id.strip_prefix("compose:") {
            let parts: Result<Vec<CatalogMap>> =
                rest.split(';').map(|s| CatalogMap::parse(s.trim(), n)).collect();
            CatalogMap::Composition(parts?)
        } else {
            return Err(bad("unknown catalog map"));
        };
        map.validate()?;
        Ok(map)
    }
}

/// Resolves a CLI map id into a [`GroupMap`]: every catalog id plus the
/// shipped counterexamples `projection` (H^n → H^{n−1}) and `anisotropic`
/// ((2x, y, 2t) on H^1).
pub fn named_map(id: &str, n: usize) -> Result<GroupMap> {
    match id {
        "projection" => GroupMap::projection(n),
        "anisotropic" => {
            if n != 1 {
                return Err(HeisError::BadMapId(
                    id.into(),
                    "the anisotropic counterexample lives on H^1".into(),
                ));
            }
            Ok(GroupMap::anisotropic())
        }
        _ => CatalogMap::parse(id, n)?.to_group_map(),
    }
}

fn check_dim(n: usize, g: &GroupPoint) -> Result<()> {
    if g.n() != n {
        return Err(HeisError::DimensionMismatch {
            expected: n,
            got: g.n(),
        });
    }
    Ok(())
}

fn parse_f64_list(s: &str) -> Option<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().ok())
        .collect()
}

/// The standard complex structure J on interleaved coordinates:
/// J e_{x_j} = e_{y_j}, J e_{y_j} = −e_{x_j}.
fn complex_structure(n: usize) -> Matrix {
    let mut j = Matrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j.set(2 * k, 2 * k + 1, -1.0);
        j.set(2 * k + 1, 2 * k, 1.0);
    }
    j
}
