use super::{Matrix, MetricField, Vector};
use nalgebra::{Matrix2, Vector2};
use std::f64::consts::PI;

/// 2-torus whose lightlike directions are spanned by
/// `X₁ = −sin²(πx)∂x + ∂y` and `X₂ = ∂x + sin²(πy)∂y`.
///
/// The form is `−(σ¹⊗σ² + σ²⊗σ¹)` for the coframe dual to `(X₁, X₂)`, oriented by `X₁ + X₂`.
#[derive(Clone, Copy, Debug, Default)]
pub struct BoundaryTorus;

impl BoundaryTorus {
    pub fn frame(p: &Vector<2>) -> (Vector2<f64>, Vector2<f64>) {
        let sx = (PI * p[0]).sin();
        let sy = (PI * p[1]).sin();
        (Vector2::new(-sx * sx, 1.0), Vector2::new(1.0, sy * sy))
    }
}

impl MetricField<2> for BoundaryTorus {
    fn metric(&self, p: &Vector<2>) -> Matrix<2> {
        let (x1, x2) = Self::frame(p);
        let f = Matrix2::from_columns(&[x1, x2]);
        let s = f.try_inverse().expect("frame is never degenerate");
        let s1 = s.row(0).transpose();
        let s2 = s.row(1).transpose();
        -(s1 * s2.transpose() + s2 * s1.transpose())
    }

    fn orientation(&self, p: &Vector<2>) -> Vector<2> {
        let (x1, x2) = Self::frame(p);
        x1 + x2
    }

    fn temporal_covector(&self) -> [i64; 2] {
        [1, 2]
    }

    fn name(&self) -> String {
        "boundary2".into()
    }
}

pub fn make_boundary_2torus() -> BoundaryTorus {
    BoundaryTorus
}
