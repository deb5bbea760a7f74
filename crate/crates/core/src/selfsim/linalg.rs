//! Dense determinant and singular-value routines for level matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scaled::ScaledValue;

/// Relative pivot threshold below which a matrix is reported singular.
pub const EPS_PIVOT: f64 = 1e-12;

/// Result of a determinant evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetValue {
    Value(ScaledValue),
    /// A pivot fell below `EPS_PIVOT` times the largest entry.
    Singular,
}

impl DetValue {
    pub fn value(&self) -> Option<ScaledValue> {
        match self {
            DetValue::Value(v) => Some(*v),
            DetValue::Singular => None,
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, DetValue::Singular)
    }

    /// Relative deviation between two determinants. Two singular values
    /// agree; a singular and a regular value are maximally apart.
    pub fn deviation(&self, other: &DetValue) -> f64 {
        match (self, other) {
            (DetValue::Value(a), DetValue::Value(b)) => ScaledValue::rel_diff(a, b),
            (DetValue::Singular, DetValue::Singular) => 0.0,
            _ => 1.0,
        }
    }
}

/// Determinant by LU factorization with partial pivoting.
pub fn log_det(m: &DMatrix<Complex64>) -> DetValue {
    log_det_with(m, EPS_PIVOT)
}

pub fn log_det_with(m: &DMatrix<Complex64>, eps_pivot: f64) -> DetValue {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.nrows();
    if n == 0 {
        return DetValue::Value(ScaledValue::ONE);
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return DetValue::Singular;
    }
    let threshold = eps_pivot * scale;
    let mut a = m.clone();
    let mut det = ScaledValue::ONE;
    for k in 0..n {
        let (p, pivot_abs) = (k..n)
            .map(|i| (i, a[(i, k)].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs < threshold {
            return DetValue::Singular;
        }
        if p != k {
            a.swap_rows(p, k);
            det = -det;
        }
        let pivot = a[(k, k)];
        det = det * ScaledValue::from_complex(pivot);
        for i in k + 1..n {
            let factor = a[(i, k)] / pivot;
            if factor.re == 0.0 && factor.im == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let t = a[(k, j)];
                a[(i, j)] -= factor * t;
            }
        }
    }
    DetValue::Value(det)
}

/// Smallest singular value.
pub fn min_singular(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurReport {
    /// `det [[A, B], [C, D]]` computed directly.
    pub block: DetValue,
    /// `det(AD − CB)`.
    pub schur: DetValue,
    pub rel_deviation: f64,
    pub commutator: f64,
}

/// Compares `det [[A, B], [C, D]]` with `det(AD − CB)` for commuting `A`, `C`.
pub fn schur_det_check(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    c: &DMatrix<Complex64>,
    d: &DMatrix<Complex64>,
    tol: f64,
) -> Result<SchurReport> {
    let n = a.nrows();
    for (name, m) in [("A", a), ("B", b), ("C", c), ("D", d)] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension(format!(
                "block {name} is {}x{}, expected {n}x{n}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    let commutator = (a * c - c * a).norm();
    let scale = (a.norm() * c.norm()).max(1.0);
    if commutator > tol * scale {
        return Err(Error::Commutation {
            residual: commutator,
        });
    }
    let mut full = DMatrix::zeros(2 * n, 2 * n);
    full.view_mut((0, 0), (n, n)).copy_from(a);
    full.view_mut((0, n), (n, n)).copy_from(b);
    full.view_mut((n, 0), (n, n)).copy_from(c);
    full.view_mut((n, n), (n, n)).copy_from(d);
    let block = log_det(&full);
    let schur = log_det(&(a * d - c * b));
    Ok(SchurReport {
        block,
        schur,
        rel_deviation: block.deviation(&schur),
        commutator,
    })
}
