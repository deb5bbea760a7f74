//! Chebyshev machinery: iterates of `T(z) = 2z² − 1`, second-kind
//! polynomials `U_n`, the bivariate `P_n(x, y) = (√y)ⁿ U_n(x / 2√y)` and the
//! lamplighter sequence `G_n`.
//!
//! Everything is evaluated by three-term recurrences carried in
//! [`ScaledValue`]s. Square-root closed forms only appear in the tests.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::projgeom::PencilPoint;
pub use crate::scaled::ScaledValue;

pub const EPS_BAND: f64 = 1e-9;

/// Value returned by [`t_iter`] once an orbit has escaped to infinity.
pub const C_INFINITY: Complex64 = Complex64::new(f64::INFINITY, 0.0);

/// Escaped orbits grow doubly exponentially; past this modulus the next
/// squaring overflows anyway.
const ESCAPE_RADIUS: f64 = 1e150;

pub fn is_infinite(z: Complex64) -> bool {
    z.re.is_infinite() || z.im.is_infinite()
}

/// `true` when `x` lies within `eps` of the real segment `[-1, 1]`.
pub fn on_band(x: Complex64, eps: f64) -> bool {
    x.im.abs() <= eps && x.re >= -1.0 - eps && x.re <= 1.0 + eps
}

/// Distance from `x` to the segment `[-1, 1]`.
pub fn band_distance(x: Complex64) -> f64 {
    if is_infinite(x) {
        return f64::INFINITY;
    }
    let dr = (x.re.abs() - 1.0).max(0.0);
    dr.hypot(x.im)
}

/// `n`-fold composition of `T(z) = 2z² − 1`.
///
/// Orbits that leave every bounded set return [`C_INFINITY`].
pub fn t_iter(x: Complex64, n: usize) -> Complex64 {
    let mut z = x;
    for _ in 0..n {
        if z.norm() > ESCAPE_RADIUS {
            return C_INFINITY;
        }
        z = 2.0 * z * z - 1.0;
    }
    if z.re.is_finite() && z.im.is_finite() {
        z
    } else {
        C_INFINITY
    }
}

/// `T` applied to a scaled value.
pub fn t_scaled(x: ScaledValue) -> ScaledValue {
    ScaledValue::from_real(2.0) * x * x - ScaledValue::ONE
}

/// Runs `p_{k+1} = a·p_k − b·p_{k−1}` from `(p_{-1}, p_0)` and returns `p_0 ..= p_n`.
fn three_term(
    n: usize,
    a: ScaledValue,
    b: ScaledValue,
    p_minus1: ScaledValue,
    p0: ScaledValue,
) -> Vec<ScaledValue> {
    let mut out = Vec::with_capacity(n + 1);
    let (mut prev, mut cur) = (p_minus1, p0);
    out.push(cur);
    for _ in 0..n {
        let next = a * cur - b * prev;
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// `U_n(x)` as a scaled value.
pub fn u_scaled(n: usize, x: Complex64) -> ScaledValue {
    *u_sequence(n, x).last().unwrap()
}

/// `U_0(x) ..= U_n(x)`.
pub fn u_sequence(n: usize, x: Complex64) -> Vec<ScaledValue> {
    // U_{-1} = 0, U_0 = 1, U_{k+1} = 2x U_k − U_{k−1}
    three_term(
        n,
        ScaledValue::from_complex(2.0 * x),
        ScaledValue::ONE,
        ScaledValue::ZERO,
        ScaledValue::ONE,
    )
}

/// Chebyshev polynomial of the second kind, `U_n(x)`.
pub fn u(n: usize, x: Complex64) -> Complex64 {
    u_scaled(n, x).to_complex()
}

/// The `n` zeros `cos(kπ/(n+1))` of `U_n`, ascending.
///
/// Written as `sin(π(2k − n − 1) / (2(n + 1)))` so the set is exactly
/// symmetric and the middle zero of odd `n` is exactly `0`.
pub fn u_zeros(n: usize) -> Vec<f64> {
    let denom = 2.0 * (n as f64 + 1.0);
    (1..=n)
        .map(|k| {
            let num = 2.0 * k as f64 - n as f64 - 1.0;
            (std::f64::consts::PI * num / denom).sin()
        })
        .collect()
}

/// `lim U_n(x) / U_{n+1}(x) = x − √(x² − 1)` on the branch of modulus `< 1`.
///
/// Computed as the reciprocal of the root of `r² − 2xr + 1` with modulus
/// `> 1`, which avoids the cancellation in `x − √(x² − 1)` for large `x`.
pub fn ratio_limit(x: Complex64) -> Result<Complex64> {
    ratio_limit_with(x, EPS_BAND)
}

pub fn ratio_limit_with(x: Complex64, eps_band: f64) -> Result<Complex64> {
    if on_band(x, eps_band) {
        return Err(Error::Band { re: x.re, im: x.im });
    }
    let root = (x * x - 1.0).sqrt();
    let (a, b) = (x + root, x - root);
    let big = if a.norm() >= b.norm() { a } else { b };
    Ok(big.inv())
}

/// `P_0(x, y) ..= P_n(x, y)` from `P_{k+1} = x P_k − y P_{k−1}`, `P_{-1} = 0`, `P_0 = 1`.
pub fn p_sequence(n: usize, x: Complex64, y: Complex64) -> Vec<ScaledValue> {
    three_term(
        n,
        ScaledValue::from_complex(x),
        ScaledValue::from_complex(y),
        ScaledValue::ZERO,
        ScaledValue::ONE,
    )
}

/// Homogeneous bivariate Chebyshev polynomial `P_n(x, y)`.
pub fn p(n: usize, x: Complex64, y: Complex64) -> ScaledValue {
    *p_sequence(n, x, y).last().unwrap()
}

/// `G_0(z) ..= G_n(z)` from `G_{k+1} = (z0 + z1) G_k − 4 z2 z3 G_{k−1}`,
/// `G_{-1} = 1`, `G_0 = z0 − z1`.
pub fn g_sequence(n: usize, z: &PencilPoint) -> Vec<ScaledValue> {
    let s = z[0] + z[1];
    let q = 4.0 * z[2] * z[3];
    three_term(
        n,
        ScaledValue::from_complex(s),
        ScaledValue::from_complex(q),
        ScaledValue::ONE,
        ScaledValue::from_complex(z[0] - z[1]),
    )
}

pub fn g(n: usize, z: &PencilPoint) -> ScaledValue {
    *g_sequence(n, z).last().unwrap()
}
