//! Spectral dynamics of the infinite dihedral group `D∞ = ⟨a, t⟩` with
//! `a = σ`, `t = (a, t)`.
//!
//! The pencil `z0 + z1·a + z2·t + z3·at` satisfies
//! `det A_{n+1}(z) = det A_n(F(z))` for the quadratic map
//! `F = (z0² − z1², z0z2 − z1z3, z0z2 − z1z3, z2² − z3²)`, and
//! `τ(z) = (z0² + z3² − z1² − z2²) / 2(z1z2 − z0z3)` semi-conjugates `F` to
//! `T(x) = 2x² − 1`. The Julia set of `F` is the set of points with
//! `τ ∈ [−1, 1]` together with the indeterminacy set `E`.

use std::fmt;

use num_complex::Complex64;

use crate::cheb::{band_distance, is_infinite, on_band, t_scaled};
use crate::error::{Error, Result};
use crate::projgeom::{normalize, HomogMap, MapImage, PencilPoint};
use crate::scaled::ScaledValue;
use crate::selfsim::{GroupWord, PencilTemplate, WreathSpec};
use crate::tol::Tolerances;

pub const RULES: &str = "a = s\nt = (a, t)";

pub fn wreath_spec() -> WreathSpec {
    WreathSpec::parse(RULES).expect("built-in recursion is valid")
}

/// `z0·e + z1·a + z2·t + z3·at`.
pub fn pencil_template() -> PencilTemplate {
    PencilTemplate::new(vec![
        (0, GroupWord::identity()),
        (1, GroupWord::letter("a")),
        (2, GroupWord::letter("t")),
        (3, GroupWord::parse("a t").expect("valid word")),
    ])
}

pub fn f_map() -> HomogMap {
    HomogMap::from_terms(&[
        (0, 0, 0, 1.0),
        (0, 1, 1, -1.0),
        (1, 0, 2, 1.0),
        (1, 1, 3, -1.0),
        (2, 0, 2, 1.0),
        (2, 1, 3, -1.0),
        (3, 2, 2, 1.0),
        (3, 3, 3, -1.0),
    ])
}

/// Lift of `F` evaluated directly.
pub fn f_dihedral(z: &PencilPoint) -> [Complex64; 4] {
    let [z0, z1, z2, z3] = z.coords();
    let mid = z0 * z2 - z1 * z3;
    [z0 * z0 - z1 * z1, mid, mid, z2 * z2 - z3 * z3]
}

/// `z0² + z3² − z1² − z2²`.
fn quadric_n(c: &[Complex64; 4]) -> Complex64 {
    c[0] * c[0] + c[3] * c[3] - c[1] * c[1] - c[2] * c[2]
}

/// `z1z2 − z0z3`.
fn quadric_d(c: &[Complex64; 4]) -> Complex64 {
    c[1] * c[2] - c[0] * c[3]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tau {
    Finite(Complex64),
    /// Denominator zero, numerator not.
    Infinity,
    UndefinedOnE,
}

impl Tau {
    pub fn value(&self) -> Option<Complex64> {
        match self {
            Tau::Finite(t) => Some(*t),
            _ => None,
        }
    }
}

/// Both quadric residuals `(|z0z3 − z1z2|, |z0² + z3² − z1² − z2²|)` on the
/// normalized representative.
pub fn e_residuals(z: &PencilPoint) -> (f64, f64) {
    let c = z.chart_coords();
    (quadric_d(&c).norm(), quadric_n(&c).norm())
}

pub fn in_e(z: &PencilPoint, eps_e: f64) -> bool {
    let (d, n) = e_residuals(z);
    d < eps_e && n < eps_e
}

pub fn tau(z: &PencilPoint) -> Tau {
    tau_with(z, Tolerances::default().eps_e)
}

pub fn tau_with(z: &PencilPoint, eps_e: f64) -> Tau {
    if in_e(z, eps_e) {
        return Tau::UndefinedOnE;
    }
    let c = z.chart_coords();
    let d = quadric_d(&c);
    if d.re == 0.0 && d.im == 0.0 {
        return Tau::Infinity;
    }
    let t = quadric_n(&c) / (2.0 * d);
    if is_infinite(t) || t.re.is_nan() || t.im.is_nan() {
        Tau::Infinity
    } else {
        Tau::Finite(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DihedralTag {
    Resolvent,
    SpectrumBand,
    ExtendedIndeterminacy,
}

impl DihedralTag {
    pub fn code(&self) -> u8 {
        match self {
            DihedralTag::Resolvent => 0,
            DihedralTag::SpectrumBand => 1,
            DihedralTag::ExtendedIndeterminacy => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DihedralTag::Resolvent => "Resolvent",
            DihedralTag::SpectrumBand => "SpectrumBand",
            DihedralTag::ExtendedIndeterminacy => "ExtendedIndeterminacy",
        }
    }

    pub fn in_julia(&self) -> bool {
        !matches!(self, DihedralTag::Resolvent)
    }
}

impl fmt::Display for DihedralTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DihedralVerdict {
    pub tag: DihedralTag,
    pub tau: Tau,
    /// Distance of `τ` to `[−1, 1]`, or the larger quadric residual on `E`.
    pub margin: f64,
}

pub fn classify(z: &PencilPoint) -> DihedralVerdict {
    classify_with(z, &Tolerances::default())
}

pub fn classify_with(z: &PencilPoint, tol: &Tolerances) -> DihedralVerdict {
    let t = tau_with(z, tol.eps_e);
    match t {
        Tau::UndefinedOnE => {
            let (d, n) = e_residuals(z);
            DihedralVerdict {
                tag: DihedralTag::ExtendedIndeterminacy,
                tau: t,
                margin: d.max(n),
            }
        }
        Tau::Infinity => DihedralVerdict {
            tag: DihedralTag::Resolvent,
            tau: t,
            margin: f64::INFINITY,
        },
        Tau::Finite(x) => DihedralVerdict {
            tag: if on_band(x, tol.eps_band) {
                DihedralTag::SpectrumBand
            } else {
                DihedralTag::Resolvent
            },
            tau: t,
            margin: band_distance(x),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndeterminacyLevel {
    /// `[1:1:ζ:ζ]` or `[1:−1:ζ:−ζ]`.
    I1,
    /// `[1:ζ:1:ζ]` or `[1:ζ:−1:−ζ]`, not in `I1`.
    I2Only,
    NotInE,
}

pub fn indeterminacy_level(z: &PencilPoint) -> IndeterminacyLevel {
    indeterminacy_level_with(z, Tolerances::default().eps_e)
}

pub fn indeterminacy_level_with(z: &PencilPoint, eps: f64) -> IndeterminacyLevel {
    let c = z.chart_coords();
    let pair = |a: Complex64, b: Complex64| a.norm() < eps && b.norm() < eps;
    if pair(c[0] - c[1], c[2] - c[3]) || pair(c[0] + c[1], c[2] + c[3]) {
        IndeterminacyLevel::I1
    } else if pair(c[0] - c[2], c[1] - c[3]) || pair(c[0] + c[2], c[1] + c[3]) {
        IndeterminacyLevel::I2Only
    } else {
        IndeterminacyLevel::NotInE
    }
}

/// `Fⁿ(z)` for `n ≥ 2` from the closed form in `τ`.
///
/// Off the quadric `z1z2 = z0z3` the components are, up to the common factor
/// `(z1z2 − z0z3)^{2^{n−1}}`,
/// `K·(z0² − z1²)/D − S`, `K·(z0z2 − z1z3)/D` (twice) and `K·(z2² − z3²)/D + S`
/// with `D = z1z2 − z0z3`, `K = 2^{n−1} ∏_{k<n−1} T^k(τ)` and `S = K·f_{n−2}`
/// expanded so that no division by a `T^k(τ)` occurs. On the quadric every
/// iterate is a power of `z0² − z1² + z3² − z2²` times `F(z)`.
pub fn fn_closed(z: &PencilPoint, n: usize) -> Result<MapImage> {
    fn_closed_with(z, n, Tolerances::default().eps_e)
}

pub fn fn_closed_with(z: &PencilPoint, n: usize, eps_e: f64) -> Result<MapImage> {
    if n < 2 {
        return Err(Error::Validation(format!(
            "closed form needs at least two iterates, got {n}"
        )));
    }
    let Some(p) = z.normalized() else {
        return Ok(MapImage::Indeterminate);
    };
    let c = p.coords();
    let d = quadric_d(&c);
    if d.norm() < eps_e {
        if quadric_n(&c).norm() < eps_e {
            return Ok(MapImage::Indeterminate);
        }
        return Ok(image_of(normalize(f_dihedral(&p.as_pencil()))));
    }
    let m = n - 2;
    let tau = ScaledValue::from_complex(quadric_n(&c) / (2.0 * d));
    let mut iterates = Vec::with_capacity(m + 1);
    let mut t = tau;
    for _ in 0..=m {
        iterates.push(t);
        t = t_scaled(t);
    }
    // tail[k] = ∏_{j=k}^{m} T^j(τ), tail[m+1] = 1
    let mut tail = vec![ScaledValue::ONE; m + 2];
    for k in (0..=m).rev() {
        tail[k] = tail[k + 1] * iterates[k];
    }
    let two = ScaledValue::from_real(2.0);
    let k_factor = two.powu(m as u64 + 1) * tail[0];
    let mut s = ScaledValue::ZERO;
    for (k, t) in tail.iter().enumerate().skip(1) {
        s = s + two.powu((m + 1 - k) as u64) * *t;
    }
    let inv_d = ScaledValue::from_complex(d).recip();
    let kd = k_factor * inv_d;
    let mid = kd.scale(c[0] * c[2] - c[1] * c[3]);
    let comps = [
        kd.scale(c[0] * c[0] - c[1] * c[1]) - s,
        mid,
        mid,
        kd.scale(c[2] * c[2] - c[3] * c[3]) + s,
    ];
    Ok(normalize_scaled(&comps))
}

fn image_of(p: Option<crate::projgeom::ProjPoint>) -> MapImage {
    match p {
        Some(p) => MapImage::Point(p),
        None => MapImage::Indeterminate,
    }
}

/// Projective point of a vector of scaled components.
pub(crate) fn normalize_scaled(comps: &[ScaledValue; 4]) -> MapImage {
    let Some(big) = comps
        .iter()
        .filter(|c| !c.is_zero())
        .copied()
        .reduce(|a, b| if b.abs_ratio(&a) > 1.0 { b } else { a })
    else {
        return MapImage::Indeterminate;
    };
    image_of(normalize(comps.map(|c| c.ratio(&big))))
}

/// Partial sum `f_n = Σ_{k=1}^{n+1} 1 / (2^k ∏_{j<k} T^j(τ))` at `τ = τ(z)`.
///
/// `τ = ∞` gives `0`; on `E` the sum is undefined.
pub fn f_partial(z: &PencilPoint, n: usize) -> Result<Complex64> {
    f_partial_with(z, n, &Tolerances::default())
}

pub fn f_partial_with(z: &PencilPoint, n: usize, tol: &Tolerances) -> Result<Complex64> {
    match tau_with(z, tol.eps_e) {
        Tau::UndefinedOnE => Err(Error::UndefinedOnE),
        Tau::Infinity => Ok(Complex64::new(0.0, 0.0)),
        Tau::Finite(t) => Ok(f_partial_tau(t, n, tol.eps_band)),
    }
}

/// Like [`f_partial_with`] but rejects `τ` on the band, where the partial
/// sums do not converge.
pub fn f_partial_strict(z: &PencilPoint, n: usize, tol: &Tolerances) -> Result<Complex64> {
    if let Tau::Finite(t) = tau_with(z, tol.eps_e) {
        if on_band(t, tol.eps_band) {
            return Err(Error::Band { re: t.re, im: t.im });
        }
    }
    f_partial_with(z, n, tol)
}

/// The partial sum as a function of `τ`.
///
/// On the band `τ` is taken as real and `T^j(τ)` is evaluated as
/// `cos(2^j w)` with `w = acos τ`: the recurrence loses all accuracy there
/// after a few dozen steps.
pub fn f_partial_tau(tau: Complex64, n: usize, eps_band: f64) -> Complex64 {
    let angle = on_band(tau, eps_band).then(|| Complex64::new(tau.re.clamp(-1.0, 1.0).acos(), 0.0));
    let mut sum = Complex64::new(0.0, 0.0);
    let mut prod = Complex64::new(1.0, 0.0);
    let mut t = tau;
    let mut scale = 1.0;
    for _ in 0..=n {
        let tj = match angle {
            Some(w) => (w * scale).cos(),
            None => t,
        };
        if is_infinite(tj) {
            break;
        }
        prod *= 2.0 * tj;
        let term = prod.inv();
        if !(term.re.is_finite() && term.im.is_finite()) {
            break;
        }
        sum += term;
        scale *= 2.0;
        if angle.is_none() {
            t = crate::cheb::t_iter(t, 1);
        }
    }
    sum
}

/// `lim f_n = τ − i√(1 − τ²)` with the square-root branch chosen to agree
/// with the partial sums.
pub fn f_limit(z: &PencilPoint) -> Result<Complex64> {
    f_limit_with(z, &Tolerances::default())
}

pub fn f_limit_with(z: &PencilPoint, tol: &Tolerances) -> Result<Complex64> {
    let t = match tau_with(z, tol.eps_e) {
        Tau::UndefinedOnE => return Err(Error::UndefinedOnE),
        Tau::Infinity => return Ok(Complex64::new(0.0, 0.0)),
        Tau::Finite(t) => t,
    };
    if on_band(t, tol.eps_band) {
        return Err(Error::Band { re: t.re, im: t.im });
    }
    // The two candidates τ ± i√(1 − τ²) multiply to 1; take the larger one
    // directly and the smaller as its reciprocal to avoid cancellation.
    let r = Complex64::i() * (1.0 - t * t).sqrt();
    let (a, b) = (t + r, t - r);
    let big = if a.norm() >= b.norm() { a } else { b };
    let small = big.inv();
    let series = f_partial_tau(t, 60, tol.eps_band);
    Ok(if (small - series).norm() <= (big - series).norm() {
        small
    } else {
        big
    })
}

/// Determinant of the left-regular symbol
/// `[[z0 + z3 e^{iθ}, z1 + z2 e^{iθ}], [z1 + z2 e^{−iθ}, z0 + z3 e^{−iθ}]]`,
/// i.e. `z0² + z3² − z1² − z2² + 2cos θ·(z0z3 − z1z2)`.
///
/// It vanishes exactly when `cos θ = τ(z)`.
pub fn left_regular_symbol(z: &PencilPoint, theta: f64) -> Complex64 {
    let c = z.coords();
    quadric_n(&c) - 2.0 * theta.cos() * quadric_d(&c)
}
