//! Spectral dynamics of the lamplighter group `⟨a, b⟩` with
//! `a = (a, b)σ`, `b = (a, b)`.
//!
//! For the pencil `z0 + z1·c + z2(a + b) + z3(a⁻¹ + b⁻¹)`, `c = a⁻¹b`, the
//! determinant recursion is driven by
//! `F = (z0² − z1² − 2z2z3, 2z2z3, z2(z0 − z1), z3(z0 − z1))`, which is
//! `(z0 − z1)` times a lift of the rational map `Q`. Along a `Q`-orbit only
//! `δ_k = z0^{(k)} − z1^{(k)}` moves; it is the ratio `G_k / G_{k−1}` of
//! the sequence `G_{k+1} = (z0 + z1)G_k − 4z2z3·G_{k−1}`.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cheb::g_sequence;
use crate::error::{Error, Result};
use crate::projgeom::{normalize, HomogMap, PencilPoint, ProjPoint, ScaledLift};
use crate::render::PlaneSpec;
use crate::scaled::ScaledValue;
use crate::selfsim::{GroupWord, PencilTemplate, WreathSpec};
use crate::tol::Tolerances;

pub const RULES: &str = "a = (a, b) s\nb = (a, b)";

pub fn wreath_spec() -> WreathSpec {
    WreathSpec::parse(RULES).expect("built-in recursion is valid")
}

/// `z0 + z1·a⁻¹b + z2(a + b) + z3(a⁻¹ + b⁻¹)`.
pub fn pencil_template() -> PencilTemplate {
    PencilTemplate::new(vec![
        (0, GroupWord::identity()),
        (1, GroupWord::parse("a^-1 b").expect("valid word")),
        (2, GroupWord::letter("a")),
        (2, GroupWord::letter("b")),
        (3, GroupWord::inverse_letter("a")),
        (3, GroupWord::inverse_letter("b")),
    ])
}

pub fn f_map() -> HomogMap {
    HomogMap::from_terms(&[
        (0, 0, 0, 1.0),
        (0, 1, 1, -1.0),
        (0, 2, 3, -2.0),
        (1, 2, 3, 2.0),
        (2, 0, 2, 1.0),
        (2, 1, 2, -1.0),
        (3, 0, 3, 1.0),
        (3, 1, 3, -1.0),
    ])
}

pub fn f_lamp(z: &PencilPoint) -> [Complex64; 4] {
    let [z0, z1, z2, z3] = z.coords();
    let p = 2.0 * z2 * z3;
    let d = z0 - z1;
    [z0 * z0 - z1 * z1 - p, p, z2 * d, z3 * d]
}

/// Image of a point under `Q` or one of its iterates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QImage {
    Point(ProjPoint),
    /// `z0 = z1` with `z2z3 ≠ 0` was hit along the orbit.
    Pole,
}

impl QImage {
    pub fn point(&self) -> Option<ProjPoint> {
        match self {
            QImage::Point(p) => Some(*p),
            QImage::Pole => None,
        }
    }

    pub fn is_pole(&self) -> bool {
        matches!(self, QImage::Pole)
    }
}

fn normalized_or_pole(raw: [Complex64; 4]) -> QImage {
    match normalize(raw) {
        Some(p) => QImage::Point(p),
        None => QImage::Pole,
    }
}

/// `|z2 z3|` on the normalized representative is below `eps`.
fn product_negligible(c: &[Complex64; 4], eps: f64) -> bool {
    (c[2] * c[3]).norm() < eps
}

/// `Q(z) = [s − r : r : z2 : z3]` with `s = z0 + z1`, `r = 2z2z3 / (z0 − z1)`.
pub fn q_lamp(z: &PencilPoint) -> QImage {
    q_lamp_with(z, Tolerances::default().eps_e)
}

pub fn q_lamp_with(z: &PencilPoint, eps_e: f64) -> QImage {
    let Some(p) = z.normalized() else {
        return QImage::Pole;
    };
    let c = p.coords();
    let s = c[0] + c[1];
    let d = c[0] - c[1];
    let r = if product_negligible(&c, eps_e) {
        Complex64::new(0.0, 0.0)
    } else if d.norm() < eps_e {
        return QImage::Pole;
    } else {
        2.0 * c[2] * c[3] / d
    };
    normalized_or_pole([s - r, r, c[2], c[3]])
}

/// Iterates `Q` directly `n` times.
pub fn q_iterate(z: &PencilPoint, n: usize, eps_e: f64) -> QImage {
    let mut cur = match z.normalized() {
        Some(p) => p,
        None => return QImage::Pole,
    };
    for _ in 0..n {
        match q_lamp_with(&cur.as_pencil(), eps_e) {
            QImage::Point(p) => cur = p,
            QImage::Pole => return QImage::Pole,
        }
    }
    QImage::Point(cur)
}

/// `δ_0 ..= δ_n` for the raw coordinates of `z`, `δ_k = G_k / G_{k−1}`.
///
/// Entries after a vanishing `G_k` are infinite or NaN.
pub fn deltas(z: &PencilPoint, n: usize) -> Vec<Complex64> {
    let g = g_sequence(n, z);
    let mut prev = ScaledValue::ONE;
    g.iter()
        .map(|gk| {
            let d = gk.ratio(&prev);
            prev = *gk;
            d
        })
        .collect()
}

/// Lift of `Qⁿ(z)` that keeps `z2`, `z3` and `z0 + z1` fixed:
/// `((s + δ_n)/2, (s − δ_n)/2, z2, z3)`.
pub fn qn_lift(z: &PencilPoint, n: usize) -> [Complex64; 4] {
    let [z0, z1, z2, z3] = z.coords();
    if n == 0 {
        return [z0, z1, z2, z3];
    }
    let s = z0 + z1;
    let d = deltas(z, n)[n];
    [(s + d) / 2.0, (s - d) / 2.0, z2, z3]
}

/// `Qⁿ(z)` through the scalar recursion for `δ_n`.
pub fn qn_delta(z: &PencilPoint, n: usize) -> QImage {
    qn_delta_with(z, n, &Tolerances::default())
}

pub fn qn_delta_with(z: &PencilPoint, n: usize, tol: &Tolerances) -> QImage {
    let Some(p) = z.normalized() else {
        return QImage::Pole;
    };
    if n == 0 {
        return QImage::Point(p);
    }
    let c = p.coords();
    let s = c[0] + c[1];
    if product_negligible(&c, tol.eps_e) {
        // G_k = (z0 − z1) s^k: every δ_k with k ≥ 1 equals s.
        return normalized_or_pole([s, Complex64::new(0.0, 0.0), c[2], c[3]]);
    }
    let pc = p.as_pencil();
    let res = residuals_from(&c, &g_sequence(n, &pc), n);
    if res[..n].iter().any(|r| *r < tol.eps_gamma) {
        return QImage::Pole;
    }
    let d = deltas(&pc, n)[n];
    normalized_or_pole([(s + d) / 2.0, (s - d) / 2.0, c[2], c[3]])
}

/// Scale-free size of `G_k`: its modulus against the larger of the two terms
/// `s·G_{k−1}` and `4z2z3·G_{k−2}` that produced it, so `0` means the step
/// cancelled exactly. For `k = 0` the terms are `z0` and `z1`.
fn residuals_from(c: &[Complex64; 4], g: &[ScaledValue], n: usize) -> Vec<f64> {
    let s = ScaledValue::from_complex(c[0] + c[1]);
    let q = ScaledValue::from_complex(4.0 * c[2] * c[3]);
    let ratio = |num: ScaledValue, den: ScaledValue| {
        if num.is_zero() {
            0.0
        } else {
            num.abs_ratio(&den)
        }
    };
    let mut out = Vec::with_capacity(n + 1);
    let scale0 = c[0].norm().max(c[1].norm());
    out.push(ratio(g[0], ScaledValue::from_real(scale0)));
    for k in 1..=n {
        let prev2 = if k >= 2 { g[k - 2] } else { ScaledValue::ONE };
        let a = (s * g[k - 1]).abs();
        let b = (q * prev2).abs();
        let den = if a.abs_ratio(&b) >= 1.0 { a } else { b };
        out.push(ratio(g[k], den));
    }
    out
}

/// Residuals of `z` against `Γ_0 ..= Γ_n`.
pub fn gamma_residuals(z: &PencilPoint, n: usize) -> Vec<f64> {
    let c = z.chart_coords();
    let p = PencilPoint::new(c);
    residuals_from(&c, &g_sequence(n, &p), n)
}

/// Residual of `z` against `Γ_n = {G_n = 0}`.
pub fn gamma_residual(z: &PencilPoint, n: usize) -> f64 {
    gamma_residuals(z, n)[n]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LampTag {
    NotDetected,
    CriticalVariety,
    Band,
    GammaCurve(usize),
    HyperplaneL,
}

impl LampTag {
    pub fn code(&self) -> u8 {
        match self {
            LampTag::NotDetected => 0,
            LampTag::CriticalVariety => 1,
            LampTag::Band => 2,
            LampTag::GammaCurve(_) => 3,
            LampTag::HyperplaneL => 4,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LampTag::NotDetected => "NotDetected",
            LampTag::CriticalVariety => "CriticalVariety",
            LampTag::Band => "Band",
            LampTag::GammaCurve(_) => "GammaCurve",
            LampTag::HyperplaneL => "HyperplaneL",
        }
    }
}

impl fmt::Display for LampTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LampTag::GammaCurve(n) => write!(f, "GammaCurve({n})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LampVerdict {
    pub tag: LampTag,
    /// Residual of the component found, or the smallest `Γ_n` residual seen
    /// for `NotDetected`.
    pub residual: f64,
    /// `(z0 + z1)² / 16z2z3`, when `z2z3` is not negligible.
    pub tau_sq: Option<Complex64>,
}

/// `|(z0 − z1)z1 − 2z2z3|` on the normalized representative.
pub fn critical_residual(z: &PencilPoint) -> f64 {
    let c = z.chart_coords();
    ((c[0] - c[1]) * c[1] - 2.0 * c[2] * c[3]).norm()
}

pub fn tau_sq(z: &PencilPoint, eps_e: f64) -> Option<Complex64> {
    let c = z.chart_coords();
    if product_negligible(&c, eps_e) {
        None
    } else {
        let s = c[0] + c[1];
        Some(s * s / (16.0 * c[2] * c[3]))
    }
}

/// Whether `z` lies in `⋃_{x∈[0,1]} {(z0 + z1)² = 16x·z2z3}`.
pub fn in_band(z: &PencilPoint, tol: &Tolerances) -> bool {
    match tau_sq(z, tol.eps_e) {
        Some(t) => t.im.abs() <= tol.eps_band && t.re >= -tol.eps_band && t.re <= 1.0 + tol.eps_band,
        None => {
            let c = z.chart_coords();
            (c[0] + c[1]).norm() < tol.eps_e
        }
    }
}

/// Tests the three components of `E` in turn: the critical variety, the
/// band, then `Γ_0 ..= Γ_{N}` with `N = tol.gamma_nmax`.
///
/// `NotDetected` is one-sided: `E` is a closure and no finite sweep covers it.
pub fn classify_e(z: &PencilPoint) -> LampVerdict {
    classify_e_with(z, &Tolerances::default())
}

pub fn classify_e_with(z: &PencilPoint, tol: &Tolerances) -> LampVerdict {
    let tsq = tau_sq(z, tol.eps_e);
    let crit = critical_residual(z);
    if crit < tol.eps_e {
        return LampVerdict {
            tag: LampTag::CriticalVariety,
            residual: crit,
            tau_sq: tsq,
        };
    }
    if in_band(z, tol) {
        let residual = match tsq {
            Some(t) => crate::cheb::band_distance(2.0 * t - 1.0) / 2.0,
            None => {
                let c = z.chart_coords();
                (c[0] + c[1]).norm()
            }
        };
        return LampVerdict {
            tag: LampTag::Band,
            residual,
            tau_sq: tsq,
        };
    }
    let res = gamma_residuals(z, tol.gamma_nmax);
    if let Some(n) = res.iter().position(|r| *r < tol.eps_gamma) {
        return LampVerdict {
            tag: LampTag::GammaCurve(n),
            residual: res[n],
            tau_sq: tsq,
        };
    }
    LampVerdict {
        tag: LampTag::NotDetected,
        residual: res.iter().cloned().fold(f64::INFINITY, f64::min),
        tau_sq: tsq,
    }
}

/// `|z0 + z1 + 2z2 + 2z3|` on the normalized representative.
pub fn l_residual(z: &PencilPoint) -> f64 {
    let c = z.chart_coords();
    (c[0] + c[1] + 2.0 * c[2] + 2.0 * c[3]).norm()
}

pub fn in_hyperplane_l(z: &PencilPoint) -> bool {
    in_hyperplane_l_with(z, Tolerances::default().eps_e)
}

pub fn in_hyperplane_l_with(z: &PencilPoint, eps_e: f64) -> bool {
    l_residual(z) < eps_e
}

/// [`classify_e_with`], with `NotDetected` points on `L` tagged `HyperplaneL`.
pub fn classify_lower(z: &PencilPoint, tol: &Tolerances) -> LampVerdict {
    let v = classify_e_with(z, tol);
    if v.tag == LampTag::NotDetected && in_hyperplane_l_with(z, tol.eps_e) {
        LampVerdict {
            tag: LampTag::HyperplaneL,
            residual: l_residual(z),
            ..v
        }
    } else {
        v
    }
}

/// Certified part of the spectrum: `L ∪ E` up to the sweep depth.
pub fn spectrum_lower_member(z: &PencilPoint, tol: &Tolerances) -> bool {
    classify_lower(z, tol).tag != LampTag::NotDetected
}

/// `lim G_{n+1}/G_n`: the root of `x² − sx + 4z2z3` of larger modulus.
pub fn ratio_limit_lamp(z: &PencilPoint) -> Result<Complex64> {
    ratio_limit_lamp_with(z, &Tolerances::default())
}

pub fn ratio_limit_lamp_with(z: &PencilPoint, tol: &Tolerances) -> Result<Complex64> {
    if in_band(z, tol) {
        let t = tau_sq(z, tol.eps_e).unwrap_or_default();
        return Err(Error::Band { re: t.re, im: t.im });
    }
    let [z0, z1, z2, z3] = z.coords();
    let s = z0 + z1;
    let root = (s * s - 16.0 * z2 * z3).sqrt();
    let (a, b) = ((s + root) / 2.0, (s - root) / 2.0);
    Ok(if a.norm() >= b.norm() { a } else { b })
}

/// `Fⁿ(z)` assembled from the `Q`-orbit as `∏_{i<n} δ_i^{2^{n−1−i}} · lift(Qⁿ(z))`.
pub fn fn_lift_product(z: &PencilPoint, n: usize) -> ScaledLift {
    let d = deltas(z, n);
    let mut factor = ScaledValue::ONE;
    for (i, di) in d.iter().enumerate().take(n) {
        factor = factor * ScaledValue::from_complex(*di).powu(1u64 << (n - 1 - i));
    }
    let q = qn_lift(z, n);
    let comps = q.map(|c| factor.scale(c));
    ScaledLift::from_scaled(comps)
}

/// One row of [`explore_conjecture`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExploreRow {
    pub s: f64,
    pub t: f64,
    pub point: Option<ProjPoint>,
    pub sigma_min: f64,
    pub lower_member: bool,
    pub verdict: LampTag,
    pub residual: f64,
}

/// Smallest singular value of the level-`n` pencil and the lower
/// classification at every grid point of `plane`.
///
/// Reporting only: nothing here tests the conjectured equality.
pub fn explore_conjecture(plane: &PlaneSpec, n: usize, tol: &Tolerances) -> Result<Vec<ExploreRow>> {
    let spec = wreath_spec();
    let template = pencil_template();
    crate::selfsim::level_matrix(&spec, &GroupWord::identity(), n)?;
    let (w, h) = plane.resolution();
    (0..w * h)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % w, idx / w);
            let (s, t) = plane.params(i, j);
            let z = plane.point(s, t)?;
            let Some(p) = z.normalized() else {
                return Ok(ExploreRow {
                    s,
                    t,
                    point: None,
                    sigma_min: f64::NAN,
                    lower_member: false,
                    verdict: LampTag::NotDetected,
                    residual: f64::NAN,
                });
            };
            let sigma_min = template.matrix(&spec, &p.as_pencil(), n)?.min_singular();
            let v = classify_lower(&p.as_pencil(), tol);
            Ok(ExploreRow {
                s,
                t,
                point: Some(p),
                sigma_min,
                lower_member: v.tag != LampTag::NotDetected,
                verdict: v.tag,
                residual: v.residual,
            })
        })
        .collect()
}

pub const EXPLORE_HEADER: &str =
    "s,t,z0re,z0im,z1re,z1im,z2re,z2im,z3re,z3im,sigma_min,lower_member,verdict,residual";

pub fn explore_csv(rows: &[ExploreRow]) -> String {
    let mut out = String::from(EXPLORE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{}", r.s, r.t));
        match r.point {
            Some(p) => {
                for c in p.coords() {
                    out.push_str(&format!(",{},{}", c.re, c.im));
                }
            }
            None => out.push_str(",,,,,,,,"),
        }
        out.push_str(&format!(
            ",{},{},{},{}\n",
            r.sigma_min, r.lower_member, r.verdict, r.residual
        ));
    }
    out
}
