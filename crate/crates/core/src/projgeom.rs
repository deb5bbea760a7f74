//! Points of complex projective 3-space and homogeneous quadratic maps on it.
//!
//! A point is stored in its chart-normalized form: the first coordinate of
//! maximal modulus is set to exactly `1`. This keeps representatives such as
//! `[1:3:0:-2]` exact and makes every residual test independent of the scale
//! of the input vector.

use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scaled::ScaledValue;

/// Relative slack when comparing coordinate moduli for the chart choice.
pub const EPS_NORM: f64 = 1e-12;
pub const EPS_ZERO: f64 = 1e-300;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Four complex pencil coefficients `(z0, z1, z2, z3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PencilPoint([Complex64; 4]);

impl PencilPoint {
    /// Panics if a coordinate is NaN or infinite; see [`PencilPoint::try_new`].
    pub fn new(coords: [Complex64; 4]) -> Self {
        Self::try_new(coords).expect("pencil coordinates must be finite")
    }

    pub fn try_new(coords: [Complex64; 4]) -> Result<Self> {
        if coords.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(Self(coords))
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn real(z0: f64, z1: f64, z2: f64, z3: f64) -> Self {
        Self::new([z0, z1, z2, z3].map(|x| Complex64::new(x, 0.0)))
    }

    pub fn coords(&self) -> [Complex64; 4] {
        self.0
    }

    pub fn scaled(&self, lambda: Complex64) -> Self {
        Self::new(self.0.map(|z| z * lambda))
    }

    /// Chart-normalized representative; `None` for the zero vector.
    pub fn normalized(&self) -> Option<ProjPoint> {
        normalize(self.0)
    }

    /// Chart-normalized coordinates, or the raw ones for the zero vector.
    pub(crate) fn chart_coords(&self) -> [Complex64; 4] {
        self.normalized().map(|p| p.coords()).unwrap_or(self.0)
    }
}

impl Index<usize> for PencilPoint {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl From<ProjPoint> for PencilPoint {
    fn from(p: ProjPoint) -> Self {
        PencilPoint(p.coords)
    }
}

/// Chart-normalized representative of a point of `ℙ³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjPoint {
    coords: [Complex64; 4],
    chart: usize,
}

impl ProjPoint {
    pub fn coords(&self) -> [Complex64; 4] {
        self.coords
    }

    pub fn chart(&self) -> usize {
        self.chart
    }

    pub fn as_pencil(&self) -> PencilPoint {
        PencilPoint(self.coords)
    }

    /// Projective equality up to `eps` in [`proj_distance`].
    pub fn proj_eq(&self, other: &ProjPoint, eps: f64) -> bool {
        proj_distance(self, other) < eps
    }
}

impl Index<usize> for ProjPoint {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.coords[i]
    }
}

pub fn normalize(raw: [Complex64; 4]) -> Option<ProjPoint> {
    normalize_with(raw, EPS_ZERO)
}

/// Divides by the lowest-index coordinate of (near-)maximal modulus.
///
/// Moduli within a relative [`EPS_NORM`] of the maximum count as ties, which
/// makes the operation idempotent: re-normalizing divides by exactly `1`.
pub fn normalize_with(raw: [Complex64; 4], eps_zero: f64) -> Option<ProjPoint> {
    let moduli = raw.map(|z| z.norm());
    let max = moduli.iter().cloned().fold(0.0, f64::max);
    if max.is_nan() || max < eps_zero {
        return None;
    }
    let chart = moduli
        .iter()
        .position(|&m| m >= max * (1.0 - EPS_NORM))
        .unwrap_or(0);
    let pivot = raw[chart];
    let mut coords = raw;
    for (i, c) in coords.iter_mut().enumerate() {
        *c = if i == chart { ONE } else { *c / pivot };
    }
    Some(ProjPoint { coords, chart })
}

/// Chordal Fubini–Study distance `sqrt(1 − |⟨p,q⟩|² / (|p|²|q|²))`.
///
/// The numerator `|p|²|q|² − |⟨p,q⟩|²` is evaluated through the Lagrange
/// identity as `Σ_{i<j} |p_i q_j − p_j q_i|²`, which stays accurate for
/// nearly equal points.
pub fn proj_distance(p: &ProjPoint, q: &ProjPoint) -> f64 {
    raw_distance(&p.coords, &q.coords)
}

pub(crate) fn raw_distance(p: &[Complex64; 4], q: &[Complex64; 4]) -> f64 {
    let np: f64 = p.iter().map(|z| z.norm_sqr()).sum();
    let nq: f64 = q.iter().map(|z| z.norm_sqr()).sum();
    let mut wedge = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            wedge += (p[i] * q[j] - p[j] * q[i]).norm_sqr();
        }
    }
    (wedge / (np * nq)).sqrt().min(1.0)
}

/// Image of a point under a homogeneous map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapImage {
    Point(ProjPoint),
    /// Every component of the lift vanishes: an indeterminacy point.
    Indeterminate,
}

impl MapImage {
    pub fn point(&self) -> Option<ProjPoint> {
        match self {
            MapImage::Point(p) => Some(*p),
            MapImage::Indeterminate => None,
        }
    }

    pub fn is_indeterminate(&self) -> bool {
        matches!(self, MapImage::Indeterminate)
    }
}

/// Index of the monomial `z_i z_j` (`i ≤ j`) in a coefficient row.
fn monomial(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // rows: (0,0..3) → 0..3, (1,1..3) → 4..6, (2,2..3) → 7..8, (3,3) → 9
    [0, 4, 7, 9][i] + (j - i)
}

/// A map `ℂ⁴ → ℂ⁴` whose four components are quadratic forms.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogMap {
    coeffs: [[Complex64; 10]; 4],
}

impl HomogMap {
    /// Builds a map from `(component, i, j, coefficient)` terms meaning
    /// `coefficient · z_i z_j` added to the given component.
    pub fn from_terms(terms: &[(usize, usize, usize, f64)]) -> Self {
        let mut coeffs = [[ZERO; 10]; 4];
        for &(k, i, j, c) in terms {
            coeffs[k][monomial(i, j)] += Complex64::new(c, 0.0);
        }
        Self { coeffs }
    }

    pub fn coefficient(&self, component: usize, i: usize, j: usize) -> Complex64 {
        self.coeffs[component][monomial(i, j)]
    }

    /// Evaluates the lift on a raw vector.
    pub fn lift(&self, z: [Complex64; 4]) -> [Complex64; 4] {
        let mut mono = [ZERO; 10];
        for i in 0..4 {
            for j in i..4 {
                mono[monomial(i, j)] = z[i] * z[j];
            }
        }
        let mut out = [ZERO; 4];
        for (k, row) in self.coeffs.iter().enumerate() {
            out[k] = row
                .iter()
                .zip(mono.iter())
                .filter(|(c, _)| c.re != 0.0 || c.im != 0.0)
                .map(|(c, m)| c * m)
                .sum();
        }
        out
    }
}

pub fn apply_homog(m: &HomogMap, p: &ProjPoint) -> MapImage {
    apply_homog_with(m, p, EPS_ZERO)
}

/// Applies the map to the chart representative and renormalizes.
pub fn apply_homog_with(m: &HomogMap, p: &ProjPoint, eps_zero: f64) -> MapImage {
    match normalize_with(m.lift(p.coords), eps_zero) {
        Some(q) => MapImage::Point(q),
        None => MapImage::Indeterminate,
    }
}

/// The first `n` iterates of `p`. Once an indeterminacy point is hit, that
/// step and all later ones are [`MapImage::Indeterminate`].
pub fn orbit(m: &HomogMap, p: &ProjPoint, n: usize) -> Vec<MapImage> {
    orbit_with(m, p, n, EPS_ZERO)
}

pub fn orbit_with(m: &HomogMap, p: &ProjPoint, n: usize, eps_zero: f64) -> Vec<MapImage> {
    let mut out = Vec::with_capacity(n);
    let mut current = *p;
    for _ in 0..n {
        match apply_homog_with(m, &current, eps_zero) {
            MapImage::Point(q) => {
                out.push(MapImage::Point(q));
                current = q;
            }
            MapImage::Indeterminate => break,
        }
    }
    out.resize(n, MapImage::Indeterminate);
    out
}

/// A lifted vector `coords · 2^exponent`, used to iterate a lift without
/// overflow while keeping its exact scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledLift {
    coords: [Complex64; 4],
    exponent: i64,
}

impl ScaledLift {
    pub fn new(raw: [Complex64; 4]) -> Self {
        Self::from_parts(raw, 0)
    }

    fn from_parts(raw: [Complex64; 4], exponent: i64) -> Self {
        let big = raw
            .iter()
            .map(|z| z.re.abs().max(z.im.abs()))
            .fold(0.0, f64::max);
        if big == 0.0 || !big.is_finite() {
            return Self {
                coords: raw,
                exponent,
            };
        }
        let k = big.log2().floor() as i32;
        let f = 2f64.powi(-k);
        Self {
            coords: raw.map(|z| z * f),
            exponent: exponent + k as i64,
        }
    }

    /// Lift with the given scaled coordinates.
    pub fn from_scaled(comps: [ScaledValue; 4]) -> Self {
        let top = comps
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| c.exponent())
            .max()
            .unwrap_or(0);
        let coords = comps.map(|c| (c * ScaledValue::from_parts(ONE, -top)).to_complex());
        Self::from_parts(coords, top)
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn mantissas(&self) -> [Complex64; 4] {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn component(&self, i: usize) -> ScaledValue {
        ScaledValue::from_parts(self.coords[i], self.exponent)
    }

    /// `Σ weights[i] · coords[i]`, e.g. the level-0 pencil value.
    pub fn weighted_sum(&self, weights: [f64; 4]) -> ScaledValue {
        let s: Complex64 = self
            .coords
            .iter()
            .zip(weights.iter())
            .map(|(z, w)| z * *w)
            .sum();
        ScaledValue::from_parts(s, self.exponent)
    }

    /// `m(self)`; a quadratic map doubles the exponent.
    pub fn apply(&self, m: &HomogMap) -> ScaledLift {
        Self::from_parts(m.lift(self.coords), 2 * self.exponent)
    }

    pub fn iterate(&self, m: &HomogMap, n: usize) -> ScaledLift {
        (0..n).fold(*self, |v, _| v.apply(m))
    }

    pub fn normalized(&self) -> Option<ProjPoint> {
        normalize(self.coords)
    }
}
