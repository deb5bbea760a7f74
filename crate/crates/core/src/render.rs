//! Classification of real two-parameter slices `z(s, t) = base + s·u + t·v`
//! of `ℙ³`, and their export as PGM, PPM and CSV.
//!
//! Pixels are evaluated in parallel but collected in row-major order, so the
//! output bytes do not depend on the number of worker threads.

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dihedral;
use crate::error::{Error, Result};
use crate::lamplighter;
use crate::projgeom::PencilPoint;
use crate::selfsim;
use crate::tol::Tolerances;

pub const MAX_RESOLUTION: usize = 16384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    Dihedral,
    Lamplighter,
}

impl Group {
    pub fn name(&self) -> &'static str {
        match self {
            Group::Dihedral => "dihedral",
            Group::Lamplighter => "lamplighter",
        }
    }
}

impl FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dihedral" => Ok(Group::Dihedral),
            "lamplighter" => Ok(Group::Lamplighter),
            other => Err(Error::Validation(format!("unknown group '{other}'"))),
        }
    }
}

/// Scalar written to the PGM and CSV outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// Classifier margin: distance of `τ` to the band for the dihedral group,
    /// the component residual for the lamplighter group.
    Margin,
    /// Smallest singular value of the level-`n` pencil.
    SigmaMin(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneSpec {
    base: [Complex64; 4],
    dir_u: [Complex64; 4],
    dir_v: [Complex64; 4],
    s_range: (f64, f64),
    t_range: (f64, f64),
    resolution: (usize, usize),
}

impl PlaneSpec {
    pub fn new(
        base: [Complex64; 4],
        dir_u: [Complex64; 4],
        dir_v: [Complex64; 4],
        s_range: (f64, f64),
        t_range: (f64, f64),
        resolution: (usize, usize),
    ) -> Result<Self> {
        let zero = |d: &[Complex64; 4]| d.iter().all(|z| z.norm() == 0.0);
        if zero(&dir_u) && zero(&dir_v) {
            return Err(Error::Plane("both directions are zero".into()));
        }
        let (w, h) = resolution;
        if w == 0 || h == 0 || w > MAX_RESOLUTION || h > MAX_RESOLUTION {
            return Err(Error::Plane(format!(
                "resolution {w}x{h} outside 1..={MAX_RESOLUTION} per axis"
            )));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !base.iter().chain(&dir_u).chain(&dir_v).all(finite)
            || ![s_range.0, s_range.1, t_range.0, t_range.1]
                .iter()
                .all(|x| x.is_finite())
        {
            return Err(Error::Plane("non-finite plane parameters".into()));
        }
        Ok(Self {
            base,
            dir_u,
            dir_v,
            s_range,
            t_range,
            resolution,
        })
    }

    pub fn resolution(&self) -> (usize, usize) {
        self.resolution
    }

    /// Parameters of pixel `(i, j)`; column `i` runs along `s`, row `0` is the
    /// top of the image (largest `t`).
    pub fn params(&self, i: usize, j: usize) -> (f64, f64) {
        let lerp = |(a, b): (f64, f64), k: usize, n: usize| {
            if n <= 1 {
                a
            } else {
                a + (b - a) * k as f64 / (n - 1) as f64
            }
        };
        let (w, h) = self.resolution;
        let s = lerp(self.s_range, i, w);
        let t = lerp((self.t_range.1, self.t_range.0), j, h);
        (s, t)
    }

    pub fn point(&self, s: f64, t: f64) -> Result<PencilPoint> {
        let mut c = self.base;
        for ((ck, u), v) in c.iter_mut().zip(&self.dir_u).zip(&self.dir_v) {
            *ck += u * s + v * t;
        }
        PencilPoint::try_new(c)
    }
}

/// Verdict code and scalar channel for every pixel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput {
    pub group: Group,
    pub width: usize,
    pub height: usize,
    pub codes: Vec<u8>,
    pub values: Vec<f64>,
    params: Vec<(f64, f64)>,
}

fn classify_pixel(group: Group, z: &PencilPoint, tol: &Tolerances) -> (u8, f64) {
    match group {
        Group::Dihedral => {
            let v = dihedral::classify_with(z, tol);
            (v.tag.code(), v.margin)
        }
        Group::Lamplighter => {
            let v = lamplighter::classify_lower(z, tol);
            (v.tag.code(), v.residual)
        }
    }
}

fn sigma_min(group: Group, z: &PencilPoint, level: usize) -> Result<f64> {
    let Some(p) = z.normalized() else {
        return Ok(0.0);
    };
    let (spec, tpl) = match group {
        Group::Dihedral => (dihedral::wreath_spec(), dihedral::pencil_template()),
        Group::Lamplighter => (lamplighter::wreath_spec(), lamplighter::pencil_template()),
    };
    Ok(tpl.matrix(&spec, &p.as_pencil(), level)?.min_singular())
}

pub fn render(group: Group, plane: &PlaneSpec, channel: Channel, tol: &Tolerances) -> Result<RenderOutput> {
    if let Channel::SigmaMin(level) = channel {
        if level > selfsim::N_MAX {
            return Err(Error::LevelTooLarge {
                level,
                max: selfsim::N_MAX,
            });
        }
    }
    let (w, h) = plane.resolution();
    let pixels: Vec<((f64, f64), u8, f64)> = (0..w * h)
        .into_par_iter()
        .map(|idx| {
            let (s, t) = plane.params(idx % w, idx / w);
            let z = plane.point(s, t)?;
            let (code, margin) = classify_pixel(group, &z, tol);
            let value = match channel {
                Channel::Margin => margin,
                Channel::SigmaMin(level) => sigma_min(group, &z, level)?,
            };
            Ok(((s, t), code, value))
        })
        .collect::<Result<_>>()?;
    let mut out = RenderOutput {
        group,
        width: w,
        height: h,
        codes: Vec::with_capacity(w * h),
        values: Vec::with_capacity(w * h),
        params: Vec::with_capacity(w * h),
    };
    for (st, code, value) in pixels {
        out.params.push(st);
        out.codes.push(code);
        out.values.push(value);
    }
    Ok(out)
}

/// RGB colour of each verdict code.
pub fn palette(group: Group, code: u8) -> [u8; 3] {
    match (group, code) {
        (Group::Dihedral, 1) => [240, 200, 40],
        (Group::Dihedral, 2) => [220, 40, 40],
        (Group::Lamplighter, 1) => [220, 40, 40],
        (Group::Lamplighter, 2) => [240, 200, 40],
        (Group::Lamplighter, 3) => [60, 180, 90],
        (Group::Lamplighter, 4) => [80, 140, 240],
        _ => [16, 16, 48],
    }
}

impl RenderOutput {
    pub fn count(&self, code: u8) -> usize {
        self.codes.iter().filter(|c| **c == code).count()
    }

    /// Binary greymap of the scalar channel, min–max scaled over the finite
    /// values; non-finite values map to white.
    pub fn to_pgm(&self) -> Vec<u8> {
        let finite = self.values.iter().filter(|v| v.is_finite());
        let lo = finite.clone().cloned().fold(f64::INFINITY, f64::min);
        let hi = finite.cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.values.iter().map(|v| {
            if !v.is_finite() {
                255
            } else if hi > lo {
                ((v - lo) / (hi - lo) * 255.0).round() as u8
            } else {
                0
            }
        }));
        out
    }

    /// Binary pixmap with one fixed colour per verdict.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        for c in &self.codes {
            out.extend(palette(self.group, *c));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,s,t,code,value\n");
        for (idx, ((s, t), (code, value))) in self
            .params
            .iter()
            .zip(self.codes.iter().zip(&self.values))
            .enumerate()
        {
            let _ = writeln!(
                out,
                "{},{},{s},{t},{code},{value}",
                idx % self.width,
                idx / self.width
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn creal(v: [f64; 4]) -> [Complex64; 4] {
        v.map(|x| Complex64::new(x, 0.0))
    }

    fn dihedral_plane(n: usize) -> PlaneSpec {
        PlaneSpec::new(
            creal([0.0, 0.0, 1.0, 0.0]),
            creal([1.0, 0.0, 0.0, 0.0]),
            creal([0.0, 1.0, 0.0, 0.0]),
            (-3.0, 3.0),
            (-3.0, 3.0),
            (n, n),
        )
        .unwrap()
    }

    #[test]
    fn plane_validation() {
        let z = creal([0.0; 4]);
        let b = creal([1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            PlaneSpec::new(b, z, z, (0.0, 1.0), (0.0, 1.0), (4, 4)),
            Err(Error::Plane(_))
        ));
        assert!(PlaneSpec::new(b, b, z, (0.0, 1.0), (0.0, 1.0), (0, 4)).is_err());
        assert!(PlaneSpec::new(b, b, z, (0.0, 1.0), (0.0, 1.0), (MAX_RESOLUTION + 1, 4)).is_err());
        assert!(PlaneSpec::new(b, b, z, (0.0, 1.0), (0.0, 1.0), (MAX_RESOLUTION, 1)).is_ok());
    }

    #[test]
    fn params_cover_ranges() {
        let p = dihedral_plane(5);
        assert_eq!(p.params(0, 0), (-3.0, 3.0));
        assert_eq!(p.params(4, 4), (3.0, -3.0));
        assert_eq!(p.params(2, 2), (0.0, 0.0));
    }

    #[test]
    fn dihedral_band_region() {
        // z = (s, t, 1, 0): τ = (s² − t² − 1) / 2t
        let p = dihedral_plane(64);
        let out = render(Group::Dihedral, &p, Channel::Margin, &Tolerances::default()).unwrap();
        for (idx, code) in out.codes.iter().enumerate() {
            let (s, t) = p.params(idx % 64, idx / 64);
            let tau = (s * s - t * t - 1.0) / (2.0 * t);
            let expected = if tau.abs() <= 1.0 { 1 } else { 0 };
            if (tau.abs() - 1.0).abs() > 1e-6 {
                assert_eq!(*code, expected, "s={s} t={t}");
            }
        }
        assert!(out.count(1) > 0 && out.count(0) > 0);
    }

    #[test]
    fn outputs_are_well_formed() {
        let p = dihedral_plane(8);
        let out = render(Group::Dihedral, &p, Channel::Margin, &Tolerances::default()).unwrap();
        let pgm = out.to_pgm();
        assert!(pgm.starts_with(b"P5\n8 8\n255\n"));
        assert_eq!(pgm.len(), b"P5\n8 8\n255\n".len() + 64);
        let ppm = out.to_ppm();
        assert_eq!(ppm.len(), b"P6\n8 8\n255\n".len() + 3 * 64);
        let csv = out.to_csv();
        assert_eq!(csv.lines().count(), 65);
    }

    #[test]
    fn sigma_channel() {
        let p = PlaneSpec::new(
            creal([1.0, 3.0, 0.0, -2.0]),
            creal([0.0, 0.0, 1.0, 0.0]),
            creal([0.0, 0.0, 0.0, 1.0]),
            (-0.5, 0.5),
            (-0.5, 0.5),
            (3, 3),
        )
        .unwrap();
        let out = render(Group::Lamplighter, &p, Channel::SigmaMin(2), &Tolerances::default()).unwrap();
        assert_eq!(out.codes[4], lamplighter::LampTag::HyperplaneL.code());
        assert!(out.values[4] < 1e-10);
    }
}
