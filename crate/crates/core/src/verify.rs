//! Seeded property suites behind `specdyn verify`.
//!
//! Each check draws its own samples from a generator seeded with the suite
//! seed plus the check's position, records the largest residual seen and
//! compares it with a fixed tolerance.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::cheb;
use crate::dihedral::{self, DihedralTag, IndeterminacyLevel, Tau};
use crate::error::Error;
use crate::lamplighter::{self, LampTag, QImage};
use crate::projgeom::{orbit, proj_distance, HomogMap, PencilPoint, ScaledLift};
use crate::rng::{self, ChaCha8Rng};
use crate::scaled::ScaledValue;
use crate::selfsim::{self, DetValue, GroupWord, PencilTemplate, WreathSpec};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Chebyshev,
    Dihedral,
    Lamplighter,
    Selfsim,
    All,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Chebyshev => "chebyshev",
            Suite::Dihedral => "dihedral",
            Suite::Lamplighter => "lamplighter",
            Suite::Selfsim => "selfsim",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "chebyshev" => Ok(Suite::Chebyshev),
            "dihedral" => Ok(Suite::Dihedral),
            "lamplighter" => Ok(Suite::Lamplighter),
            "selfsim" => Ok(Suite::Selfsim),
            "all" => Ok(Suite::All),
            other => Err(Error::Validation(format!("unknown suite '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub samples: usize,
    pub failures: usize,
    pub worst: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.samples > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub suite: Suite,
    pub seed: u64,
    pub samples: usize,
    pub tolerances: Tolerances,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed()).count()
    }

    pub fn passed(&self) -> bool {
        self.failed() == 0
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.tolerances;
        writeln!(
            f,
            "suite {} seed {} samples {} rng ChaCha8",
            self.suite.name(),
            self.seed,
            self.samples
        )?;
        writeln!(
            f,
            "tolerances eps_band={:e} eps_e={:e} eps_gamma={:e} gamma_nmax={}",
            t.eps_band, t.eps_e, t.eps_gamma, t.gamma_nmax
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<12} {:<44} samples {:>7}  worst {:>10.3e}  tol {:.0e}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.suite,
                c.name,
                c.samples,
                c.worst,
                c.tolerance
            )?;
        }
        write!(f, "{} checks, {} failed", self.checks.len(), self.failed())
    }
}

struct Check {
    suite: &'static str,
    name: &'static str,
    tolerance: f64,
    samples: usize,
    failures: usize,
    worst: f64,
}

impl Check {
    fn new(suite: &'static str, name: &'static str, tolerance: f64) -> Self {
        Self {
            suite,
            name,
            tolerance,
            samples: 0,
            failures: 0,
            worst: 0.0,
        }
    }

    fn residual(&mut self, r: f64) {
        self.samples += 1;
        let r = if r.is_nan() { f64::INFINITY } else { r };
        if r > self.tolerance {
            self.failures += 1;
        }
        self.worst = self.worst.max(r);
    }

    fn condition(&mut self, ok: bool) {
        self.residual(if ok { 0.0 } else { f64::INFINITY });
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            suite: self.suite,
            name: self.name,
            samples: self.samples,
            failures: self.failures,
            worst: self.worst,
            tolerance: self.tolerance,
        }
    }
}

/// Runs `suite` with `samples` as the base sample count.
pub fn run(suite: Suite, seed: u64, samples: usize, tol: &Tolerances) -> Report {
    let samples = samples.max(1);
    let mut checks = Vec::new();
    let mut ctx = Ctx {
        seed,
        next: 0,
        samples,
        tol: *tol,
    };
    if matches!(suite, Suite::Chebyshev | Suite::All) {
        chebyshev_suite(&mut ctx, &mut checks);
    }
    if matches!(suite, Suite::Dihedral | Suite::All) {
        dihedral_suite(&mut ctx, &mut checks);
    }
    if matches!(suite, Suite::Lamplighter | Suite::All) {
        lamplighter_suite(&mut ctx, &mut checks);
    }
    if matches!(suite, Suite::Selfsim | Suite::All) {
        selfsim_suite(&mut ctx, &mut checks);
    }
    Report {
        suite,
        seed,
        samples,
        tolerances: *tol,
        checks,
    }
}

struct Ctx {
    seed: u64,
    next: u64,
    samples: usize,
    tol: Tolerances,
}

impl Ctx {
    fn rng(&mut self) -> ChaCha8Rng {
        self.next += 1;
        rng::seeded(self.seed.wrapping_add(self.next.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
    }

    /// `samples / div`, at least `min`.
    fn count(&self, div: usize, min: usize) -> usize {
        (self.samples / div).max(min)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn chebyshev_suite(ctx: &mut Ctx, out: &mut Vec<CheckResult>) {
    const S: &str = "chebyshev";
    let n = ctx.samples;

    let mut ch = Check::new(S, "U_n(cos w) = sin((n+1)w) / sin w", 1e-9);
    let mut r = ctx.rng();
    for _ in 0..n {
        let w: f64 = r.random_range(0.05..std::f64::consts::PI - 0.05);
        let k = r.random_range(0..=50usize);
        let trig = ((k as f64 + 1.0) * w).sin() / w.sin();
        let u = cheb::u(k, c(w.cos(), 0.0));
        ch.residual((u.re - trig).abs() / trig.abs().max(1.0));
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "U_n(1) = n+1, U_n(-1) = (-1)^n (n+1)", 1e-12);
    for k in 0..=100usize {
        let e = k as f64 + 1.0;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        ch.residual(rel(cheb::u(k, c(1.0, 0.0)), c(e, 0.0)));
        ch.residual(rel(cheb::u(k, c(-1.0, 0.0)), c(sign * e, 0.0)));
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "U_n explicit binomial sum", 1e-12);
    let mut r = ctx.rng();
    for _ in 0..n {
        let x = rng::complex_in(&mut r, 1.0);
        let k = r.random_range(0..=20usize);
        let (mut sum, mut size) = (c(0.0, 0.0), 0.0);
        for j in 0..=k / 2 {
            let coef = binomial(k - j, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
            let term = coef * (2.0 * x).powu((k - 2 * j) as u32);
            sum += term;
            size += term.norm();
        }
        ch.residual((cheb::u(k, x) - sum).norm() / size.max(1.0));
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "zeros of U_n, U_n+1 interlace (n <= 50)", 1e-9);
    for k in 1..=50usize {
        let a = cheb::u_zeros(k);
        let b = cheb::u_zeros(k + 1);
        let interlaced = (0..k).all(|i| b[i] < a[i] && a[i] < b[i + 1]);
        ch.condition(interlaced);
        for x in &a {
            ch.residual(cheb::u(k, c(*x, 0.0)).norm() / (k as f64 + 1.0));
        }
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "U_200 / U_201 -> x - sqrt(x^2 - 1)", 1e-8);
    let mut r = ctx.rng();
    let mut taken = 0;
    while taken < ctx.count(10, 20) {
        let x = rng::complex_in(&mut r, 3.0);
        let lim = cheb::ratio_limit(x).expect("off band");
        // convergence rate is |lim|^2 per step
        if cheb::band_distance(x) < 0.05 || lim.norm() > 0.95 {
            continue;
        }
        taken += 1;
        let seq = cheb::u_sequence(201, x);
        ch.residual((seq[200].ratio(&seq[201]) - lim).norm());
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "P_n(a+b, ab) = (a^(n+1) - b^(n+1)) / (a - b)", 1e-8);
    let mut r = ctx.rng();
    for _ in 0..n {
        let a = rng::complex_in(&mut r, 1.5);
        let b = rng::complex_in(&mut r, 1.5);
        if (a - b).norm() < 0.2 {
            continue;
        }
        let k = r.random_range(0..=30usize);
        let expected = (a.powu(k as u32 + 1) - b.powu(k as u32 + 1)) / (a - b);
        ch.residual(rel(cheb::p(k, a + b, a * b).to_complex(), expected));
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "T^n(cos w) = cos(2^n w)", 1e-8);
    let mut r = ctx.rng();
    for _ in 0..n {
        let w: f64 = r.random_range(0.0..std::f64::consts::PI);
        let k = r.random_range(0..=10usize);
        let got = cheb::t_iter(c(w.cos(), 0.0), k);
        ch.residual((got.re - (2f64.powi(k as i32) * w).cos()).abs());
    }
    out.push(ch.finish());
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Whether some `θ` makes the left-regular symbol vanish, decided from a
/// 2048-point grid refined by golden-section search around the grid minimum.
pub fn symbol_vanishes(z: &PencilPoint) -> bool {
    const GRID: usize = 2048;
    let f = |th: f64| dihedral::left_regular_symbol(z, th).norm();
    let step = std::f64::consts::PI / GRID as f64;
    let best = (0..=GRID)
        .min_by(|a, b| f(*a as f64 * step).total_cmp(&f(*b as f64 * step)))
        .unwrap_or(0);
    let (mut lo, mut hi) = (
        (best as f64 - 1.0).max(0.0) * step,
        (best as f64 + 1.0).min(GRID as f64) * step,
    );
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let (a, b) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let min = f(0.5 * (lo + hi));
    // the symbol is N + x·M with x = cos θ; compare with its size
    let scale = f(0.0).max(f(std::f64::consts::PI)).max(1e-300);
    min <= 1e-8 * scale
}

/// Point with the given `τ` (on or off the band) and random remaining freedom.
fn point_with_tau<R: Rng>(r: &mut R, tau: Complex64) -> PencilPoint {
    // fix z1, z2, z3; τ·2(z1z2 − z0z3) = z0² + z3² − z1² − z2² is quadratic in z0
    let z1 = rng::complex_in(r, 1.0);
    let z2 = rng::complex_in(r, 1.0);
    let z3 = rng::complex_in(r, 1.0);
    // z0² + 2τ z3 z0 + (z3² − z1² − z2² − 2τ z1 z2) = 0
    let b = 2.0 * tau * z3;
    let cc = z3 * z3 - z1 * z1 - z2 * z2 - 2.0 * tau * z1 * z2;
    let z0 = (-b + (b * b - 4.0 * cc).sqrt()) / 2.0;
    PencilPoint::new([z0, z1, z2, z3])
}

fn dihedral_suite(ctx: &mut Ctx, out: &mut Vec<CheckResult>) {
    const S: &str = "dihedral";
    let n = ctx.samples;
    let tol = ctx.tol;

    let mut ch = Check::new(S, "tau(F(z)) = T(tau(z))", 1e-9);
    let mut r = ctx.rng();
    for _ in 0..10 * n {
        let z = rng::pencil_point(&mut r);
        let fz = PencilPoint::new(dihedral::f_dihedral(&z));
        if let (Tau::Finite(t), Tau::Finite(t1)) = (dihedral::tau(&z), dihedral::tau(&fz)) {
            let e = 2.0 * t * t - 1.0;
            ch.residual((t1 - e).norm() / (1.0 + e.norm()));
        }
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "quadric identities under F", 1e-10);
    let mut r = ctx.rng();
    for _ in 0..n {
        let z = rng::pencil_point(&mut r).coords();
        let [w0, w1, w2, w3] = dihedral::f_dihedral(&PencilPoint::new(z));
        let [z0, z1, z2, z3] = z;
        let q = z0 * z0 - z1 * z1 + z3 * z3 - z2 * z2;
        let d = z1 * z2 - z0 * z3;
        for (a, b) in [
            (w0 * w0 - w1 * w1, (z0 * z0 - z1 * z1) * q - d * d),
            (w3 * w3 - w2 * w2, (z3 * z3 - z2 * z2) * q - d * d),
            (w0 * w0 - w1 * w1 + w3 * w3 - w2 * w2, q * q - 2.0 * d * d),
            (w0 * w2 - w1 * w3, (z0 * z2 - z1 * z3) * q),
            (w1 * w2 - w0 * w3, d * d),
        ] {
            ch.residual((a - b).norm() / (1.0 + b.norm()));
        }
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "E families: classified and F^2 = 0", 1e-20);
    let mut r = ctx.rng();
    let f = dihedral::f_map();
    for _ in 0..ctx.count(10, 100) {
        let zeta = rng::complex_in(&mut r, 3.0);
        let one = c(1.0, 0.0);
        for v in [
            [one, one, zeta, zeta],
            [one, -one, zeta, -zeta],
            [one, zeta, one, zeta],
            [one, zeta, -one, -zeta],
        ] {
            let z = PencilPoint::new(v);
            let ok = dihedral::classify_with(&z, &tol).tag == DihedralTag::ExtendedIndeterminacy
                && dihedral::indeterminacy_level(&z) != IndeterminacyLevel::NotInE;
            if !ok {
                ch.condition(false);
                continue;
            }
            let size: f64 = v.iter().map(|x| x.norm_sqr()).sum();
            let f2 = f.lift(f.lift(v));
            ch.residual(f2.iter().map(|x| x.norm()).fold(0.0, f64::max) / (size * size));
        }
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "generic points are not in E", 0.0);
    let mut r = ctx.rng();
    for _ in 0..n {
        let z = rng::pencil_point(&mut r);
        ch.condition(dihedral::indeterminacy_level(&z) == IndeterminacyLevel::NotInE);
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "classify agrees with symbol zero oracle", 0.0);
    let mut r = ctx.rng();
    for i in 0..2 * n {
        let z = if i < n {
            rng::pencil_point(&mut r)
        } else {
            let w: f64 = r.random_range(0.01..std::f64::consts::PI - 0.01);
            point_with_tau(&mut r, c(w.cos(), 0.0))
        };
        let v = dihedral::classify_with(&z, &tol);
        if v.margin > tol.eps_band && v.margin < 1e-6 {
            continue;
        }
        ch.condition(v.tag.in_julia() == symbol_vanishes(&z));
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "closed-form F^n vs iteration (n <= 6)", 1e-8);
    let mut r = ctx.rng();
    for i in 0..n {
        let mut z = rng::pencil_point(&mut r);
        if i % 10 == 0 {
            let v = z.coords();
            z = PencilPoint::new([v[0], v[1], v[2], v[1] * v[2] / v[0]]);
        }
        let p = z.normalized().expect("nonzero");
        let it = orbit(&f, &p, 6);
        for k in 2..=6 {
            match (dihedral::fn_closed(&z, k), it[k - 1].point()) {
                (Ok(img), Some(b)) => match img.point() {
                    Some(a) => ch.residual(proj_distance(&a, &b)),
                    None => ch.condition(false),
                },
                _ => ch.condition(false),
            }
        }
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "f_n(cos w) = cos w - sin w cot(2^(n+1) w)", 1e-9);
    let mut r = ctx.rng();
    for _ in 0..ctx.count(10, 100) {
        let w: f64 = r.random_range(0.05..std::f64::consts::PI - 0.05);
        let z = point_with_tau(&mut r, c(w.cos(), 0.0));
        let Tau::Finite(t) = dihedral::tau(&z) else {
            ch.condition(false);
            continue;
        };
        let w = t.re.clamp(-1.0, 1.0).acos();
        for k in 0..=20usize {
            let closed = w.cos() - w.sin() / (2f64.powi(k as i32 + 1) * w).tan();
            match dihedral::f_partial_with(&z, k, &tol) {
                Ok(v) => ch.residual((v - c(closed, 0.0)).norm() / closed.abs().max(1.0)),
                Err(_) => ch.condition(false),
            }
        }
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "f_60 matches f_limit off the band", 1e-9);
    let mut r = ctx.rng();
    let mut taken = 0;
    while taken < ctx.count(10, 100) {
        let z = rng::pencil_point(&mut r);
        match dihedral::tau(&z) {
            Tau::Finite(t) if cheb::band_distance(t) > 1e-3 => {}
            _ => continue,
        }
        taken += 1;
        match (dihedral::f_partial(&z, 60), dihedral::f_limit(&z)) {
            (Ok(a), Ok(b)) => ch.residual((a - b).norm() / b.norm().max(1.0)),
            _ => ch.condition(false),
        }
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "classify(lambda z) = classify(z)", 0.0);
    let mut r = ctx.rng();
    for i in 0..n {
        let z = if i % 2 == 0 {
            rng::pencil_point(&mut r)
        } else {
            let w: f64 = r.random_range(0.01..std::f64::consts::PI - 0.01);
            point_with_tau(&mut r, c(w.cos(), 0.0))
        };
        let l = rng::nonzero_scalar(&mut r);
        ch.condition(dihedral::classify_with(&z, &tol).tag == dihedral::classify_with(&z.scaled(l), &tol).tag);
    }
    out.push(ch.finish());
}

/// `Γ_n` point with prescribed `z2`, `z3`, `s`: `G_n` is linear in `z0 − z1`.
pub fn gamma_point(n: usize, s: Complex64, z2: Complex64, z3: Complex64) -> PencilPoint {
    let q = 4.0 * z2 * z3;
    let p = cheb::p_sequence(n, s, q);
    let prev = if n == 0 { ScaledValue::ZERO } else { p[n - 1] };
    let d = (prev.scale(q) / p[n]).to_complex();
    PencilPoint::new([(s + d) / 2.0, (s - d) / 2.0, z2, z3])
}

fn lamplighter_suite(ctx: &mut Ctx, out: &mut Vec<CheckResult>) {
    const S: &str = "lamplighter";
    let n = ctx.samples;
    let tol = ctx.tol;

    let mut ch = Check::new(S, "F(z) = (z0 - z1) lift(Q(z))", 1e-10);
    let mut r = ctx.rng();
    for _ in 0..n {
        let z = rng::pencil_point(&mut r);
        let f = lamplighter::f_lamp(&z);
        let q = lamplighter::qn_lift(&z, 1);
        let d = z[0] - z[1];
        let scale = f.iter().map(|x| x.norm()).fold(0.0, f64::max);
        for i in 0..4 {
            ch.residual((f[i] - d * q[i]).norm() / scale);
        }
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "delta recursion vs iterated Q (n <= 30)", 1e-8);
    let mut r = ctx.rng();
    for _ in 0..ctx.count(10, 30) {
        let z = rng::pencil_point(&mut r);
        for k in 1..=30 {
            match (lamplighter::qn_delta_with(&z, k, &tol), lamplighter::q_iterate(&z, k, tol.eps_e)) {
                (QImage::Point(a), QImage::Point(b)) => ch.residual(proj_distance(&a, &b)),
                (QImage::Pole, QImage::Pole) => ch.residual(0.0),
                _ => {}
            }
        }
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "G_k recurrence vs U closed form (k <= 40)", 1e-8);
    let mut r = ctx.rng();
    for _ in 0..n {
        let z = rng::pencil_point(&mut r);
        let g = cheb::g_sequence(40, &z);
        let root = (4.0 * z[2] * z[3]).sqrt();
        let x = (z[0] + z[1]) / (2.0 * root);
        let u = cheb::u_sequence(40, x);
        for k in 0..=40usize {
            let rk = ScaledValue::from_complex(root).powu(k as u64);
            let a = rk * u[k].scale(z[0] - z[1]);
            let b = if k == 0 {
                ScaledValue::ZERO
            } else {
                rk * u[k - 1].scale(root)
            };
            let size = a.abs() + b.abs();
            ch.residual((g[k] - (a - b)).abs().abs_ratio(&size));
        }
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "F^n = prod delta_i^(2^(n-1-i)) lift(Q^n)", 1e-8);
    let mut r = ctx.rng();
    for _ in 0..ctx.count(10, 50) {
        let z = rng::pencil_point(&mut r);
        let mut direct = ScaledLift::new(z.coords());
        for k in 1..=6 {
            direct = direct.apply(&lamplighter::f_map());
            let prod = lamplighter::fn_lift_product(&z, k);
            ch.residual(lift_distance(&direct, &prod));
        }
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "G_201 / G_200 -> dominant root", 1e-8);
    let mut r = ctx.rng();
    let mut taken = 0;
    while taken < ctx.count(10, 100) {
        let z = rng::pencil_point(&mut r);
        let Ok(lim) = lamplighter::ratio_limit_lamp_with(&z, &tol) else {
            continue;
        };
        let other = 4.0 * z[2] * z[3] / lim;
        // geometric convergence at rate |other / lim|
        if other.norm() > 0.9 * lim.norm() {
            continue;
        }
        taken += 1;
        let g = cheb::g_sequence(201, &z);
        ch.residual(rel(g[201].ratio(&g[200]), lim));
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "classify_E(lambda z) = classify_E(z)", 0.0);
    let mut r = ctx.rng();
    for _ in 0..ctx.count(10, 50) {
        let z = rng::pencil_point(&mut r);
        let l = rng::nonzero_scalar(&mut r);
        ch.condition(lamplighter::classify_e_with(&z, &tol).tag == lamplighter::classify_e_with(&z.scaled(l), &tol).tag);
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "[1:3:0:-2] in L, not detected in E", 0.0);
    let w = PencilPoint::real(1.0, 3.0, 0.0, -2.0);
    ch.condition(lamplighter::in_hyperplane_l_with(&w, tol.eps_e));
    let v = lamplighter::classify_e_with(&w, &tol);
    ch.condition(v.tag == LampTag::NotDetected && v.residual > 0.5);
    out.push(ch.finish());

    let mut ch = Check::new(S, "constructed points land in their component", 0.0);
    let mut r = ctx.rng();
    for i in 0..ctx.count(10, 30) {
        let z1 = rng::complex_in(&mut r, 1.0) + 1.5;
        let z2 = rng::complex_in(&mut r, 1.0);
        let z3 = rng::complex_in(&mut r, 1.0);
        let crit = PencilPoint::new([z1 + 2.0 * z2 * z3 / z1, z1, z2, z3]);
        ch.condition(lamplighter::classify_e_with(&crit, &tol).tag == LampTag::CriticalVariety);
        let x: f64 = r.random_range(0.0..=1.0);
        let s = 4.0 * (x * z2 * z3).sqrt();
        let band = PencilPoint::new([s - z1, z1, z2, z3]);
        ch.condition(lamplighter::classify_e_with(&band, &tol).tag == LampTag::Band);
        let k = i % 6;
        let s = c(3.0, 0.0) + rng::complex_in(&mut r, 0.5);
        let g = gamma_point(k, s, z2, z3);
        ch.condition(lamplighter::classify_e_with(&g, &tol).tag == LampTag::GammaCurve(k));
    }
    out.push(ch.finish());
}

/// Relative distance between two lifts, as vectors.
fn lift_distance(a: &ScaledLift, b: &ScaledLift) -> f64 {
    let top = (0..4)
        .map(|i| a.component(i))
        .reduce(|x, y| if y.abs_ratio(&x) > 1.0 { y } else { x })
        .unwrap_or(ScaledValue::ONE);
    if top.is_zero() {
        return if b.is_zero() { 0.0 } else { f64::INFINITY };
    }
    (0..4)
        .map(|i| (a.component(i) - b.component(i)).abs_ratio(&top))
        .fold(0.0, f64::max)
}

/// Relative deviation of `det P_{n+1}(z)` from the level-0 value at
/// `F^{n+1}(z)`, the weighted coordinate sum of the lift.
pub fn level0_chain_deviation(
    spec: &WreathSpec,
    template: &PencilTemplate,
    map: &HomogMap,
    z: &PencilPoint,
    n: usize,
) -> crate::Result<f64> {
    let det = template.matrix(spec, z, n + 1)?.log_det();
    let lift = ScaledLift::new(z.coords()).iterate(map, n + 1);
    let scalar = lift.weighted_sum(template.level0_weights());
    Ok(match det {
        DetValue::Value(v) => ScaledValue::rel_diff(&v, &scalar),
        // singular: the scalar must be negligible against the lift itself
        DetValue::Singular => {
            let top = (0..4)
                .map(|i| lift.component(i))
                .reduce(|x, y| if y.abs_ratio(&x) > 1.0 { y } else { x })
                .unwrap_or(ScaledValue::ONE);
            scalar.abs_ratio(&top)
        }
    })
}

fn selfsim_suite(ctx: &mut Ctx, out: &mut Vec<CheckResult>) {
    const S: &str = "selfsim";
    let groups = [
        ("dihedral", dihedral::wreath_spec(), dihedral::pencil_template(), dihedral::f_map(), ["a", "t"]),
        (
            "lamplighter",
            lamplighter::wreath_spec(),
            lamplighter::pencil_template(),
            lamplighter::f_map(),
            ["a", "b"],
        ),
    ];

    let mut ch = Check::new(S, "generators unitary permutations (n <= 8)", 0.0);
    for (_, spec, _, _, gens) in &groups {
        for n in 0..=8 {
            for g in gens {
                for w in [GroupWord::letter(g), GroupWord::inverse_letter(g)] {
                    let m = selfsim::level_matrix(spec, &w, n).expect("level in range").entries;
                    let size = m.nrows();
                    let unitary = &m * m.adjoint() == nalgebra::DMatrix::identity(size, size);
                    let one_per_row = m.row_iter().all(|row| row.iter().filter(|x| x.norm() != 0.0).count() == 1);
                    ch.condition(unitary && one_per_row);
                }
            }
        }
    }
    out.push(ch.finish());

    let mut ch = Check::new(S, "a^2 = t^2 = 1 and a^-1 b = b^-1 a (n <= 8)", 0.0);
    let word = |s: &str| GroupWord::parse(s).expect("valid word");
    for n in 0..=8 {
        let size = 1 << n;
        let id = nalgebra::DMatrix::<Complex64>::identity(size, size);
        let d = &groups[0].1;
        for w in ["a a", "t t"] {
            ch.condition(selfsim::level_matrix(d, &word(w), n).expect("level").entries == id);
        }
        let l = &groups[1].1;
        let c1 = selfsim::level_matrix(l, &word("a^-1 b"), n).expect("level");
        let c2 = selfsim::level_matrix(l, &word("b^-1 a"), n).expect("level");
        ch.condition(c1 == c2);
    }
    out.push(ch.finish());

    for (gi, name) in [(0usize, "det recursion, dihedral (n <= 5)"), (1, "det recursion, lamplighter (n <= 5)")] {
        let (_, spec, tpl, map, _) = &groups[gi];
        let mut ch = Check::new(S, name, 1e-6);
        let mut r = ctx.rng();
        for n in 1..=5 {
            for _ in 0..ctx.count(50, 10) {
                let z = rng::pencil_point(&mut r);
                match selfsim::verify_det_recursion(spec, tpl, map, &z, n) {
                    Ok(rep) => ch.residual(rep.rel_deviation),
                    Err(_) => ch.condition(false),
                }
            }
        }
        out.push(ch.finish());
    }

    for (gi, name) in [(0usize, "det equals level-0 scalar, dihedral"), (1, "det equals level-0 scalar, lamplighter")] {
        let (_, spec, tpl, map, _) = &groups[gi];
        let mut ch = Check::new(S, name, 1e-6);
        let mut r = ctx.rng();
        for n in 0..=4 {
            for _ in 0..ctx.count(50, 10) {
                let z = rng::pencil_point(&mut r);
                match level0_chain_deviation(spec, tpl, map, &z, n) {
                    Ok(d) => ch.residual(d),
                    Err(_) => ch.condition(false),
                }
            }
        }
        out.push(ch.finish());
    }

    let mut ch = Check::new(S, "Schur complement determinant", 1e-9);
    let mut r = ctx.rng();
    for i in 0..ctx.count(50, 20) {
        let size = 4 + (i % 3) * 2;
        let rand_m = |r: &mut ChaCha8Rng| nalgebra::DMatrix::from_fn(size, size, |_, _| rng::complex_in(r, 1.0));
        let (a, cm) = if i % 2 == 0 {
            let da = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_fn(size, |_, _| rng::complex_in(&mut r, 1.0)));
            let dc = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_fn(size, |_, _| rng::complex_in(&mut r, 1.0)));
            (da, dc)
        } else {
            let m = rand_m(&mut r);
            (m.clone(), m)
        };
        let b = rand_m(&mut r);
        let d = rand_m(&mut r);
        match selfsim::schur_det_check(&a, &b, &cm, &d, 1e-10) {
            Ok(rep) => ch.residual(rep.rel_deviation),
            Err(_) => ch.condition(false),
        }
    }
    out.push(ch.finish());

}
