use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use specdyn::dihedral::{self, IndeterminacyLevel, Tau};
use specdyn::lamplighter::{self, LampTag};
use specdyn::projgeom::{apply_homog_with, ScaledLift};
use specdyn::render::{self, Channel, PlaneSpec};
use specdyn::selfsim::{self, DetValue, WreathSpec};
use specdyn::{verify, MapImage, PencilPoint, ProjPoint, ScaledValue, Tolerances};

#[derive(Parser)]
#[command(name = "specdyn", version, about = "Spectral dynamics of the infinite dihedral and lamplighter groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an invariant suite and report every check.
    Verify(VerifyArgs),
    /// Classify a point of P^3 and print a one-line JSON verdict.
    Classify(ClassifyArgs),
    /// Print the orbit of a point under F (dihedral) or Q (lamplighter).
    Orbit(OrbitArgs),
    /// Compare pencil determinants across one step of the renormalization map.
    Detcheck(DetcheckArgs),
    /// Render a real 2-parameter slice of P^3 to PGM, PPM or CSV.
    Render(RenderArgs),
    /// Print the zeros of the Chebyshev polynomial U_n, one per line.
    Zeros(ZerosArgs),
    /// Sample a slice for the lamplighter spectrum conjecture and write CSV.
    Explore(ExploreArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupArg {
    Dihedral,
    Lamplighter,
}

impl From<GroupArg> for render::Group {
    fn from(g: GroupArg) -> Self {
        match g {
            GroupArg::Dihedral => render::Group::Dihedral,
            GroupArg::Lamplighter => render::Group::Lamplighter,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Chebyshev,
    Dihedral,
    Lamplighter,
    Selfsim,
    All,
}

impl From<SuiteArg> for verify::Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Chebyshev => verify::Suite::Chebyshev,
            SuiteArg::Dihedral => verify::Suite::Dihedral,
            SuiteArg::Lamplighter => verify::Suite::Lamplighter,
            SuiteArg::Selfsim => verify::Suite::Selfsim,
            SuiteArg::All => verify::Suite::All,
        }
    }
}

#[derive(Args, Clone, Copy)]
struct TolArgs {
    /// Distance to [-1, 1] still counted as on the band.
    #[arg(long, default_value = "1e-9")]
    eps_band: f64,
    /// Residual threshold for the algebraic sets.
    #[arg(long, default_value = "1e-10")]
    eps_e: f64,
    /// Highest n swept when searching the curves Gamma_n.
    #[arg(long, default_value_t = 200)]
    gamma_nmax: usize,
    /// Threshold for the scale-free G_n residual.
    #[arg(long, default_value = "1e-8")]
    eps_gamma: f64,
}

impl TolArgs {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            eps_band: self.eps_band,
            eps_e: self.eps_e,
            gamma_nmax: self.gamma_nmax,
            eps_gamma: self.eps_gamma,
            ..Tolerances::default()
        }
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct PointArgs {
    /// Complex point as re0,im0,re1,im1,re2,im2,re3,im3.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex8)]
    point: Option<Coords>,
    /// Real point as z0,z1,z2,z3.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_real4)]
    rpoint: Option<Coords>,
}

impl PointArgs {
    fn pencil(&self) -> Result<PencilPoint, Failure> {
        let c = self.point.or(self.rpoint).expect("clap enforces one point flag");
        PencilPoint::try_new(c.0).map_err(|e| Failure::Usage(e.to_string()))
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Base sample count per check.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, value_enum)]
    group: GroupArg,
    #[command(flatten)]
    point: PointArgs,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum StreamFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct OrbitArgs {
    #[arg(long, value_enum)]
    group: GroupArg,
    #[command(flatten)]
    point: PointArgs,
    /// Number of iterates.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: StreamFormat,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args)]
struct DetcheckArgs {
    #[arg(long, value_enum)]
    group: GroupArg,
    #[command(flatten)]
    point: PointArgs,
    /// Level n: compares level n+1 at z with level n at F(z).
    #[arg(long, value_parser = clap::value_parser!(u64).range(0..selfsim::N_MAX as u64))]
    level: u64,
    /// Largest relative deviation accepted as agreement.
    #[arg(long, default_value = "1e-6")]
    max_deviation: f64,
    /// Scalar below this fraction of the lift counts as zero.
    #[arg(long, default_value = "1e-10")]
    eps_e: f64,
}

#[derive(Args)]
struct PlaneArgs {
    /// Base point, 4 reals or 8 reals (re/im pairs).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_coords)]
    base: Coords,
    /// First direction, 4 or 8 reals.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_coords)]
    u: Coords,
    /// Second direction, 4 or 8 reals.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_coords)]
    v: Coords,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range, default_value = "-1,1")]
    s_range: (f64, f64),
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range, default_value = "-1,1")]
    t_range: (f64, f64),
    #[arg(long, default_value_t = 256)]
    width: usize,
    #[arg(long, default_value_t = 256)]
    height: usize,
}

impl PlaneArgs {
    fn plane(&self) -> Result<PlaneSpec, Failure> {
        PlaneSpec::new(
            self.base.0,
            self.u.0,
            self.v.0,
            self.s_range,
            self.t_range,
            (self.width, self.height),
        )
        .map_err(|e| Failure::Usage(e.to_string()))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelArg {
    Margin,
    SigmaMin,
}

#[derive(Clone, Copy, ValueEnum)]
enum ImageFormat {
    Pgm,
    Ppm,
    Csv,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, value_enum)]
    group: GroupArg,
    #[command(flatten)]
    plane: PlaneArgs,
    #[arg(long, value_enum, default_value = "margin")]
    channel: ChannelArg,
    /// Pencil level for the sigma-min channel.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(0..=selfsim::N_MAX as u64))]
    level: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "pgm")]
    format: ImageFormat,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args)]
struct ZerosArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=10_000))]
    n: u64,
}

#[derive(Args)]
struct ExploreArgs {
    #[command(flatten)]
    plane: PlaneArgs,
    /// Pencil level whose smallest singular value is sampled.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(0..=selfsim::N_MAX as u64))]
    level: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Clone, Copy)]
struct Coords([Complex64; 4]);

fn parse_reals(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| {
            let x = x.trim();
            x.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("'{x}' is not a finite number"))
        })
        .collect()
}

fn parse_coords(s: &str) -> Result<Coords, String> {
    let v = parse_reals(s)?;
    match v.len() {
        4 => Ok(Coords(std::array::from_fn(|k| Complex64::new(v[k], 0.0)))),
        8 => Ok(Coords(std::array::from_fn(|k| Complex64::new(v[2 * k], v[2 * k + 1])))),
        n => Err(format!("expected 4 or 8 numbers, got {n}")),
    }
}

fn parse_complex8(s: &str) -> Result<Coords, String> {
    let n = s.split(',').count();
    if n != 8 {
        return Err(format!("expected 8 numbers, got {n}"));
    }
    parse_coords(s)
}

fn parse_real4(s: &str) -> Result<Coords, String> {
    let n = s.split(',').count();
    if n != 4 {
        return Err(format!("expected 4 numbers, got {n}"));
    }
    parse_coords(s)
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    match parse_reals(s)?.as_slice() {
        &[a, b] => Ok((a, b)),
        v => Err(format!("expected 2 numbers, got {}", v.len())),
    }
}

enum Failure {
    Usage(String),
    Io(String),
}

impl Failure {
    fn io(path: &Path, err: io::Error) -> Self {
        Failure::Io(format!("{}: {err}", path.display()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode, Failure> {
    match cmd {
        Command::Verify(a) => cmd_verify(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Orbit(a) => cmd_orbit(a),
        Command::Detcheck(a) => cmd_detcheck(a),
        Command::Render(a) => cmd_render(a),
        Command::Zeros(a) => cmd_zeros(a),
        Command::Explore(a) => cmd_explore(a),
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn emit(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::Io(format!("<stdout>: {e}")))
}

fn cmd_verify(a: VerifyArgs) -> Result<ExitCode, Failure> {
    let tol = a.tol.tolerances();
    let report = verify::run(a.suite.into(), a.seed, a.samples, &tol);
    emit(&format!("{report}\n"))?;
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn complex_json(z: Complex64) -> Value {
    if z.re.is_finite() && z.im.is_finite() {
        json!([z.re, z.im])
    } else {
        Value::Null
    }
}

fn point_json(p: &ProjPoint) -> Value {
    let flat: Vec<f64> = p.coords().iter().flat_map(|c| [c.re, c.im]).collect();
    json!(flat)
}

fn tau_json(t: &Tau) -> Value {
    match t {
        Tau::Finite(c) => complex_json(*c),
        Tau::Infinity => json!("infinity"),
        Tau::UndefinedOnE => Value::Null,
    }
}

fn tol_json(t: &Tolerances) -> Value {
    json!({
        "eps_zero": t.eps_zero,
        "eps_proj": t.eps_proj,
        "eps_band": t.eps_band,
        "eps_e": t.eps_e,
        "eps_gamma": t.eps_gamma,
        "gamma_nmax": t.gamma_nmax,
    })
}

fn cmd_classify(a: ClassifyArgs) -> Result<ExitCode, Failure> {
    let z = a.point.pencil()?;
    let tol = a.tol.tolerances();
    let point = z.normalized().as_ref().map(point_json).unwrap_or(Value::Null);
    let out = match a.group {
        GroupArg::Dihedral => {
            let v = dihedral::classify_with(&z, &tol);
            let (r1, r2) = dihedral::e_residuals(&z);
            let level = match dihedral::indeterminacy_level_with(&z, tol.eps_e) {
                IndeterminacyLevel::I1 => "I1",
                IndeterminacyLevel::I2Only => "I2",
                IndeterminacyLevel::NotInE => "none",
            };
            json!({
                "verdict": v.tag.name(),
                "tau": tau_json(&v.tau),
                "margin": v.margin,
                "in_julia": v.tag.in_julia(),
                "indeterminacy": level,
                "e_residuals": [r1, r2],
                "point": point,
                "tolerances": tol_json(&tol),
            })
        }
        GroupArg::Lamplighter => {
            let v = lamplighter::classify_e_with(&z, &tol);
            let gamma = match v.tag {
                LampTag::GammaCurve(n) => json!(n),
                _ => Value::Null,
            };
            json!({
                "verdict": v.tag.name(),
                "gamma_n": gamma,
                "in_L": lamplighter::in_hyperplane_l_with(&z, tol.eps_e),
                "spectrum_lower": lamplighter::spectrum_lower_member(&z, &tol),
                "tau_sq": v.tau_sq.map(complex_json).unwrap_or(Value::Null),
                "residual": v.residual,
                "critical_residual": lamplighter::critical_residual(&z),
                "l_residual": lamplighter::l_residual(&z),
                "point": point,
                "tolerances": tol_json(&tol),
            })
        }
    };
    emit(&format!("{out}\n"))?;
    Ok(ExitCode::SUCCESS)
}

/// One orbit step: `None` for the point means the map is undefined there.
struct OrbitRow {
    point: Option<ProjPoint>,
    side: Value,
    side_csv: (String, String),
}

fn complex_csv(z: Complex64) -> (String, String) {
    (z.re.to_string(), z.im.to_string())
}

fn dihedral_orbit(z: &PencilPoint, n: usize, tol: &Tolerances) -> Vec<OrbitRow> {
    let map = dihedral::f_map();
    let mut rows = Vec::new();
    let mut cur = z.normalized();
    for _ in 0..n {
        let next = cur.and_then(|p| {
            if dihedral::indeterminacy_level_with(&p.as_pencil(), tol.eps_e) == IndeterminacyLevel::I1 {
                return None;
            }
            match apply_homog_with(&map, &p, tol.eps_zero) {
                MapImage::Point(q) => Some(q),
                MapImage::Indeterminate => None,
            }
        });
        let Some(q) = next else {
            rows.push(OrbitRow {
                point: None,
                side: Value::Null,
                side_csv: (String::new(), String::new()),
            });
            break;
        };
        let tau = dihedral::tau_with(&q.as_pencil(), tol.eps_e);
        let side_csv = match tau {
            Tau::Finite(c) => complex_csv(c),
            Tau::Infinity => ("inf".into(), "0".into()),
            Tau::UndefinedOnE => (String::new(), String::new()),
        };
        rows.push(OrbitRow {
            point: Some(q),
            side: tau_json(&tau),
            side_csv,
        });
        cur = Some(q);
    }
    rows
}

fn lamp_orbit(z: &PencilPoint, n: usize, tol: &Tolerances) -> Vec<OrbitRow> {
    let deltas = lamplighter::deltas(z, n);
    let mut rows = Vec::new();
    let mut cur = z.normalized();
    for &d in &deltas[1..] {
        let next = cur.and_then(|p| lamplighter::q_lamp_with(&p.as_pencil(), tol.eps_e).point());
        let Some(q) = next else {
            rows.push(OrbitRow {
                point: None,
                side: Value::Null,
                side_csv: (String::new(), String::new()),
            });
            break;
        };
        rows.push(OrbitRow {
            point: Some(q),
            side: complex_json(d),
            side_csv: complex_csv(d),
        });
        cur = Some(q);
    }
    rows
}

fn cmd_orbit(a: OrbitArgs) -> Result<ExitCode, Failure> {
    let z = a.point.pencil()?;
    let tol = a.tol.tolerances();
    let n = a.n as usize;
    let (rows, side) = match a.group {
        GroupArg::Dihedral => (dihedral_orbit(&z, n, &tol), "tau"),
        GroupArg::Lamplighter => (lamp_orbit(&z, n, &tol), "delta"),
    };
    let mut text = String::new();
    match a.format {
        StreamFormat::Json => {
            for (k, r) in rows.iter().enumerate() {
                let mut obj = serde_json::Map::new();
                obj.insert("k".into(), json!(k + 1));
                obj.insert("point".into(), r.point.as_ref().map(point_json).unwrap_or(Value::Null));
                obj.insert(side.into(), r.side.clone());
                obj.insert("indeterminate".into(), json!(r.point.is_none()));
                text.push_str(&Value::Object(obj).to_string());
                text.push('\n');
            }
        }
        StreamFormat::Csv => {
            text.push_str(&format!(
                "k,re0,im0,re1,im1,re2,im2,re3,im3,{side}_re,{side}_im,indeterminate\n"
            ));
            for (k, r) in rows.iter().enumerate() {
                let coords = match &r.point {
                    Some(p) => p
                        .coords()
                        .iter()
                        .flat_map(|c| [c.re.to_string(), c.im.to_string()])
                        .collect::<Vec<_>>()
                        .join(","),
                    None => ",,,,,,,".into(),
                };
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    k + 1,
                    coords,
                    r.side_csv.0,
                    r.side_csv.1,
                    r.point.is_none()
                ));
            }
        }
    }
    emit(&text)?;
    Ok(ExitCode::SUCCESS)
}

fn det_text(d: &DetValue) -> String {
    match d {
        DetValue::Value(v) => format!("log|det| = {:.12e}  arg = {:.12}", v.ln_abs(), v.arg()),
        DetValue::Singular => "singular".into(),
    }
}

fn cmd_detcheck(a: DetcheckArgs) -> Result<ExitCode, Failure> {
    let z = a.point.pencil()?;
    let n = a.level as usize;
    let (spec, tpl, map): (WreathSpec, _, _) = match a.group {
        GroupArg::Dihedral => (dihedral::wreath_spec(), dihedral::pencil_template(), dihedral::f_map()),
        GroupArg::Lamplighter => (
            lamplighter::wreath_spec(),
            lamplighter::pencil_template(),
            lamplighter::f_map(),
        ),
    };
    let usage = |e: specdyn::Error| Failure::Usage(e.to_string());
    let rec = selfsim::verify_det_recursion(&spec, &tpl, &map, &z, n).map_err(usage)?;
    let chain = verify::level0_chain_deviation(&spec, &tpl, &map, &z, n).map_err(usage)?;

    let lift = ScaledLift::new(z.coords()).iterate(&map, n + 1);
    let scalar = lift.weighted_sum(tpl.level0_weights());
    let top = (0..4)
        .map(|i| lift.component(i))
        .reduce(|x, y| if y.abs_ratio(&x) > 1.0 { y } else { x })
        .unwrap_or(ScaledValue::ONE);
    let relative = scalar.abs_ratio(&top);
    let scalar_text = if relative < a.eps_e || scalar.is_zero() {
        format!("~0 (relative {relative:.3e}), singular chain")
    } else {
        format!("log|s| = {:.12e}  arg = {:.12}", scalar.ln_abs(), scalar.arg())
    };

    let agree = rec.rel_deviation <= a.max_deviation && chain <= a.max_deviation;
    let g = render::Group::from(a.group).name();
    let n1 = n + 1;
    let lines = [
        (format!("level {n1} at z"), det_text(&rec.upper)),
        (format!("level {n} at F(z)"), det_text(&rec.lower)),
        (format!("level 0 at F^{n1}(z)"), scalar_text),
        (format!("deviation level {n1} vs level {n}"), format!("{:.3e}", rec.rel_deviation)),
        (format!("deviation level {n1} vs level 0"), format!("{chain:.3e}")),
    ];
    let mut report = format!("group {g} level {n}\n");
    let width = lines.iter().map(|(l, _)| l.len()).max().unwrap_or(0) + 2;
    for (label, value) in lines {
        report.push_str(&format!("{label:<width$}{value}\n"));
    }
    report.push_str(if agree { "AGREE\n" } else { "DISAGREE\n" });
    emit(&report)?;
    Ok(if agree { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::io(path, e))
}

fn cmd_render(a: RenderArgs) -> Result<ExitCode, Failure> {
    let plane = a.plane.plane()?;
    let tol = a.tol.tolerances();
    let channel = match a.channel {
        ChannelArg::Margin => Channel::Margin,
        ChannelArg::SigmaMin => Channel::SigmaMin(a.level as usize),
    };
    let group = a.group.into();
    let out = with_threads(a.threads, || render::render(group, &plane, channel, &tol))?
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let bytes = match a.format {
        ImageFormat::Pgm => out.to_pgm(),
        ImageFormat::Ppm => out.to_ppm(),
        ImageFormat::Csv => out.to_csv().into_bytes(),
    };
    write_file(&a.out, &bytes)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_zeros(a: ZerosArgs) -> Result<ExitCode, Failure> {
    let mut text = String::new();
    for x in specdyn::cheb::u_zeros(a.n as usize) {
        text.push_str(&format!("{x}\n"));
    }
    emit(&text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_explore(a: ExploreArgs) -> Result<ExitCode, Failure> {
    let plane = a.plane.plane()?;
    let tol = a.tol.tolerances();
    let level = a.level as usize;
    let rows = with_threads(a.threads, || lamplighter::explore_conjecture(&plane, level, &tol))?
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let csv = lamplighter::explore_csv(&rows);
    match &a.out {
        Some(path) => write_file(path, csv.as_bytes())?,
        None => emit(&csv)?,
    }
    Ok(ExitCode::SUCCESS)
}
