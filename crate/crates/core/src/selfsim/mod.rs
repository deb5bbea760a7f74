//! Wreath recursions on the binary tree and their level-`n` matrices.
//!
//! A generator `g = (g0, g1)` acts at level `n` as `diag(g0_{n-1}, g1_{n-1})`
//! and `g = (g0, g1)σ` as `[[0, g0_{n-1}], [g1_{n-1}, 0]]`; at level 0 every
//! generator is the `1 × 1` identity. Generator matrices are permutation
//! matrices, so they are kept as permutations until a pencil is assembled.

mod linalg;
mod parse;

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::projgeom::{HomogMap, PencilPoint};

pub use linalg::{log_det, log_det_with, min_singular, schur_det_check, DetValue, SchurReport, EPS_PIVOT};

/// Largest level for which dense matrices are built (4096 × 4096).
pub const N_MAX: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Section {
    Identity,
    /// Index into the state table of a [`WreathSpec`].
    State(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct State {
    name: String,
    sections: [Section; 2],
    swap: bool,
}

/// A validated self-similar generating set together with the inverses of
/// its generators.
///
/// States `0..k` are the generators in declaration order; state `i + k` is
/// the inverse of generator `i`, named `"<name>^-1"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WreathSpec {
    states: Vec<State>,
    generators: usize,
    index: HashMap<String, usize>,
}

impl WreathSpec {
    /// Parses and validates the wreath-recursion text format.
    pub fn parse(text: &str) -> Result<Self> {
        let rules = parse::parse_rules(text)?;
        if rules.is_empty() {
            return Err(Error::Validation("no generators defined".into()));
        }
        let mut index = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            if index.insert(r.name.clone(), i).is_some() {
                return Err(Error::Validation(format!(
                    "generator '{}' defined twice (line {})",
                    r.name, r.line
                )));
            }
        }
        let k = rules.len();
        let mut states = Vec::with_capacity(2 * k);
        for r in &rules {
            if r.sections.len() != 2 {
                return Err(Error::Validation(format!(
                    "generator '{}' has {} sections; only the binary tree is supported",
                    r.name,
                    r.sections.len()
                )));
            }
            let mut sections = [Section::Identity; 2];
            for (slot, name) in sections.iter_mut().zip(&r.sections) {
                *slot = match name.as_str() {
                    "e" => Section::Identity,
                    other => match index.get(other) {
                        Some(&j) => Section::State(j),
                        None => {
                            return Err(Error::Validation(format!(
                                "section '{other}' of '{}' (line {}) is not a generator",
                                r.name, r.line
                            )))
                        }
                    },
                };
            }
            states.push(State {
                name: r.name.clone(),
                sections,
                swap: r.swap,
            });
        }
        // (g^{-1})_u = (g_{g^{-1}(u)})^{-1}: a swap exchanges the sections.
        let inv = |s: Section| match s {
            Section::Identity => Section::Identity,
            Section::State(j) => Section::State(j + k),
        };
        for i in 0..k {
            let g = &states[i];
            let sections = if g.swap {
                [inv(g.sections[1]), inv(g.sections[0])]
            } else {
                [inv(g.sections[0]), inv(g.sections[1])]
            };
            let name = format!("{}^-1", g.name);
            index.insert(name.clone(), i + k);
            states.push(State {
                name,
                sections,
                swap: g.swap,
            });
        }
        Ok(Self {
            states,
            generators: k,
            index,
        })
    }

    pub fn generator_names(&self) -> impl Iterator<Item = &str> {
        self.states[..self.generators].iter().map(|s| s.name.as_str())
    }

    /// State index of a generator or inverse (`"a"`, `"a^-1"`).
    pub fn state(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn inverse(&self, state: usize) -> usize {
        if state < self.generators {
            state + self.generators
        } else {
            state - self.generators
        }
    }

    pub fn sections(&self, state: usize) -> [Section; 2] {
        self.states[state].sections
    }

    pub fn swaps(&self, state: usize) -> bool {
        self.states[state].swap
    }

    /// Permutation images of every state at level `n`: `perm[s][row] = col`
    /// is the single nonzero entry of the level matrix.
    fn level_perms(&self, n: usize) -> Vec<Vec<u32>> {
        let mut perms: Vec<Vec<u32>> = vec![vec![0]; self.states.len()];
        for level in 1..=n {
            let half = 1usize << (level - 1);
            let id: Vec<u32> = (0..half as u32).collect();
            let next = self
                .states
                .iter()
                .map(|st| {
                    let block = |s: Section| match s {
                        Section::Identity => &id,
                        Section::State(j) => &perms[j],
                    };
                    let (top, bottom) = (block(st.sections[0]), block(st.sections[1]));
                    let mut p = Vec::with_capacity(2 * half);
                    let h = half as u32;
                    if st.swap {
                        p.extend(top.iter().map(|&c| c + h));
                        p.extend(bottom.iter().copied());
                    } else {
                        p.extend(top.iter().copied());
                        p.extend(bottom.iter().map(|&c| c + h));
                    }
                    p
                })
                .collect();
            perms = next;
        }
        perms
    }

    fn resolve(&self, word: &GroupWord) -> Result<Vec<usize>> {
        word.letters
            .iter()
            .map(|(name, exp)| {
                let g = self
                    .state(name)
                    .ok_or_else(|| Error::Validation(format!("unknown generator '{name}'")))?;
                Ok(if *exp < 0 { self.inverse(g) } else { g })
            })
            .collect()
    }

    fn word_perm(&self, perms: &[Vec<u32>], letters: &[usize], size: usize) -> Vec<u32> {
        let mut acc: Vec<u32> = (0..size as u32).collect();
        for &g in letters {
            for v in acc.iter_mut() {
                *v = perms[g][*v as usize];
            }
        }
        acc
    }
}

/// A product of generators and inverses, read left to right.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupWord {
    letters: Vec<(String, i8)>,
}

impl GroupWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn letter(name: &str) -> Self {
        Self {
            letters: vec![(name.to_string(), 1)],
        }
    }

    pub fn inverse_letter(name: &str) -> Self {
        Self {
            letters: vec![(name.to_string(), -1)],
        }
    }

    /// Parses words such as `"a a^-1"`, `"a*b^-1"` or `"e"`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for (i, tok) in text
            .split(|c: char| c.is_whitespace() || c == '*' || c == '·')
            .filter(|t| !t.is_empty())
            .enumerate()
        {
            let (name, exp) = match tok.split_once('^') {
                Some((n, "-1")) => (n, -1),
                Some((n, "1")) => (n, 1),
                Some(_) => {
                    return Err(Error::Parse {
                        line: 1,
                        column: i + 1,
                        message: format!("bad exponent in '{tok}'"),
                    })
                }
                None => (tok, 1),
            };
            if name == "e" {
                continue;
            }
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::Parse {
                    line: 1,
                    column: i + 1,
                    message: format!("bad generator name '{tok}'"),
                });
            }
            letters.push((name.to_string(), exp));
        }
        Ok(Self { letters })
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|(n, e)| if *e < 0 { format!("{n}^-1") } else { n.clone() })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Dense `2ⁿ × 2ⁿ` matrix of a group-algebra element at level `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelMatrix {
    pub level: usize,
    pub entries: DMatrix<Complex64>,
}

impl LevelMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn log_det(&self) -> DetValue {
        log_det(&self.entries)
    }

    pub fn min_singular(&self) -> f64 {
        min_singular(&self.entries)
    }

    /// Row-major CSV, each entry written as an `re,im` pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.entries.row_iter() {
            let cells: Vec<String> = row.iter().map(|z| format!("{},{}", z.re, z.im)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn check_level(n: usize) -> Result<()> {
    if n > N_MAX {
        Err(Error::LevelTooLarge { level: n, max: N_MAX })
    } else {
        Ok(())
    }
}

pub fn level_matrix(spec: &WreathSpec, word: &GroupWord, n: usize) -> Result<LevelMatrix> {
    pencil_matrix(spec, &[(Complex64::new(1.0, 0.0), word.clone())], n)
}

/// `Σ coeff_i · level_matrix(word_i)`.
pub fn pencil_matrix(
    spec: &WreathSpec,
    terms: &[(Complex64, GroupWord)],
    n: usize,
) -> Result<LevelMatrix> {
    check_level(n)?;
    let size = 1usize << n;
    let perms = spec.level_perms(n);
    let mut entries = DMatrix::zeros(size, size);
    for (coeff, word) in terms {
        let letters = spec.resolve(word)?;
        let p = spec.word_perm(&perms, &letters, size);
        for (row, &col) in p.iter().enumerate() {
            entries[(row, col as usize)] += *coeff;
        }
    }
    Ok(LevelMatrix { level: n, entries })
}

/// A pencil `Σ z_{index} · word` with coefficients taken from a [`PencilPoint`].
#[derive(Debug, Clone, PartialEq)]
pub struct PencilTemplate {
    pub terms: Vec<(usize, GroupWord)>,
}

impl PencilTemplate {
    pub fn new(terms: Vec<(usize, GroupWord)>) -> Self {
        Self { terms }
    }

    pub fn at(&self, z: &PencilPoint) -> Vec<(Complex64, GroupWord)> {
        self.terms.iter().map(|(i, w)| (z[*i], w.clone())).collect()
    }

    /// Multiplicity of each coefficient: the level-0 pencil is `Σ w_i z_i`.
    pub fn level0_weights(&self) -> [f64; 4] {
        let mut w = [0.0; 4];
        for (i, _) in &self.terms {
            w[*i] += 1.0;
        }
        w
    }

    pub fn matrix(&self, spec: &WreathSpec, z: &PencilPoint, n: usize) -> Result<LevelMatrix> {
        pencil_matrix(spec, &self.at(z), n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetRecursionReport {
    /// Determinant of the level-`n+1` pencil at `z`.
    pub upper: DetValue,
    /// Determinant of the level-`n` pencil at `map(z)`.
    pub lower: DetValue,
    pub rel_deviation: f64,
}

/// Checks `det P_{n+1}(z) = det P_n(map(z))` with dense determinants.
pub fn verify_det_recursion(
    spec: &WreathSpec,
    template: &PencilTemplate,
    map: &HomogMap,
    z: &PencilPoint,
    n: usize,
) -> Result<DetRecursionReport> {
    check_level(n + 1)?;
    let upper = template.matrix(spec, z, n + 1)?.log_det();
    let image = PencilPoint::try_new(map.lift(z.coords()))?;
    let lower = template.matrix(spec, &image, n)?.log_det();
    Ok(DetRecursionReport {
        upper,
        lower,
        rel_deviation: upper.deviation(&lower),
    })
}
