//! Named geometries and the scenario file format.
//!
//! A scenario is a coframe given by symbolic structure functions over a list
//! of coordinates and parameters, plus a structure 4-form written in that
//! coframe. Coordinates are acted on by the frame vectors; parameters are
//! constant in space and only enter through the structure form or the
//! structure functions (flows differentiate with respect to them).
//!
//! File format (JSON):
//!
//! ```json
//! {
//!   "name": "example",
//!   "kind": "qk",
//!   "active_coords": ["x1"],
//!   "parameters": [{"name": "f", "default": 0.5}],
//!   "coefficient_functions": {"F": "2 + sin(x1)"},
//!   "structure_constants": [{"i": 2, "j": 1, "k": 2, "coeff": "-diff(F, x1)/F^2"}],
//!   "frame_action": [{"k": 1, "coord": "x1", "coeff": "1/F"}],
//!   "structure_form": "standard",
//!   "domain": {"x1": [0, 6.28]}
//! }
//! ```
//!
//! `coeff` entries are expressions (see [`crate::expr`]); `c^i_{jk}` may be
//! given for either order of `j, k`, and if both orders are given they must
//! be opposite. `structure_form` is `"standard"`, `{"triple": [ω₁, ω₂, ω₃]}`
//! or `{"terms": [...]}` with terms `{"idx": [..], "coeff": expr}`.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use nalgebra::Matrix3;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Analytic, Expr};
use crate::exterior::{mask_of, Form, DIM};
use crate::geometry::{Frame, Geometry};
use crate::jet::Jet;
use crate::scalar::{CRational, Rational, Scalar};
use crate::structures::{metric_from_form, StructureKind};

pub mod expected;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub default: f64,
}

/// `c^i_{jk}` (1-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureConstant {
    pub i: u8,
    pub j: u8,
    pub k: u8,
    pub coeff: Expr,
}

/// `E_k(coord) = coeff` (1-based `k`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameAction {
    pub k: u8,
    pub coord: String,
    pub coeff: Expr,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub idx: Vec<u8>,
    pub coeff: Expr,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormSpec {
    /// The model form of the scenario's kind, constant in the coframe.
    Standard,
    /// `½(±ω₁∧ω₁ + ω₂∧ω₂ + ω₃∧ω₃)` (sign `+` for QK, `−` for Spin(7)).
    Triple(Vec<Vec<Term>>),
    Terms(Vec<Term>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default = "default_kind")]
    pub kind: StructureKind,
    #[serde(default)]
    pub active_coords: Vec<String>,
    #[serde(default)]
    pub parameters: Vec<Param>,
    /// Named helper expressions, inlined when a file is loaded.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub coefficient_functions: BTreeMap<String, Expr>,
    #[serde(default)]
    pub structure_constants: Vec<StructureConstant>,
    #[serde(default)]
    pub frame_action: Vec<FrameAction>,
    #[serde(default = "default_form")]
    pub structure_form: FormSpec,
    /// Sampling box per variable, used by validation and random checks.
    #[serde(default)]
    pub domain: BTreeMap<String, [f64; 2]>,
}

fn default_kind() -> StructureKind {
    StructureKind::QK
}

fn default_form() -> FormSpec {
    FormSpec::Standard
}

/// Conformal factors of the built-in conformal scenarios.
pub const TORUS_FACTOR: &str = "2 + sin(x1)";
pub const HH2_FACTOR: &str = "1 + s^2/4";

pub const BUILTIN_NAMES: [&str; 5] = ["torus_conformal", "hh2_conformal", "hh2_rotated", "su3", "euclid_soliton"];

/// Names and one-line descriptions of the built-in scenarios.
pub fn list() -> Vec<(&'static str, String)> {
    BUILTIN_NAMES.iter().map(|n| (*n, builtin(n).expect("built-in").description)).collect()
}

pub fn builtin(name: &str) -> Result<Scenario> {
    match name {
        "torus_conformal" => Ok(torus_conformal(Expr::parse(TORUS_FACTOR)?, StructureKind::QK)),
        "hh2_conformal" => Ok(hh2_conformal(Expr::parse(HH2_FACTOR)?)),
        "hh2_rotated" => Ok(hh2_rotated()),
        "su3" => Ok(su3()),
        "euclid_soliton" => Ok(euclid_soliton()),
        _ => Err(Error::UnknownScenario { name: name.to_string(), valid: BUILTIN_NAMES.join(", ") }),
    }
}

/// A built-in name or a path to a scenario file.
pub fn resolve(name_or_path: &str) -> Result<Scenario> {
    if BUILTIN_NAMES.contains(&name_or_path) {
        return builtin(name_or_path);
    }
    if Path::new(name_or_path).exists() {
        return load(name_or_path);
    }
    builtin(name_or_path)
}

fn sc(i: u8, j: u8, k: u8, coeff: Expr) -> StructureConstant {
    StructureConstant { i, j, k, coeff }
}

fn term(idx: [u8; 2], coeff: Expr) -> Term {
    Term { idx: idx.to_vec(), coeff }
}

fn num(n: i64) -> Expr {
    Expr::num(n)
}

/// `e^i = F(x₁) dx_i` on the torus, with the model form constant in the
/// coframe (a conformally flat structure `F⁴ξ₀`).
pub fn torus_conformal(f: Expr, kind: StructureKind) -> Scenario {
    let df = f.diff("x1");
    // de^i = (F'/F²) e^{1i}
    let c = -df / Expr::pow(f.clone(), num(2));
    Scenario {
        name: "torus_conformal".into(),
        description: format!("conformally flat structure F(x1)^4 ξ0 on the flat torus, F = {f}"),
        kind,
        active_coords: vec!["x1".into()],
        parameters: vec![],
        coefficient_functions: BTreeMap::new(),
        structure_constants: (2..=8).map(|i| sc(i, 1, i, c.clone())).collect(),
        frame_action: vec![FrameAction { k: 1, coord: "x1".into(), coeff: num(1) / f }],
        structure_form: FormSpec::Standard,
        domain: BTreeMap::from([("x1".to_string(), [0.0, 2.0 * std::f64::consts::PI])]),
    }
}

/// Conformal rescalings `F(s)² g` of the quaternionic hyperbolic metric in
/// its cohomogeneity-one form, `s < 1`.
pub fn hh2_conformal(f: Expr) -> Scenario {
    let s = Expr::var("s");
    let one_minus = num(1) - s;
    let df = f.diff("s");
    let f2 = Expr::pow(f.clone(), num(2));
    let common = num(4) * one_minus.clone() * df / f2;
    let g1 = common.clone() + num(1) / f.clone();
    let g2 = common + num(2) / f.clone();
    let g3 = num(2) / f.clone();
    let mut constants: Vec<StructureConstant> = (1..=4).map(|i| sc(i, i, 5, g1.clone())).collect();
    constants.extend((6..=8).map(|i| sc(i, 5, i, -g2.clone())));
    constants.extend([
        sc(6, 1, 2, -g3.clone()),
        sc(6, 3, 4, -g3.clone()),
        sc(7, 1, 3, -g3.clone()),
        sc(7, 2, 4, g3.clone()),
        sc(8, 1, 4, -g3.clone()),
        sc(8, 2, 3, -g3),
    ]);
    Scenario {
        name: "hh2_conformal".into(),
        description: format!("conformal rescaling F(s)^2 of the quaternionic hyperbolic plane (cohomogeneity one), F = {f}"),
        kind: StructureKind::QK,
        active_coords: vec!["s".into()],
        parameters: vec![],
        coefficient_functions: BTreeMap::new(),
        structure_constants: constants,
        // e^5 = F/(4(1−s)) ds
        frame_action: vec![FrameAction { k: 5, coord: "s".into(), coeff: num(4) * one_minus / f }],
        structure_form: FormSpec::Standard,
        domain: BTreeMap::from([("s".to_string(), [-1.5, 0.5])]),
    }
}

/// Solvable-group presentation of the quaternionic hyperbolic plane with the
/// family obtained by rotating `E⁵, E⁶` by the angle `phi`
/// (`a = sin phi`, `b = cos phi`).
pub fn hh2_rotated() -> Scenario {
    // (i, [(coeff, j, k)]) for dE^i = Σ coeff E^{jk}
    let table: [(u8, &[(i64, u8, u8)]); 7] = [
        (1, &[(-1, 1, 8)]),
        (2, &[(-1, 2, 8)]),
        (3, &[(-1, 3, 8)]),
        (4, &[(-1, 4, 8)]),
        (5, &[(-2, 1, 3), (2, 2, 4), (-2, 5, 8)]),
        (6, &[(-2, 1, 4), (-2, 2, 3), (-2, 6, 8)]),
        (7, &[(2, 1, 2), (2, 3, 4), (-2, 7, 8)]),
    ];
    let constants = table
        .iter()
        .flat_map(|(i, terms)| terms.iter().map(move |(c, j, k)| sc(*i, *j, *k, num(-c))))
        .collect();
    let a = Expr::sin(Expr::var("phi"));
    let b = Expr::cos(Expr::var("phi"));
    let one = || num(1);
    let triple = vec![
        vec![term([1, 2], one()), term([3, 4], one()), term([5, 6], one()), term([7, 8], num(-1))],
        vec![
            term([1, 3], one()),
            term([2, 4], num(-1)),
            term([5, 8], b.clone()),
            term([6, 8], a.clone()),
            term([5, 7], a.clone()),
            term([6, 7], -b.clone()),
        ],
        vec![
            term([1, 4], one()),
            term([2, 3], one()),
            term([5, 7], b.clone()),
            term([6, 7], a.clone()),
            term([5, 8], -a),
            term([6, 8], b),
        ],
    ];
    Scenario {
        name: "hh2_rotated".into(),
        description: "quaternionic hyperbolic plane as a solvable group, E5/E6 rotated by phi (a = sin phi)".into(),
        kind: StructureKind::QK,
        active_coords: vec![],
        parameters: vec![Param { name: "phi".into(), default: 0.3f64.asin() }],
        coefficient_functions: BTreeMap::new(),
        structure_constants: constants,
        frame_action: vec![],
        structure_form: FormSpec::Triple(triple),
        domain: BTreeMap::from([("phi".to_string(), [0.0, std::f64::consts::FRAC_PI_2])]),
    }
}

type CMat = Matrix3<CRational>;

/// Coefficient matrices `M_i` of `θ_i` in the Maurer–Cartan form of SU(3).
pub fn su3_mc_basis() -> Vec<CMat> {
    let z = |re: i64, im: i64| CRational::new(Rational::from_i64(re), Rational::from_i64(im));
    let mut out = Vec::new();
    let entries: [&[(usize, usize, (i64, i64))]; 8] = [
        &[(0, 0, (0, 1)), (1, 1, (0, 1)), (2, 2, (0, -2))],
        &[(0, 0, (0, 1)), (1, 1, (0, -1))],
        &[(0, 1, (0, 1)), (1, 0, (0, 1))],
        &[(0, 1, (-1, 0)), (1, 0, (1, 0))],
        &[(0, 2, (1, 0)), (2, 0, (-1, 0))],
        &[(0, 2, (0, 1)), (2, 0, (0, 1))],
        &[(1, 2, (0, 1)), (2, 1, (0, 1))],
        &[(1, 2, (1, 0)), (2, 1, (-1, 0))],
    ];
    for list in entries {
        let mut m = CMat::from_element(z(0, 0));
        for &(r, c, (re, im)) in list {
            m[(r, c)] = z(re, im);
        }
        out.push(m);
    }
    out
}

/// Reads the coefficients `θ_k` off an element of su(3) written in the
/// Maurer–Cartan pattern.
pub fn su3_read_off(m: &CMat) -> [Rational; 8] {
    let half = Rational::new(1.into(), 2.into());
    let t1 = -(m[(2, 2)].im.clone() * half);
    [
        t1.clone(),
        m[(0, 0)].im.clone() - t1,
        m[(0, 1)].im.clone(),
        -m[(0, 1)].re.clone(),
        m[(0, 2)].re.clone(),
        m[(0, 2)].im.clone(),
        m[(1, 2)].im.clone(),
        m[(1, 2)].re.clone(),
    ]
}

/// `c^k_{ij}` for SU(3) from `dθ = −θ∧θ`: `c^k_{ij} = θ_k([M_i, M_j])`.
pub fn su3_structure_constants() -> Vec<(u8, u8, u8, Rational)> {
    let m = su3_mc_basis();
    let mut out = Vec::new();
    for i in 0..DIM {
        for j in (i + 1)..DIM {
            let bracket = &m[i] * &m[j] - &m[j] * &m[i];
            for (k, c) in su3_read_off(&bracket).into_iter().enumerate() {
                if !Zero::is_zero(&c) {
                    out.push((k as u8 + 1, i as u8 + 1, j as u8 + 1, c));
                }
            }
        }
    }
    out
}

/// SU(3) with its left-invariant metric and the family of structures
/// rotated by the constant angle `f`.
pub fn su3() -> Scenario {
    let constants = su3_structure_constants().into_iter().map(|(k, i, j, c)| sc(k, i, j, Expr::Num(c))).collect();
    let (c, s) = (Expr::cos(Expr::var("f")), Expr::sin(Expr::var("f")));
    let one = || num(1);
    let triple = vec![
        vec![term([1, 2], one()), term([3, 4], one()), term([5, 6], one()), term([7, 8], one())],
        vec![
            term([1, 3], c.clone()),
            term([1, 4], s.clone()),
            term([2, 3], s.clone()),
            term([2, 4], -c.clone()),
            term([5, 7], one()),
            term([6, 8], num(-1)),
        ],
        vec![
            term([1, 3], -s.clone()),
            term([1, 4], c.clone()),
            term([2, 3], c),
            term([2, 4], s),
            term([5, 8], one()),
            term([6, 7], one()),
        ],
    ];
    Scenario {
        name: "su3".into(),
        description: "SU(3) with a left-invariant metric and the structures rotated by the angle f".into(),
        kind: StructureKind::QK,
        active_coords: vec![],
        parameters: vec![Param { name: "f".into(), default: 0.7 }],
        coefficient_functions: BTreeMap::new(),
        structure_constants: constants,
        frame_action: vec![],
        structure_form: FormSpec::Triple(triple),
        domain: BTreeMap::from([("f".to_string(), [0.0, std::f64::consts::PI])]),
    }
}

/// The su3 triple `(ω₁, ω₂, ω₃)` with `cos f`, `sin f` given directly, so
/// exact fields can be used at points of the unit circle.
pub fn su3_triple<S: Scalar>(c: S, s: S) -> [Form<S>; 3] {
    let e = |a: usize, b: usize| Form::<S>::dx(a).wedge(&Form::dx(b));
    let w1 = e(1, 2) + e(3, 4) + e(5, 6) + e(7, 8);
    let w2 = e(1, 3).scale(&c) + e(1, 4).scale(&s) + e(2, 3).scale(&s) - e(2, 4).scale(&c) + e(5, 7) - e(6, 8);
    let w3 = e(1, 4).scale(&c) - e(1, 3).scale(&s) + e(2, 3).scale(&c) + e(2, 4).scale(&s) + e(5, 8) + e(6, 7);
    [w1, w2, w3]
}

/// Euclidean ℝ⁸ with `dx₁, dx₂` rotated by the angle `exp(x₁)`; the model
/// form is constant in the rotated coframe.
pub fn euclid_soliton() -> Scenario {
    euclid_soliton_with(StructureKind::QK)
}

pub fn euclid_soliton_with(kind: StructureKind) -> Scenario {
    let psi = Expr::exp(Expr::var("x1"));
    let dpsi = psi.diff("x1");
    let (c, s) = (Expr::cos(psi.clone()), Expr::sin(psi));
    Scenario {
        name: "euclid_soliton".into(),
        description: "Euclidean R^8 with dx1, dx2 rotated by exp(x1): a steady soliton".into(),
        kind,
        active_coords: vec!["x1".into()],
        parameters: vec![],
        coefficient_functions: BTreeMap::new(),
        structure_constants: vec![sc(1, 1, 2, -dpsi.clone() * c.clone()), sc(2, 1, 2, dpsi * s.clone())],
        frame_action: vec![
            FrameAction { k: 1, coord: "x1".into(), coeff: c },
            FrameAction { k: 2, coord: "x1".into(), coeff: -s },
        ],
        structure_form: FormSpec::Standard,
        domain: BTreeMap::from([("x1".to_string(), [-1.0, 1.0])]),
    }
}

/// Reads, inlines and validates a scenario file.
pub fn load(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path.as_ref())?;
    from_json_str(&text)
}

pub fn from_json_str(text: &str) -> Result<Scenario> {
    let raw: Scenario = serde_json::from_str(text).map_err(|e| Error::parse(format!("line {}", e.line()), e.to_string()))?;
    raw.prepared()
}

impl Scenario {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario JSON is always serializable")
    }

    /// Coordinates followed by parameters.
    pub fn variables(&self) -> Vec<String> {
        self.active_coords.iter().cloned().chain(self.parameters.iter().map(|p| p.name.clone())).collect()
    }

    pub fn n_coords(&self) -> usize {
        self.active_coords.len()
    }

    pub fn n_params(&self) -> usize {
        self.parameters.len()
    }

    pub fn default_params(&self) -> Vec<f64> {
        self.parameters.iter().map(|p| p.default).collect()
    }

    /// Homogeneous scenarios have no active coordinates.
    pub fn is_homogeneous(&self) -> bool {
        self.active_coords.is_empty()
    }

    pub fn domain_of(&self, var: &str) -> [f64; 2] {
        self.domain.get(var).copied().unwrap_or([-0.5, 0.5])
    }

    /// A random coordinate point inside the domain.
    pub fn sample_coords(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.active_coords
            .iter()
            .map(|c| {
                let [lo, hi] = self.domain_of(c);
                rng.random_range(lo..=hi)
            })
            .collect()
    }

    /// Inlines coefficient functions, normalizes structure constants to
    /// `j < k`, and validates.
    pub fn prepared(mut self) -> Result<Scenario> {
        self.inline_functions()?;
        self.check_names()?;
        self.normalize_constants()?;
        self.validate(5, 0x5eed)?;
        Ok(self)
    }

    fn inline_functions(&mut self) -> Result<()> {
        if self.coefficient_functions.is_empty() {
            return Ok(());
        }
        // Functions may refer to earlier ones; substitute to a fixed point.
        let mut defs: HashMap<String, Expr> = self.coefficient_functions.clone().into_iter().collect();
        for _ in 0..=defs.len() {
            let snapshot = defs.clone();
            for v in defs.values_mut() {
                *v = v.substitute(&snapshot);
            }
        }
        for (name, e) in &defs {
            if e.variables().iter().any(|v| defs.contains_key(v)) {
                return Err(Error::validation(format!("coefficient_functions.{name}"), "circular definition"));
            }
        }
        for c in &mut self.structure_constants {
            c.coeff = c.coeff.substitute(&defs);
        }
        for a in &mut self.frame_action {
            a.coeff = a.coeff.substitute(&defs);
        }
        match &mut self.structure_form {
            FormSpec::Standard => {}
            FormSpec::Terms(ts) => ts.iter_mut().for_each(|t| t.coeff = t.coeff.substitute(&defs)),
            FormSpec::Triple(ws) => ws.iter_mut().flatten().for_each(|t| t.coeff = t.coeff.substitute(&defs)),
        }
        self.coefficient_functions.clear();
        Ok(())
    }

    fn check_names(&self) -> Result<()> {
        let vars = self.variables();
        let mut sorted = vars.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != vars.len() {
            return Err(Error::validation("active_coords/parameters", "duplicate variable name"));
        }
        let check_expr = |e: &Expr, at: String| -> Result<()> {
            for v in e.variables() {
                if !vars.contains(&v) {
                    return Err(Error::validation(at, format!("unknown variable '{v}'")));
                }
            }
            Ok(())
        };
        for (n, c) in self.structure_constants.iter().enumerate() {
            let at = format!("structure_constants[{n}]");
            for x in [c.i, c.j, c.k] {
                if !(1..=8).contains(&x) {
                    return Err(Error::validation(at, format!("index {x} outside 1..8")));
                }
            }
            check_expr(&c.coeff, at)?;
        }
        for (n, a) in self.frame_action.iter().enumerate() {
            let at = format!("frame_action[{n}]");
            if !(1..=8).contains(&a.k) {
                return Err(Error::validation(at, format!("frame index {} outside 1..8", a.k)));
            }
            if !self.active_coords.contains(&a.coord) {
                return Err(Error::validation(at, format!("'{}' is not an active coordinate", a.coord)));
            }
            check_expr(&a.coeff, at)?;
        }
        let terms: Vec<(String, &Term)> = match &self.structure_form {
            FormSpec::Standard => vec![],
            FormSpec::Terms(ts) => ts.iter().enumerate().map(|(n, t)| (format!("structure_form.terms[{n}]"), t)).collect(),
            FormSpec::Triple(ws) => {
                if ws.len() != 3 {
                    return Err(Error::validation("structure_form.triple", "expected three 2-forms"));
                }
                ws.iter()
                    .enumerate()
                    .flat_map(|(w, ts)| ts.iter().enumerate().map(move |(n, t)| (format!("structure_form.triple[{w}][{n}]"), t)))
                    .collect()
            }
        };
        let degree = match &self.structure_form {
            FormSpec::Triple(_) => 2,
            _ => 4,
        };
        for (at, t) in terms {
            if t.idx.len() != degree {
                return Err(Error::validation(at, format!("expected {degree} indices")));
            }
            if t.idx.iter().any(|i| !(1..=8).contains(i)) {
                return Err(Error::validation(at, "index outside 1..8"));
            }
            let mut sorted = t.idx.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != degree {
                return Err(Error::validation(at, "repeated index"));
            }
            check_expr(&t.coeff, at)?;
        }
        Ok(())
    }

    /// Sample points for validation: coordinates and parameters.
    fn sample_points(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                self.variables()
                    .iter()
                    .map(|v| {
                        let [lo, hi] = self.domain_of(v);
                        rng.random_range(lo..=hi)
                    })
                    .collect()
            })
            .collect()
    }

    fn normalize_constants(&mut self) -> Result<()> {
        let vars = self.variables();
        let points = self.sample_points(5, 0xa11);
        let mut map: BTreeMap<(u8, u8, u8), Expr> = BTreeMap::new();
        for (n, c) in self.structure_constants.iter().enumerate() {
            let at = format!("structure_constants[{n}]");
            if c.j == c.k {
                let nonzero = points.iter().any(|p| c.coeff.eval(&vars, p).map(|v| v != 0.0).unwrap_or(true));
                if nonzero {
                    return Err(Error::validation(at, format!("c^{}_{{{}{}}} must vanish (antisymmetry)", c.i, c.j, c.k)));
                }
                continue;
            }
            let (j, k, e) = if c.j < c.k { (c.j, c.k, c.coeff.clone()) } else { (c.k, c.j, -c.coeff.clone()) };
            match map.get(&(c.i, j, k)) {
                None => {
                    map.insert((c.i, j, k), e);
                }
                Some(prev) => {
                    for p in &points {
                        let (x, y) = (prev.eval::<f64>(&vars, p)?, e.eval::<f64>(&vars, p)?);
                        if (x - y).abs() > 1e-12 * (1.0 + x.abs()) {
                            return Err(Error::validation(
                                at,
                                format!("c^{i}_{{{j}{k}}} = {x} but c^{i}_{{{k}{j}}} = {}: not antisymmetric", -y, i = c.i),
                            ));
                        }
                    }
                }
            }
        }
        self.structure_constants = map.into_iter().map(|((i, j, k), coeff)| sc(i, j, k, coeff)).collect();
        Ok(())
    }

    /// Checks finiteness, `d² = 0` on the coframe and on coordinate
    /// functions, and that the structure form induces the coframe metric,
    /// at `n` random points.
    pub fn validate(&self, n: usize, seed: u64) -> Result<()> {
        for (p, point) in self.sample_points(n, seed).iter().enumerate() {
            let at = |what: &str| format!("{what} at sample point {p} {point:?}");
            let g = self.geometry_jet(point, false)?;
            for i in 0..DIM {
                for j in 0..DIM {
                    for k in 0..DIM {
                        if !g.frame.c(i, j, k).is_finite() {
                            return Err(Error::NonFinite(at("structure constants")));
                        }
                    }
                }
                let dd = g.frame.d(g.frame.de(i));
                if dd.max_abs() > 1e-9 {
                    return Err(Error::validation(at(&format!("d(de^{})", i + 1)), format!("d² = {:.3e} ≠ 0", dd.max_abs())));
                }
            }
            for (a, name) in self.active_coords.iter().enumerate() {
                let x = Jet::variable(point[a], a, point.len());
                let dd = g.frame.d(&g.frame.d_function(&x));
                if dd.max_abs() > 1e-9 {
                    return Err(Error::validation(
                        at(&format!("d(d{name})")),
                        format!("frame action incompatible with the structure constants ({:.3e})", dd.max_abs()),
                    ));
                }
            }
            let xi = g.xi.map(|c| c.value);
            if xi.max_abs() == 0.0 {
                return Err(Error::validation(at("structure_form"), "vanishing structure form"));
            }
            let metric = metric_from_form(&xi, self.kind)?;
            let defect = (metric.matrix() - nalgebra::SMatrix::<f64, 8, 8>::identity()).abs().max();
            if defect > 1e-8 {
                return Err(Error::validation(
                    at("structure_form"),
                    format!("induced metric differs from the coframe metric by {defect:.3e}"),
                ));
            }
        }
        Ok(())
    }

    /// The three 2-forms of a triple-specified structure.
    pub fn triple<S: Analytic>(&self, vals: &[S]) -> Result<Option<[Form<S>; 3]>> {
        let FormSpec::Triple(ws) = &self.structure_form else {
            return Ok(None);
        };
        let vars = self.variables();
        let mut out: Vec<Form<S>> = Vec::new();
        for w in ws {
            out.push(self.terms_form(w, 2, &vars, vals)?);
        }
        Ok(Some(out.try_into().map_err(|_| Error::validation("structure_form.triple", "expected three 2-forms"))?))
    }

    fn terms_form<S: Analytic>(&self, terms: &[Term], degree: usize, vars: &[String], vals: &[S]) -> Result<Form<S>> {
        let mut f = Form::zero(degree);
        for t in terms {
            let mut idx = t.idx.clone();
            // Sort the indices, tracking the permutation sign.
            let mut sign = 1i64;
            for a in 0..idx.len() {
                for b in 0..idx.len() - 1 - a {
                    if idx[b] > idx[b + 1] {
                        idx.swap(b, b + 1);
                        sign = -sign;
                    }
                }
            }
            let c = t.coeff.eval(vars, vals)?;
            f.add_term(mask_of(&idx)?, c.scale_i64(sign));
        }
        Ok(f)
    }

    /// The structure 4-form at the given variable values.
    pub fn structure_form<S: Analytic>(&self, vals: &[S]) -> Result<Form<S>> {
        let vars = self.variables();
        Ok(match &self.structure_form {
            FormSpec::Standard => self.kind.model_form(),
            FormSpec::Terms(ts) => self.terms_form(ts, 4, &vars, vals)?,
            FormSpec::Triple(_) => {
                let [w1, w2, w3] = self.triple(vals)?.expect("triple");
                let sq = |w: &Form<S>| w.wedge(w);
                let sum = match self.kind {
                    StructureKind::QK => sq(&w1) + sq(&w2) + sq(&w3),
                    StructureKind::Spin7 => -sq(&w1) + sq(&w2) + sq(&w3),
                };
                sum.scale(&(S::one() / S::from_i64(2)))
            }
        })
    }

    /// The frame at the given values of all variables (coordinates first).
    pub fn frame<S: Analytic>(&self, vals: &[S]) -> Result<Frame<S>> {
        let vars = self.variables();
        if vals.len() != vars.len() {
            return Err(Error::InvalidArgument(format!(
                "scenario '{}' expects {} values ({}), got {}",
                self.name,
                vars.len(),
                vars.join(", "),
                vals.len()
            )));
        }
        let mut c: Box<[[[S; DIM]; DIM]; DIM]> =
            Box::new(std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| S::zero()))));
        for t in &self.structure_constants {
            let v = t.coeff.eval(&vars, vals)?;
            let (i, j, k) = (t.i as usize - 1, t.j as usize - 1, t.k as usize - 1);
            c[i][j][k] = c[i][j][k].clone() + v.clone();
            c[i][k][j] = c[i][k][j].clone() - v;
        }
        let n = vals.len();
        let mut action = vec![vec![S::zero(); n]; DIM];
        for a in &self.frame_action {
            let coord = self.active_coords.iter().position(|c| c == &a.coord).expect("validated coordinate");
            action[a.k as usize - 1][coord] = a.coeff.eval(&vars, vals)?;
        }
        Ok(Frame::new(c, action))
    }

    pub fn geometry<S: Analytic>(&self, vals: &[S]) -> Result<Geometry<S>> {
        Ok(Geometry::new(self.frame(vals)?, self.structure_form(vals)?, self.kind))
    }

    /// Jet geometry at `point` (coordinates then parameters). Parameters are
    /// seeded as jet variables only when `seed_params` is set.
    pub fn geometry_jet(&self, point: &[f64], seed_params: bool) -> Result<Geometry<Jet>> {
        let nc = self.n_coords();
        let n = if seed_params { point.len() } else { nc };
        let vals: Vec<Jet> = point
            .iter()
            .enumerate()
            .map(|(i, &v)| if i < n { Jet::variable(v, i, n) } else { Jet::constant(v) })
            .collect();
        for v in &vals {
            if !v.value.is_finite() {
                return Err(Error::NonFinite(format!("point {point:?}")));
            }
        }
        self.geometry(&vals)
    }

    /// The same geometry with coframe `c·e^i` (metric `c²g`, form `c⁴ξ`).
    pub fn rescaled(&self, c: f64) -> Result<Scenario> {
        if !(c > 0.0) {
            return Err(Error::InvalidArgument(format!("rescaling factor must be positive, got {c}")));
        }
        let q = Rational::from_float(c).ok_or_else(|| Error::InvalidArgument("non-finite factor".into()))?;
        let mut out = self.clone();
        out.name = format!("{}_x{c}", self.name);
        for t in &mut out.structure_constants {
            t.coeff = t.coeff.clone() / Expr::Num(q.clone());
        }
        for a in &mut out.frame_action {
            a.coeff = a.coeff.clone() / Expr::Num(q.clone());
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn su3_table_reproduces_maurer_cartan() {
        // dM from the table must equal −Σ_{i<j} [M_i, M_j] θ^{ij}.
        let m = su3_mc_basis();
        for (n, mi) in m.iter().enumerate() {
            let back = su3_read_off(mi);
            for (k, v) in back.iter().enumerate() {
                assert_eq!(*v, <Rational as Scalar>::from_i64(i64::from(k == n)));
            }
        }
        let table = su3_structure_constants();
        for i in 0..DIM {
            for j in (i + 1)..DIM {
                let want = -(&m[i] * &m[j] - &m[j] * &m[i]);
                let mut got = CMat::from_element(CRational::new(<Rational as Zero>::zero(), <Rational as Zero>::zero()));
                for (k, a, b, c) in &table {
                    if (*a as usize, *b as usize) == (i + 1, j + 1) {
                        got -= &m[*k as usize - 1] * CRational::new(c.clone(), <Rational as Zero>::zero());
                    }
                }
                assert_eq!(got, want, "pair ({}, {})", i + 1, j + 1);
            }
        }
    }

    #[test]
    fn builtins_validate() {
        for name in BUILTIN_NAMES {
            let s = builtin(name).unwrap();
            s.clone().prepared().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(matches!(builtin("nope"), Err(Error::UnknownScenario { .. })));
    }

    #[test]
    fn su3_exact_instance() {
        let s = su3();
        let g = s.geometry::<Rational>(&[ratio(0, 1)]).unwrap();
        assert_eq!(g.xi.wedge(&g.xi).coeff_mask(0xff), Rational::from_i64(30));
    }
}
