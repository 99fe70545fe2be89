//! The verification battery.
//!
//! Every check is deterministic for a given seed, carries the residual it
//! measured, the tolerance it was held to and where its expected value comes
//! from. Suites: `exterior`, `structures`, `scenarios`, `geometry`, `flow`
//! and `acceptance` (the fourteen acceptance criteria, at their own fixed
//! tolerances).

use std::sync::OnceLock;

use nalgebra::SMatrix;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::exterior::{basis, Form, Metric, Vector, DIM, VOLUME_MASK};
use crate::flow::{self, Family, FlowTrace, RateFit, SolitonData};
use crate::jet::Jet;
use crate::linalg;
use crate::scalar::{CRational, Rational, Scalar, C64};
use crate::scenarios::{self, expected, Scenario};
use crate::structures::{
    apply, diamond, iota3, metric_from_form, pairing_components, project_m, triple_contract, StructureKind,
};

pub const DEFAULT_SEED: u64 = 20_240_917;

pub const SUITES: [&str; 6] = ["exterior", "structures", "scenarios", "geometry", "flow", "acceptance"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Provenance {
    Paper,
    Trivial,
    Derived,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub description: String,
    pub status: Status,
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub provenance: Provenance,
    pub paper_quote: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    /// One human-readable line.
    pub fn line(&self) -> String {
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        let mut s = format!("{status} {} — {}", self.id, self.description);
        if let Some(r) = self.residual {
            s += &format!(" [residual {r:.3e}");
            if let Some(t) = self.tolerance {
                s += &format!(" ≤ {t:.1e}");
            }
            s += "]";
        }
        if let Some(d) = &self.detail {
            s += &format!(" ({d})");
        }
        s
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Calibration {
    /// Fitted once on the conformal torus, then frozen.
    pub kappa_conv: f64,
    /// `C/printed rate` from the flow families, when they were run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_conv_squared_rates: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub tol_profile: String,
    pub checks: Vec<Check>,
    pub calibration: Calibration,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Fail).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Tolerances by kind of computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub name: &'static str,
    pub algebraic: f64,
    pub differential: f64,
    pub ode: f64,
}

impl Tolerances {
    pub const PROFILES: [&'static str; 3] = ["default", "strict", "loose"];

    pub fn profile(name: &str) -> Result<Tolerances> {
        let (algebraic, differential, ode) = match name {
            "default" => (1e-10, 1e-9, 1e-6),
            "strict" => (1e-12, 1e-11, 1e-8),
            "loose" => (1e-8, 1e-7, 1e-4),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown tolerance profile '{name}' (valid: {})",
                    Self::PROFILES.join(", ")
                )))
            }
        };
        let name = Self::PROFILES.iter().find(|p| **p == name).expect("listed");
        Ok(Tolerances { name, algebraic, differential, ode })
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::profile("default").expect("default profile")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Config {
    pub seed: u64,
    pub tol: Tolerances,
    /// Use exact arithmetic where a check offers the choice.
    pub exact: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config { seed: DEFAULT_SEED, tol: Tolerances::default(), exact: false }
    }
}

/// Results of a check body before it is labelled.
struct Outcome {
    ok: bool,
    residual: Option<f64>,
    tolerance: Option<f64>,
    detail: Option<String>,
}

impl Outcome {
    fn within(residual: f64, tol: f64) -> Outcome {
        Outcome { ok: residual.is_finite() && residual <= tol, residual: Some(residual), tolerance: Some(tol), detail: None }
    }

    /// An exact check; `residual` is whatever measures the failure.
    fn exact(ok: bool, residual: f64) -> Outcome {
        Outcome { ok, residual: Some(residual), tolerance: Some(0.0), detail: None }
    }

    fn holds(ok: bool) -> Outcome {
        Outcome { ok, residual: None, tolerance: None, detail: None }
    }

    fn detail(mut self, d: impl Into<String>) -> Outcome {
        self.detail = Some(d.into());
        self
    }
}

fn check(id: &str, description: &str, provenance: Provenance, quote: &str, body: impl FnOnce() -> Result<Outcome>) -> Check {
    let (status, residual, tolerance, detail) = match body() {
        Ok(o) => (if o.ok { Status::Pass } else { Status::Fail }, o.residual, o.tolerance, o.detail),
        Err(e) => (Status::Fail, None, None, Some(format!("error: {e}"))),
    };
    Check {
        id: id.to_string(),
        description: description.to_string(),
        status,
        residual,
        tolerance,
        provenance,
        paper_quote: quote.to_string(),
        detail,
    }
}

const PAPER: Provenance = Provenance::Paper;
const TRIVIAL: Provenance = Provenance::Trivial;
const DERIVED: Provenance = Provenance::Derived;

fn q(n: i64) -> Rational {
    <Rational as Scalar>::from_i64(n)
}

fn e2<S: Scalar>(a: usize, b: usize) -> Form<S> {
    Form::dx(a).wedge(&Form::dx(b))
}

/// The fifteen 2-forms listed as a basis of Λ²₁₅.
pub fn listed_m_basis() -> Vec<Form<Rational>> {
    let pair = |s: i64, a: usize, b: usize, c: usize, d: usize| e2::<Rational>(a, b) + e2::<Rational>(c, d).scale_i64(s);
    let quad = |s: [i64; 3], p: [(usize, usize); 4]| {
        e2::<Rational>(p[0].0, p[0].1)
            + e2::<Rational>(p[1].0, p[1].1).scale_i64(s[0])
            + e2::<Rational>(p[2].0, p[2].1).scale_i64(s[1])
            + e2::<Rational>(p[3].0, p[3].1).scale_i64(s[2])
    };
    vec![
        pair(-1, 1, 5, 2, 6),
        pair(1, 1, 6, 2, 5),
        pair(-1, 1, 5, 3, 7),
        pair(1, 1, 6, 3, 8),
        pair(1, 2, 8, 3, 5),
        pair(-1, 1, 7, 2, 8),
        pair(1, 1, 8, 4, 5),
        pair(1, 2, 7, 3, 6),
        pair(1, 2, 8, 4, 6),
        pair(1, 3, 8, 4, 7),
        pair(-1, 3, 7, 4, 8),
        pair(1, 1, 8, 2, 7),
        quad([1, -1, -1], [(1, 2), (3, 4), (5, 6), (7, 8)]),
        quad([-1, -1, 1], [(1, 3), (2, 4), (5, 7), (6, 8)]),
        quad([1, -1, -1], [(1, 4), (2, 3), (5, 8), (6, 7)]),
    ]
}

fn rng(cfg: &Config, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_int_form(rng: &mut ChaCha8Rng, degree: usize) -> Form<Rational> {
    let coeffs: Vec<Rational> = basis(degree)
        .iter()
        .map(|_| if rng.random_bool(0.6) { q(rng.random_range(-4..=4)) } else { q(0) })
        .collect();
    Form::from_vec(degree, &coeffs)
}

fn random_f64_form(rng: &mut ChaCha8Rng, degree: usize) -> Form<f64> {
    let coeffs: Vec<f64> = basis(degree).iter().map(|_| rng.random_range(-1.0..1.0)).collect();
    Form::from_vec(degree, &coeffs)
}

/// A random element of the m-module of `kind`, exact.
fn random_m(rng: &mut ChaCha8Rng, kind: StructureKind) -> Form<Rational> {
    apply(&kind.standard().lambda2.m().projector, &random_int_form(rng, 2))
}

fn to_f64(a: &Form<Rational>) -> Form<f64> {
    a.map(<f64 as Scalar>::from_rational)
}

fn values(a: &Form<Jet>) -> Form<f64> {
    a.map(|j| j.value)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn builtin(name: &str) -> Result<Scenario> {
    scenarios::builtin(name)?.prepared()
}

/// A random point (coordinates then default parameters) of a scenario.
fn sample_point(s: &Scenario, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut p = s.sample_coords(rng);
    p.extend(s.default_params());
    p
}

/// Outputs of the two long flow runs, shared by the suites that need them.
pub struct FlowRuns {
    pub hh2: (FlowTrace, f64, RateFit),
    pub su3: (FlowTrace, f64, RateFit),
}

impl FlowRuns {
    pub fn compute() -> Result<FlowRuns> {
        let run = |fam: &Family| -> Result<(FlowTrace, f64, RateFit)> {
            let guess = fam.initial_rate(fam.p_start)?;
            let (trace, dt) = fam.run(5.0, 0.01)?;
            if let Some(why) = &trace.aborted {
                return Err(Error::InvalidArgument(format!("{} run aborted: {why}", fam.scenario.name)));
            }
            let fit = flow::fit_rate(fam, &trace, guess)?;
            Ok((trace, dt, fit))
        };
        Ok(FlowRuns { hh2: run(&flow::hh2_family())?, su3: run(&flow::su3_family())? })
    }

    /// `C/printed rate` for both families.
    pub fn kappa_squared(&self) -> (f64, f64) {
        (self.hh2.2.rate / flow::hh2_family().paper_rate, self.su3.2.rate / flow::su3_family().paper_rate)
    }
}

/// Runs suites and holds what they share.
pub struct Verifier {
    pub cfg: Config,
    flows: OnceLock<std::result::Result<FlowRuns, String>>,
    kappa: OnceLock<f64>,
}

impl Verifier {
    pub fn new(cfg: Config) -> Verifier {
        Verifier { cfg, flows: OnceLock::new(), kappa: OnceLock::new() }
    }

    /// Runs one suite, or all of them.
    pub fn run(&self, filter: Option<&str>) -> Result<Report> {
        let names: Vec<&str> = match filter {
            None | Some("all") => SUITES.to_vec(),
            Some(name) if SUITES.contains(&name) => vec![name],
            Some(name) => {
                return Err(Error::InvalidArgument(format!("unknown suite '{name}' (valid: all, {})", SUITES.join(", "))))
            }
        };
        let mut checks = Vec::new();
        for name in &names {
            checks.extend(self.suite(name)?);
        }
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        let kappa_conv_squared_rates = match self.flows.get() {
            Some(Ok(runs)) => Some(runs.kappa_squared().1),
            _ => None,
        };
        Ok(Report {
            suite: filter.unwrap_or("all").to_string(),
            seed: self.cfg.seed,
            tol_profile: self.cfg.tol.name.to_string(),
            checks,
            calibration: Calibration { kappa_conv: self.kappa_conv(), kappa_conv_squared_rates },
        })
    }

    pub fn suite(&self, name: &str) -> Result<Vec<Check>> {
        Ok(match name {
            "exterior" => self.exterior(),
            "structures" => self.structures(),
            "scenarios" => self.scenarios(),
            "geometry" => self.geometry(),
            "flow" => self.flow(),
            "acceptance" => self.acceptance(),
            _ => return Err(Error::InvalidArgument(format!("unknown suite '{name}'"))),
        })
    }

    /// κ_conv: least-squares factor between the printed torus table and the
    /// computed torsion at random points, fitted once.
    pub fn kappa_conv(&self) -> f64 {
        *self.kappa.get_or_init(|| fit_kappa(&self.cfg).unwrap_or(f64::NAN))
    }

    pub fn flow_runs(&self) -> std::result::Result<&FlowRuns, Error> {
        self.flows
            .get_or_init(|| FlowRuns::compute().map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::InvalidArgument(e.clone()))
    }

    // ------------------------------------------------------------------
    // exterior

    fn exterior(&self) -> Vec<Check> {
        let cfg = &self.cfg;
        let mut out = Vec::new();
        out.push(check("exterior.graded_commutativity", "a∧b = (−1)^{pq} b∧a on random exact forms", TRIVIAL, "", || {
            let mut r = rng(cfg, 1);
            let mut ok = true;
            for p in 0..=4 {
                for qd in 0..=(8 - p).min(4) {
                    let a = random_int_form(&mut r, p);
                    let b = random_int_form(&mut r, qd);
                    let sign = if (p * qd) % 2 == 0 { 1 } else { -1 };
                    ok &= a.wedge(&b) == b.wedge(&a).scale_i64(sign);
                }
            }
            Ok(Outcome::exact(ok, if ok { 0.0 } else { 1.0 }))
        }));
        out.push(check("exterior.associativity", "(a∧b)∧c = a∧(b∧c) on random exact forms", TRIVIAL, "", || {
            let mut r = rng(cfg, 2);
            let ok = (0..10).all(|_| {
                let (a, b, c) = (random_int_form(&mut r, 2), random_int_form(&mut r, 3), random_int_form(&mut r, 2));
                a.wedge(&b).wedge(&c) == a.wedge(&b.wedge(&c))
            });
            Ok(Outcome::exact(ok, 0.0))
        }));
        out.push(check(
            "exterior.interior_antiderivation",
            "v⌟(a∧b) = (v⌟a)∧b + (−1)^p a∧(v⌟b) and v⌟v⌟a = 0",
            TRIVIAL,
            "",
            || {
                let mut r = rng(cfg, 3);
                let mut ok = true;
                for p in 1..=4 {
                    let a = random_int_form(&mut r, p);
                    let b = random_int_form(&mut r, 3);
                    let v = Vector::from_fn(|_| q(r.random_range(-3..=3)));
                    let lhs = a.wedge(&b).interior(&v);
                    let sign = if p % 2 == 0 { 1 } else { -1 };
                    let rhs = a.interior(&v).wedge(&b) + a.wedge(&b.interior(&v)).scale_i64(sign);
                    ok &= lhs == rhs && a.interior(&v).interior(&v).is_zero();
                }
                Ok(Outcome::exact(ok, 0.0))
            },
        ));
        out.push(check("exterior.hodge_involution", "** = (−1)^k on every basis monomial", DERIVED, "", || {
            let ok = (0..=8).all(|k| {
                basis(k).iter().all(|&m| {
                    let a = Form::<Rational>::from_terms(k, [(m, q(1))]);
                    a.star().star() == a.scale_i64(if k % 2 == 0 { 1 } else { -1 })
                })
            });
            Ok(Outcome::exact(ok, 0.0).detail("odd degrees give −1 in dimension 8"))
        }));
        out.push(check("exterior.hodge_inner", "a∧*b = ⟨a, b⟩ vol on random exact forms", TRIVIAL, "", || {
            let mut r = rng(cfg, 4);
            let ok = (1..=7).all(|k| {
                let (a, b) = (random_int_form(&mut r, k), random_int_form(&mut r, k));
                a.wedge(&b.star()).coeff_mask(VOLUME_MASK) == a.dot(&b)
            });
            Ok(Outcome::exact(ok, 0.0))
        }));
        out.push(check("exterior.hodge_metric", "the Hodge star of c²I is c^{8−2k} times the Euclidean one", DERIVED, "", || {
            let mut r = rng(cfg, 5);
            let c = 1.7f64;
            let g = Metric::diagonal(&[c * c; DIM]);
            let mut worst = 0.0f64;
            for k in 0..=8 {
                let a = random_f64_form(&mut r, k);
                let d = a.hodge(&g, 1)? - a.star().scale(&c.powi(8 - 2 * k as i32));
                worst = worst.max(d.max_abs());
            }
            Ok(Outcome::within(worst, cfg.tol.algebraic))
        }));
        out.push(check("exterior.model_volume", "Ω₀∧Ω₀ = 30 vol and Φ₀∧Φ₀ = 14 vol", PAPER, "vol_Ω = 1/30 Ω∧Ω", || {
            let ok = [StructureKind::QK, StructureKind::Spin7].iter().all(|&k| {
                let xi = k.model_form::<Rational>();
                xi.wedge(&xi) == Form::volume().scale_i64(k.normalization())
            });
            Ok(Outcome::exact(ok, 0.0))
        }));
        out.push(check("exterior.json_roundtrip", "form JSON round trip is lossless", TRIVIAL, "", || {
            let mut r = rng(cfg, 6);
            let a = random_int_form(&mut r, 3).scale(&Rational::new(1.into(), 7.into()));
            let b = Form::<Rational>::from_json_str(&a.to_json_string())?;
            let c = random_f64_form(&mut r, 4);
            let d = Form::<f64>::from_json_str(&c.to_json_string())?;
            Ok(Outcome::exact(a == b && c == d, 0.0))
        }));
        out
    }

    // ------------------------------------------------------------------
    // structures

    fn structures(&self) -> Vec<Check> {
        let cfg = &self.cfg;
        let mut out = vec![criterion_01(), criterion_02(cfg), criterion_03(cfg), criterion_04()];
        for (c, id) in out.iter_mut().zip(["spectrum", "contraction", "pairing_example", "metric_scaling"]) {
            c.id = format!("structures.{id}");
        }
        out.push(check(
            "structures.projector_algebra",
            "Λ² projectors are idempotent, mutually orthogonal, sum to the identity",
            DERIVED,
            "",
            || {
                let mut ok = true;
                for kind in [StructureKind::QK, StructureKind::Spin7] {
                    let pieces = &kind.standard().lambda2.pieces;
                    let mut sum = linalg::zeros(28, 28);
                    for (i, a) in pieces.iter().enumerate() {
                        ok &= &a.projector * &a.projector == a.projector;
                        sum += &a.projector;
                        for b in &pieces[i + 1..] {
                            ok &= linalg::is_zero(&(&a.projector * &b.projector));
                        }
                    }
                    ok &= sum == linalg::identity(28);
                }
                Ok(Outcome::exact(ok, 0.0))
            },
        ));
        out.push(check(
            "structures.diamond_kernel",
            "⋄Ω₀ vanishes on Λ²₃ ⊕ Λ²₁₀ and is injective on Λ²₁₅",
            PAPER,
            "ker(·⋄Ω) = Λ²₃ ⊕ Λ²₁₀",
            || {
                let s = StructureKind::QK.standard();
                let xi = s.xi_as::<Rational>();
                let mut ok = true;
                for (i, p) in s.lambda2.pieces.iter().enumerate() {
                    let image = operator_rank(|a| diamond(&apply(&p.projector, a), &xi));
                    ok &= if i == s.lambda2.m_index { image == 15 } else { image == 0 };
                }
                Ok(Outcome::exact(ok, 0.0))
            },
        ));
        out.push(check(
            "structures.diamond_examples",
            "(dx₂₈+dx₃₅)⋄Ω₀ = 4(dx₁₂₄₅−dx₁₃₄₈−dx₂₅₆₇+dx₃₆₇₈) and I⋄Ω₀ = 4Ω₀",
            PAPER,
            "α ⋄ Ω = 4(dx_{1245}-dx_{1348}-dx_{2567}+dx_{3678})",
            || {
                let xi = StructureKind::QK.model_form::<Rational>();
                let alpha = e2::<Rational>(2, 8) + e2(3, 5);
                let expected: Form<Rational> = [([1, 2, 4, 5], 4), ([1, 3, 4, 8], -4), ([2, 5, 6, 7], -4), ([3, 6, 7, 8], 4)]
                    .iter()
                    .map(|(i, c)| Form::monomial(i, q(*c)).expect("indices"))
                    .sum();
                let id: [[Rational; DIM]; DIM] = std::array::from_fn(|i| std::array::from_fn(|j| q((i == j) as i64)));
                let ok = diamond(&alpha, &xi) == expected && crate::structures::diamond_endo(&id, &xi) == xi.scale_i64(4);
                Ok(Outcome::exact(ok, 0.0))
            },
        ));
        out.push(check(
            "structures.invert_diamond_roundtrip",
            "⋄ ∘ (ι₃/c) is the identity on the image of m, 50 random elements, both kinds",
            DERIVED,
            "",
            || {
                let mut r = rng(cfg, 11);
                let mut ok = true;
                for kind in [StructureKind::QK, StructureKind::Spin7] {
                    let xi = kind.model_form::<Rational>();
                    for _ in 0..50 {
                        let psi = diamond(&random_m(&mut r, kind), &xi);
                        ok &= diamond(&crate::structures::invert_diamond(&psi, &xi, kind), &xi) == psi;
                    }
                }
                Ok(Outcome::exact(ok, 0.0))
            },
        ));
        out.push(check(
            "structures.pairing_formula",
            "(α⋄Ω)⌟₃(β⋄Ω) = 32 Σ (α_ik β_jk − α_jk β_ik) dx_ij for 50 random pairs in Λ²₁₅",
            PAPER,
            "(α ⋄ Ω) ⌟₃ (β ⋄ Ω)= 32 Σ",
            || {
                let mut r = rng(cfg, 12);
                let xi = StructureKind::QK.model_form::<Rational>();
                let ok = (0..50).all(|_| {
                    let (a, b) = (random_m(&mut r, StructureKind::QK), random_m(&mut r, StructureKind::QK));
                    triple_contract(&diamond(&a, &xi), &diamond(&b, &xi)) == pairing_components(&a, &b, StructureKind::QK)
                });
                Ok(Outcome::exact(ok, 0.0))
            },
        ));
        out.push(check(
            "structures.lambda4_split",
            "Λ⁴ splits into pieces of dimensions 1, 5, 15, 14 | 5, 30 summing to the input; Ω₀ ∈ Λ⁴⁺₁; m⋄Ω₀ = Λ⁴⁺₁₅",
            PAPER,
            "Λ⁴=Λ⁴⁺ ⊕ Λ⁴⁻",
            || {
                let s = StructureKind::QK.standard();
                let pieces = s.lambda4()?;
                let dims: Vec<usize> = pieces.iter().map(|p| p.dim).collect();
                let mut ok = dims == vec![1, 5, 15, 14, 5, 30];
                let mut r = rng(cfg, 13);
                let a = random_int_form(&mut r, 4);
                let parts = s.lambda4_classify(&a)?;
                ok &= parts.iter().fold(Form::zero(4), |acc, (_, p)| acc + p.clone()) == a;
                let xi = s.xi_as::<Rational>();
                let omega_parts = s.lambda4_classify(&xi)?;
                ok &= omega_parts.iter().all(|(l, p)| if *l == "L4p_1" { *p == xi } else { p.is_zero() });
                let psi = diamond(&random_m(&mut r, StructureKind::QK), &xi);
                ok &= s.lambda4_classify(&psi)?.iter().all(|(l, p)| if *l == "L4p_15" { *p == psi } else { p.is_zero() });
                Ok(Outcome::exact(ok, 0.0).detail(format!("dims {dims:?}")))
            },
        ));
        out.push(check(
            "structures.metric_equivariance",
            "metric_from_form(A*Ω₀) = AᵀA for random A near the identity, both kinds",
            DERIVED,
            "",
            || {
                let mut r = rng(cfg, 14);
                let mut worst = 0.0f64;
                for kind in [StructureKind::QK, StructureKind::Spin7] {
                    for _ in 0..3 {
                        let a = SMatrix::<f64, 8, 8>::from_fn(|i, j| (i == j) as u8 as f64 + r.random_range(-0.2..0.2));
                        let xi = kind.model_form::<f64>().substitute(&a);
                        let g = metric_from_form(&xi, kind)?;
                        let expected = a.transpose() * a;
                        worst = worst.max((g.matrix() - expected).abs().max() / expected.abs().max());
                    }
                }
                Ok(Outcome::within(worst, cfg.tol.algebraic))
            },
        ));
        out.push(check(
            "structures.quaternionic_pairing",
            "(V⌟W⌟Ω)∧(V⌟U⌟Ω)∧Ω on basis vectors: 18 on a quaternionic line, −6 across, 0 degenerate",
            DERIVED,
            "",
            || {
                let omega = StructureKind::QK.model_form::<Rational>();
                let e = |i| Vector::<Rational>::basis(i);
                let ok = crate::structures::quaternionic_pairing(&e(1), &e(2), &e(2), &omega) == q(18)
                    && crate::structures::quaternionic_pairing(&e(1), &e(5), &e(5), &omega) == q(-6)
                    && crate::structures::quaternionic_pairing(&e(1), &e(1), &e(1), &omega) == q(0);
                Ok(Outcome::exact(ok, 0.0))
            },
        ));
        out
    }

    // ------------------------------------------------------------------
    // scenarios

    fn scenarios(&self) -> Vec<Check> {
        let cfg = &self.cfg;
        let mut out = Vec::new();
        for name in scenarios::BUILTIN_NAMES {
            out.push(check(
                &format!("scenarios.validate.{name}"),
                "builtin validates: finite, d² = 0 on the coframe, metric_from_form = I at random points",
                TRIVIAL,
                "",
                || {
                    builtin(name)?.validate(10, cfg.seed)?;
                    Ok(Outcome::holds(true))
                },
            ));
        }
        out.push(check(
            "scenarios.su3_maurer_cartan",
            "su3 structure constants reproduce dθ = −θ∧θ exactly",
            DERIVED,
            "",
            || {
                let m = scenarios::su3_mc_basis();
                let consts = scenarios::su3_structure_constants();
                let mut ok = true;
                for i in 0..DIM {
                    for j in (i + 1)..DIM {
                        let bracket = &m[i] * &m[j] - &m[j] * &m[i];
                        let mut rebuilt = nalgebra::Matrix3::<CRational>::from_element(<CRational as Zero>::zero());
                        for (k, a, b, c) in &consts {
                            if (*a as usize, *b as usize) == (i + 1, j + 1) {
                                rebuilt += &m[*k as usize - 1] * CRational::new(c.clone(), q(0));
                            }
                        }
                        ok &= rebuilt == bracket;
                    }
                }
                Ok(Outcome::exact(ok, 0.0))
            },
        ));
        out.push(check(
            "scenarios.json_roundtrip",
            "serialize then load every builtin: torsion agrees at 5 points",
            DERIVED,
            "",
            || {
                let mut r = rng(cfg, 21);
                let mut worst = 0.0f64;
                for name in scenarios::BUILTIN_NAMES {
                    let s = builtin(name)?;
                    let t = scenarios::from_json_str(&s.to_json_string())?;
                    for _ in 0..5 {
                        let p = sample_point(&s, &mut r);
                        let (a, b) = (s.geometry_jet(&p, false)?, t.geometry_jet(&p, false)?);
                        for k in 0..DIM {
                            worst = worst.max((values(&a.torsion()[k]) - values(&b.torsion()[k])).max_abs());
                        }
                    }
                }
                Ok(Outcome::within(worst, cfg.tol.algebraic))
            },
        ));
        out.push(check(
            "scenarios.antisymmetry_rejected",
            "a file with c^1_23 = c^1_32 = 1 fails validation",
            TRIVIAL,
            "",
            || {
                let text = r#"{"name": "bad", "active_coords": [], "structure_constants": [
                    {"i": 1, "j": 2, "k": 3, "coeff": "1"}, {"i": 1, "j": 3, "k": 2, "coeff": "1"}]}"#;
                Ok(Outcome::holds(scenarios::from_json_str(text).is_err()))
            },
        ));
        out.push(check("scenarios.empty_is_flat", "no structure constants: Γ = 0, T = 0", TRIVIAL, "", || {
            let s = scenarios::from_json_str(r#"{"name": "flat", "active_coords": [], "structure_constants": []}"#)?;
            let g = s.geometry::<f64>(&[])?;
            let ok = (0..DIM).all(|k| g.conn.gamma_form(k).is_zero()) && g.torsion().iter().all(Form::is_zero);
            Ok(Outcome::holds(ok))
        }));
        out.push(check(
            "scenarios.unknown_name",
            "an unknown builtin name is rejected with the valid names",
            TRIVIAL,
            "",
            || {
                let msg = scenarios::builtin("hp2").err().map(|e| e.to_string()).unwrap_or_default();
                Ok(Outcome::holds(scenarios::BUILTIN_NAMES.iter().all(|n| msg.contains(n))))
            },
        ));
        out
    }

    // ------------------------------------------------------------------
    // geometry

    fn geometry(&self) -> Vec<Check> {
        let cfg = &self.cfg;
        let tol = cfg.tol;
        let kappa = self.kappa_conv();
        let mut out = Vec::new();
        out.push(check(
            "geometry.kappa_conv",
            "κ_conv fitted on the conformal torus equals 1 (torsion normalized with 1/32)",
            PAPER,
            "T(·)= 1/32 ι₃(∇·Ω)",
            || Ok(Outcome::within((kappa - 1.0).abs(), tol.algebraic).detail(format!("κ_conv = {kappa}"))),
        ));
        for name in scenarios::BUILTIN_NAMES {
            out.push(check(
                &format!("geometry.structure.{name}"),
                "reconstruction de + ω∧e = 0, Γ skew, T ∈ m, ∇_kξ = T(E_k)⋄ξ, two torsion routes agree",
                DERIVED,
                "∇_X Ω = T(X) ⋄ Ω",
                || {
                    let s = builtin(name)?;
                    let mut r = rng(cfg, 31);
                    let mut worst = 0.0f64;
                    for _ in 0..3 {
                        let p = sample_point(&s, &mut r);
                        let g = s.geometry_jet(&p, false)?;
                        for m in 0..DIM {
                            let rec = (0..DIM).fold(g.frame.de(m).clone(), |acc, j| {
                                acc + g.conn.connection_form(m, j).wedge(&Form::dx(j + 1))
                            });
                            worst = worst.max(values(&rec).max_abs());
                            for a in 0..DIM {
                                for b in 0..DIM {
                                    worst = worst.max((g.conn.gamma(a, b, m).value + g.conn.gamma(a, m, b).value).abs());
                                }
                            }
                        }
                        let routes = g.torsion_from_connection();
                        for (k, t) in g.torsion().iter().enumerate() {
                            worst = worst.max(values(&(g.project_m(t) - t.clone())).max_abs());
                            worst = worst.max(values(&(diamond(t, &g.xi) - g.nabla_xi(k))).max_abs());
                            worst = worst.max(values(&(routes[k].clone() - t.clone())).max_abs());
                        }
                    }
                    Ok(Outcome::within(worst, tol.algebraic))
                },
            ));
            out.push(check(
                &format!("geometry.bianchi.{name}"),
                "(∇_XT)(Y) − (∇_YT)(X) = π₁₅R(X,Y) + quadratic term, 28 pairs, 2 random points",
                PAPER,
                "π^2_{15}(R(X,Y))",
                || {
                    let s = builtin(name)?;
                    let mut r = rng(cfg, 32);
                    let mut worst = 0.0f64;
                    for _ in 0..2 {
                        let g = s.geometry_jet(&sample_point(&s, &mut r), false)?;
                        worst = worst.max(bianchi_residual(&g).1);
                    }
                    Ok(Outcome::within(worst, tol.differential))
                },
            ));
        }
        for (name, point, factor) in [
            ("torus_conformal", vec![0.8], Some(scenarios::TORUS_FACTOR)),
            ("torus_conformal", vec![4.1], Some(scenarios::TORUS_FACTOR)),
            ("hh2_conformal", vec![-0.6], Some(scenarios::HH2_FACTOR)),
            ("hh2_conformal", vec![0.3], Some(scenarios::HH2_FACTOR)),
            ("hh2_rotated", vec![0.3f64.asin()], None),
            ("hh2_rotated", vec![1.2], None),
            ("su3", vec![0.7], None),
            ("su3", vec![2.3], None),
            ("euclid_soliton", vec![0.3], None),
        ] {
            let quote = expected::torsion_table(name).map(|t| t.quote).or(expected::div_formula(name).map(|d| d.quote));
            out.push(check(
                &format!("geometry.table.{name}@{}", point[0]),
                "printed torsion table and div T formula = normalization · κ_conv · computed; misprints match only when corrected",
                PAPER,
                quote.unwrap_or(""),
                || {
                    let s = builtin(name)?;
                    let f = factor.map(Expr::parse).transpose()?;
                    let m = expected::match_table(&s, &point, f.as_ref(), kappa)?;
                    let mut worst = m.regular.max(m.div.unwrap_or(0.0));
                    for (_, r) in &m.typo_corrected {
                        worst = worst.max(*r);
                    }
                    let typos: Vec<String> = m.typo_printed.iter().map(|(k, r)| format!("T(E{k}) printed off by {r:.3}")).collect();
                    let o = Outcome::within(worst, tol.algebraic);
                    Ok(if typos.is_empty() { o } else { o.detail(typos.join(", ")) })
                },
            ));
        }
        out.push(check(
            "geometry.torsion_free_points",
            "T ≡ 0 for constant conformal factor on torus/ℍH², and for hh2_rotated at a = 0",
            PAPER,
            "T = 0 ⇔ F′ = 0",
            || {
                let mut worst = 0.0f64;
                let flat_torus = scenarios::torus_conformal(Expr::num(3), StructureKind::QK).prepared()?;
                let flat_hh2 = scenarios::hh2_conformal(Expr::num(1)).prepared()?;
                for (s, p) in [(flat_torus, vec![1.0]), (flat_hh2, vec![-0.4]), (builtin("hh2_rotated")?, vec![0.0])] {
                    let g = s.geometry_jet(&p, false)?;
                    worst = worst.max(g.torsion().iter().map(|t| values(t).max_abs()).fold(0.0, f64::max));
                }
                Ok(Outcome::within(worst, tol.algebraic))
            },
        ));
        out.push(check(
            "geometry.hh2_einstein",
            "Ric = λg with λ < 0 on hh2_rotated, λ the same on hh2_conformal (F = 1): equal scalar curvature",
            PAPER,
            "Ric = λg, λ < 0",
            || {
                let g = builtin("hh2_rotated")?.geometry::<f64>(&[0.0])?;
                let ric = g.curvature().ricci();
                let lambda = ric[0][0];
                let mut worst = 0.0f64;
                for a in 0..DIM {
                    for b in 0..DIM {
                        worst = worst.max((ric[a][b] - if a == b { lambda } else { 0.0 }).abs());
                    }
                }
                let conformal = scenarios::hh2_conformal(Expr::num(1)).prepared()?;
                let h = conformal.geometry_jet(&[-0.3], false)?;
                let scal = h.curvature().scalar().value;
                worst = worst.max((scal - g.curvature().scalar()).abs());
                Ok(Outcome { ok: worst <= tol.differential && lambda < 0.0, ..Outcome::within(worst, tol.differential) }
                    .detail(format!("λ = {lambda}, scal = {scal}")))
            },
        ));
        out.push(check(
            "geometry.su3_harmonic_at_zero",
            "su3 at f = 0: div T = 0 with T ≠ 0",
            PAPER,
            "f = 0: div T = 0, T ≠ 0",
            || {
                let g = builtin("su3")?.geometry::<f64>(&[0.0])?;
                let div = g.divergence().max_abs();
                let e = g.energy_density();
                Ok(Outcome { ok: div <= tol.algebraic && e > 0.1, ..Outcome::within(div, tol.algebraic) }
                    .detail(format!("½|T|² = {e}")))
            },
        ));
        out.push(check(
            "geometry.conformal_harmonic",
            "div T = 0 for 2 random conformal factors × 4 points (torus QK/Spin(7), ℍH²)",
            PAPER,
            "div(T)=0",
            || conformal_harmonicity(cfg, 2, 4, tol.differential),
        ));
        let mut a12 = criterion_12(tol.algebraic);
        a12.id = "geometry.hypercomplex".into();
        out.push(a12);
        let mut a13 = criterion_13();
        a13.id = "geometry.invariance_counts".into();
        out.push(a13);
        out
    }

    // ------------------------------------------------------------------
    // flow

    fn flow(&self) -> Vec<Check> {
        let cfg = &self.cfg;
        let tol = cfg.tol;
        let mut out = Vec::new();
        for fam in [flow::hh2_family(), flow::su3_family()] {
            let name = fam.scenario.name.clone();
            out.push(check(
                &format!("flow.closure.{name}"),
                "(div T)⋄Ω lies in the tangent space of the ansatz at 20 random parameters",
                DERIVED,
                "",
                || {
                    let mut r = rng(cfg, 41);
                    let mut worst = 0.0f64;
                    for _ in 0..20 {
                        let p = r.random_range(0.05..3.0);
                        worst = worst.max(flow::flow_rhs(&fam.scenario, &[], &[p])?.residual);
                    }
                    Ok(Outcome::within(worst, tol.differential))
                },
            ));
            out.push(check(
                &format!("flow.rate.{name}"),
                "ṗ = −C sin p with C constant in p; C·32 equals the printed rate",
                PAPER,
                if name == "su3" { "cos(f(t))=tanh(128t)" } else { "a(t)=1/cosh(768 t)" },
                || {
                    let rates: Vec<f64> = [0.2, 0.9, 1.5, 2.6].iter().map(|&p| fam.initial_rate(p)).collect::<Result<_>>()?;
                    let spread = rates.iter().map(|c| rel(*c, rates[0])).fold(0.0, f64::max);
                    let paper = rel(32.0 * rates[0], fam.paper_rate);
                    Ok(Outcome::within(spread.max(paper), tol.differential).detail(format!("C = {}", rates[0])))
                },
            ));
            out.push(check(
                &format!("flow.torsion_evolution.{name}"),
                "π₁₅(∂_t T(X) − ∇_X div T) = 0",
                PAPER,
                "= \\pi^{2}_{15}\\Big(\\nabla_X(\\mathrm{div}\\ T)\\Big)",
                || Ok(Outcome::within(flow::torsion_evolution_check(&fam.scenario, &[0.7])?, tol.differential)),
            ));
        }
        out.push(check(
            "flow.rk4_order",
            "halving the step reduces the closed-form error ≈ 16× (su3, horizon 1)",
            DERIVED,
            "",
            || {
                let fam = flow::su3_family();
                let c = fam.initial_rate(fam.p_start)?;
                let err = |step: f64| -> Result<f64> {
                    let (trace, _) = fam.run(1.0, step)?;
                    Ok(trace
                        .states
                        .iter()
                        .map(|s| ((fam.observable)(s.p[0]) - (fam.profile)(c * s.t)).abs())
                        .fold(0.0, f64::max))
                };
                let ratio = err(0.1)? / err(0.05)?;
                Ok(Outcome::holds((12.0..=20.0).contains(&ratio)).detail(format!("error ratio {ratio:.2}")))
            },
        ));
        out.push(check(
            "flow.closed_forms",
            "500-step runs track sech and tanh within the ODE tolerance",
            PAPER,
            "cos(f(t))=tanh(128t)",
            || {
                let runs = self.flow_runs()?;
                let worst = runs.hh2.2.max_deviation.max(runs.su3.2.max_deviation);
                Ok(Outcome::within(worst, tol.ode))
            },
        ));
        out.push(check(
            "flow.late_time",
            "late-time limits: hh2 → torsion-free (a → 0), su3 → the harmonic f = 0 structure with T ≠ 0",
            PAPER,
            "",
            || {
                let runs = self.flow_runs()?;
                let (h, s) = (runs.hh2.0.last(), runs.su3.0.last());
                let hh2_energy = h.energy_density;
                let su3_limit = builtin("su3")?.geometry::<f64>(&[0.0])?.energy_density();
                let ok = h.p[0].sin().abs() < 0.02 && hh2_energy < 1e-2 && (s.energy_density - su3_limit).abs() < 1e-2 * su3_limit;
                Ok(Outcome::holds(ok).detail(format!(
                    "a = {:.3e}, ½|T|²(hh2) = {hh2_energy:.3e}, ½|T|²(su3) = {:.6} vs {su3_limit:.6}",
                    h.p[0].sin(),
                    s.energy_density
                )))
            },
        ));
        let mut a8 = criterion_08(self);
        a8.id = "flow.dissipation".into();
        out.push(a8);
        let mut a11 = criterion_11();
        a11.id = "flow.rescaling".into();
        out.push(a11);
        let mut a10 = criterion_10();
        a10.id = "flow.soliton".into();
        out.push(a10);
        let mut a14 = criterion_14();
        a14.id = "flow.theta".into();
        out.push(a14);
        out
    }

    // ------------------------------------------------------------------
    // acceptance

    /// The fourteen acceptance criteria, ids `A01`..`A14`.
    pub fn acceptance(&self) -> Vec<Check> {
        let cfg = &self.cfg;
        vec![
            criterion_01(),
            criterion_02(cfg),
            criterion_03(cfg),
            criterion_04(),
            criterion_05(cfg),
            criterion_06(),
            criterion_07(self),
            criterion_08(self),
            criterion_09(),
            criterion_10(),
            criterion_11(),
            criterion_12(1e-12),
            criterion_13(),
            criterion_14(),
        ]
    }
}

fn operator_rank(f: impl Fn(&Form<Rational>) -> Form<Rational>) -> usize {
    linalg::rank(&crate::structures::operator_matrix(2, 4, f))
}

fn fit_kappa(cfg: &Config) -> Result<f64> {
    let s = builtin("torus_conformal")?;
    let f = Expr::parse(scenarios::TORUS_FACTOR)?;
    let dfinv = expected::dfinv(&f, "x1");
    let table = expected::torsion_table("torus_conformal").expect("torus table");
    let mut r = rng(cfg, 99);
    let mut pairs = Vec::new();
    for _ in 0..10 {
        let x = s.sample_coords(&mut r);
        let env = [("x1", x[0]), ("dfinv", dfinv.eval_f64(&[("x1", x[0])])?)];
        let printed = table.evaluate(&env, false)?;
        let g = s.geometry_jet(&x, false)?;
        for (k, t) in g.torsion().iter().enumerate() {
            pairs.push((printed[k].scale(&(1.0 / table.normalization)), values(t)));
        }
    }
    Ok(flow::least_squares_factor(&pairs))
}

/// `(max ‖π₁₅(lhs − R − quadratic)‖, max ‖full residual‖)` over all pairs.
fn bianchi_residual<S: Scalar>(g: &crate::geometry::Geometry<S>) -> (f64, f64) {
    let curv = g.curvature();
    let (mut projected, mut full) = (0.0f64, 0.0f64);
    for a in 0..DIM {
        for b in (a + 1)..DIM {
            let bi = g.bianchi(&curv, a, b);
            let res = bi.full_residual();
            full = full.max(res.max_abs());
            let p = g.project_m(&(bi.lhs.clone() - bi.curvature.clone()));
            projected = projected.max(p.max_abs());
        }
    }
    (projected, full)
}

fn conformal_harmonicity(cfg: &Config, factors: usize, points: usize, tol: f64) -> Result<Outcome> {
    let mut r = rng(cfg, 51);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for _ in 0..factors {
        let (a0, a1, a2) = (r.random_range(2.0..3.0), r.random_range(-1.0..1.0), r.random_range(0.0..0.05));
        let torus = Expr::parse(&format!("{a0} + {a1}*sin(x1) + {a2}*x1^2"))?;
        let (b0, b1, b2) = (r.random_range(1.0..2.0), r.random_range(-0.4..0.4), r.random_range(0.0..0.5));
        let hh2 = Expr::parse(&format!("{b0} + {b1}*s + {b2}*s^2"))?;
        for s in [
            scenarios::torus_conformal(torus.clone(), StructureKind::QK),
            scenarios::torus_conformal(torus, StructureKind::Spin7),
            scenarios::hh2_conformal(hh2),
        ] {
            let s = s.prepared()?;
            for _ in 0..points {
                let g = s.geometry_jet(&s.sample_coords(&mut r), false)?;
                worst = worst.max(values(&g.divergence()).max_abs());
                cases += 1;
            }
        }
    }
    Ok(Outcome::within(worst, tol).detail(format!("{cases} evaluations")))
}

// ----------------------------------------------------------------------
// acceptance criteria

fn criterion_01() -> Check {
    check(
        "A01",
        "spectrum of α ↦ *(α∧Ω₀) is {5, −3, 1} with multiplicities {3, 10, 15} exactly; Spin(7): dimensions {7, 21}",
        PAPER,
        "*(α ∧ Ω)=5α",
        || {
            let qk: Vec<(Rational, usize)> =
                StructureKind::QK.standard().lambda2.pieces.iter().map(|p| (p.eigenvalue.clone(), p.dim)).collect();
            let spin7: Vec<usize> = StructureKind::Spin7.standard().lambda2.pieces.iter().map(|p| p.dim).collect();
            let ok = qk == vec![(q(5), 3), (q(-3), 10), (q(1), 15)] && spin7 == vec![7, 21];
            let qk_text: Vec<String> = qk.iter().map(|(l, d)| format!("{l}×{d}")).collect();
            Ok(Outcome::exact(ok, 0.0).detail(format!("QK {}, Spin(7) dims {spin7:?}", qk_text.join(" "))))
        },
    )
}

fn criterion_02(cfg: &Config) -> Check {
    check(
        "A02",
        "ι₃(κ⋄Ω₀) = 32κ exactly on the 15 listed Λ²₁₅ basis elements (rank 15, π₁₅ = id) and 50 random elements",
        PAPER,
        "ι₃(κ ⋄ Ω) =32 κ",
        || {
            let s = StructureKind::QK.standard();
            let xi = s.xi_as::<Rational>();
            let listed = listed_m_basis();
            let mut ok = listed.iter().all(|k| s.project_m(k) == *k && iota3(&diamond(k, &xi), &xi) == k.scale_i64(32));
            let cols: Vec<Rational> = listed.iter().flat_map(|k| k.to_vec()).collect();
            ok &= linalg::rank(&linalg::QMatrix::from_column_slice(28, 15, &cols)) == 15;
            let mut r = rng(cfg, 2);
            for _ in 0..50 {
                let k = random_m(&mut r, StructureKind::QK);
                ok &= iota3(&diamond(&k, &xi), &xi) == k.scale_i64(32);
            }
            Ok(Outcome::exact(ok, 0.0))
        },
    )
}

fn criterion_03(cfg: &Config) -> Check {
    check(
        "A03",
        "(α⋄Ω)⌟₃(β⋄Ω) = 32(−dx₁₃+dx₆₈) for α = dx₂₈+dx₃₅, β = dx₁₅−dx₂₆; π₁₅ of the pairing vanishes on 50 random pairs",
        PAPER,
        "(α ⋄ Ω) ⌟₃ (β ⋄ Ω)=32(−dx_{13}+dx_{68})",
        || {
            let xi = StructureKind::QK.model_form::<Rational>();
            let alpha = e2::<Rational>(2, 8) + e2(3, 5);
            let beta = e2::<Rational>(1, 5) - e2(2, 6);
            let expected = (e2::<Rational>(6, 8) - e2(1, 3)).scale_i64(32);
            let pair = |a: &Form<Rational>, b: &Form<Rational>| triple_contract(&diamond(a, &xi), &diamond(b, &xi));
            let example = pair(&alpha, &beta) == expected;
            let mut r = rng(cfg, 3);
            let mut worst = 0.0f64;
            let mut exact_ok = true;
            for _ in 0..50 {
                let (a, b) = (random_m(&mut r, StructureKind::QK), random_m(&mut r, StructureKind::QK));
                if cfg.exact {
                    exact_ok &= StructureKind::QK.standard().project_m(&pair(&a, &b)).is_zero();
                } else {
                    let (af, bf, xf) = (to_f64(&a), to_f64(&b), to_f64(&xi));
                    let p = triple_contract(&diamond(&af, &xf), &diamond(&bf, &xf));
                    worst = worst.max(project_m(&p, &xf, StructureKind::QK).max_abs());
                }
            }
            let o = Outcome::within(worst, 1e-11);
            Ok(Outcome { ok: o.ok && example && exact_ok, ..o }.detail(if cfg.exact { "exact" } else { "float" }))
        },
    )
}

fn criterion_04() -> Check {
    check(
        "A04",
        "metric_from_form(c⁴ξ₀) = c²I for c ∈ {1, ½, 2, 3}, Ω₀ and Φ₀, relative error ≤ 1e−10",
        PAPER,
        "5³/(4·6^{1/3})",
        || {
            let mut worst = 0.0f64;
            for kind in [StructureKind::QK, StructureKind::Spin7] {
                let xi = kind.model_form::<f64>();
                for c in [1.0f64, 0.5, 2.0, 3.0] {
                    let g = metric_from_form(&xi.scale(&c.powi(4)), kind)?;
                    let err = (g.matrix() - SMatrix::<f64, 8, 8>::identity() * (c * c)).abs().max() / (c * c);
                    worst = worst.max(err);
                }
            }
            Ok(Outcome::within(worst, 1e-10))
        },
    )
}

fn criterion_05(cfg: &Config) -> Check {
    check(
        "A05",
        "div T = 0 at 10 random points × 5 random conformal factors: torus (QK and Spin(7)) and ℍH², residual ≤ 1e−9",
        PAPER,
        "div(T)=0",
        || conformal_harmonicity(cfg, 5, 10, 1e-9),
    )
}

fn criterion_06() -> Check {
    check(
        "A06",
        "div T ∝ sin f(θ¹²+θ³⁴−θ⁵⁶−θ⁷⁸) on SU(3), ∝ a(E¹²+E³⁴−E⁵⁶−E⁸⁷) on ℍH²; cosine ≥ 1−1e−10, magnitude ratio 6 within 1e−8",
        PAPER,
        "32 sin(f) … −192 a",
        || {
            let mut worst_cos = 0.0f64;
            let mut worst_ratio = 0.0f64;
            for f in [0.3f64, 0.7, 1.2] {
                let su3 = builtin("su3")?.geometry::<f64>(&[f])?.divergence();
                let hh2 = builtin("hh2_rotated")?.geometry::<f64>(&[f])?.divergence();
                let p_su3 = expected::div_formula("su3").expect("su3").evaluate(&[("f", f)])?;
                let p_hh2 = expected::div_formula("hh2_rotated").expect("hh2").evaluate(&[("phi", f)])?;
                let cosine = |a: &Form<f64>, b: &Form<f64>| a.dot(b) / (a.dot(a) * b.dot(b)).sqrt();
                worst_cos = worst_cos.max(1.0 - cosine(&su3, &p_su3)).max(1.0 - cosine(&hh2, &p_hh2));
                worst_ratio = worst_ratio.max(rel(hh2.norm() / su3.norm(), 6.0));
            }
            let ok = worst_cos <= 1e-10 && worst_ratio <= 1e-8;
            Ok(Outcome { ok, residual: Some(worst_cos.max(worst_ratio)), tolerance: Some(1e-10), detail: None }
                .detail(format!("1 − cos ≤ {worst_cos:.1e}, |ratio/6 − 1| ≤ {worst_ratio:.1e}")))
        },
    )
}

fn criterion_07(v: &Verifier) -> Check {
    check(
        "A07",
        "flow traces track sech(C₁t) and tanh(C₂t): C₁/C₂ = 6 within 1e−4, deviation ≤ 1e−6, κ_conv² = C/rate equal within 1e−4",
        PAPER,
        "a(t)=1/cosh(768 t), cos(f(t))=tanh(128t)",
        || {
            let runs = v.flow_runs()?;
            let (c1, c2) = (runs.hh2.2.rate, runs.su3.2.rate);
            let ratio = rel(c1 / c2, 6.0);
            let deviation = runs.hh2.2.max_deviation.max(runs.su3.2.max_deviation);
            let (k1, k2) = runs.kappa_squared();
            let kappa = rel(k1, k2);
            let ok = ratio <= 1e-4 && deviation <= 1e-6 && kappa <= 1e-4;
            Ok(Outcome { ok, residual: Some(deviation), tolerance: Some(1e-6), detail: None }.detail(format!(
                "C₁ = {c1:.9}, C₂ = {c2:.9}, C₁/C₂ = {:.9}, κ² = {k1:.9} / {k2:.9}",
                c1 / c2
            )))
        },
    )
}

fn criterion_08(v: &Verifier) -> Check {
    check(
        "A08",
        "along the SU(3) run d/dt|T|² = −2|div T|² within 1e−6 relative, and the energy density strictly decreases",
        PAPER,
        "−2∫_M |div T|² vol",
        || {
            let runs = v.flow_runs()?;
            let s = flow::su3_family().scenario;
            let states = &runs.su3.0.states;
            let mut worst = 0.0f64;
            for st in states.iter().step_by(25) {
                let (lhs, rhs) = flow::dissipation_check(&s, &st.p)?;
                worst = worst.max(rel(lhs, rhs));
            }
            let decreasing = states.windows(2).all(|w| w[1].energy_density < w[0].energy_density);
            let o = Outcome::within(worst, 1e-6);
            Ok(Outcome { ok: o.ok && decreasing, ..o }.detail(format!("{} states, strictly decreasing: {decreasing}", states.len())))
        },
    )
}

fn criterion_09() -> Check {
    check(
        "A09",
        "π₁₅((∇_XT)(Y) − (∇_YT)(X) − R(X,Y)) ≤ 1e−9 and the full identity with the ⌟₃ term ≤ 1e−9, 28 pairs, su3 f = 0.7 and ℍH² a = 0.3",
        PAPER,
        "π^2_{15}(R(X,Y))",
        || {
            let mut projected = 0.0f64;
            let mut full = 0.0f64;
            for (name, p) in [("su3", 0.7f64), ("hh2_rotated", 0.3f64.asin())] {
                let (a, b) = bianchi_residual(&builtin(name)?.geometry::<f64>(&[p])?);
                projected = projected.max(a);
                full = full.max(b);
            }
            Ok(Outcome::within(projected.max(full), 1e-9).detail(format!("π₁₅ part {projected:.1e}, full {full:.1e}")))
        },
    )
}

fn criterion_10() -> Check {
    check(
        "A10",
        "euclid_soliton: ‖div T − T(∇x₁)‖ ≤ 1e−10 at 10 points and (div T)⋄Ω = L_{∂₁}Ω within 1e−9",
        PAPER,
        "div T = T(∇f)",
        || {
            let s = builtin("euclid_soliton")?;
            let points: Vec<Vec<f64>> = (0..10).map(|i| vec![-1.0 + 0.2 * i as f64 + 0.05]).collect();
            let r = flow::soliton_residual(&s, &SolitonData::euclid_steady(), &points)?;
            let gradient = r.gradient.unwrap_or(f64::INFINITY);
            let ok = gradient <= 1e-10 && r.lie <= 1e-9 && r.lie_sign > 0.0;
            Ok(Outcome { ok, residual: Some(gradient.max(r.lie)), tolerance: Some(1e-10), detail: None }
                .detail(format!("gradient {gradient:.1e}, Lie {:.1e} (sign {:+})", r.lie, r.lie_sign)))
        },
    )
}

fn criterion_11() -> Check {
    check(
        "A11",
        "c = 2 on SU(3): T̃ = c²T and div_g̃T̃ = div_gT within 1e−10",
        PAPER,
        "T̃=c² T",
        || {
            let r = flow::rescale_check(&builtin("su3")?, &[0.7], 2.0)?;
            let o = Outcome::within(r.torsion_residual.max(r.div_residual), 1e-10);
            Ok(match r.rate_ratio {
                Some(x) => o.detail(format!("parameter velocity ratio {x:.12} (1/c² = 0.25)")),
                None => o,
            })
        },
    )
}

/// `(identity residual at f = 0 exactly, obstruction matched exactly at
/// rational points of the circle, float residual at π/4)`.
fn criterion_12(tol: f64) -> Check {
    check(
        "A12",
        "hypercomplex identities hold exactly at f = 0; the non-integrability obstruction matches exactly at rational (cos f, sin f) and at f = π/4",
        PAPER,
        "d((ω₂+iω₃)∧(ω₂+iω₃))=2(θ₁−iθ₂)∧(ω₂+iω₃)∧(ω₂+iω₃)",
        || {
            let s = builtin("su3")?;
            let frame = s.frame::<CRational>(&[<CRational as Zero>::zero()])?;
            let i = CRational::new(q(0), q(1));
            let cr = |x: Rational| CRational::new(x, q(0));
            // the three identities at f = 0
            let [w1, w2, w3] = scenarios::su3_triple(cr(q(1)), cr(q(0)));
            let mut ok = true;
            for (a, b, k) in [(&w2, &w3, 2), (&w3, &w1, 3), (&w1, &w2, 4)] {
                let z = a.clone() + b.scale(&i);
                let zz = z.wedge(&z);
                let rhs = (Form::dx(1) - Form::<CRational>::dx(k).scale(&i)).scale_i64(2).wedge(&zz);
                ok &= frame.d(&zz) == rhs;
            }
            // the obstruction at rational points of the unit circle
            let obstruction = |c: Rational, sn: Rational| -> Form<CRational> {
                let [w1, w2, w3] = scenarios::su3_triple(cr(c), cr(sn));
                let z = w3 + w1.scale(&i);
                frame.d(&z.wedge(&z)).wedge(&w2)
            };
            let printed = |c: Rational, sn: Rational| -> Form<CRational> {
                let m = |idx: &[u8]| Form::<CRational>::monomial(idx, CRational::new(q(1), q(0))).expect("indices");
                let a = (m(&[1, 2, 3, 5, 6, 7, 8]) + m(&[1, 3, 4, 5, 6, 7, 8]).scale(&i)).scale(&cr(sn * q(-12)));
                // printed as θ₃₄₅₆₇₈; a 7-form needs the 2
                let b = (m(&[1, 2, 4, 5, 6, 7, 8]) + m(&[2, 3, 4, 5, 6, 7, 8]).scale(&i)).scale(&cr((c - q(1)) * q(12)));
                a + b
            };
            let r = |n: i64, d: i64| Rational::new(n.into(), d.into());
            for (c, sn) in [(q(1), q(0)), (r(3, 5), r(4, 5)), (r(5, 13), r(12, 13)), (r(-8, 17), r(15, 17))] {
                ok &= obstruction(c.clone(), sn.clone()) == printed(c, sn);
            }
            // f = π/4 in complex doubles
            let fc = s.frame::<C64>(&[C64::new(0.0, 0.0)])?;
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let [w1, w2, w3] = scenarios::su3_triple(C64::new(h, 0.0), C64::new(h, 0.0));
            let iz = C64::new(0.0, 1.0);
            let z = w3 + w1.scale(&iz);
            let got = fc.d(&z.wedge(&z)).wedge(&w2);
            let m = |idx: &[u8]| Form::<C64>::monomial(idx, C64::new(1.0, 0.0)).expect("indices");
            let want = (m(&[1, 2, 3, 5, 6, 7, 8]) + m(&[1, 3, 4, 5, 6, 7, 8]).scale(&iz)).scale(&C64::new(-12.0 * h, 0.0))
                + (m(&[1, 2, 4, 5, 6, 7, 8]) + m(&[2, 3, 4, 5, 6, 7, 8]).scale(&iz)).scale(&C64::new(12.0 * (h - 1.0), 0.0));
            let float = (got - want).max_abs();
            let o = Outcome::within(float, tol);
            Ok(Outcome { ok: o.ok && ok, ..o }.detail("exact at f = 0 and (cos, sin) ∈ {(3/5,4/5), (5/13,12/13), (−8/17,15/17)}"))
        },
    )
}

fn criterion_13() -> Check {
    check(
        "A13",
        "L_{E_i}Ω = 0 for exactly 4 directions at f = 0 and exactly 2 at f = 0.5 on SU(3), broken norms ≥ 1e−3",
        PAPER,
        "dim{X : L_XΩ = 0}: 4 at f = 0, 2 at f ≠ 0",
        || {
            let s = builtin("su3")?;
            let mut counts = Vec::new();
            let mut ok = true;
            for f in [0.0, 0.5] {
                let g = s.geometry::<f64>(&[f])?;
                let norms: Vec<f64> = (1..=DIM).map(|i| g.frame.lie_derivative(&g.xi, &Vector::basis(i)).max_abs()).collect();
                let zero = norms.iter().filter(|n| **n <= 1e-12).count();
                ok &= norms.iter().all(|n| *n <= 1e-12 || *n >= 1e-3);
                counts.push(zero);
            }
            ok &= counts == vec![4, 2];
            Ok(Outcome::holds(ok).detail(format!("invariant directions {counts:?}")))
        },
    )
}

fn criterion_14() -> Check {
    check(
        "A14",
        "Θ(t) non-increasing on a 20-point grid for the steady soliton on ℝ⁸, quadrature vs closed form ≤ 1e−10",
        PAPER,
        "Θ(Ω(τ₂)) ≤ Θ(Ω(τ₁))",
        || {
            let s = builtin("euclid_soliton")?;
            let ts: Vec<f64> = (0..20).map(|i| -1.0 + 0.09 * i as f64).collect();
            let r = flow::theta_euclidean(&s, &SolitonData::euclid_steady(), 1.0, &ts, 60)?;
            let o = Outcome::within(r.max_disagreement, 1e-10);
            Ok(Outcome { ok: o.ok && r.non_increasing, ..o }
                .detail(format!("non-increasing: {}, amplitude {}", r.non_increasing, r.amplitude)))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles() {
        assert_eq!(Tolerances::default().algebraic, 1e-10);
        assert!(Tolerances::profile("nope").is_err());
        assert!(Verifier::new(Config::default()).run(Some("nope")).is_err());
    }

    #[test]
    fn exterior_suite_passes() {
        let r = Verifier::new(Config::default()).run(Some("exterior")).unwrap();
        for c in &r.checks {
            assert!(c.passed(), "{}", c.line());
        }
    }
}
