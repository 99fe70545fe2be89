//! Printed torsion tables and divergence formulas for the built-in scenarios,
//! stored as printed so a mismatch can be told apart from a misprint.
//!
//! Entries are written as `coeff: ij ±kl …; coeff: …`, each index pair a
//! frame 2-form `E^{ij}` (order matters: `87` is `−E^{78}`). Coefficients are
//! expressions in the scenario parameters; `a`, `b` and `dfinv` are the
//! derived quantities listed in [`TorsionTable::derived`].
//!
//! Every table carries its normalization: printed = normalization · κ_conv ·
//! computed.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::exterior::{mask_of, Form, DIM};
use crate::scenarios::Scenario;

/// A misprinted entry together with the value the computation supports.
#[derive(Clone, Debug)]
pub struct Typo {
    pub corrected: &'static str,
    pub note: &'static str,
}

#[derive(Clone, Debug)]
pub struct TableEntry {
    /// 1-based frame direction.
    pub k: u8,
    pub printed: &'static str,
    pub typo: Option<Typo>,
}

#[derive(Clone, Debug)]
pub struct TorsionTable {
    pub scenario: &'static str,
    pub normalization: f64,
    /// Quantities the coefficients use, as expressions in scenario variables.
    /// `dfinv` is supplied by the caller since it depends on the chosen factor.
    pub derived: &'static [(&'static str, &'static str)],
    /// Directions not listed have vanishing torsion.
    pub entries: Vec<TableEntry>,
    pub quote: &'static str,
}

#[derive(Clone, Debug)]
pub struct DivFormula {
    pub scenario: &'static str,
    pub normalization: f64,
    pub derived: &'static [(&'static str, &'static str)],
    pub printed: &'static str,
    pub quote: &'static str,
}

const AB: &[(&str, &str)] = &[("a", "sin(phi)"), ("b", "cos(phi)")];

fn entry(k: u8, printed: &'static str) -> TableEntry {
    TableEntry { k, printed, typo: None }
}

fn conformal_pattern() -> [&'static str; 8] {
    [
        "",
        "c: 12 +34 -56 -78",
        "c: 13 -24 -57 +68",
        "c: 14 +23 -58 -67",
        "3*c: 15; c: -26 -37 -48",
        "3*c: 16; c: 25 +38 -47",
        "3*c: 17; c: -28 +35 +46",
        "3*c: 18; c: 27 -36 +45",
    ]
}

/// Looks up the printed torsion table of a built-in scenario.
pub fn torsion_table(scenario: &str) -> Option<TorsionTable> {
    Some(match scenario {
        "torus_conformal" => TorsionTable {
            scenario: "torus_conformal",
            normalization: 1.0,
            derived: &[("c", "dfinv/4")],
            entries: conformal_pattern()
                .iter()
                .enumerate()
                .filter(|(_, p)| !p.is_empty())
                .map(|(i, p)| entry(i as u8 + 1, p))
                .collect(),
            quote: "T(e_2) = 1/4 d/dx_1(f(x_1)^{-1})(e^{12}+e^{34}-e^{56}-e^{78})",
        },
        "hh2_conformal" => TorsionTable {
            scenario: "hh2_conformal",
            normalization: 1.0,
            derived: &[("c", "(s-1)*dfinv")],
            entries: vec![
                entry(1, "3*c: 15; c: -26 -37 -48"),
                entry(2, "c: 16 -38 +47; 3*c: 25"),
                entry(3, "c: 17 +28 -46; 3*c: 35"),
                entry(4, "c: 18 -27 +36; 3*c: 45"),
                entry(6, "c: 12 +34 -56 -78"),
                entry(7, "c: 13 -24 -57 +68"),
                entry(8, "c: 14 +23 -58 -67"),
            ],
            quote: "T(e_1) = (s-1) d/ds(f(s)^{-1})(3e^{15}-e^{26}-e^{37}-e^{48})",
        },
        "hh2_rotated" => TorsionTable {
            scenario: "hh2_rotated",
            normalization: 32.0,
            derived: AB,
            entries: vec![
                entry(1, "16*a: -17 +28 +36 -45; 16*(1-b): 18 +27 -35 -46"),
                entry(2, "16*a: -18 -27 -35 -46; 16*(1-b): -17 +28 -36 +45"),
                TableEntry {
                    k: 3,
                    printed: "16*a: -16 +25 -37 +48; 16*(1-b): 15 +26 +38 +48",
                    typo: Some(Typo {
                        corrected: "16*a: -16 +25 -37 +48; 16*(1-b): 15 +26 +38 +47",
                        note: "E^48 printed twice in the (1-b) part; the last term is E^47",
                    }),
                },
                entry(4, "16*a: 15 +26 -47 -38; 16*(1-b): 16 -25 -37 +48"),
                entry(5, "16*a: 14 +23 -57 -68; 16*(1-b): 13 -24 +58 -67"),
                TableEntry {
                    k: 6,
                    printed: "16*a: -13 +23 +58 -67; 16*(1-b): 14 +23 +57 +68",
                    typo: Some(Typo {
                        corrected: "16*a: -13 +24 +58 -67; 16*(1-b): 14 +23 +57 +68",
                        note: "the a-part reads E^23 where E^24 belongs",
                    }),
                },
            ],
            quote: "T(E_1) = 16a(-E^{17}+E^{28}+E^{36}-E^{45})+16(1-b)(E^{18}+E^{27}-E^{35}-E^{46})",
        },
        "su3" => TorsionTable {
            scenario: "su3",
            normalization: 32.0,
            derived: &[],
            entries: vec![
                entry(3, "8*(cos(f)-1): 13 +42 +57 +86; 8*sin(f): 14 +23 +85 +76"),
                entry(4, "8*(cos(f)-1): 14 +23 +58 +67; -8*sin(f): 13 -24 -57 +68"),
                entry(
                    5,
                    "-(8*cos(f)+4): 15; 8*sin(f)+12: 16; -(8*sin(f)-4): 25; 12-8*cos(f): 26; \
                     -(4*cos(f)-4*sin(f)-8): 37 +48; 4*(cos(f)+sin(f)): 38 -47",
                ),
                entry(
                    6,
                    "-(8*sin(f)+12): 15; -(8*cos(f)+4): 16; -(12-8*cos(f)): 25; -(8*sin(f)-4): 26; \
                     4*cos(f)-4*sin(f)-8: 38 -47; 4*(cos(f)+sin(f)): 37 +48",
                ),
                entry(
                    7,
                    "-(8*cos(f)+4): 17; 8*sin(f)-12: 18; -(8*sin(f)+4): 27; 12-8*cos(f): 28; \
                     4*cos(f)+4*sin(f)-8: 46 +35; 4*(cos(f)-sin(f)): 36 -45",
                ),
                TableEntry {
                    k: 8,
                    printed: "-(8*sin(f)-12): 17; -(8*cos(f)+4): 18; 8*cos(f)-12: 27; -(4+8*sin(f)): 28; \
                              -(4*cos(f)+4*sin(f)-8): 36 -45; 4*(cos(f)-sin(f)): 35 -46",
                    typo: Some(Typo {
                        corrected: "-(8*sin(f)-12): 17; -(8*cos(f)+4): 18; 8*cos(f)-12: 27; -(4+8*sin(f)): 28; \
                                    -(4*cos(f)+4*sin(f)-8): 36 -45; 4*(cos(f)-sin(f)): 35 +46",
                        note: "the last group is θ^35+θ^46, not θ^35-θ^46",
                    }),
                },
            ],
            quote: "T(E_3) = 8(cos(f)-1)(θ^{13}+θ^{42}+θ^{57}+θ^{86})+8sin(f)(θ^{14}+θ^{23}+θ^{85}+θ^{76})",
        },
        _ => return None,
    })
}

/// Looks up the printed divergence formula of a built-in scenario.
pub fn div_formula(scenario: &str) -> Option<DivFormula> {
    Some(match scenario {
        "torus_conformal" | "hh2_conformal" => DivFormula {
            scenario: if scenario == "torus_conformal" { "torus_conformal" } else { "hh2_conformal" },
            normalization: 1.0,
            derived: &[],
            printed: "0: 12",
            quote: "div(T)=0",
        },
        "hh2_rotated" => DivFormula {
            scenario: "hh2_rotated",
            normalization: 32.0,
            derived: AB,
            printed: "-192*a: 12 +34 -56 -87",
            quote: "div T = -192 a (E^{12}+E^{34}-E^{56}-E^{87})",
        },
        "su3" => DivFormula {
            scenario: "su3",
            normalization: 32.0,
            derived: &[],
            printed: "32*sin(f): 12 +34 -56 -78",
            quote: "div T = 32 sin(f) (θ^{12}+θ^{34}-θ^{56}-θ^{78})",
        },
        "euclid_soliton" => DivFormula {
            scenario: "euclid_soliton",
            normalization: 32.0,
            derived: &[],
            printed: "-8*exp(x1): 12 +34 -56 -78",
            quote: "div(T)= -8 e^{x_1}(dx_{12}+dx_{34}-dx_{56}-dx_{78})= T(∂_{x_1})",
        },
        _ => return None,
    })
}

/// One `coeff: pattern` group.
struct Group {
    coeff: Expr,
    pairs: Vec<(i64, u8, u8)>,
}

fn parse_groups(text: &str) -> Result<Vec<Group>> {
    let bad = |msg: String| Error::parse("expected table", format!("entry '{text}': {msg}"));
    let mut out = Vec::new();
    for group in text.split(';') {
        let (coeff, pattern) = group.rsplit_once(':').ok_or_else(|| bad("missing ':'".into()))?;
        let coeff = Expr::parse(coeff.trim())?;
        let mut pairs = Vec::new();
        for tok in pattern.split_whitespace() {
            let (sign, digits) = match tok.as_bytes()[0] {
                b'+' => (1, &tok[1..]),
                b'-' => (-1, &tok[1..]),
                _ => (1, tok),
            };
            let d = digits.as_bytes();
            if d.len() != 2 || !d.iter().all(|c| (b'1'..=b'8').contains(c)) {
                return Err(bad(format!("bad index pair '{tok}'")));
            }
            pairs.push((sign, d[0] - b'0', d[1] - b'0'));
        }
        out.push(Group { coeff, pairs });
    }
    Ok(out)
}

/// Evaluates a printed pattern to a 2-form. `env` holds the scenario
/// variables; `derived` quantities are computed from it first.
pub fn evaluate(text: &str, derived: &[(&str, &str)], env: &[(&str, f64)]) -> Result<Form<f64>> {
    let mut env: Vec<(String, f64)> = env.iter().map(|(n, v)| (n.to_string(), *v)).collect();
    for (name, def) in derived {
        let view: Vec<(&str, f64)> = env.iter().map(|(n, v)| (n.as_str(), *v)).collect();
        let v = Expr::parse(def)?.eval_f64(&view)?;
        env.push((name.to_string(), v));
    }
    let view: Vec<(&str, f64)> = env.iter().map(|(n, v)| (n.as_str(), *v)).collect();
    let mut out = Form::zero(2);
    for g in parse_groups(text)? {
        let c = g.coeff.eval_f64(&view)?;
        for (sign, i, j) in g.pairs {
            if i == j {
                continue;
            }
            let (lo, hi) = (i.min(j), i.max(j));
            let order = if i < j { 1 } else { -1 };
            out.add_term(mask_of(&[lo, hi])?, c * (sign * order) as f64);
        }
    }
    Ok(out)
}

impl TorsionTable {
    /// Printed `T(E_k)` for every direction, `corrected` selecting the
    /// typo-fixed variant.
    pub fn evaluate(&self, env: &[(&str, f64)], corrected: bool) -> Result<Vec<Form<f64>>> {
        let mut out = vec![Form::zero(2); DIM];
        for e in &self.entries {
            let text = match (&e.typo, corrected) {
                (Some(t), true) => t.corrected,
                _ => e.printed,
            };
            out[e.k as usize - 1] = evaluate(text, self.derived, env)?;
        }
        Ok(out)
    }

    pub fn typo_directions(&self) -> Vec<u8> {
        self.entries.iter().filter(|e| e.typo.is_some()).map(|e| e.k).collect()
    }
}

impl DivFormula {
    pub fn evaluate(&self, env: &[(&str, f64)]) -> Result<Form<f64>> {
        evaluate(self.printed, self.derived, env)
    }
}

/// `d/dx(1/F)` as an expression, for the conformal tables.
pub fn dfinv(f: &Expr, var: &str) -> Expr {
    (Expr::num(1) / f.clone()).diff(var)
}

/// Outcome of matching computed torsion against a printed table at one point.
#[derive(Clone, Debug, Default)]
pub struct TableMatch {
    /// Largest `|printed − normalization·κ·computed|` over regular entries.
    pub regular: f64,
    /// Same for each misprinted direction, against the printed text.
    pub typo_printed: Vec<(u8, f64)>,
    /// Same for each misprinted direction, against the corrected text.
    pub typo_corrected: Vec<(u8, f64)>,
    /// Printed divergence against `normalization·κ·div T`.
    pub div: Option<f64>,
}

/// Compares a scenario at `point` (coordinates then parameters) with its
/// printed table. `factor` is the conformal factor for the conformal tables.
pub fn match_table(s: &Scenario, point: &[f64], factor: Option<&Expr>, kappa: f64) -> Result<TableMatch> {
    let names = s.variables();
    let mut env: Vec<(&str, f64)> = names.iter().map(String::as_str).zip(point.iter().copied()).collect();
    let dfinv_value;
    if let Some(f) = factor {
        let var = s.active_coords.first().ok_or_else(|| Error::InvalidArgument("conformal table needs a coordinate".into()))?;
        dfinv_value = dfinv(f, var).eval_f64(&env)?;
        env.push(("dfinv", dfinv_value));
    }
    let g = s.geometry_jet(point, false)?;
    let computed: Vec<Form<f64>> = g.torsion().iter().map(|t| t.map(|j| j.value)).collect();
    let mut out = TableMatch::default();
    if let Some(table) = torsion_table(&s.name) {
        let printed = table.evaluate(&env, false)?;
        let corrected = table.evaluate(&env, true)?;
        let typos = table.typo_directions();
        for k in 0..DIM {
            let scaled = computed[k].scale(&(table.normalization * kappa));
            if typos.contains(&(k as u8 + 1)) {
                out.typo_printed.push((k as u8 + 1, (printed[k].clone() - scaled.clone()).max_abs()));
                out.typo_corrected.push((k as u8 + 1, (corrected[k].clone() - scaled).max_abs()));
            } else {
                out.regular = out.regular.max((printed[k].clone() - scaled).max_abs());
            }
        }
    }
    if let Some(div) = div_formula(&s.name) {
        let computed = g.divergence().map(|j| j.value);
        out.div = Some((div.evaluate(&env)? - computed.scale(&(div.normalization * kappa))).max_abs());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_order_sets_sign() {
        let a = evaluate("2: 12 -87", &[], &[]).unwrap();
        assert_eq!(a.coeff(&[1, 2]).unwrap(), 2.0);
        assert_eq!(a.coeff(&[7, 8]).unwrap(), 2.0);
        assert!(evaluate("1: 19", &[], &[]).is_err());
    }

    #[test]
    fn builtins_match_their_tables() {
        use crate::scenarios::{builtin, HH2_FACTOR, TORUS_FACTOR};
        let cases: [(&str, Vec<f64>, Option<&str>); 5] = [
            ("torus_conformal", vec![0.8], Some(TORUS_FACTOR)),
            ("hh2_conformal", vec![-0.6], Some(HH2_FACTOR)),
            ("hh2_rotated", vec![0.4], None),
            ("su3", vec![0.9], None),
            ("euclid_soliton", vec![0.3], None),
        ];
        for (name, point, factor) in cases {
            let s = builtin(name).unwrap().prepared().unwrap();
            let f = factor.map(|f| Expr::parse(f).unwrap());
            let m = match_table(&s, &point, f.as_ref(), 1.0).unwrap();
            assert!(m.regular < 1e-12, "{name}: {m:?}");
            assert!(m.div.unwrap_or(0.0) < 1e-11, "{name}: {m:?}");
            assert!(m.typo_corrected.iter().all(|(_, r)| *r < 1e-12), "{name}: {m:?}");
            assert!(m.typo_printed.iter().all(|(_, r)| *r > 1.0), "{name}: {m:?}");
        }
    }

    #[test]
    fn all_tables_parse() {
        for name in ["torus_conformal", "hh2_conformal", "hh2_rotated", "su3"] {
            let t = torsion_table(name).unwrap();
            let env = [("phi", 0.4), ("f", 0.3), ("dfinv", 1.0), ("s", 0.2), ("x1", 0.1)];
            assert_eq!(t.evaluate(&env, false).unwrap().len(), DIM);
        }
        assert_eq!(torsion_table("hh2_rotated").unwrap().typo_directions(), vec![3, 6]);
    }
}
