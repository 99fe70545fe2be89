//! The harmonic flow `dξ/dt = (div T) ⋄ ξ` reduced to symmetry ansatze,
//! together with dissipation, rescaling and soliton checks and the
//! Euclidean Θ functional.
//!
//! An ansatz is a scenario whose structure form depends on parameters. The
//! flow is pulled back to parameter space by least squares on the full
//! 70-component coefficient vector; the relative residual of that fit
//! certifies that the ansatz is preserved.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::exterior::{Form, Vector, DIM};
use crate::geometry::Geometry;
use crate::jet::Jet;
use crate::scenarios::{self, Scenario};
use crate::structures::{diamond, project_m};

/// Parameter velocity of the flow at one state.
#[derive(Clone, Debug)]
pub struct FlowRhs {
    pub pdot: Vec<f64>,
    /// `‖V − J ṗ‖ / ‖V‖` with `V = (div T) ⋄ ξ` (0 when `V = 0`).
    pub residual: f64,
    pub rank: usize,
    pub energy_density: f64,
    pub div_norm2: f64,
}

fn jet_point(coords: &[f64], params: &[f64]) -> Vec<f64> {
    coords.iter().chain(params).copied().collect()
}

fn values(f: &Form<Jet>) -> Form<f64> {
    f.map(|c| c.value)
}

/// `(div T) ⋄ ξ` projected onto the tangent space of the ansatz.
pub fn flow_rhs(s: &Scenario, coords: &[f64], params: &[f64]) -> Result<FlowRhs> {
    let g = s.geometry_jet(&jet_point(coords, params), true)?;
    rhs_from_geometry(&g, s.n_coords(), params.len())
}

fn rhs_from_geometry(g: &Geometry<Jet>, nc: usize, np: usize) -> Result<FlowRhs> {
    let div = values(&g.divergence());
    let xi = g.xi.to_vec();
    let v = DVector::from_vec(diamond(&div, &values(&g.xi)).to_vec());
    let jac = DMatrix::from_fn(xi.len(), np, |r, c| xi[r].partial(nc + c));
    let energy_density = g.energy_density().value;
    let div_norm2 = 2.0 * div.dot(&div);
    let v_norm = v.norm();
    if !v_norm.is_finite() || !energy_density.is_finite() {
        return Err(Error::NonFinite("flow right-hand side".into()));
    }
    let svd = jac.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.rank(1e-12 * smax.max(1.0));
    if rank < np {
        return Err(Error::RankDeficient { rank, expected: np });
    }
    let pdot = svd.solve(&v, 1e-12 * smax).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let residual = if v_norm < 1e-300 { 0.0 } else { (&v - &jac * &pdot).norm() / v_norm };
    Ok(FlowRhs { pdot: pdot.iter().copied().collect(), residual, rank, energy_density, div_norm2 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub p: Vec<f64>,
    pub energy_density: f64,
    pub div_norm2: f64,
    pub closure_residual: f64,
}

#[derive(Clone, Debug)]
pub struct FlowTrace {
    pub scenario: String,
    pub param_names: Vec<String>,
    pub states: Vec<FlowState>,
    /// Set when the run stopped before `t_end`.
    pub aborted: Option<String>,
}

impl FlowTrace {
    pub fn last(&self) -> &FlowState {
        self.states.last().expect("a trace holds at least the initial state")
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let mut header = vec!["t".to_string()];
        header.extend(self.param_names.iter().cloned());
        header.extend(["energy_density", "div_norm2", "closure_residual"].map(String::from));
        writeln!(w, "{}", header.join(","))?;
        for s in &self.states {
            let mut row = vec![format!("{:.17e}", s.t)];
            row.extend(s.p.iter().map(|x| format!("{x:.17e}")));
            row.extend([s.energy_density, s.div_norm2, s.closure_residual].map(|x| format!("{x:.17e}")));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

/// Classical RK4 on the parameter ODE. Stops early (keeping the partial
/// trace) on a non-finite state or a closure residual above `max_residual`.
pub fn integrate(s: &Scenario, coords: &[f64], p0: &[f64], t_end: f64, dt: f64, max_residual: f64) -> Result<FlowTrace> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!("need dt > 0 and t_end ≥ 0, got dt = {dt}, t_end = {t_end}")));
    }
    if p0.len() != s.n_params() {
        return Err(Error::InvalidArgument(format!("scenario '{}' has {} parameters, got {}", s.name, s.n_params(), p0.len())));
    }
    let rhs = |p: &[f64]| flow_rhs(s, coords, p);
    let state = |t: f64, p: Vec<f64>, r: &FlowRhs| FlowState {
        t,
        p,
        energy_density: r.energy_density,
        div_norm2: r.div_norm2,
        closure_residual: r.residual,
    };
    let mut trace = FlowTrace {
        scenario: s.name.clone(),
        param_names: s.parameters.iter().map(|p| p.name.clone()).collect(),
        states: Vec::new(),
        aborted: None,
    };
    let mut p = p0.to_vec();
    let mut k1 = rhs(&p)?;
    trace.states.push(state(0.0, p.clone(), &k1));
    let steps = (t_end / dt).round() as usize;
    let axpy = |p: &[f64], h: f64, v: &[f64]| -> Vec<f64> { p.iter().zip(v).map(|(a, b)| a + h * b).collect() };
    for n in 1..=steps {
        let step = || -> Result<(Vec<f64>, FlowRhs)> {
            let k2 = rhs(&axpy(&p, dt / 2.0, &k1.pdot))?;
            let k3 = rhs(&axpy(&p, dt / 2.0, &k2.pdot))?;
            let k4 = rhs(&axpy(&p, dt, &k3.pdot))?;
            let next: Vec<f64> = (0..p.len())
                .map(|i| p[i] + dt / 6.0 * (k1.pdot[i] + 2.0 * k2.pdot[i] + 2.0 * k3.pdot[i] + k4.pdot[i]))
                .collect();
            if next.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("flow state at step {n}")));
            }
            let r = rhs(&next)?;
            Ok((next, r))
        };
        match step() {
            Ok((next, r)) => {
                if r.residual > max_residual {
                    trace.aborted = Some(format!("closure residual {:.3e} at t = {:.6e}", r.residual, n as f64 * dt));
                    break;
                }
                p = next;
                trace.states.push(state(n as f64 * dt, p.clone(), &r));
                k1 = r;
            }
            Err(e) => {
                trace.aborted = Some(e.to_string());
                break;
            }
        }
    }
    Ok(trace)
}

/// A one-parameter ansatz with a known closed-form solution `obs(p(t)) =
/// profile(C t)` for some rate `C`.
#[derive(Clone, Debug)]
pub struct Family {
    pub scenario: Scenario,
    /// Start value of the parameter.
    pub p_start: f64,
    /// Rate printed for this family.
    pub paper_rate: f64,
    /// What the closed form tracks: `a = sin φ` or `cos f`.
    pub observable: fn(f64) -> f64,
    pub observable_name: &'static str,
    pub profile: fn(f64) -> f64,
    pub profile_name: &'static str,
    /// Derivative of `profile`.
    pub profile_deriv: fn(f64) -> f64,
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// The rotated ℍH² family: `a = sin φ` follows `sech(C t)` from `a = 1`.
pub fn hh2_family() -> Family {
    Family {
        scenario: scenarios::hh2_rotated(),
        p_start: std::f64::consts::FRAC_PI_2,
        paper_rate: 768.0,
        observable: f64::sin,
        observable_name: "a",
        profile: sech,
        profile_name: "sech",
        profile_deriv: |x| -sech(x) * x.tanh(),
    }
}

/// The SU(3) family: `cos f` follows `tanh(C t)` from `f = π/2`.
pub fn su3_family() -> Family {
    Family {
        scenario: scenarios::su3(),
        p_start: std::f64::consts::FRAC_PI_2,
        paper_rate: 128.0,
        observable: f64::cos,
        observable_name: "cos f",
        profile: f64::tanh,
        profile_name: "tanh",
        profile_deriv: |x| 1.0 - x.tanh().powi(2),
    }
}

pub fn family(name: &str) -> Result<Family> {
    match name {
        "hh2" | "hh2_rotated" => Ok(hh2_family()),
        "su3" => Ok(su3_family()),
        _ => Err(Error::UnknownScenario { name: name.into(), valid: "hh2, su3".into() }),
    }
}

impl Family {
    /// The rate read off the initial velocity: both families satisfy
    /// `ṗ = −C sin p`.
    pub fn initial_rate(&self, p: f64) -> Result<f64> {
        let r = flow_rhs(&self.scenario, &[], &[p])?;
        Ok(-r.pdot[0] / p.sin())
    }

    /// Integrates over `[0, horizon / C]` with `C·dt = step`.
    pub fn run(&self, horizon: f64, step: f64) -> Result<(FlowTrace, f64)> {
        let c0 = self.initial_rate(self.p_start)?;
        let dt = step / c0;
        let trace = integrate(&self.scenario, &[], &[self.p_start], horizon / c0, dt, 1e-6)?;
        Ok((trace, dt))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub rate: f64,
    /// Largest `|obs − profile(C t)|` over the trace.
    pub max_deviation: f64,
    pub iterations: usize,
}

/// Gauss–Newton fit of `obs(p(t)) ≈ profile(C t)`.
pub fn fit_rate(family: &Family, trace: &FlowTrace, guess: f64) -> Result<RateFit> {
    let data: Vec<(f64, f64)> = trace.states.iter().map(|s| (s.t, (family.observable)(s.p[0]))).collect();
    let mut c = guess;
    let mut iterations = 0;
    for it in 0..50 {
        iterations = it + 1;
        let (mut num, mut den) = (0.0, 0.0);
        for &(t, y) in &data {
            let r = y - (family.profile)(c * t);
            let j = t * (family.profile_deriv)(c * t);
            num += j * r;
            den += j * j;
        }
        if den == 0.0 {
            return Err(Error::InvalidArgument("rate fit needs a trace with t > 0".into()));
        }
        let delta = num / den;
        c += delta;
        if delta.abs() <= 1e-15 * c.abs() {
            break;
        }
    }
    let max_deviation = data.iter().map(|&(t, y)| (y - (family.profile)(c * t)).abs()).fold(0.0, f64::max);
    Ok(RateFit { rate: c, max_deviation, iterations })
}

/// `(d/dt |T|² along the flow, −2|div T|²)` on a homogeneous ansatz, both
/// in the tensor norm (`|T|²` is twice the energy density).
pub fn dissipation_check(s: &Scenario, params: &[f64]) -> Result<(f64, f64)> {
    let g = s.geometry_jet(params, true)?;
    let r = rhs_from_geometry(&g, 0, params.len())?;
    let e = g.energy_density();
    let lhs: f64 = (0..params.len()).map(|i| 2.0 * e.partial(i) * r.pdot[i]).sum();
    Ok((lhs, -2.0 * r.div_norm2))
}

/// `max_k ‖π_m(∂_t T(E_k) − ∇_{E_k} div T)‖` on a homogeneous ansatz.
pub fn torsion_evolution_check(s: &Scenario, params: &[f64]) -> Result<f64> {
    let g = s.geometry_jet(params, true)?;
    let r = rhs_from_geometry(&g, 0, params.len())?;
    let div = g.divergence();
    let xi = values(&g.xi);
    let mut worst = 0.0f64;
    for (k, t) in g.torsion().iter().enumerate() {
        let dt = t.map(|c| (0..params.len()).map(|i| c.partial(i) * r.pdot[i]).sum::<f64>());
        let nabla = values(&g.covariant(&div, k));
        worst = worst.max(project_m(&(dt - nabla), &xi, s.kind).max_abs());
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RescaleReport {
    pub c: f64,
    /// `max |T̃ − c² T|` over all components in the fixed coframe `e`.
    pub torsion_residual: f64,
    /// `max |div_g̃ T̃ − div_g T|` in the fixed coframe.
    pub div_residual: f64,
    /// Ratio of parameter velocities, `ṗ̃ / ṗ` (expected `1/c²`), when the
    /// scenario has parameters and a non-zero velocity.
    pub rate_ratio: Option<f64>,
}

/// Rebuilds the scenario with coframe `c·e` and compares torsion and
/// divergence as covariant tensors evaluated on the original frame.
pub fn rescale_check(s: &Scenario, point: &[f64], c: f64) -> Result<RescaleReport> {
    let scaled = s.rescaled(c)?;
    let g = s.geometry_jet(point, false)?;
    let h = scaled.geometry_jet(point, false)?;
    // T̃(E_k)(E_i, E_j) = c³ T̃(Ẽ_k)(Ẽ_i, Ẽ_j); div similarly with c².
    let mut torsion_residual = 0.0f64;
    for (t, tt) in g.torsion().iter().zip(h.torsion()) {
        let diff = values(tt).scale(&c.powi(3)) - values(t).scale(&(c * c));
        torsion_residual = torsion_residual.max(diff.max_abs());
    }
    let div_residual = (values(&h.divergence()).scale(&(c * c)) - values(&g.divergence())).max_abs();
    let rate_ratio = if s.n_params() > 0 {
        let (coords, params) = point.split_at(s.n_coords());
        let a = flow_rhs(s, coords, params)?;
        let b = flow_rhs(&scaled, coords, params)?;
        (a.pdot[0].abs() > 1e-300).then(|| b.pdot[0] / a.pdot[0])
    } else {
        None
    };
    Ok(RescaleReport { c, torsion_residual, div_residual, rate_ratio })
}

/// A vector field `X` in frame components with homothety constant `c`
/// (`L_X g = c g`) and, for gradient solitons, the potential `f`.
#[derive(Clone, Debug)]
pub struct SolitonData {
    pub frame_components: [Expr; DIM],
    pub c: f64,
    pub potential: Option<Expr>,
}

impl SolitonData {
    /// `X = ∂_{x₁}` on the rotated Euclidean coframe, potential `x₁`.
    pub fn euclid_steady() -> SolitonData {
        let psi = Expr::exp(Expr::var("x1"));
        let mut comps: [Expr; DIM] = std::array::from_fn(|_| Expr::num(0));
        comps[0] = Expr::cos(psi.clone());
        comps[1] = -Expr::sin(psi);
        SolitonData { frame_components: comps, c: 0.0, potential: Some(Expr::var("x1")) }
    }

    pub fn zero() -> SolitonData {
        SolitonData { frame_components: std::array::from_fn(|_| Expr::num(0)), c: 0.0, potential: None }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SolitonPoint {
    pub point: Vec<f64>,
    pub r1: f64,
    pub r2: f64,
    pub gradient: Option<f64>,
    pub lie: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SolitonResidual {
    /// `max ‖L_X g − c g‖`.
    pub r1: f64,
    /// `max ‖div T − X⌟T − ½ π_m(dX♭)‖`.
    pub r2: f64,
    /// `max ‖div T − T(∇f)‖` when a potential is given.
    pub gradient: Option<f64>,
    /// `max ‖(div T) ⋄ ξ − σ L_X ξ‖` with the sign `σ` reported below.
    pub lie: f64,
    pub lie_sign: f64,
    pub points: Vec<SolitonPoint>,
}

/// Evaluates the soliton equations at the given points (coordinates then
/// parameters).
pub fn soliton_residual(s: &Scenario, sol: &SolitonData, points: &[Vec<f64>]) -> Result<SolitonResidual> {
    let vars = s.variables();
    let mut out = SolitonResidual { r1: 0.0, r2: 0.0, gradient: None, lie: 0.0, lie_sign: 1.0, points: Vec::new() };
    let mut lie_plus = 0.0f64;
    let mut lie_minus = 0.0f64;
    let mut per_point = Vec::new();
    for pt in points {
        let g = s.geometry_jet(pt, false)?;
        let n = s.n_coords();
        let vals: Vec<Jet> = pt.iter().enumerate().map(|(i, &v)| if i < n { Jet::variable(v, i, n) } else { Jet::constant(v) }).collect();
        let x_comp: Vec<Jet> = sol.frame_components.iter().map(|e| e.eval(&vars, &vals)).collect::<Result<_>>()?;
        let x = Vector::from_fn(|i| x_comp[i].clone());
        let lg = g.frame.lie_metric(&x);
        let r1 = (0..DIM)
            .flat_map(|a| (0..DIM).map(move |b| (a, b)))
            .map(|(a, b)| (lg[a][b].value - if a == b { sol.c } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        let div = g.divergence();
        let x_flat = (0..DIM).fold(Form::zero(1), |acc, i| acc + Form::dx(i + 1).scale(&x_comp[i]));
        let dx_flat = g.frame.d(&x_flat);
        let rhs = g.torsion_at(&x) + g.project_m(&dx_flat).scale(&Jet::constant(0.5));
        let r2 = values(&(div.clone() - rhs)).max_abs();
        let gradient = match &sol.potential {
            Some(f) => {
                let fj = f.eval(&vars, &vals)?;
                let grad = Vector::from_fn(|k| g.frame.derive(&fj, k));
                Some(values(&(div.clone() - g.torsion_at(&grad))).max_abs())
            }
            None => None,
        };
        let v = values(&diamond(&div, &g.xi));
        let lx = values(&g.frame.lie_derivative(&g.xi, &x));
        let (p, m) = ((v.clone() - lx.clone()).max_abs(), (v + lx).max_abs());
        lie_plus = lie_plus.max(p);
        lie_minus = lie_minus.max(m);
        out.r1 = out.r1.max(r1);
        out.r2 = out.r2.max(r2);
        if let Some(gr) = gradient {
            out.gradient = Some(out.gradient.unwrap_or(0.0).max(gr));
        }
        per_point.push((pt.clone(), r1, r2, gradient, p, m));
    }
    out.lie_sign = if lie_plus <= lie_minus { 1.0 } else { -1.0 };
    out.lie = lie_plus.min(lie_minus);
    out.points = per_point
        .into_iter()
        .map(|(point, r1, r2, gradient, p, m)| SolitonPoint {
            point,
            r1,
            r2,
            gradient,
            lie: if out.lie_sign > 0.0 { p } else { m },
        })
        .collect();
    Ok(out)
}

/// Gauss–Hermite nodes and weights for `∫ e^{−y²} g(y) dy` (Golub–Welsch).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(n, n, |i, j| if i + 1 == j || j + 1 == i { ((i.max(j)) as f64 / 2.0).sqrt() } else { 0.0 });
    let eig = SymmetricEigen::new(jacobi);
    // Polish each node by Newton on the orthonormal Hermite functions; the
    // weights then follow from the derivative at the root.
    let mut pairs: Vec<(f64, f64)> = eig
        .eigenvalues
        .iter()
        .map(|&z0| {
            let mut z = z0;
            let mut pp = 1.0;
            for _ in 0..4 {
                let (mut p1, mut p2) = (std::f64::consts::PI.powf(-0.25), 0.0);
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * (2.0 / j as f64).sqrt() * p2 - ((j - 1) as f64 / j as f64).sqrt() * p3;
                }
                pp = (2.0 * n as f64).sqrt() * p2;
                z -= p1 / pp;
            }
            (z, 2.0 / (pp * pp))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ThetaSample {
    pub t: f64,
    /// Translation of the steady soliton at time `t`.
    pub sigma: f64,
    pub quadrature: f64,
    pub closed_form: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ThetaReport {
    pub t0: f64,
    /// `|T|²(x) = amplitude · e^{2 x₁}` for the untranslated soliton.
    pub amplitude: f64,
    /// `+1` if the solution is `Ω(t)(x) = Ω(x + t e₁)`, `−1` for `x − t e₁`.
    pub direction: f64,
    pub samples: Vec<ThetaSample>,
    pub max_disagreement: f64,
    pub non_increasing: bool,
}

/// `Θ(t) = (t₀ − t) ∫ u |T|² vol` for the translating steady soliton on
/// ℝ⁸ with the Euclidean backward heat kernel
/// `u = (4π(t₀−t))^{−4} e^{−|x|²/4(t₀−t)}`.
///
/// The integrand factorizes; each of the eight one-dimensional integrals is
/// done by Gauss–Hermite quadrature with `nodes` nodes, with `|T|²` evaluated
/// from the geometry at the translated points. The closed form
/// `(t₀ − t) A e^{2σ} e^{4(t₀−t)}` is the oracle.
pub fn theta_euclidean(s: &Scenario, sol: &SolitonData, t0: f64, ts: &[f64], nodes: usize) -> Result<ThetaReport> {
    if ts.iter().any(|&t| t >= t0) {
        return Err(Error::InvalidArgument("Θ needs sample times t < t₀".into()));
    }
    let tsq = |x1: f64| -> Result<f64> { Ok(2.0 * s.geometry::<f64>(&[x1])?.energy_density()) };
    let amplitude = tsq(0.0)?;
    // The translation direction follows from (div T) ⋄ ξ = σ' L_X ξ.
    let direction = if amplitude == 0.0 { 1.0 } else { soliton_residual(s, sol, &[vec![0.0]])?.lie_sign };
    let (y, w) = gauss_hermite(nodes);
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    let mut samples = Vec::new();
    for &t in ts {
        let tau = t0 - t;
        let sigma = direction * t;
        let scale = 2.0 * tau.sqrt();
        let mut first = 0.0;
        for (yi, wi) in y.iter().zip(&w) {
            first += wi * tsq(scale * yi + sigma)?;
        }
        // The seven transverse directions integrate the bare Gaussian.
        let transverse: f64 = w.iter().sum::<f64>() * inv_sqrt_pi;
        let quadrature = tau * first * inv_sqrt_pi * transverse.powi(7);
        let closed_form = tau * amplitude * (2.0 * sigma).exp() * (4.0 * tau).exp();
        samples.push(ThetaSample { t, sigma, quadrature, closed_form });
    }
    let max_disagreement = samples
        .iter()
        .map(|s| (s.quadrature - s.closed_form).abs() / s.closed_form.abs().max(f64::MIN_POSITIVE))
        .filter(|r| r.is_finite())
        .fold(0.0, f64::max);
    let non_increasing = samples.windows(2).all(|p| p[1].quadrature <= p[0].quadrature);
    Ok(ThetaReport { t0, amplitude, direction, samples, max_disagreement, non_increasing })
}

/// Least-squares factor `κ` with `computed ≈ κ · expected` over pairs of
/// coefficient vectors.
pub fn least_squares_factor(pairs: &[(Form<f64>, Form<f64>)]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (computed, expected) in pairs {
        num += computed.dot(expected);
        den += expected.dot(expected);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_hermite_moments() {
        let (y, w) = gauss_hermite(40);
        let m0: f64 = w.iter().sum();
        let m2: f64 = y.iter().zip(&w).map(|(y, w)| w * y * y).sum();
        assert!((m0 - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert!((m2 - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn torsion_free_point_is_stationary() {
        let r = flow_rhs(&scenarios::hh2_rotated(), &[], &[0.0]).unwrap();
        assert_eq!(r.pdot[0], 0.0);
        assert_eq!(r.residual, 0.0);
    }
}
