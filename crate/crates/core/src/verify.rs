//! Numerical certification experiments.
//!
//! Each experiment is a pure function of `(seed, Params)` and returns an
//! [`ExperimentResult`] with its measured constants and pass/fail gates,
//! plus optional growth tables.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atoms::{atom_grid, make_atom_on, molecule_report, molecule_report_sampled, AtomKind, MoleculeReport};
use crate::decompose::{finite_norm_bound, hz_decompose, molecule_decompose, restrict_decompose, Decomposition, NormStrategy, Term};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, Norm, SpaceTimeGrid};
use crate::heatop::{apply_t, cell_mass, whole_space_kernel_dt, KernelSpec, OperatorImage, PointField};
use crate::quad::{adaptive, GaussLegendre};
use crate::space::{ParabolicBall, SpacePoint, SpatialDomain};

/// Experiment parameters. `None` fields fall back to per-experiment defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub n: usize,
    pub seed: u64,
    pub t_max: Option<f64>,
    pub tol: Option<f64>,
    pub atoms: Option<usize>,
    pub alpha: f64,
    pub j_max: u32,
    pub samples_per_radius: usize,
    /// Allowed ratio between the largest and smallest molecule constant.
    pub band: f64,
    /// Relative tolerance on fitted growth slopes.
    pub slope_tol: f64,
    /// Allowed relative change between successive grid refinements.
    pub refinement_tol: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            n: 1,
            seed: 0,
            t_max: None,
            tol: None,
            atoms: None,
            alpha: crate::atoms::DEFAULT_ALPHA,
            j_max: crate::atoms::DEFAULT_J,
            samples_per_radius: crate::atoms::DEFAULT_SAMPLES_PER_RADIUS,
            band: 4.0,
            slope_tol: 0.05,
            refinement_tol: 0.1,
        }
    }
}

impl Params {
    fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn atoms_or(&self, default: usize) -> usize {
        self.atoms.unwrap_or(default)
    }

    fn require_1d(&self, id: &str) -> Result<()> {
        if self.n != 1 {
            return Err(Error::InvalidParameter(format!("{id} runs in dimension 1 only")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `true`: pass iff `value <= bound`; `false`: pass iff `value >= bound`.
    pub upper: bool,
    pub pass: bool,
}

impl Gate {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Gate {
        Gate {
            name: name.into(),
            value,
            bound,
            upper: true,
            pass: value <= bound,
        }
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Gate {
        Gate {
            name: name.into(),
            value,
            bound,
            upper: false,
            pass: value >= bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub id: String,
    pub seed: u64,
    pub n: usize,
    pub parameters: BTreeMap<String, f64>,
    pub measured: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub gates: Vec<Gate>,
    pub pass: bool,
    /// `"config"` when the tolerance was supplied, `"default"` otherwise.
    pub tolerance_source: String,
}

impl ExperimentResult {
    fn new(id: &str, p: &Params) -> Self {
        ExperimentResult {
            id: id.into(),
            seed: p.seed,
            n: p.n,
            parameters: BTreeMap::new(),
            measured: BTreeMap::new(),
            series: BTreeMap::new(),
            gates: Vec::new(),
            pass: true,
            tolerance_source: if p.tol.is_some() { "config" } else { "default" }.into(),
        }
    }

    fn param(&mut self, k: &str, v: f64) {
        self.parameters.insert(k.into(), v);
    }

    fn measure(&mut self, k: &str, v: f64) {
        self.measured.insert(k.into(), v);
    }

    fn gate(&mut self, g: Gate) {
        self.pass &= g.pass;
        self.gates.push(g);
    }

    pub fn gate_named(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Two-column table `(T, I_T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthTable {
    pub name: String,
    pub rows: Vec<(f64, f64)>,
}

impl GrowthTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["T", "I_T"])?;
        for (t, v) in &self.rows {
            wr.write_record([format!("{t:e}"), format!("{v:e}")])?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub result: ExperimentResult,
    pub tables: Vec<GrowthTable>,
}

impl From<ExperimentResult> for Outcome {
    fn from(result: ExperimentResult) -> Self {
        Outcome { result, tables: Vec::new() }
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Least-squares slope and relative RMS residual of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    (slope, icpt, (rss / k).sqrt() / scale)
}

/// Per-experiment seeds drawn up front so results do not depend on threads.
fn seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen()).collect()
}

fn ball_nd(t0: f64, x: Vec<f64>, r: f64) -> ParabolicBall {
    ParabolicBall {
        center: SpacePoint::new(t0, x),
        radius: r,
    }
}

/// `|∫ f| / (ν(Q)^{1/2} ‖a‖_2)`, the moment normalized by the atom's size.
fn relative_moment(moment: f64, q: &ParabolicBall, a: &GridFunction) -> f64 {
    let s = q.volume().sqrt() * a.l2_norm();
    if s == 0.0 {
        0.0
    } else {
        moment.abs() / s
    }
}

/// A molecule report of `Ta` (or `T*a`) and its relative moment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    pub report: MoleculeReport,
    pub relative_moment: f64,
}

/// Molecule report of `Ta` for an atom `a` on a grid over `X`, sampled on
/// per-annulus lattices through the pointwise evaluator.
pub fn certify_t_on_atom(a: &GridFunction, q: &ParabolicBall, alpha: f64, j_max: u32, k: usize) -> Result<Certification> {
    certify(a, q, alpha, j_max, k, false, KernelSpec::whole(q.dim()))
}

/// Same as [`certify_t_on_atom`] for `T*`.
pub fn certify_tstar_on_atom(a: &GridFunction, q: &ParabolicBall, alpha: f64, j_max: u32, k: usize) -> Result<Certification> {
    certify(a, q, alpha, j_max, k, true, KernelSpec::whole(q.dim()))
}

fn certify(a: &GridFunction, q: &ParabolicBall, alpha: f64, j_max: u32, k: usize, adjoint: bool, spec: KernelSpec) -> Result<Certification> {
    if !a.grid().covers_ball(q) {
        return Err(Error::Coverage("atom grid does not cover Q".into()));
    }
    let img = if adjoint {
        OperatorImage::adjoint(a, spec)?
    } else {
        OperatorImage::forward(a, spec)?
    };
    let report = molecule_report_sampled(&img, q, alpha, j_max, k, spec.domain())?;
    let relative_moment = relative_moment(report.moment, q, a);
    Ok(Certification { report, relative_moment })
}

fn random_atom(rng: &mut ChaCha8Rng, n: usize, kind: AtomKind) -> Result<(GridFunction, ParabolicBall)> {
    let r = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
    let s = match kind {
        AtomKind::TypeA => 16.0 + rng.gen_range(0..4) as f64,
        AtomKind::TypeB => 4.0 + rng.gen_range(0..12) as f64,
        _ => 1.0 + rng.gen_range(0..4) as f64,
    };
    let x: Vec<f64> = (0..n).map(|_| r * rng.gen_range(-2..=2) as f64).collect();
    let q = ball_nd(s * r * r, x, r);
    let grid = atom_grid(&q, kind)?;
    Ok((make_atom_on(grid, &q, kind, rng)?, q))
}

fn certify_many(id: &str, p: &Params, kind: AtomKind, default_count: usize, adjoint: bool) -> Result<(ExperimentResult, Vec<Certification>)> {
    let count = p.atoms_or(if p.n == 1 { default_count } else { 3 });
    let k = if p.n == 1 { p.samples_per_radius } else { p.samples_per_radius.min(4) };
    let j_max = if p.n == 1 { p.j_max } else { p.j_max.min(5) };
    let certs: Vec<Certification> = seeds(p.seed, count)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let (a, q) = random_atom(&mut rng, p.n, kind)?;
            certify(&a, &q, p.alpha, j_max, k, adjoint, KernelSpec::whole(p.n))
        })
        .collect::<Result<_>>()?;
    let mut res = ExperimentResult::new(id, p);
    res.param("atoms", count as f64);
    res.param("alpha", p.alpha);
    res.param("J", j_max as f64);
    res.param("samples_per_radius", k as f64);
    let fitted: Vec<f64> = certs.iter().map(|c| c.report.fitted_alpha.unwrap_or(f64::NAN)).collect();
    let consts: Vec<f64> = certs.iter().map(|c| c.report.constant).collect();
    let moments: Vec<f64> = certs.iter().map(|c| c.relative_moment).collect();
    res.measure("min_fitted_alpha", fitted.iter().copied().fold(f64::INFINITY, |a, b| if b.is_nan() { f64::NEG_INFINITY } else { a.min(b) }));
    res.measure("max_constant", max_of(&consts));
    res.measure("min_constant", min_of(&consts));
    res.measure("max_relative_moment", max_of(&moments));
    res.series.insert("fitted_alpha".into(), fitted);
    res.series.insert("constant".into(), consts);
    res.series.insert("relative_moment".into(), moments);
    Ok((res, certs))
}

/// Molecule certification of `Ta` over random `(1,∞)`-atoms supported in `X`.
pub fn run_certify_t(p: &Params) -> Result<Outcome> {
    let (mut res, _) = certify_many("certify-T", p, AtomKind::ClassicalInf, 50, false)?;
    let tol = p.tol_or(1e-3);
    let m = res.measured.clone();
    res.gate(Gate::at_least("fitted_alpha", m["min_fitted_alpha"], p.alpha));
    res.gate(Gate::at_most("constant_band", m["max_constant"] / m["min_constant"], p.band));
    res.gate(Gate::at_most("relative_moment", m["max_relative_moment"], tol));
    Ok(res.into())
}

/// Molecule certification of `T*` on type (a) and type (b) atoms.
pub fn run_certify_tstar(p: &Params) -> Result<Outcome> {
    let tol = p.tol_or(1e-3);
    let (ra, ca) = certify_many("certify-Tstar", p, AtomKind::TypeA, 20, true)?;
    let (rb, cb) = certify_many("certify-Tstar", p, AtomKind::TypeB, 20, true)?;
    let mut res = ExperimentResult::new("certify-Tstar", p);
    res.parameters = ra.parameters.clone();
    for (prefix, r) in [("type_a", &ra), ("type_b", &rb)] {
        for (k, v) in &r.measured {
            res.measure(&format!("{prefix}.{k}"), *v);
        }
        for (k, v) in &r.series {
            res.series.insert(format!("{prefix}.{k}"), v.clone());
        }
    }
    // T* a vanishes after the support of a
    let mut after: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ 0x5eed);
    for _ in 0..4 {
        let (a, q) = random_atom(&mut rng, p.n, AtomKind::TypeA)?;
        let img = OperatorImage::adjoint(&a, KernelSpec::whole(p.n))?;
        let top = q.time_interval().1;
        for i in 0..16 {
            let t = top * (1.0 + 0.1 * (i as f64 + 0.5));
            let x: Vec<f64> = q.center.x.iter().map(|c| c + (i as f64 - 8.0) * 0.25 * q.radius).collect();
            after = after.max(img.value(t, &x).abs());
        }
    }
    res.measure("anticausal_max", after);
    let ma = &ra.measured;
    let mb = &rb.measured;
    let _ = (&ca, &cb);
    res.gate(Gate::at_most("type_a.relative_moment", ma["max_relative_moment"], tol));
    res.gate(Gate::at_least("type_a.fitted_alpha", ma["min_fitted_alpha"], p.alpha));
    res.gate(Gate::at_least("type_b.fitted_alpha", mb["min_fitted_alpha"], 1.5));
    res.gate(Gate::at_most("type_b.relative_moment", mb["max_relative_moment"], tol));
    res.gate(Gate::at_most("anticausal_max", after, 0.0));
    Ok(res.into())
}

/// `(∫ F(t, x) dx, ∫ |F(t, x)| dx)` by midpoint sums on a lattice aligned
/// with the cells of `grid`, `sub` points per cell and axis, extended by
/// `reach` beyond the grid. For the semigroup image of cell data the
/// signed sum is exact: the cell masses telescope along each residue class.
pub fn slice_integrals(field: &dyn PointField, grid: &SpaceTimeGrid, t: f64, reach: f64, sub: usize) -> (f64, f64) {
    let h = grid.h();
    let ext = (reach / h).ceil() as i64;
    let lo = -grid.half_width() - ext as f64 * h;
    let cells = grid.nx() as i64 + 2 * ext;
    let step = h / sub as f64;
    let pts: Vec<f64> = (0..cells * sub as i64).map(|i| lo + (i as f64 + 0.5) * step).collect();
    let n = grid.dim();
    let (s, a) = if n == 1 {
        pts.par_iter()
            .map(|&x| {
                let v = field.value(t, &[x]);
                (v, v.abs())
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
    } else {
        pts.par_iter()
            .map(|&x0| {
                pts.iter().fold((0.0, 0.0), |acc, &x1| {
                    let v = field.value(t, &[x0, x1]);
                    (acc.0 + v, acc.1 + v.abs())
                })
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
    };
    let w = step.powi(n as i32);
    (s * w, a * w)
}

/// Per-time spatial means of `Ta` at sampled times.
pub fn run_mean_value(p: &Params) -> Result<Outcome> {
    p.require_1d("mean-value")?;
    let count = p.atoms_or(10);
    let tol = p.tol_or(1e-3);
    let times_per_atom = 20;
    let rows: Vec<Vec<f64>> = seeds(p.seed, count)
        .into_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let (a, q) = random_atom(&mut rng, p.n, AtomKind::ClassicalInf)?;
            let img = OperatorImage::forward(&a, KernelSpec::whole(1))?;
            let r2 = q.radius * q.radius;
            let span = q.time_interval().1 + 8.0 * r2;
            Ok((0..times_per_atom)
                .map(|i| {
                    let t = span * (i as f64 + 0.5) / times_per_atom as f64;
                    let reach = 20.0 * t.sqrt() + q.radius;
                    let (s, l1) = slice_integrals(&img, a.grid(), t, reach, 4);
                    if l1 > 0.0 {
                        s.abs() / l1
                    } else {
                        0.0
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let all: Vec<f64> = rows.concat();
    let mut res = ExperimentResult::new("mean-value", p);
    res.param("atoms", count as f64);
    res.param("times_per_atom", times_per_atom as f64);
    res.measure("max_relative_mean", max_of(&all));
    res.series.insert("relative_mean".into(), all.clone());
    res.gate(Gate::at_most("relative_mean", max_of(&all), tol));
    Ok(res.into())
}

/// `T f(t, x)` for `f = χ_{(0,1)×(-1,1)}` and `t > 1`.
pub fn counterexample_tf(t: f64, x: f64) -> f64 {
    cell_mass(x, -1.0, 1.0, t) - cell_mass(x, -1.0, 1.0, t - 1.0)
}

/// `I(T) = ∫_τ^T ∫_{|x| ≤ √t/2} |Tf|` with `τ = 4`, adaptive in `log t`.
pub fn counterexample_i(t_hi: f64) -> f64 {
    let tau0 = 4.0;
    if t_hi <= tau0 {
        return 0.0;
    }
    let gl = GaussLegendre::new(24);
    let inner = |t: f64| {
        let w = 0.5 * t.sqrt();
        gl.composite(-w, w, 4, |x| counterexample_tf(t, x).abs())
    };
    adaptive(|u: f64| { let t = u.exp(); t * inner(t) }, tau0.ln(), t_hi.ln(), 1e-12)
}

/// Logarithmic growth of `‖Tf‖_{L¹}` for an `f ∈ H¹_r(X)`.
pub fn run_counterexample_t(p: &Params) -> Result<Outcome> {
    p.require_1d("counterexample-T")?;
    let t_max = p.t_max.unwrap_or(256.0);
    if !(t_max >= 16.0) {
        return Err(Error::InvalidParameter(format!("T_max = {t_max} is below 4τ = 16")));
    }
    let tol = p.tol_or(0.2);
    let mut ts = vec![8.0];
    while ts.last().unwrap() * 2.0 <= t_max {
        let next = ts.last().unwrap() * 2.0;
        ts.push(next);
    }
    let is: Vec<f64> = ts.par_iter().map(|&t| counterexample_i(t)).collect();
    let diffs: Vec<f64> = is.windows(2).map(|w| w[1] - w[0]).collect();
    let logs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let (slope, _, fit_res) = linear_fit(&logs, &is);

    // the H¹_r bound of f through its odd extension
    let grid = SpaceTimeGrid::over_x(1, 2.0, 0.125, 2.0, 0.125)?;
    let f = GridFunction::from_fn(grid, |t, x| if t < 1.0 && x[0].abs() < 1.0 { 1.0 } else { 0.0 });
    let q = ParabolicBall::new_1d(0.0, 0.0, 1.0)?;
    let bound = finite_norm_bound(&f, &NormStrategy::OddExtension { ball: q }, 1e-9)?;

    let mut res = ExperimentResult::new("counterexample-T", p);
    res.param("T_max", t_max);
    res.param("tau", 4.0);
    res.measure("slope", slope);
    res.measure("fit_residual", fit_res);
    res.measure("h1r_bound", bound);
    let spread = if diffs.is_empty() {
        f64::NAN
    } else {
        (max_of(&diffs) - min_of(&diffs)) / min_of(&diffs)
    };
    res.measure("dyadic_spread", spread);
    res.series.insert("T".into(), ts.clone());
    res.series.insert("I_T".into(), is.clone());
    res.series.insert("dyadic_difference".into(), diffs.clone());
    res.gate(Gate::at_least("min_dyadic_difference", min_of(&diffs), f64::MIN_POSITIVE));
    res.gate(Gate::at_most("dyadic_spread", spread, tol));
    res.gate(Gate::at_least("slope", slope, f64::MIN_POSITIVE));
    res.gate(Gate::at_most("h1r_bound", bound, 4.0 * (1.0 + 1e-12)));
    Ok(Outcome {
        result: res,
        tables: vec![GrowthTable {
            name: "growth".into(),
            rows: ts.into_iter().zip(is).collect(),
        }],
    })
}

/// `∫_a^b |∂_t p_σ(z)| dz` for `n = 1`, split at the sign changes `±√(2σ)`.
fn abs_dt_kernel(sigma: f64, half: f64, tol: f64) -> f64 {
    let z0 = (2.0 * sigma).sqrt();
    let f = |z: f64| whole_space_kernel_dt(sigma, &[z]).abs();
    adaptive(f, -half, -z0, tol) + adaptive(f, -z0, z0, tol) + adaptive(f, z0, half, tol)
}

/// `c = ∫ |∂_t p_1|` for `n = 1` by quadrature.
pub fn tstar_constant() -> f64 {
    abs_dt_kernel(1.0, 40.0, 1e-15)
}

/// `D(T) = ∫_1^T ∫ |∂_t p_σ(z)| dz dσ` by nested quadrature.
pub fn tstar_double_integral(t_hi: f64) -> f64 {
    let gl = GaussLegendre::new(16);
    gl.composite(0.0, t_hi.ln(), 4 * (t_hi.ln().ceil() as usize).max(1), |u| {
        let s = u.exp();
        s * abs_dt_kernel(s, 40.0 * s.sqrt(), 1e-13 / s)
    })
}

/// Logarithmic growth of the `L¹` norm of the `T*` kernel.
pub fn run_counterexample_tstar(p: &Params) -> Result<Outcome> {
    p.require_1d("counterexample-Tstar")?;
    let t_max = p.t_max.unwrap_or(256.0);
    if !(t_max >= 4.0) {
        return Err(Error::InvalidParameter(format!("T_max = {t_max} is too small to fit")));
    }
    let c = tstar_constant();
    let closed = (2.0 / std::f64::consts::PI).sqrt() * (-0.5f64).exp();
    let mut ts = vec![2.0];
    while ts.last().unwrap() * 2.0 <= t_max {
        let next = ts.last().unwrap() * 2.0;
        ts.push(next);
    }
    let ds: Vec<f64> = ts.par_iter().map(|&t| tstar_double_integral(t)).collect();
    let logs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let (slope, _, fit_res) = linear_fit(&logs, &ds);
    let slope_err = (slope / c - 1.0).abs();
    let mut res = ExperimentResult::new("counterexample-Tstar", p);
    res.param("T_max", t_max);
    res.param("t_min", 1.0);
    res.measure("c", c);
    res.measure("c_closed_form", closed);
    res.measure("slope", slope);
    res.measure("slope_relative_error", slope_err);
    res.measure("fit_residual", fit_res);
    res.gate(Gate::at_most("c_error", (c - closed).abs(), 1e-6));
    res.gate(Gate::at_most("slope_relative_error", slope_err, p.tol_or(p.slope_tol)));
    Ok(Outcome {
        result: res,
        tables: vec![GrowthTable {
            name: "growth".into(),
            rows: ts.into_iter().zip(ds).collect(),
        }],
    })
}

/// A smooth random input: a few signed Gaussian bumps in `(t, x)`.
#[derive(Debug, Clone)]
struct Bumps(Vec<[f64; 4]>);

impl Bumps {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        Bumps(
            (0..3)
                .map(|_| {
                    [
                        rng.gen_range(0.5..2.5),
                        rng.gen_range(-2.0..2.0),
                        rng.gen_range(0.3..0.6),
                        if rng.gen_bool(0.5) { 1.0 } else { -1.0 } * rng.gen_range(0.5..1.5),
                    ]
                })
                .collect(),
        )
    }

    fn eval(&self, t: f64, x: f64) -> f64 {
        self.0
            .iter()
            .map(|[tc, xc, w, a]| a * (-((t - tc).powi(2) + (x - xc).powi(2)) / (w * w)).exp())
            .sum()
    }
}

/// Empirical `sup ‖Tf‖_p / ‖f‖_p` over a random family, one value per refinement level.
pub fn lp_ratios(ps: &[f64], samples: usize, refinements: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let family: Vec<Bumps> = seeds(seed, samples)
        .into_iter()
        .map(|s| Bumps::new(&mut ChaCha8Rng::seed_from_u64(s)))
        .collect();
    let spec = KernelSpec::whole(1);
    let mut out = vec![Vec::with_capacity(refinements); ps.len()];
    for level in 0..refinements {
        let h = 0.25 / 2f64.powi(level as i32);
        let grid = SpaceTimeGrid::over_x(1, 8.0, h, 4.0, h)?;
        let ratios: Vec<Vec<f64>> = family
            .par_iter()
            .map(|b| {
                let f = GridFunction::from_fn(grid.clone(), |t, x| b.eval(t, x[0]));
                let tf = apply_t(&f, &spec)?;
                Ok(ps
                    .iter()
                    .map(|&p| {
                        let d = f.lp_norm(Norm::L(p));
                        if d == 0.0 {
                            0.0
                        } else {
                            tf.lp_norm(Norm::L(p)) / d
                        }
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        for (i, o) in out.iter_mut().enumerate() {
            o.push(ratios.iter().map(|r| r[i]).fold(0.0, f64::max));
        }
    }
    Ok(out)
}

/// `‖Tf‖_1 / ‖f‖_1` for `f = χ_{(0,1)×(-1,1)}` on grids up to `t_hi`.
pub fn l1_growth(t_his: &[f64]) -> Result<Vec<f64>> {
    t_his
        .par_iter()
        .map(|&t_hi| {
            let h = 0.5;
            let l = (4.0 * t_hi.sqrt() / h).ceil() * h + 2.0;
            let grid = SpaceTimeGrid::over_x(1, l, h, t_hi, h)?;
            let f = GridFunction::from_fn(grid, |t, x| if t < 1.0 && x[0].abs() < 1.0 { 1.0 } else { 0.0 });
            let tf = apply_t(&f, &KernelSpec::whole(1))?;
            Ok(tf.l1_norm() / f.l1_norm())
        })
        .collect()
}

fn max_step_change(v: &[f64]) -> f64 {
    v.windows(2).map(|w| (w[1] / w[0] - 1.0).abs()).fold(0.0, f64::max)
}

/// Refinement stability of empirical `L^p` operator norms, with `p = 1` as a contrast.
pub fn run_lp_probe(p: &Params) -> Result<Outcome> {
    p.require_1d("lp-probe")?;
    let ps = [1.5, 2.0, 3.0, 4.0];
    let samples = p.atoms_or(6);
    let table = lp_ratios(&ps, samples, 3, p.seed)?;
    let tol = p.tol_or(p.refinement_tol);
    let mut res = ExperimentResult::new("lp-probe", p);
    res.param("samples", samples as f64);
    res.param("refinements", 3.0);
    for (pp, row) in ps.iter().zip(&table) {
        let key = format!("p={pp}");
        let change = max_step_change(row);
        res.measure(&format!("{key}.max_refinement_change"), change);
        res.series.insert(format!("{key}.sup_ratio"), row.clone());
        res.gate(Gate::at_most(&format!("{key}.refinement_change"), change, tol));
    }
    let t_his = [8.0, 32.0, 128.0];
    let growth = l1_growth(&t_his)?;
    res.series.insert("p=1.ratio_by_T".into(), growth.clone());
    let min_step = growth.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    res.measure("p=1.growth_factor", growth[2] / growth[0]);
    res.gate(Gate::at_least("p=1.min_increase", min_step, f64::MIN_POSITIVE));
    Ok(res.into())
}

/// `L²` refinement stability on a fixed random input family.
pub fn run_l2_stability(p: &Params) -> Result<Outcome> {
    p.require_1d("l2-stability")?;
    let samples = p.atoms_or(6);
    let row = lp_ratios(&[2.0], samples, 3, p.seed)?.remove(0);
    let change = max_step_change(&row);
    let mut res = ExperimentResult::new("l2-stability", p);
    res.param("samples", samples as f64);
    res.param("refinements", 3.0);
    res.measure("max_refinement_change", change);
    res.series.insert("sup_ratio".into(), row);
    res.gate(Gate::at_most("refinement_change", change, p.tol_or(p.refinement_tol)));
    Ok(res.into())
}

/// Boundary kind for [`boundary_dichotomy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

impl BoundaryKind {
    fn spec(self) -> KernelSpec {
        match self {
            BoundaryKind::Dirichlet => KernelSpec::dirichlet(),
            BoundaryKind::Neumann => KernelSpec::neumann(),
        }
    }
}

/// A mean-zero atom next to the spatial boundary: `+c` on `(0, r)`, `-c` on `(r, 2r)`.
pub fn dipole_atom(q: &ParabolicBall, grid: SpaceTimeGrid) -> GridFunction {
    let (x0, r) = (q.center.x[0], q.radius);
    let c = 1.0 / q.volume();
    let q = q.clone();
    GridFunction::from_fn(grid, move |t, x| {
        if !q.contains_coords(t, x) {
            0.0
        } else if x[0] < x0 {
            c
        } else {
            -c
        }
    })
    .masked(move |_, x| x[0] > 0.0 && x[0] < x0 + r)
}

/// Windowed relative moment `|∫_{(0, t_max) × (0, ∞)} Ta|` of an atom on the
/// half-line, with the operator on the grid.
pub fn half_line_moment(a: &GridFunction, q: &ParabolicBall, kind: BoundaryKind) -> Result<f64> {
    let ta = apply_t(a, &kind.spec())?;
    Ok(relative_moment(ta.integrate(), q, a))
}

fn half_line_grid(x_reach: f64, t_max: f64, r: f64) -> Result<SpaceTimeGrid> {
    let h = r / 4.0;
    let tau = r * r / 8.0;
    let l = ((x_reach + 8.0 * t_max.sqrt()) / h).ceil() * h;
    SpaceTimeGrid::over_x(1, l, h, (t_max / tau).ceil() * tau, tau)
}

/// Result of one dichotomy case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyCase {
    pub label: String,
    pub x0: f64,
    pub relative_moment: f64,
    pub fitted_alpha: Option<f64>,
}

/// Moments of `Ta` on the half-line for atoms at and away from the boundary.
pub fn boundary_dichotomy(kind: BoundaryKind, seed: u64, alpha: f64, j_max: u32) -> Result<Vec<DichotomyCase>> {
    let r = 1.0f64;
    let t0 = 16.0 * r * r;
    let t_max = 32.0 * r * r;
    let far = (20.0 * t_max.sqrt()).ceil();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    let mut run = |label: &str, q: ParabolicBall, a: GridFunction| -> Result<()> {
        let relative_moment = half_line_moment(&a, &q, kind)?;
        let img = OperatorImage::forward(&a, kind.spec())?;
        let rep = molecule_report_sampled(&img, &q, alpha, j_max, 8, SpatialDomain::HalfLine)?;
        cases.push(DichotomyCase {
            label: label.into(),
            x0: q.center.x[0],
            relative_moment,
            fitted_alpha: rep.fitted_alpha,
        });
        Ok(())
    };
    let near = ParabolicBall::new_1d(t0, r, r)?;
    run("dipole_near", near.clone(), dipole_atom(&near, half_line_grid(2.0 * r, t_max, r)?))?;
    let away = ParabolicBall::new_1d(t0, far, r)?;
    run("dipole_far", away.clone(), dipole_atom(&away, half_line_grid(far + r, t_max, r)?))?;
    for (i, m) in [1.0, 2.0, 3.0].into_iter().enumerate() {
        let q = ParabolicBall::new_1d(t0, m * r, r)?;
        let a = make_atom_on(half_line_grid(m * r + r, t_max, r)?, &q, AtomKind::ClassicalInf, &mut rng)?;
        let a = a.masked(|_, x| x[0] > 0.0);
        run(&format!("random_{i}"), q, a)?;
    }
    Ok(cases)
}

/// Dirichlet versus Neumann: whether `T` preserves the vanishing moment.
pub fn run_dichotomy(p: &Params) -> Result<Outcome> {
    p.require_1d("dichotomy")?;
    let tol = p.tol_or(1e-3);
    let j_max = p.j_max.min(6);
    let mut res = ExperimentResult::new("dichotomy", p);
    res.param("t_max", 32.0);
    res.param("J", j_max as f64);
    for kind in [BoundaryKind::Neumann, BoundaryKind::Dirichlet] {
        let name = match kind {
            BoundaryKind::Dirichlet => "dirichlet",
            BoundaryKind::Neumann => "neumann",
        };
        let cases = boundary_dichotomy(kind, p.seed, p.alpha, j_max)?;
        for c in &cases {
            res.measure(&format!("{name}.{}.relative_moment", c.label), c.relative_moment);
            res.measure(&format!("{name}.{}.fitted_alpha", c.label), c.fitted_alpha.unwrap_or(f64::NAN));
        }
        let min_fit = cases.iter().map(|c| c.fitted_alpha.unwrap_or(f64::NEG_INFINITY)).fold(f64::INFINITY, f64::min);
        res.gate(Gate::at_least(&format!("{name}.fitted_alpha"), min_fit, p.alpha));
        let get = |l: &str| cases.iter().find(|c| c.label == l).map(|c| c.relative_moment).unwrap_or(f64::NAN);
        match kind {
            BoundaryKind::Neumann => {
                let worst = cases.iter().map(|c| c.relative_moment).fold(0.0, f64::max);
                res.gate(Gate::at_most("neumann.relative_moment", worst, tol));
            }
            BoundaryKind::Dirichlet => {
                res.gate(Gate::at_least("dirichlet.near_relative_moment", get("dipole_near"), 10.0 * tol));
                res.gate(Gate::at_most("dirichlet.far_relative_moment", get("dipole_far"), tol));
            }
        }
    }
    Ok(res.into())
}

/// Decompositions of the atoms of `N` restricted to `X`, of even extensions,
/// and of molecules.
pub fn run_decompose_roundtrip(p: &Params) -> Result<Outcome> {
    p.require_1d("decompose-roundtrip")?;
    let balls = p.atoms_or(100);
    let tol = p.tol_or(1e-12);
    let restrict: Vec<(f64, f64, f64)> = seeds(p.seed, balls)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let r = rng.gen_range(0.5..2.0);
            let t0 = rng.gen_range(-0.95..0.95) * r * r;
            let x0 = rng.gen_range(-2.0..2.0);
            let q = ParabolicBall::new_1d(t0, x0, r)?;
            let a = make_atom_on(atom_grid(&q, AtomKind::Classical2)?, &q, AtomKind::Classical2, &mut rng)?;
            let d = restrict_decompose(&a, &q, 0.05)?;
            Ok((d.residual, d.ledger["whitney_overlap"], d.ledger["coefficient_constant"]))
        })
        .collect::<Result<_>>()?;
    let hz: Vec<(f64, f64)> = seeds(p.seed ^ 1, 20)
        .into_par_iter()
        .map(|s| {
            let (f, given) = even_family(s, 6)?;
            let (d, _) = hz_decompose(&f, &given, 1e-10)?;
            Ok((d.residual, d.coefficient_sum / given.coefficient_sum))
        })
        .collect::<Result<_>>()?;
    let mol: Vec<(u32, f64, f64, f64)> = [2u32, 3]
        .into_par_iter()
        .map(|j| {
            let (m, q) = molecule_input(p.seed, j)?;
            let rep = molecule_report(&m, &q, p.alpha, j)?;
            let d = molecule_decompose(&m, &q, p.alpha, j, 4.0 * rep.constant.max(1.0), 1e-2)?;
            Ok((j, d.residual, d.ledger["tail_constant"], rep.constant))
        })
        .collect::<Result<_>>()?;

    let mut res = ExperimentResult::new("decompose-roundtrip", p);
    res.param("straddling_balls", balls as f64);
    res.param("alpha", p.alpha);
    let r_res: Vec<f64> = restrict.iter().map(|r| r.0).collect();
    let r_ov: Vec<f64> = restrict.iter().map(|r| r.1).collect();
    let r_c: Vec<f64> = restrict.iter().map(|r| r.2).collect();
    res.measure("restrict.max_residual", max_of(&r_res));
    res.measure("restrict.max_overlap", max_of(&r_ov));
    res.measure("restrict.max_coefficient_constant", max_of(&r_c));
    let hz_res: Vec<f64> = hz.iter().map(|h| h.0).collect();
    let hz_ratio: Vec<f64> = hz.iter().map(|h| h.1).collect();
    res.measure("hz.max_residual", max_of(&hz_res));
    res.measure("hz.max_coefficient_ratio", max_of(&hz_ratio));
    res.gate(Gate::at_most("restrict.residual", max_of(&r_res), 0.0));
    res.gate(Gate::at_most("whitney_overlap", max_of(&r_ov), 16.0));
    res.gate(Gate::at_most("hz.residual", max_of(&hz_res), tol));
    res.gate(Gate::at_most("hz.coefficient_ratio", max_of(&hz_ratio), 1.0 + 1e-12));
    for (j, resid, c_tail, c_mol) in mol {
        res.measure(&format!("molecule.J={j}.residual"), resid);
        res.measure(&format!("molecule.J={j}.tail_constant"), c_tail);
        res.measure(&format!("molecule.J={j}.molecule_constant"), c_mol);
        let bound = c_mol * 2f64.powf(-(j as f64) * p.alpha);
        res.gate(Gate::at_most(&format!("molecule.J={j}.residual"), resid, bound));
    }
    Ok(res.into())
}

/// Even input on `N` and a decomposition of it: random atoms paired with their reflections.
pub fn even_family(seed: u64, count: usize) -> Result<(GridFunction, Decomposition)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = SpaceTimeGrid::symmetric(1, 6.0, 0.125, 6.0, 1.0 / 16.0)?;
    let mut terms = Vec::new();
    for _ in 0..count {
        let r = [0.5, 1.0][rng.gen_range(0..2)];
        let t0 = rng.gen_range(-4.0..4.0);
        let x0 = rng.gen_range(-3.0..3.0);
        let q = ParabolicBall::new_1d(t0, x0, r)?;
        let a = make_atom_on(grid.clone(), &q, AtomKind::Classical2, &mut rng)?;
        let lam = rng.gen_range(0.1..2.0);
        terms.push(Term {
            coefficient: lam,
            atom: a.time_reflect()?,
            ball: ParabolicBall::new_1d(-t0, x0, r)?,
            kind: AtomKind::Classical2,
        });
        terms.push(Term {
            coefficient: lam,
            atom: a,
            ball: q,
            kind: AtomKind::Classical2,
        });
    }
    let given = Decomposition::from_terms(terms, &grid)?;
    let f = given.reconstruct(&grid)?.restrict()?;
    Ok((f, given))
}

/// `Ta` for a random type (a) atom, on a grid covering `2^{J+1} Q ∩ X`.
fn molecule_input(seed: u64, j_max: u32) -> Result<(GridFunction, ParabolicBall)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = 1.0;
    let q = ParabolicBall::new_1d(17.0, 0.0, r)?;
    let outer = q.dilate(2f64.powi(j_max as i32 + 1));
    let h = 0.25;
    let tau = 0.25;
    let l = (outer.radius / h).ceil() * h;
    let t_hi = (outer.time_interval().1 / tau).ceil() * tau;
    let grid = SpaceTimeGrid::over_x(1, l, h, t_hi, tau)?;
    let a = make_atom_on(grid, &q, AtomKind::TypeA, &mut rng)?;
    Ok((apply_t(&a, &KernelSpec::whole(1))?, q))
}

/// Catalogue entry of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentInfo {
    pub id: &'static str,
    pub summary: &'static str,
    /// The statement the experiment certifies.
    pub statement: &'static str,
    /// `(name, default, meaning)` of the parameters it reads.
    pub parameters: &'static [(&'static str, &'static str, &'static str)],
}

pub const EXPERIMENTS: &[ExperimentInfo] = &[
    ExperimentInfo {
        id: "certify-T",
        summary: "Ta is a molecule with vanishing moment for random (1,∞)-atoms a",
        statement: "Ta is a molecule: on the j-th annulus of 2^jQ, |Ta| ≲ 2^{−jα}ν(2^jQ∩X)^{−1}, with α = γ",
        parameters: &[
            ("n", "1", "spatial dimension (1 or 2)"),
            ("seed", "0", "master seed"),
            ("atoms", "50", "number of random atoms"),
            ("alpha", "0.5", "molecule decay exponent"),
            ("j_max", "8", "number of annuli"),
            ("samples_per_radius", "8", "annulus lattice resolution"),
            ("band", "4", "allowed max/min ratio of molecule constants"),
            ("tol", "1e-3", "relative moment tolerance"),
        ],
    },
    ExperimentInfo {
        id: "certify-Tstar",
        summary: "T* maps type (a) and type (b) atoms to molecules; type (b) decays faster",
        statement: "‖T*b(t,x)| ≲ ν(2^jQ∩X)^{−1/2}e^{−C4^j} and ∬_X T*b dν = 0",
        parameters: &[
            ("n", "1", "spatial dimension (1 or 2)"),
            ("seed", "0", "master seed"),
            ("atoms", "20", "atoms per kind"),
            ("alpha", "0.5", "molecule decay exponent"),
            ("j_max", "8", "number of annuli"),
            ("tol", "1e-3", "relative moment tolerance"),
        ],
    },
    ExperimentInfo {
        id: "mean-value",
        summary: "per-time spatial integrals of Ta vanish",
        statement: "∫_X Ta dν = 0 when a ∈ H¹_z(X) is an (1,∞)-atom",
        parameters: &[
            ("seed", "0", "master seed"),
            ("atoms", "10", "number of random atoms"),
            ("tol", "1e-3", "relative tolerance per sampled time"),
        ],
    },
    ExperimentInfo {
        id: "counterexample-T",
        summary: "‖Tf‖_{L¹} grows like log T for f = χ_{(0,1)×(-1,1)} ∈ H¹_r(X)",
        statement: "T is not bounded from H¹_r(X) to L¹(X)",
        parameters: &[
            ("tmax", "256", "largest truncation time"),
            ("tol", "0.2", "allowed spread of dyadic differences"),
        ],
    },
    ExperimentInfo {
        id: "counterexample-Tstar",
        summary: "the L¹ norm of the T* kernel grows like c log T",
        statement: "T* is not bounded on L¹(X); c = ∫_{ℝⁿ}|p′₁(x)|dx > 0",
        parameters: &[
            ("tmax", "256", "largest truncation time"),
            ("tol", "0.05", "relative slope tolerance"),
        ],
    },
    ExperimentInfo {
        id: "lp-probe",
        summary: "empirical L^p norms of T are stable under refinement; p = 1 grows with the domain",
        statement: "There is maximal Lᵠ regularity property for the Cauchy problem",
        parameters: &[
            ("seed", "0", "master seed"),
            ("atoms", "6", "inputs in the random family"),
            ("tol", "0.1", "allowed change between refinements"),
        ],
    },
    ExperimentInfo {
        id: "l2-stability",
        summary: "empirical L² norm of T is stable across three dyadic refinements",
        statement: "T is bounded from L²(X) to L²(X)",
        parameters: &[
            ("seed", "0", "master seed"),
            ("atoms", "6", "inputs in the random family"),
            ("tol", "0.1", "allowed change between refinements"),
        ],
    },
    ExperimentInfo {
        id: "dichotomy",
        summary: "Neumann T preserves vanishing moments; Dirichlet T does not near the boundary",
        statement: "In the case of Dirichlet boundary condition, T is bounded from H¹_z(X) into H¹_r(X); Neumann into H¹_z(X)",
        parameters: &[
            ("seed", "0", "master seed"),
            ("alpha", "0.5", "molecule decay exponent"),
            ("j_max", "6", "number of annuli (capped at 6)"),
            ("tol", "1e-3", "relative moment tolerance"),
        ],
    },
    ExperimentInfo {
        id: "decompose-roundtrip",
        summary: "restriction, symmetrization and molecule decompositions reconstruct their inputs",
        statement: "H¹_r(X) and H¹_z(X) admit atomic decompositions; H¹(X) = H¹_z(X)",
        parameters: &[
            ("seed", "0", "master seed"),
            ("atoms", "100", "number of straddling balls"),
            ("alpha", "0.5", "molecule decay exponent"),
            ("tol", "1e-12", "symmetrization residual tolerance"),
        ],
    },
];

pub fn experiment_info(id: &str) -> Option<&'static ExperimentInfo> {
    EXPERIMENTS.iter().find(|e| e.id == id)
}

/// Runs the experiment `id`.
pub fn run_experiment(id: &str, p: &Params) -> Result<Outcome> {
    if p.n != 1 && p.n != 2 {
        return Err(Error::UnsupportedDimension(p.n));
    }
    match id {
        "certify-T" => run_certify_t(p),
        "certify-Tstar" => run_certify_tstar(p),
        "mean-value" => run_mean_value(p),
        "counterexample-T" => run_counterexample_t(p),
        "counterexample-Tstar" => run_counterexample_tstar(p),
        "lp-probe" => run_lp_probe(p),
        "l2-stability" => run_l2_stability(p),
        "dichotomy" => run_dichotomy(p),
        "decompose-roundtrip" => run_decompose_roundtrip(p),
        _ => Err(Error::InvalidParameter(format!("unknown experiment {id:?}"))),
    }
}
