//! Constructive atomic decompositions on `N` and `X`.
//!
//! Every routine returns a finite [`Decomposition`] together with its
//! reconstruction residual and a ledger of measured constants.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::atoms::{molecule_report, validate_atom, AtomKind};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, SpaceTimeGrid};
use crate::space::{ParabolicBall, SpacePoint, SpatialDomain};

/// Overlap bound asserted on every Whitney cover, by dimension.
pub fn whitney_overlap_limit(n: usize) -> usize {
    if n == 1 {
        16
    } else {
        64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: f64,
    pub atom: GridFunction,
    pub ball: ParabolicBall,
    pub kind: AtomKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub terms: Vec<Term>,
    pub coefficient_sum: f64,
    /// `L¹` norm of `input - Σ λ a` on the input grid.
    pub residual: f64,
    pub ledger: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TermRecord {
    pub coefficient: f64,
    pub ball: ParabolicBall,
    pub kind: AtomKind,
    pub support_cells: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionRecord {
    pub terms: Vec<TermRecord>,
    pub coefficient_sum: f64,
    pub residual: f64,
    pub ledger: BTreeMap<String, f64>,
}

impl Decomposition {
    fn new(terms: Vec<Term>, input: &GridFunction) -> Result<Self> {
        let recon = reconstruct(&terms, input.grid())?;
        let residual = input.sub(&recon)?.l1_norm();
        Ok(Decomposition {
            coefficient_sum: terms.iter().map(|t| t.coefficient.abs()).sum(),
            terms,
            residual,
            ledger: BTreeMap::new(),
        })
    }

    /// A decomposition of its own reconstruction `Σ λ a` on `grid`.
    pub fn from_terms(terms: Vec<Term>, grid: &SpaceTimeGrid) -> Result<Self> {
        let recon = reconstruct(&terms, grid)?;
        Decomposition::new(terms, &recon)
    }

    /// `Σ λ a` on `grid` (atoms must live on it).
    pub fn reconstruct(&self, grid: &SpaceTimeGrid) -> Result<GridFunction> {
        reconstruct(&self.terms, grid)
    }

    pub fn record(&self) -> DecompositionRecord {
        DecompositionRecord {
            terms: self
                .terms
                .iter()
                .map(|t| TermRecord {
                    coefficient: t.coefficient,
                    ball: t.ball.clone(),
                    kind: t.kind,
                    support_cells: t.atom.support().count(),
                })
                .collect(),
            coefficient_sum: self.coefficient_sum,
            residual: self.residual,
            ledger: self.ledger.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.record())?)
    }

    /// Writes each atom as `atom_<index>.bin` in `dir`.
    pub fn save_atoms(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        self.terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let p = dir.join(format!("atom_{i:04}.bin"));
                t.atom.save_binary(&p)?;
                Ok(p)
            })
            .collect()
    }
}

fn reconstruct(terms: &[Term], grid: &SpaceTimeGrid) -> Result<GridFunction> {
    let mut out = GridFunction::zeros(grid.clone());
    for t in terms {
        out.axpy(t.coefficient, &t.atom)?;
    }
    Ok(out)
}

/// `f` on a grid that covers `q`, zero-padded if needed.
fn covering<'a>(f: &'a GridFunction, q: &ParabolicBall) -> Result<Cow<'a, GridFunction>> {
    if f.grid().covers_ball(q) {
        return Ok(Cow::Borrowed(f));
    }
    let reach = q.center.x.iter().map(|c| c.abs()).fold(0.0, f64::max) + q.radius;
    let top = q.time_interval().1;
    let padded = f.padded(reach, top.max(f.grid().t_hi()))?;
    if !padded.grid().covers_ball(q) {
        return Err(Error::Coverage("ball extends below the grid's time origin".into()));
    }
    Ok(Cow::Owned(padded))
}

/// Validates `a` against `kind`, padding its grid if needed.
pub fn validate_padded(a: &GridFunction, q: &ParabolicBall, kind: AtomKind, tol: f64) -> Result<crate::atoms::AtomCertificate> {
    let g = covering(a, q)?;
    validate_atom(g.as_ref(), q, kind, tol)
}

fn ball_at(t: f64, x: &[f64], r: f64) -> ParabolicBall {
    ParabolicBall {
        center: SpacePoint::new(t, x.to_vec()),
        radius: r,
    }
}

/// Parameters of the Whitney construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhitneyParams {
    /// Ratio between consecutive layer tops (layers are `[U/λ, U)`).
    pub layer_ratio: f64,
    /// Cover `Q ∩ X ∩ {t >= t_min}`; the construction never reaches `t = 0`.
    pub t_min: f64,
}

/// Whitney-type cover of `Q ∩ X ∩ {t >= t_min}` by balls inside `X`.
///
/// Layers `[U/λ, U)` with `U = 4^{-k}...` descending from the top of
/// `Q ∩ X`. In a layer with top `U`, balls have radius `ρ = √U / 4` and
/// time centers `t_c ∈ (U/4, 15U/16]` spaced `U/16`, so `4ρ² < t_c < 16ρ²`:
/// each ball satisfies `2Q_j ⊆ X` and `4Q_j ⊄ X`. Spatial centers sit on a
/// lattice of spacing `ρ` around the center of `Q`.
pub fn whitney_cover(q: &ParabolicBall, params: WhitneyParams) -> Result<Vec<ParabolicBall>> {
    let (lo, hi) = q.time_interval();
    if hi <= 0.0 {
        return Err(Error::Geometry {
            kind: "whitney".into(),
            reason: "Q ∩ X is empty".into(),
        });
    }
    if q.scaled_inside_x(2.0) {
        return Err(Error::Geometry {
            kind: "whitney".into(),
            reason: "2Q ⊆ X; no Whitney cover needed".into(),
        });
    }
    let lambda = params.layer_ratio;
    if !(lambda > 1.0 && lambda <= 4.0) || !(params.t_min > 0.0) {
        return Err(Error::InvalidParameter(format!("layer ratio {lambda}, t_min {}", params.t_min)));
    }
    let bottom = lo.max(params.t_min);
    let n = q.dim();
    let r = q.radius;
    let mut balls = Vec::new();
    let mut u = hi;
    loop {
        let rho = u.sqrt() / 4.0;
        let c_lo = (0.25f64 + 1.0 / 64.0).max(1.0 / lambda - 1.0 / 16.0);
        let mut times = Vec::new();
        let mut i = 0;
        loop {
            let c = c_lo + i as f64 / 16.0;
            if c > 15.0 / 16.0 + 1e-12 {
                break;
            }
            times.push(c * u);
            i += 1;
        }
        if times.last().map_or(true, |&t| t + u / 16.0 < u * (1.0 - 1e-12)) {
            times.push(15.0 / 16.0 * u);
        }
        let m = (r / rho).floor() as i64;
        let offsets: Vec<f64> = (-m..=m).map(|k| k as f64 * rho).collect();
        for &tc in &times {
            // skip balls entirely above or below Q's time window
            if tc - u / 16.0 >= hi || tc + u / 16.0 <= bottom {
                continue;
            }
            if n == 1 {
                for &o in &offsets {
                    balls.push(ball_at(tc, &[q.center.x[0] + o], rho));
                }
            } else {
                for &o0 in &offsets {
                    for &o1 in &offsets {
                        if (o0 * o0 + o1 * o1).sqrt() >= r + rho {
                            continue;
                        }
                        balls.push(ball_at(tc, &[q.center.x[0] + o0, q.center.x[1] + o1], rho));
                    }
                }
            }
        }
        let covered_down_to = (c_lo - 1.0 / 16.0) * u;
        if covered_down_to <= bottom {
            break;
        }
        u /= lambda;
    }
    Ok(balls)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhitneyStats {
    pub balls: usize,
    /// Largest number of balls containing one cell center of `Q ∩ X`.
    pub overlap: usize,
    /// `Σ ν(Q_j) / ν(Q ∩ X)`.
    pub volume_ratio: f64,
    /// Every cell center of `Q ∩ X` on the grid is in some ball.
    pub covers: bool,
    pub all_inside_x: bool,
}

/// Brute-force overlap and coverage count over the cells of `grid`.
pub fn whitney_stats(q: &ParabolicBall, balls: &[ParabolicBall], grid: &SpaceTimeGrid) -> WhitneyStats {
    let n = grid.dim();
    let mut overlap = 0;
    let mut covers = true;
    for k in 0..grid.nt() {
        let t = grid.t_center(k);
        if t <= 0.0 {
            continue;
        }
        for c in 0..grid.row_len() {
            let x = grid.spatial_center(c);
            if !q.contains_coords(t, &x[..n]) {
                continue;
            }
            let cnt = balls.iter().filter(|b| b.contains_coords(t, &x[..n])).count();
            overlap = overlap.max(cnt);
            covers &= cnt > 0;
        }
    }
    WhitneyStats {
        balls: balls.len(),
        overlap,
        volume_ratio: balls.iter().map(|b| b.volume()).sum::<f64>() / q.truncated_volume(),
        covers,
        all_inside_x: balls.iter().all(|b| b.scaled_inside_x(1.0)),
    }
}

/// Smallest power of two `>= x`, so division by it is exact.
fn pow2_ceil(x: f64) -> f64 {
    2f64.powi(x.log2().ceil() as i32)
}

/// Splits a classical `(1,2)`-atom `A` of `N` restricted to `X` into type
/// (a)/(b) atoms. `A` lives on a grid symmetric in time.
pub fn restrict_decompose(a: &GridFunction, q: &ParabolicBall, tol: f64) -> Result<Decomposition> {
    let cert = validate_atom(a, q, AtomKind::Classical2, tol)?;
    if !cert.pass {
        return Err(Error::NotAnAtom(format!("input fails classical_2 validation: {cert:?}")));
    }
    let (_, hi) = q.time_interval();
    if hi <= 0.0 {
        return Err(Error::Geometry {
            kind: "restriction".into(),
            reason: "Q does not meet X".into(),
        });
    }
    let f = a.restrict()?;
    let (two, four) = q.contains_scaled();
    let mut ledger = BTreeMap::new();
    let terms = if four || two {
        let kind = if four { AtomKind::TypeA } else { AtomKind::TypeB };
        vec![Term {
            coefficient: 1.0,
            atom: f.clone(),
            ball: q.clone(),
            kind,
        }]
    } else {
        let grid = f.grid().clone();
        let balls = whitney_cover(
            q,
            WhitneyParams {
                layer_ratio: 4.0,
                t_min: 0.5 * grid.tau(),
            },
        )?;
        let stats = whitney_stats(q, &balls, &grid);
        ledger.insert("whitney_overlap".into(), stats.overlap as f64);
        ledger.insert("whitney_volume_ratio".into(), stats.volume_ratio);
        ledger.insert("whitney_balls".into(), stats.balls as f64);
        if stats.overlap > whitney_overlap_limit(grid.dim()) {
            return Err(Error::InvalidParameter(format!("Whitney overlap {} exceeds limit", stats.overlap)));
        }
        // each support cell goes to the first ball containing its center
        let n = grid.dim();
        let mut pieces: Vec<GridFunction> = Vec::new();
        let mut owner: Vec<usize> = Vec::new();
        let mut piece_of = vec![usize::MAX; balls.len()];
        for idx in f.support() {
            let (k, c) = grid.split(idx);
            let t = grid.t_center(k);
            let x = grid.spatial_center(c);
            let Some(b) = balls.iter().position(|b| b.contains_coords(t, &x[..n])) else {
                return Err(Error::Coverage("Whitney balls miss a support cell".into()));
            };
            if piece_of[b] == usize::MAX {
                piece_of[b] = pieces.len();
                pieces.push(GridFunction::zeros(grid.clone()));
                owner.push(b);
            }
            pieces[piece_of[b]].values_mut()[idx] = f.values()[idx];
        }
        pieces
            .into_iter()
            .zip(owner)
            .map(|(p, b)| {
                let ball = balls[b].clone();
                let lambda = pow2_ceil(p.l2_norm() * ball.volume().sqrt());
                Term {
                    coefficient: lambda,
                    atom: p.scaled(1.0 / lambda),
                    ball,
                    kind: AtomKind::TypeB,
                }
            })
            .collect()
    };
    for t in &terms {
        let c = validate_padded(&t.atom, &t.ball, t.kind, tol)?;
        if !c.pass {
            return Err(Error::NotAnAtom(format!("restricted piece fails {:?}: {c:?}", t.kind)));
        }
    }
    let mut d = Decomposition::new(terms, &f)?;
    let scale = a.l2_norm() * q.truncated_volume().sqrt();
    ledger.insert("coefficient_constant".into(), if scale > 0.0 { d.coefficient_sum / scale } else { 0.0 });
    d.ledger = ledger;
    Ok(d)
}

/// The odd reflection of a type (b) atom as a `(1,2)`-atom on `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reflected {
    /// `b` on `X`, `-b(-t, x)` on `t < 0`, on a symmetric grid covering `ball`.
    pub function: GridFunction,
    /// The enclosing ball centered at `(0, y)` with radius `5r`.
    pub ball: ParabolicBall,
    /// `‖B‖_2 ν(Q̃)^{1/2}`; `B / constant` is a normalized atom.
    pub constant: f64,
}

pub fn reflect_assemble(b: &GridFunction, q: &ParabolicBall, tol: f64) -> Result<Reflected> {
    let cert = validate_atom(b, q, AtomKind::TypeB, tol)?;
    if !cert.pass {
        return Err(Error::NotAnAtom(format!("input fails type_b validation: {cert:?}")));
    }
    let big = ball_at(0.0, &q.center.x, 5.0 * q.radius);
    let reach = q.center.x.iter().map(|c| c.abs()).fold(0.0, f64::max) + big.radius;
    let padded = b.padded(reach, big.time_interval().1)?;
    let function = padded.odd_extend()?;
    let constant = function.l2_norm() * big.volume().sqrt();
    let normalized = function.scaled(1.0 / constant);
    let c = validate_atom(&normalized, &big, AtomKind::Classical2, tol)?;
    if !c.pass {
        return Err(Error::NotAnAtom(format!("reflected atom fails classical_2: {c:?}")));
    }
    Ok(Reflected {
        function,
        ball: big,
        constant,
    })
}

/// Which of the three symmetrization cases applied to an input atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HzCase {
    Inside,
    Reflected,
    Straddling,
}

/// Turns a decomposition of the even extension `f_e` into `(1,2)`-atoms
/// supported in `X` that reconstruct `f`.
pub fn hz_decompose(f: &GridFunction, given: &Decomposition, tol: f64) -> Result<(Decomposition, Vec<HzCase>)> {
    let fe = f.even_extend()?;
    let residual = fe.sub(&given.reconstruct(fe.grid())?)?.l1_norm();
    if residual > tol {
        return Err(Error::Residual { residual, tol });
    }
    let half = f.grid().clone();
    let mut terms = Vec::with_capacity(given.terms.len());
    let mut cases = Vec::with_capacity(given.terms.len());
    for term in &given.terms {
        let a = &term.atom;
        let g = a.grid();
        let mut pos = false;
        let mut neg = false;
        for idx in a.support() {
            let (k, _) = g.split(idx);
            if g.t_center(k) > 0.0 {
                pos = true;
            } else {
                neg = true;
            }
        }
        if !pos && !neg {
            continue;
        }
        let refl = a.time_reflect()?;
        let (atom, ball, case) = if !neg {
            (a.restrict()?.scaled(0.5), term.ball.clone(), HzCase::Inside)
        } else if !pos {
            let q = &term.ball;
            let mirrored = ball_at(-q.t0(), &q.center.x, q.radius);
            (refl.restrict()?.scaled(0.5), mirrored, HzCase::Reflected)
        } else {
            let mut sym = a.clone();
            sym.axpy(1.0, &refl)?;
            let r = term.ball.radius;
            (sym.restrict()?.scaled(0.5), ball_at(r * r, &term.ball.center.x, r), HzCase::Straddling)
        };
        // a ball reaching below t = 0 is moved up; the support stays inside
        let ball = if ball.time_interval().0 < 0.0 {
            ball_at(ball.radius * ball.radius, &ball.center.x, ball.radius)
        } else {
            ball
        };
        debug_assert_eq!(atom.grid(), &half);
        terms.push(Term {
            coefficient: term.coefficient,
            atom,
            ball,
            kind: AtomKind::Classical2,
        });
        cases.push(case);
    }
    let mut worst_moment: f64 = 0.0;
    for t in &terms {
        let c = validate_padded(&t.atom, &t.ball, AtomKind::Classical2, tol)?;
        if !c.pass || t.ball.time_interval().0 < 0.0 {
            return Err(Error::NotAnAtom(format!("symmetrized atom fails: {c:?}")));
        }
        if c.moment_scale > 0.0 {
            worst_moment = worst_moment.max(c.moment.abs() / c.moment_scale);
        }
    }
    let mut d = Decomposition::new(terms, f)?;
    d.ledger.insert("input_coefficient_sum".into(), given.coefficient_sum);
    d.ledger.insert("worst_relative_moment".into(), worst_moment);
    Ok((d, cases))
}

/// Result of moving an `H¹(X)` atom to a ball inside `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct Recentred {
    pub ball: ParabolicBall,
    /// `(ν(Q̃) / ν(Q ∩ X))^{1/2}`, the renormalization factor.
    pub factor: f64,
    pub volume_ratio: f64,
}

/// For an atom with ball `Q` centered at `(s, y)`, `s > 0`, returns the ball
/// `((r², y), r)` when `Q ⊄ X`, or `Q` itself.
pub fn recentre_atom(a: &GridFunction, q: &ParabolicBall) -> Result<(GridFunction, Recentred)> {
    let s = q.t0();
    if s <= 0.0 {
        return Err(Error::Geometry {
            kind: "half_space".into(),
            reason: format!("ball center time {s} is not in X"),
        });
    }
    let r = q.radius;
    if q.scaled_inside_x(1.0) {
        return Ok((
            a.clone(),
            Recentred {
                ball: q.clone(),
                factor: 1.0,
                volume_ratio: 1.0,
            },
        ));
    }
    let ball = ball_at(r * r, &q.center.x, r);
    let volume_ratio = ball.volume() / q.truncated_volume();
    let g = a.grid();
    let n = g.dim();
    let inside = a.support().all(|idx| {
        let (k, c) = g.split(idx);
        let x = g.spatial_center(c);
        ball.contains_coords(g.t_center(k), &x[..n])
    });
    if !inside {
        return Err(Error::NotAnAtom("support leaves the recentred ball".into()));
    }
    Ok((
        a.clone(),
        Recentred {
            ball,
            factor: volume_ratio.sqrt(),
            volume_ratio,
        },
    ))
}

/// Decomposes a certified molecule into `H¹(X)` atoms: the mean-free
/// annulus pieces `a_j` with `λ_j = 2^{-jα}` and the telescoped mean
/// corrections `b_j` with `μ_j = ∫_{2^j Q ∩ X} m`.
pub fn molecule_decompose(m: &GridFunction, q: &ParabolicBall, alpha: f64, j_max: u32, c_max: f64, moment_tol: f64) -> Result<Decomposition> {
    let report = molecule_report(m, q, alpha, j_max)?;
    if !report.certifies(c_max, moment_tol) {
        return Err(Error::NotAMolecule(format!(
            "constant {} (limit {c_max}), moment {:e} (limit {moment_tol:e})",
            report.constant, report.moment
        )));
    }
    let grid = m.grid();
    let n = grid.dim();
    let cm = grid.cell_measure();
    let jn = j_max as usize;
    // annulus index per cell (0 = none)
    let mut which = vec![0u32; grid.len()];
    let mut counts = vec![0usize; jn + 1];
    for idx in 0..grid.len() {
        let (k, c) = grid.split(idx);
        let t = grid.t_center(k);
        let x = grid.spatial_center(c);
        if let Some(j) = (1..=j_max).find(|&j| q.annulus_contains_in(j, t, &x[..n], SpatialDomain::Whole)) {
            which[idx] = j;
            counts[j as usize] += 1;
        }
    }
    let vol: Vec<f64> = counts.iter().map(|&c| c as f64 * cm).collect();
    let mut ints = vec![0.0; jn + 1];
    for (idx, &v) in m.values().iter().enumerate() {
        ints[which[idx] as usize] += v * cm;
    }
    let mut terms = Vec::new();
    let mut atom_constant: f64 = 0.0;
    for j in 1..=j_max {
        let ju = j as usize;
        if counts[ju] == 0 {
            continue;
        }
        let mean = ints[ju] / vol[ju];
        let lambda = 2f64.powf(-(j as f64) * alpha);
        let mut a = GridFunction::zeros(grid.clone());
        let mut nonzero = false;
        for idx in 0..grid.len() {
            if which[idx] == j {
                let v = (m.values()[idx] - mean) / lambda;
                nonzero |= v != 0.0;
                a.values_mut()[idx] = v;
            }
        }
        if !nonzero {
            continue;
        }
        let ball = q.dilate(2f64.powi(j as i32 + 1));
        atom_constant = atom_constant.max(a.l2_norm() * ball.truncated_volume().sqrt());
        terms.push(Term {
            coefficient: lambda,
            atom: a,
            ball,
            kind: AtomKind::HalfSpace,
        });
    }
    let mut mu_constant: f64 = 0.0;
    let mut b_constant: f64 = 0.0;
    let mut partial = ints[1];
    for j in 2..=j_max {
        let ju = j as usize;
        let mu = partial;
        partial += ints[ju];
        if counts[ju] == 0 || counts[ju - 1] == 0 {
            continue;
        }
        mu_constant = mu_constant.max(mu.abs() * 2f64.powf(j as f64 * alpha));
        let mut b = GridFunction::zeros(grid.clone());
        for idx in 0..grid.len() {
            if which[idx] == j - 1 {
                b.values_mut()[idx] = 1.0 / vol[ju - 1];
            } else if which[idx] == j {
                b.values_mut()[idx] = -1.0 / vol[ju];
            }
        }
        let ball = q.dilate(2f64.powi(j as i32 + 1));
        b_constant = b_constant.max(b.l2_norm() * ball.truncated_volume().sqrt());
        if mu != 0.0 {
            terms.push(Term {
                coefficient: mu,
                atom: b,
                ball,
                kind: AtomKind::HalfSpace,
            });
        }
    }
    let c = atom_constant.max(b_constant).max(1.0);
    for t in &terms {
        let cert = validate_padded(&t.atom.scaled(1.0 / c), &t.ball, AtomKind::HalfSpace, moment_tol.max(1e-9))?;
        if !cert.pass {
            return Err(Error::NotAnAtom(format!("molecule piece fails half_space validation: {cert:?}")));
        }
    }
    let mut d = Decomposition::new(terms, m)?;
    d.ledger.insert("atom_constant".into(), atom_constant);
    d.ledger.insert("b_constant".into(), b_constant);
    d.ledger.insert("mu_constant".into(), mu_constant);
    d.ledger.insert("molecule_constant".into(), report.constant);
    d.ledger.insert("tail_constant".into(), d.residual * 2f64.powf(j_max as f64 * alpha));
    Ok(d)
}

/// How [`finite_norm_bound`] should decompose its input.
#[derive(Debug, Clone, PartialEq)]
pub enum NormStrategy {
    /// The input is a multiple of one atom of the given kind.
    Atom { ball: ParabolicBall, kind: AtomKind },
    /// `H¹_r` bound via the odd extension as one `(1,2)`-atom on `N`.
    OddExtension { ball: ParabolicBall },
    /// `H¹_z` bound via the zero extension as one `(1,2)`-atom on `N`.
    ZeroExtension { ball: ParabolicBall },
    /// `H¹_z` bound via [`molecule_decompose`].
    Molecule { ball: ParabolicBall, alpha: f64, j_max: u32, c_max: f64 },
}

/// Upper bound on the atomic norm: the coefficient sum of one constructed
/// decomposition. This is never the infimum over all decompositions.
pub fn finite_norm_bound(f: &GridFunction, strategy: &NormStrategy, tol: f64) -> Result<f64> {
    let single = |g: &GridFunction, ball: &ParabolicBall, kind: AtomKind| -> Result<f64> {
        let c = validate_padded(g, ball, kind, tol)?;
        if !c.support_ok || !c.geometry_ok {
            return Err(Error::NoStrategy(format!("support or geometry outside the {} ball", kind.name())));
        }
        if !c.moment_ok() {
            return Err(Error::NoStrategy("f does not have vanishing moment".into()));
        }
        Ok(c.size_slack)
    };
    match strategy {
        NormStrategy::Atom { ball, kind } => single(f, ball, *kind),
        NormStrategy::OddExtension { ball } => {
            let g = if f.grid().is_over_x() { f.odd_extend()? } else { f.clone() };
            single(&g, ball, AtomKind::Classical2)
        }
        NormStrategy::ZeroExtension { ball } => {
            let g = if f.grid().is_over_x() { f.zero_extend()? } else { f.clone() };
            single(&g, ball, AtomKind::Classical2)
        }
        NormStrategy::Molecule { ball, alpha, j_max, c_max } => {
            Ok(molecule_decompose(f, ball, *alpha, *j_max, *c_max, tol)?.coefficient_sum)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{make_atom, make_atom_on};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn ball(t0: f64, x0: f64, r: f64) -> ParabolicBall {
        ParabolicBall::new_1d(t0, x0, r).unwrap()
    }

    fn n_grid(q: &ParabolicBall) -> SpaceTimeGrid {
        let r = q.radius;
        let h = r / 8.0;
        let tau = r * r / 16.0;
        let l = ((q.center.x[0].abs() + r) / h).ceil() * h + h;
        let tm = ((q.t0().abs() + r * r) / tau).ceil() * tau + tau;
        SpaceTimeGrid::symmetric(1, l, h, tm, tau).unwrap()
    }

    fn classical_atom(q: &ParabolicBall, seed: u64) -> GridFunction {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        make_atom_on(n_grid(q), q, AtomKind::Classical2, &mut rng).unwrap()
    }

    #[test]
    fn whitney_balls_are_type_b_and_cover() {
        let q = ball(1.0, 0.0, 1.0);
        let balls = whitney_cover(&q, WhitneyParams { layer_ratio: 4.0, t_min: 1.0 / 64.0 }).unwrap();
        for b in &balls {
            let (two, four) = b.contains_scaled();
            assert!(two && !four, "{b:?}");
            assert!(b.time_interval().0 >= 0.0);
        }
        let grid = SpaceTimeGrid::over_x(1, 3.0, 1.0 / 32.0, 2.0, 1.0 / 32.0).unwrap();
        let st = whitney_stats(&q, &balls, &grid);
        assert!(st.covers && st.all_inside_x);
        assert!(st.overlap <= 16, "{st:?}");
    }

    #[test]
    fn whitney_refinement_keeps_coverage() {
        let q = ball(0.3, 0.5, 1.0);
        let grid = SpaceTimeGrid::over_x(1, 3.0, 1.0 / 16.0, 2.0, 1.0 / 32.0).unwrap();
        let p4 = WhitneyParams { layer_ratio: 4.0, t_min: 1.0 / 64.0 };
        let p2 = WhitneyParams { layer_ratio: 2.0, ..p4 };
        let a = whitney_cover(&q, p4).unwrap();
        let b = whitney_cover(&q, p2).unwrap();
        assert_ne!(a.len(), b.len());
        assert!(whitney_stats(&q, &a, &grid).covers);
        assert!(whitney_stats(&q, &b, &grid).covers);
    }

    #[test]
    fn whitney_errors() {
        let p = WhitneyParams { layer_ratio: 4.0, t_min: 0.01 };
        assert!(whitney_cover(&ball(-3.0, 0.0, 1.0), p).is_err());
        assert!(whitney_cover(&ball(5.0, 0.0, 1.0), p).is_err());
    }

    #[test]
    fn whitney_two_dimensional_overlap() {
        let q = ParabolicBall::new(SpacePoint::new(0.5, vec![0.0, 0.0]), 1.0).unwrap();
        let balls = whitney_cover(&q, WhitneyParams { layer_ratio: 4.0, t_min: 1.0 / 32.0 }).unwrap();
        let grid = SpaceTimeGrid::over_x(2, 1.5, 0.125, 1.5, 1.0 / 16.0).unwrap();
        let st = whitney_stats(&q, &balls, &grid);
        assert!(st.covers && st.overlap <= 64, "{st:?}");
    }

    #[test]
    fn restrict_identity_cases() {
        let qa = ball(20.0, 0.0, 1.0);
        let a = classical_atom(&qa, 1);
        let d = restrict_decompose(&a, &qa, 0.05).unwrap();
        assert_eq!(d.terms.len(), 1);
        assert_eq!(d.terms[0].kind, AtomKind::TypeA);
        assert_eq!(d.terms[0].coefficient, 1.0);
        assert_eq!(d.residual, 0.0);
        let qb = ball(5.0, 0.0, 1.0);
        let b = classical_atom(&qb, 2);
        let d = restrict_decompose(&b, &qb, 0.05).unwrap();
        assert_eq!(d.terms[0].kind, AtomKind::TypeB);
        assert_eq!(d.residual, 0.0);
    }

    #[test]
    fn restrict_whitney_case_is_exact() {
        for seed in 0..10 {
            let q = ball(0.25 * seed as f64 / 10.0 + 0.1, 0.3, 1.0);
            let a = classical_atom(&q, seed);
            let d = restrict_decompose(&a, &q, 0.05).unwrap();
            assert!(d.terms.len() > 1);
            assert_eq!(d.residual, 0.0);
            assert!(d.terms.iter().all(|t| t.kind == AtomKind::TypeB));
            assert!(d.ledger["whitney_overlap"] <= 16.0);
        }
    }

    #[test]
    fn restrict_rejects_non_atoms() {
        let q = ball(0.5, 0.0, 1.0);
        let a = classical_atom(&q, 3).scaled(3.0);
        assert!(matches!(restrict_decompose(&a, &q, 0.05), Err(Error::NotAnAtom(_))));
    }

    #[test]
    fn reflection_properties() {
        let q = ball(5.0, 0.5, 1.0);
        let b = make_atom(&q, AtomKind::TypeB, 4).unwrap();
        let rf = reflect_assemble(&b, &q, 0.05).unwrap();
        assert!(rf.function.integrate().abs() < 1e-14);
        assert_relative_eq!(rf.function.l2_norm(), 2f64.sqrt() * b.l2_norm(), max_relative = 1e-12);
        assert_eq!(rf.ball.t0(), 0.0);
        assert_eq!(rf.ball.radius, 5.0);
        let g = rf.function.grid();
        assert!(rf.function.support().all(|idx| {
            let (k, c) = g.split(idx);
            rf.ball.contains_coords(g.t_center(k), &[g.x_center(c)])
        }));
        assert!(rf.constant <= 2f64.sqrt() * 5f64.powf(1.5) * (1.0 + 1e-12));
    }

    fn even_input(seed: u64, count: usize) -> (GridFunction, Decomposition) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grid = SpaceTimeGrid::symmetric(1, 6.0, 0.125, 6.0, 1.0 / 16.0).unwrap();
        let mut terms = Vec::new();
        for _ in 0..count {
            let r = [0.5, 1.0][rng.gen_range(0..2)];
            let t0 = rng.gen_range(-4.0..4.0);
            let x0 = rng.gen_range(-3.0..3.0);
            let q = ball(t0, x0, r);
            let a = make_atom_on(grid.clone(), &q, AtomKind::Classical2, &mut rng).unwrap();
            let lam = rng.gen_range(0.1..2.0);
            terms.push(Term {
                coefficient: lam,
                atom: a.time_reflect().unwrap(),
                ball: ball(-t0, x0, r),
                kind: AtomKind::Classical2,
            });
            terms.push(Term {
                coefficient: lam,
                atom: a,
                ball: q,
                kind: AtomKind::Classical2,
            });
        }
        let fe = reconstruct(&terms, &grid).unwrap();
        let f = fe.restrict().unwrap();
        let d = Decomposition::new(terms, &f.even_extend().unwrap()).unwrap();
        (f, d)
    }

    #[test]
    fn hz_round_trip() {
        for seed in 0..8 {
            let (f, given) = even_input(seed, 6);
            let (d, cases) = hz_decompose(&f, &given, 1e-12).unwrap();
            assert!(d.residual <= 1e-12, "{}", d.residual);
            assert!(d.coefficient_sum <= given.coefficient_sum + 1e-12);
            assert!(d.ledger["worst_relative_moment"] <= 1e-12);
            assert!(d.terms.iter().all(|t| t.ball.time_interval().0 >= 0.0));
            assert_eq!(cases.len(), d.terms.len());
        }
    }

    #[test]
    fn hz_cases() {
        let grid = SpaceTimeGrid::symmetric(1, 3.0, 0.125, 4.0, 1.0 / 16.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let q_in = ball(2.0, 0.0, 1.0);
        let q_st = ball(0.25, 0.0, 1.0);
        let a_in = make_atom_on(grid.clone(), &q_in, AtomKind::Classical2, &mut rng).unwrap();
        let a_st = make_atom_on(grid.clone(), &q_st, AtomKind::Classical2, &mut rng).unwrap();
        let term = |a: &GridFunction, q: &ParabolicBall| Term {
            coefficient: 1.0,
            atom: a.clone(),
            ball: q.clone(),
            kind: AtomKind::Classical2,
        };
        let terms = vec![
            term(&a_in, &q_in),
            term(&a_in.time_reflect().unwrap(), &ball(-2.0, 0.0, 1.0)),
            term(&a_st, &q_st),
            term(&a_st.time_reflect().unwrap(), &ball(-0.25, 0.0, 1.0)),
        ];
        let fe = reconstruct(&terms, &grid).unwrap();
        let f = fe.restrict().unwrap();
        let given = Decomposition::new(terms, &fe).unwrap();
        let (d, cases) = hz_decompose(&f, &given, 1e-12).unwrap();
        assert_eq!(cases, vec![HzCase::Inside, HzCase::Reflected, HzCase::Straddling, HzCase::Straddling]);
        // case 1 passes the atom through halved
        let half = a_in.restrict().unwrap().scaled(0.5);
        assert_eq!(d.terms[0].atom, half);
        // case 3 ball is ((r^2, y), r)
        assert_eq!(d.terms[2].ball.t0(), 1.0);
        assert!(d.terms[2].atom.integrate().abs() < 1e-15);
    }

    #[test]
    fn hz_rejects_bad_input() {
        let (f, mut given) = even_input(1, 2);
        given.terms.pop();
        assert!(matches!(hz_decompose(&f, &given, 1e-12), Err(Error::Residual { .. })));
    }

    #[test]
    fn recentre_cases() {
        let r = 1.0;
        let q = ball(0.5, 0.0, r);
        let grid = SpaceTimeGrid::over_x(1, 2.0, 0.125, 2.0, 1.0 / 16.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let a = make_atom_on(grid, &q, AtomKind::HalfSpace, &mut rng).unwrap();
        let (_, rc) = recentre_atom(&a, &q).unwrap();
        assert_eq!(rc.ball.t0(), 1.0);
        assert_relative_eq!(rc.volume_ratio, 2.0 * r * r / (0.5 + r * r), max_relative = 1e-12);
        assert!(rc.volume_ratio <= 2.0 && rc.factor <= 2f64.sqrt());
        let inside = ball(3.0, 0.0, 1.0);
        let b = make_atom(&inside, AtomKind::HalfSpace, 1).unwrap();
        let (same, rc) = recentre_atom(&b, &inside).unwrap();
        assert_eq!(same, b);
        assert_eq!(rc.ball, inside);
        assert!(recentre_atom(&b, &ball(-0.5, 0.0, 1.0)).is_err());
    }

    #[test]
    fn molecule_of_atom_is_one_term() {
        let q = ball(17.0, 0.0, 1.0);
        let a = make_atom(&q, AtomKind::TypeA, 7).unwrap();
        let big = q.dilate(8.0);
        let a = a.padded(big.radius, big.time_interval().1).unwrap();
        let d = molecule_decompose(&a, &q, 0.5, 2, 100.0, 1e-12).unwrap();
        assert_eq!(d.terms[0].coefficient, 2f64.powf(-0.5));
        assert!(d.terms[1..].iter().all(|t| t.coefficient.abs() < 1e-15));
        assert!(d.residual < 1e-14);
    }

    #[test]
    fn slab_indicator_bounds() {
        let grid = SpaceTimeGrid::over_x(1, 2.0, 0.125, 2.0, 0.125).unwrap();
        let f = GridFunction::from_fn(grid, |t, x| if t < 1.0 && x[0].abs() < 1.0 { 1.0 } else { 0.0 });
        let q = ball(0.0, 0.0, 1.0);
        let b = finite_norm_bound(&f, &NormStrategy::OddExtension { ball: q.clone() }, 1e-9).unwrap();
        assert_relative_eq!(b, 4.0, max_relative = 1e-12);
        let z = finite_norm_bound(&f, &NormStrategy::ZeroExtension { ball: q }, 1e-9);
        assert!(matches!(z, Err(Error::NoStrategy(_))));
    }

    #[test]
    fn single_atom_bounds() {
        let q = ball(17.0, 0.0, 1.0);
        let a = make_atom(&q, AtomKind::TypeA, 1).unwrap();
        let s = NormStrategy::Atom { ball: q, kind: AtomKind::TypeA };
        let b1 = finite_norm_bound(&a, &s, 0.05).unwrap();
        assert!(b1 <= 1.05);
        let b2 = finite_norm_bound(&a.scaled(2.0), &s, 0.05).unwrap();
        assert_relative_eq!(b2, 2.0 * b1, max_relative = 1e-12);
    }

    #[test]
    fn decomposition_json() {
        let q = ball(0.5, 0.0, 1.0);
        let a = classical_atom(&q, 1);
        let d = restrict_decompose(&a, &q, 0.05).unwrap();
        let v: serde_json::Value = serde_json::from_str(&d.to_json().unwrap()).unwrap();
        assert!(v["terms"].as_array().unwrap().len() == d.terms.len());
        assert!(v["ledger"]["whitney_overlap"].as_f64().unwrap() >= 1.0);
        let dir = tempfile::tempdir().unwrap();
        let files = d.save_atoms(dir.path()).unwrap();
        let back = GridFunction::read_binary(std::fs::File::open(&files[0]).unwrap()).unwrap();
        assert_eq!(back, d.terms[0].atom);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn restrict_reconstructs_exactly(t0 in -0.9f64..3.9, x0 in -1.0f64..1.0, seed in 0u64..500) {
            let q = ball(t0, x0, 1.0);
            let a = classical_atom(&q, seed);
            let d = restrict_decompose(&a, &q, 0.05).unwrap();
            prop_assert_eq!(d.residual, 0.0);
        }
    }
}
