//! Atoms on `N` and on the half-space `X`, and quantitative molecule reports.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Norm, SpaceTimeGrid};
use crate::heatop::PointField;
use crate::space::{ParabolicBall, SpatialDomain};

pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_J: u32 = 8;
pub const DEFAULT_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AtomKind {
    /// `supp a ⊆ Q`, `∫a = 0`, `‖a‖_∞ ≤ ν(Q)^{-1}`.
    #[serde(rename = "classical_inf")]
    ClassicalInf,
    /// `supp a ⊆ Q`, `∫a = 0`, `‖a‖_2 ≤ ν(Q)^{-1/2}`.
    #[serde(rename = "classical_2")]
    Classical2,
    /// `(1,2)`-atom on `X` with `4Q ⊆ X` and vanishing moment.
    #[serde(rename = "type_a")]
    TypeA,
    /// `(1,2)`-atom on `X` with `2Q ⊆ X`, `4Q ⊄ X`; no moment condition.
    #[serde(rename = "type_b")]
    TypeB,
    /// Atom of `X` viewed as a space of homogeneous type: ball centered in
    /// `X`, support in `Q ∩ X`, `‖a‖_2 ≤ ν(Q ∩ X)^{-1/2}`, vanishing moment.
    #[serde(rename = "half_space")]
    HalfSpace,
}

impl AtomKind {
    pub const ALL: [AtomKind; 5] = [
        AtomKind::ClassicalInf,
        AtomKind::Classical2,
        AtomKind::TypeA,
        AtomKind::TypeB,
        AtomKind::HalfSpace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AtomKind::ClassicalInf => "classical_inf",
            AtomKind::Classical2 => "classical_2",
            AtomKind::TypeA => "type_a",
            AtomKind::TypeB => "type_b",
            AtomKind::HalfSpace => "half_space",
        }
    }

    pub fn requires_moment(self) -> bool {
        self != AtomKind::TypeB
    }

    /// Whether the kind lives on `X` (its support must avoid `t <= 0`).
    pub fn on_half_space(self) -> bool {
        matches!(self, AtomKind::TypeA | AtomKind::TypeB | AtomKind::HalfSpace)
    }

    /// Ball geometry required by the kind.
    pub fn check_geometry(self, q: &ParabolicBall) -> Result<()> {
        let (two, four) = q.contains_scaled();
        let fail = |reason: &str| {
            Err(Error::Geometry {
                kind: self.name().into(),
                reason: reason.into(),
            })
        };
        match self {
            AtomKind::ClassicalInf | AtomKind::Classical2 => Ok(()),
            AtomKind::TypeA if !four => fail("4Q is not contained in X"),
            AtomKind::TypeB if !two => fail("2Q is not contained in X"),
            AtomKind::TypeB if four => fail("4Q is contained in X"),
            AtomKind::HalfSpace if q.t0() <= 0.0 => fail("ball is not centered in X"),
            _ => Ok(()),
        }
    }

    /// Measure against which the size condition is normalized.
    pub fn reference_volume(self, q: &ParabolicBall) -> f64 {
        match self {
            AtomKind::HalfSpace => q.truncated_volume(),
            _ => q.volume(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomCertificate {
    pub kind: AtomKind,
    pub ball: ParabolicBall,
    pub geometry_ok: bool,
    pub support_ok: bool,
    /// `‖a‖_∞ ν(Q)` for `classical_inf`, `‖a‖_2 ν(Q)^{1/2}` otherwise.
    pub size_slack: f64,
    pub moment: f64,
    /// `ν(Q)^{1/2} ‖a‖_2`, the scale the moment is compared against.
    pub moment_scale: f64,
    pub tol: f64,
    pub pass: bool,
}

impl AtomCertificate {
    pub fn moment_ok(&self) -> bool {
        !self.kind.requires_moment() || self.moment.abs() <= self.tol * self.moment_scale
    }
}

/// Checks support, size and moment of `f` against the definition of `kind`.
pub fn validate_atom(f: &GridFunction, q: &ParabolicBall, kind: AtomKind, tol: f64) -> Result<AtomCertificate> {
    let grid = f.grid();
    if grid.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: q.dim(),
        });
    }
    if !grid.covers_ball(q) {
        return Err(Error::Coverage("the atom's ball".into()));
    }
    let geometry_ok = kind.check_geometry(q).is_ok();
    let n = grid.dim();
    let support_ok = f.support().all(|idx| {
        let (k, c) = grid.split(idx);
        let t = grid.t_center(k);
        let x = grid.spatial_center(c);
        q.contains_coords(t, &x[..n]) && (!kind.on_half_space() || t > 0.0)
    });
    let vol = kind.reference_volume(q);
    let l2 = f.l2_norm();
    let size_slack = match kind {
        AtomKind::ClassicalInf => f.linf_norm() * vol,
        _ => l2 * vol.sqrt(),
    };
    let moment = f.integrate();
    let mut cert = AtomCertificate {
        kind,
        ball: q.clone(),
        geometry_ok,
        support_ok,
        size_slack,
        moment,
        moment_scale: vol.sqrt() * l2,
        tol,
        pass: false,
    };
    cert.pass = geometry_ok && support_ok && size_slack <= 1.0 + tol && cert.moment_ok();
    Ok(cert)
}

/// A grid adapted to `Q`: step `r/4` in space and `r²/8` in time, over `X`
/// for half-space kinds and over a symmetric time interval otherwise.
pub fn atom_grid(q: &ParabolicBall, kind: AtomKind) -> Result<SpaceTimeGrid> {
    let r = q.radius;
    let h = r / 4.0;
    let tau = r * r / 8.0;
    let reach = q.center.x.iter().map(|c| c.abs()).fold(0.0, f64::max) + r;
    let half_width = (reach / h).ceil() * h + h;
    let (_, hi) = q.time_interval();
    if kind.on_half_space() || q.time_interval().0 >= 0.0 {
        let t_hi = (hi / tau).ceil() * tau;
        SpaceTimeGrid::over_x(q.dim(), half_width, h, t_hi, tau)
    } else {
        let t_max = ((q.t0().abs() + r * r) / tau).ceil() * tau;
        SpaceTimeGrid::symmetric(q.dim(), half_width, h, t_max, tau)
    }
}

/// A random atom of the given kind on a grid adapted to `Q`.
pub fn make_atom(q: &ParabolicBall, kind: AtomKind, seed: u64) -> Result<GridFunction> {
    use rand::SeedableRng;
    kind.check_geometry(q)?;
    let grid = atom_grid(q, kind)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    make_atom_on(grid, q, kind, &mut rng)
}

/// Random cell values on the cells of `grid` whose centers lie in `Q`,
/// mean-removed when the kind needs a vanishing moment and scaled to the
/// size bound.
pub fn make_atom_on<R: Rng>(grid: SpaceTimeGrid, q: &ParabolicBall, kind: AtomKind, rng: &mut R) -> Result<GridFunction> {
    kind.check_geometry(q)?;
    if grid.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: q.dim(),
        });
    }
    if !grid.covers_ball(q) {
        return Err(Error::Coverage("the atom's ball".into()));
    }
    let n = grid.dim();
    let cells: Vec<usize> = (0..grid.len())
        .filter(|&idx| {
            let (k, c) = grid.split(idx);
            let t = grid.t_center(k);
            let x = grid.spatial_center(c);
            q.contains_coords(t, &x[..n]) && (!kind.on_half_space() || t > 0.0)
        })
        .collect();
    if cells.len() < 2 {
        return Err(Error::Coverage("fewer than two grid cells inside the ball".into()));
    }
    let mut vals: Vec<f64> = cells
        .iter()
        .map(|_| {
            if kind.requires_moment() {
                rng.gen_range(-1.0..1.0)
            } else {
                rng.gen_range(-0.5..1.0)
            }
        })
        .collect();
    if kind.requires_moment() {
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        vals.iter_mut().for_each(|v| *v -= mean);
    }
    let mut f = GridFunction::zeros(grid);
    for (&idx, &v) in cells.iter().zip(&vals) {
        f.values_mut()[idx] = v;
    }
    let vol = kind.reference_volume(q);
    let scale = match kind {
        AtomKind::ClassicalInf => 1.0 / (vol * f.linf_norm()),
        _ => 1.0 / (vol.sqrt() * f.l2_norm()),
    };
    Ok(f.scaled(scale))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoleculeReport {
    pub ball: ParabolicBall,
    pub domain: SpatialDomain,
    pub alpha: f64,
    /// `M_j = ν(2^{j+1}Q ∩ X)^{1/2} ‖f‖_{L²(B_j(Q))}`, `j = 1..=J`.
    #[serde(rename = "M_j")]
    pub weighted_norms: Vec<f64>,
    /// `∫_{B_j(Q)} f`, `j = 1..=J`.
    pub annulus_integrals: Vec<f64>,
    /// Least-squares slope of `-log2 M_j` against `j` over `M_j > 0`.
    pub fitted_alpha: Option<f64>,
    /// `∫ f` over `2^{J+1}Q ∩ X`.
    pub moment: f64,
    /// `max_j 2^{jα} M_j`.
    pub constant: f64,
    /// `L¹` mass of `f` outside `2^{J+1}Q ∩ X`, when the input is a grid function.
    pub outside_l1: Option<f64>,
}

impl MoleculeReport {
    fn assemble(ball: &ParabolicBall, domain: SpatialDomain, alpha: f64, l2sq: &[f64], ints: Vec<f64>, outside_l1: Option<f64>) -> Self {
        let weighted_norms: Vec<f64> = l2sq
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let j = i as i32 + 1;
                (ball.dilate(2f64.powi(j + 1)).truncated_volume_in(domain) * s).sqrt()
            })
            .collect();
        let constant = weighted_norms
            .iter()
            .enumerate()
            .map(|(i, m)| 2f64.powf((i as f64 + 1.0) * alpha) * m)
            .fold(0.0, f64::max);
        MoleculeReport {
            ball: ball.clone(),
            domain,
            alpha,
            fitted_alpha: fit_decay(&weighted_norms),
            moment: ints.iter().sum(),
            annulus_integrals: ints,
            weighted_norms,
            constant,
            outside_l1,
        }
    }

    pub fn j_max(&self) -> u32 {
        self.weighted_norms.len() as u32
    }

    /// `M_j ≤ C 2^{-jα}` for all `j` and `|moment| ≤ moment_tol`.
    pub fn certifies(&self, c: f64, moment_tol: f64) -> bool {
        self.constant <= c && self.moment.abs() <= moment_tol
    }
}

/// Least-squares slope of `-log2 M_j` against `j` (1-based) over positive entries.
pub fn fit_decay(m: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = m
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(i, v)| (i as f64 + 1.0, -v.log2()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Molecule report computed by cell quadrature on the function's own grid.
pub fn molecule_report(f: &GridFunction, q: &ParabolicBall, alpha: f64, j_max: u32) -> Result<MoleculeReport> {
    molecule_report_in(f, q, alpha, j_max, SpatialDomain::Whole)
}

pub fn molecule_report_in(f: &GridFunction, q: &ParabolicBall, alpha: f64, j_max: u32, domain: SpatialDomain) -> Result<MoleculeReport> {
    let grid = f.grid();
    if j_max == 0 {
        return Err(Error::InvalidParameter("J must be at least 1".into()));
    }
    if grid.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: q.dim(),
        });
    }
    let outer = q.dilate(2f64.powi(j_max as i32 + 1));
    let (lo, hi) = outer.time_interval();
    let clipped_ok = lo.max(0.0) >= grid.t_lo() - 1e-12 && hi <= grid.t_hi() + 1e-12;
    let space_ok = outer
        .center
        .x
        .iter()
        .all(|&c| c - outer.radius >= -grid.half_width() - 1e-12 && c + outer.radius <= grid.half_width() + 1e-12);
    if !(clipped_ok && space_ok) {
        return Err(Error::Coverage(format!("2^{}Q ∩ X", j_max + 1)));
    }
    let n = grid.dim();
    let jn = j_max as usize;
    let mut l2sq = vec![0.0; jn];
    let mut ints = vec![0.0; jn];
    let mut outside = 0.0;
    let cm = grid.cell_measure();
    for (idx, &v) in f.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let (k, c) = grid.split(idx);
        let t = grid.t_center(k);
        let x = grid.spatial_center(c);
        match (1..=j_max).find(|&j| q.annulus_contains_in(j, t, &x[..n], domain)) {
            Some(j) => {
                l2sq[j as usize - 1] += v * v * cm;
                ints[j as usize - 1] += v * cm;
            }
            None => {
                if t > 0.0 && domain.contains(&x[..n]) {
                    outside += v.abs() * cm;
                }
            }
        }
    }
    Ok(MoleculeReport::assemble(q, domain, alpha, &l2sq, ints, Some(outside)))
}

/// Lattice resolution for [`molecule_report_sampled`]: annulus `j` is
/// sampled with spatial step `2^j r / k` and time step `2 (2^j r / k)^2`, so
/// every annulus has the same number of samples and the boundaries of
/// `2^j Q` and `2^{j+1} Q` fall on cell edges.
pub const DEFAULT_SAMPLES_PER_RADIUS: usize = 8;

/// Molecule report by midpoint quadrature of a point field on per-annulus
/// lattices whose scale grows with `j`. Cells straddling `t = 0` (or `x = 0`
/// on the half-line) are clipped.
pub fn molecule_report_sampled(field: &dyn PointField, q: &ParabolicBall, alpha: f64, j_max: u32, k: usize, domain: SpatialDomain) -> Result<MoleculeReport> {
    if j_max == 0 {
        return Err(Error::InvalidParameter("J must be at least 1".into()));
    }
    if k < 2 || k % 2 != 0 {
        return Err(Error::InvalidParameter(format!("samples per radius must be even, got {k}")));
    }
    if field.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: q.dim(),
        });
    }
    let n = q.dim();
    let r = q.radius;
    let t0 = q.t0();
    let x0 = &q.center.x;
    let mut l2sq = Vec::with_capacity(j_max as usize);
    let mut ints = Vec::with_capacity(j_max as usize);
    for j in 1..=j_max {
        let h = 2f64.powi(j as i32) * r / k as f64;
        let tau = 2.0 * h * h;
        let nxs = 4 * k;
        let nts = 4 * k * k;
        // spatial cells: (center, measure) per axis, clipped to the domain
        let axis = |d: usize| -> Vec<(f64, f64)> {
            (0..nxs)
                .filter_map(|i| {
                    let lo = x0[d] - 2.0 * k as f64 * h + i as f64 * h;
                    let hi = lo + h;
                    if d == 0 && domain == SpatialDomain::HalfLine {
                        if hi <= 0.0 {
                            return None;
                        }
                        let lo = lo.max(0.0);
                        return Some((0.5 * (lo + hi), hi - lo));
                    }
                    Some((0.5 * (lo + hi), h))
                })
                .collect()
        };
        let ax: Vec<Vec<(f64, f64)>> = (0..n).map(axis).collect();
        let spatial: Vec<([f64; 2], f64)> = if n == 1 {
            ax[0].iter().map(|&(c, m)| ([c, 0.0], m)).collect()
        } else {
            let mut v = Vec::new();
            for &(c0, m0) in &ax[0] {
                for &(c1, m1) in &ax[1] {
                    v.push(([c0, c1], m0 * m1));
                }
            }
            v
        };
        let t_start = t0 - 4f64.powi(j as i32 + 1) * r * r;
        let partial: Vec<(f64, f64)> = (0..nts)
            .into_par_iter()
            .map(|s| {
                let lo = t_start + s as f64 * tau;
                let hi = lo + tau;
                if hi <= 0.0 {
                    return (0.0, 0.0);
                }
                let lo = lo.max(0.0);
                let t = 0.5 * (lo + hi);
                let dt = hi - lo;
                let (mut a, mut b) = (0.0, 0.0);
                for (x, m) in &spatial {
                    if !q.annulus_contains_in(j, t, &x[..n], domain) {
                        continue;
                    }
                    let v = field.value(t, &x[..n]);
                    a += v * v * m * dt;
                    b += v * m * dt;
                }
                (a, b)
            })
            .collect();
        l2sq.push(partial.iter().map(|p| p.0).sum());
        ints.push(partial.iter().map(|p| p.1).sum());
    }
    Ok(MoleculeReport::assemble(q, domain, alpha, &l2sq, ints, None))
}

/// `(L², moment)` diagnostics of an atom, used by callers that log sizes.
pub fn atom_norms(f: &GridFunction) -> (f64, f64, f64) {
    (f.lp_norm(Norm::L(1.0)), f.l2_norm(), f.linf_norm())
}
