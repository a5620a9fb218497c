//! Piecewise-constant functions on uniform space-time grids over `N` or `X`.
//!
//! A grid is the box `(t_lo, t_hi] x [-L, L]^n` cut into time slabs of width
//! `tau` and spatial cells of side `h`. Values are stored row-major with time
//! slowest, then `x_1`, then `x_2`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{ParabolicBall, SpatialDomain};

const RATIO_TOL: f64 = 1e-9;

fn whole_ratio(len: f64, step: f64, what: &str) -> Result<usize> {
    let q = len / step;
    let r = q.round();
    if r < 1.0 || (q - r).abs() > RATIO_TOL * q.max(1.0) {
        return Err(Error::InvalidGrid(format!(
            "{what}: length {len} is not a positive multiple of step {step}"
        )));
    }
    Ok(r as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    n: usize,
    half_width: f64,
    h: f64,
    t_lo: f64,
    t_hi: f64,
    tau: f64,
    nx: usize,
    nt: usize,
}

impl SpaceTimeGrid {
    pub fn new(n: usize, half_width: f64, h: f64, t_lo: f64, t_hi: f64, tau: f64) -> Result<Self> {
        if n == 0 || n > 2 {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(h > 0.0) || !(tau > 0.0) || !(half_width > 0.0) {
            return Err(Error::InvalidGrid("h, tau and L must be positive".into()));
        }
        if !(t_lo < t_hi) {
            return Err(Error::InvalidGrid(format!("empty time interval ({t_lo}, {t_hi}]")));
        }
        let nx = whole_ratio(2.0 * half_width, h, "space")?;
        let nt = whole_ratio(t_hi - t_lo, tau, "time")?;
        Ok(SpaceTimeGrid {
            n,
            half_width,
            h,
            t_lo,
            t_hi,
            tau,
            nx,
            nt,
        })
    }

    /// Grid over `X`: time interval `(0, t_hi]`.
    pub fn over_x(n: usize, half_width: f64, h: f64, t_hi: f64, tau: f64) -> Result<Self> {
        Self::new(n, half_width, h, 0.0, t_hi, tau)
    }

    /// Grid over `N` symmetric about `t = 0`: `(-t_max, t_max]`.
    pub fn symmetric(n: usize, half_width: f64, h: f64, t_max: f64, tau: f64) -> Result<Self> {
        let g = Self::new(n, half_width, h, -t_max, t_max, tau)?;
        if g.nt % 2 != 0 {
            return Err(Error::AsymmetricGrid);
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn t_lo(&self) -> f64 {
        self.t_lo
    }
    pub fn t_hi(&self) -> f64 {
        self.t_hi
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn nt(&self) -> usize {
        self.nt
    }

    /// Number of spatial cells in one time row.
    pub fn row_len(&self) -> usize {
        self.nx.pow(self.n as u32)
    }

    pub fn len(&self) -> usize {
        self.nt * self.row_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_measure(&self) -> f64 {
        self.tau * self.h.powi(self.n as i32)
    }

    pub fn spatial_cell_measure(&self) -> f64 {
        self.h.powi(self.n as i32)
    }

    pub fn is_over_x(&self) -> bool {
        self.t_lo == 0.0
    }

    pub fn is_symmetric(&self) -> bool {
        self.t_lo == -self.t_hi && self.nt % 2 == 0
    }

    pub fn t_center(&self, k: usize) -> f64 {
        self.t_lo + (k as f64 + 0.5) * self.tau
    }

    /// Slab `k` is `(t_lo + k tau, t_lo + (k+1) tau]`.
    pub fn slab(&self, k: usize) -> (f64, f64) {
        let a = self.t_lo + k as f64 * self.tau;
        (a, a + self.tau)
    }

    pub fn x_center(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.h
    }

    pub fn x_edge(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h
    }

    /// Spatial center of row-cell `c` (flattened spatial index).
    pub fn spatial_center(&self, c: usize) -> [f64; 2] {
        match self.n {
            1 => [self.x_center(c), 0.0],
            _ => [self.x_center(c / self.nx), self.x_center(c % self.nx)],
        }
    }

    pub fn index(&self, k: usize, c: usize) -> usize {
        k * self.row_len() + c
    }

    /// Splits a flat index into `(k, c)`.
    pub fn split(&self, idx: usize) -> (usize, usize) {
        (idx / self.row_len(), idx % self.row_len())
    }

    /// Time slab containing `t`, if any.
    pub fn locate_t(&self, t: f64) -> Option<usize> {
        if !(t > self.t_lo && t <= self.t_hi) {
            return None;
        }
        let k = ((t - self.t_lo) / self.tau).ceil() as usize;
        Some(k.saturating_sub(1).min(self.nt - 1))
    }

    pub fn locate_x(&self, x: f64) -> Option<usize> {
        if !(x >= -self.half_width && x < self.half_width) {
            return None;
        }
        Some((((x + self.half_width) / self.h).floor() as usize).min(self.nx - 1))
    }

    /// Whether the grid box contains `Q` (clipped to `t > 0` on a grid over `X`).
    pub fn covers_ball(&self, q: &ParabolicBall) -> bool {
        if q.dim() != self.n {
            return false;
        }
        let (lo, hi) = q.time_interval();
        let lo = if self.is_over_x() { lo.max(0.0) } else { lo };
        if lo < self.t_lo - 1e-12 || hi > self.t_hi + 1e-12 {
            return false;
        }
        q.center
            .x
            .iter()
            .all(|&c| c - q.radius >= -self.half_width - 1e-12 && c + q.radius <= self.half_width + 1e-12)
    }

    /// Same spatial layout and time step, over `(-t_hi, t_hi]`.
    pub fn mirrored_over_n(&self) -> Result<SpaceTimeGrid> {
        if !self.is_over_x() {
            return Err(Error::InvalidGrid("extension needs a grid over X (t_lo = 0)".into()));
        }
        SpaceTimeGrid::symmetric(self.n, self.half_width, self.h, self.t_hi, self.tau)
    }

    /// The `t > 0` half of a symmetric grid.
    pub fn positive_half(&self) -> Result<SpaceTimeGrid> {
        if !self.is_symmetric() {
            return Err(Error::AsymmetricGrid);
        }
        SpaceTimeGrid::over_x(self.n, self.half_width, self.h, self.t_hi, self.tau)
    }

    /// Spatial cells lie in the domain (the half-line needs 0 on a cell edge).
    pub fn supports_domain(&self, domain: SpatialDomain) -> bool {
        match domain {
            SpatialDomain::Whole => true,
            SpatialDomain::HalfLine => self.n == 1 && self.nx % 2 == 0,
        }
    }
}

/// Norm exponent for [`GridFunction::lp_norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    L(f64),
    Inf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: SpaceTimeGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: SpaceTimeGrid) -> Self {
        let values = vec![0.0; grid.len()];
        GridFunction { grid, values }
    }

    pub fn from_values(grid: SpaceTimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    /// Samples `f(t, x)` at cell centers.
    pub fn from_fn<F: Fn(f64, &[f64]) -> f64>(grid: SpaceTimeGrid, f: F) -> Self {
        let n = grid.dim();
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..grid.nt() {
            let t = grid.t_center(k);
            for c in 0..grid.row_len() {
                let x = grid.spatial_center(c);
                values.push(f(t, &x[..n]));
            }
        }
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let m = self.grid.row_len();
        &self.values[k * m..(k + 1) * m]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [f64] {
        let m = self.grid.row_len();
        &mut self.values[k * m..(k + 1) * m]
    }

    /// Piecewise-constant value at `(t, x)`; zero outside the grid box.
    pub fn value_at(&self, t: f64, x: &[f64]) -> f64 {
        let Some(k) = self.grid.locate_t(t) else {
            return 0.0;
        };
        let mut c = 0;
        for &xi in x.iter().take(self.grid.dim()) {
            match self.grid.locate_x(xi) {
                Some(i) => c = c * self.grid.nx() + i,
                None => return 0.0,
            }
        }
        self.values[self.grid.index(k, c)]
    }

    fn visit<F: FnMut(f64, &[f64], f64)>(&self, mut f: F) {
        let n = self.grid.dim();
        for (idx, &v) in self.values.iter().enumerate() {
            let (k, c) = self.grid.split(idx);
            let x = self.grid.spatial_center(c);
            f(self.grid.t_center(k), &x[..n], v);
        }
    }

    /// Cell-measure-weighted sum over cells whose center satisfies `region`.
    pub fn integrate_where<R: Fn(f64, &[f64]) -> bool>(&self, region: R) -> f64 {
        let mut s = 0.0;
        self.visit(|t, x, v| {
            if region(t, x) {
                s += v;
            }
        });
        s * self.grid.cell_measure()
    }

    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_measure()
    }

    pub fn lp_norm_where<R: Fn(f64, &[f64]) -> bool>(&self, p: Norm, region: R) -> f64 {
        match p {
            Norm::Inf => {
                let mut m: f64 = 0.0;
                self.visit(|t, x, v| {
                    if region(t, x) {
                        m = m.max(v.abs());
                    }
                });
                m
            }
            Norm::L(p) => {
                let mut s = 0.0;
                self.visit(|t, x, v| {
                    if region(t, x) {
                        s += v.abs().powf(p);
                    }
                });
                (s * self.grid.cell_measure()).powf(1.0 / p)
            }
        }
    }

    pub fn lp_norm(&self, p: Norm) -> f64 {
        match p {
            Norm::Inf => self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
            Norm::L(p) if p == 2.0 => self.l2_norm(),
            Norm::L(p) if p == 1.0 => self.l1_norm(),
            Norm::L(p) => {
                (self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * self.grid.cell_measure())
                    .powf(1.0 / p)
            }
        }
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.cell_measure()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_measure()).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.lp_norm(Norm::Inf)
    }

    pub fn scaled(&self, s: f64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    fn check_same(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("grids differ".into()));
        }
        Ok(())
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &GridFunction) -> Result<()> {
        self.check_same(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
        Ok(())
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// Inner product with cell measure.
    pub fn dot(&self, other: &GridFunction) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_measure())
    }

    /// Keeps only cells whose center satisfies `region`.
    pub fn masked<R: Fn(f64, &[f64]) -> bool>(&self, region: R) -> GridFunction {
        let mut out = self.clone();
        let n = self.grid.dim();
        for (idx, v) in out.values.iter_mut().enumerate() {
            let (k, c) = self.grid.split(idx);
            let x = self.grid.spatial_center(c);
            if !region(self.grid.t_center(k), &x[..n]) {
                *v = 0.0;
            }
        }
        out
    }

    /// Indices of nonzero cells.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
    }

    /// Closed bounding box `(t_lo, t_hi, [x_lo, x_hi] per axis)` of the nonzero cells.
    pub fn support_box(&self) -> Option<(f64, f64, Vec<(f64, f64)>)> {
        let n = self.grid.dim();
        let mut tb = (f64::INFINITY, f64::NEG_INFINITY);
        let mut xb = vec![(f64::INFINITY, f64::NEG_INFINITY); n];
        let mut any = false;
        let hh = 0.5 * self.grid.h();
        for idx in self.support() {
            any = true;
            let (k, c) = self.grid.split(idx);
            let (a, b) = self.grid.slab(k);
            tb = (tb.0.min(a), tb.1.max(b));
            let x = self.grid.spatial_center(c);
            for d in 0..n {
                xb[d] = (xb[d].0.min(x[d] - hh), xb[d].1.max(x[d] + hh));
            }
        }
        any.then_some((tb.0, tb.1, xb))
    }

    fn extend(&self, sign: f64, mirror: bool) -> Result<GridFunction> {
        let big = self.grid.mirrored_over_n()?;
        let m = self.grid.nt();
        let mut out = GridFunction::zeros(big);
        for k in 0..m {
            out.row_mut(m + k).copy_from_slice(self.row(k));
            if mirror {
                let src: Vec<f64> = self.row(k).iter().map(|v| sign * v).collect();
                out.row_mut(m - 1 - k).copy_from_slice(&src);
            }
        }
        Ok(out)
    }

    /// Zero-padded copy on a larger box with the same steps and `t_lo`.
    /// The requested extents are rounded up to whole cells.
    pub fn padded(&self, half_width: f64, t_hi: f64) -> Result<GridFunction> {
        let g = &self.grid;
        let extra_x = ((half_width - g.half_width) / g.h).ceil().max(0.0) as usize;
        let extra_t = ((t_hi - g.t_hi) / g.tau).ceil().max(0.0) as usize;
        let big = SpaceTimeGrid::new(
            g.n,
            g.half_width + extra_x as f64 * g.h,
            g.h,
            g.t_lo,
            g.t_lo + (g.nt + extra_t) as f64 * g.tau,
            g.tau,
        )?;
        let mut out = GridFunction::zeros(big.clone());
        for idx in self.support() {
            let (k, c) = g.split(idx);
            let cc = if g.n == 1 {
                c + extra_x
            } else {
                let (i, j) = (c / g.nx, c % g.nx);
                (i + extra_x) * big.nx() + j + extra_x
            };
            out.values[big.index(k, cc)] = self.values[idx];
        }
        Ok(out)
    }

    /// `F(t,x) = f(|t|,x)` on the symmetric grid over `N`.
    pub fn even_extend(&self) -> Result<GridFunction> {
        self.extend(1.0, true)
    }

    /// `F(t,x) = sign(t) f(|t|,x)`.
    pub fn odd_extend(&self) -> Result<GridFunction> {
        self.extend(-1.0, true)
    }

    /// Zero for `t < 0`.
    pub fn zero_extend(&self) -> Result<GridFunction> {
        self.extend(0.0, false)
    }

    /// Restriction of a function on a symmetric grid to `X`.
    pub fn restrict(&self) -> Result<GridFunction> {
        let half = self.grid.positive_half()?;
        let m = half.nt();
        let row = half.row_len();
        let values = self.values[m * row..].to_vec();
        GridFunction::from_values(half, values)
    }

    /// `F(-t, x)` on a symmetric grid.
    pub fn time_reflect(&self) -> Result<GridFunction> {
        if !self.grid.is_symmetric() {
            return Err(Error::AsymmetricGrid);
        }
        let nt = self.grid.nt();
        let mut out = GridFunction::zeros(self.grid.clone());
        for k in 0..nt {
            out.row_mut(nt - 1 - k).copy_from_slice(self.row(k));
        }
        Ok(out)
    }

    /// Flat little-endian layout: `n` as u64, then `L, h, t_lo, t_hi, tau`
    /// as f64, then the cell values as f64 in row-major order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let g = &self.grid;
        w.write_all(&(g.n as u64).to_le_bytes())?;
        for v in [g.half_width, g.h, g.t_lo, g.t_hi, g.tau] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<GridFunction> {
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        let mut hdr = [0.0; 5];
        for v in hdr.iter_mut() {
            r.read_exact(&mut b8)?;
            *v = f64::from_le_bytes(b8);
        }
        let grid = SpaceTimeGrid::new(n, hdr[0], hdr[1], hdr[2], hdr[3], hdr[4])?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            r.read_exact(&mut b8)?;
            values.push(f64::from_le_bytes(b8));
        }
        GridFunction::from_values(grid, values)
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_binary(std::io::BufWriter::new(f))
    }

    /// CSV with columns `t, x` (or `t, x1, x2`) and `value`, one row per cell center.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let n = self.grid.dim();
        if n == 1 {
            wr.write_record(["t", "x", "value"])?;
        } else {
            wr.write_record(["t", "x1", "x2", "value"])?;
        }
        let mut rec: Vec<String> = Vec::with_capacity(n + 2);
        for (idx, v) in self.values.iter().enumerate() {
            let (k, c) = self.grid.split(idx);
            let x = self.grid.spatial_center(c);
            rec.clear();
            rec.push(self.grid.t_center(k).to_string());
            for xi in &x[..n] {
                rec.push(xi.to_string());
            }
            rec.push(v.to_string());
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid1() -> SpaceTimeGrid {
        SpaceTimeGrid::over_x(1, 2.0, 0.25, 2.0, 0.125).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SpaceTimeGrid::over_x(1, 1.0, 0.3, 1.0, 0.1).is_err());
        assert!(SpaceTimeGrid::over_x(3, 1.0, 0.5, 1.0, 0.1).is_err());
        assert!(SpaceTimeGrid::new(1, 1.0, 0.5, 1.0, 1.0, 0.1).is_err());
        assert!(SpaceTimeGrid::new(1, 1.0, -0.5, 0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn integrate_examples() {
        let g = grid1();
        let one = GridFunction::from_fn(g.clone(), |_, _| 1.0);
        assert_relative_eq!(one.integrate(), 2.0 * 4.0, max_relative = 1e-14);

        let sym = SpaceTimeGrid::symmetric(1, 2.0, 0.25, 1.0, 0.125).unwrap();
        let odd = GridFunction::from_fn(sym, |t, x| t * (1.0 + x[0] * x[0]));
        assert!(odd.integrate().abs() < 1e-14);

        let ind = GridFunction::from_fn(g, |t, x| {
            if t < 1.0 && x[0].abs() < 1.0 {
                1.0
            } else {
                0.0
            }
        });
        assert_relative_eq!(ind.integrate(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(
            ind.integrate_where(|_, x| x[0] > 0.0),
            1.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn norms_of_constants() {
        let g = grid1();
        let c = -3.0;
        let f = GridFunction::from_fn(g.clone(), |_, _| c);
        let m = 8.0;
        assert_relative_eq!(f.lp_norm(Norm::L(1.0)), 3.0 * m, max_relative = 1e-14);
        assert_relative_eq!(f.lp_norm(Norm::L(2.0)), 3.0 * m.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(f.lp_norm(Norm::Inf), 3.0);
        assert_relative_eq!(f.lp_norm(Norm::L(3.0)), 3.0 * m.cbrt(), max_relative = 1e-13);
        let r = f.lp_norm_where(Norm::L(1.0), |t, _| t < 1.0);
        assert_relative_eq!(r, 12.0, max_relative = 1e-14);
    }

    #[test]
    fn slab_indicator_odd_extension() {
        let g = SpaceTimeGrid::over_x(1, 2.0, 0.25, 2.0, 0.25).unwrap();
        let f = GridFunction::from_fn(g, |t, x| if t < 1.0 && x[0].abs() < 1.0 { 1.0 } else { 0.0 });
        let big = f.odd_extend().unwrap();
        assert_eq!(big.value_at(0.5, &[0.0]), 1.0);
        assert_eq!(big.value_at(-0.5, &[0.0]), -1.0);
        assert_eq!(big.value_at(-1.5, &[0.0]), 0.0);
        assert!(big.integrate().abs() < 1e-15);
        let even = f.even_extend().unwrap();
        assert_relative_eq!(even.integrate(), 2.0 * f.integrate());
        assert!(f.restrict().is_err());
    }

    #[test]
    fn binary_and_csv() {
        let g = SpaceTimeGrid::symmetric(2, 1.0, 0.5, 1.0, 0.5).unwrap();
        let f = GridFunction::from_fn(g, |t, x| t + 10.0 * x[0] - x[1]);
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 * 6 + 8 * f.grid().len());
        assert_eq!(&buf[..8], &2u64.to_le_bytes());
        assert_eq!(&buf[8..16], &1.0f64.to_le_bytes());
        let back = GridFunction::read_binary(&buf[..]).unwrap();
        assert_eq!(back, f);

        let mut csv = Vec::new();
        f.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x1,x2,value"));
        assert_eq!(lines.count(), f.grid().len());
    }

    proptest! {
        #[test]
        fn extension_round_trips(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = SpaceTimeGrid::over_x(1, 1.0, 0.25, 1.0, 0.25).unwrap();
            let vals: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = GridFunction::from_values(g, vals).unwrap();
            let odd = f.odd_extend().unwrap();
            let even = f.even_extend().unwrap();
            prop_assert_eq!(&odd.restrict().unwrap(), &f);
            prop_assert_eq!(&even.restrict().unwrap(), &f);
            prop_assert_eq!(&f.zero_extend().unwrap().restrict().unwrap(), &f);
            let refl = odd.time_reflect().unwrap();
            for (a, b) in refl.values().iter().zip(odd.values()) {
                prop_assert_eq!(*a, -*b);
            }
            prop_assert!(odd.integrate().abs() < 1e-14);
            let l2sq = f.l2_norm().powi(2);
            let direct = GridFunction::from_values(
                f.grid().clone(),
                f.values().iter().map(|v| v * v).collect(),
            ).unwrap().integrate();
            prop_assert!((l2sq - direct).abs() <= 1e-14 * direct.max(1e-300));
        }
    }
}
