//! Brute-force Duhamel quadrature of `Tf(t,x) = ∫_0^t ∫ ∂_t p_{t-s}(x-y) f(s,y) dy ds`
//! for `n = 1` inputs that are Gaussian mixtures in space and piecewise
//! constant in time. Shares no code with the grid operators.

#![allow(dead_code)]

use parabolic_hardy::quad::{adaptive, GaussLegendre};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Mixture {
    /// `(amplitude, center, width)`: `a exp(-(y - c)² / w²)`.
    pub parts: Vec<(f64, f64, f64)>,
}

impl Mixture {
    pub fn eval(&self, y: f64) -> f64 {
        self.parts.iter().map(|(a, c, w)| a * (-((y - c) / w).powi(2)).exp()).sum()
    }
}

/// `f(s, y) = pieces[i].eval(y)` for `s ∈ [i·len, (i+1)·len)`.
#[derive(Debug, Clone)]
pub struct PiecewiseInput {
    pub len: f64,
    pub pieces: Vec<Mixture>,
}

impl PiecewiseInput {
    pub fn random(seed: u64, pieces: usize, len: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pieces = (0..pieces)
            .map(|_| Mixture {
                parts: (0..3)
                    .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.4..0.8)))
                    .collect(),
            })
            .collect();
        PiecewiseInput { len, pieces }
    }

    pub fn eval(&self, s: f64, y: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        let i = (s / self.len).floor() as usize;
        self.pieces.get(i).map_or(0.0, |m| m.eval(y))
    }

    pub fn t_end(&self) -> f64 {
        self.len * self.pieces.len() as f64
    }
}

/// `∂_u p_u(z)` for the 1-d heat kernel.
pub fn dt_kernel(u: f64, z: f64) -> f64 {
    let p = (-z * z / (4.0 * u)).exp() / (4.0 * std::f64::consts::PI * u).sqrt();
    p * (z * z / (4.0 * u * u) - 0.5 / u)
}

/// `∫ ∂_u p_u(x - y) g(y) dy` by composite Gauss–Legendre on `x ± 12√u`.
fn inner(gl: &GaussLegendre, g: &Mixture, u: f64, x: f64) -> f64 {
    let half = 12.0 * u.sqrt();
    let min_w = g.parts.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    let panels = ((2.0 * half) / (0.25 * min_w)).ceil().max(8.0) as usize;
    gl.composite(x - half, x + half, panels, |y| dt_kernel(u, x - y) * g.eval(y))
}

pub const SIGMA_MIN: f64 = 1e-9;

/// The Duhamel integral at `(t, x)`, lag by lag in `log u`.
pub fn duhamel(f: &PiecewiseInput, t: f64, x: f64, tol: f64) -> f64 {
    let gl = GaussLegendre::new(16);
    let mut acc = 0.0;
    for (i, g) in f.pieces.iter().enumerate() {
        let s0 = i as f64 * f.len;
        let s1 = s0 + f.len;
        if s0 >= t {
            break;
        }
        // u = t - s ranges over (t - min(s1, t), t - s0)
        let u_hi = t - s0;
        let u_lo = (t - s1.min(t)).max(SIGMA_MIN);
        acc += adaptive(|v| { let u = v.exp(); u * inner(&gl, g, u, x) }, u_lo.ln(), u_hi.ln(), tol);
    }
    acc
}

use parabolic_hardy::{apply_t, GridFunction, KernelSpec, SpaceTimeGrid};
use rayon::prelude::*;

/// Slabs and target positions where the grid operator is compared with the oracle.
pub const SAMPLE_SLABS: [usize; 6] = [1, 3, 7, 11, 15, 19];

pub fn sample_targets() -> Vec<f64> {
    (0..16).map(|j| -3.75 + 0.5 * j as f64).collect()
}

/// Spatial step of the comparison grid.
pub const DEFAULT_H: f64 = 0.0625;

/// Relative `L²` discrepancy between `apply_t` at spatial step `h` and the
/// Duhamel oracle. The box is shifted with `h` so that every refinement
/// samples the same physical points, the cell centers of the default grid.
pub fn telescoping_discrepancy(f: &PiecewiseInput, h: f64) -> f64 {
    telescoping_discrepancy_on(f, h, 8.0 + 0.5 * (DEFAULT_H - h), 1e-11)
}

pub fn telescoping_discrepancy_on(f: &PiecewiseInput, h: f64, half_width: f64, tol: f64) -> f64 {
    let tau = 0.125;
    let grid = SpaceTimeGrid::over_x(1, half_width, h, 2.5, tau).unwrap();
    let base = SpaceTimeGrid::over_x(1, 8.0, DEFAULT_H, 2.5, tau).unwrap();
    let g = GridFunction::from_fn(grid.clone(), |t, x| f.eval(t, x[0]));
    let tf = apply_t(&g, &KernelSpec::whole(1)).unwrap();
    let pts: Vec<(usize, usize)> = SAMPLE_SLABS
        .iter()
        .flat_map(|&k| sample_targets().into_iter().map(move |x| (k, x)))
        .map(|(k, x)| (k, grid.locate_x(base.x_center(base.locate_x(x).unwrap())).unwrap()))
        .collect();
    let (num, den) = pts
        .par_iter()
        .map(|&(k, i)| {
            let exact = duhamel(f, grid.t_center(k), grid.x_center(i), tol);
            let d = tf.values()[grid.index(k, i)] - exact;
            (d * d, exact * exact)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    (num / den).sqrt()
}
