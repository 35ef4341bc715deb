//! Initial conditions, velocity-profile projection and error metrics.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::basis::build_basis;
use crate::closure::reconstruct_moments;
use crate::error::{Error, Result};
use crate::models::{ModelFamily, Model};
use crate::solver::{Field, Grid1D};

/// Number of Gauss-Legendre nodes in the vertical quadrature.
pub const QUAD_NODES: usize = 64;

/// Gauss-Legendre nodes and weights on `[-1, 1]` by the Golub–Welsch method.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let beta = kf / (4.0 * kf * kf - 1.0).sqrt();
        jacobi[(k, k - 1)] = beta;
        jacobi[(k - 1, k)] = beta;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], 2.0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // symmetrise to remove eigensolver noise
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

/// Rule for `∫₀¹ f(ζ) dζ` after substituting `ζ = s²`, i.e.
/// `∫₀¹ f(s²) 2s ds`. Returns `(ζ_k, w_k)`. The substitution makes integrands
/// of the form `√ζ · p(ζ)` polynomial in `s`, so they are integrated exactly.
fn vertical_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let (x, w) = gauss_legendre(QUAD_NODES);
        x.iter()
            .zip(&w)
            .map(|(&xi, &wi)| {
                let s = 0.5 * (xi + 1.0);
                (s * s, 0.5 * wi * 2.0 * s)
            })
            .unzip()
    })
}

/// Projects a vertical velocity profile onto the basis:
/// `u_m = ∫₀¹ u dζ`, `α_j = (2j+1) ∫₀¹ u φ_j dζ`.
pub fn project_velocity(u: impl Fn(f64) -> f64, order: usize) -> Result<(f64, Vec<f64>)> {
    let basis = build_basis(order)?;
    let (z, w) = vertical_rule();
    let samples: Vec<f64> = z.iter().map(|&zeta| u(zeta)).collect();
    let u_m = samples.iter().zip(w).map(|(s, w)| s * w).sum();
    let alphas = (1..=order)
        .map(|j| {
            let integral: f64 = z
                .iter()
                .zip(w)
                .zip(&samples)
                .map(|((&zeta, &wk), &s)| wk * s * basis.eval_unchecked(j, zeta))
                .sum();
            (2 * j + 1) as f64 * integral
        })
        .collect();
    Ok((u_m, alphas))
}

/// Evaluates `u(ζ) = u_m + Σ α_j φ_j(ζ)` at each sample.
pub fn velocity_profile(u_m: f64, alphas: &[f64], zeta: &[f64]) -> Result<Vec<f64>> {
    let basis = build_basis(alphas.len())?;
    zeta.iter()
        .map(|&z| {
            if !(0.0..=1.0).contains(&z) {
                return Err(Error::ZetaOutOfRange(z));
            }
            Ok(u_m
                + alphas
                    .iter()
                    .enumerate()
                    .map(|(j, a)| a * basis.eval_unchecked(j + 1, z))
                    .sum::<f64>())
        })
        .collect()
}

/// Named test cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// `h = 1 + exp(3 cos(π(x + 1/2)) − 4)`, `u = ζ/2`.
    SharpWave,
    /// `h = 1 − 0.1 sin²(πx/2)`, `u = ζ/2`.
    SmoothSine,
    /// `h = 1 − 0.1 sin²(πx/2)`, `u = (3/2)√ζ`.
    SqrtProfile,
    /// Constant height 1 and zero velocity.
    LakeAtRest,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::SharpWave,
        Scenario::SmoothSine,
        Scenario::SqrtProfile,
        Scenario::LakeAtRest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::SharpWave => "sharp_wave",
            Scenario::SmoothSine => "smooth_sine",
            Scenario::SqrtProfile => "sqrt_profile",
            Scenario::LakeAtRest => "lake_at_rest",
        }
    }

    pub fn height(self, x: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            Scenario::SharpWave => 1.0 + (3.0 * (PI * (x + 0.5)).cos() - 4.0).exp(),
            Scenario::SmoothSine | Scenario::SqrtProfile => {
                let s = (0.5 * PI * x).sin();
                1.0 - 0.1 * s * s
            }
            Scenario::LakeAtRest => 1.0,
        }
    }

    pub fn velocity(self, zeta: f64) -> f64 {
        match self {
            Scenario::SharpWave | Scenario::SmoothSine => 0.5 * zeta,
            Scenario::SqrtProfile => 1.5 * zeta.sqrt(),
            Scenario::LakeAtRest => 0.0,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown scenario '{s}' (expected one of {})",
                    Scenario::ALL.map(|s| s.name()).join(", ")
                ))
            })
    }
}

/// Initial cell states: heights at cell centres, velocity moments projected
/// and truncated at the model order. SWE and the reduced models keep `u_m`.
pub fn init_scenario(scenario: Scenario, model: &Model, grid: &Grid1D) -> Result<Field> {
    let n_moments = match model.family() {
        ModelFamily::Swme => model.spec().order,
        _ => 0,
    };
    let (u_m, alphas) = project_velocity(|z| scenario.velocity(z), n_moments)?;
    let dim = model.dim();
    let mut field = Field::zeros(grid.n_cells, dim);
    for i in 0..grid.n_cells {
        let h = scenario.height(grid.center(i));
        if !(h > 0.0) {
            return Err(Error::NonPositiveHeight(h));
        }
        let cell = field.cell_mut(i);
        cell[0] = h;
        cell[1] = h * u_m;
        for (j, a) in alphas.iter().enumerate() {
            cell[2 + j] = h * a;
        }
    }
    Ok(field)
}

/// Periodic central difference `(h⁴_{i+1} − h⁴_{i−1}) / (2 dx)`.
pub fn dx_h4(h: &[f64], dx: f64) -> Vec<f64> {
    let n = h.len();
    if n == 0 {
        return Vec::new();
    }
    let p = |i: usize| h[i].powi(4);
    (0..n)
        .map(|i| (p((i + 1) % n) - p((i + n - 1) % n)) / (2.0 * dx))
        .collect()
}

/// `Σ|c − r| / Σ|r|`.
pub fn relative_l1(candidate: &[f64], reference: &[f64]) -> Result<f64> {
    if candidate.len() != reference.len() {
        return Err(Error::LengthMismatch(candidate.len(), reference.len()));
    }
    let norm: f64 = reference.iter().map(|r| r.abs()).sum();
    if norm == 0.0 {
        return Err(Error::ZeroNormReference);
    }
    let diff: f64 = candidate
        .iter()
        .zip(reference)
        .map(|(c, r)| (c - r).abs())
        .sum();
    Ok(diff / norm)
}

/// Primitive fields of a solution: `h`, `u_m` and one column per moment.
/// For the reduced models the moments come from the closure relation and the
/// `dx_h4` column is filled.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimitiveFields {
    pub x: Vec<f64>,
    pub h: Vec<f64>,
    pub u_m: Vec<f64>,
    pub alphas: Vec<Vec<f64>>,
    pub dx_h4: Option<Vec<f64>>,
}

pub fn primitive_fields(model: &Model, grid: &Grid1D, field: &Field) -> Result<PrimitiveFields> {
    let n = grid.n_cells;
    let x: Vec<f64> = (0..n).map(|i| grid.center(i)).collect();
    let h: Vec<f64> = (0..n).map(|i| field.cell(i)[0]).collect();
    let u_m: Vec<f64> = (0..n).map(|i| field.cell(i)[1] / h[i]).collect();
    let order = model.spec().order;
    match model.family() {
        ModelFamily::Swe => Ok(PrimitiveFields {
            x,
            h,
            u_m,
            alphas: Vec::new(),
            dx_h4: None,
        }),
        ModelFamily::Swme => {
            let alphas = (0..order)
                .map(|j| (0..n).map(|i| field.cell(i)[2 + j] / h[i]).collect())
                .collect();
            Ok(PrimitiveFields {
                x,
                h,
                u_m,
                alphas,
                dx_h4: None,
            })
        }
        ModelFamily::Rswme | ModelFamily::Hrswme => {
            let slope = dx_h4(&h, grid.dx());
            let constants = model.constants().expect("reduced model has constants");
            let mut alphas = vec![vec![0.0; n]; order];
            for i in 0..n {
                let a = reconstruct_moments(constants, h[i], u_m[i], slope[i], &model.spec().params)?;
                for (j, v) in a.into_iter().enumerate() {
                    alphas[j][i] = v;
                }
            }
            Ok(PrimitiveFields {
                x,
                h,
                u_m,
                alphas,
                dx_h4: Some(slope),
            })
        }
    }
}
