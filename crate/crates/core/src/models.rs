//! Quasi-linear system matrices, fluxes, sources and wave-speed utilities for
//! the SWE, the full moment system and the reduced / regularised reduced
//! systems.
//!
//! All state vectors are conserved variables `U = (h, h u_m, h α_1, …, h α_N)`.
//! The reduced systems only carry `(h, h u_m)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix};

use crate::basis::{build_tensors, MomentTensorsF64};
use crate::closure::{constants_for_order, ClosureConstantsF64};
use crate::error::{Error, Result};

/// Model family selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    Swe,
    Swme,
    Rswme,
    Hrswme,
}

impl ModelFamily {
    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::Swe => "swe",
            ModelFamily::Swme => "swme",
            ModelFamily::Rswme => "rswme",
            ModelFamily::Hrswme => "hrswme",
        }
    }

    pub fn is_reduced(self) -> bool {
        matches!(self, ModelFamily::Rswme | ModelFamily::Hrswme)
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "swe" => Ok(ModelFamily::Swe),
            "swme" => Ok(ModelFamily::Swme),
            "rswme" => Ok(ModelFamily::Rswme),
            "hrswme" => Ok(ModelFamily::Hrswme),
            other => Err(Error::InvalidParameter(format!(
                "unknown model '{other}' (expected swe, swme, rswme or hrswme)"
            ))),
        }
    }
}

/// Gravity and the friction scaling `ν = ν0/ε`, `λ = λ0/ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    pub g: f64,
    pub epsilon: f64,
    pub lambda0: f64,
    pub nu0: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            g: 1.0,
            epsilon: 1.0,
            lambda0: 1.0,
            nu0: 1.0,
        }
    }
}

impl PhysicalParams {
    pub fn with_epsilon(epsilon: f64) -> Self {
        PhysicalParams {
            epsilon,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("g", self.g),
            ("epsilon", self.epsilon),
            ("lambda0", self.lambda0),
            ("nu0", self.nu0),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Slip length `λ = λ0/ε`.
    pub fn lambda(&self) -> f64 {
        self.lambda0 / self.epsilon
    }

    /// Viscosity `ν = ν0/ε`.
    pub fn nu(&self) -> f64 {
        self.nu0 / self.epsilon
    }
}

/// Which system to solve, its moment order and its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpec {
    pub family: ModelFamily,
    pub order: usize,
    pub params: PhysicalParams,
}

impl ModelSpec {
    pub fn new(family: ModelFamily, order: usize, params: PhysicalParams) -> Result<Self> {
        let spec = ModelSpec {
            family,
            order,
            params,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn swe(params: PhysicalParams) -> Self {
        ModelSpec {
            family: ModelFamily::Swe,
            order: 0,
            params,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        match (self.family, self.order) {
            (ModelFamily::Swe, 0) => Ok(()),
            (ModelFamily::Swe, n) => Err(Error::InvalidParameter(format!(
                "swe carries no moments, got n = {n}"
            ))),
            (_, 0) => Err(Error::OrderTooSmall { order: 0, min: 1 }),
            _ => Ok(()),
        }
    }

    /// Number of conserved variables per cell.
    pub fn dim(&self) -> usize {
        match self.family {
            ModelFamily::Swme => self.order + 2,
            _ => 2,
        }
    }

    /// Short label such as `SWE`, `SWME2` or `HRSWME1`.
    pub fn label(&self) -> String {
        match self.family {
            ModelFamily::Swe => "SWE".to_string(),
            f => format!("{}{}", f.name().to_ascii_uppercase(), self.order),
        }
    }
}

/// Conserved state of one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct State(pub Vec<f64>);

impl State {
    pub fn from_primitive(h: f64, u_m: f64, alphas: &[f64]) -> Self {
        let mut v = Vec::with_capacity(2 + alphas.len());
        v.push(h);
        v.push(h * u_m);
        v.extend(alphas.iter().map(|a| h * a));
        State(v)
    }

    pub fn h(&self) -> f64 {
        self.0[0]
    }

    pub fn u_m(&self) -> f64 {
        self.0[1] / self.0[0]
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.0[2..].iter().map(|p| p / self.0[0]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Number of Gauss points used to integrate the non-conservative matrix along
/// the straight path between two states.
const PATH_NODES: usize = 3;
const PATH_S: [f64; PATH_NODES] = [
    0.112_701_665_379_258_31,
    0.5,
    0.887_298_334_620_741_7,
];
const PATH_W: [f64; PATH_NODES] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// A model specification with its tensors and closure constants precomputed
/// in floating point.
#[derive(Clone, Debug)]
pub struct Model {
    spec: ModelSpec,
    tensors: Option<MomentTensorsF64>,
    constants: Option<ClosureConstantsF64>,
    /// `2 A_ilk + B_ilk`, flattened `[i][l][k]`, used by the system matrix.
    moment_block: Vec<f64>,
    /// Regularisation constant `K`.
    k_reg: f64,
}

impl Model {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.order;
        let (tensors, constants) = match spec.family {
            ModelFamily::Swe => (None, None),
            ModelFamily::Swme => (Some(build_tensors(n)?.to_f64()), None),
            ModelFamily::Rswme | ModelFamily::Hrswme => {
                (None, Some(constants_for_order(n)?.to_f64()))
            }
        };
        let mut moment_block = Vec::new();
        if let Some(t) = &tensors {
            moment_block = vec![0.0; n * n * n];
            for i in 0..n {
                for l in 0..n {
                    for k in 0..n {
                        moment_block[(i * n + l) * n + k] = 2.0 * t.a(i, l, k) + t.b(i, l, k);
                    }
                }
            }
        }
        let k_reg = if n == 1 { 192.0 } else { 180.0 };
        Ok(Model {
            spec,
            tensors,
            constants,
            moment_block,
            k_reg,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn family(&self) -> ModelFamily {
        self.spec.family
    }

    pub fn constants(&self) -> Option<&ClosureConstantsF64> {
        self.constants.as_ref()
    }

    pub fn tensors(&self) -> Option<&MomentTensorsF64> {
        self.tensors.as_ref()
    }

    /// Regularisation constant `K` (192 for one moment, 180 otherwise).
    pub fn regularisation_constant(&self) -> f64 {
        self.k_reg
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        if !(u[0] > 0.0) {
            return Err(Error::NonPositiveHeight(u[0]));
        }
        Ok(())
    }

    /// `ε² h² / λ0²`, the small parameter of the reduced systems.
    fn reduced_e(&self, h: f64) -> f64 {
        let p = &self.spec.params;
        let r = p.epsilon * h / p.lambda0;
        r * r
    }

    fn closure(&self) -> &ClosureConstantsF64 {
        self.constants
            .as_ref()
            .expect("reduced model carries closure constants")
    }

    fn is_regularised(&self) -> bool {
        self.spec.family == ModelFamily::Hrswme
    }

    /// Conservative flux `F(U)`; writes into `out`.
    pub fn flux_into(&self, u: &[f64], out: &mut [f64]) {
        let g = self.spec.params.g;
        let h = u[0];
        let q = u[1];
        let um = q / h;
        out[0] = q;
        match self.spec.family {
            ModelFamily::Swe => {
                out[1] = q * um + 0.5 * g * h * h;
            }
            ModelFamily::Swme => {
                let n = self.spec.order;
                let t = self.tensors.as_ref().unwrap();
                let alpha = |j: usize| u[2 + j] / h;
                let mut extra = 0.0;
                for j in 0..n {
                    let a = alpha(j);
                    extra += h * a * a / (2 * j + 3) as f64;
                }
                out[1] = q * um + extra + 0.5 * g * h * h;
                for i in 0..n {
                    let mut s = 2.0 * um * alpha(i);
                    for j in 0..n {
                        let aj = alpha(j);
                        if aj == 0.0 {
                            continue;
                        }
                        for k in 0..n {
                            s += t.a(i, j, k) * aj * alpha(k);
                        }
                    }
                    out[2 + i] = h * s;
                }
            }
            ModelFamily::Rswme | ModelFamily::Hrswme => {
                let c = self.closure();
                let e = self.reduced_e(h);
                let mut f = q * um * (1.0 + c.gamma * e) + 0.5 * g * h * h
                    - 0.25 * g * c.phi * e * h * h;
                if self.is_regularised() {
                    f += 4.0 * g * e * e * h * h / (6.0 * self.k_reg * self.k_reg);
                }
                out[1] = f;
            }
        }
    }

    pub fn flux(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check(u)?;
        let mut out = vec![0.0; self.dim()];
        self.flux_into(u, &mut out);
        Ok(out)
    }

    /// Non-conservative matrix `Q(U)`; nonzero only for the moment system,
    /// where `Q_{i,l} = u_m δ_il − Σ_k B_ilk α_k` acts on `∂x(h α_l)`.
    pub fn nonconservative_matrix(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        self.check(u)?;
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        if let (ModelFamily::Swme, Some(t)) = (self.spec.family, &self.tensors) {
            let n = self.spec.order;
            let h = u[0];
            let um = u[1] / h;
            for i in 0..n {
                for l in 0..n {
                    let mut v = if i == l { um } else { 0.0 };
                    for k in 0..n {
                        v -= t.b(i, l, k) * u[2 + k] / h;
                    }
                    m[(2 + i, 2 + l)] = v;
                }
            }
        }
        Ok(m)
    }

    /// Adds `(∫₀¹ Q(U_L + s ΔU) ds) · ΔU` to `out` using Gauss quadrature
    /// along the straight path.
    pub(crate) fn path_nonconservative_into(&self, ul: &[f64], ur: &[f64], out: &mut [f64]) {
        let Some(t) = &self.tensors else { return };
        let n = self.spec.order;
        for (s, w) in PATH_S.iter().zip(PATH_W) {
            let h = ul[0] + s * (ur[0] - ul[0]);
            let inv_h = 1.0 / h;
            let um = (ul[1] + s * (ur[1] - ul[1])) * inv_h;
            for i in 0..n {
                let mut acc = um * (ur[2 + i] - ul[2 + i]);
                for l in 0..n {
                    let dp = ur[2 + l] - ul[2 + l];
                    if dp == 0.0 {
                        continue;
                    }
                    let mut b = 0.0;
                    for k in 0..n {
                        b += t.b(i, l, k) * (ul[2 + k] + s * (ur[2 + k] - ul[2 + k]));
                    }
                    acc -= b * inv_h * dp;
                }
                out[2 + i] += w * acc;
            }
        }
    }

    /// Quasi-linear system matrix `A(U) = ∂F/∂U − Q(U)`.
    pub fn system_matrix(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        self.check(u)?;
        let g = self.spec.params.g;
        let d = self.dim();
        let h = u[0];
        let um = u[1] / h;
        let mut m = DMatrix::zeros(d, d);
        m[(0, 1)] = 1.0;
        match self.spec.family {
            ModelFamily::Swe => {
                m[(1, 0)] = g * h - um * um;
                m[(1, 1)] = 2.0 * um;
            }
            ModelFamily::Swme => {
                let n = self.spec.order;
                let t = self.tensors.as_ref().unwrap();
                let alpha: Vec<f64> = (0..n).map(|j| u[2 + j] / h).collect();
                let mut sq = 0.0;
                for (j, a) in alpha.iter().enumerate() {
                    sq += a * a / (2 * j + 3) as f64;
                }
                m[(1, 0)] = g * h - um * um - sq;
                m[(1, 1)] = 2.0 * um;
                for j in 0..n {
                    m[(1, 2 + j)] = 2.0 * alpha[j] / (2 * j + 3) as f64;
                }
                for i in 0..n {
                    let mut quad = 0.0;
                    for j in 0..n {
                        for k in 0..n {
                            quad += t.a(i, j, k) * alpha[j] * alpha[k];
                        }
                    }
                    m[(2 + i, 0)] = -2.0 * um * alpha[i] - quad;
                    m[(2 + i, 1)] = 2.0 * alpha[i];
                    for l in 0..n {
                        let mut v = if i == l { um } else { 0.0 };
                        for k in 0..n {
                            v += self.moment_block[(i * n + l) * n + k] * alpha[k];
                        }
                        m[(2 + i, 2 + l)] = v;
                    }
                }
            }
            ModelFamily::Rswme | ModelFamily::Hrswme => {
                let c = self.closure();
                let e = self.reduced_e(h);
                let mut a21 = -um * um * (1.0 - c.gamma * e) + g * h * (1.0 - c.phi * e);
                if self.is_regularised() {
                    a21 += 4.0 * g * h * e * e / (self.k_reg * self.k_reg);
                }
                m[(1, 0)] = a21;
                m[(1, 1)] = 2.0 * um * (1.0 + c.gamma * e);
            }
        }
        Ok(m)
    }

    /// Friction factor `(ν0/λ0)(1 − εΩh/λ0 + ε²Λh²/λ0²)` of the reduced source.
    fn reduced_drag(&self, h: f64) -> f64 {
        let c = self.closure();
        let p = &self.spec.params;
        let r = p.epsilon * h / p.lambda0;
        (p.nu0 / p.lambda0) * (1.0 - c.omega * r + c.lambda * r * r)
    }

    /// Source `S(U)`; writes into `out`.
    pub fn source_into(&self, u: &[f64], out: &mut [f64]) {
        let p = &self.spec.params;
        let h = u[0];
        let um = u[1] / h;
        out[0] = 0.0;
        match self.spec.family {
            ModelFamily::Swe => out[1] = -(p.nu0 / p.lambda0) * um,
            ModelFamily::Swme => {
                let n = self.spec.order;
                let t = self.tensors.as_ref().unwrap();
                let ratio = p.nu0 / p.lambda0;
                let nu = p.nu();
                let sum: f64 = um + u[2..].iter().map(|x| x / h).sum::<f64>();
                out[1] = -ratio * sum;
                for i in 0..n {
                    let mut ca = 0.0;
                    for j in 0..n {
                        ca += t.c(i, j) * u[2 + j] / h;
                    }
                    out[2 + i] = -((2 * i + 3) as f64) * (ratio * sum + nu / h * ca);
                }
            }
            ModelFamily::Rswme | ModelFamily::Hrswme => out[1] = -self.reduced_drag(h) * um,
        }
    }

    pub fn source(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check(u)?;
        let mut out = vec![0.0; self.dim()];
        self.source_into(u, &mut out);
        Ok(out)
    }

    /// Matrix `M(h)` with `S(U) = M(h) U`; the first row and column are zero
    /// because the height is unaffected by friction.
    pub fn source_jacobian(&self, h: f64) -> Result<DMatrix<f64>> {
        if !(h > 0.0) {
            return Err(Error::NonPositiveHeight(h));
        }
        let p = &self.spec.params;
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        match self.spec.family {
            ModelFamily::Swe => m[(1, 1)] = -(p.nu0 / p.lambda0) / h,
            ModelFamily::Swme => {
                let n = self.spec.order;
                let t = self.tensors.as_ref().unwrap();
                let r = p.nu0 / p.lambda0 / h;
                let nu = p.nu();
                for col in 1..d {
                    m[(1, col)] = -r;
                }
                for i in 0..n {
                    let w = (2 * i + 3) as f64;
                    m[(2 + i, 1)] = -w * r;
                    for j in 0..n {
                        m[(2 + i, 2 + j)] = -w * (r + nu * t.c(i, j) / (h * h));
                    }
                }
            }
            ModelFamily::Rswme | ModelFamily::Hrswme => m[(1, 1)] = -self.reduced_drag(h) / h,
        }
        Ok(m)
    }

    /// Normalised discriminant `D` of the reduced system, such that the
    /// eigenvalues are `u_m(1 + Γe) ± sqrt(g h D)` with `e = ε²h²/λ0²`.
    pub fn reduced_discriminant(&self, h: f64, u_m: f64) -> Result<f64> {
        self.require_reduced("discriminant")?;
        if !(h > 0.0) {
            return Err(Error::NonPositiveHeight(h));
        }
        let c = self.closure();
        let g = self.spec.params.g;
        let e = self.reduced_e(h);
        let mut d = 1.0 - c.phi * e + u_m * u_m * (3.0 * c.gamma * e + c.gamma * c.gamma * e * e) / (g * h);
        if self.is_regularised() {
            d += 4.0 * e * e / (self.k_reg * self.k_reg);
        }
        Ok(d)
    }

    fn require_reduced(&self, what: &str) -> Result<()> {
        if self.spec.family.is_reduced() {
            Ok(())
        } else {
            Err(Error::Unsupported(format!(
                "{what} is only available in closed form for the reduced models, not {}",
                self.spec.label()
            )))
        }
    }

    /// Closed-form eigenvalues of the reduced system matrix.
    pub fn rswme_eigenvalues(&self, u: &[f64]) -> Result<[Complex<f64>; 2]> {
        self.require_reduced("closed-form eigenvalues")?;
        self.check(u)?;
        let h = u[0];
        let um = u[1] / h;
        let c = self.closure();
        let g = self.spec.params.g;
        let centre = um * (1.0 + c.gamma * self.reduced_e(h));
        let disc = g * h * self.reduced_discriminant(h, um)?;
        Ok(if disc >= 0.0 {
            let r = disc.sqrt();
            [Complex::new(centre - r, 0.0), Complex::new(centre + r, 0.0)]
        } else {
            let r = (-disc).sqrt();
            [Complex::new(centre, -r), Complex::new(centre, r)]
        })
    }

    /// Largest height for which the reduced system stays hyperbolic at rest.
    pub fn hyperbolicity_threshold(&self) -> Result<f64> {
        self.require_reduced("a hyperbolicity threshold")?;
        if self.is_regularised() {
            return Ok(f64::INFINITY);
        }
        let p = &self.spec.params;
        Ok(p.lambda0 / (p.epsilon * self.closure().phi.sqrt()))
    }

    /// Eigenvalues of `A(U)` from a general dense eigensolver.
    pub fn numerical_eigenvalues(&self, u: &[f64]) -> Result<Vec<Complex<f64>>> {
        let a = self.system_matrix(u)?;
        Ok(a.complex_eigenvalues().iter().copied().collect())
    }

    /// Spectral radius of `A(U)`, used for the time step and the numerical
    /// viscosity. For the moment system a loss of hyperbolicity falls back to
    /// the larger of `max |Re λ|` and `|u_m| + sqrt(gh + Σα²)`.
    pub fn max_wavespeed(&self, u: &[f64]) -> Result<f64> {
        self.check(u)?;
        let g = self.spec.params.g;
        let h = u[0];
        let um = u[1] / h;
        match self.spec.family {
            ModelFamily::Swe => Ok(um.abs() + (g * h).sqrt()),
            ModelFamily::Rswme | ModelFamily::Hrswme => {
                let c = self.closure();
                let centre = um * (1.0 + c.gamma * self.reduced_e(h));
                let disc = g * h * self.reduced_discriminant(h, um)?;
                Ok(if disc >= 0.0 {
                    centre.abs() + disc.sqrt()
                } else {
                    (centre * centre - disc).sqrt()
                })
            }
            ModelFamily::Swme => {
                let eig = self.numerical_eigenvalues(u)?;
                let mut max_re = 0.0f64;
                let mut complex = false;
                for l in &eig {
                    max_re = max_re.max(l.re.abs());
                    if l.im.abs() > 1e-12 * (1.0 + l.re.abs()) {
                        complex = true;
                    }
                }
                if complex {
                    let sq: f64 = u[2..].iter().map(|p| (p / h) * (p / h)).sum();
                    Ok(max_re.max(um.abs() + (g * h + sq).sqrt()))
                } else {
                    Ok(max_re)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn model(family: ModelFamily, n: usize, params: PhysicalParams) -> Model {
        Model::new(ModelSpec::new(family, n, params).unwrap()).unwrap()
    }

    fn unit() -> PhysicalParams {
        PhysicalParams::default()
    }

    fn fd_jacobian(m: &Model, u: &[f64]) -> DMatrix<f64> {
        let d = u.len();
        let mut jac = DMatrix::zeros(d, d);
        for col in 0..d {
            let step = 1e-6 * (1.0 + u[col].abs());
            let mut up = u.to_vec();
            let mut dn = u.to_vec();
            up[col] += step;
            dn[col] -= step;
            let fp = m.flux(&up).unwrap();
            let fm = m.flux(&dn).unwrap();
            for row in 0..d {
                jac[(row, col)] = (fp[row] - fm[row]) / (2.0 * step);
            }
        }
        jac
    }

    #[test]
    fn family_parsing() {
        assert_eq!("RSWME".parse::<ModelFamily>().unwrap(), ModelFamily::Rswme);
        assert!("foo".parse::<ModelFamily>().is_err());
        assert!(ModelSpec::new(ModelFamily::Swe, 2, unit()).is_err());
        assert!(ModelSpec::new(ModelFamily::Swme, 0, unit()).is_err());
        assert!(ModelSpec::new(ModelFamily::Swe, 0, PhysicalParams::with_epsilon(0.0)).is_err());
        assert_eq!(ModelSpec::new(ModelFamily::Swme, 3, unit()).unwrap().dim(), 5);
        assert_eq!(ModelSpec::new(ModelFamily::Hrswme, 3, unit()).unwrap().dim(), 2);
    }

    #[test]
    fn swe_matrix() {
        let m = model(ModelFamily::Swe, 0, unit());
        let a = m.system_matrix(&[2.0, 1.0]).unwrap();
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0 - 0.25, 1.0]));
    }

    #[test]
    fn swme1_matrix_at_rest() {
        let m = model(ModelFamily::Swme, 1, unit());
        let a = m.system_matrix(&[1.0, 0.0, 0.0]).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(a, expected);
    }

    #[test]
    fn swme1_matrix_general_state() {
        let m = model(ModelFamily::Swme, 1, unit());
        let (h, um, a1) = (1.3, 0.4, -0.2);
        let a = m.system_matrix(State::from_primitive(h, um, &[a1]).as_slice()).unwrap();
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[
                0.0,
                1.0,
                0.0,
                h - um * um - a1 * a1 / 3.0,
                2.0 * um,
                2.0 * a1 / 3.0,
                -2.0 * um * a1,
                2.0 * a1,
                um,
            ],
        );
        for (x, y) in a.iter().zip(expected.iter()) {
            assert_relative_eq!(x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn reduced_matrix_examples() {
        let r = model(ModelFamily::Rswme, 1, unit());
        let a = r.system_matrix(&[1.0, 0.0]).unwrap();
        assert_relative_eq!(a[(1, 0)], 47.0 / 48.0, epsilon = 1e-15);
        let hr = model(ModelFamily::Hrswme, 1, unit());
        let a = hr.system_matrix(&[1.0, 0.0]).unwrap();
        assert_relative_eq!(a[(1, 0)], 47.0 / 48.0 + 4.0 / (192.0 * 192.0), epsilon = 1e-15);
        assert_eq!(hr.regularisation_constant(), 192.0);
        assert_eq!(model(ModelFamily::Hrswme, 4, unit()).regularisation_constant(), 180.0);
    }

    #[test]
    fn source_examples() {
        let s = model(ModelFamily::Swme, 1, unit());
        assert_eq!(s.source(&[1.0, 1.0, 0.0]).unwrap(), vec![0.0, -1.0, -3.0]);
        let r = model(ModelFamily::Rswme, 2, unit());
        let src = r.source(&[1.0, 1.0]).unwrap();
        assert_relative_eq!(src[1], -34.0 / 45.0, epsilon = 1e-15);
        for fam in [ModelFamily::Swme, ModelFamily::Rswme, ModelFamily::Hrswme] {
            let m = model(fam, 3, unit());
            let u = vec![1.7; 1].into_iter().chain(vec![0.0; m.dim() - 1]).collect::<Vec<_>>();
            assert!(m.source(&u).unwrap().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn source_jacobian_examples() {
        let swe = model(ModelFamily::Swe, 0, unit());
        assert_eq!(swe.source_jacobian(1.0).unwrap()[(1, 1)], -1.0);
        let s = model(ModelFamily::Swme, 1, unit());
        let m = s.source_jacobian(1.0).unwrap();
        assert_eq!(m.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, -1.0, -1.0]);
        assert_eq!(m.row(2).iter().copied().collect::<Vec<_>>(), vec![0.0, -3.0, -15.0]);
        assert!(s.source_jacobian(0.0).is_err());
    }

    #[test]
    fn source_jacobian_reproduces_source() {
        let p = PhysicalParams {
            g: 9.81,
            epsilon: 0.3,
            lambda0: 1.4,
            nu0: 0.7,
        };
        for (fam, n) in [
            (ModelFamily::Swe, 0),
            (ModelFamily::Swme, 3),
            (ModelFamily::Rswme, 1),
            (ModelFamily::Hrswme, 2),
        ] {
            let m = model(fam, n, p);
            let u: Vec<f64> = (0..m.dim()).map(|i| 0.8 + 0.3 * (i as f64).sin()).collect();
            let s = m.source(&u).unwrap();
            let mu = m.source_jacobian(u[0]).unwrap() * nalgebra::DVector::from_column_slice(&u);
            for (a, b) in s.iter().zip(mu.iter()) {
                assert_relative_eq!(a, b, epsilon = 1e-12, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn swme_matrix_matches_flux_jacobian_minus_q() {
        for n in [1, 2, 4] {
            let m = model(ModelFamily::Swme, n, unit());
            let u: Vec<f64> = (0..n + 2).map(|i| 1.1 + 0.2 * (1.7 * i as f64).cos()).collect();
            let expected = fd_jacobian(&m, &u) - m.nonconservative_matrix(&u).unwrap();
            let a = m.system_matrix(&u).unwrap();
            for (x, y) in a.iter().zip(expected.iter()) {
                assert!((x - y).abs() <= 1e-6 * (1.0 + y.abs()), "N={n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn reduced_matrix_is_flux_jacobian() {
        let p = PhysicalParams::with_epsilon(0.7);
        for fam in [ModelFamily::Rswme, ModelFamily::Hrswme] {
            let m = model(fam, 2, p);
            let u = [1.3, 0.6];
            let fd = fd_jacobian(&m, &u);
            let a = m.system_matrix(&u).unwrap();
            for (x, y) in a.iter().zip(fd.iter()) {
                assert!((x - y).abs() < 1e-7, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn swme1_eigenvalues_closed_form() {
        let m = model(ModelFamily::Swme, 1, unit());
        let (h, um, a1) = (1.0, 0.25, -0.25);
        let u = State::from_primitive(h, um, &[a1]);
        let c = (h + a1 * a1).sqrt();
        let mut eig: Vec<f64> = m.numerical_eigenvalues(u.as_slice()).unwrap().iter().map(|l| l.re).collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(eig[0], um - c, epsilon = 1e-12);
        assert_relative_eq!(eig[1], um, epsilon = 1e-12);
        assert_relative_eq!(eig[2], um + c, epsilon = 1e-12);
        assert_relative_eq!(m.max_wavespeed(u.as_slice()).unwrap(), um + c, epsilon = 1e-12);
    }

    #[test]
    fn hr_eigenvalues_at_rest() {
        let p = PhysicalParams {
            g: 2.0,
            epsilon: 0.8,
            lambda0: 1.3,
            nu0: 1.0,
        };
        let m = model(ModelFamily::Hrswme, 1, p);
        let h = 1.7;
        let l = m.rswme_eigenvalues(&[h, 0.0]).unwrap();
        let expected = (2.0 * h).sqrt() * (1.0 - 2.0 * h * h * 0.64 / (192.0 * 1.69));
        assert_relative_eq!(l[1].re, expected, epsilon = 1e-12);
        assert_relative_eq!(l[0].re, -expected, epsilon = 1e-12);
        assert_eq!(l[0].im, 0.0);
    }

    #[test]
    fn thresholds() {
        let r1 = model(ModelFamily::Rswme, 1, unit());
        assert_relative_eq!(r1.hyperbolicity_threshold().unwrap(), 4.0 * 3f64.sqrt(), epsilon = 1e-12);
        let r2 = model(ModelFamily::Rswme, 2, PhysicalParams::with_epsilon(0.5));
        assert_relative_eq!(r2.hyperbolicity_threshold().unwrap(), 6.0 * 5f64.sqrt(), epsilon = 1e-12);
        assert_eq!(
            model(ModelFamily::Hrswme, 2, unit()).hyperbolicity_threshold().unwrap(),
            f64::INFINITY
        );
        assert!(model(ModelFamily::Swe, 0, unit()).hyperbolicity_threshold().is_err());
        let hmax = r1.hyperbolicity_threshold().unwrap();
        assert!(r1.reduced_discriminant(hmax, 0.0).unwrap().abs() < 1e-12);
        assert!(r1.reduced_discriminant(hmax * 0.99, 0.0).unwrap() > 0.0);
        assert!(r1.reduced_discriminant(hmax * 1.01, 0.0).unwrap() < 0.0);
        let l = r1.rswme_eigenvalues(&[hmax * 1.2, 0.0]).unwrap();
        assert!(l[1].im > 0.0);
    }

    #[test]
    fn reduced_systems_identical_beyond_two_moments() {
        let p = PhysicalParams::with_epsilon(0.37);
        let u = [1.21, -0.43];
        let base = model(ModelFamily::Rswme, 2, p);
        for n in 3..=8 {
            let m = model(ModelFamily::Rswme, n, p);
            assert_eq!(m.system_matrix(&u).unwrap(), base.system_matrix(&u).unwrap());
            assert_eq!(m.source(&u).unwrap(), base.source(&u).unwrap());
            assert_eq!(m.flux(&u).unwrap(), base.flux(&u).unwrap());
        }
    }

    #[test]
    fn small_epsilon_reduces_to_swe() {
        let p = PhysicalParams::with_epsilon(1e-8);
        let swe = model(ModelFamily::Swe, 0, p);
        let r = model(ModelFamily::Rswme, 1, p);
        let u = [1.4, 0.3];
        let a = swe.system_matrix(&u).unwrap();
        let b = r.system_matrix(&u).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-15 * 10.0);
        }
        let sa = swe.source(&u).unwrap();
        let sb = r.source(&u).unwrap();
        assert!((sa[1] - sb[1]).abs() < 1e-7);
    }

    #[test]
    fn dimension_and_height_errors() {
        let m = model(ModelFamily::Swme, 2, unit());
        assert!(matches!(m.system_matrix(&[1.0, 0.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(m.max_wavespeed(&[-1.0, 0.0, 0.0, 0.0]), Err(Error::NonPositiveHeight(_))));
        assert!(m.rswme_eigenvalues(&[1.0, 0.0, 0.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn closed_form_matches_numerical(
            h in 0.05f64..3.0, um in -2.0f64..2.0, eps in 0.01f64..1.0, n in 1usize..4, hr: bool,
        ) {
            let fam = if hr { ModelFamily::Hrswme } else { ModelFamily::Rswme };
            let m = model(fam, n, PhysicalParams::with_epsilon(eps));
            let u = [h, h * um];
            prop_assume!(h < m.hyperbolicity_threshold().unwrap());
            let mut closed: Vec<f64> = m.rswme_eigenvalues(&u).unwrap().iter().map(|l| l.re).collect();
            let mut num: Vec<f64> = m.numerical_eigenvalues(&u).unwrap().iter().map(|l| l.re).collect();
            closed.sort_by(|a, b| a.partial_cmp(b).unwrap());
            num.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (a, b) in closed.iter().zip(&num) {
                prop_assert!((a - b).abs() < 1e-10);
            }
            let sr = closed.iter().map(|v| v.abs()).fold(0.0, f64::max);
            prop_assert!((m.max_wavespeed(&u).unwrap() - sr).abs() < 1e-10);
        }

        #[test]
        fn discriminant_positive_inside_threshold(
            frac in 0.0f64..0.999, um in -3.0f64..3.0, eps in 0.01f64..2.0, n in 1usize..5,
        ) {
            let m = model(ModelFamily::Rswme, n, PhysicalParams::with_epsilon(eps));
            let h = (frac * m.hyperbolicity_threshold().unwrap()).max(1e-6);
            prop_assert!(m.reduced_discriminant(h, um).unwrap() > 0.0);
        }

        #[test]
        fn regularised_discriminant_nonnegative(
            h in 0.01f64..100.0, um in -3.0f64..3.0, eps in 0.01f64..2.0, n in 1usize..5,
        ) {
            let m = model(ModelFamily::Hrswme, n, PhysicalParams::with_epsilon(eps));
            let d = m.reduced_discriminant(h, um).unwrap();
            prop_assert!(d >= -1e-12);
            // strictly positive away from the single double root at rest
            let k = m.regularisation_constant();
            let e = (eps * h).powi(2);
            if um != 0.0 || (2.0 * e / k - 1.0).abs() > 1e-3 {
                prop_assert!(d > 0.0);
            }
        }

        #[test]
        fn lake_at_rest_is_equilibrium(h in 0.1f64..5.0, n in 1usize..5, fam in 0usize..4) {
            let family = [ModelFamily::Swe, ModelFamily::Swme, ModelFamily::Rswme, ModelFamily::Hrswme][fam];
            let n = if family == ModelFamily::Swe { 0 } else { n };
            let m = model(family, n, unit());
            let mut u = vec![0.0; m.dim()];
            u[0] = h;
            prop_assert!(m.source(&u).unwrap().iter().all(|&v| v == 0.0));
            // a zero jump gives a zero fluctuation
            let f = m.flux(&u).unwrap();
            let mut q = vec![0.0; m.dim()];
            m.path_nonconservative_into(&u, &u, &mut q);
            prop_assert!(q.iter().all(|&v| v == 0.0));
            prop_assert_eq!(f[0], 0.0);
        }
    }
}
