//! Chapman-Enskog closure of the moment hierarchy under viscous-slip scaling
//! (`ν = ν0/ε`, `λ = λ0/ε`).
//!
//! Expanding each moment as `α = α⁽⁰⁾ + ε α⁽¹⁾ + ε² α⁽²⁾ + O(ε³)` and solving
//! order by order gives
//!
//! ```text
//! C_N  α⁽⁰⁾ = 0
//! C_N  α⁽¹⁾ = −(u_m h / λ0) · 1
//! C̃_N  α⁽²⁾ = −(g / 4ν0λ0) C_N⁻¹1 ∂x(h⁴) − (1/λ0²)(C_N⁻¹ − Ω diag(2i+1)) 1 · u_m h²
//! ```
//!
//! with `C̃_N = diag(2i+1) C_N`. The per-moment constants `B̃`, `D̃`, `F̃` and
//! the scalars `Γ`, `Φ`, `Ω`, `Λ` that enter the reduced system are computed
//! here in exact rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::basis::{build_c_matrix, MomentTensors};
use crate::error::{Error, Result};
use crate::exact::RationalMatrix;
use crate::models::PhysicalParams;

/// Exact closure constants for one moment order.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosureConstants {
    pub order: usize,
    /// `B̃ = C_N⁻¹ 1`
    pub b_tilde: Vec<BigRational>,
    pub d_tilde: Vec<BigRational>,
    /// Row sums of `C̃_N⁻¹ C_N⁻¹`.
    pub f_tilde: Vec<BigRational>,
    pub gamma: BigRational,
    pub phi: BigRational,
    pub omega: BigRational,
    pub lambda: BigRational,
}

impl ClosureConstants {
    /// `Λ = −Φ + Ω²`
    pub fn lambda_identity_holds(&self) -> bool {
        self.lambda == -&self.phi + &self.omega * &self.omega
    }

    pub fn to_f64(&self) -> ClosureConstantsF64 {
        let v = |xs: &[BigRational]| xs.iter().map(|x| x.to_f64().unwrap()).collect();
        ClosureConstantsF64 {
            order: self.order,
            b_tilde: v(&self.b_tilde),
            d_tilde: v(&self.d_tilde),
            f_tilde: v(&self.f_tilde),
            gamma: self.gamma.to_f64().unwrap(),
            phi: self.phi.to_f64().unwrap(),
            omega: self.omega.to_f64().unwrap(),
            lambda: self.lambda.to_f64().unwrap(),
        }
    }
}

/// Float copy of [`ClosureConstants`] used by the simulation path.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosureConstantsF64 {
    pub order: usize,
    pub b_tilde: Vec<f64>,
    pub d_tilde: Vec<f64>,
    pub f_tilde: Vec<f64>,
    pub gamma: f64,
    pub phi: f64,
    pub omega: f64,
    pub lambda: f64,
}

fn odd_weights(n: usize) -> Vec<BigRational> {
    (1..=n)
        .map(|i| BigRational::from_integer(BigInt::from(2 * i + 1)))
        .collect()
}

pub fn compute_constants(tensors: &MomentTensors) -> Result<ClosureConstants> {
    constants_from_c(tensors.order(), tensors.c_matrix())
}

/// Same as [`compute_constants`] but only builds `C_N`.
pub fn constants_for_order(order: usize) -> Result<ClosureConstants> {
    constants_from_c(order, build_c_matrix(order)?)
}

fn constants_from_c(n: usize, c: Vec<BigRational>) -> Result<ClosureConstants> {
    if n == 0 {
        return Err(Error::OrderTooSmall { order: n, min: 1 });
    }
    let c = RationalMatrix::from_row_major(n, c);
    let c_inv = c.inverse().map_err(|_| Error::Singular("friction matrix C_N"))?;
    let weights = odd_weights(n);
    let c_tilde = c.scale_rows(&weights);
    let c_tilde_inv = c_tilde
        .inverse()
        .map_err(|_| Error::Singular("weighted friction matrix"))?;

    let b_tilde = c_inv.row_sums();
    let f_tilde = c_tilde_inv.mul(&c_inv).row_sums();
    let omega: BigRational = b_tilde.iter().sum();
    let d_tilde: Vec<BigRational> = f_tilde
        .iter()
        .zip(&b_tilde)
        .map(|(f, b)| -f + &omega * b)
        .collect();
    let gamma = b_tilde
        .iter()
        .zip(&weights)
        .fold(BigRational::zero(), |acc, (b, w)| acc + b * b / w);
    let phi = f_tilde.iter().sum();
    let lambda = d_tilde.iter().sum();

    let constants = ClosureConstants {
        order: n,
        b_tilde,
        d_tilde,
        f_tilde,
        gamma,
        phi,
        omega,
        lambda,
    };
    debug_assert!(constants.lambda_identity_holds());
    Ok(constants)
}

/// True iff the exact solution of `C_N b = 1` is `(1/4, 1/12, 0, …, 0)`.
pub fn lemma_b1_check(order: usize) -> Result<bool> {
    if order < 2 {
        return Err(Error::OrderTooSmall { order, min: 2 });
    }
    let c = RationalMatrix::from_row_major(order, build_c_matrix(order)?);
    let ones = vec![BigRational::one(); order];
    let b = c.solve(&ones)?;
    let expected = |i: usize| match i {
        0 => BigRational::new(1.into(), 4.into()),
        1 => BigRational::new(1.into(), 12.into()),
        _ => BigRational::zero(),
    };
    Ok(b.iter().enumerate().all(|(i, v)| *v == expected(i)))
}

/// Closure relation for the moments, truncated after `O(ε²)`:
///
/// `α_j = −(ε/λ0) B̃_j u_m h + ε² ( D̃_j u_m h² / λ0² − g F̃_j ∂x(h⁴) / (4 ν0 λ0) )`
///
/// `dx_h4` is a precomputed value of `∂x(h⁴)` at the point of interest.
pub fn reconstruct_moments(
    constants: &ClosureConstantsF64,
    h: f64,
    u_m: f64,
    dx_h4: f64,
    params: &PhysicalParams,
) -> Result<Vec<f64>> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::NonPositiveHeight(h));
    }
    params.validate()?;
    let PhysicalParams {
        g,
        epsilon: eps,
        lambda0,
        nu0,
    } = *params;
    let first = -(eps / lambda0) * u_m * h;
    let second_velocity = eps * eps * u_m * h * h / (lambda0 * lambda0);
    let second_slope = -eps * eps * g * dx_h4 / (4.0 * nu0 * lambda0);
    Ok((0..constants.order)
        .map(|j| {
            first * constants.b_tilde[j]
                + second_velocity * constants.d_tilde[j]
                + second_slope * constants.f_tilde[j]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_tensors;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn rv(xs: &[(i64, i64)]) -> Vec<BigRational> {
        xs.iter().map(|&(n, d)| r(n, d)).collect()
    }

    fn unit_params() -> PhysicalParams {
        PhysicalParams {
            g: 1.0,
            epsilon: 1.0,
            lambda0: 1.0,
            nu0: 1.0,
        }
    }

    #[test]
    fn single_moment_constants() {
        let k = compute_constants(&build_tensors(1).unwrap()).unwrap();
        assert_eq!(k.b_tilde, rv(&[(1, 4)]));
        assert_eq!(k.f_tilde, rv(&[(1, 48)]));
        assert_eq!(k.d_tilde, rv(&[(1, 24)]));
        assert_eq!(k.gamma, r(1, 48));
        assert_eq!(k.phi, r(1, 48));
        assert_eq!(k.omega, r(1, 4));
        assert_eq!(k.lambda, r(1, 24));
    }

    #[test]
    fn two_moment_constants() {
        let k = compute_constants(&build_tensors(2).unwrap()).unwrap();
        assert_eq!(k.b_tilde, rv(&[(1, 4), (1, 12)]));
        assert_eq!(k.d_tilde, rv(&[(1, 16), (19, 720)]));
        assert_eq!(k.f_tilde, rv(&[(1, 48), (1, 720)]));
        assert_eq!(k.omega, r(1, 3));
        assert_eq!(k.gamma, r(1, 45));
        assert_eq!(k.phi, r(1, 45));
        assert_eq!(k.lambda, r(4, 45));
    }

    #[test]
    fn six_moment_constants_match_two() {
        let k = compute_constants(&build_tensors(6).unwrap()).unwrap();
        assert_eq!(k.gamma, r(1, 45));
        assert_eq!(k.phi, r(1, 45));
        assert_eq!(k.omega, r(1, 3));
        assert_eq!(k.lambda, r(4, 45));
        assert_eq!(
            k.b_tilde,
            rv(&[(1, 4), (1, 12), (0, 1), (0, 1), (0, 1), (0, 1)])
        );
    }

    #[test]
    fn c_only_path_agrees_with_full_tensors() {
        for n in 1..=5 {
            let full = compute_constants(&build_tensors(n).unwrap()).unwrap();
            assert_eq!(full, constants_for_order(n).unwrap());
        }
    }

    #[test]
    fn scalars_are_identical_beyond_two_moments() {
        let two = constants_for_order(2).unwrap();
        for n in 2..=12 {
            let k = constants_for_order(n).unwrap();
            assert_eq!(k.gamma, two.gamma, "N={n}");
            assert_eq!(k.phi, two.phi, "N={n}");
            assert_eq!(k.omega, two.omega, "N={n}");
            assert_eq!(k.lambda, two.lambda, "N={n}");
            for b in &k.b_tilde[2..] {
                assert!(b.is_zero());
            }
        }
    }

    #[test]
    fn friction_matrix_is_invertible() {
        for n in 1..=12 {
            let c = RationalMatrix::from_row_major(n, build_c_matrix(n).unwrap());
            assert!(!c.determinant().is_zero(), "N={n}");
        }
    }

    #[test]
    fn lambda_identity_for_all_orders() {
        for n in 1..=12 {
            assert!(constants_for_order(n).unwrap().lambda_identity_holds(), "N={n}");
        }
    }

    #[test]
    fn b_tilde_solves_friction_system() {
        for n in 1..=8 {
            let c = RationalMatrix::from_row_major(n, build_c_matrix(n).unwrap());
            let k = constants_for_order(n).unwrap();
            assert_eq!(c.mul_vec(&k.b_tilde), vec![BigRational::one(); n]);
        }
    }

    #[test]
    fn boussinesq_coefficient_consistency() {
        // β = 1 + α₁²/(3u_m²) with α₁ ≈ −ε B̃₁ u_m h/λ0 gives 1 + Γ ε²h²/λ0².
        let k = constants_for_order(1).unwrap();
        assert_eq!(&k.b_tilde[0] * &k.b_tilde[0] / r(3, 1), k.gamma);
    }

    #[test]
    fn lemma_holds_up_to_twelve() {
        for n in 2..=12 {
            assert!(lemma_b1_check(n).unwrap(), "N={n}");
        }
        assert!(matches!(lemma_b1_check(1), Err(Error::OrderTooSmall { .. })));
    }

    #[test]
    fn reconstruction_examples() {
        let p = unit_params();
        let k1 = constants_for_order(1).unwrap().to_f64();
        let a = reconstruct_moments(&k1, 1.0, 1.0, 0.0, &p).unwrap();
        assert!((a[0] - (-5.0 / 24.0)).abs() < 1e-15);

        let k2 = constants_for_order(2).unwrap().to_f64();
        let a = reconstruct_moments(&k2, 1.0, 1.0, 0.0, &p).unwrap();
        assert!((a[0] - (-3.0 / 16.0)).abs() < 1e-15);
        assert!((a[1] - (-41.0 / 720.0)).abs() < 1e-15);

        let a = reconstruct_moments(&k2, 1.0, 0.0, 0.0, &p).unwrap();
        assert!(a.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reconstruction_slope_term() {
        // only the ∂x(h⁴) term: α_j = −ε² g F̃_j dx_h4 / (4 ν0 λ0)
        let p = PhysicalParams {
            g: 2.0,
            epsilon: 0.5,
            lambda0: 1.5,
            nu0: 3.0,
        };
        let k = constants_for_order(2).unwrap().to_f64();
        let a = reconstruct_moments(&k, 1.0, 0.0, 0.8, &p).unwrap();
        let scale = -0.25 * 2.0 * 0.8 / (4.0 * 3.0 * 1.5);
        assert!((a[0] - scale / 48.0).abs() < 1e-15);
        assert!((a[1] - scale / 720.0).abs() < 1e-15);
    }

    #[test]
    fn reconstruction_rejects_bad_height() {
        let k = constants_for_order(1).unwrap().to_f64();
        assert!(matches!(
            reconstruct_moments(&k, 0.0, 1.0, 0.0, &unit_params()),
            Err(Error::NonPositiveHeight(_))
        ));
    }

    proptest! {
        #[test]
        fn reconstruction_is_linear(
            h in 0.1f64..3.0, u1 in -2.0f64..2.0, u2 in -2.0f64..2.0,
            s1 in -5.0f64..5.0, s2 in -5.0f64..5.0, eps in 0.01f64..1.0,
        ) {
            // linear in (u_m h, u_m h², dx_h4) at fixed h
            let p = PhysicalParams { g: 1.0, epsilon: eps, lambda0: 1.0, nu0: 1.0 };
            let k = constants_for_order(3).unwrap().to_f64();
            let a1 = reconstruct_moments(&k, h, u1, s1, &p).unwrap();
            let a2 = reconstruct_moments(&k, h, u2, s2, &p).unwrap();
            let sum = reconstruct_moments(&k, h, u1 + u2, s1 + s2, &p).unwrap();
            for j in 0..3 {
                prop_assert!((a1[j] + a2[j] - sum[j]).abs() < 1e-12);
            }
        }
    }
}
