//! Scaled Legendre basis on the unit depth interval and the moment tensors
//! `A_ijk`, `B_ijk`, `C_ij` that couple the moment equations.
//!
//! Everything here is computed in exact arithmetic: basis coefficients are
//! integers and the tensors are rationals obtained by integrating monomials
//! (`∫₀¹ ζᵏ dζ = 1/(k+1)`). Floats only appear through [`MomentTensors::to_f64`].

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest moment order accepted by default.
pub const DEFAULT_MAX_ORDER: usize = 12;

/// Polynomial `num(ζ) / den` with integer coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq)]
struct IntPoly {
    num: Vec<BigInt>,
    den: BigInt,
}

impl IntPoly {
    fn integral(coeffs: Vec<BigInt>) -> Self {
        IntPoly {
            num: coeffs,
            den: BigInt::one(),
        }
    }

    fn mul(&self, other: &IntPoly) -> IntPoly {
        let mut num = vec![BigInt::zero(); self.num.len() + other.num.len() - 1];
        for (a, pa) in self.num.iter().enumerate() {
            if pa.is_zero() {
                continue;
            }
            for (b, pb) in other.num.iter().enumerate() {
                num[a + b] += pa * pb;
            }
        }
        IntPoly {
            num,
            den: &self.den * &other.den,
        }
    }

    fn derivative(&self) -> IntPoly {
        let num = if self.num.len() <= 1 {
            vec![BigInt::zero()]
        } else {
            self.num
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigInt::from(k))
                .collect()
        };
        IntPoly {
            num,
            den: self.den.clone(),
        }
    }

    /// `∫₀^ζ p`, rescaled so the coefficients stay integral.
    fn antiderivative(&self) -> IntPoly {
        let scale = lcm_upto(self.num.len());
        let mut num = Vec::with_capacity(self.num.len() + 1);
        num.push(BigInt::zero());
        for (k, c) in self.num.iter().enumerate() {
            num.push(c * (&scale / BigInt::from(k + 1)));
        }
        IntPoly {
            num,
            den: &self.den * scale,
        }
    }

    /// Exact value of `∫₀¹ p dζ`.
    fn integrate_unit(&self) -> BigRational {
        let scale = lcm_upto(self.num.len());
        let total: BigInt = self
            .num
            .iter()
            .enumerate()
            .map(|(k, c)| c * (&scale / BigInt::from(k + 1)))
            .sum();
        BigRational::new(total, &self.den * scale)
    }
}

/// `lcm(1, 2, …, n)` (1 for n = 0).
fn lcm_upto(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc.lcm(&BigInt::from(k)))
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn check_order(order: usize, max: usize) -> Result<()> {
    if order > max {
        return Err(Error::OrderTooLarge { order, max });
    }
    Ok(())
}

/// The scaled Legendre polynomials `φ_1 … φ_N` on `ζ ∈ [0, 1]`, normalised by
/// `φ_j(0) = 1` and orthogonal with `∫₀¹ φ_j φ_k = δ_jk / (2k+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledLegendreBasis {
    order: usize,
    /// `coeffs[j-1][m]` is the coefficient of `ζᵐ` in `φ_j`.
    coeffs: Vec<Vec<BigInt>>,
    coeffs_f64: Vec<Vec<f64>>,
}

impl ScaledLegendreBasis {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Exact monomial coefficients of `φ_j`, ascending in degree.
    pub fn coefficients(&self, j: usize) -> Result<&[BigInt]> {
        self.check_index(j)?;
        Ok(&self.coeffs[j - 1])
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.order {
            return Err(Error::IndexOutOfRange {
                index: j,
                order: self.order,
            });
        }
        Ok(())
    }

    /// `φ_j(ζ)` by Horner evaluation.
    pub fn eval_phi(&self, j: usize, zeta: f64) -> Result<f64> {
        self.check_index(j)?;
        if !(0.0..=1.0).contains(&zeta) {
            return Err(Error::ZetaOutOfRange(zeta));
        }
        Ok(self.eval_unchecked(j, zeta))
    }

    pub(crate) fn eval_unchecked(&self, j: usize, zeta: f64) -> f64 {
        self.coeffs_f64[j - 1]
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * zeta + c)
    }

    fn poly(&self, j: usize) -> IntPoly {
        IntPoly::integral(self.coeffs[j - 1].clone())
    }

    /// Exact Gram matrix `∫₀¹ φ_j φ_k dζ`, row-major `N × N`.
    pub fn gram_matrix(&self) -> Vec<BigRational> {
        let n = self.order;
        let mut out = Vec::with_capacity(n * n);
        for j in 1..=n {
            for k in 1..=n {
                out.push(self.poly(j).mul(&self.poly(k)).integrate_unit());
            }
        }
        out
    }
}

/// Builds `φ_1 … φ_N` from the Rodrigues-type formula
/// `φ_j = (1/j!) dʲ/dζʲ (ζ − ζ²)ʲ`.
pub fn build_basis(order: usize) -> Result<ScaledLegendreBasis> {
    build_basis_with_max(order, DEFAULT_MAX_ORDER)
}

pub fn build_basis_with_max(order: usize, max_order: usize) -> Result<ScaledLegendreBasis> {
    check_order(order, max_order)?;
    let mut coeffs = Vec::with_capacity(order);
    for j in 1..=order {
        // (ζ − ζ²)ʲ = Σ_m C(j,m) (−1)ᵐ ζ^{j+m}
        let mut expanded = vec![BigInt::zero(); 2 * j + 1];
        for m in 0..=j {
            let sign = if m % 2 == 0 { 1 } else { -1 };
            expanded[j + m] = binomial(j, m) * sign;
        }
        let mut p = IntPoly::integral(expanded);
        for _ in 0..j {
            p = p.derivative();
        }
        let factorial: BigInt = (1..=j).map(BigInt::from).product();
        let phi: Vec<BigInt> = p
            .num
            .into_iter()
            .map(|c| {
                let (q, r) = c.div_rem(&factorial);
                assert!(r.is_zero(), "scaled Legendre coefficient is not integral");
                q
            })
            .collect();
        coeffs.push(phi);
    }
    let coeffs_f64 = coeffs
        .iter()
        .map(|c| c.iter().map(|v| v.to_f64().unwrap()).collect())
        .collect();
    Ok(ScaledLegendreBasis {
        order,
        coeffs,
        coeffs_f64,
    })
}

/// Closed form of the friction coupling matrix:
/// `C_ij = 2·min(i,j)·(min(i,j)+1)` when `i − j` is even, else 0.
pub fn c_closed_form(i: usize, j: usize) -> BigInt {
    if (i + j) % 2 == 1 {
        return BigInt::zero();
    }
    let m = i.min(j);
    BigInt::from(2 * m * (m + 1))
}

/// Exact moment tensors for a given order, all indices 1-based.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTensors {
    order: usize,
    a: Vec<BigRational>,
    b: Vec<BigRational>,
    c: Vec<BigRational>,
}

/// Which tensor to export.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TensorKind {
    A,
    B,
    C,
}

impl MomentTensors {
    pub fn order(&self) -> usize {
        self.order
    }

    fn idx3(&self, i: usize, j: usize, k: usize) -> usize {
        let n = self.order;
        assert!((1..=n).contains(&i) && (1..=n).contains(&j) && (1..=n).contains(&k));
        ((i - 1) * n + (j - 1)) * n + (k - 1)
    }

    /// `A_ijk = (2i+1) ∫₀¹ φ_i φ_j φ_k dζ`
    pub fn a(&self, i: usize, j: usize, k: usize) -> &BigRational {
        &self.a[self.idx3(i, j, k)]
    }

    /// `B_ijk = (2i+1) ∫₀¹ φ_i′ (∫₀^ζ φ_j) φ_k dζ`
    pub fn b(&self, i: usize, j: usize, k: usize) -> &BigRational {
        &self.b[self.idx3(i, j, k)]
    }

    /// `C_ij = ∫₀¹ φ_i′ φ_j′ dζ`
    pub fn c(&self, i: usize, j: usize) -> &BigRational {
        let n = self.order;
        assert!((1..=n).contains(&i) && (1..=n).contains(&j));
        &self.c[(i - 1) * n + (j - 1)]
    }

    /// Row-major copy of `C`.
    pub fn c_matrix(&self) -> Vec<BigRational> {
        self.c.clone()
    }

    pub fn to_f64(&self) -> MomentTensorsF64 {
        let conv = |v: &[BigRational]| v.iter().map(|x| x.to_f64().unwrap()).collect();
        MomentTensorsF64 {
            order: self.order,
            a: conv(&self.a),
            b: conv(&self.b),
            c: conv(&self.c),
        }
    }

    /// Debug export as `i,j,k,numerator,denominator` rows. `C` leaves `k` empty.
    pub fn to_csv(&self, kind: TensorKind) -> String {
        let n = self.order;
        let mut out = String::from("i,j,k,numerator,denominator\n");
        for i in 1..=n {
            for j in 1..=n {
                match kind {
                    TensorKind::C => {
                        let v = self.c(i, j);
                        let _ = writeln!(out, "{i},{j},,{},{}", v.numer(), v.denom());
                    }
                    TensorKind::A | TensorKind::B => {
                        for k in 1..=n {
                            let v = if kind == TensorKind::A {
                                self.a(i, j, k)
                            } else {
                                self.b(i, j, k)
                            };
                            let _ = writeln!(out, "{i},{j},{k},{},{}", v.numer(), v.denom());
                        }
                    }
                }
            }
        }
        out
    }
}

/// Floating-point copy of [`MomentTensors`] for the simulation path.
/// Indices are 0-based here: `a(i, j, k)` means `A_{i+1, j+1, k+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTensorsF64 {
    pub order: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl MomentTensorsF64 {
    #[inline]
    pub fn a(&self, i: usize, j: usize, k: usize) -> f64 {
        self.a[(i * self.order + j) * self.order + k]
    }

    #[inline]
    pub fn b(&self, i: usize, j: usize, k: usize) -> f64 {
        self.b[(i * self.order + j) * self.order + k]
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize) -> f64 {
        self.c[i * self.order + j]
    }
}

/// Exact `C_N` only; cheaper than [`build_tensors`] when `A` and `B` are not needed.
pub fn build_c_matrix(order: usize) -> Result<Vec<BigRational>> {
    if order == 0 {
        return Err(Error::OrderTooSmall { order, min: 1 });
    }
    let basis = build_basis(order)?;
    let derivs: Vec<IntPoly> = (1..=order).map(|j| basis.poly(j).derivative()).collect();
    let mut c = Vec::with_capacity(order * order);
    for di in &derivs {
        for dj in &derivs {
            c.push(di.mul(dj).integrate_unit());
        }
    }
    Ok(c)
}

pub fn build_tensors(order: usize) -> Result<MomentTensors> {
    build_tensors_with_max(order, DEFAULT_MAX_ORDER)
}

pub fn build_tensors_with_max(order: usize, max_order: usize) -> Result<MomentTensors> {
    if order == 0 {
        return Err(Error::OrderTooSmall { order, min: 1 });
    }
    let basis = build_basis_with_max(order, max_order)?;
    let n = order;
    let phis: Vec<IntPoly> = (1..=n).map(|j| basis.poly(j)).collect();
    let derivs: Vec<IntPoly> = phis.iter().map(IntPoly::derivative).collect();
    let antis: Vec<IntPoly> = phis.iter().map(IntPoly::antiderivative).collect();

    let mut a = Vec::with_capacity(n * n * n);
    let mut b = Vec::with_capacity(n * n * n);
    for i in 0..n {
        let weight = BigRational::from_integer(BigInt::from(2 * i + 3));
        for j in 0..n {
            let phi_ij = phis[i].mul(&phis[j]);
            let dphi_anti = derivs[i].mul(&antis[j]);
            for k in 0..n {
                a.push(&weight * phi_ij.mul(&phis[k]).integrate_unit());
                b.push(&weight * dphi_anti.mul(&phis[k]).integrate_unit());
            }
        }
    }
    let mut c = Vec::with_capacity(n * n);
    for di in &derivs {
        for dj in &derivs {
            c.push(di.mul(dj).integrate_unit());
        }
    }
    Ok(MomentTensors { order: n, a, b, c })
}
