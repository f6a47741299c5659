//! Discrete orthogonal polynomials in exact rational arithmetic.
//!
//! The scalar product is a weighted sum over the integer support points
//! `0..=N-1` with weight `r_{N,m-1}(i) = (m-1)! C(N-2+m-i, m-1)`. For `m = 1`
//! the weight is 1 and the orthogonal family is the discrete Chebyshev
//! polynomials; higher `m` folds an `m`-fold nested summation into the weight.
//!
//! Bases are built by Gram-Schmidt over the monomials, kept monic, then
//! rescaled per [`Normalization`]. Everything is exact; a basis is fully
//! determined by `(N, m, nu, normalization)` and cached globally.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{factorial, rat, Rational};

/// Dense univariate polynomial with exact rational coefficients.
///
/// `coeffs[i]` is the coefficient of `x^i`; the trailing coefficient is
/// nonzero unless the polynomial is identically zero (empty vector).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Poly::from_coeffs(vec![c])
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    /// `x^d` with coefficient 1.
    pub fn monomial(d: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); d + 1];
        coeffs[d] = Rational::one();
        Poly { coeffs }
    }

    /// Builds from low-to-high coefficients, trimming trailing zeros.
    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `x^i` (zero beyond the stored length).
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Leading coefficient; zero for the zero polynomial.
    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    /// Exact Horner evaluation.
    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Evaluation at an integer point.
    pub fn eval_int(&self, x: i64) -> Rational {
        self.eval(&rat(x))
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) + other.coeff(i)).collect();
        Poly::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) - other.coeff(i)).collect();
        Poly::from_coeffs(coeffs)
    }

    pub fn scale(&self, s: &Rational) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::from_coeffs(coeffs)
    }

    /// The backward shift `q(x) = p(x - 1)`, exact.
    pub fn shift_back(&self) -> Poly {
        // Horner in the variable (x - 1).
        let x_minus_1 = Poly::from_coeffs(vec![rat(-1), rat(1)]);
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&x_minus_1).add(&Poly::constant(c.clone()));
        }
        acc
    }
}

/// Evaluates `p` at `x`, exactly.
pub fn eval(p: &Poly, x: &Rational) -> Rational {
    p.eval(x)
}

/// The weight `r_{N,m}(i) = m! C(N-1+m-i, m)` on the support `0..=N-1`.
pub fn weight(n: usize, m: usize, i: i64) -> Result<Rational> {
    if n == 0 {
        return Err(Error::invalid("horizon N must be positive"));
    }
    if i < 0 || i as usize >= n {
        return Err(Error::IndexOutOfRange {
            index: i,
            horizon: n,
        });
    }
    Ok(weight_unchecked(n, m, i))
}

/// `r_{N,m}` evaluated through its polynomial extension; `i = -1` and
/// `i = N-1` appear in boundary coefficients.
pub(crate) fn weight_unchecked(n: usize, m: usize, i: i64) -> Rational {
    weight_poly(n, m).eval_int(i)
}

/// `r_{N,m}` as a polynomial in `i`: the product of the `m` linear factors
/// `(N-1+m-i), (N-2+m-i), ..., (N-i)`, which equals `m! C(N-1+m-i, m)`.
pub fn weight_poly(n: usize, m: usize) -> Poly {
    let mut acc = Poly::one();
    for j in 0..m {
        let constant = (n - 1 + m - j) as i64;
        acc = acc.mul(&Poly::from_coeffs(vec![rat(constant), rat(-1)]));
    }
    acc
}

/// The scalar product `<f,g>_m = sum_i r_{N,m-1}(i) f(i) g(i)` over `0..=N-1`.
///
/// Vector-valued functions take it componentwise; the multi-summation form
/// `<<f,g>>_m` is this divided by `(m-1)!`.
pub fn inner_product<F, G>(f: F, g: G, n: usize, m: usize) -> Result<Rational>
where
    F: Fn(usize) -> Rational,
    G: Fn(usize) -> Rational,
{
    if m == 0 {
        return Err(Error::invalid("inner product requires multiplicity m >= 1"));
    }
    let w = weight_poly(n, m - 1);
    let mut acc = Rational::zero();
    for i in 0..n {
        acc += w.eval_int(i as i64) * f(i) * g(i);
    }
    Ok(acc)
}

/// `<p,q>_m` for polynomials.
pub fn inner_product_poly(p: &Poly, q: &Poly, n: usize, m: usize) -> Result<Rational> {
    inner_product(|i| p.eval_int(i as i64), |i| q.eval_int(i as i64), n, m)
}

/// How the orthogonal family is scaled after Gram-Schmidt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Normalization {
    /// Leading coefficient 1.
    Monic,
    /// `p_{mj}(-1) = (-1)^j` exactly; keeps coefficient magnitudes tame and is
    /// the convention every downstream coefficient matrix assumes.
    SignAtMinusOne,
}

/// Orthogonal polynomial basis for `(N, m)` up to degree `nu`, with exact
/// norm-squares under `<.,.>_m`.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    pub n: usize,
    pub m: usize,
    pub nu: usize,
    pub normalization: Normalization,
    pub polys: Vec<Poly>,
    pub norm_sq: Vec<Rational>,
}

impl OrthoBasis {
    pub fn poly(&self, j: usize) -> &Poly {
        &self.polys[j]
    }

    /// `chi_{m,j} = 1 / ||p_{mj}||^2_m`.
    pub fn chi(&self, j: usize) -> Rational {
        self.norm_sq[j].recip()
    }
}

/// Monic Gram-Schmidt over the monomials, up to `max_deg <= N`.
///
/// Degrees `0..N` have strictly positive norm; degree `N` (one past the grid
/// rank) is the monic polynomial vanishing on the whole support, with zero
/// norm. It is never part of a public basis but the shift-coefficient table
/// is still well defined for it.
fn monic_sequence(n: usize, m: usize, max_deg: usize) -> Result<(Vec<Poly>, Vec<Rational>)> {
    if m == 0 {
        return Err(Error::invalid("multiplicity m must be >= 1"));
    }
    if n == 0 {
        return Err(Error::invalid("horizon N must be positive"));
    }
    if max_deg > n {
        return Err(Error::DegreeOverflow {
            degree: max_deg,
            horizon: n,
        });
    }
    let mut polys: Vec<Poly> = Vec::with_capacity(max_deg + 1);
    let mut norms: Vec<Rational> = Vec::with_capacity(max_deg + 1);
    for d in 0..=max_deg {
        let mut p = Poly::monomial(d);
        for k in 0..d {
            let proj = inner_product_poly(&p, &polys[k], n, m)? / &norms[k];
            p = p.sub(&polys[k].scale(&proj));
        }
        let norm = inner_product_poly(&p, &p, n, m)?;
        if norm.is_zero() && d < n {
            // cannot happen on a rank-N grid; belt and braces
            return Err(Error::Numerical(format!(
                "zero norm at degree {d} for N={n}, m={m}"
            )));
        }
        polys.push(p);
        norms.push(norm);
    }
    Ok((polys, norms))
}

/// Rescales monic `p_j` so that `p_j(-1) = (-1)^j`.
///
/// All roots of the orthogonal polynomials lie inside `(0, N-1)`, so
/// `p_j(-1)` is nonzero; for the degree-`N` grid annihilator the roots are
/// the support points themselves and the value is again nonzero.
fn sign_scale(p: &Poly, j: usize) -> Rational {
    let v = p.eval_int(-1);
    debug_assert!(!v.is_zero());
    let target = if j % 2 == 0 { rat(1) } else { rat(-1) };
    target / v
}

/// Polynomials `p_{m0}..p_{m,max_deg}` under `norm`, allowing `max_deg = N`.
pub(crate) fn normalized_polys(
    n: usize,
    m: usize,
    max_deg: usize,
    norm: Normalization,
) -> Result<Vec<Poly>> {
    let (monic, _) = monic_sequence(n, m, max_deg)?;
    Ok(match norm {
        Normalization::Monic => monic,
        Normalization::SignAtMinusOne => monic
            .iter()
            .enumerate()
            .map(|(j, p)| p.scale(&sign_scale(p, j)))
            .collect(),
    })
}

/// Builds the orthogonal basis for `(N, m)` up to degree `nu`.
///
/// Polynomials exist as grid functions only for degree up to `N-1`;
/// `nu >= N` is a degree overflow.
pub fn build_basis(n: usize, m: usize, nu: usize, norm: Normalization) -> Result<OrthoBasis> {
    if nu >= n {
        return Err(Error::DegreeOverflow {
            degree: nu,
            horizon: n,
        });
    }
    let (monic, monic_norms) = monic_sequence(n, m, nu)?;
    let (polys, norm_sq) = match norm {
        Normalization::Monic => (monic, monic_norms),
        Normalization::SignAtMinusOne => {
            let mut polys = Vec::with_capacity(nu + 1);
            let mut norm_sq = Vec::with_capacity(nu + 1);
            for (j, p) in monic.iter().enumerate() {
                let s = sign_scale(p, j);
                polys.push(p.scale(&s));
                norm_sq.push(&monic_norms[j] * (&s * &s));
            }
            (polys, norm_sq)
        }
    };
    Ok(OrthoBasis {
        n,
        m,
        nu,
        normalization: norm,
        polys,
        norm_sq,
    })
}

type BasisKey = (usize, usize, usize, Normalization);

fn basis_cache() -> &'static RwLock<HashMap<BasisKey, Arc<OrthoBasis>>> {
    static CACHE: OnceLock<RwLock<HashMap<BasisKey, Arc<OrthoBasis>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Memoized [`build_basis`]; the delay search re-solves for many `tau` and
/// re-reads the same bases constantly.
pub fn basis(n: usize, m: usize, nu: usize, norm: Normalization) -> Result<Arc<OrthoBasis>> {
    let key = (n, m, nu, norm);
    if let Some(b) = basis_cache().read().expect("basis cache poisoned").get(&key) {
        return Ok(Arc::clone(b));
    }
    let built = Arc::new(build_basis(n, m, nu, norm)?);
    let mut cache = basis_cache().write().expect("basis cache poisoned");
    Ok(Arc::clone(cache.entry(key).or_insert(built)))
}

/// `(m-1)!` as a rational, the conversion factor between the two scalar
/// products.
pub fn multiplicity_factorial(m: usize) -> Rational {
    assert!(m >= 1, "multiplicity m must be >= 1");
    Rational::from_integer(factorial(m as u64 - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{binomial, ratio};
    use num_traits::Signed;

    // integer-valued weight via the binomial form, an independent route
    // against the polynomial product
    fn weight_binomial(n: usize, m: usize, i: i64) -> Rational {
        let top = (n as i64 - 1 + m as i64 - i).max(0) as u64;
        Rational::from_integer(factorial(m as u64) * binomial(top, m as u64))
    }

    #[test]
    fn weight_matches_binomial_formula() {
        // r_{N,0} = 1; r_{5,1}(0) = C(5,1) = 5; r_{5,1}(4) = C(1,1) = 1
        assert_eq!(weight(5, 0, 3).unwrap(), rat(1));
        assert_eq!(weight(5, 1, 0).unwrap(), rat(5));
        assert_eq!(weight(5, 1, 4).unwrap(), rat(1));
        for n in 1..=9usize {
            for m in 0..=4usize {
                for i in 0..n as i64 {
                    assert_eq!(weight(n, m, i).unwrap(), weight_binomial(n, m, i));
                    assert!(weight(n, m, i).unwrap().is_positive());
                }
            }
        }
    }

    #[test]
    fn weight_rejects_out_of_range() {
        assert!(matches!(
            weight(5, 1, 5),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            weight(5, 1, -1),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn inner_product_of_ones_counts_tuples() {
        // m=1: N; m=2: N(N+1)/2 index tuples
        let one = |_: usize| rat(1);
        assert_eq!(inner_product(one, one, 4, 1).unwrap(), rat(4));
        assert_eq!(inner_product(one, one, 4, 2).unwrap(), rat(10));
    }

    #[test]
    fn orthogonality_of_low_degrees() {
        let b = build_basis(7, 1, 3, Normalization::SignAtMinusOne).unwrap();
        for j in 0..=3 {
            for k in 0..j {
                assert!(inner_product_poly(&b.polys[j], &b.polys[k], 7, 1)
                    .unwrap()
                    .is_zero());
            }
            assert_eq!(
                inner_product_poly(&b.polys[j], &b.polys[j], 7, 1).unwrap(),
                b.norm_sq[j]
            );
        }
    }

    #[test]
    fn chebyshev_closed_forms_up_to_scale() {
        // classical p_{10}=1, p_{11}=2x+1-N, p_{12}=6x^2-6(N-1)x+(N-1)(N-2)
        // with norms N, N(N^2-1)/3, (N^2-4)(N^2-1)N/5
        for n in [5usize, 9, 13] {
            let b = build_basis(n, 1, 2, Normalization::SignAtMinusOne).unwrap();
            let nn = n as i64;
            let classical = [
                (Poly::one(), rat(nn)),
                (
                    Poly::from_coeffs(vec![rat(1 - nn), rat(2)]),
                    ratio(nn * (nn * nn - 1), 3),
                ),
                (
                    Poly::from_coeffs(vec![rat((nn - 1) * (nn - 2)), rat(-6 * (nn - 1)), rat(6)]),
                    ratio((nn * nn - 4) * (nn * nn - 1) * nn, 5),
                ),
            ];
            for (j, (p_ref, norm_ref)) in classical.iter().enumerate() {
                let s = b.polys[j].leading() / p_ref.leading();
                assert!(!s.is_zero());
                assert_eq!(b.polys[j], p_ref.scale(&s), "degree {j} shape");
                assert_eq!(b.norm_sq[j], norm_ref * (&s * &s), "degree {j} norm");
            }
        }
    }

    #[test]
    fn second_multiplicity_closed_forms() {
        // p_{20}=1 with norm N(N+1)/2; p_{21}=x+(1-N)/3 with (N-1)N(N+1)(N+2)/36
        for n in [4usize, 8, 11] {
            let b = build_basis(n, 2, 1, Normalization::Monic).unwrap();
            let nn = n as i64;
            assert_eq!(b.polys[0], Poly::one());
            assert_eq!(b.norm_sq[0], ratio(nn * (nn + 1), 2));
            assert_eq!(
                b.polys[1],
                Poly::from_coeffs(vec![ratio(1 - nn, 3), rat(1)])
            );
            assert_eq!(
                b.norm_sq[1],
                ratio((nn - 1) * nn * (nn + 1) * (nn + 2), 36)
            );
        }
    }

    #[test]
    fn sign_normalization_contract() {
        let b = build_basis(9, 1, 4, Normalization::SignAtMinusOne).unwrap();
        for j in 0..=4 {
            let expect = if j % 2 == 0 { rat(1) } else { rat(-1) };
            assert_eq!(b.polys[j].eval_int(-1), expect);
        }
        // p_{11} under the classical scaling evaluates to -6 at x=-1 when N=5
        let p = Poly::from_coeffs(vec![rat(1 - 5), rat(2)]);
        assert_eq!(p.eval_int(-1), rat(-6));
    }

    #[test]
    fn degree_overflow_is_rejected() {
        assert!(matches!(
            build_basis(5, 1, 5, Normalization::Monic),
            Err(Error::DegreeOverflow { .. })
        ));
        // the internal sequence extends exactly one degree further
        let polys = normalized_polys(5, 1, 5, Normalization::Monic).unwrap();
        let annihilator = &polys[5];
        for i in 0..5 {
            assert!(annihilator.eval_int(i).is_zero());
        }
        assert!(normalized_polys(5, 1, 6, Normalization::Monic).is_err());
    }

    #[test]
    fn norm_scales_by_square_under_rescaling() {
        let b = build_basis(12, 3, 2, Normalization::Monic).unwrap();
        let s = ratio(-7, 3);
        for j in 0..=2 {
            let scaled = b.polys[j].scale(&s);
            let norm = inner_product_poly(&scaled, &scaled, 12, 3).unwrap();
            assert_eq!(norm, &b.norm_sq[j] * (&s * &s));
        }
    }

    #[test]
    fn basis_cache_returns_shared_instance() {
        let a = basis(17, 2, 3, Normalization::SignAtMinusOne).unwrap();
        let b = basis(17, 2, 3, Normalization::SignAtMinusOne).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn horner_eval_examples() {
        let p = Poly::from_coeffs(vec![rat(1 - 5), rat(2)]); // 2x + 1 - N, N = 5
        assert_eq!(p.eval_int(-1), rat(-6));
        assert_eq!(Poly::one().eval_int(1000), rat(1));
    }
}
