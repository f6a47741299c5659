//! Expansion-coefficient matrices connecting the multiplicity-`m` orthogonal
//! family to the `m = 1` family.
//!
//! Three constructions, all exact:
//!
//! * [`xi_matrix`]: row `j` expands `r_{N,m-1}(i) p_{mj}(i)` in the `m = 1`
//!   basis, so the weighted projections of any grid function onto `p_{mj}`
//!   become linear in its plain first-order projections.
//! * [`zeta_matrix`]: the same for first differences. Row `j` carries two
//!   boundary constants plus the expansion of
//!   `r(i-1)p_{mj}(i-1) - r(i)p_{mj}(i)`, so projections of `ρ(i) =
//!   f(i+1) - f(i)` become linear in `f(N)`, `f(0)` and the projections of
//!   `f` itself.
//! * [`lambda_row`]: expands the backward shift `p_{1l}(i-1)` in the
//!   unshifted family, which is what turns the projection vector into a
//!   linear time-invariant state.
//!
//! All public constructors fix the basis scaling to
//! [`Normalization::SignAtMinusOne`]; entries for `m >= 2` are specific to
//! that convention, while every quadratic form built from them is not.

use crate::error::{Error, Result};
use crate::polys::{self, Normalization, Poly};
use crate::rational::Rational;
use num_traits::Zero;

/// Coefficients expressing weighted multiplicity-`m` polynomials in the
/// `m = 1` basis: `(num+1)` rows by `(nu1+1)` columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XiMatrix {
    pub n: usize,
    pub m: usize,
    pub nu1: usize,
    pub num: usize,
    /// `entries[j][l]` multiplies the degree-`l` first-order projection.
    pub entries: Vec<Vec<Rational>>,
}

impl XiMatrix {
    pub fn rows(&self) -> usize {
        self.num + 1
    }

    pub fn cols(&self) -> usize {
        self.nu1 + 1
    }

    pub fn entry(&self, j: usize, l: usize) -> &Rational {
        &self.entries[j][l]
    }
}

/// Difference-form coefficients: `(num+1)` rows by `(nu1+2)` columns, row
/// `j = [c1, c0, zeta_{j,0}, ..., zeta_{j,nu1-1}]`.
///
/// Applied to `[f(N), f(0), phi_0, ..., phi_{nu1-1}]` a row yields the
/// weighted projection of the first difference of `f` onto `p_{mj}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZetaMatrix {
    pub n: usize,
    pub m: usize,
    pub nu1: usize,
    pub num: usize,
    pub entries: Vec<Vec<Rational>>,
}

impl ZetaMatrix {
    pub fn rows(&self) -> usize {
        self.num + 1
    }

    pub fn cols(&self) -> usize {
        self.nu1 + 2
    }

    pub fn entry(&self, j: usize, l: usize) -> &Rational {
        &self.entries[j][l]
    }
}

/// Shift-expansion row for one first-order polynomial: `p_{1l}(i-1) =
/// sum_s lambda_{l,s} p_{1s}(i)`, plus the endpoint values that close the
/// recursion `phi_l(t+1) = c1 x(t) + c0 x(t-tau) + sum_s lambda_{l,s}
/// phi_s(t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaRow {
    /// `p_{1l}(N-1)`.
    pub c1: Rational,
    /// `-p_{1l}(-1)`.
    pub c0: Rational,
    /// `lambda_{l,0..nu1-1}`; for `l = nu1` the diagonal entry
    /// `lambda_{l,l} = 1` falls outside the stored range.
    pub lambdas: Vec<Rational>,
}

/// Writes `q` exactly as a combination of a degree-graded basis
/// (`basis[d]` has degree `d`), by eliminating leading coefficients from the
/// top down.
pub fn expand_in_basis(q: &Poly, basis: &[Poly]) -> Result<Vec<Rational>> {
    let mut coeffs = vec![Rational::zero(); basis.len()];
    let mut rem = q.clone();
    while let Some(d) = rem.degree() {
        let Some(b) = basis.get(d) else {
            return Err(Error::invalid(format!(
                "polynomial of degree {d} exceeds basis of length {}",
                basis.len()
            )));
        };
        debug_assert_eq!(b.degree(), Some(d));
        let c = rem.leading() / b.leading();
        rem = rem.sub(&b.scale(&c));
        debug_assert!(rem.degree().is_none_or(|e| e < d));
        coeffs[d] = c;
    }
    Ok(coeffs)
}

fn check_params(n: usize, m: usize, nu1: usize, num: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("multiplicity m must be >= 1"));
    }
    if num + m - 1 > nu1 {
        return Err(Error::invalid(format!(
            "nu_m + m - 1 = {} exceeds nu_1 = {nu1}",
            num + m - 1
        )));
    }
    if nu1 >= n {
        return Err(Error::DegreeOverflow {
            degree: nu1,
            horizon: n,
        });
    }
    Ok(())
}

pub(crate) fn xi_matrix_with(
    n: usize,
    m: usize,
    nu1: usize,
    num: usize,
    norm: Normalization,
) -> Result<XiMatrix> {
    check_params(n, m, nu1, num)?;
    let first = polys::basis(n, 1, nu1, norm)?;
    let multi = polys::basis(n, m, num, norm)?;
    let w = polys::weight_poly(n, m - 1);
    let entries = (0..=num)
        .map(|j| expand_in_basis(&w.mul(multi.poly(j)), &first.polys))
        .collect::<Result<Vec<_>>>()?;
    Ok(XiMatrix {
        n,
        m,
        nu1,
        num,
        entries,
    })
}

/// Builds the function-bound coefficient matrix; row `j` satisfies
/// `r_{N,m-1}(i) p_{mj}(i) = sum_l entries[j][l] p_{1l}(i)` identically.
/// Requires `num + m - 1 <= nu1 < N` so every row fits the column range.
pub fn xi_matrix(n: usize, m: usize, nu1: usize, num: usize) -> Result<XiMatrix> {
    xi_matrix_with(n, m, nu1, num, Normalization::SignAtMinusOne)
}

pub(crate) fn zeta_matrix_with(
    n: usize,
    m: usize,
    nu1: usize,
    num: usize,
    norm: Normalization,
) -> Result<ZetaMatrix> {
    check_params(n, m, nu1, num)?;
    let first = polys::basis(n, 1, nu1, norm)?;
    let multi = polys::basis(n, m, num, norm)?;
    let w = polys::weight_poly(n, m - 1);
    let mut entries = Vec::with_capacity(num + 1);
    for j in 0..=num {
        let q = w.mul(multi.poly(j));
        let c1 = q.eval_int(n as i64 - 1);
        let c0 = -q.eval_int(-1);
        let diff = q.shift_back().sub(&q);
        let zetas = expand_in_basis(&diff, &first.polys[..nu1])?;
        let mut row = Vec::with_capacity(nu1 + 2);
        row.push(c1);
        row.push(c0);
        row.extend(zetas);
        entries.push(row);
    }
    Ok(ZetaMatrix {
        n,
        m,
        nu1,
        num,
        entries,
    })
}

/// Builds the difference-bound coefficient matrix. Row `j` applied to
/// `[f(N), f(0), phi_0, ..., phi_{nu1-1}]` equals the weighted projection of
/// `ρ(i) = f(i+1) - f(i)` onto `p_{mj}`, exactly.
pub fn zeta_matrix(n: usize, m: usize, nu1: usize, num: usize) -> Result<ZetaMatrix> {
    zeta_matrix_with(n, m, nu1, num, Normalization::SignAtMinusOne)
}

/// Shift-expansion coefficients for `p_{1l}` on the horizon-`N` grid.
///
/// Accepts `l <= nu1 <= N`: degree `N` is the grid annihilator, one past
/// what a public basis exposes, and only its shift coefficients are ever
/// needed (no norm is involved), so the extra degree is admitted here.
pub fn lambda_row(n: usize, l: usize, nu1: usize) -> Result<LambdaRow> {
    if l > nu1 {
        return Err(Error::invalid(format!("row index l = {l} exceeds nu1 = {nu1}")));
    }
    if nu1 > n {
        return Err(Error::DegreeOverflow {
            degree: nu1,
            horizon: n,
        });
    }
    let polys = if nu1 >= n {
        polys::normalized_polys(n, 1, nu1, Normalization::SignAtMinusOne)?
    } else {
        polys::basis(n, 1, nu1, Normalization::SignAtMinusOne)?
            .polys
            .clone()
    };
    let p = &polys[l];
    let c1 = p.eval_int(n as i64 - 1);
    let c0 = -p.eval_int(-1);
    let mut lambdas = expand_in_basis(&p.shift_back(), &polys[..=l])?;
    lambdas.resize(nu1, Rational::zero());
    Ok(LambdaRow { c1, c0, lambdas })
}
