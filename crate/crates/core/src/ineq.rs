//! Weighted summation functionals and their certified lower bounds.
//!
//! `J_m(f)` is the `m`-fold nested sum of `f(i)^T R f(i)` over descending
//! index chains; it collapses to a single weighted sum with the weight
//! `r_{N,m-1}` divided by `(m-1)!`. The bounds project `f` (or its first
//! difference) onto the orthogonal family and keep the projection energy:
//!
//! * [`lower_bound_function`]: quadratic form in the first-order projection
//!   vector, through the expansion matrix `Xi`;
//! * [`lower_bound_difference`]: quadratic form in endpoint values plus
//!   projections, through the difference matrix `Z`.
//!
//! Coefficients come from [`crate::coeffs`] exactly and are converted to
//! floats once per call. The [`oracle`] submodule recomputes everything by
//! brute force and closed-form specializations; [`property_suite`] pits the
//! two against each other over seeded random instances.

use nalgebra::{DMatrix, DVector};

use crate::coeffs;
use crate::error::{Error, Result};
use crate::polys::{self, Normalization};
use crate::rational::to_f64;

/// Vector-valued function on integer grid points `0..len`.
///
/// `horizon` is the summation length `N`; an extra point at index `N` is
/// required only when first differences are formed.
#[derive(Debug, Clone)]
pub struct GridFunction {
    values: Vec<DVector<f64>>,
    horizon: usize,
    dim: usize,
}

impl GridFunction {
    pub fn new(values: Vec<DVector<f64>>, horizon: usize) -> Result<Self> {
        if horizon == 0 || values.len() < horizon {
            return Err(Error::invalid(format!(
                "grid function needs at least N = {horizon} points, got {}",
                values.len()
            )));
        }
        let dim = values[0].len();
        if dim == 0 || values.iter().any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch(
                "grid values must share one positive dimension".into(),
            ));
        }
        if values.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::NonFinite("grid function values"));
        }
        Ok(GridFunction {
            values,
            horizon,
            dim,
        })
    }

    pub fn from_fn(
        len: usize,
        horizon: usize,
        dim: usize,
        f: impl FnMut(usize) -> DVector<f64>,
    ) -> Result<Self> {
        let g = GridFunction::new((0..len).map(f).collect(), horizon)?;
        if g.dim != dim {
            return Err(Error::DimensionMismatch(format!(
                "generator produced dimension {}, expected {dim}",
                g.dim
            )));
        }
        Ok(g)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, i: usize) -> &DVector<f64> {
        &self.values[i]
    }

    pub fn has_boundary(&self) -> bool {
        self.values.len() > self.horizon
    }

    /// Forward difference `ρ(i) = f(i+1) - f(i)` on `0..N`, which needs the
    /// boundary point `f(N)`.
    pub fn difference(&self) -> Result<GridFunction> {
        if !self.has_boundary() {
            return Err(Error::invalid(
                "difference requires a value at index N".to_string(),
            ));
        }
        let values = (0..self.horizon)
            .map(|i| &self.values[i + 1] - &self.values[i])
            .collect();
        GridFunction::new(values, self.horizon)
    }
}

/// Stacked projection coordinates of a grid function.
#[derive(Debug, Clone)]
pub struct PhiVector {
    pub blocks: Vec<DVector<f64>>,
}

fn spd_check(r: &DMatrix<f64>, dim: usize) -> Result<()> {
    if !r.is_square() || r.nrows() != dim {
        return Err(Error::DimensionMismatch(format!(
            "R must be {dim}x{dim}, got {}x{}",
            r.nrows(),
            r.ncols()
        )));
    }
    let scale = r.norm().max(1.0);
    if (r - r.transpose()).norm() > 1e-12 * scale {
        return Err(Error::NotPositiveDefinite);
    }
    if nalgebra::Cholesky::new(r.clone()).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(())
}

pub(crate) fn phi_vector_with(
    f: &GridFunction,
    nu1: usize,
    norm: Normalization,
) -> Result<PhiVector> {
    let n = f.horizon;
    let basis = polys::basis(n, 1, nu1, norm)?;
    let blocks = (0..=nu1)
        .map(|j| {
            let mut acc = DVector::zeros(f.dim);
            for i in 0..n {
                acc += f.value(i) * to_f64(&basis.poly(j).eval_int(i as i64));
            }
            acc
        })
        .collect();
    Ok(PhiVector { blocks })
}

/// Projections `phi_0..phi_{nu1}` of `f` onto the first-order family.
pub fn phi_vector(f: &GridFunction, nu1: usize) -> Result<PhiVector> {
    phi_vector_with(f, nu1, Normalization::SignAtMinusOne)
}

pub(crate) fn phi_vector_difference_with(
    f: &GridFunction,
    nu1: usize,
    norm: Normalization,
) -> Result<PhiVector> {
    if !f.has_boundary() {
        return Err(Error::invalid(
            "difference form requires a value at index N".to_string(),
        ));
    }
    let mut blocks = vec![f.value(f.horizon).clone(), f.value(0).clone()];
    if nu1 > 0 {
        blocks.extend(phi_vector_with(f, nu1 - 1, norm)?.blocks);
    }
    Ok(PhiVector { blocks })
}

/// The difference-form stack `[f(N), f(0), phi_0, ..., phi_{nu1-1}]`.
pub fn phi_vector_difference(f: &GridFunction, nu1: usize) -> Result<PhiVector> {
    phi_vector_difference_with(f, nu1, Normalization::SignAtMinusOne)
}

/// The `m`-fold nested quadratic sum, evaluated through its single-sum
/// weight form.
pub fn j_functional(f: &GridFunction, r: &DMatrix<f64>, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("multiplicity m must be >= 1"));
    }
    spd_check(r, f.dim)?;
    let w = polys::weight_poly(f.horizon, m - 1);
    let mut acc = 0.0;
    for i in 0..f.horizon {
        let v = f.value(i);
        acc += to_f64(&w.eval_int(i as i64)) * (v.transpose() * r * v)[(0, 0)];
    }
    Ok(acc / to_f64(&polys::multiplicity_factorial(m)))
}

fn quadratic(r: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    (v.transpose() * r * v)[(0, 0)]
}

pub(crate) fn lower_bound_function_with(
    f: &GridFunction,
    r: &DMatrix<f64>,
    m: usize,
    nu1: usize,
    num: usize,
    norm: Normalization,
) -> Result<f64> {
    spd_check(r, f.dim)?;
    let xi = coeffs::xi_matrix_with(f.horizon, m, nu1, num, norm)?;
    let basis = polys::basis(f.horizon, m, num, norm)?;
    let phi = phi_vector_with(f, nu1, norm)?;
    let mut acc = 0.0;
    for j in 0..=num {
        let mut w = DVector::zeros(f.dim);
        for (l, block) in phi.blocks.iter().enumerate() {
            w += block * to_f64(xi.entry(j, l));
        }
        acc += to_f64(&basis.chi(j)) * quadratic(r, &w);
    }
    Ok(acc / to_f64(&polys::multiplicity_factorial(m)))
}

/// Projection lower bound for `J_m(f)`.
///
/// Requires `num + m - 1 <= nu1 < N`; for `m = 1` this admits `num = nu1`,
/// which is how the classical single-sum estimates arise.
pub fn lower_bound_function(
    f: &GridFunction,
    r: &DMatrix<f64>,
    m: usize,
    nu1: usize,
    num: usize,
) -> Result<f64> {
    lower_bound_function_with(f, r, m, nu1, num, Normalization::SignAtMinusOne)
}

pub(crate) fn lower_bound_difference_with(
    f: &GridFunction,
    r: &DMatrix<f64>,
    m: usize,
    nu1: usize,
    num: usize,
    norm: Normalization,
) -> Result<f64> {
    spd_check(r, f.dim)?;
    let z = coeffs::zeta_matrix_with(f.horizon, m, nu1, num, norm)?;
    let basis = polys::basis(f.horizon, m, num, norm)?;
    let phi = phi_vector_difference_with(f, nu1, norm)?;
    let mut acc = 0.0;
    for j in 0..=num {
        let mut theta = DVector::zeros(f.dim);
        for (c, block) in phi.blocks.iter().enumerate() {
            theta += block * to_f64(z.entry(j, c));
        }
        acc += to_f64(&basis.chi(j)) * quadratic(r, &theta);
    }
    Ok(acc / to_f64(&polys::multiplicity_factorial(m)))
}

/// Projection lower bound for `J_m` of the first difference of `f`,
/// expressed in `f` itself plus its endpoint values.
pub fn lower_bound_difference(
    f: &GridFunction,
    r: &DMatrix<f64>,
    m: usize,
    nu1: usize,
    num: usize,
) -> Result<f64> {
    lower_bound_difference_with(f, r, m, nu1, num, Normalization::SignAtMinusOne)
}

/// Brute-force and closed-form references, kept deliberately independent of
/// the coefficient machinery. The command-line verifier runs these at
/// runtime, so they live here rather than in test code.
pub mod oracle {
    use super::*;

    /// `J_m` by literal nested loops over descending index chains.
    pub fn j_functional_nested(f: &GridFunction, r: &DMatrix<f64>, m: usize) -> Result<f64> {
        if m == 0 {
            return Err(Error::invalid("multiplicity m must be >= 1"));
        }
        spd_check(r, f.dim())?;
        fn level(f: &GridFunction, r: &DMatrix<f64>, depth: usize, hi: usize) -> f64 {
            (0..=hi)
                .map(|i| {
                    if depth == 1 {
                        quadratic(r, f.value(i))
                    } else {
                        level(f, r, depth - 1, i)
                    }
                })
                .sum()
        }
        Ok(level(f, r, m, f.horizon() - 1))
    }

    fn partial_sums(f: &GridFunction, depth: usize) -> Vec<DVector<f64>> {
        // s_1(i) = sum_{k<=i} f(k); s_{d}(i) = sum_{k<=i} s_{d-1}(k); returns s_d(N-1) for d=1..=depth
        let n = f.horizon();
        let mut layer: Vec<DVector<f64>> = (0..n).map(|i| f.value(i).clone()).collect();
        let mut out = Vec::with_capacity(depth);
        for _ in 0..depth {
            for i in 1..n {
                let prev = layer[i - 1].clone();
                layer[i] += prev;
            }
            out.push(layer[n - 1].clone());
        }
        out
    }

    /// Single-sum estimate: `(1/N) Ω^T R Ω` with `Ω` the plain sum.
    pub fn jensen(f: &GridFunction, r: &DMatrix<f64>) -> f64 {
        let n = f.horizon() as f64;
        let s = partial_sums(f, 1);
        quadratic(r, &s[0]) / n
    }

    /// Two-term single-sum estimate with the `3(N+1)/(N-1)` factor.
    pub fn wirtinger(f: &GridFunction, r: &DMatrix<f64>) -> f64 {
        let n = f.horizon() as f64;
        let s = partial_sums(f, 2);
        let omega11 = &s[0] - &s[1] * (2.0 / (n + 1.0));
        (quadratic(r, &s[0]) + 3.0 * (n + 1.0) / (n - 1.0) * quadratic(r, &omega11)) / n
    }

    /// Three-term single-sum estimate with the
    /// `5(N+1)(N+2)/((N-1)(N-2))` factor.
    pub fn three_term(f: &GridFunction, r: &DMatrix<f64>) -> f64 {
        let n = f.horizon() as f64;
        let s = partial_sums(f, 3);
        let omega11 = &s[0] - &s[1] * (2.0 / (n + 1.0));
        let omega12 = &s[0] - &s[1] * (6.0 / (n + 1.0)) + &s[2] * (12.0 / ((n + 1.0) * (n + 2.0)));
        (quadratic(r, &s[0])
            + 3.0 * (n + 1.0) / (n - 1.0) * quadratic(r, &omega11)
            + 5.0 * (n + 1.0) * (n + 2.0) / ((n - 1.0) * (n - 2.0)) * quadratic(r, &omega12))
            / n
    }

    /// Double-sum one-term estimate: `2/(N(N+1)) Ω^T R Ω` with `Ω` the
    /// double sum.
    pub fn double_sum_one_term(f: &GridFunction, r: &DMatrix<f64>) -> f64 {
        let n = f.horizon() as f64;
        let s = partial_sums(f, 2);
        2.0 / (n * (n + 1.0)) * quadratic(r, &s[1])
    }

    /// Double-sum two-term estimate with the `8(N+2)/(N-1)` factor.
    pub fn double_sum_two_term(f: &GridFunction, r: &DMatrix<f64>) -> f64 {
        let n = f.horizon() as f64;
        let s = partial_sums(f, 3);
        let omega21 = &s[1] - &s[2] * (3.0 / (n + 2.0));
        2.0 / (n * (n + 1.0))
            * (quadratic(r, &s[1]) + 8.0 * (n + 2.0) / (n - 1.0) * quadratic(r, &omega21))
    }

    /// Difference estimate from endpoint values only: `(1/N)(f(N)-f(0))^T R
    /// (f(N)-f(0))`.
    pub fn difference_jensen(f: &GridFunction, r: &DMatrix<f64>) -> f64 {
        let n = f.horizon();
        let d = f.value(n) - f.value(0);
        quadratic(r, &d) / n as f64
    }

    /// Two-term difference estimate over the closed window `0..=N`.
    pub fn difference_wirtinger(f: &GridFunction, r: &DMatrix<f64>) -> f64 {
        let n = f.horizon();
        let nf = n as f64;
        let d = f.value(n) - f.value(0);
        let mut total = f.value(n).clone();
        for i in 0..n {
            total += f.value(i);
        }
        let omega = f.value(n) + f.value(0) - total * (2.0 / (nf + 1.0));
        (quadratic(r, &d) + 3.0 * (nf + 1.0) / (nf - 1.0) * quadratic(r, &omega)) / nf
    }
}

/// Configuration for [`property_suite`].
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub trials: usize,
    pub seed: u64,
    /// Largest horizon `N` drawn.
    pub nmax: usize,
    /// Largest multiplicity `m` drawn.
    pub mmax: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            trials: 1000,
            seed: 2024,
            nmax: 12,
            mmax: 3,
        }
    }
}

/// Outcome of the randomized inequality suite.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub trials: usize,
    /// Individual comparisons performed across all trials.
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Randomized adversarial run of every inequality against its oracles:
/// validity against the nested-loop functional, tightness on projection-span
/// inputs, agreement with the closed-form specializations, invariance under
/// basis rescaling, and monotone improvement in the projection degree.
pub fn property_suite(cfg: &SuiteConfig) -> SuiteReport {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = 0usize;
    let mut failures = Vec::new();
    let nmax = cfg.nmax.max(2);

    for trial in 0..cfg.trials {
        let n = rng.gen_range(2..=nmax);
        let m = rng.gen_range(1..=cfg.mmax.clamp(1, n));
        let dim = rng.gen_range(1..=3usize);
        let nu1 = rng.gen_range((m - 1)..=(n - 1).min(6));
        let num = rng.gen_range(0..=(nu1 + 1 - m));

        let g = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
        let r = g.transpose() * &g + DMatrix::identity(dim, dim) * 0.3;
        let f = GridFunction::from_fn(n + 1, n, dim, |_| {
            DVector::from_fn(dim, |_, _| rng.gen_range(-3.0..3.0))
        })
        .expect("valid random grid");

        let mut fail = |msg: String| failures.push(format!("trial {trial}: {msg}"));

        // validity against the brute-force functional
        let j_direct = oracle::j_functional_nested(&f, &r, m).expect("nested");
        let scale = j_direct.abs().max(1.0);
        let bound = lower_bound_function(&f, &r, m, nu1, num).expect("bound");
        checks += 1;
        if bound > j_direct + 1e-9 * scale {
            fail(format!(
                "function bound {bound} exceeds J_{m} = {j_direct} (N={n}, nu1={nu1}, num={num})"
            ));
        }

        let rho = f.difference().expect("difference");
        let j_rho = oracle::j_functional_nested(&rho, &r, m).expect("nested rho");
        let rho_scale = j_rho.abs().max(1.0);
        let dbound = lower_bound_difference(&f, &r, m, nu1, num).expect("diff bound");
        checks += 1;
        if dbound > j_rho + 1e-9 * rho_scale {
            fail(format!(
                "difference bound {dbound} exceeds J_{m}(rho) = {j_rho} (N={n}, nu1={nu1}, num={num})"
            ));
        }

        // the single-sum weight form agrees with the nested loops
        let j_weighted = j_functional(&f, &r, m).expect("weighted");
        checks += 1;
        if (j_weighted - j_direct).abs() > 1e-12 * scale {
            fail(format!(
                "weight form {j_weighted} != nested {j_direct} (N={n}, m={m})"
            ));
        }

        // tightness on projection-span inputs
        let basis = polys::basis(n, m, num, Normalization::SignAtMinusOne).expect("basis");
        let coeff_vecs: Vec<DVector<f64>> = (0..=num)
            .map(|_| DVector::from_fn(dim, |_, _| rng.gen_range(-2.0..2.0)))
            .collect();
        let span_f = GridFunction::from_fn(n + 1, n, dim, |i| {
            let mut v = DVector::zeros(dim);
            for (j, a) in coeff_vecs.iter().enumerate() {
                v += a * to_f64(&basis.poly(j).eval_int(i as i64));
            }
            v
        })
        .expect("span grid");
        let j_span = j_functional(&span_f, &r, m).expect("span J");
        let b_span = lower_bound_function(&span_f, &r, m, nu1, num).expect("span bound");
        checks += 1;
        if (j_span - b_span).abs() > 1e-9 * j_span.abs().max(1.0) {
            fail(format!(
                "span equality broken: J = {j_span}, bound = {b_span} (N={n}, m={m}, num={num})"
            ));
        }

        // tightness of the difference bound when the difference is in span
        let mut acc = DVector::from_fn(dim, |_, _| rng.gen_range(-2.0..2.0));
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(acc.clone());
        for i in 0..n {
            let mut step = DVector::zeros(dim);
            for (j, a) in coeff_vecs.iter().enumerate() {
                step += a * to_f64(&basis.poly(j).eval_int(i as i64));
            }
            acc += step;
            cum.push(acc.clone());
        }
        let span_cum = GridFunction::new(cum, n).expect("cumulative grid");
        let j_cum = j_functional(&span_cum.difference().expect("rho"), &r, m).expect("J rho");
        let b_cum = lower_bound_difference(&span_cum, &r, m, nu1, num).expect("cum bound");
        checks += 1;
        if (j_cum - b_cum).abs() > 1e-9 * j_cum.abs().max(1.0) {
            fail(format!(
                "difference span equality broken: J = {j_cum}, bound = {b_cum} (N={n}, m={m}, num={num})"
            ));
        }

        // closed-form specializations
        let special = match (m, num) {
            (1, 0) => Some(("jensen", oracle::jensen(&f, &r))),
            (1, 1) if n > 1 => Some(("wirtinger", oracle::wirtinger(&f, &r))),
            (1, 2) if n > 2 => Some(("three-term", oracle::three_term(&f, &r))),
            (2, 0) => Some(("double one-term", oracle::double_sum_one_term(&f, &r))),
            (2, 1) if n > 1 => Some(("double two-term", oracle::double_sum_two_term(&f, &r))),
            _ => None,
        };
        if let Some((name, reference)) = special {
            checks += 1;
            if (bound - reference).abs() > 1e-12 * bound.abs().max(1.0) {
                fail(format!(
                    "{name} mismatch: general {bound} vs closed form {reference} (N={n})"
                ));
            }
        }
        let dspecial = match (m, num) {
            (1, 0) => Some(("difference jensen", oracle::difference_jensen(&f, &r))),
            (1, 1) if n > 1 => Some(("difference wirtinger", oracle::difference_wirtinger(&f, &r))),
            _ => None,
        };
        if let Some((name, reference)) = dspecial {
            checks += 1;
            if (dbound - reference).abs() > 1e-12 * dbound.abs().max(1.0) {
                fail(format!(
                    "{name} mismatch: general {dbound} vs closed form {reference} (N={n})"
                ));
            }
        }

        // invariance under basis rescaling
        let monic = lower_bound_function_with(&f, &r, m, nu1, num, Normalization::Monic)
            .expect("monic bound");
        let dmonic = lower_bound_difference_with(&f, &r, m, nu1, num, Normalization::Monic)
            .expect("monic diff bound");
        checks += 2;
        if (monic - bound).abs() > 1e-12 * bound.abs().max(1.0) {
            fail(format!("normalization changed bound: {monic} vs {bound}"));
        }
        if (dmonic - dbound).abs() > 1e-12 * dbound.abs().max(1.0) {
            fail(format!(
                "normalization changed difference bound: {dmonic} vs {dbound}"
            ));
        }

        // monotone improvement in the projection degree
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=num {
            let b = lower_bound_function(&f, &r, m, nu1, k).expect("chain bound");
            checks += 1;
            if b + 1e-12 * scale < prev {
                fail(format!("bound decreased at num = {k}: {prev} -> {b}"));
            }
            prev = b;
        }
    }

    SuiteReport {
        trials: cfg.trials,
        checks,
        failures,
    }
}
