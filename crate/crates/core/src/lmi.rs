//! Assembly of the delay-stability feasibility problem.
//!
//! For the system `x(t+1) = A x(t) + A_d x(t-tau)` and a choice of
//! multiplicity `m` with degrees `nu_1 > ... > nu_m >= 0`, the certified
//! sufficient condition is an LMI in `P, Q, R_1..R_m`: positivity of each
//! variable plus negativity of
//!
//! ```text
//! M = Lb' P Lb - G' P G + diag{Q, -Q, 0}
//!   + sum_k C(tau-1+k, k) (sA - e1)' R_k (sA - e1)
//!   - sum_k 1/(k-1)! (Zt_k (x) I)' diag{chi_kj R_k} (Zt_k (x) I)
//! ```
//!
//! expressed on the augmented coordinate `Phi = col{x(t), x(t-tau),
//! phi/tau}`, where `phi` stacks the window projections onto the first-order
//! polynomial family. `Lb` advances the extended state one step via the
//! shift-expansion rows, `G` extracts it, and the `Zt_k` rows bound the
//! window energy of the first difference from below; dropping that bound is
//! exactly what makes `M < 0` sufficient for the functional to decrease.
//!
//! [`BlockLmi`] keeps the congruence structure `sum coeff * F' X F` per
//! block rather than flattened coefficient matrices; the solver consumes the
//! factors directly.

use nalgebra::{DMatrix, DVector};

use crate::coeffs;
use crate::error::{Error, Result};
use crate::polys::{self, Normalization};
use crate::rational::{binomial, to_f64, Rational};

/// Linear discrete-time delay system `x(t+1) = A x(t) + A_d x(t-tau)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    a: DMatrix<f64>,
    a_d: DMatrix<f64>,
    tau: usize,
}

impl SystemModel {
    pub fn new(a: DMatrix<f64>, a_d: DMatrix<f64>, tau: usize) -> Result<Self> {
        if !a.is_square() || a.shape() != a_d.shape() {
            return Err(Error::DimensionMismatch(format!(
                "state matrices must be square and equal-sized, got {:?} and {:?}",
                a.shape(),
                a_d.shape()
            )));
        }
        if a.nrows() == 0 {
            return Err(Error::invalid("state dimension must be positive"));
        }
        if a.iter().chain(a_d.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("system matrices"));
        }
        if tau == 0 {
            return Err(Error::invalid("delay tau must be >= 1"));
        }
        Ok(SystemModel { a, a_d, tau })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn a_d(&self) -> &DMatrix<f64> {
        &self.a_d
    }

    pub fn n_x(&self) -> usize {
        self.a.nrows()
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Same dynamics at a different delay; the delay scan uses this.
    pub fn with_tau(&self, tau: usize) -> Result<SystemModel> {
        SystemModel::new(self.a.clone(), self.a_d.clone(), tau)
    }
}

/// Multiplicity and degree choice for one LMI condition.
///
/// `nus[k-1]` is the degree paired with the `k`-fold summation term;
/// the sequence must be strictly decreasing and nonnegative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LmiSpec {
    nus: Vec<usize>,
}

impl LmiSpec {
    pub fn new(nus: Vec<usize>) -> Result<Self> {
        if nus.is_empty() {
            return Err(Error::invalid("at least one degree is required"));
        }
        if nus.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::invalid(format!(
                "degrees must be strictly decreasing, got {nus:?}"
            )));
        }
        Ok(LmiSpec { nus })
    }

    /// The default degree ladder `nu_j = nu_1 - (j-1)`.
    pub fn standard(m: usize, nu1: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("multiplicity m must be >= 1"));
        }
        if nu1 + 1 < m {
            return Err(Error::invalid(format!(
                "nu1 = {nu1} cannot support m = {m} descending degrees"
            )));
        }
        LmiSpec::new((0..m).map(|j| nu1 - j).collect())
    }

    pub fn m(&self) -> usize {
        self.nus.len()
    }

    pub fn nu1(&self) -> usize {
        self.nus[0]
    }

    pub fn nus(&self) -> &[usize] {
        &self.nus
    }
}

/// The structural factors shared by the LMI blocks, all on the augmented
/// coordinate of width `n_x (nu1 + 2)`.
#[derive(Debug, Clone)]
pub struct StructuralMatrices {
    /// Selector of `x(t)`.
    pub e1: DMatrix<f64>,
    /// Selector of `x(t-tau)`.
    pub e2: DMatrix<f64>,
    /// One-step update row `A e1 + A_d e2`.
    pub script_a: DMatrix<f64>,
    /// Scalar rescaling `diag{1, 1, tau, ..., tau}` undoing the `1/tau` in
    /// the augmented coordinate.
    pub t: DMatrix<f64>,
    /// Extraction `x_ext(t) = gamma * Phi(t)`.
    pub gamma: DMatrix<f64>,
    /// Advance `x_ext(t+1) = lambda_underbar * Phi(t)`.
    pub lambda_underbar: DMatrix<f64>,
    /// Scalar difference-bound rows, already rescaled by `t`; one matrix per
    /// summation order `k`, each `(nu_k + 1) x (nu1 + 2)`.
    pub ztilde: Vec<DMatrix<f64>>,
    /// Inverse norm-squares `chi_{k,j}`, indexed `[k-1][j]`.
    pub chi: Vec<Vec<f64>>,
}

fn selector(block: usize, nblocks: usize, nx: usize) -> DMatrix<f64> {
    let mut e = DMatrix::zeros(nx, nx * nblocks);
    e.view_mut((0, block * nx), (nx, nx))
        .copy_from(&DMatrix::identity(nx, nx));
    e
}

fn check_admissible(sys: &SystemModel, spec: &LmiSpec) -> Result<()> {
    if spec.nu1() + 1 > sys.tau {
        return Err(Error::DegreeOverflow {
            degree: spec.nu1(),
            horizon: sys.tau,
        });
    }
    Ok(())
}

/// Builds the shared structural factors for `(sys, spec)`.
pub fn structural(sys: &SystemModel, spec: &LmiSpec) -> Result<StructuralMatrices> {
    check_admissible(sys, spec)?;
    let nx = sys.n_x();
    let tau = sys.tau;
    let nu1 = spec.nu1();
    let width = nu1 + 2;

    let e1 = selector(0, width, nx);
    let e2 = selector(1, width, nx);
    let script_a = sys.a() * &e1 + sys.a_d() * &e2;

    let mut t = DMatrix::identity(width, width);
    for d in 2..width {
        t[(d, d)] = tau as f64;
    }

    // row selector dropping the x(t-tau) slot, then the tau rescaling
    let mut gamma_scalar = DMatrix::zeros(nu1 + 1, width);
    gamma_scalar[(0, 0)] = 1.0;
    for r in 0..nu1 {
        gamma_scalar[(r + 1, r + 2)] = 1.0;
    }
    let gamma = (&gamma_scalar * &t).kronecker(&DMatrix::identity(nx, nx));

    let mut lambda_underbar = DMatrix::zeros(nx * (nu1 + 1), nx * width);
    lambda_underbar
        .view_mut((0, 0), (nx, nx * width))
        .copy_from(&script_a);
    for l in 0..nu1 {
        let row = coeffs::lambda_row(tau, l, nu1)?;
        let mut scalar = DMatrix::zeros(1, width);
        scalar[(0, 0)] = to_f64(&row.c1);
        scalar[(0, 1)] = to_f64(&row.c0);
        for (s, lam) in row.lambdas.iter().enumerate() {
            scalar[(0, s + 2)] = to_f64(lam);
        }
        let block = (&scalar * &t).kronecker(&DMatrix::identity(nx, nx));
        lambda_underbar
            .view_mut((nx * (l + 1), 0), (nx, nx * width))
            .copy_from(&block);
    }

    let mut ztilde = Vec::with_capacity(spec.m());
    let mut chi = Vec::with_capacity(spec.m());
    for (k, &nuk) in spec.nus().iter().enumerate() {
        let order = k + 1;
        let z = coeffs::zeta_matrix(tau, order, nu1, nuk)?;
        let mut scalar = DMatrix::zeros(nuk + 1, width);
        for j in 0..=nuk {
            for c in 0..width {
                scalar[(j, c)] = to_f64(z.entry(j, c));
            }
        }
        ztilde.push(scalar * &t);
        let basis = polys::basis(tau, order, nuk, Normalization::SignAtMinusOne)?;
        chi.push((0..=nuk).map(|j| to_f64(&basis.chi(j))).collect());
    }

    Ok(StructuralMatrices {
        e1,
        e2,
        script_a,
        t,
        gamma,
        lambda_underbar,
        ztilde,
        chi,
    })
}

/// Whether a constraint block must be positive or negative definite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockSense {
    PositiveDefinite,
    NegativeDefinite,
}

/// One congruence summand `coeff * factor' X_var factor`.
#[derive(Debug, Clone)]
pub struct CongruenceTerm {
    /// Index into [`BlockLmi::vars`].
    pub var: usize,
    /// `var_dim x block_dim` factor.
    pub factor: DMatrix<f64>,
    pub coeff: f64,
}

/// A symmetric matrix variable of the feasibility problem.
#[derive(Debug, Clone)]
pub struct VarSpec {
    pub name: String,
    pub dim: usize,
}

/// One definiteness constraint: `constant + sum terms` compared to zero.
#[derive(Debug, Clone)]
pub struct ConstraintBlock {
    pub name: String,
    pub dim: usize,
    pub sense: BlockSense,
    pub terms: Vec<CongruenceTerm>,
    pub constant: DMatrix<f64>,
}

/// Structured affine map from symmetric variables to constraint blocks.
#[derive(Debug, Clone)]
pub struct BlockLmi {
    pub vars: Vec<VarSpec>,
    pub blocks: Vec<ConstraintBlock>,
}

impl BlockLmi {
    /// Sum of variable dimensions; doubles as the default trace budget.
    pub fn total_var_dim(&self) -> usize {
        self.vars.iter().map(|v| v.dim).sum()
    }

    /// Identity matrix for every variable.
    pub fn identity_assignment(&self) -> Vec<DMatrix<f64>> {
        self.vars
            .iter()
            .map(|v| DMatrix::identity(v.dim, v.dim))
            .collect()
    }

    /// Evaluates one block at a concrete assignment.
    pub fn block_value(&self, block: usize, assignment: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
        let b = &self.blocks[block];
        if assignment.len() != self.vars.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} variables, got {}",
                self.vars.len(),
                assignment.len()
            )));
        }
        let mut acc = b.constant.clone();
        for term in &b.terms {
            let x = &assignment[term.var];
            if x.shape() != (self.vars[term.var].dim, self.vars[term.var].dim) {
                return Err(Error::DimensionMismatch(format!(
                    "variable {} has wrong shape",
                    self.vars[term.var].name
                )));
            }
            acc += (term.factor.transpose() * x * &term.factor) * term.coeff;
        }
        Ok(acc)
    }

    /// Every coefficient and constant multiplied by `factor`; the
    /// feasibility region is unchanged because the map is homogeneous.
    pub fn scaled(&self, factor: f64) -> BlockLmi {
        let mut out = self.clone();
        for b in &mut out.blocks {
            b.constant *= factor;
            for t in &mut b.terms {
                t.coeff *= factor;
            }
        }
        out
    }
}

/// Assembles the full feasibility problem for `(sys, spec)`.
pub fn assemble(sys: &SystemModel, spec: &LmiSpec) -> Result<BlockLmi> {
    let st = structural(sys, spec)?;
    let nx = sys.n_x();
    let nu1 = spec.nu1();
    let m = spec.m();
    let width = nx * (nu1 + 2);

    let mut vars = vec![
        VarSpec {
            name: "P".into(),
            dim: nx * (nu1 + 1),
        },
        VarSpec {
            name: "Q".into(),
            dim: nx,
        },
    ];
    for k in 1..=m {
        vars.push(VarSpec {
            name: format!("R{k}"),
            dim: nx,
        });
    }

    let mut blocks: Vec<ConstraintBlock> = vars
        .iter()
        .enumerate()
        .map(|(idx, v)| ConstraintBlock {
            name: v.name.clone(),
            dim: v.dim,
            sense: BlockSense::PositiveDefinite,
            terms: vec![CongruenceTerm {
                var: idx,
                factor: DMatrix::identity(v.dim, v.dim),
                coeff: 1.0,
            }],
            constant: DMatrix::zeros(v.dim, v.dim),
        })
        .collect();

    let mut terms = vec![
        CongruenceTerm {
            var: 0,
            factor: st.lambda_underbar.clone(),
            coeff: 1.0,
        },
        CongruenceTerm {
            var: 0,
            factor: st.gamma.clone(),
            coeff: -1.0,
        },
        CongruenceTerm {
            var: 1,
            factor: st.e1.clone(),
            coeff: 1.0,
        },
        CongruenceTerm {
            var: 1,
            factor: st.e2.clone(),
            coeff: -1.0,
        },
    ];
    let drift = &st.script_a - &st.e1;
    for k in 1..=m {
        let count = Rational::from_integer(binomial((sys.tau + k - 1) as u64, k as u64));
        terms.push(CongruenceTerm {
            var: 1 + k,
            factor: drift.clone(),
            coeff: to_f64(&count),
        });
        let fact = to_f64(&polys::multiplicity_factorial(k));
        let zt = &st.ztilde[k - 1];
        for j in 0..zt.nrows() {
            let row = zt.row(j).clone_owned();
            let factor = row.kronecker(&DMatrix::identity(nx, nx));
            terms.push(CongruenceTerm {
                var: 1 + k,
                factor,
                coeff: -st.chi[k - 1][j] / fact,
            });
        }
    }
    blocks.push(ConstraintBlock {
        name: "M".into(),
        dim: width,
        sense: BlockSense::NegativeDefinite,
        terms,
        constant: DMatrix::zeros(width, width),
    });

    Ok(BlockLmi { vars, blocks })
}

/// Rolls the system forward from an initial window `x(0..=tau)`, returning
/// `len` states.
pub fn simulate(
    sys: &SystemModel,
    initial: &[DVector<f64>],
    len: usize,
) -> Result<Vec<DVector<f64>>> {
    if initial.len() < sys.tau + 1 {
        return Err(Error::invalid(format!(
            "initial window must cover tau + 1 = {} points",
            sys.tau + 1
        )));
    }
    if initial.iter().any(|v| v.len() != sys.n_x()) {
        return Err(Error::DimensionMismatch(
            "initial states must match the system dimension".into(),
        ));
    }
    let mut xs = initial.to_vec();
    xs.truncate(len.max(sys.tau + 1));
    while xs.len() < len {
        let t = xs.len() - 1;
        let next = sys.a() * &xs[t] + sys.a_d() * &xs[t - sys.tau];
        xs.push(next);
    }
    xs.truncate(len);
    Ok(xs)
}

/// Evaluates the certified decrease inequality pathwise: returns
/// `max_t [Delta V(t) - Phi(t)' M Phi(t)]` over the trajectory, with `V`
/// computed from its literal nested-sum definition. The result must be
/// nonpositive up to rounding for any positive definite `P, Q, R_k`.
pub fn delta_v_bound_check(
    sys: &SystemModel,
    spec: &LmiSpec,
    p: &DMatrix<f64>,
    q: &DMatrix<f64>,
    rs: &[DMatrix<f64>],
    trajectory: &[DVector<f64>],
) -> Result<f64> {
    check_admissible(sys, spec)?;
    let nx = sys.n_x();
    let tau = sys.tau;
    let nu1 = spec.nu1();
    if trajectory.len() < tau + 2 {
        return Err(Error::invalid(format!(
            "trajectory must cover at least tau + 2 = {} points",
            tau + 2
        )));
    }
    if trajectory.iter().any(|v| v.len() != nx) {
        return Err(Error::DimensionMismatch(
            "trajectory states must match the system dimension".into(),
        ));
    }
    if p.shape() != (nx * (nu1 + 1), nx * (nu1 + 1))
        || q.shape() != (nx, nx)
        || rs.len() != spec.m()
        || rs.iter().any(|r| r.shape() != (nx, nx))
    {
        return Err(Error::DimensionMismatch(
            "P, Q, R_k shapes must match the chosen degrees".into(),
        ));
    }

    let lmi = assemble(sys, spec)?;
    let mut assignment = vec![p.clone(), q.clone()];
    assignment.extend(rs.iter().cloned());
    let m_block = lmi.block_value(lmi.blocks.len() - 1, &assignment)?;

    let basis = polys::basis(tau, 1, nu1.max(1) - 1, Normalization::SignAtMinusOne)?;
    let pvals: Vec<Vec<f64>> = (0..nu1)
        .map(|l| {
            (0..tau)
                .map(|i| to_f64(&basis.poly(l).eval_int(i as i64)))
                .collect()
        })
        .collect();

    let phi = |l: usize, t: usize| -> DVector<f64> {
        let mut acc = DVector::zeros(nx);
        for i in 0..tau {
            acc += &trajectory[t - tau + i] * pvals[l][i];
        }
        acc
    };
    let x_ext = |t: usize| -> DVector<f64> {
        let mut v = DVector::zeros(nx * (nu1 + 1));
        v.rows_mut(0, nx).copy_from(&trajectory[t]);
        for l in 0..nu1 {
            v.rows_mut(nx * (l + 1), nx).copy_from(&phi(l, t));
        }
        v
    };
    let phi_aug = |t: usize| -> DVector<f64> {
        let mut v = DVector::zeros(nx * (nu1 + 2));
        v.rows_mut(0, nx).copy_from(&trajectory[t]);
        v.rows_mut(nx, nx).copy_from(&trajectory[t - tau]);
        for l in 0..nu1 {
            v.rows_mut(nx * (l + 2), nx)
                .copy_from(&(phi(l, t) / tau as f64));
        }
        v
    };

    // V_{1j}: j-fold descending chains, inner tail sum of the difference energy
    fn window_term(
        rho: &[DVector<f64>],
        r: &DMatrix<f64>,
        depth: usize,
        hi: usize,
        tau: usize,
    ) -> f64 {
        (0..=hi)
            .map(|i| {
                if depth == 0 {
                    (i..tau)
                        .map(|s| (rho[s].transpose() * r * &rho[s])[(0, 0)])
                        .sum::<f64>()
                } else {
                    window_term(rho, r, depth - 1, i, tau)
                }
            })
            .sum()
    }

    let lkf = |t: usize| -> f64 {
        let xe = x_ext(t);
        let mut v = (xe.transpose() * p * &xe)[(0, 0)];
        for s in 0..tau {
            let x = &trajectory[t - tau + s];
            v += (x.transpose() * q * x)[(0, 0)];
        }
        let rho: Vec<DVector<f64>> = (0..tau)
            .map(|s| &trajectory[t - tau + s + 1] - &trajectory[t - tau + s])
            .collect();
        for (j, r) in rs.iter().enumerate() {
            v += window_term(&rho, r, j, tau - 1, tau);
        }
        v
    };

    let mut worst = f64::NEG_INFINITY;
    for t in tau..trajectory.len() - 1 {
        let dv = lkf(t + 1) - lkf(t);
        let f = phi_aug(t);
        let quad = (f.transpose() * &m_block * &f)[(0, 0)];
        worst = worst.max(dv - quad);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
        let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        g.transpose() * &g + DMatrix::identity(n, n) * 0.4
    }

    #[test]
    fn spec_validation() {
        assert!(LmiSpec::new(vec![2, 1, 0]).is_ok());
        assert!(LmiSpec::new(vec![2, 2]).is_err());
        assert!(LmiSpec::new(vec![]).is_err());
        assert_eq!(LmiSpec::standard(3, 4).unwrap().nus(), &[4, 3, 2]);
        assert!(LmiSpec::standard(3, 1).is_err());
        assert_eq!(LmiSpec::standard(1, 0).unwrap().nus(), &[0]);
    }

    #[test]
    fn structural_dimensions() {
        let sys = benchmarks::example1(8).unwrap();
        let st = structural(&sys, &LmiSpec::standard(1, 1).unwrap()).unwrap();
        assert_eq!(st.gamma.shape(), (4, 6));
        assert_eq!(st.lambda_underbar.shape(), (4, 6));
        assert_eq!(st.e1.shape(), (2, 6));
        assert_eq!(st.script_a.shape(), (2, 6));
        assert_eq!(st.ztilde[0].shape(), (2, 3));

        let lmi = assemble(&sys, &LmiSpec::standard(1, 1).unwrap()).unwrap();
        assert_eq!(lmi.blocks.last().unwrap().dim, 6);
    }

    #[test]
    fn degenerate_degree_zero_shapes() {
        let sys = benchmarks::example1(5).unwrap();
        let st = structural(&sys, &LmiSpec::standard(1, 0).unwrap()).unwrap();
        // extraction reduces to [I 0]
        let mut expect = DMatrix::zeros(2, 4);
        expect
            .view_mut((0, 0), (2, 2))
            .copy_from(&DMatrix::identity(2, 2));
        assert_eq!(st.gamma, expect);
        // advance reduces to [A A_d]
        let mut adv = DMatrix::zeros(2, 4);
        adv.view_mut((0, 0), (2, 2)).copy_from(sys.a());
        adv.view_mut((0, 2), (2, 2)).copy_from(sys.a_d());
        assert_relative_eq!(st.lambda_underbar, adv);

        // the Q part of the last block is diag{Q, -Q}
        let lmi = assemble(&sys, &LmiSpec::standard(1, 0).unwrap()).unwrap();
        let mut assignment = lmi.identity_assignment();
        for (i, v) in lmi.vars.iter().enumerate() {
            if v.name != "Q" {
                assignment[i] = DMatrix::zeros(v.dim, v.dim);
            }
        }
        let m = lmi.block_value(lmi.blocks.len() - 1, &assignment).unwrap();
        let mut expect_q = DMatrix::zeros(4, 4);
        expect_q
            .view_mut((0, 0), (2, 2))
            .copy_from(&DMatrix::identity(2, 2));
        expect_q
            .view_mut((2, 2), (2, 2))
            .copy_from(&(-DMatrix::identity(2, 2)));
        assert_relative_eq!(m, expect_q, epsilon = 1e-14);
    }

    #[test]
    fn trajectory_identities_hold() {
        let sys = benchmarks::example1(8).unwrap();
        let spec = LmiSpec::standard(2, 2).unwrap();
        let st = structural(&sys, &spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let initial: Vec<DVector<f64>> = (0..9).map(|_| random_vec(&mut rng, 2)).collect();
        let xs = simulate(&sys, &initial, 30).unwrap();

        let tau = 8usize;
        let nu1 = 2usize;
        let basis = polys::basis(tau, 1, nu1 - 1, Normalization::SignAtMinusOne).unwrap();
        let phi = |l: usize, t: usize| -> DVector<f64> {
            let mut acc = DVector::zeros(2);
            for i in 0..tau {
                acc += &xs[t - tau + i] * to_f64(&basis.poly(l).eval_int(i as i64));
            }
            acc
        };
        for t in tau..xs.len() - 1 {
            let mut aug = DVector::zeros(2 * (nu1 + 2));
            aug.rows_mut(0, 2).copy_from(&xs[t]);
            aug.rows_mut(2, 2).copy_from(&xs[t - tau]);
            for l in 0..nu1 {
                aug.rows_mut(2 * (l + 2), 2)
                    .copy_from(&(phi(l, t) / tau as f64));
            }
            let mut ext = DVector::zeros(2 * (nu1 + 1));
            ext.rows_mut(0, 2).copy_from(&xs[t]);
            for l in 0..nu1 {
                ext.rows_mut(2 * (l + 1), 2).copy_from(&phi(l, t));
            }
            let mut ext_next = DVector::zeros(2 * (nu1 + 1));
            ext_next.rows_mut(0, 2).copy_from(&xs[t + 1]);
            for l in 0..nu1 {
                ext_next.rows_mut(2 * (l + 1), 2).copy_from(&phi(l, t + 1));
            }
            assert_relative_eq!(&st.gamma * &aug, ext, epsilon = 1e-10);
            assert_relative_eq!(&st.lambda_underbar * &aug, ext_next, epsilon = 1e-10);
        }
    }

    #[test]
    fn assembled_blocks_are_symmetric() {
        let sys = benchmarks::example3(9).unwrap();
        let spec = LmiSpec::standard(2, 3).unwrap();
        let lmi = assemble(&sys, &spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let assignment: Vec<DMatrix<f64>> = lmi
            .vars
            .iter()
            .map(|v| random_spd(&mut rng, v.dim))
            .collect();
        for b in 0..lmi.blocks.len() {
            let val = lmi.block_value(b, &assignment).unwrap();
            assert_relative_eq!(val.clone(), val.transpose(), epsilon = 1e-10);
        }
    }

    #[test]
    fn energy_bound_part_is_positive_semidefinite() {
        // with A = I, A_d = 0, P = 0, Q = 0 the last block reduces to minus
        // the difference-bound energy, which must be <= 0 for R_k > 0
        let sys = SystemModel::new(
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 2),
            7,
        )
        .unwrap();
        let spec = LmiSpec::standard(2, 2).unwrap();
        let lmi = assemble(&sys, &spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut assignment = Vec::new();
        for v in &lmi.vars {
            if v.name.starts_with('R') {
                assignment.push(random_spd(&mut rng, v.dim));
            } else {
                assignment.push(DMatrix::zeros(v.dim, v.dim));
            }
        }
        let m = lmi.block_value(lmi.blocks.len() - 1, &assignment).unwrap();
        let eig = m.symmetric_eigenvalues();
        assert!(eig.iter().all(|&l| l <= 1e-10), "eigenvalues {eig:?}");
    }

    #[test]
    fn chain_counts_match_binomials() {
        fn chains(depth: usize, hi: usize) -> u64 {
            (0..=hi)
                .map(|i| if depth == 1 { 1 } else { chains(depth - 1, i) })
                .sum()
        }
        for tau in 1..=20usize {
            for k in 1..=4usize {
                let direct = chains(k, tau - 1);
                let closed = binomial((tau - 1 + k) as u64, k as u64);
                assert_eq!(closed, direct.into(), "tau={tau} k={k}");
            }
        }
    }

    #[test]
    fn decrease_inequality_on_trajectories() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (spec, tau) in [
            (LmiSpec::standard(1, 1).unwrap(), 6usize),
            (LmiSpec::new(vec![2, 1]).unwrap(), 7),
        ] {
            let sys = benchmarks::example1(tau).unwrap();
            let nx = 2;
            let p = random_spd(&mut rng, nx * (spec.nu1() + 1));
            let q = random_spd(&mut rng, nx);
            let rs: Vec<DMatrix<f64>> =
                (0..spec.m()).map(|_| random_spd(&mut rng, nx)).collect();
            let initial: Vec<DVector<f64>> =
                (0..tau + 1).map(|_| random_vec(&mut rng, nx)).collect();
            let xs = simulate(&sys, &initial, tau + 12).unwrap();
            let worst = delta_v_bound_check(&sys, &spec, &p, &q, &rs, &xs).unwrap();
            assert!(worst <= 1e-8, "violation {worst} for {:?}", spec.nus());
        }
    }

    #[test]
    fn zero_trajectory_gives_exact_zero() {
        let sys = benchmarks::example1(5).unwrap();
        let spec = LmiSpec::standard(1, 1).unwrap();
        let zeros: Vec<DVector<f64>> = (0..10).map(|_| DVector::zeros(2)).collect();
        let p = DMatrix::identity(4, 4);
        let q = DMatrix::identity(2, 2);
        let rs = vec![DMatrix::identity(2, 2)];
        let worst = delta_v_bound_check(&sys, &spec, &p, &q, &rs, &zeros).unwrap();
        assert_eq!(worst, 0.0);
    }

    #[test]
    fn inadmissible_parameters_are_rejected() {
        let sys = benchmarks::example1(3).unwrap();
        assert!(matches!(
            structural(&sys, &LmiSpec::standard(1, 3).unwrap()),
            Err(Error::DegreeOverflow { .. })
        ));
        assert!(structural(&sys, &LmiSpec::standard(1, 2).unwrap()).is_ok());
        let spec = LmiSpec::standard(1, 1).unwrap();
        let short: Vec<DVector<f64>> = (0..4).map(|_| DVector::zeros(2)).collect();
        let p = DMatrix::identity(4, 4);
        let q = DMatrix::identity(2, 2);
        let rs = vec![DMatrix::identity(2, 2)];
        assert!(delta_v_bound_check(&sys, &spec, &p, &q, &rs, &short).is_err());
    }

    #[test]
    fn scaling_preserves_structure() {
        let sys = benchmarks::example1(6).unwrap();
        let lmi = assemble(&sys, &LmiSpec::standard(1, 1).unwrap()).unwrap();
        let scaled = lmi.scaled(10.0);
        let assignment = lmi.identity_assignment();
        let a = lmi.block_value(lmi.blocks.len() - 1, &assignment).unwrap();
        let b = scaled
            .block_value(scaled.blocks.len() - 1, &assignment)
            .unwrap();
        assert_relative_eq!(b, a * 10.0, epsilon = 1e-12);
    }
}
