//! Strict feasibility decisions for [`BlockLmi`] problems.
//!
//! The decision program is margin maximization: find the assignment and the
//! largest `t` with every positive block `>= t I` and every negative block
//! `<= -t I`, under a fixed trace budget on the variables (the block
//! constraints alone are homogeneous, so without the budget the margin is
//! either unbounded or zero). Strict feasibility of the original LMI is
//! equivalent to `t* > 0`; the decision rule uses `t* > feas_tol`.
//!
//! The solver is a log-det barrier method with equality-constrained Newton
//! steps, adequate for the problem sizes here (a few hundred scalar
//! unknowns). Every accepted result is re-checked by [`verify_certificate`],
//! which only looks at eigenvalues of the evaluated blocks and shares no
//! state with the solver.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lmi::{BlockLmi, BlockSense};

/// Tolerances and limits for [`solve_feasibility`].
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Decision threshold: feasible iff the optimal margin exceeds this.
    pub feas_tol: f64,
    /// Target width of the barrier duality gap at termination.
    pub duality_gap_tol: f64,
    /// Cap on total Newton steps across all barrier stages.
    pub max_iterations: usize,
    /// Sum of variable traces; `None` uses the total variable dimension,
    /// which makes the all-identity assignment budget-exact.
    pub trace_budget: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feas_tol: 1e-6,
            duality_gap_tol: 1e-8,
            max_iterations: 200,
            trace_budget: None,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if !(self.feas_tol > 0.0) || !(self.duality_gap_tol > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if let Some(b) = self.trace_budget {
            if !(b > 0.0) {
                return Err(Error::invalid("trace budget must be positive"));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be positive"));
        }
        Ok(())
    }
}

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Margin above `feas_tol` and the certificate re-verified.
    MarginPositive,
    /// Margin at or below `feas_tol` (includes borderline cases).
    MarginNonpositive,
    /// Newton budget exhausted before the gap closed.
    MaxIterations,
    /// Barrier or Newton steps stalled.
    NumericalFailure,
}

/// Outcome of a feasibility solve.
#[derive(Debug, Clone)]
pub struct FeasibilityResult {
    pub feasible: bool,
    /// Best margin `t` found.
    pub margin: f64,
    /// Total Newton steps taken.
    pub iterations: usize,
    /// Variable assignment, in [`BlockLmi::vars`] order.
    pub certificate: Option<Vec<DMatrix<f64>>>,
    pub status: SolveStatus,
}

/// Eigendecomposition of a (defensively symmetrized) real matrix.
///
/// Returns eigenvalues in ascending order with matching orthonormal
/// eigenvector columns.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {:?}",
            m.shape()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("eigendecomposition input"));
    }
    let sym = (m + m.transpose()) * 0.5;
    let se = sym.symmetric_eigen();
    let n = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = DVector::from_fn(n, |i, _| se.eigenvalues[order[i]]);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &se.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Independent certificate check: every positive block must have least
/// eigenvalue `>= tol * scale` and every negative block greatest eigenvalue
/// `<= -tol * scale`, with `scale = max(1, spectral radius of the block)`.
pub fn verify_certificate(
    lmi: &BlockLmi,
    assignment: &[DMatrix<f64>],
    tol: f64,
) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::invalid("verification tolerance must be positive"));
    }
    for b in 0..lmi.blocks.len() {
        let value = lmi.block_value(b, assignment)?;
        let (vals, _) = symmetric_eigen(&value)?;
        let lo = vals[0];
        let hi = vals[vals.len() - 1];
        let scale = 1.0_f64.max(lo.abs()).max(hi.abs());
        let ok = match lmi.blocks[b].sense {
            BlockSense::PositiveDefinite => lo >= tol * scale,
            BlockSense::NegativeDefinite => hi <= -tol * scale,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

// One margin constraint in solver form: constant + sum_i z_i dirs_i >= 0,
// with the sense sign already folded in and the margin direction -I last.
struct BlockData {
    constant: DMatrix<f64>,
    dirs: Vec<(usize, DMatrix<f64>)>,
}

struct Problem {
    n_scalars: usize,
    var_offsets: Vec<usize>,
    var_dims: Vec<usize>,
    blocks: Vec<BlockData>,
    budget_mask: Vec<bool>,
    budget: f64,
    total_block_dim: usize,
}

fn tri_count(d: usize) -> usize {
    d * (d + 1) / 2
}

impl Problem {
    fn build(lmi: &BlockLmi, opts: &SolverOptions) -> Result<Problem> {
        let var_dims: Vec<usize> = lmi.vars.iter().map(|v| v.dim).collect();
        let mut var_offsets = Vec::with_capacity(var_dims.len());
        let mut n_scalars = 0;
        for &d in &var_dims {
            var_offsets.push(n_scalars);
            n_scalars += tri_count(d);
        }

        let mut budget_mask = vec![false; n_scalars];
        for (v, &d) in var_dims.iter().enumerate() {
            let mut idx = var_offsets[v];
            for c in 0..d {
                for r in c..d {
                    if r == c {
                        budget_mask[idx] = true;
                    }
                    idx += 1;
                }
            }
        }

        let mut blocks = Vec::with_capacity(lmi.blocks.len());
        let mut total_block_dim = 0;
        for cb in &lmi.blocks {
            let sigma = match cb.sense {
                BlockSense::PositiveDefinite => 1.0,
                BlockSense::NegativeDefinite => -1.0,
            };
            total_block_dim += cb.dim;
            let mut dir_map: Vec<Option<DMatrix<f64>>> = vec![None; n_scalars];
            for term in &cb.terms {
                if term.factor.iter().any(|x| !x.is_finite()) || !term.coeff.is_finite() {
                    return Err(Error::NonFinite("constraint coefficients"));
                }
                let v = term.var;
                let d = var_dims[v];
                if term.factor.nrows() != d || term.factor.ncols() != cb.dim {
                    return Err(Error::DimensionMismatch(format!(
                        "factor shape {:?} does not match variable {} and block {}",
                        term.factor.shape(),
                        lmi.vars[v].name,
                        cb.name
                    )));
                }
                let rows: Vec<DVector<f64>> = (0..d)
                    .map(|r| term.factor.row(r).transpose())
                    .collect();
                let mut idx = var_offsets[v];
                for c in 0..d {
                    for r in c..d {
                        let mut outer = &rows[r] * rows[c].transpose();
                        if r != c {
                            outer += &rows[c] * rows[r].transpose();
                        }
                        outer *= sigma * term.coeff;
                        match &mut dir_map[idx] {
                            Some(acc) => *acc += outer,
                            slot => *slot = Some(outer),
                        }
                        idx += 1;
                    }
                }
            }
            let mut dirs: Vec<(usize, DMatrix<f64>)> = dir_map
                .into_iter()
                .enumerate()
                .filter_map(|(i, d)| d.map(|d| (i, d)))
                .collect();
            dirs.push((n_scalars, -DMatrix::identity(cb.dim, cb.dim)));
            blocks.push(BlockData {
                constant: &cb.constant * sigma,
                dirs,
            });
        }

        let dim_total: usize = var_dims.iter().sum();
        Ok(Problem {
            n_scalars,
            var_offsets,
            var_dims,
            blocks,
            budget_mask,
            budget: opts.trace_budget.unwrap_or(dim_total as f64),
            total_block_dim,
        })
    }

    fn eval_block(&self, b: &BlockData, z: &DVector<f64>) -> DMatrix<f64> {
        let mut acc = b.constant.clone();
        for (i, d) in &b.dirs {
            let zi = z[*i];
            if zi != 0.0 {
                acc += d * zi;
            }
        }
        acc
    }

    fn factorize(&self, z: &DVector<f64>) -> Option<Vec<Cholesky<f64, nalgebra::Dyn>>> {
        self.blocks
            .iter()
            .map(|b| Cholesky::new(self.eval_block(b, z)))
            .collect()
    }

    fn objective(&self, z: &DVector<f64>, mu: f64, chols: &[Cholesky<f64, nalgebra::Dyn>]) -> f64 {
        let mut f = -z[self.n_scalars] / mu;
        for ch in chols {
            let l = ch.l_dirty();
            for i in 0..l.nrows() {
                f -= 2.0 * l[(i, i)].ln();
            }
        }
        f
    }

    fn unpack(&self, z: &DVector<f64>) -> Vec<DMatrix<f64>> {
        self.var_dims
            .iter()
            .zip(&self.var_offsets)
            .map(|(&d, &off)| {
                let mut x = DMatrix::zeros(d, d);
                let mut idx = off;
                for c in 0..d {
                    for r in c..d {
                        x[(r, c)] = z[idx];
                        x[(c, r)] = z[idx];
                        idx += 1;
                    }
                }
                x
            })
            .collect()
    }
}

/// Decides strict feasibility of `lmi` by maximizing the common definiteness
/// margin under the trace budget.
pub fn solve_feasibility(lmi: &BlockLmi, opts: &SolverOptions) -> Result<FeasibilityResult> {
    opts.validate()?;
    if lmi.vars.is_empty() || lmi.blocks.is_empty() {
        return Err(Error::invalid("the problem needs variables and blocks"));
    }
    let prob = Problem::build(lmi, opts)?;
    let nz = prob.n_scalars + 1;

    // start: scaled identity for every variable, margin below the worst
    // eigenvalue so all barrier terms begin strictly inside
    let ident_scale = prob.budget / prob.var_dims.iter().sum::<usize>() as f64;
    let mut z = DVector::zeros(nz);
    for i in 0..prob.n_scalars {
        if prob.budget_mask[i] {
            z[i] = ident_scale;
        }
    }
    let mut min_eig = f64::INFINITY;
    for b in &prob.blocks {
        let value = prob.eval_block(b, &z);
        let (vals, _) = symmetric_eigen(&value)?;
        min_eig = min_eig.min(vals[0]);
    }
    if !min_eig.is_finite() {
        return Err(Error::NonFinite("initial block evaluation"));
    }
    let slack = 1.0_f64.max(0.1 * min_eig.abs());
    z[prob.n_scalars] = min_eig - slack;

    let m_total = prob.total_block_dim as f64;
    let mut mu = 1.0_f64.max(z[prob.n_scalars].abs());
    let mut iterations = 0usize;
    let mut stalled = false;
    let mut converged = false;

    'outer: loop {
        // center at the current barrier weight
        let mut inner = 0usize;
        loop {
            if iterations >= opts.max_iterations {
                break 'outer;
            }
            let chols = match prob.factorize(&z) {
                Some(c) => c,
                None => {
                    stalled = true;
                    break 'outer;
                }
            };
            let f0 = prob.objective(&z, mu, &chols);

            let mut grad = DVector::zeros(nz);
            grad[prob.n_scalars] = -1.0 / mu;
            let mut hess = DMatrix::zeros(nz, nz);
            for (b, ch) in prob.blocks.iter().zip(&chols) {
                let l = ch.l();
                let ws: Vec<(usize, DMatrix<f64>)> = b
                    .dirs
                    .iter()
                    .map(|(i, d)| {
                        let y = l.solve_lower_triangular(d).expect("nonsingular factor");
                        let w = l
                            .solve_lower_triangular(&y.transpose())
                            .expect("nonsingular factor");
                        (*i, w)
                    })
                    .collect();
                for (i, w) in &ws {
                    grad[*i] -= w.trace();
                }
                for (a, (i, wi)) in ws.iter().enumerate() {
                    for (j, wj) in ws.iter().skip(a) {
                        let v = wi.dot(wj);
                        hess[(*i, *j)] += v;
                        if i != j {
                            hess[(*j, *i)] += v;
                        }
                    }
                }
            }

            // KKT system for the trace-budget hyperplane
            let mut kkt = DMatrix::zeros(nz + 1, nz + 1);
            kkt.view_mut((0, 0), (nz, nz)).copy_from(&hess);
            for i in 0..prob.n_scalars {
                if prob.budget_mask[i] {
                    kkt[(i, nz)] = 1.0;
                    kkt[(nz, i)] = 1.0;
                }
            }
            let mut rhs = DVector::zeros(nz + 1);
            for i in 0..nz {
                rhs[i] = -grad[i];
            }
            let mut step: Option<DVector<f64>> = None;
            let mut ridge = 0.0;
            for _ in 0..4 {
                let mut sys = kkt.clone();
                if ridge > 0.0 {
                    for i in 0..nz {
                        sys[(i, i)] += ridge;
                    }
                }
                if let Some(sol) = sys.lu().solve(&rhs) {
                    if sol.iter().all(|x| x.is_finite()) {
                        step = Some(sol.rows(0, nz).clone_owned());
                        break;
                    }
                }
                let trace_avg = (0..nz).map(|i| hess[(i, i)].abs()).sum::<f64>() / nz as f64;
                ridge = if ridge == 0.0 {
                    1e-12 * (1.0 + trace_avg)
                } else {
                    ridge * 1e3
                };
            }
            let step = match step {
                Some(s) => s,
                None => {
                    stalled = true;
                    break 'outer;
                }
            };

            let slope = grad.dot(&step);
            let decrement2 = -slope;
            if !decrement2.is_finite() {
                stalled = true;
                break 'outer;
            }
            if decrement2 * 0.5 <= 1e-9 {
                break;
            }

            // backtracking: stay factorizable, then Armijo on the barrier
            let mut alpha = 1.0_f64;
            let mut accepted = false;
            for _ in 0..60 {
                let cand = &z + &step * alpha;
                if let Some(chols) = prob.factorize(&cand) {
                    let f1 = prob.objective(&cand, mu, &chols);
                    if f1.is_finite() && f1 <= f0 + 0.25 * alpha * slope {
                        z = cand;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            iterations += 1;
            inner += 1;
            if !accepted {
                stalled = true;
                break 'outer;
            }
            if inner >= 50 {
                break;
            }
        }

        if m_total * mu <= opts.duality_gap_tol {
            converged = true;
            break;
        }
        mu /= 20.0;
    }

    let margin = z[prob.n_scalars];
    let assignment = prob.unpack(&z);
    if converged {
        if margin > opts.feas_tol && verify_certificate(lmi, &assignment, 1e-12)? {
            Ok(FeasibilityResult {
                feasible: true,
                margin,
                iterations,
                certificate: Some(assignment),
                status: SolveStatus::MarginPositive,
            })
        } else if margin > opts.feas_tol {
            // solver and verifier disagree; never report feasible
            Ok(FeasibilityResult {
                feasible: false,
                margin,
                iterations,
                certificate: Some(assignment),
                status: SolveStatus::NumericalFailure,
            })
        } else {
            Ok(FeasibilityResult {
                feasible: false,
                margin,
                iterations,
                certificate: Some(assignment),
                status: SolveStatus::MarginNonpositive,
            })
        }
    } else {
        let status = if stalled {
            SolveStatus::NumericalFailure
        } else {
            SolveStatus::MaxIterations
        };
        Ok(FeasibilityResult {
            feasible: false,
            margin,
            iterations,
            certificate: None,
            status,
        })
    }
}
