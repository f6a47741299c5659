//! Top-level stability analyses: single-delay certification, maximum-delay
//! scans, the exact delay-free lifting check, and the empirical hierarchy
//! table over (multiplicity, degree) choices.

use std::ops::RangeInclusive;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lmi::{self, LmiSpec, SystemModel};
use crate::parallel::maybe_par_map;
use crate::sdp::{self, FeasibilityResult, SolverOptions};

/// Result of scanning delays for one (system, spec) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayRange {
    /// Smallest certified delay in the scan, if any.
    pub tau_min_feasible: Option<usize>,
    /// Largest certified delay in the scan, if any.
    pub tau_max_feasible: Option<usize>,
    /// `(tau, margin, feasible)` for every admissible scanned delay,
    /// ascending. Delays too short for the requested degree are omitted.
    pub margins: Vec<(usize, f64, bool)>,
}

/// Certifies asymptotic stability of `sys` at its configured delay using the
/// LMI condition for `spec`.
pub fn certify(
    sys: &SystemModel,
    spec: &LmiSpec,
    opts: &SolverOptions,
) -> Result<FeasibilityResult> {
    let problem = lmi::assemble(sys, spec)?;
    sdp::solve_feasibility(&problem, opts)
}

/// Scans `taus` ascending, certifying each admissible delay independently.
/// No monotonicity of feasibility in the delay is assumed; systems exist
/// whose certified delays form an interior interval.
pub fn max_delay(
    sys: &SystemModel,
    spec: &LmiSpec,
    taus: RangeInclusive<usize>,
    opts: &SolverOptions,
) -> Result<DelayRange> {
    let (lo, hi) = (*taus.start(), *taus.end());
    if lo > hi {
        return Err(Error::invalid("empty delay scan range"));
    }
    if lo == 0 {
        return Err(Error::invalid("delay scan must start at tau >= 1"));
    }
    let admissible: Vec<usize> = (lo..=hi).filter(|&tau| spec.nu1() + 1 <= tau).collect();
    let results = maybe_par_map(admissible, |tau| -> Result<(usize, f64, bool)> {
        let sys_tau = sys.with_tau(tau)?;
        let r = certify(&sys_tau, spec, opts)?;
        Ok((tau, r.margin, r.feasible))
    });
    let mut margins = Vec::with_capacity(results.len());
    for r in results {
        margins.push(r?);
    }
    let feasible_taus: Vec<usize> = margins
        .iter()
        .filter(|(_, _, f)| *f)
        .map(|(t, _, _)| *t)
        .collect();
    Ok(DelayRange {
        tau_min_feasible: feasible_taus.first().copied(),
        tau_max_feasible: feasible_taus.last().copied(),
        margins,
    })
}

/// One `(multiplicity, degree)` cell of the hierarchy table.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyCell {
    pub l: usize,
    pub nu1: usize,
    pub range: DelayRange,
}

/// Certified-delay table over multiplicities `1..=l_max` and degrees
/// `0..=nu_max`, with empirical monotonicity validation.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyTable {
    pub l_max: usize,
    pub nu_max: usize,
    /// Cells in (l, nu1) lexicographic order; a cell exists iff
    /// `l - 1 <= nu1` (the descending degree ladder must fit).
    pub cells: Vec<HierarchyCell>,
    /// Human-readable descriptions of monotonicity violations. An empty
    /// list is the expected outcome; anything here is a hard failure for
    /// the caller to surface.
    pub violations: Vec<String>,
}

impl HierarchyTable {
    pub fn cell(&self, l: usize, nu1: usize) -> Option<&HierarchyCell> {
        self.cells.iter().find(|c| c.l == l && c.nu1 == nu1)
    }
}

/// Fills every admissible `(l, nu1)` cell by scanning `taus`, then checks
/// that the certified maximum delay never decreases when the degree grows
/// (left to right) or the multiplicity grows (top to bottom).
pub fn hierarchy_table(
    sys: &SystemModel,
    l_max: usize,
    nu_max: usize,
    taus: RangeInclusive<usize>,
    opts: &SolverOptions,
) -> Result<HierarchyTable> {
    if l_max == 0 {
        return Err(Error::invalid("l_max must be >= 1"));
    }
    let mut coords = Vec::new();
    for l in 1..=l_max {
        for nu1 in 0..=nu_max {
            if l <= nu1 + 1 {
                coords.push((l, nu1));
            }
        }
    }
    let results = maybe_par_map(coords, |(l, nu1)| -> Result<HierarchyCell> {
        let spec = LmiSpec::standard(l, nu1)?;
        let range = max_delay(sys, &spec, taus.clone(), opts)?;
        Ok(HierarchyCell { l, nu1, range })
    });
    let mut cells = Vec::with_capacity(results.len());
    for r in results {
        cells.push(r?);
    }

    let mut violations = Vec::new();
    let lookup = |l: usize, nu1: usize| -> Option<&HierarchyCell> {
        cells.iter().find(|c| c.l == l && c.nu1 == nu1)
    };
    let as_step = |c: &HierarchyCell| c.range.tau_max_feasible;
    for c in &cells {
        if let Some(right) = lookup(c.l, c.nu1 + 1) {
            if let (Some(a), b) = (as_step(c), as_step(right)) {
                if b.map_or(true, |b| b < a) {
                    violations.push(format!(
                        "row l={}: tau_max drops from {} at nu1={} to {:?} at nu1={}",
                        c.l,
                        a,
                        c.nu1,
                        b,
                        c.nu1 + 1
                    ));
                }
            }
        }
        if let Some(down) = lookup(c.l + 1, c.nu1) {
            if let (Some(a), b) = (as_step(c), as_step(down)) {
                if b.map_or(true, |b| b < a) {
                    violations.push(format!(
                        "column nu1={}: tau_max drops from {} at l={} to {:?} at l={}",
                        c.nu1,
                        a,
                        c.l,
                        b,
                        c.l + 1
                    ));
                }
            }
        }
    }

    Ok(HierarchyTable {
        l_max,
        nu_max,
        cells,
        violations,
    })
}

/// The delay-free companion matrix of dimension `(tau + 1) n_x`: top block
/// row `[A, 0, ..., 0, A_d]`, identity blocks on the subdiagonal.
pub fn lifted_companion(sys: &SystemModel) -> DMatrix<f64> {
    let nx = sys.n_x();
    let tau = sys.tau();
    let dim = (tau + 1) * nx;
    let mut c = DMatrix::zeros(dim, dim);
    c.view_mut((0, 0), (nx, nx)).copy_from(sys.a());
    c.view_mut((0, tau * nx), (nx, nx)).copy_from(sys.a_d());
    for i in 1..=tau {
        c.view_mut((i * nx, (i - 1) * nx), (nx, nx))
            .copy_from(&DMatrix::identity(nx, nx));
    }
    c
}

fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Exact stability test by lifting to the delay-free companion form:
/// true iff the spectral radius is below `1 - 1e-10`.
pub fn lifting_oracle(sys: &SystemModel) -> bool {
    spectral_radius(&lifted_companion(sys)) < 1.0 - 1e-10
}

/// Stability map over `0..=tau_hi` from the exact lifting; `tau = 0` is the
/// ordinary system `x(t+1) = (A + A_d) x(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedRange {
    /// `(tau, stable)` for each scanned delay, ascending from zero.
    pub stable: Vec<(usize, bool)>,
    pub tau_min_stable: Option<usize>,
    pub tau_max_stable: Option<usize>,
}

pub fn lifting_scan(sys: &SystemModel, tau_hi: usize) -> Result<LiftedRange> {
    let taus: Vec<usize> = (0..=tau_hi).collect();
    let stable = maybe_par_map(taus, |tau| {
        let ok = if tau == 0 {
            spectral_radius(&(sys.a() + sys.a_d())) < 1.0 - 1e-10
        } else {
            lifting_oracle(&sys.with_tau(tau).expect("tau >= 1"))
        };
        (tau, ok)
    });
    let stable_taus: Vec<usize> = stable
        .iter()
        .filter(|(_, s)| *s)
        .map(|(t, _)| *t)
        .collect();
    Ok(LiftedRange {
        stable,
        tau_min_stable: stable_taus.first().copied(),
        tau_max_stable: stable_taus.last().copied(),
    })
}

/// Scalar decision-variable count of the LMI condition: one symmetric block
/// of size `n_x (nu1 + 1)` plus `m + 1` symmetric blocks of size `n_x`.
pub fn nodv(n_x: usize, nu1: usize, m: usize) -> usize {
    let s = |n: usize| n * (n + 1) / 2;
    s(n_x * (nu1 + 1)) + (m + 1) * s(n_x)
}

/// Scalar decision-variable count of a Lyapunov test on the lifted
/// companion form.
pub fn nodv_lifting(n_x: usize, tau: usize) -> usize {
    let n = (tau + 1) * n_x;
    n * (n + 1) / 2
}
