//! Small end-to-end tour: certify one delay, sweep a delay range, and
//! cross-check the result against the exact lifted reference.
//!
//!   cargo run --release -p delay-stability --example certify_demo

use delay_stability::{benchmarks, lmi, sdp, stability};

fn main() -> delay_stability::Result<()> {
    let opts = sdp::SolverOptions::default();
    let spec = lmi::LmiSpec::standard(1, 1)?;

    let sys = benchmarks::example1(42)?;
    let problem = lmi::assemble(&sys, &spec)?;
    let result = sdp::solve_feasibility(&problem, &opts)?;
    println!(
        "tau = 42, m = 1, nu1 = 1: feasible = {}, margin = {:.3e}, {} iterations",
        result.feasible, result.margin, result.iterations
    );

    let range = stability::max_delay(&sys, &spec, 50..=60, &opts)?;
    println!(
        "sweep 50..=60: certifiable up to tau = {:?} with {} decision variables",
        range.tau_max_feasible,
        stability::nodv(sys.n_x(), spec.nu1(), spec.m())
    );

    let lifted = stability::lifting_scan(&sys, 60)?;
    println!(
        "lifted reference: stable exactly for tau in [{:?}, {:?}]",
        lifted.tau_min_stable, lifted.tau_max_stable
    );
    Ok(())
}
