//! The realignment map M_R from one CUE seed: the trace norm of U^R never
//! decreases, D_n² = 2d² − 2‖U^R‖₁ shrinks, and the gap to maximal operator
//! entanglement decays. Pass `d` as the first argument (default 3).

use duforge::maps::fit_decay;
use duforge::{cue_sample, iterate, BipartiteUnitary, IterateOptions, MapKind, RngSeed};

fn main() {
    let d: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let u = BipartiteUnitary::new(cue_sample(d * d, RngSeed::new(2024, 0))).unwrap();
    let opts = IterateOptions::new(2000, 1e-13);
    let trace = iterate(&u, MapKind::Realign, &opts).unwrap();

    println!("{:>5} {:>12} {:>12} {:>12}  class", "n", "‖U^R‖₁", "D_n²", "E gap");
    let every = (trace.steps.len() / 20).max(1);
    for s in trace.steps.iter().step_by(every).chain(std::iter::once(trace.last())) {
        println!("{:>5} {:>12.8} {:>12.3e} {:>12.3e}  {}", s.n, s.trace_norm, s.d_n_sq(), s.gap_u, s.class);
    }
    println!(
        "\nstopped: {} after {} steps, {} monotonicity violations",
        trace.stop_reason, trace.iterations, trace.monotonicity_violations
    );
    match fit_decay(&trace) {
        Ok(fit) => println!(
            "decay: {:?}, rate/exponent {:.4}, R² {:.4}",
            fit.model, fit.rate_or_exponent, fit.goodness
        ),
        Err(e) => println!("decay fit unavailable: {e}"),
    }
}
