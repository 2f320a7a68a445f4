//! M_TR (realign then partial transpose, then project) turns most d = 3
//! CUE seeds into 2-unitaries. Each hit is checked through its four-party
//! state: every bipartition is maximally entangled.

use duforge::measures::max_op_entanglement;
use duforge::tensor::{ame_state, bipartition_entropies};
use duforge::{cue_sample, iterate, BipartiteUnitary, GateLabel, IterateOptions, MapKind, RngSeed};

fn main() {
    let d = 3;
    let seeds = 40;
    let mut hits = 0;
    for k in 0..seeds {
        let u = BipartiteUnitary::new(cue_sample(d * d, RngSeed::new(5, k))).unwrap();
        let opts = IterateOptions::new(2000, 1e-13).record_every(2000);
        let trace = iterate(&u, MapKind::TransposeRealign, &opts).unwrap();
        let last = trace.last();
        if last.class != GateLabel::TwoUnitary {
            println!("seed {k:>2}: {} after {} steps, e_p = {:.6}", last.class, trace.iterations, last.ep);
            continue;
        }
        hits += 1;
        let s = bipartition_entropies(&ame_state(&trace.final_operator)).unwrap();
        let worst = s.as_array().iter().map(|e| (e - max_op_entanglement(d)).abs()).fold(0.0, f64::max);
        println!("seed {k:>2}: two_unitary after {:>4} steps, AME deviation {worst:.1e}", trace.iterations);
    }
    println!("\n{hits} of {seeds} seeds reached a 2-unitary");
}
