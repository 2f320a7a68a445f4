//! Operator entanglement, entangling power and class of the built-in gates.
//!
//! Run with `cargo run --example reference_gates`.

use duforge::gates::{named_gate, GATE_NAMES};
use duforge::measures::{max_entangling_power, measure, schmidt_spectrum};

fn main() {
    println!("{:<9} {:>2} {:>9} {:>9} {:>9} {:>7}  class", "gate", "d", "E(U)", "E(US)", "e_p", "ratio");
    for name in GATE_NAMES {
        for d in 2..=5 {
            let Ok(g) = named_gate(name, d) else { continue };
            let m = measure(&g.gate);
            println!(
                "{:<9} {:>2} {:>9.6} {:>9.6} {:>9.6} {:>7.4}  {}",
                name,
                d,
                m.e_u,
                m.e_us,
                m.ep,
                m.ep / max_entangling_power(d),
                m.classify(1e-10).label
            );
        }
    }

    let cnot = named_gate("cnot", 2).unwrap().gate;
    let spectrum = schmidt_spectrum(&cnot);
    println!("\noperator Schmidt values of CNOT: {:?}", spectrum.values);
}
