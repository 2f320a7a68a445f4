//! Two-qubit gates in the Weyl chamber. M_R drives a random gate to the
//! edge c1 = c2 = π/4 (the dual-unitary line); M_TR cannot go further since
//! no 2-unitary exists for qubits.

use std::f64::consts::FRAC_PI_4;

use duforge::cartan::{canonical_gate, cartan_coords, chamber_trajectory, CartanCoords};
use duforge::gates::named_gate;
use duforge::measures::entangling_power;
use duforge::{cue_sample, BipartiteUnitary, MapKind, RngSeed};

fn main() {
    for name in ["identity", "cnot", "dcnot", "swap"] {
        let c = cartan_coords(&named_gate(name, 2).unwrap().gate).unwrap();
        println!("{name:<8} ({:.4}, {:.4}, {:.4})", c.c1, c.c2, c.c3);
    }

    let u = BipartiteUnitary::new(cue_sample(4, RngSeed::new(9, 0))).unwrap();
    println!("\nM_R trajectory of a CUE seed (c1, c2, c3):");
    for (n, c) in chamber_trajectory(&u, MapKind::Realign, 60).unwrap().iter().enumerate().step_by(6) {
        println!("{n:>3}  {:.6} {:.6} {:.6}", c.c1, c.c2, c.c3);
    }

    println!("\ne_p along the dual edge (π/4, π/4, c3):");
    for k in 0..=4 {
        let c3 = FRAC_PI_4 * k as f64 / 4.0;
        let ep = entangling_power(&canonical_gate(&CartanCoords::new(FRAC_PI_4, FRAC_PI_4, c3)));
        println!("c3 = {c3:.4}  e_p = {ep:.6}");
    }
}
