//! Haar-random two-qudit gates: the mean operator entanglement against
//! (d²−1)/(d²+1), and the closed-form entangling power against a Monte
//! Carlo average over random product states.

use duforge::measures::{entangling_power, entangling_power_mc, op_entanglement};
use duforge::{cue_sample, BipartiteUnitary, RngSeed};

fn main() {
    for d in 2..=4 {
        let n = 2000;
        let mean: f64 = (0..n)
            .map(|k| {
                let u = BipartiteUnitary::new(cue_sample(d * d, RngSeed::new(11, k))).unwrap();
                op_entanglement(&u)
            })
            .sum::<f64>()
            / n as f64;
        let d2 = (d * d) as f64;
        println!("d = {d}: <E(U)> = {mean:.4} over {n} samples, expected {:.4}", (d2 - 1.0) / (d2 + 1.0));
    }

    let u = BipartiteUnitary::new(cue_sample(9, RngSeed::new(12, 0))).unwrap();
    let mut rng = RngSeed::new(12, 1).rng();
    let mc = entangling_power_mc(&u, 100_000, &mut rng).unwrap();
    println!(
        "\ne_p closed form {:.5}, Monte Carlo {:.5} ± {:.5}",
        entangling_power(&u),
        mc.mean,
        mc.std_err
    );
}
