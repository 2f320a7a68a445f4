//! Permutation 2-unitaries from orthogonal Latin squares over finite fields,
//! and the perfect-tensor property of their four-party states.

use duforge::gates::{mols_pair, ols_permutation};
use duforge::measures::entangling_power;
use duforge::tensor::{ame_state, bipartition_entropies};

fn main() {
    let (a, b) = mols_pair(4).unwrap();
    println!("orthogonal Latin squares of order 4:");
    for i in 0..4 {
        let left: Vec<String> = (0..4).map(|j| a.get(i, j).to_string()).collect();
        let right: Vec<String> = (0..4).map(|j| b.get(i, j).to_string()).collect();
        println!("  {}    {}", left.join(" "), right.join(" "));
    }

    for d in 2..=9 {
        match ols_permutation(d) {
            Ok(g) => {
                let s = bipartition_entropies(&ame_state(&g.gate)).unwrap();
                println!(
                    "d = {d}: e_p = {:.6} (max {:.6}), entropies {:?}",
                    entangling_power(&g.gate),
                    (d as f64 - 1.0) / (d as f64 + 1.0),
                    s.as_array()
                );
            }
            Err(e) => println!("d = {d}: {e}"),
        }
    }
}
