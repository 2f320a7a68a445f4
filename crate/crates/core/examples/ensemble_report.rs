//! A small dual-CUE ensemble for qubits: classification fractions, the
//! e_p histogram at each checkpoint, and JSON/CSV export.

use duforge::ensemble::{run_ensemble, EnsembleConfig};
use duforge::MapKind;

fn main() -> duforge::Result<()> {
    let mut cfg = EnsembleConfig::new(2, 400, MapKind::Realign, 100);
    cfg.histogram_bins = 12;
    let report = run_ensemble(&cfg)?;

    for (label, f) in &report.fractions {
        println!("{:<12} {f:.3}", label.as_str());
    }
    println!("decay fits: {:?}", report.decay);
    for cp in &report.histograms {
        let bars: String = cp
            .ep
            .counts
            .iter()
            .map(|&c| match c * 40 / cfg.n_seeds {
                0 => ' ',
                1..=2 => '.',
                3..=6 => ':',
                _ => '#',
            })
            .collect();
        println!("n = {:>3}  e_p |{bars}|  near max E: {:.2}", cp.n, cp.near_max_fraction);
    }

    let dir = std::env::temp_dir().join("duforge-ensemble");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("report.json"), report.to_json()?)?;
    std::fs::write(dir.join("histograms.csv"), report.histograms_csv())?;
    println!("wrote {} in {:.2}s", dir.display(), report.wall_time);
    Ok(())
}
