//! The extreme clipped-gradient vector and the two ways of summing moments
//! over it. Exact summation is linear in the dimension; bucketed summation
//! stays cheap at a hundred million coordinates.

use std::time::Instant;

use lap2::config::SummationMode;
use lap2::lap2::{sum_over_set, MajorizationSet};

fn main() -> lap2::error::Result<()> {
    let set = MajorizationSet::new(1.0, 8)?;
    let head: Vec<String> = set.iter().map(|x| format!("{x:.4}")).collect();
    println!("n = 8 set: [{}], squared norm {:.12}", head.join(", "), set.iter().map(|x| x * x).sum::<f64>());

    let orders = [1, 8, 64, 512];
    for n in [64u64, 1024, 16_384] {
        let set = MajorizationSet::new(1.0, n)?;
        let exact = sum_over_set(0.01, &set, 1.0, &orders, SummationMode::Exact)?;
        let bucketed = sum_over_set(0.01, &set, 1.0, &orders, SummationMode::Bucketed)?;
        for (i, l) in orders.iter().enumerate() {
            let (e, b) = (exact.alphas[i], bucketed.alphas[i]);
            println!("n={n:<6} lambda={l:<4} exact {e:.6e} bucketed {b:.6e} (+{:.3}%)", 100.0 * (b - e) / e);
        }
    }

    let big = MajorizationSet::new(1.0, 125_000_000)?;
    let lambdas: Vec<u32> = (1..=4096).collect();
    let t = Instant::now();
    let p = sum_over_set(0.001, &big, 1.0, &lambdas, SummationMode::Bucketed)?;
    println!(
        "n = 1.25e8: {} buckets, alpha(4096) = {:.6e}, {:.2?}",
        p.buckets,
        p.alphas[4095],
        t.elapsed()
    );
    Ok(())
}
