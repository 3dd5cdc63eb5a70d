//! Pairing census and the ladder/crossing/nesting dichotomy.

use fermikin::graphs::{classify, double_factorial_odd, enumerate, verify_dichotomy, ContractionGraph};

fn main() -> fermikin::Result<()> {
    for nbar in 1..=6 {
        let count = enumerate(nbar, nbar)?.count();
        println!("n = ñ = {nbar}: {count} pairings, (2n̄-1)!! = {}", double_factorial_odd(2 * nbar - 1));
    }

    let g = ContractionGraph::parse(2, 2, "1-4,2-3")?;
    println!("{g}: {:?}", classify(&g));
    println!("mirror {}", g.mirror());

    let report = verify_dichotomy(4)?;
    for s in &report.splits {
        println!(
            "n = {}, ñ = {}: {} graphs, {} decorated ladders, {} crossing, {} nesting",
            s.n, s.ntilde, s.total, s.decorated_ladder, s.crossing, s.nesting
        );
    }
    println!("violations: {}", report.total_violations());
    Ok(())
}
