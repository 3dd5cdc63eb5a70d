//! Configuration-driven runs: parse, execute, read the outputs back.

use fermikin::experiment::{compare, parse_config_str, read_field_csv, run};
use fermikin::micro::TestFunction;

const CONFIG: &str = "
experiment = micro
seed = 11

[grid]
L = 6

[micro]
eta = 0.5
lambda = 0.1
T = 0.25
samples = 4

[initial]
kind = cosine_bump
";

fn main() -> fermikin::Result<()> {
    let dir = std::env::temp_dir().join(format!("fermikin-example-{}", std::process::id()));
    let cfg = parse_config_str(CONFIG)?;
    let outcome = run(&cfg, Some(CONFIG), &dir)?;
    println!("status {} in {:.2} s, files {:?}", outcome.manifest.status, outcome.manifest.wall_clock_s, outcome.manifest.outputs);

    let mu = read_field_csv(&dir.join("occupation_0.csv"))?;
    println!("mass {:.12}", mu.mean());
    let report = compare(
        &dir.join("occupation_0.csv"),
        &dir.join("initial.csv"),
        TestFunction::One,
        TestFunction::Cos(0),
        Some(&dir.join("occupation_se_0.csv")),
    )?;
    println!("drift of <cos p1> from the initial state: {:.3e} ± {:.1e}", report.weak_error, report.weak_error_se);
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
