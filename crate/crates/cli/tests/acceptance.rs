//! Acceptance criteria 1-9, one PASS/FAIL line each.
//!
//! QMLAB_CRITERIA=1,2,9 restricts the run; QMLAB_SEED changes the seed.

use qmlab_cli::suite::run_criterion;

fn main() {
    let ids: Vec<u32> = match std::env::var("QMLAB_CRITERIA") {
        Ok(s) => s.split(',').filter_map(|x| x.trim().parse().ok()).collect(),
        Err(_) => (1..=9).collect(),
    };
    let seed = std::env::var("QMLAB_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(3);
    let mut failed = 0;
    for id in ids {
        let r = run_criterion(id, seed);
        println!("{}", r.line());
        failed += !r.pass as usize;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
