use nclp::acceptance;

fn main() {
    let seed = std::env::var("NCLP_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0);
    let ids: Vec<usize> = match std::env::args().skip(1).find(|a| !a.starts_with('-')) {
        Some(filter) => filter.split(',').filter_map(|s| s.trim().parse().ok()).collect(),
        None => (1..=acceptance::TITLES.len()).collect(),
    };
    let start = std::time::Instant::now();
    let outcomes = acceptance::run_all(&ids, seed);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "acceptance: {} of {} criteria passed in {:.1} s (seed {seed})",
        outcomes.len() - failed,
        outcomes.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
