//! Acceptance checks. Each criterion runs in isolation and prints one
//! PASS/FAIL line; the process exits non-zero when any criterion fails.
//!
//! Run a subset with `cargo test --test acceptance -- 3 7`.

mod c01_syvc;
mod c02_dependences;
mod c03_slices;
mod c04_running_example;
mod c05_encoding;
mod c06_gradients;
mod c07_learning;
mod c08_end_to_end;
mod c09_metrics;
mod c10_labeling;

use std::panic;
use std::path::PathBuf;
use std::time::{Duration, Instant};

pub type Outcome = Result<String, String>;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn within(limit: Duration, elapsed: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {:.1}s, limit {:.0}s", elapsed.as_secs_f64(), limit.as_secs_f64()))
    }
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: &[Criterion] = &[
    (1, "syntax candidates match node x kind enumeration", c01_syvc::run),
    (2, "control and data dependences match path oracles", c02_dependences::run),
    (3, "slices match closure and inline oracles", c03_slices::run),
    (4, "running example ordering and coverage", c04_running_example::run),
    (5, "encoding laws", c05_encoding::run),
    (6, "gradients match finite differences", c06_gradients::run),
    (7, "learning sanity on a separable set", c07_learning::run),
    (8, "end-to-end mini-corpus run", c08_end_to_end::run),
    (9, "metrics", c09_metrics::run),
    (10, "diff labeling", c10_labeling::run),
];

fn main() {
    let filters: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let listing = std::env::args().any(|a| a == "--list");
    if listing {
        for (n, name, _) in CRITERIA {
            println!("criterion_{n:02}: test  ({name})");
        }
        return;
    }
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for &(n, name, check) in CRITERIA {
        if !filters.is_empty() && !filters.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panic: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {n:>2} {name} ({secs:.2}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {n:>2} {name} ({secs:.2}s): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
