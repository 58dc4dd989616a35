//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ltc_forge::pipeline::PipelineOptions;
use ltc_forge::verify::{criterion_name, run_criterion, CRITERIA};

fn limit(id: usize) -> Duration {
    let secs = match id {
        2 => 60,
        3 | 5 => 5,
        6 => 120,
        13 => 600,
        7 | 10 | 11 | 12 => 60,
        _ => 1,
    };
    Duration::from_secs(secs)
}

fn determinism() -> (bool, String) {
    let bin = env!("CARGO_BIN_EXE_ltc-forge");
    let dir = std::env::temp_dir().join(format!("ltc-forge-acceptance-{}", std::process::id()));
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return (false, format!("temp dir: {e}"));
    }
    let manifest = dir.join("verify.manifest.json");
    let first = Command::new(bin).args(["verify", "all", "--manifest"]).arg(&manifest).output();
    let replays: Vec<_> = (0..2).map(|_| Command::new(bin).arg("replay").arg(&manifest).output()).collect();
    let _ = std::fs::remove_dir_all(&dir);
    let first = match first {
        Ok(o) => o,
        Err(e) => return (false, format!("spawn: {e}")),
    };
    let mut outputs = vec![first];
    for r in replays {
        match r {
            Ok(o) => outputs.push(o),
            Err(e) => return (false, format!("spawn: {e}")),
        }
    }
    let codes: Vec<_> = outputs.iter().map(|o| o.status.code()).collect();
    let identical = outputs.windows(2).all(|w| w[0].stdout == w[1].stdout);
    let ok = identical && codes.iter().all(|c| *c == Some(0)) && !outputs[0].stdout.is_empty();
    (ok, format!("{} runs, {} bytes each, identical={identical}, exit codes {codes:?}", outputs.len(), outputs[0].stdout.len()))
}

fn main() -> ExitCode {
    let opts = PipelineOptions::default();
    let mut failures = 0;
    for id in 1..=CRITERIA {
        let start = Instant::now();
        let r = run_criterion(id, &opts);
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit(id);
        let ok = r.passed && in_time;
        if !ok {
            failures += 1;
        }
        println!(
            "{} criterion {id:>2} {}: {} [{:.2?}{}]",
            if ok { "PASS" } else { "FAIL" },
            criterion_name(id),
            r.detail,
            elapsed,
            if in_time { "" } else { ", over time limit" }
        );
    }
    let start = Instant::now();
    let (ok, detail) = determinism();
    if !ok {
        failures += 1;
    }
    println!("{} criterion 14 determinism: {detail} [{:.2?}]", if ok { "PASS" } else { "FAIL" }, start.elapsed());
    println!("{} of {} criteria passed", CRITERIA + 1 - failures, CRITERIA + 1);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
