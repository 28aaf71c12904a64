//! Runs the property suite, then reruns it against a model whose big-M
//! constants are halved.
//!
//! `cargo run --release --example property_suite -- [full] [junit.xml]`

use agv_sched::suite::{run_suite, run_suite_with, Faults, Level};
use num_rational::Rational64;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let level = if args.iter().any(|a| a == "full") { Level::Full } else { Level::Quick };
    let report = run_suite(level);
    println!("clean:  {}", report.summary());
    for c in report.failures() {
        println!("  FAIL {}: {}", c.spec.label(), c.detail);
    }
    if let Some(path) = args.iter().find(|a| a.ends_with(".xml")) {
        std::fs::write(path, report.to_junit_xml()).unwrap();
        println!("junit report written to {path}");
    }

    let faulty = run_suite_with(level, &Faults { big_m_scale: Rational64::new(1, 2) });
    println!("halved big-M: {}", faulty.summary());
    let names: Vec<&str> = faulty.failed_properties().iter().map(|p| p.name()).collect();
    println!("  properties that caught it: {}", names.join(", "));
}
