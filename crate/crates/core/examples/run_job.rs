//! Running a job document in-process, as the `ncq` binary does.

use ncq::jobs::{execute, JobKind};
use serde_json::json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let doc = json!({
        "target": "class custom; gen a adj a*; rule a a* -> a* a - 1",
        "pins": [{"expression": "a* a", "value": 0}],
        "degree": 1
    });
    let run = execute(&doc, JobKind::Pcp, std::path::Path::new("."))?;
    println!("{}", run.summary);
    println!("{}", run.report.to_json());
    Ok(())
}
