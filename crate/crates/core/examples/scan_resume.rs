//! A chunked scan that stops halfway and resumes from its checkpoint token.
//!
//! cargo run --example scan_resume

use unitfrac::scan::{run_scan, Checkpoint, ErdosNivenParams, ErdosNivenScan, RecordType};

fn main() -> unitfrac::Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .expect("thread pool");
    let params = ErdosNivenParams { n: 60, chunk: 10 };

    let mut full = Vec::new();
    let mut token = None;
    run_scan(&mut ErdosNivenScan::new(params.clone())?, None, &pool, &mut |r| {
        if r.record == RecordType::Checkpoint && r.payload["cursor"] == 30 {
            token = r.payload["token"].as_str().map(String::from);
        }
        full.push(serde_json::to_string(r).expect("record serializes"));
        Ok(())
    })?;
    let token = token.expect("a checkpoint at cursor 30");
    println!("token: {token}");

    let start = Checkpoint::from_token(&token)?;
    let mut resumed = Vec::new();
    let summary = run_scan(&mut ErdosNivenScan::new(params)?, Some(&start), &pool, &mut |r| {
        resumed.push(serde_json::to_string(r).expect("record serializes"));
        Ok(())
    })?;
    assert!(full.ends_with(&resumed));
    println!(
        "resumed {} of {} records, counters {:?}",
        resumed.len(),
        full.len(),
        summary.counters
    );
    Ok(())
}
