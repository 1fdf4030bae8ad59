//! Chunked, resumable scans that stream newline-delimited records.
//!
//! A scan is split into numbered units processed in fixed-size chunks. After
//! each chunk a checkpoint record carries a token encoding the scan's kind,
//! parameters, the next unit, and the running counters. Resuming from a token
//! rebuilds any cross-unit state silently and then emits exactly the records
//! that followed that checkpoint in the original run.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::arith::{FinSet, Nat, PosRational};
use crate::coprime::{check_nu_lower_bound, is_pairwise_coprime, subsets_of_size};
use crate::error::{Error, Result};
use crate::primes::Sieve;
use crate::sylvester::{
    evaluate_case, integral_intervals_from, interval_sums_from, quadruples_from, sylvester_key_groups, Interval,
    KeyGroups, NonintegralityConfig, SumCase, SumFamily,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Violation,
    Truncated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordType {
    Finding,
    Checkpoint,
    Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub kind: String,
    pub record: RecordType,
    pub parameters: Value,
    pub status: Status,
    pub payload: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Finding {
    pub status: Status,
    pub payload: Value,
}

impl Finding {
    fn ok(payload: Value) -> Self {
        Finding {
            status: Status::Ok,
            payload,
        }
    }

    fn violation(payload: Value) -> Self {
        Finding {
            status: Status::Violation,
            payload,
        }
    }
}

pub type Counters = BTreeMap<String, u64>;

/// One chunk's output: findings in unit order and counter increments.
#[derive(Debug, Default)]
pub struct ChunkResult {
    pub findings: Vec<Finding>,
    pub counts: Vec<(&'static str, u64)>,
}

pub trait Scan: Send {
    fn kind(&self) -> &'static str;
    fn parameters(&self) -> Value;
    fn units(&self) -> u64;
    fn chunk(&self) -> u64;
    /// Rebuilds cross-unit state for `units` without producing output.
    fn replay(&mut self, _units: Range<u64>) {}
    fn run(&mut self, units: Range<u64>) -> Result<ChunkResult>;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub kind: String,
    pub parameters: Value,
    pub cursor: u64,
    pub counters: Counters,
}

impl Checkpoint {
    pub fn token(&self) -> String {
        let body = serde_json::to_vec(self).expect("checkpoint serializes");
        let sum = hex_prefix(&Sha256::digest(&body));
        format!("{}.{}", URL_SAFE_NO_PAD.encode(&body), sum)
    }

    pub fn from_token(token: &str) -> Result<Self> {
        let bad = |why: &str| Error::parse(format!("corrupt resume token: {why}"));
        let (body, sum) = token.trim().rsplit_once('.').ok_or_else(|| bad("missing checksum"))?;
        let body = URL_SAFE_NO_PAD.decode(body).map_err(|_| bad("not base64url"))?;
        if hex_prefix(&Sha256::digest(&body)) != sum {
            return Err(bad("checksum mismatch"));
        }
        serde_json::from_slice(&body).map_err(|_| bad("malformed payload"))
    }
}

fn hex_prefix(digest: &[u8]) -> String {
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScanSummary {
    pub counters: Counters,
    pub violations: u64,
    pub findings: u64,
}

/// Runs `scan` from `start` (or the beginning) on `pool`, handing every
/// record to `emit` in order.
pub fn run_scan(
    scan: &mut dyn Scan,
    start: Option<&Checkpoint>,
    pool: &rayon::ThreadPool,
    emit: &mut dyn FnMut(&ScanRecord) -> Result<()>,
) -> Result<ScanSummary> {
    let kind = scan.kind().to_string();
    let parameters = scan.parameters();
    let mut counters = Counters::new();
    let mut cursor = 0;
    if let Some(cp) = start {
        if cp.kind != kind || cp.parameters != parameters {
            return Err(Error::parse("resume token belongs to a different scan"));
        }
        if cp.cursor > scan.units() {
            return Err(Error::parse("resume token cursor beyond the scan"));
        }
        pool.install(|| scan.replay(0..cp.cursor));
        counters = cp.counters.clone();
        cursor = cp.cursor;
    }
    let violation_count = |c: &Counters| c.get("violations").copied().unwrap_or(0);
    let mut summary = ScanSummary::default();
    let total = scan.units();
    let step = scan.chunk().max(1);
    while cursor < total {
        let end = (cursor + step).min(total);
        let chunk = pool.install(|| scan.run(cursor..end))?;
        for (name, n) in chunk.counts {
            *counters.entry(name.to_string()).or_default() += n;
        }
        for f in chunk.findings {
            if f.status == Status::Violation {
                *counters.entry("violations".into()).or_default() += 1;
            }
            *counters.entry("findings".into()).or_default() += 1;
            summary.findings += 1;
            emit(&ScanRecord {
                kind: kind.clone(),
                record: RecordType::Finding,
                parameters: parameters.clone(),
                status: f.status,
                payload: f.payload,
            })?;
        }
        cursor = end;
        let cp = Checkpoint {
            kind: kind.clone(),
            parameters: parameters.clone(),
            cursor,
            counters: counters.clone(),
        };
        emit(&ScanRecord {
            kind: kind.clone(),
            record: RecordType::Checkpoint,
            parameters: parameters.clone(),
            status: Status::Ok,
            payload: json!({ "cursor": cursor, "units": total, "token": cp.token() }),
        })?;
    }
    summary.violations = violation_count(&counters);
    let status = if summary.violations > 0 {
        Status::Violation
    } else {
        Status::Ok
    };
    emit(&ScanRecord {
        kind,
        record: RecordType::Summary,
        parameters,
        status,
        payload: serde_json::to_value(&counters).expect("counters serialize"),
    })?;
    summary.counters = counters;
    Ok(summary)
}

/// Builds the scan a checkpoint belongs to.
pub fn scan_from_checkpoint(cp: &Checkpoint) -> Result<Box<dyn Scan>> {
    let p = cp.parameters.clone();
    let bad = |e: serde_json::Error| Error::parse(format!("resume token parameters: {e}"));
    Ok(match cp.kind.as_str() {
        "tk" => Box::new(TkScan::new(serde_json::from_value(p).map_err(bad)?)?),
        "erdos-niven" => Box::new(ErdosNivenScan::new(serde_json::from_value(p).map_err(bad)?)?),
        "quadruple" => Box::new(QuadrupleScan::new(serde_json::from_value(p).map_err(bad)?)?),
        "nu-collision" => Box::new(NuCollisionScan::new(serde_json::from_value(p).map_err(bad)?)?),
        "nonintegrality" => Box::new(NonintegralityScan::new(serde_json::from_value(p).map_err(bad)?)?),
        other => return Err(Error::parse(format!("unknown scan kind {other}"))),
    })
}

fn interval_json(iv: Interval) -> Value {
    json!({ "m": iv.m.to_string(), "n": iv.n.to_string() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TkParams {
    pub m_max: u64,
    pub n_max: u64,
    pub chunk: u64,
}

/// Integral reciprocal sums over intervals; one unit per starting point `m`.
pub struct TkScan {
    params: TkParams,
}

impl TkScan {
    pub fn new(params: TkParams) -> Result<Self> {
        if params.m_max == 0 || params.n_max == 0 {
            return Err(Error::domain("bounds must be positive"));
        }
        Ok(TkScan { params })
    }
}

impl Scan for TkScan {
    fn kind(&self) -> &'static str {
        "tk"
    }

    fn parameters(&self) -> Value {
        serde_json::to_value(&self.params).expect("serializes")
    }

    fn units(&self) -> u64 {
        self.params.m_max.min(self.params.n_max)
    }

    fn chunk(&self) -> u64 {
        self.params.chunk
    }

    fn run(&mut self, units: Range<u64>) -> Result<ChunkResult> {
        let n_max = self.params.n_max;
        let found: Vec<Vec<Interval>> = units
            .clone()
            .into_par_iter()
            .map(|u| integral_intervals_from(u + 1, n_max))
            .collect();
        let intervals = units.map(|u| n_max - u).sum();
        let findings: Vec<Finding> = found
            .into_iter()
            .flatten()
            .map(|iv| {
                let mut payload = interval_json(iv);
                payload["sigma"] = json!(crate::arith::sigma(&iv.to_finset()).expect("nonempty").to_string());
                if iv.m == 1 && iv.n == 1 {
                    Finding::ok(payload)
                } else {
                    Finding::violation(payload)
                }
            })
            .collect();
        let integral = findings.len() as u64;
        Ok(ChunkResult {
            findings,
            counts: vec![("intervals", intervals), ("integral", integral)],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErdosNivenParams {
    pub n: u64,
    pub chunk: u64,
}

/// Collisions among reciprocal sums of intervals inside `[1, n]`; one unit
/// per starting point. The table of values seen so far spans units.
pub struct ErdosNivenScan {
    params: ErdosNivenParams,
    seen: HashMap<PosRational, Interval>,
}

impl ErdosNivenScan {
    pub fn new(params: ErdosNivenParams) -> Result<Self> {
        if params.n == 0 {
            return Err(Error::domain("n must be positive"));
        }
        Ok(ErdosNivenScan {
            params,
            seen: HashMap::new(),
        })
    }

    fn rows(&self, units: Range<u64>) -> Vec<(u64, Vec<PosRational>)> {
        let n = self.params.n;
        units
            .into_par_iter()
            .map(|u| (u + 1, interval_sums_from(u + 1, n)))
            .collect()
    }

    fn absorb(&mut self, rows: Vec<(u64, Vec<PosRational>)>) -> Vec<Finding> {
        let mut out = Vec::new();
        for (m, row) in rows {
            for (j, value) in row.into_iter().enumerate() {
                let iv = Interval { m, n: m + j as u64 };
                if let Some(prev) = self.seen.get(&value) {
                    out.push(Finding::violation(json!({
                        "first": interval_json(*prev),
                        "second": interval_json(iv),
                        "sigma": value.to_string(),
                    })));
                } else {
                    self.seen.insert(value, iv);
                }
            }
        }
        out
    }
}

impl Scan for ErdosNivenScan {
    fn kind(&self) -> &'static str {
        "erdos-niven"
    }

    fn parameters(&self) -> Value {
        serde_json::to_value(&self.params).expect("serializes")
    }

    fn units(&self) -> u64 {
        self.params.n
    }

    fn chunk(&self) -> u64 {
        self.params.chunk
    }

    fn replay(&mut self, units: Range<u64>) {
        let step = self.params.chunk.max(1);
        let mut u = units.start;
        while u < units.end {
            let end = (u + step).min(units.end);
            let rows = self.rows(u..end);
            self.absorb(rows);
            u = end;
        }
    }

    fn run(&mut self, units: Range<u64>) -> Result<ChunkResult> {
        let rows = self.rows(units);
        let intervals = rows.iter().map(|(_, r)| r.len() as u64).sum();
        let before = self.seen.len() as u64;
        let findings = self.absorb(rows);
        let distinct = self.seen.len() as u64 - before;
        Ok(ChunkResult {
            findings,
            counts: vec![("intervals", intervals), ("distinct", distinct)],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrupleParams {
    pub bound: u64,
    pub chunk: u64,
}

/// Pairs of disjoint intervals `[m,n]`, `[m',n']` with `1 < m < n < m' < n'`
/// and equal sylvester powers; one unit per `m`.
pub struct QuadrupleScan {
    params: QuadrupleParams,
    groups: Option<KeyGroups>,
}

impl QuadrupleScan {
    pub fn new(params: QuadrupleParams) -> Result<Self> {
        if params.bound < 4 {
            return Err(Error::domain("bound must be at least 4"));
        }
        Ok(QuadrupleScan { params, groups: None })
    }
}

impl Scan for QuadrupleScan {
    fn kind(&self) -> &'static str {
        "quadruple"
    }

    fn parameters(&self) -> Value {
        serde_json::to_value(&self.params).expect("serializes")
    }

    fn units(&self) -> u64 {
        self.params.bound - 2
    }

    fn chunk(&self) -> u64 {
        self.params.chunk
    }

    fn run(&mut self, units: Range<u64>) -> Result<ChunkResult> {
        let bound = self.params.bound;
        let groups = self
            .groups
            .get_or_insert_with(|| sylvester_key_groups(bound, &Sieve::new(bound)));
        let intervals = units.clone().map(|u| bound - (u + 2)).sum();
        let findings = units
            .flat_map(|u| quadruples_from(u + 2, groups))
            .map(|q| {
                let payload = json!({
                    "first": interval_json(q.first),
                    "second": interval_json(q.second),
                    "powers": q.powers.iter().map(ToString::to_string).collect::<Vec<_>>(),
                });
                if q.violates {
                    Finding::violation(payload)
                } else {
                    Finding::ok(payload)
                }
            })
            .collect();
        Ok(ChunkResult {
            findings,
            counts: vec![("intervals", intervals)],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NuCollisionParams {
    pub pool: FinSet,
    pub size: usize,
    pub cap: u64,
    pub chunk: u64,
}

/// Pairs of equal-size subsets of a pool with equal ν, and the ν lower bound
/// for every subset. Unit `i` is the `i`-th subset in rank order and reports
/// its collisions with later subsets.
pub struct NuCollisionScan {
    params: NuCollisionParams,
    subsets: Vec<FinSet>,
    nus: Vec<Nat>,
    later_equal: Vec<Vec<usize>>,
}

impl NuCollisionScan {
    pub fn new(params: NuCollisionParams) -> Result<Self> {
        let n = params.pool.len();
        if params.size == 0 || params.size > n {
            return Err(Error::domain(format!("subset size {} outside 1..={n}", params.size)));
        }
        let count = crate::coprime::binomial(n as u64, params.size as u64).unwrap_or(u64::MAX);
        if count > params.cap {
            return Err(Error::resource("subset enumeration", params.cap, 0));
        }
        Ok(NuCollisionScan {
            params,
            subsets: Vec::new(),
            nus: Vec::new(),
            later_equal: Vec::new(),
        })
    }

    fn prepare(&mut self) {
        if !self.subsets.is_empty() {
            return;
        }
        self.subsets = subsets_of_size(&self.params.pool, self.params.size);
        self.nus = self
            .subsets
            .par_iter()
            .map(|c| crate::arith::nu(c).expect("nonempty"))
            .collect();
        let mut by_nu: HashMap<&Nat, Vec<usize>> = HashMap::new();
        for (i, v) in self.nus.iter().enumerate() {
            by_nu.entry(v).or_default().push(i);
        }
        self.later_equal = vec![Vec::new(); self.subsets.len()];
        for ix in by_nu.values() {
            for (a, &i) in ix.iter().enumerate() {
                self.later_equal[i] = ix[a + 1..].to_vec();
            }
        }
    }
}

impl Scan for NuCollisionScan {
    fn kind(&self) -> &'static str {
        "nu-collision"
    }

    fn parameters(&self) -> Value {
        let mut v = serde_json::to_value(&self.params).expect("serializes");
        v["pairwise_coprime"] = json!(is_pairwise_coprime(&self.params.pool));
        v
    }

    fn units(&self) -> u64 {
        crate::coprime::binomial(self.params.pool.len() as u64, self.params.size as u64).expect("checked")
    }

    fn chunk(&self) -> u64 {
        self.params.chunk
    }

    fn run(&mut self, units: Range<u64>) -> Result<ChunkResult> {
        self.prepare();
        let bounds: Vec<bool> = units
            .clone()
            .into_par_iter()
            .map(|u| check_nu_lower_bound(&self.subsets[u as usize]).expect("nonempty"))
            .collect();
        let mut findings = Vec::new();
        let mut collisions = 0;
        for (u, bound_ok) in units.clone().zip(bounds) {
            let i = u as usize;
            if !bound_ok {
                findings.push(Finding::violation(json!({
                    "lower_bound_fails": self.subsets[i].to_string(),
                    "nu": self.nus[i].to_string(),
                })));
            }
            for &j in &self.later_equal[i] {
                collisions += 1;
                findings.push(Finding::ok(json!({
                    "size": self.params.size,
                    "set_a": self.subsets[i],
                    "set_b": self.subsets[j],
                    "nu": self.nus[i].to_string(),
                })));
            }
        }
        Ok(ChunkResult {
            findings,
            counts: vec![("subsets", units.end - units.start), ("collisions", collisions)],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonintegralityParams {
    pub m: (u64, u64),
    pub d: (u64, u64),
    pub k: (u64, u64),
    pub powered_samples: usize,
    pub weighted_samples: usize,
    pub seed: u64,
    pub chunk: u64,
}

impl NonintegralityParams {
    pub fn config(&self) -> NonintegralityConfig {
        NonintegralityConfig {
            m: self.m.0..=self.m.1,
            d: self.d.0..=self.d.1,
            k: self.k.0..=self.k.1,
            powered_samples: self.powered_samples,
            weighted_samples: self.weighted_samples,
            seed: self.seed,
        }
    }
}

/// Non-integrality of progression, powered-progression and weighted
/// interval sums; one unit per case.
pub struct NonintegralityScan {
    params: NonintegralityParams,
    cases: Vec<SumCase>,
}

impl NonintegralityScan {
    pub fn new(params: NonintegralityParams) -> Result<Self> {
        let cases = params.config().cases();
        Ok(NonintegralityScan { params, cases })
    }
}

fn family_counter(f: SumFamily) -> &'static str {
    match f {
        SumFamily::Progression => "progression",
        SumFamily::PoweredProgression => "powered-progression",
        SumFamily::WeightedInterval => "weighted-interval",
    }
}

impl Scan for NonintegralityScan {
    fn kind(&self) -> &'static str {
        "nonintegrality"
    }

    fn parameters(&self) -> Value {
        serde_json::to_value(&self.params).expect("serializes")
    }

    fn units(&self) -> u64 {
        self.cases.len() as u64
    }

    fn chunk(&self) -> u64 {
        self.params.chunk
    }

    fn run(&mut self, units: Range<u64>) -> Result<ChunkResult> {
        let cases = &self.cases[units.start as usize..units.end as usize];
        let outcomes: Vec<Option<bool>> = cases.par_iter().map(evaluate_case).collect::<Result<_>>()?;
        let mut counts: BTreeMap<&'static str, u64> = BTreeMap::new();
        let mut findings = Vec::new();
        for (case, outcome) in cases.iter().zip(outcomes) {
            match outcome {
                None => *counts.entry("skipped").or_default() += 1,
                Some(integral) => {
                    *counts.entry(family_counter(case.family)).or_default() += 1;
                    if integral {
                        findings.push(Finding::violation(json!({
                            "case": case,
                            "sum": case.value()?.to_string(),
                        })));
                    }
                }
            }
        }
        Ok(ChunkResult {
            findings,
            counts: counts.into_iter().collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(n: usize) -> rayon::ThreadPool {
        rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()
    }

    fn collect(scan: &mut dyn Scan, start: Option<&Checkpoint>, workers: usize) -> Vec<ScanRecord> {
        let mut out = Vec::new();
        run_scan(scan, start, &pool(workers), &mut |r| {
            out.push(r.clone());
            Ok(())
        })
        .unwrap();
        out
    }

    #[test]
    fn token_round_trip_and_corruption() {
        let cp = Checkpoint {
            kind: "tk".into(),
            parameters: json!({"m_max": 5, "n_max": 5, "chunk": 2}),
            cursor: 2,
            counters: Counters::from([("intervals".to_string(), 9)]),
        };
        let t = cp.token();
        assert_eq!(Checkpoint::from_token(&t).unwrap(), cp);
        let mut bytes = t.into_bytes();
        bytes[3] = if bytes[3] == b'A' { b'B' } else { b'A' };
        let corrupt = String::from_utf8(bytes).unwrap();
        assert!(matches!(Checkpoint::from_token(&corrupt), Err(Error::Parse(_))));
        assert!(Checkpoint::from_token("garbage").is_err());
    }

    #[test]
    fn tk_small() {
        let mut s = TkScan::new(TkParams {
            m_max: 60,
            n_max: 60,
            chunk: 7,
        })
        .unwrap();
        let recs = collect(&mut s, None, 2);
        let findings: Vec<_> = recs.iter().filter(|r| r.record == RecordType::Finding).collect();
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].payload["sigma"], "1/1");
        let summary = recs.last().unwrap();
        assert_eq!(summary.payload["intervals"], 1830);
        assert_eq!(summary.status, Status::Ok);
    }

    #[test]
    fn resume_reproduces_suffix() {
        let make = || ErdosNivenScan::new(ErdosNivenParams { n: 30, chunk: 4 }).unwrap();
        let full = collect(&mut make(), None, 3);
        for (i, r) in full.iter().enumerate() {
            if r.record != RecordType::Checkpoint {
                continue;
            }
            let cp = Checkpoint::from_token(r.payload["token"].as_str().unwrap()).unwrap();
            let mut resumed = scan_from_checkpoint(&cp).unwrap();
            let suffix = collect(resumed.as_mut(), Some(&cp), 1);
            assert_eq!(suffix, full[i + 1..]);
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let make = || QuadrupleScan::new(QuadrupleParams { bound: 60, chunk: 5 }).unwrap();
        assert_eq!(collect(&mut make(), None, 1), collect(&mut make(), None, 4));
    }

    #[test]
    fn mismatched_token_rejected() {
        let mut s = TkScan::new(TkParams {
            m_max: 5,
            n_max: 5,
            chunk: 2,
        })
        .unwrap();
        let cp = Checkpoint {
            kind: "tk".into(),
            parameters: json!({"m_max": 6, "n_max": 5, "chunk": 2}),
            cursor: 2,
            counters: Counters::new(),
        };
        assert!(run_scan(&mut s, Some(&cp), &pool(1), &mut |_| Ok(())).is_err());
    }

    #[test]
    fn nu_scan_small() {
        let params = NuCollisionParams {
            pool: FinSet::from_u64s([2, 3, 5, 7, 11, 13]).unwrap(),
            size: 2,
            cap: 1000,
            chunk: 4,
        };
        let recs = collect(&mut NuCollisionScan::new(params).unwrap(), None, 2);
        let nus: Vec<&str> = recs
            .iter()
            .filter(|r| r.record == RecordType::Finding)
            .map(|r| r.payload["nu"].as_str().unwrap())
            .collect();
        assert!(nus.contains(&"16") && nus.contains(&"18"));
    }
}
