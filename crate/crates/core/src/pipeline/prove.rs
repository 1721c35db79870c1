//! The full verification run and its certificate.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FibpowError, Result};
use crate::quadfield::SolutionTriple;

use super::bounds::{BoundState, BoundSummary};
use super::instance::{solve_instance, InstanceReport, SolveOptions};

pub const SCHEMA_VERSION: &str = "fibpow-cert/1";

/// The `y` with more than one solution and their complete lists.
pub fn expected_exceptions() -> BTreeMap<u64, Vec<(u64, u64, u32)>> {
    BTreeMap::from([
        (2, vec![(4, 2, 2), (5, 4, 3), (7, 4, 4)]),
        (3, vec![(3, 2, 1), (6, 2, 2)]),
        (4, vec![(4, 2, 1), (7, 4, 2)]),
        (6, vec![(5, 2, 1), (9, 3, 2)]),
        (10, vec![(6, 3, 1), (16, 7, 3)]),
    ])
}

/// All `(n1, m1)` with `2 <= m1 < n1 <= n1_max`, by `n1` then `m1`.
pub fn enumerate_candidates(n1_max: u64) -> Vec<(u64, u64)> {
    (3..=n1_max).flat_map(|n| (2..n).map(move |m| (n, m))).collect()
}

/// A `y` with several solutions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiSolution {
    pub y: String,
    pub solutions: Vec<SolutionTriple>,
    /// Whether `y` and its list match the known exceptions.
    pub expected: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub instances: usize,
    pub distinct_y: usize,
    pub solutions: usize,
    pub special_cases: usize,
    pub failures: usize,
    pub resumed: usize,
}

/// The certificate written by [`prove_theorem`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: String,
    pub n1_max: u64,
    pub bound_trail: Option<BoundSummary>,
    /// Whether `n1_max` reaches the certified bound on `n1`.
    pub covers_bound: bool,
    pub instances: Vec<InstanceReport>,
    pub multi_solution_y: BTreeMap<String, MultiSolution>,
    pub refutations: Vec<MultiSolution>,
    pub failures: Vec<String>,
    pub totals: Totals,
    /// Seconds.
    pub wall_time: f64,
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Exactly the known exceptions, with their lists.
    Confirmed,
    Refuted,
    Failed,
}

impl Certificate {
    pub fn verdict(&self) -> Verdict {
        if !self.failures.is_empty() {
            return Verdict::Failed;
        }
        if !self.refutations.is_empty() {
            return Verdict::Refuted;
        }
        let found: BTreeSet<String> = self.multi_solution_y.keys().cloned().collect();
        let want: BTreeSet<String> = expected_exceptions().keys().map(|y| y.to_string()).collect();
        if found == want && self.multi_solution_y.values().all(|m| m.expected) {
            Verdict::Confirmed
        } else {
            Verdict::Refuted
        }
    }

    /// `y,n,m,a,source_pair` rows, one per solution per instance.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("y,n,m,a,source_pair\n");
        for r in &self.instances {
            for s in &r.solutions {
                out.push_str(&format!("{},{},{},{},\"({},{})\"\n", s.y, s.n, s.m, s.a, r.n1, r.m1));
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "instances: {}  distinct y: {}  n1 <= {}{}\n",
            self.totals.instances,
            self.totals.distinct_y,
            self.n1_max,
            if self.covers_bound { "" } else { " (below the certified bound)" }
        );
        for (y, m) in &self.multi_solution_y {
            let list: Vec<String> = m.solutions.iter().map(|s| s.to_string()).collect();
            out.push_str(&format!("y = {y}: {}\n", list.join(", ")));
        }
        for r in &self.refutations {
            out.push_str(&format!("REFUTATION y = {}\n", r.y));
        }
        for f in &self.failures {
            out.push_str(&format!("FAILED {f}\n"));
        }
        out.push_str(&format!("verdict: {:?}\n", self.verdict()));
        out
    }

    /// JSON without the timing fields, for comparing runs.
    pub fn without_timing(&self) -> Certificate {
        let mut c = self.clone();
        c.wall_time = 0.0;
        c.totals.resumed = 0;
        for r in &mut c.instances {
            r.elapsed = 0;
        }
        c
    }
}

/// Settings for [`prove_theorem`].
#[derive(Clone, Debug, Default)]
pub struct ProveOptions {
    pub n1_max: u64,
    pub solve: SolveOptions,
    /// Append-only record of finished instances, one JSON object per line.
    pub checkpoint: Option<PathBuf>,
    /// Reuse records already in the checkpoint.
    pub resume: bool,
    /// Print progress to stderr.
    pub progress: bool,
}

fn read_checkpoint(path: &PathBuf) -> Result<Vec<InstanceReport>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(r) => out.push(r),
            // a torn final line from an interrupted run
            Err(e) => log::warn!("checkpoint line {} ignored: {e}", i + 1),
        }
    }
    Ok(out)
}

fn ends_mid_line(f: &mut File) -> Result<bool> {
    use std::io::{Read, Seek, SeekFrom};
    if f.metadata()?.len() == 0 {
        return Ok(false);
    }
    f.seek(SeekFrom::End(-1))?;
    let mut last = [0u8];
    f.read_exact(&mut last)?;
    Ok(last[0] != b'\n')
}

/// Solves every instance with `n1 <= n1_max` and aggregates.
///
/// `bounds` supplies the global `n2` bound and the trail; without it each
/// instance starts from its own single-solution bound.
pub fn prove_theorem(bounds: Option<&BoundState>, opts: &ProveOptions) -> Result<Certificate> {
    if opts.n1_max < 3 {
        return Err(FibpowError::InvalidArgument("n1_max must be at least 3".into()));
    }
    let clock = Instant::now();
    let n2 = bounds.map(|b| b.n2_max.clone()).unwrap_or_default();
    let mut done = match (&opts.checkpoint, opts.resume) {
        (Some(p), true) => read_checkpoint(p)?,
        _ => Vec::new(),
    };
    let pairs = enumerate_candidates(opts.n1_max);
    let wanted: HashSet<(u64, u64)> = pairs.iter().copied().collect();
    done.retain(|r| wanted.contains(&(r.n1, r.m1)));
    let mut seen = HashSet::new();
    done.retain(|r| seen.insert((r.n1, r.m1)));
    let resumed = done.len();
    let todo: Vec<(u64, u64)> = pairs.into_iter().filter(|p| !seen.contains(p)).collect();

    let writer = match &opts.checkpoint {
        Some(p) => {
            let mut f = OpenOptions::new().create(true).read(true).append(true).truncate(false).open(p)?;
            if !opts.resume {
                f.set_len(0)?;
            } else if ends_mid_line(&mut f)? {
                // keep new records off a torn last line
                writeln!(f)?;
            }
            Some(Mutex::new(BufWriter::new(f)))
        }
        None => None,
    };
    let total = todo.len();
    let count = AtomicUsize::new(0);
    let results: Vec<std::result::Result<InstanceReport, String>> = todo
        .par_iter()
        .map(|&(n1, m1)| {
            let r = solve_instance(n1, m1, &n2, &opts.solve).map_err(|e| e.to_string());
            if let (Ok(rep), Some(w)) = (&r, &writer) {
                let line = serde_json::to_string(rep).expect("report serializes");
                let mut w = w.lock().unwrap();
                let _ = writeln!(w, "{line}");
                let _ = w.flush();
            }
            let k = count.fetch_add(1, Ordering::Relaxed) + 1;
            if opts.progress && (k % 500 == 0 || k == total) {
                eprintln!("[{:>7.1}s] {k}/{total} instances", clock.elapsed().as_secs_f64());
            }
            r
        })
        .collect();

    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rep) => done.push(rep),
            Err(e) => failures.push(e),
        }
    }
    done.sort_by_key(|r| (r.n1, r.m1));
    Ok(aggregate(bounds, opts.n1_max, done, failures, resumed, clock.elapsed().as_secs_f64()))
}

/// Instances are keyed by primitive roots; a solution `(n, m, a)` for `y`
/// is also one for `y^k` whenever `k | a`.
fn with_powers(by_root: &BTreeMap<BigInt, BTreeSet<SolutionTriple>>) -> BTreeMap<BigInt, BTreeSet<SolutionTriple>> {
    let mut out: BTreeMap<BigInt, BTreeSet<SolutionTriple>> = BTreeMap::new();
    for (y, sols) in by_root {
        let a_max = sols.iter().map(|s| s.a).max().unwrap_or(0);
        for k in 1..=a_max {
            let base = num_traits::pow(y.clone(), k as usize);
            for s in sols.iter().filter(|s| s.a % k == 0) {
                out.entry(base.clone()).or_default().insert(SolutionTriple { a: s.a / k, y: base.clone(), ..s.clone() });
            }
        }
    }
    out
}

/// Builds the certificate from finished instance reports.
pub fn aggregate(
    bounds: Option<&BoundState>,
    n1_max: u64,
    instances: Vec<InstanceReport>,
    failures: Vec<String>,
    resumed: usize,
    wall_time: f64,
) -> Certificate {
    let mut by_y: BTreeMap<BigInt, BTreeSet<SolutionTriple>> = BTreeMap::new();
    let mut special = 0;
    for r in &instances {
        special += r.special_cases.len();
        by_y.entry(r.y.clone()).or_default().extend(r.solutions.iter().cloned());
    }
    let expected = expected_exceptions();
    let mut multi = BTreeMap::new();
    let mut refutations = Vec::new();
    for (y, sols) in &with_powers(&by_y) {
        if sols.len() < 2 {
            continue;
        }
        let list: Vec<SolutionTriple> = sols.iter().cloned().collect();
        let triples: Vec<(u64, u64, u32)> = list.iter().map(|s| (s.n, s.m, s.a)).collect();
        let known = u64::try_from(y).ok().and_then(|v| expected.get(&v));
        let m = MultiSolution { y: y.to_string(), solutions: list, expected: known == Some(&triples) };
        if known.is_none() {
            refutations.push(m.clone());
        }
        multi.insert(y.to_string(), m);
    }
    let covers_bound = bounds
        .and_then(|b| b.n1_max.as_ref())
        .is_some_and(|n| n <= &BigInt::from(n1_max));
    let totals = Totals {
        instances: instances.len(),
        distinct_y: by_y.len(),
        solutions: by_y.values().map(|s| s.len()).sum(),
        special_cases: special,
        failures: failures.len(),
        resumed,
    };
    Certificate {
        schema_version: SCHEMA_VERSION.into(),
        n1_max,
        bound_trail: bounds.map(|b| b.summary()),
        covers_bound,
        instances,
        multi_solution_y: multi,
        refutations,
        failures,
        totals,
        wall_time,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_counts() {
        assert_eq!(enumerate_candidates(4), vec![(3, 2), (4, 2), (4, 3)]);
        assert!(enumerate_candidates(2).is_empty());
        assert_eq!(enumerate_candidates(470).len(), 109_746);
    }

    #[test]
    fn small_run_finds_exceptions() {
        let opts = ProveOptions { n1_max: 16, ..Default::default() };
        let c = prove_theorem(None, &opts).unwrap();
        assert!(c.failures.is_empty(), "{:?}", c.failures);
        assert_eq!(c.verdict(), Verdict::Confirmed, "{}", c.to_text());
    }
}
