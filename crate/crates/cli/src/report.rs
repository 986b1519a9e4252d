use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use birsym_core::compute::Field;
use birsym_core::{AbelianGroup, Flavor};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::args::GlobalOpts;

pub const CACHE_ENV: &str = "BIRSYM_CACHE_DIR";

/// Everything that determines a run. Serialized next to every result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobConfig {
    pub command: String,
    pub groups: Vec<Vec<u32>>,
    pub n: Option<usize>,
    pub flavor: Option<Flavor>,
    pub kset: Vec<usize>,
    pub field: Option<Field>,
    /// Explicit rank primes; empty means seeded defaults per group.
    pub primes: Vec<u32>,
    pub threads: usize,
    pub row_budget: Option<usize>,
    pub snf_budget: usize,
    pub seed: u64,
    /// Command-specific parameters.
    pub params: serde_json::Map<String, Value>,
    pub outputs: Outputs,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub sms: Option<PathBuf>,
    pub symbols: Option<PathBuf>,
}

impl JobConfig {
    pub fn new(command: &str, global: &GlobalOpts) -> Self {
        JobConfig {
            command: command.to_string(),
            groups: Vec::new(),
            n: None,
            flavor: None,
            kset: Vec::new(),
            field: None,
            primes: global.primes.clone(),
            threads: global.threads,
            row_budget: global.budget,
            snf_budget: global.snf_budget,
            seed: global.seed,
            params: Default::default(),
            outputs: Outputs { json: global.json.clone(), csv: global.csv.clone(), ..Default::default() },
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(key.to_string(), serde_json::to_value(value).expect("serializable parameter"));
        self
    }

    /// Checks the configuration before any work is dispatched.
    pub fn validate(&self) -> Result<(), String> {
        if self.groups.is_empty() {
            return Err("no group given".into());
        }
        for moduli in &self.groups {
            AbelianGroup::new(moduli.clone()).map_err(|e| e.to_string())?;
        }
        if let Some(n) = self.n {
            if n == 0 {
                return Err("n must be positive".into());
            }
            if let Some(&k) = self.kset.iter().find(|&&k| k == 0 || k > n) {
                return Err(format!("relation degree k={k} outside 1..={n}"));
            }
        }
        for &p in &self.primes {
            if !birsym_core::linalg::primes::is_prime(p as u64) {
                return Err(format!("{p} is not prime"));
            }
        }
        if self.row_budget == Some(0) {
            return Err("budget must be positive".into());
        }
        Ok(())
    }

    /// Rank primes for a group: the explicit list or seeded defaults.
    pub fn primes_for(&self, group: &AbelianGroup) -> Vec<u32> {
        if self.primes.is_empty() {
            birsym_core::linalg::primes::random_primes(3, self.seed, group.order() as u64)
        } else {
            self.primes.clone()
        }
    }

    pub fn check_rows(&self, rows: usize) -> Result<(), String> {
        match self.row_budget {
            Some(b) if rows > b => Err(format!("relation system has {rows} rows, budget is {b}")),
            _ => Ok(()),
        }
    }

    /// File name for the result cache: the config minus outputs and threads.
    pub fn cache_key(&self) -> String {
        let mut c = self.clone();
        c.outputs = Outputs::default();
        c.threads = 0;
        let text = serde_json::to_string(&c).expect("config serializes");
        let digest = format!("{:x}", Sha256::digest(text.as_bytes()));
        format!("{}-{}.json", self.command, &digest[..16])
    }
}

/// A CSV table: header plus rows of already formatted cells.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// What a command computed, independent of how long it took.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub result: Value,
    /// Primes actually used, in order of first use.
    pub primes: Vec<u32>,
    /// All internal certifications passed.
    pub certified: bool,
    pub summary: Vec<String>,
    pub table: Option<Table>,
}

impl Outcome {
    pub fn new(result: impl Serialize) -> Self {
        Outcome {
            result: serde_json::to_value(result).expect("result serializes"),
            primes: Vec::new(),
            certified: true,
            summary: Vec::new(),
            table: None,
        }
    }

    pub fn add_primes(&mut self, ps: &[u32]) {
        for &p in ps {
            if !self.primes.contains(&p) {
                self.primes.push(p);
            }
        }
    }
}

/// Wall-clock stages, collected by a single reporter.
pub struct Progress {
    verbose: bool,
    start: Instant,
    stages: Mutex<Vec<(String, f64)>>,
}

impl Progress {
    pub fn new(verbose: bool) -> Self {
        Progress { verbose, start: Instant::now(), stages: Mutex::new(Vec::new()) }
    }

    pub fn stage<T>(&self, name: impl Into<String>, f: impl FnOnce() -> T) -> T {
        let name = name.into();
        if self.verbose {
            eprintln!("[{:8.2}s] {name}", self.start.elapsed().as_secs_f64());
        }
        let t = Instant::now();
        let out = f();
        let secs = t.elapsed().as_secs_f64();
        self.stages.lock().expect("progress lock").push((name, secs));
        out
    }

    fn timings(&self) -> Value {
        let stages = self.stages.lock().expect("progress lock");
        serde_json::json!({
            "total_seconds": self.start.elapsed().as_secs_f64(),
            "stages": stages.iter().map(|(n, s)| serde_json::json!({"stage": n, "seconds": s})).collect::<Vec<_>>(),
        })
    }
}

/// The JSON report. Everything outside `timestamp` depends only on the config.
#[derive(Serialize)]
pub struct Report<'a> {
    pub config: &'a JobConfig,
    pub result: &'a Value,
    pub primes: &'a [u32],
    pub certified: bool,
    pub timestamp: Value,
}

pub fn render_report(config: &JobConfig, outcome: &Outcome, progress: &Progress, cache_hit: bool) -> String {
    let unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let report = Report {
        config,
        result: &outcome.result,
        primes: &outcome.primes,
        certified: outcome.certified,
        timestamp: serde_json::json!({ "unix": unix, "cache_hit": cache_hit, "timings": progress.timings() }),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}

/// Opens `path` for writing; `-` is stdout.
pub fn sink(path: &Path) -> io::Result<Box<dyn Write>> {
    if path.as_os_str() == "-" {
        Ok(Box::new(io::stdout().lock()))
    } else {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        Ok(Box::new(io::BufWriter::new(fs::File::create(path)?)))
    }
}

pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

pub fn cache_load(config: &JobConfig) -> Option<Outcome> {
    let path = cache_dir()?.join(config.cache_key());
    let text = fs::read_to_string(path).ok()?;
    let (stored, outcome): (JobConfig, Outcome) = serde_json::from_str(&text).ok()?;
    let mut a = stored;
    a.outputs = Outputs::default();
    a.threads = 0;
    let mut b = config.clone();
    b.outputs = Outputs::default();
    b.threads = 0;
    (a == b).then_some(outcome)
}

pub fn cache_store(config: &JobConfig, outcome: &Outcome) -> io::Result<()> {
    let Some(dir) = cache_dir() else { return Ok(()) };
    fs::create_dir_all(&dir)?;
    let tmp = dir.join(format!(".{}.tmp", config.cache_key()));
    fs::write(&tmp, serde_json::to_string(&(config, outcome)).expect("cache entry serializes"))?;
    fs::rename(tmp, dir.join(config.cache_key()))
}
