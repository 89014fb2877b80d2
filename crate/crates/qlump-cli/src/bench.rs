//! Benchmark harness: manifest parsing, qubit sweeps, repetition-averaged
//! timings, CSV output.
//!
//! The manifest is plain text. Global settings are `key = value` lines;
//! each circuit is one `circuit` line of `key=value` tokens:
//!
//! ```text
//! timeout_s = 10
//! reps = 3
//! circuit family=ghz n=4..8 seed=ket0 regimes=reduced-dense,full-dd
//! circuit family=grover n=5 marked=random seed=psi regimes=reduced-dd
//! circuit qasm=path/to/file.qasm seed=ket0 regimes=reduced-dense
//! ```
//!
//! Qubit sweeps run in ascending order and stop a family after the first
//! size that times out.

use std::fmt::Write as _;
use std::time::Duration;

use qlump_core::lumping::DEFAULT_D_MAX;
use qlump_core::sim::{run_regime, KappaPolicy, RegimeMode, RunConfig, RunStatus};
use qlump_core::{Error, Result, TolerancePolicy};

use crate::circuits::{parse_seed_spec, CircuitSpec};

/// One output row of the harness.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub circuit: String,
    pub n: usize,
    pub dim: u64,
    pub d: Option<usize>,
    pub rr_percent: Option<f64>,
    pub regime: RegimeMode,
    pub reduce_ms: f64,
    pub sim_ms: f64,
    pub status: RunStatus,
}

impl BenchRecord {
    pub fn csv_header() -> &'static str {
        "circuit,n,N,d,rr_percent,regime,reduce_ms,sim_ms,total_ms,status"
    }

    pub fn to_csv_row(&self) -> String {
        let d = self.d.map(|d| d.to_string()).unwrap_or_default();
        let rr = self
            .rr_percent
            .map(|r| format!("{r}"))
            .unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.circuit,
            self.n,
            self.dim,
            d,
            rr,
            self.regime,
            self.reduce_ms,
            self.sim_ms,
            self.reduce_ms + self.sim_ms,
            self.status
        )
    }
}

#[derive(Debug, Clone)]
struct CircuitLine {
    spec: CircuitSpec,
    n_range: Option<(usize, usize)>,
    seed: String,
    regimes: Vec<RegimeMode>,
    kappa: KappaPolicy,
}

/// A parsed manifest: global settings plus the circuit sweep list.
#[derive(Debug, Clone)]
pub struct Manifest {
    timeout: Option<Duration>,
    reps: usize,
    rng_seed: Option<u64>,
    lines: Vec<CircuitLine>,
}

fn config_err(lineno: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("manifest line {lineno}: {msg}"))
}

impl Manifest {
    pub fn set_reps(&mut self, reps: usize) {
        self.reps = reps;
    }

    pub fn set_timeout(&mut self, timeout: Duration) {
        self.timeout = Some(timeout);
    }

    pub fn set_rng_seed(&mut self, seed: u64) {
        self.rng_seed = Some(seed);
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut manifest = Manifest {
            timeout: None,
            reps: 5,
            rng_seed: None,
            lines: Vec::new(),
        };
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("circuit ") {
                manifest.lines.push(Self::parse_circuit_line(rest, lineno)?);
            } else if let Some((key, value)) = line.split_once('=') {
                let (key, value) = (key.trim(), value.trim());
                match key {
                    "timeout_s" => {
                        let secs: f64 = value
                            .parse()
                            .map_err(|_| config_err(lineno, "bad timeout_s"))?;
                        manifest.timeout = Some(Duration::from_secs_f64(secs));
                    }
                    "reps" => {
                        manifest.reps = value
                            .parse()
                            .map_err(|_| config_err(lineno, "bad reps"))?;
                        if manifest.reps == 0 {
                            return Err(config_err(lineno, "reps must be at least 1"));
                        }
                    }
                    "rng_seed" => {
                        manifest.rng_seed = Some(
                            value
                                .parse()
                                .map_err(|_| config_err(lineno, "bad rng_seed"))?,
                        );
                    }
                    other => return Err(config_err(lineno, format!("unknown key '{other}'"))),
                }
            } else {
                return Err(config_err(lineno, format!("unparseable line '{line}'")));
            }
        }
        if manifest.lines.is_empty() {
            return Err(Error::Config("manifest lists no circuits".into()));
        }
        Ok(manifest)
    }

    fn parse_circuit_line(rest: &str, lineno: usize) -> Result<CircuitLine> {
        let mut spec = CircuitSpec {
            family: None,
            qasm: None,
            n: None,
            marked: Vec::new(),
            base: None,
            modulus: None,
            delta: 0.1,
            rng_seed: None,
        };
        let mut n_range = None;
        let mut seed = "ket0".to_string();
        let mut regimes = Vec::new();
        let mut kappa = KappaPolicy::SqrtN;
        for token in rest.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| config_err(lineno, format!("bad token '{token}'")))?;
            match key {
                "family" => spec.family = Some(value.to_string()),
                "qasm" => spec.qasm = Some(value.into()),
                "n" => {
                    if let Some((lo, hi)) = value.split_once("..") {
                        let lo: usize =
                            lo.parse().map_err(|_| config_err(lineno, "bad n range"))?;
                        let hi: usize =
                            hi.parse().map_err(|_| config_err(lineno, "bad n range"))?;
                        if lo > hi {
                            return Err(config_err(lineno, "empty n range"));
                        }
                        n_range = Some((lo, hi));
                    } else {
                        let n: usize =
                            value.parse().map_err(|_| config_err(lineno, "bad n"))?;
                        n_range = Some((n, n));
                    }
                }
                "marked" => {
                    if value != "random" {
                        spec.marked = value
                            .split(',')
                            .map(|v| v.parse().map_err(|_| config_err(lineno, "bad marked")))
                            .collect::<Result<_>>()?;
                    }
                }
                "base" => {
                    spec.base =
                        Some(value.parse().map_err(|_| config_err(lineno, "bad base"))?)
                }
                "modulus" => {
                    spec.modulus = Some(
                        value
                            .parse()
                            .map_err(|_| config_err(lineno, "bad modulus"))?,
                    )
                }
                "delta" => {
                    spec.delta = value
                        .parse()
                        .map_err(|_| config_err(lineno, "bad delta"))?
                }
                "seed" => seed = value.to_string(),
                "kappa" => {
                    kappa = if value == "sqrtn" {
                        KappaPolicy::SqrtN
                    } else {
                        KappaPolicy::Fixed(
                            value
                                .parse()
                                .map_err(|_| config_err(lineno, "bad kappa"))?,
                        )
                    };
                }
                "regimes" => {
                    regimes = value
                        .split(',')
                        .map(|r| r.parse::<RegimeMode>().map_err(|e| config_err(lineno, e)))
                        .collect::<Result<_>>()?;
                }
                other => return Err(config_err(lineno, format!("unknown key '{other}'"))),
            }
        }
        if regimes.is_empty() {
            return Err(config_err(lineno, "circuit line needs regimes=..."));
        }
        if spec.qasm.is_none() && n_range.is_none() {
            return Err(config_err(lineno, "circuit line needs n=... or qasm=..."));
        }
        Ok(CircuitLine {
            spec,
            n_range,
            seed,
            regimes,
            kappa,
        })
    }

    /// Runs every (circuit, regime) cell, averaging timings over the
    /// configured repetitions, and stops a sweep after the first size
    /// that hits the timeout.
    pub fn run(&self) -> Result<Vec<BenchRecord>> {
        let mut records = Vec::new();
        for line in &self.lines {
            let sizes: Vec<Option<usize>> = match line.n_range {
                Some((lo, hi)) => (lo..=hi).map(Some).collect(),
                None => vec![None],
            };
            'sweep: for size in sizes {
                let mut spec = line.spec.clone();
                if let Some(n) = size {
                    spec.n = Some(n);
                }
                if spec.rng_seed.is_none() {
                    spec.rng_seed = self.rng_seed;
                }
                let mut hit_timeout = false;
                for &regime in &line.regimes {
                    let record = self.run_cell(&spec, line, regime)?;
                    hit_timeout |= record.status == RunStatus::Timeout;
                    records.push(record);
                }
                if hit_timeout {
                    break 'sweep;
                }
            }
        }
        Ok(records)
    }

    fn run_cell(
        &self,
        spec: &CircuitSpec,
        line: &CircuitLine,
        regime: RegimeMode,
    ) -> Result<BenchRecord> {
        let built = spec.build()?;
        let n = built.circuit.qubits();
        let cfg = RunConfig {
            seed: parse_seed_spec(&line.seed, n)?,
            tol: TolerancePolicy::default(),
            kappa: line.kappa,
            d_max: DEFAULT_D_MAX,
            timeout: self.timeout,
            trajectory: Default::default(),
        };
        let mut reduce_acc = 0.0;
        let mut sim_acc = 0.0;
        let mut d: Option<usize> = None;
        let mut status = RunStatus::Ok;
        let mut done = 0usize;
        for rep in 0..self.reps {
            let run = run_regime(&built.circuit, &cfg, regime)?;
            reduce_acc += run.reduce_ms;
            sim_acc += run.sim_ms;
            status = run.status;
            done += 1;
            if regime.is_reduced() && run.status == RunStatus::Ok {
                // Dimensions must be identical across repetitions.
                if rep > 0 && d != run.d {
                    return Err(Error::Config(format!(
                        "nondeterministic reduction for {}: {:?} vs {:?}",
                        built.circuit.name(),
                        d,
                        run.d
                    )));
                }
                d = run.d;
            }
            if run.status != RunStatus::Ok {
                break;
            }
        }
        let reps = done.max(1) as f64;
        let rr = d.map(|d| 100.0 * d as f64 / (1u64 << n) as f64);
        Ok(BenchRecord {
            circuit: built.circuit.name().to_string(),
            n,
            dim: 1u64 << n,
            d: if regime.is_reduced() { d } else { None },
            rr_percent: if regime.is_reduced() { rr } else { None },
            regime,
            reduce_ms: reduce_acc / reps,
            sim_ms: sim_acc / reps,
            status,
        })
    }
}

pub fn records_to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", BenchRecord::csv_header());
    for r in records {
        let _ = writeln!(out, "{}", r.to_csv_row());
    }
    out
}
