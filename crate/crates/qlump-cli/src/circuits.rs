//! Shared circuit construction from CLI arguments.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qlump_core::circuit::{
    dj_circuit, ghz_circuit, graph_state_circuit, grover_circuit, grover_circuit_elementary,
    order_finding_circuit, parse_qasm, qaoa_problem_step, qft_circuit, random_max_cut,
    random_sat_formula, w_state_circuit, Circuit, Graph, QaoaProblem,
};
use qlump_core::dense::DenseState;
use qlump_core::lumping::SubspaceSpec;
use qlump_core::{Error, Result};

/// Everything needed to build a circuit: either a QASM path or a family
/// name with its parameters.
#[derive(Debug, Clone)]
pub struct CircuitSpec {
    pub family: Option<String>,
    pub qasm: Option<std::path::PathBuf>,
    pub n: Option<usize>,
    pub marked: Vec<u64>,
    pub base: Option<u64>,
    pub modulus: Option<u64>,
    pub delta: f64,
    pub rng_seed: Option<u64>,
}

/// The built circuit together with the problem instance when one exists
/// (QAOA families), so observables can be evaluated later.
pub struct BuiltCircuit {
    pub circuit: Circuit<f64>,
    pub problem: Option<Arc<QaoaProblem>>,
}

impl CircuitSpec {
    pub fn build(&self) -> Result<BuiltCircuit> {
        self.build_inner(false)
    }

    /// Variant for QASM emission: uses elementary-gate constructions.
    pub fn build_elementary(&self) -> Result<BuiltCircuit> {
        self.build_inner(true)
    }

    fn build_inner(&self, elementary: bool) -> Result<BuiltCircuit> {
        if let Some(path) = &self.qasm {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
                line: 0,
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            let mut circuit = parse_qasm::<f64>(&text)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "qasm".into());
            circuit.set_name(name);
            return Ok(BuiltCircuit {
                circuit,
                problem: None,
            });
        }
        let family = self
            .family
            .as_deref()
            .ok_or_else(|| Error::Config("need --family or --qasm".into()))?;
        let n = self
            .n
            .ok_or_else(|| Error::Config("family circuits need -n".into()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed.unwrap_or(0));
        let circuit = match family {
            "ghz" => ghz_circuit(n)?,
            "qft" => qft_circuit(n)?,
            "dj" => dj_circuit(n)?,
            "wstate" => w_state_circuit(n)?,
            "graphstate" => {
                let graph = if self.rng_seed.is_some() {
                    random_max_cut(n, 1.0 / 3.0, &mut rng)?
                } else {
                    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
                    Graph::new(n, &edges)?
                };
                graph_state_circuit(&graph)?
            }
            "grover" => {
                let marked: BTreeSet<u64> = if self.marked.is_empty() {
                    if self.rng_seed.is_none() {
                        return Err(Error::Config(
                            "grover needs --marked indices or --rng-seed".into(),
                        ));
                    }
                    let dim = 1u64 << n;
                    [rand::Rng::gen_range(&mut rng, 0..dim)].into_iter().collect()
                } else {
                    self.marked.iter().copied().collect()
                };
                if elementary {
                    grover_circuit_elementary(n, &marked)?
                } else {
                    grover_circuit(n, &marked)?
                }
            }
            "orderfinding" => {
                let x = self
                    .base
                    .ok_or_else(|| Error::Config("orderfinding needs --base".into()))?;
                let modulus = self
                    .modulus
                    .ok_or_else(|| Error::Config("orderfinding needs --modulus".into()))?;
                order_finding_circuit(x, modulus)?
            }
            "qaoasat" => {
                let formula = random_sat_formula(n, &mut rng)?;
                let problem = Arc::new(QaoaProblem::Sat(formula));
                let circuit = qaoa_problem_step(&problem, self.delta)?;
                return Ok(BuiltCircuit {
                    circuit,
                    problem: Some(problem),
                });
            }
            "qaoamaxcut" => {
                let graph = random_max_cut(n, 1.0 / 3.0, &mut rng)?;
                let problem = Arc::new(QaoaProblem::MaxCut(graph));
                let circuit = qaoa_problem_step(&problem, self.delta)?;
                return Ok(BuiltCircuit {
                    circuit,
                    problem: Some(problem),
                });
            }
            other => {
                return Err(Error::Config(format!("unknown circuit family '{other}'")))
            }
        };
        Ok(BuiltCircuit {
            circuit,
            problem: None,
        })
    }
}

/// Parses a seed specification, including the `file:` form whose payload
/// is one amplitude per line as `re,im` (empty lines split seeds).
pub fn parse_seed_spec(s: &str, n: usize) -> Result<SubspaceSpec<f64>> {
    if let Some(path) = s.strip_prefix("file:") {
        return read_seed_file(Path::new(path), n);
    }
    s.parse()
}

fn read_seed_file(path: &Path, n: usize) -> Result<SubspaceSpec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        message: format!("cannot read seed file {}: {e}", path.display()),
    })?;
    let dim = 1usize << n;
    let mut seeds = Vec::new();
    let mut amps = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            if !amps.is_empty() {
                seeds.push(std::mem::take(&mut amps));
            }
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let re: f64 = parts
            .next()
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("bad amplitude line '{line}'"),
            })?;
        let im: f64 = match parts.next() {
            Some(t) => t.trim().parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("bad amplitude line '{line}'"),
            })?,
            None => 0.0,
        };
        amps.push(qlump_core::Amplitude64::new(re, im));
    }
    if !amps.is_empty() {
        seeds.push(amps);
    }
    let vectors = seeds
        .into_iter()
        .map(|a| {
            if a.len() != dim {
                return Err(Error::Dimension(format!(
                    "seed file holds {} amplitudes, expected 2^{n} = {dim}",
                    a.len()
                )));
            }
            DenseState::from_amplitudes(n, a)
        })
        .collect::<Result<Vec<_>>>()?;
    if vectors.is_empty() {
        return Err(Error::Config("seed file holds no amplitudes".into()));
    }
    Ok(SubspaceSpec::Vectors(vectors))
}
