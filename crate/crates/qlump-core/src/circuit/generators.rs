//! Circuit generators: search, optimization, order finding, and the
//! standard benchmark families.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Built-in benchmark circuit families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Ghz,
    Qft,
    Dj,
    GraphState,
    WState,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ghz" => Ok(Family::Ghz),
            "qft" => Ok(Family::Qft),
            "dj" => Ok(Family::Dj),
            "graphstate" => Ok(Family::GraphState),
            "wstate" => Ok(Family::WState),
            other => Err(Error::domain(format!("unknown circuit family '{other}'"))),
        }
    }
}

/// Standard construction of a named family. `graphstate` uses the cycle
/// graph `0-1-...-(n-1)-0`; use [`graph_state_circuit`] for other graphs.
pub fn family_circuit<T: Real>(family: Family, n: usize) -> Result<Circuit<T>> {
    if n < 2 {
        return Err(Error::domain("family circuits need at least 2 qubits"));
    }
    match family {
        Family::Ghz => ghz_circuit(n),
        Family::Qft => qft_circuit(n),
        Family::Dj => dj_circuit(n),
        Family::GraphState => {
            let edges = (0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>();
            graph_state_circuit(&Graph::new(n, &edges)?)
        }
        Family::WState => w_state_circuit(n),
    }
}

/// Hadamard followed by a CNOT chain; maps `|0..0>` to the GHZ state.
pub fn ghz_circuit<T: Real>(n: usize) -> Result<Circuit<T>> {
    let mut c = Circuit::new(n, format!("ghz-{n}"))?;
    c.push(Gate::h(0))?;
    for q in 0..n - 1 {
        c.push(Gate::cx(q, q + 1))?;
    }
    Ok(c)
}

/// Quantum Fourier transform: Hadamards with a controlled-phase ladder and
/// final qubit-reversal swaps. The matrix is the DFT with
/// `omega = exp(2*pi*i/2^n)`.
pub fn qft_circuit<T: Real>(n: usize) -> Result<Circuit<T>> {
    let mut c = Circuit::new(n, format!("qft-{n}"))?;
    for target in (0..n).rev() {
        c.push(Gate::h(target))?;
        for ctl in (0..target).rev() {
            let k = target - ctl;
            let theta = T::PI() / T::of((1u64 << k) as f64);
            c.push(Gate::cp(theta, ctl, target))?;
        }
    }
    for i in 0..n / 2 {
        c.push(Gate::swap(i, n - 1 - i))?;
    }
    Ok(c)
}

/// Deutsch-Jozsa instance with the balanced parity oracle over all inputs;
/// qubit `n-1` is the ancilla.
pub fn dj_circuit<T: Real>(n: usize) -> Result<Circuit<T>> {
    if n < 2 {
        return Err(Error::domain("dj needs at least 2 qubits"));
    }
    let anc = n - 1;
    let mut c = Circuit::new(n, format!("dj-{n}"))?;
    c.push(Gate::x(anc))?;
    for q in 0..n {
        c.push(Gate::h(q))?;
    }
    for q in 0..anc {
        c.push(Gate::cx(q, anc))?;
    }
    for q in 0..anc {
        c.push(Gate::h(q))?;
    }
    Ok(c)
}

/// `H` on every qubit followed by a CZ per edge.
pub fn graph_state_circuit<T: Real>(graph: &Graph) -> Result<Circuit<T>> {
    let n = graph.vertices();
    let mut c = Circuit::new(n, format!("graphstate-{n}"))?;
    for q in 0..n {
        c.push(Gate::h(q))?;
    }
    for &(u, v) in graph.edges() {
        c.push(Gate::cz(u, v))?;
    }
    Ok(c)
}

/// W-state preparation cascade. Maps `|0..0>` to the equal superposition
/// of all single-excitation basis states. Controlled rotations are emitted
/// pre-decomposed into `ry`/`cx` so the circuit stays inside the QASM
/// subset.
pub fn w_state_circuit<T: Real>(n: usize) -> Result<Circuit<T>> {
    if n < 2 {
        return Err(Error::domain("wstate needs at least 2 qubits"));
    }
    let mut c = Circuit::new(n, format!("wstate-{n}"))?;
    c.push(Gate::x(0))?;
    for i in 0..n - 1 {
        // Split amplitude sqrt((n-i)/n) on |1 at i> into sqrt(1/n) kept at
        // i and the rest moved to i+1.
        let keep = (T::one() / T::of((n - i) as f64)).sqrt();
        let theta = T::of(2.0) * keep.acos();
        let half = theta / T::of(2.0);
        // cry(theta) control i target i+1, decomposed exactly.
        c.push(Gate::ry(half, i + 1))?;
        c.push(Gate::cx(i, i + 1))?;
        c.push(Gate::ry(-half, i + 1))?;
        c.push(Gate::cx(i, i + 1))?;
        c.push(Gate::cx(i + 1, i))?;
    }
    Ok(c)
}

/// One Grover iteration `G`: the phase-flip oracle on `marked` followed by
/// the reflection `I - 2|psi><psi|` realized as `H^n`, a phase flip on
/// `|0..0>`, and `H^n`. Requires `1 <= |marked| <= 2^n / 2`.
pub fn grover_circuit<T: Real>(n: usize, marked: &BTreeSet<u64>) -> Result<Circuit<T>> {
    check_marked_set(n, marked)?;
    let mut c = Circuit::new(n, format!("grover-{n}"))?;
    c.push(Gate::phase_flip(n, marked.clone())?)?;
    for q in 0..n {
        c.push(Gate::h(q))?;
    }
    c.push(Gate::phase_flip(n, BTreeSet::from([0u64]))?)?;
    for q in 0..n {
        c.push(Gate::h(q))?;
    }
    Ok(c)
}

fn check_marked_set(n: usize, marked: &BTreeSet<u64>) -> Result<()> {
    let dim = 1u64 << n;
    if marked.is_empty() || marked.len() as u64 > dim / 2 {
        return Err(Error::domain(format!(
            "marked set size {} must be in 1..={}",
            marked.len(),
            dim / 2
        )));
    }
    if let Some(&bad) = marked.iter().find(|&&m| m >= dim) {
        return Err(Error::IndexOutOfRange { index: bad, n });
    }
    Ok(())
}

/// Grover iteration assembled from `x`/`h`/`cp`/`cx` only, for QASM export.
/// Same matrix as [`grover_circuit`]; gate count grows with `2^n`.
pub fn grover_circuit_elementary<T: Real>(n: usize, marked: &BTreeSet<u64>) -> Result<Circuit<T>> {
    check_marked_set(n, marked)?;
    let mut gates: Vec<Gate<T>> = Vec::new();
    for &m in marked {
        push_index_flip(n, m, &mut gates);
    }
    for q in 0..n {
        gates.push(Gate::h(q));
    }
    push_index_flip(n, 0, &mut gates);
    for q in 0..n {
        gates.push(Gate::h(q));
    }
    Circuit::with_gates(n, format!("grover-{n}"), gates)
}

/// Multiplies `|m>` by -1: X-conjugation onto `|1..1>` around a
/// multi-controlled Z.
fn push_index_flip<T: Real>(n: usize, m: u64, gates: &mut Vec<Gate<T>>) {
    let flips: Vec<usize> = (0..n).filter(|q| m & (1 << q) == 0).collect();
    for &q in &flips {
        gates.push(Gate::x(q));
    }
    let qubits: Vec<usize> = (0..n).collect();
    push_mcp(T::PI(), &qubits[..n - 1], n - 1, gates);
    for &q in &flips {
        gates.push(Gate::x(q));
    }
}

/// Multi-controlled phase from two-qubit `cp`/`cx` gates (exact, no
/// ancillas; gate count grows exponentially in the control count).
fn push_mcp<T: Real>(theta: T, controls: &[usize], target: usize, gates: &mut Vec<Gate<T>>) {
    match controls.len() {
        0 => gates.push(Gate::phase(theta, target)),
        1 => gates.push(Gate::cp(theta, controls[0], target)),
        k => {
            let half = theta / T::of(2.0);
            let last = controls[k - 1];
            let rest = &controls[..k - 1];
            gates.push(Gate::cp(half, last, target));
            push_mcx(rest, last, gates);
            gates.push(Gate::cp(-half, last, target));
            push_mcx(rest, last, gates);
            push_mcp(half, rest, target, gates);
        }
    }
}

fn push_mcx<T: Real>(controls: &[usize], target: usize, gates: &mut Vec<Gate<T>>) {
    match controls.len() {
        0 => gates.push(Gate::x(target)),
        1 => gates.push(Gate::cx(controls[0], target)),
        2 => gates.push(Gate::ccx(controls[0], controls[1], target)),
        _ => {
            gates.push(Gate::h(target));
            push_mcp(T::PI(), controls, target, gates);
            gates.push(Gate::h(target));
        }
    }
}

/// Boolean formula in conjunctive normal form with at most three literals
/// per clause. Literals are DIMACS-style nonzero integers: `+k` means
/// variable `k` true, `-k` negated; variable `k` is qubit `k-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatFormula {
    n_vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl SatFormula {
    pub fn new(n_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        if n_vars == 0 || clauses.is_empty() {
            return Err(Error::domain("formula needs variables and clauses"));
        }
        let mut used = vec![false; n_vars + 1];
        for clause in &clauses {
            if clause.is_empty() || clause.len() > 3 {
                return Err(Error::domain("clauses must have 1 to 3 literals"));
            }
            for &lit in clause {
                let var = lit.unsigned_abs() as usize;
                if lit == 0 || var > n_vars {
                    return Err(Error::domain(format!("literal {lit} out of range")));
                }
                used[var] = true;
            }
        }
        if let Some(missing) = (1..=n_vars).find(|&v| !used[v]) {
            return Err(Error::domain(format!(
                "variable {missing} appears in no clause"
            )));
        }
        Ok(SatFormula { n_vars, clauses })
    }

    pub fn variables(&self) -> usize {
        self.n_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// Number of clauses satisfied by the assignment encoded in `x`
    /// (variable `k` reads bit `k-1`).
    pub fn satisfied_clauses(&self, x: u64) -> u64 {
        self.clauses
            .iter()
            .filter(|clause| {
                clause.iter().any(|&lit| {
                    let bit = x >> (lit.unsigned_abs() - 1) & 1;
                    (lit > 0) == (bit == 1)
                })
            })
            .count() as u64
    }
}

/// Undirected unweighted graph on vertices `0..n`, no self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n_vertices: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::domain("graph needs at least one vertex"));
        }
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u == v {
                return Err(Error::domain(format!("self-loop at vertex {u}")));
            }
            if u >= n_vertices || v >= n_vertices {
                return Err(Error::domain(format!("edge ({u},{v}) out of range")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Graph {
            n_vertices,
            edges: set,
        })
    }

    pub fn vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Size of the cut induced by bitset `x` (vertex `i` reads bit `i`).
    pub fn cut_size(&self, x: u64) -> u64 {
        self.edges
            .iter()
            .filter(|&&(u, v)| (x >> u & 1) != (x >> v & 1))
            .count() as u64
    }
}

/// A problem Hamiltonian instance for phase-separation steps: diagonal with
/// `H |x> = score(x) |x>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QaoaProblem {
    Sat(SatFormula),
    MaxCut(Graph),
}

impl QaoaProblem {
    pub fn qubits(&self) -> usize {
        match self {
            QaoaProblem::Sat(f) => f.variables(),
            QaoaProblem::MaxCut(g) => g.vertices(),
        }
    }

    /// Satisfied-clause count or cut size of the assignment `x`.
    pub fn score(&self, x: u64) -> u64 {
        match self {
            QaoaProblem::Sat(f) => f.satisfied_clauses(x),
            QaoaProblem::MaxCut(g) => g.cut_size(x),
        }
    }

    /// Clause count (SAT) or edge count (MaxCut); written `M` in reports.
    pub fn size(&self) -> usize {
        match self {
            QaoaProblem::Sat(f) => f.clauses().len(),
            QaoaProblem::MaxCut(g) => g.edge_count(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            QaoaProblem::Sat(f) => format!("qaoa-sat-n{}-m{}", f.variables(), f.clauses().len()),
            QaoaProblem::MaxCut(g) => {
                format!("qaoa-maxcut-n{}-m{}", g.vertices(), g.edge_count())
            }
        }
    }
}

/// The phase-separation step `exp(-i * delta * H_P)` as a single diagonal
/// gate with angle `-delta * score(x)` per basis state.
pub fn qaoa_problem_step<T: Real>(problem: &Arc<QaoaProblem>, delta: T) -> Result<Circuit<T>> {
    if delta <= T::zero() {
        return Err(Error::domain("time step delta must be positive"));
    }
    let n = problem.qubits();
    let mut c = Circuit::new(n, problem.label())?;
    let p = problem.clone();
    c.push(Gate::diagonal_phase(
        n,
        Arc::new(move |x| -delta * T::of(p.score(x) as f64)),
    ))?;
    Ok(c)
}

/// Smallest `r >= 1` with `x^r = 1 (mod modulus)`, by plain modular
/// multiplication. Errors when `gcd(x, modulus) != 1`.
pub fn multiplicative_order(x: u64, modulus: u64) -> Result<u64> {
    if modulus < 2 || x < 2 || x >= modulus {
        return Err(Error::domain(format!(
            "order finding needs 2 <= x < N, got x={x}, N={modulus}"
        )));
    }
    if gcd(x, modulus) != 1 {
        return Err(Error::domain(format!(
            "x={x} and N={modulus} are not coprime"
        )));
    }
    let mut acc = x % modulus;
    let mut r = 1;
    while acc != 1 {
        acc = acc * x % modulus;
        r += 1;
    }
    Ok(r)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Modular-multiplication map `|y> -> |x*y mod N>` for `y < N`, identity on
/// `N <= y < 2^l`, as a permutation gate over `l = ceil(log2 N)` qubits.
pub fn order_finding_circuit<T: Real>(x: u64, modulus: u64) -> Result<Circuit<T>> {
    // Validates coprimality as a side effect.
    multiplicative_order(x, modulus)?;
    let l = (64 - (modulus - 1).leading_zeros()) as usize;
    let l = l.max(1);
    let dim = 1u64 << l;
    let table: Vec<u64> = (0..dim)
        .map(|y| if y < modulus { x * y % modulus } else { y })
        .collect();
    let mut c = Circuit::new(l, format!("orderfind-x{x}-n{modulus}"))?;
    c.push(Gate::permutation(l, table)?)?;
    Ok(c)
}

/// Random circuit over the elementary alphabet, for cross-validation runs.
pub fn random_circuit<T: Real, R: Rng>(n: usize, gates: usize, rng: &mut R) -> Result<Circuit<T>> {
    let mut c = Circuit::new(n, format!("random-{n}"))?;
    for _ in 0..gates {
        let q = rng.gen_range(0..n);
        let gate = match rng.gen_range(0..12) {
            0 => Gate::h(q),
            1 => Gate::x(q),
            2 => Gate::y(q),
            3 => Gate::z(q),
            4 => Gate::new(GateKind::S, vec![q], vec![]),
            5 => Gate::new(GateKind::T, vec![q], vec![]),
            6 => Gate::rx(T::of(rng.gen_range(-3.0..3.0)), q),
            7 => Gate::ry(T::of(rng.gen_range(-3.0..3.0)), q),
            8 => Gate::phase(T::of(rng.gen_range(-3.0..3.0)), q),
            9 if n >= 2 => {
                let c2 = pick_other(n, q, rng);
                Gate::cx(c2, q)
            }
            10 if n >= 2 => {
                let c2 = pick_other(n, q, rng);
                Gate::cz(c2, q)
            }
            11 if n >= 3 => {
                let c1 = pick_other(n, q, rng);
                let mut c2 = pick_other(n, q, rng);
                while c2 == c1 {
                    c2 = pick_other(n, q, rng);
                }
                Gate::ccx(c1, c2, q)
            }
            _ => Gate::h(q),
        };
        c.push(gate)?;
    }
    Ok(c)
}

fn pick_other<R: Rng>(n: usize, q: usize, rng: &mut R) -> usize {
    loop {
        let c = rng.gen_range(0..n);
        if c != q {
            return c;
        }
    }
}

/// Random CNF instance: clause count uniform in `[n, 3n]`, at most three
/// distinct variables per clause, and every variable covered.
pub fn random_sat_formula<R: Rng>(n: usize, rng: &mut R) -> Result<SatFormula> {
    assert!(n >= 2, "random SAT needs at least 2 variables");
    let m = rng.gen_range(n..=3 * n);
    let mut clauses: Vec<Vec<i32>> = Vec::with_capacity(m);
    for _ in 0..m {
        let width = rng.gen_range(1..=3.min(n));
        let mut vars = BTreeSet::new();
        while vars.len() < width {
            vars.insert(rng.gen_range(1..=n) as i32);
        }
        clauses.push(
            vars.into_iter()
                .map(|v| if rng.gen_bool(0.5) { v } else { -v })
                .collect(),
        );
    }
    // Patch any uncovered variable into a literal slot whose variable
    // occurs more than once, so coverage never regresses. Such a slot
    // always exists while a variable is missing (M >= n literals over
    // fewer than n distinct variables).
    let mut occurrences = vec![0usize; n + 1];
    for clause in &clauses {
        for &lit in clause {
            occurrences[lit.unsigned_abs() as usize] += 1;
        }
    }
    for var in 1..=n {
        if occurrences[var] > 0 {
            continue;
        }
        let start = rng.gen_range(0..clauses.len());
        let sign = rng.gen_bool(0.5);
        'patch: for step in 0..clauses.len() {
            let ci = (start + step) % clauses.len();
            for li in 0..clauses[ci].len() {
                let old = clauses[ci][li].unsigned_abs() as usize;
                let clause_has_var = clauses[ci]
                    .iter()
                    .any(|&l| l.unsigned_abs() as usize == var);
                if occurrences[old] >= 2 && !clause_has_var {
                    occurrences[old] -= 1;
                    occurrences[var] += 1;
                    clauses[ci][li] = if sign { var as i32 } else { -(var as i32) };
                    break 'patch;
                }
            }
        }
    }
    SatFormula::new(n, clauses)
}

/// Erdős–Rényi graph with edge probability `p`; resampled until it has at
/// least one edge so the induced Hamiltonian is nontrivial.
pub fn random_max_cut<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    assert!(n >= 2, "random MaxCut needs at least 2 vertices");
    loop {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        if !edges.is_empty() {
            return Graph::new(n, &edges);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseState;
    use crate::scalar::C;
    use num_complex::Complex;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type C64 = C<f64>;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Reference matrix built entrywise: G|x> = (-1)^{f(x)} (I - 2|psi><psi|)|x>.
    fn grover_reference(n: usize, marked: &BTreeSet<u64>) -> crate::dense::DenseMatrix<f64> {
        let dim = 1usize << n;
        let mut m = crate::dense::DenseMatrix::zeros(dim, dim);
        for col in 0..dim {
            let sign = if marked.contains(&(col as u64)) {
                -1.0
            } else {
                1.0
            };
            for row in 0..dim {
                let reflect = if row == col { 1.0 } else { 0.0 } - 2.0 / dim as f64;
                m.set(row, col, c(sign * reflect, 0.0));
            }
        }
        m
    }

    #[test]
    fn grover_matches_reference_matrix() {
        for n in 2..=5usize {
            let marked = BTreeSet::from([1u64, 3u64]);
            let circ = grover_circuit::<f64>(n, &marked).unwrap();
            let got = circ.unitary_matrix().unwrap();
            let expect = grover_reference(n, &marked);
            assert!(
                got.max_abs_diff(&expect).unwrap() < 1e-12,
                "grover mismatch at n={n}"
            );
        }
    }

    #[test]
    fn grover_elementary_matches_reference_matrix() {
        for n in 2..=5usize {
            let marked = BTreeSet::from([(1u64 << n) - 1]);
            let circ = grover_circuit_elementary::<f64>(n, &marked).unwrap();
            let got = circ.unitary_matrix().unwrap();
            let expect = grover_reference(n, &marked);
            assert!(
                got.max_abs_diff(&expect).unwrap() < 1e-12,
                "elementary grover mismatch at n={n}"
            );
        }
    }

    #[test]
    fn grover_rejects_oversized_marked_set() {
        let marked: BTreeSet<u64> = [0u64, 1, 2].into_iter().collect();
        assert!(grover_circuit::<f64>(2, &marked).is_err());
        assert!(grover_circuit::<f64>(2, &BTreeSet::new()).is_err());
    }

    #[test]
    fn qft_matches_dft_matrix() {
        let n = 3;
        let dim = 1usize << n;
        let circ = qft_circuit::<f64>(n).unwrap();
        let got = circ.unitary_matrix().unwrap();
        let norm = 1.0 / (dim as f64).sqrt();
        for row in 0..dim {
            for col in 0..dim {
                let angle = 2.0 * std::f64::consts::PI * (row * col) as f64 / dim as f64;
                let expect = Complex::from_polar(norm, angle);
                assert!(
                    (got.get(row, col) - expect).norm() < 1e-12,
                    "dft mismatch at ({row},{col})"
                );
            }
        }
    }

    #[test]
    fn qft_maps_zero_to_uniform_and_back() {
        let n = 6;
        let circ = qft_circuit::<f64>(n).unwrap();
        let zero = DenseState::basis(n, 0).unwrap();
        let psi = circ.apply_dense(&zero).unwrap();
        assert!(
            psi.max_abs_diff(&DenseState::uniform(n).unwrap()).unwrap() < 1e-12,
            "qft|0> should be uniform"
        );
        let back = circ.apply_dense(&psi).unwrap();
        assert!(back.max_abs_diff(&zero).unwrap() < 1e-12);
    }

    #[test]
    fn w_state_amplitudes() {
        for n in 2..=6usize {
            let circ = w_state_circuit::<f64>(n).unwrap();
            let out = circ.apply_dense(&DenseState::basis(n, 0).unwrap()).unwrap();
            let w = 1.0 / (n as f64).sqrt();
            for (idx, amp) in out.amplitudes().iter().enumerate() {
                let expect = if idx.count_ones() == 1 { w } else { 0.0 };
                assert!(
                    (amp - c(expect, 0.0)).norm() < 1e-12,
                    "n={n} index {idx}: got {amp}"
                );
            }
        }
    }

    #[test]
    fn sat_scoring_matches_hand_counts() {
        // (x1 or x2) and (not x1 or x3) and (x2)
        let f = SatFormula::new(3, vec![vec![1, 2], vec![-1, 3], vec![2]]).unwrap();
        // x = 0b010 -> x1=0, x2=1, x3=0: clauses sat: 1st (x2), 2nd (not x1), 3rd (x2).
        assert_eq!(f.satisfied_clauses(0b010), 3);
        // x = 0b001 -> x1=1: 1st sat, 2nd unsat, 3rd unsat.
        assert_eq!(f.satisfied_clauses(0b001), 1);
        assert_eq!(f.satisfied_clauses(0b000), 1);
    }

    #[test]
    fn sat_rejects_uncovered_variable() {
        assert!(SatFormula::new(3, vec![vec![1, 2]]).is_err());
        assert!(SatFormula::new(2, vec![vec![1, -1, 2, 2]]).is_err());
        assert!(SatFormula::new(2, vec![vec![0], vec![1, 2]]).is_err());
    }

    #[test]
    fn maxcut_k2_case_table() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        assert_eq!(g.cut_size(0b00), 0);
        assert_eq!(g.cut_size(0b01), 1);
        assert_eq!(g.cut_size(0b10), 1);
        assert_eq!(g.cut_size(0b11), 0);
    }

    #[test]
    fn qaoa_step_is_the_expected_diagonal() {
        // Single clause (x1): score(0)=0, score(1)=1 -> diag(1, e^{-i delta}).
        let f = SatFormula::new(1, vec![vec![1]]).unwrap();
        let problem = Arc::new(QaoaProblem::Sat(f));
        let delta = 0.1;
        let circ = qaoa_problem_step::<f64>(&problem, delta).unwrap();
        let m = circ.unitary_matrix().unwrap();
        assert!((m.get(0, 0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((m.get(1, 1) - Complex::from_polar(1.0, -delta)).norm() < 1e-15);
        assert!(m.get(0, 1).norm() < 1e-15);
        assert!(m.unitarity_residual().unwrap() < 1e-15);
        assert!(qaoa_problem_step::<f64>(&problem, 0.0).is_err());
    }

    #[test]
    fn qaoa_steps_compose_additively() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let formula = random_sat_formula(4, &mut rng).unwrap();
        let problem = Arc::new(QaoaProblem::Sat(formula));
        let delta = 0.1;
        let one = qaoa_problem_step::<f64>(&problem, delta).unwrap();
        let triple = qaoa_problem_step::<f64>(&problem, 3.0 * delta).unwrap();
        let mut state = DenseState::uniform(4).unwrap();
        for _ in 0..3 {
            state = one.apply_dense(&state).unwrap();
        }
        let direct = triple
            .apply_dense(&DenseState::uniform(4).unwrap())
            .unwrap();
        assert!(state.max_abs_diff(&direct).unwrap() < 1e-12);
    }

    #[test]
    fn multiplicative_order_known_values() {
        assert_eq!(multiplicative_order(2, 15).unwrap(), 4);
        assert_eq!(multiplicative_order(7, 15).unwrap(), 4);
        assert_eq!(multiplicative_order(2, 21).unwrap(), 6);
        assert_eq!(multiplicative_order(4, 5).unwrap(), 2);
        assert!(multiplicative_order(2, 4).is_err());
        assert!(multiplicative_order(1, 5).is_err());
    }

    #[test]
    fn order_finding_permutation_orbits() {
        // x=2, N=3 on 2 qubits: 1 -> 2 -> 1, 0 and 3 fixed.
        let circ = order_finding_circuit::<f64>(2, 3).unwrap();
        let s1 = circ.apply_dense(&DenseState::basis(2, 1).unwrap()).unwrap();
        assert_eq!(s1.amplitude(2).unwrap(), c(1.0, 0.0));
        let s3 = circ.apply_dense(&DenseState::basis(2, 3).unwrap()).unwrap();
        assert_eq!(s3.amplitude(3).unwrap(), c(1.0, 0.0));

        // x=4, N=5: |1> -> |4> -> |1> (order-2 orbit).
        let circ = order_finding_circuit::<f64>(4, 5).unwrap();
        let s = circ.apply_dense(&DenseState::basis(3, 1).unwrap()).unwrap();
        assert_eq!(s.amplitude(4).unwrap(), c(1.0, 0.0));
        let s = circ.apply_dense(&s).unwrap();
        assert_eq!(s.amplitude(1).unwrap(), c(1.0, 0.0));

        assert!(order_finding_circuit::<f64>(2, 4).is_err());
    }

    #[test]
    fn order_finding_circuit_is_unitary() {
        let circ = order_finding_circuit::<f64>(2, 15).unwrap();
        assert!(circ.unitary_matrix().unwrap().unitarity_residual().unwrap() < 1e-15);
    }

    #[test]
    fn random_instances_respect_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let n = rand::Rng::gen_range(&mut rng, 3..=8usize);
            let f = random_sat_formula(n, &mut rng).unwrap();
            assert!(f.clauses().len() >= n && f.clauses().len() <= 3 * n);
            let g = random_max_cut(n, 1.0 / 3.0, &mut rng).unwrap();
            assert!(g.edge_count() >= 1);
        }
    }

    #[test]
    fn family_dispatch_and_bad_names() {
        for fam in [
            Family::Ghz,
            Family::Qft,
            Family::Dj,
            Family::GraphState,
            Family::WState,
        ] {
            let circ = family_circuit::<f64>(fam, 4).unwrap();
            assert_eq!(circ.qubits(), 4);
            assert!(family_circuit::<f64>(fam, 1).is_err());
        }
        assert!("nosuch".parse::<Family>().is_err());
        assert_eq!("GHZ".parse::<Family>().unwrap(), Family::Ghz);
    }
}
