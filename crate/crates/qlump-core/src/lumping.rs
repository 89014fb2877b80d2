//! Constrained-bisimulation reduction.
//!
//! Given a circuit `U` and a constraint subspace spanned by seed states,
//! both procedures below compute an orthonormal basis `v_0 .. v_{d-1}` of
//! the smallest `U`-invariant subspace containing the seeds, together with
//! the reduced map `U_hat[i][j] = <v_i | U v_j>`:
//!
//! * [`lump_krylov`] builds each seed's power sequence `z, Uz, U^2 z, ...`
//!   and orthogonalizes it by modified Gram-Schmidt, stopping the seed at
//!   the first dependent vector; multiple seeds accumulate into one basis.
//! * [`lump_residual`] scans the growing column list, projects `U z` onto
//!   the current span through `P = L† L`, and appends the normalized
//!   residual while any remains.
//!
//! Interpreting the basis as rows `v_i†` gives the forward reduction
//! (measurements onto the subspace are preserved for any input);
//! interpreting it as columns `v_i` gives the backward reduction (inputs
//! inside the subspace are recoverable exactly). [`check_fcb`] and
//! [`check_bcb`] verify the two invariance conditions independently, and
//! [`minimality_certificate`] cross-checks the dimension against a
//! brute-force Krylov rank oracle.


use crate::circuit::Circuit;
use crate::dense::{DenseMatrix, DenseState, DENSE_UNITARY_CAP_QUBITS};
use crate::error::{Deadline, Error, Result};
use crate::scalar::{Real, TolerancePolicy, C};
use crate::state::{Backend, BackendKind, QuantumState};

/// Default cap on the reduced dimension.
pub const DEFAULT_D_MAX: usize = 4096;

/// Largest qubit count for the brute-force rank oracle.
pub const ORACLE_CAP_QUBITS: usize = 10;

/// Seed states spanning the constraint subspace.
#[derive(Debug, Clone)]
pub enum SubspaceSpec<T> {
    /// `|0...0>`.
    Ket0,
    /// The uniform superposition.
    Uniform,
    /// `|1>` (the order-finding seed).
    Ket1,
    /// Explicit basis indices, one seed per index.
    Indices(Vec<u64>),
    /// Explicit dense seed vectors.
    Vectors(Vec<DenseState<T>>),
}

impl<T: Real> SubspaceSpec<T> {
    pub fn materialize<B: Backend<T>>(&self, backend: &B, n: usize) -> Result<Vec<B::State>> {
        match self {
            SubspaceSpec::Ket0 => Ok(vec![backend.basis_state(n, 0)?]),
            SubspaceSpec::Uniform => Ok(vec![backend.uniform_state(n)?]),
            SubspaceSpec::Ket1 => Ok(vec![backend.basis_state(n, 1)?]),
            SubspaceSpec::Indices(list) => {
                if list.is_empty() {
                    return Err(Error::domain("seed index list is empty"));
                }
                list.iter()
                    .map(|&idx| backend.basis_state(n, idx))
                    .collect()
            }
            SubspaceSpec::Vectors(vecs) => {
                if vecs.is_empty() {
                    return Err(Error::domain("seed vector list is empty"));
                }
                vecs.iter()
                    .map(|v| {
                        if v.qubits() != n {
                            return Err(Error::dim(format!(
                                "seed over {} qubits for an {n}-qubit circuit",
                                v.qubits()
                            )));
                        }
                        backend.encode(v)
                    })
                    .collect()
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SubspaceSpec::Ket0 => "ket0".into(),
            SubspaceSpec::Uniform => "psi".into(),
            SubspaceSpec::Ket1 => "ket1".into(),
            SubspaceSpec::Indices(list) => {
                let items: Vec<String> = list.iter().map(u64::to_string).collect();
                format!("indices:{}", items.join(","))
            }
            SubspaceSpec::Vectors(vecs) => format!("vectors:{}", vecs.len()),
        }
    }
}

impl<T: Real> std::str::FromStr for SubspaceSpec<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ket0" => Ok(SubspaceSpec::Ket0),
            "psi" | "uniform" => Ok(SubspaceSpec::Uniform),
            "ket1" => Ok(SubspaceSpec::Ket1),
            other => {
                if let Some(rest) = other.strip_prefix("indices:") {
                    let indices = rest
                        .split(',')
                        .map(|tok| {
                            tok.trim()
                                .parse::<u64>()
                                .map_err(|_| Error::domain(format!("bad seed index '{tok}'")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    if indices.is_empty() {
                        return Err(Error::domain("empty seed index list"));
                    }
                    Ok(SubspaceSpec::Indices(indices))
                } else {
                    Err(Error::domain(format!("unknown seed spec '{other}'")))
                }
            }
        }
    }
}

/// Orthonormal state list spanning the computed invariant subspace.
/// Row interpretation (`v_i†`) is the forward reduction; column
/// interpretation (`v_i`) the backward one.
#[derive(Debug, Clone)]
pub struct LumpingBasis<S> {
    n: usize,
    vectors: Vec<S>,
    backend: BackendKind,
}

impl<S> LumpingBasis<S> {
    pub fn d(&self) -> usize {
        self.vectors.len()
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn vectors(&self) -> &[S] {
        &self.vectors
    }

    pub fn backend(&self) -> BackendKind {
        self.backend
    }

    pub fn from_vectors<T: Real>(vectors: Vec<S>, backend: BackendKind) -> Result<Self>
    where
        S: QuantumState<T>,
    {
        let n = vectors
            .first()
            .map(|v| v.qubits())
            .ok_or_else(|| Error::domain("basis must contain at least one vector"))?;
        if vectors.iter().any(|v| v.qubits() != n) {
            return Err(Error::dim("basis vectors of mixed qubit counts"));
        }
        Ok(LumpingBasis {
            n,
            vectors,
            backend,
        })
    }

    /// `max_{i,j} | <v_i|v_j> - delta_ij |`.
    pub fn orthonormality_residual<T: Real>(&self) -> Result<T>
    where
        S: QuantumState<T>,
    {
        let mut worst = T::zero();
        for i in 0..self.vectors.len() {
            for j in i..self.vectors.len() {
                let ip = self.vectors[i].inner_product(&self.vectors[j])?;
                let expect = if i == j { T::one() } else { T::zero() };
                worst = worst.max((ip - C::new(expect, T::zero())).norm());
            }
        }
        Ok(worst)
    }
}

/// A computed reduction: the basis, the reduced unitary, and provenance.
#[derive(Debug, Clone)]
pub struct ReducedSystem<T, S> {
    basis: LumpingBasis<S>,
    u_hat: DenseMatrix<T>,
    seeds: Vec<String>,
    circuit_name: String,
    tol: TolerancePolicy<T>,
}

impl<T: Real, S: QuantumState<T>> ReducedSystem<T, S> {
    pub fn d(&self) -> usize {
        self.basis.d()
    }

    pub fn qubits(&self) -> usize {
        self.basis.qubits()
    }

    pub fn basis(&self) -> &LumpingBasis<S> {
        &self.basis
    }

    pub fn u_hat(&self) -> &DenseMatrix<T> {
        &self.u_hat
    }

    pub fn seeds(&self) -> &[String] {
        &self.seeds
    }

    pub fn circuit_name(&self) -> &str {
        &self.circuit_name
    }

    pub fn tolerances(&self) -> &TolerancePolicy<T> {
        &self.tol
    }

    /// Reduction ratio `d / 2^n` as a percentage.
    pub fn reduction_ratio_percent(&self) -> f64 {
        let n = self.basis.qubits();
        100.0 * self.basis.d() as f64 / (1u64 << n) as f64
    }

    /// Residual of `U_hat† U_hat - I`.
    pub fn unitarity_residual(&self) -> Result<T> {
        self.u_hat.unitarity_residual()
    }
}

/// Extra controls for a reduction run.
#[derive(Debug, Clone, Copy)]
pub struct LumpOptions {
    pub d_max: usize,
    pub deadline: Option<Deadline>,
}

impl Default for LumpOptions {
    fn default() -> Self {
        LumpOptions {
            d_max: DEFAULT_D_MAX,
            deadline: None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum GramSchmidt {
    /// Sequentially updated projections (used by the Krylov procedure).
    Modified,
    /// One-shot projection through `P = L† L` (the residual procedure).
    Classical,
}

/// Orthogonalizes `u` against `basis`, returning the residual together
/// with its norm and the pre-orthogonalization norm. A second pass runs
/// when cancellation removed more than half the mass.
fn orthogonalize<T: Real, S: QuantumState<T>>(
    u: &S,
    basis: &[S],
    mode: GramSchmidt,
) -> Result<(S, T, T)> {
    let pre = u.norm();
    let mut w = project_pass(u, basis, mode)?;
    let mut res = w.norm();
    if !basis.is_empty() && res < pre / T::of(2.0).sqrt() {
        w = project_pass(&w, basis, mode)?;
        res = w.norm();
    }
    Ok((w, res, pre))
}

fn project_pass<T: Real, S: QuantumState<T>>(u: &S, basis: &[S], mode: GramSchmidt) -> Result<S> {
    match mode {
        GramSchmidt::Modified => {
            let mut w = u.clone();
            for v in basis {
                let coeff = v.inner_product(&w)?;
                w = w.axpy(-coeff, v)?;
            }
            Ok(w)
        }
        GramSchmidt::Classical => {
            let coeffs: Vec<C<T>> = basis
                .iter()
                .map(|v| v.inner_product(u))
                .collect::<Result<_>>()?;
            let mut w = u.clone();
            for (v, coeff) in basis.iter().zip(coeffs) {
                w = w.axpy(-coeff, v)?;
            }
            Ok(w)
        }
    }
}

fn normalize_seed<T: Real, S: QuantumState<T>>(seed: &S) -> Result<S> {
    let nrm = seed.norm();
    if nrm.is_zero() {
        return Err(Error::domain("seed state is the zero vector"));
    }
    Ok(seed.scale(C::new(T::one() / nrm, T::zero())))
}

/// Compacts the basis together with the in-flight iterate, dropping the
/// transient storage built during the last step.
fn compact_with<T: Real, S: QuantumState<T>>(vectors: &mut Vec<S>, u: S) -> Result<S> {
    vectors.push(u);
    S::compact_group(vectors)?;
    Ok(vectors.pop().expect("iterate just pushed"))
}

fn dependence_cutoff<T: Real>(tol: &TolerancePolicy<T>, pre: T) -> T {
    // Relative test guards against amplitude growth in long iterations.
    tol.eps_rank * T::one().max(pre)
}

/// Krylov/Gram-Schmidt reduction: per seed, iterate the power sequence and
/// orthogonalize each vector against everything accepted so far; a seed
/// stops at its first dependent vector. The first seed is always admitted
/// (normalized), so the constraint subspace is contained in the span.
pub fn lump_krylov<T: Real, B: Backend<T>>(
    backend: &B,
    circuit: &Circuit<T>,
    spec: &SubspaceSpec<T>,
    tol: &TolerancePolicy<T>,
    d_max: usize,
) -> Result<ReducedSystem<T, B::State>> {
    lump_krylov_opts(
        backend,
        circuit,
        spec,
        tol,
        LumpOptions {
            d_max,
            ..LumpOptions::default()
        },
    )
}

pub fn lump_krylov_opts<T: Real, B: Backend<T>>(
    backend: &B,
    circuit: &Circuit<T>,
    spec: &SubspaceSpec<T>,
    tol: &TolerancePolicy<T>,
    opts: LumpOptions,
) -> Result<ReducedSystem<T, B::State>> {
    tol.validate()?;
    let n = circuit.qubits();
    let seeds = spec.materialize(backend, n)?;
    let mut vectors: Vec<B::State> = Vec::new();
    for seed in &seeds {
        let mut u = normalize_seed(seed)?;
        loop {
            if let Some(deadline) = &opts.deadline {
                deadline.check()?;
            }
            let (w, res, pre) = orthogonalize(&u, &vectors, GramSchmidt::Modified)?;
            if res < dependence_cutoff(tol, pre) {
                break;
            }
            if vectors.len() >= opts.d_max {
                return Err(Error::capacity(
                    format!("reduced dimension exceeds d_max = {}", opts.d_max),
                    Some(vectors.len()),
                ));
            }
            vectors.push(w.scale(C::new(T::one() / res, T::zero())));
            u = u.apply_circuit(circuit)?;
            u = compact_with(&mut vectors, u)?;
        }
    }
    finish_reduction(backend, circuit, spec, tol, vectors, opts.deadline)
}

/// Residual-projection reduction: initialize the columns with an
/// orthonormal basis of the seeds, then for each column `z` in the growing
/// list project `U z` onto the current span and append the normalized
/// residual when one remains.
pub fn lump_residual<T: Real, B: Backend<T>>(
    backend: &B,
    circuit: &Circuit<T>,
    spec: &SubspaceSpec<T>,
    tol: &TolerancePolicy<T>,
    d_max: usize,
) -> Result<ReducedSystem<T, B::State>> {
    lump_residual_opts(
        backend,
        circuit,
        spec,
        tol,
        LumpOptions {
            d_max,
            ..LumpOptions::default()
        },
    )
}

pub fn lump_residual_opts<T: Real, B: Backend<T>>(
    backend: &B,
    circuit: &Circuit<T>,
    spec: &SubspaceSpec<T>,
    tol: &TolerancePolicy<T>,
    opts: LumpOptions,
) -> Result<ReducedSystem<T, B::State>> {
    tol.validate()?;
    let n = circuit.qubits();
    let seeds = spec.materialize(backend, n)?;
    let mut columns: Vec<B::State> = Vec::new();
    for seed in &seeds {
        let u = normalize_seed(seed)?;
        let (w, res, pre) = orthogonalize(&u, &columns, GramSchmidt::Classical)?;
        if res >= dependence_cutoff(tol, pre) {
            columns.push(w.scale(C::new(T::one() / res, T::zero())));
        }
    }
    if columns.is_empty() {
        return Err(Error::domain("constraint subspace collapsed to zero"));
    }
    // Scan the growing list; appended residuals are processed too, so one
    // sweep reaches the fixpoint.
    let mut i = 0;
    while i < columns.len() {
        if let Some(deadline) = &opts.deadline {
            deadline.check()?;
        }
        let u_z = columns[i].apply_circuit(circuit)?;
        let (w, res, pre) = orthogonalize(&u_z, &columns, GramSchmidt::Classical)?;
        if res >= dependence_cutoff(tol, pre) {
            if columns.len() >= opts.d_max {
                return Err(Error::capacity(
                    format!("reduced dimension exceeds d_max = {}", opts.d_max),
                    Some(columns.len()),
                ));
            }
            columns.push(w.scale(C::new(T::one() / res, T::zero())));
        }
        B::State::compact_group(&mut columns)?;
        i += 1;
    }
    finish_reduction(backend, circuit, spec, tol, columns, opts.deadline)
}

fn finish_reduction<T: Real, B: Backend<T>>(
    backend: &B,
    circuit: &Circuit<T>,
    spec: &SubspaceSpec<T>,
    tol: &TolerancePolicy<T>,
    vectors: Vec<B::State>,
    deadline: Option<Deadline>,
) -> Result<ReducedSystem<T, B::State>> {
    let d = vectors.len();
    if d == 0 {
        return Err(Error::domain("reduction produced an empty basis"));
    }
    // U_hat[i][j] = <v_i | U v_j>: one circuit application per basis vector.
    let mut vectors = vectors;
    let mut u_hat = DenseMatrix::zeros(d, d);
    for j in 0..d {
        if let Some(deadline) = &deadline {
            deadline.check()?;
        }
        let u_vj = vectors[j].apply_circuit(circuit)?;
        for (i, v_i) in vectors.iter().enumerate() {
            u_hat.set(i, j, v_i.inner_product(&u_vj)?);
        }
        drop(u_vj);
        B::State::compact_group(&mut vectors)?;
    }
    Ok(ReducedSystem {
        basis: LumpingBasis {
            n: circuit.qubits(),
            vectors,
            backend: backend.kind(),
        },
        u_hat,
        seeds: vec![spec.describe()],
        circuit_name: circuit.name().to_string(),
        tol: *tol,
    })
}

/// Forward-invariance residual: `max_i || (I - P) U† v_i ||` where `P`
/// projects onto the basis span. A value within the normalization
/// tolerance certifies the forward condition.
pub fn check_fcb<T: Real, S: QuantumState<T>>(
    basis: &LumpingBasis<S>,
    circuit: &Circuit<T>,
) -> Result<T> {
    invariance_residual(basis, &circuit.inverse())
}

/// Backward-invariance residual: `max_i || (I - P) U v_i ||`.
pub fn check_bcb<T: Real, S: QuantumState<T>>(
    basis: &LumpingBasis<S>,
    circuit: &Circuit<T>,
) -> Result<T> {
    invariance_residual(basis, circuit)
}

fn invariance_residual<T: Real, S: QuantumState<T>>(
    basis: &LumpingBasis<S>,
    circuit: &Circuit<T>,
) -> Result<T> {
    let mut worst = T::zero();
    for v in basis.vectors() {
        let w = v.apply_circuit(circuit)?;
        let (_, res, _) = orthogonalize(&w, basis.vectors(), GramSchmidt::Modified)?;
        worst = worst.max(res);
    }
    Ok(worst)
}

/// Frobenius norm of `(I - P_B) A`, an upper bound on the sine of the
/// largest principal angle between the spans when the dimensions agree.
/// Neither list needs to be orthonormal; `b` is orthonormalized
/// internally before projecting.
pub fn subspace_residual<T: Real, S: QuantumState<T>>(a: &[S], b: &[S]) -> Result<T> {
    let mut frame: Vec<S> = Vec::with_capacity(b.len());
    for v in b {
        let (w, res, pre) = orthogonalize(v, &frame, GramSchmidt::Modified)?;
        if res > T::of(1e-10) * T::one().max(pre) {
            frame.push(w.scale(C::new(T::one() / res, T::zero())));
        }
    }
    let mut acc = T::zero();
    for v in a {
        let (_, res, _) = orthogonalize(v, &frame, GramSchmidt::Modified)?;
        acc += res * res;
    }
    Ok(acc.sqrt())
}

/// Symmetric bound on the principal angles between two spans.
pub fn principal_angle_bound<T: Real, S: QuantumState<T>>(a: &[S], b: &[S]) -> Result<T> {
    Ok(subspace_residual(a, b)?.max(subspace_residual(b, a)?))
}

/// Outcome of the brute-force minimality oracle.
#[derive(Debug, Clone)]
pub struct MinimalityReport<T> {
    pub reduced_d: usize,
    pub oracle_rank: usize,
    pub principal_angle_bound: T,
    pub pass: bool,
}

/// Brute-force oracle: build the full Krylov matrix
/// `[z, Uz, ..., U^{2^n - 1} z]` for every seed, take its numerical rank
/// by column-pivoted orthogonalization with the rank cutoff, and compare
/// with the reduced basis (dimension and span).
pub fn minimality_certificate<T: Real, S: QuantumState<T>>(
    reduced: &ReducedSystem<T, S>,
    circuit: &Circuit<T>,
    spec: &SubspaceSpec<T>,
    tol: &TolerancePolicy<T>,
) -> Result<MinimalityReport<T>> {
    let n = circuit.qubits();
    if n > ORACLE_CAP_QUBITS {
        return Err(Error::capacity(
            format!("rank oracle over {n} qubits (cap {ORACLE_CAP_QUBITS})"),
            None,
        ));
    }
    let backend = crate::state::DenseBackend;
    let seeds = spec.materialize(&backend, n)?;
    let dim = 1usize << n;
    let mut columns: Vec<DenseState<T>> = Vec::with_capacity(dim * seeds.len());
    for seed in &seeds {
        let mut u = normalize_seed(seed)?;
        for _ in 0..dim {
            columns.push(u.clone());
            u = circuit.apply_dense(&u)?;
        }
    }
    let pivots = column_pivoted_rank(&mut columns, tol.eps_rank)?;
    let oracle_rank = pivots.len();

    // Compare spans (reduced basis decoded onto the dense backend).
    let reduced_dense: Vec<DenseState<T>> = reduced
        .basis()
        .vectors()
        .iter()
        .map(|v| v.to_dense())
        .collect::<Result<_>>()?;
    let angle = principal_angle_bound(&reduced_dense, &pivots)?;
    let pass = oracle_rank == reduced.d() && angle < T::of(1e-8);
    Ok(MinimalityReport {
        reduced_d: reduced.d(),
        oracle_rank,
        principal_angle_bound: angle,
        pass,
    })
}

/// Repeatedly pivots on the residual column of largest norm; stops when
/// every remaining residual is below the cutoff. Returns the orthonormal
/// pivot vectors.
fn column_pivoted_rank<T: Real>(
    columns: &mut [DenseState<T>],
    eps_rank: T,
) -> Result<Vec<DenseState<T>>> {
    let mut pivots: Vec<DenseState<T>> = Vec::new();
    let mut alive: Vec<usize> = (0..columns.len()).collect();
    loop {
        let mut best: Option<(usize, T)> = None;
        for (slot, &ci) in alive.iter().enumerate() {
            let nrm = columns[ci].norm();
            if best.is_none_or(|(_, b)| nrm > b) {
                best = Some((slot, nrm));
            }
        }
        let Some((slot, nrm)) = best else { break };
        // Krylov columns start with unit norm, so the cutoff is absolute.
        if nrm < eps_rank {
            break;
        }
        let ci = alive.swap_remove(slot);
        let q = columns[ci].scale(C::new(T::one() / nrm, T::zero()));
        for &cj in &alive {
            let coeff = q.inner_product(&columns[cj])?;
            columns[cj] = columns[cj].axpy(-coeff, &q)?;
        }
        pivots.push(q);
    }
    Ok(pivots)
}

/// Builds the full-space map `L† B L + (I - L† L)` where `B` is the
/// matrix phase exponential `exp(-i * delta * H)` of a Hermitian `H` in
/// the reduced space; the orthogonal complement evolves as identity. The
/// result commutes with the reduction (`L U_B = B L`), so the span stays
/// invariant under interleaved mixing stages.
pub fn construct_begin_hamiltonian<T: Real>(
    basis: &LumpingBasis<DenseState<T>>,
    h_hat: &DenseMatrix<T>,
    delta: T,
    tol: &TolerancePolicy<T>,
) -> Result<DenseMatrix<T>> {
    let n = basis.qubits();
    if n > DENSE_UNITARY_CAP_QUBITS {
        return Err(Error::capacity(
            format!("full-space mixing map over {n} qubits (cap {DENSE_UNITARY_CAP_QUBITS})"),
            None,
        ));
    }
    let d = basis.d();
    if h_hat.rows() != d || h_hat.cols() != d {
        return Err(Error::dim(format!(
            "reduced Hamiltonian is {}x{}, basis dimension is {d}",
            h_hat.rows(),
            h_hat.cols()
        )));
    }
    if h_hat.hermiticity_residual()? > tol.eps_amp {
        return Err(Error::domain("reduced Hamiltonian is not Hermitian"));
    }
    let u_hat_b = h_hat.hermitian_phase_exp(delta, tol.eps_amp)?;

    let dim = 1usize << n;
    // L as a d x N matrix of conjugated basis vectors.
    let mut l = DenseMatrix::zeros(d, dim);
    for (i, v) in basis.vectors().iter().enumerate() {
        for (x, amp) in v.amplitudes().iter().enumerate() {
            l.set(i, x, amp.conj());
        }
    }
    let l_dag = l.dagger();
    // U_B = L† B L + I - L† L (the complement completion acts as identity).
    let bl = u_hat_b.mat_mul(&l)?;
    let first = l_dag.mat_mul(&bl)?;
    let p = l_dag.mat_mul(&l)?;
    let mut u_b = DenseMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c0 in 0..dim {
            let ident = if r == c0 {
                C::new(T::one(), T::zero())
            } else {
                C::new(T::zero(), T::zero())
            };
            u_b.set(r, c0, first.get(r, c0) + ident - p.get(r, c0));
        }
    }

    // Postconditions: unitary, and L U_B = B L.
    if u_b.unitarity_residual()? > tol.eps_unitary {
        return Err(Error::domain(
            "constructed mixing map failed the unitarity check",
        ));
    }
    let lub = l.mat_mul(&u_b)?;
    if lub.max_abs_diff(&bl)? > tol.eps_unitary {
        return Err(Error::domain(
            "constructed mixing map does not commute with the reduction",
        ));
    }
    Ok(u_b)
}

/// Text serialization of a reduced system: a header, the reduced matrix
/// entries row-major as `re,im` pairs, then the basis vectors (dense
/// amplitude lines for small systems, graph exports on the decision
/// diagram backend).
pub fn write_reduced_system<T: Real, S: QuantumState<T>>(
    rs: &ReducedSystem<T, S>,
    dense_basis_cap_qubits: usize,
) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "reduced-system v1");
    let _ = writeln!(out, "circuit: {}", rs.circuit_name());
    let _ = writeln!(out, "n: {}", rs.qubits());
    let _ = writeln!(out, "d: {}", rs.d());
    let _ = writeln!(out, "backend: {}", rs.basis().backend());
    let _ = writeln!(out, "seeds: {}", rs.seeds().join(";"));
    let tol = rs.tolerances();
    let _ = writeln!(
        out,
        "tol: eps_amp={:e} eps_norm={:e} eps_rank={:e} eps_unitary={:e}",
        tol.eps_amp, tol.eps_norm, tol.eps_rank, tol.eps_unitary
    );
    let _ = writeln!(out, "uhat:");
    for i in 0..rs.d() {
        let row: Vec<String> = (0..rs.d())
            .map(|j| {
                let v = rs.u_hat().get(i, j);
                format!("{},{}", v.re, v.im)
            })
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    let _ = writeln!(out, "basis:");
    for (i, v) in rs.basis().vectors().iter().enumerate() {
        if rs.qubits() <= dense_basis_cap_qubits {
            match v.to_dense() {
                Ok(dense) => {
                    let row: Vec<String> = dense
                        .amplitudes()
                        .iter()
                        .map(|a| format!("{},{}", a.re, a.im))
                        .collect();
                    let _ = writeln!(out, "v{i} dense {}", row.join(" "));
                }
                Err(_) => {
                    let _ = writeln!(out, "v{i} omitted");
                }
            }
        } else if let Some(graph) = v.graph_export() {
            let _ = writeln!(out, "v{i} graph");
            out.push_str(&graph);
        } else {
            let _ = writeln!(out, "v{i} omitted");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generators, Gate};
    use crate::state::{DdBackend, DenseBackend};
    use std::collections::BTreeSet;
    use std::sync::Arc;

    type C64 = C<f64>;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli_x() -> Circuit<f64> {
        Circuit::with_gates(1, "x", vec![Gate::x(0)]).unwrap()
    }

    fn phi_seed() -> SubspaceSpec<f64> {
        let s = 1.0 / 2.0f64.sqrt();
        SubspaceSpec::Vectors(vec![DenseState::from_amplitudes(
            1,
            vec![c(s, 0.0), c(-s, 0.0)],
        )
        .unwrap()])
    }

    fn tol() -> TolerancePolicy<f64> {
        TolerancePolicy::default()
    }

    #[test]
    fn pauli_x_reduces_to_scalar_minus_one() {
        for lump in [lump_krylov::<f64, DenseBackend>, lump_residual] {
            let rs = lump(&DenseBackend, &pauli_x(), &phi_seed(), &tol(), 16).unwrap();
            assert_eq!(rs.d(), 1);
            assert!((rs.u_hat().get(0, 0) - c(-1.0, 0.0)).norm() < 1e-12);
            assert!(rs.unitarity_residual().unwrap() < 1e-12);
        }
    }

    #[test]
    fn identity_circuit_gives_dimension_one() {
        let circuit = Circuit::with_gates(3, "id", vec![Gate::rz(0.0, 0)]).unwrap();
        let rs =
            lump_krylov(&DenseBackend, &circuit, &SubspaceSpec::Uniform, &tol(), 16).unwrap();
        assert_eq!(rs.d(), 1);
        assert!((rs.u_hat().get(0, 0) - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn grover_reduces_to_dimension_two() {
        for n in 2..=6usize {
            let marked = BTreeSet::from([1u64, (1 << n) - 1]);
            let circuit = generators::grover_circuit::<f64>(n, &marked).unwrap();
            let rs = lump_krylov(&DenseBackend, &circuit, &SubspaceSpec::Uniform, &tol(), 64)
                .unwrap();
            assert_eq!(rs.d(), 2, "n = {n}");
            // Span check: {psi, G psi}.
            let psi = DenseState::<f64>::uniform(n).unwrap();
            let g_psi = circuit.apply_dense(&psi).unwrap();
            let angle = principal_angle_bound(&[psi, g_psi], rs.basis().vectors()).unwrap();
            assert!(angle < 1e-10, "angle {angle:.3e} at n = {n}");
        }
    }

    #[test]
    fn order_finding_dimension_equals_multiplicative_order() {
        for (x, modulus) in [(2u64, 15u64), (7, 15), (2, 21), (4, 5), (2, 3)] {
            let circuit = generators::order_finding_circuit::<f64>(x, modulus).unwrap();
            let rs =
                lump_krylov(&DenseBackend, &circuit, &SubspaceSpec::Ket1, &tol(), 128).unwrap();
            let ord = generators::multiplicative_order(x, modulus).unwrap();
            assert_eq!(rs.d() as u64, ord, "x={x} N={modulus}");
            assert!(rs.unitarity_residual().unwrap() < 1e-9);
        }
    }

    #[test]
    fn d_max_capacity_is_reported() {
        let circuit = generators::qft_circuit::<f64>(4).unwrap();
        let err = lump_krylov(
            &DenseBackend,
            &circuit,
            &SubspaceSpec::Indices(vec![3]),
            &tol(),
            1,
        )
        .unwrap_err();
        match err {
            Error::Capacity { partial, .. } => assert_eq!(partial, Some(1)),
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn zero_seed_is_rejected() {
        let circuit = pauli_x();
        let zero = DenseState::<f64>::zero(1).unwrap();
        let err = lump_krylov(
            &DenseBackend,
            &circuit,
            &SubspaceSpec::Vectors(vec![zero]),
            &tol(),
            4,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn fcb_and_bcb_residual_examples() {
        // Basis {|0>} under Pauli X: X|0> = |1> is orthogonal to the span,
        // so both residuals are 1.
        let basis = LumpingBasis::from_vectors::<f64>(
            vec![DenseState::<f64>::basis(1, 0).unwrap()],
            BackendKind::Dense,
        )
        .unwrap();
        let x = pauli_x();
        assert!((check_bcb(&basis, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((check_fcb(&basis, &x).unwrap() - 1.0).abs() < 1e-12);

        // {phi} under X is invariant in both directions.
        let s = 1.0 / 2.0f64.sqrt();
        let phi = DenseState::from_amplitudes(1, vec![c(s, 0.0), c(-s, 0.0)]).unwrap();
        let basis = LumpingBasis::from_vectors::<f64>(vec![phi], BackendKind::Dense).unwrap();
        assert!(check_bcb(&basis, &x).unwrap() < 1e-12);
        assert!(check_fcb(&basis, &x).unwrap() < 1e-12);

        // The full basis spans everything: residual 0 for any circuit.
        let full = LumpingBasis::from_vectors::<f64>(
            vec![
                DenseState::<f64>::basis(1, 0).unwrap(),
                DenseState::<f64>::basis(1, 1).unwrap(),
            ],
            BackendKind::Dense,
        )
        .unwrap();
        assert!(check_fcb(&full, &x).unwrap() < 1e-12);
    }

    #[test]
    fn krylov_output_satisfies_both_conditions() {
        let marked = BTreeSet::from([5u64]);
        let circuit = generators::grover_circuit::<f64>(4, &marked).unwrap();
        let rs =
            lump_krylov(&DenseBackend, &circuit, &SubspaceSpec::Uniform, &tol(), 64).unwrap();
        assert!(check_bcb(rs.basis(), &circuit).unwrap() < 1e-9);
        assert!(check_fcb(rs.basis(), &circuit).unwrap() < 1e-9);
        assert!(rs.basis().orthonormality_residual::<f64>().unwrap() < 1e-9);
    }

    #[test]
    fn procedures_agree_on_random_circuits() {
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for _ in 0..5 {
            let n = rand::Rng::gen_range(&mut rng, 2..=4usize);
            let circuit = generators::random_circuit::<f64, _>(n, 12, &mut rng).unwrap();
            let a = lump_krylov(
                &DenseBackend,
                &circuit,
                &SubspaceSpec::Ket0,
                &tol(),
                DEFAULT_D_MAX,
            )
            .unwrap();
            let b = lump_residual(
                &DenseBackend,
                &circuit,
                &SubspaceSpec::Ket0,
                &tol(),
                DEFAULT_D_MAX,
            )
            .unwrap();
            assert_eq!(a.d(), b.d());
            let angle = principal_angle_bound(a.basis().vectors(), b.basis().vectors()).unwrap();
            assert!(angle < 1e-8, "column spaces differ: {angle:.3e}");
        }
    }

    #[test]
    fn dense_and_dd_backends_agree() {
        let marked = BTreeSet::from([3u64]);
        let circuit = generators::grover_circuit::<f64>(4, &marked).unwrap();
        let dense =
            lump_krylov(&DenseBackend, &circuit, &SubspaceSpec::Uniform, &tol(), 64).unwrap();
        let dd = lump_krylov(
            &DdBackend::<f64>::default(),
            &circuit,
            &SubspaceSpec::Uniform,
            &tol(),
            64,
        )
        .unwrap();
        assert_eq!(dense.d(), dd.d());
        assert!(dense.u_hat().max_abs_diff(dd.u_hat()).unwrap() < 1e-10);
    }

    #[test]
    fn minimality_certificate_examples() {
        // Grover n=4: rank 2.
        let marked = BTreeSet::from([9u64]);
        let circuit = generators::grover_circuit::<f64>(4, &marked).unwrap();
        let spec = SubspaceSpec::Uniform;
        let rs = lump_krylov(&DenseBackend, &circuit, &spec, &tol(), 64).unwrap();
        let report = minimality_certificate(&rs, &circuit, &spec, &tol()).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.oracle_rank, 2);

        // QAOA instance: oracle rank == d <= M.
        let formula =
            generators::SatFormula::new(3, vec![vec![1, 2], vec![-1, 3], vec![2, -3]]).unwrap();
        let m = formula.clauses().len();
        let problem = Arc::new(generators::QaoaProblem::Sat(formula));
        let circuit = generators::qaoa_problem_step::<f64>(&problem, 0.1).unwrap();
        let rs = lump_krylov(&DenseBackend, &circuit, &spec, &tol(), 64).unwrap();
        assert!(rs.d() <= m);
        let report = minimality_certificate(&rs, &circuit, &spec, &tol()).unwrap();
        assert!(report.pass, "{report:?}");

        // Identity circuit: rank 1.
        let circuit = Circuit::with_gates(2, "id", vec![Gate::rz(0.0, 0)]).unwrap();
        let rs = lump_krylov(&DenseBackend, &circuit, &spec, &tol(), 64).unwrap();
        let report = minimality_certificate(&rs, &circuit, &spec, &tol()).unwrap();
        assert_eq!(report.oracle_rank, 1);
        assert!(report.pass);
    }

    #[test]
    fn begin_hamiltonian_scalar_cases() {
        // d = 1 basis {psi} of the identity circuit.
        let circuit = Circuit::with_gates(2, "id", vec![Gate::rz(0.0, 0)]).unwrap();
        let rs =
            lump_krylov(&DenseBackend, &circuit, &SubspaceSpec::Uniform, &tol(), 8).unwrap();
        // H_hat = 0: the subspace evolves as identity.
        let zero_h = DenseMatrix::<f64>::zeros(1, 1);
        let u_b = construct_begin_hamiltonian(rs.basis(), &zero_h, 0.1, &tol()).unwrap();
        assert!(u_b.unitarity_residual().unwrap() < 1e-12);
        let psi = DenseState::<f64>::uniform(2).unwrap();
        let moved = u_b.mat_vec(psi.amplitudes()).unwrap();
        for (a, b) in moved.iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }

        // H_hat = [1], delta = 0.1: the reduced map is e^{-0.1 i}.
        let mut h = DenseMatrix::<f64>::zeros(1, 1);
        h.set(0, 0, c(1.0, 0.0));
        let u_b = construct_begin_hamiltonian(rs.basis(), &h, 0.1, &tol()).unwrap();
        let v0 = &rs.basis().vectors()[0];
        let moved =
            DenseState::from_amplitudes(2, u_b.mat_vec(v0.amplitudes()).unwrap()).unwrap();
        let phase = v0.inner_product(&moved).unwrap();
        let expect = num_complex::Complex::from_polar(1.0, -0.1);
        assert!((phase - expect).norm() < 1e-12);

        // Non-Hermitian input is rejected.
        let mut bad = DenseMatrix::<f64>::zeros(1, 1);
        bad.set(0, 0, c(0.0, 1.0));
        assert!(construct_begin_hamiltonian(rs.basis(), &bad, 0.1, &tol()).is_err());
    }

    #[test]
    fn seed_spec_parsing() {
        assert!(matches!(
            "ket0".parse::<SubspaceSpec<f64>>().unwrap(),
            SubspaceSpec::Ket0
        ));
        assert!(matches!(
            "psi".parse::<SubspaceSpec<f64>>().unwrap(),
            SubspaceSpec::Uniform
        ));
        match "indices:3,5,7".parse::<SubspaceSpec<f64>>().unwrap() {
            SubspaceSpec::Indices(v) => assert_eq!(v, vec![3, 5, 7]),
            other => panic!("{other:?}"),
        }
        assert!("indices:x".parse::<SubspaceSpec<f64>>().is_err());
        assert!("nope".parse::<SubspaceSpec<f64>>().is_err());
    }

    #[test]
    fn multi_seed_union_spans_all_seeds() {
        let circuit = generators::qft_circuit::<f64>(3).unwrap();
        let spec = SubspaceSpec::Indices(vec![0, 1]);
        let rs = lump_krylov(&DenseBackend, &circuit, &spec, &tol(), 64).unwrap();
        let seeds = spec.materialize(&DenseBackend, 3).unwrap();
        let outside = subspace_residual(&seeds, rs.basis().vectors()).unwrap();
        assert!(outside < 1e-10);
        assert!(check_bcb(rs.basis(), &circuit).unwrap() < 1e-9);
    }

    #[test]
    fn serialization_has_header_and_matrix() {
        let rs = lump_krylov(&DenseBackend, &pauli_x(), &phi_seed(), &tol(), 4).unwrap();
        let text = write_reduced_system(&rs, 12);
        assert!(text.starts_with("reduced-system v1\n"));
        assert!(text.contains("circuit: x"));
        assert!(text.contains("n: 1"));
        assert!(text.contains("d: 1"));
        assert!(text.contains("v0 dense"));
        // The single reduced entry is -1.
        let lines: Vec<&str> = text.lines().collect();
        let at = lines.iter().position(|l| *l == "uhat:").unwrap();
        let entry: f64 = lines[at + 1].split(',').next().unwrap().parse().unwrap();
        assert!((entry + 1.0).abs() < 1e-12);
    }
}
