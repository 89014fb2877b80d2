//! Multi-step simulation: reduced-space evolution, full-state recovery,
//! projective measurement, and the benchmark regimes.
//!
//! A regime runs one circuit end to end in one of four modes — reduce
//! first and iterate the small `d x d` map (on either backend), or apply
//! the full circuit step by step (dense or decision diagram) — recording
//! the reduction and simulation phases separately.

use std::time::{Duration, Instant};

use crate::circuit::{Circuit, QaoaProblem};
use crate::dense::DenseState;
use crate::dd::DdState;
use crate::error::{Deadline, Error, Result};
use crate::lumping::{
    lump_krylov_opts, LumpOptions, ReducedSystem, SubspaceSpec, DEFAULT_D_MAX,
};
use crate::scalar::{Real, TolerancePolicy, C};
use crate::state::{Backend, DdBackend, DenseBackend, QuantumState};

/// The four experiment modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeMode {
    ReducedDense,
    ReducedDd,
    FullDense,
    FullDd,
}

impl RegimeMode {
    pub const ALL: [RegimeMode; 4] = [
        RegimeMode::ReducedDense,
        RegimeMode::ReducedDd,
        RegimeMode::FullDense,
        RegimeMode::FullDd,
    ];

    pub fn is_reduced(&self) -> bool {
        matches!(self, RegimeMode::ReducedDense | RegimeMode::ReducedDd)
    }
}

impl std::fmt::Display for RegimeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RegimeMode::ReducedDense => "reduced-dense",
            RegimeMode::ReducedDd => "reduced-dd",
            RegimeMode::FullDense => "full-dense",
            RegimeMode::FullDd => "full-dd",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for RegimeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "reduced-dense" => Ok(RegimeMode::ReducedDense),
            "reduced-dd" => Ok(RegimeMode::ReducedDd),
            "full-dense" => Ok(RegimeMode::FullDense),
            "full-dd" => Ok(RegimeMode::FullDd),
            other => Err(Error::domain(format!("unknown regime '{other}'"))),
        }
    }
}

/// How the step count is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KappaPolicy {
    /// `ceil(sqrt(2^n))` steps.
    SqrtN,
    Fixed(usize),
}

impl KappaPolicy {
    pub fn steps(&self, n: usize) -> usize {
        match self {
            KappaPolicy::SqrtN => sqrt_n_steps(n),
            KappaPolicy::Fixed(k) => *k,
        }
    }
}

/// Smallest integer at least `sqrt(2^n)`.
pub fn sqrt_n_steps(n: usize) -> usize {
    ((1u64 << n) as f64).sqrt().ceil() as usize
}

/// The search-iteration count `ceil(pi/4 * sqrt(N/M))`.
pub fn grover_step_count(n: usize, marked: usize) -> usize {
    let ratio = (1u64 << n) as f64 / marked as f64;
    (std::f64::consts::FRAC_PI_4 * ratio.sqrt()).ceil() as usize
}

/// Whether a trajectory keeps every step or just the end point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrajectoryPolicy {
    #[default]
    FinalOnly,
    EveryStep,
}

/// Everything a regime run needs besides the circuit.
#[derive(Debug, Clone)]
pub struct RunConfig<T> {
    pub seed: SubspaceSpec<T>,
    pub tol: TolerancePolicy<T>,
    pub kappa: KappaPolicy,
    pub d_max: usize,
    pub timeout: Option<Duration>,
    pub trajectory: TrajectoryPolicy,
}

impl<T: Real> Default for RunConfig<T> {
    fn default() -> Self {
        RunConfig {
            seed: SubspaceSpec::Ket0,
            tol: TolerancePolicy::default(),
            kappa: KappaPolicy::SqrtN,
            d_max: DEFAULT_D_MAX,
            timeout: None,
            trajectory: TrajectoryPolicy::FinalOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    Timeout,
    Capacity,
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RunStatus::Ok => "ok",
            RunStatus::Timeout => "timeout",
            RunStatus::Capacity => "capacity",
        };
        write!(f, "{s}")
    }
}

/// Final state of a run, in whichever representation produced it.
#[derive(Clone)]
pub enum FinalState<T> {
    Dense(DenseState<T>),
    Dd(DdState<T>),
}

impl<T: Real> FinalState<T> {
    pub fn amplitude(&self, index: u64) -> Result<C<T>> {
        match self {
            FinalState::Dense(s) => s.amplitude(index),
            FinalState::Dd(s) => s.amplitude(index),
        }
    }

    pub fn diagonal_expectation(&self, f: &dyn Fn(u64) -> T) -> T {
        match self {
            FinalState::Dense(s) => QuantumState::diagonal_expectation(s, f),
            FinalState::Dd(s) => DdState::diagonal_expectation(s, f),
        }
    }

    pub fn to_dense(&self) -> Result<DenseState<T>> {
        match self {
            FinalState::Dense(s) => Ok(s.clone()),
            FinalState::Dd(s) => s.decode(),
        }
    }

    pub fn norm(&self) -> T {
        match self {
            FinalState::Dense(s) => s.norm(),
            FinalState::Dd(s) => s.norm(),
        }
    }
}

trait IntoFinal<T> {
    fn into_final(self) -> FinalState<T>;
}

impl<T: Real> IntoFinal<T> for DenseState<T> {
    fn into_final(self) -> FinalState<T> {
        FinalState::Dense(self)
    }
}

impl<T: Real> IntoFinal<T> for DdState<T> {
    fn into_final(self) -> FinalState<T> {
        FinalState::Dd(self)
    }
}

/// Record of one regime execution: phase timings, the reduced dimension
/// when applicable, and the final state for observable queries.
pub struct SimulationRun<T> {
    pub circuit_name: String,
    pub n: usize,
    pub mode: RegimeMode,
    pub steps: usize,
    pub reduce_ms: f64,
    pub sim_ms: f64,
    pub status: RunStatus,
    pub d: Option<usize>,
    /// Set when the initial state was not inside the computed subspace
    /// (recovery is then only a projection).
    pub seed_outside_span: bool,
    /// Reduced coordinates per recorded step (reduced modes).
    pub reduced_trajectory: Option<Vec<Vec<C<T>>>>,
    final_state: Option<FinalState<T>>,
}

impl<T: Real> SimulationRun<T> {
    pub fn total_ms(&self) -> f64 {
        self.reduce_ms + self.sim_ms
    }

    pub fn final_state(&self) -> Result<&FinalState<T>> {
        self.final_state
            .as_ref()
            .ok_or_else(|| Error::domain("run holds no final state (not ok?)"))
    }

    /// `|<index|w_final>|^2`.
    pub fn basis_probability(&self, index: u64) -> Result<T> {
        Ok(self.final_state()?.amplitude(index)?.norm_sqr())
    }

    pub fn diagonal_expectation(&self, f: &dyn Fn(u64) -> T) -> Result<T> {
        Ok(self.final_state()?.diagonal_expectation(f))
    }

    /// Trajectory export: `step` followed by the reduced amplitudes as
    /// `re,im` pairs (reduced modes), or the final-state norm (full
    /// modes).
    pub fn trajectory_csv(&self) -> String {
        let mut out = String::new();
        if let Some(traj) = &self.reduced_trajectory {
            let d = traj.first().map_or(0, Vec::len);
            let mut header = vec!["step".to_string()];
            for i in 0..d {
                header.push(format!("re{i}"));
                header.push(format!("im{i}"));
            }
            out.push_str(&header.join(","));
            out.push('\n');
            for (k, w) in traj.iter().enumerate() {
                let mut row = vec![k.to_string()];
                for amp in w {
                    row.push(format!("{}", amp.re));
                    row.push(format!("{}", amp.im));
                }
                out.push_str(&row.join(","));
                out.push('\n');
            }
        } else {
            out.push_str("step,norm\n");
            if let Some(fs) = &self.final_state {
                out.push_str(&format!("{},{}\n", self.steps, fs.norm()));
            }
        }
        out
    }
}

/// Reduced-space trajectory `w_hat_k = U_hat^k L w0`.
#[derive(Debug, Clone)]
pub struct ReducedTrajectory<T> {
    /// Recorded coordinate vectors; all steps `0..=kappa` under
    /// [`TrajectoryPolicy::EveryStep`], otherwise just the final one.
    pub states: Vec<Vec<C<T>>>,
    pub seed_outside_span: bool,
}

impl<T> ReducedTrajectory<T> {
    pub fn last(&self) -> &Vec<C<T>> {
        self.states.last().expect("trajectory is never empty")
    }
}

/// Projects `w0` into the reduced space and iterates the reduced map for
/// `kappa` steps (`O(kappa d^2)` after the projection). When `w0` lies
/// outside the computed subspace the run is flagged; the evolution then
/// tracks only its projection.
pub fn simulate_reduced<T: Real, S: QuantumState<T>>(
    rs: &ReducedSystem<T, S>,
    w0: &S,
    kappa: usize,
    policy: TrajectoryPolicy,
    tol: &TolerancePolicy<T>,
) -> Result<ReducedTrajectory<T>> {
    simulate_reduced_opts(rs, w0, kappa, policy, tol, None)
}

fn simulate_reduced_opts<T: Real, S: QuantumState<T>>(
    rs: &ReducedSystem<T, S>,
    w0: &S,
    kappa: usize,
    policy: TrajectoryPolicy,
    tol: &TolerancePolicy<T>,
    deadline: Option<Deadline>,
) -> Result<ReducedTrajectory<T>> {
    if w0.qubits() != rs.qubits() {
        return Err(Error::dim(format!(
            "initial state over {} qubits, system over {}",
            w0.qubits(),
            rs.qubits()
        )));
    }
    // w_hat_0 = L w0.
    let mut w_hat: Vec<C<T>> = rs
        .basis()
        .vectors()
        .iter()
        .map(|v| v.inner_product(w0))
        .collect::<Result<_>>()?;
    // Membership: || (I - P) w0 ||^2 = ||w0||^2 - ||w_hat||^2.
    let proj_sqr: T = w_hat.iter().map(|a| a.norm_sqr()).sum();
    let outside_sqr = (w0.norm().powi(2) - proj_sqr).max(T::zero());
    let seed_outside_span = outside_sqr.sqrt() > tol.eps_norm;

    let mut states = Vec::new();
    if policy == TrajectoryPolicy::EveryStep {
        states.push(w_hat.clone());
    }
    for _ in 0..kappa {
        if let Some(deadline) = &deadline {
            deadline.check()?;
        }
        w_hat = rs.u_hat().mat_vec(&w_hat)?;
        if policy == TrajectoryPolicy::EveryStep {
            states.push(w_hat.clone());
        }
    }
    if policy == TrajectoryPolicy::FinalOnly {
        states.push(w_hat);
    }
    Ok(ReducedTrajectory {
        states,
        seed_outside_span,
    })
}

/// Maps reduced coordinates back to the full space: `sum_i w_hat_i v_i`.
pub fn recover_full<T: Real, S: QuantumState<T>>(
    rs: &ReducedSystem<T, S>,
    w_hat: &[C<T>],
) -> Result<S> {
    let vectors = rs.basis().vectors();
    if w_hat.len() != vectors.len() {
        return Err(Error::dim(format!(
            "reduced vector of length {} against dimension {}",
            w_hat.len(),
            vectors.len()
        )));
    }
    let mut acc = vectors[0].scale(w_hat[0]);
    for (coeff, v) in w_hat.iter().zip(vectors).skip(1) {
        acc = acc.axpy(*coeff, v)?;
    }
    Ok(acc)
}

/// Which side of a binary projective measurement an outcome refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectorOutcome {
    /// Inside the projector's subspace.
    Projected,
    /// The complement `I - P`.
    Complement,
}

/// One outcome of a `{P, I-P}` measurement. The post-measurement state is
/// absent when the outcome probability is below the normalization
/// tolerance.
#[derive(Debug, Clone)]
pub struct MeasurementResult<T, S> {
    pub outcome: ProjectorOutcome,
    pub probability: T,
    post: Option<S>,
}

impl<T: Real, S: QuantumState<T>> MeasurementResult<T, S> {
    pub fn post_state(&self) -> Result<&S> {
        self.post.as_ref().ok_or(Error::DegenerateOutcome {
            probability: self
                .probability
                .to_f64()
                .unwrap_or(0.0),
        })
    }
}

/// Measures the projector onto the span of `projector_basis` (orthonormal
/// states) against `state`, returning both outcomes of `{P, I-P}`. The
/// probabilities are `pi = sum_i |<v_i|z>|^2` and `1 - pi`; post states
/// are `P z / sqrt(pi)` and `(z - P z) / sqrt(1 - pi)`.
pub fn measure_projector<T: Real, S: QuantumState<T>>(
    state: &S,
    projector_basis: &[S],
    tol: &TolerancePolicy<T>,
) -> Result<(MeasurementResult<T, S>, MeasurementResult<T, S>)> {
    if (state.norm() - T::one()).abs() > tol.eps_norm {
        return Err(Error::domain("measured state must be normalized"));
    }
    if projector_basis.is_empty() {
        return Err(Error::domain("projector basis is empty"));
    }
    let coeffs: Vec<C<T>> = projector_basis
        .iter()
        .map(|v| v.inner_product(state))
        .collect::<Result<_>>()?;
    let pi: T = coeffs.iter().map(|a| a.norm_sqr()).sum();
    let pi = pi.min(T::one()).max(T::zero());

    // P z = sum_i <v_i|z> v_i.
    let mut projected = projector_basis[0].scale(coeffs[0]);
    for (coeff, v) in coeffs.iter().zip(projector_basis).skip(1) {
        projected = projected.axpy(*coeff, v)?;
    }

    let post_in = if pi > tol.eps_norm {
        Some(projected.scale(C::new(T::one() / pi.sqrt(), T::zero())))
    } else {
        None
    };
    let comp_prob = (T::one() - pi).max(T::zero());
    let post_out = if comp_prob > tol.eps_norm {
        let residual = state.axpy(-C::new(T::one(), T::zero()), &projected)?;
        Some(residual.scale(C::new(T::one() / comp_prob.sqrt(), T::zero())))
    } else {
        None
    };
    Ok((
        MeasurementResult {
            outcome: ProjectorOutcome::Projected,
            probability: pi,
            post: post_in,
        },
        MeasurementResult {
            outcome: ProjectorOutcome::Complement,
            probability: comp_prob,
            post: post_out,
        },
    ))
}

/// Expected score `sum_x score(x) |amp_x|^2` — the expected number of
/// satisfied clauses (SAT) or expected cut size (MaxCut).
pub fn qaoa_expectation<T: Real, S: QuantumState<T>>(
    state: &S,
    problem: &QaoaProblem,
) -> Result<T> {
    if problem.qubits() != state.qubits() {
        return Err(Error::dim(format!(
            "problem over {} qubits, state over {}",
            problem.qubits(),
            state.qubits()
        )));
    }
    Ok(state.diagonal_expectation(&|x| T::of(problem.score(x) as f64)))
}

fn ms_since(t0: Instant) -> f64 {
    t0.elapsed().as_secs_f64() * 1e3
}

/// Runs one circuit end to end in the selected regime.
pub fn run_regime<T: Real>(
    circuit: &Circuit<T>,
    cfg: &RunConfig<T>,
    mode: RegimeMode,
) -> Result<SimulationRun<T>> {
    let deadline = cfg.timeout.map(Deadline::new);
    match mode {
        RegimeMode::ReducedDense => run_reduced(&DenseBackend, circuit, cfg, deadline, mode),
        RegimeMode::ReducedDd => {
            run_reduced(&DdBackend::<T>::default(), circuit, cfg, deadline, mode)
        }
        RegimeMode::FullDense => run_full(&DenseBackend, circuit, cfg, deadline, mode),
        RegimeMode::FullDd => {
            run_full(&DdBackend::<T>::default(), circuit, cfg, deadline, mode)
        }
    }
}

fn blank_run<T: Real>(
    circuit: &Circuit<T>,
    mode: RegimeMode,
    steps: usize,
    status: RunStatus,
) -> SimulationRun<T> {
    SimulationRun {
        circuit_name: circuit.name().to_string(),
        n: circuit.qubits(),
        mode,
        steps,
        reduce_ms: 0.0,
        sim_ms: 0.0,
        status,
        d: None,
        seed_outside_span: false,
        reduced_trajectory: None,
        final_state: None,
    }
}

/// Maps timeout/capacity failures to a partial record instead of an error
/// so sweeps can keep going; everything else propagates.
fn partial_or_err<T: Real, V>(
    result: Result<V>,
    run: &mut SimulationRun<T>,
) -> Result<Option<V>> {
    match result {
        Ok(v) => Ok(Some(v)),
        Err(Error::Timeout { .. }) => {
            run.status = RunStatus::Timeout;
            Ok(None)
        }
        Err(Error::Capacity { partial, .. }) => {
            run.status = RunStatus::Capacity;
            if run.d.is_none() {
                run.d = partial;
            }
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn run_reduced<T: Real, B: Backend<T>>(
    backend: &B,
    circuit: &Circuit<T>,
    cfg: &RunConfig<T>,
    deadline: Option<Deadline>,
    mode: RegimeMode,
) -> Result<SimulationRun<T>>
where
    B::State: IntoFinal<T>,
{
    let kappa = cfg.kappa.steps(circuit.qubits());
    let mut run = blank_run(circuit, mode, kappa, RunStatus::Ok);

    let t0 = Instant::now();
    let lumped = partial_or_err(
        lump_krylov_opts(
            backend,
            circuit,
            &cfg.seed,
            &cfg.tol,
            LumpOptions {
                d_max: cfg.d_max,
                deadline,
            },
        ),
        &mut run,
    )?;
    run.reduce_ms = ms_since(t0);
    let Some(rs) = lumped else { return Ok(run) };
    run.d = Some(rs.d());

    let t1 = Instant::now();
    let seeds = cfg.seed.materialize(backend, circuit.qubits())?;
    let w0 = {
        let nrm = seeds[0].norm();
        seeds[0].scale(C::new(T::one() / nrm, T::zero()))
    };
    let simulated = partial_or_err(
        simulate_reduced_opts(&rs, &w0, kappa, cfg.trajectory, &cfg.tol, deadline),
        &mut run,
    )?;
    let Some(traj) = simulated else {
        run.sim_ms = ms_since(t1);
        return Ok(run);
    };
    let final_state = recover_full(&rs, traj.last())?;
    run.sim_ms = ms_since(t1);
    run.seed_outside_span = traj.seed_outside_span;
    run.reduced_trajectory = Some(traj.states);
    run.final_state = Some(final_state.into_final());
    Ok(run)
}

fn run_full<T: Real, B: Backend<T>>(
    backend: &B,
    circuit: &Circuit<T>,
    cfg: &RunConfig<T>,
    deadline: Option<Deadline>,
    mode: RegimeMode,
) -> Result<SimulationRun<T>>
where
    B::State: IntoFinal<T>,
{
    let kappa = cfg.kappa.steps(circuit.qubits());
    let mut run = blank_run(circuit, mode, kappa, RunStatus::Ok);

    let t0 = Instant::now();
    let seeded = partial_or_err(cfg.seed.materialize(backend, circuit.qubits()), &mut run)?;
    let Some(seeds) = seeded else {
        run.sim_ms = ms_since(t0);
        return Ok(run);
    };
    let state = {
        let nrm = seeds[0].norm();
        seeds[0].scale(C::new(T::one() / nrm, T::zero()))
    };
    let mut cell = vec![state];
    for _ in 0..kappa {
        if let Some(deadline) = &deadline {
            if partial_or_err(deadline.check(), &mut run)?.is_none() {
                run.sim_ms = ms_since(t0);
                return Ok(run);
            }
        }
        let next = cell.pop().expect("state present").apply_circuit(circuit)?;
        cell.push(next);
        B::State::compact_group(&mut cell)?;
    }
    run.sim_ms = ms_since(t0);
    run.final_state = Some(cell.pop().expect("state present").into_final());
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generators, Gate};
    use crate::lumping::lump_krylov;
    use crate::state::BackendKind;
    use num_traits::ToPrimitive as _;
    use std::collections::BTreeSet;
    use std::sync::Arc;

    type C64 = C<f64>;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn tol() -> TolerancePolicy<f64> {
        TolerancePolicy::default()
    }

    fn phi() -> DenseState<f64> {
        let s = 1.0 / 2.0f64.sqrt();
        DenseState::from_amplitudes(1, vec![c(s, 0.0), c(-s, 0.0)]).unwrap()
    }

    fn pauli_x_reduced() -> ReducedSystem<f64, DenseState<f64>> {
        let circuit = Circuit::with_gates(1, "x", vec![Gate::x(0)]).unwrap();
        lump_krylov(
            &DenseBackend,
            &circuit,
            &SubspaceSpec::Vectors(vec![phi()]),
            &tol(),
            4,
        )
        .unwrap()
    }

    #[test]
    fn reduced_pauli_x_alternates_sign() {
        let rs = pauli_x_reduced();
        let traj =
            simulate_reduced(&rs, &phi(), 5, TrajectoryPolicy::EveryStep, &tol()).unwrap();
        assert_eq!(traj.states.len(), 6);
        assert!(!traj.seed_outside_span);
        // w_hat_5 = (-1)^5 * w_hat_0 with w_hat_0 = <v0|phi> of modulus 1.
        let w0 = traj.states[0][0];
        let w5 = traj.states[5][0];
        assert!((w5 + w0).norm() < 1e-12);
        assert!((w5.norm() - 1.0).abs() < 1e-12);

        // kappa = 0 returns L w0 alone.
        let traj = simulate_reduced(&rs, &phi(), 0, TrajectoryPolicy::EveryStep, &tol()).unwrap();
        assert_eq!(traj.states.len(), 1);
    }

    #[test]
    fn recover_full_examples() {
        let rs = pauli_x_reduced();
        // Unit coordinate recovers the basis vector itself.
        let v0 = recover_full(&rs, &[c(1.0, 0.0)]).unwrap();
        let angle = crate::lumping::principal_angle_bound(
            &[v0.clone()],
            &[rs.basis().vectors()[0].clone()],
        )
        .unwrap();
        assert!(angle < 1e-12);
        // Coordinate -w_hat_0 recovers -phi when w_hat_0 = L phi.
        let w_hat0 = rs.basis().vectors()[0].inner_product(&phi()).unwrap();
        let rec = recover_full(&rs, &[-w_hat0]).unwrap();
        assert!(rec.max_abs_diff(&phi().scale(c(-1.0, 0.0))).unwrap() < 1e-12);
        // Wrong length errors.
        assert!(recover_full(&rs, &[c(1.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn grover_reduced_simulation_recovers_dense_evolution() {
        let n = 4;
        let marked = BTreeSet::from([11u64]);
        let circuit = generators::grover_circuit::<f64>(n, &marked).unwrap();
        let rs = lump_krylov(
            &DenseBackend,
            &circuit,
            &SubspaceSpec::Uniform,
            &tol(),
            16,
        )
        .unwrap();
        let psi = DenseState::<f64>::uniform(n).unwrap();
        let kappa = grover_step_count(n, 1);
        assert_eq!(kappa, 4);
        let traj =
            simulate_reduced(&rs, &psi, kappa, TrajectoryPolicy::FinalOnly, &tol()).unwrap();
        let recovered = recover_full(&rs, traj.last()).unwrap();

        let mut full = psi;
        for _ in 0..kappa {
            full = circuit.apply_dense(&full).unwrap();
        }
        assert!(recovered.max_abs_diff(&full).unwrap() < 1e-10);
        // Search succeeds with probability at least 1/2 at this count.
        assert!(recovered.amplitude(11).unwrap().norm_sqr() >= 0.5);
    }

    #[test]
    fn def4_recovery_holds_for_fifty_steps() {
        let n = 5;
        let marked = BTreeSet::from([3u64, 17]);
        let circuit = generators::grover_circuit::<f64>(n, &marked).unwrap();
        let rs = lump_krylov(
            &DenseBackend,
            &circuit,
            &SubspaceSpec::Uniform,
            &tol(),
            16,
        )
        .unwrap();
        let psi = DenseState::<f64>::uniform(n).unwrap();
        let traj =
            simulate_reduced(&rs, &psi, 50, TrajectoryPolicy::EveryStep, &tol()).unwrap();
        let mut full = psi;
        for (k, w_hat) in traj.states.iter().enumerate() {
            let recovered = recover_full(&rs, w_hat).unwrap();
            let err = recovered.max_abs_diff(&full).unwrap();
            assert!(
                err <= (k.max(1) as f64) * 1e-9,
                "step {k}: error {err:.3e}"
            );
            // Norm preservation.
            let wn: f64 = w_hat.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            assert!((wn - 1.0).abs() <= 1e-9 * (k.max(1) as f64));
            full = circuit.apply_dense(&full).unwrap();
        }
    }

    #[test]
    fn projection_tracks_out_of_span_inputs() {
        // Forward-measurement preservation: P U^k w0 = recover(w_hat_k)
        // for an arbitrary (not in-span) w0.
        let n = 3;
        let marked = BTreeSet::from([2u64]);
        let circuit = generators::grover_circuit::<f64>(n, &marked).unwrap();
        let rs = lump_krylov(
            &DenseBackend,
            &circuit,
            &SubspaceSpec::Uniform,
            &tol(),
            16,
        )
        .unwrap();
        let w0 = DenseState::<f64>::basis(n, 6).unwrap();
        let traj = simulate_reduced(&rs, &w0, 8, TrajectoryPolicy::EveryStep, &tol()).unwrap();
        assert!(traj.seed_outside_span);
        let mut full = w0;
        for w_hat in &traj.states {
            let lhs = recover_full(&rs, w_hat).unwrap();
            // P_L U^k w0: project the dense evolution onto the basis.
            let coeffs: Vec<C64> = rs
                .basis()
                .vectors()
                .iter()
                .map(|v| v.inner_product(&full).unwrap())
                .collect();
            let rhs = recover_full(&rs, &coeffs).unwrap();
            assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-10);
            full = circuit.apply_dense(&full).unwrap();
        }
    }

    #[test]
    fn measurement_example_pauli_x() {
        // P_phi measured on w_k = X^k |0>: probability 1/2, post (+-)phi.
        let basis = vec![phi()];
        let w0 = DenseState::<f64>::basis(1, 0).unwrap();
        let x = Circuit::with_gates(1, "x", vec![Gate::x(0)]).unwrap();
        let mut w = w0;
        for k in 0..4 {
            let (p_in, p_out) = measure_projector(&w, &basis, &tol()).unwrap();
            assert!((p_in.probability - 0.5).abs() < 1e-12);
            assert!((p_out.probability - 0.5).abs() < 1e-12);
            let expect = phi().scale(c((-1.0f64).powi(k), 0.0));
            assert!(p_in.post_state().unwrap().max_abs_diff(&expect).unwrap() < 1e-12);
            w = x.apply_dense(&w).unwrap();
        }
    }

    #[test]
    fn measurement_full_basis_and_degenerate() {
        let full = vec![
            DenseState::<f64>::basis(1, 0).unwrap(),
            DenseState::<f64>::basis(1, 1).unwrap(),
        ];
        let state = phi();
        let (p_in, p_out) = measure_projector(&state, &full, &tol()).unwrap();
        assert!((p_in.probability - 1.0).abs() < 1e-12);
        assert!(p_in.post_state().unwrap().max_abs_diff(&state).unwrap() < 1e-12);
        assert!(p_out.post_state().is_err());

        // P_(|0>) on |1>: probability 0, degenerate projected outcome.
        let zero_proj = vec![DenseState::<f64>::basis(1, 0).unwrap()];
        let one = DenseState::<f64>::basis(1, 1).unwrap();
        let (p_in, p_out) = measure_projector(&one, &zero_proj, &tol()).unwrap();
        assert!(p_in.probability < 1e-12);
        assert!(matches!(
            p_in.post_state(),
            Err(Error::DegenerateOutcome { .. })
        ));
        assert!((p_out.probability - 1.0).abs() < 1e-12);

        // Unnormalized input is rejected.
        let two = one.scale(c(2.0, 0.0));
        assert!(measure_projector(&two, &zero_proj, &tol()).is_err());
    }

    #[test]
    fn qaoa_expectation_examples() {
        // Uniform state on the single-edge graph: expected cut 1/2.
        let graph = generators::Graph::new(2, &[(0, 1)]).unwrap();
        let problem = QaoaProblem::MaxCut(graph);
        let psi = DenseState::<f64>::uniform(2).unwrap();
        assert!((qaoa_expectation(&psi, &problem).unwrap() - 0.5).abs() < 1e-12);

        // A basis state achieving the maximum scores exactly.
        let best = DenseState::<f64>::basis(2, 1).unwrap();
        assert!((qaoa_expectation(&best, &problem).unwrap() - 1.0).abs() < 1e-12);

        // Single clause (x1) on |1>: expectation 1.
        let formula = generators::SatFormula::new(1, vec![vec![1]]).unwrap();
        let problem = QaoaProblem::Sat(formula);
        let one = DenseState::<f64>::basis(1, 1).unwrap();
        assert!((qaoa_expectation(&one, &problem).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regimes_agree_on_grover() {
        let n = 5;
        let target = 19u64;
        let marked = BTreeSet::from([target]);
        let circuit = generators::grover_circuit::<f64>(n, &marked).unwrap();
        let cfg = RunConfig {
            seed: SubspaceSpec::Uniform,
            kappa: KappaPolicy::Fixed(grover_step_count(n, 1)),
            ..RunConfig::default()
        };
        let probs: Vec<f64> = RegimeMode::ALL
            .iter()
            .map(|&mode| {
                let run = run_regime(&circuit, &cfg, mode).unwrap();
                assert_eq!(run.status, RunStatus::Ok, "{mode}");
                if mode.is_reduced() {
                    assert_eq!(run.d, Some(2));
                }
                run.basis_probability(target)
                    .unwrap()
                    .to_f64()
                    .unwrap()
            })
            .collect();
        for pair in probs.windows(2) {
            assert!((pair[0] - pair[1]).abs() < 1e-8, "{probs:?}");
        }
        assert!(probs[0] >= 0.5);
    }

    #[test]
    fn regime_capacity_and_timeout_records() {
        // Dense statevector cap produces a capacity record, not a crash.
        let circuit = generators::ghz_circuit::<f64>(30).unwrap();
        let cfg = RunConfig {
            kappa: KappaPolicy::Fixed(1),
            ..RunConfig::default()
        };
        let run = run_regime(&circuit, &cfg, RegimeMode::FullDense).unwrap();
        assert_eq!(run.status, RunStatus::Capacity);
        assert!(run.final_state().is_err());

        // A 1 ms budget on a deliberately heavy reduction times out.
        let circuit = generators::qft_circuit::<f64>(12).unwrap();
        let cfg = RunConfig {
            seed: SubspaceSpec::Indices(vec![5]),
            kappa: KappaPolicy::Fixed(1),
            timeout: Some(Duration::from_millis(1)),
            ..RunConfig::default()
        };
        let run = run_regime(&circuit, &cfg, RegimeMode::ReducedDense).unwrap();
        assert_eq!(run.status, RunStatus::Timeout);
    }

    #[test]
    fn trajectory_csv_shapes() {
        let rs = pauli_x_reduced();
        let circuit = Circuit::with_gates(1, "x", vec![Gate::x(0)]).unwrap();
        let cfg = RunConfig {
            seed: SubspaceSpec::Vectors(vec![phi()]),
            kappa: KappaPolicy::Fixed(0),
            trajectory: TrajectoryPolicy::EveryStep,
            ..RunConfig::default()
        };
        let run = run_regime(&circuit, &cfg, RegimeMode::ReducedDense).unwrap();
        let csv = run.trajectory_csv();
        let lines: Vec<&str> = csv.lines().collect();
        // kappa = 0: header plus the single L w0 row.
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "step,re0,im0");
        assert!(lines[1].starts_with("0,"));
        assert_eq!(rs.d(), 1);
    }

    #[test]
    fn backend_tags_present() {
        let rs = pauli_x_reduced();
        assert_eq!(rs.basis().backend(), BackendKind::Dense);
    }
}
