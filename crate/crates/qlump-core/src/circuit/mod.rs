//! Gate-level circuits and their application to dense states.
//!
//! A [`Circuit`] is an ordered gate list over `n` qubits; one "step" of the
//! induced dynamical system applies the whole list once. Gates are either
//! elementary (2x2 matrix kinds, with optional multi-controls) or semantic
//! (whole-register diagonal phases and basis permutations, evaluated by
//! callback instead of being decomposed).
//!
//! Qubit `0` is the least-significant bit of a basis index.

pub mod generators;
pub mod qasm;

use std::collections::BTreeSet;
use std::sync::Arc;

use num_complex::Complex;

use crate::dense::{DenseMatrix, DenseState, DENSE_UNITARY_CAP_QUBITS};
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

pub use generators::{
    dj_circuit, family_circuit, ghz_circuit, graph_state_circuit, grover_circuit,
    grover_circuit_elementary, multiplicative_order, order_finding_circuit, qaoa_problem_step,
    qft_circuit, random_circuit, random_max_cut, random_sat_formula, w_state_circuit, Family,
    Graph, QaoaProblem, SatFormula,
};
pub use qasm::{emit_qasm, parse_qasm, parse_qasm_with_warnings, ParseWarning};

/// Angle callback of a semantic diagonal gate: basis index to phase angle.
pub type AngleFn<T> = Arc<dyn Fn(u64) -> T + Send + Sync>;

/// The supported gate alphabet.
pub enum GateKind<T> {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rx(T),
    Ry(T),
    Rz(T),
    /// diag(1, e^{i theta}); `p`/`u1` in OpenQASM.
    Phase(T),
    U3(T, T, T),
    Swap,
    /// Multiplies the listed basis indices by -1 (a diagonal +-1 oracle).
    PhaseFlip(Arc<BTreeSet<u64>>),
    /// |x> -> e^{i f(x)} |x> over the whole register.
    DiagonalPhase(AngleFn<T>),
    /// |x> -> |p[x]> over the whole register; `p` must be a bijection.
    Permutation(Arc<Vec<u64>>),
}

impl<T: Clone> Clone for GateKind<T> {
    fn clone(&self) -> Self {
        use GateKind::*;
        match self {
            H => H,
            X => X,
            Y => Y,
            Z => Z,
            S => S,
            Sdg => Sdg,
            T => T,
            Tdg => Tdg,
            Rx(a) => Rx(a.clone()),
            Ry(a) => Ry(a.clone()),
            Rz(a) => Rz(a.clone()),
            Phase(a) => Phase(a.clone()),
            U3(a, b, c) => U3(a.clone(), b.clone(), c.clone()),
            Swap => Swap,
            PhaseFlip(s) => PhaseFlip(s.clone()),
            DiagonalPhase(f) => DiagonalPhase(f.clone()),
            Permutation(p) => Permutation(p.clone()),
        }
    }
}

impl<T: std::fmt::Debug> std::fmt::Debug for GateKind<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        use GateKind::*;
        match self {
            H => write!(f, "H"),
            X => write!(f, "X"),
            Y => write!(f, "Y"),
            Z => write!(f, "Z"),
            S => write!(f, "S"),
            Sdg => write!(f, "Sdg"),
            T => write!(f, "T"),
            Tdg => write!(f, "Tdg"),
            Rx(a) => write!(f, "Rx({a:?})"),
            Ry(a) => write!(f, "Ry({a:?})"),
            Rz(a) => write!(f, "Rz({a:?})"),
            Phase(a) => write!(f, "Phase({a:?})"),
            U3(a, b, c) => write!(f, "U3({a:?},{b:?},{c:?})"),
            Swap => write!(f, "Swap"),
            PhaseFlip(s) => write!(f, "PhaseFlip({} indices)", s.len()),
            DiagonalPhase(_) => write!(f, "DiagonalPhase(<fn>)"),
            Permutation(p) => write!(f, "Permutation({} entries)", p.len()),
        }
    }
}

impl<T: PartialEq> PartialEq for GateKind<T> {
    fn eq(&self, other: &Self) -> bool {
        use GateKind::*;
        match (self, other) {
            (H, H) | (X, X) | (Y, Y) | (Z, Z) | (S, S) | (Sdg, Sdg) | (T, T) | (Tdg, Tdg)
            | (Swap, Swap) => true,
            (Rx(a), Rx(b)) | (Ry(a), Ry(b)) | (Rz(a), Rz(b)) | (Phase(a), Phase(b)) => a == b,
            (U3(a, b, c), U3(d, e, g)) => a == d && b == e && c == g,
            (PhaseFlip(a), PhaseFlip(b)) => a == b,
            (Permutation(a), Permutation(b)) => a == b,
            // Callbacks are equal only when they are the same object.
            (DiagonalPhase(a), DiagonalPhase(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// One gate: kind, target qubits, and (possibly empty) control qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate<T> {
    pub kind: GateKind<T>,
    pub targets: Vec<usize>,
    pub controls: Vec<usize>,
}

impl<T: Real> Gate<T> {
    pub fn new(kind: GateKind<T>, targets: Vec<usize>, controls: Vec<usize>) -> Self {
        Gate {
            kind,
            targets,
            controls,
        }
    }

    pub fn h(t: usize) -> Self {
        Gate::new(GateKind::H, vec![t], vec![])
    }
    pub fn x(t: usize) -> Self {
        Gate::new(GateKind::X, vec![t], vec![])
    }
    pub fn y(t: usize) -> Self {
        Gate::new(GateKind::Y, vec![t], vec![])
    }
    pub fn z(t: usize) -> Self {
        Gate::new(GateKind::Z, vec![t], vec![])
    }
    pub fn rx(theta: T, t: usize) -> Self {
        Gate::new(GateKind::Rx(theta), vec![t], vec![])
    }
    pub fn ry(theta: T, t: usize) -> Self {
        Gate::new(GateKind::Ry(theta), vec![t], vec![])
    }
    pub fn rz(theta: T, t: usize) -> Self {
        Gate::new(GateKind::Rz(theta), vec![t], vec![])
    }
    pub fn phase(theta: T, t: usize) -> Self {
        Gate::new(GateKind::Phase(theta), vec![t], vec![])
    }
    pub fn cx(c: usize, t: usize) -> Self {
        Gate::new(GateKind::X, vec![t], vec![c])
    }
    pub fn cz(c: usize, t: usize) -> Self {
        Gate::new(GateKind::Z, vec![t], vec![c])
    }
    pub fn cp(theta: T, c: usize, t: usize) -> Self {
        Gate::new(GateKind::Phase(theta), vec![t], vec![c])
    }
    pub fn ccx(c1: usize, c2: usize, t: usize) -> Self {
        Gate::new(GateKind::X, vec![t], vec![c1, c2])
    }
    pub fn swap(a: usize, b: usize) -> Self {
        Gate::new(GateKind::Swap, vec![a, b], vec![])
    }

    /// Diagonal +-1 oracle over the whole `n`-qubit register.
    pub fn phase_flip(n: usize, indices: BTreeSet<u64>) -> Result<Self> {
        let dim = 1u64 << n;
        if let Some(&bad) = indices.iter().find(|&&i| i >= dim) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        Ok(Gate::new(
            GateKind::PhaseFlip(Arc::new(indices)),
            (0..n).collect(),
            vec![],
        ))
    }

    /// Whole-register diagonal phase gate from an angle callback.
    pub fn diagonal_phase(n: usize, f: AngleFn<T>) -> Self {
        Gate::new(GateKind::DiagonalPhase(f), (0..n).collect(), vec![])
    }

    /// Whole-register basis permutation; the table must be a bijection on
    /// `0..2^n`.
    pub fn permutation(n: usize, table: Vec<u64>) -> Result<Self> {
        let dim = 1usize << n;
        if table.len() != dim {
            return Err(Error::dim(format!(
                "permutation table has {} entries, expected 2^{n} = {dim}",
                table.len()
            )));
        }
        let mut seen = vec![false; dim];
        for &v in &table {
            if v >= dim as u64 || seen[v as usize] {
                return Err(Error::domain(
                    "permutation table is not a bijection on the basis indices",
                ));
            }
            seen[v as usize] = true;
        }
        Ok(Gate::new(
            GateKind::Permutation(Arc::new(table)),
            (0..n).collect(),
            vec![],
        ))
    }

    /// Adds control qubits to an elementary gate.
    pub fn controlled_by(mut self, controls: &[usize]) -> Self {
        self.controls.extend_from_slice(controls);
        self
    }

    fn is_semantic(&self) -> bool {
        matches!(
            self.kind,
            GateKind::PhaseFlip(_) | GateKind::DiagonalPhase(_) | GateKind::Permutation(_)
        )
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::domain("gate must have at least one target"));
        }
        for &q in self.targets.iter().chain(&self.controls) {
            if q >= n {
                return Err(Error::domain(format!(
                    "gate touches qubit {q} but the circuit has {n} qubit(s)"
                )));
            }
        }
        let mut seen = BTreeSet::new();
        for &q in self.targets.iter().chain(&self.controls) {
            if !seen.insert(q) {
                return Err(Error::domain(format!(
                    "gate uses qubit {q} more than once"
                )));
            }
        }
        let expected_targets = match self.kind {
            GateKind::Swap => 2,
            GateKind::PhaseFlip(_) | GateKind::DiagonalPhase(_) | GateKind::Permutation(_) => n,
            _ => 1,
        };
        if self.targets.len() != expected_targets {
            return Err(Error::domain(format!(
                "{:?} expects {expected_targets} target(s), got {}",
                self.kind,
                self.targets.len()
            )));
        }
        if self.is_semantic() && !self.controls.is_empty() {
            return Err(Error::domain(
                "semantic whole-register gates cannot take controls",
            ));
        }
        if let GateKind::Permutation(ref table) = self.kind {
            if table.len() != 1usize << n {
                return Err(Error::dim(format!(
                    "permutation table sized for {} entries used in a {n}-qubit circuit",
                    table.len()
                )));
            }
        }
        Ok(())
    }

    /// The 2x2 matrix `[m00, m01, m10, m11]` of an elementary kind.
    pub fn single_qubit_matrix(kind: &GateKind<T>) -> Option<[C<T>; 4]> {
        let zero = C::new(T::zero(), T::zero());
        let one = C::new(T::one(), T::zero());
        let i = C::new(T::zero(), T::one());
        let half = T::of(0.5);
        Some(match kind {
            GateKind::H => {
                let s = C::new(T::one() / T::of(2.0).sqrt(), T::zero());
                [s, s, s, -s]
            }
            GateKind::X => [zero, one, one, zero],
            GateKind::Y => [zero, -i, i, zero],
            GateKind::Z => [one, zero, zero, -one],
            GateKind::S => [one, zero, zero, i],
            GateKind::Sdg => [one, zero, zero, -i],
            GateKind::T => [
                one,
                zero,
                zero,
                Complex::from_polar(T::one(), T::FRAC_PI_4()),
            ],
            GateKind::Tdg => [
                one,
                zero,
                zero,
                Complex::from_polar(T::one(), -T::FRAC_PI_4()),
            ],
            GateKind::Rx(t) => {
                let (c, s) = ((*t * half).cos(), (*t * half).sin());
                [
                    C::new(c, T::zero()),
                    C::new(T::zero(), -s),
                    C::new(T::zero(), -s),
                    C::new(c, T::zero()),
                ]
            }
            GateKind::Ry(t) => {
                let (c, s) = ((*t * half).cos(), (*t * half).sin());
                [
                    C::new(c, T::zero()),
                    C::new(-s, T::zero()),
                    C::new(s, T::zero()),
                    C::new(c, T::zero()),
                ]
            }
            GateKind::Rz(t) => [
                Complex::from_polar(T::one(), -*t * half),
                zero,
                zero,
                Complex::from_polar(T::one(), *t * half),
            ],
            GateKind::Phase(t) => [one, zero, zero, Complex::from_polar(T::one(), *t)],
            GateKind::U3(t, phi, lam) => {
                let (c, s) = ((*t * half).cos(), (*t * half).sin());
                [
                    C::new(c, T::zero()),
                    -Complex::from_polar(s, *lam),
                    Complex::from_polar(s, *phi),
                    Complex::from_polar(c, *phi + *lam),
                ]
            }
            GateKind::Swap
            | GateKind::PhaseFlip(_)
            | GateKind::DiagonalPhase(_)
            | GateKind::Permutation(_) => return None,
        })
    }

    /// The inverse gate (controls and targets unchanged).
    pub fn inverse(&self) -> Self {
        use GateKind::*;
        let kind = match &self.kind {
            H => H,
            X => X,
            Y => Y,
            Z => Z,
            S => Sdg,
            Sdg => S,
            T => Tdg,
            Tdg => T,
            Rx(t) => Rx(-*t),
            Ry(t) => Ry(-*t),
            Rz(t) => Rz(-*t),
            Phase(t) => Phase(-*t),
            U3(t, phi, lam) => U3(-*t, -*lam, -*phi),
            Swap => Swap,
            PhaseFlip(s) => PhaseFlip(s.clone()),
            DiagonalPhase(f) => {
                let f = f.clone();
                DiagonalPhase(Arc::new(move |x| -f(x)))
            }
            Permutation(p) => {
                let mut inv = vec![0u64; p.len()];
                for (src, &dst) in p.iter().enumerate() {
                    inv[dst as usize] = src as u64;
                }
                Permutation(Arc::new(inv))
            }
        };
        Gate {
            kind,
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }
}

/// An ordered gate list over `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit<T> {
    n: usize,
    gates: Vec<Gate<T>>,
    name: String,
}

impl<T: Real> Circuit<T> {
    pub fn new(n: usize, name: impl Into<String>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("circuit must have at least one qubit"));
        }
        Ok(Circuit {
            n,
            gates: Vec::new(),
            name: name.into(),
        })
    }

    pub fn with_gates(n: usize, name: impl Into<String>, gates: Vec<Gate<T>>) -> Result<Self> {
        let mut c = Circuit::new(n, name)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate<T>) -> Result<()> {
        gate.validate(self.n)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate<T>] {
        &self.gates
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// The circuit applying the inverse map (reversed order, inverted gates).
    pub fn inverse(&self) -> Self {
        Circuit {
            n: self.n,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            name: format!("{}-inverse", self.name),
        }
    }

    /// One full pass over a dense state.
    pub fn apply_dense(&self, state: &DenseState<T>) -> Result<DenseState<T>> {
        if state.qubits() != self.n {
            return Err(Error::dim(format!(
                "{}-qubit circuit applied to a {}-qubit state",
                self.n,
                state.qubits()
            )));
        }
        let mut out = state.clone();
        for gate in &self.gates {
            apply_gate_dense(gate, &mut out);
        }
        Ok(out)
    }

    /// Builds the full `2^n x 2^n` matrix column-by-column. Only available
    /// up to [`DENSE_UNITARY_CAP_QUBITS`] qubits.
    pub fn unitary_matrix(&self) -> Result<DenseMatrix<T>> {
        if self.n > DENSE_UNITARY_CAP_QUBITS {
            return Err(Error::capacity(
                format!(
                    "dense unitary over {} qubits (cap {DENSE_UNITARY_CAP_QUBITS})",
                    self.n
                ),
                None,
            ));
        }
        let dim = 1usize << self.n;
        let mut m = DenseMatrix::zeros(dim, dim);
        for col in 0..dim {
            let e = DenseState::basis(self.n, col as u64)?;
            let u_e = self.apply_dense(&e)?;
            for (row, amp) in u_e.amplitudes().iter().enumerate() {
                m.set(row, col, *amp);
            }
        }
        Ok(m)
    }
}

/// Applies one gate in place to a dense amplitude array.
pub(crate) fn apply_gate_dense<T: Real>(gate: &Gate<T>, state: &mut DenseState<T>) {
    let n = state.qubits();
    let dim = 1usize << n;
    let cmask: usize = gate.controls.iter().map(|&c| 1usize << c).sum();
    match &gate.kind {
        GateKind::Swap => {
            let (abit, bbit) = (1usize << gate.targets[0], 1usize << gate.targets[1]);
            let amps = state.amplitudes_mut();
            for i in 0..dim {
                if i & abit != 0 && i & bbit == 0 && i & cmask == cmask {
                    let j = i ^ abit ^ bbit;
                    amps.swap(i, j);
                }
            }
        }
        GateKind::PhaseFlip(indices) => {
            let amps = state.amplitudes_mut();
            for &idx in indices.iter() {
                amps[idx as usize] = -amps[idx as usize];
            }
        }
        GateKind::DiagonalPhase(f) => {
            let amps = state.amplitudes_mut();
            for (x, a) in amps.iter_mut().enumerate() {
                *a *= Complex::from_polar(T::one(), f(x as u64));
            }
        }
        GateKind::Permutation(p) => {
            let zero = C::new(T::zero(), T::zero());
            let mut out = vec![zero; dim];
            let amps = state.amplitudes_mut();
            for (x, &a) in amps.iter().enumerate() {
                out[p[x] as usize] = a;
            }
            amps.copy_from_slice(&out);
        }
        kind => {
            let m = Gate::single_qubit_matrix(kind).expect("elementary gate");
            let tbit = 1usize << gate.targets[0];
            let amps = state.amplitudes_mut();
            for i in 0..dim {
                if i & tbit == 0 && i & cmask == cmask {
                    let j = i | tbit;
                    let (a0, a1) = (amps[i], amps[j]);
                    amps[i] = m[0] * a0 + m[1] * a1;
                    amps[j] = m[2] * a0 + m[3] * a1;
                }
            }
        }
    }
}
