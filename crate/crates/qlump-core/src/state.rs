//! Backend abstraction: one state interface over dense vectors and
//! decision diagrams, so reduction and simulation code is written once.

use crate::circuit::Circuit;
use crate::dd::{DdManager, DdState};
use crate::dense::DenseState;
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Which concrete representation a state or basis lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Dense,
    Dd,
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BackendKind::Dense => write!(f, "dense"),
            BackendKind::Dd => write!(f, "dd"),
        }
    }
}

impl std::str::FromStr for BackendKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dense" => Ok(BackendKind::Dense),
            "dd" => Ok(BackendKind::Dd),
            other => Err(Error::domain(format!("unknown backend '{other}'"))),
        }
    }
}

/// Abstract state handle: the operations lumping and simulation need,
/// implemented by both concrete representations.
pub trait QuantumState<T: Real>: Clone + Send {
    fn qubits(&self) -> usize;

    /// `<self|other>`, conjugate-linear in `self`.
    fn inner_product(&self, other: &Self) -> Result<C<T>>;

    /// `self + alpha * x`.
    fn axpy(&self, alpha: C<T>, x: &Self) -> Result<Self>;

    fn scale(&self, alpha: C<T>) -> Self;

    fn norm(&self) -> T;

    fn apply_circuit(&self, circuit: &Circuit<T>) -> Result<Self>;

    fn amplitude(&self, index: u64) -> Result<C<T>>;

    fn to_dense(&self) -> Result<DenseState<T>>;

    /// `sum_x f(x) |amp_x|^2`.
    fn diagonal_expectation(&self, f: &dyn Fn(u64) -> T) -> T;

    /// Graph description of the underlying representation, when one
    /// exists (decision diagrams only).
    fn graph_export(&self) -> Option<String> {
        None
    }

    /// Rebuilds a group of states into fresh shared storage when the
    /// representation benefits from it. Decision diagrams drop all
    /// transient nodes this way; dense states need nothing.
    fn compact_group(_states: &mut [Self]) -> Result<()>
    where
        Self: Sized,
    {
        Ok(())
    }
}

impl<T: Real> QuantumState<T> for DenseState<T> {
    fn qubits(&self) -> usize {
        DenseState::qubits(self)
    }

    fn inner_product(&self, other: &Self) -> Result<C<T>> {
        DenseState::inner_product(self, other)
    }

    fn axpy(&self, alpha: C<T>, x: &Self) -> Result<Self> {
        DenseState::axpy(self, alpha, x)
    }

    fn scale(&self, alpha: C<T>) -> Self {
        DenseState::scale(self, alpha)
    }

    fn norm(&self) -> T {
        DenseState::norm(self)
    }

    fn apply_circuit(&self, circuit: &Circuit<T>) -> Result<Self> {
        circuit.apply_dense(self)
    }

    fn amplitude(&self, index: u64) -> Result<C<T>> {
        DenseState::amplitude(self, index)
    }

    fn to_dense(&self) -> Result<DenseState<T>> {
        Ok(self.clone())
    }

    fn diagonal_expectation(&self, f: &dyn Fn(u64) -> T) -> T {
        self.amplitudes()
            .iter()
            .enumerate()
            .map(|(x, a)| f(x as u64) * a.norm_sqr())
            .sum()
    }
}

impl<T: Real> QuantumState<T> for DdState<T> {
    fn qubits(&self) -> usize {
        DdState::qubits(self)
    }

    fn inner_product(&self, other: &Self) -> Result<C<T>> {
        DdState::inner_product(self, other)
    }

    fn axpy(&self, alpha: C<T>, x: &Self) -> Result<Self> {
        DdState::axpy(self, alpha, x)
    }

    fn scale(&self, alpha: C<T>) -> Self {
        DdState::scale(self, alpha)
    }

    fn norm(&self) -> T {
        DdState::norm(self)
    }

    fn apply_circuit(&self, circuit: &Circuit<T>) -> Result<Self> {
        DdState::apply_circuit(self, circuit)
    }

    fn amplitude(&self, index: u64) -> Result<C<T>> {
        DdState::amplitude(self, index)
    }

    fn to_dense(&self) -> Result<DenseState<T>> {
        self.decode()
    }

    fn diagonal_expectation(&self, f: &dyn Fn(u64) -> T) -> T {
        DdState::diagonal_expectation(self, f)
    }

    fn graph_export(&self) -> Option<String> {
        Some(DdState::export_graph(self))
    }

    fn compact_group(states: &mut [Self]) -> Result<()> {
        DdManager::compact_group(states)
    }
}

/// State factory for one backend.
pub trait Backend<T: Real> {
    type State: QuantumState<T>;

    fn kind(&self) -> BackendKind;

    fn basis_state(&self, n: usize, index: u64) -> Result<Self::State>;

    fn uniform_state(&self, n: usize) -> Result<Self::State>;

    fn encode(&self, v: &DenseState<T>) -> Result<Self::State>;
}

/// Dense statevector backend (stateless).
#[derive(Debug, Clone, Copy, Default)]
pub struct DenseBackend;

impl<T: Real> Backend<T> for DenseBackend {
    type State = DenseState<T>;

    fn kind(&self) -> BackendKind {
        BackendKind::Dense
    }

    fn basis_state(&self, n: usize, index: u64) -> Result<Self::State> {
        DenseState::basis(n, index)
    }

    fn uniform_state(&self, n: usize) -> Result<Self::State> {
        DenseState::uniform(n)
    }

    fn encode(&self, v: &DenseState<T>) -> Result<Self::State> {
        Ok(v.clone())
    }
}

/// Decision-diagram backend wrapping one manager.
#[derive(Clone)]
pub struct DdBackend<T> {
    manager: DdManager<T>,
}

impl<T: Real> Default for DdBackend<T> {
    fn default() -> Self {
        DdBackend {
            manager: DdManager::default(),
        }
    }
}

impl<T: Real> DdBackend<T> {
    /// Backend over a fresh manager with the given merge grid. Numerical
    /// pipelines should prefer [`DdBackend::default`], which uses the
    /// machine-precision grid.
    pub fn new(merge_eps: T) -> Self {
        DdBackend {
            manager: DdManager::new(merge_eps),
        }
    }

    pub fn with_manager(manager: DdManager<T>) -> Self {
        DdBackend { manager }
    }

    pub fn manager(&self) -> &DdManager<T> {
        &self.manager
    }
}

impl<T: Real> Backend<T> for DdBackend<T> {
    type State = DdState<T>;

    fn kind(&self) -> BackendKind {
        BackendKind::Dd
    }

    fn basis_state(&self, n: usize, index: u64) -> Result<Self::State> {
        self.manager.basis_state(n, index)
    }

    fn uniform_state(&self, n: usize) -> Result<Self::State> {
        self.manager.uniform_state(n)
    }

    fn encode(&self, v: &DenseState<T>) -> Result<Self::State> {
        self.manager.encode(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exercise_backend<T: Real, B: Backend<T>>(backend: &B) {
        let psi = backend.uniform_state(3).unwrap();
        assert!((psi.norm() - T::one()).abs() < T::of(1e-6));
        let e5 = backend.basis_state(3, 5).unwrap();
        let ip = psi.inner_product(&e5).unwrap();
        let expect = T::one() / T::of(8.0).sqrt();
        assert!((ip.re - expect).abs() < T::of(1e-6));
        let count: T = e5.diagonal_expectation(&|x| T::of(x.count_ones() as f64));
        assert!((count - T::of(2.0)).abs() < T::of(1e-6));
    }

    #[test]
    fn both_backends_satisfy_the_interface() {
        exercise_backend::<f64, _>(&DenseBackend);
        exercise_backend::<f64, _>(&DdBackend::<f64>::new(1e-12));
        exercise_backend::<f32, _>(&DenseBackend);
    }

    #[test]
    fn backend_kind_parses() {
        assert_eq!("dense".parse::<BackendKind>().unwrap(), BackendKind::Dense);
        assert_eq!("DD".parse::<BackendKind>().unwrap(), BackendKind::Dd);
        assert!("tensor".parse::<BackendKind>().is_err());
    }
}
