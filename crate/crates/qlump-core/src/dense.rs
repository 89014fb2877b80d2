//! Dense statevectors and small dense complex matrices.
//!
//! The dense backend stores all `2^n` amplitudes explicitly. It doubles as
//! the reference oracle for the decision-diagram backend and hosts the
//! `d x d` reduced maps produced by lumping.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Largest qubit count for which a full dense statevector is allocated.
pub const DENSE_STATE_CAP_QUBITS: usize = 26;
/// Largest qubit count for which a full `2^n x 2^n` dense unitary is built.
pub const DENSE_UNITARY_CAP_QUBITS: usize = 14;

/// Checks the statevector cap and returns `2^n`.
pub fn dense_dimension(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::domain("qubit count must be at least 1"));
    }
    if n > DENSE_STATE_CAP_QUBITS {
        return Err(Error::capacity(
            format!("dense statevector over {n} qubits (cap {DENSE_STATE_CAP_QUBITS})"),
            None,
        ));
    }
    Ok(1usize << n)
}

/// A `2^n`-dimensional complex vector; entry `d` is the amplitude of the
/// basis state whose bits read `x_n ... x_1` with `x_1` least significant.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState<T> {
    n: usize,
    amps: Vec<C<T>>,
}

impl<T: Real> DenseState<T> {
    /// Basis state `|index>` over `n` qubits.
    pub fn basis(n: usize, index: u64) -> Result<Self> {
        let dim = dense_dimension(n)?;
        if index >= dim as u64 {
            return Err(Error::IndexOutOfRange { index, n });
        }
        let mut amps = vec![C::new(T::zero(), T::zero()); dim];
        amps[index as usize] = C::new(T::one(), T::zero());
        Ok(DenseState { n, amps })
    }

    /// The all-zero vector (not a quantum state; used as a residual).
    pub fn zero(n: usize) -> Result<Self> {
        let dim = dense_dimension(n)?;
        Ok(DenseState {
            n,
            amps: vec![C::new(T::zero(), T::zero()); dim],
        })
    }

    /// Uniform superposition over all basis states.
    pub fn uniform(n: usize) -> Result<Self> {
        let dim = dense_dimension(n)?;
        let w = T::one() / T::of(dim as f64).sqrt();
        Ok(DenseState {
            n,
            amps: vec![C::new(w, T::zero()); dim],
        })
    }

    /// Wraps explicit amplitudes; the length must be exactly `2^n` and all
    /// entries must be finite.
    pub fn from_amplitudes(n: usize, amps: Vec<C<T>>) -> Result<Self> {
        let dim = dense_dimension(n)?;
        if amps.len() != dim {
            return Err(Error::dim(format!(
                "expected 2^{n} = {dim} amplitudes, got {}",
                amps.len()
            )));
        }
        if amps
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::domain("amplitudes must be finite"));
        }
        Ok(DenseState { n, amps })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C<T>] {
        &mut self.amps
    }

    pub fn amplitude(&self, index: u64) -> Result<C<T>> {
        self.amps
            .get(index as usize)
            .copied()
            .ok_or(Error::IndexOutOfRange { index, n: self.n })
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &Self) -> Result<C<T>> {
        if self.n != other.n {
            return Err(Error::dim(format!(
                "inner product of {}-qubit and {}-qubit states",
                self.n, other.n
            )));
        }
        let mut acc = C::new(T::zero(), T::zero());
        for (a, b) in self.amps.iter().zip(&other.amps) {
            acc += a.conj() * b;
        }
        Ok(acc)
    }

    /// `self + alpha * x`.
    pub fn axpy(&self, alpha: C<T>, x: &Self) -> Result<Self> {
        if self.n != x.n {
            return Err(Error::dim(format!(
                "axpy of {}-qubit and {}-qubit states",
                self.n, x.n
            )));
        }
        let amps = self
            .amps
            .iter()
            .zip(&x.amps)
            .map(|(y, xv)| *y + alpha * xv)
            .collect();
        Ok(DenseState { n: self.n, amps })
    }

    pub fn scale(&self, alpha: C<T>) -> Self {
        DenseState {
            n: self.n,
            amps: self.amps.iter().map(|a| a * alpha).collect(),
        }
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, eps_norm: T) -> bool {
        (self.norm() - T::one()).abs() <= eps_norm
    }

    /// Returns `self / ||self||`; error when the norm is exactly zero.
    pub fn normalized(&self) -> Result<Self> {
        let nrm = self.norm();
        if nrm == T::zero() {
            return Err(Error::domain("cannot normalize the zero vector"));
        }
        Ok(self.scale(C::new(T::one() / nrm, T::zero())))
    }

    /// Max per-amplitude modulus of the difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.n != other.n {
            return Err(Error::dim("max_abs_diff on mismatched states"));
        }
        let mut worst = T::zero();
        for (a, b) in self.amps.iter().zip(&other.amps) {
            worst = worst.max((a - b).norm());
        }
        Ok(worst)
    }
}

/// `<a|b>` as a free function, matching the operation vocabulary used by
/// the lumping code.
pub fn inner_product<T: Real>(a: &DenseState<T>, b: &DenseState<T>) -> Result<C<T>> {
    a.inner_product(b)
}

/// `y + alpha * x`.
pub fn axpy<T: Real>(alpha: C<T>, x: &DenseState<T>, y: &DenseState<T>) -> Result<DenseState<T>> {
    y.axpy(alpha, x)
}

/// Row-major dense complex matrix. Used for reduced maps (`d x d`) and
/// for full unitaries up to [`DENSE_UNITARY_CAP_QUBITS`] qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![C::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.set(i, i, C::new(T::one(), T::zero()));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C<T>>>) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::dim("matrix must have at least one row"));
        }
        let c = rows[0].len();
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::dim("ragged rows in matrix literal"));
        }
        Ok(DenseMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C<T> {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C<T>) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    /// Standard matrix-vector product.
    pub fn mat_vec(&self, v: &[C<T>]) -> Result<Vec<C<T>>> {
        if v.len() != self.cols {
            return Err(Error::dim(format!(
                "mat_vec: {}x{} matrix applied to length-{} vector",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![C::new(T::zero(), T::zero()); self.rows];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut acc = C::new(T::zero(), T::zero());
            for (m, x) in row.iter().zip(v) {
                acc += m * x;
            }
            out[r] = acc;
        }
        Ok(out)
    }

    pub fn mat_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::dim(format!(
                "mat_mul: {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.norm_sqr() == T::zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let v = out.get(r, c) + a * other.get(k, c);
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    /// Max-entry modulus of `M†M - I`; zero for an exactly unitary map.
    pub fn unitarity_residual(&self) -> Result<T> {
        if self.rows != self.cols {
            return Err(Error::dim(format!(
                "unitarity residual of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let mut worst = T::zero();
        for i in 0..self.cols {
            for j in 0..self.cols {
                // (M†M)_{ij} = sum_k conj(M_{ki}) M_{kj}
                let mut acc = C::new(T::zero(), T::zero());
                for k in 0..self.rows {
                    acc += self.get(k, i).conj() * self.get(k, j);
                }
                if i == j {
                    acc -= C::new(T::one(), T::zero());
                }
                worst = worst.max(acc.norm());
            }
        }
        Ok(worst)
    }

    /// Max-entry modulus of `M - M†`.
    pub fn hermiticity_residual(&self) -> Result<T> {
        if self.rows != self.cols {
            return Err(Error::dim("hermiticity residual of a non-square matrix"));
        }
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        Ok(worst)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dim("max_abs_diff on mismatched matrices"));
        }
        let mut worst = T::zero();
        for (a, b) in self.data.iter().zip(&other.data) {
            worst = worst.max((a - b).norm());
        }
        Ok(worst)
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Returns real eigenvalues and the unitary of eigenvectors
    /// (columns), so that `M = V diag(lambda) V†`.
    pub fn hermitian_eig(&self, eps_amp: T) -> Result<(Vec<T>, DenseMatrix<T>)> {
        if self.rows != self.cols {
            return Err(Error::dim("eigendecomposition of a non-square matrix"));
        }
        if self.hermiticity_residual()? > eps_amp {
            return Err(Error::domain("matrix is not Hermitian within tolerance"));
        }
        let d = self.rows;
        // Work on the Hermitian average to wash out eps-level asymmetry.
        let mut a = Self::zeros(d, d);
        let half = T::of(0.5);
        for i in 0..d {
            for j in 0..d {
                let v = (self.get(i, j) + self.get(j, i).conj()) * C::new(half, T::zero());
                a.set(i, j, v);
            }
        }
        let mut v = Self::identity(d);
        let scale: T = a.data.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt();
        let stop = scale * T::of(1e-15) + T::of(1e-300);
        for _sweep in 0..64 {
            let mut off = T::zero();
            for p in 0..d {
                for q in (p + 1)..d {
                    off = off.max(a.get(p, q).norm());
                }
            }
            if off <= stop {
                break;
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    let beta = a.get(p, q);
                    let b = beta.norm();
                    if b <= stop {
                        continue;
                    }
                    // Phase that makes the pivot real, then a real rotation.
                    let ephi = beta.conj() / C::new(b, T::zero());
                    let alpha = a.get(p, p).re;
                    let gamma = a.get(q, q).re;
                    let tau = (gamma - alpha) / (T::of(2.0) * b);
                    let t = if tau >= T::zero() {
                        T::one() / (tau + (T::one() + tau * tau).sqrt())
                    } else {
                        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                    };
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = t * c;
                    let (cc, sc) = (C::new(c, T::zero()), C::new(s, T::zero()));
                    // Right-multiply by the rotation:
                    //   col_p' = c*col_p - s*ephi*col_q
                    //   col_q' = s*col_p + c*ephi*col_q
                    for k in 0..d {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, cc * akp - sc * ephi * akq);
                        a.set(k, q, sc * akp + cc * ephi * akq);
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, cc * vkp - sc * ephi * vkq);
                        v.set(k, q, sc * vkp + cc * ephi * vkq);
                    }
                    // Left-multiply by its conjugate transpose.
                    for k in 0..d {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, cc * apk - sc * ephi.conj() * aqk);
                        a.set(q, k, sc * apk + cc * ephi.conj() * aqk);
                    }
                }
            }
        }
        let eigs = (0..d).map(|i| a.get(i, i).re).collect();
        Ok((eigs, v))
    }

    /// `exp(-i * delta * H)` for Hermitian `H`, via eigendecomposition.
    pub fn hermitian_phase_exp(&self, delta: T, eps_amp: T) -> Result<DenseMatrix<T>> {
        let (eigs, v) = self.hermitian_eig(eps_amp)?;
        let d = self.rows;
        let mut out = Self::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = C::new(T::zero(), T::zero());
                for k in 0..d {
                    let phase = Complex::from_polar(T::one(), -delta * eigs[k]);
                    acc += v.get(i, k) * phase * v.get(j, k).conj();
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }
}

/// Free-function form of the matrix-vector product.
pub fn mat_vec<T: Real>(m: &DenseMatrix<T>, v: &[C<T>]) -> Result<Vec<C<T>>> {
    m.mat_vec(v)
}

/// Free-function form of the unitarity residual.
pub fn unitarity_residual<T: Real>(m: &DenseMatrix<T>) -> Result<T> {
    m.unitarity_residual()
}
