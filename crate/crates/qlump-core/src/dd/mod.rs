//! Canonical vector decision diagrams.
//!
//! A state over `n` qubits is stored as a DAG with one node level per
//! qubit (level 0 at the bottom, qubit 0 = least-significant index bit).
//! Each node has a low and a high successor edge carrying complex
//! weights; the amplitude of basis state `d` is the product of edge
//! weights along the path selected by the bits of `d`. Identical
//! subvectors are shared: nodes are hash-consed through a unique table,
//! so two equal states are represented by the identical root edge.
//!
//! Canonical form: at every node the outgoing weight pair is divided by
//! the weight of larger magnitude (ties resolved to the low edge), making
//! that weight exactly 1 and pushing the factor into the incoming edge.
//! Normalizing by the larger weight keeps every stored weight bounded by
//! one, so the `eps`-grid unique-table keys and the zero snap below are
//! sound: a remaining weight with magnitude at most `eps` is snapped to
//! the zero stub, and keys quantize weights to the `eps` grid so merging
//! is tolerance-consistent.
//!
//! A manager owns the node store; states referencing the same manager may
//! be combined. The manager is internally locked, which confines it to
//! one worker at a time; independent computations should use separate
//! managers. Operation caches live only for the duration of one
//! top-level call.

mod apply;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use crate::circuit::Circuit;
use crate::dense::{dense_dimension, DenseState};
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

pub(crate) type NodeId = u32;
pub(crate) const TERMINAL: NodeId = u32::MAX;

/// Multiply-xor hasher for the hot node/cache maps (node ids and weight
/// bit patterns hash well without SipHash's overhead).
#[derive(Default, Clone)]
pub(crate) struct FxHasher(u64);

impl std::hash::Hasher for FxHasher {
    #[inline]
    fn finish(&self) -> u64 {
        self.0
    }

    #[inline]
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.write_u64(b as u64);
        }
    }

    #[inline]
    fn write_u8(&mut self, v: u8) {
        self.write_u64(v as u64);
    }

    #[inline]
    fn write_u32(&mut self, v: u32) {
        self.write_u64(v as u64);
    }

    #[inline]
    fn write_u64(&mut self, v: u64) {
        self.0 = (self.0.rotate_left(5) ^ v).wrapping_mul(0x517c_c1b7_2722_0a95);
    }

    #[inline]
    fn write_i64(&mut self, v: i64) {
        self.write_u64(v as u64);
    }

    #[inline]
    fn write_usize(&mut self, v: usize) {
        self.write_u64(v as u64);
    }
}

pub(crate) type FxBuild = std::hash::BuildHasherDefault<FxHasher>;
pub(crate) type FxMap<K, V> = HashMap<K, V, FxBuild>;

/// A weighted edge to a node or to the terminal.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Edge<T> {
    pub target: NodeId,
    pub weight: C<T>,
}

impl<T: Real> Edge<T> {
    pub fn zero() -> Self {
        Edge {
            target: TERMINAL,
            weight: C::new(T::zero(), T::zero()),
        }
    }

    pub fn terminal(weight: C<T>) -> Self {
        Edge {
            target: TERMINAL,
            weight,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.weight.re == T::zero() && self.weight.im == T::zero()
    }

    pub fn scaled(&self, alpha: C<T>) -> Self {
        if self.is_zero() || (alpha.re == T::zero() && alpha.im == T::zero()) {
            return Edge::zero();
        }
        Edge {
            target: self.target,
            weight: self.weight * alpha,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Node<T> {
    pub level: u8,
    pub low: Edge<T>,
    pub high: Edge<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct UniqueKey {
    level: u8,
    low_target: NodeId,
    high_target: NodeId,
    /// 0: weights are (1, w); 1: weights are (0, 1).
    tag: u8,
    qre: i64,
    qim: i64,
}

/// The node store behind one manager.
pub(crate) struct Store<T> {
    nodes: Vec<Node<T>>,
    unique: FxMap<UniqueKey, Vec<NodeId>>,
    eps: T,
    /// Probe neighbor grid cells only when the grid is semantically
    /// coarse; at machine scale the exact cell suffices.
    tolerant: bool,
}

impl<T: Real> Store<T> {
    fn new(eps: T) -> Self {
        Store {
            nodes: Vec::new(),
            unique: FxMap::default(),
            eps,
            tolerant: eps > T::epsilon() * T::of(64.0),
        }
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    #[inline]
    pub fn node(&self, id: NodeId) -> &Node<T> {
        &self.nodes[id as usize]
    }

    fn quantize(&self, x: T) -> i64 {
        (x / self.eps)
            .round()
            .to_i64()
            .unwrap_or_else(|| if x > T::zero() { i64::MAX } else { i64::MIN })
    }

    /// Hash-conses a node in canonical form and returns the edge carrying
    /// the normalization factor.
    pub fn make_node(&mut self, level: u8, low: Edge<T>, high: Edge<T>) -> Edge<T> {
        let nl = low.weight.norm_sqr();
        let nh = high.weight.norm_sqr();
        if nl.max(nh) == T::zero() {
            return Edge::zero();
        }
        let one = C::new(T::one(), T::zero());
        // Divide by the larger weight; the free weight then has magnitude
        // at most 1 + O(eps), so the absolute eps grid below is safe.
        // Near-ties resolve to the low edge within a relative margin, so
        // equal-magnitude pairs keep one canonical form under eps-level
        // perturbations of either side.
        let low_is_unit = nl >= nh * (T::one() - T::of(8.0) * self.eps);
        let factor = if low_is_unit { low.weight } else { high.weight };
        let mut free = if low_is_unit {
            high.weight / factor
        } else {
            low.weight / factor
        };
        let mut free_target = if low_is_unit { high.target } else { low.target };
        // Snap: the free weight is bounded by 1, so magnitude at most eps
        // contributes at most eps per amplitude downstream.
        if free.norm_sqr() <= self.eps * self.eps {
            free = C::new(T::zero(), T::zero());
            free_target = TERMINAL;
        }
        let (canon_low, canon_high, tag) = if low_is_unit {
            (
                Edge {
                    target: low.target,
                    weight: one,
                },
                Edge {
                    target: free_target,
                    weight: free,
                },
                0u8,
            )
        } else {
            (
                Edge {
                    target: free_target,
                    weight: free,
                },
                Edge {
                    target: high.target,
                    weight: one,
                },
                1u8,
            )
        };
        let (qre, qim) = (self.quantize(free.re), self.quantize(free.im));

        // Probe the cell, and on coarse grids also its neighbors, so
        // that weights within eps of an existing node merge with it.
        const DELTAS: [(i64, i64); 9] = [
            (0, 0),
            (-1, 0),
            (1, 0),
            (0, -1),
            (0, 1),
            (-1, -1),
            (-1, 1),
            (1, -1),
            (1, 1),
        ];
        let probes = if self.tolerant { &DELTAS[..] } else { &DELTAS[..1] };
        for &(dre, dim) in probes {
            let key = UniqueKey {
                level,
                low_target: canon_low.target,
                high_target: canon_high.target,
                tag,
                qre: qre.saturating_add(dre),
                qim: qim.saturating_add(dim),
            };
            if let Some(bucket) = self.unique.get(&key) {
                for &id in bucket {
                    let cand = &self.nodes[id as usize];
                    let cand_free = if tag == 0 {
                        cand.high.weight
                    } else {
                        cand.low.weight
                    };
                    if (cand_free - free).norm_sqr() <= self.eps * self.eps {
                        return Edge { target: id, weight: factor };
                    }
                }
            }
        }

        let id = self.nodes.len() as NodeId;
        assert!(id < TERMINAL, "decision-diagram node store overflow");
        self.nodes.push(Node {
            level,
            low: canon_low,
            high: canon_high,
        });
        self.unique
            .entry(UniqueKey {
                level,
                low_target: canon_low.target,
                high_target: canon_high.target,
                tag,
                qre,
                qim,
            })
            .or_default()
            .push(id);
        Edge { target: id, weight: factor }
    }

    /// Elementwise sum of two edges entering the same level.
    pub fn add(&mut self, a: Edge<T>, b: Edge<T>, level: i32) -> Edge<T> {
        let mut cache = AddCache::default();
        self.add_rec(a, b, level, &mut cache)
    }

    pub(crate) fn add_rec(
        &mut self,
        a: Edge<T>,
        b: Edge<T>,
        level: i32,
        cache: &mut AddCache<T>,
    ) -> Edge<T> {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if level < 0 {
            return Edge::terminal(a.weight + b.weight);
        }
        // Factor the weights out so the cache key is scale-invariant:
        // a + b = a.w * (A + r B) with r = b.w / a.w.
        let r = b.weight / a.weight;
        let key = (a.target, b.target, r.re.key_bits(), r.im.key_bits());
        if let Some(hit) = cache.get(&key) {
            return hit.scaled(a.weight);
        }
        let na = *self.node(a.target);
        let nb = *self.node(b.target);
        debug_assert_eq!(na.level as i32, level);
        debug_assert_eq!(nb.level as i32, level);
        let low = self.add_rec(na.low, nb.low.scaled(r), level - 1, cache);
        let high = self.add_rec(na.high, nb.high.scaled(r), level - 1, cache);
        let unit = self.make_node(level as u8, low, high);
        cache.insert(key, unit);
        unit.scaled(a.weight)
    }

    /// `<a|b>` over edges entering the same level.
    fn inner(&self, a: Edge<T>, b: Edge<T>, level: i32) -> C<T> {
        let mut cache: FxMap<(NodeId, NodeId), C<T>> = FxMap::default();
        self.inner_rec(a, b, level, &mut cache)
    }

    fn inner_rec(
        &self,
        a: Edge<T>,
        b: Edge<T>,
        level: i32,
        cache: &mut FxMap<(NodeId, NodeId), C<T>>,
    ) -> C<T> {
        if a.is_zero() || b.is_zero() {
            return C::new(T::zero(), T::zero());
        }
        if level < 0 {
            return a.weight.conj() * b.weight;
        }
        let pair = (a.target, b.target);
        let sum = if let Some(&s) = cache.get(&pair) {
            s
        } else {
            let na = *self.node(a.target);
            let nb = *self.node(b.target);
            let s = self.inner_rec(na.low, nb.low, level - 1, cache)
                + self.inner_rec(na.high, nb.high, level - 1, cache);
            cache.insert(pair, s);
            s
        };
        a.weight.conj() * b.weight * sum
    }

    fn decode_rec(&self, e: Edge<T>, level: i32, base: u64, acc: C<T>, out: &mut [C<T>]) {
        if e.is_zero() {
            return;
        }
        let acc = acc * e.weight;
        if level < 0 {
            out[base as usize] = acc;
            return;
        }
        let node = self.node(e.target);
        self.decode_rec(node.low, level - 1, base, acc, out);
        self.decode_rec(node.high, level - 1, base | 1 << level, acc, out);
    }

    fn encode_rec(&mut self, amps: &[C<T>], level: i32) -> Edge<T> {
        if level < 0 {
            let w = amps[0];
            if w.norm_sqr() <= self.eps * self.eps {
                return Edge::zero();
            }
            return Edge::terminal(w);
        }
        let half = amps.len() / 2;
        let low = self.encode_rec(&amps[..half], level - 1);
        let high = self.encode_rec(&amps[half..], level - 1);
        self.make_node(level as u8, low, high)
    }

    pub(crate) fn node_count(&self, root: Edge<T>) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![root];
        while let Some(e) = stack.pop() {
            if e.is_zero() || e.target == TERMINAL {
                continue;
            }
            if seen.insert(e.target) {
                let node = self.node(e.target);
                stack.push(node.low);
                stack.push(node.high);
            }
        }
        seen.len()
    }
}

pub(crate) type AddCache<T> = FxMap<(NodeId, NodeId, u64, u64), Edge<T>>;

/// Merge grid for managers feeding numerical pipelines (reductions and
/// regime simulation): a few units of machine precision, so node merging
/// never loses more than ordinary rounding. Gram-Schmidt normalization of
/// nearly dependent iterates amplifies representation noise by the
/// reciprocal residual norm, which rules out the (much coarser) amplitude
/// tolerance as a grid there; managers meant for tolerance-based state
/// identity pass the amplitude tolerance to [`DdManager::new`] instead.
pub fn numeric_merge_eps<T: Real>() -> T {
    T::epsilon() * T::of(4.0)
}

/// Shared handle to a decision-diagram node store.
///
/// Cloning the handle shares the store; states can only be combined when
/// they were created through the same manager.
#[derive(Clone)]
pub struct DdManager<T> {
    store: Arc<Mutex<Store<T>>>,
}

impl<T: Real> Default for DdManager<T> {
    fn default() -> Self {
        Self::new(numeric_merge_eps())
    }
}

impl<T: Real> DdManager<T> {
    /// A fresh manager with merge tolerance `eps_amp`.
    pub fn new(eps_amp: T) -> Self {
        assert!(eps_amp > T::zero(), "merge tolerance must be positive");
        DdManager {
            store: Arc::new(Mutex::new(Store::new(eps_amp))),
        }
    }

    fn same_store(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.store, &other.store)
    }

    pub(crate) fn lock(&self) -> std::sync::MutexGuard<'_, Store<T>> {
        self.store.lock().expect("dd store poisoned")
    }

    fn check_qubits(n: usize) -> Result<()> {
        if n == 0 || n > 62 {
            return Err(Error::domain(format!(
                "decision diagrams support 1..=62 qubits, got {n}"
            )));
        }
        Ok(())
    }

    /// The canonical basis state `|index>`; at most `n` nodes.
    pub fn basis_state(&self, n: usize, index: u64) -> Result<DdState<T>> {
        Self::check_qubits(n)?;
        if index >> n != 0 {
            return Err(Error::IndexOutOfRange { index, n });
        }
        let mut store = self.lock();
        let one = C::new(T::one(), T::zero());
        let mut e = Edge::terminal(one);
        for level in 0..n {
            let (low, high) = if index >> level & 1 == 0 {
                (e, Edge::zero())
            } else {
                (Edge::zero(), e)
            };
            e = store.make_node(level as u8, low, high);
        }
        drop(store);
        Ok(DdState {
            n,
            root: e,
            mgr: self.clone(),
        })
    }

    /// The all-zero vector (a terminal edge with weight 0).
    pub fn zero_state(&self, n: usize) -> Result<DdState<T>> {
        Self::check_qubits(n)?;
        Ok(DdState {
            n,
            root: Edge::zero(),
            mgr: self.clone(),
        })
    }

    /// The uniform superposition; one shared node per level.
    pub fn uniform_state(&self, n: usize) -> Result<DdState<T>> {
        Self::check_qubits(n)?;
        let mut store = self.lock();
        let one = C::new(T::one(), T::zero());
        let mut e = Edge::terminal(one);
        for level in 0..n {
            e = store.make_node(level as u8, e, e);
        }
        let scale = T::one() / T::of((1u64 << n) as f64).sqrt();
        let root = e.scaled(C::new(scale, T::zero()));
        drop(store);
        Ok(DdState {
            n,
            root,
            mgr: self.clone(),
        })
    }

    /// Structurally copies the given states (which must share one
    /// manager) into a fresh store, dropping every node unreachable from
    /// them, and rebinds the states in place. Long-running loops call
    /// this to bound transient node growth; it is skipped while the store
    /// is small.
    pub fn compact_group(states: &mut [DdState<T>]) -> Result<()> {
        const SKIP_BELOW_NODES: usize = 50_000;
        let Some(first) = states.first() else {
            return Ok(());
        };
        let old_mgr = first.mgr.clone();
        if states.iter().any(|s| !s.mgr.same_store(&old_mgr)) {
            return Err(Error::dim("compacting states from different managers"));
        }
        let old = old_mgr.lock();
        if old.nodes.len() < SKIP_BELOW_NODES {
            return Ok(());
        }
        let fresh = DdManager::new(old.eps);
        {
            let mut new = fresh.lock();
            let mut memo: FxMap<NodeId, Edge<T>> = FxMap::default();
            for state in states.iter_mut() {
                state.root = copy_edge(&old, &mut new, state.root, &mut memo);
            }
        }
        drop(old);
        for state in states.iter_mut() {
            state.mgr = fresh.clone();
        }
        Ok(())
    }

    /// Encodes a dense vector by recursive halving. Amplitudes with
    /// magnitude at most the merge tolerance become zero stubs.
    pub fn encode(&self, state: &DenseState<T>) -> Result<DdState<T>> {
        let n = state.qubits();
        Self::check_qubits(n)?;
        let mut store = self.lock();
        let root = store.encode_rec(state.amplitudes(), n as i32 - 1);
        drop(store);
        Ok(DdState {
            n,
            root,
            mgr: self.clone(),
        })
    }
}

/// A state vector held as a decision diagram, tied to its manager.
#[derive(Clone)]
pub struct DdState<T> {
    n: usize,
    root: Edge<T>,
    mgr: DdManager<T>,
}

impl<T: Real> DdState<T> {
    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn manager(&self) -> &DdManager<T> {
        &self.mgr
    }

    pub fn is_zero(&self) -> bool {
        self.root.is_zero()
    }

    fn check_compatible(&self, other: &Self, what: &str) -> Result<()> {
        if self.n != other.n {
            return Err(Error::dim(format!(
                "{what} of {}-qubit and {}-qubit diagrams",
                self.n, other.n
            )));
        }
        if !self.mgr.same_store(&other.mgr) {
            return Err(Error::dim(format!(
                "{what} of diagrams from different managers"
            )));
        }
        Ok(())
    }

    /// Elementwise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other, "sum")?;
        let mut store = self.mgr.lock();
        let root = store.add(self.root, other.root, self.n as i32 - 1);
        drop(store);
        Ok(DdState {
            n: self.n,
            root,
            mgr: self.mgr.clone(),
        })
    }

    /// Scalar multiple (rescales the root weight).
    pub fn scale(&self, alpha: C<T>) -> Self {
        DdState {
            n: self.n,
            root: self.root.scaled(alpha),
            mgr: self.mgr.clone(),
        }
    }

    /// `self + alpha * x`.
    pub fn axpy(&self, alpha: C<T>, x: &Self) -> Result<Self> {
        self.add(&x.scale(alpha))
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &Self) -> Result<C<T>> {
        self.check_compatible(other, "inner product")?;
        let store = self.mgr.lock();
        Ok(store.inner(self.root, other.root, self.n as i32 - 1))
    }

    pub fn norm_sqr(&self) -> T {
        let store = self.mgr.lock();
        store.inner(self.root, self.root, self.n as i32 - 1).re
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().max(T::zero()).sqrt()
    }

    /// Amplitude of one basis state: the weight product along its path.
    pub fn amplitude(&self, index: u64) -> Result<C<T>> {
        if index >> self.n != 0 {
            return Err(Error::IndexOutOfRange {
                index,
                n: self.n,
            });
        }
        let store = self.mgr.lock();
        let mut acc = C::new(T::one(), T::zero());
        let mut e = self.root;
        for level in (0..self.n as i32).rev() {
            if e.is_zero() {
                return Ok(C::new(T::zero(), T::zero()));
            }
            acc *= e.weight;
            let node = store.node(e.target);
            e = if index >> level & 1 == 0 {
                node.low
            } else {
                node.high
            };
        }
        if e.is_zero() {
            return Ok(C::new(T::zero(), T::zero()));
        }
        Ok(acc * e.weight)
    }

    /// Expands into a dense vector (bounded by the dense statevector cap).
    pub fn decode(&self) -> Result<DenseState<T>> {
        let dim = dense_dimension(self.n)?;
        let mut out = vec![C::new(T::zero(), T::zero()); dim];
        let store = self.mgr.lock();
        store.decode_rec(
            self.root,
            self.n as i32 - 1,
            0,
            C::new(T::one(), T::zero()),
            &mut out,
        );
        drop(store);
        DenseState::from_amplitudes(self.n, out)
    }

    /// Number of distinct nonterminal nodes reachable from the root.
    pub fn node_count(&self) -> usize {
        let store = self.mgr.lock();
        store.node_count(self.root)
    }

    /// `sum_x f(x) |amp_x|^2`, accumulated path-wise.
    pub fn diagonal_expectation(&self, f: &dyn Fn(u64) -> T) -> T {
        let store = self.mgr.lock();
        let mut acc = T::zero();
        fn rec<T: Real>(
            store: &Store<T>,
            e: Edge<T>,
            level: i32,
            base: u64,
            w2: T,
            f: &dyn Fn(u64) -> T,
            acc: &mut T,
        ) {
            if e.is_zero() {
                return;
            }
            let w2 = w2 * e.weight.norm_sqr();
            if level < 0 {
                *acc += f(base) * w2;
                return;
            }
            let node = store.node(e.target);
            rec(store, node.low, level - 1, base, w2, f, acc);
            rec(store, node.high, level - 1, base | 1 << level, w2, f, acc);
        }
        rec(
            &store,
            self.root,
            self.n as i32 - 1,
            0,
            T::one(),
            f,
            &mut acc,
        );
        acc
    }

    /// Canonical equality: identical root node and root weights within the
    /// manager's merge tolerance.
    pub fn approx_eq(&self, other: &Self) -> bool {
        if self.n != other.n || !self.mgr.same_store(&other.mgr) {
            return false;
        }
        if self.root.target != other.root.target {
            return false;
        }
        let eps = self.mgr.lock().eps();
        (self.root.weight - other.root.weight).norm_sqr() <= eps * eps
    }

    /// One full circuit pass.
    pub fn apply_circuit(&self, circuit: &Circuit<T>) -> Result<Self> {
        if circuit.qubits() != self.n {
            return Err(Error::dim(format!(
                "{}-qubit circuit applied to a {}-qubit diagram",
                circuit.qubits(),
                self.n
            )));
        }
        let mut store = self.mgr.lock();
        let mut root = self.root;
        for gate in circuit.gates() {
            root = apply::apply_gate(&mut store, self.n, root, gate)?;
        }
        drop(store);
        Ok(DdState {
            n: self.n,
            root,
            mgr: self.mgr.clone(),
        })
    }

    /// Graph description for debugging: a header line with the root, then
    /// one line per reachable node (`id level low-id low-weight high-id
    /// high-weight`, terminal printed as `T`).
    pub fn export_graph(&self) -> String {
        let store = self.mgr.lock();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "dd n={} root={} weight={},{}",
            self.n,
            fmt_target(self.root.target),
            self.root.weight.re,
            self.root.weight.im
        );
        let mut ids = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.root];
        while let Some(e) = stack.pop() {
            if e.is_zero() || e.target == TERMINAL {
                continue;
            }
            if seen.insert(e.target) {
                ids.push(e.target);
                let node = store.node(e.target);
                stack.push(node.low);
                stack.push(node.high);
            }
        }
        ids.sort_unstable();
        for id in ids {
            let node = store.node(id);
            let _ = writeln!(
                out,
                "{} {} {} {},{} {} {},{}",
                id,
                node.level,
                fmt_target(node.low.target),
                node.low.weight.re,
                node.low.weight.im,
                fmt_target(node.high.target),
                node.high.weight.re,
                node.high.weight.im
            );
        }
        out
    }
}

fn fmt_target(t: NodeId) -> String {
    if t == TERMINAL {
        "T".to_string()
    } else {
        t.to_string()
    }
}

/// Hash-consed structural copy between stores. The rebuilt edge carries
/// the (normally unit) renormalization factor of the copied node.
fn copy_edge<T: Real>(
    old: &Store<T>,
    new: &mut Store<T>,
    e: Edge<T>,
    memo: &mut FxMap<NodeId, Edge<T>>,
) -> Edge<T> {
    if e.is_zero() || e.target == TERMINAL {
        return e;
    }
    if let Some(rebuilt) = memo.get(&e.target) {
        return rebuilt.scaled(e.weight);
    }
    let node = *old.node(e.target);
    let low = copy_edge(old, new, node.low, memo);
    let high = copy_edge(old, new, node.high, memo);
    let rebuilt = new.make_node(node.level, low, high);
    memo.insert(e.target, rebuilt);
    rebuilt.scaled(e.weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type C64 = C<f64>;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// The three-qubit vector with a shared top-level subdiagram:
    /// (1/(2 sqrt 2), 1/(2 sqrt 2), 1/2, 0) repeated twice.
    fn shared_halves_state() -> DenseState<f64> {
        let a = 1.0 / (2.0 * 2.0f64.sqrt());
        let b = 0.5;
        DenseState::from_amplitudes(
            3,
            vec![
                c(a, 0.0),
                c(a, 0.0),
                c(b, 0.0),
                c(0.0, 0.0),
                c(a, 0.0),
                c(a, 0.0),
                c(b, 0.0),
                c(0.0, 0.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn basis_state_round_trip_and_node_count() {
        let mgr = DdManager::<f64>::default();
        let s = mgr.basis_state(1, 0).unwrap();
        let dense = s.decode().unwrap();
        assert_eq!(dense.amplitude(0).unwrap(), c(1.0, 0.0));
        assert_eq!(dense.amplitude(1).unwrap(), c(0.0, 0.0));

        let s = mgr.basis_state(3, 0).unwrap();
        let dense = s.decode().unwrap();
        assert_eq!(dense.amplitude(0).unwrap(), c(1.0, 0.0));
        assert_eq!(dense.norm_sqr(), 1.0);

        let s = mgr.basis_state(2, 3).unwrap();
        let dense = s.decode().unwrap();
        assert_eq!(dense.amplitude(3).unwrap(), c(1.0, 0.0));

        // One node per level for |0...0>.
        assert_eq!(mgr.basis_state(5, 0).unwrap().node_count(), 5);
        assert_eq!(mgr.zero_state(4).unwrap().node_count(), 0);

        assert!(matches!(
            mgr.basis_state(2, 4),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn shared_subdiagrams_are_merged() {
        let mgr = DdManager::<f64>::default();
        let state = mgr.encode(&shared_halves_state()).unwrap();
        // Unshared, the full binary tree over 3 qubits would need 7 nodes;
        // sharing the equal halves leaves 4.
        assert_eq!(state.node_count(), 4);
        assert!(state.node_count() < 7);
        // Decode reproduces the amplitudes.
        let back = state.decode().unwrap();
        assert!(back.max_abs_diff(&shared_halves_state()).unwrap() < 1e-14);
        // Norm is 1 (unit vector).
        assert!((state.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn add_examples() {
        let mgr = DdManager::<f64>::default();
        let state = mgr.encode(&shared_halves_state()).unwrap();
        let zero = mgr.zero_state(3).unwrap();
        assert!(state.add(&zero).unwrap().approx_eq(&state));

        let k0 = mgr.basis_state(1, 0).unwrap();
        let k1 = mgr.basis_state(1, 1).unwrap();
        let sum = k0.add(&k1).unwrap().decode().unwrap();
        assert_eq!(sum.amplitude(0).unwrap(), c(1.0, 0.0));
        assert_eq!(sum.amplitude(1).unwrap(), c(1.0, 0.0));

        // State plus itself doubles every amplitude.
        let doubled = state.add(&state).unwrap().decode().unwrap();
        let expect = shared_halves_state().scale(c(2.0, 0.0));
        assert!(doubled.max_abs_diff(&expect).unwrap() < 1e-14);

        let two = mgr.basis_state(2, 0).unwrap();
        assert!(k0.add(&two).is_err());
    }

    #[test]
    fn scale_examples() {
        let mgr = DdManager::<f64>::default();
        let state = mgr.encode(&shared_halves_state()).unwrap();
        assert!(state.scale(c(1.0, 0.0)).approx_eq(&state));
        assert!(state.scale(c(0.0, 0.0)).is_zero());

        let s = 1.0 / 2.0f64.sqrt();
        let phi = mgr
            .encode(&DenseState::from_amplitudes(1, vec![c(s, 0.0), c(-s, 0.0)]).unwrap())
            .unwrap();
        let neg = phi.scale(c(-1.0, 0.0)).decode().unwrap();
        assert!((neg.amplitude(0).unwrap() - c(-s, 0.0)).norm() < 1e-15);
        assert!((neg.amplitude(1).unwrap() - c(s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn inner_product_examples() {
        let mgr = DdManager::<f64>::default();
        let state = mgr.encode(&shared_halves_state()).unwrap();
        let ip = state.inner_product(&state).unwrap();
        assert!((ip - c(1.0, 0.0)).norm() < 1e-14);

        let k0 = mgr.basis_state(1, 0).unwrap();
        let k1 = mgr.basis_state(1, 1).unwrap();
        assert_eq!(k0.inner_product(&k1).unwrap(), c(0.0, 0.0));

        let s = 1.0 / 2.0f64.sqrt();
        let phi = mgr
            .encode(&DenseState::from_amplitudes(1, vec![c(s, 0.0), c(-s, 0.0)]).unwrap())
            .unwrap();
        let ip = phi.inner_product(&k0).unwrap();
        assert!((ip - c(s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn canonicity_merges_perturbed_encodings() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        // Identity-oriented manager: merge grid at the amplitude tolerance.
        let mgr = DdManager::<f64>::new(1e-12);
        let palette = [0.0, 0.5, -0.5, 1.0 / 2.0f64.sqrt(), 0.25];
        for _ in 0..20 {
            let n = rng.gen_range(1..=6usize);
            let amps: Vec<C64> = (0..1 << n)
                .map(|_| {
                    c(
                        palette[rng.gen_range(0..palette.len())],
                        palette[rng.gen_range(0..palette.len())],
                    )
                })
                .collect();
            let v1 = DenseState::from_amplitudes(n, amps.clone()).unwrap();
            // Relative perturbation well inside the merge tolerance.
            let amps2: Vec<C64> = amps
                .iter()
                .map(|a| a * c(1.0 + 1e-14, 0.0))
                .collect();
            let v2 = DenseState::from_amplitudes(n, amps2).unwrap();
            let d1 = mgr.encode(&v1).unwrap();
            let d2 = mgr.encode(&v2).unwrap();
            assert!(
                d1.approx_eq(&d2),
                "equal-within-eps vectors should share the root edge"
            );
        }
    }

    #[test]
    fn encode_decode_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mgr = DdManager::<f64>::default();
        for _ in 0..20 {
            let n = rng.gen_range(1..=8usize);
            let amps: Vec<C64> = (0..1 << n)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let v = DenseState::from_amplitudes(n, amps).unwrap();
            let back = mgr.encode(&v).unwrap().decode().unwrap();
            assert!(back.max_abs_diff(&v).unwrap() < 1e-12);
        }
    }

    #[test]
    fn dd_arithmetic_agrees_with_dense_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mgr = DdManager::<f64>::default();
        for _ in 0..20 {
            let n = rng.gen_range(1..=7usize);
            let dim = 1usize << n;
            let mk = |rng: &mut ChaCha8Rng| {
                let amps: Vec<C64> = (0..dim)
                    .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                DenseState::from_amplitudes(n, amps).unwrap()
            };
            let (va, vb) = (mk(&mut rng), mk(&mut rng));
            let (da, db) = (mgr.encode(&va).unwrap(), mgr.encode(&vb).unwrap());
            let alpha = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));

            let sum = da.add(&db).unwrap().decode().unwrap();
            assert!(sum.max_abs_diff(&va.axpy(c(1.0, 0.0), &vb).unwrap()).unwrap() < 1e-10);

            let scaled = da.scale(alpha).decode().unwrap();
            assert!(scaled.max_abs_diff(&va.scale(alpha)).unwrap() < 1e-10);

            let ip_dd = da.inner_product(&db).unwrap();
            let ip_dense = va.inner_product(&vb).unwrap();
            assert!((ip_dd - ip_dense).norm() < 1e-10);

            let nrm2 = da.norm_sqr();
            assert!(nrm2 >= -1e-12);
            assert!((nrm2 - va.norm_sqr()).abs() < 1e-10);
        }
    }

    #[test]
    fn amplitude_walks_paths() {
        let mgr = DdManager::<f64>::default();
        let state = mgr.encode(&shared_halves_state()).unwrap();
        for idx in 0..8u64 {
            let expect = shared_halves_state().amplitude(idx).unwrap();
            assert!((state.amplitude(idx).unwrap() - expect).norm() < 1e-14);
        }
        assert!(state.amplitude(8).is_err());
    }

    #[test]
    fn export_graph_lists_reachable_nodes() {
        let mgr = DdManager::<f64>::default();
        let state = mgr.encode(&shared_halves_state()).unwrap();
        let text = state.export_graph();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("dd n=3 root="));
        assert_eq!(lines.len(), 1 + state.node_count());
    }

    #[test]
    fn managers_do_not_mix() {
        let m1 = DdManager::<f64>::default();
        let m2 = DdManager::<f64>::default();
        let a = m1.basis_state(2, 0).unwrap();
        let b = m2.basis_state(2, 1).unwrap();
        assert!(a.add(&b).is_err());
        assert!(a.inner_product(&b).is_err());
    }
}
