//! Gate application on decision diagrams.
//!
//! Elementary gates recurse level-wise from the root: levels above the
//! target are rebuilt, control levels pass their low branch through
//! untouched, and at the target level the two successors are mixed by the
//! 2x2 gate matrix. Controls below the target are handled by splitting
//! each successor into its control-satisfied projection and the rest.
//! Semantic whole-register gates (phase flips, diagonal callbacks,
//! permutations) are evaluated path-wise.

use num_complex::Complex;

use crate::circuit::{Gate, GateKind};
use crate::error::Result;
use crate::scalar::{Real, C};

use super::{AddCache, Edge, FxMap, NodeId, Store};

pub(crate) fn apply_gate<T: Real>(
    store: &mut Store<T>,
    n: usize,
    root: Edge<T>,
    gate: &Gate<T>,
) -> Result<Edge<T>> {
    let top = n as i32 - 1;
    match &gate.kind {
        GateKind::Swap => {
            // Three CNOTs; exact and reuses the control machinery.
            let (a, b) = (gate.targets[0], gate.targets[1]);
            let mut e = root;
            for (c, t) in [(a, b), (b, a), (a, b)] {
                let mut controls = gate.controls.clone();
                controls.push(c);
                let step = Gate::new(GateKind::X, vec![t], controls);
                e = apply_matrix_gate(store, top, e, &step);
            }
            Ok(e)
        }
        GateKind::PhaseFlip(indices) => {
            let sorted: Vec<u64> = indices.iter().copied().collect();
            Ok(flip_rec(store, root, top, 0, &sorted))
        }
        GateKind::DiagonalPhase(f) => Ok(diagonal_rec(store, root, top, 0, f.as_ref())),
        GateKind::Permutation(p) => {
            let mut pairs: Vec<(u64, C<T>)> = Vec::new();
            collect_paths(
                store,
                root,
                top,
                0,
                C::new(T::one(), T::zero()),
                &mut pairs,
            );
            for pair in &mut pairs {
                pair.0 = p[pair.0 as usize];
            }
            pairs.sort_unstable_by_key(|&(idx, _)| idx);
            Ok(build_from_sorted(store, &pairs, top))
        }
        _ => Ok(apply_matrix_gate(store, top, root, gate)),
    }
}

struct MatrixApply<T> {
    m: [C<T>; 4],
    target: i32,
    above: u64,
    below: u64,
    apply_cache: FxMap<NodeId, Edge<T>>,
    proj_cache: FxMap<NodeId, Edge<T>>,
    add_cache: AddCache<T>,
}

fn apply_matrix_gate<T: Real>(
    store: &mut Store<T>,
    top: i32,
    root: Edge<T>,
    gate: &Gate<T>,
) -> Edge<T> {
    let m = Gate::single_qubit_matrix(&gate.kind).expect("elementary gate kind");
    let target = gate.targets[0] as i32;
    let mut above = 0u64;
    let mut below = 0u64;
    for &c in &gate.controls {
        if (c as i32) > target {
            above |= 1 << c;
        } else {
            below |= 1 << c;
        }
    }
    let mut ctx = MatrixApply {
        m,
        target,
        above,
        below,
        apply_cache: FxMap::default(),
        proj_cache: FxMap::default(),
        add_cache: AddCache::default(),
    };
    ctx.rec(store, root, top)
}

impl<T: Real> MatrixApply<T> {
    fn rec(&mut self, store: &mut Store<T>, e: Edge<T>, level: i32) -> Edge<T> {
        if e.is_zero() {
            return e;
        }
        debug_assert!(level >= self.target, "recursion passed the target level");
        if let Some(hit) = self.apply_cache.get(&e.target) {
            return hit.scaled(e.weight);
        }
        let node = *store.node(e.target);
        debug_assert_eq!(node.level as i32, level);
        let unit = if level == self.target {
            let (lo, hi) = (node.low, node.high);
            let [m00, m01, m10, m11] = self.m;
            let one = C::new(T::one(), T::zero());
            let (new_low, new_high) = if self.below == 0 {
                (
                    self.lin2(store, m00, lo, m01, hi, level - 1),
                    self.lin2(store, m10, lo, m11, hi, level - 1),
                )
            } else {
                // Mix only the control-satisfied projections of the
                // successors; the rest passes through unchanged.
                let lo1 = self.proj(store, lo, level - 1);
                let hi1 = self.proj(store, hi, level - 1);
                let dl = self.lin2(store, m00 - one, lo1, m01, hi1, level - 1);
                let dh = self.lin2(store, m10, lo1, m11 - one, hi1, level - 1);
                (
                    store.add_rec(lo, dl, level - 1, &mut self.add_cache),
                    store.add_rec(hi, dh, level - 1, &mut self.add_cache),
                )
            };
            store.make_node(level as u8, new_low, new_high)
        } else if self.above >> level & 1 == 1 {
            // Control qubit at this level: the low branch is untouched.
            let high = self.rec(store, node.high, level - 1);
            store.make_node(level as u8, node.low, high)
        } else {
            let low = self.rec(store, node.low, level - 1);
            let high = self.rec(store, node.high, level - 1);
            store.make_node(level as u8, low, high)
        };
        self.apply_cache.insert(e.target, unit);
        unit.scaled(e.weight)
    }

    fn lin2(
        &mut self,
        store: &mut Store<T>,
        alpha: C<T>,
        a: Edge<T>,
        beta: C<T>,
        b: Edge<T>,
        level: i32,
    ) -> Edge<T> {
        store.add_rec(a.scaled(alpha), b.scaled(beta), level, &mut self.add_cache)
    }

    /// Projection onto the subspace where every below-target control bit
    /// is 1.
    fn proj(&mut self, store: &mut Store<T>, e: Edge<T>, level: i32) -> Edge<T> {
        if e.is_zero() {
            return e;
        }
        if level < 0 {
            return e;
        }
        if let Some(hit) = self.proj_cache.get(&e.target) {
            return hit.scaled(e.weight);
        }
        let node = *store.node(e.target);
        let unit = if self.below >> level & 1 == 1 {
            let high = self.proj(store, node.high, level - 1);
            store.make_node(level as u8, Edge::zero(), high)
        } else {
            let low = self.proj(store, node.low, level - 1);
            let high = self.proj(store, node.high, level - 1);
            store.make_node(level as u8, low, high)
        };
        self.proj_cache.insert(e.target, unit);
        unit.scaled(e.weight)
    }
}

/// Multiplies the amplitudes at the sorted `indices` by -1. Subtrees whose
/// index range contains no marked index are returned unchanged.
fn flip_rec<T: Real>(
    store: &mut Store<T>,
    e: Edge<T>,
    level: i32,
    base: u64,
    indices: &[u64],
) -> Edge<T> {
    if indices.is_empty() || e.is_zero() {
        return e;
    }
    if level < 0 {
        debug_assert_eq!(indices, [base]);
        return Edge::terminal(-e.weight);
    }
    let mid = base | 1 << level;
    let split = indices.partition_point(|&i| i < mid);
    let node = *store.node(e.target);
    let low = flip_rec(store, node.low, level - 1, base, &indices[..split]);
    let high = flip_rec(store, node.high, level - 1, mid, &indices[split..]);
    store.make_node(level as u8, low, high).scaled(e.weight)
}

/// `|x> -> e^{i f(x)} |x>` by full path traversal (the phase depends on
/// the whole path, so no subtree sharing survives in general).
fn diagonal_rec<T: Real>(
    store: &mut Store<T>,
    e: Edge<T>,
    level: i32,
    base: u64,
    f: &dyn Fn(u64) -> T,
) -> Edge<T> {
    if e.is_zero() {
        return e;
    }
    if level < 0 {
        return Edge::terminal(e.weight * Complex::from_polar(T::one(), f(base)));
    }
    let node = *store.node(e.target);
    let low = diagonal_rec(store, node.low, level - 1, base, f);
    let high = diagonal_rec(store, node.high, level - 1, base | 1 << level, f);
    store.make_node(level as u8, low, high).scaled(e.weight)
}

fn collect_paths<T: Real>(
    store: &Store<T>,
    e: Edge<T>,
    level: i32,
    base: u64,
    acc: C<T>,
    out: &mut Vec<(u64, C<T>)>,
) {
    if e.is_zero() {
        return;
    }
    let acc = acc * e.weight;
    if level < 0 {
        out.push((base, acc));
        return;
    }
    let node = store.node(e.target);
    let (low, high) = (node.low, node.high);
    collect_paths(store, low, level - 1, base, acc, out);
    collect_paths(store, high, level - 1, base | 1 << level, acc, out);
}

fn build_from_sorted<T: Real>(
    store: &mut Store<T>,
    pairs: &[(u64, C<T>)],
    level: i32,
) -> Edge<T> {
    if pairs.is_empty() {
        return Edge::zero();
    }
    if level < 0 {
        debug_assert_eq!(pairs.len(), 1);
        return Edge::terminal(pairs[0].1);
    }
    let split = pairs.partition_point(|&(idx, _)| idx >> level & 1 == 0);
    let low = build_from_sorted(store, &pairs[..split], level - 1);
    let high = build_from_sorted(store, &pairs[split..], level - 1);
    store.make_node(level as u8, low, high)
}
