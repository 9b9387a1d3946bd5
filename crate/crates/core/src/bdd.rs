//! Reduced ordered binary decision diagrams.
//!
//! Nodes live in a hash-consed store owned by a [`BddManager`]; a
//! [`NodeRef`] is a handle to one function. Variable `i` sits at level `i`,
//! so variable 0 is nearest the root. The order is fixed for the lifetime of
//! the manager.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicU32, Ordering};
use std::time::Instant;

use rustc_hash::FxHashMap;
use thiserror::Error;

static NEXT_MANAGER_ID: AtomicU32 = AtomicU32::new(0);

const FALSE_INDEX: u32 = 0;
const TRUE_INDEX: u32 = 1;

/// Cache sizes beyond which a memo table is dropped wholesale.
const CACHE_LIMIT: usize = 1 << 22;
/// How many recursion steps pass between deadline checks.
const DEADLINE_STRIDE: u32 = 1 << 14;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BddError {
    #[error("variable {index} out of range for a manager with {var_count} variables")]
    VarOutOfRange { index: usize, var_count: usize },
    #[error("node handle belongs to a different manager")]
    ForeignRef,
    #[error("quantification cube is not a conjunction of positive literals")]
    NotACube,
    #[error("valuation has {actual} bits, manager has {expected} variables")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("node limit of {limit} exceeded")]
    NodeLimit { limit: usize },
    #[error("deadline exceeded")]
    Timeout,
}

impl BddError {
    /// Node explosion or timeout, as opposed to a usage error.
    pub fn is_resource_exceeded(&self) -> bool {
        matches!(self, BddError::NodeLimit { .. } | BddError::Timeout)
    }
}

/// Handle to a Boolean function inside one [`BddManager`]. Two handles from
/// the same manager are equal iff they denote the same function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeRef {
    index: u32,
    manager: u32,
}

impl NodeRef {
    /// Position of the node in the manager's store. Terminals are 0 and 1.
    pub fn index(self) -> u32 {
        self.index
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Xor,
    Implies,
}

impl BinOp {
    fn eval(self, a: bool, b: bool) -> bool {
        match self {
            BinOp::And => a && b,
            BinOp::Or => a || b,
            BinOp::Xor => a != b,
            BinOp::Implies => !a || b,
        }
    }

    fn commutative(self) -> bool {
        !matches!(self, BinOp::Implies)
    }

    fn tag(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Node {
    var: u32,
    low: u32,
    high: u32,
}

/// Resource limits for a manager. Exceeding either makes the running
/// operation fail with a resource error.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_nodes: usize,
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_nodes: 1 << 24,
            deadline: None,
        }
    }
}

pub struct BddManager {
    id: u32,
    var_count: u32,
    nodes: Vec<Node>,
    unique: FxHashMap<Node, u32>,
    apply_cache: FxHashMap<(u8, u32, u32), u32>,
    not_cache: FxHashMap<u32, u32>,
    exists_cache: FxHashMap<(u32, u32), u32>,
    limits: Limits,
    steps: u32,
}

impl std::fmt::Debug for BddManager {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BddManager")
            .field("id", &self.id)
            .field("var_count", &self.var_count)
            .field("nodes", &self.nodes.len())
            .finish()
    }
}

impl BddManager {
    pub fn new(var_count: usize) -> Self {
        Self::with_limits(var_count, Limits::default())
    }

    pub fn with_limits(var_count: usize, limits: Limits) -> Self {
        let var_count = u32::try_from(var_count).expect("variable count fits in u32");
        let terminal = |i| Node {
            var: var_count,
            low: i,
            high: i,
        };
        BddManager {
            id: NEXT_MANAGER_ID.fetch_add(1, Ordering::Relaxed),
            var_count,
            nodes: vec![terminal(FALSE_INDEX), terminal(TRUE_INDEX)],
            unique: FxHashMap::default(),
            apply_cache: FxHashMap::default(),
            not_cache: FxHashMap::default(),
            exists_cache: FxHashMap::default(),
            limits,
            steps: 0,
        }
    }

    pub fn var_count(&self) -> usize {
        self.var_count as usize
    }

    /// Number of nodes in the store, terminals included.
    pub fn stored_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub fn set_limits(&mut self, limits: Limits) {
        self.limits = limits;
    }

    /// Drops every memo table. Results stay canonical because the unique
    /// table is kept.
    pub fn clear_caches(&mut self) {
        self.apply_cache.clear();
        self.not_cache.clear();
        self.exists_cache.clear();
    }

    pub fn constant(&self, value: bool) -> NodeRef {
        self.handle(if value { TRUE_INDEX } else { FALSE_INDEX })
    }

    pub fn false_ref(&self) -> NodeRef {
        self.constant(false)
    }

    pub fn true_ref(&self) -> NodeRef {
        self.constant(true)
    }

    fn handle(&self, index: u32) -> NodeRef {
        NodeRef {
            index,
            manager: self.id,
        }
    }

    fn own(&self, r: NodeRef) -> Result<u32, BddError> {
        if r.manager == self.id {
            Ok(r.index)
        } else {
            Err(BddError::ForeignRef)
        }
    }

    fn is_terminal(index: u32) -> bool {
        index <= TRUE_INDEX
    }

    /// The projection function `x_i`.
    pub fn mk_var(&mut self, i: usize) -> Result<NodeRef, BddError> {
        self.literal(i, true)
    }

    /// `x_i` when `positive`, otherwise `!x_i`.
    pub fn literal(&mut self, i: usize, positive: bool) -> Result<NodeRef, BddError> {
        if i >= self.var_count() {
            return Err(BddError::VarOutOfRange {
                index: i,
                var_count: self.var_count(),
            });
        }
        let (low, high) = if positive {
            (FALSE_INDEX, TRUE_INDEX)
        } else {
            (TRUE_INDEX, FALSE_INDEX)
        };
        let n = self.mk(i as u32, low, high)?;
        Ok(self.handle(n))
    }

    /// Conjunction of the positive literals of `vars`.
    pub fn cube(&mut self, vars: &[usize]) -> Result<NodeRef, BddError> {
        let mut sorted = vars.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut acc = TRUE_INDEX;
        for &v in sorted.iter().rev() {
            if v >= self.var_count() {
                return Err(BddError::VarOutOfRange {
                    index: v,
                    var_count: self.var_count(),
                });
            }
            acc = self.mk(v as u32, FALSE_INDEX, acc)?;
        }
        Ok(self.handle(acc))
    }

    /// Conjunction of literals given as `(variable, polarity)`.
    pub fn conjunction(&mut self, literals: &[(usize, bool)]) -> Result<NodeRef, BddError> {
        let mut sorted = literals.to_vec();
        sorted.sort_unstable();
        let mut acc = TRUE_INDEX;
        for (k, &(v, positive)) in sorted.iter().enumerate().rev() {
            if v >= self.var_count() {
                return Err(BddError::VarOutOfRange {
                    index: v,
                    var_count: self.var_count(),
                });
            }
            if let Some(&(next, other)) = sorted.get(k + 1) {
                if next == v {
                    if other != positive {
                        acc = FALSE_INDEX;
                    }
                    continue;
                }
            }
            if acc == FALSE_INDEX {
                continue;
            }
            acc = if positive {
                self.mk(v as u32, FALSE_INDEX, acc)?
            } else {
                self.mk(v as u32, acc, FALSE_INDEX)?
            };
        }
        Ok(self.handle(acc))
    }

    fn tick(&mut self) -> Result<(), BddError> {
        self.steps = self.steps.wrapping_add(1);
        if self.steps.is_multiple_of(DEADLINE_STRIDE) {
            if let Some(deadline) = self.limits.deadline {
                if Instant::now() >= deadline {
                    return Err(BddError::Timeout);
                }
            }
        }
        Ok(())
    }

    fn mk(&mut self, var: u32, low: u32, high: u32) -> Result<u32, BddError> {
        if low == high {
            return Ok(low);
        }
        let node = Node { var, low, high };
        if let Some(&i) = self.unique.get(&node) {
            return Ok(i);
        }
        if self.nodes.len() >= self.limits.max_nodes {
            return Err(BddError::NodeLimit {
                limit: self.limits.max_nodes,
            });
        }
        self.tick()?;
        let i = self.nodes.len() as u32;
        self.nodes.push(node);
        self.unique.insert(node, i);
        Ok(i)
    }

    fn var_of(&self, index: u32) -> u32 {
        self.nodes[index as usize].var
    }

    /// Variable tested at the root, `None` for constants.
    pub fn root_var(&self, f: NodeRef) -> Result<Option<usize>, BddError> {
        let i = self.own(f)?;
        Ok((!Self::is_terminal(i)).then(|| self.var_of(i) as usize))
    }

    /// `(low, high)` children of a non-terminal node.
    pub fn children(&self, f: NodeRef) -> Result<Option<(NodeRef, NodeRef)>, BddError> {
        let i = self.own(f)?;
        if Self::is_terminal(i) {
            return Ok(None);
        }
        let n = self.nodes[i as usize];
        Ok(Some((self.handle(n.low), self.handle(n.high))))
    }

    pub fn apply(&mut self, op: BinOp, a: NodeRef, b: NodeRef) -> Result<NodeRef, BddError> {
        let (a, b) = (self.own(a)?, self.own(b)?);
        let r = self.apply_rec(op, a, b)?;
        self.trim_caches();
        Ok(self.handle(r))
    }

    pub fn and(&mut self, a: NodeRef, b: NodeRef) -> Result<NodeRef, BddError> {
        self.apply(BinOp::And, a, b)
    }

    pub fn or(&mut self, a: NodeRef, b: NodeRef) -> Result<NodeRef, BddError> {
        self.apply(BinOp::Or, a, b)
    }

    fn apply_rec(&mut self, op: BinOp, a: u32, b: u32) -> Result<u32, BddError> {
        const F: u32 = FALSE_INDEX;
        const T: u32 = TRUE_INDEX;
        if Self::is_terminal(a) && Self::is_terminal(b) {
            return Ok(op.eval(a == T, b == T) as u32);
        }
        match op {
            BinOp::And => {
                if a == F || b == F {
                    return Ok(F);
                }
                if a == T || a == b {
                    return Ok(b);
                }
                if b == T {
                    return Ok(a);
                }
            }
            BinOp::Or => {
                if a == T || b == T {
                    return Ok(T);
                }
                if a == F || a == b {
                    return Ok(b);
                }
                if b == F {
                    return Ok(a);
                }
            }
            BinOp::Xor => {
                if a == b {
                    return Ok(F);
                }
                if a == F {
                    return Ok(b);
                }
                if b == F {
                    return Ok(a);
                }
            }
            BinOp::Implies => {
                if a == F || b == T || a == b {
                    return Ok(T);
                }
                if a == T {
                    return Ok(b);
                }
            }
        }
        let (a, b) = if op.commutative() && a > b { (b, a) } else { (a, b) };
        let key = (op.tag(), a, b);
        if let Some(&r) = self.apply_cache.get(&key) {
            return Ok(r);
        }
        self.tick()?;
        let (na, nb) = (self.nodes[a as usize], self.nodes[b as usize]);
        let var = na.var.min(nb.var);
        let (a0, a1) = if na.var == var { (na.low, na.high) } else { (a, a) };
        let (b0, b1) = if nb.var == var { (nb.low, nb.high) } else { (b, b) };
        let low = self.apply_rec(op, a0, b0)?;
        let high = self.apply_rec(op, a1, b1)?;
        let r = self.mk(var, low, high)?;
        self.apply_cache.insert(key, r);
        Ok(r)
    }

    /// Negation: the same diagram with its terminals exchanged.
    pub fn not(&mut self, a: NodeRef) -> Result<NodeRef, BddError> {
        let a = self.own(a)?;
        let r = self.not_rec(a)?;
        self.trim_caches();
        Ok(self.handle(r))
    }

    fn not_rec(&mut self, a: u32) -> Result<u32, BddError> {
        if Self::is_terminal(a) {
            return Ok(a ^ 1);
        }
        if let Some(&r) = self.not_cache.get(&a) {
            return Ok(r);
        }
        self.tick()?;
        let n = self.nodes[a as usize];
        let low = self.not_rec(n.low)?;
        let high = self.not_rec(n.high)?;
        let r = self.mk(n.var, low, high)?;
        self.not_cache.insert(a, r);
        self.not_cache.insert(r, a);
        Ok(r)
    }

    /// Existentially quantifies the variables of `cube` out of `f`.
    pub fn exists(&mut self, cube: NodeRef, f: NodeRef) -> Result<NodeRef, BddError> {
        let (c, f) = (self.own(cube)?, self.own(f)?);
        let mut walk = c;
        while walk != TRUE_INDEX {
            let n = self.nodes[walk as usize];
            if walk == FALSE_INDEX || n.low != FALSE_INDEX {
                return Err(BddError::NotACube);
            }
            walk = n.high;
        }
        let r = self.exists_rec(c, f)?;
        self.trim_caches();
        Ok(self.handle(r))
    }

    fn exists_rec(&mut self, mut c: u32, f: u32) -> Result<u32, BddError> {
        if Self::is_terminal(f) {
            return Ok(f);
        }
        let var = self.var_of(f);
        while c != TRUE_INDEX && self.var_of(c) < var {
            c = self.nodes[c as usize].high;
        }
        if c == TRUE_INDEX {
            return Ok(f);
        }
        if let Some(&r) = self.exists_cache.get(&(c, f)) {
            return Ok(r);
        }
        self.tick()?;
        let n = self.nodes[f as usize];
        let r = if self.var_of(c) == var {
            let rest = self.nodes[c as usize].high;
            let low = self.exists_rec(rest, n.low)?;
            if low == TRUE_INDEX {
                TRUE_INDEX
            } else {
                let high = self.exists_rec(rest, n.high)?;
                self.apply_rec(BinOp::Or, low, high)?
            }
        } else {
            let low = self.exists_rec(c, n.low)?;
            let high = self.exists_rec(c, n.high)?;
            self.mk(var, low, high)?
        };
        self.exists_cache.insert((c, f), r);
        Ok(r)
    }

    fn trim_caches(&mut self) {
        if self.apply_cache.len() > CACHE_LIMIT {
            self.apply_cache.clear();
        }
        if self.not_cache.len() > CACHE_LIMIT {
            self.not_cache.clear();
        }
        if self.exists_cache.len() > CACHE_LIMIT {
            self.exists_cache.clear();
        }
    }

    /// Value of `f` under `valuation`, by a single root-to-terminal walk.
    pub fn eval(&self, f: NodeRef, valuation: &[bool]) -> Result<bool, BddError> {
        let mut i = self.own(f)?;
        if valuation.len() != self.var_count() {
            return Err(BddError::LengthMismatch {
                expected: self.var_count(),
                actual: valuation.len(),
            });
        }
        while !Self::is_terminal(i) {
            let n = &self.nodes[i as usize];
            i = if valuation[n.var as usize] { n.high } else { n.low };
        }
        Ok(i == TRUE_INDEX)
    }

    /// Like [`eval`](Self::eval), but reads each variable from `value`
    /// only when the walk reaches it.
    pub fn eval_with(&self, f: NodeRef, mut value: impl FnMut(usize) -> bool) -> Result<bool, BddError> {
        let mut i = self.own(f)?;
        while !Self::is_terminal(i) {
            let n = &self.nodes[i as usize];
            i = if value(n.var as usize) { n.high } else { n.low };
        }
        Ok(i == TRUE_INDEX)
    }

    /// Constant-time test for the false terminal.
    pub fn is_false(&self, f: NodeRef) -> Result<bool, BddError> {
        Ok(self.own(f)? == FALSE_INDEX)
    }

    pub fn is_true(&self, f: NodeRef) -> Result<bool, BddError> {
        Ok(self.own(f)? == TRUE_INDEX)
    }

    fn reachable(&self, root: u32) -> Vec<u32> {
        let mut seen = rustc_hash::FxHashSet::default();
        let mut stack = vec![root];
        let mut order = Vec::new();
        while let Some(i) = stack.pop() {
            if !seen.insert(i) {
                continue;
            }
            order.push(i);
            if !Self::is_terminal(i) {
                let n = self.nodes[i as usize];
                stack.push(n.high);
                stack.push(n.low);
            }
        }
        order
    }

    /// Nodes reachable from `f`, terminals included.
    pub fn node_count(&self, f: NodeRef) -> Result<usize, BddError> {
        Ok(self.reachable(self.own(f)?).len())
    }

    /// Number of satisfying valuations over all `var_count` variables,
    /// saturating at `u128::MAX`.
    pub fn sat_count(&self, f: NodeRef) -> Result<u128, BddError> {
        let root = self.own(f)?;
        let mut memo: FxHashMap<u32, u128> = FxHashMap::default();
        let pow = |k: u32| -> u128 { 1u128.checked_shl(k).unwrap_or(u128::MAX) };
        fn go(
            m: &BddManager,
            i: u32,
            memo: &mut FxHashMap<u32, u128>,
            pow: &dyn Fn(u32) -> u128,
        ) -> u128 {
            if i == FALSE_INDEX {
                return 0;
            }
            if i == TRUE_INDEX {
                return 1;
            }
            if let Some(&c) = memo.get(&i) {
                return c;
            }
            let n = m.nodes[i as usize];
            let lo = go(m, n.low, memo, pow)
                .saturating_mul(pow(m.var_of(n.low) - n.var - 1));
            let hi = go(m, n.high, memo, pow)
                .saturating_mul(pow(m.var_of(n.high) - n.var - 1));
            let c = lo.saturating_add(hi);
            memo.insert(i, c);
            c
        }
        let top = if Self::is_terminal(root) {
            self.var_count
        } else {
            self.var_of(root)
        };
        Ok(go(self, root, &mut memo, &pow).saturating_mul(pow(top)))
    }

    /// Scans the whole store for reduction and ordering violations. Returns
    /// a description of the first one found.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen = FxHashMap::default();
        for (i, n) in self.nodes.iter().enumerate().skip(2) {
            if n.low == n.high {
                return Err(format!("node {i} has identical children"));
            }
            if self.var_of(n.low) <= n.var || self.var_of(n.high) <= n.var {
                return Err(format!("node {i} has a child at a non-deeper level"));
            }
            if let Some(j) = seen.insert(*n, i) {
                return Err(format!("nodes {j} and {i} share (var, low, high)"));
            }
            if self.unique.get(n) != Some(&(i as u32)) {
                return Err(format!("node {i} missing from the unique table"));
            }
        }
        Ok(())
    }

    /// Graphviz rendering of `f`: 0-edges dashed, 1-edges solid. Variables
    /// are labeled `x1..xN`.
    pub fn to_dot(&self, f: NodeRef) -> Result<String, BddError> {
        let root = self.own(f)?;
        let mut out = String::from("digraph bdd {\n");
        for i in self.reachable(root) {
            match i {
                FALSE_INDEX => out.push_str("  n0 [shape=box,label=\"F\"];\n"),
                TRUE_INDEX => out.push_str("  n1 [shape=box,label=\"T\"];\n"),
                _ => {
                    let n = self.nodes[i as usize];
                    let _ = writeln!(out, "  n{i} [shape=circle,label=\"x{}\"];", n.var + 1);
                    let _ = writeln!(out, "  n{i} -> n{} [style=dashed];", n.low);
                    let _ = writeln!(out, "  n{i} -> n{} [style=solid];", n.high);
                }
            }
        }
        out.push_str("}\n");
        Ok(out)
    }
}
