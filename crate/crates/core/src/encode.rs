//! Binary encoding of parameters and compilation of the constraints into a
//! BDD over the encoded bits.
//!
//! Each constrained parameter owns a contiguous range of Boolean variables
//! holding its value least-significant bit first. Parameters that occur in
//! no constraint get no bits at all. In [`EncodingMode::WithDash`] every
//! range has room for one extra codeword, all ones, which stands for an
//! unspecified value.

use std::collections::VecDeque;
use std::ops::Range;

use thiserror::Error;

use crate::bdd::{BddError, BddManager, Limits, NodeRef};
use crate::model::{Assignment, CmpOp, ConstraintExpr, ModelError, Relation, SutModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("parameter {param} is unspecified, which this encoding cannot represent")]
    UnspecifiedValue { param: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("operation needs the dash-capable encoding")]
    ModeMismatch,
    #[error("parameter order must be a permutation of the constrained parameters")]
    BadOrder,
    #[error("manager has {actual} variables, encoding needs {expected}")]
    VarCountMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Bdd(#[from] BddError),
}

impl EncodeError {
    pub fn is_resource_exceeded(&self) -> bool {
        matches!(self, EncodeError::Bdd(e) if e.is_resource_exceeded())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncodingMode {
    /// `ceil(log2 |D|)` bits per parameter; full values only.
    Full,
    /// `ceil(log2 (|D| + 1))` bits per parameter; all-ones marks a dash.
    WithDash,
}

/// How constrained parameters are laid out along the variable order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ParamOrdering {
    /// Declaration order.
    Declaration,
    /// Greedy order by parse-tree distance, see [`order_parameters`].
    #[default]
    Distance,
}

/// Smallest `w` with `2^w >= count`.
fn bits_for(count: u32) -> usize {
    if count <= 1 {
        0
    } else {
        (u32::BITS - (count - 1).leading_zeros()) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoding {
    mode: EncodingMode,
    param_order: Vec<usize>,
    /// `offsets[k]` is the first variable of the k-th ordered parameter;
    /// the last entry is the total variable count.
    offsets: Vec<usize>,
    /// Bit range per declared parameter; `None` for dropped ones.
    ranges: Vec<Option<Range<usize>>>,
    domain_sizes: Vec<u32>,
    /// `(parameter, bit position)` of each variable.
    var_owner: Vec<(usize, u32)>,
}

impl Encoding {
    pub fn new(model: &SutModel, mode: EncodingMode, ordering: ParamOrdering) -> Self {
        let order = match ordering {
            ParamOrdering::Declaration => constrained_params(model),
            ParamOrdering::Distance => order_parameters(model),
        };
        Self::with_order(model, mode, order).expect("computed orders are valid")
    }

    /// Encoding with an explicit order, which must be a permutation of
    /// [`constrained_params`].
    pub fn with_order(model: &SutModel, mode: EncodingMode, order: Vec<usize>) -> Result<Self, EncodeError> {
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if sorted != constrained_params(model) {
            return Err(EncodeError::BadOrder);
        }
        let domain_sizes: Vec<u32> = model.params().iter().map(|p| p.domain_size()).collect();
        let mut ranges = vec![None; model.param_count()];
        let mut offsets = vec![0];
        let mut var_owner = Vec::new();
        for &p in &order {
            let width = match mode {
                EncodingMode::Full => bits_for(domain_sizes[p]),
                EncodingMode::WithDash => bits_for(domain_sizes[p] + 1),
            };
            let start = *offsets.last().unwrap();
            ranges[p] = Some(start..start + width);
            offsets.push(start + width);
            var_owner.extend((0..width as u32).map(|b| (p, b)));
        }
        Ok(Encoding {
            mode,
            param_order: order,
            offsets,
            ranges,
            domain_sizes,
            var_owner,
        })
    }

    pub fn mode(&self) -> EncodingMode {
        self.mode
    }

    pub fn param_order(&self) -> &[usize] {
        &self.param_order
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn var_count(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.ranges.len()
    }

    pub fn bit_range(&self, param: usize) -> Option<Range<usize>> {
        self.ranges[param].clone()
    }

    pub fn is_constrained(&self, param: usize) -> bool {
        self.ranges[param].is_some()
    }

    /// Parameter and bit position stored in variable `var`.
    pub fn var_owner(&self, var: usize) -> (usize, u32) {
        self.var_owner[var]
    }

    /// True when no fixed position of `a` is a constrained parameter.
    pub fn touches_only_dropped(&self, a: &Assignment) -> bool {
        a.fixed().all(|(i, _)| !self.is_constrained(i))
    }

    fn check(&self, a: &Assignment) -> Result<(), EncodeError> {
        if a.len() != self.param_count() {
            return Err(ModelError::ArityMismatch {
                expected: self.param_count(),
                actual: a.len(),
            }
            .into());
        }
        for (i, v) in a.fixed() {
            if v >= self.domain_sizes[i] {
                return Err(ModelError::ValueOutOfRange {
                    param: format!("#{i}"),
                    value: v,
                }
                .into());
            }
        }
        Ok(())
    }

    /// Bit vector of `a` over the encoded variables. Dropped parameters are
    /// ignored; dashes become all-ones in `WithDash` mode.
    pub fn encode(&self, a: &Assignment) -> Result<Vec<bool>, EncodeError> {
        self.check(a)?;
        let mut bits = vec![false; self.var_count()];
        for &p in &self.param_order {
            let range = self.ranges[p].clone().unwrap();
            match (a.get(p), self.mode) {
                (Some(v), _) => {
                    for (k, var) in range.enumerate() {
                        bits[var] = v >> k & 1 == 1;
                    }
                }
                (None, EncodingMode::WithDash) => bits[range].fill(true),
                (None, EncodingMode::Full) => return Err(EncodeError::UnspecifiedValue { param: p }),
            }
        }
        Ok(bits)
    }
}

/// Parameters referenced by at least one constraint, ascending.
pub fn constrained_params(model: &SutModel) -> Vec<usize> {
    let mut used = vec![false; model.param_count()];
    for c in model.constraints() {
        c.for_each_relation(&mut |r| {
            for p in r.params() {
                used[p] = true;
            }
        });
    }
    (0..used.len()).filter(|&i| used[i]).collect()
}

/// Parse forest of all constraints joined under one virtual root. Every
/// parameter occurrence is an identifier node below its relation node.
struct ParseForest {
    adjacency: Vec<Vec<usize>>,
    /// `(node, parameter)` for identifier nodes.
    occurrences: Vec<(usize, usize)>,
}

impl ParseForest {
    fn build(model: &SutModel) -> Self {
        let mut forest = ParseForest {
            adjacency: vec![Vec::new()],
            occurrences: Vec::new(),
        };
        for c in model.constraints() {
            forest.add(0, c);
        }
        forest
    }

    fn node(&mut self, parent: usize) -> usize {
        let id = self.adjacency.len();
        self.adjacency.push(vec![parent]);
        self.adjacency[parent].push(id);
        id
    }

    fn add(&mut self, parent: usize, e: &ConstraintExpr) {
        let id = self.node(parent);
        match e {
            ConstraintExpr::Not(a) => self.add(id, a),
            ConstraintExpr::And(a, b) | ConstraintExpr::Or(a, b) | ConstraintExpr::Implies(a, b) => {
                self.add(id, a);
                self.add(id, b);
            }
            ConstraintExpr::Rel(r) => {
                for p in r.params() {
                    let leaf = self.node(id);
                    self.occurrences.push((leaf, p));
                }
            }
        }
    }

    fn distances_from(&self, start: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.adjacency.len()];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            for &m in &self.adjacency[n] {
                if dist[m] == usize::MAX {
                    dist[m] = dist[n] + 1;
                    queue.push_back(m);
                }
            }
        }
        dist
    }
}

/// Pairwise parameter distances on the constraint parse forest, counted in
/// edges. Indexed by declared parameter; entries for unconstrained
/// parameters are `usize::MAX`.
pub fn parameter_distances(model: &SutModel) -> Vec<Vec<usize>> {
    let n = model.param_count();
    let forest = ParseForest::build(model);
    let mut dist = vec![vec![usize::MAX; n]; n];
    for &(node, p) in &forest.occurrences {
        let from_here = forest.distances_from(node);
        for &(other, q) in &forest.occurrences {
            dist[p][q] = dist[p][q].min(from_here[other]);
        }
    }
    dist
}

/// Greedy static order: first the parameter with the least total distance
/// to all others, then repeatedly the one closest in total to those already
/// chosen. Ties go to the lower declaration index.
pub fn order_parameters(model: &SutModel) -> Vec<usize> {
    let params = constrained_params(model);
    if params.is_empty() {
        return params;
    }
    let dist = parameter_distances(model);
    let total = |p: usize, among: &[usize]| -> usize {
        among.iter().filter(|&&q| q != p).map(|&q| dist[p][q]).sum()
    };
    let first = *params
        .iter()
        .min_by_key(|&&p| (total(p, &params), p))
        .unwrap();
    let mut order = vec![first];
    let mut rest: Vec<usize> = params.into_iter().filter(|&p| p != first).collect();
    while !rest.is_empty() {
        let (pos, _) = rest
            .iter()
            .enumerate()
            .min_by_key(|&(_, &p)| (total(p, &order), p))
            .unwrap();
        order.push(rest.remove(pos));
    }
    order
}

/// The compiled constraint function `f` together with its manager.
#[derive(Debug)]
pub struct CompiledConstraints {
    pub manager: BddManager,
    pub f: NodeRef,
    pub encoding: Encoding,
}

impl CompiledConstraints {
    pub fn compile(model: &SutModel, encoding: Encoding, limits: Limits) -> Result<Self, EncodeError> {
        let manager = BddManager::with_limits(encoding.var_count(), limits);
        compile(model, encoding, manager)
    }

    /// Whether the full test case `values` is accepted by `f`.
    pub fn accepts(&self, values: &[u32]) -> Result<bool, EncodeError> {
        let bits = self.encoding.encode(&Assignment::full(values))?;
        Ok(self.manager.eval(self.f, &bits)?)
    }
}

pub fn compile(model: &SutModel, encoding: Encoding, mut manager: BddManager) -> Result<CompiledConstraints, EncodeError> {
    if manager.var_count() != encoding.var_count() {
        return Err(EncodeError::VarCountMismatch {
            expected: encoding.var_count(),
            actual: manager.var_count(),
        });
    }
    let f = constraint_function(&mut manager, model, &encoding)?;
    Ok(CompiledConstraints {
        manager,
        f,
        encoding,
    })
}

/// Builds `f`: the conjunction of every parameter's domain bound and every
/// constraint, over the variables of `encoding`.
pub fn constraint_function(mgr: &mut BddManager, model: &SutModel, encoding: &Encoding) -> Result<NodeRef, BddError> {
    let mut f = mgr.true_ref();
    for &p in encoding.param_order() {
        let bound = domain_bound(mgr, encoding, p, model.domain_size(p))?;
        f = mgr.and(f, bound)?;
    }
    for c in model.constraints() {
        let g = translate(mgr, encoding, c)?;
        f = mgr.and(f, g)?;
    }
    Ok(f)
}

fn vars(encoding: &Encoding, param: usize) -> Range<usize> {
    encoding
        .bit_range(param)
        .expect("constraint parameters are always encoded")
}

/// `value(param) <= |D| - 1`.
pub fn domain_bound(mgr: &mut BddManager, encoding: &Encoding, param: usize, domain_size: u32) -> Result<NodeRef, BddError> {
    le_const(mgr, vars(encoding, param), domain_size - 1)
}

/// Literals of the binary representation of `value` on `bits`.
fn eq_const(mgr: &mut BddManager, bits: Range<usize>, value: u32) -> Result<NodeRef, BddError> {
    let width = bits.len();
    if width < 32 && value >> width != 0 {
        return Ok(mgr.false_ref());
    }
    let literals: Vec<(usize, bool)> = bits.enumerate().map(|(k, var)| (var, value >> k & 1 == 1)).collect();
    mgr.conjunction(&literals)
}

/// Unsigned `bits <= c`, built from the least significant bit upward.
fn le_const(mgr: &mut BddManager, bits: Range<usize>, c: u32) -> Result<NodeRef, BddError> {
    let width = bits.len();
    if width >= 32 || c >= (1u32 << width) - 1 {
        return Ok(mgr.true_ref());
    }
    let mut acc = mgr.true_ref();
    for (k, var) in bits.enumerate() {
        let not_x = mgr.literal(var, false)?;
        acc = if c >> k & 1 == 1 {
            mgr.or(not_x, acc)?
        } else {
            mgr.and(not_x, acc)?
        };
    }
    Ok(acc)
}

fn lt_const(mgr: &mut BddManager, bits: Range<usize>, c: u32) -> Result<NodeRef, BddError> {
    if c == 0 {
        Ok(mgr.false_ref())
    } else {
        le_const(mgr, bits, c - 1)
    }
}

/// Equality of two parameters: matching low bits agree and the wider
/// parameter's extra bits are zero.
fn eq_params(mgr: &mut BddManager, a: Range<usize>, b: Range<usize>) -> Result<NodeRef, BddError> {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut acc = mgr.true_ref();
    for (k, var) in long.clone().enumerate() {
        let x = mgr.mk_var(var)?;
        let term = if k < short.len() {
            let y = mgr.mk_var(short.start + k)?;
            let xor = mgr.apply(crate::bdd::BinOp::Xor, x, y)?;
            mgr.not(xor)?
        } else {
            mgr.not(x)?
        };
        acc = mgr.and(acc, term)?;
    }
    Ok(acc)
}

fn translate_relation(mgr: &mut BddManager, encoding: &Encoding, r: &Relation) -> Result<NodeRef, BddError> {
    match *r {
        Relation::ParamConst { param, op, value } => {
            let bits = vars(encoding, param);
            match op {
                CmpOp::Eq => eq_const(mgr, bits, value),
                CmpOp::Ne => {
                    let e = eq_const(mgr, bits, value)?;
                    mgr.not(e)
                }
                CmpOp::Le => le_const(mgr, bits, value),
                CmpOp::Lt => lt_const(mgr, bits, value),
                CmpOp::Gt => {
                    let e = le_const(mgr, bits, value)?;
                    mgr.not(e)
                }
                CmpOp::Ge => {
                    let e = lt_const(mgr, bits, value)?;
                    mgr.not(e)
                }
            }
        }
        Relation::ParamParam { left, right, equal } => {
            let e = eq_params(mgr, vars(encoding, left), vars(encoding, right))?;
            if equal {
                Ok(e)
            } else {
                mgr.not(e)
            }
        }
    }
}

/// Bit-level translation of one constraint expression.
pub fn translate(mgr: &mut BddManager, encoding: &Encoding, e: &ConstraintExpr) -> Result<NodeRef, BddError> {
    use crate::bdd::BinOp;
    match e {
        ConstraintExpr::Not(a) => {
            let a = translate(mgr, encoding, a)?;
            mgr.not(a)
        }
        ConstraintExpr::And(a, b) | ConstraintExpr::Or(a, b) | ConstraintExpr::Implies(a, b) => {
            let op = match e {
                ConstraintExpr::And(..) => BinOp::And,
                ConstraintExpr::Or(..) => BinOp::Or,
                _ => BinOp::Implies,
            };
            let a = translate(mgr, encoding, a)?;
            let b = translate(mgr, encoding, b)?;
            mgr.apply(op, a, b)
        }
        ConstraintExpr::Rel(r) => translate_relation(mgr, encoding, r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::printer;
    use crate::model::{eval_constraints, parse_model};

    fn bitvec(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn widths() {
        assert_eq!(bits_for(1), 0);
        assert_eq!(bits_for(2), 1);
        assert_eq!(bits_for(3), 2);
        assert_eq!(bits_for(4), 2);
        assert_eq!(bits_for(5), 3);
        assert_eq!(bits_for(8), 3);
        assert_eq!(bits_for(9), 4);
    }

    #[test]
    fn printer_offsets() {
        let m = printer();
        let enc = Encoding::new(&m, EncodingMode::WithDash, ParamOrdering::Declaration);
        assert_eq!(enc.offsets(), &[0, 2, 4, 6]);
        assert_eq!(enc.bit_range(1), Some(2..4));
        let enc1 = Encoding::new(&m, EncodingMode::Full, ParamOrdering::Declaration);
        assert_eq!(enc1.var_count(), 6);
    }

    #[test]
    fn printer_encodings() {
        let m = printer();
        for mode in [EncodingMode::Full, EncodingMode::WithDash] {
            let enc = Encoding::new(&m, mode, ParamOrdering::Declaration);
            assert_eq!(enc.encode(&Assignment::full(&[1, 0, 2])).unwrap(), bitvec("100001"));
            assert_eq!(enc.encode(&Assignment::full(&[2, 0, 0])).unwrap(), bitvec("010000"));
        }
        let enc = Encoding::new(&m, EncodingMode::WithDash, ParamOrdering::Declaration);
        let a = Assignment::new(vec![Some(1), Some(1), None]);
        assert_eq!(enc.encode(&a).unwrap(), bitvec("101011"));
        let a = Assignment::new(vec![Some(0), None, Some(0)]);
        assert_eq!(enc.encode(&a).unwrap(), bitvec("001100"));
    }

    #[test]
    fn encode_errors() {
        let m = printer();
        let enc = Encoding::new(&m, EncodingMode::Full, ParamOrdering::Declaration);
        assert_eq!(
            enc.encode(&Assignment::new(vec![Some(1), None, Some(0)])),
            Err(EncodeError::UnspecifiedValue { param: 1 })
        );
        assert!(matches!(
            enc.encode(&Assignment::full(&[3, 0, 0])),
            Err(EncodeError::Model(ModelError::ValueOutOfRange { .. }))
        ));
    }

    #[test]
    fn constrained_parameter_sets() {
        assert_eq!(constrained_params(&printer()), vec![0, 1, 2]);
        assert!(constrained_params(&printer().without_constraints()).is_empty());
        let m = parse_model(
            "[PARAMETERS]\nA: 0,1\nB: 0,1\nC: 0,1,2\nD: 0,1\n[CONSTRAINTS]\nA = 0 => B = 1\nD != 1 || A = 1\n",
        )
        .unwrap();
        assert_eq!(constrained_params(&m), vec![0, 1, 3]);
        let enc = Encoding::new(&m, EncodingMode::Full, ParamOrdering::Declaration);
        assert!(!enc.is_constrained(2));
        assert_eq!(enc.var_count(), 3);
    }

    #[test]
    fn printer_distances_and_order() {
        let m = printer();
        let d = parameter_distances(&m);
        // P1-E-I1-E-P2, P2-E-I2-N-E-P3, P1-E-I1-root-I2-N-E-P3
        assert_eq!(d[0][1], 4);
        assert_eq!(d[1][2], 5);
        assert_eq!(d[0][2], 7);
        assert_eq!(order_parameters(&m), vec![1, 0, 2]);
    }

    #[test]
    fn order_two_params_tie_breaks_by_declaration() {
        let m = parse_model("[PARAMETERS]\nA: 0,1\nB: 0,1\n[CONSTRAINTS]\nB = 0 || A = 1\n").unwrap();
        assert_eq!(order_parameters(&m), vec![0, 1]);
    }

    #[test]
    fn order_groups_disjoint_constraints() {
        let m = parse_model(
            "[PARAMETERS]\nA: 0,1\nB: 0,1\nC: 0,1\nD: 0,1\n[CONSTRAINTS]\nA = 0 => C = 1\nB = 1 || D = 0\n",
        )
        .unwrap();
        let order = order_parameters(&m);
        let pos = |p| order.iter().position(|&q| q == p).unwrap();
        // {A, C} and {B, D} must each be contiguous.
        assert_eq!(pos(0).abs_diff(pos(2)), 1, "{order:?}");
        assert_eq!(pos(1).abs_diff(pos(3)), 1, "{order:?}");
        assert_eq!(order, vec![0, 2, 1, 3]);
    }

    #[test]
    fn with_order_validates() {
        let m = printer();
        assert_eq!(
            Encoding::with_order(&m, EncodingMode::Full, vec![0, 1]),
            Err(EncodeError::BadOrder)
        );
        assert!(Encoding::with_order(&m, EncodingMode::Full, vec![2, 0, 1]).is_ok());
    }

    /// The printer constraint formula, written out by hand.
    fn printer_formula(x: &[bool]) -> bool {
        let imp = |a: bool, b: bool| !a || b;
        let (x1, x2, x3, x4, x5, x6) = (x[0], x[1], x[2], x[3], x[4], x[5]);
        imp(x2, !x1)
            && imp(x4, !x3)
            && imp(x6, !x5)
            && imp(!x1 && !x2, !x3 && !x4)
            && imp(!x3 && !x4, !(!x5 && !x6))
    }

    #[test]
    fn printer_f_matches_formula_on_all_valuations() {
        let m = printer();
        let enc = Encoding::new(&m, EncodingMode::Full, ParamOrdering::Declaration);
        let cc = CompiledConstraints::compile(&m, enc, Limits::default()).unwrap();
        for v in 0u32..64 {
            let bits: Vec<bool> = (0..6).map(|i| v >> i & 1 == 1).collect();
            assert_eq!(cc.manager.eval(cc.f, &bits).unwrap(), printer_formula(&bits), "{bits:?}");
        }
        assert_eq!(cc.manager.sat_count(cc.f).unwrap(), 18);
        assert!(!cc.manager.is_false(cc.f).unwrap());
    }

    #[test]
    fn printer_f_eval_examples() {
        let m = printer();
        let enc = Encoding::new(&m, EncodingMode::Full, ParamOrdering::Declaration);
        let cc = CompiledConstraints::compile(&m, enc, Limits::default()).unwrap();
        assert!(cc.manager.eval(cc.f, &bitvec("100001")).unwrap());
        assert!(!cc.manager.eval(cc.f, &bitvec("010000")).unwrap());
    }

    #[test]
    fn three_value_bound_is_implication() {
        let m = parse_model("[PARAMETERS]\nA: 0,1,2\n[CONSTRAINTS]\nA = 0 || A != 0\n").unwrap();
        let enc = Encoding::new(&m, EncodingMode::Full, ParamOrdering::Declaration);
        assert_eq!(enc.bit_range(0), Some(0..2));
        let mut mgr = BddManager::new(2);
        let bound = domain_bound(&mut mgr, &enc, 0, 3).unwrap();
        let x1 = mgr.mk_var(0).unwrap();
        let x2 = mgr.mk_var(1).unwrap();
        let nx1 = mgr.not(x1).unwrap();
        let expected = mgr.apply(crate::bdd::BinOp::Implies, x2, nx1).unwrap();
        assert_eq!(bound, expected);
    }

    #[test]
    fn dash_codeword_rejected_by_f() {
        let m = parse_model(
            "[PARAMETERS]\nA: 0,1,2\nB: 0,1,2,3\nC: 0,1\n[CONSTRAINTS]\nA != 1 || B = 2\nC = 1 => A = 0\n",
        )
        .unwrap();
        let enc = Encoding::new(&m, EncodingMode::WithDash, ParamOrdering::Distance);
        let cc = CompiledConstraints::compile(&m, enc, Limits::default()).unwrap();
        let n = cc.encoding.var_count();
        for v in 0u64..(1 << n) {
            let bits: Vec<bool> = (0..n).map(|i| v >> i & 1 == 1).collect();
            let has_dash = (0..3).any(|p| cc.encoding.bit_range(p).unwrap().all(|i| bits[i]));
            if has_dash {
                assert!(!cc.manager.eval(cc.f, &bits).unwrap());
            }
        }
    }

    fn all_full(model: &SutModel) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        for p in model.params() {
            out = out
                .into_iter()
                .flat_map(|t| {
                    (0..p.domain_size()).map(move |v| {
                        let mut t = t.clone();
                        t.push(v);
                        t
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn faithful_for_every_relation_kind_and_order() {
        let m = parse_model(
            "[PARAMETERS]\nA: a,b,c\nB: 0,1,2,3,4\nC: x\nD: p,q\nE: 0,1,2,3,4,5,6\n[CONSTRAINTS]\n\
             A < c => B >= 2\nB != 3 && (D = q || E <= 4)\nA = B || E > 5 || C = x\nE != B => D = A\n",
        )
        .unwrap();
        let orders = [vec![0, 1, 2, 3, 4], vec![4, 3, 2, 1, 0], order_parameters(&m), vec![2, 0, 4, 1, 3]];
        for mode in [EncodingMode::Full, EncodingMode::WithDash] {
            let mut counts = Vec::new();
            for order in &orders {
                let enc = Encoding::with_order(&m, mode, order.clone()).unwrap();
                let cc = CompiledConstraints::compile(&m, enc, Limits::default()).unwrap();
                let mut accepted = 0;
                for t in all_full(&m) {
                    let want = eval_constraints(&m, &t);
                    assert_eq!(cc.accepts(&t).unwrap(), want, "{mode:?} {order:?} {t:?}");
                    accepted += want as u128;
                }
                assert_eq!(cc.manager.sat_count(cc.f).unwrap(), accepted);
                counts.push(accepted);
            }
            assert!(counts.windows(2).all(|w| w[0] == w[1]));
        }
    }
}
