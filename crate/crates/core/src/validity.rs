//! Validity of full and partial test cases.
//!
//! Three interchangeable checkers sit behind [`ValidityHandler`]:
//!
//! * [`ConjunctionHandler`] conjoins the fixed values with `f` and asks
//!   whether the result is the false terminal.
//! * [`PartialHandler`] precomputes a BDD `g` accepting exactly the valid
//!   full *and* partial test cases (dashes encoded as all-ones codewords),
//!   after which each check is one root-to-terminal walk.
//! * [`OracleHandler`] searches for a satisfying completion directly on the
//!   constraint expressions.

use std::fmt;
use std::str::FromStr;

use crate::bdd::{BddManager, Limits, NodeRef};
use crate::encode::{CompiledConstraints, EncodeError, Encoding, EncodingMode, ParamOrdering};
use crate::model::{Assignment, ConstraintExpr, Relation, SutModel};

pub trait ValidityHandler {
    /// Whether `a` can be extended to a full test case satisfying every
    /// constraint.
    fn is_valid(&mut self, a: &Assignment) -> Result<bool, EncodeError>;

    /// Per declared parameter: does it occur in some constraint?
    fn constrained(&self) -> &[bool];

    fn kind(&self) -> HandlerKind;
}

impl<H: ValidityHandler + ?Sized> ValidityHandler for Box<H> {
    fn is_valid(&mut self, a: &Assignment) -> Result<bool, EncodeError> {
        (**self).is_valid(a)
    }

    fn constrained(&self) -> &[bool] {
        (**self).constrained()
    }

    fn kind(&self) -> HandlerKind {
        (**self).kind()
    }
}

/// True when every fixed position of `a` is unconstrained, in which case
/// `a` is valid whenever the model is satisfiable at all.
pub fn only_unconstrained(constrained: &[bool], a: &Assignment) -> bool {
    a.fixed().all(|(i, _)| !constrained[i])
}

fn constrained_mask(encoding: &Encoding) -> Vec<bool> {
    (0..encoding.param_count()).map(|p| encoding.is_constrained(p)).collect()
}

/// Order in which parameters are quantified while building `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuantOrder {
    /// From the parameter nearest the root downward.
    Down,
    /// From the parameter nearest the terminals upward.
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HandlerKind {
    BddAnd,
    BddPartialUp,
    BddPartialDown,
    Oracle,
}

impl HandlerKind {
    pub const ALL: [HandlerKind; 4] = [
        HandlerKind::BddAnd,
        HandlerKind::BddPartialUp,
        HandlerKind::BddPartialDown,
        HandlerKind::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HandlerKind::BddAnd => "bdd-and",
            HandlerKind::BddPartialUp => "bdd-partial-up",
            HandlerKind::BddPartialDown => "bdd-partial-down",
            HandlerKind::Oracle => "oracle",
        }
    }
}

impl fmt::Display for HandlerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HandlerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HandlerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown handler `{s}` (expected bdd-and, bdd-partial-up, bdd-partial-down or oracle)"))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct HandlerOptions {
    pub ordering: ParamOrdering,
    pub limits: Limits,
}

/// Builds a handler of the given kind for `model`. BDD compilation and, for
/// the partial handlers, the construction of `g` happen here.
pub fn build_handler(
    model: &SutModel,
    kind: HandlerKind,
    options: HandlerOptions,
) -> Result<Box<dyn ValidityHandler>, EncodeError> {
    Ok(match kind {
        HandlerKind::BddAnd => {
            let enc = Encoding::new(model, EncodingMode::Full, options.ordering);
            Box::new(ConjunctionHandler::new(CompiledConstraints::compile(model, enc, options.limits)?))
        }
        HandlerKind::BddPartialUp | HandlerKind::BddPartialDown => {
            let order = if kind == HandlerKind::BddPartialUp {
                QuantOrder::Up
            } else {
                QuantOrder::Down
            };
            let enc = Encoding::new(model, EncodingMode::WithDash, options.ordering);
            let cc = CompiledConstraints::compile(model, enc, options.limits)?;
            Box::new(PartialHandler::new(PartialValidityBdd::build(cc, order)?))
        }
        HandlerKind::Oracle => Box::new(OracleHandler::new(model.clone())),
    })
}

/// `f_T`: conjunction of the bit literals of `a`'s fixed, constrained
/// positions.
pub fn partial_cube(mgr: &mut BddManager, encoding: &Encoding, a: &Assignment) -> Result<NodeRef, EncodeError> {
    let mut literals = Vec::new();
    for (p, v) in a.fixed() {
        if let Some(range) = encoding.bit_range(p) {
            literals.extend(range.enumerate().map(|(k, var)| (var, v >> k & 1 == 1)));
        }
    }
    Ok(mgr.conjunction(&literals)?)
}

/// Validity by `f_T ∧ f ≠ false`.
pub fn check_and(cc: &mut CompiledConstraints, a: &Assignment) -> Result<bool, EncodeError> {
    if a.len() != cc.encoding.param_count() {
        return Err(crate::model::ModelError::ArityMismatch {
            expected: cc.encoding.param_count(),
            actual: a.len(),
        }
        .into());
    }
    let ft = partial_cube(&mut cc.manager, &cc.encoding, a)?;
    let conj = cc.manager.and(ft, cc.f)?;
    Ok(!cc.manager.is_false(conj)?)
}

pub struct ConjunctionHandler {
    cc: CompiledConstraints,
    constrained: Vec<bool>,
    satisfiable: bool,
}

impl ConjunctionHandler {
    pub fn new(cc: CompiledConstraints) -> Self {
        let constrained = constrained_mask(&cc.encoding);
        let satisfiable = !cc.manager.is_false(cc.f).expect("f belongs to its manager");
        ConjunctionHandler {
            cc,
            constrained,
            satisfiable,
        }
    }

    pub fn compiled(&self) -> &CompiledConstraints {
        &self.cc
    }
}

impl ValidityHandler for ConjunctionHandler {
    fn is_valid(&mut self, a: &Assignment) -> Result<bool, EncodeError> {
        if only_unconstrained(&self.constrained, a) && a.len() == self.constrained.len() {
            return Ok(self.satisfiable);
        }
        check_and(&mut self.cc, a)
    }

    fn constrained(&self) -> &[bool] {
        &self.constrained
    }

    fn kind(&self) -> HandlerKind {
        HandlerKind::BddAnd
    }
}

/// Turns `f` into `g`, the function accepting every valid full or partial
/// test case under a dash-capable encoding.
///
/// For each parameter in `order`, with `cube` the conjunction of its
/// variables: `g := g ∨ (∃cube. g) ∧ cube`.
pub fn partial_function(
    mgr: &mut BddManager,
    encoding: &Encoding,
    f: NodeRef,
    order: QuantOrder,
) -> Result<NodeRef, EncodeError> {
    if encoding.mode() != EncodingMode::WithDash {
        return Err(EncodeError::ModeMismatch);
    }
    let mut params = encoding.param_order().to_vec();
    if order == QuantOrder::Up {
        params.reverse();
    }
    let mut g = f;
    for p in params {
        let vars: Vec<usize> = encoding.bit_range(p).unwrap().collect();
        let cube = mgr.cube(&vars)?;
        let tmp = mgr.exists(cube, g)?;
        let h = mgr.and(tmp, cube)?;
        g = mgr.or(g, h)?;
    }
    Ok(g)
}

/// `g` together with the compiled constraints it was derived from.
#[derive(Debug)]
pub struct PartialValidityBdd {
    pub cc: CompiledConstraints,
    pub g: NodeRef,
    pub order: QuantOrder,
}

impl PartialValidityBdd {
    /// `cc` must use [`EncodingMode::WithDash`].
    pub fn build(mut cc: CompiledConstraints, order: QuantOrder) -> Result<Self, EncodeError> {
        let g = partial_function(&mut cc.manager, &cc.encoding, cc.f, order)?;
        Ok(PartialValidityBdd { cc, g, order })
    }

    pub fn encoding(&self) -> &Encoding {
        &self.cc.encoding
    }

    pub fn manager(&self) -> &BddManager {
        &self.cc.manager
    }

    /// One walk from the root of `g`; dashes read as all-ones bits and
    /// unconstrained parameters are never consulted.
    pub fn check_traverse(&self, a: &Assignment) -> Result<bool, EncodeError> {
        let enc = &self.cc.encoding;
        if a.len() != enc.param_count() {
            return Err(crate::model::ModelError::ArityMismatch {
                expected: enc.param_count(),
                actual: a.len(),
            }
            .into());
        }
        Ok(self.cc.manager.eval_with(self.g, |var| {
            let (p, bit) = enc.var_owner(var);
            match a.get(p) {
                Some(v) => v >> bit & 1 == 1,
                None => true,
            }
        })?)
    }
}

pub struct PartialHandler {
    pb: PartialValidityBdd,
    constrained: Vec<bool>,
}

impl PartialHandler {
    pub fn new(pb: PartialValidityBdd) -> Self {
        let constrained = constrained_mask(&pb.cc.encoding);
        PartialHandler { pb, constrained }
    }

    pub fn partial_bdd(&self) -> &PartialValidityBdd {
        &self.pb
    }
}

impl ValidityHandler for PartialHandler {
    fn is_valid(&mut self, a: &Assignment) -> Result<bool, EncodeError> {
        self.pb.check_traverse(a)
    }

    fn constrained(&self) -> &[bool] {
        &self.constrained
    }

    fn kind(&self) -> HandlerKind {
        match self.pb.order {
            QuantOrder::Up => HandlerKind::BddPartialUp,
            QuantOrder::Down => HandlerKind::BddPartialDown,
        }
    }
}

/// Kleene three-valued truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Truth {
    False,
    True,
    Unknown,
}

fn eval3(e: &ConstraintExpr, values: &[Option<u32>]) -> Truth {
    use Truth::*;
    match e {
        ConstraintExpr::Not(a) => match eval3(a, values) {
            True => False,
            False => True,
            Unknown => Unknown,
        },
        ConstraintExpr::And(a, b) => match (eval3(a, values), eval3(b, values)) {
            (False, _) | (_, False) => False,
            (True, True) => True,
            _ => Unknown,
        },
        ConstraintExpr::Or(a, b) => match (eval3(a, values), eval3(b, values)) {
            (True, _) | (_, True) => True,
            (False, False) => False,
            _ => Unknown,
        },
        ConstraintExpr::Implies(a, b) => match (eval3(a, values), eval3(b, values)) {
            (False, _) | (_, True) => True,
            (True, False) => False,
            _ => Unknown,
        },
        ConstraintExpr::Rel(r) => {
            let holds = match *r {
                Relation::ParamConst { param, op, value } => values[param].map(|v| op.holds(v, value)),
                Relation::ParamParam { left, right, equal } => match (values[left], values[right]) {
                    (Some(a), Some(b)) => Some((a == b) == equal),
                    _ => None,
                },
            };
            match holds {
                Some(true) => True,
                Some(false) => False,
                None => Unknown,
            }
        }
    }
}

fn conjunction3(model: &SutModel, values: &[Option<u32>]) -> Truth {
    let mut result = Truth::True;
    for c in model.constraints() {
        match eval3(c, values) {
            Truth::False => return Truth::False,
            Truth::Unknown => result = Truth::Unknown,
            Truth::True => {}
        }
    }
    result
}

/// Whether some completion of `a`'s unspecified positions satisfies every
/// constraint. A backtracking search over the unspecified positions that
/// occur in a constraint: before each branch every open position is probed
/// value by value, values that falsify a constraint are discarded, and the
/// position with the fewest remaining values is branched on next.
pub fn oracle_check(model: &SutModel, a: &Assignment) -> bool {
    Oracle::new(model).check(a)
}

struct Oracle<'m> {
    model: &'m SutModel,
    /// Constraint indices mentioning each parameter.
    by_param: Vec<Vec<usize>>,
}

impl<'m> Oracle<'m> {
    fn new(model: &'m SutModel) -> Self {
        let mut by_param = vec![Vec::new(); model.param_count()];
        for (ci, c) in model.constraints().iter().enumerate() {
            c.for_each_relation(&mut |r| {
                for p in r.params() {
                    if by_param[p].last() != Some(&ci) {
                        by_param[p].push(ci);
                    }
                }
            });
        }
        Oracle { model, by_param }
    }

    fn check(&self, a: &Assignment) -> bool {
        let mut values = a.values().to_vec();
        let mut open: Vec<usize> = (0..values.len())
            .filter(|&i| values[i].is_none() && !self.by_param[i].is_empty())
            .collect();
        self.extend(&mut values, &mut open)
    }

    fn falsifies(&self, p: usize, values: &[Option<u32>]) -> bool {
        let cs = self.model.constraints();
        self.by_param[p].iter().any(|&ci| eval3(&cs[ci], values) == Truth::False)
    }

    fn extend(&self, values: &mut [Option<u32>], open: &mut Vec<usize>) -> bool {
        match conjunction3(self.model, values) {
            Truth::True => return true,
            Truth::False => return false,
            Truth::Unknown => {}
        }
        assert!(!open.is_empty(), "constraints undecided with all referenced parameters fixed");
        let mut best: Option<(usize, Vec<u32>)> = None;
        for (slot, &p) in open.iter().enumerate() {
            let mut survivors = Vec::new();
            for v in 0..self.model.domain_size(p) {
                values[p] = Some(v);
                if !self.falsifies(p, values) {
                    survivors.push(v);
                }
            }
            values[p] = None;
            if survivors.is_empty() {
                return false;
            }
            if best.as_ref().is_none_or(|(_, b)| survivors.len() < b.len()) {
                best = Some((slot, survivors));
            }
        }
        let (slot, survivors) = best.expect("open is non-empty");
        let p = open.swap_remove(slot);
        let mut found = false;
        for v in survivors {
            values[p] = Some(v);
            if self.extend(values, open) {
                found = true;
                break;
            }
        }
        values[p] = None;
        open.push(p);
        let last = open.len() - 1;
        open.swap(slot, last);
        found
    }
}

pub struct OracleHandler {
    model: SutModel,
    constrained: Vec<bool>,
}

impl OracleHandler {
    pub fn new(model: SutModel) -> Self {
        let mut constrained = vec![false; model.param_count()];
        for c in model.constraints() {
            c.for_each_relation(&mut |r| {
                for p in r.params() {
                    constrained[p] = true;
                }
            });
        }
        OracleHandler { model, constrained }
    }
}

impl ValidityHandler for OracleHandler {
    fn is_valid(&mut self, a: &Assignment) -> Result<bool, EncodeError> {
        self.model.check_assignment(a)?;
        Ok(oracle_check(&self.model, a))
    }

    fn constrained(&self) -> &[bool] {
        &self.constrained
    }

    fn kind(&self) -> HandlerKind {
        HandlerKind::Oracle
    }
}
