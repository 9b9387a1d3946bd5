//! System-under-test model: parameters with finite domains, constraint
//! expressions over them, and (partial) test case assignments.

use std::fmt;

use thiserror::Error;

mod parser;

pub use parser::{parse_constraint, parse_model};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: unknown parameter `{name}`")]
    UnknownParameter {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("line {line}, column {column}: `{value}` is not a value of parameter `{param}`")]
    UnknownValue {
        line: usize,
        column: usize,
        param: String,
        value: String,
    },
    #[error("parameter `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("parameter `{0}` is declared more than once")]
    DuplicateParameter(String),
    #[error("parameter `{param}` declares value `{value}` more than once")]
    DuplicateValue { param: String, value: String },
    #[error("constraint references parameter index {0}, which does not exist")]
    ParameterOutOfRange(usize),
    #[error("value {value} is out of range for parameter `{param}`")]
    ValueOutOfRange { param: String, value: u32 },
    #[error("assignment has {actual} positions, model has {expected} parameters")]
    ArityMismatch { expected: usize, actual: usize },
}

/// A parameter and its value labels. Values are the indices `0..domain_size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parameter {
    name: String,
    values: Vec<String>,
}

impl Parameter {
    pub fn new(name: impl Into<String>, values: Vec<String>) -> Result<Self, ModelError> {
        let name = name.into();
        if values.is_empty() {
            return Err(ModelError::EmptyDomain(name));
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(ModelError::DuplicateValue {
                    param: name,
                    value: v.clone(),
                });
            }
        }
        Ok(Parameter { name, values })
    }

    /// Parameter with unlabeled values `0..size`.
    pub fn with_size(name: impl Into<String>, size: u32) -> Result<Self, ModelError> {
        Self::new(name, (0..size).map(|v| v.to_string()).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.values
    }

    pub fn domain_size(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn label(&self, value: u32) -> Option<&str> {
        self.values.get(value as usize).map(String::as_str)
    }

    pub fn value_of(&self, label: &str) -> Option<u32> {
        self.values.iter().position(|v| v == label).map(|i| i as u32)
    }
}

/// Comparison operator of a relation leaf. Ordering operators compare value
/// indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds(self, lhs: u32, rhs: u32) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Relation {
    /// `P op v`
    ParamConst { param: usize, op: CmpOp, value: u32 },
    /// `P = Q` or `P != Q`; `equal` selects which.
    ParamParam {
        left: usize,
        right: usize,
        equal: bool,
    },
}

impl Relation {
    pub fn params(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Relation::ParamConst { param, .. } => (param, None),
            Relation::ParamParam { left, right, .. } => (left, Some(right)),
        };
        std::iter::once(a).chain(b)
    }

    pub fn eval(&self, values: &[u32]) -> bool {
        match *self {
            Relation::ParamConst { param, op, value } => op.holds(values[param], value),
            Relation::ParamParam { left, right, equal } => {
                (values[left] == values[right]) == equal
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ConstraintExpr {
    Not(Box<ConstraintExpr>),
    And(Box<ConstraintExpr>, Box<ConstraintExpr>),
    Or(Box<ConstraintExpr>, Box<ConstraintExpr>),
    Implies(Box<ConstraintExpr>, Box<ConstraintExpr>),
    Rel(Relation),
}

impl ConstraintExpr {
    pub fn eq_const(param: usize, value: u32) -> Self {
        ConstraintExpr::Rel(Relation::ParamConst {
            param,
            op: CmpOp::Eq,
            value,
        })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: ConstraintExpr) -> Self {
        ConstraintExpr::Not(Box::new(e))
    }

    pub fn and(a: ConstraintExpr, b: ConstraintExpr) -> Self {
        ConstraintExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: ConstraintExpr, b: ConstraintExpr) -> Self {
        ConstraintExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: ConstraintExpr, b: ConstraintExpr) -> Self {
        ConstraintExpr::Implies(Box::new(a), Box::new(b))
    }

    /// Evaluates under a full assignment given as value indices.
    pub fn eval(&self, values: &[u32]) -> bool {
        match self {
            ConstraintExpr::Not(e) => !e.eval(values),
            ConstraintExpr::And(a, b) => a.eval(values) && b.eval(values),
            ConstraintExpr::Or(a, b) => a.eval(values) || b.eval(values),
            ConstraintExpr::Implies(a, b) => !a.eval(values) || b.eval(values),
            ConstraintExpr::Rel(r) => r.eval(values),
        }
    }

    /// Calls `visit` on every relation leaf, left to right.
    pub fn for_each_relation<'a>(&'a self, visit: &mut impl FnMut(&'a Relation)) {
        match self {
            ConstraintExpr::Not(e) => e.for_each_relation(visit),
            ConstraintExpr::And(a, b) | ConstraintExpr::Or(a, b) | ConstraintExpr::Implies(a, b) => {
                a.for_each_relation(visit);
                b.for_each_relation(visit);
            }
            ConstraintExpr::Rel(r) => visit(r),
        }
    }

    /// Renders the expression in model-file syntax. Binary connectives are
    /// fully parenthesized so the output re-parses to the same tree.
    pub fn to_source(&self, model: &SutModel) -> String {
        let mut out = String::new();
        self.write_source(model, &mut out);
        out
    }

    fn write_source(&self, model: &SutModel, out: &mut String) {
        let binary = |a: &ConstraintExpr, b: &ConstraintExpr, op: &str, out: &mut String| {
            out.push('(');
            a.write_source(model, out);
            out.push(' ');
            out.push_str(op);
            out.push(' ');
            b.write_source(model, out);
            out.push(')');
        };
        match self {
            ConstraintExpr::Not(e) => {
                out.push('!');
                e.write_source(model, out);
            }
            ConstraintExpr::And(a, b) => binary(a, b, "&&", out),
            ConstraintExpr::Or(a, b) => binary(a, b, "||", out),
            ConstraintExpr::Implies(a, b) => binary(a, b, "=>", out),
            ConstraintExpr::Rel(Relation::ParamConst { param, op, value }) => {
                let p = &model.params[*param];
                out.push_str(&parser::quote_if_needed(p.name()));
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
                out.push_str(&parser::quote_if_needed(p.label(*value).unwrap_or("?")));
            }
            ConstraintExpr::Rel(Relation::ParamParam { left, right, equal }) => {
                out.push_str(&parser::quote_if_needed(model.params[*left].name()));
                out.push_str(if *equal { " = " } else { " != " });
                out.push_str(&parser::quote_if_needed(model.params[*right].name()));
            }
        }
    }
}

/// Parameters plus the constraints a valid test case must satisfy. The
/// constraints are implicitly conjoined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SutModel {
    params: Vec<Parameter>,
    constraints: Vec<ConstraintExpr>,
}

impl SutModel {
    pub fn new(params: Vec<Parameter>, constraints: Vec<ConstraintExpr>) -> Result<Self, ModelError> {
        for (i, p) in params.iter().enumerate() {
            if params[..i].iter().any(|q| q.name == p.name) {
                return Err(ModelError::DuplicateParameter(p.name.clone()));
            }
        }
        for c in &constraints {
            let mut err = None;
            c.for_each_relation(&mut |r| {
                if err.is_some() {
                    return;
                }
                for idx in r.params() {
                    if idx >= params.len() {
                        err = Some(ModelError::ParameterOutOfRange(idx));
                        return;
                    }
                }
                if let Relation::ParamConst { param, value, .. } = *r {
                    if value >= params[param].domain_size() {
                        err = Some(ModelError::ValueOutOfRange {
                            param: params[param].name.clone(),
                            value,
                        });
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
        Ok(SutModel {
            params,
            constraints,
        })
    }

    pub fn params(&self) -> &[Parameter] {
        &self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn domain_size(&self, param: usize) -> u32 {
        self.params[param].domain_size()
    }

    pub fn constraints(&self) -> &[ConstraintExpr] {
        &self.constraints
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    /// The same parameters with no constraints.
    pub fn without_constraints(&self) -> SutModel {
        SutModel {
            params: self.params.clone(),
            constraints: Vec::new(),
        }
    }

    /// Checks arity and that every fixed value is in its domain.
    pub fn check_assignment(&self, a: &Assignment) -> Result<(), ModelError> {
        if a.len() != self.params.len() {
            return Err(ModelError::ArityMismatch {
                expected: self.params.len(),
                actual: a.len(),
            });
        }
        for (i, v) in a.fixed() {
            if v >= self.params[i].domain_size() {
                return Err(ModelError::ValueOutOfRange {
                    param: self.params[i].name.clone(),
                    value: v,
                });
            }
        }
        Ok(())
    }

    /// Total number of full test cases, saturating.
    pub fn full_space_size(&self) -> u128 {
        self.params
            .iter()
            .fold(1u128, |acc, p| acc.saturating_mul(p.domain_size() as u128))
    }
}

/// `F(t)`: true iff the full test case `values` satisfies every constraint.
pub fn eval_constraints(model: &SutModel, values: &[u32]) -> bool {
    debug_assert_eq!(values.len(), model.param_count());
    model.constraints.iter().all(|c| c.eval(values))
}

/// An n-tuple of values where each position is fixed or unspecified (`-`).
/// A full test case has no unspecified positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    values: Vec<Option<u32>>,
}

impl Assignment {
    pub fn new(values: Vec<Option<u32>>) -> Self {
        Assignment { values }
    }

    /// All positions unspecified.
    pub fn unspecified(n: usize) -> Self {
        Assignment {
            values: vec![None; n],
        }
    }

    pub fn full(values: &[u32]) -> Self {
        Assignment {
            values: values.iter().copied().map(Some).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<u32> {
        self.values[i]
    }

    pub fn set(&mut self, i: usize, value: Option<u32>) {
        self.values[i] = value;
    }

    pub fn values(&self) -> &[Option<u32>] {
        &self.values
    }

    pub fn is_full(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// `(position, value)` for every fixed position.
    pub fn fixed(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (i, v)))
    }

    /// The value vector when the assignment is full.
    pub fn to_full(&self) -> Option<Vec<u32>> {
        self.values.iter().copied().collect()
    }

    /// True when every fixed position of `other` holds the same value here.
    pub fn covers(&self, other: &Assignment) -> bool {
        other.fixed().all(|(i, v)| self.values[i] == Some(v))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match v {
                Some(v) => write!(f, "{v}")?,
                None => f.write_str("-")?,
            }
        }
        f.write_str(")")
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const PRINTER: &str = "\
# a printer
[PARAMETERS]
Paper size: B4, A4, B5
Feed tray: Bypass, Tray 1, Tray 2
Paper type: Thick, Normal, Thin

[CONSTRAINTS]
\"Paper size\" = B4 => \"Feed tray\" = Bypass
\"Feed tray\" = Bypass => !(\"Paper type\" = Thick)
";

    pub(crate) fn printer() -> SutModel {
        parse_model(PRINTER).unwrap()
    }

    #[test]
    fn printer_shape() {
        let m = printer();
        assert_eq!(m.param_count(), 3);
        assert!(m.params().iter().all(|p| p.domain_size() == 3));
        assert_eq!(m.constraints().len(), 2);
        assert_eq!(m.params()[1].label(1), Some("Tray 1"));
    }

    #[test]
    fn printer_eval() {
        let m = printer();
        assert!(eval_constraints(&m, &[1, 0, 2]));
        assert!(!eval_constraints(&m, &[2, 0, 0]));
    }

    #[test]
    fn no_constraints_is_always_valid() {
        let m = printer().without_constraints();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    assert!(eval_constraints(&m, &[a, b, c]));
                }
            }
        }
    }

    #[test]
    fn duplicate_parameter_rejected() {
        let p = Parameter::with_size("A", 2).unwrap();
        assert_eq!(
            SutModel::new(vec![p.clone(), p], vec![]),
            Err(ModelError::DuplicateParameter("A".into()))
        );
    }

    #[test]
    fn duplicate_value_rejected() {
        assert!(matches!(
            Parameter::new("A", vec!["x".into(), "x".into()]),
            Err(ModelError::DuplicateValue { .. })
        ));
    }

    #[test]
    fn constraint_value_must_be_in_range() {
        let p = Parameter::with_size("A", 2).unwrap();
        assert!(matches!(
            SutModel::new(vec![p], vec![ConstraintExpr::eq_const(0, 2)]),
            Err(ModelError::ValueOutOfRange { .. })
        ));
    }

    #[test]
    fn assignment_display_and_cover() {
        let a = Assignment::new(vec![Some(1), Some(1), None]);
        assert_eq!(a.to_string(), "(1,1,-)");
        let t = Assignment::full(&[1, 1, 2]);
        assert!(t.covers(&a));
        assert!(!a.covers(&t));
        assert_eq!(a.fixed().collect::<Vec<_>>(), vec![(0, 1), (1, 1)]);
    }

    #[test]
    fn check_assignment_ranges() {
        let m = printer();
        assert!(m.check_assignment(&Assignment::new(vec![Some(2), None, None])).is_ok());
        assert!(m.check_assignment(&Assignment::new(vec![Some(3), None, None])).is_err());
        assert!(matches!(
            m.check_assignment(&Assignment::unspecified(2)),
            Err(ModelError::ArityMismatch { .. })
        ));
    }
}
