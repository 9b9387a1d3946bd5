//! In-parameter-order (IPOG) generation of constrained t-wise test suites,
//! and a verifier for coverage and row validity.
//!
//! Parameters are processed in non-increasing domain size. The first `t`
//! seed the suite with every valid value combination; every later parameter
//! is added by horizontal growth (extend each row with its best valid value)
//! followed by vertical growth (fit each still-uncovered combination into a
//! compatible row, or append it as a new partial row).

use std::time::Instant;

use rustc_hash::FxHashSet;
use thiserror::Error;

use crate::encode::EncodeError;
use crate::model::{Assignment, SutModel};
use crate::validity::{only_unconstrained, ValidityHandler};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error("strength {strength} must be between 1 and the parameter count {params}")]
    StrengthOutOfRange { strength: usize, params: usize },
    #[error("handler failed: {0}")]
    Check(#[from] EncodeError),
    #[error("deadline exceeded")]
    Timeout,
}

impl GenerateError {
    /// Timeouts and node explosions, reported as NA by benchmarks.
    pub fn is_resource_exceeded(&self) -> bool {
        match self {
            GenerateError::Timeout => true,
            GenerateError::Check(e) => e.is_resource_exceeded(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct GenerateOptions {
    /// Replace leftover dashes with the smallest value keeping the row valid.
    pub fill_dashes: bool,
    pub deadline: Option<Instant>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestSuite {
    pub rows: Vec<Assignment>,
    pub strength: usize,
    /// Notes about degenerate inputs, e.g. a model with no valid test case.
    pub diagnostics: Vec<String>,
}

impl TestSuite {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Validity check that skips the handler when only unconstrained
/// parameters are fixed. Returns `true` in that case.
pub fn skip_unconstrained_check(handler: &dyn ValidityHandler, combo: &Assignment) -> bool {
    only_unconstrained(handler.constrained(), combo)
}

struct Checker<'h> {
    handler: &'h mut dyn ValidityHandler,
    satisfiable: bool,
    deadline: Option<Instant>,
    calls: u32,
}

impl Checker<'_> {
    fn is_valid(&mut self, a: &Assignment) -> Result<bool, GenerateError> {
        if skip_unconstrained_check(self.handler, a) {
            return Ok(self.satisfiable);
        }
        self.calls = self.calls.wrapping_add(1);
        if self.calls.is_multiple_of(1024) {
            self.check_deadline()?;
        }
        Ok(self.handler.is_valid(a)?)
    }

    fn check_deadline(&self) -> Result<(), GenerateError> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(GenerateError::Timeout),
            _ => Ok(()),
        }
    }
}

/// Declared parameter indices, largest domain first; ties keep declaration
/// order.
pub fn processing_order(model: &SutModel) -> Vec<usize> {
    let mut order: Vec<usize> = (0..model.param_count()).collect();
    order.sort_by_key(|&p| std::cmp::Reverse(model.domain_size(p)));
    order
}

/// Calls `visit` with every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Calls `visit` with every value tuple over `sizes`, last position varying
/// fastest.
fn for_each_tuple(sizes: &[u32], mut visit: impl FnMut(&[u32])) {
    if sizes.contains(&0) {
        return;
    }
    let mut tuple = vec![0u32; sizes.len()];
    loop {
        visit(&tuple);
        let Some(i) = (0..sizes.len()).rev().find(|&i| tuple[i] + 1 < sizes[i]) else {
            return;
        };
        tuple[i] += 1;
        for v in &mut tuple[i + 1..] {
            *v = 0;
        }
    }
}

/// Pending t-way combinations that involve the parameter being added.
/// Each block covers one set of earlier parameters plus the new one; within
/// a block, combinations are indexed mixed-radix with the new parameter as
/// the least significant digit.
struct Pending {
    blocks: Vec<Block>,
    pending: Vec<bool>,
}

struct Block {
    /// Earlier parameters (declared indices), then the new parameter.
    params: Vec<usize>,
    sizes: Vec<u32>,
    offset: usize,
}

impl Block {
    /// Index of the combination `row` takes on this block's earlier
    /// parameters with `value` for the new one; `None` if `row` has a dash
    /// on one of them.
    fn base(&self, row: &Assignment) -> Option<usize> {
        let k = self.params.len() - 1;
        let mut idx = 0usize;
        for j in 0..k {
            idx = idx * self.sizes[j] as usize + row.get(self.params[j])? as usize;
        }
        Some(self.offset + idx * self.sizes[k] as usize)
    }

    fn combination(&self, n: usize, mut local: usize) -> Assignment {
        let mut a = Assignment::unspecified(n);
        for j in (0..self.params.len()).rev() {
            let s = self.sizes[j] as usize;
            a.set(self.params[j], Some((local % s) as u32));
            local /= s;
        }
        a
    }

    fn len(&self) -> usize {
        self.sizes.iter().map(|&s| s as usize).product()
    }
}

impl Pending {
    fn build(
        model: &SutModel,
        order: &[usize],
        position: usize,
        t: usize,
        checker: &mut Checker<'_>,
    ) -> Result<Self, GenerateError> {
        let new_param = order[position];
        let mut blocks = Vec::new();
        let mut offset = 0;
        for_each_subset(position, t - 1, |subset| {
            let mut params: Vec<usize> = subset.iter().map(|&i| order[i]).collect();
            params.push(new_param);
            let sizes: Vec<u32> = params.iter().map(|&p| model.domain_size(p)).collect();
            let block = Block { params, sizes, offset };
            offset += block.len();
            blocks.push(block);
        });
        let mut pending = vec![false; offset];
        let n = model.param_count();
        for block in &blocks {
            for local in 0..block.len() {
                let combo = block.combination(n, local);
                pending[block.offset + local] = checker.is_valid(&combo)?;
            }
            checker.check_deadline()?;
        }
        Ok(Pending { blocks, pending })
    }

    /// How many pending combinations `row` would cover for each value of
    /// the new parameter.
    fn gains(&self, row: &Assignment, domain: u32) -> Vec<usize> {
        let mut gains = vec![0; domain as usize];
        for block in &self.blocks {
            if let Some(base) = block.base(row) {
                for (v, g) in gains.iter_mut().enumerate() {
                    *g += self.pending[base + v] as usize;
                }
            }
        }
        gains
    }

    fn mark_covered(&mut self, row: &Assignment, value: u32) {
        for block in &self.blocks {
            if let Some(base) = block.base(row) {
                self.pending[base + value as usize] = false;
            }
        }
    }
}

/// Generates a t-wise suite for `model`. Rows are in declared parameter
/// order and may keep dashes unless `options.fill_dashes` is set.
pub fn generate(
    model: &SutModel,
    t: usize,
    handler: &mut dyn ValidityHandler,
    options: &GenerateOptions,
) -> Result<TestSuite, GenerateError> {
    let n = model.param_count();
    if t == 0 || t > n {
        return Err(GenerateError::StrengthOutOfRange { strength: t, params: n });
    }
    let mut suite = TestSuite {
        rows: Vec::new(),
        strength: t,
        diagnostics: Vec::new(),
    };
    let satisfiable = handler.is_valid(&Assignment::unspecified(n))?;
    if !satisfiable {
        suite
            .diagnostics
            .push("the constraints admit no valid test case; the suite is empty".into());
        return Ok(suite);
    }
    let mut checker = Checker {
        handler,
        satisfiable,
        deadline: options.deadline,
        calls: 0,
    };
    let order = processing_order(model);

    // Seed: every valid value combination of the first t parameters.
    let seed_sizes: Vec<u32> = order[..t].iter().map(|&p| model.domain_size(p)).collect();
    let mut seeds = Vec::new();
    for_each_tuple(&seed_sizes, |values| {
        let mut a = Assignment::unspecified(n);
        for (&p, &v) in order[..t].iter().zip(values) {
            a.set(p, Some(v));
        }
        seeds.push(a);
    });
    for a in seeds {
        if checker.is_valid(&a)? {
            suite.rows.push(a);
        }
    }

    for position in t..n {
        let param = order[position];
        let domain = model.domain_size(param);
        let mut pending = Pending::build(model, &order, position, t, &mut checker)?;

        // Horizontal growth.
        for row in suite.rows.iter_mut() {
            checker.check_deadline()?;
            let gains = pending.gains(row, domain);
            let mut candidates: Vec<u32> = (0..domain).collect();
            candidates.sort_by_key(|&v| (std::cmp::Reverse(gains[v as usize]), v));
            for v in candidates {
                row.set(param, Some(v));
                if checker.is_valid(row)? {
                    pending.mark_covered(row, v);
                    break;
                }
                row.set(param, None);
            }
        }

        // Vertical growth.
        for block in &pending.blocks {
            checker.check_deadline()?;
            for local in 0..block.len() {
                if !pending.pending[block.offset + local] {
                    continue;
                }
                let combo = block.combination(n, local);
                if suite.rows.iter().any(|r| r.covers(&combo)) {
                    continue;
                }
                let mut placed = false;
                for row in suite.rows.iter_mut() {
                    let compatible = combo.fixed().all(|(p, v)| row.get(p).is_none_or(|w| w == v));
                    if !compatible {
                        continue;
                    }
                    let mut merged = row.clone();
                    for (p, v) in combo.fixed() {
                        merged.set(p, Some(v));
                    }
                    if checker.is_valid(&merged)? {
                        *row = merged;
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    suite.rows.push(combo);
                }
            }
        }
    }

    if options.fill_dashes {
        for row in suite.rows.iter_mut() {
            checker.check_deadline()?;
            for p in 0..n {
                if row.get(p).is_some() {
                    continue;
                }
                for v in 0..model.domain_size(p) {
                    row.set(p, Some(v));
                    if checker.is_valid(row)? {
                        break;
                    }
                    row.set(p, None);
                }
                debug_assert!(row.get(p).is_some(), "a valid row always has a valid completion");
            }
        }
    }
    Ok(suite)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerifyReport {
    /// Indices of rows that cannot be extended to a valid test case.
    pub invalid_rows: Vec<usize>,
    /// Valid t-way combinations no row covers.
    pub uncovered: Vec<Assignment>,
    pub suite_size: usize,
}

impl VerifyReport {
    pub fn accepted(&self) -> bool {
        self.invalid_rows.is_empty() && self.uncovered.is_empty()
    }
}

/// Checks every row for validity and every valid t-way combination of the
/// declared parameters for coverage.
pub fn verify(
    model: &SutModel,
    rows: &[Assignment],
    t: usize,
    handler: &mut dyn ValidityHandler,
) -> Result<VerifyReport, GenerateError> {
    let n = model.param_count();
    if t == 0 || t > n {
        return Err(GenerateError::StrengthOutOfRange { strength: t, params: n });
    }
    let mut report = VerifyReport {
        suite_size: rows.len(),
        ..Default::default()
    };
    let satisfiable = handler.is_valid(&Assignment::unspecified(n))?;
    let mut checker = Checker {
        handler,
        satisfiable,
        deadline: None,
        calls: 0,
    };
    for (i, row) in rows.iter().enumerate() {
        model.check_assignment(row).map_err(EncodeError::from)?;
        if !checker.is_valid(row)? {
            report.invalid_rows.push(i);
        }
    }
    let mut result = Ok(());
    for_each_subset(n, t, |params| {
        if result.is_err() {
            return;
        }
        let covered: FxHashSet<Vec<u32>> = rows
            .iter()
            .filter_map(|r| params.iter().map(|&p| r.get(p)).collect::<Option<Vec<u32>>>())
            .collect();
        let sizes: Vec<u32> = params.iter().map(|&p| model.domain_size(p)).collect();
        for_each_tuple(&sizes, |values| {
            if result.is_err() || covered.contains(values) {
                return;
            }
            let mut combo = Assignment::unspecified(n);
            for (&p, &v) in params.iter().zip(values) {
                combo.set(p, Some(v));
            }
            match checker.is_valid(&combo) {
                Ok(true) => report.uncovered.push(combo),
                Ok(false) => {}
                Err(e) => result = Err(e),
            }
        });
    });
    result?;
    Ok(report)
}
