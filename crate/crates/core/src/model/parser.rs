//! Model file parser.
//!
//! ```text
//! [PARAMETERS]
//! name: label1, label2, ...
//! [CONSTRAINTS]
//! expr            # one per line, implicitly conjoined
//! ```
//!
//! Expression precedence, tightest first: `!`, `&&`, `||`, `=>`. `=>` is
//! right-associative. Names and labels containing characters outside
//! `[A-Za-z0-9_.]` are written in double quotes.

use super::{CmpOp, ConstraintExpr, ModelError, Parameter, Relation, SutModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Parameters,
    Constraints,
}

pub fn parse_model(text: &str) -> Result<SutModel, ModelError> {
    let mut section = Section::None;
    let mut params: Vec<Parameter> = Vec::new();
    let mut constraint_lines: Vec<(usize, &str)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('[') && trimmed.ends_with(']') {
            section = match trimmed[1..trimmed.len() - 1].trim().to_ascii_uppercase().as_str() {
                "PARAMETERS" => Section::Parameters,
                "CONSTRAINTS" => Section::Constraints,
                other => {
                    return Err(syntax(line_no, 1, format!("unknown section `[{other}]`")));
                }
            };
            continue;
        }
        match section {
            Section::None => {
                return Err(syntax(
                    line_no,
                    column_of(raw, trimmed),
                    "expected `[PARAMETERS]` or `[CONSTRAINTS]` section header".into(),
                ))
            }
            Section::Parameters => params.push(parse_parameter(line_no, raw, trimmed)?),
            Section::Constraints => constraint_lines.push((line_no, line)),
        }
    }

    for (i, p) in params.iter().enumerate() {
        if params[..i].iter().any(|q| q.name() == p.name()) {
            return Err(ModelError::DuplicateParameter(p.name().to_string()));
        }
    }

    let mut constraints = Vec::with_capacity(constraint_lines.len());
    for (line_no, line) in constraint_lines {
        constraints.push(parse_constraint_line(&params, line_no, line)?);
    }
    SutModel::new(params, constraints)
}

/// Parses a single constraint expression against an already-built model's
/// parameters. Line numbers in errors are reported as 1.
pub fn parse_constraint(model: &SutModel, text: &str) -> Result<ConstraintExpr, ModelError> {
    parse_constraint_line(model.params(), 1, text)
}

fn syntax(line: usize, column: usize, message: String) -> ModelError {
    ModelError::Syntax {
        line,
        column,
        message,
    }
}

fn column_of(raw: &str, part: &str) -> usize {
    (part.as_ptr() as usize - raw.as_ptr() as usize) + 1
}

fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    if s.len() >= 2 && s.starts_with('"') && s.ends_with('"') {
        &s[1..s.len() - 1]
    } else {
        s
    }
}

fn parse_parameter(line_no: usize, raw: &str, trimmed: &str) -> Result<Parameter, ModelError> {
    let Some(colon) = trimmed.find(':') else {
        return Err(syntax(
            line_no,
            column_of(raw, trimmed),
            "expected `name: value, value, ...`".into(),
        ));
    };
    let name = unquote(&trimmed[..colon]);
    if name.is_empty() {
        return Err(syntax(line_no, column_of(raw, trimmed), "missing parameter name".into()));
    }
    let rest = trimmed[colon + 1..].trim();
    if rest.is_empty() {
        return Err(ModelError::EmptyDomain(name.to_string()));
    }
    let mut labels = Vec::new();
    for part in rest.split(',') {
        let label = unquote(part);
        if label.is_empty() {
            return Err(syntax(line_no, column_of(raw, part), "empty value label".into()));
        }
        labels.push(label.to_string());
    }
    Parameter::new(name, labels)
}

pub(super) fn is_bare_word(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_word_char)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.'
}

pub(super) fn quote_if_needed(s: &str) -> String {
    if is_bare_word(s) {
        s.to_string()
    } else {
        format!("\"{s}\"")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Not,
    And,
    Or,
    Implies,
    Cmp(CmpOp),
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    column: usize,
}

fn tokenize(line_no: usize, line: &str) -> Result<Vec<Token>, ModelError> {
    let bytes: Vec<(usize, char)> = line.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let col = |i: usize| bytes.get(i).map_or(line.len(), |b| b.0) + 1;
    let peek = |i: usize| bytes.get(i).map(|b| b.1);
    while i < bytes.len() {
        let c = bytes[i].1;
        let start = col(i);
        let (tok, len) = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '!' if peek(i + 1) == Some('=') => (Tok::Cmp(CmpOp::Ne), 2),
            '!' => (Tok::Not, 1),
            '&' if peek(i + 1) == Some('&') => (Tok::And, 2),
            '|' if peek(i + 1) == Some('|') => (Tok::Or, 2),
            '=' if peek(i + 1) == Some('>') => (Tok::Implies, 2),
            '=' if peek(i + 1) == Some('=') => (Tok::Cmp(CmpOp::Eq), 2),
            '=' => (Tok::Cmp(CmpOp::Eq), 1),
            '<' if peek(i + 1) == Some('=') => (Tok::Cmp(CmpOp::Le), 2),
            '<' => (Tok::Cmp(CmpOp::Lt), 1),
            '>' if peek(i + 1) == Some('=') => (Tok::Cmp(CmpOp::Ge), 2),
            '>' => (Tok::Cmp(CmpOp::Gt), 1),
            '"' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].1 != '"' {
                    j += 1;
                }
                if j == bytes.len() {
                    return Err(syntax(line_no, start, "unterminated quoted name".into()));
                }
                let word: String = bytes[i + 1..j].iter().map(|b| b.1).collect();
                (Tok::Word(word), j + 1 - i)
            }
            c if is_word_char(c) => {
                let mut j = i;
                while j < bytes.len() && is_word_char(bytes[j].1) {
                    j += 1;
                }
                let word: String = bytes[i..j].iter().map(|b| b.1).collect();
                (Tok::Word(word), j - i)
            }
            other => {
                return Err(syntax(line_no, start, format!("unexpected character `{other}`")));
            }
        };
        out.push(Token { tok, column: start });
        i += len;
    }
    out.push(Token {
        tok: Tok::End,
        column: line.len() + 1,
    });
    Ok(out)
}

struct ExprParser<'a> {
    params: &'a [Parameter],
    tokens: Vec<Token>,
    pos: usize,
    line: usize,
}

fn parse_constraint_line(
    params: &[Parameter],
    line_no: usize,
    line: &str,
) -> Result<ConstraintExpr, ModelError> {
    let tokens = tokenize(line_no, line)?;
    let mut p = ExprParser {
        params,
        tokens,
        pos: 0,
        line: line_no,
    };
    let expr = p.implies()?;
    if p.peek() != &Tok::End {
        return Err(p.error("expected end of constraint"));
    }
    Ok(expr)
}

impl ExprParser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn column(&self) -> usize {
        self.tokens[self.pos].column
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: &str) -> ModelError {
        let found = match self.peek() {
            Tok::End => "end of line".to_string(),
            Tok::Word(w) => format!("`{w}`"),
            t => format!("{t:?}"),
        };
        syntax(self.line, self.column(), format!("{msg}, found {found}"))
    }

    fn implies(&mut self) -> Result<ConstraintExpr, ModelError> {
        let lhs = self.or()?;
        if self.peek() == &Tok::Implies {
            self.advance();
            let rhs = self.implies()?;
            return Ok(ConstraintExpr::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<ConstraintExpr, ModelError> {
        let mut lhs = self.and()?;
        while self.peek() == &Tok::Or {
            self.advance();
            let rhs = self.and()?;
            lhs = ConstraintExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<ConstraintExpr, ModelError> {
        let mut lhs = self.unary()?;
        while self.peek() == &Tok::And {
            self.advance();
            let rhs = self.unary()?;
            lhs = ConstraintExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ConstraintExpr, ModelError> {
        match self.peek() {
            Tok::Not => {
                self.advance();
                Ok(ConstraintExpr::not(self.unary()?))
            }
            Tok::LParen => {
                self.advance();
                let e = self.implies()?;
                if self.peek() != &Tok::RParen {
                    return Err(self.error("expected `)`"));
                }
                self.advance();
                Ok(e)
            }
            Tok::Word(_) => self.relation(),
            _ => Err(self.error("expected a relation, `!` or `(`")),
        }
    }

    fn relation(&mut self) -> Result<ConstraintExpr, ModelError> {
        let Token {
            tok: Tok::Word(name),
            column,
        } = self.advance()
        else {
            unreachable!("relation() called on a non-word token");
        };
        let Some(param) = self.params.iter().position(|p| p.name() == name) else {
            return Err(ModelError::UnknownParameter {
                line: self.line,
                column,
                name,
            });
        };
        let op = match self.peek() {
            Tok::Cmp(op) => *op,
            _ => return Err(self.error("expected a comparison operator")),
        };
        self.advance();
        let rhs_col = self.column();
        let Tok::Word(rhs) = self.peek().clone() else {
            return Err(self.error("expected a value or parameter name"));
        };
        self.advance();

        // Resolution order: label of the left parameter, then another
        // parameter's name, then a 0-based value index.
        let p = &self.params[param];
        if let Some(value) = p.value_of(&rhs) {
            return Ok(ConstraintExpr::Rel(Relation::ParamConst { param, op, value }));
        }
        if let Some(right) = self.params.iter().position(|q| q.name() == rhs) {
            let equal = match op {
                CmpOp::Eq => true,
                CmpOp::Ne => false,
                _ => {
                    return Err(syntax(
                        self.line,
                        rhs_col,
                        format!("only `=` and `!=` may compare two parameters, found `{}`", op.symbol()),
                    ))
                }
            };
            return Ok(ConstraintExpr::Rel(Relation::ParamParam {
                left: param,
                right,
                equal,
            }));
        }
        if let Ok(value) = rhs.parse::<u32>() {
            if value < p.domain_size() {
                return Ok(ConstraintExpr::Rel(Relation::ParamConst { param, op, value }));
            }
        }
        Err(ModelError::UnknownValue {
            line: self.line,
            column: rhs_col,
            param: p.name().to_string(),
            value: rhs,
        })
    }
}
