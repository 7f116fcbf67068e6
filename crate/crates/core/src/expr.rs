//! A small arithmetic language for user-supplied right-hand sides.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus and is right-associative, so `-x^2`
//! is `-(x^2)` and `2^3^2` is `2^9`. Functions: `sin cos exp log abs sqrt`
//! (one argument) and `min max` (two). There is no implicit
//! multiplication and no unary plus.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    SyntaxError { offset: usize, message: String },
    #[error("unknown variable '{name}' at byte {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("unknown function '{name}' at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("no value bound for variable '{0}'")]
    MissingBinding(String),
    #[error("evaluation error: {0}")]
    EvalError(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sqrt,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    /// Index into the declared variable list.
    Var(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed expression over a declared, ordered set of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    vars: Vec<String>,
}

impl Expression {
    pub fn parse(text: &str, allowed_vars: &[&str]) -> Result<Self, ExprError> {
        let mut parser = Parser {
            src: text,
            pos: 0,
            vars: allowed_vars,
        };
        let root = parser.expr()?;
        parser.skip_ws();
        if parser.pos < text.len() {
            return Err(parser.syntax("unexpected trailing input"));
        }
        Ok(Expression {
            root,
            vars: allowed_vars.iter().map(|v| v.to_string()).collect(),
        })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    /// Evaluates with values given in the declared variable order.
    pub fn eval_positional(&self, values: &[f64]) -> Result<f64, ExprError> {
        if values.len() < self.vars.len() {
            return Err(ExprError::MissingBinding(self.vars[values.len()].clone()));
        }
        eval_node(&self.root, values)
    }

    /// Evaluates with named bindings; every referenced variable must be bound.
    pub fn eval(&self, bindings: &HashMap<&str, f64>) -> Result<f64, ExprError> {
        let mut used = vec![false; self.vars.len()];
        mark_vars(&self.root, &mut used);
        let mut values = vec![0.0; self.vars.len()];
        for (i, name) in self.vars.iter().enumerate() {
            match bindings.get(name.as_str()) {
                Some(&v) => values[i] = v,
                None if used[i] => return Err(ExprError::MissingBinding(name.clone())),
                None => {}
            }
        }
        eval_node(&self.root, &values)
    }
}

fn mark_vars(node: &Node, used: &mut [bool]) {
    match node {
        Node::Num(_) => {}
        Node::Var(i) => used[*i] = true,
        Node::Neg(inner) => mark_vars(inner, used),
        Node::Binary(_, a, b) => {
            mark_vars(a, used);
            mark_vars(b, used);
        }
        Node::Call(_, args) => args.iter().for_each(|a| mark_vars(a, used)),
    }
}

fn domain(message: impl Into<String>) -> ExprError {
    ExprError::EvalError(message.into())
}

fn eval_node(node: &Node, values: &[f64]) -> Result<f64, ExprError> {
    let v = match node {
        Node::Num(v) => *v,
        Node::Var(i) => values[*i],
        Node::Neg(inner) => -eval_node(inner, values)?,
        Node::Binary(op, a, b) => {
            let (a, b) = (eval_node(a, values)?, eval_node(b, values)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(domain("division by zero"));
                    }
                    a / b
                }
                BinOp::Pow => a.powf(b),
            }
        }
        Node::Call(func, args) => {
            let a = eval_node(&args[0], values)?;
            match func {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Log => {
                    if a <= 0.0 {
                        return Err(domain(format!("log of non-positive value {a}")));
                    }
                    a.ln()
                }
                Func::Abs => a.abs(),
                Func::Sqrt => {
                    if a < 0.0 {
                        return Err(domain(format!("sqrt of negative value {a}")));
                    }
                    a.sqrt()
                }
                Func::Min => a.min(eval_node(&args[1], values)?),
                Func::Max => a.max(eval_node(&args[1], values)?),
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(format!("non-finite result {v}")))
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    vars: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn syntax(&self, message: &str) -> ExprError {
        ExprError::SyntaxError {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some('+') => BinOp::Add,
                Some('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some('*') => BinOp::Mul,
                Some('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat('-') {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exponent = self.unary()?;
            Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.name(),
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.syntax("expected ')'"));
                }
                Ok(inner)
            }
            Some(_) => Err(self.syntax("expected a number, variable, function or '('")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let digits = |p: &mut usize| {
            let from = *p;
            while *p < bytes.len() && bytes[*p].is_ascii_digit() {
                *p += 1;
            }
            *p - from
        };
        let mut p = start;
        let mut count = digits(&mut p);
        if p < bytes.len() && bytes[p] == b'.' {
            p += 1;
            count += digits(&mut p);
        }
        if count == 0 {
            return Err(self.syntax("malformed number"));
        }
        if p < bytes.len() && (bytes[p] == b'e' || bytes[p] == b'E') {
            let mut q = p + 1;
            if q < bytes.len() && (bytes[q] == b'+' || bytes[q] == b'-') {
                q += 1;
            }
            if digits(&mut q) == 0 {
                self.pos = q;
                return Err(self.syntax("malformed exponent"));
            }
            p = q;
        }
        self.pos = p;
        self.src[start..p]
            .parse::<f64>()
            .map(Node::Num)
            .map_err(|_| ExprError::SyntaxError {
                offset: start,
                message: "malformed number".into(),
            })
    }

    fn name(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        let len = self.src[start..]
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(self.src.len() - start);
        self.pos += len;
        let ident = &self.src[start..self.pos];

        if self.peek() == Some('(') {
            let func = Func::lookup(ident).ok_or_else(|| ExprError::UnknownFunction {
                name: ident.to_string(),
                offset: start,
            })?;
            self.pos += 1;
            let mut args = vec![self.expr()?];
            while self.eat(',') {
                args.push(self.expr()?);
            }
            if !self.eat(')') {
                return Err(self.syntax("expected ',' or ')'"));
            }
            if args.len() != func.arity() {
                return Err(ExprError::SyntaxError {
                    offset: start,
                    message: format!("{} takes {} argument(s), got {}", func.name(), func.arity(), args.len()),
                });
            }
            return Ok(Node::Call(func, args));
        }

        self.vars
            .iter()
            .position(|v| *v == ident)
            .map(Node::Var)
            .ok_or_else(|| ExprError::UnknownVariable {
                name: ident.to_string(),
                offset: start,
            })
    }
}

struct Printer<'a> {
    node: &'a Node,
    vars: &'a [String],
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |node| Printer { node, vars: self.vars };
        match self.node {
            Node::Num(v) => write!(f, "{v:?}"),
            Node::Var(i) => f.write_str(&self.vars[*i]),
            Node::Neg(inner) => write!(f, "(-{})", sub(inner)),
            Node::Binary(op, a, b) => write!(f, "({} {} {})", sub(a), op.symbol(), sub(b)),
            Node::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", sub(arg))?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Fully parenthesized form; reparsing it yields the same tree.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer {
            node: &self.root,
            vars: &self.vars,
        }
        .fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FXY: &[&str] = &["n", "x", "y"];

    fn value(text: &str, x: f64, y: f64) -> Result<f64, ExprError> {
        Expression::parse(text, FXY)?.eval_positional(&[0.0, x, y])
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(value("0.5*x+1", 2.0, 0.0).unwrap(), 2.0);
        assert_eq!(value("2+3*4", 0.0, 0.0).unwrap(), 14.0);
        assert_eq!(value("2^3^2", 0.0, 0.0).unwrap(), 512.0);
        assert_eq!(value("-x^2", 3.0, 0.0).unwrap(), -9.0);
        assert_eq!(value("x^-1", 4.0, 0.0).unwrap(), 0.25);
        assert_eq!(value("8/4/2", 0.0, 0.0).unwrap(), 1.0);
        assert_eq!(value("1-2-3", 0.0, 0.0).unwrap(), -4.0);
        assert_eq!(value(" ( 1 + 2 ) * 3 ", 0.0, 0.0).unwrap(), 9.0);
        assert_eq!(value("1.5e1 + .5", 0.0, 0.0).unwrap(), 15.5);
        assert!((value("x - 0.1*x^2", 1.0, 0.0).unwrap() - 0.9).abs() < 1e-15);
        assert_eq!(value("min(x, y)", 3.0, -1.0).unwrap(), -1.0);
        assert_eq!(value("max(x, y)", 3.0, -1.0).unwrap(), 3.0);
        assert_eq!(value("abs(-x) + sqrt(4)", 2.0, 0.0).unwrap(), 4.0);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert!(matches!(
            Expression::parse("0.5*+x", FXY),
            Err(ExprError::SyntaxError { offset: 4, .. })
        ));
        assert!(matches!(
            Expression::parse("2x", FXY),
            Err(ExprError::SyntaxError { offset: 1, .. })
        ));
        assert!(matches!(
            Expression::parse("(1+2", FXY),
            Err(ExprError::SyntaxError { offset: 4, .. })
        ));
        assert!(matches!(
            Expression::parse("", FXY),
            Err(ExprError::SyntaxError { offset: 0, .. })
        ));
        assert!(matches!(
            Expression::parse("1e+", FXY),
            Err(ExprError::SyntaxError { .. })
        ));
        assert!(matches!(
            Expression::parse("min(1)", FXY),
            Err(ExprError::SyntaxError { offset: 0, .. })
        ));
    }

    #[test]
    fn unknown_names() {
        assert_eq!(
            Expression::parse("0.5*q+1", FXY),
            Err(ExprError::UnknownVariable {
                name: "q".into(),
                offset: 4
            })
        );
        assert!(matches!(
            Expression::parse("tan(x)", FXY),
            Err(ExprError::UnknownFunction { .. })
        ));
        assert!(matches!(
            Expression::parse("x", &["k", "z"]),
            Err(ExprError::UnknownVariable { .. })
        ));
    }

    #[test]
    fn evaluation_errors() {
        assert!(matches!(value("1/x", 0.0, 0.0), Err(ExprError::EvalError(_))));
        assert!(matches!(value("log(x)", 0.0, 0.0), Err(ExprError::EvalError(_))));
        assert!(matches!(value("log(x)", -1.0, 0.0), Err(ExprError::EvalError(_))));
        assert!(matches!(value("sqrt(x)", -1.0, 0.0), Err(ExprError::EvalError(_))));
        assert!(matches!(value("exp(x)", 1000.0, 0.0), Err(ExprError::EvalError(_))));
    }

    #[test]
    fn named_bindings() {
        let e = Expression::parse("x + y", FXY).unwrap();
        let mut b = HashMap::new();
        b.insert("x", 1.0);
        assert_eq!(e.eval(&b), Err(ExprError::MissingBinding("y".into())));
        b.insert("y", 2.0);
        // n is declared but unused, so it need not be bound
        assert_eq!(e.eval(&b).unwrap(), 3.0);
    }

    #[test]
    fn printing_is_fully_parenthesized() {
        let e = Expression::parse("-x^2 + min(n, 3) * 1e-7", FXY).unwrap();
        assert_eq!(e.to_string(), "((-(x ^ 2.0)) + (min(n, 3.0) * 1e-7))");
        assert_eq!(Expression::parse(&e.to_string(), FXY).unwrap(), e);
    }
}
