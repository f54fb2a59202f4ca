//! Pure definite clauses: AST, parser, canonical renderer and size metric.
//!
//! The accepted syntax is the core of Prolog's clause notation:
//!
//! ```text
//! % line comment
//! p(X1, X1).
//! p(c, X1) :- p(X1, c).
//! ```
//!
//! Variables start with an uppercase letter or `_`; predicates, functors and
//! constants start with a lowercase letter. Every predicate takes at least one
//! argument. Each bare `_` is a fresh variable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
    Compound { functor: String, args: Vec<Term> },
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Term {
        Term::Const(name.into())
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            Term::Const(_) => {}
            Term::Compound { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => f.write_str(v),
            Term::Compound { functor, args } => {
                write!(f, "{functor}(")?;
                write_args(f, args)?;
                f.write_str(")")
            }
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

/// The variables occurring in `t`.
pub fn vars_of(t: &Term) -> BTreeSet<&str> {
    let mut out = Vec::new();
    t.collect_vars(&mut out);
    out.into_iter().collect()
}

/// A predicate name together with its arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    pub name: String,
    pub arity: usize,
}

impl Signature {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Signature {
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn signature(&self) -> Signature {
        Signature::new(self.predicate.clone(), self.args.len())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        write_args(f, &self.args)?;
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn fact(head: Atom) -> Self {
        Clause { head, body: vec![] }
    }

    pub fn rule(head: Atom, body: Vec<Atom>) -> Self {
        Clause { head, body }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    /// Distinct variables in order of first occurrence, head first.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for atom in std::iter::once(&self.head).chain(&self.body) {
            atom.args.iter().for_each(|t| t.collect_vars(&mut out));
        }
        out
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        for (i, b) in self.body.iter().enumerate() {
            f.write_str(if i == 0 { " :- " } else { ", " })?;
            write!(f, "{b}")?;
        }
        f.write_str(".")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("predicate {name} used with arity {first} and {second}")]
    ArityMismatch {
        name: String,
        first: usize,
        second: usize,
    },
    #[error("predicate {0} has no arguments; every predicate needs at least one")]
    ZeroArity(String),
    #[error("compound term {0} has no arguments")]
    EmptyCompound(String),
}

/// An ordered list of clauses in which every predicate has one arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Program {
    clauses: Vec<Clause>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Result<Self, ProgramError> {
        let mut arities: BTreeMap<&str, usize> = BTreeMap::new();
        for atom in clauses.iter().flat_map(|c| std::iter::once(&c.head).chain(&c.body)) {
            if atom.args.is_empty() {
                return Err(ProgramError::ZeroArity(atom.predicate.clone()));
            }
            atom.args.iter().try_for_each(check_term)?;
            match arities.get(atom.predicate.as_str()) {
                Some(&a) if a != atom.args.len() => {
                    return Err(ProgramError::ArityMismatch {
                        name: atom.predicate.clone(),
                        first: a,
                        second: atom.args.len(),
                    })
                }
                Some(_) => {}
                None => {
                    arities.insert(&atom.predicate, atom.args.len());
                }
            }
        }
        Ok(Program { clauses })
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn into_clauses(self) -> Vec<Clause> {
        self.clauses
    }

    /// Every predicate mentioned anywhere in the program.
    pub fn predicates(&self) -> BTreeSet<Signature> {
        self.clauses
            .iter()
            .flat_map(|c| std::iter::once(&c.head).chain(&c.body))
            .map(Atom::signature)
            .collect()
    }

    pub fn max_arity(&self) -> usize {
        self.predicates().iter().map(|s| s.arity).max().unwrap_or(0)
    }

    /// Clauses of `self` followed by those of `other`.
    pub fn concat(&self, other: &Program) -> Result<Program, ProgramError> {
        let mut clauses = self.clauses.clone();
        clauses.extend(other.clauses.iter().cloned());
        Program::new(clauses)
    }
}

fn check_term(t: &Term) -> Result<(), ProgramError> {
    match t {
        Term::Compound { functor, args } => {
            if args.is_empty() {
                return Err(ProgramError::EmptyCompound(functor.clone()));
            }
            args.iter().try_for_each(check_term)
        }
        _ => Ok(()),
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Canonical text of `p`, one clause per line.
pub fn render(p: &Program) -> String {
    p.to_string()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SizeMetric {
    /// Argument positions summed over all atoms, heads and bodies.
    pub arg_positions: usize,
    /// Argument positions of clause heads only.
    pub head_arg_positions: usize,
    pub clause_count: usize,
    pub atom_count: usize,
}

pub fn size_metric(p: &Program) -> SizeMetric {
    let mut m = SizeMetric {
        arg_positions: 0,
        head_arg_positions: 0,
        clause_count: p.clauses.len(),
        atom_count: 0,
    };
    for c in &p.clauses {
        m.head_arg_positions += c.head.args.len();
        for a in std::iter::once(&c.head).chain(&c.body) {
            m.arg_positions += a.args.len();
            m.atom_count += 1;
        }
    }
    m
}

pub fn parse(text: &str) -> Result<Program, ProgramError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: end_position(text),
    };
    let mut clauses = Vec::new();
    while parser.peek().is_some() {
        clauses.push(parser.clause()?);
    }
    Program::new(clauses)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    Var(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Neck,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Name(s) | Tok::Var(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Neck => f.write_str("`:-`"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

fn err(pos: Pos, message: impl Into<String>) -> SyntaxError {
    SyntaxError {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn end_position(text: &str) -> Pos {
    let line = text.lines().count().max(1);
    let column = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
    Pos { line, column }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let here = Pos { line, column };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        match c {
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            '%' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            }
            '(' | ')' | ',' | '.' => {
                bump(&mut chars);
                out.push((
                    match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        ',' => Tok::Comma,
                        _ => Tok::Dot,
                    },
                    here,
                ));
            }
            ':' => {
                bump(&mut chars);
                if bump(&mut chars) != Some('-') {
                    return Err(err(here, "expected `:-`"));
                }
                out.push((Tok::Neck, here));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                let tok = if c.is_ascii_uppercase() || c == '_' {
                    Tok::Var(ident)
                } else {
                    Tok::Name(ident)
                };
                out.push((tok, here));
            }
            other => return Err(err(here, format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Tok, Pos)>,
    pos: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> Pos {
        self.tokens.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn next(&mut self, expected: &str) -> Result<(Tok, Pos), SyntaxError> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(err(self.end, format!("unexpected end of input, expected {expected}"))),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        let (t, p) = self.next(&tok.to_string())?;
        if t == tok {
            Ok(())
        } else {
            Err(err(p, format!("expected {tok}, found {t}")))
        }
    }

    fn clause(&mut self) -> Result<Clause, SyntaxError> {
        let head = self.atom()?;
        let mut body = Vec::new();
        let (t, p) = self.next("`.` or `:-`")?;
        match t {
            Tok::Dot => {}
            Tok::Neck => loop {
                body.push(self.atom()?);
                let (t, p) = self.next("`,` or `.`")?;
                match t {
                    Tok::Comma => continue,
                    Tok::Dot => break,
                    t => return Err(err(p, format!("expected `,` or `.`, found {t}"))),
                }
            },
            t => return Err(err(p, format!("expected `.` or `:-`, found {t}"))),
        }
        let mut clause = Clause { head, body };
        rename_anonymous(&mut clause);
        Ok(clause)
    }

    fn atom(&mut self) -> Result<Atom, SyntaxError> {
        let (t, p) = self.next("a predicate name")?;
        let name = match t {
            Tok::Name(n) => n,
            t => return Err(err(p, format!("expected a predicate name, found {t}"))),
        };
        if self.peek() != Some(&Tok::LParen) {
            return Err(err(
                self.here(),
                format!("predicate `{name}` needs a parenthesised argument list"),
            ));
        }
        let args = self.args()?;
        Ok(Atom::new(name, args))
    }

    fn args(&mut self) -> Result<Vec<Term>, SyntaxError> {
        self.expect(Tok::LParen)?;
        if self.peek() == Some(&Tok::RParen) {
            return Err(err(self.here(), "empty argument list"));
        }
        let mut args = vec![self.term()?];
        loop {
            let (t, p) = self.next("`,` or `)`")?;
            match t {
                Tok::Comma => args.push(self.term()?),
                Tok::RParen => return Ok(args),
                t => return Err(err(p, format!("expected `,` or `)`, found {t}"))),
            }
        }
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let (t, p) = self.next("a term")?;
        match t {
            Tok::Var(v) => Ok(Term::Var(v)),
            Tok::Name(n) if self.peek() == Some(&Tok::LParen) => Ok(Term::Compound {
                functor: n,
                args: self.args()?,
            }),
            Tok::Name(n) => Ok(Term::Const(n)),
            t => Err(err(p, format!("expected a term, found {t}"))),
        }
    }
}

/// Gives each bare `_` in the clause its own name.
fn rename_anonymous(clause: &mut Clause) {
    let taken: BTreeSet<String> = clause.variables().into_iter().map(String::from).collect();
    let mut counter = 0usize;
    let mut fresh = || loop {
        counter += 1;
        let name = format!("_{counter}");
        if !taken.contains(&name) {
            return name;
        }
    };
    fn walk(t: &mut Term, fresh: &mut dyn FnMut() -> String) {
        match t {
            Term::Var(v) if v == "_" => *v = fresh(),
            Term::Compound { args, .. } => args.iter_mut().for_each(|a| walk(a, fresh)),
            _ => {}
        }
    }
    let atoms = std::iter::once(&mut clause.head).chain(clause.body.iter_mut());
    for atom in atoms {
        atom.args.iter_mut().for_each(|t| walk(t, &mut fresh));
    }
}
