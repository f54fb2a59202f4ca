//! The two worst-case program families.
//!
//! * `def_chain(n)`: one predicate `p/n` with `n + 1` clauses whose Def (and
//!   Pos) analysis counts through every `n`-bit number.
//! * `pos_linear(n)`: `p/n` driven by a successor relation `s/2n`; the
//!   program has `11n` argument positions and its Pos analysis still takes
//!   exponentially many rounds.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::program::{Atom, Clause, Program, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FamilyId {
    #[serde(rename = "def-chain")]
    DefChain,
    #[serde(rename = "pos-linear")]
    PosLinear,
}

impl FamilyId {
    pub fn min_n(self) -> usize {
        match self {
            FamilyId::DefChain => 1,
            FamilyId::PosLinear => 2,
        }
    }

    pub fn generate(self, n: usize) -> Result<Program, GeneratorError> {
        match self {
            FamilyId::DefChain => gen_def_chain(n),
            FamilyId::PosLinear => gen_pos_linear(n),
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyId::DefChain => "def-chain",
            FamilyId::PosLinear => "pos-linear",
        })
    }
}

impl FromStr for FamilyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.replace('_', "-").as_str() {
            "def-chain" => Ok(FamilyId::DefChain),
            "pos-linear" => Ok(FamilyId::PosLinear),
            other => Err(format!(
                "unknown family {other:?} (expected def-chain or pos-linear)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("n must be ≥ {min} for family {family} (got {n})")]
    TooSmall {
        family: FamilyId,
        n: usize,
        min: usize,
    },
}

fn check(family: FamilyId, n: usize) -> Result<(), GeneratorError> {
    if n < family.min_n() {
        return Err(GeneratorError::TooSmall {
            family,
            n,
            min: family.min_n(),
        });
    }
    Ok(())
}

fn var(name: String) -> Term {
    Term::Var(name)
}

fn c() -> Term {
    Term::constant("c")
}

fn numbered(prefix: &str, range: std::ops::RangeInclusive<usize>) -> Vec<Term> {
    range.map(|i| var(format!("{prefix}{i}"))).collect()
}

/// `n + 1` clauses for `p/n`. Clause `k` moves the constant `c` one place
/// left in the head and fills the positions to its right with one shared
/// variable; the last clause is the fact `p(X1, …, X1)`.
pub fn gen_def_chain(n: usize) -> Result<Program, GeneratorError> {
    check(FamilyId::DefChain, n)?;
    let mut clauses = Vec::with_capacity(n + 1);
    for k in 1..=n {
        let free = n - k;
        // Positions 1..=free carry X_{free+1}, …, X_2 (descending).
        let prefix: Vec<Term> = (0..free).map(|i| var(format!("X{}", free + 1 - i))).collect();
        let shared = || var("X1".into());

        let mut head = prefix.clone();
        head.push(c());
        head.extend((0..k - 1).map(|_| shared()));

        let mut body = prefix;
        body.push(shared());
        body.extend((0..k - 1).map(|_| c()));

        clauses.push(Clause::rule(Atom::new("p", head), vec![Atom::new("p", body)]));
    }
    clauses.push(Clause::fact(Atom::new(
        "p",
        (0..n).map(|_| var("X1".into())).collect(),
    )));
    Ok(Program::new(clauses).expect("generated program is well formed"))
}

/// Four clauses: `p/n` iterates through the successor relation `s/2n`.
pub fn gen_pos_linear(n: usize) -> Result<Program, GeneratorError> {
    check(FamilyId::PosLinear, n)?;
    let x1 = || var("X1".into());

    let p_fact = Clause::fact(Atom::new("p", (0..n).map(|_| x1()).collect()));

    let a = numbered("A", 1..=n);
    let b = numbered("B", 1..=n);
    let p_rule = Clause::rule(
        Atom::new("p", a.clone()),
        vec![
            Atom::new("p", b.clone()),
            Atom::new("s", a.iter().chain(&b).cloned().collect()),
        ],
    );

    let mut s_fact_args = vec![c()];
    s_fact_args.extend((1..n).map(|_| x1()));
    s_fact_args.push(x1());
    s_fact_args.extend((1..n).map(|_| c()));
    let s_fact = Clause::fact(Atom::new("s", s_fact_args));

    let w = || var("W".into());
    let mut s_head = vec![w()];
    s_head.extend(numbered("A", 1..=n - 1));
    s_head.push(w());
    s_head.extend(numbered("B", 1..=n - 1));
    let s_rule = Clause::rule(
        Atom::new("s", s_head),
        vec![Atom::new("s", a.into_iter().chain(b).collect())],
    );

    Ok(Program::new(vec![p_fact, p_rule, s_fact, s_rule]).expect("generated program is well formed"))
}
