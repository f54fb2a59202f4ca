//! Goal-independent bottom-up groundness analysis.
//!
//! Each predicate `q/k` is described by a `k`-ary positive Boolean function
//! whose models are the groundness patterns of its answers. One round of the
//! analysis applies the abstract immediate-consequence operator [`tp`] to the
//! previous interpretation; [`kleene`] iterates it from the all-bottom
//! interpretation until nothing changes.
//!
//! A clause `h(t_1..t_k) :- q_1(s..), …` abstracts to
//!
//! ```text
//! ∃V. ∧_j (π_j ↔ ∧vars(t_j)) ∧ ∧_i ∃β_i. (I(q_i)(β_i) ∧ ∧_j (β_ij ↔ ∧vars(s_ij)))
//! ```
//!
//! Because every `π_j` and `β_ij` is a conjunction of clause variables, the
//! evaluation never materialises them: each body atom becomes a relation
//! over its own variables, the relations are joined on shared variables
//! (projecting away whatever later atoms and the head no longer need), and
//! the head is read off each surviving assignment.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::boolfun::{intersection_close, AbsFun, BoolFunError, Domain, ModelSet};
use crate::program::{Atom, Clause, Program, Signature, Term};

/// Upper bound on the variables a single clause may mention.
pub const MAX_CLAUSE_VARS: usize = 63;
/// Upper bound on the unconstrained variables enumerated for one clause.
pub const MAX_FREE_VARS: usize = 24;

#[derive(Debug, Error)]
pub enum AnalyzerError {
    #[error(transparent)]
    BoolFun(#[from] BoolFunError),
    #[error("no entry for predicate {0}")]
    MissingPredicate(Signature),
    #[error("entry for {predicate} has width {found}, expected {expected}")]
    ArityMismatch {
        predicate: Signature,
        expected: usize,
        found: usize,
    },
    #[error("clause mentions {found} variables, more than the supported {max}")]
    ClauseTooWide { found: usize, max: usize },
    #[error("interpretation is tagged {found}, expected {expected}")]
    DomainMismatch { expected: Domain, found: Domain },
    #[error("no fixpoint within {max_rounds} rounds")]
    MaxRoundsExceeded {
        max_rounds: usize,
        partial: Box<IterationTrace>,
    },
}

/// A value for every predicate of a program, all in one domain.
#[derive(Clone, PartialEq, Eq)]
pub struct Interpretation {
    domain: Domain,
    entries: BTreeMap<Signature, AbsFun>,
}

impl Interpretation {
    /// Every predicate of `program` mapped to bottom.
    pub fn bottom(program: &Program, domain: Domain) -> Result<Self, AnalyzerError> {
        let entries = program
            .predicates()
            .into_iter()
            .map(|sig| {
                let v = AbsFun::bottom(sig.arity, domain)?;
                Ok((sig, v))
            })
            .collect::<Result<_, AnalyzerError>>()?;
        Ok(Interpretation { domain, entries })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn get(&self, sig: &Signature) -> Option<&AbsFun> {
        self.entries.get(sig)
    }

    /// Replaces the entry for `sig`, checking width and domain.
    pub fn insert(&mut self, sig: Signature, value: AbsFun) -> Result<(), AnalyzerError> {
        if value.width() != sig.arity {
            return Err(AnalyzerError::ArityMismatch {
                expected: sig.arity,
                found: value.width(),
                predicate: sig,
            });
        }
        if value.domain() != self.domain {
            return Err(AnalyzerError::DomainMismatch {
                expected: self.domain,
                found: value.domain(),
            });
        }
        self.entries.insert(sig, value);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Signature, &AbsFun)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Pointwise entailment; predicates missing from `other` fail it.
    pub fn entails(&self, other: &Interpretation) -> bool {
        self.entries.iter().all(|(sig, f)| {
            other
                .get(sig)
                .is_some_and(|g| f.entails(g).unwrap_or(false))
        })
    }
}

impl fmt::Debug for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (sig, v) in &self.entries {
            m.entry(&sig.to_string(), v);
        }
        m.finish()
    }
}

/// One strict change of a predicate's value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpdateEvent {
    /// Index `k` of the interpretation `I_k` holding `new`.
    pub round: usize,
    pub predicate: Signature,
    pub old: AbsFun,
    pub new: AbsFun,
}

impl UpdateEvent {
    /// Models of `new` absent from `old`.
    pub fn added(&self) -> ModelSet {
        let mut added = ModelSet::empty(self.new.width()).expect("width already validated");
        for v in self.new.models().values() {
            if !self.old.models().contains_value(v) {
                added.insert_value(v);
            }
        }
        added
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterationTrace {
    pub domain: Domain,
    /// `I_0, I_1, …`; only filled when requested.
    pub rounds: Vec<Interpretation>,
    pub updates: Vec<UpdateEvent>,
}

impl IterationTrace {
    /// The distinct values taken by `sig`, starting from bottom.
    pub fn value_sequence(&self, sig: &Signature) -> Vec<AbsFun> {
        let mut seq = Vec::new();
        for u in self.updates.iter().filter(|u| &u.predicate == sig) {
            if seq.is_empty() {
                seq.push(u.old.clone());
            }
            seq.push(u.new.clone());
        }
        if seq.is_empty() {
            if let Ok(bot) = AbsFun::bottom(sig.arity, self.domain) {
                seq.push(bot);
            }
        }
        seq
    }
}

#[derive(Clone, Debug)]
pub struct AnalysisResult {
    pub fixpoint: Interpretation,
    /// Least `k` with `I_k = I_{k+1}`.
    pub rounds_to_fixpoint: usize,
    pub strict_increases: BTreeMap<Signature, usize>,
    pub domain: Domain,
    pub wall_time: Duration,
    pub trace: IterationTrace,
}

impl AnalysisResult {
    pub fn increases(&self, sig: &Signature) -> usize {
        self.strict_increases.get(sig).copied().unwrap_or(0)
    }
}

#[derive(Clone, Debug, Default)]
pub struct KleeneOptions {
    /// Defaults to [`default_max_rounds`].
    pub max_rounds: Option<usize>,
    /// Keep every interpretation `I_k` in the trace.
    pub record_rounds: bool,
    /// Join clause results with this domain's join instead of the
    /// analysis domain's. Only meant for mutation testing the verifier.
    #[doc(hidden)]
    pub join_override: Option<Domain>,
}

/// `2^a + a + 8` for the largest arity `a` in `program`.
pub fn default_max_rounds(program: &Program) -> usize {
    let a = program.max_arity();
    1usize
        .checked_shl(a as u32)
        .unwrap_or(usize::MAX / 2)
        .saturating_add(a + 8)
}

/// Assignment relation over clause variables; bit `i` is variable `i`.
struct Relation {
    vars: u64,
    rows: HashSet<u64>,
}

impl Relation {
    fn unit() -> Self {
        Relation {
            vars: 0,
            rows: HashSet::from([0]),
        }
    }

    fn join(&self, other: &Relation) -> Relation {
        let shared = self.vars & other.vars;
        let mut index: HashMap<u64, Vec<u64>> = HashMap::new();
        for &r in &other.rows {
            index.entry(r & shared).or_default().push(r);
        }
        let mut rows = HashSet::new();
        for &l in &self.rows {
            if let Some(matches) = index.get(&(l & shared)) {
                rows.extend(matches.iter().map(|&r| l | r));
            }
        }
        Relation {
            vars: self.vars | other.vars,
            rows,
        }
    }

    fn project(self, keep: u64) -> Relation {
        if self.vars & !keep == 0 {
            return self;
        }
        Relation {
            vars: self.vars & keep,
            rows: self.rows.into_iter().map(|r| r & keep).collect(),
        }
    }
}

/// Iterates over every subset of the bits in `mask`.
fn subsets(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == mask {
            None
        } else {
            Some((cur.wrapping_sub(mask)) & mask)
        };
        Some(cur)
    })
}

struct ClauseVars<'a> {
    index: HashMap<&'a str, usize>,
}

impl<'a> ClauseVars<'a> {
    fn new(clause: &'a Clause) -> Result<Self, AnalyzerError> {
        let vars = clause.variables();
        if vars.len() > MAX_CLAUSE_VARS {
            return Err(AnalyzerError::ClauseTooWide {
                found: vars.len(),
                max: MAX_CLAUSE_VARS,
            });
        }
        Ok(ClauseVars {
            index: vars.into_iter().enumerate().map(|(i, v)| (v, i)).collect(),
        })
    }

    fn mask(&self, t: &Term) -> u64 {
        match t {
            Term::Var(v) => 1 << self.index[v.as_str()],
            Term::Const(_) => 0,
            Term::Compound { args, .. } => args.iter().fold(0, |m, a| m | self.mask(a)),
        }
    }

    fn atom_masks(&self, atom: &Atom) -> Vec<u64> {
        atom.args.iter().map(|t| self.mask(t)).collect()
    }
}

fn lookup<'i>(atom: &Atom, interp: &'i Interpretation) -> Result<&'i AbsFun, AnalyzerError> {
    let sig = atom.signature();
    let f = interp
        .get(&sig)
        .ok_or_else(|| AnalyzerError::MissingPredicate(sig.clone()))?;
    if f.width() != sig.arity {
        return Err(AnalyzerError::ArityMismatch {
            expected: sig.arity,
            found: f.width(),
            predicate: sig,
        });
    }
    Ok(f)
}

/// Assignments to the atom's variables under which the atom's argument
/// groundness pattern is a model of `f`.
fn atom_relation(masks: &[u64], f: &AbsFun) -> Relation {
    let width = masks.len();
    let vars = masks.iter().fold(0, |m, &x| m | x);
    let mut rows = HashSet::new();
    'models: for beta in f.models().values() {
        let bit = |j: usize| beta >> (width - 1 - j) & 1 == 1;
        let mut ones = 0u64;
        for (j, &m) in masks.iter().enumerate() {
            if bit(j) {
                ones |= m;
            }
        }
        // Arguments required to be non-ground need some variable set to 0.
        let mut zeros = 0u64;
        let mut pending = Vec::new();
        for (j, &m) in masks.iter().enumerate() {
            if bit(j) {
                continue;
            }
            let open = m & !ones;
            match open.count_ones() {
                0 => continue 'models,
                1 => zeros |= open,
                _ => pending.push(open),
            }
        }
        pending.retain(|&open| open & zeros == 0);
        let undecided = vars & !(ones | zeros);
        if pending.is_empty() && undecided == 0 {
            rows.insert(ones);
            continue;
        }
        for sub in subsets(undecided) {
            if pending.iter().all(|&open| open & !sub != 0) {
                rows.insert(ones | sub);
            }
        }
    }
    Relation { vars, rows }
}

/// The abstract value contributed by one clause, over the head's argument
/// positions. Bottom when any body atom is bottom.
pub fn abstract_clause(
    clause: &Clause,
    interp: &Interpretation,
    domain: Domain,
) -> Result<AbsFun, AnalyzerError> {
    let arity = clause.head.args.len();
    let vars = ClauseVars::new(clause)?;
    let head_masks = vars.atom_masks(&clause.head);
    let head_vars = head_masks.iter().fold(0, |m, &x| m | x);

    let body_masks: Vec<Vec<u64>> = clause.body.iter().map(|a| vars.atom_masks(a)).collect();
    // needed_after[i]: variables used by atoms after i or by the head.
    let mut needed_after = vec![head_vars; clause.body.len()];
    for i in (0..clause.body.len().saturating_sub(1)).rev() {
        let next = body_masks[i + 1].iter().fold(0, |m, &x| m | x);
        needed_after[i] = needed_after[i + 1] | next;
    }

    let mut rel = Relation::unit();
    for (i, atom) in clause.body.iter().enumerate() {
        let f = lookup(atom, interp)?;
        if f.is_bottom() {
            return Ok(AbsFun::bottom(arity, domain)?);
        }
        rel = rel.join(&atom_relation(&body_masks[i], f)).project(needed_after[i]);
        if rel.rows.is_empty() {
            return Ok(AbsFun::bottom(arity, domain)?);
        }
    }

    let free = head_vars & !rel.vars;
    if free.count_ones() as usize > MAX_FREE_VARS {
        return Err(AnalyzerError::ClauseTooWide {
            found: free.count_ones() as usize,
            max: MAX_FREE_VARS,
        });
    }
    let mut out = ModelSet::empty(arity)?;
    for &row in &rel.rows {
        for sub in subsets(free) {
            let a = row | sub;
            let value = head_masks
                .iter()
                .fold(0u64, |v, &m| (v << 1) | (a & m == m) as u64);
            out.insert_value(value);
        }
    }
    debug_assert!(crate::boolfun::is_positive(&out));
    Ok(AbsFun::from_parts(out, domain))
}

fn join_all(width: usize, values: Vec<AbsFun>, join_domain: Domain, tag: Domain) -> Result<AbsFun, AnalyzerError> {
    let mut union = ModelSet::empty(width)?;
    for v in &values {
        union = union.union(v.models())?;
    }
    let models = match join_domain {
        Domain::Pos => union,
        Domain::Def => intersection_close(&union),
    };
    Ok(AbsFun::from_parts(models, tag))
}

fn tp_with(
    program: &Program,
    interp: &Interpretation,
    domain: Domain,
    join_domain: Domain,
) -> Result<Interpretation, AnalyzerError> {
    let mut contributions: BTreeMap<Signature, Vec<AbsFun>> =
        interp.entries.keys().map(|s| (s.clone(), Vec::new())).collect();
    for clause in program.clauses() {
        let v = abstract_clause(clause, interp, domain)?;
        let sig = clause.head.signature();
        contributions
            .get_mut(&sig)
            .ok_or_else(|| AnalyzerError::MissingPredicate(sig.clone()))?
            .push(v);
    }
    let mut entries = BTreeMap::new();
    for (sig, values) in contributions {
        let v = join_all(sig.arity, values, join_domain, domain)?;
        entries.insert(sig, v);
    }
    Ok(Interpretation { domain, entries })
}

/// One application of the abstract immediate-consequence operator.
pub fn tp(program: &Program, interp: &Interpretation, domain: Domain) -> Result<Interpretation, AnalyzerError> {
    if interp.domain != domain {
        return Err(AnalyzerError::DomainMismatch {
            expected: domain,
            found: interp.domain,
        });
    }
    tp_with(program, interp, domain, domain)
}

/// Naive Kleene iteration from the all-bottom interpretation.
pub fn kleene(program: &Program, domain: Domain, opts: &KleeneOptions) -> Result<AnalysisResult, AnalyzerError> {
    let start = Instant::now();
    let max_rounds = opts.max_rounds.unwrap_or_else(|| default_max_rounds(program)).max(1);
    let join_domain = opts.join_override.unwrap_or(domain);

    let mut current = Interpretation::bottom(program, domain)?;
    let mut trace = IterationTrace {
        domain,
        rounds: Vec::new(),
        updates: Vec::new(),
    };
    if opts.record_rounds {
        trace.rounds.push(current.clone());
    }
    let mut strict_increases: BTreeMap<Signature, usize> =
        current.entries.keys().map(|s| (s.clone(), 0)).collect();

    let mut k = 0;
    loop {
        let next = tp_with(program, &current, domain, join_domain)?;
        if next == current {
            break;
        }
        k += 1;
        for (sig, new) in &next.entries {
            let old = &current.entries[sig];
            if old != new {
                *strict_increases.get_mut(sig).expect("same key set") += 1;
                trace.updates.push(UpdateEvent {
                    round: k,
                    predicate: sig.clone(),
                    old: old.clone(),
                    new: new.clone(),
                });
            }
        }
        if opts.record_rounds {
            trace.rounds.push(next.clone());
        }
        current = next;
        if k > max_rounds {
            return Err(AnalyzerError::MaxRoundsExceeded {
                max_rounds,
                partial: Box::new(trace),
            });
        }
    }

    Ok(AnalysisResult {
        fixpoint: current,
        rounds_to_fixpoint: k,
        strict_increases,
        domain,
        wall_time: start.elapsed(),
        trace,
    })
}

/// [`kleene`] with default options.
pub fn analyze(program: &Program, domain: Domain) -> Result<AnalysisResult, AnalyzerError> {
    kleene(program, domain, &KleeneOptions::default())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Groundness {
    /// 1-based argument positions ground in every answer.
    pub ground_args: Vec<usize>,
    /// The predicate has no answers at all.
    pub unreachable: bool,
}

pub fn groundness_summary(result: &AnalysisResult) -> BTreeMap<Signature, Groundness> {
    result
        .fixpoint
        .iter()
        .map(|(sig, f)| {
            let width = f.width();
            let all = (1u64 << width) - 1;
            let common = f.models().values().fold(all, |acc, v| acc & v);
            let ground_args = (1..=width)
                .filter(|&j| common & crate::boolfun::position_mask(width, j) != 0)
                .collect();
            (
                sig.clone(),
                Groundness {
                    ground_args,
                    unreachable: f.is_bottom(),
                },
            )
        })
        .collect()
}
