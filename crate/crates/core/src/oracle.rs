//! Brute-force reference implementations for differential testing.
//!
//! Nothing here uses the set algebra of [`crate::boolfun`]. Models are held
//! as `u32` masks with the *opposite* bit convention (bit `j - 1` is argument
//! position `j`) in ordered sets, clause abstraction enumerates truth
//! assignments over every joint position, and the closure is the naive
//! "AND every pair until nothing new appears" pass. Values only meet the main
//! implementation at the boundary, through [`Model::bits`].

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analyzer::{self, abstract_clause, AnalysisResult, AnalyzerError, Interpretation, KleeneOptions};
use crate::boolfun::{chain_f, AbsFun, BoolFunError, Domain, Model, ModelSet};
use crate::program::{vars_of, Atom, Clause, Program, Signature, Term};

/// Most clause variables the oracle will enumerate (2^24 assignments).
pub const ORACLE_VAR_CAP: usize = 24;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle scale exceeded: {found} enumerated variables (cap {cap})")]
    ScaleExceeded { found: usize, cap: usize },
    #[error("no entry for predicate {0}")]
    MissingPredicate(Signature),
    #[error(transparent)]
    BoolFun(#[from] BoolFunError),
    #[error(transparent)]
    Analyzer(#[from] AnalyzerError),
    #[error("oracle iteration did not converge within {0} rounds")]
    NoFixpoint(usize),
}

type RefSet = BTreeSet<u32>;

fn to_ref(set: &ModelSet) -> RefSet {
    set.iter()
        .map(|m| {
            m.bits()
                .iter()
                .enumerate()
                .fold(0u32, |acc, (j, &b)| acc | (b as u32) << j)
        })
        .collect()
}

fn ref_models(width: usize, set: &RefSet) -> Result<ModelSet, BoolFunError> {
    let models = set
        .iter()
        .map(|&mask| {
            let bits: Vec<bool> = (0..width).map(|j| mask >> j & 1 == 1).collect();
            Model::new(&bits)
        })
        .collect::<Result<Vec<_>, _>>()?;
    ModelSet::from_models(width, &models)
}

fn from_ref(width: usize, set: &RefSet, domain: Domain) -> Result<AbsFun, BoolFunError> {
    AbsFun::new(ref_models(width, set)?, domain)
}

fn naive_close(set: &mut RefSet) {
    loop {
        let members: Vec<u32> = set.iter().copied().collect();
        let mut grew = false;
        for &a in &members {
            for &b in &members {
                grew |= set.insert(a & b);
            }
        }
        if !grew {
            return;
        }
    }
}

/// Intersection closure by repeated full pairwise passes.
pub fn ref_closure(s: &ModelSet) -> ModelSet {
    let mut set = to_ref(s);
    naive_close(&mut set);
    ref_models(s.width(), &set).expect("width preserved")
}

enum Constraint {
    /// `target ↔ ∧ sources` over joint positions.
    Iff { target: usize, sources: Vec<usize> },
    /// The positions, read in order, form a model of the table.
    Table { positions: Vec<usize>, models: RefSet },
}

impl Constraint {
    fn positions(&self) -> Vec<usize> {
        match self {
            Constraint::Iff { target, sources } => {
                let mut p = sources.clone();
                p.push(*target);
                p
            }
            Constraint::Table { positions, .. } => positions.clone(),
        }
    }

    fn holds(&self, assignment: &[bool]) -> bool {
        match self {
            Constraint::Iff { target, sources } => {
                assignment[*target] == sources.iter().all(|&s| assignment[s])
            }
            Constraint::Table { positions, models } => {
                let mask = positions
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (j, &p)| acc | (assignment[p] as u32) << j);
                models.contains(&mask)
            }
        }
    }
}

/// Joint truth-table evaluation of one clause. `values` supplies each body
/// predicate's models in the oracle convention.
fn ref_clause_models(
    clause: &Clause,
    values: &dyn Fn(&Signature) -> Option<RefSet>,
) -> Result<RefSet, OracleError> {
    let names: Vec<&str> = clause.variables();
    if names.len() > ORACLE_VAR_CAP {
        return Err(OracleError::ScaleExceeded {
            found: names.len(),
            cap: ORACLE_VAR_CAP,
        });
    }
    // Joint layout: pi (head formals), one beta block per body atom, then V.
    let k = clause.head.args.len();
    let beta_total: usize = clause.body.iter().map(|a| a.args.len()).sum();
    let v_base = k + beta_total;
    let total = v_base + names.len();
    let var_pos = |t: &Term| -> Vec<usize> {
        vars_of(t)
            .into_iter()
            .map(|v| v_base + names.iter().position(|n| *n == v).expect("clause variable"))
            .collect()
    };

    let mut constraints = Vec::new();
    for (j, t) in clause.head.args.iter().enumerate() {
        constraints.push(Constraint::Iff {
            target: j,
            sources: var_pos(t),
        });
    }
    let mut base = k;
    for atom in &clause.body {
        let sig = atom.signature();
        let models = values(&sig).ok_or_else(|| OracleError::MissingPredicate(sig.clone()))?;
        let block: Vec<usize> = (base..base + atom.args.len()).collect();
        for (j, t) in atom.args.iter().enumerate() {
            constraints.push(Constraint::Iff {
                target: block[j],
                sources: var_pos(t),
            });
        }
        constraints.push(Constraint::Table {
            positions: block,
            models,
        });
        base += atom.args.len();
    }

    // Enumerate V first, then the beta blocks, then pi; a constraint is
    // checked as soon as the last of its positions is assigned.
    let order: Vec<usize> = (v_base..total).chain(k..v_base).chain(0..k).collect();
    let mut depth_of = vec![0; total];
    for (d, &p) in order.iter().enumerate() {
        depth_of[p] = d;
    }
    let mut checks: Vec<Vec<usize>> = vec![Vec::new(); total + 1];
    for (ci, c) in constraints.iter().enumerate() {
        let last = c.positions().iter().map(|&p| depth_of[p] + 1).max().unwrap_or(0);
        checks[last].push(ci);
    }

    let mut out = RefSet::new();
    let mut assignment = vec![false; total];
    search(0, &order, &checks, &constraints, &mut assignment, k, &mut out);
    Ok(out)
}

fn search(
    depth: usize,
    order: &[usize],
    checks: &[Vec<usize>],
    constraints: &[Constraint],
    assignment: &mut [bool],
    head_width: usize,
    out: &mut RefSet,
) {
    if !checks[depth].iter().all(|&c| constraints[c].holds(assignment)) {
        return;
    }
    if depth == order.len() {
        let mask = (0..head_width).fold(0u32, |acc, j| acc | (assignment[j] as u32) << j);
        out.insert(mask);
        return;
    }
    for value in [false, true] {
        assignment[order[depth]] = value;
        search(depth + 1, order, checks, constraints, assignment, head_width, out);
    }
}

/// Reference version of [`analyzer::abstract_clause`].
pub fn ref_abstract_clause(clause: &Clause, interp: &Interpretation, domain: Domain) -> Result<AbsFun, OracleError> {
    let lookup = |sig: &Signature| interp.get(sig).map(|f| to_ref(f.models()));
    let models = ref_clause_models(clause, &lookup)?;
    Ok(from_ref(clause.head.args.len(), &models, domain)?)
}

/// Result of the reference Kleene iteration.
#[derive(Clone, Debug)]
pub struct OracleRun {
    /// `I_0, …, I_k` where `I_k` is the fixpoint.
    pub rounds: Vec<BTreeMap<Signature, AbsFun>>,
    pub rounds_to_fixpoint: usize,
}

impl OracleRun {
    pub fn fixpoint(&self) -> &BTreeMap<Signature, AbsFun> {
        self.rounds.last().expect("at least I_0")
    }
}

/// Naive iteration of the reference operator from all-bottom.
pub fn ref_kleene(program: &Program, domain: Domain, max_rounds: usize) -> Result<OracleRun, OracleError> {
    let preds = program.predicates();
    let mut current: BTreeMap<Signature, RefSet> =
        preds.iter().map(|s| (s.clone(), RefSet::new())).collect();
    let snapshot = |state: &BTreeMap<Signature, RefSet>| -> Result<BTreeMap<Signature, AbsFun>, OracleError> {
        state
            .iter()
            .map(|(s, set)| Ok((s.clone(), from_ref(s.arity, set, domain)?)))
            .collect()
    };
    let mut rounds = vec![snapshot(&current)?];
    for k in 0..=max_rounds {
        let mut next: BTreeMap<Signature, RefSet> =
            preds.iter().map(|s| (s.clone(), RefSet::new())).collect();
        let lookup = |sig: &Signature| current.get(sig).cloned();
        for clause in program.clauses() {
            let models = ref_clause_models(clause, &lookup)?;
            next.get_mut(&clause.head.signature())
                .expect("head predicate listed")
                .extend(models);
        }
        if domain == Domain::Def {
            next.values_mut().for_each(naive_close);
        }
        if next == current {
            return Ok(OracleRun {
                rounds,
                rounds_to_fixpoint: k,
            });
        }
        current = next;
        rounds.push(snapshot(&current)?);
    }
    Err(OracleError::NoFixpoint(max_rounds))
}

/// The Def chain `(f_0, f_1, …, top)` the analysis of `def_chain(n)` walks.
pub fn expected_trace_def_chain(n: usize) -> Result<Vec<AbsFun>, OracleError> {
    if n > 8 {
        return Err(OracleError::ScaleExceeded { found: n, cap: 8 });
    }
    (0..1u64 << n).map(|i| Ok(chain_f(n, i)?)).collect()
}

/// Where the main analyzer and the oracle first disagree.
#[derive(Clone, Debug)]
pub struct Mismatch {
    pub round: usize,
    pub predicate: Signature,
    pub main: Option<AbsFun>,
    pub oracle: Option<AbsFun>,
    /// Set when the disagreement is in a single clause's value.
    pub clause: Option<Clause>,
}

/// Runs both analyses and compares them round by round.
pub fn compare_runs(
    program: &Program,
    domain: Domain,
    opts: &KleeneOptions,
) -> Result<Option<Mismatch>, OracleError> {
    let opts = KleeneOptions {
        record_rounds: true,
        ..opts.clone()
    };
    let main = analyzer::kleene(program, domain, &opts)?;
    let max_rounds = opts
        .max_rounds
        .unwrap_or_else(|| analyzer::default_max_rounds(program));
    let reference = ref_kleene(program, domain, max_rounds)?;
    Ok(first_difference(&main, &reference))
}

fn first_difference(main: &AnalysisResult, reference: &OracleRun) -> Option<Mismatch> {
    let len = main.trace.rounds.len().max(reference.rounds.len());
    for round in 0..len {
        let m = main.trace.rounds.get(round).or(main.trace.rounds.last())?;
        let r = reference.rounds.get(round).or(reference.rounds.last())?;
        for (sig, rv) in r {
            let mv = m.get(sig);
            if mv != Some(rv) {
                return Some(Mismatch {
                    round,
                    predicate: sig.clone(),
                    main: mv.cloned(),
                    oracle: Some(rv.clone()),
                    clause: None,
                });
            }
        }
    }
    None
}

/// Compares every clause's value under every interpretation the main
/// analysis passes through.
pub fn compare_clauses_along_trace(program: &Program, domain: Domain) -> Result<Option<Mismatch>, OracleError> {
    let opts = KleeneOptions {
        record_rounds: true,
        ..Default::default()
    };
    let main = analyzer::kleene(program, domain, &opts)?;
    for (round, interp) in main.trace.rounds.iter().enumerate() {
        for clause in program.clauses() {
            let a = abstract_clause(clause, interp, domain)?;
            let b = ref_abstract_clause(clause, interp, domain)?;
            if a != b {
                return Ok(Some(Mismatch {
                    round,
                    predicate: clause.head.signature(),
                    main: Some(a),
                    oracle: Some(b),
                    clause: Some(clause.clone()),
                }));
            }
        }
    }
    Ok(None)
}

/// Shape limits for [`random_program`].
#[derive(Clone, Copy, Debug)]
pub struct RandomProgramConfig {
    pub max_predicates: usize,
    pub max_arity: usize,
    pub max_clauses: usize,
    pub max_body_atoms: usize,
}

impl Default for RandomProgramConfig {
    fn default() -> Self {
        RandomProgramConfig {
            max_predicates: 3,
            max_arity: 3,
            max_clauses: 4,
            max_body_atoms: 2,
        }
    }
}

const VAR_POOL: [&str; 4] = ["X", "Y", "Z", "W"];

fn random_term<R: Rng>(rng: &mut R, depth: usize) -> Term {
    let roll: f64 = rng.gen();
    if roll < 0.6 || depth == 0 && roll < 0.8 {
        Term::var(*VAR_POOL.choose(rng).expect("non-empty pool"))
    } else if roll < 0.8 || depth == 0 {
        Term::constant(if rng.gen() { "a" } else { "b" })
    } else {
        let arity = rng.gen_range(1..=2);
        Term::Compound {
            functor: if arity == 1 { "g".into() } else { "f".into() },
            args: (0..arity).map(|_| random_term(rng, depth - 1)).collect(),
        }
    }
}

pub fn random_program<R: Rng>(rng: &mut R, cfg: &RandomProgramConfig) -> Program {
    let names = ["p", "q", "r", "t", "u"];
    let count = rng.gen_range(1..=cfg.max_predicates.clamp(1, names.len()));
    let preds: Vec<(&str, usize)> = names[..count]
        .iter()
        .map(|&n| (n, rng.gen_range(1..=cfg.max_arity.max(1))))
        .collect();
    let atom = |rng: &mut R| {
        let &(name, arity) = preds.choose(rng).expect("at least one predicate");
        Atom::new(name, (0..arity).map(|_| random_term(rng, 1)).collect())
    };
    let clauses = (0..rng.gen_range(1..=cfg.max_clauses.max(1)))
        .map(|_| {
            let head = atom(rng);
            let body = (0..rng.gen_range(0..=cfg.max_body_atoms)).map(|_| atom(rng)).collect();
            Clause::rule(head, body)
        })
        .collect();
    Program::new(clauses).expect("fixed arity per predicate")
}

/// `count` programs drawn from a ChaCha stream seeded with `seed`.
pub fn random_corpus(seed: u64, count: usize) -> Vec<Program> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = RandomProgramConfig::default();
    (0..count).map(|_| random_program(&mut rng, &cfg)).collect()
}
