//! The suites behind `groundness verify`.

use crate::analyzer::{kleene, AnalysisResult, KleeneOptions};
use crate::boolfun::{down_set, intersection_close, is_intersection_closed, Domain, Model, ModelSet};
use crate::generators::{gen_def_chain, gen_pos_linear};
use crate::oracle::{compare_runs, expected_trace_def_chain, random_corpus, ref_closure, Mismatch};
use crate::program::{render, Program, Signature};

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Largest family member checked against the oracle.
    pub n_max: usize,
    pub seed: u64,
    pub random_programs: usize,
    /// Replaces the analysis join; used to check that the suites catch a
    /// broken analyzer.
    #[doc(hidden)]
    pub join_override: Option<Domain>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_max: 5,
            seed: 0,
            random_programs: 100,
            join_override: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub name: String,
    pub cases: usize,
    pub failure: Option<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

pub fn run_verify(cfg: &VerifyConfig) -> Vec<SuiteOutcome> {
    vec![
        closure_exhaustive(),
        down_sets_closed(),
        def_chain_traces(cfg),
        families_vs_oracle(cfg),
        random_vs_oracle(cfg),
    ]
}

fn closure_exhaustive() -> SuiteOutcome {
    let mut cases = 0;
    for width in 1..=3usize {
        let space = 1u64 << width;
        for bits in 0u64..1 << space {
            cases += 1;
            let s = ModelSet::from_values(width, (0..space).filter(|v| bits >> v & 1 == 1)).expect("small width");
            let (fast, slow) = (intersection_close(&s), ref_closure(&s));
            if fast != slow {
                return SuiteOutcome {
                    name: "closure vs reference (width <= 3)".into(),
                    cases,
                    failure: Some(format!("input {{{s}}}: closure {{{fast}}}, reference {{{slow}}}")),
                };
            }
        }
    }
    SuiteOutcome {
        name: "closure vs reference (width <= 3)".into(),
        cases,
        failure: None,
    }
}

fn down_sets_closed() -> SuiteOutcome {
    let name = "down-sets closed (width <= 4)".to_string();
    let mut cases = 0;
    for width in 1..=4usize {
        for v in 0..1u64 << width {
            cases += 1;
            let m = Model::from_value(width, v).expect("small width");
            let d = down_set(&m);
            if !is_intersection_closed(&d) || ref_closure(&d) != d {
                return SuiteOutcome {
                    name,
                    cases,
                    failure: Some(format!("down-set of {m} is not closed: {{{d}}}")),
                };
            }
        }
    }
    SuiteOutcome {
        name,
        cases,
        failure: None,
    }
}

fn options(cfg: &VerifyConfig) -> KleeneOptions {
    KleeneOptions {
        record_rounds: true,
        join_override: cfg.join_override,
        ..Default::default()
    }
}

/// Def values must be closed and Pos values positive in every round, and
/// the rounds must increase.
pub fn check_trace_invariants(result: &AnalysisResult) -> Result<(), String> {
    for (k, round) in result.trace.rounds.iter().enumerate() {
        for (sig, f) in round.iter() {
            if !f.is_positive() {
                return Err(format!("round {k}: {sig} = {{{}}} lacks the all-ones model", f.models()));
            }
            if result.domain == Domain::Def && !f.is_intersection_closed() {
                return Err(format!(
                    "round {k}: {sig} = {{{}}} is not closed under intersection",
                    f.models()
                ));
            }
        }
    }
    for (k, w) in result.trace.rounds.windows(2).enumerate() {
        if !w[0].entails(&w[1]) {
            return Err(format!("round {} does not entail round {}", k, k + 1));
        }
    }
    Ok(())
}

fn def_chain_traces(cfg: &VerifyConfig) -> SuiteOutcome {
    let name = "def-chain walks the chain".to_string();
    let mut cases = 0;
    for n in 1..=cfg.n_max.clamp(1, 8) {
        cases += 1;
        let p = gen_def_chain(n).expect("n >= 1");
        let fail = |msg: String| SuiteOutcome {
            name: name.clone(),
            cases,
            failure: Some(format!("n={n}: {msg}")),
        };
        let r = match kleene(&p, Domain::Def, &options(cfg)) {
            Ok(r) => r,
            Err(e) => return fail(e.to_string()),
        };
        let seq = r.trace.value_sequence(&Signature::new("p", n));
        let expected = expected_trace_def_chain(n).expect("n <= 8");
        if seq != expected {
            return fail(format!("value sequence {seq:?} differs from the chain {expected:?}"));
        }
    }
    SuiteOutcome {
        name,
        cases,
        failure: None,
    }
}

fn describe(program: &Program, domain: Domain, mismatch: &Mismatch) -> String {
    let show = |v: &Option<crate::boolfun::AbsFun>| {
        v.as_ref()
            .map_or("(missing)".to_string(), |f| format!("{{{}}}", f.models()))
    };
    let mut s = format!(
        "domain {domain}, round {}, predicate {}\n  analyzer: {}\n  oracle:   {}\n",
        mismatch.round,
        mismatch.predicate,
        show(&mismatch.main),
        show(&mismatch.oracle)
    );
    if let Some(c) = &mismatch.clause {
        s.push_str(&format!("  clause: {c}\n"));
    }
    s.push_str("program:\n");
    s.push_str(&render(program));
    s
}

/// `None` when the analyzer passes every check on `program`.
fn check_program(program: &Program, domain: Domain, cfg: &VerifyConfig) -> Option<String> {
    let r = match kleene(program, domain, &options(cfg)) {
        Ok(r) => r,
        Err(e) => return Some(format!("analyzer error: {e}\nprogram:\n{}", render(program))),
    };
    if let Err(e) = check_trace_invariants(&r) {
        return Some(format!("domain {domain}: invariant violated: {e}\nprogram:\n{}", render(program)));
    }
    match compare_runs(program, domain, &options(cfg)) {
        Ok(None) => None,
        Ok(Some(m)) => Some(describe(program, domain, &m)),
        Err(e) => Some(format!("oracle error: {e}\nprogram:\n{}", render(program))),
    }
}

/// Drops clauses one at a time while the failure persists.
fn minimize(program: &Program, domain: Domain, cfg: &VerifyConfig) -> Program {
    let mut current = program.clone();
    'outer: loop {
        for i in 0..current.clauses().len() {
            let mut clauses = current.clauses().to_vec();
            clauses.remove(i);
            if clauses.is_empty() {
                continue;
            }
            let Ok(candidate) = Program::new(clauses) else {
                continue;
            };
            if check_program(&candidate, domain, cfg).is_some() {
                current = candidate;
                continue 'outer;
            }
        }
        return current;
    }
}

fn families_vs_oracle(cfg: &VerifyConfig) -> SuiteOutcome {
    let name = format!("families vs oracle (n <= {})", cfg.n_max);
    let mut programs = Vec::new();
    for n in 1..=cfg.n_max {
        programs.push(gen_def_chain(n).expect("n >= 1"));
        if n >= 2 {
            programs.push(gen_pos_linear(n).expect("n >= 2"));
        }
    }
    corpus_suite(name, &programs, cfg, false)
}

fn random_vs_oracle(cfg: &VerifyConfig) -> SuiteOutcome {
    let name = format!("random programs vs oracle (seed {})", cfg.seed);
    corpus_suite(name, &random_corpus(cfg.seed, cfg.random_programs), cfg, true)
}

fn corpus_suite(name: String, programs: &[Program], cfg: &VerifyConfig, shrink: bool) -> SuiteOutcome {
    let mut cases = 0;
    for program in programs {
        for domain in [Domain::Pos, Domain::Def] {
            cases += 1;
            if let Some(failure) = check_program(program, domain, cfg) {
                let failure = if shrink {
                    let small = minimize(program, domain, cfg);
                    check_program(&small, domain, cfg).unwrap_or(failure)
                } else {
                    failure
                };
                return SuiteOutcome {
                    name,
                    cases,
                    failure: Some(failure),
                };
            }
        }
    }
    SuiteOutcome {
        name,
        cases,
        failure: None,
    }
}
