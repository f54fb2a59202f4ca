//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use groundness::analyzer::{kleene, KleeneOptions};
use groundness::boolfun::{down_set, intersection_close, is_intersection_closed, AbsFun, Domain, Model, ModelSet};
use groundness::cli::check_trace_invariants;
use groundness::oracle::{compare_runs, expected_trace_def_chain, random_corpus, ref_closure, ref_kleene};
use groundness::program::{size_metric, Program, Signature};
use groundness::{gen_def_chain, gen_pos_linear};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<String, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))?;
    Ok(format!("{t:.2?}"))
}

fn opts() -> KleeneOptions {
    KleeneOptions {
        record_rounds: true,
        ..Default::default()
    }
}

fn def_chain_walk() -> Outcome {
    let start = Instant::now();
    for n in 2..=8usize {
        let r = kleene(&gen_def_chain(n).unwrap(), Domain::Def, &KleeneOptions::default()).map_err(|e| e.to_string())?;
        let p = Signature::new("p", n);
        let seq = r.trace.value_sequence(&p);
        let chain = expected_trace_def_chain(n).unwrap();
        ensure(seq == chain, || format!("n={n}: sequence differs from the chain"))?;
        let want = (1usize << n) - 1;
        ensure(r.increases(&p) == want, || {
            format!("n={n}: strict_increases(p) = {}, want {want}", r.increases(&p))
        })?;
    }
    Ok(format!("n=2..8, {}", within(start, Duration::from_secs(10))?))
}

/// Strict changes of `p` along the oracle's round sequence.
fn oracle_increases(program: &Program, sig: &Signature) -> Result<usize, String> {
    let run = ref_kleene(program, Domain::Pos, 1 << 12).map_err(|e| e.to_string())?;
    Ok(run.rounds.windows(2).filter(|w| w[0].get(sig) != w[1].get(sig)).count())
}

fn pos_linear_blowup() -> Outcome {
    let start = Instant::now();
    let p3 = Signature::new("p", 3);
    let c0 = oracle_increases(&gen_pos_linear(3).unwrap(), &p3)? as i64 - ((1 << 3) - 2);
    let mut counts = Vec::new();
    for n in 3..=8usize {
        let r = kleene(&gen_pos_linear(n).unwrap(), Domain::Pos, &KleeneOptions::default()).map_err(|e| e.to_string())?;
        let got = r.increases(&Signature::new("p", n)) as i64;
        let want = (1i64 << n) - 2 + c0;
        ensure(got == want, || format!("n={n}: strict_increases(p) = {got}, want 2^n-2+{c0} = {want}"))?;
        counts.push(got);
    }
    let worst = counts.windows(2).map(|w| (w[1] - 2 * w[0]).abs()).max().unwrap();
    ensure(worst <= 4, || format!("doubling difference {worst} exceeds 4"))?;
    Ok(format!(
        "c0={c0}, counts {counts:?}, max |s(n+1)-2s(n)| = {worst}, {}",
        within(start, Duration::from_secs(60))?
    ))
}

fn non_closure_witness() -> Outcome {
    for n in 2..=8usize {
        let r = kleene(&gen_pos_linear(n).unwrap(), Domain::Pos, &KleeneOptions::default()).map_err(|e| e.to_string())?;
        let s = r.fixpoint.get(&Signature::new("s", 2 * n)).ok_or("s missing")?;
        ensure(!is_intersection_closed(s.models()), || {
            format!("n={n}: Pos fixpoint of s/{} is closed", 2 * n)
        })?;
    }
    Ok("n=2..8".into())
}

fn size_metrics() -> Outcome {
    for n in 2..=10usize {
        let m = size_metric(&gen_pos_linear(n).unwrap()).arg_positions;
        ensure(m == 11 * n, || format!("pos-linear n={n}: m = {m}, want {}", 11 * n))?;
    }
    for n in 1..=10usize {
        let m = size_metric(&gen_def_chain(n).unwrap()).arg_positions;
        ensure(m == 2 * n * n + n, || format!("def-chain n={n}: m = {m}, want {}", 2 * n * n + n))?;
    }
    Ok("pos-linear m = 11n; def-chain m = 2n^2+n counting every atom (n^2+n counts heads only)".into())
}

fn down_sets_closed() -> Outcome {
    let mut cases = 0;
    for width in 1..=4usize {
        for v in 0..1u64 << width {
            let d = down_set(&Model::from_value(width, v).unwrap());
            ensure(is_intersection_closed(&d), || format!("down-set of {v:0width$b} is not closed"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} models over widths 1..4"))
}

fn def_inexpressiveness() -> Outcome {
    let x = AbsFun::lift(ModelSet::from_strs(2, &["10", "11"]).unwrap(), Domain::Pos).unwrap();
    let y = AbsFun::lift(ModelSet::from_strs(2, &["01", "11"]).unwrap(), Domain::Pos).unwrap();
    let pos = x.join(&y).unwrap();
    let def = x.with_domain(Domain::Def).unwrap().join(&y.with_domain(Domain::Def).unwrap()).unwrap();
    ensure(def.is_top() && def.models().len() == 4, || format!("def join = {{{}}}", def.models()))?;
    ensure(pos.models().len() == 3, || format!("pos join = {{{}}}", pos.models()))?;
    Ok(format!("def {{{}}}, pos {{{}}}", def.models(), pos.models()))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut programs: Vec<Program> = (1..=5).map(|n| gen_def_chain(n).unwrap()).collect();
    programs.extend((2..=5).map(|n| gen_pos_linear(n).unwrap()));
    let families = programs.len();
    programs.extend(random_corpus(0, 120));
    for (i, p) in programs.iter().enumerate() {
        for domain in [Domain::Pos, Domain::Def] {
            match compare_runs(p, domain, &opts()) {
                Ok(None) => {}
                Ok(Some(m)) => return Err(format!("program {i} ({domain}) differs at round {} on {}", m.round, m.predicate)),
                Err(e) => return Err(format!("program {i} ({domain}): {e}")),
            }
        }
    }
    Ok(format!(
        "{families} family programs + {} random, both domains, {}",
        programs.len() - families,
        within(start, Duration::from_secs(60))?
    ))
}

fn random_set(rng: &mut ChaCha8Rng, width: usize) -> ModelSet {
    let mut s = ModelSet::from_values(width, (0..1u64 << width).filter(|_| rng.gen_bool(0.3))).unwrap();
    s.insert(Model::all_ones(width).unwrap()).unwrap();
    s
}

fn property_suite() -> Outcome {
    let mut corpus = random_corpus(42, 150);
    corpus.extend((1..=6).map(|n| gen_def_chain(n).unwrap()));
    corpus.extend((2..=6).map(|n| gen_pos_linear(n).unwrap()));
    for (i, p) in corpus.iter().enumerate() {
        let pos = kleene(p, Domain::Pos, &opts()).map_err(|e| format!("program {i}: {e}"))?;
        let def = kleene(p, Domain::Def, &opts()).map_err(|e| format!("program {i}: {e}"))?;
        check_trace_invariants(&pos).map_err(|e| format!("program {i} (pos): {e}"))?;
        check_trace_invariants(&def).map_err(|e| format!("program {i} (def): {e}"))?;
        for (sig, f) in pos.fixpoint.iter() {
            let g = def.fixpoint.get(sig).unwrap();
            ensure(f.models().is_subset(g.models()).unwrap(), || format!("program {i}: {sig} pos not within def"))?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..2000 {
        let w = rng.gen_range(1..=6);
        let (s, t, u) = (random_set(&mut rng, w), random_set(&mut rng, w), random_set(&mut rng, w));
        let cs = intersection_close(&s);
        ensure(s.is_subset(&cs).unwrap(), || "closure is not extensive".into())?;
        ensure(intersection_close(&cs) == cs, || "closure is not idempotent".into())?;
        ensure(cs.is_subset(&intersection_close(&s.union(&t).unwrap())).unwrap(), || {
            "closure is not monotone".into()
        })?;
        ensure(cs == ref_closure(&s), || format!("closure differs from reference on {{{s}}}"))?;
        for domain in [Domain::Pos, Domain::Def] {
            let f = AbsFun::lift(s.clone(), domain).unwrap();
            let g = AbsFun::lift(t.clone(), domain).unwrap();
            let j = f.join(&g).unwrap();
            ensure(f.entails(&j).unwrap() && g.entails(&j).unwrap(), || "join is not an upper bound".into())?;
            let h = AbsFun::lift(u.union(f.models()).unwrap().union(g.models()).unwrap(), domain).unwrap();
            ensure(j.entails(&h).unwrap(), || format!("{domain} join is not least"))?;
        }
    }
    Ok(format!("{} programs, 2000 random lattice cases", corpus.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("def chain walk", def_chain_walk),
        ("pos linear blowup", pos_linear_blowup),
        ("non-closure witness", non_closure_witness),
        ("size metrics", size_metrics),
        ("down-sets closed", down_sets_closed),
        ("def inexpressiveness", def_inexpressiveness),
        ("oracle equivalence", oracle_equivalence),
        ("property suite", property_suite),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
