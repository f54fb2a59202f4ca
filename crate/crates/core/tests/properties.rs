use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use groundness::analyzer::{kleene, tp, Interpretation, KleeneOptions};
use groundness::boolfun::{
    chain_f, intersection_close, is_intersection_closed, model_and, AbsFun, Domain, Model, ModelSet,
};
use groundness::cli::check_trace_invariants;
use groundness::oracle::{random_corpus, random_program, ref_closure, RandomProgramConfig};
use groundness::program::{parse, render, size_metric, Program};
use groundness::{gen_def_chain, gen_pos_linear, Signature};

fn set_from_mask(width: usize, mask: &[bool]) -> ModelSet {
    ModelSet::from_values(width, (0..mask.len() as u64).filter(|&v| mask[v as usize])).unwrap()
}

fn arb_set(max_width: usize) -> impl Strategy<Value = ModelSet> {
    (1..=max_width).prop_flat_map(|w| {
        prop::collection::vec(any::<bool>(), 1 << w).prop_map(move |bits| set_from_mask(w, &bits))
    })
}

/// `count` sets sharing one width.
fn arb_sets(max_width: usize, count: usize) -> impl Strategy<Value = Vec<ModelSet>> {
    (1..=max_width).prop_flat_map(move |w| {
        prop::collection::vec(
            prop::collection::vec(any::<bool>(), 1 << w).prop_map(move |bits| set_from_mask(w, &bits)),
            count,
        )
    })
}

fn positive(s: &ModelSet) -> ModelSet {
    let mut s = s.clone();
    s.insert(Model::all_ones(s.width()).unwrap()).unwrap();
    s
}

#[derive(Clone, Debug)]
enum Op {
    Meet(Vec<bool>),
    Join(Vec<bool>),
    Exists(usize),
    Rename(Vec<usize>),
}

fn arb_ops(width: usize) -> impl Strategy<Value = Vec<Op>> {
    let perm: Vec<usize> = (1..=width).collect();
    let op = prop_oneof![
        prop::collection::vec(any::<bool>(), 1 << width).prop_map(Op::Meet),
        prop::collection::vec(any::<bool>(), 1 << width).prop_map(Op::Join),
        (1..=width).prop_map(Op::Exists),
        Just(perm).prop_shuffle().prop_map(Op::Rename),
    ];
    prop::collection::vec(op, 1..8)
}

proptest! {
    #[test]
    fn conjunction_never_exceeds_either_operand(w in 1usize..=12, a in any::<u64>(), b in any::<u64>()) {
        let mask = (1u64 << w) - 1;
        let (m1, m2) = (Model::from_value(w, a & mask).unwrap(), Model::from_value(w, b & mask).unwrap());
        let c = model_and(&m1, &m2).unwrap();
        prop_assert!(c.value() <= m1.value().min(m2.value()));
    }

    #[test]
    fn closure_is_a_closure_operator(sets in arb_sets(6, 2)) {
        let (s, t) = (&sets[0], &sets[1]);
        let cs = intersection_close(s);
        prop_assert!(s.is_subset(&cs).unwrap());
        prop_assert_eq!(intersection_close(&cs), cs.clone());
        prop_assert!(is_intersection_closed(&cs));
        let st = s.union(t).unwrap();
        prop_assert!(cs.is_subset(&intersection_close(&st)).unwrap());
    }

    #[test]
    fn closure_matches_reference(s in arb_set(6)) {
        prop_assert_eq!(intersection_close(&s), ref_closure(&s));
    }

    #[test]
    fn join_is_least_upper_bound(sets in arb_sets(5, 3), def in any::<bool>()) {
        let domain = if def { Domain::Def } else { Domain::Pos };
        let f = AbsFun::lift(positive(&sets[0]), domain).unwrap();
        let g = AbsFun::lift(positive(&sets[1]), domain).unwrap();
        let j = f.join(&g).unwrap();
        prop_assert!(f.entails(&j).unwrap() && g.entails(&j).unwrap());
        // Any upper bound in the domain contains the join.
        let h_models = sets[2].union(f.models()).unwrap().union(g.models()).unwrap();
        let h = AbsFun::lift(h_models, domain).unwrap();
        prop_assert!(j.entails(&h).unwrap());
        prop_assert!(AbsFun::new(j.models().clone(), domain).is_ok());
    }

    #[test]
    fn exists_weakens_and_is_idempotent(s in arb_set(6), pos in 1usize..=6, def in any::<bool>()) {
        let domain = if def { Domain::Def } else { Domain::Pos };
        let f = AbsFun::lift(positive(&s), domain).unwrap();
        let pos = 1 + (pos - 1) % f.width();
        let e = f.exists(pos).unwrap();
        prop_assert!(f.entails(&e).unwrap());
        prop_assert_eq!(e.exists(pos).unwrap(), e.clone());
        if def {
            // Def is closed under projection; re-closing changes nothing.
            let mut raw = f.models().clone();
            let maskbit = 1u64 << (f.width() - pos);
            for v in f.models().values() {
                raw.insert(Model::from_value(f.width(), v ^ maskbit).unwrap()).unwrap();
            }
            prop_assert_eq!(&raw, e.models());
        }
    }

    #[test]
    fn def_values_stay_in_def(
        (w, base, ops) in (1usize..=5).prop_flat_map(|w| {
            (Just(w), prop::collection::vec(any::<bool>(), 1 << w), arb_ops(w))
        })
    ) {
        let mut f = AbsFun::lift(positive(&set_from_mask(w, &base)), Domain::Def).unwrap();
        for op in ops {
            f = match op {
                Op::Meet(bits) => {
                    let g = AbsFun::lift(positive(&set_from_mask(w, &bits)), Domain::Def).unwrap();
                    f.meet(&g).unwrap()
                }
                Op::Join(bits) => {
                    let g = AbsFun::lift(positive(&set_from_mask(w, &bits)), Domain::Def).unwrap();
                    f.join(&g).unwrap()
                }
                Op::Exists(p) => f.exists(p).unwrap(),
                Op::Rename(perm) => f.rename(&perm).unwrap(),
            };
            prop_assert!(f.is_positive() && f.is_intersection_closed(), "{:?}", f);
        }
    }

    #[test]
    fn render_then_parse_is_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = RandomProgramConfig { max_predicates: 4, max_arity: 4, max_clauses: 6, max_body_atoms: 3 };
        let p = random_program(&mut rng, &cfg);
        prop_assert_eq!(parse(&render(&p)).unwrap(), p);
    }

    #[test]
    fn size_is_additive(a in any::<u64>(), b in any::<u64>()) {
        let pa = random_corpus(a, 1).remove(0);
        let pb = random_corpus(b, 1).remove(0);
        if let Ok(joined) = pa.concat(&pb) {
            prop_assert_eq!(
                size_metric(&joined).arg_positions,
                size_metric(&pa).arg_positions + size_metric(&pb).arg_positions
            );
        }
    }

    #[test]
    fn tp_is_monotone(seed in any::<u64>(), def in any::<bool>()) {
        let domain = if def { Domain::Def } else { Domain::Pos };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_program(&mut rng, &RandomProgramConfig::default());
        let mut lo = Interpretation::bottom(&p, domain).unwrap();
        let mut hi = lo.clone();
        for sig in p.predicates() {
            let width = sig.arity;
            let pick = |rng: &mut ChaCha8Rng| {
                let bits: Vec<bool> = (0..1 << width).map(|_| rand::Rng::gen_bool(rng, 0.4)).collect();
                positive(&set_from_mask(width, &bits))
            };
            let small = AbsFun::lift(pick(&mut rng), domain).unwrap();
            let big = small.join(&AbsFun::lift(pick(&mut rng), domain).unwrap()).unwrap();
            // Leave some predicates at bottom in the smaller interpretation.
            if rand::Rng::gen_bool(&mut rng, 0.7) {
                lo.insert(sig.clone(), small).unwrap();
            }
            hi.insert(sig, big).unwrap();
        }
        prop_assert!(lo.entails(&hi));
        let (a, b) = (tp(&p, &lo, domain).unwrap(), tp(&p, &hi, domain).unwrap());
        prop_assert!(a.entails(&b), "{:?} vs {:?}", a, b);
    }
}

fn corpus() -> Vec<Program> {
    let mut programs = random_corpus(42, 150);
    programs.extend((1..=5).map(|n| gen_def_chain(n).unwrap()));
    programs.extend((2..=5).map(|n| gen_pos_linear(n).unwrap()));
    programs
}

#[test]
fn kleene_invariants_over_the_corpus() {
    let opts = KleeneOptions {
        record_rounds: true,
        ..Default::default()
    };
    for p in corpus() {
        for domain in [Domain::Pos, Domain::Def] {
            let r = kleene(&p, domain, &opts).unwrap();
            check_trace_invariants(&r).unwrap_or_else(|e| panic!("{e}\n{p}"));
            for (sig, n) in &r.strict_increases {
                assert!(*n <= r.rounds_to_fixpoint, "{sig} in\n{p}");
            }
        }
    }
}

#[test]
fn pos_fixpoint_is_contained_in_def_fixpoint() {
    for p in corpus() {
        let pos = kleene(&p, Domain::Pos, &KleeneOptions::default()).unwrap();
        let def = kleene(&p, Domain::Def, &KleeneOptions::default()).unwrap();
        for (sig, f) in pos.fixpoint.iter() {
            let g = def.fixpoint.get(sig).unwrap();
            assert!(f.models().is_subset(g.models()).unwrap(), "{sig} in\n{p}");
        }
    }
}

#[test]
fn rounds_do_not_depend_on_clause_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for p in corpus() {
        let mut clauses = p.clauses().to_vec();
        clauses.shuffle(&mut rng);
        let q = Program::new(clauses).unwrap();
        for domain in [Domain::Pos, Domain::Def] {
            let a = kleene(&p, domain, &KleeneOptions::default()).unwrap();
            let b = kleene(&q, domain, &KleeneOptions::default()).unwrap();
            assert_eq!(a.rounds_to_fixpoint, b.rounds_to_fixpoint);
            assert_eq!(a.fixpoint, b.fixpoint);
        }
    }
}

#[test]
fn def_chain_is_strict_with_one_model_per_step() {
    for n in 1..=8usize {
        let top = (1u64 << n) - 1;
        let chain: Vec<AbsFun> = (0..=top).map(|i| chain_f(n, i).unwrap()).collect();
        assert!(chain[0].is_bottom() && chain[top as usize].is_top());
        let mut strict_steps = 0;
        for (i, w) in chain.windows(2).enumerate() {
            assert!(w[0].entails(&w[1]).unwrap() && w[0] != w[1]);
            strict_steps += 1;
            // f_1 = {M_0, top}; after that every step adds exactly M_i.
            let added = if i == 0 { 2 } else { 1 };
            assert_eq!(w[1].models().len(), w[0].models().len() + added);
            assert_eq!(w[1].models().len(), i + 2);
            assert!(AbsFun::new(w[1].models().clone(), Domain::Def).is_ok());
        }
        assert_eq!(strict_steps, top as usize);
    }
}

#[test]
fn def_chain_trace_is_the_chain() {
    for n in 1..=8usize {
        let r = kleene(&gen_def_chain(n).unwrap(), Domain::Def, &KleeneOptions::default()).unwrap();
        let seq = r.trace.value_sequence(&Signature::new("p", n));
        let chain: Vec<AbsFun> = (0..1u64 << n).map(|i| chain_f(n, i).unwrap()).collect();
        assert_eq!(seq, chain, "n={n}");
    }
}
