use std::sync::Arc;

use lawvere_core::finset::Budget;
use lawvere_core::models::enumerate_models;
use lawvere_core::spancat::SpanClass;
use lawvere_core::theory::{
    bounded_eq, compose_morphisms, enumerate_terms, hom_iter, identity_morphism, normal_form, normalize,
    substitute, Morphism, NormalForm, Presentation, Term, Verdict,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_term(rng: &mut ChaCha8Rng, p: &Presentation, vars: usize, depth: usize) -> Term {
    let ops = p.ops();
    if depth == 0 || ops.is_empty() || rng.gen_bool(0.3) {
        return Term::Var(rng.gen_range(0..vars));
    }
    let op = &ops[rng.gen_range(0..ops.len())];
    let args = (0..op.arity).map(|_| random_term(rng, p, vars, depth.saturating_sub(1))).collect();
    Term::App(op.name.clone(), args)
}

fn normalizer_theories() -> Vec<Presentation> {
    vec![
        Presentation::trivial(),
        Presentation::pointed_set(),
        Presentation::monoid(),
        Presentation::cmon(),
        Presentation::group(),
        Presentation::abelian_group(),
    ]
}

// An arbitrary interpretation of every operation over Z/101, enough to
// tell apart terms that substitution might have scrambled.
fn eval_anywhere(t: &Term, env: &[i64]) -> i64 {
    match t {
        Term::Var(i) => env[*i],
        Term::App(op, args) => {
            let seed: i64 = op.bytes().map(i64::from).sum();
            let vals: Vec<i64> = args.iter().map(|a| eval_anywhere(a, env)).collect();
            let linear: i64 = vals.iter().enumerate().map(|(k, v)| (seed + 2 * k as i64 + 1) * v).sum();
            let twist = vals.first().zip(vals.last()).map_or(0, |(a, b)| a * b);
            (seed + linear + twist).rem_euclid(101)
        }
    }
}

proptest! {
    #[test]
    fn normalize_is_idempotent_and_substitution_compatible(seed in any::<u64>(), which in 0usize..6) {
        let p = &normalizer_theories()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_term(&mut rng, p, 3, 4);
        let env: Vec<Term> = (0..3).map(|_| random_term(&mut rng, p, 2, 3)).collect();
        let nt = normalize(&t, p).unwrap();
        prop_assert_eq!(normalize(&nt, p).unwrap(), nt.clone());
        let direct = normalize(&substitute(&t, &env).unwrap(), p).unwrap();
        let normal_env: Vec<Term> = env.iter().map(|e| normalize(e, p).unwrap()).collect();
        let via_normal = normalize(&substitute(&nt, &normal_env).unwrap(), p).unwrap();
        prop_assert_eq!(direct, via_normal);
    }

    #[test]
    fn nested_substitution_evaluates_consistently(seed in any::<u64>(), which in 0usize..6) {
        let p = &normalizer_theories()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_term(&mut rng, p, 3, 4);
        let first: Vec<Term> = (0..3).map(|_| random_term(&mut rng, p, 2, 3)).collect();
        let second: Vec<Term> = (0..2).map(|_| random_term(&mut rng, p, 2, 2)).collect();
        let two_step = substitute(&substitute(&t, &first).unwrap(), &second).unwrap();
        let composed: Vec<Term> = first.iter().map(|s| substitute(s, &second).unwrap()).collect();
        let one_step = substitute(&t, &composed).unwrap();
        prop_assert_eq!(&two_step, &one_step);
        let point: Vec<i64> = (0..2).map(|_| rng.gen_range(0..101)).collect();
        let inner: Vec<i64> = second.iter().map(|s| eval_anywhere(s, &point)).collect();
        let outer: Vec<i64> = first.iter().map(|s| eval_anywhere(s, &inner)).collect();
        prop_assert_eq!(eval_anywhere(&two_step, &point), eval_anywhere(&t, &outer));
    }
}

#[test]
fn bounded_eq_agrees_with_cmon_normalizer() {
    let p = Presentation::cmon();
    let bare = p.renamed("cmon_bare", |s| s.to_string());
    let terms = enumerate_terms(&p, 2, 5, Budget::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut equal_seen = 0;
    for k in 0..200 {
        let t1 = &terms[rng.gen_range(0..terms.len())];
        let nf1 = normal_form(t1, &p, 2).unwrap();
        // Every other pair is drawn among terms with the same normal form.
        let pool: Vec<&Term> = if k % 2 == 0 {
            terms.iter().filter(|t| normal_form(t, &p, 2).unwrap() == nf1).collect()
        } else {
            terms.iter().collect()
        };
        let t2 = pool[rng.gen_range(0..pool.len())];
        let same = nf1 == normal_form(t2, &p, 2).unwrap();
        let verdict = bounded_eq(t1, t2, &bare, 6);
        assert_eq!(verdict == Verdict::Equal, same, "{t1} vs {t2}");
        equal_seen += usize::from(same);
    }
    assert!(equal_seen >= 100);
}

#[test]
fn bounded_eq_is_sound_against_models() {
    let p = Presentation::monoid();
    let bare = p.renamed("monoid_bare", |s| s.to_string());
    let models: Vec<_> =
        (1..=3).flat_map(|n| enumerate_models(&Arc::new(p.clone()), n, false, Budget::default()).unwrap()).collect();
    let terms = enumerate_terms(&p, 2, 5, Budget::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut equal_seen = 0;
    for _ in 0..150 {
        let t1 = &terms[rng.gen_range(0..terms.len())];
        let t2 = &terms[rng.gen_range(0..terms.len())];
        if bounded_eq(t1, t2, &bare, 7) != Verdict::Equal {
            continue;
        }
        equal_seen += 1;
        for m in &models {
            for a in 0..m.carrier() {
                for b in 0..m.carrier() {
                    assert_eq!(m.eval(t1, &[a, b]).unwrap(), m.eval(t2, &[a, b]).unwrap(), "{t1} = {t2}");
                }
            }
        }
    }
    assert!(equal_seen > 0);
    // associativity instance, found in one step
    let x = Term::Var;
    let m = |a: Term, b: Term| Term::app("m", vec![a, b]);
    let l = m(m(x(0), x(1)), x(2));
    let r = m(x(0), m(x(1), x(2)));
    assert_eq!(bounded_eq(&l, &r, &bare, 8), Verdict::Equal);
}

fn homs(p: &Presentation, m: usize, n: usize, bound: u64) -> Vec<Morphism> {
    hom_iter(p, m, n, bound, Budget::default()).unwrap().collect()
}

#[test]
fn composition_is_unital() {
    for p in [Presentation::cmon(), Presentation::monoid(), Presentation::abelian_group()] {
        for m in 0..=2 {
            for n in 0..=2 {
                for f in homs(&p, m, n, 2) {
                    assert_eq!(compose_morphisms(&p, &identity_morphism(m), &f).unwrap(), f);
                    assert_eq!(compose_morphisms(&p, &f, &identity_morphism(n)).unwrap(), f);
                }
            }
        }
    }
}

#[test]
fn composition_is_associative() {
    // exhaustive at entry bound 1, sampled at entry bound 2
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for p in [Presentation::cmon(), Presentation::monoid(), Presentation::abelian_group()] {
        for a in 0..=2 {
            for b in 0..=2 {
                for c in 0..=2 {
                    for d in 0..=2 {
                        let (fs, gs, hs) = (homs(&p, a, b, 1), homs(&p, b, c, 1), homs(&p, c, d, 1));
                        for f in &fs {
                            for g in &gs {
                                let gf = compose_morphisms(&p, f, g).unwrap();
                                for h in &hs {
                                    let left = compose_morphisms(&p, &gf, h).unwrap();
                                    let hg = compose_morphisms(&p, g, h).unwrap();
                                    assert_eq!(left, compose_morphisms(&p, f, &hg).unwrap());
                                }
                            }
                        }
                        let (fs, gs, hs) = (homs(&p, a, b, 2), homs(&p, b, c, 2), homs(&p, c, d, 2));
                        for _ in 0..20 {
                            let pick = |rng: &mut ChaCha8Rng, v: &[Morphism]| v[rng.gen_range(0..v.len())].clone();
                            if fs.is_empty() || gs.is_empty() || hs.is_empty() {
                                break;
                            }
                            let (f, g, h) = (pick(&mut rng, &fs), pick(&mut rng, &gs), pick(&mut rng, &hs));
                            let left = compose_morphisms(&p, &compose_morphisms(&p, &f, &g).unwrap(), &h).unwrap();
                            let right = compose_morphisms(&p, &f, &compose_morphisms(&p, &g, &h).unwrap()).unwrap();
                            assert_eq!(left, right);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn cmon_hom_counts() {
    let p = Presentation::cmon();
    for m in 0..=3u32 {
        for n in 0..=2u32 {
            for b in 0..=2u64 {
                let expected = (b + 1).pow(m * n);
                assert_eq!(homs(&p, m as usize, n as usize, b).len() as u64, expected, "hom({m}, {n}) at bound {b}");
            }
        }
    }
}

fn as_span_class(p: &Presentation, f: &Morphism) -> SpanClass {
    let mut entries = Vec::new();
    for c in f.components() {
        match normal_form(c, p, f.source()).unwrap() {
            NormalForm::Exponents(v) => entries.extend(v),
            other => panic!("unexpected normal form {other:?}"),
        }
    }
    SpanClass::new(f.source(), f.target(), entries).unwrap()
}

#[test]
fn cmon_syntax_matches_span_classes() {
    let p = Presentation::cmon();
    for m in 0..=2 {
        for n in 0..=2 {
            let mut classes: Vec<SpanClass> = homs(&p, m, n, 2).iter().map(|f| as_span_class(&p, f)).collect();
            classes.sort();
            let mut expected = SpanClass::enumerate(m, n, 2);
            expected.sort();
            assert_eq!(classes, expected);
        }
    }
    for a in 0..=2 {
        for b in 0..=2 {
            for c in 0..=2 {
                for f in homs(&p, a, b, 2) {
                    for g in homs(&p, b, c, 1) {
                        let composite = as_span_class(&p, &compose_morphisms(&p, &f, &g).unwrap());
                        let classes = as_span_class(&p, &f).then(&as_span_class(&p, &g)).unwrap();
                        assert_eq!(composite, classes);
                    }
                }
            }
        }
    }
}
