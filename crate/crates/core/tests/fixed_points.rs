use proptest::prelude::*;
use wlab_core::complex::{AutElement, Move, WhiteheadAuto};
use wlab_core::fixed::{self, compute_circ, FOrdering, FSubgroup, FixedContext, Factored};
use wlab_core::group::WordEnumerator;
use wlab_core::*;

fn lab(orders: &[usize]) -> Complex {
    Complex::new(FreeProduct::cyclic(orders).unwrap()).unwrap()
}

/// `⟨conj by λ_op of the listed labels⟩` at its unique reduced base tree.
fn conj_subgroup(lab: &Complex, op: usize, targets: &[usize]) -> FSubgroup {
    let fp = lab.fp();
    let mut gammas = vec![0u8; fp.rank()];
    for &t in targets {
        gammas[t] = fp.factor(op).lambda();
    }
    let m = WhiteheadAuto::new(Basis::standard(fp), op, gammas).unwrap();
    let e = AutElement::from_moves(fp, vec![Move::Whitehead(m)]).unwrap();
    let trees = fixed::reduced_base_trees(lab, std::slice::from_ref(&e)).unwrap();
    assert_eq!(trees.len(), 1);
    FSubgroup::new(lab, vec![e], trees[0].clone()).unwrap()
}

fn sample_subgroups(lab: &Complex) -> Vec<FSubgroup> {
    fixed::cyclic_subgroups(lab, fixed::DEFAULT_F_ORDER_CAP, 6).unwrap()
}

/// Direct test of the membership criterion for `w ∈ ∗_{j∈I(k)} G°_{j,k}`
/// against `φ(w) = d w g_k d⁻¹` over every word of length at most 4.
fn membership_holds(lab: &Complex, f: &FSubgroup) -> usize {
    let fp = lab.fp();
    let phi = &f.generators[0];
    let fac = Factored::of(fp, &phi.pair).unwrap();
    let idx = TreeIndices::new(&f.base_tree);
    let words: Vec<Word> = WordEnumerator::new(fp).take_while(|w| w.len() <= 4).collect();
    let mut checked = 0;
    for k in 1..=fp.rank() as u8 {
        let kk = (k - 1) as usize;
        let d_letters: Vec<Word> = idx
            .j_less(k)
            .iter()
            .map(|&j| Word::letter(j as usize - 1, fac.y[j as usize - 1][kk]))
            .collect();
        let d = fp.multiply_all(&d_letters);
        let block: Vec<u8> = idx.i_of(k).iter().copied().filter(|&x| x != 0).collect();
        for w in &words {
            if w.last().is_some_and(|l| l.factor as usize == kk) {
                continue;
            }
            let image = phi.apply(fp, w);
            let rest = fp.multiply_all([&fp.invert(w), &fp.invert(&d), &image, &d]);
            let lhs = match rest.letters() {
                [] => true,
                [l] => l.factor as usize == kk,
                _ => false,
            };
            let rhs = w.letters().iter().all(|l| {
                let j = l.factor as usize;
                let g = fp.factor(j);
                let y = fac.y[j][kk];
                block.contains(&(j as u8 + 1))
                    && g.mul(g.mul(y, l.elem), g.inv(y)) == fac.psi[j].images[l.elem as usize]
            });
            assert_eq!(lhs, rhs, "k={k} w={w} F={:?}", f.describe(fp));
            checked += 1;
        }
    }
    checked
}

#[test]
fn membership_criterion_on_cyclic_subgroups() {
    let mut total = 0;
    for orders in [vec![2, 2], vec![2, 3], vec![3, 3], vec![2, 2, 2]] {
        let lab = lab(&orders);
        for f in sample_subgroups(&lab) {
            total += membership_holds(&lab, &f);
        }
    }
    assert!(total > 1000);
}

#[test]
fn membership_criterion_on_deep_tree() {
    let lab = lab(&[2, 2, 2, 2]);
    let f = conj_subgroup(&lab, 1, &[2, 3]);
    assert!(membership_holds(&lab, &f) > 0);
}

#[test]
fn circ_is_antitone() {
    for orders in [vec![2, 3], vec![2, 2, 2], vec![3, 3]] {
        let lab = lab(&orders);
        let fp = lab.fp();
        let all = compute_circ(fp, &fixed::trivial_subgroup(&lab).unwrap());
        for f in sample_subgroups(&lab) {
            let big = f.projections(&lab).unwrap();
            let (c1, c2) = (compute_circ(fp, &f), compute_circ(fp, &big));
            for j in 1..=fp.rank() as u8 {
                for k in 1..=fp.rank() as u8 {
                    assert_eq!(all.get(j, k).len(), fp.factor(j as usize - 1).order());
                    for g in c2.get(j, k) {
                        assert!(c1.contains(j, k, *g));
                    }
                    for g in c1.get(j, k) {
                        assert!(all.contains(j, k, *g));
                    }
                }
            }
        }
    }
}

fn fixture_contexts(lab: &Complex) -> Vec<FixedContext<'_>> {
    let mut out: Vec<FixedContext> = sample_subgroups(lab)
        .into_iter()
        .map(|f| FixedContext::new(lab, f).unwrap())
        .collect();
    if lab.n() == 4 {
        out.push(FixedContext::new(lab, conj_subgroup(lab, 1, &[2, 3])).unwrap());
    }
    out
}

#[test]
fn minimum_matches_brute_force() {
    let mut nontrivial = 0;
    for orders in [vec![2, 2, 2], vec![2, 2, 2, 2]] {
        let lab = lab(&orders);
        for ctx in fixture_contexts(&lab) {
            for r in ctx.reduced_representatives(2, 12).unwrap() {
                let (m, _) = ctx.minimize_representative(&r).unwrap();
                assert_eq!(ctx.minimize_representative(&m).unwrap().0, m);
                let orbit = lab.orbit(&r, ctx.base_tree()).unwrap();
                let standard: Vec<&Frame> = orbit
                    .members
                    .values()
                    .filter(|f| ctx.is_f_standard(f, ctx.base_tree()))
                    .collect();
                let minimal: Vec<&Frame> = standard
                    .iter()
                    .copied()
                    .filter(|a| standard.iter().all(|b| ctx.compare_f_norm(b, a) != FOrdering::Less))
                    .collect();
                nontrivial += (standard.len() > 1) as usize;
                assert!(minimal.contains(&&m), "minimizer missed for {}", r.basis().to_code());
                for a in &minimal {
                    assert_eq!(ctx.compare_f_norm(a, &m), FOrdering::Equal);
                }
            }
        }
    }
    assert!(nontrivial > 0);
}

#[test]
fn restrict_inverts_lift() {
    let lab = lab(&[2, 2, 2, 2]);
    let mut lifts = 0;
    for ctx in fixture_contexts(&lab) {
        for r in ctx.reduced_representatives(1, 6).unwrap() {
            for b in 0..ctx.block_groups().len() {
                let Some(local) = ctx.block_frame(&r, b).unwrap() else {
                    continue;
                };
                for mv in ctx.block_groups()[b].lab.all_moves(&local) {
                    let Ok(lift) = ctx.lift_move(&r, b, &mv) else {
                        continue;
                    };
                    lifts += 1;
                    let k = lift.operative as u8 + 1;
                    for other in ctx.idx.adjacent_blocks(k) {
                        let back = ctx.restrict_move(&r, &lift, other).unwrap();
                        if other == b {
                            assert_eq!((back.operative, &back.gammas), (mv.operative, &mv.gammas));
                        } else {
                            assert!(back.is_identity());
                        }
                    }
                }
            }
        }
    }
    assert!(lifts > 20, "only {lifts} lifts");
}

#[test]
fn petal_conjugates_have_standard_representatives() {
    let lab = lab(&[2, 2, 2]);
    let f = conj_subgroup(&lab, 0, &[2]);
    let ctx = FixedContext::new(&lab, f).unwrap();
    let h0 = Frame::standard(lab.fp());
    for mv in lab.carried_moves(&h0, ctx.base_tree()) {
        let g = mv.apply_to_frame(lab.fp(), &h0).unwrap();
        let v = lab.canonical_vertex(&g, ctx.base_tree()).unwrap();
        let rep = ctx.standard_representative(&v).unwrap().expect("standard rep");
        assert!(ctx.is_f_standard(&rep, ctx.base_tree()));
    }
}

#[test]
fn twisting_fails_off_the_fixed_set() {
    let lab = lab(&[2, 2, 2]);
    let ctx = FixedContext::new(&lab, conj_subgroup(&lab, 0, &[2])).unwrap();
    let h0 = Frame::standard(lab.fp());
    assert!(ctx.verify_twisting(&h0, ctx.base_tree()).passed());
    let nuclear = PointedTree::nuclear(3);
    assert!(!ctx.verify_twisting(&h0, &nuclear).passed());
}

#[test]
fn projection_subgroup_has_same_reduced_vertices() {
    for orders in [vec![2, 3], vec![2, 2, 2]] {
        let lab = lab(&orders);
        let ball = lab.enumerate_ball(lab.n() + 2).unwrap();
        let types = lab.ball_vertex_types(&ball).unwrap();
        for f in sample_subgroups(&lab) {
            let f2 = f.projections(&lab).unwrap();
            let keys = |f: FSubgroup| -> Vec<String> {
                let ctx = FixedContext::new(&lab, f).unwrap();
                let sub = ctx.fixed_subcomplex(&types).unwrap();
                sub.reduced().map(|v| v.vertex.key()).collect()
            };
            assert_eq!(keys(f), keys(f2));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn split_length_holds_on_random_subgroups(which in 0usize..6, pick in 0usize..40) {
        let lab = lab(&[2, 2, 2]);
        let subs = sample_subgroups(&lab);
        let ctx = FixedContext::new(&lab, subs[which % subs.len()].clone()).unwrap();
        let reps = ctx.reduced_representatives(3, 40).unwrap();
        let r = &reps[pick % reps.len()];
        for b in 0..ctx.block_groups().len() {
            for s in ctx.split_length(r, b, 2).unwrap() {
                prop_assert!(s.holds(), "{:?}", s);
            }
        }
    }

    #[test]
    fn reductive_moves_decompose(which in 0usize..6, pick in 0usize..40) {
        let lab = lab(&[2, 2, 2]);
        let subs = sample_subgroups(&lab);
        let ctx = FixedContext::new(&lab, subs[which % subs.len()].clone()).unwrap();
        let reps = ctx.reduced_representatives(3, 40).unwrap();
        let r = &reps[pick % reps.len()];
        for (mv, res) in ctx.reductive_moves_at(r).unwrap() {
            prop_assert!(ctx.decomposes(r, &mv).unwrap());
            prop_assert_eq!(ctx.compare_f_norm(&res, r), FOrdering::Less);
        }
    }
}
