//! Property tests for the dense kernel: structural invariants on random
//! operators, plus exact parity with the naive index-loop references.

use ndarray::Array2;
use proptest::prelude::*;

use qtrace_core::multiop::{C64, MultiOp};
use qtrace_core::oracle;
use qtrace_core::space::{Label, Space};

fn aux(label: &str) -> Space {
    Space::auxiliary(label, 2, C64::new(0.0, 0.0))
}

fn op_from(values: &[f64], spaces: Vec<Space>) -> MultiOp {
    let d: usize = spaces.iter().map(|s| s.dim).product();
    assert_eq!(values.len(), 2 * d * d);
    let mut mat = Array2::zeros((d, d));
    for r in 0..d {
        for c in 0..d {
            let k = 2 * (r * d + c);
            mat[(r, c)] = C64::new(values[k], values[k + 1]);
        }
    }
    MultiOp::new(spaces, mat).unwrap()
}

fn entries(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 2 * n * n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Embedding into a common target is multiplicative.
    #[test]
    fn embed_is_a_homomorphism(a in entries(2), b in entries(2)) {
        let s1 = aux("1");
        let s2 = aux("2");
        let target = vec![s1.clone(), s2.clone()];
        let oa = op_from(&a, vec![s1.clone()]);
        let ob = op_from(&b, vec![s1.clone()]);
        let prod_then_embed = MultiOp::compose(&oa, &ob).unwrap().embed(&target).unwrap();
        let embed_then_prod = MultiOp::compose(
            &oa.embed(&target).unwrap(),
            &ob.embed(&target).unwrap(),
        )
        .unwrap();
        prop_assert!(
            MultiOp::rel_residual(&prod_then_embed, &embed_then_prod).unwrap() < 1e-13
        );
    }

    /// Tracing commutes with operators supported on the untraced spaces.
    #[test]
    fn trace_commutes_with_untraced_factors(a in entries(4), c in entries(2)) {
        let s1 = aux("1");
        let s2 = aux("2");
        let oa = op_from(&a, vec![s1.clone(), s2.clone()]);
        let oc = op_from(&c, vec![s2.clone()]);
        let lhs = MultiOp::compose(&oa, &oc)
            .unwrap()
            .partial_trace(&[Label::from("1")])
            .unwrap();
        let rhs = MultiOp::compose(
            &oa.partial_trace(&[Label::from("1")]).unwrap(),
            &oc,
        )
        .unwrap();
        prop_assert!(MultiOp::rel_residual(&lhs, &rhs).unwrap() < 1e-13);
    }

    /// A partial transpose is invisible under the full trace of the same
    /// subset.
    #[test]
    fn transpose_invisible_under_trace(a in entries(4)) {
        let s1 = aux("1");
        let s2 = aux("2");
        let sub = vec![Label::from("1")];
        let oa = op_from(&a, vec![s1, s2]);
        let lhs = oa.partial_transpose(&sub).unwrap().partial_trace(&sub).unwrap();
        let rhs = oa.partial_trace(&sub).unwrap();
        prop_assert!(MultiOp::rel_residual(&lhs, &rhs).unwrap() < 1e-13);
    }

    /// Cyclicity within the traced subset for factors supported on it.
    #[test]
    fn cyclicity_within_traced_subset(a in entries(2), b in entries(2), x in entries(2)) {
        let s = aux("s");
        let q = Space::quantum("q", 2);
        let oa = op_from(&a, vec![s.clone()]);
        let ob = op_from(&b, vec![s.clone()]);
        let ox = op_from(&x, vec![q.clone()]);
        let sub = vec![Label::from("s")];
        let lhs = MultiOp::product(&[oa.clone(), ob.clone(), ox.clone()])
            .unwrap()
            .partial_trace(&sub)
            .unwrap();
        let rhs = MultiOp::product(&[ob, oa, ox])
            .unwrap()
            .partial_trace(&sub)
            .unwrap();
        prop_assert!(MultiOp::rel_residual(&lhs, &rhs).unwrap() < 1e-13);
    }

    /// Kernel operations agree with the naive index-loop references
    /// entrywise on three-space operators.
    #[test]
    fn kernel_matches_oracle(a in entries(4), b in entries(4)) {
        let spaces: Vec<Space> = vec![aux("1"), aux("2"), aux("3")];
        let oa = op_from(&a, vec![spaces[0].clone(), spaces[1].clone()]);
        let ob = op_from(&b, vec![spaces[1].clone(), spaces[2].clone()]);

        let embedded = oa.embed(&spaces).unwrap();
        prop_assert!(oracle::max_abs_diff(embedded.matrix(), &oracle::embed_oracle(&oa, &spaces)) <= 1e-14);

        let composed = MultiOp::compose(&oa, &ob).unwrap();
        let (ospaces, omat) = oracle::compose_oracle(&oa, &ob);
        let aligned = composed
            .permute_to(&ospaces.iter().map(|s| s.label.clone()).collect::<Vec<_>>())
            .unwrap();
        prop_assert!(oracle::max_abs_diff(aligned.matrix(), &omat) <= 1e-14);

        let sub = vec![Label::from("2")];
        let pt = oa.partial_transpose(&sub).unwrap();
        prop_assert!(oracle::max_abs_diff(pt.matrix(), &oracle::partial_transpose_oracle(&oa, &sub)) <= 1e-14);

        let tr = oa.partial_trace(&sub).unwrap();
        let (_, omat) = oracle::partial_trace_oracle(&oa, &sub);
        prop_assert!(oracle::max_abs_diff(tr.matrix(), &omat) <= 1e-14);
    }

    /// The delta-identity coefficient match is exact for random Laurent
    /// polynomials in the stated exponent window.
    #[test]
    fn delta_identity_exact_on_random_laurent(
        fre in prop::collection::vec(-1.0f64..1.0, 7),
        fim in prop::collection::vec(-1.0f64..1.0, 7),
        gre in prop::collection::vec(-1.0f64..1.0, 7),
        gim in prop::collection::vec(-1.0f64..1.0, 7),
    ) {
        use qtrace_core::laurent::{verify_delta_identity, Laurent};
        let build = |re: &[f64], im: &[f64]| {
            Laurent::new((-3..=3i64).zip(re.iter().zip(im)).map(|(e, (&r, &i))| (e, C64::new(r, i))))
        };
        let f = build(&fre, &fim);
        let g = build(&gre, &gim);
        prop_assert!(verify_delta_identity(&f, &g, 6) <= 1e-14);
    }
}
