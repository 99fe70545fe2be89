//! Algebraic invariants as property tests.

use proptest::prelude::*;
use qkflow::exterior::basis;
use qkflow::structures::{apply, diamond, invert_diamond, iota3, metric_from_form, pairing_components, triple_contract};
use qkflow::{Form, Rational, Scalar, StructureKind};

fn q(n: i64) -> Rational {
    <Rational as Scalar>::from_i64(n)
}

fn form(degree: usize) -> impl Strategy<Value = Form<Rational>> {
    prop::collection::vec(-3i64..=3, basis(degree).len())
        .prop_map(move |c| Form::from_vec(degree, &c.into_iter().map(q).collect::<Vec<_>>()))
}

fn kind() -> impl Strategy<Value = StructureKind> {
    prop_oneof![Just(StructureKind::QK), Just(StructureKind::Spin7)]
}

fn m_element(kind: StructureKind) -> impl Strategy<Value = Form<Rational>> {
    form(2).prop_map(move |a| apply(&kind.standard().lambda2.m().projector, &a))
}

fn sign(k: usize) -> i64 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn wedge_is_graded_commutative(
        (p, qd, a, b) in (0usize..=4, 0usize..=4).prop_flat_map(|(p, qd)| (Just(p), Just(qd), form(p), form(qd)))
    ) {
        prop_assert_eq!(a.wedge(&b), b.wedge(&a).scale_i64(sign(p * qd)));
    }

    #[test]
    fn hodge_star_is_an_involution_up_to_sign((k, a) in (0usize..=8).prop_flat_map(|k| (Just(k), form(k)))) {
        prop_assert_eq!(a.star().star(), a.scale_i64(sign(k)));
    }

    #[test]
    fn lambda2_projectors_split_every_form(kind in kind(), a in form(2)) {
        let pieces = &kind.standard().lambda2.pieces;
        let mut total = Form::zero(2);
        for p in pieces {
            let x = apply(&p.projector, &a);
            prop_assert_eq!(apply(&p.projector, &x), x.clone());
            total = total + x;
        }
        prop_assert_eq!(total, a);
    }

    #[test]
    fn iota3_inverts_diamond_on_m((kind, k) in kind().prop_flat_map(|kind| (Just(kind), m_element(kind)))) {
        let xi = kind.model_form::<Rational>();
        let c = kind.standard().contraction.clone();
        prop_assert_eq!(iota3(&diamond(&k, &xi), &xi), k.scale(&c));
        prop_assert_eq!(invert_diamond(&diamond(&k, &xi), &xi, kind), k);
    }

    #[test]
    fn pairing_has_the_closed_form(a in m_element(StructureKind::QK), b in m_element(StructureKind::QK)) {
        let xi = StructureKind::QK.model_form::<Rational>();
        let pairing = triple_contract(&diamond(&a, &xi), &diamond(&b, &xi));
        prop_assert_eq!(&pairing, &pairing_components(&a, &b, StructureKind::QK));
        prop_assert!(StructureKind::QK.standard().project_m(&pairing).is_zero());
    }

    #[test]
    fn metric_scales_quadratically(kind in kind(), c in 0.3f64..3.0) {
        let g = metric_from_form(&kind.model_form::<f64>().scale(&c.powi(4)), kind).unwrap();
        let err = (g.matrix() - nalgebra::SMatrix::<f64, 8, 8>::identity() * (c * c)).abs().max();
        prop_assert!(err <= 1e-10 * c * c, "error {err}");
    }

    #[test]
    fn lambda4_pieces_sum_to_the_form(a in form(4)) {
        let s = StructureKind::QK.standard();
        let parts = s.lambda4_classify(&a).unwrap();
        let total = parts.iter().fold(Form::zero(4), |acc, (_, p)| acc + p.clone());
        prop_assert_eq!(total, a);
        for (_, p) in &parts {
            let again = s.lambda4_classify(p).unwrap();
            prop_assert_eq!(again.iter().filter(|(_, x)| !x.is_zero()).count(), usize::from(!p.is_zero()));
        }
    }
}
