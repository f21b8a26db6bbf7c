//! Property tests for the tower arithmetic: the exact identities that the
//! Zech-log representation must satisfy against polynomial arithmetic.

use charforge_core::chars::MultChar;
use charforge_core::ff::{build_field, Elem, Tower};
use proptest::prelude::*;
use std::sync::Arc;

fn field_and_codes() -> impl Strategy<Value = (Arc<Tower>, u64, u64, u64)> {
    prop_oneof![
        Just((3u64, 2u32)),
        Just((3, 3)),
        Just((3, 4)),
        Just((5, 2)),
        Just((7, 2)),
        Just((5, 3)),
    ]
    .prop_flat_map(|(p, e)| {
        let t = build_field(p, e).unwrap();
        let size = t.size();
        (Just(t), 0..size, 0..size, 0..size)
    })
}

proptest! {
    #[test]
    fn ring_axioms((t, a, b, c) in field_and_codes()) {
        let x = t.from_code(a).unwrap();
        let y = t.from_code(b).unwrap();
        let z = t.from_code(c).unwrap();
        // commutativity and associativity of addition
        prop_assert_eq!(t.add(x, y), t.add(y, x));
        prop_assert_eq!(t.add(t.add(x, y), z), t.add(x, t.add(y, z)));
        // distributivity
        prop_assert_eq!(t.mul(x, t.add(y, z)), t.add(t.mul(x, y), t.mul(x, z)));
        // additive inverse
        prop_assert_eq!(t.add(x, t.neg(x)), Elem::Zero);
        // multiplicative inverse off zero
        if !x.is_zero() {
            prop_assert_eq!(t.mul(x, t.inv(x).unwrap()), t.one());
        }
    }

    #[test]
    fn norm_is_multiplicative((t, a, b, _c) in field_and_codes()) {
        let e = t.rel_deg();
        let x = t.from_code(a).unwrap();
        let y = t.from_code(b).unwrap();
        for to in 1..=e {
            if e % to != 0 {
                continue;
            }
            let nxy = t.norm(t.mul(x, y), e, to).unwrap();
            let nx_ny = t.mul(t.norm(x, e, to).unwrap(), t.norm(y, e, to).unwrap());
            prop_assert_eq!(nxy, nx_ny);
        }
    }

    #[test]
    fn trace_is_additive_and_linear((t, a, b, c) in field_and_codes()) {
        let e = t.rel_deg();
        let x = t.from_code(a).unwrap();
        let y = t.from_code(b).unwrap();
        for to in 1..=e {
            if e % to != 0 {
                continue;
            }
            let lhs = t.trace(t.add(x, y), e, to).unwrap();
            let rhs = t.add(t.trace(x, e, to).unwrap(), t.trace(y, e, to).unwrap());
            prop_assert_eq!(lhs, rhs);
            // linearity over the target subfield
            let s = t.from_code(c % t.p()).unwrap(); // prime-field scalar
            let lhs = t.trace(t.mul(s, x), e, to).unwrap();
            let rhs = t.mul(s, t.trace(x, e, to).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn frobenius_fixes_subfields((t, a, _b, _c) in field_and_codes()) {
        let e = t.rel_deg();
        let x = t.from_code(a).unwrap();
        for to in 1..=e {
            if e % to != 0 {
                continue;
            }
            let n = t.norm(x, e, to).unwrap();
            // norms land in the subfield and are fixed by its Frobenius
            prop_assert!(t.in_level(n, to).unwrap());
            prop_assert_eq!(t.frobenius(n, to), n);
        }
    }

    #[test]
    fn characters_are_multiplicative((t, a, b, c) in field_and_codes()) {
        let e = t.rel_deg();
        let chi = MultChar::new(&t, e, c).unwrap();
        let x = t.from_code(a).unwrap();
        let y = t.from_code(b).unwrap();
        if !x.is_zero() && !y.is_zero() {
            let lhs = chi.eval(&t, t.mul(x, y)).unwrap();
            let rhs = chi.eval(&t, x).unwrap() * chi.eval(&t, y).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn code_roundtrip((t, a, _b, _c) in field_and_codes()) {
        let x = t.from_code(a).unwrap();
        prop_assert_eq!(t.code_of(x), a);
    }
}
