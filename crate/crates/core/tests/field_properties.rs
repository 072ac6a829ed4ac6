use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use cnp_core::exactnum::{sqrt_rational, FieldContext, FieldElement};

const RADICANDS: [u64; 8] = [1, 3, 5, 11, 15, 33, 55, 165];

fn coeffs() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-40i64..=40, 1i64..=12), RADICANDS.len())
}

fn element(ctx: &FieldContext, cs: &[(i64, i64)]) -> FieldElement {
    let mut x = FieldElement::zero(ctx);
    for (&r, &(n, d)) in RADICANDS.iter().zip(cs) {
        let t = FieldElement::term(ctx, BigRational::new(n.into(), d.into()), r).unwrap();
        x = &x + &t;
    }
    x
}

/// Interval for `Σ c·√r` from integer square roots scaled by 2^bits.
fn oracle_sign(cs: &[(i64, i64)]) -> Option<i8> {
    if cs.iter().all(|&(n, _)| n == 0) {
        return Some(0);
    }
    let bits = 256u32;
    let scale = BigUint::from(1u8) << (2 * bits as usize);
    let (mut lo, mut hi) = (BigRational::zero(), BigRational::zero());
    let den = BigRational::from(BigInt::from(BigUint::from(1u8) << bits as usize));
    for (&r, &(n, d)) in RADICANDS.iter().zip(cs) {
        let s = (BigUint::from(r) * &scale).sqrt();
        let a = BigRational::from(BigInt::from(s.clone())) / &den;
        let b = BigRational::from(BigInt::from(s + 1u8)) / &den;
        let c = BigRational::new(n.into(), d.into());
        if c.is_negative() {
            lo += &c * &b;
            hi += &c * &a;
        } else {
            lo += &c * &a;
            hi += &c * &b;
        }
    }
    if lo.is_positive() {
        Some(1)
    } else if hi.is_negative() {
        Some(-1)
    } else {
        None
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ring_axioms(a in coeffs(), b in coeffs(), c in coeffs()) {
        let ctx = FieldContext::standard();
        let (x, y, z) = (element(&ctx, &a), element(&ctx, &b), element(&ctx, &c));
        prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert!((&x - &x).is_zero());
        prop_assert_eq!(&x * &FieldElement::one(&ctx), x.clone());
    }

    #[test]
    fn sign_matches_interval_oracle(a in coeffs()) {
        let ctx = FieldContext::standard();
        let x = element(&ctx, &a);
        let expected = oracle_sign(&a);
        prop_assume!(expected.is_some());
        prop_assert_eq!(Some(x.signum()), expected);
        prop_assert_eq!(x.neg().signum(), -x.signum());
    }

    #[test]
    fn order_agrees_with_subtraction(a in coeffs(), b in coeffs()) {
        let ctx = FieldContext::standard();
        let (x, y) = (element(&ctx, &a), element(&ctx, &b));
        prop_assert_eq!(x.cmp(&y) as i8, (&x - &y).signum());
    }

    #[test]
    fn sqrt_squares_back(n in 1i64..200, d in 1i64..200, r in prop::sample::select(RADICANDS.to_vec())) {
        let ctx = FieldContext::standard();
        let q = BigRational::new((n * n * r as i64).into(), (d * d).into());
        let s = sqrt_rational(&q, &ctx).unwrap();
        prop_assert!(s.signum() > 0);
        prop_assert_eq!(s.square().as_rational(), Some(q));
    }

    #[test]
    fn canonical_form_round_trips(a in coeffs()) {
        let ctx = FieldContext::standard();
        let x = element(&ctx, &a);
        prop_assert_eq!(FieldElement::parse_canonical(&ctx, &x.to_canonical()).unwrap(), x);
    }
}

#[test]
fn sqrt_outside_context_is_rejected() {
    let ctx = FieldContext::standard();
    assert!(sqrt_rational(&BigRational::from(BigInt::from(7)), &ctx).is_err());
    assert!(sqrt_rational(&BigRational::from(BigInt::from(-3)), &ctx).is_err());
}
