//! Exact arithmetic in multiquadratic fields `Q(√d1, …, √dk)`.
//!
//! An element is stored as a sparse sum `Σ q_r √r` over square-free radicands
//! `r` with rational coefficients `q_r`. Distinct square-free radicals are
//! linearly independent over `Q`, so this representation is canonical: two
//! elements are equal exactly when their coefficient lists are equal, and an
//! element is zero exactly when the list is empty.
//!
//! Every element lives in a [`FieldContext`], a set of radicands closed under
//! taking the square-free part of products. Multiplying two elements of the
//! same context therefore never leaves it.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Largest radicand accepted by [`Radicand::new`].
const MAX_RADICAND: u64 = 1 << 40;

/// Radical precision (bits) used for the first sign-refinement round.
const SIGN_START_BITS: u64 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("field contexts differ: {left} vs {right}")]
    ContextMismatch { left: String, right: String },
    #[error("value is not representable in field context {context}: {what}")]
    NotRepresentable { context: String, what: String },
    #[error("radicand {0} is not a positive square-free integer")]
    BadRadicand(u64),
    #[error("cannot parse field element {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

/// A positive square-free integer; `1` stands for the rational part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Radicand(u64);

impl Radicand {
    pub const ONE: Radicand = Radicand(1);

    pub fn new(value: u64) -> Result<Self, FieldError> {
        if value == 0 || value > MAX_RADICAND || !is_square_free(value) {
            return Err(FieldError::BadRadicand(value));
        }
        Ok(Radicand(value))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// Square-free part of the product and the square root of the removed
    /// square factor: `√a·√b = factor·√part`.
    fn product(self, other: Radicand) -> (Radicand, u64) {
        let g = self.0.gcd(&other.0);
        (Radicand((self.0 / g) * (other.0 / g)), g)
    }
}

impl fmt::Display for Radicand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_square_free(n: u64) -> bool {
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    true
}

/// A closed set of radicands (always containing 1).
#[derive(Clone)]
pub struct FieldContext {
    radicands: Arc<[Radicand]>,
}

impl FieldContext {
    /// The closure of `generators` under square-free products.
    pub fn generated_by(generators: &[u64]) -> Result<Self, FieldError> {
        let mut set = vec![Radicand::ONE];
        for &g in generators {
            let g = Radicand::new(g)?;
            if set.contains(&g) {
                continue;
            }
            let products: Vec<Radicand> = set.iter().map(|r| r.product(g).0).collect();
            for p in products {
                if !set.contains(&p) {
                    set.push(p);
                }
            }
        }
        set.sort();
        Ok(FieldContext {
            radicands: set.into(),
        })
    }

    /// Builds a context from an explicit radicand list, closing it if needed.
    pub fn from_radicands(radicands: &[u64]) -> Result<Self, FieldError> {
        Self::generated_by(radicands)
    }

    /// `Q(√3, √5, √11)`, which holds every coordinate used by the built-in
    /// constructions (θ1, θ3, θ3^½, θ4 and their compositions).
    pub fn standard() -> Self {
        Self::generated_by(&[3, 5, 11]).expect("standard radicands are square-free")
    }

    /// The rationals.
    pub fn rational() -> Self {
        Self::generated_by(&[]).expect("empty generator set")
    }

    pub fn radicands(&self) -> &[Radicand] {
        &self.radicands
    }

    pub fn contains(&self, r: Radicand) -> bool {
        self.radicands.binary_search(&r).is_ok()
    }

    pub fn is_subcontext_of(&self, other: &FieldContext) -> bool {
        self.radicands.iter().all(|&r| other.contains(r))
    }

    fn same(&self, other: &FieldContext) -> bool {
        Arc::ptr_eq(&self.radicands, &other.radicands) || self.radicands == other.radicands
    }

    fn describe(&self) -> String {
        let list: Vec<String> = self.radicands.iter().map(|r| r.to_string()).collect();
        format!("{{{}}}", list.join(","))
    }
}

impl PartialEq for FieldContext {
    fn eq(&self, other: &Self) -> bool {
        self.same(other)
    }
}

impl Eq for FieldContext {}

impl Default for FieldContext {
    fn default() -> Self {
        Self::standard()
    }
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldContext{}", self.describe())
    }
}

/// An exact element `Σ q_r √r` of a multiquadratic field.
#[derive(Clone)]
pub struct FieldElement {
    ctx: FieldContext,
    // Sorted by radicand, no zero coefficients.
    terms: Vec<(Radicand, BigRational)>,
}

impl FieldElement {
    pub fn zero(ctx: &FieldContext) -> Self {
        FieldElement {
            ctx: ctx.clone(),
            terms: Vec::new(),
        }
    }

    pub fn one(ctx: &FieldContext) -> Self {
        Self::from_rational(ctx, BigRational::one())
    }

    pub fn from_rational(ctx: &FieldContext, q: BigRational) -> Self {
        let terms = if q.is_zero() {
            Vec::new()
        } else {
            vec![(Radicand::ONE, q)]
        };
        FieldElement {
            ctx: ctx.clone(),
            terms,
        }
    }

    pub fn from_int(ctx: &FieldContext, n: i64) -> Self {
        Self::from_rational(ctx, BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(ctx: &FieldContext, num: i64, den: i64) -> Self {
        Self::from_rational(ctx, BigRational::new(num.into(), den.into()))
    }

    /// `coeff·√radicand`.
    pub fn term(ctx: &FieldContext, coeff: BigRational, radicand: u64) -> Result<Self, FieldError> {
        let r = Radicand::new(radicand)?;
        if !ctx.contains(r) {
            return Err(FieldError::NotRepresentable {
                context: ctx.describe(),
                what: format!("√{radicand}"),
            });
        }
        let terms = if coeff.is_zero() {
            Vec::new()
        } else {
            vec![(r, coeff)]
        };
        Ok(FieldElement {
            ctx: ctx.clone(),
            terms,
        })
    }

    /// `√radicand` for a square-free radicand of the context.
    pub fn sqrt_of(ctx: &FieldContext, radicand: u64) -> Result<Self, FieldError> {
        Self::term(ctx, BigRational::one(), radicand)
    }

    pub fn context(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.terms.iter().all(|(r, _)| *r == Radicand::ONE)
    }

    /// The rational value when the element has no irrational part.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.as_slice() {
            [] => Some(BigRational::zero()),
            [(r, q)] if *r == Radicand::ONE => Some(q.clone()),
            _ => None,
        }
    }

    pub fn coeff(&self, r: Radicand) -> BigRational {
        self.terms
            .iter()
            .find(|(s, _)| *s == r)
            .map(|(_, q)| q.clone())
            .unwrap_or_else(BigRational::zero)
    }

    /// Radicands with a nonzero coefficient, in increasing order.
    pub fn support(&self) -> impl Iterator<Item = Radicand> + '_ {
        self.terms.iter().map(|(r, _)| *r)
    }

    pub fn terms(&self) -> &[(Radicand, BigRational)] {
        &self.terms
    }

    /// Moves the element to another context that contains its support.
    pub fn with_context(&self, ctx: &FieldContext) -> Result<Self, FieldError> {
        if let Some((r, _)) = self.terms.iter().find(|(r, _)| !ctx.contains(*r)) {
            return Err(FieldError::NotRepresentable {
                context: ctx.describe(),
                what: format!("√{r}"),
            });
        }
        Ok(FieldElement {
            ctx: ctx.clone(),
            terms: self.terms.clone(),
        })
    }

    fn check_ctx(&self, other: &FieldElement) -> Result<(), FieldError> {
        if self.ctx.same(&other.ctx) {
            Ok(())
        } else {
            Err(FieldError::ContextMismatch {
                left: self.ctx.describe(),
                right: other.ctx.describe(),
            })
        }
    }

    pub fn checked_add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check_ctx(other)?;
        Ok(self.combine(other, false))
    }

    pub fn checked_sub(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check_ctx(other)?;
        Ok(self.combine(other, true))
    }

    pub fn checked_mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check_ctx(other)?;
        let mut acc: Vec<(Radicand, BigRational)> =
            Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ra, qa) in &self.terms {
            for (rb, qb) in &other.terms {
                let (r, factor) = ra.product(*rb);
                if !self.ctx.contains(r) {
                    return Err(FieldError::NotRepresentable {
                        context: self.ctx.describe(),
                        what: format!("√{r} from √{ra}·√{rb}"),
                    });
                }
                let mut q = qa * qb;
                if factor != 1 {
                    q *= BigRational::from_integer(BigInt::from(factor));
                }
                acc.push((r, q));
            }
        }
        acc.sort_by(|a, b| a.0.cmp(&b.0));
        let mut terms: Vec<(Radicand, BigRational)> = Vec::with_capacity(acc.len());
        for (r, q) in acc {
            match terms.last_mut() {
                Some((last, sum)) if *last == r => *sum += q,
                _ => terms.push((r, q)),
            }
        }
        terms.retain(|(_, q)| !q.is_zero());
        Ok(FieldElement {
            ctx: self.ctx.clone(),
            terms,
        })
    }

    fn combine(&self, other: &FieldElement, subtract: bool) -> FieldElement {
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let ord = match (self.terms.get(i), other.terms.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    terms.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    let (r, q) = &other.terms[j];
                    terms.push((*r, if subtract { -q } else { q.clone() }));
                    j += 1;
                }
                Ordering::Equal => {
                    let (r, qa) = &self.terms[i];
                    let qb = &other.terms[j].1;
                    let q = if subtract { qa - qb } else { qa + qb };
                    if !q.is_zero() {
                        terms.push((*r, q));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        FieldElement {
            ctx: self.ctx.clone(),
            terms,
        }
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(r, q)| (*r, -q)).collect(),
        }
    }

    pub fn scale(&self, s: &BigRational) -> FieldElement {
        if s.is_zero() {
            return FieldElement::zero(&self.ctx);
        }
        FieldElement {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(r, q)| (*r, q * s)).collect(),
        }
    }

    pub fn square(&self) -> FieldElement {
        self * self
    }

    /// Exact sign. Zero is decided structurally; otherwise each radical is
    /// enclosed at 32 bits of precision, doubling until the enclosure of the
    /// sum excludes zero.
    pub fn signum(&self) -> i8 {
        if self.is_zero() {
            return 0;
        }
        if let [(r, q)] = self.terms.as_slice() {
            // A single term has the sign of its coefficient.
            let _ = r;
            return if q.is_positive() { 1 } else { -1 };
        }
        let mut bits = SIGN_START_BITS;
        loop {
            let (lo, hi) = self.rational_enclosure(bits);
            if lo.is_positive() {
                return 1;
            }
            if hi.is_negative() {
                return -1;
            }
            bits *= 2;
        }
    }

    /// Rational bounds `lo ≤ self ≤ hi`, each radical known to `bits` bits.
    pub fn rational_enclosure(&self, bits: u64) -> (BigRational, BigRational) {
        let mut lo = BigRational::zero();
        let mut hi = BigRational::zero();
        for (r, q) in &self.terms {
            if *r == Radicand::ONE {
                lo += q;
                hi += q;
                continue;
            }
            let (s_lo, s_hi) = sqrt_bounds(r.0, bits);
            if q.is_positive() {
                lo += q * &s_lo;
                hi += q * &s_hi;
            } else {
                lo += q * &s_hi;
                hi += q * &s_lo;
            }
        }
        (lo, hi)
    }

    /// Floating-point bounds guaranteed to contain the exact value.
    pub fn f64_enclosure(&self) -> (f64, f64) {
        let (lo, hi) = self.rational_enclosure(64);
        (round_down(&lo), round_up(&hi))
    }

    /// Nearest-ish `f64`; for display and layout only.
    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = self.rational_enclosure(64);
        ((lo + hi) / BigRational::from_integer(2.into()))
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    /// Decimal approximation with `digits` fractional digits (truncated toward
    /// zero after enclosing the value to well beyond that precision).
    pub fn to_decimal(&self, digits: usize) -> String {
        let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u64 + 16;
        let (lo, hi) = self.rational_enclosure(bits.max(SIGN_START_BITS));
        let mid = (lo + hi) / BigRational::from_integer(2.into());
        format_decimal(&mid, digits)
    }

    /// Canonical machine form: `num/den:radicand` terms in increasing radicand
    /// order separated by commas, or `0`.
    pub fn to_canonical(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(r, q)| format!("{}/{}:{}", q.numer(), q.denom(), r))
            .collect();
        parts.join(",")
    }

    /// Parses the canonical form; a term without `:radicand` is rational.
    pub fn parse_canonical(ctx: &FieldContext, input: &str) -> Result<Self, FieldError> {
        let err = |reason: &str| FieldError::Parse {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let s = input.trim();
        if s.is_empty() {
            return Err(err("empty"));
        }
        let mut acc = FieldElement::zero(ctx);
        if s == "0" {
            return Ok(acc);
        }
        for part in s.split(',') {
            let (q, r) = match part.split_once(':') {
                Some((q, r)) => (q, r.trim().parse::<u64>().map_err(|_| err("bad radicand"))?),
                None => (part, 1),
            };
            let q = parse_rational(q.trim()).ok_or_else(|| err("bad rational"))?;
            let t = FieldElement::term(ctx, q, r).map_err(|e| err(&e.to_string()))?;
            acc = &acc + &t;
        }
        Ok(acc)
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.trim().parse().ok()?)),
    }
}

/// Bounds on `√d` with denominator `2^bits`.
fn sqrt_bounds(d: u64, bits: u64) -> (BigRational, BigRational) {
    let scaled = BigInt::from(d) << (2 * bits);
    let s = scaled.sqrt();
    let den = BigInt::one() << bits;
    let lo = BigRational::new(s.clone(), den.clone());
    let hi = if &s * &s == scaled {
        lo.clone()
    } else {
        BigRational::new(s + 1, den)
    };
    (lo, hi)
}

fn round_down(q: &BigRational) -> f64 {
    let v = q.to_f64().unwrap_or(f64::NEG_INFINITY);
    v - v.abs() * 1e-15 - 1e-300
}

fn round_up(q: &BigRational) -> f64 {
    let v = q.to_f64().unwrap_or(f64::INFINITY);
    v + v.abs() * 1e-15 + 1e-300
}

fn format_decimal(q: &BigRational, digits: usize) -> String {
    let neg = q.is_negative();
    let a = q.abs();
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = (a * BigRational::from_integer(scale.clone())).to_integer();
    let (int, frac) = scaled.div_rem(&scale);
    let mut out = String::new();
    if neg && !(int.is_zero() && frac.is_zero()) {
        out.push('-');
    }
    out.push_str(&int.to_string());
    if digits > 0 {
        let f = frac.to_string();
        out.push('.');
        out.push_str(&"0".repeat(digits - f.len()));
        out.push_str(&f);
    }
    out
}

/// `√q` for a nonnegative rational, if it lies in `ctx`.
pub fn sqrt_rational(q: &BigRational, ctx: &FieldContext) -> Result<FieldElement, FieldError> {
    let not_rep = |what: String| FieldError::NotRepresentable {
        context: ctx.describe(),
        what,
    };
    if q.is_negative() {
        return Err(not_rep(format!("√({q}) of a negative number")));
    }
    if q.is_zero() {
        return Ok(FieldElement::zero(ctx));
    }
    // √(n/d) = √(n·d)/d
    let nd = q.numer() * q.denom();
    let (square_root, free) = square_free_decompose(&nd);
    let free = free
        .to_u64()
        .filter(|&f| f <= MAX_RADICAND)
        .ok_or_else(|| not_rep(format!("√({q})")))?;
    let r = Radicand::new(free).map_err(|_| not_rep(format!("√({q})")))?;
    if !ctx.contains(r) {
        return Err(not_rep(format!("√({q}) needs √{free}")));
    }
    let coeff = BigRational::new(square_root, q.denom().clone());
    let root = FieldElement::term(ctx, coeff, free)?;
    if &root.square().as_rational().unwrap_or_default() != q {
        return Err(not_rep(format!("√({q})")));
    }
    Ok(root)
}

/// Writes `n = s²·f`, returning `(s, f)` with `f` square-free whenever the
/// trial division bound suffices (the caller re-verifies).
fn square_free_decompose(n: &BigInt) -> (BigInt, BigInt) {
    let mut m = n.magnitude().clone();
    let mut s = num_bigint::BigUint::one();
    let mut f = num_bigint::BigUint::one();
    let mut p = 2u64;
    while p < 1_000_000 {
        let pb = num_bigint::BigUint::from(p);
        if &pb * &pb > m {
            break;
        }
        let mut e = 0;
        while (&m % &pb).is_zero() {
            m /= &pb;
            e += 1;
        }
        for _ in 0..e / 2 {
            s *= &pb;
        }
        if e % 2 == 1 {
            f *= &pb;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let r = m.sqrt();
    if &r * &r == m {
        s *= r;
    } else {
        f *= m;
    }
    (
        BigInt::from_biguint(Sign::Plus, s),
        BigInt::from_biguint(Sign::Plus, f),
    )
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for FieldElement {}

impl std::hash::Hash for FieldElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.terms.hash(state);
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Numeric order (exact).
impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        match self.combine(other, true).signum() {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        }
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<'a> std::ops::$tr<&'a FieldElement> for &'a FieldElement {
            type Output = FieldElement;
            /// Panics when the operands belong to different contexts; use the
            /// `checked_*` methods to handle that case.
            fn $method(self, rhs: &'a FieldElement) -> FieldElement {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl std::ops::$tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl std::ops::Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}

impl std::ops::Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(&self)
    }
}

/// Human-readable form such as `1/2 + (1/6)√33`.
impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (r, q)) in self.terms.iter().enumerate() {
            let mag = q.abs();
            if i == 0 {
                if q.is_negative() {
                    write!(f, "-")?;
                }
            } else if q.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if *r == Radicand::ONE {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "√{r}")?;
            } else if mag.is_integer() {
                write!(f, "{mag}√{r}")?;
            } else {
                write!(f, "({mag})√{r}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses the canonical form in the standard context.
impl FromStr for FieldElement {
    type Err = FieldError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FieldElement::parse_canonical(&FieldContext::standard(), s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> FieldContext {
        FieldContext::standard()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn el(s: &str) -> FieldElement {
        FieldElement::parse_canonical(&ctx(), s).unwrap()
    }

    #[test]
    fn standard_context_is_closed() {
        let c = ctx();
        let got: Vec<u64> = c.radicands().iter().map(|r| r.get()).collect();
        assert_eq!(got, vec![1, 3, 5, 11, 15, 33, 55, 165]);
        let c2 = FieldContext::generated_by(&[3, 11]).unwrap();
        let got: Vec<u64> = c2.radicands().iter().map(|r| r.get()).collect();
        assert_eq!(got, vec![1, 3, 11, 33]);
    }

    #[test]
    fn radicand_rejects_squares() {
        assert!(Radicand::new(12).is_err());
        assert!(Radicand::new(0).is_err());
        assert!(Radicand::new(30).is_ok());
    }

    #[test]
    fn add_examples() {
        // (1+√3) + (2−√3) = 3
        let a = el("1:1,1:3");
        let b = el("2:1,-1:3");
        assert_eq!(&a + &b, FieldElement::from_int(&ctx(), 3));
        let z = FieldElement::zero(&ctx());
        assert_eq!(&a + &z, a);
        let s = el("1/6:3");
        assert_eq!(&s + &s, el("1/3:3"));
    }

    #[test]
    fn mul_examples() {
        let r3 = FieldElement::sqrt_of(&ctx(), 3).unwrap();
        let r11 = FieldElement::sqrt_of(&ctx(), 11).unwrap();
        assert_eq!(&r3 * &r11, FieldElement::sqrt_of(&ctx(), 33).unwrap());
        let a = el("1:1,1:3");
        assert_eq!(&a * &a, el("4:1,2:3"));
        let p = el("1/6:1,1/6:33");
        let m = el("-1/6:1,1/6:33");
        assert_eq!(&p * &m, FieldElement::from_ratio(&ctx(), 8, 9));
    }

    #[test]
    fn mul_context_mismatch() {
        let small = FieldContext::generated_by(&[3]).unwrap();
        let a = FieldElement::sqrt_of(&small, 3).unwrap();
        let b = FieldElement::sqrt_of(&ctx(), 3).unwrap();
        assert!(matches!(
            a.checked_mul(&b),
            Err(FieldError::ContextMismatch { .. })
        ));
        assert!(matches!(
            a.checked_add(&b),
            Err(FieldError::ContextMismatch { .. })
        ));
    }

    #[test]
    fn sign_examples() {
        assert_eq!(FieldElement::zero(&ctx()).signum(), 0);
        assert_eq!(el("2:1,-1:3").signum(), 1);
        // √3 + √11 − √15 ≈ 1.7321 + 3.3166 − 3.8730 = 1.1757
        assert_eq!(el("1:3,1:11,-1:15").signum(), 1);
        assert_eq!(el("-1:3,-1:11,1:15").signum(), -1);
    }

    #[test]
    fn sign_of_tiny_difference() {
        // 4·√15 = √240 is just below 15.5; 15.5 − 4√15 ≈ 0.008
        let e = el("31/2:1,-4:15");
        assert_eq!(e.signum(), 1);
        // (√33 − √3·√11) is zero exactly
        let r3 = FieldElement::sqrt_of(&ctx(), 3).unwrap();
        let r11 = FieldElement::sqrt_of(&ctx(), 11).unwrap();
        let r33 = FieldElement::sqrt_of(&ctx(), 33).unwrap();
        assert_eq!((&r33 - &(&r3 * &r11)).signum(), 0);
    }

    #[test]
    fn sqrt_rational_examples() {
        let c = FieldContext::generated_by(&[3, 11]).unwrap();
        let r = sqrt_rational(&q(11, 12), &c).unwrap();
        assert_eq!(r, FieldElement::parse_canonical(&c, "1/6:33").unwrap());
        let two = sqrt_rational(&q(4, 1), &c).unwrap();
        assert_eq!(two, FieldElement::from_int(&c, 2));
        assert!(matches!(
            sqrt_rational(&q(1, 2), &c),
            Err(FieldError::NotRepresentable { .. })
        ));
        assert!(sqrt_rational(&q(-1, 1), &c).is_err());
        assert!(sqrt_rational(&q(0, 1), &c).unwrap().is_zero());
    }

    #[test]
    fn canonical_round_trip_and_display() {
        let e = el("1/2:1,-1/6:33");
        assert_eq!(e.to_canonical(), "1/2:1,-1/6:33");
        assert_eq!(e.to_string(), "1/2 - (1/6)√33");
        assert_eq!(FieldElement::zero(&ctx()).to_canonical(), "0");
        assert_eq!(el("3/6:3").to_canonical(), "1/2:3");
        assert!(FieldElement::parse_canonical(&ctx(), "1/0").is_err());
        assert!(FieldElement::parse_canonical(&ctx(), "1:7").is_err());
    }

    #[test]
    fn decimal_approximation() {
        let r3 = FieldElement::sqrt_of(&ctx(), 3).unwrap();
        assert_eq!(r3.to_decimal(30), "1.732050807568877293527446341505");
        assert_eq!(r3.neg().to_decimal(3), "-1.732");
        assert_eq!(
            FieldElement::from_ratio(&ctx(), 1, 3).to_decimal(4),
            "0.3333"
        );
    }

    #[test]
    fn ordering_is_numeric() {
        let a = el("1:15");
        let b = el("1:3,1:5");
        assert!(a < b);
        let (lo, hi) = b.f64_enclosure();
        assert!(3.9681 <= lo && lo <= hi && hi <= 3.9682);
    }
}
