//! Exact planar points and rotations about the origin.

use std::fmt;

use num_rational::BigRational;
use num_traits::One;

use crate::exactnum::{sqrt_rational, FieldContext, FieldElement, FieldError};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: FieldElement,
    pub y: FieldElement,
}

impl Point {
    pub fn new(x: FieldElement, y: FieldElement) -> Result<Self, FieldError> {
        if x.context() != y.context() {
            return Err(FieldError::ContextMismatch {
                left: format!("{:?}", x.context()),
                right: format!("{:?}", y.context()),
            });
        }
        Ok(Point { x, y })
    }

    pub fn origin(ctx: &FieldContext) -> Self {
        Point {
            x: FieldElement::zero(ctx),
            y: FieldElement::zero(ctx),
        }
    }

    pub fn from_ratios(ctx: &FieldContext, x: (i64, i64), y: (i64, i64)) -> Self {
        Point {
            x: FieldElement::from_ratio(ctx, x.0, x.1),
            y: FieldElement::from_ratio(ctx, y.0, y.1),
        }
    }

    pub fn context(&self) -> &FieldContext {
        self.x.context()
    }

    pub fn is_origin(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn add(&self, other: &Point) -> Point {
        Point {
            x: &self.x + &other.x,
            y: &self.y + &other.y,
        }
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point {
            x: &self.x - &other.x,
            y: &self.y - &other.y,
        }
    }

    /// Reflection in the horizontal axis.
    pub fn reflect_x(&self) -> Point {
        Point {
            x: self.x.clone(),
            y: self.y.neg(),
        }
    }

    pub fn norm_sq(&self) -> FieldElement {
        &self.x.square() + &self.y.square()
    }

    /// Canonical key `x;y` in the machine field-element syntax.
    pub fn canonical_key(&self) -> String {
        format!("{};{}", self.x.to_canonical(), self.y.to_canonical())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Exact squared Euclidean distance.
pub fn dist_sq(p: &Point, q: &Point) -> FieldElement {
    p.sub(q).norm_sq()
}

pub fn unit_distance(p: &Point, q: &Point) -> bool {
    let d = dist_sq(p, q);
    d.as_rational().is_some_and(|r| r.is_one())
}

/// A rotation about the origin with `cos² + sin² = 1` exactly.
#[derive(Clone, PartialEq, Eq)]
pub struct Rotation {
    cos: FieldElement,
    sin: FieldElement,
}

/// A rotation exponent `k`, an integer or a half-integer, stored as `2k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exponent {
    twice: i32,
}

impl Exponent {
    pub fn int(k: i32) -> Self {
        Exponent { twice: 2 * k }
    }

    /// `halves / 2`.
    pub fn halves(halves: i32) -> Self {
        Exponent { twice: halves }
    }
}

impl Rotation {
    pub fn new(cos: FieldElement, sin: FieldElement) -> Result<Self, FieldError> {
        let norm = &cos.square() + &sin.square();
        if !norm.as_rational().is_some_and(|r| r.is_one()) {
            return Err(FieldError::NotRepresentable {
                context: format!("{:?}", cos.context()),
                what: format!("rotation with cos²+sin² = {norm}"),
            });
        }
        Ok(Rotation { cos, sin })
    }

    pub fn identity(ctx: &FieldContext) -> Self {
        Rotation {
            cos: FieldElement::one(ctx),
            sin: FieldElement::zero(ctx),
        }
    }

    /// θ_i: the rotation by `arccos((2i−1)/(2i))`. It moves every point at
    /// distance `√i` from the origin by exactly one unit.
    pub fn theta(i: u32, ctx: &FieldContext) -> Result<Self, FieldError> {
        assert!(i > 0, "theta index must be positive");
        let i = i as i64;
        let cos = FieldElement::from_ratio(ctx, 2 * i - 1, 2 * i);
        // sin = √(4i−1)/(2i)
        let sin = sqrt_rational(
            &BigRational::new((4 * i - 1).into(), (4 * i * i).into()),
            ctx,
        )?;
        Rotation::new(cos, sin)
    }

    pub fn cos(&self) -> &FieldElement {
        &self.cos
    }

    pub fn sin(&self) -> &FieldElement {
        &self.sin
    }

    pub fn context(&self) -> &FieldContext {
        self.cos.context()
    }

    pub fn inverse(&self) -> Rotation {
        Rotation {
            cos: self.cos.clone(),
            sin: self.sin.neg(),
        }
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Rotation) -> Rotation {
        Rotation {
            cos: &(&self.cos * &other.cos) - &(&self.sin * &other.sin),
            sin: &(&self.sin * &other.cos) + &(&self.cos * &other.sin),
        }
    }

    /// The half-angle rotation. Only defined when the cosine is rational.
    pub fn half(&self) -> Result<Rotation, FieldError> {
        let ctx = self.context();
        let c = self
            .cos
            .as_rational()
            .ok_or_else(|| FieldError::NotRepresentable {
                context: format!("{ctx:?}"),
                what: format!(
                    "half angle of a rotation with irrational cosine {}",
                    self.cos
                ),
            })?;
        let two = BigRational::from_integer(2.into());
        let one = BigRational::one();
        let cos_half = sqrt_rational(&((&one + &c) / &two), ctx)?;
        let mut sin_half = sqrt_rational(&((&one - &c) / &two), ctx)?;
        // θ ∈ (−π, π]; θ/2 takes the sign of sin θ, and θ = π halves to π/2.
        if self.sin.signum() < 0 {
            sin_half = sin_half.neg();
        }
        Rotation::new(cos_half, sin_half)
    }

    /// `self^k` for integer or half-integer `k`; negative powers invert.
    pub fn power(&self, k: Exponent) -> Result<Rotation, FieldError> {
        let base = if k.twice % 2 != 0 {
            self.half()?
        } else {
            self.clone()
        };
        let steps = if k.twice % 2 != 0 {
            k.twice
        } else {
            k.twice / 2
        };
        let base = if steps < 0 { base.inverse() } else { base };
        let mut n = steps.unsigned_abs();
        let mut acc = Rotation::identity(self.context());
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.then(&sq);
            }
            n >>= 1;
            if n > 0 {
                sq = sq.then(&sq);
            }
        }
        Ok(acc)
    }

    pub fn apply(&self, p: &Point) -> Point {
        Point {
            x: &(&p.x * &self.cos) - &(&p.y * &self.sin),
            y: &(&p.x * &self.sin) + &(&p.y * &self.cos),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.sin.is_zero() && self.cos.as_rational().is_some_and(|c| c.is_one())
    }
}

impl fmt::Debug for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rotation(cos {}, sin {})", self.cos, self.sin)
    }
}
