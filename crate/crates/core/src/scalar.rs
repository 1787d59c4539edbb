//! Complex scalars and nested forward-mode dual numbers.
//!
//! Mode functions are written once against [`Scalar`] and can then be
//! evaluated on plain complex numbers or on `Dual<S>` to obtain directional
//! derivatives. Nesting `Dual<Dual<..>>` gives the repeated Jacobian-vector
//! products needed by word basis functions.

use core::fmt::Debug;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::Float;

pub type C64 = Complex<f64>;

/// Field operations plus the handful of elementary functions mode sets use.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn from_c64(c: C64) -> Self;

    fn from_f64(x: f64) -> Self {
        Self::from_c64(C64::new(x, 0.0))
    }

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    /// Innermost primal value.
    fn primal(&self) -> C64;

    fn scale(self, c: C64) -> Self;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    /// Principal-branch power with a real exponent.
    fn powf(self, p: f64) -> Self;

    fn recip(self) -> Self {
        Self::one() / self
    }
}

impl Scalar for C64 {
    #[inline]
    fn from_c64(c: C64) -> Self {
        c
    }
    #[inline]
    fn primal(&self) -> C64 {
        *self
    }
    #[inline]
    fn scale(self, c: C64) -> Self {
        self * c
    }
    fn sin(self) -> Self {
        Complex::sin(self)
    }
    fn cos(self) -> Self {
        Complex::cos(self)
    }
    fn exp(self) -> Self {
        Complex::exp(self)
    }
    fn powf(self, p: f64) -> Self {
        // Exact for the common integer exponents on the real axis.
        if self.im == 0.0 && self.re >= 0.0 {
            return C64::new(Float::powf(self.re, p), 0.0);
        }
        if p == 1.0 {
            return self;
        }
        if p == 0.0 {
            return C64::new(1.0, 0.0);
        }
        Complex::powf(self, p)
    }
}

/// First-order dual number `re + eps * ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<S> {
    pub re: S,
    pub eps: S,
}

impl<S: Scalar> Dual<S> {
    pub fn new(re: S, eps: S) -> Self {
        Self { re, eps }
    }

    pub fn constant(re: S) -> Self {
        Self { re, eps: S::zero() }
    }

    /// Applies a scalar function given its value and derivative at `re`.
    #[inline]
    fn chain(self, value: S, derivative: S) -> Self {
        Self {
            re: value,
            eps: derivative * self.eps,
        }
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.re * rhs.re, self.re * rhs.eps + self.eps * rhs.re)
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = rhs.re.recip();
        let q = self.re * inv;
        Self::new(q, (self.eps - q * rhs.eps) * inv)
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<S: Scalar> AddAssign for Dual<S> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<S: Scalar> SubAssign for Dual<S> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<S: Scalar> MulAssign for Dual<S> {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    fn from_c64(c: C64) -> Self {
        Self::constant(S::from_c64(c))
    }

    fn primal(&self) -> C64 {
        self.re.primal()
    }

    fn scale(self, c: C64) -> Self {
        Self::new(self.re.scale(c), self.eps.scale(c))
    }

    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }

    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }

    fn powf(self, p: f64) -> Self {
        if p == 0.0 {
            return Self::one();
        }
        let d = self.re.powf(p - 1.0).scale(C64::new(p, 0.0));
        self.chain(self.re.powf(p), d)
    }
}

/// Directional derivative of `f` at `x` along `v`, via one dual level.
pub fn directional_derivative<S, F>(f: F, x: &[S], v: &[S], out: &mut [S])
where
    S: Scalar,
    F: FnOnce(&[Dual<S>], &mut [Dual<S>]),
{
    let lifted: alloc::vec::Vec<Dual<S>> =
        x.iter().zip(v).map(|(&a, &b)| Dual::new(a, b)).collect();
    let mut res = alloc::vec![Dual::<S>::zero(); out.len()];
    f(&lifted, &mut res);
    for (o, r) in out.iter_mut().zip(res) {
        *o = r.eps;
    }
}
