//! Forward-mode differentiation in the domain parameters.
//!
//! [`Jet2`] carries value, gradient and Hessian for a runtime domain
//! dimension k. [`Dual`] is a fixed-size first-order companion used on the
//! quadrature hot path, where only tangent frames are needed. Both implement
//! [`Real`], so every immersion formula is written once and evaluated with
//! plain `f64`, `Dual<K>` or `Jet2`.

use std::ops::{Add, Mul, Neg, Sub};

use smallvec::SmallVec;

use crate::complex_space::{ComplexVector, Coords};
use crate::error::{Error, Result};

/// Scalar arithmetic shared by `f64`, [`Dual`] and [`Jet2`].
pub trait Real:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn value(&self) -> f64;
    /// A constant carrying the same derivative shape as `self`.
    fn lift(&self, c: f64) -> Self;
    fn scale(&self, c: f64) -> Self;
    fn add_const(&self, c: f64) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;
    fn exp(&self) -> Self;
    fn sqrt(&self) -> Result<Self>;
    fn recip(&self) -> Result<Self>;
}

impl Real for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn add_const(&self, c: f64) -> Self {
        self + c
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sinh(&self) -> Self {
        f64::sinh(*self)
    }
    fn cosh(&self) -> Self {
        f64::cosh(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sqrt(&self) -> Result<Self> {
        if *self < 0.0 {
            return Err(Error::Domain {
                function: "sqrt",
                value: *self,
            });
        }
        Ok(f64::sqrt(*self))
    }
    fn recip(&self) -> Result<Self> {
        if *self == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(1.0 / self)
    }
}

// ---------------------------------------------------------------------------
// Dual<K>

/// First-order dual number with K partials, stack allocated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<const K: usize> {
    pub v: f64,
    pub d: [f64; K],
}

impl<const K: usize> Dual<K> {
    pub fn constant(v: f64) -> Self {
        Self { v, d: [0.0; K] }
    }

    pub fn variable(index: usize, v: f64) -> Self {
        let mut d = [0.0; K];
        d[index] = 1.0;
        Self { v, d }
    }

    fn chain(&self, f0: f64, f1: f64) -> Self {
        let mut d = self.d;
        for x in &mut d {
            *x *= f1;
        }
        Self { v: f0, d }
    }
}

impl<const K: usize> Add for Dual<K> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.v += rhs.v;
        for (a, b) in self.d.iter_mut().zip(rhs.d) {
            *a += b;
        }
        self
    }
}

impl<const K: usize> Sub for Dual<K> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.v -= rhs.v;
        for (a, b) in self.d.iter_mut().zip(rhs.d) {
            *a -= b;
        }
        self
    }
}

impl<const K: usize> Mul for Dual<K> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut d = [0.0; K];
        for (i, x) in d.iter_mut().enumerate() {
            *x = self.v * rhs.d[i] + rhs.v * self.d[i];
        }
        Self { v: self.v * rhs.v, d }
    }
}

impl<const K: usize> Neg for Dual<K> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const K: usize> Real for Dual<K> {
    fn value(&self) -> f64 {
        self.v
    }
    fn lift(&self, c: f64) -> Self {
        Self::constant(c)
    }
    fn scale(&self, c: f64) -> Self {
        self.chain(self.v * c, c)
    }
    fn add_const(&self, c: f64) -> Self {
        Self {
            v: self.v + c,
            d: self.d,
        }
    }
    fn sin(&self) -> Self {
        self.chain(self.v.sin(), self.v.cos())
    }
    fn cos(&self) -> Self {
        self.chain(self.v.cos(), -self.v.sin())
    }
    fn sinh(&self) -> Self {
        self.chain(self.v.sinh(), self.v.cosh())
    }
    fn cosh(&self) -> Self {
        self.chain(self.v.cosh(), self.v.sinh())
    }
    fn exp(&self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn sqrt(&self) -> Result<Self> {
        if self.v <= 0.0 {
            return Err(Error::Domain {
                function: "sqrt",
                value: self.v,
            });
        }
        let s = self.v.sqrt();
        Ok(self.chain(s, 0.5 / s))
    }
    fn recip(&self) -> Result<Self> {
        if self.v == 0.0 {
            return Err(Error::DivisionByZero);
        }
        let r = 1.0 / self.v;
        Ok(self.chain(r, -r * r))
    }
}

// ---------------------------------------------------------------------------
// Jet2

/// Value, gradient and Hessian of a function of k domain parameters.
///
/// The Hessian is stored row-major and is always built by filling the upper
/// triangle and mirroring, so it is exactly symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    value: f64,
    grad: SmallVec<[f64; 4]>,
    hess: SmallVec<[f64; 16]>,
}

impl Jet2 {
    pub fn constant(k: usize, value: f64) -> Self {
        Self {
            value,
            grad: smallvec::smallvec![0.0; k],
            hess: smallvec::smallvec![0.0; k * k],
        }
    }

    /// Seeds the coordinate function u_index at `value`.
    pub fn variable(k: usize, index: usize, value: f64) -> Self {
        assert!(index < k, "seed index {index} out of range for k = {k}");
        let mut j = Self::constant(k, value);
        j.grad[index] = 1.0;
        j
    }

    /// Builds a jet from explicit parts; the Hessian is symmetrised from its
    /// upper triangle.
    pub fn from_parts(value: f64, grad: &[f64], hess: &[f64]) -> Result<Self> {
        let k = grad.len();
        if hess.len() != k * k {
            return Err(Error::DimensionMismatch {
                expected: k * k,
                found: hess.len(),
            });
        }
        Ok(Self::build(value, grad.iter().copied().collect(), |a, b| hess[a * k + b]))
    }

    fn build(value: f64, grad: SmallVec<[f64; 4]>, upper: impl Fn(usize, usize) -> f64) -> Self {
        let k = grad.len();
        let mut hess: SmallVec<[f64; 16]> = smallvec::smallvec![0.0; k * k];
        for a in 0..k {
            for b in a..k {
                let h = upper(a, b);
                hess[a * k + b] = h;
                hess[b * k + a] = h;
            }
        }
        Self { value, grad, hess }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    pub fn hess(&self, a: usize, b: usize) -> f64 {
        self.hess[a * self.dim() + b]
    }

    pub fn hess_matrix(&self) -> &[f64] {
        &self.hess
    }

    fn check_dim(&self, other: &Self) {
        assert_eq!(
            self.dim(),
            other.dim(),
            "jets with different domain dimensions combined"
        );
    }

    /// Applies a scalar function given f(v), f′(v), f″(v).
    pub fn compose(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let g = &self.grad;
        Self::build(f0, g.iter().map(|x| f1 * x).collect(), |a, b| {
            f2 * g[a] * g[b] + f1 * self.hess(a, b)
        })
    }

    /// Quotient with an explicit zero check.
    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.clone() * rhs.recip()?)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        self.check_dim(&rhs);
        let grad = self.grad.iter().zip(&rhs.grad).map(|(a, b)| a + b).collect();
        Jet2::build(self.value + rhs.value, grad, |a, b| self.hess(a, b) + rhs.hess(a, b))
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        self.check_dim(&rhs);
        let grad = self.grad.iter().zip(&rhs.grad).map(|(a, b)| a - b).collect();
        Jet2::build(self.value - rhs.value, grad, |a, b| self.hess(a, b) - rhs.hess(a, b))
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        self.check_dim(&rhs);
        let (u, v) = (self.value, rhs.value);
        let (gu, gv) = (&self.grad, &rhs.grad);
        let grad = gu.iter().zip(gv.iter()).map(|(a, b)| u * b + v * a).collect();
        Jet2::build(u * v, grad, |a, b| {
            u * rhs.hess(a, b) + v * self.hess(a, b) + gu[a] * gv[b] + gv[a] * gu[b]
        })
    }
}

/// IEEE semantics on a zero denominator; use [`Jet2::try_div`] for a checked
/// quotient.
impl std::ops::Div for Jet2 {
    type Output = Jet2;
    fn div(self, rhs: Jet2) -> Jet2 {
        let r = 1.0 / rhs.value;
        self * rhs.compose(r, -r * r, 2.0 * r * r * r)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Real for Jet2 {
    fn value(&self) -> f64 {
        self.value
    }
    fn lift(&self, c: f64) -> Self {
        Jet2::constant(self.dim(), c)
    }
    fn scale(&self, c: f64) -> Self {
        self.compose(self.value * c, c, 0.0)
    }
    fn add_const(&self, c: f64) -> Self {
        let mut j = self.clone();
        j.value += c;
        j
    }
    fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.compose(s, c, -s)
    }
    fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.compose(c, -s, -c)
    }
    fn sinh(&self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.compose(s, c, s)
    }
    fn cosh(&self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.compose(c, s, c)
    }
    fn exp(&self) -> Self {
        let e = self.value.exp();
        self.compose(e, e, e)
    }
    fn sqrt(&self) -> Result<Self> {
        if self.value <= 0.0 {
            return Err(Error::Domain {
                function: "sqrt",
                value: self.value,
            });
        }
        let s = self.value.sqrt();
        Ok(self.compose(s, 0.5 / s, -0.25 / (s * self.value)))
    }
    fn recip(&self) -> Result<Self> {
        if self.value == 0.0 {
            return Err(Error::DivisionByZero);
        }
        let r = 1.0 / self.value;
        Ok(self.compose(r, -r * r, 2.0 * r * r * r))
    }
}

// ---------------------------------------------------------------------------
// complex numbers over a Real

/// `re + i·im` with components in any [`Real`].
#[derive(Clone, Debug)]
pub struct Cx<T> {
    pub re: T,
    pub im: T,
}

impl<T: Real> Cx<T> {
    pub fn new(re: T, im: T) -> Self {
        Self { re, im }
    }

    /// e^{i·phase}
    pub fn cis(phase: &T) -> Self {
        Self {
            re: phase.cos(),
            im: phase.sin(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            re: self.re.scale(c),
            im: self.im.scale(c),
        }
    }

    /// Multiplication by a real scalar-valued jet.
    pub fn times(&self, r: &T) -> Self {
        Self {
            re: self.re.clone() * r.clone(),
            im: self.im.clone() * r.clone(),
        }
    }

    pub fn mul_i(&self) -> Self {
        Self {
            re: -self.im.clone(),
            im: self.re.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn abs_sq(&self) -> T {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }
}

impl<T: Real> Mul for Cx<T> {
    type Output = Cx<T>;
    fn mul(self, rhs: Cx<T>) -> Cx<T> {
        Cx {
            re: self.re.clone() * rhs.re.clone() - self.im.clone() * rhs.im.clone(),
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

// ---------------------------------------------------------------------------
// JetPoint

/// The 2-jet of an immersion: one [`Jet2`] per real ambient coordinate.
#[derive(Clone, Debug)]
pub struct JetPoint {
    coords: SmallVec<[Jet2; 8]>,
}

impl JetPoint {
    pub fn new(coords: impl IntoIterator<Item = Jet2>) -> Result<Self> {
        let coords: SmallVec<[Jet2; 8]> = coords.into_iter().collect();
        if coords.len() < 2 || coords.len() % 2 != 0 {
            return Err(Error::MalformedVector(coords.len()));
        }
        let k = coords[0].dim();
        if let Some(bad) = coords.iter().find(|j| j.dim() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: bad.dim(),
            });
        }
        Ok(Self { coords })
    }

    pub fn from_complex(components: Vec<Cx<Jet2>>) -> Result<Self> {
        Self::new(components.into_iter().flat_map(|c| [c.re, c.im]))
    }

    /// Domain dimension k.
    pub fn dim(&self) -> usize {
        self.coords[0].dim()
    }

    /// Ambient complex dimension n.
    pub fn n(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &[Jet2] {
        &self.coords
    }

    pub fn position(&self) -> ComplexVector {
        self.collect(|j| j.value())
    }

    /// ∂F/∂u_a
    pub fn partial(&self, a: usize) -> ComplexVector {
        self.collect(|j| j.grad()[a])
    }

    /// ∂²F/∂u_a∂u_b
    pub fn second_partial(&self, a: usize, b: usize) -> ComplexVector {
        self.collect(|j| j.hess(a, b))
    }

    pub fn tangents(&self) -> SmallVec<[ComplexVector; 4]> {
        (0..self.dim()).map(|a| self.partial(a)).collect()
    }

    fn collect(&self, f: impl Fn(&Jet2) -> f64) -> ComplexVector {
        let coords: Coords = self.coords.iter().map(f).collect();
        ComplexVector::new(coords).expect("JetPoint holds an even coordinate count")
    }
}
