//! Flat ℂⁿ viewed as ℝ²ⁿ with interleaved coordinates `(x¹, y¹, …, xⁿ, yⁿ)`.
//!
//! The complex structure `J`, the symplectic form `ω = Σ dxⁱ∧dyⁱ` and the
//! holomorphic volume form `dz¹∧⋯∧dzⁿ` all act slot by slot on this layout.

use std::f64::consts::PI;
use std::ops::{Add, Index, Mul, Neg, Sub};

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Inline storage covers n ≤ 4 without touching the heap.
pub type Coords = SmallVec<[f64; 8]>;

/// A point or tangent vector of ℂⁿ stored as 2n reals.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector {
    coords: Coords,
}

/// Points and vectors share a layout; the alias only documents intent.
pub type ComplexPoint = ComplexVector;

impl ComplexVector {
    pub fn new(coords: impl Into<Coords>) -> Result<Self> {
        let coords = coords.into();
        if coords.len() < 2 || coords.len() % 2 != 0 {
            return Err(Error::MalformedVector(coords.len()));
        }
        Ok(Self { coords })
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(Coords::from_slice(coords))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "ambient complex dimension must be positive");
        Self {
            coords: smallvec::smallvec![0.0; 2 * n],
        }
    }

    pub fn from_complex(z: &[Complex64]) -> Self {
        assert!(!z.is_empty(), "ambient complex dimension must be positive");
        let mut coords = Coords::with_capacity(2 * z.len());
        for w in z {
            coords.push(w.re);
            coords.push(w.im);
        }
        Self { coords }
    }

    /// Complex dimension n.
    pub fn n(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// The i-th complex coordinate zⁱ (zero based).
    pub fn z(&self, i: usize) -> Complex64 {
        Complex64::new(self.coords[2 * i], self.coords[2 * i + 1])
    }

    pub fn to_complex(&self) -> SmallVec<[Complex64; 4]> {
        (0..self.n()).map(|i| self.z(i)).collect()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s·other`, the workhorse of projections.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        debug_assert_eq!(self.coords.len(), other.coords.len());
        Self {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coords.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.coords.len() != other.coords.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coords.len(),
                found: other.coords.len(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for ComplexVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

impl Add for &ComplexVector {
    type Output = ComplexVector;
    fn add(self, rhs: &ComplexVector) -> ComplexVector {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &ComplexVector {
    type Output = ComplexVector;
    fn sub(self, rhs: &ComplexVector) -> ComplexVector {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &ComplexVector {
    type Output = ComplexVector;
    fn neg(self) -> ComplexVector {
        self.scale(-1.0)
    }
}

impl Mul<&ComplexVector> for f64 {
    type Output = ComplexVector;
    fn mul(self, rhs: &ComplexVector) -> ComplexVector {
        rhs.scale(self)
    }
}

/// `J`: per complex slot `(a, b) ↦ (−b, a)`.
pub fn apply_j(v: &ComplexVector) -> ComplexVector {
    let mut coords = Coords::with_capacity(v.coords.len());
    for pair in v.coords.chunks_exact(2) {
        coords.push(-pair[1]);
        coords.push(pair[0]);
    }
    ComplexVector { coords }
}

/// `ω(u, v) = Σᵢ (uₓⁱ v_yⁱ − u_yⁱ vₓⁱ)`.
pub fn symplectic_form(u: &ComplexVector, v: &ComplexVector) -> Result<f64> {
    u.check_same(v)?;
    Ok(u
        .coords
        .chunks_exact(2)
        .zip(v.coords.chunks_exact(2))
        .map(|(a, b)| a[0] * b[1] - a[1] * b[0])
        .sum())
}

pub fn euclidean_inner(u: &ComplexVector, v: &ComplexVector) -> Result<f64> {
    u.check_same(v)?;
    Ok(dot(u, v))
}

/// Unchecked dot product for internal hot loops.
pub(crate) fn dot(u: &ComplexVector, v: &ComplexVector) -> f64 {
    u.coords.iter().zip(&v.coords).map(|(a, b)| a * b).sum()
}

/// Modulus and phase of a complex number, the phase wrapped to (−π, π].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarValue {
    pub modulus: f64,
    pub phase: f64,
}

/// Evaluates `dz¹∧⋯∧dzⁿ` on an n-frame: the complex determinant of the
/// matrix whose columns are the frame vectors.
pub fn complex_determinant_of_frame(frame: &[ComplexVector]) -> Result<PolarValue> {
    let det = complex_determinant(frame)?;
    if det == Complex64::new(0.0, 0.0) {
        return Ok(PolarValue {
            modulus: 0.0,
            phase: 0.0,
        });
    }
    Ok(PolarValue {
        modulus: det.norm(),
        phase: wrap_phase(det.arg()),
    })
}

/// Complex determinant by Gaussian elimination with partial pivoting.
pub fn complex_determinant(frame: &[ComplexVector]) -> Result<Complex64> {
    let n = frame.len();
    if n == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    for v in frame {
        if v.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.n(),
            });
        }
    }
    // a[row][col] = z^row of frame vector col
    let mut a: Vec<Complex64> = Vec::with_capacity(n * n);
    for row in 0..n {
        for v in frame {
            a.push(v.z(row));
        }
    }
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
            .unwrap_or(col);
        if a[pivot * n + col].norm() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for row in col + 1..n {
            let factor = a[row * n + col] / d;
            for k in col..n {
                let sub = factor * a[col * n + k];
                a[row * n + k] -= sub;
            }
        }
    }
    Ok(det)
}

/// Wraps an angle to (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// Distance between two angles on the circle, in [0, π].
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(c: &[f64]) -> ComplexVector {
        ComplexVector::from_slice(c).unwrap()
    }

    #[test]
    fn j_examples() {
        assert_eq!(apply_j(&cv(&[1.0, 0.0])), cv(&[0.0, 1.0]));
        assert_eq!(apply_j(&cv(&[0.0, 1.0])), cv(&[-1.0, 0.0]));
        assert_eq!(apply_j(&cv(&[1.0, 0.0, 0.0, 1.0])), cv(&[0.0, 1.0, -1.0, 0.0]));
    }

    #[test]
    fn omega_examples() {
        assert_eq!(symplectic_form(&cv(&[1.0, 0.0]), &cv(&[0.0, 1.0])).unwrap(), 1.0);
        let u = cv(&[0.3, -1.2, 2.0, 0.5]);
        assert_eq!(symplectic_form(&u, &u).unwrap(), 0.0);
        let cross = symplectic_form(&cv(&[1.0, 0.0, 0.0, 0.0]), &cv(&[0.0, 0.0, 0.0, 1.0]));
        assert_eq!(cross.unwrap(), 0.0);
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let err = symplectic_form(&cv(&[1.0, 0.0]), &cv(&[1.0, 0.0, 0.0, 0.0]));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
        assert!(euclidean_inner(&cv(&[1.0, 0.0]), &cv(&[1.0, 0.0, 0.0, 0.0])).is_err());
        assert!(ComplexVector::from_slice(&[1.0, 2.0, 3.0]).is_err());
        assert!(ComplexVector::from_slice(&[]).is_err());
    }

    #[test]
    fn inner_examples() {
        assert_eq!(euclidean_inner(&cv(&[1.0, 0.0]), &cv(&[1.0, 0.0])).unwrap(), 1.0);
        assert_eq!(euclidean_inner(&cv(&[1.0, 0.0]), &cv(&[0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(euclidean_inner(&cv(&[3.0, 4.0]), &cv(&[3.0, 4.0])).unwrap(), 25.0);
    }

    #[test]
    fn determinant_examples() {
        let r = complex_determinant_of_frame(&[cv(&[1.0, 0.0])]).unwrap();
        assert_eq!((r.modulus, r.phase), (1.0, 0.0));
        let r = complex_determinant_of_frame(&[cv(&[0.0, 1.0])]).unwrap();
        assert!((r.modulus - 1.0).abs() < 1e-15 && (r.phase - PI / 2.0).abs() < 1e-15);
        // det [[1, 0], [0, i]] = i
        let r = complex_determinant_of_frame(&[cv(&[1.0, 0.0, 0.0, 0.0]), cv(&[0.0, 0.0, 0.0, 1.0])])
            .unwrap();
        assert!((r.modulus - 1.0).abs() < 1e-15 && (r.phase - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_determinant_convention() {
        let v = cv(&[1.0, 2.0, 3.0, 4.0]);
        let r = complex_determinant_of_frame(&[v.clone(), v]).unwrap();
        assert_eq!((r.modulus, r.phase), (0.0, 0.0));
    }

    #[test]
    fn phase_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-15);
        assert!(circular_distance(0.1, 0.1 + 2.0 * PI) < 1e-15);
        // the phase of -1 is reported as +π
        let r = complex_determinant_of_frame(&[cv(&[-1.0, -0.0])]).unwrap();
        assert_eq!(r.phase, PI);
    }
}
