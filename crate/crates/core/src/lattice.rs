//! Exact arithmetic and geometry of the moire lattice Λ = ℤ ⊕ ωℤ, its dual
//! Λ* = (4πi/√3)Λ, the special momenta Γ, K, K', and the rectangle grid 𝓡.
//!
//! Lattice points are stored as exact integer coordinate pairs; complex
//! embeddings are computed on demand so membership tests never drift.

use num_complex::Complex64;
use std::ops::{Add, Neg, Sub};

pub const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// ω = exp(2πi/3), the counterclockwise rotation by 120 degrees.
pub fn omega() -> Complex64 {
    Complex64::new(-0.5, 0.5 * SQRT_3)
}

/// Scale factor of the dual lattice, 4πi/√3.
pub fn dual_scale() -> Complex64 {
    Complex64::new(0.0, 4.0 * std::f64::consts::PI / SQRT_3)
}

/// Real pairing ⟨z, w⟩ = Re(z w̄), bilinear over the reals.
pub fn pairing(z: Complex64, w: Complex64) -> f64 {
    (z * w.conj()).re
}

/// Point m + nω of the lattice Λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeCoord {
    pub m: i64,
    pub n: i64,
}

impl LatticeCoord {
    pub fn new(m: i64, n: i64) -> Self {
        Self { m, n }
    }

    pub fn value(self) -> Complex64 {
        Complex64::new(self.m as f64, 0.0) + omega() * self.n as f64
    }

    /// Multiplication by ω permutes coordinates: ω(m + nω) = -n + (m-n)ω.
    pub fn rotate(self) -> Self {
        Self::new(-self.n, self.m - self.n)
    }

    /// Nearest lattice point to z together with the remainder z - γ.
    pub fn nearest(z: Complex64) -> (Self, Complex64) {
        let (x, y) = basis_coords(z);
        let c = Self::new(x.round() as i64, y.round() as i64);
        (c, z - c.value())
    }

    /// Exact membership test: solves the 2x2 real system for (m, n) and
    /// accepts when both are within `tol` of integers.
    pub fn from_point(z: Complex64, tol: f64) -> Option<Self> {
        let (c, rem) = Self::nearest(z);
        if rem.norm() <= tol {
            Some(c)
        } else {
            None
        }
    }
}

impl Add for LatticeCoord {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.m + rhs.m, self.n + rhs.n)
    }
}

impl Sub for LatticeCoord {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.m - rhs.m, self.n - rhs.n)
    }
}

impl Neg for LatticeCoord {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.m, -self.n)
    }
}

/// Point (4πi/√3)(m + nω) of the dual lattice Λ*.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct DualCoord {
    pub m: i64,
    pub n: i64,
}

impl DualCoord {
    pub fn new(m: i64, n: i64) -> Self {
        Self { m, n }
    }

    pub fn value(self) -> Complex64 {
        dual_scale() * (Complex64::new(self.m as f64, 0.0) + omega() * self.n as f64)
    }

    pub fn rotate(self) -> Self {
        Self::new(-self.n, self.m - self.n)
    }

    /// Membership test for Λ*; accepts coordinates within `tol` of integers.
    pub fn from_momentum(k: Complex64, tol: f64) -> Option<Self> {
        let (x, y) = basis_coords(k / dual_scale());
        let m = x.round();
        let n = y.round();
        if (x - m).abs() <= tol && (y - n).abs() <= tol {
            Some(Self::new(m as i64, n as i64))
        } else {
            None
        }
    }
}

impl Add for DualCoord {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.m + rhs.m, self.n + rhs.n)
    }
}

impl Sub for DualCoord {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.m - rhs.m, self.n - rhs.n)
    }
}

impl Neg for DualCoord {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.m, -self.n)
    }
}

/// Coordinates of w in the real basis {1, ω}: w = x + yω.
fn basis_coords(w: Complex64) -> (f64, f64) {
    let y = w.im / (0.5 * SQRT_3);
    let x = w.re + 0.5 * y;
    (x, y)
}

/// Γ point, the origin of momentum space.
pub fn gamma_point() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// K point, 4π/3. Satisfies 3K ∈ Λ* and ωK ≡ K mod Λ*, but K ∉ Λ*.
pub fn k_point() -> Complex64 {
    Complex64::new(4.0 * std::f64::consts::PI / 3.0, 0.0)
}

/// K' point, -4π/3.
pub fn k_prime_point() -> Complex64 {
    -k_point()
}

/// The distinguished midpoint 2πi/√3 of the Brillouin-zone boundary where
/// the second bifurcation of Dirac points happens.
pub fn vertex_point() -> Complex64 {
    Complex64::new(0.0, 2.0 * std::f64::consts::PI / SQRT_3)
}

/// Reduce k into the fundamental cell of Λ*: the parallelogram spanned by
/// {(4πi/√3), (4πi/√3)ω} centered so that Γ = 0 is interior. Returns the
/// representative k₀ and the dual coordinate p with k = k₀ + p.
pub fn reduce_to_fundamental(k: Complex64) -> (Complex64, DualCoord) {
    let (x, y) = basis_coords(k / dual_scale());
    let p = DualCoord::new(x.round() as i64, y.round() as i64);
    (k - p.value(), p)
}

/// √3 k/(4πi); maps Λ* onto Λ.
pub fn z_of_k(k: Complex64) -> Complex64 {
    SQRT_3 * k / (4.0 * std::f64::consts::PI * Complex64::i())
}

/// Distance of k (mod nothing; the set is Λ*-periodic by itself) to the
/// rectangle grid 𝓡 = 2π(iℝ + ℤ) ∪ (2π/√3)(ℝ + iℤ).
pub fn rectangle_distance(k: Complex64) -> f64 {
    let pi2 = 2.0 * std::f64::consts::PI;
    let vert = (k.re - pi2 * (k.re / pi2).round()).abs();
    let step = pi2 / SQRT_3;
    let horiz = (k.im - step * (k.im / step).round()).abs();
    vert.min(horiz)
}

/// Distance of two momenta modulo Λ*.
pub fn distance_mod_dual(a: Complex64, b: Complex64) -> f64 {
    let (r, _) = reduce_to_fundamental(a - b);
    // The representative of a-b may sit near a cell corner; compare against
    // the neighboring translates as well.
    let mut best = r.norm();
    for m in -1..=1i64 {
        for n in -1..=1i64 {
            let shift = DualCoord::new(m, n).value();
            best = best.min((r - shift).norm());
        }
    }
    best
}
