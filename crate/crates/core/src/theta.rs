//! Jacobi theta function θ(z) = θ₁(z|ω) at the fixed modulus ω = exp(2πi/3),
//! the multiplier function F_k, and the constant c(k) = 2πi θ(z(k))/θ'(0).
//!
//! θ(z) = -Σ_{n∈ℤ} exp(πi(n+1/2)²ω + 2πi(n+1/2)(z+1/2)); it is odd, satisfies
//! θ(z+m) = (-1)^m θ(z) and θ(z+nω) = (-1)^n exp(-πin²ω - 2πizn) θ(z), and has
//! simple zeros exactly on Λ. Arguments are reduced into the fundamental cell
//! with the exact quasi-periodicity factors before summing, so the Gaussian
//! decay of the terms is never spoiled by large |Im z|.

use crate::error::{Error, Result};
use crate::lattice::{self, LatticeCoord};
use num_complex::Complex64;

/// Evaluator with a fixed series truncation; immutable after construction.
#[derive(Debug, Clone)]
pub struct ThetaEvaluator {
    half_width: i64,
    theta_prime_zero: Complex64,
    theta_half: Complex64,
}

impl Default for ThetaEvaluator {
    fn default() -> Self {
        Self::new(32)
    }
}

impl ThetaEvaluator {
    /// `half_width` terms are summed on each side of n = 0. The terms decay
    /// like exp(-π√3(n+1/2)²/2), so the default 32 is far beyond f64.
    pub fn new(half_width: i64) -> Self {
        let mut ev = Self {
            half_width,
            theta_prime_zero: Complex64::new(0.0, 0.0),
            theta_half: Complex64::new(0.0, 0.0),
        };
        ev.theta_prime_zero = ev.raw(Complex64::new(0.0, 0.0)).1;
        ev.theta_half = ev.eval(Complex64::new(0.5, 0.0));
        ev
    }

    /// θ(z) for order 0, the term-wise derivative θ'(z) for order 1.
    pub fn theta_eval(&self, z: Complex64, order: u8) -> Complex64 {
        assert!(order <= 1, "only derivative orders 0 and 1 are defined");
        if order == 0 {
            self.eval(z)
        } else {
            self.eval_deriv(z)
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let (c, z0) = LatticeCoord::nearest(z);
        let fac = self.quasi_factor(z0, c);
        let (t, _) = self.raw(z0);
        fac * t
    }

    pub fn eval_deriv(&self, z: Complex64) -> Complex64 {
        let (c, z0) = LatticeCoord::nearest(z);
        let fac = self.quasi_factor(z0, c);
        let (t, td) = self.raw(z0);
        let two_pi_i_n = Complex64::new(0.0, 2.0 * std::f64::consts::PI * c.n as f64);
        fac * (td - two_pi_i_n * t)
    }

    /// Cached θ'(0); appears in every c(k) and in the constant c₁.
    pub fn theta_prime_zero(&self) -> Complex64 {
        self.theta_prime_zero
    }

    /// Cached θ(1/2) = θ₂(0).
    pub fn theta_half(&self) -> Complex64 {
        self.theta_half
    }

    /// c(k) = 2πi θ(z(k))/θ'(0); vanishes exactly on Λ*.
    pub fn c_of_k(&self, k: Complex64) -> Complex64 {
        Complex64::new(0.0, 2.0 * std::f64::consts::PI) * self.eval(lattice::z_of_k(k))
            / self.theta_prime_zero
    }

    /// F_k(z) = exp((i/2)(z - z̄)k) θ(z - z(k))/θ(z). Λ-periodic in z; F_0 ≡ 1.
    ///
    /// When k ∈ Λ* the zero of the numerator cancels the pole and the value
    /// is computed from the exact quasi-periodicity factors. Otherwise z ∈ Λ
    /// is a genuine pole and `PoleAtLattice` is returned.
    pub fn f_k(&self, k: Complex64, z: Complex64) -> Result<Complex64> {
        let prefac = (Complex64::new(0.0, 0.5) * (z - z.conj()) * k).exp();
        if let Some(p) = lattice::DualCoord::from_momentum(k, 1e-12) {
            // z(k) ∈ Λ exactly: numerator and denominator reduce to θ at the
            // same z₀, so the ratio is a ratio of quasi-periodicity factors.
            let (c, z0) = LatticeCoord::nearest(z);
            let shift = LatticeCoord::new(p.m, p.n);
            let fac_den = self.quasi_factor(z0, c);
            let fac_num = self.quasi_factor(z0, c - shift);
            return Ok(prefac * fac_num / fac_den);
        }
        let den = self.eval(z);
        if den.norm() < 1e-12 * self.theta_prime_zero.norm() {
            // k ∉ Λ*, so the numerator cannot vanish at the same point.
            return Err(Error::PoleAtLattice { z });
        }
        let num = self.eval(z - lattice::z_of_k(k));
        Ok(prefac * num / den)
    }

    /// Quasi-periodicity factor: θ(z₀ + m + nω) = fac · θ(z₀) for c = (m, n).
    fn quasi_factor(&self, z0: Complex64, c: LatticeCoord) -> Complex64 {
        let (m, n) = (c.m, c.n);
        let sign = if (m + n).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let pi = std::f64::consts::PI;
        let expo = -Complex64::new(0.0, pi * (n * n) as f64) * lattice::omega()
            - Complex64::new(0.0, 2.0 * pi * n as f64) * z0;
        sign * expo.exp()
    }

    /// Direct truncated sum of the defining series and its derivative; only
    /// accurate for z in (or near) the fundamental cell.
    fn raw(&self, z: Complex64) -> (Complex64, Complex64) {
        let pi = std::f64::consts::PI;
        let om = lattice::omega();
        let mut t = Complex64::new(0.0, 0.0);
        let mut td = Complex64::new(0.0, 0.0);
        for n in -self.half_width..self.half_width {
            let half = n as f64 + 0.5;
            let phase = Complex64::new(0.0, pi * half * half) * om
                + Complex64::new(0.0, 2.0 * pi * half) * (z + 0.5);
            let term = phase.exp();
            t -= term;
            td -= Complex64::new(0.0, 2.0 * pi * half) * term;
        }
        (t, td)
    }
}
