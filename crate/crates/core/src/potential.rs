//! Finite-Fourier moire potentials U(z) = Σ c_p exp(i⟨z, p⟩) with every mode
//! momentum p in K + Λ*, which makes the twisted translation symmetry
//! U(z+γ) = exp(-2i⟨γ,K⟩)U(z) automatic. The rotation and conjugation
//! symmetries U(ωz) = ωU(z), conj(U(z̄)) = -U(-z) are validated by seeded
//! sampling: all three identities are equalities of trigonometric
//! polynomials, so agreement at enough random points is conclusive.

use crate::error::{Error, Result};
use crate::lattice::{self, DualCoord};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One Fourier mode: momentum K + offset, complex coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierMode {
    pub offset: DualCoord,
    pub coeff: Complex64,
}

impl FourierMode {
    pub fn momentum(&self) -> Complex64 {
        lattice::k_point() + self.offset.value()
    }
}

/// A moire potential held in momentum space; real-space values are produced
/// on demand. Immutable after construction.
#[derive(Debug, Clone)]
pub struct FourierPotential {
    modes: Vec<FourierMode>,
}

/// JSON record for one mode: momentum K + (4πi/√3)(m + nω), coefficient re + i·im.
#[derive(Debug, Serialize, Deserialize)]
struct ModeRecord {
    m: i64,
    n: i64,
    re: f64,
    im: f64,
}

impl FourierPotential {
    /// Build a potential from explicit modes, optionally validating the
    /// symmetry axioms at 100 seeded sample points.
    pub fn new(modes: Vec<FourierMode>, validate: bool) -> Result<Self> {
        let pot = Self { modes };
        if validate {
            pot.validate()?;
        }
        Ok(pot)
    }

    /// Bistritzer-MacDonald potential
    /// U(z) = -(4/3)πi Σ_{ℓ=0}^{2} ω^ℓ exp(i⟨z, ω^ℓ K⟩).
    pub fn bistritzer_macdonald() -> Self {
        let c = Complex64::new(0.0, -4.0 * std::f64::consts::PI / 3.0);
        let om = lattice::omega();
        Self {
            modes: vec![
                FourierMode { offset: DualCoord::new(0, 0), coeff: c },
                FourierMode { offset: DualCoord::new(1, 1), coeff: c * om },
                FourierMode { offset: DualCoord::new(0, 1), coeff: c * om * om },
            ],
        }
    }

    /// Potential combining the Bistritzer-MacDonald modes with the opposite
    /// second harmonic, normalized by 2^{-1/2}; its real magic angles are
    /// doubly degenerate. The construction applies the change of variables
    /// ζ = (4/3)πi·z to the ζ-coordinate form, which turns the second
    /// harmonic into modes at -2ω^ℓK = ω^ℓK mod Λ*.
    pub fn double_harmonic() -> Self {
        let c = Complex64::new(0.0, -4.0 * std::f64::consts::PI / 3.0) / 2.0_f64.sqrt();
        let om = lattice::omega();
        Self {
            modes: vec![
                FourierMode { offset: DualCoord::new(0, 0), coeff: c },
                FourierMode { offset: DualCoord::new(1, 1), coeff: c * om },
                FourierMode { offset: DualCoord::new(0, 1), coeff: c * om * om },
                FourierMode { offset: DualCoord::new(1, 2), coeff: -c },
                FourierMode { offset: DualCoord::new(-1, 0), coeff: -c * om },
                FourierMode { offset: DualCoord::new(1, 0), coeff: -c * om * om },
            ],
        }
    }

    pub fn modes(&self) -> &[FourierMode] {
        &self.modes
    }

    /// U(z), or U(-z) when `reflect` is set.
    pub fn eval(&self, z: Complex64, reflect: bool) -> Complex64 {
        let zz = if reflect { -z } else { z };
        self.modes
            .iter()
            .map(|mode| {
                mode.coeff * Complex64::new(0.0, lattice::pairing(zz, mode.momentum())).exp()
            })
            .sum()
    }

    /// Largest |coordinate| over all mode offsets including the K-transfer;
    /// bounds the momentum reach of a single multiplication by U.
    pub fn max_offset_radius(&self) -> i64 {
        // momentum transfer in sheet coordinates is offset + coords(-3K) or
        // offset coords directly; the K-parts are at most (1,2).
        self.modes
            .iter()
            .map(|m| m.offset.m.abs().max(m.offset.n.abs()))
            .max()
            .unwrap_or(0)
            + 2
    }

    /// Check the three identities of the symmetry axioms. Exactness of the
    /// mode set under rotation (coeff(ωp) = ω·coeff(p)) is checked on the
    /// list; the pointwise identities are sampled at 100 seeded points.
    pub fn validate(&self) -> Result<()> {
        self.check_rotation_closure()?;
        let mut rng = ChaCha8Rng::seed_from_u64(0x7b67);
        for _ in 0..100 {
            let z = Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let rot = (self.eval(lattice::omega() * z, false)
                - lattice::omega() * self.eval(z, false))
            .norm();
            if rot > 1e-12 * self.scale() {
                return Err(Error::SymmetryViolation {
                    identity: "U(ωz) = ωU(z)",
                    z,
                    residual: rot,
                });
            }
            let conj = (self.eval(z.conj(), false).conj() + self.eval(-z, false)).norm();
            if conj > 1e-12 * self.scale() {
                return Err(Error::SymmetryViolation {
                    identity: "conj(U(z̄)) = -U(-z)",
                    z,
                    residual: conj,
                });
            }
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        self.modes.iter().map(|m| m.coeff.norm()).sum::<f64>().max(1.0)
    }

    /// coeff(ωp) = ω coeff(p) for every mode momentum p present.
    fn check_rotation_closure(&self) -> Result<()> {
        for mode in &self.modes {
            // ω(K + offset) = K + (ωK - K) + ω·offset; ωK - K has coords (1,1)
            let rotated = mode.offset.rotate() + DualCoord::new(1, 1);
            let partner = self.modes.iter().find(|m| m.offset == rotated);
            let ok = match partner {
                Some(p) => (p.coeff - lattice::omega() * mode.coeff).norm() < 1e-12 * self.scale(),
                None => false,
            };
            if !ok {
                return Err(Error::SymmetryViolation {
                    identity: "coeff(ωp) = ω coeff(p)",
                    z: mode.offset.value(),
                    residual: f64::NAN,
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let recs: Vec<ModeRecord> = self
            .modes
            .iter()
            .map(|m| ModeRecord {
                m: m.offset.m,
                n: m.offset.n,
                re: m.coeff.re,
                im: m.coeff.im,
            })
            .collect();
        serde_json::to_string_pretty(&recs).expect("mode records serialize")
    }

    pub fn from_json(text: &str, validate: bool) -> Result<Self> {
        let recs: Vec<ModeRecord> = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("potential JSON: {e}")))?;
        let modes = recs
            .into_iter()
            .map(|r| FourierMode {
                offset: DualCoord::new(r.m, r.n),
                coeff: Complex64::new(r.re, r.im),
            })
            .collect();
        Self::new(modes, validate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rand_points(seed: u64, count: usize) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
            .collect()
    }

    #[test]
    fn bm_vanishes_at_origin() {
        // 1 + ω + ω² = 0
        let u = FourierPotential::bistritzer_macdonald();
        assert_abs_diff_eq!(u.eval(Complex64::new(0.0, 0.0), false).norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn bm_mode_offsets_derived_by_brute_force() {
        // solve ω^ℓ K - K = (4πi/√3)(m + nω) over |m|,|n| <= 3
        let mut found = vec![DualCoord::new(0, 0)];
        for l in 1..=2u32 {
            let target = lattice::omega().powu(l) * lattice::k_point() - lattice::k_point();
            let mut hit = None;
            for m in -3..=3i64 {
                for n in -3..=3i64 {
                    if (DualCoord::new(m, n).value() - target).norm() < 1e-9 {
                        hit = Some(DualCoord::new(m, n));
                    }
                }
            }
            found.push(hit.expect("ω^ℓK - K ∈ Λ*"));
        }
        let u = FourierPotential::bistritzer_macdonald();
        let offsets: Vec<DualCoord> = u.modes().iter().map(|m| m.offset).collect();
        assert_eq!(offsets, found);
        assert_eq!(found[1], DualCoord::new(1, 1));
        assert_eq!(found[2], DualCoord::new(0, 1));
    }

    #[test]
    fn bm_satisfies_symmetries() {
        let u = FourierPotential::bistritzer_macdonald();
        u.validate().unwrap();
        let mut worst = 0.0_f64;
        for z in rand_points(21, 100) {
            worst = worst.max(
                (u.eval(lattice::omega() * z, false) - lattice::omega() * u.eval(z, false)).norm(),
            );
        }
        assert!(worst < 1e-12, "rotation residual {worst:.2e}");
    }

    #[test]
    fn double_harmonic_satisfies_symmetries() {
        FourierPotential::double_harmonic().validate().unwrap();
    }

    #[test]
    fn reflect_equals_negated_momenta() {
        let u = FourierPotential::bistritzer_macdonald();
        // U(-z) as a fresh potential with momenta -p: -p = -K - off =
        // K + (-3K) - off, and -3K has coords (1,2)
        let neg: Vec<FourierMode> = u
            .modes()
            .iter()
            .map(|m| FourierMode {
                offset: DualCoord::new(1, 2) - m.offset,
                coeff: m.coeff,
            })
            .collect();
        let un = FourierPotential::new(neg, false).unwrap();
        for z in rand_points(22, 50) {
            let a = u.eval(z, true);
            let b = un.eval(z, false);
            assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn eval_matches_term_by_term_oracle() {
        let u = FourierPotential::bistritzer_macdonald();
        for z in rand_points(23, 100) {
            // independent summation order, Horner-free explicit accumulation
            let mut oracle = Complex64::new(0.0, 0.0);
            for mode in u.modes().iter().rev() {
                let p = lattice::k_point() + mode.offset.value();
                oracle += mode.coeff * Complex64::new(0.0, (z * p.conj()).re).exp();
            }
            let v = u.eval(z, false);
            assert!((v - oracle).norm() < 1e-14 * (1.0 + oracle.norm()));
        }
    }

    #[test]
    fn dft_recovers_modes() {
        // sample on a grid strictly finer than twice the maximal coordinate
        // and recover each coefficient by the inverse transform
        let u = FourierPotential::double_harmonic();
        let g = 12usize; // offsets reach |coords| <= 2, momenta coords <= 2301
        let om = lattice::omega();
        for mode in u.modes() {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..g {
                for b in 0..g {
                    let z = (a as f64 / g as f64) * Complex64::new(1.0, 0.0)
                        + (b as f64 / g as f64) * om;
                    acc += u.eval(z, false)
                        * Complex64::new(0.0, -lattice::pairing(z, mode.momentum())).exp();
                }
            }
            acc /= (g * g) as f64;
            assert!(
                (acc - mode.coeff).norm() < 1e-12 * (1.0 + mode.coeff.norm()),
                "recovered {acc} expected {}",
                mode.coeff
            );
        }
    }

    #[test]
    fn json_round_trip() {
        let u = FourierPotential::double_harmonic();
        let s = u.to_json();
        let v = FourierPotential::from_json(&s, true).unwrap();
        assert_eq!(u.modes().len(), v.modes().len());
        for (a, b) in u.modes().iter().zip(v.modes()) {
            assert_eq!(a.offset, b.offset);
            assert!((a.coeff - b.coeff).norm() < 1e-15);
        }
    }

    #[test]
    fn asymmetric_modes_rejected() {
        let modes = vec![FourierMode {
            offset: DualCoord::new(0, 0),
            coeff: Complex64::new(1.0, 0.0),
        }];
        assert!(matches!(
            FourierPotential::new(modes, true),
            Err(Error::SymmetryViolation { .. })
        ));
    }
}
