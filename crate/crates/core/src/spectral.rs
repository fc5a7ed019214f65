//! Eigenvalue extraction: magic angles from the Birman-Schwinger operator,
//! the holomorphic eigenvalue branch λ(k, B), Dirac-point location and
//! continuation, and Bloch bands.
//!
//! Two Birman-Schwinger families appear. `BranchFamily::Literal` is
//! T_k(B) = (2D_z̄-k)^{-1}[[B, U],[U(-·), -B]], whose eigenvalue branch
//! carries the perturbation expansion λ(k,B) = λ̲ + B³λ₀(B³) + c₁Bk².
//! `BranchFamily::Shifted` is the resolvent-shifted variant
//! ((2D_z̄-k) + 𝓑)^{-1}[[0, U],[U(-·), 0]], for which
//! -1/α ∈ Spec ⟺ k ∈ Spec D_B(α) holds exactly; root finding for Dirac
//! points therefore Newton-iterates on the shifted branch, while the
//! expansion diagnostics sample the literal one.

use crate::error::{Error, Result};
use crate::lattice::{self, distance_mod_dual, reduce_to_fundamental, DualCoord};
use crate::linalg;
use crate::operator::{assemble_d, assemble_t};
use crate::potential::FourierPotential;
use ndarray::Array1;
use num_complex::Complex64;

/// Default truncation for coarse Dirac-point scans.
pub const SCAN_CUTOFF: usize = 8;
/// Library default truncation.
pub const DEFAULT_CUTOFF: usize = 12;

/// One reciprocal magic coupling with certificates.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MagicAngleEntry {
    pub alpha: Complex64,
    /// ‖(I + αT)v‖ for the unit eigenvector v paired with -1/α.
    pub residual: f64,
    pub is_real: bool,
    /// Distance to the nearest other eigenvalue of T in the λ = 1/α plane.
    pub simplicity_gap: f64,
}

#[derive(Debug, Clone)]
pub struct MagicAngleReport {
    pub entries: Vec<MagicAngleEntry>,
    pub cutoff: usize,
    pub probe_k: Complex64,
}

impl MagicAngleReport {
    /// Real positive magic α's in ascending order.
    pub fn real_positive(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .entries
            .iter()
            .filter(|e| e.is_real && e.alpha.re > 0.0)
            .map(|e| e.alpha.re)
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }
}

/// All eigenvalues λ of T_k(0) as α = 1/λ, sorted by |α| ascending and
/// truncated to `count`. The probe momentum k defaults to Γ, which is
/// admissible because 0 ∉ 𝒦₀.
pub fn magic_alphas(
    u: &FourierPotential,
    cutoff: usize,
    probe_k: Complex64,
    count: usize,
) -> Result<MagicAngleReport> {
    let t = assemble_t(u, probe_k, Complex64::new(0.0, 0.0), cutoff, false)?;
    let (vals, vecs) = linalg::eigen_pairs(&t.data)?;
    let scale = vals.iter().map(|l| l.norm()).fold(0.0, f64::max);

    let mut order: Vec<usize> = (0..vals.len())
        .filter(|&i| vals[i].norm() > 1e-9 * scale)
        .collect();
    // |α| ascending = |λ| descending; deterministic tie-break by Re, Im
    order.sort_by(|&i, &j| {
        let (a, b) = (vals[i], vals[j]);
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap()
            .then(b.re.partial_cmp(&a.re).unwrap())
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
    order.truncate(count);

    let mut entries = Vec::with_capacity(order.len());
    for &i in &order {
        let lam = vals[i];
        let alpha = 1.0 / lam;
        // eigenvector paired with the eigenvalue nearest -λ certifies
        // ker(I + αT); with the exact sign symmetry of T it is -λ itself.
        let mut jbest = usize::MAX;
        let mut dbest = f64::INFINITY;
        for (j, l) in vals.iter().enumerate() {
            let d = (l + lam).norm();
            if d < dbest {
                dbest = d;
                jbest = j;
            }
        }
        let v = vecs.column(jbest);
        let tv = t.data.dot(&v);
        let residual = v
            .iter()
            .zip(tv.iter())
            .map(|(vi, ti)| (vi + alpha * ti).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let simplicity_gap = vals
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, l)| (l - lam).norm())
            .fold(f64::INFINITY, f64::min);
        entries.push(MagicAngleEntry {
            alpha,
            residual,
            is_real: alpha.im.abs() < 1e-6 * alpha.norm(),
            simplicity_gap,
        });
    }
    Ok(MagicAngleReport {
        entries,
        cutoff,
        probe_k,
    })
}

/// Which Birman-Schwinger family a branch evaluation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchFamily {
    /// T_k(B); its eigenvalue branch obeys the B³λ₀ + c₁Bk² expansion.
    Literal,
    /// Resolvent-shifted variant; -1/α ∈ Spec ⟺ k ∈ Spec D_B(α) exactly.
    Shifted,
}

/// Converged branch evaluation at one (k, B).
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub value: Complex64,
    /// Analytic dμ/dk from left/right eigenvectors: μ' = μ·(w^H R v)/(w^H v),
    /// valid because ∂_k T = R·T for both families.
    pub derivative: Complex64,
    /// Distance from the anchor to the next-nearest eigenvalue estimate.
    pub second_distance: f64,
}

pub(crate) fn branch_point(
    u: &FourierPotential,
    k: Complex64,
    b_field: Complex64,
    cutoff: usize,
    family: BranchFamily,
    anchor: Complex64,
) -> Result<BranchPoint> {
    let shifted = family == BranchFamily::Shifted;
    let t = assemble_t(u, k, b_field, cutoff, shifted)?;
    let near = linalg::nearest_eigenpair(&t.data, anchor)?;
    let mu = near.value;

    // resolvent diagonal of the family
    let dim = t.basis.dim();
    let mut rv = Array1::<Complex64>::zeros(dim);
    for i in 0..dim {
        let (sheet, _, _) = t.basis.entry(i);
        let q = t.basis.momentum(i);
        let denom = if shifted {
            q - k + if sheet == 0 { b_field } else { -b_field }
        } else {
            q - k
        };
        rv[i] = near.right[i] / denom;
    }
    let num: Complex64 = near
        .left
        .iter()
        .zip(rv.iter())
        .map(|(w, x)| w.conj() * x)
        .sum();
    let den: Complex64 = near
        .left
        .iter()
        .zip(near.right.iter())
        .map(|(w, x)| w.conj() * x)
        .sum();
    if den.norm() < 1e-13 {
        return Err(Error::Linalg("degenerate left/right pairing".into()));
    }
    Ok(BranchPoint {
        value: mu,
        derivative: mu * num / den,
        second_distance: (near.second - anchor).norm(),
    })
}

/// The eigenvalue of T_k(B) closest to `anchor` (shift-invert iteration).
/// Errors with `BranchAmbiguous` when two eigenvalues sit at equal distance
/// from the anchor to within 1e-10.
pub fn lambda_branch(
    u: &FourierPotential,
    k: Complex64,
    b_field: Complex64,
    cutoff: usize,
    anchor: Complex64,
) -> Result<Complex64> {
    let bp = branch_point(u, k, b_field, cutoff, BranchFamily::Literal, anchor)?;
    let d0 = (bp.value - anchor).norm();
    if (bp.second_distance - d0).abs() < 1e-10 {
        return Err(Error::BranchAmbiguous {
            anchor,
            d0,
            d1: bp.second_distance,
        });
    }
    Ok(bp.value)
}

/// Located zero of D_B(α) - k in the fundamental cell.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DiracPoint {
    pub k: Complex64,
    pub multiplicity: usize,
    /// σ_min(D_B(α)+k) at the reporting cutoff.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct DiracPointSet {
    pub points: Vec<DiracPoint>,
    pub alpha: Complex64,
    pub b_field: Complex64,
    pub cutoff: usize,
}

impl DiracPointSet {
    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum()
    }

    /// Worst Hausdorff-style mismatch of the set against its k → -k image,
    /// measured modulo Λ*.
    pub fn pairing_mismatch(&self) -> f64 {
        let mut worst = 0.0_f64;
        for p in &self.points {
            let best = self
                .points
                .iter()
                .map(|q| distance_mod_dual(-p.k, q.k))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
        worst
    }
}

/// Find all zeros of D_B(α) - k per fundamental cell.
///
/// The coarse stage either scans σ_min(D_B(α)+k) over a `grid`×`grid` mesh
/// (when `grid` is given) or, by default, takes the eigenvalues of the
/// cutoff-8 matrix D_B(α)+0 reduced modulo Λ*, which lists every candidate
/// in one decomposition. Candidates are refined by Newton iteration on the
/// shifted-branch equation μ(k) = -1/α and verified by σ_min at the full
/// cutoff; refined roots are clustered within 1e-5 to report multiplicity.
pub fn dirac_points(
    u: &FourierPotential,
    alpha: Complex64,
    b_field: Complex64,
    cutoff: usize,
    grid: Option<usize>,
) -> Result<DiracPointSet> {
    if b_field.norm() < 1e-14 {
        // protected case: spectrum is exactly (K + Λ*) ∪ (-K + Λ*)
        let mut points = Vec::new();
        for kp in [lattice::k_point(), lattice::k_prime_point()] {
            let (rep, _) = reduce_to_fundamental(kp);
            let d = assemble_d(u, alpha, b_field, rep, cutoff)?;
            let residual = linalg::sigma_min_fast(&d.data, 1e-9, 40)?;
            points.push(DiracPoint {
                k: rep,
                multiplicity: 1,
                residual,
            });
        }
        return Ok(DiracPointSet {
            points,
            alpha,
            b_field,
            cutoff,
        });
    }

    let candidates = match grid {
        Some(g) => sigma_scan_candidates(u, alpha, b_field, g)?,
        None => eigenvalue_candidates(u, alpha, b_field)?,
    };

    // refine every candidate start; keep roots that pass the σ_min gate
    let mut refined: Vec<Complex64> = Vec::new();
    let mut failures = 0usize;
    for start in &candidates {
        match refine_root(u, alpha, b_field, cutoff, *start) {
            Ok(k) => refined.push(k),
            Err(_) => failures += 1,
        }
    }
    if refined.is_empty() {
        return Err(Error::NewtonDiverged {
            start: candidates.first().copied().unwrap_or_default(),
        });
    }
    let _ = failures;

    // cluster refined roots within 1e-5 (mod Λ*) and count members
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for r in &refined {
        let mut placed = false;
        for c in clusters.iter_mut() {
            if distance_mod_dual(c.0, *r) < 1e-5 {
                c.1 += 1;
                placed = true;
                break;
            }
        }
        if !placed {
            let (rep, _) = reduce_to_fundamental(*r);
            clusters.push((rep, 1));
        }
    }

    let mut points = Vec::new();
    for (k, mult) in clusters {
        let d = assemble_d(u, alpha, b_field, k, cutoff)?;
        let residual = linalg::sigma_min_fast(&d.data, 1e-9, 40)?;
        if residual < 1e-9 {
            points.push(DiracPoint {
                k,
                multiplicity: mult,
                residual,
            });
        }
    }
    points.sort_by(|a, b| {
        (b.k.re, b.k.im)
            .partial_cmp(&(a.k.re, a.k.im))
            .unwrap()
    });

    let set = DiracPointSet {
        points,
        alpha,
        b_field,
        cutoff,
    };
    let mismatch = set.pairing_mismatch();
    if mismatch > 1e-8 {
        return Err(Error::CountMismatch {
            count: set.points.len(),
            mismatch,
        });
    }
    Ok(set)
}

/// Candidate starts from one dense eigendecomposition: the truncated
/// spectrum of D_B(α) is the eigenvalue set of D_B(α)+0, so every translate
/// reduces to a candidate mod Λ*. Clusters (radius 1e-2) are ranked by
/// population; a cluster fixed by k → -k represents two merging points and
/// contributes two starts.
fn eigenvalue_candidates(
    u: &FourierPotential,
    alpha: Complex64,
    b_field: Complex64,
) -> Result<Vec<Complex64>> {
    let a = assemble_d(u, alpha, b_field, Complex64::new(0.0, 0.0), SCAN_CUTOFF)?;
    let evs = linalg::eigenvalues(&a.data)?;
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for mu in evs {
        let (rep, _) = reduce_to_fundamental(-mu);
        let mut placed = false;
        for c in clusters.iter_mut() {
            if distance_mod_dual(c[0], rep) < 1e-2 {
                c.push(rep);
                placed = true;
                break;
            }
        }
        if !placed {
            clusters.push(vec![rep]);
        }
    }
    clusters.sort_by_key(|c| std::cmp::Reverse(c.len()));
    let biggest = clusters.first().map(|c| c.len()).unwrap_or(0);
    let mut starts = Vec::new();
    for c in clusters.iter().take(12) {
        if c.len() < (biggest / 8).max(2) {
            continue;
        }
        let mean = c.iter().sum::<Complex64>() / c.len() as f64;
        let medoid = *c
            .iter()
            .min_by(|a, b| {
                (*a - mean)
                    .norm()
                    .partial_cmp(&(*b - mean).norm())
                    .unwrap()
            })
            .unwrap();
        starts.push(medoid);
        // self-paired cluster (2k ∈ Λ*): two points are merging here
        if distance_mod_dual(-medoid, medoid) < 2e-2 && medoid.norm() >= 0.0 {
            let spread = c
                .iter()
                .max_by(|a, b| {
                    (*a - mean)
                        .norm()
                        .partial_cmp(&(*b - mean).norm())
                        .unwrap()
                })
                .copied()
                .unwrap();
            starts.push(spread);
        }
    }
    Ok(starts)
}

/// Spec-style coarse stage: σ_min(D_B(α)+k) on an offset grid over the
/// fundamental cell at the scan cutoff; local minima below threshold become
/// Newton starts.
fn sigma_scan_candidates(
    u: &FourierPotential,
    alpha: Complex64,
    b_field: Complex64,
    grid: usize,
) -> Result<Vec<Complex64>> {
    let g = grid.max(8);
    let e1 = lattice::dual_scale();
    let e2 = lattice::dual_scale() * lattice::omega();
    let mut values = vec![0.0f64; g * g];
    let mut ks = vec![Complex64::new(0.0, 0.0); g * g];
    for i in 0..g {
        for j in 0..g {
            let x = (i as f64 + 0.5) / g as f64 - 0.5;
            let y = (j as f64 + 0.5) / g as f64 - 0.5;
            let k = e1 * x + e2 * y;
            let d = assemble_d(u, alpha, b_field, k, SCAN_CUTOFF)?;
            values[i * g + j] = linalg::sigma_min_fast(&d.data, 1e-4, 8)?;
            ks[i * g + j] = k;
        }
    }
    let mut starts = Vec::new();
    for i in 0..g {
        for j in 0..g {
            let v = values[i * g + j];
            if v > 0.25 {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let ii = (i as i64 + di).rem_euclid(g as i64) as usize;
                    let jj = (j as i64 + dj).rem_euclid(g as i64) as usize;
                    if values[ii * g + jj] < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                starts.push(ks[i * g + j]);
            }
        }
    }
    Ok(starts)
}

/// Newton refinement of one Dirac-point candidate on the shifted branch
/// μ(k) = -1/α. Near Γ the iteration runs in κ = k² because the branch is
/// even in k. Falls back to shift-invert on the Dirac matrix itself
/// (eigenvalue of D_B(α)+0 nearest -k, an exact affine map) if the branch
/// iteration stalls.
fn refine_root(
    u: &FourierPotential,
    alpha: Complex64,
    b_field: Complex64,
    cutoff: usize,
    start: Complex64,
) -> Result<Complex64> {
    let target = -1.0 / alpha;
    let mut k = start;
    let mut anchor = target;
    let mut ok = false;
    for _ in 0..25 {
        if k.norm() < 0.05 {
            k = refine_even_root(u, alpha, b_field, cutoff, k, anchor)?;
            ok = true;
            break;
        }
        let bp = match branch_point(u, k, b_field, cutoff, BranchFamily::Shifted, anchor) {
            Ok(bp) => bp,
            Err(_) => break,
        };
        let f = bp.value - target;
        if bp.derivative.norm() < 1e-12 {
            break;
        }
        let step = f / bp.derivative;
        k -= step;
        anchor = bp.value;
        if step.norm() < 1e-12 {
            ok = true;
            break;
        }
        if step.norm() > 2.0 {
            break;
        }
    }
    if !ok {
        // affine fallback: eigenvalues of D_B(α)+0 satisfy μ(A + kI) = μ(A) + k
        let a = assemble_d(u, alpha, b_field, start, cutoff)?;
        let near = linalg::nearest_eigenpair(&a.data, Complex64::new(0.0, 0.0))?;
        k = start - near.value;
    }
    // polish and verify
    let d = assemble_d(u, alpha, b_field, k, cutoff)?;
    let smin = linalg::sigma_min_fast(&d.data, 1e-9, 50)?;
    if smin > 1e-9 {
        return Err(Error::NewtonDiverged { start });
    }
    Ok(k)
}

/// Newton in the even variable κ = k² for roots near Γ.
fn refine_even_root(
    u: &FourierPotential,
    alpha: Complex64,
    b_field: Complex64,
    cutoff: usize,
    k0: Complex64,
    anchor0: Complex64,
) -> Result<Complex64> {
    let target = -1.0 / alpha;
    let mut kappa = k0 * k0;
    let mut anchor = anchor0;
    for _ in 0..30 {
        let k = kappa.sqrt();
        let bp = branch_point(u, k, b_field, cutoff, BranchFamily::Shifted, anchor)?;
        let f = bp.value - target;
        // dμ/dκ = μ'(k)/(2k); at κ = 0 use a one-sided difference instead
        let dk = if k.norm() > 1e-7 {
            bp.derivative / (2.0 * k)
        } else {
            let h = Complex64::new(1e-6, 0.0);
            let bph = branch_point(
                u,
                h.sqrt(),
                b_field,
                cutoff,
                BranchFamily::Shifted,
                bp.value,
            )?;
            (bph.value - bp.value) / h
        };
        if dk.norm() < 1e-14 {
            return Err(Error::NewtonDiverged { start: k0 });
        }
        let step = f / dk;
        kappa -= step;
        anchor = bp.value;
        if step.norm() < 1e-14 * (1.0 + kappa.norm()) || f.norm() < 1e-13 {
            break;
        }
    }
    Ok(kappa.sqrt())
}

/// One row of a continuation run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TrajectoryRow {
    pub alpha: f64,
    pub k_plus: Complex64,
    pub k_minus: Complex64,
    /// Shifted-branch value at (k₊, B); equals 1/α at a converged root
    /// after the sign convention λ = -μ.
    pub lambda: Complex64,
    /// σ_min(D_B(α)+k₊) at the tracking cutoff.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    pub b_field: Complex64,
    pub cutoff: usize,
}

/// Continue one representative Dirac point k₊(α) over [α_min, α_max] with
/// `steps` rows. k₊ is chosen with Re k ≥ 0 (ties by Im k ≥ 0); k₋ = -k₊.
/// A failed step is retried with halved increments; after too many restarts
/// from fresh coarse scans the continuation is abandoned.
pub fn track_dirac(
    u: &FourierPotential,
    b_field: Complex64,
    alpha_min: f64,
    alpha_max: f64,
    steps: usize,
    cutoff: usize,
) -> Result<Trajectory> {
    assert!(steps >= 2, "need at least two steps");
    assert!(alpha_max > alpha_min);
    let alphas: Vec<f64> = (0..steps)
        .map(|i| alpha_min + (alpha_max - alpha_min) * i as f64 / (steps - 1) as f64)
        .collect();

    let mut rows: Vec<TrajectoryRow> = Vec::with_capacity(steps);
    let mut restarts = 0usize;
    let mut current: Option<Complex64> = None;

    for &alpha in &alphas {
        let ca = Complex64::new(alpha, 0.0);
        let mut found: Option<Complex64> = None;

        if b_field.norm() < 1e-14 {
            let (rep, _) = reduce_to_fundamental(lattice::k_point());
            found = Some(rep);
        } else if let Some(prev) = current {
            // warm continuation with step auto-halving
            let prev_alpha = rows.last().map(|r| r.alpha).unwrap_or(alpha);
            let mut lo = prev_alpha;
            let mut k_lo = prev;
            let mut halvings = 0usize;
            while halvings <= 5 {
                let target = alpha;
                let mid = if halvings == 0 { target } else { (lo + target) / 2.0 };
                match refine_root(u, Complex64::new(mid, 0.0) * Complex64::new(1.0, 0.0), b_field, cutoff, k_lo) {
                    Ok(k) if (mid - alpha).abs() < 1e-15 => {
                        found = Some(k);
                        break;
                    }
                    Ok(k) => {
                        lo = mid;
                        k_lo = k;
                    }
                    Err(_) => {
                        halvings += 1;
                    }
                }
            }
        }

        if found.is_none() {
            // fresh coarse scan
            restarts += 1;
            if restarts > 6 {
                return Err(Error::ContinuationLost {
                    alpha,
                    restarts,
                });
            }
            let set = dirac_points(u, ca, b_field, cutoff, None)?;
            found = pick_representative(&set);
        }

        let k_plus = match found {
            Some(k) => orient_representative(k),
            None => {
                return Err(Error::ContinuationLost {
                    alpha,
                    restarts,
                })
            }
        };
        let d = assemble_d(u, ca, b_field, k_plus, cutoff)?;
        let residual = linalg::sigma_min_fast(&d.data, 1e-9, 40)?;
        let lambda = if b_field.norm() < 1e-14 {
            Complex64::new(1.0 / alpha, 0.0)
        } else {
            match branch_point(
                u,
                k_plus,
                b_field,
                cutoff,
                BranchFamily::Shifted,
                -1.0 / ca,
            ) {
                Ok(bp) => -bp.value,
                Err(_) => Complex64::new(f64::NAN, f64::NAN),
            }
        };
        let (k_minus, _) = reduce_to_fundamental(-k_plus);
        rows.push(TrajectoryRow {
            alpha,
            k_plus,
            k_minus,
            lambda,
            residual,
        });
        current = Some(k_plus);
    }
    Ok(Trajectory {
        rows,
        b_field,
        cutoff,
    })
}

fn pick_representative(set: &DiracPointSet) -> Option<Complex64> {
    set.points
        .iter()
        .map(|p| orient_representative(p.k))
        .max_by(|a, b| {
            (a.re, a.im)
                .partial_cmp(&(b.re, b.im))
                .unwrap()
        })
}

/// Deterministic representative of {k, -k}: Re k ≥ 0, ties by Im k ≥ 0.
fn orient_representative(k: Complex64) -> Complex64 {
    if k.re > 1e-12 || (k.re.abs() <= 1e-12 && k.im >= 0.0) {
        k
    } else {
        -k
    }
}

/// Bloch eigenvalues E₁ ≤ E₂ ≤ … at one quasi-momentum, labeled so that
/// E_{-j} = -E_j. They are computed as the singular values of D_B(α)+k,
/// which equal the non-negative eigenvalues of H_k^B(α) exactly.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BandSlice {
    pub k: Complex64,
    pub energies: Vec<f64>,
}

pub fn bloch_bands(
    u: &FourierPotential,
    alpha: Complex64,
    b_field: Complex64,
    k: Complex64,
    cutoff: usize,
    band_count: usize,
) -> Result<BandSlice> {
    let d = assemble_d(u, alpha, b_field, k, cutoff)?;
    let mut s = linalg::singular_values(&d.data)?;
    s.reverse(); // ascending
    s.truncate(band_count.min(s.len()));
    Ok(BandSlice { k, energies: s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::k_point;
    use approx::assert_abs_diff_eq;

    fn bm() -> FourierPotential {
        FourierPotential::bistritzer_macdonald()
    }

    const N_TEST: usize = 10;

    #[test]
    fn first_magic_angles_match_known_values() {
        let rep = magic_alphas(&bm(), N_TEST, Complex64::new(0.0, 0.0), 60).unwrap();
        let reals = rep.real_positive();
        // first real magic coupling ~ 0.585 (Watson-Luskin value)
        assert!((reals[0] - 0.585).abs() < 2e-3, "alpha1 = {}", reals[0]);
        assert!((reals[1] - 2.221).abs() < 2e-3, "alpha2 = {}", reals[1]);
        for e in &rep.entries {
            assert!(e.residual < 1e-8, "residual {:.2e}", e.residual);
        }
    }

    #[test]
    fn report_closed_under_negation() {
        let rep = magic_alphas(&bm(), 8, Complex64::new(0.0, 0.0), 24).unwrap();
        for e in &rep.entries {
            let best = rep
                .entries
                .iter()
                .map(|f| (f.alpha + e.alpha).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8, "missing -alpha for {}", e.alpha);
        }
    }

    #[test]
    fn branch_is_k_independent_at_zero_field() {
        let rep = magic_alphas(&bm(), N_TEST, Complex64::new(0.0, 0.0), 8).unwrap();
        let lam = 1.0 / rep.real_positive()[0];
        let anchor = Complex64::new(lam, 0.0);
        let mut vals = Vec::new();
        for k in [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.71, -0.33),
            Complex64::new(-1.2, 0.9),
            Complex64::new(2.0, 1.4),
        ] {
            vals.push(lambda_branch(&bm(), k, Complex64::new(0.0, 0.0), N_TEST, anchor).unwrap());
        }
        for v in &vals[1..] {
            assert!((v - vals[0]).norm() < 1e-8, "variation {:.2e}", (v - vals[0]).norm());
        }
    }

    #[test]
    fn branch_symmetries() {
        let anchor = Complex64::new(1.0 / 0.5857, 0.0);
        let b = Complex64::new(0.06, 0.03);
        let k = Complex64::new(0.4, 0.7);
        let om = lattice::omega();
        let l1 = lambda_branch(&bm(), k, b, N_TEST, anchor).unwrap();
        let l2 = lambda_branch(&bm(), -k, b, N_TEST, anchor).unwrap();
        assert!((l1 - l2).norm() < 1e-10, "λ(-k) residual {:.2e}", (l1 - l2).norm());
        let l3 = lambda_branch(&bm(), om * k, om * b, N_TEST, anchor).unwrap();
        assert!((l1 - l3).norm() < 1e-10, "λ(ωk, ωB) residual {:.2e}", (l1 - l3).norm());
        let l4 = lambda_branch(&bm(), k.conj(), b.conj(), N_TEST, anchor.conj()).unwrap();
        assert!((l1.conj() - l4).norm() < 1e-10);
    }

    #[test]
    fn dirac_points_protected_at_zero_field() {
        let set = dirac_points(
            &bm(),
            Complex64::new(0.3, 0.0),
            Complex64::new(0.0, 0.0),
            N_TEST,
            None,
        )
        .unwrap();
        assert_eq!(set.points.len(), 2);
        for p in &set.points {
            let to_k = distance_mod_dual(p.k, k_point())
                .min(distance_mod_dual(p.k, -k_point()));
            assert_abs_diff_eq!(to_k, 0.0, epsilon = 1e-9);
            assert!(p.residual < 1e-10);
        }
    }

    #[test]
    fn dirac_points_on_rectangle_grid_for_real_field() {
        let set = dirac_points(
            &bm(),
            Complex64::new(0.4, 0.0),
            Complex64::new(0.1, 0.0),
            12,
            None,
        )
        .unwrap();
        assert_eq!(set.total_multiplicity(), 2);
        for p in &set.points {
            assert!(p.residual < 1e-9);
            assert!(
                lattice::rectangle_distance(p.k) < 1e-6,
                "distance to grid {:.2e}",
                lattice::rectangle_distance(p.k)
            );
        }
    }

    #[test]
    fn dirac_points_pair_under_reflection_for_complex_field() {
        let b = 0.1 * Complex64::new(0.0, 2.0 * std::f64::consts::PI * 0.2).exp();
        let set = dirac_points(&bm(), Complex64::new(0.4, 0.0), b, 12, None).unwrap();
        assert_eq!(set.total_multiplicity(), 2);
        assert!(set.pairing_mismatch() < 1e-8);
    }

    #[test]
    fn sigma_scan_agrees_with_eigenvalue_candidates() {
        // both coarse routes must land on the same refined roots
        let alpha = Complex64::new(0.45, 0.0);
        let b = Complex64::new(0.08, 0.0);
        let a = dirac_points(&bm(), alpha, b, N_TEST, None).unwrap();
        let c = dirac_points(&bm(), alpha, b, N_TEST, Some(20)).unwrap();
        assert_eq!(a.points.len(), c.points.len());
        for p in &a.points {
            let best = c
                .points
                .iter()
                .map(|q| distance_mod_dual(p.k, q.k))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-7, "route disagreement {best:.2e}");
        }
    }

    #[test]
    fn track_endpoints_near_protected_momentum() {
        let tr = track_dirac(&bm(), Complex64::new(0.1, 0.0), 0.1, 0.5, 5, N_TEST).unwrap();
        assert_eq!(tr.rows.len(), 5);
        let first = &tr.rows[0];
        let dist = distance_mod_dual(first.k_plus, k_point())
            .min(distance_mod_dual(first.k_plus, -k_point()));
        // k_B(α) = K + O(B)
        assert!(dist < 0.5, "endpoint distance to K = {dist:.3}");
        for row in &tr.rows {
            assert!(row.residual < 1e-8, "row residual {:.2e}", row.residual);
            assert!(distance_mod_dual(row.k_minus, -row.k_plus) < 1e-8);
        }
    }

    #[test]
    fn track_zero_field_stays_at_k() {
        let tr = track_dirac(&bm(), Complex64::new(0.0, 0.0), 0.1, 0.5, 5, 8).unwrap();
        for row in &tr.rows {
            let dist = distance_mod_dual(row.k_plus, k_point());
            assert!(dist < 1e-9, "drift {dist:.2e}");
        }
    }

    #[test]
    fn bands_paired_and_zero_at_protected_momentum() {
        let slice = bloch_bands(
            &bm(),
            Complex64::new(0.7, 0.0),
            Complex64::new(0.0, 0.0),
            k_point(),
            N_TEST,
            4,
        )
        .unwrap();
        assert!(slice.energies[0] < 1e-10, "E1(K) = {:.2e}", slice.energies[0]);
        assert!(slice.energies.windows(2).all(|w| w[0] <= w[1]));

        // E_j = -E_{-j}: the Hamiltonian spectrum equals ±singular values
        let h = crate::operator::assemble_h(
            &bm(),
            Complex64::new(0.7, 0.0),
            Complex64::new(0.0, 0.0),
            k_point(),
            6,
        )
        .unwrap();
        let evs = linalg::hermitian_eigenvalues(&h.data).unwrap();
        let d = assemble_d(
            &bm(),
            Complex64::new(0.7, 0.0),
            Complex64::new(0.0, 0.0),
            k_point(),
            6,
        )
        .unwrap();
        let mut s = linalg::singular_values(&d.data).unwrap();
        s.reverse();
        for (j, sv) in s.iter().take(6).enumerate() {
            let up = evs.iter().map(|e| (e - sv).abs()).fold(f64::INFINITY, f64::min);
            let dn = evs.iter().map(|e| (e + sv).abs()).fold(f64::INFINITY, f64::min);
            assert!(up < 1e-10 && dn < 1e-10, "band {j} pairing {up:.2e}/{dn:.2e}");
        }
    }
}
