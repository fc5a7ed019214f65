//! Truncated plane-wave matrices for the magnetic Dirac operator D_B(α)+k,
//! the chiral Hamiltonian H_k^B(α), and the Birman-Schwinger operators
//! T_k(B) and its resolvent-shifted variant.
//!
//! The basis indexes two sheets of plane waves exp(i⟨z, q⟩) with
//! q = (4πi/√3)(m + nω) + κ_sheet, κ₁ = -K and κ₂ = +K, matching the
//! boundary characters diag(e^{-i⟨γ,K⟩}, e^{i⟨γ,K⟩}) of the domain. On that
//! basis 2D_z̄ is diagonal with eigenvalue q, and multiplication by a
//! potential mode shifts the (m, n) coordinates by an exact integer transfer.

use crate::error::{Error, Result};
use crate::lattice::{self, DualCoord};
use crate::potential::FourierPotential;
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use std::io::{Read, Write};

/// Two-sheet plane-wave index set with cutoff |m|, |n| ≤ N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisIndexSet {
    cutoff: usize,
}

impl BasisIndexSet {
    pub fn new(cutoff: usize) -> Self {
        Self { cutoff }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Points per side of the (m, n) square.
    pub fn side(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn sheet_dim(&self) -> usize {
        self.side() * self.side()
    }

    /// Total dimension 2(2N+1)².
    pub fn dim(&self) -> usize {
        2 * self.sheet_dim()
    }

    /// Flat index of (sheet, m, n); sheet-major, row-major in (m, n).
    pub fn index(&self, sheet: usize, m: i64, n: i64) -> Option<usize> {
        let c = self.cutoff as i64;
        if sheet > 1 || m.abs() > c || n.abs() > c {
            return None;
        }
        let side = self.side();
        Some(sheet * self.sheet_dim() + ((m + c) as usize) * side + (n + c) as usize)
    }

    /// Inverse of `index`.
    pub fn entry(&self, idx: usize) -> (usize, i64, i64) {
        let side = self.side();
        let c = self.cutoff as i64;
        let sheet = idx / self.sheet_dim();
        let rem = idx % self.sheet_dim();
        let m = (rem / side) as i64 - c;
        let n = (rem % side) as i64 - c;
        (sheet, m, n)
    }

    /// Momentum offset of a sheet: κ₁ = -K, κ₂ = +K.
    pub fn sheet_shift(sheet: usize) -> Complex64 {
        if sheet == 0 {
            -lattice::k_point()
        } else {
            lattice::k_point()
        }
    }

    /// Momentum q(sheet, m, n).
    pub fn momentum(&self, idx: usize) -> Complex64 {
        let (sheet, m, n) = self.entry(idx);
        DualCoord::new(m, n).value() + Self::sheet_shift(sheet)
    }
}

/// Which operator a matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// D_B(α) + k
    Dirac,
    /// H_k^B(α), conjugate-symmetric, dimension 4(2N+1)²
    Hamiltonian,
    /// T_k(B) = (2D_z̄ - k)^{-1} [[B, U], [U(-·), -B]]
    BirmanSchwinger,
    /// ((2D_z̄ - k) + 𝓑)^{-1} [[0, U], [U(-·), 0]]
    BirmanSchwingerShifted,
}

/// Dense complex matrix over the indexed basis plus assembly metadata.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub data: Array2<Complex64>,
    pub basis: BasisIndexSet,
    pub kind: OperatorKind,
    pub alpha: Complex64,
    pub b_field: Complex64,
    pub k: Complex64,
}

/// Add the off-diagonal potential blocks scaled by `scale`: row sheet 1,
/// column sheet 2 couples through U, the transposed block through U(-z).
///
/// Sheet-coordinate transfer for a mode with offset `off`: the U-block entry
/// sits at (m₁, n₁) = (m₂, n₂) + (-1, -2) + off since the mode momentum is
/// K + off and -3K has coordinates (1, 2).
fn add_potential_blocks(
    a: &mut Array2<Complex64>,
    basis: &BasisIndexSet,
    u: &FourierPotential,
    scale: Complex64,
) -> Result<()> {
    let c = basis.cutoff() as i64;
    for mode in u.modes() {
        let off = mode.offset;
        let mut coupled = 0usize;
        for m2 in -c..=c {
            for n2 in -c..=c {
                let (m1, n1) = (m2 - 1 + off.m, n2 - 2 + off.n);
                if let (Some(i), Some(j)) = (basis.index(0, m1, n1), basis.index(1, m2, n2)) {
                    a[[i, j]] += scale * mode.coeff;
                    coupled += 1;
                }
            }
        }
        // U(-z) has momenta -(K + off): sheet-2 row at (m₂, n₂) = (m₁, n₁) + (1, 2) - off
        for m1 in -c..=c {
            for n1 in -c..=c {
                let (m2, n2) = (m1 + 1 - off.m, n1 + 2 - off.n);
                if let (Some(i), Some(j)) = (basis.index(1, m2, n2), basis.index(0, m1, n1)) {
                    a[[i, j]] += scale * mode.coeff;
                    coupled += 1;
                }
            }
        }
        if coupled == 0 {
            return Err(Error::CutoffTooSmall {
                cutoff: basis.cutoff(),
                m: off.m,
                n: off.n,
            });
        }
    }
    Ok(())
}

/// Assemble D_B(α) + k: diagonal q + k ± B per sheet plus the α-scaled
/// potential blocks.
pub fn assemble_d(
    u: &FourierPotential,
    alpha: Complex64,
    b_field: Complex64,
    k: Complex64,
    cutoff: usize,
) -> Result<OperatorMatrix> {
    assert!(cutoff >= 1, "cutoff must be at least 1");
    let basis = BasisIndexSet::new(cutoff);
    let dim = basis.dim();
    let mut a = Array2::zeros((dim, dim));
    for idx in 0..dim {
        let (sheet, _, _) = basis.entry(idx);
        let b = if sheet == 0 { b_field } else { -b_field };
        a[[idx, idx]] = basis.momentum(idx) + k + b;
    }
    add_potential_blocks(&mut a, &basis, u, alpha)?;
    Ok(OperatorMatrix {
        data: a,
        basis,
        kind: OperatorKind::Dirac,
        alpha,
        b_field,
        k,
    })
}

/// Assemble H_k^B(α) = [[0, (D_B(α)+k)^*], [D_B(α)+k, 0]]; conjugate
/// symmetric, dimension 4(2N+1)². The lower-left block equals `assemble_d`.
pub fn assemble_h(
    u: &FourierPotential,
    alpha: Complex64,
    b_field: Complex64,
    k: Complex64,
    cutoff: usize,
) -> Result<OperatorMatrix> {
    let d = assemble_d(u, alpha, b_field, k, cutoff)?;
    let n = d.basis.dim();
    let mut h = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            let v = d.data[[i, j]];
            h[[n + i, j]] = v;
            h[[j, n + i]] = v.conj();
        }
    }
    Ok(OperatorMatrix {
        data: h,
        basis: d.basis,
        kind: OperatorKind::Hamiltonian,
        alpha,
        b_field,
        k,
    })
}

/// Assemble the Birman-Schwinger operator. Unshifted:
/// T_k(B) = (2D_z̄ - k)^{-1} [[B, U], [U(-·), -B]]; shifted variant replaces
/// the resolvent denominators by q - k ± B per sheet and drops the diagonal
/// of the multiplier.
pub fn assemble_t(
    u: &FourierPotential,
    k: Complex64,
    b_field: Complex64,
    cutoff: usize,
    shifted: bool,
) -> Result<OperatorMatrix> {
    assert!(cutoff >= 1, "cutoff must be at least 1");
    let basis = BasisIndexSet::new(cutoff);
    let dim = basis.dim();

    let mut resolvent = Array1::zeros(dim);
    for idx in 0..dim {
        let (sheet, _, _) = basis.entry(idx);
        let q = basis.momentum(idx);
        let denom = if shifted {
            let b = if sheet == 0 { b_field } else { -b_field };
            q - k + b
        } else {
            q - k
        };
        if denom.norm() <= 1e-8 {
            return Err(Error::ResolventPole {
                q,
                dist: denom.norm(),
            });
        }
        resolvent[idx] = 1.0 / denom;
    }

    let mut v = Array2::zeros((dim, dim));
    if !shifted {
        for idx in 0..dim {
            let (sheet, _, _) = basis.entry(idx);
            v[[idx, idx]] = if sheet == 0 { b_field } else { -b_field };
        }
    }
    add_potential_blocks(&mut v, &basis, u, Complex64::new(1.0, 0.0))?;

    for i in 0..dim {
        let r = resolvent[i];
        for j in 0..dim {
            v[[i, j]] *= r;
        }
    }
    Ok(OperatorMatrix {
        data: v,
        basis,
        kind: if shifted {
            OperatorKind::BirmanSchwingerShifted
        } else {
            OperatorKind::BirmanSchwinger
        },
        alpha: Complex64::new(0.0, 0.0),
        b_field,
        k,
    })
}

const DUMP_MAGIC: &[u8; 4] = b"TBGM";
const DUMP_VERSION: u32 = 1;

/// Binary dump: 16-byte header ("TBGM", version u32, dim u32, reserved u32),
/// then row-major (re, im) f64 pairs, little-endian.
pub fn write_dump<W: Write>(mat: &OperatorMatrix, w: &mut W) -> Result<()> {
    let dim = mat.data.nrows() as u32;
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&DUMP_VERSION.to_le_bytes())?;
    w.write_all(&dim.to_le_bytes())?;
    w.write_all(&0u32.to_le_bytes())?;
    for row in mat.data.rows() {
        for z in row {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Read back a matrix dump, validating the header.
pub fn read_dump<R: Read>(r: &mut R) -> Result<Array2<Complex64>> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    if &head[0..4] != DUMP_MAGIC {
        return Err(Error::InvalidInput("bad dump magic".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != DUMP_VERSION {
        return Err(Error::InvalidInput(format!("unsupported dump version {version}")));
    }
    let dim = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let mut buf = vec![0u8; dim * dim * 16];
    r.read_exact(&mut buf)?;
    let mut a = Array2::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            let o = (i * dim + j) * 16;
            let re = f64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[o + 8..o + 16].try_into().unwrap());
            a[[i, j]] = Complex64::new(re, im);
        }
    }
    Ok(a)
}
