//! Dense complex matrices of fixed size 2 and 4.
//!
//! Only what the SWITCH simulation needs: products, adjoints, the Kronecker
//! product (first factor = control, second factor = system), traces and
//! density-matrix validation.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Max |a_ij - conj(a_ji)| accepted for a Hermitian matrix.
pub const TOL_HERMITIAN: f64 = 1e-12;
/// Max |tr(a) - 1| accepted for a density matrix.
pub const TOL_TRACE: f64 = 1e-12;
/// Smallest eigenvalue accepted for a 2×2 density matrix.
pub const TOL_PSD_2: f64 = 1e-12;
/// Smallest eigenvalue accepted for a 4×4 joint state.
pub const TOL_PSD_4: f64 = 1e-10;
/// Off-diagonal magnitude (and negative-diagonal floor) accepted by [`diag_sqrt`].
pub const TOL_DIAGONAL: f64 = 1e-14;

/// Tolerances used by density-matrix validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermitian: f64,
    pub trace: f64,
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: TOL_HERMITIAN,
            trace: TOL_TRACE,
            psd: TOL_PSD_2,
        }
    }
}

/// Square complex matrix of fixed dimension `N`, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat<const N: usize>(pub [[Complex64; N]; N]);

pub type CMat2 = CMat<2>;
pub type CMat4 = CMat<4>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

impl<const N: usize> CMat<N> {
    pub fn zeros() -> Self {
        CMat([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for k in 0..N {
            m.0[k][k] = ONE;
        }
        m
    }

    /// Diagonal matrix with the given real entries.
    pub fn from_real_diag(d: [f64; N]) -> Self {
        let mut m = Self::zeros();
        for k in 0..N {
            m.0[k][k] = Complex64::new(d[k], 0.0);
        }
        m
    }

    pub fn from_real(rows: [[f64; N]; N]) -> Self {
        let mut m = Self::zeros();
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                m.0[r][c] = Complex64::new(v, 0.0);
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for r in 0..N {
            for c in 0..N {
                m.0[c][r] = self.0[r][c].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..N).map(|k| self.0[k][k]).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_offdiag(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..N {
            for c in 0..N {
                if r != c {
                    worst = worst.max(self.0[r][c].norm());
                }
            }
        }
        worst
    }

    /// max |a_ij - conj(a_ji)|
    pub fn hermiticity_violation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `a · b · a†`
    pub fn sandwich(&self, inner: &Self) -> Self {
        *self * *inner * self.adjoint()
    }
}

impl<const N: usize> Default for CMat<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> Index<(usize, usize)> for CMat<N> {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.0[r][c]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for CMat<N> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.0[r][c]
    }
}

impl<const N: usize> Add for CMat<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for r in 0..N {
            for c in 0..N {
                self.0[r][c] += rhs.0[r][c];
            }
        }
        self
    }
}

impl<const N: usize> Sub for CMat<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for r in 0..N {
            for c in 0..N {
                self.0[r][c] -= rhs.0[r][c];
            }
        }
        self
    }
}

impl<const N: usize> Mul for CMat<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zeros();
        for r in 0..N {
            for k in 0..N {
                let a = self.0[r][k];
                if a == ZERO {
                    continue;
                }
                for c in 0..N {
                    m.0[r][c] += a * rhs.0[k][c];
                }
            }
        }
        m
    }
}

impl<const N: usize> std::iter::Sum for CMat<N> {
    fn sum<It: Iterator<Item = Self>>(iter: It) -> Self {
        iter.fold(Self::zeros(), |acc, m| acc + m)
    }
}

pub fn multiply(a: &CMat2, b: &CMat2) -> CMat2 {
    *a * *b
}

pub fn adjoint<const N: usize>(a: &CMat<N>) -> CMat<N> {
    a.adjoint()
}

pub fn trace<const N: usize>(a: &CMat<N>) -> Complex64 {
    a.trace()
}

/// Kronecker product `control ⊗ system`. Index `2*c + s` addresses control
/// basis state `c` and system basis state `s`.
pub fn kron(control: &CMat2, system: &CMat2) -> CMat4 {
    let mut m = CMat4::zeros();
    for cr in 0..2 {
        for cc in 0..2 {
            let a = control.0[cr][cc];
            for sr in 0..2 {
                for sc in 0..2 {
                    m.0[2 * cr + sr][2 * cc + sc] = a * system.0[sr][sc];
                }
            }
        }
    }
    m
}

/// The 2×2 block `joint[(a, ·), (b, ·)]` for control indices `a`, `b`.
pub fn control_block(joint: &CMat4, a: usize, b: usize) -> CMat2 {
    let mut m = CMat2::zeros();
    for sr in 0..2 {
        for sc in 0..2 {
            m.0[sr][sc] = joint.0[2 * a + sr][2 * b + sc];
        }
    }
    m
}

pub mod pauli {
    use super::{CMat2, I, ONE, ZERO};

    pub fn x() -> CMat2 {
        super::CMat([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn y() -> CMat2 {
        super::CMat([[ZERO, -I], [I, ZERO]])
    }

    pub fn z() -> CMat2 {
        super::CMat([[ONE, ZERO], [ZERO, -ONE]])
    }
}

/// Elementwise square root of a diagonal matrix with nonnegative entries.
pub fn diag_sqrt(a: &CMat2) -> Result<CMat2> {
    let off = a.max_offdiag();
    if off > TOL_DIAGONAL {
        return Err(Error::NonDiagonalInput { max_offdiag: off });
    }
    let mut out = CMat2::zeros();
    for k in 0..2 {
        let d = a.0[k][k];
        if d.re < -TOL_DIAGONAL || d.im.abs() > TOL_DIAGONAL {
            return Err(Error::NegativeDiagonal { value: d.re });
        }
        out.0[k][k] = Complex64::new(d.re.max(0.0).sqrt(), 0.0);
    }
    Ok(out)
}

/// Eigenvalues (ascending) of the Hermitian part of a 2×2 matrix.
pub fn hermitian_eigenvalues_2(a: &CMat2) -> [f64; 2] {
    let p = a.0[0][0].re;
    let q = a.0[1][1].re;
    let b = 0.5 * (a.0[0][1] + a.0[1][0].conj());
    let mean = 0.5 * (p + q);
    let radius = (0.25 * (p - q) * (p - q) + b.norm_sqr()).sqrt();
    [mean - radius, mean + radius]
}

/// Whether `a + shift·I` admits a Cholesky factorization, i.e. whether every
/// eigenvalue of the Hermitian matrix `a` exceeds `-shift`.
fn cholesky_succeeds<const N: usize>(a: &CMat<N>, shift: f64) -> bool {
    let mut l = [[ZERO; N]; N];
    for j in 0..N {
        let mut d = a.0[j][j].re + shift;
        for k in 0..j {
            d -= l[j][k].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let djj = d.sqrt();
        l[j][j] = Complex64::new(djj, 0.0);
        for i in (j + 1)..N {
            let mut s = a.0[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = s / djj;
        }
    }
    true
}

/// A validated 2×2 density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2(CMat2);

impl DensityMatrix2 {
    pub fn new(a: CMat2) -> Result<Self> {
        validate_density(&a)
    }

    pub fn with_tolerances(a: CMat2, tol: &Tolerances) -> Result<Self> {
        validate_density_with(&a, tol)
    }

    /// Wraps a matrix already known to be a valid state (built from a
    /// closed form). Not checked.
    pub(crate) fn new_unchecked(a: CMat2) -> Self {
        DensityMatrix2(a)
    }

    pub fn matrix(&self) -> &CMat2 {
        &self.0
    }

    /// Diagonal entries (populations) as reals.
    pub fn populations(&self) -> [f64; 2] {
        [self.0 .0[0][0].re, self.0 .0[1][1].re]
    }
}

impl From<DensityMatrix2> for CMat2 {
    fn from(d: DensityMatrix2) -> CMat2 {
        d.0
    }
}

pub fn validate_density(a: &CMat2) -> Result<DensityMatrix2> {
    validate_density_with(a, &Tolerances::default())
}

pub fn validate_density_with(a: &CMat2, tol: &Tolerances) -> Result<DensityMatrix2> {
    let herm = a.hermiticity_violation();
    if herm > tol.hermitian {
        return Err(Error::NotHermitian { violation: herm });
    }
    let tr = a.trace();
    let tr_err = (tr - ONE).norm();
    if tr_err > tol.trace {
        return Err(Error::TraceNotOne { violation: tr_err });
    }
    let lowest = hermitian_eigenvalues_2(a)[0];
    if lowest < -tol.psd {
        return Err(Error::NotPsd { violation: lowest });
    }
    Ok(DensityMatrix2(*a))
}

/// Checks a 4×4 matrix for the density-matrix properties. PSD is tested by a
/// shifted Cholesky factorization, so no eigendecomposition is needed.
pub fn validate_density4(a: &CMat4, tol: &Tolerances) -> Result<()> {
    let herm = a.hermiticity_violation();
    if herm > tol.hermitian {
        return Err(Error::NotHermitian { violation: herm });
    }
    let tr_err = (a.trace() - ONE).norm();
    if tr_err > tol.trace {
        return Err(Error::TraceNotOne { violation: tr_err });
    }
    let hermitian_part = (*a + a.adjoint()).scale_real(0.5);
    if !cholesky_succeeds(&hermitian_part, tol.psd) {
        // Report the smallest diagonal as a coarse indicator of the violation.
        let worst = (0..4).map(|k| a.0[k][k].re).fold(f64::INFINITY, f64::min);
        return Err(Error::NotPsd {
            violation: worst.min(-tol.psd),
        });
    }
    Ok(())
}
