//! Dense complex linear algebra: Kronecker products, partial traces,
//! Hermitian eigendecomposition, matrix functions, and state distances.
//!
//! Everything here works on [`ComplexMatrix`], a dense row-major matrix of
//! `Complex64`. Dimensions in this crate stay small (tens), so there is no
//! sparse or blocked path.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::DensityMatrix;

/// Default relative tolerance for validation checks (Frobenius).
pub const DEFAULT_TOL: f64 = 1e-9;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Wire form: `{"rows": n, "cols": m, "re": [[..]], "im": [[..]]}`.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        let re = (0..m.rows)
            .map(|r| (0..m.cols).map(|c| m[(r, c)].re).collect())
            .collect();
        let im = (0..m.rows)
            .map(|r| (0..m.cols).map(|c| m[(r, c)].im).collect())
            .collect();
        MatrixJson {
            rows: m.rows,
            cols: m.cols,
            re,
            im,
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = String;

    fn try_from(j: MatrixJson) -> std::result::Result<Self, String> {
        let check = |name: &str, part: &[Vec<f64>]| -> std::result::Result<(), String> {
            if part.len() != j.rows {
                return Err(format!(
                    "field {name:?} has {} rows, expected {}",
                    part.len(),
                    j.rows
                ));
            }
            for (r, row) in part.iter().enumerate() {
                if row.len() != j.cols {
                    return Err(format!(
                        "field {name:?} row {r} has {} entries, expected {}",
                        row.len(),
                        j.cols
                    ));
                }
            }
            Ok(())
        };
        check("re", &j.re)?;
        check("im", &j.im)?;
        let mut m = ComplexMatrix::zeros(j.rows, j.cols);
        for r in 0..j.rows {
            for c in 0..j.cols {
                m[(r, c)] = Complex64::new(j.re[r][c], j.im[r][c]);
            }
        }
        Ok(m)
    }
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Diagonal matrix from real entries.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Build from rows of `(re, im)` pairs; panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        ComplexMatrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        }
    }

    /// Rank-one outer product `v v†`.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(c, r)] = self[(r, c)].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `self + other`; panics on shape mismatch (programming error).
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// In-place `self += s * other`.
    pub fn add_scaled_assign(&mut self, s: f64, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    /// Matrix product; panics on inner-dimension mismatch (programming error).
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik.re == 0.0 && aik.im == 0.0 {
                    continue;
                }
                let row_out = i * other.cols;
                let row_b = k * other.cols;
                for j in 0..other.cols {
                    out.data[row_out + j] += aik * other.data[row_b + j];
                }
            }
        }
        out
    }

    /// `self * v` for a vector.
    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|k| self[(i, k)] * v[k])
                    .sum::<Complex64>()
            })
            .collect()
    }

    /// Relative Hermiticity deviation ‖M − M†‖_F / max(1, ‖M‖_F).
    pub fn hermiticity_deviation(&self) -> f64 {
        let scale = self.frobenius_norm().max(1.0);
        self.sub(&self.adjoint()).frobenius_norm() / scale
    }

    pub fn ensure_hermitian(&self, tol: f64) -> Result<()> {
        self.ensure_square()?;
        let deviation = self.hermiticity_deviation();
        if deviation <= tol {
            Ok(())
        } else {
            Err(Error::NotHermitian { deviation, tol })
        }
    }

    /// Extract column `c`.
    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }
}

/// Kronecker product; output dimensions multiply.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for ia in 0..a.rows() {
        for ja in 0..a.cols() {
            let av = a[(ia, ja)];
            if av.re == 0.0 && av.im == 0.0 {
                continue;
            }
            for ib in 0..b.rows() {
                for jb in 0..b.cols() {
                    out[(ia * b.rows() + ib, ja * b.cols() + jb)] = av * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Kronecker product of vectors.
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

/// Partial trace over the subsystems NOT listed in `keep`.
///
/// `dims` lists the subsystem dimensions in tensor order (first factor most
/// significant in the row-major flattening); `keep` is the set of subsystem
/// indices to retain, in ascending order of appearance.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let n = m.ensure_square()?;
    let total: usize = dims.iter().product();
    if total != n || dims.contains(&0) {
        return Err(Error::BadSubsystemDims {
            dims: dims.to_vec(),
            size: n,
        });
    }
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::BadSubsystemDims {
                dims: dims.to_vec(),
                size: n,
            });
        }
    }

    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let traced: Vec<usize> = (0..dims.len())
        .filter(|i| !keep_sorted.contains(i))
        .collect();

    // Row-major strides per subsystem.
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }

    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&i| dims[i]).collect();
    let kept_total: usize = kept_dims.iter().product();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let traced_total: usize = traced_dims.iter().product::<usize>().max(1);

    // Flat offset from a multi-index restricted to a subsystem subset.
    let offset = |subset: &[usize], subset_dims: &[usize], mut idx: usize| -> usize {
        let mut off = 0;
        for pos in (0..subset.len()).rev() {
            let d = subset_dims[pos];
            off += (idx % d) * strides[subset[pos]];
            idx /= d;
        }
        off
    };

    let mut out = ComplexMatrix::zeros(kept_total, kept_total);
    for rk in 0..kept_total {
        let row_base = offset(&keep_sorted, &kept_dims, rk);
        for ck in 0..kept_total {
            let col_base = offset(&keep_sorted, &kept_dims, ck);
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..traced_total {
                let toff = offset(&traced, &traced_dims, t);
                acc += m[(row_base + toff, col_base + toff)];
            }
            out[(rk, ck)] = acc;
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues in ascending
/// order and a unitary matrix whose columns are the matching eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// ‖V diag(λ) V† − M‖_F, the reconstruction residual against `m`.
    pub fn reconstruction_error(&self, m: &ComplexMatrix) -> f64 {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut rec = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            let lam = self.eigenvalues[k];
            for i in 0..n {
                let vik = v[(i, k)] * lam;
                for j in 0..n {
                    rec[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        rec.sub(m).frobenius_norm()
    }
}

/// Hermiticity gate plus cyclic Jacobi; see [`hermitian_eigenvalues`] for the
/// eigenvalue-only variant used in hot loops.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    m.ensure_hermitian(DEFAULT_TOL)?;
    Ok(jacobi_hermitian(m, true))
}

/// Ascending eigenvalues of a Hermitian matrix without accumulating vectors.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    m.ensure_hermitian(DEFAULT_TOL)?;
    Ok(jacobi_hermitian(m, false).eigenvalues)
}

/// Cyclic Jacobi for complex Hermitian matrices.
///
/// The input is symmetrized first so that roundoff-level non-Hermiticity
/// cannot bias the rotations. Convergence: off-diagonal Frobenius norm below
/// `1e-14 * ‖M‖_F`, with a hard cap of 64 sweeps.
fn jacobi_hermitian(m: &ComplexMatrix, want_vectors: bool) -> EigenDecomposition {
    let n = m.rows();
    // Work on the Hermitian part (M + M†)/2.
    let mut a = m.add(&m.adjoint()).scale_real(0.5);
    let mut v = if want_vectors {
        ComplexMatrix::identity(n)
    } else {
        ComplexMatrix::zeros(0, 0)
    };

    let norm = a.frobenius_norm();
    let stop = 1e-14 * norm.max(f64::MIN_POSITIVE);

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    for _sweep in 0..64 {
        if off_norm(&a) <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= stop / (n as f64) {
                    continue;
                }
                let phase = apq / mag; // e^{i phi}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sigma = phase * s; // s * e^{i phi}

                // Columns: B = A J with J[p][p]=c, J[p][q]=sigma,
                // J[q][p]=-conj(sigma), J[q][q]=c.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * sigma.conj();
                    a[(k, q)] = akp * sigma + akq * c;
                }
                // Rows: A' = J† B.
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * sigma;
                    a[(q, k)] = apk * sigma.conj() + aqk * c;
                }
                // Clean the rotated pair: exact zeros and real diagonal.
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

                if want_vectors {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * c - vkq * sigma.conj();
                        v[(k, q)] = vkp * sigma + vkq * c;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = if want_vectors {
        let mut sorted = ComplexMatrix::zeros(n, n);
        for (new_c, &old_c) in order.iter().enumerate() {
            for r in 0..n {
                sorted[(r, new_c)] = v[(r, old_c)];
            }
        }
        sorted
    } else {
        ComplexMatrix::zeros(0, 0)
    };

    EigenDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// PSD square root via eigendecomposition. Eigenvalues in `[-tol, 0)` are
/// clipped to zero; anything below `-tol` is an error.
pub fn psd_sqrt(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    if let Some(&lam) = eig
        .eigenvalues
        .iter()
        .find(|&&lam| lam < -tol * eig.eigenvalues.last().map(|l| l.abs()).unwrap_or(1.0).max(1.0))
    {
        return Err(Error::NotPsd {
            min_eigenvalue: lam,
        });
    }
    let n = m.rows();
    let v = &eig.eigenvectors;
    let mut out = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let lam = eig.eigenvalues[k].max(0.0).sqrt();
        if lam == 0.0 {
            continue;
        }
        for i in 0..n {
            let vik = v[(i, k)] * lam;
            for j in 0..n {
                out[(i, j)] += vik * v[(j, k)].conj();
            }
        }
    }
    Ok(out)
}

/// exp(i·t·H) for Hermitian `h`, via eigendecomposition.
pub fn expi_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    let n = h.rows();
    let v = &eig.eigenvectors;
    let mut out = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let phase = Complex64::new(0.0, t * eig.eigenvalues[k]).exp();
        for i in 0..n {
            let vik = v[(i, k)] * phase;
            for j in 0..n {
                out[(i, j)] += vik * v[(j, k)].conj();
            }
        }
    }
    Ok(out)
}

/// Uhlmann fidelity F(ρ,σ) = (Tr√(√ρ σ √ρ))², clamped to [0, 1].
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            context: "fidelity",
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    let root = psd_sqrt(rho.matrix(), DEFAULT_TOL)?;
    let inner = root.matmul(sigma.matrix()).matmul(&root);
    let eig = hermitian_eigenvalues(&inner)?;
    let tr: f64 = eig.iter().map(|&lam| lam.max(0.0).sqrt()).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// Bures distance D_B = √(2(1 − √F)).
pub fn bures_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let f = fidelity(rho, sigma)?;
    Ok((2.0 * (1.0 - f.sqrt())).max(0.0).sqrt())
}

/// Frobenius norm of the commutator [a, b].
pub fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let n = a.ensure_square()?;
    let nb = b.ensure_square()?;
    if n != nb {
        return Err(Error::DimensionMismatch {
            context: "commutator",
            expected: n,
            got: nb,
        });
    }
    Ok(a.matmul(b).sub(&b.matmul(a)).frobenius_norm())
}
