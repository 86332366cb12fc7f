//! Small dense complex matrices for one- and two-qubit operators.
//!
//! Everything here is fixed-size (2×2 and 4×4), double precision, and
//! allocation-free. The Hermitian eigensolvers are the only nontrivial
//! pieces: a closed form for 2×2 and a cyclic Jacobi sweep for 4×4.

use num_complex::Complex64;

/// Convenience alias used throughout the crate.
pub type C64 = Complex64;

pub(crate) const ZERO: C64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: C64 = Complex64::new(1.0, 0.0);

/// A 2×2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    data: [[C64; 2]; 2],
}

impl Mat2 {
    pub fn new(data: [[C64; 2]; 2]) -> Self {
        Self { data }
    }

    pub fn zero() -> Self {
        Self::new([[ZERO; 2]; 2])
    }

    pub fn identity() -> Self {
        Self::new([[ONE, ZERO], [ZERO, ONE]])
    }

    /// Diagonal matrix with real entries.
    pub fn diag(a: f64, b: f64) -> Self {
        Self::new([[C64::new(a, 0.0), ZERO], [ZERO, C64::new(b, 0.0)]])
    }

    /// Rank-one projector |v⟩⟨v| (no normalization applied).
    pub fn outer(v: [C64; 2]) -> Self {
        let mut m = Self::zero();
        for r in 0..2 {
            for c in 0..2 {
                m.data[r][c] = v[r] * v[c].conj();
            }
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r][c]
    }

    pub fn data(&self) -> [[C64; 2]; 2] {
        self.data
    }

    pub fn add(&self, other: &Mat2) -> Mat2 {
        let mut m = Self::zero();
        for r in 0..2 {
            for c in 0..2 {
                m.data[r][c] = self.data[r][c] + other.data[r][c];
            }
        }
        m
    }

    pub fn sub(&self, other: &Mat2) -> Mat2 {
        let mut m = Self::zero();
        for r in 0..2 {
            for c in 0..2 {
                m.data[r][c] = self.data[r][c] - other.data[r][c];
            }
        }
        m
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let mut m = *self;
        for row in m.data.iter_mut() {
            for e in row.iter_mut() {
                *e *= s;
            }
        }
        m
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let mut m = Self::zero();
        for r in 0..2 {
            for c in 0..2 {
                let mut acc = ZERO;
                for k in 0..2 {
                    acc += self.data[r][k] * other.data[k][c];
                }
                m.data[r][c] = acc;
            }
        }
        m
    }

    pub fn adjoint(&self) -> Mat2 {
        let mut m = Self::zero();
        for r in 0..2 {
            for c in 0..2 {
                m.data[r][c] = self.data[c][r].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        self.data[0][0] + self.data[1][1]
    }

    /// Tr(A·B) without forming the product.
    pub fn trace_mul(&self, other: &Mat2) -> C64 {
        let mut acc = ZERO;
        for r in 0..2 {
            for k in 0..2 {
                acc += self.data[r][k] * other.data[k][r];
            }
        }
        acc
    }

    /// Largest absolute deviation from Hermiticity over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.data[r][c] - adj.data[r][c]).norm());
            }
        }
        worst
    }

    /// (A + A†)/2.
    pub fn hermitian_part(&self) -> Mat2 {
        self.add(&self.adjoint()).scale(0.5)
    }

    /// Kronecker product, first factor acting on the more significant qubit.
    pub fn kron(&self, other: &Mat2) -> Mat4 {
        let mut m = Mat4::zero();
        for ar in 0..2 {
            for ac in 0..2 {
                for br in 0..2 {
                    for bc in 0..2 {
                        m.data[2 * ar + br][2 * ac + bc] = self.data[ar][ac] * other.data[br][bc];
                    }
                }
            }
        }
        m
    }
}

/// A 4×4 complex matrix, row-major, basis order |00⟩,|01⟩,|10⟩,|11⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat4 {
    data: [[C64; 4]; 4],
}

impl Mat4 {
    pub fn new(data: [[C64; 4]; 4]) -> Self {
        Self { data }
    }

    pub fn zero() -> Self {
        Self::new([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            m.data[i][i] = ONE;
        }
        m
    }

    /// Rank-one projector |v⟩⟨v| on the two-qubit space.
    pub fn outer(v: [C64; 4]) -> Self {
        let mut m = Self::zero();
        for r in 0..4 {
            for c in 0..4 {
                m.data[r][c] = v[r] * v[c].conj();
            }
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r][c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r][c] = v;
    }

    pub fn data(&self) -> [[C64; 4]; 4] {
        self.data
    }

    pub fn add(&self, other: &Mat4) -> Mat4 {
        let mut m = Self::zero();
        for r in 0..4 {
            for c in 0..4 {
                m.data[r][c] = self.data[r][c] + other.data[r][c];
            }
        }
        m
    }

    pub fn scale(&self, s: f64) -> Mat4 {
        let mut m = self.clone();
        for row in m.data.iter_mut() {
            for e in row.iter_mut() {
                *e *= s;
            }
        }
        m
    }

    pub fn mul(&self, other: &Mat4) -> Mat4 {
        let mut m = Self::zero();
        for r in 0..4 {
            for c in 0..4 {
                let mut acc = ZERO;
                for k in 0..4 {
                    acc += self.data[r][k] * other.data[k][c];
                }
                m.data[r][c] = acc;
            }
        }
        m
    }

    pub fn adjoint(&self) -> Mat4 {
        let mut m = Self::zero();
        for r in 0..4 {
            for c in 0..4 {
                m.data[r][c] = self.data[c][r].conj();
            }
        }
        m
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conj(&self) -> Mat4 {
        let mut m = self.clone();
        for row in m.data.iter_mut() {
            for e in row.iter_mut() {
                *e = e.conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..4).map(|i| self.data[i][i]).sum()
    }

    pub fn trace_mul(&self, other: &Mat4) -> C64 {
        let mut acc = ZERO;
        for r in 0..4 {
            for k in 0..4 {
                acc += self.data[r][k] * other.data[k][r];
            }
        }
        acc
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        let mut worst = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                worst = worst.max((self.data[r][c] - adj.data[r][c]).norm());
            }
        }
        worst
    }

    pub fn hermitian_part(&self) -> Mat4 {
        self.add(&self.adjoint()).scale(0.5)
    }

    /// Partial trace over the first (more significant) qubit.
    pub fn partial_trace_first(&self) -> Mat2 {
        let mut m = Mat2::zero();
        for b in 0..2 {
            for bp in 0..2 {
                let mut acc = ZERO;
                for a in 0..2 {
                    acc += self.data[2 * a + b][2 * a + bp];
                }
                m.data[b][bp] = acc;
            }
        }
        m
    }
}

/// Eigenvalues (descending) and orthonormal eigenvector columns of a 2×2
/// Hermitian matrix. Only the Hermitian part of the input is consulted.
pub(crate) fn hermitian_eigen2(m: &Mat2) -> ([f64; 2], [[C64; 2]; 2]) {
    let h = m.hermitian_part();
    let a = h.get(0, 0).re;
    let d = h.get(1, 1).re;
    let b = h.get(0, 1);
    let mid = 0.5 * (a + d);
    let half_gap = 0.5 * (a - d);
    let disc = (half_gap * half_gap + b.norm_sqr()).sqrt();
    let hi = mid + disc;
    let lo = mid - disc;

    // Two algebraically equivalent forms of the top eigenvector; pick the
    // better conditioned one and take the orthogonal complement for the other.
    let cand1 = [b, C64::new(hi - a, 0.0)];
    let cand2 = [C64::new(hi - d, 0.0), b.conj()];
    let n1 = cand1[0].norm_sqr() + cand1[1].norm_sqr();
    let n2 = cand2[0].norm_sqr() + cand2[1].norm_sqr();
    let (raw, n) = if n1 >= n2 { (cand1, n1) } else { (cand2, n2) };
    let v_top = if n.sqrt() < 1e-300 {
        [ONE, ZERO]
    } else {
        let inv = 1.0 / n.sqrt();
        [raw[0] * inv, raw[1] * inv]
    };
    let v_low = [-v_top[1].conj(), v_top[0].conj()];
    ([hi, lo], [v_top, v_low])
}

/// Eigenvalues (descending) and orthonormal eigenvector columns of a 4×4
/// Hermitian matrix, by cyclic Jacobi with exact 2×2 subproblems.
pub(crate) fn hermitian_eigen4(m: &Mat4) -> ([f64; 4], [[C64; 4]; 4]) {
    let mut a = m.hermitian_part();
    // vecs[k] is the k-th eigenvector; accumulated as rows for cache ease,
    // transposed into columns at the end.
    let mut v = [[ZERO; 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = ONE;
    }

    let scale: f64 = (0..4)
        .flat_map(|r| (0..4).map(move |c| (r, c)))
        .map(|(r, c)| a.get(r, c).norm())
        .fold(0.0, f64::max)
        .max(1e-300);

    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..4 {
            for q in (p + 1)..4 {
                off += a.get(p, q).norm_sqr();
            }
        }
        if off.sqrt() < 1e-15 * scale {
            break;
        }
        for p in 0..4 {
            for q in (p + 1)..4 {
                if a.get(p, q).norm() < 1e-18 * scale {
                    continue;
                }
                let block = Mat2::new([
                    [a.get(p, p), a.get(p, q)],
                    [a.get(q, p), a.get(q, q)],
                ]);
                let (_evals, cols) = hermitian_eigen2(&block);
                // Unitary G acts on the (p, q) plane; columns are the block
                // eigenvectors, so G† (block) G is diagonal.
                let gpp = cols[0][0];
                let gqp = cols[0][1];
                let gpq = cols[1][0];
                let gqq = cols[1][1];
                // A <- A G
                for i in 0..4 {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, aip * gpp + aiq * gqp);
                    a.set(i, q, aip * gpq + aiq * gqq);
                }
                // A <- G† A
                for j in 0..4 {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, gpp.conj() * apj + gqp.conj() * aqj);
                    a.set(q, j, gpq.conj() * apj + gqq.conj() * aqj);
                }
                // V <- V G (rows store eigenvector candidates component-wise)
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = vp * gpp + vq * gqp;
                    row[q] = vp * gpq + vq * gqq;
                }
            }
        }
    }

    let mut evals = [0.0f64; 4];
    for (i, e) in evals.iter_mut().enumerate() {
        *e = a.get(i, i).re;
    }
    // Sort descending, carrying eigenvector columns along.
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| evals[j].partial_cmp(&evals[i]).unwrap());
    let mut sorted_vals = [0.0f64; 4];
    let mut cols = [[ZERO; 4]; 4];
    for (k, &src) in order.iter().enumerate() {
        sorted_vals[k] = evals[src];
        for r in 0..4 {
            cols[k][r] = v[r][src];
        }
    }
    (sorted_vals, cols)
}

/// Principal square root of a positive semidefinite 2×2 matrix.
/// Small negative eigenvalues from roundoff are clipped to zero.
pub(crate) fn sqrt_psd2(m: &Mat2) -> Mat2 {
    let (evals, cols) = hermitian_eigen2(m);
    let mut out = Mat2::zero();
    for (k, col) in cols.iter().enumerate() {
        let root = evals[k].max(0.0).sqrt();
        if root == 0.0 {
            continue;
        }
        out = out.add(&Mat2::outer(*col).scale(root));
    }
    out
}

/// Principal square root of a positive semidefinite 4×4 matrix.
pub(crate) fn sqrt_psd4(m: &Mat4) -> Mat4 {
    let (evals, cols) = hermitian_eigen4(m);
    let mut out = Mat4::zero();
    for (k, col) in cols.iter().enumerate() {
        let root = evals[k].max(0.0).sqrt();
        if root == 0.0 {
            continue;
        }
        out = out.add(&Mat4::outer(*col).scale(root));
    }
    out
}
