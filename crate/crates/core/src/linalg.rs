//! Minimal fixed-size symmetric-matrix helpers for the 4-variable Gaussian
//! covariance algebra.

use crate::real::Real;

pub type Mat4<R> = [[R; 4]; 4];

/// B = M · A · Mᵀ.
pub fn congruence<R: Real>(m: &Mat4<R>, a: &Mat4<R>) -> Mat4<R> {
    let mut ma = [[R::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = R::zero();
            for k in 0..4 {
                acc += m[i][k] * a[k][j];
            }
            ma[i][j] = acc;
        }
    }
    let mut out = [[R::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = R::zero();
            for k in 0..4 {
                acc += ma[i][k] * m[j][k];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn mat_vec<R: Real>(m: &Mat4<R>, v: &[R; 4]) -> [R; 4] {
    let mut out = [R::zero(); 4];
    for i in 0..4 {
        for k in 0..4 {
            out[i] += m[i][k] * v[k];
        }
    }
    out
}

/// Largest absolute asymmetry |a_ij − a_ji|.
pub fn asymmetry<R: Real>(a: &Mat4<R>) -> R {
    let mut worst = R::zero();
    for i in 0..4 {
        for j in (i + 1)..4 {
            worst = worst.max((a[i][j] - a[j][i]).abs());
        }
    }
    worst
}

/// Eigenvalues of a symmetric 4×4 matrix by cyclic Jacobi rotations,
/// ascending order.
pub fn sym_eigenvalues<R: Real>(a: &Mat4<R>) -> [R; 4] {
    let mut m = *a;
    // Symmetrize first; callers tolerate roundoff-level asymmetry.
    for i in 0..4 {
        for j in (i + 1)..4 {
            let avg = (m[i][j] + m[j][i]) / R::val(2.0);
            m[i][j] = avg;
            m[j][i] = avg;
        }
    }
    for _ in 0..64 {
        // Locate the largest off-diagonal element.
        let (mut p, mut q, mut big) = (0, 1, R::zero());
        for i in 0..4 {
            for j in (i + 1)..4 {
                if m[i][j].abs() > big {
                    big = m[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        let scale = (0..4).map(|i| m[i][i].abs()).fold(R::zero(), R::max);
        if big <= scale * R::val(1e-30) + R::min_positive_value() {
            break;
        }
        // Classic Jacobi rotation annihilating m[p][q].
        let theta = (m[q][q] - m[p][p]) / (R::val(2.0) * m[p][q]);
        let t = {
            let sign = if theta >= R::zero() { R::one() } else { -R::one() };
            sign / (theta.abs() + (theta * theta + R::one()).sqrt())
        };
        let c = (t * t + R::one()).sqrt().recip();
        let s = t * c;
        for k in 0..4 {
            let mpk = m[p][k];
            let mqk = m[q][k];
            m[p][k] = c * mpk - s * mqk;
            m[q][k] = s * mpk + c * mqk;
        }
        for k in 0..4 {
            let mkp = m[k][p];
            let mkq = m[k][q];
            m[k][p] = c * mkp - s * mkq;
            m[k][q] = s * mkp + c * mkq;
        }
    }
    let mut eig = [m[0][0], m[1][1], m[2][2], m[3][3]];
    eig.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    eig
}

/// Positive semidefiniteness up to a roundoff tolerance relative to the
/// matrix scale.
pub fn is_psd<R: Real>(a: &Mat4<R>) -> bool {
    let scale = (0..4)
        .map(|i| a[i][i].abs())
        .fold(R::zero(), R::max)
        .max(R::one());
    if asymmetry(a) > scale * R::val(1e-9) {
        return false;
    }
    let eig = sym_eigenvalues(a);
    eig[0] >= -scale * R::val(1e-12)
}
