use std::f64::consts::PI;

use super::matrix::ComplexMatrix;
use crate::{Error, Result, C64};

/// Largest admissible `‖m − m†‖_max` for Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Largest admissible `‖u†u − I‖_max` for unitary input.
pub const UNITARY_TOL: f64 = 1e-8;
/// Default relative off-diagonal threshold for the Jacobi sweeps.
pub const JACOBI_TOL: f64 = 1e-13;
/// Eigenvalues of `(u + u†)/2` closer than this are resolved through `(u − u†)/2i`.
pub const COS_DEGENERACY_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 100;
const MAX_QL_ITERATIONS: usize = 60;

/// Ascending eigenvalues with eigenvectors stored as the columns of `eigenvectors`.
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianSpectrum {
    pub fn eigenvector(&self, i: usize) -> Vec<C64> {
        self.eigenvectors.column(i)
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let lambda: Vec<C64> = self.eigenvalues.iter().map(|&x| C64::new(x, 0.0)).collect();
        v.matmul(&ComplexMatrix::from_diagonal(&lambda)).matmul(&v.adjoint())
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.rows(), found: m.cols() });
    }
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL * m.max_abs().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

/// Complex Jacobi rotation that annihilates `a_pq`.
///
/// Acting on columns `(p, q)` the rotation is `[[c, s e^{iφ}], [−s e^{−iφ}, c]]` with
/// `φ = arg a_pq`; the diagonal moves by `∓ t |a_pq|`.
#[derive(Clone, Copy)]
struct Rotation {
    c: f64,
    s: f64,
    phase: C64,
    t: f64,
}

impl Rotation {
    fn annihilating(app: f64, aqq: f64, apq: C64) -> Self {
        let g = apq.norm();
        let theta = (aqq - app) / (2.0 * g);
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let c = 1.0 / (t * t + 1.0).sqrt();
        Rotation { c, s: t * c, phase: apq / g, t }
    }

    /// `(x_p, x_q) ← (c x_p − s e^{−iφ} x_q, s e^{iφ} x_p + c x_q)` elementwise.
    #[inline]
    fn mix(&self, xp: C64, xq: C64) -> (C64, C64) {
        let e = self.phase;
        (xp * self.c - e.conj() * xq * self.s, e * xp * self.s + xq * self.c)
    }
}

/// Cyclic Jacobi diagonalisation of a Hermitian matrix.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops below `tol · ‖m‖_F`;
/// eigenvalues come back ascending.
pub fn hermitian_eig(m: &ComplexMatrix, tol: f64) -> Result<HermitianSpectrum> {
    check_hermitian(m)?;
    let n = m.rows();
    let mut a = m.add(&m.adjoint()).scale(C64::new(0.5, 0.0));
    // rows of `w` are eigenvectors (the transpose of V) so updates stay contiguous
    let mut w = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm();
    let mut converged = n < 2 || scale == 0.0;
    let mut sweep = 0;
    while !converged {
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence { routine: "hermitian_eig", limit: MAX_SWEEPS });
        }
        sweep += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.norm() == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let rot = Rotation::annihilating(app, aqq, apq);
                let data = a.as_mut_slice();
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let (kp, kq) = rot.mix(data[k * n + p], data[k * n + q]);
                    data[k * n + p] = kp;
                    data[k * n + q] = kq;
                    data[p * n + k] = kp.conj();
                    data[q * n + k] = kq.conj();
                }
                let g = apq.norm();
                data[p * n + p] = C64::new(app - rot.t * g, 0.0);
                data[q * n + q] = C64::new(aqq + rot.t * g, 0.0);
                data[p * n + q] = C64::new(0.0, 0.0);
                data[q * n + p] = C64::new(0.0, 0.0);
                let wd = w.as_mut_slice();
                for k in 0..n {
                    let (xp, xq) = rot.mix(wd[p * n + k], wd[q * n + k]);
                    wd[p * n + k] = xp;
                    wd[q * n + k] = xq;
                }
            }
        }
        converged = off_diagonal_norm(&a) < tol * scale;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors[(k, col)] = w[(i, k)];
        }
    }
    Ok(HermitianSpectrum { eigenvalues, eigenvectors })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues only, via Householder reduction to real tridiagonal form and implicit QL.
///
/// Roughly an order of magnitude cheaper than [`hermitian_eig`]; used for the per-kick
/// entropy and negativity evaluations. Ascending order.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let (mut d, mut e) = tridiagonalize(m);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Returns the diagonal and the moduli of the sub-diagonal (`e[i]` couples `i` and `i+1`).
fn tridiagonalize(m: &ComplexMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = m.rows();
    let mut a = m.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut v = vec![C64::new(0.0, 0.0); n];
    let mut p = vec![C64::new(0.0, 0.0); n];
    for k in 0..n.saturating_sub(2) {
        d[k] = a[(k, k)].re;
        let len = n - k - 1;
        let x = &mut v[..len];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = a[(k + 1 + i, k)];
        }
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        e[k] = xnorm;
        if xnorm == 0.0 {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        x[0] += phase * xnorm;
        let vnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for xi in x.iter_mut() {
            *xi /= vnorm;
        }
        // trailing block B ← B − 2 (v w† + w v†), w = Bv − (v†Bv) v
        let off = k + 1;
        let data = a.as_mut_slice();
        for i in 0..len {
            let row = &data[(off + i) * n + off..(off + i) * n + n];
            p[i] = row.iter().zip(x.iter()).map(|(b, vi)| b * vi).sum();
        }
        let kk: C64 = x.iter().zip(&p[..len]).map(|(vi, pi)| vi.conj() * pi).sum();
        for i in 0..len {
            p[i] -= kk.re * x[i];
        }
        for i in 0..len {
            let vi2 = 2.0 * x[i];
            let wi2 = 2.0 * p[i];
            let row = &mut data[(off + i) * n + off..(off + i) * n + n];
            for (j, bij) in row.iter_mut().enumerate() {
                *bij -= vi2 * p[j].conj() + wi2 * x[j].conj();
            }
        }
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2, n - 2)].re;
        e[n - 2] = a[(n - 1, n - 2)].norm();
    }
    if n >= 1 {
        d[n - 1] = a[(n - 1, n - 1)].re;
    }
    (d, e)
}

/// Implicit QL with Wilkinson shifts on a real symmetric tridiagonal matrix; eigenvalues
/// overwrite `d`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n < 2 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let scale = d.iter().zip(e.iter()).map(|(a, b)| a.abs() + b.abs()).fold(0.0, f64::max);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence { routine: "tridiagonal_ql", limit: MAX_QL_ITERATIONS });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigen-decomposition of a unitary matrix: angles in `(−π, π]` and matching eigenvectors.
///
/// The commuting Hermitian pair `(u + u†)/2` and `(u − u†)/2i` is diagonalised jointly:
/// the first fixes `cos θ`, and within every cluster of (nearly) equal cosines the
/// second, projected onto the cluster, splits the `±θ` partners.
pub fn unitary_eig(u: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch { expected: u.rows(), found: u.cols() });
    }
    let defect = u.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary { defect });
    }
    let n = u.rows();
    let ud = u.adjoint();
    let half = C64::new(0.5, 0.0);
    let cos_part = u.add(&ud).scale(half);
    let sin_part = u.sub(&ud).scale(C64::new(0.0, -0.5));
    let spec = hermitian_eig(&cos_part, JACOBI_TOL)?;

    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && spec.eigenvalues[end] - spec.eigenvalues[end - 1] <= COS_DEGENERACY_TOL {
            end += 1;
        }
        let block = ComplexMatrix::from_fn(n, end - start, |i, j| spec.eigenvectors[(i, start + j)])?;
        let resolved = if end - start == 1 {
            block
        } else {
            let projected = block.adjoint().matmul(&sin_part).matmul(&block);
            let inner = hermitian_eig(&projected, JACOBI_TOL)?;
            block.matmul(&inner.eigenvectors)
        };
        for j in 0..end - start {
            vectors.set_column(start + j, &resolved.column(j));
        }
        start = end;
    }

    let angles = (0..n)
        .map(|j| {
            let v = vectors.column(j);
            let c = rayleigh(&cos_part, &v);
            let s = rayleigh(&sin_part, &v);
            let theta = s.atan2(c);
            if theta <= -PI {
                PI
            } else {
                theta
            }
        })
        .collect();
    Ok((angles, vectors))
}

/// Eigenangles of a unitary matrix, in `(−π, π]`, unsorted.
pub fn unitary_eigenangles(u: &ComplexMatrix) -> Result<Vec<f64>> {
    unitary_eig(u).map(|(angles, _)| angles)
}

fn rayleigh(h: &ComplexMatrix, v: &[C64]) -> f64 {
    let hv = h.apply(v);
    v.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum::<C64>().re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::testing::{random_hermitian, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_input_is_returned_sorted() {
        let m = ComplexMatrix::from_diagonal(&[c(3.0, 0.0), c(1.0, 0.0)]);
        let spec = hermitian_eig(&m, JACOBI_TOL).unwrap();
        assert_eq!(spec.eigenvalues, vec![1.0, 3.0]);
        assert_eq!(spec.eigenvectors[(1, 0)].norm(), 1.0);
        assert_eq!(spec.eigenvectors[(0, 1)].norm(), 1.0);

        let m = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(3.0, 0.0)]);
        let spec = hermitian_eig(&m, JACOBI_TOL).unwrap();
        assert_eq!(spec.eigenvectors, ComplexMatrix::identity(2));
    }

    #[test]
    fn pauli_x() {
        let m = ComplexMatrix::from_vec(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap();
        let spec = hermitian_eig(&m, JACOBI_TOL).unwrap();
        assert!((spec.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((spec.eigenvalues[1] - 1.0).abs() < 1e-15);
        let vals = hermitian_eigenvalues(&m).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = ComplexMatrix::from_vec(2, 2, vec![c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        assert!(matches!(hermitian_eig(&m, JACOBI_TOL), Err(Error::NotHermitian { .. })));
        assert!(matches!(hermitian_eigenvalues(&m), Err(Error::NotHermitian { .. })));
        let r = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&r, JACOBI_TOL), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn random_hermitian_trace_and_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 8, 17] {
            let m = random_hermitian(&mut rng, n);
            let spec = hermitian_eig(&m, JACOBI_TOL).unwrap();
            let sum: f64 = spec.eigenvalues.iter().sum();
            assert!((sum - m.trace().re).abs() <= 1e-12 * n as f64, "n={n}");
            assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let err = spec.reconstruct().max_abs_diff(&m);
            assert!(err <= 1e-12 * m.max_abs(), "n={n} err={err}");
            let v = &spec.eigenvectors;
            assert!(v.adjoint().matmul(v).max_abs_diff(&ComplexMatrix::identity(n)) < 1e-10);
        }
    }

    #[test]
    fn tridiagonal_route_matches_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 3, 10, 40] {
            let m = random_hermitian(&mut rng, n);
            let a = hermitian_eig(&m, JACOBI_TOL).unwrap().eigenvalues;
            let b = hermitian_eigenvalues(&m).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12 * m.max_abs().max(1.0), "n={n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn low_rank_input_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let n = 200;
        let a = crate::numkernel::testing::random_matrix(&mut rng, n, 3);
        let m = a.matmul(&a.adjoint());
        let vals = hermitian_eigenvalues(&m).unwrap();
        let gram = a.adjoint().matmul(&a);
        let top = hermitian_eig(&gram, JACOBI_TOL).unwrap().eigenvalues;
        for (x, y) in vals[n - 3..].iter().zip(&top) {
            assert!((x - y).abs() < 1e-11 * m.max_abs());
        }
        assert!(vals[..n - 3].iter().all(|v| v.abs() < 1e-12 * m.max_abs()));
    }

    #[test]
    fn eigenvalues_invariant_under_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_hermitian(&mut rng, 9);
        let u = random_unitary(&mut rng, 9);
        let conj = u.matmul(&m).matmul(&u.adjoint());
        let a = hermitian_eig(&m, JACOBI_TOL).unwrap().eigenvalues;
        let b = hermitian_eig(&conj, JACOBI_TOL).unwrap().eigenvalues;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn unitary_angles_of_simple_cases() {
        let angles = unitary_eigenangles(&ComplexMatrix::identity(4)).unwrap();
        assert!(angles.iter().all(|a| a.abs() < 1e-15));

        let t = PI / 3.0;
        let u = ComplexMatrix::from_diagonal(&[C64::from_polar(1.0, t), C64::from_polar(1.0, -t)]);
        let mut angles = unitary_eigenangles(&u).unwrap();
        angles.sort_by(f64::total_cmp);
        assert!((angles[0] + t).abs() < 1e-14 && (angles[1] - t).abs() < 1e-14);

        let minus = ComplexMatrix::identity(2).scale(c(-1.0, 0.0));
        let angles = unitary_eigenangles(&minus).unwrap();
        assert!(angles.iter().all(|&a| a == PI));
    }

    #[test]
    fn unitary_eigenvectors_satisfy_eigen_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(&mut rng, 12);
        let (angles, vecs) = unitary_eig(&u).unwrap();
        for (j, &theta) in angles.iter().enumerate() {
            let v = vecs.column(j);
            let uv = u.apply(&v);
            let e = C64::from_polar(1.0, theta);
            let resid = uv.iter().zip(&v).map(|(a, b)| (a - e * b).norm()).fold(0.0, f64::max);
            assert!(resid < 1e-10, "resid {resid}");
        }
    }

    #[test]
    fn non_unitary_is_rejected() {
        let m = ComplexMatrix::identity(3).scale(c(1.1, 0.0));
        assert!(matches!(unitary_eigenangles(&m), Err(Error::NotUnitary { .. })));
    }
}
