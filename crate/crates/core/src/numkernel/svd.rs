use super::matrix::ComplexMatrix;
use crate::{Error, Result, C64};

const MAX_SWEEPS: usize = 100;
const ORTHO_TOL: f64 = 1e-15;

/// Thin singular value decomposition `m = U diag(s) V†`.
///
/// For an `N × M` input `U` is `N × r` and `V` is `M × r` with `r = min(N, M)`;
/// `s` is descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let s: Vec<C64> = self.s.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.u.matmul(&ComplexMatrix::from_diagonal(&s)).matmul(&self.v.adjoint())
    }
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    if m.rows() > m.cols() {
        let t = svd(&m.adjoint())?;
        return Ok(Svd { u: t.v, s: t.s, v: t.u });
    }
    let n = m.rows();
    let mut rows = m.clone();
    // rows of `left` are the columns of U
    let mut left = ComplexMatrix::identity(n);
    orthogonalize_rows(&mut rows, Some(&mut left))?;

    let norms: Vec<f64> = (0..n).map(|i| row_norm(rows.row(i))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let mcols = m.cols();
    let mut u = ComplexMatrix::zeros(n, n);
    let mut v = ComplexMatrix::zeros(mcols, n);
    let mut s = Vec::with_capacity(n);
    let floor = norms.iter().cloned().fold(0.0, f64::max) * f64::EPSILON * mcols as f64;
    let mut missing = Vec::new();
    for (col, &i) in order.iter().enumerate() {
        u.set_column(col, left.row(i));
        let sigma = norms[i];
        s.push(sigma);
        if sigma > floor && sigma > 0.0 {
            let vi: Vec<C64> = rows.row(i).iter().map(|z| z.conj() / sigma).collect();
            v.set_column(col, &vi);
        } else {
            missing.push(col);
        }
    }
    complete_orthonormal(&mut v, &missing);
    Ok(Svd { u, s, v })
}

/// Singular values only, descending.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let mut rows = if m.rows() > m.cols() { m.adjoint() } else { m.clone() };
    orthogonalize_rows(&mut rows, None)?;
    let mut s: Vec<f64> = (0..rows.rows()).map(|i| row_norm(rows.row(i))).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

fn row_norm(r: &[C64]) -> f64 {
    r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Rotates pairs of rows until all are mutually orthogonal, applying the same
/// rotations to the columns of `left` (stored as its rows).
fn orthogonalize_rows(y: &mut ComplexMatrix, mut left: Option<&mut ComplexMatrix>) -> Result<()> {
    let n = y.rows();
    let k = y.cols();
    if n < 2 {
        return Ok(());
    }
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let data = y.as_mut_slice();
                let (head, tail) = data.split_at_mut(q * k);
                let yp = &mut head[p * k..(p + 1) * k];
                let yq = &mut tail[..k];
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut g = C64::new(0.0, 0.0);
                for (a, b) in yp.iter().zip(yq.iter()) {
                    alpha += a.norm_sqr();
                    beta += b.norm_sqr();
                    g += a * b.conj();
                }
                let gn = g.norm();
                if gn == 0.0 || gn <= ORTHO_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let theta = (beta - alpha) / (2.0 * gn);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let e = g / gn;
                // rows: y_p ← c y_p − s e y_q, y_q ← s ē y_p + c y_q
                for (a, b) in yp.iter_mut().zip(yq.iter_mut()) {
                    let (x, z) = (*a, *b);
                    *a = x * c - e * z * s;
                    *b = e.conj() * x * s + z * c;
                }
                if let Some(l) = left.as_deref_mut() {
                    // columns of U: u_p ← c u_p − s ē u_q, u_q ← s e u_p + c u_q
                    let ld = l.as_mut_slice();
                    let (head, tail) = ld.split_at_mut(q * n);
                    let up = &mut head[p * n..(p + 1) * n];
                    let uq = &mut tail[..n];
                    for (a, b) in up.iter_mut().zip(uq.iter_mut()) {
                        let (x, z) = (*a, *b);
                        *a = x * c - e.conj() * z * s;
                        *b = e * x * s + z * c;
                    }
                }
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::NoConvergence { routine: "svd", limit: MAX_SWEEPS })
}

/// Fills the listed columns of `v` with unit vectors orthogonal to every other column.
fn complete_orthonormal(v: &mut ComplexMatrix, missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let dim = v.rows();
    let mut filled: Vec<usize> = (0..v.cols()).filter(|c| !missing.contains(c)).collect();
    let mut candidate = 0;
    for &col in missing {
        while candidate < dim {
            let mut w = vec![C64::new(0.0, 0.0); dim];
            w[candidate] = C64::new(1.0, 0.0);
            candidate += 1;
            for _ in 0..2 {
                for &f in &filled {
                    let basis = v.column(f);
                    let proj: C64 = basis.iter().zip(&w).map(|(b, x)| b.conj() * x).sum();
                    for (x, b) in w.iter_mut().zip(&basis) {
                        *x -= proj * b;
                    }
                }
            }
            let norm = row_norm(&w);
            if norm > 1e-8 {
                for x in w.iter_mut() {
                    *x /= norm;
                }
                v.set_column(col, &w);
                filled.push(col);
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::testing::{random_matrix, random_unitary};
    use crate::numkernel::{hermitian_eig, JACOBI_TOL};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn column_orthonormal(m: &ComplexMatrix) -> f64 {
        m.adjoint().matmul(m).max_abs_diff(&ComplexMatrix::identity(m.cols()))
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let r = svd(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(r.s, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn rank_one_outer_product() {
        let a = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let b = [C64::new(0.5, 0.5), C64::new(0.5, -0.5), C64::new(0.0, 0.0)];
        let m = ComplexMatrix::outer(&a, &b);
        let r = svd(&m).unwrap();
        assert!((r.s[0] - 1.0).abs() < 1e-14);
        assert!(r.s[1].abs() < 1e-14);
        assert!(column_orthonormal(&r.u) < 1e-12);
        assert!(column_orthonormal(&r.v) < 1e-12);
        assert!(r.reconstruct().max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn squared_singular_values_match_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let m = random_matrix(&mut rng, 4, 7);
        let r = svd(&m).unwrap();
        let mut eig = hermitian_eig(&m.matmul(&m.adjoint()), JACOBI_TOL).unwrap().eigenvalues;
        eig.reverse();
        for (s, l) in r.s.iter().zip(&eig) {
            assert!((s * s - l).abs() < 1e-10, "{s} {l}");
        }
        assert!(r.reconstruct().max_abs_diff(&m) <= 1e-10 * m.max_abs());
        assert!(column_orthonormal(&r.u) < 1e-10 && column_orthonormal(&r.v) < 1e-10);
    }

    #[test]
    fn tall_input_is_transposed() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_matrix(&mut rng, 6, 3);
        let r = svd(&m).unwrap();
        assert_eq!((r.u.rows(), r.u.cols(), r.v.rows(), r.v.cols()), (6, 3, 3, 3));
        assert!(r.reconstruct().max_abs_diff(&m) <= 1e-12);
        let wide = singular_values(&m.adjoint()).unwrap();
        for (a, b) in r.s.iter().zip(&wide) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn invariant_under_unitary_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_matrix(&mut rng, 5, 5);
        let u = random_unitary(&mut rng, 5);
        let w = random_unitary(&mut rng, 5);
        let a = singular_values(&m).unwrap();
        let b = singular_values(&u.matmul(&m).matmul(&w)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn rank_deficient_square_input_completes_v() {
        let a = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let m = ComplexMatrix::outer(&a, &a);
        let r = svd(&m).unwrap();
        assert!(column_orthonormal(&r.v) < 1e-12);
        assert!(r.reconstruct().max_abs_diff(&m) < 1e-14);
    }
}
