//! The coupled-top Floquet map `U_T = U₁₂ (U₁ ⊗ U₂)` acting on pure states and density
//! operators.
//!
//! Each single-top factor is `U_i = exp(−i (k_i/2j) J_z²) exp(−i (π/2) J_y)` and the
//! coupling is the diagonal phase `exp(−i (ε/j) J_{z₁} J_{z₂})`.

use crate::numkernel::{gemm, gemm_adjoint_rhs, ComplexMatrix, HERMITIAN_TOL};
use crate::spin::{rotation_y_quarter, SpinBasis, StateVector};
use crate::{Error, Result, C64};

/// Largest composite dimension for which `U_T` or a density operator is formed.
pub const MAX_MATERIALIZED_DIM: usize = 4096;

/// Parameters `(j, k₁, k₂, ε)` of the coupled map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoupledTopParams {
    pub basis: SpinBasis,
    pub k1: f64,
    pub k2: f64,
    pub eps: f64,
}

impl CoupledTopParams {
    pub fn new(j: f64, k1: f64, k2: f64, eps: f64) -> Result<Self> {
        let basis = SpinBasis::new(j)?;
        for (name, v) in [("k1", k1), ("k2", k2), ("eps", eps)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: format!("{v} is not finite") });
            }
        }
        if basis.twice_j() == 0 {
            return Err(Error::InvalidSpin(j));
        }
        Ok(Self { basis, k1, k2, eps })
    }

    /// Equal torsion on both tops.
    pub fn symmetric(j: f64, k: f64, eps: f64) -> Result<Self> {
        Self::new(j, k, k, eps)
    }

    pub fn j(&self) -> f64 {
        self.basis.j()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }
}

/// Pure state of the two tops, stored as an `n1 × n2` amplitude grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    grid: ComplexMatrix,
    kick_count: u64,
}

impl BipartiteState {
    /// Requires unit Frobenius norm to 1e-10.
    pub fn new(grid: ComplexMatrix) -> Result<Self> {
        let norm = grid.frobenius_norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter { name: "grid", reason: format!("norm {norm} is not 1") });
        }
        Ok(Self { grid, kick_count: 0 })
    }

    pub fn product(a: &StateVector, b: &StateVector) -> Self {
        Self { grid: ComplexMatrix::outer(a.amplitudes(), &conj(b.amplitudes())), kick_count: 0 }
    }

    pub fn n1(&self) -> usize {
        self.grid.rows()
    }

    pub fn n2(&self) -> usize {
        self.grid.cols()
    }

    pub fn grid(&self) -> &ComplexMatrix {
        &self.grid
    }

    pub fn kick_count(&self) -> u64 {
        self.kick_count
    }

    pub fn norm(&self) -> f64 {
        self.grid.frobenius_norm()
    }

    /// Amplitudes in composite order `(a, b)` with `b` fastest.
    pub fn flatten(&self) -> Vec<C64> {
        self.grid.as_slice().to_vec()
    }

    pub fn to_density(&self) -> DensityOperator {
        let v = self.grid.as_slice();
        DensityOperator { matrix: ComplexMatrix::outer(v, v), subsystems: (self.n1(), self.n2()), kick_count: self.kick_count }
    }

    /// `ρ₁ = A A†`.
    pub fn reduced_density_first(&self) -> ComplexMatrix {
        let (n, m) = (self.n1(), self.n2());
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        gemm_adjoint_rhs(self.grid.as_slice(), n, m, self.grid.as_slice(), n, &mut out);
        ComplexMatrix::from_vec(n, n, out).expect("finite product")
    }

    /// `ρ₂ = Aᵀ A*`.
    pub fn reduced_density_second(&self) -> ComplexMatrix {
        let t = self.grid.transpose();
        let (m, n) = (t.rows(), t.cols());
        let mut out = vec![C64::new(0.0, 0.0); m * m];
        gemm_adjoint_rhs(t.as_slice(), m, n, t.as_slice(), m, &mut out);
        ComplexMatrix::from_vec(m, m, out).expect("finite product")
    }
}

fn conj(v: &[C64]) -> Vec<C64> {
    v.iter().map(|z| z.conj()).collect()
}

/// Density operator on the composite space, with the subsystem split recorded.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    subsystems: (usize, usize),
    kick_count: u64,
}

impl DensityOperator {
    /// A matrix on an unspecified split; the split must be supplied to the
    /// partial-transpose routines.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let d = matrix.rows();
        Self::with_subsystems(matrix, (d, 1))
    }

    /// Requires a Hermitian, unit-trace `n1·n2` square matrix.
    pub fn with_subsystems(matrix: ComplexMatrix, subsystems: (usize, usize)) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.rows(), found: matrix.cols() });
        }
        let d = subsystems.0 * subsystems.1;
        if d != matrix.rows() {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.rows() });
        }
        let defect = matrix.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidParameter { name: "rho", reason: format!("trace {tr} is not 1") });
        }
        Ok(Self { matrix, subsystems, kick_count: 0 })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn subsystems(&self) -> (usize, usize) {
        self.subsystems
    }

    pub fn kick_count(&self) -> u64 {
        self.kick_count
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ_ij |ρ_ij|² for Hermitian ρ
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.matrix.hermitian_defect()
    }
}

/// `diag(e^{−i(k/2j)m²}) · exp(−i(π/2)J_y)`.
pub fn build_single_floquet(basis: SpinBasis, k: f64) -> ComplexMatrix {
    let mut u = rotation_y_quarter(basis);
    let j = basis.j();
    let n = basis.dim();
    for a in 0..n {
        let m = basis.m(a);
        let phase = C64::from_polar(1.0, -k / (2.0 * j) * m * m);
        for x in &mut u.as_mut_slice()[a * n..(a + 1) * n] {
            *x *= phase;
        }
    }
    u
}

/// Precomputed factors of `U_T`, applied without forming the composite matrix.
#[derive(Clone, Debug)]
pub struct CoupledFloquet {
    params: CoupledTopParams,
    u1: ComplexMatrix,
    u2: ComplexMatrix,
    u2_conj: ComplexMatrix,
    /// `e^{−i(ε/j) m₁ m₂}` in composite order.
    coupling: Vec<C64>,
}

impl CoupledFloquet {
    pub fn new(params: CoupledTopParams) -> Self {
        let basis = params.basis;
        let u1 = build_single_floquet(basis, params.k1);
        let u2 = if params.k2 == params.k1 { u1.clone() } else { build_single_floquet(basis, params.k2) };
        let u2_conj = ComplexMatrix::from_vec(u2.rows(), u2.cols(), conj(u2.as_slice())).expect("finite");
        let m = basis.m_values();
        let j = basis.j();
        let mut coupling = Vec::with_capacity(m.len() * m.len());
        for &m1 in &m {
            for &m2 in &m {
                coupling.push(C64::from_polar(1.0, -params.eps / j * m1 * m2));
            }
        }
        Self { params, u1, u2, u2_conj, coupling }
    }

    pub fn params(&self) -> &CoupledTopParams {
        &self.params
    }

    pub fn u1(&self) -> &ComplexMatrix {
        &self.u1
    }

    pub fn u2(&self) -> &ComplexMatrix {
        &self.u2
    }

    /// Coupling phases in composite order.
    pub fn coupling_phases(&self) -> &[C64] {
        &self.coupling
    }

    fn check_pure(&self, s: &BipartiteState) -> Result<()> {
        let n = self.params.dim();
        for found in [s.n1(), s.n2()] {
            if found != n {
                return Err(Error::DimensionMismatch { expected: n, found });
            }
        }
        Ok(())
    }

    /// `A ← P ∘ (U₁ A U₂ᵀ)`.
    pub fn step_pure(&self, s: &mut BipartiteState) -> Result<()> {
        self.check_pure(s)?;
        let n = self.params.dim();
        let mut tmp = vec![C64::new(0.0, 0.0); n * n];
        gemm(self.u1.as_slice(), n, n, s.grid.as_slice(), n, &mut tmp);
        let out = s.grid.as_mut_slice();
        gemm_adjoint_rhs(&tmp, n, n, self.u2_conj.as_slice(), n, out);
        for (x, p) in out.iter_mut().zip(&self.coupling) {
            *x *= p;
        }
        s.kick_count += 1;
        Ok(())
    }

    /// Runs `kicks` steps in place.
    pub fn evolve_pure(&self, s: &mut BipartiteState, kicks: u64) -> Result<()> {
        for _ in 0..kicks {
            self.step_pure(s)?;
        }
        Ok(())
    }

    /// `X ← P (U₁ ⊗ U₂) X` for a `d × cols` row-major block.
    fn apply_left(&self, x: &mut [C64], cols: usize, scratch: &mut [C64]) {
        let n = self.params.dim();
        let stride = n * cols;
        // U₁ on the slow index: X viewed as n × (n·cols)
        gemm(self.u1.as_slice(), n, n, x, stride, scratch);
        // U₂ on the fast index, one block per value of the slow index
        for a in 0..n {
            let block = &scratch[a * stride..(a + 1) * stride];
            gemm(self.u2.as_slice(), n, n, block, cols, &mut x[a * stride..(a + 1) * stride]);
        }
        for (r, p) in self.coupling.iter().enumerate() {
            for z in &mut x[r * cols..(r + 1) * cols] {
                *z *= p;
            }
        }
    }

    /// `ρ ← U_T ρ U_T†`, computed as `L(L(ρ)†)` with `L(X) = U_T X`.
    pub fn step_density(&self, rho: &mut DensityOperator) -> Result<()> {
        let n = self.params.dim();
        let d = n * n;
        if rho.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: rho.dim() });
        }
        let mut scratch = vec![C64::new(0.0, 0.0); d * d];
        let data = rho.matrix.as_mut_slice();
        self.apply_left(data, d, &mut scratch);
        adjoint_in_place(data, d);
        self.apply_left(data, d, &mut scratch);
        rho.kick_count += 1;
        Ok(())
    }

    pub fn evolve_density(&self, rho: &mut DensityOperator, kicks: u64) -> Result<()> {
        for _ in 0..kicks {
            self.step_density(rho)?;
        }
        Ok(())
    }

    /// Explicit `d × d` form of `U_T`, guarded by [`MAX_MATERIALIZED_DIM`].
    pub fn materialize(&self) -> Result<ComplexMatrix> {
        let n = self.params.dim();
        let d = n * n;
        if d > MAX_MATERIALIZED_DIM {
            return Err(Error::DimensionTooLarge { dim: d, limit: MAX_MATERIALIZED_DIM });
        }
        let mut u = self.u1.kron(&self.u2);
        for (r, p) in self.coupling.iter().enumerate() {
            for z in &mut u.as_mut_slice()[r * d..(r + 1) * d] {
                *z *= p;
            }
        }
        Ok(u)
    }
}

fn adjoint_in_place(x: &mut [C64], d: usize) {
    for i in 0..d {
        x[i * d + i] = x[i * d + i].conj();
        for j in i + 1..d {
            let a = x[i * d + j];
            x[i * d + j] = x[j * d + i].conj();
            x[j * d + i] = a.conj();
        }
    }
}

/// One kick on a pure state.
pub fn floquet_step_pure(s: &BipartiteState, p: &CoupledTopParams) -> Result<BipartiteState> {
    let mut out = s.clone();
    CoupledFloquet::new(*p).step_pure(&mut out)?;
    Ok(out)
}

/// One kick on a density operator.
pub fn floquet_step_density(rho: &DensityOperator, p: &CoupledTopParams) -> Result<DensityOperator> {
    let mut out = rho.clone();
    CoupledFloquet::new(*p).step_density(&mut out)?;
    Ok(out)
}

/// Explicit `U_T`.
pub fn materialize_ut(p: &CoupledTopParams) -> Result<ComplexMatrix> {
    let d = p.dim() * p.dim();
    if d > MAX_MATERIALIZED_DIM {
        return Err(Error::DimensionTooLarge { dim: d, limit: MAX_MATERIALIZED_DIM });
    }
    CoupledFloquet::new(*p).materialize()
}
