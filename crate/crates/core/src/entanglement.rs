//! Entanglement measures for pure bipartite states and density operators.

use std::fmt::Write as _;

use crate::numkernel::{hermitian_eigenvalues, singular_values, ComplexMatrix};
use crate::qdynamics::{BipartiteState, CoupledFloquet, CoupledTopParams, DensityOperator};
use crate::{Error, Result, C64};

/// Eigenvalues in `[−1e-12, 0)` are roundoff and are set to zero.
pub const CLAMP_TOL: f64 = 1e-12;

/// Schmidt coefficients squared, descending.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtSpectrum {
    lambdas: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Sorts, clamps roundoff negatives and checks `Σλ = 1` to 1e-10.
    pub fn new(mut lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(i) = lambdas.iter().position(|l| !l.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        for l in lambdas.iter_mut() {
            if *l < -CLAMP_TOL {
                return Err(Error::InvalidParameter { name: "lambdas", reason: format!("negative eigenvalue {l}") });
            }
            if *l < 0.0 {
                *l = 0.0;
            }
        }
        let sum: f64 = lambdas.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter { name: "lambdas", reason: format!("sum {sum} is not 1") });
        }
        lambdas.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { lambdas })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

/// Eigenvalues of the smaller reduced density matrix `A A†` (or `A†A`), from the
/// tridiagonal eigenvalue path.
pub fn schmidt_spectrum(s: &BipartiteState) -> Result<SchmidtSpectrum> {
    let rho = if s.n1() <= s.n2() { s.reduced_density_first() } else { s.reduced_density_second() };
    SchmidtSpectrum::new(hermitian_eigenvalues(&rho)?)
}

/// Squared singular values of the amplitude grid.
pub fn schmidt_spectrum_svd(s: &BipartiteState) -> Result<SchmidtSpectrum> {
    let sv = singular_values(s.grid())?;
    SchmidtSpectrum::new(sv.into_iter().map(|x| x * x).collect())
}

/// `−Σ λ ln λ` in nats.
pub fn von_neumann(sp: &SchmidtSpectrum) -> f64 {
    let s: f64 = sp.lambdas.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.ln()).sum();
    s.max(0.0)
}

/// `1 − Σ λ²`.
pub fn linear_entropy(sp: &SchmidtSpectrum) -> f64 {
    (1.0 - sp.lambdas.iter().map(|l| l * l).sum::<f64>()).max(0.0)
}

/// `1 − Tr ρ₁²` straight from the grid, without an eigen-decomposition.
pub fn linear_entropy_of_state(s: &BipartiteState) -> f64 {
    let rho = if s.n1() <= s.n2() { s.reduced_density_first() } else { s.reduced_density_second() };
    (1.0 - rho.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>()).max(0.0)
}

/// `Tr₂ ρ` for a density matrix on an `n × m` split.
pub fn partial_trace_second(rho: &ComplexMatrix, dims: (usize, usize)) -> Result<ComplexMatrix> {
    let (n, m) = dims;
    check_dims(rho, dims)?;
    let d = n * m;
    let data = rho.as_slice();
    ComplexMatrix::from_fn(n, n, |a, c| (0..m).map(|b| data[(a * m + b) * d + c * m + b]).sum())
}

/// `Tr₁ ρ` for a density matrix on an `n × m` split.
pub fn partial_trace_first(rho: &ComplexMatrix, dims: (usize, usize)) -> Result<ComplexMatrix> {
    let (n, m) = dims;
    check_dims(rho, dims)?;
    let d = n * m;
    let data = rho.as_slice();
    ComplexMatrix::from_fn(m, m, |b, e| (0..n).map(|a| data[(a * m + b) * d + a * m + e]).sum())
}

fn check_dims(rho: &ComplexMatrix, (n, m): (usize, usize)) -> Result<()> {
    if !rho.is_square() || rho.rows() != n * m {
        return Err(Error::DimensionMismatch { expected: n * m, found: rho.rows() });
    }
    Ok(())
}

/// `ρ^{T₂}`: entry `((a,b),(c,d))` moves to `((a,d),(c,b))`.
pub fn partial_transpose(rho: &ComplexMatrix, dims: (usize, usize)) -> Result<ComplexMatrix> {
    check_dims(rho, dims)?;
    let (n, m) = dims;
    let d = n * m;
    let src = rho.as_slice();
    let mut out = ComplexMatrix::zeros(d, d);
    let dst = out.as_mut_slice();
    for a in 0..n {
        for b in 0..m {
            let row = a * m + b;
            for c in 0..n {
                for e in 0..m {
                    dst[(a * m + e) * d + c * m + b] = src[row * d + c * m + e];
                }
            }
        }
    }
    Ok(out)
}

/// `ρ^{T₁}`: entry `((a,b),(c,d))` moves to `((c,b),(a,d))`.
pub fn partial_transpose_first(rho: &ComplexMatrix, dims: (usize, usize)) -> Result<ComplexMatrix> {
    check_dims(rho, dims)?;
    let (n, m) = dims;
    let d = n * m;
    let src = rho.as_slice();
    let mut out = ComplexMatrix::zeros(d, d);
    let dst = out.as_mut_slice();
    for a in 0..n {
        for b in 0..m {
            for c in 0..n {
                for e in 0..m {
                    dst[(c * m + b) * d + a * m + e] = src[(a * m + b) * d + c * m + e];
                }
            }
        }
    }
    Ok(out)
}

/// `ln ‖ρ^{T₂}‖₁`.
pub fn log_negativity(rho: &DensityOperator, dims: (usize, usize)) -> Result<f64> {
    log_negativity_of_matrix(rho.matrix(), dims)
}

pub fn log_negativity_of_matrix(rho: &ComplexMatrix, dims: (usize, usize)) -> Result<f64> {
    let pt = partial_transpose(rho, dims)?;
    let eig = hermitian_eigenvalues(&pt)?;
    Ok(eig.iter().map(|l| l.abs()).sum::<f64>().ln())
}

/// Which quantity a series holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureKind {
    VonNeumann,
    Linear,
    LogNegativity,
}

impl MeasureKind {
    pub fn label(&self) -> &'static str {
        match self {
            MeasureKind::VonNeumann => "S_V",
            MeasureKind::Linear => "S_R",
            MeasureKind::LogNegativity => "E_N",
        }
    }
}

/// Values of one measure at increasing kick indices.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureSeries {
    kind: MeasureKind,
    points: Vec<(u64, f64)>,
}

impl MeasureSeries {
    pub fn new(kind: MeasureKind) -> Self {
        Self { kind, points: Vec::new() }
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn points(&self) -> &[(u64, f64)] {
        &self.points
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    /// Requires a strictly larger kick index than the last point and a finite value.
    pub fn push(&mut self, n: u64, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite(self.points.len()));
        }
        if let Some(&(last, _)) = self.points.last() {
            if n <= last {
                return Err(Error::InvalidParameter { name: "n", reason: format!("{n} does not follow {last}") });
            }
        }
        self.points.push((n, value));
        Ok(())
    }

    pub fn value_at(&self, n: u64) -> Option<f64> {
        self.points.binary_search_by_key(&n, |p| p.0).ok().map(|i| self.points[i].1)
    }

    /// Mean over points with `lo ≤ n ≤ hi`.
    pub fn mean_over(&self, lo: u64, hi: u64) -> Option<f64> {
        let v: Vec<f64> = self.points.iter().filter(|p| p.0 >= lo && p.0 <= hi).map(|p| p.1).collect();
        if v.is_empty() {
            None
        } else {
            Some(v.iter().sum::<f64>() / v.len() as f64)
        }
    }

    /// `#`-prefixed comment lines, then `n,<label>` and one row per point.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "n,{}", self.kind.label());
        for (n, v) in &self.points {
            let _ = writeln!(out, "{n},{v:.12e}");
        }
        out
    }
}

/// Evaluation schedule: kicks `start, start + stride, …`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cadence {
    pub start: u64,
    pub stride: u64,
}

impl Default for Cadence {
    fn default() -> Self {
        Self { start: 0, stride: 1 }
    }
}

impl Cadence {
    pub fn every(stride: u64) -> Self {
        Self { start: 0, stride }
    }

    pub fn includes(&self, n: u64) -> bool {
        n >= self.start && (n - self.start).is_multiple_of(self.stride.max(1))
    }
}

/// Von Neumann and linear entropy after each scheduled kick, starting from `initial`.
pub fn measure_series_pure(
    params: &CoupledTopParams,
    initial: &BipartiteState,
    n_max: u64,
    cadence: Cadence,
) -> Result<(MeasureSeries, MeasureSeries)> {
    let floquet = CoupledFloquet::new(*params);
    let mut sv = MeasureSeries::new(MeasureKind::VonNeumann);
    let mut sr = MeasureSeries::new(MeasureKind::Linear);
    let mut state = initial.clone();
    let n0 = state.kick_count();
    for step in 0..=n_max {
        if step > 0 {
            floquet.step_pure(&mut state)?;
        }
        let n = n0 + step;
        if cadence.includes(n) {
            let sp = schmidt_spectrum(&state)?;
            sv.push(n, von_neumann(&sp))?;
            sr.push(n, linear_entropy(&sp))?;
        }
    }
    Ok((sv, sr))
}

/// Linear entropy only, from `Tr ρ₁²`; much cheaper than [`measure_series_pure`].
pub fn linear_entropy_series(
    params: &CoupledTopParams,
    initial: &BipartiteState,
    n_max: u64,
    cadence: Cadence,
) -> Result<MeasureSeries> {
    let floquet = CoupledFloquet::new(*params);
    let mut sr = MeasureSeries::new(MeasureKind::Linear);
    let mut state = initial.clone();
    let n0 = state.kick_count();
    for step in 0..=n_max {
        if step > 0 {
            floquet.step_pure(&mut state)?;
        }
        let n = n0 + step;
        if cadence.includes(n) {
            sr.push(n, linear_entropy_of_state(&state))?;
        }
    }
    Ok(sr)
}

/// Log-negativity after each scheduled kick.
pub fn measure_series_mixed(
    params: &CoupledTopParams,
    initial: &DensityOperator,
    n_max: u64,
    cadence: Cadence,
) -> Result<MeasureSeries> {
    let floquet = CoupledFloquet::new(*params);
    let n = params.dim();
    let mut en = MeasureSeries::new(MeasureKind::LogNegativity);
    let mut rho = initial.clone();
    let n0 = rho.kick_count();
    for step in 0..=n_max {
        if step > 0 {
            floquet.step_density(&mut rho)?;
        }
        let k = n0 + step;
        if cadence.includes(k) {
            en.push(k, log_negativity(&rho, (n, n))?)?;
        }
    }
    Ok(en)
}

/// Pure-state density `|ψ⟩⟨ψ|` in composite order; convenience for tests and tools.
pub fn pure_density(s: &BipartiteState) -> ComplexMatrix {
    let v: Vec<C64> = s.flatten();
    ComplexMatrix::outer(&v, &v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{hermitian_eig, JACOBI_TOL};
    use crate::spin::{mixed_initial_state, product_initial_state, CoherentParams, SpinBasis};
    use std::f64::consts::LN_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell() -> BipartiteState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        BipartiteState::new(ComplexMatrix::from_vec(2, 2, vec![c(h), c(0.0), c(0.0), c(h)]).unwrap()).unwrap()
    }

    fn packet_product(j: f64) -> BipartiteState {
        let p = CoherentParams::new(0.89, 0.63).unwrap();
        product_initial_state(SpinBasis::new(j).unwrap(), p, p)
    }

    #[test]
    fn spectrum_examples() {
        let sp = schmidt_spectrum(&packet_product(3.0)).unwrap();
        assert!((sp.lambdas()[0] - 1.0).abs() < 1e-12);
        assert!(sp.lambdas()[1..].iter().all(|&l| l.abs() < 1e-12));
        assert_eq!(sp.len(), 7);

        let b = schmidt_spectrum(&bell()).unwrap();
        assert!((b.lambdas()[0] - 0.5).abs() < 1e-15 && (b.lambdas()[1] - 0.5).abs() < 1e-15);
        let b = schmidt_spectrum_svd(&bell()).unwrap();
        assert!((b.lambdas()[0] - 0.5).abs() < 1e-15 && (b.lambdas()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn spectrum_validation() {
        assert!(SchmidtSpectrum::new(vec![]).is_err());
        assert!(SchmidtSpectrum::new(vec![0.5, 0.4]).is_err());
        assert!(SchmidtSpectrum::new(vec![1.0 + 1e-3, -1e-3]).is_err());
        let sp = SchmidtSpectrum::new(vec![-5e-13, 1.0]).unwrap();
        assert_eq!(sp.lambdas(), &[1.0, 0.0]);
    }

    #[test]
    fn entropy_examples() {
        let pure = SchmidtSpectrum::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(von_neumann(&pure), 0.0);
        assert_eq!(linear_entropy(&pure), 0.0);
        let n = 7;
        let uni = SchmidtSpectrum::new(vec![1.0 / n as f64; n]).unwrap();
        assert!((von_neumann(&uni) - (n as f64).ln()).abs() < 1e-14);
        assert!((linear_entropy(&uni) - (1.0 - 1.0 / n as f64)).abs() < 1e-14);
        let half = SchmidtSpectrum::new(vec![0.5, 0.5]).unwrap();
        assert!((von_neumann(&half) - LN_2).abs() < 1e-15);
    }

    #[test]
    fn linear_entropy_shortcut_matches_spectrum() {
        let p = CoupledTopParams::symmetric(4.0, 6.0, 0.3).unwrap();
        let f = CoupledFloquet::new(p);
        let mut s = packet_product(4.0);
        f.evolve_pure(&mut s, 15).unwrap();
        let a = linear_entropy(&schmidt_spectrum(&s).unwrap());
        assert!((a - linear_entropy_of_state(&s)).abs() < 1e-13);
    }

    fn bell_density() -> ComplexMatrix {
        pure_density(&bell())
    }

    #[test]
    fn partial_transpose_examples() {
        let r1 = ComplexMatrix::from_vec(2, 2, vec![c(0.7), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.3)]).unwrap();
        let r2 = ComplexMatrix::from_vec(3, 3, (0..9).map(|i| C64::new(i as f64, (i * i) as f64)).collect()).unwrap();
        let pt = partial_transpose(&r1.kron(&r2), (2, 3)).unwrap();
        assert_eq!(pt, r1.kron(&r2.transpose()));
        let pt1 = partial_transpose_first(&r1.kron(&r2), (2, 3)).unwrap();
        assert_eq!(pt1, r1.transpose().kron(&r2));

        let m = r1.kron(&r2);
        assert_eq!(partial_transpose(&partial_transpose(&m, (2, 3)).unwrap(), (2, 3)).unwrap(), m);

        // brute-force 4×4: the Bell projector partially transposed is half the swap operator
        let pt = partial_transpose(&bell_density(), (2, 2)).unwrap();
        let mut swap = ComplexMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(i, j)] = c(0.5);
        }
        assert!(pt.max_abs_diff(&swap) < 1e-15);
        let eig = hermitian_eig(&pt, JACOBI_TOL).unwrap().eigenvalues;
        for (x, y) in eig.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!(matches!(partial_transpose(&pt, (3, 2)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn partial_traces() {
        let r1 = ComplexMatrix::from_vec(2, 2, vec![c(0.7), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.3)]).unwrap();
        let r2 = ComplexMatrix::from_diagonal(&[c(0.2), c(0.5), c(0.3)]);
        let rho = r1.kron(&r2);
        assert!(partial_trace_second(&rho, (2, 3)).unwrap().max_abs_diff(&r1) < 1e-15);
        assert!(partial_trace_first(&rho, (2, 3)).unwrap().max_abs_diff(&r2) < 1e-15);
    }

    #[test]
    fn log_negativity_examples() {
        let rho = DensityOperator::with_subsystems(bell_density(), (2, 2)).unwrap();
        assert!((log_negativity(&rho, (2, 2)).unwrap() - LN_2).abs() < 1e-10);

        let prod = packet_product(2.0).to_density();
        assert!(log_negativity(&prod, (5, 5)).unwrap().abs() < 1e-10);

        let basis = SpinBasis::new(3.0).unwrap();
        let pa = CoherentParams::new(0.89, 0.63).unwrap();
        let pb = CoherentParams::new(2.25, -0.63).unwrap();
        let mixed = mixed_initial_state(basis, pa, pb, 0.5, pa).unwrap();
        assert!(log_negativity(&mixed, (7, 7)).unwrap().abs() < 1e-10);
    }

    #[test]
    fn series_bookkeeping() {
        let mut s = MeasureSeries::new(MeasureKind::Linear);
        s.push(0, 0.0).unwrap();
        s.push(3, 0.5).unwrap();
        assert!(s.push(3, 0.1).is_err());
        assert!(s.push(4, f64::NAN).is_err());
        assert_eq!(s.value_at(3), Some(0.5));
        assert_eq!(s.mean_over(0, 10), Some(0.25));
        let csv = s.to_csv(&["j = 1".to_string()]);
        assert_eq!(csv.lines().collect::<Vec<_>>(), vec!["# j = 1", "n,S_R", "0,0.000000000000e0", "3,5.000000000000e-1"]);
        let cad = Cadence { start: 2, stride: 3 };
        assert!(!cad.includes(1) && cad.includes(2) && !cad.includes(4) && cad.includes(5));
    }

    #[test]
    fn uncoupled_series_vanish() {
        let p = CoupledTopParams::symmetric(5.0, 6.0, 0.0).unwrap();
        let (sv, sr) = measure_series_pure(&p, &packet_product(5.0), 40, Cadence::default()).unwrap();
        assert_eq!(sv.points().len(), 41);
        assert!(sv.values().chain(sr.values()).all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn series_respect_entropy_caps() {
        let p = CoupledTopParams::symmetric(4.0, 6.0, 1.0).unwrap();
        let (sv, sr) = measure_series_pure(&p, &packet_product(4.0), 60, Cadence::every(2)).unwrap();
        let n = 9.0f64;
        assert!(sv.values().all(|v| v <= n.ln() + 1e-9));
        assert!(sr.values().all(|v| v <= 1.0 - 1.0 / n + 1e-9));
        assert!(sv.value_at(60).unwrap() > 1.0);
        let cheap = linear_entropy_series(&p, &packet_product(4.0), 60, Cadence::every(2)).unwrap();
        for (a, b) in cheap.values().zip(sr.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_series_starts_at_zero() {
        let basis = SpinBasis::new(2.0).unwrap();
        let pa = CoherentParams::new(0.89, 0.63).unwrap();
        let pb = CoherentParams::new(2.25, -0.63).unwrap();
        let rho = mixed_initial_state(basis, pa, pb, 0.5, pa).unwrap();
        let p = CoupledTopParams::symmetric(2.0, 3.0, 0.5).unwrap();
        let en = measure_series_mixed(&p, &rho, 30, Cadence::default()).unwrap();
        assert!(en.value_at(0).unwrap().abs() < 1e-10);
        assert!(en.values().all(|v| v >= -1e-10));
        assert!(en.value_at(30).unwrap() > 1e-3);
    }
}
