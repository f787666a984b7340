//! Random-matrix estimates for the coupled tops and the statistics used to test them.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::entanglement::{schmidt_spectrum, MeasureKind, MeasureSeries};
use crate::numkernel::{
    cos_integral, hermitian_eig, hyp3f2, sin_integral, unitary_eig, unitary_eigenangles, ComplexMatrix, EULER_GAMMA,
    JACOBI_TOL,
};
use crate::qdynamics::{BipartiteState, CoupledFloquet, CoupledTopParams, MAX_MATERIALIZED_DIM};
use crate::spin::rotation_y_quarter;
use crate::{Error, Result, C64};

/// Largest dimension accepted by [`sr_exact_sum`].
pub const MAX_EXACT_SUM_DIM: usize = 512;
/// Default bin count of [`rdm_eigenvalue_histogram`].
pub const DEFAULT_RDM_BINS: usize = 24;

const HYP_TOL: f64 = 1e-14;
const BIN_QUADRATURE_INTERVALS: usize = 256;

/// Eigenvalue density of an `N × N` reduced density matrix of a random state on an
/// `N × QN` space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MpDensityParams {
    n: usize,
    q: f64,
    lambda_min: f64,
    lambda_max: f64,
}

impl MpDensityParams {
    /// Support `[(1/N)(1 + 1/Q − 2/√Q), (1/N)(1 + 1/Q + 2/√Q)]`.
    pub fn new(n: usize, q: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter { name: "n", reason: "must be positive".into() });
        }
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::InvalidParameter { name: "q", reason: format!("{q} is not a finite value ≥ 1") });
        }
        let nf = n as f64;
        let lambda_min = ((1.0 + 1.0 / q - 2.0 / q.sqrt()) / nf).max(0.0);
        let lambda_max = (1.0 + 1.0 / q + 2.0 / q.sqrt()) / nf;
        Ok(Self { n, q, lambda_min, lambda_max })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.lambda_min && lambda <= self.lambda_max
    }
}

/// `f(λ) = (NQ/2π) √((λ_max − λ)(λ − λ_min)) / λ`, zero off the support.
pub fn mp_density(p: &MpDensityParams, lambda: f64) -> f64 {
    if !(lambda > p.lambda_min && lambda < p.lambda_max) || lambda <= 0.0 {
        return 0.0;
    }
    let root = ((p.lambda_max - lambda) * (lambda - p.lambda_min)).sqrt();
    p.n as f64 * p.q / (2.0 * PI) * root / lambda
}

/// `∫ f` over `[lo, hi]`.
///
/// With `λ = λ_min + Δ(1 − cos u)/2` the square-root edges become smooth in `u`, and at
/// `Q = 1` the `1/λ` pole cancels, so composite Simpson in `u` converges quickly.
pub fn mp_bin_mass(p: &MpDensityParams, lo: f64, hi: f64) -> f64 {
    let lo = lo.max(p.lambda_min);
    let hi = hi.min(p.lambda_max);
    if hi <= lo {
        return 0.0;
    }
    let width = p.lambda_max - p.lambda_min;
    let to_u = |l: f64| (1.0 - 2.0 * (l - p.lambda_min) / width).clamp(-1.0, 1.0).acos();
    let (u0, u1) = (to_u(lo), to_u(hi));
    let pref = p.n as f64 * p.q / (2.0 * PI) * width / 2.0;
    let integrand = |u: f64| {
        // √(…) = (Δ/2) sin u and dλ = (Δ/2) sin u du; at Q = 1 the ratio sin²u/λ stays finite
        let (s, c) = u.sin_cos();
        if p.lambda_min == 0.0 {
            pref * (1.0 + c)
        } else {
            let lambda = p.lambda_min + width * (1.0 - c) / 2.0;
            pref * (width / 2.0) * s * s / lambda
        }
    };
    simpson(integrand, u0, u1, BIN_QUADRATURE_INTERVALS)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `ln N + ln γ` with `γ = (Q/(Q+1)) exp[(Q/(2(Q+1)²)) ₃F₂(1, 1, 3/2; 2, 3; 4Q/(Q+1)²)]`.
pub fn rmt_entropy_bound(n: usize, q: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter { name: "n", reason: format!("{n} is below 2") });
    }
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::InvalidParameter { name: "q", reason: format!("{q} is not a finite value ≥ 1") });
    }
    Ok((n as f64).ln() + ln_gamma_factor(q)?)
}

/// `ln γ(Q)`.
pub fn ln_gamma_factor(q: f64) -> Result<f64> {
    let z = (4.0 * q / ((q + 1.0) * (q + 1.0))).min(1.0);
    let f = hyp3f2([1.0, 1.0, 1.5], [2.0, 3.0], z, HYP_TOL)?;
    Ok((q / (q + 1.0)).ln() + q / (2.0 * (q + 1.0) * (q + 1.0)) * f.value)
}

/// `(1/N²) Σ_{m₁,m₂} e^{−i ε m₁ m₂ / j}`, real by the `m → −m` symmetry.
pub fn p_epsilon_exact(n: usize, eps: f64) -> Result<f64> {
    check_dim_eps(n, eps)?;
    let j = (n as f64 - 1.0) / 2.0;
    let m: Vec<f64> = (0..n).map(|a| j - a as f64).collect();
    let mut sum = 0.0;
    for &m1 in &m {
        for &m2 in &m {
            sum += (eps * m1 * m2 / j).cos();
        }
    }
    Ok(sum / (n * n) as f64)
}

/// `(2/N)[1 + Si(Nε/2)/ε]`; at `ε = 0` returns its limit `1 + 2/N`, which exceeds one.
pub fn p_epsilon_approx(n: usize, eps: f64) -> Result<f64> {
    check_dim_eps(n, eps)?;
    let nf = n as f64;
    if eps == 0.0 {
        return Ok(1.0 + 2.0 / nf);
    }
    Ok(2.0 / nf * (1.0 + sin_integral(nf * eps / 2.0).value / eps))
}

/// Continuum limit of [`p_epsilon_exact`]: `Si(a)/a` with `a = Nε/2`.
pub fn p_epsilon_large_j(n: usize, eps: f64) -> Result<f64> {
    check_dim_eps(n, eps)?;
    let a = n as f64 * eps / 2.0;
    if a == 0.0 {
        return Ok(1.0);
    }
    Ok(sin_integral(a).value / a)
}

fn check_dim_eps(n: usize, eps: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter { name: "n", reason: format!("{n} is below 2") });
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter { name: "eps", reason: format!("{eps} is not a finite value ≥ 0") });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SrTheoryParams {
    pub n: usize,
    pub eps: f64,
}

impl SrTheoryParams {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        check_dim_eps(n, eps)?;
        Ok(Self { n, eps })
    }
}

/// Large-`N` value of `N⁻⁴ Σ_{αβγδ} e^{−iε(m_α−m_β)(m_γ−m_δ)/j}` with `a = Nε`:
/// `(2/a) Si(2a) − a⁻² [1 − cos 2a + ln 2a + γ − Ci(2a)]`.
pub fn sr_bracket(n: usize, eps: f64) -> Result<f64> {
    let a = n as f64 * eps;
    if !(a > 0.0) {
        return Err(Error::Domain { function: "sr_bracket", value: 2.0 * a });
    }
    let two_a = 2.0 * a;
    let ci = cos_integral(two_a)?.value;
    Ok(2.0 / a * sin_integral(two_a).value - (1.0 - two_a.cos() + two_a.ln() + EULER_GAMMA - ci) / (a * a))
}

/// `S_R(n) ≈ 1 − p^{4(n−1)} I(Nε)` with the large-`j` forms of `p(ε)` and the bracket.
pub fn sr_theory_value(p: &SrTheoryParams, n: u64) -> Result<f64> {
    let bracket = sr_bracket(p.n, p.eps)?;
    let pe = p_epsilon_large_j(p.n, p.eps)?;
    Ok(1.0 - pe.powf(4.0 * (n as f64 - 1.0)) * bracket)
}

/// [`sr_theory_value`] for `n = 1..=n_max`.
pub fn sr_theory_curve(p: &SrTheoryParams, n_max: u64) -> Result<MeasureSeries> {
    if n_max == 0 {
        return Err(Error::InvalidParameter { name: "n_max", reason: "must be at least 1".into() });
    }
    let bracket = sr_bracket(p.n, p.eps)?;
    let pe = p_epsilon_large_j(p.n, p.eps)?;
    let mut out = MeasureSeries::new(MeasureKind::Linear);
    for n in 1..=n_max {
        out.push(n, 1.0 - pe.powf(4.0 * (n as f64 - 1.0)) * bracket)?;
    }
    Ok(out)
}

/// The same closed form with `p(ε)` from [`p_epsilon_approx`] and the bracket
/// `(2/N)[1 + Si(2Nε)/ε] − (Nε)⁻²[1 − cos 2Nε + Ci(2Nε) − ln 2Nε − γ]`, kept for comparison.
pub fn sr_theory_value_uncorrected(p: &SrTheoryParams, n: u64) -> Result<f64> {
    let nf = p.n as f64;
    let a = nf * p.eps;
    if !(a > 0.0) {
        return Err(Error::Domain { function: "sr_theory_value_uncorrected", value: 2.0 * a });
    }
    let two_a = 2.0 * a;
    let bracket = 2.0 / nf * (1.0 + sin_integral(two_a).value / p.eps)
        - (1.0 - two_a.cos() + cos_integral(two_a)?.value - two_a.ln() - EULER_GAMMA) / (a * a);
    let pe = p_epsilon_approx(p.n, p.eps)?;
    Ok(1.0 - pe.powf(4.0 * (n as f64 - 1.0)) * bracket)
}

/// `N⁻⁴ Σ_{αβγδ} e^{−iε(m_α−m_β)(m_γ−m_δ)/j}` reduced to `O(N²)` work: the inner pair
/// gives `|D(t)|²` with `D(t) = Σ_m e^{−itm}`, and the outer pair depends only on `α − β`.
pub fn sr_quadruple_sum(n: usize, eps: f64) -> Result<f64> {
    check_dim_eps(n, eps)?;
    if n > MAX_EXACT_SUM_DIM {
        return Err(Error::DimensionTooLarge { dim: n, limit: MAX_EXACT_SUM_DIM });
    }
    let j = (n as f64 - 1.0) / 2.0;
    let m: Vec<f64> = (0..n).map(|a| j - a as f64).collect();
    let mut total = 0.0;
    for delta in -(n as i64 - 1)..=(n as i64 - 1) {
        let t = eps * delta as f64 / j;
        let d: C64 = m.iter().map(|&mm| C64::from_polar(1.0, -t * mm)).sum();
        total += (n as i64 - delta.abs()) as f64 * d.norm_sqr();
    }
    Ok(total / (n as f64).powi(4))
}

/// Direct `O(N⁴)` evaluation of the quadruple sum, as a complex number.
pub fn sr_quadruple_sum_direct(n: usize, eps: f64) -> Result<C64> {
    check_dim_eps(n, eps)?;
    if n > 64 {
        return Err(Error::DimensionTooLarge { dim: n, limit: 64 });
    }
    let j = (n as f64 - 1.0) / 2.0;
    let m: Vec<f64> = (0..n).map(|a| j - a as f64).collect();
    let mut total = C64::new(0.0, 0.0);
    for &ma in &m {
        for &mb in &m {
            for &mc in &m {
                for &md in &m {
                    total += C64::from_polar(1.0, -eps * (ma - mb) * (mc - md) / j);
                }
            }
        }
    }
    Ok(total / (n as f64).powi(4))
}

/// `S_R(n) ≈ 1 − |p(ε)|^{4(n−1)} N⁻⁴ Σ …` with exact finite-`N` sums.
pub fn sr_exact_sum(n: usize, eps: f64, kick: u64) -> Result<f64> {
    let sum = sr_quadruple_sum(n, eps)?;
    let pe = p_epsilon_exact(n, eps)?.abs();
    Ok(1.0 - pe.powf(4.0 * (kick as f64 - 1.0)) * sum)
}

/// Equal-width histogram with a theoretical expectation per bin.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Expected count per bin.
    pub theory: Vec<f64>,
}

impl Histogram {
    /// Values at or beyond the top edge go to the last bin, values below the first edge
    /// to the first.
    pub fn from_samples(lo: f64, hi: f64, bins: usize, samples: impl IntoIterator<Item = f64>) -> Result<Self> {
        if bins == 0 || !(hi > lo) {
            return Err(Error::InvalidParameter { name: "bins", reason: format!("{bins} bins on [{lo}, {hi}]") });
        }
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + i as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        for s in samples {
            let b = ((s - lo) / width).floor();
            let idx = if b < 0.0 { 0 } else { (b as usize).min(bins - 1) };
            counts[idx] += 1;
        }
        Ok(Self { edges, counts, theory: vec![0.0; bins] })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Σ (obs − exp)²/exp over bins with positive expectation, and the number of such bins.
    pub fn chi_square(&self) -> (f64, usize) {
        chi_square(&self.counts, &self.theory)
    }

    /// `bin_low,bin_high,count,theory_value` after `#` comment lines.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        out.push_str("bin_low,bin_high,count,theory_value\n");
        for i in 0..self.bins() {
            let _ = writeln!(out, "{:.10e},{:.10e},{},{:.10e}", self.edges[i], self.edges[i + 1], self.counts[i], self.theory[i]);
        }
        out
    }
}

/// Pearson statistic over bins whose expectation is positive.
pub fn chi_square(observed: &[u64], expected: &[f64]) -> (f64, usize) {
    let mut total = 0.0;
    let mut used = 0;
    for (&o, &e) in observed.iter().zip(expected) {
        if e > 0.0 {
            total += (o as f64 - e).powi(2) / e;
            used += 1;
        }
    }
    (total, used)
}

/// Pooled Schmidt spectra binned on `[0, 1.2 λ_max]` with expected counts from the
/// density at `Q = n₂/n₁`.
#[derive(Clone, Debug)]
pub struct RdmHistogram {
    pub histogram: Histogram,
    pub density: MpDensityParams,
    pub eigenvalues: usize,
    pub outside_support: usize,
}

impl RdmHistogram {
    pub fn fraction_outside(&self) -> f64 {
        self.outside_support as f64 / self.eigenvalues as f64
    }

    /// χ² divided by the number of bins with positive expectation.
    pub fn chi_square_per_bin(&self) -> (f64, usize) {
        let (chi, used) = self.histogram.chi_square();
        (chi / used.max(1) as f64, used)
    }
}

pub fn rdm_eigenvalue_histogram(states: &[BipartiteState], bins: usize) -> Result<RdmHistogram> {
    let first = states.first().ok_or(Error::EmptyInput)?;
    let (n1, n2) = (first.n1(), first.n2());
    let (small, large) = (n1.min(n2), n1.max(n2));
    let mut lambdas = Vec::with_capacity(states.len() * small);
    for s in states {
        if (s.n1(), s.n2()) != (n1, n2) {
            return Err(Error::DimensionMismatch { expected: n1 * n2, found: s.n1() * s.n2() });
        }
        lambdas.extend_from_slice(schmidt_spectrum(s)?.lambdas());
    }
    rdm_histogram_from_eigenvalues(&lambdas, small, large as f64 / small as f64, bins)
}

/// As [`rdm_eigenvalue_histogram`] for eigenvalues already pooled.
pub fn rdm_histogram_from_eigenvalues(lambdas: &[f64], n: usize, q: f64, bins: usize) -> Result<RdmHistogram> {
    if lambdas.is_empty() {
        return Err(Error::EmptyInput);
    }
    let density = MpDensityParams::new(n, q)?;
    let mut histogram = Histogram::from_samples(0.0, 1.2 * density.lambda_max(), bins, lambdas.iter().copied())?;
    let total = lambdas.len() as f64;
    histogram.theory = histogram.edges.windows(2).map(|w| total * mp_bin_mass(&density, w[0], w[1])).collect();
    let outside_support = lambdas.iter().filter(|&&l| !density.contains(l)).count();
    Ok(RdmHistogram { histogram, density, eigenvalues: lambdas.len(), outside_support })
}

/// Schmidt spectra of every eigenvector of `U_T`, pooled; requires `(2j+1)² ≤ 4096`.
pub fn rdm_eigenstate_eigenvalues(params: &CoupledTopParams) -> Result<Vec<f64>> {
    let u = CoupledFloquet::new(*params).materialize()?;
    let (_, vecs) = unitary_eig(&u)?;
    let n = params.dim();
    let mut out = Vec::with_capacity(n * n * n);
    for c in 0..vecs.cols() {
        let grid = ComplexMatrix::from_vec(n, n, vecs.column(c))?;
        let norm = grid.frobenius_norm();
        let s = BipartiteState::new(grid.scale(C64::new(1.0 / norm, 0.0)))?;
        out.extend_from_slice(schmidt_spectrum(&s)?.lambdas());
    }
    Ok(out)
}

/// Wigner surmise CDF `1 − e^{−πs²/4}`.
pub fn wigner_cdf(s: f64) -> f64 {
    1.0 - (-PI * s * s / 4.0).exp()
}

/// Wigner surmise density `(πs/2) e^{−πs²/4}`.
pub fn wigner_surmise(s: f64) -> f64 {
    PI * s / 2.0 * (-PI * s * s / 4.0).exp()
}

/// Poisson CDF `1 − e^{−s}`.
pub fn poisson_cdf(s: f64) -> f64 {
    1.0 - (-s).exp()
}

/// Binning of spacing histograms: `SPACING_BINS` bins of width `SPACING_MAX / SPACING_BINS`.
pub const SPACING_BINS: usize = 6;
pub const SPACING_MAX: f64 = 3.0;

/// Unfolded nearest-neighbour spacings with their histogram.
#[derive(Clone, Debug)]
pub struct SpacingStats {
    pub spacings: Vec<f64>,
    /// Expected counts under the Wigner surmise.
    pub histogram: Histogram,
    pub chi_square_wigner: f64,
    pub chi_square_poisson: f64,
}

impl SpacingStats {
    pub fn from_spacings(spacings: Vec<f64>) -> Result<Self> {
        if spacings.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut histogram = Histogram::from_samples(0.0, SPACING_MAX, SPACING_BINS, spacings.iter().copied())?;
        let total = spacings.len() as f64;
        let expected = |cdf: fn(f64) -> f64| -> Vec<f64> {
            let e = &histogram.edges;
            (0..SPACING_BINS)
                .map(|i| {
                    // top bin absorbs the tail
                    let hi = if i + 1 == SPACING_BINS { 1.0 } else { cdf(e[i + 1]) };
                    total * (hi - cdf(e[i]))
                })
                .collect()
        };
        let wigner = expected(wigner_cdf);
        let poisson = expected(poisson_cdf);
        let chi_square_wigner = chi_square(&histogram.counts, &wigner).0;
        let chi_square_poisson = chi_square(&histogram.counts, &poisson).0;
        histogram.theory = wigner;
        Ok(Self { spacings, histogram, chi_square_wigner, chi_square_poisson })
    }

    pub fn mean_spacing(&self) -> f64 {
        self.spacings.iter().sum::<f64>() / self.spacings.len() as f64
    }
}

/// Circular spacings of a set of angles, unfolded to unit mean: `s_i = d Δθ_i / 2π`.
pub fn unfolded_spacings(angles: &[f64]) -> Vec<f64> {
    let d = angles.len();
    if d == 0 {
        return Vec::new();
    }
    let mut sorted = angles.to_vec();
    sorted.sort_by(f64::total_cmp);
    let scale = d as f64 / (2.0 * PI);
    (0..d)
        .map(|i| {
            let next = if i + 1 < d { sorted[i + 1] } else { sorted[0] + 2.0 * PI };
            (next - sorted[i]) * scale
        })
        .collect()
}

/// Spacing statistics of the full spectrum of `u`.
pub fn spacing_distribution(u: &ComplexMatrix) -> Result<SpacingStats> {
    if u.rows() > MAX_MATERIALIZED_DIM {
        return Err(Error::DimensionTooLarge { dim: u.rows(), limit: MAX_MATERIALIZED_DIM });
    }
    SpacingStats::from_spacings(unfolded_spacings(&unitary_eigenangles(u)?))
}

/// Spacing statistics with the spectrum split into the joint eigenspaces of commuting
/// involutions; spacings are unfolded within each sector and then pooled.
pub fn spacing_distribution_resolved(u: &ComplexMatrix, symmetries: &[ComplexMatrix]) -> Result<SpacingStats> {
    let d = u.rows();
    if d > MAX_MATERIALIZED_DIM {
        return Err(Error::DimensionTooLarge { dim: d, limit: MAX_MATERIALIZED_DIM });
    }
    let mut pooled = Vec::with_capacity(d);
    for basis in symmetry_sectors(d, symmetries)? {
        if basis.cols() < 2 {
            continue;
        }
        let restricted = basis.adjoint().matmul(u).matmul(&basis);
        pooled.extend(unfolded_spacings(&unitary_eigenangles(&restricted)?));
    }
    SpacingStats::from_spacings(pooled)
}

/// Orthonormal bases (as columns) of every nonempty joint `±1` eigenspace.
pub fn symmetry_sectors(d: usize, symmetries: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
    let mut sectors = Vec::new();
    for signs in 0..(1usize << symmetries.len()) {
        let mut proj = ComplexMatrix::identity(d);
        for (i, s) in symmetries.iter().enumerate() {
            if s.rows() != d {
                return Err(Error::DimensionMismatch { expected: d, found: s.rows() });
            }
            let sign = if signs >> i & 1 == 0 { 1.0 } else { -1.0 };
            let half = ComplexMatrix::identity(d).add(&s.scale(C64::new(sign, 0.0))).scale(C64::new(0.5, 0.0));
            proj = proj.matmul(&half);
        }
        let proj = proj.add(&proj.adjoint()).scale(C64::new(0.5, 0.0));
        let spec = hermitian_eig(&proj, JACOBI_TOL)?;
        let cols: Vec<usize> = (0..d).filter(|&i| spec.eigenvalues[i] > 0.5).collect();
        if cols.is_empty() {
            continue;
        }
        sectors.push(ComplexMatrix::from_fn(d, cols.len(), |r, c| spec.eigenvectors[(r, cols[c])])?);
    }
    Ok(sectors)
}

/// Involutions commuting with `U_T`: the joint π-rotation `R_y(π) ⊗ R_y(π)` and, when
/// `k₁ = k₂`, the exchange of the two tops.
pub fn coupled_top_symmetries(params: &CoupledTopParams) -> Vec<ComplexMatrix> {
    let q = rotation_y_quarter(params.basis);
    let half_turn = q.matmul(&q);
    let mut out = vec![half_turn.kron(&half_turn)];
    if params.k1 == params.k2 {
        let n = params.dim();
        let mut swap = ComplexMatrix::zeros(n * n, n * n);
        for a in 0..n {
            for b in 0..n {
                swap[(a * n + b, b * n + a)] = C64::new(1.0, 0.0);
            }
        }
        out.push(swap);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdynamics::materialize_ut;
    use std::f64::consts::LN_2;

    fn simpson_fine(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        simpson(f, a, b, 200_000)
    }

    #[test]
    fn density_support_and_endpoints() {
        let p = MpDensityParams::new(33, 4.0).unwrap();
        assert!((p.lambda_min() - (1.0 + 0.25 - 1.0) / 33.0).abs() < 1e-14);
        assert!((p.lambda_max() - (1.0 + 0.25 + 1.0) / 33.0).abs() < 1e-14);
        assert_eq!(mp_density(&p, p.lambda_min()), 0.0);
        assert_eq!(mp_density(&p, p.lambda_max()), 0.0);
        assert_eq!(mp_density(&p, 2.0 * p.lambda_max()), 0.0);
        assert!(MpDensityParams::new(10, 0.5).is_err());
        assert!(MpDensityParams::new(0, 1.0).is_err());
    }

    #[test]
    fn density_normalisation_and_trace() {
        for (n, q) in [(33, 1.0), (33, 3.0), (161, 10.0)] {
            let p = MpDensityParams::new(n, q).unwrap();
            let mass = mp_bin_mass(&p, 0.0, 1.0);
            assert!((mass - 1.0).abs() < 1e-8, "n={n} q={q} mass={mass}");
            if q > 1.0 {
                let quad = simpson_fine(|l| mp_density(&p, l), p.lambda_min(), p.lambda_max());
                assert!((quad - 1.0).abs() < 1e-6);
                let mean = simpson_fine(|l| l * mp_density(&p, l), p.lambda_min(), p.lambda_max());
                assert!((mean - 1.0 / n as f64).abs() < 1e-8 / n as f64 * 100.0, "mean={mean}");
            }
        }
    }

    #[test]
    fn unit_ratio_bin_mass_matches_closed_form_cdf() {
        // Q = 1: F(λ) = (2/π)(√(T(1−T)) + arcsin √T), T = λN/4
        let n = 33;
        let p = MpDensityParams::new(n, 1.0).unwrap();
        let cdf = |l: f64| {
            let t = (l * n as f64 / 4.0).clamp(0.0, 1.0);
            2.0 / PI * ((t * (1.0 - t)).sqrt() + t.sqrt().asin())
        };
        let lmax = p.lambda_max();
        for (lo, hi) in [(0.0, 0.05 * lmax), (0.1 * lmax, 0.4 * lmax), (0.9 * lmax, 1.2 * lmax)] {
            assert!((mp_bin_mass(&p, lo, hi) - (cdf(hi) - cdf(lo))).abs() < 1e-10);
        }
    }

    #[test]
    fn bound_endpoints() {
        for n in [10usize, 161, 1000] {
            let b = rmt_entropy_bound(n, 1.0).unwrap();
            assert!((b - ((n as f64).ln() - 0.5)).abs() < 1e-10, "n={n}");
            assert!((rmt_entropy_bound(n, 1e4).unwrap() - (n as f64).ln()).abs() < 1e-3);
        }
        assert!((rmt_entropy_bound(161, 1.0).unwrap() - 4.5814).abs() < 1e-4);
        assert!(rmt_entropy_bound(1, 1.0).is_err());
        assert!(rmt_entropy_bound(10, 0.5).is_err());
    }

    #[test]
    fn bound_matches_entropy_integral() {
        // −N ∫ f λ ln λ dλ = ln N + ln γ, by quadrature in the smooth variable
        for q in [2.0, 5.0, 20.0] {
            let n = 50;
            let p = MpDensityParams::new(n, q).unwrap();
            let w = p.lambda_max() - p.lambda_min();
            let integrand = |u: f64| {
                let (s, c) = u.sin_cos();
                let l = p.lambda_min() + w * (1.0 - c) / 2.0;
                let dens = n as f64 * q / (2.0 * PI) * (w / 2.0) * s / l;
                -(n as f64) * dens * l * l.ln() * (w / 2.0) * s
            };
            let sv = simpson(integrand, 0.0, PI, 20_000);
            assert!((sv - rmt_entropy_bound(n, q).unwrap()).abs() < 1e-9, "q={q}");
        }
    }

    #[test]
    fn bound_is_monotone_in_q() {
        let mut last = f64::NEG_INFINITY;
        for q in 1..=100 {
            let b = rmt_entropy_bound(33, q as f64).unwrap();
            assert!(b >= last);
            last = b;
        }
    }

    #[test]
    fn coupling_factor_examples() {
        assert!((p_epsilon_exact(161, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let small = p_epsilon_approx(161, 1e-9).unwrap();
        assert!((small - (1.0 + 2.0 / 161.0)).abs() < 1e-6);
        assert_eq!(p_epsilon_approx(161, 0.0).unwrap(), 1.0 + 2.0 / 161.0);
        let n = 161;
        for k in 1..=50 {
            let eps = k as f64 / n as f64;
            let d = (p_epsilon_exact(n, eps).unwrap() - p_epsilon_approx(n, eps).unwrap()).abs();
            assert!(d <= 5.0 / n as f64, "Nε={k}: {d}");
            let d = (p_epsilon_exact(n, eps).unwrap() - p_epsilon_large_j(n, eps).unwrap()).abs();
            assert!(d <= 2.0 / n as f64, "Nε={k}: {d}");
        }
        assert!(p_epsilon_exact(161, -1.0).is_err());
    }

    #[test]
    fn quadruple_sum_reduction() {
        for (n, eps) in [(5, 0.3), (12, 0.05), (21, 1.0)] {
            let direct = sr_quadruple_sum_direct(n, eps).unwrap();
            assert!(direct.im.abs() <= 1e-12);
            assert!((sr_quadruple_sum(n, eps).unwrap() - direct.re).abs() < 1e-12);
        }
        assert!(matches!(sr_quadruple_sum(513, 0.1), Err(Error::DimensionTooLarge { .. })));
    }

    #[test]
    fn exact_sum_examples() {
        assert!(sr_exact_sum(161, 0.0, 7).unwrap().abs() < 1e-12);
        let a = sr_exact_sum(161, 1e-3, 1).unwrap();
        assert!((a - (1.0 - sr_quadruple_sum(161, 1e-3).unwrap())).abs() < 1e-15);
    }

    #[test]
    fn bracket_is_large_n_limit_of_quadruple_sum() {
        for a in [1.0, 5.0, 20.0] {
            let n = 401;
            let eps = a / n as f64;
            let exact = sr_quadruple_sum(n, eps).unwrap();
            let closed = sr_bracket(n, eps).unwrap();
            assert!((exact - closed).abs() < 0.02 * (1.0 - closed).max(1e-3) + 5e-3, "a={a}: {exact} vs {closed}");
        }
    }

    #[test]
    fn theory_curve_against_exact_sum() {
        let p = SrTheoryParams::new(161, 1e-3).unwrap();
        let curve = sr_theory_curve(&p, 100).unwrap();
        for &(n, v) in curve.points() {
            let e = sr_exact_sum(161, 1e-3, n).unwrap();
            assert!((v - e).abs() <= 0.02 * e, "n={n}: {v} vs {e}");
        }
    }

    #[test]
    fn theory_curve_is_nondecreasing_and_saturates() {
        let p = SrTheoryParams::new(161, 1e-2).unwrap();
        let curve = sr_theory_curve(&p, 2000).unwrap();
        let v: Vec<f64> = curve.values().collect();
        assert!(v.windows(2).all(|w| w[1] >= w[0]));
        assert!((v[v.len() - 1] - 1.0).abs() < 1e-6);
        assert!(sr_theory_curve(&SrTheoryParams::new(161, 0.0).unwrap(), 10).is_err());
        assert!(sr_theory_curve(&p, 0).is_err());
    }

    #[test]
    fn uncorrected_form_leaves_unit_interval() {
        let p = SrTheoryParams::new(161, 1e-2).unwrap();
        let v = sr_theory_value_uncorrected(&p, 1).unwrap();
        assert!(!(0.0..=1.0).contains(&v));
    }

    #[test]
    fn histogram_binning() {
        let h = Histogram::from_samples(0.0, 1.0, 4, [0.1, 0.3, 0.99, 5.0, -1.0]).unwrap();
        assert_eq!(h.counts, vec![2, 1, 0, 2]);
        assert_eq!(h.total(), 5);
        assert!(Histogram::from_samples(0.0, 1.0, 0, [0.1]).is_err());
        let csv = h.to_csv(&["x".into()]);
        assert!(csv.starts_with("# x\nbin_low,bin_high,count,theory_value\n"));
        assert_eq!(csv.lines().count(), 6);
        assert_eq!(chi_square(&[3, 5], &[4.0, 0.0]), (0.25, 1));
    }

    #[test]
    fn product_state_histogram() {
        use crate::spin::{product_initial_state, CoherentParams, SpinBasis};
        let c = CoherentParams::new(0.89, 0.63).unwrap();
        let s = product_initial_state(SpinBasis::new(4.0).unwrap(), c, c);
        let h = rdm_eigenvalue_histogram(&[s], DEFAULT_RDM_BINS).unwrap();
        assert_eq!(h.histogram.counts[DEFAULT_RDM_BINS - 1], 1);
        assert_eq!(h.histogram.counts[0], 8);
        assert!(matches!(rdm_eigenvalue_histogram(&[], 24), Err(Error::EmptyInput)));
    }

    #[test]
    fn eigenstate_mode_recovers_unit_trace() {
        let p = CoupledTopParams::symmetric(2.0, 6.0, 0.5).unwrap();
        let l = rdm_eigenstate_eigenvalues(&p).unwrap();
        assert_eq!(l.len(), 125);
        assert!((l.iter().sum::<f64>() - 25.0).abs() < 1e-9);
    }

    #[test]
    fn spacing_mean_is_one() {
        let p = CoupledTopParams::symmetric(3.0, 6.0, 0.5).unwrap();
        let u = materialize_ut(&p).unwrap();
        let s = spacing_distribution(&u).unwrap();
        assert!((s.mean_spacing() - 1.0).abs() < 1e-10);
        assert_eq!(s.spacings.len(), 49);
        let r = spacing_distribution_resolved(&u, &coupled_top_symmetries(&p)).unwrap();
        assert!((r.spacings.len() as i64 - 49).abs() <= 4);
    }

    #[test]
    fn symmetries_commute_with_floquet_operator() {
        for p in [CoupledTopParams::symmetric(2.5, 6.0, 0.5).unwrap(), CoupledTopParams::new(3.0, 6.0, 6.1, 0.2).unwrap()] {
            let u = materialize_ut(&p).unwrap();
            let syms = coupled_top_symmetries(&p);
            assert_eq!(syms.len(), if p.k1 == p.k2 { 2 } else { 1 });
            for s in &syms {
                assert!(s.matmul(&u).max_abs_diff(&u.matmul(s)) < 1e-12);
                assert!(s.matmul(s).max_abs_diff(&ComplexMatrix::identity(u.rows())) < 1e-12);
            }
            let dims: usize = symmetry_sectors(u.rows(), &syms).unwrap().iter().map(|b| b.cols()).sum();
            assert_eq!(dims, u.rows());
        }
    }

    #[test]
    fn surmise_forms() {
        assert_eq!(wigner_cdf(0.0), 0.0);
        assert!((wigner_cdf(50.0) - 1.0).abs() < 1e-15);
        let integral = simpson_fine(wigner_surmise, 0.0, 1.3);
        assert!((integral - wigner_cdf(1.3)).abs() < 1e-12);
        assert!((poisson_cdf(LN_2) - 0.5).abs() < 1e-15);
    }
}
