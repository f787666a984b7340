//! Angular momentum of a single top.
//!
//! Basis index `a ∈ [0, 2j]` labels `|j, m⟩` with `m = j − a`, so index 0 is the
//! highest weight state. Composite states put subsystem 1 on the slow index.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};

use crate::numkernel::{ComplexMatrix, LogFactorials};
use crate::qdynamics::{BipartiteState, DensityOperator};
use crate::{Error, Result, C64};

/// Hilbert space of one spin `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpinBasis {
    twice_j: u32,
}

impl SpinBasis {
    /// Fails unless `2j` is a nonnegative integer.
    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !twice.is_finite() || twice < 0.0 || twice.fract() != 0.0 || twice > u32::MAX as f64 {
            return Err(Error::InvalidSpin(j));
        }
        Ok(Self { twice_j: twice as u32 })
    }

    pub fn from_twice_j(twice_j: u32) -> Self {
        Self { twice_j }
    }

    pub fn twice_j(&self) -> u32 {
        self.twice_j
    }

    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_j as usize + 1
    }

    /// Magnetic quantum number of basis index `a`.
    pub fn m(&self, a: usize) -> f64 {
        self.j() - a as f64
    }

    /// All `m` values in basis order.
    pub fn m_values(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.m(a)).collect()
    }
}

/// Direction `(θ₀, φ₀)` of an SU(2) coherent state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentParams {
    theta0: f64,
    phi0: f64,
}

impl CoherentParams {
    pub fn new(theta0: f64, phi0: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta0) {
            return Err(Error::InvalidParameter { name: "theta0", reason: format!("{theta0} is outside [0, π]") });
        }
        if !phi0.is_finite() {
            return Err(Error::InvalidParameter { name: "phi0", reason: format!("{phi0} is not finite") });
        }
        Ok(Self { theta0, phi0 })
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    /// Stereographic label `e^{iφ₀} tan(θ₀/2)`.
    pub fn stereographic(&self) -> C64 {
        C64::from_polar((self.theta0 / 2.0).tan(), self.phi0)
    }
}

/// Normalised single-top state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    basis: SpinBasis,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Requires `Σ|c|² = 1` to 1e-12.
    pub fn new(basis: SpinBasis, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: amplitudes.len() });
        }
        if let Some(i) = amplitudes.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter { name: "amplitudes", reason: format!("squared norm {norm} is not 1") });
        }
        Ok(Self { basis, amplitudes })
    }

    /// Rescales to unit norm.
    pub fn normalized(basis: SpinBasis, mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidParameter { name: "amplitudes", reason: "zero vector".into() });
        }
        for z in amplitudes.iter_mut() {
            *z /= norm;
        }
        Self::new(basis, amplitudes)
    }

    pub fn basis(&self) -> SpinBasis {
        self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `⟨ψ|op|ψ⟩`, real part.
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        let v = op.apply(&self.amplitudes);
        self.amplitudes.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<C64>().re
    }
}

pub fn jz_matrix(basis: SpinBasis) -> ComplexMatrix {
    let d: Vec<C64> = basis.m_values().into_iter().map(|m| C64::new(m, 0.0)).collect();
    ComplexMatrix::from_diagonal(&d)
}

/// Raising operator; `J₊|m⟩ = √(j(j+1) − m(m+1)) |m+1⟩` lives at `(a−1, a)`.
fn j_plus(basis: SpinBasis) -> ComplexMatrix {
    let n = basis.dim();
    let j = basis.j();
    let mut out = ComplexMatrix::zeros(n, n);
    for a in 1..n {
        let m = basis.m(a);
        out[(a - 1, a)] = C64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    out
}

pub fn jx_matrix(basis: SpinBasis) -> ComplexMatrix {
    let p = j_plus(basis);
    p.add(&p.adjoint()).scale(C64::new(0.5, 0.0))
}

pub fn jy_matrix(basis: SpinBasis) -> ComplexMatrix {
    let p = j_plus(basis);
    p.sub(&p.adjoint()).scale(C64::new(0.0, -0.5))
}

/// Binomial row `C(n, 0..=n)`.
fn binomial_row(n: usize) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n + 1);
    let mut c = BigUint::from(1u32);
    row.push(c.clone());
    for k in 0..n {
        c = c * BigUint::from(n - k) / BigUint::from(k + 1);
        row.push(c.clone());
    }
    row
}

/// `x = mantissa · 2^exponent` with the mantissa in double precision.
fn split_scaled(x: &BigUint) -> (f64, i64) {
    let bits = x.bits();
    if bits <= 60 {
        return (x.to_f64().unwrap_or(0.0), 0);
    }
    let shift = bits - 60;
    ((x >> shift).to_f64().unwrap_or(0.0), shift as i64)
}

/// Wigner matrix `⟨j, m'| e^{−i(π/2)J_y} |j, m⟩` with rows `m'` and columns `m`.
///
/// At `β = π/2` every term of the Wigner sum carries the same power of `1/√2`, so
/// `d_{m'm} = (−1)^{m'−m} 2^{−j} √(C(2j, j+m)/C(2j, j+m')) Σ_s (−1)^s C(j+m, s) C(j−m, j−m'−s)`.
/// The alternating sum is accumulated in exact integer arithmetic.
pub fn rotation_y_quarter(basis: SpinBasis) -> ComplexMatrix {
    let n = basis.dim();
    let n2 = n - 1;
    let central = binomial_row(n2);
    let mut d = ComplexMatrix::zeros(n, n);
    let mut k_sum = BigInt::zero();
    for b in 0..n {
        let c = n2 - b;
        let e = b;
        let row_c = binomial_row(c);
        let row_e = binomial_row(e);
        // d_{m'm} = (−1)^{m−m'} d_{mm'}: fill a ≤ b and mirror
        for a in 0..=b {
            k_sum.set_zero();
            let s_lo = a.saturating_sub(e);
            let s_hi = a.min(c);
            for s in s_lo..=s_hi {
                let prod = BigInt::from_biguint(Sign::Plus, &row_c[s] * &row_e[a - s]);
                if s % 2 == 0 {
                    k_sum += prod;
                } else {
                    k_sum -= prod;
                }
            }
            if k_sum.is_zero() {
                continue;
            }
            let (mk, ek) = split_scaled(k_sum.magnitude());
            let (mc, ec) = split_scaled(&central[c]);
            let (ma, ea) = split_scaled(&central[n2 - a]);
            let twice_exp = 2 * ek + ec - ea - n2 as i64;
            let mut value = mk * (mc / ma).sqrt() * 2f64.powi((twice_exp / 2) as i32);
            if twice_exp % 2 != 0 {
                value *= std::f64::consts::SQRT_2.powi(twice_exp.signum() as i32);
            }
            let negative = (k_sum.sign() == Sign::Minus) ^ ((b - a) % 2 == 1);
            let value = if negative { -value } else { value };
            d[(a, b)] = C64::new(value, 0.0);
            if a != b {
                let mirrored = if (b - a) % 2 == 1 { -value } else { value };
                d[(b, a)] = C64::new(mirrored, 0.0);
            }
        }
    }
    d
}

/// SU(2) coherent state `|θ₀, φ₀⟩`: `c_m = cos(θ₀/2)^{j+m} sin(θ₀/2)^{j−m} e^{i(j−m)φ₀} √C(2j, j+m)`.
pub fn coherent_state(basis: SpinBasis, p: CoherentParams) -> StateVector {
    let n2 = basis.twice_j() as usize;
    let lf = LogFactorials::new(n2);
    let half = p.theta0() / 2.0;
    let (ln_cos, ln_sin) = (half.cos().abs().ln(), half.sin().abs().ln());
    let amplitudes = (0..=n2)
        .map(|a| {
            // j + m = 2j − a, j − m = a
            let up = n2 - a;
            let down = a;
            let mut ln_mag = 0.5 * lf.ln_binomial(n2, up);
            for (power, ln_base) in [(up, ln_cos), (down, ln_sin)] {
                if power > 0 {
                    ln_mag += power as f64 * ln_base;
                }
            }
            if ln_mag == f64::NEG_INFINITY {
                C64::new(0.0, 0.0)
            } else {
                C64::from_polar(ln_mag.exp(), down as f64 * p.phi0())
            }
        })
        .collect();
    StateVector::normalized(basis, amplitudes).expect("coherent amplitudes are finite and nonzero")
}

/// Product of two coherent states as an `N × N` amplitude grid.
pub fn product_initial_state(basis: SpinBasis, p1: CoherentParams, p2: CoherentParams) -> BipartiteState {
    let a = coherent_state(basis, p1);
    let b = coherent_state(basis, p2);
    BipartiteState::product(&a, &b)
}

/// `ρ₁ ⊗ |ψ₂⟩⟨ψ₂|` with `ρ₁ = p|a⟩⟨a| + (1 − p)|b⟩⟨b|`.
pub fn mixed_initial_state(
    basis: SpinBasis,
    pa: CoherentParams,
    pb: CoherentParams,
    weight: f64,
    p2: CoherentParams,
) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::WeightOutOfRange(weight));
    }
    let a = coherent_state(basis, pa);
    let b = coherent_state(basis, pb);
    let psi2 = coherent_state(basis, p2);
    let rho1 = ComplexMatrix::outer(a.amplitudes(), a.amplitudes())
        .scale(C64::new(weight, 0.0))
        .add(&ComplexMatrix::outer(b.amplitudes(), b.amplitudes()).scale(C64::new(1.0 - weight, 0.0)));
    let rho2 = ComplexMatrix::outer(psi2.amplitudes(), psi2.amplitudes());
    DensityOperator::with_subsystems(rho1.kron(&rho2), (basis.dim(), basis.dim()))
}
