//! Classical limit of the kicked tops: unit vectors `(X, Y, Z) = J/j` on the sphere.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::{Error, Result};

/// Orbits are projected back onto the sphere this often.
pub const RENORMALIZE_EVERY: u64 = 1024;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalTopState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ClassicalTopState {
    /// Requires `x² + y² + z² = 1` to 1e-12.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let s = Self { x, y, z };
        let defect = (s.norm_sqr() - 1.0).abs();
        if !(defect <= 1e-12) {
            return Err(Error::InvalidParameter { name: "state", reason: format!("|r|² − 1 = {defect:e}") });
        }
        Ok(s)
    }

    /// `(sin θ cos φ, sin θ sin φ, cos θ)`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self { x: theta.sin() * phi.cos(), y: theta.sin() * phi.sin(), z: theta.cos() }
    }

    /// `θ = arccos Z ∈ [0, π]`, `φ = atan2(Y, X) ∈ (−π, π]`.
    pub fn angles(&self) -> (f64, f64) {
        let theta = self.z.clamp(-1.0, 1.0).acos();
        let mut phi = self.y.atan2(self.x);
        if phi <= -PI {
            phi = PI;
        }
        (theta, phi)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn renormalized(&self) -> Self {
        let r = self.norm_sqr().sqrt();
        Self { x: self.x / r, y: self.y / r, z: self.z / r }
    }

    /// Rotation about `x` by `Δ` after the quarter turn: `(Z cos Δ + Y sin Δ, −Z sin Δ + Y cos Δ, −X)`.
    fn kicked(&self, delta: f64) -> Self {
        let (s, c) = delta.sin_cos();
        Self { x: self.z * c + self.y * s, y: -self.z * s + self.y * c, z: -self.x }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalPairState {
    pub top1: ClassicalTopState,
    pub top2: ClassicalTopState,
}

impl ClassicalPairState {
    pub fn renormalized(&self) -> Self {
        Self { top1: self.top1.renormalized(), top2: self.top2.renormalized() }
    }
}

/// One kick of a single top, `Δ = kX`.
pub fn single_map_step(s: ClassicalTopState, k: f64) -> ClassicalTopState {
    s.kicked(k * s.x)
}

/// One kick of the coupled tops, `Δ₁₂ = kX₁ + εX₂` and `Δ₂₁ = kX₂ + εX₁`.
pub fn coupled_map_step(s: ClassicalPairState, k: f64, eps: f64) -> ClassicalPairState {
    let d12 = k * s.top1.x + eps * s.top2.x;
    let d21 = k * s.top2.x + eps * s.top1.x;
    ClassicalPairState { top1: s.top1.kicked(d12), top2: s.top2.kicked(d21) }
}

/// Iterates of a single top, starting with the initial state itself.
pub fn single_orbit(start: ClassicalTopState, k: f64) -> impl Iterator<Item = ClassicalTopState> {
    let mut state = start;
    let mut n = 0u64;
    std::iter::from_fn(move || {
        let out = state;
        n += 1;
        state = single_map_step(state, k);
        if n.is_multiple_of(RENORMALIZE_EVERY) {
            state = state.renormalized();
        }
        Some(out)
    })
}

/// Iterates of the coupled tops, starting with the initial state itself.
pub fn coupled_orbit(start: ClassicalPairState, k: f64, eps: f64) -> impl Iterator<Item = ClassicalPairState> {
    let mut state = start;
    let mut n = 0u64;
    std::iter::from_fn(move || {
        let out = state;
        n += 1;
        state = coupled_map_step(state, k, eps);
        if n.is_multiple_of(RENORMALIZE_EVERY) {
            state = state.renormalized();
        }
        Some(out)
    })
}

/// Initial conditions for a single-top section: cell centres of a grid uniform in
/// `(cos θ, φ)` followed by explicit points.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionSpec {
    pub k: f64,
    pub grid_cos_theta: usize,
    pub grid_phi: usize,
    /// Extra `(θ, φ)` starting points.
    pub points: Vec<(f64, f64)>,
    /// Points emitted per orbit, the initial condition included.
    pub iters: usize,
}

impl SectionSpec {
    pub fn new(k: f64, iters: usize) -> Self {
        Self { k, grid_cos_theta: 20, grid_phi: 20, points: Vec::new(), iters }
    }

    pub fn initial_conditions(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.grid_cos_theta * self.grid_phi + self.points.len());
        for i in 0..self.grid_cos_theta {
            let z = -1.0 + (2.0 * i as f64 + 1.0) / self.grid_cos_theta as f64;
            for p in 0..self.grid_phi {
                let phi = -PI + (2.0 * p as f64 + 1.0) * PI / self.grid_phi as f64;
                out.push((z.acos(), phi));
            }
        }
        out.extend_from_slice(&self.points);
        out
    }

    fn validate(&self) -> Result<()> {
        if self.iters == 0 {
            return Err(Error::InvalidParameter { name: "iters", reason: "must be at least 1".into() });
        }
        if !self.k.is_finite() {
            return Err(Error::InvalidParameter { name: "k", reason: format!("{} is not finite", self.k) });
        }
        for &(t, p) in &self.points {
            if !(0.0..=PI).contains(&t) || !p.is_finite() {
                return Err(Error::InvalidParameter { name: "points", reason: format!("({t}, {p}) is not on the sphere chart") });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectionPoint {
    pub orbit_id: usize,
    pub iter: usize,
    pub theta: f64,
    pub phi: f64,
}

fn orbit_points(id: usize, (theta, phi): (f64, f64), k: f64, iters: usize) -> Vec<SectionPoint> {
    single_orbit(ClassicalTopState::from_angles(theta, phi), k)
        .take(iters)
        .enumerate()
        .map(|(iter, s)| {
            let (theta, phi) = s.angles();
            SectionPoint { orbit_id: id, iter, theta, phi }
        })
        .collect()
}

/// Section points ordered by orbit, then by iterate.
pub fn phase_space_section(spec: &SectionSpec) -> Result<Vec<SectionPoint>> {
    phase_space_section_with_jobs(spec, 1)
}

/// As [`phase_space_section`], with the orbits split across `jobs` threads.
pub fn phase_space_section_with_jobs(spec: &SectionSpec, jobs: usize) -> Result<Vec<SectionPoint>> {
    spec.validate()?;
    let starts = spec.initial_conditions();
    let jobs = jobs.clamp(1, starts.len().max(1));
    let chunk = starts.len().div_ceil(jobs).max(1);
    let parts: Vec<Vec<SectionPoint>> = std::thread::scope(|scope| {
        let handles: Vec<_> = starts
            .chunks(chunk)
            .enumerate()
            .map(|(c, block)| {
                scope.spawn(move || {
                    block
                        .iter()
                        .enumerate()
                        .flat_map(|(i, &p)| orbit_points(c * chunk + i, p, spec.k, spec.iters))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("section worker panicked")).collect()
    });
    Ok(parts.into_iter().flatten().collect())
}

/// `orbit_id,iter,theta,phi` with `#` comment lines first.
pub fn section_to_csv(points: &[SectionPoint], comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str("orbit_id,iter,theta,phi\n");
    for p in points {
        let _ = writeln!(out, "{},{},{:.10},{:.10}", p.orbit_id, p.iter, p.theta, p.phi);
    }
    out
}

/// Fraction of a `bins × bins` equal-area `(cos θ, φ)` grid visited by the points.
pub fn sphere_coverage(points: impl IntoIterator<Item = (f64, f64)>, bins: usize) -> f64 {
    let mut seen = vec![false; bins * bins];
    for (theta, phi) in points {
        let u = ((1.0 - theta.cos()) / 2.0 * bins as f64).floor() as usize;
        let v = ((phi + PI) / (2.0 * PI) * bins as f64).floor() as usize;
        seen[u.min(bins - 1) * bins + v.min(bins - 1)] = true;
    }
    seen.iter().filter(|&&s| s).count() as f64 / (bins * bins) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: ClassicalTopState, b: ClassicalTopState, tol: f64) -> bool {
        (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol && (a.z - b.z).abs() <= tol
    }

    fn sample() -> ClassicalPairState {
        ClassicalPairState { top1: ClassicalTopState::from_angles(0.89, 0.63), top2: ClassicalTopState::from_angles(2.25, -0.63) }
    }

    #[test]
    fn unkicked_map_is_quarter_turn() {
        let s = sample();
        let t = coupled_map_step(s, 0.0, 0.0);
        for (a, b) in [(s.top1, t.top1), (s.top2, t.top2)] {
            assert_eq!(b, ClassicalTopState { x: a.z, y: a.y, z: -a.x });
        }
        let mut r = s;
        for _ in 0..4 {
            r = coupled_map_step(r, 0.0, 0.0);
        }
        assert!(close(r.top1, s.top1, 1e-14) && close(r.top2, s.top2, 1e-14));
    }

    #[test]
    fn decoupled_limit_is_two_single_maps() {
        let s = sample();
        let t = coupled_map_step(s, 6.0, 0.0);
        assert_eq!(t.top1, single_map_step(s.top1, 6.0));
        assert_eq!(t.top2, single_map_step(s.top2, 6.0));
    }

    #[test]
    fn single_map_from_north_pole() {
        let s = ClassicalTopState::new(0.0, 0.0, 1.0).unwrap();
        assert_eq!(single_map_step(s, 3.7), ClassicalTopState { x: 1.0, y: 0.0, z: 0.0 });
        assert!(ClassicalTopState::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn per_step_norm_drift() {
        let mut s = sample();
        for _ in 0..1000 {
            let t = coupled_map_step(s, 6.0, 0.5);
            assert!((t.top1.norm_sqr() - s.top1.norm_sqr()).abs() <= 1e-13);
            assert!((t.top2.norm_sqr() - s.top2.norm_sqr()).abs() <= 1e-13);
            s = t;
        }
    }

    #[test]
    fn long_orbit_keeps_unit_norm() {
        let last = single_orbit(ClassicalTopState::from_angles(0.89, 0.63), 6.0).nth(1_000_000).unwrap();
        assert!((last.norm_sqr().sqrt() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn angles_round_trip() {
        for (t, p) in [(0.89, 0.63), (2.25, -0.63), (0.1, 3.0), (3.0, -3.0)] {
            let (t2, p2) = ClassicalTopState::from_angles(t, p).angles();
            assert!((t - t2).abs() < 1e-12 && (p - p2).abs() < 1e-12);
        }
        let (_, phi) = ClassicalTopState { x: -1.0, y: -0.0, z: 0.0 }.angles();
        assert_eq!(phi, PI);
    }

    #[test]
    fn section_basics() {
        let mut spec = SectionSpec::new(6.0, 1);
        spec.grid_cos_theta = 0;
        spec.grid_phi = 0;
        spec.points.push((0.89, 0.63));
        let pts = phase_space_section(&spec).unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].theta - 0.89).abs() < 1e-12 && (pts[0].phi - 0.63).abs() < 1e-12);

        let spec = SectionSpec::new(3.0, 50);
        let pts = phase_space_section(&spec).unwrap();
        assert_eq!(pts.len(), 400 * 50);
        assert!(pts.iter().all(|p| (0.0..=PI).contains(&p.theta) && p.phi > -PI && p.phi <= PI));

        assert!(phase_space_section(&SectionSpec::new(1.0, 0)).is_err());
    }

    #[test]
    fn section_is_deterministic_across_job_counts() {
        let mut spec = SectionSpec::new(2.0, 30);
        spec.grid_cos_theta = 5;
        spec.grid_phi = 7;
        spec.points.push((0.89, 0.63));
        let a = phase_space_section_with_jobs(&spec, 1).unwrap();
        let b = phase_space_section_with_jobs(&spec, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(section_to_csv(&a, &[]), section_to_csv(&b, &[]));
        assert_eq!(a.last().unwrap().orbit_id, 35);
    }

    #[test]
    fn chaotic_orbit_covers_sphere_regular_does_not() {
        let start = ClassicalTopState::from_angles(0.89, 0.63);
        let chaotic = sphere_coverage(single_orbit(start, 6.0).take(100_000).map(|s| s.angles()), 20);
        assert!(chaotic >= 0.8, "coverage {chaotic}");
        let regular = sphere_coverage(single_orbit(start, 1.0).take(10_000).map(|s| s.angles()), 20);
        assert!(regular < 0.25, "coverage {regular}");
    }

    #[test]
    fn csv_layout() {
        let pts = vec![SectionPoint { orbit_id: 0, iter: 0, theta: 1.0, phi: -0.5 }];
        let csv = section_to_csv(&pts, &["k = 1".into()]);
        assert_eq!(csv, "# k = 1\norbit_id,iter,theta,phi\n0,0,1.0000000000,-0.5000000000\n");
    }
}
