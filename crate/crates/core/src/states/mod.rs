//! Pure and mixed spin states, their tensor components and SU(2) invariants.
//!
//! Amplitudes are in the Dicke basis ordered m = s, s−1, …, −s.

mod majorana;

pub use majorana::{
    majorana_boost, majorana_constellation, match_constellations, rotate_constellation, Constellation, Star,
};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{hermiticity_error, hermitian_eigenvalues, outer, trace_prod};
use crate::tensorbasis::{lm_index, t_basis};
use crate::wigner::Spin;
use crate::{domain, CMat, CVec, Error, Result, C64};

/// Default tolerance on C_t̂ for [`anticoherence_order`].
pub const ANTICOHERENCE_TOL: f64 = 1e-9;

/// Anything that can be viewed as a density matrix.
pub trait DensityLike {
    fn spin(&self) -> Spin;
    fn density(&self) -> CMat;

    fn purity(&self) -> f64 {
        let r = self.density();
        trace_prod(&r, &r).re
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    spin: Spin,
    amplitudes: CVec,
}

impl PureState {
    /// Normalizes `amplitudes`; zero vectors are rejected.
    pub fn new(spin: Spin, amplitudes: CVec) -> Result<PureState> {
        spin.check()?;
        if amplitudes.len() != spin.dim() {
            return Err(Error::Dimension {
                expected: spin.dim(),
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if !(norm > 1e-300) || !norm.is_finite() {
            return domain("state vector has zero or non-finite norm");
        }
        // already unit to rounding: keep the input bits so files round-trip
        let amplitudes = if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
            amplitudes
        } else {
            amplitudes / C64::from(norm)
        };
        Ok(PureState { spin, amplitudes })
    }

    pub fn from_slice(spin: Spin, amps: &[C64]) -> Result<PureState> {
        PureState::new(spin, CVec::from_column_slice(amps))
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    /// The Dicke state |s, m⟩ for doubled `two_m`.
    pub fn dicke(spin: Spin, two_m: i32) -> Result<PureState> {
        let i = spin
            .index_of(two_m)
            .ok_or_else(|| Error::Domain(format!("m = {two_m}/2 invalid for s = {spin}")))?;
        let mut v = CVec::zeros(spin.dim());
        v[i] = C64::from(1.0);
        PureState::new(spin, v)
    }

    pub fn transformed(&self, u: &CMat) -> Result<PureState> {
        PureState::new(self.spin, u * &self.amplitudes)
    }
}

impl DensityLike for PureState {
    fn spin(&self) -> Spin {
        self.spin
    }

    fn density(&self) -> CMat {
        outer(&self.amplitudes)
    }

    fn purity(&self) -> f64 {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    spin: Spin,
    matrix: CMat,
}

impl MixedState {
    /// Validates hermiticity, unit trace and positivity (to 1e−12 scale).
    pub fn new(spin: Spin, matrix: CMat) -> Result<MixedState> {
        spin.check()?;
        let n = spin.dim();
        if matrix.shape() != (n, n) {
            return Err(Error::Dimension {
                expected: n,
                got: matrix.nrows(),
            });
        }
        let herr = hermiticity_error(&matrix);
        if herr > 1e-10 {
            return domain(format!("density matrix not Hermitian (error {herr:.3e})"));
        }
        let tr = matrix.trace();
        if (tr - C64::from(1.0)).norm() > 1e-10 {
            return domain(format!("density matrix trace {tr} != 1"));
        }
        let herm = crate::linalg::hermitian_part(&matrix);
        let low = hermitian_eigenvalues(&herm)[0];
        if low < -1e-10 {
            return domain(format!("density matrix has negative eigenvalue {low:.3e}"));
        }
        Ok(MixedState { spin, matrix: herm })
    }

    pub fn from_pure(psi: &PureState) -> MixedState {
        MixedState {
            spin: psi.spin,
            matrix: psi.density(),
        }
    }

    pub fn maximally_mixed(spin: Spin) -> Result<MixedState> {
        let n = spin.dim();
        MixedState::new(spin, CMat::identity(n, n) / C64::from(n as f64))
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn transformed(&self, u: &CMat) -> Result<MixedState> {
        MixedState::new(self.spin, u * &self.matrix * u.adjoint())
    }
}

impl DensityLike for MixedState {
    fn spin(&self) -> Spin {
        self.spin
    }

    fn density(&self) -> CMat {
        self.matrix.clone()
    }
}

/// T-basis components ρ_lm of a state, in `lm_index` order.
#[derive(Clone, Debug, PartialEq)]
pub struct TComponents {
    pub spin: Spin,
    pub values: Vec<C64>,
}

impl TComponents {
    pub fn get(&self, l: u32, m: i32) -> C64 {
        self.values[lm_index(l, m)]
    }

    /// Σ_m |ρ_lm|² for each l.
    pub fn shell_sums(&self) -> Vec<f64> {
        (0..=self.spin.twice_s())
            .map(|l| (-(l as i32)..=l as i32).map(|m| self.get(l, m).norm_sqr()).sum())
            .collect()
    }
}

pub fn t_components(rho: &impl DensityLike) -> Result<TComponents> {
    let t = t_basis(rho.spin())?;
    Ok(TComponents {
        spin: rho.spin(),
        values: t.components(&rho.density()),
    })
}

/// A state that is either pure or mixed.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyState {
    Pure(PureState),
    Mixed(MixedState),
}

impl AnyState {
    pub fn r(&self) -> Result<Vec<f64>> {
        Ok(r_vector(self)?.r)
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            AnyState::Pure(p) => Some(p),
            AnyState::Mixed(_) => None,
        }
    }

    /// Mixed view; pure states become |ψ⟩⟨ψ|.
    pub fn to_mixed(&self) -> MixedState {
        match self {
            AnyState::Pure(p) => MixedState::from_pure(p),
            AnyState::Mixed(m) => m.clone(),
        }
    }
}

impl DensityLike for AnyState {
    fn spin(&self) -> Spin {
        match self {
            AnyState::Pure(p) => p.spin(),
            AnyState::Mixed(m) => m.spin(),
        }
    }

    fn density(&self) -> CMat {
        match self {
            AnyState::Pure(p) => p.density(),
            AnyState::Mixed(m) => m.density(),
        }
    }

    fn purity(&self) -> f64 {
        match self {
            AnyState::Pure(_) => 1.0,
            AnyState::Mixed(m) => m.purity(),
        }
    }
}

/// The SU(2)-invariant vector r and its rescaling r̃_l = r_l/√(2l+1).
#[derive(Clone, Debug, PartialEq)]
pub struct RVector {
    pub r: Vec<f64>,
    pub r_tilde: Vec<f64>,
}

impl RVector {
    pub fn from_r(r: Vec<f64>) -> RVector {
        let r_tilde = r
            .iter()
            .enumerate()
            .map(|(l, x)| x / ((2 * l + 1) as f64).sqrt())
            .collect();
        RVector { r, r_tilde }
    }

    /// C_t̂ = r_1 + … + r_t
    pub fn cumulative(&self, t: u32) -> f64 {
        self.r.iter().skip(1).take(t as usize).sum()
    }
}

/// r_l = Σ_m |ρ_lm|², the weight of ρ on the l-th tensor shell.
///
/// For pure states this equals ⟨ρ|𝕋_l|ρ⟩; for mixed states it is the shell
/// weight, which satisfies Σ_l r_l = Tr ρ² (see [`tbb_expectations`]).
pub fn r_vector(rho: &impl DensityLike) -> Result<RVector> {
    Ok(RVector::from_r(t_components(rho)?.shell_sums()))
}

/// ⟨ρ|𝕋_l|ρ⟩ = Σ_m Tr(ρ T_lm ρ T_lm†) for l = 0..2s.
pub fn tbb_expectations(rho: &impl DensityLike) -> Result<Vec<f64>> {
    let t = t_basis(rho.spin())?;
    let r = rho.density();
    Ok((0..=rho.spin().twice_s())
        .map(|l| {
            (-(l as i32)..=l as i32)
                .map(|m| {
                    let tl = t.get(l, m);
                    trace_prod(&(&r * tl), &(&r * tl.adjoint())).re
                })
                .sum()
        })
        .collect())
}

/// Largest t with C_t̂(ψ) ≤ tol.
pub fn anticoherence_order(psi: &PureState, tol: f64) -> Result<u32> {
    let r = r_vector(psi)?;
    let mut t = 0;
    let mut acc = 0.0;
    for l in 1..=psi.spin.twice_s() {
        acc += r.r[l as usize];
        if acc > tol {
            break;
        }
        t = l;
    }
    Ok(t)
}

/// Catalog of benchmark states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedState {
    /// |s, s⟩
    Coherent,
    /// (|s,s⟩ + |s,−s⟩)/√2
    Ghz,
    /// s = 2 tetrahedron, ½(1, 0, √2 i, 0, 1)
    Tetrahedron,
    /// s = 3 triangular prism (√2/3, 0, 0, √5/3, 0, 0, √2/3)
    TriangularPrism,
    /// |s, s−1⟩ (the symmetric W state)
    W,
    /// s = 5/2 triangular bipyramid ¼(0, 3, 0, √2, 0, −√5)
    TriangularBipyramid,
    /// s = 5/2 Dicke state |5/2, 3/2⟩
    Psi32,
    /// s = 5/2 triangular pyramid (0, 0, √5/3, 0, 0, 2/3)
    TriangularPyramid,
}

impl NamedState {
    pub const ALL: [NamedState; 8] = [
        NamedState::Coherent,
        NamedState::Ghz,
        NamedState::Tetrahedron,
        NamedState::TriangularPrism,
        NamedState::W,
        NamedState::TriangularBipyramid,
        NamedState::Psi32,
        NamedState::TriangularPyramid,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            NamedState::Coherent => "coherent",
            NamedState::Ghz => "ghz",
            NamedState::Tetrahedron => "tetrahedron",
            NamedState::TriangularPrism => "prism",
            NamedState::W => "w",
            NamedState::TriangularBipyramid => "bipyramid",
            NamedState::Psi32 => "psi32",
            NamedState::TriangularPyramid => "pyramid",
        }
    }

    pub fn parse(tag: &str) -> Result<NamedState> {
        let t = tag.trim().to_ascii_lowercase();
        let found = match t.as_str() {
            "coherent" => NamedState::Coherent,
            "ghz" => NamedState::Ghz,
            "tetrahedron" | "tetra" => NamedState::Tetrahedron,
            "prism" | "tp" => NamedState::TriangularPrism,
            "w" => NamedState::W,
            "bipyramid" | "trbyp" => NamedState::TriangularBipyramid,
            "psi32" => NamedState::Psi32,
            "pyramid" => NamedState::TriangularPyramid,
            _ => return Err(Error::Parse(format!("unknown named state '{tag}'"))),
        };
        Ok(found)
    }
}

pub fn named_state(tag: NamedState, s: Spin) -> Result<PureState> {
    let ts = s.twice_s();
    let r = |x: f64| C64::from(x);
    let need = |want: u32| -> Result<()> {
        if ts != want {
            return Err(Error::Unsupported(format!(
                "state '{}' is defined for 2s = {want}, not {ts}",
                tag.tag()
            )));
        }
        Ok(())
    };
    match tag {
        NamedState::Coherent => PureState::dicke(s, ts as i32),
        NamedState::Ghz => {
            if ts == 0 {
                return Err(Error::Unsupported("GHZ state needs s > 0".into()));
            }
            let mut v = CVec::zeros(s.dim());
            v[0] = r(1.0);
            v[ts as usize] = r(1.0);
            PureState::new(s, v)
        }
        NamedState::Tetrahedron => {
            need(4)?;
            PureState::from_slice(s, &[r(0.5), r(0.0), C64::new(0.0, 0.5 * 2f64.sqrt()), r(0.0), r(0.5)])
        }
        NamedState::TriangularPrism => {
            need(6)?;
            let a = 2f64.sqrt() / 3.0;
            let b = 5f64.sqrt() / 3.0;
            PureState::from_slice(s, &[r(a), r(0.0), r(0.0), r(b), r(0.0), r(0.0), r(a)])
        }
        NamedState::W => {
            if ts == 0 {
                return Err(Error::Unsupported("W state needs s > 0".into()));
            }
            PureState::dicke(s, ts as i32 - 2)
        }
        NamedState::TriangularBipyramid => {
            need(5)?;
            PureState::from_slice(
                s,
                &[r(0.0), r(0.75), r(0.0), r(2f64.sqrt() / 4.0), r(0.0), r(-(5f64.sqrt()) / 4.0)],
            )
        }
        NamedState::Psi32 => {
            need(5)?;
            PureState::dicke(s, 3)
        }
        NamedState::TriangularPyramid => {
            need(5)?;
            PureState::from_slice(
                s,
                &[r(0.0), r(0.0), r(5f64.sqrt() / 3.0), r(0.0), r(0.0), r(2.0 / 3.0)],
            )
        }
    }
}

/// Deterministic generator used for all seeded sampling.
pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn gaussian<R: rand::Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

fn gaussian_vec<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    CVec::from_fn(n, |_, _| gaussian(rng))
}

/// Fubini-Study random pure state from a caller-owned generator.
pub fn random_pure_with<R: rand::Rng + ?Sized>(s: Spin, rng: &mut R) -> Result<PureState> {
    PureState::new(s, gaussian_vec(s.dim(), rng))
}

/// Hilbert-Schmidt random mixed state from a caller-owned generator.
pub fn random_mixed_with<R: rand::Rng + ?Sized>(s: Spin, rng: &mut R) -> Result<MixedState> {
    s.check()?;
    let n = s.dim();
    let g = CMat::from_fn(n, n, |_, _| gaussian(rng));
    let w = &g * g.adjoint();
    let tr = w.trace();
    MixedState::new(s, w / tr)
}

pub fn random_pure(s: Spin, seed: u64) -> Result<PureState> {
    random_pure_with(s, &mut seeded_rng(seed))
}

pub fn random_mixed(s: Spin, seed: u64) -> Result<MixedState> {
    random_mixed_with(s, &mut seeded_rng(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensorbasis::{build_invariant_ops, lambda, vectorize};
    use crate::wigner::{wigner_d, Euler};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn maximally_mixed_components() {
        for ts in 0..=4 {
            let s = Spin::new(ts);
            let mm = MixedState::maximally_mixed(s).unwrap();
            let c = t_components(&mm).unwrap();
            assert!((c.values[0].re - 1.0 / (s.dim() as f64).sqrt()).abs() < 1e-14);
            assert!(c.values[1..].iter().all(|z| z.norm() < 1e-14));
            let r = r_vector(&mm).unwrap();
            let mut want = vec![0.0; s.dim()];
            want[0] = 1.0 / s.dim() as f64;
            assert!(close(&r.r, &want, 1e-14));
        }
    }

    #[test]
    fn stretched_spin_one_components() {
        let s = Spin::new(2);
        let psi = named_state(NamedState::Coherent, s).unwrap();
        let c = t_components(&psi).unwrap();
        assert!((c.get(1, 0) - C64::from(1.0 / 2f64.sqrt())).norm() < 1e-14);
        assert!((c.get(2, 0) - C64::from(1.0 / 6f64.sqrt())).norm() < 1e-14);
        let r = r_vector(&psi).unwrap();
        assert!(close(&r.r, &[1.0 / 3.0, 0.5, 1.0 / 6.0], 1e-14));
    }

    #[test]
    fn reconstruction_and_hermiticity_relations() {
        for ts in 1..=5 {
            let s = Spin::new(ts);
            let rho = random_mixed(s, 40 + ts as u64).unwrap();
            let c = t_components(&rho).unwrap();
            let t = t_basis(s).unwrap();
            assert!((t.reconstruct(&c.values) - rho.matrix()).norm() < 1e-12);
            for l in 0..=ts {
                for m in -(l as i32)..=l as i32 {
                    let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    assert!((c.get(l, -m) - c.get(l, m).conj() * sign).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn paper_r_vectors() {
        let ghz2 = named_state(NamedState::Ghz, Spin::new(4)).unwrap();
        assert!(close(&r_vector(&ghz2).unwrap().r, &[0.2, 0.0, 2.0 / 7.0, 0.0, 18.0 / 35.0], 1e-13));
        let tet = named_state(NamedState::Tetrahedron, Spin::new(4)).unwrap();
        let c = t_components(&tet).unwrap();
        assert!((-1..=1).all(|m| c.get(1, m).norm() < 1e-14));
        assert!(close(&r_vector(&tet).unwrap().r, &[0.2, 0.0, 0.0, 0.5, 0.3], 1e-13));
        let p = named_state(NamedState::Psi32, Spin::new(5)).unwrap();
        let r = r_vector(&p).unwrap().r;
        assert!((r[1] - 9.0 / 70.0).abs() < 1e-14 && (r[2] - 1.0 / 84.0).abs() < 1e-14);
        let g = named_state(NamedState::Ghz, Spin::new(5)).unwrap();
        let r = r_vector(&g).unwrap().r;
        assert!(r[1].abs() < 1e-14 && (r[2] - 25.0 / 84.0).abs() < 1e-14);
        let w = named_state(NamedState::W, Spin::new(6)).unwrap();
        let r = r_vector(&w).unwrap().r;
        assert!((r[1] - 1.0 / 7.0).abs() < 1e-14 && r[2].abs() < 1e-14 && (r[3] - 1.0 / 6.0).abs() < 1e-14);
        let coh = named_state(NamedState::Coherent, Spin::new(6)).unwrap();
        let r = r_vector(&coh).unwrap().r;
        assert!(close(&r[1..4], &[9.0 / 28.0, 25.0 / 84.0, 1.0 / 6.0], 1e-14));
        let tp = named_state(NamedState::TriangularPrism, Spin::new(6)).unwrap();
        let r = r_vector(&tp).unwrap().r;
        assert!((r[3] - 40.0 / 243.0).abs() < 1e-14);
        let py = named_state(NamedState::TriangularPyramid, Spin::new(5)).unwrap();
        let r = r_vector(&py).unwrap().r;
        assert!((r[1] - 5.0 / 126.0).abs() < 1e-14 && r[2].abs() < 1e-14 && (r[3] - 20.0 / 81.0).abs() < 1e-14);
        let by = named_state(NamedState::TriangularBipyramid, Spin::new(5)).unwrap();
        let r = r_vector(&by).unwrap().r;
        assert!(r[1].abs() < 1e-14 && (r[2] - 1.0 / 84.0).abs() < 1e-14);
    }

    #[test]
    fn anticoherence_orders() {
        let coh = named_state(NamedState::Coherent, Spin::new(4)).unwrap();
        assert_eq!(anticoherence_order(&coh, ANTICOHERENCE_TOL).unwrap(), 0);
        let tet = named_state(NamedState::Tetrahedron, Spin::new(4)).unwrap();
        assert_eq!(anticoherence_order(&tet, ANTICOHERENCE_TOL).unwrap(), 2);
        let tp = named_state(NamedState::TriangularPrism, Spin::new(6)).unwrap();
        assert_eq!(anticoherence_order(&tp, ANTICOHERENCE_TOL).unwrap(), 2);
        let ghz = named_state(NamedState::Ghz, Spin::new(4)).unwrap();
        assert_eq!(anticoherence_order(&ghz, ANTICOHERENCE_TOL).unwrap(), 1);
    }

    #[test]
    fn pure_routes_agree_and_lambda_fixes_r() {
        for ts in 1..=6 {
            let s = Spin::new(ts);
            let lam = lambda(s).unwrap();
            for seed in 0..5 {
                let psi = random_pure(s, seed).unwrap();
                let q = r_vector(&psi).unwrap().r;
                let tb = tbb_expectations(&psi).unwrap();
                assert!(close(&q, &tb, 1e-11));
                let lr: Vec<f64> = (0..s.dim())
                    .map(|l| (0..s.dim()).map(|lp| lam.entries[(l, lp)] * q[lp]).sum())
                    .collect();
                assert!(close(&lr, &q, 1e-10));
            }
        }
    }

    #[test]
    fn tbb_expectations_match_superoperators() {
        let s = Spin::new(2);
        let ops = build_invariant_ops(s).unwrap();
        let lam = lambda(s).unwrap();
        let rho = random_mixed(s, 3).unwrap();
        let v = vectorize(rho.matrix());
        let tb = tbb_expectations(&rho).unwrap();
        let q = r_vector(&rho).unwrap().r;
        for l in 0..3 {
            let direct = v.dotc(&(&ops.tbb[l] * &v)).re;
            assert!((direct - tb[l]).abs() < 1e-12);
            let lq: f64 = (0..3).map(|lp| lam.entries[(l, lp)] * q[lp]).sum();
            assert!((lq - tb[l]).abs() < 1e-12);
        }
        assert!((q[1] + q[2] - (rho.purity() - 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn su2_covariance_of_r() {
        let mut rng = seeded_rng(17);
        for ts in 1..=5 {
            let s = Spin::new(ts);
            for _ in 0..10 {
                let g = Euler::random(&mut rng);
                let u = wigner_d(s, g.alpha, g.beta, g.gamma).unwrap();
                let psi = random_pure_with(s, &mut rng).unwrap();
                let a = r_vector(&psi).unwrap().r;
                let b = r_vector(&psi.transformed(&u).unwrap()).unwrap().r;
                assert!(close(&a, &b, 1e-11));
                let rho = random_mixed_with(s, &mut rng).unwrap();
                let a = r_vector(&rho).unwrap().r;
                let b = r_vector(&rho.transformed(&u).unwrap()).unwrap().r;
                assert!(close(&a, &b, 1e-11));
            }
        }
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let a = random_pure(Spin::new(3), 99).unwrap();
        let b = random_pure(Spin::new(3), 99).unwrap();
        assert_eq!(a, b);
        let a = random_mixed(Spin::new(2), 5).unwrap();
        let b = random_mixed(Spin::new(2), 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampled_ranges() {
        let s = Spin::new(2);
        let mut rng = seeded_rng(1);
        let mut mean = 0.0;
        for _ in 0..10_000 {
            mean += r_vector(&random_pure_with(s, &mut rng).unwrap()).unwrap().r[1];
        }
        mean /= 10_000.0;
        assert!(mean > 0.0 && mean < 0.5);
        for _ in 0..2000 {
            let rho = random_mixed_with(s, &mut rng).unwrap();
            let eps = rho.purity() - 1.0 / 3.0;
            assert!((-2.0 / 9.0 - 1e-12..=2.0 / 3.0 + 1e-12).contains(&eps));
        }
    }

    #[test]
    fn constructors_validate() {
        let s = Spin::new(2);
        assert!(PureState::new(s, CVec::zeros(3)).is_err());
        assert!(PureState::new(s, CVec::zeros(2)).is_err());
        let bad = CMat::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0].map(C64::from));
        assert!(MixedState::new(s, bad).is_err());
        let neg = CMat::from_diagonal(&CVec::from_column_slice(&[1.5, -0.5, 0.0].map(C64::from)));
        assert!(MixedState::new(s, neg).is_err());
        assert!(named_state(NamedState::Tetrahedron, Spin::new(3)).is_err());
        assert_eq!(NamedState::parse("GHZ").unwrap(), NamedState::Ghz);
        for ns in NamedState::ALL {
            assert_eq!(NamedState::parse(ns.tag()).unwrap(), ns);
        }
    }
}
