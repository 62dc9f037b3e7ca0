//! Fidelity, quantum Fisher information and their SU(2) orbit averages.

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_fn, hermiticity_error, is_hermitian, pairwise_sum, trace_prod, unitary_exp};
use crate::states::{r_vector, AnyState, DensityLike, MixedState, PureState};
use crate::tensorbasis::{f_omega, lambda, pure_r_form, t_basis, vectorize};
use crate::wigner::{clebsch_gordan_exact, spin_operators, wigner_small_d, Spin};
use crate::{domain, CMat, Error, Result, C64};

pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum TransformLabel {
    Rotation { eta: f64, axis: [f64; 3] },
    Squeezing { eta: f64, axis: [f64; 3], power: u32 },
    Diagonal { eta: f64 },
    Custom,
}

#[derive(Clone, Debug)]
pub struct UnitaryTransform {
    pub spin: Spin,
    pub matrix: CMat,
    pub label: TransformLabel,
}

fn unit_axis(axis: [f64; 3]) -> Result<[f64; 3]> {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return domain("axis must be a nonzero finite vector");
    }
    Ok(axis.map(|x| x / n))
}

impl UnitaryTransform {
    pub fn custom(spin: Spin, matrix: CMat) -> Result<UnitaryTransform> {
        let n = spin.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: matrix.nrows(),
            });
        }
        let err = (matrix.adjoint() * &matrix - CMat::identity(n, n)).norm();
        if err > UNITARY_TOL {
            return domain(format!("matrix is not unitary (‖V†V − I‖ = {err:.3e})"));
        }
        Ok(UnitaryTransform {
            spin,
            matrix,
            label: TransformLabel::Custom,
        })
    }

    /// e^{−iη n̂·S}
    pub fn rotation(spin: Spin, eta: f64, axis: [f64; 3]) -> Result<UnitaryTransform> {
        let n = unit_axis(axis)?;
        let g = spin_operators(spin)?.along(n);
        Ok(UnitaryTransform {
            spin,
            matrix: unitary_exp(&g, eta),
            label: TransformLabel::Rotation { eta, axis: n },
        })
    }

    /// e^{−iη (n̂·S)^k}
    pub fn squeezing(spin: Spin, eta: f64, axis: [f64; 3], power: u32) -> Result<UnitaryTransform> {
        let n = unit_axis(axis)?;
        let g = spin_operators(spin)?.along(n);
        let gk = hermitian_fn(&g, |e| C64::from(e.powi(power as i32)));
        Ok(UnitaryTransform {
            spin,
            matrix: unitary_exp(&gk, eta),
            label: TransformLabel::Squeezing { eta, axis: n, power },
        })
    }

    /// diag(e^{−iη f(m)}) in the Dicke basis.
    pub fn diagonal(spin: Spin, f: impl Fn(f64) -> f64, eta: f64) -> Result<UnitaryTransform> {
        spin.check()?;
        let n = spin.dim();
        let d = DVector::from_fn(n, |i, _| C64::from_polar(1.0, -eta * f(spin.m_of(i))));
        Ok(UnitaryTransform {
            spin,
            matrix: CMat::from_diagonal(&d),
            label: TransformLabel::Diagonal { eta },
        })
    }

    /// U V U†
    pub fn conjugated(&self, u: &CMat) -> UnitaryTransform {
        UnitaryTransform {
            spin: self.spin,
            matrix: u * &self.matrix * u.adjoint(),
            label: TransformLabel::Custom,
        }
    }

    /// |V_l|² = Σ_m |Tr(V T_lm†)|² for l = 0..2s.
    pub fn shells(&self) -> Result<Vec<f64>> {
        Ok(t_basis(self.spin)?.shell_weights(&self.matrix))
    }
}

/// One-parameter transformation families about the z axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Rotation,
    /// e^{−iη S_z^k}; k = 2 is ordinary squeezing.
    Squeezing(u32),
}

impl Family {
    pub fn parse(s: &str) -> Result<Family> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "rotation" | "rot" => Ok(Family::Rotation),
            "squeezing" | "sq" => Ok(Family::Squeezing(2)),
            _ => {
                if let Some(k) = t.strip_prefix("squeezing-").or_else(|| t.strip_prefix("k-squeezing-")) {
                    let k: u32 = k.parse().map_err(|_| Error::Parse(format!("bad power in '{s}'")))?;
                    if k == 0 {
                        return Err(Error::Parse("squeezing power must be ≥ 1".into()));
                    }
                    return Ok(if k == 1 { Family::Rotation } else { Family::Squeezing(k) });
                }
                Err(Error::Parse(format!("unknown family '{s}'")))
            }
        }
    }

    pub fn name(self) -> String {
        match self {
            Family::Rotation => "rotation".into(),
            Family::Squeezing(2) => "squeezing".into(),
            Family::Squeezing(k) => format!("squeezing-{k}"),
        }
    }

    pub fn power(self) -> u32 {
        match self {
            Family::Rotation => 1,
            Family::Squeezing(k) => k,
        }
    }

    pub fn transform(self, s: Spin, eta: f64) -> Result<UnitaryTransform> {
        let k = self.power() as i32;
        UnitaryTransform::diagonal(s, |m| m.powi(k), eta)
    }

    /// |V_l(η)|² without building the matrix.
    pub fn shells(self, s: Spin, eta: f64) -> Result<Vec<f64>> {
        let k = self.power() as i32;
        diagonal_v_components(s, |m| m.powi(k), eta)
    }
}

fn check_dim(rho: &impl DensityLike, v: &UnitaryTransform) -> Result<()> {
    if rho.spin() != v.spin {
        return Err(Error::Dimension {
            expected: rho.spin().dim(),
            got: v.spin.dim(),
        });
    }
    Ok(())
}

/// Tr(ρ V ρ V†)
pub fn fidelity(rho: &impl DensityLike, v: &UnitaryTransform) -> Result<f64> {
    check_dim(rho, v)?;
    let r = rho.density();
    Ok(trace_prod(&(&r * &v.matrix), &(&r * v.matrix.adjoint())).re)
}

fn check_generator(x: &CMat, s: Spin) -> Result<()> {
    if x.nrows() != s.dim() || x.ncols() != s.dim() {
        return Err(Error::Dimension {
            expected: s.dim(),
            got: x.nrows(),
        });
    }
    if !is_hermitian(x, 1e-12) {
        return domain(format!("generator is not Hermitian (‖X − X†‖ = {:.3e})", hermiticity_error(x)));
    }
    Ok(())
}

/// I_ρ(X) = −2 F''(0) = 2 ⟨ρ|ad_X²|ρ⟩ = 2 ‖[X, ρ]‖².
pub fn qfi(psi: &PureState, x: &CMat) -> Result<f64> {
    check_generator(x, psi.spin())?;
    let r = psi.density();
    let c = x * &r - &r * x;
    Ok(2.0 * c.norm_squared())
}

/// The same quantity through 2‖𝔽_ωρ|X⟩‖², for the generator e^{iω}X.
pub fn qfi_omega(psi: &PureState, x: &CMat, omega: f64) -> Result<f64> {
    check_generator(x, psi.spin())?;
    let f = f_omega(&psi.density(), omega)?;
    Ok(2.0 * (f * vectorize(x)).norm_squared())
}

/// Shell weights |X_l|² of an operator.
pub fn operator_shells(x: &CMat, s: Spin) -> Result<Vec<f64>> {
    if x.nrows() != s.dim() || x.ncols() != s.dim() {
        return Err(Error::Dimension {
            expected: s.dim(),
            got: x.nrows(),
        });
    }
    Ok(t_basis(s)?.shell_weights(x))
}

/// Orbit-averaged QFI 4(Tr X²/(2s+1) − Σ_l r_l |X_l|²/(2l+1)).
pub fn avg_qfi(psi: &PureState, x: &CMat) -> Result<f64> {
    let s = psi.spin();
    check_generator(x, s)?;
    let xs = operator_shells(x, s)?;
    let r = r_vector(psi)?.r;
    let tr2 = trace_prod(x, x).re;
    Ok(4.0 * (tr2 / s.dim() as f64 - shell_dot(&r, &xs)))
}

/// Σ_l a_l b_l/(2l+1)
pub fn shell_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(l, (x, y))| x * y / (2 * l + 1) as f64)
        .sum()
}

/// G(a, b) = Σ_{ll'} a_l λ_{ll'} b_{l'}/(2l+1), the invariant metric in r-space.
pub fn r_metric(s: Spin, a: &[f64], b: &[f64]) -> Result<f64> {
    let lam = lambda(s)?;
    let d = s.dim();
    let mut acc = 0.0;
    for l in 0..d {
        let row: f64 = (0..d).map(|lp| lam.entries[(l, lp)] * b[lp]).sum();
        acc += a[l] * row / (2 * l + 1) as f64;
    }
    Ok(acc)
}

const PURITY_TOL: f64 = 1e-12;

/// SU(2)-averaged fidelity ∫ Tr(ρ_U V ρ_U V†) dU.
///
/// Pure states use the diagonal form r̃_V·r̃_ρ, mixed ones the full metric.
pub fn avg_fidelity(rho: &impl DensityLike, v: &UnitaryTransform) -> Result<f64> {
    check_dim(rho, v)?;
    let r = r_vector(rho)?.r;
    let vs = v.shells()?;
    if (rho.purity() - 1.0).abs() < PURITY_TOL {
        Ok(shell_dot(&r, &vs))
    } else {
        r_metric(rho.spin(), &r, &vs)
    }
}

/// Euler-angle product grid: trapezoid in α and γ on [0, 2π), Gauss-Legendre
/// in cos β.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureGrid {
    pub n_alpha: usize,
    pub n_beta: usize,
    pub n_gamma: usize,
}

impl QuadratureGrid {
    pub fn cube(n: usize) -> QuadratureGrid {
        QuadratureGrid {
            n_alpha: n,
            n_beta: n,
            n_gamma: n,
        }
    }
}

/// Nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let (p, pm1) = if n == 1 { (z, 1.0) } else { (p1, p0) };
            dp = n as f64 * (z * p - pm1) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Haar average of f(U) over SU(2) on an Euler-angle grid, valid for
/// integrands that only see U through conjugation.
pub fn haar_average<F>(s: Spin, grid: QuadratureGrid, f: F) -> Result<f64>
where
    F: Fn(&CMat) -> f64 + Sync,
{
    if grid.n_alpha == 0 || grid.n_beta == 0 || grid.n_gamma == 0 {
        return domain("quadrature grid must have at least one node per angle");
    }
    s.check()?;
    let n = s.dim();
    let (xs, ws) = gauss_legendre(grid.n_beta);
    let ms: Vec<f64> = (0..n).map(|i| s.m_of(i)).collect();
    let tau = std::f64::consts::TAU;
    let per_beta: Vec<Result<f64>> = xs
        .par_iter()
        .zip(ws.par_iter())
        .map(|(&x, &w)| {
            let d = wigner_small_d(s, x.clamp(-1.0, 1.0).acos())?;
            let mut vals = Vec::with_capacity(grid.n_alpha * grid.n_gamma);
            for ia in 0..grid.n_alpha {
                let a = tau * ia as f64 / grid.n_alpha as f64;
                for ig in 0..grid.n_gamma {
                    let g = tau * ig as f64 / grid.n_gamma as f64;
                    let u = CMat::from_fn(n, n, |r, c| C64::from_polar(d[(r, c)], -(ms[r] * a + ms[c] * g)));
                    vals.push(f(&u));
                }
            }
            Ok(0.5 * w * pairwise_sum(&vals) / vals.len() as f64)
        })
        .collect();
    let per_beta: Vec<f64> = per_beta.into_iter().collect::<Result<_>>()?;
    Ok(pairwise_sum(&per_beta))
}

/// Quadrature oracle for [`avg_fidelity`].
pub fn avg_fidelity_quadrature(rho: &impl DensityLike, v: &UnitaryTransform, grid: QuadratureGrid) -> Result<f64> {
    check_dim(rho, v)?;
    let r = rho.density();
    let vm = &v.matrix;
    let vd = vm.adjoint();
    haar_average(rho.spin(), grid, |u| {
        let ru = u * &r * u.adjoint();
        trace_prod(&(&ru * vm), &(&ru * &vd)).re
    })
}

/// Tr(ρσ)/max(Tr ρ², Tr σ²)
pub fn hs_quasi_fidelity(rho: &impl DensityLike, sigma: &impl DensityLike) -> Result<f64> {
    if rho.spin() != sigma.spin() {
        return Err(Error::Dimension {
            expected: rho.spin().dim(),
            got: sigma.spin().dim(),
        });
    }
    let overlap = trace_prod(&rho.density(), &sigma.density()).re;
    Ok(overlap / rho.purity().max(sigma.purity()))
}

/// Orbit average of the HS quasi-fidelity between ρ_U and Vρ_UV†, evaluated as
/// (r⁺·r_V⁺ − r⁻·r_V⁻)/Tr ρ² in the λ̃ eigenbasis.
pub fn avg_hs_fidelity(rho: &MixedState, v: &UnitaryTransform) -> Result<f64> {
    check_dim(rho, v)?;
    let s = rho.spin();
    let p = rho.purity();
    if p < 1.0 / s.dim() as f64 - 1e-12 {
        return domain(format!("Tr ρ² = {p} is below 1/(2s+1)"));
    }
    let (pp, pm) = lambda(s)?.eigen_projectors();
    let tilde = |x: Vec<f64>| {
        DVector::from_iterator(x.len(), x.iter().enumerate().map(|(l, y)| y / ((2 * l + 1) as f64).sqrt()))
    };
    let rt = tilde(r_vector(rho)?.r);
    let vt = tilde(v.shells()?);
    let plus = (&pp * &rt).dot(&(&pp * &vt));
    let minus = (&pm * &rt).dot(&(&pm * &vt));
    Ok((plus - minus) / p)
}

/// |V_l|² for V = diag(e^{−iη f(m)}):
/// (2l+1)/(2s+1) Σ_{m1 m2} C_{m1} C_{m2} cos((f(m1) − f(m2))η), C_m = ⟨s m; l 0|s m⟩.
pub fn diagonal_v_components(s: Spin, f: impl Fn(f64) -> f64, eta: f64) -> Result<Vec<f64>> {
    s.check()?;
    let n = s.dim();
    let ms: Vec<i32> = s.twice_ms().collect();
    let phases: Vec<C64> = ms.iter().map(|&m| C64::from_polar(1.0, -eta * f(m as f64 / 2.0))).collect();
    let mut out = Vec::with_capacity(n);
    for l in 0..=s.twice_s() {
        let lspin = Spin::new(2 * l);
        let mut acc = C64::new(0.0, 0.0);
        for (i, &m) in ms.iter().enumerate() {
            acc += phases[i] * clebsch_gordan_exact(s, m, lspin, 0, s, m)?.to_f64();
        }
        out.push((2 * l + 1) as f64 / n as f64 * acc.norm_sqr());
    }
    Ok(out)
}

/// φ(η) = Σ_i q_i cos(m_i η) with exact rational q_i.
#[derive(Clone, Debug, PartialEq)]
pub struct CosineSeries {
    pub frequencies: Vec<u64>,
    pub coefficients: Vec<BigRational>,
}

#[derive(Serialize, Deserialize)]
struct CosineSeriesJson {
    frequencies: Vec<u64>,
    coefficients: Vec<f64>,
    exact: Vec<String>,
}

impl Serialize for CosineSeries {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        CosineSeriesJson {
            frequencies: self.frequencies.clone(),
            coefficients: self.coefficients_f64(),
            exact: self.coefficients.iter().map(|q| q.to_string()).collect(),
        }
        .serialize(ser)
    }
}

impl CosineSeries {
    pub fn coefficients_f64(&self) -> Vec<f64> {
        self.coefficients.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn eval(&self, eta: f64) -> f64 {
        self.frequencies
            .iter()
            .zip(self.coefficients_f64())
            .map(|(&m, q)| q * (m as f64 * eta).cos())
            .sum()
    }

    /// dφ/dη
    pub fn derivative(&self, eta: f64) -> f64 {
        self.frequencies
            .iter()
            .zip(self.coefficients_f64())
            .map(|(&m, q)| -q * m as f64 * (m as f64 * eta).sin())
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|q| q.is_zero())
    }

    fn scaled_add(&mut self, other: &CosineSeries, k: &BigRational) {
        for (a, b) in self.coefficients.iter_mut().zip(&other.coefficients) {
            *a += k * b;
        }
    }
}

fn rational_to_u64(q: &BigRational) -> Option<u64> {
    if q.is_integer() {
        q.to_integer().to_u64()
    } else {
        None
    }
}

/// Exact cosine series of |V_l(η)|² for V = diag(e^{−iη f(m)}), all on the
/// common set of frequencies |f(m1) − f(m2)|. `f` receives 2m.
pub fn diagonal_v_series(s: Spin, f: impl Fn(i32) -> BigRational) -> Result<Vec<CosineSeries>> {
    s.check()?;
    let n = s.dim();
    let ms: Vec<i32> = s.twice_ms().collect();
    let fs: Vec<BigRational> = ms.iter().map(|&m| f(m)).collect();
    let mut freqs = BTreeMap::new();
    for a in &fs {
        for b in &fs {
            let d = (a - b).abs();
            let Some(k) = rational_to_u64(&d) else {
                return Err(Error::Unsupported(format!(
                    "frequency {d} is not an integer; no exact cosine series"
                )));
            };
            freqs.insert(k, ());
        }
    }
    let frequencies: Vec<u64> = freqs.keys().copied().collect();
    let pos = |k: u64| frequencies.binary_search(&k).unwrap();
    let mut out = Vec::with_capacity(n);
    for l in 0..=s.twice_s() {
        let lspin = Spin::new(2 * l);
        let cg: Vec<_> = ms
            .iter()
            .map(|&m| clebsch_gordan_exact(s, m, lspin, 0, s, m))
            .collect::<Result<_>>()?;
        let pre = BigRational::new(((2 * l + 1) as i64).into(), (n as i64).into());
        let mut coeffs = vec![BigRational::zero(); frequencies.len()];
        for i in 0..n {
            for j in 0..n {
                let prod = cg[i]
                    .mul(&cg[j])
                    .to_rational()
                    .ok_or_else(|| Error::Numerical("CG product is not rational".into()))?;
                let k = rational_to_u64(&(&fs[i] - &fs[j]).abs()).unwrap();
                coeffs[pos(k)] += &pre * prod;
            }
        }
        out.push(CosineSeries {
            frequencies: frequencies.clone(),
            coefficients: coeffs,
        });
    }
    Ok(out)
}

/// φ_0, φ_1, …, φ_⌊s⌋ of F̄ = φ_0 + Σ_t φ_t r_t for V = e^{−iη S_z^k}, with the
/// pure-state constraints eliminating r_{⌊s⌋+1}…r_{2s}.
pub fn k_squeezing_phi(s: Spin, k: u32) -> Result<Vec<CosineSeries>> {
    let vs = diagonal_v_series(s, |two_m| {
        let m = BigRational::new(two_m.into(), 2.into());
        num_traits::pow(m, k as usize)
    })?;
    let form = pure_r_form(s)?;
    let nf = form.free.len();
    let zero = CosineSeries {
        frequencies: vs[0].frequencies.clone(),
        coefficients: vec![BigRational::zero(); vs[0].frequencies.len()],
    };
    let mut out = vec![zero; nf + 1];
    for (l, v) in vs.iter().enumerate() {
        let w = BigRational::new(1.into(), ((2 * l + 1) as i64).into());
        out[0].scaled_add(v, &(&w * &form.offset[l]));
        for j in 0..nf {
            out[j + 1].scaled_add(v, &(&w * &form.coeffs[l][j]));
        }
    }
    Ok(out)
}

/// Squeezing e^{−iη S_z²}.
pub fn squeezing_phi(s: Spin) -> Result<Vec<CosineSeries>> {
    k_squeezing_phi(s, 2)
}

/// F̄ from φ-series at free coordinates `x`.
pub fn phi_fidelity(phi: &[CosineSeries], x: &[f64], eta: f64) -> f64 {
    phi[0].eval(eta) + phi[1..].iter().zip(x).map(|(p, r)| p.eval(eta) * r).sum::<f64>()
}

/// A change of optimal sensor at parameter value `eta` (radians).
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Transition {
    pub eta: f64,
    pub from: String,
    pub to: String,
}

/// Relative tie tolerance for [`fidelity_transitions`].
pub const CANDIDATE_TIE_TOL: f64 = 1e-12;

/// Values of η where the candidate with the lowest averaged fidelity under
/// `family` changes. Candidates whose fidelities tie are joined with '+'.
pub fn fidelity_transitions(
    family: Family,
    candidates: &[(String, AnyState)],
    eta_min: f64,
    eta_max: f64,
    n_scan: usize,
) -> Result<Vec<Transition>> {
    let Some((_, first)) = candidates.first() else {
        return Ok(Vec::new());
    };
    let s = first.spin();
    let rs: Vec<(Vec<f64>, bool)> = candidates
        .iter()
        .map(|(_, st)| {
            if st.spin() != s {
                return Err(Error::Dimension {
                    expected: s.dim(),
                    got: st.spin().dim(),
                });
            }
            Ok((st.r()?, (st.purity() - 1.0).abs() < PURITY_TOL))
        })
        .collect::<Result<_>>()?;
    let values = |eta: f64| -> Result<Vec<f64>> {
        let v = family.shells(s, eta)?;
        rs.iter()
            .map(|(r, pure)| if *pure { Ok(shell_dot(r, &v)) } else { r_metric(s, r, &v) })
            .collect()
    };
    let argmin = |eta: f64| -> Result<Vec<usize>> {
        let v = values(eta)?;
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let scale = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        Ok((0..v.len()).filter(|&i| v[i] <= lo + CANDIDATE_TIE_TOL * scale).collect())
    };
    let label = |idx: &[usize]| idx.iter().map(|&i| candidates[i].0.as_str()).collect::<Vec<_>>().join("+");
    let n_scan = n_scan.max(2);
    let grid: Vec<f64> = (0..=n_scan)
        .map(|i| eta_min + (eta_max - eta_min) * i as f64 / n_scan as f64)
        .collect();
    let mins: Vec<Vec<usize>> = grid.iter().map(|&e| argmin(e)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for k in 0..n_scan {
        if mins[k] == mins[k + 1] || mins[k].len() == candidates.len() || mins[k + 1].len() == candidates.len() {
            continue;
        }
        let (a, b) = (mins[k][0], mins[k + 1][0]);
        let diff = |e: f64| -> Result<f64> {
            let v = values(e)?;
            Ok(v[a] - v[b])
        };
        let (mut lo, mut hi) = (grid[k], grid[k + 1]);
        if diff(lo)? <= 0.0 && diff(hi)? >= 0.0 {
            for _ in 0..200 {
                let m = 0.5 * (lo + hi);
                if m <= lo || m >= hi {
                    break;
                }
                if diff(m)? < 0.0 {
                    lo = m;
                } else {
                    hi = m;
                }
            }
        }
        out.push(Transition {
            eta: 0.5 * (lo + hi),
            from: label(&mins[k]),
            to: label(&mins[k + 1]),
        });
    }
    Ok(out)
}
