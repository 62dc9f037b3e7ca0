//! Polarization tensors, the Hermitian basis, vectorization and the
//! SU(2)-invariant superoperators.
//!
//! Vectorization is row-major, `|A⟩_(ij) = A_ij`, so `|U A V†⟩ = (U ⊗ V̄)|A⟩`
//! with the ordinary Kronecker product.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::linalg::{hermiticity_error, kron, outer};
use crate::wigner::{clebsch_gordan_exact, six_j_exact, Spin};
use crate::{domain, CMat, CVec, Error, Result, C64};

/// Position of (l, m) in the ordering (0,0), (1,1), (1,0), (1,-1), (2,2), ...
pub fn lm_index(l: u32, m: i32) -> usize {
    debug_assert!(m.unsigned_abs() <= l);
    (l * l) as usize + (l as i32 - m) as usize
}

/// All (l, m) labels for spin `s` in [`lm_index`] order.
pub fn lm_labels(s: Spin) -> Vec<(u32, i32)> {
    let mut v = Vec::with_capacity(s.dim() * s.dim());
    for l in 0..=s.twice_s() {
        for m in (-(l as i32)..=l as i32).rev() {
            v.push((l, m));
        }
    }
    v
}

/// The polarization tensor basis T_lm of n×n matrices.
#[derive(Clone, Debug)]
pub struct TBasis {
    pub spin: Spin,
    tensors: Vec<CMat>,
}

impl TBasis {
    pub fn get(&self, l: u32, m: i32) -> &CMat {
        &self.tensors[lm_index(l, m)]
    }

    pub fn tensors(&self) -> &[CMat] {
        &self.tensors
    }

    /// A_lm = Tr(A T_lm†) in [`lm_index`] order.
    pub fn components(&self, a: &CMat) -> Vec<C64> {
        self.tensors
            .iter()
            .map(|t| t.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum())
            .collect()
    }

    /// Σ A_lm T_lm
    pub fn reconstruct(&self, comps: &[C64]) -> CMat {
        let n = self.spin.dim();
        let mut a = CMat::zeros(n, n);
        for (c, t) in comps.iter().zip(&self.tensors) {
            a += t * *c;
        }
        a
    }

    /// The l-part Σ_m A_lm T_lm.
    pub fn l_part(&self, a: &CMat, l: u32) -> CMat {
        let n = self.spin.dim();
        let mut out = CMat::zeros(n, n);
        for m in -(l as i32)..=l as i32 {
            let t = self.get(l, m);
            let c: C64 = t.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
            out += t * c;
        }
        out
    }

    /// Shell weights Σ_m |A_lm|² for l = 0..2s.
    pub fn shell_weights(&self, a: &CMat) -> Vec<f64> {
        let comps = self.components(a);
        (0..=self.spin.twice_s())
            .map(|l| {
                (-(l as i32)..=l as i32)
                    .map(|m| comps[lm_index(l, m)].norm_sqr())
                    .sum()
            })
            .collect()
    }
}

/// (T_lm)_{m1 m2} = sqrt((2l+1)/(2s+1)) ⟨s m2; l m|s m1⟩.
pub fn build_t_basis(s: Spin) -> Result<TBasis> {
    s.check()?;
    let n = s.dim();
    let ms: Vec<i32> = s.twice_ms().collect();
    let mut tensors = Vec::with_capacity(n * n);
    for (l, m) in lm_labels(s) {
        let lspin = Spin::new(2 * l);
        let pre = ((2 * l + 1) as f64 / n as f64).sqrt();
        let mut t = CMat::zeros(n, n);
        for (i, &m1) in ms.iter().enumerate() {
            let m2 = m1 - 2 * m;
            if let Some(j) = s.index_of(m2) {
                let c = clebsch_gordan_exact(s, m2, lspin, 2 * m, s, m1)?;
                t[(i, j)] = C64::from(pre * c.to_f64());
            }
        }
        tensors.push(t);
    }
    Ok(TBasis { spin: s, tensors })
}

/// Shared, lazily built T-basis for `s`.
pub fn t_basis(s: Spin) -> Result<Arc<TBasis>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<TBasis>>>> = OnceLock::new();
    s.check()?;
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&s.twice_s()) {
        return Ok(t.clone());
    }
    let t = Arc::new(build_t_basis(s)?);
    cache.lock().unwrap().insert(s.twice_s(), t.clone());
    Ok(t)
}

/// Shared, lazily built λ-matrix for `s`.
pub fn lambda(s: Spin) -> Result<Arc<LambdaMatrix>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<LambdaMatrix>>>> = OnceLock::new();
    s.check()?;
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&s.twice_s()) {
        return Ok(t.clone());
    }
    let t = Arc::new(lambda_matrix(s)?);
    cache.lock().unwrap().insert(s.twice_s(), t.clone());
    Ok(t)
}

/// Hermitian basis H_lm, orthonormal for g(X,Y) = Tr(XY)/2.
#[derive(Clone, Debug)]
pub struct HBasis {
    pub spin: Spin,
    matrices: Vec<CMat>,
}

impl HBasis {
    pub fn get(&self, l: u32, m: i32) -> &CMat {
        &self.matrices[lm_index(l, m)]
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.matrices
    }
}

pub fn build_h_basis(t: &TBasis) -> HBasis {
    let s = t.spin;
    let mut matrices = Vec::with_capacity(s.dim() * s.dim());
    for (l, m) in lm_labels(s) {
        let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let h = match m.signum() {
            1 => t.get(l, m) + t.get(l, -m) * C64::from(sign),
            -1 => (t.get(l, m) - t.get(l, -m) * C64::from(sign)) * C64::new(0.0, -1.0),
            _ => t.get(l, 0) * C64::from(2f64.sqrt()),
        };
        matrices.push(h);
    }
    HBasis { spin: s, matrices }
}

/// Row-major flattening |A⟩.
pub fn vectorize(a: &CMat) -> CVec {
    let (r, c) = a.shape();
    CVec::from_fn(r * c, |k, _| a[(k / c, k % c)])
}

/// Inverse of [`vectorize`] for an r×r matrix.
pub fn devectorize(v: &CVec, r: usize) -> Result<CMat> {
    if v.len() != r * r {
        return Err(Error::Dimension {
            expected: r * r,
            got: v.len(),
        });
    }
    Ok(CMat::from_fn(r, r, |i, j| v[i * r + j]))
}

fn check_state_matrix(rho: &CMat) -> Result<()> {
    if !rho.is_square() {
        return domain("density matrix must be square");
    }
    let err = hermiticity_error(rho);
    if err > 1e-10 * (1.0 + rho.norm()) {
        return domain(format!("matrix is not Hermitian (error {err:.3e})"));
    }
    Ok(())
}

/// ad_ρ = ρ ⊗ I − I ⊗ ρᵀ, so that ad_ρ|X⟩ = |[ρ, X]⟩.
pub fn ad_rho(rho: &CMat) -> Result<CMat> {
    check_state_matrix(rho)?;
    Ok(ad_unchecked(rho))
}

pub(crate) fn ad_unchecked(a: &CMat) -> CMat {
    let n = a.nrows();
    let id = CMat::identity(n, n);
    kron(a, &id) - kron(&id, &a.transpose())
}

/// Π_ρ = ad_ρ², the tangent projector for pure ρ.
pub fn pi_rho(rho: &CMat) -> Result<CMat> {
    let ad = ad_rho(rho)?;
    Ok(&ad * &ad)
}

/// 𝔽_ωρ = e^{−iω ad_ρ} ad_ρ for a pure state ρ.
pub fn f_omega(rho: &CMat, omega: f64) -> Result<CMat> {
    check_state_matrix(rho)?;
    let purity = (rho * rho).trace().re;
    if (purity - 1.0).abs() > 1e-10 {
        return domain(format!("f_omega needs a pure state, Tr ρ² = {purity}"));
    }
    let n = rho.nrows();
    let id = CMat::identity(n, n);
    let v = vectorize(rho);
    Ok(kron(rho, &id) * C64::from_polar(1.0, -omega) - kron(&id, &rho.transpose()) * C64::from_polar(1.0, omega)
        + (&v * v.adjoint()) * C64::new(0.0, 2.0 * omega.sin()))
}

/// The eigenvalue matrix λ_{ll'} of the invariant operators 𝕋_l.
#[derive(Clone, Debug)]
pub struct LambdaMatrix {
    pub spin: Spin,
    pub entries: DMatrix<f64>,
    exact: Vec<Vec<BigRational>>,
}

impl LambdaMatrix {
    pub fn exact(&self) -> &[Vec<BigRational>] {
        &self.exact
    }

    /// λ̃ = A λ A⁻¹ with A = diag(1/√(2l+1)); symmetric with λ̃² = I.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let d = self.entries.nrows();
        DMatrix::from_fn(d, d, |l, lp| {
            self.entries[(l, lp)] * ((2 * lp + 1) as f64 / (2 * l + 1) as f64).sqrt()
        })
    }

    /// (I ± λ̃)/2, projectors onto the ±1 eigenspaces of λ̃.
    pub fn eigen_projectors(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let lt = self.symmetrized();
        let id = DMatrix::<f64>::identity(lt.nrows(), lt.ncols());
        ((&id + &lt) * 0.5, (&id - &lt) * 0.5)
    }
}

/// λ_{ll'} = (−1)^{2s+l+l'} (2l+1) {s s l; s s l'}, exact.
pub fn lambda_matrix_exact(s: Spin) -> Vec<Vec<BigRational>> {
    let d = s.dim();
    let mut out = vec![vec![BigRational::zero(); d]; d];
    for l in 0..d {
        for lp in 0..d {
            let sj = six_j_exact([
                s,
                s,
                Spin::new(2 * l as u32),
                s,
                s,
                Spin::new(2 * lp as u32),
            ]);
            let v = sj
                .to_rational()
                .expect("{s s l; s s l'} is rational");
            let sign = if (s.twice_s() as usize + l + lp) % 2 == 0 {
                BigRational::one()
            } else {
                -BigRational::one()
            };
            out[l][lp] = sign * BigRational::from_integer((2 * l + 1).into()) * v;
        }
    }
    out
}

pub fn lambda_matrix(s: Spin) -> Result<LambdaMatrix> {
    s.check()?;
    let exact = lambda_matrix_exact(s);
    let d = s.dim();
    let entries = DMatrix::from_fn(d, d, |i, j| exact[i][j].to_f64().unwrap_or(f64::NAN));
    Ok(LambdaMatrix {
        spin: s,
        entries,
        exact,
    })
}

/// Affine map from free coordinates x to a full r-vector: component l is
/// `offset[l] + Σ_j coeffs[l][j] x_j`, where x_j = r_{free[j]}.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineRForm {
    pub spin: Spin,
    pub free: Vec<usize>,
    pub offset: Vec<BigRational>,
    pub coeffs: Vec<Vec<BigRational>>,
}

impl AffineRForm {
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.offset
            .iter()
            .zip(&self.coeffs)
            .map(|(o, c)| {
                o.to_f64().unwrap_or(f64::NAN)
                    + c.iter().zip(x).map(|(a, b)| a.to_f64().unwrap_or(f64::NAN) * b).sum::<f64>()
            })
            .collect()
    }
}

/// Pure states: free coordinates r_1..r_⌊s⌋, the rest fixed by λr = r and
/// r_0 = 1/(2s+1).
pub fn pure_r_form(s: Spin) -> Result<AffineRForm> {
    s.check()?;
    let lam = lambda(s)?;
    let ex = lam.exact();
    let d = s.dim();
    let k = s.floor() as usize;
    let free: Vec<usize> = (1..=k).collect();
    let dep: Vec<usize> = (k + 1..d).collect();
    let r0 = BigRational::new(1.into(), (d as i64).into());
    // rows of (λ − I) r = 0 with r_0 and the free coordinates moved right;
    // each right-hand side is [const, x_1..x_k]
    let mut rows: Vec<(Vec<BigRational>, Vec<BigRational>)> = Vec::with_capacity(d);
    for l in 0..d {
        let a = |c: usize| {
            let mut v = ex[l][c].clone();
            if c == l {
                v -= BigRational::one();
            }
            v
        };
        let lhs: Vec<BigRational> = dep.iter().map(|&c| a(c)).collect();
        let mut rhs = vec![-a(0) * &r0];
        rhs.extend(free.iter().map(|&c| -a(c)));
        rows.push((lhs, rhs));
    }
    let nd = dep.len();
    let mut pivot_row = 0;
    for col in 0..nd {
        let Some(p) = (pivot_row..rows.len()).find(|&i| !rows[i].0[col].is_zero()) else {
            return Err(Error::Numerical(format!(
                "r_1..r_{k} are not independent coordinates for s = {s}"
            )));
        };
        rows.swap(pivot_row, p);
        let piv = rows[pivot_row].0[col].clone();
        let (lrow, rrow) = &mut rows[pivot_row];
        for v in lrow.iter_mut().chain(rrow.iter_mut()) {
            *v /= &piv;
        }
        let (lp, rp) = rows[pivot_row].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == pivot_row || row.0[col].is_zero() {
                continue;
            }
            let f = row.0[col].clone();
            for (v, w) in row.0.iter_mut().zip(&lp) {
                *v -= &f * w;
            }
            for (v, w) in row.1.iter_mut().zip(&rp) {
                *v -= &f * w;
            }
        }
        pivot_row += 1;
    }
    if rows[nd..].iter().any(|(_, r)| r.iter().any(|v| !v.is_zero())) {
        return Err(Error::Numerical("inconsistent λr = r system".into()));
    }
    let mut offset = vec![BigRational::zero(); d];
    let mut coeffs = vec![vec![BigRational::zero(); k]; d];
    offset[0] = r0;
    for (j, &l) in free.iter().enumerate() {
        coeffs[l][j] = BigRational::one();
    }
    for (i, &l) in dep.iter().enumerate() {
        offset[l] = rows[i].1[0].clone();
        coeffs[l] = rows[i].1[1..].to_vec();
    }
    Ok(AffineRForm {
        spin: s,
        free,
        offset,
        coeffs,
    })
}

/// Largest n⁴ for which the Λ projector is materialized.
pub const MAX_LAMBDA_DIM: usize = 2401;

/// The invariant superoperators 𝕋_l and the shell projectors 𝐓_l.
#[derive(Clone, Debug)]
pub struct InvariantOperators {
    pub spin: Spin,
    pub tbb: Vec<CMat>,
    pub tbf: Vec<CMat>,
}

pub fn build_invariant_ops(s: Spin) -> Result<InvariantOperators> {
    let t = build_t_basis(s)?;
    Ok(invariant_ops_from(&t))
}

pub fn invariant_ops_from(t: &TBasis) -> InvariantOperators {
    let s = t.spin;
    let n2 = s.dim() * s.dim();
    let mut tbb = Vec::new();
    let mut tbf = Vec::new();
    for l in 0..=s.twice_s() {
        let mut a = CMat::zeros(n2, n2);
        let mut b = CMat::zeros(n2, n2);
        for m in -(l as i32)..=l as i32 {
            let tl = t.get(l, m);
            a += kron(tl, &tl.map(|z| z.conj()));
            b += outer(&vectorize(tl));
        }
        tbb.push(a);
        tbf.push(b);
    }
    InvariantOperators { spin: s, tbb, tbf }
}

impl InvariantOperators {
    /// Λ = Σ_l |𝕋_l⟩⟨𝕋_l|/(2l+1), an n⁴×n⁴ matrix acting on vectorized
    /// n²×n² operators.
    pub fn lambda_projector(&self) -> Result<CMat> {
        let n2 = self.spin.dim() * self.spin.dim();
        let n4 = n2 * n2;
        if n4 > MAX_LAMBDA_DIM {
            return Err(Error::Unsupported(format!(
                "Λ projector of size {n4} exceeds {MAX_LAMBDA_DIM}"
            )));
        }
        let mut out = CMat::zeros(n4, n4);
        for (l, t) in self.tbb.iter().enumerate() {
            let v = vectorize(t);
            out += outer(&v) * C64::from(1.0 / (2 * l + 1) as f64);
        }
        Ok(out)
    }
}
