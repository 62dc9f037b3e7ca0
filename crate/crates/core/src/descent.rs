//! Gradient flows of cumulative coherences on pure states, and t-boosts.

use crate::linalg::{hermitian_exp, hermitian_part, trace_prod};
use crate::states::{r_vector, DensityLike, MixedState, PureState};
use crate::tensorbasis::{t_basis, TBasis};
use crate::{domain, CMat, CVec, Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DescentConfig {
    pub t: u32,
    pub step: f64,
    pub tol: f64,
    pub max_steps: usize,
    pub direction: Direction,
    /// keep every k-th accepted state in the trace
    pub sample_every: usize,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig {
            t: 1,
            step: 0.5,
            tol: 1e-10,
            max_steps: 20_000,
            direction: Direction::Forward,
            sample_every: 10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TraceSample {
    pub step: usize,
    pub coherence: f64,
    pub state: PureState,
}

#[derive(Clone, Debug)]
pub struct DescentTrace {
    pub samples: Vec<TraceSample>,
    /// objective after each accepted step, starting with the initial value
    pub coherence: Vec<f64>,
    pub grad_norm: f64,
    pub converged: bool,
    pub steps: usize,
}

impl DescentTrace {
    pub fn final_state(&self) -> &PureState {
        &self.samples.last().expect("trace holds the initial state").state
    }

    pub fn final_coherence(&self) -> f64 {
        *self.coherence.last().unwrap()
    }
}

/// ρ^(l) = Σ_m ρ_lm T_lm
pub fn l_part(rho: &impl DensityLike, l: u32) -> Result<CMat> {
    let s = rho.spin();
    if l > s.twice_s() {
        return domain(format!("l = {l} exceeds 2s = {}", s.twice_s()));
    }
    Ok(t_basis(s)?.l_part(&rho.density(), l))
}

/// ρ^(t̂) = Σ_{l=1}^t ρ^(l)
pub fn cumulative_part(rho: &impl DensityLike, t: u32) -> Result<CMat> {
    let s = rho.spin();
    let n = s.dim();
    let mut out = CMat::zeros(n, n);
    for l in 1..=t {
        out += l_part(rho, l)?;
    }
    Ok(out)
}

/// X∥ = ρX + Xρ − 2 Tr(ρX) ρ, the tangent part at a pure state.
pub fn tangent_part(rho: &CMat, x: &CMat) -> CMat {
    let e = trace_prod(rho, x);
    rho * x + x * rho - rho * (e * 2.0)
}

fn require_pure(rho: &impl DensityLike) -> Result<()> {
    let p = rho.purity();
    if (p - 1.0).abs() > 1e-10 {
        return domain(format!("state is not pure (Tr ρ² = {p})"));
    }
    Ok(())
}

/// grad C_t̂ = 4 ρ^(t̂)∥ with respect to g(X, Y) = Tr(XY)/2.
pub fn gradient_c(rho: &impl DensityLike, t: u32) -> Result<CMat> {
    require_pure(rho)?;
    check_t(rho.spin().twice_s(), t)?;
    let r = rho.density();
    Ok(tangent_part(&r, &cumulative_part(rho, t)?) * C64::from(4.0))
}

fn check_t(two_s: u32, t: u32) -> Result<()> {
    if t == 0 || t > two_s {
        return domain(format!("t must lie in 1..={two_s}, got {t}"));
    }
    Ok(())
}

/// Nonzero entries of w_l T_lm for the weighted shells. Each T_lm has a
/// single nonzero diagonal, so W ψ and f(ψ) cost O(n) per component.
struct WeightedShells {
    comps: Vec<Vec<(usize, usize, C64)>>,
    weight: Vec<f64>,
}

impl WeightedShells {
    fn new(t: &TBasis, w: &[f64]) -> WeightedShells {
        let mut comps = Vec::new();
        let mut weight = Vec::new();
        for (l, &wl) in w.iter().enumerate() {
            if wl == 0.0 {
                continue;
            }
            let l = l as u32;
            for m in -(l as i32)..=l as i32 {
                let tl = t.get(l, m);
                let mut nz = Vec::new();
                for j in 0..tl.ncols() {
                    for i in 0..tl.nrows() {
                        if tl[(i, j)].norm() > 0.0 {
                            nz.push((i, j, tl[(i, j)]));
                        }
                    }
                }
                comps.push(nz);
                weight.push(wl);
            }
        }
        WeightedShells { comps, weight }
    }

    /// ⟨ψ|T_lm†|ψ⟩ = Σ conj(T_ij) ψ_i conj(ψ_j)
    fn component(nz: &[(usize, usize, C64)], psi: &CVec) -> C64 {
        nz.iter().map(|&(i, j, v)| v.conj() * psi[i] * psi[j].conj()).sum()
    }

    fn value(&self, psi: &CVec) -> f64 {
        self.comps
            .iter()
            .zip(&self.weight)
            .map(|(nz, w)| w * Self::component(nz, psi).norm_sqr())
            .sum()
    }

    /// W ψ with W = Σ_l w_l ψ^(l)
    fn apply(&self, psi: &CVec) -> CVec {
        let mut out = CVec::zeros(psi.len());
        for (nz, &w) in self.comps.iter().zip(&self.weight) {
            let c = Self::component(nz, psi) * w;
            for &(i, j, v) in nz {
                out[i] += c * v * psi[j];
            }
        }
        out
    }
}

/// −(I − ρ) W ψ
fn velocity(ws: &WeightedShells, psi: &CVec) -> CVec {
    let wpsi = ws.apply(psi);
    let e = C64::from(psi.dotc(&wpsi).re);
    -(wpsi - psi * e)
}

fn normalized(v: CVec) -> CVec {
    let n = v.norm();
    v / C64::from(n)
}

fn rk4(ws: &WeightedShells, psi: &CVec, h: f64) -> CVec {
    let hc = C64::from(h);
    let half = C64::from(0.5 * h);
    let k1 = velocity(ws, psi);
    let y2 = normalized(psi + &k1 * half);
    let k2 = velocity(ws, &y2);
    let y3 = normalized(psi + &k2 * half);
    let k3 = velocity(ws, &y3);
    let y4 = normalized(psi + &k3 * hc);
    let k4 = velocity(ws, &y4);
    normalized(psi + (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * (hc / 6.0))
}

/// Gradient flow of f(ψ) = Σ_l w_l r_l(ψ), decreasing f.
///
/// Steps are RK4 with renormalization after each stage; a step that raises f
/// is retried at half size, accepted steps grow the step by 1.25. The
/// reported gradient norm is ‖grad f‖ = 4‖(I − ρ)Wψ‖.
pub fn descend_weighted(psi0: &PureState, weights: &[f64], cfg: &DescentConfig) -> Result<DescentTrace> {
    let s = psi0.spin();
    if weights.len() != s.dim() {
        return Err(Error::Dimension {
            expected: s.dim(),
            got: weights.len(),
        });
    }
    if !(cfg.step > 0.0) || !(cfg.tol > 0.0) {
        return domain("step and tol must be positive");
    }
    let tb = t_basis(s)?;
    let ws = WeightedShells::new(&tb, weights);
    let sample_every = cfg.sample_every.max(1);
    let max_step = cfg.step * 64.0;
    let mut psi = psi0.amplitudes().clone();
    let mut f = ws.value(&psi);
    let mut h = cfg.step;
    let mut coherence = vec![f];
    let mut samples = vec![TraceSample {
        step: 0,
        coherence: f,
        state: psi0.clone(),
    }];
    let mut grad = 4.0 * velocity(&ws, &psi).norm();
    let mut steps = 0;
    let mut converged = grad < cfg.tol;
    while !converged && steps < cfg.max_steps {
        let cand = rk4(&ws, &psi, h);
        let fc = ws.value(&cand);
        if fc > f + 1e-15 * f.abs().max(1e-300) {
            h *= 0.5;
            if h < 1e-14 * cfg.step {
                break;
            }
            continue;
        }
        psi = cand;
        f = fc;
        steps += 1;
        h = (h * 1.25).min(max_step);
        coherence.push(f);
        grad = 4.0 * velocity(&ws, &psi).norm();
        converged = grad < cfg.tol;
        if steps % sample_every == 0 || converged {
            samples.push(TraceSample {
                step: steps,
                coherence: f,
                state: PureState::new(s, psi.clone())?,
            });
        }
    }
    if samples.last().unwrap().step != steps {
        samples.push(TraceSample {
            step: steps,
            coherence: f,
            state: PureState::new(s, psi)?,
        });
    }
    Ok(DescentTrace {
        samples,
        coherence,
        grad_norm: grad,
        converged,
        steps,
    })
}

/// C_t̂ descent (forward) or ascent (backward) from ψ0.
///
/// In the backward direction the trace records C_t̂ itself, which then
/// increases along the run.
pub fn descend(psi0: &PureState, cfg: &DescentConfig) -> Result<DescentTrace> {
    let s = psi0.spin();
    check_t(s.twice_s(), cfg.t)?;
    let sign = match cfg.direction {
        Direction::Forward => 1.0,
        Direction::Backward => -1.0,
    };
    let w: Vec<f64> = (0..s.dim())
        .map(|l| if l >= 1 && l as u32 <= cfg.t { sign } else { 0.0 })
        .collect();
    let mut trace = descend_weighted(psi0, &w, cfg)?;
    if sign < 0.0 {
        for c in trace.coherence.iter_mut() {
            *c = -*c;
        }
        for smp in trace.samples.iter_mut() {
            smp.coherence = -smp.coherence;
        }
    }
    Ok(trace)
}

fn check_shell_support(h: &CMat, s: crate::wigner::Spin, t: u32) -> Result<()> {
    if h.nrows() != s.dim() || h.ncols() != s.dim() {
        return Err(Error::Dimension {
            expected: s.dim(),
            got: h.nrows(),
        });
    }
    check_t(s.twice_s(), t)?;
    let tb = t_basis(s)?;
    let mut proj = CMat::zeros(s.dim(), s.dim());
    for l in 1..=t {
        proj += tb.l_part(h, l);
    }
    let residual = (h - proj).norm();
    if residual > 1e-10 * (1.0 + h.norm()) {
        return domain(format!("generator has weight {residual:.3e} outside shells 1..={t}"));
    }
    if (h - h.adjoint()).norm() > 1e-12 * (1.0 + h.norm()) {
        return domain("generator must be Hermitian");
    }
    Ok(())
}

/// ψ ↦ e^{−μH}ψ/‖e^{−μH}ψ‖ for Hermitian H on shells 1..t.
pub fn t_boost(psi: &PureState, h: &CMat, t: u32, mu: f64) -> Result<PureState> {
    check_shell_support(h, psi.spin(), t)?;
    PureState::new(psi.spin(), hermitian_exp(h, -mu) * psi.amplitudes())
}

/// ρ ↦ BρB/Tr(ρB²) with B = e^{−μH}.
pub fn t_boost_mixed(rho: &MixedState, h: &CMat, t: u32, mu: f64) -> Result<MixedState> {
    check_shell_support(h, rho.spin(), t)?;
    let b = hermitian_exp(h, -mu);
    let m = &b * rho.matrix() * &b;
    let tr = m.trace();
    MixedState::new(rho.spin(), hermitian_part(&(m / tr)))
}

/// r-vector of every sample in a trace.
pub fn trace_r_vectors(trace: &DescentTrace) -> Result<Vec<Vec<f64>>> {
    trace.samples.iter().map(|s| Ok(r_vector(&s.state)?.r)).collect()
}
