//! Majorana constellations: roots of the Majorana polynomial mapped to the
//! sphere by inverse stereographic projection, ζ = tan(θ/2) e^{iφ}.

use nalgebra::linalg::Schur;
use serde::{Deserialize, Serialize};

use super::{DensityLike, PureState};
use crate::{domain, CMat, Error, Result, C64};

/// Roots beyond this modulus are treated as the point at infinity (θ = π).
pub const INFINITY_MODULUS: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Star {
    pub theta: f64,
    pub phi: f64,
}

impl Star {
    pub fn from_root(z: C64) -> Star {
        let m = z.norm();
        if !m.is_finite() || m > INFINITY_MODULUS {
            return Star {
                theta: std::f64::consts::PI,
                phi: 0.0,
            };
        }
        let phi = if m == 0.0 { 0.0 } else { z.arg().rem_euclid(std::f64::consts::TAU) };
        Star {
            theta: 2.0 * m.atan(),
            phi,
        }
    }

    pub fn unit(&self) -> [f64; 3] {
        let st = self.theta.sin();
        [st * self.phi.cos(), st * self.phi.sin(), self.theta.cos()]
    }

    pub fn from_unit(v: [f64; 3]) -> Star {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let (x, y, z) = (v[0] / norm, v[1] / norm, v[2] / norm);
        let rho = x.hypot(y);
        let theta = rho.atan2(z);
        let phi = if rho == 0.0 { 0.0 } else { y.atan2(x).rem_euclid(std::f64::consts::TAU) };
        Star { theta, phi }
    }

    /// Great-circle distance to another star.
    pub fn distance(&self, other: &Star) -> f64 {
        let a = self.unit();
        let b = other.unit();
        let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        let c = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
        let d = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        c.atan2(d)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    pub stars: Vec<Star>,
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients of p(z) in increasing powers of z.
fn majorana_coefficients(psi: &PureState) -> Vec<C64> {
    let ts = psi.spin().twice_s() as usize;
    let a = psi.amplitudes();
    let mut c = vec![C64::new(0.0, 0.0); ts + 1];
    for i in 0..=ts {
        // amplitude of m = s − i multiplies z^{s+m} = z^{2s−i}
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        c[ts - i] = a[i] * (sign * binomial(ts as u64, i as u64).sqrt());
    }
    c
}

fn horner(c: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

/// Scales rows/columns of a matrix by powers of two to equalize norms.
fn balance(m: &mut CMat) {
    let n = m.nrows();
    let radix: f64 = 2.0;
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut rr = r;
            while cc < rr / radix {
                cc *= radix;
                rr /= radix;
                f *= radix;
            }
            while cc >= rr * radix {
                cc /= radix;
                rr *= radix;
                f /= radix;
            }
            if (cc + rr) < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Roots of Σ c_k z^k with nonzero leading and constant coefficients.
fn polynomial_roots(c: &[C64]) -> Result<Vec<C64>> {
    let deg = c.len() - 1;
    if deg == 0 {
        return Ok(vec![]);
    }
    let lead = c[deg];
    if deg == 1 {
        return Ok(vec![-c[0] / lead]);
    }
    let mut comp = CMat::zeros(deg, deg);
    for j in 0..deg {
        comp[(0, j)] = -c[deg - 1 - j] / lead;
    }
    for i in 1..deg {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    balance(&mut comp);
    let schur = Schur::try_new(comp, 1e-15, 10_000)
        .ok_or_else(|| Error::Numerical("companion Schur decomposition did not converge".into()))?;
    let t = schur.unpack().1;
    let mut roots: Vec<C64> = (0..deg).map(|i| t[(i, i)]).collect();
    for z in roots.iter_mut() {
        // a few guarded Newton steps; a step is kept only if |p| shrinks
        for _ in 0..3 {
            let (p, dp) = horner(c, *z);
            if dp.norm() == 0.0 || p.norm() == 0.0 {
                break;
            }
            let cand = *z - p / dp;
            if horner(c, cand).0.norm() < p.norm() {
                *z = cand;
            } else {
                break;
            }
        }
    }
    Ok(roots)
}

/// The 2s stars of ψ; a degree deficit d contributes d stars at θ = π.
pub fn majorana_constellation(psi: &PureState) -> Result<Constellation> {
    let c = majorana_coefficients(psi);
    let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return domain("zero Majorana polynomial");
    }
    let tol = 1e-14 * scale;
    let ts = c.len() - 1;
    let deg = (0..=ts).rev().find(|&k| c[k].norm() > tol).unwrap();
    let low = (0..=ts).find(|&k| c[k].norm() > tol).unwrap();
    let mut stars = Vec::with_capacity(ts);
    for _ in 0..low {
        stars.push(Star { theta: 0.0, phi: 0.0 });
    }
    for z in polynomial_roots(&c[low..=deg])? {
        stars.push(Star::from_root(z));
    }
    for _ in deg..ts {
        stars.push(Star {
            theta: std::f64::consts::PI,
            phi: 0.0,
        });
    }
    Ok(Constellation { stars })
}

fn apply3(r: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2])
}

/// Rigid rotation of all stars by the SO(3) matrix `r`.
pub fn rotate_constellation(c: &Constellation, r: &[[f64; 3]; 3]) -> Constellation {
    Constellation {
        stars: c.stars.iter().map(|s| Star::from_unit(apply3(r, s.unit()))).collect(),
    }
}

/// Star motion under the boost e^{−η n̂·S}: in a frame where n̂ is the north
/// pole each root scales as ζ → e^η ζ.
pub fn majorana_boost(c: &Constellation, eta: f64, axis: [f64; 3]) -> Result<Constellation> {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if !(norm > 0.0) {
        return domain("boost axis must be nonzero");
    }
    let n = axis.map(|x| x / norm);
    let stars = c
        .stars
        .iter()
        .map(|s| {
            let v = s.unit();
            let cz = (v[0] * n[0] + v[1] * n[1] + v[2] * n[2]).clamp(-1.0, 1.0);
            let perp = [v[0] - cz * n[0], v[1] - cz * n[1], v[2] - cz * n[2]];
            let pn = (perp[0] * perp[0] + perp[1] * perp[1] + perp[2] * perp[2]).sqrt();
            if pn < 1e-300 {
                return *s;
            }
            let u = perp.map(|x| x / pn);
            let theta = pn.atan2(cz);
            let theta2 = 2.0 * (eta.exp() * (theta / 2.0).tan()).atan();
            let (st, ct) = theta2.sin_cos();
            Star::from_unit([0, 1, 2].map(|i| ct * n[i] + st * u[i]))
        })
        .collect();
    Ok(Constellation { stars })
}

/// Minimum-cost assignment (Hungarian algorithm) for a square cost matrix.
fn assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    out
}

/// Largest great-circle distance in the optimal pairing of two constellations.
pub fn match_constellations(a: &Constellation, b: &Constellation) -> Result<f64> {
    if a.stars.len() != b.stars.len() {
        return Err(Error::Dimension {
            expected: a.stars.len(),
            got: b.stars.len(),
        });
    }
    if a.stars.is_empty() {
        return Ok(0.0);
    }
    let cost: Vec<Vec<f64>> = a
        .stars
        .iter()
        .map(|x| b.stars.iter().map(|y| x.distance(y)).collect())
        .collect();
    let pairing = assignment(&cost);
    Ok(pairing
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .fold(0.0, f64::max))
}
