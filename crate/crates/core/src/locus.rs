//! The invariant locus: attainable r-vectors in free coordinates, the
//! standard r̃-frame, transformation curves and critical angles.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::descent::{descend_weighted, DescentConfig, Direction};
use crate::linalg::{hermitian_fn, hermitian_part, trace_prod};
use crate::metrology::{Family, Transition};
use crate::states::{
    named_state, r_vector, random_mixed_with, random_pure_with, seeded_rng, AnyState, DensityLike, MixedState,
    NamedState,
};
use crate::tensorbasis::{lambda, pure_r_form, t_basis, AffineRForm};
use crate::wigner::Spin;
use crate::{CMat, Error, Result, C64};

/// Relative tolerance under which two objective values count as a tie.
pub const TIE_TOL: f64 = 1e-9;
/// Chord deviation above which a boundary run between vertices is curved.
pub const CURVED_TOL: f64 = 1e-3;
/// Boundary points this close (free coords) to a named vertex carry its name.
pub const LABEL_TOL: f64 = 1e-4;

const CONTINUOUS: &str = "continuous";

/// Free coordinates and affine map to the full r-vector.
///
/// Pure states use the λr = r elimination; mixed states keep r_1..r_2s free
/// with r_0 = 1/(2s+1), and Σ_l r_l = Tr ρ² then fixes nothing further.
pub fn constrained_r_form(s: Spin, mixed: bool) -> Result<AffineRForm> {
    if !mixed {
        return pure_r_form(s);
    }
    s.check()?;
    let n = s.dim();
    let k = n - 1;
    let mut offset = vec![BigRational::zero(); n];
    offset[0] = BigRational::new(1.into(), (n as i64).into());
    let coeffs = (0..n)
        .map(|l| {
            (0..k)
                .map(|j| if l == j + 1 { BigRational::one() } else { BigRational::zero() })
                .collect()
        })
        .collect();
    Ok(AffineRForm {
        spin: s,
        free: (1..n).collect(),
        offset,
        coeffs,
    })
}

#[derive(Clone, Debug)]
pub struct LocusPoint {
    pub coords: Vec<f64>,
    pub state: AnyState,
}

#[derive(Clone, Debug, Serialize)]
pub struct Vertex {
    pub name: String,
    /// free coordinates of the named state
    pub exact: Vec<f64>,
    /// nearest boundary point after refinement
    pub coords: Vec<f64>,
    pub distance: f64,
}

/// r_2 ≈ a + b r_1 + c r_1² over one curved boundary run.
#[derive(Clone, Debug, Serialize)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub rms: f64,
    pub max_abs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundarySegment {
    pub from: String,
    pub to: String,
    pub curved: bool,
    pub max_deviation: f64,
    pub n_points: usize,
    pub fit: Option<QuadraticFit>,
}

#[derive(Clone, Debug)]
pub struct LocusModel {
    pub spin: Spin,
    pub mixed: bool,
    pub free_coords: Vec<usize>,
    pub affine_map: AffineRForm,
    pub samples: Vec<LocusPoint>,
    /// indices into `samples`, counter-clockwise for two free coordinates
    pub boundary: Vec<usize>,
    pub boundary_labels: Vec<String>,
    pub vertices: Vec<Vertex>,
    pub segments: Vec<BoundarySegment>,
}

impl LocusModel {
    pub fn boundary_coords(&self) -> Vec<Vec<f64>> {
        self.boundary.iter().map(|&i| self.samples[i].coords.clone()).collect()
    }

    pub fn full_r(&self, coords: &[f64]) -> Vec<f64> {
        self.affine_map.eval(coords)
    }

    pub fn vertex(&self, name: &str) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.name == name)
    }

    /// Largest |λr − r| over all samples (pure) or |Σr − Tr ρ²| (mixed).
    pub fn constraint_residual(&self) -> Result<f64> {
        let lam = lambda(self.spin)?;
        let mut worst: f64 = 0.0;
        for p in &self.samples {
            let r = p.state.r()?;
            let res = if self.mixed {
                (r.iter().sum::<f64>() - p.state.purity()).abs()
            } else {
                let rv = DVector::from_vec(r.clone());
                let lr = &lam.entries * &rv;
                let aff = self.affine_map.eval(&p.coords);
                let fit = r.iter().zip(&aff).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                (lr - rv).amax().max(fit)
            };
            worst = worst.max(res);
        }
        Ok(worst)
    }

    pub fn export(&self, table: Option<&CriticalAngleTable>) -> LocusExport {
        LocusExport {
            twice_s: self.spin.twice_s(),
            mixed: self.mixed,
            free_coords: self.free_coords.clone(),
            vertices: self
                .vertices
                .iter()
                .map(|v| NamedPoint {
                    name: v.name.clone(),
                    coords: v.coords.clone(),
                })
                .collect(),
            boundary: self.boundary_coords(),
            segments: self.segments.clone(),
            critical_angles: table.map(|t| t.rows.clone()).unwrap_or_default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedPoint {
    pub name: String,
    pub coords: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocusExport {
    pub twice_s: u32,
    pub mixed: bool,
    pub free_coords: Vec<usize>,
    pub vertices: Vec<NamedPoint>,
    pub boundary: Vec<Vec<f64>>,
    pub segments: Vec<BoundarySegment>,
    pub critical_angles: Vec<CriticalRow>,
}

/// Named corner states for the cases with a known locus.
pub fn named_vertices(s: Spin, mixed: bool) -> Result<Vec<(String, AnyState)>> {
    let pure = |tag: NamedState| -> Result<(String, AnyState)> {
        let p = named_state(tag, s)?;
        Ok((tag.tag().to_string(), if mixed {
            AnyState::Mixed(MixedState::from_pure(&p))
        } else {
            AnyState::Pure(p)
        }))
    };
    let mut out = Vec::new();
    match (s.twice_s(), mixed) {
        (2, true) => {
            out.push(pure(NamedState::Coherent)?);
            out.push(pure(NamedState::Ghz)?);
            out.push(("maximally-mixed".to_string(), AnyState::Mixed(MixedState::maximally_mixed(s)?)));
        }
        (2, false) | (3, false) => {
            out.push(pure(NamedState::Coherent)?);
            out.push(pure(NamedState::Ghz)?);
        }
        (4, false) => {
            out.push(pure(NamedState::Coherent)?);
            out.push(pure(NamedState::Ghz)?);
            out.push(pure(NamedState::Tetrahedron)?);
        }
        (5, false) => {
            out.push(pure(NamedState::Coherent)?);
            out.push(pure(NamedState::Ghz)?);
            out.push(pure(NamedState::TriangularBipyramid)?);
            out.push(pure(NamedState::Psi32)?);
        }
        _ => {}
    }
    Ok(out)
}

fn free_of(r: &[f64], free: &[usize]) -> Vec<f64> {
    free.iter().map(|&l| r[l]).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn sample_seed(seed: u64, i: u64) -> u64 {
    seed ^ i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Minimizes Σ_l w_l r_l over mixed states, ρ = AA†/Tr(AA†), by gradient
/// descent on A with backtracking.
pub fn descend_mixed_weighted(rho0: &MixedState, weights: &[f64], max_steps: usize, tol: f64) -> Result<MixedState> {
    let s = rho0.spin();
    let tb = t_basis(s)?;
    let w_of = |rho: &CMat| -> CMat {
        let mut w = CMat::zeros(s.dim(), s.dim());
        for (l, &wl) in weights.iter().enumerate() {
            if wl != 0.0 {
                w += tb.l_part(rho, l as u32) * C64::from(wl);
            }
        }
        w
    };
    let value = |a: &CMat| -> (f64, CMat) {
        let t = a.norm_squared();
        let rho = a * a.adjoint() / C64::from(t);
        let f = weights.iter().zip(tb.shell_weights(&rho)).map(|(w, q)| w * q).sum();
        (f, rho)
    };
    let mut a = hermitian_fn(rho0.matrix(), |x| C64::from(x.max(0.0).sqrt()));
    a /= C64::from(a.norm());
    let (mut f, mut rho) = value(&a);
    let mut h = 1.0;
    for _ in 0..max_steps {
        let w = w_of(&rho);
        let c = trace_prod(&w, &rho).re;
        let g = (&w * &a - &a * C64::from(c)) * C64::from(4.0);
        let gn = g.norm_squared();
        if gn.sqrt() < tol {
            break;
        }
        let mut accepted = false;
        while h > 1e-14 {
            let mut cand = &a - &g * C64::from(h);
            cand /= C64::from(cand.norm());
            let (fc, rc) = value(&cand);
            if fc <= f - 1e-4 * h * gn {
                a = cand;
                f = fc;
                rho = rc;
                accepted = true;
                h *= 2.0;
                break;
            }
            h *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    MixedState::new(s, hermitian_part(&rho))
}

fn refine_config() -> DescentConfig {
    DescentConfig {
        t: 1,
        step: 0.5,
        tol: 1e-11,
        max_steps: 4000,
        direction: Direction::Forward,
        sample_every: usize::MAX,
    }
}

const REFINE_STARTS: usize = 2;

/// Samples the locus, pushes points to the boundary by descending linear
/// functionals c·x of the free coordinates, and extracts the hull.
///
/// Pure states are drawn from the Fubini-Study measure, mixed ones from the
/// Hilbert-Schmidt measure. Only one or two free coordinates are supported.
pub fn build_locus(s: Spin, mixed: bool, n_samples: usize, n_refine: usize, seed: u64) -> Result<LocusModel> {
    let form = constrained_r_form(s, mixed)?;
    let free = form.free.clone();
    let d = free.len();
    if d == 0 || d > 2 {
        return Err(Error::Unsupported(format!(
            "locus with {d} free coordinates (2s = {})",
            s.twice_s()
        )));
    }
    let n = s.dim();

    let mut samples: Vec<LocusPoint> = (0..n_samples.max(1) as u64)
        .into_par_iter()
        .map(|i| -> Result<LocusPoint> {
            let mut rng = seeded_rng(sample_seed(seed, i));
            let state = if mixed {
                AnyState::Mixed(random_mixed_with(s, &mut rng)?)
            } else {
                AnyState::Pure(random_pure_with(s, &mut rng)?)
            };
            Ok(LocusPoint {
                coords: free_of(&state.r()?, &free),
                state,
            })
        })
        .collect::<Result<_>>()?;

    let directions: Vec<Vec<f64>> = if d == 1 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        let m = n_refine.max(4);
        (0..m)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
                vec![a.cos(), a.sin()]
            })
            .collect()
    };

    let refined: Vec<LocusPoint> = directions
        .par_iter()
        .map(|c| {
            let mut order: Vec<usize> = (0..samples.len()).collect();
            order.sort_by(|&i, &j| dot(c, &samples[i].coords).total_cmp(&dot(c, &samples[j].coords)));
            let starts: Vec<&AnyState> = order.iter().take(REFINE_STARTS).map(|&i| &samples[i].state).collect();
            refine_along(c, &starts, &free, n)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    samples.extend(refined);
    if d == 2 {
        subdivide_edges(&mut samples, &free, n)?;
    }

    let named: Vec<(String, Vec<f64>)> = named_vertices(s, mixed)?
        .into_iter()
        .map(|(name, st)| Ok((name, free_of(&st.r()?, &free))))
        .collect::<Result<_>>()?;

    let boundary = if d == 1 {
        let (mut lo, mut hi) = (0, 0);
        for (i, p) in samples.iter().enumerate() {
            if p.coords[0] < samples[lo].coords[0] {
                lo = i;
            }
            if p.coords[0] > samples[hi].coords[0] {
                hi = i;
            }
        }
        vec![lo, hi]
    } else {
        let pts: Vec<[f64; 2]> = samples.iter().map(|p| [p.coords[0], p.coords[1]]).collect();
        prune_hull(&pts, &convex_hull(&pts), &named)
    };

    let label_of = |c: &[f64]| -> String {
        named
            .iter()
            .map(|(name, x)| (name, dist(c, x)))
            .filter(|(_, dd)| *dd < LABEL_TOL)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(name, _)| name.clone())
            .unwrap_or_else(|| CONTINUOUS.to_string())
    };
    let boundary_labels: Vec<String> = boundary.iter().map(|&i| label_of(&samples[i].coords)).collect();

    let vertices = named
        .iter()
        .map(|(name, x)| {
            let best = boundary
                .iter()
                .map(|&i| &samples[i].coords)
                .min_by(|a, b| dist(a, x).total_cmp(&dist(b, x)))
                .expect("boundary is non-empty");
            Vertex {
                name: name.clone(),
                exact: x.clone(),
                coords: best.clone(),
                distance: dist(best, x),
            }
        })
        .collect();

    let segments = if d == 2 {
        boundary_segments(&samples, &boundary, &boundary_labels)
    } else {
        Vec::new()
    };

    Ok(LocusModel {
        spin: s,
        mixed,
        free_coords: free,
        affine_map: form,
        samples,
        boundary,
        boundary_labels,
        vertices,
        segments,
    })
}

/// Minimizes c·x from each start and returns the end points.
fn refine_along(c: &[f64], starts: &[&AnyState], free: &[usize], n: usize) -> Result<Vec<LocusPoint>> {
    let mut w = vec![0.0; n];
    for (j, &l) in free.iter().enumerate() {
        w[l] = c[j];
    }
    starts
        .iter()
        .map(|st| {
            let state = match st {
                AnyState::Pure(p) => {
                    let tr = descend_weighted(p, &w, &refine_config())?;
                    AnyState::Pure(tr.final_state().clone())
                }
                AnyState::Mixed(m) => AnyState::Mixed(descend_mixed_weighted(m, &w, 6000, 1e-11)?),
            };
            Ok(LocusPoint {
                coords: free_of(&state.r()?, free),
                state,
            })
        })
        .collect()
}

/// Hull edges longer than this are probed for boundary points beyond them.
pub const RESOLUTION: f64 = 1e-3;
const MAX_SUBDIVISION_ROUNDS: usize = 16;

/// Repeatedly probes long hull edges along their outward normal until the
/// boundary polyline resolves curved stretches to [`RESOLUTION`].
fn subdivide_edges(samples: &mut Vec<LocusPoint>, free: &[usize], n: usize) -> Result<()> {
    let mut straight: std::collections::HashSet<(usize, usize)> = Default::default();
    for _ in 0..MAX_SUBDIVISION_ROUNDS {
        let pts: Vec<[f64; 2]> = samples.iter().map(|p| [p.coords[0], p.coords[1]]).collect();
        let hull = convex_hull(&pts);
        let m = hull.len();
        let edges: Vec<(usize, usize)> = (0..m)
            .map(|k| (hull[k], hull[(k + 1) % m]))
            .filter(|&(a, b)| dist(&pts[a], &pts[b]) > RESOLUTION && !straight.contains(&(a, b)))
            .collect();
        if edges.is_empty() {
            break;
        }
        let found: Vec<((usize, usize), Vec<LocusPoint>)> = edges
            .par_iter()
            .map(|&(a, b)| {
                let (p, q) = (pts[a], pts[b]);
                let len = dist(&p, &q);
                let c = [-(q[1] - p[1]) / len, (q[0] - p[0]) / len];
                let out = refine_along(&c, &[&samples[a].state, &samples[b].state], free, n)?;
                let beyond: Vec<LocusPoint> = out
                    .into_iter()
                    .filter(|lp| cross(p, q, [lp.coords[0], lp.coords[1]]) < -1e-10 * len)
                    .collect();
                Ok(((a, b), beyond))
            })
            .collect::<Result<_>>()?;
        let mut added = false;
        for (edge, beyond) in found {
            if beyond.is_empty() {
                straight.insert(edge);
            } else {
                added = true;
                samples.extend(beyond);
            }
        }
        if !added {
            break;
        }
    }
    Ok(())
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; counter-clockwise, collinear points dropped.
pub fn convex_hull(pts: &[[f64; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&i, &j| pts[i][0].total_cmp(&pts[j][0]).then(pts[i][1].total_cmp(&pts[j][1])));
    idx.dedup_by(|a, b| pts[*a] == pts[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(idx.iter())
        } else {
            Box::new(idx.iter().rev())
        };
        for &i in iter {
            while hull.len() >= start + 2
                && cross(pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]], pts[i]) <= 0.0
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull
}

/// Drops hull points that are numerically collinear with their neighbours or
/// duplicate a named vertex position, keeping the point nearest each vertex.
fn prune_hull(pts: &[[f64; 2]], hull: &[usize], named: &[(String, Vec<f64>)]) -> Vec<usize> {
    let keep: Vec<usize> = named
        .iter()
        .filter_map(|(_, x)| {
            hull.iter()
                .copied()
                .min_by(|&a, &b| dist(&pts[a], x).total_cmp(&dist(&pts[b], x)))
                .filter(|&i| dist(&pts[i], x) < LABEL_TOL)
        })
        .collect();
    let mut cur: Vec<usize> = hull.to_vec();
    loop {
        let m = cur.len();
        if m <= 3 {
            return cur;
        }
        let mut out = Vec::with_capacity(m);
        let mut changed = false;
        for k in 0..m {
            let i = cur[k];
            if keep.contains(&i) {
                out.push(i);
                continue;
            }
            let prev = pts[cur[(k + m - 1) % m]];
            let next = pts[cur[(k + 1) % m]];
            let p = pts[i];
            let chord = dist(&prev, &next).max(1e-300);
            let dev = cross(prev, next, p).abs() / chord;
            let near_kept = keep.iter().any(|&j| dist(&pts[j], &p) < 1e-7);
            if dev < 1e-10 || near_kept {
                changed = true;
                continue;
            }
            out.push(i);
        }
        if !changed {
            return out;
        }
        cur = out;
    }
}

fn boundary_segments(samples: &[LocusPoint], boundary: &[usize], labels: &[String]) -> Vec<BoundarySegment> {
    let m = boundary.len();
    let anchors: Vec<usize> = (0..m).filter(|&k| labels[k] != CONTINUOUS).collect();
    if anchors.len() < 2 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (a_pos, &a) in anchors.iter().enumerate() {
        let b = anchors[(a_pos + 1) % anchors.len()];
        if labels[a] == labels[b] {
            continue;
        }
        let mut run = vec![a];
        let mut k = a;
        while k != b {
            k = (k + 1) % m;
            run.push(k);
        }
        let p0 = &samples[boundary[a]].coords;
        let p1 = &samples[boundary[b]].coords;
        let chord = dist(p0, p1).max(1e-300);
        let max_dev = run
            .iter()
            .map(|&k| {
                let p = &samples[boundary[k]].coords;
                cross([p0[0], p0[1]], [p1[0], p1[1]], [p[0], p[1]]).abs() / chord
            })
            .fold(0.0, f64::max);
        let curved = max_dev > CURVED_TOL;
        let fit = if curved {
            let pts: Vec<&Vec<f64>> = run.iter().map(|&k| &samples[boundary[k]].coords).collect();
            quadratic_fit(&pts)
        } else {
            None
        };
        out.push(BoundarySegment {
            from: labels[a].clone(),
            to: labels[b].clone(),
            curved,
            max_deviation: max_dev,
            n_points: run.len(),
            fit,
        });
    }
    out
}

fn quadratic_fit(pts: &[&Vec<f64>]) -> Option<QuadraticFit> {
    if pts.len() < 4 {
        return None;
    }
    let a = DMatrix::from_fn(pts.len(), 3, |i, j| pts[i][0].powi(j as i32));
    let b = DVector::from_iterator(pts.len(), pts.iter().map(|p| p[1]));
    let coef = a.clone().svd(true, true).solve(&b, 1e-14).ok()?;
    let res = &a * &coef - &b;
    Some(QuadraticFit {
        a: coef[0],
        b: coef[1],
        c: coef[2],
        rms: (res.norm_squared() / pts.len() as f64).sqrt(),
        max_abs: res.amax(),
    })
}

/// Orthonormal axes in r̃-space: in-plane axes first, the plane normal last.
#[derive(Clone, Debug)]
pub struct StandardFrame {
    pub spin: Spin,
    pub mixed: bool,
    pub rotation: DMatrix<f64>,
    pub plane_height: f64,
    lambda_tilde: DMatrix<f64>,
}

fn tilde(r: &[f64]) -> DVector<f64> {
    DVector::from_iterator(r.len(), r.iter().enumerate().map(|(l, x)| x / ((2 * l + 1) as f64).sqrt()))
}

fn orthonormalize(v: DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut v = v;
    for _ in 0..2 {
        for b in basis {
            let c = v.dot(b);
            v -= b * c;
        }
    }
    v
}

/// The r̃-frame: z along the plane normal, x along the coherent state's
/// in-plane image, y (when present) oriented so the GHZ state has y > 0.
///
/// Pure frames live in the +1 eigenspace of λ̃, where every pure r̃ sits on
/// the plane r̃·ẑ = 1/((2s+1)|P₊e₀|). The mixed frame (s = 1 only) keeps
/// ẑ = e₀ and takes ŷ along the in-plane part of ∇ Tr ρ².
pub fn standard_frame(s: Spin, mixed: bool) -> Result<StandardFrame> {
    let ts = s.twice_s();
    let supported = if mixed { ts == 2 } else { (2..=5).contains(&ts) };
    if !supported {
        return Err(Error::Unsupported(format!(
            "standard frame for 2s = {ts}{}",
            if mixed { " (mixed)" } else { "" }
        )));
    }
    let n = s.dim();
    let lam = lambda(s)?;
    let lt = lam.symmetrized();
    let coherent = tilde(&r_vector(&named_state(NamedState::Coherent, s)?)?.r);
    let ghz = tilde(&r_vector(&named_state(NamedState::Ghz, s)?)?.r);

    let (z, x, y, height) = if mixed {
        let z = DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let g = DVector::from_fn(n, |l, _| ((2 * l + 1) as f64).sqrt());
        let y = orthonormalize(g, std::slice::from_ref(&z)).normalize();
        let c = orthonormalize(coherent.clone(), &[z.clone(), y.clone()]);
        let x = c.normalize();
        (z, x, Some(y), 1.0 / n as f64)
    } else {
        let (pp, _) = lam.eigen_projectors();
        let p0 = pp.column(0).into_owned();
        let pn = p0.norm();
        let z = p0 / pn;
        let x = orthonormalize(coherent.clone(), std::slice::from_ref(&z)).normalize();
        let rank = pp.trace().round() as usize;
        let y = if rank >= 3 {
            let mut best: Option<DVector<f64>> = None;
            for j in 0..n {
                let v = orthonormalize(pp.column(j).into_owned(), &[z.clone(), x.clone()]);
                if best.as_ref().is_none_or(|b| v.norm() > b.norm()) {
                    best = Some(v);
                }
            }
            let mut y = best.expect("n ≥ 1").normalize();
            if y.dot(&ghz) < 0.0 {
                y = -y;
            }
            Some(y)
        } else {
            None
        };
        (z, x, y, 1.0 / (n as f64 * pn))
    };
    let mut rows = vec![x];
    if let Some(y) = y {
        rows.push(y);
    }
    rows.push(z);
    let rotation = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    Ok(StandardFrame {
        spin: s,
        mixed,
        rotation,
        plane_height: height,
        lambda_tilde: lt,
    })
}

impl StandardFrame {
    pub fn in_plane_dim(&self) -> usize {
        self.rotation.nrows() - 1
    }

    /// Frame coordinates of a state's r̃ given its full r-vector.
    pub fn state_coords(&self, r: &[f64]) -> Vec<f64> {
        (&self.rotation * tilde(r)).iter().copied().collect()
    }

    /// Frame coordinates of λ̃ r̃_V from the shells |V_l|². The average
    /// fidelity is then the plain dot product with [`Self::state_coords`].
    pub fn transform_coords(&self, v_shells: &[f64]) -> Vec<f64> {
        (&self.rotation * (&self.lambda_tilde * tilde(v_shells))).iter().copied().collect()
    }

    /// Orbit-averaged fidelity through the frame: in-plane dot product plus
    /// the product of the normal coordinates.
    pub fn fidelity(&self, r: &[f64], v_shells: &[f64]) -> f64 {
        dot(&self.state_coords(r), &self.transform_coords(v_shells))
    }

    /// In-plane part, padded to two components.
    pub fn plane(&self, coords: &[f64]) -> [f64; 2] {
        if self.in_plane_dim() >= 2 {
            [coords[0], coords[1]]
        } else {
            [coords[0], 0.0]
        }
    }
}

/// In-plane angle of frame coordinates in degrees, in [0, 360); NaN at the
/// pole, where the in-plane part vanishes to rounding.
pub fn phi_deg(frame: &StandardFrame, coords: &[f64]) -> f64 {
    let p = frame.plane(coords);
    let scale = coords.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if p[0].hypot(p[1]) <= 1e-12 * scale {
        return f64::NAN;
    }
    p[1].atan2(p[0]).to_degrees().rem_euclid(360.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvePoint {
    pub eta: f64,
    pub phi_deg: f64,
    pub coords: Vec<f64>,
}

/// r̃_V(η) for one family, in frame coordinates.
pub fn transform_curve(
    family: Family,
    frame: &StandardFrame,
    eta_min: f64,
    eta_max: f64,
    n_points: usize,
) -> Result<Vec<CurvePoint>> {
    let n_points = n_points.max(2);
    (0..n_points)
        .map(|i| {
            let eta = eta_min + (eta_max - eta_min) * i as f64 / (n_points - 1) as f64;
            let coords = frame.transform_coords(&family.shells(frame.spin, eta)?);
            Ok(CurvePoint {
                eta,
                phi_deg: phi_deg(frame, &coords),
                coords,
            })
        })
        .collect()
}

struct FramedBoundary {
    coords: Vec<Vec<f64>>,
    purity: Vec<f64>,
    labels: Vec<String>,
    sample: Vec<usize>,
    scale: f64,
}

fn framed_boundary(frame: &StandardFrame, locus: &LocusModel) -> Result<FramedBoundary> {
    if frame.spin != locus.spin || frame.mixed != locus.mixed {
        return Err(Error::Domain("frame and locus describe different systems".into()));
    }
    let mut coords = Vec::new();
    let mut purity = Vec::new();
    for &i in &locus.boundary {
        let r = locus.full_r(&locus.samples[i].coords);
        purity.push(r.iter().sum());
        coords.push(frame.state_coords(&r));
    }
    let scale = coords
        .iter()
        .map(|c| {
            let p = frame.plane(c);
            p[0].hypot(p[1])
        })
        .fold(0.0, f64::max)
        .max(1e-300);
    Ok(FramedBoundary {
        coords,
        purity,
        labels: locus.boundary_labels.clone(),
        sample: locus.boundary.clone(),
        scale,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// r̃_ρ·λ̃r̃_V, the averaged fidelity (G for mixed states)
    Linear,
    /// G/Tr ρ², the averaged Hilbert-Schmidt quasi-fidelity
    HsRatio,
}

impl FramedBoundary {
    fn value(&self, k: usize, w: &[f64], obj: Objective) -> f64 {
        let v = dot(&self.coords[k], w);
        match obj {
            Objective::Linear => v,
            Objective::HsRatio => v / self.purity[k],
        }
    }

    /// Minimizing boundary indices for a full-coordinate functional w.
    fn argmin(&self, frame: &StandardFrame, w: &[f64], obj: Objective) -> Vec<usize> {
        let vals: Vec<f64> = (0..self.coords.len()).map(|k| self.value(k, w, obj)).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let wp = frame.plane(w);
        let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let thr = match obj {
            Objective::Linear => TIE_TOL * self.scale * wp[0].hypot(wp[1]) + 1e-14 * self.scale * wn,
            Objective::HsRatio => TIE_TOL * vals.iter().map(|v| v.abs()).fold(0.0, f64::max),
        };
        (0..vals.len()).filter(|&k| vals[k] <= lo + thr).collect()
    }

    fn label(&self, idx: &[usize]) -> String {
        let mut names: Vec<&str> = idx.iter().map(|&k| self.labels[k].as_str()).collect();
        names.sort_unstable();
        names.dedup();
        names.join("+")
    }
}

fn direction_w(frame: &StandardFrame, phi: f64) -> Vec<f64> {
    let mut w = vec![0.0; frame.rotation.nrows()];
    w[0] = phi.cos();
    if frame.in_plane_dim() >= 2 {
        w[1] = phi.sin();
    }
    w
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimalSensor {
    pub labels: Vec<String>,
    /// free coordinates of each minimizer
    pub points: Vec<Vec<f64>>,
    #[serde(skip)]
    pub states: Vec<AnyState>,
}

/// Boundary states minimizing the in-plane projection onto direction φ
/// (radians); near-ties are all returned.
pub fn optimal_sensor(frame: &StandardFrame, locus: &LocusModel, phi: f64) -> Result<OptimalSensor> {
    let fb = framed_boundary(frame, locus)?;
    let idx = fb.argmin(frame, &direction_w(frame, phi), Objective::Linear);
    let mut labels: Vec<String> = idx.iter().map(|&k| fb.labels[k].clone()).collect();
    labels.sort();
    labels.dedup();
    Ok(OptimalSensor {
        labels,
        points: idx.iter().map(|&k| locus.samples[fb.sample[k]].coords.clone()).collect(),
        states: idx.iter().map(|&k| locus.samples[fb.sample[k]].state.clone()).collect(),
    })
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CriticalRow {
    pub from: String,
    pub to: String,
    pub phi_deg: f64,
}

#[derive(Clone, Debug, Serialize, Default)]
pub struct CriticalAngleTable {
    pub rows: Vec<CriticalRow>,
}

const PHI_SCAN: usize = 3600;

/// Sector boundaries of the optimal sensor as the in-plane direction φ
/// sweeps [0°, 360°).
pub fn critical_angles(frame: &StandardFrame, locus: &LocusModel) -> Result<CriticalAngleTable> {
    let fb = framed_boundary(frame, locus)?;
    let label_at = |deg: f64| fb.label(&fb.argmin(frame, &direction_w(frame, deg.to_radians()), Objective::Linear));
    let step = 360.0 / PHI_SCAN as f64;
    let grid: Vec<f64> = (0..=PHI_SCAN).map(|k| (k as f64 + 0.5) * step).collect();
    let labels: Vec<String> = grid.iter().map(|&g| label_at(g)).collect();
    let mut rows = Vec::new();
    for k in 0..PHI_SCAN {
        if labels[k] == labels[k + 1] {
            continue;
        }
        let (mut lo, mut hi) = (grid[k], grid[k + 1]);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if label_at(mid) == labels[k] {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        rows.push(CriticalRow {
            from: labels[k].clone(),
            to: labels[k + 1].clone(),
            phi_deg: (0.5 * (lo + hi)).rem_euclid(360.0),
        });
    }
    rows.sort_by(|a, b| a.phi_deg.total_cmp(&b.phi_deg));
    Ok(CriticalAngleTable { rows })
}

/// Parameter values where the optimal sensor along a family changes.
///
/// Pure loci use the averaged fidelity, mixed loci the averaged HS
/// quasi-fidelity. Stretches where every boundary state ties (the curve at
/// the pole) are not reported as transitions at the ends of the range.
pub fn curve_transitions(
    family: Family,
    frame: &StandardFrame,
    locus: &LocusModel,
    eta_min: f64,
    eta_max: f64,
    n_scan: usize,
) -> Result<Vec<Transition>> {
    let fb = framed_boundary(frame, locus)?;
    let obj = if locus.mixed { Objective::HsRatio } else { Objective::Linear };
    let s = frame.spin;
    let w_at = |eta: f64| -> Result<Vec<f64>> { Ok(frame.transform_coords(&family.shells(s, eta)?)) };
    let argmin_at = |eta: f64| -> Result<Vec<usize>> { Ok(fb.argmin(frame, &w_at(eta)?, obj)) };
    let all = fb.label(&(0..fb.coords.len()).collect::<Vec<_>>());
    let n_scan = n_scan.max(2);
    let grid: Vec<f64> = (0..=n_scan)
        .map(|i| eta_min + (eta_max - eta_min) * i as f64 / n_scan as f64)
        .collect();
    let labels: Vec<String> = grid
        .iter()
        .map(|&e| Ok(fb.label(&argmin_at(e)?)))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for k in 0..n_scan {
        if labels[k] == labels[k + 1] {
            continue;
        }
        if (k == 0 && labels[0] == all) || (k + 1 == n_scan && labels[n_scan] == all) {
            continue;
        }
        let (mut lo, mut hi) = (grid[k], grid[k + 1]);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if fb.label(&argmin_at(mid)?) == labels[k] {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let a = argmin_at(grid[k])?;
        let b = argmin_at(grid[k + 1])?;
        let mut eta = 0.5 * (lo + hi);
        if a.len() == 1 && b.len() == 1 {
            let diff = |e: f64| -> Result<f64> {
                let w = w_at(e)?;
                Ok(fb.value(a[0], &w, obj) - fb.value(b[0], &w, obj))
            };
            let (mut l, mut h) = (grid[k], grid[k + 1]);
            let (dl, dh) = (diff(l)?, diff(h)?);
            if dl < 0.0 && dh > 0.0 {
                for _ in 0..200 {
                    let m = 0.5 * (l + h);
                    if m <= l || m >= h {
                        break;
                    }
                    if diff(m)? < 0.0 {
                        l = m;
                    } else {
                        h = m;
                    }
                }
                eta = 0.5 * (l + h);
            }
        }
        out.push(Transition {
            eta,
            from: labels[k].clone(),
            to: labels[k + 1].clone(),
        });
    }
    Ok(merge_brief(out, 1e-6 * (eta_max - eta_min).abs()))
}

/// A → T → B with T held over a vanishing interval (a pole passage) is one
/// transition A → B.
fn merge_brief(tr: Vec<Transition>, gap: f64) -> Vec<Transition> {
    let mut out: Vec<Transition> = Vec::with_capacity(tr.len());
    for t in tr {
        if let Some(last) = out.last_mut() {
            if last.to == t.from && (t.eta - last.eta).abs() < gap {
                last.eta = 0.5 * (last.eta + t.eta);
                last.to = t.to;
                if last.from == last.to {
                    out.pop();
                }
                continue;
            }
        }
        out.push(t);
    }
    out
}
