//! Exact angular-momentum primitives.
//!
//! Spin labels are carried as doubled integers (`twice_s`, `two_m`) so that
//! half-integer arithmetic never touches floating point. Clebsch-Gordan and
//! 6j coefficients are evaluated with the Racah single-sum formulas over big
//! rationals; each result is a signed square root of a rational and the final
//! conversion to `f64` is the only rounding step.

use std::fmt;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{domain, CMat, Error, Result, C64};

/// Default cap on 2s for system spins.
pub const DEFAULT_MAX_TWO_S: u32 = 20;
/// Environment variable overriding [`DEFAULT_MAX_TWO_S`].
pub const MAX_TWO_S_ENV: &str = "SPINMETRO_MAX_TWO_S";

/// Current cap on 2s, honouring `SPINMETRO_MAX_TWO_S`.
pub fn max_two_s() -> u32 {
    std::env::var(MAX_TWO_S_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_TWO_S)
}

/// A spin quantum number stored as `2s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin {
    twice_s: u32,
}

impl Spin {
    /// A spin label with no range check (coupling labels may exceed the cap).
    pub const fn new(twice_s: u32) -> Spin {
        Spin { twice_s }
    }

    /// A system spin, refused when beyond [`max_two_s`].
    pub fn supported(twice_s: u32) -> Result<Spin> {
        Spin::new(twice_s).check()
    }

    pub fn check(self) -> Result<Spin> {
        let max = max_two_s();
        if self.twice_s > max {
            return Err(Error::SpinTooLarge {
                twice_s: self.twice_s,
                max,
            });
        }
        Ok(self)
    }

    pub const fn twice_s(self) -> u32 {
        self.twice_s
    }

    /// Hilbert space dimension n = 2s+1.
    pub const fn dim(self) -> usize {
        self.twice_s as usize + 1
    }

    pub fn value(self) -> f64 {
        self.twice_s as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.twice_s % 2 == 0
    }

    /// ⌊s⌋
    pub const fn floor(self) -> u32 {
        self.twice_s / 2
    }

    /// Doubled magnetic numbers in Dicke order, 2s first.
    pub fn twice_ms(self) -> impl Iterator<Item = i32> {
        let t = self.twice_s as i32;
        (0..=t).map(move |k| t - 2 * k)
    }

    /// Index of `two_m` in the Dicke ordering.
    pub fn index_of(self, two_m: i32) -> Option<usize> {
        let t = self.twice_s as i32;
        if two_m.abs() > t || (t - two_m) % 2 != 0 {
            return None;
        }
        Some(((t - two_m) / 2) as usize)
    }

    /// m value (not doubled) of Dicke index `i`.
    pub fn m_of(self, i: usize) -> f64 {
        self.value() - i as f64
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice_s / 2)
        } else {
            write!(f, "{}/2", self.twice_s)
        }
    }
}

/// An exact real number of the form `sign * sqrt(square)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedSqrt {
    sign: i8,
    square: BigRational,
}

impl SignedSqrt {
    pub fn zero() -> SignedSqrt {
        SignedSqrt {
            sign: 0,
            square: BigRational::zero(),
        }
    }

    pub fn new(sign: i8, square: BigRational) -> SignedSqrt {
        if sign == 0 || square.is_zero() {
            return SignedSqrt::zero();
        }
        assert!(!square.is_negative(), "negative square");
        SignedSqrt {
            sign: sign.signum(),
            square,
        }
    }

    /// Build from a rational value `x`.
    pub fn from_rational(x: &BigRational) -> SignedSqrt {
        let sign = if x.is_positive() {
            1
        } else if x.is_negative() {
            -1
        } else {
            0
        };
        SignedSqrt::new(sign, x * x)
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// The (unsigned) square of the value.
    pub fn square(&self) -> &BigRational {
        &self.square
    }

    /// `sign * square`, i.e. `x*|x|`.
    pub fn signed_square(&self) -> BigRational {
        match self.sign {
            1 => self.square.clone(),
            -1 => -self.square.clone(),
            _ => BigRational::zero(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let q = self.square.to_f64().unwrap_or(f64::NAN);
        self.sign as f64 * q.sqrt()
    }

    pub fn mul(&self, other: &SignedSqrt) -> SignedSqrt {
        SignedSqrt::new(self.sign * other.sign, &self.square * &other.square)
    }

    /// The value as a rational, when the square is a perfect rational square.
    pub fn to_rational(&self) -> Option<BigRational> {
        if self.sign == 0 {
            return Some(BigRational::zero());
        }
        let n = exact_isqrt(self.square.numer())?;
        let d = exact_isqrt(self.square.denom())?;
        let v = BigRational::new(n, d);
        Some(if self.sign < 0 { -v } else { v })
    }
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

const FACT_TABLE: usize = 256;

fn factorial(n: i64) -> BigInt {
    static TABLE: OnceLock<Vec<BigInt>> = OnceLock::new();
    assert!(n >= 0, "factorial of negative number");
    let table = TABLE.get_or_init(|| {
        let mut v = Vec::with_capacity(FACT_TABLE);
        let mut acc = BigInt::one();
        v.push(acc.clone());
        for k in 1..FACT_TABLE as u64 {
            acc *= k;
            v.push(acc.clone());
        }
        v
    });
    if (n as usize) < FACT_TABLE {
        return table[n as usize].clone();
    }
    let mut acc = table[FACT_TABLE - 1].clone();
    for k in FACT_TABLE as i64..=n {
        acc *= k;
    }
    acc
}

/// Half of a doubled integer that must be even.
fn half(x: i64) -> i64 {
    debug_assert!(x % 2 == 0);
    x / 2
}

/// Triangle rule on doubled labels, including integer perimeter.
pub fn triangle(a: u32, b: u32, c: u32) -> bool {
    let (a, b, c) = (a as i64, b as i64, c as i64);
    c <= a + b && c >= (a - b).abs() && (a + b + c) % 2 == 0
}

fn check_projection(j: Spin, two_m: i32) -> Result<()> {
    let t = j.twice_s as i32;
    if two_m.abs() > t {
        return domain(format!("|m| = {}/2 exceeds j = {}", two_m.abs(), j));
    }
    if (t - two_m) % 2 != 0 {
        return domain(format!("m = {}/2 does not match the parity of j = {}", two_m, j));
    }
    Ok(())
}

fn check_label(j: Spin) -> Result<()> {
    let max = 2 * max_two_s();
    if j.twice_s > max {
        return Err(Error::SpinTooLarge {
            twice_s: j.twice_s,
            max,
        });
    }
    Ok(())
}

/// ⟨j1 m1; j2 m2 | J M⟩ as an exact signed square root (Condon-Shortley phase).
pub fn clebsch_gordan_exact(
    j1: Spin,
    two_m1: i32,
    j2: Spin,
    two_m2: i32,
    j: Spin,
    two_m: i32,
) -> Result<SignedSqrt> {
    for (l, m) in [(j1, two_m1), (j2, two_m2), (j, two_m)] {
        check_label(l)?;
        check_projection(l, m)?;
    }
    if two_m1 + two_m2 != two_m || !triangle(j1.twice_s, j2.twice_s, j.twice_s) {
        return Ok(SignedSqrt::zero());
    }
    let (a, b, c) = (j1.twice_s as i64, j2.twice_s as i64, j.twice_s as i64);
    let (ma, mb, mc) = (two_m1 as i64, two_m2 as i64, two_m as i64);

    let num = factorial(half(c + a - b))
        * factorial(half(c - a + b))
        * factorial(half(a + b - c))
        * factorial(half(c + mc))
        * factorial(half(c - mc))
        * factorial(half(a - ma))
        * factorial(half(a + ma))
        * factorial(half(b - mb))
        * factorial(half(b + mb))
        * BigInt::from(c + 1);
    let den = factorial(half(a + b + c) + 1);
    let prefactor = BigRational::new(num, den);

    let kmin = 0.max(half(b - c - ma)).max(half(a + mb - c));
    let kmax = half(a + b - c).min(half(a - ma)).min(half(b + mb));
    let mut sum = BigRational::zero();
    for k in kmin..=kmax {
        let d = factorial(k)
            * factorial(half(a + b - c) - k)
            * factorial(half(a - ma) - k)
            * factorial(half(b + mb) - k)
            * factorial(half(c - b + ma) + k)
            * factorial(half(c - a - mb) + k);
        let term = BigRational::new(BigInt::one(), d);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let sign = if sum.is_positive() {
        1
    } else if sum.is_negative() {
        -1
    } else {
        0
    };
    Ok(SignedSqrt::new(sign, prefactor * &sum * &sum))
}

/// Clebsch-Gordan coefficient as `f64`.
pub fn clebsch_gordan(
    j1: Spin,
    two_m1: i32,
    j2: Spin,
    two_m2: i32,
    j: Spin,
    two_m: i32,
) -> Result<f64> {
    Ok(clebsch_gordan_exact(j1, two_m1, j2, two_m2, j, two_m)?.to_f64())
}

fn delta_sq(a: i64, b: i64, c: i64) -> BigRational {
    BigRational::new(
        factorial(half(a + b - c)) * factorial(half(a - b + c)) * factorial(half(b + c - a)),
        factorial(half(a + b + c) + 1),
    )
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}, exact. Zero when a triad fails.
pub fn six_j_exact(j: [Spin; 6]) -> SignedSqrt {
    let t: Vec<i64> = j.iter().map(|x| x.twice_s as i64).collect();
    let triads = [(0, 1, 2), (0, 4, 5), (3, 1, 5), (3, 4, 2)];
    if triads
        .iter()
        .any(|&(p, q, r)| !triangle(t[p] as u32, t[q] as u32, t[r] as u32))
    {
        return SignedSqrt::zero();
    }
    let mut pref = BigRational::one();
    for &(p, q, r) in &triads {
        pref *= delta_sq(t[p], t[q], t[r]);
    }
    let a: Vec<i64> = triads
        .iter()
        .map(|&(p, q, r)| half(t[p] + t[q] + t[r]))
        .collect();
    let b = [
        half(t[0] + t[1] + t[3] + t[4]),
        half(t[1] + t[2] + t[4] + t[5]),
        half(t[2] + t[0] + t[5] + t[3]),
    ];
    let tmin = *a.iter().max().unwrap();
    let tmax = *b.iter().min().unwrap();
    let mut sum = BigRational::zero();
    for x in tmin..=tmax {
        let mut d = BigInt::one();
        for &ai in &a {
            d *= factorial(x - ai);
        }
        for &bi in &b {
            d *= factorial(bi - x);
        }
        let term = BigRational::new(factorial(x + 1), d);
        if x % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let sign = if sum.is_positive() {
        1
    } else if sum.is_negative() {
        -1
    } else {
        0
    };
    SignedSqrt::new(sign, pref * &sum * &sum)
}

/// Wigner 6j symbol as `f64`.
pub fn six_j(j: [Spin; 6]) -> f64 {
    six_j_exact(j).to_f64()
}

/// Spin matrices in the Dicke basis (ħ = 1).
#[derive(Clone, Debug)]
pub struct SpinOperatorSet {
    pub spin: Spin,
    pub sx: CMat,
    pub sy: CMat,
    pub sz: CMat,
}

impl SpinOperatorSet {
    /// n·S for a (not necessarily unit) 3-vector.
    pub fn along(&self, n: [f64; 3]) -> CMat {
        &self.sx * C64::from(n[0]) + &self.sy * C64::from(n[1]) + &self.sz * C64::from(n[2])
    }

    pub fn raising(&self) -> CMat {
        &self.sx + &self.sy * C64::i()
    }
}

pub fn spin_operators(s: Spin) -> Result<SpinOperatorSet> {
    s.check()?;
    let n = s.dim();
    let sv = s.value();
    let mut sp = CMat::zeros(n, n);
    let mut sz = CMat::zeros(n, n);
    for i in 0..n {
        let m = s.m_of(i);
        sz[(i, i)] = C64::from(m);
        if i > 0 {
            // S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>, and m+1 sits at index i-1
            sp[(i - 1, i)] = C64::from((sv * (sv + 1.0) - m * (m + 1.0)).sqrt());
        }
    }
    let sm = sp.adjoint();
    let sx = (&sp + &sm) * C64::from(0.5);
    let sy = (&sp - &sm) * C64::new(0.0, -0.5);
    Ok(SpinOperatorSet { spin: s, sx, sy, sz })
}

fn factorial_f64(n: i64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Small Wigner matrix d^s(β), rows m' and columns m in Dicke order.
pub fn wigner_small_d(s: Spin, beta: f64) -> Result<DMatrix<f64>> {
    s.check()?;
    let n = s.dim();
    let tj = s.twice_s as i64;
    let (c, sn) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let mut d = DMatrix::zeros(n, n);
    for (r, tmp) in s.twice_ms().enumerate() {
        for (col, tm) in s.twice_ms().enumerate() {
            let (tmp, tm) = (tmp as i64, tm as i64);
            let jpmp = half(tj + tmp);
            let jmmp = half(tj - tmp);
            let jpm = half(tj + tm);
            let jmm = half(tj - tm);
            let pre = (factorial_f64(jpmp) * factorial_f64(jmmp) * factorial_f64(jpm) * factorial_f64(jmm))
                .sqrt();
            let dm = half(tm - tmp); // m - m'
            let kmin = 0.max(dm);
            let kmax = jpm.min(jmmp);
            let mut acc = 0.0;
            for k in kmin..=kmax {
                let den = factorial_f64(jpm - k)
                    * factorial_f64(k)
                    * factorial_f64(jmmp - k)
                    * factorial_f64(k - dm);
                let pc = (tj - 2 * k + dm) as i32;
                let ps = (2 * k - dm) as i32;
                let sign = if (k - dm) % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * c.powi(pc) * sn.powi(ps) / den;
            }
            d[(r, col)] = pre * acc;
        }
    }
    Ok(d)
}

/// Rotation matrix D^s(α,β,γ) = exp(-iαSz) exp(-iβSy) exp(-iγSz).
pub fn wigner_d(s: Spin, alpha: f64, beta: f64, gamma: f64) -> Result<CMat> {
    let d = wigner_small_d(s, beta)?;
    let n = s.dim();
    let ms: Vec<f64> = (0..n).map(|i| s.m_of(i)).collect();
    Ok(CMat::from_fn(n, n, |r, c| {
        C64::from_polar(1.0, -(ms[r] * alpha + ms[c] * gamma)) * d[(r, c)]
    }))
}

/// Euler angles (z-y-z) of a rotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Euler {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Euler {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Euler {
        Euler { alpha, beta, gamma }
    }

    /// Spin-1/2 matrix [[a, -b̄], [b, ā]] returned as (a, b).
    pub fn su2(&self) -> (C64, C64) {
        let (c, s) = ((self.beta / 2.0).cos(), (self.beta / 2.0).sin());
        let a = C64::from_polar(c, -(self.alpha + self.gamma) / 2.0);
        let b = C64::from_polar(s, (self.alpha - self.gamma) / 2.0);
        (a, b)
    }

    pub fn from_su2(a: C64, b: C64) -> Euler {
        let beta = 2.0 * b.norm().atan2(a.norm());
        let (pa, pb) = (a.arg(), b.arg());
        Euler {
            alpha: pb - pa,
            beta,
            gamma: -pa - pb,
        }
    }

    /// Composition g1∘g2, i.e. the rotation whose matrix is D(g1) D(g2).
    pub fn compose(&self, other: &Euler) -> Euler {
        let (a1, b1) = self.su2();
        let (a2, b2) = other.su2();
        // [[a1,-b1*],[b1,a1*]] [[a2,-b2*],[b2,a2*]]
        let a = a1 * a2 - b1.conj() * b2;
        let b = b1 * a2 + a1.conj() * b2;
        Euler::from_su2(a, b)
    }

    /// SO(3) matrix Rz(α) Ry(β) Rz(γ).
    pub fn so3(&self) -> [[f64; 3]; 3] {
        let rz = |t: f64| [[t.cos(), -t.sin(), 0.0], [t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
        let ry = |t: f64| [[t.cos(), 0.0, t.sin()], [0.0, 1.0, 0.0], [-t.sin(), 0.0, t.cos()]];
        mat3_mul(&mat3_mul(&rz(self.alpha), &ry(self.beta)), &rz(self.gamma))
    }

    /// Haar-random rotation.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R) -> Euler {
        let tau = std::f64::consts::TAU;
        let alpha = rng.random::<f64>() * tau;
        let gamma = rng.random::<f64>() * tau;
        let cb: f64 = 2.0 * rng.random::<f64>() - 1.0;
        Euler::new(alpha, cb.clamp(-1.0, 1.0).acos(), gamma)
    }
}

pub(crate) fn mat3_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn stretched_cg_is_one() {
        let h = Spin::new(1);
        let c = clebsch_gordan_exact(h, 1, h, 1, Spin::new(2), 2).unwrap();
        assert_eq!(c.to_rational(), Some(rat(1, 1)));
    }

    #[test]
    fn singlet_cg_closed_form() {
        // ⟨j m; j -m|0 0⟩ = (-1)^(j-m)/sqrt(2j+1)
        for tj in 0..=8u32 {
            let j = Spin::new(tj);
            for tm in j.twice_ms() {
                let c = clebsch_gordan_exact(j, tm, j, -tm, Spin::new(0), 0).unwrap();
                let sign = if ((tj as i32 - tm) / 2) % 2 == 0 { 1 } else { -1 };
                assert_eq!(c.sign(), sign);
                assert_eq!(c.square(), &rat(1, tj as i64 + 1));
            }
        }
        let one = Spin::new(2);
        let c = clebsch_gordan(one, 0, one, 0, Spin::new(0), 0).unwrap();
        assert!((c + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let c = clebsch_gordan(one, 2, one, -2, Spin::new(0), 0).unwrap();
        assert!((c - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cg_half_half_triplet() {
        let h = Spin::new(1);
        let c = clebsch_gordan_exact(h, 1, h, -1, Spin::new(2), 0).unwrap();
        assert_eq!(c.signed_square(), rat(1, 2));
        let c = clebsch_gordan_exact(h, -1, h, 1, Spin::new(0), 0).unwrap();
        assert_eq!(c.signed_square(), rat(-1, 2));
        // ⟨1/2 1/2; 1 0|1/2 1/2⟩ fixes the sign of T_10 for s = 1/2
        let c = clebsch_gordan_exact(h, 1, Spin::new(2), 0, h, 1).unwrap();
        assert_eq!(c.signed_square(), rat(1, 3));
    }

    /// Values evaluated independently with sympy.physics.wigner (exact).
    #[test]
    fn cg_reference_table() {
        // (2j1, 2m1, 2j2, 2m2, 2J, 2M, signed square)
        let table: &[(u32, i32, u32, i32, u32, i32, i64, i64)] = &[
            (2, 2, 2, -2, 2, 0, 1, 2),
            (2, 0, 2, 0, 4, 0, 2, 3),
            (3, 1, 2, 0, 3, 1, 1, 15),
            (4, 2, 4, -2, 4, 0, 1, 14),
            (4, 0, 4, 0, 4, 0, -2, 7),
            (6, 2, 4, -2, 6, 0, 1, 30),
            (5, 3, 3, -1, 6, 2, 49, 120),
            (4, 4, 4, -2, 6, 2, 3, 10),
            (7, -3, 4, 2, 5, -1, 1, 14),
            (6, 0, 6, 0, 8, 0, -18, 77),
            (9, 5, 8, -4, 11, 1, 63, 715),
        ];
        for &(a, ma, b, mb, c, mc, p, q) in table {
            let v = clebsch_gordan_exact(Spin::new(a), ma, Spin::new(b), mb, Spin::new(c), mc).unwrap();
            assert_eq!(v.signed_square(), rat(p, q), "{:?}", (a, ma, b, mb, c, mc));
        }
    }

    #[test]
    fn cg_selection_rules_and_errors() {
        let one = Spin::new(2);
        assert!(clebsch_gordan_exact(one, 2, one, 0, one, 0).unwrap().is_zero());
        assert!(clebsch_gordan_exact(one, 0, one, 0, Spin::new(6), 0)
            .unwrap()
            .is_zero());
        assert!(clebsch_gordan(one, 1, one, 0, one, 1).is_err());
        assert!(clebsch_gordan(one, 4, one, 0, one, 4).is_err());
    }

    #[test]
    fn cg_columns_are_orthonormal_exactly() {
        for ta in 0..=4u32 {
            for tb in 0..=4u32 {
                let (a, b) = (Spin::new(ta), Spin::new(tb));
                let lo = (ta as i32 - tb as i32).unsigned_abs();
                for tc in (lo..=ta + tb).step_by(2) {
                    let c = Spin::new(tc);
                    for tm in c.twice_ms() {
                        let mut sum = BigRational::zero();
                        for ma in a.twice_ms() {
                            let mb = tm - ma;
                            if mb.abs() > tb as i32 {
                                continue;
                            }
                            sum += clebsch_gordan_exact(a, ma, b, mb, c, tm).unwrap().square().clone();
                        }
                        assert_eq!(sum, BigRational::one());
                    }
                }
            }
        }
    }

    /// {a b c; d e f} from a contraction of four CG coefficients.
    fn six_j_from_cg(t: [u32; 6]) -> f64 {
        let [j1, j2, j12, j3, j, j23] = t.map(Spin::new);
        let tm = j.twice_s as i32;
        let mut acc = 0.0;
        for m1 in j1.twice_ms() {
            for m2 in j2.twice_ms() {
                let m3 = tm - m1 - m2;
                if m3.abs() > j3.twice_s as i32 || (m1 + m2).abs() > j12.twice_s as i32 {
                    continue;
                }
                if (m2 + m3).abs() > j23.twice_s as i32 {
                    continue;
                }
                let cg = |a: Spin, ma: i32, b: Spin, mb: i32, c: Spin, mc: i32| {
                    for (l, m) in [(a, ma), (b, mb), (c, mc)] {
                        if (l.twice_s as i32 - m) % 2 != 0 || m.abs() > l.twice_s as i32 {
                            return 0.0;
                        }
                    }
                    clebsch_gordan(a, ma, b, mb, c, mc).unwrap()
                };
                acc += cg(j1, m1, j2, m2, j12, m1 + m2)
                    * cg(j12, m1 + m2, j3, m3, j, tm)
                    * cg(j2, m2, j3, m3, j23, m2 + m3)
                    * cg(j1, m1, j23, m2 + m3, j, tm);
            }
        }
        // recoupling coefficient = (-1)^(j1+j2+j3+j) sqrt((2j12+1)(2j23+1)) {j1 j2 j12; j3 j j23}
        let ph = (t[0] + t[1] + t[3] + t[4]) / 2;
        let sign = if ph % 2 == 0 { 1.0 } else { -1.0 };
        sign * acc / (((t[2] + 1) * (t[5] + 1)) as f64).sqrt()
    }

    #[test]
    fn six_j_examples() {
        let h = Spin::new(1);
        let v = six_j_exact([h, h, Spin::new(0), h, h, Spin::new(2)]);
        assert_eq!(v.to_rational(), Some(rat(1, 2)));
        assert!((six_j_from_cg([1, 1, 0, 1, 1, 2]) - 0.5).abs() < 1e-14);
        let v = six_j_exact([h, h, Spin::new(2), h, h, Spin::new(2)]);
        assert_eq!(v.to_rational(), Some(rat(1, 6)));
        assert!((six_j_from_cg([1, 1, 2, 1, 1, 2]) - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn six_j_matches_cg_contraction() {
        let labels = [
            [2, 2, 2, 2, 2, 2],
            [2, 2, 4, 2, 2, 2],
            [3, 3, 2, 3, 3, 4],
            [4, 4, 4, 4, 4, 0],
            [4, 2, 2, 4, 4, 6],
            [3, 1, 2, 2, 3, 1],
            [3, 1, 2, 2, 3, 3],
            [5, 5, 6, 5, 5, 2],
            [3, 3, 4, 3, 3, 2],
        ];
        for t in labels {
            let exact = six_j(t.map(Spin::new));
            let oracle = six_j_from_cg(t);
            assert!((exact - oracle).abs() < 1e-13, "{t:?}: {exact} vs {oracle}");
        }
    }

    #[test]
    fn six_j_zero_column_closed_form() {
        // {a b f; b a 0} = (-1)^(a+b+f)/sqrt((2a+1)(2b+1))
        for ta in 0..=6u32 {
            for tb in 0..=6u32 {
                let lo = (ta as i32 - tb as i32).unsigned_abs();
                for tf in (lo..=ta + tb).step_by(2) {
                    let v = six_j_exact([ta, tb, tf, tb, ta, 0].map(Spin::new));
                    let sign = if ((ta + tb + tf) / 2) % 2 == 0 { 1 } else { -1 };
                    assert_eq!(v.sign(), sign);
                    assert_eq!(v.square(), &rat(1, ((ta + 1) * (tb + 1)) as i64));
                }
            }
        }
    }

    #[test]
    fn six_j_orthogonality() {
        // Σ_x (2x+1)(2a+1) {j1 j2 a; j3 j x}{j1 j2 b; j3 j x} = δ_ab
        for t1 in 0..=6u32 {
            for t2 in 0..=6u32 {
                for t3 in 0..=6u32 {
                    for tj in 0..=6u32 {
                        let alist: Vec<u32> = (0..=12).filter(|&a| triangle(t1, t2, a) && triangle(t3, tj, a)).collect();
                        for &ta in &alist {
                            for &tb in &alist {
                                let mut acc = 0.0;
                                for tx in 0..=12u32 {
                                    let x = six_j([t1, t2, ta, t3, tj, tx].map(Spin::new));
                                    let y = six_j([t1, t2, tb, t3, tj, tx].map(Spin::new));
                                    acc += ((tx + 1) * (ta + 1)) as f64 * x * y;
                                }
                                let expect = if ta == tb { 1.0 } else { 0.0 };
                                assert!((acc - expect).abs() < 1e-12, "{:?}", (t1, t2, t3, tj, ta, tb));
                            }
                        }
                    }
                }
            }
        }
    }

    /// Compares the rounded value against the exact square: the only rounding
    /// step must leave a relative error below 1e-13.
    fn assert_precise(v: &SignedSqrt) {
        let x = v.to_f64();
        if v.is_zero() {
            assert_eq!(x, 0.0);
            return;
        }
        let xr = BigRational::from_float(x).unwrap();
        let rel = ((&xr * &xr - v.square()) / v.square()).abs();
        assert!(rel < rat(2, 10_000_000_000_000), "relative error too large");
        assert_eq!(x.signum() as i8, v.sign());
    }

    #[test]
    fn rounding_is_the_only_error_up_to_s6() {
        for ts in 0..=12u32 {
            let s = Spin::new(ts);
            for tl in (0..=2 * ts).step_by(2) {
                for tm1 in s.twice_ms() {
                    for tm in (-(tl as i32)..=tl as i32).step_by(2) {
                        if (tm1 - tm).abs() > ts as i32 {
                            continue;
                        }
                        let v = clebsch_gordan_exact(s, tm1 - tm, Spin::new(tl), tm, s, tm1).unwrap();
                        assert_precise(&v);
                    }
                }
                for tl2 in (0..=2 * ts).step_by(2) {
                    assert_precise(&six_j_exact([ts, ts, tl, ts, ts, tl2].map(Spin::new)));
                }
            }
        }
    }

    #[test]
    fn spin_operator_algebra() {
        for ts in 0..=8 {
            let s = Spin::new(ts);
            let ops = spin_operators(s).unwrap();
            let comm = &ops.sx * &ops.sy - &ops.sy * &ops.sx - &ops.sz * C64::i();
            assert!(comm.norm() < 1e-12);
            let comm = &ops.sy * &ops.sz - &ops.sz * &ops.sy - &ops.sx * C64::i();
            assert!(comm.norm() < 1e-12);
            let sv = s.value();
            let tr = (&ops.sz * &ops.sz).trace().re;
            assert!((tr - sv * (sv + 1.0) * (2.0 * sv + 1.0) / 3.0).abs() < 1e-12);
            let casimir = &ops.sx * &ops.sx + &ops.sy * &ops.sy + &ops.sz * &ops.sz;
            let id = CMat::identity(s.dim(), s.dim()) * C64::from(sv * (sv + 1.0));
            assert!((casimir - id).norm() < 1e-11);
        }
    }

    #[test]
    fn wigner_d_identity_and_half_flip() {
        for ts in 0..=6 {
            let s = Spin::new(ts);
            let d = wigner_d(s, 0.0, 0.0, 0.0).unwrap();
            assert!((d - CMat::identity(s.dim(), s.dim())).norm() < 1e-15);
        }
        let d = wigner_d(Spin::new(1), 0.0, std::f64::consts::PI, 0.0).unwrap();
        let want = CMat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0].map(C64::from));
        assert!((d - want).norm() < 1e-15);
    }

    fn expm_antihermitian(h: &CMat, t: f64) -> CMat {
        // exp(-i t h) for Hermitian h via eigen decomposition
        let eig = h.clone().symmetric_eigen();
        let u = &eig.eigenvectors;
        let ph = CMat::from_diagonal(&eig.eigenvalues.map(|e| C64::from_polar(1.0, -t * e)));
        u * ph * u.adjoint()
    }

    #[test]
    fn wigner_d_matches_exponentials() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for ts in 0..=6 {
            let s = Spin::new(ts);
            let ops = spin_operators(s).unwrap();
            for _ in 0..5 {
                let g = Euler::random(&mut rng);
                let want = expm_antihermitian(&ops.sz, g.alpha)
                    * expm_antihermitian(&ops.sy, g.beta)
                    * expm_antihermitian(&ops.sz, g.gamma);
                let d = wigner_d(s, g.alpha, g.beta, g.gamma).unwrap();
                assert!((d - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn wigner_d_group_law_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for ts in 0..=6 {
            let s = Spin::new(ts);
            for _ in 0..100 {
                let g1 = Euler::random(&mut rng);
                let g2 = Euler::random(&mut rng);
                let g = g1.compose(&g2);
                let d1 = wigner_d(s, g1.alpha, g1.beta, g1.gamma).unwrap();
                let d2 = wigner_d(s, g2.alpha, g2.beta, g2.gamma).unwrap();
                let d = wigner_d(s, g.alpha, g.beta, g.gamma).unwrap();
                assert!((&d1 * &d2 - &d).norm() < 1e-12);
                let id = CMat::identity(s.dim(), s.dim());
                assert!((d.adjoint() * &d - id).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn so3_matches_adjoint_action_on_spin_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ops = spin_operators(Spin::new(1)).unwrap();
        for _ in 0..10 {
            let g = Euler::random(&mut rng);
            let d = wigner_d(Spin::new(1), g.alpha, g.beta, g.gamma).unwrap();
            let r = g.so3();
            // D (n·σ) D† = (R n)·σ
            let n = [0.3, -0.5, 0.81];
            let lhs = &d * ops.along(n) * d.adjoint();
            let rn = [0, 1, 2].map(|i| (0..3).map(|k| r[i][k] * n[k]).sum::<f64>());
            assert!((lhs - ops.along(rn)).norm() < 1e-13);
        }
    }

    #[test]
    fn supported_spin_cap() {
        assert!(Spin::supported(DEFAULT_MAX_TWO_S).is_ok() || max_two_s() < DEFAULT_MAX_TWO_S);
        assert!(Spin::supported(10_000).is_err());
        assert_eq!(Spin::new(3).to_string(), "3/2");
        assert_eq!(Spin::new(3).index_of(-3), Some(3));
        assert_eq!(Spin::new(3).index_of(0), None);
    }
}
