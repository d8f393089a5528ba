//! Exact big-rational oracle for the closed-form constants of the reduction:
//! the spectral weights of `(Y*)^2`, the quartic integral, the resolvent-weighted
//! sums, and exact second-order bifurcation coefficients per model.
//!
//! Everything here is computed from first principles in arbitrary-precision
//! rational arithmetic: Legendre polynomials by recurrence, latitudinal
//! integrals of exact polynomials, and the exactly tabulated longitude
//! integrals of `cos^2(2 phi) cos(m phi)`. No floating point enters until a
//! caller asks for an `f64`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};

use crate::models::ModelSpec;

/// Arbitrary-precision rational number, always reduced with positive denominator.
pub type Rational = BigRational;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Nearest floating value of an exact rational.
pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("rational fits in f64")
}

fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Dense polynomial with rational coefficients, `coeffs[k]` multiplying `x^k`.
#[derive(Debug, Clone, PartialEq)]
struct RatPoly {
    coeffs: Vec<Rational>,
}

impl RatPoly {
    fn constant(c: Rational) -> Self {
        Self { coeffs: vec![c] }
    }

    fn x() -> Self {
        Self {
            coeffs: vec![Rational::zero(), Rational::one()],
        }
    }

    fn scale(&self, s: &Rational) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![Rational::zero(); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[k] += c;
        }
        for (k, c) in other.coeffs.iter().enumerate() {
            coeffs[k] += c;
        }
        Self { coeffs }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self { coeffs }
    }

    fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::constant(Rational::zero());
        }
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * rat_int(k as i64))
                .collect(),
        }
    }

    /// Exact integral over `[-1, 1]`; odd powers vanish.
    fn integrate_symmetric(&self) -> Rational {
        let mut total = Rational::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            if k % 2 == 0 {
                total += c * rat(2, (k + 1) as i64);
            }
        }
        total
    }
}

/// Legendre polynomial `P_l` with rational coefficients.
fn legendre_poly(l: usize) -> RatPoly {
    let mut p0 = RatPoly::constant(Rational::one());
    if l == 0 {
        return p0;
    }
    let x = RatPoly::x();
    let mut p1 = x.clone();
    for k in 1..l {
        // (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
        let next = x
            .mul(&p1)
            .scale(&rat((2 * k + 1) as i64, (k + 1) as i64))
            .add(&p0.scale(&rat(-(k as i64), (k + 1) as i64)));
        p0 = p1;
        p1 = next;
    }
    p1
}

/// Associated Legendre `P_l^m` for even `m` (no Condon-Shortley phase):
/// `(1 - x^2)^{m/2} d^m P_l / dx^m`, a polynomial since `m` is even.
fn assoc_legendre_poly(l: usize, m: usize) -> RatPoly {
    assert!(m.is_multiple_of(2), "polynomial form needs even m");
    assert!(m <= l);
    let mut d = legendre_poly(l);
    for _ in 0..m {
        d = d.derivative();
    }
    let one_minus_x2 = RatPoly {
        coeffs: vec![Rational::one(), Rational::zero(), -Rational::one()],
    };
    let mut envelope = RatPoly::constant(Rational::one());
    for _ in 0..m / 2 {
        envelope = envelope.mul(&one_minus_x2);
    }
    envelope.mul(&d)
}

/// `int_{-1}^{1} (P_l^m)^2 dx = 2 (l+m)! / ((2l+1)(l-m)!)`.
fn assoc_legendre_norm_sq(l: usize, m: usize) -> Rational {
    let mut num = BigInt::from(2);
    for k in (l - m + 1)..=(l + m) {
        num *= BigInt::from(k);
    }
    Rational::new(num, BigInt::from(2 * l + 1))
}

/// `(1/2pi) int_0^{2pi} cos^2(2 phi) cos(m phi) dphi`, exact.
fn phi_average(m: usize) -> Rational {
    match m {
        0 => rat(1, 2),
        4 => rat(1, 4),
        _ => Rational::zero(),
    }
}

/// One spectral weight of `(Y*)^2`: `c_{l,m}^2 = q / pi` together with the sign
/// of `c_{l,m}`.
#[derive(Debug, Clone)]
pub struct WeightEntry {
    pub l: usize,
    pub m: usize,
    /// `c_{l,m}^2 = q / pi`, `q >= 0`.
    pub q: Rational,
    /// Sign of `c_{l,m}` (0 when the weight vanishes).
    pub sign: i8,
}

impl WeightEntry {
    /// Floating value of `c_{l,m} = sign * sqrt(q / pi)`.
    pub fn coefficient_f64(&self) -> f64 {
        let q = self.q.to_f64().expect("weight fits in f64");
        f64::from(self.sign) * (q / std::f64::consts::PI).sqrt()
    }
}

/// The exact spectral weights of `(Y*)^2`, supported on
/// `l in {0, 2, 4, 6}`, `m in {0, 4}` (cosine sector).
#[derive(Debug, Clone)]
pub struct WeightTable {
    entries: Vec<WeightEntry>,
}

/// Decompose `(Y*)^2` exactly over the orthonormal real basis.
///
/// `(Y*)^2 = (105/16pi) x^2 (1-x^2)^2 cos^2(2 phi)` with `x = sin(theta)`; each
/// coefficient is a rational latitudinal integral against `P_l^m` times an
/// exactly tabulated longitude average, so every `c^2` is rational over pi.
pub fn compute_weight_table() -> WeightTable {
    let g = {
        // x^2 (1 - x^2)^2
        let x2 = RatPoly {
            coeffs: vec![Rational::zero(), Rational::zero(), Rational::one()],
        };
        let one_minus_x2 = RatPoly {
            coeffs: vec![Rational::one(), Rational::zero(), -Rational::one()],
        };
        x2.mul(&one_minus_x2).mul(&one_minus_x2)
    };
    let amplitude = rat(105, 16); // (Y*)^2 = amplitude / pi * g * cos^2(2 phi)

    let mut entries = Vec::new();
    for l in [0usize, 2, 4, 6] {
        for m in [0usize, 4] {
            if m > l {
                continue;
            }
            // c_{l,m} = (amplitude/pi) * 2pi * phi_average(m) * az_m * I / sqrt(norm_sq)
            // with az_0 = 1/sqrt(2pi), az_{m>=1} = 1/sqrt(pi); assembling c^2:
            //   m = 0: q = amplitude^2 * 2 * avg^2 * I^2 / norm_sq
            //   m > 0: q = amplitude^2 * 4 * avg^2 * I^2 / norm_sq
            let integral = g.mul(&assoc_legendre_poly(l, m)).integrate_symmetric();
            let avg = phi_average(m);
            let folding = if m == 0 { rat_int(2) } else { rat_int(4) };
            let q = &amplitude * &amplitude * folding * &avg * &avg * &integral * &integral
                / assoc_legendre_norm_sq(l, m);
            let sign = match integral.cmp(&Rational::zero()) {
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Equal => 0,
                std::cmp::Ordering::Less => -1,
            };
            entries.push(WeightEntry { l, m, q, sign });
        }
    }
    WeightTable { entries }
}

impl WeightTable {
    pub fn entries(&self) -> &[WeightEntry] {
        &self.entries
    }

    pub fn entry(&self, l: usize, m: usize) -> &WeightEntry {
        self.entries
            .iter()
            .find(|e| e.l == l && e.m == m)
            .expect("weight entry in table domain")
    }

    /// `sum_m q_{l,m}`.
    pub fn degree_sum(&self, l: usize) -> Rational {
        self.entries
            .iter()
            .filter(|e| e.l == l)
            .map(|e| e.q.clone())
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// Parseval sum over the whole table.
    pub fn total(&self) -> Rational {
        self.entries
            .iter()
            .map(|e| e.q.clone())
            .fold(Rational::zero(), |a, b| a + b)
    }
}

/// `iint (Y*)^4 dsigma = (sum of weights) / pi`, exact numerator over pi.
pub fn quartic_integral(table: &WeightTable) -> Rational {
    table.total()
}

/// `sum c^2 / (12 - l(l+1))`, exact value over pi.
pub fn resolvent_sum(table: &WeightTable) -> Rational {
    table
        .entries
        .iter()
        .map(|e| {
            let denom = rat_int(12 - (e.l * (e.l + 1)) as i64);
            &e.q / denom
        })
        .fold(Rational::zero(), |a, b| a + b)
}

/// Exact second-order bifurcation coefficient.
#[derive(Debug, Clone)]
pub enum Lambda2Exact {
    /// `lambda_2 = value / pi`.
    RationalOverPi(Rational),
    /// `lambda_2 = -(a + b mu) / (6 lambda* pi)` with `lambda*^2 = mu/(3 mu1)`;
    /// the radical is kept symbolic through `lambda_star_sq`.
    PolynomialForm {
        a: Rational,
        b: Rational,
        mu: Rational,
        lambda_star_sq: Rational,
    },
}

impl Lambda2Exact {
    pub fn to_f64(&self) -> f64 {
        match self {
            Self::RationalOverPi(r) => r.to_f64().unwrap() / std::f64::consts::PI,
            Self::PolynomialForm {
                a,
                b,
                mu,
                lambda_star_sq,
            } => {
                let lambda_star = lambda_star_sq.to_f64().unwrap().sqrt();
                -(a.to_f64().unwrap() + b.to_f64().unwrap() * mu.to_f64().unwrap())
                    / (6.0 * lambda_star * std::f64::consts::PI)
            }
        }
    }

    /// Exact sign, computed without floating point.
    pub fn sign(&self) -> i8 {
        match self {
            Self::RationalOverPi(r) => match r.cmp(&Rational::zero()) {
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Equal => 0,
                std::cmp::Ordering::Less => -1,
            },
            Self::PolynomialForm { a, b, mu, .. } => {
                // lambda* > 0, so the sign is -sign(a + b mu)
                let s = a + b * mu;
                match s.cmp(&Rational::zero()) {
                    std::cmp::Ordering::Greater => -1,
                    std::cmp::Ordering::Equal => 0,
                    std::cmp::Ordering::Less => 1,
                }
            }
        }
    }

    /// Human-readable exact form.
    pub fn describe(&self) -> String {
        match self {
            Self::RationalOverPi(r) => format!("({r})/pi"),
            Self::PolynomialForm { a, b, mu, .. } => {
                format!("-(({a}) + ({b})*mu)/(6*lambda_star*pi) at mu = {mu}")
            }
        }
    }
}

/// Exact `lambda_2` per model, assembled from the weight table:
///
/// * sine: `2 * quartic / pi`, sinh: `-2 * quartic / pi`;
/// * Liouville: `(2 * quartic - 72 * sum_{l in {4,6}} q/(12 - l(l+1))) / pi`;
/// * polynomial: `-(quartic + 6 mu * resolvent) / (6 lambda* pi)`.
pub fn lambda2_exact(table: &WeightTable, spec: &ModelSpec) -> Lambda2Exact {
    let quartic = quartic_integral(table);
    match spec {
        ModelSpec::Sine => Lambda2Exact::RationalOverPi(rat_int(2) * quartic),
        ModelSpec::Sinh => Lambda2Exact::RationalOverPi(rat_int(-2) * quartic),
        ModelSpec::Liouville => {
            let high: Rational = table
                .entries
                .iter()
                .filter(|e| e.l >= 4)
                .map(|e| &e.q / rat_int(12 - (e.l * (e.l + 1)) as i64))
                .fold(Rational::zero(), |a, b| a + b);
            Lambda2Exact::RationalOverPi(rat_int(2) * quartic - rat_int(72) * high)
        }
        ModelSpec::Polynomial { mu, mu1 } => {
            let mu_r = Rational::from_f64(*mu).expect("finite mu");
            let mu1_r = Rational::from_f64(*mu1).expect("finite mu1");
            Lambda2Exact::PolynomialForm {
                a: quartic,
                b: rat_int(6) * resolvent_sum(table),
                lambda_star_sq: &mu_r / (rat_int(3) * &mu1_r),
                mu: mu_r,
            }
        }
    }
}

/// Exact coefficients of the Liouville second-order correction
/// `psi_2 = -6 sum_{l in {4,6}} c_{l,m}/(12 - l(l+1)) R_l^m`, as
/// `(l, m, coefficient)` floats derived from the exact weights.
pub fn liouville_psi2_coefficients(table: &WeightTable) -> Vec<(usize, usize, f64)> {
    table
        .entries
        .iter()
        .filter(|e| e.l >= 4)
        .map(|e| {
            let factor = -6.0 / (12.0 - (e.l * (e.l + 1)) as f64);
            (e.l, e.m, factor * e.coefficient_f64())
        })
        .collect()
}
