//! Orthonormal real spherical harmonics, associated Legendre evaluation, and
//! spherical quadrature grids.
//!
//! Conventions: the sphere is parameterized by latitude `theta` in (-pi/2, pi/2)
//! and longitude `phi` in [0, 2pi); all latitudinal quadrature runs in
//! `x = sin(theta)`. The basis is fully orthonormal with no Condon-Shortley
//! phase, pinned so that `R_3^{2,cos} = sqrt(105/16pi) sin(theta) cos^2(theta) cos(2phi)`.

use crate::{Error, Result};

/// Longitudinal sector of a real harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Cosine,
    Sine,
}

/// Identifies one real spherical harmonic `R_l^{m,parity}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HarmonicIndex {
    pub l: usize,
    pub m: usize,
    pub parity: Parity,
}

impl HarmonicIndex {
    /// A validated index. Panics if `m > l` or a sine sector is requested at `m = 0`.
    pub fn new(l: usize, m: usize, parity: Parity) -> Self {
        assert!(m <= l, "harmonic order m={m} exceeds degree l={l}");
        assert!(
            !(parity == Parity::Sine && m == 0),
            "sine sector requires m >= 1"
        );
        Self { l, m, parity }
    }

    /// Position of this harmonic in the flat coefficient layout.
    ///
    /// Degree blocks are contiguous: block `l` starts at `l^2` and holds
    /// `(m=0), (1,cos), (1,sin), ..., (l,cos), (l,sin)`.
    pub fn flat(&self) -> usize {
        let offset = if self.m == 0 {
            0
        } else {
            2 * self.m - 1 + usize::from(self.parity == Parity::Sine)
        };
        self.l * self.l + offset
    }

    /// Inverse of [`HarmonicIndex::flat`].
    pub fn from_flat(flat: usize) -> Self {
        let l = (flat as f64).sqrt() as usize;
        let l = if (l + 1) * (l + 1) <= flat { l + 1 } else { l };
        let offset = flat - l * l;
        if offset == 0 {
            Self::new(l, 0, Parity::Cosine)
        } else {
            let m = offset.div_ceil(2);
            let parity = if offset % 2 == 1 {
                Parity::Cosine
            } else {
                Parity::Sine
            };
            Self::new(l, m, parity)
        }
    }

    /// All indices with degree `l <= band_limit`, in flat order. Count is `(L+1)^2`.
    pub fn all(band_limit: usize) -> impl Iterator<Item = HarmonicIndex> {
        (0..(band_limit + 1) * (band_limit + 1)).map(Self::from_flat)
    }

    /// Parity under the equatorial reflection `theta -> -theta`: even iff `l + m` is even.
    pub fn is_equator_even(&self) -> bool {
        (self.l + self.m).is_multiple_of(2)
    }
}

/// The kernel harmonic index `(3, 2, cos)` whose harmonic is
/// `sqrt(105/16pi) sin(theta) cos^2(theta) cos(2phi)`.
pub const KERNEL_INDEX: HarmonicIndex = HarmonicIndex {
    l: 3,
    m: 2,
    parity: Parity::Cosine,
};

/// Gauss-Legendre nodes and weights on (-1, 1), nodes increasing.
///
/// Newton iteration on `P_n` from Chebyshev initial guesses; the rule integrates
/// polynomials up to degree `2n - 1` exactly.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // guess for the i-th root counting from +1 downwards
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j as f64 + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Fully normalized associated Legendre functions `Pbar_l^m(x)` for
/// `l = m ..= lmax` at a single `x`, no Condon-Shortley phase, normalized so
/// that `int_{-1}^{1} Pbar^2 dx = 1`.
///
/// Upward three-term recurrence in `l` at fixed `m`; stable for `l <= 64`.
pub fn assoc_legendre_column(lmax: usize, m: usize, x: f64) -> Vec<f64> {
    debug_assert!(m <= lmax && x.abs() <= 1.0);
    let mut out = Vec::with_capacity(lmax - m + 1);
    let s = (1.0 - x * x).max(0.0).sqrt();
    // Pbar_m^m
    let mut pmm = std::f64::consts::FRAC_1_SQRT_2;
    for k in 1..=m {
        pmm *= s * ((2 * k + 1) as f64 / (2 * k) as f64).sqrt();
    }
    out.push(pmm);
    if lmax == m {
        return out;
    }
    let mut prev2 = pmm;
    let mut prev1 = ((2 * m + 3) as f64).sqrt() * x * pmm;
    out.push(prev1);
    for l in (m + 2)..=lmax {
        let lf = l as f64;
        let mf = m as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
            .sqrt();
        let p = a * (x * prev1 - b * prev2);
        out.push(p);
        prev2 = prev1;
        prev1 = p;
    }
    out
}

/// Same as [`assoc_legendre_column`] but also returns `d Pbar_l^m / dx`.
///
/// Uses `(1 - x^2) P' = e_{l,m} Pbar_{l-1}^m - l x Pbar_l^m` with
/// `e_{l,m} = sqrt((l^2 - m^2)(2l+1)/(2l-1))`; requires `|x| < 1`.
pub fn assoc_legendre_column_with_deriv(lmax: usize, m: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let vals = assoc_legendre_column(lmax, m, x);
    let omx2 = 1.0 - x * x;
    debug_assert!(omx2 > 0.0, "derivative recurrence needs |x| < 1");
    let mut derivs = Vec::with_capacity(vals.len());
    for (k, &p) in vals.iter().enumerate() {
        let l = m + k;
        let lf = l as f64;
        let mf = m as f64;
        let d = if l == m {
            // Pbar_m^m = C (1-x^2)^{m/2}: derivative is -m x / (1-x^2) * Pbar
            -mf * x / omx2 * p
        } else {
            let e = ((lf * lf - mf * mf) * (2.0 * lf + 1.0) / (2.0 * lf - 1.0)).sqrt();
            (e * vals[k - 1] - lf * x * p) / omx2
        };
        derivs.push(d);
    }
    (vals, derivs)
}

/// `Pbar_l^m(x)` normalized so `int_{-1}^{1} Pbar^2 dx = 1`, no Condon-Shortley phase.
pub fn assoc_legendre_normalized(l: usize, m: usize, x: f64) -> f64 {
    assert!(m <= l, "order m={m} exceeds degree l={l}");
    assert!(x.abs() <= 1.0, "argument out of [-1, 1]");
    *assoc_legendre_column(l, m, x).last().unwrap()
}

/// Azimuthal normalization: `R_l^0 = Pbar / sqrt(2pi)`, `R_l^{m>=1} = Pbar * trig(m phi) / sqrt(pi)`.
pub(crate) fn azimuthal_norm(m: usize) -> f64 {
    if m == 0 {
        1.0 / (2.0 * std::f64::consts::PI).sqrt()
    } else {
        1.0 / std::f64::consts::PI.sqrt()
    }
}

/// Value of the real orthonormal harmonic `R_l^{m,parity}` at latitude `theta`,
/// longitude `phi`.
pub fn eval_harmonic(idx: HarmonicIndex, theta: f64, phi: f64) -> f64 {
    let pbar = assoc_legendre_normalized(idx.l, idx.m, theta.sin());
    let trig = match idx.parity {
        Parity::Cosine => (idx.m as f64 * phi).cos(),
        Parity::Sine => (idx.m as f64 * phi).sin(),
    };
    pbar * trig * azimuthal_norm(idx.m)
}

/// Gauss-Legendre x uniform-longitude quadrature grid.
///
/// `nodes_x` are the Gauss-Legendre abscissae in `x = sin(theta)`; the
/// associated measure is `dsigma = dx dphi`, with longitude weight `2pi / n_phi`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub nodes_x: Vec<f64>,
    pub weights_x: Vec<f64>,
    pub phi_nodes: Vec<f64>,
}

impl Grid {
    /// Latitude of node `i`, `theta = asin(x_i)`.
    pub fn theta(&self, i: usize) -> f64 {
        self.nodes_x[i].asin()
    }

    /// Longitude quadrature weight.
    pub fn phi_weight(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n_phi as f64
    }

    /// Largest band limit whose analysis is exact on this grid: products of two
    /// harmonics of degree `<= L` need `2 n_theta - 1 >= 2L` and `n_phi >= 2L + 1`.
    pub fn max_exact_band_limit(&self) -> usize {
        let from_theta = (2 * self.n_theta - 1) / 2;
        let from_phi = (self.n_phi - 1) / 2;
        from_theta.min(from_phi)
    }

    /// Error unless analysis up to degree `band_limit` is exact on this grid.
    pub fn require_band_limit(&self, band_limit: usize) -> Result<()> {
        if self.max_exact_band_limit() < band_limit {
            return Err(Error::GridTooSmall {
                band_limit,
                need_theta: band_limit + 1,
                need_phi: 2 * band_limit + 1,
                got_theta: self.n_theta,
                got_phi: self.n_phi,
            });
        }
        Ok(())
    }
}

/// Grid sized for band limit `band_limit` with oversampling factor `pad >= 1`:
/// `n_theta = ceil(pad (L+1))`, `n_phi = max(ceil(pad (2L+1)), 4)`.
pub fn build_grid(band_limit: usize, pad: f64) -> Grid {
    assert!(pad >= 1.0, "pad must be >= 1");
    let n_theta = (pad * (band_limit + 1) as f64).ceil() as usize;
    let n_phi = ((pad * (2 * band_limit + 1) as f64).ceil() as usize).max(4);
    let (nodes_x, weights_x) = gauss_legendre(n_theta);
    let phi_nodes = (0..n_phi)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64)
        .collect();
    Grid {
        n_theta,
        n_phi,
        nodes_x,
        weights_x,
        phi_nodes,
    }
}

/// Pointwise samples of a scalar field on a [`Grid`], row-major over
/// `(latitude, longitude)`.
#[derive(Debug, Clone)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.n_theta * grid.n_phi],
        }
    }

    /// Build from a pointwise function of `(theta, phi)`.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.n_theta * grid.n_phi);
        for i in 0..grid.n_theta {
            let theta = grid.theta(i);
            for &phi in &grid.phi_nodes {
                values.push(f(theta, phi));
            }
        }
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn value(&self, i_theta: usize, j_phi: usize) -> f64 {
        self.values[i_theta * self.grid.n_phi + j_phi]
    }

    /// Surface integral by quadrature.
    pub fn integral(&self) -> f64 {
        let wphi = self.grid.phi_weight();
        let mut total = 0.0;
        for i in 0..self.grid.n_theta {
            let mut row = 0.0;
            for j in 0..self.grid.n_phi {
                row += self.value(i, j);
            }
            total += self.grid.weights_x[i] * row * wphi;
        }
        total
    }

    /// Spherical mean, `integral / 4pi`.
    pub fn mean(&self) -> f64 {
        self.integral() / (4.0 * std::f64::consts::PI)
    }

    /// Quadrature L2 norm on the sphere.
    pub fn norm(&self) -> f64 {
        let wphi = self.grid.phi_weight();
        let mut total = 0.0;
        for i in 0..self.grid.n_theta {
            let mut row = 0.0;
            for j in 0..self.grid.n_phi {
                let v = self.value(i, j);
                row += v * v;
            }
            total += self.grid.weights_x[i] * row * wphi;
        }
        total.sqrt()
    }
}
