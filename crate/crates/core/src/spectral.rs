//! Band-limited field algebra on the sphere: analysis/synthesis, Laplace-Beltrami,
//! Jacobian bracket, inner products, and the tetrahedral-invariance projector.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen, Vector3};
use rayon::prelude::*;

use crate::sphharm::{
    assoc_legendre_column, assoc_legendre_column_with_deriv, azimuthal_norm, Grid, GridField,
    HarmonicIndex, Parity, KERNEL_INDEX,
};
use crate::{Error, Result};

/// Maximum fraction of field energy allowed above the band limit when a
/// transcendental nonlinearity is truncated.
pub const TAIL_ENERGY_LIMIT: f64 = 1e-10;

/// A band-limited scalar field on the sphere, stored as real orthonormal
/// harmonic coefficients in flat layout (see [`HarmonicIndex::flat`]).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    band_limit: usize,
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(band_limit: usize) -> Self {
        Self {
            band_limit,
            coeffs: vec![0.0; (band_limit + 1) * (band_limit + 1)],
        }
    }

    pub fn from_coeffs(band_limit: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), (band_limit + 1) * (band_limit + 1));
        Self { band_limit, coeffs }
    }

    /// The kernel harmonic `Y*` as a unit coefficient vector.
    pub fn kernel(band_limit: usize) -> Self {
        assert!(band_limit >= 3);
        let mut u = Self::zeros(band_limit);
        u.set(KERNEL_INDEX, 1.0);
        u
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn get(&self, idx: HarmonicIndex) -> f64 {
        self.coeffs[idx.flat()]
    }

    pub fn set(&mut self, idx: HarmonicIndex, value: f64) {
        self.coeffs[idx.flat()] = value;
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: f64, other: &SpectralField) {
        assert_eq!(self.band_limit, other.band_limit, "band limit mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    /// Copy into another band limit, zero-padding or truncating degrees.
    pub fn resize(&self, band_limit: usize) -> SpectralField {
        let mut out = SpectralField::zeros(band_limit);
        let n = self.coeffs.len().min(out.coeffs.len());
        out.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        out
    }

    /// Norm of the part with equator-even parity (`l + m` even).
    pub fn equator_even_norm(&self) -> f64 {
        HarmonicIndex::all(self.band_limit)
            .filter(|idx| idx.is_equator_even())
            .map(|idx| self.get(idx).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Pointwise value at an arbitrary point, by direct summation.
    pub fn eval_at(&self, theta: f64, phi: f64) -> f64 {
        let x = theta.sin();
        let mut total = 0.0;
        for m in 0..=self.band_limit {
            let col = assoc_legendre_column(self.band_limit, m, x);
            let (cm, sm) = ((m as f64 * phi).cos(), (m as f64 * phi).sin());
            let az = azimuthal_norm(m);
            for (k, pbar) in col.iter().enumerate() {
                let l = m + k;
                let a = self.get(HarmonicIndex::new(l, m, Parity::Cosine));
                total += az * pbar * a * cm;
                if m > 0 {
                    let b = self.get(HarmonicIndex::new(l, m, Parity::Sine));
                    total += az * pbar * b * sm;
                }
            }
        }
        total
    }

    /// Value and first/second derivatives with respect to `(theta, phi)` at a
    /// point. Requires `|sin theta| < 1` (away from the poles).
    pub fn eval_jet(&self, theta: f64, phi: f64) -> PointJet {
        let x = theta.sin();
        let c = theta.cos();
        let omx2 = 1.0 - x * x;
        let mut jet = PointJet::default();
        for m in 0..=self.band_limit {
            let (vals, dx) = assoc_legendre_column_with_deriv(self.band_limit, m, x);
            let mf = m as f64;
            let (cm, sm) = ((mf * phi).cos(), (mf * phi).sin());
            let az = azimuthal_norm(m);
            for (k, (&p, &pd)) in vals.iter().zip(&dx).enumerate() {
                let l = m + k;
                let lf = l as f64;
                // second x-derivative from the associated Legendre ODE
                let pdd = (2.0 * x * pd - (lf * (lf + 1.0) - mf * mf / omx2) * p) / omx2;
                let p_t = c * pd;
                let p_tt = -x * pd + c * c * pdd;
                let a = self.get(HarmonicIndex::new(l, m, Parity::Cosine));
                let b = if m > 0 {
                    self.get(HarmonicIndex::new(l, m, Parity::Sine))
                } else {
                    0.0
                };
                let ang = a * cm + b * sm;
                let ang_p = mf * (-a * sm + b * cm);
                let ang_pp = -mf * mf * ang;
                jet.value += az * p * ang;
                jet.d_theta += az * p_t * ang;
                jet.d_phi += az * p * ang_p;
                jet.d_theta_theta += az * p_tt * ang;
                jet.d_theta_phi += az * p_t * ang_p;
                jet.d_phi_phi += az * p * ang_pp;
            }
        }
        jet
    }
}

/// Value and derivatives of a field at one point.
#[derive(Debug, Default, Clone, Copy)]
pub struct PointJet {
    pub value: f64,
    pub d_theta: f64,
    pub d_phi: f64,
    pub d_theta_theta: f64,
    pub d_theta_phi: f64,
    pub d_phi_phi: f64,
}

/// Coefficient-space inner product; equals the L2 inner product on the sphere.
pub fn inner(u: &SpectralField, v: &SpectralField) -> f64 {
    assert_eq!(u.band_limit, v.band_limit, "band limit mismatch");
    u.coeffs.iter().zip(&v.coeffs).map(|(a, b)| a * b).sum()
}

/// Laplace-Beltrami operator: multiplies each degree-`l` coefficient by `-l(l+1)`.
pub fn laplacian(u: &SpectralField) -> SpectralField {
    let mut out = u.clone();
    for l in 0..=u.band_limit {
        let eig = -((l * (l + 1)) as f64);
        for flat in l * l..(l + 1) * (l + 1) {
            out.coeffs[flat] *= eig;
        }
    }
    out
}

/// Precomputed Legendre and trigonometric tables binding a [`Grid`] to a band limit.
pub struct Transform {
    grid: Grid,
    band_limit: usize,
    /// pbar[m][i * (L - m + 1) + (l - m)] = Pbar_l^m(x_i)
    pbar: Vec<Vec<f64>>,
    /// d/dtheta tables, same layout
    pbar_dtheta: Vec<Vec<f64>>,
    cos_m: Vec<Vec<f64>>,
    sin_m: Vec<Vec<f64>>,
}

impl Transform {
    /// Errors unless the grid analyzes band limit `band_limit` exactly.
    pub fn new(grid: &Grid, band_limit: usize) -> Result<Self> {
        grid.require_band_limit(band_limit)?;
        let mut pbar = Vec::with_capacity(band_limit + 1);
        let mut pbar_dtheta = Vec::with_capacity(band_limit + 1);
        for m in 0..=band_limit {
            let stride = band_limit - m + 1;
            let mut vals = vec![0.0; grid.n_theta * stride];
            let mut dths = vec![0.0; grid.n_theta * stride];
            for (i, &x) in grid.nodes_x.iter().enumerate() {
                let (v, dx) = assoc_legendre_column_with_deriv(band_limit, m, x);
                let cos_theta = (1.0 - x * x).sqrt();
                for k in 0..stride {
                    vals[i * stride + k] = v[k];
                    dths[i * stride + k] = cos_theta * dx[k];
                }
            }
            pbar.push(vals);
            pbar_dtheta.push(dths);
        }
        let mut cos_m = Vec::with_capacity(band_limit + 1);
        let mut sin_m = Vec::with_capacity(band_limit + 1);
        for m in 0..=band_limit {
            cos_m.push(
                grid.phi_nodes
                    .iter()
                    .map(|&p| (m as f64 * p).cos())
                    .collect(),
            );
            sin_m.push(
                grid.phi_nodes
                    .iter()
                    .map(|&p| (m as f64 * p).sin())
                    .collect(),
            );
        }
        Ok(Self {
            grid: grid.clone(),
            band_limit,
            pbar,
            pbar_dtheta,
            cos_m,
            sin_m,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    /// L2 projection of grid samples onto the harmonics with `l <= band_limit`.
    pub fn analyze(&self, f: &GridField) -> SpectralField {
        let (nt, np) = (self.grid.n_theta, self.grid.n_phi);
        assert_eq!(f.values.len(), nt * np, "grid/field size mismatch");
        let lmax = self.band_limit;
        // longitude sums per node and order
        let mut four_c = vec![0.0; nt * (lmax + 1)];
        let mut four_s = vec![0.0; nt * (lmax + 1)];
        for i in 0..nt {
            let row = &f.values[i * np..(i + 1) * np];
            for m in 0..=lmax {
                let (cm, sm) = (&self.cos_m[m], &self.sin_m[m]);
                let mut c = 0.0;
                let mut s = 0.0;
                for j in 0..np {
                    c += row[j] * cm[j];
                    s += row[j] * sm[j];
                }
                four_c[i * (lmax + 1) + m] = c;
                four_s[i * (lmax + 1) + m] = s;
            }
        }
        let wphi = self.grid.phi_weight();
        let mut out = SpectralField::zeros(lmax);
        for m in 0..=lmax {
            let stride = lmax - m + 1;
            let az = azimuthal_norm(m) * wphi;
            let tab = &self.pbar[m];
            for k in 0..stride {
                let l = m + k;
                let mut a = 0.0;
                let mut b = 0.0;
                for i in 0..nt {
                    let w = self.grid.weights_x[i] * tab[i * stride + k];
                    a += w * four_c[i * (lmax + 1) + m];
                    b += w * four_s[i * (lmax + 1) + m];
                }
                out.set(HarmonicIndex::new(l, m, Parity::Cosine), az * a);
                if m > 0 {
                    out.set(HarmonicIndex::new(l, m, Parity::Sine), az * b);
                }
            }
        }
        out
    }

    /// Pointwise sum of the harmonic series on the grid.
    pub fn synthesize(&self, u: &SpectralField) -> GridField {
        self.synthesize_tables(u, &self.pbar)
    }

    /// Gradient fields `(df/dtheta, df/dphi)` on the grid, both exact for
    /// band-limited input.
    pub fn synthesize_gradients(&self, u: &SpectralField) -> (GridField, GridField) {
        let d_theta = self.synthesize_tables(u, &self.pbar_dtheta);
        let mut v = SpectralField::zeros(u.band_limit);
        for m in 1..=u.band_limit.min(self.band_limit) {
            for l in m..=u.band_limit {
                let a = u.get(HarmonicIndex::new(l, m, Parity::Cosine));
                let b = u.get(HarmonicIndex::new(l, m, Parity::Sine));
                v.set(HarmonicIndex::new(l, m, Parity::Cosine), m as f64 * b);
                v.set(HarmonicIndex::new(l, m, Parity::Sine), -(m as f64) * a);
            }
        }
        let d_phi = self.synthesize_tables(&v, &self.pbar);
        (d_theta, d_phi)
    }

    fn synthesize_tables(&self, u: &SpectralField, tables: &[Vec<f64>]) -> GridField {
        assert!(
            u.band_limit <= self.band_limit,
            "field band limit {} exceeds transform band limit {}",
            u.band_limit,
            self.band_limit
        );
        let (nt, np) = (self.grid.n_theta, self.grid.n_phi);
        let lmax = self.band_limit;
        let mut out = GridField::zeros(&self.grid);
        let mut uc = vec![0.0; lmax + 1];
        let mut us = vec![0.0; lmax + 1];
        for i in 0..nt {
            for m in 0..=lmax {
                let stride = lmax - m + 1;
                let az = azimuthal_norm(m);
                let tab = &tables[m];
                let mut a = 0.0;
                let mut b = 0.0;
                if m <= u.band_limit {
                    for l in m..=u.band_limit {
                        let p = tab[i * stride + (l - m)];
                        a += p * u.get(HarmonicIndex::new(l, m, Parity::Cosine));
                        if m > 0 {
                            b += p * u.get(HarmonicIndex::new(l, m, Parity::Sine));
                        }
                    }
                }
                uc[m] = az * a;
                us[m] = az * b;
            }
            for j in 0..np {
                let mut v = 0.0;
                for m in 0..=lmax {
                    v += uc[m] * self.cos_m[m][j];
                    if m > 0 {
                        v += us[m] * self.sin_m[m][j];
                    }
                }
                out.values[i * np + j] = v;
            }
        }
        out
    }
}

/// L2 projection onto harmonics with `l <= band_limit`; exact when the input is
/// band-limited to `band_limit` and the grid satisfies the pad rule.
pub fn analyze(f: &GridField, band_limit: usize) -> Result<SpectralField> {
    Ok(Transform::new(&f.grid, band_limit)?.analyze(f))
}

/// Pointwise sum of the harmonic series on the given grid.
pub fn synthesize(u: &SpectralField, grid: &Grid) -> GridField {
    Transform::new(grid, u.band_limit)
        .expect("grid too small to synthesize this band limit")
        .synthesize(u)
}

/// Surface Jacobian bracket `J(f, g) = (dphi f dtheta g - dtheta f dphi g)/cos(theta)`,
/// evaluated pointwise on the grid. The Gauss-Legendre nodes exclude the poles,
/// so the division is safe.
pub fn jacobian_bracket(f: &SpectralField, g: &SpectralField, grid: &Grid) -> GridField {
    let lmax = f.band_limit.max(g.band_limit);
    let tf = Transform::new(grid, lmax).expect("grid too small for bracket operands");
    let (f_t, f_p) = tf.synthesize_gradients(&f.resize(lmax));
    let (g_t, g_p) = tf.synthesize_gradients(&g.resize(lmax));
    let mut out = GridField::zeros(grid);
    let np = grid.n_phi;
    for i in 0..grid.n_theta {
        let inv_cos = 1.0 / (1.0 - grid.nodes_x[i] * grid.nodes_x[i]).sqrt();
        for j in 0..np {
            let k = i * np + j;
            out.values[k] =
                (f_p.values[k] * g_t.values[k] - f_t.values[k] * g_p.values[k]) * inv_cos;
        }
    }
    out
}

/// Fraction of quadrature-resolvable energy lying above `band_limit`.
///
/// The grid must resolve at least one extra degree; pad-2 grids resolve `2L`.
pub fn tail_energy_ratio(f: &GridField, band_limit: usize) -> Result<f64> {
    let resolvable = f.grid.max_exact_band_limit().min(2 * band_limit);
    if resolvable <= band_limit {
        return Err(Error::GridTooSmall {
            band_limit: band_limit + 1,
            need_theta: band_limit + 2,
            need_phi: 2 * band_limit + 3,
            got_theta: f.grid.n_theta,
            got_phi: f.grid.n_phi,
        });
    }
    let u = Transform::new(&f.grid, resolvable)?.analyze(f);
    let total: f64 = u.coeffs.iter().map(|c| c * c).sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let head: f64 = u.coeffs[..(band_limit + 1) * (band_limit + 1)]
        .iter()
        .map(|c| c * c)
        .sum();
    Ok((total - head) / total)
}

/// Orthogonal projector onto the subspace invariant under the 12-element
/// tetrahedral rotation group, stored as one block per harmonic degree.
pub struct TetraProjector {
    band_limit: usize,
    blocks: Vec<DMatrix<f64>>,
    group_elements: Vec<Matrix3<f64>>,
}

fn rotation_about(axis: Vector3<f64>, angle: f64) -> Matrix3<f64> {
    let n = axis.normalize();
    let (s, c) = angle.sin_cos();
    let cross = Matrix3::new(0.0, -n.z, n.y, n.z, 0.0, -n.x, -n.y, n.x, 0.0);
    Matrix3::identity() * c + cross * s + n * n.transpose() * (1.0 - c)
}

fn close_group(generators: &[Matrix3<f64>], cap: usize) -> Vec<Matrix3<f64>> {
    let mut elements = vec![Matrix3::identity()];
    let contains =
        |m: &Matrix3<f64>, list: &[Matrix3<f64>]| list.iter().any(|e| (m - e).abs().max() < 1e-10);
    let mut changed = true;
    while changed && elements.len() <= cap {
        changed = false;
        let snapshot = elements.clone();
        for g in generators {
            for e in &snapshot {
                let prod = g * e;
                if !contains(&prod, &elements) {
                    elements.push(prod);
                    changed = true;
                }
            }
        }
    }
    elements
}

/// Evaluate every harmonic with `l <= band_limit` at the point with
/// `x = sin(theta)` and longitude `phi`, into `out` (flat layout).
fn eval_basis_at(band_limit: usize, x: f64, phi: f64, out: &mut [f64]) {
    for m in 0..=band_limit {
        let col = assoc_legendre_column(band_limit, m, x);
        let az = azimuthal_norm(m);
        let (cm, sm) = ((m as f64 * phi).cos(), (m as f64 * phi).sin());
        for (k, &p) in col.iter().enumerate() {
            let l = m + k;
            out[HarmonicIndex::new(l, m, Parity::Cosine).flat()] = az * p * cm;
            if m > 0 {
                out[HarmonicIndex::new(l, m, Parity::Sine).flat()] = az * p * sm;
            }
        }
    }
}

/// Build the tetrahedral projector at the given band limit.
///
/// The group is generated by the half-turn about the polar axis and the
/// three-fold rotation about `(sqrt 2, 0, 1)/sqrt 3` (a vertex of the
/// tetrahedron whose vertices are the maxima of `Y*`). Per-degree rotation
/// matrices are computed numerically by analyzing rotated harmonics; blocks are
/// group averages, re-idempotentized by snapping eigenvalues to {0, 1}.
pub fn build_tetra_projector(band_limit: usize) -> Result<TetraProjector> {
    let r2 = rotation_about(Vector3::new(0.0, 0.0, 1.0), std::f64::consts::PI);
    let c3 = rotation_about(
        Vector3::new(2f64.sqrt(), 0.0, 1.0),
        2.0 * std::f64::consts::PI / 3.0,
    );
    let group = close_group(&[r2, c3], 24);
    if group.len() != 12 {
        return Err(Error::GroupClosure { found: group.len() });
    }

    let grid = crate::sphharm::build_grid(band_limit, 1.0);
    let nb = (band_limit + 1) * (band_limit + 1);
    let n_nodes = grid.n_theta * grid.n_phi;

    // analysis operator: row k holds R_k at each node, quadrature-weighted
    let wphi = grid.phi_weight();
    let mut analysis = DMatrix::<f64>::zeros(nb, n_nodes);
    let mut scratch = vec![0.0; nb];
    for i in 0..grid.n_theta {
        let w = grid.weights_x[i] * wphi;
        for j in 0..grid.n_phi {
            eval_basis_at(band_limit, grid.nodes_x[i], grid.phi_nodes[j], &mut scratch);
            let col = i * grid.n_phi + j;
            for k in 0..nb {
                analysis[(k, col)] = scratch[k] * w;
            }
        }
    }

    // average of the coefficient-rotation matrices D(g), flat layout
    let averaged: DMatrix<f64> = group
        .par_iter()
        .map(|g| {
            let ginv = g.transpose();
            let mut rotated = DMatrix::<f64>::zeros(n_nodes, nb);
            let mut vals = vec![0.0; nb];
            for i in 0..grid.n_theta {
                let x = grid.nodes_x[i];
                let cos_theta = (1.0 - x * x).sqrt();
                for j in 0..grid.n_phi {
                    let phi = grid.phi_nodes[j];
                    let p = Vector3::new(cos_theta * phi.cos(), cos_theta * phi.sin(), x);
                    let q = ginv * p;
                    eval_basis_at(band_limit, q.z.clamp(-1.0, 1.0), q.y.atan2(q.x), &mut vals);
                    let row = i * grid.n_phi + j;
                    for k in 0..nb {
                        rotated[(row, k)] = vals[k];
                    }
                }
            }
            &analysis * rotated
        })
        .reduce(|| DMatrix::<f64>::zeros(nb, nb), |a, b| a + b)
        / group.len() as f64;

    // per-degree blocks: symmetrize and snap eigenvalues to {0, 1}
    let mut blocks = Vec::with_capacity(band_limit + 1);
    for l in 0..=band_limit {
        let dim = 2 * l + 1;
        let raw = averaged.view((l * l, l * l), (dim, dim)).into_owned();
        let sym = (&raw + raw.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let mut block = DMatrix::<f64>::zeros(dim, dim);
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda >= 0.5 {
                let v = eig.eigenvectors.column(k);
                block += v * v.transpose();
            }
        }
        blocks.push(block);
    }

    Ok(TetraProjector {
        band_limit,
        blocks,
        group_elements: group,
    })
}

impl TetraProjector {
    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn block(&self, l: usize) -> &DMatrix<f64> {
        &self.blocks[l]
    }

    pub fn group_elements(&self) -> &[Matrix3<f64>] {
        &self.group_elements
    }

    /// Rank of the degree-`l` block (trace of an orthogonal projector).
    pub fn rank(&self, l: usize) -> usize {
        self.blocks[l].trace().round() as usize
    }

    /// Orthonormal basis of the invariant subspace. Each field is supported on a
    /// single degree; the `l = 3` vector is oriented along `+Y*`.
    pub fn invariant_basis(&self) -> Vec<SpectralField> {
        self.invariant_basis_by_degree()
            .into_iter()
            .map(|(_, u)| u)
            .collect()
    }

    /// Like [`TetraProjector::invariant_basis`], tagging each vector with its degree.
    pub fn invariant_basis_by_degree(&self) -> Vec<(usize, SpectralField)> {
        let mut basis = Vec::new();
        for l in 0..=self.band_limit {
            let eig = SymmetricEigen::new(self.blocks[l].clone());
            for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
                if lambda >= 0.5 {
                    let mut u = SpectralField::zeros(self.band_limit);
                    for (r, &v) in eig.eigenvectors.column(k).iter().enumerate() {
                        u.coeffs[l * l + r] = v;
                    }
                    if l == 3 && u.get(KERNEL_INDEX) < 0.0 {
                        u.scale(-1.0);
                    }
                    basis.push((l, u));
                }
            }
        }
        basis
    }
}

/// Blockwise application of the projector.
pub fn project_tetra(projector: &TetraProjector, u: &SpectralField) -> SpectralField {
    assert_eq!(projector.band_limit, u.band_limit(), "band limit mismatch");
    let mut out = SpectralField::zeros(u.band_limit());
    for l in 0..=u.band_limit() {
        let dim = 2 * l + 1;
        let block = &projector.blocks[l];
        for r in 0..dim {
            let mut acc = 0.0;
            for c in 0..dim {
                acc += block[(r, c)] * u.coeffs[l * l + c];
            }
            out.coeffs[l * l + r] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphharm::build_grid;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(band_limit: usize, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..(band_limit + 1) * (band_limit + 1))
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        SpectralField::from_coeffs(band_limit, coeffs)
    }

    fn ystar_squared_coeffs() -> SpectralField {
        let grid = build_grid(12, 1.0);
        let ystar = SpectralField::kernel(12);
        let tf = Transform::new(&grid, 12).unwrap();
        let f = tf.synthesize(&ystar);
        let mut sq = f.clone();
        for v in &mut sq.values {
            *v *= *v;
        }
        tf.analyze(&sq)
    }

    #[test]
    fn analyze_recovers_kernel_unit_vector() {
        let grid = build_grid(3, 1.0);
        let ystar = SpectralField::kernel(3);
        let back = analyze(&synthesize(&ystar, &grid), 3).unwrap();
        for idx in HarmonicIndex::all(3) {
            let expect = if idx == KERNEL_INDEX { 1.0 } else { 0.0 };
            assert!((back.get(idx) - expect).abs() < 1e-13, "{idx:?}");
        }
    }

    #[test]
    fn analyze_constant_field() {
        let grid = build_grid(4, 1.0);
        let f = GridField::from_fn(&grid, |_, _| 1.0);
        let u = analyze(&f, 4).unwrap();
        let expect = (4.0 * std::f64::consts::PI).sqrt();
        assert_relative_eq!(
            u.get(HarmonicIndex::new(0, 0, Parity::Cosine)),
            expect,
            epsilon = 1e-13
        );
        for idx in HarmonicIndex::all(4).skip(1) {
            assert!(u.get(idx).abs() < 1e-13);
        }
    }

    #[test]
    fn analyze_rejects_undersized_grid() {
        let grid = build_grid(4, 1.0);
        let f = GridField::from_fn(&grid, |_, _| 1.0);
        assert!(matches!(analyze(&f, 8), Err(Error::GridTooSmall { .. })));
    }

    #[test]
    fn round_trip_random_field() {
        for band_limit in [0usize, 1, 2, 4, 8, 12, 16] {
            let u = random_field(band_limit, 3 + band_limit as u64);
            let grid = build_grid(band_limit, 1.0);
            let back = analyze(&synthesize(&u, &grid), band_limit).unwrap();
            let mut diff = back;
            diff.add_scaled(-1.0, &u);
            assert!(diff.norm() < 1e-12, "band limit {band_limit}");
        }
    }

    #[test]
    fn parseval_against_quadrature() {
        let u = random_field(10, 5);
        let grid = build_grid(10, 1.5);
        let f = synthesize(&u, &grid);
        assert!((u.norm().powi(2) - f.norm().powi(2)).abs() < 1e-12 * u.norm().powi(2));
    }

    #[test]
    fn kernel_minimum_at_quarter_turn() {
        let ystar = SpectralField::kernel(3);
        let theta_star = (1.0 / 2f64.sqrt()).atan();
        let max = ystar.eval_at(theta_star, 0.0);
        let val = ystar.eval_at(theta_star, std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(val, -max, epsilon = 1e-14);
    }

    #[test]
    fn laplacian_eigenfunction_and_constant() {
        let ystar = SpectralField::kernel(5);
        let mut lap = laplacian(&ystar);
        lap.add_scaled(12.0, &ystar);
        assert!(lap.norm() < 1e-15);

        let mut c = SpectralField::zeros(5);
        c.set(HarmonicIndex::new(0, 0, Parity::Cosine), 2.5);
        assert_eq!(laplacian(&c).norm(), 0.0);
    }

    #[test]
    fn laplacian_integrates_to_zero() {
        let u = random_field(9, 8);
        let grid = build_grid(9, 1.0);
        let f = synthesize(&laplacian(&u), &grid);
        assert!(f.integral().abs() < 1e-12 * u.norm());
    }

    #[test]
    fn bracket_antisymmetry_and_constants() {
        let f = random_field(6, 13);
        let grid = build_grid(6, 2.0);
        let jff = jacobian_bracket(&f, &f, &grid);
        assert!(jff.norm() < 1e-11 * f.norm().powi(2));

        let mut c = SpectralField::zeros(6);
        c.set(HarmonicIndex::new(0, 0, Parity::Cosine), 3.0);
        let jfc = jacobian_bracket(&f, &c, &grid);
        assert!(jfc.norm() < 1e-12);
    }

    #[test]
    fn bracket_of_kernel_with_its_laplacian_vanishes() {
        let ystar = SpectralField::kernel(3);
        let grid = build_grid(3, 2.0);
        let j = jacobian_bracket(&ystar, &laplacian(&ystar), &grid);
        assert!(j.norm() < 1e-11);
    }

    #[test]
    fn bracket_matches_finite_differences() {
        // independent pointwise check of the gradient synthesis
        let f = random_field(5, 21);
        let g = random_field(5, 22);
        let grid = build_grid(5, 2.0);
        let j = jacobian_bracket(&f, &g, &grid);
        let h = 1e-6;
        for (i, jj) in [(2usize, 3usize), (7, 11), (4, 0)] {
            let theta = grid.theta(i);
            let phi = grid.phi_nodes[jj];
            let ft = (f.eval_at(theta + h, phi) - f.eval_at(theta - h, phi)) / (2.0 * h);
            let fp = (f.eval_at(theta, phi + h) - f.eval_at(theta, phi - h)) / (2.0 * h);
            let gt = (g.eval_at(theta + h, phi) - g.eval_at(theta - h, phi)) / (2.0 * h);
            let gp = (g.eval_at(theta, phi + h) - g.eval_at(theta, phi - h)) / (2.0 * h);
            let expect = (fp * gt - ft * gp) / theta.cos();
            assert!(
                (j.value(i, jj) - expect).abs() < 1e-5,
                "({i},{jj}): {} vs {expect}",
                j.value(i, jj)
            );
        }
    }

    #[test]
    fn inner_products() {
        let ystar = SpectralField::kernel(4);
        assert_eq!(inner(&ystar, &ystar), 1.0);
        let mut r40 = SpectralField::zeros(4);
        r40.set(HarmonicIndex::new(4, 0, Parity::Cosine), 1.0);
        assert_eq!(inner(&ystar, &r40), 0.0);
    }

    #[test]
    fn quartic_integral_by_parseval() {
        let w = ystar_squared_coeffs();
        let expect = 315.0 / (572.0 * std::f64::consts::PI);
        assert!((inner(&w, &w) - expect).abs() < 1e-12);
    }

    #[test]
    fn kernel_square_spectrum_structure() {
        let w = ystar_squared_coeffs();
        // c at (2,0) vanishes identically
        assert!(w.get(HarmonicIndex::new(2, 0, Parity::Cosine)).abs() < 1e-13);
        for idx in HarmonicIndex::all(12) {
            let c = w.get(idx);
            let supported = matches!(
                (idx.l, idx.m, idx.parity),
                (0 | 2 | 4 | 6, 0 | 4, Parity::Cosine)
            );
            if !supported {
                assert!(c.abs() < 1e-13, "{idx:?} = {c}");
            }
        }
    }

    #[test]
    fn kernel_cube_is_odd() {
        let grid = build_grid(9, 2.0);
        let ystar = SpectralField::kernel(9);
        let f = synthesize(&ystar, &grid);
        let mut cube = f.clone();
        for v in &mut cube.values {
            *v = v.powi(3);
        }
        assert!(cube.integral().abs() < 1e-13);
        let u = analyze(&cube, 9).unwrap();
        for idx in HarmonicIndex::all(9) {
            if idx.l % 2 == 0 {
                assert!(u.get(idx).abs() < 1e-13, "{idx:?}");
            }
        }
    }

    #[test]
    fn tail_ratio_flags_undersampled_nonlinearity() {
        let grid = build_grid(6, 2.0);
        let ystar = SpectralField::kernel(6);
        let f = synthesize(&ystar, &grid);
        // Y* itself has no tail beyond degree 6
        assert!(tail_energy_ratio(&f, 6).unwrap() < 1e-28);
        // exp(3 Y*) has substantial content above degree 6
        let mut e = f.clone();
        for v in &mut e.values {
            *v = (3.0 * *v).exp();
        }
        assert!(tail_energy_ratio(&e, 6).unwrap() > 1e-6);
    }

    #[test]
    fn projector_group_and_ranks() {
        let p = build_tetra_projector(6).unwrap();
        assert_eq!(p.group_elements().len(), 12);
        let ranks: Vec<usize> = (0..=6).map(|l| p.rank(l)).collect();
        assert_eq!(ranks, vec![1, 0, 0, 1, 1, 0, 2]);
    }

    #[test]
    fn projector_blocks_are_projectors() {
        let p = build_tetra_projector(6).unwrap();
        for l in 0..=6 {
            let b = p.block(l);
            let drift = (b * b - b).abs().max();
            assert!(drift < 1e-10, "l={l}: {drift:e}");
            let skew = (b - b.transpose()).abs().max();
            assert!(skew < 1e-12, "l={l}: {skew:e}");
        }
    }

    #[test]
    fn projector_kernel_line_is_ystar() {
        let p = build_tetra_projector(6).unwrap();
        let ystar = SpectralField::kernel(6);
        let mut diff = project_tetra(&p, &ystar);
        diff.add_scaled(-1.0, &ystar);
        assert!(diff.norm() < 1e-10);

        let mut zonal = SpectralField::zeros(6);
        zonal.set(HarmonicIndex::new(3, 0, Parity::Cosine), 1.0);
        assert!(project_tetra(&p, &zonal).norm() < 1e-10);
    }

    #[test]
    fn projector_idempotent_on_random_fields() {
        let p = build_tetra_projector(6).unwrap();
        let u = random_field(6, 31);
        let once = project_tetra(&p, &u);
        let mut twice = project_tetra(&p, &once);
        twice.add_scaled(-1.0, &once);
        assert!(twice.norm() < 1e-10);
    }

    #[test]
    fn projector_commutes_with_laplacian() {
        let p = build_tetra_projector(6).unwrap();
        let u = random_field(6, 37);
        let mut diff = project_tetra(&p, &laplacian(&u));
        diff.add_scaled(-1.0, &laplacian(&project_tetra(&p, &u)));
        assert!(diff.norm() < 1e-10);
    }

    #[test]
    fn invariant_vectors_of_even_degrees_use_orders_zero_and_four() {
        let p = build_tetra_projector(6).unwrap();
        for u in p.invariant_basis() {
            for idx in HarmonicIndex::all(6) {
                if (idx.l == 4 || idx.l == 6) && u.get(HarmonicIndex::new(idx.l, 0, Parity::Cosine)) != 0.0 {
                    let allowed = (idx.m == 0 || idx.m == 4) && idx.parity == Parity::Cosine;
                    if !allowed {
                        let c = u.get(idx);
                        assert!(c.abs() < 1e-10, "{idx:?} = {c}");
                    }
                }
            }
        }
    }

    #[test]
    fn invariant_basis_is_orthonormal_and_oriented() {
        let p = build_tetra_projector(8).unwrap();
        let basis = p.invariant_basis();
        assert_eq!(basis.len(), (0..=8).map(|l| p.rank(l)).sum::<usize>());
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((inner(a, b) - expect).abs() < 1e-12);
            }
        }
        let kernel_vec = basis
            .iter()
            .find(|u| u.get(KERNEL_INDEX).abs() > 0.5)
            .expect("kernel direction present");
        assert!((kernel_vec.get(KERNEL_INDEX) - 1.0).abs() < 1e-10);
    }
}
