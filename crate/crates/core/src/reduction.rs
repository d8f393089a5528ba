//! The Liapunov-Schmidt engine: inverts `L = -Delta - 12` away from its kernel
//! and solves the second- and third-order expansion equations for
//! `(lambda_1, psi_2, lambda_2)`, driven entirely by each model's Taylor data.

use crate::models::ModelSpec;
use crate::sphharm::{build_grid, HarmonicIndex, Parity, KERNEL_INDEX};
use crate::spectral::{inner, SpectralField, Transform};
use crate::{Error, Result};

/// Band limit used by default; `(Y*)^2` needs only degree 6.
pub const DEFAULT_BAND_LIMIT: usize = 12;

/// Kernel-orthogonality tolerance of the Fredholm solvability check.
pub const KERNEL_TOLERANCE: f64 = 1e-11;

/// Output of the reduction at one model.
#[derive(Debug, Clone)]
pub struct ReductionResult {
    pub model: ModelSpec,
    pub lambda_star: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Second-order spatial correction, orthogonal to the kernel.
    pub psi2: SpectralField,
    /// Floating spectral coefficients of `(Y*)^2` used by the solve.
    pub weights: SpectralField,
}

/// Apply `L^{-1} = (-Delta - 12)^{-1}` on the orthogonal complement of the
/// kernel: divide each degree-`l` coefficient by `l(l+1) - 12` and zero the
/// `l = 3` block.
///
/// Errors when the right-hand side has an `l = 3` component above
/// [`KERNEL_TOLERANCE`] (Fredholm alternative violated).
pub fn apply_l_inverse(rhs: &SpectralField) -> Result<SpectralField> {
    let band_limit = rhs.band_limit();
    let kernel_norm = if band_limit >= 3 {
        (9..16).map(|flat| rhs.coeffs()[flat].powi(2)).sum::<f64>().sqrt()
    } else {
        0.0
    };
    if kernel_norm > KERNEL_TOLERANCE {
        return Err(Error::KernelObstruction {
            kernel_norm,
            tolerance: KERNEL_TOLERANCE,
        });
    }
    let mut out = rhs.clone();
    for l in 0..=band_limit {
        let factor = if l == 3 {
            0.0
        } else {
            1.0 / ((l * (l + 1)) as f64 - 12.0)
        };
        for flat in l * l..(l + 1) * (l + 1) {
            out.coeffs_mut()[flat] *= factor;
        }
    }
    Ok(out)
}

/// Run the Liapunov-Schmidt reduction for one model.
///
/// The pipeline is generic over [`crate::models::TaylorData`]:
/// order epsilon^2 projected onto `Y*` gives `lambda_1` (computed, then asserted
/// to vanish); its range part gives `psi_2 = L^{-1}(-a2 [(Y*)^2 - mean])` with
/// the mean subtracted only for the mass-constrained model; order epsilon^3
/// projected onto `Y*` gives
/// `lambda_2 = -(a3 <(Y*)^2,(Y*)^2> + 2 a2 <(Y*)^2, psi_2>) / dA1/dlambda`.
pub fn reduce(spec: &ModelSpec, band_limit: usize) -> Result<ReductionResult> {
    assert!(
        band_limit >= 6,
        "band limit {band_limit} cannot hold (Y*)^2 (degree 6)"
    );
    let taylor = spec.taylor_data();

    // floating copy of the (Y*)^2 spectral coefficients by dealiased quadrature
    let grid = build_grid(band_limit, 2.0);
    let tf = Transform::new(&grid, band_limit)?;
    let ystar = SpectralField::kernel(band_limit);
    let mut squared = tf.synthesize(&ystar);
    for v in &mut squared.values {
        *v *= *v;
    }
    let weights = tf.analyze(&squared);

    // order epsilon^2 projected onto the kernel: lambda_1 d_a1 + a2 <(Y*)^2, Y*> = 0
    let lambda1 = -taylor.a2 * weights.get(KERNEL_INDEX) / taylor.d_a1_d_lambda;
    assert!(
        lambda1.abs() < 1e-12,
        "lambda_1 = {lambda1:e} should vanish by odd parity; basis convention bug"
    );

    // range part: psi_2 = L^{-1}(-a2 [(Y*)^2 - mean]); the mean is the (0,0) mode
    let mut rhs = weights.clone();
    rhs.scale(-taylor.a2);
    if taylor.mass_constrained {
        rhs.set(HarmonicIndex::new(0, 0, Parity::Cosine), 0.0);
    }
    let psi2 = apply_l_inverse(&rhs)?;

    // order epsilon^3 projected onto the kernel
    let lambda2 = -(taylor.a3 * inner(&weights, &weights) + 2.0 * taylor.a2 * inner(&weights, &psi2))
        / taylor.d_a1_d_lambda;

    Ok(ReductionResult {
        model: *spec,
        lambda_star: taylor.lambda_star,
        lambda1,
        lambda2,
        psi2,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactc;
    use crate::sphharm::{HarmonicIndex, Parity};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn idx(l: usize, m: usize) -> HarmonicIndex {
        HarmonicIndex::new(l, m, Parity::Cosine)
    }

    #[test]
    fn l_inverse_eigenvalues() {
        let mut r00 = SpectralField::zeros(6);
        r00.set(idx(0, 0), 1.0);
        let u = apply_l_inverse(&r00).unwrap();
        assert_eq!(u.get(idx(0, 0)), -1.0 / 12.0);

        let mut r40 = SpectralField::zeros(6);
        r40.set(idx(4, 0), 1.0);
        let u = apply_l_inverse(&r40).unwrap();
        assert_eq!(u.get(idx(4, 0)), 1.0 / 8.0);
    }

    #[test]
    fn l_inverse_rejects_kernel_component() {
        let mut rhs = SpectralField::zeros(6);
        rhs.set(idx(4, 0), 1.0);
        rhs.set(KERNEL_INDEX, 1e-6);
        assert!(matches!(
            apply_l_inverse(&rhs),
            Err(Error::KernelObstruction { .. })
        ));
    }

    #[test]
    fn l_inverse_is_self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let mut u = SpectralField::zeros(8);
            let mut v = SpectralField::zeros(8);
            for flat in 0..81 {
                // skip the l = 3 block to stay kernel-orthogonal
                if (9..16).contains(&flat) {
                    continue;
                }
                u.coeffs_mut()[flat] = rng.gen_range(-1.0..1.0);
                v.coeffs_mut()[flat] = rng.gen_range(-1.0..1.0);
            }
            let lu = apply_l_inverse(&u).unwrap();
            let lv = apply_l_inverse(&v).unwrap();
            assert!((inner(&lu, &v) - inner(&u, &lv)).abs() < 1e-11 * u.norm() * v.norm());
        }
    }

    #[test]
    fn sine_reduction() {
        let r = reduce(&ModelSpec::Sine, DEFAULT_BAND_LIMIT).unwrap();
        assert_eq!(r.lambda_star, 12.0);
        assert!(r.lambda1.abs() < 1e-12);
        assert!(r.psi2.norm() < 1e-12);
        let exact = 315.0 / (286.0 * std::f64::consts::PI);
        assert!((r.lambda2 - exact).abs() < 1e-10);
    }

    #[test]
    fn sinh_reduction() {
        let r = reduce(&ModelSpec::Sinh, DEFAULT_BAND_LIMIT).unwrap();
        assert_eq!(r.lambda_star, 12.0);
        assert!(r.lambda1.abs() < 1e-12);
        assert!(r.psi2.norm() < 1e-12);
        let exact = -315.0 / (286.0 * std::f64::consts::PI);
        assert!((r.lambda2 - exact).abs() < 1e-10);
    }

    #[test]
    fn polynomial_reduction() {
        let spec = ModelSpec::polynomial(3.0, 1.0);
        let r = reduce(&spec, DEFAULT_BAND_LIMIT).unwrap();
        assert!((r.lambda_star - 1.0).abs() < 1e-15);
        assert!(r.lambda1.abs() < 1e-12);
        assert!(r.lambda2 < 0.0);
        let table = exactc::compute_weight_table();
        let exact = exactc::lambda2_exact(&table, &spec).to_f64();
        assert!(
            (r.lambda2 - exact).abs() < 1e-10 * exact.abs(),
            "{} vs {exact}",
            r.lambda2
        );
        // mass absorption: nonzero mean mode forced by the Gauss constraint
        let c00 = r.psi2.get(idx(0, 0));
        assert!(c00.abs() > 1e-3);
        let taylor = spec.taylor_data();
        let forced = taylor.a2 * r.weights.get(idx(0, 0)) / 12.0;
        assert!((c00 - forced).abs() < 1e-13);
        // psi_2 coefficients match -3 mu1 lambda* c / (l(l+1) - 12) from the exact table
        for e in table.entries() {
            let expect = -3.0 * e.coefficient_f64() / ((e.l * (e.l + 1)) as f64 - 12.0);
            let got = r.psi2.get(idx(e.l, e.m));
            assert!((got - expect).abs() < 1e-10, "({}, {})", e.l, e.m);
        }
    }

    #[test]
    fn liouville_reduction() {
        let r = reduce(&ModelSpec::Liouville, DEFAULT_BAND_LIMIT).unwrap();
        assert_eq!(r.lambda_star, -12.0);
        assert!(r.lambda1.abs() < 1e-12);
        assert!(r.lambda2 > 0.0);
        let table = exactc::compute_weight_table();
        let exact = exactc::lambda2_exact(&table, &ModelSpec::Liouville).to_f64();
        assert!((r.lambda2 - exact).abs() < 1e-10 * exact);
        // zero-mean constraint and the vanishing (2,0) weight
        assert!(r.psi2.get(idx(0, 0)).abs() < 1e-12);
        assert!(r.psi2.get(idx(2, 0)).abs() < 1e-12);
        // support on l in {4, 6}, m in {0, 4} with the exact-oracle values
        for (l, m, expect) in exactc::liouville_psi2_coefficients(&table) {
            let got = r.psi2.get(idx(l, m));
            assert!((got - expect).abs() < 1e-10, "({l}, {m}): {got} vs {expect}");
        }
        for flat_idx in HarmonicIndex::all(DEFAULT_BAND_LIMIT) {
            let supported = matches!(
                (flat_idx.l, flat_idx.m, flat_idx.parity),
                (4 | 6, 0 | 4, Parity::Cosine)
            );
            if !supported {
                assert!(r.psi2.get(flat_idx).abs() < 1e-12, "{flat_idx:?}");
            }
        }
    }

    #[test]
    fn band_limit_robustness() {
        let spec = ModelSpec::polynomial(3.0, 1.0);
        let reference = reduce(&spec, 6).unwrap().lambda2;
        for band_limit in [8, 12] {
            let r = reduce(&spec, band_limit).unwrap();
            assert!(
                (r.lambda2 - reference).abs() < 1e-12 * reference.abs(),
                "band limit {band_limit}"
            );
        }
    }

    #[test]
    fn lambda2_sign_table() {
        let signs: Vec<f64> = [
            ModelSpec::polynomial(3.0, 1.0),
            ModelSpec::Sine,
            ModelSpec::Sinh,
            ModelSpec::Liouville,
        ]
        .iter()
        .map(|s| reduce(s, DEFAULT_BAND_LIMIT).unwrap().lambda2.signum())
        .collect();
        assert_eq!(signs, vec![-1.0, 1.0, -1.0, 1.0]);
    }
}
