//! Full nonlinear Galerkin-Newton solver in the tetrahedral subspace and
//! pseudo-arclength continuation of the bifurcating branch.
//!
//! The unknowns are the coordinates of `psi` in an orthonormal basis of the
//! invariant subspace (a few dozen at band limit 16), so every Newton system is
//! a tiny dense solve. The Liouville mean constraint is imposed by excluding
//! the `l = 0` basis vector from the unknowns; the nonlocal mean term then
//! never reaches the projected equations, which keeps the Newton derivative
//! exact.

use nalgebra::{DMatrix, DVector};

use crate::models::ModelSpec;
use crate::reduction::{reduce, ReductionResult};
use crate::sphharm::{build_grid, GridField};
use crate::spectral::{
    build_tetra_projector, inner, project_tetra, tail_energy_ratio, SpectralField, TetraProjector,
    Transform, TAIL_ENERGY_LIMIT,
};
use crate::{Error, Result};

/// Arclength step bounds.
pub const DS_MIN: f64 = 1e-4;
pub const DS_MAX: f64 = 0.1;

/// Continuation parameters; the defaults run the whole suite in seconds.
#[derive(Debug, Clone)]
pub struct ContinuationConfig {
    pub band_limit: usize,
    pub pad: f64,
    /// Initial arclength step.
    pub ds: f64,
    /// Accepted points per branch direction (the seed counts), so a default
    /// run yields 30 points over the two branches.
    pub max_steps: usize,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub epsilon_seed: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            band_limit: 16,
            pad: 2.0,
            ds: 0.02,
            max_steps: 15,
            newton_tol: 1e-12,
            max_newton: 25,
            epsilon_seed: 0.05,
        }
    }
}

/// One accepted point on a solution branch.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub lambda: f64,
    /// Kernel amplitude `<psi, Y*>`.
    pub epsilon: f64,
    pub psi: SpectralField,
    /// Coefficient-space 2-norm of the projected residual.
    pub residual_norm: f64,
    pub newton_iters: usize,
}

/// The two branches seeded at `+epsilon` and `-epsilon`.
#[derive(Debug, Clone)]
pub struct BranchPair {
    pub plus: Vec<BranchPoint>,
    pub minus: Vec<BranchPoint>,
    /// Set when `|lambda_2|` from the reduction was too small for the
    /// quadratic predictor and the tracer fell back to stepping the kernel
    /// amplitude directly.
    pub degenerate_seed: bool,
}

/// Galerkin residual of `-Delta psi + F(lambda, psi) = 0` restricted to the
/// tetrahedral subspace.
///
/// The field is projected defensively, the nonlinearity is evaluated on a
/// dealiased grid, and for the Liouville model the spherical mean is
/// subtracted and the `(0,0)` coefficient zeroed before projecting back. For
/// transcendental models the truncated tail is monitored and the evaluation
/// refused when it carries more than [`TAIL_ENERGY_LIMIT`] of the energy.
pub fn residual(
    spec: &ModelSpec,
    lambda: f64,
    psi: &SpectralField,
    projector: &TetraProjector,
) -> Result<SpectralField> {
    let band_limit = psi.band_limit();
    let psi = project_tetra(projector, psi);
    let grid = build_grid(band_limit, 2.0);
    let tf = Transform::new(&grid, band_limit)?;
    let mut f = tf.synthesize(&psi);
    for v in &mut f.values {
        *v = spec.eval_f(lambda, *v);
    }
    if !matches!(spec, ModelSpec::Polynomial { .. }) {
        let ratio = tail_energy_ratio(&f, band_limit)?;
        if ratio > TAIL_ENERGY_LIMIT {
            return Err(Error::AliasedTail { ratio });
        }
    }
    let mut r = tf.analyze(&f);
    if matches!(spec, ModelSpec::Liouville) {
        // the (0,0) coefficient carries the spherical mean; zeroing it applies
        // the nonlocal term and removes the mean from the equations
        r.coeffs_mut()[0] = 0.0;
    }
    // -Delta psi contributes +l(l+1) per degree
    for l in 0..=band_limit {
        let eig = (l * (l + 1)) as f64;
        for flat in l * l..(l + 1) * (l + 1) {
            r.coeffs_mut()[flat] += eig * psi.coeffs()[flat];
        }
    }
    Ok(project_tetra(projector, &r))
}

/// The reduced Galerkin system over the invariant-subspace coordinates.
struct SubspaceSystem {
    spec: ModelSpec,
    band_limit: usize,
    basis: Vec<SpectralField>,
    degrees: Vec<usize>,
    kernel_col: usize,
    tf: Transform,
    /// n_nodes x d synthesis of the basis on the dealiased grid.
    basis_grid: DMatrix<f64>,
    /// d x n_nodes quadrature-weighted transpose (analysis restricted to the basis).
    analyze_rows: DMatrix<f64>,
    check_tail: bool,
}

impl SubspaceSystem {
    fn build(spec: &ModelSpec, config: &ContinuationConfig) -> Result<Self> {
        let band_limit = config.band_limit;
        let projector = build_tetra_projector(band_limit)?;
        let mut tagged = projector.invariant_basis_by_degree();
        if matches!(spec, ModelSpec::Liouville) {
            // zero-mean constraint: the constant mode is not an unknown
            tagged.retain(|(l, _)| *l > 0);
        }
        let degrees: Vec<usize> = tagged.iter().map(|(l, _)| *l).collect();
        let basis: Vec<SpectralField> = tagged.into_iter().map(|(_, u)| u).collect();
        let kernel_col = degrees
            .iter()
            .position(|&l| l == 3)
            .expect("band limit >= 3 keeps the kernel direction");

        let grid = build_grid(band_limit, config.pad);
        let tf = Transform::new(&grid, band_limit)?;
        let n_nodes = grid.n_theta * grid.n_phi;
        let d = basis.len();
        let mut basis_grid = DMatrix::<f64>::zeros(n_nodes, d);
        let mut analyze_rows = DMatrix::<f64>::zeros(d, n_nodes);
        let wphi = grid.phi_weight();
        for (k, b) in basis.iter().enumerate() {
            let g = tf.synthesize(b);
            for i in 0..grid.n_theta {
                let w = grid.weights_x[i] * wphi;
                for j in 0..grid.n_phi {
                    let node = i * grid.n_phi + j;
                    basis_grid[(node, k)] = g.values[node];
                    analyze_rows[(k, node)] = g.values[node] * w;
                }
            }
        }
        Ok(Self {
            spec: *spec,
            band_limit,
            basis,
            degrees,
            kernel_col,
            tf,
            basis_grid,
            analyze_rows,
            check_tail: !matches!(spec, ModelSpec::Polynomial { .. }),
        })
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn field_from_coords(&self, c: &DVector<f64>) -> SpectralField {
        let mut psi = SpectralField::zeros(self.band_limit);
        for (k, b) in self.basis.iter().enumerate() {
            psi.add_scaled(c[k], b);
        }
        psi
    }

    fn coords_from_field(&self, psi: &SpectralField) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.basis.iter().map(|b| inner(b, psi)))
    }

    fn psi_on_grid(&self, c: &DVector<f64>) -> DVector<f64> {
        &self.basis_grid * c
    }

    /// Projected residual coordinates.
    fn residual_coords(&self, lambda: f64, psi_grid: &DVector<f64>, c: &DVector<f64>) -> DVector<f64> {
        let f_vals = psi_grid.map(|v| self.spec.eval_f(lambda, v));
        let mut r = &self.analyze_rows * f_vals;
        for k in 0..self.dim() {
            let l = self.degrees[k] as f64;
            r[k] += l * (l + 1.0) * c[k];
        }
        r
    }

    /// Jacobian with respect to the coordinates.
    fn jacobian(&self, lambda: f64, psi_grid: &DVector<f64>) -> DMatrix<f64> {
        let df = psi_grid.map(|v| self.spec.eval_df(lambda, v));
        let mut scaled = self.basis_grid.clone();
        for (node, row) in df.iter().enumerate() {
            for k in 0..self.dim() {
                scaled[(node, k)] *= *row;
            }
        }
        let mut j = &self.analyze_rows * scaled;
        for k in 0..self.dim() {
            let l = self.degrees[k] as f64;
            j[(k, k)] += l * (l + 1.0);
        }
        j
    }

    /// Residual derivative with respect to lambda.
    fn residual_lambda(&self, lambda: f64, psi_grid: &DVector<f64>) -> DVector<f64> {
        let df = psi_grid.map(|v| self.spec.eval_df_dlambda(lambda, v));
        &self.analyze_rows * df
    }

    /// Truncation-tail monitor at an accepted point.
    fn tail_ok(&self, lambda: f64, psi_grid: &DVector<f64>) -> Result<()> {
        if !self.check_tail {
            return Ok(());
        }
        let mut f = GridField::zeros(self.tf.grid());
        for (slot, v) in f.values.iter_mut().zip(psi_grid.iter()) {
            *slot = self.spec.eval_f(lambda, *v);
        }
        let ratio = tail_energy_ratio(&f, self.band_limit)?;
        if ratio > TAIL_ENERGY_LIMIT {
            return Err(Error::AliasedTail { ratio });
        }
        Ok(())
    }

    /// Newton corrector for the bordered system
    /// `[ r(c, lambda) ; n . ((c, lambda) - anchor) - offset ] = 0`.
    ///
    /// `constraint = (n_c, n_lambda, rhs)` pins either the kernel amplitude
    /// (seeding) or the arclength hyperplane (stepping). Returns
    /// `(c, lambda, residual_norm, iterations)`.
    #[allow(clippy::type_complexity)]
    fn bordered_newton(
        &self,
        mut c: DVector<f64>,
        mut lambda: f64,
        constraint: (&DVector<f64>, f64, f64),
        tol: f64,
        max_iter: usize,
    ) -> Result<(DVector<f64>, f64, f64, usize)> {
        let (n_c, n_lambda, rhs) = constraint;
        let d = self.dim();
        let mut residual_norm = f64::INFINITY;
        for iter in 0..=max_iter {
            let psi_grid = self.psi_on_grid(&c);
            let r = self.residual_coords(lambda, &psi_grid, &c);
            let g = n_c.dot(&c) + n_lambda * lambda - rhs;
            residual_norm = r.norm();
            if residual_norm < tol && g.abs() < tol {
                return Ok((c, lambda, residual_norm, iter));
            }
            if iter == max_iter {
                break;
            }
            let j = self.jacobian(lambda, &psi_grid);
            let r_lambda = self.residual_lambda(lambda, &psi_grid);
            let mut bordered = DMatrix::<f64>::zeros(d + 1, d + 1);
            bordered.view_mut((0, 0), (d, d)).copy_from(&j);
            for k in 0..d {
                bordered[(k, d)] = r_lambda[k];
                bordered[(d, k)] = n_c[k];
            }
            bordered[(d, d)] = n_lambda;
            let mut full_rhs = DVector::<f64>::zeros(d + 1);
            for k in 0..d {
                full_rhs[k] = -r[k];
            }
            full_rhs[d] = -g;
            let delta = bordered
                .lu()
                .solve(&full_rhs)
                .ok_or(Error::NewtonDiverged {
                    iterations: iter,
                    residual: residual_norm,
                })?;
            for k in 0..d {
                c[k] += delta[k];
            }
            lambda += delta[d];
        }
        Err(Error::NewtonDiverged {
            iterations: max_iter,
            residual: residual_norm,
        })
    }

    /// Plain Newton at fixed lambda.
    fn newton_fixed_lambda(
        &self,
        lambda: f64,
        mut c: DVector<f64>,
        tol: f64,
        max_iter: usize,
    ) -> Result<(DVector<f64>, f64, usize)> {
        let mut residual_norm = f64::INFINITY;
        for iter in 0..=max_iter {
            let psi_grid = self.psi_on_grid(&c);
            let r = self.residual_coords(lambda, &psi_grid, &c);
            residual_norm = r.norm();
            if residual_norm < tol {
                self.tail_ok(lambda, &psi_grid)?;
                return Ok((c, residual_norm, iter));
            }
            if iter == max_iter {
                break;
            }
            let j = self.jacobian(lambda, &psi_grid);
            let delta = j.lu().solve(&(-&r)).ok_or(Error::NewtonDiverged {
                iterations: iter,
                residual: residual_norm,
            })?;
            c += delta;
        }
        Err(Error::NewtonDiverged {
            iterations: max_iter,
            residual: residual_norm,
        })
    }

    fn branch_point(
        &self,
        c: &DVector<f64>,
        lambda: f64,
        residual_norm: f64,
        newton_iters: usize,
    ) -> BranchPoint {
        BranchPoint {
            lambda,
            epsilon: c[self.kernel_col],
            psi: self.field_from_coords(c),
            residual_norm,
            newton_iters,
        }
    }
}

/// Newton solve at fixed `lambda` from an initial guess, inside the subspace.
pub fn newton_solve(
    spec: &ModelSpec,
    lambda: f64,
    psi0: &SpectralField,
    config: &ContinuationConfig,
) -> Result<BranchPoint> {
    let system = SubspaceSystem::build(spec, config)?;
    let c0 = system.coords_from_field(&psi0.resize(config.band_limit));
    let (c, residual_norm, iters) =
        system.newton_fixed_lambda(lambda, c0, config.newton_tol, config.max_newton)?;
    Ok(system.branch_point(&c, lambda, residual_norm, iters))
}

/// Trace both bifurcating branches by pseudo-arclength continuation.
///
/// Each branch is seeded with the reduction predictor
/// `lambda = lambda* + lambda_2 eps^2`, `psi = eps Y* + eps^2 psi_2` at
/// `eps = +-epsilon_seed`, corrected with the kernel amplitude pinned, then
/// continued with a secant predictor and a bordered Newton corrector. The step
/// halves on failure, doubles after three easy successes, and stays in
/// `[DS_MIN, DS_MAX]`.
pub fn continue_branch(spec: &ModelSpec, config: &ContinuationConfig) -> Result<BranchPair> {
    let reduction = reduce(spec, config.band_limit)?;
    let system = SubspaceSystem::build(spec, config)?;
    let degenerate = reduction.lambda2.abs() < 1e-8;
    let plus = trace_one_branch(&system, &reduction, config, 1.0, degenerate)?;
    let minus = trace_one_branch(&system, &reduction, config, -1.0, degenerate)?;
    Ok(BranchPair {
        plus,
        minus,
        degenerate_seed: degenerate,
    })
}

fn trace_one_branch(
    system: &SubspaceSystem,
    reduction: &ReductionResult,
    config: &ContinuationConfig,
    sign: f64,
    degenerate: bool,
) -> Result<Vec<BranchPoint>> {
    let d = system.dim();
    let eps = sign * config.epsilon_seed;

    // predictor from the reduction
    let mut psi_pred = SpectralField::zeros(config.band_limit);
    psi_pred.add_scaled(eps, &SpectralField::kernel(config.band_limit));
    psi_pred.add_scaled(eps * eps, &reduction.psi2.resize(config.band_limit));
    let c_pred = system.coords_from_field(&psi_pred);
    let lambda_pred = if degenerate {
        reduction.lambda_star
    } else {
        reduction.lambda_star + reduction.lambda2 * eps * eps
    };

    // seed corrector: pin the kernel amplitude, let lambda float
    let mut pin = DVector::<f64>::zeros(d);
    pin[system.kernel_col] = 1.0;
    let (c, lambda, res, iters) = system
        .bordered_newton(
            c_pred,
            lambda_pred,
            (&pin, 0.0, eps),
            config.newton_tol,
            config.max_newton,
        )
        .map_err(|e| Error::SeedFailure(format!("{} branch at eps = {eps}: {e}", system.spec.name())))?;
    {
        let psi_grid = system.psi_on_grid(&c);
        system
            .tail_ok(lambda, &psi_grid)
            .map_err(|e| Error::SeedFailure(format!("seed point aliased: {e}")))?;
    }
    let mut points = vec![system.branch_point(&c, lambda, res, iters)];

    // initial tangent from the asymptotic branch shape
    let mut y_prev = augment(&c, lambda);
    let mut tangent = {
        let mut dpsi = SpectralField::kernel(config.band_limit);
        dpsi.add_scaled(2.0 * eps, &reduction.psi2.resize(config.band_limit));
        let mut t = augment(
            &system.coords_from_field(&dpsi),
            2.0 * eps * reduction.lambda2,
        );
        t *= sign / t.norm();
        t
    };

    let mut ds = config.ds.clamp(DS_MIN, DS_MAX);
    let mut easy_streak = 0usize;
    while points.len() < config.max_steps {
        let y_guess = &y_prev + &tangent * ds;
        let (c_guess, lambda_guess) = split(&y_guess);
        let n_c = DVector::from_iterator(d, tangent.iter().take(d).copied());
        let n_lambda = tangent[d];
        let rhs = tangent.dot(&y_guess);
        let attempt = system
            .bordered_newton(
                c_guess,
                lambda_guess,
                (&n_c, n_lambda, rhs),
                config.newton_tol,
                config.max_newton,
            )
            .and_then(|(c, lambda, res, iters)| {
                let psi_grid = system.psi_on_grid(&c);
                system.tail_ok(lambda, &psi_grid)?;
                Ok((c, lambda, res, iters))
            });
        match attempt {
            Ok((c, lambda, res, iters)) => {
                let y_new = augment(&c, lambda);
                let mut secant = &y_new - &y_prev;
                secant /= secant.norm();
                tangent = secant;
                y_prev = y_new;
                points.push(system.branch_point(&c, lambda, res, iters));
                if iters <= 3 {
                    easy_streak += 1;
                    if easy_streak >= 3 {
                        ds = (ds * 2.0).min(DS_MAX);
                        easy_streak = 0;
                    }
                } else {
                    easy_streak = 0;
                }
            }
            Err(_) => {
                easy_streak = 0;
                ds *= 0.5;
                if ds < DS_MIN {
                    // the branch left the trusted range; report what was traced
                    break;
                }
            }
        }
    }
    Ok(points)
}

fn augment(c: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let mut y = DVector::<f64>::zeros(c.len() + 1);
    y.view_mut((0, 0), (c.len(), 1)).copy_from(c);
    y[c.len()] = lambda;
    y
}

fn split(y: &DVector<f64>) -> (DVector<f64>, f64) {
    let d = y.len() - 1;
    (
        DVector::from_iterator(d, y.iter().take(d).copied()),
        y[d],
    )
}

/// Least-squares slope of `lambda - lambda*` against `epsilon^2` through the
/// origin, over points with `|epsilon| <= 0.15`.
pub fn fit_lambda2(branch: &[BranchPoint], lambda_star: f64) -> Result<f64> {
    const MAX_EPSILON: f64 = 0.15;
    const MIN_POINTS: usize = 5;
    let selected: Vec<&BranchPoint> = branch
        .iter()
        .filter(|p| p.epsilon.abs() <= MAX_EPSILON && p.epsilon != 0.0)
        .collect();
    if selected.len() < MIN_POINTS {
        return Err(Error::InsufficientBranchPoints {
            have: selected.len(),
            need: MIN_POINTS,
            max_epsilon: MAX_EPSILON,
        });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for p in selected {
        let e2 = p.epsilon * p.epsilon;
        num += e2 * (p.lambda - lambda_star);
        den += e2 * e2;
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::DEFAULT_BAND_LIMIT;
    use crate::sphharm::KERNEL_INDEX;

    fn small_config() -> ContinuationConfig {
        ContinuationConfig {
            band_limit: 10,
            ..ContinuationConfig::default()
        }
    }

    #[test]
    fn residual_vanishes_on_trivial_branch() {
        let projector = build_tetra_projector(8).unwrap();
        for spec in [
            ModelSpec::polynomial(3.0, 1.0),
            ModelSpec::Sine,
            ModelSpec::Sinh,
            ModelSpec::Liouville,
        ] {
            let zero = SpectralField::zeros(8);
            let r = residual(&spec, 5.0, &zero, &projector).unwrap();
            assert!(r.norm() < 1e-12, "{}: {:e}", spec.name(), r.norm());
        }
    }

    #[test]
    fn residual_scales_cubically_near_onset() {
        let projector = build_tetra_projector(8).unwrap();
        let norms: Vec<f64> = [1e-2, 5e-3]
            .iter()
            .map(|&eps| {
                let mut psi = SpectralField::kernel(8);
                psi.scale(eps);
                residual(&ModelSpec::Sine, 12.0, &psi, &projector)
                    .unwrap()
                    .norm()
            })
            .collect();
        // halving eps should divide the residual by about 8
        let ratio = norms[1] / norms[0];
        assert!(
            (ratio - 0.125).abs() < 0.125 * 0.2,
            "scaling ratio {ratio} not cubic"
        );
    }

    #[test]
    fn newton_converges_on_trivial_branch() {
        let cfg = small_config();
        let point = newton_solve(
            &ModelSpec::Sine,
            11.0,
            &SpectralField::zeros(cfg.band_limit),
            &cfg,
        )
        .unwrap();
        assert!(point.newton_iters <= 1);
        assert!(point.psi.norm() < 1e-12);
    }

    #[test]
    fn newton_lands_on_predicted_amplitude() {
        let cfg = small_config();
        let r = reduce(&ModelSpec::Sine, cfg.band_limit).unwrap();
        let eps = 0.1;
        let lambda = r.lambda_star + r.lambda2 * eps * eps;
        let mut psi0 = SpectralField::kernel(cfg.band_limit);
        psi0.scale(eps);
        let point = newton_solve(&ModelSpec::Sine, lambda, &psi0, &cfg).unwrap();
        assert!((point.epsilon - eps).abs() < 0.01);
        assert!(point.residual_norm < 1e-12);
    }

    #[test]
    fn sinh_has_no_nontrivial_solution_above_onset() {
        let cfg = small_config();
        let mut psi0 = SpectralField::kernel(cfg.band_limit);
        psi0.scale(0.02);
        let point = newton_solve(&ModelSpec::Sinh, 12.01, &psi0, &cfg).unwrap();
        assert!(point.psi.norm() < 1e-8);
    }

    #[test]
    fn quadratic_newton_convergence_for_liouville() {
        // the rank-one mean handling must not spoil exact derivatives
        let cfg = small_config();
        let system = SubspaceSystem::build(&ModelSpec::Liouville, &cfg).unwrap();
        let r = reduce(&ModelSpec::Liouville, cfg.band_limit).unwrap();
        let eps = 0.1;
        let mut psi = SpectralField::kernel(cfg.band_limit);
        psi.scale(eps);
        psi.add_scaled(eps * eps, &r.psi2.resize(cfg.band_limit));
        let lambda = r.lambda_star + r.lambda2 * eps * eps;
        let c = system.coords_from_field(&psi);
        let mut norms = Vec::new();
        let mut ck = c.clone();
        for _ in 0..4 {
            let psi_grid = system.psi_on_grid(&ck);
            let res = system.residual_coords(lambda, &psi_grid, &ck);
            norms.push(res.norm());
            let j = system.jacobian(lambda, &psi_grid);
            let delta = j.lu().solve(&(-&res)).unwrap();
            ck += delta;
        }
        // quadratic contraction until roundoff
        assert!(norms[1] < norms[0].powi(2) * 1e3 + 1e-14);
        assert!(norms[2] < norms[1].powi(2) * 1e3 + 1e-14);
    }

    #[test]
    fn sine_branch_is_supercritical() {
        let cfg = ContinuationConfig {
            band_limit: 10,
            max_steps: 12,
            ..ContinuationConfig::default()
        };
        let pair = continue_branch(&ModelSpec::Sine, &cfg).unwrap();
        assert!(!pair.degenerate_seed);
        assert_eq!(pair.plus.len(), 12);
        for p in pair.plus.iter().chain(&pair.minus) {
            assert!(p.residual_norm < 1e-10);
            assert!(p.lambda >= 12.0 - 1e-6, "lambda = {}", p.lambda);
        }
    }

    #[test]
    fn polynomial_branch_is_subcritical() {
        let cfg = ContinuationConfig {
            band_limit: 10,
            max_steps: 12,
            ..ContinuationConfig::default()
        };
        let pair = continue_branch(&ModelSpec::polynomial(3.0, 1.0), &cfg).unwrap();
        for p in &pair.plus {
            assert!(p.lambda <= 1.0 + 1e-9, "lambda = {}", p.lambda);
        }
    }

    #[test]
    fn odd_branches_mirror_under_negation() {
        let cfg = ContinuationConfig {
            band_limit: 10,
            max_steps: 8,
            ..ContinuationConfig::default()
        };
        for spec in [ModelSpec::Sine, ModelSpec::Sinh] {
            let pair = continue_branch(&spec, &cfg).unwrap();
            for (p, m) in pair.plus.iter().zip(&pair.minus) {
                assert!((p.lambda - m.lambda).abs() < 1e-8);
                let mut sum = p.psi.clone();
                sum.add_scaled(1.0, &m.psi);
                assert!(sum.norm() < 1e-10, "{}", spec.name());
            }
        }
    }

    #[test]
    fn epsilon_matches_kernel_inner_product() {
        let cfg = ContinuationConfig {
            band_limit: 10,
            max_steps: 6,
            ..ContinuationConfig::default()
        };
        let pair = continue_branch(&ModelSpec::Sine, &cfg).unwrap();
        for p in &pair.plus {
            let direct = inner(&p.psi, &SpectralField::kernel(cfg.band_limit));
            assert!((p.epsilon - direct).abs() < 1e-13);
            assert!((p.psi.get(KERNEL_INDEX) - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn fitted_lambda2_matches_reduction() {
        let cfg = ContinuationConfig {
            band_limit: 10,
            max_steps: 10,
            ..ContinuationConfig::default()
        };
        let r = reduce(&ModelSpec::Sine, DEFAULT_BAND_LIMIT).unwrap();
        let pair = continue_branch(&ModelSpec::Sine, &cfg).unwrap();
        let fit = fit_lambda2(&pair.plus, r.lambda_star).unwrap();
        assert!(
            (fit - r.lambda2).abs() < 0.02 * r.lambda2.abs(),
            "fit {fit} vs {}",
            r.lambda2
        );
    }

    #[test]
    fn fit_requires_enough_small_amplitude_points() {
        assert!(matches!(
            fit_lambda2(&[], 12.0),
            Err(Error::InsufficientBranchPoints { .. })
        ));
    }

    #[test]
    fn public_residual_agrees_with_solver_at_converged_points() {
        let cfg = ContinuationConfig {
            band_limit: 10,
            max_steps: 5,
            ..ContinuationConfig::default()
        };
        let projector = build_tetra_projector(cfg.band_limit).unwrap();
        let pair = continue_branch(&ModelSpec::Liouville, &cfg).unwrap();
        for p in pair.plus.iter().chain(&pair.minus) {
            let r = residual(&ModelSpec::Liouville, p.lambda, &p.psi, &projector).unwrap();
            assert!(r.norm() < 1e-10, "{:e}", r.norm());
            // accepted points are projector fixed points
            let mut drift = project_tetra(&projector, &p.psi);
            drift.add_scaled(-1.0, &p.psi);
            assert!(drift.norm() < 1e-11);
        }
    }

    #[test]
    fn amplitude_follows_square_root_law() {
        // |<psi, Y*>| tracks sqrt((lambda - lambda*)/lambda_2) within 5% while
        // |eps| <= 0.1
        let cfg = ContinuationConfig {
            band_limit: 10,
            max_steps: 6,
            ..ContinuationConfig::default()
        };
        for spec in [ModelSpec::Sine, ModelSpec::polynomial(3.0, 1.0)] {
            let r = reduce(&spec, cfg.band_limit).unwrap();
            let pair = continue_branch(&spec, &cfg).unwrap();
            let mut checked = 0;
            for p in pair.plus.iter().chain(&pair.minus) {
                if p.epsilon.abs() > 0.1 {
                    continue;
                }
                let predicted = ((p.lambda - r.lambda_star) / r.lambda2).max(0.0).sqrt();
                assert!(
                    (p.epsilon.abs() - predicted).abs() < 0.05 * predicted,
                    "{}: |eps| = {} vs sqrt law {predicted}",
                    spec.name(),
                    p.epsilon.abs()
                );
                checked += 1;
            }
            assert!(checked >= 4);
        }
    }
}
