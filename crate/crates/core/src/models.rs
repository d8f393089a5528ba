//! The four nonlinearities `F(lambda, psi)` with pointwise evaluation,
//! psi-derivative, Taylor data at the bifurcation point, and the closed-form
//! critical parameter.
//!
//! All models are written in the `F`-slot of `-Delta psi + F(lambda, psi) = 0`,
//! so one residual code path serves all four. The Liouville model's nonlocal
//! mean term is handled by the residual assembly, not here.

/// One of the four nonlinearity models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    /// `F = mu1 (3 lambda psi^2 + psi^3) + (3 mu1 lambda^2 - (mu + 12)) psi`,
    /// from the cubic profile `P(s) = mu1 s^3 - (mu + 12) s` via `P(lambda+psi) - P(lambda)`.
    Polynomial { mu: f64, mu1: f64 },
    /// `F = -lambda sin(psi)`.
    Sine,
    /// `F = -lambda sinh(psi)`.
    Sinh,
    /// Local part `F = lambda exp(psi)`; the mean subtraction and the zero-mean
    /// constraint are imposed by the residual operator.
    Liouville,
}

/// Taylor data of the `F`-slot at `(lambda*, 0)`:
/// `F(lambda*, psi) = -12 psi + a2 psi^2 + a3 psi^3 + O(psi^4)`.
#[derive(Debug, Clone, Copy)]
pub struct TaylorData {
    pub lambda_star: f64,
    /// Coefficient of `psi^2`.
    pub a2: f64,
    /// Coefficient of `psi^3`.
    pub a3: f64,
    /// Cross derivative `d/dlambda d/dpsi F(lambda*, 0)`.
    pub d_a1_d_lambda: f64,
    /// Whether the model carries the zero-mean constraint on `psi`.
    pub mass_constrained: bool,
}

impl ModelSpec {
    /// Polynomial model; both parameters must be positive.
    pub fn polynomial(mu: f64, mu1: f64) -> Self {
        assert!(
            mu > 0.0 && mu1 > 0.0,
            "polynomial model needs mu > 0 and mu1 > 0, got mu={mu}, mu1={mu1}"
        );
        Self::Polynomial { mu, mu1 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Polynomial { .. } => "polynomial",
            Self::Sine => "sine",
            Self::Sinh => "sinh",
            Self::Liouville => "liouville",
        }
    }

    /// Parameter value at which the linearization acquires the degree-3 kernel.
    pub fn critical_lambda(&self) -> f64 {
        match self {
            Self::Polynomial { mu, mu1 } => (mu / (3.0 * mu1)).sqrt(),
            Self::Sine | Self::Sinh => 12.0,
            Self::Liouville => -12.0,
        }
    }

    /// Taylor coefficients of the `F`-slot at `(lambda*, 0)`.
    pub fn taylor_data(&self) -> TaylorData {
        let lambda_star = self.critical_lambda();
        let data = match self {
            Self::Polynomial { mu1, .. } => TaylorData {
                lambda_star,
                a2: 3.0 * mu1 * lambda_star,
                a3: *mu1,
                d_a1_d_lambda: 6.0 * mu1 * lambda_star,
                mass_constrained: false,
            },
            Self::Sine => TaylorData {
                lambda_star,
                a2: 0.0,
                a3: 2.0,
                d_a1_d_lambda: -1.0,
                mass_constrained: false,
            },
            Self::Sinh => TaylorData {
                lambda_star,
                a2: 0.0,
                a3: -2.0,
                d_a1_d_lambda: -1.0,
                mass_constrained: false,
            },
            Self::Liouville => TaylorData {
                lambda_star,
                a2: lambda_star / 2.0,
                a3: lambda_star / 6.0,
                d_a1_d_lambda: 1.0,
                mass_constrained: true,
            },
        };
        debug_assert!(
            (self.eval_df(lambda_star, 0.0) + 12.0).abs() < 1e-12,
            "kernel condition dF(lambda*, 0) = -12 violated"
        );
        data
    }

    /// Pointwise value of the local `F`-slot.
    pub fn eval_f(&self, lambda: f64, psi: f64) -> f64 {
        match self {
            Self::Polynomial { mu, mu1 } => {
                mu1 * (3.0 * lambda * psi * psi + psi * psi * psi)
                    + (3.0 * mu1 * lambda * lambda - (mu + 12.0)) * psi
            }
            Self::Sine => -lambda * psi.sin(),
            Self::Sinh => -lambda * psi.sinh(),
            Self::Liouville => lambda * psi.exp(),
        }
    }

    /// Pointwise psi-derivative of the local `F`-slot.
    pub fn eval_df(&self, lambda: f64, psi: f64) -> f64 {
        match self {
            Self::Polynomial { mu, mu1 } => {
                mu1 * (6.0 * lambda * psi + 3.0 * psi * psi) + 3.0 * mu1 * lambda * lambda
                    - (mu + 12.0)
            }
            Self::Sine => -lambda * psi.cos(),
            Self::Sinh => -lambda * psi.cosh(),
            Self::Liouville => lambda * psi.exp(),
        }
    }

    /// Pointwise lambda-derivative of the local `F`-slot.
    pub fn eval_df_dlambda(&self, lambda: f64, psi: f64) -> f64 {
        match self {
            Self::Polynomial { mu1, .. } => mu1 * (3.0 * psi * psi + 6.0 * lambda * psi),
            Self::Sine => -psi.sin(),
            Self::Sinh => -psi.sinh(),
            Self::Liouville => psi.exp(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ALL: [ModelSpec; 4] = [
        ModelSpec::Polynomial { mu: 3.0, mu1: 1.0 },
        ModelSpec::Sine,
        ModelSpec::Sinh,
        ModelSpec::Liouville,
    ];

    #[test]
    fn critical_lambda_closed_forms() {
        assert_relative_eq!(ModelSpec::polynomial(3.0, 1.0).critical_lambda(), 1.0);
        assert_eq!(ModelSpec::Sine.critical_lambda(), 12.0);
        assert_eq!(ModelSpec::Sinh.critical_lambda(), 12.0);
        assert_eq!(ModelSpec::Liouville.critical_lambda(), -12.0);
    }

    #[test]
    fn kernel_condition_all_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let spec = ModelSpec::polynomial(rng.gen_range(0.1..20.0), rng.gen_range(0.1..5.0));
            assert!((spec.eval_df(spec.critical_lambda(), 0.0) + 12.0).abs() < 1e-12);
        }
        for spec in [ModelSpec::Sine, ModelSpec::Sinh, ModelSpec::Liouville] {
            assert!((spec.eval_df(spec.critical_lambda(), 0.0) + 12.0).abs() < 1e-12);
        }
    }

    #[test]
    fn taylor_coefficients() {
        let sine = ModelSpec::Sine.taylor_data();
        assert_eq!((sine.a2, sine.a3, sine.d_a1_d_lambda), (0.0, 2.0, -1.0));
        assert!(!sine.mass_constrained);

        let sinh = ModelSpec::Sinh.taylor_data();
        assert_eq!((sinh.a2, sinh.a3), (0.0, -2.0));

        let poly = ModelSpec::polynomial(3.0, 1.0).taylor_data();
        assert_relative_eq!(poly.a2, 3.0, epsilon = 1e-14);
        assert_relative_eq!(poly.a3, 1.0);
        assert_relative_eq!(poly.d_a1_d_lambda, 6.0, epsilon = 1e-14);

        let liouville = ModelSpec::Liouville.taylor_data();
        assert_eq!(
            (liouville.a2, liouville.a3, liouville.d_a1_d_lambda),
            (-6.0, -2.0, 1.0)
        );
        assert!(liouville.mass_constrained);
    }

    #[test]
    fn trivial_branch_values() {
        for spec in ALL {
            let expect = if spec == ModelSpec::Liouville { 7.3 } else { 0.0 };
            assert_eq!(spec.eval_f(7.3, 0.0), expect);
        }
        assert_eq!(ModelSpec::Sine.eval_df(12.0, 0.0), -12.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-5;
        for spec in ALL {
            for _ in 0..50 {
                let lambda = rng.gen_range(-15.0..15.0);
                let psi = rng.gen_range(-1.0..1.0);
                let fd = (spec.eval_f(lambda, psi + h) - spec.eval_f(lambda, psi - h)) / (2.0 * h);
                assert!(
                    (fd - spec.eval_df(lambda, psi)).abs() < 1e-8 * (1.0 + fd.abs()),
                    "{spec:?} dpsi at ({lambda}, {psi})"
                );
                let fdl = (spec.eval_f(lambda + h, psi) - spec.eval_f(lambda - h, psi)) / (2.0 * h);
                assert!(
                    (fdl - spec.eval_df_dlambda(lambda, psi)).abs() < 1e-8 * (1.0 + fdl.abs()),
                    "{spec:?} dlambda at ({lambda}, {psi})"
                );
            }
        }
    }

    #[test]
    fn odd_models_are_odd() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for spec in [ModelSpec::Sine, ModelSpec::Sinh] {
            for _ in 0..50 {
                let lambda = rng.gen_range(-15.0..15.0);
                let psi = rng.gen_range(-2.0..2.0);
                assert_eq!(spec.eval_f(lambda, -psi), -spec.eval_f(lambda, psi));
            }
        }
    }

    #[test]
    fn polynomial_profile_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (mu, mu1) = (2.7, 0.4);
        let spec = ModelSpec::polynomial(mu, mu1);
        let profile = |s: f64| mu1 * s.powi(3) - (mu + 12.0) * s;
        for _ in 0..50 {
            let lambda = rng.gen_range(-3.0..3.0);
            let psi = rng.gen_range(-1.0..1.0);
            let expect = profile(lambda + psi) - profile(lambda);
            assert!((spec.eval_f(lambda, psi) - expect).abs() < 1e-12);
        }
    }

    #[test]
    #[should_panic(expected = "mu > 0")]
    fn polynomial_rejects_nonpositive_parameters() {
        ModelSpec::polynomial(-1.0, 1.0);
    }
}
