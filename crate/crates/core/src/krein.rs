//! Generic Krein-type resolvent assembly, identity residuals and the Cayley
//! stepper. Everything here is matrix-free: families and resolvents are
//! callable linear maps on `CVector`s.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{KreinError, Result};
use crate::linalg::{c, guarded_inverse, vec_max_abs, CMatrix, CVector};

/// Real spectral parameter λ ≠ 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SpectralParam(f64);

impl SpectralParam {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda == 0.0 {
            return Err(KreinError::InadmissibleLambda { lambda, reason: "must be finite and nonzero" });
        }
        Ok(Self(lambda))
    }

    /// Parameter for kernels written with |λ|: only λ > 0 is accepted.
    pub fn positive(lambda: f64) -> Result<Self> {
        let p = Self::new(lambda)?;
        if lambda < 0.0 {
            return Err(KreinError::InadmissibleLambda { lambda, reason: "kernel requires lambda > 0" });
        }
        Ok(p)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn negated(self) -> Self {
        Self(-self.0)
    }
}

/// Which spectral parameters a provider accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    NonZero,
    Positive,
}

impl Admissibility {
    pub fn check(self, lambda: SpectralParam) -> Result<()> {
        match self {
            Admissibility::NonZero => Ok(()),
            Admissibility::Positive if lambda.value() > 0.0 => Ok(()),
            Admissibility::Positive => Err(KreinError::InadmissibleLambda {
                lambda: lambda.value(),
                reason: "provider is only defined for lambda > 0",
            }),
        }
    }
}

/// The four λ-dependent blocks R₀, G, Ğ, Γ.
///
/// `G` and `Ğ` are independent blocks; no sign convention linking them is
/// assumed here.
pub trait KreinFamily {
    fn state_dim(&self) -> usize;
    fn aux_dim(&self) -> usize;
    fn admissibility(&self) -> Admissibility {
        Admissibility::NonZero
    }
    fn free_resolvent(&self, lambda: SpectralParam, x: &CVector) -> CVector;
    fn g(&self, lambda: SpectralParam, zeta: &CVector) -> CVector;
    fn g_breve(&self, lambda: SpectralParam, x: &CVector) -> CVector;
    fn gamma(&self, lambda: SpectralParam) -> CMatrix;
}

impl<K: KreinFamily + ?Sized> KreinFamily for &K {
    fn state_dim(&self) -> usize {
        (**self).state_dim()
    }
    fn aux_dim(&self) -> usize {
        (**self).aux_dim()
    }
    fn admissibility(&self) -> Admissibility {
        (**self).admissibility()
    }
    fn free_resolvent(&self, lambda: SpectralParam, x: &CVector) -> CVector {
        (**self).free_resolvent(lambda, x)
    }
    fn g(&self, lambda: SpectralParam, zeta: &CVector) -> CVector {
        (**self).g(lambda, zeta)
    }
    fn g_breve(&self, lambda: SpectralParam, x: &CVector) -> CVector {
        (**self).g_breve(lambda, x)
    }
    fn gamma(&self, lambda: SpectralParam) -> CMatrix {
        (**self).gamma(lambda)
    }
}

/// `x ↦ R₀(λ)x + G(λ)Γ(λ)⁻¹Ğ(λ)x` for one fixed λ.
pub struct AssembledResolvent<'a, K: ?Sized> {
    family: &'a K,
    lambda: SpectralParam,
    gamma_inv: CMatrix,
}

impl<'a, K: KreinFamily + ?Sized> AssembledResolvent<'a, K> {
    pub fn lambda(&self) -> SpectralParam {
        self.lambda
    }

    pub fn gamma_inverse(&self) -> &CMatrix {
        &self.gamma_inv
    }

    pub fn apply(&self, x: &CVector) -> CVector {
        let mut out = self.family.free_resolvent(self.lambda, x);
        if self.gamma_inv.nrows() > 0 {
            let coeff = &self.gamma_inv * self.family.g_breve(self.lambda, x);
            out += self.family.g(self.lambda, &coeff);
        }
        out
    }
}

pub fn assemble_resolvent<K: KreinFamily + ?Sized>(
    family: &K,
    lambda: SpectralParam,
) -> Result<AssembledResolvent<'_, K>> {
    family.admissibility().check(lambda)?;
    let gamma_inv = guarded_inverse(&family.gamma(lambda))?;
    Ok(AssembledResolvent { family, lambda, gamma_inv })
}

/// A λ-indexed family of linear maps.
pub trait ResolventFamily {
    fn resolve(&self, lambda: SpectralParam, x: &CVector) -> Result<CVector>;
}

impl<F> ResolventFamily for F
where
    F: Fn(SpectralParam, &CVector) -> Result<CVector>,
{
    fn resolve(&self, lambda: SpectralParam, x: &CVector) -> Result<CVector> {
        self(lambda, x)
    }
}

/// The perturbed resolvent R̂ of a family, re-assembled at every call.
pub struct Perturbed<K>(pub K);

impl<K: KreinFamily> ResolventFamily for Perturbed<K> {
    fn resolve(&self, lambda: SpectralParam, x: &CVector) -> Result<CVector> {
        Ok(assemble_resolvent(&self.0, lambda)?.apply(x))
    }
}

/// The free resolvent R₀ of a family.
pub struct Free<K>(pub K);

impl<K: KreinFamily> ResolventFamily for Free<K> {
    fn resolve(&self, lambda: SpectralParam, x: &CVector) -> Result<CVector> {
        self.0.admissibility().check(lambda)?;
        Ok(self.0.free_resolvent(lambda, x))
    }
}

/// Sesquilinear pairing, antilinear in the first slot.
pub trait InnerProduct {
    fn inner(&self, x: &CVector, y: &CVector) -> Complex64;

    fn norm(&self, x: &CVector) -> f64 {
        self.inner(x, x).re.max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl InnerProduct for Euclidean {
    fn inner(&self, x: &CVector, y: &CVector) -> Complex64 {
        x.dotc(y)
    }
}

/// `⟨x, y⟩ = xᴴ M y` for a Hermitian positive-definite Gram matrix M.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(pub CMatrix);

impl GramMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

impl InnerProduct for GramMatrix {
    fn inner(&self, x: &CVector, y: &CVector) -> Complex64 {
        x.dotc(&(&self.0 * y))
    }
}

fn relative(num: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        num / scale
    } else {
        num
    }
}

/// Relative max-entry residual of `(λ−μ)R(μ)R(λ)x − (R(μ)x − R(λ)x)` over the probes.
pub fn resolvent_identity_residual<R: ResolventFamily + ?Sized>(
    r: &R,
    lambda: SpectralParam,
    mu: SpectralParam,
    probes: &[CVector],
) -> Result<f64> {
    if lambda == mu {
        return Err(KreinError::EqualSpectralParams { lambda: lambda.value() });
    }
    let d = c(lambda.value() - mu.value());
    let mut worst = 0.0f64;
    for x in probes {
        let rl = r.resolve(lambda, x)?;
        let rm = r.resolve(mu, x)?;
        let rml = r.resolve(mu, &rl)?;
        let res = rml * d - (&rm - &rl);
        let scale = vec_max_abs(&rm) + vec_max_abs(&rl);
        worst = worst.max(relative(vec_max_abs(&res), scale));
    }
    Ok(worst)
}

/// Relative residual of `⟨R(λ)x, y⟩ + ⟨x, R(−λ)y⟩` over all probe pairs.
pub fn skew_adjointness_residual<R: ResolventFamily + ?Sized, I: InnerProduct + ?Sized>(
    r: &R,
    lambda: SpectralParam,
    ip: &I,
    probes: &[CVector],
) -> Result<f64> {
    let plus: Vec<CVector> = probes.iter().map(|x| r.resolve(lambda, x)).collect::<Result<_>>()?;
    let minus: Vec<CVector> = probes.iter().map(|x| r.resolve(lambda.negated(), x)).collect::<Result<_>>()?;
    let norms: Vec<f64> = probes.iter().map(|x| ip.norm(x)).collect();
    let mut worst = 0.0f64;
    for (i, x) in probes.iter().enumerate() {
        for (j, y) in probes.iter().enumerate() {
            let a = ip.inner(&plus[i], y);
            let b = ip.inner(x, &minus[j]);
            let scale = ip.norm(&plus[i]) * norms[j] + norms[i] * ip.norm(&minus[j]);
            worst = worst.max(relative((a + b).norm(), scale));
        }
    }
    Ok(worst)
}

/// Relative residual of `⟨R(λ)x, y⟩ − ⟨x, R(λ)y⟩` (self-adjoint resolvent families).
pub fn self_adjointness_residual<R: ResolventFamily + ?Sized, I: InnerProduct + ?Sized>(
    r: &R,
    lambda: SpectralParam,
    ip: &I,
    probes: &[CVector],
) -> Result<f64> {
    let images: Vec<CVector> = probes.iter().map(|x| r.resolve(lambda, x)).collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for (i, x) in probes.iter().enumerate() {
        for (j, y) in probes.iter().enumerate() {
            let a = ip.inner(&images[i], y);
            let b = ip.inner(x, &images[j]);
            let scale = ip.norm(&images[i]) * ip.norm(y) + ip.norm(x) * ip.norm(&images[j]);
            worst = worst.max(relative((a - b).norm(), scale));
        }
    }
    Ok(worst)
}

/// Γ(λ) evaluated column by column through `Ğ(μ)G(λ)`.
fn breve_times_g<K: KreinFamily + ?Sized>(kf: &K, lambda: SpectralParam, mu: SpectralParam) -> CMatrix {
    let m = kf.aux_dim();
    let mut out = CMatrix::zeros(m, m);
    for j in 0..m {
        let mut e = CVector::zeros(m);
        e[j] = c(1.0);
        let col = kf.g_breve(mu, &kf.g(lambda, &e));
        out.set_column(j, &col);
    }
    out
}

/// Relative max-entry residual of `Γ(λ) − Γ(μ) − (λ−μ)Ğ(μ)G(λ)`.
pub fn gamma_difference_residual<K: KreinFamily + ?Sized>(
    kf: &K,
    lambda: SpectralParam,
    mu: SpectralParam,
) -> Result<f64> {
    if lambda == mu {
        return Err(KreinError::EqualSpectralParams { lambda: lambda.value() });
    }
    kf.admissibility().check(lambda)?;
    kf.admissibility().check(mu)?;
    let gl = kf.gamma(lambda);
    let gm = kf.gamma(mu);
    let cross = breve_times_g(kf, lambda, mu) * c(lambda.value() - mu.value());
    let res = &gl - &gm - &cross;
    let scale = crate::linalg::mat_max_abs(&gl) + crate::linalg::mat_max_abs(&gm);
    Ok(relative(crate::linalg::mat_max_abs(&res), scale))
}

/// One Cayley step `(2λR(λ) − I)x` with `λ = 2/dt`.
pub fn cayley_step<R: ResolventFamily + ?Sized>(r: &R, dt: f64, state: &CVector) -> Result<CVector> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(KreinError::InvalidInput(alloc::format!("time step must be positive, got {dt}")));
    }
    let lambda = SpectralParam::new(2.0 / dt)?;
    let r = r.resolve(lambda, state)?;
    Ok(r * c(2.0 * lambda.value()) - state)
}

/// Standard basis of `C^n`, the default probe set.
pub fn standard_basis(n: usize) -> Vec<CVector> {
    (0..n)
        .map(|i| {
            let mut e = CVector::zeros(n);
            e[i] = c(1.0);
            e
        })
        .collect()
}
