//! Mixed (continuous + atomic) laws on a bounded interval.

use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::Rng;

use crate::quad::{transformed, PanelIntegral, QuadError, Quadrature, HALF_PI};

/// Shared, thread-safe real function.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A point mass of a [`MixedSojournLaw`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// A probability law on `[lo, hi]` made of an absolutely continuous part
/// and finitely many atoms.
///
/// The density may blow up like an inverse square root at either end of the
/// support; all integrals of it use the `sin²` substitution. The CDF of the
/// continuous part is either supplied in closed form or tabulated lazily on
/// first use, after which evaluation needs no further density calls.
#[derive(Clone)]
pub struct MixedSojournLaw {
    lo: f64,
    hi: f64,
    density: RealFn,
    atoms: Vec<Atom>,
    continuous_cdf: Option<RealFn>,
    table: Arc<OnceLock<Result<CdfTable, QuadError>>>,
}

impl fmt::Debug for MixedSojournLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MixedSojournLaw")
            .field("support", &(self.lo, self.hi))
            .field("atoms", &self.atoms)
            .field("closed_form_cdf", &self.continuous_cdf.is_some())
            .finish()
    }
}

impl MixedSojournLaw {
    pub fn new(lo: f64, hi: f64, density: RealFn, atoms: Vec<Atom>) -> Self {
        assert!(lo < hi, "empty support [{lo}, {hi}]");
        Self { lo, hi, density, atoms, continuous_cdf: None, table: Arc::new(OnceLock::new()) }
    }

    /// Attaches a closed form for `P(Γ ≤ z, Γ not an atom)`.
    pub fn with_continuous_cdf(mut self, cdf: RealFn) -> Self {
        self.continuous_cdf = Some(cdf);
        self
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Density of the continuous part; zero outside the open support.
    pub fn density(&self, s: f64) -> f64 {
        if s <= self.lo || s >= self.hi {
            0.0
        } else {
            (self.density)(s)
        }
    }

    pub fn density_fn(&self) -> RealFn {
        Arc::clone(&self.density)
    }

    /// `∫ g(s) density(s) ds` over the support, by quadrature.
    pub fn integrate_density<G: Fn(f64) -> f64>(&self, quad: &Quadrature, g: G) -> Result<f64, QuadError> {
        let lo = self.lo;
        let d = &self.density;
        Ok(quad.sqrt_singular(|s| g(lo + s) * d(lo + s), self.len())?.value)
    }

    /// Mass of the continuous part, by quadrature.
    pub fn continuous_mass(&self) -> Result<f64, QuadError> {
        self.integrate_density(&Quadrature::default(), |_| 1.0)
    }

    /// `∫ density + Σ atoms`.
    pub fn total_mass(&self) -> Result<f64, QuadError> {
        Ok(self.continuous_mass()? + self.atom_mass())
    }

    /// Mean of the law (continuous part by quadrature).
    pub fn mean(&self) -> Result<f64, QuadError> {
        let c = self.integrate_density(&Quadrature::default(), |s| s)?;
        Ok(c + self.atoms.iter().map(|a| a.location * a.mass).sum::<f64>())
    }

    /// `E[exp(-β Γ)]`.
    pub fn laplace(&self, beta: f64) -> Result<f64, QuadError> {
        let c = self.integrate_density(&Quadrature::default(), |s| (-beta * s).exp())?;
        Ok(c + self.atoms.iter().map(|a| (-beta * a.location).exp() * a.mass).sum::<f64>())
    }

    fn table(&self) -> Result<&CdfTable, QuadError> {
        self.table
            .get_or_init(|| CdfTable::build(&self.density, self.lo, self.hi, CdfTable::DEFAULT_PANELS))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `P(Γ ≤ z, Γ in the continuous part)`.
    pub fn continuous_cdf(&self, z: f64) -> Result<f64, QuadError> {
        if z <= self.lo {
            return Ok(0.0);
        }
        if let Some(cdf) = &self.continuous_cdf {
            return Ok(cdf(z.min(self.hi)));
        }
        let table = self.table()?;
        Ok(table.eval(z.min(self.hi) - self.lo))
    }

    /// Continuous-part CDF renormalized to a probability distribution.
    pub fn conditional_continuous_cdf(&self, z: f64) -> Result<f64, QuadError> {
        let total = self.continuous_cdf(self.hi)?;
        Ok((self.continuous_cdf(z)? / total).clamp(0.0, 1.0))
    }

    /// Full distribution function `P(Γ ≤ z)`.
    pub fn cdf(&self, z: f64) -> Result<f64, QuadError> {
        let atoms: f64 = self.atoms.iter().filter(|a| a.location <= z).map(|a| a.mass).sum();
        Ok((self.continuous_cdf(z)? + atoms).min(1.0))
    }

    /// Quantile of the continuous part conditioned on not hitting an atom.
    pub fn continuous_quantile(&self, p: f64) -> Result<f64, QuadError> {
        let target = p.clamp(0.0, 1.0) * self.continuous_cdf(self.hi)?;
        // Bisect in θ so that both steep ends are resolved evenly.
        let (mut a, mut b) = (0.0, HALF_PI);
        for _ in 0..64 {
            let m = 0.5 * (a + b);
            let s = self.lo + self.len() * m.sin().powi(2);
            if self.continuous_cdf(s)? < target {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(self.lo + self.len() * (0.5 * (a + b)).sin().powi(2))
    }

    /// Draws one value by inverse-CDF sampling.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64, QuadError> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for atom in &self.atoms {
            acc += atom.mass;
            if u < acc {
                return Ok(atom.location);
            }
        }
        let v: f64 = rng.random();
        self.continuous_quantile(v)
    }
}

/// Continuous-part CDF tabulated on uniform θ panels of `s = L sin²θ`.
#[derive(Clone, Debug)]
pub(crate) struct CdfTable {
    len: f64,
    panels: PanelIntegral,
}

impl CdfTable {
    pub(crate) const DEFAULT_PANELS: usize = 1024;

    pub(crate) fn build(density: &RealFn, lo: f64, hi: f64, panels: usize) -> Result<Self, QuadError> {
        let len = hi - lo;
        let f = |s: f64| density(lo + s);
        let panels = PanelIntegral::build(|th| transformed(&f, len, th), HALF_PI, panels)
            .map_err(|e| match e {
                QuadError::NonFinite { at } => QuadError::NonFinite { at: lo + len * at.sin().powi(2) },
                other => other,
            })?;
        Ok(Self { len, panels })
    }

    /// `∫_0^z density(lo + s) ds` for `0 ≤ z ≤ len`.
    pub(crate) fn eval(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        self.panels.eval((z / self.len).sqrt().min(1.0).asin())
    }
}
