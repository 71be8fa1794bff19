//! Poissonized two-sample data and the parametric density families.
//!
//! The pooled sample is a Poisson process with intensity N₁f + N₂g: a
//! Poisson(N) point count followed by i.i.d. draws from the mixture
//! (N₁/N)f + (N₂/N)g (the two are equivalent by the order-statistics property
//! of the Poisson process, which avoids thinning). Each point z then gets mark
//! 1 with probability N₁f(z) / (N₁f(z) + N₂g(z)), independently across points.

use crate::error::{Error, Result};
use crate::integrate;
use crate::knn_graph::PointCloud;
use crate::rng::{substream, StreamRng};
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::sync::Mutex;

/// Sample-size design (N₁, N₂); N = N₁+N₂, p = N₁/N.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleDesign {
    n1: u64,
    n2: u64,
}

impl SampleDesign {
    pub fn new(n1: u64, n2: u64) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::Validation(format!(
                "both sample sizes must be positive, got N1={n1}, N2={n2}"
            )));
        }
        Ok(Self { n1, n2 })
    }

    pub fn n1(&self) -> u64 {
        self.n1
    }

    pub fn n2(&self) -> u64 {
        self.n2
    }

    /// Total intensity N = N₁ + N₂.
    pub fn n(&self) -> f64 {
        (self.n1 + self.n2) as f64
    }

    /// Proportion p = N₁/N ∈ (0,1).
    pub fn p(&self) -> f64 {
        self.n1 as f64 / self.n()
    }

    pub fn q(&self) -> f64 {
        self.n2 as f64 / self.n()
    }
}

/// A probability density that can be evaluated and sampled.
pub trait Density: Send + Sync {
    fn dim(&self) -> usize;

    fn pdf(&self, x: &[f64]) -> f64;

    fn sample_into(&self, rng: &mut StreamRng, out: &mut [f64]) -> Result<()>;

    /// Box that carries all but a negligible (≲ 1e-12) fraction of the mass,
    /// for quadrature; `None` when no useful box exists.
    fn quad_box(&self) -> Option<Vec<(f64, f64)>>;
}

/// Support descriptor for a family.
#[derive(Clone, Debug, PartialEq)]
pub enum Support {
    /// All of R^d. Violates the compact-support assumption of the local-power
    /// theory; reported, not enforced.
    AllSpace,
    /// A compact axis-aligned box.
    CompactBox(Vec<(f64, f64)>),
}

impl Support {
    pub fn is_compact(&self) -> bool {
        matches!(self, Support::CompactBox(_))
    }
}

/// Normalized density `p^e / ∫ p^e` together with the mass `∫ p^e dx`;
/// used for importance sampling of tilted integrands in d > 3.
pub struct TiltedDensity {
    /// log ∫ pᵉ(x) dx.
    pub log_mass: f64,
    pub sampler: Box<dyn Fn(&mut StreamRng, &mut [f64]) + Send + Sync>,
}

/// A parametric density family: evaluation, parameter score, spatial Hessian
/// trace, sampler, and support descriptor.
///
/// `density`, `score`, `spatial_hessian_trace` and `sample_into` assume a
/// parameter already vetted by [`FamilyModel::check_theta`]; hot loops validate
/// once at the boundary.
pub trait FamilyModel: Send + Sync {
    fn dim(&self) -> usize;

    fn param_dim(&self) -> usize;

    fn support(&self) -> Support;

    fn check_theta(&self, theta: &[f64]) -> Result<()>;

    fn density(&self, x: &[f64], theta: &[f64]) -> f64;

    /// Parameter gradient of the density itself, ∇_θ p(x|θ).
    fn score(&self, x: &[f64], theta: &[f64]) -> Vec<f64>;

    /// Trace of the spatial Hessian of the density, tr H_x p(x|θ) (the
    /// Laplacian in x).
    fn spatial_hessian_trace(&self, x: &[f64], theta: &[f64]) -> f64;

    fn sample_into(&self, theta: &[f64], rng: &mut StreamRng, out: &mut [f64]) -> Result<()>;

    /// Effective integration box at θ (covers all but ≲1e-12 of the mass).
    fn quad_box(&self, theta: &[f64]) -> Option<Vec<(f64, f64)>>;

    /// Closed form for ∇_θ( tr(H_x p)/p ) when the family has one.
    fn laplacian_ratio_theta_grad(&self, _x: &[f64], _theta: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Closed form for E[(hᵀ∇_θ p(X|θ)/p(X|θ))²], X ~ p(·|θ), when available.
    fn log_score_sq_moment(&self, _theta: &[f64], _h: &[f64]) -> Option<f64> {
        None
    }

    /// Normalized tilted density p^e, when the family can sample it exactly.
    fn tilted(&self, _theta: &[f64], _exponent: f64) -> Option<TiltedDensity> {
        None
    }
}

/// View of a family frozen at one parameter value, usable as a [`Density`].
pub struct FamilyDensity<'a> {
    family: &'a dyn FamilyModel,
    theta: Vec<f64>,
}

impl<'a> FamilyDensity<'a> {
    pub fn new(family: &'a dyn FamilyModel, theta: &[f64]) -> Result<Self> {
        family.check_theta(theta)?;
        Ok(Self {
            family,
            theta: theta.to_vec(),
        })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn family(&self) -> &'a dyn FamilyModel {
        self.family
    }
}

impl Density for FamilyDensity<'_> {
    fn dim(&self) -> usize {
        self.family.dim()
    }

    fn pdf(&self, x: &[f64]) -> f64 {
        self.family.density(x, &self.theta)
    }

    fn sample_into(&self, rng: &mut StreamRng, out: &mut [f64]) -> Result<()> {
        self.family.sample_into(&self.theta, rng, out)
    }

    fn quad_box(&self) -> Option<Vec<(f64, f64)>> {
        self.family.quad_box(&self.theta)
    }
}

/// The spherical normal family N(0, θ²I_d), θ ∈ (0,∞).
#[derive(Clone, Copy, Debug)]
pub struct SphericalNormal {
    dim: usize,
}

/// One-parameter spherical normal family in dimension d.
pub fn spherical_normal_family(dim: usize) -> Result<SphericalNormal> {
    if dim == 0 {
        return Err(Error::Validation("dimension must be >= 1".into()));
    }
    Ok(SphericalNormal { dim })
}

impl SphericalNormal {
    fn sq_norm(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn log_density(&self, x: &[f64], theta: f64) -> f64 {
        let d = self.dim as f64;
        -0.5 * d * (2.0 * std::f64::consts::PI * theta * theta).ln()
            - Self::sq_norm(x) / (2.0 * theta * theta)
    }
}

impl FamilyModel for SphericalNormal {
    fn dim(&self) -> usize {
        self.dim
    }

    fn param_dim(&self) -> usize {
        1
    }

    fn support(&self) -> Support {
        Support::AllSpace
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != 1 {
            return Err(Error::ParameterDomain(format!(
                "spherical normal takes one parameter, got {}",
                theta.len()
            )));
        }
        if !(theta[0] > 0.0) || !theta[0].is_finite() {
            return Err(Error::ParameterDomain(format!(
                "spherical normal requires θ > 0, got {}",
                theta[0]
            )));
        }
        Ok(())
    }

    fn density(&self, x: &[f64], theta: &[f64]) -> f64 {
        self.log_density(x, theta[0]).exp()
    }

    fn score(&self, x: &[f64], theta: &[f64]) -> Vec<f64> {
        // (d/dθ) log p = -d/θ + ‖x‖²/θ³
        let t = theta[0];
        let d = self.dim as f64;
        let p = self.density(x, theta);
        vec![p * (-d / t + Self::sq_norm(x) / (t * t * t))]
    }

    fn spatial_hessian_trace(&self, x: &[f64], theta: &[f64]) -> f64 {
        let t2 = theta[0] * theta[0];
        let p = self.density(x, theta);
        p * (Self::sq_norm(x) / (t2 * t2) - self.dim as f64 / t2)
    }

    fn sample_into(&self, theta: &[f64], rng: &mut StreamRng, out: &mut [f64]) -> Result<()> {
        for slot in out.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *slot = theta[0] * z;
        }
        Ok(())
    }

    fn quad_box(&self, theta: &[f64]) -> Option<Vec<(f64, f64)>> {
        // ±10σ leaves ≈ 1.5e-23 of mass outside per coordinate.
        let r = 10.0 * theta[0];
        Some(vec![(-r, r); self.dim])
    }

    fn laplacian_ratio_theta_grad(&self, x: &[f64], theta: &[f64]) -> Option<Vec<f64>> {
        // tr(H_x p)/p = ‖x‖²/θ⁴ - d/θ², so ∂_θ = -4‖x‖²/θ⁵ + 2d/θ³.
        let t = theta[0];
        Some(vec![
            -4.0 * Self::sq_norm(x) / t.powi(5) + 2.0 * self.dim as f64 / t.powi(3),
        ])
    }

    fn log_score_sq_moment(&self, theta: &[f64], h: &[f64]) -> Option<f64> {
        // E[((d/dθ) log p)²] = Var(χ²_d)/θ² = 2d/θ².
        Some(h[0] * h[0] * 2.0 * self.dim as f64 / (theta[0] * theta[0]))
    }

    fn tilted(&self, theta: &[f64], exponent: f64) -> Option<TiltedDensity> {
        if exponent <= 0.0 {
            return None;
        }
        let d = self.dim as f64;
        let t = theta[0];
        // ∫ pᵉ = (2πθ²)^{d(1-e)/2} e^{-d/2}; pᵉ normalized is N(0, θ²/e I).
        let log_mass = 0.5 * d * (1.0 - exponent) * (2.0 * std::f64::consts::PI * t * t).ln()
            - 0.5 * d * exponent.ln();
        let scale = t / exponent.sqrt();
        Some(TiltedDensity {
            log_mass,
            sampler: Box::new(move |rng, out| {
                for slot in out.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *slot = scale * z;
                }
            }),
        })
    }
}

/// Isotropic Gaussian N(mean, σ²I) — a plain [`Density`] for fixed
/// alternatives such as mean-shifted pairs.
#[derive(Clone, Debug)]
pub struct IsotropicGaussian {
    mean: Vec<f64>,
    sigma: f64,
}

impl IsotropicGaussian {
    pub fn new(mean: Vec<f64>, sigma: f64) -> Result<Self> {
        if mean.is_empty() || mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::Validation("invalid Gaussian mean".into()));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "Gaussian σ must be positive, got {sigma}"
            )));
        }
        Ok(Self { mean, sigma })
    }

    /// Standard normal in dimension d.
    pub fn standard(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            sigma: 1.0,
        }
    }
}

impl Density for IsotropicGaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn pdf(&self, x: &[f64]) -> f64 {
        let d = self.mean.len() as f64;
        let s2 = self.sigma * self.sigma;
        let sq: f64 = x
            .iter()
            .zip(&self.mean)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (-0.5 * d * (2.0 * std::f64::consts::PI * s2).ln() - sq / (2.0 * s2)).exp()
    }

    fn sample_into(&self, rng: &mut StreamRng, out: &mut [f64]) -> Result<()> {
        for (slot, m) in out.iter_mut().zip(&self.mean) {
            let z: f64 = rng.sample(StandardNormal);
            *slot = m + self.sigma * z;
        }
        Ok(())
    }

    fn quad_box(&self) -> Option<Vec<(f64, f64)>> {
        let r = 10.0 * self.sigma;
        Some(self.mean.iter().map(|&m| (m - r, m + r)).collect())
    }
}

/// A base family truncated to a compact box and renormalized; the compact
/// support wrapper for the local-power assumptions. Densities are exact
/// (quadrature normalizer), so the wrapper is limited to d ≤ 3.
pub struct TruncatedFamily<F: FamilyModel> {
    base: F,
    bounds: Vec<(f64, f64)>,
    norm_cache: Mutex<BTreeMap<Vec<u64>, (f64, Vec<f64>)>>,
}

impl<F: FamilyModel> TruncatedFamily<F> {
    pub fn new(base: F, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.len() != base.dim() {
            return Err(Error::Validation(format!(
                "truncation box of dimension {} for family of dimension {}",
                bounds.len(),
                base.dim()
            )));
        }
        if base.dim() > 3 {
            return Err(Error::Validation(
                "truncated families are supported for d <= 3 (quadrature normalizer)".into(),
            ));
        }
        for &(lo, hi) in &bounds {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Validation(format!(
                    "invalid truncation bounds [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self {
            base,
            bounds,
            norm_cache: Mutex::new(BTreeMap::new()),
        })
    }

    fn inside(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.bounds)
            .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    /// Z(θ) = ∫_box p(x|θ) dx and its parameter gradient.
    fn compute_normalizer(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mass = integrate::quad_box(
            &|x: &[f64]| self.base.density(x, theta),
            &self.bounds,
            1e-11,
            1e-13,
        )?
        .value;
        let grad = (0..self.base.param_dim())
            .map(|i| {
                Ok(integrate::quad_box(
                    &|x: &[f64]| self.base.score(x, theta)[i],
                    &self.bounds,
                    1e-10,
                    1e-12,
                )?
                .value)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok((mass, grad))
    }

    /// Cached normalizer; `check_theta` fills the cache fallibly, so density
    /// evaluation on a vetted parameter never recomputes.
    fn normalizer(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let key: Vec<u64> = theta.iter().map(|t| t.to_bits()).collect();
        if let Some(hit) = self.norm_cache.lock().expect("poisoned").get(&key) {
            return hit.clone();
        }
        let out = self
            .compute_normalizer(theta)
            .expect("normalizer quadrature; call check_theta first to surface this error");
        self.norm_cache
            .lock()
            .expect("poisoned")
            .insert(key, out.clone());
        out
    }
}

impl<F: FamilyModel> FamilyModel for TruncatedFamily<F> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn param_dim(&self) -> usize {
        self.base.param_dim()
    }

    fn support(&self) -> Support {
        Support::CompactBox(self.bounds.clone())
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        self.base.check_theta(theta)?;
        let key: Vec<u64> = theta.iter().map(|t| t.to_bits()).collect();
        if !self.norm_cache.lock().expect("poisoned").contains_key(&key) {
            let out = self.compute_normalizer(theta)?;
            self.norm_cache.lock().expect("poisoned").insert(key, out);
        }
        let (mass, _) = self.normalizer(theta);
        if !(mass > 0.0) {
            return Err(Error::NumericalDegeneracy(
                "truncation box carries zero mass".into(),
            ));
        }
        Ok(())
    }

    fn density(&self, x: &[f64], theta: &[f64]) -> f64 {
        if !self.inside(x) {
            return 0.0;
        }
        self.base.density(x, theta) / self.normalizer(theta).0
    }

    fn score(&self, x: &[f64], theta: &[f64]) -> Vec<f64> {
        if !self.inside(x) {
            return vec![0.0; self.param_dim()];
        }
        // ∇θ (p/Z) = ∇θp / Z - p ∇θZ / Z².
        let (z, dz) = self.normalizer(theta);
        let p = self.base.density(x, theta);
        self.base
            .score(x, theta)
            .iter()
            .zip(&dz)
            .map(|(&sp, &dzi)| sp / z - p * dzi / (z * z))
            .collect()
    }

    fn spatial_hessian_trace(&self, x: &[f64], theta: &[f64]) -> f64 {
        if !self.inside(x) {
            return 0.0;
        }
        self.base.spatial_hessian_trace(x, theta) / self.normalizer(theta).0
    }

    fn sample_into(&self, theta: &[f64], rng: &mut StreamRng, out: &mut [f64]) -> Result<()> {
        const MAX_REJECTS: u32 = 1_000_000;
        for _ in 0..MAX_REJECTS {
            self.base.sample_into(theta, rng, out)?;
            if self.inside(out) {
                return Ok(());
            }
        }
        Err(Error::NumericalDegeneracy(
            "rejection sampler exhausted; truncation box mass is too small".into(),
        ))
    }

    fn quad_box(&self, _theta: &[f64]) -> Option<Vec<(f64, f64)>> {
        Some(self.bounds.clone())
    }
}

/// The pooled labeled sample: points of the Poisson process with their marks.
#[derive(Clone, Debug)]
pub struct LabeledPointCloud {
    cloud: PointCloud,
    labels: Vec<u8>,
    design: SampleDesign,
}

impl LabeledPointCloud {
    pub fn new(cloud: PointCloud, labels: Vec<u8>, design: SampleDesign) -> Result<Self> {
        if labels.len() != cloud.len() {
            return Err(Error::Validation(format!(
                "{} labels for {} points",
                labels.len(),
                cloud.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l != 1 && l != 2) {
            return Err(Error::Validation(format!(
                "labels must be 1 or 2, found {bad}"
            )));
        }
        Ok(Self {
            cloud,
            labels,
            design,
        })
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn design(&self) -> SampleDesign {
        self.design
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn count_label(&self, label: u8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Replace the labels, keeping locations and design.
    pub fn with_labels(&self, labels: Vec<u8>) -> Result<Self> {
        Self::new(self.cloud.clone(), labels, self.design)
    }
}

/// One Poisson(N) draw.
pub fn sample_count_with_rng(n: f64, rng: &mut StreamRng) -> Result<u64> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Validation(format!(
            "Poisson intensity must be positive and finite, got {n}"
        )));
    }
    let poisson = Poisson::new(n)
        .map_err(|e| Error::Validation(format!("Poisson intensity {n} rejected: {e}")))?;
    Ok(poisson.sample(rng) as u64)
}

/// One Poisson(N) draw, reproducible per seed.
pub fn sample_count(n: f64, seed: u64) -> Result<u64> {
    sample_count_with_rng(n, &mut substream(seed, &[0x4C4E]))
}

/// Mark probabilities P(c_z = 1) = N₁f(z) / (N₁f(z) + N₂g(z)) for every point
/// of the cloud. Errors where the mixture intensity vanishes.
pub fn label_probabilities(
    design: SampleDesign,
    f: &dyn Density,
    g: &dyn Density,
    cloud: &PointCloud,
) -> Result<Vec<f64>> {
    if f.dim() != cloud.dim() || g.dim() != cloud.dim() {
        return Err(Error::Validation(format!(
            "density dimensions ({}, {}) do not match cloud dimension {}",
            f.dim(),
            g.dim(),
            cloud.dim()
        )));
    }
    cloud
        .iter_points()
        .map(|z| {
            let w1 = design.n1 as f64 * f.pdf(z);
            let w2 = design.n2 as f64 * g.pdf(z);
            let total = w1 + w2;
            if !(total > 0.0) || !total.is_finite() {
                return Err(Error::NumericalDegeneracy(format!(
                    "mixture intensity {total} at a sampled point"
                )));
            }
            Ok(w1 / total)
        })
        .collect()
}

/// Draw labels 1/2 independently with the given label-1 probabilities.
pub fn draw_labels(probs: &[f64], rng: &mut StreamRng) -> Vec<u8> {
    probs
        .iter()
        .map(|&p1| if rng.random::<f64>() < p1 { 1 } else { 2 })
        .collect()
}

/// Sample the Poissonized two-sample data with intensity N₁f + N₂g.
pub fn sample_poissonized_with_rng(
    design: SampleDesign,
    f: &dyn Density,
    g: &dyn Density,
    rng: &mut StreamRng,
) -> Result<LabeledPointCloud> {
    if f.dim() != g.dim() {
        return Err(Error::Validation(format!(
            "mixture components have dimensions {} and {}",
            f.dim(),
            g.dim()
        )));
    }
    let dim = f.dim();
    let count = sample_count_with_rng(design.n(), rng)? as usize;
    let p1 = design.p();

    let mut coords = vec![0.0; count * dim];
    let mut labels = Vec::with_capacity(count);
    for row in coords.chunks_exact_mut(dim) {
        if rng.random::<f64>() < p1 {
            f.sample_into(rng, row)?;
        } else {
            g.sample_into(rng, row)?;
        }
        let w1 = design.n1 as f64 * f.pdf(row);
        let w2 = design.n2 as f64 * g.pdf(row);
        let total = w1 + w2;
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::NumericalDegeneracy(format!(
                "mixture intensity {total} at a sampled point"
            )));
        }
        labels.push(if rng.random::<f64>() * total < w1 { 1 } else { 2 });
    }
    LabeledPointCloud::new(PointCloud::new(dim, coords)?, labels, design)
}

/// Sample the Poissonized two-sample data, reproducible per seed.
pub fn sample_poissonized(
    design: SampleDesign,
    f: &dyn Density,
    g: &dyn Density,
    seed: u64,
) -> Result<LabeledPointCloud> {
    sample_poissonized_with_rng(design, f, g, &mut substream(seed, &[0x5053]))
}

/// Write `x1,...,xd,label` CSV. Floats use shortest round-trip formatting, so
/// parsing recovers every coordinate bit for bit.
pub fn write_labeled_csv(labeled: &LabeledPointCloud, w: &mut impl Write) -> Result<()> {
    let dim = labeled.cloud().dim();
    for c in 0..dim {
        write!(w, "{}x{}", if c == 0 { "" } else { "," }, c + 1)?;
    }
    writeln!(w, ",label")?;
    for (point, label) in labeled.cloud().iter_points().zip(labeled.labels()) {
        for coord in point {
            write!(w, "{coord},")?;
        }
        writeln!(w, "{label}")?;
    }
    Ok(())
}

/// Read the CSV written by [`write_labeled_csv`]; the design is not part of
/// the file and is supplied by the caller.
pub fn read_labeled_csv(r: impl BufRead) -> Result<(PointCloud, Vec<u8>)> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".into()))??;
    let cols: Vec<&str> = header.trim_end().split(',').collect();
    if cols.len() < 2 || cols[cols.len() - 1] != "label" {
        return Err(Error::Parse(format!("unexpected CSV header '{header}'")));
    }
    let dim = cols.len() - 1;
    for (i, col) in cols[..dim].iter().enumerate() {
        if *col != format!("x{}", i + 1) {
            return Err(Error::Parse(format!(
                "unexpected CSV column '{col}', expected x{}",
                i + 1
            )));
        }
    }

    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for (line_no, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {}",
                line_no + 2,
                fields.len(),
                dim + 1
            )));
        }
        for field in &fields[..dim] {
            let v: f64 = field
                .parse()
                .map_err(|e| Error::Parse(format!("row {}: {e}", line_no + 2)))?;
            coords.push(v);
        }
        let label: u8 = fields[dim]
            .parse()
            .map_err(|e| Error::Parse(format!("row {}: {e}", line_no + 2)))?;
        labels.push(label);
    }
    let cloud = PointCloud::new(dim, coords)?;
    if labels.iter().any(|&l| l != 1 && l != 2) {
        return Err(Error::Parse("labels must be 1 or 2".into()));
    }
    Ok((cloud, labels))
}
