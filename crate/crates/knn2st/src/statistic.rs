//! The cross-edge statistic, its null standardization, and exact conditional
//! moments given the point locations.
//!
//! T counts directed k-NN edges whose tail is marked 1 and head is marked 2.
//! Under the null the standardized statistic R = (T − Nk·N₁N₂/N²)/(k√N σ₀) is
//! asymptotically N(0,1) with σ₀² = pq((p−q)² + pq); the 1-sided test rejects
//! when R < z_α, the 2-sided when |R| > z_{1−α/2}.
//!
//! Conditionally on locations, each edge indicator is Bernoulli with
//! h_N(x,y) = P(c_x=1)·P(c_y=2); indicators of edges sharing an endpoint are
//! correlated, and [`conditional_variance_exact`] sums every such covariance
//! term (shared tail, shared head, head-to-tail, mutual edges) exactly.

use crate::error::{Error, Result};
use crate::gauss::{std_normal_cdf, std_normal_quantile};
use crate::knn_graph::{build_knn_graph_indexed, DirectedKnnGraph, PointCloud};
use crate::rng::{substream, StreamRng};
use crate::sampling::{draw_labels, label_probabilities, Density, LabeledPointCloud, SampleDesign};

/// Which rejection rule to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Side {
    /// Reject for small R (few cross edges).
    #[serde(rename = "one")]
    OneSided,
    /// Reject for large |R|.
    #[serde(rename = "two")]
    TwoSided,
    /// Standardize by the permutation-null conditional moments given the
    /// locations; one-sided rejection.
    #[serde(rename = "conditional")]
    Conditional,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::OneSided => "one",
            Side::TwoSided => "two",
            Side::Conditional => "conditional",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" | "one-sided" | "1" => Ok(Side::OneSided),
            "two" | "two-sided" | "2" => Ok(Side::TwoSided),
            "conditional" | "cond" => Ok(Side::Conditional),
            other => Err(Error::Validation(format!(
                "unknown side '{other}' (expected one, two or conditional)"
            ))),
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Level, neighbor count and side for one test run.
#[derive(Clone, Copy, Debug)]
pub struct TestConfig {
    pub alpha: f64,
    pub k: usize,
    pub side: Side,
}

impl TestConfig {
    pub fn new(alpha: f64, k: usize, side: Side) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Validation(format!(
                "level alpha must lie in (0,1), got {alpha}"
            )));
        }
        if k == 0 {
            return Err(Error::Validation("neighbor count k must be >= 1".into()));
        }
        Ok(Self { alpha, k, side })
    }
}

/// Result of one test: the raw count, the standardization actually used,
/// decision and approximate p-value.
///
/// `r_stat == (t_stat − null_mean) / (k·√N·sigma0)` on every path; for the
/// conditional side `null_mean` holds the conditional mean and `sigma0` the
/// matching constant √Var(T|locations)/(k√N).
#[derive(Clone, Debug)]
pub struct TestOutcome {
    pub t_stat: u64,
    pub null_mean: f64,
    pub sigma0: f64,
    pub r_stat: f64,
    /// `None` for a no-decision outcome on degenerate inputs (L < 2).
    pub decision: Option<bool>,
    pub p_value: f64,
    pub k: usize,
    pub alpha: f64,
    pub side: Side,
    /// Set when the cloud was too small for the requested k (degree clamped)
    /// or too small to test at all.
    pub degraded: bool,
    /// Label-resampling p-value, when requested from [`conditional_test`].
    pub perm_p_value: Option<f64>,
}

/// Exact first two moments of T given the locations, and the standardized
/// statistic.
#[derive(Clone, Copy, Debug)]
pub struct ConditionalMoments {
    pub cond_mean: f64,
    pub cond_var: f64,
    /// (T − cond_mean)/√cond_var.
    pub r_cond: f64,
}

/// Number of directed edges (x, y) with label(x) = 1 and label(y) = 2.
pub fn cross_edge_count(graph: &DirectedKnnGraph, labeled: &LabeledPointCloud) -> Result<u64> {
    if graph.len() != labeled.len() {
        return Err(Error::Validation(format!(
            "graph on {} vertices, {} labels",
            graph.len(),
            labeled.len()
        )));
    }
    let labels = labeled.labels();
    let mut count = 0u64;
    for v in 0..graph.len() {
        if labels[v] == 1 {
            count += graph
                .out_neighbors(v)
                .iter()
                .filter(|&&u| labels[u as usize] == 2)
                .count() as u64;
        }
    }
    Ok(count)
}

/// Null expectation N·k·N₁N₂/N².
pub fn null_mean(design: &SampleDesign, k: usize) -> f64 {
    design.n() * k as f64 * design.p() * design.q()
}

/// Null variance constant σ₀² = pq((p−q)² + pq).
pub fn null_variance_sigma0(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Validation(format!(
            "proportion p must lie in (0,1), got {p}"
        )));
    }
    let q = 1.0 - p;
    Ok(p * q * ((p - q) * (p - q) + p * q))
}

fn no_decision_outcome(t: u64, config: &TestConfig) -> TestOutcome {
    TestOutcome {
        t_stat: t,
        null_mean: f64::NAN,
        sigma0: f64::NAN,
        r_stat: f64::NAN,
        decision: None,
        p_value: f64::NAN,
        k: config.k,
        alpha: config.alpha,
        side: config.side,
        degraded: true,
        perm_p_value: None,
    }
}

fn decide(r: f64, side: Side, alpha: f64) -> (bool, f64) {
    match side {
        Side::OneSided | Side::Conditional => {
            let z = std_normal_quantile(alpha);
            (r < z, std_normal_cdf(r))
        }
        Side::TwoSided => {
            let z = std_normal_quantile(1.0 - alpha / 2.0);
            (r.abs() > z, (2.0 * (1.0 - std_normal_cdf(r.abs()))).min(1.0))
        }
    }
}

/// Run the two-sample test on an already-built graph.
pub fn run_test_on_graph(
    graph: &DirectedKnnGraph,
    labeled: &LabeledPointCloud,
    config: &TestConfig,
) -> Result<TestOutcome> {
    let t = cross_edge_count(graph, labeled)?;
    let design = labeled.design();
    let n = design.n();
    let degraded = graph.out_degree() < config.k;

    let (center, scale_sigma) = match config.side {
        Side::OneSided | Side::TwoSided => {
            let sigma0 = null_variance_sigma0(design.p())?.sqrt();
            (null_mean(&design, config.k), sigma0)
        }
        Side::Conditional => {
            // Permutation-null conditional moments: under H0 every label is 1
            // with probability p independently of location.
            let probs = vec![design.p(); labeled.len()];
            let (mean, var) = conditional_moments_core(graph_adjacency(graph), &probs);
            if !(var > 0.0) {
                return Err(Error::DegenerateTest(format!(
                    "conditional variance {var} is not positive"
                )));
            }
            (mean, var.sqrt() / (config.k as f64 * n.sqrt()))
        }
    };

    let r = (t as f64 - center) / (config.k as f64 * n.sqrt() * scale_sigma);
    let (reject, p_value) = decide(r, config.side, config.alpha);
    Ok(TestOutcome {
        t_stat: t,
        null_mean: center,
        sigma0: scale_sigma,
        r_stat: r,
        decision: Some(reject),
        p_value,
        k: config.k,
        alpha: config.alpha,
        side: config.side,
        degraded,
        perm_p_value: None,
    })
}

/// Build the k-NN graph and run the configured test.
///
/// Degenerate clouds (fewer than 2 points) yield a no-decision outcome rather
/// than an error so batch runs can record and skip them; clouds smaller than
/// k+1 still compute, flagged degraded, with the out-degree clamped.
pub fn run_test(labeled: &LabeledPointCloud, config: &TestConfig) -> Result<TestOutcome> {
    if labeled.len() < 2 {
        return Ok(no_decision_outcome(0, config));
    }
    let graph = build_knn_graph_indexed(labeled.cloud(), config.k)?;
    run_test_on_graph(&graph, labeled, config)
}

/// Σ over edges of h_N(x,y): the exact conditional expectation E(T | locations).
pub fn conditional_mean(
    graph: &DirectedKnnGraph,
    cloud: &PointCloud,
    f: &dyn Density,
    g: &dyn Density,
    design: SampleDesign,
) -> Result<f64> {
    check_graph_cloud(graph, cloud)?;
    let probs = label_probabilities(design, f, g, cloud)?;
    Ok(conditional_moments_core(graph_adjacency(graph), &probs).0)
}

/// Exact Var(T | locations): Bernoulli variances plus all shared-endpoint
/// covariances.
pub fn conditional_variance_exact(
    graph: &DirectedKnnGraph,
    cloud: &PointCloud,
    f: &dyn Density,
    g: &dyn Density,
    design: SampleDesign,
) -> Result<f64> {
    check_graph_cloud(graph, cloud)?;
    let probs = label_probabilities(design, f, g, cloud)?;
    Ok(conditional_moments_core(graph_adjacency(graph), &probs).1)
}

/// Both conditional moments and the standardized statistic for the observed T.
pub fn conditional_moments(
    graph: &DirectedKnnGraph,
    labeled: &LabeledPointCloud,
    f: &dyn Density,
    g: &dyn Density,
) -> Result<ConditionalMoments> {
    check_graph_cloud(graph, labeled.cloud())?;
    let t = cross_edge_count(graph, labeled)?;
    let probs = label_probabilities(labeled.design(), f, g, labeled.cloud())?;
    let (mean, var) = conditional_moments_core(graph_adjacency(graph), &probs);
    Ok(ConditionalMoments {
        cond_mean: mean,
        cond_var: var,
        r_cond: (t as f64 - mean) / var.sqrt(),
    })
}

/// The conditional test: standardize T by the exact conditional moments under
/// (f, g) and reject per the configured side. With `resamples = Some((R,
/// seed))` an exact label-resampling p-value is attached, computed as
/// (1 + #{T* ≤ T}) / (R + 1) with ties counted.
pub fn conditional_test(
    labeled: &LabeledPointCloud,
    f: &dyn Density,
    g: &dyn Density,
    config: &TestConfig,
    resamples: Option<(u32, u64)>,
) -> Result<TestOutcome> {
    if labeled.len() < 2 {
        return Ok(no_decision_outcome(0, config));
    }
    let graph = build_knn_graph_indexed(labeled.cloud(), config.k)?;
    let t = cross_edge_count(&graph, labeled)?;
    let probs = label_probabilities(labeled.design(), f, g, labeled.cloud())?;
    let (mean, var) = conditional_moments_core(graph_adjacency(&graph), &probs);
    if !(var > 0.0) {
        return Err(Error::DegenerateTest(format!(
            "conditional variance {var} is not positive (all edge probabilities 0 or 1)"
        )));
    }

    let r = (t as f64 - mean) / var.sqrt();
    let side = match config.side {
        Side::Conditional => Side::OneSided,
        s => s,
    };
    let (reject, p_value) = decide(r, side, config.alpha);

    let perm_p_value = resamples.map(|(reps, seed)| {
        let mut rng = substream(seed, &[0x5045524D]);
        let at_most = (0..reps)
            .filter(|_| resampled_t(&graph, &probs, &mut rng) <= t)
            .count();
        (at_most + 1) as f64 / (reps + 1) as f64
    });

    let n = labeled.design().n();
    Ok(TestOutcome {
        t_stat: t,
        null_mean: mean,
        sigma0: var.sqrt() / (config.k as f64 * n.sqrt()),
        r_stat: r,
        decision: Some(reject),
        p_value,
        k: config.k,
        alpha: config.alpha,
        side: config.side,
        degraded: graph.out_degree() < config.k,
        perm_p_value,
    })
}

fn resampled_t(graph: &DirectedKnnGraph, probs: &[f64], rng: &mut StreamRng) -> u64 {
    let labels = draw_labels(probs, rng);
    let mut count = 0u64;
    for v in 0..graph.len() {
        if labels[v] == 1 {
            count += graph
                .out_neighbors(v)
                .iter()
                .filter(|&&u| labels[u as usize] == 2)
                .count() as u64;
        }
    }
    count
}

fn check_graph_cloud(graph: &DirectedKnnGraph, cloud: &PointCloud) -> Result<()> {
    if graph.len() != cloud.len() {
        return Err(Error::Validation(format!(
            "graph on {} vertices for a cloud of {} points",
            graph.len(),
            cloud.len()
        )));
    }
    Ok(())
}

/// Adjacency view: (out-neighbor slices, in-neighbor slices).
type Adjacency<'a> = (Vec<&'a [u32]>, Vec<&'a [u32]>);

fn graph_adjacency(graph: &DirectedKnnGraph) -> Adjacency<'_> {
    let out = (0..graph.len()).map(|v| graph.out_neighbors(v)).collect();
    let inn = (0..graph.len()).map(|v| graph.in_neighbors(v)).collect();
    (out, inn)
}

/// Exact conditional mean and variance of T from per-point label-1
/// probabilities.
///
/// With h(u,v) = P₁(u)P₂(v) and edge indicators V_{u,v} ~ Ber(h(u,v)):
///   Var = Σ_e h(1−h)
///       + 2 Σ_v Σ_{y<z ∈ out(v)} [P₁(v)P₂(y)P₂(z) − h(v,y)h(v,z)]   (shared tail)
///       + 2 Σ_v Σ_{y<z ∈ in(v)}  [P₂(v)P₁(y)P₁(z) − h(y,v)h(z,v)]   (shared head)
///       − 2 Σ_v Σ_{y∈in(v), z∈out(v), y≠z} h(y,v)h(v,z)              (head-to-tail)
///       − 2 Σ_{mutual pairs {u,v}} h(u,v)h(v,u)
/// where E[V_{y,v}V_{v,z}] = 0 because the shared point cannot carry both marks.
fn conditional_moments_core(adj: Adjacency<'_>, probs: &[f64]) -> (f64, f64) {
    let (out, inn) = adj;
    let len = probs.len();
    debug_assert_eq!(out.len(), len);
    debug_assert_eq!(inn.len(), len);

    let mut mean = 0.0;
    let mut var_term = 0.0;
    let mut up = 0.0;
    let mut dn = 0.0;
    let mut prod = 0.0;
    let mut mut_diag = 0.0;

    let mut sorted_out: Vec<u32> = Vec::new();
    for v in 0..len {
        let p1v = probs[v];
        let p2v = 1.0 - p1v;

        let mut s2 = 0.0;
        let mut ss2 = 0.0;
        for &z in out[v] {
            let p2z = 1.0 - probs[z as usize];
            let h = p1v * p2z;
            var_term += h * (1.0 - h);
            s2 += p2z;
            ss2 += p2z * p2z;
        }
        let mut s1 = 0.0;
        let mut ss1 = 0.0;
        for &y in inn[v] {
            let p1y = probs[y as usize];
            s1 += p1y;
            ss1 += p1y * p1y;
        }

        mean += p1v * s2;
        up += p1v * p2v * 0.5 * (s2 * s2 - ss2);
        dn += p1v * p2v * 0.5 * (s1 * s1 - ss1);
        // Full in×out product; the y = z (mutual-edge) diagonal is removed and
        // then charged once more as the mutual-pair covariance, so the two
        // corrections combine to a single +diag below.
        prod += (p2v * s1) * (p1v * s2);

        sorted_out.clear();
        sorted_out.extend_from_slice(out[v]);
        sorted_out.sort_unstable();
        for &y in inn[v] {
            if sorted_out.binary_search(&y).is_ok() {
                let yu = y as usize;
                mut_diag += (probs[yu] * p2v) * (p1v * (1.0 - probs[yu]));
            }
        }
    }

    let var = var_term + 2.0 * (up + dn) - 2.0 * prod + mut_diag;
    (mean, var.max(0.0))
}

/// Test-only entry: moments on an arbitrary edge list (not necessarily a k-NN
/// graph).
#[cfg(test)]
pub(crate) fn conditional_moments_edge_list(
    len: usize,
    edges: &[(u32, u32)],
    probs: &[f64],
) -> (f64, f64) {
    let mut out: Vec<Vec<u32>> = vec![Vec::new(); len];
    let mut inn: Vec<Vec<u32>> = vec![Vec::new(); len];
    for &(u, v) in edges {
        out[u as usize].push(v);
        inn[v as usize].push(u);
    }
    let out_refs: Vec<&[u32]> = out.iter().map(|v| v.as_slice()).collect();
    let in_refs: Vec<&[u32]> = inn.iter().map(|v| v.as_slice()).collect();
    conditional_moments_core((out_refs, in_refs), probs)
}
