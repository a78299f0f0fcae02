//! Frequency nodes `h_j(n)` in `[-1, 1]`.

use std::fmt;

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::PrecisionPolicy;
use crate::scalar::pi;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeScheme {
    Equispaced,
    Chebyshev,
    Custom,
}

impl fmt::Display for NodeScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeScheme::Equispaced => "equispaced",
            NodeScheme::Chebyshev => "chebyshev",
            NodeScheme::Custom => "custom",
        })
    }
}

impl std::str::FromStr for NodeScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equispaced" => Ok(NodeScheme::Equispaced),
            "chebyshev" => Ok(NodeScheme::Chebyshev),
            "custom" => Ok(NodeScheme::Custom),
            _ => Err(Error::InvalidInput(format!("unknown node scheme '{s}'"))),
        }
    }
}

/// A single node, stored exactly whenever it is rational.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Exact(Rational),
    /// `cos(j π / n)`, irrational.
    Cosine { j: u32, n: u32 },
}

impl Node {
    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Node::Exact(r) => Some(r),
            Node::Cosine { .. } => None,
        }
    }

    pub fn to_float(&self, prec: u32) -> Float {
        match self {
            Node::Exact(r) => Float::with_val(prec, r),
            Node::Cosine { j, n } => {
                // cos((n-j)π/n) = -cos(jπ/n); evaluate on the half with the smaller angle
                let (k, sign) = if 2 * j > *n { (n - j, -1) } else { (*j, 1) };
                let guard = prec + 32;
                let angle = pi(guard) * k / *n;
                let c = Float::with_val(prec, angle.cos());
                if sign < 0 {
                    -c
                } else {
                    c
                }
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Node::Exact(r) => r.to_f64(),
            Node::Cosine { .. } => self.to_float(64).to_f64(),
        }
    }
}

/// The points `h_0..h_n` of a generalized Fourier sequence of order `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSet {
    scheme: NodeScheme,
    points: Vec<Node>,
    min_gap: f64,
}

impl NodeSet {
    pub fn equispaced(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidInput("equispaced nodes need n >= 1".into()));
        }
        let points = (0..=n)
            .map(|j| Node::Exact(Rational::from(1) - Rational::from((2 * j as i64, n as i64))))
            .collect();
        Self::build(NodeScheme::Equispaced, points)
    }

    pub fn chebyshev(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidInput("chebyshev nodes need n >= 1".into()));
        }
        let points = (0..=n).map(|j| chebyshev_node(j as u32, n as u32)).collect();
        Self::build(NodeScheme::Chebyshev, points)
    }

    pub fn custom(points: Vec<Rational>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("custom node list needs at least two points".into()));
        }
        Self::build(NodeScheme::Custom, points.into_iter().map(Node::Exact).collect())
    }

    fn build(scheme: NodeScheme, points: Vec<Node>) -> Result<Self> {
        let one = Rational::from(1);
        for (j, p) in points.iter().enumerate() {
            if let Node::Exact(r) = p {
                if Rational::from(r.abs_ref()) > one {
                    return Err(Error::OutOfRange(format!("|h_{j}| = |{r}| > 1")));
                }
            }
        }
        let min_gap = min_gap(&points)?;
        let set = NodeSet { scheme, points, min_gap };
        set.check_gap(&PrecisionPolicy::for_order(set.order()))?;
        Ok(set)
    }

    /// Sequence order `n` (there are `n + 1` nodes).
    pub fn order(&self) -> usize {
        self.points.len() - 1
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn scheme(&self) -> NodeScheme {
        self.scheme
    }

    pub fn points(&self) -> &[Node] {
        &self.points
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    pub fn is_exact(&self) -> bool {
        self.points.iter().all(|p| p.exact().is_some())
    }

    pub fn exact_points(&self) -> Option<Vec<Rational>> {
        self.points.iter().map(|p| p.exact().cloned()).collect()
    }

    pub fn to_floats(&self, prec: u32) -> Vec<Float> {
        self.points.iter().map(|p| p.to_float(prec)).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.points.iter().map(Node::to_f64).collect()
    }

    /// `max_j |h_j|`.
    pub fn max_abs(&self) -> f64 {
        self.to_f64().into_iter().map(f64::abs).fold(0.0, f64::max)
    }

    /// Rejects node sets whose minimum gap is below `2^(-bits/4)`.
    pub fn check_gap(&self, policy: &PrecisionPolicy) -> Result<()> {
        let threshold = policy.degeneracy_threshold();
        if self.min_gap < threshold {
            return Err(Error::DegenerateNodes(format!(
                "minimum gap {:e} below threshold {:e} at {} bits",
                self.min_gap, threshold, policy.bits
            )));
        }
        Ok(())
    }
}

/// Builds the node set for a named scheme; custom nodes go through
/// [`NodeSet::custom`].
pub fn generate_nodes(scheme: NodeScheme, n: usize) -> Result<NodeSet> {
    match scheme {
        NodeScheme::Equispaced => NodeSet::equispaced(n),
        NodeScheme::Chebyshev => NodeSet::chebyshev(n),
        NodeScheme::Custom => Err(Error::InvalidInput("custom nodes require an explicit point list".into())),
    }
}

fn chebyshev_node(j: u32, n: u32) -> Node {
    // cos(rπ) is rational only for r ∈ {0, 1/3, 1/2, 2/3, 1} on [0, 1]
    let r = Rational::from((j, n));
    let table = [
        (Rational::from(0), Rational::from(1)),
        (Rational::from((1, 3)), Rational::from((1, 2))),
        (Rational::from((1, 2)), Rational::from(0)),
        (Rational::from((2, 3)), Rational::from((-1, 2))),
        (Rational::from(1), Rational::from(-1)),
    ];
    table
        .into_iter()
        .find(|(angle, _)| *angle == r)
        .map(|(_, v)| Node::Exact(v))
        .unwrap_or(Node::Cosine { j, n })
}

fn min_gap(points: &[Node]) -> Result<f64> {
    let mut best = f64::INFINITY;
    if points.iter().all(|p| p.exact().is_some()) {
        let mut v: Vec<&Rational> = points.iter().filter_map(Node::exact).collect();
        v.sort();
        for w in v.windows(2) {
            let gap = Rational::from(w[1] - w[0]);
            if gap.is_zero() {
                return Err(Error::DegenerateNodes(format!("repeated node {}", w[0])));
            }
            best = best.min(gap.to_f64());
        }
    } else {
        let mut v: Vec<Float> = points.iter().map(|p| p.to_float(256)).collect();
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));
        for w in v.windows(2) {
            let gap = Float::with_val(256, &w[1] - &w[0]);
            if gap.is_zero() {
                return Err(Error::DegenerateNodes("repeated node".into()));
            }
            best = best.min(gap.to_f64());
        }
    }
    Ok(best)
}
