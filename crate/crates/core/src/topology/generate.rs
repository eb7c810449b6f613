use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::seeding;
use crate::{Error, Result};

use super::{build_weight_matrix, Graph, TopologySchedule, WeightScheme};

const GEOMETRIC_ATTEMPTS: usize = 100;
const POOL_ATTEMPTS_PER_GRAPH: usize = 100;

/// Graph family for a topology schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TopologyKind {
    Complete,
    Cycle,
    /// √n × √n torus; every node links to its `degree` nearest axis-aligned
    /// neighbours (`degree / 4` hops in each of the four directions).
    Grid { degree: usize },
    /// Unit-square geometric graph with radius `((ln n)^(1+eps) / n)^(1/2)`.
    RandomGeometric { eps: f64 },
    /// `size` distinct random connected graphs visited round-robin.
    RandomPool { size: usize },
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown topology '{s}'"));
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        match (head, arg) {
            ("complete", None) => Ok(TopologyKind::Complete),
            ("cycle", None) => Ok(TopologyKind::Cycle),
            ("grid", Some(a)) => Ok(TopologyKind::Grid {
                degree: a.parse().map_err(|_| bad())?,
            }),
            ("rgg", Some(a)) => {
                let eps: f64 = a.parse().map_err(|_| bad())?;
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(Error::InvalidArgument(format!("rgg epsilon must be positive, got {eps}")));
                }
                Ok(TopologyKind::RandomGeometric { eps })
            }
            ("pool", Some(a)) => {
                let size: usize = a.parse().map_err(|_| bad())?;
                if size == 0 {
                    return Err(Error::InvalidArgument("pool size must be at least 1".into()));
                }
                Ok(TopologyKind::RandomPool { size })
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyKind::Complete => write!(f, "complete"),
            TopologyKind::Cycle => write!(f, "cycle"),
            TopologyKind::Grid { degree } => write!(f, "grid:{degree}"),
            TopologyKind::RandomGeometric { eps } => write!(f, "rgg:{eps}"),
            TopologyKind::RandomPool { size } => write!(f, "pool:{size}"),
        }
    }
}

/// Builds the round-robin schedule for `kind` on `n` nodes. Random families
/// draw from the topology stream of `seed`.
pub fn generate_topology(kind: TopologyKind, n: usize, seed: u64, scheme: WeightScheme) -> Result<TopologySchedule> {
    if n == 0 {
        return Err(Error::Topology("need at least one node".into()));
    }
    let mut rng = seeding::topology_stream(seed, n);
    let graphs = match kind {
        TopologyKind::Complete => vec![complete(n)],
        TopologyKind::Cycle => vec![cycle(n)],
        TopologyKind::Grid { degree } => vec![torus_grid(n, degree)?],
        TopologyKind::RandomGeometric { eps } => vec![random_geometric(n, eps, &mut rng)?],
        TopologyKind::RandomPool { size } => random_pool(n, size, &mut rng)?,
    };
    let pool = graphs
        .iter()
        .map(|g| build_weight_matrix(g, scheme))
        .collect::<Result<Vec<_>>>()?;
    TopologySchedule::new(pool)
}

fn complete(n: usize) -> Graph {
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            g.add_edge(i, j).expect("in range");
        }
    }
    g
}

fn cycle(n: usize) -> Graph {
    let mut g = Graph::empty(n);
    if n >= 2 {
        for i in 0..n {
            let j = (i + 1) % n;
            if i != j {
                g.add_edge(i, j).expect("in range");
            }
        }
    }
    g
}

fn torus_grid(n: usize, degree: usize) -> Result<Graph> {
    let side = (n as f64).sqrt().round() as usize;
    if side * side != n {
        return Err(Error::Topology(format!("grid needs a perfect-square node count, got {n}")));
    }
    if degree == 0 || degree % 4 != 0 {
        return Err(Error::Topology(format!("grid degree must be a positive multiple of 4, got {degree}")));
    }
    let reach = degree / 4;
    let mut g = Graph::empty(n);
    for r in 0..side {
        for c in 0..side {
            let i = r * side + c;
            for hop in 1..=reach {
                for (rr, cc) in [((r + hop) % side, c), (r, (c + hop) % side)] {
                    let j = rr * side + cc;
                    if j != i {
                        g.add_edge(i, j)?;
                    }
                }
            }
        }
    }
    Ok(g)
}

pub(crate) fn geometric_radius(n: usize, eps: f64) -> f64 {
    let ln = (n as f64).ln();
    (ln.powf(1.0 + eps) / n as f64).sqrt()
}

fn random_geometric(n: usize, eps: f64, rng: &mut impl Rng) -> Result<Graph> {
    let radius = geometric_radius(n, eps);
    for _ in 0..GEOMETRIC_ATTEMPTS {
        let points: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
        let mut g = Graph::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
                if (dx * dx + dy * dy).sqrt() < radius {
                    g.add_edge(i, j)?;
                }
            }
        }
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::GeometricRetries {
        attempts: GEOMETRIC_ATTEMPTS,
        radius,
    })
}

/// Random spanning tree plus independent extra edges with probability
/// `min(1, ln n / n)`.
fn random_connected(n: usize, rng: &mut impl Rng) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut g = Graph::empty(n);
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        g.add_edge(order[k], parent).expect("in range");
    }
    let p = ((n as f64).ln() / n as f64).min(1.0);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                g.add_edge(i, j).expect("in range");
            }
        }
    }
    g
}

fn random_pool(n: usize, size: usize, rng: &mut impl Rng) -> Result<Vec<Graph>> {
    let mut graphs: Vec<Graph> = Vec::with_capacity(size);
    let mut attempts = 0;
    while graphs.len() < size {
        if attempts >= POOL_ATTEMPTS_PER_GRAPH * size {
            return Err(Error::Topology(format!(
                "could not draw {size} distinct connected graphs on {n} nodes"
            )));
        }
        attempts += 1;
        let g = random_connected(n, rng);
        if !graphs.contains(&g) {
            graphs.push(g);
        }
    }
    Ok(graphs)
}
