//! Chain specifications, the family generators, and structural diagnostics
//! for finite transition matrices.

use crate::error::{Error, Result};
use crate::hitting;
use crate::linalg::DenseMatrix;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};

/// Default ceiling on the number of states of a dense chain.
pub const DEFAULT_MAX_STATES: usize = 4096;

/// Winning-streak hitting times grow like `2^n`; beyond this size they
/// exhaust the `f64` mantissa.
pub const WINNING_STREAK_MAX_N: usize = 40;

/// Rows of a transition matrix must sum to one within this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// State-count ceiling, overridable through `ACCESS_TIME_MAX_N`.
pub fn max_states() -> usize {
    std::env::var("ACCESS_TIME_MAX_N")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or(DEFAULT_MAX_STATES)
}

/// A chain family together with its size parameter.
///
/// For `hypercube`, `n` is the dimension `d` and the chain has `2^d` states.
/// For `graph`, `n` (optional) is the vertex count; it defaults to one more
/// than the largest vertex mentioned in `edges`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChainSpec {
    BirthDeath {
        n: usize,
        p: f64,
    },
    WinningStreak {
        n: usize,
    },
    Hypercube {
        n: usize,
    },
    Path {
        n: usize,
    },
    Complete {
        n: usize,
    },
    Star {
        n: usize,
    },
    Graph {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        edges: Vec<[usize; 2]>,
    },
}

impl ChainSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            ChainSpec::BirthDeath { .. } => "birth_death",
            ChainSpec::WinningStreak { .. } => "winning_streak",
            ChainSpec::Hypercube { .. } => "hypercube",
            ChainSpec::Path { .. } => "path",
            ChainSpec::Complete { .. } => "complete",
            ChainSpec::Star { .. } => "star",
            ChainSpec::Graph { .. } => "graph",
        }
    }

    /// Number of states the generated chain will have.
    pub fn state_count(&self) -> usize {
        match *self {
            ChainSpec::BirthDeath { n, .. }
            | ChainSpec::Path { n }
            | ChainSpec::Complete { n }
            | ChainSpec::Star { n } => n + 1,
            ChainSpec::WinningStreak { n } => n,
            ChainSpec::Hypercube { n } => 1usize.checked_shl(n as u32).unwrap_or(usize::MAX),
            ChainSpec::Graph { n, ref edges } => n.unwrap_or_else(|| {
                edges.iter().flatten().max().map_or(0, |&m| m + 1)
            }),
        }
    }

    /// Whether the chain is a simple random walk on an undirected graph.
    pub fn is_graph_walk(&self) -> bool {
        matches!(
            self,
            ChainSpec::Graph { .. }
                | ChainSpec::Path { .. }
                | ChainSpec::Complete { .. }
                | ChainSpec::Star { .. }
                | ChainSpec::Hypercube { .. }
        )
    }

    pub fn labels(&self) -> StateLabels {
        match *self {
            ChainSpec::WinningStreak { .. } => StateLabels::Range { start: 1 },
            ChainSpec::Hypercube { n } => StateLabels::BitStrings { dim: n as u32 },
            _ => StateLabels::Range { start: 0 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        match *self {
            ChainSpec::BirthDeath { n, p } => {
                if n < 1 {
                    return bad("birth_death needs n >= 1".into());
                }
                if !(p > 0.0 && p <= 0.5) {
                    return bad(format!("birth_death needs p in (0, 1/2], got {p}"));
                }
            }
            ChainSpec::WinningStreak { n } => {
                if n < 1 {
                    return bad("winning_streak needs n >= 1".into());
                }
                if n > WINNING_STREAK_MAX_N {
                    return bad(format!(
                        "winning_streak is capped at n <= {WINNING_STREAK_MAX_N} in double precision, got {n}"
                    ));
                }
            }
            ChainSpec::Hypercube { n } => {
                if n < 1 {
                    return bad("hypercube needs dimension >= 1".into());
                }
                if n >= usize::BITS as usize {
                    return bad(format!("hypercube dimension {n} is too large"));
                }
            }
            ChainSpec::Path { n } | ChainSpec::Complete { n } | ChainSpec::Star { n } => {
                if n < 1 {
                    return bad(format!("{} needs n >= 1", self.family_name()));
                }
            }
            ChainSpec::Graph { n, ref edges } => {
                let v = self.state_count();
                if edges.is_empty() {
                    return bad("graph needs at least one edge".into());
                }
                let mut seen = BTreeSet::new();
                for &[a, b] in edges {
                    if a == b {
                        return bad(format!("self-loop at vertex {a}"));
                    }
                    if a >= v || b >= v {
                        return bad(format!(
                            "edge ({a},{b}) out of range for {} vertices",
                            n.unwrap_or(v)
                        ));
                    }
                    if !seen.insert((a.min(b), a.max(b))) {
                        return bad(format!("duplicate edge ({a},{b})"));
                    }
                }
                let adj = adjacency(v, edges);
                if !is_connected(&adj) {
                    return Err(Error::Reducible("graph is not connected".into()));
                }
            }
        }
        let size = self.state_count();
        let ceiling = max_states();
        if size > ceiling {
            return Err(Error::TooLarge { size, ceiling });
        }
        Ok(())
    }
}

/// How states are named.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateLabels {
    /// Consecutive integers `start, start + 1, ...`.
    Range { start: i64 },
    /// `dim`-bit strings; the state index is the integer with those bits.
    BitStrings { dim: u32 },
}

impl StateLabels {
    /// Integer label of internal index `i`, if labels are integers.
    pub fn integer(&self, i: usize) -> Option<i64> {
        match *self {
            StateLabels::Range { start } => Some(start + i as i64),
            StateLabels::BitStrings { .. } => None,
        }
    }

    pub fn display(&self, i: usize) -> String {
        match *self {
            StateLabels::Range { start } => (start + i as i64).to_string(),
            StateLabels::BitStrings { dim } => format!("{:0width$b}", i, width = dim as usize),
        }
    }

    /// Index of the state with integer label `label` (the integer encoding
    /// for bit strings).
    pub fn index_of(&self, label: i64, size: usize) -> Option<usize> {
        let idx = match *self {
            StateLabels::Range { start } => label.checked_sub(start)?,
            StateLabels::BitStrings { .. } => label,
        };
        usize::try_from(idx).ok().filter(|&i| i < size)
    }
}

/// A row-stochastic square matrix, optionally tagged with the spec it was
/// generated from.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    rows: DenseMatrix,
    labels: StateLabels,
    family: Option<ChainSpec>,
}

impl TransitionMatrix {
    /// Wraps explicit rows. Rows must be non-negative and sum to one within
    /// [`ROW_SUM_TOL`]; irreducibility is not required here (see
    /// [`validate_chain`]).
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = DenseMatrix::from_rows(&rows)?;
        Self::from_dense(m, StateLabels::Range { start: 0 }, None)
    }

    fn from_dense(rows: DenseMatrix, labels: StateLabels, family: Option<ChainSpec>) -> Result<Self> {
        if rows.nrows() != rows.ncols() {
            return Err(Error::InvalidSpec(format!(
                "transition matrix is {}x{}",
                rows.nrows(),
                rows.ncols()
            )));
        }
        if rows.nrows() == 0 {
            return Err(Error::InvalidSpec("empty state space".into()));
        }
        for i in 0..rows.nrows() {
            let row = rows.row(i);
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidSpec(format!("row {i} has a negative or non-finite entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NotStochastic { row: i, sum });
            }
        }
        Ok(TransitionMatrix {
            rows,
            labels,
            family,
        })
    }

    pub fn size(&self) -> usize {
        self.rows.nrows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.rows.row(i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[(i, j)]
    }

    pub fn labels(&self) -> StateLabels {
        self.labels
    }

    pub fn family(&self) -> Option<&ChainSpec> {
        self.family.as_ref()
    }

    /// Out-neighbours (positive entries) of each state.
    pub fn support(&self) -> Vec<Vec<usize>> {
        (0..self.size())
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v > 0.0)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect()
    }
}

/// Generates the transition matrix of a chain family.
///
/// Birth-death boundary rows put the missing mass on the diagonal
/// (`p_{0,0} = p_{n,n} = 1 - p`). Winning-streak state `k` is stored at
/// index `k - 1`.
pub fn build_chain(spec: &ChainSpec) -> Result<TransitionMatrix> {
    spec.validate()?;
    let size = spec.state_count();
    let mut m = DenseMatrix::zeros(size, size);
    match *spec {
        ChainSpec::BirthDeath { n, p } => {
            for i in 0..=n {
                if i < n {
                    m[(i, i + 1)] = p;
                }
                if i > 0 {
                    m[(i, i - 1)] = p;
                }
                let moved: f64 = m.row(i).iter().sum();
                m[(i, i)] = 1.0 - moved;
            }
        }
        ChainSpec::WinningStreak { n } => {
            for k in 0..n {
                m[(k, 0)] += 0.5;
                if k + 1 < n {
                    m[(k, k + 1)] += 0.5;
                } else {
                    m[(k, k)] += 0.5;
                }
            }
        }
        ChainSpec::Hypercube { n: d } => {
            let w = 1.0 / d as f64;
            for x in 0..size {
                for b in 0..d {
                    m[(x, x ^ (1 << b))] = w;
                }
            }
        }
        ChainSpec::Path { n } => {
            m[(0, 1)] = 1.0;
            m[(n, n - 1)] = 1.0;
            for i in 1..n {
                m[(i, i - 1)] = 0.5;
                m[(i, i + 1)] = 0.5;
            }
        }
        ChainSpec::Complete { n } => {
            let w = 1.0 / n as f64;
            for i in 0..=n {
                for j in 0..=n {
                    if i != j {
                        m[(i, j)] = w;
                    }
                }
            }
        }
        ChainSpec::Star { n } => {
            let w = 1.0 / n as f64;
            for leaf in 1..=n {
                m[(0, leaf)] = w;
                m[(leaf, 0)] = 1.0;
            }
        }
        ChainSpec::Graph { ref edges, .. } => {
            let adj = adjacency(size, edges);
            for (i, nbrs) in adj.iter().enumerate() {
                let w = 1.0 / nbrs.len() as f64;
                for &j in nbrs {
                    m[(i, j)] = w;
                }
            }
        }
    }
    TransitionMatrix::from_dense(m, spec.labels(), Some(spec.clone()))
}

/// Simple random walk on an arbitrary (possibly disconnected) graph. Used
/// where a reducible chain is wanted on purpose; [`build_chain`] rejects
/// disconnected graphs.
pub fn graph_walk_unchecked(vertices: usize, edges: &[[usize; 2]]) -> Result<TransitionMatrix> {
    let adj = adjacency(vertices, edges);
    let mut m = DenseMatrix::zeros(vertices, vertices);
    for (i, nbrs) in adj.iter().enumerate() {
        if nbrs.is_empty() {
            return Err(Error::InvalidSpec(format!("vertex {i} is isolated")));
        }
        let w = 1.0 / nbrs.len() as f64;
        for &j in nbrs {
            m[(i, j)] += w;
        }
    }
    TransitionMatrix::from_dense(m, StateLabels::Range { start: 0 }, None)
}

fn adjacency(vertices: usize, edges: &[[usize; 2]]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); vertices];
    for &[a, b] in edges {
        if a < vertices && b < vertices {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for nbrs in &mut adj {
        nbrs.sort_unstable();
    }
    adj
}

fn is_connected(adj: &[Vec<usize>]) -> bool {
    reachable(adj, 0).iter().all(|&r| r)
}

fn reachable(adj: &[Vec<usize>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    if adj.is_empty() {
        return seen;
    }
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Structural report on a transition matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub size: usize,
    /// Largest `|sum_j p_ij - 1|`.
    pub max_row_residual: f64,
    pub irreducible: bool,
    pub strongly_connected_components: usize,
    /// Detailed balance against the stationary law; `None` when reducible.
    pub reversible: Option<bool>,
    pub detailed_balance_residual: Option<f64>,
    /// Period of the chain; `None` when reducible. Informational only.
    pub period: Option<usize>,
    pub periodic: Option<bool>,
}

/// Detailed-balance tolerance for the reversibility flag.
pub const REVERSIBILITY_TOL: f64 = 1e-10;

pub fn validate_chain(chain: &TransitionMatrix) -> Diagnostics {
    let size = chain.size();
    let max_row_residual = (0..size)
        .map(|i| (chain.row(i).iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let support = chain.support();
    let components = scc_count(&support);
    let irreducible = components == 1;

    let (reversible, residual, period) = if irreducible {
        let residual = hitting::stationary_distribution(chain)
            .ok()
            .map(|pi| detailed_balance_residual(chain, pi.weights()));
        (
            residual.map(|r| r <= REVERSIBILITY_TOL),
            residual,
            Some(period(&support)),
        )
    } else {
        (None, None, None)
    };

    Diagnostics {
        size,
        max_row_residual,
        irreducible,
        strongly_connected_components: components,
        reversible,
        detailed_balance_residual: residual,
        period,
        periodic: period.map(|d| d > 1),
    }
}

/// `max_{i,j} |pi_i p_ij - pi_j p_ji|`.
pub fn detailed_balance_residual(chain: &TransitionMatrix, pi: &[f64]) -> f64 {
    let n = chain.size();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i + 1..n {
            let r = (pi[i] * chain.get(i, j) - pi[j] * chain.get(j, i)).abs();
            worst = worst.max(r);
        }
    }
    worst
}

/// Whether every state reaches every other through positive entries.
pub fn is_irreducible(chain: &TransitionMatrix) -> bool {
    let support = chain.support();
    if !reachable(&support, 0).iter().all(|&r| r) {
        return false;
    }
    let mut reversed = vec![Vec::new(); support.len()];
    for (u, nbrs) in support.iter().enumerate() {
        for &v in nbrs {
            reversed[v].push(u);
        }
    }
    reachable(&reversed, 0).iter().all(|&r| r)
}

fn scc_count(support: &[Vec<usize>]) -> usize {
    // Kosaraju: finish order on the graph, then sweep the transpose.
    let n = support.len();
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((u, next)) = stack.last_mut() {
            let u = *u;
            if let Some(&v) = support[u].get(*next) {
                *next += 1;
                if !visited[v] {
                    visited[v] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(u);
                stack.pop();
            }
        }
    }
    let mut reversed = vec![Vec::new(); n];
    for (u, nbrs) in support.iter().enumerate() {
        for &v in nbrs {
            reversed[v].push(u);
        }
    }
    let mut assigned = vec![false; n];
    let mut count = 0;
    for &root in order.iter().rev() {
        if assigned[root] {
            continue;
        }
        count += 1;
        assigned[root] = true;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &v in &reversed[u] {
                if !assigned[v] {
                    assigned[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

/// Period of an irreducible chain: gcd of `level(u) + 1 - level(v)` over all
/// positive transitions `u -> v`, with BFS levels from state 0.
fn period(support: &[Vec<usize>]) -> usize {
    let n = support.len();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &v in &support[u] {
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g = 0usize;
    for (u, nbrs) in support.iter().enumerate() {
        for &v in nbrs {
            let d = (level[u] as i64 + 1 - level[v] as i64).unsigned_abs() as usize;
            g = gcd(g, d);
        }
    }
    g.max(1)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(spec: ChainSpec) -> Vec<Vec<f64>> {
        build_chain(&spec).unwrap().matrix().to_rows()
    }

    #[test]
    fn birth_death_half_has_holding_boundaries() {
        assert_eq!(
            rows(ChainSpec::BirthDeath { n: 2, p: 0.5 }),
            vec![
                vec![0.5, 0.5, 0.0],
                vec![0.5, 0.0, 0.5],
                vec![0.0, 0.5, 0.5]
            ]
        );
    }

    #[test]
    fn path_reflects() {
        assert_eq!(
            rows(ChainSpec::Path { n: 2 }),
            vec![
                vec![0.0, 1.0, 0.0],
                vec![0.5, 0.0, 0.5],
                vec![0.0, 1.0, 0.0]
            ]
        );
    }

    #[test]
    fn winning_streak_resets_and_holds_at_top() {
        assert_eq!(
            rows(ChainSpec::WinningStreak { n: 3 }),
            vec![
                vec![0.5, 0.5, 0.0],
                vec![0.5, 0.0, 0.5],
                vec![0.5, 0.0, 0.5]
            ]
        );
        assert_eq!(rows(ChainSpec::WinningStreak { n: 1 }), vec![vec![1.0]]);
    }

    #[test]
    fn hypercube_flips_one_bit() {
        let p = build_chain(&ChainSpec::Hypercube { n: 3 }).unwrap();
        assert_eq!(p.size(), 8);
        for x in 0..8usize {
            for y in 0..8usize {
                let want = if (x ^ y).count_ones() == 1 { 1.0 / 3.0 } else { 0.0 };
                assert_eq!(p.get(x, y), want);
            }
        }
        assert_eq!(p.labels().display(5), "101");
    }

    #[test]
    fn path_matches_half_birth_death_away_from_boundary() {
        for n in [2, 5, 17] {
            let a = rows(ChainSpec::Path { n });
            let b = rows(ChainSpec::BirthDeath { n, p: 0.5 });
            for i in 1..n {
                assert_eq!(a[i], b[i]);
            }
            assert_ne!(a[0], b[0]);
            assert_ne!(a[n], b[n]);
            assert_eq!(b[0][0], 0.5);
            assert_eq!(b[n][n], 0.5);
        }
    }

    #[test]
    fn spec_validation_errors() {
        assert!(build_chain(&ChainSpec::BirthDeath { n: 3, p: 0.0 }).is_err());
        assert!(build_chain(&ChainSpec::BirthDeath { n: 3, p: 0.51 }).is_err());
        assert!(build_chain(&ChainSpec::Path { n: 0 }).is_err());
        assert!(build_chain(&ChainSpec::WinningStreak { n: 41 }).is_err());
        assert!(build_chain(&ChainSpec::WinningStreak { n: 40 }).is_ok());
        let disconnected = ChainSpec::Graph {
            n: None,
            edges: vec![[0, 1], [2, 3]],
        };
        assert!(matches!(build_chain(&disconnected), Err(Error::Reducible(_))));
        let isolated = ChainSpec::Graph {
            n: Some(3),
            edges: vec![[0, 1]],
        };
        assert!(build_chain(&isolated).is_err());
        let looped = ChainSpec::Graph {
            n: None,
            edges: vec![[0, 1], [1, 1]],
        };
        assert!(build_chain(&looped).is_err());
    }

    #[test]
    fn spec_json_shapes() {
        let s: ChainSpec = serde_json::from_str(r#"{"family":"birth_death","n":100,"p":0.25}"#).unwrap();
        assert_eq!(s, ChainSpec::BirthDeath { n: 100, p: 0.25 });
        let g: ChainSpec = serde_json::from_str(r#"{"family":"graph","edges":[[0,1],[1,2]]}"#).unwrap();
        assert_eq!(g.state_count(), 3);
        assert!(serde_json::from_str::<ChainSpec>(r#"{"family":"path","n":4,"p":0.3}"#).is_err());
    }

    #[test]
    fn diagnostics_examples() {
        let d = validate_chain(&build_chain(&ChainSpec::Complete { n: 3 }).unwrap());
        assert!(d.irreducible);
        assert_eq!(d.reversible, Some(true));
        assert_eq!(d.periodic, Some(false));

        let d = validate_chain(&build_chain(&ChainSpec::Path { n: 2 }).unwrap());
        assert!(d.irreducible);
        assert_eq!(d.reversible, Some(true));
        assert_eq!(d.period, Some(2));

        let two_blocks = graph_walk_unchecked(4, &[[0, 1], [2, 3]]).unwrap();
        let d = validate_chain(&two_blocks);
        assert!(!d.irreducible);
        assert_eq!(d.strongly_connected_components, 2);
        assert_eq!(d.reversible, None);

        let ws = validate_chain(&build_chain(&ChainSpec::WinningStreak { n: 5 }).unwrap());
        assert_eq!(ws.reversible, Some(false));
        assert_eq!(ws.periodic, Some(false));
    }

    #[test]
    fn non_stochastic_rows_rejected() {
        let err = TransitionMatrix::from_rows(vec![vec![0.5, 0.4], vec![0.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NotStochastic { row: 0, .. }));
    }
}
