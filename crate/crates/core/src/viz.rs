//! Data behind the arpeggiator views: PCA of the state trajectory, the
//! per-neuron activity frame and the weighted connectivity graph.

use std::collections::VecDeque;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reservoir::{Network, ReservoirState};

pub const DEFAULT_PCA_COMPONENTS: usize = 2;
/// Percentile of |weight| used as the default edge display threshold.
pub const DEFAULT_EDGE_PERCENTILE: f64 = 0.8;

/// Recent reservoir states, each optionally labelled with the note index drawn at that step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateHistory {
    rows: VecDeque<Vec<f64>>,
    labels: VecDeque<Option<usize>>,
    capacity: Option<usize>,
}

impl StateHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Keeps at most `capacity` rows, dropping the oldest.
    pub fn bounded(capacity: usize) -> Self {
        Self {
            capacity: Some(capacity),
            ..Self::default()
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Option<Vec<Option<usize>>>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidArgument("history rows differ in length".into()));
        }
        let labels = match labels {
            Some(l) if l.len() != rows.len() => {
                return Err(Error::InvalidArgument(format!(
                    "{} labels for {} rows",
                    l.len(),
                    rows.len()
                )))
            }
            Some(l) => l.into(),
            None => vec![None; rows.len()].into(),
        };
        Ok(Self {
            rows: rows.into(),
            labels,
            capacity: None,
        })
    }

    pub fn push(&mut self, state: &ReservoirState, label: Option<usize>) {
        if let Some(first) = self.rows.front() {
            if first.len() != state.neurons() {
                // network was resized; old rows are no longer comparable
                self.clear();
            }
        }
        if self.capacity == Some(self.rows.len()) {
            if self.rows.is_empty() {
                return;
            }
            self.rows.pop_front();
            self.labels.pop_front();
        }
        self.rows.push_back(state.s.iter().copied().collect());
        self.labels.push_back(label);
    }

    pub fn clear(&mut self) {
        self.rows.clear();
        self.labels.clear();
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.rows.front().map_or(0, Vec::len)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn labels(&self) -> Vec<Option<usize>> {
        self.labels.iter().copied().collect()
    }

    fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows.len(), self.width(), |r, c| self.rows[r][c])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    /// k rows of length N, orthonormal.
    pub components: Vec<Vec<f64>>,
    /// T rows of length k.
    pub projected: Vec<Vec<f64>>,
    pub explained_variance_ratio: Vec<f64>,
    pub labels: Vec<Option<usize>>,
    /// Set when the data has no variance; components are then an arbitrary basis.
    pub degenerate: bool,
}

impl PcaResult {
    /// One line per projected point: `pc1,...,pck,label` (empty label when none).
    pub fn to_csv(&self) -> String {
        let k = self.explained_variance_ratio.len();
        let mut out = String::new();
        let header: Vec<String> = (1..=k).map(|i| format!("pc{i}")).collect();
        let _ = writeln!(out, "{},label", header.join(","));
        for (row, label) in self.projected.iter().zip(&self.labels) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            let label = label.map(|l| l.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{label}", cells.join(","));
        }
        out
    }
}

/// Principal components of the state history via SVD of the mean-centred data.
///
/// Each component is signed so that its largest-magnitude entry is positive.
pub fn pca_project(history: &StateHistory, k: usize) -> Result<PcaResult> {
    let t = history.len();
    let n = history.width();
    if t < 2 {
        return Err(Error::InvalidArgument(format!("PCA needs at least 2 rows, got {t}")));
    }
    if k == 0 || k > t.min(n) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must be in [1, {}]",
            t.min(n)
        )));
    }

    let mut x = history.matrix();
    let magnitude: f64 = x.iter().map(|v| v * v).sum();
    for c in 0..n {
        let mean = x.column(c).sum() / t as f64;
        x.column_mut(c).add_scalar_mut(-mean);
    }

    let svd = SVD::new(x.clone(), false, true);
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let total: f64 = svd.singular_values.iter().map(|s| s * s).sum();
    // centring leaves only rounding noise when every row is identical
    let degenerate = total <= 1e-20 * magnitude || total == 0.0;

    let mut components = DMatrix::zeros(k, n);
    let mut ratios = vec![0.0; k];
    if degenerate {
        for i in 0..k {
            components[(i, i)] = 1.0;
        }
    } else {
        for (row, &idx) in order.iter().take(k).enumerate() {
            let mut v = v_t.row(idx).into_owned();
            let pivot = v
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |acc, (i, val)| if val.abs() > acc.1 { (i, val.abs()) } else { acc })
                .0;
            if v[pivot] < 0.0 {
                v.neg_mut();
            }
            components.set_row(row, &v);
            let s = svd.singular_values[idx];
            ratios[row] = s * s / total;
        }
    }

    let projected = if degenerate {
        DMatrix::zeros(t, k)
    } else {
        &x * components.transpose()
    };
    Ok(PcaResult {
        components: rows_of(&components),
        projected: rows_of(&projected),
        explained_variance_ratio: ratios,
        labels: history.labels(),
        degenerate,
    })
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// The leaky state `s`, as-is.
pub fn activity_frame(state: &ReservoirState) -> Vec<f64> {
    state.s.iter().copied().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub activity: f64,
}

/// Connection from neuron `from` into neuron `to` with the effective recurrent weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

impl ConnectivityGraph {
    /// Edge list as `from,to,weight` lines.
    pub fn edges_csv(&self) -> String {
        let mut out = String::from("from,to,weight\n");
        for e in &self.edges {
            let _ = writeln!(out, "{},{},{:e}", e.from, e.to, e.weight);
        }
        out
    }

    /// Vertex list as `id,activity` lines.
    pub fn vertices_csv(&self) -> String {
        let mut out = String::from("id,activity\n");
        for v in &self.vertices {
            let _ = writeln!(out, "{},{:e}", v.id, v.activity);
        }
        out
    }
}

/// Edges for every effective recurrent weight with |w| above `threshold`.
pub fn connectivity_graph(net: &Network, state: &ReservoirState, threshold: f64) -> ConnectivityGraph {
    let w = &net.effective().w;
    let n = w.nrows();
    let vertices = (0..n)
        .map(|id| Vertex {
            id,
            activity: state.s.get(id).map_or(0.0, |v| v.abs()),
        })
        .collect();
    let mut edges = Vec::new();
    for to in 0..n {
        for from in 0..n {
            let weight = w[(to, from)];
            if weight.abs() > threshold {
                edges.push(Edge { from, to, weight });
            }
        }
    }
    ConnectivityGraph { vertices, edges }
}

/// Nearest-rank percentile of the nonzero |effective recurrent weights|.
pub fn default_edge_threshold(net: &Network) -> f64 {
    let mut mags: Vec<f64> = net
        .effective()
        .w
        .iter()
        .map(|v| v.abs())
        .filter(|v| *v > 0.0)
        .collect();
    if mags.is_empty() {
        return 0.0;
    }
    mags.sort_by(f64::total_cmp);
    let rank = ((DEFAULT_EDGE_PERCENTILE * mags.len() as f64).ceil() as usize).clamp(1, mags.len());
    mags[rank - 1]
}

pub fn activity_csv(frame: &[f64]) -> String {
    let mut out = String::new();
    for v in frame {
        let _ = writeln!(out, "{v:e}");
    }
    out
}
