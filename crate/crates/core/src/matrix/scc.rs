//! Frobenius normal form of a cooperative matrix via Tarjan's algorithm.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::CommunityMatrix;

/// Block-triangular decomposition of a square matrix into irreducible
/// diagonal blocks.
///
/// Blocks are stored in topological order: patches in block `p` only
/// receive inflow from blocks `q >= p`, so reordering rows and columns by
/// `permutation` gives an upper block-triangular matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrobeniusForm {
    /// `permutation[k]` is the original patch index placed at position `k`.
    pub permutation: Vec<usize>,
    pub block_sizes: Vec<usize>,
    /// Original patch indices of each block, ascending.
    pub members: Vec<Vec<usize>>,
    #[serde(skip)]
    pub blocks: Vec<DMatrix<f64>>,
}

impl FrobeniusForm {
    pub fn block_count(&self) -> usize {
        self.block_sizes.len()
    }

    /// Block index of every patch.
    pub fn block_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.permutation.len()];
        for (b, members) in self.members.iter().enumerate() {
            for &i in members {
                out[i] = b;
            }
        }
        out
    }

    /// `P M Pᵀ` for the stored permutation.
    pub fn permuted(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let p = &self.permutation;
        DMatrix::from_fn(p.len(), p.len(), |r, c| m[(p[r], p[c])])
    }
}

/// Strongly connected components of the coupling digraph, with an edge
/// `j -> i` whenever `M_ij > 0` for `i != j`.
pub fn strongly_connected_blocks(m: &CommunityMatrix) -> FrobeniusForm {
    let entries = m.entries();
    let n = entries.nrows();
    let mut graph = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && entries[(i, j)] > 0.0 {
                graph[j].push(i);
            }
        }
    }

    // Tarjan emits a component only after every component reachable from
    // it, i.e. downstream blocks first.
    let mut members = tarjan(&graph);
    for comp in &mut members {
        comp.sort_unstable();
    }

    let permutation: Vec<usize> = members.iter().flatten().copied().collect();
    let block_sizes = members.iter().map(Vec::len).collect();
    let blocks = members
        .iter()
        .map(|idx| DMatrix::from_fn(idx.len(), idx.len(), |r, c| entries[(idx[r], idx[c])]))
        .collect();
    FrobeniusForm { permutation, block_sizes, members, blocks }
}

pub fn is_irreducible(m: &CommunityMatrix) -> bool {
    strongly_connected_blocks(m).block_count() == 1
}

struct Tarjan<'a> {
    graph: &'a [Vec<usize>],
    counter: usize,
    index: Vec<Option<usize>>,
    low: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    comps: Vec<Vec<usize>>,
}

fn tarjan(graph: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = graph.len();
    let mut st = Tarjan {
        graph,
        counter: 0,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::with_capacity(n),
        comps: Vec::new(),
    };
    for v in 0..n {
        if st.index[v].is_none() {
            st.visit(v);
        }
    }
    st.comps
}

impl Tarjan<'_> {
    fn visit(&mut self, v: usize) {
        self.index[v] = Some(self.counter);
        self.low[v] = self.counter;
        self.counter += 1;
        self.stack.push(v);
        self.on_stack[v] = true;

        for &w in &self.graph[v] {
            match self.index[w] {
                None => {
                    self.visit(w);
                    self.low[v] = self.low[v].min(self.low[w]);
                }
                Some(iw) if self.on_stack[w] => self.low[v] = self.low[v].min(iw),
                Some(_) => {}
            }
        }

        if Some(self.low[v]) == self.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = self.stack.pop().expect("tarjan stack underflow");
                self.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            self.comps.push(comp);
        }
    }
}
