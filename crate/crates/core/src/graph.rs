//! Functional graphs of preperiodic points: cycles, labels and canonical
//! isomorphism certificates.
//!
//! Every component of a functional graph is one directed cycle with rooted
//! in-trees hanging off its nodes. The certificate encodes each in-tree by
//! sorted nested parentheses, takes the lexicographically least rotation of
//! the cycle's tree codes, and sorts the component codes. Two functional
//! graphs are isomorphic exactly when their certificates agree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("successor {succ} of {vertex} is not a vertex")]
    NotClosed { vertex: Rational, succ: Rational },
}

/// A finite functional digraph on rationals: every vertex has exactly one
/// out-edge, to another vertex.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrePerGraph {
    succ: BTreeMap<Rational, Rational>,
}

/// `N(l1,l2,...)`: vertex count and cycle lengths in nonincreasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphLabel {
    pub n: usize,
    pub cycles: Vec<usize>,
    pub certificate: String,
}

impl GraphLabel {
    /// The `N(l1,...)` string; the empty graph is `0`.
    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for GraphLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n == 0 {
            return write!(f, "0");
        }
        let lens: Vec<String> = self.cycles.iter().map(|l| l.to_string()).collect();
        write!(f, "{}({})", self.n, lens.join(","))
    }
}

impl PrePerGraph {
    pub fn empty() -> Self {
        PrePerGraph::default()
    }

    pub fn from_successors(succ: BTreeMap<Rational, Rational>) -> Result<Self, GraphError> {
        for (v, s) in &succ {
            if !succ.contains_key(s) {
                return Err(GraphError::NotClosed {
                    vertex: v.clone(),
                    succ: s.clone(),
                });
            }
        }
        Ok(PrePerGraph { succ })
    }

    /// The subgraph of `f` induced on `points`; fails if `f` leaves the set.
    pub fn induced<F>(points: &[Rational], f: F) -> Result<Self, GraphError>
    where
        F: Fn(&Rational) -> Rational,
    {
        let succ = points.iter().map(|x| (x.clone(), f(x))).collect();
        Self::from_successors(succ)
    }

    /// Vertices in ascending order.
    pub fn vertices(&self) -> impl Iterator<Item = &Rational> {
        self.succ.keys()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.succ.iter()
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.succ.contains_key(x)
    }

    pub fn successor(&self, x: &Rational) -> Option<&Rational> {
        self.succ.get(x)
    }

    pub fn is_negation_closed(&self) -> bool {
        self.succ.keys().all(|x| self.succ.contains_key(&-x))
    }

    /// Vertex list and successor indices, in ascending vertex order.
    pub fn index_form(&self) -> (Vec<Rational>, Vec<usize>) {
        let verts: Vec<Rational> = self.succ.keys().cloned().collect();
        let index: BTreeMap<&Rational, usize> =
            verts.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let succ = verts.iter().map(|v| index[&self.succ[v]]).collect();
        (verts, succ)
    }

    /// Cycles in orbit order, each starting at its least element, sorted by
    /// that element.
    pub fn cycles(&self) -> Vec<Vec<Rational>> {
        let (verts, succ) = self.index_form();
        let mut out: Vec<Vec<Rational>> = find_cycles(&succ)
            .into_iter()
            .map(|cyc| {
                let start = (0..cyc.len())
                    .min_by_key(|&i| &verts[cyc[i]])
                    .expect("nonempty");
                (0..cyc.len())
                    .map(|k| verts[cyc[(start + k) % cyc.len()]].clone())
                    .collect()
            })
            .collect();
        out.sort();
        out
    }

    pub fn label(&self) -> GraphLabel {
        let (_, succ) = self.index_form();
        let mut cycles: Vec<usize> = find_cycles(&succ).iter().map(Vec::len).collect();
        cycles.sort_unstable_by(|a, b| b.cmp(a));
        GraphLabel {
            n: succ.len(),
            cycles,
            certificate: canonical_certificate(&succ),
        }
    }

    pub fn certificate(&self) -> String {
        canonical_certificate(&self.index_form().1)
    }

    pub fn is_isomorphic(&self, other: &PrePerGraph) -> bool {
        self.len() == other.len() && self.certificate() == other.certificate()
    }

    /// Graphviz rendering with vertices in ascending order.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph {\n");
        for v in self.succ.keys() {
            let _ = writeln!(out, "  \"{v}\";");
        }
        for (v, s) in &self.succ {
            let _ = writeln!(out, "  \"{v}\" -> \"{s}\";");
        }
        out.push_str("}\n");
        out
    }
}

pub fn is_isomorphic(a: &PrePerGraph, b: &PrePerGraph) -> bool {
    a.is_isomorphic(b)
}

/// Node lists of all directed cycles of a functional graph, in orbit order.
pub fn find_cycles(succ: &[usize]) -> Vec<Vec<usize>> {
    // 0 = unvisited, 1 = on the current walk, 2 = finished.
    let mut state = vec![0u8; succ.len()];
    let mut cycles = Vec::new();
    for start in 0..succ.len() {
        if state[start] != 0 {
            continue;
        }
        let mut walk = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            walk.push(v);
            v = succ[v];
        }
        if state[v] == 1 {
            let pos = walk.iter().position(|&w| w == v).expect("on the walk");
            cycles.push(walk[pos..].to_vec());
        }
        for w in walk {
            state[w] = 2;
        }
    }
    cycles
}

/// Canonical string for a functional graph given as a successor array.
pub fn canonical_certificate(succ: &[usize]) -> String {
    let cycles = find_cycles(succ);
    let on_cycle: BTreeSet<usize> = cycles.iter().flatten().copied().collect();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); succ.len()];
    for (v, &s) in succ.iter().enumerate() {
        if !on_cycle.contains(&v) {
            preds[s].push(v);
        }
    }

    fn encode(v: usize, preds: &[Vec<usize>]) -> String {
        let mut kids: Vec<String> = preds[v].iter().map(|&k| encode(k, preds)).collect();
        kids.sort();
        format!("({})", kids.concat())
    }

    let mut components: Vec<String> = cycles
        .iter()
        .map(|cyc| {
            let codes: Vec<String> = cyc.iter().map(|&v| encode(v, &preds)).collect();
            // Tree codes are irreducible bracket words, so a concatenation
            // determines the sequence and the least rotation is well defined.
            let best = (0..codes.len())
                .map(|k| codes[k..].concat() + &codes[..k].concat())
                .min()
                .expect("cycles are nonempty");
            format!("[{best}]")
        })
        .collect();
    components.sort();
    components.concat()
}
