//! Embedded graphs as rotation systems over the side labels `±1, …, ±n`.
//!
//! A graph is the vertex rotation σ: each vertex lists the corner labels met
//! when walking around it in the positive direction. The edge involution α
//! sends `i` to `-i`. Faces are the cycles of `α ∘ σ` (next corner on a face
//! of `x` is `-σ(x)`); multiplying corner matrices along those cycles is the
//! order that integrating out each edge produces, so face words are exactly
//! the dual monodromy words. The dual graph has rotation `α ∘ σ`, and its own
//! faces are the cycles of `α ∘ α ∘ σ = σ`, so duality is an involution on the
//! nose.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Label = i32;

/// A cyclic word of corner labels, stored starting from its smallest label.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonodromyWord(Vec<Label>);

impl MonodromyWord {
    /// Rotates `labels` so the numerically smallest label comes first.
    pub fn canonical(labels: &[Label]) -> Self {
        let Some(start) = labels.iter().enumerate().min_by_key(|(_, &l)| l).map(|(i, _)| i) else {
            return MonodromyWord(Vec::new());
        };
        let mut v = labels[start..].to_vec();
        v.extend_from_slice(&labels[..start]);
        MonodromyWord(v)
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The same cyclic word read from position `k`.
    pub fn rotated(&self, k: usize) -> Vec<Label> {
        let n = self.0.len();
        (0..n).map(|i| self.0[(i + k) % n]).collect()
    }
}

impl fmt::Debug for MonodromyWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Serialized form of a graph: `{"n": 2, "vertices": [[1,2,-1,-2]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub vertices: Vec<Vec<Label>>,
}

/// A validated, connected rotation system with its faces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RibbonGraph {
    n: usize,
    rotations: Vec<Vec<Label>>,
    faces: Vec<MonodromyWord>,
}

fn slot(label: Label, n: usize) -> usize {
    let k = label.unsigned_abs() as usize - 1;
    if label > 0 {
        k
    } else {
        n + k
    }
}

impl RibbonGraph {
    pub fn new(n: usize, vertex_rotations: Vec<Vec<Label>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("a graph needs at least one edge".into()));
        }
        if let Some(v) = vertex_rotations.iter().position(Vec::is_empty) {
            return Err(Error::InvalidGraph(format!("vertex {} has an empty rotation", v + 1)));
        }
        let mut seen = vec![0usize; 2 * n];
        let mut out_of_range = BTreeSet::new();
        for &l in vertex_rotations.iter().flatten() {
            if l == 0 || l.unsigned_abs() as usize > n {
                out_of_range.insert(l);
            } else {
                seen[slot(l, n)] += 1;
            }
        }
        let label_at = |s: usize| -> Label {
            if s < n {
                s as Label + 1
            } else {
                -((s - n) as Label + 1)
            }
        };
        let duplicated: Vec<Label> = (0..2 * n).filter(|&s| seen[s] > 1).map(label_at).collect();
        let missing: Vec<Label> = (0..2 * n).filter(|&s| seen[s] == 0).map(label_at).collect();
        if !out_of_range.is_empty() || !duplicated.is_empty() || !missing.is_empty() {
            let mut msg = Vec::new();
            if !out_of_range.is_empty() {
                msg.push(format!("labels outside ±1..±{n}: {:?}", out_of_range));
            }
            if !duplicated.is_empty() {
                msg.push(format!("duplicated labels: {duplicated:?}"));
            }
            if !missing.is_empty() {
                msg.push(format!("missing labels: {missing:?}"));
            }
            return Err(Error::InvalidGraph(msg.join("; ")));
        }

        let mut graph = RibbonGraph { n, rotations: vertex_rotations, faces: Vec::new() };
        if !graph.is_connected() {
            return Err(Error::InvalidGraph("the rotation system is disconnected".into()));
        }
        graph.faces = graph.compute_faces();
        Ok(graph)
    }

    pub fn from_file(file: &GraphFile) -> Result<Self> {
        Self::new(file.n, file.vertices.clone())
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile { n: self.n, vertices: self.rotations.clone() }
    }

    /// One vertex of degree 1 at each end of a single edge.
    pub fn segment() -> Self {
        Self::new(1, vec![vec![1], vec![-1]]).expect("segment graph is valid")
    }

    /// A single vertex with one loop.
    pub fn loop_graph() -> Self {
        Self::new(1, vec![vec![1, -1]]).expect("loop graph is valid")
    }

    /// The one-vertex, two-edge map of the torus.
    pub fn torus() -> Self {
        Self::new(2, vec![vec![1, 2, -1, -2]]).expect("torus graph is valid")
    }

    pub fn edges(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        self.rotations.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn rotations(&self) -> &[Vec<Label>] {
        &self.rotations
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> {
        let n = self.n as Label;
        (1..=n).flat_map(|i| [i, -i])
    }

    fn rotation_successor(&self) -> Vec<Label> {
        let mut next = vec![0; 2 * self.n];
        for word in &self.rotations {
            for (k, &l) in word.iter().enumerate() {
                next[slot(l, self.n)] = word[(k + 1) % word.len()];
            }
        }
        next
    }

    fn is_connected(&self) -> bool {
        let next = self.rotation_successor();
        let mut visited = vec![false; 2 * self.n];
        let mut stack = vec![1 as Label];
        while let Some(l) = stack.pop() {
            let s = slot(l, self.n);
            if visited[s] {
                continue;
            }
            visited[s] = true;
            stack.push(-l);
            stack.push(next[s]);
        }
        visited.into_iter().all(|v| v)
    }

    fn compute_faces(&self) -> Vec<MonodromyWord> {
        let next = self.rotation_successor();
        let mut visited = vec![false; 2 * self.n];
        let mut faces = Vec::new();
        let mut ordered: Vec<Label> = self.labels().collect();
        ordered.sort_unstable();
        for start in ordered {
            if visited[slot(start, self.n)] {
                continue;
            }
            let mut word = Vec::new();
            let mut l = start;
            while !visited[slot(l, self.n)] {
                visited[slot(l, self.n)] = true;
                word.push(l);
                l = -next[slot(l, self.n)];
            }
            faces.push(MonodromyWord::canonical(&word));
        }
        faces
    }

    /// Face words in traversal order (the dual vertex monodromies).
    pub fn faces(&self) -> &[MonodromyWord] {
        &self.faces
    }

    pub fn vertex_words(&self) -> Vec<MonodromyWord> {
        self.rotations.iter().map(|r| MonodromyWord::canonical(r)).collect()
    }

    pub fn monodromy_words(&self) -> (Vec<MonodromyWord>, Vec<MonodromyWord>) {
        (self.vertex_words(), self.faces.clone())
    }

    pub fn dual(&self) -> RibbonGraph {
        let rotations = self.faces.iter().map(|w| w.labels().to_vec()).collect();
        RibbonGraph::new(self.n, rotations).expect("the dual of a valid graph is valid")
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.n as i64 + self.face_count() as i64
    }

    /// Vertex words sorted: equal for graphs with the same rotation structure.
    pub fn canonical_form(&self) -> Vec<MonodromyWord> {
        let mut words = self.vertex_words();
        words.sort();
        words
    }
}
