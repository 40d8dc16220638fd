//! Actor/feature data model, global normalization and the disjoint
//! equal-size partition of each actor's feature rows into points.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Components whose population standard deviation falls below this are frozen to 0.
pub const ZERO_VARIANCE_THRESHOLD: f64 = 1e-12;

/// Dense actor index in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ActorId(pub usize);

impl fmt::Display for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

/// `n` actors, each holding exactly `m` feature vectors of `dim` components.
///
/// Rows are stored actor-major: actor `i` owns rows `i*m .. (i+1)*m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    n: usize,
    m: usize,
    dim: usize,
    data: Vec<f64>,
    normalized: bool,
}

impl Corpus {
    /// Builds a raw (not normalized) corpus from a flat actor-major buffer.
    pub fn new(n: usize, m: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || m == 0 || dim == 0 {
            return Err(Error::EmptyCorpus(format!("n={n}, m={m}, H={dim}")));
        }
        if data.len() != n * m * dim {
            return Err(Error::Shape(format!(
                "expected {} values for n={n}, m={m}, H={dim}, got {}",
                n * m * dim,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                component: pos % dim,
                value: data[pos],
            });
        }
        Ok(Corpus {
            n,
            m,
            dim,
            data,
            normalized: false,
        })
    }

    /// Builds a corpus from nested `actor -> row -> component` vectors.
    pub fn from_actors(actors: &[Vec<Vec<f64>>]) -> Result<Self> {
        let n = actors.len();
        let m = actors.first().map_or(0, Vec::len);
        let dim = actors
            .first()
            .and_then(|rows| rows.first())
            .map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m * dim);
        for (a, rows) in actors.iter().enumerate() {
            if rows.len() != m {
                return Err(Error::Shape(format!(
                    "actor {a} has {} vectors, expected {m}",
                    rows.len()
                )));
            }
            for (r, row) in rows.iter().enumerate() {
                if row.len() != dim {
                    return Err(Error::Shape(format!(
                        "actor {a} row {r} has {} components, expected {dim}",
                        row.len()
                    )));
                }
                data.extend_from_slice(row);
            }
        }
        Corpus::new(n, m, dim, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Flat actor-major buffer.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// All `m` rows of one actor, flattened.
    pub fn actor_rows(&self, actor: ActorId) -> &[f64] {
        let stride = self.m * self.dim;
        &self.data[actor.0 * stride..(actor.0 + 1) * stride]
    }

    pub fn row(&self, actor: ActorId, r: usize) -> &[f64] {
        let start = (actor.0 * self.m + r) * self.dim;
        &self.data[start..start + self.dim]
    }

    /// Rebuilds the corpus with actors in the order given by `order`
    /// (`order[new] = old`). The normalization flag is kept.
    pub fn permute_actors(&self, order: &[ActorId]) -> Result<Self> {
        if order.len() != self.n {
            return Err(Error::Shape(format!(
                "permutation of length {} for {} actors",
                order.len(),
                self.n
            )));
        }
        let mut seen = vec![false; self.n];
        let mut data = Vec::with_capacity(self.data.len());
        for &a in order {
            if a.0 >= self.n || std::mem::replace(&mut seen[a.0], true) {
                return Err(Error::Shape(format!(
                    "{a} is not a valid permutation entry"
                )));
            }
            data.extend_from_slice(self.actor_rows(a));
        }
        Ok(Corpus { data, ..*self })
    }

    /// Restricts every vector to the given component indices.
    pub(crate) fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.dim) {
            return Err(Error::Subspace(format!(
                "component {bad} out of range for H={}",
                self.dim
            )));
        }
        if columns.is_empty() {
            return Err(Error::Subspace("empty component set".into()));
        }
        let rows = self.n * self.m;
        let mut data = Vec::with_capacity(rows * columns.len());
        for row in self.data.chunks_exact(self.dim) {
            data.extend(columns.iter().map(|&c| row[c]));
        }
        Ok(Corpus {
            n: self.n,
            m: self.m,
            dim: columns.len(),
            data,
            normalized: self.normalized,
        })
    }
}

/// Standardizes every component to zero mean and unit population variance,
/// with statistics pooled over all `n*m` vectors.
pub fn normalize(corpus: &Corpus) -> Result<Corpus> {
    if corpus.normalized {
        return Err(Error::AlreadyNormalized);
    }
    let rows = corpus.n * corpus.m;
    if rows < 2 {
        return Err(Error::EmptyCorpus(format!(
            "normalization needs at least 2 vectors, got {rows}"
        )));
    }
    let dim = corpus.dim;
    let count = rows as f64;

    let mut mean = vec![0.0; dim];
    for (r, row) in corpus.data.chunks_exact(dim).enumerate() {
        for (h, &x) in row.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite {
                    row: r,
                    component: h,
                    value: x,
                });
            }
            mean[h] += x;
        }
    }
    mean.iter_mut().for_each(|s| *s /= count);

    let mut var = vec![0.0; dim];
    for row in corpus.data.chunks_exact(dim) {
        for (h, &x) in row.iter().enumerate() {
            let d = x - mean[h];
            var[h] += d * d;
        }
    }
    let sd: Vec<f64> = var.iter().map(|v| (v / count).sqrt()).collect();

    let mut data = corpus.data.clone();
    for row in data.chunks_exact_mut(dim) {
        for (h, x) in row.iter_mut().enumerate() {
            *x = if sd[h] < ZERO_VARIANCE_THRESHOLD {
                0.0
            } else {
                (*x - mean[h]) / sd[h]
            };
        }
    }
    Ok(Corpus {
        data,
        normalized: true,
        ..*corpus
    })
}

/// One disjoint block of `q` consecutive feature rows of an actor.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub actor: ActorId,
    pub index: usize,
    q: usize,
    dim: usize,
    data: Vec<f64>,
}

impl Point {
    pub fn new(actor: ActorId, index: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        let q = vectors.len();
        let dim = vectors.first().map_or(0, Vec::len);
        if q == 0 || dim == 0 {
            return Err(Error::EmptyCorpus("point without vectors".into()));
        }
        let mut data = Vec::with_capacity(q * dim);
        for v in vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: v.len(),
                });
            }
            data.extend_from_slice(v);
        }
        Ok(Point {
            actor,
            index,
            q,
            dim,
            data,
        })
    }

    /// Number of feature vectors in this point.
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

/// Splits every actor's `m` rows into `p` contiguous points of `q = m/p` rows.
///
/// Output is actor-major: all points of actor 0 in index order, then actor 1, …
pub fn partition(corpus: &Corpus, p: usize) -> Result<Vec<Point>> {
    let m = corpus.m;
    let err = |reason| Error::Partition { p, m, reason };
    if p < 1 {
        return Err(err("p must be at least 1"));
    }
    if p > m {
        return Err(err("p exceeds m"));
    }
    if !m.is_multiple_of(p) {
        return Err(err("p must divide m"));
    }
    let q = m / p;
    let block = q * corpus.dim;
    let mut points = Vec::with_capacity(corpus.n * p);
    for a in 0..corpus.n {
        let rows = corpus.actor_rows(ActorId(a));
        for (j, chunk) in rows.chunks_exact(block).enumerate() {
            points.push(Point {
                actor: ActorId(a),
                index: j,
                q,
                dim: corpus.dim,
                data: chunk.to_vec(),
            });
        }
    }
    Ok(points)
}
