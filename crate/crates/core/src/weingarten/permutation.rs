use std::fmt;

use crate::error::{input, Result};

/// A permutation of `{0, …, q-1}`, stored as its image list.
///
/// Displayed and constructed from cycles in the usual 1-based notation.
/// Composition is right to left: `(a.compose(b))(x) = a(b(x))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(q: usize) -> Self {
        Self { images: (0..q).collect() }
    }

    /// From 0-based images.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return input(format!("{images:?} is not a permutation"));
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    /// From 1-based images, as written in one-line notation.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return input("one-based images must be at least 1");
        }
        Self::from_images(images.iter().map(|&i| i - 1).collect())
    }

    /// From disjoint 1-based cycles, e.g. `&[&[1, 2], &[3, 4]]` in `S_4`.
    pub fn from_cycles(q: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..q).collect();
        let mut touched = vec![false; q];
        for cycle in cycles {
            for (pos, &x) in cycle.iter().enumerate() {
                if x == 0 || x > q || touched[x - 1] {
                    return input(format!("bad cycle {cycle:?} for S_{q}"));
                }
                touched[x - 1] = true;
                images[x - 1] = cycle[(pos + 1) % cycle.len()] - 1;
            }
        }
        Self::from_images(images)
    }

    /// Some permutation with the given cycle type: cycles of consecutive
    /// points, in the order listed.
    pub fn with_cycle_type(lengths: &[usize]) -> Self {
        let q = lengths.iter().sum();
        let mut images = vec![0; q];
        let mut start = 0;
        for &len in lengths {
            for i in 0..len {
                images[start + i] = start + (i + 1) % len;
            }
            start += len;
        }
        Self { images }
    }

    pub fn size(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn image(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.size(), other.size(), "composing permutations of different sizes");
        Self { images: other.images.iter().map(|&x| self.images[x]).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.size()];
        for (x, &y) in self.images.iter().enumerate() {
            images[y] = x;
        }
        Self { images }
    }

    /// Disjoint cycles (0-based), each starting at its smallest element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.size()];
        let mut out = Vec::new();
        for start in 0..self.size() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x);
                x = self.images[x];
            }
            out.push(cycle);
        }
        out
    }

    /// Cycle lengths, sorted in decreasing order.
    pub fn cycle_type(&self) -> Vec<usize> {
        cycle_type_of(&self.images)
    }

    /// `#(σ)`, the number of cycles including fixed points.
    pub fn cycle_count(&self) -> usize {
        self.cycles().len()
    }

    /// `|σ| = q - #(σ)`, the fewest transpositions whose product is `σ`.
    pub fn transposition_distance(&self) -> usize {
        self.size() - self.cycle_count()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// Advances to the lexicographic successor; `false` after the last one.
    pub fn advance(&mut self) -> bool {
        next_permutation(&mut self.images)
    }

    /// Every element of `S_q` in lexicographic order.
    pub fn all(q: usize) -> Vec<Self> {
        let mut p = Self::identity(q);
        let mut out = vec![p.clone()];
        while p.advance() {
            out.push(p.clone());
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles: Vec<_> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let parts: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

pub(crate) fn cycle_type_of(images: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; images.len()];
    let mut lengths = Vec::new();
    for start in 0..images.len() {
        let mut len = 0;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = images[x];
            len += 1;
        }
        if len > 0 {
            lengths.push(len);
        }
    }
    lengths.sort_unstable_by(|a, b| b.cmp(a));
    lengths
}

/// In-place lexicographic successor; returns `false` (leaving the slice
/// sorted ascending) once the last permutation has been passed.
pub(crate) fn next_permutation(a: &mut [usize]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        a.reverse();
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// All integer partitions of `q`, each in decreasing order.
pub fn partitions(q: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            prefix.push(part);
            go(rest - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(q, q, &mut Vec::new(), &mut out);
    out
}

/// Disjoint-set forest with path compression and union by size.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n], components: n }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut y = x;
        while self.parent[y] != root {
            let next = self.parent[y];
            self.parent[y] = root;
            y = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.components -= 1;
    }

    pub fn components(&self) -> usize {
        self.components
    }
}
