
use crate::graph::Multigraph;

/// Column layout of a signature row: `L_first · T_in · T_out · L_second`,
/// with `labels` label columns and `types` type columns per block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignatureLayout {
    pub labels: usize,
    pub types: usize,
}

impl SignatureLayout {
    pub fn new(labels: usize, types: usize) -> Self {
        Self { labels, types }
    }

    pub fn of(g: &Multigraph) -> Self {
        Self::new(g.label_alphabet().len(), g.type_alphabet().len())
    }

    pub fn width(&self) -> usize {
        2 * self.labels + 2 * self.types
    }

    pub fn words(&self) -> usize {
        self.width().div_ceil(64).max(1)
    }

    pub fn first_label(&self, k: usize) -> usize {
        k
    }

    pub fn type_in(&self, k: usize) -> usize {
        self.labels + k
    }

    pub fn type_out(&self, k: usize) -> usize {
        self.labels + self.types + k
    }

    pub fn second_label(&self, k: usize) -> usize {
        self.labels + 2 * self.types + k
    }

    /// The row of the reversed pair: label blocks and type blocks exchanged.
    pub fn swap(&self, bits: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.words()];
        let get = |i: usize| bits[i / 64] >> (i % 64) & 1 == 1;
        for k in 0..self.labels {
            if get(self.first_label(k)) {
                set_bit(&mut out, self.second_label(k));
            }
            if get(self.second_label(k)) {
                set_bit(&mut out, self.first_label(k));
            }
        }
        for k in 0..self.types {
            if get(self.type_in(k)) {
                set_bit(&mut out, self.type_out(k));
            }
            if get(self.type_out(k)) {
                set_bit(&mut out, self.type_in(k));
            }
        }
        out
    }
}

pub(crate) fn set_bit(row: &mut [u64], i: usize) {
    row[i / 64] |= 1u64 << (i % 64);
}

pub(crate) fn get_bit(row: &[u64], i: usize) -> bool {
    row[i / 64] >> (i % 64) & 1 == 1
}

/// True iff every bit set in `contained` is also set in `container`.
pub fn signature_contains(container: &[u64], contained: &[u64]) -> bool {
    assert_eq!(
        container.len(),
        contained.len(),
        "signature width mismatch"
    );
    container
        .iter()
        .zip(contained)
        .all(|(c, q)| c & q == *q)
}

/// Packed signature rows keyed by ordered node pair, kept sorted by key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSignatureMatrix {
    layout: SignatureLayout,
    keys: Vec<(usize, usize)>,
    bits: Vec<u64>,
}

impl BitSignatureMatrix {
    pub fn new(layout: SignatureLayout) -> Self {
        Self {
            layout,
            keys: Vec::new(),
            bits: Vec::new(),
        }
    }

    pub(crate) fn from_rows(
        layout: SignatureLayout,
        keys: Vec<(usize, usize)>,
        bits: Vec<u64>,
    ) -> Self {
        let mut m = Self::new(layout);
        let w = layout.words();
        let mut order: Vec<usize> = (0..keys.len()).collect();
        order.sort_unstable_by_key(|&i| keys[i]);
        order.dedup_by_key(|i| keys[*i]);
        m.keys = order.iter().map(|&i| keys[i]).collect();
        m.bits = order.iter().flat_map(|&i| bits[i * w..(i + 1) * w].iter().copied()).collect();
        m
    }

    /// One row per connected unordered pair `(a, b)` with `a < b`, plus `(a, a)`
    /// for nodes with loops.
    pub fn for_target(g: &Multigraph) -> Self {
        let layout = SignatureLayout::of(g);
        // bucket by first endpoint, then sort each bucket by (second, code)
        let n = g.node_count();
        let ends = g.edge_ends();
        let mut offsets = vec![0usize; n + 1];
        for &(s, d) in ends {
            offsets[s.min(d) + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut per_edge = vec![(0usize, 0usize, 0usize); ends.len()];
        for (&(s, d), &t) in ends.iter().zip(g.edge_type_ids()) {
            let cols = usize::from(s <= d) | usize::from(d <= s) << 1;
            let first = s.min(d);
            per_edge[fill[first]] = (first, s.max(d), t << 2 | cols);
            fill[first] += 1;
        }
        for i in 0..n {
            per_edge[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        let mut m = Self::new(layout);
        let w = layout.words();
        m.keys.reserve(per_edge.len());
        m.bits.reserve(per_edge.len() * w);
        for &(first, second, code) in &per_edge {
            if m.keys.last() != Some(&(first, second)) {
                m.keys.push((first, second));
                m.bits.resize(m.bits.len() + w, 0);
                let row = m.row_mut(m.keys.len() - 1);
                for &l in g.node_label_ids(first) {
                    set_bit(row, layout.first_label(l));
                }
                for &l in g.node_label_ids(second) {
                    set_bit(row, layout.second_label(l));
                }
            }
            let t = code >> 2;
            let row = m.row_mut(m.keys.len() - 1);
            if code & 1 != 0 {
                set_bit(row, layout.type_out(t));
            }
            if code & 2 != 0 {
                set_bit(row, layout.type_in(t));
            }
        }
        m
    }

    pub(crate) fn row_index_or_insert(
        &mut self,
        first: usize,
        second: usize,
        init: impl FnOnce(&mut [u64]),
    ) -> usize {
        match self.keys.binary_search(&(first, second)) {
            Ok(i) => i,
            Err(i) => {
                let w = self.layout.words();
                self.keys.insert(i, (first, second));
                self.bits.splice(i * w..i * w, std::iter::repeat(0).take(w));
                init(self.row_mut(i));
                i
            }
        }
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [u64] {
        let w = self.layout.words();
        &mut self.bits[i * w..(i + 1) * w]
    }

    pub fn layout(&self) -> SignatureLayout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[(usize, usize)] {
        &self.keys
    }

    pub fn raw_bits(&self) -> &[u64] {
        &self.bits
    }

    pub fn row_at(&self, i: usize) -> &[u64] {
        let w = self.layout.words();
        &self.bits[i * w..(i + 1) * w]
    }

    pub fn row(&self, first: usize, second: usize) -> Option<&[u64]> {
        self.keys
            .binary_search(&(first, second))
            .ok()
            .map(|i| self.row_at(i))
    }

    pub fn rows(&self) -> impl Iterator<Item = ((usize, usize), &[u64])> + '_ {
        self.keys
            .iter()
            .enumerate()
            .map(move |(i, k)| (*k, self.row_at(i)))
    }

    /// Row rendered as `0`/`1` characters in column order.
    pub fn bit_string(&self, first: usize, second: usize) -> Option<String> {
        let row = self.row(first, second)?;
        Some(
            (0..self.layout.width())
                .map(|i| if get_bit(row, i) { '1' } else { '0' })
                .collect(),
        )
    }
}
