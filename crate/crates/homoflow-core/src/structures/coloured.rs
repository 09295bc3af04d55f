use super::{ranks, FiniteStructure};

/// Flattened view used by the embedding and canonical-form searches:
/// one colour per vertex and a bit mask per ordered pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloured {
    pub n: usize,
    pub colour: Vec<u32>,
    pub rel: Vec<u8>,
}

impl Coloured {
    pub const ARC: u8 = 1;
    pub const AUX: u8 = 2;
    pub const LESS: u8 = 4;
    pub const EQUIV: u8 = 8;
    pub const LESS2: u8 = 16;

    pub fn new(n: usize) -> Self {
        Coloured { n, colour: vec![0; n], rel: vec![0; n * n] }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.rel[x * self.n + y]
    }

    #[inline]
    pub fn set_bit(&mut self, x: usize, y: usize, bit: u8) {
        self.rel[x * self.n + y] |= bit;
    }

    /// Adds the strict order encoded by a least-first listing.
    pub fn add_order(&mut self, order: &[usize], bit: u8) {
        let r = ranks(order);
        for x in 0..self.n {
            for y in 0..self.n {
                if r[x] < r[y] {
                    self.set_bit(x, y, bit);
                }
            }
        }
    }

    /// Combines an extra colour into every vertex colour.
    pub fn add_colours(&mut self, extra: &[u32]) {
        for (c, &e) in self.colour.iter_mut().zip(extra) {
            *c = (*c << 12) | (e + 1);
        }
    }
}

impl From<&FiniteStructure> for Coloured {
    fn from(s: &FiniteStructure) -> Self {
        let n = s.len();
        let mut c = Coloured::new(n);
        for x in 0..n {
            for y in 0..n {
                if s.has_arc(x, y) {
                    c.set_bit(x, y, Coloured::ARC);
                }
                if s.aux(x, y) {
                    c.set_bit(x, y, Coloured::AUX);
                }
            }
        }
        if let Some(p) = s.parts() {
            c.add_colours(p);
        }
        if let Some(o) = s.order() {
            c.add_order(o, Coloured::LESS);
        }
        if let Some(e) = s.equivalence() {
            for x in 0..n {
                for y in 0..n {
                    if x != y && e[x] == e[y] {
                        c.set_bit(x, y, Coloured::EQUIV);
                    }
                }
            }
        }
        c
    }
}
