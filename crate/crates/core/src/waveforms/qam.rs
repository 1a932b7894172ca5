//! Gray-mapped square QAM with unit average symbol energy.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Qam {
    order: u32,
    /// Levels per axis, `√M`.
    side: u32,
    /// Bits per axis.
    axis_bits: u32,
    scale: f64,
}

fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

fn gray_inverse(mut g: u32) -> u32 {
    let mut i = 0;
    while g != 0 {
        i ^= g;
        g >>= 1;
    }
    i
}

impl Qam {
    pub fn new(order: u32) -> Result<Self> {
        if !matches!(order, 4 | 16 | 64) {
            return Err(Error::Config(format!("modulation order must be 4, 16 or 64, got {order}")));
        }
        let side = (order as f64).sqrt().round() as u32;
        Ok(Self {
            order,
            side,
            axis_bits: side.trailing_zeros(),
            scale: (1.5 / (order as f64 - 1.0)).sqrt(),
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.axis_bits as usize
    }

    /// Magnitude of the corner points.
    pub fn peak_amplitude(&self) -> f64 {
        std::f64::consts::SQRT_2 * (self.side - 1) as f64 * self.scale
    }

    fn level(&self, index: u32) -> f64 {
        (2.0 * index as f64 - (self.side - 1) as f64) * self.scale
    }

    fn axis_index(&self, v: f64) -> u32 {
        let i = ((v / self.scale + (self.side - 1) as f64) / 2.0).round();
        i.clamp(0.0, (self.side - 1) as f64) as u32
    }

    /// All constellation points, indexed by their bit label.
    pub fn points(&self) -> Vec<Complex64> {
        let n = self.bits_per_symbol();
        (0..self.order)
            .map(|label| {
                let bits: Vec<u8> = (0..n).rev().map(|k| ((label >> k) & 1) as u8).collect();
                self.map(&bits).unwrap()[0]
            })
            .collect()
    }

    /// Maps bits (one per byte, 0 or 1) to symbols. The first half of each
    /// symbol's bits selects the in-phase level, the second half quadrature.
    pub fn map(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let n = self.bits_per_symbol();
        if !bits.len().is_multiple_of(n) {
            return Err(Error::Data(format!(
                "bit count {} not divisible by log2(M) = {n}",
                bits.len()
            )));
        }
        let word = |chunk: &[u8]| chunk.iter().fold(0u32, |acc, &b| (acc << 1) | (b & 1) as u32);
        let k = self.axis_bits as usize;
        Ok(bits
            .chunks_exact(n)
            .map(|c| {
                let i = gray_inverse(word(&c[..k]));
                let q = gray_inverse(word(&c[k..]));
                Complex64::new(self.level(i), self.level(q))
            })
            .collect())
    }

    /// Hard-decision nearest-neighbour demapping.
    pub fn demap(&self, symbols: &[Complex64]) -> Vec<u8> {
        let k = self.axis_bits;
        let mut out = Vec::with_capacity(symbols.len() * self.bits_per_symbol());
        for s in symbols {
            for g in [gray(self.axis_index(s.re)), gray(self.axis_index(s.im))] {
                out.extend((0..k).rev().map(|b| ((g >> b) & 1) as u8));
            }
        }
        out
    }

    /// Nearest constellation point to each symbol.
    pub fn decide(&self, symbols: &[Complex64]) -> Vec<Complex64> {
        symbols
            .iter()
            .map(|s| Complex64::new(self.level(self.axis_index(s.re)), self.level(self.axis_index(s.im))))
            .collect()
    }
}
