//! Data-aided one-tap equalization.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EqualizerKind {
    /// `c = Σ ref·conj(rx) / Σ|rx|²`, minimizing `Σ|c·rx − ref|²`.
    Mmse,
    /// `c = Σ|ref|² / Σ rx·conj(ref)`, the inverse of the least-squares
    /// channel estimate; unbiased in additive noise.
    #[default]
    Unbiased,
}

pub fn one_tap(rx: &[Complex64], reference: &[Complex64], kind: EqualizerKind) -> Result<Complex64> {
    if rx.len() != reference.len() || rx.is_empty() {
        return Err(Error::Data(format!(
            "equalizer needs equal nonzero lengths, got {} and {}",
            rx.len(),
            reference.len()
        )));
    }
    let cross: Complex64 = rx.iter().zip(reference).map(|(r, s)| s * r.conj()).sum();
    let tap = match kind {
        EqualizerKind::Mmse => cross / rx.iter().map(|r| r.norm_sqr()).sum::<f64>(),
        EqualizerKind::Unbiased => reference.iter().map(|s| s.norm_sqr()).sum::<f64>() / cross.conj(),
    };
    if tap.is_finite() {
        Ok(tap)
    } else {
        Err(Error::Domain { what: "equalize", value: cross.norm(), reason: "received stream has no usable power" })
    }
}

/// Applies one tap to the whole sequence.
pub fn equalize(rx: &[Complex64], reference: &[Complex64], kind: EqualizerKind) -> Result<Vec<Complex64>> {
    let c = one_tap(rx, reference, kind)?;
    Ok(rx.iter().map(|r| r * c).collect())
}

/// One tap per stream, where sample `i` belongs to stream `i % n_streams`
/// (one stream per OFDM subcarrier).
pub fn equalize_streams(
    rx: &[Complex64],
    reference: &[Complex64],
    n_streams: usize,
    kind: EqualizerKind,
) -> Result<Vec<Complex64>> {
    if n_streams == 0 || rx.len() != reference.len() || !rx.len().is_multiple_of(n_streams) {
        return Err(Error::Data(format!(
            "cannot split {} samples into {n_streams} equal streams",
            rx.len()
        )));
    }
    let mut out = rx.to_vec();
    for s in 0..n_streams {
        let r: Vec<Complex64> = rx.iter().skip(s).step_by(n_streams).cloned().collect();
        let x: Vec<Complex64> = reference.iter().skip(s).step_by(n_streams).cloned().collect();
        let c = one_tap(&r, &x, kind)?;
        out.iter_mut().skip(s).step_by(n_streams).for_each(|v| *v *= c);
    }
    Ok(out)
}
