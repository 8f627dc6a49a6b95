//! Mixed anisotropic norms computed slice by slice through Parseval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{to_f64, Real};
use crate::spectral::{ScalarField, Space, VectorField};

/// Exponent of the vertical Lebesgue norm in `L^p_v(·_h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VNorm {
    #[serde(rename = "2")]
    L2,
    #[serde(rename = "inf")]
    LInf,
}

/// Horizontal power spectrum of a field stack, binned by `|ξ_h|²`.
///
/// `bin(z, j)` is the part of `‖v(·, z)‖²_{L²_h}` carried by the modes with
/// `|ξ_h|² = k2[j]`, summed over components.
#[derive(Clone, Debug)]
pub struct SliceSpectrum {
    k2: Vec<f64>,
    bins: Vec<Vec<f64>>,
    dz: f64,
}

impl SliceSpectrum {
    pub fn of_field<T: Real>(v: &VectorField<T>) -> Self {
        Self::of_components(v.components())
    }

    pub fn of_scalar<T: Real>(f: &ScalarField<T>) -> Self {
        Self::of_components(std::slice::from_ref(f))
    }

    pub(crate) fn of_components<T: Real>(comps: &[ScalarField<T>]) -> Self {
        let grid = comps[0].grid();
        let (n, nv, sl) = (grid.n_h(), grid.n_v(), grid.slice_len());
        let mut keyed: Vec<(f64, usize)> = (0..sl)
            .map(|h| (to_f64(grid.kh2(h % n, h / n)), h))
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut k2 = Vec::new();
        let mut bin_of = vec![0usize; sl];
        for &(k, h) in &keyed {
            // wavenumbers are exact multiples of 2π/L, so equal shells compare
            // equal up to the last bit or two
            if k2.last().is_none_or(|&last: &f64| k - last > 1e-12 * k.max(1.0)) {
                k2.push(k);
            }
            bin_of[h] = k2.len() - 1;
        }
        let area = to_f64(grid.area());
        let mut bins = vec![vec![0.0; k2.len()]; nv];
        for c in comps {
            let c = c.to_space(Space::HSpectral);
            for (z, slice) in c.data().chunks(sl).enumerate() {
                for (h, v) in slice.iter().enumerate() {
                    bins[z][bin_of[h]] += to_f64(v.norm_sqr()) * area;
                }
            }
        }
        SliceSpectrum {
            k2,
            bins,
            dz: to_f64(grid.dz()),
        }
    }

    /// Builds a spectrum from explicit shells (strictly increasing `k2`) and
    /// per-slice shell energies.
    pub fn from_shells(k2: Vec<f64>, bins: Vec<Vec<f64>>, dz: f64) -> Result<Self> {
        if k2.is_empty() || k2.windows(2).any(|w| w[0] >= w[1]) || k2[0] < 0.0 {
            return Err(Error::InvalidArgument("shells must be nonnegative and increasing".into()));
        }
        if bins.is_empty() || bins.iter().any(|b| b.len() != k2.len()) {
            return Err(Error::Shape("one energy per shell per slice".into()));
        }
        Ok(SliceSpectrum { k2, bins, dz })
    }

    pub fn shells(&self) -> &[f64] {
        &self.k2
    }

    pub fn n_slices(&self) -> usize {
        self.bins.len()
    }

    /// Per-slice `Σ_ξ m(|ξ_h|²) |v̂(ξ, z)|²`.
    pub fn weighted(&self, m: impl Fn(f64) -> f64) -> Vec<f64> {
        let w: Vec<f64> = self.k2.iter().map(|&k| m(k)).collect();
        self.bins
            .iter()
            .map(|b| b.iter().zip(&w).map(|(a, w)| a * w).sum())
            .collect()
    }

    /// Per-slice energy in the shells `|ξ_h| ≤ g`.
    pub fn lowpass(&self, g: f64) -> Vec<f64> {
        let g2 = g * g;
        let top = self.k2.partition_point(|&k| k <= g2);
        self.bins.iter().map(|b| b[..top].iter().sum()).collect()
    }

    /// `‖·‖²_{L^p_v}` of a per-slice squared quantity.
    pub fn reduce_sq(&self, slices: &[f64], p: VNorm) -> f64 {
        reduce_sq(slices, p, self.dz)
    }

    /// `‖v‖²_{L^p_v(Ḣ^s_h)}`, with the mean mode dropped for `s ≠ 0`.
    pub fn mixed_sq(&self, p: VNorm, s: f64) -> f64 {
        self.reduce_sq(&self.weighted(|k| multiplier(k, s)), p)
    }
}

pub(crate) fn reduce_sq(slices: &[f64], p: VNorm, dz: f64) -> f64 {
    match p {
        VNorm::LInf => slices.iter().copied().fold(0.0, f64::max),
        VNorm::L2 => slices.iter().sum::<f64>() * dz,
    }
}

/// `|ξ|^{2s}` as a function of `|ξ|²`, zero on the mean mode unless `s = 0`.
#[inline]
pub(crate) fn multiplier(k2: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if k2 == 0.0 {
        0.0
    } else {
        k2.powf(s)
    }
}

fn check_s(s: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&s) {
        return Err(Error::InvalidArgument(format!("regularity {s} outside [{lo}, {hi}]")));
    }
    Ok(())
}

fn mixed_of(comps: &[ScalarField<impl Real>], p: VNorm, s: f64) -> Result<f64> {
    check_s(s, -1.0, 1.0)?;
    if s < 0.0 {
        for c in comps {
            c.require_zero_slice_mean("negative-order horizontal norm")?;
        }
    }
    Ok(SliceSpectrum::of_components(comps).mixed_sq(p, s).sqrt())
}

/// `‖v‖_{L^p_v(Ḣ^s_h)}`: per slice `‖|ξ_h|^s v̂‖` by Parseval, then the
/// discrete `L^p` over slices (max, or `dz`-weighted sum for `p = 2`).
pub fn mixed_norm<T: Real>(v: &VectorField<T>, p: VNorm, s: f64) -> Result<f64> {
    mixed_of(v.components(), p, s)
}

pub fn mixed_norm_scalar<T: Real>(f: &ScalarField<T>, p: VNorm, s: f64) -> Result<f64> {
    mixed_of(std::slice::from_ref(f), p, s)
}

/// `‖v‖_{Ḣ^s}` over the torus with the full 3-D wavenumber modulus.
pub fn sobolev3d<T: Real>(v: &VectorField<T>, s: f64) -> Result<f64> {
    check_s(s, -1.0, 1.5)?;
    let grid = v.grid();
    let (n, sl) = (grid.n_h(), grid.slice_len());
    let (kh, kv) = (grid.kh(), grid.kv());
    let mut total = 0.0;
    for c in v.components() {
        let c = c.to_space(Space::Spectral);
        let d = c.data();
        if s < 0.0 && to_f64(d[0].norm()) > to_f64(c.rms()) * 1e-10 {
            return Err(Error::NonZeroMean { op: "negative-order Sobolev norm" });
        }
        for (idx, a) in d.iter().enumerate() {
            let h = idx % sl;
            let (x, y, z) = (kh[h % n], kh[h / n], kv[idx / sl]);
            total += multiplier(to_f64(x * x + y * y + z * z), s) * to_f64(a.norm_sqr());
        }
    }
    Ok((total * to_f64(grid.volume())).sqrt())
}

/// `‖v‖_{L²}` over the torus.
pub fn l2_global<T: Real>(v: &VectorField<T>) -> f64 {
    to_f64(v.l2_norm())
}

/// Largest pointwise Euclidean length of `v` on the grid.
pub fn linf_3d<T: Real>(v: &VectorField<T>) -> f64 {
    to_f64(v.linf_norm())
}
