//! Initial-data library.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ns25d::SliceStackState;
use crate::real::{cst, to_f64, Real};
use crate::spectral::{mode_index, Grid, ScalarField, Space};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedProfile {
    One,
    Sin,
    Cos,
}

/// One vertical Fourier mode `c·cos(kz') + s·sin(kz')`, `z' = 2πz/L_v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VMode {
    pub k: u32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Vertical profile `g(z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Profile {
    Named(NamedProfile),
    Modes {
        #[serde(default)]
        constant: f64,
        #[serde(default)]
        modes: Vec<VMode>,
    },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Named(NamedProfile::One)
    }
}

impl Profile {
    fn eval(&self, z: f64, l_v: f64) -> f64 {
        let zz = 2.0 * PI * z / l_v;
        match self {
            Profile::Named(NamedProfile::One) => 1.0,
            Profile::Named(NamedProfile::Sin) => zz.sin(),
            Profile::Named(NamedProfile::Cos) => zz.cos(),
            Profile::Modes { constant, modes } => {
                constant
                    + modes
                        .iter()
                        .map(|m| m.cos * (m.k as f64 * zz).cos() + m.sin * (m.k as f64 * zz).sin())
                        .sum::<f64>()
            }
        }
    }

    fn max_k(&self) -> u32 {
        match self {
            Profile::Named(NamedProfile::One) => 0,
            Profile::Named(_) => 1,
            Profile::Modes { modes, .. } => modes.iter().map(|m| m.k).max().unwrap_or(0),
        }
    }
}

/// One horizontal vorticity mode `a·cos(k·x' + φ)`, `x' = 2πx/L_h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HMode {
    pub k1: i64,
    pub k2: i64,
    pub amp: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Initial-data descriptor. Wavenumbers in mode lists are integers relative
/// to the box; `band` in [`IcSpec::Random`] is in physical units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IcSpec {
    /// `ω = −2A cos x₁' cos x₂' · g(z)`, velocity
    /// `A(cos x₁' sin x₂', −sin x₁' cos x₂')·g(z)` on the unit box.
    TaylorGreen {
        #[serde(default = "unit")]
        amplitude: f64,
        #[serde(default)]
        profile: Profile,
    },
    /// `u = (0, A sin(k x₁'))·g(z)`: no self-advection.
    Shear {
        #[serde(default = "unit")]
        amplitude: f64,
        #[serde(default = "unit_k")]
        k: i64,
        #[serde(default)]
        profile: Profile,
    },
    /// `ω = ṽ(x_h)·g(z)` with `ṽ` a sum of vorticity modes.
    Separable {
        modes: Vec<HMode>,
        #[serde(default)]
        profile: Profile,
    },
    /// Gaussian random vorticity with velocity spectrum `|û(ξ)|² ∝ |ξ_h|^slope`
    /// on `band[0] ≤ |ξ_h| ≤ band[1]` and vertical modes `|m| ≤ vertical_modes`,
    /// scaled so the most energetic slice has RMS velocity `amplitude`.
    Random {
        #[serde(default = "minus_one")]
        slope: f64,
        band: [f64; 2],
        #[serde(default = "unit")]
        amplitude: f64,
        #[serde(default)]
        vertical_modes: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
}

fn unit() -> f64 {
    1.0
}
fn unit_k() -> i64 {
    1
}
fn minus_one() -> f64 {
    -1.0
}

impl IcSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("initial data: {m}")));
        match self {
            IcSpec::Separable { modes, .. } => {
                if modes.is_empty() {
                    return bad("separable data without modes".into());
                }
                if let Some(m) = modes.iter().find(|m| m.k1 == 0 && m.k2 == 0 && m.amp != 0.0) {
                    return bad(format!("mode (0, 0) with amplitude {} has nonzero mean", m.amp));
                }
            }
            IcSpec::Shear { k, .. } if *k == 0 => return bad("shear with k = 0 has nonzero mean".into()),
            IcSpec::Random { band, .. } if !(band[0] > 0.0 && band[1] >= band[0]) => {
                return bad(format!("band [{}, {}] must be positive and ordered", band[0], band[1]))
            }
            _ => {}
        }
        Ok(())
    }

    /// Whether the data is independent of `z` (remainder vanishes exactly).
    pub fn is_z_independent(&self) -> bool {
        match self {
            IcSpec::TaylorGreen { profile, .. }
            | IcSpec::Shear { profile, .. }
            | IcSpec::Separable { profile, .. } => match profile {
                Profile::Named(NamedProfile::One) => true,
                Profile::Named(_) => false,
                Profile::Modes { modes, .. } => modes.iter().all(|m| m.k == 0 || (m.cos == 0.0 && m.sin == 0.0)),
            },
            IcSpec::Random { vertical_modes, .. } => *vertical_modes == 0,
        }
    }
}

fn check_fits<T: Real>(grid: &Grid<T>, kh: i64, kv: u32) -> Result<()> {
    let nyq_h = (grid.n_h() / 2) as i64;
    let nyq_v = (grid.n_v() / 2) as u32;
    if kh >= nyq_h || (kv > 0 && kv >= nyq_v.max(1)) {
        return Err(Error::Config(format!(
            "initial data: mode ({kh}, {kv}) not resolved on {}²×{}",
            grid.n_h(),
            grid.n_v()
        )));
    }
    Ok(())
}

/// Builds the 2.5-D state for `spec` on `grid` with system parameter `eps`.
/// The output has zero horizontal mean in every slice and is horizontally
/// divergence free by construction (it is stored as vorticity).
pub fn make_initial_data<T: Real>(spec: &IcSpec, grid: &Grid<T>, eps: T, seed: u64) -> Result<SliceStackState<T>> {
    spec.validate()?;
    let l_h = to_f64(grid.l_h());
    let l_v = to_f64(grid.l_v());
    let c = 2.0 * PI / l_h;
    let omega = match spec {
        IcSpec::TaylorGreen { amplitude, profile } => {
            check_fits(grid, 1, profile.max_k())?;
            let a = *amplitude;
            ScalarField::from_fn(grid, |x, y, z| {
                let (x, y, z) = (to_f64(x), to_f64(y), to_f64(z));
                cst(-2.0 * a * c * (c * x).cos() * (c * y).cos() * profile.eval(z, l_v))
            })
        }
        IcSpec::Shear { amplitude, k, profile } => {
            check_fits(grid, k.abs(), profile.max_k())?;
            let kk = c * *k as f64;
            let a = *amplitude;
            ScalarField::from_fn(grid, |x, _, z| {
                cst(a * kk * (kk * to_f64(x)).cos() * profile.eval(to_f64(z), l_v))
            })
        }
        IcSpec::Separable { modes, profile } => {
            for m in modes {
                check_fits(grid, m.k1.abs().max(m.k2.abs()), profile.max_k())?;
            }
            ScalarField::from_fn(grid, |x, y, z| {
                let (x, y) = (to_f64(x), to_f64(y));
                let h: f64 = modes
                    .iter()
                    .map(|m| m.amp * (c * (m.k1 as f64 * x + m.k2 as f64 * y) + m.phase).cos())
                    .sum();
                cst(h * profile.eval(to_f64(z), l_v))
            })
        }
        IcSpec::Random {
            slope,
            band,
            amplitude,
            vertical_modes,
            seed: own,
        } => random_vorticity(grid, *slope, *band, *amplitude, *vertical_modes, own.unwrap_or(seed))?,
    };
    SliceStackState::new(omega, eps, T::zero())
}

fn random_vorticity<T: Real>(
    grid: &Grid<T>,
    slope: f64,
    band: [f64; 2],
    amplitude: f64,
    vertical_modes: usize,
    seed: u64,
) -> Result<ScalarField<T>> {
    let (n, nv, sl) = (grid.n_h(), grid.n_v(), grid.slice_len());
    if vertical_modes > 0 && vertical_modes >= (nv / 2).max(1) {
        return Err(Error::Config(format!("initial data: {vertical_modes} vertical modes need n_v > {}", 2 * vertical_modes)));
    }
    let kmax = to_f64(grid.max_kh());
    if band[0] > kmax {
        return Err(Error::Config(format!("initial data: band starts above the grid cut-off {kmax}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![Complex::<T>::default(); grid.len()];
    for (idx, v) in data.iter_mut().enumerate() {
        let (h, k3) = (idx % sl, idx / sl);
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        if mode_index(k3, nv).unsigned_abs() as usize > vertical_modes {
            continue;
        }
        let k = to_f64(grid.kh2(h % n, h / n)).sqrt();
        if k < band[0] || k > band[1] || k == 0.0 {
            continue;
        }
        // |ω̂| = |ξ| |û|
        let w = k * k.powf(0.5 * slope);
        *v = Complex::new(cst(a * w), cst(b * w));
    }
    let f = ScalarField::from_data(grid, Space::Spectral, data)?;
    let real = f.real_values();
    let mut w = ScalarField::from_real(grid, &real)?.into_space(Space::HSpectral);
    let mut d = w.into_data();
    for k in 0..nv {
        d[k * sl] = Complex::default();
    }
    w = ScalarField::from_data(grid, Space::HSpectral, d)?;

    let probe = SliceStackState::new(w.clone(), T::zero(), T::zero())?;
    let u = probe.velocity()?;
    let worst = crate::diagnostics::SliceSpectrum::of_field(&u)
        .mixed_sq(crate::diagnostics::VNorm::LInf, 0.0)
        .sqrt();
    if !(worst > 0.0) {
        return Err(Error::Config("initial data: band contains no resolved modes".into()));
    }
    let rms = worst / to_f64(grid.area()).sqrt();
    w.scale(cst(amplitude / rms));
    Ok(w)
}
