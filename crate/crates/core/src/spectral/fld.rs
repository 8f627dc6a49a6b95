//! `.fld` checkpoint files.
//!
//! Layout: one line of JSON (the [`FldHeader`]) terminated by `\n`, then the
//! component arrays back to back as little-endian `f64`, x₁ fastest. Real-space
//! fields store one value per point; spectral fields store `(re, im)` pairs.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::field::{ScalarField, Space, VectorField};
use super::grid::{Grid, GridSpec};
use crate::error::{Error, Result};
use crate::real::{cst, to_f64, Real};

pub const FLD_MAGIC: &str = "slowvar-fld";
pub const FLD_NORMALIZATION: &str = "forward transform scaled by 1/(n_h*n_h*n_v)";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FldHeader {
    pub format: String,
    pub version: u32,
    pub grid: GridSpec,
    pub space: Space,
    pub normalization: String,
    pub components: usize,
    pub t: f64,
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl FldHeader {
    fn values_per_component(&self) -> usize {
        let n = self.grid.n_h * self.grid.n_h * self.grid.n_v;
        match self.space {
            Space::Real => n,
            _ => 2 * n,
        }
    }
}

pub fn encode_fld<T: Real>(
    field: &VectorField<T>,
    t: f64,
    eps: f64,
    config_hash: Option<&str>,
) -> Result<Vec<u8>> {
    let header = FldHeader {
        format: FLD_MAGIC.into(),
        version: 1,
        grid: field.grid().spec(),
        space: field.space(),
        normalization: FLD_NORMALIZATION.into(),
        components: field.dim(),
        t,
        eps,
        config_hash: config_hash.map(str::to_owned),
    };
    let mut out = serde_json::to_vec(&header)?;
    out.push(b'\n');
    out.reserve(8 * header.values_per_component() * field.dim());
    for c in field.components() {
        for z in c.data() {
            out.extend_from_slice(&to_f64(z.re).to_le_bytes());
            if header.space != Space::Real {
                out.extend_from_slice(&to_f64(z.im).to_le_bytes());
            }
        }
    }
    Ok(out)
}

pub fn decode_fld<T: Real>(bytes: &[u8]) -> Result<(FldHeader, VectorField<T>)> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("missing header terminator".into()))?;
    let header: FldHeader = serde_json::from_slice(&bytes[..nl])
        .map_err(|e| Error::Format(format!("unreadable header: {e}")))?;
    if header.format != FLD_MAGIC || header.version != 1 {
        return Err(Error::Format(format!(
            "unsupported format {:?} version {}",
            header.format, header.version
        )));
    }
    if header.components == 0 {
        return Err(Error::Format("header declares zero components".into()));
    }
    let grid = Grid::<T>::new(header.grid).map_err(|e| Error::Format(e.to_string()))?;
    let body = &bytes[nl + 1..];
    let per = header.values_per_component();
    if body.len() != 8 * per * header.components {
        return Err(Error::Format(format!(
            "payload has {} bytes, header implies {}",
            body.len(),
            8 * per * header.components
        )));
    }
    let mut values = body
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")));
    let mut comps = Vec::with_capacity(header.components);
    for _ in 0..header.components {
        let data: Vec<Complex<T>> = (0..grid.len())
            .map(|_| {
                let re = values.next().unwrap_or(0.0);
                let im = if header.space == Space::Real {
                    0.0
                } else {
                    values.next().unwrap_or(0.0)
                };
                Complex::new(cst(re), cst(im))
            })
            .collect();
        comps.push(ScalarField::from_data(&grid, header.space, data)?);
    }
    Ok((header, VectorField::new(comps)?))
}

pub fn write_fld<T: Real>(
    path: impl AsRef<Path>,
    field: &VectorField<T>,
    t: f64,
    eps: f64,
    config_hash: Option<&str>,
) -> Result<()> {
    let bytes = encode_fld(field, t, eps, config_hash)?;
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn read_fld<T: Real>(path: impl AsRef<Path>) -> Result<(FldHeader, VectorField<T>)> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_fld(&bytes).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        e => e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_real_and_spectral() {
        let g = Grid::<f64>::new(GridSpec::periodic(8, 2)).unwrap();
        let a = ScalarField::from_fn(&g, |x, y, z| x.sin() * y.cos() + z.sin());
        let v = VectorField::new(vec![a.clone(), a.to_space(Space::Real)]).unwrap();
        for space in [Space::Real, Space::Spectral] {
            let v = v.to_space(space);
            let bytes = encode_fld(&v, 0.5, 0.25, Some("abc")).unwrap();
            let (h, back) = decode_fld::<f64>(&bytes).unwrap();
            assert_eq!(h.t, 0.5);
            assert_eq!(h.config_hash.as_deref(), Some("abc"));
            assert_eq!(back.space(), space);
            for (x, y) in v.components().iter().zip(back.components()) {
                assert_eq!(x.data(), y.data());
            }
        }
    }

    #[test]
    fn corrupted_header_is_reported() {
        let g = Grid::<f64>::new(GridSpec::periodic(4, 1)).unwrap();
        let v = VectorField::zeros(&g, Space::Real, 1);
        let mut bytes = encode_fld(&v, 0.0, 0.0, None).unwrap();
        bytes[3] = b'#';
        let err = decode_fld::<f64>(&bytes).unwrap_err();
        assert!(err.to_string().contains("unreadable header"), "{err}");

        let mut short = encode_fld(&v, 0.0, 0.0, None).unwrap();
        short.truncate(short.len() - 8);
        let err = decode_fld::<f64>(&short).unwrap_err();
        assert!(err.to_string().contains("payload"), "{err}");
    }
}
