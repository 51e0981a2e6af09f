//! Scalar fields on masked grids and the PLSF binary format.

use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{GridMask, Point};
use crate::{Error, Result};

/// What a field holds. The discriminants are the PLSF role tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Ground state, max-normalised.
    U = 0,
    /// `v = −log u`.
    LogNeg = 1,
    /// `w_κ = (−log κu)^{1/2}`.
    WKappa = 2,
    /// Convex envelope of a `w_κ` field.
    WEnvelope = 3,
    /// `u_κ` reconstructed from an envelope.
    UKappa = 4,
}

impl Role {
    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        Ok(match tag {
            0 => Role::U,
            1 => Role::LogNeg,
            2 => Role::WKappa,
            3 => Role::WEnvelope,
            4 => Role::UKappa,
            _ => return Err(Error::Format(format!("unknown role tag {tag}"))),
        })
    }
}

/// One value per interior node of a [`GridMask`].
#[derive(Clone, Debug)]
pub struct GridField {
    mask: Arc<GridMask>,
    values: Vec<f64>,
    role: Role,
}

impl GridField {
    pub fn new(mask: Arc<GridMask>, values: Vec<f64>, role: Role) -> Result<Self> {
        if values.len() != mask.len() {
            return Err(Error::MaskMismatch(format!(
                "{} values for {} interior nodes",
                values.len(),
                mask.len()
            )));
        }
        Ok(GridField { mask, values, role })
    }

    /// Samples `f` at every interior node.
    pub fn from_fn(mask: Arc<GridMask>, role: Role, f: impl Fn(Point) -> f64) -> Self {
        let values = (0..mask.len()).map(|k| f(mask.point(k))).collect();
        GridField { mask, values, role }
    }

    pub fn mask(&self) -> &Arc<GridMask> {
        &self.mask
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Node index and value of the maximum (first occurrence).
    pub fn argmax(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (k, &v) in self.values.iter().enumerate() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((k, v));
            }
        }
        best
    }

    /// Node index and value of the minimum (first occurrence).
    pub fn argmin(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (k, &v) in self.values.iter().enumerate() {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((k, v));
            }
        }
        best
    }

    /// Same mask, new values.
    pub fn with_values(&self, values: Vec<f64>, role: Role) -> Result<Self> {
        GridField::new(self.mask.clone(), values, role)
    }

    /// Writes the field in PLSF format.
    pub fn write_plsf<W: Write>(&self, mut out: W) -> Result<()> {
        let mask = &self.mask;
        let dim = mask.dimension();
        let dims = mask.dims();
        out.write_all(b"PLSF")?;
        out.write_all(&[1, dim as u8, self.role.tag()])?;
        for &n in &dims[..dim] {
            out.write_all(&(n as u64).to_le_bytes())?;
        }
        for &o in &mask.origin()[..dim] {
            out.write_all(&o.to_le_bytes())?;
        }
        out.write_all(&mask.h().to_le_bytes())?;
        let flags = mask.inside_flags();
        let mut bits = vec![0u8; flags.len().div_ceil(8)];
        for (k, &inside) in flags.iter().enumerate() {
            if inside {
                bits[k / 8] |= 1 << (k % 8);
            }
        }
        out.write_all(&bits)?;
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Raw contents of a PLSF file, before it is matched against a mask.
#[derive(Clone, Debug, PartialEq)]
pub struct PlsfFile {
    pub dimension: usize,
    pub role: Role,
    pub dims: Vec<u64>,
    pub origin: Vec<f64>,
    pub h: f64,
    pub inside: Vec<bool>,
    pub values: Vec<f64>,
}

fn read_array<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("truncated file".into()),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

impl PlsfFile {
    pub fn read<R: Read>(mut input: R) -> Result<Self> {
        if &read_array::<4, _>(&mut input)? != b"PLSF" {
            return Err(Error::Format("bad magic bytes".into()));
        }
        let [version, dimension, role] = read_array::<3, _>(&mut input)?;
        if version != 1 {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        if dimension != 1 && dimension != 2 {
            return Err(Error::Format(format!("unsupported dimension {dimension}")));
        }
        let dimension = dimension as usize;
        let role = Role::from_tag(role)?;
        let dims: Vec<u64> =
            (0..dimension).map(|_| read_array::<8, _>(&mut input).map(u64::from_le_bytes)).collect::<Result<_>>()?;
        let origin: Vec<f64> =
            (0..dimension).map(|_| read_array::<8, _>(&mut input).map(f64::from_le_bytes)).collect::<Result<_>>()?;
        let h = f64::from_le_bytes(read_array::<8, _>(&mut input)?);
        let total = dims.iter().try_fold(1u64, |acc, &n| acc.checked_mul(n));
        let total = match total {
            Some(t) if t <= 1 << 32 => t as usize,
            _ => return Err(Error::Format("grid dimensions too large".into())),
        };
        let mut bits = vec![0u8; total.div_ceil(8)];
        input.read_exact(&mut bits).map_err(|_| Error::Format("truncated mask".into()))?;
        let inside: Vec<bool> = (0..total).map(|k| bits[k / 8] >> (k % 8) & 1 == 1).collect();
        let count = inside.iter().filter(|&&b| b).count();
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            values.push(f64::from_le_bytes(read_array::<8, _>(&mut input)?));
        }
        let mut rest = Vec::new();
        input.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(Error::Format(format!("{} trailing bytes", rest.len())));
        }
        Ok(PlsfFile { dimension, role, dims, origin, h, inside, values })
    }

    /// Attaches the values to `mask`, which must describe the same grid.
    pub fn into_field(self, mask: Arc<GridMask>) -> Result<GridField> {
        let dim = mask.dimension();
        let dims = mask.dims();
        let same_header = self.dimension == dim
            && self.dims.iter().zip(dims).all(|(&a, b)| a == b as u64)
            && self.origin.iter().zip(mask.origin()).all(|(&a, b)| a == b)
            && self.h == mask.h();
        if !same_header {
            return Err(Error::MaskMismatch(format!(
                "file grid {:?} at {:?} with h = {} differs from the domain grid {:?} at {:?} with h = {}",
                self.dims,
                self.origin,
                self.h,
                &dims[..dim],
                &mask.origin()[..dim],
                mask.h()
            )));
        }
        if self.inside != mask.inside_flags() {
            return Err(Error::MaskMismatch("inside flags differ from the rasterised domain".into()));
        }
        GridField::new(mask, self.values, self.role)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_domain, rasterize, DomainSpec};

    fn disc_mask(h: f64) -> Arc<GridMask> {
        let d = make_domain(&DomainSpec::Disc { center: [0.2, 0.0], radius: 1.0 }).unwrap();
        Arc::new(rasterize(&d, h).unwrap())
    }

    #[test]
    fn plsf_round_trip_is_bitwise() {
        let mask = disc_mask(0.1);
        let field = GridField::from_fn(mask.clone(), Role::WKappa, |p| (p[0] * 3.1).sin() + p[1].powi(3));
        let mut bytes = Vec::new();
        field.write_plsf(&mut bytes).unwrap();
        let file = PlsfFile::read(bytes.as_slice()).unwrap();
        assert_eq!(file.role, Role::WKappa);
        let back = file.into_field(mask).unwrap();
        let a: Vec<u64> = field.values().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u64> = back.values().iter().map(|v| v.to_bits()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn plsf_header_layout() {
        let d = make_domain(&DomainSpec::Interval { a: 0.0, b: 1.0 }).unwrap();
        let mask = Arc::new(rasterize(&d, 0.25).unwrap());
        let field = GridField::from_fn(mask, Role::U, |p| p[0]);
        let mut bytes = Vec::new();
        field.write_plsf(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"PLSF");
        assert_eq!(bytes[4..7], [1, 1, 0]);
        assert_eq!(u64::from_le_bytes(bytes[7..15].try_into().unwrap()), 5);
        assert_eq!(f64::from_le_bytes(bytes[15..23].try_into().unwrap()), 0.0);
        assert_eq!(f64::from_le_bytes(bytes[23..31].try_into().unwrap()), 0.25);
        // Nodes 1, 2, 3 of 5 are inside: bits 0b01110.
        assert_eq!(bytes[31], 0b0000_1110);
        assert_eq!(bytes.len(), 32 + 3 * 8);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let field = GridField::from_fn(disc_mask(0.1), Role::U, |_| 1.0);
        let mut bytes = Vec::new();
        field.write_plsf(&mut bytes).unwrap();
        let file = PlsfFile::read(bytes.as_slice()).unwrap();
        assert!(matches!(file.into_field(disc_mask(0.05)), Err(Error::MaskMismatch(_))));
        assert!(matches!(PlsfFile::read(&bytes[..bytes.len() - 3]), Err(Error::Format(_))));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(PlsfFile::read(bad.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn value_count_must_match() {
        assert!(GridField::new(disc_mask(0.5), vec![1.0], Role::U).is_err());
    }
}
