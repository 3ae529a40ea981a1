//! Binary dump of eigenpairs keyed by a hash of the dual graph.
//!
//! Layout (little endian): magic `SBEIGEN1`, 32-byte domain hash, `u64` n,
//! `u64` k, k eigenvalues, then `n * k` column-major vector entries.

use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{SpectralBasis, SpectralError};
use crate::mesh::ElementAdjacency;

const MAGIC: &[u8; 8] = b"SBEIGEN1";

pub fn domain_hash(adj: &ElementAdjacency) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((adj.n_elements() as u64).to_le_bytes());
    for e in 0..adj.n_elements() {
        h.update((adj.degree(e) as u64).to_le_bytes());
        for &j in adj.neighbors(e) {
            h.update((j as u64).to_le_bytes());
        }
    }
    h.finalize().into()
}

pub fn save_basis(path: impl AsRef<Path>, hash: &[u8; 32], basis: &SpectralBasis) -> Result<(), SpectralError> {
    let mut out = Vec::with_capacity(56 + 8 * (basis.k() + basis.raw().len()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(hash);
    out.extend_from_slice(&(basis.n() as u64).to_le_bytes());
    out.extend_from_slice(&(basis.k() as u64).to_le_bytes());
    for v in basis.eigenvalues().iter().chain(basis.raw()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::File::create(path)?.write_all(&out)?;
    Ok(())
}

/// Returns `Ok(None)` when the file belongs to a different domain.
pub fn load_basis(path: impl AsRef<Path>, hash: &[u8; 32]) -> Result<Option<SpectralBasis>, SpectralError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 56 || &bytes[..8] != MAGIC {
        return Err(SpectralError::Cache("not a basis cache file".into()));
    }
    if &bytes[8..40] != hash {
        return Ok(None);
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()) as usize;
    let (n, k) = (word(40), word(48));
    let expected = 56 + 8 * (k + n * k);
    if bytes.len() != expected {
        return Err(SpectralError::Cache(format!(
            "truncated cache: {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let floats: Vec<f64> = bytes[56..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let (values, data) = floats.split_at(k);
    SpectralBasis::from_raw(n, values.to_vec(), data.to_vec()).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Domain, QuadGrid};
    use crate::spectral::{assemble_laplacian, smallest_eigenpairs};

    #[test]
    fn round_trip_is_bit_exact() {
        let g = QuadGrid::new(4, 3, 1.0, 1.0, 0.0, 0.0).unwrap();
        let adj = g.face_adjacency().unwrap();
        let basis = smallest_eigenpairs(&assemble_laplacian(&adj), 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.eig");
        let hash = domain_hash(&adj);
        save_basis(&path, &hash, &basis).unwrap();
        assert_eq!(load_basis(&path, &hash).unwrap().unwrap(), basis);

        let other = QuadGrid::new(3, 4, 1.0, 1.0, 0.0, 0.0).unwrap();
        let other_hash = domain_hash(&other.face_adjacency().unwrap());
        assert_ne!(other_hash, hash);
        assert!(load_basis(&path, &other_hash).unwrap().is_none());
    }
}
