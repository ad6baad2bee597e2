//! On-disk cache of flat lattices.
//!
//! One JSON file per system, named after the system and the SHA-256 of its
//! interchange document. Loading re-hashes the system and rejects files
//! whose version or hash differ.

use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lattice::{Flat, FlatLattice};
use crate::systems::LineSystem;

pub const CACHE_VERSION: u32 = 1;
pub const CACHE_DIR_ENV: &str = "QARRANGE_CACHE_DIR";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache format: {0}")]
    Format(#[from] serde_json::Error),
    #[error("cache file is for another system or version")]
    Stale,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    system: String,
    content_hash: String,
    labels: Vec<String>,
    layers: Vec<Vec<Flat>>,
}

/// SHA-256 of the system's interchange document, hex encoded.
pub fn content_hash(ls: &LineSystem) -> String {
    let doc = serde_json::to_vec(&ls.to_doc()).expect("serializable");
    hex::encode(Sha256::digest(&doc))
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

#[derive(Clone, Debug)]
pub struct LatticeCache {
    dir: PathBuf,
}

impl LatticeCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        LatticeCache { dir: dir.into() }
    }

    /// `$QARRANGE_CACHE_DIR`, else `$XDG_CACHE_HOME/qarrange`, else
    /// `$HOME/.cache/qarrange`.
    pub fn from_env() -> Option<Self> {
        let var = |k: &str| std::env::var_os(k).filter(|v| !v.is_empty()).map(PathBuf::from);
        var(CACHE_DIR_ENV)
            .or_else(|| var("XDG_CACHE_HOME").map(|p| p.join("qarrange")))
            .or_else(|| var("HOME").map(|p| p.join(".cache").join("qarrange")))
            .map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, ls: &LineSystem) -> PathBuf {
        let h = content_hash(ls);
        self.dir.join(format!("{}-{}.json", sanitize(ls.name()), &h[..16]))
    }

    /// The cached lattice of `ls`, `Ok(None)` when there is no file.
    pub fn load(&self, ls: &LineSystem) -> Result<Option<FlatLattice>, CacheError> {
        let path = self.path_for(ls);
        let file = match fs::File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let cf: CacheFile = serde_json::from_reader(BufReader::new(file))?;
        if cf.version != CACHE_VERSION || cf.system != ls.name() || cf.content_hash != content_hash(ls) {
            return Err(CacheError::Stale);
        }
        Ok(Some(FlatLattice::from_parts(ls.clone(), cf.layers, cf.labels)))
    }

    pub fn store(&self, fl: &FlatLattice) -> Result<PathBuf, CacheError> {
        fs::create_dir_all(&self.dir)?;
        let ls = fl.system();
        let path = self.path_for(ls);
        let tmp = path.with_extension("json.tmp");
        let cf = CacheFile {
            version: CACHE_VERSION,
            system: ls.name().to_string(),
            content_hash: content_hash(ls),
            labels: fl.labels().to_vec(),
            layers: fl.layers().to_vec(),
        };
        {
            let mut w = BufWriter::new(fs::File::create(&tmp)?);
            serde_json::to_writer(&mut w, &cf)?;
            std::io::Write::flush(&mut w)?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, census, codim_poly_via_lattice, elliptic_all, poincare};
    use crate::systems::SystemSpec;

    #[test]
    fn roundtrip_and_staleness() {
        let dir = tempfile::tempdir().unwrap();
        let cache = LatticeCache::new(dir.path());
        let ls = SystemSpec::parse("G(3,3,3)").unwrap().build().unwrap();
        assert!(cache.load(&ls).unwrap().is_none());
        let mut fl = build_lattice(&ls);
        elliptic_all(&mut fl, None).unwrap();
        cache.store(&fl).unwrap();
        let back = cache.load(&ls).unwrap().unwrap();
        assert_eq!(poincare(&back), poincare(&fl));
        assert_eq!(codim_poly_via_lattice(&back).unwrap(), codim_poly_via_lattice(&fl).unwrap());
        assert_eq!(census(&back, false), census(&fl, false));

        // a file whose content hash does not match
        let other = SystemSpec::parse("A3").unwrap().build().unwrap().renamed("G(3,3,3)");
        let p = cache.path_for(&ls);
        fs::copy(&p, cache.path_for(&other)).unwrap();
        assert!(matches!(cache.load(&other), Err(CacheError::Stale)));
    }
}
