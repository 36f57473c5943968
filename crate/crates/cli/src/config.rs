//! Persistence of the normalization factor in a key-value config file.
//!
//! The file holds `normalization_c = <float>`; the path comes from
//! `--config`, then the `FRACDIM_CONFIG` environment variable, then
//! `./fracdim.conf`. Floats are written with Rust's shortest round-trip
//! formatting, so a stored factor reloads bit-exactly.

use std::path::{Path, PathBuf};

use fracdim_core::Error;

pub const KEY: &str = "normalization_c";

pub fn config_path(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os("FRACDIM_CONFIG").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("fracdim.conf"))
}

pub fn load_normalization(path: &Path) -> Result<f64, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            if key.trim() == KEY {
                return value.trim().parse().map_err(|_| {
                    Error::InvalidParameter(format!(
                        "config {} has malformed {KEY} value {:?}",
                        path.display(),
                        value.trim()
                    ))
                });
            }
        }
    }
    Err(Error::InvalidParameter(format!(
        "config {} does not define {KEY}; run `fracdim calibrate` first",
        path.display()
    )))
}

pub fn store_normalization(path: &Path, c: f64) -> Result<(), Error> {
    std::fs::write(path, format!("{KEY} = {c}\n")).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_then_load_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fracdim.conf");
        let c = 1.080_032_994_214_257_7_f64;
        store_normalization(&path, c).unwrap();
        assert_eq!(load_normalization(&path).unwrap(), c);
    }

    #[test]
    fn missing_key_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fracdim.conf");
        std::fs::write(&path, "# empty\n").unwrap();
        assert!(matches!(
            load_normalization(&path),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn path_precedence() {
        let explicit = config_path(Some(Path::new("/tmp/x.conf")));
        assert_eq!(explicit, PathBuf::from("/tmp/x.conf"));
    }
}
