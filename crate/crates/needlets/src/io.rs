//! File loading and atomic output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use needlets_core::quadrature::{gauss_product_rule, load_tdesign, required_degree};
use needlets_core::{PowerSpectrum, QuadratureLevel};

use crate::binary::Record;
use crate::error::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `bytes` to a temporary sibling of `path`, then renames it over
/// `path`, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path.file_name().ok_or_else(|| Error::Config(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = dir.join(tmp_name);
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// Parses an `ℓ A_ℓ` table.
pub fn load_spectrum_table(path: &Path) -> Result<PowerSpectrum> {
    let text = read_text(path)?;
    PowerSpectrum::parse_table(&text).map_err(|source| Error::Input {
        path: path.to_owned(),
        source,
    })
}

/// `dir/j{j}.txt` holds the design for level `j`.
pub fn tdesign_path(dir: &Path, level: u32) -> PathBuf {
    dir.join(format!("j{level}.txt"))
}

/// Rules for levels `0..=top_level`: the design in `dir/j{j}.txt` when the
/// file exists, the Gauss product rule otherwise. Designs must integrate
/// degree `2(2^j - 1)` exactly.
pub fn load_tdesign_dir(dir: &Path, top_level: u32) -> Result<Vec<QuadratureLevel>> {
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "t-design directory not found"),
        ));
    }
    (0..=top_level)
        .map(|j| {
            let path = tdesign_path(dir, j);
            if !path.exists() {
                return Ok(gauss_product_rule(j));
            }
            let text = read_text(&path)?;
            load_tdesign(&text, j, required_degree(j)).map_err(|source| Error::Input { path, source })
        })
        .collect()
}

pub fn read_record(path: &Path) -> Result<Record> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Record::decode(&bytes).map_err(|source| Error::Decode {
        path: path.to_owned(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("out.bin");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"second");
        let entries: Vec<_> = fs::read_dir(path.parent().unwrap()).unwrap().collect();
        assert_eq!(entries.len(), 1);
    }

    #[test]
    fn spectrum_table_errors_name_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spec.txt");
        fs::write(&path, "0 1\n2 0.5\n").unwrap();
        let err = load_spectrum_table(&path).unwrap_err();
        assert!(matches!(err, Error::Input { .. }));
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(matches!(load_spectrum_table(&dir.path().join("missing")), Err(Error::Io { .. })));
        fs::write(&path, "0 1\n1 0.5\n").unwrap();
        assert_eq!(load_spectrum_table(&path).unwrap().values(), &[1.0, 0.5]);
    }

    #[test]
    fn tdesign_dir_falls_back_to_gauss() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(tdesign_path(dir.path(), 0), "0 0 1\n").unwrap();
        let rules = load_tdesign_dir(dir.path(), 1).unwrap();
        assert_eq!(rules[0].len(), 1);
        assert_eq!(rules[0].source(), needlets_core::QuadratureSource::TDesign);
        assert_eq!(rules[1].source(), needlets_core::QuadratureSource::GaussProduct);
        fs::write(tdesign_path(dir.path(), 1), "1 0 0\n").unwrap();
        assert!(matches!(load_tdesign_dir(dir.path(), 1), Err(Error::Input { .. })));
        assert!(load_tdesign_dir(&dir.path().join("none"), 1).is_err());
    }
}
