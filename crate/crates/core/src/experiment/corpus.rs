use std::fs;
use std::path::{Path, PathBuf};

use log::warn;

use crate::error::{Error, Result};
use crate::image::{load_image, GrayImage};

#[derive(Debug, Clone, PartialEq)]
pub struct NamedImage {
    /// File name, e.g. `camera.pgm`.
    pub name: String,
    pub image: GrayImage,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedFile {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    /// Sorted by file name.
    pub images: Vec<NamedImage>,
    pub skipped: Vec<SkippedFile>,
}

const EXTENSIONS: [&str; 2] = ["pgm", "png"];

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| EXTENSIONS.iter().any(|x| e.eq_ignore_ascii_case(x)))
}

/// Loads every `.pgm`/`.png` file of `dir` in alphabetical order, optionally
/// center-cropped to `crop` x `crop`. Unreadable files are skipped with a
/// warning and listed in [`Corpus::skipped`]; other files are ignored.
pub fn ingest_corpus(dir: impl AsRef<Path>, crop: Option<usize>) -> Result<Corpus> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && has_image_extension(p))
        .collect();
    paths.sort();

    let mut images = Vec::new();
    let mut skipped = Vec::new();
    for path in paths {
        match load_image(&path) {
            Ok(img) => images.push(NamedImage {
                name: path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                image: match crop {
                    Some(size) => img.center_crop(size),
                    None => img,
                },
            }),
            Err(e) => {
                warn!("skipping {}: {e}", path.display());
                skipped.push(SkippedFile {
                    path,
                    reason: e.to_string(),
                });
            }
        }
    }
    if images.is_empty() {
        return Err(Error::EmptyCorpus(dir.to_path_buf()));
    }
    Ok(Corpus { images, skipped })
}
