//! Dataset loaders: IDX (MNIST) files, PNG class directories, and PGM images.

use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{HpsError, Result};
use crate::raster::GrayImage;

/// A labeled image.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub image: GrayImage,
    pub label: String,
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path).map_err(|e| HpsError::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..])
            .read_to_end(&mut out)
            .map_err(|e| HpsError::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn format_err(path: &Path, offset: u64, message: impl Into<String>) -> HpsError {
    HpsError::Format {
        path: path.to_owned(),
        offset,
        message: message.into(),
    }
}

fn be_u32(buf: &[u8], at: usize, path: &Path) -> Result<u32> {
    buf.get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| format_err(path, at as u64, "truncated header"))
}

/// Reads an IDX image file and its label file. Gzip-compressed files are
/// accepted transparently.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Vec<Sample>> {
    let img = read_all(images_path)?;
    let lab = read_all(labels_path)?;
    if be_u32(&img, 0, images_path)? != 0x0000_0803 {
        return Err(format_err(images_path, 0, "bad image magic, expected 0x00000803"));
    }
    if be_u32(&lab, 0, labels_path)? != 0x0000_0801 {
        return Err(format_err(labels_path, 0, "bad label magic, expected 0x00000801"));
    }
    let n = be_u32(&img, 4, images_path)? as usize;
    let rows = be_u32(&img, 8, images_path)? as usize;
    let cols = be_u32(&img, 12, images_path)? as usize;
    let n_labels = be_u32(&lab, 4, labels_path)? as usize;
    if n != n_labels {
        return Err(format_err(
            labels_path,
            4,
            format!("label count {n_labels} differs from image count {n}"),
        ));
    }
    if rows == 0 || cols == 0 {
        return Err(format_err(images_path, 8, "zero image dimension"));
    }
    let px = rows * cols;
    let need = 16 + n * px;
    if img.len() < need {
        return Err(format_err(
            images_path,
            img.len() as u64,
            format!("truncated pixel data, expected {need} bytes"),
        ));
    }
    if lab.len() < 8 + n {
        return Err(format_err(labels_path, lab.len() as u64, "truncated label data"));
    }
    (0..n)
        .map(|i| {
            let start = 16 + i * px;
            Ok(Sample {
                image: GrayImage::new(cols, rows, img[start..start + px].to_vec())?,
                label: lab[8 + i].to_string(),
            })
        })
        .collect()
}

/// Writes samples as an uncompressed IDX pair (labels must be 0-255 integers).
pub fn write_idx(samples: &[Sample], images_path: &Path, labels_path: &Path) -> Result<()> {
    let (w, h) = samples
        .first()
        .map(|s| (s.image.width(), s.image.height()))
        .unwrap_or((0, 0));
    let mut img = Vec::new();
    img.extend_from_slice(&0x0000_0803u32.to_be_bytes());
    img.extend_from_slice(&(samples.len() as u32).to_be_bytes());
    img.extend_from_slice(&(h as u32).to_be_bytes());
    img.extend_from_slice(&(w as u32).to_be_bytes());
    let mut lab = Vec::new();
    lab.extend_from_slice(&0x0000_0801u32.to_be_bytes());
    lab.extend_from_slice(&(samples.len() as u32).to_be_bytes());
    for s in samples {
        if s.image.width() != w || s.image.height() != h {
            return Err(HpsError::invalid("IDX images must share one size"));
        }
        img.extend_from_slice(s.image.samples());
        let l: u8 = s
            .label
            .parse()
            .map_err(|_| HpsError::invalid(format!("label {} is not a byte", s.label)))?;
        lab.push(l);
    }
    std::fs::write(images_path, img).map_err(|e| HpsError::io(images_path, e))?;
    std::fs::write(labels_path, lab).map_err(|e| HpsError::io(labels_path, e))
}

/// Reads an 8-bit grayscale image from PNG or binary PGM (P5).
pub fn read_image(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path).map_err(|e| HpsError::io(path, e))?;
    if bytes.starts_with(b"P5") {
        return parse_pgm(&bytes, path);
    }
    let decoded = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png)
        .map_err(|e| format_err(path, 0, e.to_string()))?
        .to_luma8();
    let (w, h) = decoded.dimensions();
    GrayImage::new(w as usize, h as usize, decoded.into_raw())
}

fn parse_pgm(bytes: &[u8], path: &Path) -> Result<GrayImage> {
    let mut pos = 2;
    let mut fields = Vec::new();
    while fields.len() < 3 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(format_err(path, pos as u64, "malformed PGM header"));
        }
        let v: usize = std::str::from_utf8(&bytes[start..pos])
            .unwrap()
            .parse()
            .map_err(|_| format_err(path, start as u64, "PGM header value out of range"))?;
        fields.push(v);
    }
    pos += 1;
    let (w, h, maxval) = (fields[0], fields[1], fields[2]);
    if maxval == 0 || maxval > 255 {
        return Err(format_err(path, pos as u64, "only 8-bit PGM is supported"));
    }
    let data = bytes
        .get(pos..pos + w * h)
        .ok_or_else(|| format_err(path, bytes.len() as u64, "truncated PGM data"))?;
    GrayImage::new(w, h, data.to_vec())
}

pub fn write_pgm(img: &GrayImage, path: &Path) -> Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.samples());
    std::fs::write(path, out).map_err(|e| HpsError::io(path, e))
}

/// Loads `root/<label>/*.png` in lexicographic order. Unreadable files are
/// skipped with a warning; a class directory without images is an error.
pub fn load_png_dir(root: &Path) -> Result<Vec<Sample>> {
    let mut classes: Vec<PathBuf> = std::fs::read_dir(root)
        .map_err(|e| HpsError::io(root, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    classes.sort();
    if classes.is_empty() {
        return Err(HpsError::Data(format!("no class directories under {}", root.display())));
    }
    let mut out = Vec::new();
    for dir in classes {
        let label = dir.file_name().unwrap().to_string_lossy().into_owned();
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|e| HpsError::io(&dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension()
                    .is_some_and(|x| x.eq_ignore_ascii_case("png") || x.eq_ignore_ascii_case("pgm"))
            })
            .collect();
        files.sort();
        let before = out.len();
        for f in files {
            match read_image(&f) {
                Ok(image) => out.push(Sample {
                    image,
                    label: label.clone(),
                }),
                Err(e) => log::warn!("skipping {}: {e}", f.display()),
            }
        }
        if out.len() == before {
            return Err(HpsError::Data(format!("class {label} has no readable images")));
        }
    }
    Ok(out)
}

/// Seeded stratified subset: up to `per_class` items of each label, keeping
/// original order within the result. Labels are visited in sorted order.
pub fn stratified_indices(labels: &[String], per_class: usize, seed: u64) -> Vec<usize> {
    let mut by_label: std::collections::BTreeMap<&str, Vec<usize>> = Default::default();
    for (i, l) in labels.iter().enumerate() {
        by_label.entry(l.as_str()).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::new();
    for (_, mut idx) in by_label {
        idx.shuffle(&mut rng);
        idx.truncate(per_class);
        chosen.extend(idx);
    }
    chosen.sort_unstable();
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idx_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let samples = vec![
            Sample {
                image: GrayImage::new(3, 2, vec![0, 1, 2, 3, 4, 255]).unwrap(),
                label: "7".into(),
            },
            Sample {
                image: GrayImage::new(3, 2, vec![9; 6]).unwrap(),
                label: "1".into(),
            },
        ];
        let (ip, lp) = (dir.path().join("i"), dir.path().join("l"));
        write_idx(&samples, &ip, &lp).unwrap();
        assert_eq!(load_idx(&ip, &lp).unwrap(), samples);

        let mut bytes = std::fs::read(&ip).unwrap();
        bytes.truncate(20);
        std::fs::write(&ip, &bytes).unwrap();
        assert!(matches!(load_idx(&ip, &lp), Err(HpsError::Format { .. })));
        bytes[3] = 0x01;
        std::fs::write(&ip, &bytes).unwrap();
        assert!(matches!(load_idx(&ip, &lp), Err(HpsError::Format { offset: 0, .. })));
    }

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::new(4, 3, (0..12).map(|v| v * 20).collect()).unwrap();
        let p = dir.path().join("x.pgm");
        write_pgm(&img, &p).unwrap();
        assert_eq!(read_image(&p).unwrap(), img);
    }

    #[test]
    fn png_dir_layout() {
        let dir = tempfile::tempdir().unwrap();
        for class in ["a", "b"] {
            std::fs::create_dir(dir.path().join(class)).unwrap();
            for i in 0..3 {
                let img = image::GrayImage::from_pixel(5, 5, image::Luma([i * 10]));
                img.save(dir.path().join(class).join(format!("{i}.png"))).unwrap();
            }
        }
        let items = load_png_dir(dir.path()).unwrap();
        assert_eq!(items.len(), 6);
        assert_eq!(items[3].label, "b");
        let empty = tempfile::tempdir().unwrap();
        assert!(load_png_dir(empty.path()).is_err());
    }

    #[test]
    fn stratified_sampling_is_seeded() {
        let labels: Vec<String> = (0..100).map(|i| (i % 4).to_string()).collect();
        let a = stratified_indices(&labels, 5, 7);
        assert_eq!(a.len(), 20);
        assert_eq!(a, stratified_indices(&labels, 5, 7));
        assert_ne!(a, stratified_indices(&labels, 5, 8));
    }
}
