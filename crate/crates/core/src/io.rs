//! MOTChallenge-style sequence directories: `seqinfo.ini`, det/gt/result
//! text files and frame images.
//!
//! Frame numbers are 1-based in every file and converted to [`FrameIndex`]
//! here, nowhere else.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{BitDepth, BoundingBox, Detection, FrameIndex, GrayImage, TrackId};
use crate::metrics::{GroundTruth, GroundTruthBox};
use crate::tracker::TrackRecord;

pub const MANIFEST_FILE: &str = "seqinfo.ini";
pub const DEFAULT_FRAME_RATE: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modality {
    Thermal,
    RgbGray,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Thermal => "thermal",
            Modality::RgbGray => "rgb-gray",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceManifest {
    pub name: String,
    /// Directory holding the manifest.
    pub root: PathBuf,
    /// Image directory relative to `root`.
    pub image_dir: String,
    pub image_ext: String,
    pub frame_rate: f64,
    pub frame_count: u32,
    pub width: u32,
    pub height: u32,
    pub bit_depth: BitDepth,
    pub modality: Modality,
    /// Defaults that were filled in while loading.
    pub warnings: Vec<String>,
}

impl SequenceManifest {
    /// `<root>/<imDir>/<frame:06><imExt>`.
    pub fn image_path(&self, frame: FrameIndex) -> PathBuf {
        self.root
            .join(&self.image_dir)
            .join(format!("{:06}{}", frame.one_based(), self.image_ext))
    }

    pub fn det_path(&self) -> PathBuf {
        self.root.join("det").join("det.txt")
    }

    pub fn gt_path(&self) -> PathBuf {
        self.root.join("gt").join("gt.txt")
    }

    pub fn frames(&self) -> impl Iterator<Item = FrameIndex> {
        (0..self.frame_count).map(FrameIndex)
    }

    pub fn to_ini(&self) -> String {
        format!(
            "[Sequence]\nname={}\nimDir={}\nframeRate={}\nseqLength={}\nimWidth={}\nimHeight={}\nimExt={}\nbitDepth={}\nmodality={}\n",
            self.name,
            self.image_dir,
            self.frame_rate,
            self.frame_count,
            self.width,
            self.height,
            self.image_ext,
            self.bit_depth.bits(),
            self.modality.as_str()
        )
    }
}

/// Reads `<dir>/seqinfo.ini`. Section headers and `;`/`#` comments are
/// tolerated; keys are matched case-insensitively.
pub fn load_manifest(dir: &Path) -> Result<SequenceManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;

    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with(';') || line.starts_with('#') || line.starts_with('[') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(&path, n + 1, format!("expected key=value, got '{line}'")))?;
        entries.insert(key.trim().to_ascii_lowercase(), (n + 1, value.trim().to_string()));
    }

    let get = |key: &str| entries.get(&key.to_ascii_lowercase());
    let number = |key: &str| -> Result<Option<f64>> {
        match get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| Error::parse(&path, *line, format!("key '{key}': '{v}' is not a number"))),
        }
    };
    let count = |key: &str| -> Result<Option<u32>> {
        match get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<u32>()
                .map(Some)
                .map_err(|_| Error::parse(&path, *line, format!("key '{key}': '{v}' is not a non-negative integer"))),
        }
    };
    let required = |key: &str, v: Option<u32>| {
        v.ok_or_else(|| Error::parse(&path, 0, format!("missing required key '{key}'")))
    };

    let mut warnings = Vec::new();
    let frame_count = required("seqLength", count("seqLength")?)?;
    if frame_count == 0 {
        let line = get("seqLength").map_or(0, |e| e.0);
        return Err(Error::parse(&path, line, "key 'seqLength': must be at least 1"));
    }
    let width = required("imWidth", count("imWidth")?)?;
    let height = required("imHeight", count("imHeight")?)?;
    let frame_rate = match number("frameRate")? {
        Some(r) if r > 0.0 => r,
        Some(r) => {
            let line = get("frameRate").map_or(0, |e| e.0);
            return Err(Error::parse(&path, line, format!("key 'frameRate': {r} is not positive")));
        }
        None => {
            warnings.push(format!("frameRate missing, using {DEFAULT_FRAME_RATE}"));
            DEFAULT_FRAME_RATE
        }
    };
    let bit_depth = match count("bitDepth")? {
        None => BitDepth::Eight,
        Some(bits) => BitDepth::from_bits(bits).map_err(|_| {
            Error::parse(&path, get("bitDepth").map_or(0, |e| e.0), format!("key 'bitDepth': {bits} is not 8 or 16"))
        })?,
    };
    let modality = match get("modality").map(|(l, v)| (*l, v.to_ascii_lowercase())) {
        None => Modality::Thermal,
        Some((_, v)) if v == "thermal" => Modality::Thermal,
        Some((_, v)) if v == "rgb-gray" || v == "rgb" => Modality::RgbGray,
        Some((line, v)) => {
            return Err(Error::parse(&path, line, format!("key 'modality': unknown value '{v}'")));
        }
    };
    let name = match get("name") {
        Some((_, v)) => v.clone(),
        None => dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "sequence".into()),
    };
    let image_dir = get("imDir").map_or_else(|| "img1".to_string(), |e| e.1.clone());
    let image_ext = get("imExt").map_or_else(|| ".png".to_string(), |e| e.1.clone());

    Ok(SequenceManifest {
        name,
        root: dir.to_path_buf(),
        image_dir,
        image_ext,
        frame_rate,
        frame_count,
        width,
        height,
        bit_depth,
        modality,
        warnings,
    })
}

/// Detections grouped by frame, plus how many scores had to be clamped into `[0, 1]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectionSet {
    pub frames: BTreeMap<FrameIndex, Vec<Detection>>,
    pub clamped_scores: usize,
}

impl DetectionSet {
    pub fn get(&self, frame: FrameIndex) -> &[Detection] {
        self.frames.get(&frame).map_or(&[], Vec::as_slice)
    }
}

struct Row<'a> {
    path: &'a Path,
    line: usize,
    fields: Vec<&'a str>,
}

impl Row<'_> {
    fn float(&self, idx: usize, what: &str) -> Result<f64> {
        let raw = self.fields[idx];
        raw.parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| Error::parse(self.path, self.line, format!("{what}: '{raw}' is not a number")))
    }

    fn optional_float(&self, idx: usize, what: &str) -> Result<Option<f64>> {
        if idx < self.fields.len() {
            self.float(idx, what).map(Some)
        } else {
            Ok(None)
        }
    }

    fn integer(&self, idx: usize, what: &str) -> Result<i64> {
        let v = self.float(idx, what)?;
        if v.fract() != 0.0 || v.abs() > 9.0e15 {
            return Err(Error::parse(self.path, self.line, format!("{what}: '{}' is not an integer", self.fields[idx])));
        }
        Ok(v as i64)
    }

    fn frame(&self) -> Result<FrameIndex> {
        let n = self.integer(0, "frame")?;
        FrameIndex::from_one_based(n)
            .ok_or_else(|| Error::parse(self.path, self.line, format!("frame {n} must be at least 1")))
    }

    fn bbox(&self) -> Result<BoundingBox> {
        BoundingBox::new(
            self.float(2, "left")?,
            self.float(3, "top")?,
            self.float(4, "width")?,
            self.float(5, "height")?,
        )
        .map_err(|e| Error::parse(self.path, self.line, e.to_string()))
    }
}

fn rows<'a>(path: &'a Path, text: &'a str, min_fields: usize) -> impl Iterator<Item = Result<Row<'a>>> + 'a {
    text.lines().enumerate().filter_map(move |(n, raw)| {
        let line = raw.trim();
        if line.is_empty() {
            return None;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < min_fields {
            return Some(Err(Error::parse(
                path,
                n + 1,
                format!("expected at least {min_fields} comma-separated fields, got {}", fields.len()),
            )));
        }
        Some(Ok(Row {
            path,
            line: n + 1,
            fields,
        }))
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses `frame,id,left,top,width,height,score[,class,...]`. The id column
/// is ignored; a non-negative integer in column 8 is taken as the class id.
pub fn read_detections(path: &Path) -> Result<DetectionSet> {
    parse_detections(path, &read_text(path)?)
}

pub fn parse_detections(path: &Path, text: &str) -> Result<DetectionSet> {
    let mut set = DetectionSet::default();
    for row in rows(path, text, 7) {
        let row = row?;
        let frame = row.frame()?;
        let bbox = row.bbox()?;
        let raw_score = row.float(6, "score")?;
        let score = raw_score.clamp(0.0, 1.0);
        if score != raw_score {
            set.clamped_scores += 1;
        }
        let class_id = match row.optional_float(7, "class")? {
            Some(c) if c >= 0.0 && c.fract() == 0.0 && c <= f64::from(i32::MAX) => c as i32,
            _ => -1,
        };
        set.frames.entry(frame).or_default().push(Detection {
            bbox,
            score,
            class_id,
        });
    }
    if set.clamped_scores > 0 {
        log::warn!("{}: clamped {} detection scores into [0, 1]", path.display(), set.clamped_scores);
    }
    Ok(set)
}

pub fn format_detections(set: &DetectionSet) -> String {
    let mut out = String::new();
    for (frame, dets) in &set.frames {
        for d in dets {
            let [l, t, w, h] = d.bbox.tlwh();
            let _ = writeln!(out, "{},-1,{l},{t},{w},{h},{},{},-1,-1", frame.one_based(), d.score, d.class_id);
        }
    }
    out
}

pub fn write_detections(path: &Path, set: &DetectionSet) -> Result<()> {
    write_text(path, &format_detections(set))
}

/// Parses `frame,id,left,top,width,height[,conf,class,visibility]`. Rows with
/// `conf = 0` are kept but flagged as ignored.
pub fn read_ground_truth(path: &Path) -> Result<GroundTruth> {
    parse_ground_truth(path, &read_text(path)?)
}

pub fn parse_ground_truth(path: &Path, text: &str) -> Result<GroundTruth> {
    let mut gt = GroundTruth::new();
    for row in rows(path, text, 6) {
        let row = row?;
        let frame = row.frame()?;
        let id = row.integer(1, "id")?;
        let bbox = row.bbox()?;
        let conf = row.optional_float(6, "conf")?.unwrap_or(1.0);
        let class_id = match row.optional_float(7, "class")? {
            Some(_) => row.integer(7, "class")? as i32,
            None => 1,
        };
        let visibility = row.optional_float(8, "visibility")?.unwrap_or(1.0);
        gt.insert(
            id,
            class_id,
            frame,
            GroundTruthBox {
                bbox,
                visibility,
                ignore: conf == 0.0,
            },
        )
        .map_err(|e| Error::parse(path, row.line, e.to_string()))?;
    }
    Ok(gt)
}

pub fn format_ground_truth(gt: &GroundTruth) -> String {
    let mut lines: Vec<(FrameIndex, i64, String)> = Vec::new();
    for track in gt.tracks.values() {
        for (frame, b) in &track.boxes {
            let [l, t, w, h] = b.bbox.tlwh();
            let conf = if b.ignore { 0 } else { 1 };
            lines.push((
                *frame,
                track.id,
                format!(
                    "{},{},{l},{t},{w},{h},{conf},{},{}",
                    frame.one_based(),
                    track.id,
                    track.class_id,
                    b.visibility
                ),
            ));
        }
    }
    lines.sort_by_key(|l| (l.0, l.1));
    lines.into_iter().map(|l| l.2 + "\n").collect()
}

pub fn write_ground_truth(path: &Path, gt: &GroundTruth) -> Result<()> {
    write_text(path, &format_ground_truth(gt))
}

/// `frame,id,left,top,width,height,score,-1,-1,-1`, ascending by frame then id.
pub fn format_results(records: &[TrackRecord]) -> String {
    let mut sorted: Vec<&TrackRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.frame, r.id));
    let mut out = String::new();
    for r in sorted {
        let [l, t, w, h] = r.bbox.tlwh();
        let _ = writeln!(out, "{},{},{l},{t},{w},{h},{},-1,-1,-1", r.frame.one_based(), r.id, r.score);
    }
    out
}

pub fn write_results(path: &Path, records: &[TrackRecord]) -> Result<()> {
    write_text(path, &format_results(records))
}

pub fn read_results(path: &Path) -> Result<Vec<TrackRecord>> {
    parse_results(path, &read_text(path)?)
}

pub fn parse_results(path: &Path, text: &str) -> Result<Vec<TrackRecord>> {
    let mut out = Vec::new();
    for row in rows(path, text, 7) {
        let row = row?;
        let id = row.integer(1, "id")?;
        if id < 0 {
            return Err(Error::parse(path, row.line, format!("track id {id} is negative")));
        }
        out.push(TrackRecord {
            frame: row.frame()?,
            id: TrackId(id as u64),
            bbox: row.bbox()?,
            score: row.float(6, "score")?,
        });
    }
    out.sort_by_key(|r| (r.frame, r.id));
    Ok(out)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Loads an 8/16-bit grayscale PNG or PGM. Color images are reduced to luma
/// at their native depth. The result must have the `expected` depth.
pub fn load_image(path: &Path, expected: BitDepth) -> Result<GrayImage> {
    let img_err = |message: String| Error::Image {
        path: path.to_path_buf(),
        message,
    };
    let dynamic = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| img_err(e.to_string()))?;

    use image::DynamicImage as D;
    let (width, height) = (dynamic.width(), dynamic.height());
    let (depth, data): (BitDepth, Vec<u16>) = match dynamic {
        D::ImageLuma8(buf) => (BitDepth::Eight, buf.into_raw().into_iter().map(u16::from).collect()),
        D::ImageLuma16(buf) => (BitDepth::Sixteen, buf.into_raw()),
        other @ (D::ImageLumaA8(_) | D::ImageRgb8(_) | D::ImageRgba8(_)) => (
            BitDepth::Eight,
            other.to_luma8().into_raw().into_iter().map(u16::from).collect(),
        ),
        other @ (D::ImageLumaA16(_) | D::ImageRgb16(_) | D::ImageRgba16(_)) => (BitDepth::Sixteen, other.to_luma16().into_raw()),
        other => return Err(img_err(format!("unsupported pixel format {:?}", other.color()))),
    };
    if depth != expected {
        return Err(img_err(format!(
            "image is {}-bit, expected {}-bit",
            depth.bits(),
            expected.bits()
        )));
    }
    GrayImage::new(width, height, depth, data).map_err(|e| img_err(e.to_string()))
}

/// Writes a lossless grayscale PNG at the image's own bit depth.
pub fn save_png(path: &Path, img: &GrayImage) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let img_err = |e: image::ImageError| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    match img.depth() {
        BitDepth::Eight => {
            let raw: Vec<u8> = img.data().iter().map(|&v| v as u8).collect();
            image::GrayImage::from_raw(img.width(), img.height(), raw)
                .expect("buffer matches dimensions")
                .save_with_format(path, image::ImageFormat::Png)
                .map_err(img_err)
        }
        BitDepth::Sixteen => image::ImageBuffer::<image::Luma<u16>, _>::from_raw(img.width(), img.height(), img.data().to_vec())
            .expect("buffer matches dimensions")
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(img_err),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("mem.txt")
    }

    #[test]
    fn detection_line_parses() {
        let set = parse_detections(p(), "1,-1,10,20,30,40,0.9\n").unwrap();
        let dets = set.get(FrameIndex::from_one_based(1).unwrap());
        assert_eq!(dets.len(), 1);
        assert_eq!(dets[0].bbox.tlwh(), [10.0, 20.0, 30.0, 40.0]);
        assert_eq!(dets[0].score, 0.9);
        assert!(parse_detections(p(), "").unwrap().frames.is_empty());
    }

    #[test]
    fn detection_scores_are_clamped() {
        let set = parse_detections(p(), "1,-1,0,0,5,5,1.4\n2,-1,0,0,5,5,-0.2\n3,-1,0,0,5,5,0.5\n").unwrap();
        assert_eq!(set.clamped_scores, 2);
        assert_eq!(set.get(FrameIndex(0))[0].score, 1.0);
        assert_eq!(set.get(FrameIndex(1))[0].score, 0.0);
    }

    #[test]
    fn non_numeric_field_reports_line() {
        let err = parse_detections(p(), "1,-1,0,0,5,5,0.5\n2,-1,x,0,5,5,0.5\n").unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("left"));
            }
            other => panic!("unexpected {other:?}"),
        }
        // Locale-style decimal comma shifts the columns and fails to parse.
        assert!(parse_detections(p(), "1,-1,0,0,5,5,0,5\n").is_ok());
        assert!(parse_detections(p(), "1,-1,1.000,5,5,5,0.5e\n").is_err());
    }

    #[test]
    fn ground_truth_grouping_and_ignore() {
        let gt = parse_ground_truth(p(), "1,3,0,0,5,5,1,1,1\n2,3,1,0,5,5,1,1,0.5\n2,4,9,9,5,5,0,1,1\n").unwrap();
        assert_eq!(gt.tracks.len(), 2);
        assert_eq!(gt.tracks[&3].boxes.len(), 2);
        assert!(gt.tracks[&4].boxes[&FrameIndex(1)].ignore);
        assert_eq!(gt.count(), 2);
        let err = parse_ground_truth(p(), "1,3,0,0,5,5,1,1,1\n1,3,0,0,6,6,1,1,1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn results_are_sorted_and_stable() {
        let b = BoundingBox::new(1.5, 2.0, 3.25, 4.0).unwrap();
        let rec = |f, id| TrackRecord {
            frame: FrameIndex(f),
            id: TrackId(id),
            bbox: b,
            score: 0.75,
        };
        let text = format_results(&[rec(1, 2), rec(0, 5), rec(1, 1)]);
        assert_eq!(
            text,
            "1,5,1.5,2,3.25,4,0.75,-1,-1,-1\n2,1,1.5,2,3.25,4,0.75,-1,-1,-1\n2,2,1.5,2,3.25,4,0.75,-1,-1,-1\n"
        );
        assert_eq!(format_results(&[]), "");
        let back = parse_results(p(), &text).unwrap();
        assert_eq!(back, vec![rec(0, 5), rec(1, 1), rec(1, 2)]);
    }
}
