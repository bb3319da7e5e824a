//! OCR ingestion: raw per-page line records become a normalized [`Document`]
//! with layout-grouped paragraphs.
//!
//! Input is one JSON record per page:
//! `{doc_id, page_no, width_px, height_px, lines:[{text, box:[x0,y0,x1,y1]}], tags?, masks?}`
//! with pixel rectangles. Output is the canonical document JSONL produced by
//! [`Document::to_canonical_line`], which has a fixed key order so golden files
//! stay byte-stable.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::word_count;

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("malformed record {index}: {reason}")]
    MalformedRecord { index: usize, reason: String },
    #[error("document {doc_id}: page {missing} is missing")]
    PageGap { doc_id: String, missing: u32 },
    #[error("document {doc_id}: page {page_no} appears more than once")]
    DuplicatePage { doc_id: String, page_no: u32 },
    #[error("document {doc_id} has no records")]
    Empty { doc_id: String },
    #[error("invalid canonical document: {0}")]
    InvalidDocument(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Normalized rectangle; all coordinates are fractions of page width/height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x_left: f64,
    pub y_top: f64,
    pub x_right: f64,
    pub y_bottom: f64,
}

impl BBox {
    pub fn new(x_left: f64, y_top: f64, x_right: f64, y_bottom: f64) -> Self {
        Self { x_left, y_top, x_right, y_bottom }
    }

    pub fn is_valid(&self) -> bool {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        in_unit(self.x_left)
            && in_unit(self.x_right)
            && in_unit(self.y_top)
            && in_unit(self.y_bottom)
            && self.x_left <= self.x_right
            && self.y_top <= self.y_bottom
    }

    pub fn width(&self) -> f64 {
        self.x_right - self.x_left
    }

    pub fn height(&self) -> f64 {
        self.y_bottom - self.y_top
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            x_left: self.x_left.min(other.x_left),
            y_top: self.y_top.min(other.y_top),
            x_right: self.x_right.max(other.x_right),
            y_bottom: self.y_bottom.max(other.y_bottom),
        }
    }

    pub fn contains(&self, other: &BBox) -> bool {
        self.x_left <= other.x_left
            && self.y_top <= other.y_top
            && self.x_right >= other.x_right
            && self.y_bottom >= other.y_bottom
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextLine {
    pub text: String,
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub line_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub page_no: u32,
    #[serde(rename = "box")]
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paragraph {
    pub text: String,
    pub location: Location,
    pub member_lines: Vec<usize>,
}

/// Precomputed entity region (e.g. from a layout segmentation model).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityMask {
    pub label: String,
    #[serde(rename = "box")]
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Page {
    pub page_no: u32,
    pub width_px: u32,
    pub height_px: u32,
    pub lines: Vec<TextLine>,
    pub paragraphs: Vec<Paragraph>,
    pub tags: Option<Vec<String>>,
    pub masks: Option<Vec<EntityMask>>,
}

impl Page {
    /// Page text: paragraphs in reading order separated by newlines.
    pub fn text(&self) -> String {
        self.paragraphs
            .iter()
            .map(|p| p.text.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn token_length(&self) -> usize {
        self.lines.iter().map(|l| word_count(&l.text)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub pages: Vec<Page>,
    pub cluster: Option<String>,
    pub word_count: usize,
}

impl Document {
    pub fn page(&self, page_no: u32) -> Option<&Page> {
        // pages are 1..=P without gaps
        let idx = usize::try_from(page_no).ok()?.checked_sub(1)?;
        self.pages.get(idx)
    }

    pub fn page_count(&self) -> usize {
        self.pages.len()
    }

    pub fn page_text(&self, page_no: u32) -> Option<String> {
        self.page(page_no).map(Page::text)
    }

    /// Token length per page, indexed by `page_no - 1`.
    pub fn page_lengths(&self) -> Vec<usize> {
        self.pages.iter().map(Page::token_length).collect()
    }

    pub fn to_canonical_line(&self) -> String {
        serde_json::to_string(self).expect("document serialization is infallible")
    }

    pub fn from_canonical_line(line: &str) -> Result<Self, IngestError> {
        let doc: Document = serde_json::from_str(line)
            .map_err(|e| IngestError::InvalidDocument(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }

    /// Check every structural invariant of the data model.
    pub fn validate(&self) -> Result<(), IngestError> {
        let bad = |msg: String| Err(IngestError::InvalidDocument(msg));
        for (i, page) in self.pages.iter().enumerate() {
            let expected = i as u32 + 1;
            if page.page_no != expected {
                return bad(format!("page at position {i} has number {}", page.page_no));
            }
            if page.width_px == 0 || page.height_px == 0 {
                return bad(format!("page {expected} has zero dimensions"));
            }
            let mut seen = vec![0usize; page.lines.len()];
            for (li, line) in page.lines.iter().enumerate() {
                if line.line_index != li || line.text.trim().is_empty() || !line.bbox.is_valid() {
                    return bad(format!("page {expected} line {li} is invalid"));
                }
            }
            for para in &page.paragraphs {
                if para.member_lines.is_empty() || para.location.page_no != expected {
                    return bad(format!("page {expected} has an invalid paragraph"));
                }
                for &m in &para.member_lines {
                    match seen.get_mut(m) {
                        Some(c) => *c += 1,
                        None => return bad(format!("page {expected} paragraph cites line {m}")),
                    }
                }
            }
            if seen.iter().any(|&c| c != 1) {
                return bad(format!("page {expected} paragraphs do not partition its lines"));
            }
        }
        let words: usize = self.pages.iter().map(Page::token_length).sum();
        if words != self.word_count {
            return bad(format!("word_count {} but pages hold {words}", self.word_count));
        }
        Ok(())
    }
}

/// Thresholds for the line-merging predicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeRules {
    /// Maximum vertical gap, in multiples of the page's median line height.
    pub gap_factor: f64,
    /// Minimum horizontal overlap, as a fraction of the narrower line's width.
    pub overlap_min: f64,
}

impl Default for MergeRules {
    fn default() -> Self {
        Self { gap_factor: 0.8, overlap_min: 0.3 }
    }
}

/// Vertical gap between `upper` and `lower` (negative when they overlap).
pub fn vertical_gap(upper: &BBox, lower: &BBox) -> f64 {
    lower.y_top - upper.y_bottom
}

/// Horizontal overlap as a fraction of the narrower box's width.
pub fn horizontal_overlap_ratio(a: &BBox, b: &BBox) -> f64 {
    let left = a.x_left.max(b.x_left);
    let right = a.x_right.min(b.x_right);
    let narrower = a.width().min(b.width());
    if narrower <= 0.0 {
        return if left <= right { 1.0 } else { 0.0 };
    }
    ((right - left).max(0.0) / narrower).min(1.0)
}

pub fn median_line_height(lines: &[TextLine]) -> f64 {
    if lines.is_empty() {
        return 0.0;
    }
    let mut h: Vec<f64> = lines.iter().map(|l| l.bbox.height()).collect();
    h.sort_by(f64::total_cmp);
    let mid = h.len() / 2;
    if h.len() % 2 == 1 {
        h[mid]
    } else {
        (h[mid - 1] + h[mid]) / 2.0
    }
}

/// Whether two lines adjacent in y-order belong to the same paragraph.
pub fn should_merge(upper: &BBox, lower: &BBox, median_height: f64, rules: &MergeRules) -> bool {
    vertical_gap(upper, lower) <= rules.gap_factor * median_height
        && horizontal_overlap_ratio(upper, lower) >= rules.overlap_min
}

/// Lines sorted top-to-bottom, then left-to-right.
pub fn y_order(lines: &[TextLine]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..lines.len()).collect();
    order.sort_by(|&a, &b| {
        let (la, lb) = (&lines[a].bbox, &lines[b].bbox);
        la.y_top
            .total_cmp(&lb.y_top)
            .then(la.x_left.total_cmp(&lb.x_left))
            .then(a.cmp(&b))
    });
    order
}

/// Group a page's lines into paragraphs.
///
/// Adjacent lines in y-order merge when both the gap and overlap tests pass;
/// paragraphs are the transitive closure of those merges, emitted in reading
/// order.
pub fn group_lines(lines: &[TextLine], page_no: u32, rules: &MergeRules) -> Vec<Paragraph> {
    if lines.is_empty() {
        return Vec::new();
    }
    let median = median_line_height(lines);
    let order = y_order(lines);

    let mut runs: Vec<Vec<usize>> = vec![vec![order[0]]];
    for pair in order.windows(2) {
        let (upper, lower) = (&lines[pair[0]].bbox, &lines[pair[1]].bbox);
        if should_merge(upper, lower, median, rules) {
            runs.last_mut().expect("runs is non-empty").push(pair[1]);
        } else {
            runs.push(vec![pair[1]]);
        }
    }

    let mut paragraphs: Vec<Paragraph> = runs
        .into_iter()
        .map(|members| {
            let bbox = members
                .iter()
                .skip(1)
                .fold(lines[members[0]].bbox, |acc, &m| acc.union(&lines[m].bbox));
            let text = members
                .iter()
                .map(|&m| lines[m].text.trim())
                .collect::<Vec<_>>()
                .join(" ");
            Paragraph {
                text,
                location: Location { page_no, bbox },
                member_lines: members.iter().map(|&m| lines[m].line_index).collect(),
            }
        })
        .collect();

    paragraphs.sort_by(|a, b| {
        let (ba, bb) = (&a.location.bbox, &b.location.bbox);
        ba.y_top
            .total_cmp(&bb.y_top)
            .then(ba.x_left.total_cmp(&bb.x_left))
            .then(a.member_lines[0].cmp(&b.member_lines[0]))
    });
    paragraphs
}

/// Normalize a pixel rectangle `[x0, y0, x1, y1]` by the page dimensions.
///
/// Coordinates outside the page are clamped and `clamp_warnings` is
/// incremented once for the rectangle.
pub fn normalize_bbox(rect: [f64; 4], width_px: u32, height_px: u32, clamp_warnings: &mut usize) -> BBox {
    let (w, h) = (f64::from(width_px), f64::from(height_px));
    let limits = [w, h, w, h];
    let mut clamped = false;
    let mut c = [0.0; 4];
    for i in 0..4 {
        let v = rect[i].clamp(0.0, limits[i]);
        if v != rect[i] {
            clamped = true;
        }
        c[i] = v / limits[i];
    }
    if clamped {
        *clamp_warnings += 1;
    }
    BBox::new(c[0].min(c[2]), c[1].min(c[3]), c[0].max(c[2]), c[1].max(c[3]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawLine {
    pub text: String,
    #[serde(rename = "box")]
    pub rect: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMask {
    pub label: String,
    #[serde(rename = "box")]
    pub rect: [f64; 4],
}

/// One OCR record: a single page of a document, in pixel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawPageRecord {
    pub doc_id: String,
    pub page_no: i64,
    pub width_px: i64,
    pub height_px: i64,
    pub lines: Vec<RawLine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tags: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masks: Option<Vec<RawMask>>,
}

/// Non-fatal observations made while parsing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub clamp_warnings: usize,
    pub blank_lines_dropped: usize,
}

/// Read raw OCR records, one JSON object per non-empty line. Errors name the
/// 0-based record index.
pub fn read_raw_records<R: BufRead>(reader: R) -> Result<Vec<RawPageRecord>, IngestError> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| IngestError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let index = out.len();
        let rec: RawPageRecord = serde_json::from_str(&line)
            .map_err(|e| IngestError::MalformedRecord { index, reason: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

fn validate_rect(rect: &[f64; 4]) -> Result<(), String> {
    if rect.iter().any(|v| !v.is_finite()) {
        return Err("non-finite box coordinate".into());
    }
    if rect[0] > rect[2] || rect[1] > rect[3] {
        return Err("box corners are inverted".into());
    }
    Ok(())
}

/// Build a [`Document`] from the records of one document. `index_offset` is
/// added to record positions in error messages (useful when the records are
/// a slice of a larger stream).
pub fn parse_document_at(
    records: &[RawPageRecord],
    doc_id: &str,
    rules: &MergeRules,
    index_offset: usize,
) -> Result<(Document, IngestStats), IngestError> {
    if records.is_empty() {
        return Err(IngestError::Empty { doc_id: doc_id.to_string() });
    }
    let mut stats = IngestStats::default();
    let mut by_page: BTreeMap<u32, Page> = BTreeMap::new();

    for (i, rec) in records.iter().enumerate() {
        let index = i + index_offset;
        let malformed = |reason: String| IngestError::MalformedRecord { index, reason };
        if rec.doc_id != doc_id {
            return Err(malformed(format!("doc_id {} does not match {doc_id}", rec.doc_id)));
        }
        if rec.page_no < 1 || rec.page_no > i64::from(u32::MAX) {
            return Err(malformed(format!("page_no {} is not a positive page number", rec.page_no)));
        }
        if rec.width_px <= 0 || rec.height_px <= 0 || rec.width_px > i64::from(u32::MAX) || rec.height_px > i64::from(u32::MAX) {
            return Err(malformed(format!(
                "page dimensions {}x{} must be positive",
                rec.width_px, rec.height_px
            )));
        }
        let page_no = rec.page_no as u32;
        let (w, h) = (rec.width_px as u32, rec.height_px as u32);
        if by_page.contains_key(&page_no) {
            return Err(IngestError::DuplicatePage { doc_id: doc_id.to_string(), page_no });
        }

        let mut lines = Vec::with_capacity(rec.lines.len());
        for raw in &rec.lines {
            validate_rect(&raw.rect).map_err(malformed)?;
            if raw.text.trim().is_empty() {
                stats.blank_lines_dropped += 1;
                continue;
            }
            let bbox = normalize_bbox(raw.rect, w, h, &mut stats.clamp_warnings);
            lines.push(TextLine { text: raw.text.clone(), bbox, line_index: lines.len() });
        }
        let masks = match &rec.masks {
            None => None,
            Some(ms) => {
                let mut out = Vec::with_capacity(ms.len());
                for m in ms {
                    validate_rect(&m.rect).map_err(malformed)?;
                    let bbox = normalize_bbox(m.rect, w, h, &mut stats.clamp_warnings);
                    out.push(EntityMask { label: m.label.clone(), bbox });
                }
                Some(out)
            }
        };
        let paragraphs = group_lines(&lines, page_no, rules);
        by_page.insert(
            page_no,
            Page { page_no, width_px: w, height_px: h, lines, paragraphs, tags: rec.tags.clone(), masks },
        );
    }

    for (expected, &page_no) in (1u32..).zip(by_page.keys()) {
        if page_no != expected {
            return Err(IngestError::PageGap { doc_id: doc_id.to_string(), missing: expected });
        }
    }
    let pages: Vec<Page> = by_page.into_values().collect();
    let word_count = pages.iter().map(Page::token_length).sum();
    Ok((Document { doc_id: doc_id.to_string(), pages, cluster: None, word_count }, stats))
}

pub fn parse_document(
    records: &[RawPageRecord],
    doc_id: &str,
    rules: &MergeRules,
) -> Result<(Document, IngestStats), IngestError> {
    parse_document_at(records, doc_id, rules, 0)
}

/// Group a record stream by `doc_id`, preserving first-appearance order.
/// Each group carries the stream index of its first record.
pub fn group_records(records: Vec<RawPageRecord>) -> Vec<(String, Vec<(usize, RawPageRecord)>)> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<(usize, RawPageRecord)>> = BTreeMap::new();
    for (i, rec) in records.into_iter().enumerate() {
        let entry = groups.entry(rec.doc_id.clone()).or_insert_with(|| {
            order.push(rec.doc_id.clone());
            Vec::new()
        });
        entry.push((i, rec));
    }
    order
        .into_iter()
        .map(|id| {
            let g = groups.remove(&id).unwrap_or_default();
            (id, g)
        })
        .collect()
}

/// Parse one group produced by [`group_records`], reporting errors against
/// the original stream indices.
pub fn parse_group(
    doc_id: &str,
    group: &[(usize, RawPageRecord)],
    rules: &MergeRules,
) -> Result<(Document, IngestStats), IngestError> {
    let records: Vec<RawPageRecord> = group.iter().map(|(_, r)| r.clone()).collect();
    parse_document(&records, doc_id, rules).map_err(|e| match e {
        IngestError::MalformedRecord { index, reason } => IngestError::MalformedRecord {
            index: group.get(index).map_or(index, |(i, _)| *i),
            reason,
        },
        other => other,
    })
}

/// Read canonical document JSONL.
pub fn read_documents<R: BufRead>(reader: R) -> Result<Vec<Document>, IngestError> {
    let mut docs = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| IngestError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        docs.push(Document::from_canonical_line(&line)?);
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(text: &str, idx: usize, b: [f64; 4]) -> TextLine {
        TextLine { text: text.into(), bbox: BBox::new(b[0], b[1], b[2], b[3]), line_index: idx }
    }

    fn record(page_no: i64, lines: &[(&str, [f64; 4])]) -> RawPageRecord {
        RawPageRecord {
            doc_id: "d".into(),
            page_no,
            width_px: 1000,
            height_px: 800,
            lines: lines.iter().map(|(t, r)| RawLine { text: t.to_string(), rect: *r }).collect(),
            tags: None,
            masks: None,
        }
    }

    #[test]
    fn normalize_examples() {
        let mut warn = 0;
        assert_eq!(normalize_bbox([0., 0., 1000., 800.], 1000, 800, &mut warn), BBox::new(0., 0., 1., 1.));
        assert_eq!(
            normalize_bbox([250., 200., 500., 400.], 1000, 800, &mut warn),
            BBox::new(0.25, 0.25, 0.5, 0.5)
        );
        assert_eq!(warn, 0);
        assert_eq!(normalize_bbox([-5., 0., 1005., 800.], 1000, 800, &mut warn), BBox::new(0., 0., 1., 1.));
        assert_eq!(warn, 1);
    }

    #[test]
    fn single_line_page() {
        let (doc, stats) =
            parse_document(&[record(1, &[("Hello", [100., 80., 300., 160.])])], "d", &MergeRules::default()).unwrap();
        assert_eq!(doc.pages.len(), 1);
        assert_eq!(doc.pages[0].paragraphs.len(), 1);
        assert_eq!(doc.pages[0].paragraphs[0].location.bbox, BBox::new(0.1, 0.1, 0.3, 0.2));
        assert_eq!(doc.word_count, 1);
        assert_eq!(stats, IngestStats::default());
    }

    #[test]
    fn empty_page_is_kept() {
        let (doc, _) = parse_document(&[record(1, &[])], "d", &MergeRules::default()).unwrap();
        assert_eq!(doc.pages.len(), 1);
        assert!(doc.pages[0].paragraphs.is_empty());
        assert_eq!(doc.word_count, 0);
    }

    #[test]
    fn rejects_bad_dimensions_with_index() {
        let mut bad = record(2, &[]);
        bad.width_px = 0;
        let err = parse_document(&[record(1, &[]), bad], "d", &MergeRules::default()).unwrap_err();
        assert!(matches!(err, IngestError::MalformedRecord { index: 1, .. }), "{err:?}");
    }

    #[test]
    fn rejects_page_gap() {
        let err = parse_document(&[record(1, &[]), record(3, &[])], "d", &MergeRules::default()).unwrap_err();
        assert_eq!(err, IngestError::PageGap { doc_id: "d".into(), missing: 2 });
        let err = parse_document(&[record(2, &[])], "d", &MergeRules::default()).unwrap_err();
        assert_eq!(err, IngestError::PageGap { doc_id: "d".into(), missing: 1 });
    }

    #[test]
    fn missing_field_names_record() {
        let input = "{\"doc_id\":\"d\",\"page_no\":1,\"width_px\":10,\"height_px\":10,\"lines\":[]}\n\
                     {\"doc_id\":\"d\",\"page_no\":2,\"width_px\":10,\"lines\":[]}\n";
        let err = read_raw_records(input.as_bytes()).unwrap_err();
        assert!(matches!(err, IngestError::MalformedRecord { index: 1, .. }), "{err:?}");
    }

    #[test]
    fn close_overlapping_lines_merge() {
        // heights 0.05, gap 0.01 = 0.2 x median, overlap 90%
        let lines = vec![
            line("first line", 0, [0.10, 0.10, 0.50, 0.15]),
            line("second line", 1, [0.14, 0.16, 0.54, 0.21]),
        ];
        let paras = group_lines(&lines, 1, &MergeRules::default());
        assert_eq!(paras.len(), 1);
        assert_eq!(paras[0].text, "first line second line");
        assert_eq!(paras[0].member_lines, vec![0, 1]);
        assert_eq!(paras[0].location.bbox, BBox::new(0.10, 0.10, 0.54, 0.21));
    }

    #[test]
    fn distant_lines_split() {
        let lines = vec![
            line("first", 0, [0.10, 0.10, 0.50, 0.15]),
            line("second", 1, [0.10, 0.30, 0.50, 0.35]),
        ];
        let paras = group_lines(&lines, 1, &MergeRules::default());
        assert_eq!(paras.len(), 2);
        assert_eq!(paras[0].text, "first");
    }

    #[test]
    fn side_by_side_columns_stay_apart() {
        let lines = vec![
            line("left", 0, [0.05, 0.10, 0.45, 0.15]),
            line("right", 1, [0.55, 0.10, 0.95, 0.15]),
        ];
        let paras = group_lines(&lines, 1, &MergeRules::default());
        assert_eq!(paras.len(), 2);
        assert_eq!(paras[0].text, "left");
        assert_eq!(paras[1].text, "right");
    }

    #[test]
    fn canonical_round_trip() {
        let (doc, _) = parse_document(
            &[
                record(1, &[("a b", [0., 0., 500., 40.]), ("c", [0., 42., 500., 80.])]),
                record(2, &[("d e f", [10., 10., 900., 60.])]),
            ],
            "d",
            &MergeRules::default(),
        )
        .unwrap();
        let line = doc.to_canonical_line();
        let back = Document::from_canonical_line(&line).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_canonical_line(), line);
        assert!(line.starts_with("{\"doc_id\":\"d\",\"pages\":[{\"page_no\":1,"));
    }

    #[test]
    fn canonical_rejects_broken_partition() {
        let (mut doc, _) =
            parse_document(&[record(1, &[("a", [0., 0., 10., 10.])])], "d", &MergeRules::default()).unwrap();
        doc.pages[0].paragraphs.clear();
        assert!(Document::from_canonical_line(&doc.to_canonical_line()).is_err());
    }
}
