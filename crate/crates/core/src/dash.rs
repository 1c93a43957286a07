//! DASH Media Presentation Description model.
//!
//! Supports the subset needed to interpose an edge proxy: static
//! presentations with one period, one video adaptation set and a
//! number-addressed `SegmentTemplate`. Anything else in the document is
//! skipped and its element name kept in [`Manifest::ignored`] for
//! diagnostics.

use std::fmt::Write as _;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use thiserror::Error;
use url::Url;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MpdError {
    #[error("malformed XML at byte {offset}: {message}")]
    Xml { offset: u64, message: String },
    #[error("{0} absent")]
    Missing(&'static str),
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("unsupported MPD feature: {0}")]
    Unsupported(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SegmentError {
    #[error("unknown representation {0:?}")]
    UnknownRepresentation(String),
    #[error("segment index {index} outside 1..={count}")]
    IndexOutOfRange { index: u64, count: u64 },
}

/// One encoded quality level of the video.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Representation {
    pub id: String,
    pub bitrate_kbps: u32,
    pub width: u32,
    pub height: u32,
    pub framerate: f64,
    pub codec: String,
}

impl Representation {
    pub fn pixels(&self) -> u64 {
        u64::from(self.width) * u64::from(self.height)
    }
}

/// Fields from which a [`Manifest`] is validated and built.
#[derive(Debug, Clone)]
pub struct ManifestParts {
    pub media_duration_s: f64,
    pub timescale: u64,
    pub segment_duration_ticks: u64,
    pub start_number: u64,
    pub base_url: Url,
    pub segment_template: String,
    pub initialization: Option<String>,
    pub mime_type: String,
    pub representations: Vec<Representation>,
}

/// A validated single-period, number-addressed presentation.
///
/// Representations are kept strictly ascending by bitrate.
#[derive(Debug, Clone)]
pub struct Manifest {
    media_duration_s: f64,
    timescale: u64,
    segment_duration_ticks: u64,
    start_number: u64,
    base_url: Url,
    segment_template: String,
    initialization: Option<String>,
    mime_type: String,
    representations: Vec<Representation>,
    ignored: Vec<String>,
}

// `ignored` is diagnostics only and never serialized.
impl PartialEq for Manifest {
    fn eq(&self, other: &Self) -> bool {
        self.media_duration_s == other.media_duration_s
            && self.timescale == other.timescale
            && self.segment_duration_ticks == other.segment_duration_ticks
            && self.start_number == other.start_number
            && self.base_url == other.base_url
            && self.segment_template == other.segment_template
            && self.initialization == other.initialization
            && self.mime_type == other.mime_type
            && self.representations == other.representations
    }
}

impl Manifest {
    pub fn new(parts: ManifestParts) -> Result<Self, MpdError> {
        let ManifestParts {
            media_duration_s,
            timescale,
            segment_duration_ticks,
            start_number,
            base_url,
            segment_template,
            initialization,
            mime_type,
            mut representations,
        } = parts;

        if !(media_duration_s.is_finite() && media_duration_s > 0.0) {
            return Err(invalid("mediaPresentationDuration", "must be positive"));
        }
        if timescale == 0 {
            return Err(invalid("timescale", "must be positive"));
        }
        if segment_duration_ticks == 0 {
            return Err(invalid("SegmentTemplate@duration", "must be positive"));
        }
        if base_url.cannot_be_a_base() || !base_url.has_host() {
            return Err(invalid("BaseURL", "must be absolute"));
        }
        if !segment_template.contains("$Number") {
            return Err(MpdError::Unsupported(
                "SegmentTemplate without $Number$ addressing".into(),
            ));
        }
        if representations.is_empty() {
            return Err(MpdError::Missing("Representation"));
        }
        for r in &representations {
            if r.id.is_empty() {
                return Err(invalid("Representation@id", "empty"));
            }
            if r.bitrate_kbps == 0 {
                return Err(invalid("Representation@bandwidth", format!("{} is not positive", r.id)));
            }
            if r.width == 0 || r.height == 0 {
                return Err(invalid("Representation@width/height", format!("{} has zero size", r.id)));
            }
            if !(r.framerate.is_finite() && r.framerate > 0.0) {
                return Err(invalid("Representation@frameRate", format!("{} is not positive", r.id)));
            }
        }
        representations.sort_by_key(|r| r.bitrate_kbps);
        for pair in representations.windows(2) {
            if pair[0].bitrate_kbps == pair[1].bitrate_kbps {
                return Err(invalid(
                    "Representation@bandwidth",
                    format!("{} and {} share a bitrate", pair[0].id, pair[1].id),
                ));
            }
        }
        let mut ids: Vec<&str> = representations.iter().map(|r| r.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid("Representation@id", format!("duplicate id {:?}", w[0])));
        }

        Ok(Self {
            media_duration_s,
            timescale,
            segment_duration_ticks,
            start_number,
            base_url,
            segment_template,
            initialization,
            mime_type,
            representations,
            ignored: Vec::new(),
        })
    }

    pub fn media_duration_s(&self) -> f64 {
        self.media_duration_s
    }

    pub fn segment_duration_s(&self) -> f64 {
        self.segment_duration_ticks as f64 / self.timescale as f64
    }

    pub fn segment_count(&self) -> u64 {
        let n = (self.media_duration_s * self.timescale as f64 / self.segment_duration_ticks as f64
            - 1e-9)
            .ceil();
        (n as u64).max(1)
    }

    /// Media time covered by the 1-based segment `index` (the last one may be short).
    pub fn segment_span_s(&self, index: u64) -> (f64, f64) {
        let d = self.segment_duration_s();
        let start = (index.saturating_sub(1)) as f64 * d;
        (start, (start + d).min(self.media_duration_s))
    }

    pub fn base_url(&self) -> &Url {
        &self.base_url
    }

    pub fn segment_template(&self) -> &str {
        &self.segment_template
    }

    pub fn initialization(&self) -> Option<&str> {
        self.initialization.as_deref()
    }

    pub fn start_number(&self) -> u64 {
        self.start_number
    }

    pub fn representations(&self) -> &[Representation] {
        &self.representations
    }

    pub fn representation(&self, id: &str) -> Option<&Representation> {
        self.representations.iter().find(|r| r.id == id)
    }

    /// Bitrate ladder in kbps, ascending.
    pub fn ladder_kbps(&self) -> Vec<u32> {
        self.representations.iter().map(|r| r.bitrate_kbps).collect()
    }

    /// Element and attribute names skipped while parsing.
    pub fn ignored(&self) -> &[String] {
        &self.ignored
    }

    /// Copy of this manifest whose `BaseURL` points at `proxy_origin`.
    ///
    /// Only the scheme, host and port of `proxy_origin` are used; the path,
    /// query and fragment of the original `BaseURL` are kept, which makes the
    /// rewrite idempotent.
    pub fn rewrite_base_url(&self, proxy_origin: &Url) -> Result<Manifest, MpdError> {
        if proxy_origin.cannot_be_a_base() || !proxy_origin.has_host() {
            return Err(invalid("proxy origin", "must be absolute"));
        }
        let mut base = self.base_url.clone();
        let ok = base.set_scheme(proxy_origin.scheme()).is_ok()
            && base.set_host(proxy_origin.host_str()).is_ok()
            && base.set_port(proxy_origin.port()).is_ok();
        if !ok {
            // set_scheme refuses special <-> non-special switches; rebuild from parts.
            let mut rebuilt = proxy_origin.clone();
            rebuilt.set_path(self.base_url.path());
            rebuilt.set_query(self.base_url.query());
            rebuilt.set_fragment(self.base_url.fragment());
            base = rebuilt;
        }
        let mut out = self.clone();
        out.base_url = base;
        Ok(out)
    }

    /// Relative media path for `(rep_id, index)` with template placeholders expanded.
    pub fn segment_path(&self, rep_id: &str, index: u64) -> Result<String, SegmentError> {
        let rep = self
            .representation(rep_id)
            .ok_or_else(|| SegmentError::UnknownRepresentation(rep_id.to_string()))?;
        let count = self.segment_count();
        if index == 0 || index > count {
            return Err(SegmentError::IndexOutOfRange { index, count });
        }
        let number = self.start_number + index - 1;
        Ok(expand_template(&self.segment_template, &rep.id, rep.bitrate_kbps, number))
    }

    /// Absolute URL of the 1-based segment `index` of `rep_id`.
    pub fn segment_url(&self, rep_id: &str, index: u64) -> Result<Url, SegmentError> {
        let path = self.segment_path(rep_id, index)?;
        // Template output is a relative reference resolved against BaseURL.
        Ok(self
            .base_url
            .join(&path)
            .expect("expanded template is a valid relative reference"))
    }

    /// Inverse of [`Manifest::segment_path`]: recover `(rep_id, index)` from a
    /// path relative to the `BaseURL` directory.
    pub fn resolve_segment_path(&self, relative: &str) -> Option<(&Representation, u64)> {
        self.representations.iter().find_map(|rep| {
            let number = match_template(&self.segment_template, &rep.id, rep.bitrate_kbps, relative)?;
            if number < self.start_number {
                return None;
            }
            let index = number - self.start_number + 1;
            (index <= self.segment_count()).then_some((rep, index))
        })
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> MpdError {
    MpdError::Invalid { field, reason: reason.into() }
}

enum Token<'a> {
    Lit(&'a str),
    RepId,
    Bandwidth,
    Number(usize),
}

fn tokenize(template: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(start) = rest.find('$') {
        let Some(len) = rest[start + 1..].find('$') else { break };
        let ident = &rest[start + 1..start + 1 + len];
        let tok = match ident {
            "" => Some(Token::Lit("$")),
            "RepresentationID" => Some(Token::RepId),
            "Bandwidth" => Some(Token::Bandwidth),
            "Number" => Some(Token::Number(0)),
            other => other
                .strip_prefix("Number%0")
                .and_then(|w| w.strip_suffix('d'))
                .and_then(|w| w.parse().ok())
                .map(Token::Number),
        };
        match tok {
            Some(t) => {
                if start > 0 {
                    out.push(Token::Lit(&rest[..start]));
                }
                out.push(t);
            }
            None => out.push(Token::Lit(&rest[..start + len + 2])),
        }
        rest = &rest[start + len + 2..];
    }
    if !rest.is_empty() {
        out.push(Token::Lit(rest));
    }
    out
}

fn expand_template(template: &str, rep_id: &str, bitrate_kbps: u32, number: u64) -> String {
    let mut s = String::with_capacity(template.len() + 16);
    for tok in tokenize(template) {
        match tok {
            Token::Lit(l) => s.push_str(l),
            Token::RepId => s.push_str(rep_id),
            Token::Bandwidth => {
                let _ = write!(s, "{}", u64::from(bitrate_kbps) * 1000);
            }
            Token::Number(w) => {
                let _ = write!(s, "{number:0w$}");
            }
        }
    }
    s
}

fn match_template(template: &str, rep_id: &str, bitrate_kbps: u32, path: &str) -> Option<u64> {
    let mut rest = path;
    let mut number = None;
    let tokens = tokenize(template);
    for (i, tok) in tokens.iter().enumerate() {
        match tok {
            Token::Lit(l) => rest = rest.strip_prefix(l)?,
            Token::RepId => rest = rest.strip_prefix(rep_id)?,
            Token::Bandwidth => rest = rest.strip_prefix(&(u64::from(bitrate_kbps) * 1000).to_string())?,
            Token::Number(_) => {
                let digits = rest.bytes().take_while(u8::is_ascii_digit).count();
                if digits == 0 {
                    return None;
                }
                // A literal made of digits right after the number is not supported.
                if matches!(tokens.get(i + 1), Some(Token::Number(_))) {
                    return None;
                }
                number = Some(rest[..digits].parse().ok()?);
                rest = &rest[digits..];
            }
        }
    }
    if rest.is_empty() {
        number
    } else {
        None
    }
}

/// Parse an `xs:duration` such as `PT5M22S` or `P1DT0.5S` into seconds.
pub fn parse_xs_duration(s: &str) -> Option<f64> {
    let s = s.trim();
    let (neg, s) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let s = s.strip_prefix('P')?;
    let (date, time) = match s.split_once('T') {
        Some((d, t)) => (d, Some(t)),
        None => (s, None),
    };
    let mut total = 0.0;
    let mut seen = false;
    let mut eat = |part: &str, units: &[(char, f64)]| -> Option<()> {
        let mut num = String::new();
        let mut idx = 0;
        for c in part.chars() {
            if c.is_ascii_digit() || c == '.' {
                num.push(c);
            } else {
                let pos = units.iter().skip(idx).position(|(u, _)| *u == c)?;
                idx += pos;
                let v: f64 = num.parse().ok()?;
                total += v * units[idx].1;
                idx += 1;
                num.clear();
                seen = true;
            }
        }
        num.is_empty().then_some(())
    };
    eat(date, &[('Y', 365.0 * 86400.0), ('M', 30.0 * 86400.0), ('W', 7.0 * 86400.0), ('D', 86400.0)])?;
    if let Some(t) = time {
        if t.is_empty() {
            return None;
        }
        eat(t, &[('H', 3600.0), ('M', 60.0), ('S', 1.0)])?;
    }
    if !seen {
        return None;
    }
    Some(if neg { -total } else { total })
}

fn format_xs_duration(seconds: f64) -> String {
    format!("PT{seconds}S")
}

#[derive(Default, Clone)]
struct Inherited {
    width: Option<u32>,
    height: Option<u32>,
    framerate: Option<f64>,
    codecs: Option<String>,
    mime: Option<String>,
}

#[derive(Default)]
struct TemplateAttrs {
    media: Option<String>,
    init: Option<String>,
    timescale: Option<u64>,
    duration: Option<u64>,
    start_number: Option<u64>,
}

impl TemplateAttrs {
    fn overlay(&mut self, other: TemplateAttrs) {
        if other.media.is_some() {
            self.media = other.media;
        }
        if other.init.is_some() {
            self.init = other.init;
        }
        if other.timescale.is_some() {
            self.timescale = other.timescale;
        }
        if other.duration.is_some() {
            self.duration = other.duration;
        }
        if other.start_number.is_some() {
            self.start_number = other.start_number;
        }
    }
}

fn attrs(e: &BytesStart<'_>, offset: u64) -> Result<Vec<(String, String)>, MpdError> {
    e.attributes()
        .map(|a| {
            let a = a.map_err(|err| MpdError::Xml { offset, message: err.to_string() })?;
            let key = String::from_utf8_lossy(a.key.local_name().as_ref()).into_owned();
            let value = a
                .unescape_value()
                .map_err(|err| MpdError::Xml { offset, message: err.to_string() })?
                .into_owned();
            Ok((key, value))
        })
        .collect()
}

fn parse_num<T: std::str::FromStr>(field: &'static str, v: &str) -> Result<T, MpdError> {
    v.trim().parse().map_err(|_| invalid(field, format!("{v:?} is not a number")))
}

fn parse_frame_rate(v: &str) -> Result<f64, MpdError> {
    let fr = match v.split_once('/') {
        Some((n, d)) => parse_num::<f64>("frameRate", n)? / parse_num::<f64>("frameRate", d)?,
        None => parse_num::<f64>("frameRate", v)?,
    };
    if fr.is_finite() && fr > 0.0 {
        Ok(fr)
    } else {
        Err(invalid("frameRate", format!("{v:?} is not positive")))
    }
}

fn apply_inherited(inh: &mut Inherited, list: &[(String, String)]) -> Result<(), MpdError> {
    for (k, v) in list {
        match k.as_str() {
            "width" => inh.width = Some(parse_num("width", v)?),
            "height" => inh.height = Some(parse_num("height", v)?),
            "frameRate" => inh.framerate = Some(parse_frame_rate(v)?),
            "codecs" => inh.codecs = Some(v.clone()),
            "mimeType" => inh.mime = Some(v.clone()),
            _ => {}
        }
    }
    Ok(())
}

fn template_attrs(list: &[(String, String)]) -> Result<TemplateAttrs, MpdError> {
    let mut t = TemplateAttrs::default();
    for (k, v) in list {
        match k.as_str() {
            "media" => t.media = Some(v.clone()),
            "initialization" => t.init = Some(v.clone()),
            "timescale" => t.timescale = Some(parse_num("timescale", v)?),
            "duration" => t.duration = Some(parse_num("SegmentTemplate@duration", v)?),
            "startNumber" => t.start_number = Some(parse_num("startNumber", v)?),
            _ => {}
        }
    }
    Ok(t)
}

/// Parse an MPD document.
pub fn parse_mpd(xml: &[u8]) -> Result<Manifest, MpdError> {
    let mut reader = Reader::from_reader(xml);
    reader.trim_text(true);
    let mut buf = Vec::new();

    // Element names from the root down to the current element.
    let mut path: Vec<String> = Vec::new();
    let mut ignored: Vec<String> = Vec::new();
    let mut saw_mpd = false;
    let mut media_duration = None;
    let mut base_urls: Vec<(usize, String)> = Vec::new();
    let mut periods = 0usize;
    let mut chosen_set: Option<usize> = None;
    let mut sets_seen = 0usize;
    let mut in_chosen = false;
    let mut set_inh = Inherited::default();
    let mut template = TemplateAttrs::default();
    let mut rep_templates: Vec<TemplateAttrs> = Vec::new();
    let mut reps: Vec<(Vec<(String, String)>, Inherited)> = Vec::new();
    let mut text_target: Option<usize> = None;

    loop {
        let offset = reader.buffer_position() as u64;
        let event = reader.read_event_into(&mut buf).map_err(|e| MpdError::Xml {
            offset: reader.buffer_position() as u64,
            message: e.to_string(),
        })?;
        let (start, empty) = match &event {
            Event::Start(e) => (Some(e.clone().into_owned()), false),
            Event::Empty(e) => (Some(e.clone().into_owned()), true),
            _ => (None, false),
        };
        if let Some(e) = start {
            let name = String::from_utf8_lossy(e.local_name().as_ref()).into_owned();
            let list = attrs(&e, offset)?;
            let depth = path.len();
            match (depth, name.as_str()) {
                (0, "MPD") => {
                    saw_mpd = true;
                    for (k, v) in &list {
                        match k.as_str() {
                            "type" if v != "static" => {
                                return Err(MpdError::Unsupported(format!("MPD@type={v}")))
                            }
                            "mediaPresentationDuration" => {
                                media_duration = Some(parse_xs_duration(v).ok_or_else(|| {
                                    invalid("mediaPresentationDuration", format!("{v:?}"))
                                })?)
                            }
                            _ => {}
                        }
                    }
                }
                (0, other) => {
                    return Err(MpdError::Xml {
                        offset,
                        message: format!("root element is <{other}>, expected <MPD>"),
                    })
                }
                (1, "Period") => {
                    periods += 1;
                    if periods > 1 {
                        return Err(MpdError::Unsupported("multiple periods".into()));
                    }
                }
                (_, "BaseURL") if path.last().is_some_and(|p| p != "Representation") => {
                    let in_scope = depth <= 2 || (depth == 3 && in_chosen_set(&path, in_chosen));
                    if in_scope && !empty {
                        base_urls.push((depth, String::new()));
                        text_target = Some(base_urls.len() - 1);
                    } else if !in_scope {
                        ignored.push(name.clone());
                    }
                }
                (2, "AdaptationSet") => {
                    sets_seen += 1;
                    let mut inh = Inherited::default();
                    apply_inherited(&mut inh, &list)?;
                    let content = list
                        .iter()
                        .find(|(k, _)| k == "contentType")
                        .map(|(_, v)| v.as_str())
                        .or(inh.mime.as_deref())
                        .unwrap_or("video");
                    if chosen_set.is_none() && content.starts_with("video") {
                        chosen_set = Some(sets_seen);
                        in_chosen = true;
                        set_inh = inh;
                    } else {
                        ignored.push("AdaptationSet".into());
                    }
                }
                (_, "SegmentTemplate") if depth == 2 || (depth == 3 && in_chosen) => {
                    template.overlay(template_attrs(&list)?);
                }
                (4, "SegmentTemplate") if in_chosen => {
                    rep_templates.push(template_attrs(&list)?);
                }
                (3, "Representation") if in_chosen => {
                    let mut inh = set_inh.clone();
                    apply_inherited(&mut inh, &list)?;
                    reps.push((list, inh));
                }
                (_, "SegmentBase" | "SegmentList" | "SegmentTimeline") if in_chosen => {
                    return Err(MpdError::Unsupported(format!("{name} addressing")));
                }
                _ => {
                    if in_chosen || depth <= 2 {
                        ignored.push(name.clone());
                    }
                }
            }
            if !empty {
                path.push(name);
            }
            buf.clear();
            continue;
        }
        match event {
            Event::Text(t) => {
                let text = t.unescape().map_err(|e| MpdError::Xml {
                    offset: reader.buffer_position() as u64,
                    message: e.to_string(),
                })?;
                if path.is_empty() && !text.trim().is_empty() {
                    return Err(MpdError::Xml { offset, message: "text outside the root element".into() });
                }
                if let Some(i) = text_target {
                    base_urls[i].1.push_str(text.trim());
                }
            }
            Event::CData(t) => {
                if let Some(i) = text_target {
                    base_urls[i].1.push_str(String::from_utf8_lossy(&t).trim());
                }
            }
            Event::End(_) => {
                let name = path.pop();
                if name.as_deref() == Some("BaseURL") {
                    text_target = None;
                }
                if name.as_deref() == Some("AdaptationSet") && path.len() == 2 {
                    in_chosen = false;
                }
            }
            Event::Eof => {
                if !path.is_empty() {
                    return Err(MpdError::Xml {
                        offset: reader.buffer_position() as u64,
                        message: format!("unexpected end of document inside <{}>", path.last().unwrap()),
                    });
                }
                break;
            }
            _ => {}
        }
        buf.clear();
    }

    if !saw_mpd {
        return Err(MpdError::Missing("MPD"));
    }
    let media_duration_s = media_duration.ok_or(MpdError::Missing("mediaPresentationDuration"))?;

    let mut base: Option<Url> = None;
    base_urls.sort_by_key(|(depth, _)| *depth);
    for (_, text) in base_urls.iter().filter(|(_, t)| !t.is_empty()) {
        base = Some(match base {
            None => Url::parse(text).map_err(|e| invalid("BaseURL", format!("{text:?}: {e}")))?,
            Some(parent) => parent.join(text).map_err(|e| invalid("BaseURL", format!("{text:?}: {e}")))?,
        });
    }
    let base_url = base.ok_or(MpdError::Missing("BaseURL"))?;

    if chosen_set.is_none() {
        return Err(MpdError::Missing("AdaptationSet"));
    }
    if let Some(first) = rep_templates.first() {
        let same = rep_templates.iter().all(|t| t.media == first.media && t.duration == first.duration);
        if !same {
            return Err(MpdError::Unsupported("per-representation SegmentTemplate".into()));
        }
        template.overlay(TemplateAttrs {
            media: first.media.clone(),
            init: first.init.clone(),
            timescale: first.timescale,
            duration: first.duration,
            start_number: first.start_number,
        });
    }
    let segment_template = template.media.ok_or(MpdError::Missing("SegmentTemplate@media"))?;
    let segment_duration_ticks = template.duration.ok_or(MpdError::Missing("SegmentTemplate@duration"))?;

    let mut representations = Vec::with_capacity(reps.len());
    for (list, inh) in reps {
        let id = list
            .iter()
            .find(|(k, _)| k == "id")
            .map(|(_, v)| v.clone())
            .ok_or(MpdError::Missing("Representation@id"))?;
        let bandwidth: u64 = list
            .iter()
            .find(|(k, _)| k == "bandwidth")
            .map(|(_, v)| parse_num("Representation@bandwidth", v))
            .transpose()?
            .ok_or(MpdError::Missing("Representation@bandwidth"))?;
        representations.push(Representation {
            id,
            bitrate_kbps: u32::try_from((bandwidth as f64 / 1000.0).round() as u64)
                .map_err(|_| invalid("Representation@bandwidth", "too large"))?,
            width: inh.width.ok_or(MpdError::Missing("Representation@width"))?,
            height: inh.height.ok_or(MpdError::Missing("Representation@height"))?,
            framerate: inh.framerate.ok_or(MpdError::Missing("Representation@frameRate"))?,
            codec: inh.codecs.unwrap_or_default(),
        });
    }

    let mut manifest = Manifest::new(ManifestParts {
        media_duration_s,
        timescale: template.timescale.unwrap_or(1),
        segment_duration_ticks,
        start_number: template.start_number.unwrap_or(1),
        base_url,
        segment_template,
        initialization: template.init,
        mime_type: set_inh.mime.unwrap_or_else(|| "video/mp4".into()),
        representations,
    })?;
    manifest.ignored = ignored;
    Ok(manifest)
}

fn in_chosen_set(path: &[String], in_chosen: bool) -> bool {
    in_chosen && path.get(2).is_some_and(|p| p == "AdaptationSet")
}

fn esc(s: &str) -> std::borrow::Cow<'_, str> {
    quick_xml::escape::escape(s)
}

/// Canonical serialization; `parse_mpd(&serialize_mpd(m)) == m`.
pub fn serialize_mpd(m: &Manifest) -> Vec<u8> {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<MPD xmlns=\"urn:mpeg:dash:schema:mpd:2011\" type=\"static\" \
         profiles=\"urn:mpeg:dash:profile:isoff-live:2011\" \
         mediaPresentationDuration=\"{}\" minBufferTime=\"{}\">",
        format_xs_duration(m.media_duration_s),
        format_xs_duration(m.segment_duration_s()),
    );
    let _ = writeln!(s, "  <BaseURL>{}</BaseURL>", esc(m.base_url.as_str()));
    s.push_str("  <Period id=\"0\" start=\"PT0S\">\n");
    let _ = writeln!(
        s,
        "    <AdaptationSet id=\"0\" mimeType=\"{}\" segmentAlignment=\"true\" startWithSAP=\"1\">",
        esc(&m.mime_type)
    );
    let _ = write!(
        s,
        "      <SegmentTemplate timescale=\"{}\" duration=\"{}\" startNumber=\"{}\" media=\"{}\"",
        m.timescale,
        m.segment_duration_ticks,
        m.start_number,
        esc(&m.segment_template)
    );
    if let Some(init) = &m.initialization {
        let _ = write!(s, " initialization=\"{}\"", esc(init));
    }
    s.push_str("/>\n");
    for r in &m.representations {
        let _ = writeln!(
            s,
            "      <Representation id=\"{}\" bandwidth=\"{}\" width=\"{}\" height=\"{}\" frameRate=\"{}\" codecs=\"{}\"/>",
            esc(&r.id),
            u64::from(r.bitrate_kbps) * 1000,
            r.width,
            r.height,
            r.framerate,
            esc(&r.codec)
        );
    }
    s.push_str("    </AdaptationSet>\n  </Period>\n</MPD>\n");
    s.into_bytes()
}
