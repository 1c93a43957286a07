//! Constant-bitrate origin server for tests and replays.
//!
//! Serves one manifest whose `BaseURL` points back at the server, and
//! segment bodies of exactly `bitrate × span / 8` bytes. Bodies are a
//! 32-byte header naming the representation and index followed by a fixed
//! pseudo-random block repeated, streamed in 64 KiB chunks. Individual
//! paths can be made to fail with a chosen status.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use axum::body::Body;
use axum::extract::State;
use axum::http::{header, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Router;
use bytes::Bytes;
use edgewatch_core::dash::{serialize_mpd, Manifest};
use rand::{RngCore, SeedableRng};
use url::Url;

use crate::server::{self, ServerHandle};

pub const CHUNK: usize = 64 * 1024;
const HEADER_LEN: usize = 32;
const INIT_BYTES: u64 = 1024;

fn block() -> &'static [u8] {
    static BLOCK: OnceLock<Vec<u8>> = OnceLock::new();
    BLOCK.get_or_init(|| {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        let mut b = vec![0u8; CHUNK];
        rng.fill_bytes(&mut b);
        b
    })
}

/// Size in bytes of segment `index` of a representation at `bitrate_kbps`.
pub fn segment_bytes(manifest: &Manifest, bitrate_kbps: u32, index: u64) -> u64 {
    let (a, b) = manifest.segment_span_s(index);
    (f64::from(bitrate_kbps) * 1000.0 * (b - a) / 8.0).round() as u64
}

fn header(tag: &str) -> [u8; HEADER_LEN] {
    let mut h = [b' '; HEADER_LEN];
    let n = tag.len().min(HEADER_LEN);
    h[..n].copy_from_slice(&tag.as_bytes()[..n]);
    h
}

/// Bytes `[offset, offset + len)` of the body tagged `tag` of total size `size`.
fn slice(tag: &[u8; HEADER_LEN], offset: usize, len: usize) -> Vec<u8> {
    let block = block();
    let end = offset + len;
    let mut out = Vec::with_capacity(len);
    let mut i = offset;
    if i < HEADER_LEN {
        let h = end.min(HEADER_LEN);
        out.extend_from_slice(&tag[i..h]);
        i = h;
    }
    while i < end {
        let k = (i - HEADER_LEN) % block.len();
        let n = (block.len() - k).min(end - i);
        out.extend_from_slice(&block[k..k + n]);
        i += n;
    }
    out
}

/// Full body of a payload, for comparisons in tests.
pub fn payload(tag: &str, size: u64) -> Vec<u8> {
    slice(&header(tag), 0, size as usize)
}

fn body_stream(tag: String, size: u64) -> Body {
    let tag = header(&tag);
    let size = size as usize;
    let chunks = (0..size).step_by(CHUNK).map(move |off| {
        let len = CHUNK.min(size - off);
        Ok::<_, std::convert::Infallible>(Bytes::from(slice(&tag, off, len)))
    });
    Body::from_stream(futures::stream::iter(chunks))
}

/// Handle for changing the origin's behavior while it runs.
#[derive(Debug, Clone, Default)]
pub struct Faults(Arc<Mutex<HashMap<String, StatusCode>>>);

impl Faults {
    /// Answer requests for `path` with `status` and a short body.
    pub fn fail(&self, path: &str, status: StatusCode) {
        self.0.lock().unwrap().insert(path.to_string(), status);
    }

    pub fn clear(&self, path: &str) {
        self.0.lock().unwrap().remove(path);
    }

    fn get(&self, path: &str) -> Option<StatusCode> {
        self.0.lock().unwrap().get(path).copied()
    }
}

#[derive(Debug)]
struct OriginState {
    manifest: Manifest,
    mpd_path: String,
    mpd_body: Vec<u8>,
    faults: Faults,
}

#[derive(Debug)]
pub struct Origin {
    pub server: ServerHandle,
    pub faults: Faults,
    /// The manifest as served, with `BaseURL` pointing at this server.
    pub manifest: Manifest,
    pub mpd_url: Url,
}

impl Origin {
    /// Serve `manifest` on `listener` at `<BaseURL path>manifest.mpd`.
    pub fn spawn(listener: tokio::net::TcpListener, manifest: &Manifest) -> std::io::Result<Origin> {
        let addr = listener.local_addr()?;
        let own = Url::parse(&format!("http://{addr}/")).expect("socket address forms a URL");
        let manifest = manifest
            .rewrite_base_url(&own)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
        let mpd_url = manifest.base_url().join("manifest.mpd").expect("relative path joins");
        let faults = Faults::default();
        let state = Arc::new(OriginState {
            mpd_body: serialize_mpd(&manifest),
            mpd_path: mpd_url.path().to_string(),
            manifest: manifest.clone(),
            faults: faults.clone(),
        });
        let app = Router::new().fallback(serve).with_state(state);
        let server = server::spawn(listener, app)?;
        Ok(Origin { server, faults, manifest, mpd_url })
    }

    pub async fn bind(manifest: &Manifest) -> std::io::Result<Origin> {
        let listener = server::bind(([127, 0, 0, 1], 0).into()).await?;
        Self::spawn(listener, manifest)
    }

    /// Path of segment `index` of `rep_id` on this server.
    pub fn segment_path(&self, rep_id: &str, index: u64) -> Option<String> {
        self.manifest.segment_url(rep_id, index).ok().map(|u| u.path().to_string())
    }
}

async fn serve(State(st): State<Arc<OriginState>>, uri: Uri) -> Response {
    let path = uri.path();
    if let Some(status) = st.faults.get(path) {
        return (status, "injected fault\n").into_response();
    }
    if path == st.mpd_path {
        return ([(header::CONTENT_TYPE, "application/dash+xml")], st.mpd_body.clone()).into_response();
    }
    let base = st.manifest.base_url().path();
    let Some(rel) = path.strip_prefix(base) else {
        return StatusCode::NOT_FOUND.into_response();
    };
    let (tag, size) = if let Some((rep, index)) = st.manifest.resolve_segment_path(rel) {
        (format!("{}:{}", rep.id, index), segment_bytes(&st.manifest, rep.bitrate_kbps, index))
    } else if let Some(rep) = st.manifest.representations().iter().find(|r| init_path(&st.manifest, &r.id).as_deref() == Some(rel)) {
        (format!("{}:init", rep.id), INIT_BYTES)
    } else {
        return StatusCode::NOT_FOUND.into_response();
    };
    (
        [(header::CONTENT_TYPE, "video/mp4".to_string()), (header::CONTENT_LENGTH, size.to_string())],
        body_stream(tag, size),
    )
        .into_response()
}

fn init_path(m: &Manifest, rep_id: &str) -> Option<String> {
    m.initialization().map(|t| t.replace("$RepresentationID$", rep_id))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payload_has_exact_size_and_header() {
        let p = payload("rep1:3", 200_000);
        assert_eq!(p.len(), 200_000);
        assert!(p.starts_with(b"rep1:3 "));
        assert_eq!(p[HEADER_LEN..HEADER_LEN + 16], block()[..16]);
        assert_eq!(p[HEADER_LEN + CHUNK], block()[0]);
    }

    #[test]
    fn tiny_payloads_are_header_prefixes() {
        assert_eq!(payload("abc", 2), b"ab");
        assert!(payload("x", 0).is_empty());
    }
}
