use edgewatch_core::dash::{parse_mpd, serialize_mpd, Manifest, MpdError};
use url::Url;

fn fixture(name: &str) -> Vec<u8> {
    std::fs::read(format!("{}/../../fixtures/mpd/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn ladder() -> Manifest {
    parse_mpd(&fixture("seconds_that_count.mpd")).unwrap()
}

#[test]
fn ladder_shape() {
    let m = ladder();
    let kbps = m.ladder_kbps();
    assert_eq!(kbps.len(), 15);
    assert_eq!((kbps[0], kbps[14]), (145, 27_500));
    assert!(kbps.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(m.segment_duration_s(), 4.0);
    assert_eq!(m.media_duration_s(), 322.0);
    assert_eq!(m.segment_count(), 81);
    assert_eq!(m.segment_span_s(81), (320.0, 322.0));
    let top = m.representation("rep15").unwrap();
    assert_eq!((top.width, top.height), (7680, 4320));
}

#[test]
fn serialize_round_trip() {
    let m = ladder();
    let again = parse_mpd(&serialize_mpd(&m)).unwrap();
    assert_eq!(again.ladder_kbps(), m.ladder_kbps());
    assert_eq!(again.media_duration_s(), m.media_duration_s());
    assert_eq!(again.base_url(), m.base_url());
    assert_eq!(again.segment_url("rep3", 7).unwrap(), m.segment_url("rep3", 7).unwrap());
}

#[test]
fn rewrite_keeps_everything_but_the_origin() {
    let m = ladder();
    let r = m.rewrite_base_url(&Url::parse("http://mec.local:8080/").unwrap()).unwrap();
    assert_eq!(r.base_url().as_str(), "http://mec.local:8080/v/");
    assert_eq!(r.ladder_kbps(), m.ladder_kbps());
    assert_eq!(r.segment_url("rep1", 1).unwrap().as_str(), "http://mec.local:8080/v/rep1/seg_1.m4s");
    assert_eq!(r.segment_path("rep1", 1).unwrap(), m.segment_path("rep1", 1).unwrap());
}

#[test]
fn single_segment_and_missing_base_url() {
    let one = parse_mpd(&fixture("single_segment.mpd")).unwrap();
    assert_eq!(one.segment_count(), 1);
    assert_eq!(one.ladder_kbps(), vec![1000]);
    assert_eq!(parse_mpd(&fixture("missing_base_url.mpd")).unwrap_err(), MpdError::Missing("BaseURL"));
}
