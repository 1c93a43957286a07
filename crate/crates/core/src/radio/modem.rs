//! Modem RF status lines.
//!
//! Grammar (one response per line, optional leading run timestamp):
//!
//! ```text
//! [<t_s> ]#RFSTS: "<PLMN>",<ARFCN>,<RSRP dBm>,<RSRQ dB>,<SINR dB>[,<anything>...]
//! ```
//!
//! Fields are positional: index 2 is RSRP, 3 is RSRQ, 4 is SINR.

use crate::error::{check_range, FieldError};

use super::{RSRP_RANGE_DBM, RSRQ_RANGE_DB, SINR_RANGE_DB};

pub const RFSTS_PREFIX: &str = "#RFSTS:";

const RSRP_FIELD: usize = 2;
const RSRQ_FIELD: usize = 3;
const SINR_FIELD: usize = 4;

/// The L1 part of a radio sample, before time and position are attached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfReading {
    pub rsrp_dbm: f64,
    pub rsrq_db: f64,
    pub sinr_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LineParse {
    Reading { t: Option<f64>, rf: RfReading },
    /// Not a status line (`OK`, echoes, other URCs).
    Skip,
}

pub fn parse_modem_status_line(line: &str) -> Result<LineParse, FieldError> {
    let line = line.trim();
    let (t, body) = match line.find(RFSTS_PREFIX) {
        Some(0) => (None, line),
        Some(pos) => match line[..pos].trim().parse::<f64>() {
            Ok(t) if t.is_finite() => (Some(t), &line[pos..]),
            _ => return Ok(LineParse::Skip),
        },
        None => return Ok(LineParse::Skip),
    };
    let fields: Vec<&str> = body[RFSTS_PREFIX.len()..].split(',').map(str::trim).collect();
    let field = |idx: usize, name: &'static str| -> Result<Option<f64>, FieldError> {
        match fields.get(idx) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<f64>()
                .map(Some)
                .map_err(|_| FieldError::new(name, format!("{raw:?} is not a number"))),
        }
    };
    let (Some(rsrp), Some(rsrq), Some(sinr)) =
        (field(RSRP_FIELD, "rsrp")?, field(RSRQ_FIELD, "rsrq")?, field(SINR_FIELD, "sinr")?)
    else {
        return Ok(LineParse::Skip);
    };
    check_range("rsrp", rsrp, RSRP_RANGE_DBM.0, RSRP_RANGE_DBM.1)?;
    check_range("rsrq", rsrq, RSRQ_RANGE_DB.0, RSRQ_RANGE_DB.1)?;
    check_range("sinr", sinr, SINR_RANGE_DB.0, SINR_RANGE_DB.1)?;
    Ok(LineParse::Reading { t, rf: RfReading { rsrp_dbm: rsrp, rsrq_db: rsrq, sinr_db: sinr } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn documented_positions() {
        let got = parse_modem_status_line("#RFSTS: \"214 03\",636666,-85,-11,18,0x1A2B,\"ORANGE\"").unwrap();
        assert_eq!(
            got,
            LineParse::Reading { t: None, rf: RfReading { rsrp_dbm: -85.0, rsrq_db: -11.0, sinr_db: 18.0 } }
        );
    }

    #[test]
    fn leading_timestamp() {
        match parse_modem_status_line("12.5 #RFSTS: \"21403\",1,-90,-12,3").unwrap() {
            LineParse::Reading { t, .. } => assert_eq!(t, Some(12.5)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_status_lines_skip() {
        for l in ["OK", "", "AT#RFSTS", "ERROR", "#RFSTS: \"x\",1", "+CSQ: 20,99"] {
            assert_eq!(parse_modem_status_line(l).unwrap(), LineParse::Skip, "{l}");
        }
    }

    #[test]
    fn out_of_range_names_field() {
        let err = parse_modem_status_line("#RFSTS: \"x\",1,-200,-11,18").unwrap_err();
        assert_eq!(err.field, "rsrp");
        let err = parse_modem_status_line("#RFSTS: \"x\",1,-80,-11,99").unwrap_err();
        assert_eq!(err.field, "sinr");
        let err = parse_modem_status_line("#RFSTS: \"x\",1,abc,-11,9").unwrap_err();
        assert_eq!(err.field, "rsrp");
    }

    proptest! {
        #[test]
        fn never_panics(line in ".{0,200}") {
            let _ = parse_modem_status_line(&line);
        }

        #[test]
        fn never_panics_on_status_like(tail in "[-0-9,.\" a-z]{0,60}") {
            let _ = parse_modem_status_line(&format!("#RFSTS:{tail}"));
        }
    }
}
