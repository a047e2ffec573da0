use std::f64::consts::PI;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lti::TransferFunction;
use crate::numerics::Complex64;

/// Column layout of an FRF file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrfFormat {
    /// `freq_hz,re,im`
    ReIm,
    /// `freq_hz,mag_db,phase_deg`
    MagPhase,
}

impl FrfFormat {
    pub fn header(&self) -> [&'static str; 3] {
        match self {
            FrfFormat::ReIm => ["freq_hz", "re", "im"],
            FrfFormat::MagPhase => ["freq_hz", "mag_db", "phase_deg"],
        }
    }

    fn detect(header: &[&str]) -> Option<Self> {
        [FrfFormat::ReIm, FrfFormat::MagPhase].into_iter().find(|f| f.header() == header)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrfPoint {
    pub freq_hz: f64,
    pub response: Complex64,
}

impl FrfPoint {
    pub fn omega(&self) -> f64 {
        2.0 * PI * self.freq_hz
    }
}

/// Frequency response samples, frequencies strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct FrfData {
    pub source: String,
    points: Vec<FrfPoint>,
}

impl FrfData {
    pub fn new(source: impl Into<String>, points: Vec<FrfPoint>) -> Result<Self> {
        for (i, w) in points.windows(2).enumerate() {
            if !(w[1].freq_hz > w[0].freq_hz) {
                return Err(Error::InvalidParameter(format!(
                    "frequencies must be strictly increasing: point {} ({} Hz) follows {} Hz",
                    i + 1,
                    w[1].freq_hz,
                    w[0].freq_hz
                )));
            }
        }
        Ok(Self { source: source.into(), points })
    }

    /// Samples `model` at the given frequencies.
    pub fn from_model(source: impl Into<String>, model: &TransferFunction, freqs_hz: &[f64]) -> Result<Self> {
        let points = freqs_hz
            .iter()
            .map(|&f| Ok(FrfPoint { freq_hz: f, response: model.freq_response(2.0 * PI * f)? }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, points)
    }

    pub fn points(&self) -> &[FrfPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W, format: FrfFormat) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(format.header())?;
        for p in &self.points {
            let (a, b) = match format {
                FrfFormat::ReIm => (p.response.re, p.response.im),
                FrfFormat::MagPhase => (20.0 * p.response.norm().log10(), p.response.arg().to_degrees()),
            };
            w.write_record([format!("{:.17e}", p.freq_hz), format!("{a:.17e}"), format!("{b:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads an FRF file. Without an explicit `format` the layout is taken from the header.
pub fn load_frf(path: impl AsRef<Path>, format: Option<FrfFormat>) -> Result<FrfData> {
    let path = path.as_ref();
    let file = File::open(path)?;
    parse_frf(file, path, format)
}

pub fn parse_frf<R: Read>(input: R, path: impl AsRef<Path>, format: Option<FrfFormat>) -> Result<FrfData> {
    let path: PathBuf = path.as_ref().to_path_buf();
    let err = |line: usize, message: String| Error::Parse { path: path.clone(), line, message };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(input);
    let header: Vec<String> = rdr.headers().map_err(|e| err(1, e.to_string()))?.iter().map(str::to_owned).collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let detected = FrfFormat::detect(&header_refs);
    let format = match (format, detected) {
        (Some(f), Some(d)) if f != d => {
            return Err(err(1, format!("header `{}` does not match the requested layout `{}`", header.join(","), f.header().join(","))))
        }
        (_, Some(d)) => d,
        (_, None) => {
            return Err(err(
                1,
                format!("unrecognised header `{}`; expected `freq_hz,re,im` or `freq_hz,mag_db,phase_deg`", header.join(",")),
            ))
        }
    };

    let mut points: Vec<FrfPoint> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 3 {
            return Err(err(line, format!("expected 3 fields, found {}", rec.len())));
        }
        let mut vals = [0.0; 3];
        for (v, field) in vals.iter_mut().zip(rec.iter()) {
            *v = field.parse::<f64>().map_err(|_| err(line, format!("`{field}` is not a number")))?;
            if !v.is_finite() {
                return Err(err(line, format!("`{field}` is not finite")));
            }
        }
        let [freq_hz, a, b] = vals;
        if !(freq_hz > 0.0) {
            return Err(err(line, format!("frequency must be positive, got {freq_hz}")));
        }
        if let Some(prev) = points.last() {
            if freq_hz == prev.freq_hz {
                return Err(err(line, format!("duplicate frequency {freq_hz} Hz")));
            }
            if freq_hz < prev.freq_hz {
                return Err(err(line, format!("frequency {freq_hz} Hz is below the previous row ({} Hz)", prev.freq_hz)));
            }
        }
        let response = match format {
            FrfFormat::ReIm => Complex64::new(a, b),
            FrfFormat::MagPhase => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        };
        points.push(FrfPoint { freq_hz, response });
    }
    FrfData::new(path.display().to_string(), points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<FrfData> {
        parse_frf(text.as_bytes(), "test.csv", None)
    }

    #[test]
    fn three_rows() {
        let d = parse("freq_hz,re,im\n1,1,0\n2,0.5,-0.5\n3,0.1,-0.2\n").unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.points()[1].response, Complex64::new(0.5, -0.5));
    }

    #[test]
    fn duplicate_row_is_named() {
        let e = parse("freq_hz,re,im\n1,1,0\n2,1,0\n2,1,0\n").unwrap_err();
        match e {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 4);
                assert!(message.contains("duplicate"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn decreasing_and_malformed_rows() {
        assert!(matches!(parse("freq_hz,re,im\n2,1,0\n1,1,0\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse("freq_hz,re,im\n1,1,0\n2,x,0\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse("freq_hz,re,im\n1,1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("f,re,im\n1,1,0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse_frf("freq_hz,re,im\n1,1,0\n".as_bytes(), "t.csv", Some(FrfFormat::MagPhase)),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn mag_phase_round_trip() {
        let d = parse("freq_hz,re,im\n1,0.3,-0.7\n5,-2.0,0.25\n9,-1e-3,-4e-4\n").unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf, FrfFormat::MagPhase).unwrap();
        let back = parse_frf(buf.as_slice(), "mp.csv", Some(FrfFormat::MagPhase)).unwrap();
        let mut buf2 = Vec::new();
        back.write_csv(&mut buf2, FrfFormat::ReIm).unwrap();
        let again = parse(std::str::from_utf8(&buf2).unwrap()).unwrap();
        for (a, b) in d.points().iter().zip(again.points()) {
            assert!((a.response - b.response).norm() <= 1e-9 * a.response.norm().max(1.0));
        }
    }
}
