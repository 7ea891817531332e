//! Reading and writing FIDs as CSV.
//!
//! The format is a `# dt=<seconds>` comment line followed by an
//! `index,real,imag` header and one row per sample. Floats are written with
//! Rust's shortest round-trip formatting, so save followed by load
//! reproduces the signal bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::Fid;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

/// Render a FID in the CSV format.
pub fn format_fid(fid: &Fid) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# dt={}", fid.dt());
    out.push_str("index,real,imag\n");
    for (i, v) in fid.samples().iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", i, v.re, v.im);
    }
    out
}

/// Write a FID to `path` in the CSV format.
pub fn save_fid(path: impl AsRef<Path>, fid: &Fid) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_fid(fid)).map_err(|e| io_err(path, e))
}

/// Parse a FID from CSV text; `origin` names the source in error messages.
pub fn parse_fid(text: &str, origin: &str) -> Result<Fid> {
    let bad = |line_no: usize, what: &str| {
        Error::invalid(format!("{origin}: line {line_no}: {what}"))
    };

    let mut dt: Option<f64> = None;
    let mut samples: Vec<Complex64> = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(value) = rest.strip_prefix("dt=") {
                let parsed = value
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| bad(line_no, &format!("cannot parse dt value {value:?}")))?;
                dt = Some(parsed);
            }
            continue;
        }
        if !saw_header {
            if line != "index,real,imag" {
                return Err(bad(line_no, "expected header `index,real,imag`"));
            }
            saw_header = true;
            continue;
        }
        let mut fields = line.split(',');
        let (i_str, re_str, im_str) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), Some(c), None) => (a, b, c),
            _ => return Err(bad(line_no, "expected exactly three fields")),
        };
        let i: usize = i_str
            .trim()
            .parse()
            .map_err(|_| bad(line_no, &format!("cannot parse index {i_str:?}")))?;
        if i != samples.len() {
            return Err(bad(line_no, &format!("index {i} out of order, expected {}", samples.len())));
        }
        let re: f64 = re_str
            .trim()
            .parse()
            .map_err(|_| bad(line_no, &format!("cannot parse real part {re_str:?}")))?;
        let im: f64 = im_str
            .trim()
            .parse()
            .map_err(|_| bad(line_no, &format!("cannot parse imaginary part {im_str:?}")))?;
        samples.push(Complex64::new(re, im));
    }

    let dt = dt.ok_or_else(|| Error::invalid(format!("{origin}: missing `# dt=` line")))?;
    if !saw_header {
        return Err(Error::invalid(format!("{origin}: missing `index,real,imag` header")));
    }
    Fid::new(samples, dt).map_err(|e| Error::invalid(format!("{origin}: {e}")))
}

/// Read a FID from a CSV file written by [`save_fid`].
pub fn load_fid(path: impl AsRef<Path>) -> Result<Fid> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_fid(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn formats_in_documented_layout() {
        let fid = Fid::new(
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, -0.25)],
            0.001,
        )
        .unwrap();
        let text = format_fid(&fid);
        assert_eq!(text, "# dt=0.001\nindex,real,imag\n0,1,0\n1,0.5,-0.25\n");
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(9);
        let samples: Vec<Complex64> = (0..257)
            .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        let fid = Fid::new(samples, 1.25e-4).unwrap();
        let parsed = parse_fid(&format_fid(&fid), "mem").unwrap();
        assert_eq!(parsed.dt(), fid.dt());
        assert_eq!(parsed.samples(), fid.samples());
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join("chordv-fid-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.csv");
        let fid = crate::signal::synthesize_fid(&crate::signal::reference_5peak()).unwrap();
        save_fid(&path, &fid).unwrap();
        let back = load_fid(&path).unwrap();
        assert_eq!(back.samples(), fid.samples());
        assert_eq!(back.dt(), fid.dt());
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn missing_dt_rejected() {
        let err = parse_fid("index,real,imag\n0,1,0\n1,1,0\n", "mem").unwrap_err();
        assert!(err.to_string().contains("dt"), "{err}");
    }

    #[test]
    fn missing_header_rejected() {
        let err = parse_fid("# dt=0.001\n0,1,0\n", "mem").unwrap_err();
        assert!(err.to_string().contains("header"), "{err}");
    }

    #[test]
    fn out_of_order_index_rejected() {
        let err = parse_fid("# dt=0.001\nindex,real,imag\n0,1,0\n2,1,0\n", "mem").unwrap_err();
        assert!(err.to_string().contains("out of order"), "{err}");
    }

    #[test]
    fn garbage_field_rejected() {
        let err = parse_fid("# dt=0.001\nindex,real,imag\n0,one,0\n", "mem").unwrap_err();
        assert!(err.to_string().contains("real part"), "{err}");
    }

    #[test]
    fn missing_file_reports_path() {
        let err = load_fid("/nonexistent/fid.csv").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/fid.csv"));
    }

    #[test]
    fn blank_lines_and_extra_comments_ignored() {
        let text = "# produced by a test\n# dt=0.002\n\nindex,real,imag\n0,1,2\n\n1,3,4\n";
        let fid = parse_fid(text, "mem").unwrap();
        assert_eq!(fid.dt(), 0.002);
        assert_eq!(fid.samples(), &[Complex64::new(1.0, 2.0), Complex64::new(3.0, 4.0)]);
    }
}
