use std::fs;
use std::path::Path;

use crate::em::{ComplexScalar, FrequencyGrid, SPoint, SResponse};

use super::DataError;

fn parse_err(line: usize, msg: impl Into<String>) -> DataError {
    DataError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Writes a two-port response as Touchstone v1 (.s2p), real/imaginary
/// format: option line `# GHz S RI R <z0>`, then one line per frequency
/// `f s11re s11im s21re s21im s12re s12im s22re s22im`, 9 significant digits.
pub fn write_touchstone(s: &SResponse, path: &Path, z0: f64) -> Result<(), DataError> {
    if !(z0 > 0.0 && z0.is_finite()) {
        return Err(DataError::Usage("z0 must be positive".into()));
    }
    let mut out = String::new();
    out.push_str("! two-port S-parameters\n");
    out.push_str(&format!("# GHz S RI R {z0}\n"));
    for (j, p) in s.points.iter().enumerate() {
        let f_ghz = s.grid.point_hz(j) / 1e9;
        out.push_str(&format!(
            "{:.8e} {:.8e} {:.8e} {:.8e} {:.8e} {:.8e} {:.8e} {:.8e} {:.8e}\n",
            f_ghz, p.s11.re, p.s11.im, p.s21.re, p.s21.im, p.s12.re, p.s12.im, p.s22.re, p.s22.im
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

fn frequency_unit_hz(token: &str) -> Option<f64> {
    match token.to_ascii_lowercase().as_str() {
        "hz" => Some(1.0),
        "khz" => Some(1e3),
        "mhz" => Some(1e6),
        "ghz" => Some(1e9),
        _ => None,
    }
}

/// Reads a two-port Touchstone v1 file written in real/imaginary format.
/// Accepts `!` comments and arbitrary whitespace; requires ascending,
/// uniformly spaced frequencies (the grid type is uniform).
pub fn read_touchstone(path: &Path) -> Result<(SResponse, f64), DataError> {
    let text = fs::read_to_string(path)?;
    let mut unit_hz: Option<f64> = None;
    let mut z0 = 50.0;
    let mut rows: Vec<(f64, Vec<f64>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('!') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if unit_hz.is_some() {
                return Err(parse_err(line_no, "duplicate option line"));
            }
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            if tokens.len() < 3 {
                return Err(parse_err(line_no, "malformed option line"));
            }
            let unit = frequency_unit_hz(tokens[0]).ok_or_else(|| {
                parse_err(line_no, format!("unknown frequency unit '{}'", tokens[0]))
            })?;
            if !tokens[1].eq_ignore_ascii_case("s") {
                return Err(parse_err(line_no, "only S-parameter files are supported"));
            }
            if !tokens[2].eq_ignore_ascii_case("ri") {
                return Err(parse_err(
                    line_no,
                    "only RI (real/imaginary) format is supported",
                ));
            }
            match tokens.get(3) {
                Some(t) if t.eq_ignore_ascii_case("r") => {
                    let v = tokens
                        .get(4)
                        .ok_or_else(|| parse_err(line_no, "option line ends after 'R'"))?;
                    z0 = v.parse::<f64>().map_err(|_| {
                        parse_err(line_no, format!("bad reference impedance '{v}'"))
                    })?;
                }
                Some(t) => return Err(parse_err(line_no, format!("unexpected token '{t}'"))),
                None => {}
            }
            unit_hz = Some(unit);
            continue;
        }
        let unit = unit_hz.ok_or_else(|| parse_err(line_no, "data before option line"))?;
        let vals: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
        let vals = vals.map_err(|e| parse_err(line_no, format!("bad number: {e}")))?;
        if vals.len() != 9 {
            return Err(parse_err(
                line_no,
                format!("expected 9 columns for a two-port, got {}", vals.len()),
            ));
        }
        let f_hz = vals[0] * unit;
        if let Some((last, _)) = rows.last() {
            if f_hz <= *last {
                return Err(parse_err(line_no, "frequencies must be strictly ascending"));
            }
        }
        rows.push((f_hz, vals[1..].to_vec()));
    }
    if rows.len() < 2 {
        return Err(DataError::Format("fewer than 2 frequency points".into()));
    }
    let n = rows.len();
    let grid = FrequencyGrid::new(rows[0].0, rows[n - 1].0, n)?;
    for (j, (f, _)) in rows.iter().enumerate() {
        let expected = grid.point_hz(j);
        if (f - expected).abs() > 1e-6 * expected {
            return Err(DataError::Format(format!(
                "non-uniform frequency spacing at point {j}"
            )));
        }
    }
    let points = rows
        .into_iter()
        .map(|(_, v)| SPoint {
            s11: ComplexScalar::new(v[0], v[1]),
            s21: ComplexScalar::new(v[2], v[3]),
            s12: ComplexScalar::new(v[4], v[5]),
            s22: ComplexScalar::new(v[6], v[7]),
        })
        .collect();
    Ok((SResponse::new(grid, points)?, z0))
}
