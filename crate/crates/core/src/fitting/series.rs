//! Power series input: (P₂, y, σ) triples read from CSV.

use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::Path;

use super::FitError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    /// Coupling power in mW.
    pub p2: f64,
    pub y: f64,
    pub sigma: Option<f64>,
}

/// Observations against coupling power.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSeries {
    points: Vec<PowerPoint>,
}

fn check_point(pt: &PowerPoint) -> Result<(), String> {
    if !pt.p2.is_finite() || !pt.y.is_finite() {
        return Err("non-finite value".into());
    }
    if pt.p2 < 0.0 {
        return Err(format!("negative power {}", pt.p2));
    }
    if let Some(s) = pt.sigma {
        if !(s.is_finite() && s > 0.0) {
            return Err(format!("sigma must be positive, got {s}"));
        }
    }
    Ok(())
}

impl PowerSeries {
    pub fn new(points: Vec<PowerPoint>) -> Result<Self, FitError> {
        if points.is_empty() {
            return Err(FitError::EmptySeries);
        }
        for (index, pt) in points.iter().enumerate() {
            check_point(pt).map_err(|reason| FitError::InvalidPoint { index, reason })?;
        }
        Ok(Self { points })
    }

    /// Unweighted series from parallel slices.
    pub fn from_xy(p2: &[f64], y: &[f64]) -> Result<Self, FitError> {
        Self::new(
            p2.iter()
                .zip(y)
                .map(|(&p2, &y)| PowerPoint { p2, y, sigma: None })
                .collect(),
        )
    }

    pub fn points(&self) -> &[PowerPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when every point carries an uncertainty.
    pub fn has_sigma(&self) -> bool {
        self.points.iter().all(|p| p.sigma.is_some())
    }

    /// 1/σ², or 1 for points without σ.
    pub fn weights(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p.sigma.map_or(1.0, |s| 1.0 / (s * s)))
            .collect()
    }

    pub fn distinct_powers(&self) -> usize {
        let mut p: Vec<f64> = self.points.iter().map(|p| p.p2).collect();
        p.sort_by(f64::total_cmp);
        p.dedup();
        p.len()
    }

    pub fn power_range(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.p2), hi.max(p.p2))
            })
    }
}

#[derive(Debug, Deserialize)]
struct Row {
    p2_mw: String,
    value: String,
    #[serde(default)]
    sigma: Option<String>,
}

fn parse_field(raw: &str, name: &str, line: u64) -> Result<f64, FitError> {
    raw.trim().parse::<f64>().map_err(|_| FitError::ParseError {
        line,
        message: format!("cannot parse {name} {raw:?}"),
    })
}

/// Parses CSV with header `p2_mw,value[,sigma]`.
pub fn parse_series<R: Read>(reader: R) -> Result<PowerSeries, FitError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| FitError::ParseError {
        line: 1,
        message: e.to_string(),
    })?;
    for required in ["p2_mw", "value"] {
        if !headers.iter().any(|h| h == required) {
            return Err(FitError::ParseError {
                line: 1,
                message: format!("missing column {required}"),
            });
        }
    }

    let mut points = Vec::new();
    for result in rdr.deserialize::<Row>() {
        let row = result.map_err(|e| FitError::ParseError {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = points.len() as u64 + 2;
        let sigma = match row.sigma.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(s) => Some(parse_field(s, "sigma", line)?),
        };
        let pt = PowerPoint {
            p2: parse_field(&row.p2_mw, "p2_mw", line)?,
            y: parse_field(&row.value, "value", line)?,
            sigma,
        };
        check_point(&pt).map_err(|message| FitError::ParseError { line, message })?;
        points.push(pt);
    }
    if points.is_empty() {
        return Err(FitError::EmptySeries);
    }
    PowerSeries::new(points)
}

pub fn load_series(path: impl AsRef<Path>) -> Result<PowerSeries, FitError> {
    let path = path.as_ref();
    let file =
        std::fs::File::open(path).map_err(|e| FitError::Io(format!("{}: {e}", path.display())))?;
    parse_series(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed() {
        let s = parse_series("p2_mw,value\n0.5,70\n1,72\n2,75\n3,78\n4,80\n".as_bytes()).unwrap();
        assert_eq!(s.len(), 5);
        assert!(!s.has_sigma());
        assert_eq!(
            s.points()[2],
            PowerPoint {
                p2: 2.0,
                y: 75.0,
                sigma: None
            }
        );
    }

    #[test]
    fn with_sigma() {
        let s = parse_series("p2_mw,value,sigma\n0.5,70,0.5\n1,72,0.25\n".as_bytes()).unwrap();
        assert!(s.has_sigma());
        assert_eq!(s.weights(), vec![4.0, 16.0]);
    }

    #[test]
    fn header_only() {
        assert_eq!(
            parse_series("p2_mw,value\n".as_bytes()),
            Err(FitError::EmptySeries)
        );
    }

    #[test]
    fn negative_power_names_row() {
        let err = parse_series("p2_mw,value\n1,2\n-1,3\n".as_bytes()).unwrap_err();
        assert!(
            matches!(err, FitError::ParseError { line: 3, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn non_finite_rejected() {
        let err = parse_series("p2_mw,value\n1,2\n2,3\n3,NaN\n".as_bytes()).unwrap_err();
        assert!(
            matches!(err, FitError::ParseError { line: 4, .. }),
            "{err:?}"
        );
        let err = parse_series("p2_mw,value\n1,abc\n".as_bytes()).unwrap_err();
        assert!(
            matches!(err, FitError::ParseError { line: 2, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn missing_column() {
        assert!(matches!(
            parse_series("power,value\n1,2\n".as_bytes()),
            Err(FitError::ParseError { line: 1, .. })
        ));
    }
}
