use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// `%.10g`: ten significant digits, trailing zeros dropped, exponent form
/// below 1e-4 or from 1e10.
pub fn fmt_g(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..10).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (9 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub struct Csv {
    out: Box<dyn Write>,
    label: String,
}

impl Csv {
    pub fn new(path: Option<&Path>, header: &[&str]) -> Result<Self> {
        let mut csv = Self {
            out: open(path)?,
            label: path.map_or_else(
                || "standard output".to_string(),
                |p| p.display().to_string(),
            ),
        };
        csv.line(header.join(","))?;
        Ok(csv)
    }

    fn line(&mut self, s: String) -> Result<()> {
        writeln!(self.out, "{s}").with_context(|| format!("cannot write {}", self.label))
    }

    pub fn row(&mut self, values: &[f64]) -> Result<()> {
        self.line(
            values
                .iter()
                .map(|&v| fmt_g(v))
                .collect::<Vec<_>>()
                .join(","),
        )
    }

    pub fn finish(mut self) -> Result<()> {
        self.out
            .flush()
            .with_context(|| format!("cannot write {}", self.label))
    }
}

pub fn json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let label = path.map_or_else(
        || "standard output".to_string(),
        |p| p.display().to_string(),
    );
    let mut out = open(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)
        .and_then(|_| out.flush())
        .with_context(|| format!("cannot write {label}"))
}
