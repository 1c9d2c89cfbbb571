//! CSV and aligned-table rendering.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use hiercache::analytics::RatePoint;
use hiercache::exact::{fmt_decimal, fmt_ratio};
use hiercache::Q;

use crate::exit::CliResult;

pub const HEADER: [&str; 15] =
    ["scheme", "K1", "K2", "N", "t", "alpha", "M1", "M2", "Mbar", "R1", "R2", "Rbar", "Rsum", "Tconc", "Tseq"];

/// Number rendering: exact `p/q` or rounded decimals.
#[derive(Debug, Clone, Copy)]
pub struct NumFmt {
    pub rational: bool,
    pub places: usize,
}

impl NumFmt {
    pub fn csv(rational: bool) -> Self {
        NumFmt { rational, places: 6 }
    }

    pub fn text(rational: bool) -> Self {
        NumFmt { rational, places: 4 }
    }

    pub fn num(&self, v: &Q) -> String {
        if self.rational {
            fmt_ratio(v)
        } else {
            fmt_decimal(v, self.places)
        }
    }
}

pub fn csv_record(p: &RatePoint, f: NumFmt) -> Vec<String> {
    vec![
        p.scheme.clone(),
        p.k1.to_string(),
        p.k2.to_string(),
        p.n_files.to_string(),
        p.t.map(|t| t.to_string()).unwrap_or_default(),
        p.alpha.as_ref().map(|a| f.num(a)).unwrap_or_default(),
        f.num(&p.m1),
        f.num(&p.m2),
        f.num(&p.m_bar),
        f.num(&p.r1),
        f.num(&p.r2),
        f.num(&p.r_bar),
        f.num(&p.r_sum),
        f.num(&p.t_conc),
        f.num(&p.t_seq),
    ]
}

pub fn write_csv<W: Write>(w: W, rows: &[RatePoint], rational: bool) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HEADER)?;
    for p in rows {
        out.write_record(csv_record(p, NumFmt::csv(rational)))?;
    }
    out.flush()?;
    Ok(())
}

/// CSV to `path`, or to stdout when `path` is `None`.
pub fn emit_csv(path: Option<&Path>, rows: &[RatePoint], rational: bool) -> CliResult<()> {
    match path {
        Some(p) => write_csv(BufWriter::new(File::create(p)?), rows, rational),
        None => write_csv(io::stdout().lock(), rows, rational),
    }
}

fn numeric(cell: &str) -> bool {
    cell == "n/a" || cell.chars().all(|c| c.is_ascii_digit() || "-./".contains(c))
}

/// Aligned text table: numeric columns right-aligned, the first column and
/// text columns left-aligned.
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let cols = headers.len();
    let right: Vec<bool> =
        (0..cols).map(|i| i > 0 && rows.iter().all(|r| r.get(i).is_none_or(|c| numeric(c)))).collect();
    let mut width: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (i, c) in r.iter().enumerate().take(cols) {
            width[i] = width[i].max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (i, c) in cells.iter().enumerate() {
            let pad = " ".repeat(width[i] - c.chars().count());
            if i > 0 {
                s.push_str("  ");
            }
            if right[i] {
                s.push_str(&pad);
                s.push_str(c);
            } else {
                s.push_str(c);
                s.push_str(&pad);
            }
        }
        s.trim_end().to_string()
    };
    let mut out = line(headers.to_vec());
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use hiercache::exact::q;

    #[test]
    fn csv_layout() {
        let p = RatePoint::new("proposed", (3, 2, 6), Some(2), Some(q(1, 2)), q(11, 30), q(4, 5), q(19, 6), q(8, 5));
        let mut buf = Vec::new();
        write_csv(&mut buf, std::slice::from_ref(&p), false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("scheme,K1,K2,N,t,alpha,M1,M2,Mbar,R1,R2,Rbar,Rsum,Tconc,Tseq"));
        assert_eq!(
            lines.next(),
            Some("proposed,3,2,6,2,0.500000,0.366667,0.800000,5.900000,3.166667,1.600000,7.966667,4.766667,3.166667,4.766667")
        );
        let mut buf = Vec::new();
        write_csv(&mut buf, &[p], true).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains(",1/2,11/30,4/5,59/10,19/6,8/5,239/30,"));
    }

    #[test]
    fn table_alignment() {
        let t = table(&["name", "v"], &[vec!["a".into(), "10".into()], vec!["bbb".into(), "2".into()]]);
        assert_eq!(t, "name   v\na     10\nbbb    2\n");
        let t = table(&["n", "note"], &[vec!["1".into(), "ab".into()], vec!["2".into(), "c".into()]]);
        assert_eq!(t, "n  note\n1  ab\n2  c\n");
    }
}
