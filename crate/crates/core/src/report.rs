//! Leaderboards and table rendering (Markdown, CSV, aligned text).

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::robustness::{AuxReport, Track, AUX_COLUMNS, AUX_HEADINGS};

/// CSV schema version written in leaderboard headers.
pub const LEADERBOARD_CSV_VERSION: u32 = 1;

const LEADERBOARD_HEADER: [&str; 5] = ["track", "rank", "method", "mrae", "rmse"];

#[derive(Debug, Clone, PartialEq)]
pub struct LeaderboardRow {
    pub rank: usize,
    pub method: String,
    pub mrae: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leaderboard {
    pub track: Track,
    pub rows: Vec<LeaderboardRow>,
}

fn nan_last(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Ascending MRAE, then RMSE, then method name. NaN sorts last.
fn rank_order(a: &(String, f64, f64), b: &(String, f64, f64)) -> Ordering {
    nan_last(a.1)
        .total_cmp(&nan_last(b.1))
        .then(nan_last(a.2).total_cmp(&nan_last(b.2)))
        .then_with(|| a.0.cmp(&b.0))
}

impl Leaderboard {
    /// Ranks `(method, mrae, rmse)` entries; ranks run 1..=n with no gaps.
    pub fn new(track: Track, entries: impl IntoIterator<Item = (String, f64, f64)>) -> Self {
        let mut e: Vec<_> = entries.into_iter().collect();
        e.sort_by(rank_order);
        let rows = e
            .into_iter()
            .enumerate()
            .map(|(i, (method, mrae, rmse))| LeaderboardRow {
                rank: i + 1,
                method,
                mrae,
                rmse,
            })
            .collect();
        Leaderboard { track, rows }
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "| Rank | Method | MRAE | RMSE |");
        let _ = writeln!(out, "|-----:|:-------|-----:|-----:|");
        for r in &self.rows {
            let _ = writeln!(out, "| {} | {} | {:.5} | {:.5} |", r.rank, r.method, r.mrae, r.rmse);
        }
        out
    }

    pub fn to_csv(&self, comment: &[String]) -> String {
        let mut out = String::new();
        for c in comment {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "# leaderboard v{LEADERBOARD_CSV_VERSION}");
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(LEADERBOARD_HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                self.track.name().to_string(),
                r.rank.to_string(),
                r.method.clone(),
                r.mrae.to_string(),
                r.rmse.to_string(),
            ])
            .expect("in-memory write");
        }
        out.push_str(std::str::from_utf8(&w.into_inner().expect("in-memory flush")).expect("utf-8 fields"));
        out
    }

    pub fn to_text(&self) -> String {
        let mut rows = vec![vec!["Rank".to_string(), "Method".into(), "MRAE".into(), "RMSE".into()]];
        for r in &self.rows {
            rows.push(vec![
                r.rank.to_string(),
                r.method.clone(),
                format!("{:.5}", r.mrae),
                format!("{:.5}", r.rmse),
            ]);
        }
        align(&rows)
    }
}

/// Reads leaderboard CSV written by [`Leaderboard::to_csv`], possibly
/// several concatenated. Returns one leaderboard per track in order of first
/// appearance, re-ranked.
pub fn parse_leaderboards(text: &str) -> Result<Vec<Leaderboard>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut groups: Vec<(Track, Vec<(String, f64, f64)>)> = Vec::new();
    let mut saw_header = false;
    for (i, rec) in reader.records().enumerate() {
        let field = format!("row {}", i + 1);
        let rec = rec.map_err(|e| Error::format(&field, e.to_string()))?;
        if rec.iter().eq(LEADERBOARD_HEADER) {
            saw_header = true;
            continue;
        }
        if !saw_header {
            return Err(Error::format("header", "missing leaderboard header"));
        }
        if rec.len() != LEADERBOARD_HEADER.len() {
            return Err(Error::format(&field, format!("expected 5 columns, found {}", rec.len())));
        }
        let track: Track = rec[0].parse().map_err(|e: Error| Error::format(&field, e.to_string()))?;
        let num = |j: usize| {
            rec[j].parse::<f64>().map_err(|_| {
                Error::format(format!("{field} column {}", LEADERBOARD_HEADER[j]), format!("not a number: `{}`", &rec[j]))
            })
        };
        let entry = (rec[2].to_string(), num(3)?, num(4)?);
        match groups.iter_mut().find(|(t, _)| *t == track) {
            Some((_, v)) => v.push(entry),
            None => groups.push((track, vec![entry])),
        }
    }
    if !saw_header {
        return Err(Error::format("header", "missing leaderboard header"));
    }
    Ok(groups.into_iter().map(|(t, e)| Leaderboard::new(t, e)).collect())
}

/// Space-aligned table. The first two columns are left-aligned, the rest
/// right-aligned. Widths count characters, not bytes.
pub fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0; cols];
    for row in rows {
        for (j, cell) in row.iter().enumerate() {
            widths[j] = widths[j].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (j, cell) in row.iter().enumerate() {
            if j > 0 {
                line.push_str("  ");
            }
            let pad = widths[j] - cell.chars().count();
            if j < 2 {
                line.push_str(cell);
                line.extend(std::iter::repeat_n(' ', pad));
            } else {
                line.extend(std::iter::repeat_n(' ', pad));
                line.push_str(cell);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn aux_rows(reports: &[(&str, &AuxReport)]) -> Vec<Vec<String>> {
    let mut header = vec!["Method".to_string(), "Track".to_string()];
    header.extend(AUX_HEADINGS[1..].iter().map(|s| s.to_string()));
    let mut rows = vec![header];
    for (label, rep) in reports {
        let mut row = vec![label.to_string(), rep.track.name().to_string()];
        row.extend(
            rep.column_means()[1..]
                .iter()
                .map(|c| c.map(|v| format!("{v:.5}")).unwrap_or_else(|| "-".into())),
        );
        rows.push(row);
    }
    rows
}

/// Auxiliary column means, one row per `(method, report)`.
pub fn aux_text(reports: &[(&str, &AuxReport)]) -> String {
    align(&aux_rows(reports))
}

pub fn aux_markdown(reports: &[(&str, &AuxReport)]) -> String {
    let rows = aux_rows(reports);
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let _ = writeln!(out, "| {} |", row.join(" | "));
        if i == 0 {
            let seps: Vec<&str> = (0..row.len()).map(|j| if j < 2 { ":---" } else { "---:" }).collect();
            let _ = writeln!(out, "| {} |", seps.join(" | "));
        }
    }
    out
}

/// Auxiliary column means as CSV, one line per `(method, report)`. Empty
/// fields mark columns with no populated rows.
pub fn aux_csv(reports: &[(&str, &AuxReport)], comment: &[String]) -> String {
    let mut out = String::new();
    for c in comment {
        let _ = writeln!(out, "# {c}");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["method", "track"];
    header.extend(&AUX_COLUMNS[1..]);
    w.write_record(&header).expect("in-memory write");
    for (label, rep) in reports {
        let mut rec = vec![label.to_string(), rep.track.name().to_string()];
        rec.extend(rep.column_means()[1..].iter().map(|c| c.map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&rec).expect("in-memory write");
    }
    out.push_str(std::str::from_utf8(&w.into_inner().expect("in-memory flush")).expect("utf-8 fields"));
    out
}

/// Full Markdown report: one leaderboard per track, then the auxiliary
/// table when any auxiliary results are present.
pub fn render_markdown(boards: &[Leaderboard], aux: &[(&str, &AuxReport)], provenance: &[String]) -> String {
    let mut out = String::new();
    for p in provenance {
        let _ = writeln!(out, "<!-- {p} -->");
    }
    for b in boards {
        let _ = writeln!(out, "## Leaderboard: {} track\n", b.track.name());
        out.push_str(&b.to_markdown());
        out.push('\n');
    }
    if !aux.is_empty() {
        let _ = writeln!(out, "## Auxiliary tests\n");
        out.push_str(&aux_markdown(aux));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_by_mrae_then_rmse_then_name() {
        let lb = Leaderboard::new(
            Track::Clean,
            vec![
                ("b".into(), 0.0323, 0.001),
                ("a".into(), 0.0301, 0.5),
                ("d".into(), 0.0323, 0.001),
                ("c".into(), 0.0323, 0.0005),
            ],
        );
        let order: Vec<_> = lb.rows.iter().map(|r| (r.rank, r.method.as_str())).collect();
        assert_eq!(order, [(1, "a"), (2, "c"), (3, "b"), (4, "d")]);
    }

    #[test]
    fn csv_roundtrip() {
        let lb = Leaderboard::new(Track::RealWorld, vec![("m,1".into(), 0.1 + 0.2, 1.0 / 3.0), ("b".into(), 0.01, 0.02)]);
        let text = lb.to_csv(&["config x".into()]);
        assert_eq!(parse_leaderboards(&text).unwrap(), vec![lb]);
        assert!(parse_leaderboards("a,b\n").is_err());
    }

    #[test]
    fn nan_last() {
        let lb = Leaderboard::new(Track::Clean, vec![("x".into(), f64::NAN, 0.0), ("y".into(), 1.0, 0.0)]);
        assert_eq!(lb.rows[0].method, "y");
    }

    #[test]
    fn align_counts_chars() {
        let t = align(&[vec!["a".into(), "b".into(), "×2".into()], vec!["aa".into(), "".into(), "1".into()]]);
        assert_eq!(t, "a   b  ×2\naa      1\n");
    }
}
