//! Delimited object/tag files.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{BipartiteBuilder, BipartiteGraph};

/// Column selector: zero-based index or header name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl FromStr for Column {
    type Err = Error;

    /// Digits select by index, anything else by header name.
    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Config("empty column selector".into()));
        }
        Ok(match s.parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.to_owned()),
        })
    }
}

#[derive(Debug, Clone)]
pub struct TsvOptions {
    pub object: Column,
    pub tag: Column,
    pub delimiter: u8,
    pub has_header: bool,
}

impl Default for TsvOptions {
    fn default() -> Self {
        TsvOptions {
            object: Column::Index(0),
            tag: Column::Index(1),
            delimiter: b'\t',
            has_header: false,
        }
    }
}

pub fn parse_tsv_bipartite(path: impl AsRef<Path>, options: &TsvOptions) -> Result<BipartiteGraph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_tsv_bipartite(file, options).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_tsv_bipartite<R: Read>(reader: R, options: &TsvOptions) -> Result<BipartiteGraph> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(options.has_header)
        .flexible(true)
        .quoting(false)
        .from_reader(reader);

    let resolve = |col: &Column, headers: Option<&csv::StringRecord>| -> Result<usize> {
        match (col, headers) {
            (Column::Index(i), _) => Ok(*i),
            (Column::Name(name), Some(h)) => h
                .iter()
                .position(|x| x == name)
                .ok_or_else(|| Error::Config(format!("column `{name}` not found in header"))),
            (Column::Name(name), None) => Err(Error::Config(format!(
                "column `{name}` selected by name but the file has no header"
            ))),
        }
    };
    let headers = if options.has_header {
        let h = rdr.headers().map_err(csv_error)?.clone();
        if h.is_empty() {
            return Err(Error::EmptyInput);
        }
        Some(h)
    } else {
        None
    };
    let object_col = resolve(&options.object, headers.as_ref())?;
    let tag_col = resolve(&options.tag, headers.as_ref())?;
    if let Some(h) = &headers {
        let width = h.len();
        if object_col >= width || tag_col >= width {
            return Err(Error::Config(format!(
                "column index {} out of range for a {width}-column header",
                object_col.max(tag_col)
            )));
        }
    }

    let mut builder = BipartiteBuilder::new();
    let mut record = csv::StringRecord::new();
    let mut index = 0;
    while rdr.read_record(&mut record).map_err(csv_error)? {
        index += 1;
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        let (Some(o), Some(t)) = (record.get(object_col), record.get(tag_col)) else {
            if index == 1 && !options.has_header {
                return Err(Error::Config(format!(
                    "column index {} out of range for a {}-column file",
                    object_col.max(tag_col),
                    record.len()
                )));
            }
            return Err(Error::parse(
                index,
                format!("row has only {} fields", record.len()),
            ));
        };
        builder.add_edge(index, o, t)?;
    }
    builder.build()
}

fn csv_error(e: csv::Error) -> Error {
    let record = e.position().map(|p| p.record() as usize + 1).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<tsv>", io),
        other => Error::parse(record, format!("{other:?}")),
    }
}

/// Writes `object<TAB>tag` rows under an `object\ttag` header.
pub fn write_tsv_bipartite<W: Write>(graph: &BipartiteGraph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "object\ttag")?;
    for (o, t) in graph.edges() {
        writeln!(out, "{o}\t{t}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_row_collapses() {
        let text = "a\tx\na\ty\nb\tx\na\tx\nc\tz\n";
        let g = read_tsv_bipartite(text.as_bytes(), &TsvOptions::default()).unwrap();
        assert_eq!(g.edge_count(), 4);
    }

    #[test]
    fn header_skipped_when_flagged() {
        let text = "user\tskill\na\tx\nb\tx\n";
        let opts = TsvOptions {
            has_header: true,
            ..TsvOptions::default()
        };
        let g = read_tsv_bipartite(text.as_bytes(), &opts).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(!g.tags().iter().any(|t| t == "skill"));
    }

    #[test]
    fn columns_by_name_and_delimiter() {
        let text = "skill,id,extra\nrust,u1,0\ngo,u1,0\n";
        let opts = TsvOptions {
            object: "id".parse().unwrap(),
            tag: "skill".parse().unwrap(),
            delimiter: b',',
            has_header: true,
        };
        let g = read_tsv_bipartite(text.as_bytes(), &opts).unwrap();
        assert_eq!(g.objects(), &["u1".to_owned()]);
        assert_eq!(g.tag_count(), 2);
    }

    #[test]
    fn empty_file() {
        let err = read_tsv_bipartite("".as_bytes(), &TsvOptions::default()).unwrap_err();
        assert_eq!(err.to_string(), "empty input");
    }

    #[test]
    fn missing_column_is_config_error() {
        let opts = TsvOptions {
            tag: Column::Name("nope".into()),
            has_header: true,
            ..TsvOptions::default()
        };
        let err = read_tsv_bipartite("a\tb\n1\t2\n".as_bytes(), &opts).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let opts = TsvOptions {
            tag: Column::Index(5),
            ..TsvOptions::default()
        };
        let err = read_tsv_bipartite("1\t2\n".as_bytes(), &opts).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn short_row_names_record() {
        let err = read_tsv_bipartite("a\tx\nb\n".as_bytes(), &TsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { record: 2, .. }), "{err}");
    }

    #[test]
    fn unreadable_file_reports_path() {
        let err = parse_tsv_bipartite("/nonexistent/x.tsv", &TsvOptions::default()).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.tsv"));
    }

    #[test]
    fn write_then_read() {
        let g = read_tsv_bipartite("a\tx\nb\ty\n".as_bytes(), &TsvOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_tsv_bipartite(&g, &mut buf).unwrap();
        let opts = TsvOptions {
            has_header: true,
            ..TsvOptions::default()
        };
        assert_eq!(read_tsv_bipartite(buf.as_slice(), &opts).unwrap(), g);
    }
}
