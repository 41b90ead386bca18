//! Line-oriented group-spec documents.
//!
//! ```text
//! # comment
//! factor cyclic 3
//! factor sym 3
//! factor table Q8 8
//! 0 1 2 3 4 5 6 7
//! ...
//! lambda 2 3
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::group::{FactorGroup, FactorSource, FreeProduct};

pub fn load_group_spec(text: &str) -> Result<FreeProduct> {
    let mut factors: Vec<FactorGroup> = Vec::new();
    let mut lambdas: Vec<(usize, usize, u8)> = Vec::new();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let perr = |line: usize, msg: String| Error::Parse { line, msg };

    while let Some((ln, line)) = lines.next() {
        let tok: Vec<&str> = line.split_whitespace().collect();
        let index = factors.len() + 1;
        match tok.as_slice() {
            ["factor", "cyclic", k] => {
                let k: usize = k
                    .parse()
                    .map_err(|_| perr(ln, format!("bad cyclic order `{k}`")))?;
                factors.push(FactorGroup::cyclic(index, k)?);
            }
            ["factor", "sym", "3"] => factors.push(FactorGroup::sym3(index)?),
            ["factor", "sym", other] => {
                return Err(perr(ln, format!("only `sym 3` is supported, got `sym {other}`")))
            }
            ["factor", "table", name, order] => {
                let order: usize = order
                    .parse()
                    .map_err(|_| perr(ln, format!("bad table order `{order}`")))?;
                let mut rows = Vec::with_capacity(order);
                for _ in 0..order {
                    let (rl, row) = lines
                        .next()
                        .ok_or_else(|| perr(ln, format!("table `{name}` truncated")))?;
                    let row = row
                        .split_whitespace()
                        .map(|t| t.parse::<u8>())
                        .collect::<std::result::Result<Vec<u8>, _>>()
                        .map_err(|_| perr(rl, "non-numeric table entry".into()))?;
                    if row.len() != order {
                        return Err(perr(rl, format!("expected {order} entries, got {}", row.len())));
                    }
                    rows.push(row);
                }
                factors.push(FactorGroup::from_table(
                    index,
                    rows,
                    FactorSource::Table(name.to_string()),
                )?);
            }
            ["lambda", f, e] => {
                let f: usize = f.parse().map_err(|_| perr(ln, "bad factor id".into()))?;
                let e: u8 = e.parse().map_err(|_| perr(ln, "bad element index".into()))?;
                lambdas.push((ln, f, e));
            }
            _ => return Err(perr(ln, format!("unrecognised line `{line}`"))),
        }
    }
    for (ln, f, e) in lambdas {
        let g = factors
            .get_mut(f.wrapping_sub(1))
            .ok_or_else(|| perr(ln, format!("lambda names unknown factor {f}")))?;
        g.set_lambda(e)?;
    }
    FreeProduct::new(factors)
}

pub fn write_group_spec(fp: &FreeProduct) -> String {
    let mut out = String::new();
    for f in fp.factors() {
        match f.source() {
            FactorSource::Cyclic(k) => writeln!(out, "factor cyclic {k}").unwrap(),
            FactorSource::Sym3 => writeln!(out, "factor sym 3").unwrap(),
            FactorSource::Table(name) => {
                writeln!(out, "factor table {name} {}", f.order()).unwrap();
                for row in f.table() {
                    let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                    writeln!(out, "{}", cells.join(" ")).unwrap();
                }
            }
        }
    }
    for f in fp.factors() {
        if f.lambda() != 1 {
            writeln!(out, "lambda {} {}", f.index, f.lambda()).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// S3 built independently from permutation composition, elements in
    /// one-line lexicographic order.
    fn s3_table_text() -> String {
        let perms: Vec<Vec<usize>> = vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ];
        let mut s = String::from("factor table S3 6\n");
        for p in &perms {
            let row: Vec<String> = perms
                .iter()
                .map(|q| {
                    let c: Vec<usize> = (0..3).map(|x| p[q[x]]).collect();
                    perms.iter().position(|r| *r == c).unwrap().to_string()
                })
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    #[test]
    fn smallest_input() {
        let fp = load_group_spec("factor cyclic 2\nfactor cyclic 2\n").unwrap();
        assert_eq!(fp.rank(), 2);
        assert_eq!(fp.factor(0).order(), 2);
    }

    #[test]
    fn corrupted_row() {
        let doc = "factor table C3 3\n0 1 2\n1 0 2\n2 1 0\nfactor cyclic 2\n";
        let err = load_group_spec(doc).unwrap_err();
        assert!(err.to_string().contains("not associative"), "{err}");
    }

    #[test]
    fn s3_alone_needs_two_factors() {
        let doc = s3_table_text();
        let err = load_group_spec(&doc).unwrap_err();
        assert!(err.to_string().contains("need n ≥ 2"), "{err}");
        let fp = load_group_spec(&format!("{doc}factor cyclic 2\n")).unwrap();
        assert_eq!(fp.factor(0).order(), 6);
        assert_eq!(fp.factor(0).table(), FactorGroup::sym3(1).unwrap().table());
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = load_group_spec("# hi\nfactor cyclic 2\nfactor blob\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 3,
                msg: "unrecognised line `factor blob`".into()
            }
        );
        let err = load_group_spec("factor cyclic 2\nfactor cyclic 2\nlambda 1 0\n").unwrap_err();
        assert!(matches!(err, Error::Axiom { factor: 1, .. }));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let doc = format!(
            "factor cyclic 3\n{}factor sym 3\nlambda 1 2\nlambda 3 4\n",
            s3_table_text()
        );
        let fp = load_group_spec(&doc).unwrap();
        let out = write_group_spec(&fp);
        assert_eq!(out, doc);
        assert_eq!(load_group_spec(&out).unwrap(), fp);
    }
}
