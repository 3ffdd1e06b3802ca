//! Text energy files.
//!
//! ```text
//! TMCM <n> <h> <dist> <M> <m> <scale>
//! U <a> <v_1> ... <v_h>          one line per variable
//! C <weight> <k> <a_1> ... <a_k> one line per clique
//! ```
//!
//! `dist` is `linear`, `quadratic` or `table:v0,v1,...`. Variable ids are
//! 0-based. Unaries may be negative and are shifted per variable at load.
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::IoError;
use crate::model::{Clique, DistanceKind, DistanceSpec, Energy, Label, Labeling, Model};

fn parse_err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_dist(token: &str, line: usize) -> Result<DistanceKind, IoError> {
    token.parse().map_err(|e: String| parse_err(line, e))
}

fn number<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T, IoError> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("bad {what} '{token}'")))
}

pub fn parse_model(text: &str) -> Result<Model, IoError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| parse_err(0, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 7 || fields[0] != "TMCM" {
        return Err(parse_err(hline, "expected 'TMCM n h dist M m scale'"));
    }
    let n: usize = number(fields[1], hline, "variable count")?;
    let h: usize = number(fields[2], hline, "label count")?;
    let kind = parse_dist(fields[3], hline)?;
    let truncation: Energy = number(fields[4], hline, "truncation")?;
    let max_pairs: usize = number(fields[5], hline, "pair count")?;
    let scale: u64 = number(fields[6], hline, "scale")?;
    if scale == 0 {
        return Err(parse_err(hline, "scale must be positive"));
    }

    let mut unary: Vec<Option<Vec<i64>>> = vec![None; n];
    let mut cliques = Vec::new();
    for (line, body) in lines {
        let fields: Vec<&str> = body.split_whitespace().collect();
        match fields[0] {
            "U" => {
                if fields.len() != h + 2 {
                    return Err(parse_err(
                        line,
                        format!(
                            "unary row has {} values, expected {h}",
                            fields.len().saturating_sub(2)
                        ),
                    ));
                }
                let a: usize = number(fields[1], line, "variable id")?;
                if a >= n {
                    return Err(parse_err(line, format!("variable {a} out of range")));
                }
                if unary[a].is_some() {
                    return Err(parse_err(line, format!("duplicate unary row for {a}")));
                }
                let row = fields[2..]
                    .iter()
                    .map(|v| number::<i64>(v, line, "unary"))
                    .collect::<Result<Vec<_>, _>>()?;
                unary[a] = Some(row);
            }
            "C" => {
                if fields.len() < 3 {
                    return Err(parse_err(line, "clique line needs weight and size"));
                }
                let weight: Energy = number(fields[1], line, "weight")?;
                let k: usize = number(fields[2], line, "clique size")?;
                if fields.len() != k + 3 {
                    return Err(parse_err(
                        line,
                        format!("clique lists {} members, expected {k}", fields.len() - 3),
                    ));
                }
                let members = fields[3..]
                    .iter()
                    .map(|v| number::<usize>(v, line, "member id"))
                    .collect::<Result<Vec<_>, _>>()?;
                cliques.push(Clique::new(members, weight));
            }
            other => return Err(parse_err(line, format!("unknown record '{other}'"))),
        }
    }
    let mut flat = Vec::with_capacity(n * h);
    for (a, row) in unary.into_iter().enumerate() {
        flat.extend(
            row.ok_or_else(|| parse_err(0, format!("missing unary row for variable {a}")))?,
        );
    }
    let dist = DistanceSpec::new(kind, truncation, max_pairs);
    Ok(Model::with_signed_unary(n, h, flat, cliques, dist)?.with_scale(scale))
}

/// Writes the (shifted, non-negative) unaries of `model`.
pub fn format_model(model: &Model) -> String {
    let mut out = String::new();
    let dist = model.dist();
    let _ = writeln!(
        out,
        "TMCM {} {} {} {} {} {}",
        model.num_vars(),
        model.num_labels(),
        dist.kind,
        dist.truncation,
        dist.max_pairs,
        model.scale()
    );
    for a in 0..model.num_vars() {
        out.push_str("U ");
        out.push_str(&a.to_string());
        for v in model.unary_row(a) {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    for clique in model.cliques() {
        let _ = write!(out, "C {} {}", clique.weight, clique.size());
        for m in &clique.members {
            let _ = write!(out, " {m}");
        }
        out.push('\n');
    }
    out
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model, IoError> {
    parse_model(&std::fs::read_to_string(path)?)
}

pub fn save_model(path: impl AsRef<Path>, model: &Model) -> Result<(), IoError> {
    Ok(std::fs::write(path, format_model(model))?)
}

/// One 1-based label per line.
pub fn format_labeling(labeling: &Labeling) -> String {
    let mut out = String::with_capacity(labeling.len() * 3);
    for l in labeling.labels() {
        let _ = writeln!(out, "{l}");
    }
    out
}

/// Whitespace-separated labels; `#` starts a comment line.
pub fn parse_labeling(text: &str) -> Result<Labeling, IoError> {
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim_start().starts_with('#') {
            continue;
        }
        for token in line.split_whitespace() {
            labels.push(number::<Label>(token, i + 1, "label")?);
        }
    }
    Ok(Labeling(labels))
}

pub fn load_labeling(path: impl AsRef<Path>) -> Result<Labeling, IoError> {
    parse_labeling(&std::fs::read_to_string(path)?)
}

pub fn save_labeling_text(path: impl AsRef<Path>, labeling: &Labeling) -> Result<(), IoError> {
    Ok(std::fs::write(path, format_labeling(labeling))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelError;

    const SAMPLE: &str = "\
# two variables, one clique
TMCM 2 3 linear 2 1 10
U 0 1 0 4
U 1 -2 3 0
C 5 2 0 1
";

    #[test]
    fn parses_and_shifts() {
        let model = parse_model(SAMPLE).unwrap();
        assert_eq!(model.num_vars(), 2);
        assert_eq!(model.unary_row(1), &[0, 5, 2]);
        assert_eq!(model.unary_shift(), 2);
        assert_eq!(model.scale(), 10);
        assert_eq!(model.cliques()[0].weight, 5);
    }

    #[test]
    fn round_trip() {
        let model = parse_model(SAMPLE).unwrap();
        let again = parse_model(&format_model(&model)).unwrap();
        assert_eq!(format_model(&again), format_model(&model));
        assert_eq!(again.unary_row(1), model.unary_row(1));
    }

    #[test]
    fn count_mismatches() {
        let short_row = SAMPLE.replace("U 0 1 0 4", "U 0 1 0");
        assert!(matches!(
            parse_model(&short_row),
            Err(IoError::Parse { line: 3, .. })
        ));
        let short_clique = SAMPLE.replace("C 5 2 0 1", "C 5 3 0 1");
        assert!(matches!(
            parse_model(&short_clique),
            Err(IoError::Parse { line: 5, .. })
        ));
        let missing = SAMPLE.replace("U 1 -2 3 0\n", "");
        assert!(matches!(parse_model(&missing), Err(IoError::Parse { .. })));
    }

    #[test]
    fn table_distance_is_validated() {
        let good = SAMPLE.replace("linear", "table:0,1,3");
        assert!(parse_model(&good).is_ok());
        let bad = SAMPLE.replace("linear", "table:0,2,3");
        assert!(matches!(
            parse_model(&bad),
            Err(IoError::Model(ModelError::ConvexityViolation(1)))
        ));
    }

    #[test]
    fn rejects_garbage_header() {
        assert!(parse_model("TMCM 2 3 linear").is_err());
        assert!(parse_model("").is_err());
        assert!(parse_model("TMCM 1 1 cubic 1 1 1\nU 0 0\n").is_err());
    }
}
