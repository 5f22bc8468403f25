//! Extended-XYZ reading and writing.
//!
//! Frame layout:
//!
//! ```text
//! <natoms>
//! Lattice="ax ay az bx by bz cx cy cz" Properties=species:S:1:pos:R:3:forces:R:3 energy=-1.5 pbc="T T T"
//! <species> <x> <y> <z> [<fx> <fy> <fz>]
//! ```
//!
//! Unknown comment keys and unknown per-atom columns are skipped on read.

use std::fmt::Write as _;
use std::path::Path;

use crate::dataset::{Configuration, Dataset};
use crate::error::{Error, Result};
use crate::geometry::Cell;

#[derive(Debug, Clone, Copy, PartialEq)]
enum ColumnKind {
    Str,
    Real,
    Int,
    Logical,
}

#[derive(Debug, Clone)]
struct Column {
    name: String,
    kind: ColumnKind,
    width: usize,
}

fn parse_properties(spec: &str) -> std::result::Result<Vec<Column>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if !parts.len().is_multiple_of(3) {
        return Err(format!("malformed Properties '{spec}'"));
    }
    parts
        .chunks(3)
        .map(|c| {
            let kind = match c[1] {
                "S" => ColumnKind::Str,
                "R" => ColumnKind::Real,
                "I" => ColumnKind::Int,
                "L" => ColumnKind::Logical,
                other => return Err(format!("unknown property type '{other}'")),
            };
            let width = c[2]
                .parse::<usize>()
                .map_err(|_| format!("bad property width '{}'", c[2]))?;
            Ok(Column {
                name: c[0].to_string(),
                kind,
                width,
            })
        })
        .collect()
}

/// Split an extxyz comment line into `key=value` pairs.
///
/// Values may be double-quoted; keys without `=` are treated as boolean flags.
fn tokenize_comment(line: &str) -> std::result::Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        if chars.peek().is_none() {
            break;
        }
        let mut key = String::new();
        while let Some(&c) = chars.peek() {
            if c == '=' || c.is_whitespace() {
                break;
            }
            key.push(c);
            chars.next();
        }
        if chars.peek() != Some(&'=') {
            out.push((key, "T".to_string()));
            continue;
        }
        chars.next();
        let mut value = String::new();
        match chars.peek() {
            Some(&q @ ('"' | '\'')) => {
                chars.next();
                let mut closed = false;
                for c in chars.by_ref() {
                    if c == q {
                        closed = true;
                        break;
                    }
                    value.push(c);
                }
                if !closed {
                    return Err(format!("unterminated quote in value of '{key}'"));
                }
            }
            _ => {
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() {
                        break;
                    }
                    value.push(c);
                    chars.next();
                }
            }
        }
        out.push((key, value));
    }
    Ok(out)
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "T" | "True" | "true" | "1" => Some(true),
        "F" | "False" | "false" | "0" => Some(false),
        _ => None,
    }
}

/// Parse every frame of an extended-XYZ stream.
pub fn parse_frames(text: &str) -> Result<Vec<Configuration>> {
    let lines: Vec<&str> = text.lines().collect();
    let mut frames = Vec::new();
    let mut cursor = 0usize;

    loop {
        while cursor < lines.len() && lines[cursor].trim().is_empty() {
            cursor += 1;
        }
        if cursor >= lines.len() {
            break;
        }
        let frame = frames.len();
        let perr = |line: usize, message: String| Error::Parse {
            frame,
            line: line + 1,
            message,
        };

        let natoms: usize = lines[cursor].trim().parse().map_err(|_| {
            perr(
                cursor,
                format!("expected atom count, got '{}'", lines[cursor]),
            )
        })?;
        let comment_idx = cursor + 1;
        let comment = *lines
            .get(comment_idx)
            .ok_or_else(|| perr(comment_idx, "missing comment line".into()))?;
        let pairs = tokenize_comment(comment).map_err(|m| perr(comment_idx, m))?;

        let mut columns = parse_properties("species:S:1:pos:R:3").expect("default properties");
        let mut energy = None;
        let mut temperature = None;
        let mut lattice = None;
        let mut pbc = None;
        for (key, value) in &pairs {
            match key.as_str() {
                "Properties" | "properties" => {
                    columns = parse_properties(value).map_err(|m| perr(comment_idx, m))?;
                }
                "energy" => {
                    let e: f64 = value
                        .parse()
                        .map_err(|_| perr(comment_idx, format!("non-numeric energy '{value}'")))?;
                    energy = Some(e);
                }
                "temperature" => {
                    let t: f64 = value.parse().map_err(|_| {
                        perr(comment_idx, format!("non-numeric temperature '{value}'"))
                    })?;
                    temperature = Some(t);
                }
                "Lattice" | "lattice" => {
                    let v: Vec<f64> = value
                        .split_whitespace()
                        .map(str::parse)
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| perr(comment_idx, format!("non-numeric Lattice '{value}'")))?;
                    if v.len() != 9 {
                        return Err(perr(comment_idx, "Lattice needs 9 numbers".into()));
                    }
                    lattice = Some([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]]);
                }
                "pbc" => {
                    let v: Vec<bool> = value
                        .split_whitespace()
                        .map(parse_bool)
                        .collect::<Option<_>>()
                        .ok_or_else(|| perr(comment_idx, format!("bad pbc '{value}'")))?;
                    if v.len() != 3 {
                        return Err(perr(comment_idx, "pbc needs 3 flags".into()));
                    }
                    pbc = Some([v[0], v[1], v[2]]);
                }
                _ => {}
            }
        }

        let find = |names: &[&str]| {
            let mut offset = 0;
            for c in &columns {
                if names.contains(&c.name.as_str()) {
                    return Some((offset, c.clone()));
                }
                offset += c.width;
            }
            None
        };
        let (species_col, sc) = find(&["species"])
            .ok_or_else(|| perr(comment_idx, "Properties lacks species".into()))?;
        let (pos_col, pc) =
            find(&["pos"]).ok_or_else(|| perr(comment_idx, "Properties lacks pos".into()))?;
        if sc.kind != ColumnKind::Str || pc.kind != ColumnKind::Real || pc.width != 3 {
            return Err(perr(comment_idx, "species must be S:1 and pos R:3".into()));
        }
        let force_col = match find(&["forces", "force"]) {
            Some((off, c)) if c.kind == ColumnKind::Real && c.width == 3 => Some(off),
            Some(_) => return Err(perr(comment_idx, "forces must be R:3".into())),
            None => None,
        };
        let total_width: usize = columns.iter().map(|c| c.width).sum();

        let mut species = Vec::with_capacity(natoms);
        let mut positions = Vec::with_capacity(natoms);
        let mut forces = force_col.map(|_| Vec::with_capacity(natoms));
        for a in 0..natoms {
            let li = comment_idx + 1 + a;
            let line = lines.get(li).ok_or_else(|| {
                perr(
                    li,
                    format!("atom-count mismatch: expected {natoms} atoms, found {a}"),
                )
            })?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != total_width {
                return Err(perr(
                    li,
                    format!("expected {total_width} columns, found {}", fields.len()),
                ));
            }
            let real = |k: usize| -> Result<f64> {
                fields[k]
                    .parse::<f64>()
                    .map_err(|_| perr(li, format!("non-numeric field '{}'", fields[k])))
            };
            species.push(fields[species_col].to_string());
            positions.push([real(pos_col)?, real(pos_col + 1)?, real(pos_col + 2)?]);
            if let (Some(off), Some(f)) = (force_col, forces.as_mut()) {
                f.push([real(off)?, real(off + 1)?, real(off + 2)?]);
            }
        }

        let cell = lattice.map(|lattice| Cell {
            lattice,
            pbc: pbc.unwrap_or([true; 3]),
        });
        let config = Configuration {
            positions,
            species,
            cell,
            energy,
            forces,
            temperature,
        };
        config
            .validate()
            .map_err(|e| perr(comment_idx, e.to_string()))?;
        frames.push(config);
        cursor = comment_idx + 1 + natoms;
    }
    Ok(frames)
}

/// 17 significant digits, enough to round-trip any f64.
fn fmt_f64(out: &mut String, v: f64) {
    write!(out, "{v:.16e}").expect("writing to String");
}

fn fmt_bool(b: bool) -> char {
    if b {
        'T'
    } else {
        'F'
    }
}

pub fn write_frame(out: &mut String, c: &Configuration) {
    writeln!(out, "{}", c.len()).expect("writing to String");
    let mut header = Vec::new();
    if let Some(cell) = &c.cell {
        let mut s = String::from("Lattice=\"");
        for (k, v) in cell.lattice.iter().flatten().enumerate() {
            if k > 0 {
                s.push(' ');
            }
            fmt_f64(&mut s, *v);
        }
        s.push('"');
        header.push(s);
    }
    header.push(if c.forces.is_some() {
        "Properties=species:S:1:pos:R:3:forces:R:3".to_string()
    } else {
        "Properties=species:S:1:pos:R:3".to_string()
    });
    if let Some(e) = c.energy {
        let mut s = String::from("energy=");
        fmt_f64(&mut s, e);
        header.push(s);
    }
    if let Some(t) = c.temperature {
        let mut s = String::from("temperature=");
        fmt_f64(&mut s, t);
        header.push(s);
    }
    if let Some(cell) = &c.cell {
        header.push(format!(
            "pbc=\"{} {} {}\"",
            fmt_bool(cell.pbc[0]),
            fmt_bool(cell.pbc[1]),
            fmt_bool(cell.pbc[2])
        ));
    }
    out.push_str(&header.join(" "));
    out.push('\n');
    for a in 0..c.len() {
        out.push_str(&c.species[a]);
        for v in c.positions[a] {
            out.push(' ');
            fmt_f64(out, v);
        }
        if let Some(f) = &c.forces {
            for v in f[a] {
                out.push(' ');
                fmt_f64(out, v);
            }
        }
        out.push('\n');
    }
}

/// Serialize a dataset as extended XYZ.
pub fn write_extxyz(d: &Dataset) -> String {
    let mut out = String::new();
    for c in d.configurations() {
        write_frame(&mut out, c);
    }
    out
}

/// Parse an extended-XYZ stream into a dataset named `name`.
pub fn parse_extxyz(name: &str, text: &str) -> Result<Dataset> {
    Dataset::new(name, parse_frames(text)?)
}

pub fn read_extxyz(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    parse_extxyz(&name, &text)
}

pub fn write_extxyz_file(d: &Dataset, path: &Path) -> Result<()> {
    std::fs::write(path, write_extxyz(d)).map_err(|e| Error::file(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_frame() {
        let d = parse_extxyz("m", "1\nenergy=-1.0\nH 0 0 0").unwrap();
        let c = &d.configurations()[0];
        assert_eq!(c.len(), 1);
        assert_eq!(c.energy, Some(-1.0));
        assert!(c.forces.is_none());
        assert_eq!(c.species[0], "H");
    }

    #[test]
    fn tokenizer_handles_quotes_and_flags() {
        let t = tokenize_comment(r#"a=1 Lattice="1 0 0 0 1 0 0 0 1" flag b='x y'"#).unwrap();
        assert_eq!(t[0], ("a".into(), "1".into()));
        assert_eq!(t[1].1, "1 0 0 0 1 0 0 0 1");
        assert_eq!(t[2], ("flag".into(), "T".into()));
        assert_eq!(t[3], ("b".into(), "x y".into()));
    }

    #[test]
    fn errors_carry_frame_index() {
        let text = "1\nenergy=0\nH 0 0 0\n2\nenergy=0\nH 0 0 0\n";
        match parse_frames(text) {
            Err(Error::Parse { frame, .. }) => assert_eq!(frame, 1),
            other => panic!("unexpected {other:?}"),
        }
        let bad_count = "x\n\nH 0 0 0\n";
        assert!(matches!(
            parse_frames(bad_count),
            Err(Error::Parse { frame: 0, .. })
        ));
        let bad_num = "1\nenergy=abc\nH 0 0 0\n";
        assert!(matches!(
            parse_frames(bad_num),
            Err(Error::Parse { frame: 0, .. })
        ));
        let bad_field = "1\n\nH 0 zero 0\n";
        assert!(matches!(
            parse_frames(bad_field),
            Err(Error::Parse { frame: 0, .. })
        ));
    }

    #[test]
    fn skips_unknown_columns() {
        let text = "1\nProperties=species:S:1:pos:R:3:Z:I:1:forces:R:3 energy=2 config_type=x\nC 1 2 3 6 0.1 0.2 0.3\n";
        let d = parse_extxyz("x", text).unwrap();
        let c = &d.configurations()[0];
        assert_eq!(c.positions[0], [1.0, 2.0, 3.0]);
        assert_eq!(c.forces.as_ref().unwrap()[0], [0.1, 0.2, 0.3]);
    }

    #[test]
    fn empty_forces_frame_omits_columns() {
        let d = parse_extxyz("m", "1\nenergy=-1.0\nH 0 0 0").unwrap();
        let text = write_extxyz(&d);
        assert!(text.contains("Properties=species:S:1:pos:R:3 "));
        assert!(!text.contains("forces"));
        assert_eq!(text.lines().nth(2).unwrap().split_whitespace().count(), 4);
    }

    #[test]
    fn lattice_without_pbc_defaults_periodic() {
        let text = "1\nLattice=\"5 0 0 0 5 0 0 0 5\"\nAr 0 0 0\n";
        let d = parse_extxyz("x", text).unwrap();
        assert_eq!(d.configurations()[0].cell.unwrap().pbc, [true; 3]);
    }
}
