//! Reader and writer for a subset of the EPANET INP text format.
//!
//! Only `[JUNCTIONS]`, `[RESERVOIRS]` and `[PIPES]` are understood. `;` starts
//! a comment and columns are whitespace separated:
//!
//! ```text
//! [JUNCTIONS]  id  demand_m3s
//! [RESERVOIRS] id  head_m
//! [PIPES]      id  from  to  length_m  diameter_m
//! ```
//!
//! An optional `[END]` marker stops parsing. Any other section header is an
//! error.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Junction, Pipe, PipeNetwork, Reservoir};
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Junctions,
    Reservoirs,
    Pipes,
}

fn number(field: &str, what: &str, line: usize) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Syntax {
        line,
        message: format!("cannot parse {what} \"{field}\" as a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Syntax {
            line,
            message: format!("{what} must be finite"),
        });
    }
    Ok(v)
}

fn expect_columns(cols: &[&str], n: usize, section: &str, line: usize) -> Result<()> {
    if cols.len() != n {
        return Err(Error::Syntax {
            line,
            message: format!("[{section}] expects {n} columns, found {}", cols.len()),
        });
    }
    Ok(())
}

/// Parses INP text into a validated [`PipeNetwork`].
pub fn parse_inp(text: &str) -> Result<PipeNetwork> {
    let mut section = Section::None;
    let mut present = [false; 3];
    let mut junctions = Vec::new();
    let mut reservoirs = Vec::new();
    let mut pipes: Vec<(usize, Pipe)> = Vec::new();
    let mut node_lines: HashMap<String, usize> = HashMap::new();
    let mut pipe_lines: HashMap<String, usize> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split(';').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            let name = content
                .strip_suffix(']')
                .map(|s| s[1..].trim().to_ascii_uppercase())
                .ok_or_else(|| Error::Syntax {
                    line,
                    message: format!("malformed section header \"{content}\""),
                })?;
            section = match name.as_str() {
                "JUNCTIONS" => Section::Junctions,
                "RESERVOIRS" => Section::Reservoirs,
                "PIPES" => Section::Pipes,
                "END" => break,
                _ => return Err(Error::UnsupportedSection { line, section: name }),
            };
            present[section as usize - 1] = true;
            continue;
        }
        let cols: Vec<&str> = content.split_whitespace().collect();
        match section {
            Section::None => {
                return Err(Error::Syntax {
                    line,
                    message: "data line outside of any section".into(),
                })
            }
            Section::Junctions => {
                expect_columns(&cols, 2, "JUNCTIONS", line)?;
                let demand = number(cols[1], "demand", line)?;
                if demand < 0.0 {
                    return Err(Error::Syntax {
                        line,
                        message: "demand must be non-negative".into(),
                    });
                }
                if node_lines.insert(cols[0].to_string(), line).is_some() {
                    return Err(Error::DuplicateId {
                        line,
                        id: cols[0].into(),
                    });
                }
                junctions.push(Junction {
                    id: cols[0].into(),
                    demand,
                });
            }
            Section::Reservoirs => {
                expect_columns(&cols, 2, "RESERVOIRS", line)?;
                let head = number(cols[1], "head", line)?;
                if node_lines.insert(cols[0].to_string(), line).is_some() {
                    return Err(Error::DuplicateId {
                        line,
                        id: cols[0].into(),
                    });
                }
                reservoirs.push(Reservoir {
                    id: cols[0].into(),
                    head,
                });
            }
            Section::Pipes => {
                expect_columns(&cols, 5, "PIPES", line)?;
                let length = number(cols[3], "length", line)?;
                let diameter = number(cols[4], "diameter", line)?;
                if length <= 0.0 || diameter <= 0.0 {
                    return Err(Error::Syntax {
                        line,
                        message: "length and diameter must be positive".into(),
                    });
                }
                if cols[1] == cols[2] {
                    return Err(Error::Syntax {
                        line,
                        message: format!("pipe \"{}\" is a self-loop", cols[0]),
                    });
                }
                if pipe_lines.insert(cols[0].to_string(), line).is_some() {
                    return Err(Error::DuplicateId {
                        line,
                        id: cols[0].into(),
                    });
                }
                pipes.push((
                    line,
                    Pipe {
                        id: cols[0].into(),
                        from: cols[1].into(),
                        to: cols[2].into(),
                        length,
                        diameter,
                    },
                ));
            }
        }
    }

    for (i, name) in ["JUNCTIONS", "RESERVOIRS", "PIPES"].into_iter().enumerate() {
        if !present[i] {
            return Err(Error::MissingSection(name));
        }
    }
    for (line, p) in &pipes {
        for end in [&p.from, &p.to] {
            if !node_lines.contains_key(end.as_str()) {
                return Err(Error::UnknownNode {
                    line: *line,
                    id: end.clone(),
                });
            }
        }
    }
    PipeNetwork::new(junctions, reservoirs, pipes.into_iter().map(|(_, p)| p).collect())
}

/// Writes a network in the INP subset accepted by [`parse_inp`].
///
/// Numbers use the shortest representation that parses back to the same
/// `f64`, so `parse_inp(&serialize_inp(net)) == net`.
pub fn serialize_inp(net: &PipeNetwork) -> String {
    let mut out = String::new();
    out.push_str("[JUNCTIONS]\n;id\tdemand_m3s\n");
    for j in &net.junctions {
        let _ = writeln!(out, "{}\t{}", j.id, j.demand);
    }
    out.push_str("\n[RESERVOIRS]\n;id\thead_m\n");
    for r in &net.reservoirs {
        let _ = writeln!(out, "{}\t{}", r.id, r.head);
    }
    out.push_str("\n[PIPES]\n;id\tfrom\tto\tlength_m\tdiameter_m\n");
    for p in &net.pipes {
        let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", p.id, p.from, p.to, p.length, p.diameter);
    }
    out.push_str("\n[END]\n");
    out
}
