//! Line-oriented configuration grammar shared by the CLI and the demo
//! corpus.
//!
//! Sections: `[shift]` (states/edges/full), `[potential]` (depth + phi
//! lines), `[cocycle]` (group + psi lines), `[options]`, `[test]`
//! (a depth-≤2 test function g), `[equidist]` (cylinder, base point,
//! lengths, ε) and `[family]` (truncation family). `#` starts a comment;
//! unspecified potential and test values default to 0.
//!
//! Group words are space-separated generator tokens with an optional
//! `^-1` suffix: `x`, `y` (aliases g1, g2), `g1..gk`, `e` for the
//! identity; ℤ^d values are comma-separated integers, cyclic values are
//! residues.

use crate::bip::TruncationFamily;
use crate::equidist::TestFunction;
use crate::groups::{Cocycle, GroupElement, GroupKind};
use crate::shift::{Potential, ShiftSystem};
use crate::skew::{BasePoint, SkewSystem};
use crate::{Error, Result};

/// Numeric/budget knobs with documented defaults, echoed in manifests.
#[derive(Debug, Clone)]
pub struct Options {
    pub oracle_ceiling: usize,
    pub tol: f64,
    pub xi_tol: f64,
    pub budget_entries: usize,
    pub horizon: usize,
    pub n_max: Option<usize>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            oracle_ceiling: 20,
            tol: 1e-12,
            xi_tol: 1e-10,
            budget_entries: 200_000_000,
            horizon: 12,
            n_max: None,
        }
    }
}

/// `[equidist]` parameters.
#[derive(Debug, Clone)]
pub struct EquidistSpec {
    pub cylinder: u32,
    pub base_point: BasePoint,
    pub n_list: Vec<usize>,
    pub epsilon: f64,
}

/// `[family]` parameters.
#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub family: TruncationFamily,
    pub n_list: Vec<usize>,
}

/// A fully parsed and validated configuration.
#[derive(Debug, Clone)]
pub struct ParsedConfig {
    pub raw: String,
    pub system: SkewSystem,
    pub options: Options,
    pub test_function: Option<TestFunction>,
    pub equidist: Option<EquidistSpec>,
    pub family: Option<FamilySpec>,
}

impl ParsedConfig {
    pub fn shift(&self) -> &ShiftSystem {
        self.system.shift()
    }
}

/// Parse and validate a configuration document.
///
/// Beyond grammar errors (reported with line and column), this rejects
/// dead states, disconnected systems, potential or test values on
/// forbidden edges, unknown group names, and ill-formed base points.
pub fn parse_system(text: &str) -> Result<ParsedConfig> {
    let mut sections: Vec<(String, Vec<(usize, String)>)> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| Error::Parse {
                line: line_no,
                column: trimmed.len(),
                message: "section header missing closing ']'".into(),
            })?;
            sections.push((name.trim().to_lowercase(), Vec::new()));
        } else {
            match sections.last_mut() {
                Some((_, lines)) => lines.push((line_no, trimmed.to_string())),
                None => {
                    return Err(Error::Parse {
                        line: line_no,
                        column: 1,
                        message: "content before the first [section] header".into(),
                    })
                }
            }
        }
    }
    let mut shift_lines = None;
    let mut potential_lines: Vec<(usize, String)> = Vec::new();
    let mut cocycle_lines: Vec<(usize, String)> = Vec::new();
    let mut options_lines: Vec<(usize, String)> = Vec::new();
    let mut test_lines: Vec<(usize, String)> = Vec::new();
    let mut equidist_lines: Vec<(usize, String)> = Vec::new();
    let mut family_lines: Vec<(usize, String)> = Vec::new();
    for (name, lines) in sections {
        match name.as_str() {
            "shift" => shift_lines = Some(lines),
            "potential" => potential_lines = lines,
            "cocycle" => cocycle_lines = lines,
            "options" => options_lines = lines,
            "test" => test_lines = lines,
            "equidist" => equidist_lines = lines,
            "family" => family_lines = lines,
            other => {
                let line = lines.first().map(|(l, _)| l.saturating_sub(1)).unwrap_or(1);
                return Err(Error::Parse {
                    line,
                    column: 1,
                    message: format!("unknown section [{other}]"),
                });
            }
        }
    }
    let shift = parse_shift(shift_lines.ok_or_else(|| Error::Parse {
        line: 1,
        column: 1,
        message: "missing [shift] section".into(),
    })?)?;
    if !shift.transitive() {
        let unreachable = find_unreachable(&shift);
        return Err(Error::Validation(format!(
            "system is disconnected: state {} is not reachable from state {} in both directions",
            shift.label(unreachable),
            shift.label(0)
        )));
    }
    let potential = parse_table(&potential_lines, "phi", &shift)?;
    let cocycle = parse_cocycle(&cocycle_lines, shift.state_count())?;
    let options = parse_options(&options_lines)?;
    let test_function = if test_lines.is_empty() {
        None
    } else {
        Some(parse_table(&test_lines, "g", &shift)?)
    };
    let equidist = parse_equidist(&equidist_lines, &shift)?;
    let family = parse_family(&family_lines)?;
    let system = SkewSystem::new(shift, potential, cocycle)?;
    Ok(ParsedConfig {
        raw: text.to_string(),
        system,
        options,
        test_function,
        equidist,
        family,
    })
}

fn find_unreachable(s: &ShiftSystem) -> u32 {
    // first state not forward-reachable from 0, else not backward-reachable
    let mut seen = vec![false; s.state_count()];
    let mut stack = vec![0u32];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in s.successors(u) {
            if !seen[v as usize] {
                seen[v as usize] = true;
                stack.push(v);
            }
        }
    }
    if let Some(i) = seen.iter().position(|&b| !b) {
        return i as u32;
    }
    let mut seen = vec![false; s.state_count()];
    let mut stack = vec![0u32];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in s.predecessors(u) {
            if !seen[v as usize] {
                seen[v as usize] = true;
                stack.push(v);
            }
        }
    }
    seen.iter().position(|&b| !b).unwrap_or(0) as u32
}

fn split_kv(line_no: usize, line: &str) -> Result<(String, String)> {
    match line.split_once('=') {
        Some((k, v)) => Ok((k.trim().to_lowercase(), v.trim().to_string())),
        None => Err(Error::Parse {
            line: line_no,
            column: line.len(),
            message: "expected `key = value`".into(),
        }),
    }
}

fn parse_shift(lines: Vec<(usize, String)>) -> Result<ShiftSystem> {
    let mut states: Option<usize> = None;
    let mut full = false;
    let mut edges: Vec<(usize, usize, usize)> = Vec::new(); // (line, i, j) 1-based
    for (line_no, line) in &lines {
        let (key, value) = split_kv(*line_no, line)?;
        match key.as_str() {
            "states" => {
                states = Some(parse_num(*line_no, &value)?);
            }
            "full" => {
                full = value.eq_ignore_ascii_case("true") || value == "1";
            }
            "edges" => {
                for tok in value.split([',', ' ']).filter(|t| !t.trim().is_empty()) {
                    let tok = tok.trim();
                    let (a, b) = tok.split_once("->").ok_or_else(|| Error::Parse {
                        line: *line_no,
                        column: line.find(tok).unwrap_or(0) + 1,
                        message: format!("edge `{tok}` is not of the form i->j"),
                    })?;
                    edges.push((
                        *line_no,
                        parse_num(*line_no, a.trim())?,
                        parse_num(*line_no, b.trim())?,
                    ));
                }
            }
            other => {
                return Err(Error::Parse {
                    line: *line_no,
                    column: 1,
                    message: format!("unknown [shift] key `{other}`"),
                })
            }
        }
    }
    let s = states.ok_or_else(|| Error::Parse {
        line: lines.first().map(|(l, _)| *l).unwrap_or(1),
        column: 1,
        message: "[shift] needs `states = <int>`".into(),
    })?;
    if s == 0 {
        return Err(Error::Validation("states must be ≥ 1".into()));
    }
    let mut adjacency = vec![vec![full; s]; s];
    for (line_no, i, j) in edges {
        if i == 0 || j == 0 || i > s || j > s {
            return Err(Error::Parse {
                line: line_no,
                column: 1,
                message: format!("edge {i}->{j} outside 1..={s}"),
            });
        }
        adjacency[i - 1][j - 1] = true;
    }
    ShiftSystem::new(adjacency)
}

/// Shared parser for `[potential]` (phi lines) and `[test]` (g lines).
fn parse_table(
    lines: &[(usize, String)],
    key_name: &str,
    shift: &ShiftSystem,
) -> Result<Potential> {
    let s = shift.state_count();
    let mut depth: Option<u8> = None;
    let mut d1 = vec![0.0f64; s];
    let mut d2 = vec![0.0f64; s * s];
    let mut saw_pair = false;
    let mut assignments: Vec<(usize, usize, Option<usize>, f64)> = Vec::new();
    for (line_no, line) in lines {
        let (key, value) = split_kv(*line_no, line)?;
        if key == "depth" {
            let d: u8 = parse_num(*line_no, &value)? as u8;
            if d != 1 && d != 2 {
                return Err(Error::Parse {
                    line: *line_no,
                    column: 1,
                    message: "depth must be 1 or 2".into(),
                });
            }
            depth = Some(d);
            continue;
        }
        let parts: Vec<&str> = key.split_whitespace().collect();
        if parts.is_empty() || parts[0] != key_name {
            return Err(Error::Parse {
                line: *line_no,
                column: 1,
                message: format!("expected `{key_name} i [j] = value` or `depth = 1|2`"),
            });
        }
        let val: f64 = value.parse().map_err(|_| Error::Parse {
            line: *line_no,
            column: line.find('=').unwrap_or(0) + 2,
            message: format!("`{value}` is not a number"),
        })?;
        match parts.len() {
            2 => {
                let i = parse_num(*line_no, parts[1])?;
                assignments.push((*line_no, i, None, val));
            }
            3 => {
                let i = parse_num(*line_no, parts[1])?;
                let j = parse_num(*line_no, parts[2])?;
                saw_pair = true;
                assignments.push((*line_no, i, Some(j), val));
            }
            _ => {
                return Err(Error::Parse {
                    line: *line_no,
                    column: 1,
                    message: format!("`{key_name}` takes one or two state indices"),
                })
            }
        }
    }
    let depth = depth.unwrap_or(if saw_pair { 2 } else { 1 });
    for (line_no, i, j, val) in assignments {
        if i == 0 || i > s {
            return Err(Error::Parse {
                line: line_no,
                column: 1,
                message: format!("state {i} outside 1..={s}"),
            });
        }
        match (depth, j) {
            (1, None) => d1[i - 1] = val,
            (2, Some(j)) => {
                if j == 0 || j > s {
                    return Err(Error::Parse {
                        line: line_no,
                        column: 1,
                        message: format!("state {j} outside 1..={s}"),
                    });
                }
                if !shift.allowed((i - 1) as u32, (j - 1) as u32) {
                    return Err(Error::Validation(format!(
                        "{key_name} {i} {j} assigns a value to the forbidden edge {i}->{j}"
                    )));
                }
                d2[(i - 1) * s + (j - 1)] = val;
            }
            (2, None) => {
                // depth-2 table, per-state line: constant in the second
                // coordinate
                for jj in 0..s {
                    if shift.allowed((i - 1) as u32, jj as u32) {
                        d2[(i - 1) * s + jj] = val;
                    }
                }
            }
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    column: 1,
                    message: format!("`{key_name} i j` needs depth = 2"),
                })
            }
        }
    }
    match depth {
        1 => Potential::depth1(d1),
        _ => Potential::depth2(shift, d2),
    }
}

fn parse_cocycle(lines: &[(usize, String)], states: usize) -> Result<Cocycle> {
    if lines.is_empty() {
        return Ok(Cocycle::trivial(GroupKind::Zd(0), states));
    }
    let mut kind: Option<GroupKind> = None;
    let mut values: Vec<Option<(usize, String)>> = vec![None; states];
    for (line_no, line) in lines {
        let (key, value) = split_kv(*line_no, line)?;
        if key == "group" {
            kind = Some(parse_group_kind(*line_no, &value)?);
            continue;
        }
        let parts: Vec<&str> = key.split_whitespace().collect();
        if parts.len() == 2 && parts[0] == "psi" {
            let i: usize = parse_num(*line_no, parts[1])?;
            if i == 0 || i > states {
                return Err(Error::Parse {
                    line: *line_no,
                    column: 1,
                    message: format!("state {i} outside 1..={states}"),
                });
            }
            values[i - 1] = Some((*line_no, value));
        } else {
            return Err(Error::Parse {
                line: *line_no,
                column: 1,
                message: "expected `group = ...` or `psi i = <group word>`".into(),
            });
        }
    }
    let kind = kind.ok_or_else(|| Error::Parse {
        line: lines[0].0,
        column: 1,
        message: "[cocycle] needs `group = zd <d> | free <k> | heisenberg | cyclic <m>`".into(),
    })?;
    let elements: Result<Vec<GroupElement>> = values
        .into_iter()
        .map(|slot| match slot {
            None => Ok(kind.identity()),
            Some((line_no, word)) => parse_group_word(line_no, kind, &word),
        })
        .collect();
    Cocycle::new(kind, elements?)
}

fn parse_group_kind(line_no: usize, value: &str) -> Result<GroupKind> {
    let toks: Vec<&str> = value.split_whitespace().collect();
    match toks.as_slice() {
        ["zd", d] => Ok(GroupKind::Zd(parse_num(line_no, d)?)),
        ["free", k] => {
            let k = parse_num(line_no, k)?;
            if k == 0 {
                return Err(Error::Validation("free rank must be ≥ 1".into()));
            }
            Ok(GroupKind::Free(k))
        }
        ["heisenberg"] => Ok(GroupKind::Heisenberg),
        ["cyclic", m] => {
            let m = parse_num(line_no, m)? as u64;
            if m == 0 {
                return Err(Error::Validation("cyclic modulus must be ≥ 1".into()));
            }
            Ok(GroupKind::Cyclic(m))
        }
        _ => Err(Error::Validation(format!(
            "unknown group `{value}` (expected zd <d> | free <k> | heisenberg | cyclic <m>)"
        ))),
    }
}

/// Parse a group word: ℤ^d as comma-separated integers, otherwise
/// space-separated generator tokens with optional `^-1`.
fn parse_group_word(line_no: usize, kind: GroupKind, word: &str) -> Result<GroupElement> {
    match kind {
        GroupKind::Zd(d) => {
            if word.trim() == "e" {
                return Ok(kind.identity());
            }
            let coords: Result<Vec<i64>> = word
                .split(',')
                .map(|t| {
                    t.trim().parse::<i64>().map_err(|_| Error::Parse {
                        line: line_no,
                        column: 1,
                        message: format!("`{t}` is not an integer"),
                    })
                })
                .collect();
            let coords = coords?;
            if coords.len() != d {
                return Err(Error::Validation(format!(
                    "ℤ^{d} value needs {d} coordinates, got {}",
                    coords.len()
                )));
            }
            Ok(GroupElement::Zd(coords))
        }
        GroupKind::Cyclic(m) => {
            if word.trim() == "e" {
                return Ok(kind.identity());
            }
            let r: i64 = word.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                column: 1,
                message: format!("`{word}` is not a residue"),
            })?;
            Ok(GroupElement::Cyclic {
                modulus: m,
                value: r.rem_euclid(m as i64) as u64,
            })
        }
        GroupKind::Free(k) => {
            let mut acc = kind.identity();
            for tok in word.split_whitespace() {
                if tok == "e" {
                    continue;
                }
                let (base, inverse) = split_power(line_no, tok)?;
                let idx = generator_index(line_no, &base, k)?;
                let letter = if inverse { -(idx as i8) } else { idx as i8 };
                acc = kind.op(&acc, &GroupElement::Free(vec![letter]))?;
            }
            Ok(acc)
        }
        GroupKind::Heisenberg => {
            let mut acc = kind.identity();
            for tok in word.split_whitespace() {
                if tok == "e" {
                    continue;
                }
                let (base, inverse) = split_power(line_no, tok)?;
                let gen = match base.as_str() {
                    "x" | "g1" => GroupElement::Heisenberg(1, 0, 0),
                    "y" | "g2" => GroupElement::Heisenberg(0, 1, 0),
                    other => {
                        return Err(Error::Validation(format!(
                            "unknown Heisenberg generator `{other}` (use x, y)"
                        )))
                    }
                };
                let gen = if inverse { kind.inv(&gen)? } else { gen };
                acc = kind.op(&acc, &gen)?;
            }
            Ok(acc)
        }
    }
}

fn split_power(line_no: usize, tok: &str) -> Result<(String, bool)> {
    match tok.split_once('^') {
        None => Ok((tok.to_lowercase(), false)),
        Some((base, "-1")) => Ok((base.to_lowercase(), true)),
        Some((_, exp)) => Err(Error::Parse {
            line: line_no,
            column: 1,
            message: format!("unsupported exponent `^{exp}` (only ^-1)"),
        }),
    }
}

fn generator_index(line_no: usize, base: &str, k: usize) -> Result<usize> {
    let idx = match base {
        "x" => 1,
        "y" => 2,
        other => match other
            .strip_prefix('g')
            .and_then(|n| n.parse::<usize>().ok())
        {
            Some(i) => i,
            None => {
                return Err(Error::Parse {
                    line: line_no,
                    column: 1,
                    message: format!("unknown generator `{base}`"),
                })
            }
        },
    };
    if idx == 0 || idx > k {
        return Err(Error::Validation(format!(
            "generator g{idx} outside the rank-{k} free group"
        )));
    }
    Ok(idx)
}

fn parse_options(lines: &[(usize, String)]) -> Result<Options> {
    let mut opts = Options::default();
    for (line_no, line) in lines {
        let (key, value) = split_kv(*line_no, line)?;
        let bad_num = |v: &str| Error::Parse {
            line: *line_no,
            column: 1,
            message: format!("`{v}` is not a number"),
        };
        match key.as_str() {
            "oracle_ceiling" => opts.oracle_ceiling = parse_num(*line_no, &value)?,
            "tol" => opts.tol = value.parse().map_err(|_| bad_num(&value))?,
            "xi_tol" => opts.xi_tol = value.parse().map_err(|_| bad_num(&value))?,
            "budget_entries" => opts.budget_entries = parse_num(*line_no, &value)?,
            "horizon" => opts.horizon = parse_num(*line_no, &value)?,
            "n_max" => opts.n_max = Some(parse_num(*line_no, &value)?),
            other => {
                return Err(Error::Parse {
                    line: *line_no,
                    column: 1,
                    message: format!("unknown [options] key `{other}`"),
                })
            }
        }
    }
    Ok(opts)
}

fn parse_equidist(lines: &[(usize, String)], shift: &ShiftSystem) -> Result<Option<EquidistSpec>> {
    if lines.is_empty() {
        return Ok(None);
    }
    let mut cylinder: Option<usize> = None;
    let mut base: Option<(Vec<u32>, Vec<u32>)> = None;
    let mut n_list: Vec<usize> = Vec::new();
    let mut epsilon = 0.1;
    for (line_no, line) in lines {
        let (key, value) = split_kv(*line_no, line)?;
        match key.as_str() {
            "a" => cylinder = Some(parse_num(*line_no, &value)?),
            "o" => {
                let (pre, cyc) = value.split_once('/').ok_or_else(|| Error::Parse {
                    line: *line_no,
                    column: 1,
                    message: "base point needs the form `o = [prefix] / cycle`".into(),
                })?;
                let parse_states = |part: &str| -> Result<Vec<u32>> {
                    part.split_whitespace()
                        .map(|t| {
                            let i: usize = parse_num(*line_no, t)?;
                            if i == 0 || i > shift.state_count() {
                                return Err(Error::Parse {
                                    line: *line_no,
                                    column: 1,
                                    message: format!(
                                        "state {i} outside 1..={}",
                                        shift.state_count()
                                    ),
                                });
                            }
                            Ok((i - 1) as u32)
                        })
                        .collect()
                };
                base = Some((parse_states(pre)?, parse_states(cyc)?));
            }
            "n_list" => {
                n_list = value
                    .split_whitespace()
                    .map(|t| parse_num(*line_no, t))
                    .collect::<Result<_>>()?;
            }
            "epsilon" => {
                epsilon = value.parse().map_err(|_| Error::Parse {
                    line: *line_no,
                    column: 1,
                    message: format!("`{value}` is not a number"),
                })?;
            }
            other => {
                return Err(Error::Parse {
                    line: *line_no,
                    column: 1,
                    message: format!("unknown [equidist] key `{other}`"),
                })
            }
        }
    }
    let cylinder = cylinder.unwrap_or(1);
    if cylinder == 0 || cylinder > shift.state_count() {
        return Err(Error::Validation(format!(
            "cylinder state {cylinder} outside 1..={}",
            shift.state_count()
        )));
    }
    let (prefix, cycle) = base.unwrap_or((Vec::new(), vec![0]));
    let base_point = BasePoint::new(shift, prefix, cycle)?;
    if n_list.is_empty() {
        n_list = vec![6, 10, 14, 18, 20];
    }
    Ok(Some(EquidistSpec {
        cylinder: (cylinder - 1) as u32,
        base_point,
        n_list,
        epsilon,
    }))
}

fn parse_family(lines: &[(usize, String)]) -> Result<Option<FamilySpec>> {
    if lines.is_empty() {
        return Ok(None);
    }
    let mut name: Option<String> = None;
    let mut beta = 2.0;
    let mut n_list: Vec<usize> = Vec::new();
    for (line_no, line) in lines {
        let (key, value) = split_kv(*line_no, line)?;
        match key.as_str() {
            "name" => name = Some(value.to_lowercase()),
            "beta" => {
                beta = value.parse().map_err(|_| Error::Parse {
                    line: *line_no,
                    column: 1,
                    message: format!("`{value}` is not a number"),
                })?;
            }
            "n_list" => {
                n_list = value
                    .split_whitespace()
                    .map(|t| parse_num(*line_no, t))
                    .collect::<Result<_>>()?;
            }
            other => {
                return Err(Error::Parse {
                    line: *line_no,
                    column: 1,
                    message: format!("unknown [family] key `{other}`"),
                })
            }
        }
    }
    let family = match name.as_deref() {
        Some("zeta") => TruncationFamily::zeta(beta)?,
        Some(other) => {
            return Err(Error::Validation(format!(
                "unknown family `{other}` (built-in: zeta)"
            )))
        }
        None => {
            return Err(Error::Parse {
                line: lines[0].0,
                column: 1,
                message: "[family] needs `name = zeta`".into(),
            })
        }
    };
    if n_list.is_empty() {
        n_list = vec![64, 128, 256, 512, 1024, 2048, 4096];
    }
    Ok(Some(FamilySpec { family, n_list }))
}

fn parse_num(line_no: usize, tok: &str) -> Result<usize> {
    tok.trim().parse::<usize>().map_err(|_| Error::Parse {
        line: line_no,
        column: 1,
        message: format!("`{tok}` is not a nonnegative integer"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN_MEAN: &str = "\
# golden mean, zero potential
[shift]
states = 2
edges = 1->1, 1->2, 2->1
[potential]
depth = 1
";

    #[test]
    fn golden_mean_parses() {
        let cfg = parse_system(GOLDEN_MEAN).unwrap();
        let s = cfg.shift();
        assert_eq!(s.state_count(), 2);
        assert!(s.mixing());
        assert_eq!(s.period(), 1);
        assert_eq!(cfg.system.ab_rank(), 0);
    }

    #[test]
    fn two_cycle_flags() {
        let cfg = parse_system("[shift]\nstates = 2\nedges = 1->2, 2->1\n").unwrap();
        assert!(cfg.shift().transitive());
        assert!(!cfg.shift().mixing());
        assert_eq!(cfg.shift().period(), 2);
    }

    #[test]
    fn forbidden_edge_value_rejected() {
        let text = "\
[shift]
states = 2
edges = 1->1, 1->2, 2->1
[potential]
depth = 2
phi 2 2 = 1.0
";
        let err = parse_system(text).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("forbidden edge 2->2"));
    }

    #[test]
    fn parse_error_carries_line() {
        let text = "[shift]\nstates = two\n";
        match parse_system(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn disconnected_rejected_with_state() {
        let text = "[shift]\nstates = 2\nedges = 1->1, 2->2, 2->1\n";
        let err = parse_system(text).unwrap_err();
        assert!(err.to_string().contains("disconnected"), "{err}");
    }

    #[test]
    fn dead_state_rejected_with_state() {
        let text = "[shift]\nstates = 2\nedges = 1->1, 2->1\n";
        let err = parse_system(text).unwrap_err();
        assert!(err.to_string().contains("dead state 2"), "{err}");
    }

    #[test]
    fn free_cocycle_words() {
        let text = "\
[shift]
states = 4
full = true
[cocycle]
group = free 2
psi 1 = x
psi 2 = x^-1
psi 3 = y
psi 4 = y^-1
";
        let cfg = parse_system(text).unwrap();
        let c = cfg.system.cocycle();
        assert_eq!(c.kind(), GroupKind::Free(2));
        assert!(c.product(&[0, 1, 2, 3]).unwrap().is_identity());
    }

    #[test]
    fn compound_group_word_reduces() {
        let text = "\
[shift]
states = 2
full = true
[cocycle]
group = free 2
psi 1 = x^-1 y
psi 2 = y^-1 x
";
        let cfg = parse_system(text).unwrap();
        assert!(cfg.system.cocycle().product(&[0, 1]).unwrap().is_identity());
        assert_eq!(cfg.system.cocycle().max_step_len(), Some(2));
    }

    #[test]
    fn zd_and_cyclic_and_heisenberg_values() {
        let text = "\
[shift]
states = 2
full = true
[cocycle]
group = zd 2
psi 1 = 1,0
psi 2 = -1,0
";
        let cfg = parse_system(text).unwrap();
        assert_eq!(cfg.system.cocycle().value(0), &GroupElement::Zd(vec![1, 0]));
        let text2 = "\
[shift]
states = 2
full = true
[cocycle]
group = cyclic 5
psi 1 = 3
psi 2 = -1
";
        let cfg2 = parse_system(text2).unwrap();
        assert_eq!(
            cfg2.system.cocycle().value(1),
            &GroupElement::Cyclic {
                modulus: 5,
                value: 4
            }
        );
        let text3 = "\
[shift]
states = 2
full = true
[cocycle]
group = heisenberg
psi 1 = x y
psi 2 = y^-1 x^-1
";
        let cfg3 = parse_system(text3).unwrap();
        assert_eq!(
            cfg3.system.cocycle().value(0),
            &GroupElement::Heisenberg(1, 1, 1)
        );
        assert!(cfg3
            .system
            .cocycle()
            .product(&[0, 1])
            .unwrap()
            .is_identity());
    }

    #[test]
    fn unknown_group_rejected() {
        let text = "[shift]\nstates = 2\nfull = true\n[cocycle]\ngroup = dihedral 3\n";
        let err = parse_system(text).unwrap_err();
        assert!(err.to_string().contains("unknown group"));
    }

    #[test]
    fn options_and_equidist_and_family() {
        let text = "\
[shift]
states = 2
full = true
[options]
oracle_ceiling = 14
tol = 1e-10
budget_entries = 1000000
n_max = 24
[test]
depth = 2
g 1 1 = 1.0
[equidist]
a = 1
o = / 1
n_list = 6 10 14
epsilon = 0.2
[family]
name = zeta
beta = 2.0
n_list = 64 128
";
        let cfg = parse_system(text).unwrap();
        assert_eq!(cfg.options.oracle_ceiling, 14);
        assert_eq!(cfg.options.n_max, Some(24));
        let eq = cfg.equidist.unwrap();
        assert_eq!(eq.cylinder, 0);
        assert_eq!(eq.n_list, vec![6, 10, 14]);
        assert_eq!(eq.epsilon, 0.2);
        let fam = cfg.family.unwrap();
        assert_eq!(fam.family.name(), "zeta");
        assert_eq!(fam.n_list, vec![64, 128]);
        let g = cfg.test_function.unwrap();
        assert_eq!(g.edge(0, 0), 1.0);
        assert_eq!(g.edge(0, 1), 0.0);
    }

    #[test]
    fn base_point_with_prefix() {
        let text = "\
[shift]
states = 2
edges = 1->1, 1->2, 2->1
[equidist]
o = 2 / 1
";
        let cfg = parse_system(text).unwrap();
        let eq = cfg.equidist.unwrap();
        assert_eq!(eq.base_point.first_symbol(), 1);
    }
}
