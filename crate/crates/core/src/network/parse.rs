//! Line-oriented case file reader.
//!
//! ```text
//! [base_mva]
//! 100
//! [bus]
//! # id type pd_mw qd_mvar gs_mw bs_mvar [vmin vmax]     type: 1 PQ, 2 PV, 3 slack
//! [generator]
//! # bus pg_mw vg_pu qmin_mvar qmax_mvar [vmin vmax]
//! [branch]
//! # from to r x b [rate_mva [ratio]]                   rate 0 = unrated, ratio 0 = nominal
//! [transformer]
//! # from to tmin tmax step                             endpoints must match a branch row
//! [shunt]
//! # bus banks mvar_per_bank [initial_banks]
//! ```
//!
//! `#` starts a comment anywhere on a line. Bus voltage limits default to
//! [0.95, 1.05] p.u. for load buses and [0.9, 1.1] p.u. for generator buses.

use std::path::Path;

use crate::error::{Error, Result};
use crate::network::{Branch, Bus, BusKind, Generator, NetworkCase, ShuntBank, Transformer};
use crate::scalar::Scalar;

pub const BUNDLED_CASES: &[(&str, &str)] = &[
    ("ieee30", include_str!("../../data/ieee30.case")),
    ("ieee118", include_str!("../../data/ieee118.case")),
];

/// Loads one of the cases shipped with the crate (`ieee30`, `ieee118`).
pub fn bundled_case<T: Scalar>(name: &str) -> Result<NetworkCase<T>> {
    let text = BUNDLED_CASES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::UnknownCase(name.to_string()))?;
    parse_case(text, name)
}

pub fn load_case<T: Scalar>(path: impl AsRef<Path>) -> Result<NetworkCase<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_case(&text, &path.display().to_string())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    BaseMva,
    Bus,
    Generator,
    Branch,
    Transformer,
    Shunt,
}

struct Row<'a> {
    origin: &'a str,
    line: usize,
    fields: Vec<&'a str>,
}

impl Row<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.origin.to_string(),
            line: self.line,
            message: message.into(),
        }
    }

    fn arity(&self, section: &str, min: usize, max: usize) -> Result<()> {
        let n = self.fields.len();
        if n < min || n > max {
            let want = if min == max {
                format!("{min}")
            } else {
                format!("{min} to {max}")
            };
            return Err(self.err(format!("[{section}] row has {n} fields, expected {want}")));
        }
        Ok(())
    }

    fn num<T: Scalar>(&self, col: usize, name: &str) -> Result<T> {
        let s = self.fields[col];
        let v: f64 = s
            .parse()
            .map_err(|_| self.err(format!("field {} `{name}`: cannot parse `{s}`", col + 1)))?;
        if !v.is_finite() {
            return Err(self.err(format!("field {} `{name}` is not finite", col + 1)));
        }
        Ok(T::lit(v))
    }

    fn opt_num<T: Scalar>(&self, col: usize, name: &str) -> Result<Option<T>> {
        if col < self.fields.len() {
            self.num(col, name).map(Some)
        } else {
            Ok(None)
        }
    }

    fn int(&self, col: usize, name: &str) -> Result<i64> {
        let s = self.fields[col];
        let v: f64 = s
            .parse()
            .map_err(|_| self.err(format!("field {} `{name}`: cannot parse `{s}`", col + 1)))?;
        if v.fract() != 0.0 || !v.is_finite() {
            return Err(self.err(format!("field {} `{name}`: expected an integer, got `{s}`", col + 1)));
        }
        Ok(v as i64)
    }

    fn count(&self, col: usize, name: &str) -> Result<usize> {
        let v = self.int(col, name)?;
        usize::try_from(v).map_err(|_| self.err(format!("field {} `{name}` must be non-negative", col + 1)))
    }
}

/// Parses case text; `origin` labels error messages.
pub fn parse_case<T: Scalar>(text: &str, origin: &str) -> Result<NetworkCase<T>> {
    let mut section = Section::None;
    let mut base_mva: Option<T> = None;
    let mut buses = Vec::new();
    let mut bus_limits: Vec<Option<(T, T)>> = Vec::new();
    let mut generators = Vec::new();
    let mut branches: Vec<Branch<T>> = Vec::new();
    let mut tap_rows: Vec<(Row, usize, usize)> = Vec::new();
    let mut shunts = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            let name = line.trim_start_matches('[').trim_end_matches(']').trim();
            section = match name {
                "base_mva" => Section::BaseMva,
                "bus" => Section::Bus,
                "generator" => Section::Generator,
                "branch" => Section::Branch,
                "transformer" => Section::Transformer,
                "shunt" => Section::Shunt,
                other => {
                    return Err(Error::Parse {
                        path: origin.into(),
                        line: lineno + 1,
                        message: format!("unknown section [{other}]"),
                    })
                }
            };
            continue;
        }
        let row = Row {
            origin,
            line: lineno + 1,
            fields: line.split_whitespace().collect(),
        };
        match section {
            Section::None => return Err(row.err("data before the first section header")),
            Section::BaseMva => {
                row.arity("base_mva", 1, 1)?;
                if base_mva.is_some() {
                    return Err(row.err("base_mva given twice"));
                }
                base_mva = Some(row.num(0, "base_mva")?);
            }
            Section::Bus => {
                row.arity("bus", 6, 8)?;
                if row.fields.len() == 7 {
                    return Err(row.err("[bus] voltage limits need both vmin and vmax"));
                }
                let code = row.int(1, "type")?;
                let kind = BusKind::from_code(code)
                    .ok_or_else(|| row.err(format!("field 2 `type`: unknown bus type {code}")))?;
                buses.push(Bus {
                    id: row.count(0, "id")?,
                    kind,
                    p_load: row.num(2, "pd")?,
                    q_load: row.num(3, "qd")?,
                    g_shunt: row.num(4, "gs")?,
                    b_shunt: row.num(5, "bs")?,
                    v_min: T::zero(),
                    v_max: T::zero(),
                });
                let limits = match (row.opt_num(6, "vmin")?, row.opt_num(7, "vmax")?) {
                    (Some(lo), Some(hi)) => Some((lo, hi)),
                    _ => None,
                };
                bus_limits.push(limits);
            }
            Section::Generator => {
                row.arity("generator", 5, 7)?;
                if row.fields.len() == 6 {
                    return Err(row.err("[generator] voltage bounds need both vmin and vmax"));
                }
                generators.push(Generator {
                    bus: row.count(0, "bus")?,
                    p_gen: row.num(1, "pg")?,
                    v_set: row.num(2, "vg")?,
                    q_min: row.num(3, "qmin")?,
                    q_max: row.num(4, "qmax")?,
                    v_min: row.opt_num(5, "vmin")?.unwrap_or(T::lit(0.9)),
                    v_max: row.opt_num(6, "vmax")?.unwrap_or(T::lit(1.1)),
                });
            }
            Section::Branch => {
                row.arity("branch", 5, 7)?;
                let rate: T = row.opt_num(5, "rate")?.unwrap_or(T::zero());
                let ratio: T = row.opt_num(6, "ratio")?.unwrap_or(T::zero());
                branches.push(Branch {
                    from_bus: row.count(0, "from")?,
                    to_bus: row.count(1, "to")?,
                    r: row.num(2, "r")?,
                    x: row.num(3, "x")?,
                    b_charging: row.num(4, "b")?,
                    s_max: if rate == T::zero() { None } else { Some(rate) },
                    ratio: if ratio == T::zero() { T::one() } else { ratio },
                    tap_index: None,
                });
            }
            Section::Transformer => {
                row.arity("transformer", 5, 5)?;
                let from = row.count(0, "from")?;
                let to = row.count(1, "to")?;
                tap_rows.push((row, from, to));
            }
            Section::Shunt => {
                row.arity("shunt", 3, 4)?;
                let bank_count = row.count(1, "banks")?;
                let in_service = match row.fields.len() {
                    4 => row.count(3, "initial")?,
                    _ => 0,
                };
                shunts.push(ShuntBank {
                    bus: row.count(0, "bus")?,
                    bank_count: u32::try_from(bank_count).map_err(|_| row.err("banks too large"))?,
                    mvar_per_bank: row.num(2, "mvar_per_bank")?,
                    in_service: u32::try_from(in_service).map_err(|_| row.err("initial too large"))?,
                });
            }
        }
    }

    let base_mva = base_mva.ok_or_else(|| Error::Validation("missing [base_mva] section".into()))?;

    let gen_buses: std::collections::HashSet<usize> = generators.iter().map(|g| g.bus).collect();
    for (bus, limits) in buses.iter_mut().zip(bus_limits) {
        let (lo, hi) = limits.unwrap_or_else(|| {
            if bus.kind == BusKind::Pq && !gen_buses.contains(&bus.id) {
                (T::lit(0.95), T::lit(1.05))
            } else {
                (T::lit(0.9), T::lit(1.1))
            }
        });
        bus.v_min = lo;
        bus.v_max = hi;
    }

    let mut transformers = Vec::with_capacity(tap_rows.len());
    for (row, from, to) in &tap_rows {
        let matches: Vec<usize> = branches
            .iter()
            .enumerate()
            .filter(|(_, b)| b.from_bus == *from && b.to_bus == *to)
            .map(|(k, _)| k)
            .collect();
        let branch = match matches.as_slice() {
            [k] => *k,
            [] => return Err(row.err(format!("no branch {from}-{to} for this transformer"))),
            _ => return Err(row.err(format!("branch {from}-{to} is ambiguous (parallel rows)"))),
        };
        transformers.push(Transformer {
            branch,
            t_min: row.num(2, "tmin")?,
            t_max: row.num(3, "tmax")?,
            step: row.num(4, "step")?,
        });
    }

    NetworkCase::new(base_mva, buses, branches, generators, transformers, shunts)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BUS: &str = "\
[base_mva]
100
[bus]
1 3 0 0 0 0
2 1 100 0 0 0
[generator]
1 0 1.0 -100 100
[branch]
1 2 0 0.1 0
";

    #[test]
    fn parses_minimal_case() {
        let case: NetworkCase<f64> = parse_case(TWO_BUS, "two-bus").unwrap();
        assert_eq!(case.buses.len(), 2);
        assert_eq!(case.buses[1].v_min, 0.95);
        assert_eq!(case.buses[0].v_max, 1.1);
        assert_eq!(case.branches[0].ratio, 1.0);
        assert!(case.branches[0].s_max.is_none());
    }

    #[test]
    fn two_slack_buses_rejected() {
        let text = TWO_BUS.replace("2 1 100 0 0 0", "2 3 100 0 0 0");
        let err = parse_case::<f64>(&text, "x").unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("slack")), "{err}");
    }

    #[test]
    fn bad_number_reports_line_and_field() {
        let text = TWO_BUS.replace("1 2 0 0.1 0", "1 2 0 abc 0");
        match parse_case::<f64>(&text, "x").unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 9);
                assert!(message.contains("`x`"), "{message}");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn degenerate_transformer_range_rejected() {
        let text = format!("{TWO_BUS}[transformer]\n1 2 1.0 1.0 0.01\n");
        let err = parse_case::<f64>(&text, "x").unwrap_err();
        assert!(err.to_string().contains("t_min"), "{err}");
    }

    #[test]
    fn unknown_section_is_a_parse_error() {
        let text = format!("{TWO_BUS}[load]\n1 2\n");
        assert!(matches!(parse_case::<f64>(&text, "x"), Err(Error::Parse { .. })));
    }

    #[test]
    fn disconnected_bus_rejected() {
        let text = TWO_BUS.replace("2 1 100 0 0 0", "2 1 100 0 0 0\n3 1 0 0 0 0");
        assert!(parse_case::<f64>(&text, "x").is_err());
    }

    #[test]
    fn bundled_ieee30_shape() {
        let case: NetworkCase<f64> = bundled_case("ieee30").unwrap();
        assert_eq!(case.buses.len(), 30);
        assert_eq!(case.branches.len(), 41);
        assert_eq!(case.generators.len(), 6);
        let taps: Vec<(usize, usize)> = case
            .transformers
            .iter()
            .map(|t| (case.branches[t.branch].from_bus, case.branches[t.branch].to_bus))
            .collect();
        assert_eq!(taps, vec![(6, 9), (6, 10), (4, 12), (28, 27)]);
        let shunts: Vec<(usize, u32)> = case.shunts.iter().map(|s| (s.bus, s.bank_count)).collect();
        assert_eq!(shunts, vec![(3, 20), (10, 20), (24, 20)]);
        assert!(case.shunts.iter().all(|s| s.mvar_per_bank == 1.0));
    }

    #[test]
    fn bundled_ieee118_shape() {
        let case: NetworkCase<f64> = bundled_case("ieee118").unwrap();
        assert_eq!(case.buses.len(), 118);
        assert_eq!(case.branches.len(), 186);
        assert_eq!(case.generators.len(), 54);
        assert_eq!(case.transformers.len(), 9);
        assert_eq!(case.shunts.len(), 15);
    }
}
