//! The bridge-and-torch puzzle as an annotated MiniC program.
//!
//! Crossing person `p` is a call to `walkp`, whose WCET is that person's
//! crossing time, so the timer ends up holding the total duration of the
//! chosen schedule. Pairs go forward and one person brings the torch back;
//! a pair moves at the pace of its slower member.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;

use super::ScenarioError;

pub const TIMER: &str = "__timing__";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
}

impl Comparison {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
            Comparison::Eq => "==",
            Comparison::Ne => "!=",
        }
    }

    pub fn holds(self, a: u64, b: u64) -> bool {
        match self {
            Comparison::Lt => a < b,
            Comparison::Le => a <= b,
            Comparison::Gt => a > b,
            Comparison::Ge => a >= b,
            Comparison::Eq => a == b,
            Comparison::Ne => a != b,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Comparison::Lt => "LT",
            Comparison::Le => "LE",
            Comparison::Gt => "GT",
            Comparison::Ge => "GE",
            Comparison::Eq => "EQ",
            Comparison::Ne => "NE",
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Comparison {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "<" | "lt" => Comparison::Lt,
            "<=" | "le" => Comparison::Le,
            ">" | "gt" => Comparison::Gt,
            ">=" | "ge" => Comparison::Ge,
            "==" | "eq" => Comparison::Eq,
            "!=" | "ne" => Comparison::Ne,
            other => return Err(ScenarioError::Invalid(format!("unknown comparison `{other}`"))),
        })
    }
}

/// Which schedules the program may choose.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Every legal schedule.
    #[default]
    Any,
    /// The fastest person escorts everyone and always returns the torch.
    FastestFerries,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BridgeSpec {
    /// Crossing times, ascending.
    pub times: Vec<u64>,
    pub deadline: u64,
    pub comparison: Comparison,
    pub strategy: Strategy,
}

impl Default for BridgeSpec {
    fn default() -> Self {
        Self {
            times: vec![5, 10, 20, 25],
            deadline: 60,
            comparison: Comparison::Lt,
            strategy: Strategy::Any,
        }
    }
}

impl BridgeSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.times.is_empty() {
            return Err(ScenarioError::Invalid("at least one person is needed".into()));
        }
        if self.times.len() > 8 {
            return Err(ScenarioError::Invalid("at most 8 people are supported".into()));
        }
        if self.times.contains(&0) {
            return Err(ScenarioError::Invalid("crossing times must be positive".into()));
        }
        if self.times.windows(2).any(|w| w[0] > w[1]) {
            return Err(ScenarioError::Invalid("crossing times must be sorted ascending".into()));
        }
        Ok(())
    }

    /// File name used for the generated program, e.g. `bridge_lt60.c`.
    pub fn file_name(&self) -> String {
        let strategy = match self.strategy {
            Strategy::Any => "",
            Strategy::FastestFerries => "_ferry",
        };
        format!(
            "bridge{strategy}_{}{}.c",
            self.comparison.tag().to_ascii_lowercase(),
            self.deadline
        )
    }
}

pub fn gen_bridge(spec: &BridgeSpec) -> Result<String, ScenarioError> {
    spec.validate()?;
    let n = spec.times.len();
    let times: Vec<String> = spec.times.iter().map(u64::to_string).collect();
    let mut s = String::new();
    let _ = writeln!(s, "// Bridge crossing: {n} people, crossing times {}.", times.join(", "));
    s.push_str("// A pair crosses at the pace of its slower member; someone must bring the torch back.\n\n");
    let _ = writeln!(s, "//@ DEFINE-TIMER {TIMER};\n");
    s.push_str("// 0 = start bank, 1 = far bank\n");
    let _ = writeln!(s, "int side[{n}];\n");
    for (p, t) in spec.times.iter().enumerate() {
        let _ = writeln!(s, "//@ WCET-FUNCTION [{t}]\nvoid walk{p}(void)\n{{\n}}\n");
    }
    s.push_str("int main(void)\n{\n");
    s.push_str("  int trip;\n  int a;\n  int b;\n  int r;\n\n");
    let _ = writeln!(s, "  //@ RESET-TIMER {TIMER};");
    if n == 1 {
        s.push_str("  side[0] = 1;\n  walk0();\n");
    } else {
        let last = n - 1;
        let _ = writeln!(s, "  for (trip = 0; trip < {}; trip++) {{", n - 1);
        let _ = writeln!(s, "    a = nondet_int(0, {last});");
        let _ = writeln!(s, "    b = nondet_int(0, {last});");
        s.push_str("    assume (a < b);\n");
        s.push_str("    assume (side[a] == 0 && side[b] == 0);\n");
        if spec.strategy == Strategy::FastestFerries {
            s.push_str("    assume (a == 0);\n");
        }
        s.push_str("    side[a] = 1;\n    side[b] = 1;\n");
        dispatch(&mut s, "b", n, "    ");
        let _ = writeln!(s, "    if (trip < {}) {{", n - 2);
        let _ = writeln!(s, "      r = nondet_int(0, {last});");
        s.push_str("      assume (side[r] == 1);\n");
        if spec.strategy == Strategy::FastestFerries {
            s.push_str("      assume (r == 0);\n");
        }
        s.push_str("      side[r] = 0;\n");
        dispatch(&mut s, "r", n, "      ");
        s.push_str("    }\n  }\n");
    }
    let _ = writeln!(
        s,
        "\n  //@ ASSERT-TIMER ({TIMER} {} {});",
        spec.comparison.symbol(),
        spec.deadline
    );
    s.push_str("  return 0;\n}\n");
    Ok(s)
}

fn dispatch(s: &mut String, var: &str, n: usize, indent: &str) {
    for p in 0..n {
        let kw = if p == 0 { "if" } else { "else if" };
        let _ = writeln!(s, "{indent}{kw} ({var} == {p})\n{indent}  walk{p}();");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{load_annotated, LoadOptions};

    #[test]
    fn generated_program_binds() {
        let src = gen_bridge(&BridgeSpec::default()).unwrap();
        let p = load_annotated("b.c", &src, &LoadOptions::default()).unwrap();
        assert_eq!(p.timers, [TIMER]);
        assert_eq!(p.wcet["walk3"].value, 25);
        assert!(p.warnings.is_empty(), "{:?}", p.warnings);
        assert!(src.contains("//@ ASSERT-TIMER (__timing__ < 60);"));
    }

    #[test]
    fn rejects_unsorted_times() {
        let spec = BridgeSpec {
            times: vec![10, 5],
            ..BridgeSpec::default()
        };
        assert!(gen_bridge(&spec).is_err());
    }

    #[test]
    fn file_names() {
        assert_eq!(BridgeSpec::default().file_name(), "bridge_lt60.c");
        let spec = BridgeSpec {
            comparison: Comparison::Ge,
            strategy: Strategy::FastestFerries,
            ..BridgeSpec::default()
        };
        assert_eq!(spec.file_name(), "bridge_ferry_ge60.c");
    }

    #[test]
    fn comparison_parsing() {
        assert_eq!(">=".parse::<Comparison>().unwrap(), Comparison::Ge);
        assert!("=>".parse::<Comparison>().is_err());
        assert!(Comparison::Ge.holds(60, 60));
    }
}
