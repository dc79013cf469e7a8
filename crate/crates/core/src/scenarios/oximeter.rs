//! The pulse-oximeter reading loop as an annotated MiniC program.
//!
//! One second of sensor traffic is `packets` packets of `frames_per_packet`
//! frames of five bytes. Frames flagged by the error model carry a bad
//! checksum; with `retry_on_checksum_error` the frame is read again after the
//! error is displayed.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;

use super::{Rate, ScenarioError};

pub const TIMER: &str = "TIMER";

/// Function durations in microseconds, in table order `f1..f15`.
pub const WCET_TABLE: [(&str, u64); 15] = [
    ("receiveSensorData", 1000),
    ("checkStatus", 700),
    ("printStatusError", 10000),
    ("checkSum", 2000),
    ("printCheckSumError", 10000),
    ("storeHRMSB", 200),
    ("storeHRLSB", 200),
    ("storeSpO2", 200),
    ("averageHR", 800),
    ("averageSpO2", 800),
    ("getHR", 200),
    ("getSpO2", 200),
    ("printHR", 5000),
    ("printSpO2", 5000),
    ("insertLog", 500),
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorModel {
    /// The first `floor(rate * frames)` frames are bad.
    #[default]
    DeterministicCount,
    /// Exactly `floor(rate * frames)` frames are bad, at any positions.
    NondetPlacement,
}

impl ErrorModel {
    pub fn name(self) -> &'static str {
        match self {
            ErrorModel::DeterministicCount => "deterministic-count",
            ErrorModel::NondetPlacement => "nondet-placement",
        }
    }
}

impl fmt::Display for ErrorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ErrorModel {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "deterministic-count" | "deterministic" => Ok(ErrorModel::DeterministicCount),
            "nondet-placement" | "nondet" => Ok(ErrorModel::NondetPlacement),
            other => Err(ScenarioError::Invalid(format!("unknown error model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OximeterSpec {
    pub packets: u32,
    pub frames_per_packet: u32,
    pub bytes_per_frame: u32,
    pub wcet: Vec<(String, u64)>,
    pub deadline: u64,
    pub error_rate: Rate,
    pub error_model: ErrorModel,
    pub retry_on_checksum_error: bool,
    /// Bad frames also report a status error.
    pub status_errors: bool,
}

impl Default for OximeterSpec {
    fn default() -> Self {
        Self {
            packets: 3,
            frames_per_packet: 25,
            bytes_per_frame: 5,
            wcet: WCET_TABLE.iter().map(|(f, d)| (f.to_string(), *d)).collect(),
            deadline: 1_000_000,
            error_rate: Rate::ZERO,
            error_model: ErrorModel::DeterministicCount,
            retry_on_checksum_error: true,
            status_errors: false,
        }
    }
}

impl OximeterSpec {
    pub fn frames(&self) -> u64 {
        u64::from(self.packets) * u64::from(self.frames_per_packet)
    }

    pub fn error_frames(&self) -> u64 {
        self.error_rate.of(self.frames())
    }

    /// Short description of the error model, printed with every report.
    pub fn model_name(&self) -> String {
        let retry = if self.retry_on_checksum_error {
            "retry-on-checksum-error"
        } else {
            "no-retry"
        };
        let mut name = format!("{}, {retry}", self.error_model);
        if self.status_errors {
            name.push_str(", status-errors");
        }
        name
    }

    pub fn wcet_of(&self, function: &str) -> Option<u64> {
        self.wcet.iter().find(|(f, _)| f == function).map(|(_, d)| *d)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.bytes_per_frame != 5 {
            return Err(ScenarioError::Invalid("a frame has exactly 5 bytes".into()));
        }
        if self.packets == 0 || self.frames_per_packet < 3 {
            return Err(ScenarioError::Invalid(
                "need at least one packet of at least 3 frames".into(),
            ));
        }
        if self.frames() > 100_000 {
            return Err(ScenarioError::Invalid("too many frames".into()));
        }
        for (f, _) in WCET_TABLE {
            if self.wcet_of(f).is_none() {
                return Err(ScenarioError::Invalid(format!("no WCET given for `{f}`")));
            }
        }
        Ok(())
    }

    /// File name used for the generated program, e.g. `oximeter_16.6pct.c`.
    pub fn file_name(&self) -> String {
        format!("oximeter_{}pct.c", self.error_rate.percent())
    }
}

pub fn gen_oximeter(spec: &OximeterSpec) -> Result<String, ScenarioError> {
    spec.validate()?;
    let w = |f: &str| spec.wcet_of(f).expect("validated");
    let frames = spec.frames();
    let bad = spec.error_frames();
    let nondet = spec.error_model == ErrorModel::NondetPlacement;
    let mut s = String::new();

    let _ = writeln!(
        s,
        "// Pulse oximeter: {} packets of {} frames of {} bytes per second.",
        spec.packets, spec.frames_per_packet, spec.bytes_per_frame
    );
    let _ = writeln!(
        s,
        "// Error model: {}; {bad} of {frames} frames have a bad checksum ({}).\n",
        spec.model_name(),
        spec.error_rate
    );
    s.push_str(
        "#ifdef HARDWARE\n\
         extern void initLCD(void);\n\
         #endif\n\
         extern int sprintf(char *buf, char *fmt, ...);\n\
         extern void printLCD(char *text, unsigned int line, unsigned int col);\n\n",
    );
    let _ = writeln!(s, "//@ DEFINE-TIMER {TIMER};\n");
    let _ = writeln!(
        s,
        "const unsigned int LINE1 = 1;\nconst unsigned int LINE2 = 2;\n\
         const int FRAMES = {frames};\nconst int ERROR_FRAMES = {bad};\n"
    );
    let _ = writeln!(
        s,
        "unsigned char Byte[5];\nunsigned char wire[5];\nint bytePos;\nint frameNo;\n\
         int frameError;\nint statusError;\nunsigned char hrMSB[{p}];\nunsigned char hrLSB[{p}];\n\
         unsigned char spo2[{p}];\nunsigned int avgHR;\nunsigned int avgSpO2;\n\
         unsigned int logBuf[2];\nint logPos;\n",
        p = spec.packets
    );

    let _ = writeln!(
        s,
        "//@ WCET-FUNCTION [{}]\nunsigned char receiveSensorData(void)\n{{\n  unsigned char b;\n\
         \n  if (bytePos == 0)\n    b = 1;\n  else if (bytePos == 1) {{\n    b = 0;\n\
         \x20   if (statusError)\n      b = 64;\n  }}\n  else if (bytePos == 2)\n    b = 90 + frameNo % 10;\n\
         \x20 else if (bytePos == 3)\n    b = 60 + frameNo % 40;\n  else {{\n\
         \x20   b = wire[0] + wire[1] + wire[2] + wire[3];\n    if (frameError)\n      b = b + 1;\n  }}\n\
         \x20 wire[bytePos] = b;\n  bytePos = (bytePos + 1) % 5;\n  return b;\n}}\n",
        w("receiveSensorData")
    );
    let _ = writeln!(
        s,
        "//@ WCET-FUNCTION [{}]\nint checkStatus(unsigned char status)\n{{\n  return (status & 64) != 0;\n}}\n",
        w("checkStatus")
    );
    let _ = writeln!(
        s,
        "//@ WCET-FUNCTION [{}]\nvoid printStatusError(unsigned int line)\n{{\n  printLCD(\"STATUS ERROR\", line, 1);\n}}\n",
        w("printStatusError")
    );
    let _ = writeln!(
        s,
        "//@ WCET-FUNCTION [{}]\nint checkSum(unsigned char data[])\n{{\n  unsigned char sum;\n\n\
         \x20 sum = data[0] + data[1] + data[2] + data[3];\n  return sum != data[4];\n}}\n",
        w("checkSum")
    );
    let _ = writeln!(
        s,
        "//@ WCET-FUNCTION [{}]\nvoid printCheckSumError(unsigned int line)\n{{\n  printLCD(\"CHECKSUM ERROR\", line, 1);\n}}\n",
        w("printCheckSumError")
    );
    for (f, buf) in [("storeHRMSB", "hrMSB"), ("storeHRLSB", "hrLSB"), ("storeSpO2", "spo2")] {
        let _ = writeln!(
            s,
            "//@ WCET-FUNCTION [{}]\nvoid {f}(unsigned char value, int k)\n{{\n  {buf}[k] = value;\n}}\n",
            w(f)
        );
    }
    let _ = writeln!(
        s,
        "//@ WCET-FUNCTION [{}]\nvoid averageHR(void)\n{{\n  int k;\n  unsigned int sum;\n\n  sum = 0;\n\
         \x20 for (k = 0; k < {p}; k++)\n    sum += hrMSB[k] * 256 + hrLSB[k];\n  avgHR = sum / {p};\n}}\n",
        w("averageHR"),
        p = spec.packets
    );
    let _ = writeln!(
        s,
        "//@ WCET-FUNCTION [{}]\nvoid averageSpO2(void)\n{{\n  int k;\n  unsigned int sum;\n\n  sum = 0;\n\
         \x20 for (k = 0; k < {p}; k++)\n    sum += spo2[k];\n  avgSpO2 = sum / {p};\n}}\n",
        w("averageSpO2"),
        p = spec.packets
    );
    let _ = writeln!(
        s,
        "//@ WCET-FUNCTION [{}]\nunsigned int getHR(void)\n{{\n  return avgHR;\n}}\n",
        w("getHR")
    );
    let _ = writeln!(
        s,
        "//@ WCET-FUNCTION [{}]\nunsigned int getSpO2(void)\n{{\n  return avgSpO2;\n}}\n",
        w("getSpO2")
    );
    for (f, label, var) in [("printHR", "HR", "valueHR"), ("printSpO2", "SpO2", "valueSpO2")] {
        let _ = writeln!(
            s,
            "//@ WCET-FUNCTION [{}]\nvoid {f}(unsigned int line, unsigned int {var})\n{{\n  char text[16];\n\n\
             \x20 sprintf(text, \"{label}: %d\", {var});\n  printLCD(text, line, 1);\n}}\n",
            w(f)
        );
    }
    let _ = writeln!(
        s,
        "//@ WCET-FUNCTION [{}]\nvoid insertLog(unsigned int value)\n{{\n  logBuf[logPos] = value;\n  logPos++;\n}}\n",
        w("insertLog")
    );

    s.push_str("int main(void)\n{\n  int k;\n  int j;\n  int i;\n  int r;\n");
    if nondet {
        s.push_str("  int errors;\n");
    }
    s.push_str("  unsigned int HR;\n  unsigned int SpO2;\n\n");
    let _ = writeln!(s, "  //@ RESET-TIMER {TIMER};");
    let _ = writeln!(
        s,
        "  for (k = 0; k < {}; k++) {{\n    for (j = 0; j < {}; j++) {{\n      frameNo = k * {} + j;",
        spec.packets, spec.frames_per_packet, spec.frames_per_packet
    );
    if nondet {
        s.push_str(
            "      frameError = nondet_int(0, 1);\n      errors += frameError;\n\
             \x20     assume (errors <= ERROR_FRAMES);\n\
             \x20     assume (errors + (FRAMES - 1 - frameNo) >= ERROR_FRAMES);\n",
        );
    } else {
        s.push_str("      frameError = frameNo < ERROR_FRAMES;\n");
    }
    if spec.status_errors {
        s.push_str("      statusError = frameError;\n");
    }
    s.push_str(
        "      for (i = 0; i < 5; i++) {\n        Byte[i] = receiveSensorData();\n\
         \x20       if ((i == 1) && (checkStatus(Byte[i])))\n          printStatusError(LINE1);\n",
    );
    if spec.retry_on_checksum_error {
        s.push_str(
            "        if ((i == 4) && (checkSum(Byte))) {\n          printCheckSumError(LINE2);\n\
             \x20         frameError = 0;\n          for (r = 0; r < 5; r++)\n\
             \x20           Byte[r] = receiveSensorData();\n        }\n",
        );
    } else {
        s.push_str("        if ((i == 4) && (checkSum(Byte)))\n          printCheckSumError(LINE2);\n");
    }
    s.push_str(
        "        if (i == 3) {\n          if (j == 0) storeHRMSB(Byte[i], k);\n\
         \x20         if (j == 1) storeHRLSB(Byte[i], k);\n          if (j == 2) storeSpO2(Byte[i], k);\n\
         \x20       }\n      }\n    }\n  }\n\n",
    );
    s.push_str(
        "  averageHR();\n  averageSpO2();\n  HR = getHR();\n  SpO2 = getSpO2();\n\
         \x20 printHR(LINE1, HR);\n  printSpO2(LINE2, SpO2);\n  insertLog(HR);\n  insertLog(SpO2);\n\n",
    );
    let _ = writeln!(s, "  //@ ASSERT-TIMER ({TIMER} < {});", spec.deadline);
    s.push_str("  return 0;\n}\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{load_annotated, LoadOptions};

    #[test]
    fn generated_program_binds() {
        let src = gen_oximeter(&OximeterSpec::default()).unwrap();
        let p = load_annotated("o.c", &src, &LoadOptions::default()).unwrap();
        assert_eq!(p.timers, [TIMER]);
        assert_eq!(p.wcet.values().filter(|w| w.annotation.is_some()).count(), 15);
        assert_eq!(p.wcet["printCheckSumError"].value, 10000);
        assert!(p.warnings.is_empty(), "{:?}", p.warnings);
        assert!(src.contains("//@ ASSERT-TIMER (TIMER < 1000000);"));
    }

    #[test]
    fn error_frames_round_down() {
        let spec = |r: &str| OximeterSpec {
            error_rate: r.parse().unwrap(),
            ..OximeterSpec::default()
        };
        let counts: Vec<u64> = ["0", "0.166", "0.20", "0.25", "0.333", "0.5", "1.0"]
            .iter()
            .map(|r| spec(r).error_frames())
            .collect();
        assert_eq!(counts, [0, 12, 15, 18, 24, 37, 75]);
    }

    #[test]
    fn model_name_mentions_retry() {
        let mut spec = OximeterSpec::default();
        assert_eq!(spec.model_name(), "deterministic-count, retry-on-checksum-error");
        spec.retry_on_checksum_error = false;
        spec.error_model = ErrorModel::NondetPlacement;
        assert_eq!(spec.model_name(), "nondet-placement, no-retry");
    }

    #[test]
    fn rejects_other_frame_sizes() {
        let spec = OximeterSpec {
            bytes_per_frame: 4,
            ..OximeterSpec::default()
        };
        assert!(gen_oximeter(&spec).is_err());
    }
}
