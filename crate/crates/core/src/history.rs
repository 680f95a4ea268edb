//! Time-stamped probe temperatures and their CSV representation.
//!
//! CSV layout: header `time_s,pos_<mm>,...` with one column per probe and
//! every value written with six decimals so that exports diff cleanly.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Temperatures at fixed probe positions over strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalHistory<T> {
    /// Sample instants, s.
    pub times: Vec<T>,
    /// Probe heights above the cooled face, m.
    pub positions: Vec<T>,
    /// `temperatures[probe][sample]`, K.
    pub temperatures: Vec<Vec<T>>,
}

impl<T: Scalar> ThermalHistory<T> {
    pub fn new(times: Vec<T>, positions: Vec<T>, temperatures: Vec<Vec<T>>) -> Result<Self> {
        let h = Self {
            times,
            positions,
            temperatures,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions.is_empty() {
            return Err(Error::Empty("thermal history probes"));
        }
        if self.times.is_empty() {
            return Err(Error::Empty("thermal history times"));
        }
        if self.temperatures.len() != self.positions.len() {
            return Err(Error::invalid(
                "thermal history",
                format!(
                    "{} probe traces for {} positions",
                    self.temperatures.len(),
                    self.positions.len()
                ),
            ));
        }
        for (i, trace) in self.temperatures.iter().enumerate() {
            if trace.len() != self.times.len() {
                return Err(Error::invalid(
                    "thermal history",
                    format!(
                        "probe {i} has {} samples, expected {}",
                        trace.len(),
                        self.times.len()
                    ),
                ));
            }
            if trace.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("thermal history temperature"));
            }
        }
        if let Some(w) = self.times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(
                "thermal history",
                format!("times not strictly increasing at sample {}", w + 1),
            ));
        }
        Ok(())
    }

    pub fn n_probes(&self) -> usize {
        self.positions.len()
    }

    pub fn n_samples(&self) -> usize {
        self.times.len()
    }

    pub fn trace(&self, probe: usize) -> &[T] {
        &self.temperatures[probe]
    }

    /// Index of the stored time nearest to `time`; exact midpoints resolve
    /// to the earlier sample.
    pub fn nearest_time_index(&self, time: T) -> Result<usize> {
        let first = self.times[0];
        let last = *self.times.last().expect("non-empty");
        if !time.is_finite() || time < first || time > last {
            return Err(Error::OutOfRange {
                what: "time",
                value: time.as_f64(),
                lo: first.as_f64(),
                hi: last.as_f64(),
            });
        }
        let hi = self.times.partition_point(|&t| t < time);
        if hi == 0 {
            return Ok(0);
        }
        let lo = hi - 1;
        if hi == self.times.len() {
            return Ok(lo);
        }
        Ok(if self.times[hi] - time < time - self.times[lo] {
            hi
        } else {
            lo
        })
    }

    /// Index of the stored probe nearest to `position`.
    pub fn nearest_probe_index(&self, position: T) -> Result<usize> {
        let lo = self.positions.iter().copied().fold(T::infinity(), T::min);
        let hi = self
            .positions
            .iter()
            .copied()
            .fold(T::neg_infinity(), T::max);
        let tol = T::lit(1e-9);
        if !position.is_finite()
            || position < T::zero()
            || position < lo - tol
            || position > hi + tol
        {
            return Err(Error::OutOfRange {
                what: "position",
                value: position.as_f64(),
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
        let mut best = 0;
        for (i, &p) in self.positions.iter().enumerate() {
            if (p - position).abs() < (self.positions[best] - position).abs() {
                best = i;
            }
        }
        Ok(best)
    }

    /// Nearest-probe, nearest-time sample without interpolation.
    pub fn sample_at(&self, position: T, time: T) -> Result<T> {
        let p = self.nearest_probe_index(position)?;
        let k = self.nearest_time_index(time)?;
        Ok(self.temperatures[p][k])
    }

    /// Restricts the history to the samples nearest to each of `times`.
    pub fn resample(&self, times: &[T]) -> Result<Self> {
        let idx = times
            .iter()
            .map(|&t| self.nearest_time_index(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times: times.to_vec(),
            positions: self.positions.clone(),
            temperatures: self
                .temperatures
                .iter()
                .map(|tr| idx.iter().map(|&k| tr[k]).collect())
                .collect(),
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = BufWriter::new(out);
        write!(w, "time_s")?;
        for p in &self.positions {
            write!(w, ",{}", position_header(p.as_f64()))?;
        }
        writeln!(w)?;
        for (k, t) in self.times.iter().enumerate() {
            write!(w, "{:.6}", t.as_f64())?;
            for trace in &self.temperatures {
                write!(w, ",{:.6}", trace[k].as_f64())?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(File::create(path)?)
    }

    /// Parses the CSV layout produced by [`ThermalHistory::write_csv`].
    /// `source` names the input in error messages.
    pub fn read_csv<R: Read>(input: R, source: &str) -> Result<Self> {
        let parse_err = |line: u64, reason: String| Error::Parse {
            path: source.to_string(),
            line,
            reason,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut records = rdr.records();
        let header = match records.next() {
            None => {
                return Err(parse_err(
                    1,
                    "empty file: missing `time_s,pos_<mm>` header".into(),
                ))
            }
            Some(r) => r.map_err(|e| parse_err(csv_line(&e), e.to_string()))?,
        };
        if header.get(0) != Some("time_s") {
            return Err(parse_err(1, "first header column must be `time_s`".into()));
        }
        if header.len() < 2 {
            return Err(parse_err(1, "header declares no probe columns".into()));
        }
        let positions = header
            .iter()
            .skip(1)
            .map(|h| {
                h.strip_prefix("pos_")
                    .and_then(|mm| mm.parse::<f64>().ok())
                    .filter(|mm| mm.is_finite() && *mm >= 0.0)
                    .map(|mm| T::lit(mm / 1000.0))
                    .ok_or_else(|| {
                        parse_err(
                            1,
                            format!("malformed probe column `{h}`, expected pos_<mm>"),
                        )
                    })
            })
            .collect::<Result<Vec<T>>>()?;

        let mut times: Vec<T> = Vec::new();
        let mut temperatures = vec![Vec::new(); positions.len()];
        for rec in records {
            let rec = rec.map_err(|e| parse_err(csv_line(&e), e.to_string()))?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            if rec.len() == 1 && rec.get(0) == Some("") {
                continue;
            }
            let mut values = rec.iter().enumerate().map(|(col, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(T::lit)
                    .ok_or_else(|| {
                        parse_err(
                            line,
                            format!("non-numeric value `{cell}` in column {}", col + 1),
                        )
                    })
            });
            let t = values.next().expect("csv enforces equal record lengths")?;
            if let Some(&prev) = times.last() {
                if !(t > prev) {
                    return Err(parse_err(
                        line,
                        format!("time {t} does not increase (previous {prev})"),
                    ));
                }
            }
            times.push(t);
            for (trace, v) in temperatures.iter_mut().zip(values) {
                trace.push(v?);
            }
        }
        if times.is_empty() {
            return Err(parse_err(1, "no data rows".into()));
        }
        Self::new(times, positions, temperatures)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::read_csv(File::open(path)?, &path.display().to_string())
    }
}

fn csv_line(e: &csv::Error) -> u64 {
    e.position().map(|p| p.line()).unwrap_or(0)
}

/// Column name for a probe at `position` metres.
pub fn position_header(position: f64) -> String {
    format!("pos_{:.3}", position * 1000.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ThermalHistory<f64> {
        ThermalHistory::new(
            vec![0.0, 1.0, 2.0, 3.0],
            vec![0.004, 0.008],
            vec![
                vec![900.0, 899.0, 898.0, 897.0],
                vec![910.0, 909.5, 909.0, 908.5],
            ],
        )
        .unwrap()
    }

    #[test]
    fn exact_grid_sample() {
        let h = sample();
        assert_eq!(h.sample_at(0.008, 2.0).unwrap(), 909.0);
        assert_eq!(h.sample_at(0.004, 0.0).unwrap(), 900.0);
    }

    #[test]
    fn nearest_time_rounding() {
        let h = sample();
        assert_eq!(h.sample_at(0.004, 1.4).unwrap(), 899.0);
        assert_eq!(h.sample_at(0.004, 1.6).unwrap(), 898.0);
        // midpoint goes to the earlier sample
        assert_eq!(h.sample_at(0.004, 1.5).unwrap(), 899.0);
        assert_eq!(h.sample_at(0.0059, 3.0).unwrap(), 897.0);
    }

    #[test]
    fn out_of_range_queries() {
        let h = sample();
        assert!(h.sample_at(-0.001, 1.0).is_err());
        assert!(h.sample_at(0.004, 3.5).is_err());
        assert!(h.sample_at(0.004, -0.1).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let h = sample();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("time_s,pos_4.000,pos_8.000\n0.000000,900.000000,910.000000\n"));
        let back = ThermalHistory::<f64>::read_csv(buf.as_slice(), "mem").unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn decreasing_time_names_line() {
        let text = "time_s,pos_4.000\n0.0,900\n1.0,899\n0.5,898\n";
        let err = ThermalHistory::<f64>::read_csv(text.as_bytes(), "exp.csv").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(
            ThermalHistory::<f64>::read_csv("".as_bytes(), "e"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(ThermalHistory::<f64>::read_csv("time,pos_4\n0,1\n".as_bytes(), "e").is_err());
        assert!(ThermalHistory::<f64>::read_csv("time_s,probe4\n0,1\n".as_bytes(), "e").is_err());
        let err = ThermalHistory::<f64>::read_csv("time_s,pos_4\n0,1\n1,abc\n".as_bytes(), "e")
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = ThermalHistory::<f64>::read_csv("time_s,pos_4\n0,1\n1,2,3\n".as_bytes(), "e")
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }
}
