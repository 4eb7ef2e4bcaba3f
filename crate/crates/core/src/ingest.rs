//! Loading raw price/load CSV files onto a uniform sampling grid.
//!
//! Missing grid points never disappear: they become masked slots so that a
//! lag of `k` samples always means `k * interval` minutes of wall-clock time.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{DateTime, Datelike, Duration, FixedOffset, NaiveDate, NaiveDateTime, Timelike, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::Masked;

pub const DEFAULT_INTERVAL_MINS: u32 = 15;
const MINUTES_PER_DAY: u32 = 24 * 60;

/// One parsed CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawRecord<T> {
    pub timestamp: NaiveDateTime,
    pub price: T,
    pub load: T,
}

impl<T: Scalar> RawRecord<T> {
    /// Validates the record invariants against a sampling interval.
    pub fn new(timestamp: NaiveDateTime, price: T, load: T, interval_mins: u32) -> Result<Self> {
        if interval_mins == 0 {
            return Err(Error::Domain("sampling interval must be positive".into()));
        }
        if timestamp.second() != 0 || timestamp.nanosecond() != 0 {
            return Err(Error::Domain(format!("timestamp {timestamp} has a sub-minute component")));
        }
        if !minute_of_day(&timestamp).is_multiple_of(interval_mins) {
            return Err(Error::Domain(format!(
                "timestamp {timestamp} is not on the {interval_mins}-minute grid"
            )));
        }
        if !price.is_finite() {
            return Err(Error::Domain(format!("non-finite price {price}")));
        }
        if !load.is_finite() || load < T::zero() {
            return Err(Error::Domain(format!("load must be finite and nonnegative, got {load}")));
        }
        Ok(Self { timestamp, price, load })
    }
}

/// Names of the columns holding each field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMapping {
    pub timestamp: String,
    pub price: String,
    pub load: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            timestamp: "timestamp".into(),
            price: "price".into(),
            load: "load".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParseOptions {
    pub interval_mins: u32,
    /// Collect malformed rows as diagnostics instead of failing on the first.
    pub lenient: bool,
    /// Fixed UTC offset (minutes) that timestamps carrying an explicit offset
    /// are converted to. `None` keeps the wall-clock part as written.
    pub market_utc_offset_mins: Option<i32>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            interval_mins: DEFAULT_INTERVAL_MINS,
            lenient: false,
            market_utc_offset_mins: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowDiagnostic {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv<T> {
    pub records: Vec<RawRecord<T>>,
    pub diagnostics: Vec<RowDiagnostic>,
}

/// Parses a timestamp in any of the accepted layouts.
pub fn parse_timestamp(s: &str, market_offset_mins: Option<i32>) -> Result<NaiveDateTime> {
    let s = s.trim();
    const LAYOUTS: [&str; 4] = ["%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"];
    for layout in LAYOUTS {
        if let Ok(ts) = NaiveDateTime::parse_from_str(s, layout) {
            return Ok(ts);
        }
    }
    let with_offset = DateTime::parse_from_rfc3339(s)
        .or_else(|_| DateTime::parse_from_str(s, "%Y-%m-%dT%H:%M%:z"))
        .or_else(|_| DateTime::parse_from_str(s, "%Y-%m-%d %H:%M%:z"));
    match with_offset {
        Ok(dt) => match market_offset_mins {
            Some(mins) => {
                let tz = FixedOffset::east_opt(mins * 60)
                    .ok_or_else(|| Error::Domain(format!("invalid UTC offset {mins} minutes")))?;
                Ok(dt.with_timezone(&tz).naive_local())
            }
            None => Ok(dt.naive_local()),
        },
        Err(_) => Err(Error::Domain(format!("unparseable timestamp `{s}`"))),
    }
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
}

/// Reads price/load records from CSV text with a header row.
///
/// In strict mode the first malformed row aborts with a [`Error::Row`]; in
/// lenient mode malformed rows are skipped and reported as diagnostics.
/// Rows with both value cells empty are gaps and are skipped silently.
pub fn parse_csv<T: Scalar, R: Read>(
    source: R,
    schema: &ColumnMapping,
    options: &ParseOptions,
) -> Result<ParsedCsv<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::Schema(format!("cannot read header row: {e}")))?
        .clone();
    let ts_col = column_index(&headers, &schema.timestamp)?;
    let price_col = column_index(&headers, &schema.price)?;
    let load_col = column_index(&headers, &schema.load)?;

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for row in reader.records() {
        let parsed = match row {
            Ok(row) => {
                let line = row.position().map(|p| p.line()).unwrap_or(0);
                parse_row(&row, ts_col, price_col, load_col, options).map_err(|message| (line, message))
            }
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                Err((line, e.to_string()))
            }
        };
        match parsed {
            Ok(Some(rec)) => records.push(rec),
            Ok(None) => {}
            Err((line, message)) if options.lenient => diagnostics.push(RowDiagnostic { line, message }),
            Err((line, message)) => return Err(Error::Row { line, message }),
        }
    }
    Ok(ParsedCsv { records, diagnostics })
}

fn parse_row<T: Scalar>(
    row: &csv::StringRecord,
    ts_col: usize,
    price_col: usize,
    load_col: usize,
    options: &ParseOptions,
) -> std::result::Result<Option<RawRecord<T>>, String> {
    let field = |i: usize| row.get(i).ok_or_else(|| format!("missing field {}", i + 1));
    let ts = parse_timestamp(field(ts_col)?, options.market_utc_offset_mins).map_err(|e| e.to_string())?;
    if field(price_col)?.is_empty() && field(load_col)?.is_empty() {
        return Ok(None);
    }
    let number = |i: usize, what: &str| -> std::result::Result<T, String> {
        let raw = field(i)?;
        raw.parse::<f64>()
            .map(T::lit)
            .map_err(|_| format!("unparseable {what} `{raw}`"))
    };
    let price = number(price_col, "price")?;
    let load = number(load_col, "load")?;
    RawRecord::new(ts, price, load, options.interval_mins).map(Some).map_err(|e| e.to_string())
}

/// Price/load samples on a gap-free grid `start + i * interval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedSeries<T> {
    pub start: NaiveDateTime,
    pub interval_mins: u32,
    pub prices: Vec<T>,
    pub loads: Vec<T>,
    pub mask: Vec<bool>,
}

impl<T: Scalar> AlignedSeries<T> {
    /// Builds a fully valid series from equal-length vectors.
    pub fn from_values(start: NaiveDateTime, interval_mins: u32, prices: Vec<T>, loads: Vec<T>) -> Result<Self> {
        if prices.len() != loads.len() {
            return Err(Error::Alignment(format!(
                "price and load lengths differ ({} vs {})",
                prices.len(),
                loads.len()
            )));
        }
        if prices.is_empty() {
            return Err(Error::EmptySeries);
        }
        if interval_mins == 0 {
            return Err(Error::Domain("sampling interval must be positive".into()));
        }
        let mask = vec![true; prices.len()];
        Ok(Self { start, interval_mins, prices, loads, mask })
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.mask.get(i).copied().unwrap_or(false)
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn timestamp(&self, i: usize) -> NaiveDateTime {
        self.start + Duration::minutes(i as i64 * self.interval_mins as i64)
    }

    pub fn minute_of_day(&self, i: usize) -> u32 {
        minute_of_day(&self.timestamp(i))
    }

    pub fn samples_per_day(&self) -> usize {
        (MINUTES_PER_DAY / self.interval_mins).max(1) as usize
    }

    pub fn prices_masked(&self) -> Masked<'_, T> {
        Masked::new(&self.prices, &self.mask)
    }

    pub fn loads_masked(&self) -> Masked<'_, T> {
        Masked::new(&self.loads, &self.mask)
    }

    pub fn valid_prices(&self) -> Vec<T> {
        self.prices_masked().values().collect()
    }

    pub fn valid_loads(&self) -> Vec<T> {
        self.loads_masked().values().collect()
    }

    /// Copy of the series with `keep(i)` ANDed into the mask.
    pub fn masked_where(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let mut out = self.clone();
        for (i, m) in out.mask.iter_mut().enumerate() {
            *m = *m && keep(i);
        }
        out
    }

    /// Valid samples as records, in grid order.
    pub fn to_records(&self) -> Vec<RawRecord<T>> {
        (0..self.len())
            .filter(|&i| self.is_valid(i))
            .map(|i| RawRecord {
                timestamp: self.timestamp(i),
                price: self.prices[i],
                load: self.loads[i],
            })
            .collect()
    }

    /// Writes `timestamp,price,load,valid` rows. Masked slots are written
    /// with empty price/load fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["timestamp", "price", "load", "valid"]).map_err(io)?;
        for i in 0..self.len() {
            let ts = self.timestamp(i).format("%Y-%m-%dT%H:%M").to_string();
            if self.is_valid(i) {
                w.write_record([ts, self.prices[i].to_string(), self.loads[i].to_string(), "1".into()])
                    .map_err(io)?;
            } else {
                w.write_record([ts, String::new(), String::new(), "0".into()]).map_err(io)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn minute_of_day(ts: &NaiveDateTime) -> u32 {
    ts.hour() * 60 + ts.minute()
}

/// Places records on the uniform grid starting at the earliest timestamp.
pub fn align<T: Scalar>(records: &[RawRecord<T>], interval_mins: u32) -> Result<AlignedSeries<T>> {
    if interval_mins == 0 {
        return Err(Error::Domain("sampling interval must be positive".into()));
    }
    if records.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut sorted: Vec<&RawRecord<T>> = records.iter().collect();
    sorted.sort_by_key(|r| r.timestamp);
    let start = sorted[0].timestamp;
    let end = sorted[sorted.len() - 1].timestamp;
    let step = interval_mins as i64;
    let span = (end - start).num_minutes();
    let len = (span / step + 1) as usize;

    let mut prices = vec![T::zero(); len];
    let mut loads = vec![T::zero(); len];
    let mut mask = vec![false; len];
    for rec in sorted {
        let offset = (rec.timestamp - start).num_minutes();
        if offset % step != 0 || (rec.timestamp - start).num_seconds() % 60 != 0 {
            return Err(Error::Alignment(format!(
                "timestamp {} is off the {interval_mins}-minute grid",
                rec.timestamp
            )));
        }
        let i = (offset / step) as usize;
        if mask[i] {
            return Err(Error::Alignment(format!("duplicate timestamp {}", rec.timestamp)));
        }
        prices[i] = rec.price;
        loads[i] = rec.load;
        mask[i] = true;
    }
    Ok(AlignedSeries { start, interval_mins, prices, loads, mask })
}

/// Which calendar days count as non-working.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Calendar {
    pub exclude_weekends: bool,
    pub holidays: BTreeSet<NaiveDate>,
}

impl Default for Calendar {
    fn default() -> Self {
        Self { exclude_weekends: true, holidays: BTreeSet::new() }
    }
}

impl Calendar {
    pub fn is_workday(&self, date: NaiveDate) -> bool {
        let weekend = matches!(date.weekday(), Weekday::Sat | Weekday::Sun);
        !(self.exclude_weekends && weekend) && !self.holidays.contains(&date)
    }
}

/// Masks samples on weekends and holidays.
pub fn filter_workdays<T: Scalar>(series: &AlignedSeries<T>, calendar: &Calendar) -> AlignedSeries<T> {
    series.masked_where(|i| calendar.is_workday(series.timestamp(i).date()))
}

/// Clock time as minutes after midnight; `24:00` is allowed as a window end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeOfDay(u32);

impl TimeOfDay {
    pub fn from_minutes(minutes: u32) -> Result<Self> {
        if minutes > MINUTES_PER_DAY {
            return Err(Error::Window(format!("{minutes} minutes is past 24:00")));
        }
        Ok(Self(minutes))
    }

    pub fn hm(hour: u32, minute: u32) -> Result<Self> {
        if minute >= 60 {
            return Err(Error::Window(format!("invalid minute {minute}")));
        }
        Self::from_minutes(hour * 60 + minute)
    }

    pub fn minutes(self) -> u32 {
        self.0
    }
}

impl fmt::Display for TimeOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.0 / 60, self.0 % 60)
    }
}

impl FromStr for TimeOfDay {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (h, m) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Window(format!("expected HH:MM, got `{s}`")))?;
        let h: u32 = h.parse().map_err(|_| Error::Window(format!("bad hour in `{s}`")))?;
        let m: u32 = m.parse().map_err(|_| Error::Window(format!("bad minute in `{s}`")))?;
        Self::hm(h, m)
    }
}

/// Half-open clock window `[start, end)` within a single day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TodWindow {
    pub start: TimeOfDay,
    pub end: TimeOfDay,
}

impl TodWindow {
    pub fn new(start: TimeOfDay, end: TimeOfDay) -> Result<Self> {
        if start >= end {
            return Err(Error::Window(format!("start {start} must precede end {end}")));
        }
        Ok(Self { start, end })
    }

    pub fn full_day() -> Self {
        Self { start: TimeOfDay(0), end: TimeOfDay(MINUTES_PER_DAY) }
    }

    pub fn contains_minute(&self, minute_of_day: u32) -> bool {
        minute_of_day >= self.start.0 && minute_of_day < self.end.0
    }
}

impl fmt::Display for TodWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

impl FromStr for TodWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once('-')
            .ok_or_else(|| Error::Window(format!("expected HH:MM-HH:MM, got `{s}`")))?;
        Self::new(a.parse()?, b.parse()?)
    }
}

impl Serialize for TodWindow {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for TodWindow {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Masks samples whose clock time falls outside `window`.
pub fn window_by_time_of_day<T: Scalar>(series: &AlignedSeries<T>, window: TodWindow) -> AlignedSeries<T> {
    series.masked_where(|i| window.contains_minute(series.minute_of_day(i)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> NaiveDateTime {
        parse_timestamp(s, None).unwrap()
    }

    fn rec(s: &str, p: f64, q: f64) -> RawRecord<f64> {
        RawRecord::new(ts(s), p, q, 15).unwrap()
    }

    #[test]
    fn parses_single_row() {
        let csv = "timestamp,price,load\n2008-01-01T00:00,45.2,2100\n";
        let out = parse_csv::<f64, _>(csv.as_bytes(), &ColumnMapping::default(), &ParseOptions::default()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].price, 45.2);
        assert_eq!(out.records[0].load, 2100.0);
        assert!(out.diagnostics.is_empty());
    }

    #[test]
    fn negative_load_is_row_error() {
        let csv = "timestamp,price,load\n2008-01-01T00:00,45.2,-5\n";
        let err = parse_csv::<f64, _>(csv.as_bytes(), &ColumnMapping::default(), &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Row { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn lenient_mode_collects_diagnostics() {
        let csv = "timestamp,price,load\n\
                   2008-01-01T00:00,45.2,2100\n\
                   2008-01-01T00:15,abc,2100\n\
                   2008-01-01 00:30,40,2000\n\
                   2008-01-01T00:45+00:00,41,1990\n";
        let opts = ParseOptions { lenient: true, ..Default::default() };
        let out = parse_csv::<f64, _>(csv.as_bytes(), &ColumnMapping::default(), &opts).unwrap();
        assert_eq!(out.records.len(), 3);
        assert_eq!(out.diagnostics.len(), 1);
        assert_eq!(out.diagnostics[0].line, 3);
    }

    #[test]
    fn missing_column_is_schema_error() {
        let csv = "time,price,load\n2008-01-01T00:00,45.2,2100\n";
        let err = parse_csv::<f64, _>(csv.as_bytes(), &ColumnMapping::default(), &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn custom_columns_and_offsets() {
        let csv = "when,lmp,mw\n2008-01-01T06:00+00:00,45.2,2100\n";
        let schema = ColumnMapping { timestamp: "when".into(), price: "lmp".into(), load: "mw".into() };
        let opts = ParseOptions { market_utc_offset_mins: Some(-360), ..Default::default() };
        let out = parse_csv::<f64, _>(csv.as_bytes(), &schema, &opts).unwrap();
        assert_eq!(out.records[0].timestamp, ts("2008-01-01T00:00"));
    }

    #[test]
    fn off_grid_timestamp_rejected() {
        assert!(RawRecord::new(ts("2008-01-01T00:07"), 1.0, 1.0, 15).is_err());
        assert!(RawRecord::new(ts("2008-01-01T00:30"), f64::NAN, 1.0, 15).is_err());
        assert!(RawRecord::new(ts("2008-01-01T00:30"), -20.0, 1.0, 15).is_ok());
    }

    #[test]
    fn contiguous_alignment() {
        let recs = [rec("2008-01-01T00:00", 1.0, 1.0), rec("2008-01-01T00:15", 2.0, 2.0), rec("2008-01-01T00:30", 3.0, 3.0)];
        let s = align(&recs, 15).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.mask.iter().all(|&m| m));
    }

    #[test]
    fn gaps_become_masked() {
        let recs = [rec("2008-01-01T00:45", 2.0, 2.0), rec("2008-01-01T00:00", 1.0, 1.0)];
        let s = align(&recs, 15).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.mask, vec![true, false, false, true]);
        assert_eq!(s.prices[3], 2.0);
    }

    #[test]
    fn duplicates_rejected() {
        let recs = [rec("2008-01-01T00:15", 1.0, 1.0), rec("2008-01-01T00:15", 2.0, 2.0)];
        assert!(matches!(align(&recs, 15), Err(Error::Alignment(_))));
        assert!(matches!(align::<f64>(&[], 15), Err(Error::EmptySeries)));
    }

    fn days(start: &str, n_days: usize) -> AlignedSeries<f64> {
        let n = n_days * 96;
        AlignedSeries::from_values(ts(start), 15, vec![1.0; n], vec![1.0; n]).unwrap()
    }

    #[test]
    fn weekends_masked() {
        // 2008-01-07 is a Monday.
        let s = filter_workdays(&days("2008-01-07T00:00", 7), &Calendar::default());
        assert_eq!(s.valid_count(), 5 * 96);
        assert!(!s.is_valid(5 * 96) && !s.is_valid(7 * 96 - 1));
        let again = filter_workdays(&s, &Calendar::default());
        assert_eq!(again, s);
    }

    #[test]
    fn weekday_only_series_unchanged() {
        // 2008-01-09 is a Wednesday.
        let s = days("2008-01-09T00:00", 1);
        assert_eq!(filter_workdays(&s, &Calendar::default()), s);
    }

    #[test]
    fn holidays_masked() {
        let mut cal = Calendar::default();
        cal.holidays.insert(NaiveDate::from_ymd_opt(2008, 7, 4).unwrap());
        let s = filter_workdays(&days("2008-07-03T00:00", 2), &cal);
        assert_eq!(s.valid_count(), 96);
        assert!(s.is_valid(95) && !s.is_valid(96));
    }

    #[test]
    fn afternoon_window_keeps_two_slots() {
        let s = days("2008-01-09T00:00", 1);
        let w: TodWindow = "14:00-14:30".parse().unwrap();
        let out = window_by_time_of_day(&s, w);
        let kept: Vec<_> = (0..out.len()).filter(|&i| out.is_valid(i)).collect();
        assert_eq!(kept, vec![56, 57]);
    }

    #[test]
    fn full_day_window_is_identity() {
        let s = days("2008-01-09T00:00", 2);
        let w: TodWindow = "00:00-24:00".parse().unwrap();
        assert_eq!(window_by_time_of_day(&s, w), s);
        assert_eq!(w, TodWindow::full_day());
    }

    #[test]
    fn business_hours_window_count() {
        let s = days("2008-01-09T00:00", 3);
        let out = window_by_time_of_day(&s, "09:00-15:00".parse().unwrap());
        assert_eq!(out.valid_count(), 3 * 24);
    }

    #[test]
    fn degenerate_window_rejected() {
        assert!("14:00-14:00".parse::<TodWindow>().is_err());
        assert!("15:00-14:00".parse::<TodWindow>().is_err());
        assert!("24:01-24:30".parse::<TodWindow>().is_err());
    }

    #[test]
    fn realign_is_identity() {
        let recs = [rec("2008-01-01T00:00", 1.0, 1.0), rec("2008-01-01T01:00", 2.0, 5.0), rec("2008-01-01T00:15", 3.0, 3.0)];
        let s = align(&recs, 15).unwrap();
        assert_eq!(align(&s.to_records(), 15).unwrap(), s);
    }

    #[test]
    fn csv_roundtrip_through_writer() {
        let recs = [rec("2008-01-01T00:00", 1.5, 10.0), rec("2008-01-01T00:30", 2.5, 20.0)];
        let s = align(&recs, 15).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let parsed = parse_csv::<f64, _>(buf.as_slice(), &ColumnMapping::default(), &ParseOptions::default()).unwrap();
        assert_eq!(parsed.records.len(), 2);
        assert!(parsed.diagnostics.is_empty());
        assert_eq!(align(&parsed.records, 15).unwrap(), s);
    }
}
