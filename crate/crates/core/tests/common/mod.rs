#![allow(dead_code)]

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use pricedemand::stats::quantile;
use pricedemand::synth::{gen_demand, gen_prices, to_series, PlantSpec, PriceProcessSpec};
use pricedemand::Series;

pub fn start() -> chrono::NaiveDateTime {
    NaiveDate::from_ymd_opt(2015, 1, 5).unwrap().and_hms_opt(0, 0, 0).unwrap()
}

/// Spiky prices driving the moderate plant with a peak overlay at the
/// 95th price percentile.
pub fn hybrid_series(n: usize, seed: u64) -> Series {
    let prices = gen_prices(&PriceProcessSpec::spiky(), n, seed).unwrap();
    let thr = quantile(&prices, 0.95).unwrap();
    let loads = gen_demand(&PlantSpec::hybrid(thr), &prices, seed.wrapping_add(1)).unwrap();
    to_series(start(), 15, prices, loads).unwrap()
}

pub fn write_csv(series: &Series, path: &Path) -> PathBuf {
    let mut text = String::from("timestamp,price,load\n");
    for i in 0..series.len() {
        let ts = series.timestamp(i).format("%Y-%m-%d %H:%M");
        text += &format!("{ts},{},{}\n", series.prices[i], series.loads[i]);
    }
    std::fs::write(path, text).unwrap();
    path.to_path_buf()
}
