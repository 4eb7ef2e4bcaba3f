use std::fmt::Write as _;

use super::{ModelReport, ResponseRow, RunConfig, SpikeReport, Study};
use crate::error::{Error, Result};
use crate::forecast::ForecastResult;
use crate::stats::{AcfResult, HourlySummary};
use crate::sysid::{OlsFit, TransferFunction};
use crate::welfare::DwlSeries;

/// `%g`-style rendering with `sig` significant digits.
fn g(x: f64, sig: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..sig as i32).contains(&exp) {
        let s = format!("{:.*e}", sig.saturating_sub(1), x);
        let (mantissa, e) = s.split_once('e').unwrap_or((&s, "0"));
        return format!("{}e{}", trim_zeros(mantissa), e);
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn polynomial(coeffs: &[f64], decimals: usize, constant_one: bool) -> String {
    let mut out = String::new();
    for (i, &c) in coeffs.iter().enumerate() {
        let rounded: f64 = format!("{c:.decimals$}").parse().unwrap_or(c);
        if rounded == 0.0 {
            continue;
        }
        let mag = if i == 0 && constant_one { "1".to_string() } else { format!("{:.decimals$}", rounded.abs()) };
        let term = if i == 0 { mag } else { format!("{mag}z^-{i}") };
        if out.is_empty() {
            out = if rounded < 0.0 { format!("-{term}") } else { term };
        } else {
            let sign = if rounded < 0.0 { '-' } else { '+' };
            let _ = write!(out, " {sign} {term}");
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

/// `G(z) = (b1 z^-1 + ...) / (1 - a1 z^-1 - ...)` with coefficients rounded
/// to `decimals` places.
pub fn format_equation(tf: &TransferFunction<f64>, decimals: usize) -> String {
    format!(
        "G(z) = ({}) / ({})",
        polynomial(&tf.numerator, decimals, false),
        polynomial(&tf.denominator, decimals, true)
    )
}

fn heading(out: &mut String, title: &str) {
    let _ = writeln!(out, "\n{title}\n{}", "-".repeat(title.len()));
}

fn coefficient_table(out: &mut String, fit: &OlsFit<f64>) {
    let _ = writeln!(out, "{:<10}{:>14}{:>14}{:>12}{:>14}", "term", "estimate", "std.error", "t", "p");
    for i in 0..fit.names.len() {
        let _ = writeln!(
            out,
            "{:<10}{:>14}{:>14}{:>12}{:>14}",
            fit.names[i],
            g(fit.estimates[i], 5),
            g(fit.std_errors[i], 5),
            g(fit.t_stats[i], 5),
            g(fit.p_values[i], 5)
        );
    }
    let f = fit.f_stat.map_or_else(|| "-".into(), |v| g(v, 3));
    let fp = fit.f_p_value.map_or_else(|| "-".into(), |v| g(v, 3));
    let _ = writeln!(
        out,
        "n = {}, root MSE = {}, R^2 = {}, F = {}, p = {}",
        fit.n_obs,
        g(fit.rmse, 3),
        g(fit.r2, 3),
        f,
        fp
    );
}

fn model_sections(out: &mut String, title: &str, m: &ModelReport) {
    if let Some(sel) = &m.lag_selection {
        heading(out, &format!("{title}: lag selection"));
        let _ = writeln!(out, "kept {:?}, dropped {:?}", sel.lags, sel.dropped);
        if let Some(d) = &sel.diagnostic {
            let _ = writeln!(out, "{d}");
        }
    }
    heading(out, &format!("{title}: autoregressive step"));
    coefficient_table(out, &m.fit.step1);
    if let Some(step2) = &m.fit.step2 {
        heading(out, &format!("{title}: price step"));
        coefficient_table(out, step2);
    }
    heading(out, &format!("{title}: combined model"));
    let _ = writeln!(out, "intercept = {}", g(m.fit.model.intercept, 6));
    let _ = writeln!(
        out,
        "R^2 = {}, incremental R^2 from price = {}, root MSE = {}",
        g(m.fit.combined_r2, 4),
        g(m.fit.incremental_r2(), 3),
        g(m.fit.combined_rmse, 3)
    );
    let _ = writeln!(out, "{}", format_equation(&m.transfer, 4));
    let verdict = if m.stability.stable {
        "stable"
    } else if m.stability.marginal {
        "marginally stable"
    } else {
        "unstable"
    };
    let _ = writeln!(out, "largest pole modulus = {} ({verdict})", g(m.stability.max_modulus, 5));
    if let Some(cv) = &m.cross_validation {
        let _ = writeln!(
            out,
            "cross-validation: train R^2 = {} (n = {}), test R^2 = {} (n = {}), test RMSE = {}",
            g(cv.train_r2, 4),
            cv.n_train,
            g(cv.test_r2, 4),
            cv.n_test,
            g(cv.test_rmse, 4)
        );
    }
    if let Some(j) = &m.joint {
        heading(out, &format!("{title}: joint least squares"));
        coefficient_table(out, &j.fit);
    }
}

/// Plain-text report laid out like the study's tables.
pub fn summary_text(study: &Study, config: &RunConfig) -> String {
    let mut out = String::from("Price-responsive demand study\n");
    let _ = writeln!(out, "configuration sha256 {}", config.fingerprint());

    heading(&mut out, "Descriptive statistics");
    let _ = writeln!(out, "{:<10}{:>14}{:>14}", "", "price", "load");
    let (p, q) = (&study.price_moments, &study.load_moments);
    for (name, a, b) in [
        ("kurtosis", p.kurtosis, q.kurtosis),
        ("skewness", p.skewness, q.skewness),
        ("mean", p.mean, q.mean),
        ("std", p.std, q.std),
    ] {
        let _ = writeln!(out, "{:<10}{:>14}{:>14}", name, g(a, 6), g(b, 6));
    }
    let _ = writeln!(out, "{:<10}{:>14}{:>14}", "n", p.n, q.n);

    heading(&mut out, "Price regimes");
    let r = &study.regime;
    let _ = writeln!(
        out,
        "threshold = {} $/MWh, moderate samples = {}, high samples = {} ({}%)",
        g(r.threshold, 6),
        r.moderate_samples,
        r.high_samples,
        g(100.0 * r.high_fraction, 3)
    );

    model_sections(&mut out, "Moderate-price model", &study.moderate);

    heading(&mut out, "Load after price surges: one-way ANOVA");
    let a = &study.anova.table;
    let _ = writeln!(out, "{:<8}{:>14}{:>8}{:>14}{:>10}{:>12}", "source", "SS", "df", "MS", "F", "p");
    let _ = writeln!(
        out,
        "{:<8}{:>14}{:>8}{:>14}{:>10}{:>12}",
        "groups",
        g(a.ss_groups, 3),
        a.df_groups,
        g(a.ms_groups, 3),
        g(a.f_stat, 3),
        g(a.p_value, 3)
    );
    let _ = writeln!(out, "{:<8}{:>14}{:>8}{:>14}", "error", g(a.ss_error, 3), a.df_error, g(a.ms_error, 3));
    let _ = writeln!(out, "{:<8}{:>14}{:>8}", "total", g(a.ss_total, 3), a.df_total);
    let _ = writeln!(out, "surge onsets = {}", study.anova.events);

    heading(&mut out, "Load response by delay");
    let _ = writeln!(out, "{:>5}{:>16}{:>14}", "k", "mean change", "correlation");
    for row in &study.response {
        let ch = row.avg_change.map_or_else(|| "-".into(), |v| g(v, 5));
        let co = row.correlation.map_or_else(|| "-".into(), |v| g(v, 4));
        let _ = writeln!(out, "{:>5}{:>16}{:>14}", row.lag, ch, co);
    }

    model_sections(&mut out, "Peak-window model", &study.peak);

    heading(&mut out, "Peak-window forecast residuals");
    let d = &study.forecast.diagnostics;
    let _ = writeln!(
        out,
        "n = {}, correlation = {}, residual mean = {}, std = {}, skewness = {}, kurtosis = {}",
        d.n,
        g(d.correlation, 4),
        g(d.mean, 4),
        g(d.std, 4),
        g(d.skewness, 4),
        g(d.kurtosis, 5)
    );

    heading(&mut out, "Conditional spike probabilities");
    let _ = writeln!(out, "{:<14}{:<16}{:>10}{:>12}{:>12}", "window", "price range", "baseline", "max |dev|", "at lag");
    for s in &study.spikes {
        let pr = &s.profile;
        let (dev, lag) = pr
            .probability
            .iter()
            .zip(&pr.lags)
            .filter_map(|(p, &k)| p.map(|p| ((p - pr.baseline).abs(), k)))
            .fold((None, None), |acc: (Option<f64>, Option<usize>), (d, k)| match acc.0 {
                Some(best) if best >= d => acc,
                _ => (Some(d), Some(k)),
            });
        let _ = writeln!(
            out,
            "{:<14}{:<16}{:>10}{:>12}{:>12}",
            pr.condition.window.to_string(),
            s.range.to_string(),
            g(pr.baseline, 4),
            dev.map_or_else(|| "-".into(), |v| g(v, 4)),
            lag.map_or_else(|| "-".into(), |v| v.to_string())
        );
    }

    if let Some(w) = &study.welfare {
        heading(&mut out, "Deadweight loss");
        let policy = serde_json::to_value(w.policy).ok().and_then(|v| v.as_str().map(String::from));
        let _ = writeln!(
            out,
            "policy = {}, intervals = {}, total = {} $*MW per interval, {} $",
            policy.unwrap_or_default(),
            w.intervals.len(),
            g(w.total, 6),
            w.total_dollars.map_or_else(|| "-".into(), |v| g(v, 6))
        );
    }

    if !study.warnings.is_empty() {
        heading(&mut out, "Warnings");
        for w in &study.warnings {
            let _ = writeln!(out, "{w}");
        }
    }
    out
}

fn csv_bytes<F>(header: &[&str], fill: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>,
{
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(header).map_err(io)?;
        fill(&mut w).map_err(io)?;
        w.flush()?;
    }
    Ok(buf)
}

/// `lag, acf, pacf, band` rows.
pub fn acf_csv(a: &AcfResult<f64>, p: &AcfResult<f64>) -> Result<Vec<u8>> {
    csv_bytes(&["lag", "acf", "pacf", "band"], |w| {
        for (i, lag) in a.lags.iter().enumerate() {
            w.write_record([
                lag.to_string(),
                a.values[i].to_string(),
                opt(p.values.get(i).copied()),
                a.confidence_band.to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn hourly_csv(parts: &[&HourlySummary<f64>]) -> Result<Vec<u8>> {
    let header =
        ["field", "bucket", "count", "min", "q1", "median", "q3", "max", "lower_whisker", "upper_whisker", "outliers"];
    csv_bytes(&header, |w| {
        for h in parts {
            let field = if matches!(h.field, crate::stats::SeriesField::Price) { "price" } else { "load" };
            for b in &h.buckets {
                let mut rec = vec![field.to_string(), b.start.clone(), b.count.to_string()];
                match &b.summary {
                    Some(s) => rec.extend(
                        [s.min, s.q1, s.median, s.q3, s.max, s.lower_whisker, s.upper_whisker]
                            .iter()
                            .map(f64::to_string)
                            .chain([s.outliers.len().to_string()]),
                    ),
                    None => rec.extend(std::iter::repeat_n(String::new(), 8)),
                }
                w.write_record(&rec)?;
            }
        }
        Ok(())
    })
}

pub fn pairs_csv(header: [&str; 2], pairs: &[(f64, f64)]) -> Result<Vec<u8>> {
    csv_bytes(&header, |w| {
        for (a, b) in pairs {
            w.write_record([a.to_string(), b.to_string()])?;
        }
        Ok(())
    })
}

pub fn response_csv(rows: &[ResponseRow]) -> Result<Vec<u8>> {
    csv_bytes(&["lag", "avg_change", "correlation"], |w| {
        for r in rows {
            w.write_record([r.lag.to_string(), opt(r.avg_change), opt(r.correlation)])?;
        }
        Ok(())
    })
}

pub fn forecast_csv(r: &ForecastResult<f64>) -> Result<Vec<u8>> {
    csv_bytes(&["index", "forecast", "realized", "residual", "innovation_std"], |w| {
        for i in 0..r.targets.len() {
            w.write_record([
                r.targets[i].to_string(),
                r.forecasts[i].to_string(),
                opt(r.realized.as_ref().map(|v| v[i])),
                opt(r.residuals.as_ref().map(|v| v[i])),
                r.innovation_std[i].to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn spike_csv(spikes: &[SpikeReport]) -> Result<Vec<u8>> {
    let header = ["window", "range", "low", "high", "lag", "hits", "count", "probability", "baseline"];
    csv_bytes(&header, |w| {
        for s in spikes {
            let p = &s.profile;
            for i in 0..p.lags.len() {
                w.write_record([
                    p.condition.window.to_string(),
                    s.range.to_string(),
                    p.condition.low.to_string(),
                    p.condition.high.to_string(),
                    p.lags[i].to_string(),
                    p.hits[i].to_string(),
                    p.counts[i].to_string(),
                    opt(p.probability[i]),
                    p.baseline.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

pub fn welfare_csv(s: &DwlSeries<f64>) -> Result<Vec<u8>> {
    let header = ["interval", "eq_price", "eq_quantity", "price", "quantity", "dwl"];
    csv_bytes(&header, |w| {
        for (i, r) in s.intervals.iter().enumerate() {
            w.write_record([
                i.to_string(),
                r.equilibrium.price.to_string(),
                r.equilibrium.quantity.to_string(),
                r.realized.price.to_string(),
                r.realized.quantity.to_string(),
                r.dwl.to_string(),
            ])?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_format() {
        assert_eq!(g(0.81268, 5), "0.81268");
        assert_eq!(g(238.0712, 5), "238.07");
        assert_eq!(g(8.883e-64, 4), "8.883e-64");
        assert_eq!(g(3.89e9, 3), "3.89e9");
        assert_eq!(g(-220.1, 5), "-220.1");
        assert_eq!(g(0.0, 5), "0");
    }

    #[test]
    fn displayed_equations() {
        let moderate = TransferFunction::new(
            vec![0.0, -0.8555, 0.5273],
            vec![1.0, -0.81268, 0.0, -0.046086, 0.0, -0.036614],
        )
        .unwrap();
        assert_eq!(
            format_equation(&moderate, 4),
            "G(z) = (-0.8555z^-1 + 0.5273z^-2) / (1 - 0.8127z^-1 - 0.0461z^-3 - 0.0366z^-5)"
        );
        let peak =
            TransferFunction::new(vec![0.0, 0.0, 0.0, 0.0, -220.1], vec![1.0, -0.40153, 0.23826, 0.0, -0.25124])
                .unwrap();
        assert_eq!(
            format_equation(&peak, 4),
            "G(z) = (-220.1000z^-4) / (1 - 0.4015z^-1 + 0.2383z^-2 - 0.2512z^-4)"
        );
    }
}
