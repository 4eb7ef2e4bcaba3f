//! Linear supply/demand equilibria and deadweight-loss triangles.
//!
//! Everything here is exact for linear curves, so the functions are generic
//! over any signed numeric field: `f64`, or a rational type for exact checks.

use num_traits::{Num, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numeric requirements of the welfare geometry.
pub trait WelfareNum: Num + Signed + PartialOrd + Copy + ToPrimitive {}
impl<T: Num + Signed + PartialOrd + Copy + ToPrimitive> WelfareNum for T {}

/// `Q = intercept + slope · P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCurve<T> {
    pub intercept: T,
    pub slope: T,
}

impl<T: WelfareNum> LinearCurve<T> {
    pub fn new(intercept: T, slope: T) -> Self {
        Self { intercept, slope }
    }

    pub fn quantity(&self, price: T) -> T {
        self.intercept + self.slope * price
    }

    /// Inverse curve. Slope must be nonzero.
    pub fn price(&self, quantity: T) -> T {
        (quantity - self.intercept) / self.slope
    }
}

/// Demand as seen by the market: price responsive, or fixed at a quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Demand<T> {
    Linear(LinearCurve<T>),
    Vertical { quantity: T },
}

impl<T: WelfareNum> Demand<T> {
    /// Market-clearing point against `supply`.
    pub fn clear(&self, supply: &LinearCurve<T>) -> Result<Point<T>> {
        match *self {
            Demand::Linear(ref d) => equilibrium(d, supply),
            Demand::Vertical { quantity } => {
                let price = supply.price(quantity);
                if price < T::zero() {
                    return Err(Error::InfeasibleDispatch(format!(
                        "serving {} requires a negative price {}",
                        lossy(quantity),
                        lossy(price)
                    )));
                }
                Ok(Point { price, quantity })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub price: T,
    pub quantity: T,
}

/// One interval of a welfare study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketScenario<T> {
    pub demand: LinearCurve<T>,
    pub supply: LinearCurve<T>,
    /// Largest quantity the supply side can deliver, if limited.
    #[serde(default)]
    pub capacity: Option<T>,
    /// Fixed retail price.
    #[serde(default)]
    pub p0: Option<T>,
    #[serde(default)]
    pub event: Option<String>,
}

/// Triangle `A B C`; `c` is always the efficient point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vertices<T> {
    pub a: Point<T>,
    pub b: Point<T>,
    pub c: Point<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DwlResult<T> {
    pub equilibrium: Point<T>,
    pub realized: Point<T>,
    pub dwl: T,
    pub vertices: Vertices<T>,
}

fn two<T: WelfareNum>() -> T {
    T::one() + T::one()
}

fn lossy<T: WelfareNum>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn check_slopes<T: WelfareNum>(demand: &LinearCurve<T>, supply: &LinearCurve<T>) -> Result<()> {
    if !(demand.slope < T::zero()) {
        return Err(Error::InvalidSpec("demand slope must be negative".into()));
    }
    if !(supply.slope > T::zero()) {
        return Err(Error::InvalidSpec("supply slope must be positive".into()));
    }
    Ok(())
}

/// Triangle area from the shoelace formula over `(Q, P)` vertices.
pub fn shoelace<T: WelfareNum>(v: &Vertices<T>) -> T {
    let (a, b, c) = (v.a, v.b, v.c);
    let s = a.quantity * (b.price - c.price) + b.quantity * (c.price - a.price) + c.quantity * (a.price - b.price);
    s.abs() / two()
}

pub fn equilibrium<T: WelfareNum>(demand: &LinearCurve<T>, supply: &LinearCurve<T>) -> Result<Point<T>> {
    check_slopes(demand, supply)?;
    let denom = supply.slope - demand.slope;
    if denom == T::zero() {
        return Err(Error::NoEquilibrium("parallel curves".into()));
    }
    let price = (demand.intercept - supply.intercept) / denom;
    let quantity = demand.quantity(price);
    if !(price > T::zero() && quantity > T::zero()) {
        return Err(Error::NoEquilibrium(format!(
            "curves cross at P = {}, Q = {}",
            lossy(price),
            lossy(quantity)
        )));
    }
    Ok(Point { price, quantity })
}

fn check_capacity<T: WelfareNum>(capacity: Option<T>, demand: T) -> Result<()> {
    match capacity {
        Some(cap) if demand > cap => Err(Error::Scarcity { capacity: lossy(cap), demand: lossy(demand) }),
        _ => Ok(()),
    }
}

/// Loss from consumers facing the flat retail price `p0`.
pub fn dwl_fixed_price<T: WelfareNum>(demand: &LinearCurve<T>, supply: &LinearCurve<T>, p0: T) -> Result<DwlResult<T>> {
    dwl_fixed_price_capped(demand, supply, None, p0)
}

fn dwl_fixed_price_capped<T: WelfareNum>(
    demand: &LinearCurve<T>,
    supply: &LinearCurve<T>,
    capacity: Option<T>,
    p0: T,
) -> Result<DwlResult<T>> {
    let eq = equilibrium(demand, supply)?;
    let q0 = demand.quantity(p0);
    if !(q0 > T::zero()) {
        return Err(Error::Degenerate(format!("no demand at fixed price {}", lossy(p0))));
    }
    check_capacity(capacity, q0)?;
    let ps = supply.price(q0);
    let vertices = Vertices {
        a: Point { price: p0, quantity: q0 },
        b: Point { price: ps, quantity: q0 },
        c: eq,
    };
    let dwl = (q0 - eq.quantity).abs() * (p0 - ps).abs() / two();
    Ok(DwlResult { equilibrium: eq, realized: vertices.a, dwl, vertices })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftKind {
    /// Supply contracts, the efficient price rises.
    Drop,
    /// Supply recovers, the efficient price falls.
    Restore,
}

fn inertia_step<T: WelfareNum>(
    prior: Point<T>,
    demand_after: &LinearCurve<T>,
    supply_after: &LinearCurve<T>,
    capacity: Option<T>,
) -> Result<DwlResult<T>> {
    let c = equilibrium(demand_after, supply_after)?;
    let held = Demand::Vertical { quantity: prior.quantity };
    check_capacity(capacity, prior.quantity)?;
    let b = held.clear(supply_after)?;
    let vertices = Vertices { a: prior, b, c };
    Ok(DwlResult { equilibrium: c, realized: vertices.b, dwl: shoelace(&vertices), vertices })
}

/// Demand stays vertical at the pre-shift equilibrium `A` while supply moves;
/// the market clears at `B` on the new supply instead of the efficient `C`.
pub fn dwl_inertia<T: WelfareNum>(
    demand: &LinearCurve<T>,
    supply_before: &LinearCurve<T>,
    supply_after: &LinearCurve<T>,
    kind: ShiftKind,
) -> Result<DwlResult<T>> {
    let a = equilibrium(demand, supply_before)?;
    let r = inertia_step(a, demand, supply_after, None)?;
    let wrong_way = match kind {
        ShiftKind::Drop => r.equilibrium.price < a.price,
        ShiftKind::Restore => r.equilibrium.price > a.price,
    };
    if wrong_way {
        return Err(Error::InvalidSpec(format!("supply shift does not match a {kind:?}")));
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    Fixed,
    RtrpInstant,
    RtrpInertia,
}

impl std::str::FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Policy::Fixed),
            "rtrp-instant" => Ok(Policy::RtrpInstant),
            "rtrp-inertia" => Ok(Policy::RtrpInertia),
            _ => Err(Error::InvalidSpec(format!("unknown policy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DwlSeries<T> {
    pub policy: Policy,
    pub intervals: Vec<DwlResult<T>>,
    /// Sum of per-interval losses, in $·MW per interval.
    pub total: T,
    /// `total` times the interval length in hours, when one was given.
    pub total_dollars: Option<T>,
}

/// Per-interval losses over a schedule. Under `Fixed`, intervals without a
/// `p0` use the first interval's equilibrium price.
pub fn dwl_series<T: WelfareNum>(
    schedule: &[MarketScenario<T>],
    policy: Policy,
    interval_hours: Option<T>,
) -> Result<DwlSeries<T>> {
    let first = schedule
        .first()
        .ok_or_else(|| Error::InsufficientData("empty scenario schedule".into()))?;
    let default_p0 = match first.p0 {
        Some(p) => p,
        None => equilibrium(&first.demand, &first.supply)?.price,
    };
    let mut intervals = Vec::with_capacity(schedule.len());
    for (i, s) in schedule.iter().enumerate() {
        let r = match policy {
            Policy::Fixed => dwl_fixed_price_capped(&s.demand, &s.supply, s.capacity, s.p0.unwrap_or(default_p0))?,
            Policy::RtrpInstant => {
                let eq = equilibrium(&s.demand, &s.supply)?;
                check_capacity(s.capacity, eq.quantity)?;
                DwlResult { equilibrium: eq, realized: eq, dwl: T::zero(), vertices: Vertices { a: eq, b: eq, c: eq } }
            }
            Policy::RtrpInertia if i == 0 => {
                let eq = equilibrium(&s.demand, &s.supply)?;
                check_capacity(s.capacity, eq.quantity)?;
                DwlResult { equilibrium: eq, realized: eq, dwl: T::zero(), vertices: Vertices { a: eq, b: eq, c: eq } }
            }
            Policy::RtrpInertia => {
                let prev = &schedule[i - 1];
                let a = equilibrium(&prev.demand, &prev.supply)?;
                inertia_step(a, &s.demand, &s.supply, s.capacity)?
            }
        };
        intervals.push(r);
    }
    let total = intervals.iter().fold(T::zero(), |acc, r| acc + r.dwl);
    Ok(DwlSeries { policy, intervals, total, total_dollars: interval_hours.map(|h| total * h) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d() -> LinearCurve<f64> {
        LinearCurve::new(100.0, -1.0)
    }

    #[test]
    fn symmetric_equilibrium() {
        let e = equilibrium(&d(), &LinearCurve::new(0.0, 1.0)).unwrap();
        assert_eq!((e.price, e.quantity), (50.0, 50.0));
        let e = equilibrium(&LinearCurve::new(100.0, -2.0), &LinearCurve::new(0.0, 3.0)).unwrap();
        assert_eq!((e.price, e.quantity), (20.0, 60.0));
        assert!(equilibrium(&d(), &LinearCurve::new(0.0, -1.0)).is_err());
        assert!(matches!(equilibrium(&d(), &LinearCurve::new(200.0, 1.0)), Err(Error::NoEquilibrium(_))));
    }

    #[test]
    fn fixed_price_triangle() {
        let s = LinearCurve::new(0.0, 1.0);
        assert_eq!(dwl_fixed_price(&d(), &s, 40.0).unwrap().dwl, 100.0);
        assert_eq!(dwl_fixed_price(&d(), &s, 50.0).unwrap().dwl, 0.0);
        assert_eq!(dwl_fixed_price(&d(), &s, 60.0).unwrap().dwl, 100.0);
        assert!(matches!(dwl_fixed_price(&d(), &s, 150.0), Err(Error::Degenerate(_))));
        let r = dwl_fixed_price(&d(), &s, 40.0).unwrap();
        assert_eq!(shoelace(&r.vertices), r.dwl);
    }

    #[test]
    fn inertia_drop_and_restore() {
        let before = LinearCurve::new(0.0, 1.0);
        let drop = dwl_inertia(&d(), &before, &LinearCurve::new(-20.0, 1.0), ShiftKind::Drop).unwrap();
        assert_eq!(drop.dwl, 100.0);
        assert_eq!(drop.realized, Point { price: 70.0, quantity: 50.0 });
        assert_eq!(drop.equilibrium, Point { price: 60.0, quantity: 40.0 });
        let restore = dwl_inertia(&d(), &before, &LinearCurve::new(20.0, 1.0), ShiftKind::Restore).unwrap();
        assert_eq!(restore.dwl, 100.0);
        assert_eq!(dwl_inertia(&d(), &before, &before, ShiftKind::Drop).unwrap().dwl, 0.0);
        assert!(dwl_inertia(&d(), &before, &LinearCurve::new(20.0, 1.0), ShiftKind::Drop).is_err());
        assert!(matches!(
            dwl_inertia(&d(), &before, &LinearCurve::new(60.0, 1.0), ShiftKind::Restore),
            Err(Error::InfeasibleDispatch(_))
        ));
    }

    #[test]
    fn scarcity_is_distinct() {
        let sched = vec![
            MarketScenario { demand: d(), supply: LinearCurve::new(0.0, 1.0), capacity: None, p0: None, event: None },
            MarketScenario {
                demand: d(),
                supply: LinearCurve::new(-20.0, 1.0),
                capacity: Some(45.0),
                p0: None,
                event: Some("drop".into()),
            },
        ];
        assert!(matches!(dwl_series(&sched, Policy::RtrpInertia, None), Err(Error::Scarcity { .. })));
    }

    #[test]
    fn series_policies() {
        let sched: Vec<MarketScenario<f64>> = (0..5)
            .map(|i| MarketScenario {
                demand: d(),
                supply: LinearCurve::new(if i % 2 == 0 { 0.0 } else { -20.0 }, 1.0),
                capacity: None,
                p0: None,
                event: None,
            })
            .collect();
        assert_eq!(dwl_series(&sched, Policy::RtrpInstant, None).unwrap().total, 0.0);
        let inertia = dwl_series(&sched, Policy::RtrpInertia, Some(0.25)).unwrap();
        assert_eq!(inertia.total, 400.0);
        assert_eq!(inertia.total_dollars, Some(100.0));
        let single = dwl_series(&sched[..1], Policy::Fixed, None).unwrap();
        assert_eq!(single.intervals[0], dwl_fixed_price(&d(), &sched[0].supply, 50.0).unwrap());
        assert_eq!("rtrp-inertia".parse::<Policy>().unwrap(), Policy::RtrpInertia);
    }
}
