//! Special functions: the unnormalized sinc lineshape and integer-order Bessel
//! rows J_n(x) with a certified truncation tail.

use crate::error::{Error, Result};

/// Below this magnitude sinc switches to its Taylor polynomial.
const SINC_TAYLOR_CUTOFF: f64 = 1e-4;

/// Largest tail bound accepted for a [`BesselRow`].
pub const BESSEL_TAIL_TARGET: f64 = 1e-16;

/// Unnormalized sinc, `sin(x)/x`, with `sinc(0) = 1`.
///
/// The function is evaluated on `|x|`, so `sinc(x)` and `sinc(-x)` are
/// bit-identical.
pub fn sinc(x: f64) -> f64 {
    let ax = x.abs();
    if ax < SINC_TAYLOR_CUTOFF {
        let x2 = ax * ax;
        // 1 - x^2/6 + x^4/120; the next term is below 1e-25 here
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        ax.sin() / ax
    }
}

/// A band of Bessel functions J_n(x) for `n` in `-order_max..=order_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselRow {
    argument: f64,
    order_max: usize,
    /// J_n(x) for n = -order_max ..= order_max
    values: Vec<f64>,
    tail_bound: f64,
}

impl BesselRow {
    pub fn argument(&self) -> f64 {
        self.argument
    }

    pub fn order_min(&self) -> i64 {
        -(self.order_max as i64)
    }

    pub fn order_max(&self) -> i64 {
        self.order_max as i64
    }

    /// Upper bound on |J_n(x)| for every order outside the band.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// J_n(x); orders outside the band return 0 (they are below `tail_bound`).
    pub fn get(&self, n: i64) -> f64 {
        if n.unsigned_abs() as usize > self.order_max {
            0.0
        } else {
            self.values[(n + self.order_max as i64) as usize]
        }
    }

    /// Values ordered from `order_min` to `order_max`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let lo = self.order_min();
        self.values.iter().enumerate().map(move |(i, &v)| (lo + i as i64, v))
    }

    /// Σ_n J_n(x) J_{n+shift}(x) over the band.
    pub fn correlation(&self, shift: i64) -> f64 {
        let mut acc = NeumaierSum::default();
        for (n, jn) in self.iter() {
            acc.add(jn * self.get(n + shift));
        }
        acc.sum()
    }
}

/// Default band start for the downward recurrence.
fn default_band(x: f64) -> usize {
    let start = (x + 10.0 * x.cbrt() + 12.0).ceil() as usize;
    start.max(20)
}

/// Bound (x/2)^(n+1)/(n+1)! · 1/(1 - x/(2(n+2))) on Σ_{k>n} |J_k(x)|.
fn tail_bound(x: f64, n: usize) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=(n + 1) {
        term *= half / k as f64;
    }
    let ratio = half / (n as f64 + 2.0);
    if ratio >= 1.0 {
        f64::INFINITY
    } else {
        term / (1.0 - ratio)
    }
}

/// Computes J_n(x) for |n| ≤ N with Miller's downward recurrence.
///
/// The band is at least `requested_band` and is widened until the tail bound
/// drops below [`BESSEL_TAIL_TARGET`].
pub fn bessel_row(x: f64, requested_band: usize) -> Result<BesselRow> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("bessel argument must be finite, got {x}")));
    }
    if x < 0.0 {
        return Err(Error::InvalidInput(format!("bessel argument must be >= 0, got {x}")));
    }

    let mut order_max = requested_band.max(default_band(x));
    let mut bound = tail_bound(x, order_max);
    while bound >= BESSEL_TAIL_TARGET {
        order_max += 4;
        bound = tail_bound(x, order_max);
    }

    let mut values = vec![0.0; 2 * order_max + 1];
    if x == 0.0 {
        values[order_max] = 1.0;
        return Ok(BesselRow { argument: x, order_max, values, tail_bound: 0.0 });
    }

    let positive = miller_downward(x, order_max);
    for (n, &jn) in positive.iter().enumerate() {
        values[order_max + n] = jn;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        values[order_max - n] = sign * jn;
    }

    Ok(BesselRow { argument: x, order_max, values, tail_bound: bound })
}

/// J_0..=J_order_max for x > 0.
fn miller_downward(x: f64, order_max: usize) -> Vec<f64> {
    // start well above the band so the seeded error has decayed by order_max
    let extra = 16 + (40.0 * order_max as f64).sqrt() as usize;
    let mut start = order_max + extra;
    if start % 2 == 1 {
        start += 1;
    }

    let mut out = vec![0.0; order_max + 1];
    let mut j_next = 0.0; // J_{k+1}
    let mut j_cur = 1e-300; // J_k, arbitrary seed
    let mut even_sum = 0.0;
    let two_over_x = 2.0 / x;

    for k in (1..=start).rev() {
        if k <= order_max {
            out[k] = j_cur;
        }
        if k % 2 == 0 {
            even_sum += j_cur;
        }
        let j_prev = k as f64 * two_over_x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;

        if j_cur.abs() > 1e250 {
            let scale = 1e-250;
            j_cur *= scale;
            j_next *= scale;
            even_sum *= scale;
            for v in out.iter_mut() {
                *v *= scale;
            }
        }
    }
    out[0] = j_cur;

    // J_0 + 2 Σ_{k≥1} J_{2k} = 1
    let norm = j_cur + 2.0 * even_sum;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}
