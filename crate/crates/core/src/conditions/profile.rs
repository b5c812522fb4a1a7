use crate::error::{Error, Result};
use crate::measure::{enlarge, Interval, Potential, WeightedMeasure};
use crate::quad;
use crate::section::DyadicInterval;
use serde::Serialize;

/// Stop bisecting once the balance is this close to 1.
pub const BALANCE_TOL: f64 = 1e-12;

/// `φ_I(x) = 1 + (2(1-α))^{-1} ∫_J V(y) |x^{1-α} - y^{1-α}| dμ(y)` on a balanced `J`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperharmonicProfile {
    pub host: DyadicInterval,
    pub j: Interval,
    /// `μ(J)/|J|²`.
    pub c_j: f64,
    /// `|J|²/μ(J) ∫_J V dμ - 1`.
    pub balance: f64,
    /// `∫_J V dμ`.
    pub v_mass: f64,
    measure: WeightedMeasure,
    potential: Potential,
}

fn balance(m: &WeightedMeasure, v: &Potential, j: &Interval) -> f64 {
    j.len() * j.len() * (m.potential_integral(v, j) / m.mu(j))
}

/// Find `J` between `2I` and `2I^d` with `|J|²/μ(J) ∫_J V dμ = 1`.
///
/// The endpoints move linearly from those of `2I` to those of `2I^d`; the balance is
/// nondecreasing along the way, so bisection applies.
pub fn find_balanced_j(m: &WeightedMeasure, v: &Potential, host: &DyadicInterval) -> Result<SuperharmonicProfile> {
    let alpha = m.alpha();
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "profiles need 0 < alpha < 1",
        });
    }
    let inner = enlarge(&host.interval(), 2.0).support;
    let outer = enlarge(&host.parent().interval(), 2.0).support;
    let at = |s: f64| {
        Interval::of(
            inner.lo() + s * (outer.lo() - inner.lo()),
            inner.hi() + s * (outer.hi() - inner.hi()),
        )
    };
    let f_parent = balance(m, v, &outer);
    if !(f_parent > 1.0) {
        return Err(Error::BalanceUnreachable { f_parent });
    }
    let f_inner = balance(m, v, &inner);
    if f_inner > 1.0 {
        return Err(Error::InvalidParameter {
            name: "host",
            value: f_inner,
            reason: "F(I) > 1: the interval is not in the section",
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut s = 0.0;
    let mut g = f_inner;
    for _ in 0..200 {
        if (g - 1.0).abs() <= BALANCE_TOL {
            break;
        }
        s = 0.5 * (lo + hi);
        g = balance(m, v, &at(s));
        if g > 1.0 {
            hi = s;
        } else {
            lo = s;
        }
    }
    let j = at(s);
    Ok(SuperharmonicProfile {
        host: *host,
        j,
        c_j: m.mu(&j) / (j.len() * j.len()),
        balance: g - 1.0,
        v_mass: m.potential_integral(v, &j),
        measure: *m,
        potential: v.clone(),
    })
}

impl SuperharmonicProfile {
    pub fn alpha(&self) -> f64 {
        self.measure.alpha()
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// `∫_{J ∩ (lo, hi)} V y^e dy`.
    fn moment(&self, lo: f64, hi: f64, e: f64) -> f64 {
        self.potential.moment(lo.max(self.j.lo()), hi.min(self.j.hi()), e)
    }

    /// `x^α φ_I'(x) = ½ (∫_{J, y<x} V dμ - ∫_{J, y>x} V dμ)`.
    pub fn flux(&self, x: f64) -> f64 {
        let a = self.alpha();
        0.5 * (self.moment(0.0, x, a) - self.moment(x, f64::INFINITY, a))
    }

    /// `(φ_I(x), φ_I'(x))` in closed form.
    ///
    /// The derivative is `-½ x^{-α} c_J` left of `J`, `½ x^{-α} c_J` right of it, and
    /// `x^{-α}` times the flux inside.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let a = self.alpha();
        let beta = 1.0 - a;
        let xb = x.powf(beta);
        let left = xb * self.moment(0.0, x, a) - self.moment(0.0, x, 1.0);
        let right = self.moment(x, f64::INFINITY, 1.0) - xb * self.moment(x, f64::INFINITY, a);
        let value = 1.0 + (left + right) / (2.0 * beta);
        let deriv = if x <= self.j.lo() {
            -0.5 * self.c_j * x.powf(-a)
        } else if x >= self.j.hi() {
            0.5 * self.c_j * x.powf(-a)
        } else {
            self.flux(x) * x.powf(-a)
        };
        (value, deriv)
    }

    /// `φ_I(0)`.
    pub fn at_origin(&self) -> f64 {
        let beta = 1.0 - self.alpha();
        1.0 + self.moment(0.0, f64::INFINITY, 1.0) / (2.0 * beta)
    }
}

/// `(φ_I(x), φ_I'(x))`.
pub fn phi_eval(p: &SuperharmonicProfile, x: f64) -> (f64, f64) {
    p.eval(x)
}

/// A compactly supported, piecewise smooth test function.
pub struct TestFunction {
    value: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    derivative: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    support: Interval,
    breaks: Vec<f64>,
}

impl TestFunction {
    /// `ψ` and `ψ'`, supported in `support` and smooth between `breaks`.
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: Interval,
        breaks: Vec<f64>,
    ) -> Self {
        Self {
            value: Box::new(value),
            derivative: Box::new(derivative),
            support,
            breaks,
        }
    }

    /// `((x-lo)(hi-x))²` normalised to peak 1.
    pub fn bump(lo: f64, hi: f64) -> Self {
        let r = 0.5 * (hi - lo);
        let k = 1.0 / (r * r * r * r);
        let inside = move |x: f64| lo < x && x < hi;
        Self::new(
            move |x| if inside(x) { k * ((x - lo) * (hi - x)).powi(2) } else { 0.0 },
            move |x| {
                if inside(x) {
                    2.0 * k * (x - lo) * (hi - x) * (hi + lo - 2.0 * x)
                } else {
                    0.0
                }
            },
            Interval::of(lo, hi),
            vec![],
        )
    }

    /// 1 on `[0, flat]`, then a smoothstep down to 0 at `end`.
    pub fn plateau(flat: f64, end: f64) -> Self {
        let w = end - flat;
        Self::new(
            move |x| 1.0 - crate::hardy::smoothstep((x - flat) / w),
            move |x| {
                let u = (x - flat) / w;
                if (0.0..=1.0).contains(&u) {
                    -6.0 * u * (1.0 - u) / w
                } else {
                    0.0
                }
            },
            Interval::of(0.0, end),
            vec![flat],
        )
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }

    pub fn support(&self) -> Interval {
        self.support
    }
}

/// The terms of `∫ψ'φ_I' dμ + ∫ψ 1_J V dμ - ψ(0) c_J/2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakIdentityReport {
    /// `∫ ψ' φ_I' dμ`.
    pub stiffness: f64,
    /// `∫ ψ 1_J V dμ`.
    pub load: f64,
    /// `ψ(0) c_J/2`, from `-lim_{x→0} x^α φ_I'(x) = c_J/2`.
    pub boundary: f64,
    /// `|stiffness + load - boundary|`.
    pub residual: f64,
    /// `|stiffness + load|`, the residual if the boundary term is dropped.
    pub residual_without_boundary: f64,
}

const PANELS_PER_SEGMENT: usize = 32;

fn segments(p: &SuperharmonicProfile, psi: &TestFunction) -> Vec<f64> {
    let s = psi.support();
    let mut pts: Vec<f64> = [s.lo(), s.hi(), p.j.lo(), p.j.hi()]
        .into_iter()
        .chain(psi.breaks.iter().copied())
        .chain(p.potential.breakpoints())
        .filter(|&x| s.lo() <= x && x <= s.hi())
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Residual of the weak form of `-(x^α φ_I')' = -x^α 1_J V` with its boundary term at 0.
pub fn phi_equation_residual(p: &SuperharmonicProfile, psi: &TestFunction) -> WeakIdentityReport {
    let a = p.alpha();
    let pts = segments(p, psi);
    let fixed = |f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, e: f64| {
        quad::power_weighted(f, lo, hi, e, (hi - lo) / PANELS_PER_SEGMENT as f64, 10)
    };
    let mut stiffness = 0.0;
    let mut load = 0.0;
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        stiffness += fixed(&|x| psi.derivative(x) * p.flux(x), lo, hi, 0.0);
        let (jl, jh) = (lo.max(p.j.lo()), hi.min(p.j.hi()));
        if jh > jl {
            for piece in p.potential.pieces() {
                let (pl, ph) = (jl.max(piece.interval.lo()), jh.min(piece.interval.hi()));
                if ph > pl && piece.value != 0.0 {
                    load += piece.value * fixed(&|x| psi.value(x), pl, ph, a);
                }
            }
            if let Some(t) = p.potential.power_tail() {
                if t.coeff != 0.0 {
                    load += t.coeff * fixed(&|x| psi.value(x), jl, jh, a - t.gamma);
                }
            }
        }
    }
    let boundary = psi.value(0.0) * 0.5 * p.v_mass;
    WeakIdentityReport {
        stiffness,
        load,
        boundary,
        residual: (stiffness + load - boundary).abs(),
        residual_without_boundary: (stiffness + load).abs(),
    }
}
