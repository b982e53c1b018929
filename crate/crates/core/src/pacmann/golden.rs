/// `φ⁻¹ = (√5 − 1)/2`.
pub const INV_PHI: f64 = 0.618_033_988_749_894_9;
/// `1 − φ⁻¹`.
pub const ONE_MINUS_INV_PHI: f64 = 1.0 - INV_PHI;

/// Golden-section bracket on `ξ ∈ [lo, hi]`, maximizing.
///
/// Shrinks to `[lo, x_r]` when `f(x_l) > f(x_r)`, else to `[x_l, hi]`; each
/// shrink needs one new evaluation, at [`GoldenBracket::probe`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoldenBracket {
    pub lo: f64,
    pub hi: f64,
    pub xl: f64,
    pub xr: f64,
    pub fl: f64,
    pub fr: f64,
    /// Which interior point awaits an evaluation after the last shrink.
    pending_left: bool,
}

impl GoldenBracket {
    /// Interior points of `[lo, hi]`; evaluate them and pass the values to [`GoldenBracket::start`].
    pub fn interior(lo: f64, hi: f64) -> (f64, f64) {
        (lo + ONE_MINUS_INV_PHI * (hi - lo), lo + INV_PHI * (hi - lo))
    }

    pub fn start(lo: f64, hi: f64, fl: f64, fr: f64) -> Self {
        let (xl, xr) = Self::interior(lo, hi);
        GoldenBracket { lo, hi, xl, xr, fl, fr, pending_left: false }
    }

    /// Shrinks the bracket and returns the new interior point needing a value.
    pub fn shrink(&mut self) -> f64 {
        if self.fl > self.fr {
            self.hi = self.xr;
            self.xr = self.xl;
            self.fr = self.fl;
            self.xl = self.lo + ONE_MINUS_INV_PHI * (self.hi - self.lo);
            self.pending_left = true;
            self.xl
        } else {
            self.lo = self.xl;
            self.xl = self.xr;
            self.fl = self.fr;
            self.xr = self.lo + INV_PHI * (self.hi - self.lo);
            self.pending_left = false;
            self.xr
        }
    }

    /// Records the value at the point returned by the last [`GoldenBracket::shrink`].
    pub fn probe(&mut self, value: f64) {
        if self.pending_left {
            self.fl = value;
        } else {
            self.fr = value;
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Maximizes `f` along the ray `x + ξ·s·g`, `ξ ∈ [0, 1]`, with `t` shrinks and
/// returns the bracket midpoint. A zero gradient returns `x`.
pub fn golden_section_move(x: &[f64], g: &[f64], f: impl Fn(&[f64]) -> f64, s: f64, t: usize) -> Vec<f64> {
    if g.iter().all(|&v| v == 0.0) || t == 0 {
        return x.to_vec();
    }
    let at = |xi: f64| -> Vec<f64> { x.iter().zip(g).map(|(x, g)| x + xi * s * g).collect() };
    let (xl, xr) = GoldenBracket::interior(0.0, 1.0);
    let mut bracket = GoldenBracket::start(0.0, 1.0, f(&at(xl)), f(&at(xr)));
    for k in 0..t {
        let probe = bracket.shrink();
        // The midpoint after the last shrink does not depend on the new probe.
        if k + 1 < t {
            bracket.probe(f(&at(probe)));
        }
    }
    at(bracket.midpoint())
}
