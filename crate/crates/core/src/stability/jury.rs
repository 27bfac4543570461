use alloc::vec::Vec;

use super::CharPoly;

/// Outcome of the Jury (Schur–Cohn) table test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JuryVerdict {
    /// Every root strictly inside the unit circle.
    Stable,
    /// Some root strictly outside.
    Unstable,
    /// A decisive quantity fell within the tolerance band around zero; a root
    /// is on (or numerically indistinguishable from) the unit circle.
    Marginal,
}

impl JuryVerdict {
    pub fn is_stable(self) -> bool {
        self == JuryVerdict::Stable
    }
}

/// Relative width of the marginal band, scaled by the largest coefficient of
/// the row being examined.
pub const JURY_TOLERANCE: f64 = 1e-12;

fn normalise(row: &mut [f64]) {
    let m = row.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if m > 0.0 {
        for c in row.iter_mut() {
            *c /= m;
        }
    }
}

fn decide(lhs: f64, rhs: f64, scale: f64) -> Option<JuryVerdict> {
    let d = lhs - rhs;
    if d.abs() <= JURY_TOLERANCE * scale {
        Some(JuryVerdict::Marginal)
    } else if d < 0.0 {
        Some(JuryVerdict::Unstable)
    } else {
        None
    }
}

/// Jury stability test.
///
/// Checks the necessary conditions `P(1) > 0`, `(−1)^n P(−1) > 0` and
/// `|a_0| < a_n` first, then reduces the table row by row with
/// `Q(z) = (a_n P(z) − a_0 P*(z)) / z`, requiring `|a_0| < |a_n|` at every
/// row. Each row is rescaled to unit maximum so that high-degree polynomials
/// with large coefficients do not overflow.
pub fn jury(poly: &CharPoly) -> JuryVerdict {
    let mut row: Vec<f64> = poly.ascending();
    let n = row.len() - 1;
    if n == 0 {
        return JuryVerdict::Stable;
    }
    if row[n] < 0.0 {
        for c in row.iter_mut() {
            *c = -*c;
        }
    }
    normalise(&mut row);
    let scale: f64 = row.iter().map(|c| c.abs()).sum();

    let p1: f64 = row.iter().sum();
    if let Some(v) = decide(p1, 0.0, scale) {
        return v;
    }
    let pm1: f64 = row
        .iter()
        .enumerate()
        .map(|(i, c)| if (n - i) % 2 == 0 { *c } else { -*c })
        .sum();
    if let Some(v) = decide(pm1, 0.0, scale) {
        return v;
    }

    while row.len() > 1 {
        let m = row.len() - 1;
        let (a0, am) = (row[0], row[m]);
        if let Some(v) = decide(am.abs(), a0.abs(), 1.0) {
            return v;
        }
        let mut next: Vec<f64> = (0..m)
            .map(|j| am * row[j + 1] - a0 * row[m - j - 1])
            .collect();
        normalise(&mut next);
        row = next;
    }
    JuryVerdict::Stable
}

/// `true` iff [`jury`] returns [`JuryVerdict::Stable`].
pub fn jury_stable(poly: &CharPoly) -> bool {
    jury(poly).is_stable()
}
