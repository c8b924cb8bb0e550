//! Growth profiles g(y) for the shifting environment.
//!
//! A profile is a positive function of the moving coordinate y = x - c1*t
//! with finite limits r_minus = g(-inf) and r_plus = g(+inf). Everything
//! downstream (eigenvalue, speed formulas, Hamilton-Jacobi limiters, PDE
//! coefficients) consumes profiles through this module.

use serde::{Deserialize, Serialize};

use crate::error::ProfileError;

/// Tagged profile shapes understood by the JSON run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    /// g(y) = g0 everywhere.
    Constant { g0: f64 },
    /// Step function: `values[i]` on (breaks[i-1], breaks[i]], with
    /// `values[0]` left of the first break and `values.last()` from the
    /// last break on. `values.len() == breaks.len() + 1`.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
    /// r_minus for y < 0, r_mid on [0, L), r_plus for y >= L.
    ThreePatch {
        r_minus: f64,
        r_mid: f64,
        r_plus: f64,
        #[serde(rename = "L")]
        patch_length: f64,
    },
    /// Smooth monotone ramp r_minus -> r_plus with slope scale `steepness`.
    TanhRamp {
        r_minus: f64,
        r_plus: f64,
        steepness: f64,
    },
    /// Table of (y, g) pairs, linearly interpolated inside, declared
    /// asymptotes outside.
    Sampled {
        table: Vec<(f64, f64)>,
        r_minus: f64,
        r_plus: f64,
    },
}

/// A validated growth profile with cached asymptotes and extrema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileKind", into = "ProfileKind")]
pub struct EnvironmentProfile {
    kind: ProfileKind,
    r_minus: f64,
    r_plus: f64,
    inf_g: f64,
    sup_g: f64,
}

impl TryFrom<ProfileKind> for EnvironmentProfile {
    type Error = ProfileError;
    fn try_from(kind: ProfileKind) -> Result<Self, ProfileError> {
        EnvironmentProfile::new(kind)
    }
}

impl From<EnvironmentProfile> for ProfileKind {
    fn from(p: EnvironmentProfile) -> ProfileKind {
        p.kind
    }
}

impl EnvironmentProfile {
    pub fn new(kind: ProfileKind) -> Result<Self, ProfileError> {
        validate_kind(&kind)?;
        let (r_minus, r_plus) = asymptotes(&kind);
        let (inf_g, sup_g) = extrema(&kind);
        if inf_g <= 0.0 {
            return Err(ProfileError::NonPositive { inf_g });
        }
        Ok(Self {
            kind,
            r_minus,
            r_plus,
            inf_g,
            sup_g,
        })
    }

    pub fn constant(g0: f64) -> Result<Self, ProfileError> {
        Self::new(ProfileKind::Constant { g0 })
    }

    pub fn three_patch(
        r_minus: f64,
        r_mid: f64,
        r_plus: f64,
        patch_length: f64,
    ) -> Result<Self, ProfileError> {
        Self::new(ProfileKind::ThreePatch {
            r_minus,
            r_mid,
            r_plus,
            patch_length,
        })
    }

    pub fn tanh_ramp(r_minus: f64, r_plus: f64, steepness: f64) -> Result<Self, ProfileError> {
        Self::new(ProfileKind::TanhRamp {
            r_minus,
            r_plus,
            steepness,
        })
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    /// g(-inf)
    pub fn r_minus(&self) -> f64 {
        self.r_minus
    }

    /// g(+inf)
    pub fn r_plus(&self) -> f64 {
        self.r_plus
    }

    pub fn inf_g(&self) -> f64 {
        self.inf_g
    }

    pub fn sup_g(&self) -> f64 {
        self.sup_g
    }

    /// g(y). Total on finite y.
    pub fn evaluate(&self, y: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant { g0 } => *g0,
            ProfileKind::PiecewiseConstant { breaks, values } => {
                // values[i] on (breaks[i-1], breaks[i]]
                let idx = breaks.partition_point(|b| y > *b);
                values[idx]
            }
            ProfileKind::ThreePatch {
                r_minus,
                r_mid,
                r_plus,
                patch_length,
            } => {
                if y < 0.0 {
                    *r_minus
                } else if y < *patch_length {
                    *r_mid
                } else {
                    *r_plus
                }
            }
            ProfileKind::TanhRamp {
                r_minus,
                r_plus,
                steepness,
            } => r_minus + (r_plus - r_minus) * 0.5 * (1.0 + (steepness * y).tanh()),
            ProfileKind::Sampled {
                table,
                r_minus,
                r_plus,
            } => {
                if y < table[0].0 {
                    return *r_minus;
                }
                if y > table[table.len() - 1].0 {
                    return *r_plus;
                }
                let j = table.partition_point(|p| p.0 <= y);
                if j == 0 {
                    return table[0].1;
                }
                if j == table.len() {
                    return table[j - 1].1;
                }
                let (y0, g0) = table[j - 1];
                let (y1, g1) = table[j];
                g0 + (g1 - g0) * (y - y0) / (y1 - y0)
            }
        }
    }

    /// Cell average (1/h) * integral of g over [y - h/2, y + h/2].
    ///
    /// The eigensolver samples the potential this way so that jump
    /// discontinuities cost O(h^2) instead of O(h) in the computed
    /// eigenvalue.
    pub fn mean_on_cell(&self, y: f64, h: f64) -> f64 {
        let a = y - 0.5 * h;
        let b = y + 0.5 * h;
        match &self.kind {
            ProfileKind::Constant { g0 } => *g0,
            ProfileKind::TanhRamp {
                r_minus,
                r_plus,
                steepness,
            } => {
                // antiderivative of tanh(s*y) is ln(cosh(s*y))/s
                let s = *steepness;
                let d = 0.5 * (r_plus - r_minus);
                let mid = 0.5 * (r_plus + r_minus);
                // ln cosh without overflow for large |x|
                let lc = |x: f64| x.abs() + (-2.0 * x.abs()).exp().ln_1p() - std::f64::consts::LN_2;
                mid + d * (lc(s * b) - lc(s * a)) / (s * (b - a))
            }
            _ => {
                // piecewise-linear / piecewise-constant kinds: integrate
                // exactly by splitting at interior breakpoints
                let mut pts = vec![a];
                for &bp in self.breakpoints().iter() {
                    if bp > a && bp < b {
                        pts.push(bp);
                    }
                }
                pts.push(b);
                pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
                let mut acc = 0.0;
                for w in pts.windows(2) {
                    let m = 0.5 * (w[0] + w[1]);
                    // linear (or constant) on each subinterval, midpoint is exact
                    acc += self.evaluate(m) * (w[1] - w[0]);
                }
                acc / (b - a)
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            ProfileKind::PiecewiseConstant { breaks, .. } => breaks.clone(),
            ProfileKind::ThreePatch { patch_length, .. } => vec![0.0, *patch_length],
            ProfileKind::Sampled { table, .. } => table.iter().map(|p| p.0).collect(),
            _ => Vec::new(),
        }
    }

    /// The profile y -> g(-y), with the asymptotes swapped.
    ///
    /// A reflected ThreePatch is normalized back onto [0, L); the shift
    /// does not affect asymptotes, extrema, or the eigenvalue.
    pub fn reflect(&self) -> EnvironmentProfile {
        let kind = match &self.kind {
            ProfileKind::Constant { g0 } => ProfileKind::Constant { g0: *g0 },
            ProfileKind::PiecewiseConstant { breaks, values } => {
                let rev_breaks: Vec<f64> = breaks.iter().rev().map(|b| -b).collect();
                let rev_values: Vec<f64> = values.iter().rev().cloned().collect();
                ProfileKind::PiecewiseConstant {
                    breaks: rev_breaks,
                    values: rev_values,
                }
            }
            ProfileKind::ThreePatch {
                r_minus,
                r_mid,
                r_plus,
                patch_length,
            } => ProfileKind::ThreePatch {
                r_minus: *r_plus,
                r_mid: *r_mid,
                r_plus: *r_minus,
                patch_length: *patch_length,
            },
            ProfileKind::TanhRamp {
                r_minus,
                r_plus,
                steepness,
            } => ProfileKind::TanhRamp {
                r_minus: *r_plus,
                r_plus: *r_minus,
                steepness: *steepness,
            },
            ProfileKind::Sampled {
                table,
                r_minus,
                r_plus,
            } => ProfileKind::Sampled {
                table: table.iter().rev().map(|&(y, g)| (-y, g)).collect(),
                r_minus: *r_plus,
                r_plus: *r_minus,
            },
        };
        EnvironmentProfile::new(kind).expect("reflection preserves validity")
    }
}

fn validate_kind(kind: &ProfileKind) -> Result<(), ProfileError> {
    match kind {
        ProfileKind::Constant { .. } => Ok(()),
        ProfileKind::PiecewiseConstant { breaks, values } => {
            if values.len() != breaks.len() + 1 {
                return Err(ProfileError::LengthMismatch {
                    breaks: breaks.len(),
                    values: values.len(),
                });
            }
            if breaks.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ProfileError::NonAscendingBreaks);
            }
            Ok(())
        }
        ProfileKind::ThreePatch { patch_length, .. } => {
            if *patch_length <= 0.0 {
                return Err(ProfileError::NonPositiveLength {
                    length: *patch_length,
                });
            }
            Ok(())
        }
        ProfileKind::TanhRamp { steepness, .. } => {
            if *steepness <= 0.0 {
                return Err(ProfileError::NonPositiveLength { length: *steepness });
            }
            Ok(())
        }
        ProfileKind::Sampled { table, .. } => {
            if table.is_empty() {
                return Err(ProfileError::EmptyTable);
            }
            if table.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(ProfileError::NonAscendingBreaks);
            }
            Ok(())
        }
    }
}

fn asymptotes(kind: &ProfileKind) -> (f64, f64) {
    match kind {
        ProfileKind::Constant { g0 } => (*g0, *g0),
        ProfileKind::PiecewiseConstant { values, .. } => (values[0], values[values.len() - 1]),
        ProfileKind::ThreePatch {
            r_minus, r_plus, ..
        }
        | ProfileKind::TanhRamp {
            r_minus, r_plus, ..
        }
        | ProfileKind::Sampled {
            r_minus, r_plus, ..
        } => (*r_minus, *r_plus),
    }
}

fn extrema(kind: &ProfileKind) -> (f64, f64) {
    let fold = |vals: &mut dyn Iterator<Item = f64>| {
        vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
    };
    match kind {
        ProfileKind::Constant { g0 } => (*g0, *g0),
        ProfileKind::PiecewiseConstant { values, .. } => fold(&mut values.iter().cloned()),
        ProfileKind::ThreePatch {
            r_minus,
            r_mid,
            r_plus,
            ..
        } => fold(&mut [*r_minus, *r_mid, *r_plus].into_iter()),
        ProfileKind::TanhRamp {
            r_minus, r_plus, ..
        } => fold(&mut [*r_minus, *r_plus].into_iter()),
        ProfileKind::Sampled {
            table,
            r_minus,
            r_plus,
        } => fold(&mut table.iter().map(|p| p.1).chain([*r_minus, *r_plus])),
    }
}
