//! Hurricane-driven line failure probabilities (tower fragility, segment
//! failure rates with Markov accumulation, series-system line failure).

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// Hurricane track and parametric radial field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HurricaneTrack {
    /// Center position `(x_km, y_km)` for every slot of the horizon.
    pub positions: Vec<[f64; 2]>,
    /// Peak equivalent wind speed per slot (m/s).
    pub peak_wind: Vec<f64>,
    /// Peak rainfall rate per slot (mm/h).
    pub peak_rain: Vec<f64>,
    /// Radial decay length of the field (km).
    pub decay_km: f64,
    /// Radius beyond which the field is zero (km). Zero means no reach.
    pub cutoff_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerSpec {
    pub x_km: f64,
    pub y_km: f64,
    /// Design-mean wind speed μ (m/s).
    pub mu: f64,
    /// Design deviation σ (m/s), positive.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub x_km: f64,
    pub y_km: f64,
    /// Segment length L (km).
    pub length_km: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Design wind speed S (m/s).
    pub design_wind: f64,
    /// Design rainfall rate RF (mm/h).
    pub design_rain: f64,
}

/// Towers and conductor segments of one line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineAssets {
    pub line: String,
    #[serde(default)]
    pub towers: Vec<TowerSpec>,
    #[serde(default)]
    pub segments: Vec<SegmentSpec>,
}

/// Per-line, per-slot failure probabilities `π[line][t]`, `t` 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureProfile {
    pub lines: Vec<String>,
    pub pi: Vec<Vec<f64>>,
}

impl FailureProfile {
    pub fn zeros(lines: &[String], horizon: usize) -> Self {
        Self {
            lines: lines.to_vec(),
            pi: vec![vec![0.0; horizon]; lines.len()],
        }
    }

    pub fn horizon(&self) -> usize {
        self.pi.first().map_or(0, Vec::len)
    }

    pub fn get(&self, line: &str, t: usize) -> Option<f64> {
        let l = self.lines.iter().position(|id| id == line)?;
        self.pi[l].get(t).copied()
    }

    /// Checks `0 ≤ π ≤ 1` and monotonicity in time for every line.
    pub fn check_invariants(&self) -> Result<()> {
        for (id, row) in self.lines.iter().zip(&self.pi) {
            for (t, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(input(format!("π for line `{id}` at slot {t} is {p}")));
                }
                if t > 0 && p < row[t - 1] {
                    return Err(input(format!("π for line `{id}` decreases at slot {t}")));
                }
            }
        }
        Ok(())
    }
}

fn distance(a: [f64; 2], x: f64, y: f64) -> f64 {
    ((a[0] - x).powi(2) + (a[1] - y).powi(2)).sqrt()
}

impl HurricaneTrack {
    pub fn horizon(&self) -> usize {
        self.positions.len()
    }

    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        let t = self.positions.len();
        if self.peak_wind.len() != t || self.peak_rain.len() != t {
            v.push(format!(
                "hurricane track has {} positions but {} wind and {} rain values",
                t,
                self.peak_wind.len(),
                self.peak_rain.len()
            ));
        }
        if self.peak_wind.iter().chain(&self.peak_rain).any(|w| !(*w >= 0.0 && w.is_finite())) {
            v.push("hurricane peak wind and rain must be finite and nonnegative".into());
        }
        if !(self.decay_km > 0.0 && self.decay_km.is_finite()) {
            v.push(format!("hurricane decay length must be positive, got {}", self.decay_km));
        }
        if !(self.cutoff_km >= 0.0 && self.cutoff_km.is_finite()) {
            v.push(format!("hurricane cutoff radius must be nonnegative, got {}", self.cutoff_km));
        }
        v
    }

    /// Whether the field reaches `(x, y)` at slot `t`.
    fn reaches(&self, x: f64, y: f64, t: usize) -> bool {
        self.cutoff_km > 0.0 && distance(self.positions[t], x, y) <= self.cutoff_km
    }
}

/// Equivalent wind (m/s) and rain (mm/h) at `location` in slot `t` (0-based):
/// `peak · exp(−dist/decay)` inside the cutoff radius, zero outside.
pub fn field_at(track: &HurricaneTrack, location: (f64, f64), t: usize) -> Result<(f64, f64)> {
    if t >= track.horizon() || t >= track.peak_wind.len() || t >= track.peak_rain.len() {
        return Err(input(format!("slot {t} outside hurricane horizon {}", track.horizon())));
    }
    let (x, y) = location;
    if !track.reaches(x, y, t) {
        return Ok((0.0, 0.0));
    }
    let f = (-distance(track.positions[t], x, y) / track.decay_km).exp();
    Ok((track.peak_wind[t] * f, track.peak_rain[t] * f))
}

/// Standard normal CDF through the complementary error function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Eq. (1): `Φ((wind − μ)/σ)`.
pub fn tower_failure_prob(tower: &TowerSpec, wind: f64) -> Result<f64> {
    if !(tower.sigma > 0.0) {
        return Err(input(format!("tower sigma must be positive, got {}", tower.sigma)));
    }
    if wind.is_nan() {
        return Err(input("wind speed is NaN"));
    }
    Ok(normal_cdf((wind - tower.mu) / tower.sigma).clamp(0.0, 1.0))
}

/// Eq. (2): `λ = L · exp(a·s/S + b·Rf/RF + c)`.
pub fn segment_failure_rate(seg: &SegmentSpec, wind: f64, rain: f64) -> Result<f64> {
    if !(seg.design_wind > 0.0) || !(seg.design_rain > 0.0) {
        return Err(input("segment design wind and rain must be positive"));
    }
    if !(seg.length_km >= 0.0) {
        return Err(input(format!("segment length must be nonnegative, got {}", seg.length_km)));
    }
    if seg.length_km == 0.0 {
        return Ok(0.0);
    }
    Ok(seg.length_km * (seg.a * wind / seg.design_wind + seg.b * rain / seg.design_rain + seg.c).exp())
}

/// Eq. (3): one step of the constant-rate Markov failure process.
pub fn markov_prob_step(prev: f64, rate: f64, dt: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&prev) {
        return Err(input(format!("previous probability {prev} outside [0, 1]")));
    }
    if !(rate >= 0.0) || !(dt > 0.0) {
        return Err(input(format!("rate must be ≥ 0 and dt > 0 (rate {rate}, dt {dt})")));
    }
    // -expm1(-x) = 1 - e^{-x} without cancellation for small x.
    let step = -(-rate * dt).exp_m1();
    Ok(((1.0 - prev) * step + prev).clamp(prev, 1.0))
}

/// Eq. (4): series system of independent towers and segments.
pub fn line_failure_prob(tower_probs: &[f64], segment_probs: &[f64]) -> Result<f64> {
    let mut survive = 1.0;
    for &p in tower_probs.iter().chain(segment_probs) {
        if !(0.0..=1.0).contains(&p) {
            return Err(input(format!("component probability {p} outside [0, 1]")));
        }
        survive *= 1.0 - p;
    }
    Ok((1.0 - survive).clamp(0.0, 1.0))
}

/// Composes Eq. (1)–(4) into a profile for `lines` (in that order).
///
/// Assets outside the field's reach contribute nothing (Remark 1). Tower
/// probabilities use the largest wind seen so far, which keeps line
/// probabilities non-decreasing in time; segments accumulate through Eq. (3)
/// from `π⁰ = 0`.
pub fn build_failure_profile(
    track: &HurricaneTrack,
    assets: &[LineAssets],
    lines: &[String],
    dt: f64,
) -> Result<FailureProfile> {
    if let Some(e) = track.validate().into_iter().next() {
        return Err(input(e));
    }
    let horizon = track.horizon();
    let mut pi = Vec::with_capacity(lines.len());
    for id in lines {
        let a = assets
            .iter()
            .find(|a| &a.line == id)
            .ok_or_else(|| input(format!("no hazard assets for line `{id}`")))?;
        if a.towers.is_empty() && a.segments.is_empty() {
            return Err(input(format!("line `{id}` has neither towers nor segments")));
        }
        let mut tower_wind: Vec<Option<f64>> = vec![None; a.towers.len()];
        let mut seg_prob = vec![0.0; a.segments.len()];
        let mut row = Vec::with_capacity(horizon);
        for t in 0..horizon {
            let mut tp = Vec::with_capacity(a.towers.len());
            for (k, tw) in a.towers.iter().enumerate() {
                if track.reaches(tw.x_km, tw.y_km, t) {
                    let (w, _) = field_at(track, (tw.x_km, tw.y_km), t)?;
                    tower_wind[k] = Some(tower_wind[k].map_or(w, |m: f64| m.max(w)));
                }
                tp.push(match tower_wind[k] {
                    Some(w) => tower_failure_prob(tw, w)?,
                    None => {
                        if !(tw.sigma > 0.0) {
                            return Err(input(format!("tower sigma on line `{id}` must be positive")));
                        }
                        0.0
                    }
                });
            }
            for (l, sg) in a.segments.iter().enumerate() {
                let rate = if track.reaches(sg.x_km, sg.y_km, t) {
                    let (w, r) = field_at(track, (sg.x_km, sg.y_km), t)?;
                    segment_failure_rate(sg, w, r)?
                } else {
                    0.0
                };
                seg_prob[l] = markov_prob_step(seg_prob[l], rate, dt)?;
            }
            let p = line_failure_prob(&tp, &seg_prob)?;
            // Guard against rounding producing a microscopic decrease.
            let p = row.last().map_or(p, |&q: &f64| p.max(q));
            row.push(p);
        }
        pi.push(row);
    }
    Ok(FailureProfile {
        lines: lines.to_vec(),
        pi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track(cutoff: f64) -> HurricaneTrack {
        HurricaneTrack {
            positions: vec![[0.0, 0.0], [10.0, 0.0], [20.0, 0.0]],
            peak_wind: vec![50.0, 60.0, 40.0],
            peak_rain: vec![20.0, 30.0, 10.0],
            decay_km: 10.0,
            cutoff_km: cutoff,
        }
    }

    #[test]
    fn field_examples() {
        let tr = track(100.0);
        assert_eq!(field_at(&tr, (0.0, 0.0), 0).unwrap(), (50.0, 20.0));
        let (w, _) = field_at(&tr, (10.0, 0.0), 0).unwrap();
        assert!((w - 50.0 / std::f64::consts::E).abs() < 1e-12);
        assert_eq!(field_at(&tr, (500.0, 0.0), 0).unwrap(), (0.0, 0.0));
        assert!(field_at(&tr, (0.0, 0.0), 3).is_err());
    }

    #[test]
    fn tower_examples() {
        let tw = TowerSpec { x_km: 0.0, y_km: 0.0, mu: 40.0, sigma: 5.0 };
        assert!((tower_failure_prob(&tw, 40.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((tower_failure_prob(&tw, 45.0).unwrap() - 0.841_344_746_068_542_9).abs() < 1e-12);
        assert_eq!(tower_failure_prob(&tw, f64::NEG_INFINITY).unwrap(), 0.0);
        let bad = TowerSpec { sigma: 0.0, ..tw };
        assert!(tower_failure_prob(&bad, 1.0).is_err());
    }

    #[test]
    fn segment_examples() {
        let s = SegmentSpec {
            x_km: 0.0,
            y_km: 0.0,
            length_km: 1.0,
            a: 0.0,
            b: 0.0,
            c: -1.0,
            design_wind: 30.0,
            design_rain: 50.0,
        };
        assert!((segment_failure_rate(&s, 0.0, 0.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        let s2 = SegmentSpec { length_km: 2.0, a: 1.0, b: 1.0, c: 0.0, ..s.clone() };
        assert!((segment_failure_rate(&s2, 30.0, 50.0).unwrap() - 2.0 * 2f64.exp()).abs() < 1e-12);
        let s0 = SegmentSpec { length_km: 0.0, ..s };
        assert_eq!(segment_failure_rate(&s0, 99.0, 99.0).unwrap(), 0.0);
    }

    #[test]
    fn markov_and_line_examples() {
        assert_eq!(markov_prob_step(0.3, 0.0, 1.0).unwrap(), 0.3);
        assert_eq!(markov_prob_step(1.0, 5.0, 1.0).unwrap(), 1.0);
        assert!((markov_prob_step(0.0, 0.1, 1.0).unwrap() - 0.095_162_581_964_040_43).abs() < 1e-15);
        assert!(markov_prob_step(1.5, 0.1, 1.0).is_err());
        assert_eq!(line_failure_prob(&[0.0, 0.0], &[0.0]).unwrap(), 0.0);
        assert_eq!(line_failure_prob(&[0.2, 1.0], &[]).unwrap(), 1.0);
        assert!((line_failure_prob(&[0.1], &[0.2]).unwrap() - 0.28).abs() < 1e-15);
        assert!(line_failure_prob(&[-0.1], &[]).is_err());
    }

    #[test]
    fn profile_examples() {
        let lines = vec!["L".to_string()];
        // Constant λ = 0.1 from a zero-length-exponent segment at the center.
        let tr = HurricaneTrack {
            positions: vec![[0.0, 0.0]; 2],
            peak_wind: vec![0.0; 2],
            peak_rain: vec![0.0; 2],
            decay_km: 1.0,
            cutoff_km: 1.0,
        };
        let seg = SegmentSpec {
            x_km: 0.0,
            y_km: 0.0,
            length_km: 0.1,
            a: 0.0,
            b: 0.0,
            c: 0.0,
            design_wind: 1.0,
            design_rain: 1.0,
        };
        let assets = vec![LineAssets { line: "L".into(), towers: vec![], segments: vec![seg] }];
        let p = build_failure_profile(&tr, &assets, &lines, 1.0).unwrap();
        assert!((p.pi[0][0] - 0.095_162_581_964_040_43).abs() < 1e-12);
        assert!((p.pi[0][1] - 0.181_269_246_922_018_1).abs() < 1e-12);

        // Tower at the median wind every slot.
        let tr = HurricaneTrack { peak_wind: vec![30.0; 2], ..tr };
        let tw = TowerSpec { x_km: 0.0, y_km: 0.0, mu: 30.0, sigma: 4.0 };
        let assets = vec![LineAssets { line: "L".into(), towers: vec![tw], segments: vec![] }];
        let p = build_failure_profile(&tr, &assets, &lines, 1.0).unwrap();
        assert!(p.pi[0].iter().all(|&v| (v - 0.5).abs() < 1e-15));

        // No reach at all.
        let far = HurricaneTrack { cutoff_km: 0.0, ..tr };
        let p = build_failure_profile(&far, &assets, &lines, 1.0).unwrap();
        assert!(p.pi[0].iter().all(|&v| v == 0.0));

        assert!(build_failure_profile(&far, &[], &lines, 1.0).is_err());
    }
}
