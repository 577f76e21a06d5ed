//! Partitions of the Fourier line.
//!
//! A partition is described by a set of strictly increasing boundary points
//! `nu_n`, optionally extended by a ray on either side. Consecutive
//! boundaries delimit the Fourier supports `Omega_n = [nu_n, nu_{n+1}]`;
//! each compact support carries a center `omega_n`, and ray supports get a
//! center symmetrized from their compact neighbor. Boundaries are kept as
//! finite numbers plus explicit infinity flags so the ray formulas only ever
//! touch finite values.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("boundary points must be strictly increasing: {0} is not below {1}")]
    NonMonotoneBoundaries(f64, f64),
    #[error("standard boundary set must contain the point 0")]
    MissingZero,
    #[error("starred boundary set must exclude 0 and contain points on both sides of it")]
    InvalidStarredSet,
    #[error("need at least {needed} finite boundary points, got {got}")]
    TooFewBoundaries { needed: usize, got: usize },
    #[error("boundary points must be finite (rays are expressed through flags)")]
    NonFiniteBoundary,
    #[error("ray support {0} has no adjacent compact support to symmetrize from")]
    RayWithoutNeighbor(i32),
    #[error("found {found} local maxima in the spectrum, need {need}")]
    NotEnoughExtrema { found: usize, need: usize },
    #[error("detection input must be a uniform nonnegative frequency grid with matching magnitudes")]
    InvalidSpectrumInput,
}

/// Which convention the boundary set follows around zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Contains `nu_0 = 0`.
    Standard,
    /// Excludes zero; the two supports around zero merge into one.
    Starred,
}

/// Strictly increasing boundary points with explicit ray flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundarySet {
    pub points: Vec<f64>,
    pub variant: Variant,
    pub left_infinite: bool,
    pub right_infinite: bool,
}

impl BoundarySet {
    pub fn standard(points: Vec<f64>, left_infinite: bool, right_infinite: bool) -> Result<Self, PartitionError> {
        let set = BoundarySet { points, variant: Variant::Standard, left_infinite, right_infinite };
        set.validate()?;
        Ok(set)
    }

    pub fn starred(points: Vec<f64>, left_infinite: bool, right_infinite: bool) -> Result<Self, PartitionError> {
        let set = BoundarySet { points, variant: Variant::Starred, left_infinite, right_infinite };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<(), PartitionError> {
        if self.points.iter().any(|p| !p.is_finite()) {
            return Err(PartitionError::NonFiniteBoundary);
        }
        for w in self.points.windows(2) {
            if w[0] >= w[1] {
                return Err(PartitionError::NonMonotoneBoundaries(w[0], w[1]));
            }
        }
        match self.variant {
            Variant::Standard => {
                if !self.points.contains(&0.0) {
                    return Err(PartitionError::MissingZero);
                }
            }
            Variant::Starred => {
                let neg = self.points.iter().any(|&p| p < 0.0);
                let pos = self.points.iter().any(|&p| p > 0.0);
                if self.points.contains(&0.0) || !neg || !pos {
                    return Err(PartitionError::InvalidStarredSet);
                }
            }
        }
        Ok(())
    }

    /// Index of `nu_0 = 0` (standard) or of the first positive point
    /// (starred, which is `nu_1`).
    fn zero_position(&self) -> usize {
        match self.variant {
            Variant::Standard => self.points.iter().position(|&p| p == 0.0).unwrap(),
            Variant::Starred => self.points.iter().position(|&p| p > 0.0).unwrap(),
        }
    }
}

/// The four partition shapes distinguished by the ray flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartitionKind {
    NoRays,
    LeftRay,
    RightRay,
    BothRays,
}

/// One Fourier support `[lo, hi]`; `None` marks an infinite end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    /// Index `n` in the partition's indexing set.
    pub index: i32,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl Support {
    pub fn is_ray(&self) -> bool {
        self.lo.is_none() || self.hi.is_none()
    }

    /// `|Omega_n| = nu_{n+1} - nu_n`; `None` for rays.
    pub fn length(&self) -> Option<f64> {
        match (self.lo, self.hi) {
            (Some(lo), Some(hi)) => Some(hi - lo),
            _ => None,
        }
    }

    /// Membership test realizing the a.e. statements on grids: each compact
    /// support owns `[lo, hi)`, a left ray owns `(-inf, hi)`, a right ray
    /// `[lo, +inf)`, so every frequency belongs to exactly one support.
    pub fn contains(&self, xi: f64) -> bool {
        let above = self.lo.is_none_or(|lo| xi >= lo);
        let below = self.hi.is_none_or(|hi| xi < hi);
        above && below
    }
}

/// A built partition: ordered supports plus (optionally) their centers.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub boundaries: BoundarySet,
    pub kind: PartitionKind,
    pub supports: Vec<Support>,
    /// Parallel to `supports`; filled by [`compute_centers`].
    pub centers: Option<Vec<f64>>,
}

impl Partition {
    pub fn center(&self, support_idx: usize) -> Option<f64> {
        self.centers.as_ref().map(|c| c[support_idx])
    }

    /// Finite extent `[first finite boundary, last finite boundary)`.
    pub fn finite_extent(&self) -> (f64, f64) {
        (
            *self.boundaries.points.first().unwrap(),
            *self.boundaries.points.last().unwrap(),
        )
    }
}

/// Build the supports from a validated boundary set.
///
/// The starred variant merges across zero: `Omega_{-1} = [nu_{-1}, nu_1]`.
pub fn build_partition(boundaries: &BoundarySet) -> Result<Partition, PartitionError> {
    boundaries.validate()?;
    if boundaries.points.len() < 2 {
        return Err(PartitionError::TooFewBoundaries { needed: 2, got: boundaries.points.len() });
    }
    let zero_pos = boundaries.zero_position() as i32;
    // finite boundary at position i has index i - zero_pos, with starred
    // sets skipping index 0 on the positive side
    let index_of = |pos: i32| -> i32 {
        let raw = pos - zero_pos;
        match boundaries.variant {
            Variant::Standard => raw,
            Variant::Starred => {
                if raw >= 0 {
                    raw + 1
                } else {
                    raw
                }
            }
        }
    };

    let pts = &boundaries.points;
    let mut supports = Vec::new();
    if boundaries.left_infinite {
        supports.push(Support { index: index_of(0) - 1, lo: None, hi: Some(pts[0]) });
    }
    for i in 0..pts.len() - 1 {
        supports.push(Support {
            index: index_of(i as i32),
            lo: Some(pts[i]),
            hi: Some(pts[i + 1]),
        });
    }
    if boundaries.right_infinite {
        supports.push(Support {
            index: index_of(pts.len() as i32 - 1),
            lo: Some(*pts.last().unwrap()),
            hi: None,
        });
    }

    let kind = match (boundaries.left_infinite, boundaries.right_infinite) {
        (false, false) => PartitionKind::NoRays,
        (true, false) => PartitionKind::LeftRay,
        (false, true) => PartitionKind::RightRay,
        (true, true) => PartitionKind::BothRays,
    };

    Ok(Partition { boundaries: boundaries.clone(), kind, supports, centers: None })
}

/// Fill support centers: midpoints for compact supports, the symmetrized
/// neighbor center for rays. The starred merged support behaves like any
/// compact support, so `omega_{-1} = (nu_{-1} + nu_1)/2` falls out of the
/// midpoint rule.
pub fn compute_centers(partition: &Partition) -> Result<Partition, PartitionError> {
    let pts = &partition.boundaries.points;
    let mut centers = Vec::with_capacity(partition.supports.len());
    for s in &partition.supports {
        let c = match (s.lo, s.hi) {
            (Some(lo), Some(hi)) => 0.5 * (lo + hi),
            (None, Some(_)) => {
                // left ray: omega = (3 nu_{n_m+1} - nu_{n_m+2}) / 2
                if pts.len() < 2 {
                    return Err(PartitionError::RayWithoutNeighbor(s.index));
                }
                0.5 * (3.0 * pts[0] - pts[1])
            }
            (Some(_), None) => {
                // right ray: omega = (3 nu_{n_M-1} - nu_{n_M-2}) / 2
                if pts.len() < 2 {
                    return Err(PartitionError::RayWithoutNeighbor(s.index));
                }
                let m = pts.len();
                0.5 * (3.0 * pts[m - 1] - pts[m - 2])
            }
            (None, None) => return Err(PartitionError::RayWithoutNeighbor(s.index)),
        };
        centers.push(c);
    }
    let mut out = partition.clone();
    out.centers = Some(centers);
    Ok(out)
}

/// Label of the frequency region targeted after ray exclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaLabel {
    /// Whole line (no rays to drop).
    Full,
    Lray,
    Rray,
    C,
}

/// Union of the compact supports that survive ray exclusion.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaRegion {
    pub label: GammaLabel,
    /// Half-open `[lo, hi)` intervals, ordered and disjoint.
    pub intervals: Vec<(f64, f64)>,
}

impl GammaRegion {
    pub fn contains(&self, xi: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| xi >= lo && xi < hi)
    }

    /// Tight cover `[min lo, max hi)` of the region.
    pub fn extent(&self) -> Option<(f64, f64)> {
        let lo = self.intervals.first()?.0;
        let hi = self.intervals.last()?.1;
        Some((lo, hi))
    }
}

/// The region over which the a.e. conditions are checked: all of the line
/// for `NoRays`, otherwise the compact supports with the ray(s) removed.
pub fn gamma_region(partition: &Partition) -> GammaRegion {
    let label = match partition.kind {
        PartitionKind::NoRays => GammaLabel::Full,
        PartitionKind::LeftRay => GammaLabel::Lray,
        PartitionKind::RightRay => GammaLabel::Rray,
        PartitionKind::BothRays => GammaLabel::C,
    };
    let intervals = partition
        .supports
        .iter()
        .filter_map(|s| match (s.lo, s.hi) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            _ => None,
        })
        .collect();
    GammaRegion { label, intervals }
}

/// Boundary detection from a magnitude spectrum on a uniform grid of
/// nonnegative frequencies: place one boundary at the lowest magnitude bin
/// between each pair of the `band_count` largest local maxima, plus one
/// after the last chosen maximum, then mirror to the negative axis around
/// `nu_0 = 0` and close with rays. Ties break toward lower frequency.
pub fn detect_boundaries(
    frequencies: &[f64],
    magnitudes: &[f64],
    band_count: usize,
) -> Result<BoundarySet, PartitionError> {
    if band_count == 0
        || frequencies.len() != magnitudes.len()
        || frequencies.len() < 2 * band_count + 1
    {
        return Err(PartitionError::InvalidSpectrumInput);
    }
    if frequencies[0] < 0.0 || magnitudes.iter().any(|&m| m.is_nan() || m < 0.0) {
        return Err(PartitionError::InvalidSpectrumInput);
    }
    let step = frequencies[1] - frequencies[0];
    if step <= 0.0 {
        return Err(PartitionError::InvalidSpectrumInput);
    }
    for w in frequencies.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 * step.max(1.0) {
            return Err(PartitionError::InvalidSpectrumInput);
        }
    }

    // interior local maxima; plateaus register at their leftmost bin
    let mut maxima: Vec<usize> = Vec::new();
    for i in 1..magnitudes.len() - 1 {
        if magnitudes[i] > magnitudes[i - 1] && magnitudes[i] >= magnitudes[i + 1] {
            maxima.push(i);
        }
    }
    if maxima.len() < band_count {
        return Err(PartitionError::NotEnoughExtrema { found: maxima.len(), need: band_count });
    }
    // the band_count largest, ties toward lower frequency
    maxima.sort_by(|&a, &b| {
        magnitudes[b]
            .partial_cmp(&magnitudes[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut peaks: Vec<usize> = maxima[..band_count].to_vec();
    peaks.sort_unstable();

    let argmin = |lo: usize, hi: usize| -> usize {
        // inclusive range, ties toward lower index
        let mut best = lo;
        for i in lo..=hi {
            if magnitudes[i] < magnitudes[best] {
                best = i;
            }
        }
        best
    };

    let mut cuts: Vec<usize> = Vec::with_capacity(band_count);
    for w in peaks.windows(2) {
        cuts.push(argmin(w[0] + 1, w[1] - 1));
    }
    cuts.push(argmin(peaks[band_count - 1] + 1, magnitudes.len() - 1));

    let mut points: Vec<f64> = Vec::with_capacity(2 * band_count + 1);
    for &c in cuts.iter().rev() {
        points.push(-frequencies[c]);
    }
    points.push(0.0);
    for &c in &cuts {
        points.push(frequencies[c]);
    }
    BoundarySet::standard(points, true, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard(points: &[f64], left: bool, right: bool) -> BoundarySet {
        BoundarySet::standard(points.to_vec(), left, right).unwrap()
    }

    #[test]
    fn both_rays_partition_from_def() {
        // V = {-inf, -2, 0, 3, +inf}
        let p = build_partition(&standard(&[-2.0, 0.0, 3.0], true, true)).unwrap();
        assert_eq!(p.kind, PartitionKind::BothRays);
        let sup: Vec<(Option<f64>, Option<f64>)> = p.supports.iter().map(|s| (s.lo, s.hi)).collect();
        assert_eq!(
            sup,
            vec![
                (None, Some(-2.0)),
                (Some(-2.0), Some(0.0)),
                (Some(0.0), Some(3.0)),
                (Some(3.0), None),
            ]
        );
        assert_eq!(p.supports[0].index, -2);
        assert_eq!(p.supports[3].index, 1);
    }

    #[test]
    fn uniform_window_has_unit_lengths() {
        let pts: Vec<f64> = (-4..=4).map(f64::from).collect();
        let p = build_partition(&standard(&pts, false, false)).unwrap();
        assert_eq!(p.kind, PartitionKind::NoRays);
        assert_eq!(p.supports.len(), 8);
        for s in &p.supports {
            assert_eq!(s.length(), Some(1.0));
        }
    }

    #[test]
    fn starred_merges_across_zero() {
        // V* = {-3, -1, 1, 4}
        let b = BoundarySet::starred(vec![-3.0, -1.0, 1.0, 4.0], false, false).unwrap();
        let p = build_partition(&b).unwrap();
        let sup: Vec<(Option<f64>, Option<f64>)> = p.supports.iter().map(|s| (s.lo, s.hi)).collect();
        assert_eq!(
            sup,
            vec![
                (Some(-3.0), Some(-1.0)),
                (Some(-1.0), Some(1.0)),
                (Some(1.0), Some(4.0)),
            ]
        );
        assert_eq!(p.supports[1].index, -1);
        assert_eq!(p.supports[2].index, 1);
        // merged support center is the midpoint
        let c = compute_centers(&p).unwrap();
        assert_eq!(c.center(1), Some(0.0));
    }

    #[test]
    fn centers_midpoint_and_symmetrized() {
        // compact [2,6] -> 4
        let p = build_partition(&standard(&[0.0, 2.0, 6.0], false, false)).unwrap();
        let c = compute_centers(&p).unwrap();
        assert_eq!(c.center(1), Some(4.0));

        // left ray with nu_{nm+1} = -4, nu_{nm+2} = -2 -> -5
        let p = build_partition(&standard(&[-4.0, -2.0, 0.0, 2.0], true, true)).unwrap();
        let c = compute_centers(&p).unwrap();
        assert_eq!(c.center(0), Some(-5.0));
        // right ray mirror: (3*2 - 0)/2 = 3
        assert_eq!(c.center(4), Some(3.0));
    }

    #[test]
    fn centers_idempotent_and_interior() {
        let p = build_partition(&standard(&[-2.0, 0.0, 3.0], true, true)).unwrap();
        let once = compute_centers(&p).unwrap();
        let twice = compute_centers(&once).unwrap();
        assert_eq!(once, twice);
        for (s, &c) in once.supports.iter().zip(once.centers.as_ref().unwrap()) {
            if let (Some(lo), Some(hi)) = (s.lo, s.hi) {
                assert!(lo < c && c < hi);
            }
        }
    }

    #[test]
    fn gamma_drops_exactly_the_rays() {
        let p = build_partition(&standard(&[-2.0, 0.0, 3.0], true, true)).unwrap();
        let g = gamma_region(&p);
        assert_eq!(g.label, GammaLabel::C);
        assert_eq!(g.intervals, vec![(-2.0, 0.0), (0.0, 3.0)]);
        assert_eq!(g.extent(), Some((-2.0, 3.0)));
        assert!(g.contains(-2.0) && g.contains(2.9) && !g.contains(3.0));

        let p = build_partition(&standard(&[-2.0, 0.0, 1.0, 5.0], true, false)).unwrap();
        let g = gamma_region(&p);
        assert_eq!(g.label, GammaLabel::Lray);
        assert_eq!(g.extent().unwrap().0, -2.0);

        let pts: Vec<f64> = (-2..=2).map(f64::from).collect();
        let p = build_partition(&standard(&pts, false, false)).unwrap();
        assert_eq!(gamma_region(&p).label, GammaLabel::Full);
    }

    #[test]
    fn validation_rejects_bad_sets() {
        assert!(matches!(
            BoundarySet::standard(vec![1.0, 1.0], false, false),
            Err(PartitionError::NonMonotoneBoundaries(_, _))
        ));
        assert!(matches!(
            BoundarySet::standard(vec![-1.0, 2.0], false, false),
            Err(PartitionError::MissingZero)
        ));
        assert!(matches!(
            BoundarySet::starred(vec![1.0, 2.0], false, false),
            Err(PartitionError::InvalidStarredSet)
        ));
        assert!(matches!(
            build_partition(&standard(&[0.0], true, true)),
            Err(PartitionError::TooFewBoundaries { .. })
        ));
    }

    #[test]
    fn boundary_points_round_trip_through_partition() {
        let b = standard(&[-3.5, -1.0, 0.0, 0.5, 2.0], true, false);
        let p = build_partition(&b).unwrap();
        let mut collected: Vec<f64> = Vec::new();
        for s in &p.supports {
            if let Some(lo) = s.lo {
                if collected.last() != Some(&lo) {
                    collected.push(lo);
                }
            }
        }
        if let Some(hi) = p.supports.last().unwrap().hi {
            collected.push(hi);
        }
        assert_eq!(collected, b.points);
    }

    #[test]
    fn compact_lengths_telescope() {
        let b = standard(&[-3.5, -1.0, 0.0, 0.5, 2.0], true, true);
        let p = build_partition(&b).unwrap();
        let total: f64 = p.supports.iter().filter_map(|s| s.length()).sum();
        assert_eq!(total, 2.0 - (-3.5));
    }

    #[test]
    fn detect_two_bumps_cuts_at_the_valley() {
        // bumps centered at bins 20 and 40 on a 101-bin unit-span grid
        let n = 101;
        let freqs: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let mags: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64;
                (-(x - 20.0).powi(2) / 18.0).exp() + 0.8 * (-(x - 40.0).powi(2) / 18.0).exp()
            })
            .collect();
        let b = detect_boundaries(&freqs, &mags, 2).unwrap();
        assert_eq!(b.points.len(), 5);
        assert!(b.left_infinite && b.right_infinite);
        // brute-force oracle: global minimum over all bins strictly between
        // the two argmax bins
        let valley = (21..40).min_by(|&a, &b| mags[a].partial_cmp(&mags[b]).unwrap()).unwrap();
        assert_eq!(b.points[3], freqs[valley]);
        assert!(b.points[3] > freqs[20] && b.points[3] < freqs[40]);
        // mirror symmetry
        assert_eq!(b.points[1], -b.points[3]);
        assert_eq!(b.points[2], 0.0);
    }

    #[test]
    fn detect_flat_spectrum_fails() {
        let freqs: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let mags = vec![0.0; 16];
        assert!(matches!(
            detect_boundaries(&freqs, &mags, 1),
            Err(PartitionError::NotEnoughExtrema { found: 0, need: 1 })
        ));
    }

    #[test]
    fn detect_single_bump_cuts_right_of_it() {
        let n = 64;
        let freqs: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let mags: Vec<f64> = (0..n).map(|i| (-(i as f64 - 12.0).powi(2) / 10.0).exp()).collect();
        let b = detect_boundaries(&freqs, &mags, 1).unwrap();
        assert_eq!(b.points.len(), 3);
        // oracle: minimum over bins right of the peak (monotone decay ->
        // the right edge)
        let cut = (13..n).min_by(|&a, &b| mags[a].partial_cmp(&mags[b]).unwrap()).unwrap();
        assert_eq!(b.points[2], freqs[cut]);
    }

    #[test]
    fn detect_is_deterministic() {
        let freqs: Vec<f64> = (0..64).map(|i| i as f64).collect();
        let mags: Vec<f64> = (0..64).map(|i| ((i as f64 * 0.37).sin().abs() + 0.1) * 3.0).collect();
        let a = detect_boundaries(&freqs, &mags, 3).unwrap();
        let b = detect_boundaries(&freqs, &mags, 3).unwrap();
        assert_eq!(a, b);
    }
}
