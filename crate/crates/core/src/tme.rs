//! Topological mixture estimation in one dimension.
//!
//! A Gaussian kernel density estimate is sampled on a uniform grid, split
//! into unimodal pieces by a left-to-right sweep, and the bandwidth is picked
//! where the number of pieces (the unimodal category) is most stable.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Nonnegative values on a uniform ascending grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityGrid {
    pub xs: Vec<f64>,
    pub fs: Vec<f64>,
}

impl DensityGrid {
    pub fn new(xs: Vec<f64>, fs: Vec<f64>) -> Result<Self> {
        if xs.len() != fs.len() {
            return Err(Error::invalid("grid and values differ in length"));
        }
        if xs.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::invalid("grid must be strictly increasing"));
        }
        if let Some(bad) = fs.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!("density value {bad} is not a finite nonnegative number")));
        }
        Ok(DensityGrid { xs, fs })
    }

    /// Values on the integer grid `0, 1, …`.
    pub fn from_values(fs: Vec<f64>) -> Result<Self> {
        let xs = (0..fs.len()).map(|i| i as f64).collect();
        DensityGrid::new(xs, fs)
    }

    pub fn len(&self) -> usize {
        self.fs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fs.is_empty()
    }

    pub fn step(&self) -> f64 {
        if self.xs.len() < 2 {
            1.0
        } else {
            self.xs[1] - self.xs[0]
        }
    }

    pub fn mass(&self) -> f64 {
        self.fs.iter().sum::<f64>() * self.step()
    }
}

/// Gaussian KDE on `bins` points spanning `[min − 3h, max + 3h]`, scaled to
/// unit mass.
pub fn kde(samples: &[f64], bandwidth: f64, bins: usize) -> Result<DensityGrid> {
    if samples.len() < 2 {
        return Err(Error::invalid("kernel density estimate needs at least 2 samples"));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("samples must be finite"));
    }
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(Error::invalid(format!("bandwidth must be positive, got {bandwidth}")));
    }
    if bins < 2 {
        return Err(Error::invalid("need at least 2 bins"));
    }
    let (min, max) = min_max(samples);
    let lo = min - 3.0 * bandwidth;
    let hi = max + 3.0 * bandwidth;
    let step = (hi - lo) / (bins - 1) as f64;
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid("degenerate sample range and bandwidth"));
    }
    let xs: Vec<f64> = (0..bins).map(|i| lo + step * i as f64).collect();
    let inv = 1.0 / bandwidth;
    let mut fs: Vec<f64> = xs
        .iter()
        .map(|&x| {
            samples
                .iter()
                .map(|&s| {
                    let z = (x - s) * inv;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
        })
        .collect();
    let mass: f64 = fs.iter().sum::<f64>() * step;
    if !mass.is_finite() || mass <= 0.0 {
        return Err(Error::invalid("kernel density estimate vanished on the grid"));
    }
    for f in &mut fs {
        *f /= mass;
    }
    DensityGrid::new(xs, fs)
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnimodalDecomposition {
    pub xs: Vec<f64>,
    /// Unnormalised summands; they add up to the input bin by bin.
    pub components: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl UnimodalDecomposition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn masses(&self) -> Vec<f64> {
        let step = if self.xs.len() < 2 { 1.0 } else { self.xs[1] - self.xs[0] };
        self.components.iter().map(|c| c.iter().sum::<f64>() * step).collect()
    }
}

/// Sweep decomposition into unimodal summands.
///
/// Walking left to right, each component is either rising (may still grow)
/// or falling (past its peak). Increases go to the single rising component,
/// or start a new one. Decreases are taken from falling components first,
/// oldest first; only when those are exhausted does the rising component
/// give way and start to fall. The count is the unimodal category of the
/// grid function.
pub fn sweep_decompose(f: &DensityGrid) -> Result<UnimodalDecomposition> {
    if let Some(bad) = f.fs.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::invalid(format!("negative or non-finite value {bad}")));
    }
    let n = f.len();
    let peak = f.fs.iter().copied().fold(0.0, f64::max);
    // leftover decrements at or below this are rounding noise
    let tol = 64.0 * f64::EPSILON * peak;
    let mut components: Vec<Vec<f64>> = Vec::new();
    let mut falling: Vec<usize> = Vec::new();
    let mut rising: Option<usize> = None;
    let mut prev = 0.0;
    for i in 0..n {
        if i > 0 {
            for c in &mut components {
                c[i] = c[i - 1];
            }
        }
        let cur = f.fs[i];
        if cur > prev {
            let r = *rising.get_or_insert_with(|| {
                components.push(vec![0.0; n]);
                components.len() - 1
            });
            components[r][i] += cur - prev;
        } else if cur < prev {
            let mut need = prev - cur;
            for &k in &falling {
                if need <= 0.0 {
                    break;
                }
                let take = components[k][i].min(need);
                components[k][i] -= take;
                need -= take;
            }
            if need > tol {
                if let Some(r) = rising.take() {
                    components[r][i] = (components[r][i] - need).max(0.0);
                    falling.push(r);
                }
            }
            falling.retain(|&k| components[k][i] > 0.0);
        }
        prev = cur;
    }
    let step = f.step();
    let masses: Vec<f64> = components.iter().map(|c| c.iter().sum::<f64>() * step).collect();
    let total: f64 = masses.iter().sum();
    let weights = masses.iter().map(|m| m / total).collect();
    Ok(UnimodalDecomposition {
        xs: f.xs.clone(),
        components,
        weights,
    })
}

pub fn unimodal_category(f: &DensityGrid) -> Result<usize> {
    Ok(sweep_decompose(f)?.len())
}

/// Every superlevel set `{i : v_i ≥ y}`, `y > 0`, is a run of consecutive
/// indices.
pub fn is_unimodal(values: &[f64]) -> bool {
    let mut levels: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    levels.iter().all(|&y| {
        let mut idx = values.iter().enumerate().filter(|(_, &v)| v >= y).map(|(i, _)| i);
        let first = idx.next();
        let mut last = first;
        let mut count = usize::from(first.is_some());
        for i in idx {
            last = Some(i);
            count += 1;
        }
        match (first, last) {
            (Some(a), Some(b)) => b - a + 1 == count,
            _ => true,
        }
    })
}

/// Indices `i` with `v[i−1] < v[i] > v[i+1]`, treating the ends as bordered
/// by zero.
pub fn strict_local_maxima(values: &[f64]) -> usize {
    let n = values.len();
    (0..n)
        .filter(|&i| {
            let left = if i == 0 { 0.0 } else { values[i - 1] };
            let right = if i + 1 == n { 0.0 } else { values[i + 1] };
            values[i] > left && values[i] > right
        })
        .count()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandwidthScan {
    pub bandwidths: Vec<f64>,
    pub ucats: Vec<usize>,
    pub modal_ucat: usize,
    pub chosen_bandwidth: f64,
    /// Inclusive index range of the run the bandwidth was taken from.
    pub run: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixtureEstimate {
    pub scan: BandwidthScan,
    pub density: DensityGrid,
    pub decomposition: UnimodalDecomposition,
}

pub const DEFAULT_BINS: usize = 512;
pub const DEFAULT_BANDWIDTHS: usize = 64;

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Log-spaced candidate bandwidths. The lower end is the 1st percentile of
/// positive nearest-neighbour gaps, clamped to `[range / bins, range]`; the
/// upper end is the sample range.
pub fn bandwidth_grid(samples: &[f64], n_bandwidths: usize, bins: usize) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(Error::invalid("bandwidth selection needs at least 2 samples"));
    }
    if n_bandwidths < 2 || bins < 2 {
        return Err(Error::invalid("need at least 2 bandwidths and 2 bins"));
    }
    let mut sorted = samples.to_vec();
    if sorted.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("samples must be finite"));
    }
    sorted.sort_by(f64::total_cmp);
    let range = sorted[sorted.len() - 1] - sorted[0];
    if !range.is_finite() || range <= 0.0 {
        return Err(Error::invalid("all samples are identical"));
    }
    let mut gaps: Vec<f64> = (0..sorted.len())
        .map(|i| {
            let left = if i > 0 { sorted[i] - sorted[i - 1] } else { f64::INFINITY };
            let right = if i + 1 < sorted.len() { sorted[i + 1] - sorted[i] } else { f64::INFINITY };
            left.min(right)
        })
        .filter(|g| *g > 0.0 && g.is_finite())
        .collect();
    if gaps.is_empty() {
        // every sample has an exact duplicate neighbour
        gaps.push(range / bins as f64);
    }
    gaps.sort_by(f64::total_cmp);
    let lo = percentile(&gaps, 0.01).clamp(range / bins as f64, range);
    let hi = range;
    let (llo, lhi) = (lo.ln(), hi.ln());
    Ok((0..n_bandwidths)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n_bandwidths - 1) as f64).exp())
        .collect())
}

/// Picks the bandwidth whose unimodal category is the most common across a
/// log-spaced scan, and decomposes the density estimated with it.
pub fn select_bandwidth(samples: &[f64], n_bandwidths: usize, bins: usize) -> Result<MixtureEstimate> {
    let bandwidths = bandwidth_grid(samples, n_bandwidths, bins)?;
    let ucats = bandwidths
        .par_iter()
        .map(|&h| unimodal_category(&kde(samples, h, bins)?))
        .collect::<Result<Vec<usize>>>()?;
    let max_ucat = *ucats.iter().max().unwrap();
    let mut freq = vec![0usize; max_ucat + 1];
    for &u in &ucats {
        freq[u] += 1;
    }
    // max_by_key keeps the last maximum, so scan from the top to favour the
    // smaller category on ties
    let modal_ucat = (0..=max_ucat).rev().max_by_key(|&u| freq[u]).unwrap();
    let mut best = (0, 0);
    let mut i = 0;
    while i < ucats.len() {
        if ucats[i] == modal_ucat {
            let start = i;
            while i + 1 < ucats.len() && ucats[i + 1] == modal_ucat {
                i += 1;
            }
            if i - start > best.1 - best.0 || ucats[best.0] != modal_ucat {
                best = (start, i);
            }
        }
        i += 1;
    }
    let chosen_bandwidth = (bandwidths[best.0] * bandwidths[best.1]).sqrt();
    let density = kde(samples, chosen_bandwidth, bins)?;
    let decomposition = sweep_decompose(&density)?;
    Ok(MixtureEstimate {
        scan: BandwidthScan {
            bandwidths,
            ucats,
            modal_ucat,
            chosen_bandwidth,
            run: best,
        },
        density,
        decomposition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(v: &[f64]) -> DensityGrid {
        DensityGrid::from_values(v.to_vec()).unwrap()
    }

    #[test]
    fn already_unimodal() {
        assert_eq!(unimodal_category(&grid(&[1.0, 2.0, 1.0, 0.0, 0.0])).unwrap(), 1);
    }

    #[test]
    fn two_bumps() {
        let d = sweep_decompose(&grid(&[1.0, 2.0, 1.0, 2.0, 1.0])).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.components[0], vec![1.0, 2.0, 1.0, 1.0, 0.0]);
        assert_eq!(d.components[1], vec![0.0, 0.0, 0.0, 1.0, 1.0]);
        assert!(d.components.iter().all(|c| is_unimodal(c)));
    }

    #[test]
    fn zero_function_has_no_components() {
        let d = sweep_decompose(&grid(&[0.0; 6])).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn ripples_need_fewer_components_than_maxima() {
        let v = [1.0, 2.0, 1.9, 3.0, 2.9, 4.0, 3.9, 5.0, 0.0];
        assert_eq!(strict_local_maxima(&v), 4);
        assert_eq!(unimodal_category(&grid(&v)).unwrap(), 2);
        // the greedy "decay as slowly as possible" reading would need three
        assert_eq!(unimodal_category(&grid(&[2.0, 1.9, 2.0, 1.9, 2.0])).unwrap(), 2);
    }

    #[test]
    fn separated_parts_add_up() {
        let v = [2.0, 1.9, 2.0, 1.9, 2.0, 0.0, 1.0, 0.9, 1.0];
        assert_eq!(strict_local_maxima(&v), 5);
        assert_eq!(unimodal_category(&grid(&v)).unwrap(), 4);
    }

    #[test]
    fn negative_values_rejected() {
        assert!(DensityGrid::from_values(vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn unimodality_predicate() {
        assert!(is_unimodal(&[0.0, 1.0, 3.0, 3.0, 2.0, 0.0]));
        assert!(!is_unimodal(&[1.0, 0.0, 1.0]));
        assert!(!is_unimodal(&[2.0, 1.0, 1.5]));
        assert!(is_unimodal(&[]));
    }

    #[test]
    fn kde_mass_and_shape() {
        let d = kde(&[1.0, 1.0, 1.0], 1.0, 101).unwrap();
        assert!((d.mass() - 1.0).abs() < 1e-9);
        assert_eq!(unimodal_category(&d).unwrap(), 1);
        let mut s: Vec<f64> = (0..20).map(|i| (i as f64 - 10.0) * 0.05).collect();
        s.extend((0..20).map(|i| 10.0 + (i as f64 - 10.0) * 0.05));
        let d = kde(&s, 0.5, 256).unwrap();
        assert_eq!(unimodal_category(&d).unwrap(), 2);
    }

    #[test]
    fn kde_errors() {
        assert!(kde(&[1.0], 1.0, 10).is_err());
        assert!(kde(&[1.0, 2.0], 0.0, 10).is_err());
        assert!(kde(&[1.0, 2.0], 1.0, 1).is_err());
        assert!(kde(&[0.0, 0.0], 1e-320, 10).is_err());
    }

    #[test]
    fn identical_samples_rejected_by_selection() {
        assert!(select_bandwidth(&[3.0, 3.0, 3.0], 8, 64).is_err());
    }
}
