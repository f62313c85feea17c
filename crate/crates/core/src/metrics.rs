//! Sensing quality metrics on range-Doppler images.

use crate::error::{domain, Result};
use crate::radar::RadarImage;

/// Where to look for the target peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakSearch {
    AtBin {
        range: usize,
        doppler: usize,
    },
    /// Strongest pixel within `radius` bins (circularly) of a location.
    Window {
        range: usize,
        doppler: usize,
        radius: usize,
    },
    Global,
}

/// Location and power of the peak selected by `search`.
pub fn find_image_peak(image: &RadarImage, search: PeakSearch) -> ((usize, usize), f64) {
    match search {
        PeakSearch::AtBin { range, doppler } => ((range, doppler), image.power(range, doppler)),
        PeakSearch::Global => image.argmax(),
        PeakSearch::Window { range, doppler, radius } => {
            let (nr, nd) = (image.n_range as i64, image.n_doppler as i64);
            let r = radius as i64;
            let mut best = ((range, doppler), f64::MIN);
            for dr in -r..=r {
                for dd in -r..=r {
                    let rr = (range as i64 + dr).rem_euclid(nr) as usize;
                    let d = (doppler as i64 + dd).rem_euclid(nd) as usize;
                    let p = image.power(rr, d);
                    if p > best.1 {
                        best = ((rr, d), p);
                    }
                }
            }
            best
        }
    }
}

/// Peak power loss of `image_pn` relative to the phase-noise-free image
/// of the same scenario (dB).
pub fn pplr(image_pn: &RadarImage, image_ideal: &RadarImage, search: PeakSearch) -> Result<f64> {
    let (_, p) = find_image_peak(image_pn, search);
    let (_, p0) = find_image_peak(image_ideal, search);
    if !(p0 > 0.0) {
        return domain("ideal image has no peak");
    }
    Ok(10.0 * (p / p0).log10())
}

/// Main lobe of a circular 1-D profile: samples `peak - left ..= peak + right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LobeExtent {
    pub peak: usize,
    pub left: usize,
    pub right: usize,
}

impl LobeExtent {
    /// Extends from `peak` down to the first local minimum on each side.
    pub fn first_minimum(cut: &[f64], peak: usize) -> Self {
        let n = cut.len();
        let at = |i: i64| cut[i.rem_euclid(n as i64) as usize];
        let p = peak as i64;
        let mut right = 0;
        while right + 1 < n / 2 && at(p + right as i64 + 1) < at(p + right as i64) {
            right += 1;
        }
        let mut left = 0;
        while left + 1 < n / 2 && at(p - left as i64 - 1) < at(p - left as i64) {
            left += 1;
        }
        Self { peak, left, right }
    }

    /// Same widths around a new peak.
    pub fn recentred(&self, peak: usize) -> Self {
        Self { peak, ..*self }
    }

    /// Whether sample `i` of a profile of length `len` lies in the lobe.
    pub fn contains(&self, i: usize, len: usize) -> bool {
        let off = (i as i64 - self.peak as i64).rem_euclid(len as i64) as usize;
        off <= self.right || len - off <= self.left
    }
}

/// Climbs from `start` to the nearest local maximum of a circular profile.
pub fn climb_to_peak(cut: &[f64], start: usize) -> usize {
    let n = cut.len();
    let mut i = start % n;
    loop {
        let (l, r) = ((i + n - 1) % n, (i + 1) % n);
        let next = if cut[r] > cut[i] && cut[r] >= cut[l] {
            r
        } else if cut[l] > cut[i] {
            l
        } else {
            return i;
        };
        i = next;
    }
}

fn split(cut: &[f64], lobe: &LobeExtent) -> Result<(f64, f64, f64)> {
    let n = cut.len();
    let peak = cut[lobe.peak];
    if !(peak > 0.0) {
        return domain("profile has no peak power");
    }
    let (mut main, mut side, mut side_max, mut outside) = (0.0, 0.0, 0.0f64, 0usize);
    for (i, &v) in cut.iter().enumerate() {
        if lobe.contains(i, n) {
            main += v;
        } else {
            side += v;
            side_max = side_max.max(v);
            outside += 1;
        }
    }
    if outside == 0 {
        return domain("main lobe covers the whole profile");
    }
    Ok((main, side, side_max / peak))
}

/// Highest sidelobe relative to the peak (dB).
pub fn pslr(cut: &[f64], lobe: &LobeExtent) -> Result<f64> {
    let (_, _, ratio) = split(cut, lobe)?;
    Ok(10.0 * ratio.log10())
}

/// Integrated sidelobe power relative to the main-lobe power (dB).
pub fn islr(cut: &[f64], lobe: &LobeExtent) -> Result<f64> {
    let (main, side, _) = split(cut, lobe)?;
    Ok(10.0 * (side / main).log10())
}

/// Two-dimensional main lobe: the rectangle spanned by the range and
/// Doppler lobe extents around the peak pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MainlobeMask {
    pub peak: (usize, usize),
    pub range: LobeExtent,
    pub doppler: LobeExtent,
}

impl MainlobeMask {
    /// Extents from the first minima of the on-grid cuts through `peak`.
    pub fn from_image(image: &RadarImage, peak: (usize, usize)) -> Self {
        let (r, d) = peak;
        let rc: Vec<f64> = (0..image.n_range).map(|i| image.power(i, d)).collect();
        let dc: Vec<f64> = (0..image.n_doppler).map(|j| image.power(r, j)).collect();
        Self { peak, range: LobeExtent::first_minimum(&rc, r), doppler: LobeExtent::first_minimum(&dc, d) }
    }

    pub fn recentred(&self, peak: (usize, usize)) -> Self {
        Self { peak, range: self.range.recentred(peak.0), doppler: self.doppler.recentred(peak.1) }
    }

    pub fn contains(&self, r: usize, d: usize, n_range: usize, n_doppler: usize) -> bool {
        self.range.contains(r, n_range) && self.doppler.contains(d, n_doppler)
    }
}

/// Peak power over the mean and over the maximum of every pixel outside
/// the main lobe, as `(mean, min)` in dB.
pub fn image_sir(image: &RadarImage, mask: &MainlobeMask) -> Result<(f64, f64)> {
    let (pr, pd) = mask.peak;
    let peak = image.power(pr, pd);
    if !(peak > 0.0) {
        return domain("image has no peak power");
    }
    let (mut sum, mut max, mut count) = (0.0, 0.0f64, 0usize);
    for r in 0..image.n_range {
        for d in 0..image.n_doppler {
            if mask.contains(r, d, image.n_range, image.n_doppler) {
                continue;
            }
            let p = image.power(r, d);
            sum += p;
            max = max.max(p);
            count += 1;
        }
    }
    if count == 0 {
        return domain("main lobe covers the whole image");
    }
    let mean = sum / count as f64;
    Ok((10.0 * (peak / mean).log10(), 10.0 * (peak / max).log10()))
}

/// Peak, sidelobe and image metrics of one phase-noise image against its
/// phase-noise-free counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidelobeReport {
    pub pplr_db: f64,
    pub range_pslr_db: f64,
    pub range_islr_db: f64,
    pub doppler_pslr_db: f64,
    pub doppler_islr_db: f64,
}

/// Default cut interpolation factor.
pub const CUT_OVERSAMPLE: usize = 16;

/// Scores `pn` against `ideal` (same scenario, no phase noise).
///
/// Cuts run through the strongest pixel of each image and are interpolated
/// by `oversample`. The main-lobe widths come from the first minima of the
/// ideal cuts and are reused around the peak of the impaired cuts.
pub fn sidelobe_report(pn: &RadarImage, ideal: &RadarImage, oversample: usize) -> Result<SidelobeReport> {
    let os = oversample.max(1);
    let ((r0, d0), _) = ideal.argmax();
    let ideal_rc = ideal.range_cut(d0, os);
    let ideal_dc = ideal.doppler_cut(r0, os);
    let ir = climb_to_peak(&ideal_rc, r0 * os);
    let id = climb_to_peak(&ideal_dc, d0 * os);
    let range_lobe = LobeExtent::first_minimum(&ideal_rc, ir);
    let doppler_lobe = LobeExtent::first_minimum(&ideal_dc, id);

    let ((r, d), _) = pn.argmax();
    let rc = pn.range_cut(d, os);
    let dc = pn.doppler_cut(r, os);
    let range_lobe = range_lobe.recentred(climb_to_peak(&rc, r * os));
    let doppler_lobe = doppler_lobe.recentred(climb_to_peak(&dc, d * os));
    Ok(SidelobeReport {
        pplr_db: pplr(pn, ideal, PeakSearch::Global)?,
        range_pslr_db: pslr(&rc, &range_lobe)?,
        range_islr_db: islr(&rc, &range_lobe)?,
        doppler_pslr_db: pslr(&dc, &doppler_lobe)?,
        doppler_islr_db: islr(&dc, &doppler_lobe)?,
    })
}

/// Image SIR of `pn` at the target location, with the target location and
/// main lobe taken from `ideal`.
pub fn image_sir_against(pn: &RadarImage, ideal: &RadarImage) -> Result<(f64, f64)> {
    let (peak0, _) = ideal.argmax();
    image_sir(pn, &MainlobeMask::from_image(ideal, peak0))
}
