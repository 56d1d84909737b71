//! Local-maximum peak extraction with parabolic refinement.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub center: f64,
    pub height: f64,
}

/// Peaks ordered by descending center.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PeakList(pub Vec<Peak>);

impl PeakList {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Peak> {
        self.0.iter()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.0.iter().map(|p| p.center).collect()
    }
}

impl std::ops::Index<usize> for PeakList {
    type Output = Peak;

    fn index(&self, i: usize) -> &Peak {
        &self.0[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakFinder {
    /// Minimum prominence as a fraction of the largest sample.
    pub min_prominence: f64,
}

impl Default for PeakFinder {
    fn default() -> Self {
        Self {
            min_prominence: 0.05,
        }
    }
}

/// Vertex of the parabola through three points, in coordinates relative to
/// the middle one.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let (h0, h2) = (x[0] - x[1], x[2] - x[1]);
    let (d0, d2) = (y[0] - y[1], y[2] - y[1]);
    // y - y1 = a·u² + b·u through (h0, d0) and (h2, d2).
    let det = h0 * h2 * (h0 - h2);
    let a = (d0 * h2 - d2 * h0) / det;
    let b = (d2 * h0 * h0 - d0 * h2 * h2) / det;
    if a >= 0.0 || !a.is_finite() {
        return (x[1], y[1]);
    }
    let u = (-b / (2.0 * a)).clamp(h0, h2);
    (x[1] + u, y[1] + a * u * u + b * u)
}

impl PeakFinder {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn find(&self, grid: &[f64], values: &[f64]) -> PeakList {
        let n = grid.len().min(values.len());
        if n < 3 {
            return PeakList::default();
        }
        let vmax = values[..n]
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let threshold = self.min_prominence * vmax;

        let mut peaks = Vec::new();
        let mut i = 1;
        while i < n - 1 {
            if !(values[i] > values[i - 1]) {
                i += 1;
                continue;
            }
            // Walk across a flat top.
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 >= n || values[j + 1] > values[i] {
                i = j + 1;
                continue;
            }
            let top = values[i];
            let left_min = values[..i]
                .iter()
                .rev()
                .take_while(|&&v| v <= top)
                .cloned()
                .fold(top, f64::min);
            let right_min = values[j + 1..n]
                .iter()
                .take_while(|&&v| v <= top)
                .cloned()
                .fold(top, f64::min);
            let prominence = top - left_min.max(right_min);
            if top > 0.0 && prominence >= threshold {
                let peak = if i == j {
                    let (c, h) = parabola_vertex(
                        [grid[i - 1], grid[i], grid[i + 1]],
                        [values[i - 1], values[i], values[i + 1]],
                    );
                    Peak {
                        center: c,
                        height: h,
                    }
                } else {
                    Peak {
                        center: 0.5 * (grid[i] + grid[j]),
                        height: top,
                    }
                };
                peaks.push(peak);
            }
            i = j + 1;
        }
        peaks.sort_by(|a, b| b.center.total_cmp(&a.center));
        PeakList(peaks)
    }
}

/// [`PeakFinder::find`] with the default 5 % prominence threshold.
pub fn find_peaks(grid: &[f64], values: &[f64]) -> PeakList {
    PeakFinder::default().find(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::lorentzian;

    #[test]
    fn ramp_has_no_peaks() {
        let g: Vec<f64> = (0..50).map(|i| i as f64).collect();
        assert!(find_peaks(&g, &g).is_empty());
    }

    #[test]
    fn too_few_samples() {
        assert!(find_peaks(&[0.0, 1.0], &[0.0, 1.0]).is_empty());
    }

    #[test]
    fn exact_parabola_vertex() {
        let g = [0.0, 1.0, 2.0, 3.0];
        let v: Vec<f64> = g.iter().map(|x| 5.0 - (x - 1.3f64).powi(2)).collect();
        let p = find_peaks(&g, &v);
        assert_eq!(p.len(), 1);
        assert!((p[0].center - 1.3).abs() < 1e-12);
        assert!((p[0].height - 5.0).abs() < 1e-12);
    }

    #[test]
    fn small_bumps_are_rejected() {
        let g: Vec<f64> = (0..400).map(|i| -20.0 + 0.1 * i as f64).collect();
        let v: Vec<f64> = g
            .iter()
            .map(|&x| lorentzian(x, 3.0) + 0.01 * lorentzian(x - 10.0, 1.0))
            .collect();
        let p = find_peaks(&g, &v);
        assert_eq!(p.len(), 1);
        let p = PeakFinder {
            min_prominence: 0.001,
        }
        .find(&g, &v);
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn merged_lines_give_one_peak() {
        let fwhm = 6.0;
        let g: Vec<f64> = (0..601).map(|i| -30.0 + 0.1 * i as f64).collect();
        // Separations below fwhm/2 merge; scan a few.
        for sep in [0.5, 1.0, 2.0, 2.9] {
            let v: Vec<f64> = g
                .iter()
                .map(|&x| lorentzian(x - sep / 2.0, fwhm) + lorentzian(x + sep / 2.0, fwhm))
                .collect();
            assert_eq!(find_peaks(&g, &v).len(), 1, "sep={sep}");
        }
        let v: Vec<f64> = g
            .iter()
            .map(|&x| lorentzian(x - 6.0, fwhm) + lorentzian(x + 6.0, fwhm))
            .collect();
        assert_eq!(find_peaks(&g, &v).len(), 2);
    }
}
