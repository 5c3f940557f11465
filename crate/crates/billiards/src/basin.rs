//! Basin-of-attraction rasters: each pixel of a window in the invariant box
//! is iterated to its limit cycle and colored by the attractor it reaches.
//! Output as binary PPM (P6), with an optional SVG overlay of the stabilized
//! singular set.

use std::io::{self, Write};
use std::path::Path;

use crate::billiard::{invariant_ball, iterate, IterateParams, RateVector, Terminal};
use crate::geometry::{Location, Point, Polygon};
use crate::return_map::AttractorCatalog;
use crate::singular::SingularComplex;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelLabel {
    /// Index into the catalog's orbit list.
    Basin(usize),
    /// Pixel center inside the table polygon.
    Inside,
    /// On the singular set, or the orbit hit it.
    Singular,
    /// Budget exhausted or limit cycle not in the catalog.
    NonConvergent,
}

/// A rendered basin raster. Row-major, top row first (image convention).
#[derive(Debug, Clone)]
pub struct BasinMap {
    pub width: usize,
    pub height: usize,
    /// Lower-left and upper-right corners of the rendered window.
    pub min: Point,
    pub max: Point,
    pub labels: Vec<PixelLabel>,
    pub catalog: AttractorCatalog,
}

#[derive(Debug, Clone, Copy)]
pub struct BasinParams {
    pub resolution: usize,
    /// Window to render; `None` renders the whole invariant box.
    pub window: Option<(Point, Point)>,
}

impl Default for BasinParams {
    fn default() -> Self {
        BasinParams {
            resolution: 512,
            window: None,
        }
    }
}

/// Renders the basin raster: every pixel center is located, iterated and
/// matched against `catalog` (tolerance 1e-6). Parallel over rows.
pub fn render_basins(
    table: &Polygon,
    rates: &RateVector,
    catalog: &AttractorCatalog,
    basin: &BasinParams,
    iter: &IterateParams,
) -> BasinMap {
    let r = invariant_ball(table, rates).expect("rates in (0,1)").radius;
    let (min, max) = basin
        .window
        .unwrap_or((Point::new(-r, -r), Point::new(r, r)));
    let width = basin.resolution.max(1);
    let height =
        (((max.im - min.im) / (max.re - min.re) * width as f64).round() as usize).max(1);
    let dx = (max.re - min.re) / width as f64;
    let dy = (max.im - min.im) / height as f64;

    let labels: Vec<PixelLabel> = (0..height)
        .into_par_iter()
        .flat_map_iter(|row| {
            let im = max.im - (row as f64 + 0.5) * dy;
            (0..width).map(move |col| (col, im))
        })
        .map(|(col, im)| {
            let z = Point::new(min.re + (col as f64 + 0.5) * dx, im);
            match table.locate(z, iter.eps) {
                Location::InsidePolygon => return PixelLabel::Inside,
                Location::OnSingular { .. } => return PixelLabel::Singular,
                Location::Cone(_) => {}
            }
            match iterate(z, table, rates, iter) {
                Ok(rec) => match rec.terminal {
                    Terminal::Converged { cycle, .. } => match catalog.match_cycle(&cycle, 1e-6) {
                        Some(i) => PixelLabel::Basin(i),
                        None => PixelLabel::NonConvergent,
                    },
                    Terminal::HitSingular { .. } => PixelLabel::Singular,
                    Terminal::BudgetExhausted => PixelLabel::NonConvergent,
                },
                Err(_) => PixelLabel::NonConvergent,
            }
        })
        .collect();

    BasinMap {
        width,
        height,
        min,
        max,
        labels,
        catalog: catalog.clone(),
    }
}

/// Deterministic orbit color, keyed by (period, rotation): golden-angle hue
/// stepping from a small hash, full saturation.
pub fn orbit_color(period: usize, rotation: Option<(i64, usize)>) -> [u8; 3] {
    let (num, den) = rotation.unwrap_or((0, 1));
    let key = period
        .wrapping_mul(0x9e3779b9)
        .wrapping_add((num as usize).wrapping_mul(0x85ebca6b))
        .wrapping_add(den.wrapping_mul(0xc2b2ae35));
    let hue = (key % 360) as f64;
    hsv_to_rgb(hue, 0.85, 0.95)
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let x = c * (1.0 - ((h / 60.0) % 2.0 - 1.0).abs());
    let m = v - c;
    let (r, g, b) = match (h / 60.0) as usize % 6 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    [
        ((r + m) * 255.0).round() as u8,
        ((g + m) * 255.0).round() as u8,
        ((b + m) * 255.0).round() as u8,
    ]
}

impl BasinMap {
    pub fn pixel_color(&self, label: PixelLabel) -> [u8; 3] {
        match label {
            PixelLabel::Basin(i) => {
                let o = &self.catalog.orbits[i];
                orbit_color(o.period, o.rotation)
            }
            PixelLabel::Inside => [255, 255, 255],
            PixelLabel::Singular => [0, 0, 0],
            PixelLabel::NonConvergent => [128, 128, 128],
        }
    }

    /// Binary PPM (P6).
    pub fn write_ppm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        let mut buf = Vec::with_capacity(self.width * self.height * 3);
        for &l in &self.labels {
            buf.extend_from_slice(&self.pixel_color(l));
        }
        out.write_all(&buf)
    }

    pub fn save_ppm<P: AsRef<Path>>(&self, path: P) -> io::Result<()> {
        self.write_ppm(std::fs::File::create(path)?)
    }

    /// SVG overlay: the table outline and the singular segments, in the same
    /// window coordinates as the raster (y axis flipped to match).
    pub fn write_svg<W: Write>(
        &self,
        table: &Polygon,
        complex: &SingularComplex,
        mut out: W,
    ) -> io::Result<()> {
        let w = self.max.re - self.min.re;
        let h = self.max.im - self.min.im;
        let sw = w / self.width as f64; // hairline in user units
        writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">",
            self.min.re, -self.max.im, w, h
        )?;
        let pts: Vec<String> = table
            .vertices()
            .iter()
            .map(|v| format!("{},{}", v.re, -v.im))
            .collect();
        writeln!(
            out,
            "  <polygon points=\"{}\" fill=\"white\" stroke=\"black\" stroke-width=\"{sw}\"/>",
            pts.join(" ")
        )?;
        for s in &complex.segments {
            writeln!(
                out,
                "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"{sw}\"/>",
                s.a.re, -s.a.im, s.b.re, -s.b.im
            )?;
        }
        writeln!(out, "</svg>")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::return_map::{attractor_census, CensusTable};
    use crate::singular::{expand_singular, ExpandParams};

    #[test]
    fn square_half_raster_is_single_basin() {
        let table = Polygon::square();
        let rates = RateVector::uniform(4, 0.5).unwrap();
        let catalog = attractor_census(CensusTable::Square, 0.5, 1e-9).unwrap();
        let map = render_basins(
            &table,
            &rates,
            &catalog,
            &BasinParams {
                resolution: 48,
                window: None,
            },
            &IterateParams::default(),
        );
        assert_eq!(map.labels.len(), map.width * map.height);
        let mut basin = 0usize;
        let mut other = 0usize;
        for &l in &map.labels {
            match l {
                PixelLabel::Basin(0) => basin += 1,
                PixelLabel::Inside | PixelLabel::Singular => other += 1,
                l => panic!("unexpected label {l:?}"),
            }
        }
        assert!(basin > 100 * other.max(1) / 10); // basin dominates the frame
    }

    #[test]
    fn ppm_and_svg_outputs_are_wellformed() {
        let table = Polygon::square();
        let rates = RateVector::uniform(4, 0.5).unwrap();
        let catalog = attractor_census(CensusTable::Square, 0.5, 1e-9).unwrap();
        let map = render_basins(
            &table,
            &rates,
            &catalog,
            &BasinParams {
                resolution: 16,
                window: Some((Point::new(-3.0, -3.0), Point::new(3.0, 3.0))),
            },
            &IterateParams::default(),
        );
        let mut ppm = Vec::new();
        map.write_ppm(&mut ppm).unwrap();
        assert!(ppm.starts_with(b"P6\n16 16\n255\n"));
        assert_eq!(ppm.len(), 13 + 16 * 16 * 3);

        let s = expand_singular(&table, &rates, &ExpandParams::default());
        let mut svg = Vec::new();
        map.write_svg(&table, &s, &mut svg).unwrap();
        let text = String::from_utf8(svg).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.contains("<line"));
        assert!(text.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn colors_are_deterministic_and_distinct_for_pentagon_orbits() {
        let keys = [
            (5usize, Some((1i64, 5usize))),
            (5, Some((2, 5))),
            (10, Some((3, 5))),
            (35, Some((9, 5))),
        ];
        let colors: Vec<[u8; 3]> = keys.iter().map(|&(p, r)| orbit_color(p, r)).collect();
        for (i, c) in colors.iter().enumerate() {
            assert_eq!(*c, orbit_color(keys[i].0, keys[i].1));
            for d in &colors[i + 1..] {
                assert_ne!(c, d);
            }
        }
    }
}
