//! CSS color names and pixel-region color matching.

use serde::Serialize;

use crate::query::{ColorSpec, Level};
use crate::snapshot::{Element, Raster, Rect};

/// Upper bound on pixels inspected per region.
pub const SAMPLE_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown color {name:?}{}", suggest(.suggestions))]
pub struct UnknownColor {
    pub name: String,
    pub suggestions: Vec<String>,
}

fn suggest(s: &[String]) -> String {
    if s.is_empty() {
        String::new()
    } else {
        format!(" (did you mean {}?)", s.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("color predicates need a screenshot raster")]
pub struct RasterRequired;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ColorMatch {
    pub matched: bool,
    pub dominant_fraction: f64,
    /// Mean normalized distance of the matching pixels, 1 when none match.
    pub mean_channel_distance: f64,
}

impl ColorMatch {
    const EMPTY: ColorMatch = ColorMatch {
        matched: false,
        dominant_fraction: 0.0,
        mean_channel_distance: 1.0,
    };

    /// Ranking score: dominance scaled by closeness.
    pub fn score(&self) -> f64 {
        self.dominant_fraction.min(1.0) * (1.0 - self.mean_channel_distance)
    }
}

pub fn tolerance_radius(level: Level) -> f64 {
    match level {
        Level::Low => 0.08,
        Level::Default => 0.15,
        Level::High => 0.30,
    }
}

pub fn dominance_threshold(level: Level) -> f64 {
    match level {
        Level::Low => 0.25,
        Level::Default => 0.50,
        Level::High => 0.80,
    }
}

/// Largest RGB Euclidean distance, black to white.
const MAX_DISTANCE: f64 = 441.672_955_930_063_7;

/// RGB Euclidean distance scaled into [0, 1].
pub fn normalized_distance(a: [u8; 3], b: [u8; 3]) -> f64 {
    let sq: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, y)| (f64::from(x) - f64::from(y)).powi(2))
        .sum();
    sq.sqrt() / (255.0 * 3f64.sqrt())
}

/// Resolves a CSS color name (case-insensitive) or a `#rgb` / `#rrggbb`
/// literal.
pub fn parse_color(name: &str) -> Result<[u8; 3], UnknownColor> {
    let trimmed = name.trim();
    if let Some(hex) = trimmed.strip_prefix('#') {
        if let Some(rgb) = parse_hex(hex) {
            return Ok(rgb);
        }
    } else if let Some(rgb) = name_to_rgb(trimmed) {
        return Ok(rgb);
    }
    Err(UnknownColor {
        name: name.to_owned(),
        suggestions: nearest_names(trimmed, 3),
    })
}

pub fn name_to_rgb(name: &str) -> Option<[u8; 3]> {
    let lower = name.to_ascii_lowercase();
    NAMED_COLORS
        .binary_search_by(|(n, _)| n.cmp(&lower.as_str()))
        .ok()
        .map(|i| NAMED_COLORS[i].1)
}

fn parse_hex(hex: &str) -> Option<[u8; 3]> {
    if !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        return None;
    }
    match hex.len() {
        3 => {
            let d: Vec<u8> = hex
                .chars()
                .map(|c| c.to_digit(16).expect("hex digit") as u8 * 17)
                .collect();
            Some([d[0], d[1], d[2]])
        }
        6 => {
            let ch = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).ok();
            Some([ch(0)?, ch(2)?, ch(4)?])
        }
        _ => None,
    }
}

fn nearest_names(name: &str, k: usize) -> Vec<String> {
    let lower = name.to_ascii_lowercase();
    let mut scored: Vec<(usize, &str)> = NAMED_COLORS
        .iter()
        .map(|(n, _)| (strsim::damerau_levenshtein(&lower, n), *n))
        .collect();
    scored.sort();
    scored
        .into_iter()
        .take(k)
        .map(|(_, n)| n.to_owned())
        .collect()
}

/// Device-pixel bounds `(x0, y0, x1, y1)` of a CSS box, clipped to the raster.
pub fn region_bounds(rect: &Rect, raster: &Raster) -> (u32, u32, u32, u32) {
    let s = raster.scale();
    let clip = |v: f64, max: u32| -> u32 {
        let v = (v * s).round();
        if v.is_nan() || v <= 0.0 {
            0
        } else {
            v.min(f64::from(max)) as u32
        }
    };
    let x0 = clip(rect.x, raster.width());
    let y0 = clip(rect.y, raster.height());
    let x1 = clip(rect.x + rect.w, raster.width()).max(x0);
    let y1 = clip(rect.y + rect.h, raster.height()).max(y0);
    (x0, y0, x1, y1)
}

/// Matches the pixels under `rect` against `spec`, sampling at most
/// [`SAMPLE_CAP`] pixels with a fixed stride.
pub fn match_region(rect: &Rect, raster: &Raster, spec: &ColorSpec) -> ColorMatch {
    let (x0, y0, x1, y1) = region_bounds(rect, raster);
    let (w, h) = ((x1 - x0) as usize, (y1 - y0) as usize);
    let count = w * h;
    if count == 0 {
        return ColorMatch::EMPTY;
    }
    let n = count.min(SAMPLE_CAP);
    let radius = tolerance_radius(spec.tolerance);
    let bound = (radius * MAX_DISTANCE).powi(2) * (1.0 + 1e-9);
    let (mut hits, mut dist_sum) = (0usize, 0.0);
    let mut visit = |px: [u8; 3]| {
        let sq: i32 = (0..3)
            .map(|c| (i32::from(px[c]) - i32::from(spec.rgb[c])).pow(2))
            .sum();
        if f64::from(sq) <= bound {
            let d = normalized_distance(px, spec.rgb);
            if d <= radius {
                hits += 1;
                dist_sum += d;
            }
        }
    };
    if n == count {
        for y in y0..y1 {
            for x in x0..x1 {
                visit(raster.pixel(x, y));
            }
        }
    } else {
        for i in 0..n {
            let k = i * count / n;
            visit(raster.pixel(x0 + (k % w) as u32, y0 + (k / w) as u32));
        }
    }
    let fraction = hits as f64 / n as f64;
    ColorMatch {
        matched: hits > 0 && fraction >= dominance_threshold(spec.dominance),
        dominant_fraction: fraction,
        mean_channel_distance: if hits == 0 {
            1.0
        } else {
            dist_sum / hits as f64
        },
    }
}

pub fn match_color(
    element: &Element,
    raster: Option<&Raster>,
    spec: &ColorSpec,
) -> Result<ColorMatch, RasterRequired> {
    raster
        .map(|r| match_region(&element.rect, r, spec))
        .ok_or(RasterRequired)
}

/// CSS named colors, sorted by name.
pub const NAMED_COLORS: &[(&str, [u8; 3])] = &[
    ("aliceblue", [240, 248, 255]),
    ("antiquewhite", [250, 235, 215]),
    ("aqua", [0, 255, 255]),
    ("aquamarine", [127, 255, 212]),
    ("azure", [240, 255, 255]),
    ("beige", [245, 245, 220]),
    ("bisque", [255, 228, 196]),
    ("black", [0, 0, 0]),
    ("blanchedalmond", [255, 235, 205]),
    ("blue", [0, 0, 255]),
    ("blueviolet", [138, 43, 226]),
    ("brown", [165, 42, 42]),
    ("burlywood", [222, 184, 135]),
    ("cadetblue", [95, 158, 160]),
    ("chartreuse", [127, 255, 0]),
    ("chocolate", [210, 105, 30]),
    ("coral", [255, 127, 80]),
    ("cornflowerblue", [100, 149, 237]),
    ("cornsilk", [255, 248, 220]),
    ("crimson", [220, 20, 60]),
    ("cyan", [0, 255, 255]),
    ("darkblue", [0, 0, 139]),
    ("darkcyan", [0, 139, 139]),
    ("darkgoldenrod", [184, 134, 11]),
    ("darkgray", [169, 169, 169]),
    ("darkgreen", [0, 100, 0]),
    ("darkgrey", [169, 169, 169]),
    ("darkkhaki", [189, 183, 107]),
    ("darkmagenta", [139, 0, 139]),
    ("darkolivegreen", [85, 107, 47]),
    ("darkorange", [255, 140, 0]),
    ("darkorchid", [153, 50, 204]),
    ("darkred", [139, 0, 0]),
    ("darksalmon", [233, 150, 122]),
    ("darkseagreen", [143, 188, 143]),
    ("darkslateblue", [72, 61, 139]),
    ("darkslategray", [47, 79, 79]),
    ("darkslategrey", [47, 79, 79]),
    ("darkturquoise", [0, 206, 209]),
    ("darkviolet", [148, 0, 211]),
    ("deeppink", [255, 20, 147]),
    ("deepskyblue", [0, 191, 255]),
    ("dimgray", [105, 105, 105]),
    ("dimgrey", [105, 105, 105]),
    ("dodgerblue", [30, 144, 255]),
    ("firebrick", [178, 34, 34]),
    ("floralwhite", [255, 250, 240]),
    ("forestgreen", [34, 139, 34]),
    ("fuchsia", [255, 0, 255]),
    ("gainsboro", [220, 220, 220]),
    ("ghostwhite", [248, 248, 255]),
    ("gold", [255, 215, 0]),
    ("goldenrod", [218, 165, 32]),
    ("gray", [128, 128, 128]),
    ("green", [0, 128, 0]),
    ("greenyellow", [173, 255, 47]),
    ("grey", [128, 128, 128]),
    ("honeydew", [240, 255, 240]),
    ("hotpink", [255, 105, 180]),
    ("indianred", [205, 92, 92]),
    ("indigo", [75, 0, 130]),
    ("ivory", [255, 255, 240]),
    ("khaki", [240, 230, 140]),
    ("lavender", [230, 230, 250]),
    ("lavenderblush", [255, 240, 245]),
    ("lawngreen", [124, 252, 0]),
    ("lemonchiffon", [255, 250, 205]),
    ("lightblue", [173, 216, 230]),
    ("lightcoral", [240, 128, 128]),
    ("lightcyan", [224, 255, 255]),
    ("lightgoldenrodyellow", [250, 250, 210]),
    ("lightgray", [211, 211, 211]),
    ("lightgreen", [144, 238, 144]),
    ("lightgrey", [211, 211, 211]),
    ("lightpink", [255, 182, 193]),
    ("lightsalmon", [255, 160, 122]),
    ("lightseagreen", [32, 178, 170]),
    ("lightskyblue", [135, 206, 250]),
    ("lightslategray", [119, 136, 153]),
    ("lightslategrey", [119, 136, 153]),
    ("lightsteelblue", [176, 196, 222]),
    ("lightyellow", [255, 255, 224]),
    ("lime", [0, 255, 0]),
    ("limegreen", [50, 205, 50]),
    ("linen", [250, 240, 230]),
    ("magenta", [255, 0, 255]),
    ("maroon", [128, 0, 0]),
    ("mediumaquamarine", [102, 205, 170]),
    ("mediumblue", [0, 0, 205]),
    ("mediumorchid", [186, 85, 211]),
    ("mediumpurple", [147, 112, 219]),
    ("mediumseagreen", [60, 179, 113]),
    ("mediumslateblue", [123, 104, 238]),
    ("mediumspringgreen", [0, 250, 154]),
    ("mediumturquoise", [72, 209, 204]),
    ("mediumvioletred", [199, 21, 133]),
    ("midnightblue", [25, 25, 112]),
    ("mintcream", [245, 255, 250]),
    ("mistyrose", [255, 228, 225]),
    ("moccasin", [255, 228, 181]),
    ("navajowhite", [255, 222, 173]),
    ("navy", [0, 0, 128]),
    ("oldlace", [253, 245, 230]),
    ("olive", [128, 128, 0]),
    ("olivedrab", [107, 142, 35]),
    ("orange", [255, 165, 0]),
    ("orangered", [255, 69, 0]),
    ("orchid", [218, 112, 214]),
    ("palegoldenrod", [238, 232, 170]),
    ("palegreen", [152, 251, 152]),
    ("paleturquoise", [175, 238, 238]),
    ("palevioletred", [219, 112, 147]),
    ("papayawhip", [255, 239, 213]),
    ("peachpuff", [255, 218, 185]),
    ("peru", [205, 133, 63]),
    ("pink", [255, 192, 203]),
    ("plum", [221, 160, 221]),
    ("powderblue", [176, 224, 230]),
    ("purple", [128, 0, 128]),
    ("rebeccapurple", [102, 51, 153]),
    ("red", [255, 0, 0]),
    ("rosybrown", [188, 143, 143]),
    ("royalblue", [65, 105, 225]),
    ("saddlebrown", [139, 69, 19]),
    ("salmon", [250, 128, 114]),
    ("sandybrown", [244, 164, 96]),
    ("seagreen", [46, 139, 87]),
    ("seashell", [255, 245, 238]),
    ("sienna", [160, 82, 45]),
    ("silver", [192, 192, 192]),
    ("skyblue", [135, 206, 235]),
    ("slateblue", [106, 90, 205]),
    ("slategray", [112, 128, 144]),
    ("slategrey", [112, 128, 144]),
    ("snow", [255, 250, 250]),
    ("springgreen", [0, 255, 127]),
    ("steelblue", [70, 130, 180]),
    ("tan", [210, 180, 140]),
    ("teal", [0, 128, 128]),
    ("thistle", [216, 191, 216]),
    ("tomato", [255, 99, 71]),
    ("turquoise", [64, 224, 208]),
    ("violet", [238, 130, 238]),
    ("wheat", [245, 222, 179]),
    ("white", [255, 255, 255]),
    ("whitesmoke", [245, 245, 245]),
    ("yellow", [255, 255, 0]),
    ("yellowgreen", [154, 205, 50]),
];
