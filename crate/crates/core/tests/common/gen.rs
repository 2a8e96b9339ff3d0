//! Seeded random snapshots and predicates.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use visq_core::query::css::CssSelector;
use visq_core::query::{ColorSpec, Direction, DirectionMode, ElementKind, Level, Predicate};
use visq_core::snapshot::{Element, FormMeta, PageSnapshot, Raster, Rect, SelectOption, Viewport};

pub const VIEWPORT: f64 = 1000.0;
pub const RASTER: u32 = 100;

pub const PALETTE: [[u8; 3]; 6] = [
    [255, 255, 255],
    [0, 0, 0],
    [220, 20, 60],
    [30, 144, 255],
    [34, 139, 34],
    [250, 235, 210],
];

const WORDS: [&str; 16] = [
    "user",
    "Username",
    "superusers",
    "search",
    "Next",
    "page",
    "rust",
    "Login",
    "date",
    "the",
    "Go",
    "name",
    "Hello",
    "world",
    "price",
    "e3",
];

const TAGS: [&str; 16] = [
    "div", "span", "p", "a", "button", "input", "input", "textarea", "select", "img", "ul",
    "table", "h2", "label", "li", "td",
];

const INPUT_TYPES: [&str; 12] = [
    "text", "search", "email", "password", "number", "checkbox", "radio", "submit", "button",
    "image", "date", "hidden",
];

const SELECTORS: [&str; 12] = [
    "div",
    "a.btn",
    "#user",
    "[name]",
    "div > span",
    "ul li",
    "input[type=text]",
    "[data-vq-id=e3]",
    "p, a",
    "*",
    ".card .btn",
    "label[for=user]",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn words(rng: &mut ChaCha8Rng, max: usize) -> String {
    let n = rng.random_range(0..=max);
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn word(rng: &mut ChaCha8Rng) -> String {
    (*WORDS.choose(rng).unwrap()).to_owned()
}

fn rect(rng: &mut ChaCha8Rng, visible: bool) -> Rect {
    if !visible && rng.random_bool(0.5) {
        return Rect::new(0.0, 0.0, 0.0, 0.0);
    }
    let w = f64::from(rng.random_range(1..400));
    let h = f64::from(rng.random_range(1..200));
    let x = f64::from(rng.random_range(0..1000));
    let y = f64::from(rng.random_range(0..1000));
    Rect::new(x, y, w, h)
}

/// Random element tree of `n` elements (at least one) with a palette raster.
pub fn snapshot(rng: &mut ChaCha8Rng, n: usize) -> PageSnapshot {
    let n = n.max(1);
    let mut els: Vec<Element> = Vec::with_capacity(n);
    els.push(Element::new(
        "e0",
        "body",
        Rect::new(0.0, 0.0, VIEWPORT, VIEWPORT),
    ));
    for i in 1..n {
        let p = rng.random_range(0..i);
        let visible = els[p].visible && rng.random_bool(0.9);
        let tag = *TAGS.choose(rng).unwrap();
        let mut e = Element::new(format!("e{i}"), tag, rect(rng, visible));
        e.parent = Some(els[p].id.clone());
        e.visible = visible;
        e.font_size = *[12.0, 14.0, 16.0, 16.0, 20.0].choose(rng).unwrap();
        if visible && rng.random_bool(0.6) {
            e.own_text = words(rng, 3);
        }
        for a in [
            "name",
            "id",
            "title",
            "class",
            "alt",
            "placeholder",
            "value",
        ] {
            if rng.random_bool(0.15) {
                let v = if a == "class" && rng.random_bool(0.5) {
                    format!(
                        "{} {}",
                        ["btn", "card", "date-field"].choose(rng).unwrap(),
                        word(rng)
                    )
                } else {
                    word(rng)
                };
                e.attributes.insert(a.into(), v);
            }
        }
        match tag {
            "a" if rng.random_bool(0.7) => {
                e.attributes.insert("href".into(), format!("/p{i}"));
            }
            "label" if rng.random_bool(0.6) => {
                e.attributes.insert("for".into(), word(rng));
            }
            "input" => {
                let ty = *INPUT_TYPES.choose(rng).unwrap();
                let (attr, meta) = match rng.random_range(0..3) {
                    0 => (Some(ty), ty),
                    1 => (None, ty),
                    _ => (Some(ty), ""),
                };
                if let Some(t) = attr {
                    e.attributes.insert("type".into(), t.into());
                }
                e.form = Some(FormMeta {
                    input_type: meta.into(),
                    value: String::new(),
                    checked: false,
                    options: Vec::new(),
                    multiple: false,
                });
            }
            "select" => {
                let options = (0..rng.random_range(0..4))
                    .map(|k| SelectOption {
                        value: format!("v{k}"),
                        label: words(rng, 2),
                        selected: false,
                    })
                    .collect();
                e.form = Some(FormMeta {
                    input_type: "select-one".into(),
                    value: String::new(),
                    checked: false,
                    options,
                    multiple: false,
                });
            }
            "div" | "span" if rng.random_bool(0.05) => {
                e.attributes.insert("contenteditable".into(), "true".into());
            }
            _ => {}
        }
        if rng.random_bool(0.1) {
            e.listeners.insert("click".into());
        }
        e.has_background_image = rng.random_bool(0.05);
        els.push(e);
    }
    for i in (0..n).rev() {
        let mut parts: Vec<String> = Vec::new();
        if !els[i].own_text.is_empty() {
            parts.push(els[i].own_text.clone());
        }
        let id = els[i].id.clone();
        for c in &els[i + 1..] {
            if c.parent.as_deref() == Some(id.as_str()) && !c.visible_text.is_empty() {
                parts.push(c.visible_text.clone());
            }
        }
        els[i].visible_text = parts.join(" ");
    }
    PageSnapshot::new(
        "about:random",
        Viewport {
            width: VIEWPORT,
            height: VIEWPORT,
        },
        els,
        Some(raster(rng)),
    )
    .expect("generated snapshot is valid")
}

/// Palette blocks over a background; `RASTER` pixels square covering the
/// whole viewport.
pub fn raster(rng: &mut ChaCha8Rng) -> Raster {
    let mut r = Raster::filled(
        RASTER,
        RASTER,
        *PALETTE.choose(rng).unwrap(),
        f64::from(RASTER) / VIEWPORT,
    )
    .unwrap();
    for _ in 0..rng.random_range(2..12) {
        let (x, y) = (rng.random_range(0..RASTER), rng.random_range(0..RASTER));
        let (w, h) = (rng.random_range(1..60), rng.random_range(1..60));
        r.fill_rect(x, y, w, h, *PALETTE.choose(rng).unwrap());
    }
    r
}

fn level(rng: &mut ChaCha8Rng) -> Level {
    *[Level::Low, Level::Default, Level::High]
        .choose(rng)
        .unwrap()
}

fn leaf(rng: &mut ChaCha8Rng) -> Predicate {
    match rng.random_range(0..10) {
        0..=4 => Predicate::Kind {
            kind: *ElementKind::ALL.choose(rng).unwrap(),
            text: rng.random_bool(0.6).then(|| word(rng)),
        },
        5 | 6 => Predicate::Contains(if rng.random_bool(0.8) {
            word(rng)
        } else {
            "zz-absent".into()
        }),
        7 | 8 => Predicate::Color(ColorSpec {
            rgb: *PALETTE.choose(rng).unwrap(),
            tolerance: level(rng),
            dominance: level(rng),
        }),
        _ => Predicate::Css(CssSelector::parse(SELECTORS.choose(rng).unwrap()).unwrap()),
    }
}

/// Random predicate of at most `depth` levels over every node type.
pub fn predicate(rng: &mut ChaCha8Rng, depth: usize) -> Predicate {
    if depth <= 1 || rng.random_bool(0.3) {
        return leaf(rng);
    }
    match rng.random_range(0..4) {
        0 => Predicate::And(
            (0..rng.random_range(2..=3))
                .map(|_| predicate(rng, depth - 1))
                .collect(),
        ),
        1 => Predicate::Or(
            (0..rng.random_range(2..=3))
                .map(|_| predicate(rng, depth - 1))
                .collect(),
        ),
        2 => Predicate::Not(Box::new(predicate(rng, depth - 1))),
        _ => Predicate::Direction {
            dir: *Direction::ALL.choose(rng).unwrap(),
            mode: *[
                DirectionMode::Single,
                DirectionMode::Any,
                DirectionMode::All,
            ]
            .choose(rng)
            .unwrap(),
            inner: Box::new(predicate(rng, depth - 1)),
            max_distance: rng
                .random_bool(0.3)
                .then(|| f64::from(rng.random_range(50..600))),
        },
    }
}
