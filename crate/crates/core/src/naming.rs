//! Nearest-name lookup in a 57-entry color dictionary under ΔE76.
//!
//! Dictionary files are UTF-8 CSV with the header `name,variant,r,g,b`,
//! where `variant` is `base`, `light` or `dark` and `r,g,b` are 8-bit sRGB.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::colorspace::{delta_e76, lab_from_linear, srgb_decode, Lab, LinearRgb, SRgb8};
use crate::error::{Error, Result};

pub const DICTIONARY_SIZE: usize = 57;

const DEFAULT_DICTIONARY: &str = include_str!("../data/pwg5101_colors.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Base,
    Light,
    Dark,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "base" | "" => Ok(Variant::Base),
            "light" => Ok(Variant::Light),
            "dark" => Ok(Variant::Dark),
            other => Err(Error::Dictionary(format!("unknown variant '{other}'"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Base => "base",
            Variant::Light => "light",
            Variant::Dark => "dark",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DictionaryEntry {
    pub name: String,
    pub variant: Variant,
    pub color: SRgb8,
    #[serde(skip)]
    pub lab: Lab,
}

impl DictionaryEntry {
    /// Keyword form: `red`, `light-red`, `dark-red`.
    pub fn label(&self) -> String {
        label(&self.name, self.variant)
    }
}

fn label(name: &str, variant: Variant) -> String {
    match variant {
        Variant::Base => name.to_string(),
        v => format!("{v}-{name}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorDictionary {
    entries: Vec<DictionaryEntry>,
}

#[derive(Debug, Deserialize)]
struct Row {
    name: String,
    variant: String,
    r: u8,
    g: u8,
    b: u8,
}

impl ColorDictionary {
    /// The dictionary shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_reader(DEFAULT_DICTIONARY.as_bytes()).expect("embedded dictionary is valid")
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Dictionary(e.to_string()))?.clone();
        let expected = ["name", "variant", "r", "g", "b"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Dictionary(format!("expected header 'name,variant,r,g,b', found '{}'", headers.iter().collect::<Vec<_>>().join(","))));
        }

        let mut entries = Vec::new();
        let mut seen_names = HashSet::new();
        let mut seen_colors = HashSet::new();
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            // header is line 1
            let line = i + 2;
            let row = row.map_err(|e| Error::Dictionary(format!("row {line}: {e}")))?;
            if row.name.is_empty() {
                return Err(Error::Dictionary(format!("row {line}: empty name")));
            }
            let variant: Variant = row.variant.parse().map_err(|e| Error::Dictionary(format!("row {line}: {e}")))?;
            let color = SRgb8::new(row.r, row.g, row.b);
            let full = label(&row.name, variant);
            if !seen_names.insert(full.clone()) {
                return Err(Error::Dictionary(format!("row {line}: duplicate name '{full}'")));
            }
            if !seen_colors.insert(color) {
                return Err(Error::Dictionary(format!("row {line}: duplicate color ({}, {}, {})", color.r, color.g, color.b)));
            }
            entries.push(DictionaryEntry { name: row.name, variant, color, lab: lab_from_linear(srgb_decode(color)) });
        }
        if entries.len() != DICTIONARY_SIZE {
            return Err(Error::Dictionary(format!("expected {DICTIONARY_SIZE} entries, found {}", entries.len())));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[DictionaryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn load_dictionary(path: &Path) -> Result<ColorDictionary> {
    let file = std::fs::File::open(path).map_err(|e| Error::Dictionary(format!("{}: {e}", path.display())))?;
    ColorDictionary::from_reader(file).map_err(|e| match e {
        Error::Dictionary(msg) => Error::Dictionary(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColorName {
    pub name: String,
    pub variant: Variant,
    /// ΔE76 from the query to the entry.
    pub distance: f64,
}

impl ColorName {
    pub fn label(&self) -> String {
        label(&self.name, self.variant)
    }
}

fn ranked(c: LinearRgb, d: &ColorDictionary) -> Vec<(usize, f64)> {
    let lab = lab_from_linear(c);
    let mut scored: Vec<(usize, f64)> = d.entries.iter().enumerate().map(|(i, e)| (i, delta_e76(lab, e.lab))).collect();
    // stable sort keeps file order among equal distances
    scored.sort_by(|a, b| a.1.total_cmp(&b.1));
    scored
}

fn to_name(d: &ColorDictionary, (i, distance): (usize, f64)) -> ColorName {
    let e = &d.entries[i];
    ColorName { name: e.name.clone(), variant: e.variant, distance }
}

/// Closest dictionary entry; ties go to the earlier entry.
pub fn name_color(c: LinearRgb, d: &ColorDictionary) -> ColorName {
    let lab = lab_from_linear(c);
    let mut best = (0, f64::INFINITY);
    for (i, e) in d.entries.iter().enumerate() {
        let dist = delta_e76(lab, e.lab);
        if dist < best.1 {
            best = (i, dist);
        }
    }
    to_name(d, best)
}

/// The `k` closest entries in ascending distance.
pub fn nearest_k(c: LinearRgb, d: &ColorDictionary, k: usize) -> Result<Vec<ColorName>> {
    if k == 0 || k > d.len() {
        return Err(Error::Domain(format!("k must be in 1..={}, got {k}", d.len())));
    }
    Ok(ranked(c, d).into_iter().take(k).map(|s| to_name(d, s)).collect())
}
