//! Binary occupancy grids with world-extent metadata.
//!
//! Row 0 is the top of the map (largest y), matching image conventions.
//! PGM pixels darker than mid-gray are occupied; CSV cells hold `1` for
//! occupied and `0` for free.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sidecar metadata: the world rectangle covered by the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    /// `[xmin, ymin, xmax, ymax]` in meters.
    pub extent: [f64; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyGrid {
    pub width: usize,
    pub height: usize,
    /// Row-major, row 0 at the top.
    pub occupied: Vec<bool>,
    pub extent: [f64; 4],
}

impl OccupancyGrid {
    pub fn from_fn(width: usize, height: usize, extent: [f64; 4], f: impl Fn([f64; 2]) -> bool) -> Self {
        let mut grid = OccupancyGrid { width, height, occupied: vec![false; width * height], extent };
        for r in 0..height {
            for c in 0..width {
                grid.occupied[r * width + c] = f(grid.cell_center(r, c));
            }
        }
        grid
    }

    pub fn cell_size(&self) -> [f64; 2] {
        [(self.extent[2] - self.extent[0]) / self.width as f64, (self.extent[3] - self.extent[1]) / self.height as f64]
    }

    pub fn cell_center(&self, row: usize, col: usize) -> [f64; 2] {
        let [cw, ch] = self.cell_size();
        [self.extent[0] + (col as f64 + 0.5) * cw, self.extent[3] - (row as f64 + 0.5) * ch]
    }

    pub fn is_occupied(&self, row: usize, col: usize) -> bool {
        self.occupied[row * self.width + col]
    }

    /// Occupancy of the cell containing `p`; outside the extent is occupied.
    pub fn occupied_at(&self, p: [f64; 2]) -> bool {
        let [cw, ch] = self.cell_size();
        let col = ((p[0] - self.extent[0]) / cw).floor();
        let row = ((self.extent[3] - p[1]) / ch).floor();
        if col < 0.0 || row < 0.0 || col >= self.width as f64 || row >= self.height as f64 {
            return true;
        }
        self.is_occupied(row as usize, col as usize)
    }

    pub fn free_fraction(&self) -> f64 {
        self.occupied.iter().filter(|o| !**o).count() as f64 / self.occupied.len() as f64
    }

    /// Cell centers with labels `z = 1` free, `z = 0` occupied.
    pub fn labeled_cells(&self) -> Vec<([f64; 2], bool)> {
        let mut out = Vec::with_capacity(self.occupied.len());
        for r in 0..self.height {
            for c in 0..self.width {
                out.push((self.cell_center(r, c), !self.is_occupied(r, c)));
            }
        }
        out
    }

    /// Loads a `.pgm` (P2 or P5) or `.csv` grid plus its `<stem>.json` sidecar.
    pub fn load(path: &Path) -> Result<Self> {
        let meta_path = sidecar_path(path);
        let meta_text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: GridMeta = serde_json::from_str(&meta_text).map_err(|e| Error::parse(&meta_path, e))?;
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let (width, height, occupied) = match path.extension().and_then(|e| e.to_str()) {
            Some("pgm") => parse_pgm(&bytes).map_err(|m| Error::parse(path, m))?,
            Some("csv") => parse_csv(&bytes).map_err(|m| Error::parse(path, m))?,
            _ => return Err(Error::parse(path, "expected a .pgm or .csv occupancy grid")),
        };
        let e = meta.extent;
        if !(e[0] < e[2] && e[1] < e[3]) {
            return Err(Error::parse(&meta_path, "extent must be [xmin, ymin, xmax, ymax] with min < max"));
        }
        Ok(OccupancyGrid { width, height, occupied, extent: e })
    }

    /// Writes the grid as binary PGM (P5) or CSV depending on the extension,
    /// plus the JSON sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        let body: Vec<u8> = match path.extension().and_then(|e| e.to_str()) {
            Some("pgm") => {
                let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
                out.extend(self.occupied.iter().map(|o| if *o { 0u8 } else { 255u8 }));
                out
            }
            Some("csv") => {
                let mut s = String::new();
                for r in 0..self.height {
                    let row: Vec<&str> =
                        (0..self.width).map(|c| if self.is_occupied(r, c) { "1" } else { "0" }).collect();
                    s.push_str(&row.join(","));
                    s.push('\n');
                }
                s.into_bytes()
            }
            _ => return Err(Error::parse(path, "expected a .pgm or .csv occupancy grid")),
        };
        std::fs::write(path, body).map_err(|e| Error::io(path, e))?;
        let meta_path = sidecar_path(path);
        let meta = serde_json::to_string_pretty(&GridMeta { extent: self.extent }).expect("serializable");
        std::fs::write(&meta_path, meta).map_err(|e| Error::io(&meta_path, e))
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn parse_csv(bytes: &[u8]) -> std::result::Result<(usize, usize, Vec<bool>), String> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes);
    let mut cells = Vec::new();
    let mut width = None;
    for (r, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if *width.get_or_insert(rec.len()) != rec.len() {
            return Err(format!("row {r} has {} cells, expected {}", rec.len(), width.unwrap()));
        }
        for v in rec.iter() {
            match v.trim() {
                "0" => cells.push(false),
                "1" => cells.push(true),
                other => return Err(format!("row {r}: cell value {other:?} is not 0 or 1")),
            }
        }
    }
    let width = width.ok_or("empty grid")?;
    let height = cells.len() / width;
    Ok((width, height, cells))
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<(usize, usize, Vec<bool>), String> {
    // header tokens: magic, width, height, maxval; '#' starts a comment
    let mut pos = 0;
    let mut tokens = Vec::new();
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated PGM header".into());
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| format!("bad PGM header value {s:?}"));
    let (width, height, maxval) = (parse(&tokens[1])?, parse(&tokens[2])?, parse(&tokens[3])?);
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err("PGM dimensions and maxval must be positive".into());
    }
    let n = width * height;
    let values: Vec<usize> = match tokens[0].as_str() {
        "P5" => {
            pos += 1;
            let bpp = if maxval > 255 { 2 } else { 1 };
            let data = bytes.get(pos..pos + n * bpp).ok_or("truncated PGM raster")?;
            if bpp == 1 {
                data.iter().map(|v| *v as usize).collect()
            } else {
                data.chunks(2).map(|c| ((c[0] as usize) << 8) | c[1] as usize).collect()
            }
        }
        "P2" => {
            let text = String::from_utf8_lossy(&bytes[pos..]);
            let vals: std::result::Result<Vec<usize>, _> =
                text.split_ascii_whitespace().take(n).map(|t| t.parse::<usize>()).collect();
            let vals = vals.map_err(|e| e.to_string())?;
            if vals.len() != n {
                return Err("truncated PGM raster".into());
            }
            vals
        }
        other => return Err(format!("unsupported PGM magic {other:?}")),
    };
    Ok((width, height, values.into_iter().map(|v| 2 * v < maxval).collect()))
}
