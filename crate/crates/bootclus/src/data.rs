//! In-memory representations and file ingestion for the three data shapes,
//! plus partitions and dissimilarity matrices.
//!
//! All types validate their invariants on construction and are immutable
//! afterwards, so they can be shared freely across threads.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Statistical kind of a variable in a mixed-type dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Continuous,
    Ordinal,
    Nominal,
    Binary,
}

impl VarKind {
    pub fn is_categorical(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VarKind::Continuous => "continuous",
            VarKind::Ordinal => "ordinal",
            VarKind::Nominal => "nominal",
            VarKind::Binary => "binary",
        };
        f.write_str(s)
    }
}

/// Declared schema for one column of a mixed-type dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub kind: VarKind,
    /// Ordered category labels; empty for continuous variables.
    #[serde(default)]
    pub levels: Vec<String>,
    /// Distance contribution multiplier.
    #[serde(default = "default_weight")]
    pub weight: f64,
}

fn default_weight() -> f64 {
    1.0
}

impl VariableSpec {
    pub fn continuous(name: &str, weight: f64) -> Self {
        VariableSpec {
            name: name.to_string(),
            kind: VarKind::Continuous,
            levels: Vec::new(),
            weight,
        }
    }

    pub fn categorical(name: &str, kind: VarKind, levels: &[&str], weight: f64) -> Self {
        VariableSpec {
            name: name.to_string(),
            kind,
            levels: levels.iter().map(|s| s.to_string()).collect(),
            weight,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.weight < 0.0 || !self.weight.is_finite() {
            return Err(Error::data(format!(
                "variable '{}': weight must be finite and >= 0",
                self.name
            )));
        }
        match self.kind {
            VarKind::Continuous => {
                if !self.levels.is_empty() {
                    return Err(Error::data(format!(
                        "variable '{}': continuous variables take no levels",
                        self.name
                    )));
                }
            }
            VarKind::Binary => {
                if self.levels.len() != 2 {
                    return Err(Error::data(format!(
                        "variable '{}': binary variables need exactly 2 levels",
                        self.name
                    )));
                }
            }
            VarKind::Ordinal | VarKind::Nominal => {
                if self.levels.is_empty() {
                    return Err(Error::data(format!(
                        "variable '{}': {} variables need at least one level",
                        self.name, self.kind
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One cell of a mixed-type dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Real(f64),
    /// Zero-based index into the variable's level list.
    Level(usize),
}

impl Value {
    pub fn as_real(self) -> f64 {
        match self {
            Value::Real(x) => x,
            Value::Level(g) => g as f64,
        }
    }

    pub fn level(self) -> usize {
        match self {
            Value::Level(g) => g,
            Value::Real(_) => panic!("continuous value where level expected"),
        }
    }
}

/// n x p table of mixed-type observations with a declared schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixedDataset {
    specs: Vec<VariableSpec>,
    rows: Vec<Vec<Value>>,
}

impl MixedDataset {
    pub fn new(specs: Vec<VariableSpec>, rows: Vec<Vec<Value>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::data("n >= 2 required"));
        }
        for spec in &specs {
            spec.validate()?;
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != specs.len() {
                return Err(Error::data(format!(
                    "row {}: expected {} values, got {}",
                    i,
                    specs.len(),
                    row.len()
                )));
            }
            for (value, spec) in row.iter().zip(&specs) {
                match (value, spec.kind) {
                    (Value::Real(x), VarKind::Continuous) => {
                        if !x.is_finite() {
                            return Err(Error::data(format!(
                                "row {}: non-finite value in '{}'",
                                i, spec.name
                            )));
                        }
                    }
                    (Value::Level(g), k) if k.is_categorical() => {
                        if *g >= spec.levels.len() {
                            return Err(Error::data(format!(
                                "row {}: level index {} out of range for '{}'",
                                i, g, spec.name
                            )));
                        }
                    }
                    _ => {
                        return Err(Error::data(format!(
                            "row {}: value kind does not match '{}' ({})",
                            i, spec.name, spec.kind
                        )));
                    }
                }
            }
        }
        Ok(MixedDataset { specs, rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn p(&self) -> usize {
        self.specs.len()
    }

    pub fn specs(&self) -> &[VariableSpec] {
        &self.specs
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn value(&self, i: usize, j: usize) -> Value {
        self.rows[i][j]
    }

    /// Column j as raw reals (continuous values, or zero-based level indexes).
    pub fn column_reals(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j].as_real()).collect()
    }
}

/// n categorical series of common length T over categories 1..=h, with missing days.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoricalSeriesDataset {
    /// `series[i][t]` is `Some(c)` with c in 1..=h, or `None` for a missing day.
    series: Vec<Vec<Option<usize>>>,
    t_len: usize,
    h: usize,
    prescription_period: usize,
}

impl CategoricalSeriesDataset {
    pub fn new(
        series: Vec<Vec<Option<usize>>>,
        h: usize,
        prescription_period: usize,
    ) -> Result<Self> {
        if series.len() < 2 {
            return Err(Error::data("n >= 2 required"));
        }
        if h == 0 {
            return Err(Error::data("h >= 1 required"));
        }
        if prescription_period == 0 {
            return Err(Error::data("prescription_period >= 1 required"));
        }
        let t_len = series[0].len();
        if t_len == 0 {
            return Err(Error::data("series length T >= 1 required"));
        }
        for (i, s) in series.iter().enumerate() {
            if s.len() != t_len {
                return Err(Error::data(format!(
                    "series {}: length mismatch ({} vs {})",
                    i,
                    s.len(),
                    t_len
                )));
            }
            for (t, v) in s.iter().enumerate() {
                if let Some(c) = v {
                    if *c < 1 || *c > h {
                        return Err(Error::data(format!(
                            "series {}, day {}: category {} out of range 1..={}",
                            i,
                            t + 1,
                            c,
                            h
                        )));
                    }
                }
            }
        }
        Ok(CategoricalSeriesDataset {
            series,
            t_len,
            h,
            prescription_period,
        })
    }

    pub fn n(&self) -> usize {
        self.series.len()
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn prescription_period(&self) -> usize {
        self.prescription_period
    }

    pub fn series(&self) -> &[Vec<Option<usize>>] {
        &self.series
    }
}

/// Binary presence-absence matrix over species x regions, with region adjacency.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PresenceAbsenceData {
    /// `matrix[i][r]` = species i present in region r.
    matrix: Vec<Vec<bool>>,
    /// Symmetric, irreflexive adjacency over regions.
    neighbors: Vec<BTreeSet<usize>>,
    species_names: Vec<String>,
    region_names: Vec<String>,
}

impl PresenceAbsenceData {
    pub fn new(
        matrix: Vec<Vec<bool>>,
        neighbor_pairs: &[(usize, usize)],
        species_names: Vec<String>,
        region_names: Vec<String>,
    ) -> Result<Self> {
        if matrix.is_empty() {
            return Err(Error::data("at least one species required"));
        }
        let n_regions = region_names.len();
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n_regions {
                return Err(Error::data(format!(
                    "species {}: expected {} regions, got {}",
                    i,
                    n_regions,
                    row.len()
                )));
            }
            if !row.iter().any(|&b| b) {
                return Err(Error::data(format!(
                    "species '{}' has zero presences",
                    species_names.get(i).map(String::as_str).unwrap_or("?")
                )));
            }
        }
        if species_names.len() != matrix.len() {
            return Err(Error::data("species name count mismatch"));
        }
        let mut neighbors = vec![BTreeSet::new(); n_regions];
        for &(a, b) in neighbor_pairs {
            if a >= n_regions || b >= n_regions {
                return Err(Error::data(format!(
                    "neighbor pair ({}, {}) out of region range",
                    a, b
                )));
            }
            if a == b {
                return Err(Error::data(format!(
                    "irreflexive adjacency required, got self-pair ({}, {})",
                    a, b
                )));
            }
            neighbors[a].insert(b);
            neighbors[b].insert(a);
        }
        Ok(PresenceAbsenceData {
            matrix,
            neighbors,
            species_names,
            region_names,
        })
    }

    pub fn n_species(&self) -> usize {
        self.matrix.len()
    }

    pub fn n_regions(&self) -> usize {
        self.region_names.len()
    }

    pub fn present(&self, species: usize, region: usize) -> bool {
        self.matrix[species][region]
    }

    /// Region indexes occupied by a species, ascending.
    pub fn range_of(&self, species: usize) -> Vec<usize> {
        self.matrix[species]
            .iter()
            .enumerate()
            .filter_map(|(r, &b)| if b { Some(r) } else { None })
            .collect()
    }

    pub fn neighbors(&self) -> &[BTreeSet<usize>] {
        &self.neighbors
    }

    pub fn are_neighbors(&self, a: usize, b: usize) -> bool {
        self.neighbors[a].contains(&b)
    }

    pub fn species_names(&self) -> &[String] {
        &self.species_names
    }

    pub fn region_names(&self) -> &[String] {
        &self.region_names
    }
}

/// Symmetric n x n dissimilarity matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DissimilarityMatrix {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::data("dissimilarity matrix: wrong value count"));
        }
        let m = DissimilarityMatrix { n, values };
        for i in 0..n {
            if m.get(i, i) != 0.0 {
                return Err(Error::data("dissimilarity matrix: nonzero diagonal"));
            }
            for j in 0..i {
                let d = m.get(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::data(
                        "dissimilarity matrix: entries must be finite and >= 0",
                    ));
                }
                if d != m.get(j, i) {
                    return Err(Error::data("dissimilarity matrix: asymmetric"));
                }
            }
        }
        Ok(m)
    }

    /// Build from a function over index pairs i < j; symmetry and zero
    /// diagonal hold by construction.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = f(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::numeric(format!(
                        "dissimilarity({}, {}) = {} is not a valid distance",
                        i, j, d
                    )));
                }
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Ok(DissimilarityMatrix { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Submatrix restricted to the given objects, in their given order.
    pub fn restrict(&self, idx: &[usize]) -> DissimilarityMatrix {
        let m = idx.len();
        let mut values = vec![0.0; m * m];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                values[a * m + b] = self.get(i, j);
            }
        }
        DissimilarityMatrix { n: m, values }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format!("{}", self.get(i, j))).collect();
            w.write_record(&row)
                .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        }
        w.flush()
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(())
    }
}

/// Cluster assignment of n objects to clusters 1..=k, optionally with a noise group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    /// `labels[i]` is `Some(c)` with c in 0..k, or `None` for noise.
    labels: Vec<Option<usize>>,
    k: usize,
    medoids: Option<Vec<usize>>,
}

impl Partition {
    pub fn new(labels: Vec<Option<usize>>, k: usize, medoids: Option<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; k];
        for (i, l) in labels.iter().enumerate() {
            if let Some(c) = l {
                if *c >= k {
                    return Err(Error::data(format!(
                        "object {}: cluster label {} out of range 0..{}",
                        i, c, k
                    )));
                }
                seen[*c] = true;
            }
        }
        if let Some(c) = seen.iter().position(|&s| !s) {
            return Err(Error::data(format!("cluster {} is empty", c)));
        }
        if let Some(meds) = &medoids {
            if meds.len() != k {
                return Err(Error::data("medoid count must equal k"));
            }
            for (c, &m) in meds.iter().enumerate() {
                if m >= labels.len() || labels[m] != Some(c) {
                    return Err(Error::data(format!(
                        "medoid {} of cluster {} does not carry its own label",
                        m, c
                    )));
                }
            }
        }
        Ok(Partition { labels, k, medoids })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn label(&self, i: usize) -> Option<usize> {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn medoids(&self) -> Option<&[usize]> {
        self.medoids.as_deref()
    }

    /// Members of each cluster, noise excluded.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, l) in self.labels.iter().enumerate() {
            if let Some(c) = l {
                out[*c].push(i);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// File ingestion
// ---------------------------------------------------------------------------

/// Read a variable schema from a TOML sidecar file with `[[variable]]` tables.
pub fn read_schema(path: &Path) -> Result<Vec<VariableSpec>> {
    #[derive(Deserialize)]
    struct SchemaFile {
        variable: Vec<VariableSpec>,
    }
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let parsed: SchemaFile =
        toml::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    for spec in &parsed.variable {
        spec.validate()?;
    }
    Ok(parsed.variable)
}

/// Read a mixed-type CSV (header row matching the schema names) into a dataset.
pub fn read_mixed_csv(path: &Path, schema: &[VariableSpec]) -> Result<MixedDataset> {
    let p = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::parse(p.clone(), e.to_string()))?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(p.clone(), e.to_string()))?
        .clone();
    if headers.len() != schema.len() {
        return Err(Error::parse(
            p,
            format!("header has {} columns, schema has {}", headers.len(), schema.len()),
        ));
    }
    for (h, spec) in headers.iter().zip(schema) {
        if h != spec.name {
            return Err(Error::parse(
                p,
                format!("header column '{}' does not match schema name '{}'", h, spec.name),
            ));
        }
    }
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::parse(p.clone(), e.to_string()))?;
        if record.len() != schema.len() {
            return Err(Error::parse(p, format!("row {}: length mismatch", i + 1)));
        }
        let mut row = Vec::with_capacity(schema.len());
        for (cell, spec) in record.iter().zip(schema) {
            let value = match spec.kind {
                VarKind::Continuous => {
                    let x: f64 = cell.trim().parse().map_err(|_| {
                        Error::parse(
                            p.clone(),
                            format!("row {}: non-numeric value '{}' in '{}'", i + 1, cell, spec.name),
                        )
                    })?;
                    Value::Real(x)
                }
                _ => {
                    let g = spec.levels.iter().position(|l| l == cell.trim()).ok_or_else(|| {
                        Error::parse(
                            p.clone(),
                            format!("row {}: unknown level '{}' for '{}'", i + 1, cell, spec.name),
                        )
                    })?;
                    Value::Level(g)
                }
            };
            row.push(value);
        }
        rows.push(row);
    }
    MixedDataset::new(schema.to_vec(), rows)
}

/// Write a mixed-type dataset as CSV using its schema's level labels.
pub fn write_mixed_csv(data: &MixedDataset, path: &Path) -> Result<()> {
    let p = path.display().to_string();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(p.clone(), e.to_string()))?;
    let header: Vec<&str> = data.specs().iter().map(|s| s.name.as_str()).collect();
    w.write_record(&header)
        .map_err(|e| Error::parse(p.clone(), e.to_string()))?;
    for row in data.rows() {
        let rec: Vec<String> = row
            .iter()
            .zip(data.specs())
            .map(|(v, spec)| match v {
                Value::Real(x) => format!("{}", x),
                Value::Level(g) => spec.levels[*g].clone(),
            })
            .collect();
        w.write_record(&rec)
            .map_err(|e| Error::parse(p.clone(), e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(p, e))?;
    Ok(())
}

/// Read a categorical-series CSV: one row per series, T cells over 1..=h or "NA".
pub fn read_series_csv(
    path: &Path,
    t_len: usize,
    h: usize,
    prescription_period: usize,
) -> Result<CategoricalSeriesDataset> {
    let p = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::parse(p.clone(), e.to_string()))?;
    let mut series = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::parse(p.clone(), e.to_string()))?;
        if record.len() != t_len {
            return Err(Error::parse(
                p,
                format!("series {}: length mismatch ({} vs {})", i + 1, record.len(), t_len),
            ));
        }
        let mut s = Vec::with_capacity(t_len);
        for (t, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if cell.eq_ignore_ascii_case("NA") {
                s.push(None);
            } else {
                let c: usize = cell.parse().map_err(|_| {
                    Error::parse(
                        p.clone(),
                        format!("series {}, day {}: invalid cell '{}'", i + 1, t + 1, cell),
                    )
                })?;
                if c < 1 || c > h {
                    return Err(Error::parse(
                        p,
                        format!("series {}, day {}: category {} out of range 1..={}", i + 1, t + 1, c, h),
                    ));
                }
                s.push(Some(c));
            }
        }
        series.push(s);
    }
    CategoricalSeriesDataset::new(series, h, prescription_period)
}

/// Write a categorical-series dataset as CSV with "NA" for missing days.
pub fn write_series_csv(data: &CategoricalSeriesDataset, path: &Path) -> Result<()> {
    let p = path.display().to_string();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(p.clone(), e.to_string()))?;
    for s in data.series() {
        let rec: Vec<String> = s
            .iter()
            .map(|v| match v {
                Some(c) => format!("{}", c),
                None => "NA".to_string(),
            })
            .collect();
        w.write_record(&rec)
            .map_err(|e| Error::parse(p.clone(), e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(p, e))?;
    Ok(())
}

/// Read a presence-absence matrix (header row of region names, first column
/// species name, cells 0/1) together with a "regionA,regionB" neighbor file.
///
/// Pairs are undirected; duplicate declarations (either order) are reported
/// in the returned warnings.
pub fn read_presence_absence(
    matrix_path: &Path,
    neighbors_path: &Path,
) -> Result<(PresenceAbsenceData, Vec<String>)> {
    let p = matrix_path.display().to_string();
    let mut rdr =
        csv::Reader::from_path(matrix_path).map_err(|e| Error::parse(p.clone(), e.to_string()))?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(p.clone(), e.to_string()))?
        .clone();
    if headers.len() < 2 {
        return Err(Error::parse(p, "expected species column plus region columns"));
    }
    let region_names: Vec<String> = headers.iter().skip(1).map(|s| s.to_string()).collect();
    let mut species_names = Vec::new();
    let mut matrix = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::parse(p.clone(), e.to_string()))?;
        if record.len() != region_names.len() + 1 {
            return Err(Error::parse(p, format!("row {}: length mismatch", i + 1)));
        }
        species_names.push(record[0].to_string());
        let mut row = Vec::with_capacity(region_names.len());
        for cell in record.iter().skip(1) {
            match cell.trim() {
                "0" => row.push(false),
                "1" => row.push(true),
                other => {
                    return Err(Error::parse(
                        p,
                        format!("row {}: matrix entries must be 0 or 1, got '{}'", i + 1, other),
                    ))
                }
            }
        }
        matrix.push(row);
    }

    let np = neighbors_path.display().to_string();
    let text = std::fs::read_to_string(neighbors_path).map_err(|e| Error::io(np.clone(), e))?;
    let region_index = |name: &str| -> Result<usize> {
        region_names
            .iter()
            .position(|r| r == name)
            .ok_or_else(|| Error::parse(np.clone(), format!("unknown region '{}'", name)))
    };
    let mut pairs = Vec::new();
    let mut warnings = Vec::new();
    let mut declared = BTreeSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let a = parts.next().unwrap_or("").trim();
        let b = parts
            .next()
            .ok_or_else(|| Error::parse(np.clone(), format!("line {}: expected 'regionA,regionB'", lineno + 1)))?
            .trim();
        let ia = region_index(a)?;
        let ib = region_index(b)?;
        // Pairs are undirected; either order (and both) declares the same edge.
        if !declared.insert((ia.min(ib), ia.max(ib))) {
            warnings.push(format!(
                "line {}: neighbor pair ({}, {}) declared more than once",
                lineno + 1,
                region_names[ia],
                region_names[ib]
            ));
        }
        pairs.push((ia, ib));
    }
    let data = PresenceAbsenceData::new(matrix, &pairs, species_names, region_names)?;
    Ok((data, warnings))
}

/// Write a presence-absence matrix in the format `read_presence_absence` expects.
pub fn write_presence_absence(data: &PresenceAbsenceData, path: &Path) -> Result<()> {
    let p = path.display().to_string();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(p.clone(), e.to_string()))?;
    let mut header = vec!["species".to_string()];
    header.extend(data.region_names().iter().cloned());
    w.write_record(&header)
        .map_err(|e| Error::parse(p.clone(), e.to_string()))?;
    for i in 0..data.n_species() {
        let mut rec = vec![data.species_names()[i].clone()];
        for r in 0..data.n_regions() {
            rec.push(if data.present(i, r) { "1" } else { "0" }.to_string());
        }
        w.write_record(&rec)
            .map_err(|e| Error::parse(p.clone(), e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(p, e))?;
    Ok(())
}

/// Write the neighbor list in the format `read_presence_absence` expects.
pub fn write_neighbors(data: &PresenceAbsenceData, path: &Path) -> Result<()> {
    let mut out = String::new();
    for (a, nb) in data.neighbors().iter().enumerate() {
        for &b in nb {
            if a < b {
                out.push_str(&format!(
                    "{},{}\n",
                    data.region_names()[a],
                    data.region_names()[b]
                ));
            }
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn demo_schema() -> Vec<VariableSpec> {
        vec![
            VariableSpec::continuous("income", 1.0),
            VariableSpec::categorical(
                "housing",
                VarKind::Nominal,
                &["owns", "rents", "coop", "condo", "townhouse", "tenancy", "part", "none", "na"],
                1.0,
            ),
        ]
    }

    #[test]
    fn mixed_csv_round_trip() {
        let schema = demo_schema();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "income,housing").unwrap();
        writeln!(f, "1.5,owns").unwrap();
        writeln!(f, "2.5,rents").unwrap();
        writeln!(f, "3.5,coop").unwrap();
        drop(f);
        let data = read_mixed_csv(&path, &schema).unwrap();
        assert_eq!(data.n(), 3);
        assert_eq!(data.p(), 2);
        let back = dir.path().join("back.csv");
        write_mixed_csv(&data, &back).unwrap();
        let data2 = read_mixed_csv(&back, &schema).unwrap();
        assert_eq!(data.rows(), data2.rows());
    }

    #[test]
    fn mixed_csv_unknown_level() {
        let schema = vec![
            VariableSpec::continuous("income", 1.0),
            VariableSpec::categorical("housing", VarKind::Nominal, &["owns", "rents"], 1.0),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        std::fs::write(&path, "income,housing\n1.0,owns\n2.0,condo\n").unwrap();
        let err = read_mixed_csv(&path, &schema).unwrap_err();
        assert!(err.to_string().contains("unknown level"));
    }

    #[test]
    fn mixed_csv_too_few_rows() {
        let schema = vec![VariableSpec::continuous("x", 1.0)];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        std::fs::write(&path, "x\n").unwrap();
        let err = read_mixed_csv(&path, &schema).unwrap_err();
        assert!(err.to_string().contains("n >= 2"));
    }

    #[test]
    fn series_csv_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        let row: Vec<String> = (0..180)
            .map(|t| {
                if t % 13 == 5 {
                    "NA".to_string()
                } else {
                    format!("{}", t % 6 + 1)
                }
            })
            .collect();
        std::fs::write(&path, format!("{}\n{}\n", row.join(","), row.join(","))).unwrap();
        let data = read_series_csv(&path, 180, 6, 7).unwrap();
        assert_eq!(data.n(), 2);
        assert_eq!(data.t_len(), 180);
        let back = dir.path().join("back.csv");
        write_series_csv(&data, &back).unwrap();
        let data2 = read_series_csv(&back, 180, 6, 7).unwrap();
        assert_eq!(data.series(), data2.series());

        std::fs::write(&path, "1,2\n1,7\n").unwrap();
        let err = read_series_csv(&path, 2, 6, 7).unwrap_err();
        assert!(err.to_string().contains("out of range"));

        std::fs::write(&path, "1,2\n1,2,3\n").unwrap();
        let err = read_series_csv(&path, 2, 6, 7).unwrap_err();
        assert!(err.to_string().contains("length mismatch"));
    }

    #[test]
    fn presence_absence_rejects_empty_species_and_self_pairs() {
        let names = vec!["a".into(), "b".into()];
        let regions = vec!["r1".into(), "r2".into()];
        let err = PresenceAbsenceData::new(
            vec![vec![true, false], vec![false, false]],
            &[],
            names.clone(),
            regions.clone(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("zero presences"));

        let err = PresenceAbsenceData::new(
            vec![vec![true, false], vec![false, true]],
            &[(1, 1)],
            names,
            regions,
        )
        .unwrap_err();
        assert!(err.to_string().contains("irreflexive"));
    }

    #[test]
    fn presence_absence_neighbors_undirected() {
        let dir = tempfile::tempdir().unwrap();
        let mp = dir.path().join("m.csv");
        let np = dir.path().join("n.csv");
        std::fs::write(&mp, "species,r1,r2,r3\ns1,1,0,1\ns2,0,1,1\n").unwrap();
        std::fs::write(&np, "r1,r2\n").unwrap();
        let (data, warnings) = read_presence_absence(&mp, &np).unwrap();
        assert!(data.are_neighbors(0, 1));
        assert!(data.are_neighbors(1, 0));
        assert!(warnings.is_empty());

        // Declaring the same edge twice (in either order) is flagged.
        std::fs::write(&np, "r1,r2\nr2,r1\n").unwrap();
        let (data, warnings) = read_presence_absence(&mp, &np).unwrap();
        assert!(data.are_neighbors(0, 1));
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn dissimilarity_invariants() {
        let err = DissimilarityMatrix::new(2, vec![0.0, 1.0, 2.0, 0.0]).unwrap_err();
        assert!(err.to_string().contains("asymmetric"));
        let err = DissimilarityMatrix::new(2, vec![0.5, 1.0, 1.0, 0.0]).unwrap_err();
        assert!(err.to_string().contains("diagonal"));
        let m = DissimilarityMatrix::from_fn(3, |i, j| (i + j) as f64).unwrap();
        assert_eq!(m.get(0, 2), m.get(2, 0));
    }

    #[test]
    fn partition_invariants() {
        let err = Partition::new(vec![Some(0), Some(0), Some(0)], 2, None).unwrap_err();
        assert!(err.to_string().contains("empty"));
        let err =
            Partition::new(vec![Some(0), Some(1)], 2, Some(vec![0, 0])).unwrap_err();
        assert!(err.to_string().contains("medoid"));
        let p = Partition::new(vec![Some(0), Some(1), None], 2, Some(vec![0, 1])).unwrap();
        assert_eq!(p.clusters(), vec![vec![0], vec![1]]);
    }
}
