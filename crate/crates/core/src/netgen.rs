//! Base-2 digital nets: generating matrices, randomization, and point generation.
//!
//! A randomized net holds, for every coordinate `j`, an `E x m` matrix `C_j`
//! and an `E`-bit digital shift `D_j`. Point `i` has digits
//! `x_ij = C_j i + D_j (mod 2)`, where `i` is read as the vector of its `m`
//! binary digits, least significant first.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2linalg::{self, BitMatrix, BitVector};
use crate::streams::SeedRecord;

/// Widest supported precision; one fixed-point machine word.
pub const MAX_PRECISION: u32 = 64;

/// Default number of output digits per coordinate.
pub const DEFAULT_PRECISION: u32 = 64;

/// Largest `m` accepted from direction-number files.
pub const MAX_DIRECTION_BITS: u32 = 32;

/// Direction numbers for the first eight dimensions (dimension 1 is implicit).
pub const BUILTIN_DIRECTIONS: &str = include_str!("../data/new-joe-kuo-6.8.txt");

/// A point coordinate truncated to `precision` binary digits.
///
/// Digit `l` (the coefficient of `2^-l`) is stored at bit `64 - l` of `word`,
/// so `word / 2^64` is the represented value. Digits past `precision` are zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FixedPoint {
    word: u64,
    precision: u32,
}

impl FixedPoint {
    pub fn new(word: u64, precision: u32) -> Self {
        assert!(
            (1..=MAX_PRECISION).contains(&precision),
            "precision {precision} outside 1..=64"
        );
        let keep = if precision == 64 {
            u64::MAX
        } else {
            !(u64::MAX >> precision)
        };
        Self {
            word: word & keep,
            precision,
        }
    }

    /// Point whose set digits are exactly `positions` (1-based).
    pub fn from_positions(positions: &[u32], precision: u32) -> Self {
        let word = positions
            .iter()
            .map(|&l| {
                assert!((1..=precision).contains(&l), "digit {l} beyond precision");
                1u64 << (64 - l)
            })
            .fold(0, |a, b| a | b);
        Self::new(word, precision)
    }

    #[inline]
    pub fn word(&self) -> u64 {
        self.word
    }

    #[inline]
    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Digit `l` (1-based).
    #[inline]
    pub fn digit(&self, l: u32) -> bool {
        debug_assert!((1..=64).contains(&l));
        (self.word >> (64 - l)) & 1 == 1
    }

    /// Digits repacked so that bit `l - 1` holds digit `l`, matching the
    /// layout of a [`crate::kindex::KIndex`] coordinate.
    #[inline]
    pub fn digits_lsb_first(&self) -> u64 {
        self.word.reverse_bits()
    }

    /// Value in `[0, 1)`, truncated toward zero to fit an `f64`.
    #[inline]
    pub fn to_unit(&self) -> f64 {
        word_to_unit(self.word)
    }
}

impl fmt::Debug for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FixedPoint({:#018x}/{})", self.word, self.precision)
    }
}

/// Converts a 64-bit fraction to `f64`, dropping digits below the 53-bit
/// mantissa instead of rounding (rounding could produce 1.0).
#[inline]
pub fn word_to_unit(word: u64) -> f64 {
    const SCALE: f64 = 1.0 / 18_446_744_073_709_551_616.0; // 2^-64
    if word == 0 {
        return 0.0;
    }
    let significant = 64 - word.leading_zeros();
    let truncated = if significant > 53 {
        word & !((1u64 << (significant - 53)) - 1)
    } else {
        word
    };
    truncated as f64 * SCALE
}

/// Splits a word into its truncated `f64` value and the remainder carried by
/// the digits below the 53-bit mantissa, so `hi + lo` equals the word exactly.
pub fn word_split(word: u64) -> (f64, f64) {
    const SCALE: f64 = 1.0 / 18_446_744_073_709_551_616.0; // 2^-64
    let hi = word_to_unit(word);
    let rest = word - (hi / SCALE) as u64;
    (hi, rest as f64 * SCALE)
}

/// One row of a direction-number file: `d s a m_1 .. m_s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionEntry {
    pub dimension: usize,
    pub degree: u32,
    pub coefficients: u64,
    pub initial: Vec<u64>,
    pub line: usize,
}

/// Parses the whitespace-separated direction-number layout. A first line that
/// is not numeric is treated as the header; blank lines and `#` comments are skipped.
pub fn parse_direction_numbers(text: &str) -> Result<Vec<DirectionEntry>> {
    let mut entries = Vec::new();
    let mut seen_data = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let parsed: std::result::Result<Vec<u64>, _> =
            fields.iter().map(|f| f.parse::<u64>()).collect();
        let nums = match parsed {
            Ok(n) => n,
            Err(_) if !seen_data && entries.is_empty() => continue,
            Err(e) => {
                return Err(Error::Ingest {
                    line,
                    message: format!("non-numeric field: {e}"),
                })
            }
        };
        seen_data = true;
        if nums.len() < 4 {
            return Err(Error::Ingest {
                line,
                message: format!("expected `d s a m_1 .. m_s`, found {} fields", nums.len()),
            });
        }
        let (dimension, degree, coefficients) = (nums[0] as usize, nums[1], nums[2]);
        let initial = nums[3..].to_vec();
        if degree == 0 || initial.len() as u64 != degree {
            return Err(Error::Ingest {
                line,
                message: format!(
                    "degree {degree} but {} initial direction numbers",
                    initial.len()
                ),
            });
        }
        let expected_dim = entries.len() + 2;
        if dimension != expected_dim {
            return Err(Error::Ingest {
                line,
                message: format!("expected dimension {expected_dim}, found {dimension}"),
            });
        }
        if degree >= 64 || coefficients >> (degree - 1) != 0 {
            return Err(Error::Ingest {
                line,
                message: format!("coefficient word {coefficients} too wide for degree {degree}"),
            });
        }
        for (c, &mc) in initial.iter().enumerate() {
            let c = c as u32 + 1;
            if mc % 2 == 0 || mc >= 1 << c {
                return Err(Error::Ingest {
                    line,
                    message: format!(
                        "m_{c} = {mc} must be odd and below 2^{c}; the matrix would be degenerate"
                    ),
                });
            }
        }
        entries.push(DirectionEntry {
            dimension,
            degree: degree as u32,
            coefficients,
            initial,
            line,
        });
    }
    Ok(entries)
}

/// Direction numbers `v_1..v_m` scaled so digit `l` sits at bit `64 - l`.
fn direction_words(entry: &DirectionEntry, m: usize) -> Vec<u64> {
    let deg = entry.degree as usize;
    let mut v = vec![0u64; m];
    for (c, (slot, &init)) in v.iter_mut().zip(&entry.initial).take(deg).enumerate() {
        *slot = init << (63 - c);
    }
    for c in deg..m {
        let mut next = v[c - deg] ^ (v[c - deg] >> deg);
        for k in 1..deg {
            if (entry.coefficients >> (deg - 1 - k)) & 1 == 1 {
                next ^= v[c - k];
            }
        }
        v[c] = next;
    }
    v
}

/// Matrix with entry `(l, c)` equal to digit `l` of direction number `v_c`.
fn matrix_from_directions(words: &[u64]) -> BitMatrix {
    let m = words.len();
    let rows: Vec<u64> = (0..m)
        .map(|r| {
            words
                .iter()
                .enumerate()
                .filter(|(_, &w)| (w >> (63 - r)) & 1 == 1)
                .fold(0u64, |acc, (c, _)| acc | 1 << c)
        })
        .collect();
    BitMatrix::from_row_words(m, &rows).expect("m >= 1")
}

/// The fixed `m x m` generating matrices of an unrandomized net.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratingMatrices {
    s: usize,
    m: usize,
    mats: Vec<BitMatrix>,
    nonsingular: Vec<bool>,
    provenance: String,
}

impl GeneratingMatrices {
    pub fn new(mats: Vec<BitMatrix>, provenance: impl Into<String>) -> Result<Self> {
        let m = mats
            .first()
            .map(BitMatrix::rows)
            .ok_or_else(|| Error::invalid("need at least one generating matrix"))?;
        if m > 64 {
            return Err(Error::invalid("generating matrices are limited to m <= 64"));
        }
        for c in &mats {
            if c.rows() != m || c.cols() != m {
                return Err(Error::invalid(format!(
                    "generating matrices must all be {m}x{m}, found {}x{}",
                    c.rows(),
                    c.cols()
                )));
            }
        }
        let nonsingular = mats.iter().map(BitMatrix::is_nonsingular).collect();
        Ok(Self {
            s: mats.len(),
            m,
            mats,
            nonsingular,
            provenance: provenance.into(),
        })
    }

    /// `s` copies of the `m x m` identity (every coordinate a van der Corput net).
    pub fn identity(s: usize, m: usize) -> Result<Self> {
        let mats = (0..s)
            .map(|_| BitMatrix::identity(m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(mats, "identity")
    }

    /// Sobol' matrices from direction-number text; dimension 1 is the identity.
    pub fn from_direction_text(text: &str, s: usize, m: usize, provenance: &str) -> Result<Self> {
        if m == 0 || m as u32 > MAX_DIRECTION_BITS {
            return Err(Error::invalid(format!(
                "m = {m} outside 1..={MAX_DIRECTION_BITS} for direction-number nets"
            )));
        }
        if s == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        let entries = parse_direction_numbers(text)?;
        if s > entries.len() + 1 {
            return Err(Error::Ingest {
                line: text.lines().count() + 1,
                message: format!(
                    "requested s = {s} but the file provides {} dimensions",
                    entries.len() + 1
                ),
            });
        }
        let mut mats = vec![BitMatrix::identity(m)?];
        for entry in &entries[..s - 1] {
            let mat = matrix_from_directions(&direction_words(entry, m));
            if !mat.is_nonsingular() {
                return Err(Error::Ingest {
                    line: entry.line,
                    message: "generating matrix is singular".into(),
                });
            }
            mats.push(mat);
        }
        Self::new(mats, provenance.to_string())
    }

    pub fn builtin(s: usize, m: usize) -> Result<Self> {
        Self::from_direction_text(BUILTIN_DIRECTIONS, s, m, "builtin new-joe-kuo-6 (8 dims)")
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.s
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn matrix(&self, j: usize) -> &BitMatrix {
        &self.mats[j]
    }

    pub fn nonsingular(&self) -> &[bool] {
        &self.nonsingular
    }

    pub fn all_nonsingular(&self) -> bool {
        self.nonsingular.iter().all(|&b| b)
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }
}

/// Loads Sobol' generating matrices from a direction-number file.
pub fn load_joe_kuo(path: impl AsRef<Path>, s: usize, m: usize) -> Result<GeneratingMatrices> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    GeneratingMatrices::from_direction_text(&text, s, m, &path.display().to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Shift,
    Rls,
    Crd,
}

impl SchemeKind {
    pub fn label(&self) -> &'static str {
        match self {
            SchemeKind::Shift => "shift",
            SchemeKind::Rls => "rls",
            SchemeKind::Crd => "crd",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "shift" | "shiftonly" | "shift-only" => Ok(SchemeKind::Shift),
            "rls" => Ok(SchemeKind::Rls),
            "crd" => Ok(SchemeKind::Crd),
            other => Err(Error::invalid(format!("unknown scheme `{other}`"))),
        }
    }
}

/// How the matrices `C_j` of a net are produced.
#[derive(Clone, Debug)]
pub enum ScrambleScheme {
    /// `C_j` is the generating matrix padded with zero rows; only the shift is random.
    ShiftOnly(Arc<GeneratingMatrices>),
    /// Random linear scrambling: `C_j = M_j * gen_j` with `M_j` unit lower-triangular.
    Rls(Arc<GeneratingMatrices>),
    /// Complete random design: every entry of `C_j` is a fair bit.
    Crd,
}

impl ScrambleScheme {
    pub fn kind(&self) -> SchemeKind {
        match self {
            ScrambleScheme::ShiftOnly(_) => SchemeKind::Shift,
            ScrambleScheme::Rls(_) => SchemeKind::Rls,
            ScrambleScheme::Crd => SchemeKind::Crd,
        }
    }

    pub fn generators(&self) -> Option<&GeneratingMatrices> {
        match self {
            ScrambleScheme::ShiftOnly(g) | ScrambleScheme::Rls(g) => Some(g),
            ScrambleScheme::Crd => None,
        }
    }
}

/// Where generating matrices come from.
#[derive(Clone, Debug)]
pub enum DirectionSource {
    /// The bundled direction numbers (8 dimensions).
    Builtin,
    /// Every coordinate uses the identity matrix.
    Identity,
    /// Direction-number file contents with a provenance label.
    Text { label: String, text: Arc<str> },
}

impl DirectionSource {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Ok(DirectionSource::Text {
            label: path.display().to_string(),
            text: std::fs::read_to_string(path)?.into(),
        })
    }

    pub fn label(&self) -> &str {
        match self {
            DirectionSource::Builtin => "builtin",
            DirectionSource::Identity => "identity",
            DirectionSource::Text { label, .. } => label,
        }
    }

    pub fn matrices(&self, s: usize, m: usize) -> Result<GeneratingMatrices> {
        match self {
            DirectionSource::Builtin => GeneratingMatrices::builtin(s, m),
            DirectionSource::Identity => GeneratingMatrices::identity(s, m),
            DirectionSource::Text { label, text } => {
                GeneratingMatrices::from_direction_text(text, s, m, label)
            }
        }
    }
}

/// Builds a [`ScrambleScheme`] for any `(s, m)`.
#[derive(Clone, Debug)]
pub struct SchemeFactory {
    pub kind: SchemeKind,
    pub source: DirectionSource,
}

impl SchemeFactory {
    pub fn new(kind: SchemeKind, source: DirectionSource) -> Self {
        Self { kind, source }
    }

    pub fn build(&self, s: usize, m: usize) -> Result<ScrambleScheme> {
        Ok(match self.kind {
            SchemeKind::Crd => ScrambleScheme::Crd,
            SchemeKind::Rls => ScrambleScheme::Rls(Arc::new(self.source.matrices(s, m)?)),
            SchemeKind::Shift => ScrambleScheme::ShiftOnly(Arc::new(self.source.matrices(s, m)?)),
        })
    }
}

/// A realized randomization of a digital net.
#[derive(Clone, Debug)]
pub struct RandomizedNet {
    s: usize,
    m: usize,
    e: usize,
    matrices: Vec<BitMatrix>,
    shifts: Vec<BitVector>,
    scheme: SchemeKind,
    seed: Option<SeedRecord>,
    /// `columns[j][c]`: column `c` of `C_j` as a fixed-point word.
    columns: Vec<Vec<u64>>,
    shift_words: Vec<u64>,
}

fn check_sizes(s: usize, m: usize, e: usize) -> Result<()> {
    if s == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if m == 0 || m > 63 {
        return Err(Error::invalid(format!("m = {m} outside 1..=63")));
    }
    if e < m {
        return Err(Error::invalid(format!(
            "precision E = {e} must be at least m = {m}"
        )));
    }
    if e > MAX_PRECISION as usize {
        return Err(Error::invalid(format!(
            "precision E = {e} exceeds the supported maximum {MAX_PRECISION}"
        )));
    }
    Ok(())
}

/// Draws a fresh randomization. Per coordinate, the stream is consumed as:
/// the matrix draw (none for shift-only), then `E` shift bits.
pub fn randomize<R: Rng + ?Sized>(
    scheme: &ScrambleScheme,
    s: usize,
    m: usize,
    e: usize,
    rng: &mut R,
) -> Result<RandomizedNet> {
    check_sizes(s, m, e)?;
    if let Some(g) = scheme.generators() {
        if g.dim() < s || g.m() != m {
            return Err(Error::invalid(format!(
                "scheme carries {} matrices of size {}x{}, requested s = {s}, m = {m}",
                g.dim(),
                g.m(),
                g.m()
            )));
        }
    }
    let mut matrices = Vec::with_capacity(s);
    let mut shifts = Vec::with_capacity(s);
    for j in 0..s {
        let c = match scheme {
            ScrambleScheme::ShiftOnly(g) => g.matrix(j).pad_rows(e)?,
            ScrambleScheme::Rls(g) => {
                let scramble = f2linalg::sample_lower_triangular(e, m, rng)?;
                f2linalg::mat_mul(&scramble, g.matrix(j))?
            }
            ScrambleScheme::Crd => BitMatrix::random(e, m, rng)?,
        };
        matrices.push(c);
        shifts.push(BitVector::random(e, rng));
    }
    RandomizedNet::from_parts(matrices, shifts, scheme.kind())
}

pub fn randomize_seeded(
    scheme: &ScrambleScheme,
    s: usize,
    m: usize,
    e: usize,
    seed: SeedRecord,
) -> Result<RandomizedNet> {
    let mut rng = seed.rng();
    let mut net = randomize(scheme, s, m, e, &mut rng)?;
    net.seed = Some(seed);
    Ok(net)
}

impl RandomizedNet {
    /// Assembles a net from explicit `E x m` matrices and `E`-bit shifts.
    pub fn from_parts(
        matrices: Vec<BitMatrix>,
        shifts: Vec<BitVector>,
        scheme: SchemeKind,
    ) -> Result<Self> {
        let s = matrices.len();
        if shifts.len() != s {
            return Err(Error::Dimension {
                op: "RandomizedNet::from_parts",
                expected: s,
                got: shifts.len(),
            });
        }
        let first = matrices
            .first()
            .ok_or_else(|| Error::invalid("need at least one coordinate"))?;
        let (e, m) = (first.rows(), first.cols());
        check_sizes(s, m, e)?;
        for (c, d) in matrices.iter().zip(&shifts) {
            if c.rows() != e || c.cols() != m || d.len() != e {
                return Err(Error::invalid(
                    "all matrices must be E x m and all shifts E bits long",
                ));
            }
        }
        let columns = matrices
            .iter()
            .map(|c| {
                let mut cols = vec![0u64; m];
                for l in 0..e {
                    let mut row = c.row_word(l);
                    while row != 0 {
                        let col = row.trailing_zeros() as usize;
                        row &= row - 1;
                        cols[col] |= 1 << (63 - l);
                    }
                }
                cols
            })
            .collect();
        let shift_words = shifts
            .iter()
            .map(|d| d.iter_ones().fold(0u64, |acc, l| acc | 1 << (63 - l)))
            .collect();
        Ok(Self {
            s,
            m,
            e,
            matrices,
            shifts,
            scheme,
            seed: None,
            columns,
            shift_words,
        })
    }

    /// Same matrices with every shift cleared: the plain net `x_ij = C_j i`.
    pub fn with_zero_shift(&self) -> Self {
        let shifts = vec![BitVector::zeros(self.e); self.s];
        let mut net =
            Self::from_parts(self.matrices.clone(), shifts, self.scheme).expect("shape unchanged");
        net.seed = self.seed;
        net
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.s
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn precision(&self) -> usize {
        self.e
    }

    #[inline]
    pub fn len(&self) -> usize {
        1 << self.m
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn matrix(&self, j: usize) -> &BitMatrix {
        &self.matrices[j]
    }

    pub fn shift(&self, j: usize) -> &BitVector {
        &self.shifts[j]
    }

    pub fn scheme(&self) -> SchemeKind {
        self.scheme
    }

    pub fn seed(&self) -> Option<SeedRecord> {
        self.seed
    }

    /// Row `l` (1-based) of `C_j` as an `m`-bit word.
    #[inline]
    pub fn row_word(&self, j: usize, l: u32) -> u64 {
        self.matrices[j].row_word(l as usize - 1)
    }

    /// Digit `l` (1-based) of `D_j`.
    #[inline]
    pub fn shift_digit(&self, j: usize, l: u32) -> bool {
        self.shifts[j].get(l as usize - 1)
    }

    #[inline]
    fn fill_words(&self, i: u64, out: &mut [u64]) {
        for (j, slot) in out.iter_mut().enumerate() {
            let mut acc = self.shift_words[j];
            let mut bits = i;
            while bits != 0 {
                let c = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                acc ^= self.columns[j][c];
            }
            *slot = acc;
        }
    }

    /// Point `i` as `s` fixed-point coordinates.
    pub fn point(&self, i: u64) -> Result<Vec<FixedPoint>> {
        if i >= self.len() as u64 {
            return Err(Error::invalid(format!(
                "point index {i} outside 0..{}",
                self.len()
            )));
        }
        let mut words = vec![0u64; self.s];
        self.fill_words(i, &mut words);
        Ok(words
            .into_iter()
            .map(|w| FixedPoint::new(w, self.e as u32))
            .collect())
    }

    /// Points `0..2^m` in natural order.
    pub fn points(&self) -> impl Iterator<Item = Vec<FixedPoint>> + '_ {
        (0..self.len() as u64).map(move |i| self.point(i).expect("index in range"))
    }

    /// Calls `visit(i, words)` for every point in natural order, where
    /// `words[j]` is coordinate `j` in [`FixedPoint`] layout.
    pub fn for_each_point_words(&self, mut visit: impl FnMut(u64, &[u64])) {
        let mut words = vec![0u64; self.s];
        for i in 0..self.len() as u64 {
            self.fill_words(i, &mut words);
            visit(i, &words);
        }
    }

    /// Same point multiset as [`Self::for_each_point_words`], visited in Gray-code
    /// order: the `n`-th visit is point `n ^ (n >> 1)`, obtained from the previous
    /// one with a single column XOR per coordinate.
    pub fn for_each_point_words_gray(&self, mut visit: impl FnMut(u64, &[u64])) {
        let mut words = self.shift_words.clone();
        visit(0, &words);
        for n in 1..self.len() as u64 {
            let c = n.trailing_zeros() as usize;
            for (w, cols) in words.iter_mut().zip(&self.columns) {
                *w ^= cols[c];
            }
            visit(n ^ (n >> 1), &words);
        }
    }

    pub fn dump(&self) -> NetDump {
        NetDump {
            s: self.s,
            m: self.m,
            e: self.e,
            scheme: self.scheme,
            seed: self.seed,
            matrices: self
                .matrices
                .iter()
                .map(|c| {
                    (0..c.rows())
                        .map(|r| format!("{:0w$x}", c.row_word(r), w = self.m.div_ceil(4)))
                        .collect()
                })
                .collect(),
            shifts: self
                .shifts
                .iter()
                .map(|d| format!("{:0w$x}", d.as_word(), w = self.e.div_ceil(4)))
                .collect(),
        }
    }

    pub fn from_dump(dump: &NetDump) -> Result<Self> {
        let parse = |h: &str| {
            u64::from_str_radix(h, 16).map_err(|e| Error::invalid(format!("bad hex `{h}`: {e}")))
        };
        let matrices = dump
            .matrices
            .iter()
            .map(|rows| {
                let words = rows.iter().map(|h| parse(h)).collect::<Result<Vec<_>>>()?;
                BitMatrix::from_row_words(dump.m, &words)
            })
            .collect::<Result<Vec<_>>>()?;
        let shifts = dump
            .shifts
            .iter()
            .map(|h| Ok(BitVector::from_word(dump.e, parse(h)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut net = Self::from_parts(matrices, shifts, dump.scheme)?;
        if net.s != dump.s || net.m != dump.m || net.e != dump.e {
            return Err(Error::invalid("dump header disagrees with its matrices"));
        }
        net.seed = dump.seed;
        Ok(net)
    }
}

/// Debug serialization of a net. Each row of `C_j` is the hex of its `m`-bit
/// word (bit `c` = column `c + 1`); each shift is the hex of its `E`-bit word
/// (bit `l - 1` = digit `l`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetDump {
    pub s: usize,
    pub m: usize,
    #[serde(rename = "E")]
    pub e: usize,
    pub scheme: SchemeKind,
    pub seed: Option<SeedRecord>,
    pub matrices: Vec<Vec<String>>,
    pub shifts: Vec<String>,
}

/// Uniform draw from the `E`-bit dyadic grid; the single point of a net with `m = 0`.
pub fn random_grid_point<R: Rng + ?Sized>(e: u32, rng: &mut R) -> FixedPoint {
    FixedPoint::new(rng.random::<u64>(), e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::stream_rng;

    fn identity_net(m: usize, e: usize) -> RandomizedNet {
        let g = Arc::new(GeneratingMatrices::identity(1, m).unwrap());
        let mut rng = stream_rng(0, 0);
        randomize(&ScrambleScheme::ShiftOnly(g), 1, m, e, &mut rng)
            .unwrap()
            .with_zero_shift()
    }

    #[test]
    fn unit_conversion() {
        assert_eq!(FixedPoint::new(0, 64).to_unit(), 0.0);
        assert_eq!(FixedPoint::from_positions(&[1], 8).to_unit(), 0.5);
        assert_eq!(FixedPoint::from_positions(&[2, 3], 8).to_unit(), 0.375);
        // All 64 digits set must stay below 1 after conversion.
        let top = FixedPoint::new(u64::MAX, 64).to_unit();
        assert!(top < 1.0);
        assert_eq!(top, 1.0 - 2f64.powi(-53));
        // Truncation, not rounding: 1/2 + 2^-60 -> 1/2.
        assert_eq!(word_to_unit((1 << 63) | (1 << 4)), 0.5);
        assert_eq!(word_split((1 << 63) | (1 << 4)), (0.5, 2f64.powi(-60)));
        assert_eq!(word_split(u64::MAX).1, 2f64.powi(-53) - 2f64.powi(-64));
        assert_eq!(word_split(12345), (12345.0 * 2f64.powi(-64), 0.0));
    }

    #[test]
    fn precision_masks_digits() {
        let x = FixedPoint::new(u64::MAX, 3);
        assert_eq!(x.to_unit(), 0.875);
        assert!(x.digit(3) && !x.digit(4));
        assert_eq!(x.digits_lsb_first(), 0b111);
    }

    #[test]
    fn radical_inverse_points() {
        let net = identity_net(2, 8);
        let xs: Vec<f64> = net.points().map(|p| p[0].to_unit()).collect();
        assert_eq!(xs, vec![0.0, 0.5, 0.25, 0.75]);
    }

    #[test]
    fn origin_without_shift() {
        let mut rng = stream_rng(1, 0);
        let net = randomize(&ScrambleScheme::Crd, 3, 5, 20, &mut rng)
            .unwrap()
            .with_zero_shift();
        assert!(net.point(0).unwrap().iter().all(|x| x.word() == 0));
        assert!(net.point(32).is_err());
    }

    #[test]
    fn builtin_matrices_are_upper_unitriangular() {
        let g = GeneratingMatrices::builtin(8, 20).unwrap();
        assert_eq!(g.matrix(0), &BitMatrix::identity(20).unwrap());
        for j in 0..8 {
            let c = g.matrix(j);
            for r in 0..20 {
                assert!(c.get(r, r));
                for col in 0..r {
                    assert!(!c.get(r, col), "dim {j} entry ({r},{col})");
                }
            }
            assert_eq!(c.rank(), 20);
        }
        assert!(g.all_nonsingular());
    }

    #[test]
    fn sobol_dimension_two_values() {
        // Dimension 2 has direction numbers 1/2, 3/4, 5/8; point i is the XOR
        // of those selected by the bits of i.
        let g = Arc::new(GeneratingMatrices::builtin(2, 3).unwrap());
        let mut rng = stream_rng(0, 0);
        let net = randomize(&ScrambleScheme::ShiftOnly(g), 2, 3, 3, &mut rng)
            .unwrap()
            .with_zero_shift();
        let xs: Vec<f64> = net.points().map(|p| p[1].to_unit()).collect();
        assert_eq!(xs, vec![0.0, 0.5, 0.75, 0.25, 0.625, 0.125, 0.375, 0.875]);
    }

    #[test]
    fn first_sixteen_points_form_a_net() {
        let g = Arc::new(GeneratingMatrices::builtin(2, 4).unwrap());
        let mut rng = stream_rng(0, 0);
        let net = randomize(&ScrambleScheme::ShiftOnly(g), 2, 4, 32, &mut rng)
            .unwrap()
            .with_zero_shift();
        let pts: Vec<(f64, f64)> = net
            .points()
            .map(|p| (p[0].to_unit(), p[1].to_unit()))
            .collect();
        // Every elementary box of volume 1/16 holds exactly one point.
        for (a, b) in [(4u32, 0u32), (3, 1), (2, 2), (1, 3), (0, 4)] {
            let (wa, wb) = (1 << a, 1 << b);
            let mut counts = vec![0; 16];
            for &(x, y) in &pts {
                let cell = (x * wa as f64) as usize * wb + (y * wb as f64) as usize;
                counts[cell] += 1;
            }
            assert!(counts.iter().all(|&c| c == 1), "box {a},{b}: {counts:?}");
        }
    }

    #[test]
    fn parser_reports_lines() {
        let bad = "d s a m\n2 1 0 1\n3 2 1 1 2\n";
        match parse_direction_numbers(bad) {
            Err(Error::Ingest { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let short = "d s a m\n2 1 0\n";
        assert!(matches!(
            parse_direction_numbers(short),
            Err(Error::Ingest { line: 2, .. })
        ));
        let garbage = "d s a m\n2 1 0 1\nx y z\n";
        assert!(matches!(
            parse_direction_numbers(garbage),
            Err(Error::Ingest { line: 3, .. })
        ));
        assert!(matches!(
            GeneratingMatrices::builtin(9, 4),
            Err(Error::Ingest { .. })
        ));
        assert!(GeneratingMatrices::builtin(2, 33).is_err());
    }

    #[test]
    fn rls_top_block_nonsingular() {
        let g = Arc::new(GeneratingMatrices::builtin(4, 8).unwrap());
        let scheme = ScrambleScheme::Rls(g);
        let mut rng = stream_rng(2, 0);
        for _ in 0..50 {
            let net = randomize(&scheme, 4, 8, 32, &mut rng).unwrap();
            for j in 0..4 {
                let top: Vec<u64> = (1..=8).map(|l| net.row_word(j, l)).collect();
                assert!(BitMatrix::from_row_words(8, &top).unwrap().is_nonsingular());
            }
        }
    }

    #[test]
    fn crd_row_pattern_frequency() {
        let mut rng = stream_rng(3, 0);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| {
                let net = randomize(&ScrambleScheme::Crd, 1, 8, 8, &mut rng).unwrap();
                net.row_word(0, 5) == 0b1011_0010
            })
            .count() as f64;
        let p = 2f64.powi(-8);
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((hits - trials as f64 * p).abs() <= 4.0 * sd, "{hits}");
    }

    #[test]
    fn leading_digits_are_a_permutation() {
        let g = Arc::new(GeneratingMatrices::builtin(3, 10).unwrap());
        let mut rng = stream_rng(4, 0);
        for scheme in [ScrambleScheme::Rls(g.clone()), ScrambleScheme::ShiftOnly(g)] {
            for m in [1usize, 4, 10] {
                let gm = Arc::new(GeneratingMatrices::builtin(3, m).unwrap());
                let scheme = match &scheme {
                    ScrambleScheme::Rls(_) => ScrambleScheme::Rls(gm),
                    _ => ScrambleScheme::ShiftOnly(gm),
                };
                let net = randomize(&scheme, 3, m, 40, &mut rng).unwrap();
                for j in 0..3 {
                    let mut lead: Vec<u64> =
                        net.points().map(|p| p[j].word() >> (64 - m)).collect();
                    lead.sort_unstable();
                    assert_eq!(lead, (0..1u64 << m).collect::<Vec<_>>());
                }
            }
        }
    }

    #[test]
    fn gray_order_same_multiset() {
        let g = Arc::new(GeneratingMatrices::builtin(3, 8).unwrap());
        let mut rng = stream_rng(5, 0);
        let net = randomize(&ScrambleScheme::Rls(g), 3, 8, 64, &mut rng).unwrap();
        let mut natural = Vec::new();
        net.for_each_point_words(|i, w| natural.push((i, w.to_vec())));
        let mut gray = Vec::new();
        net.for_each_point_words_gray(|i, w| gray.push((i, w.to_vec())));
        assert_eq!(natural.len(), 256);
        gray.sort();
        assert_eq!(natural, gray);
    }

    #[test]
    fn shift_only_coordinates_distinct() {
        let g = Arc::new(GeneratingMatrices::builtin(1, 4).unwrap());
        let mut rng = stream_rng(6, 0);
        let net = randomize(&ScrambleScheme::ShiftOnly(g), 1, 4, 64, &mut rng).unwrap();
        let mut xs: Vec<u64> = net.points().map(|p| p[0].word()).collect();
        assert_eq!(xs.len(), 16);
        xs.sort_unstable();
        xs.dedup();
        assert_eq!(xs.len(), 16);
    }

    #[test]
    fn determinism_and_dump_roundtrip() {
        let g = Arc::new(GeneratingMatrices::builtin(3, 6).unwrap());
        let scheme = ScrambleScheme::Rls(g);
        let seed = SeedRecord::new(42, 7);
        let a = randomize_seeded(&scheme, 3, 6, 30, seed).unwrap();
        let b = randomize_seeded(&scheme, 3, 6, 30, seed).unwrap();
        assert_eq!(a.dump(), b.dump());
        let json = serde_json::to_string(&a.dump()).unwrap();
        let back: NetDump = serde_json::from_str(&json).unwrap();
        let c = RandomizedNet::from_dump(&back).unwrap();
        assert!(a.points().eq(c.points()));
        assert_eq!(c.seed(), Some(seed));
    }

    #[test]
    fn size_errors() {
        let mut rng = stream_rng(0, 0);
        assert!(randomize(&ScrambleScheme::Crd, 1, 8, 7, &mut rng).is_err());
        assert!(randomize(&ScrambleScheme::Crd, 1, 8, 65, &mut rng).is_err());
        let g = Arc::new(GeneratingMatrices::builtin(2, 6).unwrap());
        assert!(randomize(&ScrambleScheme::Rls(g.clone()), 3, 6, 8, &mut rng).is_err());
        assert!(randomize(&ScrambleScheme::Rls(g), 2, 5, 8, &mut rng).is_err());
    }

    #[test]
    fn digits_are_fair_under_randomization() {
        let g = Arc::new(GeneratingMatrices::builtin(2, 6).unwrap());
        let mut rng = stream_rng(7, 0);
        let reps = 4000;
        for scheme in [ScrambleScheme::Crd, ScrambleScheme::Rls(g.clone())] {
            let mut ones = vec![0usize; 16];
            for _ in 0..reps {
                let net = randomize(&scheme, 2, 6, 16, &mut rng).unwrap();
                let x = net.point(37).unwrap()[1];
                for l in 1..=16 {
                    ones[l as usize - 1] += x.digit(l) as usize;
                }
            }
            let sd = (reps as f64 * 0.25).sqrt();
            for c in ones {
                assert!((c as f64 - reps as f64 / 2.0).abs() <= 4.0 * sd);
            }
        }
    }
}
