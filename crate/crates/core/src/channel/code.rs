//! Parity-check matrices and encoders.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ChannelError;

/// Seed of the default progressive-edge-growth construction.
pub const PEG_SEED: u64 = 0x4F41_5231;
pub const PEG_COLUMN_DEGREE: usize = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    #[default]
    SumProduct,
    /// Normalised min-sum with a 0.75 scale.
    MinSum,
}

impl FromStr for DecoderKind {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sum-product" | "sum_product" | "spa" | "bp" => Ok(DecoderKind::SumProduct),
            "min-sum" | "min_sum" | "nms" => Ok(DecoderKind::MinSum),
            _ => Err(ChannelError::Config(format!("unknown decoder {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixSource {
    Peg { seed: u64, column_degree: usize },
    Alist(PathBuf),
}

/// LDPC code selection. Only rates 1/3, 1/2 and 2/3 are accepted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LdpcConfig {
    pub name: String,
    pub k: usize,
    pub n: usize,
    pub source: MatrixSource,
    pub max_iterations: u32,
    pub decoder: DecoderKind,
}

impl LdpcConfig {
    fn preset(name: &str, k: usize, n: usize) -> LdpcConfig {
        LdpcConfig {
            name: name.to_string(),
            k,
            n,
            source: MatrixSource::Peg {
                seed: PEG_SEED,
                column_degree: PEG_COLUMN_DEGREE,
            },
            max_iterations: 50,
            decoder: DecoderKind::SumProduct,
        }
    }

    /// (1536, 4608)
    pub fn rate_1_3() -> LdpcConfig {
        LdpcConfig::preset("1/3", 1536, 4608)
    }

    /// (3072, 6144)
    pub fn rate_1_2() -> LdpcConfig {
        LdpcConfig::preset("1/2", 3072, 6144)
    }

    /// (3072, 4608)
    pub fn rate_2_3() -> LdpcConfig {
        LdpcConfig::preset("2/3", 3072, 4608)
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn parity_checks(&self) -> usize {
        self.n - self.k
    }

    pub fn with_decoder(mut self, decoder: DecoderKind) -> LdpcConfig {
        self.decoder = decoder;
        self
    }

    pub fn with_max_iterations(mut self, iterations: u32) -> LdpcConfig {
        self.max_iterations = iterations;
        self
    }

    pub fn with_alist(mut self, path: impl Into<PathBuf>) -> LdpcConfig {
        self.source = MatrixSource::Alist(path.into());
        self
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let ok = matches!((self.k, self.n), (1536, 4608) | (3072, 6144) | (3072, 4608));
        if !ok {
            return Err(ChannelError::Config(format!(
                "unsupported code ({}, {})",
                self.k, self.n
            )));
        }
        if self.max_iterations == 0 {
            return Err(ChannelError::Config(
                "max_iterations must be positive".into(),
            ));
        }
        if let MatrixSource::Peg { column_degree, .. } = self.source {
            if column_degree < 2 || column_degree > self.parity_checks() {
                return Err(ChannelError::Config(format!(
                    "column degree {column_degree}"
                )));
            }
        }
        Ok(())
    }

    /// Blocks needed for `info_bits` and the zero padding that fills the last one.
    pub fn blocks_for(&self, info_bits: usize) -> (usize, usize) {
        let blocks = info_bits.div_ceil(self.k).max(1);
        (blocks, blocks * self.k - info_bits)
    }
}

impl FromStr for LdpcConfig {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "1/3" => Ok(LdpcConfig::rate_1_3()),
            "1/2" => Ok(LdpcConfig::rate_1_2()),
            "2/3" => Ok(LdpcConfig::rate_2_3()),
            other => Err(ChannelError::Config(format!(
                "unknown LDPC rate {other:?} (expected 1/3, 1/2 or 2/3)"
            ))),
        }
    }
}

impl fmt::Display for LdpcConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ldpc {} ({}, {})", self.name, self.k, self.n)
    }
}

/// Sparse parity-check matrix `H`, `m × n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityCheck {
    n: usize,
    /// Variable indices of each check.
    checks: Vec<Vec<u32>>,
    /// Check indices of each variable.
    vars: Vec<Vec<u32>>,
}

impl ParityCheck {
    pub fn from_checks(n: usize, checks: Vec<Vec<u32>>) -> Result<ParityCheck, ChannelError> {
        let mut vars = vec![Vec::new(); n];
        for (c, row) in checks.iter().enumerate() {
            for &v in row {
                let col = vars
                    .get_mut(v as usize)
                    .ok_or_else(|| ChannelError::Matrix(format!("column {v} out of range")))?;
                if col.last() == Some(&(c as u32)) || col.contains(&(c as u32)) {
                    return Err(ChannelError::Matrix(format!("repeated entry ({c}, {v})")));
                }
                col.push(c as u32);
            }
        }
        let mut checks = checks;
        for row in &mut checks {
            row.sort_unstable();
        }
        Ok(ParityCheck { n, checks, vars })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.checks.len()
    }

    pub fn checks(&self) -> &[Vec<u32>] {
        &self.checks
    }

    pub fn vars(&self) -> &[Vec<u32>] {
        &self.vars
    }

    pub fn edges(&self) -> usize {
        self.checks.iter().map(Vec::len).sum()
    }

    pub fn min_column_degree(&self) -> usize {
        self.vars.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// True when every check is satisfied by the 0/1 word `c`.
    pub fn is_codeword(&self, c: &[u8]) -> bool {
        c.len() == self.n
            && self
                .checks
                .iter()
                .all(|row| row.iter().fold(0u8, |acc, &v| acc ^ c[v as usize]) & 1 == 0)
    }

    /// Progressive edge growth: each new edge of a variable goes to the
    /// least-loaded check among those farthest from it in the current graph.
    pub fn peg(n: usize, m: usize, column_degree: usize, seed: u64) -> ParityCheck {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut checks: Vec<Vec<u32>> = vec![Vec::new(); m];
        let mut vars: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut check_seen = vec![u32::MAX; m];
        let mut var_seen = vec![u32::MAX; n];
        let mut stamp = 0u32;
        let mut frontier = Vec::new();
        let mut next = Vec::new();
        let mut candidates = Vec::new();

        for j in 0..n {
            for e in 0..column_degree {
                candidates.clear();
                if e == 0 {
                    candidates.extend(0..m as u32);
                } else {
                    // breadth-first expansion until the reachable check set stops
                    // growing or covers every check
                    stamp += 1;
                    var_seen[j] = stamp;
                    frontier.clear();
                    frontier.push(j as u32);
                    let mut reached = 0usize;
                    let mut last_unreached: Vec<u32> = Vec::new();
                    loop {
                        next.clear();
                        let before = reached;
                        for &v in &frontier {
                            for &c in &vars[v as usize] {
                                if check_seen[c as usize] != stamp {
                                    check_seen[c as usize] = stamp;
                                    reached += 1;
                                    for &u in &checks[c as usize] {
                                        if var_seen[u as usize] != stamp {
                                            var_seen[u as usize] = stamp;
                                            next.push(u);
                                        }
                                    }
                                }
                            }
                        }
                        if reached == m {
                            // everything reachable: take the checks of the last new layer
                            candidates.extend(last_unreached.iter().copied());
                            break;
                        }
                        if reached == before {
                            candidates
                                .extend((0..m as u32).filter(|&c| check_seen[c as usize] != stamp));
                            break;
                        }
                        last_unreached.clear();
                        last_unreached
                            .extend((0..m as u32).filter(|&c| check_seen[c as usize] != stamp));
                        std::mem::swap(&mut frontier, &mut next);
                    }
                    candidates.retain(|c| !vars[j].contains(c));
                    if candidates.is_empty() {
                        candidates.extend((0..m as u32).filter(|c| !vars[j].contains(c)));
                    }
                }
                let min_deg = candidates
                    .iter()
                    .map(|&c| checks[c as usize].len())
                    .min()
                    .expect("some check is always free");
                candidates.retain(|&c| checks[c as usize].len() == min_deg);
                let c = candidates[rng.gen_range(0..candidates.len())];
                checks[c as usize].push(j as u32);
                vars[j].push(c);
            }
        }
        ParityCheck::from_checks(n, checks).expect("construction yields a simple graph")
    }

    pub fn write_alist<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let max_col = self.vars.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.checks.iter().map(Vec::len).max().unwrap_or(0);
        writeln!(out, "{} {}", self.n, self.m())?;
        writeln!(out, "{max_col} {max_row}")?;
        let join = |v: Vec<String>| v.join(" ");
        writeln!(
            out,
            "{}",
            join(self.vars.iter().map(|c| c.len().to_string()).collect())
        )?;
        writeln!(
            out,
            "{}",
            join(self.checks.iter().map(|r| r.len().to_string()).collect())
        )?;
        for col in &self.vars {
            let mut col = col.clone();
            col.sort_unstable();
            let mut f: Vec<String> = col.iter().map(|c| (c + 1).to_string()).collect();
            f.resize(max_col, "0".into());
            writeln!(out, "{}", join(f))?;
        }
        for row in &self.checks {
            let mut f: Vec<String> = row.iter().map(|v| (v + 1).to_string()).collect();
            f.resize(max_row, "0".into());
            writeln!(out, "{}", join(f))?;
        }
        Ok(())
    }

    /// Reads the MacKay alist format. Zero entries are padding.
    pub fn read_alist<R: BufRead>(input: R) -> Result<ParityCheck, ChannelError> {
        let mut nums = Vec::new();
        for line in input.lines() {
            let line = line.map_err(|e| ChannelError::Matrix(e.to_string()))?;
            for tok in line.split_whitespace() {
                nums.push(
                    tok.parse::<usize>()
                        .map_err(|_| ChannelError::Matrix(format!("bad alist token {tok:?}")))?,
                );
            }
        }
        let mut it = nums.into_iter();
        let mut take = |what: &str| {
            it.next()
                .ok_or_else(|| ChannelError::Matrix(format!("alist ends before {what}")))
        };
        let n = take("n")?;
        let m = take("m")?;
        let max_col = take("max column degree")?;
        let max_row = take("max row degree")?;
        let col_deg: Vec<usize> = (0..n)
            .map(|_| take("column degrees"))
            .collect::<Result<_, _>>()?;
        let row_deg: Vec<usize> = (0..m)
            .map(|_| take("row degrees"))
            .collect::<Result<_, _>>()?;
        let mut cols: Vec<Vec<u32>> = Vec::with_capacity(n);
        for (j, &d) in col_deg.iter().enumerate() {
            let mut col = Vec::with_capacity(d);
            for _ in 0..max_col {
                let c = take("column lists")?;
                if c > m {
                    return Err(ChannelError::Matrix(format!("column {j}: check {c} > {m}")));
                }
                if c > 0 {
                    col.push((c - 1) as u32);
                }
            }
            if col.len() != d {
                return Err(ChannelError::Matrix(format!(
                    "column {j}: degree {} != {d}",
                    col.len()
                )));
            }
            cols.push(col);
        }
        let mut checks = vec![Vec::new(); m];
        for (i, &d) in row_deg.iter().enumerate() {
            for _ in 0..max_row {
                let v = take("row lists")?;
                if v > n {
                    return Err(ChannelError::Matrix(format!("row {i}: variable {v} > {n}")));
                }
                if v > 0 {
                    checks[i].push((v - 1) as u32);
                }
            }
            if checks[i].len() != d {
                return Err(ChannelError::Matrix(format!(
                    "row {i}: degree {} != {d}",
                    checks[i].len()
                )));
            }
        }
        let h = ParityCheck::from_checks(n, checks)?;
        for (j, col) in cols.iter_mut().enumerate() {
            col.sort_unstable();
            let mut have = h.vars[j].clone();
            have.sort_unstable();
            if *col != have {
                return Err(ChannelError::Matrix(format!(
                    "column {j} disagrees with row lists"
                )));
            }
        }
        Ok(h)
    }

    pub fn load_alist(path: &Path) -> Result<ParityCheck, ChannelError> {
        let f = std::fs::File::open(path)
            .map_err(|e| ChannelError::Matrix(format!("{}: {e}", path.display())))?;
        ParityCheck::read_alist(std::io::BufReader::new(f))
    }
}

/// Dense GF(2) row.
type Row = Vec<u64>;

#[inline]
fn get_bit(row: &[u64], i: usize) -> bool {
    row[i / 64] >> (i % 64) & 1 == 1
}

/// Systematic encoder derived from `H` in reduced row echelon form. Info bits
/// occupy `k` of the non-pivot columns; any further free columns are fixed
/// at zero.
#[derive(Debug)]
pub struct LdpcCode {
    config: LdpcConfig,
    h: ParityCheck,
    info_columns: Vec<u32>,
    /// `(pivot column, parity mask over info positions)` per pivot row.
    parity: Vec<(u32, Row)>,
    rank: usize,
}

impl LdpcCode {
    pub fn build(config: &LdpcConfig) -> Result<LdpcCode, ChannelError> {
        config.validate()?;
        let h = match &config.source {
            MatrixSource::Peg {
                seed,
                column_degree,
            } => ParityCheck::peg(config.n, config.parity_checks(), *column_degree, *seed),
            MatrixSource::Alist(path) => ParityCheck::load_alist(path)?,
        };
        LdpcCode::from_matrix(config.clone(), h)
    }

    pub fn from_matrix(config: LdpcConfig, h: ParityCheck) -> Result<LdpcCode, ChannelError> {
        let (n, k) = (config.n, config.k);
        if h.n() != n || h.m() != n - k {
            return Err(ChannelError::Matrix(format!(
                "H is {}x{}, expected {}x{n}",
                h.m(),
                h.n(),
                n - k
            )));
        }
        if h.min_column_degree() < 2 {
            return Err(ChannelError::Matrix("a column has degree below 2".into()));
        }
        let words = n.div_ceil(64);
        let mut rows: Vec<Row> = h
            .checks()
            .iter()
            .map(|r| {
                let mut row = vec![0u64; words];
                for &v in r {
                    row[v as usize / 64] |= 1 << (v % 64);
                }
                row
            })
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..n {
            if r == rows.len() {
                break;
            }
            let Some(p) = (r..rows.len()).find(|&i| get_bit(&rows[i], col)) else {
                continue;
            };
            rows.swap(r, p);
            let pivot = std::mem::take(&mut rows[r]);
            let w0 = col / 64;
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && get_bit(row, col) {
                    for (a, b) in row[w0..].iter_mut().zip(&pivot[w0..]) {
                        *a ^= b;
                    }
                }
            }
            rows[r] = pivot;
            pivots.push(col);
            r += 1;
        }
        let rank = pivots.len();
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<u32> = (0..n as u32).filter(|&c| !is_pivot[c as usize]).collect();
        if free.len() < k {
            return Err(ChannelError::Matrix("H rank exceeds n - k".into()));
        }
        let info_columns = free[..k].to_vec();
        let info_words = k.div_ceil(64);
        let parity = pivots
            .iter()
            .zip(&rows)
            .map(|(&p, row)| {
                let mut mask = vec![0u64; info_words];
                for (i, &c) in info_columns.iter().enumerate() {
                    if get_bit(row, c as usize) {
                        mask[i / 64] |= 1 << (i % 64);
                    }
                }
                (p as u32, mask)
            })
            .collect();
        Ok(LdpcCode {
            config,
            h,
            info_columns,
            parity,
            rank,
        })
    }

    pub fn config(&self) -> &LdpcConfig {
        &self.config
    }

    pub fn matrix(&self) -> &ParityCheck {
        &self.h
    }

    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn info_columns(&self) -> &[u32] {
        &self.info_columns
    }

    /// Encodes exactly `k` info bits (0/1 values) into an `n`-bit codeword.
    pub fn encode_block(&self, info: &[u8]) -> Vec<u8> {
        assert_eq!(info.len(), self.k(), "block must hold k info bits");
        let mut packed = vec![0u64; self.k().div_ceil(64)];
        for (i, &b) in info.iter().enumerate() {
            if b & 1 == 1 {
                packed[i / 64] |= 1 << (i % 64);
            }
        }
        let mut c = vec![0u8; self.n()];
        for (&col, &b) in self.info_columns.iter().zip(info) {
            c[col as usize] = b & 1;
        }
        for (p, mask) in &self.parity {
            let ones: u32 = mask
                .iter()
                .zip(&packed)
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            c[*p as usize] = (ones & 1) as u8;
        }
        c
    }

    /// Zero-pads `info` to whole blocks and encodes each one. Returns the
    /// concatenated codewords and the padding length.
    pub fn encode(&self, info: &[u8]) -> (Vec<u8>, usize) {
        let (blocks, padding) = self.config.blocks_for(info.len());
        let mut padded = info.to_vec();
        padded.resize(blocks * self.k(), 0);
        let mut out = Vec::with_capacity(blocks * self.n());
        for block in padded.chunks_exact(self.k()) {
            out.extend(self.encode_block(block));
        }
        (out, padding)
    }

    pub fn extract_info(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_columns
            .iter()
            .map(|&c| codeword[c as usize])
            .collect()
    }
}

static CACHE: OnceLock<Mutex<HashMap<LdpcConfig, Arc<LdpcCode>>>> = OnceLock::new();

/// Builds the code for `config` once per process and shares it afterwards.
pub fn cached_code(config: &LdpcConfig) -> Result<Arc<LdpcCode>, ChannelError> {
    // decoder settings do not change the code
    let key = LdpcConfig {
        decoder: DecoderKind::SumProduct,
        max_iterations: 1,
        name: String::new(),
        ..config.clone()
    };
    let cache = CACHE.get_or_init(Default::default);
    if let Some(code) = cache.lock().expect("code cache poisoned").get(&key) {
        return Ok(code.clone());
    }
    let code = Arc::new(LdpcCode::build(config)?);
    cache
        .lock()
        .expect("code cache poisoned")
        .entry(key)
        .or_insert(code.clone());
    Ok(code)
}
