//! The `(dl, dr, dg, L, w)` spatially-coupled MacKay-Neal ensemble.
//!
//! Each section `i` in `-L..=L` holds `(dr/dl) M` punctured bits of degree
//! `dl` (type 1) and `M` transmitted bits of degree `dg` (type 2). Check
//! sections run over `-L..=L+w-1`; each check has `dr` type-1 and `dg` type-2
//! sockets before shortening. Bits at section `i` send exactly `dr M / w`
//! type-1 edges and `dg M / w` type-2 edges to every check section `i + j`,
//! `j = 0..w`. Sections outside `-L..=L` are shortened: their bits are known
//! zeros and their sockets are dropped.

use std::fmt::Write as _;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnsembleError {
    #[error("degrees and window must be positive (dl={dl}, dr={dr}, dg={dg}, w={w})")]
    Degrees { dl: usize, dr: usize, dg: usize, w: usize },
    #[error("M must be at least 1")]
    ZeroM,
    #[error("symbol width m must be at least 1")]
    ZeroSymbolWidth,
    #[error("w = {w} must divide {what} = {value}")]
    WindowDivisibility { w: usize, what: &'static str, value: usize },
    #[error("dl = {dl} must divide dr*M = {value}")]
    PuncturedDivisibility { dl: usize, value: usize },
    #[error("symbol width m = {m} must divide M = {big_m}")]
    SymbolDivisibility { m: usize, big_m: usize },
    #[error("exact arithmetic overflowed for these parameters")]
    Overflow,
    #[error("graph text line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Ensemble parameters. `half_width` is `L`, `window` is `w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub dl: usize,
    pub dr: usize,
    pub dg: usize,
    pub half_width: usize,
    pub window: usize,
}

impl EnsembleParams {
    pub fn new(dl: usize, dr: usize, dg: usize, half_width: usize, window: usize) -> Result<Self, EnsembleError> {
        let p = Self {
            dl,
            dr,
            dg,
            half_width,
            window,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.dl == 0 || self.dr == 0 || self.dg == 0 || self.window == 0 {
            return Err(EnsembleError::Degrees {
                dl: self.dl,
                dr: self.dr,
                dg: self.dg,
                w: self.window,
            });
        }
        Ok(())
    }

    /// Number of coupled sections, `2L + 1`.
    pub fn sections(&self) -> usize {
        2 * self.half_width + 1
    }

    /// `sum_{i=0}^{w} (1 - (i/w)^{dr} (i/w)^{dg})`, the boundary correction.
    fn boundary_sum(&self) -> f64 {
        let w = self.window as f64;
        (0..=self.window)
            .map(|i| {
                let x = i as f64 / w;
                1.0 - x.powi(self.dr as i32) * x.powi(self.dg as i32)
            })
            .sum()
    }

    fn boundary_sum_exact(&self) -> Result<Ratio<i128>, EnsembleError> {
        let w = self.window as i128;
        let exp = (self.dr + self.dg) as u32;
        let den = w.checked_pow(exp).ok_or(EnsembleError::Overflow)?;
        let mut num: i128 = 0;
        for i in 0..=w {
            let term = den - (i).checked_pow(exp).ok_or(EnsembleError::Overflow)?;
            num = num.checked_add(term).ok_or(EnsembleError::Overflow)?;
        }
        Ok(Ratio::new(num, den))
    }

    /// Design rate `dr/dl + (1 + w - 2 sum) / (2L + 1)`.
    pub fn design_rate(&self) -> f64 {
        let hl = self.sections() as f64;
        self.dr as f64 / self.dl as f64 + (1.0 + self.window as f64 - 2.0 * self.boundary_sum()) / hl
    }

    pub fn design_rate_exact(&self) -> Result<Ratio<i128>, EnsembleError> {
        let hl = self.sections() as i128;
        let base = Ratio::new(self.dr as i128, self.dl as i128);
        let corr = (Ratio::from_integer(1 + self.window as i128) - self.boundary_sum_exact()? * 2) / hl;
        Ok(base + corr)
    }

    /// Number of checks of degree at least one, `M [2L - w + 2 sum]`.
    pub fn check_count(&self, m_bits: usize) -> f64 {
        m_bits as f64 * (2.0 * self.half_width as f64 - self.window as f64 + 2.0 * self.boundary_sum())
    }

    pub fn check_count_exact(&self, m_bits: usize) -> Result<Ratio<i128>, EnsembleError> {
        let bracket = Ratio::from_integer(2 * self.half_width as i128 - self.window as i128) + self.boundary_sum_exact()? * 2;
        Ok(bracket * m_bits as i128)
    }

    /// Transmitted bits `V_t = (2L+1) M`.
    pub fn transmitted_bits(&self, m_bits: usize) -> usize {
        self.sections() * m_bits
    }

    /// Punctured bits `V_p = (dr/dl)(2L+1) M` as an exact ratio.
    pub fn punctured_bits_exact(&self, m_bits: usize) -> Ratio<i128> {
        Ratio::new((self.dr * self.sections() * m_bits) as i128, self.dl as i128)
    }

    /// Checks the divisibility needed for exact socket quotas with symbol width `m`.
    pub fn check_graph_size(&self, m_bits: usize, m: usize) -> Result<(), EnsembleError> {
        self.validate()?;
        if m_bits == 0 {
            return Err(EnsembleError::ZeroM);
        }
        if m == 0 {
            return Err(EnsembleError::ZeroSymbolWidth);
        }
        let w = self.window;
        if !(self.dr * m_bits).is_multiple_of(w) {
            return Err(EnsembleError::WindowDivisibility {
                w,
                what: "dr*M",
                value: self.dr * m_bits,
            });
        }
        if !(self.dg * m_bits).is_multiple_of(w) {
            return Err(EnsembleError::WindowDivisibility {
                w,
                what: "dg*M",
                value: self.dg * m_bits,
            });
        }
        if !(self.dr * m_bits).is_multiple_of(self.dl) {
            return Err(EnsembleError::PuncturedDivisibility {
                dl: self.dl,
                value: self.dr * m_bits,
            });
        }
        if !m_bits.is_multiple_of(m) {
            return Err(EnsembleError::SymbolDivisibility { m, big_m: m_bits });
        }
        Ok(())
    }

    /// Smallest `M` satisfying [`check_graph_size`](Self::check_graph_size).
    pub fn smallest_graph_size(&self, m: usize) -> usize {
        (1..)
            .find(|&big_m| self.check_graph_size(big_m, m).is_ok())
            .expect("some multiple always works")
    }
}

/// Punctured (type 1) or transmitted (type 2) bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BitKind {
    Punctured,
    Transmitted,
}

/// One edge. `bit` indexes the bits of the given kind; `check` indexes all checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub check: u32,
    pub kind: BitKind,
    pub bit: u32,
}

/// A sampled finite code from the ensemble.
///
/// Punctured bit `b` lives at section index `b / punctured_per_section`,
/// transmitted bit `b` at `b / M`, check `c` at check-section index `c / M`.
/// Section index `s` corresponds to position `s - L`; check-section index `s`
/// to position `s - L` as well, running up to `L + w - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    params: EnsembleParams,
    m_bits: usize,
    symbol_width: usize,
    /// Sorted by `(check, kind, bit)`.
    edges: Vec<Edge>,
    /// `check_offsets[c]..check_offsets[c+1]` are the edges of check `c`.
    check_offsets: Vec<usize>,
    /// Transmitted-bit ids, `symbol_width` per symbol, symbols ordered by section.
    symbols: Vec<u32>,
}

impl TannerGraph {
    pub fn params(&self) -> &EnsembleParams {
        &self.params
    }

    /// Transmitted bits per section.
    pub fn m_bits(&self) -> usize {
        self.m_bits
    }

    pub fn symbol_width(&self) -> usize {
        self.symbol_width
    }

    pub fn punctured_per_section(&self) -> usize {
        self.params.dr * self.m_bits / self.params.dl
    }

    pub fn sections(&self) -> usize {
        self.params.sections()
    }

    pub fn check_sections(&self) -> usize {
        self.params.sections() + self.params.window - 1
    }

    pub fn num_checks(&self) -> usize {
        self.check_sections() * self.m_bits
    }

    pub fn num_punctured(&self) -> usize {
        self.sections() * self.punctured_per_section()
    }

    pub fn num_transmitted(&self) -> usize {
        self.sections() * self.m_bits
    }

    pub fn num_bits(&self, kind: BitKind) -> usize {
        match kind {
            BitKind::Punctured => self.num_punctured(),
            BitKind::Transmitted => self.num_transmitted(),
        }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn check_edges(&self, check: usize) -> &[Edge] {
        &self.edges[self.check_edge_range(check)]
    }

    /// Indices into [`edges`](Self::edges) of the sockets of `check`.
    pub fn check_edge_range(&self, check: usize) -> std::ops::Range<usize> {
        self.check_offsets[check]..self.check_offsets[check + 1]
    }

    /// Bits of `kind` that drop out of every parity constraint because each
    /// of their checks holds an even number of their sockets.
    pub fn free_bits(&self, kind: BitKind) -> Vec<u32> {
        let mut sockets: Vec<(u32, u32)> = self
            .edges
            .iter()
            .filter(|e| e.kind == kind)
            .map(|e| (e.bit, e.check))
            .collect();
        sockets.sort_unstable();
        sockets
            .chunk_by(|a, b| a.0 == b.0)
            .filter(|group| group.chunk_by(|a, b| a.1 == b.1).all(|run| run.len() % 2 == 0))
            .map(|group| group[0].0)
            .collect()
    }

    /// Number of checks with at least one remaining socket.
    pub fn active_checks(&self) -> usize {
        self.check_offsets.windows(2).filter(|w| w[1] > w[0]).count()
    }

    pub fn bit_section(&self, kind: BitKind, bit: usize) -> usize {
        match kind {
            BitKind::Punctured => bit / self.punctured_per_section(),
            BitKind::Transmitted => bit / self.m_bits,
        }
    }

    pub fn check_section(&self, check: usize) -> usize {
        check / self.m_bits
    }

    pub fn num_symbols(&self) -> usize {
        self.symbols.len() / self.symbol_width
    }

    /// Transmitted-bit ids of channel symbol `k`.
    pub fn symbol(&self, k: usize) -> &[u32] {
        &self.symbols[k * self.symbol_width..(k + 1) * self.symbol_width]
    }

    /// Plain-text export: a header, one line per check and one per symbol.
    ///
    /// ```text
    /// scmn-graph 1
    /// params <dl> <dr> <dg> <L> <w> <M> <m>
    /// checks <count>
    /// <check-section> | <punctured ids> | <transmitted ids>
    /// symbols <count>
    /// <section> | <transmitted ids>
    /// ```
    /// Sections are signed positions (`-L..=L+w-1` for checks).
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let l = p.half_width as i64;
        let mut out = String::new();
        writeln!(out, "scmn-graph 1").unwrap();
        writeln!(
            out,
            "params {} {} {} {} {} {} {}",
            p.dl, p.dr, p.dg, p.half_width, p.window, self.m_bits, self.symbol_width
        )
        .unwrap();
        writeln!(out, "checks {}", self.num_checks()).unwrap();
        for c in 0..self.num_checks() {
            let edges = self.check_edges(c);
            let ids = |kind| {
                edges
                    .iter()
                    .filter(|e| e.kind == kind)
                    .map(|e| e.bit.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            writeln!(
                out,
                "{} | {} | {}",
                self.check_section(c) as i64 - l,
                ids(BitKind::Punctured),
                ids(BitKind::Transmitted)
            )
            .unwrap();
        }
        writeln!(out, "symbols {}", self.num_symbols()).unwrap();
        for k in 0..self.num_symbols() {
            let sym = self.symbol(k);
            let ids: Vec<String> = sym.iter().map(|b| b.to_string()).collect();
            let section = self.bit_section(BitKind::Transmitted, sym[0] as usize) as i64 - l;
            writeln!(out, "{} | {}", section, ids.join(" ")).unwrap();
        }
        out
    }

    /// Parses the format written by [`to_text`](Self::to_text).
    pub fn from_text(text: &str) -> Result<Self, EnsembleError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let err = |line: usize, message: &str| EnsembleError::Parse {
            line: line + 1,
            message: message.to_string(),
        };
        let last = text.lines().count();
        let mut next = |what: &str| lines.next().ok_or_else(|| err(last, &format!("missing {what}")));

        let (n, magic) = next("header")?;
        if magic.trim() != "scmn-graph 1" {
            return Err(err(n, "expected 'scmn-graph 1'"));
        }
        let (n, params_line) = next("params")?;
        let nums: Vec<usize> = params_line
            .strip_prefix("params")
            .ok_or_else(|| err(n, "expected params"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(n, "bad number")))
            .collect::<Result<_, _>>()?;
        if nums.len() != 7 {
            return Err(err(n, "params needs 7 numbers"));
        }
        let params = EnsembleParams::new(nums[0], nums[1], nums[2], nums[3], nums[4])?;
        let (m_bits, symbol_width) = (nums[5], nums[6]);
        params.check_graph_size(m_bits, symbol_width)?;
        let count = |line: (usize, &str), key: &str| -> Result<usize, EnsembleError> {
            line.1
                .strip_prefix(key)
                .and_then(|r| r.trim().parse().ok())
                .ok_or_else(|| err(line.0, &format!("expected '{key} <count>'")))
        };
        let n_checks = count(next("checks")?, "checks")?;
        let mut graph = TannerGraph {
            params,
            m_bits,
            symbol_width,
            edges: Vec::new(),
            check_offsets: vec![0],
            symbols: Vec::new(),
        };
        if n_checks != graph.num_checks() {
            return Err(err(2, "check count does not match params"));
        }
        let parse_ids = |n: usize, field: &str, limit: usize| -> Result<Vec<u32>, EnsembleError> {
            field
                .split_whitespace()
                .map(|t| match t.parse::<u32>() {
                    Ok(v) if (v as usize) < limit => Ok(v),
                    _ => Err(err(n, "bad bit id")),
                })
                .collect()
        };
        for c in 0..n_checks {
            let (n, line) = next("check line")?;
            let fields: Vec<&str> = line.split('|').collect();
            if fields.len() != 3 {
                return Err(err(n, "check line needs 3 fields"));
            }
            let cs = graph.check_section(c);
            if fields[0].trim().parse::<i64>().ok() != Some(cs as i64 - params.half_width as i64) {
                return Err(err(n, "wrong check section"));
            }
            for (kind, field) in [(BitKind::Punctured, fields[1]), (BitKind::Transmitted, fields[2])] {
                let mut bits = parse_ids(n, field, graph.num_bits(kind))?;
                bits.sort_unstable();
                for bit in bits {
                    if !(0..params.window).contains(&cs.wrapping_sub(graph.bit_section(kind, bit as usize))) {
                        return Err(err(n, "edge outside the coupling window"));
                    }
                    graph.edges.push(Edge {
                        check: c as u32,
                        kind,
                        bit,
                    });
                }
            }
            graph.check_offsets.push(graph.edges.len());
        }
        let mut degree = [vec![0usize; graph.num_punctured()], vec![0usize; graph.num_transmitted()]];
        for e in &graph.edges {
            degree[e.kind as usize][e.bit as usize] += 1;
        }
        for (kind, want) in [(BitKind::Punctured, params.dl), (BitKind::Transmitted, params.dg)] {
            if let Some(b) = degree[kind as usize].iter().position(|&d| d != want) {
                return Err(err(last, &format!("{kind:?} bit {b} has degree {}, expected {want}", degree[kind as usize][b])));
            }
        }

        let (n, line) = next("symbols")?;
        if count((n, line), "symbols")? != graph.num_transmitted() / symbol_width {
            return Err(err(n, "symbol count does not match params"));
        }
        let mut seen = vec![false; graph.num_transmitted()];
        let mut prev_section = 0;
        for _ in 0..graph.num_transmitted() / symbol_width {
            let (n, line) = next("symbol line")?;
            let (section, ids) = line.split_once('|').ok_or_else(|| err(n, "symbol line needs '|'"))?;
            let ids = parse_ids(n, ids, graph.num_transmitted())?;
            if ids.len() != symbol_width {
                return Err(err(n, "symbol has wrong width"));
            }
            let s = graph.bit_section(BitKind::Transmitted, ids[0] as usize);
            if ids.iter().any(|&b| graph.bit_section(BitKind::Transmitted, b as usize) != s)
                || section.trim().parse::<i64>().ok() != Some(s as i64 - params.half_width as i64)
            {
                return Err(err(n, "symbol must sit in its stated section"));
            }
            if s < prev_section {
                return Err(err(n, "symbols must be ordered by section"));
            }
            prev_section = s;
            for &b in &ids {
                if std::mem::replace(&mut seen[b as usize], true) {
                    return Err(err(n, "transmitted bit in two symbols"));
                }
            }
            graph.symbols.extend(ids);
        }
        if let Some((n, _)) = lines.next() {
            return Err(err(n, "trailing content"));
        }
        Ok(graph)
    }
}

/// Samples a code: uniform socket matchings under exact per-(section, offset) quotas,
/// then a uniform within-section grouping of transmitted bits into symbols of width `m`.
pub fn sample_graph<R: Rng + ?Sized>(
    params: &EnsembleParams,
    m_bits: usize,
    m: usize,
    rng: &mut R,
) -> Result<TannerGraph, EnsembleError> {
    params.check_graph_size(m_bits, m)?;
    let sections = params.sections();
    let w = params.window;
    let check_sections = sections + w - 1;
    let mut edges = Vec::with_capacity(sections * m_bits * (params.dr + params.dg));

    for (kind, per_check, bit_degree, per_section) in [
        (BitKind::Punctured, params.dr, params.dl, params.dr * m_bits / params.dl),
        (BitKind::Transmitted, params.dg, params.dg, m_bits),
    ] {
        let quota = per_check * m_bits / w;
        // Check sockets per check section, shuffled, chunk k feeds bit section cs - k.
        let check_sockets: Vec<Vec<u32>> = (0..check_sections)
            .map(|cs| {
                let mut sockets: Vec<u32> = (0..m_bits)
                    .flat_map(|c| std::iter::repeat_n((cs * m_bits + c) as u32, per_check))
                    .collect();
                sockets.shuffle(rng);
                sockets
            })
            .collect();
        for s in 0..sections {
            let mut sockets: Vec<u32> = (0..per_section)
                .flat_map(|b| std::iter::repeat_n((s * per_section + b) as u32, bit_degree))
                .collect();
            sockets.shuffle(rng);
            for j in 0..w {
                let cs = s + j;
                let bits = &sockets[j * quota..(j + 1) * quota];
                let checks = &check_sockets[cs][j * quota..(j + 1) * quota];
                edges.extend(bits.iter().zip(checks).map(|(&bit, &check)| Edge { check, kind, bit }));
            }
        }
    }
    edges.sort_unstable();

    let num_checks = check_sections * m_bits;
    let mut check_offsets = vec![0usize; num_checks + 1];
    for e in &edges {
        check_offsets[e.check as usize + 1] += 1;
    }
    for c in 0..num_checks {
        check_offsets[c + 1] += check_offsets[c];
    }

    let mut symbols = Vec::with_capacity(sections * m_bits);
    for s in 0..sections {
        let mut bits: Vec<u32> = (0..m_bits).map(|b| (s * m_bits + b) as u32).collect();
        bits.shuffle(rng);
        symbols.extend(bits);
    }

    Ok(TannerGraph {
        params: *params,
        m_bits,
        symbol_width: m,
        edges,
        check_offsets,
        symbols,
    })
}
