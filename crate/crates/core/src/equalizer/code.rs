//! Binary parity-check matrices: sparse storage, GF(2) null space,
//! alist and dense-text formats.

use crate::{Error, Result};

/// An `m x n` binary parity-check matrix stored by row support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    num_bits: usize,
    rows: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// Builds from row supports; every row must be nonempty and in range.
    pub fn new(num_bits: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        if num_bits == 0 {
            return Err(Error::Model("parity-check matrix needs at least one bit".into()));
        }
        let mut cleaned = Vec::with_capacity(rows.len());
        for (j, mut row) in rows.into_iter().enumerate() {
            row.sort_unstable();
            row.dedup();
            if row.is_empty() {
                return Err(Error::Model(format!("check {j} is all-zero")));
            }
            if *row.last().unwrap() >= num_bits {
                return Err(Error::Model(format!("check {j} references an out-of-range bit")));
            }
            cleaned.push(row);
        }
        Ok(Self { num_bits, rows: cleaned })
    }

    /// Parses rows of `0`/`1` entries, whitespace optional.
    pub fn from_dense_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut num_bits = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let entries: Vec<u8> = if line.contains(char::is_whitespace) {
                line.split_whitespace()
                    .map(|tok| match tok {
                        "0" => Ok(0),
                        "1" => Ok(1),
                        other => Err(Error::Parse(format!(
                            "line {}: entry {other:?} is not 0/1",
                            lineno + 1
                        ))),
                    })
                    .collect::<Result<_>>()?
            } else {
                line.chars()
                    .map(|c| match c {
                        '0' => Ok(0),
                        '1' => Ok(1),
                        other => Err(Error::Parse(format!(
                            "line {}: character {other:?} is not 0/1",
                            lineno + 1
                        ))),
                    })
                    .collect::<Result<_>>()?
            };
            match num_bits {
                None => num_bits = Some(entries.len()),
                Some(n) if n == entries.len() => {}
                Some(n) => {
                    return Err(Error::Parse(format!(
                        "line {}: expected {n} entries, got {}",
                        lineno + 1,
                        entries.len()
                    )))
                }
            }
            rows.push(
                entries.iter().enumerate().filter(|(_, &e)| e == 1).map(|(i, _)| i).collect(),
            );
        }
        let num_bits = num_bits.ok_or_else(|| Error::Parse("empty dense matrix".into()))?;
        Self::new(num_bits, rows)
    }

    /// Parses the standard alist text format (1-based indices, zero
    /// padding tolerated but not required).
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut next_ints = |expect: &str| -> Result<Vec<usize>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("alist truncated, expected {expect}")))?;
            line.split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("alist token {tok:?} in {expect}")))
                })
                .collect()
        };

        let header = next_ints("n m")?;
        if header.len() != 2 {
            return Err(Error::Parse("alist header must be `n m`".into()));
        }
        let (n, m) = (header[0], header[1]);
        let _max_degrees = next_ints("max degrees")?;
        let col_degrees = next_ints("column degrees")?;
        if col_degrees.len() != n {
            return Err(Error::Parse(format!("expected {n} column degrees")));
        }
        let row_degrees = next_ints("row degrees")?;
        if row_degrees.len() != m {
            return Err(Error::Parse(format!("expected {m} row degrees")));
        }
        // Column adjacency lines are consumed for validation only.
        let mut col_rows: Vec<Vec<usize>> = Vec::with_capacity(n);
        for c in 0..n {
            let entries = next_ints(&format!("column {c} indices"))?;
            let entries: Vec<usize> = entries.into_iter().filter(|&e| e != 0).collect();
            if entries.len() != col_degrees[c] {
                return Err(Error::Parse(format!(
                    "column {c}: {} indices listed, degree says {}",
                    entries.len(),
                    col_degrees[c]
                )));
            }
            col_rows.push(entries);
        }
        let mut rows = Vec::with_capacity(m);
        for r in 0..m {
            let entries = next_ints(&format!("row {r} indices"))?;
            let entries: Vec<usize> = entries.into_iter().filter(|&e| e != 0).collect();
            if entries.len() != row_degrees[r] {
                return Err(Error::Parse(format!(
                    "row {r}: {} indices listed, degree says {}",
                    entries.len(),
                    row_degrees[r]
                )));
            }
            let mut support = Vec::with_capacity(entries.len());
            for e in entries {
                if e == 0 || e > n {
                    return Err(Error::Parse(format!("row {r}: column index {e} out of range")));
                }
                support.push(e - 1);
            }
            rows.push(support);
        }
        let matrix = Self::new(n, rows)?;
        // Cross-check the column adjacency against the rows.
        for (c, listed) in col_rows.iter().enumerate() {
            let mut actual: Vec<usize> = (0..m)
                .filter(|&r| matrix.rows[r].contains(&c))
                .map(|r| r + 1)
                .collect();
            actual.sort_unstable();
            let mut listed = listed.clone();
            listed.sort_unstable();
            if listed != actual {
                return Err(Error::Parse(format!(
                    "column {c}: adjacency list disagrees with row lists"
                )));
            }
        }
        Ok(matrix)
    }

    /// Renders the standard alist format with zero padding.
    pub fn to_alist(&self) -> String {
        let n = self.num_bits;
        let m = self.num_checks();
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row {
                cols[c].push(r + 1);
            }
        }
        let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = format!("{n} {m}\n{max_col} {max_row}\n");
        out.push_str(
            &cols.iter().map(|c| c.len().to_string()).collect::<Vec<_>>().join(" "),
        );
        out.push('\n');
        out.push_str(
            &self.rows.iter().map(|r| r.len().to_string()).collect::<Vec<_>>().join(" "),
        );
        out.push('\n');
        for col in &cols {
            let mut entries: Vec<String> = col.iter().map(|r| r.to_string()).collect();
            entries.resize(max_col, "0".into());
            out.push_str(&entries.join(" "));
            out.push('\n');
        }
        for row in &self.rows {
            let mut entries: Vec<String> = row.iter().map(|c| (c + 1).to_string()).collect();
            entries.resize(max_row, "0".into());
            out.push_str(&entries.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    pub fn num_checks(&self) -> usize {
        self.rows.len()
    }

    pub fn row_support(&self, check: usize) -> &[usize] {
        &self.rows[check]
    }

    /// Checks containing the given bit, ascending.
    pub fn checks_of(&self, bit: usize) -> Vec<usize> {
        (0..self.rows.len()).filter(|&r| self.rows[r].contains(&bit)).collect()
    }

    /// True when the word satisfies every check over GF(2).
    pub fn is_codeword(&self, word: &[u8]) -> bool {
        word.len() == self.num_bits
            && self
                .rows
                .iter()
                .all(|row| row.iter().map(|&c| word[c] as u32).sum::<u32>() % 2 == 0)
    }

    /// GF(2) null-space basis in reduced echelon form, deterministic.
    pub fn null_space_basis(&self) -> Vec<Vec<u8>> {
        let n = self.num_bits;
        let mut mat: Vec<Vec<u8>> = self
            .rows
            .iter()
            .map(|row| {
                let mut dense = vec![0u8; n];
                for &c in row {
                    dense[c] = 1;
                }
                dense
            })
            .collect();

        let mut pivot_cols = Vec::new();
        let mut rank = 0;
        for col in 0..n {
            let Some(pivot) = (rank..mat.len()).find(|&r| mat[r][col] == 1) else { continue };
            mat.swap(rank, pivot);
            for r in 0..mat.len() {
                if r != rank && mat[r][col] == 1 {
                    let (head, tail) = mat.split_at_mut(rank.max(r));
                    let (a, b) = if r < rank {
                        (&mut head[r], &tail[0])
                    } else {
                        (&mut tail[0], &head[rank])
                    };
                    for (x, y) in a.iter_mut().zip(b.iter()) {
                        *x ^= *y;
                    }
                }
            }
            pivot_cols.push(col);
            rank += 1;
            if rank == mat.len() {
                break;
            }
        }

        let free_cols: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
        let mut basis = Vec::with_capacity(free_cols.len());
        for &fc in &free_cols {
            let mut vec = vec![0u8; n];
            vec[fc] = 1;
            for (r, &pc) in pivot_cols.iter().enumerate() {
                if r < mat.len() && mat[r][fc] == 1 {
                    vec[pc] = 1;
                }
            }
            basis.push(vec);
        }
        basis
    }

    /// Code dimension `k`.
    pub fn dimension(&self) -> usize {
        self.null_space_basis().len()
    }

    /// Combination of null-space basis vectors selected by message bits.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        let basis = self.null_space_basis();
        if message.len() != basis.len() {
            return Err(Error::Dimension(format!(
                "message has {} bits, code dimension is {}",
                message.len(),
                basis.len()
            )));
        }
        let mut word = vec![0u8; self.num_bits];
        for (bit, vec) in message.iter().zip(&basis) {
            if *bit == 1 {
                for (w, v) in word.iter_mut().zip(vec) {
                    *w ^= *v;
                }
            }
        }
        Ok(word)
    }

    /// All codewords in lexicographic order; errs beyond the cap.
    pub fn codewords(&self, cap: u64) -> Result<Vec<Vec<u8>>> {
        let k = self.dimension();
        if k >= 64 || (1u128 << k) > cap as u128 {
            return Err(Error::EnumerationCap {
                size: 1u128.checked_shl(k as u32).unwrap_or(u128::MAX),
                cap,
            });
        }
        let mut words = Vec::with_capacity(1 << k);
        for combo in 0u64..(1 << k) {
            let message: Vec<u8> = (0..k).map(|b| ((combo >> b) & 1) as u8).collect();
            words.push(self.encode(&message)?);
        }
        words.sort();
        words.dedup();
        Ok(words)
    }

    /// True when two checks share at least two bits (a length-4 cycle in
    /// the Tanner graph, i.e. girth below 6).
    pub fn has_four_cycles(&self) -> bool {
        for a in 0..self.rows.len() {
            for b in a + 1..self.rows.len() {
                let shared = self.rows[a].iter().filter(|c| self.rows[b].contains(c)).count();
                if shared >= 2 {
                    return true;
                }
            }
        }
        false
    }
}
