//! Standard Taguchi arrays and exact orthogonality checking.

use std::fmt;
use std::str::FromStr;

use super::DoeError;

/// A run matrix of zero-based level indices with per-column level counts.
///
/// Rows are experiment runs, columns are assignable factor slots. The matrix
/// is stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalArray {
    rows: usize,
    levels_per_column: Vec<usize>,
    cells: Vec<usize>,
}

impl OrthogonalArray {
    /// Builds an array after checking dimensional consistency: the cell
    /// buffer must be `rows × columns` and every cell must be a valid level
    /// index for its column.
    pub fn new(
        rows: usize,
        levels_per_column: Vec<usize>,
        cells: Vec<usize>,
    ) -> Result<Self, DoeError> {
        let columns = levels_per_column.len();
        if rows == 0 || columns == 0 {
            return Err(DoeError::InconsistentArray(
                "array must have at least one row and one column".into(),
            ));
        }
        if cells.len() != rows * columns {
            return Err(DoeError::InconsistentArray(format!(
                "{} cells for a {}x{} array",
                cells.len(),
                rows,
                columns
            )));
        }
        if let Some(q) = levels_per_column.iter().find(|&&q| q < 2) {
            return Err(DoeError::InconsistentArray(format!(
                "column level count {q} < 2"
            )));
        }
        for (i, &v) in cells.iter().enumerate() {
            let col = i % columns;
            if v >= levels_per_column[col] {
                return Err(DoeError::InconsistentArray(format!(
                    "cell ({}, {}) holds level {} but column has {} levels",
                    i / columns,
                    col,
                    v,
                    levels_per_column[col]
                )));
            }
        }
        Ok(Self { rows, levels_per_column, cells })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> usize {
        self.levels_per_column.len()
    }

    /// Number of levels in `column`.
    pub fn level_count(&self, column: usize) -> usize {
        self.levels_per_column[column]
    }

    pub fn levels_per_column(&self) -> &[usize] {
        &self.levels_per_column
    }

    /// Level index at (`row`, `column`).
    pub fn cell(&self, row: usize, column: usize) -> usize {
        self.cells[row * self.columns() + column]
    }

    pub fn column_values(&self, column: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.rows).map(move |r| self.cell(r, column))
    }
}

impl fmt::Display for OrthogonalArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.columns() {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.cell(r, c))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// The four standard designs this toolkit ships.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardArray {
    /// 4 runs, three 2-level columns.
    L4,
    /// 8 runs, seven 2-level columns.
    L8,
    /// 16 runs, fifteen 2-level columns.
    L16,
    /// 16 runs, one 4-level column plus twelve 2-level columns.
    L16Mixed,
}

impl StandardArray {
    /// Constructs the array. Two-level designs use the parity construction
    /// `cell(i, j) = popcount(i & j) mod 2` over column masks `j = 1..R-1`,
    /// which yields a strength-2 orthogonal array for any power-of-two run
    /// count. The mixed L16 merges columns 1 and 2 of the plain L16 together
    /// with their interaction column (mask 3) into one 4-level column via
    /// the pair map (0,0)/(0,1)/(1,0)/(1,1) -> 0..3, leaving masks 4..15 as
    /// twelve usable 2-level columns.
    pub fn build(self) -> OrthogonalArray {
        match self {
            StandardArray::L4 => two_level_parity_array(4),
            StandardArray::L8 => two_level_parity_array(8),
            StandardArray::L16 => two_level_parity_array(16),
            StandardArray::L16Mixed => {
                let base = two_level_parity_array(16);
                let rows = base.rows();
                let mut levels = Vec::with_capacity(13);
                levels.push(4);
                levels.extend(std::iter::repeat(2).take(12));
                let mut cells = Vec::with_capacity(rows * 13);
                for r in 0..rows {
                    // Base columns are masks 1..=15 at indices 0..=14.
                    let merged = 2 * base.cell(r, 0) + base.cell(r, 1);
                    cells.push(merged);
                    for c in 3..15 {
                        cells.push(base.cell(r, c));
                    }
                }
                OrthogonalArray::new(rows, levels, cells)
                    .expect("standard mixed array is dimensionally consistent")
            }
        }
    }
}

impl FromStr for StandardArray {
    type Err = DoeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // Accept both the bare name and the full designation, e.g.
        // "L16_mixed(4^1·2^12)".
        let head = s.split('(').next().unwrap_or("").trim();
        let normalized = head.to_ascii_lowercase().replace('-', "_");
        match normalized.as_str() {
            "l4" => Ok(StandardArray::L4),
            "l8" => Ok(StandardArray::L8),
            "l16" => Ok(StandardArray::L16),
            "l16_mixed" | "l16mixed" => Ok(StandardArray::L16Mixed),
            _ => Err(DoeError::UnsupportedDesign(s.to_string())),
        }
    }
}

impl fmt::Display for StandardArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            StandardArray::L4 => "L4(2^3)",
            StandardArray::L8 => "L8(2^7)",
            StandardArray::L16 => "L16(2^15)",
            StandardArray::L16Mixed => "L16_mixed(4^1·2^12)",
        };
        f.write_str(name)
    }
}

fn two_level_parity_array(runs: usize) -> OrthogonalArray {
    debug_assert!(runs.is_power_of_two());
    let columns = runs - 1;
    let mut cells = Vec::with_capacity(runs * columns);
    for i in 0..runs {
        for j in 1..runs {
            cells.push(((i & j).count_ones() % 2) as usize);
        }
    }
    OrthogonalArray::new(runs, vec![2; columns], cells)
        .expect("parity construction is dimensionally consistent")
}

/// Builds one of the shipped standard arrays by name.
pub fn build_standard_array(name: &str) -> Result<OrthogonalArray, DoeError> {
    Ok(StandardArray::from_str(name)?.build())
}

/// One exact counting failure found by [`verify_orthogonality`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrthogonalityViolation {
    /// A level does not appear exactly `rows / levels` times in its column.
    LevelBalance { column: usize, level: usize, count: usize, expected: usize },
    /// An ordered level pair does not appear exactly `rows / (q1·q2)` times
    /// across a column pair.
    PairBalance {
        columns: (usize, usize),
        levels: (usize, usize),
        count: usize,
        expected: usize,
    },
    /// The run count is not divisible by a column's level count or by a
    /// column pair's level-count product, so exact balance is impossible.
    Indivisible { columns: Vec<usize>, runs: usize, divisor: usize },
}

/// Outcome of the exact balance / pairwise-orthogonality check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalityReport {
    pub pass: bool,
    pub violations: Vec<OrthogonalityViolation>,
}

/// Checks exact column balance and pairwise orthogonality by integer
/// counting; every failing (column, level) and (column pair, level pair) is
/// enumerated.
pub fn verify_orthogonality(array: &OrthogonalArray) -> OrthogonalityReport {
    let mut violations = Vec::new();
    let rows = array.rows();

    for c in 0..array.columns() {
        let q = array.level_count(c);
        if rows % q != 0 {
            violations.push(OrthogonalityViolation::Indivisible {
                columns: vec![c],
                runs: rows,
                divisor: q,
            });
            continue;
        }
        let expected = rows / q;
        let mut counts = vec![0usize; q];
        for v in array.column_values(c) {
            counts[v] += 1;
        }
        for (level, &count) in counts.iter().enumerate() {
            if count != expected {
                violations.push(OrthogonalityViolation::LevelBalance {
                    column: c,
                    level,
                    count,
                    expected,
                });
            }
        }
    }

    for a in 0..array.columns() {
        for b in (a + 1)..array.columns() {
            let (qa, qb) = (array.level_count(a), array.level_count(b));
            if rows % (qa * qb) != 0 {
                violations.push(OrthogonalityViolation::Indivisible {
                    columns: vec![a, b],
                    runs: rows,
                    divisor: qa * qb,
                });
                continue;
            }
            let expected = rows / (qa * qb);
            let mut counts = vec![0usize; qa * qb];
            for r in 0..rows {
                counts[array.cell(r, a) * qb + array.cell(r, b)] += 1;
            }
            for (idx, &count) in counts.iter().enumerate() {
                if count != expected {
                    violations.push(OrthogonalityViolation::PairBalance {
                        columns: (a, b),
                        levels: (idx / qb, idx % qb),
                        count,
                        expected,
                    });
                }
            }
        }
    }

    OrthogonalityReport { pass: violations.is_empty(), violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    /// Independent oracle: count levels and ordered pairs with hash maps,
    /// written separately from the production counting path.
    fn brute_force_orthogonal(array: &OrthogonalArray) -> bool {
        let rows = array.rows();
        for c in 0..array.columns() {
            let q = array.level_count(c);
            if rows % q != 0 {
                return false;
            }
            let mut seen: HashMap<usize, usize> = HashMap::new();
            for v in array.column_values(c) {
                *seen.entry(v).or_insert(0) += 1;
            }
            if (0..q).any(|lvl| seen.get(&lvl).copied().unwrap_or(0) != rows / q) {
                return false;
            }
        }
        for a in 0..array.columns() {
            for b in (a + 1)..array.columns() {
                let (qa, qb) = (array.level_count(a), array.level_count(b));
                if rows % (qa * qb) != 0 {
                    return false;
                }
                let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
                for r in 0..rows {
                    *seen.entry((array.cell(r, a), array.cell(r, b))).or_insert(0) += 1;
                }
                for la in 0..qa {
                    for lb in 0..qb {
                        if seen.get(&(la, lb)).copied().unwrap_or(0) != rows / (qa * qb) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    #[test]
    fn l4_matches_forced_structure() {
        let a = StandardArray::L4.build();
        assert_eq!(a.rows(), 4);
        assert_eq!(a.columns(), 3);
        for c in 0..3 {
            let ones: usize = a.column_values(c).sum();
            assert_eq!(ones, 2, "two of each level per column");
        }
        // Every column pair shows each of the four ordered pairs exactly once.
        for x in 0..3 {
            for y in (x + 1)..3 {
                let mut seen = [[0usize; 2]; 2];
                for r in 0..4 {
                    seen[a.cell(r, x)][a.cell(r, y)] += 1;
                }
                assert_eq!(seen, [[1, 1], [1, 1]]);
            }
        }
    }

    #[test]
    fn l16_columns_are_balanced() {
        let a = StandardArray::L16.build();
        assert_eq!((a.rows(), a.columns()), (16, 15));
        for c in 0..15 {
            let ones: usize = a.column_values(c).sum();
            assert_eq!(ones, 8, "eight 0s and eight 1s in column {c}");
        }
    }

    #[test]
    fn l16_mixed_merged_column_and_pair_counts() {
        let a = StandardArray::L16Mixed.build();
        assert_eq!((a.rows(), a.columns()), (16, 13));
        assert_eq!(a.level_count(0), 4);
        let mut counts = [0usize; 4];
        for v in a.column_values(0) {
            counts[v] += 1;
        }
        assert_eq!(counts, [4, 4, 4, 4]);
        // Each (4-level, 2-level) ordered pair appears 16/(4*2) = 2 times.
        for c in 1..13 {
            let mut seen = [[0usize; 2]; 4];
            for r in 0..16 {
                seen[a.cell(r, 0)][a.cell(r, c)] += 1;
            }
            for row in seen {
                assert_eq!(row, [2, 2], "column pair (0, {c})");
            }
        }
    }

    #[test]
    fn all_standard_arrays_pass_verification_and_oracle() {
        for name in [
            StandardArray::L4,
            StandardArray::L8,
            StandardArray::L16,
            StandardArray::L16Mixed,
        ] {
            let a = name.build();
            let report = verify_orthogonality(&a);
            assert!(report.pass, "{name} failed: {:?}", report.violations);
            assert!(brute_force_orthogonal(&a), "{name} fails the counting oracle");
        }
    }

    #[test]
    fn single_cell_flip_always_fails() {
        for name in [
            StandardArray::L4,
            StandardArray::L8,
            StandardArray::L16,
            StandardArray::L16Mixed,
        ] {
            let a = name.build();
            for r in 0..a.rows() {
                for c in 0..a.columns() {
                    let mut cells: Vec<usize> =
                        (0..a.rows()).flat_map(|i| (0..a.columns()).map(move |j| (i, j)))
                            .map(|(i, j)| a.cell(i, j))
                            .collect();
                    let idx = r * a.columns() + c;
                    cells[idx] = (cells[idx] + 1) % a.level_count(c);
                    let mutated =
                        OrthogonalArray::new(a.rows(), a.levels_per_column().to_vec(), cells)
                            .unwrap();
                    let report = verify_orthogonality(&mutated);
                    assert!(!report.pass, "{name} flip ({r},{c}) not caught");
                    assert!(report
                        .violations
                        .iter()
                        .any(|v| matches!(v, OrthogonalityViolation::LevelBalance { .. })));
                }
            }
        }
    }

    #[test]
    fn construction_is_deterministic() {
        for name in [
            StandardArray::L4,
            StandardArray::L8,
            StandardArray::L16,
            StandardArray::L16Mixed,
        ] {
            assert_eq!(name.build(), name.build());
        }
    }

    #[test]
    fn name_parsing_accepts_designations() {
        assert_eq!("L4(2^3)".parse::<StandardArray>().unwrap(), StandardArray::L4);
        assert_eq!("L8(2^7)".parse::<StandardArray>().unwrap(), StandardArray::L8);
        assert_eq!("L16(2^15)".parse::<StandardArray>().unwrap(), StandardArray::L16);
        assert_eq!(
            "L16_mixed(4^1·2^12)".parse::<StandardArray>().unwrap(),
            StandardArray::L16Mixed
        );
        assert_eq!("l16-mixed".parse::<StandardArray>().unwrap(), StandardArray::L16Mixed);
        assert!(build_standard_array("L9").is_err());
    }

    #[test]
    fn inconsistent_dimensions_rejected() {
        assert!(OrthogonalArray::new(4, vec![2, 2], vec![0; 7]).is_err());
        assert!(OrthogonalArray::new(4, vec![2, 1], vec![0; 8]).is_err());
        assert!(OrthogonalArray::new(2, vec![2], vec![0, 2]).is_err());
    }
}
