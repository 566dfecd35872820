use crate::algebra::{blade_name, blade_product, Signature};
use crate::error::{Error, Result};

/// Largest `n` for which [`dump_cayley_table`] renders a table.
pub const CAYLEY_MAX_DIMENSION: usize = 5;

/// Signed blade name of a product, with an ASCII minus.
pub fn signed_blade(sign: i8, blade: u32) -> String {
    if sign < 0 {
        format!("-{}", blade_name(blade))
    } else {
        blade_name(blade)
    }
}

/// Multiplication table of the basis blades in canonical order.
///
/// The first line names the signature, the second lists the column blades, and
/// each following line starts with the row blade. Cells are whitespace-separated.
pub fn dump_cayley_table(sig: Signature) -> Result<String> {
    if sig.n() > CAYLEY_MAX_DIMENSION {
        return Err(Error::arg(format!(
            "{sig} has {} basis blades; a Cayley table would have {} cells, and tables are limited to n ≤ {CAYLEY_MAX_DIMENSION}",
            sig.dim(),
            sig.dim() * sig.dim()
        )));
    }
    let blades = sig.canonical_blades();
    let mut cells = vec![vec![String::new(); blades.len() + 1]; blades.len() + 1];
    for (j, &b) in blades.iter().enumerate() {
        cells[0][j + 1] = blade_name(b);
    }
    for (i, &a) in blades.iter().enumerate() {
        cells[i + 1][0] = blade_name(a);
        for (j, &b) in blades.iter().enumerate() {
            let (s, c) = blade_product(&sig, a, b)?;
            cells[i + 1][j + 1] = signed_blade(s, c);
        }
    }
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    let mut out = format!("{sig}\n");
    for row in &cells {
        let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        out.push_str(line.join(" ").trim_end());
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(table: &str, row: &str, col: &str) -> String {
        let lines: Vec<Vec<&str>> = table.lines().skip(1).map(|l| l.split_whitespace().collect()).collect();
        let j = lines[0].iter().position(|c| *c == col).unwrap() + 1;
        let r = lines[1..].iter().find(|r| r[0] == row).unwrap();
        r[j].to_string()
    }

    #[test]
    fn small_tables() {
        let t = dump_cayley_table(Signature::new(0, 1).unwrap()).unwrap();
        assert!(t.starts_with("Cl(0,1)\n"));
        assert_eq!(cell(&t, "e1", "e1"), "-1");
        let t = dump_cayley_table(Signature::new(1, 0).unwrap()).unwrap();
        assert_eq!(cell(&t, "e1", "e1"), "1");
        let t = dump_cayley_table(Signature::new(2, 0).unwrap()).unwrap();
        assert_eq!(cell(&t, "e12", "e12"), "-1");
        assert_eq!(cell(&t, "e2", "e1"), "-e12");
        assert_eq!(t.lines().count(), 6);
    }

    #[test]
    fn refuses_large_tables() {
        assert!(dump_cayley_table(Signature::new(6, 0).unwrap()).is_err());
        assert!(dump_cayley_table(Signature::new(3, 2).unwrap()).is_ok());
    }
}
