use std::collections::HashMap;

/// The fixed, sorted set of strings every relation ranges over.
///
/// Index order equals byte-wise lexicographic order, so comparing encoded
/// indices compares strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    strings: Vec<String>,
    quoted: Vec<bool>,
    index: HashMap<String, u32>,
    bits: u32,
}

impl Universe {
    pub fn new(entries: impl IntoIterator<Item = (String, bool)>) -> Self {
        let mut merged: std::collections::BTreeMap<String, bool> = Default::default();
        for (s, q) in entries {
            *merged.entry(s).or_insert(false) |= q;
        }
        let (strings, quoted): (Vec<String>, Vec<bool>) = merged.into_iter().unzip();
        let index = strings
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        let bits = bits_for(strings.len());
        Universe {
            strings,
            quoted,
            index,
            bits,
        }
    }

    pub fn from_strings<S: Into<String>>(strings: impl IntoIterator<Item = S>) -> Self {
        Self::new(strings.into_iter().map(|s| (s.into(), false)))
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn strings(&self) -> &[String] {
        &self.strings
    }

    pub fn get(&self, index: u32) -> &str {
        &self.strings[index as usize]
    }

    pub fn is_quoted(&self, index: u32) -> bool {
        self.quoted[index as usize]
    }

    pub fn index_of(&self, s: &str) -> Option<u32> {
        self.index.get(s).copied()
    }

    /// Width of one attribute block: `ceil(log2(size))`, at least 1.
    pub fn bits_per_attribute(&self) -> u32 {
        self.bits
    }

    /// Big-endian binary encoding of `s`, or `None` outside the universe.
    pub fn encode(&self, s: &str) -> Option<Vec<bool>> {
        let idx = self.index_of(s)?;
        Some(
            (0..self.bits)
                .map(|i| (idx >> (self.bits - 1 - i)) & 1 == 1)
                .collect(),
        )
    }
}

fn bits_for(size: usize) -> u32 {
    let mut bits = 1;
    while (1usize << bits) < size {
        bits += 1;
    }
    bits
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family() -> Universe {
        Universe::from_strings(["John", "Mary", "Alice", "Joe", "Jane"])
    }

    #[test]
    fn sorted_by_bytes() {
        let u = Universe::from_strings(["b", "B", "a", "ab", "a"]);
        assert_eq!(u.strings(), ["B", "a", "ab", "b"]);
    }

    #[test]
    fn encodings() {
        let u = family();
        assert_eq!(u.bits_per_attribute(), 3);
        assert_eq!(u.encode("Alice").unwrap(), vec![false, false, false]);
        assert_eq!(u.encode("Mary").unwrap(), vec![true, false, false]);
        assert!(u.encode("Bob").is_none());
        let single = Universe::from_strings(["only"]);
        assert_eq!(single.bits_per_attribute(), 1);
        assert_eq!(single.encode("only").unwrap(), vec![false]);
    }

    #[test]
    fn widths() {
        assert_eq!(bits_for(0), 1);
        assert_eq!(bits_for(2), 1);
        assert_eq!(bits_for(3), 2);
        assert_eq!(bits_for(8), 3);
        assert_eq!(bits_for(9), 4);
        assert_eq!(bits_for(10_000), 14);
    }
}
