use std::fmt;

use crate::error::{Error, Result};

/// A nonempty bit-string message. `"0"` is reserved as the flag telling the
/// receiver to declare `H = 1`; every codeword index is sent as the minimal
/// binary representation of a positive integer, which always starts with 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    /// At most 64 bits, so that [`dec`](Self::dec) is exact.
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Usage("bit-strings are nonempty".into()));
        }
        if bits.len() > 64 {
            return Err(Error::Usage(format!("bit-string of {} bits exceeds 64", bits.len())));
        }
        Ok(Self { bits })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Usage(format!("'{other}' is not a bit"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }

    /// The single-bit flag `"0"`.
    pub fn flag() -> Self {
        Self { bits: vec![false] }
    }

    pub fn is_flag(&self) -> bool {
        self.bits == [false]
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer value, most significant bit first.
    pub fn dec(&self) -> u64 {
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Shortest binary representation of a positive integer.
pub fn string_of_int(m: u64) -> Result<BitString> {
    if m == 0 {
        return Err(Error::Usage("0 has no message string; \"0\" is the reserved flag".into()));
    }
    let width = 64 - m.leading_zeros() as usize;
    Ok(BitString { bits: (0..width).rev().map(|i| (m >> i) & 1 == 1).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_integers() {
        assert_eq!(string_of_int(1).unwrap().to_string(), "1");
        assert_eq!(string_of_int(2).unwrap().to_string(), "10");
        assert_eq!(string_of_int(6).unwrap().to_string(), "110");
        assert!(string_of_int(0).is_err());
    }

    #[test]
    fn dec_and_len() {
        let flag = BitString::parse("0").unwrap();
        assert_eq!((flag.dec(), flag.len()), (0, 1));
        assert!(flag.is_flag());
        let one = BitString::parse("1").unwrap();
        assert_eq!((one.dec(), one.len()), (1, 1));
        let six = BitString::parse("110").unwrap();
        assert_eq!((six.dec(), six.len()), (6, 3));
        assert!(BitString::parse("").is_err());
        assert!(BitString::parse("012").is_err());
    }

    proptest! {
        #[test]
        fn string_of_int_round_trips(m in 1u64..) {
            let b = string_of_int(m).unwrap();
            prop_assert_eq!(b.dec(), m);
            prop_assert!(b.bits()[0]);
            prop_assert!(!b.is_flag());
            prop_assert_eq!(b.len(), 64 - m.leading_zeros() as usize);
        }
    }
}
