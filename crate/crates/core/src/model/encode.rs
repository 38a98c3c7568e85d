use super::KripkeModel;

/// The list encoding of a model together with its size `‖𝔐‖`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedModel {
    pub bytes: Vec<u8>,
    /// `|W| + Σ_R |R|·ar(R)·width`; separators are not counted.
    pub size: usize,
}

/// Bits per world index: `⌈log₂|W|⌉`, at least 1.
pub fn index_width(worlds: usize) -> usize {
    let mut width = 0;
    while (1usize << width) < worlds {
        width += 1;
    }
    width.max(1)
}

/// `1^|W|`, then for each relation in declaration order a `>` followed by its
/// tuples (lexicographic) joined by `#`. A tuple is the concatenation of its
/// components as big-endian binary strings of fixed width.
pub fn encode_list(model: &KripkeModel) -> EncodedModel {
    let width = index_width(model.world_count());
    let mut bytes = vec![b'1'; model.world_count()];
    let mut size = model.world_count();
    for (symbol, tuples) in model.relations() {
        bytes.push(b'>');
        for (i, tuple) in tuples.iter().enumerate() {
            if i > 0 {
                bytes.push(b'#');
            }
            for &w in tuple {
                for bit in (0..width).rev() {
                    bytes.push(if (w >> bit) & 1 == 1 { b'1' } else { b'0' });
                }
            }
        }
        size += tuples.len() * symbol.arity() * width;
    }
    EncodedModel { bytes, size }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn width_rule() {
        assert_eq!(index_width(1), 1);
        assert_eq!(index_width(2), 1);
        assert_eq!(index_width(3), 2);
        assert_eq!(index_width(4), 2);
        assert_eq!(index_width(5), 3);
    }

    #[test]
    fn two_worlds_one_pair() {
        let m = KripkeModel::parse("worlds 2\nrel R/2 : (0,1)\n").unwrap();
        let e = encode_list(&m);
        assert_eq!(e.bytes, b"11>01");
        assert_eq!(e.size, 4);
    }

    #[test]
    fn one_world_empty_relation() {
        let m = KripkeModel::parse("worlds 1\nrel R/2\n").unwrap();
        let e = encode_list(&m);
        assert_eq!(e.bytes, b"1>");
        assert_eq!(e.size, 1);
    }

    #[test]
    fn four_worlds_two_pairs() {
        let m = KripkeModel::parse("worlds 4\nrel R/2 : (2,3) (0,1)\n").unwrap();
        let e = encode_list(&m);
        assert_eq!(e.bytes, b"1111>0001#1011");
        assert_eq!(e.size, 12);
    }
}
